//! Canonical weakly-null sequence generators (modulated oscillations and
//! Gaussian concentrations), the truncation operator, and convergence
//! diagnostics.
//!
//! Every generated member is mean-subtracted so the zero-frequency
//! convention of the homogeneous multipliers stays invisible. Truncation
//! follows the hard form: values outside `[-l, l]` map to zero (not a
//! clamp); this is what makes the identity `u . T_l(u) = T_l(u)^2` hold
//! pointwise, bit for bit. The classical clamped truncation is a different
//! operator and is intentionally not what `truncate` computes.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields;
use crate::grid::GridFunction;

type CustomSampler = Arc<dyn Fn(&[f64], usize) -> Complex64 + Send + Sync>;

/// A family `(u_n)` indexed by the schedule `n_schedule`.
#[derive(Clone)]
pub enum SequenceSpec {
    /// `a(x) e^{2 pi i n k.x}`, or `sqrt(2) a(x) cos(2 pi n k.x)` in real
    /// form.
    Oscillation {
        amplitude: GridFunction,
        wavevector: Vec<i64>,
        real_form: bool,
        schedule: Vec<usize>,
    },
    /// Superposition of two oscillations sharing the amplitude profile.
    PairOscillation {
        amplitude: GridFunction,
        wavevector: Vec<i64>,
        wavevector2: Vec<i64>,
        real_form: bool,
        schedule: Vec<usize>,
    },
    /// `n^{d/p} U(n (x - x0))` with `U` a periodized Gaussian of width
    /// `sigma`.
    Concentration {
        dim: usize,
        center: Vec<f64>,
        exponent: f64,
        width: f64,
        schedule: Vec<usize>,
    },
    /// User-supplied sampler `(x, n) -> value`.
    Custom {
        dim: usize,
        sampler: CustomSampler,
        schedule: Vec<usize>,
    },
}

impl std::fmt::Debug for SequenceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SequenceSpec::Oscillation { wavevector, real_form, schedule, .. } => f
                .debug_struct("Oscillation")
                .field("wavevector", wavevector)
                .field("real_form", real_form)
                .field("schedule", schedule)
                .finish(),
            SequenceSpec::PairOscillation { wavevector, wavevector2, schedule, .. } => f
                .debug_struct("PairOscillation")
                .field("wavevector", wavevector)
                .field("wavevector2", wavevector2)
                .field("schedule", schedule)
                .finish(),
            SequenceSpec::Concentration { center, exponent, width, schedule, .. } => f
                .debug_struct("Concentration")
                .field("center", center)
                .field("exponent", exponent)
                .field("width", width)
                .field("schedule", schedule)
                .finish(),
            SequenceSpec::Custom { dim, schedule, .. } => f
                .debug_struct("Custom")
                .field("dim", dim)
                .field("schedule", schedule)
                .finish(),
        }
    }
}

impl SequenceSpec {
    pub fn oscillation(
        amplitude: GridFunction,
        wavevector: Vec<i64>,
        real_form: bool,
        schedule: Vec<usize>,
    ) -> Result<Self> {
        if wavevector.len() != amplitude.dim() || wavevector.iter().all(|&k| k == 0) {
            return Err(Error::InvalidParameter(
                "oscillation wavevector must be nonzero and match the amplitude dimension".into(),
            ));
        }
        check_schedule(&schedule)?;
        Ok(SequenceSpec::Oscillation {
            amplitude,
            wavevector,
            real_form,
            schedule,
        })
    }

    pub fn pair_oscillation(
        amplitude: GridFunction,
        wavevector: Vec<i64>,
        wavevector2: Vec<i64>,
        real_form: bool,
        schedule: Vec<usize>,
    ) -> Result<Self> {
        if wavevector.len() != amplitude.dim()
            || wavevector2.len() != amplitude.dim()
            || wavevector.iter().all(|&k| k == 0)
            || wavevector2.iter().all(|&k| k == 0)
        {
            return Err(Error::InvalidParameter(
                "pair oscillation wavevectors must be nonzero and match the amplitude dimension"
                    .into(),
            ));
        }
        check_schedule(&schedule)?;
        Ok(SequenceSpec::PairOscillation {
            amplitude,
            wavevector,
            wavevector2,
            real_form,
            schedule,
        })
    }

    pub fn concentration(
        dim: usize,
        center: Vec<f64>,
        exponent: f64,
        width: f64,
        schedule: Vec<usize>,
    ) -> Result<Self> {
        if center.len() != dim {
            return Err(Error::InvalidDimension(center.len()));
        }
        if !(exponent > 1.0) {
            return Err(Error::InvalidExponent(exponent));
        }
        if !(width > 0.0 && width <= 0.25) {
            return Err(Error::InvalidParameter(format!(
                "concentration width {} outside (0, 0.25]",
                width
            )));
        }
        check_schedule(&schedule)?;
        Ok(SequenceSpec::Concentration {
            dim,
            center,
            exponent,
            width,
            schedule,
        })
    }

    pub fn custom<F>(dim: usize, schedule: Vec<usize>, sampler: F) -> Result<Self>
    where
        F: Fn(&[f64], usize) -> Complex64 + Send + Sync + 'static,
    {
        check_schedule(&schedule)?;
        Ok(SequenceSpec::Custom {
            dim,
            sampler: Arc::new(sampler),
            schedule,
        })
    }

    pub fn schedule(&self) -> &[usize] {
        match self {
            SequenceSpec::Oscillation { schedule, .. }
            | SequenceSpec::PairOscillation { schedule, .. }
            | SequenceSpec::Concentration { schedule, .. }
            | SequenceSpec::Custom { schedule, .. } => schedule,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SequenceSpec::Oscillation { amplitude, .. }
            | SequenceSpec::PairOscillation { amplitude, .. } => amplitude.dim(),
            SequenceSpec::Concentration { dim, .. } | SequenceSpec::Custom { dim, .. } => *dim,
        }
    }
}

fn check_schedule(schedule: &[usize]) -> Result<()> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "n_schedule must be nonempty and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn oscillation_values(
    amplitude: &GridFunction,
    wavevector: &[i64],
    real_form: bool,
    n: usize,
) -> Vec<Complex64> {
    let dim = amplitude.dim();
    let res = amplitude.resolution();
    let mut out = Vec::with_capacity(amplitude.len());
    for (flat, idx) in crate::grid::multi_indices(dim, res) {
        let phase: f64 = (0..dim)
            .map(|axis| wavevector[axis] as f64 * idx[axis] as f64 / res as f64)
            .sum::<f64>()
            * 2.0
            * PI
            * n as f64;
        let a = amplitude.values()[flat];
        if real_form {
            out.push(a * 2f64.sqrt() * phase.cos());
        } else {
            out.push(a * Complex64::from_polar(1.0, phase));
        }
    }
    out
}

/// Generate the `n`-th member of the family on an `N`-point grid.
///
/// Oscillations require `n * ||k||_inf < N/4`; concentrations require at
/// least 8 grid points per Gaussian width (`N sigma / n >= 8`). Violations
/// are reported as band-limit errors.
pub fn generate(spec: &SequenceSpec, n: usize, resolution: usize) -> Result<GridFunction> {
    if !spec.schedule().contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "n = {} is not in the schedule {:?}",
            n,
            spec.schedule()
        )));
    }
    let check_band = |k: &[i64]| -> Result<()> {
        let kmax = k.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as usize;
        if n * kmax >= resolution / 4 {
            return Err(Error::BandLimit(format!(
                "n ||k||_inf = {} not below N/4 = {}",
                n * kmax,
                resolution / 4
            )));
        }
        Ok(())
    };
    let f = match spec {
        SequenceSpec::Oscillation {
            amplitude,
            wavevector,
            real_form,
            ..
        } => {
            check_band(wavevector)?;
            if amplitude.resolution() != resolution {
                return Err(Error::ShapeMismatch {
                    expected: (amplitude.dim(), resolution),
                    got: (amplitude.dim(), amplitude.resolution()),
                });
            }
            let values = oscillation_values(amplitude, wavevector, *real_form, n);
            GridFunction::from_values(amplitude.dim(), resolution, values)?
        }
        SequenceSpec::PairOscillation {
            amplitude,
            wavevector,
            wavevector2,
            real_form,
            ..
        } => {
            check_band(wavevector)?;
            check_band(wavevector2)?;
            if amplitude.resolution() != resolution {
                return Err(Error::ShapeMismatch {
                    expected: (amplitude.dim(), resolution),
                    got: (amplitude.dim(), amplitude.resolution()),
                });
            }
            let a = oscillation_values(amplitude, wavevector, *real_form, n);
            let b = oscillation_values(amplitude, wavevector2, *real_form, n);
            let values = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            GridFunction::from_values(amplitude.dim(), resolution, values)?
        }
        SequenceSpec::Concentration {
            dim,
            center,
            exponent,
            width,
            ..
        } => {
            // sampling resolution: at least 8 grid points per Gaussian width
            if (resolution as f64) * width / (n as f64) < 8.0 {
                return Err(Error::BandLimit(format!(
                    "concentration width {} at n = {} under-resolved on N = {}",
                    width, n, resolution
                )));
            }
            let scale = (n as f64).powf(*dim as f64 / *exponent);
            let center = center.clone();
            let width = *width;
            let dim = *dim;
            GridFunction::from_sampler(dim, resolution, move |x| {
                Complex64::new(
                    scale
                        * fields::periodized_gaussian_at(dim, x, &center, width, n as f64),
                    0.0,
                )
            })?
        }
        SequenceSpec::Custom { dim, sampler, .. } => {
            let sampler = sampler.clone();
            GridFunction::from_sampler(*dim, resolution, move |x| sampler(x, n))?
        }
    };
    Ok(keep_real_flag(f.mean_subtracted(), f.is_real()))
}

/// Mean subtraction of a real field leaves a real field; the imaginary
/// residue of the complex mean is discarded in that case.
fn keep_real_flag(f: GridFunction, was_real: bool) -> GridFunction {
    if was_real && !f.is_real() {
        f.map(|v| Complex64::new(v.re, 0.0))
    } else {
        f
    }
}

/// Hard truncation: `value` if `|value| <= l`, else `0`.
pub fn truncate(f: &GridFunction, l: f64) -> Result<GridFunction> {
    if !f.is_real() {
        return Err(Error::ComplexInput);
    }
    if !(l > 0.0) {
        return Err(Error::InvalidParameter(format!("level l = {} <= 0", l)));
    }
    Ok(f.map(|v| {
        if v.re.abs() <= l {
            v
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Fraction of grid points with `|u_n - u| > eps`, per member of `seq`.
pub fn convergence_in_measure(
    seq: &[GridFunction],
    u: &GridFunction,
    eps: f64,
) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps = {} <= 0", eps)));
    }
    let mut out = Vec::with_capacity(seq.len());
    for f in seq {
        f.same_shape(u)?;
        let count = f
            .values()
            .iter()
            .zip(u.values())
            .filter(|(a, b)| (*a - *b).norm() > eps)
            .count();
        out.push(count as f64 / f.len() as f64);
    }
    Ok(out)
}
