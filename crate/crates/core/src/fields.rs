//! Named constructors for the grid functions that experiments use as test
//! functions, amplitudes and multipliers-by-multiplication: periodic bumps,
//! plateau bumps, periodized Gaussians, cosines and seeded band-limited
//! fields.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::Result;
use crate::grid::{dft, idft, GridFunction};

/// Signed distance to `c` on the unit circle, in `[-1/2, 1/2)`.
#[inline]
pub fn periodic_offset(x: f64, c: f64) -> f64 {
    let mut d = x - c;
    d -= d.round();
    d
}

/// The standard compactly supported bump profile on `[-1, 1]`:
/// `exp(1 - 1/(1 - t^2))` inside, zero outside.
#[inline]
pub fn bump_profile(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Smooth transition equal to 0 for `s <= 0` and 1 for `s >= 1`.
#[inline]
fn smoothstep_inf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
}

/// Smooth periodic bump centered at `center` with support half-width `width`
/// per axis (product structure in higher dimensions).
pub fn bump(dim: usize, n: usize, center: &[f64], width: f64) -> Result<GridFunction> {
    GridFunction::from_sampler(dim, n, |x| {
        let mut v = 1.0;
        for axis in 0..dim {
            v *= bump_profile(periodic_offset(x[axis], center[axis]) / width);
        }
        Complex64::new(v, 0.0)
    })
}

/// Smooth bump that is exactly 1 on a plateau of half-width
/// `plateau_fraction * width` and vanishes outside half-width `width`.
pub fn plateau_bump(
    dim: usize,
    n: usize,
    center: &[f64],
    width: f64,
    plateau_fraction: f64,
) -> Result<GridFunction> {
    let inner = width * plateau_fraction.clamp(0.0, 0.99);
    GridFunction::from_sampler(dim, n, |x| {
        let mut v = 1.0;
        for axis in 0..dim {
            let t = periodic_offset(x[axis], center[axis]).abs();
            v *= smoothstep_inf((width - t) / (width - inner));
        }
        Complex64::new(v, 0.0)
    })
}

/// Periodized Gaussian `sum_m exp(-pi ||x - c + m||^2 / sigma^2)`.
pub fn gaussian(dim: usize, n: usize, center: &[f64], sigma: f64) -> Result<GridFunction> {
    GridFunction::from_sampler(dim, n, |x| {
        Complex64::new(periodized_gaussian_at(dim, x, center, sigma, 1.0), 0.0)
    })
}

/// Evaluate the periodized Gaussian with spatial shrink factor `shrink`
/// applied to the offset: `sum_m exp(-pi ||shrink*(x - c + m)||^2 / sigma^2)`.
pub(crate) fn periodized_gaussian_at(
    dim: usize,
    x: &[f64],
    center: &[f64],
    sigma: f64,
    shrink: f64,
) -> f64 {
    let mut total = 0.0;
    let reps: &[f64] = &[-1.0, 0.0, 1.0];
    match dim {
        1 => {
            for &m in reps {
                let u = shrink * (x[0] - center[0] + m);
                total += (-std::f64::consts::PI * u * u / (sigma * sigma)).exp();
            }
        }
        2 => {
            for &m0 in reps {
                for &m1 in reps {
                    let u0 = shrink * (x[0] - center[0] + m0);
                    let u1 = shrink * (x[1] - center[1] + m1);
                    total +=
                        (-std::f64::consts::PI * (u0 * u0 + u1 * u1) / (sigma * sigma)).exp();
                }
            }
        }
        _ => {
            for &m0 in reps {
                for &m1 in reps {
                    for &m2 in reps {
                        let u0 = shrink * (x[0] - center[0] + m0);
                        let u1 = shrink * (x[1] - center[1] + m1);
                        let u2 = shrink * (x[2] - center[2] + m2);
                        total += (-std::f64::consts::PI * (u0 * u0 + u1 * u1 + u2 * u2)
                            / (sigma * sigma))
                            .exp();
                    }
                }
            }
        }
    }
    total
}

/// Real cosine field `amplitude * cos(2 pi k.x)`.
pub fn cosine(dim: usize, n: usize, k: &[i64], amplitude: f64) -> Result<GridFunction> {
    GridFunction::from_sampler(dim, n, |x| {
        let phase: f64 = (0..dim).map(|a| k[a] as f64 * x[a]).sum();
        Complex64::new(amplitude * (2.0 * std::f64::consts::PI * phase).cos(), 0.0)
    })
}

/// Complex exponential `e^{2 pi i k.x}`.
pub fn exponential(dim: usize, n: usize, k: &[i64]) -> Result<GridFunction> {
    GridFunction::from_sampler(dim, n, |x| {
        let phase: f64 = (0..dim).map(|a| k[a] as f64 * x[a]).sum();
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
    })
}

/// Seeded mean-zero band-limited complex field: independent unit-disc
/// coefficients on frequencies with `|xi_i| <= max_freq`, zero at the origin.
pub fn random_bandlimited(
    dim: usize,
    n: usize,
    max_freq: i64,
    seed: u64,
) -> Result<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = GridFunction::zero(dim, n)?;
    let mut spec = dft(&zero);
    let spec = {
        let coeffs = spec_freqs(dim, n);
        for xi in coeffs {
            if xi[..dim].iter().all(|&c| c == 0) {
                continue;
            }
            if xi[..dim].iter().any(|&c| c.abs() > max_freq) {
                continue;
            }
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            spec.set_coefficient(&xi[..dim], Complex64::new(re, im));
        }
        spec
    };
    Ok(idft(&spec))
}

/// Seeded mean-zero band-limited real field (Hermitian-symmetrized spectrum).
pub fn random_bandlimited_real(
    dim: usize,
    n: usize,
    max_freq: i64,
    seed: u64,
) -> Result<GridFunction> {
    let f = random_bandlimited(dim, n, max_freq, seed)?;
    let g = f.map(|v| Complex64::new(v.re, 0.0));
    Ok(g)
}

/// Seeded real white-noise field, values uniform in `[-1, 1]`.
pub fn random_uniform_real(dim: usize, n: usize, seed: u64) -> Result<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n.pow(dim as u32);
    let values = (0..total)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
        .collect();
    GridFunction::from_values(dim, n, values)
}

fn spec_freqs(dim: usize, n: usize) -> Vec<[i64; 3]> {
    crate::grid::multi_indices(dim, n)
        .map(|(_, idx)| {
            let mut xi = [0i64; 3];
            for axis in 0..dim {
                xi[axis] = crate::grid::index_to_freq(idx[axis], n);
            }
            xi
        })
        .collect()
}
