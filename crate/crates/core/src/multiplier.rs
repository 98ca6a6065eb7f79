//! Fourier multiplier operators on the torus grid: sphere symbols and their
//! 0-homogeneous extensions, Riesz transforms and the Riesz potential, the
//! multiplication operator, their commutator, and empirical operator-norm
//! estimation.
//!
//! Zero frequency: homogeneous extensions set `m(0) = 0` (the direction of
//! the zero vector is undefined); experiments keep their data mean-zero so
//! the convention is invisible. Constant symbols constructed explicitly via
//! [`RdSymbol::constant`] act as exact scalar multiples, including on the
//! mean.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decomp::RdSymbol;
use crate::error::{Error, Result};
use crate::fields;
use crate::grid::{dft, idft, GridFunction};

type DirectionFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// A symbol on the unit sphere `S^{d-1}` with recorded smoothness order.
///
/// For `d = 1` the sphere is the two poles; for `d = 2` symbols are held as
/// trigonometric polynomials of the angle so derivatives (and the `C^kappa`
/// norm) are exact; closures over the unit vector cover the general case.
#[derive(Clone)]
pub struct SphereSymbol {
    dim: usize,
    kappa: usize,
    eval: SymbolEval,
    sup_norm: f64,
    c_kappa_norm: f64,
}

#[derive(Clone)]
enum SymbolEval {
    TwoPoint {
        plus: Complex64,
        minus: Complex64,
    },
    /// `psi(theta) = sum_m cos_c[m] cos(m theta) + sin_c[m] sin(m theta)`
    TrigPoly {
        cos_c: Vec<Complex64>,
        sin_c: Vec<Complex64>,
    },
    Directional(DirectionFn),
}

impl std::fmt::Debug for SphereSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SphereSymbol")
            .field("dim", &self.dim)
            .field("kappa", &self.kappa)
            .field("sup_norm", &self.sup_norm)
            .field("c_kappa_norm", &self.c_kappa_norm)
            .finish()
    }
}

fn default_kappa(dim: usize) -> usize {
    dim / 2 + 1
}

fn trig_eval(cos_c: &[Complex64], sin_c: &[Complex64], theta: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, c) in cos_c.iter().enumerate() {
        acc += c * (m as f64 * theta).cos();
    }
    for (m, c) in sin_c.iter().enumerate() {
        acc += c * (m as f64 * theta).sin();
    }
    acc
}

/// Exact angular derivative of a trigonometric polynomial.
fn trig_derivative(cos_c: &[Complex64], sin_c: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let len = cos_c.len().max(sin_c.len());
    let mut dcos = vec![Complex64::new(0.0, 0.0); len];
    let mut dsin = vec![Complex64::new(0.0, 0.0); len];
    for m in 0..len {
        let c = cos_c.get(m).copied().unwrap_or_default();
        let s = sin_c.get(m).copied().unwrap_or_default();
        // d/dt cos(mt) = -m sin(mt);  d/dt sin(mt) = m cos(mt)
        dsin[m] = -(m as f64) * c;
        dcos[m] = (m as f64) * s;
    }
    (dcos, dsin)
}

fn trig_sup(cos_c: &[Complex64], sin_c: &[Complex64]) -> f64 {
    let samples = 2048;
    (0..samples)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / samples as f64;
            trig_eval(cos_c, sin_c, theta).norm()
        })
        .fold(0.0, f64::max)
}

fn trig_c_kappa(cos_c: &[Complex64], sin_c: &[Complex64], kappa: usize) -> f64 {
    let mut total = 0.0;
    let mut c = cos_c.to_vec();
    let mut s = sin_c.to_vec();
    for _ in 0..=kappa {
        total += trig_sup(&c, &s);
        let (dc, ds) = trig_derivative(&c, &s);
        c = dc;
        s = ds;
    }
    total
}

impl SphereSymbol {
    /// `d = 1` symbol: its values at the poles `+1` and `-1`.
    pub fn two_point(plus: Complex64, minus: Complex64) -> Self {
        let sup = plus.norm().max(minus.norm());
        Self {
            dim: 1,
            kappa: default_kappa(1),
            eval: SymbolEval::TwoPoint { plus, minus },
            sup_norm: sup,
            c_kappa_norm: sup,
        }
    }

    /// `d = 2` symbol as a trigonometric polynomial of the polar angle.
    /// Derivatives, and hence the `C^kappa` norm, are exact.
    pub fn trig_poly(cos_c: Vec<Complex64>, sin_c: Vec<Complex64>) -> Self {
        let kappa = default_kappa(2);
        let sup = trig_sup(&cos_c, &sin_c);
        let c_kappa = trig_c_kappa(&cos_c, &sin_c, kappa);
        Self {
            dim: 2,
            kappa,
            eval: SymbolEval::TrigPoly { cos_c, sin_c },
            sup_norm: sup,
            c_kappa_norm: c_kappa,
        }
    }

    /// Symbol given directly as a function of the unit vector. The recorded
    /// `C^kappa` norm is the sampled sup norm; callers with derivative
    /// information should override it via [`SphereSymbol::with_c_kappa_norm`].
    pub fn from_direction<F>(dim: usize, kappa: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        let eval: DirectionFn = Arc::new(f);
        let sup = sampled_sup(dim, &eval);
        Self {
            dim,
            kappa,
            eval: SymbolEval::Directional(eval),
            sup_norm: sup,
            c_kappa_norm: sup,
        }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        match dim {
            1 => Self::two_point(c, c),
            2 => Self::trig_poly(vec![c], vec![]),
            _ => {
                let mut s = Self::from_direction(dim, default_kappa(dim), move |_| c);
                s.sup_norm = c.norm();
                s.c_kappa_norm = c.norm();
                s
            }
        }
    }

    /// The coordinate symbol `e -> e_axis`.
    pub fn coordinate(dim: usize, axis: usize) -> Self {
        assert!(axis < dim);
        match (dim, axis) {
            (1, 0) => Self::two_point(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)),
            (2, 0) => Self::trig_poly(
                vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                vec![],
            ),
            (2, 1) => Self::trig_poly(
                vec![],
                vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ),
            _ => Self::from_direction(dim, default_kappa(dim), move |e| {
                Complex64::new(e[axis], 0.0)
            }),
        }
    }

    /// The Riesz symbol `e -> -i e_axis` (so the extension is
    /// `xi_axis / (i ||xi||)`).
    pub fn riesz(dim: usize, axis: usize) -> Self {
        Self::coordinate(dim, axis).scaled(Complex64::new(0.0, -1.0))
    }

    pub fn with_kappa(mut self, kappa: usize) -> Self {
        self.kappa = kappa;
        if let SymbolEval::TrigPoly { cos_c, sin_c } = &self.eval {
            self.c_kappa_norm = trig_c_kappa(cos_c, sin_c, kappa);
        }
        self
    }

    pub fn with_c_kappa_norm(mut self, c: f64) -> Self {
        self.c_kappa_norm = c;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// `sum_{|a| <= kappa} sup |psi^(a)|` over the sphere parametrization
    /// (exact for two-point and trigonometric symbols).
    pub fn c_kappa_norm(&self) -> f64 {
        self.c_kappa_norm
    }

    /// `Some(c)` when the symbol is recognizably the constant `c`.
    pub fn constant_value(&self) -> Option<Complex64> {
        match &self.eval {
            SymbolEval::TwoPoint { plus, minus } if plus == minus => Some(*plus),
            SymbolEval::TrigPoly { cos_c, sin_c } => {
                let tail_zero = cos_c.iter().skip(1).all(|c| c.norm() == 0.0)
                    && sin_c.iter().all(|c| c.norm() == 0.0);
                if tail_zero {
                    Some(cos_c.first().copied().unwrap_or_default())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Evaluate at a unit vector.
    pub fn eval_unit(&self, e: &[f64]) -> Complex64 {
        match &self.eval {
            SymbolEval::TwoPoint { plus, minus } => {
                if e[0] > 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
            SymbolEval::TrigPoly { cos_c, sin_c } => {
                trig_eval(cos_c, sin_c, e[1].atan2(e[0]))
            }
            SymbolEval::Directional(f) => f(e),
        }
    }

    /// Scalar multiple of the symbol.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let eval = match &self.eval {
            SymbolEval::TwoPoint { plus, minus } => SymbolEval::TwoPoint {
                plus: plus * factor,
                minus: minus * factor,
            },
            SymbolEval::TrigPoly { cos_c, sin_c } => SymbolEval::TrigPoly {
                cos_c: cos_c.iter().map(|c| c * factor).collect(),
                sin_c: sin_c.iter().map(|c| c * factor).collect(),
            },
            SymbolEval::Directional(f) => {
                let f = f.clone();
                SymbolEval::Directional(Arc::new(move |e| f(e) * factor))
            }
        };
        Self {
            dim: self.dim,
            kappa: self.kappa,
            eval,
            sup_norm: self.sup_norm * factor.norm(),
            c_kappa_norm: self.c_kappa_norm * factor.norm(),
        }
    }

    /// Linear combination `alpha a + beta b` (dimensions must match).
    pub fn combine(
        alpha: Complex64,
        a: &SphereSymbol,
        beta: Complex64,
        b: &SphereSymbol,
    ) -> Result<SphereSymbol> {
        if a.dim != b.dim {
            return Err(Error::InvalidDimension(b.dim));
        }
        let sa = a.scaled(alpha);
        let sb = b.scaled(beta);
        let eval = match (&sa.eval, &sb.eval) {
            (
                SymbolEval::TwoPoint { plus: p1, minus: m1 },
                SymbolEval::TwoPoint { plus: p2, minus: m2 },
            ) => SymbolEval::TwoPoint {
                plus: p1 + p2,
                minus: m1 + m2,
            },
            (
                SymbolEval::TrigPoly { cos_c: c1, sin_c: s1 },
                SymbolEval::TrigPoly { cos_c: c2, sin_c: s2 },
            ) => {
                let add = |a: &[Complex64], b: &[Complex64]| {
                    let mut out = vec![Complex64::new(0.0, 0.0); a.len().max(b.len())];
                    for (i, v) in a.iter().enumerate() {
                        out[i] += v;
                    }
                    for (i, v) in b.iter().enumerate() {
                        out[i] += v;
                    }
                    out
                };
                SymbolEval::TrigPoly {
                    cos_c: add(c1, c2),
                    sin_c: add(s1, s2),
                }
            }
            _ => {
                let fa = sa.clone();
                let fb = sb.clone();
                SymbolEval::Directional(Arc::new(move |e| fa.eval_unit(e) + fb.eval_unit(e)))
            }
        };
        let kappa = a.kappa.min(b.kappa);
        let mut out = SphereSymbol {
            dim: a.dim,
            kappa,
            eval,
            sup_norm: sa.sup_norm + sb.sup_norm,
            c_kappa_norm: sa.c_kappa_norm + sb.c_kappa_norm,
        };
        if let SymbolEval::TrigPoly { cos_c, sin_c } = &out.eval {
            out.sup_norm = trig_sup(cos_c, sin_c);
            out.c_kappa_norm = trig_c_kappa(cos_c, sin_c, kappa);
        }
        Ok(out)
    }

    /// The product symbol `e -> psi(e) * e_axis` (exact for two-point and
    /// trigonometric symbols; closure composition otherwise).
    pub fn scaled_by_coordinate(&self, axis: usize) -> Result<SphereSymbol> {
        if axis >= self.dim {
            return Err(Error::InvalidDimension(axis));
        }
        let eval = match &self.eval {
            SymbolEval::TwoPoint { plus, minus } => SymbolEval::TwoPoint {
                plus: *plus,
                minus: -*minus,
            },
            SymbolEval::TrigPoly { cos_c, sin_c } => {
                let (c, s) = trig_multiply_coordinate(cos_c, sin_c, axis);
                SymbolEval::TrigPoly { cos_c: c, sin_c: s }
            }
            SymbolEval::Directional(f) => {
                let f = f.clone();
                SymbolEval::Directional(Arc::new(move |e| f(e) * e[axis]))
            }
        };
        let mut out = SphereSymbol {
            dim: self.dim,
            kappa: self.kappa,
            eval,
            sup_norm: self.sup_norm,
            c_kappa_norm: (self.kappa as f64 + 1.0) * self.c_kappa_norm,
        };
        match &out.eval {
            SymbolEval::TwoPoint { plus, minus } => {
                out.sup_norm = plus.norm().max(minus.norm());
                out.c_kappa_norm = out.sup_norm;
            }
            SymbolEval::TrigPoly { cos_c, sin_c } => {
                out.sup_norm = trig_sup(cos_c, sin_c);
                out.c_kappa_norm = trig_c_kappa(cos_c, sin_c, out.kappa);
            }
            _ => {}
        }
        Ok(out)
    }
}

/// Product-to-sum expansion of `psi(theta) * cos(theta)` (axis 0) or
/// `psi(theta) * sin(theta)` (axis 1), with negative harmonics folded back
/// (`cos(-mt) = cos(mt)`, `sin(-mt) = -sin(mt)`, `sin(0) = 0`).
fn trig_multiply_coordinate(
    cos_c: &[Complex64],
    sin_c: &[Complex64],
    axis: usize,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let len = cos_c.len().max(sin_c.len()) + 1;
    let mut out_c = vec![Complex64::new(0.0, 0.0); len + 1];
    let mut out_s = vec![Complex64::new(0.0, 0.0); len + 1];
    let mut cos_terms: Vec<(i64, Complex64)> = Vec::new();
    let mut sin_terms: Vec<(i64, Complex64)> = Vec::new();
    for m in 0..len {
        let c = cos_c.get(m).copied().unwrap_or_default();
        let s = sin_c.get(m).copied().unwrap_or_default();
        let mi = m as i64;
        if axis == 0 {
            // cos(mt) cos t = [cos((m+1)t) + cos((m-1)t)] / 2
            cos_terms.push((mi + 1, c * 0.5));
            cos_terms.push((mi - 1, c * 0.5));
            // sin(mt) cos t = [sin((m+1)t) + sin((m-1)t)] / 2
            sin_terms.push((mi + 1, s * 0.5));
            sin_terms.push((mi - 1, s * 0.5));
        } else {
            // cos(mt) sin t = [sin((m+1)t) - sin((m-1)t)] / 2
            sin_terms.push((mi + 1, c * 0.5));
            sin_terms.push((mi - 1, -c * 0.5));
            // sin(mt) sin t = [cos((m-1)t) - cos((m+1)t)] / 2
            cos_terms.push((mi - 1, s * 0.5));
            cos_terms.push((mi + 1, -s * 0.5));
        }
    }
    for (m, v) in cos_terms {
        out_c[m.unsigned_abs() as usize] += v;
    }
    for (m, v) in sin_terms {
        if m == 0 {
            continue;
        }
        let idx = m.unsigned_abs() as usize;
        if m > 0 {
            out_s[idx] += v;
        } else {
            out_s[idx] -= v;
        }
    }
    (out_c, out_s)
}

fn sampled_sup(dim: usize, f: &DirectionFn) -> f64 {
    let mut sup = 0.0f64;
    match dim {
        1 => {
            sup = f(&[1.0]).norm().max(f(&[-1.0]).norm());
        }
        2 => {
            for i in 0..1024 {
                let t = 2.0 * PI * i as f64 / 1024.0;
                sup = sup.max(f(&[t.cos(), t.sin()]).norm());
            }
        }
        _ => {
            for i in 0..64 {
                let z = -1.0 + 2.0 * (i as f64 + 0.5) / 64.0;
                let s = (1.0 - z * z).sqrt();
                for j in 0..128 {
                    let t = 2.0 * PI * j as f64 / 128.0;
                    sup = sup.max(f(&[s * t.cos(), s * t.sin(), z]).norm());
                }
            }
        }
    }
    sup
}

// ---------------------------------------------------------------------------
// Operators

/// 0-homogeneous extension: `m(xi) = psi(xi / ||xi||)` for `xi != 0`,
/// `m(0) = 0`. Exactly invariant under dyadic dilation of the argument.
pub fn extend_symbol(psi: &SphereSymbol) -> RdSymbol {
    let symbol = psi.clone();
    let dim = psi.dim();
    RdSymbol::new(dim, psi.sup_norm(), move |xi| {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut e = [0.0f64; 3];
        for (i, &x) in xi.iter().enumerate() {
            e[i] = x / r;
        }
        symbol.eval_unit(&e[..dim])
    })
}

/// Apply a multiplier: `idft(m(xi) * dft(f))`. Constant symbols act as exact
/// scalar multiples without a transform round trip.
pub fn apply_multiplier(f: &GridFunction, m: &RdSymbol) -> Result<GridFunction> {
    if m.dim() != f.dim() {
        return Err(Error::InvalidDimension(m.dim()));
    }
    if let Some(c) = m.constant_value() {
        return Ok(f.map(|v| v * c));
    }
    let spec = dft(f);
    let mut bad = None;
    let filtered = spec.map_freqs(|xi, c| {
        let mut point = [0.0f64; 3];
        for (i, &x) in xi.iter().enumerate() {
            point[i] = x as f64;
        }
        let value = m.eval(&point[..xi.len()]);
        if !value.re.is_finite() || !value.im.is_finite() {
            bad = Some(xi.to_vec());
        }
        c * value
    });
    if let Some(xi) = bad {
        return Err(Error::InvalidParameter(format!(
            "multiplier not finite at lattice frequency {:?}",
            xi
        )));
    }
    Ok(idft(&filtered))
}

/// The Riesz transform `R_axis = A_{xi_axis / (i ||xi||)}`.
pub fn riesz_transform(f: &GridFunction, axis: usize) -> Result<GridFunction> {
    if axis >= f.dim() {
        return Err(Error::InvalidDimension(axis));
    }
    apply_multiplier(f, &extend_symbol(&SphereSymbol::riesz(f.dim(), axis)))
}

/// The Riesz potential `I_1 = A_{|2 pi xi|^{-1}}` with the zero mode removed.
pub fn riesz_potential(f: &GridFunction) -> Result<GridFunction> {
    let dim = f.dim();
    let m = RdSymbol::new(dim, f64::INFINITY, move |xi| {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0 / (2.0 * PI * r), 0.0)
        }
    });
    apply_multiplier(f, &m)
}

/// Spectral partial derivative: multiplier `2 pi i xi_axis`.
pub fn spectral_derivative(f: &GridFunction, axis: usize) -> Result<GridFunction> {
    if axis >= f.dim() {
        return Err(Error::InvalidDimension(axis));
    }
    let spec = dft(f);
    let d = spec.map_freqs(|xi, c| c * Complex64::new(0.0, 2.0 * PI * xi[axis] as f64));
    Ok(idft(&d))
}

/// The multiplication operator `B f = b . f`.
pub fn multiplication_op(f: &GridFunction, b: &GridFunction) -> Result<GridFunction> {
    f.same_shape(b)?;
    let values = f
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x * y)
        .collect();
    GridFunction::from_values(f.dim(), f.resolution(), values)
}

/// The commutator `C f = A_psi(B f) - B(A_psi f)`. Constant symbols commute
/// with multiplication exactly, so the result is the zero function there.
pub fn commutator(f: &GridFunction, psi: &SphereSymbol, b: &GridFunction) -> Result<GridFunction> {
    f.same_shape(b)?;
    if psi.constant_value().is_some() {
        return GridFunction::zero(f.dim(), f.resolution());
    }
    let m = extend_symbol(psi);
    let bf = multiplication_op(f, b)?;
    let a_bf = apply_multiplier(&bf, &m)?;
    let af = apply_multiplier(f, &m)?;
    let b_af = multiplication_op(&af, b)?;
    let values = a_bf
        .values()
        .iter()
        .zip(b_af.values())
        .map(|(x, y)| x - y)
        .collect();
    GridFunction::from_values(f.dim(), f.resolution(), values)
}

// ---------------------------------------------------------------------------
// Empirical operator norms

/// Deterministic child seed derivation (splitmix64 over root ^ index).
pub(crate) fn child_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ (index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One member of the norm-estimation test family. Kinds cycle through seeded
/// band-limited fields, translated (plateau) bumps, modulated bumps, and
/// random-sign lacunary sums; every member is mean-zero.
fn family_member(dim: usize, n: usize, index: u64, root: u64) -> Result<GridFunction> {
    let seed = child_seed(root, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_freq = (n as i64 / 8).max(1);
    let f = match index % 4 {
        0 => fields::random_bandlimited(dim, n, max_freq, seed)?,
        1 => {
            let mut center = [0.0f64; 3];
            for c in center.iter_mut().take(dim) {
                *c = rng.random_range(0.0..1.0);
            }
            let min_width = (16.0 / n as f64).min(0.05);
            let width = min_width * (0.45 / min_width).powf(rng.random_range(0.0..1.0));
            let plateau = [0.0, 0.5, 0.8][(index as usize / 4) % 3];
            fields::plateau_bump(dim, n, &center[..dim], width, plateau)?
        }
        2 => {
            let mut center = [0.0f64; 3];
            let mut k = [0i64; 3];
            for axis in 0..dim {
                center[axis] = rng.random_range(0.0..1.0);
                k[axis] = rng.random_range(-max_freq..=max_freq);
            }
            if k[..dim].iter().all(|&c| c == 0) {
                k[0] = 1;
            }
            let bump = fields::bump(dim, n, &center[..dim], 0.2)?;
            let mode = fields::exponential(dim, n, &k[..dim])?;
            multiplication_op(&bump, &mode)?
        }
        _ => {
            let terms = 1 + ((index / 4) % 5) as u32;
            let max_level = ((n as f64 / 4.0).log2().floor() as u32).max(1);
            let mut values = vec![Complex64::new(0.0, 0.0); n.pow(dim as u32)];
            for t in 0..terms.min(max_level) {
                let sign = if rng.random_range(0..2) == 0 { 1.0 } else { -1.0 };
                let quarter_phase = rng.random_range(0..2) == 0;
                let freq = 1i64 << t;
                let mode = GridFunction::from_sampler(dim, n, |x| {
                    let phase = 2.0 * PI * freq as f64 * x[0]
                        + if quarter_phase { PI / 2.0 } else { 0.0 };
                    Complex64::new(sign * phase.cos(), 0.0)
                })?;
                for (v, m) in values.iter_mut().zip(mode.values()) {
                    *v += m;
                }
            }
            GridFunction::from_values(dim, n, values)?
        }
    };
    Ok(f.mean_subtracted())
}

/// Empirical lower bound on the `L^p -> L^p` norm of a multiplier:
/// the maximum of `||A_m f||_p / ||f||_p` over the seeded test family.
/// Deterministic for a fixed seed, and nondecreasing in `trials`.
pub fn estimate_op_norm(
    m: &RdSymbol,
    n: usize,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if !(p > 1.0) || p.is_infinite() {
        return Err(Error::InvalidExponent(p));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let dim = m.dim();
    let mut best = 0.0f64;
    for t in 0..trials {
        let f = family_member(dim, n, t as u64, seed)?;
        let denom = crate::grid::lp_norm(&f, p)?;
        if denom == 0.0 {
            continue;
        }
        let out = apply_multiplier(&f, m)?;
        let ratio = crate::grid::lp_norm(&out, p)? / denom;
        best = best.max(ratio);
    }
    Ok(best)
}
