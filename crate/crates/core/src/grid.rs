//! Sampled periodic functions on the unit torus `[0,1)^d` and their discrete
//! Fourier calculus.
//!
//! Conventions: a `GridFunction` holds samples at `x = m/N`,
//! `m in {0..N-1}^d`, flattened row-major (last axis fastest). The forward
//! transform is normalized so coefficients approximate Fourier coefficients
//! of the unit torus: `c(xi) = N^{-d} sum_m f(m/N) e^{-2 pi i xi.m/N}` with
//! `xi` on the symmetric lattice `{-N/2..N/2-1}^d`. Mean/trapezoid quadrature
//! is exact for band-limited integrands, so spectral identities hold to
//! machine precision. Experiments are expected to keep data band-limited
//! below `N/4`; the Nyquist row is retained but not protected.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// A complex-valued function sampled on the uniform periodic grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    dim: usize,
    resolution: usize,
    values: Vec<Complex64>,
    is_real: bool,
}

/// Fourier coefficients of a [`GridFunction`], indexed by the symmetric
/// frequency lattice `{-N/2..N/2-1}^d` (stored in FFT order internally).
#[derive(Debug, Clone)]
pub struct SpectralFunction {
    dim: usize,
    resolution: usize,
    coefficients: Vec<Complex64>,
}

fn check_resolution(n: usize) -> Result<()> {
    if !n.is_power_of_two() || n < 8 {
        return Err(Error::InvalidResolution(n));
    }
    Ok(())
}

fn check_dim(dim: usize) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(())
}

/// Iterate multi-indices `{0..n}^dim` in row-major order, yielding the flat
/// index alongside the per-axis indices (first `dim` entries meaningful).
pub fn multi_indices(dim: usize, n: usize) -> impl Iterator<Item = (usize, [usize; 3])> {
    let total = n.pow(dim as u32);
    (0..total).map(move |flat| {
        let mut idx = [0usize; 3];
        let mut rem = flat;
        for axis in (0..dim).rev() {
            idx[axis] = rem % n;
            rem /= n;
        }
        (flat, idx)
    })
}

/// Map a grid index to the frequency it represents on the symmetric lattice.
#[inline]
pub(crate) fn index_to_freq(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Inverse of [`index_to_freq`]: wrap a lattice frequency into `0..N`.
#[inline]
pub(crate) fn freq_to_index(xi: i64, n: usize) -> usize {
    xi.rem_euclid(n as i64) as usize
}

impl GridFunction {
    /// Sample `sampler` on the grid. The real flag is set iff every sampled
    /// imaginary part is exactly zero.
    pub fn from_sampler<F>(dim: usize, resolution: usize, mut sampler: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Complex64,
    {
        check_dim(dim)?;
        check_resolution(resolution)?;
        let total = resolution.pow(dim as u32);
        let mut values = Vec::with_capacity(total);
        let mut point = [0.0f64; 3];
        for (flat, idx) in multi_indices(dim, resolution) {
            for axis in 0..dim {
                point[axis] = idx[axis] as f64 / resolution as f64;
            }
            let v = sampler(&point[..dim]);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite { index: flat });
            }
            values.push(v);
        }
        let is_real = values.iter().all(|v| v.im == 0.0);
        Ok(Self {
            dim,
            resolution,
            values,
            is_real,
        })
    }

    /// Wrap an existing flat value vector (row-major, last axis fastest).
    pub fn from_values(dim: usize, resolution: usize, values: Vec<Complex64>) -> Result<Self> {
        check_dim(dim)?;
        check_resolution(resolution)?;
        if values.len() != resolution.pow(dim as u32) {
            return Err(Error::ShapeMismatch {
                expected: (dim, resolution),
                got: (dim, values.len()),
            });
        }
        if let Some(i) = values
            .iter()
            .position(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::NonFinite { index: i });
        }
        let is_real = values.iter().all(|v| v.im == 0.0);
        Ok(Self {
            dim,
            resolution,
            values,
            is_real,
        })
    }

    pub fn constant(dim: usize, resolution: usize, c: Complex64) -> Result<Self> {
        Self::from_sampler(dim, resolution, |_| c)
    }

    pub fn zero(dim: usize, resolution: usize) -> Result<Self> {
        Self::constant(dim, resolution, Complex64::new(0.0, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.dim != other.dim || self.resolution != other.resolution {
            return Err(Error::ShapeMismatch {
                expected: (self.dim, self.resolution),
                got: (other.dim, other.resolution),
            });
        }
        Ok(())
    }

    /// Pointwise map; re-derives the real flag.
    pub fn map<F: FnMut(Complex64) -> Complex64>(&self, mut f: F) -> GridFunction {
        let values: Vec<Complex64> = self.values.iter().map(|&v| f(v)).collect();
        let is_real = values.iter().all(|v| v.im == 0.0);
        GridFunction {
            dim: self.dim,
            resolution: self.resolution,
            values,
            is_real,
        }
    }

    /// Grid mean `N^{-d} sum f`.
    pub fn mean(&self) -> Complex64 {
        let sum: Complex64 = self.values.iter().sum();
        sum / self.len() as f64
    }

    /// Subtract the grid mean (used to respect the zero-frequency convention
    /// of homogeneous multipliers).
    pub fn mean_subtracted(&self) -> GridFunction {
        let m = self.mean();
        self.map(|v| v - m)
    }

    /// Export as CSV: `dim,N` header pair followed by `index,re,im` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("dim,N\n");
        out.push_str(&format!("{},{}\n", self.dim, self.resolution));
        out.push_str("index,re,im\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", i, v.re, v.im));
        }
        out
    }

    /// Parse the format produced by [`GridFunction::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "dim,N" => {}
            other => {
                return Err(Error::Csv(format!(
                    "expected header 'dim,N', got {:?}",
                    other.unwrap_or("")
                )))
            }
        }
        let shape = lines
            .next()
            .ok_or_else(|| Error::Csv("missing dim,N row".into()))?;
        let mut parts = shape.trim().split(',');
        let dim: usize = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Csv("bad dim field".into()))?;
        let resolution: usize = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Csv("bad N field".into()))?;
        match lines.next() {
            Some(h) if h.trim() == "index,re,im" => {}
            other => {
                return Err(Error::Csv(format!(
                    "expected header 'index,re,im', got {:?}",
                    other.unwrap_or("")
                )))
            }
        }
        check_dim(dim)?;
        check_resolution(resolution)?;
        let total = resolution.pow(dim as u32);
        let mut values = vec![Complex64::new(0.0, 0.0); total];
        let mut seen = 0usize;
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.trim().split(',');
            let idx: usize = fields
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Csv(format!("bad index in row {:?}", line)))?;
            let re: f64 = fields
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Csv(format!("bad re in row {:?}", line)))?;
            let im: f64 = fields
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Csv(format!("bad im in row {:?}", line)))?;
            if idx >= total {
                return Err(Error::Csv(format!("index {} out of range {}", idx, total)));
            }
            values[idx] = Complex64::new(re, im);
            seen += 1;
        }
        if seen != total {
            return Err(Error::Csv(format!("expected {} rows, got {}", total, seen)));
        }
        Self::from_values(dim, resolution, values)
    }
}

impl SpectralFunction {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Coefficients in FFT storage order; use [`SpectralFunction::iter_freqs`]
    /// for lattice-indexed access.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// All-zero spectrum.
    pub fn zero(dim: usize, resolution: usize) -> Result<Self> {
        check_dim(dim)?;
        check_resolution(resolution)?;
        Ok(Self {
            dim,
            resolution,
            coefficients: vec![Complex64::new(0.0, 0.0); resolution.pow(dim as u32)],
        })
    }

    /// Coefficient at lattice frequency `xi` (each component in `-N/2..N/2-1`;
    /// out-of-window components wrap).
    pub fn coefficient(&self, xi: &[i64]) -> Complex64 {
        assert_eq!(xi.len(), self.dim);
        let n = self.resolution;
        let mut flat = 0usize;
        for &x in xi {
            flat = flat * n + freq_to_index(x, n);
        }
        self.coefficients[flat]
    }

    pub fn set_coefficient(&mut self, xi: &[i64], v: Complex64) {
        assert_eq!(xi.len(), self.dim);
        let n = self.resolution;
        let mut flat = 0usize;
        for &x in xi {
            flat = flat * n + freq_to_index(x, n);
        }
        self.coefficients[flat] = v;
    }

    /// Iterate `(frequency, coefficient)` over the symmetric lattice.
    pub fn iter_freqs(&self) -> impl Iterator<Item = ([i64; 3], Complex64)> + '_ {
        let n = self.resolution;
        let dim = self.dim;
        multi_indices(dim, n).map(move |(flat, idx)| {
            let mut xi = [0i64; 3];
            for axis in 0..dim {
                xi[axis] = index_to_freq(idx[axis], n);
            }
            (xi, self.coefficients[flat])
        })
    }

    /// Map each coefficient as a function of its lattice frequency.
    pub fn map_freqs<F: FnMut(&[i64], Complex64) -> Complex64>(&self, mut f: F) -> Self {
        let n = self.resolution;
        let dim = self.dim;
        let coefficients = multi_indices(dim, n)
            .map(|(flat, idx)| {
                let mut xi = [0i64; 3];
                for axis in 0..dim {
                    xi[axis] = index_to_freq(idx[axis], n);
                }
                f(&xi[..dim], self.coefficients[flat])
            })
            .collect();
        Self {
            dim,
            resolution: n,
            coefficients,
        }
    }
}

/// Run the FFT along every axis of a flat row-major array.
pub(crate) fn fft_all_axes(dim: usize, n: usize, data: &mut [Complex64], inverse: bool) {
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    match dim {
        1 => fft.process(data),
        2 => {
            // rows (last axis contiguous)
            for row in data.chunks_exact_mut(n) {
                fft.process(row);
            }
            // columns
            for col in 0..n {
                for (i, s) in scratch.iter_mut().enumerate() {
                    *s = data[i * n + col];
                }
                fft.process(&mut scratch);
                for (i, s) in scratch.iter().enumerate() {
                    data[i * n + col] = *s;
                }
            }
        }
        3 => {
            for row in data.chunks_exact_mut(n) {
                fft.process(row);
            }
            for plane in 0..n {
                for col in 0..n {
                    for (i, s) in scratch.iter_mut().enumerate() {
                        *s = data[(plane * n + i) * n + col];
                    }
                    fft.process(&mut scratch);
                    for (i, s) in scratch.iter().enumerate() {
                        data[(plane * n + i) * n + col] = *s;
                    }
                }
            }
            for row_in_plane in 0..n {
                for col in 0..n {
                    for (i, s) in scratch.iter_mut().enumerate() {
                        *s = data[(i * n + row_in_plane) * n + col];
                    }
                    fft.process(&mut scratch);
                    for (i, s) in scratch.iter().enumerate() {
                        data[(i * n + row_in_plane) * n + col] = *s;
                    }
                }
            }
        }
        _ => unreachable!("dimension checked at construction"),
    }
}

/// Forward transform: `c(xi) = N^{-d} sum_m f(m/N) e^{-2 pi i xi.m/N}`.
pub fn dft(f: &GridFunction) -> SpectralFunction {
    let mut data = f.values.clone();
    fft_all_axes(f.dim, f.resolution, &mut data, false);
    let scale = 1.0 / f.len() as f64;
    for v in &mut data {
        *v *= scale;
    }
    SpectralFunction {
        dim: f.dim,
        resolution: f.resolution,
        coefficients: data,
    }
}

/// Inverse transform: `f(m/N) = sum_xi c(xi) e^{+2 pi i xi.m/N}`; exact
/// inverse of [`dft`] up to roundoff.
pub fn idft(spec: &SpectralFunction) -> GridFunction {
    let mut data = spec.coefficients.clone();
    fft_all_axes(spec.dim, spec.resolution, &mut data, true);
    let is_real = data.iter().all(|v| v.im == 0.0);
    GridFunction {
        dim: spec.dim,
        resolution: spec.resolution,
        values: data,
        is_real,
    }
}

/// `((1/N^d) sum |f|^p)^{1/p}`, or `max |f|` for `p = infinity`.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(f.values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let total: f64 = f.values.iter().map(|v| v.norm().powf(p)).sum();
    Ok((total / f.len() as f64).powf(1.0 / p))
}

/// The spatial pairing `(1/N^d) sum f.g`, conjugating `g` when requested.
pub fn pair(f: &GridFunction, g: &GridFunction, conjugate: bool) -> Result<Complex64> {
    f.same_shape(g)?;
    let mut acc = Complex64::new(0.0, 0.0);
    if conjugate {
        for (a, b) in f.values.iter().zip(&g.values) {
            acc += a * b.conj();
        }
    } else {
        for (a, b) in f.values.iter().zip(&g.values) {
            acc += a * b;
        }
    }
    Ok(acc / f.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_complex_field, random_real_field};
    use std::f64::consts::PI;

    const TAU: f64 = 2.0 * PI;

    #[test]
    fn constant_sampler_is_constant_and_real() {
        let f = GridFunction::from_sampler(1, 8, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(f.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        assert!(f.is_real());
    }

    #[test]
    fn pure_mode_sampler() {
        let f = GridFunction::from_sampler(1, 64, |x| Complex64::from_polar(1.0, TAU * 3.0 * x[0]))
            .unwrap();
        assert!(!f.is_real());
        let spec = dft(&f);
        for (xi, c) in spec.iter_freqs() {
            let expected = if xi[0] == 3 { 1.0 } else { 0.0 };
            assert!(
                (c - Complex64::new(expected, 0.0)).norm() < 1e-12,
                "xi={} c={}",
                xi[0],
                c
            );
        }
    }

    #[test]
    fn cosine_field_is_real_with_half_coefficients() {
        let k = [1i64, 2];
        let f = GridFunction::from_sampler(2, 32, |x| {
            Complex64::new((TAU * (x[0] + 2.0 * x[1])).cos(), 0.0)
        })
        .unwrap();
        assert!(f.is_real());
        let spec = dft(&f);
        assert!((spec.coefficient(&k) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((spec.coefficient(&[-1, -2]) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn dft_of_constant_is_dc_only() {
        let f = GridFunction::constant(1, 8, Complex64::new(1.0, 0.0)).unwrap();
        let spec = dft(&f);
        assert!((spec.coefficient(&[0]) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(spec
            .iter_freqs()
            .filter(|(xi, _)| xi[0] != 0)
            .all(|(_, c)| c.norm() < 1e-14));
    }

    #[test]
    fn idft_inverts_dft() {
        let f = random_complex_field(2, 16, 7);
        let g = idft(&dft(&f));
        let scale = lp_norm(&f, f64::INFINITY).unwrap();
        let err = f
            .values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12 * scale.max(1.0), "err={}", err);
    }

    #[test]
    fn idft_of_zero_and_single_mode() {
        let zero = SpectralFunction::zero(1, 16).unwrap();
        assert!(idft(&zero).values().iter().all(|v| v.norm() == 0.0));

        let mut spec = SpectralFunction::zero(1, 16).unwrap();
        spec.set_coefficient(&[5], Complex64::new(1.0, 0.0));
        let f = idft(&spec);
        for (flat, idx) in multi_indices(1, 16) {
            let x = idx[0] as f64 / 16.0;
            let expected = Complex64::from_polar(1.0, TAU * 5.0 * x);
            assert!((f.values()[flat] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn lp_norm_examples() {
        let c = GridFunction::constant(1, 8, Complex64::new(-2.5, 0.0)).unwrap();
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert!((lp_norm(&c, p).unwrap() - 2.5).abs() < 1e-12);
        }
        let f = GridFunction::from_sampler(1, 64, |x| {
            Complex64::new(2f64.sqrt() * (TAU * x[0]).cos(), 0.0)
        })
        .unwrap();
        assert!((lp_norm(&f, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let e = GridFunction::from_sampler(1, 64, |x| Complex64::from_polar(1.0, TAU * x[0]))
            .unwrap();
        assert!((lp_norm(&e, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
        assert!(lp_norm(&e, 0.5).is_err());
    }

    #[test]
    fn pair_examples() {
        let one = GridFunction::constant(1, 16, Complex64::new(1.0, 0.0)).unwrap();
        assert!((pair(&one, &one, false).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-14);

        let ep = GridFunction::from_sampler(1, 16, |x| Complex64::from_polar(1.0, TAU * x[0]))
            .unwrap();
        let em = GridFunction::from_sampler(1, 16, |x| Complex64::from_polar(1.0, -TAU * x[0]))
            .unwrap();
        assert!((pair(&ep, &em, false).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        assert!((pair(&ep, &ep, true).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-13);

        let other = GridFunction::constant(1, 32, Complex64::new(1.0, 0.0)).unwrap();
        assert!(pair(&one, &other, false).is_err());
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(GridFunction::from_sampler(1, 12, |_| Complex64::new(1.0, 0.0)).is_err());
        assert!(GridFunction::from_sampler(1, 4, |_| Complex64::new(1.0, 0.0)).is_err());
        assert!(GridFunction::from_sampler(4, 16, |_| Complex64::new(1.0, 0.0)).is_err());
        assert!(
            GridFunction::from_sampler(1, 8, |x| Complex64::new(1.0 / (x[0] - 0.25), 0.0))
                .is_err()
        );
    }

    #[test]
    fn plancherel_on_random_fields() {
        for seed in 0..100 {
            let f = random_complex_field(1, 64, seed);
            let spec = dft(&f);
            let spatial = lp_norm(&f, 2.0).unwrap().powi(2);
            let spectral: f64 = spec.coefficients().iter().map(|c| c.norm_sqr()).sum();
            assert!(
                (spatial - spectral).abs() <= 1e-10 * spatial.max(1e-30),
                "seed {}: {} vs {}",
                seed,
                spatial,
                spectral
            );
        }
    }

    #[test]
    fn chebyshev_inequality_discrete() {
        for seed in 0..20 {
            let f = random_complex_field(1, 64, 1000 + seed);
            let total = f.len() as f64;
            for &a in &[0.1, 0.5, 1.0, 2.0] {
                for &p in &[1.0, 2.0, 4.0] {
                    let count = f.values().iter().filter(|v| v.norm() > a).count() as f64;
                    let lhs = count / total;
                    let rhs: f64 = f
                        .values()
                        .iter()
                        .filter(|v| v.norm() > a)
                        .map(|v| v.norm().powf(p))
                        .sum::<f64>()
                        / total
                        * a.powf(-p);
                    assert!(lhs <= rhs + 1e-15, "a={} p={}: {} > {}", a, p, lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn hoelder_inequality() {
        for seed in 0..20 {
            let f = random_complex_field(2, 16, 2000 + seed);
            let g = random_complex_field(2, 16, 3000 + seed);
            for &p in &[1.5, 2.0, 3.0] {
                let q = p / (p - 1.0);
                let lhs = pair(&f, &g, false).unwrap().norm();
                let rhs = lp_norm(&f, p).unwrap() * lp_norm(&g, q).unwrap();
                assert!(lhs <= rhs * (1.0 + 1e-12), "p={}: {} > {}", p, lhs, rhs);
            }
        }
    }

    #[test]
    fn interpolation_inequality() {
        // 1/q = alpha/2 + (1-alpha)/p
        for seed in 0..20 {
            let f = random_real_field(1, 128, 4000 + seed);
            for &(p, q, alpha) in &[(6.0f64, 3.0f64, 0.5f64), (8.0, 4.0, 1.0 / 3.0)] {
                assert!((1.0 / q - alpha / 2.0 - (1.0 - alpha) / p).abs() < 1e-12);
                let lhs = lp_norm(&f, q).unwrap();
                let rhs = lp_norm(&f, 2.0).unwrap().powf(alpha)
                    * lp_norm(&f, p).unwrap().powf(1.0 - alpha);
                assert!(lhs <= rhs * (1.0 + 1e-12), "{} > {}", lhs, rhs);
            }
        }
    }

    #[test]
    fn csv_round_trip_and_rejects() {
        let f = random_complex_field(2, 8, 99);
        let text = f.to_csv();
        let g = GridFunction::from_csv(&text).unwrap();
        assert_eq!(f.dim(), g.dim());
        assert_eq!(f.resolution(), g.resolution());
        assert!(f
            .values()
            .iter()
            .zip(g.values())
            .all(|(a, b)| a == b));

        assert!(GridFunction::from_csv("nope").is_err());
        assert!(GridFunction::from_csv("dim,N\n1,8\nindex,re,im\n0,1,0\n").is_err());
    }
}
