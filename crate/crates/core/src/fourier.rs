//! Truncated Fourier series of sampled target functions, sup-norm
//! truncation-error measurement, and empirical frequency spectra of
//! multivariate models via a multidimensional FFT.
//!
//! Conventions: a series of order K and period T evaluates as
//! Σ_{n=−K}^{K} c_n e^{i(2π/T)nx}; projection uses the matching e^{−i…}
//! kernel so that projecting a series onto order ≥ K reproduces it.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::PI;
use thiserror::Error;

/// Real-valued series must satisfy c_{−n} = conj(c_n) within this.
pub const REAL_SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FourierError {
    #[error("non-finite sample f({x}) = {value}")]
    NonFiniteSample { x: f64, value: f64 },
    #[error("coefficient vector has length {got}, expected 2·{order}+1")]
    CoefficientCount { order: usize, got: usize },
    #[error("period must be positive and finite (got {0})")]
    BadPeriod(f64),
    #[error("coefficient index {n} outside [−{order}, {order}]")]
    IndexOutOfRange { n: i64, order: usize },
    #[error("spectrum requires 1 ≤ d ≤ 3 and k ≥ 1 (got d={d}, k={k})")]
    InvalidSpectrumSpec { d: usize, k: usize },
    #[error("spectrum grid must be a power of two ≥ {need} to avoid aliasing (got {got})")]
    GridTooSmall { need: usize, got: usize },
}

/// Partial Fourier series Σ c_n e^{i(2π/T)nx}, n ∈ [−K, K].
#[derive(Debug, Clone)]
pub struct FourierSeries {
    order: usize,
    period: f64,
    /// c_n at index n + order.
    coeffs: Vec<Complex64>,
}

impl FourierSeries {
    pub fn new(order: usize, period: f64, coeffs: Vec<Complex64>) -> Result<Self, FourierError> {
        if !(period.is_finite() && period > 0.0) {
            return Err(FourierError::BadPeriod(period));
        }
        if coeffs.len() != 2 * order + 1 {
            return Err(FourierError::CoefficientCount {
                order,
                got: coeffs.len(),
            });
        }
        Ok(Self {
            order,
            period,
            coeffs,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// c_n (zero outside [−K, K]).
    pub fn coeff(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.order {
            Complex64::ZERO
        } else {
            self.coeffs[(n + self.order as i64) as usize]
        }
    }

    /// (n, c_n) pairs over [−K, K].
    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let order = self.order as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - order, c))
    }

    /// Projection of f onto orders [−K, K] with period 2π.
    pub fn project(f: impl Fn(f64) -> f64, order: usize) -> Result<Self, FourierError> {
        Self::project_periodic(f, order, 2.0 * PI)
    }

    /// Projection with an explicit period. Uniform N-point rule with
    /// N = max(16384, 64·K): spectrally accurate for periodic integrands,
    /// and the floor keeps the O(N⁻²) seam error of merely-continuous
    /// targets near 1e-9.
    pub fn project_periodic(
        f: impl Fn(f64) -> f64,
        order: usize,
        period: f64,
    ) -> Result<Self, FourierError> {
        if !(period.is_finite() && period > 0.0) {
            return Err(FourierError::BadPeriod(period));
        }
        let n_pts = 16384.max(64 * order);
        let mut samples = Vec::with_capacity(n_pts);
        for j in 0..n_pts {
            let x = -period / 2.0 + period * j as f64 / n_pts as f64;
            let v = f(x);
            if !v.is_finite() {
                return Err(FourierError::NonFiniteSample { x, value: v });
            }
            samples.push((x, v));
        }
        let mut coeffs = vec![Complex64::ZERO; 2 * order + 1];
        for (i, slot) in coeffs.iter_mut().enumerate() {
            let n = i as i64 - order as i64;
            let mut acc = Complex64::ZERO;
            for &(x, v) in &samples {
                acc += v * Complex64::from_polar(1.0, -2.0 * PI * n as f64 * x / period);
            }
            *slot = acc / n_pts as f64;
        }
        Ok(Self {
            order,
            period,
            coeffs,
        })
    }

    /// Partial sum at x.
    pub fn eval(&self, x: f64) -> Complex64 {
        let base = 2.0 * PI * x / self.period;
        let step = Complex64::from_polar(1.0, base);
        let mut w = Complex64::from_polar(1.0, -(self.order as f64) * base);
        let mut acc = Complex64::ZERO;
        for c in &self.coeffs {
            acc += c * w;
            w *= step;
        }
        acc
    }

    /// Real part of the partial sum (the series of a real target).
    pub fn eval_re(&self, x: f64) -> f64 {
        self.eval(x).re
    }

    /// sup |s(x) − f(x)| over a 2048-point grid spanning one period.
    pub fn truncation_error(&self, f: impl Fn(f64) -> f64) -> f64 {
        const GRID: usize = 2048;
        let mut sup: f64 = 0.0;
        for k in 0..GRID {
            let x = -self.period / 2.0 + self.period * k as f64 / (GRID - 1) as f64;
            sup = sup.max((self.eval(x) - f(x)).norm());
        }
        sup
    }

    /// Largest violation of the real-series symmetry c_{−n} = conj(c_n).
    pub fn real_symmetry_defect(&self) -> f64 {
        (0..=self.order as i64)
            .map(|n| (self.coeff(-n) - self.coeff(n).conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// Stored as {"K": k, "period": T, "coeffs": [[n, re, im], …]} with
/// magnitudes above 1e-14 kept.
impl Serialize for FourierSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            #[serde(rename = "K")]
            order: usize,
            period: f64,
            coeffs: Vec<(i64, f64, f64)>,
        }
        let coeffs = self
            .terms()
            .filter(|(_, c)| c.norm() > 1e-14)
            .map(|(n, c)| (n, c.re, c.im))
            .collect();
        Repr {
            order: self.order,
            period: self.period,
            coeffs,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FourierSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            #[serde(rename = "K")]
            order: usize,
            period: f64,
            coeffs: Vec<(i64, f64, f64)>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let mut coeffs = vec![Complex64::ZERO; 2 * repr.order + 1];
        for &(n, re, im) in &repr.coeffs {
            if !re.is_finite() || !im.is_finite() {
                return Err(D::Error::custom("non-finite coefficient"));
            }
            if n.unsigned_abs() as usize > repr.order {
                return Err(D::Error::custom(format!(
                    "coefficient index {n} outside [-{0}, {0}]",
                    repr.order
                )));
            }
            coeffs[(n + repr.order as i64) as usize] += Complex64::new(re, im);
        }
        FourierSeries::new(repr.order, repr.period, coeffs).map_err(D::Error::custom)
    }
}

/// Multivariate frequency-support descriptor: Ω = {−k..k}^d together with
/// the trainable-parameter count 3(kd + 1) of the circuit family realizing
/// it, exposing the |Ω| = (2k+1)^d vs O(d) degrees-of-freedom gap.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub d: usize,
    pub k: usize,
}

impl SpectrumSpec {
    pub fn new(d: usize, k: usize) -> Result<Self, FourierError> {
        if d == 0 || d > 3 || k == 0 {
            return Err(FourierError::InvalidSpectrumSpec { d, k });
        }
        Ok(Self { d, k })
    }

    /// |Ω| = (2k+1)^d.
    pub fn omega_size(&self) -> usize {
        (2 * self.k + 1).pow(self.d as u32)
    }

    /// Trainable real parameters of the realizing circuit: 3(kd + 1).
    pub fn dof(&self) -> usize {
        3 * (self.k * self.d + 1)
    }
}

/// Centered DFT coefficients of a model sampled on a uniform grid over
/// [−π, π)^d: frequency vector ω ∈ [−g/2, g/2)^d at row-major index
/// Π(ω_m + g/2).
#[derive(Debug, Clone)]
pub struct SpectrumGrid {
    d: usize,
    grid: usize,
    coeffs: Vec<Complex64>,
}

impl SpectrumGrid {
    pub fn dims(&self) -> (usize, usize) {
        (self.d, self.grid)
    }

    /// c_ω; panics if freqs has the wrong arity or lies outside the grid.
    pub fn coeff(&self, freqs: &[i64]) -> Complex64 {
        assert_eq!(freqs.len(), self.d);
        let half = (self.grid / 2) as i64;
        let mut idx = 0usize;
        for &w in freqs {
            assert!((-half..half).contains(&w), "frequency {w} outside grid");
            idx = idx * self.grid + (w + half) as usize;
        }
        self.coeffs[idx]
    }

    /// Iterates (frequency vector, coefficient) over the whole grid.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        let half = (self.grid / 2) as i64;
        let d = self.d;
        let g = self.grid;
        self.coeffs.iter().enumerate().map(move |(idx, &c)| {
            let mut rem = idx;
            let mut freqs = vec![0i64; d];
            for slot in freqs.iter_mut().rev() {
                *slot = (rem % g) as i64 - half;
                rem /= g;
            }
            (freqs, c)
        })
    }

    /// Largest |c_ω| over frequencies with any component outside [−bound, bound].
    pub fn out_of_support_max(&self, bound: i64) -> f64 {
        self.entries()
            .filter(|(w, _)| w.iter().any(|&wm| wm.abs() > bound))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// Largest |c_ω| over frequencies inside [−bound, bound]^d.
    pub fn in_support_max(&self, bound: i64) -> f64 {
        self.entries()
            .filter(|(w, _)| w.iter().all(|&wm| wm.abs() <= bound))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }
}

/// In-place radix-2 Cooley–Tukey DFT with the e^{−2πi jk/N} kernel.
fn fft_inplace(buf: &mut [Complex64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let w_len = Complex64::from_polar(1.0, -2.0 * PI / len as f64);
        for start in (0..n).step_by(len) {
            let mut w = Complex64::ONE;
            for k in 0..len / 2 {
                let u = buf[start + k];
                let v = buf[start + k + len / 2] * w;
                buf[start + k] = u + v;
                buf[start + k + len / 2] = u - v;
                w *= w_len;
            }
        }
        len <<= 1;
    }
}

/// FFT along one axis of a row-major d-dimensional g^d array.
fn fft_axis(data: &mut [Complex64], g: usize, d: usize, axis: usize) {
    let stride = g.pow((d - 1 - axis) as u32);
    let lines = data.len() / g;
    let mut scratch = vec![Complex64::ZERO; g];
    for line in 0..lines {
        let hi = line / stride;
        let lo = line % stride;
        let base = hi * stride * g + lo;
        for (k, s) in scratch.iter_mut().enumerate() {
            *s = data[base + k * stride];
        }
        fft_inplace(&mut scratch);
        for (k, s) in scratch.iter().enumerate() {
            data[base + k * stride] = *s;
        }
    }
}

/// Centered DFT coefficients of `f` sampled on the uniform grid
/// x_m = −π + 2πi_m/g over [−π, π)^d. `max_freq` is the largest frequency
/// magnitude the model can contain; the grid must be a power of two with
/// g ≥ 2·max_freq + 2 so no bin aliases.
pub fn empirical_spectrum(
    f: impl Fn(&[f64]) -> f64,
    d: usize,
    grid: usize,
    max_freq: usize,
) -> Result<SpectrumGrid, FourierError> {
    if d == 0 || d > 3 {
        return Err(FourierError::InvalidSpectrumSpec { d, k: max_freq });
    }
    let need = 2 * max_freq + 2;
    if !grid.is_power_of_two() || grid < need {
        return Err(FourierError::GridTooSmall { need, got: grid });
    }
    let total = grid.pow(d as u32);
    let mut data = Vec::with_capacity(total);
    let mut point = vec![0.0f64; d];
    for idx in 0..total {
        let mut rem = idx;
        for m in (0..d).rev() {
            point[m] = -PI + 2.0 * PI * (rem % grid) as f64 / grid as f64;
            rem /= grid;
        }
        let v = f(&point);
        if !v.is_finite() {
            return Err(FourierError::NonFiniteSample {
                x: point[0],
                value: v,
            });
        }
        data.push(Complex64::new(v, 0.0));
    }
    for axis in 0..d {
        fft_axis(&mut data, grid, d, axis);
    }
    // Reindex raw bins to centered frequencies; sampling from −π adds the
    // phase e^{iωπ} = (−1)^ω per dimension.
    let half = (grid / 2) as i64;
    let norm = 1.0 / total as f64;
    let mut coeffs = vec![Complex64::ZERO; total];
    let mut digits = vec![0usize; d];
    for (idx, slot) in coeffs.iter_mut().enumerate() {
        let mut rem = idx;
        let mut sign = 1.0;
        for m in (0..d).rev() {
            let w = (rem % grid) as i64 - half;
            rem /= grid;
            if w.rem_euclid(2) != 0 {
                sign = -sign;
            }
            digits[m] = w.rem_euclid(grid as i64) as usize;
        }
        let mut raw = 0usize;
        for &dg in &digits {
            raw = raw * grid + dg;
        }
        *slot = data[raw] * norm * sign;
    }
    Ok(SpectrumGrid { d, grid, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sinc5(x: f64) -> f64 {
        if x == 0.0 {
            1.0
        } else {
            (5.0 * x).sin() / (5.0 * x)
        }
    }

    #[test]
    fn cosine_projects_onto_unit_frequencies() {
        let s = FourierSeries::project(|x| x.cos(), 3).unwrap();
        assert!((s.coeff(1) - Complex64::new(0.5, 0.0)).norm() < 1e-10);
        assert!((s.coeff(-1) - Complex64::new(0.5, 0.0)).norm() < 1e-10);
        for n in [-3i64, -2, 0, 2, 3] {
            assert!(s.coeff(n).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_projects_onto_zero_frequency() {
        let s = FourierSeries::project(|_| 1.0, 2).unwrap();
        assert!((s.coeff(0) - Complex64::ONE).norm() < 1e-12);
        for n in [-2i64, -1, 1, 2] {
            assert!(s.coeff(n).norm() < 1e-12);
        }
    }

    #[test]
    fn eval_matches_term_summation() {
        let coeffs: Vec<Complex64> = (0..7)
            .map(|i| Complex64::new(0.3 * i as f64 - 1.0, 0.1 * i as f64))
            .collect();
        let s = FourierSeries::new(3, 2.0 * PI, coeffs).unwrap();
        for k in 0..20 {
            let x = -PI + 0.31 * k as f64;
            let direct: Complex64 = s
                .terms()
                .map(|(n, c)| c * Complex64::from_polar(1.0, n as f64 * x))
                .sum();
            assert!((s.eval(x) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn projection_is_idempotent_on_series() {
        let coeffs: Vec<Complex64> = (0..11)
            .map(|i| {
                let n = i as i64 - 5;
                // Hermitian pair so the series is real-valued.
                Complex64::new(0.1 * (n.abs() + 1) as f64, 0.02 * n as f64)
            })
            .collect();
        // symmetrize to a real-valued series
        let mut sym = coeffs.clone();
        for i in 0..11 {
            let j = 10 - i;
            let avg = (coeffs[i] + coeffs[j].conj()) / 2.0;
            sym[i] = avg;
        }
        let s = FourierSeries::new(5, 2.0 * PI, sym).unwrap();
        let back = FourierSeries::project(|x| s.eval_re(x), 8).unwrap();
        for n in -8i64..=8 {
            assert!((back.coeff(n) - s.coeff(n)).norm() < 1e-9, "n={n}");
        }
        assert!(back.real_symmetry_defect() < REAL_SYMMETRY_TOL);
    }

    #[test]
    fn truncation_error_of_own_series_vanishes() {
        let s = FourierSeries::project(|x| x.cos() + 0.3 * (2.0 * x).sin(), 4).unwrap();
        let err = s.truncation_error(|x| s.eval_re(x));
        assert!(err < 1e-10);
    }

    #[test]
    fn order_one_projection_misses_cos_2x_entirely() {
        let s = FourierSeries::project(|x| (2.0 * x).cos(), 1).unwrap();
        let err = s.truncation_error(|x| (2.0 * x).cos());
        assert_abs_diff_eq!(err, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn square_wave_matches_analytic_coefficients() {
        let sq = |x: f64| if x.sin() >= 0.0 { 1.0 } else { -1.0 };
        let s = FourierSeries::project(sq, 7).unwrap();
        for n in 1i64..=7 {
            let analytic = if n % 2 == 1 {
                Complex64::new(0.0, -2.0 / (PI * n as f64))
            } else {
                Complex64::ZERO
            };
            // discontinuous integrand: uniform rule converges O(1/N)
            assert!((s.coeff(n) - analytic).norm() < 1e-3, "n={n}");
            assert!((s.coeff(-n) - analytic.conj()).norm() < 1e-3);
        }
    }

    #[test]
    fn sinc_projection_matches_refined_quadrature() {
        let s = FourierSeries::project(sinc5, 8).unwrap();
        // oracle: same rule on a 10× finer grid
        let n_pts = 163840usize;
        for n in -8i64..=8 {
            let mut acc = Complex64::ZERO;
            for j in 0..n_pts {
                let x = -PI + 2.0 * PI * j as f64 / n_pts as f64;
                acc += sinc5(x) * Complex64::from_polar(1.0, -(n as f64) * x);
            }
            acc /= n_pts as f64;
            assert!((s.coeff(n) - acc).norm() < 1e-8, "n={n}");
        }
    }

    #[test]
    fn projection_energy_bounded_by_signal_energy() {
        let f = |x: f64| x.cos() + 0.5 * (3.0 * x).sin() - 0.2;
        let s = FourierSeries::project(f, 6).unwrap();
        let coeff_energy: f64 = s.terms().map(|(_, c)| c.norm_sqr()).sum();
        let n_pts = 8192;
        let signal_energy: f64 = (0..n_pts)
            .map(|j| {
                let x = -PI + 2.0 * PI * j as f64 / n_pts as f64;
                f(x) * f(x)
            })
            .sum::<f64>()
            / n_pts as f64;
        assert!(coeff_energy <= signal_energy + 1e-6);
    }

    #[test]
    fn projection_rejects_non_finite_samples() {
        let err = FourierSeries::project(|x| 1.0 / x, 2);
        assert!(matches!(err, Err(FourierError::NonFiniteSample { .. })));
    }

    #[test]
    fn spectrum_spec_counts() {
        let s = SpectrumSpec::new(2, 3).unwrap();
        assert_eq!(s.omega_size(), 49);
        assert_eq!(s.dof(), 21);
        assert_eq!(SpectrumSpec::new(1, 5).unwrap().omega_size(), 11);
        let big = SpectrumSpec::new(3, 2).unwrap();
        assert_eq!(big.omega_size(), 125);
        assert!(big.omega_size() > big.dof());
        assert!(SpectrumSpec::new(0, 3).is_err());
        assert!(SpectrumSpec::new(2, 0).is_err());
    }

    #[test]
    fn fft_matches_naive_dft() {
        let n = 32;
        let buf: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((j as f64 * 0.7).sin(), (j as f64 * 1.3).cos()))
            .collect();
        let mut fast = buf.clone();
        fft_inplace(&mut fast);
        for k in 0..n {
            let naive: Complex64 = (0..n)
                .map(|j| {
                    buf[j] * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64)
                })
                .sum();
            assert!((fast[k] - naive).norm() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn constant_model_concentrates_at_zero() {
        let spec = empirical_spectrum(|_| 0.75, 1, 8, 1).unwrap();
        assert!((spec.coeff(&[0]) - Complex64::new(0.75, 0.0)).norm() < 1e-12);
        assert!(spec.out_of_support_max(0) < 1e-9);
    }

    #[test]
    fn cosine_model_lands_on_unit_bins() {
        let spec = empirical_spectrum(|x| x[0].cos(), 1, 16, 1).unwrap();
        assert!((spec.coeff(&[1]) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((spec.coeff(&[-1]) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!(spec.out_of_support_max(1) < 1e-12);
    }

    #[test]
    fn single_upload_ry_sandwich_spectrum_is_analytic() {
        // ⟨Z⟩ of R_Y(a)·R_Z(x)·R_Y(b) on |0⟩ is
        // cos a cos b − sin a sin b cos x.
        let (a, b) = (0.81_f64, -1.27_f64);
        let model = |x: &[f64]| a.cos() * b.cos() - a.sin() * b.sin() * x[0].cos();
        let spec = empirical_spectrum(model, 1, 16, 1).unwrap();
        let c0 = Complex64::new(a.cos() * b.cos(), 0.0);
        let c1 = Complex64::new(-a.sin() * b.sin() / 2.0, 0.0);
        assert!((spec.coeff(&[0]) - c0).norm() < 1e-12);
        assert!((spec.coeff(&[1]) - c1).norm() < 1e-12);
        assert!((spec.coeff(&[-1]) - c1).norm() < 1e-12);
        assert!(spec.out_of_support_max(1) < 1e-12);
    }

    #[test]
    fn bivariate_separable_bins() {
        let spec = empirical_spectrum(|x| x[0].cos() * x[1].sin(), 2, 8, 1).unwrap();
        // cos x sin y = Σ ±(1/4i) e^{i(±x ±y)}
        let q = Complex64::new(0.0, -0.25);
        assert!((spec.coeff(&[1, 1]) - q).norm() < 1e-12);
        assert!((spec.coeff(&[-1, 1]) - q).norm() < 1e-12);
        assert!((spec.coeff(&[1, -1]) + q).norm() < 1e-12);
        assert!((spec.coeff(&[-1, -1]) + q).norm() < 1e-12);
        assert!(spec.out_of_support_max(1) < 1e-12);
    }

    #[test]
    fn bivariate_spectrum_matches_naive_dft() {
        let f = |x: &[f64]| (x[0] + 0.3).cos() * (2.0 * x[1]).sin() + 0.2 * x[0].sin();
        let g = 8usize;
        let spec = empirical_spectrum(f, 2, g, 2).unwrap();
        let half = (g / 2) as i64;
        for w0 in -half..half {
            for w1 in -half..half {
                let mut acc = Complex64::ZERO;
                for i in 0..g {
                    for j in 0..g {
                        let x = -PI + 2.0 * PI * i as f64 / g as f64;
                        let y = -PI + 2.0 * PI * j as f64 / g as f64;
                        acc += f(&[x, y])
                            * Complex64::from_polar(1.0, -(w0 as f64 * x + w1 as f64 * y));
                    }
                }
                acc /= (g * g) as f64;
                assert!((spec.coeff(&[w0, w1]) - acc).norm() < 1e-10, "w=({w0},{w1})");
            }
        }
    }

    #[test]
    fn undersized_grid_is_rejected() {
        let err = empirical_spectrum(|x| x[0].cos(), 1, 8, 4);
        assert!(matches!(err, Err(FourierError::GridTooSmall { .. })));
        let err = empirical_spectrum(|x| x[0].cos(), 1, 12, 2);
        assert!(matches!(err, Err(FourierError::GridTooSmall { .. })));
    }

    #[test]
    fn json_round_trip() {
        let s = FourierSeries::project(|x| x.cos(), 2).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: FourierSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back.order(), 2);
        for n in -2i64..=2 {
            assert!((back.coeff(n) - s.coeff(n)).norm() < 1e-12);
        }
        assert!(serde_json::from_str::<FourierSeries>(
            r#"{"K":1,"period":6.28,"coeffs":[[5,1.0,0.0]]}"#
        )
        .is_err());
    }
}
