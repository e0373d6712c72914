//! Laurent polynomials in w = e^{ix/2} with complex coefficients.
//!
//! Exponents are half-integer frequencies: the integer-frequency term e^{inx}
//! is the exponent-2n monomial. Coefficients are stored densely over
//! [−D, D]; magnitudes at or below [`ZERO_COEFF`] count as zero for degree
//! and parity.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Coefficient magnitudes at or below this are treated as zero.
pub const ZERO_COEFF: f64 = 1e-14;

/// Exponent parity classification; `Even` covers the zero polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

#[derive(Debug, Clone)]
pub struct LaurentPoly {
    /// Coefficients of w^k for k in −half..=half at index k + half.
    coeffs: Vec<Complex64>,
    half: usize,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self {
            coeffs: vec![Complex64::ZERO],
            half: 0,
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self {
            coeffs: vec![c],
            half: 0,
        }
    }

    /// c·w^k.
    pub fn monomial(exponent: i64, c: Complex64) -> Self {
        let half = exponent.unsigned_abs() as usize;
        let mut coeffs = vec![Complex64::ZERO; 2 * half + 1];
        coeffs[(exponent + half as i64) as usize] = c;
        Self { coeffs, half }
    }

    /// Sums duplicate exponents.
    pub fn from_terms(terms: &[(i64, Complex64)]) -> Self {
        let half = terms
            .iter()
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let mut coeffs = vec![Complex64::ZERO; 2 * half + 1];
        for &(k, c) in terms {
            coeffs[(k + half as i64) as usize] += c;
        }
        Self { coeffs, half }
    }

    /// Coefficient of w^k (zero outside storage).
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.half {
            Complex64::ZERO
        } else {
            self.coeffs[(k + self.half as i64) as usize]
        }
    }

    /// Storage bound D (coefficients live on [−D, D]).
    pub fn storage_bound(&self) -> usize {
        self.half
    }

    /// (exponent, coefficient) pairs over the stored range.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let half = self.half as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - half, c))
    }

    /// max |k| with |c_k| > [`ZERO_COEFF`]; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms()
            .filter(|(_, c)| c.norm() > ZERO_COEFF)
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
    }

    /// Exponent parity over coefficients above [`ZERO_COEFF`].
    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for (k, c) in self.terms() {
            if c.norm() > ZERO_COEFF {
                if k.rem_euclid(2) == 0 {
                    even = true;
                } else {
                    odd = true;
                }
            }
        }
        match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    /// True when no coefficient above [`ZERO_COEFF`] sits on an exponent of
    /// the wrong parity (vacuously true for the zero polynomial).
    pub fn fits_parity(&self, parity: u8) -> bool {
        self.terms().all(|(k, c)| {
            c.norm() <= ZERO_COEFF || k.rem_euclid(2) == parity as i64
        })
    }

    pub fn max_coeff_magnitude(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    /// Largest |Im c_k| over all coefficients.
    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Drops imaginary parts.
    pub fn realified(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| Complex64::new(c.re, 0.0))
            .collect();
        Self {
            coeffs,
            half: self.half,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let half = self.half.max(rhs.half);
        let mut coeffs = vec![Complex64::ZERO; 2 * half + 1];
        for (k, c) in self.terms().chain(rhs.terms()) {
            coeffs[(k + half as i64) as usize] += c;
        }
        Self { coeffs, half }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            half: self.half,
        }
    }

    /// Multiplication by w^s (exponent shift).
    pub fn shift(&self, s: i64) -> Self {
        let half = self.half as i64;
        let new_half = (half + s.abs()).max((-half + s).abs()).max((half + s).abs()) as usize;
        let mut coeffs = vec![Complex64::ZERO; 2 * new_half + 1];
        for (k, c) in self.terms() {
            coeffs[(k + s + new_half as i64) as usize] = c;
        }
        let mut out = Self {
            coeffs,
            half: new_half,
        };
        out.shrink();
        out
    }

    /// Coefficient convolution.
    pub fn mul(&self, rhs: &Self) -> Self {
        let half = self.half + rhs.half;
        let mut coeffs = vec![Complex64::ZERO; 2 * half + 1];
        for (k1, c1) in self.terms() {
            if c1 == Complex64::ZERO {
                continue;
            }
            for (k2, c2) in rhs.terms() {
                coeffs[(k1 + k2 + half as i64) as usize] += c1 * c2;
            }
        }
        Self { coeffs, half }
    }

    /// P*(w): coefficient of w^k becomes conj(c_{−k}); on |w| = 1 this is the
    /// pointwise complex conjugate of P.
    pub fn conj_reflect(&self) -> Self {
        let coeffs = self.coeffs.iter().rev().map(|c| c.conj()).collect();
        Self {
            coeffs,
            half: self.half,
        }
    }

    /// P(x) = Σ c_k e^{ikx/2}.
    pub fn eval(&self, x: f64) -> Complex64 {
        let step = Complex64::from_polar(1.0, x / 2.0);
        let mut w = Complex64::from_polar(1.0, -(self.half as f64) * x / 2.0);
        let mut acc = Complex64::ZERO;
        for c in &self.coeffs {
            acc += c * w;
            w *= step;
        }
        acc
    }

    /// max |c_k − rhs_k| over the union of exponents.
    pub fn max_coeff_distance(&self, rhs: &Self) -> f64 {
        let half = self.half.max(rhs.half) as i64;
        (-half..=half)
            .map(|k| (self.coeff(k) - rhs.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    /// Shrinks storage to the smallest bound containing all exactly-nonzero
    /// coefficients.
    pub fn shrink(&mut self) {
        let needed = self
            .terms()
            .filter(|(_, c)| *c != Complex64::ZERO)
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        if needed < self.half {
            let off = self.half - needed;
            self.coeffs = self.coeffs[off..self.coeffs.len() - off].to_vec();
            self.half = needed;
        }
    }

    /// Zeroes every coefficient with |k| > bound, returning the largest
    /// magnitude removed.
    pub fn truncate_to(&mut self, bound: usize) -> f64 {
        let mut removed: f64 = 0.0;
        let half = self.half as i64;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            let k = i as i64 - half;
            if k.unsigned_abs() as usize > bound {
                removed = removed.max(c.norm());
                *c = Complex64::ZERO;
            }
        }
        self.shrink();
        removed
    }
}

impl PartialEq for LaurentPoly {
    fn eq(&self, other: &Self) -> bool {
        self.max_coeff_distance(other) == 0.0
    }
}

/// Stored as {"coeffs": [[k, re, im], …]} keeping terms above [`ZERO_COEFF`],
/// sorted by exponent.
impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            coeffs: Vec<(i64, f64, f64)>,
        }
        let coeffs = self
            .terms()
            .filter(|(_, c)| c.norm() > ZERO_COEFF)
            .map(|(k, c)| (k, c.re, c.im))
            .collect();
        Repr { coeffs }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            coeffs: Vec<(i64, f64, f64)>,
        }
        let repr = Repr::deserialize(deserializer)?;
        for &(_, re, im) in &repr.coeffs {
            if !re.is_finite() || !im.is_finite() {
                return Err(D::Error::custom("non-finite coefficient"));
            }
        }
        let terms: Vec<(i64, Complex64)> = repr
            .coeffs
            .iter()
            .map(|&(k, re, im)| (k, Complex64::new(re, im)))
            .collect();
        Ok(LaurentPoly::from_terms(&terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // oracle: direct term summation, no recurrence
    fn eval_direct(p: &LaurentPoly, x: f64) -> Complex64 {
        p.terms()
            .map(|(k, ck)| ck * Complex64::from_polar(1.0, k as f64 * x / 2.0))
            .sum()
    }

    #[test]
    fn eval_unit_monomial_at_pi() {
        let p = LaurentPoly::monomial(1, c(1.0, 0.0));
        let v = p.eval(std::f64::consts::PI);
        assert!((v - Complex64::I).norm() < 1e-15);
    }

    #[test]
    fn eval_matches_direct_summation() {
        let p = LaurentPoly::from_terms(&[
            (-7, c(0.3, -1.2)),
            (-2, c(1.0, 0.5)),
            (0, c(-0.4, 0.0)),
            (3, c(0.0, 2.0)),
            (11, c(-1.5, 0.7)),
        ]);
        for k in 0..64 {
            let x = -2.0 * std::f64::consts::PI + k as f64 * 0.2;
            assert!((p.eval(x) - eval_direct(&p, x)).norm() < 1e-12);
        }
    }

    #[test]
    fn mul_of_inverse_monomials_is_one() {
        let a = LaurentPoly::monomial(-1, c(1.0, 0.0));
        let b = LaurentPoly::monomial(1, c(1.0, 0.0));
        let prod = a.mul(&b);
        assert_eq!(prod.degree(), Some(0));
        assert!((prod.coeff(0) - Complex64::ONE).norm() < 1e-15);
    }

    #[test]
    fn mul_agrees_with_pointwise_product() {
        let a = LaurentPoly::from_terms(&[(-3, c(1.0, 1.0)), (0, c(0.5, 0.0)), (2, c(0.0, -2.0))]);
        let b = LaurentPoly::from_terms(&[(-1, c(0.7, 0.2)), (4, c(-1.0, 0.3))]);
        let prod = a.mul(&b);
        for k in 0..32 {
            let x = -6.0 + 0.4 * k as f64;
            let lhs = prod.eval(x);
            let rhs = a.eval(x) * b.eval(x);
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn conj_reflect_mirrors_and_conjugates() {
        let p = LaurentPoly::monomial(2, c(3.0, 4.0));
        let r = p.conj_reflect();
        assert!((r.coeff(-2) - c(3.0, -4.0)).norm() < 1e-15);
        assert!(r.coeff(2).norm() < 1e-15);
    }

    #[test]
    fn conj_reflect_is_pointwise_conjugate_on_reals() {
        let p = LaurentPoly::from_terms(&[(-2, c(1.0, -0.5)), (1, c(0.3, 0.9)), (5, c(-2.0, 0.1))]);
        let r = p.conj_reflect();
        for k in 0..16 {
            let x = -3.0 + 0.5 * k as f64;
            assert!((r.eval(x) - p.eval(x).conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn parity_and_degree_classification() {
        let p = LaurentPoly::from_terms(&[(-2, c(1.0, 0.0)), (2, c(1.0, 0.0))]);
        assert_eq!(p.parity(), Parity::Even);
        assert_eq!(p.degree(), Some(2));
        let q = LaurentPoly::from_terms(&[(-1, c(1.0, 0.0)), (3, c(1.0, 0.0))]);
        assert_eq!(q.parity(), Parity::Odd);
        let m = LaurentPoly::from_terms(&[(0, c(1.0, 0.0)), (3, c(1.0, 0.0))]);
        assert_eq!(m.parity(), Parity::Mixed);
        assert!(m.fits_parity(0) == false && m.fits_parity(1) == false);
        assert!(LaurentPoly::zero().fits_parity(0) && LaurentPoly::zero().fits_parity(1));
    }

    #[test]
    fn degree_ignores_below_threshold_coefficients() {
        let p = LaurentPoly::from_terms(&[(3, c(1e-15, 0.0)), (1, c(1.0, 0.0))]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(p.parity(), Parity::Odd);
    }

    #[test]
    fn degree_of_product_adds_for_nonvanishing_leads() {
        let a = LaurentPoly::from_terms(&[(-2, c(1.0, 0.0)), (3, c(2.0, 0.0))]);
        let b = LaurentPoly::from_terms(&[(-4, c(0.5, 0.0)), (1, c(1.0, 0.0))]);
        assert_eq!(a.mul(&b).degree(), Some(6));
    }

    #[test]
    fn shift_moves_exponents() {
        let p = LaurentPoly::from_terms(&[(-1, c(1.0, 0.0)), (2, c(2.0, 0.0))]);
        let s = p.shift(-2);
        assert!((s.coeff(-3) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((s.coeff(0) - c(2.0, 0.0)).norm() < 1e-15);
        for k in 0..16 {
            let x = 0.3 * k as f64;
            let expected = p.eval(x) * Complex64::from_polar(1.0, -x);
            assert!((s.eval(x) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn truncate_reports_removed_mass() {
        let mut p = LaurentPoly::from_terms(&[(0, c(1.0, 0.0)), (4, c(0.25, 0.0))]);
        let removed = p.truncate_to(2);
        assert_abs_diff_eq!(removed, 0.25, epsilon = 1e-15);
        assert_eq!(p.degree(), Some(0));
    }

    #[test]
    fn json_round_trip_and_shape() {
        let p = LaurentPoly::from_terms(&[(-2, c(0.5, -1.0)), (2, c(1.5, 0.25))]);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"coeffs":[[-2,0.5,-1.0],[2,1.5,0.25]]}"#);
        let back: LaurentPoly = serde_json::from_str(&text).unwrap();
        assert!(p.max_coeff_distance(&back) < 1e-15);
    }

    #[test]
    fn json_rejects_non_finite() {
        let err = serde_json::from_str::<LaurentPoly>(r#"{"coeffs":[[0,1e999,0.0]]}"#);
        assert!(err.is_err());
    }
}
