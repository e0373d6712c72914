//! Complementary polynomial: given P with |P(x)| ≤ 1, construct Q so the
//! pair assembles into a unitary, via spectral factorization of
//! A = 1 − P·P* on the unit circle.

use super::{validation_grid, QspError, COMPLETION_TOL};
use crate::laurent::LaurentPoly;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Coefficient field requested for the completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// |A| coefficient mass below which P is accepted as already unimodular.
const UNIMODULAR_MASS: f64 = 1e-8;
/// Relative edge-trim threshold before forming the companion matrix.
const EDGE_TRIM_REL: f64 = 1e-10;
/// Half-width of the |root| = 1 boundary band.
const BOUNDARY_BAND: f64 = 1e-9;

/// Constructs Q with deg ≤ layers, parity layers mod 2, coefficients in the
/// requested field, and | |P|² + |Q|² − 1 | < 1e-7 on the validation grid.
///
/// Method: collapse the even-exponent Laurent polynomial A = 1 − P·P* to an
/// ordinary polynomial in z = w², take one root of each reciprocal-conjugate
/// pair (inside-unit-disk convention; boundary roots alternately), rebuild
/// the monic factor, and fit the positive scale on the grid.
pub fn complete(p: &LaurentPoly, layers: usize, field: Field) -> Result<LaurentPoly, QspError> {
    if let Some(d) = p.degree() {
        if d > layers {
            return Err(QspError::DegreeExceedsLayers { degree: d, layers });
        }
    }
    if !p.fits_parity((layers % 2) as u8) {
        return Err(QspError::ParityMismatch { layers });
    }
    let mut sup = 0.0f64;
    let mut witness = 0.0f64;
    for x in validation_grid() {
        let v = p.eval(x).norm();
        if v > sup {
            sup = v;
            witness = x;
        }
    }
    if sup > 1.0 + 1e-10 {
        return Err(QspError::MagnitudeExceeded {
            x: witness,
            value: sup,
        });
    }

    let a = LaurentPoly::constant(Complex64::ONE).sub(&p.mul(&p.conj_reflect()));
    let mass: f64 = a.terms().map(|(_, c)| c.norm()).sum();
    let q = if mass < UNIMODULAR_MASS {
        LaurentPoly::zero()
    } else {
        spectral_factor(p, &a, layers)?
    };

    let q = match field {
        Field::Complex => q,
        Field::Real => {
            let max_imag = q.max_imag();
            if max_imag > 1e-8 * q.max_coeff_magnitude().max(1.0) {
                return Err(QspError::RealificationFailed { max_imag });
            }
            q.realified()
        }
    };

    let mut residual = 0.0f64;
    for x in validation_grid() {
        let r = (p.eval(x).norm_sqr() + q.eval(x).norm_sqr() - 1.0).abs();
        residual = residual.max(r);
    }
    if residual >= COMPLETION_TOL {
        return Err(QspError::CompletionResidual { residual });
    }
    Ok(q)
}

/// One root of each reciprocal-conjugate pair: all strictly-inside roots,
/// plus every other boundary root (sorted by argument) so pairs of even
/// multiplicity stay balanced.
fn pick_roots(roots: &[Complex64], band: f64) -> Vec<Complex64> {
    let mut inside = Vec::new();
    let mut boundary = Vec::new();
    for &r in roots {
        let mag = r.norm();
        if (mag - 1.0).abs() <= band {
            boundary.push(r);
        } else if mag < 1.0 {
            inside.push(r);
        }
    }
    boundary.sort_by(|x, y| {
        (x.arg(), x.norm())
            .partial_cmp(&(y.arg(), y.norm()))
            .expect("finite roots")
    });
    inside.extend(boundary.iter().step_by(2));
    inside
}

/// Coefficients of c(z + mu) via repeated synthetic division (low → high).
fn taylor_shift(c: &[Complex64], mu: Complex64) -> Vec<Complex64> {
    let n = c.len() - 1;
    let mut out = c.to_vec();
    for k in 0..n {
        for j in (k..n).rev() {
            let hi = out[j + 1];
            out[j] += mu * hi;
        }
    }
    out
}

/// All roots of the polynomial with coefficients `c` (low → high, nonzero lead)
/// via companion-matrix eigenvalues.
fn polynomial_roots(c: &[Complex64]) -> Result<Vec<Complex64>, QspError> {
    let deg = c.len() - 1;
    let lead = c[deg];
    let mut companion = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        companion[(i, i - 1)] = Complex64::ONE;
    }
    for (i, &ci) in c.iter().take(deg).enumerate() {
        companion[(i, deg - 1)] = -ci / lead;
    }
    if let Some(schur) = companion.try_schur(f64::EPSILON, 10_000) {
        if let Some(roots) = schur.eigenvalues() {
            return Ok(roots.as_slice().to_vec());
        }
    }
    // The QR iteration can stall on spectra symmetric about the origin (A with
    // only even exponents has exactly that shape when edge trimming leaves an
    // even polynomial in z).  A small complex shift of the variable breaks the
    // symmetry; the roots map back by translation.
    let mu = Complex64::new(0.05, 0.03);
    let shifted = taylor_shift(c, mu);
    let lead = shifted[deg];
    let mut companion = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        companion[(i, i - 1)] = Complex64::ONE;
    }
    for (i, &ci) in shifted.iter().take(deg).enumerate() {
        companion[(i, deg - 1)] = -ci / lead;
    }
    let schur = companion
        .try_schur(f64::EPSILON, 10_000)
        .ok_or(QspError::SchurFailed)?;
    let roots = schur.eigenvalues().ok_or(QspError::SchurFailed)?;
    Ok(roots.iter().map(|r| r + mu).collect())
}

/// Factorizes A (Hermitian, even exponents, ≥ 0 on the circle) as |Q|².
fn spectral_factor(p: &LaurentPoly, a: &LaurentPoly, layers: usize) -> Result<LaurentPoly, QspError> {
    // collapse w² → z: b_j = a_{2j}, j ∈ [−m, m]
    let max_a = a.max_coeff_magnitude();
    let mut m = a.degree().expect("nonzero by mass check") / 2;
    while m > 0 && a.coeff(2 * m as i64).norm() <= EDGE_TRIM_REL * max_a {
        // tiny edge coefficients destabilize the companion matrix; their
        // mass is far below the residual budget
        m -= 1;
    }
    let b: Vec<Complex64> = (-(m as i64)..=m as i64).map(|j| a.coeff(2 * j)).collect();

    // roots of N(z) = z^m·B(z), paired (r, 1/conj(r)) by Hermitian symmetry
    let selected = if m == 0 {
        Vec::new()
    } else {
        let roots = polynomial_roots(&b)?;

        // Double roots on the circle split by O(√ε) under the eigensolver;
        // if the narrow band misclassifies them, retry with a wider one.
        // The final residual check still decides acceptance.
        let mut chosen = pick_roots(&roots, BOUNDARY_BAND);
        if chosen.len() != m {
            chosen = pick_roots(&roots, 1e-6);
        }
        if chosen.len() != m {
            return Err(QspError::RootCount {
                expected: m,
                got: chosen.len(),
            });
        }
        chosen
    };

    // monic R(z) = ∏ (z − r_i)
    let mut rho = vec![Complex64::ZERO; m + 1];
    rho[0] = Complex64::ONE;
    for (i, r) in selected.iter().enumerate() {
        for j in (0..=i + 1).rev() {
            let lower = if j > 0 { rho[j - 1] } else { Complex64::ZERO };
            rho[j] = lower - r * rho[j];
        }
    }

    // least-squares positive scale: A(x) ≈ s²·|R(e^{ix})|² on the grid
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for x in validation_grid() {
        let z = Complex64::from_polar(1.0, x);
        let mut rv = Complex64::ZERO;
        for &c in rho.iter().rev() {
            rv = rv * z + c;
        }
        let r2 = rv.norm_sqr();
        let aval = 1.0 - p.eval(x).norm_sqr();
        num += aval * r2;
        den += r2 * r2;
    }
    let s = (num / den).max(0.0).sqrt();

    // place z^j at exponent 2j + offset, inside [−layers, layers] with the
    // required parity
    let offset: i64 = if layers % 2 == 0 {
        -2 * (m as i64 / 2)
    } else {
        1 - 2 * ((m as i64 + 1) / 2)
    };
    let terms: Vec<(i64, Complex64)> = rho
        .iter()
        .enumerate()
        .map(|(j, &c)| (2 * j as i64 + offset, c * s))
        .collect();
    Ok(LaurentPoly::from_terms(&terms))
}
