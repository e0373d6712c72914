//! Forward expansion: gate angles → the (P, Q) Laurent pair of the circuit
//! unitary, one encoding-plus-block step at a time.

use super::{AngleSet, PolyPair, QspError};
use crate::laurent::LaurentPoly;
use num_complex::Complex64;

/// Pair of the YZY circuit R_Y(θ_0)·∏_{j=1}^{L} R_Z(x)R_Y(θ_j).
///
/// Base case P = cos(θ_0/2), Q = sin(θ_0/2); appending block k maps
/// P ↦ cos(θ_k/2)·w⁻¹P − sin(θ_k/2)·wQ and
/// Q ↦ sin(θ_k/2)·w⁻¹P + cos(θ_k/2)·wQ.
pub fn forward_yzy(angles: &AngleSet) -> Result<PolyPair, QspError> {
    let AngleSet::Yzy { theta } = angles else {
        return Err(QspError::WrongAnsatz { expected: "YZY" });
    };
    let (s0, c0) = (theta[0] / 2.0).sin_cos();
    let mut p = LaurentPoly::constant(c0.into());
    let mut q = LaurentPoly::constant(s0.into());
    for &t in &theta[1..] {
        let (s, c) = (t / 2.0).sin_cos();
        let ps = p.shift(-1);
        let qs = q.shift(1);
        p = ps.scale(c.into()).sub(&qs.scale(s.into()));
        q = ps.scale(s.into()).add(&qs.scale(c.into()));
    }
    Ok(PolyPair::new(p, q, theta.len() - 1))
}

/// Pair of the WZW circuit
/// R_Z(varphi)·W(θ_0, φ_0)·∏_{j=1}^{L} R_Z(x)W(θ_j, φ_j) with
/// W(θ, φ) = R_Y(θ)R_Z(φ).
pub fn forward_wzw(angles: &AngleSet) -> Result<PolyPair, QspError> {
    let AngleSet::Wzw { varphi, theta, phi } = angles else {
        return Err(QspError::WrongAnsatz { expected: "WZW" });
    };
    let phase = |a: f64| Complex64::from_polar(1.0, a);
    let (s0, c0) = (theta[0] / 2.0).sin_cos();
    let mut p = LaurentPoly::constant(phase(-(varphi + phi[0]) / 2.0) * c0);
    let mut q = LaurentPoly::constant(phase(-(varphi - phi[0]) / 2.0) * s0);
    for k in 1..theta.len() {
        let (s, c) = (theta[k] / 2.0).sin_cos();
        let em = phase(-phi[k] / 2.0);
        let ep = em.conj();
        let ps = p.shift(-1);
        let qs = q.shift(1);
        p = ps.scale(em * c).sub(&qs.scale(em * s));
        q = ps.scale(ep * s).add(&qs.scale(ep * c));
    }
    Ok(PolyPair::new(p, q, theta.len() - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{rot_gate, Axis, Unitary2};

    // deterministic pseudo-random angles
    fn angle_stream(seed: u64, n: usize) -> Vec<f64> {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15) | 1;
        (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state as f64 / u64::MAX as f64) * 2.0 * std::f64::consts::PI
                    - std::f64::consts::PI
            })
            .collect()
    }

    fn yzy_unitary(theta: &[f64], x: f64) -> Unitary2 {
        let mut u = rot_gate(Axis::Y, theta[0]);
        for &t in &theta[1..] {
            u = u.mul(&rot_gate(Axis::Z, x)).mul(&rot_gate(Axis::Y, t));
        }
        u
    }

    fn wzw_unitary(varphi: f64, theta: &[f64], phi: &[f64], x: f64) -> Unitary2 {
        let mut u = rot_gate(Axis::Z, varphi)
            .mul(&rot_gate(Axis::Y, theta[0]))
            .mul(&rot_gate(Axis::Z, phi[0]));
        for k in 1..theta.len() {
            u = u
                .mul(&rot_gate(Axis::Z, x))
                .mul(&rot_gate(Axis::Y, theta[k]))
                .mul(&rot_gate(Axis::Z, phi[k]));
        }
        u
    }

    #[test]
    fn yzy_base_case() {
        let pair = forward_yzy(&AngleSet::yzy(vec![std::f64::consts::FRAC_PI_2])).unwrap();
        let c = (std::f64::consts::FRAC_PI_4).cos();
        let s = (std::f64::consts::FRAC_PI_4).sin();
        assert!((pair.p.coeff(0) - Complex64::from(c)).norm() < 1e-15);
        assert!((pair.q.coeff(0) - Complex64::from(s)).norm() < 1e-15);
        assert_eq!(pair.layers, 0);
    }

    #[test]
    fn yzy_bare_encoding_gate() {
        let pair = forward_yzy(&AngleSet::yzy(vec![0.0, 0.0])).unwrap();
        assert!((pair.p.coeff(-1) - Complex64::ONE).norm() < 1e-15);
        assert_eq!(pair.p.degree(), Some(1));
        assert!(pair.q.is_zero());
    }

    #[test]
    fn yzy_matches_gate_product() {
        let theta = angle_stream(11, 21);
        let pair = forward_yzy(&AngleSet::yzy(theta.clone())).unwrap();
        for k in 0..50 {
            let x = -2.0 * std::f64::consts::PI + 0.25 * k as f64;
            let u = yzy_unitary(&theta, x);
            let m = pair.unitary_at(x);
            for r in 0..2 {
                for c in 0..2 {
                    assert!((u.entry(r, c) - m[r][c]).norm() < 1e-10, "({r},{c}) x={x}");
                }
            }
        }
    }

    #[test]
    fn wzw_base_cases() {
        let pair = forward_wzw(&AngleSet::wzw(
            0.0,
            vec![std::f64::consts::FRAC_PI_2],
            vec![0.0],
        ))
        .unwrap();
        let half = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
        assert!((pair.p.coeff(0) - half).norm() < 1e-15);
        assert!((pair.q.coeff(0) - half).norm() < 1e-15);

        let phase_only =
            forward_wzw(&AngleSet::wzw(std::f64::consts::PI, vec![0.0], vec![0.0])).unwrap();
        assert!((phase_only.p.coeff(0) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(phase_only.q.is_zero());
    }

    #[test]
    fn wzw_matches_gate_product() {
        let theta = angle_stream(5, 16);
        let phi = angle_stream(17, 16);
        let varphi = 0.93;
        let pair = forward_wzw(&AngleSet::wzw(varphi, theta.clone(), phi.clone())).unwrap();
        for k in 0..50 {
            let x = -2.0 * std::f64::consts::PI + 0.25 * k as f64;
            let u = wzw_unitary(varphi, &theta, &phi, x);
            let m = pair.unitary_at(x);
            for r in 0..2 {
                for c in 0..2 {
                    assert!((u.entry(r, c) - m[r][c]).norm() < 1e-9, "({r},{c}) x={x}");
                }
            }
        }
    }

    #[test]
    fn forward_pairs_satisfy_structural_conditions() {
        for (seed, layers) in [(1u64, 0usize), (2, 1), (3, 7), (4, 20)] {
            let pair = forward_yzy(&AngleSet::yzy(angle_stream(seed, layers + 1))).unwrap();
            pair.validate(1e-9).unwrap();
            pair.require_real().unwrap();
            let pair = forward_wzw(&AngleSet::wzw(
                0.31 * seed as f64,
                angle_stream(seed + 100, layers + 1),
                angle_stream(seed + 200, layers + 1),
            ))
            .unwrap();
            pair.validate(1e-9).unwrap();
        }
    }

    #[test]
    fn wrong_ansatz_is_rejected() {
        let yzy = AngleSet::yzy(vec![0.1]);
        let wzw = AngleSet::wzw(0.0, vec![0.1], vec![0.2]);
        assert!(matches!(
            forward_yzy(&wzw),
            Err(QspError::WrongAnsatz { expected: "YZY" })
        ));
        assert!(matches!(
            forward_wzw(&yzy),
            Err(QspError::WrongAnsatz { expected: "WZW" })
        ));
    }
}
