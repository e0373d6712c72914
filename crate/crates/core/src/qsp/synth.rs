//! Function-to-circuit pipelines: truncate √((1+f_K)/2) to a Fourier series
//! g, lift g to P, complete to Q, and peel the pair into gate angles. The
//! circuit's ⟨Z⟩ = 2|P|² − 1 then tracks f_K with sup error bounded by
//! 4·‖g − √((1+f_K)/2)‖∞ plus synthesis slack.

use super::complete::{complete, Field};
use super::peel::{peel_wzw, peel_yzy};
use super::{AngleSet, PolyPair, QspError};
use crate::fourier::FourierSeries;
use crate::laurent::LaurentPoly;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Additive slack of the reported error bound, covering completion and
/// peeling noise (each held to 1e-8 or better by their own checks).
pub const CHAIN_SLACK: f64 = 1e-6;

/// Violations of 1 + f_K ≥ 0 no larger than this are clamped to 0
/// (truncation ringing); anything larger is a domain error.
const CLAMP_TOL: f64 = 1e-9;

/// A synthesized circuit with its measured approximation diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Synthesis {
    pub angles: AngleSet,
    /// The inner series g approximating √((1+f_K)/2).
    pub g: FourierSeries,
    /// Measured sup |g − √((1+f_K)/2)| on a 2048-point grid.
    pub sup_g_error: f64,
    /// 4·sup_g_error + slack: the guaranteed sup bound on |⟨Z⟩ − f_K|.
    pub chain_bound: f64,
}

/// Synthesizes a YZY circuit whose ⟨Z⟩ approximates the real, even series
/// f_K. The inner order defaults to max(2K, 16); the resulting layer count
/// is twice the inner order.
pub fn synthesize_even(
    f_k: &FourierSeries,
    inner_order: Option<usize>,
) -> Result<Synthesis, QspError> {
    let defect = (0..=f_k.order() as i64)
        .map(|n| {
            let c = f_k.coeff(n);
            (c - f_k.coeff(-n)).norm().max(c.im.abs())
        })
        .fold(0.0, f64::max);
    if defect > 1e-9 {
        return Err(QspError::SeriesNotRealEven { defect });
    }
    let (g, sup_g_error) = half_sqrt_series(f_k, inner_order)?;
    // an even real target gives an even real g up to projection noise
    let g = symmetrize_even(&g)?;
    let layers = 2 * g.order();
    let p = series_to_poly(&g);
    let q = complete(&p, layers, Field::Real)?;
    let angles = peel_yzy(&PolyPair::new(p, q, layers))?;
    Ok(Synthesis {
        angles,
        g,
        sup_g_error,
        chain_bound: 4.0 * sup_g_error + CHAIN_SLACK,
    })
}

/// Synthesizes a WZW circuit for any series that is real-valued on the
/// grid (coefficients may be complex Hermitian); same error chain as the
/// even pipeline.
pub fn synthesize_any(
    f_k: &FourierSeries,
    inner_order: Option<usize>,
) -> Result<Synthesis, QspError> {
    let max_imag = grid_2048()
        .map(|x| f_k.eval(x).im.abs())
        .fold(0.0, f64::max);
    if max_imag > 1e-8 {
        return Err(QspError::SeriesNotReal { max_imag });
    }
    let (g, sup_g_error) = half_sqrt_series(f_k, inner_order)?;
    let layers = 2 * g.order();
    let p = series_to_poly(&g);
    let q = complete(&p, layers, Field::Complex)?;
    let angles = peel_wzw(&PolyPair::new(p, q, layers))?;
    Ok(Synthesis {
        angles,
        g,
        sup_g_error,
        chain_bound: 4.0 * sup_g_error + CHAIN_SLACK,
    })
}

fn grid_2048() -> impl Iterator<Item = f64> {
    (0..2048).map(|k| -PI + 2.0 * PI * k as f64 / 2047.0)
}

/// Truncated series g of h = √((1+f_K)/2) plus the measured sup |g − h|.
///
/// The series is treated in its own phase variable (u = 2πx/T for period
/// T), so coefficients transfer unchanged and the circuit encodes u.
fn half_sqrt_series(
    f_k: &FourierSeries,
    inner_order: Option<usize>,
) -> Result<(FourierSeries, f64), QspError> {
    // rescale to period 2π: same coefficients in the phase variable
    let coeffs: Vec<Complex64> = (-(f_k.order() as i64)..=f_k.order() as i64)
        .map(|n| f_k.coeff(n))
        .collect();
    let f2 = FourierSeries::new(f_k.order(), 2.0 * PI, coeffs).expect("validated shape");

    // domain check on the quadrature-grade grid
    let fine = 16384usize;
    for j in 0..fine {
        let x = -PI + 2.0 * PI * j as f64 / fine as f64;
        let v = 1.0 + f2.eval(x).re;
        if v < -CLAMP_TOL {
            return Err(QspError::DomainError { x, value: v });
        }
    }
    let h = move |x: f64| ((1.0 + f2.eval(x).re).max(0.0) / 2.0).sqrt();
    let order = inner_order.unwrap_or_else(|| (2 * f_k.order()).max(16));
    let g = FourierSeries::project(&h, order)?;
    let sup = grid_2048()
        .map(|x| (g.eval(x) - Complex64::from(h(x))).norm())
        .fold(0.0, f64::max);
    Ok((g, sup))
}

/// Zeroes the imaginary/odd projection noise of a nominally even real series.
fn symmetrize_even(g: &FourierSeries) -> Result<FourierSeries, QspError> {
    let order = g.order();
    let coeffs: Vec<Complex64> = (-(order as i64)..=order as i64)
        .map(|n| Complex64::new((g.coeff(n).re + g.coeff(-n).re) / 2.0, 0.0))
        .collect();
    Ok(FourierSeries::new(order, g.period(), coeffs)?)
}

/// Series frequency n becomes Laurent exponent 2n (w² = e^{ix}).
fn series_to_poly(g: &FourierSeries) -> LaurentPoly {
    let terms: Vec<(i64, Complex64)> = g.terms().map(|(n, c)| (2 * n, c)).collect();
    LaurentPoly::from_terms(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{rot_gate, Axis, Pauli, StateVector};

    /// ⟨Z⟩ of the synthesized circuit at x, via the dense simulator.
    fn circuit_expect(angles: &AngleSet, x: f64) -> f64 {
        let mut state = StateVector::zero_state(1).unwrap();
        let gates: Vec<crate::qsim::Unitary2> = match angles {
            AngleSet::Yzy { theta } => {
                let mut gs = Vec::new();
                // innermost block first
                for (j, &t) in theta.iter().enumerate().rev() {
                    gs.push(rot_gate(Axis::Y, t));
                    if j > 0 {
                        gs.push(rot_gate(Axis::Z, x));
                    }
                }
                gs
            }
            AngleSet::Wzw { varphi, theta, phi } => {
                let mut gs = Vec::new();
                for (j, &t) in theta.iter().enumerate().rev() {
                    gs.push(rot_gate(Axis::Z, phi[j]));
                    gs.push(rot_gate(Axis::Y, t));
                    if j > 0 {
                        gs.push(rot_gate(Axis::Z, x));
                    }
                }
                gs.push(rot_gate(Axis::Z, *varphi));
                gs
            }
        };
        for gate in &gates {
            state = state.apply_single(gate, 0).unwrap();
        }
        state
            .expect(&crate::qsim::Observable::new(vec![Pauli::Z]))
            .unwrap()
    }

    fn sup_error(angles: &AngleSet, target: impl Fn(f64) -> f64) -> f64 {
        (0..512)
            .map(|k| {
                let x = -PI + 2.0 * PI * k as f64 / 511.0;
                (circuit_expect(angles, x) - target(x)).abs()
            })
            .fold(0.0, f64::max)
    }

    fn sinc5(x: f64) -> f64 {
        if x == 0.0 {
            1.0
        } else {
            (5.0 * x).sin() / (5.0 * x)
        }
    }

    #[test]
    fn zero_target_gives_zero_expectation() {
        let f0 = FourierSeries::new(0, 2.0 * PI, vec![Complex64::ZERO]).unwrap();
        let syn = synthesize_even(&f0, None).unwrap();
        let sup = sup_error(&syn.angles, |_| 0.0);
        assert!(sup < 1e-9, "sup={sup:.3e}");
        let syn = synthesize_any(&f0, None).unwrap();
        assert!(sup_error(&syn.angles, |_| 0.0) < 1e-9);
    }

    #[test]
    fn cosine_synthesis_tracks_target() {
        let f_k = FourierSeries::project(|x| x.cos(), 1).unwrap();
        let syn = synthesize_even(&f_k, Some(16)).unwrap();
        assert_eq!(syn.angles.layers(), 32);
        let sup = sup_error(&syn.angles, |x| f_k.eval_re(x));
        assert!(sup < 1e-3, "sup={sup:.3e}");
        assert!(sup <= syn.chain_bound, "sup={sup:.3e} bound={:.3e}", syn.chain_bound);
    }

    #[test]
    fn sine_synthesis_tracks_target() {
        let f_k = FourierSeries::project(|x| x.sin(), 1).unwrap();
        let syn = synthesize_any(&f_k, Some(16)).unwrap();
        let sup = sup_error(&syn.angles, |x| f_k.eval_re(x));
        assert!(sup < 1e-3, "sup={sup:.3e}");
        assert!(sup <= syn.chain_bound);
    }

    #[test]
    fn sine_is_not_even() {
        let f_k = FourierSeries::project(|x| x.sin(), 1).unwrap();
        assert!(matches!(
            synthesize_even(&f_k, None),
            Err(QspError::SeriesNotRealEven { .. })
        ));
    }

    #[test]
    fn sinc_series_stays_within_chain_bound() {
        let f_k = FourierSeries::project(sinc5, 8).unwrap();
        let syn = synthesize_even(&f_k, None).unwrap();
        assert_eq!(syn.angles.layers(), 32);
        let sup = sup_error(&syn.angles, |x| f_k.eval_re(x));
        assert!(
            sup <= syn.chain_bound,
            "sup={sup:.3e} bound={:.3e}",
            syn.chain_bound
        );
        let syn_any = synthesize_any(&f_k, None).unwrap();
        let sup = sup_error(&syn_any.angles, |x| f_k.eval_re(x));
        assert!(sup <= syn_any.chain_bound);
    }

    #[test]
    fn overshooting_target_is_a_domain_error() {
        // 1 + f dips well below 0: the K=8 square-wave series keeps the
        // Gibbs overshoot of the ±1 wave, so 1 + f_K < −1e-9 near jumps
        let square = |x: f64| if x.sin() >= 0.0 { 1.0 } else { -1.0 };
        let f_k = FourierSeries::project(square, 8).unwrap();
        assert!(matches!(
            synthesize_any(&f_k, None),
            Err(QspError::DomainError { .. })
        ));
        // scaled to amplitude 0.8 the target fits and the chain bound holds
        let f_scaled = FourierSeries::project(|x| 0.8 * square(x), 8).unwrap();
        let syn = synthesize_any(&f_scaled, None).unwrap();
        let sup = sup_error(&syn.angles, |x| f_scaled.eval_re(x));
        assert!(
            sup <= syn.chain_bound,
            "sup={sup:.3e} bound={:.3e}",
            syn.chain_bound
        );
    }

    #[test]
    fn synthesis_json_round_trip() {
        let f_k = FourierSeries::project(|x| 0.5 * x.cos(), 1).unwrap();
        let syn = synthesize_even(&f_k, Some(8)).unwrap();
        let text = serde_json::to_string(&syn).unwrap();
        let back: Synthesis = serde_json::from_str(&text).unwrap();
        assert_eq!(back.angles, syn.angles);
        assert!((back.chain_bound - syn.chain_bound).abs() < 1e-15);
    }
}
