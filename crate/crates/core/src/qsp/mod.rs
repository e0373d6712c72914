//! Constructive maps between gate-angle sequences and Laurent-polynomial
//! pairs: forward expansion of the YZY/WZW single-qubit ansatzes, inverse
//! angle peeling, complementary-polynomial completion via spectral
//! factorization, and the end-to-end function-to-circuit pipelines.
//!
//! A circuit V(θ_0)·∏_{j=1}^{L} R_Z(x)V(θ_j) acting on |0⟩ has the unitary
//! form [[P, −Q], [Q*, P*]] with P, Q Laurent polynomials in w = e^{ix/2}.

mod complete;
mod forward;
mod peel;
mod synth;

pub use complete::{complete, Field};
pub use forward::{forward_wzw, forward_yzy};
pub use peel::{peel_wzw, peel_yzy};
pub use synth::{synthesize_any, synthesize_even, Synthesis};

use crate::fourier::FourierError;
use crate::laurent::LaurentPoly;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Points of the unitarity/normalization validation grid over [−2π, 2π].
pub const VALIDATION_GRID: usize = 1024;
/// Accepted grid defect of |P|²+|Q|²−1 when validating pairs for peeling.
pub const NORMALIZATION_TOL: f64 = 1e-8;
/// Required grid residual of completion output.
pub const COMPLETION_TOL: f64 = 1e-7;

/// Uniform validation grid over x ∈ [−2π, 2π].
pub fn validation_grid() -> impl Iterator<Item = f64> {
    use std::f64::consts::PI;
    (0..VALIDATION_GRID).map(|k| -2.0 * PI + 4.0 * PI * k as f64 / (VALIDATION_GRID - 1) as f64)
}

#[derive(Debug, Error)]
pub enum QspError {
    #[error("expected a {expected} angle set")]
    WrongAnsatz { expected: &'static str },
    #[error("condition 1 violated: degree {degree} exceeds layer bound {layers}")]
    DegreeExceedsLayers { degree: usize, layers: usize },
    #[error("condition 2 violated: coefficients off parity {} for layer bound {layers}", layers % 2)]
    ParityMismatch { layers: usize },
    #[error("condition 3 violated: | |P|²+|Q|²−1 | reaches {defect:.3e} on the grid")]
    NormalizationDefect { defect: f64 },
    #[error("pair must have real coefficients (max imaginary magnitude {max_imag:.3e})")]
    NonRealPair { max_imag: f64 },
    #[error("cancellation failure at level {level}: residual leading coefficient {residual:.3e}")]
    CancellationFailure { level: usize, residual: f64 },
    #[error("peeled angles reconstruct the pair only to {defect:.3e}")]
    RoundTripDefect { defect: f64 },
    #[error("|P({x:.6})| = {value:.12} exceeds 1")]
    MagnitudeExceeded { x: f64, value: f64 },
    #[error("eigenvalue iteration for the spectral factor did not converge")]
    SchurFailed,
    #[error("root pairing selected {got} of {expected} spectral-factor roots")]
    RootCount { expected: usize, got: usize },
    #[error("completion residual {residual:.3e} exceeds 1e-7")]
    CompletionResidual { residual: f64 },
    #[error("completion is complex (max imaginary {max_imag:.3e}) but the real field was requested")]
    RealificationFailed { max_imag: f64 },
    #[error("1 + f({x:.6}) = {value:.3e} < 0: target leaves [−1, 1]")]
    DomainError { x: f64, value: f64 },
    #[error("series must have real, even coefficients (defect {defect:.3e})")]
    SeriesNotRealEven { defect: f64 },
    #[error("series must be real-valued (max imaginary part {max_imag:.3e})")]
    SeriesNotReal { max_imag: f64 },
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// Trainable angles of a synthesized or trained single-qubit circuit.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleSet {
    /// θ_0..θ_L for blocks V(θ_j) = R_Y(θ_j); θ_0 is the outermost block.
    Yzy { theta: Vec<f64> },
    /// Leading relative-phase gate R_Z(varphi), then (θ_j, φ_j) per block
    /// V(θ_j, φ_j) = R_Y(θ_j)·R_Z(φ_j).
    Wzw {
        varphi: f64,
        theta: Vec<f64>,
        phi: Vec<f64>,
    },
}

impl AngleSet {
    pub fn yzy(theta: Vec<f64>) -> Self {
        assert!(!theta.is_empty(), "YZY needs at least θ_0");
        assert!(theta.iter().all(|t| t.is_finite()));
        AngleSet::Yzy { theta }
    }

    pub fn wzw(varphi: f64, theta: Vec<f64>, phi: Vec<f64>) -> Self {
        assert!(!theta.is_empty(), "WZW needs at least (θ_0, φ_0)");
        assert_eq!(theta.len(), phi.len());
        assert!(varphi.is_finite());
        assert!(theta.iter().chain(phi.iter()).all(|t| t.is_finite()));
        AngleSet::Wzw { varphi, theta, phi }
    }

    /// Layer count L (θ has L+1 entries).
    pub fn layers(&self) -> usize {
        match self {
            AngleSet::Yzy { theta } | AngleSet::Wzw { theta, .. } => theta.len() - 1,
        }
    }

    pub fn ansatz_name(&self) -> &'static str {
        match self {
            AngleSet::Yzy { .. } => "YZY",
            AngleSet::Wzw { .. } => "WZW",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct AngleSetRepr {
    ansatz: String,
    #[serde(rename = "L")]
    layers: usize,
    theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    varphi: Option<f64>,
}

/// JSON shape: {"ansatz": "YZY"|"WZW", "L": n, "theta": […], "phi": […],
/// "varphi": v} with phi/varphi present only for WZW.
impl Serialize for AngleSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            AngleSet::Yzy { theta } => AngleSetRepr {
                ansatz: "YZY".into(),
                layers: self.layers(),
                theta: theta.clone(),
                phi: None,
                varphi: None,
            },
            AngleSet::Wzw { varphi, theta, phi } => AngleSetRepr {
                ansatz: "WZW".into(),
                layers: self.layers(),
                theta: theta.clone(),
                phi: Some(phi.clone()),
                varphi: Some(*varphi),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AngleSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = AngleSetRepr::deserialize(deserializer)?;
        if repr.theta.is_empty() || repr.theta.len() != repr.layers + 1 {
            return Err(D::Error::custom(format!(
                "theta must have L+1 = {} entries (got {})",
                repr.layers + 1,
                repr.theta.len()
            )));
        }
        if repr.theta.iter().any(|t| !t.is_finite()) {
            return Err(D::Error::custom("non-finite angle"));
        }
        match repr.ansatz.as_str() {
            "YZY" => {
                if repr.phi.is_some() || repr.varphi.is_some() {
                    return Err(D::Error::custom("YZY takes no phi/varphi"));
                }
                Ok(AngleSet::yzy(repr.theta))
            }
            "WZW" => {
                let phi = repr
                    .phi
                    .ok_or_else(|| D::Error::custom("WZW requires phi"))?;
                let varphi = repr
                    .varphi
                    .ok_or_else(|| D::Error::custom("WZW requires varphi"))?;
                if phi.len() != repr.theta.len() {
                    return Err(D::Error::custom("phi must match theta length"));
                }
                if !varphi.is_finite() || phi.iter().any(|t| !t.is_finite()) {
                    return Err(D::Error::custom("non-finite angle"));
                }
                Ok(AngleSet::wzw(varphi, repr.theta, phi))
            }
            other => Err(D::Error::custom(format!("unknown ansatz {other:?}"))),
        }
    }
}

/// The polynomial pair of a circuit unitary [[P, −Q], [Q*, P*]] together
/// with its declared layer bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyPair {
    pub p: LaurentPoly,
    pub q: LaurentPoly,
    /// Layer bound L: deg ≤ L, parity L mod 2, |P|²+|Q|² = 1.
    pub layers: usize,
}

impl PolyPair {
    pub fn new(p: LaurentPoly, q: LaurentPoly, layers: usize) -> Self {
        Self { p, q, layers }
    }

    /// sup over the validation grid of | |P(x)|² + |Q(x)|² − 1 |.
    pub fn normalization_defect(&self) -> f64 {
        validation_grid()
            .map(|x| (self.p.eval(x).norm_sqr() + self.q.eval(x).norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Checks the three structural conditions, reporting the first failure.
    pub fn validate(&self, normalization_tol: f64) -> Result<(), QspError> {
        for poly in [&self.p, &self.q] {
            if let Some(d) = poly.degree() {
                if d > self.layers {
                    return Err(QspError::DegreeExceedsLayers {
                        degree: d,
                        layers: self.layers,
                    });
                }
            }
            if !poly.fits_parity((self.layers % 2) as u8) {
                return Err(QspError::ParityMismatch {
                    layers: self.layers,
                });
            }
        }
        let defect = self.normalization_defect();
        if defect > normalization_tol {
            return Err(QspError::NormalizationDefect { defect });
        }
        Ok(())
    }

    /// Rejects pairs with imaginary coefficient mass (Lemma-1 inputs).
    pub fn require_real(&self) -> Result<(), QspError> {
        let max_imag = self.p.max_imag().max(self.q.max_imag());
        if max_imag > 1e-10 {
            return Err(QspError::NonRealPair { max_imag });
        }
        Ok(())
    }

    /// The 2×2 unitary [[P, −Q], [Q*, P*]] evaluated at x.
    pub fn unitary_at(&self, x: f64) -> [[Complex64; 2]; 2] {
        let p = self.p.eval(x);
        let q = self.q.eval(x);
        [[p, -q], [q.conj(), p.conj()]]
    }

    /// max coefficient distance to another pair (P against P, Q against Q).
    pub fn max_coeff_distance(&self, other: &PolyPair) -> f64 {
        self.p
            .max_coeff_distance(&other.p)
            .max(self.q.max_coeff_distance(&other.q))
    }
}
