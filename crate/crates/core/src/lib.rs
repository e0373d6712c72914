//! Single- and few-qubit data re-uploading networks: dense statevector
//! simulation, constructive Fourier-series-to-gate-angle synthesis, frequency
//! spectrum analysis, and gradient-based training.
//!
//! Module map:
//! - [`qsim`]: 2x2 gate algebra, statevector simulation, Pauli expectations.
//! - [`laurent`]: Laurent polynomials in w = e^{ix/2}.
//! - [`qsp`]: forward/backward angle-polynomial maps, complementary
//!   polynomials, and the end-to-end synthesis pipelines.
//! - [`fourier`]: truncated Fourier series, quadrature projection, and
//!   empirical model spectra.
//! - [`models`]: circuit templates (single-qubit ansatzes and the
//!   Parallel-Entanglement family) and their evaluation.
//! - [`training`]: MSE loss, parameter-shift gradients, Adam, the training
//!   loop, classification heads, and PCA.
//! - [`data`]: dataset generators and CSV ingestion.

pub mod fourier;
pub mod laurent;
pub mod qsim;
pub mod qsp;
