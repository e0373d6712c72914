//! Dense statevector simulation for small qubit registers.
//!
//! Qubit 0 is the leftmost tensor factor: basis state |q_0 q_1 … q_{n-1}⟩
//! has amplitude index Σ q_i 2^{n-1-i}, so qubit 0 is the most significant
//! index bit. States are value semantic and global phase is never normalized
//! away.

use num_complex::Complex64;
use thiserror::Error;

/// Largest supported register size.
pub const MAX_QUBITS: usize = 16;
/// Tolerance on the unitarity defect max |(U†U − I)_{jk}| of 2x2 gates.
pub const UNITARITY_TOL: f64 = 1e-12;
/// Tolerance on the state norm defect | ‖ψ‖ − 1 |.
pub const NORM_TOL: f64 = 1e-10;
/// Bound asserted on the imaginary residue of Hermitian expectations.
pub const EXPECT_IMAG_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitIndex { index: usize, n_qubits: usize },
    #[error("control and target coincide on qubit {0}")]
    ControlEqualsTarget(usize),
    #[error("matrix is not unitary: defect {0:.3e} exceeds {UNITARITY_TOL:e}")]
    NotUnitary(f64),
    #[error("amplitude vector has length {got}, expected {expected}")]
    AmplitudeCount { expected: usize, got: usize },
    #[error("state norm defect {0:.3e} exceeds {NORM_TOL:e}")]
    NormDefect(f64),
    #[error("observable acts on {observable} qubits, state has {n_qubits}")]
    ObservableMismatch { observable: usize, n_qubits: usize },
}

/// Rotation axis for [`rot_gate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Single-qubit Pauli factor of an [`Observable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// A 2x2 complex matrix, unitary within [`UNITARITY_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    e: [[Complex64; 2]; 2],
}

impl Unitary2 {
    /// Validates unitarity of the given entries.
    pub fn new(e: [[Complex64; 2]; 2]) -> Result<Self, SimError> {
        let u = Self { e };
        let defect = u.unitarity_defect();
        if defect > UNITARITY_TOL {
            return Err(SimError::NotUnitary(defect));
        }
        Ok(u)
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.e[row][col]
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        self.e
    }

    /// max |(U†U − I)_{jk}|.
    pub fn unitarity_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for j in 0..2 {
            for k in 0..2 {
                let mut s = Complex64::ZERO;
                for l in 0..2 {
                    s += self.e[l][j].conj() * self.e[l][k];
                }
                let id = if j == k { 1.0 } else { 0.0 };
                defect = defect.max((s - id).norm());
            }
        }
        defect
    }

    pub fn mul(&self, rhs: &Unitary2) -> Unitary2 {
        let mut e = [[Complex64::ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                e[r][c] = self.e[r][0] * rhs.e[0][c] + self.e[r][1] * rhs.e[1][c];
            }
        }
        Unitary2 { e }
    }

    pub fn adjoint(&self) -> Unitary2 {
        let mut e = [[Complex64::ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                e[r][c] = self.e[c][r].conj();
            }
        }
        Unitary2 { e }
    }

    pub fn scale(&self, s: Complex64) -> [[Complex64; 2]; 2] {
        let mut e = self.e;
        for row in &mut e {
            for v in row {
                *v *= s;
            }
        }
        e
    }
}

/// R_P(θ) = exp(−iθP/2) for P ∈ {X, Y, Z}.
pub fn rot_gate(axis: Axis, theta: f64) -> Unitary2 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = match axis {
        Axis::X => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        Axis::Y => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        Axis::Z => [
            [Complex64::from_polar(1.0, -theta / 2.0), Complex64::ZERO],
            [Complex64::ZERO, Complex64::from_polar(1.0, theta / 2.0)],
        ],
    };
    Unitary2 { e }
}

/// U3(θ, φ, λ) = [[cos θ/2, −e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(φ+λ)} cos θ/2]].
///
/// Equals e^{i(φ+λ)/2}·R_Z(φ)·R_Y(θ)·R_Z(λ), so each argument is a Pauli
/// rotation angle up to global phase (the parameter-shift rule applies to
/// all three).
pub fn u3_gate(theta: f64, phi: f64, lambda: f64) -> Unitary2 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = [
        [
            Complex64::new(c, 0.0),
            -Complex64::from_polar(s, lambda),
        ],
        [
            Complex64::from_polar(s, phi),
            Complex64::from_polar(c, phi + lambda),
        ],
    ];
    Unitary2 { e }
}

/// Pauli-product observable, one factor per qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observable {
    paulis: Vec<Pauli>,
}

impl Observable {
    pub fn new(paulis: Vec<Pauli>) -> Self {
        Self { paulis }
    }

    /// Z on one qubit, identity elsewhere.
    pub fn z_on(n_qubits: usize, qubit: usize) -> Result<Self, SimError> {
        if qubit >= n_qubits {
            return Err(SimError::QubitIndex { index: qubit, n_qubits });
        }
        let mut paulis = vec![Pauli::I; n_qubits];
        paulis[qubit] = Pauli::Z;
        Ok(Self { paulis })
    }

    pub fn paulis(&self) -> &[Pauli] {
        &self.paulis
    }

    pub fn n_qubits(&self) -> usize {
        self.paulis.len()
    }
}

/// Pure state of `n_qubits` qubits; 2^n amplitudes with unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩.
    pub fn zero_state(n_qubits: usize) -> Result<Self, SimError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(SimError::QubitCount(n_qubits));
        }
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[0] = Complex64::ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Validates length 2^n and unit norm within [`NORM_TOL`].
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self, SimError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(SimError::QubitCount(n_qubits));
        }
        if amps.len() != 1 << n_qubits {
            return Err(SimError::AmplitudeCount {
                expected: 1 << n_qubits,
                got: amps.len(),
            });
        }
        let state = Self { n_qubits, amps };
        let defect = (state.norm() - 1.0).abs();
        if defect > NORM_TOL {
            return Err(SimError::NormDefect(defect));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_qubit(&self, index: usize) -> Result<(), SimError> {
        if index >= self.n_qubits {
            return Err(SimError::QubitIndex {
                index,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Applies a single-qubit gate, returning the new state.
    pub fn apply_single(&self, gate: &Unitary2, target: usize) -> Result<Self, SimError> {
        let mut out = self.clone();
        out.apply_single_mut(gate, target)?;
        Ok(out)
    }

    /// In-place variant of [`StateVector::apply_single`]; same semantics,
    /// reuses the amplitude buffer.
    pub fn apply_single_mut(&mut self, gate: &Unitary2, target: usize) -> Result<(), SimError> {
        self.check_qubit(target)?;
        // qubit q is index bit (n-1-q)
        let stride = 1usize << (self.n_qubits - 1 - target);
        let [[u00, u01], [u10, u11]] = gate.e;
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for low in base..base + stride {
                let a0 = self.amps[low];
                let a1 = self.amps[low
                    + stride];
                self.amps[low] = u00 * a0 + u01 * a1;
                self.amps[low + stride] = u10 * a0 + u11 * a1;
            }
            base += 2 * stride;
        }
        Ok(())
    }

    /// Applies CNOT with the given control and target, returning the new state.
    pub fn apply_cnot(&self, control: usize, target: usize) -> Result<Self, SimError> {
        let mut out = self.clone();
        out.apply_cnot_mut(control, target)?;
        Ok(out)
    }

    /// In-place variant of [`StateVector::apply_cnot`].
    pub fn apply_cnot_mut(&mut self, control: usize, target: usize) -> Result<(), SimError> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(SimError::ControlEqualsTarget(control));
        }
        let cmask = 1usize << (self.n_qubits - 1 - control);
        let tmask = 1usize << (self.n_qubits - 1 - target);
        for i in 0..self.amps.len() {
            // swap each control-set pair once, from its target-clear member
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    /// ⟨ψ|M|ψ⟩ for a Pauli-product observable. The imaginary residue is
    /// asserted below [`EXPECT_IMAG_TOL`] and discarded.
    pub fn expect(&self, obs: &Observable) -> Result<f64, SimError> {
        if obs.paulis.len() != self.n_qubits {
            return Err(SimError::ObservableMismatch {
                observable: obs.paulis.len(),
                n_qubits: self.n_qubits,
            });
        }
        let mut flip = 0usize;
        let mut z_mask = 0usize;
        let mut y_mask = 0usize;
        for (q, p) in obs.paulis.iter().enumerate() {
            let bit = 1usize << (self.n_qubits - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    y_mask |= bit;
                }
                Pauli::Z => z_mask |= bit,
            }
        }
        let mut acc = Complex64::ZERO;
        for i in 0..self.amps.len() {
            let j = i ^ flip; // source index: M|j⟩ contributes to component i
            let src = self.amps[j];
            if src == Complex64::ZERO {
                continue;
            }
            // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩; Z|b⟩ = (−1)^b |b⟩
            let mut phase = Complex64::ONE;
            let mut ys = y_mask;
            while ys != 0 {
                let bit = ys & ys.wrapping_neg();
                phase *= if j & bit == 0 {
                    Complex64::I
                } else {
                    -Complex64::I
                };
                ys &= ys - 1;
            }
            if (j & z_mask).count_ones() % 2 == 1 {
                phase = -phase;
            }
            acc += self.amps[i].conj() * phase * src;
        }
        assert!(
            acc.im.abs() < EXPECT_IMAG_TOL,
            "imaginary residue {:.3e} on a Hermitian expectation",
            acc.im
        );
        Ok(acc.re)
    }
}
