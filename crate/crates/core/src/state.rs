//! Little-endian statevectors: qubit 0 is the least significant bit of the
//! basis index. Bitstring labels are written `q_{n-1} ... q_0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::Unitary;

/// Allowed drift of the 2-norm from 1.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("state length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("state has norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    InvalidQubit { qubit: usize, n_qubits: usize },
    #[error("bitstring {0:?} is not a valid basis label")]
    BadLabel(String),
    #[error("basis label has {got} qubits, expected {expected}")]
    LabelLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self, StateError> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(StateError::NotPowerOfTwo(amps.len()));
        }
        let s = Self { amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL * 1e3 || !norm.is_finite() {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(s)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// Basis state from a `q_{n-1} ... q_0` bitstring.
    pub fn from_label(label: &str) -> Result<Self, StateError> {
        let n = label.len();
        if n == 0 || !label.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(StateError::BadLabel(label.to_string()));
        }
        let index = usize::from_str_radix(label, 2).map_err(|_| StateError::BadLabel(label.to_string()))?;
        Ok(Self::basis(n, index))
    }

    pub fn n_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn check_qubit(&self, qubit: usize) -> Result<(), StateError> {
        let n = self.n_qubits();
        if qubit >= n {
            return Err(StateError::InvalidQubit { qubit, n_qubits: n });
        }
        Ok(())
    }

    /// Applies a 2×2 unitary to `qubit` in place.
    pub fn apply_single(&mut self, u: &Unitary, qubit: usize) -> Result<(), StateError> {
        self.check_qubit(qubit)?;
        assert_eq!(u.dim(), 2, "single-qubit gate must be 2x2");
        let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
        let bit = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let j = i | bit;
                let (a0, a1) = (self.amps[i], self.amps[j]);
                self.amps[i] = u00 * a0 + u01 * a1;
                self.amps[j] = u10 * a0 + u11 * a1;
            }
        }
        Ok(())
    }

    /// Multiplies each amplitude by `phase(index)`.
    pub fn apply_diagonal(&mut self, phase: impl Fn(usize) -> Complex64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= phase(i);
        }
    }
}

impl TryFrom<Vec<[f64; 2]>> for StateVector {
    type Error = StateError;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self, StateError> {
        Self::new(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<StateVector> for Vec<[f64; 2]> {
    fn from(s: StateVector) -> Self {
        s.amps.into_iter().map(|z| [z.re, z.im]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{hadamard, rx};

    #[test]
    fn labels_are_little_endian() {
        let s = StateVector::from_label("10").unwrap();
        assert_eq!(s.n_qubits(), 2);
        // q1 = 1, q0 = 0 -> index 2
        assert_eq!(s.amplitudes()[2], Complex64::new(1.0, 0.0));
        assert!(StateVector::from_label("12").is_err());
        assert!(StateVector::from_label("").is_err());
    }

    #[test]
    fn single_qubit_gate_targets_the_right_bit() {
        let mut s = StateVector::basis(2, 0);
        s.apply_single(&hadamard(), 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - h).abs() < 1e-15);
        assert!((s.amplitudes()[2].re - h).abs() < 1e-15);
        assert_eq!(s.apply_single(&rx(0.1), 2), Err(StateError::InvalidQubit { qubit: 2, n_qubits: 2 }));
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(matches!(StateVector::new(vec![Complex64::new(1.0, 0.0); 2]), Err(StateError::NotNormalized(_))));
        assert!(matches!(StateVector::new(vec![Complex64::new(1.0, 0.0); 3]), Err(StateError::NotPowerOfTwo(3))));
    }
}
