//! Unitary gate algebra.
//!
//! Rotation convention: `R_a(θ) = exp(iθσ_a) = cos θ·I + i sin θ·σ_a`.
//! This is the full-angle, positive-exponent form, NOT the common
//! `exp(-iθσ_a/2)`. With it, `Rx(π/4)` is `[[1, i], [i, 1]]/√2` and the
//! Hadamard factors as `H = P(-π/2)·Rx(π/4)·P(-π/2)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::geometry::wrap_angle;

/// Entrywise tolerance of the unitarity check on construction.
pub const UNITARITY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("expected {expected} entries, got {got}")]
    WrongEntryCount { expected: usize, got: usize },
    #[error("matrix is not unitary (max |UU† - I| = {0:e})")]
    NotUnitary(f64),
    #[error("non-finite entry")]
    NonFinite,
    #[error("cannot compose an empty gate list")]
    EmptyComposition,
}

/// Dense square unitary matrix, row-major, dimension a power of two.
#[derive(Clone, PartialEq)]
pub struct Unitary {
    dim: usize,
    entries: Vec<Complex64>,
}

impl fmt::Debug for Unitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Unitary({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Unitary {
    /// Validates shape and unitarity (`UU† = I` to [`UNITARITY_TOL`]).
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self, GateError> {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(GateError::NotPowerOfTwo(dim));
        }
        if entries.len() != dim * dim {
            return Err(GateError::WrongEntryCount { expected: dim * dim, got: entries.len() });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GateError::NonFinite);
        }
        let u = Self { dim, entries };
        let dev = u.unitarity_deviation();
        if dev > UNITARITY_TOL {
            return Err(GateError::NotUnitary(dev));
        }
        Ok(u)
    }

    /// Skips the unitarity check; callers guarantee it (products of unitaries).
    pub(crate) fn from_trusted(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    /// Builds a unitary whose column `j` is `columns[j]`.
    pub(crate) fn from_trusted_columns(columns: Vec<Vec<Complex64>>) -> Self {
        let dim = columns.len();
        let mut entries = vec![ZERO; dim * dim];
        for (c, col) in columns.iter().enumerate() {
            for (r, &z) in col.iter().enumerate() {
                entries[r * dim + c] = z;
            }
        }
        Self { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim.is_power_of_two(), "dimension must be a power of two");
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = ONE;
        }
        Self { dim, entries }
    }

    pub fn diagonal(diag: &[Complex64]) -> Result<Self, GateError> {
        let dim = diag.len();
        let mut entries = vec![ZERO; dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * dim + i] = d;
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> u32 {
        self.dim.trailing_zeros()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Self { dim: d, entries }
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self, GateError> {
        if self.dim != rhs.dim {
            return Err(GateError::DimensionMismatch(self.dim, rhs.dim));
        }
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    out[r * d + c] += a * rhs.entries[k * d + c];
                }
            }
        }
        Ok(Self { dim: d, entries: out })
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (a, b) = (self.dim, rhs.dim);
        let d = a * b;
        let mut entries = vec![ZERO; d * d];
        for r1 in 0..a {
            for c1 in 0..a {
                let x = self.entries[r1 * a + c1];
                for r2 in 0..b {
                    for c2 in 0..b {
                        entries[(r1 * b + r2) * d + c1 * b + c2] = x * rhs.entries[r2 * b + c2];
                    }
                }
            }
        }
        Self { dim: d, entries }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&z| z * c).collect() }
    }

    pub fn determinant_2x2(&self) -> Option<Complex64> {
        (self.dim == 2).then(|| self.entries[0] * self.entries[3] - self.entries[1] * self.entries[2])
    }

    /// Largest entrywise deviation of `UU†` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += self.entries[r * d + k] * self.entries[c * d + k].conj();
                }
                if r == c {
                    acc -= ONE;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Largest entrywise distance `max |U_ij - V_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, GateError> {
        if self.dim != other.dim {
            return Err(GateError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

impl std::ops::Index<(usize, usize)> for Unitary {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.entries[r * self.dim + c]
    }
}

#[derive(Serialize, Deserialize)]
struct UnitaryRepr {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for Unitary {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let entries =
            (0..self.dim).map(|r| (0..self.dim).map(|c| [self[(r, c)].re, self[(r, c)].im]).collect()).collect();
        UnitaryRepr { dim: self.dim, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Unitary {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = UnitaryRepr::deserialize(d)?;
        if repr.entries.len() != repr.dim || repr.entries.iter().any(|row| row.len() != repr.dim) {
            return Err(D::Error::custom(format!("entries must form a {0}x{0} array", repr.dim)));
        }
        let flat = repr.entries.into_iter().flatten().map(|[re, im]| Complex64::new(re, im)).collect();
        Unitary::new(repr.dim, flat).map_err(D::Error::custom)
    }
}

/// The named gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    /// `diag(1, e^{iφ})`
    Phase(f64),
    Hadamard,
    /// `diag(1, 1, 1, e^{iφ})`
    ControlledPhase(f64),
    Rx(f64),
    Ry(f64),
    Rz(f64),
}

pub fn make_gate(kind: GateKind) -> Unitary {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match kind {
        GateKind::Phase(phi) => Unitary::from_trusted(2, vec![ONE, ZERO, ZERO, Complex64::cis(phi)]),
        GateKind::Hadamard => {
            let h = FRAC_1_SQRT_2;
            Unitary::from_trusted(2, vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
        }
        GateKind::ControlledPhase(phi) => {
            let mut diag = [ONE; 4];
            diag[3] = Complex64::cis(phi);
            let mut entries = vec![ZERO; 16];
            for (i, d) in diag.into_iter().enumerate() {
                entries[i * 4 + i] = d;
            }
            Unitary::from_trusted(4, entries)
        }
        GateKind::Rx(t) => {
            let (s, co) = t.sin_cos();
            Unitary::from_trusted(2, vec![c(co, 0.0), c(0.0, s), c(0.0, s), c(co, 0.0)])
        }
        GateKind::Ry(t) => {
            let (s, co) = t.sin_cos();
            Unitary::from_trusted(2, vec![c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0)])
        }
        GateKind::Rz(t) => Unitary::from_trusted(2, vec![Complex64::cis(t), ZERO, ZERO, Complex64::cis(-t)]),
    }
}

pub fn rx(theta: f64) -> Unitary {
    make_gate(GateKind::Rx(theta))
}

pub fn ry(theta: f64) -> Unitary {
    make_gate(GateKind::Ry(theta))
}

pub fn rz(theta: f64) -> Unitary {
    make_gate(GateKind::Rz(theta))
}

pub fn phase(phi: f64) -> Unitary {
    make_gate(GateKind::Phase(phi))
}

pub fn hadamard() -> Unitary {
    make_gate(GateKind::Hadamard)
}

pub fn controlled_phase(phi: f64) -> Unitary {
    make_gate(GateKind::ControlledPhase(phi))
}

/// Product of `gates` with the first listed gate applied first (rightmost factor).
pub fn compose(gates: &[Unitary]) -> Result<Unitary, GateError> {
    let (first, rest) = gates.split_first().ok_or(GateError::EmptyComposition)?;
    rest.iter().try_fold(first.clone(), |acc, g| g.matmul(&acc))
}

/// Smallest `max |U - cV|` over the unit phase `c` fixed by the largest entry pair.
///
/// The reference entry maximises `|U_k| + |V_k|`, so the value is symmetric
/// in its arguments.
pub fn phase_distance(u: &Unitary, v: &Unitary) -> Result<f64, GateError> {
    if u.dim != v.dim {
        return Err(GateError::DimensionMismatch(u.dim, v.dim));
    }
    let mut k = 0;
    let mut best = -1.0;
    for (i, (a, b)) in u.entries.iter().zip(&v.entries).enumerate() {
        let m = a.norm() + b.norm();
        if m > best {
            best = m;
            k = i;
        }
    }
    let ratio = u.entries[k] * v.entries[k].conj();
    let c = if ratio.norm() > 0.0 { ratio / ratio.norm() } else { ONE };
    Ok(u.entries.iter().zip(&v.entries).map(|(a, b)| (a - c * b).norm()).fold(0.0, f64::max))
}

/// True iff `U = cV` for some unit complex `c`, entrywise within `tol`.
pub fn equal_up_to_phase(u: &Unitary, v: &Unitary, tol: f64) -> Result<bool, GateError> {
    Ok(phase_distance(u, v)? <= tol)
}

/// `U = e^{iδ}·Rz(α)·Ry(θ)·Rz(β)` in the `exp(iθσ)` rotation convention.
///
/// Canonical branch: `θ ∈ [0, π/2]`, `α, β ∈ (-π/2, π/2]`, `δ ∈ (-π, π]`.
/// When `θ` is 0 or π/2 only `α ± β` is determined and `β = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerZyz {
    pub alpha: f64,
    pub theta: f64,
    pub beta: f64,
    pub delta: f64,
}

impl EulerZyz {
    pub fn to_unitary(&self) -> Unitary {
        let m = compose(&[rz(self.beta), ry(self.theta), rz(self.alpha)]).expect("2x2 gates");
        m.scaled(Complex64::cis(self.delta))
    }
}

/// Below this magnitude an off-diagonal (or diagonal) SU(2) entry counts as zero.
const AXIS_EPS: f64 = 1e-14;

/// Shift `angle` into `(-π/2, π/2]`; each half-turn shift flips the sign of
/// the rotation, which is absorbed into the global phase.
fn half_turn_normalize(angle: f64, delta: &mut f64) -> f64 {
    let mut a = angle;
    while a > FRAC_PI_2 {
        a -= PI;
        *delta += PI;
    }
    while a <= -FRAC_PI_2 {
        a += PI;
        *delta += PI;
    }
    a
}

/// ZYZ decomposition of a 2×2 unitary.
///
/// # Panics
/// If `u` is not 2×2.
pub fn euler_zyz(u: &Unitary) -> EulerZyz {
    assert_eq!(u.dim(), 2, "euler_zyz needs a single-qubit unitary");
    let det = u.determinant_2x2().unwrap();
    let mut delta = det.arg() / 2.0;
    // V = e^{-iδ}U is in SU(2): [[a, b], [-b*, a*]] with
    // a = e^{i(α+β)} cos θ and b = e^{i(α-β)} sin θ.
    let unphase = Complex64::cis(-delta);
    let a = u[(0, 0)] * unphase;
    let b = u[(0, 1)] * unphase;
    let theta = b.norm().atan2(a.norm());
    let (alpha, beta) = if b.norm() < AXIS_EPS {
        (a.arg(), 0.0)
    } else if a.norm() < AXIS_EPS {
        (b.arg(), 0.0)
    } else {
        let (sum, diff) = (a.arg(), b.arg());
        ((sum + diff) / 2.0, (sum - diff) / 2.0)
    };
    let alpha = half_turn_normalize(alpha, &mut delta);
    let beta = half_turn_normalize(beta, &mut delta);
    EulerZyz { alpha, theta, beta, delta: wrap_angle(delta) }
}
