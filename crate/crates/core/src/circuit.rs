//! Circuit IR, reference simulation, and compilation to the two backends.
//!
//! | gate   | lattice            | spin line          |
//! |--------|--------------------|--------------------|
//! | P      | TOPOLOGICAL(AB)    | TOPOLOGICAL(AC)    |
//! | C      | TOPOLOGICAL(AB)    | unsupported        |
//! | H      | DYNAMICAL          | TOPOLOGICAL(AC)    |
//! | Rx     | DYNAMICAL          | TOPOLOGICAL(AC)    |
//! | Ry, Rz | unsupported        | TOPOLOGICAL(AC)    |
//!
//! Compiled programs reproduce the circuit up to a global phase.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::{make_gate, phase_distance, GateKind, Unitary};
use crate::geometry::wrap_angle;
use crate::lattice::{
    commensurate_multiple, compile_c, compile_hadamard, compile_p, program_unitary, HoppingPulse, Instruction,
    LatticeError, LatticeProgram, LatticeRegister, PHASE_MATCH_TOL,
};
use crate::spinline::{compile_su2_with_scales, holonomy, Architecture, SpinError, SpinProgram, SpinScales};
use crate::state::{StateError, StateVector};

/// Largest register [`circuit_unitary`] will expand.
pub const MAX_UNITARY_QUBITS: usize = 12;
/// Largest register [`verify_compilation`] will check.
pub const MAX_VERIFY_QUBITS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("circuit needs at least one qubit")]
    NoQubits,
    #[error("gate {index} ({gate}) takes {expected} target(s), got {got}")]
    TargetCount { index: usize, gate: &'static str, expected: usize, got: usize },
    #[error("gate {index} targets qubit {qubit} of a {n_qubits}-qubit circuit")]
    TargetOutOfRange { index: usize, qubit: usize, n_qubits: usize },
    #[error("gate {index} repeats target {qubit}")]
    RepeatedTarget { index: usize, qubit: usize },
    #[error("gate {index} has a non-finite angle")]
    NonFiniteAngle { index: usize },
    #[error("expected {expected} qubits, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} qubits is too many for a dense unitary")]
    TooLarge(usize),
    #[error("gate {index} ({gate}) is not supported by the {backend} backend")]
    UnsupportedGate { index: usize, gate: &'static str, backend: BackendKind },
    #[error("gate {index}: angle {angle} is not n·φ0 (φ0 = {phi0}) for any 0 < |n| <= {n_max}")]
    IncommensuratePhase { index: usize, angle: f64, phi0: f64, n_max: u32 },
    #[error("gate {index}: {source}")]
    Lattice { index: usize, source: LatticeError },
    #[error(transparent)]
    LatticeProgram(#[from] LatticeError),
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Gate kind and parameters, serialized flat next to `targets`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Gate {
    H,
    P { phi: f64 },
    C { phi: f64 },
    Rx { theta: f64 },
    Ry { theta: f64 },
    Rz { theta: f64 },
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H => "H",
            Gate::P { .. } => "P",
            Gate::C { .. } => "C",
            Gate::Rx { .. } => "Rx",
            Gate::Ry { .. } => "Ry",
            Gate::Rz { .. } => "Rz",
        }
    }

    pub fn arity(&self) -> usize {
        if matches!(self, Gate::C { .. }) {
            2
        } else {
            1
        }
    }

    fn angle(&self) -> Option<f64> {
        match *self {
            Gate::H => None,
            Gate::P { phi } | Gate::C { phi } => Some(phi),
            Gate::Rx { theta } | Gate::Ry { theta } | Gate::Rz { theta } => Some(theta),
        }
    }

    pub fn matrix(&self) -> Unitary {
        make_gate(match *self {
            Gate::H => GateKind::Hadamard,
            Gate::P { phi } => GateKind::Phase(phi),
            Gate::C { phi } => GateKind::ControlledPhase(phi),
            Gate::Rx { theta } => GateKind::Rx(theta),
            Gate::Ry { theta } => GateKind::Ry(theta),
            Gate::Rz { theta } => GateKind::Rz(theta),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateInstr {
    #[serde(flatten)]
    pub gate: Gate,
    pub targets: Vec<usize>,
}

impl GateInstr {
    pub fn new(gate: Gate, targets: Vec<usize>) -> Self {
        Self { gate, targets }
    }

    pub fn single(gate: Gate, qubit: usize) -> Self {
        Self { gate, targets: vec![qubit] }
    }

    fn validate(&self, index: usize, n_qubits: usize) -> Result<(), CircuitError> {
        let expected = self.gate.arity();
        if self.targets.len() != expected {
            return Err(CircuitError::TargetCount { index, gate: self.gate.name(), expected, got: self.targets.len() });
        }
        if let Some(&qubit) = self.targets.iter().find(|&&q| q >= n_qubits) {
            return Err(CircuitError::TargetOutOfRange { index, qubit, n_qubits });
        }
        if expected == 2 && self.targets[0] == self.targets[1] {
            return Err(CircuitError::RepeatedTarget { index, qubit: self.targets[0] });
        }
        if self.gate.angle().is_some_and(|a| !a.is_finite()) {
            return Err(CircuitError::NonFiniteAngle { index });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitRepr")]
pub struct Circuit {
    qubits: usize,
    gates: Vec<GateInstr>,
}

#[derive(Deserialize)]
struct CircuitRepr {
    qubits: usize,
    #[serde(default)]
    gates: Vec<GateInstr>,
}

impl TryFrom<CircuitRepr> for Circuit {
    type Error = CircuitError;
    fn try_from(r: CircuitRepr) -> Result<Self, CircuitError> {
        Circuit::new(r.qubits, r.gates)
    }
}

impl Circuit {
    pub fn new(qubits: usize, gates: Vec<GateInstr>) -> Result<Self, CircuitError> {
        if qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        for (i, g) in gates.iter().enumerate() {
            g.validate(i, qubits)?;
        }
        Ok(Self { qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[GateInstr] {
        &self.gates
    }

    pub fn push(&mut self, instr: GateInstr) -> Result<(), CircuitError> {
        instr.validate(self.gates.len(), self.qubits)?;
        self.gates.push(instr);
        Ok(())
    }
}

fn apply_instr(state: &mut StateVector, instr: &GateInstr) {
    match instr.gate {
        Gate::C { phi } => {
            let mask = (1usize << instr.targets[0]) | (1usize << instr.targets[1]);
            let z = Complex64::cis(phi);
            let one = Complex64::new(1.0, 0.0);
            state.apply_diagonal(|i| if i & mask == mask { z } else { one });
        }
        g => state.apply_single(&g.matrix(), instr.targets[0]).expect("targets validated"),
    }
}

pub fn simulate(c: &Circuit, initial: &StateVector) -> Result<StateVector, CircuitError> {
    if initial.n_qubits() != c.qubits {
        return Err(CircuitError::DimensionMismatch { expected: c.qubits, got: initial.n_qubits() });
    }
    let mut s = initial.clone();
    for instr in &c.gates {
        apply_instr(&mut s, instr);
    }
    Ok(s)
}

pub fn circuit_unitary(c: &Circuit) -> Result<Unitary, CircuitError> {
    let n = c.qubits;
    if n > MAX_UNITARY_QUBITS {
        return Err(CircuitError::TooLarge(n));
    }
    let columns = (0..1usize << n)
        .map(|j| {
            let mut s = StateVector::basis(n, j);
            for instr in &c.gates {
                apply_instr(&mut s, instr);
            }
            s.into_amplitudes()
        })
        .collect();
    Ok(Unitary::from_trusted_columns(columns))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Lattice,
    Spin,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Lattice => "lattice",
            BackendKind::Spin => "spin",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    #[serde(rename = "TOPOLOGICAL(AB)")]
    TopologicalAb,
    #[serde(rename = "TOPOLOGICAL(AC)")]
    TopologicalAc,
    #[serde(rename = "DYNAMICAL")]
    Dynamical,
    #[serde(rename = "UNSUPPORTED")]
    Unsupported,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::TopologicalAb => "TOPOLOGICAL(AB)",
            Tag::TopologicalAc => "TOPOLOGICAL(AC)",
            Tag::Dynamical => "DYNAMICAL",
            Tag::Unsupported => "UNSUPPORTED",
        })
    }
}

/// The capability table in the module docs.
pub fn capability(backend: BackendKind, gate: &Gate) -> Tag {
    match (backend, gate) {
        (BackendKind::Lattice, Gate::P { .. } | Gate::C { .. }) => Tag::TopologicalAb,
        (BackendKind::Lattice, Gate::H | Gate::Rx { .. }) => Tag::Dynamical,
        (BackendKind::Lattice, Gate::Ry { .. } | Gate::Rz { .. }) => Tag::Unsupported,
        (BackendKind::Spin, Gate::C { .. }) => Tag::Unsupported,
        (BackendKind::Spin, _) => Tag::TopologicalAc,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub index: usize,
    pub gate: String,
    pub targets: Vec<usize>,
    pub tag: Tag,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CapabilityReport {
    pub entries: Vec<ReportEntry>,
}

impl CapabilityReport {
    pub fn tags(&self) -> Vec<Tag> {
        self.entries.iter().map(|e| e.tag).collect()
    }
}

impl fmt::Display for CapabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let targets: Vec<String> = e.targets.iter().map(|q| format!("q{q}")).collect();
            writeln!(f, "{:>3}  {:<3} {:<8} {}", e.index, e.gate, targets.join(","), e.tag)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    Lattice { register: LatticeRegister, n_max: u32 },
    Spin { kappa: f64, arch: Architecture, scales: SpinScales },
}

impl Backend {
    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Lattice { .. } => BackendKind::Lattice,
            Backend::Spin { .. } => BackendKind::Spin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinGate {
    pub qubit: usize,
    pub program: SpinProgram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum CompiledProgram {
    Lattice { register: LatticeRegister, program: LatticeProgram },
    Spin { qubits: usize, gates: Vec<SpinGate> },
}

impl CompiledProgram {
    pub fn n_qubits(&self) -> usize {
        match self {
            CompiledProgram::Lattice { register, .. } => register.n_qubits(),
            CompiledProgram::Spin { qubits, .. } => *qubits,
        }
    }
}

fn is_zero_phase(angle: f64) -> bool {
    wrap_angle(angle).abs() <= PHASE_MATCH_TOL
}

fn lattice_err(index: usize) -> impl Fn(LatticeError) -> CircuitError {
    move |source| CircuitError::Lattice { index, source }
}

pub fn compile(c: &Circuit, backend: &Backend) -> Result<(CompiledProgram, CapabilityReport), CircuitError> {
    let kind = backend.kind();
    let mut report = CapabilityReport::default();
    for (index, instr) in c.gates.iter().enumerate() {
        let tag = capability(kind, &instr.gate);
        if tag == Tag::Unsupported {
            return Err(CircuitError::UnsupportedGate { index, gate: instr.gate.name(), backend: kind });
        }
        report.entries.push(ReportEntry { index, gate: instr.gate.name().into(), targets: instr.targets.clone(), tag });
    }
    let program = match backend {
        Backend::Lattice { register, n_max } => compile_lattice(c, register, *n_max)?,
        Backend::Spin { kappa, arch, scales } => compile_spin(c, *kappa, *arch, *scales)?,
    };
    Ok((program, report))
}

fn compile_lattice(c: &Circuit, reg: &LatticeRegister, n_max: u32) -> Result<CompiledProgram, CircuitError> {
    if reg.n_qubits() != c.qubits {
        return Err(CircuitError::DimensionMismatch { expected: c.qubits, got: reg.n_qubits() });
    }
    let phi0 = reg.rule().base_phase();
    let multiple = |index: usize, angle: f64| {
        commensurate_multiple(phi0, angle, n_max).ok_or(CircuitError::IncommensuratePhase { index, angle, phi0, n_max })
    };
    let mut program = LatticeProgram::default();
    for (index, instr) in c.gates.iter().enumerate() {
        let q = instr.targets[0];
        match instr.gate {
            Gate::P { phi } if !is_zero_phase(phi) => {
                let n = multiple(index, phi)?;
                program.extend(compile_p(reg, q, n).map_err(lattice_err(index))?.into());
            }
            Gate::C { phi } if !is_zero_phase(phi) => {
                let n = multiple(index, phi)?;
                let (lo, hi) = (q.min(instr.targets[1]), q.max(instr.targets[1]));
                program.extend(compile_c(reg, lo, hi, n).map_err(lattice_err(index))?.into());
            }
            Gate::P { .. } | Gate::C { .. } => {}
            Gate::H => match compile_hadamard(reg, q, n_max) {
                Ok(p) => program.extend(p),
                Err(LatticeError::IncommensuratePhase { target, .. }) => {
                    return Err(CircuitError::IncommensuratePhase { index, angle: target, phi0, n_max });
                }
                Err(e) => return Err(lattice_err(index)(e)),
            },
            Gate::Rx { theta } => program.steps.push(Instruction::Hop(HoppingPulse { qubit: q, theta })),
            Gate::Ry { .. } | Gate::Rz { .. } => unreachable!("rejected by the capability table"),
        }
    }
    Ok(CompiledProgram::Lattice { register: reg.clone(), program })
}

fn compile_spin(
    c: &Circuit,
    kappa: f64,
    arch: Architecture,
    scales: SpinScales,
) -> Result<CompiledProgram, CircuitError> {
    let gates = c
        .gates
        .iter()
        .map(|instr| {
            let program = compile_su2_with_scales(&instr.gate.matrix(), arch, kappa, scales)?;
            Ok(SpinGate { qubit: instr.targets[0], program })
        })
        .collect::<Result<_, CircuitError>>()?;
    Ok(CompiledProgram::Spin { qubits: c.qubits, gates })
}

/// Dense unitary enacted by a compiled program.
pub fn program_matrix(program: &CompiledProgram) -> Result<Unitary, CircuitError> {
    let n = program.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(CircuitError::TooLarge(n));
    }
    match program {
        CompiledProgram::Lattice { register, program } => Ok(program_unitary(register, program)?),
        CompiledProgram::Spin { qubits, gates } => {
            let mut hols = Vec::with_capacity(gates.len());
            for g in gates {
                if g.qubit >= *qubits {
                    return Err(StateError::InvalidQubit { qubit: g.qubit, n_qubits: *qubits }.into());
                }
                hols.push((g.qubit, holonomy(&g.program)?));
            }
            let columns = (0..1usize << n)
                .map(|j| {
                    let mut s = StateVector::basis(n, j);
                    for (q, u) in &hols {
                        s.apply_single(u, *q).expect("qubit checked");
                    }
                    s.into_amplitudes()
                })
                .collect();
            Ok(Unitary::from_trusted_columns(columns))
        }
    }
}

/// Largest entrywise deviation between the program and the circuit after
/// removing the best global phase.
pub fn compilation_deviation(c: &Circuit, program: &CompiledProgram) -> Result<f64, CircuitError> {
    if program.n_qubits() != c.qubits {
        return Err(CircuitError::DimensionMismatch { expected: c.qubits, got: program.n_qubits() });
    }
    if c.qubits > MAX_VERIFY_QUBITS {
        return Err(CircuitError::TooLarge(c.qubits));
    }
    let target = circuit_unitary(c)?;
    let actual = program_matrix(program)?;
    Ok(phase_distance(&target, &actual).expect("same dimension"))
}

pub fn verify_compilation(c: &Circuit, program: &CompiledProgram, tol: f64) -> Result<bool, CircuitError> {
    Ok(compilation_deviation(c, program)? <= tol)
}
