//! Abelian topological lattice register.
//!
//! Each qubit is one particle shared between two sites, `a` (logical 0) and
//! `b` (logical 1), plus a fixed ancilla of the opposite particle type.
//! Even qubits hold `X` particles, odd qubits `Y` particles. Carrying a
//! particle once counterclockwise around an obstacle multiplies the
//! amplitude by `exp(i·φ0·sign(mover, obstacle))`; the only geometric input
//! is therefore the winding vector of the path over the register sites.
//!
//! Phases are integer multiples of the register constant `φ0`. The only
//! non-topological primitive is the hopping pulse, an `Rx(θ)` between the two
//! rails of one qubit.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::{rx, GateError, Unitary};
use crate::geometry::{
    path_clearance, winding_vector, wrap_angle, ClosedPath2, GeometryError, Point2, Vec2, WindingNumber,
};
use crate::state::{StateError, StateVector};

/// Two angles are the same phase when they agree mod 2π to this tolerance.
pub const PHASE_MATCH_TOL: f64 = 1e-9;

/// Largest register [`program_unitary`] will expand.
pub const MAX_UNITARY_QUBITS: usize = 12;

pub const DEFAULT_SPACING: f64 = 4.0;
pub const DEFAULT_RAIL_OFFSET: f64 = 1.0;
pub const DEFAULT_ANCILLA_OFFSET: f64 = -2.0;
pub const DEFAULT_CLEARANCE: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    InvalidQubit { qubit: usize, n_qubits: usize },
    #[error("path passes within clearance {clearance} of {site}")]
    ClearanceViolation { site: SiteRef, clearance: f64 },
    #[error("move path must start at {site}")]
    PathNotAnchored { site: SiteRef },
    #[error("no clear loop from {from} around {around}")]
    LayoutInfeasible { from: SiteRef, around: SiteRef },
    #[error("controlled phase needs two distinct qubits, got {0} twice")]
    SameQubit(usize),
    #[error("gate multiple must be non-zero")]
    ZeroMultiple,
    #[error("phase {target} is not n·φ0 (φ0 = {phi0}) for any 0 < |n| <= {n_max}")]
    IncommensuratePhase { target: f64, phi0: f64, n_max: u32 },
    #[error("{mover:?} particles acquire no phase around {obstacle:?} particles")]
    Uncoupled { mover: ParticleType, obstacle: ParticleType },
    #[error("invalid phase rule: {0}")]
    InvalidRule(String),
    #[error("invalid register layout: {0}")]
    InvalidLayout(String),
    #[error("register has {register} qubits but state has {state}")]
    DimensionMismatch { register: usize, state: usize },
    #[error("register of {0} qubits is too large to expand into a unitary")]
    TooLarge(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Gate(#[from] GateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParticleType {
    X,
    Y,
}

impl ParticleType {
    /// Type of the particle on qubit `index`: X for even, Y for odd.
    pub fn for_qubit(index: usize) -> Self {
        if index % 2 == 0 {
            Self::X
        } else {
            Self::Y
        }
    }

    pub fn other(self) -> Self {
        match self {
            Self::X => Self::Y,
            Self::Y => Self::X,
        }
    }
}

/// Sign of the phase a mover picks up around an obstacle, per type pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSigns {
    #[serde(rename = "XX")]
    pub xx: i8,
    #[serde(rename = "XY")]
    pub xy: i8,
    #[serde(rename = "YX")]
    pub yx: i8,
    #[serde(rename = "YY")]
    pub yy: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhaseRuleRepr")]
pub struct PhaseRule {
    #[serde(rename = "phi0")]
    base_phase: f64,
    signs: PairSigns,
}

#[derive(Deserialize)]
struct PhaseRuleRepr {
    phi0: f64,
    signs: PairSigns,
}

impl TryFrom<PhaseRuleRepr> for PhaseRule {
    type Error = LatticeError;
    fn try_from(r: PhaseRuleRepr) -> Result<Self, LatticeError> {
        PhaseRule::new(r.phi0, r.signs)
    }
}

impl PhaseRule {
    /// Accepts the charge/dipole pattern (opposite types antisymmetric, like
    /// types in {0, +1}) or the all-+1 identical-anyon pattern.
    pub fn new(base_phase: f64, signs: PairSigns) -> Result<Self, LatticeError> {
        if !base_phase.is_finite() {
            return Err(LatticeError::InvalidRule("phi0 must be finite".into()));
        }
        let PairSigns { xx, xy, yx, yy } = signs;
        if ![xx, yy].iter().all(|s| matches!(s, 0 | 1)) {
            return Err(LatticeError::InvalidRule("like-type signs must be 0 or +1".into()));
        }
        if ![xy, yx].iter().all(|s| matches!(s, -1..=1)) {
            return Err(LatticeError::InvalidRule("signs must be -1, 0 or +1".into()));
        }
        let anyonic = xx == 1 && xy == 1 && yx == 1 && yy == 1;
        let antisymmetric = xy == -yx;
        if !(anyonic || antisymmetric) {
            return Err(LatticeError::InvalidRule("opposite-type signs must satisfy sign(X,Y) = -sign(Y,X)".into()));
        }
        Ok(Self { base_phase, signs })
    }

    /// Charge around a magnetic dipole (and back): `X` around `Y` gains
    /// `+φ0`, `Y` around `X` gains `-φ0`, like types gain nothing.
    pub fn charge_dipole(base_phase: f64) -> Self {
        Self::new(base_phase, PairSigns { xx: 0, xy: 1, yx: -1, yy: 0 }).expect("valid preset")
    }

    /// Identical Abelian anyons: every encirclement gains `+φ0`.
    pub fn anyon(base_phase: f64) -> Self {
        Self::new(base_phase, PairSigns { xx: 1, xy: 1, yx: 1, yy: 1 }).expect("valid preset")
    }

    pub fn base_phase(&self) -> f64 {
        self.base_phase
    }

    pub fn signs(&self) -> PairSigns {
        self.signs
    }

    pub fn sign(&self, mover: ParticleType, obstacle: ParticleType) -> i8 {
        use ParticleType::*;
        match (mover, obstacle) {
            (X, X) => self.signs.xx,
            (X, Y) => self.signs.xy,
            (Y, X) => self.signs.yx,
            (Y, Y) => self.signs.yy,
        }
    }

    /// Exchange phase of two identical anyons: half of the full-encirclement
    /// phase, `|21⟩ = e^{iφ0/2}|12⟩`.
    pub fn exchange_phase(&self) -> Option<f64> {
        (self.signs.xx == 1 && self.signs.yy == 1).then_some(self.base_phase / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rail {
    A,
    B,
}

impl Rail {
    /// Basis bit value meaning "the particle sits on this rail".
    pub fn bit(self) -> usize {
        match self {
            Self::A => 0,
            Self::B => 1,
        }
    }
}

/// A named site of the register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteRef {
    Rail { qubit: usize, rail: Rail },
    Ancilla { qubit: usize },
}

impl fmt::Display for SiteRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteRef::Rail { qubit, rail: Rail::A } => write!(f, "site a of qubit {qubit}"),
            SiteRef::Rail { qubit, rail: Rail::B } => write!(f, "site b of qubit {qubit}"),
            SiteRef::Ancilla { qubit } => write!(f, "ancilla of qubit {qubit}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitSites {
    pub kind: ParticleType,
    pub a: Point2,
    pub b: Point2,
    pub ancilla: Point2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegisterRepr")]
pub struct LatticeRegister {
    qubits: Vec<QubitSites>,
    rule: PhaseRule,
    clearance: f64,
}

#[derive(Deserialize)]
struct RegisterRepr {
    qubits: Vec<QubitSites>,
    rule: PhaseRule,
    clearance: f64,
}

impl TryFrom<RegisterRepr> for LatticeRegister {
    type Error = LatticeError;
    fn try_from(r: RegisterRepr) -> Result<Self, LatticeError> {
        LatticeRegister::new(r.qubits, r.rule, r.clearance)
    }
}

impl LatticeRegister {
    pub fn new(qubits: Vec<QubitSites>, rule: PhaseRule, clearance: f64) -> Result<Self, LatticeError> {
        if qubits.is_empty() {
            return Err(LatticeError::InvalidLayout("register needs at least one qubit".into()));
        }
        if !(clearance > 0.0 && clearance.is_finite()) {
            return Err(LatticeError::InvalidLayout("clearance must be positive".into()));
        }
        for (i, q) in qubits.iter().enumerate() {
            if q.kind != ParticleType::for_qubit(i) {
                return Err(LatticeError::InvalidLayout(format!(
                    "qubit {i} must hold a {:?} particle",
                    ParticleType::for_qubit(i)
                )));
            }
        }
        let reg = Self { qubits, rule, clearance };
        let sites = reg.sites();
        if let Some((s, _)) = sites.iter().find(|(_, p)| !p.is_finite()) {
            return Err(LatticeError::InvalidLayout(format!("{s} has a non-finite position")));
        }
        for i in 0..sites.len() {
            for j in i + 1..sites.len() {
                if (sites[i].1 - sites[j].1).norm() <= 2.0 * clearance {
                    return Err(LatticeError::InvalidLayout(format!(
                        "{} and {} are closer than twice the clearance",
                        sites[i].0, sites[j].0
                    )));
                }
            }
        }
        Ok(reg)
    }

    /// Qubits on a row: qubit `i` at `x = 4i`, rail a at `y = -1`, rail b at
    /// `y = +1`, ancilla at `y = -2`.
    pub fn default_layout(n_qubits: usize, rule: PhaseRule) -> Result<Self, LatticeError> {
        let qubits = (0..n_qubits)
            .map(|i| {
                let x = DEFAULT_SPACING * i as f64;
                QubitSites {
                    kind: ParticleType::for_qubit(i),
                    a: Vec2::new(x, -DEFAULT_RAIL_OFFSET),
                    b: Vec2::new(x, DEFAULT_RAIL_OFFSET),
                    ancilla: Vec2::new(x, DEFAULT_ANCILLA_OFFSET),
                }
            })
            .collect();
        Self::new(qubits, rule, DEFAULT_CLEARANCE)
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[QubitSites] {
        &self.qubits
    }

    pub fn rule(&self) -> &PhaseRule {
        &self.rule
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    pub fn with_rule(&self, rule: PhaseRule) -> Self {
        Self { rule, ..self.clone() }
    }

    fn check_qubit(&self, qubit: usize) -> Result<&QubitSites, LatticeError> {
        self.qubits.get(qubit).ok_or(LatticeError::InvalidQubit { qubit, n_qubits: self.qubits.len() })
    }

    pub fn position(&self, site: SiteRef) -> Point2 {
        match site {
            SiteRef::Rail { qubit, rail: Rail::A } => self.qubits[qubit].a,
            SiteRef::Rail { qubit, rail: Rail::B } => self.qubits[qubit].b,
            SiteRef::Ancilla { qubit } => self.qubits[qubit].ancilla,
        }
    }

    pub fn kind_at(&self, site: SiteRef) -> ParticleType {
        match site {
            SiteRef::Rail { qubit, .. } => self.qubits[qubit].kind,
            SiteRef::Ancilla { qubit } => self.qubits[qubit].kind.other(),
        }
    }

    /// Every site: rails a and b of each qubit, then its ancilla.
    pub fn sites(&self) -> Vec<(SiteRef, Point2)> {
        let mut out = Vec::with_capacity(3 * self.qubits.len());
        for (qubit, q) in self.qubits.iter().enumerate() {
            out.push((SiteRef::Rail { qubit, rail: Rail::A }, q.a));
            out.push((SiteRef::Rail { qubit, rail: Rail::B }, q.b));
            out.push((SiteRef::Ancilla { qubit }, q.ancilla));
        }
        out
    }
}

/// Carry whatever sits on `site` of `qubit` around `path` and back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveInstruction {
    pub qubit: usize,
    pub site: Rail,
    pub path: ClosedPath2,
}

impl MoveInstruction {
    pub fn mover(&self) -> SiteRef {
        SiteRef::Rail { qubit: self.qubit, rail: self.site }
    }
}

/// Tunnelling between the two rails, integrated to the rotation angle
/// `θ = -∫τ(t)dt/ħ`; enacts `Rx(θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoppingPulse {
    pub qubit: usize,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Instruction {
    Move(MoveInstruction),
    Hop(HoppingPulse),
}

impl Instruction {
    /// Hopping is Hamiltonian evolution, not a topological phase.
    pub fn is_dynamical(&self) -> bool {
        matches!(self, Instruction::Hop(_))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeProgram {
    pub steps: Vec<Instruction>,
}

impl LatticeProgram {
    pub fn new(steps: Vec<Instruction>) -> Self {
        Self { steps }
    }

    pub fn is_partly_dynamical(&self) -> bool {
        self.steps.iter().any(Instruction::is_dynamical)
    }

    pub fn extend(&mut self, other: LatticeProgram) {
        self.steps.extend(other.steps);
    }
}

impl From<MoveInstruction> for LatticeProgram {
    fn from(m: MoveInstruction) -> Self {
        Self { steps: vec![Instruction::Move(m)] }
    }
}

/// Checks the move against the register and returns its winding number
/// around every other site, in [`LatticeRegister::sites`] order (the
/// mover's own entry is zero).
pub fn move_windings(
    reg: &LatticeRegister,
    mv: &MoveInstruction,
) -> Result<Vec<(SiteRef, WindingNumber)>, LatticeError> {
    reg.check_qubit(mv.qubit)?;
    let mover = mv.mover();
    let start = reg.position(mover);
    if (mv.path.vertices()[0] - start).norm() > crate::geometry::DEFAULT_CLEARANCE {
        return Err(LatticeError::PathNotAnchored { site: mover });
    }
    let others: Vec<(SiteRef, Point2)> = reg.sites().into_iter().filter(|(s, _)| *s != mover).collect();
    for &(site, p) in &others {
        if !path_clearance(&mv.path, &[p], reg.clearance) {
            return Err(LatticeError::ClearanceViolation { site, clearance: reg.clearance });
        }
    }
    let points: Vec<Point2> = others.iter().map(|(_, p)| *p).collect();
    let windings = winding_vector(&mv.path, &points)?;
    Ok(reg
        .sites()
        .into_iter()
        .map(|(s, _)| {
            let w = others.iter().position(|(o, _)| *o == s).map_or(WindingNumber(0), |k| windings[k]);
            (s, w)
        })
        .collect())
}

/// Diagonal of the move operator over the `2^n` basis states.
pub fn move_diagonal(reg: &LatticeRegister, mv: &MoveInstruction) -> Result<Vec<Complex64>, LatticeError> {
    let windings = move_windings(reg, mv)?;
    let n = reg.n_qubits();
    let mover_kind = reg.qubits[mv.qubit].kind;
    let rule = &reg.rule;

    // Ancillae are always occupied; rails of other qubits only in the
    // branches that put the particle there.
    let mut fixed: i64 = 0;
    let mut per_qubit = vec![[0i64; 2]; n];
    for (site, w) in windings {
        let s = rule.sign(mover_kind, reg.kind_at(site)) as i64 * w.value();
        match site {
            SiteRef::Ancilla { .. } => fixed += s,
            SiteRef::Rail { qubit, rail } if qubit != mv.qubit => per_qubit[qubit][rail.bit()] += s,
            SiteRef::Rail { .. } => {}
        }
    }

    let moved_bit = 1usize << mv.qubit;
    let wanted = mv.site.bit() * moved_bit;
    Ok((0..1usize << n)
        .map(|i| {
            if i & moved_bit != wanted {
                return Complex64::new(1.0, 0.0);
            }
            let total: i64 = fixed + (0..n).filter(|&k| k != mv.qubit).map(|k| per_qubit[k][(i >> k) & 1]).sum::<i64>();
            Complex64::cis(rule.base_phase * total as f64)
        })
        .collect())
}

fn check_state(reg: &LatticeRegister, state: &StateVector) -> Result<(), LatticeError> {
    if state.n_qubits() != reg.n_qubits() {
        return Err(LatticeError::DimensionMismatch { register: reg.n_qubits(), state: state.n_qubits() });
    }
    Ok(())
}

pub fn apply_move(
    state: &StateVector,
    reg: &LatticeRegister,
    mv: &MoveInstruction,
) -> Result<StateVector, LatticeError> {
    check_state(reg, state)?;
    let diag = move_diagonal(reg, mv)?;
    let mut out = state.clone();
    out.apply_diagonal(|i| diag[i]);
    Ok(out)
}

pub fn apply_hopping(state: &StateVector, pulse: &HoppingPulse) -> Result<StateVector, LatticeError> {
    let mut out = state.clone();
    out.apply_single(&rx(pulse.theta), pulse.qubit)?;
    Ok(out)
}

pub fn apply_program(
    state: &StateVector,
    reg: &LatticeRegister,
    program: &LatticeProgram,
) -> Result<StateVector, LatticeError> {
    check_state(reg, state)?;
    let mut out = state.clone();
    for step in &program.steps {
        match step {
            Instruction::Move(mv) => {
                let diag = move_diagonal(reg, mv)?;
                out.apply_diagonal(|i| diag[i]);
            }
            Instruction::Hop(p) => {
                reg.check_qubit(p.qubit)?;
                out.apply_single(&rx(p.theta), p.qubit)?;
            }
        }
    }
    Ok(out)
}

/// Full `2^n × 2^n` unitary of a program, column by column.
pub fn program_unitary(reg: &LatticeRegister, program: &LatticeProgram) -> Result<Unitary, LatticeError> {
    let n = reg.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(LatticeError::TooLarge(n));
    }
    // Diagonals once, then every basis column.
    let mut ops = Vec::with_capacity(program.steps.len());
    for step in &program.steps {
        ops.push(match step {
            Instruction::Move(mv) => Ok(move_diagonal(reg, mv)?),
            Instruction::Hop(p) => {
                reg.check_qubit(p.qubit)?;
                Err(*p)
            }
        });
    }
    let columns = (0..1usize << n)
        .map(|j| {
            let mut s = StateVector::basis(n, j);
            for op in &ops {
                match op {
                    Ok(diag) => s.apply_diagonal(|i| diag[i]),
                    Err(p) => s.apply_single(&rx(p.theta), p.qubit).expect("qubit checked"),
                }
            }
            s.into_amplitudes()
        })
        .collect();
    Ok(Unitary::from_trusted_columns(columns))
}

/// Smallest-first search for `n` with `n·φ0 ≡ target (mod 2π)`: `1..=n_max`
/// first, then `-1..=-n_max`.
pub fn commensurate_multiple(phi0: f64, target: f64, n_max: u32) -> Option<i64> {
    let n_max = n_max as i64;
    (1..=n_max).chain((1..=n_max).map(|n| -n)).find(|&n| wrap_angle(n as f64 * phi0 - target).abs() <= PHASE_MATCH_TOL)
}

/// Loop that leaves `start`, circles `target` `turns` times (CCW when
/// positive) and comes back the same way. Candidates are square loops with
/// straight, L-shaped or lane-offset stems; the first one that keeps clear
/// of every site and winds around nothing but `target` wins.
fn encircling_path(
    reg: &LatticeRegister,
    from: SiteRef,
    around: SiteRef,
    turns: i64,
) -> Result<ClosedPath2, LatticeError> {
    let start = reg.position(from);
    let tgt = reg.position(around);
    let others: Vec<(SiteRef, Point2)> = reg.sites().into_iter().filter(|(s, _)| *s != from).collect();
    let reach = others
        .iter()
        .filter(|(s, _)| *s != around)
        .map(|(_, p)| (*p - tgt).norm())
        .chain(std::iter::once((start - tgt).norm()))
        .fold(f64::INFINITY, f64::min);

    let mut sides = [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(-1.0, 0.0), Vec2::new(0.0, -1.0)];
    let toward = start - tgt;
    sides.sort_by(|u, v| toward.dot(*v).total_cmp(&toward.dot(*u)));

    let lane_unit = reach / 2.0;
    let mut stems: Vec<Box<dyn Fn(Point2) -> Vec<Point2>>> = vec![
        Box::new(|_| vec![]),
        Box::new(move |e: Point2| vec![Vec2::new(start.x, e.y)]),
        Box::new(move |e: Point2| vec![Vec2::new(e.x, start.y)]),
    ];
    for k in 1..=8 {
        for sign in [1.0, -1.0] {
            let off = sign * k as f64 * lane_unit;
            stems.push(Box::new(move |e: Point2| {
                vec![Vec2::new(start.x, start.y + off), Vec2::new(e.x, start.y + off)]
            }));
            stems.push(Box::new(move |e: Point2| {
                vec![Vec2::new(start.x + off, start.y), Vec2::new(start.x + off, e.y)]
            }));
        }
    }

    let punctures: Vec<Point2> = others.iter().map(|(_, p)| *p).collect();
    let positions: Vec<Point2> = punctures.clone();
    for frac in [0.5, 0.4, 0.6, 0.3, 0.7, 0.2] {
        let half = frac * reach;
        if half <= reg.clearance {
            continue;
        }
        for side in sides {
            let entry = tgt + side * half;
            // CCW corners starting after the entry point on `side`.
            let perp = Vec2::new(-side.y, side.x);
            let mut corners = vec![
                tgt + (side + perp) * half,
                tgt + (-side + perp) * half,
                tgt + (-side - perp) * half,
                tgt + (side - perp) * half,
            ];
            if turns < 0 {
                corners.reverse();
            }
            for stem in &stems {
                let waypoints = stem(entry);
                let mut verts = vec![start];
                verts.extend(waypoints.iter().copied());
                verts.push(entry);
                for _ in 0..turns.unsigned_abs() {
                    verts.extend(corners.iter().copied());
                    verts.push(entry);
                }
                verts.extend(waypoints.iter().rev().copied());
                verts.dedup();
                let Ok(path) = ClosedPath2::new(verts) else { continue };
                if !path_clearance(&path, &positions, reg.clearance) {
                    continue;
                }
                let Ok(w) = winding_vector(&path, &punctures) else { continue };
                let ok = others.iter().zip(&w).all(|((s, _), w)| w.value() == if *s == around { turns } else { 0 });
                if ok {
                    return Ok(path);
                }
            }
        }
    }
    Err(LatticeError::LayoutInfeasible { from, around })
}

/// Phase gate `P(n·φ0)` (up to global phase): the particle on rail a is
/// carried around the qubit's own ancilla.
pub fn compile_p(reg: &LatticeRegister, qubit: usize, n: i64) -> Result<MoveInstruction, LatticeError> {
    let q = reg.check_qubit(qubit)?;
    if n == 0 {
        return Err(LatticeError::ZeroMultiple);
    }
    let obstacle = q.kind.other();
    let sign = reg.rule.sign(q.kind, obstacle) as i64;
    if sign == 0 {
        return Err(LatticeError::Uncoupled { mover: q.kind, obstacle });
    }
    // Rail a gains e^{iφ0·sign·w}; as diag(e^{iψ}, 1) = e^{iψ}P(-ψ) that is
    // P(n·φ0) when w = -n·sign.
    let turns = -n * sign;
    let from = SiteRef::Rail { qubit, rail: Rail::A };
    let path = encircling_path(reg, from, SiteRef::Ancilla { qubit }, turns)?;
    Ok(MoveInstruction { qubit, site: Rail::A, path })
}

/// Controlled phase `C(n·φ0)`, exact: the particle on rail b of `qubit_i`
/// is carried around rail b of `qubit_j`, so only `|1⟩|1⟩` picks up phase.
pub fn compile_c(
    reg: &LatticeRegister,
    qubit_i: usize,
    qubit_j: usize,
    n: i64,
) -> Result<MoveInstruction, LatticeError> {
    let qi = reg.check_qubit(qubit_i)?;
    let qj = reg.check_qubit(qubit_j)?;
    if qubit_i == qubit_j {
        return Err(LatticeError::SameQubit(qubit_i));
    }
    if n == 0 {
        return Err(LatticeError::ZeroMultiple);
    }
    let sign = reg.rule.sign(qi.kind, qj.kind) as i64;
    if sign == 0 {
        return Err(LatticeError::Uncoupled { mover: qi.kind, obstacle: qj.kind });
    }
    let turns = n * sign;
    let from = SiteRef::Rail { qubit: qubit_i, rail: Rail::B };
    let around = SiteRef::Rail { qubit: qubit_j, rail: Rail::B };
    let path = encircling_path(reg, from, around, turns)?;
    Ok(MoveInstruction { qubit: qubit_i, site: Rail::B, path })
}

/// Hadamard as `P(-π/2)·Rx(π/4)·P(-π/2)`, with each phase gate realised as
/// `P(n·φ0)` for the first `n` found by [`commensurate_multiple`]. The
/// result contains a hopping pulse and is therefore partly dynamical.
pub fn compile_hadamard(reg: &LatticeRegister, qubit: usize, n_max: u32) -> Result<LatticeProgram, LatticeError> {
    reg.check_qubit(qubit)?;
    let phi0 = reg.rule.base_phase;
    let n = commensurate_multiple(phi0, -FRAC_PI_2, n_max).ok_or(LatticeError::IncommensuratePhase {
        target: -FRAC_PI_2,
        phi0,
        n_max,
    })?;
    let p = compile_p(reg, qubit, n)?;
    Ok(LatticeProgram::new(vec![
        Instruction::Move(p.clone()),
        Instruction::Hop(HoppingPulse { qubit, theta: FRAC_PI_4 }),
        Instruction::Move(p),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{controlled_phase, equal_up_to_phase, hadamard, phase};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reg(n: usize, phi0: f64) -> LatticeRegister {
        LatticeRegister::default_layout(n, PhaseRule::charge_dipole(phi0)).unwrap()
    }

    /// Diagonal of a diagonal unitary.
    fn diag_of(u: &Unitary) -> Vec<Complex64> {
        (0..u.dim()).map(|i| u[(i, i)]).collect()
    }

    fn loop_around(start: Point2, center: Point2, half: f64) -> ClosedPath2 {
        // keyhole: start -> left side of the square -> CCW -> back
        let e = center + Vec2::new(-half, 0.0);
        ClosedPath2::new(vec![
            start,
            e,
            center + Vec2::new(-half, -half),
            center + Vec2::new(half, -half),
            center + Vec2::new(half, half),
            center + Vec2::new(-half, half),
            e,
        ])
        .unwrap()
    }

    #[test]
    fn rule_validation() {
        assert!(PhaseRule::new(1.0, PairSigns { xx: 0, xy: 1, yx: 1, yy: 0 }).is_err());
        assert!(PhaseRule::new(1.0, PairSigns { xx: -1, xy: 1, yx: -1, yy: 0 }).is_err());
        assert!(PhaseRule::new(f64::NAN, PairSigns { xx: 0, xy: 1, yx: -1, yy: 0 }).is_err());
        assert!(PhaseRule::new(1.0, PairSigns { xx: 1, xy: 0, yx: 0, yy: 1 }).is_ok());
        assert_eq!(PhaseRule::anyon(1.0).exchange_phase(), Some(0.5));
        assert_eq!(PhaseRule::charge_dipole(1.0).exchange_phase(), None);
    }

    #[test]
    fn layout_validation() {
        let r = reg(3, 1.0);
        assert_eq!(r.sites().len(), 9);
        let mut q = r.qubits().to_vec();
        q[1].kind = ParticleType::X;
        assert!(matches!(LatticeRegister::new(q, *r.rule(), 0.25), Err(LatticeError::InvalidLayout(_))));
        let mut q = r.qubits().to_vec();
        q[0].b = q[1].a + Vec2::new(0.3, 0.0);
        assert!(LatticeRegister::new(q, *r.rule(), 0.25).is_err());
        assert!(LatticeRegister::new(vec![], *r.rule(), 0.25).is_err());
    }

    #[test]
    fn move_around_partner_b_site_is_controlled_phase() {
        let phi = 0.77;
        let r = reg(2, phi);
        // q0's b-particle once CCW around q1's b-site only
        let path = loop_around(r.qubits()[0].b, r.qubits()[1].b, 0.8);
        let mv = MoveInstruction { qubit: 0, site: Rail::B, path };
        let u = program_unitary(&r, &mv.into()).unwrap();
        assert!(u.max_abs_diff(&controlled_phase(phi)).unwrap() < 1e-15);
    }

    #[test]
    fn move_around_own_ancilla() {
        let phi = 0.77;
        let r = reg(2, phi);
        // X mover around Y ancilla, once CCW: diag(e^{iφ}, 1) on q0
        let q0 = r.qubits()[0];
        let mv = MoveInstruction { qubit: 0, site: Rail::A, path: loop_around(q0.a, q0.ancilla, 0.5) };
        let d = diag_of(&program_unitary(&r, &mv.into()).unwrap());
        let e = Complex64::cis(phi);
        let want = [e, c(1.0, 0.0), e, c(1.0, 0.0)];
        for (g, w) in d.iter().zip(want) {
            assert!((g - w).norm() < 1e-15);
        }
        // Y mover around X ancilla: sign flips
        let q1 = r.qubits()[1];
        let mv = MoveInstruction { qubit: 1, site: Rail::A, path: loop_around(q1.a, q1.ancilla, 0.5) };
        let d = diag_of(&program_unitary(&r, &mv.into()).unwrap());
        let e = Complex64::cis(-phi);
        let want = [e, e, c(1.0, 0.0), c(1.0, 0.0)];
        for (g, w) in d.iter().zip(want) {
            assert!((g - w).norm() < 1e-15);
        }
    }

    #[test]
    fn move_errors() {
        let r = reg(2, 1.0);
        let q0 = r.qubits()[0];
        // loop brushing q0's own b-site
        let bad = loop_around(q0.a, q0.b, 0.1);
        let mv = MoveInstruction { qubit: 0, site: Rail::A, path: bad };
        assert!(matches!(apply_move(&StateVector::basis(2, 0), &r, &mv), Err(LatticeError::ClearanceViolation { .. })));
        let mv = MoveInstruction { qubit: 5, site: Rail::A, path: loop_around(q0.a, q0.ancilla, 0.5) };
        assert!(matches!(
            apply_move(&StateVector::basis(2, 0), &r, &mv),
            Err(LatticeError::InvalidQubit { qubit: 5, .. })
        ));
        let mv = MoveInstruction { qubit: 1, site: Rail::A, path: loop_around(q0.a, q0.ancilla, 0.5) };
        assert!(matches!(apply_move(&StateVector::basis(2, 0), &r, &mv), Err(LatticeError::PathNotAnchored { .. })));
        let mv = MoveInstruction { qubit: 0, site: Rail::A, path: loop_around(q0.a, q0.ancilla, 0.5) };
        assert!(matches!(apply_move(&StateVector::basis(3, 0), &r, &mv), Err(LatticeError::DimensionMismatch { .. })));
    }

    #[test]
    fn hopping() {
        let s0 = StateVector::basis(1, 0);
        assert_eq!(apply_hopping(&s0, &HoppingPulse { qubit: 0, theta: 0.0 }).unwrap(), s0);
        let s = apply_hopping(&s0, &HoppingPulse { qubit: 0, theta: FRAC_PI_4 }).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - c(h, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(0.0, h)).norm() < 1e-15);
        let s = apply_hopping(&s0, &HoppingPulse { qubit: 0, theta: FRAC_PI_2 }).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(0.0, 1.0)).norm() < 1e-15);
        assert!(matches!(
            apply_hopping(&s0, &HoppingPulse { qubit: 1, theta: 0.1 }),
            Err(LatticeError::State(StateError::InvalidQubit { .. }))
        ));
    }

    #[test]
    fn compiled_phase_gates() {
        for phi0 in [FRAC_PI_2, PI / 3.0, 1.0] {
            let r = reg(3, phi0);
            for q in 0..3 {
                for n in [-3i64, -2, -1, 1, 2, 3] {
                    let mv = compile_p(&r, q, n).unwrap();
                    let u = program_unitary(&r, &mv.into()).unwrap();
                    let mut want = Unitary::identity(1);
                    for k in (0..3).rev() {
                        let g = if k == q { phase(n as f64 * phi0) } else { Unitary::identity(2) };
                        want = want.kron(&g);
                    }
                    assert!(equal_up_to_phase(&u, &want, 1e-10).unwrap(), "phi0={phi0} q={q} n={n}");
                }
            }
        }
        assert_eq!(compile_p(&reg(1, 1.0), 0, 0).unwrap_err(), LatticeError::ZeroMultiple);
    }

    #[test]
    fn compiled_controlled_phase_is_exact() {
        let phi0 = 0.9;
        let r = reg(2, phi0);
        let u = program_unitary(&r, &compile_c(&r, 0, 1, 1).unwrap().into()).unwrap();
        assert!(u.max_abs_diff(&controlled_phase(phi0)).unwrap() < 1e-15);
        let u = program_unitary(&r, &compile_c(&r, 0, 1, -1).unwrap().into()).unwrap();
        assert!(u.max_abs_diff(&controlled_phase(-phi0)).unwrap() < 1e-15);
        // C is symmetric: moving q1 around q0 gives the same operator
        let u = program_unitary(&r, &compile_c(&r, 1, 0, 2).unwrap().into()).unwrap();
        assert!(u.max_abs_diff(&controlled_phase(2.0 * phi0)).unwrap() < 1e-14);
        assert_eq!(compile_c(&r, 1, 1, 1).unwrap_err(), LatticeError::SameQubit(1));

        let r = reg(2, PI);
        let u = program_unitary(&r, &compile_c(&r, 0, 1, 1).unwrap().into()).unwrap();
        let want = Unitary::diagonal(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert!(u.max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn like_types_do_not_couple_without_anyons() {
        let r = reg(3, 1.0);
        assert!(matches!(compile_c(&r, 0, 2, 1), Err(LatticeError::Uncoupled { .. })));
        // the route past qubit 1 has to detour; anyons couple every pair
        let r = r.with_rule(PhaseRule::anyon(1.0));
        let mv = compile_c(&r, 0, 2, 1).unwrap();
        let u = program_unitary(&r, &mv.into()).unwrap();
        let mut want = vec![c(1.0, 0.0); 8];
        want[0b101] = Complex64::cis(1.0);
        want[0b111] = Complex64::cis(1.0);
        assert!(u.max_abs_diff(&Unitary::diagonal(&want).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn hadamard_programs() {
        let r = reg(1, -FRAC_PI_2);
        let prog = compile_hadamard(&r, 0, 1).unwrap();
        assert_eq!(prog.steps.len(), 3);
        assert!(prog.is_partly_dynamical());
        let u = program_unitary(&r, &prog).unwrap();
        assert!(equal_up_to_phase(&u, &hadamard(), 1e-10).unwrap());

        assert_eq!(commensurate_multiple(FRAC_PI_4, -FRAC_PI_2, 8), Some(6));
        let r = reg(1, FRAC_PI_4);
        let u = program_unitary(&r, &compile_hadamard(&r, 0, 8).unwrap()).unwrap();
        assert!(equal_up_to_phase(&u, &hadamard(), 1e-10).unwrap());

        let r = reg(1, 1.0);
        assert!(matches!(compile_hadamard(&r, 0, 10), Err(LatticeError::IncommensuratePhase { .. })));
    }

    #[test]
    fn program_unitary_of_empty_program() {
        let r = reg(2, 1.0);
        assert_eq!(program_unitary(&r, &LatticeProgram::default()).unwrap(), Unitary::identity(4));
    }

    #[test]
    fn program_json() {
        let r = reg(2, 1.0);
        let mut prog = LatticeProgram::from(compile_c(&r, 0, 1, 1).unwrap());
        prog.steps.push(Instruction::Hop(HoppingPulse { qubit: 1, theta: 0.5 }));
        let s = serde_json::to_string(&prog).unwrap();
        assert!(s.starts_with(r#"[{"move":{"qubit":0,"site":"b","path":[[0.0,1.0],"#), "{s}");
        assert!(s.ends_with(r#"{"hop":{"qubit":1,"theta":0.5}}]"#), "{s}");
        let back: LatticeProgram = serde_json::from_str(&s).unwrap();
        assert_eq!(back, prog);

        let rs = serde_json::to_string(&r).unwrap();
        let back: LatticeRegister = serde_json::from_str(&rs).unwrap();
        assert_eq!(back, r);
        let bad = rs.replace(r#""YX":-1"#, r#""YX":1"#);
        assert!(serde_json::from_str::<LatticeRegister>(&bad).is_err());
    }

    #[test]
    fn start_vertex_must_sit_on_the_site() {
        let r = reg(1, 1.0);
        let q0 = r.qubits()[0];
        let p = loop_around(q0.a + Vec2::new(1e-6, 0.0), q0.ancilla, 0.5);
        let mv = MoveInstruction { qubit: 0, site: Rail::A, path: p };
        assert!(matches!(move_windings(&r, &mv), Err(LatticeError::PathNotAnchored { .. })));
    }
}
