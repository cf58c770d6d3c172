//! Spin-orbit holonomies for a magnetic moment moving through static
//! electric fields.
//!
//! A straight segment `dl` through a uniform field `E` rotates the spin by
//! `exp(iκ σ·(E × dl))`, in natural units where `κ` absorbs the coupling
//! constants. Time never enters: only the geometry of the path and the
//! field do, so the rotation is independent of the speed profile along the
//! segment. A program is applied in order, first segment first.
//!
//! Two layouts are supported. In the flying-qubit layout the particle always
//! moves along `+x` and the fields lie in the `yz` plane (`E_y` gives
//! z-rotations, `E_z` gives y-rotations). In the static layout the field is
//! fixed along `x` and the particle moves in the `yz` plane (motion along `y`
//! gives z-rotations, motion along `z` gives y-rotations).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::{euler_zyz, Unitary};
use crate::geometry::Vec3;

/// Relative size below which a vector component counts as zero when
/// checking the layout constraints.
const AXIS_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("segment {index} breaks the {arch} layout: {reason}")]
    ArchitectureViolation { index: usize, arch: Architecture, reason: &'static str },
    #[error("segment {0} has zero length")]
    ZeroLength(usize),
    #[error("segment {0} has a non-finite component")]
    NonFinite(usize),
    #[error("coupling constant must be non-zero and finite")]
    ZeroCoupling,
    #[error("target must be a 2x2 unitary, got dimension {0}")]
    NotSingleQubit(usize),
    #[error("field magnitude and gate length must be positive")]
    BadScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Architecture {
    /// Particle flies along `+x` through fields in the `yz` plane.
    #[serde(rename = "flying")]
    Flying,
    /// Fixed field along `x`; the particle is moved in the `yz` plane.
    #[serde(rename = "static")]
    Static,
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Architecture::Flying => "flying",
            Architecture::Static => "static",
        })
    }
}

impl std::str::FromStr for Architecture {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "flying" => Ok(Architecture::Flying),
            "static" => Ok(Architecture::Static),
            other => Err(format!("unknown architecture {other:?} (expected flying|static)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinSegment {
    pub dl: Vec3,
    #[serde(rename = "E")]
    pub field: Vec3,
}

impl SpinSegment {
    pub fn new(dl: Vec3, field: Vec3) -> Self {
        Self { dl, field }
    }

    /// `n` consecutive pieces with the given relative lengths, same field.
    pub fn subdivide(&self, weights: &[f64]) -> Vec<SpinSegment> {
        let total: f64 = weights.iter().sum();
        weights.iter().map(|w| SpinSegment { dl: self.dl * (w / total), field: self.field }).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinProgram {
    pub arch: Architecture,
    pub kappa: f64,
    pub segments: Vec<SpinSegment>,
}

impl SpinProgram {
    pub fn new(arch: Architecture, kappa: f64, segments: Vec<SpinSegment>) -> Self {
        Self { arch, kappa, segments }
    }

    pub fn validate(&self) -> Result<(), SpinError> {
        if !(self.kappa.is_finite() && self.kappa != 0.0) {
            return Err(SpinError::ZeroCoupling);
        }
        for (index, seg) in self.segments.iter().enumerate() {
            if !seg.dl.is_finite() || !seg.field.is_finite() {
                return Err(SpinError::NonFinite(index));
            }
            let len = seg.dl.norm();
            if len == 0.0 {
                return Err(SpinError::ZeroLength(index));
            }
            let fmag = seg.field.norm();
            let violation = |reason| Err(SpinError::ArchitectureViolation { index, arch: self.arch, reason });
            match self.arch {
                Architecture::Flying => {
                    if seg.dl.y.abs() > AXIS_TOL * len || seg.dl.z.abs() > AXIS_TOL * len || seg.dl.x <= 0.0 {
                        return violation("motion must be along +x");
                    }
                    if seg.field.x.abs() > AXIS_TOL * fmag {
                        return violation("field must lie in the yz plane");
                    }
                }
                Architecture::Static => {
                    if seg.field.y.abs() > AXIS_TOL * fmag || seg.field.z.abs() > AXIS_TOL * fmag {
                        return violation("field must be along x");
                    }
                    if seg.dl.x.abs() > AXIS_TOL * len {
                        return violation("motion must lie in the yz plane");
                    }
                }
            }
        }
        Ok(())
    }
}

/// `cos a·I + i sin a·(n̂·σ)`, the spin rotation by angle `a` about `n̂`.
fn axis_rotation(axis: Vec3, angle: f64) -> Unitary {
    let (s, c) = angle.sin_cos();
    let (nx, ny, nz) = (axis.x, axis.y, axis.z);
    Unitary::from_trusted(
        2,
        vec![
            Complex64::new(c, s * nz),
            Complex64::new(s * ny, s * nx),
            Complex64::new(-s * ny, s * nx),
            Complex64::new(c, -s * nz),
        ],
    )
}

/// `exp(iκ σ·(E × dl))` for one segment. Identity when `E ∥ dl`.
pub fn segment_rotation(seg: &SpinSegment, kappa: f64) -> Unitary {
    let v = seg.field.cross(seg.dl) * kappa;
    let angle = v.norm();
    match v.normalized() {
        Some(axis) if angle > 0.0 => axis_rotation(axis, angle),
        _ => Unitary::identity(2),
    }
}

/// Path-ordered product `U_k ⋯ U_1`; lies in SU(2).
pub fn holonomy(prog: &SpinProgram) -> Result<Unitary, SpinError> {
    prog.validate()?;
    Ok(prog
        .segments
        .iter()
        .fold(Unitary::identity(2), |acc, seg| segment_rotation(seg, prog.kappa).matmul(&acc).expect("2x2")))
}

/// Field and length scales used when compiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinScales {
    /// Gate length of each flying-layout segment.
    pub gate_length: f64,
    /// Field magnitude of the static layout.
    pub field: f64,
}

impl Default for SpinScales {
    fn default() -> Self {
        Self { gate_length: 1.0, field: 1.0 }
    }
}

/// Angles closer to zero than this are dropped from compiled programs.
const ZERO_ANGLE: f64 = 1e-15;

#[derive(Clone, Copy)]
enum Axis {
    Y,
    Z,
}

fn rotation_segment(axis: Axis, angle: f64, arch: Architecture, kappa: f64, scales: SpinScales) -> SpinSegment {
    match arch {
        // dl = (L,0,0): E_y gives E×dl = (0,0,-E_y L), E_z gives (0,E_z L,0).
        Architecture::Flying => {
            let l = scales.gate_length;
            let dl = Vec3::new(l, 0.0, 0.0);
            match axis {
                Axis::Z => SpinSegment::new(dl, Vec3::new(0.0, -angle / (kappa * l), 0.0)),
                Axis::Y => SpinSegment::new(dl, Vec3::new(0.0, 0.0, angle / (kappa * l))),
            }
        }
        // E = (E_x,0,0): dl_y gives E×dl = (0,0,E_x dl_y), dl_z gives (0,-E_x dl_z,0).
        Architecture::Static => {
            let e = scales.field;
            let field = Vec3::new(e, 0.0, 0.0);
            match axis {
                Axis::Z => SpinSegment::new(Vec3::new(0.0, angle / (kappa * e), 0.0), field),
                Axis::Y => SpinSegment::new(Vec3::new(0.0, 0.0, -angle / (kappa * e)), field),
            }
        }
    }
}

/// Program whose holonomy equals `target` up to global phase: the ZYZ
/// factors `Rz(β)`, `Ry(θ)`, `Rz(α)` in application order, zero angles omitted.
pub fn compile_su2(target: &Unitary, arch: Architecture, kappa: f64) -> Result<SpinProgram, SpinError> {
    compile_su2_with_scales(target, arch, kappa, SpinScales::default())
}

pub fn compile_su2_with_scales(
    target: &Unitary,
    arch: Architecture,
    kappa: f64,
    scales: SpinScales,
) -> Result<SpinProgram, SpinError> {
    if !(kappa.is_finite() && kappa != 0.0) {
        return Err(SpinError::ZeroCoupling);
    }
    if target.dim() != 2 {
        return Err(SpinError::NotSingleQubit(target.dim()));
    }
    if !(scales.gate_length > 0.0 && scales.field > 0.0) {
        return Err(SpinError::BadScale);
    }
    let e = euler_zyz(target);
    let segments = [(Axis::Z, e.beta), (Axis::Y, e.theta), (Axis::Z, e.alpha)]
        .into_iter()
        .filter(|(_, a)| a.abs() > ZERO_ANGLE)
        .map(|(axis, a)| rotation_segment(axis, a, arch, kappa, scales))
        .collect();
    Ok(SpinProgram { arch, kappa, segments })
}

/// Line-charge configuration: moment `mu`, linear charge density `lambda`,
/// and the number of times `n` the path encircles the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCharge {
    pub mu: f64,
    pub lambda: f64,
    pub n: i64,
}

/// Phase around an infinite line charge, `4π n μ λ` with `ħ = c = 1`.
pub fn ac_line_phase(line: &LineCharge) -> f64 {
    4.0 * PI * line.n as f64 * line.mu * line.lambda
}
