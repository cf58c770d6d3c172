//! Charge loops around a magnetic monopole.
//!
//! With `eg = n_q/2` (natural units) a loop subtending the solid angle `Ω`
//! at the monopole contributes the phase `n_q·Ω/2`. That is a geometric
//! quantity in general; it becomes topological only when the loop is planar
//! and its plane passes through the monopole, where every enclosing loop
//! subtends a half-sphere and the phase is `n_q·w·π` for winding `w`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{coplanar_winding, solid_angle, ClosedPath3, GeometryError, Point3, WindingNumber};

/// Default coplanarity tolerance, relative to the path diameter.
pub const DEFAULT_COPLANAR_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonopoleError {
    #[error("charge quantum must be at least 1, got {0}")]
    InvalidChargeQuantum(i64),
    #[error("monopole position is not finite")]
    NonFinitePosition,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigRepr")]
pub struct MonopoleConfig {
    pub position: Point3,
    pub n_q: i64,
}

#[derive(Deserialize)]
struct ConfigRepr {
    position: Point3,
    n_q: i64,
}

impl TryFrom<ConfigRepr> for MonopoleConfig {
    type Error = MonopoleError;
    fn try_from(r: ConfigRepr) -> Result<Self, MonopoleError> {
        MonopoleConfig::new(r.position, r.n_q)
    }
}

impl MonopoleConfig {
    pub fn new(position: Point3, n_q: i64) -> Result<Self, MonopoleError> {
        if n_q < 1 {
            return Err(MonopoleError::InvalidChargeQuantum(n_q));
        }
        if !position.is_finite() {
            return Err(MonopoleError::NonFinitePosition);
        }
        Ok(Self { position, n_q })
    }

    /// Unit monopole at `position`.
    pub fn unit(position: Point3) -> Self {
        Self { position, n_q: 1 }
    }
}

pub fn monopole_phase(path: &ClosedPath3, cfg: &MonopoleConfig) -> Result<f64, MonopoleError> {
    Ok(cfg.n_q as f64 * solid_angle(path, cfg.position)? / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseClass {
    /// Planar loop through the monopole's plane, with its in-plane winding.
    Topological(WindingNumber),
    /// Geometry-dependent phase.
    Holonomic,
}

/// Classifies the loop's phase. `rel_tol` scales with the path diameter.
///
/// The in-plane orientation is fixed by the canonical plane normal (largest
/// component positive), the same convention [`solid_angle`] uses for an
/// apex lying in the plane of the loop.
pub fn certify_topological(
    path: &ClosedPath3,
    cfg: &MonopoleConfig,
    rel_tol: f64,
) -> Result<PhaseClass, MonopoleError> {
    // Rejects a monopole sitting on the path.
    solid_angle(path, cfg.position)?;
    Ok(match coplanar_winding(path, cfg.position, rel_tol)? {
        Some(w) => PhaseClass::Topological(w),
        None => PhaseClass::Holonomic,
    })
}
