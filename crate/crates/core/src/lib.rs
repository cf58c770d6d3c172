//! Simulation and compilation of topological quantum gates.
//!
//! * [`geometry`]: winding numbers and solid angles of closed polygonal paths.
//! * [`gates`]: dense unitaries, the named gates, ZYZ decomposition.
//! * [`state`]: little-endian statevectors.
//! * [`lattice`]: dual-rail register whose phases come from braiding particles.
//! * [`spinline`]: spin holonomies from motion through static electric fields.
//! * [`monopole`]: solid-angle phases of charge loops around a monopole.
//! * [`circuit`]: circuit IR, simulation, backend compilation and verification.

pub mod circuit;
pub mod gates;
pub mod geometry;
pub mod lattice;
pub mod monopole;
pub mod spinline;
pub mod state;

pub use circuit::{compile, simulate, verify_compilation, Backend, Circuit, CompiledProgram, Gate, GateInstr, Tag};
pub use gates::{equal_up_to_phase, euler_zyz, Unitary};
pub use geometry::{solid_angle, winding_number, ClosedPath2, ClosedPath3, Point2, Point3, WindingNumber};
pub use state::StateVector;
