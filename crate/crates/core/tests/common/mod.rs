//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use topogate::circuit::{Circuit, Gate, GateInstr};
use topogate::gates::Unitary;
use topogate::geometry::{ClosedPath2, ClosedPath3, Point2, Vec2, Vec3};
use topogate::lattice::{move_windings, LatticeRegister, MoveInstruction};

/// Winding number by counting signed crossings of the rightward ray from `p`.
pub fn crossing_winding(path: &ClosedPath2, p: Point2) -> i64 {
    let v = path.vertices();
    let mut w = 0;
    for i in 0..v.len() {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        let side = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
        if a.y <= p.y {
            if b.y > p.y && side > 0.0 {
                w += 1;
            }
        } else if b.y <= p.y && side < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Solid angle of the spherical cap with half-angle `theta`.
pub fn cap_oracle(theta: f64) -> f64 {
    TAU * (1.0 - theta.cos())
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Plain row-major matrix product, no shortcuts.
pub fn matmul(a: &Unitary, b: &Unitary) -> Vec<Complex64> {
    let n = a.dim();
    let mut out = vec![c64(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            out[r * n + c] = (0..n).map(|k| a[(r, k)] * b[(k, c)]).sum();
        }
    }
    out
}

/// Kronecker product of row-major matrices; `a` is the more significant factor.
pub fn kron(a: &[Complex64], na: usize, b: &[Complex64], nb: usize) -> Vec<Complex64> {
    let n = na * nb;
    let mut out = vec![c64(0.0, 0.0); n * n];
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k) * n + j * nb + l] = a[i * na + j] * b[k * nb + l];
                }
            }
        }
    }
    out
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Haar-random SU(2) from a uniform point on S³.
pub fn haar_su2(rng: &mut impl Rng) -> Unitary {
    let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [a, b, c, d] = q.map(|x| x / n);
    Unitary::new(2, vec![c64(a, b), c64(c, d), c64(-c, d), c64(a, -b)]).unwrap()
}

/// Haar-random U(2): SU(2) times a uniform global phase.
pub fn haar_u2(rng: &mut impl Rng) -> Unitary {
    let phase = Complex64::cis(rng.random_range(-PI..PI));
    haar_su2(rng).scaled(phase)
}

/// Simple closed polygon: star-shaped around `center` with random radii.
pub fn random_star(rng: &mut impl Rng, center: Point2, n: usize, r_min: f64, r_max: f64) -> ClosedPath2 {
    let verts = (0..n)
        .map(|k| {
            let t = TAU * (k as f64 + rng.random_range(0.0..0.5)) / n as f64;
            let r = rng.random_range(r_min..r_max);
            center + Vec2::new(r * t.cos(), r * t.sin())
        })
        .collect();
    ClosedPath2::new(verts).unwrap()
}

/// Arbitrary closed polygon with vertices in a box, possibly self-intersecting.
pub fn random_polygon(rng: &mut impl Rng, n: usize, half: f64) -> ClosedPath2 {
    loop {
        let verts: Vec<Point2> =
            (0..n).map(|_| Vec2::new(rng.random_range(-half..half), rng.random_range(-half..half))).collect();
        if let Ok(p) = ClosedPath2::new(verts) {
            return p;
        }
    }
}

/// Rotation of 3-vectors about a unit axis (Rodrigues).
pub fn rotate3(v: Vec3, axis: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c))
}

/// Random unit vector.
pub fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng));
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

/// Lifts a planar path into the plane through `origin` spanned by `u`, `v`.
pub fn embed(path: &ClosedPath2, origin: Vec3, u: Vec3, v: Vec3) -> ClosedPath3 {
    ClosedPath3::new(path.vertices().iter().map(|p| origin + u * p.x + v * p.y).collect()).unwrap()
}

pub fn random_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-PI..PI)
}

/// Random circuit over the given gate generators.
pub fn random_circuit(
    rng: &mut impl Rng,
    n_qubits: usize,
    n_gates: usize,
    mut gate: impl FnMut(&mut dyn rand::RngCore) -> Gate,
) -> Circuit {
    let mut gates = Vec::with_capacity(n_gates);
    while gates.len() < n_gates {
        let g = gate(rng);
        let targets = if g.arity() == 2 {
            if n_qubits < 2 {
                continue;
            }
            let a = rng.random_range(0..n_qubits);
            let mut b = rng.random_range(0..n_qubits - 1);
            if b >= a {
                b += 1;
            }
            vec![a, b]
        } else {
            vec![rng.random_range(0..n_qubits)]
        };
        gates.push(GateInstr::new(g, targets));
    }
    Circuit::new(n_qubits, gates).unwrap()
}

/// Moves every vertex but the anchor by up to `r`, retrying until the
/// winding vector and clearances are what they were.
pub fn perturb(reg: &LatticeRegister, mv: &MoveInstruction, rng: &mut impl Rng, r: f64) -> MoveInstruction {
    let reference = move_windings(reg, mv).unwrap();
    loop {
        let verts: Vec<Vec2> = mv
            .path
            .vertices()
            .iter()
            .enumerate()
            .map(|(k, &v)| if k == 0 { v } else { v + Vec2::new(rng.random_range(-r..r), rng.random_range(-r..r)) })
            .collect();
        let Ok(path) = ClosedPath2::new(verts) else { continue };
        let cand = MoveInstruction { path, ..mv.clone() };
        if move_windings(reg, &cand).is_ok_and(|w| w == reference) {
            return cand;
        }
    }
}
