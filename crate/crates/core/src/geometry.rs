//! Computational geometry for topological invariants.
//!
//! Two quantities drive every phase in this crate: the winding number of a
//! planar loop around a puncture, and the signed solid angle a spatial loop
//! subtends at an apex. Paths are closed polylines; the closing segment from
//! the last vertex back to the first is implicit.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default distance below which a point counts as lying on a path.
pub const DEFAULT_CLEARANCE: f64 = 1e-9;

/// Largest allowed distance of the summed winding angle from an integer.
const WINDING_RESIDUAL: f64 = 1e-6;

/// Fan triangles closer than this (relative to the path diameter) to the
/// apex are treated as containing it.
const SURFACE_EPS: f64 = 1e-11;

/// Offset (relative to the path diameter) applied to an apex that sits on
/// the fan surface, taken along the canonical plane normal.
const SURFACE_OFFSET: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("a closed path needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("vertices {0} and {1} coincide")]
    RepeatedVertex(usize, usize),
    #[error("point {index} lies within {tol:e} of the path")]
    PointOnPath { index: usize, tol: f64 },
    #[error("apex lies within {tol:e} of the path")]
    ApexOnPath { tol: f64 },
    #[error("winding angle sum {turns} is not close to an integer")]
    NonIntegerWinding { turns: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

pub type Point2 = Vec2;

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counterclockwise rotation by `angle` radians.
    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub type Point3 = Vec3;

impl Vec3 {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);
    pub const X: Self = Self::new(1.0, 0.0, 0.0);
    pub const Y: Self = Self::new(0.0, 1.0, 0.0);
    pub const Z: Self = Self::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| self * (1.0 / n))
    }

    /// Flip the sign so that the component of largest magnitude is positive.
    pub fn canonical_sign(self) -> Self {
        let (ax, ay, az) = (self.x.abs(), self.y.abs(), self.z.abs());
        let lead = if ax >= ay && ax >= az {
            self.x
        } else if ay >= az {
            self.y
        } else {
            self.z
        };
        if lead < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// A closed planar polyline. Traversal runs `v[0] -> v[1] -> ... -> v[n-1] -> v[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct ClosedPath2 {
    vertices: Vec<Point2>,
}

/// A closed polyline in space, closed the same way as [`ClosedPath2`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point3>", into = "Vec<Point3>")]
pub struct ClosedPath3 {
    vertices: Vec<Point3>,
}

macro_rules! closed_path_impl {
    ($path:ident, $point:ident) => {
        impl $path {
            /// Builds a closed path. A trailing copy of the first vertex is
            /// dropped, since closure is implicit.
            pub fn new(mut vertices: Vec<$point>) -> Result<Self, GeometryError> {
                if vertices.len() > 1 && vertices.first() == vertices.last() {
                    vertices.pop();
                }
                let n = vertices.len();
                if n < 3 {
                    return Err(GeometryError::TooFewVertices(n));
                }
                if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
                    return Err(GeometryError::NonFinite(i));
                }
                for i in 0..n {
                    let j = (i + 1) % n;
                    if vertices[i] == vertices[j] {
                        return Err(GeometryError::RepeatedVertex(i, j));
                    }
                }
                Ok(Self { vertices })
            }

            pub fn vertices(&self) -> &[$point] {
                &self.vertices
            }

            pub fn len(&self) -> usize {
                self.vertices.len()
            }

            pub fn is_empty(&self) -> bool {
                self.vertices.is_empty()
            }

            /// Segments as `(start, end)` pairs, including the closing one.
            pub fn segments(&self) -> impl Iterator<Item = ($point, $point)> + '_ {
                let n = self.vertices.len();
                (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
            }

            /// Same loop traversed in the opposite direction from the same base vertex.
            pub fn reversed(&self) -> Self {
                let mut vertices = Vec::with_capacity(self.vertices.len());
                vertices.push(self.vertices[0]);
                vertices.extend(self.vertices[1..].iter().rev());
                Self { vertices }
            }

            /// Traverses `self` then `other`. Both must start at the same base vertex.
            pub fn concat(&self, other: &Self) -> Result<Self, GeometryError> {
                let mut vertices = self.vertices.clone();
                vertices.extend_from_slice(&other.vertices);
                Self::new(vertices)
            }

            /// The loop repeated `times` times (at least once).
            pub fn repeated(&self, times: usize) -> Self {
                let times = times.max(1);
                Self { vertices: self.vertices.repeat(times) }
            }

            pub fn map(&self, f: impl Fn($point) -> $point) -> Result<Self, GeometryError> {
                Self::new(self.vertices.iter().copied().map(f).collect())
            }

            /// Largest distance between any two vertices.
            pub fn diameter(&self) -> f64 {
                let v = &self.vertices;
                let mut d: f64 = 0.0;
                for i in 0..v.len() {
                    for j in i + 1..v.len() {
                        d = d.max((v[i] - v[j]).norm());
                    }
                }
                d
            }
        }

        impl TryFrom<Vec<$point>> for $path {
            type Error = GeometryError;
            fn try_from(v: Vec<$point>) -> Result<Self, Self::Error> {
                Self::new(v)
            }
        }

        impl From<$path> for Vec<$point> {
            fn from(p: $path) -> Self {
                p.vertices
            }
        }
    };
}

closed_path_impl!(ClosedPath2, Point2);
closed_path_impl!(ClosedPath3, Point3);

/// Signed count of counterclockwise encirclements. Always an exact integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WindingNumber(pub i64);

impl WindingNumber {
    pub fn value(self) -> i64 {
        self.0
    }
}

impl std::fmt::Display for WindingNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

pub fn point_segment_distance3(p: Point3, a: Point3, b: Point3) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

fn min_distance_to_path(path: &ClosedPath2, p: Point2) -> f64 {
    path.segments().map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
}

/// Winding number with the default on-path tolerance.
pub fn winding_number(path: &ClosedPath2, point: Point2) -> Result<WindingNumber, GeometryError> {
    winding_number_with_tolerance(path, point, DEFAULT_CLEARANCE)
}

/// Winding number by signed angle summation, rounded to the nearest integer.
pub fn winding_number_with_tolerance(
    path: &ClosedPath2,
    point: Point2,
    tol: f64,
) -> Result<WindingNumber, GeometryError> {
    if min_distance_to_path(path, point) <= tol {
        return Err(GeometryError::PointOnPath { index: 0, tol });
    }
    let total: f64 = path
        .segments()
        .map(|(a, b)| {
            let (u, v) = (a - point, b - point);
            u.cross(v).atan2(u.dot(v))
        })
        .sum();
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > WINDING_RESIDUAL {
        return Err(GeometryError::NonIntegerWinding { turns });
    }
    Ok(WindingNumber(rounded as i64))
}

/// Winding numbers of one path around several punctures.
pub fn winding_vector(path: &ClosedPath2, punctures: &[Point2]) -> Result<Vec<WindingNumber>, GeometryError> {
    winding_vector_with_tolerance(path, punctures, DEFAULT_CLEARANCE)
}

pub fn winding_vector_with_tolerance(
    path: &ClosedPath2,
    punctures: &[Point2],
    tol: f64,
) -> Result<Vec<WindingNumber>, GeometryError> {
    punctures
        .iter()
        .enumerate()
        .map(|(index, &p)| {
            winding_number_with_tolerance(path, p, tol).map_err(|e| match e {
                GeometryError::PointOnPath { tol, .. } => GeometryError::PointOnPath { index, tol },
                other => other,
            })
        })
        .collect()
}

/// True iff every obstacle is farther than `min_dist` from every segment.
pub fn path_clearance(path: &ClosedPath2, obstacles: &[Point2], min_dist: f64) -> bool {
    obstacles.iter().all(|&o| min_distance_to_path(path, o) > min_dist)
}

/// Signed solid angle of the triangle `(a, b, c)` seen from the origin.
///
/// Van Oosterom–Strandberg:
/// `tan(Ω/2) = a·(b×c) / (|a||b||c| + (a·b)|c| + (a·c)|b| + (b·c)|a|)`.
fn triangle_solid_angle(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let num = a.dot(b.cross(c));
    let den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
    2.0 * num.atan2(den)
}

/// Distance from `p` to the filled triangle `(a, b, c)`.
fn point_triangle_distance(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let n = (b - a).cross(c - a);
    let n2 = n.dot(n);
    if n2 > 0.0 {
        // Barycentric test on the projection into the triangle plane.
        let w = p - a;
        let t = n.dot(w) / n2;
        let q = p - n * t;
        let inside = [(a, b), (b, c), (c, a)].iter().all(|&(u, v)| (v - u).cross(q - u).dot(n) >= 0.0);
        if inside {
            return (t * n2.sqrt()).abs();
        }
    }
    point_segment_distance3(p, a, b).min(point_segment_distance3(p, b, c)).min(point_segment_distance3(p, c, a))
}

/// Unit normal of the least-squares plane through `points`, sign-canonicalised.
///
/// Returns `None` when the points are collinear or coincident.
pub fn best_fit_normal(points: &[Point3]) -> Option<Vec3> {
    let n = points.len() as f64;
    if points.len() < 3 {
        return None;
    }
    let centroid = points.iter().fold(Vec3::ZERO, |acc, &p| acc + p) * (1.0 / n);
    let mut cov = nalgebra::Matrix3::<f64>::zeros();
    for &p in points {
        let d = p - centroid;
        let d = nalgebra::Vector3::new(d.x, d.y, d.z);
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    // A plane needs two non-degenerate in-plane directions.
    if eig.eigenvalues[order[1]] <= f64::EPSILON * eig.eigenvalues[order[2]].abs() {
        return None;
    }
    let v = eig.eigenvectors.column(order[0]);
    Vec3::new(v[0], v[1], v[2]).normalized().map(Vec3::canonical_sign)
}

/// Orthonormal in-plane basis `(u, v)` with `u × v = normal`.
pub fn plane_basis(normal: Vec3) -> (Vec3, Vec3) {
    let seed = if normal.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
    let u = seed.cross(normal).normalized().expect("seed not parallel to normal");
    (u, normal.cross(u))
}

/// Winding of `path` about `point` inside their common plane, counted
/// counterclockwise about the canonical [`best_fit_normal`]. `None` unless
/// every vertex and the point lie within `rel_tol · diameter` of that plane.
pub fn coplanar_winding(
    path: &ClosedPath3,
    point: Point3,
    rel_tol: f64,
) -> Result<Option<WindingNumber>, GeometryError> {
    let verts = path.vertices();
    let Some(normal) = best_fit_normal(verts) else {
        return Ok(None);
    };
    let tol = rel_tol * path.diameter();
    let centroid = verts.iter().fold(Vec3::ZERO, |a, &p| a + p) * (1.0 / verts.len() as f64);
    let off_plane = |p: Point3| (p - centroid).dot(normal).abs();
    if verts.iter().any(|&p| off_plane(p) > tol) || off_plane(point) > tol {
        return Ok(None);
    }
    let (u, v) = plane_basis(normal);
    let project = |p: Point3| {
        let d = p - centroid;
        Vec2::new(d.dot(u), d.dot(v))
    };
    let planar = ClosedPath2::new(verts.iter().map(|&p| project(p)).collect())?;
    winding_number(&planar, project(point)).map(Some)
}

/// Signed solid angle (steradians) subtended by `path` at `apex`.
pub fn solid_angle(path: &ClosedPath3, apex: Point3) -> Result<f64, GeometryError> {
    solid_angle_with_tolerance(path, apex, DEFAULT_CLEARANCE)
}

/// Signed solid angle subtended by `path` at `apex`.
///
/// The loop is fanned from its first vertex into triangles whose signed
/// solid angles are summed. A loop circulating counterclockwise about a
/// normal that points away from the apex counts positive. Zero-area fan
/// triangles are skipped.
///
/// When the apex lies on the fan surface the value jumps by 4π across it,
/// and the result is the limit taken from the side opposite the canonical
/// plane normal. A planar loop containing the apex in its plane, with winding
/// `w` about that normal, therefore gives exactly `2πw`.
pub fn solid_angle_with_tolerance(path: &ClosedPath3, apex: Point3, tol: f64) -> Result<f64, GeometryError> {
    let on_path = path.segments().any(|(a, b)| point_segment_distance3(apex, a, b) <= tol);
    if on_path {
        return Err(GeometryError::ApexOnPath { tol });
    }

    let v = path.vertices();
    let scale = path.diameter();
    let area_eps = (f64::EPSILON * scale * scale) * 16.0;
    let fan: Vec<(Vec3, Vec3, Vec3)> = (1..v.len() - 1)
        .map(|i| (v[0], v[i], v[i + 1]))
        .filter(|&(a, b, c)| (b - a).cross(c - a).norm() > area_eps)
        .collect();

    let hit = fan.iter().find(|&&(a, b, c)| point_triangle_distance(apex, a, b, c) <= SURFACE_EPS * scale);
    let apex = match hit {
        None => apex,
        Some(&(a, b, c)) => {
            if let Some(w) = coplanar_winding(path, apex, SURFACE_EPS)? {
                return Ok(TAU * w.value() as f64);
            }
            let tri_normal = (b - a).cross(c - a).normalized().unwrap_or(Vec3::Z);
            let dir = match best_fit_normal(v) {
                Some(n) if n.dot(tri_normal).abs() > 0.1 => n,
                _ => tri_normal.canonical_sign(),
            };
            apex - dir * (SURFACE_OFFSET * scale)
        }
    };

    Ok(fan.iter().map(|&(a, b, c)| triangle_solid_angle(a - apex, b - apex, c - apex)).sum())
}

/// Solid angle of a spherical cap with half-angle `theta` (radians).
pub fn cap_solid_angle(theta: f64) -> f64 {
    TAU * (1.0 - theta.cos())
}

/// Regular `n`-gon approximating a circle of `radius` about `center`, CCW.
pub fn regular_polygon(center: Point2, radius: f64, n: usize) -> ClosedPath2 {
    let vertices = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            center + Vec2::new(radius * t.cos(), radius * t.sin())
        })
        .collect();
    ClosedPath2::new(vertices).expect("regular polygon with n >= 3 is valid")
}

/// Axis-aligned square with half-side `half` about `center`, CCW from the lower-left corner.
pub fn square(center: Point2, half: f64) -> ClosedPath2 {
    let c = center;
    ClosedPath2::new(vec![
        c + Vec2::new(-half, -half),
        c + Vec2::new(half, -half),
        c + Vec2::new(half, half),
        c + Vec2::new(-half, half),
    ])
    .expect("square with positive half-side is valid")
}

/// Circle of colatitude `theta` on the unit sphere about `center`, sampled
/// with `n` vertices and traversed eastward (CCW about +z).
pub fn latitude_circle(center: Point3, theta: f64, n: usize) -> ClosedPath3 {
    let (st, ct) = theta.sin_cos();
    let vertices = (0..n)
        .map(|k| {
            let phi = TAU * k as f64 / n as f64;
            center + Vec3::new(st * phi.cos(), st * phi.sin(), ct)
        })
        .collect();
    ClosedPath3::new(vertices).expect("latitude circle away from the poles is valid")
}

/// Spherical triangle `a -> b -> c` on the unit sphere, edges sampled along
/// great-circle arcs with `per_edge` points each.
pub fn spherical_triangle(a: Vec3, b: Vec3, c: Vec3, per_edge: usize) -> ClosedPath3 {
    let mut vertices = Vec::with_capacity(3 * per_edge);
    for (u, w) in [(a, b), (b, c), (c, a)] {
        let omega = u.dot(w).clamp(-1.0, 1.0).acos();
        for k in 0..per_edge {
            let t = k as f64 / per_edge as f64;
            let s = omega.sin();
            let p = u * (((1.0 - t) * omega).sin() / s) + w * ((t * omega).sin() / s);
            vertices.push(p);
        }
    }
    ClosedPath3::new(vertices).expect("spherical triangle with distinct corners is valid")
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
