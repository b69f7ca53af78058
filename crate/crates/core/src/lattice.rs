//! Geometry of the equilateral triangular lattice, its dual, the
//! high-symmetry points of the Brillouin zone, and rational edge frames.
//!
//! All quantities are exact closed forms evaluated in floating point, so the
//! duality relations k_l . v_j = 2 pi delta_lj hold to machine precision.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Vec2 = Vector2<f64>;
/// Integer dual-lattice index, m = (m1, m2) meaning m1*k1 + m2*k2.
pub type Index2 = [i64; 2];

/// Direct and dual basis of the triangular lattice.
#[derive(Debug, Clone)]
pub struct LatticeBasis {
    pub v1: Vec2,
    pub v2: Vec2,
    pub k1: Vec2,
    pub k2: Vec2,
    pub cell_area: f64,
}

/// v1 = (sqrt3/2, 1/2), v2 = (sqrt3/2, -1/2) and their 2-pi duals.
pub fn standard_basis() -> LatticeBasis {
    let s = 3.0f64.sqrt();
    let v1 = Vec2::new(0.5 * s, 0.5);
    let v2 = Vec2::new(0.5 * s, -0.5);
    let c = 4.0 * PI / s;
    let k1 = Vec2::new(0.5 * c, 0.5 * s * c);
    let k2 = Vec2::new(0.5 * c, -0.5 * s * c);
    let cell_area = (v1.x * v2.y - v1.y * v2.x).abs();
    LatticeBasis {
        v1,
        v2,
        k1,
        k2,
        cell_area,
    }
}

impl LatticeBasis {
    /// m1*k1 + m2*k2.
    pub fn dual(&self, m: Index2) -> Vec2 {
        self.k1 * m[0] as f64 + self.k2 * m[1] as f64
    }

    /// m1*v1 + m2*v2.
    pub fn direct(&self, m: Index2) -> Vec2 {
        self.v1 * m[0] as f64 + self.v2 * m[1] as f64
    }
}

/// The 120-degree clockwise rotation, its eigenvalue tau and the induced
/// index map on dual-lattice coefficients.
#[derive(Debug, Clone)]
pub struct RotationData {
    /// 120-degree clockwise rotation of plane vectors.
    pub r: Matrix2<f64>,
    /// e^{2 pi i / 3}.
    pub tau: Complex64,
}

pub fn rotation_data() -> RotationData {
    let s = 3.0f64.sqrt();
    RotationData {
        r: Matrix2::new(-0.5, 0.5 * s, -0.5 * s, -0.5),
        tau: Complex64::from_polar(1.0, 2.0 * PI / 3.0),
    }
}

/// Index map induced by R on dual coefficients: (m1, m2) -> (-m2, m1 - m2).
///
/// Satisfies R（m k-vec) = (rotate_index m) k-vec and rotate_index^3 = id.
pub fn rotate_index(m: Index2) -> Index2 {
    [-m[1], m[0] - m[1]]
}

/// Inverse of [`rotate_index`], equal to its square: (m1, m2) -> (m2 - m1, -m1).
pub fn rotate_index_inv(m: Index2) -> Index2 {
    rotate_index(rotate_index(m))
}

/// One representative per rotation orbit meeting the box
/// {-max_norm..max_norm}^2 minus the origin.
///
/// The representative is the lexicographically smallest member of the full
/// three-element orbit (it may lie outside the box). Output is sorted.
pub fn orbit_representatives(max_norm: i64) -> Vec<Index2> {
    assert!(max_norm >= 1, "max_norm must be >= 1");
    let mut reps = std::collections::BTreeSet::new();
    for m1 in -max_norm..=max_norm {
        for m2 in -max_norm..=max_norm {
            let m = [m1, m2];
            if m == [0, 0] {
                continue;
            }
            let orbit = [m, rotate_index(m), rotate_index(rotate_index(m))];
            reps.insert(*orbit.iter().min().unwrap());
        }
    }
    reps.into_iter().collect()
}

/// Kind of a high-symmetry quasimomentum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexKind {
    Gamma,
    K,
    Kprime,
}

/// A rotation-invariant point of the Brillouin zone.
#[derive(Debug, Clone)]
pub struct BzVertex {
    pub kind: VertexKind,
    pub coords: Vec2,
    /// s with R*coords = coords + s1*k1 + s2*k2.
    pub rotation_shift: Index2,
}

impl BzVertex {
    pub fn gamma(basis: &LatticeBasis) -> BzVertex {
        let _ = basis;
        BzVertex {
            kind: VertexKind::Gamma,
            coords: Vec2::zeros(),
            rotation_shift: [0, 0],
        }
    }

    /// K = (k1 - k2)/3. Under R: RK = K + k2, so the shift is (0, 1).
    pub fn k(basis: &LatticeBasis) -> BzVertex {
        BzVertex {
            kind: VertexKind::K,
            coords: (basis.k1 - basis.k2) / 3.0,
            rotation_shift: [0, 1],
        }
    }

    /// K' = -K. By linearity RK' = K' - k2, so the shift is (0, -1).
    pub fn kprime(basis: &LatticeBasis) -> BzVertex {
        BzVertex {
            kind: VertexKind::Kprime,
            coords: -(basis.k1 - basis.k2) / 3.0,
            rotation_shift: [0, -1],
        }
    }

    pub fn of_kind(kind: VertexKind, basis: &LatticeBasis) -> BzVertex {
        match kind {
            VertexKind::Gamma => BzVertex::gamma(basis),
            VertexKind::K => BzVertex::k(basis),
            VertexKind::Kprime => BzVertex::kprime(basis),
        }
    }
}

/// Returns the integer pair s with R*coords = coords + s.kvec.
pub fn rotation_shift(vertex: &BzVertex) -> Index2 {
    vertex.rotation_shift
}

/// A rational edge direction and the adapted lattice / dual frames.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeFrame {
    pub a1: i64,
    pub b1: i64,
    pub a2: i64,
    pub b2: i64,
    /// fv1 = a1 v1 + b1 v2 spans the edge direction.
    #[serde(skip, default = "Vec2::zeros")]
    pub fv1: Vec2,
    #[serde(skip, default = "Vec2::zeros")]
    pub fv2: Vec2,
    /// fk1 = b2 k1 - a2 k2.
    #[serde(skip, default = "Vec2::zeros")]
    pub fk1: Vec2,
    /// fk2 = -b1 k1 + a1 k2, normal to the edge.
    #[serde(skip, default = "Vec2::zeros")]
    pub fk2: Vec2,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended Euclid: returns (x, y) with a*x + b*y = gcd(a, b).
fn egcd(a: i64, b: i64) -> (i64, i64) {
    if b == 0 {
        (a.signum(), 0)
    } else {
        let (x, y) = egcd(b, a % b);
        (y, x - (a / b) * y)
    }
}

/// Builds the edge frame for the direction a1 v1 + b1 v2.
///
/// The Bezout completion (a2, b2) with a1 b2 - a2 b1 = 1 is chosen with the
/// smallest |a2| + |b2|, ties broken by smaller |a2|, then by a2 >= 0, so
/// frames are deterministic across runs. The zigzag edge (1, 0) yields
/// fk1 = k1, fk2 = k2; the armchair edge (1, 1) yields fk2 = k2 - k1.
pub fn make_edge_frame(a1: i64, b1: i64) -> Result<EdgeFrame> {
    if gcd(a1, b1) != 1 {
        return Err(Error::NotRationalEdge(a1, b1));
    }
    // a1 x + b1 y = 1; then b2 = x, a2 = -y satisfies a1 b2 - a2 b1 = 1.
    let (x, y) = egcd(a1, b1);
    let (mut a2, mut b2) = (-y, x);
    debug_assert_eq!(a1 * b2 - a2 * b1, 1);
    // general solution: (a2 + t a1, b2 + t b1); minimize |a2| + |b2|
    let mut best = (a2, b2);
    let mut best_key = (i64::MAX, i64::MAX, i64::MAX);
    for t in -(a2.abs() + b2.abs() + 2)..=(a2.abs() + b2.abs() + 2) {
        let ca = a2 + t * a1;
        let cb = b2 + t * b1;
        let key = (ca.abs() + cb.abs(), ca.abs(), if ca >= 0 { 0 } else { 1 });
        if key < best_key {
            best_key = key;
            best = (ca, cb);
        }
    }
    a2 = best.0;
    b2 = best.1;

    let basis = standard_basis();
    Ok(EdgeFrame {
        a1,
        b1,
        a2,
        b2,
        fv1: basis.direct([a1, b1]),
        fv2: basis.direct([a2, b2]),
        fk1: basis.k1 * b2 as f64 - basis.k2 * a2 as f64,
        fk2: -basis.k1 * b1 as f64 + basis.k2 * a1 as f64,
    })
}

impl EdgeFrame {
    /// Rebuild the derived vectors after deserialization.
    pub fn rehydrate(&mut self) {
        let f = make_edge_frame(self.a1, self.b1).expect("stored frame must be rational");
        // keep the stored Bezout completion rather than recomputing it
        let basis = standard_basis();
        self.fv1 = basis.direct([self.a1, self.b1]);
        self.fv2 = basis.direct([self.a2, self.b2]);
        self.fk1 = basis.k1 * self.b2 as f64 - basis.k2 * self.a2 as f64;
        self.fk2 = -basis.k1 * self.b1 as f64 + basis.k2 * self.a1 as f64;
        let _ = f;
    }

    pub fn zigzag() -> EdgeFrame {
        make_edge_frame(1, 0).unwrap()
    }

    pub fn armchair() -> EdgeFrame {
        make_edge_frame(1, 1).unwrap()
    }

    /// Coordinates (q1, q2) of m1 k1 + m2 k2 in the frame dual basis:
    /// m.kvec = q1 fk1 + q2 fk2.
    pub fn dual_in_frame(&self, m: Index2) -> Index2 {
        // m.kvec . fv1 = 2 pi (m1 a1 + m2 b1), m.kvec . fv2 = 2 pi (m1 a2 + m2 b2)
        [m[0] * self.a1 + m[1] * self.b1, m[0] * self.a2 + m[1] * self.b2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn duality_and_cell_area() {
        let b = standard_basis();
        assert_abs_diff_eq!(b.k1.dot(&b.v1), 2.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(b.k1.dot(&b.v2), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.k2.dot(&b.v2), 2.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(b.k2.dot(&b.v1), 0.0, epsilon = 1e-12);
        // k1 = (2 pi / sqrt3, 2 pi), by direct arithmetic
        assert_abs_diff_eq!(b.k1.x, 2.0 * PI / 3.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.k1.y, 2.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(b.cell_area, 3.0f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn rotation_matrix_properties() {
        let rd = rotation_data();
        let r3 = rd.r * rd.r * rd.r;
        assert!((r3 - Matrix2::identity()).norm() < 1e-14);
        assert!((rd.r * rd.r - rd.r.transpose()).norm() < 1e-14);
        // R zeta = tau zeta with zeta = (1, i)/sqrt2
        let zeta = Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)) / Complex64::new(2.0f64.sqrt(), 0.0);
        let rc = rd.r.map(|x| Complex64::new(x, 0.0));
        let lhs = rc * zeta;
        let rhs = zeta * rd.tau;
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn index_map_iterates() {
        assert_eq!(rotate_index([1, 0]), [0, 1]);
        assert_eq!(rotate_index([0, 0]), [0, 0]);
        let mut m = [1, 1];
        m = rotate_index(m);
        assert_eq!(m, [-1, 0]);
        m = rotate_index(m);
        assert_eq!(m, [0, -1]);
        m = rotate_index(m);
        assert_eq!(m, [1, 1]);
    }

    #[test]
    fn index_map_compatible_with_rotation() {
        let b = standard_basis();
        let rd = rotation_data();
        for m1 in -3..=3i64 {
            for m2 in -3..=3i64 {
                let v = b.dual([m1, m2]);
                let rv = rd.r * v;
                let w = b.dual(rotate_index([m1, m2]));
                assert!((rv - w).norm() < 1e-12, "mismatch at ({m1},{m2})");
            }
        }
    }

    #[test]
    fn vertices_and_shifts() {
        let b = standard_basis();
        let rd = rotation_data();
        for v in [BzVertex::gamma(&b), BzVertex::k(&b), BzVertex::kprime(&b)] {
            let lhs = rd.r * v.coords;
            let rhs = v.coords + b.dual(v.rotation_shift);
            assert!((lhs - rhs).norm() < 1e-12, "{:?}", v.kind);
        }
        let k = BzVertex::k(&b);
        assert_eq!(k.rotation_shift, [0, 1]);
        assert_eq!(BzVertex::kprime(&b).rotation_shift, [0, -1]);
        assert_eq!(BzVertex::gamma(&b).rotation_shift, [0, 0]);
        // |K|^2 = 16 pi^2 / 9
        assert_abs_diff_eq!(k.coords.norm_squared(), 16.0 * PI * PI / 9.0, epsilon = 1e-10);
    }

    #[test]
    fn orbit_representatives_cover_box() {
        let reps = orbit_representatives(1);
        // each orbit has length exactly 3 and reps are unique per orbit
        for &m in &reps {
            assert_ne!(m, [0, 0]);
            let o1 = rotate_index(m);
            let o2 = rotate_index(o1);
            assert_ne!(o1, m);
            assert_ne!(o2, m);
            assert_eq!(rotate_index(o2), m);
            assert!(!reps.contains(&o1) || o1 == m);
            assert!(!reps.contains(&o2) || o2 == m);
        }
        // coverage of the box orbit closure without duplicates
        let mut covered = std::collections::BTreeSet::new();
        for &m in &reps {
            for o in [m, rotate_index(m), rotate_index(rotate_index(m))] {
                assert!(covered.insert(o), "duplicate member {o:?}");
            }
        }
        for m1 in -1..=1i64 {
            for m2 in -1..=1i64 {
                if [m1, m2] != [0, 0] {
                    assert!(covered.contains(&[m1, m2]));
                }
            }
        }
        // the six lowest indices split into the two orbits of (1,0) and (-1,0)
        let of = |m: Index2| [m, rotate_index(m), rotate_index(rotate_index(m))];
        let mut six: Vec<Index2> = of([1, 0]).into_iter().chain(of([-1, 0])).collect();
        six.sort();
        let want: Vec<Index2> = vec![[-1, -1], [-1, 0], [0, -1], [0, 1], [1, 0], [1, 1]];
        assert_eq!(six, want);
    }

    #[test]
    fn edge_frames() {
        let b = standard_basis();
        let zz = make_edge_frame(1, 0).unwrap();
        assert!((zz.fk1 - b.k1).norm() < 1e-14);
        assert!((zz.fk2 - b.k2).norm() < 1e-14);
        let ac = make_edge_frame(1, 1).unwrap();
        assert!((ac.fk2 - (b.k2 - b.k1)).norm() < 1e-14);
        assert!(matches!(make_edge_frame(2, 4), Err(Error::NotRationalEdge(2, 4))));
        // duality inside the frame, and Bezout exactly
        for (a1, b1) in [(1i64, 0i64), (1, 1), (2, 1), (3, -1), (5, 2)] {
            let f = make_edge_frame(a1, b1).unwrap();
            assert_eq!(f.a1 * f.b2 - f.a2 * f.b1, 1);
            assert_abs_diff_eq!(f.fk1.dot(&f.fv1), 2.0 * PI, epsilon = 1e-12);
            assert_abs_diff_eq!(f.fk1.dot(&f.fv2), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(f.fk2.dot(&f.fv2), 2.0 * PI, epsilon = 1e-12);
            assert_abs_diff_eq!(f.fk2.dot(&f.fv1), 0.0, epsilon = 1e-12);
        }
    }
}
