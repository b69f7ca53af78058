//! Plane-wave (Fourier-Galerkin) discretization of the Floquet-Bloch
//! eigenproblem L^A(k) phi = E phi on the torus.
//!
//! Basis functions are e^{i (k + m.kvec).x} for m in the box
//! {-trunc..trunc}^2, in which the operator has entries
//! H_{mn} = (k + m.kvec)^T A_{m-n} (k + n.kvec).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice::{rotate_index, standard_basis, BzVertex, Index2, LatticeBasis, Vec2, VertexKind};
use crate::linalg::{self, C64};
use crate::media::FourierMedium;
use crate::{Error, Result};

/// Bijection between flat row indices and integer pairs in the truncation box.
#[derive(Debug, Clone)]
pub struct IndexTable {
    pub trunc: i64,
    side: usize,
}

impl IndexTable {
    pub fn new(trunc: i64) -> IndexTable {
        IndexTable {
            trunc,
            side: (2 * trunc + 1) as usize,
        }
    }

    pub fn len(&self) -> usize {
        self.side * self.side
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flat(&self, m: Index2) -> Option<usize> {
        if m[0].abs() > self.trunc || m[1].abs() > self.trunc {
            return None;
        }
        let i = (m[0] + self.trunc) as usize;
        let j = (m[1] + self.trunc) as usize;
        Some(i * self.side + j)
    }

    pub fn index(&self, flat: usize) -> Index2 {
        let i = (flat / self.side) as i64 - self.trunc;
        let j = (flat % self.side) as i64 - self.trunc;
        [i, j]
    }
}

/// Assembled truncated Bloch operator at one quasimomentum.
#[derive(Debug, Clone)]
pub struct BlochProblem {
    pub k: Vec2,
    pub trunc: i64,
    pub matrix: DMatrix<C64>,
    pub table: IndexTable,
}

/// Assembles L^A(k) on the plane-wave basis.
pub fn assemble(medium: &FourierMedium, k: Vec2, trunc: i64) -> Result<BlochProblem> {
    if trunc < medium.max_index() {
        return Err(Error::TruncationTooSmall {
            max_index: medium.max_index(),
            trunc,
        });
    }
    let basis = standard_basis();
    let table = IndexTable::new(trunc);
    let n = table.len();
    let mut matrix = DMatrix::<C64>::zeros(n, n);
    // precompute k + m.kvec for the whole box
    let km: Vec<Vec2> = (0..n).map(|f| k + basis.dual(table.index(f))).collect();
    for (&p, ap) in medium.iter() {
        for col in 0..n {
            let m_col = table.index(col);
            let m_row = [m_col[0] + p[0], m_col[1] + p[1]];
            if let Some(row) = table.flat(m_row) {
                let left = km[row];
                let right = km[col];
                // (left)^T A_p (right)
                let v0 = ap[(0, 0)] * right.x + ap[(0, 1)] * right.y;
                let v1 = ap[(1, 0)] * right.x + ap[(1, 1)] * right.y;
                matrix[(row, col)] += C64::new(left.x, 0.0) * v0 + C64::new(left.y, 0.0) * v1;
            }
        }
    }
    Ok(BlochProblem {
        k,
        trunc,
        matrix,
        table,
    })
}

/// Assembles L^{A + delta B}(k).
pub fn assemble_perturbed(
    medium: &FourierMedium,
    perturbation: &FourierMedium,
    delta: f64,
    k: Vec2,
    trunc: i64,
) -> Result<BlochProblem> {
    assemble(&medium.add_scaled(perturbation, delta), k, trunc)
}

/// Lowest eigenpairs at one quasimomentum, ascending, residual-checked.
#[derive(Debug, Clone)]
pub struct BandSet {
    pub energies: Vec<f64>,
    /// Columns are coefficient vectors, unit norm, phase-fixed.
    pub vectors: DMatrix<C64>,
    pub residuals: Vec<f64>,
}

/// Fixes the gauge: the largest-magnitude coefficient is made real positive.
pub fn fix_phase(v: &mut DVector<C64>) {
    let mut best = 0usize;
    let mut mag = -1.0f64;
    for (i, c) in v.iter().enumerate() {
        let m = c.norm();
        if m > mag + 1e-14 {
            mag = m;
            best = i;
        }
    }
    let c = v[best];
    if c.norm() > 0.0 {
        let phase = c.conj() / C64::new(c.norm(), 0.0);
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

pub fn solve_bands(problem: &BlochProblem, count: usize) -> Result<BandSet> {
    let n = problem.matrix.nrows();
    if count > n {
        return Err(Error::InvalidParameter(format!(
            "requested {count} bands from a {n}-dimensional problem"
        )));
    }
    let (vals, vecs) = linalg::hermitian_eigen_lowest(&problem.matrix, count);
    let mut vectors = vecs;
    let mut residuals = Vec::with_capacity(count);
    for b in 0..count {
        let mut col = vectors.column(b).into_owned();
        fix_phase(&mut col);
        vectors.set_column(b, &col);
        let r = (&problem.matrix * &col - &col * C64::new(vals[b], 0.0)).norm();
        if r > 1e-8 * (1.0 + vals[b].abs()) {
            return Err(Error::Eigensolver(format!(
                "residual {r:e} too large for band {b} (E = {})",
                vals[b]
            )));
        }
        residuals.push(r);
    }
    Ok(BandSet {
        energies: vals,
        vectors,
        residuals,
    })
}

/// Free-space dispersion: the `count` smallest |k + m.kvec|^2 over the box.
pub fn free_dispersion(k: Vec2, trunc: i64, count: usize) -> Vec<f64> {
    let basis = standard_basis();
    let table = IndexTable::new(trunc);
    let mut vals: Vec<f64> = (0..table.len())
        .map(|f| (k + basis.dual(table.index(f))).norm_squared())
        .collect();
    vals.sort_by(f64::total_cmp);
    vals.truncate(count);
    vals
}

/// One row of a band-path table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandPathRow {
    /// Coordinates of k in the dual basis: k = f1 k1 + f2 k2.
    pub k1_frac: f64,
    pub k2_frac: f64,
    pub kx: f64,
    pub ky: f64,
    pub energies: Vec<f64>,
}

/// Uniformly sampled piecewise-linear path through the listed waypoints.
pub fn band_path(
    medium: &FourierMedium,
    waypoints: &[Vec2],
    samples_per_leg: usize,
    count: usize,
    trunc: i64,
) -> Result<Vec<BandPathRow>> {
    if waypoints.len() < 2 {
        return Err(Error::InvalidParameter(
            "band path needs at least two waypoints".into(),
        ));
    }
    if samples_per_leg == 0 {
        return Err(Error::InvalidParameter("samples_per_leg must be positive".into()));
    }
    let mut ks: Vec<Vec2> = Vec::new();
    for leg in 0..waypoints.len() - 1 {
        let a = waypoints[leg];
        let b = waypoints[leg + 1];
        let last_leg = leg == waypoints.len() - 2;
        let upper = if last_leg { samples_per_leg } else { samples_per_leg - 1 };
        for s in 0..=upper {
            let t = s as f64 / samples_per_leg as f64;
            ks.push(a + (b - a) * t);
        }
    }
    let basis = standard_basis();
    ks.par_iter()
        .map(|&k| {
            let problem = assemble(medium, k, trunc)?;
            let bands = solve_bands(&problem, count)?;
            Ok(row_for(&basis, k, bands.energies))
        })
        .collect()
}

fn row_for(basis: &LatticeBasis, k: Vec2, energies: Vec<f64>) -> BandPathRow {
    use std::f64::consts::TAU;
    BandPathRow {
        k1_frac: k.dot(&basis.v1) / TAU,
        k2_frac: k.dot(&basis.v2) / TAU,
        kx: k.x,
        ky: k.y,
        energies,
    }
}

// ---------------------------------------------------------------------------
// Rotation operator and sector projection
// ---------------------------------------------------------------------------

/// The map f(x) -> f(R* x) on the truncated pseudo-periodic basis.
///
/// On basis indices it acts as the affine permutation m -> Rm + s, where s is
/// the vertex rotation shift. Indices whose orbit leaves the truncation box
/// are dropped; the operator is an honest unitary permutation on the largest
/// closed sub-box.
#[derive(Debug, Clone)]
pub struct RotationOperator {
    pub table: IndexTable,
    /// Flat indices belonging to the closed sub-box, sorted.
    pub sub_box: Vec<usize>,
    /// For each position in `sub_box`, the position of its image.
    image: Vec<usize>,
    /// Dense position lookup: flat index -> position in sub_box.
    position: Vec<Option<usize>>,
}

pub fn rotation_operator(vertex: &BzVertex, trunc: i64) -> Result<RotationOperator> {
    match vertex.kind {
        VertexKind::Gamma | VertexKind::K | VertexKind::Kprime => {}
    }
    let table = IndexTable::new(trunc);
    let s = vertex.rotation_shift;
    let g = |m: Index2| -> Index2 {
        let r = rotate_index(m);
        [r[0] + s[0], r[1] + s[1]]
    };
    let in_box = |m: Index2| m[0].abs() <= trunc && m[1].abs() <= trunc;
    let mut sub_box = Vec::new();
    for f in 0..table.len() {
        let m = table.index(f);
        if in_box(g(m)) && in_box(g(g(m))) {
            sub_box.push(f);
        }
    }
    let mut position = vec![None; table.len()];
    for (pos, &f) in sub_box.iter().enumerate() {
        position[f] = Some(pos);
    }
    let image = sub_box
        .iter()
        .map(|&f| {
            let img = g(table.index(f));
            position[table.flat(img).expect("image stays in box")]
                .expect("sub-box is closed under the rotation map")
        })
        .collect();
    Ok(RotationOperator {
        table,
        sub_box,
        image,
        position,
    })
}

impl RotationOperator {
    /// Applies the rotation to a full coefficient vector, zeroing components
    /// whose rotation image leaves the truncation box.
    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        let mut w = DVector::zeros(v.len());
        for (pos, &f) in self.sub_box.iter().enumerate() {
            let target = self.sub_box[self.image[pos]];
            w[target] = v[f];
        }
        w
    }

    /// Fraction of |v|^2 outside the closed sub-box.
    pub fn leakage(&self, v: &DVector<C64>) -> f64 {
        let total: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let inside: f64 = self.sub_box.iter().map(|&f| v[f].norm_sqr()).sum();
        (total - inside) / total
    }

    /// The permutation matrix restricted to the closed sub-box.
    pub fn matrix_on_sub_box(&self) -> DMatrix<C64> {
        let n = self.sub_box.len();
        let mut m = DMatrix::zeros(n, n);
        for pos in 0..n {
            m[(self.image[pos], pos)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Restriction of a Bloch matrix to the closed sub-box.
    pub fn restrict(&self, h: &DMatrix<C64>) -> DMatrix<C64> {
        let n = self.sub_box.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &fi) in self.sub_box.iter().enumerate() {
            for (j, &fj) in self.sub_box.iter().enumerate() {
                m[(i, j)] = h[(fi, fj)];
            }
        }
        m
    }
}

/// Max-norm of [R, H] on the closed sub-box.
pub fn commutation_defect(rot: &RotationOperator, h: &DMatrix<C64>) -> f64 {
    let hr = rot.restrict(h);
    let r = rot.matrix_on_sub_box();
    let c = &r * &hr - &hr * &r;
    c.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    One,
    Tau,
    TauBar,
    Mixed,
}

#[derive(Debug, Clone)]
pub struct SectorVector {
    pub band_index: usize,
    pub energy: f64,
    pub vector: DVector<C64>,
    pub sector: Sector,
    /// Norm of (R - sigma) v, including truncation leakage.
    pub residual: f64,
}

/// Default relative clustering width for degenerate eigenvalues.
pub const CLUSTER_RELTOL: f64 = 1e-6;

/// Groups band indices into degenerate clusters.
pub fn cluster_bands(energies: &[f64], reltol: f64) -> Vec<std::ops::Range<usize>> {
    let mut clusters = Vec::new();
    let mut start = 0usize;
    for i in 1..=energies.len() {
        let split = i == energies.len()
            || (energies[i] - energies[i - 1]).abs() > reltol * (1.0 + energies[i].abs());
        if split {
            clusters.push(start..i);
            start = i;
        }
    }
    clusters
}

/// Projects eigenvectors onto rotation sectors, resolving degenerate clusters.
///
/// Within each degenerate cluster the rotation operator is diagonalized via
/// the spectral projectors P_sigma = (I + conj(sigma) W + conj(sigma)^2 W^2)/3,
/// and the returned vectors are the cluster rotations aligned with sectors.
/// A vector whose rotation residual exceeds `mixed_tol` is labeled `Mixed`.
pub fn sector_project(
    bands: &BandSet,
    rot: &RotationOperator,
    mixed_tol: f64,
) -> Vec<SectorVector> {
    let tau = crate::lattice::rotation_data().tau;
    let sigmas = [
        (Sector::One, C64::new(1.0, 0.0)),
        (Sector::Tau, tau),
        (Sector::TauBar, tau.conj()),
    ];
    let n = bands.vectors.nrows();
    let mut out: Vec<SectorVector> = Vec::with_capacity(bands.energies.len());
    for cluster in cluster_bands(&bands.energies, CLUSTER_RELTOL) {
        let c = cluster.len();
        let v = bands.vectors.columns(cluster.start, c).into_owned();
        // W_{ab} = <v_a, R v_b>
        let mut w = DMatrix::<C64>::zeros(c, c);
        let rv: Vec<DVector<C64>> = (0..c).map(|b| rot.apply(&v.column(b).into_owned())).collect();
        for a in 0..c {
            for b in 0..c {
                w[(a, b)] = v.column(a).dotc(&rv[b]);
            }
        }
        let w2 = &w * &w;
        let mut cluster_vectors: Vec<(DVector<C64>, Sector, f64)> = Vec::new();
        for (sector, sigma) in sigmas {
            let sb = sigma.conj();
            let proj = DMatrix::identity(c, c).map(|x: f64| C64::new(x, 0.0)) * C64::new(1.0 / 3.0, 0.0)
                + &w * (sb / 3.0)
                + &w2 * (sb * sb / 3.0);
            // orthonormal basis of the projector range by pivoted Gram-Schmidt
            let mut basis_cols: Vec<DVector<C64>> = Vec::new();
            for col in 0..c {
                let mut u = proj.column(col).into_owned();
                for b in &basis_cols {
                    let coeff = b.dotc(&u);
                    u -= b * coeff;
                }
                let nn = u.norm();
                if nn > 0.2 {
                    u /= C64::new(nn, 0.0);
                    basis_cols.push(u);
                }
            }
            for u in basis_cols {
                // rotate back to full space: x = V u
                let mut x = DVector::<C64>::zeros(n);
                for a in 0..c {
                    x += v.column(a) * u[a];
                }
                let xr = rot.apply(&x);
                let res = (&xr - &x * sigma).norm();
                cluster_vectors.push((x, sector, res));
            }
        }
        // a complete split yields exactly c vectors; otherwise fall back to
        // the original eigenvectors labeled Mixed
        if cluster_vectors.len() != c {
            for (off, b) in cluster.clone().enumerate() {
                let x = v.column(off).into_owned();
                let xr = rot.apply(&x);
                let res = sigmas
                    .iter()
                    .map(|(_, s)| (&xr - &x * *s).norm())
                    .fold(f64::INFINITY, f64::min);
                out.push(SectorVector {
                    band_index: b,
                    energy: bands.energies[b],
                    vector: x,
                    sector: Sector::Mixed,
                    residual: res,
                });
            }
            continue;
        }
        for (off, (mut x, sector, res)) in cluster_vectors.into_iter().enumerate() {
            let b = cluster.start + off;
            let sector = if res > mixed_tol { Sector::Mixed } else { sector };
            let mut xv = x.clone();
            fix_phase(&mut xv);
            x = xv;
            out.push(SectorVector {
                band_index: b,
                energy: bands.energies[b],
                vector: x,
                sector,
                residual: res,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BzVertex;
    use crate::media;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix2;
    use std::f64::consts::PI;

    fn kvertex() -> BzVertex {
        BzVertex::k(&standard_basis())
    }

    #[test]
    fn free_space_is_diagonal_with_triple_degeneracy() {
        let medium = FourierMedium::identity();
        let k = kvertex();
        let p = assemble(&medium, k.coords, 4).unwrap();
        for i in 0..p.matrix.nrows() {
            for j in 0..p.matrix.ncols() {
                if i != j {
                    assert_eq!(p.matrix[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
        let bands = solve_bands(&p, 4).unwrap();
        let e0 = 16.0 * PI * PI / 9.0;
        for b in 0..3 {
            assert_abs_diff_eq!(bands.energies[b], e0, epsilon = 1e-10);
        }
        assert!(bands.energies[3] > e0 + 1.0);
        // closed form matches for several bands
        let free = free_dispersion(k.coords, 4, 6);
        for b in 0..6 {
            assert_abs_diff_eq!(bands.energies.get(b).copied().unwrap_or(free[b]), free[b], epsilon = 1e-10);
        }
    }

    #[test]
    fn gamma_ground_state_is_constant() {
        let medium = FourierMedium::identity();
        let p = assemble(&medium, Vec2::zeros(), 3).unwrap();
        let bands = solve_bands(&p, 1).unwrap();
        assert_abs_diff_eq!(bands.energies[0], 0.0, epsilon = 1e-12);
        let origin = p.table.flat([0, 0]).unwrap();
        assert_abs_diff_eq!(bands.vectors[(origin, 0)].re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn cosine_entry_formula() {
        let medium = media::scalar_cosine_medium(4.0, 1.0).unwrap();
        let k = kvertex();
        let p = assemble(&medium, k.coords, 3).unwrap();
        let row = p.table.flat([0, 0]).unwrap();
        let col = p.table.flat([0, 1]).unwrap();
        // K^T (-1/2 I) (K + k2) = -1/2 K.(RK) = |K|^2/4 = 4 pi^2 / 9
        let want = 4.0 * PI * PI / 9.0;
        assert_abs_diff_eq!(p.matrix[(row, col)].re, want, epsilon = 1e-10);
        assert_abs_diff_eq!(p.matrix[(row, col)].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn hermiticity_of_assembly() {
        let k = Vec2::new(0.37, -1.21);
        for medium in [
            media::scalar_cosine_medium(4.0, 1.0).unwrap(),
            media::from_orbit_coefficients(&[([1, 0], Matrix2::new(-1.0, -1.0, -2.0, -2.0))], 10.0)
                .unwrap(),
            media::standard_c_breaking().add_scaled(&media::scalar_cosine_medium(4.0, 1.0).unwrap(), 1.0),
        ] {
            let p = assemble(&medium, k, 5).unwrap();
            assert!(linalg::hermiticity_defect(&p.matrix) < 1e-10);
        }
        // truncation gate
        let m = media::scalar_cosine_medium(4.0, 1.0).unwrap();
        assert!(matches!(
            assemble(&m, k, 0),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn rotation_commutes_for_equivariant_media() {
        // includes the complex lowest-orbit medium: this pins down the
        // coefficient-level equivariance convention
        let basis = standard_basis();
        for medium in [
            media::scalar_cosine_medium(4.0, 1.0).unwrap(),
            media::from_orbit_coefficients(&[([1, 0], Matrix2::new(-1.0, -1.0, -2.0, -2.0))], 10.0)
                .unwrap(),
        ] {
            for vertex in [BzVertex::gamma(&basis), BzVertex::k(&basis), BzVertex::kprime(&basis)] {
                let p = assemble(&medium, vertex.coords, 6).unwrap();
                let rot = rotation_operator(&vertex, 6).unwrap();
                let defect = commutation_defect(&rot, &p.matrix);
                assert!(
                    defect < 1e-10,
                    "commutation defect {defect:e} at {:?}",
                    vertex.kind
                );
                // unitarity and R^3 = I on the sub-box
                let r = rot.matrix_on_sub_box();
                let id = DMatrix::<C64>::identity(r.nrows(), r.ncols());
                assert!(((&r * &r * &r) - &id).norm() < 1e-14);
                assert!((r.adjoint() * &r - id).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn free_space_sectors_at_k() {
        let medium = FourierMedium::identity();
        let vertex = kvertex();
        let p = assemble(&medium, vertex.coords, 4).unwrap();
        let bands = solve_bands(&p, 3).unwrap();
        let rot = rotation_operator(&vertex, 4).unwrap();
        let labeled = sector_project(&bands, &rot, 1e-8);
        let mut sectors: Vec<Sector> = labeled.iter().map(|s| s.sector).collect();
        sectors.sort_by_key(|s| match s {
            Sector::One => 0,
            Sector::Tau => 1,
            Sector::TauBar => 2,
            Sector::Mixed => 3,
        });
        assert_eq!(sectors, vec![Sector::One, Sector::Tau, Sector::TauBar]);
        // the tau vector matches Phi_tau^(0): coefficients (1, taubar, tau)/sqrt3
        // on the orbit {(0,0), (0,1), (-1,0)} of K, up to overall phase
        let tau = crate::lattice::rotation_data().tau;
        let phi_tau = labeled.iter().find(|s| s.sector == Sector::Tau).unwrap();
        let c0 = phi_tau.vector[p.table.flat([0, 0]).unwrap()];
        let c1 = phi_tau.vector[p.table.flat([0, 1]).unwrap()];
        let c2 = phi_tau.vector[p.table.flat([-1, 0]).unwrap()];
        assert_abs_diff_eq!(c0.norm(), 1.0 / 3.0f64.sqrt(), epsilon = 1e-10);
        assert!((c1 / c0 - tau.conj()).norm() < 1e-10);
        assert!((c2 / c0 - tau).norm() < 1e-10);
    }

    #[test]
    fn degenerate_pair_sectors_for_cosine_medium() {
        let medium = media::scalar_cosine_medium(1.0, 0.05).unwrap();
        let vertex = kvertex();
        let p = assemble(&medium, vertex.coords, 6).unwrap();
        let bands = solve_bands(&p, 3).unwrap();
        // bands 1-2 nearly equal, band 3 split upward (eps > 0)
        assert!((bands.energies[1] - bands.energies[0]).abs() < 1e-8);
        assert!(bands.energies[2] - bands.energies[1] > 1e-2);
        let rot = rotation_operator(&vertex, 6).unwrap();
        let labeled = sector_project(&bands, &rot, 1e-6);
        let pair: Vec<Sector> = labeled.iter().take(2).map(|s| s.sector).collect();
        assert!(pair.contains(&Sector::Tau) && pair.contains(&Sector::TauBar));
        assert_eq!(labeled[2].sector, Sector::One);
    }

    #[test]
    fn k_and_kprime_spectra_coincide_for_real_media() {
        let medium = media::scalar_cosine_medium(4.0, 1.0).unwrap();
        let basis = standard_basis();
        let pk = assemble(&medium, BzVertex::k(&basis).coords, 6).unwrap();
        let pkp = assemble(&medium, BzVertex::kprime(&basis).coords, 6).unwrap();
        let bk = solve_bands(&pk, 6).unwrap();
        let bkp = solve_bands(&pkp, 6).unwrap();
        for b in 0..6 {
            assert_abs_diff_eq!(bk.energies[b], bkp.energies[b], epsilon = 1e-8);
        }
    }

    #[test]
    fn band_path_free_space_and_monotonicity() {
        let medium = FourierMedium::identity();
        let basis = standard_basis();
        let k = BzVertex::k(&basis).coords;
        let rows = band_path(&medium, &[Vec2::zeros(), k], 6, 2, 4).unwrap();
        assert_eq!(rows.len(), 7);
        for row in &rows {
            let kv = Vec2::new(row.kx, row.ky);
            let free = free_dispersion(kv, 4, 2);
            assert_abs_diff_eq!(row.energies[0], free[0], epsilon = 1e-10);
        }
        // Galerkin monotonicity in the truncation for a nontrivial medium
        let medium = media::scalar_cosine_medium(4.0, 1.0).unwrap();
        let p6 = assemble(&medium, k, 6).unwrap();
        let p8 = assemble(&medium, k, 8).unwrap();
        let b6 = solve_bands(&p6, 4).unwrap();
        let b8 = solve_bands(&p8, 4).unwrap();
        for b in 0..4 {
            assert!(b8.energies[b] <= b6.energies[b] + 1e-9);
        }
    }
}
