//! Dirac-point detection and certification, Fermi velocity, conical fits,
//! low-contrast predictions, and gap opening / persistence under
//! symmetry-breaking perturbations.

use nalgebra::{DMatrix, DVector, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{
    self, assemble, assemble_perturbed, cluster_bands, rotation_operator, sector_project,
    solve_bands, BlochProblem, IndexTable, Sector, CLUSTER_RELTOL,
};
use crate::lattice::{standard_basis, BzVertex, Vec2, VertexKind};
use crate::linalg::C64;
use crate::media::{check_symmetries, FourierMedium};
use crate::{Error, Result};

/// Diagnostics of the conical fit on a kappa-circle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConicalFit {
    pub radius: f64,
    pub fitted_slope: f64,
    pub max_relative_residual: f64,
}

/// Outcome of a certified Dirac-point search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiracReport {
    pub vertex: VertexKind,
    pub e_d: f64,
    /// 1-based indices of the touching dispersion surfaces.
    pub band_indices: (usize, usize),
    /// Rotation eigenvalues of (Phi1, Phi2) were verified to be (tau, taubar).
    pub sectors_verified: bool,
    pub no_sector1_at_ed: bool,
    pub upsilon_f: f64,
    pub conical_fit: ConicalFit,
}

/// A certified Dirac point together with the data downstream modules need.
#[derive(Debug, Clone)]
pub struct DiracPoint {
    pub vertex: BzVertex,
    pub trunc: i64,
    pub report: DiracReport,
    /// tau-sector eigenvector coefficients.
    pub phi1: DVector<C64>,
    /// PC partner, phi2 = conj(phi1).
    pub phi2: DVector<C64>,
    pub table: IndexTable,
}

/// The two components of the first-order operator
/// A (1/i)grad + (1/i)grad . A in the K-star pseudo-periodic basis.
///
/// Entry (m, n) of component j is [A_{m-n} (K + n kvec)]_j
/// + [A_{m-n}^T (K + m kvec)]_j; each component is Hermitian for Hermitian
/// media.
pub fn assemble_script_a(
    medium: &FourierMedium,
    vertex: &BzVertex,
    trunc: i64,
) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    if trunc < medium.max_index() {
        return Err(Error::TruncationTooSmall {
            max_index: medium.max_index(),
            trunc,
        });
    }
    let basis = standard_basis();
    let table = IndexTable::new(trunc);
    let n = table.len();
    let km: Vec<Vec2> = (0..n)
        .map(|f| vertex.coords + basis.dual(table.index(f)))
        .collect();
    let mut a1 = DMatrix::<C64>::zeros(n, n);
    let mut a2 = DMatrix::<C64>::zeros(n, n);
    for (&p, ap) in medium.iter() {
        let apt = ap.transpose();
        for col in 0..n {
            let mc = table.index(col);
            if let Some(row) = table.flat([mc[0] + p[0], mc[1] + p[1]]) {
                let kn = km[col];
                let kmv = km[row];
                let first = [
                    ap[(0, 0)] * kn.x + ap[(0, 1)] * kn.y,
                    ap[(1, 0)] * kn.x + ap[(1, 1)] * kn.y,
                ];
                let second = [
                    apt[(0, 0)] * kmv.x + apt[(0, 1)] * kmv.y,
                    apt[(1, 0)] * kmv.x + apt[(1, 1)] * kmv.y,
                ];
                a1[(row, col)] += first[0] + second[0];
                a2[(row, col)] += first[1] + second[1];
            }
        }
    }
    Ok((a1, a2))
}

/// <phi, M psi> on coefficient vectors.
fn quad(phi: &DVector<C64>, m: &DMatrix<C64>, psi: &DVector<C64>) -> C64 {
    phi.dotc(&(m * psi))
}

/// lambda-sharp = (1/2) conj(<Phi1, A Phi2>) . (1, i); its modulus is the
/// Fermi velocity and its phase fixes the gauge of Phi1.
fn lambda_sharp(a1: &DMatrix<C64>, a2: &DMatrix<C64>, phi1: &DVector<C64>, phi2: &DVector<C64>) -> C64 {
    let v1 = quad(phi1, a1, phi2);
    let v2 = quad(phi1, a2, phi2);
    0.5 * (v1.conj() + Complex64::new(0.0, 1.0) * v2.conj())
}

/// Relative deviation of <Phi1, A Phi2> from a complex multiple of (1, i).
pub fn off_diagonal_structure_residual(
    a1: &DMatrix<C64>,
    a2: &DMatrix<C64>,
    phi1: &DVector<C64>,
    phi2: &DVector<C64>,
) -> f64 {
    let v1 = quad(phi1, a1, phi2);
    let v2 = quad(phi1, a2, phi2);
    let norm = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    // projection onto span{(1, i)}: coefficient (v1 - i v2)/2
    let c = 0.5 * (v1 - Complex64::new(0.0, 1.0) * v2);
    let r1 = v1 - c;
    let r2 = v2 - Complex64::new(0.0, 1.0) * c;
    ((r1.norm_sqr() + r2.norm_sqr()).sqrt()) / norm
}

/// Default search window [0.5, 1.5] * a0 |K|^2 scaled by the mean coefficient.
pub fn default_window(medium: &FourierMedium, vertex: &BzVertex) -> (f64, f64) {
    let e_free = medium.mean_scale().max(f64::MIN_POSITIVE) * vertex.coords.norm_squared();
    (0.5 * e_free, 1.5 * e_free)
}

/// Locates and certifies the Dirac point of a honeycomb medium at a vertex.
///
/// Finds the lowest two-fold degenerate eigenvalue inside the window whose
/// sector labels are {tau, taubar}, builds Phi2 as the PC partner of the
/// tau-sector vector, fixes the phase so that lambda-sharp is real positive,
/// and cross-checks the conical dispersion on a small circle.
pub fn find_dirac(
    medium: &FourierMedium,
    vertex: &BzVertex,
    trunc: i64,
    search_window: Option<(f64, f64)>,
) -> Result<DiracPoint> {
    let sym = check_symmetries(medium);
    if !(sym.hermitian && sym.pc_invariant && sym.r_equivariant) {
        return Err(Error::InvalidMedium(
            "find_dirac requires a Hermitian, PC-invariant, rotation-equivariant medium".into(),
        ));
    }
    let (lo, hi) = search_window.unwrap_or_else(|| default_window(medium, vertex));
    let problem = assemble(medium, vertex.coords, trunc)?;
    let n = problem.matrix.nrows();
    let count = n.min(18);
    let bands = solve_bands(&problem, count)?;
    let rot = rotation_operator(vertex, trunc)?;
    let labeled = sector_project(&bands, &rot, 1e-6);

    let clusters = cluster_bands(&bands.energies, CLUSTER_RELTOL);
    for cluster in clusters {
        let e_mean: f64 =
            bands.energies[cluster.clone()].iter().sum::<f64>() / cluster.len() as f64;
        if e_mean < lo || e_mean > hi {
            continue;
        }
        if cluster.len() != 2 {
            if cluster.len() > 2
                && labeled[cluster.clone()]
                    .iter()
                    .any(|s| s.sector == Sector::One)
                && labeled[cluster.clone()]
                    .iter()
                    .any(|s| s.sector == Sector::Tau)
            {
                return Err(Error::SectorOneContamination);
            }
            continue;
        }
        let pair = &labeled[cluster.clone()];
        if pair.iter().any(|s| s.sector == Sector::One) {
            return Err(Error::SectorOneContamination);
        }
        let Some(tau_vec) = pair.iter().find(|s| s.sector == Sector::Tau) else {
            continue;
        };
        if !pair.iter().any(|s| s.sector == Sector::TauBar) {
            continue;
        }

        let mut phi1 = tau_vec.vector.clone();
        let (a1, a2) = assemble_script_a(medium, vertex, trunc)?;
        // phase convention: lambda-sharp real positive
        let lam = lambda_sharp(&a1, &a2, &phi1, &phi1.map(|c| c.conj()));
        let theta = 0.5 * lam.arg();
        phi1 *= Complex64::from_polar(1.0, -theta);
        let phi2 = phi1.map(|c| c.conj());
        let lam = lambda_sharp(&a1, &a2, &phi1, &phi2);
        let upsilon_f = lam.re;
        if upsilon_f <= 1e-10 || lam.im.abs() > 1e-8 * (1.0 + upsilon_f) {
            return Err(Error::Eigensolver(format!(
                "non-degeneracy failed: lambda-sharp = {lam} not real positive"
            )));
        }

        // structural cross-checks of Phi2
        let overlap = phi1.dotc(&phi2).norm();
        let h_res = (&problem.matrix * &phi2 - &phi2 * Complex64::new(e_mean, 0.0)).norm();
        if overlap > 1e-8 || h_res > 1e-6 * (1.0 + e_mean.abs()) {
            return Err(Error::Eigensolver(format!(
                "PC partner is not an orthogonal cluster member (overlap {overlap:e}, residual {h_res:e})"
            )));
        }

        let b_star = cluster.start + 1; // 1-based
        let radius = 1e-3 * vertex.coords.norm().max(1.0);
        let fit = conical_fit(medium, vertex, e_mean, cluster.start, radius, 12, trunc)?;

        let report = DiracReport {
            vertex: vertex.kind,
            e_d: e_mean,
            band_indices: (b_star, b_star + 1),
            sectors_verified: true,
            no_sector1_at_ed: true,
            upsilon_f,
            conical_fit: fit,
        };
        return Ok(DiracPoint {
            vertex: vertex.clone(),
            trunc,
            report,
            phi1,
            phi2,
            table: problem.table,
        });
    }
    Err(Error::NoDiracPoint { lo, hi })
}

/// Samples the band pair on a circle of the given radius and fits
/// E_pm - E_D = +-s |kappa|.
pub fn conical_fit(
    medium: &FourierMedium,
    vertex: &BzVertex,
    e_d: f64,
    band_lo: usize,
    radius: f64,
    n_angles: usize,
    trunc: i64,
) -> Result<ConicalFit> {
    let slopes: Vec<Result<(f64, f64)>> = (0..n_angles)
        .into_par_iter()
        .map(|a| {
            let th = std::f64::consts::TAU * a as f64 / n_angles as f64;
            let kappa = Vec2::new(radius * th.cos(), radius * th.sin());
            let p = assemble(medium, vertex.coords + kappa, trunc)?;
            let bands = solve_bands(&p, band_lo + 2)?;
            let e_minus = bands.energies[band_lo];
            let e_plus = bands.energies[band_lo + 1];
            Ok(((e_plus - e_d) / radius, (e_d - e_minus) / radius))
        })
        .collect();
    let mut all = Vec::with_capacity(2 * n_angles);
    for s in slopes {
        let (up, down) = s?;
        if up <= 0.0 || down <= 0.0 {
            return Err(Error::BandTracking(format!(
                "band ordering lost inside fit radius {radius}: slopes ({up}, {down})"
            )));
        }
        all.push(up);
        all.push(down);
    }
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let max_rel = all
        .iter()
        .map(|s| (s - mean).abs() / mean)
        .fold(0.0, f64::max);
    Ok(ConicalFit {
        radius,
        fitted_slope: mean,
        max_relative_residual: max_rel,
    })
}

// ---------------------------------------------------------------------------
// Low-contrast analytic predictions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowContrastPrediction {
    pub e_d: f64,
    pub e_tilde: f64,
    /// true: Dirac point between bands 1 and 2; false: between 2 and 3.
    pub between_bands_1_2: bool,
}

/// First-order Dirac and sector-1 energies of I + eps A1.
///
/// E_D = |K|^2 + eps (K^T A1_{0,0} K - K^T A1_{0,-1} RK) and
/// E~  = |K|^2 + eps (K^T A1_{0,0} K + 2 K^T A1_{0,-1} RK); the band pair is
/// (1, 2) exactly when eps K^T A1_{0,-1} RK > 0.
pub fn low_contrast_predict(a1: &FourierMedium, eps: f64) -> Result<LowContrastPrediction> {
    let basis = standard_basis();
    let kv = BzVertex::k(&basis).coords;
    let rk = crate::lattice::rotation_data().r * kv;
    let qform = |m: crate::lattice::Index2, right: Vec2| -> C64 {
        let a = a1.coeff(m);
        let v0 = a[(0, 0)] * right.x + a[(0, 1)] * right.y;
        let v1 = a[(1, 0)] * right.x + a[(1, 1)] * right.y;
        Complex64::new(kv.x, 0.0) * v0 + Complex64::new(kv.y, 0.0) * v1
    };
    let diag = qform([0, 0], kv);
    let beta = qform([0, -1], rk);
    if beta.im.abs() > 1e-10 * (1.0 + beta.norm()) {
        return Err(Error::InvalidMedium(format!(
            "K^T A_{{0,-1}} RK = {beta} is not real; not a honeycomb perturbation"
        )));
    }
    if beta.norm() < 1e-12 {
        return Err(Error::DegenerateLowContrast);
    }
    let k2 = kv.norm_squared();
    Ok(LowContrastPrediction {
        e_d: k2 + eps * (diag.re - beta.re),
        e_tilde: k2 + eps * (diag.re + 2.0 * beta.re),
        between_bands_1_2: eps * beta.re > 0.0,
    })
}

// ---------------------------------------------------------------------------
// Perturbation matrix elements, gap opening, persistence
// ---------------------------------------------------------------------------

/// The 2x2 matrix <Phi_a, L^B Phi_b> on the Dirac pair.
pub fn perturbation_matrix_elements(
    point: &DiracPoint,
    perturbation: &FourierMedium,
) -> Result<nalgebra::Matrix2<C64>> {
    let lb = assemble(perturbation, point.vertex.coords, point.trunc)?;
    let m11 = quad(&point.phi1, &lb.matrix, &point.phi1);
    let m12 = quad(&point.phi1, &lb.matrix, &point.phi2);
    let m21 = quad(&point.phi2, &lb.matrix, &point.phi1);
    let m22 = quad(&point.phi2, &lb.matrix, &point.phi2);
    Ok(nalgebra::Matrix2::new(m11, m12, m21, m22))
}

/// theta-sharp = <Phi1, L^B Phi1> for a PC-antisymmetric perturbation.
pub fn theta_sharp(point: &DiracPoint, perturbation: &FourierMedium) -> Result<f64> {
    let sym = check_symmetries(perturbation);
    if !perturbation.is_zero() && !sym.pc_antisymmetric {
        return Err(Error::InvalidMedium(
            "theta_sharp requires a PC-antisymmetric perturbation".into(),
        ));
    }
    let m = perturbation_matrix_elements(point, perturbation)?;
    let scale = m[(0, 0)].norm().max(1.0);
    if m[(0, 0)].im.abs() > 1e-10 * scale {
        return Err(Error::ThetaSharpNotReal(m[(0, 0)].im));
    }
    Ok(m[(0, 0)].re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignRelation {
    Same,
    Opposite,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapReport {
    pub delta: f64,
    pub theta_sharp_k: f64,
    pub theta_sharp_kp: f64,
    pub measured_gap: f64,
    pub predicted_gap: f64,
    pub sign_relation: SignRelation,
}

/// Measures the gap opened at the vertex by A + delta B for each delta and
/// compares with the first-order prediction 2 |delta theta-sharp|.
pub fn gap_analysis(
    medium: &FourierMedium,
    perturbation: &FourierMedium,
    delta_list: &[f64],
    vertex: &BzVertex,
    trunc: i64,
) -> Result<Vec<GapReport>> {
    let basis = standard_basis();
    let point = find_dirac(medium, vertex, trunc, None)?;
    let other = BzVertex::of_kind(
        match vertex.kind {
            VertexKind::K => VertexKind::Kprime,
            VertexKind::Kprime => VertexKind::K,
            VertexKind::Gamma => {
                return Err(Error::InvalidParameter(
                    "gap analysis requires a K or K' vertex".into(),
                ))
            }
        },
        &basis,
    );
    let point_other = find_dirac(medium, &other, trunc, None)?;
    let th_here = theta_sharp(&point, perturbation)?;
    let th_other = theta_sharp(&point_other, perturbation)?;
    let (theta_sharp_k, theta_sharp_kp) = match vertex.kind {
        VertexKind::K => (th_here, th_other),
        _ => (th_other, th_here),
    };
    let sign_relation = if th_here * th_other > 0.0 {
        SignRelation::Same
    } else {
        SignRelation::Opposite
    };
    let b_lo = point.report.band_indices.0 - 1;
    delta_list
        .par_iter()
        .map(|&delta| {
            let p = assemble_perturbed(medium, perturbation, delta, vertex.coords, trunc)?;
            let bands = solve_bands(&p, b_lo + 2)?;
            let measured_gap = bands.energies[b_lo + 1] - bands.energies[b_lo];
            Ok(GapReport {
                delta,
                theta_sharp_k,
                theta_sharp_kp,
                measured_gap,
                predicted_gap: 2.0 * (delta * th_here).abs(),
                sign_relation,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PersistenceProbe {
    pub min_gap: f64,
    pub argmin_kappa: [f64; 2],
    pub shifted_e: f64,
}

/// Minimizes the band gap of A + delta B over a kappa-disk for a
/// PC-preserving perturbation; a persisting Dirac point shows up as a gap
/// minimum at the first-order shifted location.
pub fn persistence_probe(
    medium: &FourierMedium,
    perturbation: &FourierMedium,
    delta: f64,
    vertex: &BzVertex,
    trunc: i64,
    search_radius: f64,
) -> Result<PersistenceProbe> {
    let sym = check_symmetries(perturbation);
    if !perturbation.is_zero() && !sym.pc_invariant {
        return Err(Error::InvalidMedium(
            "persistence probe requires a PC-invariant perturbation".into(),
        ));
    }
    let point = find_dirac(medium, vertex, trunc, None)?;
    let b_lo = point.report.band_indices.0 - 1;
    let combined = medium.add_scaled(perturbation, delta);
    let gap_at = |kappa: Vec2| -> Result<(f64, f64)> {
        let p = assemble(&combined, vertex.coords + kappa, trunc)?;
        let bands = solve_bands(&p, b_lo + 2)?;
        Ok((
            bands.energies[b_lo + 1] - bands.energies[b_lo],
            0.5 * (bands.energies[b_lo + 1] + bands.energies[b_lo]),
        ))
    };

    let n_grid = 41i64;
    let pts: Vec<Vec2> = (0..n_grid * n_grid)
        .map(|idx| {
            let i = idx / n_grid;
            let j = idx % n_grid;
            Vec2::new(
                search_radius * (2.0 * i as f64 / (n_grid - 1) as f64 - 1.0),
                search_radius * (2.0 * j as f64 / (n_grid - 1) as f64 - 1.0),
            )
        })
        .collect();
    let gaps: Vec<Result<(f64, f64)>> = pts.par_iter().map(|&k| gap_at(k)).collect();
    let mut best = (f64::INFINITY, Vec2::zeros(), 0.0);
    for (i, g) in gaps.into_iter().enumerate() {
        let (gap, mid) = g?;
        if gap < best.0 {
            best = (gap, pts[i], mid);
        }
    }
    // golden-section polish along each axis, two sweeps
    let golden = 0.5 * (3.0 - 5.0f64.sqrt());
    let mut center = best.1;
    let mut half = 2.0 * search_radius / (n_grid - 1) as f64;
    for _ in 0..2 {
        for axis in 0..2 {
            let dir = if axis == 0 { Vec2::new(1.0, 0.0) } else { Vec2::new(0.0, 1.0) };
            let (mut a, mut b) = (-half, half);
            let mut x1 = a + golden * (b - a);
            let mut x2 = b - golden * (b - a);
            let mut f1 = gap_at(center + dir * x1)?.0;
            let mut f2 = gap_at(center + dir * x2)?.0;
            for _ in 0..20 {
                if f1 < f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = a + golden * (b - a);
                    f1 = gap_at(center + dir * x1)?.0;
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = b - golden * (b - a);
                    f2 = gap_at(center + dir * x2)?.0;
                }
            }
            let x = 0.5 * (a + b);
            center += dir * x;
        }
        half *= 0.25;
    }
    let (min_gap, shifted_e) = gap_at(center)?;
    let (best_gap, best_mid) = if min_gap <= best.0 {
        (min_gap, shifted_e)
    } else {
        center = best.1;
        (best.0, best.2)
    };
    Ok(PersistenceProbe {
        min_gap: best_gap,
        argmin_kappa: [center.x, center.y],
        shifted_e: best_mid,
    })
}

// ---------------------------------------------------------------------------
// K vs K' comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KkPrimeComparison {
    pub e_d_k: f64,
    pub e_d_kp: f64,
    pub equal: bool,
    /// false if either vertex fell back to an uncertified degenerate level
    /// (e.g. the free-space triple intersection).
    pub certified: bool,
}

/// Dirac energies at K and K' and an equality verdict at tolerance 1e-6.
pub fn kkprime_compare(medium: &FourierMedium, trunc: i64) -> Result<KkPrimeComparison> {
    let basis = standard_basis();
    let mut certified = true;
    let mut energy_at = |vertex: BzVertex| -> Result<f64> {
        match find_dirac(medium, &vertex, trunc, None) {
            Ok(point) => Ok(point.report.e_d),
            Err(Error::SectorOneContamination) => {
                // degenerate beyond a pair (e.g. free space): report the
                // lowest degenerate level in the window instead
                certified = false;
                let p = assemble(medium, vertex.coords, trunc)?;
                let bands = solve_bands(&p, p.matrix.nrows().min(12))?;
                let (lo, hi) = default_window(medium, &vertex);
                for cluster in cluster_bands(&bands.energies, CLUSTER_RELTOL) {
                    if cluster.len() >= 2 {
                        let e = bands.energies[cluster.start];
                        if e >= lo && e <= hi {
                            return Ok(e);
                        }
                    }
                }
                Err(Error::NoDiracPoint { lo, hi })
            }
            Err(e) => Err(e),
        }
    };
    let e_d_k = energy_at(BzVertex::k(&basis))?;
    let e_d_kp = energy_at(BzVertex::kprime(&basis))?;
    Ok(KkPrimeComparison {
        e_d_k,
        e_d_kp,
        equal: (e_d_k - e_d_kp).abs() <= 1e-6,
        certified,
    })
}
