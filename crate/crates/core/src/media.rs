//! Matrix constitutive laws A(x) stored as finite Fourier-coefficient maps,
//! their symmetry classification, and constructors for the standard media.
//!
//! A medium is A(x) = sum_m A_m e^{i m.kvec.x} with 2x2 complex matrices A_m
//! supported on a finite index box. All assembly formulas downstream consume
//! the coefficients directly; real-space evaluation is derived.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::lattice::{self, rotate_index, standard_basis, Index2};
use crate::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type ScalarCoeffs = BTreeMap<Index2, C64>;

pub fn mat2_real(m: &Matrix2<f64>) -> Mat2 {
    m.map(|x| C64::new(x, 0.0))
}

pub fn sigma2() -> Mat2 {
    Matrix2::new(
        C64::new(0.0, 0.0),
        C64::new(0.0, -1.0),
        C64::new(0.0, 1.0),
        C64::new(0.0, 0.0),
    )
}

pub fn identity2() -> Mat2 {
    Matrix2::identity()
}

/// Fourier-coefficient representation of a 2x2 matrix coefficient A(x).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMedium {
    coeffs: BTreeMap<Index2, Mat2>,
    max_index: i64,
}

impl FourierMedium {
    pub fn from_coeffs(coeffs: BTreeMap<Index2, Mat2>) -> FourierMedium {
        let mut pruned = BTreeMap::new();
        let mut max_index = 0i64;
        for (m, a) in coeffs {
            if a.iter().any(|c| c.norm() > 0.0) {
                max_index = max_index.max(m[0].abs()).max(m[1].abs());
                pruned.insert(m, a);
            }
        }
        FourierMedium {
            coeffs: pruned,
            max_index,
        }
    }

    pub fn zero() -> FourierMedium {
        FourierMedium {
            coeffs: BTreeMap::new(),
            max_index: 0,
        }
    }

    /// The constant medium a0 * I.
    pub fn constant(a0: f64) -> FourierMedium {
        let mut coeffs = BTreeMap::new();
        coeffs.insert([0, 0], identity2() * C64::new(a0, 0.0));
        FourierMedium::from_coeffs(coeffs)
    }

    pub fn identity() -> FourierMedium {
        FourierMedium::constant(1.0)
    }

    pub fn coeff(&self, m: Index2) -> Mat2 {
        self.coeffs.get(&m).copied().unwrap_or_else(Mat2::zeros)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Index2, &Mat2)> {
        self.coeffs.iter()
    }

    pub fn max_index(&self) -> i64 {
        self.max_index
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Mean coefficient a0 = tr(A_0)/2 (real part).
    pub fn mean_scale(&self) -> f64 {
        let a0 = self.coeff([0, 0]);
        0.5 * (a0[(0, 0)].re + a0[(1, 1)].re)
    }

    /// A(x) evaluated at a point.
    pub fn eval(&self, x: Vector2<f64>) -> Mat2 {
        let basis = standard_basis();
        let mut acc = Mat2::zeros();
        for (&m, a) in &self.coeffs {
            let phase = C64::from_polar(1.0, basis.dual(m).dot(&x));
            acc += a * phase;
        }
        acc
    }

    /// self + s * other, coefficient-wise.
    pub fn add_scaled(&self, other: &FourierMedium, s: f64) -> FourierMedium {
        let mut coeffs = self.coeffs.clone();
        for (&m, b) in &other.coeffs {
            *coeffs.entry(m).or_insert_with(Mat2::zeros) += b * C64::new(s, 0.0);
        }
        FourierMedium::from_coeffs(coeffs)
    }

    pub fn scale(&self, s: f64) -> FourierMedium {
        FourierMedium::from_coeffs(
            self.coeffs
                .iter()
                .map(|(&m, a)| (m, a * C64::new(s, 0.0)))
                .collect(),
        )
    }
}

/// Builds a honeycomb medium from one real matrix per rotation orbit.
///
/// A(x) = a0 I + sum over reps of
///   C e^{i m.k x} + R C R* e^{i (Rm).k x} + R* C R e^{i (R^2 m).k x}
/// plus the Hermitian completion A_{-m} = A_m^T. The result is Hermitian,
/// real-coefficient and rotation-equivariant by construction.
pub fn from_orbit_coefficients(reps: &[(Index2, Matrix2<f64>)], a0: f64) -> Result<FourierMedium> {
    if a0 <= 0.0 {
        return Err(Error::InvalidMedium(format!("a0 must be positive, got {a0}")));
    }
    let r = lattice::rotation_data().r;
    let rt = r.transpose();
    let mut coeffs: BTreeMap<Index2, Mat2> = BTreeMap::new();
    coeffs.insert([0, 0], identity2() * C64::new(a0, 0.0));
    for &(m, c) in reps {
        if m == [0, 0] {
            return Err(Error::InvalidMedium("orbit representative must be nonzero".into()));
        }
        let ct = c.transpose();
        let entries = [
            (m, c),
            (rotate_index(m), r * c * rt),
            (rotate_index(rotate_index(m)), rt * c * r),
            ([-m[0], -m[1]], ct),
            ([-rotate_index(m)[0], -rotate_index(m)[1]], r * ct * rt),
            (
                [
                    -rotate_index(rotate_index(m))[0],
                    -rotate_index(rotate_index(m))[1],
                ],
                rt * ct * r,
            ),
        ];
        for (idx, mat) in entries {
            *coeffs.entry(idx).or_insert_with(Mat2::zeros) += mat2_real(&mat);
        }
    }
    Ok(FourierMedium::from_coeffs(coeffs))
}

/// a(x) I with a(x) = a0 - eps (cos k1.x + cos k2.x + cos (k1+k2).x).
///
/// The six nonzero off-origin coefficients are -eps/2 times the identity on
/// the indices +-(1,0), +-(0,1), +-(1,1).
pub fn scalar_cosine_medium(a0: f64, eps: f64) -> Result<FourierMedium> {
    if a0 <= 3.0 * eps.abs() {
        let min_eig = sampled_min_eig(a0, eps);
        return Err(Error::EllipticityViolated {
            min_eig,
            x: 0.0,
            y: 0.0,
        });
    }
    let mut coeffs: BTreeMap<Index2, Mat2> = BTreeMap::new();
    coeffs.insert([0, 0], identity2() * C64::new(a0, 0.0));
    let half = C64::new(-0.5 * eps, 0.0);
    for m in [[1i64, 0i64], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]] {
        coeffs.insert(m, identity2() * half);
    }
    Ok(FourierMedium::from_coeffs(coeffs))
}

fn sampled_min_eig(a0: f64, eps: f64) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..64 {
        for j in 0..64 {
            let t1 = i as f64 / 64.0 * std::f64::consts::TAU;
            let t2 = j as f64 / 64.0 * std::f64::consts::TAU;
            let v = a0 - eps * (t1.cos() + t2.cos() + (t1 + t2).cos());
            min = min.min(v);
        }
    }
    min
}

/// The Appendix-style lowest-orbit complex medium with one generating matrix.
pub fn lowest_orbit_medium(c: Matrix2<f64>, a0: f64) -> Result<FourierMedium> {
    from_orbit_coefficients(&[([1, 0], c)], a0)
}

fn check_scalar_r_invariance(coeffs: &ScalarCoeffs, tol: f64) -> Result<()> {
    for (&m, &v) in coeffs {
        let w = coeffs.get(&rotate_index(m)).copied().unwrap_or_default();
        if (v - w).norm() > tol {
            return Err(Error::InvalidMedium(format!(
                "scalar profile not rotation-invariant at coefficient {m:?}"
            )));
        }
    }
    Ok(())
}

/// B(x) = sigma_2 mu1(x) for mu1 real, even and rotation-invariant.
///
/// The result commutes with parity and anticommutes with conjugation, hence
/// is PC-antisymmetric.
pub fn c_breaking_perturbation(mu1: &ScalarCoeffs) -> Result<FourierMedium> {
    let tol = 1e-12;
    for (&m, &v) in mu1 {
        let neg = mu1.get(&[-m[0], -m[1]]).copied().unwrap_or_default();
        if (v - neg).norm() > tol {
            return Err(Error::InvalidMedium(format!(
                "mu1 must be even: coefficient {m:?} vs its negative differ"
            )));
        }
        if v.im.abs() > tol {
            return Err(Error::InvalidMedium(format!(
                "mu1 must be real and even: coefficient {m:?} is not real"
            )));
        }
    }
    check_scalar_r_invariance(mu1, tol)?;
    let s2 = sigma2();
    Ok(FourierMedium::from_coeffs(
        mu1.iter().map(|(&m, &v)| (m, s2 * v)).collect(),
    ))
}

/// B(x) = mu2(x) I for mu2 real, odd and rotation-invariant.
pub fn p_breaking_perturbation(mu2: &ScalarCoeffs) -> Result<FourierMedium> {
    let tol = 1e-12;
    for (&m, &v) in mu2 {
        let neg = mu2.get(&[-m[0], -m[1]]).copied().unwrap_or_default();
        if (v + neg).norm() > tol {
            return Err(Error::InvalidMedium(format!(
                "mu2 must be odd: coefficient {m:?} plus its negative is nonzero"
            )));
        }
        if v.re.abs() > tol {
            return Err(Error::InvalidMedium(format!(
                "mu2 must be real and odd: coefficient {m:?} has a real part"
            )));
        }
    }
    check_scalar_r_invariance(mu2, tol)?;
    Ok(FourierMedium::from_coeffs(
        mu2.iter().map(|(&m, &v)| (m, identity2() * v)).collect(),
    ))
}

/// b_c(x) = cos k1.x + cos k2.x + cos (k1+k2).x as scalar coefficients.
pub fn cosine_sum_coeffs() -> ScalarCoeffs {
    let mut c = ScalarCoeffs::new();
    for m in [[1i64, 0i64], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]] {
        c.insert(m, C64::new(0.5, 0.0));
    }
    c
}

/// b_p(x) = sin k1.x + sin k2.x - sin (k1+k2).x as scalar coefficients.
pub fn sine_sum_coeffs() -> ScalarCoeffs {
    let mut c = ScalarCoeffs::new();
    let mi = C64::new(0.0, -0.5);
    let pi_ = C64::new(0.0, 0.5);
    c.insert([1, 0], mi);
    c.insert([-1, 0], pi_);
    c.insert([0, 1], mi);
    c.insert([0, -1], pi_);
    c.insert([1, 1], pi_);
    c.insert([-1, -1], mi);
    c
}

/// The conjugation-breaking perturbation sigma_2 b_c(x) of the figure media.
pub fn standard_c_breaking() -> FourierMedium {
    c_breaking_perturbation(&cosine_sum_coeffs()).expect("b_c is real, even, R-invariant")
}

/// The parity-breaking perturbation b_p(x) I of the figure media.
pub fn standard_p_breaking() -> FourierMedium {
    p_breaking_perturbation(&sine_sum_coeffs()).expect("b_p is real, odd, R-invariant")
}

// ---------------------------------------------------------------------------
// Symmetry classification
// ---------------------------------------------------------------------------

/// Flags derived from coefficient identities, plus sampled elliptic bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub hermitian: bool,
    /// PC[A] = A, i.e. all coefficients real.
    pub pc_invariant: bool,
    /// A(R*x) = R* A(x) R.
    pub r_equivariant: bool,
    /// A(R*x) = A(x).
    pub r_invariant: bool,
    /// PC L^B = -L^B PC, i.e. all coefficients purely imaginary.
    pub pc_antisymmetric: bool,
    /// P L^B = -L^B P and [C, L^B] = 0 (parity-breaking class).
    pub p_antisymmetric_c_symmetric: bool,
    /// [P, L^B] = 0 and C L^B = -L^B C (conjugation-breaking class).
    pub p_symmetric_c_antisymmetric: bool,
    /// (min, max) eigenvalue of the Hermitian part of A(x) over a 64x64 grid.
    pub elliptic_bounds: (f64, f64),
}

impl SymmetryReport {
    pub fn is_honeycomb(&self) -> bool {
        self.hermitian && self.pc_invariant && self.r_equivariant && self.elliptic_bounds.0 > 0.0
    }
}

pub fn check_symmetries(medium: &FourierMedium) -> SymmetryReport {
    check_symmetries_with_tol(medium, 1e-10)
}

pub fn check_symmetries_with_tol(medium: &FourierMedium, tol: f64) -> SymmetryReport {
    let r = lattice::rotation_data().r;
    let rt = r.transpose();
    let rc = mat2_real(&r);
    let rtc = mat2_real(&rt);

    let mut hermitian = true;
    let mut pc_invariant = true;
    let mut r_equivariant = true;
    let mut r_invariant = true;
    let mut pc_antisymmetric = true;
    let mut p_even = true;
    let mut p_odd = true;
    let mut c_sym = true;
    let mut c_anti = true;

    // iterate over the union of the support and its images so one-sided
    // support failures are caught
    let mut all: std::collections::BTreeSet<Index2> = std::collections::BTreeSet::new();
    for (&m, _) in medium.iter() {
        all.insert(m);
        all.insert([-m[0], -m[1]]);
        all.insert(rotate_index(m));
    }
    for &m in &all {
        let am = medium.coeff(m);
        let aneg = medium.coeff([-m[0], -m[1]]);
        let arot = medium.coeff(rotate_index(m));
        if (am - aneg.adjoint()).norm() > tol {
            hermitian = false;
        }
        if am.iter().map(|c| c.im.abs()).fold(0.0, f64::max) > tol {
            pc_invariant = false;
        }
        if am.iter().map(|c| c.re.abs()).fold(0.0, f64::max) > tol {
            pc_antisymmetric = false;
        }
        if (arot - rc * am * rtc).norm() > tol {
            r_equivariant = false;
        }
        if (arot - am).norm() > tol {
            r_invariant = false;
        }
        if (aneg - am).norm() > tol {
            p_even = false;
        }
        if (aneg + am).norm() > tol {
            p_odd = false;
        }
        // C[A](x) = conj(A(x)): coefficients conj(A_{-m})
        if (aneg.map(|c| c.conj()) - am).norm() > tol {
            c_sym = false;
        }
        if (aneg.map(|c| c.conj()) + am).norm() > tol {
            c_anti = false;
        }
    }

    let elliptic_bounds = elliptic_bounds(medium, 64);

    SymmetryReport {
        hermitian,
        pc_invariant,
        r_equivariant,
        r_invariant,
        pc_antisymmetric,
        p_antisymmetric_c_symmetric: p_odd && c_sym,
        p_symmetric_c_antisymmetric: p_even && c_anti,
        elliptic_bounds,
    }
}

/// Extremal eigenvalues of the Hermitian part of A(x) over an n x n cell grid.
pub fn elliptic_bounds(medium: &FourierMedium, n: usize) -> (f64, f64) {
    if medium.is_zero() {
        return (0.0, 0.0);
    }
    let basis = standard_basis();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            let x = basis.v1 * (i as f64 / n as f64) + basis.v2 * (j as f64 / n as f64);
            let a = medium.eval(x);
            let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
            let (lmin, lmax) = crate::linalg::eig2_hermitian(h[(0, 0)].re, h[(0, 1)], h[(1, 1)].re);
            lo = lo.min(lmin);
            hi = hi.max(lmax);
        }
    }
    (lo, hi)
}

/// Splits a pointwise rotation-invariant medium as A(x) = a(x) I + b(x) sigma_2.
///
/// Requires the coefficients to be constant on rotation orbits and each
/// coefficient to lie in span{I, sigma_2}.
pub fn ab_decompose(medium: &FourierMedium) -> Result<(ScalarCoeffs, ScalarCoeffs)> {
    let tol = 1e-12f64;
    let mut a = ScalarCoeffs::new();
    let mut b = ScalarCoeffs::new();
    for (&m, am) in medium.iter() {
        let arot = medium.coeff(rotate_index(m));
        if (arot - am).norm() > 1e-10 {
            return Err(Error::InvalidMedium(format!(
                "not R-invariant: coefficient {m:?} differs from its rotation image"
            )));
        }
        let am_a = (am[(0, 0)] + am[(1, 1)]) * C64::new(0.5, 0.0);
        let am_b = (am[(1, 0)] - am[(0, 1)]) / C64::new(0.0, 2.0);
        let recon = identity2() * am_a + sigma2() * am_b;
        if (recon - am).norm() > tol.max(1e-12 * am.norm()) {
            return Err(Error::InvalidMedium(format!(
                "coefficient {m:?} is not of the form a I + b sigma_2"
            )));
        }
        if am_a.norm() > 0.0 {
            a.insert(m, am_a);
        }
        if am_b.norm() > 0.0 {
            b.insert(m, am_b);
        }
    }
    Ok((a, b))
}

/// Quadrature projection of grid samples back onto Fourier coefficients.
///
/// Exact (to rounding) for media supported inside the sampled bandwidth.
pub fn project_coefficients(
    eval: impl Fn(Vector2<f64>) -> Mat2,
    max_index: i64,
    grid: usize,
) -> BTreeMap<Index2, Mat2> {
    let basis = standard_basis();
    let n = grid;
    let mut samples = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = basis.v1 * (i as f64 / n as f64) + basis.v2 * (j as f64 / n as f64);
            samples.push(eval(x));
        }
    }
    let mut out = BTreeMap::new();
    for m1 in -max_index..=max_index {
        for m2 in -max_index..=max_index {
            let mut acc = Mat2::zeros();
            for i in 0..n {
                for j in 0..n {
                    // m.k . x = 2 pi (m1 i + m2 j)/n on the cell lattice grid
                    let phase = -std::f64::consts::TAU * (m1 as f64 * i as f64 + m2 as f64 * j as f64)
                        / n as f64;
                    acc += samples[i * n + j] * C64::from_polar(1.0, phase);
                }
            }
            acc /= C64::new((n * n) as f64, 0.0);
            if acc.iter().any(|c| c.norm() > 1e-14) {
                out.insert([m1, m2], acc);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Domain walls
// ---------------------------------------------------------------------------

/// A transition profile eta(zeta) with eta -> +-eta_inf as zeta -> +-inf.
#[derive(Clone)]
pub struct DomainWall {
    profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub eta_inf: f64,
}

impl std::fmt::Debug for DomainWall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DomainWall")
            .field("eta_inf", &self.eta_inf)
            .finish()
    }
}

impl DomainWall {
    /// Validates eta(0) = 0 and the asymptotes at zeta = +-50.
    pub fn new(profile: impl Fn(f64) -> f64 + Send + Sync + 'static, eta_inf: f64) -> Result<DomainWall> {
        if eta_inf <= 0.0 {
            return Err(Error::InvalidWall(format!("eta_inf must be positive, got {eta_inf}")));
        }
        if profile(0.0).abs() > 1e-10 {
            return Err(Error::InvalidWall("profile(0) must vanish".into()));
        }
        if (profile(50.0) - eta_inf).abs() > 1e-9 || (profile(-50.0) + eta_inf).abs() > 1e-9 {
            return Err(Error::InvalidWall(
                "profile does not reach +-eta_inf at zeta = +-50".into(),
            ));
        }
        Ok(DomainWall {
            profile: Arc::new(profile),
            eta_inf,
        })
    }

    /// Adds a localized bump to the profile; the asymptotes must survive.
    pub fn perturbed(&self, bump: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<DomainWall> {
        if bump(50.0).abs() > 1e-10 || bump(-50.0).abs() > 1e-10 {
            return Err(Error::NotLocalizedPerturbation);
        }
        let base = self.profile.clone();
        Ok(DomainWall {
            profile: Arc::new(move |z| base(z) + bump(z)),
            eta_inf: self.eta_inf,
        })
    }

    pub fn eta(&self, zeta: f64) -> f64 {
        (self.profile)(zeta)
    }
}

/// eta(zeta) = eta_inf tanh(zeta).
pub fn tanh_wall(eta_inf: f64) -> Result<DomainWall> {
    DomainWall::new(move |z| eta_inf * z.tanh(), eta_inf)
}

// ---------------------------------------------------------------------------
// JSON medium files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OrbitEntry {
    pub m: [i64; 2],
    /// Row-major [a11, a12, a21, a22], each as [re, im].
    pub matrix: [[f64; 2]; 4],
}

/// On-disk medium schema. `bulk` entries are orbit representatives expanded
/// through the rotation orbit; `perturbation` entries are literal coefficients.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MediumFile {
    pub a0: f64,
    pub orbits: Vec<OrbitEntry>,
    pub kind: MediumKind,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MediumKind {
    Bulk,
    Perturbation,
}

fn entry_matrix(e: &OrbitEntry) -> Mat2 {
    Matrix2::new(
        C64::new(e.matrix[0][0], e.matrix[0][1]),
        C64::new(e.matrix[1][0], e.matrix[1][1]),
        C64::new(e.matrix[2][0], e.matrix[2][1]),
        C64::new(e.matrix[3][0], e.matrix[3][1]),
    )
}

fn matrix_entry(m: Index2, a: &Mat2) -> OrbitEntry {
    OrbitEntry {
        m,
        matrix: [
            [a[(0, 0)].re, a[(0, 0)].im],
            [a[(0, 1)].re, a[(0, 1)].im],
            [a[(1, 0)].re, a[(1, 0)].im],
            [a[(1, 1)].re, a[(1, 1)].im],
        ],
    }
}

impl MediumFile {
    pub fn build(&self) -> Result<FourierMedium> {
        match self.kind {
            MediumKind::Bulk => {
                let mut reps = Vec::new();
                for e in &self.orbits {
                    let m = entry_matrix(e);
                    if m.iter().any(|c| c.im.abs() > 1e-14) {
                        return Err(Error::InvalidMedium(
                            "bulk orbit matrices must be real".into(),
                        ));
                    }
                    reps.push((e.m, m.map(|c| c.re)));
                }
                from_orbit_coefficients(&reps, self.a0)
            }
            MediumKind::Perturbation => {
                let mut coeffs: BTreeMap<Index2, Mat2> = BTreeMap::new();
                if self.a0 != 0.0 {
                    coeffs.insert([0, 0], identity2() * C64::new(self.a0, 0.0));
                }
                for e in &self.orbits {
                    *coeffs.entry(e.m).or_insert_with(Mat2::zeros) += entry_matrix(e);
                }
                Ok(FourierMedium::from_coeffs(coeffs))
            }
        }
    }

    /// Literal (lossless) dump of a medium's coefficient map.
    pub fn literal(medium: &FourierMedium) -> MediumFile {
        MediumFile {
            a0: 0.0,
            orbits: medium.iter().map(|(&m, a)| matrix_entry(m, a)).collect(),
            kind: MediumKind::Perturbation,
        }
    }
}

pub fn load_medium_file(path: &std::path::Path) -> Result<MediumFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn save_medium_file(path: &std::path::Path, file: &MediumFile) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(file)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cosine_medium_coefficients() {
        let m = scalar_cosine_medium(4.0, 1.0).unwrap();
        let c = m.coeff([0, -1]);
        assert_abs_diff_eq!(c[(0, 0)].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c[(1, 1)].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c[(0, 1)].norm(), 0.0, epsilon = 1e-15);
        let rep = check_symmetries(&m);
        assert!(rep.hermitian && rep.pc_invariant && rep.r_equivariant && rep.r_invariant);
        assert!(rep.elliptic_bounds.0 > 0.0);
        // identity medium for eps = 0
        let id = scalar_cosine_medium(1.0, 0.0).unwrap();
        assert_eq!(id.iter().count(), 1);
        let rep = check_symmetries(&id);
        assert!(rep.r_invariant && rep.pc_invariant);
        assert_abs_diff_eq!(rep.elliptic_bounds.0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.elliptic_bounds.1, 1.0, epsilon = 1e-12);
        assert!(scalar_cosine_medium(1.0, 0.4).is_err());
    }

    #[test]
    fn orbit_construction_is_honeycomb() {
        // empty orbit sum: free space
        let free = from_orbit_coefficients(&[], 1.0).unwrap();
        assert_eq!(free.iter().count(), 1);
        // symmetric generator: real coefficients with A_{-m} = A_m^T
        let c = Matrix2::new(0.3, 0.1, 0.1, -0.2);
        let m = from_orbit_coefficients(&[([1, 0], c)], 2.0).unwrap();
        let rep = check_symmetries(&m);
        assert!(rep.hermitian && rep.pc_invariant && rep.r_equivariant);
        let a = m.coeff([1, 0]);
        let b = m.coeff([-1, 0]);
        assert!((a - b.transpose()).norm() < 1e-14);
        // non-symmetric generator (complex medium) still satisfies all three
        let c = Matrix2::new(-1.0, -1.0, -2.0, -2.0);
        let m = from_orbit_coefficients(&[([1, 0], c)], 10.0).unwrap();
        let rep = check_symmetries(&m);
        assert!(rep.hermitian && rep.pc_invariant && rep.r_equivariant);
        assert!(!rep.r_invariant);
        assert!(from_orbit_coefficients(&[([0, 0], c)], 1.0).is_err());
        assert!(from_orbit_coefficients(&[([1, 0], c)], 0.0).is_err());
    }

    #[test]
    fn perturbation_symmetry_classes() {
        let bc = standard_c_breaking();
        let rep = check_symmetries(&bc);
        assert!(rep.hermitian);
        assert!(rep.pc_antisymmetric && !rep.pc_invariant);
        assert!(rep.p_symmetric_c_antisymmetric);
        assert!(!rep.p_antisymmetric_c_symmetric);
        assert!(rep.r_equivariant && rep.r_invariant);

        let bp = standard_p_breaking();
        let rep = check_symmetries(&bp);
        assert!(rep.hermitian);
        assert!(rep.pc_antisymmetric);
        assert!(rep.p_antisymmetric_c_symmetric);
        assert!(!rep.p_symmetric_c_antisymmetric);

        // zero medium: every flag vacuously true
        let rep = check_symmetries(&FourierMedium::zero());
        assert!(rep.hermitian && rep.pc_invariant && rep.pc_antisymmetric);

        // parity violation is reported by name
        let mut bad = cosine_sum_coeffs();
        bad.insert([1, 0], C64::new(0.7, 0.0));
        let err = c_breaking_perturbation(&bad).unwrap_err();
        assert!(err.to_string().contains("even"));
    }

    #[test]
    fn ab_decomposition_round_trips() {
        let m = scalar_cosine_medium(4.0, 1.0).unwrap();
        let (a, b) = ab_decompose(&m).unwrap();
        assert!(b.is_empty());
        assert_abs_diff_eq!(a[&[0, 0]].re, 4.0, epsilon = 1e-15);

        let bc = standard_c_breaking();
        let (a, b) = ab_decompose(&bc).unwrap();
        assert!(a.is_empty());
        assert_abs_diff_eq!(b[&[1, 0]].re, 0.5, epsilon = 1e-15);

        // mixed a + b medium reconstructs exactly
        let mut coeffs: BTreeMap<Index2, Mat2> = BTreeMap::new();
        coeffs.insert([0, 0], identity2() * C64::new(3.0, 0.0));
        for m in [[1i64, 0i64], [0, 1], [-1, -1]] {
            coeffs.insert(m, identity2() * C64::new(0.2, 0.0) + sigma2() * C64::new(0.0, -0.1));
            coeffs.insert(
                [-m[0], -m[1]],
                identity2() * C64::new(0.2, 0.0) + sigma2() * C64::new(0.0, 0.1),
            );
        }
        let mixed = FourierMedium::from_coeffs(coeffs);
        let (a, b) = ab_decompose(&mixed).unwrap();
        let mut recon: BTreeMap<Index2, Mat2> = BTreeMap::new();
        for (&m, &v) in &a {
            *recon.entry(m).or_insert_with(Mat2::zeros) += identity2() * v;
        }
        for (&m, &v) in &b {
            *recon.entry(m).or_insert_with(Mat2::zeros) += sigma2() * v;
        }
        let recon = FourierMedium::from_coeffs(recon);
        for (&m, am) in mixed.iter() {
            assert!((recon.coeff(m) - am).norm() < 1e-12);
        }
        // complex orbit medium is not R-invariant
        let c = Matrix2::new(-1.0, -1.0, -2.0, -2.0);
        let m = from_orbit_coefficients(&[([1, 0], c)], 10.0).unwrap();
        assert!(ab_decompose(&m).is_err());
    }

    #[test]
    fn projection_round_trip() {
        let m = from_orbit_coefficients(&[([1, 0], Matrix2::new(0.4, -0.1, -0.3, 0.2))], 5.0).unwrap();
        let proj = project_coefficients(|x| m.eval(x), 3, 16);
        for (&idx, a) in m.iter() {
            let p = proj.get(&idx).copied().unwrap_or_else(Mat2::zeros);
            assert!((p - a).norm() < 1e-10, "coefficient {idx:?}");
        }
        for (&idx, p) in &proj {
            let a = m.coeff(idx);
            assert!((p - a).norm() < 1e-10, "spurious coefficient {idx:?}");
        }
    }

    #[test]
    fn walls() {
        let w = tanh_wall(1.0).unwrap();
        assert_eq!(w.eta(0.0), 0.0);
        assert_abs_diff_eq!(w.eta(50.0), 1.0, epsilon = 1e-10);
        let w2 = tanh_wall(2.0).unwrap();
        assert_abs_diff_eq!(w2.eta(-50.0), -2.0, epsilon = 1e-9);
        assert!(tanh_wall(-1.0).is_err());
        let bumped = w.perturbed(|z| 3.0 * (-z * z).exp()).unwrap();
        assert_abs_diff_eq!(bumped.eta(0.0), 3.0, epsilon = 1e-12);
        assert!(w.perturbed(|_| 1.0).is_err());
    }

    #[test]
    fn medium_file_round_trip() {
        let bc = standard_c_breaking();
        let file = MediumFile::literal(&bc);
        let text = serde_json::to_string(&file).unwrap();
        let back: MediumFile = serde_json::from_str(&text).unwrap();
        assert_eq!(file, back);
        let rebuilt = back.build().unwrap();
        for (&m, a) in bc.iter() {
            assert_eq!(rebuilt.coeff(m), *a);
        }
        assert_eq!(rebuilt.iter().count(), bc.iter().count());
    }
}
