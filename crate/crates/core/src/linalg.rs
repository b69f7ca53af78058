//! Dense and banded Hermitian eigensolvers.
//!
//! Bulk (plane-wave) problems are small and dense and go through nalgebra's
//! Hermitian eigendecomposition. Cylinder problems are large, Hermitian and
//! banded in a transverse-major ordering, so they are solved by shift-invert
//! Lanczos on top of a banded LU with partial pivoting.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian matrix.
pub fn hermitian_eigen(mat: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = mat.nrows();
    assert_eq!(n, mat.ncols(), "matrix must be square");
    let se = mat.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = DMatrix::<C64>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Lowest `count` eigenpairs of a Hermitian matrix, ascending.
pub fn hermitian_eigen_lowest(mat: &DMatrix<C64>, count: usize) -> (Vec<f64>, DMatrix<C64>) {
    let (vals, vecs) = hermitian_eigen(mat);
    let count = count.min(vals.len());
    (vals[..count].to_vec(), vecs.columns(0, count).into_owned())
}

/// Eigenvalues of a 2x2 Hermitian matrix `[[a, b], [conj(b), d]]`, ascending.
pub fn eig2_hermitian(a: f64, b: C64, d: f64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    (mean - rad, mean + rad)
}

/// Max absolute deviation from Hermitian symmetry.
pub fn hermiticity_defect(mat: &DMatrix<C64>) -> f64 {
    let n = mat.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (mat[(i, j)] - mat[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Banded complex matrices
// ---------------------------------------------------------------------------

/// Complex band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Storage follows the LAPACK `gb` layout with room for fill-in: entry
/// `(i, j)` lives at `data[(kl + ku + i - j, j)]`, rows `0..2*kl+ku+1`.
#[derive(Clone)]
pub struct BandMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    /// (2*kl + ku + 1) x n, column-major by band row.
    data: Vec<C64>,
    ldab: usize,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            data: vec![C64::new(0.0, 0.0); ldab * n],
            ldab,
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku + self.kl >= j && j + self.kl >= i);
        (self.kl + self.ku + i - j) + j * self.ldab
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i + self.ku >= j && j + self.kl >= i {
            self.data[self.idx(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(
            i + self.ku >= j && j + self.kl >= i,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let idx = self.idx(i, j);
        self.data[idx] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        let idx = self.idx(i, j);
        self.data[idx] += v;
    }

    /// y = A x using only entries inside the nominal band.
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut y = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            let xi = x[j];
            if xi.norm_sqr() == 0.0 {
                continue;
            }
            let ilo = j.saturating_sub(self.ku);
            let ihi = (j + self.kl).min(n - 1);
            for i in ilo..=ihi {
                y[i] += self.data[self.idx(i, j)] * xi;
            }
        }
        y
    }

    /// Shift the diagonal: A <- A - sigma I.
    pub fn shift(&mut self, sigma: f64) {
        for i in 0..self.n {
            let idx = self.idx(i, i);
            self.data[idx] -= C64::new(sigma, 0.0);
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            let ilo = j.saturating_sub(self.ku);
            let ihi = (j + self.kl).min(self.n - 1);
            for i in ilo..=ihi {
                m[(i, j)] = self.data[self.idx(i, j)];
            }
        }
        m
    }
}

/// LU factorization of a band matrix with partial pivoting.
pub struct BandLu {
    n: usize,
    kl: usize,
    /// ku + kl superdiagonals after fill-in.
    kv: usize,
    data: Vec<C64>,
    ldab: usize,
    pivots: Vec<usize>,
}

pub fn band_lu(a: &BandMatrix) -> Result<BandLu> {
    let n = a.n;
    let kl = a.kl;
    let ku = a.ku;
    let kv = kl + ku;
    let ldab = 2 * kl + ku + 1;
    let mut data = a.data.clone();
    let mut pivots = vec![0usize; n];

    let ridx = |i: usize, j: usize| -> usize { (kl + ku + i - j) + j * ldab };

    for j in 0..n {
        // pivot search in column j, rows j..=min(n-1, j+kl)
        let ihi = (j + kl).min(n - 1);
        let mut ip = j;
        let mut pmax = data[ridx(j, j)].norm();
        for i in (j + 1)..=ihi {
            let v = data[ridx(i, j)].norm();
            if v > pmax {
                pmax = v;
                ip = i;
            }
        }
        if pmax == 0.0 {
            return Err(Error::Eigensolver(format!(
                "banded LU: exactly singular at column {j}"
            )));
        }
        pivots[j] = ip;
        let chi = (j + kv).min(n - 1);
        if ip != j {
            for c in j..=chi {
                data.swap(ridx(ip, c), ridx(j, c));
            }
        }
        let piv = data[ridx(j, j)];
        for i in (j + 1)..=ihi {
            let m = data[ridx(i, j)] / piv;
            data[ridx(i, j)] = m;
            for c in (j + 1)..=chi {
                let u = data[ridx(j, c)];
                if u.norm_sqr() != 0.0 {
                    let idx = ridx(i, c);
                    data[idx] -= m * u;
                }
            }
        }
    }

    Ok(BandLu {
        n,
        kl,
        kv,
        data,
        ldab,
        pivots,
    })
}

impl BandLu {
    /// Solve A x = b in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        let ridx = |i: usize, j: usize| -> usize { (self.kv + i - j) + j * self.ldab };
        // forward: apply pivots and L
        for j in 0..n {
            let ip = self.pivots[j];
            if ip != j {
                b.swap(ip, j);
            }
            let bj = b[j];
            if bj.norm_sqr() != 0.0 {
                let ihi = (j + self.kl).min(n - 1);
                for i in (j + 1)..=ihi {
                    b[i] -= self.data[ridx(i, j)] * bj;
                }
            }
        }
        // back substitution with U (bandwidth kv)
        for j in (0..n).rev() {
            let x = b[j] / self.data[ridx(j, j)];
            b[j] = x;
            if x.norm_sqr() != 0.0 {
                let ilo = j.saturating_sub(self.kv);
                for i in ilo..j {
                    b[i] -= self.data[ridx(i, j)] * x;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Shift-invert Lanczos
// ---------------------------------------------------------------------------

/// Deterministic xorshift-style generator for start vectors.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn uniform(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }
}

pub struct ShiftInvertEigs {
    /// Eigenvalues of the original matrix, sorted by |lambda - sigma|.
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<DVector<C64>>,
    /// Max relative residual ||Ax - lambda x|| / max(1, |lambda|) among returned pairs.
    pub max_residual: f64,
}

/// Eigenpairs of a Hermitian band matrix nearest the shift `sigma`.
///
/// Lanczos with full reorthogonalization applied to (A - sigma I)^{-1}.
/// Returns up to `n_want` converged pairs; pairs with residual above `tol`
/// are dropped.
pub fn shift_invert_lanczos(
    a: &BandMatrix,
    sigma: f64,
    n_want: usize,
    max_steps: usize,
    tol: f64,
) -> Result<ShiftInvertEigs> {
    let n = a.n;
    let mut shifted = a.clone();
    shifted.shift(sigma);
    let lu = band_lu(&shifted)?;

    let mut rng = SplitMix64(0x0b5e_55ed_2026_0811);
    let steps = max_steps.min(n);

    // start vector
    let mut v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.uniform(), rng.uniform()))
        .collect();
    normalize(&mut v);

    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(steps);
    let mut alphas: Vec<f64> = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::with_capacity(steps);

    basis.push(v.clone());
    let mut prev: Option<Vec<C64>> = None;

    for j in 0..steps {
        let mut w = basis[j].clone();
        lu.solve_in_place(&mut w);
        if let Some(p) = &prev {
            let beta = betas[j - 1];
            for i in 0..n {
                w[i] -= C64::new(beta, 0.0) * p[i];
            }
        }
        let alpha = dot(&basis[j], &w).re;
        for i in 0..n {
            w[i] -= C64::new(alpha, 0.0) * basis[j][i];
        }
        // full reorthogonalization, twice for safety
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                if c.norm_sqr() > 0.0 {
                    for i in 0..n {
                        w[i] -= c * b[i];
                    }
                }
            }
        }
        alphas.push(alpha);
        let beta = norm(&w);
        if beta < 1e-13 || j + 1 == steps {
            betas.push(0.0);
            break;
        }
        betas.push(beta);
        for x in w.iter_mut() {
            *x /= C64::new(beta, 0.0);
        }
        prev = Some(basis[j].clone());
        basis.push(w);
    }

    // tridiagonal eigenproblem
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m && betas[i] != 0.0 {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let te = t.symmetric_eigen();

    // Ritz values of (A - sigma)^{-1}; lambda = sigma + 1/theta
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| te.eigenvalues[y].abs().total_cmp(&te.eigenvalues[x].abs()));

    let mut eigenvalues = Vec::new();
    let mut vectors: Vec<DVector<C64>> = Vec::new();
    let mut max_residual = 0.0f64;
    for &idx in &order {
        if eigenvalues.len() >= n_want {
            break;
        }
        let theta = te.eigenvalues[idx];
        if theta.abs() < 1e-300 {
            continue;
        }
        let lambda = sigma + 1.0 / theta;
        let s = te.eigenvectors.column(idx);
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (k, b) in basis.iter().enumerate() {
            let c = C64::new(s[k], 0.0);
            for i in 0..n {
                x[i] += c * b[i];
            }
        }
        normalize(&mut x);
        let ax = a.matvec(&x);
        let mut res = 0.0f64;
        for i in 0..n {
            res += (ax[i] - C64::new(lambda, 0.0) * x[i]).norm_sqr();
        }
        let res = res.sqrt() / lambda.abs().max(1.0);
        if res <= tol {
            // skip duplicates of already accepted Ritz pairs
            let dup = vectors.iter().any(|v0| {
                let mut ov = C64::new(0.0, 0.0);
                for i in 0..n {
                    ov += v0[i].conj() * x[i];
                }
                ov.norm() > 0.99
            });
            if !dup {
                if res > max_residual {
                    max_residual = res;
                }
                eigenvalues.push(lambda);
                vectors.push(DVector::from_vec(x));
            }
        }
    }

    if eigenvalues.is_empty() {
        return Err(Error::Eigensolver(format!(
            "shift-invert Lanczos: no converged pair near sigma={sigma} after {m} steps"
        )));
    }
    Ok(ShiftInvertEigs {
        eigenvalues,
        vectors,
        max_residual,
    })
}

#[inline]
fn dot(a: &[C64], b: &[C64]) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for i in 0..a.len() {
        s += a[i].conj() * b[i];
    }
    s
}

#[inline]
fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[inline]
fn normalize(a: &mut [C64]) {
    let n = norm(a);
    if n > 0.0 {
        for x in a.iter_mut() {
            *x /= C64::new(n, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian_band(n: usize, kl: usize, seed: u64) -> BandMatrix {
        let mut rng = SplitMix64(seed);
        let mut a = BandMatrix::zeros(n, kl, kl);
        for i in 0..n {
            a.set(i, i, C64::new(rng.uniform() * 4.0, 0.0));
            for j in (i + 1)..(i + kl + 1).min(n) {
                let v = C64::new(rng.uniform(), rng.uniform());
                a.set(i, j, v);
                a.set(j, i, v.conj());
            }
        }
        a
    }

    #[test]
    fn band_lu_solves() {
        let a = random_hermitian_band(40, 3, 7);
        let lu = band_lu(&a).unwrap();
        let mut rng = SplitMix64(11);
        let b: Vec<C64> = (0..40).map(|_| C64::new(rng.uniform(), rng.uniform())).collect();
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        let ax = a.matvec(&x);
        for i in 0..40 {
            assert!((ax[i] - b[i]).norm() < 1e-10, "residual at {i}");
        }
    }

    #[test]
    fn shift_invert_matches_dense() {
        let a = random_hermitian_band(60, 4, 42);
        let dense = a.to_dense();
        let (vals, _) = hermitian_eigen(&dense);
        let sigma = 0.3;
        let si = shift_invert_lanczos(&a, sigma, 4, 60, 1e-9).unwrap();
        // the four returned eigenvalues must be the four closest to sigma
        let mut by_dist = vals.clone();
        by_dist.sort_by(|x, y| (x - sigma).abs().total_cmp(&(y - sigma).abs()));
        for (i, ev) in si.eigenvalues.iter().enumerate() {
            assert!(
                (ev - by_dist[i]).abs() < 1e-8,
                "eig {i}: got {ev}, want {}",
                by_dist[i]
            );
        }
    }

    #[test]
    fn eig2_matches_dense() {
        let (lo, hi) = eig2_hermitian(2.0, C64::new(0.3, -0.4), 1.0);
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.3, -0.4),
                C64::new(0.3, 0.4),
                C64::new(1.0, 0.0),
            ],
        );
        let (vals, _) = hermitian_eigen(&m);
        assert!((lo - vals[0]).abs() < 1e-12);
        assert!((hi - vals[1]).abs() < 1e-12);
    }
}
