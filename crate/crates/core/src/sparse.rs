//! Sparse symmetric matrices in compressed-row storage, with a banded
//! Cholesky factorization for desk-scale systems and diagonally
//! preconditioned conjugate gradient beyond.

use crate::error::{Error, Result};
use crate::real::{as_f64, real, Real};

/// Symmetric sparse matrix in CSR layout (both triangles stored).
#[derive(Debug, Clone)]
pub struct SparseSym<T: Real> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> SparseSym<T> {
    /// Builds from (row, col, value) triplets; duplicates are summed in a
    /// deterministic order (stable sort preserves insertion order of equal
    /// keys, so the floating-point sums are reproducible).
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut col_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<T> = Vec::with_capacity(triplets.len());
        let mut counts = vec![0usize; n];
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < n && c < n);
            if last == Some((r, c)) {
                let k = vals.len() - 1;
                vals[k] = vals[k] + v;
            } else {
                col_idx.push(c);
                vals.push(v);
                counts[r] += 1;
                last = Some((r, c));
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for r in 0..n {
            row_ptr[r + 1] = row_ptr[r] + counts[r];
        }
        Self {
            n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[lo..hi], &self.vals[lo..hi])
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            let mut acc = T::zero();
            for (c, v) in cols.iter().zip(vals) {
                acc = acc + *v * x[*c];
            }
            y[r] = acc;
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Quadratic form `x^T A x`.
    pub fn quad_form(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            let mut row_acc = T::zero();
            for (c, v) in cols.iter().zip(vals) {
                row_acc = row_acc + *v * x[*c];
            }
            acc = acc + x[r] * row_acc;
        }
        acc
    }

    /// Bilinear form `x^T A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let mut acc = T::zero();
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            let mut row_acc = T::zero();
            for (c, v) in cols.iter().zip(vals) {
                row_acc = row_acc + *v * y[*c];
            }
            acc = acc + x[r] * row_acc;
        }
        acc
    }

    pub fn diagonal(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n];
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                if *c == r {
                    d[r] = *v;
                }
            }
        }
        d
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    /// Checks structural symmetry: stored entries match their transpose
    /// within the given relative tolerance.
    pub fn is_symmetric(&self, rel_tol: T) -> bool {
        let scale = self
            .vals
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m });
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                if (*v - self.get(*c, r)).abs() > rel_tol * (scale + T::one()) {
                    return false;
                }
            }
        }
        true
    }

    /// Half bandwidth: max |row - col| over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0usize;
        for r in 0..self.n {
            let (cols, _) = self.row(r);
            for c in cols {
                bw = bw.max(r.abs_diff(*c));
            }
        }
        bw
    }

    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::with_capacity(self.nnz());
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                out.push((r, *c, *v));
            }
        }
        out
    }

    /// Entrywise sum `self + other`.
    pub fn add(&self, other: &SparseSym<T>) -> SparseSym<T> {
        debug_assert_eq!(self.n, other.n);
        let mut triplets = self.triplets();
        triplets.extend(other.triplets());
        SparseSym::from_triplets(self.n, triplets)
    }
}

/// Lower-banded Cholesky factorization `A = L L^T` for SPD matrices.
#[derive(Debug, Clone)]
pub struct BandedCholesky<T: Real> {
    n: usize,
    bw: usize,
    /// Row-major packed lower band: entry (r, c) with r - bw <= c <= r is at
    /// `band[r * (bw + 1) + (c + bw - r)]`.
    band: Vec<T>,
}

impl<T: Real> BandedCholesky<T> {
    pub fn factor(a: &SparseSym<T>) -> Result<Self> {
        let n = a.dim();
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut band = vec![T::zero(); n * w];
        for r in 0..n {
            let (cols, vals) = a.row(r);
            for (c, v) in cols.iter().zip(vals) {
                if *c <= r {
                    band[r * w + (c + bw - r)] = *v;
                }
            }
        }
        // in-place banded Cholesky
        for j in 0..n {
            let start = j.saturating_sub(bw);
            let mut d = band[j * w + bw];
            for k in start..j {
                let l = band[j * w + (k + bw - j)];
                d = d - l * l;
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite { row: j });
            }
            let d = d.sqrt();
            band[j * w + bw] = d;
            let end = (j + bw + 1).min(n);
            for i in (j + 1)..end {
                let start_i = i.saturating_sub(bw);
                let lo = start_i.max(start);
                let mut s = band[i * w + (j + bw - i)];
                for k in lo..j {
                    s = s - band[i * w + (k + bw - i)] * band[j * w + (k + bw - j)];
                }
                band[i * w + (j + bw - i)] = s / d;
            }
        }
        Ok(Self { n, bw, band })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        // forward: L y = b
        for i in 0..n {
            let start = i.saturating_sub(bw);
            let mut s = x[i];
            for k in start..i {
                s = s - self.band[i * w + (k + bw - i)] * x[k];
            }
            x[i] = s / self.band[i * w + bw];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            let end = (i + bw + 1).min(n);
            let mut s = x[i];
            for k in (i + 1)..end {
                s = s - self.band[k * w + (i + bw - k)] * x[k];
            }
            x[i] = s / self.band[i * w + bw];
        }
    }
}

/// Conjugate gradient with diagonal (Jacobi) preconditioning.
pub fn solve_cg<T: Real>(
    a: &SparseSym<T>,
    b: &[T],
    rel_tol: T,
    max_iter: usize,
) -> Result<Vec<T>> {
    let n = a.dim();
    let diag = a.diagonal();
    let precond = |r: &[T], z: &mut [T]| {
        for i in 0..n {
            z[i] = if diag[i] != T::zero() { r[i] / diag[i] } else { r[i] };
        }
    };
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let b_norm = dot_vec(b, b).sqrt();
    if b_norm == T::zero() {
        return Ok(x);
    }
    let mut z = vec![T::zero(); n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot_vec(&r, &z);
    let mut ap = vec![T::zero(); n];
    for _ in 0..max_iter {
        a.matvec(&p, &mut ap);
        let alpha = rz / dot_vec(&p, &ap);
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        if dot_vec(&r, &r).sqrt() <= rel_tol * b_norm {
            return Ok(x);
        }
        precond(&r, &mut z);
        let rz_new = dot_vec(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let last = as_f64(dot_vec(&r, &r).sqrt() / b_norm);
    Err(Error::NonConvergence {
        what: "conjugate gradient",
        iterations: max_iter,
        last,
    })
}

/// Direct factorization up to this many unknowns; CG above.
pub const DIRECT_SOLVE_DOF_LIMIT: usize = 20_000;

/// SPD solver choosing a direct banded factorization for systems up to
/// [`DIRECT_SOLVE_DOF_LIMIT`] unknowns and preconditioned CG beyond.
#[derive(Debug, Clone)]
pub enum SpdSolver<T: Real> {
    Direct(BandedCholesky<T>),
    Iterative(SparseSym<T>),
}

impl<T: Real> SpdSolver<T> {
    pub fn new(a: &SparseSym<T>) -> Result<Self> {
        if a.dim() <= DIRECT_SOLVE_DOF_LIMIT {
            Ok(SpdSolver::Direct(BandedCholesky::factor(a)?))
        } else {
            Ok(SpdSolver::Iterative(a.clone()))
        }
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        match self {
            SpdSolver::Direct(chol) => Ok(chol.solve(b)),
            SpdSolver::Iterative(a) => solve_cg(a, b, real(1e-12), 50 * a.dim()),
        }
    }
}

pub fn dot_vec<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub fn norm_vec<T: Real>(a: &[T]) -> T {
    dot_vec(a, a).sqrt()
}

pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * *xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, bw: usize, rng: &mut ChaCha8Rng) -> SparseSym<f64> {
        let mut triplets = Vec::new();
        for r in 0..n {
            for c in r.saturating_sub(bw)..=(r + bw).min(n - 1) {
                if c < r {
                    continue;
                }
                let v = if c == r {
                    (2 * bw + 2) as f64 + rng.gen_range(0.0..1.0)
                } else {
                    rng.gen_range(-1.0..1.0)
                };
                triplets.push((r, c, v));
                if c != r {
                    triplets.push((c, r, v));
                }
            }
        }
        SparseSym::from_triplets(n, triplets)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = SparseSym::from_triplets(
            2,
            vec![(0, 0, 1.0), (0, 0, 2.0), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 4.0)],
        );
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(0, 1), 0.5);
        assert_eq!(a.nnz(), 4);
        assert!(a.is_symmetric(1e-12));
    }

    #[test]
    fn cholesky_solves_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(n, bw) in &[(1usize, 0usize), (5, 2), (40, 7), (120, 11)] {
            let a = random_spd(n, bw, &mut rng);
            let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = a.apply(&x_true);
            let chol = BandedCholesky::factor(&a).unwrap();
            let x = chol.solve(&b);
            for i in 0..n {
                assert!((x[i] - x_true[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = SparseSym::from_triplets(2, vec![(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(
            BandedCholesky::factor(&a),
            Err(Error::NotPositiveDefinite { row: 1 })
        ));
    }

    #[test]
    fn cg_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = random_spd(60, 5, &mut rng);
        let x_true: Vec<f64> = (0..60).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = a.apply(&x_true);
        let x = solve_cg(&a, &b, 1e-12, 10_000).unwrap();
        for i in 0..60 {
            assert!((x[i] - x_true[i]).abs() < 1e-8);
        }
    }
}
