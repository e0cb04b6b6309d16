//! Sparse symmetric positive definite systems: CSR storage, preconditioned
//! conjugate gradients with incomplete Cholesky, and a profile Cholesky
//! factorization for narrow-band problems.

use crate::error::{FracError, Result};

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Builds from triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut trip: Vec<(usize, usize, f64)>) -> Csr {
        trip.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(trip.len());
        let mut vals: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trip {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr { n, row_ptr, cols, vals }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioner `z = M⁻¹ r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// Zero-fill incomplete Cholesky `A ≈ L Lᵀ`.
pub struct Ic0 {
    n: usize,
    /// Strictly lower part of L in CSR (row i holds columns < i).
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl Ic0 {
    pub fn new(a: &Csr) -> Result<Ic0> {
        let n = a.n;
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut diag = vec![0.0; n];
        // Dense scatter of the current row of L.
        let mut pos: Vec<usize> = vec![usize::MAX; n];
        for i in 0..n {
            let start = cols.len();
            let mut aii = 0.0;
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.cols[k];
                if j < i {
                    pos[j] = cols.len();
                    cols.push(j);
                    vals.push(a.vals[k]);
                } else if j == i {
                    aii = a.vals[k];
                }
            }
            // L[i][j] = (A[i][j] - sum_{k<j} L[i][k] L[j][k]) / L[j][j]
            for idx in start..cols.len() {
                let j = cols[idx];
                let mut s = vals[idx];
                for kj in row_ptr[j]..row_ptr[j + 1] {
                    let k = cols[kj];
                    let p = pos[k];
                    if p != usize::MAX && p >= start && p < idx {
                        s -= vals[p] * vals[kj];
                    }
                }
                vals[idx] = s / diag[j];
            }
            let mut d = aii;
            for idx in start..cols.len() {
                d -= vals[idx] * vals[idx];
            }
            if !(d > 0.0) {
                return Err(FracError::NotPositiveDefinite(i));
            }
            diag[i] = d.sqrt();
            for idx in start..cols.len() {
                pos[cols[idx]] = usize::MAX;
            }
            row_ptr[i + 1] = cols.len();
        }
        Ok(Ic0 {
            n,
            row_ptr,
            cols,
            vals,
            diag,
        })
    }
}

impl Preconditioner for Ic0 {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        // Forward: L y = r.
        for i in 0..self.n {
            let mut s = r[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s -= self.vals[k] * z[self.cols[k]];
            }
            z[i] = s / self.diag[i];
        }
        // Backward: Lᵀ x = y.
        for i in (0..self.n).rev() {
            z[i] /= self.diag[i];
            let zi = z[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                z[self.cols[k]] -= self.vals[k] * zi;
            }
        }
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients for `A x = b`, starting from `x`.
/// Stops when `‖b − A x‖ ≤ tol · ‖b‖`.
pub fn pcg<P: Preconditioner>(
    a: &Csr,
    b: &[f64],
    x: &mut [f64],
    m: &P,
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = a.n;
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = dot(&r, &r).sqrt() / bnorm;
    let mut it = 0;
    while res > tol {
        if it >= max_iter {
            return Err(FracError::NonConvergence {
                iterations: it,
                residual: res,
            });
        }
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(FracError::NotPositiveDefinite(it));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
        res = dot(&r, &r).sqrt() / bnorm;
    }
    Ok(SolveStats {
        iterations: it,
        relative_residual: res,
    })
}

/// Profile (envelope) Cholesky factorization; exact for SPD matrices whose
/// nonzeros lie within a narrow band of the diagonal.
pub struct ProfileCholesky {
    n: usize,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl ProfileCholesky {
    pub fn factor(a: &Csr) -> Result<ProfileCholesky> {
        let n = a.n;
        let mut first = vec![0usize; n];
        for i in 0..n {
            let mut f = i;
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                f = f.min(a.cols[k]);
            }
            first[i] = f;
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.cols[k];
                if j <= i {
                    data[start[i] + j - first[i]] += a.vals[k];
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = data[start[i] + j - fi];
                let ri = start[i] + lo - fi;
                let rj = start[j] + lo - fj;
                let len = j - lo;
                for t in 0..len {
                    s -= data[ri + t] * data[rj + t];
                }
                if j < i {
                    data[start[i] + j - fi] = s / data[start[j] + j - fj];
                } else {
                    if !(s > 0.0) {
                        return Err(FracError::NotPositiveDefinite(i));
                    }
                    data[start[i] + i - fi] = s.sqrt();
                }
            }
        }
        Ok(ProfileCholesky { n, first, start, data })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let mut s = y[i];
            for j in fi..i {
                s -= self.data[self.start[i] + j - fi] * y[j];
            }
            y[i] = s / self.data[self.start[i] + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            y[i] /= self.data[self.start[i] + i - fi];
            let yi = y[i];
            for j in fi..i {
                y[j] -= self.data[self.start[i] + j - fi] * yi;
            }
        }
        y
    }
}

impl Preconditioner for ProfileCholesky {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(&self.solve(r));
    }
}
