//! Symmetric eigenvalue solvers.
//!
//! Dense symmetric matrices are reduced to tridiagonal form by Householder
//! reflections; tridiagonal matrices are diagonalized by QL iteration with
//! implicit Wilkinson-style shifts. Only eigenvalues are computed.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;

/// Dense real symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    /// Sets both `(row, col)` and `(col, row)`.
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.dim + col] = value;
        self.data[col * self.dim + row] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest `|i − j|` with a nonzero entry.
    pub fn bandwidth(&self) -> usize {
        let mut width = 0;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                if self.get(i, j) != 0.0 {
                    width = width.max(j - i);
                }
            }
        }
        width
    }

    pub fn is_tridiagonal(&self) -> bool {
        self.bandwidth() <= 1
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn superdiagonal(&self) -> Vec<f64> {
        (1..self.dim).map(|i| self.get(i - 1, i)).collect()
    }

    /// All eigenvalues in ascending order.
    ///
    /// Tridiagonal input skips the Householder reduction.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.is_tridiagonal() {
            tridiagonal_eigenvalues(&self.diagonal(), &self.superdiagonal())
        } else {
            let (diag, off) = householder_tridiagonalize(self);
            tridiagonal_eigenvalues(&diag, &off)
        }
    }
}

/// Reduces a symmetric matrix to tridiagonal form `(diagonal, off-diagonal)`
/// with the same spectrum.
pub fn householder_tridiagonalize(matrix: &SymmetricMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = matrix.dim();
    let mut a = matrix.data.clone();
    let idx = |r: usize, c: usize| r * n + c;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];

    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| libm::fabs(a[idx(i, k)])).sum();
            if scale == 0.0 {
                e[i] = a[idx(i, l)];
            } else {
                for k in 0..=l {
                    a[idx(i, k)] /= scale;
                    h += a[idx(i, k)] * a[idx(i, k)];
                }
                let f = a[idx(i, l)];
                let g = if f >= 0.0 {
                    -libm::sqrt(h)
                } else {
                    libm::sqrt(h)
                };
                e[i] = scale * g;
                h -= f * g;
                a[idx(i, l)] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += a[idx(j, k)] * a[idx(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g_acc += a[idx(k, j)] * a[idx(i, k)];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * a[idx(i, j)];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[idx(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[idx(j, k)] -= f * e[k] + g * a[idx(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[idx(i, l)];
        }
        d[i] = h;
    }
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[idx(i, i)];
    }
    let off = if n > 0 { e[1..].to_vec() } else { Vec::new() };
    (d, off)
}

/// Eigenvalues of the symmetric tridiagonal matrix with main diagonal
/// `diag` and off-diagonal `off` (`off[i]` couples `i` and `i + 1`),
/// ascending.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::InvalidInput("off-diagonal length must be dim - 1"));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = libm::fabs(d[m]) + libm::fabs(d[m + 1]);
                if libm::fabs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iterations == MAX_QL_ITERATIONS {
                return Err(Error::EigenNoConvergence { index: l });
            }
            iterations += 1;

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}
