//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection, eigenvectors by
//! inverse iteration.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e` (`e.len() == d.len() - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiag {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Result<Self> {
        if d.is_empty() || e.len() + 1 != d.len() {
            return Err(Error::InvalidArgument(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
                d.len(),
                e.len()
            )));
        }
        Ok(Self { d, e })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.d[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.d.len() {
            let denom = if q == 0.0 { f64::EPSILON * self.scale() } else { q };
            q = self.d[i] - x - self.e[i - 1] * self.e[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn scale(&self) -> f64 {
        self.gershgorin().1.abs().max(self.gershgorin().0.abs()).max(1.0)
    }

    /// Interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.d.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection to absolute width `tol`.
    pub fn eigenvalue(&self, k: usize, tol: f64) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let width = tol.max(4.0 * f64::EPSILON * lo.abs().max(hi.abs()));
        while hi - lo > width {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lowest `count` eigenvalues in ascending order.
    pub fn lowest(&self, count: usize, tol: f64) -> Vec<f64> {
        (0..count.min(self.len())).map(|k| self.eigenvalue(k, tol)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        (0..n)
            .map(|i| {
                let mut y = self.d[i] * x[i];
                if i > 0 {
                    y += self.e[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.e[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Solve `(A - shift I) x = b` by Gaussian elimination with partial pivoting.
    fn shifted_solve(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        // rows stored as (diag, upper1, upper2) after pivoting
        let mut a = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut x = b.to_vec();
        let tiny = f64::EPSILON * self.scale();
        // current row i has entries (a[i], u1[i]) and sub-diagonal l below it
        a[0] = self.d[0] - shift;
        if n > 1 {
            u1[0] = self.e[0];
        }
        for i in 0..n.saturating_sub(1) {
            let sub = self.e[i];
            let mut nd = self.d[i + 1] - shift;
            let mut nu1 = if i + 2 < n { self.e[i + 1] } else { 0.0 };
            if sub.abs() > a[i].abs() {
                // swap rows i and i+1
                let (oa, ou1, ou2) = (a[i], u1[i], u2[i]);
                a[i] = sub;
                u1[i] = nd;
                u2[i] = nu1;
                x.swap(i, i + 1);
                let l = oa / sub;
                nd = ou1 - l * u1[i];
                nu1 = ou2 - l * u2[i];
                x[i + 1] -= l * x[i];
            } else {
                let piv = if a[i] == 0.0 { tiny } else { a[i] };
                a[i] = piv;
                let l = sub / piv;
                nd -= l * u1[i];
                x[i + 1] -= l * x[i];
            }
            a[i + 1] = nd;
            u1[i + 1] = nu1;
            u2[i + 1] = 0.0;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * x[i + 2];
            }
            let piv = if a[i] == 0.0 { tiny } else { a[i] };
            x[i] = s / piv;
        }
        x
    }

    /// Unit eigenvector for the (already computed) eigenvalue `lambda`, with its residual norm.
    pub fn eigenvector(&self, lambda: f64) -> (Vec<f64>, f64) {
        let n = self.d.len();
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
        normalize(&mut x);
        let shift = lambda + 1e-12 * self.scale();
        let mut residual = f64::INFINITY;
        for it in 0..8 {
            let mut y = self.shifted_solve(shift, &x);
            normalize(&mut y);
            x = y;
            let ax = self.matvec(&x);
            residual = ax
                .iter()
                .zip(&x)
                .map(|(a, v)| (a - lambda * v).powi(2))
                .sum::<f64>()
                .sqrt();
            if it >= 2 && residual <= 1e-13 * self.scale() {
                break;
            }
        }
        (x, residual)
    }

    /// Lowest `count` eigenpairs; fails if an eigenvector residual stays above `max_residual`.
    pub fn lowest_pairs(
        &self,
        count: usize,
        tol: f64,
        max_residual: f64,
    ) -> Result<Vec<(f64, Vec<f64>)>> {
        self.lowest(count, tol)
            .into_iter()
            .map(|lambda| {
                let (v, res) = self.eigenvector(lambda);
                if res > max_residual {
                    Err(Error::EigenNonConvergence { residual: res })
                } else {
                    Ok((lambda, v))
                }
            })
            .collect()
    }
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}
