//! Banded matrices: LU with partial pivoting for solves, symmetric LDL^T for inertia.

use crate::error::{Error, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i - kl ..= i + kl + ku`; the extra `kl` columns hold fill-in
/// created by row interchanges during factorization.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let w = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            w,
            data: vec![0.0; n * w],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.w + (j + self.kl - i)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Add `v` to entry `(i, j)`, which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// Multiply row `i` by `s`.
    pub fn scale_row(&mut self, i: usize, s: f64) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        for j in lo..=hi {
            let k = self.idx(i, j);
            self.data[k] *= s;
        }
    }

    /// LU factorization with partial pivoting, consuming the matrix.
    pub fn lu(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let w = self.w;
        let mut piv = vec![0usize; n];
        let mut max_abs: f64 = 0.0;
        for v in &self.data {
            max_abs = max_abs.max(v.abs());
        }
        let tiny = f64::EPSILON * max_abs.max(f64::MIN_POSITIVE) * 1e-3;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[k * w + kl].abs();
            for r in k + 1..=last_row {
                let v = self.data[r * w + (k + kl - r)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            piv[k] = p;
            if best <= tiny {
                return Err(Error::LinearSolve(format!("zero pivot at row {k} of {n}")));
            }
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = k * w + (j + kl - k);
                    let b = p * w + (j + kl - p);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[k * w + kl];
            let len = last_col - k;
            for r in k + 1..=last_row {
                let lk = r * w + (k + kl - r);
                let l = self.data[lk] / pivot;
                self.data[lk] = l;
                if l != 0.0 && len > 0 {
                    let (head, tail) = self.data.split_at_mut(r * w);
                    let src = &head[k * w + kl + 1..k * w + kl + 1 + len];
                    let dst = &mut tail[(k + 1 + kl - r)..(k + 1 + kl - r) + len];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d -= l * s;
                    }
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

/// Factorization produced by [`BandMatrix::lu`].
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn n(&self) -> usize {
        self.m.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.m.n;
        let kl = self.m.kl;
        let ku = self.m.ku;
        let w = self.m.w;
        let d = &self.m.data;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for r in k + 1..=(k + kl).min(n - 1) {
                    x[r] -= d[r * w + (k + kl - r)] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let last = (k + kl + ku).min(n - 1);
            let row = &d[k * w + kl..k * w + kl + (last - k) + 1];
            let s: f64 = row[1..].iter().zip(&x[k + 1..=last]).map(|(a, b)| a * b).sum();
            x[k] = (x[k] - s) / row[0];
        }
        x
    }
}

/// Symmetric banded matrix stored by its lower band (`kd` sub-diagonals).
#[derive(Debug, Clone)]
pub struct SymBand {
    n: usize,
    kd: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, kd: usize) -> Self {
        Self {
            n,
            kd,
            data: vec![0.0; n * (kd + 1)],
        }
    }

    /// Entry `(i, j)` with `j <= i <= j + kd`.
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.kd + 1) + (self.kd + j - i)
    }

    pub fn get_lower(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.kd {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn add_lower(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j <= self.kd);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Number of negative, zero and positive eigenvalues by Sylvester's law applied to
    /// an unpivoted `LDL^T` factorization of `A - shift I`.
    pub fn inertia(&self, shift: f64) -> (usize, usize, usize) {
        let n = self.n;
        let kd = self.kd;
        let w = kd + 1;
        let mut a = self.data.clone();
        for i in 0..n {
            a[i * w + kd] -= shift;
        }
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut dvec = vec![0.0; n];
        let (mut neg, mut zero, mut pos) = (0, 0, 0);
        // Row-oriented: for each i, compute L(i, j) for j in [i-kd, i) then d_i.
        for i in 0..n {
            let j0 = i.saturating_sub(kd);
            for j in j0..i {
                // a(i,j) - sum_{k} L(i,k) d_k L(j,k), k in [max(i,j)-kd, j)
                let k0 = i.saturating_sub(kd);
                let mut s = a[i * w + (kd + j - i)];
                for k in k0.max(j.saturating_sub(kd))..j {
                    s -= a[i * w + (kd + k - i)] * dvec[k] * a[j * w + (kd + k - j)];
                }
                a[i * w + (kd + j - i)] = s / dvec[j];
            }
            let mut s = a[i * w + kd];
            for k in j0..i {
                let l = a[i * w + (kd + k - i)];
                s -= l * l * dvec[k];
            }
            if s.abs() <= 1e-14 * scale {
                zero += 1;
                s = if s < 0.0 { -1e-14 * scale } else { 1e-14 * scale };
            } else if s < 0.0 {
                neg += 1;
            } else {
                pos += 1;
            }
            dvec[i] = s;
        }
        (neg, zero, pos)
    }
}
