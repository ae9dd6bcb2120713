//! Zonal spherical harmonics on `S^{N-1}` as symmetric Jacobi polynomials.

use serde::{Deserialize, Serialize};

/// `P_n^{(alpha, alpha)}(z)` in the standard normalization `P_n(1) = binom(n + alpha, n)`.
pub fn jacobi_symmetric(n: u32, alpha: f64, z: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => (alpha + 1.0) * z,
        _ => {
            let mut p0 = 1.0;
            let mut p1 = (alpha + 1.0) * z;
            for k in 2..=n {
                let k = f64::from(k);
                let s = 2.0 * k + 2.0 * alpha;
                let a = 2.0 * k * (k + 2.0 * alpha) * (s - 2.0);
                let b = (s - 1.0) * s * (s - 2.0);
                let c = 2.0 * (k + alpha - 1.0) * (k + alpha - 1.0) * s;
                let p2 = (b * z * p1 - c * p0) / a;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

/// `d/dz P_n^{(alpha, alpha)}(z) = (n + 2 alpha + 1)/2 * P_{n-1}^{(alpha+1, alpha+1)}(z)`.
pub fn jacobi_symmetric_deriv(n: u32, alpha: f64, z: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    0.5 * (f64::from(n) + 2.0 * alpha + 1.0) * jacobi_symmetric(n - 1, alpha + 1.0, z)
}

/// The `O(N-1)`-invariant degree-`j` harmonic as a function of the polar angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalSlice {
    pub n: u32,
    pub j: u32,
}

impl SphericalSlice {
    pub fn new(n: u32, j: u32) -> Self {
        Self { n, j }
    }

    pub fn alpha(&self) -> f64 {
        (f64::from(self.n) - 3.0) / 2.0
    }

    pub fn eval(&self, theta: f64) -> f64 {
        jacobi_symmetric(self.j, self.alpha(), theta.cos())
    }

    /// Derivative with respect to `theta`.
    pub fn deriv(&self, theta: f64) -> f64 {
        -theta.sin() * jacobi_symmetric_deriv(self.j, self.alpha(), theta.cos())
    }

    /// Eigenvalue `j(N-2+j)` of `-Delta_{S^{N-1}}` on this slice.
    pub fn eigenvalue(&self) -> f64 {
        crate::params::mu_j(self.n, self.j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_when_alpha_zero() {
        for &z in &[-0.9, -0.3, 0.0, 0.41, 1.0] {
            assert!((jacobi_symmetric(2, 0.0, z) - 0.5 * (3.0 * z * z - 1.0)).abs() < 1e-14);
            let p3 = 0.5 * (5.0 * z * z * z - 3.0 * z);
            assert!((jacobi_symmetric(3, 0.0, z) - p3).abs() < 1e-14);
        }
    }

    #[test]
    fn low_degree_closed_forms() {
        for n in 3..9u32 {
            let nf = f64::from(n);
            let a = (nf - 3.0) / 2.0;
            for &z in &[-1.0, -0.5, 0.2, 0.77] {
                assert!((jacobi_symmetric(1, a, z) - (nf - 1.0) * z / 2.0).abs() < 1e-13);
                let p2 = (nf + 1.0) * (nf * z * z - 1.0) / 8.0;
                assert!((jacobi_symmetric(2, a, z) - p2).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn value_at_one_is_binomial() {
        // P_n(1) = Gamma(n + a + 1) / (Gamma(a + 1) n!)
        let a = 1.5;
        let mut expect = 1.0;
        for n in 0..12u32 {
            if n > 0 {
                expect *= (f64::from(n) + a) / f64::from(n);
            }
            assert!((jacobi_symmetric(n, a, 1.0) - expect).abs() < 1e-10 * expect);
        }
    }

    #[test]
    fn slices_are_laplace_beltrami_eigenfunctions() {
        // -(1/sin^m) d/dth (sin^m Y') = mu Y with m = N - 2
        let h = 1e-4;
        for n in 3..7 {
            let m = f64::from(n) - 2.0;
            for j in 0..6 {
                let y = SphericalSlice::new(n, j);
                for &th in &[0.3, 1.1, 2.0, 2.9] {
                    let flux = |x: f64| x.sin().powf(m) * y.deriv(x);
                    let lap = (flux(th + h) - flux(th - h)) / (2.0 * h) / th.sin().powf(m);
                    let scale = y.eval(th).abs().max(1.0);
                    assert!((-lap - y.eigenvalue() * y.eval(th)).abs() < 1e-5 * scale * (1.0 + y.eigenvalue()));
                }
            }
        }
    }

    #[test]
    fn derivative_matches_differences() {
        let y = SphericalSlice::new(5, 4);
        let h = 1e-6;
        for &th in &[0.2, 1.0, 2.5] {
            let fd = (y.eval(th + h) - y.eval(th - h)) / (2.0 * h);
            assert!((fd - y.deriv(th)).abs() < 1e-7);
        }
    }

    #[test]
    fn parity() {
        for j in 0..7 {
            let y = SphericalSlice::new(4, j);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert!((y.eval(0.4) - sign * y.eval(std::f64::consts::PI - 0.4)).abs() < 1e-13);
        }
    }
}
