//! `O(N-1)`-invariant solutions on the `(t, theta)` strip.
//!
//! With `w(t, theta) = e^{(N-2)t/2} u(e^t, theta)` the equation becomes
//! `-w_tt - w_thth - (N-2) cot(theta) w_th + kappa w = C_gamma |w|^{p-2} w`,
//! `kappa = (N-2)^2/4 - gamma`. Kelvin invariance of `u` is evenness of `w` in `t`.
//!
//! The angular part is discretized by finite volumes on nodes `theta_j = j pi/(M-1)`
//! (poles included) with exact cell volumes `int sin^{N-2}`, which makes the discrete
//! operator symmetric for the weights `h_t V_j` and reproduces the limit
//! `(N-1) w_thth` at the poles.

use std::f64::consts::PI;
use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::banded::{BandMatrix, SymBand};
use crate::closed_forms::{w_kernel_radial, w_rad};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::harmonics::SphericalSlice;
use crate::params::ProblemParams;

/// Named grid resolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Coarse,
    Default,
    Fine,
}

impl Profile {
    /// `(M_t, M_theta)` node counts.
    pub fn sizes(self) -> (usize, usize) {
        match self {
            Profile::Coarse => (401, 65),
            Profile::Default => (801, 129),
            Profile::Fine => (1601, 257),
        }
    }

    /// Interval count for the one-dimensional spectral problems.
    pub fn sl_intervals(self) -> usize {
        match self {
            Profile::Coarse => 1000,
            Profile::Default => 2000,
            Profile::Fine => 4000,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Coarse => "coarse",
            Profile::Default => "default",
            Profile::Fine => "fine",
        })
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "coarse" => Ok(Profile::Coarse),
            "default" => Ok(Profile::Default),
            "fine" => Ok(Profile::Fine),
            _ => Err(Error::InvalidArgument(format!("unknown profile '{s}'"))),
        }
    }
}

/// Tensor grid: `mt` uniform nodes on `[-T, T]`, `mth` uniform nodes on `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub half_width: f64,
    pub mt: usize,
    pub mth: usize,
}

/// Default truncation `25 / ((N-2) nu)`.
pub fn default_half_width(p: &ProblemParams) -> f64 {
    25.0 / ((p.nf() - 2.0) * p.constants().nu)
}

impl Grid2D {
    /// Both counts must be odd so that `t = 0` and `theta = pi/2` are nodes.
    pub fn new(half_width: f64, mt: usize, mth: usize) -> Result<Self> {
        if mt < 5 || mth < 5 || mt % 2 == 0 || mth % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid counts must be odd and >= 5 (got {mt} x {mth})"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad half-width {half_width}")));
        }
        Ok(Self {
            half_width,
            mt,
            mth,
        })
    }

    pub fn for_profile(p: &ProblemParams, profile: Profile) -> Self {
        let (mt, mth) = profile.sizes();
        Self {
            half_width: default_half_width(p),
            mt,
            mth,
        }
    }

    pub fn t_grid(&self) -> UniformGrid {
        UniformGrid {
            lo: -self.half_width,
            hi: self.half_width,
            m: self.mt,
        }
    }

    pub fn ht(&self) -> f64 {
        2.0 * self.half_width / (self.mt - 1) as f64
    }

    pub fn hth(&self) -> f64 {
        PI / (self.mth - 1) as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t_grid().node(i)
    }

    pub fn theta(&self, j: usize) -> f64 {
        if 2 * j < self.mth {
            self.hth() * j as f64
        } else {
            PI - self.hth() * (self.mth - 1 - j) as f64
        }
    }

    pub fn len(&self) -> usize {
        self.mt * self.mth
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mid_t(&self) -> usize {
        (self.mt - 1) / 2
    }

    pub fn mid_theta(&self) -> usize {
        (self.mth - 1) / 2
    }
}

/// Values on a [`Grid2D`], row-major in `t`: `values[i * mth + j]`.
///
/// Rows `i = 0` and `i = mt - 1` hold Dirichlet data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field2D {
    pub grid: Grid2D,
    pub values: Vec<f64>,
    pub kelvin_even: bool,
    pub theta_even: bool,
    pub params: ProblemParams,
}

impl Field2D {
    pub fn zeros(p: &ProblemParams, grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            kelvin_even: true,
            theta_even: true,
            params: *p,
        }
    }

    pub fn from_fn(p: &ProblemParams, grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.mt {
            let t = grid.t(i);
            for j in 0..grid.mth {
                values.push(f(t, grid.theta(j)));
            }
        }
        let mut out = Self {
            grid,
            values,
            kelvin_even: false,
            theta_even: false,
            params: *p,
        };
        out.kelvin_even = out.kelvin_defect() == 0.0;
        out.theta_even = out.theta_defect() == 0.0;
        out
    }

    /// Emden-Fowler image of the radial solution, sampled.
    pub fn radial(p: &ProblemParams, grid: Grid2D) -> Self {
        Self::from_fn(p, grid, |t, _| w_rad(p, t))
    }

    /// Emden-Fowler image of the `O(N-1)`-invariant degree-`j` kernel function, sampled.
    pub fn kernel(p: &ProblemParams, grid: Grid2D, j: u32) -> Self {
        let y = SphericalSlice::new(p.n, j);
        Self::from_fn(p, grid, |t, th| w_kernel_radial(p, t) * y.eval(th))
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.mth + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.values[i * self.grid.mth + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.grid.mth..(i + 1) * self.grid.mth]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &Field2D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Max over nodes of `|w(t) - w(-t)|`.
    pub fn kelvin_defect(&self) -> f64 {
        let g = self.grid;
        let mut d: f64 = 0.0;
        for i in 0..g.mt {
            for j in 0..g.mth {
                d = d.max((self.at(i, j) - self.at(g.mt - 1 - i, j)).abs());
            }
        }
        d
    }

    /// Max over nodes of `|w(theta) - w(pi - theta)|`.
    pub fn theta_defect(&self) -> f64 {
        let g = self.grid;
        let mut d: f64 = 0.0;
        for i in 0..g.mt {
            for j in 0..g.mth {
                d = d.max((self.at(i, j) - self.at(i, g.mth - 1 - j)).abs());
            }
        }
        d
    }

    /// Kelvin transform: the reflection `t -> -t`.
    pub fn kelvin(&self) -> Field2D {
        let g = self.grid;
        let mut out = self.clone();
        for i in 0..g.mt {
            for j in 0..g.mth {
                *out.at_mut(i, j) = self.at(g.mt - 1 - i, j);
            }
        }
        out
    }

    /// The reflection `theta -> pi - theta` (`x_N -> -x_N`).
    pub fn reflect_theta(&self) -> Field2D {
        let g = self.grid;
        let mut out = self.clone();
        for i in 0..g.mt {
            for j in 0..g.mth {
                *out.at_mut(i, j) = self.at(i, g.mth - 1 - j);
            }
        }
        out
    }

    /// `self + a * other`
    pub fn axpy(&self, a: f64, other: &Field2D) -> Field2D {
        let mut out = self.clone();
        for (o, v) in out.values.iter_mut().zip(&other.values) {
            *o += a * v;
        }
        out.kelvin_even = self.kelvin_even && other.kelvin_even;
        out.theta_even = self.theta_even && other.theta_even;
        out
    }

    pub fn scaled(&self, c: f64) -> Field2D {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Values of `u = e^{-(N-2)t/2} w` on the same nodes.
    pub fn to_physical(&self) -> Vec<f64> {
        let c = (self.params.nf() - 2.0) / 2.0;
        let g = self.grid;
        let mut out = self.values.clone();
        for i in 0..g.mt {
            let f = (-c * g.t(i)).exp();
            out[i * g.mth..(i + 1) * g.mth].iter_mut().for_each(|v| *v *= f);
        }
        out
    }
}

/// `w(t, theta) = e^{(N-2)t/2} u(e^t, theta)` sampled on `grid`.
pub fn emden_fowler_map(
    u: impl Fn(f64, f64) -> f64,
    p: &ProblemParams,
    grid: Grid2D,
) -> Field2D {
    let c = (p.nf() - 2.0) / 2.0;
    Field2D::from_fn(p, grid, |t, th| (c * t).exp() * u(t.exp(), th))
}

/// `|S^{d}|` for `d >= 1`.
pub fn sphere_measure(d: u32) -> f64 {
    // 2 pi^{(d+1)/2} / Gamma((d+1)/2)
    let mut gamma_half = if (d + 1) % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if (d + 1) % 2 == 0 { 1.0 } else { 0.5 };
    let target = f64::from(d + 1) / 2.0;
    while x < target - 1e-12 {
        gamma_half *= x;
        x += 1.0;
    }
    2.0 * PI.powf(f64::from(d + 1) / 2.0) / gamma_half
}

/// Finite-volume geometry of the angular operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaGeometry {
    /// `V_j = int_{cell j} sin^{N-2}`.
    pub volumes: Vec<f64>,
    /// `S_{j+1/2} = sin^{N-2}(theta_{j+1/2})`, `j = 0..mth-1`.
    pub faces: Vec<f64>,
    pub h: f64,
}

impl ThetaGeometry {
    pub fn new(n: u32, mth: usize) -> Self {
        let m = f64::from(n) - 2.0;
        let h = PI / (mth - 1) as f64;
        let rule = GaussLegendre::new(NonZeroUsize::new(16).expect("nonzero"));
        let volumes = (0..mth)
            .map(|j| {
                let c = h * j as f64;
                let lo = (c - h / 2.0).max(0.0);
                let hi = (c + h / 2.0).min(PI);
                rule.integrate(lo, hi, |x: f64| x.sin().powf(m))
            })
            .collect();
        let faces = (0..mth - 1)
            .map(|j| (h * (j as f64 + 0.5)).sin().powf(m))
            .collect();
        Self { volumes, faces, h }
    }

    /// `(A w)_j` with `A = -(1/sin^m) d/dth (sin^m d/dth)`.
    pub fn apply(&self, w: &[f64], out: &mut [f64]) {
        let n = w.len();
        for j in 0..n {
            let mut flux = 0.0;
            if j + 1 < n {
                flux += self.faces[j] * (w[j + 1] - w[j]);
            }
            if j > 0 {
                flux -= self.faces[j - 1] * (w[j] - w[j - 1]);
            }
            out[j] = -flux / (self.h * self.volumes[j]);
        }
    }

    /// Coefficients `(lower, diag, upper)` of row `j`.
    pub fn row(&self, j: usize) -> (f64, f64, f64) {
        let n = self.volumes.len();
        let s = 1.0 / (self.h * self.volumes[j]);
        let lo = if j > 0 { self.faces[j - 1] } else { 0.0 };
        let up = if j + 1 < n { self.faces[j] } else { 0.0 };
        (-lo * s, (lo + up) * s, -up * s)
    }

    /// Eigenvalues of the discrete angular operator (ascending) with their parity under
    /// `theta -> pi - theta` (true for even).
    pub fn spectrum(&self, count: usize) -> Vec<(f64, bool)> {
        // Symmetrize with V^{1/2}: off-diagonal -S_{j+1/2} / (h sqrt(V_j V_{j+1})).
        let n = self.volumes.len();
        let d: Vec<f64> = (0..n).map(|j| self.row(j).1).collect();
        let e: Vec<f64> = (0..n - 1)
            .map(|j| -self.faces[j] / (self.h * (self.volumes[j] * self.volumes[j + 1]).sqrt()))
            .collect();
        let t = crate::tridiag::SymTridiag { d, e };
        t.lowest(count, 1e-12)
            .into_iter()
            .map(|l| {
                let (v, _) = t.eigenvector(l);
                let even = v.iter().zip(v.iter().rev()).map(|(a, b)| a * b).sum::<f64>() > 0.0;
                (l, even)
            })
            .collect()
    }
}

/// Unknown layout after imposing Kelvin evenness (`t >= 0`) and optionally evenness in
/// `theta` about `pi/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduction {
    pub grid: Grid2D,
    pub theta_even: bool,
    pub i0: usize,
    pub nt: usize,
    pub nth: usize,
}

impl Reduction {
    pub fn new(grid: Grid2D, theta_even: bool) -> Self {
        let i0 = grid.mid_t();
        Self {
            grid,
            theta_even,
            i0,
            nt: grid.mt - 1 - i0,
            nth: if theta_even { grid.mid_theta() + 1 } else { grid.mth },
        }
    }

    pub fn len(&self) -> usize {
        self.nt * self.nth
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        (i - self.i0) * self.nth + j
    }

    /// Reduced index holding the value of full node `(i, j)`, or `None` on the Dirichlet rows.
    pub fn source(&self, i: usize, j: usize) -> Option<usize> {
        let g = self.grid;
        let ii = if i < self.i0 { g.mt - 1 - i } else { i };
        if ii >= g.mt - 1 {
            return None;
        }
        let jj = if self.theta_even && j > g.mid_theta() { g.mth - 1 - j } else { j };
        Some(self.index(ii, jj))
    }

    /// Orbit sizes times quadrature weights `h_t V_j`.
    pub fn weights(&self, geo: &ThetaGeometry) -> Vec<f64> {
        let ht = self.grid.ht();
        let mut w = Vec::with_capacity(self.len());
        for i in self.i0..self.i0 + self.nt {
            let oi = if i == self.i0 { 1.0 } else { 2.0 };
            for j in 0..self.nth {
                let oj = if self.theta_even && j != self.grid.mid_theta() { 2.0 } else { 1.0 };
                w.push(oi * oj * ht * geo.volumes[j]);
            }
        }
        w
    }

    pub fn gather(&self, f: &Field2D) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for i in self.i0..self.i0 + self.nt {
            out.extend_from_slice(&f.row(i)[..self.nth]);
        }
        out
    }

    /// Write reduced values into `f` (all mirror images), leaving the Dirichlet rows alone.
    pub fn scatter(&self, x: &[f64], f: &mut Field2D) {
        let g = self.grid;
        for i in 1..g.mt - 1 {
            for j in 0..g.mth {
                if let Some(k) = self.source(i, j) {
                    *f.at_mut(i, j) = x[k];
                }
            }
        }
        f.kelvin_even = true;
        f.theta_even = self.theta_even || f.theta_defect() == 0.0;
    }
}

/// The discretized operator for fixed `(N, s, gamma)` and grid.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub params: ProblemParams,
    pub grid: Grid2D,
    pub geo: ThetaGeometry,
    pub kappa: f64,
    pub c_gamma: f64,
    pub p_s: f64,
}

/// Newton settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Deflate the radial solution (multiplier `1/||w - w_rad||^2 + 1`).
    pub deflate_radial: bool,
    /// Distance below which the result is flagged as radial.
    pub radial_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            deflate_radial: false,
            radial_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
    /// `max |w - w_rad,h|` against the discrete radial solution.
    pub distance_to_radial: f64,
    pub converged_to_radial: bool,
}

impl Discretization {
    pub fn new(p: &ProblemParams, grid: Grid2D) -> Result<Self> {
        p.validate()?;
        Grid2D::new(grid.half_width, grid.mt, grid.mth)?;
        let c = p.constants();
        Ok(Self {
            params: *p,
            grid,
            geo: ThetaGeometry::new(p.n, grid.mth),
            kappa: (p.nf() - 2.0).powi(2) / 4.0 - p.gamma,
            c_gamma: c.c_gamma,
            p_s: c.p_s,
        })
    }

    /// Same grid and geometry at another `gamma`.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        let p = self.params.with_gamma(gamma)?;
        let c = p.constants();
        Ok(Self {
            params: p,
            grid: self.grid,
            geo: self.geo.clone(),
            kappa: (p.nf() - 2.0).powi(2) / 4.0 - gamma,
            c_gamma: c.c_gamma,
            p_s: c.p_s,
        })
    }

    fn check(&self, w: &Field2D) -> Result<()> {
        if w.grid != self.grid {
            return Err(Error::InvalidArgument("field lives on a different grid".into()));
        }
        Ok(())
    }

    fn nonlinearity(&self, w: f64) -> f64 {
        self.c_gamma * w.abs().powf(self.p_s - 2.0) * w
    }

    /// `d/dw` of the nonlinearity.
    pub fn nonlinearity_deriv(&self, w: f64) -> f64 {
        self.c_gamma * (self.p_s - 1.0) * w.abs().powf(self.p_s - 2.0)
    }

    /// Linear part `(-D_tt + A_theta + kappa) w` on interior rows.
    pub fn apply_linear(&self, w: &Field2D) -> Field2D {
        let g = self.grid;
        let inv = 1.0 / (g.ht() * g.ht());
        let mut out = Field2D {
            values: vec![0.0; g.len()],
            ..w.clone()
        };
        let mut buf = vec![0.0; g.mth];
        for i in 1..g.mt - 1 {
            self.geo.apply(w.row(i), &mut buf);
            for j in 0..g.mth {
                let d2 = (w.at(i + 1, j) - 2.0 * w.at(i, j) + w.at(i - 1, j)) * inv;
                *out.at_mut(i, j) = -d2 + buf[j] + self.kappa * w.at(i, j);
            }
        }
        out
    }

    /// Pointwise residual on interior rows (zero on the Dirichlet rows).
    pub fn residual(&self, w: &Field2D) -> Result<Field2D> {
        self.check(w)?;
        let mut r = self.apply_linear(w);
        let g = self.grid;
        for i in 1..g.mt - 1 {
            for j in 0..g.mth {
                *r.at_mut(i, j) -= self.nonlinearity(w.at(i, j));
            }
        }
        Ok(r)
    }

    pub fn residual_norm(&self, w: &Field2D) -> Result<f64> {
        Ok(self.residual(w)?.sup_norm())
    }

    /// Frechet derivative of [`Discretization::residual`] at `w`.
    pub fn jacobian(&self, w: &Field2D) -> Result<Jacobian<'_>> {
        self.check(w)?;
        let potential = w.values.iter().map(|&x| -self.nonlinearity_deriv(x)).collect();
        Ok(Jacobian {
            disc: self,
            potential,
        })
    }

    /// Banded matrix of `-D_tt + A_theta + kappa + potential` on the reduced unknowns.
    pub fn assemble(&self, potential: &[f64], red: &Reduction) -> BandMatrix {
        let g = self.grid;
        let n = red.len();
        let inv = 1.0 / (g.ht() * g.ht());
        let mut a = BandMatrix::zeros(n, red.nth, red.nth);
        for i in red.i0..red.i0 + red.nt {
            for j in 0..red.nth {
                let k = red.index(i, j);
                let (lo, di, up) = self.geo.row(j);
                a.add(k, k, 2.0 * inv + di + self.kappa + potential[i * g.mth + j]);
                for (ii, c) in [(i - 1, -inv), (i + 1, -inv)] {
                    if let Some(col) = red.source(ii, j) {
                        a.add(k, col, c);
                    }
                }
                if j > 0 {
                    a.add(k, red.source(i, j - 1).expect("interior"), lo);
                }
                if j + 1 < g.mth {
                    a.add(k, red.source(i, j + 1).expect("interior"), up);
                }
            }
        }
        a
    }

    /// Same operator multiplied by the reduced weights, which makes it symmetric.
    pub fn assemble_symmetric(&self, potential: &[f64], red: &Reduction) -> SymBand {
        let g = self.grid;
        let wts = red.weights(&self.geo);
        let inv = 1.0 / (g.ht() * g.ht());
        let mut a = SymBand::zeros(red.len(), red.nth);
        for i in red.i0..red.i0 + red.nt {
            for j in 0..red.nth {
                let k = red.index(i, j);
                let (lo, di, up) = self.geo.row(j);
                let wk = wts[k];
                a.add_lower(k, k, wk * (2.0 * inv + di + self.kappa + potential[i * g.mth + j]));
                // only couplings to smaller reduced indices, each symmetric pair once
                if i > red.i0 {
                    a.add_lower(k, red.index(i - 1, j), -wk * inv);
                }
                if j > 0 {
                    a.add_lower(k, red.index(i, j - 1), wk * lo);
                }
                if red.theta_even && j == g.mid_theta() {
                    // the mirrored neighbour folds onto j - 1
                    a.add_lower(k, red.index(i, j - 1), wk * up);
                }
            }
        }
        a
    }

    /// Number of negative eigenvalues of the Jacobian at `w` in the Kelvin-even subspace
    /// (optionally also `theta`-even).
    pub fn negative_eigen_count(&self, w: &Field2D, theta_even: bool) -> Result<usize> {
        self.check(w)?;
        let red = Reduction::new(self.grid, theta_even);
        let potential: Vec<f64> = w.values.iter().map(|&x| -self.nonlinearity_deriv(x)).collect();
        Ok(self.assemble_symmetric(&potential, &red).inertia(0.0).0)
    }

    /// Solve `(-D_tt + A_theta + kappa + potential) v = rhs` with zero Dirichlet data.
    pub fn solve_linear(
        &self,
        potential: &[f64],
        rhs: &Field2D,
        theta_even: bool,
    ) -> Result<Field2D> {
        let red = Reduction::new(self.grid, theta_even);
        let lu = self.assemble(potential, &red).lu()?;
        let x = lu.solve(&red.gather(rhs));
        let mut out = Field2D::zeros(&self.params, self.grid);
        red.scatter(&x, &mut out);
        Ok(out)
    }

    /// Discrete radial solution: one-dimensional Newton for
    /// `-D_tt w + kappa w - C |w|^{p-2} w = 0` with Dirichlet data `w_rad(+-T)`, started
    /// from the sampled closed form.
    pub fn radial_solution(&self) -> Result<Field2D> {
        self.radial_solution_with(w_rad(&self.params, self.grid.half_width))
    }

    /// Discrete radial solution with Dirichlet value `boundary` at `t = +-T`.
    pub fn radial_solution_with(&self, boundary: f64) -> Result<Field2D> {
        let g = self.grid;
        let p = &self.params;
        let h = g.ht();
        let inv = 1.0 / (h * h);
        let mut w: Vec<f64> = (0..g.mt).map(|i| w_rad(p, g.t(i))).collect();
        w[0] = boundary;
        w[g.mt - 1] = boundary;
        let res = |w: &[f64]| -> Vec<f64> {
            (1..g.mt - 1)
                .map(|i| {
                    -(w[i + 1] - 2.0 * w[i] + w[i - 1]) * inv + self.kappa * w[i]
                        - self.nonlinearity(w[i])
                })
                .collect()
        };
        let mut r = res(&w);
        let mut it = 0;
        while r.iter().fold(0.0f64, |m, v| m.max(v.abs())) > 1e-13 * (1.0 + inv) {
            if it >= 50 {
                return Err(Error::MaxIterations {
                    iterations: it,
                    residual: r.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                });
            }
            let n = g.mt - 2;
            let mut a = BandMatrix::zeros(n, 1, 1);
            for k in 0..n {
                a.add(k, k, 2.0 * inv + self.kappa - self.nonlinearity_deriv(w[k + 1]));
                if k > 0 {
                    a.add(k, k - 1, -inv);
                }
                if k + 1 < n {
                    a.add(k, k + 1, -inv);
                }
            }
            let d = a.lu()?.solve(&r);
            for k in 0..n {
                w[k + 1] -= d[k];
            }
            let r_new = res(&w);
            // symmetrize exactly; the problem is even in t
            for i in 0..g.mt / 2 {
                let m = 0.5 * (w[i] + w[g.mt - 1 - i]);
                w[i] = m;
                w[g.mt - 1 - i] = m;
            }
            r = if r_new.iter().all(|v| v.is_finite()) { res(&w) } else { r_new };
            it += 1;
        }
        Ok(Field2D::from_fn(p, g, |t, _| {
            let i = ((t + g.half_width) / h).round() as usize;
            w[i.min(g.mt - 1)]
        }))
    }

    /// Damped Newton on the symmetry-reduced unknowns. Symmetry flags of `w0` select the
    /// reduction; the Dirichlet rows of `w0` are kept as boundary data.
    pub fn newton_solve(
        &self,
        w0: &Field2D,
        opts: &NewtonOptions,
        radial: Option<&Field2D>,
    ) -> Result<(Field2D, NewtonReport)> {
        self.check(w0)?;
        let theta_even = w0.theta_even;
        let red = Reduction::new(self.grid, theta_even);
        let wts = red.weights(&self.geo);
        let owned_radial;
        let radial = match radial {
            Some(r) => r,
            None => {
                owned_radial = self.radial_solution()?;
                &owned_radial
            }
        };
        let xr = red.gather(radial);
        let mut w = w0.clone();
        red.scatter(&red.gather(w0), &mut w);

        let norm2 = |x: &[f64]| -> f64 {
            x.iter()
                .zip(&xr)
                .zip(&wts)
                .map(|((a, b), c)| c * (a - b) * (a - b))
                .sum()
        };
        let merit = |w: &Field2D| -> Result<(f64, Vec<f64>)> {
            let r = red.gather(&self.residual(w)?);
            let sup = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Ok((sup, r))
        };
        let (mut res, mut r) = merit(&w)?;
        let mut history = vec![res];
        let mut it = 0;
        while res > opts.tol {
            if it >= opts.max_iter {
                return Err(Error::MaxIterations {
                    iterations: it,
                    residual: res,
                });
            }
            let x = red.gather(&w);
            let potential: Vec<f64> = w.values.iter().map(|&v| -self.nonlinearity_deriv(v)).collect();
            let lu = self.assemble(&potential, &red).lu()?;
            let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
            let mut step = lu.solve(&neg_r);
            let deflation = |x: &[f64]| 1.0 / norm2(x) + 1.0;
            if opts.deflate_radial {
                let d2 = norm2(&x);
                let m = 1.0 / d2 + 1.0;
                // gradient of m: -2 G (x - xr) / d2^2
                let gdot: f64 = step
                    .iter()
                    .zip(&x)
                    .zip(&xr)
                    .zip(&wts)
                    .map(|(((s, a), b), c)| -2.0 * c * (a - b) * s / (d2 * d2))
                    .sum();
                let denom = 1.0 - gdot / m;
                if denom.abs() > 1e-12 {
                    step.iter_mut().for_each(|s| *s /= denom);
                }
            }
            let deflated_merit = |x: &[f64], res: f64| {
                if opts.deflate_radial {
                    deflation(x) * res
                } else {
                    res
                }
            };
            let current = deflated_merit(&x, res);
            let mut lambda = 1.0;
            let mut accepted = false;
            let mut trial = w.clone();
            for _ in 0..30 {
                let xt: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + lambda * s).collect();
                red.scatter(&xt, &mut trial);
                let (rt, rvec) = merit(&trial)?;
                if rt.is_finite() && (deflated_merit(&xt, rt) < current || rt <= opts.tol) {
                    w = trial.clone();
                    res = rt;
                    r = rvec;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(Error::MaxIterations {
                    iterations: it,
                    residual: res,
                });
            }
            history.push(res);
            it += 1;
        }
        let distance = w.sup_distance(radial);
        Ok((
            w,
            NewtonReport {
                iterations: it,
                residual: res,
                history,
                distance_to_radial: distance,
                converged_to_radial: distance < opts.radial_tol,
            },
        ))
    }

    /// Weighted inner product `sum h_t V_j a b` over interior nodes, times `|S^{N-2}|`.
    pub fn inner(&self, a: &Field2D, b: &Field2D) -> f64 {
        let g = self.grid;
        let ht = g.ht();
        let mut s = 0.0;
        for i in 1..g.mt - 1 {
            for j in 0..g.mth {
                s += ht * self.geo.volumes[j] * a.at(i, j) * b.at(i, j);
            }
        }
        s * sphere_measure(self.params.n - 2)
    }

    /// `<w, (-D_tt + A_theta + kappa) w>`: the quadratic part
    /// `int |grad u|^2 - gamma int u^2/|x|^2`.
    pub fn quadratic_form(&self, w: &Field2D) -> f64 {
        self.inner(w, &self.apply_linear(w))
    }

    /// `int |u|^{p_s} / |x|^s`.
    pub fn power_integral(&self, w: &Field2D) -> f64 {
        let g = self.grid;
        let ht = g.ht();
        let mut s = 0.0;
        for i in 1..g.mt - 1 {
            for j in 0..g.mth {
                s += ht * self.geo.volumes[j] * w.at(i, j).abs().powf(self.p_s);
            }
        }
        s * sphere_measure(self.params.n - 2)
    }

    /// `int |grad u|^2`.
    pub fn dirichlet_energy(&self, w: &Field2D) -> f64 {
        self.quadratic_form(w) + self.params.gamma * self.inner(w, w)
    }

    /// Discrete energy norm `sqrt(<v, (-D_tt + A_theta + kappa) v>)`.
    pub fn energy_norm(&self, v: &Field2D) -> f64 {
        self.quadratic_form(v).max(0.0).sqrt()
    }
}

/// Linearization of the residual at a fixed field.
pub struct Jacobian<'a> {
    disc: &'a Discretization,
    potential: Vec<f64>,
}

impl Jacobian<'_> {
    pub fn apply(&self, v: &Field2D) -> Field2D {
        let mut out = self.disc.apply_linear(v);
        let g = self.disc.grid;
        for i in 1..g.mt - 1 {
            for j in 0..g.mth {
                *out.at_mut(i, j) += self.potential[i * g.mth + j] * v.at(i, j);
            }
        }
        out
    }

    /// Inertia in the Kelvin-even subspace.
    pub fn negative_count(&self, theta_even: bool) -> usize {
        let red = Reduction::new(self.disc.grid, theta_even);
        self.disc
            .assemble_symmetric(&self.potential, &red)
            .inertia(0.0)
            .0
    }
}

/// Monotonicity cones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Cone {
    K1Plus,
    K1Minus,
    K2Plus,
    K2Minus,
}

impl Cone {
    pub const ALL: [Cone; 4] = [Cone::K1Plus, Cone::K1Minus, Cone::K2Plus, Cone::K2Minus];

    /// Harmonic degree whose kernel spawns branches in this cone.
    pub fn degree(self) -> u32 {
        match self {
            Cone::K1Plus | Cone::K1Minus => 1,
            Cone::K2Plus | Cone::K2Minus => 2,
        }
    }

    /// +1 for non-decreasing, -1 for non-increasing in `theta`.
    pub fn sign(self) -> f64 {
        match self {
            Cone::K1Plus | Cone::K2Plus => 1.0,
            Cone::K1Minus | Cone::K2Minus => -1.0,
        }
    }

    pub fn theta_even(self) -> bool {
        self.degree() == 2
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cone::K1Plus => "k1+",
            Cone::K1Minus => "k1-",
            Cone::K2Plus => "k2+",
            Cone::K2Minus => "k2-",
        })
    }
}

impl FromStr for Cone {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "k1+" | "k1plus" => Ok(Cone::K1Plus),
            "k1-" | "k1minus" => Ok(Cone::K1Minus),
            "k2+" | "k2plus" => Ok(Cone::K2Plus),
            "k2-" | "k2minus" => Ok(Cone::K2Minus),
            _ => Err(Error::InvalidArgument(format!("unknown cone '{s}'"))),
        }
    }
}

impl From<Cone> for String {
    fn from(c: Cone) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for Cone {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Result of [`cone_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeDiagnostics {
    pub cone: Cone,
    /// Minimum of `sign * dw/dtheta` over the monotonicity region.
    pub min_signed_derivative: f64,
    /// `max |w(theta) - w(pi - theta)|`, relevant for the degree-2 cones.
    pub evenness_defect: f64,
    pub member: bool,
}

/// Default membership tolerance, relative to `sup |w|`.
pub const CONE_TOL: f64 = 1e-10;

/// Signed discrete `theta`-derivative test on `[0, pi]` (degree-1 cones) or `[0, pi/2]`
/// plus evenness (degree-2 cones).
pub fn cone_check(w: &Field2D, cone: Cone, rel_tol: f64) -> ConeDiagnostics {
    let g = w.grid;
    let h = g.hth();
    let last = if cone.theta_even() { g.mid_theta() } else { g.mth - 1 };
    let mut min_d = f64::INFINITY;
    for i in 0..g.mt {
        let row = w.row(i);
        for j in 0..last {
            min_d = min_d.min(cone.sign() * (row[j + 1] - row[j]) / h);
        }
    }
    let scale = w.sup_norm().max(f64::MIN_POSITIVE);
    let tol = rel_tol * scale;
    let evenness_defect = if cone.theta_even() { w.theta_defect() } else { 0.0 };
    ConeDiagnostics {
        cone,
        min_signed_derivative: min_d,
        evenness_defect,
        member: min_d >= -tol && evenness_defect <= tol,
    }
}

/// Least-squares decay rate of `max_theta |w(t, .)|` over `t in [T/4, 3T/4]`.
pub fn decay_rate(w: &Field2D) -> f64 {
    let g = w.grid;
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in g.mid_t()..g.mt {
        let t = g.t(i);
        if t < g.half_width / 4.0 || t > 3.0 * g.half_width / 4.0 {
            continue;
        }
        let m = w.row(i).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if m <= 0.0 {
            continue;
        }
        let y = m.ln();
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        n += 1.0;
    }
    -(n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Expected decay rate `(N-2) nu / 2` of solutions at `|t| -> infinity`.
pub fn expected_decay_rate(p: &ProblemParams) -> f64 {
    (p.nf() - 2.0) * p.constants().nu / 2.0
}

/// Jacobian spectrum at the discrete radial solution, which separates into a `t`-part
/// and the discrete angular eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialLinearization {
    /// Lowest Kelvin-even eigenvalue of `-D_tt + kappa - C (p-1) w_rad^{p-2}`.
    pub t_ground: f64,
    /// Discrete angular eigenvalues with `theta`-parity.
    pub angular: Vec<(f64, bool)>,
}

impl Discretization {
    /// Spectrum data of the Jacobian at the discrete radial solution.
    pub fn radial_linearization(&self, radial: &Field2D, degrees: usize) -> Result<RadialLinearization> {
        let g = self.grid;
        let inv = 1.0 / (g.ht() * g.ht());
        let d: Vec<f64> = (1..g.mt - 1)
            .map(|i| 2.0 * inv + self.kappa - self.nonlinearity_deriv(radial.at(i, 0)))
            .collect();
        let t = crate::tridiag::SymTridiag {
            e: vec![-inv; d.len() - 1],
            d,
        };
        // the ground state of an even potential is even
        let t_ground = t.eigenvalue(0, 1e-13);
        Ok(RadialLinearization {
            t_ground,
            angular: self.geo.spectrum(degrees),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{eval_radial_log, RadialKind};
    use crate::params::gamma_j;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pp(n: u32, s: f64, g: f64) -> ProblemParams {
        ProblemParams::new(n, s, g).unwrap()
    }

    fn small_grid(p: &ProblemParams) -> Grid2D {
        Grid2D::new(default_half_width(p), 201, 33).unwrap()
    }

    #[test]
    fn sphere_measures() {
        assert!((sphere_measure(1) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_measure(2) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_measure(3) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn mapped_radial_examples() {
        let p = pp(4, 0.0, 0.0);
        let g = small_grid(&p);
        let f = emden_fowler_map(
            |r, _| eval_radial_log(RadialKind::U, &p, r.ln()),
            &p,
            g,
        );
        let w = Field2D::radial(&p, g);
        assert!(f.sup_distance(&w) < 1e-14);
        assert!(w.kelvin_even && w.theta_even);
        assert!((w.at(g.mid_t(), 3) - 0.5).abs() < 1e-15);
        assert!((w.at(g.mid_t() + 10, 0) - 1.0 / (2.0 * g.t(g.mid_t() + 10).cosh())).abs() < 1e-15);
    }

    #[test]
    fn volumes_sum_to_sphere_ratio() {
        for n in 3..7 {
            let geo = ThetaGeometry::new(n, 65);
            let total: f64 = geo.volumes.iter().sum();
            // int_0^pi sin^{N-2} = |S^{N-1}| / |S^{N-2}|
            assert!((total - sphere_measure(n - 1) / sphere_measure(n - 2)).abs() < 1e-12);
        }
    }

    #[test]
    fn angular_operator_reproduces_harmonics() {
        for n in [3u32, 4, 5] {
            let geo = ThetaGeometry::new(n, 257);
            let spec = geo.spectrum(4);
            for (k, (l, even)) in spec.iter().enumerate() {
                let mu = crate::params::mu_j(n, k as u32);
                assert!((l - mu).abs() < 2e-3 * (1.0 + mu), "N={n} k={k} {l} vs {mu}");
                assert_eq!(*even, k % 2 == 0);
            }
        }
    }

    #[test]
    fn residual_of_mapped_radial_is_second_order() {
        for p in [pp(3, 0.0, 0.0), pp(4, 1.0, -2.0)] {
            let g1 = Grid2D::new(default_half_width(&p), 201, 17).unwrap();
            let g2 = Grid2D::new(g1.half_width, 401, 17).unwrap();
            let r1 = Discretization::new(&p, g1).unwrap().residual_norm(&Field2D::radial(&p, g1)).unwrap();
            let r2 = Discretization::new(&p, g2).unwrap().residual_norm(&Field2D::radial(&p, g2)).unwrap();
            assert!((r1 / r2 - 4.0).abs() < 0.8, "{r1} {r2}");
        }
        let p = pp(3, 0.0, 0.0);
        let g = small_grid(&p);
        let d = Discretization::new(&p, g).unwrap();
        assert_eq!(d.residual_norm(&Field2D::zeros(&p, g)).unwrap(), 0.0);
    }

    #[test]
    fn kernel_kills_linear_term() {
        let p = pp(3, 0.0, gamma_j(3, 0.0, 1).unwrap());
        let g = Grid2D::new(default_half_width(&p), 401, 33).unwrap();
        let d = Discretization::new(&p, g).unwrap();
        let w = Field2D::radial(&p, g);
        let z = Field2D::kernel(&p, g, 1);
        let base = d.residual_norm(&w).unwrap();
        let r1 = d.residual_norm(&w.axpy(1e-2, &z)).unwrap();
        let r2 = d.residual_norm(&w.axpy(2e-2, &z)).unwrap();
        // residual minus the O(h^2) part scales like eps^2, not eps
        let a = r1 - base;
        let b = r2 - base;
        assert!(b / a > 3.0, "{base} {r1} {r2}");
    }

    #[test]
    fn jacobian_directional_derivative() {
        let p = pp(3, 0.5, -0.3);
        let g = small_grid(&p);
        let d = Discretization::new(&p, g).unwrap();
        let w = Field2D::radial(&p, g).axpy(0.1, &Field2D::kernel(&p, g, 1));
        let v = Field2D::kernel(&p, g, 2);
        let jv = d.jacobian(&w).unwrap().apply(&v);
        let r0 = d.residual(&w).unwrap();
        let err = |eps: f64| {
            let r = d.residual(&w.axpy(eps, &v)).unwrap();
            r.values
                .iter()
                .zip(&r0.values)
                .zip(&jv.values)
                .fold(0.0f64, |m, ((a, b), c)| m.max(((a - b) / eps - c).abs()))
        };
        let (e1, e2) = (err(1e-3), err(5e-4));
        assert!(e1 < 1e-1 && (e1 / e2 - 2.0).abs() < 0.3, "{e1} {e2}");
    }

    #[test]
    fn jacobian_at_zero_is_positive() {
        let p = pp(3, 0.0, 0.2);
        let g = small_grid(&p);
        let d = Discretization::new(&p, g).unwrap();
        let z = Field2D::zeros(&p, g);
        assert_eq!(d.negative_eigen_count(&z, false).unwrap(), 0);
    }

    #[test]
    fn symmetric_assembly_matches_banded() {
        let p = pp(4, 0.3, -0.5);
        let g = Grid2D::new(6.0, 21, 9).unwrap();
        let d = Discretization::new(&p, g).unwrap();
        let w = Field2D::radial(&p, g).axpy(0.2, &Field2D::kernel(&p, g, 2));
        for theta_even in [false, true] {
            let red = Reduction::new(g, theta_even);
            let pot: Vec<f64> = w.values.iter().map(|&x| -d.nonlinearity_deriv(x)).collect();
            let a = d.assemble(&pot, &red);
            let s = d.assemble_symmetric(&pot, &red);
            let wts = red.weights(&d.geo);
            // G A is symmetric and equals the lower-band assembly
            for k in 0..red.len() {
                for l in k.saturating_sub(red.nth)..=k {
                    let ga = wts[k] * a.get(k, l);
                    let ag = wts[l] * a.get(l, k);
                    assert!((ga - ag).abs() < 1e-9 * (1.0 + ga.abs()), "asym at {k},{l}");
                    let sv = s_get(&s, k, l);
                    assert!((ga - sv).abs() < 1e-9 * (1.0 + ga.abs()), "{k},{l}: {ga} vs {sv}");
                }
            }
        }
    }

    fn s_get(s: &SymBand, i: usize, j: usize) -> f64 {
        s.get_lower(i, j)
    }

    #[test]
    fn newton_from_radial_exact_needs_no_steps() {
        let p = pp(3, 0.0, 0.05);
        let g = small_grid(&p);
        let d = Discretization::new(&p, g).unwrap();
        let wr = d.radial_solution().unwrap();
        let (w, rep) = d.newton_solve(&wr, &NewtonOptions::default(), Some(&wr)).unwrap();
        assert_eq!(rep.iterations, 0);
        assert!(rep.converged_to_radial);
        assert!(w.sup_distance(&wr) == 0.0);
        // sampled closed form converges in a few steps
        let (_, rep) = d
            .newton_solve(&Field2D::radial(&p, g), &NewtonOptions::default(), Some(&wr))
            .unwrap();
        assert!(rep.iterations <= 4, "{rep:?}");
        assert!(rep.converged_to_radial);
    }

    #[test]
    fn newton_returns_to_radial_when_nondegenerate() {
        let p = pp(3, 0.0, gamma_j(3, 0.0, 1).unwrap() + 0.05);
        let g = small_grid(&p);
        let d = Discretization::new(&p, g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w0 = Field2D::radial(&p, g);
        let mut noisy = w0.clone();
        for i in 1..g.mt - 1 {
            for j in 0..g.mth {
                let eps: f64 = rng.gen_range(-1e-3..1e-3);
                *noisy.at_mut(i, j) += eps * w0.at(i, j);
            }
        }
        // impose Kelvin evenness, keep no theta symmetry
        let red = Reduction::new(g, false);
        red.scatter(&red.gather(&noisy), &mut noisy);
        noisy.theta_even = false;
        let (_, rep) = d.newton_solve(&noisy, &NewtonOptions::default(), None).unwrap();
        assert!(rep.converged_to_radial, "{rep:?}");
    }

    #[test]
    fn maximum_principle() {
        let p = pp(3, 0.0, -0.4);
        let g = small_grid(&p);
        let d = Discretization::new(&p, g).unwrap();
        let pot = vec![0.0; g.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let mut f = Field2D::zeros(&p, g);
            for v in f.values.iter_mut() {
                *v = -rng.gen_range(0.0..1.0f64);
            }
            f.theta_even = false;
            // Kelvin-even forcing
            let red = Reduction::new(g, false);
            red.scatter(&red.gather(&f), &mut f);
            let v = d.solve_linear(&pot, &f, false).unwrap();
            assert!(v.values.iter().all(|&x| x <= 1e-14));
        }
    }

    #[test]
    fn cone_examples() {
        let p = pp(3, 0.0, 0.0);
        let g = small_grid(&p);
        let w = Field2D::radial(&p, g);
        for c in Cone::ALL {
            assert!(cone_check(&w, c, CONE_TOL).member);
        }
        let z1 = Field2D::kernel(&p, g, 1);
        let plus = w.axpy(-0.05, &z1);
        assert!(cone_check(&plus, Cone::K1Plus, CONE_TOL).member);
        assert!(!cone_check(&plus, Cone::K1Minus, CONE_TOL).member);
        let z2 = Field2D::kernel(&p, g, 2);
        for (eps, good) in [(-0.05, Cone::K2Plus), (0.05, Cone::K2Minus)] {
            let f = w.axpy(eps, &z2);
            assert!(cone_check(&f, good, CONE_TOL).member);
            assert!(!cone_check(&f, Cone::K1Plus, CONE_TOL).member);
            assert!(!cone_check(&f, Cone::K1Minus, CONE_TOL).member);
        }
        assert!("k3+".parse::<Cone>().is_err());
    }

    #[test]
    fn kelvin_on_fields() {
        let p = pp(3, 0.0, -0.2);
        let g = small_grid(&p);
        let w = Field2D::radial(&p, g);
        assert_eq!(w.kelvin(), w);
        let odd = Field2D::from_fn(&p, g, |t, th| t * th.cos());
        assert_eq!(odd.kelvin().kelvin(), odd);
        assert!(odd.kelvin().sup_distance(&odd.scaled(-1.0)) < 1e-14);
    }

    #[test]
    fn decay_of_radial() {
        for p in [pp(3, 0.0, 0.0), pp(3, 0.0, -0.5), pp(5, 1.0, 1.0)] {
            let g = Grid2D::for_profile(&p, Profile::Coarse);
            let w = Field2D::radial(&p, g);
            let rate = decay_rate(&w);
            assert!((rate / expected_decay_rate(&p) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn radial_spectrum_crosses_at_gamma_one() {
        let p0 = pp(3, 0.0, 0.0);
        let g = Grid2D::new(default_half_width(&p0), 401, 65).unwrap();
        let lam = |gamma: f64| {
            let d = Discretization::new(&pp(3, 0.0, gamma), g).unwrap();
            let wr = d.radial_solution().unwrap();
            let rl = d.radial_linearization(&wr, 3).unwrap();
            rl.t_ground + rl.angular[1].0
        };
        assert!(lam(-0.05) < 0.0 && lam(0.05) > 0.0);
    }
}
