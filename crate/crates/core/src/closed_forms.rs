//! Closed-form radial objects, the Kelvin transform, the radial <-> one-dimensional
//! correspondence and residual oracles.
//!
//! Everything uses the normalization in which the coefficient of the nonlinearity is
//! `C_gamma`, so that `U_gamma(1) = 2^{-(N-2)/(2-s)}`. Multiply by
//! [`unit_normalization_factor`] to get solutions of the equation with unit coefficient.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::harmonics::SphericalSlice;
use crate::params::ProblemParams;

/// Which closed-form radial function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "arg", rename_all = "snake_case")]
pub enum RadialKind {
    /// The Kelvin-invariant radial solution (`lambda = 1`).
    U,
    /// Dilated radial solution `U_{gamma, lambda}`.
    ULambda(f64),
    /// Radial kernel function `d/dlambda U_{gamma,lambda}` at `lambda = 1` (up to a constant).
    Z,
    /// Radial factor of the degree-`j` kernel functions; independent of `j`.
    Zj(u32),
    /// First radial singular eigenfunction.
    Psi1Rad,
    /// One-dimensional ground state `(1 + r^2)^{-(q-2)/2}`.
    VOneDim,
    /// Singular one-dimensional solution `r^{-(q-2)/2}`.
    WSingular,
}

/// Normalization of the nonlinearity coefficient carried in report metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `-Delta u - gamma u/|x|^2 = C_gamma |u|^{p-2} u / |x|^s`.
    CGamma,
    /// Same equation with coefficient one.
    Unit,
}

/// Factor `C_gamma^{(N-2)/(2(2-s))}` turning a `C_gamma`-normalized solution into a
/// solution of the unit-coefficient equation.
pub fn unit_normalization_factor(p: &ProblemParams) -> f64 {
    let c = p.constants().c_gamma;
    c.powf((p.nf() - 2.0) / (2.0 * (2.0 - p.s)))
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("radius must be positive, got {r}")))
    }
}

/// Exponent `(N-2)(nu-1)/2` of the behaviour at the origin.
fn origin_exponent(p: &ProblemParams) -> f64 {
    (p.nf() - 2.0) * (p.constants().nu - 1.0) / 2.0
}

/// `(2 - s) nu`
fn k_exponent(p: &ProblemParams) -> f64 {
    (2.0 - p.s) * p.constants().nu
}

/// Evaluate a closed-form radial function at radius `r`.
pub fn eval_radial(kind: RadialKind, p: &ProblemParams, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(eval_radial_log(kind, p, r.ln()))
}

/// Same as [`eval_radial`] with the argument given as `t = log r`; never fails.
pub fn eval_radial_log(kind: RadialKind, p: &ProblemParams, t: f64) -> f64 {
    let nf = p.nf();
    let s = p.s;
    let c = p.constants();
    let k = k_exponent(p);
    let e0 = origin_exponent(p);
    // log(1 + e^x) without overflow
    let softplus = |x: f64| if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    match kind {
        RadialKind::U => (e0 * t - (nf - 2.0) / (2.0 - s) * softplus(k * t)).exp(),
        RadialKind::ULambda(lambda) => {
            let ll = lambda.ln();
            ((nf - 2.0) * c.nu / 2.0 * ll + e0 * t - (nf - 2.0) / (2.0 - s) * softplus(k * (t + ll)))
                .exp()
        }
        RadialKind::Z => {
            let mag = (e0 * t - (nf - s) / (2.0 - s) * softplus(k * t)).exp();
            // 1 - r^k = -2 sinh(kt/2) e^{kt/2}
            -2.0 * (k * t / 2.0).sinh() * (k * t / 2.0).exp() * mag
        }
        RadialKind::Zj(_) | RadialKind::Psi1Rad => {
            ((e0 + k / 2.0) * t - (nf - s) / (2.0 - s) * softplus(k * t)).exp()
        }
        RadialKind::VOneDim => (-(c.q_s - 2.0) / 2.0 * softplus(2.0 * t)).exp(),
        RadialKind::WSingular => (-(c.q_s - 2.0) / 2.0 * t).exp(),
    }
}

/// `d/dt log U_{gamma,lambda}(e^t)`, exact.
pub fn log_derivative_u(p: &ProblemParams, lambda: f64, t: f64) -> f64 {
    let k = k_exponent(p);
    let x = k * (t + lambda.ln());
    let logistic = 1.0 / (1.0 + (-x).exp());
    origin_exponent(p) - (p.nf() - 2.0) / (2.0 - p.s) * k * logistic
}

/// Emden-Fowler image of `U_gamma`: `(2 cosh((2-s) nu t / 2))^{-(N-2)/(2-s)}`.
pub fn w_rad(p: &ProblemParams, t: f64) -> f64 {
    let x = k_exponent(p) * t.abs() / 2.0;
    // 2 cosh x = e^x (1 + e^{-2x})
    (-(p.nf() - 2.0) / (2.0 - p.s) * (x + (-2.0 * x).exp().ln_1p())).exp()
}

/// Emden-Fowler image of the radial kernel factor, `e^{(N-2)t/2} Zj(e^t)`, which is
/// `(2 cosh((2-s) nu t/2))^{-(N-s)/(2-s)}` and even in `t`.
pub fn w_kernel_radial(p: &ProblemParams, t: f64) -> f64 {
    let x = k_exponent(p) * t.abs() / 2.0;
    (-(p.nf() - p.s) / (2.0 - p.s) * (x + (-2.0 * x).exp().ln_1p())).exp()
}

/// Degree-`j` kernel function of the linearization at `U_{gamma_j}`, restricted to the
/// `O(N-1)`-invariant harmonic.
pub fn eval_kernel_zji(p: &ProblemParams, j: u32, r: f64, theta: f64) -> Result<f64> {
    check_radius(r)?;
    let gj = p.gamma_j(j);
    if (p.gamma - gj).abs() > 1e-8 * gj.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma = {} is not the degeneracy point gamma_{j} = {gj}",
            p.gamma
        )));
    }
    Ok(eval_radial(RadialKind::Zj(j), p, r)? * SphericalSlice::new(p.n, j).eval(theta))
}

/// Samples of a radial function on a uniform grid in `t = log r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSamples {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
}

impl RadialSamples {
    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn radii(&self) -> Vec<f64> {
        self.grid.nodes().into_iter().map(f64::exp).collect()
    }

    pub fn max_abs_diff(&self, other: &RadialSamples) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `r,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,value\n");
        for (r, v) in self.radii().iter().zip(&self.values) {
            out.push_str(&format!("{r:.17e},{v:.17e}\n"));
        }
        out
    }
}

/// Sample a closed form on a log grid.
pub fn sample_radial(kind: RadialKind, p: &ProblemParams, grid: UniformGrid) -> RadialSamples {
    RadialSamples::from_fn(grid, |t| eval_radial_log(kind, p, t))
}

/// Kelvin transform `|x|^{2-N} f(x/|x|^2)` of radial samples: on a log grid this is
/// `t -> -t` followed by multiplication by `e^{-(N-2)t}`.
pub fn kelvin_radial(f: &RadialSamples, n: u32) -> Result<RadialSamples> {
    if !f.grid.is_symmetric() {
        return Err(Error::InvalidArgument(
            "Kelvin transform needs a grid symmetric under r -> 1/r".into(),
        ));
    }
    let m = f.grid.m;
    let nm2 = f64::from(n) - 2.0;
    let values = (0..m)
        .map(|i| (-nm2 * f.grid.node(i)).exp() * f.values[m - 1 - i])
        .collect();
    Ok(RadialSamples {
        grid: f.grid.clone(),
        values,
    })
}

/// `v(r) = r^{a b} u(r^b)`. The output grid is the input grid scaled by `1/b`.
pub fn radial_to_onedim(u: &RadialSamples, p: &ProblemParams) -> RadialSamples {
    let c = p.constants();
    let b = c.b_gamma_s;
    let grid = UniformGrid {
        lo: u.grid.lo / b,
        hi: u.grid.hi / b,
        m: u.grid.m,
    };
    let values = u
        .grid
        .nodes()
        .iter()
        .zip(&u.values)
        .map(|(t, v)| (c.a_gamma * t).exp() * v)
        .collect();
    RadialSamples { grid, values }
}

/// Inverse of [`radial_to_onedim`].
pub fn onedim_to_radial(v: &RadialSamples, p: &ProblemParams) -> RadialSamples {
    let c = p.constants();
    let b = c.b_gamma_s;
    let grid = UniformGrid {
        lo: v.grid.lo * b,
        hi: v.grid.hi * b,
        m: v.grid.m,
    };
    let values = grid
        .nodes()
        .iter()
        .zip(&v.values)
        .map(|(t, x)| (-c.a_gamma * t).exp() * x)
        .collect();
    RadialSamples { grid, values }
}

/// Composite Gauss-Legendre quadrature in `t` on `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    /// Truncation half-width in `t`; `None` picks one from the decay rate.
    pub half_width: Option<f64>,
    /// Gauss-Legendre points per panel.
    pub order: usize,
    /// Starting number of panels; doubled until the estimate settles.
    pub panels: usize,
    pub max_panels: usize,
    pub rel_tol: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            half_width: None,
            order: 20,
            panels: 16,
            max_panels: 4096,
            rel_tol: 1e-12,
        }
    }
}

/// Result of a composite quadrature with its refinement error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Integrate `f` over `[a, b]` by panel doubling.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadEstimate> {
    let order = NonZeroUsize::new(spec.order.max(1)).expect("positive order");
    let rule = GaussLegendre::new(order);
    let composite = |panels: usize| {
        let w = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + w * i as f64;
                rule.integrate(lo, lo + w, f)
            })
            .sum::<f64>()
    };
    let mut panels = spec.panels.max(1);
    let mut prev = composite(panels);
    loop {
        panels *= 2;
        let next = composite(panels);
        let err = (next - prev).abs();
        if err <= spec.rel_tol * next.abs() || err <= 1e-300 {
            return Ok(QuadEstimate {
                value: next,
                error: err,
                panels,
            });
        }
        if panels >= spec.max_panels {
            return Err(Error::Quadrature {
                estimate: next,
                error: err,
            });
        }
        prev = next;
    }
}

/// Both sides of the energy identity between `u` and its one-dimensional image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEquivalence {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_gap: f64,
    /// Largest integrand magnitude at the truncation points.
    pub truncation: f64,
    pub quadrature_error: f64,
}

/// Fourth-order centered derivative.
fn stencil5(f: &dyn Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h)
}

/// Compare `int r^{N-1} (u'^2 - gamma u^2/r^2) dr` with
/// `((2-s) nu / 2) int r^{q-1} v'^2 dr`, `v = radial_to_onedim(u)`.
///
/// `u_of_t` is `t -> u(e^t)`. Derivatives are taken by a five-point stencil.
pub fn norm_equivalence_check(
    u_of_t: &dyn Fn(f64) -> f64,
    p: &ProblemParams,
    spec: &QuadSpec,
) -> Result<NormEquivalence> {
    let c = p.constants();
    let nm2 = p.nf() - 2.0;
    let b = c.b_gamma_s;
    let half = spec.half_width.unwrap_or(40.0 / (nm2 * c.nu));
    let h = 1e-3;

    let lhs_int = |t: f64| {
        let du = stencil5(u_of_t, t, h);
        let u = u_of_t(t);
        (nm2 * t).exp() * (du * du - p.gamma * u * u)
    };
    // v(e^tau) = e^{a b tau} u(e^{b tau})
    let v_of_tau = |tau: f64| (c.a_gamma * b * tau).exp() * u_of_t(b * tau);
    let rhs_int = |tau: f64| {
        let dv = stencil5(&v_of_tau, tau, h);
        ((c.q_s - 2.0) * tau).exp() * dv * dv
    };

    let lhs = integrate(&lhs_int, -half, half, spec)?;
    let rhs = integrate(&rhs_int, -half / b, half / b, spec)?;
    let rhs_value = (2.0 - p.s) * c.nu / 2.0 * rhs.value;
    let truncation = [lhs_int(-half), lhs_int(half)]
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max);
    let gap = if lhs.value == 0.0 && rhs_value == 0.0 {
        0.0
    } else {
        (lhs.value - rhs_value).abs() / lhs.value.abs()
    };
    Ok(NormEquivalence {
        lhs: lhs.value,
        rhs: rhs_value,
        relative_gap: gap,
        truncation,
        quadrature_error: lhs.error.max(rhs.error),
    })
}

/// Max-norm finite-difference residual of `U_{gamma,lambda}` on the interior nodes of a
/// log grid, measured in Emden-Fowler form: with `w = e^{(N-2)t/2} u(e^t)`,
/// `-w_tt + ((N-2)^2/4 - gamma) w - C_gamma |w|^{p-2} w`, which is
/// `r^{(N+2)/2}` times the residual of the equation itself.
pub fn residual_radial(p: &ProblemParams, lambda: f64, grid: &UniformGrid) -> f64 {
    let nm2 = p.nf() - 2.0;
    let w = |t: f64| ((nm2 / 2.0) * t).exp() * eval_radial_log(RadialKind::ULambda(lambda), p, t);
    residual_radial_of(p, grid, &w)
}

/// Same residual as [`residual_radial`] for an arbitrary `w(t)`.
pub fn residual_radial_of(p: &ProblemParams, grid: &UniformGrid, w: &dyn Fn(f64) -> f64) -> f64 {
    let c = p.constants();
    let kappa = (p.nf() - 2.0).powi(2) / 4.0 - p.gamma;
    let h = grid.h();
    let vals: Vec<f64> = grid.nodes().into_iter().map(w).collect();
    (1..grid.m - 1)
        .map(|i| {
            let wi = vals[i];
            let d2 = (vals[i + 1] - 2.0 * wi + vals[i - 1]) / (h * h);
            (-d2 + kappa * wi - c.c_gamma * wi.abs().powf(c.p_s - 2.0) * wi).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pp(n: u32, s: f64, g: f64) -> ProblemParams {
        ProblemParams::new(n, s, g).unwrap()
    }

    #[test]
    fn spec_point_values() {
        assert!((eval_radial(RadialKind::U, &pp(4, 0.0, 0.0), 1.0).unwrap() - 0.5).abs() < 1e-15);
        for p in [pp(3, 0.0, 0.0), pp(5, 1.2, -3.0), pp(4, 0.5, 0.7)] {
            assert_eq!(eval_radial(RadialKind::Z, &p, 1.0).unwrap(), 0.0);
        }
        // U ~ r^{1/2} at the origin for N=3, s=0, gamma=-0.75
        let p = pp(3, 0.0, -0.75);
        for &r in &[1e-4, 1e-6, 1e-8] {
            let u = eval_radial(RadialKind::U, &p, r).unwrap();
            assert!((u / r.sqrt() - 1.0).abs() < 1e-6);
        }
        assert!(eval_radial(RadialKind::U, &p, 0.0).is_err());
        assert!(eval_radial(RadialKind::U, &p, -1.0).is_err());
    }

    #[test]
    fn direct_formula_agrees_with_log_form() {
        let p = pp(5, 0.7, -1.3);
        let c = p.constants();
        let k = (2.0 - p.s) * c.nu;
        for &r in &[0.01f64, 0.3, 1.0, 4.0, 90.0] {
            for &lam in &[0.5f64, 1.0, 3.0] {
                let direct = lam.powf(3.0 * c.nu / 2.0) * r.powf(3.0 * (c.nu - 1.0) / 2.0)
                    / (1.0 + lam.powf(k) * r.powf(k)).powf(3.0 / (2.0 - p.s));
                let got = eval_radial(RadialKind::ULambda(lam), &p, r).unwrap();
                assert!((got / direct - 1.0).abs() < 1e-13);
            }
            let z = r.powf(3.0 * (c.nu - 1.0) / 2.0) * (1.0 - r.powf(k))
                / (1.0 + r.powf(k)).powf((5.0 - p.s) / (2.0 - p.s));
            let got = eval_radial(RadialKind::Z, &p, r).unwrap();
            assert!((got - z).abs() < 1e-13 * z.abs().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn z_is_lambda_derivative() {
        let p = pp(4, 0.4, -0.8);
        let c = p.constants();
        let h = 1e-5;
        for &r in &[0.2, 0.9, 1.7, 6.0] {
            let d = (eval_radial(RadialKind::ULambda(1.0 + h), &p, r).unwrap()
                - eval_radial(RadialKind::ULambda(1.0 - h), &p, r).unwrap())
                / (2.0 * h);
            let z = eval_radial(RadialKind::Z, &p, r).unwrap();
            assert!((d - (p.nf() - 2.0) * c.nu / 2.0 * z).abs() < 1e-8);
        }
    }

    #[test]
    fn z_changes_sign_once_at_one() {
        let p = pp(3, 0.5, -0.4);
        let g = UniformGrid::symmetric(10.0, 401).unwrap();
        let z = sample_radial(RadialKind::Z, &p, g.clone());
        for (t, v) in g.nodes().iter().zip(&z.values) {
            if *t < 0.0 {
                assert!(*v > 0.0);
            } else if *t > 0.0 {
                assert!(*v < 0.0);
            }
        }
    }

    #[test]
    fn kelvin_identities() {
        for p in [pp(3, 0.0, 0.0), pp(3, 0.0, -0.75), pp(4, 1.0, -2.0), pp(6, 1.5, 1.9)] {
            let g = UniformGrid::symmetric(12.0, 601).unwrap();
            let u = sample_radial(RadialKind::U, &p, g.clone());
            let ku = kelvin_radial(&u, p.n).unwrap();
            for (a, b) in ku.values.iter().zip(&u.values) {
                assert!((a - b).abs() <= 1e-13 * b.abs());
            }
            let z = sample_radial(RadialKind::Z, &p, g.clone());
            let kz = kelvin_radial(&z, p.n).unwrap();
            for (a, b) in kz.values.iter().zip(&z.values) {
                assert!((a + b).abs() <= 1e-13 * b.abs());
            }
            for lam in [0.5, 2.0] {
                let ul = sample_radial(RadialKind::ULambda(lam), &p, g.clone());
                assert!(kelvin_radial(&ul, p.n).unwrap().max_abs_diff(&ul) > 1e-3);
            }
        }
        let g = UniformGrid::new(-1.0, 2.0, 11).unwrap();
        assert!(kelvin_radial(&RadialSamples::from_fn(g, |t| t), 3).is_err());
    }

    #[test]
    fn onedim_image_of_u_is_v() {
        for p in [pp(3, 0.0, -0.75), pp(4, 1.0, -2.0), pp(5, 0.3, 1.2)] {
            let g = UniformGrid::symmetric(8.0, 301).unwrap();
            let u = sample_radial(RadialKind::U, &p, g);
            let v = radial_to_onedim(&u, &p);
            for (tau, val) in v.grid.nodes().iter().zip(&v.values) {
                let exact = eval_radial_log(RadialKind::VOneDim, &p, *tau);
                assert!((val - exact).abs() < 1e-13 * exact.max(1e-300) + 1e-300);
            }
            let back = onedim_to_radial(&v, &p);
            for (x, y) in back.values.iter().zip(&u.values) {
                assert!((x - y).abs() <= 1e-14 * y.abs());
            }
        }
        // identity when gamma = s = 0
        let p = pp(4, 0.0, 0.0);
        let g = UniformGrid::symmetric(3.0, 31).unwrap();
        let u = RadialSamples::from_fn(g, |t| (t * 1.3).sin());
        assert_eq!(radial_to_onedim(&u, &p), u);
    }

    #[test]
    fn norm_equivalence_examples() {
        let spec = QuadSpec::default();
        for p in [pp(3, 0.0, 0.0), pp(4, 0.5, -1.0)] {
            let f = |t: f64| eval_radial_log(RadialKind::U, &p, t);
            let ne = norm_equivalence_check(&f, &p, &spec).unwrap();
            assert!(ne.relative_gap <= 1e-8, "{ne:?}");
            assert!(ne.lhs > 0.0);
        }
        let zero = |_t: f64| 0.0;
        let ne = norm_equivalence_check(&zero, &pp(3, 0.0, 0.0), &spec).unwrap();
        assert_eq!((ne.lhs, ne.rhs, ne.relative_gap), (0.0, 0.0, 0.0));
    }

    #[test]
    fn radial_residual_second_order() {
        let p = pp(3, 0.0, 0.0);
        let g = UniformGrid::symmetric(10.0, 401).unwrap();
        let r1 = residual_radial(&p, 1.0, &g);
        let r2 = residual_radial(&p, 1.0, &g.refined());
        assert!((r1 / r2 - 4.0).abs() < 0.8, "ratio {}", r1 / r2);

        let p = pp(4, 1.0, -2.0);
        let g = UniformGrid::symmetric(10.0, 20001).unwrap();
        assert!((g.h() - 1e-3).abs() < 1e-12);
        assert!(residual_radial(&p, 1.0, &g) <= 1e-6);

        let g = UniformGrid::symmetric(5.0, 101).unwrap();
        assert_eq!(residual_radial_of(&p, &g, &|_| 0.0), 0.0);
    }

    #[test]
    fn dilations_remain_solutions() {
        let p = pp(5, 0.6, -0.9);
        let g = UniformGrid::symmetric(10.0, 1601).unwrap();
        let base = residual_radial(&p, 1.0, &g);
        for lam in [0.5, 2.0] {
            let r = residual_radial(&p, lam, &g);
            assert!(r < 10.0 * base + 1e-12);
        }
    }

    #[test]
    fn w_rad_matches_mapped_u() {
        for p in [pp(3, 0.0, 0.0), pp(4, 0.0, 0.0), pp(5, 1.5, -6.0)] {
            for &t in &[-7.0, -1.0, 0.0, 0.3, 5.0] {
                let mapped = ((p.nf() - 2.0) / 2.0 * t).exp() * eval_radial_log(RadialKind::U, &p, t);
                assert!((w_rad(&p, t) - mapped).abs() < 1e-14);
                let mk = ((p.nf() - 2.0) / 2.0 * t).exp() * eval_radial_log(RadialKind::Psi1Rad, &p, t);
                assert!((w_kernel_radial(&p, t) - mk).abs() < 1e-14);
            }
            let expect = 2f64.powf(-(p.nf() - 2.0) / (2.0 - p.s));
            assert!((w_rad(&p, 0.0) - expect).abs() < 1e-15);
        }
        let p = pp(4, 0.0, 0.0);
        assert!((w_rad(&p, 1.3) - 1.0 / (2.0 * 1.3f64.cosh())).abs() < 1e-15);
    }

    #[test]
    fn psi1_solves_singular_eigenproblem() {
        // -(psi_tt + (N-2) psi_t) - gamma psi - C (p-1) r^{2-s} U^{p-2} psi = Lambda psi
        for p in [pp(3, 0.0, 0.0), pp(4, 1.0, -2.0), pp(5, 0.5, 1.0)] {
            let c = p.constants();
            let lam = p.lambda1_rad();
            let h = 1e-3;
            let psi = |t: f64| eval_radial_log(RadialKind::Psi1Rad, &p, t);
            for &t in &[-2.0, -0.5, 0.0, 0.7, 2.5] {
                let d1 = (psi(t + h) - psi(t - h)) / (2.0 * h);
                let d2 = (psi(t + h) - 2.0 * psi(t) + psi(t - h)) / (h * h);
                let u = eval_radial_log(RadialKind::U, &p, t);
                let pot = c.c_gamma * (c.p_s - 1.0) * ((2.0 - p.s) * t).exp() * u.powf(c.p_s - 2.0);
                let lhs = -(d2 + (p.nf() - 2.0) * d1) - p.gamma * psi(t) - pot * psi(t);
                assert!((lhs - lam * psi(t)).abs() < 1e-5 * psi(t).abs().max(1e-3), "{p:?} t={t}");
            }
        }
    }

    #[test]
    fn u_solves_unit_equation_after_scaling() {
        let p = pp(4, 0.5, -1.0);
        let c = p.constants();
        let f = unit_normalization_factor(&p);
        // f^{p-2} = C, so f U solves the unit-coefficient equation
        assert!((f.powf(c.p_s - 2.0) - c.c_gamma).abs() < 1e-12);
    }

    #[test]
    fn kernel_zji_examples() {
        let g1 = pp(3, 0.0, 0.0);
        assert!(eval_kernel_zji(&g1, 1, 0.7, PI / 2.0).unwrap().abs() < 1e-16);
        let a = eval_kernel_zji(&g1, 1, 0.7, 0.0).unwrap();
        let b = eval_kernel_zji(&g1, 1, 0.7, PI).unwrap();
        assert!(a > 0.0 && (a + b).abs() < 1e-15);
        let p2 = pp(4, 0.0, crate::params::gamma_j(4, 0.0, 2).unwrap());
        let root = (1.0f64 / 4.0).sqrt().acos();
        assert!(eval_kernel_zji(&p2, 2, 1.3, root).unwrap().abs() < 1e-14);
        assert!(eval_kernel_zji(&pp(3, 0.0, -0.1), 1, 1.0, 0.0).is_err());
    }

    #[test]
    fn csv_export() {
        let g = UniformGrid::symmetric(1.0, 3).unwrap();
        let s = sample_radial(RadialKind::U, &pp(3, 0.0, 0.0), g);
        let csv = s.to_csv();
        assert!(csv.starts_with("r,value\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
