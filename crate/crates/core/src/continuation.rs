//! Energy, Nehari minimization, bifurcation detection and branch following on the strip.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::closed_forms::w_rad;
use crate::error::{Error, Result};
use crate::params::{gamma_j, hardy_threshold, ProblemParams, SymmetryClass};
use crate::pde2d::{
    cone_check, decay_rate, expected_decay_rate, sphere_measure, Cone, ConeDiagnostics,
    Discretization, Field2D, Grid2D, NewtonOptions, NewtonReport, Reduction, ThetaGeometry,
    CONE_TOL,
};
use crate::tridiag::SymTridiag;

// ---------------------------------------------------------------------------------------
// energy

/// Parts of the energy functional for one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `F(u)`.
    pub f_energy: f64,
    /// `int |grad u|^2`.
    pub dirichlet: f64,
    /// `int |grad u|^2 - gamma int u^2/|x|^2`.
    pub quadratic: f64,
    /// `int |u|^{p_s} / |x|^s`.
    pub power: f64,
    /// Formal order of the quadrature (uniform `t` nodes, finite-volume `theta` cells).
    pub quadrature_order: u32,
}

/// `F(u) = Q(u)/2 - (C_gamma/p_s) P(u)` on the discrete strip.
pub fn energy_f(disc: &Discretization, w: &Field2D) -> EnergyReport {
    let quadratic = disc.quadratic_form(w);
    let power = disc.power_integral(w);
    EnergyReport {
        f_energy: 0.5 * quadratic - disc.c_gamma / disc.p_s * power,
        dirichlet: disc.dirichlet_energy(w),
        quadratic,
        power,
        quadrature_order: 2,
    }
}

/// Best constant in `S ||u||_{2^*}^2 <= int |grad u|^2`.
pub fn sobolev_constant(n: u32) -> f64 {
    let nf = f64::from(n);
    nf * (nf - 2.0) / 4.0 * sphere_measure(n).powf(2.0 / nf)
}

/// Lower bound for `int |grad u|^2` over nontrivial solutions.
///
/// From the Nehari identity, Hardy's inequality `int u^2/|x|^2 <= (2/(N-2))^2 int |grad u|^2`,
/// Holder between the Hardy and Sobolev quotients and Sobolev's inequality.
pub fn energy_lower_bound(p: &ProblemParams) -> f64 {
    let nf = p.nf();
    let s = p.s;
    let c = p.constants().c_gamma;
    let hardy = (2.0 / (nf - 2.0)).powi(2);
    let lhs = 1.0 - p.gamma.max(0.0) * hardy;
    let k = c
        * sobolev_constant(p.n).powf(-nf * (2.0 - s) / (2.0 * (nf - 2.0)))
        * hardy.powf(s / 2.0);
    (lhs / k).powf((nf - 2.0) / (2.0 - s))
}

// ---------------------------------------------------------------------------------------
// Nehari

/// Scale `w` onto the discrete Nehari set `Q(cw) = C_gamma P(cw)`.
pub fn nehari_project(disc: &Discretization, w: &Field2D) -> Result<(Field2D, f64)> {
    let q = disc.quadratic_form(w);
    let pw = disc.power_integral(w);
    if !(pw > 0.0) || !(q > 0.0) {
        return Err(Error::InvalidArgument(
            "field has no positive Nehari scaling (zero or degenerate)".into(),
        ));
    }
    let c = (q / (disc.c_gamma * pw)).powf(1.0 / (disc.p_s - 2.0));
    Ok((w.scaled(c), c))
}

/// `|Q - C P| / Q`.
pub fn nehari_residual(disc: &Discretization, w: &Field2D) -> f64 {
    let q = disc.quadratic_form(w);
    (q - disc.c_gamma * disc.power_integral(w)).abs() / q.abs().max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NehariOptions {
    /// Relative preconditioned-gradient tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterations without a new best gradient before giving up.
    pub stall_window: usize,
    /// Finish with a Newton solve from the descent result.
    pub polish: bool,
}

impl Default for NehariOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 20000,
            stall_window: 2000,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NehariResult {
    pub gamma: f64,
    #[serde(skip)]
    pub field: Option<Field2D>,
    /// Discrete energy level of the minimizer.
    pub d_gamma: f64,
    pub symmetry: SymmetryClass,
    /// `sup |w - w_rad|` against the discrete radial solution with the same boundary data.
    pub non_radiality_sup: f64,
    /// Energy-norm distance to the same radial solution.
    pub non_radiality_energy: f64,
    /// Nehari level of the radial solution.
    pub radial_level: f64,
    pub constraint_residual: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub residual: f64,
}

fn reduction_for(grid: Grid2D, class: SymmetryClass) -> Result<Reduction> {
    match class {
        SymmetryClass::Axial => Ok(Reduction::new(grid, false)),
        SymmetryClass::AxialEven => Ok(Reduction::new(grid, true)),
        other => Err(Error::InvalidArgument(format!(
            "Nehari minimization needs an axial class, got {other}"
        ))),
    }
}

/// Minimize `F` on the Nehari set within the Kelvin-even fields of `class`, with zero
/// Dirichlet data at `t = +-T`.
///
/// Descent direction is the gradient preconditioned by the linear operator
/// `-D_tt + A_theta + kappa`, which on the Nehari set equals `A^{-1} R(w)`; steps follow
/// Barzilai-Borwein in the `A` inner product, each followed by the Nehari projection.
pub fn nehari_minimize(
    disc: &Discretization,
    class: SymmetryClass,
    init: &Field2D,
    opts: &NehariOptions,
) -> Result<NehariResult> {
    let red = reduction_for(disc.grid, class)?;
    let zero = vec![0.0; disc.grid.len()];
    let lu = disc.assemble(&zero, &red).lu()?;
    let template = {
        let mut z = Field2D::zeros(&disc.params, disc.grid);
        z.theta_even = red.theta_even;
        z
    };
    let to_field = |x: &[f64]| {
        let mut f = template.clone();
        red.scatter(x, &mut f);
        f
    };
    let a_inner = |a: &Field2D, b: &Field2D| disc.inner(a, &disc.apply_linear(b));

    let mut w = to_field(&red.gather(init));
    w = nehari_project(disc, &w)?.0;
    let direction = |w: &Field2D| -> Result<Field2D> {
        let r = disc.residual(w)?;
        Ok(to_field(&lu.solve(&red.gather(&r))))
    };
    let mut d = direction(&w)?;
    let norm_w = |w: &Field2D| a_inner(w, w).max(f64::MIN_POSITIVE).sqrt();
    let mut grad = a_inner(&d, &d).max(0.0).sqrt() / norm_w(&w);
    let mut alpha = 1.0;
    let mut best = grad;
    let mut since_best = 0;
    let mut it = 0;
    let mut level = energy_f(disc, &w).f_energy;
    while grad > opts.tol {
        if it >= opts.max_iter || since_best > opts.stall_window {
            return Err(Error::Stall {
                iterations: it,
                gradient_norm: grad,
            });
        }
        let mut trial_alpha = alpha;
        let (w_new, level_new) = loop {
            let cand = nehari_project(disc, &w.axpy(-trial_alpha, &d))?.0;
            let e = energy_f(disc, &cand).f_energy;
            // nonmonotone safeguard: allow small increases, refuse blow-ups
            if e <= level + 1e-3 * level.abs() || trial_alpha < 1e-6 {
                break (cand, e);
            }
            trial_alpha *= 0.5;
        };
        let d_new = direction(&w_new)?;
        let s = w_new.axpy(-1.0, &w);
        let y = d_new.axpy(-1.0, &d);
        let sy = a_inner(&s, &y);
        let ss = a_inner(&s, &s);
        alpha = if sy > 0.0 { (ss / sy).clamp(1e-3, 10.0) } else { 1.0 };
        w = w_new;
        d = d_new;
        level = level_new;
        grad = a_inner(&d, &d).max(0.0).sqrt() / norm_w(&w);
        if grad < best {
            best = grad;
            since_best = 0;
        } else {
            since_best += 1;
        }
        it += 1;
    }

    let radial = disc.radial_solution_with(0.0)?;
    if opts.polish {
        let (polished, _) = disc.newton_solve(&w, &NewtonOptions::default(), Some(&radial))?;
        // keep the descent result if Newton wandered off to another critical point
        if polished.sup_distance(&w) <= 1e-4 * w.sup_norm() {
            w = polished;
        }
    }
    let diff = w.axpy(-1.0, &radial);
    Ok(NehariResult {
        gamma: disc.params.gamma,
        d_gamma: energy_f(disc, &w).f_energy,
        symmetry: class,
        non_radiality_sup: diff.sup_norm(),
        non_radiality_energy: disc.energy_norm(&diff),
        radial_level: energy_f(disc, &radial).f_energy,
        constraint_residual: nehari_residual(disc, &w),
        gradient_norm: grad,
        iterations: it,
        residual: disc.residual_norm(&w)?,
        field: Some(w),
    })
}

// ---------------------------------------------------------------------------------------
// bifurcation detection

/// A zero crossing of a Jacobian eigenvalue at the radial solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub j: u32,
    /// Crossing on the requested grid.
    pub gamma_h: f64,
    /// Richardson extrapolation over three `t` and three `theta` refinements.
    pub gamma: f64,
}

/// Lowest Kelvin-even eigenvalue of `-D_tt + kappa - C (p-1) w^{p-2}` at the discrete radial
/// solution on `mt` nodes.
fn t_ground(p: &ProblemParams, half_width: f64, mt: usize) -> Result<f64> {
    let g = Grid2D::new(half_width, mt, 5)?;
    let disc = Discretization::new(p, g)?;
    let wr = disc.radial_solution()?;
    let inv = 1.0 / (g.ht() * g.ht());
    let d: Vec<f64> = (1..g.mt - 1)
        .map(|i| 2.0 * inv + disc.kappa - disc.nonlinearity_deriv(wr.at(i, 0)))
        .collect();
    let e = vec![-inv; d.len() - 1];
    Ok(SymTridiag::new(d, e)?.eigenvalue(0, 1e-14))
}

/// Discrete degree-`j` angular eigenvalue on `mth` nodes.
fn discrete_mu(n: u32, mth: usize, j: u32) -> f64 {
    ThetaGeometry::new(n, mth).spectrum(j as usize + 1)[j as usize].0
}

fn richardson3(a: f64, b: f64, c: f64) -> f64 {
    // values at h, h/2, h/4 with errors c2 h^2 + c4 h^4
    let ab = (4.0 * b - a) / 3.0;
    let bc = (4.0 * c - b) / 3.0;
    (16.0 * bc - ab) / 15.0
}

/// Root in `gamma` of `t_ground(gamma) + mu` on `[lo, hi]`, assuming a sign change.
fn crossing_root(p: &ProblemParams, half_width: f64, mt: usize, mu: f64, lo: f64, hi: f64) -> Result<f64> {
    let f = |g: f64| -> Result<f64> { Ok(t_ground(&p.with_gamma(g)?, half_width, mt)? + mu) };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa * fb > 0.0 {
        return Err(Error::NoRoot);
    }
    // Illinois false position
    let mut side = 0;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c)?;
        if fc == 0.0 || (b - a).abs() < 1e-14 * (1.0 + c.abs()) {
            return Ok(c);
        }
        if fc * fb > 0.0 {
            b = c;
            fb = fc;
            if side == -1 {
                fa /= 2.0;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb /= 2.0;
            }
            side = 1;
        }
        if (b - a).abs() < 1e-13 * (1.0 + a.abs()) || fc.abs() < 1e-14 {
            return Ok(c);
        }
    }
    Ok(0.5 * (a + b))
}

/// Values of `gamma` in `range` where the lowest Jacobian eigenvalue at the radial solution,
/// within the Kelvin-even fields of `class`, crosses zero.
pub fn detect_bifurcation(
    n: u32,
    s: f64,
    range: (f64, f64),
    class: SymmetryClass,
    grid: Grid2D,
) -> Result<Vec<Crossing>> {
    let (lo, hi) = range;
    if !(lo < hi) || hi >= hardy_threshold(n) {
        return Err(Error::Domain(format!(
            "range [{lo}, {hi}] must be increasing and below {}",
            hardy_threshold(n)
        )));
    }
    let step = match class {
        SymmetryClass::Axial => 1,
        SymmetryClass::AxialEven => 2,
        other => {
            return Err(Error::InvalidArgument(format!(
                "bifurcation detection needs an axial class, got {other}"
            )))
        }
    };
    let p_hi = ProblemParams::new(n, s, hi)?;
    let half_width = grid.half_width;
    let mut out = Vec::new();
    let mut j = step;
    // gamma_j decreases in j; stop well past the lower end of the range
    while gamma_j(n, s, j)? >= lo - 1.0 || j <= step {
        let mu_h = discrete_mu(n, grid.mth, j);
        let g_lo = t_ground(&p_hi.with_gamma(lo)?, half_width, grid.mt)? + mu_h;
        let g_hi = t_ground(&p_hi, half_width, grid.mt)? + mu_h;
        if g_lo < 0.0 && g_hi > 0.0 {
            let gamma_h = crossing_root(&p_hi, half_width, grid.mt, mu_h, lo, hi)?;
            let mths = [grid.mth, 2 * grid.mth - 1, 4 * grid.mth - 3];
            let mu_star = richardson3(
                discrete_mu(n, mths[0], j),
                discrete_mu(n, mths[1], j),
                discrete_mu(n, mths[2], j),
            );
            let (a, b) = (lo.max(gamma_h - 0.05), hi.min(gamma_h + 0.05));
            let roots: Vec<f64> = [grid.mt, 2 * grid.mt - 1, 4 * grid.mt - 3]
                .iter()
                .map(|&mt| crossing_root(&p_hi, half_width, mt, mu_star, a, b))
                .collect::<Result<_>>()?;
            out.push(Crossing {
                j,
                gamma_h,
                gamma: richardson3(roots[0], roots[1], roots[2]),
            });
        }
        j += step;
        if j > 200 {
            break;
        }
    }
    out.sort_by(|a, b| b.gamma.total_cmp(&a.gamma));
    Ok(out)
}

// ---------------------------------------------------------------------------------------
// branch switching

/// Degree-`cone.degree()` kernel direction at `gamma_j`, scaled to unit discrete energy norm
/// with the sign that makes it monotone in the cone's direction.
pub fn kernel_direction(disc: &Discretization, cone: Cone) -> Field2D {
    let z = Field2D::kernel(&disc.params, disc.grid, cone.degree());
    let z = z.scaled(1.0 / disc.energy_norm(&z));
    // the symmetric Jacobi slices of degree 1 and 2 decrease from theta = 0
    let g = disc.grid;
    let rising = z.at(g.mid_t(), 1) > z.at(g.mid_t(), 0);
    if rising == (cone.sign() > 0.0) {
        z
    } else {
        z.scaled(-1.0)
    }
}

/// `w_rad + eps * z` at `gamma_j` with `z` the normalized kernel oriented into `cone`.
pub fn branch_switch(p_j: &ProblemParams, grid: Grid2D, j: u32, cone: Cone, eps: f64) -> Result<Field2D> {
    if cone.degree() != j {
        return Err(Error::InvalidArgument(format!(
            "cone {cone} needs degree {}, got j = {j}",
            cone.degree()
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "switch amplitude must be positive (got {eps}); eps = 0 is the radial solution"
        )));
    }
    let disc = Discretization::new(p_j, grid)?;
    let seed = Field2D::radial(p_j, grid).axpy(eps, &kernel_direction(&disc, cone));
    let mut seed = seed;
    seed.kelvin_even = true;
    seed.theta_even = cone.theta_even();
    Ok(seed)
}

/// Offset below the degeneracy point for the first corrected solution.
pub fn switch_offset(gamma_j: f64) -> f64 {
    1e-3 * gamma_j.abs() + 1e-4
}

/// Set the Dirichlet rows to the radial closed form at the field's own `gamma`.
pub fn set_radial_boundary(w: &mut Field2D) {
    let g = w.grid;
    let b = w_rad(&w.params, g.half_width);
    for j in 0..g.mth {
        *w.at_mut(0, j) = b;
        *w.at_mut(g.mt - 1, j) = b;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchOptions {
    /// Initial kernel amplitude (unit energy norm kernel).
    pub eps: f64,
    /// Amplitude doublings tried when Newton falls back onto the radial solution.
    pub max_doublings: u32,
    /// Retry each amplitude with radial deflation.
    pub deflation_fallback: bool,
    pub newton: NewtonOptions,
}

impl Default for SwitchOptions {
    fn default() -> Self {
        Self {
            eps: 0.05,
            max_doublings: 3,
            deflation_fallback: true,
            newton: NewtonOptions::default(),
        }
    }
}

/// Outcome of [`switch_and_correct`].
#[derive(Debug, Clone)]
pub struct SwitchResult {
    pub gamma_j: f64,
    /// Degeneracy point of the discrete problem on this grid.
    pub gamma_h: f64,
    /// Where the seed was corrected: `min(gamma_j, gamma_h) - delta`.
    pub gamma: f64,
    pub amplitude: f64,
    pub deflated: bool,
    pub non_radial: bool,
    pub field: Field2D,
    pub report: NewtonReport,
    pub cone: ConeDiagnostics,
}

/// Seed from the radial solution at `gamma_j` along the kernel oriented into `cone` and
/// correct it below the degeneracy point.
///
/// The discrete degeneracy point differs from `gamma_j` by `O(h^2)`, so the correction is made
/// below both. If Newton falls back onto the radial solution the amplitude is doubled, and
/// each amplitude may be retried with radial deflation.
pub fn switch_and_correct(
    n: u32,
    s: f64,
    grid: Grid2D,
    cone: Cone,
    opts: &SwitchOptions,
) -> Result<SwitchResult> {
    let j = cone.degree();
    let gj = gamma_j(n, s, j)?;
    let p_j = ProblemParams::new(n, s, gj)?;
    let class = if cone.theta_even() {
        SymmetryClass::AxialEven
    } else {
        SymmetryClass::Axial
    };
    let width = 0.1 * (1.0 + gj.abs());
    let hi = (gj + width).min(0.5 * (gj + hardy_threshold(n)));
    let gamma_h = detect_bifurcation(n, s, (gj - width, hi), class, grid)?
        .into_iter()
        .find(|c| c.j == j)
        .map_or(gj, |c| c.gamma_h);
    let gamma = gj.min(gamma_h) - switch_offset(gj);
    let disc = Discretization::new(&p_j, grid)?.with_gamma(gamma)?;
    let radial = disc.radial_solution()?;
    let z = kernel_direction(&Discretization::new(&p_j, grid)?, cone);
    let base = Field2D::radial(&p_j, grid);
    branch_switch(&p_j, grid, j, cone, opts.eps)?;

    let mut first = None;
    let mut amplitude = opts.eps;
    for _ in 0..=opts.max_doublings {
        for deflate in [false, true] {
            if deflate && !opts.deflation_fallback {
                continue;
            }
            let mut w0 = base.axpy(amplitude, &z);
            w0.params = disc.params;
            w0.kelvin_even = true;
            w0.theta_even = cone.theta_even();
            set_radial_boundary(&mut w0);
            // deflated runs that have not settled by then rarely do
            let newton = NewtonOptions {
                deflate_radial: deflate,
                max_iter: if deflate { opts.newton.max_iter.min(25) } else { opts.newton.max_iter },
                ..opts.newton
            };
            let Ok((field, report)) = disc.newton_solve(&w0, &newton, Some(&radial)) else {
                continue;
            };
            let cd = cone_check(&field, cone, CONE_TOL);
            let result = SwitchResult {
                gamma_j: gj,
                gamma_h,
                gamma,
                amplitude,
                deflated: deflate,
                non_radial: !report.converged_to_radial,
                cone: cd,
                field,
                report,
            };
            if result.non_radial && cd.member {
                return Ok(result);
            }
            first.get_or_insert(result);
        }
        amplitude *= 2.0;
    }
    first.ok_or(Error::MaxIterations {
        iterations: opts.newton.max_iter,
        residual: f64::NAN,
    })
}

// ---------------------------------------------------------------------------------------
// branch tracing

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub gamma_min: f64,
    pub max_points: usize,
    pub ds_init: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    /// Residual required of stored points.
    pub tol: f64,
    pub max_corrector: usize,
    /// Count negative Jacobian eigenvalues at stored points.
    pub eigen_counts: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            gamma_min: -0.5,
            max_points: 400,
            ds_init: 1e-2,
            ds_min: 1e-5,
            ds_max: 5e-2,
            tol: 1e-9,
            max_corrector: 12,
            eigen_counts: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub gamma: f64,
    pub sup_norm: f64,
    pub dirichlet_energy: f64,
    pub f_energy: f64,
    pub cone: ConeDiagnostics,
    pub negative_eigen_count: Option<usize>,
    pub residual: f64,
    pub decay_rate: f64,
    pub decay_expected: f64,
    pub energy_bound: f64,
    pub distance_to_radial: f64,
    pub kelvin_defect: f64,
    #[serde(skip)]
    pub field: Option<Field2D>,
}

impl BranchPoint {
    pub fn decay_ok(&self) -> bool {
        (self.decay_rate / self.decay_expected - 1.0).abs() <= 0.05
    }

    pub fn energy_ok(&self) -> bool {
        self.dirichlet_energy > self.energy_bound
    }
}

/// Why a trace stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    ReachedGammaMin,
    MaxPoints,
    StepCollapse { gamma: f64 },
    ConeExit { gamma: f64, min_derivative: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub n: u32,
    pub s: f64,
    pub cone: Cone,
    pub grid: Grid2D,
    pub seed_gamma: f64,
    pub options: TraceOptions,
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
    pub version: String,
}

impl BranchRecord {
    /// Turn an abnormal termination into the matching error.
    pub fn check(&self) -> Result<()> {
        match self.termination {
            Termination::ReachedGammaMin | Termination::MaxPoints => Ok(()),
            Termination::StepCollapse { gamma } => Err(Error::StepCollapse { gamma }),
            Termination::ConeExit {
                gamma,
                min_derivative,
            } => Err(Error::ConeExit {
                cone: self.cone.to_string(),
                gamma,
                min_derivative,
            }),
        }
    }

    pub fn gamma_extent(&self) -> Option<(f64, f64)> {
        let first = self.points.first()?.gamma;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (lo.min(p.gamma), hi.max(p.gamma))
        }))
    }

    /// Field stored at the point closest to `gamma`.
    pub fn field_near(&self, gamma: f64) -> Option<&Field2D> {
        self.points
            .iter()
            .filter(|p| p.field.is_some())
            .min_by(|a, b| (a.gamma - gamma).abs().total_cmp(&(b.gamma - gamma).abs()))
            .and_then(|p| p.field.as_ref())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "gamma,sup_norm,dirichlet_energy,f_energy,cone_member,min_signed_derivative,negative_eigen_count,residual,decay_rate,distance_to_radial\n",
        );
        for p in &self.points {
            let _ = writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.12e},{},{:.6e},{},{:.3e},{:.8},{:.6e}",
                p.gamma,
                p.sup_norm,
                p.dirichlet_energy,
                p.f_energy,
                u8::from(p.cone.member),
                p.cone.min_signed_derivative,
                p.negative_eigen_count.map_or(String::from(""), |c| c.to_string()),
                p.residual,
                p.decay_rate,
                p.distance_to_radial
            );
        }
        out
    }

    /// `branch.json`, `branch.csv` and one `point_XXXX.csv` field file per stored field.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("branch.json"), serde_json::to_string_pretty(self)?)?;
        std::fs::write(dir.join("branch.csv"), self.to_csv())?;
        for (k, p) in self.points.iter().enumerate() {
            if let Some(f) = &p.field {
                std::fs::write(dir.join(format!("point_{k:04}.csv")), field_csv(f))?;
            }
        }
        Ok(())
    }
}

/// `t,theta,w` rows.
pub fn field_csv(f: &Field2D) -> String {
    let g = f.grid;
    let mut out = String::with_capacity(g.len() * 40);
    out.push_str("t,theta,w\n");
    for i in 0..g.mt {
        for j in 0..g.mth {
            let _ = writeln!(out, "{:.12e},{:.12e},{:.15e}", g.t(i), g.theta(j), f.at(i, j));
        }
    }
    out
}

fn point_at(disc: &Discretization, w: &Field2D, cone: Cone, radial: &Field2D, counts: bool) -> Result<BranchPoint> {
    let e = energy_f(disc, w);
    Ok(BranchPoint {
        gamma: disc.params.gamma,
        sup_norm: w.sup_norm(),
        dirichlet_energy: e.dirichlet,
        f_energy: e.f_energy,
        cone: cone_check(w, cone, CONE_TOL),
        negative_eigen_count: if counts {
            Some(disc.negative_eigen_count(w, false)?)
        } else {
            None
        },
        residual: disc.residual_norm(w)?,
        decay_rate: decay_rate(w),
        decay_expected: expected_decay_rate(&disc.params),
        energy_bound: energy_lower_bound(&disc.params),
        distance_to_radial: w.sup_distance(radial),
        kelvin_defect: w.kelvin_defect(),
        field: Some(w.clone()),
    })
}

/// State of the arclength corrector in reduced coordinates.
struct ArcState<'a> {
    base: &'a Discretization,
    red: Reduction,
    wts: Vec<f64>,
    scale: f64,
    template: Field2D,
}

impl ArcState<'_> {
    fn field(&self, x: &[f64], gamma: f64) -> Result<(Discretization, Field2D)> {
        let disc = self.base.with_gamma(gamma)?;
        let mut f = self.template.clone();
        f.params = disc.params;
        set_radial_boundary(&mut f);
        self.red.scatter(x, &mut f);
        Ok((disc, f))
    }

    fn residual(&self, x: &[f64], gamma: f64) -> Result<Vec<f64>> {
        let (disc, f) = self.field(x, gamma)?;
        Ok(self.red.gather(&disc.residual(&f)?))
    }

    /// Weighted inner product on `(x, gamma)` with `x` scaled by the seed norm.
    fn dot(&self, a: (&[f64], f64), b: (&[f64], f64)) -> f64 {
        let xs: f64 = a.0.iter().zip(b.0).zip(&self.wts).map(|((u, v), w)| u * v * w).sum();
        xs / self.scale + a.1 * b.1
    }

    /// Newton on `R(x, gamma) = 0`, `<tau, (x, gamma) - pred> = 0`.
    fn correct(
        &self,
        pred: (&[f64], f64),
        tau: (&[f64], f64),
        tol: f64,
        max_iter: usize,
    ) -> Result<(Vec<f64>, f64)> {
        let mut x = pred.0.to_vec();
        let mut gamma = pred.1;
        for _ in 0..max_iter {
            let r = self.residual(&x, gamma)?;
            let rn = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !rn.is_finite() {
                return Err(Error::LinearSolve("non-finite residual in corrector".into()));
            }
            let dx: Vec<f64> = x.iter().zip(pred.0).map(|(a, b)| a - b).collect();
            let g = self.dot((&dx, gamma - pred.1), tau);
            if rn <= tol && g.abs() <= 1e-12 {
                return Ok((x, gamma));
            }
            let (disc, f) = self.field(&x, gamma)?;
            let pot: Vec<f64> = f.values.iter().map(|&v| -disc.nonlinearity_deriv(v)).collect();
            let lu = disc.assemble(&pot, &self.red).lu()?;
            let h = 1e-6 * (1.0 + gamma.abs());
            let rp = self.residual(&x, gamma + h)?;
            let rm = self.residual(&x, gamma - h)?;
            let rg: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
            let a = lu.solve(&neg_r);
            let b = lu.solve(&rg);
            let ta = self.dot((&a, 0.0), tau);
            let tb = self.dot((&b, 0.0), tau);
            let denom = tau.1 - tb;
            if denom.abs() < 1e-14 {
                return Err(Error::LinearSolve("singular bordered system".into()));
            }
            let dg = (-g - ta) / denom;
            for ((xi, ai), bi) in x.iter_mut().zip(&a).zip(&b) {
                *xi += ai - bi * dg;
            }
            gamma += dg;
        }
        let r = self.residual(&x, gamma)?;
        Err(Error::MaxIterations {
            iterations: max_iter,
            residual: r.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        })
    }
}

/// Pseudo-arclength continuation from a solution `start` (at `start.params.gamma`) towards
/// decreasing `gamma`. Every stored point satisfies the residual tolerance and lies in `cone`.
pub fn trace_branch(base: &Discretization, start: &Field2D, cone: Cone, opts: &TraceOptions) -> Result<BranchRecord> {
    let grid = base.grid;
    let red = Reduction::new(grid, cone.theta_even());
    let mut template = Field2D::zeros(&base.params, grid);
    template.theta_even = cone.theta_even();
    let wts = red.weights(&base.geo);
    let x0 = red.gather(start);
    let scale: f64 = x0.iter().zip(&wts).map(|(a, w)| a * a * w).sum::<f64>().max(f64::MIN_POSITIVE);
    let arc = ArcState {
        base,
        red,
        wts,
        scale,
        template,
    };
    let newton = NewtonOptions {
        tol: opts.tol * 0.1,
        ..NewtonOptions::default()
    };
    let gamma0 = start.params.gamma;
    let mut record = BranchRecord {
        n: base.params.n,
        s: base.params.s,
        cone,
        grid,
        seed_gamma: gamma0,
        options: *opts,
        points: Vec::new(),
        termination: Termination::MaxPoints,
        version: crate::VERSION.to_string(),
    };

    let store = |record: &mut BranchRecord, x: &[f64], gamma: f64| -> Result<bool> {
        let (disc, f) = arc.field(x, gamma)?;
        let radial = disc.radial_solution()?;
        let pt = point_at(&disc, &f, cone, &radial, opts.eigen_counts)?;
        if !pt.cone.member {
            record.termination = Termination::ConeExit {
                gamma,
                min_derivative: pt.cone.min_signed_derivative,
            };
            return Ok(false);
        }
        record.points.push(pt);
        Ok(true)
    };

    // first point: the start itself, re-solved to the trace tolerance
    let (disc0, mut w0) = arc.field(&x0, gamma0)?;
    w0.theta_even = cone.theta_even();
    let (w0, _) = disc0.newton_solve(&w0, &newton, None)?;
    let mut x_prev = arc.red.gather(&w0);
    let mut g_prev = gamma0;
    if !store(&mut record, &x_prev, g_prev)? {
        return Ok(record);
    }

    // second point by a natural-parameter step
    let mut ds = opts.ds_init;
    let (mut x_cur, mut g_cur) = loop {
        let g1 = (g_prev - ds).max(opts.gamma_min);
        let (d1, mut w1) = arc.field(&x_prev, g1)?;
        w1.theta_even = cone.theta_even();
        match d1.newton_solve(&w1, &newton, None) {
            Ok((w, rep)) if !rep.converged_to_radial => break (arc.red.gather(&w), g1),
            _ => {
                ds *= 0.5;
                if ds < opts.ds_min {
                    record.termination = Termination::StepCollapse { gamma: g_prev };
                    return Ok(record);
                }
            }
        }
    };
    if !store(&mut record, &x_cur, g_cur)? {
        return Ok(record);
    }

    while record.points.len() < opts.max_points {
        if g_cur <= opts.gamma_min + 1e-14 {
            record.termination = Termination::ReachedGammaMin;
            return Ok(record);
        }
        // secant tangent
        let dx: Vec<f64> = x_cur.iter().zip(&x_prev).map(|(a, b)| a - b).collect();
        let dg = g_cur - g_prev;
        let norm = arc.dot((&dx, dg), (&dx, dg)).sqrt();
        let tx: Vec<f64> = dx.iter().map(|v| v / norm).collect();
        let tg = dg / norm;

        let mut accepted = None;
        while accepted.is_none() {
            if ds < opts.ds_min {
                record.termination = Termination::StepCollapse { gamma: g_cur };
                return Ok(record);
            }
            let px: Vec<f64> = x_cur.iter().zip(&tx).map(|(a, t)| a + ds * t).collect();
            let pg = g_cur + ds * tg;
            if pg < opts.gamma_min {
                // land exactly on gamma_min with a natural-parameter solve
                let frac = (g_cur - opts.gamma_min) / (g_cur - pg);
                let gx: Vec<f64> = x_cur.iter().zip(&px).map(|(a, b)| a + frac * (b - a)).collect();
                let (d, mut f) = arc.field(&gx, opts.gamma_min)?;
                f.theta_even = cone.theta_even();
                match d.newton_solve(&f, &newton, None) {
                    Ok((w, _)) => accepted = Some((arc.red.gather(&w), opts.gamma_min)),
                    Err(_) => ds *= 0.5,
                }
                continue;
            }
            match arc.correct((&px, pg), (&tx, tg), opts.tol * 0.1, opts.max_corrector) {
                Ok(sol) => accepted = Some(sol),
                Err(_) => ds *= 0.5,
            }
        }
        let (x_new, g_new) = accepted.expect("set above");
        x_prev = std::mem::replace(&mut x_cur, x_new);
        g_prev = std::mem::replace(&mut g_cur, g_new);
        if !store(&mut record, &x_cur, g_cur)? {
            return Ok(record);
        }
        ds = (ds * 1.5).min(opts.ds_max);
    }
    record.termination = Termination::MaxPoints;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde2d::default_half_width;

    fn pp(n: u32, s: f64, g: f64) -> ProblemParams {
        ProblemParams::new(n, s, g).unwrap()
    }

    fn grid(p: &ProblemParams, mt: usize, mth: usize) -> Grid2D {
        Grid2D::new(default_half_width(p), mt, mth).unwrap()
    }

    #[test]
    fn energy_of_zero_is_zero() {
        let p = pp(3, 0.0, -0.3);
        let g = grid(&p, 101, 17);
        let d = Discretization::new(&p, g).unwrap();
        let e = energy_f(&d, &Field2D::zeros(&p, g));
        assert_eq!(e.f_energy, 0.0);
        assert_eq!(e.dirichlet, 0.0);
    }

    #[test]
    fn radial_lies_on_nehari_set() {
        for p in [pp(3, 0.0, 0.0), pp(4, 1.0, -1.0), pp(5, 0.5, 0.5)] {
            let g = grid(&p, 401, 17);
            let d = Discretization::new(&p, g).unwrap();
            let w = d.radial_solution().unwrap();
            let (_, c) = nehari_project(&d, &w).unwrap();
            assert!((c - 1.0).abs() < 1e-6, "{c}");
            let (_, c2) = nehari_project(&d, &w.scaled(2.0)).unwrap();
            assert!((c2 - 0.5).abs() < 1e-6);
            let e = energy_f(&d, &w);
            let nehari_level = (0.5 - 1.0 / d.p_s) * e.quadratic;
            assert!(e.f_energy > 0.0);
            assert!((e.f_energy - nehari_level).abs() < 1e-5 * e.f_energy);
        }
    }

    #[test]
    fn projection_hits_constraint() {
        let p = pp(3, 0.0, -0.2);
        let g = grid(&p, 201, 17);
        let d = Discretization::new(&p, g).unwrap();
        let mut f = Field2D::from_fn(&p, g, |t, th| (1.0 + 0.3 * th.cos()) / (1.0 + t * t));
        for j in 0..g.mth {
            *f.at_mut(0, j) = 0.0;
            *f.at_mut(g.mt - 1, j) = 0.0;
        }
        let (w, _) = nehari_project(&d, &f).unwrap();
        assert!(nehari_residual(&d, &w) <= 1e-10);
        assert!(nehari_project(&d, &Field2D::zeros(&p, g)).is_err());
    }

    #[test]
    fn energy_peaks_at_nehari_scaling() {
        let p = pp(3, 0.0, -0.2);
        let g = grid(&p, 201, 17);
        let d = Discretization::new(&p, g).unwrap();
        let f = Field2D::from_fn(&p, g, |t, th| (1.5 + th.cos()) / (1.0 + t * t));
        let (_, cstar) = nehari_project(&d, &f).unwrap();
        let e = |c: f64| energy_f(&d, &f.scaled(c)).f_energy;
        let top = e(cstar);
        for k in [0.5, 0.9, 0.99, 1.01, 1.1, 2.0] {
            assert!(e(cstar * k) < top);
        }
    }

    #[test]
    fn sobolev_constant_three_dims() {
        let s = sobolev_constant(3);
        assert!((s - 3.0 * (std::f64::consts::PI / 2.0).powf(4.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_is_sharp_for_sobolev_bubble() {
        // at s = 0, gamma = 0 the radial solution is the Sobolev extremal
        let p = pp(3, 0.0, 0.0);
        let g = grid(&p, 801, 17);
        let d = Discretization::new(&p, g).unwrap();
        let e = energy_f(&d, &d.radial_solution().unwrap());
        let b = energy_lower_bound(&p);
        assert!((e.dirichlet / b - 1.0).abs() < 1e-3, "{} {b}", e.dirichlet);
        // strictly below elsewhere
        for p in [pp(3, 0.0, -0.5), pp(4, 1.0, -1.0), pp(3, 0.5, 0.1)] {
            let g = grid(&p, 801, 17);
            let d = Discretization::new(&p, g).unwrap();
            let e = energy_f(&d, &d.radial_solution().unwrap());
            assert!(e.dirichlet > energy_lower_bound(&p));
        }
    }

    #[test]
    fn detection_examples() {
        let p = pp(3, 0.0, 0.0);
        let g = grid(&p, 401, 65);
        let c = detect_bifurcation(3, 0.0, (-0.1, 0.1), SymmetryClass::Axial, g).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].j, 1);
        assert!(c[0].gamma.abs() < 1e-6, "{c:?}");
        let c = detect_bifurcation(3, 0.0, (-0.6, -0.4), SymmetryClass::AxialEven, g).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].gamma + 0.5).abs() < 1e-6, "{c:?}");
        let c = detect_bifurcation(3, 0.0, (-0.45, -0.05), SymmetryClass::Axial, g).unwrap();
        assert!(c.is_empty());
        assert!(detect_bifurcation(3, 0.0, (0.0, 0.3), SymmetryClass::Axial, g).is_err());
    }

    #[test]
    fn index_increases_by_one_across_gamma_1() {
        let p = pp(3, 0.5, gamma_j(3, 0.5, 1).unwrap());
        let g = grid(&p, 201, 33);
        let d = Discretization::new(&p, g).unwrap();
        let crossing = detect_bifurcation(3, 0.5, (p.gamma - 0.1, p.gamma + 0.1), SymmetryClass::Axial, g)
            .unwrap()[0]
            .gamma_h;
        let count = |gamma: f64| {
            let dd = d.with_gamma(gamma).unwrap();
            let w = dd.radial_solution().unwrap();
            dd.negative_eigen_count(&w, false).unwrap()
        };
        assert_eq!(count(crossing - 0.01), count(crossing + 0.01) + 1);
    }

    #[test]
    fn switch_seeds() {
        let p1 = pp(3, 0.0, 0.0);
        let g = grid(&p1, 201, 33);
        let seed = branch_switch(&p1, g, 1, Cone::K1Plus, 0.05).unwrap();
        let cd = cone_check(&seed, Cone::K1Plus, CONE_TOL);
        assert!(cd.member && cd.min_signed_derivative >= 0.0);
        assert!(!cone_check(&seed, Cone::K1Minus, CONE_TOL).member);
        let p2 = pp(3, 0.0, -0.5);
        let seed = branch_switch(&p2, g, 2, Cone::K2Minus, 0.05).unwrap();
        assert!(seed.theta_defect() < 1e-14);
        assert!(cone_check(&seed, Cone::K2Minus, CONE_TOL).member);
        assert!(branch_switch(&p1, g, 1, Cone::K1Plus, 0.0).is_err());
        assert!(branch_switch(&p1, g, 2, Cone::K1Plus, 0.05).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let rec = BranchRecord {
            n: 3,
            s: 0.0,
            cone: Cone::K1Plus,
            grid: Grid2D::new(5.0, 5, 5).unwrap(),
            seed_gamma: 0.0,
            options: TraceOptions::default(),
            points: vec![],
            termination: Termination::StepCollapse { gamma: -0.1 },
            version: "x".into(),
        };
        assert!(rec.to_csv().starts_with("gamma,"));
        assert!(matches!(rec.check(), Err(Error::StepCollapse { .. })));
        let js = serde_json::to_string(&rec).unwrap();
        let back: BranchRecord = serde_json::from_str(&js).unwrap();
        assert_eq!(back, rec);
    }
}
