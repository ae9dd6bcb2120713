use std::fmt::Write as _;
use std::path::Path;

use hsbif::closed_forms::{
    eval_radial_log, kelvin_radial, norm_equivalence_check, residual_radial, sample_radial, w_rad,
    QuadSpec, RadialKind,
};
use hsbif::continuation::{
    energy_f, energy_lower_bound, nehari_minimize, switch_and_correct, trace_branch,
    NehariOptions, SwitchOptions, TraceOptions,
};
use hsbif::grid::UniformGrid;
use hsbif::params::{
    degree_status, gamma_j, harmonic_multiplicity, hardy_threshold, morse_index,
    morse_index_symmetric, mu_j, negative_degrees,
};
use hsbif::pde2d::{decay_rate, expected_decay_rate, Cone, Discretization, Field2D};
use hsbif::spectral::{
    default_j_max, kernel_cosine, poschl_teller_levels, reduce_to_schroedinger,
    singular_spectrum, solve_sl, SpectrumOptions, SturmLiouvilleProblem,
};
use hsbif::{Error, Result, SymmetryClass};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

/// Result of a command: the JSON payload and, when the run completed but a check or a
/// branch failed, a description of the failure.
pub struct CommandOutput {
    pub result: Value,
    pub failure: Option<String>,
}

impl CommandOutput {
    fn ok(result: Value) -> Self {
        Self {
            result,
            failure: None,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(Error::from)
}

fn write_out(cfg: &RunConfig, name: &str, text: &str) -> Result<()> {
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

pub fn constants(cfg: &RunConfig) -> Result<CommandOutput> {
    let p = cfg.params()?;
    let j_max = cfg.j.unwrap_or(6).max(default_j_max(&p));
    let table = (1..=j_max)
        .map(|j| -> Result<Value> {
            Ok(json!({
                "j": j,
                "gamma_j": gamma_j(p.n, p.s, j)?,
                "mu_j": mu_j(p.n, j),
                "multiplicity": harmonic_multiplicity(p.n, j)?.to_string(),
                "status": format!("{:?}", degree_status(&p, j)).to_lowercase(),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CommandOutput::ok(json!({
        "params": p,
        "constants": p.constants(),
        "hardy_threshold": hardy_threshold(p.n),
        "lambda1_rad": p.lambda1_rad(),
        "degeneracies": table,
    })))
}

pub fn morse(cfg: &RunConfig) -> Result<CommandOutput> {
    let p = cfg.params()?;
    Ok(CommandOutput::ok(json!({
        "params": p,
        "morse_index": morse_index(&p)?.to_string(),
        "morse_index_axial": morse_index_symmetric(&p, SymmetryClass::Axial)?.to_string(),
        "morse_index_axial_even": morse_index_symmetric(&p, SymmetryClass::AxialEven)?.to_string(),
        "negative_degrees": negative_degrees(&p),
    })))
}

fn spectrum_options(cfg: &RunConfig) -> SpectrumOptions {
    SpectrumOptions {
        m: cfg.sl_intervals(),
        ..SpectrumOptions::default()
    }
}

pub fn spectrum(cfg: &RunConfig) -> Result<CommandOutput> {
    let p = cfg.params()?;
    let j_max = cfg.j.unwrap_or_else(|| default_j_max(&p));
    let report = singular_spectrum(&p, j_max, &spectrum_options(cfg))?;
    let mut csv = String::from("j,mu,multiplicity,formula,discrete,disagreement\n");
    for d in &report.degrees {
        let _ = writeln!(
            csv,
            "{},{:.15e},{},{:.15e},{:.15e},{:.3e}",
            d.j, d.mu, d.multiplicity, d.formula, d.discrete, d.disagreement
        );
    }
    write_out(cfg, "spectrum.csv", &csv)?;
    let mut v = to_value(&report)?;
    v["morse_formula"] = json!(morse_index(&p)?.to_string());
    Ok(CommandOutput::ok(v))
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    limit: String,
    pass: bool,
}

fn check(name: impl Into<String>, value: f64, pass: bool, limit: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        value,
        limit: limit.into(),
        pass,
    }
}

/// Closed-form certification: residual order, Kelvin identities, norm equivalence,
/// one-dimensional eigenvalue oracles, Morse cross-check and kernel shape.
pub fn verify(cfg: &RunConfig) -> Result<CommandOutput> {
    let p = cfg.params()?;
    let mut checks = Vec::new();

    let grid = UniformGrid::symmetric(10.0, 401)?;
    let r1 = residual_radial(&p, 1.0, &grid);
    let r2 = residual_radial(&p, 1.0, &grid.refined());
    checks.push(check("residual_order_ratio", r1 / r2, (r1 / r2 - 4.0).abs() <= 0.8, "4 +- 0.8"));

    let grid = UniformGrid::symmetric(12.0, 601)?;
    let u = sample_radial(RadialKind::U, &p, grid.clone());
    let z = sample_radial(RadialKind::Z, &p, grid);
    let ku = kelvin_radial(&u, p.n)?;
    let kz = kelvin_radial(&z, p.n)?;
    let ku_err = ku.values.iter().zip(&u.values).map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max);
    let kz_err = kz
        .values
        .iter()
        .zip(&z.values)
        .filter(|(_, b)| **b != 0.0)
        .map(|(a, b)| (a + b).abs() / b.abs())
        .fold(0.0, f64::max);
    checks.push(check("kelvin_u_even", ku_err, ku_err <= 1e-13, "<= 1e-13"));
    checks.push(check("kelvin_z_odd", kz_err, kz_err <= 1e-13, "<= 1e-13"));

    let f = |t: f64| eval_radial_log(RadialKind::U, &p, t);
    let ne = norm_equivalence_check(&f, &p, &QuadSpec::default())?;
    checks.push(check("norm_equivalence_gap", ne.relative_gap, ne.relative_gap <= 1e-8, "<= 1e-8"));

    let m = cfg.sl_intervals();
    let q = p.constants().q_s;
    let sol = solve_sl(&SturmLiouvilleProblem::new(reduce_to_schroedinger(q)?, q, 20.0, m)?, 2)?;
    let exact = poschl_teller_levels(q);
    for k in 0..2 {
        let e = (sol.eigenvalues[k] - exact[k]).abs();
        checks.push(check(format!("sl_level_{k}_error"), e, e <= 1e-6, "<= 1e-6"));
    }

    let opts = spectrum_options(cfg);
    match singular_spectrum(&p, default_j_max(&p), &opts) {
        Ok(r) => {
            let formula = morse_index(&p)?;
            checks.push(check(
                "morse_discrete_minus_formula",
                r.morse.full as f64 - formula as f64,
                r.morse.full == formula,
                "= 0",
            ));
        }
        Err(e) => checks.push(check(format!("singular_spectrum: {e}"), f64::NAN, false, "ok")),
    }

    for j in 1..=2 {
        let gj = gamma_j(p.n, p.s, j)?;
        let c = kernel_cosine(&p.with_gamma(gj)?, j, &opts)?;
        checks.push(check(format!("kernel_cosine_j{j}"), c, c >= 0.999, ">= 0.999"));
    }

    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let failure = (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join(", ")));
    Ok(CommandOutput {
        result: json!({ "params": p, "sl_intervals": m, "checks": checks }),
        failure,
    })
}

pub fn solve_radial(cfg: &RunConfig) -> Result<CommandOutput> {
    let p = cfg.params()?;
    let grid = cfg.grid(&p)?;
    let disc = Discretization::new(&p, grid)?;
    let w = disc.radial_solution()?;
    let closed = Field2D::radial(&p, grid);
    let e = energy_f(&disc, &w);
    let mut csv = String::from("t,w_discrete,w_closed_form\n");
    for i in 0..grid.mt {
        let t = grid.t(i);
        let _ = writeln!(csv, "{t:.12e},{:.15e},{:.15e}", w.at(i, 0), w_rad(&p, t));
    }
    write_out(cfg, "radial.csv", &csv)?;
    Ok(CommandOutput::ok(json!({
        "params": p,
        "grid": grid,
        "residual": disc.residual_norm(&w)?,
        "sup_norm": w.sup_norm(),
        "distance_to_closed_form": w.sup_distance(&closed),
        "decay_rate": decay_rate(&w),
        "decay_expected": expected_decay_rate(&p),
        "energy": e,
        "energy_lower_bound": energy_lower_bound(&p),
        "negative_eigen_count_axial": disc.negative_eigen_count(&w, false)?,
    })))
}

fn continue_one(cfg: &RunConfig, cone: Cone, degree: u32) -> Result<Value> {
    if cone.degree() != degree {
        return Err(Error::InvalidArgument(format!(
            "cone {cone} branches from gamma_{}, not gamma_{degree}",
            cone.degree()
        )));
    }
    let gj = gamma_j(cfg.n, cfg.s, degree)?;
    let p_j = cfg.params()?.with_gamma(gj)?;
    let grid = cfg.grid(&p_j)?;
    let sw = switch_and_correct(cfg.n, cfg.s, grid, cone, &SwitchOptions::default())?;
    let switch = json!({
        "gamma_j": sw.gamma_j,
        "gamma_h": sw.gamma_h,
        "gamma": sw.gamma,
        "amplitude": sw.amplitude,
        "deflated": sw.deflated,
        "non_radial": sw.non_radial,
        "cone": sw.cone,
        "newton": sw.report,
    });
    if !(sw.non_radial && sw.cone.member) {
        return Ok(json!({
            "cone": cone,
            "switch": switch,
            "failure": "no non-radial solution in the cone below the degeneracy point",
        }));
    }
    let opts = TraceOptions {
        gamma_min: cfg.gamma_min.unwrap_or(gj - 0.5),
        max_points: cfg.steps,
        tol: cfg.tol,
        ..TraceOptions::default()
    };
    let disc = Discretization::new(&sw.field.params, grid)?;
    let record = trace_branch(&disc, &sw.field, cone, &opts)?;
    if let Some(dir) = &cfg.out {
        record.write_files(&dir.join(cone_dir(cone)))?;
    }
    let mut v = json!({
        "cone": cone,
        "switch": switch,
        "gamma_extent": record.gamma_extent(),
        "points": record.points.len(),
        "termination": record.termination,
    });
    if let Err(e) = record.check() {
        v["failure"] = json!(e.to_string());
    }
    Ok(v)
}

fn cone_dir(c: Cone) -> String {
    c.to_string().replace('+', "plus").replace('-', "minus")
}

/// Branch switching at `gamma_j` followed by a trace, one worker thread per cone.
pub fn continue_branches(cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.params()?;
    let degree = cfg.from.unwrap_or_else(|| cfg.cones.first().map_or(1, |c| c.degree()));
    if let Some(c) = cfg.cones.iter().find(|c| c.degree() != degree) {
        return Err(Error::InvalidArgument(format!(
            "cone {c} does not branch from gamma_{degree}"
        )));
    }
    let results: Vec<Result<Value>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .cones
            .iter()
            .map(|&cone| scope.spawn(move || continue_one(cfg, cone, degree)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::LinearSolve("worker panicked".into()))))
            .collect()
    });
    let mut branches = Vec::new();
    let mut failures = Vec::new();
    for (cone, r) in cfg.cones.iter().zip(results) {
        match r {
            Ok(v) => {
                if let Some(f) = v.get("failure").and_then(Value::as_str) {
                    failures.push(format!("{cone}: {f}"));
                }
                branches.push(v);
            }
            Err(e) => {
                failures.push(format!("{cone}: {e}"));
                branches.push(json!({ "cone": cone, "failure": e.to_string() }));
            }
        }
    }
    Ok(CommandOutput {
        result: json!({ "from": degree, "branches": branches }),
        failure: (!failures.is_empty()).then(|| failures.join("; ")),
    })
}

pub fn nehari(cfg: &RunConfig) -> Result<CommandOutput> {
    let p = cfg.params()?;
    let grid = cfg.grid(&p)?;
    let disc = Discretization::new(&p, grid)?;
    let degree = match cfg.symmetry {
        SymmetryClass::Axial => 1,
        SymmetryClass::AxialEven => 2,
        other => {
            return Err(Error::InvalidArgument(format!(
                "nehari supports axial and axial-even, got {other}"
            )))
        }
    };
    // radial profile tilted along the first admissible harmonic
    let r = Field2D::radial(&p, grid);
    let k = Field2D::kernel(&p, grid, degree);
    let mut init = r.axpy(0.3 * r.sup_norm() / k.sup_norm(), &k);
    init.theta_even = degree == 2;
    let res = nehari_minimize(&disc, cfg.symmetry, &init, &NehariOptions::default())?;
    if let Some(f) = &res.field {
        write_out(cfg, "nehari_field.csv", &hsbif::continuation::field_csv(f))?;
    }
    Ok(CommandOutput::ok(to_value(&res)?))
}

/// Write `report.json` next to the command's other outputs.
pub fn write_report(dir: &Path, name: &str, report: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), report)?;
    Ok(())
}
