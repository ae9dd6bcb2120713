use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use hsbif::Error;
use hsbif_cli::commands::{self, CommandOutput};
use hsbif_cli::config::{parse_cones, parse_from, Overrides, RunConfig};
use hsbif_cli::{error_kind, exit_code};
use serde_json::json;

#[derive(Parser)]
#[command(name = "hsbif", version, about = "Radial solutions, Morse indices and non-radial branches of the Hardy-Sobolev equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy)]
enum Name {
    Constants,
    Morse,
    Spectrum,
    Verify,
    SolveRadial,
    Continue,
    Nehari,
}

#[derive(Subcommand)]
enum Command {
    /// Derived constants and the degeneracy table.
    Constants(Flags),
    /// Morse index of the radial solution.
    Morse(Flags),
    /// Discrete singular spectrum per harmonic degree.
    Spectrum(Flags),
    /// Closed-form certification suite; exits 1 on any failed check.
    Verify(Flags),
    /// Discrete radial solution on the 2D grid.
    SolveRadial(Flags),
    /// Branch switching at gamma_j and pseudo-arclength tracing.
    Continue(Flags),
    /// Nehari minimizer in an axial symmetry class.
    Nehari(Flags),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// INI-style key = value file; flags win over its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long)]
    j: Option<u32>,
    /// coarse, default or fine
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// k1+, k1-, k2+, k2-, a comma list, or all
    #[arg(long)]
    cone: Option<String>,
    /// gamma1, gamma2, ...
    #[arg(long)]
    from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma_min: Option<f64>,
    /// Maximum number of stored branch points.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// axial or axial-even
    #[arg(long)]
    symmetry: Option<String>,
}

impl Flags {
    fn overrides(&self) -> hsbif::Result<Overrides> {
        let mut o = Overrides {
            n: self.n,
            s: self.s,
            gamma: self.gamma,
            j: self.j,
            out: self.out.clone(),
            gamma_min: self.gamma_min,
            steps: self.steps,
            tol: self.tol,
            ..Overrides::default()
        };
        if let Some(p) = &self.profile {
            o.profile = Some(p.parse()?);
        }
        if let Some(c) = &self.cone {
            o.cones = Some(parse_cones(c)?);
        }
        if let Some(f) = &self.from {
            o.from = Some(parse_from(f)?);
        }
        if let Some(s) = &self.symmetry {
            o.symmetry = Some(s.parse()?);
        }
        Ok(o)
    }

    fn resolve(&self) -> hsbif::Result<RunConfig> {
        let file = self.config.as_deref().map(Overrides::from_ini_file).transpose()?;
        Ok(RunConfig::resolve(file, self.overrides()?))
    }
}

fn split(c: Command) -> (Name, Flags) {
    match c {
        Command::Constants(f) => (Name::Constants, f),
        Command::Morse(f) => (Name::Morse, f),
        Command::Spectrum(f) => (Name::Spectrum, f),
        Command::Verify(f) => (Name::Verify, f),
        Command::SolveRadial(f) => (Name::SolveRadial, f),
        Command::Continue(f) => (Name::Continue, f),
        Command::Nehari(f) => (Name::Nehari, f),
    }
}

fn label(n: Name) -> &'static str {
    match n {
        Name::Constants => "constants",
        Name::Morse => "morse",
        Name::Spectrum => "spectrum",
        Name::Verify => "verify",
        Name::SolveRadial => "solve-radial",
        Name::Continue => "continue",
        Name::Nehari => "nehari",
    }
}

fn run(name: Name, cfg: &RunConfig) -> hsbif::Result<CommandOutput> {
    match name {
        Name::Constants => commands::constants(cfg),
        Name::Morse => commands::morse(cfg),
        Name::Spectrum => commands::spectrum(cfg),
        Name::Verify => commands::verify(cfg),
        Name::SolveRadial => commands::solve_radial(cfg),
        Name::Continue => commands::continue_branches(cfg),
        Name::Nehari => commands::nehari(cfg),
    }
}

fn emit(cfg: Option<&RunConfig>, command: &str, body: serde_json::Value) -> hsbif::Result<()> {
    let mut report = json!({
        "command": command,
        "version": hsbif::VERSION,
        "config": cfg,
    });
    for (k, v) in body.as_object().into_iter().flatten() {
        report[k] = v.clone();
    }
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(dir) = cfg.and_then(|c| c.out.as_ref()) {
        commands::write_report(dir, &format!("{command}.json"), &text)?;
        // kept apart so identical runs give byte-identical reports
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let meta = json!({ "command": command, "unix_time": stamp, "args": std::env::args().collect::<Vec<_>>() });
        commands::write_report(dir, &format!("{command}.metadata.json"), &serde_json::to_string_pretty(&meta)?)?;
    }
    Ok(())
}

fn failure(cfg: Option<&RunConfig>, command: &str, e: &Error) -> ExitCode {
    let code = exit_code(e);
    eprintln!("hsbif {command}: {e}");
    let body = json!({
        "status": "error",
        "error": { "kind": error_kind(e), "message": e.to_string(), "exit_code": code },
    });
    let _ = emit(cfg, command, body);
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, flags) = split(cli.command);
    let command = label(name);
    let cfg = match flags.resolve() {
        Ok(c) => c,
        Err(e) => return failure(None, command, &e),
    };
    match run(name, &cfg) {
        Ok(out) => {
            let status = if out.failure.is_some() { "failed" } else { "ok" };
            let mut body = json!({ "status": status, "result": out.result });
            if let Some(f) = &out.failure {
                body["error"] = json!({ "kind": "check_failed", "message": f, "exit_code": 1 });
                eprintln!("hsbif {command}: {f}");
            }
            if let Err(e) = emit(Some(&cfg), command, body) {
                return failure(Some(&cfg), command, &e);
            }
            if out.failure.is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => failure(Some(&cfg), command, &e),
    }
}
