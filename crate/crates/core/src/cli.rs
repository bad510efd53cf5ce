//! Command-line driver. Exit codes: 0 pass, 1 failed or inconclusive,
//! 2 input or validation error, 3 I/O error, 4 numerical blow-up.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::algebroid::AlgebroidModel;
use crate::dynamics::{self, Method};
use crate::error::{Error, Result};
use crate::funcalg::{BundlePoint, SmoothFn};
use crate::poisson::{predual_condition_diagnostic, ConditionConfig};
use crate::presets::{Family, ModelFamily, Preset};
use crate::reconstruct::{roundtrip_check, RoundtripConfig};
use crate::report::Report;
use crate::spaces::{self, Verdict};
use crate::suite::{parse_overrides, run_identity_suite, SuiteConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_BLOWUP: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "algebroid-poisson",
    version,
    about = "Lie algebroids and linear Poisson brackets on truncated sequence spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the identity suite on a preset or model file.
    Verify {
        model: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        draws: usize,
        /// Comma-separated `check=tolerance` pairs.
        #[arg(long)]
        tol_overrides: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test whether sharp takes values in the tangent bundle of the predual.
    Conditions {
        /// `seqtriple[:weights=unit]` or `precotangent`.
        family: String,
        /// `lo..hi` (doubling) or a comma-separated list.
        #[arg(long, default_value = "8..4096")]
        dims: String,
        #[arg(long, default_value_t = 16)]
        draws: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a Hamiltonian flow and report conservation drift.
    Flow {
        model: String,
        /// `rigid-body`, `zero`, or a JSON expression file.
        #[arg(long, default_value = "rigid-body")]
        hamiltonian: String,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value = "rk4")]
        method: String,
        /// Comma-separated quantities: `casimir`, `m<k>`, `phi<k>`, or JSON expression files.
        #[arg(long, default_value = "")]
        conserved: String,
        /// JSON file `{"m": [...], "phi": [...]}`.
        #[arg(long)]
        init: Option<PathBuf>,
        /// Also run at half the step and report the energy-drift ratio.
        #[arg(long)]
        compare_halving: bool,
        /// Trajectory CSV; the drift summary goes to `--summary` or stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Recover anchor and bracket from the Poisson structure and compare.
    Roundtrip {
        model: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Blowup { .. } => EXIT_BLOWUP,
        _ => EXIT_INPUT,
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn read_json(path: &Path) -> Result<Value> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// A preset name, or else a path to a model JSON file.
pub fn resolve_model(arg: &str) -> Result<AlgebroidModel> {
    match arg.parse::<Preset>() {
        Ok(p) => p.build(),
        Err(preset_err) => {
            let path = Path::new(arg);
            if path.is_file() {
                AlgebroidModel::from_json(&read_json(path)?)
            } else {
                Err(Error::Parse(format!(
                    "unknown model \"{arg}\" (not a preset, not a file): {preset_err}"
                )))
            }
        }
    }
}

pub fn resolve_family(arg: &str) -> Result<Family> {
    arg.parse::<Preset>()?
        .family()
        .ok_or_else(|| Error::Parse(format!("\"{arg}\" is not a truncation family")))
}

pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("bad --dims \"{s}\""));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo == 0 || hi < lo {
            return Err(bad());
        }
        Ok(spaces::doubling_dims(lo, hi))
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
            .collect()
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text.as_bytes())?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn cmd_verify(
    model: &str,
    seed: u64,
    draws: usize,
    tol: &Option<String>,
    out: &Option<PathBuf>,
) -> Result<i32> {
    let model = resolve_model(model)?;
    let overrides = tol
        .as_deref()
        .map(parse_overrides)
        .transpose()?
        .unwrap_or_default();
    let cfg = SuiteConfig {
        seed,
        draws,
        ..Default::default()
    }
    .with_overrides(&overrides)?;
    let mut report = Report::for_model("verify", &model, seed);
    report.checks = run_identity_suite(&model, &cfg)?;
    report.summary = Some(json!({"draws": draws}));
    emit(out, &report.to_pretty_json())?;
    Ok(if report.all_pass() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

fn cmd_conditions(
    family: &str,
    dims: &str,
    draws: usize,
    seed: u64,
    out: &Option<PathBuf>,
) -> Result<i32> {
    let fam = resolve_family(family)?;
    let cfg = ConditionConfig {
        dims: parse_dims(dims)?,
        draws,
        seed,
        ..Default::default()
    };
    let cond = predual_condition_diagnostic(&fam, &cfg)?;
    let mut report = Report::new("conditions", &fam.name(), None, seed);
    report.conditions = Some(serde_json::to_value(&cond)?);
    emit(out, &report.to_pretty_json())?;
    let conclusive = [&cond.anchor_dual_verdict, &cond.ad_star_verdict]
        .iter()
        .all(|v| v.verdict != Verdict::Inconclusive);
    Ok(if !conclusive { EXIT_FAIL } else { EXIT_PASS })
}

fn resolve_function(arg: &str, model: &AlgebroidModel) -> Result<(String, SmoothFn)> {
    let nf = model.fiber_dim();
    let f = match arg {
        "casimir" => dynamics::fiber_norm_squared(nf),
        s if s.starts_with("phi") && s[3..].parse::<usize>().is_ok() => {
            SmoothFn::phi(s[3..].parse().expect("checked"))
        }
        s if s.starts_with('m') && s[1..].parse::<usize>().is_ok() => {
            SmoothFn::m(s[1..].parse().expect("checked"))
        }
        path => SmoothFn::from_json(&read_json(Path::new(path))?)?,
    };
    f.check_dims(model.base_dim(), nf)?;
    Ok((arg.to_string(), f))
}

fn resolve_hamiltonian(arg: &str, model: &AlgebroidModel) -> Result<SmoothFn> {
    let h = match arg {
        "rigid-body" => dynamics::rigid_body_hamiltonian(
            &(1..=model.fiber_dim())
                .map(|k| k as f64)
                .collect::<Vec<_>>(),
        ),
        "zero" => SmoothFn::constant(0.0),
        path => SmoothFn::from_json(&read_json(Path::new(path))?)?,
    };
    h.check_dims(model.base_dim(), model.fiber_dim())?;
    Ok(h)
}

/// `m = 0`, `phi_k = (-1)^k / (k + 1)`.
pub fn default_initial_point(model: &AlgebroidModel) -> BundlePoint {
    let phi = (0..model.fiber_dim())
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / (k + 1) as f64)
        .collect();
    BundlePoint::new(vec![0.0; model.base_dim()], phi)
}

#[allow(clippy::too_many_arguments)]
fn cmd_flow(
    model: &str,
    hamiltonian: &str,
    step: f64,
    steps: usize,
    method: &str,
    conserved: &str,
    init: &Option<PathBuf>,
    compare_halving: bool,
    out: &Option<PathBuf>,
    summary_out: &Option<PathBuf>,
) -> Result<i32> {
    let model = resolve_model(model)?;
    let method: Method = method.parse()?;
    let h = resolve_hamiltonian(hamiltonian, &model)?;
    let quantities: Vec<(String, SmoothFn)> = conserved
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| resolve_function(s, &model))
        .collect::<Result<_>>()?;
    let pt0 = match init {
        Some(p) => serde_json::from_value::<BundlePoint>(read_json(p)?)?,
        None => default_initial_point(&model),
    };
    let traj = dynamics::flow(&model, &h, &pt0, step, steps, method)?;

    let mut drifts = serde_json::Map::new();
    drifts.insert("H".into(), json!(dynamics::conserved_drift(&traj, &h)?));
    for (name, f) in &quantities {
        drifts.insert(name.clone(), json!(dynamics::conserved_drift(&traj, f)?));
    }
    let mut summary = json!({
        "hamiltonian": hamiltonian,
        "method": method,
        "step": step,
        "steps": steps,
        "horizon": step * steps as f64,
        "drift": drifts,
    });
    if compare_halving {
        let half = dynamics::flow(&model, &h, &pt0, step / 2.0, steps * 2, method)?;
        let (d1, d2) = (
            dynamics::conserved_drift(&traj, &h)?,
            dynamics::conserved_drift(&half, &h)?,
        );
        summary["halving"] = json!({"step": step, "half_step": step / 2.0, "drift": d1, "drift_half": d2, "ratio": d1 / d2});
    }

    match out {
        Some(p) => dynamics::write_csv(&traj, &quantities, fs::File::create(p)?)?,
        None => dynamics::write_csv(&traj, &quantities, std::io::stdout().lock())?,
    }
    let mut report = Report::for_model("flow", &model, 0);
    report.summary = Some(summary);
    let text = report.to_pretty_json();
    match (summary_out, out) {
        (Some(p), _) => fs::write(p, text)?,
        (None, Some(_)) => println!("{text}"),
        (None, None) => eprintln!("{text}"),
    }
    Ok(EXIT_PASS)
}

fn cmd_roundtrip(model: &str, seed: u64, samples: usize, out: &Option<PathBuf>) -> Result<i32> {
    let model = resolve_model(model)?;
    let mut report = Report::for_model("roundtrip", &model, seed);
    report.checks = roundtrip_check(&model, &RoundtripConfig { seed, samples })?;
    emit(out, &report.to_pretty_json())?;
    Ok(if report.all_pass() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

pub fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Verify {
            model,
            seed,
            draws,
            tol_overrides,
            out,
        } => cmd_verify(model, *seed, *draws, tol_overrides, out),
        Command::Conditions {
            family,
            dims,
            draws,
            seed,
            out,
        } => cmd_conditions(family, dims, *draws, *seed, out),
        Command::Flow {
            model,
            hamiltonian,
            step,
            steps,
            method,
            conserved,
            init,
            compare_halving,
            out,
            summary,
        } => cmd_flow(
            model,
            hamiltonian,
            *step,
            *steps,
            method,
            conserved,
            init,
            *compare_halving,
            out,
            summary,
        ),
        Command::Roundtrip {
            model,
            seed,
            samples,
            out,
        } => cmd_roundtrip(model, *seed, *samples, out),
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_PASS
            };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
