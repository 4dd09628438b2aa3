//! `kgphase`: build states, emit Wigner components and run the checks.
//!
//! Exit codes: 0 on success, 2 when an input or argument is invalid, 3 when a
//! numerical contract fails (route mismatch, failed `check`, empty probe
//! region). Errors go to stderr as one line, `kgphase: error[<kind>]: <msg>`.

mod state_file;
mod tables;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kgphase::grid::{make_grid, PhaseSpaceGrid};
use kgphase::states::{evolve_free, from_fv, make_gaussian, to_fv, Charge, FvState, Representation};
use kgphase::stats::{coordinate_moment, fig2_curve, purity_criterion_residual, purity_functional, second_moment_corrected, Parity};
use kgphase::wigner::{constraint_residual, fv_wigner_components, momentum_marginal, reality_report, WignerComponents};
use kgphase::Error;
use serde_json::json;

#[derive(Debug)]
pub struct CliError {
    kind: &'static str,
    code: u8,
    message: String,
}

impl CliError {
    fn validation(kind: &'static str, message: String) -> Self {
        Self { kind, code: 2, message }
    }

    pub fn parse(message: String) -> Self {
        Self::validation("parse", message)
    }

    fn contract(kind: &'static str, message: String) -> Self {
        Self { kind, code: 3, message }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (kind, code) = match e {
            Error::InvalidGrid(_) => ("invalid-grid", 2),
            Error::InvalidArgument(_) => ("invalid-argument", 2),
            Error::BoundaryDecay(_) => ("boundary-decay", 2),
            Error::AxisMismatch { .. } => ("axis-mismatch", 2),
            Error::RepresentationMismatch { .. } => ("representation-mismatch", 2),
            Error::GridMismatch => ("grid-mismatch", 2),
            Error::NotChargeInvariant => ("not-charge-invariant", 2),
            Error::NotLinearInQ(_) => ("not-linear-in-q", 2),
            Error::NotSingleCharge => ("not-single-charge", 2),
            Error::Unrecoverable => ("unrecoverable", 3),
            Error::EmptyRegion => ("empty-region", 3),
            Error::RouteMismatch { .. } => ("route-mismatch", 3),
        };
        Self { kind, code, message }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "kgphase", version, about = "Phase-space tools for Klein-Gordon particles in the FV representation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct GridArgs {
    /// Number of momentum nodes (even)
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// Half-width of the momentum window
    #[arg(long, default_value_t = 16.0)]
    p_max: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

impl GridArgs {
    fn build(&self) -> CliResult<PhaseSpaceGrid> {
        Ok(make_grid(self.n, self.p_max, self.hbar, self.mass, self.c)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a Gaussian FV state
    Gaussian {
        #[command(flatten)]
        grid: GridArgs,
        /// Momentum variance σ²
        #[arg(long, allow_negative_numbers = true)]
        sigma2: f64,
        /// +1 for a particle, -1 for an antiparticle
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        charge: i32,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        p0: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        q0: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the Wigner components of a state as CSV
    Wigner {
        state: PathBuf,
        /// Keep every stride-th node along p and q
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Propagate a state freely for time t
    Evolve {
        state: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Coordinate moment ⟨qⁿ⟩ by both routes
    Moments {
        state: PathBuf,
        /// Moment order, 1 to 4
        #[arg(long = "n")]
        order: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Purity functional, constraint and criterion residuals of a state or a Wigner CSV
    Purity {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Coordinate dispersion of Gaussian states against the uncertainty bound
    Fig2 {
        #[arg(long, default_value_t = 1e-4)]
        sigma2_min: f64,
        #[arg(long, default_value_t = 16.0)]
        sigma2_max: f64,
        #[arg(long, default_value_t = 60)]
        points: usize,
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = 64.0)]
        p_max: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the invariants of a state
    Check {
        state: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::validation("io", format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    let res = match output {
        Some(p) => fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| CliError::validation("io", e.to_string()))
}

fn emit_json(output: Option<&Path>, value: &serde_json::Value) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    emit(output, &s)
}

fn load_state(path: &Path) -> CliResult<FvState> {
    state_file::from_json(&read(path)?)
}

fn as_fv(s: &FvState) -> CliResult<FvState> {
    Ok(match s.representation() {
        Representation::Fv => s.clone(),
        Representation::Usual => to_fv(s)?,
    })
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gaussian { grid, sigma2, charge, p0, q0, output } => {
            let g = grid.build()?;
            let s = make_gaussian(&g, sigma2, Charge::from_sign(charge)?, p0, q0)?;
            emit(output.as_deref(), &state_file::to_json(&s))
        }
        Command::Wigner { state, stride, output } => {
            if stride == 0 {
                return Err(CliError::validation("invalid-argument", "stride must be >= 1".into()));
            }
            let s = as_fv(&load_state(&state)?)?;
            let w = fv_wigner_components(&s)?;
            emit(output.as_deref(), &tables::wigner_csv(&w, &state_file::hash(&s), stride))
        }
        Command::Evolve { state, t, output } => {
            if !t.is_finite() {
                return Err(CliError::validation("invalid-argument", format!("t must be finite (got {t})")));
            }
            let s = load_state(&state)?;
            let moved = evolve_free(&as_fv(&s)?, t)?;
            let moved = if s.representation() == Representation::Usual { from_fv(&moved)? } else { moved };
            emit(output.as_deref(), &state_file::to_json(&moved))
        }
        Command::Moments { state, order, output } => {
            let s = as_fv(&load_state(&state)?)?;
            let m = coordinate_moment(&s, order)?;
            let (usual, correction) = second_moment_corrected(&s)?;
            emit_json(
                output.as_deref(),
                &json!({
                    "order": order,
                    "formula": m.formula,
                    "grid": m.grid,
                    "discrepancy": m.discrepancy(),
                    "second_moment_usual_term": usual,
                    "second_moment_correction_term": correction,
                }),
            )
        }
        Command::Purity { input, output } => {
            let text = read(&input)?;
            let w = if text.trim_start().starts_with('{') {
                fv_wigner_components(&as_fv(&state_file::from_json(&text)?)?)?
            } else {
                tables::read_wigner_csv(&text)?
            };
            emit_json(output.as_deref(), &purity_report(&w)?)
        }
        Command::Fig2 { sigma2_min, sigma2_max, points, n, p_max, hbar, mass, c, output } => {
            if !(sigma2_min > 0.0 && sigma2_max > sigma2_min && points >= 2) {
                return Err(CliError::validation(
                    "invalid-argument",
                    format!("need 0 < sigma2-min < sigma2-max and points >= 2 (got {sigma2_min}, {sigma2_max}, {points})"),
                ));
            }
            let g = make_grid(n, p_max, hbar, mass, c)?;
            let (lo, hi) = (sigma2_min.ln(), sigma2_max.ln());
            let list: Vec<f64> =
                (0..points).map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp()).collect();
            let curve = fig2_curve(&list, &g);
            emit(output.as_deref(), &tables::fig2_csv(&curve, &g))
        }
        Command::Check { state, output } => {
            let s = as_fv(&load_state(&state)?)?;
            let (report, ok) = check_report(&s)?;
            emit_json(output.as_deref(), &report)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::contract("check-failed", "one or more invariants failed; see report".into()))
            }
        }
    }
}

fn optional(r: kgphase::Result<f64>) -> serde_json::Value {
    r.map_or(serde_json::Value::Null, |v| json!(v))
}

fn purity_report(w: &WignerComponents) -> CliResult<serde_json::Value> {
    let f = purity_functional(w)?;
    let target = 1.0 / (2.0 * std::f64::consts::PI * w.grid().hbar());
    let crit = |p| optional(purity_criterion_residual(w, p).map(|r| r.max_abs));
    Ok(json!({
        "purity_functional": f,
        "pure_state_value": target,
        "ratio": f / target,
        "constraint_relative_residual": constraint_residual(w).relative(),
        "criterion_even_max_residual": crit(Parity::Even),
        "criterion_odd_max_residual": crit(Parity::Odd),
    }))
}

fn check_report(s: &FvState) -> CliResult<(serde_json::Value, bool)> {
    let w = fv_wigner_components(s)?;
    let mut checks = Vec::new();
    let mut all = true;
    let mut add = |name: &str, value: f64, tol: f64| {
        let pass = value <= tol;
        all &= pass;
        checks.push(json!({ "name": name, "value": value, "tolerance": tol, "pass": pass }));
    };
    let (im, odd) = reality_report(&w);
    add("even_components_real", im, 1e-12);
    add("odd_components_conjugate", odd, 1e-12);
    add("pure_state_constraint_relative", constraint_residual(&w).relative(), 1e-8);
    let g = w.grid();
    let charge: f64 = (w.w_pp().sum() + w.w_mm().sum()).re * g.dp() * g.dq();
    add("charge_norm_error", (charge - s.charge_norm()).abs(), 1e-10);
    if let Some(ch) = s.single_charge() {
        let marg = momentum_marginal(&w)?;
        let dev = marg.iter().zip(s.component(ch)).fold(0.0f64, |m, (a, z)| m.max((a - z.norm_sqr()).abs()));
        add("momentum_marginal", dev, 1e-12);
        // relative to the moment itself or the packet width, whichever is larger
        let (usual, _) = second_moment_corrected(s)?;
        for order in [1, 2] {
            let (formula, grid) = match coordinate_moment(s, order) {
                Ok(m) => (m.formula, m.grid),
                Err(Error::RouteMismatch { formula, grid, .. }) => (formula, grid),
                Err(e) => return Err(e.into()),
            };
            let scale = formula.abs().max(grid.abs()).max(usual.abs().powf(order as f64 / 2.0));
            add(&format!("moment_routes_order_{order}"), (formula - grid).abs() / scale, 1e-6);
        }
    }
    let report = json!({
        "charge_norm": s.charge_norm(),
        "pd_norm": s.pd_norm(),
        "single_charge": s.single_charge().map(|c| c.sign()),
        "checks": checks,
        "pass": all,
    });
    Ok((report, all))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.message.replace('\n', " ");
            eprintln!("kgphase: error[{}]: {msg}", e.kind);
            ExitCode::from(e.code)
        }
    }
}
