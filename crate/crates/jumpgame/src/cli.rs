//! Command-line pipeline: validate, solve, certify, simulate, and the
//! matrix-game diagnostic.
//!
//! Exit codes: 0 success, 1 quantitative failure (validation, convergence,
//! solver disagreement, saddle gap, drift check), 2 input error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use jumpgame_core::{
    auto_certificate, best_response, empirical_drift_check, extract_policies, isaacs_backward,
    solve_matrix_game, validate_certificate, validate_model, value_iterate, build_grid,
    DriftCertificate, GameModel, MarkovPolicy, Matrix, Side, SolveDiagnostics,
    ValueIterationError, ValueGrid,
};

use crate::format::parse_model;
use crate::io;
use crate::parallel::{monte_carlo_parallel, simulate_trajectories};

pub const EXIT_OK: i32 = 0;
pub const EXIT_QUANTITATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "jumpgame", version, about = "Finite-horizon zero-sum Markov jump game solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Monotone value iteration on the uniformized fixed-point operator.
    Iterate,
    /// Backward Runge-Kutta integration of the Isaacs equation.
    Ode,
    /// Run both and report the agreement gap.
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check model structure, rate conservativeness, and the drift certificate.
    Validate {
        /// Model file (JSON schema).
        #[arg(long)]
        model: PathBuf,
        /// Tolerance for row sums and stochasticity checks.
        #[arg(long, default_value_t = 1e-12)]
        rate_tol: f64,
    },
    /// Compute the value function and optimal Markov policies.
    Solve(SolveArgs),
    /// Certify the saddle by best responses against the extracted policies.
    Certify(CertifyArgs),
    /// Simulate the jump process and estimate the payoff by Monte Carlo.
    Simulate(SimulateArgs),
    /// Solve a single matrix game from CSV (diagnostic).
    Matrix {
        /// CSV file with one matrix row per line.
        #[arg(long = "in")]
        input: PathBuf,
        /// Saddle residual tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Total number of grid intervals (refined to include cell boundaries).
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    /// Sup-norm stopping tolerance of the value iteration.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Matrix-game (stage saddle) tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub matrix_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    pub method: Method,
    /// Largest tolerated disagreement between the two solvers (method=both).
    #[arg(long, default_value_t = 1e-3)]
    pub agreement_tol: f64,
    #[arg(long)]
    pub out_values: Option<PathBuf>,
    #[arg(long)]
    pub out_policy_max: Option<PathBuf>,
    #[arg(long)]
    pub out_policy_min: Option<PathBuf>,
    #[arg(long)]
    pub out_diagnostics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub matrix_tol: f64,
    /// Largest tolerated best-response duality gap per initial state.
    #[arg(long, default_value_t = 1e-3)]
    pub saddle_tol: f64,
    /// Maximizer policy file; extracted from the solved value when absent.
    #[arg(long)]
    pub policy_max: Option<PathBuf>,
    /// Minimizer policy file; extracted from the solved value when absent.
    #[arg(long)]
    pub policy_min: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub matrix_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub paths: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial state label; defaults to the first declared state.
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long)]
    pub policy_max: Option<PathBuf>,
    #[arg(long)]
    pub policy_min: Option<PathBuf>,
    /// Dump every simulated trajectory as CSV.
    #[arg(long)]
    pub out_trajectories: Option<PathBuf>,
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Validate { model, rate_tol } => cmd_validate(&model, rate_tol),
        Command::Solve(args) => cmd_solve(&args),
        Command::Certify(args) => cmd_certify(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Matrix { input, tol } => cmd_matrix(&input, tol),
    }
}

fn load_model(path: &Path) -> Result<(GameModel, Option<DriftCertificate>), i32> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(EXIT_INPUT);
        }
    };
    parse_model(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_INPUT
    })
}

fn write_out(path: &Path, content: &str) -> Result<(), i32> {
    fs::write(path, content).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_INPUT
    })
}

fn cmd_validate(path: &Path, rate_tol: f64) -> i32 {
    let (model, file_cert) = match load_model(path) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let model_report = validate_model(&model, rate_tol);
    print!("{}", io::render_report("model", &model_report));
    let cert = file_cert.unwrap_or_else(|| auto_certificate(&model));
    let cert_report = validate_certificate(&model, &cert, rate_tol);
    print!("{}", io::render_report("certificate", &cert_report));
    if model_report.all_pass() && cert_report.all_pass() {
        EXIT_OK
    } else {
        EXIT_QUANTITATIVE
    }
}

struct SolveOutcome {
    values: ValueGrid,
    diagnostics: Option<SolveDiagnostics>,
    agreement_gap: Option<f64>,
    converged: bool,
}

fn solve_with_method(
    model: &GameModel,
    cert: &DriftCertificate,
    args: &SolveArgs,
) -> Result<SolveOutcome, i32> {
    let grid = build_grid(model, args.grid);
    let ode = |quiet: bool| -> Result<ValueGrid, i32> {
        isaacs_backward(model, &grid, args.matrix_tol).map_err(|e| {
            if !quiet {
                eprintln!("error: {e}");
            }
            EXIT_INPUT
        })
    };
    match args.method {
        Method::Ode => Ok(SolveOutcome {
            values: ode(false)?,
            diagnostics: None,
            agreement_gap: None,
            converged: true,
        }),
        Method::Iterate | Method::Both => {
            let iterated =
                value_iterate(model, cert, &grid, args.tol, args.matrix_tol, args.max_iter);
            let (values, diagnostics, converged) = match iterated {
                Ok((u, d)) => (u, d, true),
                Err(ValueIterationError::NotConverged {
                    partial,
                    diagnostics,
                }) => {
                    eprintln!(
                        "error: value iteration did not converge in {} iterations",
                        diagnostics.iterations
                    );
                    (partial, diagnostics, false)
                }
                Err(ValueIterationError::Inner(e)) => {
                    eprintln!("error: {e}");
                    return Err(EXIT_INPUT);
                }
            };
            let agreement_gap = if args.method == Method::Both {
                Some(values.sup_distance(&ode(false)?))
            } else {
                None
            };
            Ok(SolveOutcome {
                values,
                diagnostics: Some(diagnostics),
                agreement_gap,
                converged,
            })
        }
    }
}

fn validated_model(path: &Path) -> Result<(GameModel, Option<DriftCertificate>), i32> {
    let (model, file_cert) = load_model(path)?;
    let report = validate_model(&model, 1e-12);
    if !report.all_pass() {
        print!("{}", io::render_report("model", &report));
        eprintln!("error: model fails validation");
        return Err(EXIT_QUANTITATIVE);
    }
    Ok((model, file_cert))
}

fn cmd_solve(args: &SolveArgs) -> i32 {
    let (model, file_cert) = match validated_model(&args.model) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let cert = file_cert.unwrap_or_else(|| auto_certificate(&model));
    let outcome = match solve_with_method(&model, &cert, args) {
        Ok(o) => o,
        Err(code) => return code,
    };
    let u = &outcome.values;

    if let Some(path) = &args.out_values {
        if write_out(path, &io::render_values(&model, u)).is_err() {
            return EXIT_INPUT;
        }
    }
    match extract_policies(&model, u, args.matrix_tol) {
        Ok((pi, psi)) => {
            for (path, pol) in [(&args.out_policy_max, &pi), (&args.out_policy_min, &psi)] {
                if let Some(path) = path {
                    if write_out(path, &io::render_policy(&model, pol)).is_err() {
                        return EXIT_INPUT;
                    }
                }
            }
        }
        Err(e) => {
            eprintln!("error: policy extraction failed: {e}");
            return EXIT_INPUT;
        }
    }
    if let Some(path) = &args.out_diagnostics {
        let text = match &outcome.diagnostics {
            Some(d) => io::render_diagnostics(d, outcome.agreement_gap),
            None => match outcome.agreement_gap {
                Some(gap) => format!("solver_agreement_gap: {gap:e}\n"),
                None => String::from("method: ode\n"),
            },
        };
        if write_out(path, &text).is_err() {
            return EXIT_INPUT;
        }
    }

    for (x, s) in model.states().iter().enumerate() {
        println!("u(0,{s}) = {}", u.values[0][x]);
    }
    if let Some(gap) = outcome.agreement_gap {
        println!("solver_agreement_gap = {gap:e}");
        if gap > args.agreement_tol {
            eprintln!(
                "error: solver disagreement {gap:e} exceeds {:e}",
                args.agreement_tol
            );
            return EXIT_QUANTITATIVE;
        }
    }
    if !outcome.converged {
        return EXIT_QUANTITATIVE;
    }
    EXIT_OK
}

fn load_policy_pair(
    model: &GameModel,
    grid: &[f64],
    matrix_tol: f64,
    u: &ValueGrid,
    max_path: &Option<PathBuf>,
    min_path: &Option<PathBuf>,
) -> Result<(MarkovPolicy, MarkovPolicy), i32> {
    let read = |path: &Path, side: Side| -> Result<MarkovPolicy, i32> {
        let text = fs::read_to_string(path).map_err(|e| {
            eprintln!("error: cannot read {}: {e}", path.display());
            EXIT_INPUT
        })?;
        let pol = io::parse_policy(model, side, &text).map_err(|e| {
            eprintln!("error: {}: {e}", path.display());
            EXIT_INPUT
        })?;
        if pol.times != grid {
            eprintln!(
                "error: {}: policy grid does not match --grid (expected {} points)",
                path.display(),
                grid.len()
            );
            return Err(EXIT_INPUT);
        }
        Ok(pol)
    };
    match (max_path, min_path) {
        (Some(a), Some(b)) => Ok((read(a, Side::Maximizer)?, read(b, Side::Minimizer)?)),
        (None, None) => extract_policies(model, u, matrix_tol).map_err(|e| {
            eprintln!("error: policy extraction failed: {e}");
            EXIT_INPUT
        }),
        _ => {
            eprintln!("error: provide both --policy-max and --policy-min, or neither");
            Err(EXIT_INPUT)
        }
    }
}

fn cmd_certify(args: &CertifyArgs) -> i32 {
    let (model, _) = match validated_model(&args.model) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let grid = build_grid(&model, args.grid);
    let u = match isaacs_backward(&model, &grid, args.matrix_tol) {
        Ok(u) => u,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let (pi, psi) = match load_policy_pair(
        &model,
        &grid,
        args.matrix_tol,
        &u,
        &args.policy_max,
        &args.policy_min,
    ) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let hi = match best_response(&model, &psi, Side::Maximizer, &grid) {
        Ok((v, _)) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let lo = match best_response(&model, &pi, Side::Minimizer, &grid) {
        Ok((v, _)) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    println!("state,br_max_vs_min,br_min_vs_max,gap,value");
    let mut worst_gap = f64::NEG_INFINITY;
    let mut bracket_ok = true;
    for (x, s) in model.states().iter().enumerate() {
        let gap = hi[x] - lo[x];
        worst_gap = worst_gap.max(gap);
        let v0 = u.values[0][x];
        if v0 < lo[x] - args.saddle_tol || v0 > hi[x] + args.saddle_tol {
            bracket_ok = false;
        }
        println!("{s},{},{},{gap},{v0}", hi[x], lo[x]);
    }
    println!("max_gap = {worst_gap:e}");
    if worst_gap <= args.saddle_tol && bracket_ok {
        EXIT_OK
    } else {
        eprintln!(
            "error: saddle certification failed (max gap {worst_gap:e}, tol {:e}, bracket ok: {bracket_ok})",
            args.saddle_tol
        );
        EXIT_QUANTITATIVE
    }
}

fn cmd_simulate(args: &SimulateArgs) -> i32 {
    let (model, file_cert) = match validated_model(&args.model) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let grid = build_grid(&model, args.grid);
    let u = match isaacs_backward(&model, &grid, args.matrix_tol) {
        Ok(u) => u,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let (pi, psi) = match load_policy_pair(
        &model,
        &grid,
        args.matrix_tol,
        &u,
        &args.policy_max,
        &args.policy_min,
    ) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let x0 = match &args.x0 {
        Some(label) => match model.state_index(label) {
            Some(x) => x,
            None => {
                eprintln!("error: unknown initial state `{label}`");
                return EXIT_INPUT;
            }
        },
        None => 0,
    };
    let est = monte_carlo_parallel(&model, &pi, &psi, x0, args.paths, args.seed);
    print!("{}", io::render_estimate(&est, &model.states()[x0]));

    if let Some(path) = &args.out_trajectories {
        let trajs = simulate_trajectories(&model, &pi, &psi, x0, args.paths, args.seed);
        if write_out(path, &io::render_trajectories(&model, &trajs)).is_err() {
            return EXIT_INPUT;
        }
    }

    if let Some(cert) = file_cert {
        let report = validate_certificate(&model, &cert, 1e-12);
        if !report.all_pass() {
            print!("{}", io::render_report("certificate", &report));
            eprintln!("error: certificate fails validation");
            return EXIT_QUANTITATIVE;
        }
        let mut ok = true;
        for t in [model.horizon() / 2.0, model.horizon()] {
            let rep =
                empirical_drift_check(&model, &cert, &pi, &psi, x0, t, args.paths, args.seed);
            print!("{}", io::render_drift_report(&rep));
            ok &= rep.moment_pass && rep.payoff_pass;
        }
        if !ok {
            eprintln!("error: drift check failed");
            return EXIT_QUANTITATIVE;
        }
    }
    EXIT_OK
}

fn cmd_matrix(input: &Path, tol: f64) -> i32 {
    let text = match fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", input.display());
            return EXIT_INPUT;
        }
    };
    let rows = match io::parse_matrix_csv(&text) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let matrix = match Matrix::from_rows(&rows) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    match solve_matrix_game(&matrix, tol) {
        Ok(sol) => {
            println!("value = {}", sol.value);
            println!(
                "maximizer = [{}]",
                sol.row_strategy
                    .iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            println!(
                "minimizer = [{}]",
                sol.col_strategy
                    .iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            println!("residual = {:e}", sol.residual);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
