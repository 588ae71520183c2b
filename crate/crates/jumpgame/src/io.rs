//! Textual output formats: validation reports, value CSV, policy files,
//! diagnostics, trajectory dumps, and the diagnostic matrix-game input.
//!
//! All outputs are UTF-8, newline-terminated, with stable ordering, so two
//! runs with identical inputs produce byte-identical files.

use jumpgame_core::{
    DriftCheckReport, GameModel, MarkovPolicy, PayoffEstimate, Side, SolveDiagnostics, SolveError,
    Trajectory, ValidationReport, ValueGrid,
};
use std::fmt::Write as _;

/// Render a validation report, one line per check, in check order.
pub fn render_report(title: &str, report: &ValidationReport) -> String {
    let mut out = String::new();
    writeln!(out, "[{title}]").unwrap();
    for e in &report.entries {
        if e.pass {
            writeln!(out, "{}: pass", e.id).unwrap();
        } else {
            writeln!(out, "{}: FAIL violation={:e} at {}", e.id, e.violation, e.location).unwrap();
        }
    }
    out
}

/// Value function as CSV with header `t,state,value`.
pub fn render_values(model: &GameModel, u: &ValueGrid) -> String {
    let mut out = String::from("t,state,value\n");
    for (i, &t) in u.times.iter().enumerate() {
        for (x, s) in model.states().iter().enumerate() {
            writeln!(out, "{t},{s},{}", u.values[i][x]).unwrap();
        }
    }
    out
}

/// Policy file: CSV with header `index,time,state,action,prob`, one row per
/// (interval, state, action) with every probability written out.
pub fn render_policy(model: &GameModel, policy: &MarkovPolicy) -> String {
    let mut out = String::from("index,time,state,action,prob\n");
    for (i, strat) in policy.strategy.iter().enumerate() {
        let t = policy.times[i];
        let k = model.partition().cell_of(t);
        for (x, probs) in strat.iter().enumerate() {
            let d = model.dynamics(k, x);
            let labels = match policy.side {
                Side::Maximizer => &d.actions_max,
                Side::Minimizer => &d.actions_min,
            };
            for (a, &p) in probs.iter().enumerate() {
                writeln!(out, "{i},{t},{},{},{p}", model.states()[x], labels[a]).unwrap();
            }
        }
    }
    out
}

/// Parse a policy file back into a [`MarkovPolicy`] on the model's grid.
pub fn parse_policy(model: &GameModel, side: Side, text: &str) -> Result<MarkovPolicy, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some("index,time,state,action,prob") => {}
        _ => return Err("policy file missing header `index,time,state,action,prob`".into()),
    }
    let mut times: Vec<f64> = Vec::new();
    let mut strategy: Vec<Vec<Vec<f64>>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(format!("policy line {}: expected 5 fields", lineno + 2));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| format!("policy line {}: bad index", lineno + 2))?;
        let t: f64 = fields[1]
            .parse()
            .map_err(|_| format!("policy line {}: bad time", lineno + 2))?;
        let x = model
            .state_index(fields[2])
            .ok_or_else(|| format!("policy line {}: unknown state `{}`", lineno + 2, fields[2]))?;
        let p: f64 = fields[4]
            .parse()
            .map_err(|_| format!("policy line {}: bad probability", lineno + 2))?;
        if i >= strategy.len() {
            times.resize(i + 1, f64::NAN);
            strategy.resize(i + 1, Vec::new());
        }
        times[i] = t;
        let k = model.partition().cell_of(t);
        let d = model.dynamics(k, x);
        let labels = match side {
            Side::Maximizer => &d.actions_max,
            Side::Minimizer => &d.actions_min,
        };
        let a = labels
            .iter()
            .position(|l| l == fields[3])
            .ok_or_else(|| format!("policy line {}: unknown action `{}`", lineno + 2, fields[3]))?;
        if strategy[i].is_empty() {
            strategy[i] = (0..model.num_states())
                .map(|y| {
                    let dy = model.dynamics(k, y);
                    let len = match side {
                        Side::Maximizer => dy.actions_max.len(),
                        Side::Minimizer => dy.actions_min.len(),
                    };
                    vec![0.0; len]
                })
                .collect();
        }
        strategy[i][x][a] = p;
    }
    if strategy.is_empty() {
        return Err("policy file has no interval rows".into());
    }
    if times.iter().any(|t| t.is_nan()) {
        return Err("policy file skips interval indices".into());
    }
    times.push(model.horizon());
    let policy = MarkovPolicy {
        side,
        times,
        strategy,
    };
    policy
        .validate(model)
        .map_err(|e: SolveError| format!("policy file invalid: {e}"))?;
    Ok(policy)
}

/// Iteration diagnostics as structured text.
pub fn render_diagnostics(diag: &SolveDiagnostics, agreement_gap: Option<f64>) -> String {
    let mut out = String::new();
    writeln!(out, "iterations: {}", diag.iterations).unwrap();
    writeln!(out, "monotonicity_violation: {:e}", diag.monotonicity_violation).unwrap();
    writeln!(out, "envelope_violation: {:e}", diag.envelope_violation).unwrap();
    writeln!(out, "fixed_point_residual: {:e}", diag.fixed_point_residual).unwrap();
    if let Some(gap) = agreement_gap {
        writeln!(out, "solver_agreement_gap: {gap:e}").unwrap();
    }
    writeln!(out, "deltas:").unwrap();
    for (n, d) in diag.deltas.iter().enumerate() {
        writeln!(out, "  {n}: {d:e}").unwrap();
    }
    out
}

pub fn render_estimate(est: &PayoffEstimate, x0: &str) -> String {
    format!(
        "initial_state: {x0}\nmean: {}\nstd_error: {}\npaths: {}\nseed: {}\n",
        est.mean, est.std_error, est.paths, est.seed
    )
}

pub fn render_drift_report(rep: &DriftCheckReport) -> String {
    let mut out = String::new();
    writeln!(out, "[drift check at t={}]", rep.t).unwrap();
    writeln!(out, "mean_w0: {}", rep.mean_w0).unwrap();
    writeln!(out, "std_error: {}", rep.std_error).unwrap();
    writeln!(out, "moment_bound: {}", rep.moment_bound).unwrap();
    writeln!(out, "moment: {}", if rep.moment_pass { "pass" } else { "FAIL" }).unwrap();
    writeln!(out, "max_jumps: {}", rep.max_jumps).unwrap();
    writeln!(out, "max_abs_payoff: {}", rep.max_abs_payoff).unwrap();
    writeln!(out, "payoff_bound: {}", rep.payoff_bound).unwrap();
    writeln!(out, "payoff: {}", if rep.payoff_pass { "pass" } else { "FAIL" }).unwrap();
    out
}

/// Trajectory dump: CSV `path_id,jump_index,time,state`; jump index 0 is the
/// initial state at time 0.
pub fn render_trajectories(model: &GameModel, trajectories: &[Trajectory]) -> String {
    let mut out = String::from("path_id,jump_index,time,state\n");
    for (p, traj) in trajectories.iter().enumerate() {
        writeln!(out, "{p},0,0,{}", model.states()[traj.states[0]]).unwrap();
        for (j, (&t, &x)) in traj.jump_times.iter().zip(&traj.states[1..]).enumerate() {
            writeln!(out, "{p},{},{t},{}", j + 1, model.states()[x]).unwrap();
        }
    }
    out
}

/// Parse a plain CSV matrix of reals (rows of comma-separated entries).
pub fn parse_matrix_csv(text: &str) -> Result<Vec<Vec<f64>>, String> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|_| format!("matrix line {}: bad entry", lineno + 1))?);
    }
    if rows.is_empty() {
        return Err("empty matrix".into());
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_model;
    use jumpgame_core::{build_grid, extract_policies, isaacs_backward};

    fn stage_game_model() -> GameModel {
        let text = r#"{
            "horizon": 1.0,
            "states": ["s"],
            "dynamics": [
                { "s": { "actions_max": ["a0", "a1"], "actions_min": ["b0", "b1"],
                         "q": [[[0.0],[0.0]],[[0.0],[0.0]]],
                         "r": [[3.0, 1.0],[0.0, 2.0]] } }
            ],
            "terminal": { "s": 0.0 }
        }"#;
        parse_model(text).unwrap().0
    }

    #[test]
    fn policy_round_trip() {
        let model = stage_game_model();
        let grid = build_grid(&model, 8);
        let u = isaacs_backward(&model, &grid, 1e-9).unwrap();
        let (pi, psi) = extract_policies(&model, &u, 1e-9).unwrap();
        for pol in [&pi, &psi] {
            let text = render_policy(&model, pol);
            let back = parse_policy(&model, pol.side, &text).unwrap();
            assert_eq!(back.times.len(), pol.times.len());
            for i in 0..pol.strategy.len() {
                for x in 0..model.num_states() {
                    for (a, &p) in pol.strategy[i][x].iter().enumerate() {
                        assert!((back.strategy[i][x][a] - p).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn policy_rejects_unknown_action() {
        let model = stage_game_model();
        let text = "index,time,state,action,prob\n0,0,s,zz,1.0\n";
        let err = parse_policy(&model, Side::Maximizer, text).unwrap_err();
        assert!(err.contains("unknown action"));
    }

    #[test]
    fn values_csv_shape() {
        let model = stage_game_model();
        let grid = build_grid(&model, 4);
        let u = isaacs_backward(&model, &grid, 1e-9).unwrap();
        let csv = render_values(&model, &u);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,state,value"));
        assert_eq!(csv.lines().count(), 1 + grid.len());
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn matrix_csv_parses() {
        let rows = parse_matrix_csv("3, 1\n0, 2\n").unwrap();
        assert_eq!(rows, vec![vec![3.0, 1.0], vec![0.0, 2.0]]);
        assert!(parse_matrix_csv("a,b\n").is_err());
    }
}
