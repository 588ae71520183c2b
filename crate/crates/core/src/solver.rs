//! Value-function computation: the uniformized fixed-point operator and its
//! monotone iteration, an independent backward Isaacs ODE integrator, and
//! extraction of optimal Markov policies from a solved value grid.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use libm::exp;

use crate::error::SolveError;
use crate::matrix_game::{check_saddle, solve_matrix_game, Matrix};
use crate::model::{uniformized_kernel, DriftCertificate, GameModel};

/// Value function sampled on a time grid, piecewise linear in `t` per state.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueGrid {
    /// Strictly increasing times `0 = t_0 < ... < t_N = T`, containing every
    /// cell boundary of the model partition.
    pub times: Vec<f64>,
    /// `values[i][x]`.
    pub values: Vec<Vec<f64>>,
}

impl ValueGrid {
    pub fn constant(times: Vec<f64>, num_states: usize, v: f64) -> Self {
        let values = vec![vec![v; num_states]; times.len()];
        Self { times, values }
    }

    pub fn num_points(&self) -> usize {
        self.times.len()
    }

    /// Piecewise-linear interpolation in time for state `x`.
    pub fn interpolate(&self, t: f64, x: usize) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0][x];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1][x];
        }
        let i = match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(i) => return self.values[i][x],
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = (t - t0) / (t1 - t0);
        self.values[i][x] * (1.0 - w) + self.values[i + 1][x] * w
    }

    /// Largest absolute difference to another grid on identical times.
    pub fn sup_distance(&self, other: &ValueGrid) -> f64 {
        let mut d = 0.0f64;
        for (row_a, row_b) in self.values.iter().zip(&other.values) {
            for (&a, &b) in row_a.iter().zip(row_b) {
                d = d.max((a - b).abs());
            }
        }
        d
    }
}

/// Build a solver grid with roughly `n` intervals in total: uniform within
/// each partition cell, intervals apportioned by cell length, every cell
/// boundary included.
pub fn build_grid(model: &GameModel, n: usize) -> Vec<f64> {
    let bounds = model.partition().boundaries();
    let horizon = model.horizon();
    let n = n.max(bounds.len() - 1);
    let mut times = Vec::with_capacity(n + bounds.len());
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let steps = (((hi - lo) / horizon * n as f64).round() as usize).max(1);
        for s in 0..steps {
            times.push(lo + (hi - lo) * s as f64 / steps as f64);
        }
    }
    times.push(horizon);
    times
}

/// Which bilinear stage payoff to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageForm {
    /// `r + m(x) * sum_y u(t,y) ptilde[y]` — the operator-G integrand.
    Uniformized,
    /// `r + sum_y u(t,y) q[y]` — the Isaacs-equation integrand.
    Generator,
}

/// Payoff matrix of the stage game at `(t, x)` against the value slice
/// `u(t, ·)`; rows are maximizer actions, columns minimizer actions.
pub fn stage_matrix(
    model: &GameModel,
    u: &ValueGrid,
    t: f64,
    x: usize,
    form: StageForm,
) -> Result<Matrix, SolveError> {
    if t < 0.0 || t > model.horizon() {
        return Err(SolveError::TimeOutOfRange {
            t,
            horizon: model.horizon(),
        });
    }
    let k = model.partition().cell_of(t);
    let slice: Vec<f64> = (0..model.num_states())
        .map(|y| u.interpolate(t, y))
        .collect();
    Ok(stage_matrix_with_slice(model, &slice, k, x, form))
}

/// Stage matrix from an explicit value slice `u_slice[y] = u(t, y)` for a
/// known cell. Used by the solvers, where the slice is the ODE unknown.
pub fn stage_matrix_with_slice(
    model: &GameModel,
    u_slice: &[f64],
    k: usize,
    x: usize,
    form: StageForm,
) -> Matrix {
    let d = model.dynamics(k, x);
    let (p, q) = (d.actions_max.len(), d.actions_min.len());
    let mut out = Matrix::zeros(p, q);
    for a in 0..p {
        for b in 0..q {
            let coupling = match form {
                StageForm::Uniformized => {
                    let m = model.uniformization_rate(x);
                    let kernel = uniformized_kernel(model, k, x, a, b);
                    m * kernel
                        .iter()
                        .zip(u_slice)
                        .map(|(&pk, &uv)| pk * uv)
                        .sum::<f64>()
                }
                StageForm::Generator => d.rates[a][b]
                    .iter()
                    .zip(u_slice)
                    .map(|(&qv, &uv)| qv * uv)
                    .sum::<f64>(),
            };
            out.set(a, b, d.rewards[a][b] + coupling);
        }
    }
    out
}

/// Explicit majorant seed for the monotone iteration:
/// `u0(t,x) = (M0/c0) * (c0 e^{c0(T-t)} + e^{c0(T-t)} - 1) * w0(x)`.
pub fn seed_u0(model: &GameModel, cert: &DriftCertificate, times: &[f64]) -> ValueGrid {
    let horizon = model.horizon();
    let values = times
        .iter()
        .map(|&t| {
            let e = exp(cert.c0 * (horizon - t));
            let scale = cert.m0 / cert.c0 * (cert.c0 * e + e - 1.0);
            cert.w0.iter().map(|&w| scale * w).collect()
        })
        .collect();
    ValueGrid {
        times: times.to_vec(),
        values,
    }
}

/// One application of the uniformized fixed-point operator:
/// `G[u](t,x) = e^{-m(x)(T-t)} g(x) + ∫_0^{T-t} e^{-m(x)s} val(stage(t+s,x)) ds`,
/// with the integral taken by composite trapezoid over the grid nodes.
pub fn apply_g(model: &GameModel, u: &ValueGrid, matrix_tol: f64) -> Result<ValueGrid, SolveError> {
    let times = &u.times;
    let n = times.len();
    let ns = model.num_states();
    let mut values = vec![vec![0.0f64; ns]; n];
    for x in 0..ns {
        let m = model.uniformization_rate(x);
        // Stage values at grid nodes do not depend on the outer time t, so
        // they are solved once per sweep.
        let mut vals = Vec::with_capacity(n);
        for (i, &t) in times.iter().enumerate() {
            let k = model.partition().cell_of(t);
            let game = stage_matrix_with_slice(model, &u.values[i], k, x, StageForm::Uniformized);
            vals.push(solve_matrix_game(&game, matrix_tol)?.value);
        }
        // Backward recursion for I_i = ∫_{t_i}^{T} e^{-m (τ - t_i)} val(τ) dτ:
        // every factor stays <= 1, so the accumulation is stable for any m.
        let mut integral = 0.0f64;
        values[n - 1][x] = model.terminal()[x];
        for i in (0..n - 1).rev() {
            let h = times[i + 1] - times[i];
            let decay = exp(-m * h);
            integral = 0.5 * h * (vals[i] + decay * vals[i + 1]) + decay * integral;
            values[i][x] = exp(-m * (times[n - 1] - times[i])) * model.terminal()[x] + integral;
        }
    }
    Ok(ValueGrid {
        times: times.clone(),
        values,
    })
}

/// Convergence record of the monotone iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    /// Sup-norm distance between successive iterates.
    pub deltas: Vec<f64>,
    /// Max over all iterations and grid points of `(u_{n+1} - u_n)_+`.
    pub monotonicity_violation: f64,
    /// Max over all iterations and grid points of `|u_n| - u_0`.
    pub envelope_violation: f64,
    /// `sup |G[u_final] - u_final|`.
    pub fixed_point_residual: f64,
}

/// Failure modes of [`value_iterate`]; the iteration-budget case carries the
/// last iterate and its diagnostics so partial results can still be written.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueIterationError {
    Inner(SolveError),
    NotConverged {
        partial: ValueGrid,
        diagnostics: SolveDiagnostics,
    },
}

impl core::fmt::Display for ValueIterationError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ValueIterationError::Inner(e) => write!(f, "{e}"),
            ValueIterationError::NotConverged { diagnostics, .. } => write!(
                f,
                "value iteration did not converge after {} iterations (last delta {:e})",
                diagnostics.iterations,
                diagnostics.deltas.last().copied().unwrap_or(f64::NAN)
            ),
        }
    }
}

impl From<SolveError> for ValueIterationError {
    fn from(e: SolveError) -> Self {
        ValueIterationError::Inner(e)
    }
}

/// Iterate `u_{n+1} = G[u_n]` from the explicit seed until the sup-norm of
/// successive differences drops below `tol`.
pub fn value_iterate(
    model: &GameModel,
    cert: &DriftCertificate,
    times: &[f64],
    tol: f64,
    matrix_tol: f64,
    max_iter: usize,
) -> Result<(ValueGrid, SolveDiagnostics), ValueIterationError> {
    let seed = seed_u0(model, cert, times);
    let mut u = seed.clone();
    let mut deltas = Vec::new();
    let mut mono_violation = 0.0f64;
    let mut env_violation = 0.0f64;
    let mut converged = false;
    while deltas.len() < max_iter {
        let next = apply_g(model, &u, matrix_tol)?;
        let mut delta = 0.0f64;
        for i in 0..times.len() {
            for x in 0..model.num_states() {
                let d = next.values[i][x] - u.values[i][x];
                delta = delta.max(d.abs());
                mono_violation = mono_violation.max(d);
                env_violation = env_violation.max(next.values[i][x].abs() - seed.values[i][x]);
            }
        }
        deltas.push(delta);
        u = next;
        if delta <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        let iterations = deltas.len();
        return Err(ValueIterationError::NotConverged {
            partial: u,
            diagnostics: SolveDiagnostics {
                iterations,
                deltas,
                monotonicity_violation: mono_violation,
                envelope_violation: env_violation,
                fixed_point_residual: f64::NAN,
            },
        });
    }
    let fixed_point_residual = apply_g(model, &u, matrix_tol)?.sup_distance(&u);
    let diagnostics = SolveDiagnostics {
        iterations: deltas.len(),
        deltas,
        monotonicity_violation: mono_violation,
        envelope_violation: env_violation,
        fixed_point_residual,
    };
    Ok((u, diagnostics))
}

/// Backward integration of the Isaacs equation
/// `u'(t,x) + val(r + Σ_y u(t,y) q(y|t,x,·,·)) = 0`, `u(T,·) = g`, by
/// classical RK4 with steps aligned to the grid. Rates are constant within a
/// partition cell, so the right-hand side is autonomous on each step and
/// steps never straddle a cell boundary.
pub fn isaacs_backward(
    model: &GameModel,
    times: &[f64],
    matrix_tol: f64,
) -> Result<ValueGrid, SolveError> {
    let n = times.len();
    let ns = model.num_states();
    let mut values = vec![vec![0.0f64; ns]; n];
    values[n - 1] = model.terminal().to_vec();
    let rhs = |k: usize, u_slice: &[f64]| -> Result<Vec<f64>, SolveError> {
        let mut out = Vec::with_capacity(ns);
        for x in 0..ns {
            let game = stage_matrix_with_slice(model, u_slice, k, x, StageForm::Generator);
            out.push(solve_matrix_game(&game, matrix_tol)?.value);
        }
        Ok(out)
    };
    for i in (0..n - 1).rev() {
        let h = times[i + 1] - times[i];
        // Going backward in t, du/d(-t) = +val(stage).
        let k = model.partition().cell_of(0.5 * (times[i] + times[i + 1]));
        let u1 = &values[i + 1];
        let k1 = rhs(k, u1)?;
        let k2 = rhs(k, &axpy(u1, &k1, 0.5 * h))?;
        let k3 = rhs(k, &axpy(u1, &k2, 0.5 * h))?;
        let k4 = rhs(k, &axpy(u1, &k3, h))?;
        values[i] = (0..ns)
            .map(|x| u1[x] + h / 6.0 * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x]))
            .collect();
    }
    Ok(ValueGrid {
        times: times.to_vec(),
        values,
    })
}

fn axpy(u: &[f64], k: &[f64], h: f64) -> Vec<f64> {
    u.iter().zip(k).map(|(&a, &b)| a + h * b).collect()
}

/// Which player a policy belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Maximizer,
    Minimizer,
}

/// A mixed Markov policy, piecewise constant on the grid intervals
/// `[t_i, t_{i+1})` using the left endpoint's stage saddle.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovPolicy {
    pub side: Side,
    /// Grid of `N+1` points; `strategy` has `N` interval entries.
    pub times: Vec<f64>,
    /// `strategy[i][x]`: probability vector over the admissible action list
    /// of the owning player at (cell of `t_i`, `x`).
    pub strategy: Vec<Vec<Vec<f64>>>,
}

impl MarkovPolicy {
    /// Interval index whose policy applies at time `t` (left-closed; `t >= T`
    /// maps to the last interval).
    pub fn interval_of(&self, t: f64) -> usize {
        let n = self.times.len() - 1;
        if t <= self.times[0] {
            return 0;
        }
        if t >= self.times[n] {
            return n - 1;
        }
        match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.min(n - 1),
            Err(i) => i - 1,
        }
    }

    /// Check probability-vector invariants against the model's action lists.
    pub fn validate(&self, model: &GameModel) -> Result<(), SolveError> {
        let n = self.times.len() - 1;
        if self.strategy.len() != n {
            return Err(SolveError::GridMismatch(String::from(
                "strategy count != interval count",
            )));
        }
        for i in 0..n {
            let k = model.partition().cell_of(self.times[i]);
            for x in 0..model.num_states() {
                let d = model.dynamics(k, x);
                let len = match self.side {
                    Side::Maximizer => d.actions_max.len(),
                    Side::Minimizer => d.actions_min.len(),
                };
                let s = &self.strategy[i][x];
                if s.len() != len {
                    return Err(SolveError::GridMismatch(String::from(
                        "strategy support does not match admissible actions",
                    )));
                }
                let sum: f64 = s.iter().sum();
                if s.iter().any(|&p| p < -1e-10) || (sum - 1.0).abs() > 1e-10 {
                    return Err(SolveError::GridMismatch(String::from(
                        "strategy is not a probability vector",
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Solve the generator-form stage games along the grid and collect both
/// players' optimal mixed strategies.
pub fn extract_policies(
    model: &GameModel,
    u: &ValueGrid,
    matrix_tol: f64,
) -> Result<(MarkovPolicy, MarkovPolicy), SolveError> {
    let n = u.times.len() - 1;
    let ns = model.num_states();
    let mut strat_max = Vec::with_capacity(n);
    let mut strat_min = Vec::with_capacity(n);
    for i in 0..n {
        let k = model.partition().cell_of(u.times[i]);
        let mut row_max = Vec::with_capacity(ns);
        let mut row_min = Vec::with_capacity(ns);
        for x in 0..ns {
            let game = stage_matrix_with_slice(model, &u.values[i], k, x, StageForm::Generator);
            let sol = solve_matrix_game(&game, matrix_tol)?;
            row_max.push(sol.row_strategy);
            row_min.push(sol.col_strategy);
        }
        strat_max.push(row_max);
        strat_min.push(row_min);
    }
    Ok((
        MarkovPolicy {
            side: Side::Maximizer,
            times: u.times.clone(),
            strategy: strat_max,
        },
        MarkovPolicy {
            side: Side::Minimizer,
            times: u.times.clone(),
            strategy: strat_min,
        },
    ))
}

/// Worst stage-saddle residual of a policy pair along a solved grid.
pub fn policy_saddle_residual(
    model: &GameModel,
    u: &ValueGrid,
    pi: &MarkovPolicy,
    psi: &MarkovPolicy,
) -> Result<f64, SolveError> {
    let n = u.times.len() - 1;
    let mut worst = 0.0f64;
    for i in 0..n {
        let k = model.partition().cell_of(u.times[i]);
        for x in 0..model.num_states() {
            let game = stage_matrix_with_slice(model, &u.values[i], k, x, StageForm::Generator);
            let r = check_saddle(&game, &pi.strategy[i][x], &psi.strategy[i][x])?;
            worst = worst.max(r);
        }
    }
    Ok(worst)
}
