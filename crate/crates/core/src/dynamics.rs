//! Ground truth around the value function: exact payoff evaluation for a
//! fixed pair of Markov policies, one-sided best responses, and stochastic
//! simulation of the jump process by thinning with Monte-Carlo payoff
//! estimation.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use libm::{exp, log, sqrt};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::SolveError;
use crate::model::{DriftCertificate, GameModel};
use crate::solver::{MarkovPolicy, Side};

/// Policy-averaged reward rate at interval `i`, state `x`.
fn averaged_reward(model: &GameModel, pi: &MarkovPolicy, psi: &MarkovPolicy, i: usize, x: usize) -> f64 {
    let k = model.partition().cell_of(pi.times[i]);
    let d = model.dynamics(k, x);
    let (lam, mu) = (&pi.strategy[i][x], &psi.strategy[i][x]);
    let mut r = 0.0;
    for a in 0..lam.len() {
        for b in 0..mu.len() {
            r += lam[a] * mu[b] * d.rewards[a][b];
        }
    }
    r
}

/// Policy-averaged rate vector at interval `i`, state `x`.
fn averaged_rates(
    model: &GameModel,
    pi: &MarkovPolicy,
    psi: &MarkovPolicy,
    i: usize,
    x: usize,
) -> Vec<f64> {
    let k = model.partition().cell_of(pi.times[i]);
    let d = model.dynamics(k, x);
    let (lam, mu) = (&pi.strategy[i][x], &psi.strategy[i][x]);
    let n = model.num_states();
    let mut q = vec![0.0; n];
    for a in 0..lam.len() {
        for b in 0..mu.len() {
            let w = lam[a] * mu[b];
            if w != 0.0 {
                for y in 0..n {
                    q[y] += w * d.rates[a][b][y];
                }
            }
        }
    }
    q
}

fn check_same_grid(pi: &MarkovPolicy, psi: &MarkovPolicy, times: &[f64]) -> Result<(), SolveError> {
    if pi.times != times || psi.times != times {
        return Err(SolveError::GridMismatch(String::from(
            "policies and evaluation grid must share the same time points",
        )));
    }
    if pi.side != Side::Maximizer || psi.side != Side::Minimizer {
        return Err(SolveError::GridMismatch(String::from(
            "expected (maximizer, minimizer) policy pair",
        )));
    }
    Ok(())
}

/// Exact expected payoff of a fixed Markov policy pair from each initial
/// state: backward RK4 on the linear Kolmogorov equation
/// `v' + rbar + sum_y v(y) qbar(y) = 0`, `v(T,·) = g`.
pub fn evaluate_payoff(
    model: &GameModel,
    pi: &MarkovPolicy,
    psi: &MarkovPolicy,
    times: &[f64],
) -> Result<Vec<f64>, SolveError> {
    check_same_grid(pi, psi, times)?;
    pi.validate(model)?;
    psi.validate(model)?;
    let n = times.len();
    let ns = model.num_states();
    let mut v = model.terminal().to_vec();
    for i in (0..n - 1).rev() {
        let h = times[i + 1] - times[i];
        let rbar: Vec<f64> = (0..ns).map(|x| averaged_reward(model, pi, psi, i, x)).collect();
        let qbar: Vec<Vec<f64>> = (0..ns).map(|x| averaged_rates(model, pi, psi, i, x)).collect();
        let f = |u: &[f64]| -> Vec<f64> {
            (0..ns)
                .map(|x| rbar[x] + qbar[x].iter().zip(u).map(|(&q, &w)| q * w).sum::<f64>())
                .collect()
        };
        v = rk4_step(&v, h, f);
    }
    Ok(v)
}

/// One backward RK4 step: the equation is autonomous on each grid interval.
fn rk4_step<F: Fn(&[f64]) -> Vec<f64>>(v: &[f64], h: f64, f: F) -> Vec<f64> {
    let k1 = f(v);
    let k2 = f(&axpy(v, &k1, 0.5 * h));
    let k3 = f(&axpy(v, &k2, 0.5 * h));
    let k4 = f(&axpy(v, &k3, h));
    (0..v.len())
        .map(|x| v[x] + h / 6.0 * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x]))
        .collect()
}

fn axpy(u: &[f64], k: &[f64], h: f64) -> Vec<f64> {
    u.iter().zip(k).map(|(&a, &b)| a + h * b).collect()
}

/// Optimal value and an attaining deterministic Markov policy for one player
/// against a fixed opponent policy. Pure actions suffice for one-sided
/// optimization over a finite set.
pub fn best_response(
    model: &GameModel,
    fixed: &MarkovPolicy,
    side_to_optimize: Side,
    times: &[f64],
) -> Result<(Vec<f64>, MarkovPolicy), SolveError> {
    if fixed.times != times {
        return Err(SolveError::GridMismatch(String::from(
            "fixed policy and grid must share the same time points",
        )));
    }
    if fixed.side == side_to_optimize {
        return Err(SolveError::GridMismatch(String::from(
            "fixed policy belongs to the optimizing side",
        )));
    }
    fixed.validate(model)?;
    let n = times.len();
    let ns = model.num_states();
    let mut v = model.terminal().to_vec();
    let mut strategy: Vec<Vec<Vec<f64>>> = vec![Vec::new(); n - 1];

    // Averaged stage value of pure action `own` against the fixed mixture.
    let stage = |i: usize, x: usize, own: usize, u: &[f64]| -> f64 {
        let k = model.partition().cell_of(times[i]);
        let d = model.dynamics(k, x);
        let mix = &fixed.strategy[i][x];
        let mut total = 0.0;
        for (other, &w) in mix.iter().enumerate() {
            if w != 0.0 {
                let (a, b) = match side_to_optimize {
                    Side::Maximizer => (own, other),
                    Side::Minimizer => (other, own),
                };
                let coupling: f64 = d.rates[a][b].iter().zip(u).map(|(&q, &uv)| q * uv).sum();
                total += w * (d.rewards[a][b] + coupling);
            }
        }
        total
    };
    let own_count = |i: usize, x: usize| -> usize {
        let k = model.partition().cell_of(times[i]);
        let d = model.dynamics(k, x);
        match side_to_optimize {
            Side::Maximizer => d.actions_max.len(),
            Side::Minimizer => d.actions_min.len(),
        }
    };

    for i in (0..n - 1).rev() {
        let h = times[i + 1] - times[i];
        let f = |u: &[f64]| -> Vec<f64> {
            (0..ns)
                .map(|x| {
                    let mut best = f64::NAN;
                    for own in 0..own_count(i, x) {
                        let s = stage(i, x, own, u);
                        best = if best.is_nan() {
                            s
                        } else {
                            match side_to_optimize {
                                Side::Maximizer => best.max(s),
                                Side::Minimizer => best.min(s),
                            }
                        };
                    }
                    best
                })
                .collect()
        };
        v = rk4_step(&v, h, f);
        // Attaining pure action at the interval's left endpoint; ties break
        // to the lowest index.
        strategy[i] = (0..ns)
            .map(|x| {
                let count = own_count(i, x);
                let mut best_a = 0;
                let mut best_v = stage(i, x, 0, &v);
                for own in 1..count {
                    let s = stage(i, x, own, &v);
                    let improves = match side_to_optimize {
                        Side::Maximizer => s > best_v,
                        Side::Minimizer => s < best_v,
                    };
                    if improves {
                        best_v = s;
                        best_a = own;
                    }
                }
                let mut p = vec![0.0; count];
                p[best_a] = 1.0;
                p
            })
            .collect();
    }
    let policy = MarkovPolicy {
        side: side_to_optimize,
        times: times.to_vec(),
        strategy,
    };
    Ok((v, policy))
}

/// One realized path of the jump process under a fixed policy pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub jump_times: Vec<f64>,
    /// Visited states, starting with the initial state.
    pub states: Vec<usize>,
    pub running_reward: f64,
    pub terminal_state: usize,
    pub terminal_reward: f64,
    /// `running_reward + terminal_reward`.
    pub payoff: f64,
}

/// Walk the process from `x0` until `t_end` by thinning: proposals at rate
/// `m(x)`, acceptance with probability (sampled exit rate)/`m(x)`. The
/// running reward integrates the policy-averaged rate exactly over each
/// holding interval, split at policy-grid boundaries.
fn simulate_until<R: Rng>(
    model: &GameModel,
    pi: &MarkovPolicy,
    psi: &MarkovPolicy,
    x0: usize,
    t_end: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<usize>, f64) {
    let mut t = 0.0f64;
    let mut x = x0;
    let mut jump_times = Vec::new();
    let mut states = vec![x0];
    let mut reward = 0.0f64;

    let accumulate = |from: f64, to: f64, x: usize, acc: &mut f64| {
        // r-bar is piecewise constant on policy intervals (which refine the
        // partition cells), so the integral splits exactly.
        let mut s = from;
        while s < to {
            let i = pi.interval_of(s);
            let seg_end = if i + 1 < pi.times.len() {
                pi.times[i + 1].min(to)
            } else {
                to
            };
            let seg_end = if seg_end <= s { to } else { seg_end };
            *acc += averaged_reward(model, pi, psi, i, x) * (seg_end - s);
            s = seg_end;
        }
    };

    loop {
        let m = model.uniformization_rate(x);
        let holding = -log(1.0 - rng.gen::<f64>()) / m;
        let proposal = t + holding;
        if proposal >= t_end {
            accumulate(t, t_end, x, &mut reward);
            break;
        }
        accumulate(t, proposal, x, &mut reward);
        t = proposal;
        let i = pi.interval_of(t);
        let k = model.partition().cell_of(t);
        let a = sample_index(&pi.strategy[i][x], rng);
        let b = sample_index(&psi.strategy[i][x], rng);
        let d = model.dynamics(k, x);
        let exit = -d.rates[a][b][x];
        if exit > 0.0 && rng.gen::<f64>() * m < exit {
            // Accepted: move according to the off-diagonal rates.
            let row = &d.rates[a][b];
            let mut u = rng.gen::<f64>() * exit;
            let mut next = x;
            for (y, &qv) in row.iter().enumerate() {
                if y != x && qv > 0.0 {
                    if u < qv {
                        next = y;
                        break;
                    }
                    u -= qv;
                }
            }
            x = next;
            jump_times.push(t);
            states.push(x);
        }
    }
    (jump_times, states, reward)
}

fn sample_index<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let mut u = rng.gen::<f64>();
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Simulate one full-horizon path; deterministic given `(seed, path_index)`.
pub fn simulate_path(
    model: &GameModel,
    pi: &MarkovPolicy,
    psi: &MarkovPolicy,
    x0: usize,
    seed: u64,
    path_index: u64,
) -> Trajectory {
    let mut rng = path_rng(seed, path_index);
    let horizon = model.horizon();
    let (jump_times, states, running_reward) =
        simulate_until(model, pi, psi, x0, horizon, &mut rng);
    let terminal_state = *states.last().unwrap();
    let terminal_reward = model.terminal()[terminal_state];
    Trajectory {
        jump_times,
        states,
        running_reward,
        terminal_state,
        terminal_reward,
        payoff: running_reward + terminal_reward,
    }
}

/// Monte-Carlo payoff estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub paths: u64,
    pub seed: u64,
}

/// Sample mean and standard error from per-path payoffs, accumulated in
/// path-index order so the result does not depend on execution order.
pub fn estimate_from_samples(samples: &[f64], seed: u64) -> PayoffEstimate {
    let n = samples.len() as f64;
    // Identical samples get mean and variance exactly, without rounding from
    // the division.
    if samples.windows(2).all(|w| w[0] == w[1]) {
        return PayoffEstimate {
            mean: samples[0],
            std_error: 0.0,
            paths: samples.len() as u64,
            seed,
        };
    }
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|&s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    PayoffEstimate {
        mean,
        std_error: sqrt(var / n),
        paths: samples.len() as u64,
        seed,
    }
}

/// Estimate the expected payoff from `x0` by averaging simulated paths.
/// Per-path streams are derived from `(seed, path index)`, so the estimate
/// is a pure function of its arguments.
pub fn monte_carlo(
    model: &GameModel,
    pi: &MarkovPolicy,
    psi: &MarkovPolicy,
    x0: usize,
    paths: u64,
    seed: u64,
) -> PayoffEstimate {
    let samples: Vec<f64> = (0..paths)
        .map(|i| simulate_path(model, pi, psi, x0, seed, i).payoff)
        .collect();
    estimate_from_samples(&samples, seed)
}

/// Result of the empirical moment / payoff bound checks.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftCheckReport {
    pub t: f64,
    /// Sample mean of `w0(state at t)`.
    pub mean_w0: f64,
    pub std_error: f64,
    /// `e^{c0 t} w0(x0)`.
    pub moment_bound: f64,
    pub moment_pass: bool,
    pub max_jumps: usize,
    /// `(T+1) M0 e^{c0 T} w0(x0)`.
    pub payoff_bound: f64,
    pub max_abs_payoff: f64,
    pub payoff_pass: bool,
}

/// Check the certified moment bound `E[w0(state at t)] <= e^{c0 t} w0(x0)`
/// against simulation, and the a-priori payoff bound along full paths.
pub fn empirical_drift_check(
    model: &GameModel,
    cert: &DriftCertificate,
    pi: &MarkovPolicy,
    psi: &MarkovPolicy,
    x0: usize,
    t: f64,
    paths: u64,
    seed: u64,
) -> DriftCheckReport {
    let mut w0_samples = Vec::with_capacity(paths as usize);
    let mut max_jumps = 0usize;
    let mut max_abs_payoff = 0.0f64;
    for i in 0..paths {
        let mut rng = path_rng(seed, i);
        let (jumps, states, _) = simulate_until(model, pi, psi, x0, t, &mut rng);
        w0_samples.push(cert.w0[*states.last().unwrap()]);
        max_jumps = max_jumps.max(jumps.len());
        let traj = simulate_path(model, pi, psi, x0, seed.wrapping_add(0x9e37_79b9_7f4a_7c15), i);
        max_jumps = max_jumps.max(traj.jump_times.len());
        max_abs_payoff = max_abs_payoff.max(traj.payoff.abs());
    }
    let est = estimate_from_samples(&w0_samples, seed);
    let moment_bound = exp(cert.c0 * t) * cert.w0[x0];
    let horizon = model.horizon();
    let payoff_bound = (horizon + 1.0) * cert.m0 * exp(cert.c0 * horizon) * cert.w0[x0];
    DriftCheckReport {
        t,
        mean_w0: est.mean,
        std_error: est.std_error,
        moment_bound,
        moment_pass: est.mean <= moment_bound + 4.0 * est.std_error,
        max_jumps,
        payoff_bound,
        max_abs_payoff,
        payoff_pass: max_abs_payoff <= payoff_bound,
    }
}
