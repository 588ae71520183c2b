//! Game instances: finite state space, per-cell action sets, transition
//! rates, rewards, terminal payoff, and the drift-condition machinery.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::ModelError;

/// Tolerance used for row-sum (conservativeness) and stochasticity checks.
pub const RATE_TOL: f64 = 1e-12;

/// Floor for the defaulted uniformization rate when a state has zero exit rate.
pub const MIN_UNIFORMIZATION_RATE: f64 = 1e-9;

/// A partition of `[0, T]` into half-open cells on which the model data is
/// constant in time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePartition {
    boundaries: Vec<f64>,
}

impl TimePartition {
    /// Single cell `[0, horizon]`.
    pub fn single(horizon: f64) -> Result<Self, ModelError> {
        Self::new(vec![0.0, horizon])
    }

    /// Build from boundaries `0 = b_0 < b_1 < ... < b_K = T`.
    pub fn new(boundaries: Vec<f64>) -> Result<Self, ModelError> {
        if boundaries.len() < 2 {
            return Err(ModelError::BadPartition(
                "need at least two boundaries".into(),
            ));
        }
        if boundaries[0] != 0.0 {
            return Err(ModelError::BadPartition("first boundary must be 0".into()));
        }
        for w in boundaries.windows(2) {
            if !(w[1] > w[0]) {
                return Err(ModelError::BadPartition(
                    "boundaries must be strictly increasing".into(),
                ));
            }
        }
        let horizon = *boundaries.last().unwrap();
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(ModelError::NonpositiveHorizon(horizon));
        }
        Ok(Self { boundaries })
    }

    pub fn horizon(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    pub fn num_cells(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Cell index containing `t`, with left-closed cells `[b_k, b_{k+1})`;
    /// `t >= T` maps to the last cell.
    pub fn cell_of(&self, t: f64) -> usize {
        let k = self.num_cells();
        for i in 0..k {
            if t < self.boundaries[i + 1] {
                return i;
            }
        }
        k - 1
    }
}

/// Action-dependent data for one (cell, state) pair. Rates and rewards are
/// indexed `[a][b]`, with the rate entry a signed vector over all states.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDynamics {
    pub actions_max: Vec<String>,
    pub actions_min: Vec<String>,
    /// `rates[a][b][y]`, units 1/time; row over `y` sums to zero.
    pub rates: Vec<Vec<Vec<f64>>>,
    /// `rewards[a][b]`, units payoff/time.
    pub rewards: Vec<Vec<f64>>,
}

/// A finite, piecewise-time-constant zero-sum jump game instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GameModel {
    states: Vec<String>,
    partition: TimePartition,
    /// `cells[k][x]`.
    cells: Vec<Vec<CellDynamics>>,
    terminal: Vec<f64>,
    /// Uniformization rate per state, `m[x] >= q_x`.
    m: Vec<f64>,
    /// Whether `m` was supplied by the user (false: defaulted to `max(q_x, floor)`).
    m_explicit: bool,
}

impl GameModel {
    /// Assemble a model, checking structural consistency only (dimensions,
    /// references); quantitative checks live in [`validate_model`].
    ///
    /// When `m` is absent it defaults to `max(q_x, 1e-9)` per state.
    pub fn new(
        states: Vec<String>,
        partition: TimePartition,
        cells: Vec<Vec<CellDynamics>>,
        terminal: Vec<f64>,
        m: Option<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let n = states.len();
        if n == 0 {
            return Err(ModelError::Structural("empty state set".into()));
        }
        if cells.len() != partition.num_cells() {
            return Err(ModelError::DimensionMismatch(format!(
                "dynamics has {} cell blocks, partition has {} cells",
                cells.len(),
                partition.num_cells()
            )));
        }
        for (k, cell) in cells.iter().enumerate() {
            if cell.len() != n {
                return Err(ModelError::DimensionMismatch(format!(
                    "cell {k} covers {} states, model has {n}",
                    cell.len()
                )));
            }
            for (x, dyn_) in cell.iter().enumerate() {
                let (p, q) = (dyn_.actions_max.len(), dyn_.actions_min.len());
                if p == 0 || q == 0 {
                    return Err(ModelError::Structural(format!(
                        "empty action list at cell {k}, state {}",
                        states[x]
                    )));
                }
                if dyn_.rates.len() != p || dyn_.rewards.len() != p {
                    return Err(ModelError::DimensionMismatch(format!(
                        "rate/reward row count mismatch at cell {k}, state {}",
                        states[x]
                    )));
                }
                for a in 0..p {
                    if dyn_.rates[a].len() != q || dyn_.rewards[a].len() != q {
                        return Err(ModelError::DimensionMismatch(format!(
                            "rate/reward column count mismatch at cell {k}, state {}, row {a}",
                            states[x]
                        )));
                    }
                    for b in 0..q {
                        if dyn_.rates[a][b].len() != n {
                            return Err(ModelError::DimensionMismatch(format!(
                                "rate vector length {} != {n} at cell {k}, state {}, ({a},{b})",
                                dyn_.rates[a][b].len(),
                                states[x]
                            )));
                        }
                    }
                }
            }
        }
        if terminal.len() != n {
            return Err(ModelError::DimensionMismatch(format!(
                "terminal payoff has {} entries, model has {n} states",
                terminal.len()
            )));
        }
        if let Some(ref mv) = m {
            if mv.len() != n {
                return Err(ModelError::DimensionMismatch(format!(
                    "uniformization rate has {} entries, model has {n} states",
                    mv.len()
                )));
            }
        }
        let m_explicit = m.is_some();
        let mut model = Self {
            states,
            partition,
            cells,
            terminal,
            m: m.unwrap_or_default(),
            m_explicit,
        };
        if !m_explicit {
            model.m = (0..n)
                .map(|x| model.exit_rate_bound(x).max(MIN_UNIFORMIZATION_RATE))
                .collect();
        }
        Ok(model)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    pub fn partition(&self) -> &TimePartition {
        &self.partition
    }

    pub fn horizon(&self) -> f64 {
        self.partition.horizon()
    }

    pub fn dynamics(&self, k: usize, x: usize) -> &CellDynamics {
        &self.cells[k][x]
    }

    pub fn terminal(&self) -> &[f64] {
        &self.terminal
    }

    pub fn uniformization_rate(&self, x: usize) -> f64 {
        self.m[x]
    }

    pub fn uniformization_rates(&self) -> &[f64] {
        &self.m
    }

    pub fn m_explicit(&self) -> bool {
        self.m_explicit
    }

    /// Exit rate at `(k, x, a, b)`: `-q[k][x][a][b][x]`.
    pub fn exit_rate(&self, k: usize, x: usize, a: usize, b: usize) -> f64 {
        -self.cells[k][x].rates[a][b][x]
    }

    /// `q_x`: the largest exit rate from `x` over all cells and action pairs.
    pub fn exit_rate_bound(&self, x: usize) -> f64 {
        let mut qx: f64 = 0.0;
        for k in 0..self.partition.num_cells() {
            let d = &self.cells[k][x];
            for a in 0..d.actions_max.len() {
                for b in 0..d.actions_min.len() {
                    qx = qx.max(-d.rates[a][b][x]);
                }
            }
        }
        qx
    }

    pub fn max_abs_reward(&self) -> f64 {
        let mut r: f64 = 0.0;
        for cell in &self.cells {
            for d in cell {
                for row in &d.rewards {
                    for &v in row {
                        r = r.max(v.abs());
                    }
                }
            }
        }
        r
    }

    pub fn max_abs_terminal(&self) -> f64 {
        self.terminal.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }
}

/// Uniformized one-step kernel `p̃[y] = δ_x[y] + q[k][x][a][b][y] / m[x]`.
pub fn uniformized_kernel(model: &GameModel, k: usize, x: usize, a: usize, b: usize) -> Vec<f64> {
    let m = model.uniformization_rate(x);
    assert!(m > 0.0, "uniformization rate must be positive");
    let rates = &model.dynamics(k, x).rates[a][b];
    rates
        .iter()
        .enumerate()
        .map(|(y, &q)| if y == x { 1.0 + q / m } else { q / m })
        .collect()
}

/// Drift certificate: weight functions and constants bounding rates and
/// rewards of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftCertificate {
    pub w0: Vec<f64>,
    pub w1: Vec<f64>,
    pub c0: f64,
    pub c1: f64,
    pub m0: f64,
    pub m1: f64,
}

/// Outcome of one validator check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckEntry {
    pub id: String,
    pub pass: bool,
    /// Worst violation magnitude (0 when passing).
    pub violation: f64,
    /// Human-readable offending indices, empty when passing.
    pub location: String,
}

/// Collection of check results; all-pass iff `failures()` is empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub entries: Vec<CheckEntry>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    fn push(&mut self, id: &str, violation: f64, tol: f64, location: String) {
        let pass = violation <= tol;
        self.entries.push(CheckEntry {
            id: String::from(id),
            pass,
            violation: if pass { 0.0 } else { violation },
            location: if pass { String::new() } else { location },
        });
    }
}

/// Quantitative model checks: conservativeness, off-diagonal sign,
/// uniformization domination, nonempty action sets.
pub fn validate_model(model: &GameModel, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = model.num_states();

    let mut worst_sum = 0.0f64;
    let mut worst_sum_loc = String::new();
    let mut worst_sign = 0.0f64;
    let mut worst_sign_loc = String::new();
    for k in 0..model.partition().num_cells() {
        for x in 0..n {
            let d = model.dynamics(k, x);
            for a in 0..d.actions_max.len() {
                for b in 0..d.actions_min.len() {
                    let row = &d.rates[a][b];
                    let sum: f64 = row.iter().sum();
                    if sum.abs() > worst_sum {
                        worst_sum = sum.abs();
                        worst_sum_loc = format!(
                            "cell {k}, state {}, actions ({},{})",
                            model.states()[x],
                            d.actions_max[a],
                            d.actions_min[b]
                        );
                    }
                    for (y, &q) in row.iter().enumerate() {
                        if y != x && -q > worst_sign {
                            worst_sign = -q;
                            worst_sign_loc = format!(
                                "cell {k}, state {}, actions ({},{}), target {}",
                                model.states()[x],
                                d.actions_max[a],
                                d.actions_min[b],
                                model.states()[y]
                            );
                        }
                    }
                }
            }
        }
    }
    report.push("conservativeness", worst_sum, tol, worst_sum_loc);
    report.push("offdiagonal_nonnegative", worst_sign, tol, worst_sign_loc);

    let mut worst_m = 0.0f64;
    let mut worst_m_loc = String::new();
    for x in 0..n {
        let gap = model.exit_rate_bound(x) - model.uniformization_rate(x);
        if gap > worst_m {
            worst_m = gap;
            worst_m_loc = format!("state {}", model.states()[x]);
        }
        if model.uniformization_rate(x) <= 0.0 {
            worst_m = f64::INFINITY;
            worst_m_loc = format!("state {} (nonpositive m)", model.states()[x]);
        }
    }
    report.push("uniformization_dominates", worst_m, tol, worst_m_loc);

    // Nonemptiness is enforced at construction; re-checked here so a report
    // consumer sees the full check list.
    report.push("actions_nonempty", 0.0, 0.0, String::new());
    report
}

/// Constant-weight certificate that any valid finite model satisfies.
pub fn auto_certificate(model: &GameModel) -> DriftCertificate {
    let n = model.num_states();
    let qmax = (0..n).fold(0.0f64, |acc, x| acc.max(model.exit_rate_bound(x)));
    let m0 = 1.0f64
        .max(model.max_abs_reward())
        .max(model.max_abs_terminal())
        .max(qmax);
    let m1 = 1.0f64.max(qmax);
    DriftCertificate {
        w0: vec![1.0; n],
        w1: vec![1.0; n],
        c0: 1.0,
        c1: 1.0,
        m0,
        m1,
    }
}

/// Check the five drift-condition clauses exhaustively over all
/// (cell, state, action, action) tuples.
pub fn validate_certificate(
    model: &GameModel,
    cert: &DriftCertificate,
    tol: f64,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = model.num_states();

    let mut structural = 0.0f64;
    let mut structural_loc = String::new();
    if cert.w0.len() != n || cert.w1.len() != n {
        structural = f64::INFINITY;
        structural_loc = String::from("weight vector length != state count");
    }
    for x in 0..cert.w0.len().min(n) {
        let short = (1.0 - cert.w0[x]).max(1.0 - cert.w1[x]);
        if short > structural {
            structural = short;
            structural_loc = format!("state {}: weight below 1", model.states()[x]);
        }
    }
    for (name, v) in [
        ("c0", cert.c0),
        ("c1", cert.c1),
        ("M0", cert.m0),
        ("M1", cert.m1),
    ] {
        if !(v > 0.0) {
            structural = f64::INFINITY;
            structural_loc = format!("constant {name} nonpositive");
        }
    }
    report.push("structural", structural, 0.0, structural_loc);
    if structural.is_infinite() {
        return report;
    }

    // Clauses (a) and (d): sum_y w(y) q[..][y] <= c w(x).
    let mut worst = [0.0f64; 5];
    let mut locs: [String; 5] = Default::default();
    for k in 0..model.partition().num_cells() {
        for x in 0..n {
            let d = model.dynamics(k, x);
            for a in 0..d.actions_max.len() {
                for b in 0..d.actions_min.len() {
                    let row = &d.rates[a][b];
                    let drift0: f64 = row.iter().zip(&cert.w0).map(|(&q, &w)| q * w).sum();
                    let drift1: f64 = row.iter().zip(&cert.w1).map(|(&q, &w)| q * w).sum();
                    let loc = || {
                        format!(
                            "cell {k}, state {}, actions ({},{})",
                            model.states()[x],
                            d.actions_max[a],
                            d.actions_min[b]
                        )
                    };
                    let va = drift0 - cert.c0 * cert.w0[x];
                    if va > worst[0] {
                        worst[0] = va;
                        locs[0] = loc();
                    }
                    let vd = drift1 - cert.c1 * cert.w1[x];
                    if vd > worst[3] {
                        worst[3] = vd;
                        locs[3] = loc();
                    }
                    let vr = d.rewards[a][b].abs() - cert.m0 * cert.w0[x];
                    if vr > worst[2] {
                        worst[2] = vr;
                        locs[2] = loc();
                    }
                }
            }
        }
    }
    // Clauses (b), (e) and the terminal half of (c).
    for x in 0..n {
        let qx = model.exit_rate_bound(x);
        let vb = qx - cert.m0 * cert.w0[x];
        if vb > worst[1] {
            worst[1] = vb;
            locs[1] = format!("state {}", model.states()[x]);
        }
        let vg = model.terminal()[x].abs() - cert.m0 * cert.w0[x];
        if vg > worst[2] {
            worst[2] = vg;
            locs[2] = format!("state {} (terminal)", model.states()[x]);
        }
        let ve = cert.w0[x] * qx - cert.m1 * cert.w1[x];
        if ve > worst[4] {
            worst[4] = ve;
            locs[4] = format!("state {}", model.states()[x]);
        }
    }
    let ids = [
        "clause_a_drift_w0",
        "clause_b_exit_rate",
        "clause_c_reward_bound",
        "clause_d_drift_w1",
        "clause_e_weighted_exit",
    ];
    for i in 0..5 {
        report.push(ids[i], worst[i], tol, core::mem::take(&mut locs[i]));
    }
    report
}
