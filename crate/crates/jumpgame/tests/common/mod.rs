//! Shared test corpus: the fixture models plus a generated 10-state,
//! 4x4-action, two-cell chain, with cached solver runs so the slower
//! checks share work within one test binary.

#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::{LazyLock, Mutex};

use jumpgame::format::parse_model;
use jumpgame_core::{
    auto_certificate, build_grid, extract_policies, isaacs_backward, value_iterate,
    CellDynamics, DriftCertificate, GameModel, MarkovPolicy, SolveDiagnostics, TimePartition,
    ValueGrid,
};

pub const FIXTURES: &[&str] = &[
    "degenerate",
    "stage22",
    "pennies",
    "pure_death",
    "twocell",
    "repair",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(format!("{name}.json"))
}

pub fn load_fixture(name: &str) -> GameModel {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    parse_model(&text).expect("fixture parses").0
}

/// Ten-state controlled birth-death chain with 4x4 action pairs and two
/// time cells. Rates stay small enough that the uniformized iteration
/// contracts quickly at desk scale.
pub fn chain10() -> GameModel {
    let n = 10usize;
    let states: Vec<String> = (0..n).map(|x| format!("s{x}")).collect();
    let actions_max: Vec<String> = (0..4).map(|a| format!("a{a}")).collect();
    let actions_min: Vec<String> = (0..4).map(|b| format!("b{b}")).collect();
    let mut cells = Vec::new();
    for k in 0..2usize {
        let tilt = if k == 0 { 1.0 } else { 0.7 };
        let mut cell = Vec::new();
        for x in 0..n {
            let mut rates = Vec::new();
            let mut rewards = Vec::new();
            for a in 0..4usize {
                let mut rrow = Vec::new();
                let mut rew = Vec::new();
                for b in 0..4usize {
                    let up = if x + 1 < n {
                        tilt * (0.15 + 0.08 * a as f64 + 0.03 * b as f64)
                    } else {
                        0.0
                    };
                    let down = if x > 0 {
                        0.2 + 0.02 * a as f64 + 0.07 * b as f64
                    } else {
                        0.0
                    };
                    let mut row = vec![0.0f64; n];
                    if x + 1 < n {
                        row[x + 1] = up;
                    }
                    if x > 0 {
                        row[x - 1] = down;
                    }
                    row[x] = -(up + down);
                    rrow.push(row);
                    let level = x as f64 / (n - 1) as f64;
                    rew.push(level * (1.0 + 0.3 * a as f64 - 0.25 * b as f64) + 0.1 * tilt);
                }
                rates.push(rrow);
                rewards.push(rew);
            }
            cell.push(CellDynamics {
                actions_max: actions_max.clone(),
                actions_min: actions_min.clone(),
                rates,
                rewards,
            });
        }
        cells.push(cell);
    }
    let terminal: Vec<f64> = (0..n).map(|x| 0.5 * x as f64 / (n - 1) as f64).collect();
    GameModel::new(
        states,
        TimePartition::new(vec![0.0, 0.6, 1.0]).unwrap(),
        cells,
        terminal,
        None,
    )
    .unwrap()
}

pub struct CorpusModel {
    pub name: &'static str,
    pub model: GameModel,
    pub single_cell: bool,
}

pub fn corpus() -> Vec<CorpusModel> {
    let mut out: Vec<CorpusModel> = FIXTURES
        .iter()
        .map(|&name| {
            let model = load_fixture(name);
            let single_cell = model.partition().num_cells() == 1;
            CorpusModel {
                name,
                model,
                single_cell,
            }
        })
        .collect();
    out.push(CorpusModel {
        name: "chain10",
        model: chain10(),
        single_cell: false,
    });
    out
}

pub const ACCEPT_GRID: usize = 2000;
pub const ITER_TOL: f64 = 1e-8;
pub const MATRIX_TOL: f64 = 1e-9;

pub struct SolvedModel {
    pub name: &'static str,
    pub model: GameModel,
    pub single_cell: bool,
    pub cert: DriftCertificate,
    pub grid: Vec<f64>,
    pub vi: ValueGrid,
    pub diagnostics: SolveDiagnostics,
    pub ode: ValueGrid,
    pub policy_max: MarkovPolicy,
    pub policy_min: MarkovPolicy,
    pub solve_seconds: f64,
}

fn solve_corpus() -> Vec<SolvedModel> {
    corpus()
        .into_iter()
        .map(|cm| {
            let cert = auto_certificate(&cm.model);
            let grid = build_grid(&cm.model, ACCEPT_GRID);
            let start = std::time::Instant::now();
            let (vi, diagnostics) =
                value_iterate(&cm.model, &cert, &grid, ITER_TOL, MATRIX_TOL, 10_000)
                    .unwrap_or_else(|e| panic!("{}: value iteration failed: {e}", cm.name));
            let ode = isaacs_backward(&cm.model, &grid, MATRIX_TOL).unwrap();
            let solve_seconds = start.elapsed().as_secs_f64();
            let (policy_max, policy_min) = extract_policies(&cm.model, &ode, MATRIX_TOL).unwrap();
            SolvedModel {
                name: cm.name,
                model: cm.model,
                single_cell: cm.single_cell,
                cert,
                grid,
                vi,
                diagnostics,
                ode,
                policy_max,
                policy_min,
                solve_seconds,
            }
        })
        .collect()
}

static SOLVED: LazyLock<Vec<SolvedModel>> = LazyLock::new(solve_corpus);

pub fn solved_corpus() -> &'static [SolvedModel] {
    &SOLVED
}

/// Quadrature-slack estimate by grid halving: the sup distance between the
/// converged iterates at n and n/2 intervals, Richardson-weighted for a
/// second-order scheme.
pub fn quadrature_slack(sm: &SolvedModel) -> f64 {
    static CACHE: LazyLock<Mutex<std::collections::HashMap<&'static str, f64>>> =
        LazyLock::new(|| Mutex::new(std::collections::HashMap::new()));
    if let Some(&v) = CACHE.lock().unwrap().get(sm.name) {
        return v;
    }
    let coarse_grid = build_grid(&sm.model, ACCEPT_GRID / 2);
    let (coarse, _) = value_iterate(
        &sm.model,
        &sm.cert,
        &coarse_grid,
        ITER_TOL,
        MATRIX_TOL,
        10_000,
    )
    .unwrap();
    let mut d = 0.0f64;
    for (i, &t) in coarse_grid.iter().enumerate() {
        for x in 0..sm.model.num_states() {
            d = d.max((coarse.values[i][x] - sm.vi.interpolate(t, x)).abs());
        }
    }
    let slack = d * 4.0 / 3.0;
    CACHE.lock().unwrap().insert(sm.name, slack);
    slack
}
