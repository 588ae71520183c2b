//! Property tests for the matrix-game solver and the model validators.

use jumpgame_core::{
    auto_certificate, check_saddle, solve_matrix_game, uniformized_kernel, validate_certificate,
    validate_model, CellDynamics, GameModel, Matrix, TimePartition,
};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn matrix_strategy(max_dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(p, q)| {
        proptest::collection::vec(
            proptest::collection::vec(-5.0f64..5.0, q..=q),
            p..=p,
        )
    })
}

fn solve(rows: &[Vec<f64>]) -> jumpgame_core::MatrixGameSolution {
    solve_matrix_game(&Matrix::from_rows(rows).unwrap(), TOL).unwrap()
}

proptest! {
    #[test]
    fn strategies_are_probability_vectors(rows in matrix_strategy(5)) {
        let sol = solve(&rows);
        let sums: [f64; 2] = [
            sol.row_strategy.iter().sum(),
            sol.col_strategy.iter().sum(),
        ];
        for s in sums {
            prop_assert!((s - 1.0).abs() < 1e-10);
        }
        prop_assert!(sol.row_strategy.iter().chain(&sol.col_strategy).all(|&w| w >= 0.0));
        prop_assert!(sol.residual <= TOL);
    }

    #[test]
    fn shift_covariance(rows in matrix_strategy(4), c in -10.0f64..10.0) {
        let sol = solve(&rows);
        let shifted: Vec<Vec<f64>> =
            rows.iter().map(|r| r.iter().map(|v| v + c).collect()).collect();
        let sol_shifted = solve(&shifted);
        prop_assert!((sol_shifted.value - sol.value - c).abs() < 1e-9);
        // The unshifted strategies stay a saddle of the shifted game.
        let m = Matrix::from_rows(&shifted).unwrap();
        let res = check_saddle(&m, &sol.row_strategy, &sol.col_strategy).unwrap();
        prop_assert!(res <= 1e-8);
    }

    #[test]
    fn positive_scaling(rows in matrix_strategy(4), alpha in 0.1f64..10.0) {
        let sol = solve(&rows);
        let scaled: Vec<Vec<f64>> =
            rows.iter().map(|r| r.iter().map(|v| v * alpha).collect()).collect();
        let sol_scaled = solve(&scaled);
        prop_assert!((sol_scaled.value - alpha * sol.value).abs() < 1e-8);
        let m = Matrix::from_rows(&scaled).unwrap();
        let res = check_saddle(&m, &sol.row_strategy, &sol.col_strategy).unwrap();
        prop_assert!(res <= alpha * 1e-8 + 1e-10);
    }

    #[test]
    fn duality_antisymmetry(rows in matrix_strategy(4)) {
        let sol = solve(&rows);
        let p = rows.len();
        let q = rows[0].len();
        let neg_t: Vec<Vec<f64>> =
            (0..q).map(|j| (0..p).map(|i| -rows[i][j]).collect()).collect();
        let sol_dual = solve(&neg_t);
        prop_assert!((sol_dual.value + sol.value).abs() < 1e-8);
        // Roles swap: (mu*, lambda*) is a saddle of -M'.
        let m = Matrix::from_rows(&neg_t).unwrap();
        let res = check_saddle(&m, &sol.col_strategy, &sol.row_strategy).unwrap();
        prop_assert!(res <= 1e-8);
    }

    #[test]
    fn dominated_row_does_not_change_value(rows in matrix_strategy(4)) {
        let sol = solve(&rows);
        // A row strictly below row 0 everywhere is never played.
        let dominated: Vec<f64> = rows[0].iter().map(|v| v - 1.0).collect();
        let mut extended = rows.clone();
        extended.push(dominated);
        let sol_ext = solve(&extended);
        prop_assert!((sol_ext.value - sol.value).abs() < 1e-9);
    }
}

fn random_conservative_model(n: usize, actions: usize, seed_rates: &[f64]) -> GameModel {
    // Deterministic construction from a flat slice of nonnegative rates.
    let mut it = seed_rates.iter().cycle().copied();
    let mut cells = Vec::new();
    let mut cell = Vec::new();
    for x in 0..n {
        let mut rates = Vec::new();
        let mut rewards = Vec::new();
        for _ in 0..actions {
            let mut rrow = Vec::new();
            let mut rew = Vec::new();
            for _ in 0..actions {
                let mut row = vec![0.0f64; n];
                for (y, slot) in row.iter_mut().enumerate() {
                    if y != x {
                        *slot = it.next().unwrap();
                    }
                }
                let exit: f64 = row.iter().sum();
                row[x] = -exit;
                rrow.push(row);
                rew.push(it.next().unwrap() - 0.5);
            }
            rates.push(rrow);
            rewards.push(rew);
        }
        cell.push(CellDynamics {
            actions_max: (0..actions).map(|i| format!("a{i}")).collect(),
            actions_min: (0..actions).map(|i| format!("b{i}")).collect(),
            rates,
            rewards,
        });
    }
    cells.push(cell);
    GameModel::new(
        (0..n).map(|i| format!("s{i}")).collect(),
        TimePartition::single(1.0).unwrap(),
        cells,
        vec![0.1; n],
        None,
    )
    .unwrap()
}

proptest! {
    #[test]
    fn uniformized_kernel_is_stochastic(
        rates in proptest::collection::vec(0.0f64..3.0, 8..40),
        n in 2usize..5,
        actions in 1usize..3,
    ) {
        let model = random_conservative_model(n, actions, &rates);
        for x in 0..n {
            for a in 0..actions {
                for b in 0..actions {
                    let p = uniformized_kernel(&model, 0, x, a, b);
                    let sum: f64 = p.iter().sum();
                    prop_assert!((sum - 1.0).abs() < 1e-12);
                    prop_assert!(p.iter().all(|&v| v >= -1e-12));
                }
            }
        }
    }

    #[test]
    fn auto_certificate_always_validates(
        rates in proptest::collection::vec(0.0f64..3.0, 8..40),
        n in 2usize..5,
        actions in 1usize..3,
    ) {
        let model = random_conservative_model(n, actions, &rates);
        prop_assert!(validate_model(&model, 1e-12).all_pass());
        let cert = auto_certificate(&model);
        prop_assert!(validate_certificate(&model, &cert, 1e-12).all_pass());
    }

    #[test]
    fn validation_is_permutation_equivariant(
        rates in proptest::collection::vec(0.0f64..3.0, 8..40),
        n in 2usize..5,
    ) {
        let model = random_conservative_model(n, 2, &rates);
        // Reverse the state labels: relabeled model validates identically.
        let perm: Vec<usize> = (0..n).rev().collect();
        let mut cells = Vec::new();
        let cell: Vec<CellDynamics> = perm
            .iter()
            .map(|&x| {
                let d = model.dynamics(0, x);
                CellDynamics {
                    actions_max: d.actions_max.clone(),
                    actions_min: d.actions_min.clone(),
                    rates: d
                        .rates
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|qv| perm.iter().map(|&y| qv[y]).collect())
                                .collect()
                        })
                        .collect(),
                    rewards: d.rewards.clone(),
                }
            })
            .collect();
        cells.push(cell);
        let permuted = GameModel::new(
            perm.iter().map(|&x| model.states()[x].clone()).collect(),
            model.partition().clone(),
            cells,
            perm.iter().map(|&x| model.terminal()[x]).collect(),
            None,
        )
        .unwrap();
        let a = validate_model(&model, 1e-12);
        let b = validate_model(&permuted, 1e-12);
        prop_assert_eq!(a.all_pass(), b.all_pass());
    }
}
