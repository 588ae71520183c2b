//! Exact solution of finite zero-sum matrix games in mixed strategies.
//!
//! The sup-inf over mixed strategies of a bilinear payoff is a finite matrix
//! game; it is solved here by the classical linear-programming pair. The
//! matrix is shifted to strict positivity, the column player's LP
//! (maximize 1'y subject to My <= 1, y >= 0) is solved by a dense simplex
//! with Bland's rule, and the row strategy is read off the duals. Matrices
//! at this scale are small (action counts in the tens), so a dense tableau
//! is the right tool.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::MatrixGameError;

const PIVOT_EPS: f64 = 1e-11;

/// Dense row-major matrix; rows belong to the maximizer, columns to the
/// minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixGameError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(MatrixGameError::Empty);
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(MatrixGameError::DimensionMismatch(String::from(
                    "ragged rows",
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }
}

/// Value and optimal mixed strategies of a zero-sum matrix game.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSolution {
    pub value: f64,
    /// Maximizer's mixed strategy over rows.
    pub row_strategy: Vec<f64>,
    /// Minimizer's mixed strategy over columns.
    pub col_strategy: Vec<f64>,
    /// Largest gain available to either player by a pure deviation.
    pub residual: f64,
}

/// Largest pure-deviation gain of either player at `(lambda, mu)`, clamped
/// at zero. Zero residual certifies a saddle point.
pub fn check_saddle(m: &Matrix, lambda: &[f64], mu: &[f64]) -> Result<f64, MatrixGameError> {
    if lambda.len() != m.rows || mu.len() != m.cols {
        return Err(MatrixGameError::DimensionMismatch(String::from(
            "strategy length does not match matrix",
        )));
    }
    let mut current = 0.0;
    for i in 0..m.rows {
        for j in 0..m.cols {
            current += lambda[i] * m.get(i, j) * mu[j];
        }
    }
    let mut best_row = f64::NEG_INFINITY;
    for i in 0..m.rows {
        let payoff: f64 = (0..m.cols).map(|j| m.get(i, j) * mu[j]).sum();
        best_row = best_row.max(payoff);
    }
    let mut best_col = f64::INFINITY;
    for j in 0..m.cols {
        let payoff: f64 = (0..m.rows).map(|i| m.get(i, j) * lambda[i]).sum();
        best_col = best_col.min(payoff);
    }
    Ok((best_row - current).max(current - best_col).max(0.0))
}

/// Solve the matrix game exactly; the returned strategies have saddle
/// residual at most `tol`.
pub fn solve_matrix_game(m: &Matrix, tol: f64) -> Result<MatrixGameSolution, MatrixGameError> {
    let (p, q) = (m.rows, m.cols);
    if p == 0 || q == 0 {
        return Err(MatrixGameError::Empty);
    }
    let mut min_entry = f64::INFINITY;
    for i in 0..p {
        for j in 0..q {
            let v = m.get(i, j);
            if !v.is_finite() {
                return Err(MatrixGameError::NonFiniteEntry { row: i, col: j });
            }
            min_entry = min_entry.min(v);
        }
    }
    // Shift so every payoff is >= 1; the shifted value is then positive and
    // the all-slack basis is feasible.
    let shift = 1.0 - min_entry;

    // Tableau for: maximize 1'y  s.t.  (M + shift) y <= 1, y >= 0.
    // Columns 0..q are y, columns q..q+p are slacks.
    let ncols = q + p;
    let mut a = vec![vec![0.0f64; ncols]; p];
    let mut rhs = vec![1.0f64; p];
    for i in 0..p {
        for j in 0..q {
            a[i][j] = m.get(i, j) + shift;
        }
        a[i][q + i] = 1.0;
    }
    let mut cost = vec![0.0f64; ncols];
    for c in cost.iter_mut().take(q) {
        *c = 1.0;
    }
    let mut basis: Vec<usize> = (q..q + p).collect();

    let max_pivots = 50 * (p + q).max(16);
    for _ in 0..max_pivots {
        // Bland: entering column is the lowest index with positive reduced cost.
        let Some(enter) = (0..ncols).find(|&j| cost[j] > PIVOT_EPS) else {
            break;
        };
        // Ratio test; ties broken by lowest basic variable index.
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..p {
            if a[i][enter] > PIVOT_EPS {
                let ratio = rhs[i] / a[i][enter];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best_ratio - PIVOT_EPS
                            || (ratio < best_ratio + PIVOT_EPS && basis[i] < basis[l])
                    }
                };
                if better {
                    best_ratio = ratio.min(best_ratio);
                    leave = Some(i);
                }
            }
        }
        // With the shifted matrix every y-column is strictly positive, so the
        // LP is bounded and a pivot row always exists.
        let r = leave.expect("bounded LP must admit a pivot row");
        let piv = a[r][enter];
        for v in a[r].iter_mut() {
            *v /= piv;
        }
        rhs[r] /= piv;
        for i in 0..p {
            if i != r && a[i][enter].abs() > 0.0 {
                let f = a[i][enter];
                for j in 0..ncols {
                    a[i][j] -= f * a[r][j];
                }
                rhs[i] -= f * rhs[r];
                if rhs[i] < 0.0 && rhs[i] > -PIVOT_EPS {
                    rhs[i] = 0.0;
                }
            }
        }
        let f = cost[enter];
        for j in 0..ncols {
            cost[j] -= f * a[r][j];
        }
        basis[r] = enter;
    }

    let mut y = vec![0.0f64; q];
    for i in 0..p {
        if basis[i] < q {
            y[basis[i]] = rhs[i];
        }
    }
    let objective: f64 = y.iter().sum();
    // objective = 1 / (shifted value); positive because entries are >= 1.
    let shifted_value = 1.0 / objective;

    let mut mu: Vec<f64> = y.iter().map(|&v| (v * shifted_value).max(0.0)).collect();
    let mut lambda: Vec<f64> = (0..p)
        .map(|i| ((-cost[q + i]) * shifted_value).max(0.0))
        .collect();
    normalize(&mut lambda);
    normalize(&mut mu);

    let value = shifted_value - shift;
    let residual = check_saddle(m, &lambda, &mu)?;
    debug_assert!(residual <= tol.max(1e-8), "simplex residual {residual:e}");
    Ok(MatrixGameSolution {
        value,
        row_strategy: lambda,
        col_strategy: mu,
        residual,
    })
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        for x in v.iter_mut() {
            *x /= s;
        }
    }
}
