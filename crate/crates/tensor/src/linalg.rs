//! Small dense solvers for the closed-form baselines.

use crate::error::{Error, Result};

/// Solve `A x = b` for square `A` (row-major) by Gaussian elimination
/// with partial pivoting. Returns `None` on a (numerically) singular
/// pivot.
pub fn solve_linear_system(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if m[row * n + col].abs() > m[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if m[pivot * n + col].abs() < 1e-12 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                m.swap(col * n + j, pivot * n + j);
            }
            rhs.swap(col, pivot);
        }
        let diag = m[col * n + col];
        for row in col + 1..n {
            let factor = m[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                m[row * n + j] -= factor * m[col * n + j];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for j in col + 1..n {
            acc -= m[col * n + j] * x[j];
        }
        x[col] = acc / m[col * n + col];
    }
    Some(x)
}

/// Least squares `min ||X b - y||` via the normal equations. A singular
/// system falls back to ridge regularization with lambda = 1e-6.
pub fn solve_least_squares(x: &[f64], rows: usize, cols: usize, y: &[f64]) -> Result<Vec<f64>> {
    if x.len() != rows * cols || y.len() != rows {
        return Err(Error::ShapeMismatch {
            op: "solve_least_squares",
            detail: format!("{} values for {rows}x{cols}, {} targets", x.len(), y.len()),
        });
    }
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArg("empty design matrix".into()));
    }
    let mut xtx = vec![0.0; cols * cols];
    let mut xty = vec![0.0; cols];
    for r in 0..rows {
        let row = &x[r * cols..(r + 1) * cols];
        for i in 0..cols {
            xty[i] += row[i] * y[r];
            for j in i..cols {
                xtx[i * cols + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..cols {
        for j in 0..i {
            xtx[i * cols + j] = xtx[j * cols + i];
        }
    }
    if let Some(b) = solve_linear_system(&xtx, &xty, cols) {
        if b.iter().all(|v| v.is_finite()) {
            return Ok(b);
        }
    }
    for i in 0..cols {
        xtx[i * cols + i] += 1e-6;
    }
    solve_linear_system(&xtx, &xty, cols)
        .filter(|b| b.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::InvalidArg("ridge-regularized system is still singular".into()))
}
