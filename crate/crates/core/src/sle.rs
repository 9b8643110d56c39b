//! Subspace Leverage Equalizer: ridge-leverage-score weighting of client
//! updates, so rare update directions are amplified during aggregation.
//!
//! Each update is normalized to a unit row of `U`; client `i`'s leverage is
//! `u_i^T (U^T U + lambda I)^{-1} u_i`. When the parameter dimension exceeds
//! the client count the score is computed through the `n x n` Gram form
//! `[G (G + lambda I)^{-1}]_{ii}` (push-through identity), avoiding `d x d`
//! solves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelVector;

/// Ridge regularizer for the leverage computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SleParams {
    pub lambda_ridge: f64,
}

impl Default for SleParams {
    fn default() -> Self {
        SleParams { lambda_ridge: 1.0 }
    }
}

/// Leverage scores and the simplex weights derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SleWeights {
    pub leverage: Vec<f64>,
    pub weights: Vec<f64>,
}

/// In-place Cholesky factorization of a symmetric positive-definite matrix
/// (row-major, lower triangle). Fails on non-positive pivots, which is how
/// a rank-deficient system at lambda = 0 surfaces.
fn cholesky_factor(a: &mut [f64], n: usize) -> Result<()> {
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0f64, f64::max);
    let tol = scale.max(1.0) * 1e-13;
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !d.is_finite() || d <= tol {
            return Err(Error::numerical(
                "singular leverage system; use lambda_ridge > 0 with rank-deficient updates",
            ));
        }
        let l = d.sqrt();
        a[j * n + j] = l;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / l;
        }
    }
    Ok(())
}

/// Solves `L L^T x = b` in place given the factor from [`cholesky_factor`].
fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

fn normalized_rows(updates: &[ModelVector]) -> Result<(Vec<Vec<f64>>, usize)> {
    let first = updates
        .first()
        .ok_or_else(|| Error::protocol("leverage_scores needs at least one update"))?;
    let dim = first.dim();
    let mut rows = Vec::with_capacity(updates.len());
    for (i, u) in updates.iter().enumerate() {
        if u.dim() != dim {
            return Err(Error::protocol("updates have mismatched dimensions"));
        }
        let norm = u.norm();
        if norm == 0.0 {
            return Err(Error::config(format!(
                "update {i} has zero norm; exclude zero updates before weighting"
            )));
        }
        rows.push(u.values.iter().map(|v| v / norm).collect());
    }
    Ok((rows, dim))
}

fn leverage_primal(rows: &[Vec<f64>], dim: usize, lambda: f64) -> Result<Vec<f64>> {
    let mut a = vec![0.0; dim * dim];
    for row in rows {
        for p in 0..dim {
            let rp = row[p];
            if rp == 0.0 {
                continue;
            }
            for q in 0..dim {
                a[p * dim + q] += rp * row[q];
            }
        }
    }
    for p in 0..dim {
        a[p * dim + p] += lambda;
    }
    cholesky_factor(&mut a, dim)?;
    let mut scores = Vec::with_capacity(rows.len());
    for row in rows {
        let mut x = row.clone();
        cholesky_solve(&a, dim, &mut x);
        scores.push(row.iter().zip(&x).map(|(r, xv)| r * xv).sum());
    }
    Ok(scores)
}

fn leverage_gram(rows: &[Vec<f64>], lambda: f64) -> Result<Vec<f64>> {
    let n = rows.len();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            gram[i * n + j] = dot;
            gram[j * n + i] = dot;
        }
    }
    let mut a = gram.clone();
    for i in 0..n {
        a[i * n + i] += lambda;
    }
    cholesky_factor(&mut a, n)?;
    let mut scores = Vec::with_capacity(n);
    for i in 0..n {
        let mut col: Vec<f64> = (0..n).map(|r| gram[r * n + i]).collect();
        cholesky_solve(&a, n, &mut col);
        scores.push(col[i]);
    }
    Ok(scores)
}

/// Ridge leverage score of each update's normalized direction.
pub fn leverage_scores(updates: &[ModelVector], params: &SleParams) -> Result<Vec<f64>> {
    if params.lambda_ridge < 0.0 {
        return Err(Error::config("lambda_ridge must be nonnegative"));
    }
    let (rows, dim) = normalized_rows(updates)?;
    if dim > rows.len() {
        leverage_gram(&rows, params.lambda_ridge)
    } else {
        leverage_primal(&rows, dim, params.lambda_ridge)
    }
}

/// Simplex normalization of positive leverages.
pub fn weights(leverage: &[f64]) -> Result<Vec<f64>> {
    let sum: f64 = leverage.iter().sum();
    if sum <= 0.0 || !sum.is_finite() {
        return Err(Error::numerical("leverage scores must sum to a positive value"));
    }
    Ok(leverage.iter().map(|l| l / sum).collect())
}

/// Leverage scores and weights in one call.
pub fn sle_weights(updates: &[ModelVector], params: &SleParams) -> Result<SleWeights> {
    let leverage = leverage_scores(updates, params)?;
    let weights = weights(&leverage)?;
    Ok(SleWeights { leverage, weights })
}

/// Weighted sum of raw (unnormalized) updates.
pub fn aggregate(updates: &[ModelVector], w: &[f64]) -> Result<ModelVector> {
    if updates.len() != w.len() {
        return Err(Error::protocol(format!(
            "{} updates but {} weights",
            updates.len(),
            w.len()
        )));
    }
    let first = updates
        .first()
        .ok_or_else(|| Error::protocol("nothing to aggregate"))?;
    let mut out = vec![0.0; first.dim()];
    for (u, &wi) in updates.iter().zip(w) {
        for (o, v) in out.iter_mut().zip(&u.values) {
            *o += wi * v;
        }
    }
    Ok(ModelVector { values: out })
}
