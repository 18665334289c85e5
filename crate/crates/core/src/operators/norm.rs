use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::OperatorSpec;
use crate::dyadic::{DyadicGrid, StepFunction};
use crate::error::{Error, Result};
use crate::weights::Weight;

const DEFAULT_SEED: u64 = 0x005e_ed0f_d7ad;

/// Power-iteration estimate of an operator norm.
///
/// `value` never exceeds the true norm beyond roundoff: every iterate is a
/// Rayleigh-type quotient of an explicit vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    /// Relative change of the estimate at termination.
    pub residual: f64,
    pub converged: bool,
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s = norm2(&x);
    x.iter_mut().for_each(|v| *v /= s);
    x
}

/// `||op||_{L^2(w) -> L^2(w)}` as the top singular value of
/// `A = w^{1/2} op w^{-1/2}`, by power iteration on `A^T A`.
pub fn weighted_norm(op: &OperatorSpec, w: &Weight, tol: f64, max_iter: usize) -> Result<NormEstimate> {
    weighted_norm_seeded(op, w, tol, max_iter, DEFAULT_SEED)
}

pub fn weighted_norm_seeded(
    op: &OperatorSpec,
    w: &Weight,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<NormEstimate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be positive".into()));
    }
    let grid: DyadicGrid = w.grid();
    let prepared = op.prepare(grid)?;
    let flat = w.leaves().iter().all(|&x| x == 1.0);
    let sqrt_w: Vec<f64> = w.leaves().iter().map(|x| x.sqrt()).collect();

    let forward = |x: &[f64]| -> Result<Vec<f64>> {
        let input = if flat {
            x.to_vec()
        } else {
            x.iter().zip(&sqrt_w).map(|(a, s)| a / s).collect()
        };
        let y = prepared.apply(&StepFunction::on_grid(grid, input)?)?.into_leaves();
        Ok(if flat {
            y
        } else {
            y.iter().zip(&sqrt_w).map(|(a, s)| a * s).collect()
        })
    };
    let backward = |y: &[f64]| -> Result<Vec<f64>> {
        let input = if flat {
            y.to_vec()
        } else {
            y.iter().zip(&sqrt_w).map(|(a, s)| a * s).collect()
        };
        let z = prepared
            .apply_adjoint(&StepFunction::on_grid(grid, input)?)?
            .into_leaves();
        Ok(if flat {
            z
        } else {
            z.iter().zip(&sqrt_w).map(|(a, s)| a / s).collect()
        })
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = random_unit(&mut rng, grid.leaf_count());
    let mut best = 0.0f64;
    let mut prev = f64::NAN;
    let mut residual = f64::INFINITY;
    let restart_at = max_iter / 2;
    let mut restarted = false;

    for iter in 1..=max_iter {
        let y = forward(&x)?;
        let z = backward(&y)?;
        let ny = norm2(&y);
        let nz = norm2(&z);
        // ||Ax|| <= sqrt(||A^T A x||) <= ||A|| for unit x
        let est = ny.max(nz.sqrt());
        best = best.max(est);
        if nz == 0.0 || !nz.is_finite() {
            return Ok(NormEstimate {
                value: best,
                iterations: iter,
                residual: 0.0,
                converged: nz == 0.0,
            });
        }
        let gained = prev.is_nan() || est > prev;
        residual = if prev.is_nan() {
            f64::INFINITY
        } else {
            (est - prev).abs() / est
        };
        if residual < tol {
            return Ok(NormEstimate {
                value: best,
                iterations: iter,
                residual,
                converged: true,
            });
        }
        prev = est;
        // stalled: no longer climbing but not within tol either
        if iter == restart_at && !restarted && !gained {
            restarted = true;
            x = random_unit(&mut rng, grid.leaf_count());
            prev = f64::NAN;
            continue;
        }
        x = z.iter().map(|v| v / nz).collect();
    }
    Ok(NormEstimate {
        value: best,
        iterations: max_iter,
        residual,
        converged: false,
    })
}
