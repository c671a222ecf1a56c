//! Independent reference solvers used to measure scheme errors.
//!
//! Three routes that share no code with the propagator:
//!
//! * closed-form Ornstein-Uhlenbeck moments,
//! * RK4 integration of the coupled coefficient ODEs on a cutoff box,
//! * Euler-Maruyama Monte Carlo with deterministic per-path RNG streams.
//!
//! The module also exposes the dense truncated operator matrix and a plain
//! Gauss-Jordan inverse, which back the elementwise resolvent checks.

use crate::error::{Error, Result};
use crate::generator::{Generator, SdeModel};
use crate::index::{multi_range, MultiIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Shifted Ornstein-Uhlenbeck moments `E[(X_T - x_ini)^order]` for
/// `dX = -gamma X dt + sigma dW`:
///
/// ```text
/// order 1:  x_ini e^{-gamma T} - x_ini
/// order 2:  sigma^2/(2 gamma) (1 - e^{-2 gamma T})
///             + x_ini^2 (e^{-2 gamma T} - 2 e^{-gamma T} + 1)
/// ```
pub fn ou_closed_form(gamma: f64, sigma: f64, x_ini: f64, horizon: f64, order: u32) -> Result<f64> {
    let decay = (-gamma * horizon).exp();
    match order {
        1 => Ok(x_ini * decay - x_ini),
        2 => {
            let decay2 = (-2.0 * gamma * horizon).exp();
            Ok(sigma * sigma / (2.0 * gamma) * (1.0 - decay2)
                + x_ini * x_ini * (decay2 - 2.0 * decay + 1.0))
        }
        other => Err(Error::UnsupportedOrder(other)),
    }
}

/// Configuration of the truncated coupled-ODE oracle.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct OdeOracleConfig {
    /// States with any component `>= cutoff` are excluded; transitions
    /// leaving the box are dropped (absorbing truncation).
    pub cutoff: u32,
    /// RK4 step; adjusted so an integer number of steps lands on the horizon.
    pub dt: f64,
    pub horizon: f64,
}

/// Enumerates the cutoff box `{ n : n_d < cutoff }` in lexicographic order.
pub fn lattice_box(dimension: usize, cutoff: u32) -> Vec<MultiIndex> {
    assert!(cutoff >= 1);
    let upper = MultiIndex::new(std::iter::repeat(cutoff - 1).take(dimension));
    multi_range(&upper).collect()
}

fn box_index(n: &MultiIndex, cutoff: u32) -> Option<usize> {
    let mut idx = 0usize;
    for e in n.iter() {
        if e >= cutoff {
            return None;
        }
        idx = idx * cutoff as usize + e as usize;
    }
    Some(idx)
}

/// Integrates `dP(n')/dt = sum_n [L]_{n'n} P(n)` on the cutoff box with
/// classical RK4 from the indicator at `alpha`, returning `P(0, T)`.
pub fn ode_oracle(g: &Generator, alpha: &MultiIndex, cfg: &OdeOracleConfig) -> Result<f64> {
    if alpha.len() != g.dimension() {
        return Err(Error::DimensionMismatch {
            expected: g.dimension(),
            got: alpha.len(),
        });
    }
    let Some(alpha_idx) = box_index(alpha, cfg.cutoff) else {
        return Err(Error::AlphaOutsideBox {
            alpha: alpha.clone(),
            cutoff: cfg.cutoff,
        });
    };

    // sparse action of the truncated operator, precomputed once
    let states = lattice_box(g.dimension(), cfg.cutoff);
    let size = states.len();
    let mut transitions: Vec<(u32, u32, f64)> = Vec::new();
    for (src, n) in states.iter().enumerate() {
        let diag = g.diag_element(n);
        if diag != 0.0 {
            transitions.push((src as u32, src as u32, diag));
        }
        for (target, value) in g.offdiag_targets(n) {
            if let Some(tgt) = box_index(&target, cfg.cutoff) {
                transitions.push((src as u32, tgt as u32, value));
            }
        }
    }
    let derivative = |p: &[f64], out: &mut [f64]| {
        out.fill(0.0);
        for &(src, tgt, value) in &transitions {
            out[tgt as usize] += value * p[src as usize];
        }
    };

    let steps = (cfg.horizon / cfg.dt).round().max(1.0) as usize;
    let h = cfg.horizon / steps as f64;
    let mut p = vec![0.0; size];
    p[alpha_idx] = 1.0;
    let mut k1 = vec![0.0; size];
    let mut k2 = vec![0.0; size];
    let mut k3 = vec![0.0; size];
    let mut k4 = vec![0.0; size];
    let mut stage = vec![0.0; size];
    for _ in 0..steps {
        derivative(&p, &mut k1);
        for i in 0..size {
            stage[i] = p[i] + 0.5 * h * k1[i];
        }
        derivative(&stage, &mut k2);
        for i in 0..size {
            stage[i] = p[i] + 0.5 * h * k2[i];
        }
        derivative(&stage, &mut k3);
        for i in 0..size {
            stage[i] = p[i] + h * k3[i];
        }
        derivative(&stage, &mut k4);
        for i in 0..size {
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(p[0])
}

/// Dense matrix of the truncated operator: `mat[row][col] = [L]_{n' n}` with
/// `n'` the row state and `n` the column state, both enumerated by
/// [`lattice_box`].
pub fn operator_matrix(g: &Generator, cutoff: u32) -> Vec<Vec<f64>> {
    let states = lattice_box(g.dimension(), cutoff);
    let size = states.len();
    let mut mat = vec![vec![0.0; size]; size];
    for (col, n) in states.iter().enumerate() {
        mat[col][col] += g.diag_element(n);
        for (target, value) in g.offdiag_targets(n) {
            if let Some(row) = box_index(&target, cutoff) {
                mat[row][col] += value;
            }
        }
    }
    mat
}

/// Plain Gauss-Jordan inversion with partial pivoting.
pub fn invert_dense(matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let size = matrix.len();
    let mut work: Vec<Vec<f64>> = matrix.iter().map(|row| {
        assert_eq!(row.len(), size, "matrix must be square");
        row.clone()
    }).collect();
    let mut inverse = vec![vec![0.0; size]; size];
    for (i, row) in inverse.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..size {
        let pivot_row = (col..size)
            .max_by(|&a, &b| {
                work[a][col]
                    .abs()
                    .partial_cmp(&work[b][col].abs())
                    .unwrap()
            })
            .unwrap();
        if work[pivot_row][col] == 0.0 {
            return Err(Error::SingularMatrix);
        }
        work.swap(col, pivot_row);
        inverse.swap(col, pivot_row);
        let pivot = work[col][col];
        for k in 0..size {
            work[col][k] /= pivot;
            inverse[col][k] /= pivot;
        }
        for row in 0..size {
            if row == col {
                continue;
            }
            let factor = work[row][col];
            if factor == 0.0 {
                continue;
            }
            for k in 0..size {
                work[row][k] -= factor * work[col][k];
                inverse[row][k] -= factor * inverse[col][k];
            }
        }
    }
    Ok(inverse)
}

/// Configuration of the Euler-Maruyama Monte Carlo oracle.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct McOracleConfig {
    pub paths: u64,
    pub dt: f64,
    /// Base seed; path `k` draws from an independent, reproducible stream
    /// derived from `(seed, k)`, so results do not depend on how paths are
    /// scheduled.
    pub seed: u64,
}

/// Estimates `E[prod_d (X_d(T) - x_ini_d)^alpha_d]` by Euler-Maruyama
/// simulation, returning the sample mean and its standard error.
///
/// Requires every diffusion entry to be constant; the noise matrix `B` is
/// recovered as the (lower-triangular) Cholesky factor of `B B^T`.
pub fn mc_oracle(
    model: &SdeModel,
    x_ini: &[f64],
    alpha: &MultiIndex,
    horizon: f64,
    cfg: &McOracleConfig,
) -> Result<(f64, f64)> {
    let dim = model.dimension();
    if x_ini.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x_ini.len(),
        });
    }
    if alpha.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: alpha.len(),
        });
    }

    let mut covariance = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            covariance[i][j] = model
                .diffusion(i, j)
                .constant_value()
                .ok_or(Error::NonConstantDiffusion)?;
        }
    }
    let noise = cholesky_psd(&covariance)?;

    // flat term lists keep the inner loop free of map lookups
    let drift_terms: Vec<Vec<(f64, Vec<u32>)>> = (0..dim)
        .map(|i| {
            model
                .drift(i)
                .terms()
                .map(|(e, c)| (c, e.entries().to_vec()))
                .collect()
        })
        .collect();

    let steps = (horizon / cfg.dt).round().max(1.0) as usize;
    let h = horizon / steps as f64;
    let sqrt_h = h.sqrt();

    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut x = vec![0.0; dim];
    let mut drift = vec![0.0; dim];
    let mut draws = vec![0.0; dim];
    for path in 0..cfg.paths {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(path);
        x.copy_from_slice(x_ini);
        for _ in 0..steps {
            for draw in draws.iter_mut() {
                *draw = rng.sample::<f64, _>(StandardNormal);
            }
            // drift at the pre-step state for every component
            for (i, terms) in drift_terms.iter().enumerate() {
                let mut a = 0.0;
                for (c, exps) in terms {
                    let mut t = *c;
                    for (d, &e) in exps.iter().enumerate() {
                        if e > 0 {
                            t *= x[d].powi(e as i32);
                        }
                    }
                    a += t;
                }
                drift[i] = a;
            }
            for i in 0..dim {
                let mut kick = 0.0;
                for (k, draw) in draws.iter().enumerate().take(i + 1) {
                    kick += noise[i][k] * draw;
                }
                x[i] += drift[i] * h + kick * sqrt_h;
            }
        }
        let mut value = 1.0;
        for d in 0..dim {
            for _ in 0..alpha[d] {
                value *= x[d] - x_ini[d];
            }
        }
        // Welford running statistics
        let count = (path + 1) as f64;
        let delta = value - mean;
        mean += delta / count;
        m2 += delta * (value - mean);
    }
    let std_error = if cfg.paths > 1 {
        (m2 / (cfg.paths as f64 - 1.0) / cfg.paths as f64).sqrt()
    } else {
        0.0
    };
    Ok((mean, std_error))
}

/// Cholesky factorization tolerant of positive *semi*definite input (zero
/// noise rows are legal).
fn cholesky_psd(matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let size = matrix.len();
    let scale = matrix
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale.max(1.0);
    let mut lower = vec![vec![0.0; size]; size];
    for i in 0..size {
        for j in 0..=i {
            let mut sum = matrix[i][j];
            for k in 0..j {
                sum -= lower[i][k] * lower[j][k];
            }
            if i == j {
                if sum < -tol {
                    return Err(Error::NotPositiveSemidefinite);
                }
                lower[i][j] = sum.max(0.0).sqrt();
            } else if lower[j][j].abs() <= tol {
                if sum.abs() > tol {
                    return Err(Error::NotPositiveSemidefinite);
                }
                lower[i][j] = 0.0;
            } else {
                lower[i][j] = sum / lower[j][j];
            }
        }
    }
    Ok(lower)
}
