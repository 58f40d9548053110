use crate::error::{Error, Result};
use crate::space::ConcentrationCurve;
use serde::{Deserialize, Serialize};

/// Constants of a Gaussian concentration bound `alpha_n(eps) ~ c1 exp(-c2 n eps^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub c1: f64,
    pub c2: f64,
    /// Root-mean-square misfit of `ln alpha`.
    pub residual: f64,
}

/// Least-squares fit of `ln alpha = ln c1 - c2 n eps^2` over every sample of
/// every `(n, curve)` pair. Zero values are skipped, not floored.
pub fn gaussian_fit(curves: &[(usize, ConcentrationCurve)]) -> Result<GaussianFit> {
    let points: Vec<(f64, f64)> = curves
        .iter()
        .flat_map(|(n, c)| {
            c.eps()
                .iter()
                .zip(c.alpha())
                .filter(|(_, a)| **a > 0.0)
                .map(move |(e, a)| (*n as f64 * e * e, a.ln()))
        })
        .collect();
    let m = points.len();
    if m < 2 {
        return Err(Error::UnderdeterminedFit { usable: m });
    }
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m as f64;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m as f64;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx <= f64::EPSILON * mean_x.abs().max(1.0) * m as f64 {
        return Err(Error::UnderdeterminedFit { usable: m });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let c2 = -slope;
    if !(c2 > 0.0) {
        return Err(Error::NonPositiveDecay { c2 });
    }
    let residual = (points
        .iter()
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum::<f64>()
        / m as f64)
        .sqrt();
    Ok(GaussianFit {
        c1: intercept.exp(),
        c2,
        residual,
    })
}

/// Thresholds for [`levy_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyConfig {
    /// The last curve must fall below this value at every grid radius.
    pub threshold: f64,
    /// Allowed increase between consecutive members of the sequence.
    pub slack: f64,
}

impl Default for LevyConfig {
    fn default() -> Self {
        LevyConfig {
            threshold: 0.05,
            slack: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyReport {
    pub is_levy_trend: bool,
    /// `table[k][j]` is the value of curve `k` at `eps_grid[j]`.
    pub table: Vec<Vec<f64>>,
    pub eps_grid: Vec<f64>,
    pub threshold: f64,
    pub slack: f64,
}

/// True when each value exceeds its predecessor by at most `slack`.
pub fn non_increasing_within(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Finite-horizon test of pointwise decay to zero.
///
/// Curve values at grid radii come from [`ConcentrationCurve::value_at`].
pub fn levy_check(curves: &[ConcentrationCurve], eps_grid: &[f64], cfg: LevyConfig) -> LevyReport {
    let table: Vec<Vec<f64>> = curves
        .iter()
        .map(|c| eps_grid.iter().map(|&e| c.value_at(e)).collect())
        .collect();
    let is_levy_trend = !table.is_empty()
        && (0..eps_grid.len()).all(|j| {
            let column: Vec<f64> = table.iter().map(|row| row[j]).collect();
            column.last().is_some_and(|v| *v < cfg.threshold) && non_increasing_within(&column, cfg.slack)
        });
    LevyReport {
        is_levy_trend,
        table,
        eps_grid: eps_grid.to_vec(),
        threshold: cfg.threshold,
        slack: cfg.slack,
    }
}
