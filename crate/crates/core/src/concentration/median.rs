use super::cube::{cube_alpha_exact, uniform_cube_dimension};
use crate::error::{Error, Result};
use crate::space::{alpha_exact, stable_sum, FiniteMMSpace, DEFAULT_EXHAUSTIVE_CAP, HALF_MASS_TOL};
use serde::{Deserialize, Serialize};

const LIPSCHITZ_REL_TOL: f64 = 1e-9;

/// Real function on a space's points with a verified Lipschitz constant.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzFunction {
    values: Vec<f64>,
    constant: f64,
}

impl LipschitzFunction {
    /// Checks `|f(i) - f(j)| <= constant * d(i, j)` for all pairs, up to a
    /// relative tolerance of `1e-9`.
    pub fn new(space: &FiniteMMSpace, values: Vec<f64>, constant: f64) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::InvalidArgument(format!(
                "function has {} values for {} points",
                values.len(),
                space.len()
            )));
        }
        if !(constant > 0.0) || !constant.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Lipschitz constant must be positive, got {constant}"
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("value at {bad} is not finite")));
        }
        for i in 0..values.len() {
            for j in (i + 1)..values.len() {
                let bound = constant * space.dist(i, j);
                let gap = (values[i] - values[j]).abs();
                if gap > bound * (1.0 + LIPSCHITZ_REL_TOL) + f64::EPSILON * gap {
                    return Err(Error::InvalidArgument(format!(
                        "Lipschitz bound {constant} violated at ({i},{j}): |f_i - f_j| = {gap}, d = {}",
                        space.dist(i, j)
                    )));
                }
            }
        }
        Ok(LipschitzFunction { values, constant })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }
}

/// Smallest attained value `M` with `mu{f >= M} >= 1/2` and `mu{f <= M} >= 1/2`.
pub fn median(space: &FiniteMMSpace, f: &LipschitzFunction) -> f64 {
    median_of(space.weights(), f.values())
}

pub(crate) fn median_of(weights: &[f64], values: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    // walk distinct values upward, tracking mass strictly below
    let mut below = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let v = values[order[k]];
        let start = k;
        while k < order.len() && values[order[k]] == v {
            k += 1;
        }
        let at_or_below = stable_sum(below.iter().copied().chain(order[start..k].iter().map(|&i| weights[i])));
        let at_or_above = 1.0 - stable_sum(below.iter().copied());
        if at_or_below >= 0.5 - HALF_MASS_TOL && at_or_above >= 0.5 - HALF_MASS_TOL {
            return v;
        }
        below.extend(order[start..k].iter().map(|&i| weights[i]));
    }
    // unreachable for a probability vector; the largest value always qualifies
    values[*order.last().expect("non-empty space")]
}

/// Provenance of the concentration value used in a tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Exhaustive subset enumeration.
    Exact,
    /// Exact extremal-set computation on a uniform Hamming cube.
    ExactCube,
    /// The universal bound `alpha <= 1/2`; used beyond exhaustive range.
    TrivialUpper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub median: f64,
    pub tail_mass: f64,
    pub bound: f64,
    pub holds: bool,
    pub bound_kind: BoundKind,
}

/// Compares `mu{|f - M_f| > eps}` against `2 alpha(eps)` for a function with
/// Lipschitz constant at most one.
pub fn tail_check(space: &FiniteMMSpace, f: &LipschitzFunction, eps: f64) -> Result<TailCheck> {
    if f.constant() > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "tail inequality needs a 1-Lipschitz function; rescale (constant {})",
            f.constant()
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let m = median(space, f);
    let tail_mass = stable_sum(
        f.values()
            .iter()
            .zip(space.weights())
            .filter(|(v, _)| (**v - m).abs() > eps)
            .map(|(_, w)| *w),
    );
    let (alpha, bound_kind) = if space.len() <= DEFAULT_EXHAUSTIVE_CAP {
        (alpha_exact(space, eps)?, BoundKind::Exact)
    } else if let Some(n) = uniform_cube_dimension(space) {
        (cube_alpha_exact(n, eps)?, BoundKind::ExactCube)
    } else {
        (0.5, BoundKind::TrivialUpper)
    };
    let bound = 2.0 * alpha;
    Ok(TailCheck {
        median: m,
        tail_mass,
        bound,
        holds: tail_mass <= bound + 1e-12,
        bound_kind,
    })
}
