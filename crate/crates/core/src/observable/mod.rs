//! Convergence in measure on `[0, 1]` and the observable distance between spaces.

mod distance;

pub use distance::{
    levy_convergence_test, lipschitz_extremes, obs_distance, obs_distance_with, ConvergenceReport,
    ObsDistance,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{stable_sum, FiniteMMSpace};

/// Tolerance on interval lengths versus point weights.
pub const PUSHFORWARD_TOL: f64 = 1e-9;

/// How 1-Lipschitz functions are normalized before they are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Functions vanish at the point owning the interval that contains 0.
    Anchored,
    /// Functions are compared up to an additive constant.
    #[default]
    ModuloConstants,
}

/// Piecewise-constant function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep")]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawStep {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawStep> for StepFunction {
    type Error = Error;
    fn try_from(raw: RawStep) -> Result<Self> {
        StepFunction::new(raw.breaks, raw.values)
    }
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("step function: {m}")));
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return bad("need one more breakpoint than values");
        }
        if breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
            return bad("breakpoints must run from 0 to 1");
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("breakpoints must be strictly ascending");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return bad("values must be finite");
        }
        Ok(StepFunction { breaks, values })
    }

    pub fn constant(c: f64) -> Self {
        StepFunction {
            breaks: vec![0.0, 1.0],
            values: vec![c],
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pieces of the common refinement as `(length, self value, other value)`.
    fn refine<'a>(&'a self, other: &'a StepFunction) -> Vec<(f64, f64, f64)> {
        let (mut i, mut j) = (0, 0);
        let mut left = 0.0;
        let mut out = Vec::with_capacity(self.values.len() + other.values.len());
        while i < self.values.len() && j < other.values.len() {
            let right = self.breaks[i + 1].min(other.breaks[j + 1]);
            if right > left {
                out.push((right - left, self.values[i], other.values[j]));
            }
            left = right;
            if self.breaks[i + 1] == right {
                i += 1;
            }
            if other.breaks[j + 1] == right {
                j += 1;
            }
        }
        out
    }
}

/// `inf { lambda > 0 : Leb{|h1 - h2| > lambda} < lambda }`.
pub fn me1(h1: &StepFunction, h2: &StepFunction) -> f64 {
    let pieces: Vec<(f64, f64)> = h1
        .refine(h2)
        .into_iter()
        .map(|(len, a, b)| ((a - b).abs(), len))
        .collect();
    me1_of_gaps(pieces)
}

/// [`me1`] minimized over constant shifts of `h2`.
pub fn me1_modulo_constants(h1: &StepFunction, h2: &StepFunction) -> f64 {
    let pieces: Vec<(f64, f64)> = h1
        .refine(h2)
        .into_iter()
        .map(|(len, a, b)| (a - b, len))
        .collect();
    me1_of_spread(pieces)
}

pub fn function_distance(h1: &StepFunction, h2: &StepFunction, norm: Normalization) -> f64 {
    match norm {
        Normalization::Anchored => me1(h1, h2),
        Normalization::ModuloConstants => me1_modulo_constants(h1, h2),
    }
}

/// [`me1`] of a function given as `(|value|, mass)` pieces against zero.
///
/// With `u_0 = 0 < u_1 < ...` the distinct gap values and `D_k` the mass
/// strictly above `u_k`, the defining set meets `[u_k, u_{k+1})` exactly in
/// `(D_k, u_{k+1})`, so the first `k` with `D_k < u_{k+1}` gives `max(u_k, D_k)`.
pub(crate) fn me1_of_gaps(mut pieces: Vec<(f64, f64)>) -> f64 {
    pieces.retain(|p| p.1 > 0.0);
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut above = vec![0.0; pieces.len() + 1];
    for k in (0..pieces.len()).rev() {
        above[k] = above[k + 1] + pieces[k].1;
    }
    let mut k = pieces.partition_point(|p| p.0 <= 0.0);
    let mut level: f64 = 0.0;
    while k < pieces.len() {
        let next = pieces[k].0;
        let mass_above = above[k];
        if mass_above < next {
            return level.max(mass_above);
        }
        level = next;
        while k < pieces.len() && pieces[k].0 == next {
            k += 1;
        }
    }
    level.max(above[k])
}

/// Smallest [`me1`] of `g - c` against zero over all constants `c`, for `g`
/// given as `(value, mass)` pieces.
///
/// For a window of sorted values `[v_i, v_j]` centred at `c`, every
/// `lambda >= max((v_j - v_i) / 2, mass outside)` qualifies, and every
/// qualifying pair `(c, lambda)` dominates some window; the minimum over
/// windows, capped at 1 for the empty window, is the answer.
pub(crate) fn me1_of_spread(mut pieces: Vec<(f64, f64)>) -> f64 {
    pieces.retain(|p| p.1 > 0.0);
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut values: Vec<f64> = Vec::new();
    let mut masses: Vec<f64> = Vec::new();
    for (v, m) in pieces {
        if values.last() == Some(&v) {
            *masses.last_mut().unwrap() += m;
        } else {
            values.push(v);
            masses.push(m);
        }
    }
    let k = values.len();
    let mut below = vec![0.0; k + 1];
    for t in 0..k {
        below[t + 1] = below[t] + masses[t];
    }
    let mut above = vec![0.0; k + 1];
    for t in (0..k).rev() {
        above[t] = above[t + 1] + masses[t];
    }
    let cost = |i: usize, j: usize| -> (f64, f64) { ((values[j] - values[i]) / 2.0, below[i] + above[j + 1]) };

    let mut best: f64 = 1.0;
    let mut j = 0;
    for i in 0..k {
        j = j.max(i);
        while j + 1 < k && {
            let (half, out) = cost(i, j);
            half < out
        } {
            j += 1;
        }
        let (half, out) = cost(i, j);
        best = best.min(half.max(out));
        if j > i {
            let (half, out) = cost(i, j - 1);
            best = best.min(half.max(out));
        }
    }
    best.min(1.0)
}

/// Measurable map from `[0, 1]` onto a finite space, given by consecutive
/// intervals and the point that owns each one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parametrization {
    pub breaks: Vec<f64>,
    pub owners: Vec<usize>,
}

impl Parametrization {
    /// Checks that the pushforward of Lebesgue measure is the space's weight vector.
    pub fn new(space: &FiniteMMSpace, lengths: &[f64], owners: Vec<usize>) -> Result<Self> {
        if lengths.len() != owners.len() || owners.is_empty() {
            return Err(Error::InvalidArgument("parametrization needs one owner per interval".into()));
        }
        if let Some(&o) = owners.iter().find(|&&o| o >= space.len()) {
            return Err(Error::InvalidArgument(format!("owner {o} is not a point")));
        }
        let mut pushed = vec![0.0; space.len()];
        for (&len, &o) in lengths.iter().zip(&owners) {
            if !(len > 0.0) {
                return Err(Error::InvalidArgument("interval lengths must be positive".into()));
            }
            pushed[o] += len;
        }
        if let Some(i) = (0..space.len()).find(|&i| (pushed[i] - space.weights()[i]).abs() > PUSHFORWARD_TOL) {
            return Err(Error::MarginalMismatch(format!(
                "intervals give point {i} mass {} instead of {}",
                pushed[i],
                space.weights()[i]
            )));
        }
        Ok(Parametrization {
            breaks: breaks_from_lengths(lengths),
            owners,
        })
    }

    /// The interval partition refining both marginals of a coupling, one
    /// interval per support cell, in the given cell order.
    pub fn pair_from_cells(
        x: &FiniteMMSpace,
        y: &FiniteMMSpace,
        cells: &[(usize, usize, f64)],
    ) -> Result<(Parametrization, Parametrization)> {
        let lengths: Vec<f64> = cells.iter().map(|c| c.2).collect();
        Ok((
            Parametrization::new(x, &lengths, cells.iter().map(|c| c.0).collect())?,
            Parametrization::new(y, &lengths, cells.iter().map(|c| c.1).collect())?,
        ))
    }

    /// The point whose interval contains 0.
    pub fn anchor(&self) -> usize {
        self.owners[0]
    }

    /// `h o f` for `h` given by its values on the points.
    pub fn pushforward(&self, values: &[f64]) -> StepFunction {
        StepFunction {
            breaks: self.breaks.clone(),
            values: self.owners.iter().map(|&o| values[o]).collect(),
        }
    }
}

fn breaks_from_lengths(lengths: &[f64]) -> Vec<f64> {
    let mut breaks = Vec::with_capacity(lengths.len() + 1);
    breaks.push(0.0);
    let mut acc = 0.0;
    for (k, &len) in lengths.iter().enumerate() {
        acc += len;
        breaks.push(if k + 1 == lengths.len() { 1.0 } else { acc.min(1.0) });
    }
    // rounding can collapse a tiny interval; nudge to keep breakpoints strict
    for k in 1..breaks.len() {
        if breaks[k] <= breaks[k - 1] {
            breaks[k] = f64::from_bits(breaks[k - 1].to_bits() + 1);
        }
    }
    breaks
}

/// Pushforwards of 1-Lipschitz functions through one parametrization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzSet {
    pub members: Vec<StepFunction>,
}

impl LipschitzSet {
    /// The family from [`lipschitz_extremes`], anchored at the parametrization's
    /// anchor, pushed through it.
    pub fn from_space(space: &FiniteMMSpace, param: &Parametrization) -> Self {
        LipschitzSet {
            members: lipschitz_extremes(space, param.anchor())
                .iter()
                .map(|v| param.pushforward(v))
                .collect(),
        }
    }
}

/// Hausdorff distance in [`me1`] between two finite function sets.
pub fn hausdorff_me1(a: &LipschitzSet, b: &LipschitzSet) -> Result<f64> {
    hausdorff_with(a, b, Normalization::Anchored)
}

pub fn hausdorff_with(a: &LipschitzSet, b: &LipschitzSet, norm: Normalization) -> Result<f64> {
    if a.members.is_empty() || b.members.is_empty() {
        return Err(Error::InvalidArgument("Hausdorff distance of an empty function set".into()));
    }
    let table: Vec<Vec<f64>> = a
        .members
        .iter()
        .map(|f| b.members.iter().map(|g| function_distance(f, g, norm)).collect())
        .collect();
    Ok(hausdorff_of_table(&table))
}

/// `max(sup_a min_b, sup_b min_a)` of a distance table.
pub(crate) fn hausdorff_of_table(table: &[Vec<f64>]) -> f64 {
    let forward = table
        .iter()
        .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let cols = table.first().map_or(0, Vec::len);
    let backward = (0..cols)
        .map(|j| table.iter().map(|row| row[j]).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    forward.max(backward)
}

/// Total length of a step function's pieces; 1 up to rounding.
pub fn total_length(f: &StepFunction) -> f64 {
    stable_sum(f.breaks.windows(2).map(|w| w[1] - w[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn me1_examples() {
        let zero = StepFunction::constant(0.0);
        assert_eq!(me1(&zero, &zero), 0.0);
        for c in [0.1, 0.5, 1.0] {
            assert_eq!(me1(&zero, &StepFunction::constant(c)), c);
        }
        assert_eq!(me1(&zero, &StepFunction::constant(3.0)), 1.0);
        let bump = StepFunction::new(vec![0.0, 0.3, 1.0], vec![0.5, 0.0]).unwrap();
        assert!((me1(&zero, &bump) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn modulo_constants_ignores_shifts() {
        let f = StepFunction::new(vec![0.0, 0.25, 0.75, 1.0], vec![0.0, 0.5, 1.0]).unwrap();
        let shifted = StepFunction::new(f.breaks.clone(), f.values.iter().map(|v| v + 7.0).collect()).unwrap();
        assert_eq!(me1_modulo_constants(&f, &shifted), 0.0);
        // window [0, 0.5] or [0.5, 1]: half-width 0.25, outside mass 0.25
        assert_eq!(me1_modulo_constants(&f, &StepFunction::constant(0.0)), 0.25);
    }

    #[test]
    fn rejects_malformed_steps() {
        assert!(StepFunction::new(vec![0.0, 1.0], vec![]).is_err());
        assert!(StepFunction::new(vec![0.0, 0.5], vec![1.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 0.5, 0.5, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        let json = r#"{"breaks":[0.0,0.4,1.0],"values":[1.0,2.0]}"#;
        let f: StepFunction = serde_json::from_str(json).unwrap();
        assert_eq!(serde_json::to_string(&f).unwrap(), json);
        assert!(serde_json::from_str::<StepFunction>(r#"{"breaks":[0.0,2.0],"values":[1.0]}"#).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let zero = LipschitzSet {
            members: vec![StepFunction::constant(0.0)],
        };
        let both = LipschitzSet {
            members: vec![StepFunction::constant(0.0), StepFunction::constant(0.5)],
        };
        assert_eq!(hausdorff_me1(&zero, &zero).unwrap(), 0.0);
        assert_eq!(hausdorff_me1(&zero, &both).unwrap(), 0.5);
        assert_eq!(hausdorff_me1(&both, &zero).unwrap(), 0.5);
        let empty = LipschitzSet { members: vec![] };
        assert!(hausdorff_me1(&zero, &empty).is_err());
    }

    #[test]
    fn parametrization_checks_pushforward() {
        let cube = crate::generators::hamming_cube(1).unwrap();
        let p = Parametrization::new(&cube, &[0.25, 0.5, 0.25], vec![0, 1, 0]).unwrap();
        assert_eq!(p.breaks, vec![0.0, 0.25, 0.75, 1.0]);
        assert_eq!(p.anchor(), 0);
        assert!(Parametrization::new(&cube, &[0.25, 0.75], vec![0, 1]).is_err());
        let f = p.pushforward(&[0.0, 1.0]);
        assert_eq!(f.values(), &[0.0, 1.0, 0.0]);
        assert_eq!(total_length(&f), 1.0);
    }

    fn step() -> impl Strategy<Value = StepFunction> {
        (1usize..6)
            .prop_flat_map(|k| {
                (
                    proptest::collection::btree_set(1u32..1000, k - 1),
                    proptest::collection::vec(-2.0f64..2.0, k),
                )
            })
            .prop_map(|(cuts, values)| {
                let mut breaks = vec![0.0];
                breaks.extend(cuts.into_iter().map(|c| c as f64 / 1000.0));
                breaks.push(1.0);
                StepFunction::new(breaks, values).unwrap()
            })
    }

    /// Direct evaluation of the defining infimum on a fine grid of lambdas
    /// plus every candidate value, for cross-checking.
    fn me1_scan(h1: &StepFunction, h2: &StepFunction) -> f64 {
        let pieces = h1.refine(h2);
        let g = |lambda: f64| -> f64 {
            pieces
                .iter()
                .filter(|p| (p.1 - p.2).abs() > lambda)
                .map(|p| p.0)
                .sum()
        };
        let mut candidates: Vec<f64> = pieces.iter().map(|p| (p.1 - p.2).abs()).collect();
        candidates.extend((0..=2000).map(|k| k as f64 / 2000.0));
        let mut above_mass: Vec<f64> = candidates.iter().map(|&c| g(c)).collect();
        candidates.append(&mut above_mass);
        candidates
            .into_iter()
            .filter(|&l| l > 0.0)
            .flat_map(|l| [l, l + 1e-12])
            .filter(|&l| g(l) < l)
            .fold(1.0 + 1e-12, f64::min)
    }

    proptest! {
        #[test]
        fn me1_is_a_metric(a in step(), b in step(), c in step()) {
            prop_assert_eq!(me1(&a, &a), 0.0);
            prop_assert_eq!(me1(&a, &b), me1(&b, &a));
            prop_assert!(me1(&a, &c) <= me1(&a, &b) + me1(&b, &c) + 1e-9);
            prop_assert!(me1(&a, &b) <= 1.0);
        }

        #[test]
        fn me1_matches_scan(a in step(), b in step()) {
            let fast = me1(&a, &b);
            prop_assert!((fast - me1_scan(&a, &b)).abs() <= 1e-9, "{} vs {}", fast, me1_scan(&a, &b));
        }

        #[test]
        fn modulo_constants_matches_shift_scan(a in step(), b in step()) {
            let fast = me1_modulo_constants(&a, &b);
            prop_assert!(fast <= me1(&a, &b) + 1e-12);
            // every candidate optimal shift is the midpoint of two piece differences
            let diffs: Vec<f64> = a.refine(&b).iter().map(|p| p.1 - p.2).collect();
            let mut slow = 1.0f64;
            for x in &diffs {
                for y in &diffs {
                    let shifted = StepFunction::new(b.breaks.clone(), b.values.iter().map(|v| v + (x + y) / 2.0).collect()).unwrap();
                    slow = slow.min(me1(&a, &shifted));
                }
            }
            prop_assert!((fast - slow).abs() <= 1e-9, "{} vs {}", fast, slow);
        }
    }
}
