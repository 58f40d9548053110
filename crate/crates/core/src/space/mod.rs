//! Finite metric-measure spaces and the operations defined directly on them:
//! axiom validation, closed neighborhoods, measures, diameters and the
//! exhaustive concentration function.

mod curve;
mod exact;
pub(crate) mod kdtree;
mod metric;

pub use curve::{ConcentrationCurve, CurveKind};
pub use exact::{alpha_exact, alpha_exact_with_cap, exact_curve, DEFAULT_EXHAUSTIVE_CAP};
pub use metric::{Metric, SphereGeometry};

use crate::error::{Error, Result};
use rayon::prelude::*;

/// Tolerance on the total mass of a validated weight vector.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Inputs whose mass is within this distance of one are renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-9;
/// Slack absorbing float accumulation in the `mu(A) >= 1/2` test.
pub const HALF_MASS_TOL: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-10;
const TRIANGLE_TOL: f64 = 1e-9;
const MAX_REPORTED: usize = 64;
/// Dense matrices up to this size get the full cubic triangle check.
const TRIANGLE_CHECK_CAP: usize = 512;
/// Structured metrics are also spot-checked pairwise up to this size.
const STRUCTURAL_CHECK_CAP: usize = 64;

/// A finite set of labelled points with a metric and a probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMMSpace {
    labels: Vec<String>,
    metric: Metric,
    weights: Vec<f64>,
}

impl FiniteMMSpace {
    /// Builds a validated space.
    ///
    /// Weight vectors whose sum is within `1e-9` of one are renormalized with
    /// a warning. Anything else that breaks an axiom is rejected with the full
    /// violation list.
    pub fn new(labels: Vec<String>, metric: Metric, mut weights: Vec<f64>) -> Result<Self> {
        let total = stable_sum(weights.iter().copied());
        if (total - 1.0).abs() > WEIGHT_SUM_TOL
            && (total - 1.0).abs() <= RENORMALIZE_TOL
            && weights.iter().all(|w| *w >= 0.0)
        {
            log::warn!("renormalizing weights with total mass {total}");
            weights.iter_mut().for_each(|w| *w /= total);
        }
        let space = FiniteMMSpace {
            labels,
            metric,
            weights,
        };
        let violations = validate_space(&space);
        if violations.is_empty() {
            Ok(space)
        } else {
            Err(Error::InvalidSpace(violations))
        }
    }

    /// Wraps the parts without checking any axiom. Use [`validate_space`] to
    /// inspect the result.
    pub fn new_unchecked(labels: Vec<String>, metric: Metric, weights: Vec<f64>) -> Self {
        FiniteMMSpace {
            labels,
            metric,
            weights,
        }
    }

    /// Builds a validated space from a square matrix given as rows.
    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>], weights: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidSpace(vec![format!(
                "row {i} has length {}, expected {n}",
                row.len()
            )]));
        }
        let data = rows.iter().flatten().copied().collect();
        Self::new(labels, Metric::Matrix { n, data }, weights)
    }

    /// The one-point space.
    pub fn point() -> Self {
        FiniteMMSpace {
            labels: vec!["*".to_string()],
            metric: Metric::Matrix {
                n: 1,
                data: vec![0.0],
            },
            weights: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.metric.dist(i, j)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same points and metric, different measure.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.labels.clone(), self.metric.clone(), weights)
    }

    /// Dense row-major distance matrix.
    pub fn dist_matrix(&self) -> Vec<f64> {
        let n = self.len();
        if let Metric::Matrix { data, .. } = &self.metric {
            return data.clone();
        }
        let mut out = vec![0.0; n * n];
        out.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = self.metric.dist(i, j);
            }
        });
        out
    }

    /// Distances from point `i` to every point.
    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.len()).map(|j| self.dist(i, j)).collect()
    }

    /// A space is uniform when every point carries the same mass.
    pub fn is_uniform(&self) -> bool {
        let first = self.weights[0];
        self.weights.iter().all(|w| (w - first).abs() <= 1e-15)
    }
}

/// Compensated (Neumaier) summation; keeps long weight vectors within the
/// `1e-12` mass tolerance.
pub fn stable_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Lists every violated axiom. An empty list means the space is valid.
pub fn validate_space(space: &FiniteMMSpace) -> Vec<String> {
    let mut out = Vec::new();
    let n = space.weights.len();
    if n == 0 {
        out.push("space must contain at least one point".to_string());
        return out;
    }
    if space.labels.len() != n {
        out.push(format!(
            "label count {} does not match weight count {n}",
            space.labels.len()
        ));
    }
    if space.metric.len() != n {
        out.push(format!(
            "metric has {} points but weight vector has {n}",
            space.metric.len()
        ));
        return out;
    }
    if let Metric::Matrix { n: m, data } = &space.metric {
        if data.len() != m * m {
            out.push(format!("matrix data has {} entries, expected {}", data.len(), m * m));
            return out;
        }
    }

    for (i, w) in space.weights.iter().enumerate() {
        if !(w.is_finite() && *w >= 0.0) {
            out.push(format!("weight at {i} is negative or not finite ({w})"));
        }
    }
    let total = stable_sum(space.weights.iter().copied());
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        out.push(format!("weights sum to {total}, expected 1"));
    }

    match &space.metric {
        Metric::Matrix { .. } => check_pairs(space, &mut out),
        Metric::Hamming { word_len, .. } => {
            if *word_len == 0 {
                out.push("hamming words must have positive length".to_string());
            }
        }
        Metric::Sphere {
            ambient, coords, ..
        } => {
            for (i, p) in coords.chunks(*ambient).enumerate() {
                let norm: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-9 {
                    out.push(format!("sphere point {i} has norm {norm}, expected 1"));
                    if out.len() > MAX_REPORTED {
                        break;
                    }
                }
            }
        }
        Metric::OperatorNorm { order, entries } => {
            for (i, m) in entries.chunks(order * order).enumerate() {
                let q = nalgebra::DMatrix::from_row_slice(*order, *order, m);
                let err = (q.transpose() * &q - nalgebra::DMatrix::identity(*order, *order)).amax();
                if err > 1e-9 {
                    out.push(format!("matrix {i} is not orthogonal (error {err:e})"));
                }
            }
        }
    }
    if space.metric.is_structural() && n <= STRUCTURAL_CHECK_CAP && out.is_empty() {
        check_pairs(space, &mut out);
    }
    out.truncate(MAX_REPORTED);
    out
}

fn check_pairs(space: &FiniteMMSpace, out: &mut Vec<String>) {
    let n = space.len();
    let d = |i, j| space.metric.dist(i, j);
    let mut scale: f64 = 0.0;
    for i in 0..n {
        let dii = d(i, i);
        if dii != 0.0 {
            out.push(format!("nonzero diagonal at ({i},{i}): {dii}"));
        }
        for j in 0..n {
            let dij = d(i, j);
            if !(dij.is_finite() && dij >= 0.0) {
                out.push(format!("negative or non-finite distance at ({i},{j}): {dij}"));
                continue;
            }
            scale = scale.max(dij);
            if i < j {
                let dji = d(j, i);
                if (dij - dji).abs() > SYMMETRY_TOL * dij.abs().max(1.0) {
                    out.push(format!("symmetry violated at ({i},{j})"));
                }
                if dij == 0.0 {
                    out.push(format!("distinct points at zero distance at ({i},{j})"));
                }
            }
        }
        if out.len() > MAX_REPORTED {
            return;
        }
    }
    if n > TRIANGLE_CHECK_CAP {
        log::warn!("skipping cubic triangle check on {n} points");
        return;
    }
    let tol = TRIANGLE_TOL * scale.max(1.0);
    for i in 0..n {
        for k in (i + 1)..n {
            let dik = d(i, k);
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                if dik > d(i, j) + d(j, k) + tol {
                    out.push(format!("triangle inequality violated at ({i},{j},{k})"));
                    if out.len() > MAX_REPORTED {
                        return;
                    }
                }
            }
        }
    }
}

/// Indicator vector of a subset of a space's points.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    bits: Vec<bool>,
}

impl SubsetMask {
    pub fn empty(n: usize) -> Self {
        SubsetMask {
            bits: vec![false; n],
        }
    }

    pub fn full(n: usize) -> Self {
        SubsetMask {
            bits: vec![true; n],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        SubsetMask { bits }
    }

    /// Panics if an index is out of range.
    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = vec![false; n];
        for i in indices {
            bits[i] = true;
        }
        SubsetMask { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn insert(&mut self, i: usize) {
        self.bits[i] = true;
    }

    pub fn remove(&mut self, i: usize) {
        self.bits[i] = false;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.then_some(i))
    }

    pub fn complement(&self) -> Self {
        SubsetMask {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn intersect(&self, other: &SubsetMask) -> Self {
        SubsetMask {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect(),
        }
    }

    pub fn union(&self, other: &SubsetMask) -> Self {
        SubsetMask {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &SubsetMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }

    /// Image of the set under a point permutation (`i` maps to `perm[i]`).
    pub fn map(&self, perm: &[usize]) -> Self {
        let mut out = SubsetMask::empty(self.len());
        for i in self.iter() {
            out.bits[perm[i]] = true;
        }
        out
    }
}

fn check_mask(space: &FiniteMMSpace, set: &SubsetMask) -> Result<()> {
    if set.len() != space.len() {
        return Err(Error::MaskLength {
            expected: space.len(),
            got: set.len(),
        });
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps >= 0.0) || eps.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "eps must be a non-negative number, got {eps}"
        )));
    }
    Ok(())
}

/// Point sets of this size and above use a spatial index on embedded metrics.
const KD_THRESHOLD: usize = 256;

/// Closed ε-thickening `{x : d(x, A) <= eps}`.
pub fn neighborhood(space: &FiniteMMSpace, set: &SubsetMask, eps: f64) -> Result<SubsetMask> {
    check_mask(space, set)?;
    check_eps(eps)?;
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let members = set.indices();
    let n = space.len();

    if let Metric::Sphere {
        ambient, geometry, ..
    } = space.metric()
    {
        if members.len() >= KD_THRESHOLD {
            let coords: Vec<f64> = members
                .iter()
                .flat_map(|&i| space.metric.coords(i).unwrap().iter().copied())
                .collect();
            let tree = kdtree::KdTree::build(*ambient, coords);
            let radius = geometry.chord_radius(eps);
            let bits: Vec<bool> = (0..n)
                .into_par_iter()
                .map(|x| set.contains(x) || tree.any_within(space.metric.coords(x).unwrap(), radius))
                .collect();
            return Ok(SubsetMask::from_bits(bits));
        }
    }

    let bits: Vec<bool> = (0..n)
        .into_par_iter()
        .map(|x| set.contains(x) || members.iter().any(|&a| space.dist(x, a) <= eps))
        .collect();
    Ok(SubsetMask::from_bits(bits))
}

/// Total weight of the points in `set`.
pub fn measure(space: &FiniteMMSpace, set: &SubsetMask) -> f64 {
    stable_sum(set.iter().map(|i| space.weights[i]))
}

/// Largest pairwise distance.
pub fn diameter(space: &FiniteMMSpace) -> f64 {
    let n = space.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| space.dist(i, j))
                .fold(0.0_f64, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}
