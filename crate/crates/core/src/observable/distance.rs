use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hausdorff_of_table, me1_of_gaps, me1_of_spread, Normalization, Parametrization};
use crate::concentration::{non_increasing_within, LevyConfig, SearchConfig};
use crate::error::Result;
use crate::generators::stream_rng;
use crate::space::FiniteMMSpace;

/// Spaces up to this many points get two-point distance functions as well.
const PAIR_FAMILY_MAX_POINTS: usize = 12;
/// Coupling searches on at most this many cells enumerate polytope vertices.
const EXHAUSTIVE_CELLS: usize = 36;
const PRODUCT_COUPLING_MAX_CELLS: usize = 4096;
const BLOCK: usize = 16;
const STREAM_ATTEMPTS_PER_CANDIDATE: usize = 8;
/// Distance matrices up to this size are materialized for the McShane cap.
const CAP_MATRIX_MAX_POINTS: usize = 2048;

/// 1-Lipschitz functions vanishing at `anchor`: `d(., S) - d(anchor, S)` for
/// singletons (and pairs on small spaces), their negatives, and zero, each
/// passed through the McShane cap `x -> min_y v(y) + d(x, y)`.
pub fn lipschitz_extremes(space: &FiniteMMSpace, anchor: usize) -> Vec<Vec<f64>> {
    let mut seen = HashSet::new();
    base_family(space)
        .into_iter()
        .map(|v| {
            let shift = v[anchor];
            v.into_iter().map(|x| x - shift).collect::<Vec<f64>>()
        })
        .filter(|v| seen.insert(v.iter().map(|x| (x + 0.0).to_bits()).collect::<Vec<u64>>()))
        .collect()
}

/// Unanchored family: distance functions, negatives, zero; all capped.
fn base_family(space: &FiniteMMSpace) -> Vec<Vec<f64>> {
    let n = space.len();
    let matrix = (n <= CAP_MATRIX_MAX_POINTS).then(|| space.dist_matrix());
    let d = |x: usize, y: usize| match &matrix {
        Some(m) => m[x * n + y],
        None => space.dist(x, y),
    };
    let mut sets: Vec<Vec<usize>> = (0..n).map(|s| vec![s]).collect();
    if n <= PAIR_FAMILY_MAX_POINTS {
        for s in 0..n {
            for t in s + 1..n {
                sets.push(vec![s, t]);
            }
        }
    }
    let raw: Vec<Vec<f64>> = sets
        .iter()
        .map(|set| {
            (0..n)
                .map(|x| set.iter().map(|&s| d(x, s)).fold(f64::INFINITY, f64::min))
                .collect()
        })
        .collect();
    let mut family: Vec<Vec<f64>> = raw
        .iter()
        .cloned()
        .chain(raw.iter().map(|v| v.iter().map(|x| -x).collect()))
        .collect();
    family.push(vec![0.0; n]);
    family
        .into_par_iter()
        .map(|v| {
            (0..n)
                .map(|x| (0..n).map(|y| v[y] + d(x, y)).fold(f64::INFINITY, f64::min))
                .collect()
        })
        .collect()
}

/// Best upper estimate found, with the coupling and parametrizations behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsDistance {
    pub upper: f64,
    pub normalization: Normalization,
    /// Points owning the interval at 0 in each parametrization.
    pub anchors: (usize, usize),
    /// Support cells `(x, y, mass)` in interval order.
    pub coupling: Vec<(usize, usize, f64)>,
    pub parametrizations: (Parametrization, Parametrization),
    pub candidates_evaluated: usize,
}

/// Upper estimate of the observable distance, comparing functions up to
/// additive constants.
pub fn obs_distance(x: &FiniteMMSpace, y: &FiniteMMSpace, cfg: &SearchConfig) -> Result<ObsDistance> {
    obs_distance_with(x, y, cfg, Normalization::default())
}

/// Searches parametrization pairs induced by couplings of the two weight
/// vectors and reports the smallest Hausdorff distance between the pushed
/// function families.
///
/// Candidates form a fixed stream (identity northwest corner, product, then
/// polytope vertices or seeded orderings); `cfg.budget` truncates it, so a
/// larger budget never raises the result.
pub fn obs_distance_with(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    cfg: &SearchConfig,
    norm: Normalization,
) -> Result<ObsDistance> {
    let fx = base_family(x);
    let fy = base_family(y);
    let budget = cfg.budget.max(1);
    let mut search = Search {
        fx: &fx,
        fy: &fy,
        norm,
        best: None,
        evaluated: 0,
        seen: HashSet::new(),
    };

    let identity = Orders::identity(x.len(), y.len());
    search.consider(vec![Candidate::with_orders(x, y, identity.clone())], budget);
    if x.len() * y.len() <= PRODUCT_COUPLING_MAX_CELLS {
        search.consider(vec![Candidate::product(x, y)], budget);
    }
    if x.len() * y.len() <= EXHAUSTIVE_CELLS {
        let vertices = polytope_vertices(x.weights(), y.weights(), budget);
        for chunk in vertices.chunks(BLOCK) {
            let block = chunk.iter().map(|cells| Candidate { cells: cells.clone(), orders: None }).collect();
            search.consider(block, budget);
        }
    } else {
        let mut best_orders = identity;
        let mut block_index = 0u64;
        // repeated couplings are skipped, so bound the number of attempts
        let attempts = (budget * STREAM_ATTEMPTS_PER_CANDIDATE).div_ceil(BLOCK) as u64;
        while search.evaluated < budget && block_index < attempts {
            let base = block_index * BLOCK as u64;
            let block: Vec<Candidate> = (0..BLOCK as u64)
                .map(|t| {
                    let mut rng = stream_rng(cfg.seed, base + t);
                    let orders = if block_index % 2 == 0 {
                        Orders::shuffled(x.len(), y.len(), &mut rng)
                    } else {
                        best_orders.neighbor(&mut rng)
                    };
                    Candidate::with_orders(x, y, orders)
                })
                .collect();
            search.consider(block, budget);
            if let Some(o) = search.best.as_ref().and_then(|b| b.candidate.orders.clone()) {
                best_orders = o;
            }
            block_index += 1;
        }
    }

    let best = search.best.expect("at least one candidate is evaluated");
    let mut cells = best.candidate.cells;
    if let Some(k) = best.anchor_cell {
        let first = cells.remove(k);
        cells.insert(0, first);
    }
    let parametrizations = Parametrization::pair_from_cells(x, y, &cells)?;
    Ok(ObsDistance {
        upper: best.value,
        normalization: norm,
        anchors: (parametrizations.0.anchor(), parametrizations.1.anchor()),
        coupling: cells,
        parametrizations,
        candidates_evaluated: search.evaluated,
    })
}

#[derive(Debug, Clone, PartialEq)]
struct Orders {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl Orders {
    fn identity(m: usize, n: usize) -> Self {
        Orders {
            rows: (0..m).collect(),
            cols: (0..n).collect(),
        }
    }

    fn shuffled<R: Rng>(m: usize, n: usize, rng: &mut R) -> Self {
        let mut o = Orders::identity(m, n);
        o.rows.shuffle(rng);
        o.cols.shuffle(rng);
        o
    }

    /// Adjacent transposition in one of the two orders.
    fn neighbor<R: Rng>(&self, rng: &mut R) -> Self {
        let mut o = self.clone();
        let side = if o.rows.len() < 2 || (o.cols.len() >= 2 && rng.random_bool(0.5)) {
            &mut o.cols
        } else {
            &mut o.rows
        };
        if side.len() >= 2 {
            let k = rng.random_range(0..side.len() - 1);
            side.swap(k, k + 1);
        }
        o
    }
}

struct Candidate {
    cells: Vec<(usize, usize, f64)>,
    orders: Option<Orders>,
}

impl Candidate {
    fn with_orders(x: &FiniteMMSpace, y: &FiniteMMSpace, orders: Orders) -> Self {
        Candidate {
            cells: northwest_corner(x.weights(), y.weights(), &orders),
            orders: Some(orders),
        }
    }

    fn product(x: &FiniteMMSpace, y: &FiniteMMSpace) -> Self {
        let cells = (0..x.len())
            .flat_map(|i| (0..y.len()).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, x.weights()[i] * y.weights()[j]))
            .filter(|c| c.2 > 0.0)
            .collect();
        Candidate { cells, orders: None }
    }
}

/// Northwest-corner coupling after reordering rows and columns; positive cells only.
fn northwest_corner(a: &[f64], b: &[f64], orders: &Orders) -> Vec<(usize, usize, f64)> {
    let mut ra: Vec<f64> = orders.rows.iter().map(|&i| a[i]).collect();
    let mut rb: Vec<f64> = orders.cols.iter().map(|&j| b[j]).collect();
    let (m, n) = (ra.len(), rb.len());
    let (mut p, mut q) = (0, 0);
    let mut cells = Vec::with_capacity(m + n);
    while p < m && q < n {
        let x = ra[p].min(rb[q]);
        if x > 0.0 {
            cells.push((orders.rows[p], orders.cols[q], x));
        }
        if p == m - 1 && q == n - 1 {
            break;
        }
        if q == n - 1 || (p < m - 1 && ra[p] <= rb[q]) {
            rb[q] -= x;
            ra[p] = 0.0;
            p += 1;
        } else {
            ra[p] -= x;
            rb[q] = 0.0;
            q += 1;
        }
    }
    cells
}

/// Distinct vertices of the coupling polytope, by repeated cell saturation,
/// in depth-first order, at most `limit` of them.
fn polytope_vertices(a: &[f64], b: &[f64], limit: usize) -> Vec<Vec<(usize, usize, f64)>> {
    fn walk(
        a: &mut Vec<f64>,
        b: &mut Vec<f64>,
        cells: &mut Vec<(usize, usize, f64)>,
        visited: &mut HashSet<Vec<(usize, usize)>>,
        found: &mut HashMap<Vec<(usize, usize)>, ()>,
        out: &mut Vec<Vec<(usize, usize, f64)>>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        // the saturated cells determine the partial coupling
        let mut key: Vec<(usize, usize)> = cells.iter().map(|c| (c.0, c.1)).collect();
        key.sort_unstable();
        if !visited.insert(key) {
            return;
        }
        let open_rows: Vec<usize> = (0..a.len()).filter(|&i| a[i] > 0.0).collect();
        let open_cols: Vec<usize> = (0..b.len()).filter(|&j| b[j] > 0.0).collect();
        if open_rows.is_empty() || open_cols.is_empty() {
            let mut sorted = cells.clone();
            sorted.sort_by(|p, q| (p.0, p.1).cmp(&(q.0, q.1)));
            let support: Vec<(usize, usize)> = sorted.iter().map(|c| (c.0, c.1)).collect();
            if found.insert(support, ()).is_none() {
                out.push(sorted);
            }
            return;
        }
        // the last open row or column takes the remainder exactly
        if open_rows.len() == 1 || open_cols.len() == 1 {
            let mut tail = cells.clone();
            for &i in &open_rows {
                for &j in &open_cols {
                    let x = if open_rows.len() == 1 { b[j] } else { a[i] };
                    tail.push((i, j, x));
                }
            }
            let (mut za, mut zb) = (vec![0.0; a.len()], vec![0.0; b.len()]);
            return walk(&mut za, &mut zb, &mut tail, visited, found, out, limit);
        }
        for &i in &open_rows {
            for &j in &open_cols {
                let (ai, bj) = (a[i], b[j]);
                let x = ai.min(bj);
                if ai <= bj {
                    a[i] = 0.0;
                    b[j] = bj - x;
                } else {
                    b[j] = 0.0;
                    a[i] = ai - x;
                }
                cells.push((i, j, x));
                walk(a, b, cells, visited, found, out, limit);
                cells.pop();
                a[i] = ai;
                b[j] = bj;
            }
        }
    }
    let mut out = Vec::new();
    walk(
        &mut a.to_vec(),
        &mut b.to_vec(),
        &mut Vec::new(),
        &mut HashSet::new(),
        &mut HashMap::new(),
        &mut out,
        limit,
    );
    out
}

struct Best {
    value: f64,
    anchor_cell: Option<usize>,
    candidate: Candidate,
}

struct Search<'a> {
    fx: &'a [Vec<f64>],
    fy: &'a [Vec<f64>],
    norm: Normalization,
    best: Option<Best>,
    evaluated: usize,
    seen: HashSet<Vec<(usize, usize, u64)>>,
}

impl Search<'_> {
    /// Evaluates the unseen couplings of a block (truncated to the remaining
    /// budget) and keeps the first strict improvement in stream order.
    fn consider(&mut self, block: Vec<Candidate>, budget: usize) {
        let mut block: Vec<Candidate> = block
            .into_iter()
            .filter(|c| {
                let mut key: Vec<(usize, usize, u64)> = c.cells.iter().map(|&(i, j, m)| (i, j, m.to_bits())).collect();
                key.sort_unstable();
                self.seen.insert(key)
            })
            .collect();
        block.truncate(budget.saturating_sub(self.evaluated));
        self.evaluated += block.len();
        let scores: Vec<(f64, Option<usize>)> = block.par_iter().map(|c| self.score(&c.cells)).collect();
        for (candidate, (value, anchor_cell)) in block.into_iter().zip(scores) {
            if self.best.as_ref().is_none_or(|b| value < b.value) {
                self.best = Some(Best {
                    value,
                    anchor_cell,
                    candidate,
                });
            }
        }
    }

    fn score(&self, cells: &[(usize, usize, f64)]) -> (f64, Option<usize>) {
        match self.norm {
            Normalization::ModuloConstants => (
                self.hausdorff(|f, g| {
                    me1_of_spread(cells.iter().map(|&(i, j, m)| (f[i] - g[j], m)).collect())
                }),
                None,
            ),
            Normalization::Anchored => (0..cells.len())
                .map(|k| {
                    let (i0, j0, _) = cells[k];
                    let value = self.hausdorff(|f, g| {
                        me1_of_gaps(
                            cells
                                .iter()
                                .map(|&(i, j, m)| (((f[i] - f[i0]) - (g[j] - g[j0])).abs(), m))
                                .collect(),
                        )
                    });
                    (value, Some(k))
                })
                .fold((f64::INFINITY, None), |acc, c| if c.0 < acc.0 { c } else { acc }),
        }
    }

    fn hausdorff(&self, dist: impl Fn(&[f64], &[f64]) -> f64 + Sync) -> f64 {
        let table: Vec<Vec<f64>> = self
            .fx
            .iter()
            .map(|f| self.fy.iter().map(|g| dist(f, g)).collect())
            .collect();
        hausdorff_of_table(&table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Upper estimates of the distance from each space to the one-point space.
    pub dists: Vec<f64>,
    /// Non-increasing up to the Lévy slack, and ending below where it started.
    pub decreasing_trend: bool,
    pub slack: f64,
}

/// Estimates the distance from each space to the one-point space.
pub fn levy_convergence_test(spaces: &[FiniteMMSpace], cfg: &SearchConfig) -> Result<ConvergenceReport> {
    let point = FiniteMMSpace::point();
    let dists = spaces
        .iter()
        .map(|s| obs_distance(s, &point, cfg).map(|d| d.upper))
        .collect::<Result<Vec<f64>>>()?;
    let slack = LevyConfig::default().slack;
    let decreasing_trend = match (dists.first(), dists.last()) {
        (Some(first), Some(last)) => last < first && non_increasing_within(&dists, slack),
        _ => false,
    };
    Ok(ConvergenceReport {
        dists,
        decreasing_trend,
        slack,
    })
}
