//! Transportation (earth mover's) distance between measures on a finite space.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{stable_sum, FiniteMMSpace};

/// Marginal tolerance for measures and couplings.
pub const MARGINAL_TOL: f64 = 1e-9;
/// Largest space accepted by [`emd_oracle`].
pub const ORACLE_MAX_POINTS: usize = 6;

/// Two probability vectors over the same space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurePair {
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
}

impl MeasurePair {
    pub fn new(space: &FiniteMMSpace, mu1: Vec<f64>, mu2: Vec<f64>) -> Result<Self> {
        check_probability(space.len(), &mu1, "mu1")?;
        check_probability(space.len(), &mu2, "mu2")?;
        Ok(MeasurePair { mu1, mu2 })
    }
}

fn check_probability(n: usize, mu: &[f64], name: &str) -> Result<()> {
    if mu.len() != n {
        return Err(Error::MarginalMismatch(format!(
            "{name} has {} entries for a space of {n} points",
            mu.len()
        )));
    }
    if let Some(i) = mu.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::MarginalMismatch(format!("{name}[{i}] = {} is not a non-negative number", mu[i])));
    }
    let total = stable_sum(mu.iter().copied());
    if (total - 1.0).abs() > MARGINAL_TOL {
        return Err(Error::MarginalMismatch(format!("{name} sums to {total}")));
    }
    Ok(())
}

/// Joint measure on a product of two finite sets, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub rows: usize,
    pub cols: usize,
    pub joint: Vec<f64>,
}

impl Coupling {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Coupling {
            rows,
            cols,
            joint: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.joint[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.joint
            .chunks(self.cols.max(1))
            .map(|r| stable_sum(r.iter().copied()))
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| stable_sum((0..self.rows).map(|i| self.get(i, j))))
            .collect()
    }

    /// Whether the coupling is non-negative with the given marginals.
    pub fn has_marginals(&self, mu1: &[f64], mu2: &[f64], tol: f64) -> bool {
        self.joint.iter().all(|&v| v >= 0.0)
            && mu1.len() == self.rows
            && mu2.len() == self.cols
            && self.row_sums().iter().zip(mu1).all(|(a, b)| (a - b).abs() <= tol)
            && self.col_sums().iter().zip(mu2).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Total cost against a row-major cost matrix.
    pub fn cost(&self, cost: &[f64]) -> f64 {
        stable_sum(self.joint.iter().zip(cost).map(|(x, c)| x * c))
    }

    /// Non-zero cells as `(row, col, mass)`.
    pub fn support(&self) -> Vec<(usize, usize, f64)> {
        (0..self.rows)
            .flat_map(|i| (0..self.cols).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = self.get(i, j);
                (v > 0.0).then_some((i, j, v))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    pub distance: f64,
    pub witness: Coupling,
}

/// Exact transportation distance between `pair.mu1` and `pair.mu2`.
pub fn emd(space: &FiniteMMSpace, pair: &MeasurePair) -> Result<TransportResult> {
    check_probability(space.len(), &pair.mu1, "mu1")?;
    check_probability(space.len(), &pair.mu2, "mu2")?;
    let cost = space.dist_matrix();
    let witness = solve_transport(&pair.mu1, &pair.mu2, &cost)?;
    Ok(TransportResult {
        distance: witness.cost(&cost),
        witness,
    })
}

/// Distance between `mu` and its pushforward under a point permutation.
pub fn translate_distance(space: &FiniteMMSpace, mu: &[f64], perm: &[usize]) -> Result<f64> {
    check_bijection(perm, space.len())?;
    let mut pushed = vec![0.0; mu.len()];
    for (i, &m) in mu.iter().enumerate() {
        pushed[perm[i]] += m;
    }
    let pair = MeasurePair::new(space, mu.to_vec(), pushed)?;
    Ok(emd(space, &pair)?.distance)
}

pub(crate) fn check_bijection(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::NotBijective(format!("{} images for {n} points", perm.len())));
    }
    let mut seen = vec![false; n];
    for (i, &p) in perm.iter().enumerate() {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::NotBijective(format!("image of {i} is {p}")));
        }
    }
    Ok(())
}

/// Minimum-cost coupling of `supply` and `demand` under a row-major cost
/// matrix, by the transportation simplex method.
///
/// Zero-mass rows and columns are removed before solving and come back as
/// zero rows and columns of the witness.
pub fn solve_transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<Coupling> {
    let (m_all, n_all) = (supply.len(), demand.len());
    if cost.len() != m_all * n_all {
        return Err(Error::InvalidArgument(format!(
            "cost matrix has {} entries, expected {}",
            cost.len(),
            m_all * n_all
        )));
    }
    let rows: Vec<usize> = (0..m_all).filter(|&i| supply[i] > 0.0).collect();
    let cols: Vec<usize> = (0..n_all).filter(|&j| demand[j] > 0.0).collect();
    let mut out = Coupling::zeros(m_all, n_all);
    if rows.is_empty() || cols.is_empty() {
        return Ok(out);
    }
    let a: Vec<f64> = rows.iter().map(|&i| supply[i]).collect();
    let b: Vec<f64> = cols.iter().map(|&j| demand[j]).collect();
    let c: Vec<f64> = rows
        .iter()
        .flat_map(|&i| cols.iter().map(move |&j| cost[i * n_all + j]))
        .collect();

    let plan = Simplex::new(a, b, c).run()?;
    for (&(i, j), &x) in plan.basis.iter().zip(&plan.flow) {
        out.joint[rows[i] * n_all + cols[j]] = x.max(0.0);
    }
    Ok(out)
}

struct Simplex {
    m: usize,
    n: usize,
    cost: Vec<f64>,
    basis: Vec<(usize, usize)>,
    flow: Vec<f64>,
}

/// Consecutive degenerate pivots after which entering and leaving choices
/// switch to lowest-index rules, which cannot cycle.
const DEGENERATE_SWITCH: usize = 50;

impl Simplex {
    /// Northwest-corner start: exactly `m + n - 1` basic cells forming a spanning tree.
    fn new(a: Vec<f64>, mut b: Vec<f64>, cost: Vec<f64>) -> Self {
        let (m, n) = (a.len(), b.len());
        let mut a = a;
        let mut basis = Vec::with_capacity(m + n - 1);
        let mut flow = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = a[i].min(b[j]);
            basis.push((i, j));
            flow.push(x);
            a[i] -= x;
            b[j] -= x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if i == m - 1 || (j < n - 1 && b[j] <= a[i]) {
                j += 1;
            } else {
                i += 1;
            }
        }
        // the leftover of the last cell is rounding noise
        Simplex {
            m,
            n,
            cost,
            basis,
            flow,
        }
    }

    fn run(mut self) -> Result<Self> {
        let cap = 64 * (self.m * self.n) + 1000;
        let scale = self.cost.iter().fold(0.0f64, |s, c| s.max(c.abs())).max(1.0);
        let tol = 1e-12 * scale;
        let mut degenerate_run = 0;
        for _ in 0..cap {
            let (u, v) = self.potentials();
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            let in_basis = self.basis_mask();
            let mut entering = None;
            let mut best = -tol;
            'price: for i in 0..self.m {
                for j in 0..self.n {
                    if in_basis[i * self.n + j] {
                        continue;
                    }
                    let r = self.cost[i * self.n + j] - u[i] - v[j];
                    if r < best {
                        entering = Some((i, j));
                        if bland {
                            break 'price;
                        }
                        best = r;
                    }
                }
            }
            let Some((ei, ej)) = entering else {
                return Ok(self);
            };
            let cycle = self.cycle(ei, ej);
            // cycle[0] is the entering cell (+), then alternating -, +, ...
            let (mut theta, mut leave) = (f64::INFINITY, usize::MAX);
            for &k in cycle.iter().skip(1).step_by(2) {
                let x = self.flow[k];
                let better = x < theta || (x == theta && self.basis[k] < self.basis[leave]);
                if better {
                    theta = x;
                    leave = k;
                }
            }
            for (pos, &k) in cycle.iter().enumerate().skip(1) {
                if pos % 2 == 1 {
                    self.flow[k] -= theta;
                } else {
                    self.flow[k] += theta;
                }
            }
            self.basis[leave] = (ei, ej);
            self.flow[leave] = theta;
            degenerate_run = if theta > 0.0 { 0 } else { degenerate_run + 1 };
        }
        Err(Error::SolverStalled(cap))
    }

    fn basis_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.m * self.n];
        for &(i, j) in &self.basis {
            mask[i * self.n + j] = true;
        }
        mask
    }

    /// Node `i < m` is row `i`, node `m + j` is column `j`; edges are basis slots.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, &(i, j)) in self.basis.iter().enumerate() {
            adj[i].push((self.m + j, k));
            adj[self.m + j].push((i, k));
        }
        adj
    }

    fn potentials(&self) -> (Vec<f64>, Vec<f64>) {
        let adj = self.adjacency();
        let mut pot = vec![f64::NAN; self.m + self.n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0]);
        while let Some(node) = queue.pop_front() {
            for &(next, k) in &adj[node] {
                if pot[next].is_nan() {
                    let (i, j) = self.basis[k];
                    let c = self.cost[i * self.n + j];
                    pot[next] = c - pot[node];
                    queue.push_back(next);
                }
            }
        }
        let v = pot.split_off(self.m);
        (pot, v)
    }

    /// Basis slots on the tree path closing a cycle with `(ei, ej)`, prefixed by
    /// a placeholder slot for the entering cell.
    fn cycle(&self, ei: usize, ej: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let (start, goal) = (self.m + ej, ei);
        let mut parent = vec![None; self.m + self.n];
        let mut seen = vec![false; self.m + self.n];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            if node == goal {
                break;
            }
            for &(next, k) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((node, k));
                    queue.push_back(next);
                }
            }
        }
        // walk back from the entering row to its column: the first edge touches
        // the row and must lose mass
        let mut path = vec![usize::MAX];
        let mut node = goal;
        while let Some((prev, k)) = parent[node] {
            path.push(k);
            node = prev;
        }
        path
    }
}

/// Independent exact oracle for small instances: the minimum over every
/// vertex of the coupling polytope.
///
/// Vertices are produced by repeatedly saturating a cell, `x_ij = min(a_i, b_j)`;
/// every vertex arises this way because its support is a forest and a leaf
/// cell carries the full remaining mass of its leaf node.
pub fn emd_oracle(space: &FiniteMMSpace, pair: &MeasurePair) -> Result<f64> {
    let n = space.len();
    if n > ORACLE_MAX_POINTS {
        return Err(Error::OverCap {
            what: "oracle instance",
            size: n as u128,
            cap: ORACLE_MAX_POINTS as u128,
            hint: "; use emd",
        });
    }
    check_probability(n, &pair.mu1, "mu1")?;
    check_probability(n, &pair.mu2, "mu2")?;
    let cost = space.dist_matrix();
    let mut memo = HashMap::new();
    Ok(vertex_min(&pair.mu1, &pair.mu2, &cost, &mut memo))
}

fn vertex_min(a: &[f64], b: &[f64], cost: &[f64], memo: &mut HashMap<Vec<u64>, f64>) -> f64 {
    const EMPTY: f64 = 1e-13;
    let key: Vec<u64> = a.iter().chain(b).map(|v| v.to_bits()).collect();
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let n = b.len();
    let mut best = f64::INFINITY;
    let mut any = false;
    for i in (0..a.len()).filter(|&i| a[i] > EMPTY) {
        for j in (0..n).filter(|&j| b[j] > EMPTY) {
            any = true;
            let x = a[i].min(b[j]);
            let (mut a2, mut b2) = (a.to_vec(), b.to_vec());
            // the saturated side drops to exactly zero
            if a[i] <= b[j] {
                a2[i] = 0.0;
                b2[j] -= x;
            } else {
                b2[j] = 0.0;
                a2[i] -= x;
            }
            let total = x * cost[i * n + j] + vertex_min(&a2, &b2, cost, memo);
            best = best.min(total);
        }
    }
    let value = if any { best } else { 0.0 };
    memo.insert(key, value);
    value
}
