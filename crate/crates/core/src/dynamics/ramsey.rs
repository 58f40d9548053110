use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::SubsetMask;

/// Default bound on the number of colorings [`ramsey_verify`] enumerates.
pub const DEFAULT_RAMSEY_CAP: u128 = 1 << 24;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `k`-subsets of `{0..n-1}` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
            break;
        };
        c[i] += 1;
        for t in i + 1..k {
            c[t] = c[t - 1] + 1;
        }
    }
    out
}

/// A coloring of the `k`-subsets of `{0..ground-1}`; `colors[t]` belongs to
/// the `t`-th subset in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoredHypergraph {
    pub ground: usize,
    pub k: usize,
    pub colors: Vec<usize>,
}

impl ColoredHypergraph {
    pub fn new(ground: usize, k: usize, colors: Vec<usize>) -> Result<Self> {
        let expected = binomial(ground, k);
        if colors.len() as u128 != expected {
            return Err(Error::InvalidArgument(format!(
                "{} colors for {expected} subsets of size {k}",
                colors.len()
            )));
        }
        Ok(ColoredHypergraph { ground, k, colors })
    }

    /// Color of a sorted `k`-subset.
    pub fn color_of(&self, subset: &[usize]) -> usize {
        self.colors[lex_rank(self.ground, subset)]
    }
}

/// Position of a sorted subset among all subsets of its size, lexicographically.
fn lex_rank(n: usize, subset: &[usize]) -> usize {
    let k = subset.len();
    let mut rank = 0u128;
    let mut next = 0;
    for (i, &c) in subset.iter().enumerate() {
        for skipped in next..c {
            rank += binomial(n - skipped - 1, k - i - 1);
        }
        next = c + 1;
    }
    rank as usize
}

/// Lexicographically first `l`-subset all of whose `k`-subsets share a color.
pub fn find_monochromatic(h: &ColoredHypergraph, l: usize) -> Result<Option<SubsetMask>> {
    if l > h.ground {
        return Err(Error::InvalidArgument(format!("l = {l} exceeds the ground set size {}", h.ground)));
    }
    let mut chosen = Vec::with_capacity(l);
    let found = grow(h, l, 0, None, &mut chosen);
    Ok(found.then(|| SubsetMask::from_indices(h.ground, chosen)))
}

/// Backtracking over increasing elements; `color` is fixed by the first
/// completed `k`-subset.
fn grow(h: &ColoredHypergraph, l: usize, from: usize, color: Option<usize>, chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == l {
        return true;
    }
    let need = l - chosen.len();
    for v in from..=h.ground - need {
        let mut color_here = color;
        let mut ok = true;
        if h.k >= 1 && chosen.len() + 1 >= h.k {
            for rest in k_subsets(chosen.len(), h.k - 1) {
                let mut subset: Vec<usize> = rest.iter().map(|&t| chosen[t]).collect();
                subset.push(v);
                let c = h.color_of(&subset);
                match color_here {
                    None => color_here = Some(c),
                    Some(prev) if prev != c => {
                        ok = false;
                        break;
                    }
                    _ => {}
                }
            }
        }
        if ok {
            chosen.push(v);
            if grow(h, l, v + 1, color_here, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyReport {
    pub all_colorings_contain: bool,
    /// Lexicographically smallest coloring without a monochromatic `l`-set.
    pub counterexample: Option<ColoredHypergraph>,
    pub colorings_checked: u128,
}

pub fn ramsey_verify(k: usize, l: usize, r: usize, n: usize) -> Result<RamseyReport> {
    ramsey_verify_with_cap(k, l, r, n, DEFAULT_RAMSEY_CAP)
}

/// Exhaustive check that every `r`-coloring of the `k`-subsets of an
/// `n`-set has a monochromatic `l`-set.
///
/// Relabeling colors preserves the answer, so the first subset's color is
/// fixed to 0; the smallest counterexample overall is among those.
pub fn ramsey_verify_with_cap(k: usize, l: usize, r: usize, n: usize, cap: u128) -> Result<RamseyReport> {
    if r == 0 {
        return Err(Error::InvalidArgument("at least one color is needed".into()));
    }
    if l > n {
        return Err(Error::InvalidArgument(format!("l = {l} exceeds n = {n}")));
    }
    let subsets = binomial(n, k);
    let free = subsets.saturating_sub(1);
    let total = u32::try_from(free)
        .ok()
        .and_then(|e| (r as u128).checked_pow(e))
        .filter(|&t| t <= cap)
        .ok_or(Error::OverCap {
            what: "coloring count",
            size: u32::try_from(free)
                .ok()
                .and_then(|e| (r as u128).checked_pow(e))
                .unwrap_or(u128::MAX),
            cap,
            hint: "",
        })?;
    let len = subsets as usize;
    let coloring = |index: u128| -> ColoredHypergraph {
        // most significant digit belongs to the second subset
        let mut colors = vec![0; len];
        let mut rest = index;
        for t in (1..len).rev() {
            colors[t] = (rest % r as u128) as usize;
            rest /= r as u128;
        }
        ColoredHypergraph { ground: n, k, colors }
    };
    let counterexample = (0..total as u64)
        .into_par_iter()
        .map(|i| coloring(i as u128))
        .find_first(|h| matches!(find_monochromatic(h, l), Ok(None)));
    Ok(RamseyReport {
        all_colorings_contain: counterexample.is_none(),
        counterexample,
        colorings_checked: total,
    })
}
