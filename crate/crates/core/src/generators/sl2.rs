use crate::error::{Error, Result};
use crate::space::{FiniteMMSpace, Metric};
use std::collections::VecDeque;

/// Default cap on the group order `p^3 - p` (admits `p <= 13`).
pub const DEFAULT_SL2_CAP: u64 = 13 * 13 * 13 - 13;

/// 2x2 matrix `[[a, b], [c, d]]` over `F_p`, stored row-major.
pub type Sl2Element = [u64; 4];

/// Fixed generating set: the two elementary matrices and their inverses
/// (entries taken mod p, so `-1` is `p - 1`).
pub const SL2_GENERATORS: [[i64; 4]; 4] = [[1, 1, 0, 1], [1, -1, 0, 1], [1, 0, 1, 1], [1, 0, -1, 1]];

/// `SL(2, F_p)` with the word metric of its Cayley graph.
#[derive(Debug, Clone, PartialEq)]
pub struct WordMetricGroup {
    pub p: u64,
    pub elements: Vec<Sl2Element>,
    pub generators: Vec<Sl2Element>,
    /// Row-major word-length matrix, `dist[i * n + j] = |g_i g_j^{-1}|`.
    pub dist: Vec<u32>,
}

impl WordMetricGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn word_distance(&self, i: usize, j: usize) -> u32 {
        self.dist[i * self.order() + j]
    }

    pub fn index_of(&self, g: &Sl2Element) -> Option<usize> {
        self.elements.iter().position(|e| e == g)
    }

    pub fn identity_index(&self) -> usize {
        self.index_of(&[1, 0, 0, 1]).expect("identity present")
    }

    pub fn multiply(&self, g: &Sl2Element, h: &Sl2Element) -> Sl2Element {
        mul(self.p, g, h)
    }

    /// Unnormalized word metric with uniform weights.
    pub fn to_space(&self) -> FiniteMMSpace {
        let n = self.order();
        let labels = self
            .elements
            .iter()
            .map(|[a, b, c, d]| format!("[[{a},{b}],[{c},{d}]]"))
            .collect();
        FiniteMMSpace::new_unchecked(
            labels,
            Metric::Matrix {
                n,
                data: self.dist.iter().map(|&d| d as f64).collect(),
            },
            vec![1.0 / n as f64; n],
        )
    }
}

fn mul(p: u64, g: &Sl2Element, h: &Sl2Element) -> Sl2Element {
    [
        (g[0] * h[0] + g[1] * h[2]) % p,
        (g[0] * h[1] + g[1] * h[3]) % p,
        (g[2] * h[0] + g[3] * h[2]) % p,
        (g[2] * h[1] + g[3] * h[3]) % p,
    ]
}

fn inverse(p: u64, g: &Sl2Element) -> Sl2Element {
    [g[3], (p - g[1]) % p, (p - g[2]) % p, g[0]]
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Builds `SL(2, F_p)` and its word metric by breadth-first search from the
/// identity. Edges join `g` to `s g` for each generator `s`, which makes the
/// distance right-invariant.
pub fn sl2_word_metric(p: u64) -> Result<WordMetricGroup> {
    sl2_word_metric_with_cap(p, DEFAULT_SL2_CAP)
}

pub fn sl2_word_metric_with_cap(p: u64, cap: u64) -> Result<WordMetricGroup> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let order = p.checked_pow(3).map(|c| c - p).unwrap_or(u64::MAX);
    if order > cap {
        return Err(Error::OverCap {
            what: "SL(2,p) order",
            size: order as u128,
            cap: cap as u128,
            hint: "",
        });
    }

    let mut elements = Vec::with_capacity(order as usize);
    let slot = |g: &Sl2Element| (((g[0] * p + g[1]) * p + g[2]) * p + g[3]) as usize;
    let mut index = vec![u32::MAX; (p * p * p * p) as usize];
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    if (a * d + p * p - (b * c) % (p * p)) % p == 1 {
                        let g = [a, b, c, d];
                        index[slot(&g)] = elements.len() as u32;
                        elements.push(g);
                    }
                }
            }
        }
    }
    debug_assert_eq!(elements.len() as u64, order);

    let generators: Vec<Sl2Element> = SL2_GENERATORS
        .iter()
        .map(|g| g.map(|x| x.rem_euclid(p as i64) as u64))
        .collect();

    // word length of every element
    let n = elements.len();
    let mut length = vec![u32::MAX; n];
    let identity = index[slot(&[1, 0, 0, 1])] as usize;
    length[identity] = 0;
    let mut queue = VecDeque::from([identity]);
    while let Some(g) = queue.pop_front() {
        for s in &generators {
            let h = index[slot(&mul(p, s, &elements[g]))] as usize;
            if length[h] == u32::MAX {
                length[h] = length[g] + 1;
                queue.push_back(h);
            }
        }
    }
    if length.contains(&u32::MAX) {
        return Err(Error::InvalidArgument(format!(
            "generators do not generate SL(2,{p})"
        )));
    }

    let inverses: Vec<Sl2Element> = elements.iter().map(|g| inverse(p, g)).collect();
    let mut dist = vec![0u32; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = length[index[slot(&mul(p, &elements[i], &inverses[j]))] as usize];
        }
    }

    Ok(WordMetricGroup {
        p,
        elements,
        generators,
        dist,
    })
}
