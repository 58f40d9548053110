use crate::error::Result;
use crate::generators::stream_rng;
use crate::space::{
    measure, neighborhood, ConcentrationCurve, CurveKind, FiniteMMSpace, Metric, SubsetMask,
    HALF_MASS_TOL,
};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Knobs for the heuristic set searches (concentration lower bounds and the
/// observable-distance coupling search).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub seed: u64,
    /// Random Lipschitz functions whose sublevel sets are tried.
    pub restarts: usize,
    /// Spaces up to this size use every point as a ball center; larger
    /// spaces use this many seeded centers.
    pub ball_seeds: usize,
    /// Swap-based local improvement runs on spaces up to this size.
    pub local_search_max_points: usize,
    pub max_swap_rounds: usize,
    /// Number of candidate couplings evaluated by the observable-distance search.
    pub budget: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 0,
            restarts: 16,
            ball_seeds: 256,
            local_search_max_points: 128,
            max_swap_rounds: 64,
            budget: 256,
        }
    }
}

/// Best half-measure set found and the concentration value it certifies.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub alpha: f64,
    pub witness: SubsetMask,
    pub neighborhood_mass: f64,
}

/// Lower bound on the concentration function from an explicit search over
/// half-measure sets.
///
/// Any set `A` with `mu(A) >= 1/2` gives `1 - mu(A_eps) <= alpha(eps)`, so
/// the result never exceeds the exact value.
pub fn alpha_lower_bound(space: &FiniteMMSpace, eps: f64, cfg: &SearchConfig) -> Result<f64> {
    Ok(alpha_lower_bound_with_witness(space, eps, cfg)?.alpha)
}

pub fn alpha_lower_bound_with_witness(
    space: &FiniteMMSpace,
    eps: f64,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    let candidates = candidate_sets(space, cfg);
    let scored = candidates
        .into_par_iter()
        .enumerate()
        .map(|(k, set)| -> Result<(f64, usize, SubsetMask)> {
            let hood = neighborhood(space, &set, eps)?;
            Ok((measure(space, &hood), k, set))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut best_mass, _, mut best) = scored
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one candidate");

    if space.len() <= cfg.local_search_max_points {
        (best, best_mass) = improve_by_swaps(space, best, eps, cfg.max_swap_rounds);
    }
    Ok(SearchOutcome {
        alpha: (1.0 - best_mass).clamp(0.0, 0.5),
        witness: best,
        neighborhood_mass: best_mass,
    })
}

/// Lower-bound curve over a grid of radii.
pub fn lower_bound_curve(
    space: &FiniteMMSpace,
    grid: &[f64],
    cfg: &SearchConfig,
) -> Result<ConcentrationCurve> {
    let mut alpha = grid
        .iter()
        .map(|&e| alpha_lower_bound(space, e, cfg))
        .collect::<Result<Vec<_>>>()?;
    // each value is a valid lower bound, and so is any later one at a smaller radius
    for k in (0..alpha.len().saturating_sub(1)).rev() {
        alpha[k] = alpha[k].max(alpha[k + 1]);
    }
    ConcentrationCurve::new(grid.to_vec(), alpha, CurveKind::LowerBoundSearch)
}

/// Smallest prefix of `order` reaching half the mass.
fn half_prefix(space: &FiniteMMSpace, order: &[usize]) -> SubsetMask {
    let mut set = SubsetMask::empty(space.len());
    let mut mass = 0.0;
    for &i in order {
        set.insert(i);
        mass += space.weights()[i];
        if mass >= 0.5 - HALF_MASS_TOL {
            break;
        }
    }
    set
}

/// Sublevel set `{f <= t}` of minimal mass at least one half, ties broken by index.
fn sublevel_half(space: &FiniteMMSpace, values: &[f64]) -> SubsetMask {
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    half_prefix(space, &order)
}

fn candidate_sets(space: &FiniteMMSpace, cfg: &SearchConfig) -> Vec<SubsetMask> {
    let n = space.len();
    let centers: Vec<usize> = if n <= cfg.ball_seeds {
        (0..n).collect()
    } else {
        let mut rng = stream_rng(cfg.seed, u64::MAX);
        let mut c = sample(&mut rng, n, cfg.ball_seeds.max(1)).into_vec();
        c.sort_unstable();
        c
    };

    let mut out: Vec<SubsetMask> = centers
        .par_iter()
        .map(|&c| sublevel_half(space, &space.row(c)))
        .collect();

    // coordinate half-spaces (hemispheres) for embedded point clouds
    if let Metric::Sphere {
        ambient, coords, ..
    } = space.metric()
    {
        for axis in 0..*ambient {
            let up: Vec<f64> = coords.chunks(*ambient).map(|p| -p[axis]).collect();
            let down: Vec<f64> = up.iter().map(|v| -v).collect();
            out.push(sublevel_half(space, &up));
            out.push(sublevel_half(space, &down));
        }
    }

    // random 1-Lipschitz functions x -> min_s d(x, s) + offset_s
    let diam_guess = (0..n.min(64)).map(|j| space.dist(0, j)).fold(0.0, f64::max) * 2.0;
    let random: Vec<SubsetMask> = (0..cfg.restarts as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(cfg.seed, r);
            let anchors = rng.random_range(1..=3.min(n));
            let picks = sample(&mut rng, n, anchors).into_vec();
            let offsets: Vec<f64> = picks
                .iter()
                .map(|_| rng.random_range(0.0..=0.5) * diam_guess)
                .collect();
            let values: Vec<f64> = (0..n)
                .map(|x| {
                    picks
                        .iter()
                        .zip(&offsets)
                        .map(|(&s, &o)| space.dist(x, s) + o)
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            sublevel_half(space, &values)
        })
        .collect();
    out.extend(random);
    out
}

/// Word-packed bit set used by the local search.
#[derive(Clone, PartialEq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn or(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                (rest != 0).then(|| {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    w * 64 + b
                })
            })
        })
    }
}

/// First-improvement descent: drop points while the set keeps half the mass,
/// then swap a member for a non-member whenever that shrinks the neighborhood.
fn improve_by_swaps(
    space: &FiniteMMSpace,
    start: SubsetMask,
    eps: f64,
    max_rounds: usize,
) -> (SubsetMask, f64) {
    let n = space.len();
    let w = space.weights();
    let balls: Vec<Bits> = (0..n)
        .map(|x| {
            let mut b = Bits::new(n);
            (0..n).filter(|&y| space.dist(x, y) <= eps).for_each(|y| b.set(y));
            b
        })
        .collect();
    let hood_mass = |members: &[usize]| -> f64 {
        let mut acc = Bits::new(n);
        members.iter().for_each(|&m| acc.or(&balls[m]));
        crate::space::stable_sum(acc.iter().map(|i| w[i]))
    };
    let set_mass = |members: &[usize]| crate::space::stable_sum(members.iter().map(|&i| w[i]));

    let mut members = start.indices();
    let mut current = hood_mass(&members);

    // pruning never enlarges the neighborhood
    let mut k = 0;
    while k < members.len() {
        let mut trial = members.clone();
        trial.remove(k);
        if !trial.is_empty() && set_mass(&trial) >= 0.5 - HALF_MASS_TOL {
            current = current.min(hood_mass(&trial));
            members = trial;
        } else {
            k += 1;
        }
    }

    for _ in 0..max_rounds {
        let mut improved = false;
        'scan: for slot in 0..members.len() {
            let inside: Vec<bool> = {
                let mut v = vec![false; n];
                members.iter().for_each(|&m| v[m] = true);
                v
            };
            for candidate in (0..n).filter(|&c| !inside[c]) {
                let mut trial = members.clone();
                trial[slot] = candidate;
                if set_mass(&trial) < 0.5 - HALF_MASS_TOL {
                    continue;
                }
                let mass = hood_mass(&trial);
                if mass < current - 1e-15 {
                    members = trial;
                    current = mass;
                    improved = true;
                    break 'scan;
                }
            }
        }
        if !improved {
            break;
        }
    }
    members.sort_unstable();
    (SubsetMask::from_indices(n, members), current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concentration::cube_alpha_exact;
    use crate::generators::{hamming_cube, symmetric_group};
    use crate::space::alpha_exact;

    #[test]
    fn square_matches_exact() {
        let cube = hamming_cube(2).unwrap();
        let cfg = SearchConfig::default();
        assert_eq!(alpha_lower_bound(&cube, 0.4, &cfg).unwrap(), 0.5);
    }

    #[test]
    fn equals_exact_on_small_cubes() {
        let cfg = SearchConfig::default();
        for n in 1..=4 {
            let cube = hamming_cube(n).unwrap();
            for k in 1..=n {
                let eps = k as f64 / n as f64;
                assert_eq!(
                    alpha_lower_bound(&cube, eps, &cfg).unwrap(),
                    alpha_exact(&cube, eps).unwrap(),
                    "n={n} eps={eps}"
                );
            }
        }
    }

    #[test]
    fn never_exceeds_exact() {
        let cfg = SearchConfig {
            restarts: 4,
            ..SearchConfig::default()
        };
        let s = symmetric_group(3).unwrap();
        for eps in [0.3, 0.5, 0.7, 1.0] {
            assert!(alpha_lower_bound(&s, eps, &cfg).unwrap() <= alpha_exact(&s, eps).unwrap());
        }
        let cube = hamming_cube(7).unwrap();
        for k in 1..=7 {
            let eps = k as f64 / 7.0;
            assert!(alpha_lower_bound(&cube, eps, &cfg).unwrap() <= cube_alpha_exact(7, eps).unwrap());
        }
    }

    #[test]
    fn vanishes_past_the_diameter() {
        let cube = hamming_cube(10).unwrap();
        let cfg = SearchConfig {
            ball_seeds: 8,
            restarts: 2,
            ..SearchConfig::default()
        };
        assert_eq!(alpha_lower_bound(&cube, 1.0, &cfg).unwrap(), 0.0);
        assert_eq!(alpha_lower_bound(&cube, 1.5, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn witness_has_half_mass() {
        let cube = hamming_cube(4).unwrap();
        let out = alpha_lower_bound_with_witness(&cube, 0.25, &SearchConfig::default()).unwrap();
        assert!(measure(&cube, &out.witness) >= 0.5);
        let hood = neighborhood(&cube, &out.witness, 0.25).unwrap();
        assert_eq!(measure(&cube, &hood), out.neighborhood_mass);
    }
}
