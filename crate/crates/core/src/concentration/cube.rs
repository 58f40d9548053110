use crate::error::{Error, Result};
use crate::generators::MAX_CUBE_DIM;
use crate::space::{ConcentrationCurve, CurveKind, FiniteMMSpace};
use std::cmp::Ordering;

/// Simplicial order on subsets of coordinates: smaller sets first; among
/// sets of equal size, `x < y` when the smallest coordinate where they
/// differ belongs to `x`.
fn simplicial_cmp(x: u32, y: u32) -> Ordering {
    x.count_ones().cmp(&y.count_ones()).then_with(|| {
        if x == y {
            Ordering::Equal
        } else {
            let low = (x ^ y) & (x ^ y).wrapping_neg();
            if x & low != 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        }
    })
}

/// Exact concentration function of the uniform Hamming cube `{0,1}^n`.
///
/// Initial segments of the simplicial order minimize the size of every
/// closed `t`-neighborhood among vertex sets of equal size (Harper's vertex
/// isoperimetric inequality), and shrinking a set never enlarges its
/// neighborhood. So the infimum over half-measure sets is attained by the
/// first `2^(n-1)` vertices, whose neighborhood is computed here by
/// multi-source breadth-first search. This reaches dimensions far beyond
/// subset enumeration; it agrees with [`crate::space::alpha_exact`] where
/// both run.
pub fn cube_alpha_exact(n: usize, eps: f64) -> Result<f64> {
    if n == 0 || n > MAX_CUBE_DIM {
        return Err(Error::InvalidArgument(format!(
            "cube dimension must be in 1..={MAX_CUBE_DIM}, got {n}"
        )));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be non-negative, got {eps}")));
    }
    if eps == 0.0 {
        return Ok(0.5);
    }
    // largest Hamming radius t with t/n <= eps, using the metric's own division
    let radius = (0..=n).rev().find(|&k| k as f64 / n as f64 <= eps).unwrap_or(0);

    let size = 1usize << n;
    let mut order: Vec<u32> = (0..size as u32).collect();
    order.sort_unstable_by(|&a, &b| simplicial_cmp(a, b));

    let mut reached = vec![false; size];
    let mut frontier: Vec<u32> = order[..size / 2].to_vec();
    for &v in &frontier {
        reached[v as usize] = true;
    }
    let mut count = frontier.len();
    for _ in 0..radius {
        let mut next = Vec::new();
        for &v in &frontier {
            for bit in 0..n {
                let w = v ^ (1 << bit);
                if !reached[w as usize] {
                    reached[w as usize] = true;
                    next.push(w);
                }
            }
        }
        count += next.len();
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(((size - count) as f64 / size as f64).clamp(0.0, 0.5))
}

/// Exact curve of the cube over a grid of positive radii.
pub fn cube_exact_curve(n: usize, grid: &[f64]) -> Result<ConcentrationCurve> {
    let alpha = grid
        .iter()
        .map(|&e| cube_alpha_exact(n, e))
        .collect::<Result<Vec<_>>>()?;
    ConcentrationCurve::new(grid.to_vec(), alpha, CurveKind::Exact)
}

/// Dimension `n` when the space is exactly the uniform cube `{0,1}^n` in
/// generator order.
pub fn uniform_cube_dimension(space: &FiniteMMSpace) -> Option<usize> {
    use crate::space::Metric;
    let Metric::Hamming { word_len, words } = space.metric() else {
        return None;
    };
    let n = *word_len;
    if n == 0 || n > crate::generators::MAX_CUBE_DIM || space.len() != 1 << n || !space.is_uniform() {
        return None;
    }
    let canonical = words
        .chunks(n)
        .enumerate()
        .all(|(idx, w)| w.iter().enumerate().all(|(bit, &x)| x as usize == (idx >> bit) & 1));
    canonical.then_some(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::hamming_cube;
    use crate::space::alpha_exact;

    #[test]
    fn agrees_with_subset_enumeration() {
        for n in 1..=4 {
            let cube = hamming_cube(n).unwrap();
            for k in 1..=(2 * n) {
                let eps = k as f64 / (2 * n) as f64;
                assert_eq!(
                    cube_alpha_exact(n, eps).unwrap(),
                    alpha_exact(&cube, eps).unwrap(),
                    "n={n} eps={eps}"
                );
            }
        }
    }

    #[test]
    fn simplicial_order_prefix() {
        let mut order: Vec<u32> = (0..16).collect();
        order.sort_by(|&a, &b| simplicial_cmp(a, b));
        // empty set, singletons in coordinate order, then pairs containing 0
        assert_eq!(&order[..8], &[0, 1, 2, 4, 8, 3, 5, 9]);
    }

    #[test]
    fn odd_dimension_is_a_ball() {
        // first half of {0,1}^5 is the radius-2 ball; its 1-neighborhood the radius-3 ball
        assert_eq!(cube_alpha_exact(5, 0.2).unwrap(), 6.0 / 32.0);
    }

    #[test]
    fn grows_beyond_enumeration_range() {
        let a = cube_alpha_exact(12, 0.25).unwrap();
        assert!(a > 0.0 && a < 0.05);
        assert!(cube_alpha_exact(21, 0.1).is_err());
    }
}
