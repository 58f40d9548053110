use super::{check_eps, ConcentrationCurve, CurveKind, FiniteMMSpace, HALF_MASS_TOL};
use crate::error::{Error, Result};
use rayon::prelude::*;

/// Default largest point count for subset enumeration (`2^20` subsets).
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 20;
/// Hard ceiling imposed by the 32-bit subset encoding.
const HARD_CAP: usize = 30;
const TABLE_BITS: usize = 10;

/// Exact concentration function by enumerating every subset.
pub fn alpha_exact(space: &FiniteMMSpace, eps: f64) -> Result<f64> {
    alpha_exact_with_cap(space, eps, DEFAULT_EXHAUSTIVE_CAP)
}

/// [`alpha_exact`] with an explicit point-count cap.
///
/// `eps = 0` returns the conventional value `1/2`.
pub fn alpha_exact_with_cap(space: &FiniteMMSpace, eps: f64, cap: usize) -> Result<f64> {
    check_eps(eps)?;
    let n = space.len();
    let cap = cap.min(HARD_CAP);
    if n > cap {
        return Err(Error::TooLargeForExact { points: n, cap });
    }
    if eps == 0.0 {
        return Ok(0.5);
    }

    let ball: Vec<u32> = (0..n)
        .map(|x| {
            (0..n)
                .filter(|&y| space.dist(x, y) <= eps)
                .fold(0u32, |m, y| m | (1 << y))
        })
        .collect();
    let tables = MassTables::new(space.weights());

    let total: u64 = 1u64 << n;
    let chunk = 1u64 << 12;
    let best = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let lo = (c * chunk).max(1);
            let hi = ((c + 1) * chunk).min(total);
            let mut best = f64::INFINITY;
            for mask in lo..hi {
                let mask = mask as u32;
                if tables.mass(mask) < 0.5 - HALF_MASS_TOL {
                    continue;
                }
                let mut hood = 0u32;
                let mut rest = mask;
                while rest != 0 {
                    let x = rest.trailing_zeros();
                    hood |= ball[x as usize];
                    rest &= rest - 1;
                }
                best = best.min(tables.mass(hood));
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);

    Ok((1.0 - best).clamp(0.0, 0.5))
}

/// Subset masses via lookup tables over 10-bit blocks of the mask.
struct MassTables {
    tables: Vec<Vec<f64>>,
}

impl MassTables {
    fn new(weights: &[f64]) -> Self {
        let tables = weights
            .chunks(TABLE_BITS)
            .map(|block| {
                let size = 1usize << block.len();
                let mut t = vec![0.0; size];
                for m in 1..size {
                    let low = m.trailing_zeros() as usize;
                    t[m] = t[m & (m - 1)] + block[low];
                }
                t
            })
            .collect();
        MassTables { tables }
    }

    #[inline]
    fn mass(&self, mask: u32) -> f64 {
        self.tables
            .iter()
            .enumerate()
            .map(|(b, t)| t[((mask >> (b * TABLE_BITS)) as usize) & (t.len() - 1)])
            .sum()
    }
}

/// Exact curve over a grid of positive radii.
pub fn exact_curve(space: &FiniteMMSpace, grid: &[f64]) -> Result<ConcentrationCurve> {
    let alpha = grid
        .iter()
        .map(|&e| alpha_exact(space, e))
        .collect::<Result<Vec<_>>>()?;
    ConcentrationCurve::new(grid.to_vec(), alpha, CurveKind::Exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::hamming_cube;
    use crate::space::{measure, neighborhood, SubsetMask};

    /// Straightforward oracle through the public neighborhood/measure ops.
    fn alpha_by_definition(space: &FiniteMMSpace, eps: f64) -> f64 {
        let n = space.len();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << n) {
            let set = SubsetMask::from_indices(n, (0..n).filter(|i| mask >> i & 1 == 1));
            if measure(space, &set) >= 0.5 - 1e-12 {
                best = best.min(measure(space, &neighborhood(space, &set, eps).unwrap()));
            }
        }
        1.0 - best
    }

    #[test]
    fn square_examples() {
        let cube = hamming_cube(2).unwrap();
        assert_eq!(alpha_exact(&cube, 0.4).unwrap(), 0.5);
        assert_eq!(alpha_exact(&cube, 0.5).unwrap(), 0.0);
        assert_eq!(alpha_exact(&FiniteMMSpace::point(), 0.3).unwrap(), 0.0);
    }

    #[test]
    fn matches_definition_on_small_cubes() {
        for n in 1..=3 {
            let cube = hamming_cube(n).unwrap();
            for k in 1..=n {
                let eps = k as f64 / n as f64;
                assert_eq!(alpha_exact(&cube, eps).unwrap(), alpha_by_definition(&cube, eps));
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let cube = hamming_cube(5).unwrap();
        assert_eq!(
            alpha_exact(&cube, 0.2),
            Err(Error::TooLargeForExact { points: 32, cap: 20 })
        );
    }

    #[test]
    fn zero_radius_convention() {
        let cube = hamming_cube(2).unwrap();
        assert_eq!(alpha_exact(&cube, 0.0).unwrap(), 0.5);
    }
}
