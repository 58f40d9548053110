//! Finite isometric actions: essential sets, the concentration property,
//! fixed points, the three-block sphere construction and finite Ramsey search.

mod leader;
mod ramsey;

pub use leader::{
    leader_certificate, leader_counts, leader_empirical, leader_threshold, LeaderCertificate, LeaderEmpirical,
};
pub use ramsey::{
    binomial, find_monochromatic, k_subsets, ramsey_verify, ramsey_verify_with_cap, ColoredHypergraph,
    RamseyReport, DEFAULT_RAMSEY_CAP,
};

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{permutations, stream_rng};
use crate::space::{neighborhood, FiniteMMSpace, Metric, SubsetMask};
use crate::transport::check_bijection;

/// Point permutations of a space that preserve its metric; `i` maps to
/// `elements[k][i]`. The list need not be closed under composition.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometricAction {
    space: FiniteMMSpace,
    elements: Vec<Vec<usize>>,
    names: Vec<String>,
}

impl IsometricAction {
    /// Checks that every element is a bijection preserving every distance.
    pub fn new(space: FiniteMMSpace, elements: Vec<Vec<usize>>, names: Option<Vec<String>>) -> Result<Self> {
        let n = space.len();
        for (index, perm) in elements.iter().enumerate() {
            check_bijection(perm, n)?;
            for i in 0..n {
                for j in i + 1..n {
                    let (before, after) = (space.dist(i, j), space.dist(perm[i], perm[j]));
                    if before != after {
                        return Err(Error::NotIsometric {
                            index,
                            i,
                            j,
                            before,
                            after,
                        });
                    }
                }
            }
        }
        Ok(Self::new_unchecked(space, elements, names))
    }

    /// Skips the isometry check (bijectivity is still required for images to make sense).
    pub fn new_unchecked(space: FiniteMMSpace, elements: Vec<Vec<usize>>, names: Option<Vec<String>>) -> Self {
        let names = names.unwrap_or_else(|| (0..elements.len()).map(|k| format!("g{k}")).collect());
        IsometricAction { space, elements, names }
    }

    pub fn space(&self) -> &FiniteMMSpace {
        &self.space
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Whether every element also preserves the measure.
    pub fn preserves_measure(&self) -> bool {
        let w = self.space.weights();
        self.elements
            .iter()
            .all(|p| (0..w.len()).all(|i| (w[i] - w[p[i]]).abs() <= 1e-12))
    }

    fn element(&self, k: usize) -> Result<&[usize]> {
        self.elements.get(k).map(Vec::as_slice).ok_or_else(|| {
            Error::InvalidArgument(format!("family index {k} out of range ({} elements)", self.elements.len()))
        })
    }
}

/// Left multiplication of `S_n` on itself, as generated by
/// [`symmetric_group`](crate::generators::symmetric_group), by the given
/// permutations in one-line notation.
pub fn symmetric_left_action(n: usize, by: &[Vec<usize>]) -> Result<IsometricAction> {
    let space = crate::generators::symmetric_group(n)?;
    let perms = permutations(n);
    let index: HashMap<&[usize], usize> = perms.iter().enumerate().map(|(k, p)| (p.as_slice(), k)).collect();
    let mut elements = Vec::with_capacity(by.len());
    for g in by {
        check_bijection(g, n)?;
        elements.push(
            perms
                .iter()
                .map(|s| index[s.iter().map(|&x| g[x]).collect::<Vec<_>>().as_slice()])
                .collect(),
        );
    }
    let names = by
        .iter()
        .map(|g| g.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    IsometricAction::new(space, elements, Some(names))
}

/// Coordinate permutations acting on the vertices of
/// [`hamming_cube`](crate::generators::hamming_cube).
pub fn cube_coordinate_action(n: usize, by: &[Vec<usize>]) -> Result<IsometricAction> {
    let space = crate::generators::hamming_cube(n)?;
    let mut elements = Vec::with_capacity(by.len());
    for g in by {
        check_bijection(g, n)?;
        elements.push(
            (0..1usize << n)
                .map(|v| (0..n).filter(|&c| v >> c & 1 == 1).map(|c| 1 << g[c]).sum())
                .collect(),
        );
    }
    IsometricAction::new(space, elements, None)
}

/// A space on which the cyclic group generated by `perm` acts by isometries
/// preserving the measure, together with that action (all powers of `perm`).
///
/// Each orbit of unordered pairs gets one random distance in `[1, 2]`, which
/// makes every triangle valid; weights are random but constant on orbits.
pub fn invariant_space_for(perm: &[usize], seed: u64) -> Result<IsometricAction> {
    let n = perm.len();
    check_bijection(perm, n)?;
    let mut rng = stream_rng(seed, 0);
    let mut powers = vec![(0..n).collect::<Vec<usize>>()];
    loop {
        let next: Vec<usize> = powers.last().unwrap().iter().map(|&i| perm[i]).collect();
        if next == powers[0] {
            break;
        }
        powers.push(next);
    }
    let mut data = vec![0.0; n * n];
    let mut assigned = vec![false; n * n];
    for i in 0..n {
        for j in i + 1..n {
            if assigned[i * n + j] {
                continue;
            }
            let d = rng.random_range(1.0..=2.0);
            for p in &powers {
                let (a, b) = (p[i], p[j]);
                data[a * n + b] = d;
                data[b * n + a] = d;
                assigned[a * n + b] = true;
                assigned[b * n + a] = true;
            }
        }
    }
    let mut weights = vec![0.0; n];
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let w = rng.random_range(0.5..=1.5);
        for p in &powers {
            weights[p[i]] = w;
            done[p[i]] = true;
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let space = FiniteMMSpace::new(
        (0..n).map(|i| format!("x{i}")).collect(),
        Metric::Matrix { n, data },
        weights,
    )?;
    IsometricAction::new(space, powers, None)
}

/// Pairwise disjoint sets covering every point.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    parts: Vec<SubsetMask>,
}

impl Cover {
    pub fn new(n: usize, parts: Vec<SubsetMask>) -> Result<Self> {
        let mut owner = vec![None; n];
        for (k, part) in parts.iter().enumerate() {
            if part.len() != n {
                return Err(Error::InvalidCover(format!("part {k} has length {} for {n} points", part.len())));
            }
            for i in part.iter() {
                if let Some(prev) = owner[i].replace(k) {
                    return Err(Error::InvalidCover(format!("point {i} lies in parts {prev} and {k}")));
                }
            }
        }
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(Error::InvalidCover(format!("point {i} is not covered")));
        }
        Ok(Cover { parts })
    }

    /// Cover from a part label per point.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let parts = (0..k)
            .map(|p| SubsetMask::from_bits(labels.iter().map(|&l| l == p).collect()))
            .collect();
        Cover::new(labels.len(), parts)
    }

    pub fn parts(&self) -> &[SubsetMask] {
        &self.parts
    }
}

/// Outcome of one essential-set check; names the certificate that was checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssentialCheck {
    pub essential: bool,
    /// A point common to every translate, when one exists.
    pub witness: Option<usize>,
    pub eps: f64,
    pub family: Vec<usize>,
}

/// Whether the translates `g(A_eps)`, `g` in `family`, share a point.
pub fn is_essential(action: &IsometricAction, set: &SubsetMask, eps: f64, family: &[usize]) -> Result<EssentialCheck> {
    let hood = neighborhood(&action.space, set, eps)?;
    let mut common = SubsetMask::full(action.space.len());
    for &k in family {
        common = common.intersect(&hood.map(action.element(k)?));
    }
    let witness = common.iter().next();
    Ok(EssentialCheck {
        essential: witness.is_some(),
        witness,
        eps,
        family: family.to_vec(),
    })
}

/// `g(A_eps) == (g A)_eps`, which holds whenever `g` is an isometry.
pub fn translate_commutation_check(action: &IsometricAction, set: &SubsetMask, eps: f64, g: usize) -> Result<bool> {
    let perm = action.element(g)?;
    if set.is_empty() {
        return Ok(true);
    }
    let moved_hood = neighborhood(&action.space, set, eps)?.map(perm);
    let hood_of_moved = neighborhood(&action.space, &set.map(perm), eps)?;
    Ok(moved_hood == hood_of_moved)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub holds: bool,
    /// First part that passed [`is_essential`].
    pub essential_part: Option<usize>,
    pub eps: f64,
    pub family: Vec<usize>,
}

/// Whether some part of the cover is essential for this `(eps, family)`.
pub fn concentration_property_check(
    action: &IsometricAction,
    cover: &Cover,
    eps: f64,
    family: &[usize],
) -> Result<PropertyCheck> {
    let mut essential_part = None;
    for (k, part) in cover.parts.iter().enumerate() {
        if !part.is_empty() && is_essential(action, part, eps, family)?.essential {
            essential_part = Some(k);
            break;
        }
    }
    Ok(PropertyCheck {
        holds: essential_part.is_some(),
        essential_part,
        eps,
        family: family.to_vec(),
    })
}

/// Points fixed by every element.
pub fn fixed_points(action: &IsometricAction) -> Vec<usize> {
    (0..action.space.len())
        .filter(|&i| action.elements.iter().all(|p| p[i] == i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{hamming_cube, symmetric_group};
    use crate::space::measure;
    use proptest::prelude::*;

    fn s4_halves() -> (IsometricAction, SubsetMask) {
        let action = symmetric_left_action(4, &[vec![0, 1, 2, 3], vec![1, 0, 2, 3]]).unwrap();
        let a = SubsetMask::from_bits(
            permutations(4)
                .iter()
                .map(|s| {
                    let pos = |v: usize| s.iter().position(|&x| x == v).unwrap();
                    pos(0) < pos(1)
                })
                .collect(),
        );
        (action, a)
    }

    #[test]
    fn s4_half_split_has_no_essential_part() {
        let (action, a) = s4_halves();
        assert_eq!(a.count(), 12);
        assert_eq!(a.map(&action.elements()[1]), a.complement());
        for eps in [0.1, 0.2, 0.24] {
            assert!(!is_essential(&action, &a, eps, &[0, 1]).unwrap().essential);
            assert!(!is_essential(&action, &a.complement(), eps, &[0, 1]).unwrap().essential);
        }
        let cover = Cover::new(24, vec![a.clone(), a.complement()]).unwrap();
        let check = concentration_property_check(&action, &cover, 0.2, &[0, 1]).unwrap();
        assert!(!check.holds && check.essential_part.is_none());
        // at the smallest positive distance, thickening reaches the other half
        assert!(is_essential(&action, &a, 0.5, &[0, 1]).unwrap().essential);
    }

    #[test]
    fn essential_examples() {
        let (action, a) = s4_halves();
        let id = is_essential(&action, &a, 0.1, &[0]).unwrap();
        assert!(id.essential && a.contains(id.witness.unwrap()));
        assert!(is_essential(&action, &SubsetMask::full(24), 0.01, &[0, 1]).unwrap().essential);
        assert!(is_essential(&action, &a, 0.1, &[2]).is_err());
        assert_eq!(
            is_essential(&action, &SubsetMask::empty(24), 0.1, &[0]),
            Err(Error::EmptySet)
        );
        let whole = Cover::new(24, vec![SubsetMask::full(24)]).unwrap();
        assert!(concentration_property_check(&action, &whole, 0.1, &[0, 1]).unwrap().holds);
    }

    #[test]
    fn fixed_point_examples() {
        let s3 = symmetric_group(3).unwrap();
        let id = IsometricAction::new(s3, vec![(0..6).collect()], None).unwrap();
        assert_eq!(fixed_points(&id), (0..6).collect::<Vec<_>>());

        let cube = cube_coordinate_action(3, &permutations(3)).unwrap();
        assert_eq!(fixed_points(&cube), vec![0, 7]);

        let rows = vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        let triangle = FiniteMMSpace::from_rows(vec!["a".into(), "b".into(), "c".into()], &rows, vec![1.0 / 3.0; 3]).unwrap();
        let shift = IsometricAction::new(triangle, vec![vec![1, 2, 0]], None).unwrap();
        assert!(fixed_points(&shift).is_empty());
    }

    #[test]
    fn rejects_non_isometries() {
        let rows = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let path = FiniteMMSpace::from_rows(vec!["a".into(), "b".into(), "c".into()], &rows, vec![1.0 / 3.0; 3]).unwrap();
        assert!(matches!(
            IsometricAction::new(path.clone(), vec![vec![1, 0, 2]], None),
            Err(Error::NotIsometric { .. })
        ));
        assert!(matches!(
            IsometricAction::new(path.clone(), vec![vec![0, 0, 2]], None),
            Err(Error::NotBijective(_))
        ));
        // swapping an end with the middle shrinks d(a, c) from 2 to 1
        let bad = IsometricAction::new_unchecked(path, vec![vec![1, 0, 2]], None);
        let a = SubsetMask::from_indices(3, [0]);
        assert!(!translate_commutation_check(&bad, &a, 1.0, 0).unwrap());
        assert!(Cover::new(3, vec![a.clone(), a]).is_err());
    }

    #[test]
    fn isometries_commute_with_thickening() {
        let (s4, a) = s4_halves();
        let cube = cube_coordinate_action(4, &permutations(4)).unwrap();
        for action in [&s4, &cube] {
            let n = action.space().len();
            for k in 0..action.elements().len() {
                for eps in [0.0, 0.25, 0.5, 0.75] {
                    let set = SubsetMask::from_indices(n, [0, 3, n / 2]);
                    assert!(translate_commutation_check(action, &set, eps, k).unwrap());
                }
            }
        }
        assert!(translate_commutation_check(&s4, &a, 0.3, 1).unwrap());
    }

    #[test]
    fn counting_forces_common_points() {
        // a measure-preserving action and a set whose thickening has mass
        // above 1 - 1/m: any m translates meet
        let cube = hamming_cube(4).unwrap();
        let action = cube_coordinate_action(4, &permutations(4)).unwrap();
        assert!(action.preserves_measure());
        for v in 0..16usize {
            let ball = SubsetMask::from_bits((0..16).map(|x| cube.dist(x, v) <= 0.25).collect());
            for eps in [0.25, 0.5] {
                let hood = neighborhood(&cube, &ball, eps).unwrap();
                let mass = measure(&cube, &hood);
                for m in 1..=action.elements().len() {
                    if mass > 1.0 - 1.0 / m as f64 {
                        let family: Vec<usize> = (0..m).collect();
                        assert!(is_essential(&action, &ball, eps, &family).unwrap().essential);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn fixed_point_implies_concentration_property(
            n in 2usize..=8,
            seed in any::<u64>(),
            labels in proptest::collection::vec(0usize..4, 8),
            eps in 0.0f64..2.5,
            family_bits in any::<u32>(),
        ) {
            let mut rng = stream_rng(seed, 1);
            let mut perm: Vec<usize> = (1..n).collect();
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
            perm.insert(0, 0);
            let action = invariant_space_for(&perm, seed).unwrap();
            prop_assert!(fixed_points(&action).contains(&0));
            let cover = Cover::from_labels(&labels[..n]).unwrap();
            let family: Vec<usize> = (0..action.elements().len()).filter(|k| family_bits >> (k % 32) & 1 == 1).collect();
            prop_assert!(concentration_property_check(&action, &cover, eps, &family).unwrap().holds);
            for k in 0..action.elements().len() {
                prop_assert!(translate_commutation_check(&action, &cover.parts()[0], eps, k).unwrap());
            }
        }

        #[test]
        fn essential_is_monotone_in_eps(seed in any::<u64>(), bits in 1u32..(1 << 6), e1 in 0.0f64..2.0, e2 in 0.0f64..2.0) {
            let action = invariant_space_for(&[1, 2, 0, 4, 5, 3], seed).unwrap();
            let set = SubsetMask::from_bits((0..6).map(|i| bits >> i & 1 == 1).collect());
            let (lo, hi) = (e1.min(e2), e1.max(e2));
            let family = [0, 1, 2];
            if is_essential(&action, &set, lo, &family).unwrap().essential {
                prop_assert!(is_essential(&action, &set, hi, &family).unwrap().essential);
            }
        }
    }
}
