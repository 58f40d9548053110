use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{sphere_point, stream_rng};

/// `sqrt(2)/2 - sqrt(3)/3`.
pub fn leader_threshold() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 - 3f64.sqrt() / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeaderCertificate {
    pub inessential_certified: bool,
    pub threshold: f64,
    pub eps: f64,
}

/// Below the threshold, a point in all three thickened block sets would have
/// squared norm at least `3 (sqrt(2)/2 - eps)^2 > 1`, so the translates of the
/// half-sphere set cannot meet.
pub fn leader_certificate(eps: f64) -> Result<LeaderCertificate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let threshold = leader_threshold();
    let margin = std::f64::consts::FRAC_1_SQRT_2 - eps;
    Ok(LeaderCertificate {
        inessential_certified: eps < threshold && 3.0 * margin * margin > 1.0,
        threshold,
        eps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeaderEmpirical {
    pub violations: usize,
    pub ambient: usize,
    pub samples: usize,
    pub eps: f64,
}

/// Whether every one of three equal coordinate blocks of `x` has norm at
/// least `sqrt(2)/2 - eps`.
pub fn leader_counts(x: &[f64], eps: f64) -> bool {
    let block = x.len() / 3;
    let bound = std::f64::consts::FRAC_1_SQRT_2 - eps;
    x.chunks(block)
        .take(3)
        .all(|b| b.iter().map(|v| v * v).sum::<f64>().sqrt() >= bound)
}

/// Samples uniform points on the sphere in dimension `2 dim_half` and counts
/// those lying in all three block sets at once.
pub fn leader_empirical(dim_half: usize, sample_count: usize, eps: f64, seed: u64) -> Result<LeaderEmpirical> {
    let ambient = 2 * dim_half;
    if ambient == 0 || ambient % 6 != 0 {
        return Err(Error::InvalidArgument(format!(
            "ambient dimension {ambient} must be a positive multiple of 6"
        )));
    }
    if !(eps >= 0.0) || eps >= leader_threshold() {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in [0, {}), got {eps}",
            leader_threshold()
        )));
    }
    let violations = (0..sample_count as u64)
        .into_par_iter()
        .filter(|&k| leader_counts(&sphere_point(&mut stream_rng(seed, k), ambient), eps))
        .count();
    Ok(LeaderEmpirical {
        violations,
        ambient,
        samples: sample_count,
        eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_examples() {
        let t = leader_threshold();
        assert!((t - 0.129_756_5).abs() < 1e-7);
        assert!(leader_certificate(0.12).unwrap().inessential_certified);
        assert!(!leader_certificate(0.2).unwrap().inessential_certified);
        assert!(!leader_certificate(t).unwrap().inessential_certified);
        assert!(leader_certificate(0.0).is_err());
    }

    #[test]
    fn empirical_examples() {
        assert_eq!(leader_empirical(3, 2000, 0.12, 1).unwrap().violations, 0);
        assert_eq!(leader_empirical(6, 2000, 0.0, 2).unwrap().violations, 0);
        assert!(leader_empirical(4, 10, 0.1, 0).is_err());
        assert!(leader_empirical(3, 10, 0.2, 0).is_err());
        let mut e1 = vec![0.0; 6];
        e1[0] = 1.0;
        assert!(!leader_counts(&e1, 0.1));
        // equal block norms of 1/sqrt(3) pass only once eps reaches the threshold
        let even = vec![1.0 / 6f64.sqrt(); 6];
        assert!(!leader_counts(&even, 0.12));
        assert!(leader_counts(&even, 0.13));
    }
}
