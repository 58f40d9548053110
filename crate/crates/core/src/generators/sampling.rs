use crate::error::{Error, Result};
use crate::space::{FiniteMMSpace, Metric, SphereGeometry};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Seed and size of a Monte Carlo sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub sample_count: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64, sample_count: usize) -> Result<Self> {
        if sample_count == 0 {
            return Err(Error::InvalidArgument("sample_count must be at least 1".into()));
        }
        Ok(SamplerConfig { seed, sample_count })
    }
}

/// Independent generator for sample `index` under `seed`.
///
/// Every sample owns its stream, so the output does not depend on how
/// samples are distributed over worker threads.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform point on the unit sphere in `ambient` dimensions.
pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R, ambient: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..ambient).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-150 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `sample_count` uniform points on `S^dim` inside `R^(dim+1)`.
pub fn sphere_sampled(
    dim: usize,
    cfg: &SamplerConfig,
    geometry: SphereGeometry,
) -> Result<FiniteMMSpace> {
    if dim == 0 {
        return Err(Error::InvalidArgument("sphere dimension must be at least 1".into()));
    }
    let ambient = dim + 1;
    let coords: Vec<f64> = (0..cfg.sample_count as u64)
        .into_par_iter()
        .flat_map_iter(|i| sphere_point(&mut stream_rng(cfg.seed, i), ambient))
        .collect();
    let n = cfg.sample_count;
    FiniteMMSpace::new(
        (0..n).map(|i| format!("x{i}")).collect(),
        Metric::Sphere {
            ambient,
            coords,
            geometry,
        },
        vec![1.0 / n as f64; n],
    )
}

/// Haar-distributed element of `SO(n)`.
///
/// QR of a Gaussian matrix, columns rescaled by the signs of `R`'s diagonal
/// (this makes the law Haar on `O(n)`), then the last column negated when the
/// determinant is `-1`.
pub fn haar_rotation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    loop {
        let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = g.qr();
        let r = qr.r();
        if (0..n).any(|i| r[(i, i)].abs() < 1e-300) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        if q.determinant() < 0.0 {
            q.column_mut(n - 1).neg_mut();
        }
        return q;
    }
}

/// `sample_count` Haar rotations under the operator-norm distance.
pub fn so_n_sampled(n: usize, cfg: &SamplerConfig) -> Result<FiniteMMSpace> {
    if n < 2 {
        return Err(Error::InvalidArgument("SO(n) needs n >= 2".into()));
    }
    let entries: Vec<f64> = (0..cfg.sample_count as u64)
        .into_par_iter()
        .flat_map_iter(|i| {
            let q = haar_rotation(&mut stream_rng(cfg.seed, i), n);
            // row-major
            let mut out = Vec::with_capacity(n * n);
            for r in 0..n {
                for c in 0..n {
                    out.push(q[(r, c)]);
                }
            }
            out
        })
        .collect();
    let count = cfg.sample_count;
    FiniteMMSpace::new(
        (0..count).map(|i| format!("g{i}")).collect(),
        Metric::OperatorNorm { order: n, entries },
        vec![1.0 / count as f64; count],
    )
}
