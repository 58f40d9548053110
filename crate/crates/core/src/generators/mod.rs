//! Exact and sampled instances of the standard Lévy families.

mod sampling;
mod sl2;

pub use sampling::{
    haar_rotation, so_n_sampled, sphere_point, sphere_sampled, stream_rng, SamplerConfig,
};
pub use sl2::{sl2_word_metric, Sl2Element, WordMetricGroup, DEFAULT_SL2_CAP, SL2_GENERATORS};

use crate::error::{Error, Result};
use crate::space::{FiniteMMSpace, Metric, SphereGeometry};
use serde::{Deserialize, Serialize};

/// Largest cube dimension that is fully enumerated.
pub const MAX_CUBE_DIM: usize = 20;
/// Default cap on `n` for the enumerated symmetric group.
pub const DEFAULT_SYMMETRIC_CAP: usize = 7;
/// Default cap on the number of points of a product space.
pub const DEFAULT_PRODUCT_CAP: u128 = 1 << 20;

/// The Hamming cube `{0,1}^n` with normalized Hamming distance and uniform weights.
///
/// Point `b` is the word whose coordinate `i` is bit `i` of `b`; labels list
/// coordinates left to right.
pub fn hamming_cube(n: usize) -> Result<FiniteMMSpace> {
    if n == 0 {
        return Err(Error::InvalidArgument("cube dimension must be positive".into()));
    }
    if n > MAX_CUBE_DIM {
        return Err(Error::OverCap {
            what: "cube dimension",
            size: n as u128,
            cap: MAX_CUBE_DIM as u128,
            hint: "; sample vertices with product-space sampling instead of full enumeration",
        });
    }
    product_space(&[0.5, 0.5], n)
}

/// All permutations of `{0..n-1}` in lexicographic order, with normalized
/// Hamming distance and uniform weights.
pub fn symmetric_group(n: usize) -> Result<FiniteMMSpace> {
    symmetric_group_with_cap(n, DEFAULT_SYMMETRIC_CAP)
}

pub fn symmetric_group_with_cap(n: usize, cap: usize) -> Result<FiniteMMSpace> {
    if n == 0 {
        return Err(Error::InvalidArgument("permutation degree must be positive".into()));
    }
    if n > cap {
        return Err(Error::OverCap {
            what: "permutation degree",
            size: n as u128,
            cap: cap as u128,
            hint: "",
        });
    }
    let perms = permutations(n);
    let count = perms.len();
    let labels = perms
        .iter()
        .map(|p| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    let words = perms.into_iter().flatten().map(|x| x as u16).collect();
    FiniteMMSpace::new(
        labels,
        Metric::Hamming { word_len: n, words },
        vec![1.0 / count as f64; count],
    )
}

/// Lexicographic list of all permutations (one-line notation).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    out
}

/// `X^n` for a finite probability space `X` on `k` atoms, with the product
/// measure and normalized Hamming distance.
///
/// Point indices enumerate words in base `k`, coordinate 0 least significant.
pub fn product_space(base_weights: &[f64], n: usize) -> Result<FiniteMMSpace> {
    product_space_with_cap(base_weights, n, DEFAULT_PRODUCT_CAP)
}

pub fn product_space_with_cap(base_weights: &[f64], n: usize, cap: u128) -> Result<FiniteMMSpace> {
    let k = base_weights.len();
    if k == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "product space needs at least one atom and one factor".into(),
        ));
    }
    if k > u16::MAX as usize {
        return Err(Error::InvalidArgument("too many atoms".into()));
    }
    let size = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::OverCap {
            what: "product space size",
            size,
            cap,
            hint: "",
        });
    }
    let size = size as usize;
    let mut words = Vec::with_capacity(size * n);
    let mut weights = Vec::with_capacity(size);
    let mut labels = Vec::with_capacity(size);
    let mut digits = vec![0usize; n];
    for _ in 0..size {
        words.extend(digits.iter().map(|&d| d as u16));
        weights.push(digits.iter().map(|&d| base_weights[d]).product::<f64>());
        labels.push(if k <= 10 {
            digits.iter().map(|d| d.to_string()).collect::<String>()
        } else {
            digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
        });
        for d in digits.iter_mut() {
            *d += 1;
            if *d < k {
                break;
            }
            *d = 0;
        }
    }
    FiniteMMSpace::new(labels, Metric::Hamming { word_len: n, words }, weights)
}

/// JSON generator descriptor, tagged by `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorDescriptor {
    HammingCube {
        n: usize,
    },
    SymmetricGroup {
        n: usize,
    },
    Sphere {
        dim: usize,
        seed: u64,
        sample_count: usize,
        #[serde(default = "default_geometry")]
        metric: SphereGeometry,
    },
    SoN {
        n: usize,
        seed: u64,
        sample_count: usize,
    },
    Sl2 {
        p: u64,
    },
    Product {
        base_weights: Vec<f64>,
        n: usize,
    },
}

fn default_geometry() -> SphereGeometry {
    SphereGeometry::Geodesic
}

impl GeneratorDescriptor {
    pub fn generate(&self) -> Result<FiniteMMSpace> {
        match self {
            GeneratorDescriptor::HammingCube { n } => hamming_cube(*n),
            GeneratorDescriptor::SymmetricGroup { n } => symmetric_group(*n),
            GeneratorDescriptor::Sphere {
                dim,
                seed,
                sample_count,
                metric,
            } => sphere_sampled(*dim, &SamplerConfig::new(*seed, *sample_count)?, *metric),
            GeneratorDescriptor::SoN {
                n,
                seed,
                sample_count,
            } => so_n_sampled(*n, &SamplerConfig::new(*seed, *sample_count)?),
            GeneratorDescriptor::Sl2 { p } => Ok(sl2_word_metric(*p)?.to_space()),
            GeneratorDescriptor::Product { base_weights, n } => product_space(base_weights, *n),
        }
    }

    /// The descriptor itself, plus the generating set for `sl2`.
    pub fn metadata(&self) -> serde_json::Value {
        let mut meta = serde_json::to_value(self).expect("serializable");
        if let GeneratorDescriptor::Sl2 { .. } = self {
            meta["generators"] = serde_json::json!(SL2_GENERATORS);
            meta["word_metric"] = serde_json::json!("unnormalized");
        }
        meta
    }
}
