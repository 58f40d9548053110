use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Distance convention for point clouds on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SphereGeometry {
    /// Chordal distance in the ambient Euclidean space.
    Euclidean,
    /// Great-circle distance, in radians.
    Geodesic,
}

impl SphereGeometry {
    /// Ambient chord length corresponding to a distance threshold.
    pub(crate) fn chord_radius(self, eps: f64) -> f64 {
        match self {
            SphereGeometry::Euclidean => eps,
            SphereGeometry::Geodesic => {
                if eps >= std::f64::consts::PI {
                    2.0
                } else {
                    2.0 * (eps / 2.0).sin()
                }
            }
        }
    }
}

/// Storage for the distance function of a finite space.
///
/// Dense matrices are the general case. The structured variants compute
/// distances on demand, which keeps large generated spaces (cubes with a
/// million vertices, sphere samples, rotation samples) within memory.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// Row-major `n x n` matrix.
    Matrix { n: usize, data: Vec<f64> },
    /// Normalized Hamming distance between equal-length code words.
    Hamming { word_len: usize, words: Vec<u16> },
    /// Points on the unit sphere, row-major coordinates in `ambient` dimensions.
    Sphere {
        ambient: usize,
        coords: Vec<f64>,
        geometry: SphereGeometry,
    },
    /// Square matrices (row-major, `order x order` each) under the operator norm.
    OperatorNorm { order: usize, entries: Vec<f64> },
}

impl Metric {
    pub fn len(&self) -> usize {
        match self {
            Metric::Matrix { n, .. } => *n,
            Metric::Hamming { word_len, words } => {
                if *word_len == 0 {
                    0
                } else {
                    words.len() / word_len
                }
            }
            Metric::Sphere { ambient, coords, .. } => {
                if *ambient == 0 {
                    0
                } else {
                    coords.len() / ambient
                }
            }
            Metric::OperatorNorm { order, entries } => {
                let block = order * order;
                if block == 0 {
                    0
                } else {
                    entries.len() / block
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match self {
            Metric::Matrix { n, data } => data[i * n + j],
            Metric::Hamming { word_len, words } => {
                if i == j {
                    return 0.0;
                }
                let a = &words[i * word_len..(i + 1) * word_len];
                let b = &words[j * word_len..(j + 1) * word_len];
                let diff = a.iter().zip(b).filter(|(x, y)| x != y).count();
                diff as f64 / *word_len as f64
            }
            Metric::Sphere {
                ambient,
                coords,
                geometry,
            } => {
                if i == j {
                    return 0.0;
                }
                let a = &coords[i * ambient..(i + 1) * ambient];
                let b = &coords[j * ambient..(j + 1) * ambient];
                match geometry {
                    SphereGeometry::Euclidean => a
                        .iter()
                        .zip(b)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt(),
                    SphereGeometry::Geodesic => {
                        // atan2 form stays accurate for nearly parallel vectors
                        let chord2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                        let chord = chord2.sqrt().min(2.0);
                        2.0 * (chord / 2.0).asin()
                    }
                }
            }
            Metric::OperatorNorm { order, entries } => {
                if i == j {
                    return 0.0;
                }
                let (i, j) = if i < j { (i, j) } else { (j, i) };
                let block = order * order;
                let a = &entries[i * block..(i + 1) * block];
                let b = &entries[j * block..(j + 1) * block];
                operator_norm_of_difference(*order, a, b)
            }
        }
    }

    /// Row-major coordinates of point `i`, for embedded metrics.
    pub(crate) fn coords(&self, i: usize) -> Option<&[f64]> {
        match self {
            Metric::Sphere {
                ambient, coords, ..
            } => Some(&coords[i * ambient..(i + 1) * ambient]),
            _ => None,
        }
    }

    /// Whether the triangle inequality and symmetry hold by construction.
    pub(crate) fn is_structural(&self) -> bool {
        !matches!(self, Metric::Matrix { .. })
    }
}

/// Largest singular value of `a - b`, both row-major `order x order`.
pub(crate) fn operator_norm_of_difference(order: usize, a: &[f64], b: &[f64]) -> f64 {
    let diff = DMatrix::from_fn(order, order, |r, c| a[r * order + c] - b[r * order + c]);
    diff.singular_values().max()
}
