//! JSON documents for spaces and the small auxiliary inputs (measures,
//! functions, subsets, actions). Matrices are row-major; all text is UTF-8.

use crate::error::{Error, Result};
use crate::generators::hamming_cube;
use crate::space::{FiniteMMSpace, Metric, SphereGeometry, SubsetMask};
use serde::{Deserialize, Serialize};

/// On-disk form of a [`FiniteMMSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub metric: MetricDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MetricDocument {
    Matrix {
        data: Vec<Vec<f64>>,
    },
    /// Shorthand for the full cube `{0,1}^n`.
    HammingNormalized {
        n: usize,
    },
    HammingWords {
        words: Vec<Vec<u16>>,
    },
    SpherePoints {
        geometry: SphereGeometry,
        coords: Vec<Vec<f64>>,
    },
    OperatorNorm {
        order: usize,
        matrices: Vec<Vec<f64>>,
    },
}

impl SpaceDocument {
    pub fn from_space(space: &FiniteMMSpace) -> Self {
        let metric = match space.metric() {
            Metric::Matrix { n, data } => MetricDocument::Matrix {
                data: data.chunks((*n).max(1)).map(<[f64]>::to_vec).collect(),
            },
            Metric::Hamming { word_len, words } => MetricDocument::HammingWords {
                words: words.chunks(*word_len).map(<[u16]>::to_vec).collect(),
            },
            Metric::Sphere {
                ambient,
                coords,
                geometry,
            } => MetricDocument::SpherePoints {
                geometry: *geometry,
                coords: coords.chunks(*ambient).map(<[f64]>::to_vec).collect(),
            },
            Metric::OperatorNorm { order, entries } => MetricDocument::OperatorNorm {
                order: *order,
                matrices: entries.chunks(order * order).map(<[f64]>::to_vec).collect(),
            },
        };
        SpaceDocument {
            labels: Some(space.labels().to_vec()),
            metric,
            weights: Some(space.weights().to_vec()),
            metadata: None,
        }
    }

    /// Builds the space without checking axioms; shape errors still fail.
    pub fn to_space_unchecked(&self) -> Result<FiniteMMSpace> {
        let (metric, default_labels, default_weights) = match &self.metric {
            MetricDocument::HammingNormalized { n } => {
                let cube = hamming_cube(*n)?;
                (
                    cube.metric().clone(),
                    Some(cube.labels().to_vec()),
                    Some(cube.weights().to_vec()),
                )
            }
            MetricDocument::Matrix { data } => {
                let n = data.len();
                if let Some((i, r)) = data.iter().enumerate().find(|(_, r)| r.len() != n) {
                    return Err(Error::InvalidSpace(vec![format!(
                        "row {i} has length {}, expected {n}",
                        r.len()
                    )]));
                }
                let metric = Metric::Matrix {
                    n,
                    data: data.concat(),
                };
                (metric, None, None)
            }
            MetricDocument::HammingWords { words } => {
                let word_len = words.first().map_or(0, Vec::len);
                if words.iter().any(|w| w.len() != word_len) {
                    return Err(Error::Document("hamming words differ in length".into()));
                }
                (
                    Metric::Hamming {
                        word_len,
                        words: words.concat(),
                    },
                    None,
                    None,
                )
            }
            MetricDocument::SpherePoints { geometry, coords } => {
                let ambient = coords.first().map_or(0, Vec::len);
                if coords.iter().any(|c| c.len() != ambient) {
                    return Err(Error::Document("sphere points differ in dimension".into()));
                }
                (
                    Metric::Sphere {
                        ambient,
                        coords: coords.concat(),
                        geometry: *geometry,
                    },
                    None,
                    None,
                )
            }
            MetricDocument::OperatorNorm { order, matrices } => {
                if matrices.iter().any(|m| m.len() != order * order) {
                    return Err(Error::Document(format!(
                        "operator-norm matrices must have {} entries",
                        order * order
                    )));
                }
                (
                    Metric::OperatorNorm {
                        order: *order,
                        entries: matrices.concat(),
                    },
                    None,
                    None,
                )
            }
        };
        let n = metric.len();
        let labels = self
            .labels
            .clone()
            .or(default_labels)
            .unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
        let weights = self
            .weights
            .clone()
            .or(default_weights)
            .ok_or_else(|| Error::Document("missing weights".into()))?;
        Ok(FiniteMMSpace::new_unchecked(labels, metric, weights))
    }

    /// Builds and validates the space.
    pub fn to_space(&self) -> Result<FiniteMMSpace> {
        let raw = self.to_space_unchecked()?;
        let labels = raw.labels().to_vec();
        let weights = raw.weights().to_vec();
        FiniteMMSpace::new(labels, raw.metric().clone(), weights)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
}

pub fn parse_space(text: &str) -> Result<FiniteMMSpace> {
    parse::<SpaceDocument>(text)?.to_space()
}

pub fn space_to_json(space: &FiniteMMSpace) -> String {
    serde_json::to_string(&SpaceDocument::from_space(space)).expect("serializable")
}

pub fn space_to_json_with_metadata(space: &FiniteMMSpace, metadata: serde_json::Value) -> String {
    let mut doc = SpaceDocument::from_space(space);
    doc.metadata = Some(metadata);
    serde_json::to_string(&doc).expect("serializable")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VectorDoc {
    Bare(Vec<f64>),
    Weights { weights: Vec<f64> },
    Values { values: Vec<f64> },
}

/// A probability or value vector, either bare or as `{"weights": [...]}`.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    Ok(match parse::<VectorDoc>(text)? {
        VectorDoc::Bare(v) | VectorDoc::Weights { weights: v } | VectorDoc::Values { values: v } => v,
    })
}

/// Values of a function on points plus its asserted Lipschitz constant
/// (default 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDocument {
    pub values: Vec<f64>,
    #[serde(default = "one")]
    pub constant: f64,
}

fn one() -> f64 {
    1.0
}

pub fn parse_function(text: &str) -> Result<FunctionDocument> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Doc {
        Bare(Vec<f64>),
        Full(FunctionDocument),
    }
    Ok(match parse::<Doc>(text)? {
        Doc::Bare(values) => FunctionDocument {
            values,
            constant: 1.0,
        },
        Doc::Full(f) => f,
    })
}

/// A subset as `{"points": [indices]}`, a bare index list, or a boolean mask.
pub fn parse_subset(text: &str, n: usize) -> Result<SubsetMask> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Doc {
        Mask(Vec<bool>),
        Indices(Vec<usize>),
        Points { points: Vec<usize> },
    }
    let indices = match parse::<Doc>(text)? {
        Doc::Mask(bits) => {
            if bits.len() != n {
                return Err(Error::MaskLength {
                    expected: n,
                    got: bits.len(),
                });
            }
            return Ok(SubsetMask::from_bits(bits));
        }
        Doc::Indices(ix) | Doc::Points { points: ix } => ix,
    };
    if let Some(bad) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::Document(format!("point index {bad} out of range for {n} points")));
    }
    Ok(SubsetMask::from_indices(n, indices))
}

/// Point permutations of an action, `{"permutations": [[...]], "names": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionDocument {
    pub permutations: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

pub fn parse_action(text: &str) -> Result<ActionDocument> {
    parse(text)
}
