//! Computational toolkit for finite metric-measure spaces.
//!
//! Everything operates on [`FiniteMMSpace`]: a finite set of points with a
//! metric and a probability measure. On top of it the crate provides exact
//! and searched concentration functions, generators for the classical Lévy
//! families, the transportation distance, an estimator of the observable
//! distance between spaces, finite group actions (essential sets, the
//! concentration property) and exhaustive Ramsey search.

pub mod concentration;
pub mod dynamics;
pub mod error;
pub mod generators;
pub mod io;
pub mod observable;
pub mod space;
pub mod transport;

pub use error::{Error, Result};
pub use space::{
    alpha_exact, diameter, measure, neighborhood, validate_space, ConcentrationCurve, CurveKind,
    FiniteMMSpace, Metric, SphereGeometry, SubsetMask,
};
