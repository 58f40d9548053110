use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// How the values of a concentration curve were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Exact infimum over all half-measure sets.
    Exact,
    /// Best set found by a heuristic search; a lower bound on the true value.
    LowerBoundSearch,
    /// Closed-form or quadrature value of an extremal (cap) set.
    AnalyticCap,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveKind::Exact => "exact",
            CurveKind::LowerBoundSearch => "lower_bound_search",
            CurveKind::AnalyticCap => "analytic_cap",
        })
    }
}

impl FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(CurveKind::Exact),
            "lower_bound_search" => Ok(CurveKind::LowerBoundSearch),
            "analytic_cap" => Ok(CurveKind::AnalyticCap),
            other => Err(Error::Document(format!("unknown curve kind '{other}'"))),
        }
    }
}

const MONOTONE_TOL: f64 = 1e-12;

/// Sampled values of a concentration function.
///
/// `alpha(0) = 1/2` by convention, so [`ConcentrationCurve::value_at`]
/// returns one half below the first sampled radius.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationCurve {
    eps: Vec<f64>,
    alpha: Vec<f64>,
    kind: CurveKind,
}

impl ConcentrationCurve {
    pub fn new(eps: Vec<f64>, alpha: Vec<f64>, kind: CurveKind) -> Result<Self> {
        if eps.len() != alpha.len() {
            return Err(Error::InvalidArgument(format!(
                "curve has {} radii but {} values",
                eps.len(),
                alpha.len()
            )));
        }
        if eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidArgument("curve radii must be positive".into()));
        }
        if eps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("curve radii must be strictly ascending".into()));
        }
        if alpha.iter().any(|a| !(0.0..=0.5).contains(a)) {
            return Err(Error::InvalidArgument("curve values must lie in [0, 1/2]".into()));
        }
        if alpha.windows(2).any(|w| w[1] > w[0] + MONOTONE_TOL) {
            return Err(Error::InvalidArgument("curve values must be non-increasing".into()));
        }
        Ok(ConcentrationCurve { eps, alpha, kind })
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    /// Value at the largest sampled radius not exceeding `eps`.
    ///
    /// Since concentration functions are non-increasing this never
    /// understates the value at `eps`.
    pub fn value_at(&self, eps: f64) -> f64 {
        match self.eps.iter().rposition(|e| *e <= eps + 1e-12) {
            Some(k) => self.alpha[k],
            None => 0.5,
        }
    }

    /// CSV with header `eps,alpha,kind`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,alpha,kind\n");
        for (e, a) in self.eps.iter().zip(&self.alpha) {
            out.push_str(&format!("{e:?},{a:?},{}\n", self.kind));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Document("empty curve file".into()))?;
        if header.trim() != "eps,alpha,kind" {
            return Err(Error::Document(format!("unexpected curve header '{header}'")));
        }
        let mut eps = Vec::new();
        let mut alpha = Vec::new();
        let mut kind = None;
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Document(format!("curve row {} has {} fields", lineno + 2, fields.len())));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Document(format!("curve row {}: {e}", lineno + 2)))
            };
            eps.push(parse(fields[0])?);
            alpha.push(parse(fields[1])?);
            let k: CurveKind = fields[2].parse()?;
            if kind.is_some_and(|prev| prev != k) {
                return Err(Error::Document("mixed curve kinds in one file".into()));
            }
            kind = Some(k);
        }
        Self::new(eps, alpha, kind.unwrap_or(CurveKind::Exact))
    }
}
