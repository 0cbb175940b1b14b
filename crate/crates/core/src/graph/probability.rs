use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{check_probability, InfluenceGraph};
use crate::error::{Error, Result};

/// How edge activation probabilities are set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbabilityModel {
    /// Every edge gets the same probability.
    Uniform(f64),
    /// `p(u, v) = 1 / d_in(v)`.
    WeightedCascade,
    /// Keep the probabilities read from the edge list.
    FromFile,
}

impl fmt::Display for ProbabilityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbabilityModel::Uniform(p) if p.is_nan() => f.write_str("uniform"),
            ProbabilityModel::Uniform(p) => write!(f, "uniform:{p}"),
            ProbabilityModel::WeightedCascade => f.write_str("wic"),
            ProbabilityModel::FromFile => f.write_str("file"),
        }
    }
}

impl FromStr for ProbabilityModel {
    type Err = Error;

    /// Accepts `uniform`, `uniform:P`, `wic` and `file`. Bare `uniform` means
    /// the probability comes from elsewhere (a sweep list) and parses as NaN.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "wic" | "weighted-cascade" => Ok(ProbabilityModel::WeightedCascade),
            "file" => Ok(ProbabilityModel::FromFile),
            "uniform" => Ok(ProbabilityModel::Uniform(f64::NAN)),
            other => {
                let p = other
                    .strip_prefix("uniform:")
                    .ok_or_else(|| Error::param(format!("unknown probability model {other:?}")))?;
                let p: f64 = p
                    .parse()
                    .map_err(|_| Error::param(format!("invalid probability {p:?}")))?;
                check_probability(p)?;
                Ok(ProbabilityModel::Uniform(p))
            }
        }
    }
}

impl Serialize for ProbabilityModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ProbabilityModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn assign_probabilities(
    graph: &InfluenceGraph,
    model: ProbabilityModel,
) -> Result<InfluenceGraph> {
    match model {
        ProbabilityModel::Uniform(p) => {
            check_probability(p)?;
            Ok(graph.map_probabilities(|_, _, _| p))
        }
        ProbabilityModel::WeightedCascade => {
            // every edge into v contributes to d_in(v), so d_in(v) >= 1 here
            Ok(graph.map_probabilities(|_, v, _| 1.0 / graph.in_degree(v) as f64))
        }
        ProbabilityModel::FromFile => {
            if let Some((u, v, _)) = graph.edges().find(|e| e.2.is_none()) {
                return Err(Error::MissingProbability {
                    source_id: graph.original_id(u),
                    target_id: graph.original_id(v),
                });
            }
            Ok(graph.clone())
        }
    }
}
