//! `--kind` grammar for building schemes from the command line:
//!
//! - `weight:w`
//! - `partition:eta` (full download inside each block) or
//!   `partition:eta:w` (weight-`w` inside each block)
//! - `mix:lambda:left:right`: weight-`left` and weight-`right` schemes,
//!   `right` used with probability `lambda`
//! - `target:metric:rho`: the capacity-achieving scheme for `rho` bits

use std::fmt;
use std::str::FromStr;

use wpir_core::prob::{self, Ratio};
use wpir_core::schemes::{full_download_pir, mix_schemes, partition_scheme, scheme_for_leakage, weight_scheme};
use wpir_core::{Metric, MixSpec, Scheme, SchemeError};

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeKind {
    Weight(usize),
    Partition { parts: usize, weight: Option<usize> },
    Mix { lambda: Ratio, left: usize, right: usize },
    Target { metric: Metric, rho: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KindError(pub String);

impl fmt::Display for KindError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scheme kind: {}", self.0)
    }
}

impl std::error::Error for KindError {}

fn int(field: &str, s: &str) -> Result<usize, KindError> {
    s.parse().map_err(|_| KindError(format!("{field} must be a positive integer, got {s:?}")))
}

impl FromStr for SchemeKind {
    type Err = KindError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["weight", w] => Ok(Self::Weight(int("w", w)?)),
            ["partition", eta] => Ok(Self::Partition { parts: int("eta", eta)?, weight: None }),
            ["partition", eta, w] => Ok(Self::Partition { parts: int("eta", eta)?, weight: Some(int("w", w)?) }),
            ["mix", lambda, left, right] => Ok(Self::Mix {
                lambda: prob::parse_ratio(lambda).map_err(|e| KindError(e.to_string()))?,
                left: int("left", left)?,
                right: int("right", right)?,
            }),
            ["target", metric, rho] => Ok(Self::Target {
                metric: metric.parse().map_err(KindError)?,
                rho: rho
                    .parse()
                    .map_err(|_| KindError(format!("rho must be a number of bits, got {rho:?}")))?,
            }),
            _ => Err(KindError(format!(
                "{s:?} (expected weight:w, partition:eta[:w], mix:lambda:left:right or target:metric:rho)"
            ))),
        }
    }
}

impl SchemeKind {
    pub fn build(&self, num_files: usize) -> Result<Scheme, SchemeError> {
        match *self {
            Self::Weight(w) => weight_scheme(num_files, w),
            Self::Partition { parts, weight } => {
                if parts == 0 || !num_files.is_multiple_of(parts) {
                    return Err(SchemeError::PartitionDivisor { num_files, parts });
                }
                let block = num_files / parts;
                let sub = match weight {
                    None => full_download_pir(block)?,
                    Some(w) => weight_scheme(block, w)?,
                };
                partition_scheme(num_files, parts, &sub)
            }
            Self::Mix { ref lambda, left, right } => mix_schemes(&MixSpec {
                lambda: lambda.clone(),
                left: weight_scheme(num_files, left)?,
                right: weight_scheme(num_files, right)?,
            }),
            Self::Target { metric, rho } => scheme_for_leakage(num_files, metric, rho),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        assert_eq!("weight:2".parse::<SchemeKind>().unwrap(), SchemeKind::Weight(2));
        assert_eq!(
            "partition:3".parse::<SchemeKind>().unwrap(),
            SchemeKind::Partition { parts: 3, weight: None }
        );
        assert_eq!(
            "mix:1/3:2:1".parse::<SchemeKind>().unwrap(),
            SchemeKind::Mix { lambda: prob::ratio(1, 3), left: 2, right: 1 }
        );
        assert_eq!(
            "target:maxl:0".parse::<SchemeKind>().unwrap(),
            SchemeKind::Target { metric: Metric::MaxL, rho: 0.0 }
        );
        assert!("weight".parse::<SchemeKind>().is_err());
        assert!("target:ub:1".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn builds() {
        assert!(matches!(
            SchemeKind::Partition { parts: 4, weight: None }.build(6),
            Err(SchemeError::PartitionDivisor { .. })
        ));
        assert!(matches!(SchemeKind::Weight(4).build(3), Err(SchemeError::WeightRange { .. })));
        let s = SchemeKind::Target { metric: Metric::MaxL, rho: 0.0 }.build(4).unwrap();
        assert_eq!(s.mechanism().num_queries(), 1);
    }
}
