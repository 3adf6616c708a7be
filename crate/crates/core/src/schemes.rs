//! Scheme constructors: weight-`w` schemes, partition schemes, time-sharing
//! and the target-leakage scheme that traces the capacity curve.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::mechanism::{Mechanism, Metric, Query, Scheme, Violation};
use crate::prob::{self, Ratio};
use crate::query::{subsets_of_weight, SubsetQuery};

/// Upper limit on the query alphabet of a constructed scheme.
pub const MAX_ALPHABET: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeError {
    FileCount(usize),
    WeightRange { weight: usize, num_files: usize },
    AlphabetTooLarge { num_files: usize, weight: usize },
    PartitionDivisor { num_files: usize, parts: usize },
    SubschemeFiles { expected: usize, found: usize },
    FileMismatch { left: usize, right: usize },
    LambdaRange,
    LeakageRange { rho: f64, max: f64 },
    TagOverflow,
    Invalid(Violation),
}

impl fmt::Display for SchemeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FileCount(m) => write!(f, "number of files {m} outside [1, {}]", crate::MAX_FILES),
            Self::WeightRange { weight, num_files } => {
                write!(f, "weight {weight} outside [1, {num_files}]")
            }
            Self::AlphabetTooLarge { num_files, weight } => write!(
                f,
                "binom({num_files}, {weight}) queries exceed the alphabet limit of {MAX_ALPHABET}"
            ),
            Self::PartitionDivisor { num_files, parts } => {
                write!(f, "{parts} partitions do not divide {num_files} files")
            }
            Self::SubschemeFiles { expected, found } => {
                write!(f, "subscheme must have {expected} files, has {found}")
            }
            Self::FileMismatch { left, right } => {
                write!(f, "cannot mix schemes over {left} and {right} files")
            }
            Self::LambdaRange => write!(f, "mixing coefficient outside [0, 1]"),
            Self::LeakageRange { rho, max } => {
                write!(f, "leakage {rho} bits outside [0, {max}]")
            }
            Self::TagOverflow => write!(f, "too many nested mixtures"),
            Self::Invalid(v) => write!(f, "invalid mechanism: {v}"),
        }
    }
}

impl core::error::Error for SchemeError {}

impl From<Violation> for SchemeError {
    fn from(v: Violation) -> Self {
        Self::Invalid(v)
    }
}

fn check_files(num_files: usize) -> Result<(), SchemeError> {
    if (1..=crate::MAX_FILES).contains(&num_files) {
        Ok(())
    } else {
        Err(SchemeError::FileCount(num_files))
    }
}

/// All `w`-subsets as queries; a file asks each subset containing it with
/// probability `1 / binom(M-1, w-1)`. Achieves `D = w` and leakage
/// `log2(M/w)` under both metrics.
pub fn weight_scheme(num_files: usize, weight: usize) -> Result<Scheme, SchemeError> {
    check_files(num_files)?;
    if !(1..=num_files).contains(&weight) {
        return Err(SchemeError::WeightRange { weight, num_files });
    }
    let too_large = || SchemeError::AlphabetTooLarge { num_files, weight };
    let size = prob::binomial_u64(num_files as u64, weight as u64).ok_or_else(too_large)?;
    if size > MAX_ALPHABET as u64 {
        return Err(too_large());
    }
    let per_row = prob::binomial_u64(num_files as u64 - 1, weight as u64 - 1).ok_or_else(too_large)?;
    let p = Ratio::new(1.into(), per_row.into());
    let supports = subsets_of_weight(num_files, weight);
    let rows = (0..num_files)
        .map(|m| {
            supports
                .iter()
                .map(|s| if s.contains(m) { p.clone() } else { Ratio::zero() })
                .collect()
        })
        .collect();
    let queries = supports.into_iter().map(Query::new).collect();
    Ok(Scheme::new(Mechanism::new(num_files, queries, rows)?)?)
}

/// Download everything: one query, zero leakage, `D = M`.
pub fn full_download_pir(num_files: usize) -> Result<Scheme, SchemeError> {
    weight_scheme(num_files, num_files)
}

/// Splits the files into `parts` blocks of `M / parts` and runs `sub` inside
/// the block holding the requested file. The query reveals the block, so the
/// leakage grows by `log2(parts)` while the cost stays that of `sub`.
pub fn partition_scheme(num_files: usize, parts: usize, sub: &Scheme) -> Result<Scheme, SchemeError> {
    check_files(num_files)?;
    if parts == 0 || !num_files.is_multiple_of(parts) {
        return Err(SchemeError::PartitionDivisor { num_files, parts });
    }
    let block = num_files / parts;
    if sub.num_files() != block {
        return Err(SchemeError::SubschemeFiles { expected: block, found: sub.num_files() });
    }
    let inner = sub.mechanism();
    let width = inner.num_queries();
    if width.saturating_mul(parts) > MAX_ALPHABET {
        return Err(SchemeError::AlphabetTooLarge { num_files, weight: parts });
    }
    let mut queries = Vec::with_capacity(width * parts);
    for j in 0..parts {
        for q in inner.queries() {
            let support = q.support.shifted(j * block).expect("block fits in M files");
            queries.push(Query::tagged(support, q.tag));
        }
    }
    let rows = (0..num_files)
        .map(|m| {
            let (j, local) = (m / block, m % block);
            let mut row = vec![Ratio::zero(); width * parts];
            row[j * width..(j + 1) * width].clone_from_slice(&inner.rows()[local]);
            row
        })
        .collect();
    Ok(Scheme::new(Mechanism::new(num_files, queries, rows)?)?)
}

/// Time-sharing: use `right` with probability `lambda`, `left` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct MixSpec {
    pub lambda: Ratio,
    pub left: Scheme,
    pub right: Scheme,
}

/// `(1 - lambda) P_left + lambda P_right` over the tagged union of both
/// alphabets. Right-hand tags are shifted past the left ones, so the two
/// alphabets never share a query and MI mixes linearly.
pub fn mix_schemes(spec: &MixSpec) -> Result<Scheme, SchemeError> {
    let (left, right) = (spec.left.mechanism(), spec.right.mechanism());
    if left.num_files() != right.num_files() {
        return Err(SchemeError::FileMismatch { left: left.num_files(), right: right.num_files() });
    }
    if !prob::in_unit_interval(&spec.lambda) {
        return Err(SchemeError::LambdaRange);
    }
    let offset = left
        .queries()
        .iter()
        .map(|q| q.tag)
        .max()
        .unwrap_or(0)
        .checked_add(1)
        .ok_or(SchemeError::TagOverflow)?;
    let mut queries = left.queries().to_vec();
    for q in right.queries() {
        let tag = q.tag.checked_add(offset).ok_or(SchemeError::TagOverflow)?;
        queries.push(Query::tagged(q.support, tag));
    }
    let keep = Ratio::one() - &spec.lambda;
    let rows = left
        .rows()
        .iter()
        .zip(right.rows())
        .map(|(l, r)| {
            l.iter()
                .map(|p| p * &keep)
                .chain(r.iter().map(|p| p * &spec.lambda))
                .collect()
        })
        .collect();
    Ok(Scheme::new(Mechanism::new(left.num_files(), queries, rows)?)?)
}

/// Boundary tolerance: a target within this many bits of a breakpoint
/// `log2(M/w)` gets the pure weight-`w` scheme.
const BREAKPOINT_TOL: f64 = 1e-12;

/// The capacity-achieving scheme for leakage budget `rho` (bits): a
/// time-sharing of the weight-`w` and weight-`(w-1)` schemes whose leakage
/// under `metric` is exactly `rho`, up to the rational approximation of the
/// mixing coefficient.
pub fn scheme_for_leakage(num_files: usize, metric: Metric, rho: f64) -> Result<Scheme, SchemeError> {
    check_files(num_files)?;
    let max = libm::log2(num_files as f64);
    if !(rho >= -BREAKPOINT_TOL && rho <= max + BREAKPOINT_TOL) {
        return Err(SchemeError::LeakageRange { rho, max });
    }
    let m = num_files as f64;
    let breakpoint = |w: usize| libm::log2(m / w as f64);
    // rho in (log2(M/w), log2(M/(w-1))) iff w - 1 < M 2^-rho < w
    let x = m * libm::exp2(-rho);
    let guess = (libm::floor(x) as usize + 1).clamp(2, num_files.max(2));
    for w in [guess.saturating_sub(1), guess, guess + 1] {
        if (1..=num_files).contains(&w) && libm::fabs(rho - breakpoint(w)) <= BREAKPOINT_TOL {
            return weight_scheme(num_files, w);
        }
    }
    if num_files == 1 {
        return full_download_pir(1);
    }
    let w = guess;
    let lambda = match metric {
        Metric::Mi => (rho - breakpoint(w)) / libm::log2(w as f64 / (w - 1) as f64),
        Metric::MaxL => {
            let (lo, hi) = (m / w as f64, m / (w - 1) as f64);
            (libm::exp2(rho) - lo) / (hi - lo)
        }
    };
    let lambda = prob::approx_from_f64(lambda.clamp(0.0, 1.0), 1_000_000, 1e-14)
        .ok_or(SchemeError::LambdaRange)?;
    if lambda.is_zero() {
        return weight_scheme(num_files, w);
    }
    if lambda.is_one() || lambda.is_negative() {
        return weight_scheme(num_files, w - 1);
    }
    mix_schemes(&MixSpec {
        lambda,
        left: weight_scheme(num_files, w)?,
        right: weight_scheme(num_files, w - 1)?,
    })
}

/// The supports of a scheme in alphabet order, for display.
pub fn supports(scheme: &Scheme) -> Vec<SubsetQuery> {
    scheme.mechanism().queries().iter().map(|q| q.support).collect()
}
