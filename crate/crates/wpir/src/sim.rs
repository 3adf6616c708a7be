//! Retrieval simulation against a database, and a chi-square audit of the
//! observed queries.
//!
//! Trial `t` draws from ChaCha8 seeded with `seed_from_u64(seed)` on stream
//! `t`: first the requested file (uniform requests only), then one 64-bit
//! word for the inverse-CDF query draw. Results are integer sums, so they do
//! not depend on how trials are split across threads.

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;
use wpir_core::metrics::download_cost;
use wpir_core::prob::{self, Ratio};
use wpir_core::sampling::QuerySampler;
use wpir_core::{Database, Scheme, Violation};

use crate::format::{json_f64, json_ratio};

/// Trials per parallel work unit.
const CHUNK: u64 = 4096;

/// Smallest expected count a chi-square cell may have; smaller cells are
/// pooled.
pub const MIN_EXPECTED: f64 = 5.0;

/// Quantile of the chi-square law below which a sample is consistent.
pub const AUDIT_LEVEL: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Requests {
    Uniform,
    /// 0-based file indices, cycled: trial `t` asks for `files[t % len]`.
    Fixed(Vec<usize>),
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("scheme has {scheme} files but the database has {database}")]
    Mismatch { scheme: usize, database: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("requested file {0} is not in the database")]
    Request(usize),
    #[error("empty request list")]
    NoRequests,
    #[error("invalid scheme: {0}")]
    Invalid(#[from] Violation),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub num_files: usize,
    pub file_size: usize,
    pub trials: u64,
    pub success_count: u64,
    /// Mean downloaded symbols per trial over `beta`.
    pub empirical_cost: f64,
    /// Standard error of `empirical_cost`.
    pub cost_std_err: f64,
    pub exact_cost: Ratio,
    /// Trials per requested file.
    pub requests: Vec<u64>,
    /// `counts[m][q]`: times query `q` was sent for file `m`.
    pub counts: Vec<Vec<u64>>,
    /// Query labels in alphabet order.
    pub labels: Vec<String>,
    /// Pearson statistic summed over requested files.
    pub chi2_stat: f64,
}

impl SimReport {
    /// `counts[m][q] / requests[m]`, 0 for files never requested.
    pub fn query_freq(&self, m: usize, q: usize) -> f64 {
        match self.requests[m] {
            0 => 0.0,
            n => self.counts[m][q] as f64 / n as f64,
        }
    }

    pub fn all_retrieved(&self) -> bool {
        self.success_count == self.trials
    }

    /// `|empirical - exact| <= k std_err`, with a rounding allowance for
    /// schemes of constant cost.
    pub fn cost_within(&self, k: f64) -> bool {
        (self.empirical_cost - prob::to_f64(&self.exact_cost)).abs() <= k * self.cost_std_err + 1e-12
    }

    /// Keys are sorted; query maps are keyed by label with one entry per
    /// requested file.
    pub fn to_json(&self) -> Value {
        let mut freq = BTreeMap::new();
        let mut counts = BTreeMap::new();
        for (q, label) in self.labels.iter().enumerate() {
            let f: Vec<Value> = (0..self.num_files).map(|m| json_f64(self.query_freq(m, q))).collect();
            let c: Vec<u64> = (0..self.num_files).map(|m| self.counts[m][q]).collect();
            freq.insert(label.clone(), Value::Array(f));
            counts.insert(label.clone(), json!(c));
        }
        json!({
            "M": self.num_files,
            "beta": self.file_size,
            "trials": self.trials,
            "success_count": self.success_count,
            "empirical_cost": json_f64(self.empirical_cost),
            "cost_std_err": json_f64(self.cost_std_err),
            "exact_cost": json_ratio(&self.exact_cost),
            "requests": self.requests,
            "query_freq": freq,
            "query_counts": counts,
            "chi2_stat": json_f64(self.chi2_stat),
        })
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    success: u64,
    symbols: u64,
    symbols_sq: u128,
    requests: Vec<u64>,
    counts: Vec<Vec<u64>>,
}

impl Tally {
    fn new(num_files: usize, num_queries: usize) -> Self {
        Self {
            requests: vec![0; num_files],
            counts: vec![vec![0; num_queries]; num_files],
            ..Self::default()
        }
    }

    fn add(mut self, other: Self) -> Self {
        self.success += other.success;
        self.symbols += other.symbols;
        self.symbols_sq += other.symbols_sq;
        for (a, b) in self.requests.iter_mut().zip(other.requests) {
            *a += b;
        }
        for (ra, rb) in self.counts.iter_mut().zip(other.counts) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += b;
            }
        }
        self
    }
}

struct Run<'a> {
    scheme: &'a Scheme,
    db: &'a Database,
    sampler: QuerySampler,
    requests: &'a Requests,
    seed: u64,
}

impl Run<'_> {
    fn trial(&self, t: u64, tally: &mut Tally) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(t);
        let m = match self.requests {
            Requests::Uniform => rng.random_range(0..self.db.num_files()),
            Requests::Fixed(files) => files[(t % files.len() as u64) as usize],
        };
        let q = self.sampler.sample(m, rng.next_u64());
        let answer = self.scheme.answer(q, self.db);
        if self.scheme.decode(q, m, &answer, self.db.file_size()) == Some(self.db.file(m)) {
            tally.success += 1;
        }
        let len = answer.len() as u64;
        tally.symbols += len;
        tally.symbols_sq += u128::from(len) * u128::from(len);
        tally.requests[m] += 1;
        tally.counts[m][q] += 1;
    }

    fn chunk(&self, range: std::ops::Range<u64>) -> Tally {
        let mech = self.scheme.mechanism();
        let mut tally = Tally::new(mech.num_files(), mech.num_queries());
        for t in range {
            self.trial(t, &mut tally);
        }
        tally
    }
}

/// Runs `trials` retrievals. `parallel` spreads chunks of trials over the
/// rayon pool; the report is identical either way.
pub fn run_trials(
    scheme: &Scheme,
    db: &Database,
    requests: &Requests,
    trials: u64,
    seed: u64,
    parallel: bool,
) -> Result<SimReport, SimError> {
    let mech = scheme.mechanism();
    if mech.num_files() != db.num_files() {
        return Err(SimError::Mismatch { scheme: mech.num_files(), database: db.num_files() });
    }
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    if let Requests::Fixed(files) = requests {
        if files.is_empty() {
            return Err(SimError::NoRequests);
        }
        if let Some(&f) = files.iter().find(|&&f| f >= db.num_files()) {
            return Err(SimError::Request(f));
        }
    }
    let run = Run { scheme, db, sampler: QuerySampler::new(mech)?, requests, seed };
    let chunks: Vec<_> = (0..trials.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(trials))
        .collect();
    let empty = || Tally::new(mech.num_files(), mech.num_queries());
    let tally = if parallel {
        chunks.into_par_iter().map(|r| run.chunk(r)).reduce(empty, Tally::add)
    } else {
        chunks.into_iter().map(|r| run.chunk(r)).fold(empty(), Tally::add)
    };

    let beta = db.file_size() as f64;
    let n = trials as f64;
    let mean = tally.symbols as f64 / n;
    // integer sums keep the variance exact up to the final division
    let var = if trials > 1 {
        let centered = tally.symbols_sq as f64 - (tally.symbols as f64) * mean;
        (centered / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let mut report = SimReport {
        num_files: mech.num_files(),
        file_size: db.file_size(),
        trials,
        success_count: tally.success,
        empirical_cost: mean / beta,
        cost_std_err: (var / n).sqrt() / beta,
        exact_cost: download_cost(scheme)?,
        requests: tally.requests,
        counts: tally.counts,
        labels: mech.queries().iter().map(ToString::to_string).collect(),
        chi2_stat: 0.0,
    };
    report.chi2_stat = pearson(&report, scheme)
        .iter()
        .map(|c| c.as_ref().map_or(0.0, |c| c.stat))
        .sum();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FileAudit {
    /// 0-based requested file.
    pub file: usize,
    pub stat: f64,
    pub dof: usize,
    pub threshold: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditVerdict {
    pub files: Vec<FileAudit>,
    /// The summed statistic against the quantile for the summed degrees of
    /// freedom: one test per scheme.
    pub stat: f64,
    pub dof: usize,
    pub threshold: f64,
    pub consistent: bool,
}

impl AuditVerdict {
    pub fn to_json(&self) -> Value {
        let files: Vec<Value> = self
            .files
            .iter()
            .map(|f| {
                json!({
                    "file": f.file + 1,
                    "chi2_stat": json_f64(f.stat),
                    "dof": f.dof,
                    "threshold": json_f64(f.threshold),
                    "consistent": f.consistent,
                })
            })
            .collect();
        json!({
            "level": AUDIT_LEVEL,
            "chi2_stat": json_f64(self.stat),
            "dof": self.dof,
            "threshold": json_f64(self.threshold),
            "consistent": self.consistent,
            "files": files,
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AuditError {
    #[error("file {file} was requested {requests} times; the audit needs an expected count of at least {MIN_EXPECTED}")]
    InsufficientSamples { file: usize, requests: u64 },
    #[error("report does not come from this scheme")]
    Mismatch,
}

struct Cells {
    stat: f64,
    dof: usize,
}

/// Pearson statistic per file over the queries with positive probability.
/// Cells expected below [`MIN_EXPECTED`] are pooled, smallest first.
/// `None` for files never requested.
fn pearson(report: &SimReport, scheme: &Scheme) -> Vec<Option<Cells>> {
    let mech = scheme.mechanism();
    (0..mech.num_files())
        .map(|m| {
            let n = report.requests[m];
            if n == 0 {
                return None;
            }
            let mut cells: Vec<(f64, f64)> = mech.rows()[m]
                .iter()
                .zip(&report.counts[m])
                .filter(|(p, _)| **p > Ratio::from_integer(0.into()))
                .map(|(p, &c)| (n as f64 * prob::to_f64(p), c as f64))
                .collect();
            cells.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut pooled: Vec<(f64, f64)> = Vec::with_capacity(cells.len());
            let mut acc = (0.0, 0.0);
            for (i, (e, o)) in cells.iter().enumerate() {
                acc = (acc.0 + e, acc.1 + o);
                if acc.0 >= MIN_EXPECTED || i + 1 == cells.len() {
                    pooled.push(acc);
                    acc = (0.0, 0.0);
                }
            }
            // a short last pool joins its neighbour
            if pooled.len() >= 2 && pooled[pooled.len() - 1].0 < MIN_EXPECTED {
                let last = pooled.pop().expect("len >= 2");
                let prev = pooled.last_mut().expect("len >= 1");
                *prev = (prev.0 + last.0, prev.1 + last.1);
            }
            let stat = pooled.iter().map(|(e, o)| (o - e) * (o - e) / e).sum();
            Some(Cells { stat, dof: pooled.len() - 1 })
        })
        .collect()
}

fn quantile(dof: usize) -> f64 {
    if dof == 0 {
        return 0.0;
    }
    ChiSquared::new(dof as f64).expect("positive dof").inverse_cdf(AUDIT_LEVEL)
}

/// Pearson chi-square of the observed queries against `P(q|m)` for every
/// requested file. A file with zero degrees of freedom is trivially
/// consistent.
pub fn audit_leakage(report: &SimReport, scheme: &Scheme) -> Result<AuditVerdict, AuditError> {
    let mech = scheme.mechanism();
    if report.num_files != mech.num_files() || report.labels.len() != mech.num_queries() {
        return Err(AuditError::Mismatch);
    }
    let mut files = Vec::new();
    for (m, cells) in pearson(report, scheme).into_iter().enumerate() {
        let requests = report.requests[m];
        let Some(cells) = cells else { continue };
        if (requests as f64) < MIN_EXPECTED {
            return Err(AuditError::InsufficientSamples { file: m + 1, requests });
        }
        let threshold = quantile(cells.dof);
        let consistent = cells.dof == 0 || cells.stat <= threshold;
        files.push(FileAudit { file: m, stat: cells.stat, dof: cells.dof, threshold, consistent });
    }
    let stat = files.iter().map(|f| f.stat).sum();
    let dof = files.iter().map(|f| f.dof).sum();
    let threshold = quantile(dof);
    Ok(AuditVerdict { consistent: dof == 0 || stat <= threshold, files, stat, dof, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::database_io::generate_database;
    use wpir_core::schemes::{full_download_pir, weight_scheme};

    #[test]
    fn weight_two_of_three() {
        let s = weight_scheme(3, 2).unwrap();
        let db = generate_database(3, 2, 256, 1).unwrap();
        let r = run_trials(&s, &db, &Requests::Uniform, 10_000, 7, false).unwrap();
        assert_eq!(r.success_count, 10_000);
        assert_eq!(r.empirical_cost, 2.0);
        assert_eq!(r.cost_std_err, 0.0);
        assert_eq!(r.requests.iter().sum::<u64>(), 10_000);
        assert!(audit_leakage(&r, &s).unwrap().consistent);
    }

    #[test]
    fn parallel_matches_serial() {
        let s = weight_scheme(5, 2).unwrap();
        let db = generate_database(5, 1, 2, 3).unwrap();
        let a = run_trials(&s, &db, &Requests::Uniform, 20_000, 99, false).unwrap();
        let b = run_trials(&s, &db, &Requests::Uniform, 20_000, 99, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fixed_requests_cycle() {
        let s = full_download_pir(4).unwrap();
        let db = generate_database(4, 3, 4, 0).unwrap();
        let r = run_trials(&s, &db, &Requests::Fixed(vec![1, 3]), 10, 0, false).unwrap();
        assert_eq!(r.requests, [0, 5, 0, 5]);
        assert_eq!(r.empirical_cost, 4.0);
        assert_eq!(
            run_trials(&s, &db, &Requests::Fixed(vec![4]), 10, 0, false).unwrap_err(),
            SimError::Request(4)
        );
    }

    #[test]
    fn biased_counts_are_rejected() {
        let s = weight_scheme(3, 2).unwrap();
        let db = generate_database(3, 1, 2, 0).unwrap();
        let mut r = run_trials(&s, &db, &Requests::Uniform, 30_000, 5, false).unwrap();
        // file 1 asks {1,2} 70% of the time instead of half
        let n = r.requests[0];
        r.counts[0][0] = n * 7 / 10;
        r.counts[0][1] = n - r.counts[0][0];
        let v = audit_leakage(&r, &s).unwrap();
        assert!(!v.files[0].consistent);
        assert!(!v.consistent);
    }

    #[test]
    fn too_few_requests() {
        let s = weight_scheme(3, 2).unwrap();
        let db = generate_database(3, 1, 2, 0).unwrap();
        let r = run_trials(&s, &db, &Requests::Fixed(vec![0]), 3, 5, false).unwrap();
        assert_eq!(
            audit_leakage(&r, &s).unwrap_err(),
            AuditError::InsufficientSamples { file: 1, requests: 3 }
        );
    }
}
