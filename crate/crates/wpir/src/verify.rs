//! Converse checks over a list of download costs, and their JSON report.

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;
use wpir_core::capacity::{self, maxl_budget_exact, CapacityError};
use wpir_core::converse::oracle::{merge, MAX_ORACLE_FILES};
use wpir_core::converse::rd::expected_segment;
use wpir_core::converse::{best_rd_bound, feasibility_check, lp_verify_optimality, GridOracle, OracleError, OracleResult, RdBoundParams};
use wpir_core::prob::{self, Ratio};
use wpir_core::Metric;

use crate::format::{json_f64, json_ratio};

/// Agreement required between the rate-distortion maximum and the closed form.
pub const RD_TOL: f64 = 1e-12;
/// Default allowed gap between the grid minimum and the closed form.
pub const DEFAULT_ORACLE_TOL: f64 = 0.05;
/// MI oracle values are floating point; soundness allows this much rounding.
pub const MI_SOUNDNESS_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("download cost {} outside [1, {num_files}]", prob::format_ratio(.d))]
    Cost { num_files: u64, d: Ratio },
    #[error("the grid oracle supports at most {MAX_ORACLE_FILES} files")]
    OracleFiles,
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("need at least one download cost")]
    NoCosts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub grid_steps: u32,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub metric: Metric,
    pub oracle: Option<OracleOptions>,
    /// Split the oracle's first-row range over the rayon pool.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub min_bits: f64,
    /// Never below the bound.
    pub sound: bool,
    /// At most `tolerance` above the bound.
    pub tight: bool,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCheck {
    pub d: Ratio,
    pub bound_bits: f64,
    /// The segment `w` whose bound is active at `D` (`None` for one file).
    pub segment: Option<u64>,
    /// MaxL only.
    pub lp_ok: Option<bool>,
    pub relative_costs: Vec<(String, Ratio)>,
    /// MI only.
    pub rd_ok: Option<bool>,
    pub oracle: Option<OracleCheck>,
}

impl PointCheck {
    pub fn ok(&self) -> bool {
        self.lp_ok != Some(false)
            && self.rd_ok != Some(false)
            && self.oracle.as_ref().is_none_or(|o| o.sound && o.tight)
    }

    /// Name of the first failed check.
    pub fn failure(&self) -> Option<&'static str> {
        if self.lp_ok == Some(false) {
            return Some("lp");
        }
        if self.rd_ok == Some(false) {
            return Some("rd");
        }
        match &self.oracle {
            Some(o) if !o.sound => Some("oracle-soundness"),
            Some(o) if !o.tight => Some("oracle-tightness"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub num_files: u64,
    pub metric: Metric,
    pub checks: Vec<PointCheck>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(PointCheck::ok)
    }

    /// `(D, check)` of the first failure.
    pub fn first_failure(&self) -> Option<(&Ratio, &'static str)> {
        self.checks.iter().find_map(|c| c.failure().map(|f| (&c.d, f)))
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                let costs: Vec<Value> = c
                    .relative_costs
                    .iter()
                    .map(|(var, r)| json!({ "var": var, "value": json_ratio(r) }))
                    .collect();
                json!({
                    "M": self.num_files,
                    "D": json_ratio(&c.d),
                    "metric": self.metric.name(),
                    "bound_bits": json_f64(c.bound_bits),
                    "segment": c.segment,
                    "lp_ok": c.lp_ok,
                    "rd_ok": c.rd_ok,
                    "relative_costs": costs,
                    "oracle_min_bits": c.oracle.as_ref().map(|o| json_f64(o.min_bits)),
                    "oracle_ok": c.oracle.as_ref().map(|o| o.sound && o.tight),
                    "ok": c.ok(),
                })
            })
            .collect();
        json!({
            "M": self.num_files,
            "metric": self.metric.name(),
            "ok": self.ok(),
            "checks": checks,
        })
    }
}

/// `n` costs spread evenly over `[1, M]`, endpoints included; `n = 1` gives
/// `D = M`.
pub fn sweep(num_files: u64, n: u64) -> Vec<Ratio> {
    if n <= 1 {
        return vec![prob::int(num_files as i64)];
    }
    let span = num_files as i64 - 1;
    (0..n as i64)
        .map(|i| prob::int(1) + prob::ratio(span * i, n as i64 - 1))
        .collect()
}

fn run_oracle(num_files: u64, metric: Metric, d: &Ratio, steps: u32, parallel: bool) -> Result<OracleResult, OracleError> {
    let oracle = GridOracle::new(num_files as usize, metric, d, steps)?;
    let total = oracle.first_row_candidates();
    let workers = if parallel { rayon::current_num_threads().min(total) } else { 1 };
    if workers <= 1 {
        return oracle.search();
    }
    let ranges: Vec<_> = (0..workers).map(|i| total * i / workers..total * (i + 1) / workers).collect();
    let parts: Vec<Option<OracleResult>> = ranges
        .into_par_iter()
        .map(|r| oracle.search_first_rows(r))
        .collect::<Result<_, _>>()?;
    Ok(parts.into_iter().fold(None, merge).expect("the all-singleton mechanism is always feasible"))
}

pub fn verify_point(num_files: u64, d: &Ratio, opts: &VerifyOptions) -> Result<PointCheck, VerifyError> {
    let m = prob::int(num_files as i64);
    if num_files == 0 || *d < prob::int(1) || *d > m {
        return Err(VerifyError::Cost { num_files, d: d.clone() });
    }
    let df = prob::to_f64(d);
    let mut check = PointCheck {
        d: d.clone(),
        bound_bits: 0.0,
        segment: (num_files >= 2).then(|| capacity::ceil_segment(num_files, d).max(2)),
        lp_ok: None,
        relative_costs: Vec::new(),
        rd_ok: None,
        oracle: None,
    };
    match opts.metric {
        Metric::Mi => {
            check.bound_bits = capacity::rho_lb_mi(num_files, df)?;
            if num_files >= 2 {
                let w = expected_segment(num_files, df);
                let ok = match best_rd_bound(num_files, df) {
                    Ok((best, best_w)) => {
                        (best - check.bound_bits).abs() <= RD_TOL
                            && best_w == w
                            && feasibility_check(num_files, &RdBoundParams::for_segment(w)).is_ok()
                    }
                    Err(_) => false,
                };
                check.rd_ok = Some(ok);
            }
        }
        Metric::MaxL => {
            check.bound_bits = capacity::rho_lb_maxl(num_files, df)?;
            if num_files >= 2 {
                let ok = match lp_verify_optimality(num_files, d) {
                    Ok(v) => {
                        check.relative_costs = v.relative_costs.iter().map(|(var, r)| (var.to_string(), r.clone())).collect();
                        v.ok && v.objective == maxl_budget_exact(num_files, d)?
                    }
                    Err(_) => false,
                };
                check.lp_ok = Some(ok);
            }
        }
    }
    if let Some(o) = opts.oracle {
        if num_files as usize > MAX_ORACLE_FILES {
            return Err(VerifyError::OracleFiles);
        }
        let r = run_oracle(num_files, opts.metric, d, o.grid_steps, opts.parallel)?;
        let sound = match &r.maxl_sum {
            Some(sum) => *sum >= maxl_budget_exact(num_files, d)?,
            None => r.min_bits >= check.bound_bits - MI_SOUNDNESS_SLACK,
        };
        let tight = r.min_bits <= check.bound_bits + o.tolerance;
        check.oracle = Some(OracleCheck { min_bits: r.min_bits, sound, tight, nodes: r.nodes });
    }
    Ok(check)
}

pub fn verify(num_files: u64, costs: &[Ratio], opts: &VerifyOptions) -> Result<VerifyReport, VerifyError> {
    if costs.is_empty() {
        return Err(VerifyError::NoCosts);
    }
    let checks = costs.iter().map(|d| verify_point(num_files, d, opts)).collect::<Result<_, _>>()?;
    Ok(VerifyReport { num_files, metric: opts.metric, checks })
}
