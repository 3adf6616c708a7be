//! Rate-distortion lower bound on MI leakage.
//!
//! For any slope `lambda > 0` and multiplier `nu > 0` with
//! `k nu 2^(-k lambda) <= 1` for every retrieval-set size `k in [1, M]`,
//! every mechanism with download cost at most `D` leaks at least
//! `log2 M + log2 nu - lambda D` bits. The segment-`w` choice
//! `lambda = log2(w/(w-1))`, `log2 nu = w lambda - log2 w` makes the bound
//! tight on `[w-1, w]`.

use core::fmt;

use crate::capacity;

/// Slack on each feasibility constraint; the segment choice meets two of
/// them with equality.
pub const FEASIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdBoundParams {
    pub lambda: f64,
    pub nu: f64,
    /// Segment the parameters were derived for, if any.
    pub segment: Option<u64>,
}

impl RdBoundParams {
    pub fn new(lambda: f64, nu: f64) -> Self {
        Self { lambda, nu, segment: None }
    }

    /// The tight choice for segment `w >= 2`.
    pub fn for_segment(w: u64) -> Self {
        let wf = w as f64;
        let lambda = libm::log2(wf / (wf - 1.0));
        let log_nu = wf * lambda - libm::log2(wf);
        Self { lambda, nu: libm::exp2(log_nu), segment: Some(w) }
    }

    pub fn log2_nu(&self) -> f64 {
        libm::log2(self.nu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RdError {
    /// `k nu 2^(-k lambda) > 1` at retrieval-set size `weight`.
    Infeasible { weight: u64, value: f64 },
    NonPositive,
    Segment { w: u64, num_files: u64 },
    Cost(f64),
}

impl fmt::Display for RdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Infeasible { weight, value } => write!(
                f,
                "multipliers infeasible at weight {weight}: k nu 2^(-k lambda) = {value} > 1"
            ),
            Self::NonPositive => write!(f, "lambda and nu must be positive"),
            Self::Segment { w, num_files } => write!(f, "segment {w} outside [2, {num_files}]"),
            Self::Cost(d) => write!(f, "download cost {d} outside [1, M]"),
        }
    }
}

impl core::error::Error for RdError {}

/// Checks `k nu 2^(-k lambda) <= 1 + tol` for `k = 1..=M`, reporting the
/// first violated `k`.
pub fn feasibility_check(num_files: u64, params: &RdBoundParams) -> Result<(), RdError> {
    if !(params.lambda > 0.0 && params.nu > 0.0) {
        return Err(RdError::NonPositive);
    }
    let log_nu = params.log2_nu();
    for k in 1..=num_files {
        let kf = k as f64;
        let value = libm::exp2(libm::log2(kf) + log_nu - kf * params.lambda);
        if value > 1.0 + FEASIBILITY_TOL {
            return Err(RdError::Infeasible { weight: k, value });
        }
    }
    Ok(())
}

/// `H(M) + log2 nu - lambda D` for feasible `params`.
pub fn rd_bound_with(num_files: u64, d: f64, params: &RdBoundParams) -> Result<f64, RdError> {
    if !(d >= 1.0 && d <= num_files as f64) {
        return Err(RdError::Cost(d));
    }
    feasibility_check(num_files, params)?;
    Ok(libm::log2(num_files as f64) + params.log2_nu() - params.lambda * d)
}

/// The bound at cost `D` with the segment-`w` multipliers.
pub fn rd_bound_eval(num_files: u64, d: f64, w: u64) -> Result<f64, RdError> {
    if !(2..=num_files).contains(&w) {
        return Err(RdError::Segment { w, num_files });
    }
    rd_bound_with(num_files, d, &RdBoundParams::for_segment(w))
}

/// Maximum of [`rd_bound_eval`] over `w in [2, M]` and the smallest `w`
/// attaining it (within `1e-12`).
pub fn best_rd_bound(num_files: u64, d: f64) -> Result<(f64, u64), RdError> {
    let mut values = alloc::vec::Vec::new();
    for w in 2..=num_files {
        values.push((rd_bound_eval(num_files, d, w)?, w));
    }
    let best = values.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    values
        .into_iter()
        .find(|v| v.0 >= best - 1e-12)
        .ok_or(RdError::Segment { w: 2, num_files })
}

/// The segment a cost falls in, for comparison with [`best_rd_bound`].
pub fn expected_segment(num_files: u64, d: f64) -> u64 {
    capacity::segment_for_cost(num_files, d)
}
