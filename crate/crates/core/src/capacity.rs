//! Closed-form capacity curves and the matching lower bounds on leakage.
//!
//! Capacities take the normalized leakage `rho_bar = rho / log2 M` in
//! `[0, 1]`. On the segment `w in [2, M]`, i.e.
//! `1 - log2 w / log2 M <= rho_bar <= 1 - log2(w-1) / log2 M`, the minimum
//! download cost interpolates between `(w-1, log2(M/(w-1)))` and
//! `(w, log2(M/w))`: linearly in `rho` for MI, linearly in `2^rho` for MaxL.
//! At a breakpoint both neighbouring segments agree and the lower `w` is used.

use alloc::vec::Vec;
use core::fmt;

use num_traits::One;

use crate::mechanism::Metric;
use crate::prob::{self, Ratio};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapacityError {
    FileCount,
    RhoBar(f64),
    Cost(f64),
    Samples(usize),
}

impl fmt::Display for CapacityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FileCount => write!(f, "number of files must be positive"),
            Self::RhoBar(r) => write!(f, "normalized leakage {r} outside [0, 1]"),
            Self::Cost(d) => write!(f, "download cost {d} outside [1, M]"),
            Self::Samples(n) => write!(f, "{n} samples; at least 2 are needed"),
        }
    }
}

impl core::error::Error for CapacityError {}

fn check(num_files: u64, rho_bar: f64) -> Result<(), CapacityError> {
    if num_files == 0 {
        return Err(CapacityError::FileCount);
    }
    if !(0.0..=1.0).contains(&rho_bar) {
        return Err(CapacityError::RhoBar(rho_bar));
    }
    Ok(())
}

/// Segment index `w in [2, M]` holding `rho_bar`; the smallest `w` with
/// `w >= M^(1 - rho_bar)`.
pub fn segment_for_rho_bar(num_files: u64, rho_bar: f64) -> u64 {
    let x = libm::exp2((1.0 - rho_bar) * libm::log2(num_files as f64));
    let w = libm::ceil(x * (1.0 - 1e-12)) as u64;
    w.clamp(2, num_files.max(2))
}

/// Minimum download cost under MI leakage `rho_bar * log2 M`.
pub fn min_download_mi(num_files: u64, rho_bar: f64) -> Result<f64, CapacityError> {
    check(num_files, rho_bar)?;
    if num_files == 1 || rho_bar == 1.0 {
        return Ok(1.0);
    }
    let w = segment_for_rho_bar(num_files, rho_bar) as f64;
    let m = num_files as f64;
    let slope = libm::log2(w / (w - 1.0));
    Ok(w + libm::log2(m / w) / slope - rho_bar * libm::log2(m) / slope)
}

/// Minimum download cost under MaxL leakage `rho_bar * log2 M`.
pub fn min_download_maxl(num_files: u64, rho_bar: f64) -> Result<f64, CapacityError> {
    check(num_files, rho_bar)?;
    if num_files == 1 || rho_bar == 1.0 {
        return Ok(1.0);
    }
    let w = segment_for_rho_bar(num_files, rho_bar) as f64;
    let m = num_files as f64;
    let gap = m / (w - 1.0) - m / w;
    let budget = libm::exp2(rho_bar * libm::log2(m));
    Ok(w + (m / w) / gap - budget / gap)
}

/// WPIR capacity for MI leakage.
pub fn capacity_mi(num_files: u64, rho_bar: f64) -> Result<f64, CapacityError> {
    min_download_mi(num_files, rho_bar).map(|d| 1.0 / d)
}

/// WPIR capacity for maximal leakage.
pub fn capacity_maxl(num_files: u64, rho_bar: f64) -> Result<f64, CapacityError> {
    min_download_maxl(num_files, rho_bar).map(|d| 1.0 / d)
}

/// `1 / M^(1 - rho_bar)`, an upper bound on both capacities.
pub fn capacity_upper_bound(num_files: u64, rho_bar: f64) -> Result<f64, CapacityError> {
    check(num_files, rho_bar)?;
    Ok(1.0 / libm::pow(num_files as f64, 1.0 - rho_bar))
}

pub fn capacity(metric: Metric, num_files: u64, rho_bar: f64) -> Result<f64, CapacityError> {
    match metric {
        Metric::Mi => capacity_mi(num_files, rho_bar),
        Metric::MaxL => capacity_maxl(num_files, rho_bar),
    }
}

/// Cost segment `w in [2, M]` with `w - 1 <= D <= w`, lower `w` on ties.
pub fn segment_for_cost(num_files: u64, d: f64) -> u64 {
    (libm::ceil(d) as u64).clamp(2, num_files.max(2))
}

fn check_cost(num_files: u64, d: f64) -> Result<f64, CapacityError> {
    if num_files == 0 {
        return Err(CapacityError::FileCount);
    }
    let m = num_files as f64;
    // 1/capacity can land a rounding error outside [1, M]
    if !(d >= 1.0 - 1e-9 && d <= m + 1e-9) {
        return Err(CapacityError::Cost(d));
    }
    Ok(d.clamp(1.0, m))
}

/// Smallest MI leakage (bits) at download cost `D`:
/// `log2(M/(w-1)) - log2(w/(w-1)) (D - (w-1))` on segment `w`.
pub fn rho_lb_mi(num_files: u64, d: f64) -> Result<f64, CapacityError> {
    let d = check_cost(num_files, d)?;
    if num_files == 1 {
        return Ok(0.0);
    }
    let w = segment_for_cost(num_files, d) as f64;
    let m = num_files as f64;
    Ok(libm::log2(m / (w - 1.0)) - libm::log2(w / (w - 1.0)) * (d - (w - 1.0)))
}

/// Smallest maximal leakage (bits) at download cost `D`:
/// `log2[(w - D) M/(w-1) + (D - (w-1)) M/w]` on segment `w`.
pub fn rho_lb_maxl(num_files: u64, d: f64) -> Result<f64, CapacityError> {
    let d = check_cost(num_files, d)?;
    if num_files == 1 {
        return Ok(0.0);
    }
    let w = segment_for_cost(num_files, d) as f64;
    let m = num_files as f64;
    Ok(libm::log2((w - d) * m / (w - 1.0) + (d - (w - 1.0)) * m / w))
}

/// `2^rho_lb_maxl(M, D)` as an exact rational, for rational `D`.
pub fn maxl_budget_exact(num_files: u64, d: &Ratio) -> Result<Ratio, CapacityError> {
    let m = prob::int(num_files as i64);
    if num_files == 0 {
        return Err(CapacityError::FileCount);
    }
    if d < &Ratio::one() || d > &m {
        return Err(CapacityError::Cost(prob::to_f64(d)));
    }
    if num_files == 1 {
        return Ok(Ratio::one());
    }
    let w = ceil_segment(num_files, d);
    let wr = prob::int(w as i64);
    let below = &wr - Ratio::one();
    Ok((&wr - d) * &m / &below + (d - &below) * &m / &wr)
}

/// Exact version of [`segment_for_cost`].
pub fn ceil_segment(num_files: u64, d: &Ratio) -> u64 {
    let c = d.ceil();
    let w = if c.numer() <= &num_bigint::BigInt::from(2) {
        2
    } else {
        num_traits::ToPrimitive::to_u64(c.numer()).unwrap_or(num_files)
    };
    w.clamp(2, num_files.max(2))
}

/// Which curve to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Mi,
    MaxL,
    UpperBound,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mi => "mi",
            Self::MaxL => "maxl",
            Self::UpperBound => "ub",
        }
    }

    pub fn eval(self, num_files: u64, rho_bar: f64) -> Result<f64, CapacityError> {
        match self {
            Self::Mi => capacity_mi(num_files, rho_bar),
            Self::MaxL => capacity_maxl(num_files, rho_bar),
            Self::UpperBound => capacity_upper_bound(num_files, rho_bar),
        }
    }
}

impl From<Metric> for CurveKind {
    fn from(m: Metric) -> Self {
        match m {
            Metric::Mi => Self::Mi,
            Metric::MaxL => Self::MaxL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub num_files: u64,
    pub kind: CurveKind,
    /// Report `rho_bar` (true) or raw bits.
    pub normalized: bool,
    pub samples: usize,
    /// Add the segment endpoints `1 - log2 w / log2 M`, `w in [2, M]`.
    pub breakpoints: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub rho_bar: f64,
    pub rho_bits: f64,
    pub capacity: f64,
    pub is_breakpoint: bool,
}

impl CurvePoint {
    /// Leakage coordinate: `rho_bar` if `normalized`, bits otherwise.
    pub fn leakage(&self, normalized: bool) -> f64 {
        if normalized {
            self.rho_bar
        } else {
            self.rho_bits
        }
    }
}

/// Samples `rho_bar = i / (samples - 1)` plus the breakpoints, sorted by
/// `rho_bar`. A breakpoint that coincides with a sample flags that sample
/// instead of adding a row.
pub fn curve(spec: &CurveSpec) -> Result<Vec<CurvePoint>, CapacityError> {
    if spec.samples < 2 {
        return Err(CapacityError::Samples(spec.samples));
    }
    if spec.num_files == 0 {
        return Err(CapacityError::FileCount);
    }
    let log_m = libm::log2(spec.num_files as f64);
    let point = |rho_bar: f64, is_breakpoint: bool| -> Result<CurvePoint, CapacityError> {
        Ok(CurvePoint {
            rho_bar,
            rho_bits: rho_bar * log_m,
            capacity: spec.kind.eval(spec.num_files, rho_bar)?,
            is_breakpoint,
        })
    };
    let n = spec.samples;
    let mut points = (0..n)
        .map(|i| point(i as f64 / (n - 1) as f64, false))
        .collect::<Result<Vec<_>, _>>()?;
    if spec.breakpoints && spec.num_files >= 2 {
        for w in 2..=spec.num_files {
            let rho_bar = (1.0 - libm::log2(w as f64) / log_m).clamp(0.0, 1.0);
            match points.iter_mut().find(|p| libm::fabs(p.rho_bar - rho_bar) <= 1e-12) {
                Some(p) => p.is_breakpoint = true,
                None => points.push(point(rho_bar, true)?),
            }
        }
        points.sort_by(|a, b| a.rho_bar.total_cmp(&b.rho_bar));
    }
    Ok(points)
}

/// The piecewise-linear lower bound `rho_LB(D)` with its breakpoints at
/// `D = 1, ..., M`.
///
/// For MI the pieces are linear in bits; for MaxL they are linear in `2^rho`
/// and `slopes` refers to that quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseBound {
    pub metric: Metric,
    /// `(D, rho)` with `rho = log2(M/D)`, `D = 1..=M`.
    pub breakpoints: Vec<(u64, f64)>,
    /// Slope of segment `w = 2..=M`, in order.
    pub slopes: Vec<f64>,
}

impl PiecewiseBound {
    pub fn new(metric: Metric, num_files: u64) -> Self {
        let m = num_files as f64;
        let breakpoints = (1..=num_files).map(|d| (d, libm::log2(m / d as f64))).collect();
        let slopes = (2..=num_files)
            .map(|w| {
                let w = w as f64;
                match metric {
                    Metric::Mi => -libm::log2(w / (w - 1.0)),
                    Metric::MaxL => m / w - m / (w - 1.0),
                }
            })
            .collect();
        Self { metric, breakpoints, slopes }
    }

    pub fn num_files(&self) -> u64 {
        self.breakpoints.len() as u64
    }

    pub fn eval(&self, d: f64) -> Result<f64, CapacityError> {
        match self.metric {
            Metric::Mi => rho_lb_mi(self.num_files(), d),
            Metric::MaxL => rho_lb_maxl(self.num_files(), d),
        }
    }
}
