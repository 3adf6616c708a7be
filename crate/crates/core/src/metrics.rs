//! Leakage metrics and download cost.
//!
//! The requested index is uniform. Sums and ratios are exact; `log2` is the
//! last step, so the only error is the final rounding of each term.

use num_traits::{Signed, Zero};

use crate::mechanism::{validate_mechanism, Mechanism, Scheme, Violation};
use crate::prob::{self, Ratio};

/// `I(M;Q) = sum_{m,q} (1/M) P(q|m) log2( P(q|m) / P(q) )`, in bits.
///
/// Terms with `P(q|m) = 0` contribute nothing.
pub fn mi_leakage(mech: &Mechanism) -> Result<f64, Violation> {
    validate_mechanism(mech)?;
    let m_count = mech.num_files();
    let columns: alloc::vec::Vec<Ratio> = (0..mech.num_queries()).map(|q| mech.column_sum(q)).collect();
    let scale = prob::int(m_count as i64);
    let mut total = 0.0;
    for row in mech.rows() {
        for (p, col) in row.iter().zip(&columns) {
            if !p.is_positive() {
                continue;
            }
            // P(q|m) / P(q) = M P(q|m) / sum_m' P(q|m')
            let likelihood = p * &scale / col;
            total += prob::to_f64(p) * prob::log2(&likelihood);
        }
    }
    Ok((total / m_count as f64).max(0.0))
}

/// `sum_q max_m P(q|m)`, exact. Equals `2^MaxL`.
pub fn maxl_sum(mech: &Mechanism) -> Result<Ratio, Violation> {
    validate_mechanism(mech)?;
    Ok((0..mech.num_queries()).fold(Ratio::zero(), |acc, q| acc + mech.column_max(q)))
}

/// `log2 sum_q max_m P(q|m)`, in bits.
pub fn maxl_leakage(mech: &Mechanism) -> Result<f64, Violation> {
    maxl_sum(mech).map(|s| prob::log2(&s))
}

/// Min-entropy leakage `H_inf(M) - H_inf(M|Q)` with a uniform prior.
///
/// Computed from the joint `P(m, q)` rather than through [`maxl_sum`], so
/// agreement with [`maxl_leakage`] is a real cross-check.
pub fn mine_leakage(mech: &Mechanism) -> Result<f64, Violation> {
    validate_mechanism(mech)?;
    let m_count = mech.num_files();
    let prior = prob::ratio(1, m_count as i64);
    // sum_q max_m P(m, q): the adversary's best guessing probability
    let mut guess = Ratio::zero();
    for q in 0..mech.num_queries() {
        let best = mech.rows().iter().map(|row| &row[q] * &prior).max().unwrap_or_else(Ratio::zero);
        guess += best;
    }
    let prior_entropy = libm::log2(m_count as f64);
    let posterior_entropy = -prob::log2(&guess);
    Ok(prior_entropy - posterior_entropy)
}

/// `D = (1/M) sum_m sum_q P(q|m) L(q)`, exact.
pub fn download_cost(scheme: &Scheme) -> Result<Ratio, Violation> {
    let mech = scheme.mechanism();
    validate_mechanism(mech)?;
    let mut total = Ratio::zero();
    for row in mech.rows() {
        for (p, len) in row.iter().zip(scheme.answer_lengths()) {
            total += p * len;
        }
    }
    Ok(total / prob::int(mech.num_files() as i64))
}

/// WPIR rate `1/D`.
pub fn rate(scheme: &Scheme) -> Result<Ratio, Violation> {
    // D >= 1 for any valid scheme: every answer holds at least one file
    download_cost(scheme).map(|d| d.recip())
}

/// Everything measured about a scheme at once.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageReport {
    pub mi_bits: f64,
    pub maxl_bits: f64,
    pub mine_bits: f64,
    pub download_cost: Ratio,
}

impl LeakageReport {
    pub fn of(scheme: &Scheme) -> Result<Self, Violation> {
        let mech = scheme.mechanism();
        Ok(Self {
            mi_bits: mi_leakage(mech)?,
            maxl_bits: maxl_leakage(mech)?,
            mine_bits: mine_leakage(mech)?,
            download_cost: download_cost(scheme)?,
        })
    }

    pub fn leakage(&self, metric: crate::Metric) -> f64 {
        match metric {
            crate::Metric::Mi => self.mi_bits,
            crate::Metric::MaxL => self.maxl_bits,
        }
    }

    pub fn rate(&self) -> Ratio {
        self.download_cost.recip()
    }
}
