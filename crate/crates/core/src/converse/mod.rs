//! Independent checks of the capacity lower bounds.
//!
//! - [`rd`]: the rate-distortion lower bound on MI with the symmetric
//!   multiplier family, plus its feasibility conditions.
//! - [`lp`]: the linear program whose optimum lower-bounds MaxL, and an exact
//!   relative-cost certificate that the claimed basic solution is optimal.
//! - [`oracle`]: exhaustive grid search over mechanisms for `M <= 4`.
//! - [`indicator_reduce`]: merge queries with equal retrieval sets.

pub mod lp;
pub mod oracle;
pub mod rd;

use alloc::vec::Vec;

use num_traits::Zero;

use crate::mechanism::{validate_mechanism, Mechanism, Query, Violation};
use crate::prob::Ratio;
use crate::query::SubsetQuery;

pub use lp::{lp_verify_optimality, LpError, LpTableau, LpVar, LpVerdict};
pub use oracle::{grid_oracle, GridOracle, OracleError, OracleResult};
pub use rd::{feasibility_check, rd_bound_eval, rd_bound_with, best_rd_bound, RdBoundParams, RdError};

/// Replaces every query by its retrieval set `u = 1_{support}` and adds up
/// the probabilities of queries that share one: `P(u|m) = sum_{q: f(q)=u} P(q|m)`.
/// Indicator vectors keep the order in which they first appear.
pub fn indicator_reduce(mech: &Mechanism) -> Result<Mechanism, Violation> {
    validate_mechanism(mech)?;
    let mut supports: Vec<SubsetQuery> = Vec::new();
    let mut slot = Vec::with_capacity(mech.num_queries());
    for q in mech.queries() {
        let i = match supports.iter().position(|s| *s == q.support) {
            Some(i) => i,
            None => {
                supports.push(q.support);
                supports.len() - 1
            }
        };
        slot.push(i);
    }
    let rows = mech
        .rows()
        .iter()
        .map(|row| {
            let mut out = alloc::vec![Ratio::zero(); supports.len()];
            for (p, &i) in row.iter().zip(&slot) {
                out[i] += p;
            }
            out
        })
        .collect();
    let queries = supports.into_iter().map(Query::new).collect();
    Mechanism::new(mech.num_files(), queries, rows)
}
