//! Exact inverse-CDF sampling of `Q ~ P(.|m)` from a uniform 64-bit word.
//!
//! For each row the cumulative probabilities `F_q` are turned into integer
//! thresholds `ceil(F_q * 2^64)`. A draw `u` selects the first `q` with
//! `u < F_q * 2^64`, which for integer `u` is `u < ceil(F_q * 2^64)`. The
//! selection probability is then `F_q - F_{q-1}` up to one part in `2^64`.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::mechanism::{validate_mechanism, Mechanism, Violation};
use crate::prob::Ratio;

#[derive(Debug, Clone)]
pub struct QuerySampler {
    /// Per row: (threshold, query index) for queries with positive probability.
    rows: Vec<Vec<(u128, usize)>>,
}

impl QuerySampler {
    pub fn new(mech: &Mechanism) -> Result<Self, Violation> {
        validate_mechanism(mech)?;
        let scale = BigInt::from(1u128 << 64);
        let rows = mech
            .rows()
            .iter()
            .map(|row| {
                let mut cum = Ratio::zero();
                let mut out = Vec::new();
                for (q, p) in row.iter().enumerate() {
                    if p.is_zero() {
                        continue;
                    }
                    cum += p;
                    let scaled = cum.numer() * &scale;
                    let (quot, rem) = scaled.div_rem(cum.denom());
                    let ceil = if rem.is_zero() { quot } else { quot + 1 };
                    out.push((ceil.to_u128().expect("cumulative probability <= 1"), q));
                }
                out
            })
            .collect();
        Ok(Self { rows })
    }

    pub fn num_files(&self) -> usize {
        self.rows.len()
    }

    /// Query index drawn for file `m` by the uniform word `u`.
    pub fn sample(&self, m: usize, u: u64) -> usize {
        let row = &self.rows[m];
        let u = u128::from(u);
        let pos = row.partition_point(|&(t, _)| t <= u);
        row[pos.min(row.len() - 1)].1
    }
}
