#![allow(dead_code)]

use proptest::prelude::*;
use wpir_core::prob::{self, Ratio};
use wpir_core::{Mechanism, Query, SubsetQuery};

/// Random supports (distinct tags), topped up with a singleton per file so
/// that every row has somewhere to put its mass.
pub fn alphabet(num_files: usize, extra: usize) -> impl Strategy<Value = Vec<Query>> {
    let full = (1u64 << num_files) - 1;
    prop::collection::vec(1..=full, 0..=extra).prop_map(move |bits| {
        bits
            .into_iter()
            .map(|b| SubsetQuery::from_bits(b).unwrap())
            .chain((0..num_files).map(SubsetQuery::singleton))
            .enumerate()
            .map(|(i, s)| Query::tagged(s, i as u32))
            .collect()
    })
}

/// Rows from small integer weights on the queries that contain each file.
pub fn rows_for(queries: &[Query], num_files: usize, weights: &[u8]) -> Vec<Vec<Ratio>> {
    (0..num_files)
        .map(|m| {
            let mut w: Vec<i64> = queries
                .iter()
                .enumerate()
                .map(|(q, query)| {
                    if query.support.contains(m) {
                        i64::from(weights[(m * queries.len() + q) % weights.len()])
                    } else {
                        0
                    }
                })
                .collect();
            let total: i64 = w.iter().sum();
            if total == 0 {
                let q = queries.iter().position(|q| q.support.contains(m)).unwrap();
                w[q] = 1;
            }
            let total: i64 = w.iter().sum();
            w.into_iter().map(|n| prob::ratio(n, total)).collect()
        })
        .collect()
}

pub fn mechanism() -> impl Strategy<Value = Mechanism> {
    (1usize..=6)
        .prop_flat_map(|m| (Just(m), alphabet(m, 14), prop::collection::vec(0u8..6, 1..120)))
        .prop_map(|(m, queries, weights)| {
            let rows = rows_for(&queries, m, &weights);
            Mechanism::new(m, queries, rows).unwrap()
        })
}

/// Two mechanisms over one alphabet.
pub fn mechanism_pair() -> impl Strategy<Value = (Mechanism, Mechanism)> {
    (1usize..=6)
        .prop_flat_map(|m| {
            (
                Just(m),
                alphabet(m, 14),
                prop::collection::vec(0u8..6, 1..120),
                prop::collection::vec(0u8..6, 1..120),
            )
        })
        .prop_map(|(m, queries, a, b)| {
            let ra = rows_for(&queries, m, &a);
            let rb = rows_for(&queries, m, &b);
            (
                Mechanism::new(m, queries.clone(), ra).unwrap(),
                Mechanism::new(m, queries, rb).unwrap(),
            )
        })
}

/// `(1 - lambda) a + lambda b` entrywise.
pub fn blend(a: &Mechanism, b: &Mechanism, lambda: &Ratio) -> Mechanism {
    let keep = Ratio::from_integer(1.into()) - lambda;
    let rows = a
        .rows()
        .iter()
        .zip(b.rows())
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(p, q)| p * &keep + q * lambda).collect())
        .collect();
    Mechanism::new(a.num_files(), a.queries().to_vec(), rows).unwrap()
}
