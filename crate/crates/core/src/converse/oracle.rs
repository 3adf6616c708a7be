//! Exhaustive grid search for the least-leaking mechanism at a cost budget.
//!
//! Every row `P(.|m)` is restricted to multiples of `1/N` (`N = grid_steps`)
//! over the `2^(M-1)` subset-queries that contain `m`; all other queries get
//! zero. The search enumerates every such mechanism whose download cost is at
//! most `D` and returns the smallest leakage. It never looks at the closed
//! forms, so it can check them.
//!
//! Rows are chosen one at a time in lexicographic order of their count
//! vectors. A branch is cut when
//! - even all-singleton rows for the rest would exceed the cost budget, or
//! - a lower bound on the final leakage already exceeds the incumbent.
//!
//! For MaxL the partial `sum_q max_m n_(m,q)` only grows as rows are added.
//! For MI, `I(M;Q) = min_R (1/M) sum_m D(P_m || R)`, and dropping the rows not
//! chosen yet leaves `(k/M) I_k`, where `I_k` is the MI of the first `k` rows
//! under a uniform prior on them. Before the last row is enumerated, the
//! best it could possibly do, ignoring its cost, is bounded as well.
//!
//! Ties are broken toward the lexicographically smallest mechanism, so the
//! result does not depend on how the first-row range is split across workers.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use num_traits::ToPrimitive;

use crate::mechanism::{Mechanism, Metric, Query};
use crate::prob::{self, Ratio};
use crate::query::SubsetQuery;

pub const MAX_ORACLE_FILES: usize = 4;
pub const MIN_GRID_STEPS: u32 = 4;
/// Default cap on visited search nodes.
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000_000;
/// Rows per file beyond which candidate tables are not built.
const MAX_ROW_CANDIDATES: u64 = 5_000_000;
/// MI lower bounds are floating point; only cut when clearly worse.
const MI_PRUNE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    FileCount(usize),
    GridSteps(u32),
    Cost(Ratio),
    BudgetExceeded { budget: u64 },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FileCount(m) => {
                write!(f, "grid oracle supports 1 to {MAX_ORACLE_FILES} files, got {m}")
            }
            Self::GridSteps(n) => write!(f, "grid steps {n} below the minimum of {MIN_GRID_STEPS}"),
            Self::Cost(d) => write!(f, "download cost {} outside [1, M]", prob::format_ratio(d)),
            Self::BudgetExceeded { budget } => {
                write!(f, "grid search exceeded its budget of {budget} nodes")
            }
        }
    }
}

impl core::error::Error for OracleError {}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub num_files: usize,
    pub metric: Metric,
    pub grid_steps: u32,
    /// Smallest leakage found, in bits.
    pub min_bits: f64,
    /// `2^MaxL` of the argmin as an exact rational (MaxL only).
    pub maxl_sum: Option<Ratio>,
    /// Argmin counts: `counts[m][q]` over the full alphabet (bitmask order),
    /// summing to `grid_steps` per row.
    pub counts: Vec<Vec<u32>>,
    /// Exact download cost of the argmin.
    pub download_cost: Ratio,
    pub nodes: u64,
}

impl OracleResult {
    /// The argmin as a mechanism over all `2^M - 1` subset-queries.
    pub fn mechanism(&self) -> Mechanism {
        let queries = full_alphabet(self.num_files).into_iter().map(Query::new).collect();
        let rows = self
            .counts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&n| prob::ratio(i64::from(n), i64::from(self.grid_steps)))
                    .collect()
            })
            .collect();
        Mechanism::new(self.num_files, queries, rows).expect("grid rows are distributions")
    }
}

/// All nonempty subsets of `0..M` in increasing bitmask order.
pub fn full_alphabet(num_files: usize) -> Vec<SubsetQuery> {
    (1u64..1 << num_files).filter_map(SubsetQuery::from_bits).collect()
}

#[derive(Debug, Clone)]
struct Candidate {
    counts: Vec<u16>,
    cost: u32,
    /// `sum n log2 n` over the row.
    self_term: f64,
}

#[derive(Debug, Clone)]
struct RowTable {
    /// Alphabet positions of the queries containing this file.
    slots: Vec<usize>,
    /// Lexicographic order of `counts`.
    cands: Vec<Candidate>,
    /// Candidate indices ordered by (cost, index).
    by_cost: Vec<u32>,
}

/// A configured search. Use [`GridOracle::search`] for the whole space or
/// [`GridOracle::search_first_rows`] on disjoint ranges and [`merge`] the
/// results.
#[derive(Debug, Clone)]
pub struct GridOracle {
    num_files: usize,
    metric: Metric,
    steps: u32,
    max_cost: u64,
    weights: Vec<u32>,
    rows: Vec<RowTable>,
    /// `x log2 x` for integer `x`.
    xlogx: Vec<f64>,
    node_budget: u64,
}

#[derive(Debug, Clone)]
struct Hit {
    score: f64,
    path: Vec<u32>,
}

impl GridOracle {
    pub fn new(num_files: usize, metric: Metric, d: &Ratio, grid_steps: u32) -> Result<Self, OracleError> {
        if !(1..=MAX_ORACLE_FILES).contains(&num_files) {
            return Err(OracleError::FileCount(num_files));
        }
        if grid_steps < MIN_GRID_STEPS || grid_steps > u32::from(u16::MAX) {
            return Err(OracleError::GridSteps(grid_steps));
        }
        let m = prob::int(num_files as i64);
        if d < &prob::int(1) || d > &m {
            return Err(OracleError::Cost(d.clone()));
        }
        let slots_per_row = 1u64 << (num_files - 1);
        let per_row = prob::binomial(u64::from(grid_steps) + slots_per_row - 1, slots_per_row - 1);
        if per_row.to_u64().is_none_or(|n| n > MAX_ROW_CANDIDATES) {
            return Err(OracleError::BudgetExceeded { budget: MAX_ROW_CANDIDATES });
        }
        let alphabet = full_alphabet(num_files);
        let weights: Vec<u32> = alphabet.iter().map(|q| q.weight()).collect();
        let total = d * &m * prob::int(i64::from(grid_steps));
        let max_cost = prob::floor_int(&total).to_u64().expect("small budget");
        let max_mass = num_files * grid_steps as usize;
        let xlogx = (0..=max_mass)
            .map(|x| if x == 0 { 0.0 } else { x as f64 * libm::log2(x as f64) })
            .collect::<Vec<_>>();
        let rows = (0..num_files)
            .map(|f| {
                let slots: Vec<usize> = (0..alphabet.len()).filter(|&q| alphabet[q].contains(f)).collect();
                let slot_weights: Vec<u32> = slots.iter().map(|&q| weights[q]).collect();
                let cands = compositions(grid_steps, slots.len())
                    .into_iter()
                    .map(|counts| Candidate {
                        cost: counts.iter().zip(&slot_weights).map(|(&n, &w)| u32::from(n) * w).sum(),
                        self_term: counts.iter().map(|&n| xlogx[n as usize]).sum(),
                        counts,
                    })
                    .collect::<Vec<_>>();
                let mut by_cost: Vec<u32> = (0..cands.len() as u32).collect();
                by_cost.sort_by_key(|&i| (cands[i as usize].cost, i));
                RowTable { slots, cands, by_cost }
            })
            .collect();
        Ok(Self {
            num_files,
            metric,
            steps: grid_steps,
            max_cost,
            weights,
            rows,
            xlogx,
            node_budget: DEFAULT_NODE_BUDGET,
        })
    }

    pub fn with_node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    /// Number of first-row candidates; the unit of work splitting.
    pub fn first_row_candidates(&self) -> usize {
        self.rows[0].cands.len()
    }

    pub fn search(&self) -> Result<OracleResult, OracleError> {
        let r = self.search_first_rows(0..self.first_row_candidates())?;
        Ok(r.expect("the all-singleton mechanism is always feasible"))
    }

    /// Exhaustive search restricted to first rows with lexicographic rank in
    /// `range`. `None` if no mechanism in the range meets the budget.
    pub fn search_first_rows(&self, range: Range<usize>) -> Result<Option<OracleResult>, OracleError> {
        let mut nodes = 0u64;
        // Cutoffs grow geometrically: small cutoffs prune hard, and the
        // first cutoff that admits a mechanism yields the exact minimum.
        let mut cutoff_bits = 1.0 / f64::from(self.steps);
        let max_bits = libm::log2(self.num_files as f64);
        loop {
            let last = cutoff_bits > max_bits;
            let cutoff = if last { f64::INFINITY } else { self.score_cutoff(cutoff_bits) };
            let mut search = Search::new(self, cutoff, &mut nodes);
            search.run(range.clone())?;
            if let Some(hit) = search.best {
                return Ok(Some(self.finish(hit, nodes)));
            }
            if last {
                return Ok(None);
            }
            cutoff_bits *= 2.0;
        }
    }

    /// Cutoff on the internal score for a leakage of `bits`.
    fn score_cutoff(&self, bits: f64) -> f64 {
        match self.metric {
            Metric::Mi => bits,
            // score is sum_q max_m n_(m,q), leakage log2(score / N)
            Metric::MaxL => libm::floor(f64::from(self.steps) * libm::exp2(bits) + 1e-9),
        }
    }

    fn finish(&self, hit: Hit, nodes: u64) -> OracleResult {
        let alphabet_len = self.weights.len();
        let counts: Vec<Vec<u32>> = hit
            .path
            .iter()
            .enumerate()
            .map(|(f, &c)| {
                let table = &self.rows[f];
                let mut row = vec![0u32; alphabet_len];
                for (&slot, &n) in table.slots.iter().zip(&table.cands[c as usize].counts) {
                    row[slot] = u32::from(n);
                }
                row
            })
            .collect();
        let total_cost: u64 = counts
            .iter()
            .flat_map(|row| row.iter().zip(&self.weights).map(|(&n, &w)| u64::from(n) * u64::from(w)))
            .sum();
        let denom = (self.num_files as i64) * i64::from(self.steps);
        let download_cost = prob::ratio(total_cost as i64, denom);
        let (min_bits, maxl_sum) = match self.metric {
            Metric::Mi => (hit.score.max(0.0), None),
            Metric::MaxL => {
                let s = prob::ratio(hit.score as i64, i64::from(self.steps));
                (prob::log2(&s), Some(s))
            }
        };
        OracleResult {
            num_files: self.num_files,
            metric: self.metric,
            grid_steps: self.steps,
            min_bits,
            maxl_sum,
            counts,
            download_cost,
            nodes,
        }
    }
}

/// Keeps the better of two partial results: lower score, then the
/// lexicographically smaller mechanism.
pub fn merge(a: Option<OracleResult>, b: Option<OracleResult>) -> Option<OracleResult> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            let nodes = a.nodes + b.nodes;
            let key = |r: &OracleResult| match &r.maxl_sum {
                Some(s) => prob::to_f64(s),
                None => r.min_bits,
            };
            let mut keep = match key(&a).total_cmp(&key(&b)) {
                core::cmp::Ordering::Less => a,
                core::cmp::Ordering::Greater => b,
                core::cmp::Ordering::Equal => {
                    if a.counts <= b.counts { a } else { b }
                }
            };
            keep.nodes = nodes;
            Some(keep)
        }
    }
}

/// Runs the search with the default node budget.
pub fn grid_oracle(num_files: usize, metric: Metric, d: &Ratio, grid_steps: u32) -> Result<OracleResult, OracleError> {
    GridOracle::new(num_files, metric, d, grid_steps)?.search()
}

/// All vectors of `parts` nonnegative integers summing to `total`, in
/// lexicographic order.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; parts];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left as u16;
            out.push(cur.clone());
            return;
        }
        for n in 0..=left {
            cur[pos] = n as u16;
            rec(pos + 1, left - n, cur, out);
        }
    }
    rec(0, total, &mut cur, &mut out);
    out
}

struct Search<'a> {
    o: &'a GridOracle,
    cutoff: f64,
    nodes: &'a mut u64,
    best: Option<Hit>,
    path: Vec<u32>,
    col_sum: Vec<u32>,
    col_max: Vec<u32>,
    cost: u64,
    /// `sum_q f(col_sum[q])`.
    col_term: f64,
    /// `sum` of the chosen rows' `self_term`.
    self_terms: f64,
    max_score: u32,
}

impl<'a> Search<'a> {
    fn new(o: &'a GridOracle, cutoff: f64, nodes: &'a mut u64) -> Self {
        let q = o.weights.len();
        Self {
            o,
            cutoff,
            nodes,
            best: None,
            path: Vec::with_capacity(o.num_files),
            col_sum: vec![0; q],
            col_max: vec![0; q],
            cost: 0,
            col_term: 0.0,
            self_terms: 0.0,
            max_score: 0,
        }
    }

    fn bound(&self) -> f64 {
        match &self.best {
            Some(h) => h.score.min(self.cutoff),
            None => self.cutoff,
        }
    }

    fn prune(&self, lb: f64) -> bool {
        let bound = self.bound();
        match self.o.metric {
            Metric::Mi => lb > bound + MI_PRUNE_SLACK,
            Metric::MaxL => lb > bound,
        }
    }

    fn tick(&mut self, n: u64) -> Result<(), OracleError> {
        *self.nodes += n;
        if *self.nodes > self.o.node_budget {
            return Err(OracleError::BudgetExceeded { budget: self.o.node_budget });
        }
        Ok(())
    }

    /// Leakage bound (MI) or partial score (MaxL) after `k` rows.
    fn partial(&self, k: usize) -> f64 {
        match self.o.metric {
            Metric::MaxL => f64::from(self.max_score),
            Metric::Mi => {
                let m = self.o.num_files as f64;
                let n = f64::from(self.o.steps);
                let k = k as f64;
                (k / m) * libm::log2(k) - (self.col_term - self.self_terms) / (m * n)
            }
        }
    }

    fn consider(&mut self, score: f64) {
        let better = match &self.best {
            None => true,
            Some(h) => score < h.score || (score == h.score && self.path < h.path),
        };
        let within = match self.o.metric {
            Metric::Mi => score <= self.cutoff,
            Metric::MaxL => score <= self.cutoff,
        };
        if better && within {
            self.best = Some(Hit { score, path: self.path.clone() });
        }
    }

    fn run(&mut self, first: Range<usize>) -> Result<(), OracleError> {
        let end = first.end.min(self.o.rows[0].cands.len());
        for c in first.start..end {
            self.descend(0, c)?;
        }
        Ok(())
    }

    fn apply(&mut self, row: usize, c: usize) -> (f64, u32) {
        let table = &self.o.rows[row];
        let cand = &table.cands[c];
        let saved = (self.col_term, self.max_score);
        for (&slot, &n) in table.slots.iter().zip(&cand.counts) {
            let n = u32::from(n);
            let old = self.col_sum[slot];
            self.col_term += self.o.xlogx[(old + n) as usize] - self.o.xlogx[old as usize];
            self.col_sum[slot] = old + n;
            if n > self.col_max[slot] {
                self.max_score += n - self.col_max[slot];
                self.col_max[slot] = n;
            }
        }
        self.cost += u64::from(cand.cost);
        self.self_terms += cand.self_term;
        self.path.push(c as u32);
        saved
    }

    fn undo(&mut self, row: usize, c: usize, saved: (f64, u32), maxes: &[u32]) {
        let table = &self.o.rows[row];
        let cand = &table.cands[c];
        for ((&slot, &n), &old_max) in table.slots.iter().zip(&cand.counts).zip(maxes) {
            self.col_sum[slot] -= u32::from(n);
            self.col_max[slot] = old_max;
        }
        self.cost -= u64::from(cand.cost);
        self.self_terms -= cand.self_term;
        (self.col_term, self.max_score) = saved;
        self.path.pop();
    }

    fn descend(&mut self, row: usize, c: usize) -> Result<(), OracleError> {
        let o = self.o;
        let rest = (o.num_files - row - 1) as u64 * u64::from(o.steps);
        if self.cost + u64::from(o.rows[row].cands[c].cost) + rest > o.max_cost {
            return Ok(());
        }
        self.tick(1)?;
        let maxes: Vec<u32> = o.rows[row].slots.iter().map(|&s| self.col_max[s]).collect();
        let saved_terms = self.self_terms;
        let saved = self.apply(row, c);
        let k = row + 1;
        if k == o.num_files {
            let score = self.partial(k);
            self.consider(score);
        } else if !self.prune(self.partial(k)) {
            if k + 1 == o.num_files {
                self.last_row()?;
            } else {
                for next in 0..o.rows[k].cands.len() {
                    self.descend(k, next)?;
                }
            }
        }
        self.undo(row, c, saved, &maxes);
        self.self_terms = saved_terms;
        Ok(())
    }

    /// Lower bound on the score of any completion by the final row, ignoring
    /// its cost.
    ///
    /// MaxL: the row adds at least `N - sum_slots col_max` to the score.
    /// MI: the row lowers `score` by `g_q(n_q) / (M N)` per slot with
    /// `g_q(n) = f(s_q + n) - f(s_q) - f(n)`, `f(x) = x log2 x`. Each `g_q` is
    /// concave, so greedy unit allocation maximizes `sum_q g_q(n_q)` under
    /// `sum_q n_q = N`.
    fn last_row_bound(&self, head: f64, scale: f64) -> f64 {
        let o = self.o;
        let table = &o.rows[o.num_files - 1];
        match o.metric {
            Metric::MaxL => {
                let covered: u32 = table.slots.iter().map(|&s| self.col_max[s]).sum();
                f64::from(self.max_score + o.steps.saturating_sub(covered))
            }
            Metric::Mi => {
                let gain = |s: u32, n: u32| o.xlogx[(s + n) as usize] - o.xlogx[s as usize] - o.xlogx[n as usize];
                let mut alloc = [0u32; 1 << (MAX_ORACLE_FILES - 1)];
                let mut total = 0.0;
                for _ in 0..o.steps {
                    let mut best = (f64::NEG_INFINITY, 0);
                    for (i, &slot) in table.slots.iter().enumerate() {
                        let s = self.col_sum[slot];
                        let step = gain(s, alloc[i] + 1) - gain(s, alloc[i]);
                        if step > best.0 {
                            best = (step, i);
                        }
                    }
                    alloc[best.1] += 1;
                    total += best.0;
                }
                head - (self.col_term - self.self_terms + total) / scale
            }
        }
    }

    /// The final row, enumerated only over candidates that fit the remaining
    /// budget; leakage is evaluated incrementally from the column state.
    fn last_row(&mut self) -> Result<(), OracleError> {
        let o = self.o;
        let row = o.num_files - 1;
        let table = &o.rows[row];
        let room = o.max_cost - self.cost;
        let m = o.num_files as f64;
        let scale = m * f64::from(o.steps);
        let head = libm::log2(m);
        self.tick(1)?;
        if self.prune(self.last_row_bound(head, scale)) {
            return Ok(());
        }
        let fits = table.by_cost.partition_point(|&i| u64::from(table.cands[i as usize].cost) <= room);
        self.tick(fits as u64)?;
        for &ci in &table.by_cost[..fits] {
            let cand = &table.cands[ci as usize];
            let score = match o.metric {
                Metric::MaxL => {
                    let mut s = self.max_score;
                    for (&slot, &n) in table.slots.iter().zip(&cand.counts) {
                        s += u32::from(n).saturating_sub(self.col_max[slot]);
                    }
                    f64::from(s)
                }
                Metric::Mi => {
                    let mut t = self.col_term;
                    for (&slot, &n) in table.slots.iter().zip(&cand.counts) {
                        let old = self.col_sum[slot];
                        t += o.xlogx[(old + u32::from(n)) as usize] - o.xlogx[old as usize];
                    }
                    head - (t - self.self_terms - cand.self_term) / scale
                }
            };
            let bound = self.bound();
            if score > bound {
                continue;
            }
            self.path.push(ci);
            self.consider(score);
            self.path.pop();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{download_cost, maxl_leakage, mi_leakage};
    use crate::mechanism::Scheme;
    use crate::prob::ratio;

    #[test]
    fn compositions_are_lexicographic() {
        let c = compositions(2, 3);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], [0, 0, 2]);
        assert_eq!(c[5], [2, 0, 0]);
    }

    #[test]
    fn two_files_full_download_budget() {
        let r = grid_oracle(2, Metric::MaxL, &prob::int(2), 8).unwrap();
        assert_eq!(r.min_bits, 0.0);
        assert_eq!(r.maxl_sum, Some(prob::int(1)));
    }

    #[test]
    fn two_files_mi_midpoint() {
        let r = grid_oracle(2, Metric::Mi, &ratio(3, 2), 16).unwrap();
        assert!((r.min_bits - 0.5).abs() < 1e-12, "{}", r.min_bits);
        let mech = r.mechanism();
        assert!((mi_leakage(&mech).unwrap() - r.min_bits).abs() < 1e-12);
        let cost = download_cost(&Scheme::new(mech).unwrap()).unwrap();
        assert!(cost <= ratio(3, 2));
        assert_eq!(cost, r.download_cost);
    }

    #[test]
    fn result_matches_metric_of_argmin() {
        for metric in [Metric::Mi, Metric::MaxL] {
            let r = grid_oracle(3, metric, &ratio(5, 2), 6).unwrap();
            let mech = r.mechanism();
            let measured = match metric {
                Metric::Mi => mi_leakage(&mech).unwrap(),
                Metric::MaxL => maxl_leakage(&mech).unwrap(),
            };
            assert!((measured - r.min_bits).abs() < 1e-12);
        }
    }

    #[test]
    fn splitting_does_not_change_the_answer() {
        for metric in [Metric::Mi, Metric::MaxL] {
            let o = GridOracle::new(3, metric, &ratio(7, 4), 6).unwrap();
            let whole = o.search().unwrap();
            let n = o.first_row_candidates();
            let mut merged = None;
            for k in 0..4 {
                let part = o.search_first_rows(k * n / 4..(k + 1) * n / 4).unwrap();
                merged = merge(merged, part);
            }
            let merged = merged.unwrap();
            assert_eq!(merged.counts, whole.counts);
            assert_eq!(merged.min_bits, whole.min_bits);
        }
    }

    #[test]
    fn argument_errors() {
        assert_eq!(grid_oracle(5, Metric::Mi, &prob::int(2), 8).unwrap_err(), OracleError::FileCount(5));
        assert_eq!(grid_oracle(2, Metric::Mi, &prob::int(2), 3).unwrap_err(), OracleError::GridSteps(3));
        assert!(matches!(grid_oracle(2, Metric::Mi, &prob::int(3), 8), Err(OracleError::Cost(_))));
        assert!(matches!(
            GridOracle::new(4, Metric::Mi, &prob::int(2), 200),
            Err(OracleError::BudgetExceeded { .. })
        ));
        let tiny = GridOracle::new(3, Metric::Mi, &prob::int(2), 8).unwrap().with_node_budget(10);
        assert!(matches!(tiny.search(), Err(OracleError::BudgetExceeded { budget: 10 })));
    }
}
