//! Privacy mechanisms `P(Q|M)`, schemes built on them, and their invariants.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::database::Database;
use crate::prob::{self, Ratio};
use crate::query::SubsetQuery;

/// A query as sent to the server: the files it asks for plus a label that
/// keeps equal supports from different time-sharing components apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Query {
    pub support: SubsetQuery,
    pub tag: u32,
}

impl Query {
    pub fn new(support: SubsetQuery) -> Self {
        Self { support, tag: 0 }
    }

    pub fn tagged(support: SubsetQuery, tag: u32) -> Self {
        Self { support, tag }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tag == 0 {
            write!(f, "{}", self.support)
        } else {
            write!(f, "{}#{}", self.support, self.tag)
        }
    }
}

/// First broken invariant of a mechanism or scheme. Rows and columns are
/// 0-based (`row` is the requested file, `query` the alphabet position).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    FileCount(usize),
    EmptyAlphabet,
    QueryOutOfRange { query: usize },
    DuplicateQuery { first: usize, second: usize },
    RowCount { expected: usize, found: usize },
    RowLength { row: usize, expected: usize, found: usize },
    ProbabilityRange { row: usize, query: usize },
    SupportConsistency { row: usize, query: usize },
    RowSum { row: usize },
    AnswerLength { query: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::FileCount(m) => write!(f, "number of files {m} outside [1, {}]", crate::MAX_FILES),
            Self::EmptyAlphabet => write!(f, "query alphabet is empty"),
            Self::QueryOutOfRange { query } => {
                write!(f, "query {query} names a file beyond the database")
            }
            Self::DuplicateQuery { first, second } => {
                write!(f, "queries {first} and {second} are identical")
            }
            Self::RowCount { expected, found } => {
                write!(f, "expected {expected} rows, found {found}")
            }
            Self::RowLength { row, expected, found } => {
                write!(f, "row {row}: expected {expected} entries, found {found}")
            }
            Self::ProbabilityRange { row, query } => {
                write!(f, "row {row}, query {query}: probability outside [0, 1]")
            }
            Self::SupportConsistency { row, query } => write!(
                f,
                "row {row}, query {query}: support consistency (positive probability for a query not retrieving file {row})"
            ),
            Self::RowSum { row } => write!(f, "row {row}: row sum ≠ 1"),
            Self::AnswerLength { query } => {
                write!(f, "query {query}: answer length differs from its Hamming weight")
            }
        }
    }
}

impl core::error::Error for Violation {}

/// Conditional distribution `P(Q = q | M = m)` with a uniform requested index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mechanism {
    num_files: usize,
    queries: Vec<Query>,
    rows: Vec<Vec<Ratio>>,
}

impl Mechanism {
    /// Validating constructor.
    pub fn new(
        num_files: usize,
        queries: Vec<Query>,
        rows: Vec<Vec<Ratio>>,
    ) -> Result<Self, Violation> {
        let mech = Self::new_unchecked(num_files, queries, rows);
        validate_mechanism(&mech)?;
        Ok(mech)
    }

    /// Skips validation. Every consumer that relies on the invariants calls
    /// [`validate_mechanism`] itself.
    pub fn new_unchecked(num_files: usize, queries: Vec<Query>, rows: Vec<Vec<Ratio>>) -> Self {
        Self { num_files, queries, rows }
    }

    pub fn num_files(&self) -> usize {
        self.num_files
    }

    pub fn num_queries(&self) -> usize {
        self.queries.len()
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn rows(&self) -> &[Vec<Ratio>] {
        &self.rows
    }

    pub fn prob(&self, m: usize, q: usize) -> &Ratio {
        &self.rows[m][q]
    }

    /// `P(Q = q) = (1/M) sum_m P(q|m)`.
    pub fn query_marginal(&self) -> Vec<Ratio> {
        let scale = prob::ratio(1, self.num_files as i64);
        (0..self.num_queries())
            .map(|q| self.column_sum(q) * &scale)
            .collect()
    }

    pub fn column_sum(&self, q: usize) -> Ratio {
        self.rows.iter().fold(Ratio::zero(), |acc, row| acc + &row[q])
    }

    pub fn column_max(&self, q: usize) -> Ratio {
        self.rows
            .iter()
            .map(|row| &row[q])
            .max()
            .cloned()
            .unwrap_or_else(Ratio::zero)
    }

    /// Merges queries: query `q` becomes query `groups[q]` of the result,
    /// whose support is the union of the merged supports and whose tag is the
    /// group index. `num_groups` must exceed every entry of `groups`.
    pub fn coarsen(&self, groups: &[usize], num_groups: usize) -> Result<Self, Violation> {
        validate_mechanism(self)?;
        assert_eq!(groups.len(), self.num_queries(), "one group per query");
        let mut supports: Vec<Option<SubsetQuery>> = alloc::vec![None; num_groups];
        for (q, &g) in groups.iter().enumerate() {
            let s = self.queries[q].support;
            supports[g] = Some(supports[g].map_or(s, |t| t.union(s)));
        }
        let keep: Vec<usize> = (0..num_groups).filter(|&g| supports[g].is_some()).collect();
        let mut slot = alloc::vec![usize::MAX; num_groups];
        for (i, &g) in keep.iter().enumerate() {
            slot[g] = i;
        }
        let queries = keep
            .iter()
            .map(|&g| Query::tagged(supports[g].expect("kept"), g as u32))
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = alloc::vec![Ratio::zero(); keep.len()];
                for (q, p) in row.iter().enumerate() {
                    out[slot[groups[q]]] += p;
                }
                out
            })
            .collect();
        Mechanism::new(self.num_files, queries, rows)
    }
}

/// Checks every mechanism invariant; reports the first violation found in
/// row-major order.
pub fn validate_mechanism(mech: &Mechanism) -> Result<(), Violation> {
    let m_count = mech.num_files;
    if !(1..=crate::MAX_FILES).contains(&m_count) {
        return Err(Violation::FileCount(m_count));
    }
    if mech.queries.is_empty() {
        return Err(Violation::EmptyAlphabet);
    }
    if let Some(query) = mech.queries.iter().position(|q| !q.support.fits(m_count)) {
        return Err(Violation::QueryOutOfRange { query });
    }
    let mut order: Vec<usize> = (0..mech.queries.len()).collect();
    order.sort_by_key(|&i| (mech.queries[i], i));
    for pair in order.windows(2) {
        if mech.queries[pair[0]] == mech.queries[pair[1]] {
            return Err(Violation::DuplicateQuery { first: pair[0], second: pair[1] });
        }
    }
    if mech.rows.len() != m_count {
        return Err(Violation::RowCount { expected: m_count, found: mech.rows.len() });
    }
    for (m, row) in mech.rows.iter().enumerate() {
        if row.len() != mech.queries.len() {
            return Err(Violation::RowLength {
                row: m,
                expected: mech.queries.len(),
                found: row.len(),
            });
        }
        let mut total = Ratio::zero();
        for (q, p) in row.iter().enumerate() {
            if !prob::in_unit_interval(p) {
                return Err(Violation::ProbabilityRange { row: m, query: q });
            }
            if p.is_positive() && !mech.queries[q].support.contains(m) {
                return Err(Violation::SupportConsistency { row: m, query: q });
            }
            total += p;
        }
        if !total.is_one() {
            return Err(Violation::RowSum { row: m });
        }
    }
    Ok(())
}

/// The answer-length multiplier; answers are never coded, so one symbol per
/// retrieved file symbol.
pub const GAMMA: u32 = 1;

/// A mechanism together with its answer map: query `q` returns the files in
/// its support, so the normalized answer length is `L(q) = w(q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheme {
    mechanism: Mechanism,
    answer_lengths: Vec<Ratio>,
}

impl Scheme {
    pub fn new(mechanism: Mechanism) -> Result<Self, Violation> {
        validate_mechanism(&mechanism)?;
        let answer_lengths = mechanism
            .queries
            .iter()
            .map(|q| prob::int(i64::from(q.support.weight())))
            .collect();
        Ok(Self { mechanism, answer_lengths })
    }

    /// Accepts explicit lengths, which must equal the Hamming weights.
    pub fn with_lengths(mechanism: Mechanism, answer_lengths: Vec<Ratio>) -> Result<Self, Violation> {
        let scheme = Self::new(mechanism)?;
        if answer_lengths.len() != scheme.answer_lengths.len() {
            return Err(Violation::AnswerLength { query: answer_lengths.len().min(scheme.answer_lengths.len()) });
        }
        if let Some(q) = (0..answer_lengths.len()).find(|&q| answer_lengths[q] != scheme.answer_lengths[q]) {
            return Err(Violation::AnswerLength { query: q });
        }
        Ok(scheme)
    }

    pub fn mechanism(&self) -> &Mechanism {
        &self.mechanism
    }

    pub fn into_mechanism(self) -> Mechanism {
        self.mechanism
    }

    pub fn num_files(&self) -> usize {
        self.mechanism.num_files
    }

    pub fn answer_lengths(&self) -> &[Ratio] {
        &self.answer_lengths
    }

    /// `L(m, q)`: the answer length if `q` can be sent for `m`, `None` (an
    /// infinite length) otherwise.
    pub fn length_for(&self, m: usize, q: usize) -> Option<&Ratio> {
        self.mechanism.rows[m][q]
            .is_positive()
            .then(|| &self.answer_lengths[q])
    }

    /// The server's reply: the requested files concatenated in index order.
    pub fn answer(&self, q: usize, db: &Database) -> Vec<u8> {
        let support = self.mechanism.queries[q].support;
        let mut out = Vec::with_capacity(support.weight() as usize * db.file_size());
        for f in support.files() {
            out.extend_from_slice(db.file(f));
        }
        out
    }

    /// Recovers file `m` from an answer to query `q`, if the answer holds it.
    pub fn decode<'a>(&self, q: usize, m: usize, answer: &'a [u8], file_size: usize) -> Option<&'a [u8]> {
        let pos = self.mechanism.queries[q].support.rank_of(m)?;
        answer.get(pos * file_size..(pos + 1) * file_size)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RetrievabilityError {
    DimensionMismatch { scheme: usize, database: usize },
    Invalid(Violation),
    /// Query `query` may be sent for `file` but its answer misses that file.
    NotRetrievable { file: usize, query: usize },
}

impl fmt::Display for RetrievabilityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { scheme, database } => write!(
                f,
                "scheme has {scheme} files but the database has {database}"
            ),
            Self::Invalid(v) => write!(f, "invalid mechanism: {v}"),
            Self::NotRetrievable { file, query } => write!(
                f,
                "file {} cannot be decoded from the answer to query {query}",
                file + 1
            ),
        }
    }
}

impl core::error::Error for RetrievabilityError {}

/// Perfect retrievability: every query that can be sent for file `m`
/// returns an answer from which file `m` is decoded exactly.
pub fn check_retrievability(scheme: &Scheme, db: &Database) -> Result<(), RetrievabilityError> {
    let mech = &scheme.mechanism;
    if mech.num_files != db.num_files() {
        return Err(RetrievabilityError::DimensionMismatch {
            scheme: mech.num_files,
            database: db.num_files(),
        });
    }
    // the raw rows, not validate_mechanism: support consistency is exactly
    // what this check is about
    for (m, row) in mech.rows.iter().enumerate() {
        for (q, p) in row.iter().enumerate() {
            if !p.is_positive() {
                continue;
            }
            let answer = scheme.answer(q, db);
            match scheme.decode(q, m, &answer, db.file_size()) {
                Some(file) if file == db.file(m) => {}
                _ => return Err(RetrievabilityError::NotRetrievable { file: m, query: q }),
            }
        }
    }
    validate_mechanism(mech).map_err(RetrievabilityError::Invalid)
}

/// Leakage metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    /// Mutual information `I(M;Q)`.
    Mi,
    /// Maximal leakage `log2 sum_q max_m P(q|m)`.
    MaxL,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mi => "mi",
            Self::MaxL => "maxl",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mi" => Ok(Self::Mi),
            "maxl" => Ok(Self::MaxL),
            other => Err(alloc::format!("unknown metric {other:?} (expected mi or maxl)")),
        }
    }
}

/// An achievable (download cost, leakage) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub download_cost: Ratio,
    pub leakage: f64,
    pub metric: Metric,
}

impl TradeoffPoint {
    /// Tolerance on the `log2 M` ceiling.
    pub const TOL: f64 = 1e-12;

    /// `None` unless `1 <= D <= M` and `0 <= rho <= log2 M`.
    pub fn new(num_files: usize, download_cost: Ratio, leakage: f64, metric: Metric) -> Option<Self> {
        let max_cost = prob::int(num_files as i64);
        let ok = download_cost >= Ratio::one()
            && download_cost <= max_cost
            && leakage >= -Self::TOL
            && leakage <= libm::log2(num_files as f64) + Self::TOL;
        ok.then_some(Self { download_cost, leakage, metric })
    }

    /// `rho / log2 M`; `M = 1` has no leakage to normalize and maps to 1.
    pub fn normalized_leakage(&self, num_files: usize) -> f64 {
        if num_files <= 1 {
            1.0
        } else {
            self.leakage / libm::log2(num_files as f64)
        }
    }

    pub fn rate(&self) -> Ratio {
        self.download_cost.recip()
    }
}
