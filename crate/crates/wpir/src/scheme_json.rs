//! Scheme JSON:
//!
//! ```json
//! {"M": 3, "queries": [{"support": [1, 2], "probs": ["1/2", "1/2", "0"]}]}
//! ```
//!
//! Supports are 1-based. `probs[m]` is `P(q | m+1)` as an exact rational,
//! written `"num/den"`; input also accepts `["num", "den"]` pairs and plain
//! integer or decimal strings. Mixtures carry an extra `"tag"` per query,
//! omitted when zero.

use serde_json::{json, Map, Value};
use thiserror::Error;
use wpir_core::prob::{self, Ratio};
use wpir_core::{Mechanism, Query, Scheme, SubsetQuery, Violation};

use crate::format::json_ratio;

#[derive(Debug, Error)]
pub enum SchemeFormatError {
    #[error("malformed scheme JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed scheme JSON: {0}")]
    Shape(String),
    #[error("invalid scheme: {0}")]
    Invalid(#[from] Violation),
}

fn shape(msg: impl Into<String>) -> SchemeFormatError {
    SchemeFormatError::Shape(msg.into())
}

pub fn scheme_to_json(scheme: &Scheme) -> Value {
    let mech = scheme.mechanism();
    let queries: Vec<Value> = mech
        .queries()
        .iter()
        .enumerate()
        .map(|(q, query)| {
            let mut obj = Map::new();
            let support: Vec<usize> = query.support.files().map(|f| f + 1).collect();
            obj.insert("support".into(), json!(support));
            let probs: Vec<Value> = mech.rows().iter().map(|row| json_ratio(&row[q])).collect();
            obj.insert("probs".into(), Value::Array(probs));
            if query.tag != 0 {
                obj.insert("tag".into(), json!(query.tag));
            }
            Value::Object(obj)
        })
        .collect();
    json!({ "M": mech.num_files(), "queries": queries })
}

fn parse_prob(v: &Value) -> Result<Ratio, SchemeFormatError> {
    match v {
        Value::String(s) => prob::parse_ratio(s).map_err(|e| shape(e.to_string())),
        Value::Array(pair) if pair.len() == 2 => {
            let part = |v: &Value| match v {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) if n.is_i64() || n.is_u64() => Ok(n.to_string()),
                _ => Err(shape("probability pair entries must be integers")),
            };
            let text = format!("{}/{}", part(&pair[0])?, part(&pair[1])?);
            prob::parse_ratio(&text).map_err(|e| shape(e.to_string()))
        }
        Value::Number(n) if n.is_i64() || n.is_u64() => Ok(prob::int(n.as_i64().unwrap_or(i64::MAX))),
        other => Err(shape(format!("probability must be \"num/den\", got {other}"))),
    }
}

/// Parses and validates; every mechanism invariant is checked before the
/// scheme is returned.
pub fn scheme_from_json(text: &str) -> Result<Scheme, SchemeFormatError> {
    let root: Value = serde_json::from_str(text)?;
    let obj = root.as_object().ok_or_else(|| shape("top level must be an object"))?;
    let num_files = obj
        .get("M")
        .and_then(Value::as_u64)
        .ok_or_else(|| shape("\"M\" must be a positive integer"))? as usize;
    if num_files == 0 || num_files > wpir_core::MAX_FILES {
        return Err(Violation::FileCount(num_files).into());
    }
    let entries = obj
        .get("queries")
        .and_then(Value::as_array)
        .ok_or_else(|| shape("\"queries\" must be an array"))?;
    let mut queries = Vec::with_capacity(entries.len());
    let mut columns = Vec::with_capacity(entries.len());
    for (i, entry) in entries.iter().enumerate() {
        let support = entry
            .get("support")
            .and_then(Value::as_array)
            .ok_or_else(|| shape(format!("query {i}: \"support\" must be an array")))?;
        let mut files = Vec::with_capacity(support.len());
        for f in support {
            match f.as_u64() {
                Some(f) if f >= 1 && f <= num_files as u64 => files.push(f as usize - 1),
                _ => return Err(shape(format!("query {i}: support entries must lie in [1, {num_files}]"))),
            }
        }
        let support = SubsetQuery::from_files(files)
            .ok_or_else(|| shape(format!("query {i}: support must be nonempty")))?;
        let tag = match entry.get("tag") {
            None => 0,
            Some(t) => t
                .as_u64()
                .and_then(|t| u32::try_from(t).ok())
                .ok_or_else(|| shape(format!("query {i}: \"tag\" must be a small nonnegative integer")))?,
        };
        let probs = entry
            .get("probs")
            .and_then(Value::as_array)
            .ok_or_else(|| shape(format!("query {i}: \"probs\" must be an array")))?;
        if probs.len() != num_files {
            return Err(shape(format!("query {i}: expected {num_files} probabilities, found {}", probs.len())));
        }
        queries.push(Query::tagged(support, tag));
        columns.push(probs.iter().map(parse_prob).collect::<Result<Vec<_>, _>>()?);
    }
    let rows = (0..num_files)
        .map(|m| columns.iter().map(|c| c[m].clone()).collect())
        .collect();
    Ok(Scheme::new(Mechanism::new(num_files, queries, rows)?)?)
}
