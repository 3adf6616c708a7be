//! Curve and region tables as CSV or JSON.

use serde_json::{json, Value};
use wpir_core::capacity::{self, CapacityError, CurveKind, CurvePoint, CurveSpec};
use wpir_core::Metric;

use crate::format::{fmt_f64, json_f64};

pub fn curve_points(spec: &CurveSpec) -> Result<Vec<CurvePoint>, CapacityError> {
    capacity::curve(spec)
}

/// Header `metric,M,rho_bar,capacity,is_breakpoint`; the leakage column is
/// `rho` (bits) for unnormalized curves.
pub fn curve_csv(spec: &CurveSpec, points: &[CurvePoint]) -> String {
    let x = if spec.normalized { "rho_bar" } else { "rho" };
    let mut out = format!("metric,M,{x},capacity,is_breakpoint\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            spec.kind.name(),
            spec.num_files,
            fmt_f64(p.leakage(spec.normalized)),
            fmt_f64(p.capacity),
            u8::from(p.is_breakpoint)
        ));
    }
    out
}

pub fn curve_json(spec: &CurveSpec, points: &[CurvePoint]) -> Value {
    let x = if spec.normalized { "rho_bar" } else { "rho" };
    let rows: Vec<Value> = points
        .iter()
        .map(|p| {
            let mut row = serde_json::Map::new();
            row.insert(x.into(), json_f64(p.leakage(spec.normalized)));
            row.insert("capacity".into(), json_f64(p.capacity));
            row.insert("is_breakpoint".into(), json!(p.is_breakpoint));
            Value::Object(row)
        })
        .collect();
    json!({ "metric": spec.kind.name(), "M": spec.num_files, "points": rows })
}

/// One achievable `(D, rho)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionRow {
    /// `None` for breakpoints, which both metrics share.
    pub metric: Option<Metric>,
    pub d: f64,
    pub rho: f64,
    pub is_breakpoint: bool,
}

/// The breakpoints `(w, log2(M/w))`, `w = 1..=M`, then for each metric
/// `points` evenly spaced interior points of every time-sharing segment.
pub fn region(num_files: u64, points: usize) -> Result<Vec<RegionRow>, CapacityError> {
    if num_files == 0 {
        return Err(CapacityError::FileCount);
    }
    let m = num_files as f64;
    let mut rows: Vec<RegionRow> = (1..=num_files)
        .map(|w| RegionRow { metric: None, d: w as f64, rho: (m / w as f64).log2(), is_breakpoint: true })
        .collect();
    for metric in [Metric::Mi, Metric::MaxL] {
        for w in 2..=num_files {
            for k in 1..=points {
                let d = (w - 1) as f64 + k as f64 / (points + 1) as f64;
                let rho = match metric {
                    Metric::Mi => capacity::rho_lb_mi(num_files, d)?,
                    Metric::MaxL => capacity::rho_lb_maxl(num_files, d)?,
                };
                rows.push(RegionRow { metric: Some(metric), d, rho, is_breakpoint: false });
            }
        }
    }
    Ok(rows)
}

fn metric_name(m: Option<Metric>) -> &'static str {
    m.map_or("any", Metric::name)
}

/// Header `metric,M,D,rho,is_breakpoint`; breakpoints carry metric `any`.
pub fn region_csv(num_files: u64, rows: &[RegionRow]) -> String {
    let mut out = String::from("metric,M,D,rho,is_breakpoint\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            metric_name(r.metric),
            num_files,
            fmt_f64(r.d),
            fmt_f64(r.rho),
            u8::from(r.is_breakpoint)
        ));
    }
    out
}

pub fn region_json(num_files: u64, rows: &[RegionRow]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "metric": metric_name(r.metric),
                "D": json_f64(r.d),
                "rho": json_f64(r.rho),
                "is_breakpoint": r.is_breakpoint,
            })
        })
        .collect();
    json!({ "M": num_files, "points": rows })
}

/// Parses `mi`, `maxl` or `ub`.
pub fn parse_curve_kind(s: &str) -> Option<CurveKind> {
    match s {
        "mi" => Some(CurveKind::Mi),
        "maxl" => Some(CurveKind::MaxL),
        "ub" => Some(CurveKind::UpperBound),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_file_region() {
        let rows = region(3, 0).unwrap();
        let csv = region_csv(3, &rows);
        assert_eq!(
            csv,
            "metric,M,D,rho,is_breakpoint\nany,3,1,1.58496250072116,1\nany,3,2,0.584962500721156,1\nany,3,3,0,1\n"
        );
    }

    #[test]
    fn single_file_region() {
        let rows = region(1, 5).unwrap();
        assert_eq!(rows, [RegionRow { metric: None, d: 1.0, rho: 0.0, is_breakpoint: true }]);
    }

    #[test]
    fn four_file_hull_hits_three() {
        // rho = log2(4/3) sits at D = 3 on the MI hull
        assert!((capacity::rho_lb_mi(4, 3.0).unwrap() - (4.0f64 / 3.0).log2()).abs() < 1e-12);
        let rows = region(4, 3).unwrap();
        assert_eq!(rows.len(), 4 + 2 * 3 * 3);
    }
}
