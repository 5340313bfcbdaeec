//! TREC-style evaluation: qrels and run files, the four ranking metrics, and
//! per-query plus mean reports.

mod metrics;
mod qrels;
mod run;

pub use metrics::{average_precision, ndcg_at_k, recall_at_k, rr_at_k};
pub use qrels::{parse_qrels, Qrels};
pub use run::{parse_run, write_run, Run};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

pub const RR_DEPTH: usize = 10;
pub const NDCG_DEPTH: usize = 10;
pub const RECALL_DEPTH: usize = 1000;
pub const AP_DEPTH: usize = 1000;

/// A parsed value plus the non-fatal problems noticed while reading it.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct QueryMetrics {
    #[serde(rename = "rr@10")]
    pub rr_at_10: f64,
    pub ap: f64,
    #[serde(rename = "ndcg@10")]
    pub ndcg_at_10: f64,
    #[serde(rename = "r@1k")]
    pub r_at_1k: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    pub per_query: BTreeMap<String, QueryMetrics>,
    /// Arithmetic means over every query in the qrels.
    pub mean: QueryMetrics,
    pub warnings: Vec<String>,
}

/// Scores `run` against `qrels`.
///
/// RR, AP and recall count grades `>= binary_rel_threshold` as relevant; nDCG
/// uses the raw grades. Every qrels query is scored (as all zeros if the run
/// lacks it); run queries without judgments are ignored.
pub fn evaluate(run: &Run, qrels: &Qrels, binary_rel_threshold: u32) -> Result<MetricReport> {
    if binary_rel_threshold == 0 {
        return Err(Error::invalid("relevance threshold must be at least 1"));
    }
    let mut warnings = Vec::new();
    let mut warn = |msg: String| {
        log::warn!("{msg}");
        warnings.push(msg);
    };

    for query in run.rankings.keys().filter(|q| qrels.query(q).is_none()) {
        warn(format!("query `{query}` has no judgments; excluded"));
    }

    let mut per_query = BTreeMap::new();
    for (query, judged) in &qrels.judgments {
        let grades: HashMap<&str, u32> = judged.iter().map(|(d, g)| (d.as_str(), *g)).collect();
        let relevant: HashSet<&str> =
            judged.iter().filter(|(_, &g)| g >= binary_rel_threshold).map(|(d, _)| d.as_str()).collect();
        if relevant.is_empty() {
            warn(format!("query `{query}` has no documents at or above grade {binary_rel_threshold}"));
        }
        if !grades.values().any(|&g| g > 0) {
            warn(format!("query `{query}` has no positively graded documents"));
        }
        let ranking: Vec<&str> = match run.rankings.get(query) {
            Some(hits) => hits.iter().map(|h| h.doc_id.as_str()).collect(),
            None => {
                warn(format!("query `{query}` is missing from the run; scored as zero"));
                Vec::new()
            }
        };
        per_query.insert(
            query.clone(),
            QueryMetrics {
                rr_at_10: rr_at_k(&ranking, &relevant, RR_DEPTH),
                ap: average_precision(&ranking, &relevant, AP_DEPTH),
                ndcg_at_10: ndcg_at_k(&ranking, &grades, NDCG_DEPTH),
                r_at_1k: recall_at_k(&ranking, &relevant, RECALL_DEPTH),
            },
        );
    }

    let n = per_query.len().max(1) as f64;
    let sum = |f: fn(&QueryMetrics) -> f64| per_query.values().map(f).sum::<f64>() / n;
    let mean = QueryMetrics {
        rr_at_10: sum(|m| m.rr_at_10),
        ap: sum(|m| m.ap),
        ndcg_at_10: sum(|m| m.ndcg_at_10),
        r_at_1k: sum(|m| m.r_at_1k),
    };
    Ok(MetricReport { per_query, mean, warnings })
}

#[derive(Serialize)]
struct JsonLine<'a> {
    query: &'a str,
    #[serde(flatten)]
    metrics: &'a QueryMetrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_queries: Option<usize>,
}

impl MetricReport {
    /// Aligned table: one row per query, then the `all` row.
    pub fn to_table(&self) -> String {
        let width = self.per_query.keys().map(String::len).max().unwrap_or(0).max("query".len()).max(3);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>8}  {:>8}  {:>8}  {:>8}", "query", "RR@10", "AP", "nDCG@10", "R@1k");
        let mut row = |name: &str, m: &QueryMetrics| {
            let _ = writeln!(
                out,
                "{name:<width$}  {:>8.4}  {:>8.4}  {:>8.4}  {:>8.4}",
                m.rr_at_10, m.ap, m.ndcg_at_10, m.r_at_1k
            );
        };
        for (query, m) in &self.per_query {
            row(query, m);
        }
        row("all", &self.mean);
        out
    }

    /// One JSON object per query, then an `all` summary line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for (query, metrics) in &self.per_query {
            let line = JsonLine { query, metrics, num_queries: None };
            out.push_str(&serde_json::to_string(&line).expect("metrics serialize"));
            out.push('\n');
        }
        let summary = JsonLine { query: "all", metrics: &self.mean, num_queries: Some(self.per_query.len()) };
        out.push_str(&serde_json::to_string(&summary).expect("metrics serialize"));
        out.push('\n');
        out
    }
}
