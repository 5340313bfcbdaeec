use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use super::Parsed;
use crate::error::{Error, Result};
use crate::vector::{canonical_order, ScoredDoc};

/// Ranked output for a set of queries, in TREC run form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run {
    pub tag: String,
    /// Per query, hits in canonical rank order.
    pub rankings: BTreeMap<String, Vec<ScoredDoc<f32>>>,
}

impl Run {
    pub fn new(tag: impl Into<String>) -> Self {
        Run { tag: tag.into(), rankings: BTreeMap::new() }
    }

    /// Adds one query's hits, sorting them canonically.
    pub fn insert(&mut self, query: impl Into<String>, mut hits: Vec<ScoredDoc<f32>>) {
        hits.sort_by(canonical_order);
        self.rankings.insert(query.into(), hits);
    }
}

fn check_token(what: &str, value: &str) -> Result<()> {
    if value.is_empty() || value.contains(char::is_whitespace) {
        return Err(Error::invalid(format!("{what} `{value}` must be non-empty without whitespace")));
    }
    Ok(())
}

/// Writes `qid Q0 docid rank score tag` lines, ranks starting at 1.
pub fn write_run<W: Write>(run: &Run, sink: &mut W) -> Result<u64> {
    check_token("run tag", &run.tag)?;
    let mut lines = 0;
    for (query, hits) in &run.rankings {
        check_token("query id", query)?;
        for (rank, hit) in hits.iter().enumerate() {
            check_token("doc id", &hit.doc_id)?;
            writeln!(sink, "{query} Q0 {} {} {} {}", hit.doc_id, rank + 1, hit.score, run.tag)?;
            lines += 1;
        }
    }
    Ok(lines)
}

/// Parses a 6-column run. Order within each query is rebuilt from the scores.
pub fn parse_run<R: BufRead>(source: R) -> Result<Parsed<Run>> {
    let mut tag: Option<String> = None;
    let mut rankings: BTreeMap<String, Vec<ScoredDoc<f32>>> = BTreeMap::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut warnings = Vec::new();
    let mut warn = |msg: String| {
        log::warn!("{msg}");
        warnings.push(msg);
    };

    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = idx as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::parse(lineno, format!("expected 6 columns, found {}", fields.len())));
        }
        fields[3]
            .parse::<u64>()
            .map_err(|_| Error::parse(lineno, format!("rank `{}` is not a non-negative integer", fields[3])))?;
        let score: f32 = fields[4]
            .parse()
            .ok()
            .filter(|s: &f32| s.is_finite())
            .ok_or_else(|| Error::parse(lineno, format!("score `{}` is not a finite number", fields[4])))?;
        match &tag {
            None => tag = Some(fields[5].to_owned()),
            Some(t) if t != fields[5] => warn(format!("line {lineno}: tag `{}` differs from `{t}`", fields[5])),
            Some(_) => {}
        }
        if !seen.insert((fields[0].to_owned(), fields[2].to_owned())) {
            warn(format!("line {lineno}: duplicate doc `{}` for query `{}` ignored", fields[2], fields[0]));
            continue;
        }
        rankings.entry(fields[0].to_owned()).or_default().push(ScoredDoc::new(fields[2], score));
    }

    for (query, hits) in rankings.iter_mut() {
        let before: Vec<String> = hits.iter().map(|h| h.doc_id.clone()).collect();
        hits.sort_by(canonical_order);
        if hits.iter().map(|h| &h.doc_id).ne(before.iter()) {
            warn(format!("query `{query}`: file order disagreed with scores; re-sorted"));
        }
    }
    Ok(Parsed { value: Run { tag: tag.unwrap_or_default(), rankings }, warnings })
}
