use std::collections::BTreeMap;
use std::io::BufRead;

use super::Parsed;
use crate::error::{Error, Result};

/// Graded judgments: query id -> doc id -> grade.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    pub judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    /// Records a judgment; returns the previous grade if one was replaced.
    pub fn insert(&mut self, query: impl Into<String>, doc: impl Into<String>, grade: u32) -> Option<u32> {
        self.judgments.entry(query.into()).or_default().insert(doc.into(), grade)
    }

    pub fn grade(&self, query: &str, doc: &str) -> Option<u32> {
        self.judgments.get(query)?.get(doc).copied()
    }

    pub fn query(&self, query: &str) -> Option<&BTreeMap<String, u32>> {
        self.judgments.get(query)
    }

    pub fn num_queries(&self) -> usize {
        self.judgments.len()
    }

    pub fn num_judgments(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }
}

/// Parses 4-column `qid iter docid grade` lines. The iteration column is ignored.
pub fn parse_qrels<R: BufRead>(source: R) -> Result<Parsed<Qrels>> {
    let mut qrels = Qrels::default();
    let mut warnings = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = idx as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(lineno, format!("expected 4 columns, found {}", fields.len())));
        }
        let grade: i64 = fields[3]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("grade `{}` is not an integer", fields[3])))?;
        let grade = u32::try_from(grade)
            .map_err(|_| Error::parse(lineno, format!("grade {grade} is out of range")))?;
        if let Some(previous) = qrels.insert(fields[0], fields[2], grade) {
            let msg = format!(
                "line {lineno}: duplicate judgment for ({}, {}); grade {previous} replaced by {grade}",
                fields[0], fields[2]
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    Ok(Parsed { value: qrels, warnings })
}
