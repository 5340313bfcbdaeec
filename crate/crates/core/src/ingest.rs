//! Streaming JSON-lines corpus I/O, optionally gzip-compressed.
//!
//! One record per line: `{"docid": "...", "vector": [...], "text": "..."}`.
//! `text` is optional and unknown keys are ignored. `id` and `qid` are
//! accepted in place of `docid`, so query files share the same format.
//! Vector components are parsed straight to the nearest `f32` and written in
//! the shortest form that reads back to the same `f32`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::vector::Embedding;

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRecord {
    pub docid: String,
    pub vector: Vec<f32>,
    pub text: Option<String>,
}

impl CorpusRecord {
    pub fn new(docid: impl Into<String>, vector: Vec<f32>) -> Self {
        CorpusRecord { docid: docid.into(), vector, text: None }
    }

    pub fn into_embedding(self) -> Result<Embedding<f32>> {
        Embedding::new(self.docid, self.vector)
    }
}

/// A passage or query awaiting embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct TextRecord {
    pub docid: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BadLinePolicy {
    #[default]
    FailFast,
    /// Log, count and skip malformed lines. Dimension drift is still fatal.
    Skip,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReadOptions {
    /// `Some(true)` forces gzip decoding, `Some(false)` forces plain text,
    /// `None` sniffs the magic bytes.
    pub gzip: Option<bool>,
    pub on_bad_line: BadLinePolicy,
    /// Required dimension; otherwise the first record fixes it.
    pub dimension: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadStats {
    pub lines: u64,
    pub records: u64,
    pub bad_lines: u64,
}

/// Wraps `source` in a buffered reader, decompressing gzip when asked or detected.
pub fn open_stream<'a, R: Read + 'a>(source: R, gzip: Option<bool>) -> io::Result<Box<dyn BufRead + 'a>> {
    let mut buffered = BufReader::with_capacity(1 << 16, source);
    let compressed = match gzip {
        Some(flag) => flag,
        None => buffered.fill_buf()?.starts_with(&GZIP_MAGIC),
    };
    Ok(if compressed {
        Box::new(BufReader::with_capacity(1 << 16, MultiGzDecoder::new(buffered)))
    } else {
        Box::new(buffered)
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Identifier {
    Text(String),
    Number(u64),
}

impl Identifier {
    fn into_string(self) -> String {
        match self {
            Identifier::Text(s) => s,
            Identifier::Number(n) => n.to_string(),
        }
    }
}

#[derive(Deserialize)]
struct RawVectorRecord<'a> {
    #[serde(alias = "id", alias = "qid")]
    docid: Identifier,
    #[serde(borrow)]
    vector: &'a RawValue,
    #[serde(default)]
    text: Option<String>,
}

#[derive(Deserialize)]
struct RawTextRecord {
    #[serde(alias = "id", alias = "qid")]
    docid: Identifier,
    #[serde(alias = "contents")]
    text: String,
}

/// Parses a JSON array of numbers into `f32`s, rounding each decimal directly.
pub(crate) fn parse_vector(raw: &str) -> std::result::Result<Vec<f32>, String> {
    let inner = raw
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| "`vector` is not an array".to_string())?;
    if inner.trim().is_empty() {
        return Err("`vector` is empty".into());
    }
    inner
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            if !tok.starts_with(|c: char| c == '-' || c.is_ascii_digit()) {
                return Err(format!("`vector` element `{tok}` is not a number"));
            }
            let v: f32 = tok.parse().map_err(|_| format!("`vector` element `{tok}` is not a number"))?;
            if !v.is_finite() {
                return Err(format!("`vector` element `{tok}` is outside the f32 range"));
            }
            Ok(v)
        })
        .collect()
}

fn check_docid(docid: &str) -> std::result::Result<(), String> {
    if docid.is_empty() {
        Err("empty docid".into())
    } else {
        Ok(())
    }
}

/// Line splitter shared by the record readers.
struct Lines<R> {
    source: R,
    buf: String,
    line: u64,
}

impl<R: BufRead> Lines<R> {
    /// Advances to the next non-blank line; `Ok(false)` at end of input.
    fn advance(&mut self) -> io::Result<bool> {
        loop {
            self.buf.clear();
            if self.source.read_line(&mut self.buf)? == 0 {
                return Ok(false);
            }
            self.line += 1;
            if !self.buf.trim().is_empty() {
                return Ok(true);
            }
        }
    }
}

/// Streaming reader of vector records; yields records in file order.
pub struct CorpusReader<R> {
    lines: Lines<R>,
    opts: ReadOptions,
    dimension: Option<usize>,
    stats: ReadStats,
    failed: bool,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(source: R, opts: ReadOptions) -> Self {
        CorpusReader {
            lines: Lines { source, buf: String::new(), line: 0 },
            dimension: opts.dimension,
            opts,
            stats: ReadStats::default(),
            failed: false,
        }
    }

    /// Corpus dimension, once known.
    pub fn dimension(&self) -> Option<usize> {
        self.dimension
    }

    pub fn stats(&self) -> ReadStats {
        ReadStats { lines: self.lines.line, ..self.stats }
    }

    fn parse_current(&self) -> std::result::Result<CorpusRecord, String> {
        let raw: RawVectorRecord<'_> = serde_json::from_str(&self.lines.buf).map_err(|e| e.to_string())?;
        let docid = raw.docid.into_string();
        check_docid(&docid)?;
        let vector = parse_vector(raw.vector.get())?;
        Ok(CorpusRecord { docid, vector, text: raw.text })
    }

    fn next_record(&mut self) -> Result<Option<CorpusRecord>> {
        loop {
            if !self.lines.advance()? {
                return Ok(None);
            }
            let line = self.lines.line;
            match self.parse_current() {
                Ok(record) => {
                    let found = record.vector.len();
                    match self.dimension {
                        Some(expected) if expected != found => {
                            return Err(Error::DimensionDrift { line, expected, found })
                        }
                        Some(_) => {}
                        None => self.dimension = Some(found),
                    }
                    self.stats.records += 1;
                    return Ok(Some(record));
                }
                Err(message) => match self.opts.on_bad_line {
                    BadLinePolicy::FailFast => return Err(Error::parse(line, message)),
                    BadLinePolicy::Skip => {
                        log::warn!("skipping line {line}: {message}");
                        self.stats.bad_lines += 1;
                    }
                },
            }
        }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<CorpusRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.next_record() {
            Ok(record) => record.map(Ok),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

pub fn read_corpus<'a, R: Read + 'a>(source: R, opts: ReadOptions) -> Result<CorpusReader<Box<dyn BufRead + 'a>>> {
    Ok(CorpusReader::new(open_stream(source, opts.gzip)?, opts))
}

pub fn open_corpus(path: impl AsRef<Path>, opts: ReadOptions) -> Result<CorpusReader<Box<dyn BufRead>>> {
    read_corpus(File::open(path)?, opts)
}

/// Loads a whole vector file as embeddings.
pub fn load_embeddings(path: impl AsRef<Path>, opts: ReadOptions) -> Result<(usize, Vec<Embedding<f32>>)> {
    let mut reader = open_corpus(path, opts)?;
    let mut out = Vec::new();
    for record in reader.by_ref() {
        out.push(record?.into_embedding()?);
    }
    let dim = reader.dimension().ok_or_else(|| Error::invalid("vector file has no records"))?;
    Ok((dim, out))
}

/// Streaming reader of `(docid, text)` records for embedding jobs.
pub struct TextReader<R> {
    lines: Lines<R>,
    on_bad_line: BadLinePolicy,
    bad_lines: u64,
    failed: bool,
}

impl<R: BufRead> TextReader<R> {
    pub fn new(source: R, on_bad_line: BadLinePolicy) -> Self {
        TextReader { lines: Lines { source, buf: String::new(), line: 0 }, on_bad_line, bad_lines: 0, failed: false }
    }

    pub fn bad_lines(&self) -> u64 {
        self.bad_lines
    }

    fn next_record(&mut self) -> Result<Option<TextRecord>> {
        loop {
            if !self.lines.advance()? {
                return Ok(None);
            }
            let parsed = serde_json::from_str::<RawTextRecord>(&self.lines.buf)
                .map_err(|e| e.to_string())
                .and_then(|raw| {
                    let docid = raw.docid.into_string();
                    check_docid(&docid)?;
                    Ok(TextRecord { docid, text: raw.text })
                });
            match (parsed, self.on_bad_line) {
                (Ok(record), _) => return Ok(Some(record)),
                (Err(message), BadLinePolicy::FailFast) => return Err(Error::parse(self.lines.line, message)),
                (Err(message), BadLinePolicy::Skip) => {
                    log::warn!("skipping line {}: {message}", self.lines.line);
                    self.bad_lines += 1;
                }
            }
        }
    }
}

impl<R: BufRead> Iterator for TextReader<R> {
    type Item = Result<TextRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.next_record() {
            Ok(record) => record.map(Ok),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

pub fn open_texts(path: impl AsRef<Path>, gzip: Option<bool>, on_bad_line: BadLinePolicy) -> Result<TextReader<Box<dyn BufRead>>> {
    Ok(TextReader::new(open_stream(File::open(path)?, gzip)?, on_bad_line))
}

#[derive(Serialize)]
struct OutRecord<'a> {
    docid: &'a str,
    vector: &'a [f32],
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<&'a str>,
}

enum Sink<W: Write> {
    Plain(BufWriter<W>),
    Gzip(GzEncoder<BufWriter<W>>),
}

/// Streaming writer; call [`CorpusWriter::finish`] to flush and close the gzip stream.
pub struct CorpusWriter<W: Write> {
    sink: Sink<W>,
    dimension: Option<usize>,
    count: u64,
    line: Vec<u8>,
}

impl<W: Write> CorpusWriter<W> {
    pub fn new(sink: W, gzip: bool) -> Self {
        let buffered = BufWriter::with_capacity(1 << 16, sink);
        let sink = if gzip {
            Sink::Gzip(GzEncoder::new(buffered, Compression::default()))
        } else {
            Sink::Plain(buffered)
        };
        CorpusWriter { sink, dimension: None, count: 0, line: Vec::new() }
    }

    pub fn write(&mut self, record: &CorpusRecord) -> Result<()> {
        match self.dimension {
            Some(d) if d != record.vector.len() => {
                return Err(Error::DimensionMismatch { expected: d, found: record.vector.len() })
            }
            Some(_) => {}
            None => self.dimension = Some(record.vector.len()),
        }
        if record.vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("record `{}` has a non-finite component", record.docid)));
        }
        self.line.clear();
        let out = OutRecord { docid: &record.docid, vector: &record.vector, text: record.text.as_deref() };
        serde_json::to_writer(&mut self.line, &out).map_err(io::Error::from)?;
        self.line.push(b'\n');
        match &mut self.sink {
            Sink::Plain(w) => w.write_all(&self.line)?,
            Sink::Gzip(w) => w.write_all(&self.line)?,
        }
        self.count += 1;
        Ok(())
    }

    /// Flushes after a record so a crash loses at most the record in flight.
    pub fn flush(&mut self) -> Result<()> {
        match &mut self.sink {
            Sink::Plain(w) => w.flush()?,
            Sink::Gzip(w) => w.flush()?,
        }
        Ok(())
    }

    pub fn finish(self) -> Result<u64> {
        match self.sink {
            Sink::Plain(mut w) => w.flush()?,
            Sink::Gzip(w) => w.finish()?.flush()?,
        }
        Ok(self.count)
    }
}

/// Writes all records, returning how many were written.
pub fn write_corpus<W, I>(records: I, sink: W, gzip: bool) -> Result<u64>
where
    W: Write,
    I: IntoIterator<Item = CorpusRecord>,
{
    let mut writer = CorpusWriter::new(sink, gzip);
    for record in records {
        writer.write(&record)?;
    }
    writer.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn read_all(bytes: &[u8], opts: ReadOptions) -> Result<Vec<CorpusRecord>> {
        read_corpus(bytes, opts)?.collect()
    }

    #[test]
    fn two_records_same_dimension() {
        let data = b"{\"docid\":\"a\",\"vector\":[1,2,3,4]}\n{\"docid\":\"b\",\"vector\":[0.5,0,0,-1],\"extra\":7}\n";
        let records = read_all(data, ReadOptions::default()).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[1].docid, "b");
        assert_eq!(records[1].vector, vec![0.5, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn dimension_drift_names_line_and_dims() {
        let data = b"{\"docid\":\"a\",\"vector\":[1,2,3,4]}\n{\"docid\":\"b\",\"vector\":[1,2,3,4,5]}\n";
        let err = read_all(data, ReadOptions { on_bad_line: BadLinePolicy::Skip, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::DimensionDrift { line: 2, expected: 4, found: 5 }), "{err:?}");
    }

    #[test]
    fn malformed_lines_fail_fast_or_skip() {
        let data = b"{\"docid\":\"a\",\"vector\":[1]}\nnot json\n{\"docid\":\"c\",\"vector\":[NaN]}\n{\"docid\":\"d\",\"vector\":[\"x\"]}\n{\"docid\":\"e\",\"vector\":[2]}\n";
        let err = read_all(data, ReadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");

        let mut reader =
            read_corpus(&data[..], ReadOptions { on_bad_line: BadLinePolicy::Skip, ..Default::default() }).unwrap();
        let ids: Vec<String> = reader.by_ref().map(|r| r.unwrap().docid).collect();
        assert_eq!(ids, ["a", "e"]);
        assert_eq!(reader.stats(), ReadStats { lines: 5, records: 2, bad_lines: 3 });
    }

    #[test]
    fn rejects_out_of_range_and_empty_vectors() {
        assert!(parse_vector("[1e39]").is_err());
        assert!(parse_vector("[]").is_err());
        assert!(parse_vector("[[1]]").is_err());
        assert!(parse_vector("[Infinity]").is_err());
        assert_eq!(parse_vector("[ -0.0 , 1E2 ]").unwrap(), vec![-0.0, 100.0]);
    }

    #[test]
    fn accepts_numeric_and_aliased_ids() {
        let data = b"{\"qid\":1048585,\"vector\":[1]}\n{\"id\":\"x\",\"vector\":[1]}\n";
        let ids: Vec<_> = read_all(data, ReadOptions::default()).unwrap().into_iter().map(|r| r.docid).collect();
        assert_eq!(ids, ["1048585", "x"]);
    }

    #[test]
    fn empty_stream_writes_nothing() {
        let mut plain = Vec::new();
        assert_eq!(write_corpus(Vec::new(), &mut plain, false).unwrap(), 0);
        assert!(plain.is_empty());
        let mut gz = Vec::new();
        assert_eq!(write_corpus(Vec::new(), &mut gz, true).unwrap(), 0);
        assert!(gz.starts_with(&GZIP_MAGIC));
        assert!(read_all(&gz, ReadOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn point_one_round_trips() {
        let mut buf = Vec::new();
        write_corpus(vec![CorpusRecord::new("a", vec![0.1])], &mut buf, false).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "{\"docid\":\"a\",\"vector\":[0.1]}\n");
        let back = read_all(&buf, ReadOptions::default()).unwrap();
        assert_eq!(back[0].vector[0].to_bits(), 0.1f32.to_bits());
    }

    #[test]
    fn gzip_flag_overrides_sniffing() {
        let mut gz = Vec::new();
        write_corpus(vec![CorpusRecord::new("a", vec![1.0])], &mut gz, true).unwrap();
        assert!(read_all(&gz, ReadOptions { gzip: Some(false), ..Default::default() }).is_err());
        assert_eq!(read_all(&gz, ReadOptions { gzip: Some(true), ..Default::default() }).unwrap().len(), 1);
    }

    #[test]
    fn text_records() {
        let data = b"{\"docid\":\"a\",\"text\":\"hello world\"}\n{\"id\":7,\"contents\":\"x\"}\n";
        let recs: Vec<_> = TextReader::new(&data[..], BadLinePolicy::FailFast).map(|r| r.unwrap()).collect();
        assert_eq!(recs[1], TextRecord { docid: "7".into(), text: "x".into() });
    }

    fn finite_f32() -> impl Strategy<Value = f32> {
        any::<u32>().prop_map(f32::from_bits).prop_filter("finite", |v| v.is_finite())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_is_bitwise(
            vectors in prop::collection::vec(prop::collection::vec(finite_f32(), 5), 1..50),
            gzip in any::<bool>(),
        ) {
            let records: Vec<CorpusRecord> = vectors
                .into_iter()
                .enumerate()
                .map(|(i, v)| CorpusRecord { docid: format!("d{i}"), vector: v, text: (i % 3 == 0).then(|| format!("t \"{i}\"")) })
                .collect();
            let mut buf = Vec::new();
            write_corpus(records.clone(), &mut buf, gzip).unwrap();
            let back = read_all(&buf, ReadOptions::default()).unwrap();
            prop_assert_eq!(back.len(), records.len());
            for (a, b) in back.iter().zip(&records) {
                prop_assert_eq!(&a.docid, &b.docid);
                prop_assert_eq!(&a.text, &b.text);
                let abits: Vec<u32> = a.vector.iter().map(|v| v.to_bits()).collect();
                let bbits: Vec<u32> = b.vector.iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(abits, bbits);
            }
        }
    }
}
