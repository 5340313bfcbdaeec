//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! nonzero if any criterion fails. Run with `cargo test --test acceptance`.

mod common;

use std::alloc::{GlobalAlloc, Layout, System};
use std::collections::{HashSet, VecDeque};
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{brute_force_top_k, recall, reference, synthetic, unit_vectors};
use densekit::embed::{Clock, EmbedConfig, EmbedJob, HttpTransport, ManualClock, MockTransport, RetryPolicy};
use densekit::eval::{average_precision, evaluate, ndcg_at_k, parse_qrels, parse_run, write_run, Qrels, Run};
use densekit::ingest::{
    load_embeddings, open_corpus, read_corpus, write_corpus, CorpusRecord, CorpusWriter, ReadOptions, TextRecord,
};
use densekit::{hnsw, Embedding, Error, FlatIndex, HnswIndex, HnswParams, SearchParams};
use parking_lot::Mutex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tracks live and peak heap bytes so streaming phases can be bounded.
struct Counting;

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let live = LIVE.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(live, Ordering::Relaxed);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        LIVE.fetch_sub(layout.size(), Ordering::Relaxed);
    }
}

#[global_allocator]
static ALLOCATOR: Counting = Counting;

/// Runs `f` and returns how far the heap grew above its starting level.
fn peak_growth<T>(f: impl FnOnce() -> T) -> (T, usize) {
    let base = LIVE.load(Ordering::SeqCst);
    PEAK.store(base, Ordering::SeqCst);
    let out = f();
    (out, PEAK.load(Ordering::SeqCst).saturating_sub(base))
}

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn ids_of(hits: &[densekit::ScoredDoc]) -> Vec<String> {
    hits.iter().map(|h| h.doc_id.clone()).collect()
}

fn mean_recall(index: &HnswIndex, queries: &[Embedding], truth: &[Vec<String>], k: usize, ef: usize) -> f64 {
    let sp = SearchParams::new(k, ef).unwrap();
    let total: f64 = queries
        .iter()
        .zip(truth)
        .map(|(q, t)| recall(&ids_of(&index.search(&q.values, &sp).unwrap()), t))
        .sum();
    total / queries.len() as f64
}

// 1 and 2 share one index.
fn recall_criteria() -> (Outcome, Outcome) {
    let started = Instant::now();
    let corpus = unit_vectors(50_000, 64, 1, "d");
    let queries = unit_vectors(100, 64, 2, "q");
    let flat = FlatIndex::from_embeddings(64, corpus.clone()).unwrap();
    let truth: Vec<Vec<String>> = queries.iter().map(|q| ids_of(&flat.search(&q.values, 10).unwrap())).collect();
    let params = HnswParams::new(16, 100).unwrap().with_seed(42);
    let build_started = Instant::now();
    let index = hnsw::build(params, 64, corpus, threads()).unwrap();
    let build_secs = build_started.elapsed().as_secs_f64();
    let r1000 = mean_recall(&index, &queries, &truth, 10, 1000);
    let elapsed = started.elapsed();
    let first = check(
        r1000 >= 0.99 && elapsed < Duration::from_secs(300),
        format!(
            "recall@10 = {r1000:.4} (>= 0.99), total {:.1}s (< 300s; build {build_secs:.1}s on {} threads)",
            elapsed.as_secs_f64(),
            threads()
        ),
    );
    let sweep: Vec<f64> = [10, 100, 1000].iter().map(|&ef| mean_recall(&index, &queries, &truth, 10, ef)).collect();
    let second = check(
        sweep.windows(2).all(|w| w[0] <= w[1]),
        format!("recall@10 at ef 10/100/1000 = {:.4} / {:.4} / {:.4}", sweep[0], sweep[1], sweep[2]),
    );
    (first, second)
}

fn criterion_3() -> Outcome {
    let corpus = unit_vectors(1000, 64, 3, "d");
    let queries = unit_vectors(100, 64, 4, "q");
    let flat = FlatIndex::from_embeddings(64, corpus.clone()).unwrap();
    let index = hnsw::build(HnswParams::new(16, 100).unwrap().with_seed(3), 64, corpus.clone(), 1).unwrap();
    let sp = SearchParams::new(1, 1000).unwrap();
    let mut agree = 0;
    for q in &queries {
        let exact = flat.search(&q.values, 1).unwrap();
        let approx = index.search(&q.values, &sp).unwrap();
        // cross-check the engine's flat search against an independent f64 sort
        assert_eq!(exact[0].doc_id, brute_force_top_k(&corpus, &q.values, 1)[0].0);
        agree += usize::from(exact[0].doc_id == approx[0].doc_id);
    }
    check(agree >= 99, format!("top-1 agreement {agree}/100 (>= 99)"))
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut scored = 0;
    for threshold in [1, 2] {
        let (qrels, run) = synthetic(500, 100 + threshold as u64);
        let report = evaluate(&run, &qrels, threshold).unwrap();
        for (qid, judged) in &qrels.judgments {
            let ranking = run.rankings.get(qid).map(|h| ids_of(h)).unwrap_or_default();
            let r = reference::score(&ranking, judged, threshold);
            let got = report.per_query[qid];
            for (a, b) in [(got.rr_at_10, r.rr10), (got.ap, r.ap), (got.ndcg_at_10, r.ndcg10), (got.r_at_1k, r.r1k)] {
                worst = worst.max((a - b).abs());
            }
            scored += 1;
        }
    }
    let relevant: HashSet<&str> = ["d1", "d3"].into_iter().collect();
    let ap = average_precision(&["d1", "d2", "d3"], &relevant, 1000);
    let grades = [("d9", 3u32)].into_iter().collect();
    let ndcg = ndcg_at_k(&["d0", "d9"], &grades, 10);
    let ap_ok = (ap - 5.0 / 6.0).abs() < 1e-15;
    let ndcg_ok = (ndcg - 1.0 / 3f64.log2()).abs() < 1e-15;
    check(
        worst <= 1e-9 && ap_ok && ndcg_ok && scored == 1000,
        format!("{scored} queries, max deviation {worst:.1e} (<= 1e-9); AP fixture {ap:.6}, nDCG fixture {ndcg:.6}"),
    )
}

fn run_bytes(index: &HnswIndex, queries: &[Embedding], sp: &SearchParams) -> Vec<u8> {
    let mut run = Run::new("det");
    for q in queries {
        run.insert(q.id.clone(), index.search(&q.values, sp).unwrap());
    }
    let mut out = Vec::new();
    write_run(&run, &mut out).unwrap();
    out
}

fn criterion_5() -> Outcome {
    let corpus = unit_vectors(3000, 32, 5, "d");
    let queries = unit_vectors(50, 32, 6, "q");
    let params = HnswParams::new(12, 80).unwrap().with_seed(77);
    let image = |threads| {
        let mut bytes = Vec::new();
        hnsw::build(params, 32, corpus.clone(), threads).unwrap().save(&mut bytes).unwrap();
        bytes
    };
    let (a, b) = (image(1), image(1));
    let sp = SearchParams::new(100, 200).unwrap();
    let serial = HnswIndex::load(&a[..]).unwrap();
    let parallel = hnsw::build(params, 32, corpus.clone(), threads()).unwrap();
    let runs_equal = run_bytes(&serial, &queries, &sp) == run_bytes(&serial, &queries, &sp)
        && run_bytes(&parallel, &queries, &sp) == run_bytes(&parallel, &queries, &sp);
    check(
        a == b && runs_equal,
        format!("images {} bytes, identical: {}; repeated run files identical: {runs_equal}", a.len(), a == b),
    )
}

fn criterion_6() -> Outcome {
    let corpus = unit_vectors(10_000, 48, 7, "d");
    let queries = unit_vectors(50, 48, 8, "q");
    let index = hnsw::build(HnswParams::new(16, 100).unwrap().with_seed(8), 48, corpus, threads()).unwrap();
    let mut bytes = Vec::new();
    index.save(&mut bytes).unwrap();
    let loaded = HnswIndex::load(&bytes[..]).unwrap();
    let sp = SearchParams::new(100, 200).unwrap();
    let same = queries.iter().all(|q| {
        let (x, y) = (index.search(&q.values, &sp).unwrap(), loaded.search(&q.values, &sp).unwrap());
        x.len() == y.len()
            && x.iter().zip(&y).all(|(a, b)| a.doc_id == b.doc_id && a.score.to_bits() == b.score.to_bits())
    });
    let truncated = HnswIndex::<f32>::load(&bytes[..bytes.len() - 1]);
    let structured = matches!(truncated, Err(Error::CorruptIndex { .. }));
    let detail = match &truncated {
        Err(e) => e.to_string(),
        Ok(_) => "loaded".into(),
    };
    check(same && structured, format!("50 queries identical after reload: {same}; 1-byte truncation -> {detail}"))
}

/// Record `i` of the synthetic stream; regenerated rather than stored.
fn record(i: usize, dim: usize) -> CorpusRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
    let vector = (0..dim)
        .map(|j| match (i + j) % 13 {
            0 => f32::MIN_POSITIVE * rng.random::<f32>(),
            1 => rng.random_range(-1e30f32..1e30),
            _ => rng.random_range(-1.0f32..1.0),
        })
        .collect();
    CorpusRecord::new(format!("doc{i}"), vector)
}

fn criterion_7() -> Outcome {
    const N: usize = 100_000;
    const DIM: usize = 64;
    // well under the ~25 MB the vectors alone would need if held in memory
    const BOUND: usize = 4 << 20;
    let dir = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    for gzip in [false, true] {
        let path = dir.path().join(if gzip { "c.jsonl.gz" } else { "c.jsonl" });
        let (written, write_peak) = peak_growth(|| {
            write_corpus((0..N).map(|i| record(i, DIM)), std::fs::File::create(&path).unwrap(), gzip).unwrap()
        });
        let ((count, equal), read_peak) = peak_growth(|| {
            let reader = open_corpus(&path, ReadOptions::default()).unwrap();
            let mut count = 0;
            let mut equal = true;
            for (i, rec) in reader.enumerate() {
                let rec = rec.unwrap();
                let expected = record(i, DIM);
                equal &= rec.docid == expected.docid
                    && rec.vector.iter().map(|x| x.to_bits()).eq(expected.vector.iter().map(|x| x.to_bits()));
                count += 1;
            }
            (count, equal)
        });
        let size = std::fs::metadata(&path).unwrap().len();
        ok &= written == N as u64 && count == N && equal && write_peak < BOUND && read_peak < BOUND;
        notes.push(format!(
            "gzip={gzip}: {count} records, bitwise equal {equal}, {:.1} MB file, peak heap +{} KB write / +{} KB read",
            size as f64 / 1e6,
            write_peak / 1024,
            read_peak / 1024
        ));
    }
    check(ok, format!("{} (bound {} KB)", notes.join("; "), BOUND / 1024))
}

/// Local OpenAI-style stub. Records the clock reading at each request,
/// answers from `script` first and then with a unit vector.
struct Stub {
    url: String,
    arrivals: Arc<Mutex<Vec<Duration>>>,
    calls: Arc<AtomicUsize>,
}

fn stub(clock: Arc<ManualClock>, script: Vec<u16>, stop_after: Option<(usize, Arc<AtomicBool>)>) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let arrivals = Arc::new(Mutex::new(Vec::new()));
    let calls = Arc::new(AtomicUsize::new(0));
    let (log, counter) = (arrivals.clone(), calls.clone());
    let script = Arc::new(Mutex::new(VecDeque::from(script)));
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let mut stream = stream.unwrap();
            let (clock, log, counter, script, stop) =
                (clock.clone(), log.clone(), counter.clone(), script.clone(), stop_after.clone());
            std::thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut length = 0usize;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap() == 0 {
                        return;
                    }
                    if line.trim().is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        length = v.trim().parse().unwrap();
                    }
                }
                let mut body = vec![0u8; length];
                reader.read_exact(&mut body).unwrap();
                log.lock().push(clock.now());
                let n = counter.fetch_add(1, Ordering::SeqCst) + 1;
                if let Some((after, flag)) = &stop {
                    if n >= *after {
                        flag.store(true, Ordering::SeqCst);
                    }
                }
                let status = script.lock().pop_front().unwrap_or(200);
                let payload = if status == 200 {
                    "{\"data\":[{\"embedding\":[0.6,0.8]}]}".to_string()
                } else {
                    "{\"error\":{}}".to_string()
                };
                let response = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                    payload.len()
                );
                let _ = stream.write_all(response.as_bytes());
            });
        }
    });
    Stub { url, arrivals, calls }
}

fn texts(n: usize) -> Vec<TextRecord> {
    (0..n).map(|i| TextRecord { docid: format!("t{i}"), text: format!("text number {i}") }).collect()
}

fn config(url: &str, parallel: usize) -> EmbedConfig {
    EmbedConfig {
        endpoint_url: url.into(),
        api_key: "test".into(),
        dimension: 2,
        max_parallel: parallel,
        retry: RetryPolicy { base_backoff: Duration::from_millis(10), ..RetryPolicy::default() },
        ..EmbedConfig::default()
    }
}

fn max_in_window(times: &[Duration], window: Duration) -> usize {
    let mut sorted = times.to_vec();
    sorted.sort();
    let mut best = 0;
    let mut lo = 0;
    for hi in 0..sorted.len() {
        while sorted[hi] >= sorted[lo] + window {
            lo += 1;
        }
        best = best.max(hi - lo + 1);
    }
    best
}

fn criterion_8() -> Outcome {
    // (a) virtual time; one worker so the stub's clock readings follow grant order
    let clock = Arc::new(ManualClock::new());
    let server = stub(clock.clone(), Vec::new(), None);
    let cfg = config(&server.url, 1);
    let transport = HttpTransport::new(&server.url, "test", Duration::from_secs(10));
    let out = EmbedJob::new(&cfg, &transport).clock(clock.clone()).run(&texts(8000)).unwrap();
    let busiest = max_in_window(&server.arrivals.lock(), Duration::from_secs(60));
    let a = out.report.succeeded == 8000 && busiest <= 3500;

    // (b)
    let server = stub(Arc::new(ManualClock::new()), vec![429, 429], None);
    let cfg = config(&server.url, 4);
    let transport = HttpTransport::new(&server.url, "test", Duration::from_secs(10));
    let out = EmbedJob::new(&cfg, &transport).run(&texts(1)).unwrap();
    let retries = out.report.retries_performed;
    let b = retries == 2 && out.report.succeeded == 1 && server.calls.load(Ordering::SeqCst) == 3;

    // (c)
    let dir = tempfile::tempdir().unwrap();
    let checkpoint = dir.path().join("ckpt.jsonl");
    let stop = Arc::new(AtomicBool::new(false));
    let server = stub(Arc::new(ManualClock::new()), Vec::new(), Some((50, stop.clone())));
    let cfg = config(&server.url, 1);
    let transport = HttpTransport::new(&server.url, "test", Duration::from_secs(10));
    let first = EmbedJob::new(&cfg, &transport).checkpoint(&checkpoint).cancel_flag(&stop).run(&texts(100));
    let interrupted = matches!(first, Err(Error::Interrupted)) && server.calls.load(Ordering::SeqCst) == 50;
    let server = stub(Arc::new(ManualClock::new()), Vec::new(), None);
    let cfg = config(&server.url, 4);
    let transport = HttpTransport::new(&server.url, "test", Duration::from_secs(10));
    let resumed = EmbedJob::new(&cfg, &transport).checkpoint(&checkpoint).run(&texts(100)).unwrap();
    let further = server.calls.load(Ordering::SeqCst);
    let c = interrupted && further == 50 && resumed.report.succeeded == 100;

    check(
        a && b && c,
        format!(
            "(a) busiest 60s window {busiest} calls of 8000 (<= 3500); (b) {retries} retries; (c) interrupted at 50, resume issued {further} calls"
        ),
    )
}

const VOCAB: &[&str] = &[
    "vector", "graph", "search", "index", "query", "passage", "neighbor", "layer", "embedding", "rank", "recall",
    "dense", "sparse", "model", "token", "corpus", "retrieval", "score", "metric", "judgment", "relevance", "batch",
    "latency", "memory", "thread", "cluster", "entry", "level", "greedy", "beam", "cosine", "product", "encoder",
    "document", "answer", "question", "ocean", "river", "mountain", "forest", "city", "music", "history", "science",
];

fn criterion_9() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let docs: Vec<TextRecord> = (0..5000)
        .map(|i| {
            let words: Vec<&str> = (0..rng.random_range(4..12)).map(|_| VOCAB[rng.random_range(0..VOCAB.len())]).collect();
            TextRecord { docid: format!("D{i}"), text: words.join(" ") }
        })
        .collect();
    let picks: Vec<usize> = (0..100).map(|_| rng.random_range(0..docs.len())).collect();
    let queries: Vec<TextRecord> =
        picks.iter().enumerate().map(|(q, &d)| TextRecord { docid: format!("Q{q}"), text: docs[d].text.clone() }).collect();

    let cfg = EmbedConfig { dimension: 64, ..EmbedConfig::default() };
    let transport = MockTransport { dimension: 64, seed: 0 };
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("corpus.jsonl.gz");
    let embedded = EmbedJob::new(&cfg, &transport).unlimited().run(&docs).unwrap();
    let mut writer = CorpusWriter::new(std::fs::File::create(&corpus_path).unwrap(), true);
    for e in &embedded.embeddings {
        writer.write(&CorpusRecord::new(e.id.clone(), e.values.clone())).unwrap();
    }
    writer.finish().unwrap();
    let query_vectors = EmbedJob::new(&cfg, &transport).unlimited().run(&queries).unwrap().embeddings;

    let (dim, corpus) = load_embeddings(&corpus_path, ReadOptions::default()).unwrap();
    let index = hnsw::build(HnswParams::new(16, 100).unwrap().with_seed(9), dim, corpus, threads()).unwrap();
    let mut image = Vec::new();
    index.save(&mut image).unwrap();
    let index = HnswIndex::load(&image[..]).unwrap();

    let sp = SearchParams::new(1000, 1000).unwrap();
    let mut run = Run::new("mock");
    for q in &query_vectors {
        run.insert(q.id.clone(), index.search(&q.values, &sp).unwrap());
    }
    let mut run_file = Vec::new();
    write_run(&run, &mut run_file).unwrap();
    let qrels_file: String = picks.iter().enumerate().map(|(q, d)| format!("Q{q} 0 D{d} 1\n")).collect();
    let run = parse_run(&run_file[..]).unwrap().value;
    let qrels: Qrels = parse_qrels(qrels_file.as_bytes()).unwrap().value;
    let report = evaluate(&run, &qrels, 1).unwrap();
    let elapsed = started.elapsed();
    check(
        report.mean.rr_at_10 >= 0.95 && elapsed < Duration::from_secs(180),
        format!(
            "RR@10 = {:.4} (>= 0.95), R@1k = {:.4}, {} queries, {:.1}s (< 180s)",
            report.mean.rr_at_10,
            report.mean.r_at_1k,
            report.per_query.len(),
            elapsed.as_secs_f64()
        ),
    )
}

/// Optional full-scale reproduction against published embeddings.
fn criterion_10() -> Outcome {
    let var = |name: &str| std::env::var(name).ok();
    let (Some(corpus), Some(queries), Some(qrels)) =
        (var("DENSEKIT_FULL_CORPUS"), var("DENSEKIT_FULL_QUERIES"), var("DENSEKIT_FULL_QRELS"))
    else {
        return Outcome::Skip(
            "set DENSEKIT_FULL_CORPUS, DENSEKIT_FULL_QUERIES and DENSEKIT_FULL_QRELS to run the full-scale check".into(),
        );
    };
    let (dim, docs) = load_embeddings(&corpus, ReadOptions::default()).unwrap();
    let index = hnsw::build(HnswParams::new(16, 100).unwrap().with_seed(0), dim, docs, threads()).unwrap();
    let queries: Vec<Embedding> = read_corpus(std::fs::File::open(&queries).unwrap(), ReadOptions::default())
        .unwrap()
        .map(|r| r.unwrap().into_embedding().unwrap())
        .collect();
    let sp = SearchParams::new(1000, 1000).unwrap();
    let mut run = Run::new("full");
    for q in &queries {
        run.insert(q.id.clone(), index.search(&q.values, &sp).unwrap());
    }
    let qrels = parse_qrels(BufReader::new(std::fs::File::open(&qrels).unwrap())).unwrap().value;
    let m = evaluate(&run, &qrels, 1).unwrap().mean;
    check(
        (m.rr_at_10 - 0.343).abs() <= 0.005 && (m.r_at_1k - 0.984).abs() <= 0.003,
        format!("RR@10 = {:.4} (0.343 +- 0.005), R@1k = {:.4} (0.984 +- 0.003)", m.rr_at_10, m.r_at_1k),
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(outcome) => outcome,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        }
    }
}

fn report(number: usize, title: &str, outcome: &Outcome, failures: &mut usize) {
    let (tag, detail) = match outcome {
        Outcome::Pass(d) => ("PASS", d),
        Outcome::Fail(d) => {
            *failures += 1;
            ("FAIL", d)
        }
        Outcome::Skip(d) => ("SKIP", d),
    };
    println!("criterion {number:>2} {tag} {title}: {detail}");
    let _ = std::io::stdout().flush();
}

fn main() {
    // quiet default panic output; failures are reported per criterion
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    let (c1, c2) = match catch_unwind(recall_criteria) {
        Ok(pair) => pair,
        Err(_) => (Outcome::Fail("panicked".into()), Outcome::Fail("panicked".into())),
    };
    report(1, "HNSW recall vs exact search", &c1, &mut failures);
    report(2, "recall monotone in ef_search", &c2, &mut failures);
    type Criterion = (usize, &'static str, fn() -> Outcome);
    let rest: [Criterion; 8] = [
        (3, "top-1 agreement at saturation", criterion_3),
        (4, "metrics match reference", criterion_4),
        (5, "determinism", criterion_5),
        (6, "image round-trip and truncation", criterion_6),
        (7, "ingestion round-trip", criterion_7),
        (8, "embedding client discipline", criterion_8),
        (9, "hermetic end-to-end pipeline", criterion_9),
        (10, "full-scale reproduction (optional)", criterion_10),
    ];
    for (number, title, f) in rest {
        report(number, title, &guarded(f), &mut failures);
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all required criteria passed");
}
