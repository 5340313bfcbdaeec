use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use densekit::bench::{run_bench, BenchSettings};
use densekit::embed::{EmbedConfig, EmbedJob, EmbeddingTransport, HttpTransport, MockTransport, RetryPolicy};
use densekit::eval::{evaluate as score_run, parse_qrels, parse_run, write_run, Run};
use densekit::ingest::{load_embeddings, open_texts, BadLinePolicy, CorpusRecord, CorpusWriter, ReadOptions};
use densekit::{hnsw, Embedding32, FlatIndex32, HnswIndex32, HnswParams, ScoredDoc32, SearchParams};

use crate::{BenchArgs, EmbedArgs, EvaluateArgs, IndexArgs, IndexSource, IndexType, SearchArgs, UsageError};

const API_KEY_VAR: &str = "OPENAI_API_KEY";

fn default_threads(requested: Option<usize>) -> Result<usize> {
    match requested {
        Some(0) => Err(UsageError("--threads must be at least 1".into()).into()),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn policy(skip: bool) -> BadLinePolicy {
    if skip {
        BadLinePolicy::Skip
    } else {
        BadLinePolicy::FailFast
    }
}

fn gzip_override(gz: bool) -> Option<bool> {
    gz.then_some(true)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = OsString::from(path.as_os_str());
    name.push(suffix);
    PathBuf::from(name)
}

fn api_key(key_file: Option<&Path>) -> Result<String> {
    let key = match key_file {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading key file {}", path.display()))?,
        None => std::env::var(API_KEY_VAR).unwrap_or_default(),
    };
    let key = key.trim().to_string();
    if key.is_empty() {
        return Err(UsageError(format!("no API key: set {API_KEY_VAR} or pass --api-key-file (or use --mock)")).into());
    }
    Ok(key)
}

pub fn embed(args: EmbedArgs) -> Result<()> {
    let cfg = EmbedConfig {
        endpoint_url: args.endpoint.clone(),
        api_key: String::new(),
        model_name: args.model.clone(),
        dimension: args.dim,
        max_input_tokens: args.max_tokens,
        rate_limit: args.rate_limit,
        max_parallel: args.parallel,
        retry: RetryPolicy { max_attempts: args.max_attempts, ..RetryPolicy::default() },
    };
    cfg.validate()?;
    let transport: Box<dyn EmbeddingTransport> = if args.mock {
        Box::new(MockTransport { dimension: args.dim, seed: args.seed })
    } else {
        let key = api_key(args.api_key_file.as_deref())?;
        Box::new(HttpTransport::new(&args.endpoint, key, std::time::Duration::from_secs(args.timeout)))
    };

    let texts = open_texts(&args.input, None, policy(args.skip_bad_lines))
        .with_context(|| format!("opening {}", args.input.display()))?
        .collect::<densekit::Result<Vec<_>>>()
        .with_context(|| format!("reading {}", args.input.display()))?;

    let partial = with_suffix(&args.output, ".partial");
    let mut job = EmbedJob::new(&cfg, transport.as_ref()).checkpoint(&partial);
    if args.mock {
        job = job.unlimited();
    }
    let output = job.run(&texts)?;
    println!("{}", output.report);

    if output.report.failed_permanently > 0 {
        for (id, reason) in &output.report.failures {
            eprintln!("failed: {id}: {reason}");
        }
        anyhow::bail!(
            "{} inputs failed; completed vectors are kept in {} and a rerun retries only the rest",
            output.report.failed_permanently,
            partial.display()
        );
    }

    // Rewrite in input order so the output does not depend on completion order.
    let staging = with_suffix(&args.output, ".tmp");
    let mut writer = CorpusWriter::new(File::create(&staging)?, args.gz);
    for e in output.embeddings {
        writer.write(&CorpusRecord::new(e.id, e.values))?;
    }
    writer.finish()?;
    fs::rename(&staging, &args.output)?;
    fs::remove_file(&partial)?;
    Ok(())
}

pub fn index(args: IndexArgs) -> Result<()> {
    let threads = default_threads(args.threads)?;
    let seed = args.seed.unwrap_or_else(rand::random);
    let params = HnswParams::new(args.m, args.ef_construction)?.with_seed(seed);

    let opts = ReadOptions {
        gzip: gzip_override(args.gz),
        on_bad_line: policy(args.skip_bad_lines),
        dimension: None,
    };
    let (dim, items) =
        load_embeddings(&args.input, opts).with_context(|| format!("reading {}", args.input.display()))?;

    let started = Instant::now();
    let index = hnsw::build(params, dim, items, threads)?;
    let build_secs = started.elapsed().as_secs_f64();
    let bytes = index
        .save_to_path(&args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;

    println!("nodes:            {}", index.len());
    println!("dimension:        {dim}");
    println!("max level:        {}", index.max_level().unwrap_or(0));
    println!("build time:       {build_secs:.3}s");
    println!("m:                {}", params.m);
    println!("m0:               {}", params.m0);
    println!("ef_construction:  {}", params.ef_construction);
    println!("seed:             {seed}");
    println!("threads:          {threads}");
    println!("image bytes:      {bytes}");
    Ok(())
}

enum Searcher {
    Hnsw(HnswIndex32, SearchParams),
    Flat(FlatIndex32, usize),
}

impl Searcher {
    fn open(source: &IndexSource) -> Result<Self> {
        let sp = SearchParams::new(source.k, source.ef_search)?;
        let path = &source.index;
        Ok(match source.index_type {
            IndexType::Hnsw => Searcher::Hnsw(
                HnswIndex32::load_from_path(path).with_context(|| format!("loading {}", path.display()))?,
                sp,
            ),
            IndexType::Flat => {
                let opts = ReadOptions { gzip: gzip_override(source.gz), ..ReadOptions::default() };
                let (dim, items) = load_embeddings(path, opts).with_context(|| format!("reading {}", path.display()))?;
                Searcher::Flat(FlatIndex32::from_embeddings(dim, items)?, sp.k)
            }
        })
    }

    fn search(&self, query: &[f32]) -> densekit::Result<Vec<ScoredDoc32>> {
        match self {
            Searcher::Hnsw(index, sp) => index.search(query, sp),
            Searcher::Flat(index, k) => index.search(query, *k),
        }
    }
}

fn load_queries(source: &IndexSource) -> Result<Vec<Embedding32>> {
    let opts = ReadOptions { gzip: gzip_override(source.gz), ..ReadOptions::default() };
    let (_, queries) =
        load_embeddings(&source.queries, opts).with_context(|| format!("reading {}", source.queries.display()))?;
    let mut seen = std::collections::HashSet::new();
    for q in &queries {
        if !seen.insert(q.id.as_str()) {
            return Err(densekit::Error::DuplicateId(q.id.clone())).context("query file");
        }
    }
    Ok(queries)
}

/// Answers every query, splitting them into contiguous chunks across threads.
fn search_all(searcher: &Searcher, queries: &[Embedding32], threads: usize) -> densekit::Result<Vec<Vec<ScoredDoc32>>> {
    let chunk = queries.len().div_ceil(threads).max(1);
    std::thread::scope(|scope| {
        let workers: Vec<_> = queries
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || part.iter().map(|q| searcher.search(&q.values)).collect::<densekit::Result<Vec<_>>>())
            })
            .collect();
        let mut out = Vec::with_capacity(queries.len());
        for w in workers {
            out.extend(w.join().expect("search worker panicked")?);
        }
        Ok(out)
    })
}

pub fn search(args: SearchArgs) -> Result<()> {
    let threads = default_threads(args.source.threads)?;
    let searcher = Searcher::open(&args.source)?;
    let queries = load_queries(&args.source)?;

    let started = Instant::now();
    let results = search_all(&searcher, &queries, threads)?;
    let secs = started.elapsed().as_secs_f64();

    let mut run = Run::new(args.tag);
    for (q, hits) in queries.iter().zip(results) {
        run.insert(q.id.clone(), hits);
    }
    let lines = match &args.output {
        Some(path) => {
            let mut sink = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            let n = write_run(&run, &mut sink)?;
            sink.flush()?;
            n
        }
        None => {
            let mut sink = BufWriter::new(io::stdout().lock());
            let n = write_run(&run, &mut sink)?;
            sink.flush()?;
            n
        }
    };
    log::info!("{} queries, {lines} run lines in {secs:.3}s", queries.len());
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let open = |p: &Path| -> Result<BufReader<File>> {
        Ok(BufReader::new(File::open(p).with_context(|| format!("opening {}", p.display()))?))
    };
    let qrels = parse_qrels(open(&args.qrels)?).with_context(|| format!("parsing {}", args.qrels.display()))?;
    let run = parse_run(open(&args.run)?).with_context(|| format!("parsing {}", args.run.display()))?;
    let report = score_run(&run.value, &qrels.value, args.rel_threshold)?;
    let json = report.to_json_lines();
    println!("{}", report.to_table());
    print!("{json}");
    if let Some(path) = &args.output {
        fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let threads = default_threads(args.source.threads)?;
    let searcher = Searcher::open(&args.source)?;
    let queries = load_queries(&args.source)?;
    let settings = BenchSettings {
        threads,
        trials: args.trials,
        warmup: args.warmup,
        k: args.source.k,
        ef_search: args.source.ef_search.max(args.source.k),
    };
    let report = run_bench(queries.len(), settings, |i| {
        std::hint::black_box(searcher.search(&queries[i].values)?);
        Ok(())
    })?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
