use std::fs;
use std::future::IntoFuture;
use std::io::BufReader;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use newslens_core::aggregate::{
    cooccurrence_counts, export_cooccurrence, export_topic_stats, topic_stats, CoverageIndex, SegmentationPoint,
};
use newslens_core::annotate::{AnnotatedCorpus, Gazetteer, Lexicon, LexiconAnnotator};
use newslens_core::corpus::{ingest, CorpusSnapshot, OutletSet, SplitterConfig};
use newslens_core::fixture::{generate, FixtureSpec};
use newslens_core::hive::{data_hive, layout, DEFAULT_CANDIDATES};
use newslens_core::store::SessionStore;
use newslens_server::{load_workbench, router, AppState, ServiceConfig};
use tracing::info;

#[derive(Parser)]
#[command(name = "newslens", version, about = "News coverage sentiment workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate line-record articles into a corpus snapshot.
    Ingest {
        /// Corpus file, or directory scanned recursively.
        #[arg(long)]
        corpus: PathBuf,
        /// Outlet list, one name per line. Defaults to the reference outlets.
        #[arg(long)]
        outlets: Option<PathBuf>,
        /// Extra abbreviations that never end a sentence, one per line.
        #[arg(long)]
        abbreviations: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Where to write rejected records as JSON lines.
        #[arg(long)]
        rejects: Option<PathBuf>,
    },
    /// Link entities and label their sentiment, or import annotations.
    Annotate {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, required_unless_present = "import", requires = "lexicon")]
        gazetteer: Option<PathBuf>,
        #[arg(long, requires = "gazetteer")]
        lexicon: Option<PathBuf>,
        /// Annotation line records produced elsewhere.
        #[arg(long, conflicts_with_all = ["gazetteer", "lexicon"])]
        import: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the annotation line records here.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Write topic statistics, co-occurrence and document sentiment exports.
    Aggregate {
        /// Annotated snapshot.
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        outlet: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the data hive and its layout for a center topic and outlet.
    Hive {
        #[arg(long)]
        snapshot: PathBuf,
        /// Entity id or display name.
        #[arg(long)]
        center: String,
        #[arg(long)]
        outlet: String,
        /// Segmentation point as `sx,sy`.
        #[arg(long, default_value = "0.5,0.5")]
        seg: String,
        #[arg(long, default_value_t = DEFAULT_CANDIDATES)]
        candidates: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API over an annotated snapshot.
    Serve {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate a synthetic corpus with gazetteer, lexicon and outlet list.
    GenFixture {
        /// Fixture spec; defaults to the bundled White House scenario.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();

    match Cli::parse().command {
        Command::Ingest {
            corpus,
            outlets,
            abbreviations,
            out,
            rejects,
        } => run_ingest(
            &corpus,
            outlets.as_deref(),
            abbreviations.as_deref(),
            &out,
            rejects.as_deref(),
        ),
        Command::Annotate {
            snapshot,
            gazetteer,
            lexicon,
            import,
            out,
            export,
        } => run_annotate(&snapshot, gazetteer, lexicon, import, &out, export.as_deref()),
        Command::Aggregate { snapshot, outlet, out } => run_aggregate(&snapshot, outlet.as_deref(), &out),
        Command::Hive {
            snapshot,
            center,
            outlet,
            seg,
            candidates,
            out,
        } => run_hive(&snapshot, &center, &outlet, &seg, candidates, out.as_deref()),
        Command::Serve { snapshot, port, config } => run_serve(snapshot, port, config.as_deref()),
        Command::GenFixture { spec, out } => {
            let spec = match spec {
                Some(path) => FixtureSpec::load(&path)?,
                None => FixtureSpec::scenario(),
            };
            let fixture = generate(&spec)?;
            fixture.write_to(&out)?;
            info!(articles = fixture.articles.len(), out = %out.display(), "fixture written");
            Ok(())
        }
    }
}

fn run_ingest(
    corpus: &Path,
    outlets: Option<&Path>,
    abbreviations: Option<&Path>,
    out: &Path,
    rejects: Option<&Path>,
) -> anyhow::Result<()> {
    let outlets = match outlets {
        Some(p) => OutletSet::load(p)?,
        None => OutletSet::reference(),
    };
    let mut splitter = SplitterConfig::default();
    if let Some(p) = abbreviations {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        splitter
            .abbreviations
            .extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from));
    }
    let report = ingest(corpus, &outlets, &splitter)?;
    for r in &report.rejected {
        eprintln!("{}:{}: {}", r.file.display(), r.line, r.reason);
    }
    if let Some(p) = rejects {
        let lines: String = report
            .rejected
            .iter()
            .map(|r| serde_json::to_string(r).expect("reject serializes") + "\n")
            .collect();
        fs::write(p, lines)?;
    }
    report.snapshot.save(out)?;
    info!(
        input = report.input_records,
        accepted = report.accepted(),
        rejected = report.rejected.len(),
        sentences = report.snapshot.sentence_count(),
        fingerprint = report.snapshot.fingerprint(),
        "snapshot written"
    );
    Ok(())
}

fn run_annotate(
    snapshot: &Path,
    gazetteer: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    import: Option<PathBuf>,
    out: &Path,
    export: Option<&Path>,
) -> anyhow::Result<()> {
    let snapshot = CorpusSnapshot::load(snapshot)?;
    let corpus = match (import, gazetteer, lexicon) {
        (Some(path), _, _) => {
            let mut corpus = AnnotatedCorpus::unannotated(snapshot);
            let file = fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            let rejected = corpus.import(BufReader::new(file))?;
            for r in &rejected {
                eprintln!("{}:{}: {:?}", path.display(), r.line, r.reason);
            }
            info!(rejected = rejected.len(), "annotations imported");
            corpus
        }
        (None, Some(g), Some(l)) => {
            let annotator = LexiconAnnotator {
                gazetteer: Gazetteer::load(&g)?,
                lexicon: Lexicon::load(&l)?,
            };
            AnnotatedCorpus::annotate(snapshot, &annotator)
        }
        _ => bail!("pass either --import or both --gazetteer and --lexicon"),
    };
    corpus.save(out)?;
    if let Some(p) = export {
        fs::write(p, corpus.export_records())?;
    }
    info!(
        mentions = corpus.mention_count(),
        entities = corpus.entities().len(),
        "annotated snapshot written"
    );
    Ok(())
}

fn run_aggregate(snapshot: &Path, outlet: Option<&str>, out: &Path) -> anyhow::Result<()> {
    let corpus = AnnotatedCorpus::load(snapshot)?;
    let index = CoverageIndex::build(&corpus);
    let outlet = match outlet {
        Some(name) => {
            let known = OutletSet::new(corpus.snapshot().articles().iter().map(|a| a.outlet.to_string()))?;
            Some(
                known
                    .resolve(name)
                    .cloned()
                    .with_context(|| format!("no articles from outlet {name:?}"))?,
            )
        }
        None => None,
    };
    fs::create_dir_all(out)?;
    let stats = topic_stats(&index, outlet.as_ref());
    fs::write(out.join("topic_stats.jsonl"), export_topic_stats(&stats))?;
    let table = cooccurrence_counts(&index, outlet.as_ref());
    fs::write(out.join("cooccurrence.jsonl"), export_cooccurrence(&table))?;
    let docs: String = index
        .document_sentiments()
        .filter(|d| {
            outlet
                .as_ref()
                .is_none_or(|o| corpus.snapshot().article(&d.article_id).is_some_and(|a| &a.outlet == o))
        })
        .map(|d| serde_json::to_string(&d).expect("record serializes") + "\n")
        .collect();
    fs::write(out.join("document_sentiment.jsonl"), docs)?;
    info!(topics = stats.len(), pairs = table.len(), out = %out.display(), "aggregates written");
    Ok(())
}

fn parse_seg(text: &str) -> anyhow::Result<SegmentationPoint> {
    let (x, y) = text.split_once(',').context("segmentation point must be `sx,sy`")?;
    Ok(SegmentationPoint::new(x.trim().parse()?, y.trim().parse()?)?)
}

fn run_hive(
    snapshot: &Path,
    center: &str,
    outlet: &str,
    seg: &str,
    candidates: usize,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let corpus = AnnotatedCorpus::load(snapshot)?;
    let center = corpus
        .resolve_entity(center)
        .with_context(|| format!("unknown topic {center:?}"))?;
    let outlets = OutletSet::new(corpus.snapshot().articles().iter().map(|a| a.outlet.to_string()))?;
    let outlet = outlets
        .resolve(outlet)
        .cloned()
        .with_context(|| format!("no articles from outlet {outlet:?}"))?;
    let index = CoverageIndex::build(&corpus);
    let hive = data_hive(&index, &center, &outlet, parse_seg(seg)?, candidates)?;
    let body = serde_json::json!({ "layout": layout(&hive), "hive": hive });
    let text = serde_json::to_string_pretty(&body)? + "\n";
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_serve(snapshot: PathBuf, port: u16, config: Option<&Path>) -> anyhow::Result<()> {
    let config = match config {
        Some(p) => ServiceConfig::load(p)?,
        None => ServiceConfig::default(),
    };
    if !snapshot.is_file() {
        bail!("snapshot {} does not exist", snapshot.display());
    }
    let store = SessionStore::open(&config.sessions_dir)?;
    let state = AppState::loading(store);

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let addr: SocketAddr = format!("{}:{port}", config.bind)
            .parse()
            .with_context(|| format!("invalid bind address {}", config.bind))?;
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        info!(%addr, "listening");

        let loader = state.clone();
        let loaded = tokio::task::spawn_blocking(move || {
            let wb = load_workbench(&snapshot, &config)?;
            info!(topics = wb.topic_stats().len(), "snapshot loaded");
            loader.install(wb);
            anyhow::Ok(())
        });

        let server = tokio::spawn(
            axum::serve(listener, router(state))
                .with_graceful_shutdown(shutdown_signal())
                .into_future(),
        );
        loaded.await??;
        server.await??;
        anyhow::Ok(())
    })
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
    info!("shutting down");
}
