//! `gptlods` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 provider error.

use std::io::{Read, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};

use gptlods_core::labels::{LabelTable, Stoplist};
use gptlods_core::llm::{Provider, ProviderConfig};
use gptlods_core::ntriples::{ingest_files, ParseMode};
use gptlods_core::pipeline::PipelineError;
use gptlods_core::recognition::HttpRecognizer;
use gptlods_core::snapshot::{load_snapshot, save_snapshot};
use gptlods_core::validation::relations_between;
use gptlods_core::{render_html, CanonicalEntityId, Engine, Index};

use crate::api::AppState;

#[derive(Debug, Parser)]
#[command(name = "gptlods", version, about = "Annotate chat answers with entities linked across RDF knowledge graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest N-Triples files and write an index snapshot.
    Ingest {
        /// Dataset as NAME=PATH.nt; repeatable.
        #[arg(long = "kg", value_name = "NAME=PATH", required = true, value_parser = parse_pair)]
        kgs: Vec<(String, String)>,
        #[arg(long)]
        out: PathBuf,
        /// Abort on the first malformed line instead of skipping it.
        #[arg(long)]
        strict: bool,
    },
    /// Run the HTTP service.
    Serve {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// canned:<file.json> or http (uses CHAT_API_URL, CHAT_MODEL, CHAT_API_KEY).
        #[arg(long)]
        provider: Option<String>,
        /// Static web client served at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Stamp responses with this RFC 3339 time instead of the clock.
        #[arg(long, value_parser = parse_time)]
        fixed_time: Option<DateTime<Utc>>,
    },
    /// Ask a question and print the annotated, validated answer as JSON.
    Ask {
        question: String,
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long)]
        provider: String,
        #[arg(long, value_parser = parse_time)]
        fixed_time: Option<DateTime<Utc>>,
    },
    /// Annotate a text without calling a chat provider.
    Annotate {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long, conflicts_with = "stdin", required_unless_present = "stdin")]
        text: Option<String>,
        #[arg(long)]
        stdin: bool,
        /// Print the HTML rendering instead of JSON.
        #[arg(long)]
        html: bool,
    },
    /// Print all relations between two entities.
    Factcheck {
        #[arg(long)]
        index: PathBuf,
        a: u32,
        b: u32,
    },
    /// Print an entity card, or its facts, URIs or datasets.
    Entity {
        #[arg(long)]
        index: PathBuf,
        id: u32,
        #[arg(long, group = "view")]
        facts: bool,
        #[arg(long, group = "view")]
        uris: bool,
        #[arg(long, group = "view")]
        datasets: bool,
        #[arg(long, default_value_t = 0)]
        page: usize,
        #[arg(long, default_value_t = 50)]
        size: usize,
    },
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Index snapshot written by `ingest`.
    #[arg(long)]
    pub index: PathBuf,
    /// External recognizer as NAME=URL; repeatable.
    #[arg(long = "recognizer", value_name = "NAME=URL", value_parser = parse_pair)]
    pub recognizers: Vec<(String, String)>,
    /// Stoplist replacing the bundled one.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Timeout for each external recognizer call, in seconds.
    #[arg(long, default_value_t = 10)]
    pub recognizer_timeout: u64,
}

fn parse_pair(raw: &str) -> Result<(String, String), String> {
    match raw.split_once('=') {
        Some((name, value)) if !name.is_empty() && !value.is_empty() => Ok((name.to_string(), value.to_string())),
        _ => Err(format!("expected NAME=VALUE, got {raw:?}")),
    }
}

fn parse_time(raw: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(raw).map(|t| t.with_timezone(&Utc)).map_err(|e| e.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0:#}")]
    Data(anyhow::Error),
    #[error("{0}")]
    Provider(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Provider(_) => 3,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match runtime.block_on(run(cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn provider_config(choice: &str) -> Result<ProviderConfig, CliError> {
    if let Some(path) = choice.strip_prefix("canned:") {
        if path.is_empty() {
            return Err(CliError::Usage("canned provider needs a fixture path".into()));
        }
        Ok(ProviderConfig::canned(path))
    } else if choice == "http" {
        ProviderConfig::http_chat_from_env().map_err(|e| CliError::Provider(e.to_string()))
    } else {
        Err(CliError::Usage(format!("unknown provider {choice:?}; use canned:<file> or http")))
    }
}

fn provider(choice: &str) -> Result<Provider, CliError> {
    Provider::from_config(&provider_config(choice)?).map_err(|e| CliError::Provider(e.to_string()))
}

fn load_index(path: &PathBuf) -> Result<Index, CliError> {
    Ok(load_snapshot(path).with_context(|| format!("loading index {}", path.display()))?)
}

fn engine(args: &IndexArgs) -> Result<Engine, CliError> {
    let index = load_index(&args.index)?;
    let labels = match &args.stopwords {
        Some(path) => {
            let stoplist = Stoplist::load(path).with_context(|| format!("reading stoplist {}", path.display()))?;
            LabelTable::extract_with_stoplist(&index, stoplist)
        }
        None => LabelTable::extract(&index),
    };
    let timeout = Duration::from_secs(args.recognizer_timeout);
    Ok(args.recognizers.iter().fold(Engine::new(index, labels), |engine, (name, url)| {
        engine.with_recognizer(Arc::new(HttpRecognizer::new(name, url, timeout)))
    }))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).context("serializing output")?;
    write_stdout(&text)
}

fn write_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Data(e.into())),
        _ => Ok(()),
    }
}

fn pipeline_error(e: PipelineError) -> CliError {
    match e {
        PipelineError::Provider(p) => CliError::Provider(p.to_string()),
        other => CliError::Data(other.into()),
    }
}

pub async fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { kgs, out, strict } => {
            let mode = if strict { ParseMode::Strict } else { ParseMode::Lenient };
            let sources: Vec<(String, PathBuf)> = kgs.into_iter().map(|(n, p)| (n, PathBuf::from(p))).collect();
            let (registry, triples, reports) = ingest_files(&sources, mode).context("ingesting datasets")?;
            for report in &reports {
                eprintln!("{}: {} triples, {} malformed lines", report.name, report.triples, report.errors.len());
                for error in report.errors.iter().take(20) {
                    eprintln!("  {}: {}", report.name, error);
                }
            }
            let index = Index::build(triples, registry);
            save_snapshot(&index, &out).with_context(|| format!("writing {}", out.display()))?;
            eprintln!(
                "wrote {}: {} entities, {} IRIs, {} triples",
                out.display(),
                index.class_count(),
                index.iri_count(),
                index.triples().len()
            );
            Ok(())
        }
        Command::Serve { index, port, host, provider: choice, static_dir, fixed_time } => {
            let provider = choice.as_deref().map(provider).transpose()?;
            let mut state = AppState::new(engine(&index)?, provider);
            if let Some(at) = fixed_time {
                state = state.with_fixed_time(at);
            }
            let addr = SocketAddr::new(host, port);
            crate::serve(state, addr, static_dir, crate::termination_signal())
                .await
                .with_context(|| format!("serving on {addr}"))?;
            Ok(())
        }
        Command::Ask { question, index, provider: choice, fixed_time } => {
            let provider = provider(&choice)?;
            let engine = engine(&index)?;
            let at = fixed_time.unwrap_or_else(Utc::now);
            let result = engine.run_pipeline(&question, &provider, at).await.map_err(pipeline_error)?;
            print_json(&result)
        }
        Command::Annotate { index, text, stdin, html } => {
            let text = match (text, stdin) {
                (Some(text), _) => text,
                (None, _) => {
                    let mut buf = String::new();
                    std::io::stdin().read_to_string(&mut buf).context("reading stdin")?;
                    buf
                }
            };
            let engine = engine(&index)?;
            let annotation = engine.annotate_text(&text, "none", Utc::now()).await.map_err(pipeline_error)?;
            if html {
                write_stdout(&render_html(&annotation.response))
            } else {
                print_json(&annotation)
            }
        }
        Command::Factcheck { index, a, b } => {
            let index = load_index(&index)?;
            let evidence = relations_between(CanonicalEntityId(a), CanonicalEntityId(b), &index)
                .map_err(|e| CliError::Data(e.into()))?;
            print_json(&evidence)
        }
        Command::Entity { index, id, facts, uris, datasets, page, size } => {
            let index = load_index(&index)?;
            let id = CanonicalEntityId(id);
            let data = |e: gptlods_core::index::IndexError| CliError::Data(e.into());
            if facts {
                print_json(&index.entity_facts(id, page, size).map_err(data)?)
            } else if uris {
                print_json(&index.entity_uris(id).map_err(data)?)
            } else if datasets {
                print_json(&index.entity_datasets(id).map_err(data)?)
            } else {
                print_json(&index.entity_card(id).map_err(data)?)
            }
        }
    }
}
