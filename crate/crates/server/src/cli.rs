//! Command-line interface.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use synopsviz_core::hierarchy::{
    build_hierarchy_with_limits, Closure, ConfigLimits, HierarchyNode, NestedNode, Strategy,
};
use synopsviz_core::metadata::PredicateTable;
use synopsviz_core::value::format_epoch_millis;
use synopsviz_core::{
    resolve_selection, FacetSelection, HierarchyConfig, IngestOptions, RdfFormat, ValueKind,
};

use crate::api::{router, AppState, ServerConfig};
use crate::registry::{dataset_id, DataDir, Dataset};

#[derive(Debug, Parser)]
#[command(
    name = "synopsviz",
    version,
    about = "Hierarchical exploration and statistics over RDF datasets"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Directory holding ingested datasets.
    #[arg(long, global = true, env = "SYNOPSVIZ_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
    /// Reject datasets with more triples than this.
    #[arg(long, global = true, env = "SYNOPSVIZ_MAX_TRIPLES")]
    pub max_triples: Option<usize>,
    /// JSON predicate-to-category table replacing the bundled one.
    #[arg(long, global = true, env = "SYNOPSVIZ_METADATA_TABLE")]
    pub metadata_table: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a file, print its ingest report and store it in the data directory.
    Ingest {
        file: PathBuf,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        name: Option<String>,
    },
    /// Dataset statistics as JSON.
    Stats {
        dataset: String,
        #[arg(long, default_value_t = synopsviz_core::stats::DEFAULT_TOP_N)]
        top: usize,
    },
    /// Dataset metadata as JSON.
    Metadata { dataset: String },
    /// Class and property facets as JSON.
    Facets { dataset: String },
    /// Build a value hierarchy over one property.
    Hierarchy(HierarchyArgs),
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "SYNOPSVIZ_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 64)]
        cache_size: usize,
    },
}

#[derive(Debug, Args)]
pub struct HierarchyArgs {
    /// Dataset id (in the data directory) or path to an RDF file.
    pub dataset: String,
    #[arg(long)]
    pub property: String,
    /// Comma-separated class IRIs.
    #[arg(long, value_delimiter = ',')]
    pub classes: Vec<String>,
    #[arg(long, default_value = "equal-frequency")]
    pub strategy: String,
    #[arg(long, default_value_t = 3)]
    pub levels: u32,
    #[arg(long, default_value_t = 10)]
    pub fanout: u32,
    #[arg(long, default_value_t = 5)]
    pub sample_size: u32,
    /// Print the whole tree as JSON.
    #[arg(long, conflicts_with = "tree")]
    pub json: bool,
    /// Print the tree as indented text (default).
    #[arg(long)]
    pub tree: bool,
}

pub type CliResult = Result<(), Box<dyn std::error::Error + Send + Sync>>;

fn table(global: &GlobalArgs) -> Result<PredicateTable, Box<dyn std::error::Error + Send + Sync>> {
    Ok(match &global.metadata_table {
        Some(p) => PredicateTable::from_json(&fs::read_to_string(p)?)?,
        None => PredicateTable::default(),
    })
}

fn options(global: &GlobalArgs) -> IngestOptions {
    IngestOptions {
        max_triples: global.max_triples,
    }
}

/// Loads a dataset named by a file path or by an id in the data directory.
fn open_dataset(
    global: &GlobalArgs,
    reference: &str,
) -> Result<Dataset, Box<dyn std::error::Error + Send + Sync>> {
    let path = Path::new(reference);
    let (name, path, format) = if path.is_file() {
        let format = RdfFormat::from_path(path).unwrap_or(RdfFormat::NTriples);
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        (name, path.to_path_buf(), format)
    } else {
        let dir = global.data_dir.as_ref().ok_or_else(|| {
            format!("{reference:?} is not a file and no data directory is configured")
        })?;
        let dir = DataDir::open(dir)?;
        dir.sources()?
            .into_iter()
            .find(|(name, path, _)| fs::read(path).is_ok_and(|b| dataset_id(name, &b) == reference))
            .ok_or_else(|| format!("no dataset {reference:?} in {}", dir.root().display()))?
    };
    let bytes = fs::read(&path)?;
    Ok(Dataset::load(
        &name,
        &bytes,
        format,
        &options(global),
        &table(global)?,
    )?)
}

fn print_json<T: Serialize>(value: &T) -> CliResult {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn run(cli: Cli) -> CliResult {
    let global = &cli.global;
    match cli.command {
        Command::Ingest { file, format, name } => {
            let format = match format {
                Some(f) => {
                    RdfFormat::from_name(&f).ok_or_else(|| format!("unknown format {f:?}"))?
                }
                None => {
                    RdfFormat::from_path(&file).ok_or("cannot infer the format; pass --format")?
                }
            };
            let name = name.unwrap_or_else(|| {
                file.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default()
            });
            let bytes = fs::read(&file)?;
            let dataset = Dataset::load(&name, &bytes, format, &options(global), &table(global)?)?;
            let stored = match &global.data_dir {
                Some(dir) if !dataset.store.is_empty() => {
                    Some(DataDir::open(dir)?.add(&name, &bytes, format)?)
                }
                _ => None,
            };
            #[derive(Serialize)]
            #[serde(rename_all = "camelCase")]
            struct Out<'a> {
                id: &'a str,
                name: &'a str,
                triple_count: usize,
                stored: bool,
                report: &'a synopsviz_core::IngestReport,
            }
            print_json(&Out {
                id: &dataset.id,
                name: &dataset.name,
                triple_count: dataset.store.len(),
                stored: stored.is_some(),
                report: dataset.store.report(),
            })
        }
        Command::Stats { dataset, top } => {
            let d = open_dataset(global, &dataset)?;
            print_json(&synopsviz_core::compute_dataset_stats(
                &d.store, &d.summary, top,
            ))
        }
        Command::Metadata { dataset } => print_json(&open_dataset(global, &dataset)?.metadata),
        Command::Facets { dataset } => print_json(&open_dataset(global, &dataset)?.facets),
        Command::Hierarchy(args) => {
            let d = open_dataset(global, &args.dataset)?;
            let selection = FacetSelection::property(args.property.clone())
                .with_classes(args.classes.iter().cloned());
            let config = HierarchyConfig {
                strategy: args.strategy.parse::<Strategy>()?,
                levels: args.levels,
                fanout: args.fanout,
                sample_size: args.sample_size,
            };
            let points = resolve_selection(&d.store, &d.summary, &selection)?;
            let tree = build_hierarchy_with_limits(points, config, &ConfigLimits::default())?;
            if args.json {
                print_json(&tree.to_nested())
            } else {
                let mut text = String::new();
                render_tree(&tree.to_nested(), &mut text);
                io::stdout().lock().write_all(text.as_bytes())?;
                Ok(())
            }
        }
        Command::Serve {
            port,
            host,
            cache_size,
        } => {
            let config = ServerConfig {
                max_triples: global.max_triples,
                cache_capacity: cache_size,
                data_dir: global.data_dir.clone(),
                ..ServerConfig::default()
            };
            let state = AppState::new(config, table(global)?)?;
            let addr: SocketAddr = format!("{host}:{port}").parse()?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                tracing::info!(%addr, datasets = state.registry.len(), "listening");
                axum::serve(listener, router(state)).await?;
                Ok(())
            })
        }
    }
}

fn fmt_axis(kind: ValueKind, v: f64) -> String {
    match kind {
        ValueKind::Temporal => format_epoch_millis(v as i64),
        ValueKind::Numeric => format!("{v}"),
    }
}

fn node_line(n: &HierarchyNode) -> String {
    let close = match n.closure {
        Closure::HalfOpen => ')',
        Closure::Closed => ']',
    };
    let id = if n.node_id.is_empty() {
        "root"
    } else {
        &n.node_id
    };
    let mut line = format!(
        "{id} [{}, {}{close} count={}",
        fmt_axis(n.kind, n.lo),
        fmt_axis(n.kind, n.hi),
        n.stats.count
    );
    if let (Some(mean), Some(var)) = (n.stats.mean(), n.stats.variance()) {
        let _ = write!(line, " mean={} variance={var}", fmt_axis(n.kind, mean));
    }
    if n.pruned_children > 0 {
        let _ = write!(line, " pruned={}", n.pruned_children);
    }
    line
}

/// Indented text rendering, one node per line.
pub fn render_tree(node: &NestedNode, out: &mut String) {
    let _ = writeln!(
        out,
        "{}{}",
        "  ".repeat(node.node.depth as usize),
        node_line(&node.node)
    );
    for c in &node.children {
        render_tree(c, out);
    }
}
