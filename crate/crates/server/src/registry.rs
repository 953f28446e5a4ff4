//! Loaded dataset snapshots and the on-disk data directory.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use synopsviz_core::facets::FacetCatalog;
use synopsviz_core::metadata::{extract_metadata_with, PredicateTable};
use synopsviz_core::stats::DEFAULT_TOP_N;
use synopsviz_core::{
    build_facets, compute_dataset_stats, infer_schema, ingest_with, DatasetMetadata, DatasetStats,
    IngestOptions, RdfFormat, SchemaSummary, TripleStore,
};
use tracing::{info, warn};

use crate::error::ApiError;

/// A fully loaded dataset. Immutable once built.
#[derive(Debug)]
pub struct Dataset {
    pub id: String,
    pub name: String,
    pub format: RdfFormat,
    pub store: TripleStore,
    pub summary: SchemaSummary,
    pub facets: FacetCatalog,
    pub stats: DatasetStats,
    pub metadata: DatasetMetadata,
    pub loaded_at: DateTime<Utc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetListing {
    pub id: String,
    pub name: String,
    pub triple_count: u64,
    pub loaded_at: String,
}

/// Content-derived id: the first 16 hex digits of sha256(name, 0, bytes).
pub fn dataset_id(name: &str, bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(name.as_bytes());
    h.update([0]);
    h.update(bytes);
    hex::encode(&h.finalize()[..8])
}

impl Dataset {
    /// Runs the load pipeline: ingest, schema, facets, statistics, metadata.
    pub fn load(
        name: &str,
        bytes: &[u8],
        format: RdfFormat,
        options: &IngestOptions,
        table: &PredicateTable,
    ) -> Result<Dataset, ApiError> {
        let store = ingest_with(bytes, format, options)?;
        Ok(Dataset::from_store(
            dataset_id(name, bytes),
            name.to_owned(),
            store,
            table,
        ))
    }

    pub fn from_store(
        id: String,
        name: String,
        store: TripleStore,
        table: &PredicateTable,
    ) -> Dataset {
        let summary = infer_schema(&store);
        let facets = build_facets(&store, &summary);
        let stats = compute_dataset_stats(&store, &summary, DEFAULT_TOP_N);
        let metadata = extract_metadata_with(&store, table);
        Dataset {
            id,
            name,
            format: store.report().format,
            store,
            summary,
            facets,
            stats,
            metadata,
            loaded_at: Utc::now(),
        }
    }

    pub fn listing(&self) -> DatasetListing {
        DatasetListing {
            id: self.id.clone(),
            name: self.name.clone(),
            triple_count: self.stats.data_level.triple_count,
            loaded_at: self.loaded_at.to_rfc3339_opts(SecondsFormat::Millis, true),
        }
    }
}

/// Datasets visible to the API. Entries are inserted only after their load
/// pipeline has finished.
#[derive(Debug, Default)]
pub struct Registry {
    datasets: RwLock<BTreeMap<String, Arc<Dataset>>>,
}

impl Registry {
    pub fn list(&self) -> Vec<DatasetListing> {
        let guard = self.datasets.read().expect("registry lock");
        let mut out: Vec<_> = guard.values().map(|d| (d.loaded_at, d.listing())).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.id.cmp(&b.1.id)));
        out.into_iter().map(|(_, l)| l).collect()
    }

    pub fn get(&self, id: &str) -> Option<Arc<Dataset>> {
        self.datasets
            .read()
            .expect("registry lock")
            .get(id)
            .cloned()
    }

    /// Inserts a dataset unless one with the same id exists. Returns the
    /// registered entry and whether it was newly inserted.
    pub fn insert(&self, dataset: Dataset) -> (Arc<Dataset>, bool) {
        let mut guard = self.datasets.write().expect("registry lock");
        if let Some(existing) = guard.get(&dataset.id) {
            return (Arc::clone(existing), false);
        }
        let d = Arc::new(dataset);
        guard.insert(d.id.clone(), Arc::clone(&d));
        (d, true)
    }

    pub fn len(&self) -> usize {
        self.datasets.read().expect("registry lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifestEntry {
    pub id: String,
    pub name: String,
    pub file: String,
    pub format: String,
}

pub fn format_name(format: RdfFormat) -> &'static str {
    match format {
        RdfFormat::NTriples => "ntriples",
        RdfFormat::Turtle => "turtle",
    }
}

fn extension(format: RdfFormat) -> &'static str {
    match format {
        RdfFormat::NTriples => "nt",
        RdfFormat::Turtle => "ttl",
    }
}

/// A directory of dataset files plus `manifest.json` naming the ones
/// added through ingestion. Loose `.nt`/`.ttl` files are picked up too,
/// named after their file stem.
#[derive(Clone, Debug)]
pub struct DataDir {
    root: PathBuf,
}

pub const MANIFEST: &str = "manifest.json";

impl DataDir {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<DataDir> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(DataDir { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> io::Result<Vec<ManifestEntry>> {
        match fs::read(self.root.join(MANIFEST)) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(e),
        }
    }

    /// Copies a dataset into the directory and records it in the manifest.
    pub fn add(&self, name: &str, bytes: &[u8], format: RdfFormat) -> io::Result<ManifestEntry> {
        let id = dataset_id(name, bytes);
        let mut manifest = self.manifest()?;
        if let Some(e) = manifest.iter().find(|e| e.id == id) {
            return Ok(e.clone());
        }
        let file = format!("{id}.{}", extension(format));
        fs::write(self.root.join(&file), bytes)?;
        let entry = ManifestEntry {
            id,
            name: name.to_owned(),
            file,
            format: format_name(format).to_owned(),
        };
        manifest.push(entry.clone());
        let tmp = self.root.join(format!("{MANIFEST}.tmp"));
        fs::write(&tmp, serde_json::to_vec_pretty(&manifest)?)?;
        fs::rename(tmp, self.root.join(MANIFEST))?;
        Ok(entry)
    }

    /// Every dataset source in the directory: manifest entries first, then
    /// loose RDF files, as (name, path, format).
    pub fn sources(&self) -> io::Result<Vec<(String, PathBuf, RdfFormat)>> {
        let manifest = self.manifest()?;
        let mut out = Vec::new();
        for e in &manifest {
            let format = RdfFormat::from_name(&e.format).ok_or_else(|| {
                io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("unknown format {:?}", e.format),
                )
            })?;
            out.push((e.name.clone(), self.root.join(&e.file), format));
        }
        let mut loose: Vec<PathBuf> = fs::read_dir(&self.root)?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && !manifest.iter().any(|e| self.root.join(&e.file) == *p))
            .filter(|p| RdfFormat::from_path(p).is_some())
            .collect();
        loose.sort();
        for p in loose {
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let format = RdfFormat::from_path(&p).expect("filtered above");
            out.push((name, p, format));
        }
        Ok(out)
    }

    /// Loads every source into `registry`, logging and skipping failures.
    pub fn load_into(
        &self,
        registry: &Registry,
        options: &IngestOptions,
        table: &PredicateTable,
    ) -> io::Result<usize> {
        let mut loaded = 0;
        for (name, path, format) in self.sources()? {
            let bytes = match fs::read(&path) {
                Ok(b) => b,
                Err(e) => {
                    warn!(path = %path.display(), error = %e, "skipping unreadable dataset");
                    continue;
                }
            };
            match Dataset::load(&name, &bytes, format, options, table) {
                Ok(d) if d.store.is_empty() => {
                    warn!(path = %path.display(), "skipping empty dataset")
                }
                Ok(d) => {
                    info!(id = %d.id, name = %d.name, triples = d.store.len(), "loaded dataset");
                    registry.insert(d);
                    loaded += 1;
                }
                Err(e) => warn!(path = %path.display(), error = %e, "skipping dataset"),
            }
        }
        Ok(loaded)
    }

    /// Resolves a path given by a client, which must stay inside the
    /// directory.
    pub fn resolve(&self, requested: &str) -> Option<PathBuf> {
        let root = self.root.canonicalize().ok()?;
        let candidate = root.join(requested).canonicalize().ok()?;
        candidate.starts_with(&root).then_some(candidate)
    }
}
