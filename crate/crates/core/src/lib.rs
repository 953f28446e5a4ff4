//! Hierarchical exploration and statistics over RDF datasets.
//!
//! The crate ingests N-Triples or Turtle into an immutable [`TripleStore`],
//! infers a [`SchemaSummary`], and derives everything else from those two
//! snapshots: facets, multi-level value hierarchies with mergeable group
//! statistics, dataset statistics, class treemaps and dataset metadata.

pub mod facets;
pub mod hierarchy;
pub mod metadata;
pub mod ntriples;
pub mod points;
pub mod schema;
pub mod stats;
pub mod store;
pub mod term;
pub mod treemap;
mod turtle;
pub mod value;
pub mod vocab;

pub use facets::{build_facets, resolve_selection, FacetCatalog, FacetError, FacetSelection};
pub use hierarchy::{build_hierarchy, HierarchyConfig, HierarchyError, HierarchyTree, Strategy};
pub use metadata::{extract_metadata, DatasetMetadata};
pub use points::{Point, PointSet};
pub use schema::{infer_schema, SchemaSummary};
pub use stats::{compute_dataset_stats, DatasetStats};
pub use store::{
    ingest, ingest_path, ingest_with, IngestError, IngestOptions, IngestReport, RdfFormat, TermId,
    TripleStore,
};
pub use term::{Literal, Term, TermKind, Triple, TripleRef};
pub use treemap::{build_treemap, TreemapNode};
pub use value::{parse_literal_value, TypedValue, ValueKind};
