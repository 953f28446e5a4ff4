//! Class treemap enriched with instance, subclass and property statistics.
//!
//! The subclass DAG is unfolded into a tree: a class with several
//! superclasses appears under each of them with identical enrichment.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::points::AxisNumber;
use crate::schema::{PropertyKind, SchemaError, SchemaSummary};
use crate::store::{TermId, TripleStore};
use crate::value::{format_epoch_millis, literal_value, MalformedTally, ValueKind};
use crate::vocab::{self, RDFS_LABEL, RDF_TYPE};

/// Classes whose instances use more properties than this get their
/// property details on request only.
pub const PROPERTY_DETAIL_THRESHOLD: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyDetail {
    pub iri: String,
    pub kind: PropertyKind,
    /// Triples whose subject is an instance of the class.
    pub cardinality: u64,
    pub value_min: Option<AxisNumber>,
    pub value_max: Option<AxisNumber>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_min_iso: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_max_iso: Option<String>,
}

/// Enrichment of one class, or of the synthetic root (`class_iri == None`)
/// which stands for all typed subjects.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassDetails {
    pub class_iri: Option<String>,
    pub label: String,
    pub direct_instance_count: u64,
    pub transitive_instance_count: u64,
    pub subclass_count: u64,
    pub property_count: u64,
    pub datatype_property_count: u64,
    pub object_property_count: u64,
    pub mixed_property_count: u64,
    pub property_details: Vec<PropertyDetail>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TreemapNode {
    pub class_iri: Option<String>,
    pub label: String,
    pub direct_instance_count: u64,
    pub transitive_instance_count: u64,
    /// Equal to `transitive_instance_count`.
    pub weight: u64,
    pub subclass_count: u64,
    /// Number of children before depth truncation.
    pub child_count: u64,
    pub property_count: u64,
    pub datatype_property_count: u64,
    pub object_property_count: u64,
    pub mixed_property_count: u64,
    /// `None` when deferred; fetch with [`class_details`].
    pub property_details: Option<Vec<PropertyDetail>>,
    pub property_details_deferred: bool,
    pub children: Vec<TreemapNode>,
}

pub const SYNTHETIC_ROOT_LABEL: &str = "All classes";

/// `rdfs:label` of an IRI (untagged or English preferred, then the smallest
/// lexical form), else its local name.
pub fn label_of(store: &TripleStore, iri: &str) -> String {
    let found = (|| {
        let s = store.lookup_iri(iri)?;
        let p = store.lookup_iri(RDFS_LABEL)?;
        store
            .positions_with_subject(s)
            .iter()
            .map(|&pos| store.encoded_at(pos))
            .filter(|t| t.predicate == p)
            .filter_map(|t| store.term(t.object).as_literal())
            .min_by(|a, b| {
                let rank = |l: &crate::term::Literal| match l.language.as_deref() {
                    None => 0,
                    Some(l) if l == "en" || l.starts_with("en-") => 1,
                    Some(_) => 2,
                };
                rank(a)
                    .cmp(&rank(b))
                    .then_with(|| a.lexical.cmp(&b.lexical))
            })
            .map(|l| l.lexical.clone())
    })();
    found.unwrap_or_else(|| vocab::local_name(iri).to_owned())
}

struct Computer<'a> {
    store: &'a TripleStore,
    summary: &'a SchemaSummary,
    type_pid: Option<TermId>,
    cache: HashMap<String, ClassDetails>,
}

impl<'a> Computer<'a> {
    fn new(store: &'a TripleStore, summary: &'a SchemaSummary) -> Self {
        Computer {
            store,
            summary,
            type_pid: store.lookup_iri(RDF_TYPE),
            cache: HashMap::new(),
        }
    }

    fn instances(&self, class: Option<&str>) -> HashSet<TermId> {
        match class {
            Some(c) => self
                .summary
                .instances_of_subtrees([c])
                .expect("class existence checked by caller"),
            None => self
                .summary
                .classes
                .keys()
                .flat_map(|c| self.summary.direct_instances(c).iter().copied())
                .collect(),
        }
    }

    fn details(&mut self, class: Option<&str>) -> ClassDetails {
        let key = class.unwrap_or("").to_owned();
        if let Some(d) = self.cache.get(&key) {
            return d.clone();
        }
        let d = self.compute(class);
        self.cache.insert(key, d.clone());
        d
    }

    fn compute(&self, class: Option<&str>) -> ClassDetails {
        let store = self.store;
        let instances = self.instances(class);

        struct Acc {
            cardinality: u64,
            min: f64,
            max: f64,
        }
        let mut per_property: BTreeMap<&str, Acc> = BTreeMap::new();
        let mut tally = MalformedTally::default();
        for &s in &instances {
            for &pos in store.positions_with_subject(s) {
                let t = store.encoded_at(pos);
                if Some(t.predicate) == self.type_pid {
                    continue;
                }
                let iri = store.term(t.predicate).lexical();
                let acc = per_property.entry(iri).or_insert(Acc {
                    cardinality: 0,
                    min: f64::INFINITY,
                    max: f64::NEG_INFINITY,
                });
                acc.cardinality += 1;
                let axis = self
                    .summary
                    .property(iri)
                    .and_then(|p| p.literal_kind)
                    .and_then(|k| k.value_kind());
                if let (Some(axis), Some(lit)) = (axis, store.term(t.object).as_literal()) {
                    let v = literal_value(lit, &mut tally);
                    if v.kind() == Some(axis) {
                        let x = v.axis_value().expect("typed values have an axis position");
                        acc.min = acc.min.min(x);
                        acc.max = acc.max.max(x);
                    }
                }
            }
        }

        let mut counts = [0u64; 3];
        let property_details: Vec<PropertyDetail> = per_property
            .into_iter()
            .map(|(iri, acc)| {
                let info = self
                    .summary
                    .property(iri)
                    .expect("every predicate has a property summary");
                counts[match info.kind {
                    PropertyKind::Datatype => 0,
                    PropertyKind::Object => 1,
                    PropertyKind::Mixed => 2,
                }] += 1;
                let axis = info.literal_kind.and_then(|k| k.value_kind());
                let has = acc.min <= acc.max;
                let bound = |v: f64| (has && axis.is_some()).then_some(v);
                let iso = |v: Option<f64>| match axis {
                    Some(ValueKind::Temporal) => v.map(|ms| format_epoch_millis(ms as i64)),
                    _ => None,
                };
                PropertyDetail {
                    iri: iri.to_owned(),
                    kind: info.kind,
                    cardinality: acc.cardinality,
                    value_min: bound(acc.min).map(AxisNumber),
                    value_max: bound(acc.max).map(AxisNumber),
                    value_min_iso: iso(bound(acc.min)),
                    value_max_iso: iso(bound(acc.max)),
                }
            })
            .collect();

        let (label, direct, transitive, subclasses) = match class {
            Some(c) => {
                let info = &self.summary.classes[c];
                (
                    label_of(store, c),
                    info.direct_instance_count,
                    info.transitive_instance_count,
                    info.subclasses.len() as u64,
                )
            }
            None => (
                SYNTHETIC_ROOT_LABEL.to_owned(),
                0,
                self.summary.typed_subject_count,
                self.summary.root_classes().len() as u64,
            ),
        };
        ClassDetails {
            class_iri: class.map(str::to_owned),
            label,
            direct_instance_count: direct,
            transitive_instance_count: transitive,
            subclass_count: subclasses,
            property_count: property_details.len() as u64,
            datatype_property_count: counts[0],
            object_property_count: counts[1],
            mixed_property_count: counts[2],
            property_details,
        }
    }

    fn node(&mut self, class: Option<&str>, depth: u32, max_depth: Option<u32>) -> TreemapNode {
        let d = self.details(class);
        let children_iris: Vec<String> = match class {
            Some(c) => self.summary.children_of(c).map(str::to_owned).collect(),
            None => self
                .summary
                .root_classes()
                .into_iter()
                .map(str::to_owned)
                .collect(),
        };
        let mut children: Vec<TreemapNode> = if max_depth.is_some_and(|m| depth >= m) {
            Vec::new()
        } else {
            children_iris
                .iter()
                .map(|c| self.node(Some(c), depth + 1, max_depth))
                .collect()
        };
        children.sort_by(|a, b| {
            b.weight
                .cmp(&a.weight)
                .then_with(|| a.class_iri.cmp(&b.class_iri))
        });
        let deferred = d.property_details.len() > PROPERTY_DETAIL_THRESHOLD;
        TreemapNode {
            class_iri: d.class_iri,
            label: d.label,
            direct_instance_count: d.direct_instance_count,
            transitive_instance_count: d.transitive_instance_count,
            weight: d.transitive_instance_count,
            subclass_count: d.subclass_count,
            child_count: children_iris.len() as u64,
            property_count: d.property_count,
            datatype_property_count: d.datatype_property_count,
            object_property_count: d.object_property_count,
            mixed_property_count: d.mixed_property_count,
            property_details: (!deferred).then_some(d.property_details),
            property_details_deferred: deferred,
            children,
        }
    }
}

/// Builds the treemap rooted at `root` (or a synthetic root over all
/// parentless classes), keeping `max_depth` levels below the root.
pub fn build_treemap(
    store: &TripleStore,
    summary: &SchemaSummary,
    root: Option<&str>,
    max_depth: Option<u32>,
) -> Result<TreemapNode, SchemaError> {
    if let Some(c) = root {
        if summary.class(c).is_none() {
            return Err(SchemaError::UnknownClass(c.to_owned()));
        }
    }
    Ok(Computer::new(store, summary).node(root, 0, max_depth))
}

/// Full enrichment of one class (or the synthetic root), including property
/// details regardless of the deferral threshold.
pub fn class_details(
    store: &TripleStore,
    summary: &SchemaSummary,
    class: Option<&str>,
) -> Result<ClassDetails, SchemaError> {
    if let Some(c) = class {
        if summary.class(c).is_none() {
            return Err(SchemaError::UnknownClass(c.to_owned()));
        }
    }
    Ok(Computer::new(store, summary).compute(class))
}
