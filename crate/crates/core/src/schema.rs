//! Schema inference over a [`TripleStore`]: classes, the subclass
//! hierarchy, instance typing, and per-property kinds, domains and ranges.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::store::{TermId, TripleStore};
use crate::term::Term;
use crate::value::{literal_value, MalformedTally, TypedValue, ValueKind};
use crate::vocab::{
    self, OWL_CLASS, RDFS_CLASS, RDFS_DOMAIN, RDFS_RANGE, RDFS_SUBCLASS_OF, RDF_TYPE,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("unknown class: {0}")]
    UnknownClass(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassInfo {
    pub iri: String,
    pub direct_instance_count: u64,
    /// Distinct subjects typed with this class or any descendant.
    pub transitive_instance_count: u64,
    pub superclasses: BTreeSet<String>,
    pub subclasses: BTreeSet<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum PropertyKind {
    Datatype,
    Object,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum LiteralKind {
    Numeric,
    Temporal,
    Other,
}

impl LiteralKind {
    pub fn value_kind(self) -> Option<ValueKind> {
        match self {
            LiteralKind::Numeric => Some(ValueKind::Numeric),
            LiteralKind::Temporal => Some(ValueKind::Temporal),
            LiteralKind::Other => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyInfo {
    pub iri: String,
    pub kind: PropertyKind,
    pub literal_kind: Option<LiteralKind>,
    pub triple_count: u64,
    pub distinct_subject_count: u64,
    pub literal_count: u64,
    /// Objects that parse to the `literal_kind` axis.
    pub value_count: u64,
    /// Literals with a numeric or temporal datatype whose lexical form is invalid.
    pub malformed_literal_count: u64,
    pub domains: BTreeSet<String>,
    pub ranges: BTreeSet<String>,
    pub declared_domains: BTreeSet<String>,
    pub declared_ranges: BTreeSet<String>,
    pub value_min: Option<TypedValue>,
    pub value_max: Option<TypedValue>,
}

/// A `child rdfs:subClassOf parent` statement.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SubclassEdge {
    pub parent: String,
    pub child: String,
}

#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemaSummary {
    pub classes: BTreeMap<String, ClassInfo>,
    /// parent -> direct children, after cycle breaking.
    pub class_hierarchy: BTreeMap<String, BTreeSet<String>>,
    pub properties: BTreeMap<String, PropertyInfo>,
    pub subclass_statement_count: u64,
    pub broken_edges: Vec<SubclassEdge>,
    pub warnings: Vec<String>,
    /// Distinct subjects typed with at least one class.
    pub typed_subject_count: u64,
    #[serde(skip)]
    typing: Typing,
}

/// Instance typing keyed by store term ids.
#[derive(Clone, Debug, Default)]
struct Typing {
    /// subject -> direct classes
    types_of: HashMap<TermId, Vec<String>>,
    /// class -> subjects typed directly with it
    instances_of: HashMap<String, Vec<TermId>>,
}

impl SchemaSummary {
    pub fn class(&self, iri: &str) -> Option<&ClassInfo> {
        self.classes.get(iri)
    }

    pub fn property(&self, iri: &str) -> Option<&PropertyInfo> {
        self.properties.get(iri)
    }

    /// Classes without superclasses.
    pub fn root_classes(&self) -> Vec<&str> {
        self.classes
            .values()
            .filter(|c| c.superclasses.is_empty())
            .map(|c| c.iri.as_str())
            .collect()
    }

    pub fn children_of(&self, iri: &str) -> impl Iterator<Item = &str> {
        self.class_hierarchy
            .get(iri)
            .into_iter()
            .flatten()
            .map(String::as_str)
    }

    /// `c` plus all transitive subclasses.
    pub fn subtree_of(&self, c: &str) -> Result<BTreeSet<String>, SchemaError> {
        if !self.classes.contains_key(c) {
            return Err(SchemaError::UnknownClass(c.to_owned()));
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![c.to_owned()];
        while let Some(next) = stack.pop() {
            if seen.insert(next.clone()) {
                stack.extend(self.children_of(&next).map(str::to_owned));
            }
        }
        Ok(seen)
    }

    /// Direct classes of a subject, empty when untyped.
    pub fn types_of(&self, subject: TermId) -> &[String] {
        self.typing
            .types_of
            .get(&subject)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn is_typed(&self, subject: TermId) -> bool {
        self.typing.types_of.contains_key(&subject)
    }

    pub fn direct_instances(&self, class: &str) -> &[TermId] {
        self.typing
            .instances_of
            .get(class)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Distinct subjects typed with any class in the union of the subtrees
    /// of `classes`.
    pub fn instances_of_subtrees<'a, I>(&self, classes: I) -> Result<HashSet<TermId>, SchemaError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut all = BTreeSet::new();
        for c in classes {
            all.extend(self.subtree_of(c)?);
        }
        Ok(all
            .iter()
            .flat_map(|c| self.direct_instances(c).iter().copied())
            .collect())
    }
}

/// Infers the schema summary of a store. Deterministic.
pub fn infer_schema(store: &TripleStore) -> SchemaSummary {
    let type_pid = store.lookup_iri(RDF_TYPE);
    let subclass_pid = store.lookup_iri(RDFS_SUBCLASS_OF);

    let mut class_names: BTreeSet<String> = BTreeSet::new();
    let mut typing = Typing::default();

    if let Some(pid) = type_pid {
        for &pos in store.positions_with_predicate(pid) {
            let t = store.encoded_at(pos);
            let Some(object) = store.term(t.object).as_iri() else {
                continue;
            };
            if vocab::is_meta_class(object) {
                if object == OWL_CLASS || object == RDFS_CLASS {
                    if let Some(declared) = store.term(t.subject).as_iri() {
                        if !vocab::is_meta_class(declared) {
                            class_names.insert(declared.to_owned());
                        }
                    }
                }
                continue;
            }
            class_names.insert(object.to_owned());
            typing
                .types_of
                .entry(t.subject)
                .or_default()
                .push(object.to_owned());
            typing
                .instances_of
                .entry(object.to_owned())
                .or_default()
                .push(t.subject);
        }
    }
    for types in typing.types_of.values_mut() {
        types.sort();
    }
    for subjects in typing.instances_of.values_mut() {
        subjects.sort();
    }

    let mut edges: BTreeSet<SubclassEdge> = BTreeSet::new();
    let mut subclass_statement_count = 0;
    if let Some(pid) = subclass_pid {
        for &pos in store.positions_with_predicate(pid) {
            let t = store.resolve(store.encoded_at(pos));
            let (Some(child), Some(parent)) = (t.subject.as_iri(), t.object.as_iri()) else {
                continue;
            };
            if vocab::is_meta_class(child) || vocab::is_meta_class(parent) {
                continue;
            }
            subclass_statement_count += 1;
            class_names.insert(child.to_owned());
            class_names.insert(parent.to_owned());
            edges.insert(SubclassEdge {
                parent: parent.to_owned(),
                child: child.to_owned(),
            });
        }
    }

    let broken_edges = break_cycles(&mut edges);
    let warnings = broken_edges
        .iter()
        .map(|e| {
            format!(
                "removed subClassOf edge {} -> {} to break a cycle",
                e.child, e.parent
            )
        })
        .collect();

    let class_hierarchy = {
        let mut h: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for e in &edges {
            h.entry(e.parent.clone())
                .or_default()
                .insert(e.child.clone());
        }
        h
    };

    let classes = class_infos(&class_names, &edges, &typing);
    let properties = property_infos(store, &typing);

    SchemaSummary {
        classes,
        class_hierarchy,
        properties,
        subclass_statement_count,
        broken_edges,
        warnings,
        typed_subject_count: typing.types_of.len() as u64,
        typing,
    }
}

/// Removes edges until the graph is acyclic. For each cycle found (in a
/// deterministic DFS order) the lexicographically largest edge by
/// (parent, child) is dropped. Returns the dropped edges in removal order.
pub fn break_cycles(edges: &mut BTreeSet<SubclassEdge>) -> Vec<SubclassEdge> {
    let mut removed = Vec::new();
    while let Some(cycle) = find_cycle(edges) {
        let worst = cycle
            .into_iter()
            .max()
            .expect("cycles have at least one edge");
        edges.remove(&worst);
        removed.push(worst);
    }
    removed
}

fn find_cycle(edges: &BTreeSet<SubclassEdge>) -> Option<Vec<SubclassEdge>> {
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in edges {
        adjacency.entry(&e.parent).or_default().push(&e.child);
        adjacency.entry(&e.child).or_default();
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Active,
        Done,
    }
    let mut marks: HashMap<&str, Mark> = adjacency.keys().map(|&k| (k, Mark::Fresh)).collect();
    for &start in adjacency.keys() {
        if marks[start] != Mark::Fresh {
            continue;
        }
        // explicit stack of (node, next child index)
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        marks.insert(start, Mark::Active);
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let children = &adjacency[node];
            if *next < children.len() {
                let child = children[*next];
                *next += 1;
                match marks[child] {
                    Mark::Fresh => {
                        marks.insert(child, Mark::Active);
                        stack.push((child, 0));
                    }
                    Mark::Active => {
                        let from = stack
                            .iter()
                            .position(|(n, _)| *n == child)
                            .expect("active node on stack");
                        let path: Vec<&str> = stack[from..].iter().map(|(n, _)| *n).collect();
                        let mut cycle: Vec<SubclassEdge> = path
                            .windows(2)
                            .map(|w| SubclassEdge {
                                parent: w[0].to_owned(),
                                child: w[1].to_owned(),
                            })
                            .collect();
                        cycle.push(SubclassEdge {
                            parent: node.to_owned(),
                            child: child.to_owned(),
                        });
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                marks.insert(node, Mark::Done);
                stack.pop();
            }
        }
    }
    None
}

fn class_infos(
    names: &BTreeSet<String>,
    edges: &BTreeSet<SubclassEdge>,
    typing: &Typing,
) -> BTreeMap<String, ClassInfo> {
    let index: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let n = names.len();
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in edges {
        let (p, c) = (index[e.parent.as_str()], index[e.child.as_str()]);
        parents[c].push(p);
        children[p].push(c);
    }

    // ancestors-or-self per class, parents resolved before children
    let mut pending: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut queue: Vec<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
    let mut ancestors: Vec<Vec<usize>> = vec![Vec::new(); n];
    while let Some(c) = queue.pop() {
        let mut acc = vec![c];
        for &p in &parents[c] {
            acc.extend_from_slice(&ancestors[p]);
        }
        acc.sort_unstable();
        acc.dedup();
        ancestors[c] = acc;
        for &child in &children[c] {
            pending[child] -= 1;
            if pending[child] == 0 {
                queue.push(child);
            }
        }
    }

    let mut direct = vec![0u64; n];
    let mut transitive = vec![0u64; n];
    let mut reach: Vec<usize> = Vec::new();
    for types in typing.types_of.values() {
        reach.clear();
        for t in types {
            let c = index[t.as_str()];
            direct[c] += 1;
            reach.extend_from_slice(&ancestors[c]);
        }
        reach.sort_unstable();
        reach.dedup();
        for &c in &reach {
            transitive[c] += 1;
        }
    }

    let by_index: Vec<&String> = names.iter().collect();
    names
        .iter()
        .enumerate()
        .map(|(i, iri)| {
            let info = ClassInfo {
                iri: iri.clone(),
                direct_instance_count: direct[i],
                transitive_instance_count: transitive[i],
                superclasses: parents[i].iter().map(|&p| by_index[p].clone()).collect(),
                subclasses: children[i].iter().map(|&c| by_index[c].clone()).collect(),
            };
            (iri.clone(), info)
        })
        .collect()
}

#[derive(Default)]
struct ValueRange {
    count: u64,
    min: f64,
    max: f64,
}

impl ValueRange {
    fn add(&mut self, v: f64) {
        if self.count == 0 {
            self.min = v;
            self.max = v;
        } else {
            self.min = self.min.min(v);
            self.max = self.max.max(v);
        }
        self.count += 1;
    }
}

fn declared(store: &TripleStore, property: TermId, predicate: Option<TermId>) -> BTreeSet<String> {
    let Some(pid) = predicate else {
        return BTreeSet::new();
    };
    store
        .positions_with_subject(property)
        .iter()
        .map(|&pos| store.encoded_at(pos))
        .filter(|t| t.predicate == pid)
        .filter_map(|t| store.term(t.object).as_iri().map(str::to_owned))
        .collect()
}

fn property_infos(store: &TripleStore, typing: &Typing) -> BTreeMap<String, PropertyInfo> {
    let domain_pid = store.lookup_iri(RDFS_DOMAIN);
    let range_pid = store.lookup_iri(RDFS_RANGE);
    let mut out = BTreeMap::new();
    for pid in store.predicate_ids() {
        let Some(iri) = store.term(pid).as_iri() else {
            continue;
        };
        let positions = store.positions_with_predicate(pid);
        let mut subjects: Vec<TermId> = Vec::with_capacity(positions.len());
        let mut literal_count = 0u64;
        let mut numeric = ValueRange::default();
        let mut temporal = ValueRange::default();
        let mut tally = MalformedTally::default();
        let mut domains = BTreeSet::new();
        let mut ranges = BTreeSet::new();
        for &pos in positions {
            let t = store.encoded_at(pos);
            subjects.push(t.subject);
            match store.term(t.object) {
                Term::Literal(lit) => {
                    literal_count += 1;
                    ranges.insert(lit.effective_datatype().to_owned());
                    match literal_value(lit, &mut tally) {
                        TypedValue::Numeric(v) => numeric.add(v),
                        TypedValue::Temporal(ms) => temporal.add(ms as f64),
                        TypedValue::Other => {}
                    }
                }
                _ => {
                    if let Some(types) = typing.types_of.get(&t.object) {
                        ranges.extend(types.iter().cloned());
                    }
                }
            }
        }
        subjects.sort_unstable();
        subjects.dedup();
        for s in &subjects {
            if let Some(types) = typing.types_of.get(s) {
                domains.extend(types.iter().cloned());
            }
        }
        let triple_count = positions.len() as u64;
        let kind = if literal_count == triple_count {
            PropertyKind::Datatype
        } else if literal_count == 0 {
            PropertyKind::Object
        } else {
            PropertyKind::Mixed
        };
        let literal_kind = if literal_count == 0 {
            None
        } else if numeric.count > 0 && temporal.count == 0 {
            Some(LiteralKind::Numeric)
        } else if temporal.count > 0 && numeric.count == 0 {
            Some(LiteralKind::Temporal)
        } else {
            Some(LiteralKind::Other)
        };
        let (value_count, value_min, value_max) = match literal_kind {
            Some(LiteralKind::Numeric) => (
                numeric.count,
                Some(TypedValue::Numeric(numeric.min)),
                Some(TypedValue::Numeric(numeric.max)),
            ),
            Some(LiteralKind::Temporal) => (
                temporal.count,
                Some(TypedValue::Temporal(temporal.min as i64)),
                Some(TypedValue::Temporal(temporal.max as i64)),
            ),
            _ => (0, None, None),
        };
        out.insert(
            iri.to_owned(),
            PropertyInfo {
                iri: iri.to_owned(),
                kind,
                literal_kind,
                triple_count,
                distinct_subject_count: subjects.len() as u64,
                literal_count,
                value_count,
                malformed_literal_count: tally.malformed,
                domains,
                ranges,
                declared_domains: declared(store, pid, domain_pid),
                declared_ranges: declared(store, pid, range_pid),
                value_min,
                value_max,
            },
        );
    }
    out
}
