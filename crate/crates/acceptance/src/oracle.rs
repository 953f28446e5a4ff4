//! Brute-force reference computations. Each works from raw inputs by
//! naive scans and shares no code with the engine beyond data types.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use synopsviz_core::hierarchy::{HierarchyConfig, HierarchyTree, Strategy};
use synopsviz_core::schema::SchemaSummary;
use synopsviz_core::stats::{DataLevel, DatasetStats, Ranked, SchemaLevel, StructureLevel};
use synopsviz_core::vocab::{
    META_CLASSES, OWL_CLASS, OWL_SAME_AS, RDFS_CLASS, RDFS_SUBCLASS_OF, RDF_TYPE,
};
use synopsviz_core::{PointSet, Term, Triple};

fn is_meta(t: &Term) -> bool {
    t.as_iri().is_some_and(|i| META_CLASSES.contains(&i))
}

fn iri_is(t: &Term, iri: &str) -> bool {
    t.as_iri() == Some(iri)
}

fn ranked(counts: BTreeMap<String, u64>, top_n: usize) -> Vec<Ranked> {
    let mut v: Vec<Ranked> = counts
        .into_iter()
        .map(|(iri, count)| Ranked { iri, count })
        .collect();
    // stable sort over IRI-ordered input keeps ties in IRI order
    v.sort_by_key(|r| std::cmp::Reverse(r.count));
    v.truncate(top_n);
    v
}

/// Classes by the inference rule: non-meta `rdf:type` objects, subjects
/// declared `owl:Class`/`rdfs:Class`, and both ends of `rdfs:subClassOf`
/// statements between non-meta IRIs.
pub fn classes(triples: &BTreeSet<Triple>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for t in triples {
        if iri_is(&t.predicate, RDF_TYPE) && t.object.is_iri() {
            if !is_meta(&t.object) {
                out.insert(t.object.lexical().to_owned());
            } else if (iri_is(&t.object, OWL_CLASS) || iri_is(&t.object, RDFS_CLASS))
                && t.subject.is_iri()
                && !is_meta(&t.subject)
            {
                out.insert(t.subject.lexical().to_owned());
            }
        }
        if iri_is(&t.predicate, RDFS_SUBCLASS_OF)
            && t.subject.is_iri()
            && t.object.is_iri()
            && !is_meta(&t.subject)
            && !is_meta(&t.object)
        {
            out.insert(t.subject.lexical().to_owned());
            out.insert(t.object.lexical().to_owned());
        }
    }
    out
}

fn is_typing(t: &Triple) -> bool {
    iri_is(&t.predicate, RDF_TYPE) && t.object.is_iri() && !is_meta(&t.object)
}

/// Every field of [`DatasetStats`] by naive scans over the distinct input
/// triples.
pub fn dataset_stats(input: &[Triple], top_n: usize) -> DatasetStats {
    let triples: BTreeSet<Triple> = input.iter().cloned().collect();
    let classes = classes(&triples);

    let subjects: BTreeSet<&Term> = triples.iter().map(|t| &t.subject).collect();
    let predicates: BTreeSet<&Term> = triples.iter().map(|t| &t.predicate).collect();
    let objects: BTreeSet<&Term> = triples.iter().map(|t| &t.object).collect();
    let nodes: BTreeSet<&Term> = subjects.union(&objects).copied().collect();
    let blank = nodes.iter().filter(|t| t.is_blank()).count() as u64;
    let entities: Vec<&Term> = nodes
        .iter()
        .copied()
        .filter(|t| {
            t.is_iri() && !predicates.contains(t) && !classes.contains(t.lexical()) && !is_meta(t)
        })
        .collect();
    let typed = entities
        .iter()
        .filter(|e| triples.iter().any(|t| is_typing(t) && &t.subject == **e))
        .count() as u64;

    let data_level = DataLevel {
        triple_count: triples.len() as u64,
        distinct_subjects: subjects.len() as u64,
        distinct_predicates: predicates.len() as u64,
        distinct_objects: objects.len() as u64,
        literal_count: triples.iter().filter(|t| t.object.is_literal()).count() as u64,
        blank_node_count: blank,
        iri_entity_count: entities.len() as u64,
        same_as_triple_count: triples
            .iter()
            .filter(|t| iri_is(&t.predicate, OWL_SAME_AS))
            .count() as u64,
        typed_entity_count: typed,
        untyped_entity_count: entities.len() as u64 - typed,
    };

    let mut kinds = [0u64; 3];
    let mut property_counts = BTreeMap::new();
    for p in &predicates {
        let objs: Vec<&Term> = triples
            .iter()
            .filter(|t| &&t.predicate == p)
            .map(|t| &t.object)
            .collect();
        let literals = objs.iter().filter(|o| o.is_literal()).count();
        kinds[if literals == objs.len() {
            0
        } else if literals == 0 {
            1
        } else {
            2
        }] += 1;
        property_counts.insert(p.lexical().to_owned(), objs.len() as u64);
    }
    let class_counts: BTreeMap<String, u64> = classes
        .iter()
        .map(|c| {
            let direct: BTreeSet<&Term> = triples
                .iter()
                .filter(|t| is_typing(t) && t.object.lexical() == c)
                .map(|t| &t.subject)
                .collect();
            (c.clone(), direct.len() as u64)
        })
        .collect();
    let schema_level = SchemaLevel {
        class_count: classes.len() as u64,
        property_count: predicates.len() as u64,
        datatype_property_count: kinds[0],
        object_property_count: kinds[1],
        mixed_property_count: kinds[2],
        top_classes: ranked(class_counts, top_n),
        top_properties: ranked(property_counts, top_n),
    };

    let edges: Vec<&Triple> = triples
        .iter()
        .filter(|t| t.subject.is_iri() && t.object.is_iri())
        .collect();
    let mut out_deg: BTreeMap<String, u64> = BTreeMap::new();
    let mut in_deg: BTreeMap<String, u64> = BTreeMap::new();
    for e in &edges {
        *out_deg.entry(e.subject.lexical().to_owned()).or_default() += 1;
        *in_deg.entry(e.object.lexical().to_owned()).or_default() += 1;
    }
    let avg = |n: usize| {
        if n == 0 {
            0.0
        } else {
            edges.len() as f64 / n as f64
        }
    };
    let structure_level = StructureLevel {
        edge_triple_count: edges.len() as u64,
        avg_in_degree: avg(in_deg.len()),
        avg_out_degree: avg(out_deg.len()),
        degrees_undefined: edges.is_empty(),
        top_in_degree_entities: ranked(in_deg, top_n),
        top_out_degree_entities: ranked(out_deg, top_n),
    };

    DatasetStats {
        data_level,
        schema_level,
        structure_level,
    }
}

/// Lists every disagreement between the engine's stats and the oracle's.
pub fn diff_stats(got: &DatasetStats, want: &DatasetStats) -> Vec<String> {
    let mut out = Vec::new();
    if got.data_level != want.data_level {
        out.push(format!(
            "dataLevel: got {:?}, want {:?}",
            got.data_level, want.data_level
        ));
    }
    if got.schema_level != want.schema_level {
        out.push(format!(
            "schemaLevel: got {:?}, want {:?}",
            got.schema_level, want.schema_level
        ));
    }
    if got.structure_level != want.structure_level {
        out.push(format!(
            "structureLevel: got {:?}, want {:?}",
            got.structure_level, want.structure_level
        ));
    }
    out
}

/// Checks the engine's schema against brute force: the hierarchy is
/// acyclic, every removed edge was the largest edge of a cycle when it was
/// removed, and transitive instance counts equal distinct-subject counts
/// over the remaining hierarchy.
pub fn check_schema(input: &[Triple], summary: &SchemaSummary) -> Vec<String> {
    let triples: BTreeSet<Triple> = input.iter().cloned().collect();
    let mut problems = Vec::new();

    let original: BTreeSet<(String, String)> = triples
        .iter()
        .filter(|t| {
            iri_is(&t.predicate, RDFS_SUBCLASS_OF)
                && t.subject.is_iri()
                && t.object.is_iri()
                && !is_meta(&t.subject)
                && !is_meta(&t.object)
        })
        .map(|t| {
            (
                t.object.lexical().to_owned(),
                t.subject.lexical().to_owned(),
            )
        })
        .collect();
    let kept: BTreeSet<(String, String)> = summary
        .class_hierarchy
        .iter()
        .flat_map(|(p, cs)| cs.iter().map(move |c| (p.clone(), c.clone())))
        .collect();
    let broken: Vec<(String, String)> = summary
        .broken_edges
        .iter()
        .map(|e| (e.parent.clone(), e.child.clone()))
        .collect();

    if !kept.is_subset(&original) {
        problems.push("hierarchy contains edges not in the input".to_owned());
    }
    if kept.len() + broken.len() != original.len()
        || broken
            .iter()
            .any(|e| kept.contains(e) || !original.contains(e))
    {
        problems.push(format!(
            "kept {} + broken {} != input edges {}",
            kept.len(),
            broken.len(),
            original.len()
        ));
    }
    if has_cycle(&kept) {
        problems.push("hierarchy still has a cycle".to_owned());
    }
    // when edge i was removed, the graph held the kept edges plus broken[i..]
    for (i, e) in broken.iter().enumerate() {
        let graph: BTreeSet<(String, String)> = kept.iter().chain(&broken[i..]).cloned().collect();
        // edge (parent, child) means child -> parent; a cycle returns from
        // parent to child using only smaller edges
        let smaller: BTreeSet<(String, String)> = graph.into_iter().filter(|x| x < e).collect();
        if !reaches(&smaller, &e.0, &e.1) {
            problems.push(format!(
                "removed edge {e:?} was not the largest edge of a cycle"
            ));
        }
    }

    let expected = classes(&triples);
    let got: BTreeSet<String> = summary.classes.keys().cloned().collect();
    if got != expected {
        problems.push(format!("classes: got {got:?}, want {expected:?}"));
    }
    for c in &expected {
        let mut subtree = BTreeSet::from([c.clone()]);
        let mut frontier = vec![c.clone()];
        while let Some(x) = frontier.pop() {
            for (p, ch) in &kept {
                if *p == x && subtree.insert(ch.clone()) {
                    frontier.push(ch.clone());
                }
            }
        }
        let transitive: BTreeSet<&Term> = triples
            .iter()
            .filter(|t| is_typing(t) && subtree.contains(t.object.lexical()))
            .map(|t| &t.subject)
            .collect();
        let direct: BTreeSet<&Term> = triples
            .iter()
            .filter(|t| is_typing(t) && t.object.lexical() == c)
            .map(|t| &t.subject)
            .collect();
        if let Some(info) = summary.classes.get(c) {
            if info.transitive_instance_count != transitive.len() as u64
                || info.direct_instance_count != direct.len() as u64
            {
                problems.push(format!(
                    "{c}: got direct {} transitive {}, want {} {}",
                    info.direct_instance_count,
                    info.transitive_instance_count,
                    direct.len(),
                    transitive.len()
                ));
            }
        }
    }
    problems
}

/// Whether `to` can be reached from `from` following child -> parent
/// direction, i.e. walking edges (parent, child) from child to parent.
fn reaches(edges: &BTreeSet<(String, String)>, from: &str, to: &str) -> bool {
    let mut seen = BTreeSet::from([from.to_owned()]);
    let mut stack = vec![from.to_owned()];
    while let Some(x) = stack.pop() {
        if x == to {
            return true;
        }
        for (p, c) in edges {
            if *c == x && seen.insert(p.clone()) {
                stack.push(p.clone());
            }
        }
    }
    false
}

fn has_cycle(edges: &BTreeSet<(String, String)>) -> bool {
    // Kahn's algorithm
    let mut indeg: BTreeMap<&str, usize> = BTreeMap::new();
    for (p, c) in edges {
        indeg.entry(p).or_default();
        *indeg.entry(c).or_default() += 1;
    }
    let mut ready: Vec<&str> = indeg
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&n, _)| n)
        .collect();
    let mut removed = 0;
    while let Some(n) = ready.pop() {
        removed += 1;
        for (p, c) in edges {
            if p == n {
                let d = indeg.get_mut(c.as_str()).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(c);
                }
            }
        }
    }
    removed != indeg.len()
}

/// A node of the reference binning: id, value range and member points as
/// (subject, value, source).
#[derive(Debug)]
pub struct RefNode {
    pub id: String,
    pub lo: f64,
    pub hi: f64,
    pub points: Vec<(String, f64, u32)>,
    pub children: Vec<RefNode>,
}

/// Bins the points directly from the definitions, by filtering each
/// parent's members into its children.
pub fn reference_tree(ps: &PointSet, config: &HierarchyConfig) -> RefNode {
    let points: Vec<(String, f64, u32)> = ps
        .points()
        .iter()
        .map(|p| (ps.subject(p).lexical().to_owned(), p.value, p.source))
        .collect();
    let lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    bin(points, lo, hi, 0, String::new(), config)
}

fn bin(
    points: Vec<(String, f64, u32)>,
    lo: f64,
    hi: f64,
    depth: u32,
    id: String,
    c: &HierarchyConfig,
) -> RefNode {
    let mut node = RefNode {
        id,
        lo,
        hi,
        points,
        children: Vec::new(),
    };
    if depth >= c.levels || lo == hi {
        return node;
    }
    let k = c.fanout as usize;
    let mut groups = Vec::new();
    match c.strategy {
        Strategy::EqualWidth => {
            let w = (hi - lo) / k as f64;
            let b = |i: usize| {
                if i == k {
                    hi
                } else {
                    (lo + i as f64 * w).min(hi)
                }
            };
            for i in 0..k {
                let members: Vec<_> = node
                    .points
                    .iter()
                    .filter(|p| p.1 >= b(i) && (i == k - 1 || p.1 < b(i + 1)))
                    .cloned()
                    .collect();
                if !members.is_empty() {
                    groups.push((b(i), b(i + 1), members));
                }
            }
        }
        Strategy::EqualFrequency => {
            let mut sorted = node.points.clone();
            sorted.sort_by(|a, b| {
                a.1.total_cmp(&b.1)
                    .then_with(|| a.0.cmp(&b.0))
                    .then(a.2.cmp(&b.2))
            });
            let n = sorted.len();
            let slices: Vec<Vec<_>> = (0..k)
                .map(|i| sorted[i * n / k..(i + 1) * n / k].to_vec())
                .filter(|s| !s.is_empty())
                .collect();
            for (j, s) in slices.iter().enumerate() {
                let hi = match slices.get(j + 1) {
                    Some(next) => next[0].1,
                    None => s[s.len() - 1].1,
                };
                groups.push((s[0].1, hi, s.clone()));
            }
        }
    }
    for (i, (lo, hi, members)) in groups.into_iter().enumerate() {
        let id = if node.id.is_empty() {
            i.to_string()
        } else {
            format!("{}.{i}", node.id)
        };
        node.children.push(bin(members, lo, hi, depth + 1, id, c));
    }
    node
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Compares the engine's tree with the reference: structure, ranges, the
/// leaf partition, counts exactly, means and variances within relative
/// `tol` (variance scaled by the mean square to absorb cancellation).
pub fn check_hierarchy(tree: &HierarchyTree, reference: &RefNode, tol: f64) -> Vec<String> {
    let mut problems = Vec::new();
    walk(tree, reference, tol, &mut problems);
    problems
}

fn walk(tree: &HierarchyTree, r: &RefNode, tol: f64, problems: &mut Vec<String>) {
    let n = match tree.node(&r.id) {
        Ok(n) => n,
        Err(e) => {
            problems.push(format!("node {:?}: {e}", r.id));
            return;
        }
    };
    let values: Vec<f64> = r.points.iter().map(|p| p.1).collect();
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
    let mean_sq = values.iter().map(|v| v * v).sum::<f64>() / count;
    let mut fail = |what: String| problems.push(format!("node {:?}: {what}", r.id));
    if (n.lo, n.hi) != (r.lo, r.hi) {
        fail(format!(
            "range [{}, {}] vs [{}, {}]",
            n.lo, n.hi, r.lo, r.hi
        ));
    }
    if n.stats.count != values.len() as u64 {
        fail(format!("count {} vs {}", n.stats.count, values.len()));
    }
    let got_mean = n.stats.mean().unwrap_or(f64::NAN);
    if !close(got_mean, mean, tol) && (got_mean - mean).abs() > tol * mean_sq.sqrt() {
        fail(format!("mean {got_mean} vs {mean}"));
    }
    let got_var = n.stats.variance().unwrap_or(f64::NAN);
    if !close(got_var, var, tol) && (got_var - var).abs() > tol * mean_sq {
        fail(format!("variance {got_var} vs {var}"));
    }
    if n.child_count as usize != r.children.len() {
        fail(format!(
            "{} children vs {}",
            n.child_count,
            r.children.len()
        ));
        return;
    }
    if r.children.is_empty() {
        let mut got: Vec<u32> = match tree.points_of(&r.id) {
            Ok(ps) => ps.iter().map(|p| p.source).collect(),
            Err(e) => {
                fail(format!("points: {e}"));
                return;
            }
        };
        let mut want: Vec<u32> = r.points.iter().map(|p| p.2).collect();
        got.sort_unstable();
        want.sort_unstable();
        if got != want {
            fail("leaf members differ".to_owned());
        }
    }
    for c in &r.children {
        walk(tree, c, tol, problems);
    }
}

/// Checks that every internal node's aggregate is the merge of its
/// children's, reading only `children_of`. Exact for count, min, max,
/// sum and sum of squares; `tol` for mean and variance.
pub fn check_merge(tree: &HierarchyTree, tol: f64) -> Vec<String> {
    let mut problems = Vec::new();
    let mut stack = vec![String::new()];
    let mut nodes: HashMap<String, synopsviz_core::hierarchy::HierarchyNode> = HashMap::new();
    nodes.insert(String::new(), tree.root());
    while let Some(id) = stack.pop() {
        let parent = nodes[&id].clone();
        let children = tree.children_of(&id).expect("known node");
        if children.is_empty() {
            continue;
        }
        let count: u64 = children.iter().map(|c| c.stats.count).sum();
        let min = children
            .iter()
            .map(|c| c.stats.min)
            .fold(f64::INFINITY, f64::min);
        let max = children
            .iter()
            .map(|c| c.stats.max)
            .fold(f64::NEG_INFINITY, f64::max);
        let sum = children.iter().fold(0.0, |a, c| a + c.stats.sum);
        let sum_squares = children.iter().fold(0.0, |a, c| a + c.stats.sum_squares);
        let s = &parent.stats;
        if (s.count, s.min, s.max, s.sum, s.sum_squares) != (count, min, max, sum, sum_squares) {
            problems.push(format!(
                "node {id:?}: aggregate differs from merged children"
            ));
        }
        let mean = sum / count as f64;
        let var = (sum_squares / count as f64 - mean * mean).max(0.0);
        if !close(s.mean().unwrap(), mean, tol) || !close(s.variance().unwrap(), var, tol) {
            problems.push(format!(
                "node {id:?}: mean/variance differ from merged children"
            ));
        }
        for c in children {
            stack.push(c.node_id.clone());
            nodes.insert(c.node_id.clone(), c);
        }
    }
    problems
}
