//! Seeded random workloads.

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use synopsviz_core::vocab::{
    OWL_CLASS, OWL_SAME_AS, RDFS_CLASS, RDFS_LABEL, RDFS_SUBCLASS_OF, RDF_TYPE, XSD_DATE,
    XSD_DECIMAL, XSD_INTEGER,
};
use synopsviz_core::{Literal, PointSet, Term, Triple, ValueKind};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn ex(kind: &str, i: usize) -> Term {
    Term::iri(format!("http://ex.org/{kind}{i}"))
}

/// Random triples mixing instance data, typing, subclass statements,
/// `owl:sameAs` links, class declarations, blank nodes and literals of
/// several kinds. Duplicates are likely and intended.
pub fn random_triples(r: &mut StdRng, max_triples: usize) -> Vec<Triple> {
    let n = r.random_range(0..=max_triples);
    let entities = r.random_range(1..=(n / 3).max(2));
    let classes = r.random_range(1..=12);
    let predicates = r.random_range(1..=8);
    let blanks = r.random_range(1..=5);
    let node = |r: &mut StdRng| -> Term {
        match r.random_range(0..10) {
            0 => Term::blank(format!("x{}", r.random_range(0..blanks))),
            1 => ex("C", r.random_range(0..classes)),
            _ => ex("e", r.random_range(0..entities)),
        }
    };
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let s = node(r);
        let (p, o) = match r.random_range(0..20) {
            0..=3 => (Term::iri(RDF_TYPE), ex("C", r.random_range(0..classes))),
            4 => (
                Term::iri(RDFS_SUBCLASS_OF),
                ex("C", r.random_range(0..classes)),
            ),
            5 => (Term::iri(OWL_SAME_AS), node(r)),
            6 => (
                Term::iri(RDF_TYPE),
                Term::iri(*[OWL_CLASS, RDFS_CLASS].choose(r).unwrap()),
            ),
            7 => (
                Term::iri(RDFS_LABEL),
                Term::Literal(Literal::lang(format!("l{}", r.random_range(0..50)), "en")),
            ),
            _ => {
                let p = ex("p", r.random_range(0..predicates));
                let o = match r.random_range(0..6) {
                    0 | 1 => node(r),
                    2 => Term::Literal(Literal::typed(
                        r.random_range(-1000..1000).to_string(),
                        XSD_INTEGER,
                    )),
                    3 => Term::Literal(Literal::typed(
                        format!("{:.2}", r.random_range(-50.0..50.0)),
                        XSD_DECIMAL,
                    )),
                    4 => Term::Literal(Literal::typed(
                        format!(
                            "{:04}-{:02}-{:02}",
                            r.random_range(1900..2030),
                            r.random_range(1..=12),
                            r.random_range(1..=28)
                        ),
                        XSD_DATE,
                    )),
                    _ => Term::Literal(Literal::simple(format!("s{}", r.random_range(0..100)))),
                };
                (p, o)
            }
        };
        let s = if s.is_literal() { ex("e", 0) } else { s };
        out.push(Triple::new(s, p, o).expect("generated triples are well formed"));
    }
    out
}

pub fn to_ntriples(triples: &[Triple]) -> String {
    let mut s = String::new();
    for t in triples {
        s.push_str(&t.to_string());
        s.push('\n');
    }
    s
}

/// A random class DAG over `C0..Cn` with multiple inheritance, injected
/// subclass cycles, and instance typing.
pub fn random_class_hierarchy(r: &mut StdRng) -> Vec<Triple> {
    let classes = r.random_range(1..=15);
    let instances = r.random_range(0..=60);
    let mut out = Vec::new();
    let edges = r.random_range(0..=classes * 2);
    for _ in 0..edges {
        let child = r.random_range(0..classes);
        let parent = r.random_range(0..classes);
        // mostly downward edges, so real hierarchies form; the rest create cycles
        let (child, parent) = if r.random_bool(0.8) && child != parent {
            (child.max(parent), child.min(parent))
        } else {
            (child, parent)
        };
        out.push(
            Triple::new(ex("C", child), Term::iri(RDFS_SUBCLASS_OF), ex("C", parent)).unwrap(),
        );
    }
    for _ in 0..r.random_range(0..=3) {
        out.push(
            Triple::new(
                ex("C", r.random_range(0..classes)),
                Term::iri(RDF_TYPE),
                Term::iri(OWL_CLASS),
            )
            .unwrap(),
        );
    }
    for i in 0..instances {
        for _ in 0..r.random_range(0..=3) {
            let subject = if r.random_bool(0.1) {
                Term::blank(format!("i{i}"))
            } else {
                ex("i", i)
            };
            out.push(
                Triple::new(
                    subject,
                    Term::iri(RDF_TYPE),
                    ex("C", r.random_range(0..classes)),
                )
                .unwrap(),
            );
        }
    }
    out
}

/// A random point set of at most `max_points` points, drawn from one of
/// several value distributions (continuous, heavily tied, constant,
/// wide-range, temporal).
pub fn random_point_set(r: &mut StdRng, max_points: usize) -> PointSet {
    let n = r.random_range(1..=max_points);
    let subjects = r.random_range(1..=n);
    let shape = r.random_range(0..6);
    let kind = if shape == 5 {
        ValueKind::Temporal
    } else {
        ValueKind::Numeric
    };
    let constant = r.random_range(-10.0..10.0);
    let pairs: Vec<(Term, f64)> = (0..n)
        .map(|_| {
            let v = match shape {
                0 => r.random_range(-1000.0..1000.0),
                1 => f64::from(r.random_range(0..10)),
                2 => constant,
                3 => r.random_range(-1.0..1.0) * 10f64.powi(r.random_range(-6..9)),
                4 => (r.random_range(0.0f64..1.0)).powi(4) * 1e5,
                _ => {
                    (r.random_range(-2_000_000_000_000i64..4_000_000_000_000) / 1000 * 1000) as f64
                }
            };
            (
                Term::iri(format!("http://ex.org/s{}", r.random_range(0..subjects))),
                v,
            )
        })
        .collect();
    PointSet::from_pairs(kind, pairs)
}

/// `n` N-Triples lines over a synthetic population dataset.
pub fn synthetic_ntriples(n: usize) -> String {
    let mut s = String::with_capacity(n * 90);
    let mut r = rng(7);
    for i in 0..n {
        let subject = i / 4;
        match i % 4 {
            0 => s.push_str(&format!(
                "<http://ex.org/e{subject}> <{RDF_TYPE}> <http://ex.org/C{}> .\n",
                subject % 50
            )),
            1 => s.push_str(&format!(
                "<http://ex.org/e{subject}> <http://ex.org/value> \"{}\"^^<{XSD_INTEGER}> .\n",
                r.random_range(0..1_000_000)
            )),
            2 => s.push_str(&format!(
                "<http://ex.org/e{subject}> <http://ex.org/link> <http://ex.org/e{}> .\n",
                r.random_range(0..n / 4 + 1)
            )),
            _ => s.push_str(&format!(
                "<http://ex.org/e{subject}> <{RDFS_LABEL}> \"entity {subject}\"@en .\n"
            )),
        }
    }
    s
}
