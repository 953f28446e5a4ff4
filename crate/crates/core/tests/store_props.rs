//! Store invariants against linear scans over random inputs.

use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use synopsviz_core::{ingest, RdfFormat, Term, Triple, TripleStore};

fn term_iri(i: u8) -> String {
    format!("<http://ex/r{i}>")
}

fn object() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u8..12).prop_map(term_iri),
        (0u8..4).prop_map(|i| format!("_:n{i}")),
        (-50i32..50).prop_map(|v| format!("\"{v}\"^^<http://www.w3.org/2001/XMLSchema#integer>")),
        "[a-z \\\\\"é\n]{0,6}".prop_map(|s| format!(
            "\"{}\"",
            s.replace('\\', "\\\\")
                .replace('"', "\\\"")
                .replace('\n', "\\n")
        )),
        "[a-z]{1,5}".prop_map(|s| format!("\"{s}\"@en")),
    ]
}

fn line() -> impl Strategy<Value = String> {
    prop_oneof![
        8 => (prop_oneof![(0u8..12).prop_map(term_iri), (0u8..4).prop_map(|i| format!("_:n{i}"))], (0u8..5).prop_map(|i| format!("<http://ex/p{i}>")), object())
            .prop_map(|(s, p, o)| format!("{s} {p} {o} .")),
        1 => Just("<http://ex/broken> <http://ex/p0> .".to_owned()),
        1 => Just("\"lit\" <http://ex/p0> <http://ex/r1> .".to_owned()),
    ]
}

fn load(lines: &[String]) -> TripleStore {
    ingest(lines.join("\n").as_bytes(), RdfFormat::NTriples).unwrap()
}

proptest! {
    #[test]
    fn report_accounts_for_every_statement(lines in prop::collection::vec(line(), 0..80)) {
        let store = load(&lines);
        let r = store.report();
        prop_assert_eq!(r.statements as usize, lines.len());
        prop_assert_eq!(r.parsed + r.skipped + r.duplicates, r.statements);
        prop_assert_eq!(r.parsed as usize, store.len());
    }

    #[test]
    fn indexes_match_linear_scans(lines in prop::collection::vec(line(), 0..80)) {
        let store = load(&lines);
        let all: Vec<Triple> = store.triples().map(|t| t.to_owned()).collect();
        prop_assert_eq!(all.iter().collect::<HashSet<_>>().len(), all.len());
        for (id, term) in store.dictionary().iter() {
            let scan = |f: &dyn Fn(&Triple) -> bool| -> BTreeSet<Triple> { all.iter().filter(|t| f(t)).cloned().collect() };
            let by = |positions: &[u32]| -> BTreeSet<Triple> { positions.iter().map(|&p| store.triple_at(p).to_owned()).collect() };
            prop_assert_eq!(by(store.positions_with_subject(id)), scan(&|t| &t.subject == term));
            prop_assert_eq!(by(store.positions_with_predicate(id)), scan(&|t| &t.predicate == term));
            prop_assert_eq!(by(store.positions_with_object(id)), scan(&|t| &t.object == term));
        }
        for i in 0..5 {
            let p = format!("http://ex/p{i}");
            let got: Vec<Triple> = store.triples_with_predicate(&p).iter().map(|t| t.to_owned()).collect();
            let mut want: Vec<Triple> = all.iter().filter(|t| t.predicate == Term::iri(p.clone())).cloned().collect();
            want.sort_by(|a, b| (a.subject.lexical(), a.object.lexical()).cmp(&(b.subject.lexical(), b.object.lexical())).then(a.cmp(b)));
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn ntriples_round_trip(lines in prop::collection::vec(line(), 0..80)) {
        let store = load(&lines);
        let mut out = Vec::new();
        store.write_ntriples(&mut out).unwrap();
        let again = ingest(&out[..], RdfFormat::NTriples).unwrap();
        prop_assert_eq!(again.report().skipped, 0);
        let a: BTreeSet<Triple> = store.triples().map(|t| t.to_owned()).collect();
        let b: BTreeSet<Triple> = again.triples().map(|t| t.to_owned()).collect();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn duplicate_lines_are_counted() {
    let line = "<http://ex/a> <http://ex/p> \"5\"^^<http://www.w3.org/2001/XMLSchema#integer> .";
    let store = ingest(format!("{line}\n{line}\n").as_bytes(), RdfFormat::NTriples).unwrap();
    assert_eq!(store.len(), 1);
    assert_eq!(store.report().duplicates, 1);
}

#[test]
fn turtle_errors_carry_positions() {
    let err = ingest(
        "@prefix ex: <http://ex/> .\nex:a ex:p ex:b ;\n  ex:q \"unterminated .\n".as_bytes(),
        RdfFormat::Turtle,
    )
    .unwrap_err();
    match err {
        synopsviz_core::IngestError::TurtleSyntax { line, .. } => assert!(line >= 2, "line {line}"),
        other => panic!("unexpected {other:?}"),
    }
}
