//! Immutable, dictionary-encoded triple store.
//!
//! Terms are interned to dense [`TermId`]s. Triples are kept in first-seen
//! order and indexed by subject, predicate and object through compact
//! offset tables, so every access path is a slice lookup.

use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::ntriples;
use crate::term::{Term, Triple, TripleRef};
use crate::turtle;

const MAX_REPORTED_ERRORS: usize = 100;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unreadable source: {0}")]
    UnreadableSource(#[from] io::Error),
    #[error("turtle syntax error at line {line}, column {column}: {message}")]
    TurtleSyntax {
        line: u64,
        column: u64,
        message: String,
    },
    #[error("dataset exceeds the limit of {limit} triples")]
    TooManyTriples { limit: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum RdfFormat {
    NTriples,
    Turtle,
}

impl RdfFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        Self::from_name(&ext)
    }

    /// Accepts extensions and common spellings (`nt`, `ntriples`, `ttl`, ...).
    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "nt" | "ntriples" | "n-triples" => Some(RdfFormat::NTriples),
            "ttl" | "turtle" => Some(RdfFormat::Turtle),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LineError {
    pub line: u64,
    pub message: String,
}

/// Outcome of an ingest. In N-Triples mode
/// `parsed + skipped + duplicates == statements`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestReport {
    pub format: RdfFormat,
    pub statements: u64,
    pub parsed: u64,
    pub skipped: u64,
    pub duplicates: u64,
    pub errors: Vec<LineError>,
    pub errors_truncated: bool,
    pub warnings: Vec<String>,
}

impl IngestReport {
    fn new(format: RdfFormat) -> Self {
        IngestReport {
            format,
            statements: 0,
            parsed: 0,
            skipped: 0,
            duplicates: 0,
            errors: Vec::new(),
            errors_truncated: false,
            warnings: Vec::new(),
        }
    }

    pub fn is_empty_dataset(&self) -> bool {
        self.parsed == 0
    }

    fn record_skip(&mut self, line: u64, message: String) {
        self.skipped += 1;
        if self.errors.len() < MAX_REPORTED_ERRORS {
            self.errors.push(LineError { line, message });
        } else {
            self.errors_truncated = true;
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IngestOptions {
    pub max_triples: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TermId(pub u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A triple as three interned term ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EncodedTriple {
    pub subject: TermId,
    pub predicate: TermId,
    pub object: TermId,
}

/// Bidirectional term/id mapping.
#[derive(Debug, Default)]
pub struct TermDictionary {
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
}

impl TermDictionary {
    fn intern(&mut self, term: Term) -> TermId {
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = TermId(u32::try_from(self.terms.len()).expect("term dictionary overflow"));
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    pub fn get(&self, id: TermId) -> &Term {
        &self.terms[id.index()]
    }

    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, &Term)> {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, t)| (TermId(i as u32), t))
    }
}

/// Offsets table mapping a term id to the positions of the triples that use
/// it in one slot.
#[derive(Debug, Default)]
struct PositionIndex {
    offsets: Vec<u32>,
    entries: Vec<u32>,
}

impl PositionIndex {
    fn build(
        term_count: usize,
        triples: &[EncodedTriple],
        slot: impl Fn(&EncodedTriple) -> TermId,
    ) -> Self {
        let mut offsets = vec![0u32; term_count + 1];
        for t in triples {
            offsets[slot(t).index() + 1] += 1;
        }
        for i in 1..offsets.len() {
            offsets[i] += offsets[i - 1];
        }
        let mut fill = offsets.clone();
        let mut entries = vec![0u32; triples.len()];
        for (pos, t) in triples.iter().enumerate() {
            let at = &mut fill[slot(t).index()];
            entries[*at as usize] = pos as u32;
            *at += 1;
        }
        PositionIndex { offsets, entries }
    }

    fn get(&self, id: TermId) -> &[u32] {
        let i = id.index();
        if i + 1 >= self.offsets.len() {
            return &[];
        }
        &self.entries[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }
}

#[derive(Debug)]
pub struct TripleStore {
    dictionary: TermDictionary,
    triples: Vec<EncodedTriple>,
    by_subject: PositionIndex,
    by_predicate: PositionIndex,
    by_object: PositionIndex,
    report: IngestReport,
}

impl TripleStore {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    pub fn dictionary(&self) -> &TermDictionary {
        &self.dictionary
    }

    pub fn term(&self, id: TermId) -> &Term {
        self.dictionary.get(id)
    }

    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.dictionary.lookup(term)
    }

    pub fn lookup_iri(&self, iri: &str) -> Option<TermId> {
        self.dictionary.lookup(&Term::Iri(iri.to_owned()))
    }

    pub fn encoded(&self) -> &[EncodedTriple] {
        &self.triples
    }

    pub fn encoded_at(&self, position: u32) -> EncodedTriple {
        self.triples[position as usize]
    }

    pub fn resolve(&self, t: EncodedTriple) -> TripleRef<'_> {
        TripleRef {
            subject: self.term(t.subject),
            predicate: self.term(t.predicate),
            object: self.term(t.object),
        }
    }

    /// The triple at a store position (positions are stable for the
    /// lifetime of the snapshot).
    pub fn triple_at(&self, position: u32) -> TripleRef<'_> {
        self.resolve(self.triples[position as usize])
    }

    pub fn triples(&self) -> impl Iterator<Item = TripleRef<'_>> + '_ {
        self.triples.iter().map(|t| self.resolve(*t))
    }

    /// Store positions of triples with the given subject.
    pub fn positions_with_subject(&self, id: TermId) -> &[u32] {
        self.by_subject.get(id)
    }

    pub fn positions_with_predicate(&self, id: TermId) -> &[u32] {
        self.by_predicate.get(id)
    }

    pub fn positions_with_object(&self, id: TermId) -> &[u32] {
        self.by_object.get(id)
    }

    /// Ids of every term used as a predicate, in id order.
    pub fn predicate_ids(&self) -> Vec<TermId> {
        self.dictionary
            .iter()
            .map(|(id, _)| id)
            .filter(|&id| !self.by_predicate.get(id).is_empty())
            .collect()
    }

    /// All triples with predicate `p`, ordered by subject lexical form and
    /// then object lexical form. Unknown predicates yield nothing.
    pub fn triples_with_predicate(&self, p: &str) -> Vec<TripleRef<'_>> {
        let Some(pid) = self.lookup_iri(p) else {
            return Vec::new();
        };
        let mut out: Vec<TripleRef<'_>> = self
            .positions_with_predicate(pid)
            .iter()
            .map(|&pos| self.triple_at(pos))
            .collect();
        out.sort_by(|a, b| {
            (a.subject.lexical(), a.object.lexical(), a.subject, a.object).cmp(&(
                b.subject.lexical(),
                b.object.lexical(),
                b.subject,
                b.object,
            ))
        });
        out
    }

    /// Writes the store as canonical N-Triples in store order.
    pub fn write_ntriples<W: io::Write>(&self, out: W) -> io::Result<()> {
        ntriples::write_triples(out, self.triples())
    }
}

/// Single-writer accumulator behind [`ingest`].
struct StoreBuilder {
    dictionary: TermDictionary,
    blank_ids: HashMap<String, TermId>,
    seen: HashSet<EncodedTriple>,
    triples: Vec<EncodedTriple>,
    report: IngestReport,
    max_triples: Option<usize>,
}

impl StoreBuilder {
    fn new(format: RdfFormat, options: &IngestOptions) -> Self {
        StoreBuilder {
            dictionary: TermDictionary::default(),
            blank_ids: HashMap::new(),
            seen: HashSet::new(),
            triples: Vec::new(),
            report: IngestReport::new(format),
            max_triples: options.max_triples,
        }
    }

    fn intern(&mut self, term: Term) -> TermId {
        match term {
            // blank nodes are scoped to this ingest: labels are replaced by
            // fresh ones numbered in order of first appearance
            Term::BlankNode(label) => {
                if let Some(&id) = self.blank_ids.get(&label) {
                    return id;
                }
                let fresh = Term::BlankNode(format!("b{}", self.blank_ids.len()));
                let id = self.dictionary.intern(fresh);
                self.blank_ids.insert(label, id);
                id
            }
            other => self.dictionary.intern(other),
        }
    }

    fn add(&mut self, triple: Triple) -> Result<(), IngestError> {
        self.report.statements += 1;
        let encoded = EncodedTriple {
            subject: self.intern(triple.subject),
            predicate: self.intern(triple.predicate),
            object: self.intern(triple.object),
        };
        if self.seen.insert(encoded) {
            if let Some(limit) = self.max_triples {
                if self.triples.len() >= limit {
                    return Err(IngestError::TooManyTriples { limit });
                }
            }
            self.triples.push(encoded);
            self.report.parsed += 1;
        } else {
            self.report.duplicates += 1;
        }
        Ok(())
    }

    fn finish(mut self) -> TripleStore {
        if self.report.parsed == 0 {
            self.report
                .warnings
                .push("dataset contains no valid triples".to_owned());
        }
        let n = self.dictionary.len();
        let triples = self.triples;
        TripleStore {
            by_subject: PositionIndex::build(n, &triples, |t| t.subject),
            by_predicate: PositionIndex::build(n, &triples, |t| t.predicate),
            by_object: PositionIndex::build(n, &triples, |t| t.object),
            dictionary: self.dictionary,
            triples,
            report: self.report,
        }
    }
}

pub fn ingest<R: BufRead>(source: R, format: RdfFormat) -> Result<TripleStore, IngestError> {
    ingest_with(source, format, &IngestOptions::default())
}

/// Parses `source` into a store.
///
/// N-Triples errors are line-local: the offending line is skipped and
/// reported. A Turtle syntax error aborts the whole ingest.
pub fn ingest_with<R: BufRead>(
    mut source: R,
    format: RdfFormat,
    options: &IngestOptions,
) -> Result<TripleStore, IngestError> {
    let mut builder = StoreBuilder::new(format, options);
    match format {
        RdfFormat::NTriples => {
            let mut buf = Vec::new();
            let mut line_no = 0u64;
            loop {
                buf.clear();
                if source.read_until(b'\n', &mut buf)? == 0 {
                    break;
                }
                line_no += 1;
                let line = match std::str::from_utf8(&buf) {
                    Ok(line) => line,
                    Err(_) => {
                        builder.report.statements += 1;
                        builder
                            .report
                            .record_skip(line_no, "invalid UTF-8".to_owned());
                        continue;
                    }
                };
                match ntriples::parse_line(line) {
                    Ok(Some(triple)) => builder.add(triple)?,
                    Ok(None) => {}
                    Err(message) => {
                        builder.report.statements += 1;
                        builder.report.record_skip(line_no, message);
                    }
                }
            }
        }
        RdfFormat::Turtle => {
            turtle::parse(source, |parsed| match parsed {
                Some(triple) => builder.add(triple),
                None => {
                    builder.report.statements += 1;
                    builder
                        .report
                        .record_skip(0, "unsupported RDF-star triple".to_owned());
                    Ok(())
                }
            })?;
        }
    }
    Ok(builder.finish())
}

pub fn ingest_path(
    path: &Path,
    format: Option<RdfFormat>,
    options: &IngestOptions,
) -> Result<TripleStore, IngestError> {
    let format = format
        .or_else(|| RdfFormat::from_path(path))
        .unwrap_or(RdfFormat::NTriples);
    let file = std::fs::File::open(path)?;
    ingest_with(io::BufReader::new(file), format, options)
}
