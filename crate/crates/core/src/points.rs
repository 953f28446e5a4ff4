//! Point sets: the (subject, value) multiset a hierarchy is built over.

use std::collections::HashMap;

use serde::{Serialize, Serializer};

use crate::term::Term;
use crate::value::ValueKind;

/// One value occurrence. `subject` indexes [`PointSet::subjects`];
/// `source` is the store position of the originating triple.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub subject: u32,
    pub value: f64,
    pub source: u32,
}

/// A multiset of points sharing one value axis. The subject table is sorted
/// by lexical form, so comparing subject indices compares subjects
/// lexically.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    kind: ValueKind,
    subjects: Vec<Term>,
    points: Vec<Point>,
    excluded: u64,
}

impl PointSet {
    /// `points` index into `subjects`, which need not be sorted or
    /// deduplicated; the table is normalised here.
    pub fn new(kind: ValueKind, subjects: Vec<Term>, mut points: Vec<Point>) -> Self {
        let mut order: Vec<usize> = (0..subjects.len()).collect();
        order.sort_by(|&a, &b| {
            (subjects[a].lexical(), &subjects[a]).cmp(&(subjects[b].lexical(), &subjects[b]))
        });
        let mut table: Vec<Term> = Vec::with_capacity(subjects.len());
        let mut remap = vec![0u32; subjects.len()];
        for &i in &order {
            if table.last() != Some(&subjects[i]) {
                table.push(subjects[i].clone());
            }
            remap[i] = (table.len() - 1) as u32;
        }
        for p in &mut points {
            p.subject = remap[p.subject as usize];
        }
        PointSet {
            kind,
            subjects: table,
            points,
            excluded: 0,
        }
    }

    /// Builds a point set from (subject, value) pairs; `source` is the pair's
    /// input position.
    pub fn from_pairs<I>(kind: ValueKind, pairs: I) -> Self
    where
        I: IntoIterator<Item = (Term, f64)>,
    {
        let mut ids: HashMap<Term, u32> = HashMap::new();
        let mut subjects = Vec::new();
        let mut points = Vec::new();
        for (i, (subject, value)) in pairs.into_iter().enumerate() {
            let next = subjects.len() as u32;
            let id = *ids.entry(subject.clone()).or_insert_with(|| {
                subjects.push(subject);
                next
            });
            points.push(Point {
                subject: id,
                value,
                source: i as u32,
            });
        }
        PointSet::new(kind, subjects, points)
    }

    pub(crate) fn with_excluded(mut self, excluded: u64) -> Self {
        self.excluded = excluded;
        self
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn subject(&self, p: &Point) -> &Term {
        &self.subjects[p.subject as usize]
    }

    pub fn subjects(&self) -> &[Term] {
        &self.subjects
    }

    /// Matching triples left out because their object did not parse to the
    /// axis kind.
    pub fn excluded(&self) -> u64 {
        self.excluded
    }
}

/// Serialises axis positions as JSON integers when they are exactly
/// integral (epoch milliseconds, counts), as floats otherwise.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct AxisNumber(pub f64);

const MAX_EXACT: f64 = 9_007_199_254_740_992.0;

impl Serialize for AxisNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.fract() == 0.0 && v.abs() < MAX_EXACT {
            serializer.serialize_i64(v as i64)
        } else {
            serializer.serialize_f64(v)
        }
    }
}
