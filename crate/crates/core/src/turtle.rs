//! Turtle input, backed by `rio_turtle`.

use std::error::Error as _;
use std::io::{self, BufRead};

use rio_api::model as rio;
use rio_api::parser::{ParseError, TriplesParser};
use rio_turtle::{TurtleError, TurtleParser};

use crate::store::IngestError;
use crate::term::{Literal, Term, Triple};

impl From<TurtleError> for IngestError {
    fn from(err: TurtleError) -> Self {
        if let Some(io_err) = err.source().and_then(|s| s.downcast_ref::<io::Error>()) {
            return IngestError::UnreadableSource(io::Error::new(
                io_err.kind(),
                io_err.to_string(),
            ));
        }
        let (line, column) = err
            .textual_position()
            .map(|p| (p.line_number(), p.byte_number()))
            .unwrap_or((0, 0));
        let message = err.to_string();
        let message = match message.find(" on line ") {
            Some(i) => message[..i].to_owned(),
            None => message,
        };
        IngestError::TurtleSyntax {
            line,
            column,
            message,
        }
    }
}

/// Streams the triples of a Turtle document into `sink`. RDF-star triples
/// are passed as `None`.
pub(crate) fn parse<R, F>(source: R, mut sink: F) -> Result<(), IngestError>
where
    R: BufRead,
    F: FnMut(Option<Triple>) -> Result<(), IngestError>,
{
    let mut parser = TurtleParser::new(source, None);
    parser.parse_all(&mut |t: rio::Triple<'_>| sink(convert(&t)))
}

fn convert(t: &rio::Triple<'_>) -> Option<Triple> {
    let subject = match t.subject {
        rio::Subject::NamedNode(n) => Term::Iri(n.iri.to_owned()),
        rio::Subject::BlankNode(b) => Term::BlankNode(b.id.to_owned()),
        rio::Subject::Triple(_) => return None,
    };
    let object = match t.object {
        rio::Term::NamedNode(n) => Term::Iri(n.iri.to_owned()),
        rio::Term::BlankNode(b) => Term::BlankNode(b.id.to_owned()),
        rio::Term::Literal(rio::Literal::Simple { value }) => Term::Literal(Literal::simple(value)),
        rio::Term::Literal(rio::Literal::LanguageTaggedString { value, language }) => {
            Term::Literal(Literal::lang(value, language))
        }
        rio::Term::Literal(rio::Literal::Typed { value, datatype }) => {
            Term::Literal(Literal::typed(value, datatype.iri))
        }
        rio::Term::Triple(_) => return None,
    };
    Triple::new(subject, Term::Iri(t.predicate.iri.to_owned()), object)
}
