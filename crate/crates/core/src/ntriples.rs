//! Line-oriented N-Triples reader and writer.
//!
//! Every non-blank, non-comment line is one statement. A malformed line is
//! reported with its message and never affects its neighbours.

use std::io::{self, Write};

use crate::term::{Literal, Term, Triple};

/// Parses one N-Triples line. `Ok(None)` means the line holds no statement
/// (blank or comment only).
pub fn parse_line(line: &str) -> Result<Option<Triple>, String> {
    let mut cur = Cursor { s: line, pos: 0 };
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        Some('_') => Term::BlankNode(cur.blank()?),
        _ => return Err(cur.err("expected IRI or blank node as subject")),
    };
    cur.skip_ws();
    if cur.peek() != Some('<') {
        return Err(cur.err("expected IRI as predicate"));
    }
    let predicate = Term::Iri(cur.iri()?);
    cur.skip_ws();
    let object = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        Some('_') => Term::BlankNode(cur.blank()?),
        Some('"') => Term::Literal(cur.literal()?),
        _ => return Err(cur.err("expected IRI, blank node or literal as object")),
    };
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err(cur.err("expected '.'"));
    }
    cur.bump();
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err(cur.err("trailing content after '.'"));
    }
    Ok(Triple::new(subject, predicate, object))
}

/// Writes triples as canonical N-Triples, one per line.
pub fn write_triples<'a, W, I>(mut out: W, triples: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = crate::term::TripleRef<'a>>,
{
    for t in triples {
        writeln!(out, "{t}")?;
    }
    Ok(())
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.s[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r' | '\n')) {
            self.pos += 1;
        }
    }

    fn err(&self, msg: &str) -> String {
        format!("{msg} at column {}", self.s[..self.pos].chars().count() + 1)
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn iri(&mut self) -> Result<String, String> {
        self.expect('<')?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated IRI")),
                Some('>') => break,
                Some('\\') => out.push(self.uchar()?),
                Some(c @ ('\0'..=' ' | '<' | '"' | '{' | '}' | '|' | '^' | '`')) => {
                    return Err(self.err(&format!("invalid character {c:?} in IRI")))
                }
                Some(c) => out.push(c),
            }
        }
        if !has_scheme(&out) {
            return Err(self.err("relative IRI"));
        }
        Ok(out)
    }

    fn uchar(&mut self) -> Result<char, String> {
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.err("invalid escape")),
        };
        let end = self.pos + len;
        let hex = self
            .s
            .get(self.pos..end)
            .ok_or_else(|| self.err("truncated unicode escape"))?;
        let code = u32::from_str_radix(hex, 16).map_err(|_| self.err("invalid unicode escape"))?;
        self.pos = end;
        char::from_u32(code).ok_or_else(|| self.err("invalid code point"))
    }

    fn blank(&mut self) -> Result<String, String> {
        self.expect('_')?;
        self.expect(':')?;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\u{B7}') {
                self.bump();
            } else {
                break;
            }
        }
        // a label may not end with '.'; give trailing dots back
        while self.pos > start && self.s[..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        let label = &self.s[start..self.pos];
        match label.chars().next() {
            Some(c) if c.is_alphanumeric() || c == '_' => Ok(label.to_owned()),
            _ => Err(self.err("invalid blank node label")),
        }
    }

    fn literal(&mut self) -> Result<Literal, String> {
        self.expect('"')?;
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated literal")),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{C}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u' | 'U') => {
                            lexical.push(self.uchar()?);
                            continue;
                        }
                        _ => return Err(self.err("invalid escape in literal")),
                    };
                    self.bump();
                    lexical.push(c);
                }
                Some('\n' | '\r') => return Err(self.err("line break in literal")),
                Some(c) => lexical.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    self.bump();
                }
                let tag = &self.s[start..self.pos];
                if !valid_lang_tag(tag) {
                    return Err(self.err("invalid language tag"));
                }
                Ok(Literal::lang(lexical, tag))
            }
            Some('^') => {
                self.bump();
                self.expect('^')?;
                let dt = self.iri()?;
                Ok(Literal::typed(lexical, dt))
            }
            _ => Ok(Literal::simple(lexical)),
        }
    }
}

fn has_scheme(iri: &str) -> bool {
    let Some(colon) = iri.find(':') else {
        return false;
    };
    let scheme = &iri[..colon];
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

fn valid_lang_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let first_ok = matches!(parts.next(), Some(p) if !p.is_empty() && p.chars().all(|c| c.is_ascii_alphabetic()));
    first_ok && parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Triple {
        parse_line(s).unwrap().unwrap()
    }

    #[test]
    fn typed_literal_statement() {
        let t = parse(
            r#"<http://ex/a> <http://ex/p> "5"^^<http://www.w3.org/2001/XMLSchema#integer> ."#,
        );
        assert_eq!(t.subject, Term::iri("http://ex/a"));
        assert_eq!(
            t.object,
            Term::Literal(Literal::typed(
                "5",
                "http://www.w3.org/2001/XMLSchema#integer"
            ))
        );
    }

    #[test]
    fn blank_nodes_and_lang() {
        let t = parse(r#"_:b1 <http://ex/p> "hi"@en-GB . # trailing comment"#);
        assert_eq!(t.subject, Term::blank("b1"));
        assert_eq!(t.object, Term::Literal(Literal::lang("hi", "en-gb")));
        let t = parse("_:a <http://ex/p> _:b.");
        assert_eq!(t.object, Term::blank("b"));
    }

    #[test]
    fn escapes() {
        let t = parse(r#"<http://ex/aB> <http://ex/p> "tab\there é \"q\"" ."#);
        assert_eq!(t.subject, Term::iri("http://ex/aB"));
        assert_eq!(t.object.lexical(), "tab\there é \"q\"");
    }

    #[test]
    fn blank_and_comment_lines() {
        assert_eq!(parse_line("").unwrap(), None);
        assert_eq!(parse_line("   # just a comment").unwrap(), None);
    }

    #[test]
    fn malformed_lines() {
        for bad in [
            "<http://ex/a> <http://ex/p> <http://ex/o>",
            "<http://ex/a> <http://ex/p> .",
            "\"lit\" <http://ex/p> <http://ex/o> .",
            "<http://ex/a> _:p <http://ex/o> .",
            "<http://ex/a> <http://ex/p> \"unterminated .",
            "<a> <http://ex/p> <http://ex/o> .",
            "<http://ex/a> <http://ex/p> <http://ex/o> . extra",
            "<http://ex/a b> <http://ex/p> <http://ex/o> .",
            "<http://ex/a> <http://ex/p> \"x\"@ .",
        ] {
            assert!(parse_line(bad).is_err(), "accepted {bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        let src = r#"<http://ex/a> <http://ex/p> "multi\nline \\ \"x\""@de ."#;
        let t = parse(src);
        assert_eq!(parse(&t.to_string()), t);
    }
}
