//! Interpretation of literal lexical forms as numbers or instants.

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::term::{Literal, Term};
use crate::vocab::XSD;

/// Value axis of a numeric or temporal property.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ValueKind {
    Numeric,
    Temporal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "camelCase")]
pub enum TypedValue {
    Numeric(f64),
    /// Milliseconds since the Unix epoch, UTC.
    Temporal(i64),
    Other,
}

impl TypedValue {
    pub fn kind(&self) -> Option<ValueKind> {
        match self {
            TypedValue::Numeric(_) => Some(ValueKind::Numeric),
            TypedValue::Temporal(_) => Some(ValueKind::Temporal),
            TypedValue::Other => None,
        }
    }

    /// Position on the value axis (epoch milliseconds for instants).
    pub fn axis_value(&self) -> Option<f64> {
        match *self {
            TypedValue::Numeric(v) => Some(v),
            TypedValue::Temporal(ms) => Some(ms as f64),
            TypedValue::Other => None,
        }
    }
}

/// Counts literals whose datatype promised a number or instant but whose
/// lexical form did not deliver one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MalformedTally {
    pub malformed: u64,
}

const INTEGER_TYPES: &[&str] = &[
    "integer",
    "long",
    "int",
    "short",
    "byte",
    "nonNegativeInteger",
    "nonPositiveInteger",
    "negativeInteger",
    "positiveInteger",
    "unsignedLong",
    "unsignedInt",
    "unsignedShort",
    "unsignedByte",
];

#[derive(Clone, Copy)]
enum Datatype {
    Integer,
    Decimal,
    Floating,
    DateTime,
    Date,
    GYear,
    GYearMonth,
    Unrelated,
}

fn classify(datatype: &str) -> Datatype {
    let Some(local) = datatype.strip_prefix(XSD) else {
        return Datatype::Unrelated;
    };
    match local {
        "decimal" => Datatype::Decimal,
        "double" | "float" => Datatype::Floating,
        "dateTime" | "dateTimeStamp" => Datatype::DateTime,
        "date" => Datatype::Date,
        "gYear" => Datatype::GYear,
        "gYearMonth" => Datatype::GYearMonth,
        l if INTEGER_TYPES.contains(&l) => Datatype::Integer,
        _ => Datatype::Unrelated,
    }
}

/// `None` when `term` is not a literal.
pub fn parse_literal_value(term: &Term) -> Option<TypedValue> {
    parse_literal_value_tallied(term, &mut MalformedTally::default())
}

pub fn parse_literal_value_tallied(term: &Term, tally: &mut MalformedTally) -> Option<TypedValue> {
    let lit = term.as_literal()?;
    Some(literal_value(lit, tally))
}

pub fn literal_value(lit: &Literal, tally: &mut MalformedTally) -> TypedValue {
    let lex = lit.lexical.trim();
    let Some(dt) = &lit.datatype else {
        // untyped: sniff numbers, but never language-tagged text
        if lit.language.is_none() && is_decimal_or_double(lex) {
            if let Ok(v) = lex.parse::<f64>() {
                if v.is_finite() {
                    return TypedValue::Numeric(v);
                }
            }
        }
        return TypedValue::Other;
    };
    let parsed = match classify(dt) {
        Datatype::Unrelated => return TypedValue::Other,
        Datatype::Integer => is_integer(lex)
            .then(|| lex.parse::<f64>().ok())
            .flatten()
            .map(TypedValue::Numeric),
        Datatype::Decimal => is_decimal(lex)
            .then(|| lex.parse::<f64>().ok())
            .flatten()
            .map(TypedValue::Numeric),
        Datatype::Floating => is_decimal_or_double(lex)
            .then(|| lex.parse::<f64>().ok())
            .flatten()
            .map(TypedValue::Numeric),
        Datatype::DateTime => parse_date_time(lex).map(TypedValue::Temporal),
        Datatype::Date => parse_date(lex).map(TypedValue::Temporal),
        Datatype::GYear => parse_g_year(lex).map(TypedValue::Temporal),
        Datatype::GYearMonth => parse_g_year_month(lex).map(TypedValue::Temporal),
    };
    match parsed {
        Some(TypedValue::Numeric(v)) if !v.is_finite() => {
            tally.malformed += 1;
            TypedValue::Other
        }
        Some(v) => v,
        None => {
            tally.malformed += 1;
            TypedValue::Other
        }
    }
}

fn digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn strip_sign(s: &str) -> &str {
    s.strip_prefix(['+', '-']).unwrap_or(s)
}

fn is_integer(s: &str) -> bool {
    digits(strip_sign(s))
}

fn is_decimal(s: &str) -> bool {
    let body = strip_sign(s);
    match body.split_once('.') {
        None => digits(body),
        Some((int, frac)) => {
            (int.is_empty() || digits(int))
                && (frac.is_empty() || digits(frac))
                && !(int.is_empty() && frac.is_empty())
        }
    }
}

fn is_decimal_or_double(s: &str) -> bool {
    match s.split_once(['e', 'E']) {
        None => is_decimal(s),
        Some((mantissa, exp)) => is_decimal(mantissa) && is_integer(exp),
    }
}

/// Splits a trailing `Z` or `±hh:mm` zone; absent zones mean UTC.
fn split_zone(s: &str) -> Option<(&str, i64)> {
    if let Some(rest) = s.strip_suffix('Z') {
        return Some((rest, 0));
    }
    if s.len() >= 6 {
        let (rest, zone) = s.split_at(s.len() - 6);
        let zb = zone.as_bytes();
        if (zb[0] == b'+' || zb[0] == b'-') && zb[3] == b':' {
            let hours: i64 = zone[1..3].parse().ok()?;
            let minutes: i64 = zone[4..6].parse().ok()?;
            if hours > 14 || minutes > 59 {
                return None;
            }
            let sign = if zb[0] == b'-' { -1 } else { 1 };
            return Some((rest, sign * (hours * 3600 + minutes * 60)));
        }
    }
    Some((s, 0))
}

fn to_millis(dt: NaiveDateTime, offset_seconds: i64) -> i64 {
    dt.and_utc().timestamp_millis() - offset_seconds * 1000
}

fn parse_year(s: &str) -> Option<i32> {
    let body = s.strip_prefix('-').unwrap_or(s);
    if body.len() < 4 || !digits(body) {
        return None;
    }
    let y: i32 = body.parse().ok()?;
    Some(if s.starts_with('-') { -y } else { y })
}

fn midnight(date: NaiveDate) -> NaiveDateTime {
    date.and_time(NaiveTime::MIN)
}

fn parse_date_time(s: &str) -> Option<i64> {
    let (body, offset) = split_zone(s)?;
    let (date, time) = body.split_once('T')?;
    let date = parse_plain_date(date)?;
    let time = NaiveTime::parse_from_str(time, "%H:%M:%S%.f").ok()?;
    Some(to_millis(date.and_time(time), offset))
}

fn parse_plain_date(s: &str) -> Option<NaiveDate> {
    let (year, rest) = s.rsplit_once('-').and_then(|(ym, d)| {
        let (y, m) = ym.rsplit_once('-')?;
        Some((y, (m, d)))
    })?;
    let (month, day) = rest;
    if month.len() != 2 || day.len() != 2 {
        return None;
    }
    NaiveDate::from_ymd_opt(parse_year(year)?, month.parse().ok()?, day.parse().ok()?)
}

fn parse_date(s: &str) -> Option<i64> {
    let (body, offset) = split_zone(s)?;
    Some(to_millis(midnight(parse_plain_date(body)?), offset))
}

fn parse_g_year(s: &str) -> Option<i64> {
    let (body, offset) = split_zone(s)?;
    let date = NaiveDate::from_ymd_opt(parse_year(body)?, 1, 1)?;
    Some(to_millis(midnight(date), offset))
}

fn parse_g_year_month(s: &str) -> Option<i64> {
    let (body, offset) = split_zone(s)?;
    let (year, month) = body.rsplit_once('-')?;
    if month.len() != 2 {
        return None;
    }
    let date = NaiveDate::from_ymd_opt(parse_year(year)?, month.parse().ok()?, 1)?;
    Some(to_millis(midnight(date), offset))
}

/// ISO-8601 rendering of an epoch-millisecond instant.
pub fn format_epoch_millis(ms: i64) -> String {
    match chrono::DateTime::from_timestamp_millis(ms) {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string(),
        None => ms.to_string(),
    }
}
