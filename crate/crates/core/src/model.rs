//! RDF terms and triples with dataset provenance.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetId;
use crate::iri::Iri;

pub const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const SKOS_PREF_LABEL: &str = "http://www.w3.org/2004/02/skos/core#prefLabel";
pub const SKOS_ALT_LABEL: &str = "http://www.w3.org/2004/02/skos/core#altLabel";
pub const FOAF_NAME: &str = "http://xmlns.com/foaf/0.1/name";
pub const FOAF_DEPICTION: &str = "http://xmlns.com/foaf/0.1/depiction";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Predicates whose literal objects are treated as surface forms.
pub const LABEL_PREDICATES: [&str; 4] = [RDFS_LABEL, SKOS_PREF_LABEL, SKOS_ALT_LABEL, FOAF_NAME];

pub fn is_label_predicate(predicate: &Iri) -> bool {
    LABEL_PREDICATES.contains(&predicate.as_str())
}

/// Object position of a triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Term {
    Iri {
        value: Iri,
    },
    /// Lexical form with escapes already decoded; never normalized.
    Literal {
        value: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        datatype: Option<Iri>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        language: Option<String>,
    },
    /// Value includes the `_:` prefix.
    Blank {
        value: String,
    },
}

impl Term {
    pub fn iri(iri: Iri) -> Self {
        Term::Iri { value: iri }
    }

    pub fn literal(value: impl Into<String>) -> Self {
        Term::Literal { value: value.into(), datatype: None, language: None }
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri { value } => Some(value),
            _ => None,
        }
    }

    pub fn value(&self) -> &str {
        match self {
            Term::Iri { value } => value.as_str(),
            Term::Literal { value, .. } | Term::Blank { value } => value,
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Term::Iri { .. } => 0,
            Term::Literal { .. } => 1,
            Term::Blank { .. } => 2,
        }
    }

    pub fn write_ntriples(&self, out: &mut String) {
        match self {
            Term::Iri { value } => write_iri(value, out),
            Term::Blank { value } => out.push_str(value),
            Term::Literal { value, datatype, language } => {
                out.push('"');
                escape_literal(value, out);
                out.push('"');
                if let Some(lang) = language {
                    out.push('@');
                    out.push_str(lang);
                } else if let Some(datatype) = datatype {
                    out.push_str("^^");
                    write_iri(datatype, out);
                }
            }
        }
    }
}

/// Terms order by value first, then kind, datatype and language.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value()
            .cmp(other.value())
            .then_with(|| self.kind_rank().cmp(&other.kind_rank()))
            .then_with(|| match (self, other) {
                (
                    Term::Literal { datatype: d1, language: l1, .. },
                    Term::Literal { datatype: d2, language: l2, .. },
                ) => d1.cmp(d2).then_with(|| l1.cmp(l2)),
                _ => Ordering::Equal,
            })
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.write_ntriples(&mut out);
        f.write_str(&out)
    }
}

/// Subject position of a triple: never a literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Subject {
    Iri { value: Iri },
    Blank { value: String },
}

impl Subject {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Subject::Iri { value } => Some(value),
            Subject::Blank { .. } => None,
        }
    }

    pub fn value(&self) -> &str {
        match self {
            Subject::Iri { value } => value.as_str(),
            Subject::Blank { value } => value,
        }
    }

    pub fn write_ntriples(&self, out: &mut String) {
        match self {
            Subject::Iri { value } => write_iri(value, out),
            Subject::Blank { value } => out.push_str(value),
        }
    }
}

impl Ord for Subject {
    fn cmp(&self, other: &Self) -> Ordering {
        let rank = |s: &Subject| matches!(s, Subject::Blank { .. }) as u8;
        self.value().cmp(other.value()).then_with(|| rank(self).cmp(&rank(other)))
    }
}

impl PartialOrd for Subject {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One RDF statement together with the dataset asserting it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Subject,
    pub predicate: Iri,
    pub object: Term,
    pub dataset: DatasetId,
}

impl Triple {
    pub fn is_same_as(&self) -> bool {
        self.predicate.as_str() == OWL_SAME_AS
    }

    /// N-Triples statement without the trailing newline.
    pub fn to_ntriples(&self) -> String {
        let mut out = String::with_capacity(96);
        self.subject.write_ntriples(&mut out);
        out.push(' ');
        write_iri(&self.predicate, &mut out);
        out.push(' ');
        self.object.write_ntriples(&mut out);
        out.push_str(" .");
        out
    }
}

/// Dataset, then subject, predicate, object.
impl Ord for Triple {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dataset
            .cmp(&other.dataset)
            .then_with(|| self.subject.cmp(&other.subject))
            .then_with(|| self.predicate.cmp(&other.predicate))
            .then_with(|| self.object.cmp(&other.object))
    }
}

impl PartialOrd for Triple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn write_iri(iri: &Iri, out: &mut String) {
    out.push('<');
    for c in iri.as_str().chars() {
        if is_iri_forbidden(c) {
            let _ = write!(out, "\\u{:04X}", c as u32);
        } else {
            out.push(c);
        }
    }
    out.push('>');
}

/// Characters that may not appear unescaped inside `<...>`.
pub(crate) fn is_iri_forbidden(c: char) -> bool {
    c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
}

fn escape_literal(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
}
