//! Surface forms extracted from label predicates, keyed by token sequence.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::Serialize;

use crate::index::{CanonicalEntityId, Index};
use crate::iri::Iri;
use crate::model::{is_label_predicate, Term};

pub const DEFAULT_STOPWORDS: &str = include_str!("../stopwords.txt");

/// A token with code-point offsets into the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Splits on whitespace and punctuation; any non-alphanumeric character is a
/// separator. Tokens are lowercased.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current: Option<Token> = None;
    for (pos, c) in text.chars().enumerate() {
        if c.is_alphanumeric() {
            let token = current.get_or_insert_with(|| Token { text: String::new(), start: pos, end: pos });
            token.text.extend(c.to_lowercase());
            token.end = pos + 1;
        } else if let Some(token) = current.take() {
            tokens.push(token);
        }
    }
    tokens.extend(current);
    tokens
}

pub fn normalized_tokens(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

#[derive(Debug, Clone, Default)]
pub struct Stoplist(HashSet<String>);

impl Stoplist {
    pub fn parse(contents: &str) -> Self {
        Self(
            contents
                .lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for LabelTable {
    fn default() -> Self {
        Self::empty(Stoplist::parse(DEFAULT_STOPWORDS))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurfaceForm {
    pub text: String,
    pub normalized_tokens: Vec<String>,
    pub entity: CanonicalEntityId,
    pub source_predicate: Iri,
}

#[derive(Debug, Clone)]
pub struct LabelTable {
    forms: Vec<SurfaceForm>,
    by_tokens: HashMap<Vec<String>, Vec<CanonicalEntityId>>,
    max_tokens: usize,
    stoplist: Stoplist,
}

impl LabelTable {
    fn empty(stoplist: Stoplist) -> Self {
        Self { forms: Vec::new(), by_tokens: HashMap::new(), max_tokens: 0, stoplist }
    }

    /// Extracts labels using the bundled stoplist.
    pub fn extract(index: &Index) -> Self {
        Self::extract_with_stoplist(index, Stoplist::parse(DEFAULT_STOPWORDS))
    }

    /// One surface form per distinct (label text, entity) pair. Labels that
    /// tokenize to nothing, or to a single stopword, are skipped.
    pub fn extract_with_stoplist(index: &Index, stoplist: Stoplist) -> Self {
        // (text, entity) -> smallest predicate asserting it
        let mut pairs: BTreeMap<(&str, CanonicalEntityId), &Iri> = BTreeMap::new();
        for (i, triple) in index.triples().iter().enumerate() {
            let (Some(entity), Term::Literal { value, .. }) = (index.triple_entities(i).0, &triple.object)
            else {
                continue;
            };
            if !is_label_predicate(&triple.predicate) {
                continue;
            }
            pairs
                .entry((value.as_str(), entity))
                .and_modify(|p| *p = (*p).min(&triple.predicate))
                .or_insert(&triple.predicate);
        }

        let mut table = Self::empty(stoplist);
        for ((text, entity), predicate) in pairs {
            let tokens = normalized_tokens(text);
            if tokens.is_empty() || (tokens.len() == 1 && table.stoplist.contains(&tokens[0])) {
                continue;
            }
            table.max_tokens = table.max_tokens.max(tokens.len());
            let ids = table.by_tokens.entry(tokens.clone()).or_default();
            if let Err(pos) = ids.binary_search(&entity) {
                ids.insert(pos, entity);
            }
            table.forms.push(SurfaceForm {
                text: text.to_string(),
                normalized_tokens: tokens,
                entity,
                source_predicate: predicate.clone(),
            });
        }
        table
    }

    /// Entities whose label tokenizes exactly to `tokens`, ascending by id.
    pub fn lookup<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<CanonicalEntityId> {
        if tokens.is_empty() || tokens.len() > self.max_tokens {
            return Vec::new();
        }
        let key: Vec<String> = tokens.iter().map(|t| t.as_ref().to_string()).collect();
        self.by_tokens.get(&key).cloned().unwrap_or_default()
    }

    pub fn forms(&self) -> &[SurfaceForm] {
        &self.forms
    }

    pub fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    pub fn stoplist(&self) -> &Stoplist {
        &self.stoplist
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stoplist.contains(token)
    }
}
