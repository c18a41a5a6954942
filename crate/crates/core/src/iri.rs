//! IRI normalization.
//!
//! Normalization trims surrounding whitespace and lowercases the scheme and
//! host. Paths, queries and fragments are left untouched.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IriError {
    #[error("IRI is empty")]
    Empty,
    #[error("IRI has no scheme: {0:?}")]
    MissingScheme(String),
}

/// An absolute IRI in normalized form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Iri(String);

impl Iri {
    /// Normalizes `raw` into an [`Iri`].
    pub fn parse(raw: &str) -> Result<Self, IriError> {
        normalize_iri(raw).map(Iri)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl<'de> Deserialize<'de> for Iri {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Iri::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// Trims `raw` and lowercases its scheme and host.
///
/// Idempotent: `normalize_iri(normalize_iri(x)) == normalize_iri(x)`.
pub fn normalize_iri(raw: &str) -> Result<String, IriError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(IriError::Empty);
    }
    let colon = trimmed
        .find(':')
        .filter(|&i| is_scheme(&trimmed[..i]))
        .ok_or_else(|| IriError::MissingScheme(trimmed.to_string()))?;

    let mut out = String::with_capacity(trimmed.len());
    out.push_str(&trimmed[..colon].to_ascii_lowercase());
    out.push(':');
    let rest = &trimmed[colon + 1..];

    match rest.strip_prefix("//") {
        Some(after) => {
            out.push_str("//");
            let authority_end = after.find(['/', '?', '#']).unwrap_or(after.len());
            let (authority, tail) = after.split_at(authority_end);
            // userinfo is case-sensitive, the host is not
            match authority.rfind('@') {
                Some(at) => {
                    out.push_str(&authority[..=at]);
                    out.push_str(&authority[at + 1..].to_lowercase());
                }
                None => out.push_str(&authority.to_lowercase()),
            }
            out.push_str(tail);
        }
        None => out.push_str(rest),
    }
    Ok(out)
}

fn is_scheme(candidate: &str) -> bool {
    let mut chars = candidate.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}
