//! Annotated responses and their HTML rendering.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::{CanonicalEntityId, EntityCard, Index};
use crate::recognition::EntitySpan;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedResponse {
    pub text: String,
    pub spans: Vec<EntitySpan>,
    pub cards: BTreeMap<CanonicalEntityId, EntityCard>,
    pub provider_info: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotationError {
    #[error("span references unknown entity {0}")]
    UnknownEntity(CanonicalEntityId),
    #[error("span [{start}, {end}) is invalid for text of length {len}")]
    InvalidSpan { start: usize, end: usize, len: usize },
    #[error("spans overlap or are unsorted at [{start}, {end})")]
    Overlap { start: usize, end: usize },
    #[error("span surface {surface:?} does not match the text")]
    SurfaceMismatch { surface: String },
}

/// Attaches one card per distinct entity referenced by `spans`.
pub fn annotate(
    text: &str,
    spans: Vec<EntitySpan>,
    index: &Index,
    provider_info: impl Into<String>,
    timestamp: DateTime<Utc>,
) -> Result<AnnotatedResponse, AnnotationError> {
    let chars: Vec<char> = text.chars().collect();
    let mut previous_end = 0;
    for span in &spans {
        if span.start >= span.end || span.end > chars.len() {
            return Err(AnnotationError::InvalidSpan { start: span.start, end: span.end, len: chars.len() });
        }
        if span.start < previous_end {
            return Err(AnnotationError::Overlap { start: span.start, end: span.end });
        }
        previous_end = span.end;
        if !chars[span.start..span.end].iter().copied().eq(span.surface.chars()) {
            return Err(AnnotationError::SurfaceMismatch { surface: span.surface.clone() });
        }
    }

    let mut cards = BTreeMap::new();
    for span in &spans {
        if !cards.contains_key(&span.entity) {
            let card = index
                .entity_card(span.entity)
                .map_err(|_| AnnotationError::UnknownEntity(span.entity))?;
            cards.insert(span.entity, card);
        }
    }
    Ok(AnnotatedResponse {
        text: text.to_string(),
        spans,
        cards,
        provider_info: provider_info.into(),
        timestamp,
    })
}

/// Renders the text as an HTML fragment with one anchor per span.
///
/// Removing the tags and decoding entities yields the original text.
pub fn render_html(annotated: &AnnotatedResponse) -> String {
    let chars: Vec<char> = annotated.text.chars().collect();
    let mut out = String::with_capacity(annotated.text.len() * 2);
    let mut cursor = 0;
    for span in &annotated.spans {
        push_escaped(&mut out, chars[cursor..span.start].iter().copied());
        let card = annotated.cards.get(&span.entity);
        out.push_str(&format!(
            "<a class=\"entity\" href=\"/api/entity/{id}\" data-entity-id=\"{id}\" \
             data-uri-count=\"{}\" data-dataset-count=\"{}\" data-fact-count=\"{}\"",
            card.map_or(0, |c| c.uri_count),
            card.map_or(0, |c| c.dataset_count),
            card.map_or(0, |c| c.fact_count),
            id = span.entity,
        ));
        if let Some(card) = card {
            out.push_str(" title=\"");
            push_escaped(&mut out, card.preferred_label.chars());
            out.push('"');
        }
        out.push('>');
        push_escaped(&mut out, chars[span.start..span.end].iter().copied());
        out.push_str("</a>");
        cursor = span.end;
    }
    push_escaped(&mut out, chars[cursor..].iter().copied());
    out
}

fn push_escaped(out: &mut String, text: impl Iterator<Item = char>) {
    for c in text {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
}
