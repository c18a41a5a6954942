//! Pairwise fact evidence across datasets.
//!
//! Evidence is pair-level: every predicate linking two entities is reported
//! with the datasets that assert it, in both directions. Pairs without any
//! link are reported with empty evidence.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::AnnotatedResponse;
use crate::dataset::DatasetId;
use crate::index::{CanonicalEntityId, EntityFact, Index, IndexError};
use crate::iri::Iri;

/// At most this many entities of one response are validated pairwise.
pub const MAX_VALIDATED_ENTITIES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactEvidence {
    pub subject_entity: CanonicalEntityId,
    pub object_entity: CanonicalEntityId,
    pub predicate: Iri,
    pub datasets: Vec<DatasetId>,
    pub sample_triples: Vec<EntityFact>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEvidence {
    pub pair: (CanonicalEntityId, CanonicalEntityId),
    pub evidence: Vec<FactEvidence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("cannot relate entity {0} to itself")]
    SamePair(CanonicalEntityId),
}

/// All triples linking `a` and `b` in either direction, grouped by
/// direction and predicate: `a → b` first, predicates ascending.
pub fn relations_between(
    a: CanonicalEntityId,
    b: CanonicalEntityId,
    index: &Index,
) -> Result<Vec<FactEvidence>, ValidationError> {
    let facts = index.fact_indices(a)?;
    index.fact_indices(b)?;
    if a == b {
        return Err(ValidationError::SamePair(a));
    }

    // (direction, predicate) -> supporting triple indices
    let mut groups: BTreeMap<(bool, &Iri), Vec<u32>> = BTreeMap::new();
    for &t in facts {
        let backwards = match index.triple_entities(t as usize) {
            (Some(s), Some(o)) if s == a && o == b => false,
            (Some(s), Some(o)) if s == b && o == a => true,
            _ => continue,
        };
        groups.entry((backwards, &index.triples()[t as usize].predicate)).or_default().push(t);
    }

    Ok(groups
        .into_iter()
        .map(|((backwards, predicate), support)| {
            let (subject_entity, object_entity) = if backwards { (b, a) } else { (a, b) };
            let sample_triples: Vec<EntityFact> =
                support.iter().map(|&t| index.triples()[t as usize].clone()).collect();
            let datasets: BTreeSet<DatasetId> = sample_triples.iter().map(|t| t.dataset).collect();
            FactEvidence {
                subject_entity,
                object_entity,
                predicate: predicate.clone(),
                datasets: datasets.into_iter().collect(),
                sample_triples,
            }
        })
        .collect())
}

/// Evidence for every unordered pair of `entities` (smaller id first).
pub fn validate_entities(
    entities: &[CanonicalEntityId],
    index: &Index,
) -> Result<Vec<PairEvidence>, ValidationError> {
    let distinct: Vec<CanonicalEntityId> = entities.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut pairs = Vec::new();
    for (i, &a) in distinct.iter().enumerate() {
        for &b in &distinct[i + 1..] {
            pairs.push(PairEvidence { pair: (a, b), evidence: relations_between(a, b, index)? });
        }
    }
    Ok(pairs)
}

/// Validates every pair of distinct entities in the response.
///
/// With more than [`MAX_VALIDATED_ENTITIES`] entities, only the ones with the
/// highest span confidence are used (ties to the lower id).
pub fn validate_response(annotated: &AnnotatedResponse, index: &Index) -> Vec<PairEvidence> {
    let mut best: BTreeMap<CanonicalEntityId, f64> = BTreeMap::new();
    for span in &annotated.spans {
        let entry = best.entry(span.entity).or_insert(span.confidence);
        *entry = entry.max(span.confidence);
    }
    let mut ranked: Vec<(CanonicalEntityId, f64)> = best.into_iter().collect();
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    ranked.truncate(MAX_VALIDATED_ENTITIES);
    let entities: Vec<_> = ranked.into_iter().map(|(id, _)| id).collect();
    validate_entities(&entities, index).unwrap_or_default()
}
