//! Cross-dataset entity equivalence index.
//!
//! Every IRI seen in subject or object position belongs to exactly one
//! canonical entity: the class of IRIs connected to it through explicit
//! `owl:sameAs` statements, in either direction. IRIs that only ever appear
//! as predicates are properties, not entities, and are not indexed. Blank
//! nodes are never linkable.
//!
//! Class ids are dense and assigned in order of each class's representative,
//! which is its lexicographically smallest IRI.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DatasetId, DatasetRegistry};
use crate::iri::Iri;
use crate::model::{is_label_predicate, Term, Triple, FOAF_DEPICTION, RDF_TYPE};
use crate::union_find::UnionFind;

pub const MAX_PAGE_SIZE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalEntityId(pub u32);

impl CanonicalEntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for CanonicalEntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A fact about an entity: any non-sameAs triple mentioning one of its IRIs.
pub type EntityFact = Triple;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("entity {0} not found")]
    NotFound(CanonicalEntityId),
    #[error("page size must be between 1 and {MAX_PAGE_SIZE}, got {0}")]
    InvalidPageSize(usize),
}

/// Statistics and links for one canonical entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityCard {
    pub id: CanonicalEntityId,
    pub representative: Iri,
    pub preferred_label: String,
    pub uris: Vec<Iri>,
    pub uri_count: usize,
    pub dataset_ids: Vec<DatasetId>,
    pub dataset_count: usize,
    pub fact_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<Iri>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub types: Vec<Iri>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMentions {
    pub dataset: DatasetId,
    pub triples: u64,
}

#[derive(Debug, Clone, Default)]
struct Class {
    /// Indices into `Index::iris`, ascending.
    members: Vec<u32>,
    /// Indices into `Index::triples` of non-sameAs triples, ascending.
    facts: Vec<u32>,
    /// Ascending by dataset; includes sameAs triples.
    mentions: Vec<DatasetMentions>,
    preferred_label: Option<String>,
    image: Option<Iri>,
    types: Vec<Iri>,
}

/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone)]
pub struct Index {
    registry: DatasetRegistry,
    iris: Vec<Iri>,
    iri_class: Vec<CanonicalEntityId>,
    lookup: HashMap<Iri, u32>,
    same_as: Vec<(u32, u32)>,
    triples: Vec<Triple>,
    /// Subject and object class of each triple, when they are entities.
    triple_classes: Vec<(Option<CanonicalEntityId>, Option<CanonicalEntityId>)>,
    classes: Vec<Class>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssembleError {
    #[error("IRI list is not strictly sorted at position {0}")]
    UnsortedIris(usize),
    #[error("union references IRI index {0} outside the IRI list")]
    UnionOutOfRange(u32),
    #[error("triple mentions IRI {0} missing from the IRI list")]
    UnknownIri(String),
    #[error("triple references unregistered dataset {0}")]
    UnknownDataset(DatasetId),
}

impl Index {
    /// Builds the index over `triples`, which must come from datasets in `registry`.
    pub fn build(triples: Vec<Triple>, registry: DatasetRegistry) -> Self {
        let mut triples = triples;
        triples.sort_unstable();
        triples.dedup();

        let mut seen = BTreeSet::new();
        for triple in &triples {
            if let Some(iri) = triple.subject.as_iri() {
                seen.insert(iri);
            }
            if let Some(iri) = triple.object.as_iri() {
                seen.insert(iri);
            }
        }
        let iris: Vec<Iri> = seen.into_iter().cloned().collect();
        let position: HashMap<&Iri, u32> =
            iris.iter().enumerate().map(|(i, iri)| (iri, i as u32)).collect();

        let mut same_as: Vec<(u32, u32)> = triples
            .iter()
            .filter(|t| t.is_same_as())
            .filter_map(|t| {
                let a = position[t.subject.as_iri()?];
                let b = position[t.object.as_iri()?];
                (a != b).then(|| (a.min(b), a.max(b)))
            })
            .collect();
        same_as.sort_unstable();
        same_as.dedup();
        drop(position);

        Self::assemble(registry, iris, same_as, triples)
            .expect("IRI list and unions are derived from the triples")
    }

    /// Builds from already-sorted parts. `triples` must be sorted and
    /// deduplicated; every subject/object IRI must be in `iris`.
    pub(crate) fn assemble(
        registry: DatasetRegistry,
        iris: Vec<Iri>,
        same_as: Vec<(u32, u32)>,
        triples: Vec<Triple>,
    ) -> Result<Self, AssembleError> {
        if let Some(i) = iris.windows(2).position(|w| w[0] >= w[1]) {
            return Err(AssembleError::UnsortedIris(i + 1));
        }
        let mut forest = UnionFind::new(iris.len());
        for &(a, b) in &same_as {
            for idx in [a, b] {
                if idx as usize >= iris.len() {
                    return Err(AssembleError::UnionOutOfRange(idx));
                }
            }
            forest.union(a as usize, b as usize);
        }

        // ids follow the representatives' order
        let mut root_class: HashMap<usize, CanonicalEntityId> = HashMap::new();
        let mut iri_class = Vec::with_capacity(iris.len());
        let mut classes: Vec<Class> = Vec::new();
        for i in 0..iris.len() {
            let root = forest.find(i);
            let next = CanonicalEntityId(classes.len() as u32);
            let id = *root_class.entry(root).or_insert_with(|| {
                classes.push(Class::default());
                next
            });
            classes[id.index()].members.push(i as u32);
            iri_class.push(id);
        }

        let lookup: HashMap<Iri, u32> =
            iris.iter().enumerate().map(|(i, iri)| (iri.clone(), i as u32)).collect();
        let class_of = |iri: Option<&Iri>| -> Result<Option<CanonicalEntityId>, AssembleError> {
            match iri {
                None => Ok(None),
                Some(iri) => lookup
                    .get(iri)
                    .map(|&i| Some(iri_class[i as usize]))
                    .ok_or_else(|| AssembleError::UnknownIri(iri.to_string())),
            }
        };

        let mut triple_classes = Vec::with_capacity(triples.len());
        for (t_idx, triple) in triples.iter().enumerate() {
            if !registry.contains(triple.dataset) {
                return Err(AssembleError::UnknownDataset(triple.dataset));
            }
            let subject = class_of(triple.subject.as_iri())?;
            let object = class_of(triple.object.as_iri())?;
            triple_classes.push((subject, object));

            let mut touched = [subject, object];
            if subject == object {
                touched[1] = None;
            }
            for id in touched.into_iter().flatten() {
                let class = &mut classes[id.index()];
                if !triple.is_same_as() {
                    class.facts.push(t_idx as u32);
                }
                match class.mentions.last_mut() {
                    Some(last) if last.dataset == triple.dataset => last.triples += 1,
                    _ => class.mentions.push(DatasetMentions { dataset: triple.dataset, triples: 1 }),
                }
            }

            if let Some(id) = subject {
                let class = &mut classes[id.index()];
                match &triple.object {
                    Term::Literal { value, .. } if is_label_predicate(&triple.predicate) => {
                        if !value.trim().is_empty()
                            && class.preferred_label.as_ref().is_none_or(|l| value < l)
                        {
                            class.preferred_label = Some(value.clone());
                        }
                    }
                    Term::Iri { value } if triple.predicate.as_str() == FOAF_DEPICTION => {
                        if class.image.as_ref().is_none_or(|img| value < img) {
                            class.image = Some(value.clone());
                        }
                    }
                    Term::Iri { value } if triple.predicate.as_str() == RDF_TYPE => {
                        class.types.push(value.clone());
                    }
                    _ => {}
                }
            }
        }
        for class in &mut classes {
            class.types.sort_unstable();
            class.types.dedup();
        }

        Ok(Self { registry, iris, iri_class, lookup, same_as, triples, triple_classes, classes })
    }

    pub fn registry(&self) -> &DatasetRegistry {
        &self.registry
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn iri_count(&self) -> usize {
        self.iris.len()
    }

    pub(crate) fn iris(&self) -> &[Iri] {
        &self.iris
    }

    pub(crate) fn same_as_pairs(&self) -> &[(u32, u32)] {
        &self.same_as
    }

    /// All distinct triples, sorted by dataset, subject, predicate, object.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// Subject and object entity of the `i`-th triple of [`Index::triples`].
    pub fn triple_entities(&self, i: usize) -> (Option<CanonicalEntityId>, Option<CanonicalEntityId>) {
        self.triple_classes[i]
    }

    pub fn entity_ids(&self) -> impl Iterator<Item = CanonicalEntityId> {
        (0..self.classes.len() as u32).map(CanonicalEntityId)
    }

    pub fn contains(&self, id: CanonicalEntityId) -> bool {
        id.index() < self.classes.len()
    }

    /// Resolves a raw IRI (normalized first) to its entity.
    pub fn resolve(&self, raw: &str) -> Option<CanonicalEntityId> {
        let iri = Iri::parse(raw).ok()?;
        self.resolve_iri(&iri)
    }

    pub fn resolve_iri(&self, iri: &Iri) -> Option<CanonicalEntityId> {
        self.lookup.get(iri).map(|&i| self.iri_class[i as usize])
    }

    fn class(&self, id: CanonicalEntityId) -> Result<&Class, IndexError> {
        self.classes.get(id.index()).ok_or(IndexError::NotFound(id))
    }

    /// Member IRIs, sorted; the first is the representative.
    pub fn entity_uris(&self, id: CanonicalEntityId) -> Result<Vec<Iri>, IndexError> {
        Ok(self.class(id)?.members.iter().map(|&i| self.iris[i as usize].clone()).collect())
    }

    pub fn representative(&self, id: CanonicalEntityId) -> Result<&Iri, IndexError> {
        let class = self.class(id)?;
        Ok(&self.iris[class.members[0] as usize])
    }

    pub fn fact_count(&self, id: CanonicalEntityId) -> Result<usize, IndexError> {
        Ok(self.class(id)?.facts.len())
    }

    pub(crate) fn preferred_label_raw(&self, id: CanonicalEntityId) -> Option<&str> {
        self.classes.get(id.index())?.preferred_label.as_deref()
    }

    pub fn entity_card(&self, id: CanonicalEntityId) -> Result<EntityCard, IndexError> {
        let class = self.class(id)?;
        let uris = self.entity_uris(id)?;
        let dataset_ids: Vec<DatasetId> = class.mentions.iter().map(|m| m.dataset).collect();
        Ok(EntityCard {
            id,
            representative: uris[0].clone(),
            preferred_label: class
                .preferred_label
                .clone()
                .unwrap_or_else(|| uris[0].to_string()),
            uri_count: uris.len(),
            uris,
            dataset_count: dataset_ids.len(),
            dataset_ids,
            fact_count: class.facts.len(),
            image: class.image.clone(),
            types: class.types.clone(),
        })
    }

    /// One page of the entity's facts, in dataset/subject/predicate/object order.
    pub fn entity_facts(
        &self,
        id: CanonicalEntityId,
        page: usize,
        page_size: usize,
    ) -> Result<Vec<EntityFact>, IndexError> {
        let class = self.class(id)?;
        if page_size == 0 || page_size > MAX_PAGE_SIZE {
            return Err(IndexError::InvalidPageSize(page_size));
        }
        let start = page.saturating_mul(page_size);
        Ok(class
            .facts
            .iter()
            .skip(start)
            .take(page_size)
            .map(|&t| self.triples[t as usize].clone())
            .collect())
    }

    /// Indices into [`Index::triples`] of every fact of the entity.
    pub fn fact_indices(&self, id: CanonicalEntityId) -> Result<&[u32], IndexError> {
        Ok(&self.class(id)?.facts)
    }

    pub fn entity_datasets(&self, id: CanonicalEntityId) -> Result<Vec<DatasetMentions>, IndexError> {
        Ok(self.class(id)?.mentions.clone())
    }
}
