//! Multi-KG entity linking, annotation and fact evidence for chat answers.
//!
//! Datasets are ingested from N-Triples ([`ntriples`]), merged into canonical
//! entities under `owl:sameAs` closure ([`index`]), and queried through label
//! lookup ([`labels`]), recognition ([`recognition`]), annotation
//! ([`annotation`]) and pairwise fact evidence ([`validation`]). The
//! [`pipeline`] ties these to a chat provider ([`llm`]).

pub mod annotation;
pub mod dataset;
pub mod index;
pub mod iri;
pub mod labels;
pub mod llm;
pub mod model;
pub mod ntriples;
pub mod pipeline;
pub mod recognition;
pub mod snapshot;
pub mod union_find;
pub mod validation;

pub use annotation::{annotate, render_html, AnnotatedResponse};
pub use dataset::{Dataset, DatasetId, DatasetRegistry};
pub use index::{CanonicalEntityId, EntityCard, EntityFact, Index};
pub use iri::{normalize_iri, Iri};
pub use labels::LabelTable;
pub use model::{Subject, Term, Triple};
pub use ntriples::{parse_ntriples, ParseError, ParseMode};
pub use pipeline::{Engine, PipelineResult};
pub use recognition::{ensemble_merge, recognize_gazetteer, EntitySpan};
pub use validation::{relations_between, validate_response, FactEvidence};
