//! Entity recognition: the built-in gazetteer, external recognizer clients,
//! and the ensemble merge that reconciles their outputs.
//!
//! All offsets are Unicode code points, start inclusive and end exclusive.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::{CanonicalEntityId, Index};
use crate::labels::{tokenize, LabelTable};

pub const GAZETTEER: &str = "gazetteer";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Candidate {
    Entity(CanonicalEntityId),
    Iri(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSpan {
    pub start: usize,
    pub end: usize,
    pub candidate: Candidate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecognizerOutput {
    pub recognizer_name: String,
    pub spans: Vec<RawSpan>,
}

/// A recognized mention resolved to a canonical entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub entity: CanonicalEntityId,
    /// Endorsing recognizers over recognizers run.
    pub confidence: f64,
    pub recognizers: BTreeSet<String>,
}

/// Greedy longest-match over the label table, aligned to token boundaries.
///
/// Ambiguous matches go to the candidate with the most facts, then the lowest id.
pub fn recognize_gazetteer(text: &str, table: &LabelTable, index: &Index) -> RecognizerOutput {
    let tokens = tokenize(text);
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = table.max_tokens().min(tokens.len() - i);
        let matched = (1..=longest).rev().find_map(|len| {
            let window: Vec<&str> = tokens[i..i + len].iter().map(|t| t.text.as_str()).collect();
            if len == 1 && table.is_stopword(window[0]) {
                return None;
            }
            let candidates = table.lookup(&window);
            let best = candidates.into_iter().min_by_key(|&id| {
                (std::cmp::Reverse(index.fact_count(id).unwrap_or(0)), id)
            })?;
            Some((len, best))
        });
        match matched {
            Some((len, entity)) => {
                spans.push(RawSpan {
                    start: tokens[i].start,
                    end: tokens[i + len - 1].end,
                    candidate: Candidate::Entity(entity),
                });
                i += len;
            }
            None => i += 1,
        }
    }
    RecognizerOutput { recognizer_name: GAZETTEER.to_string(), spans }
}

#[derive(Debug, Error)]
pub enum RecognizerError {
    #[error("recognizer {name} unavailable: {reason}")]
    Unavailable { name: String, reason: String },
    #[error("recognizer {name} sent a malformed response: {reason}")]
    Protocol { name: String, reason: String },
}

/// One annotation as returned on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalAnnotation {
    pub start: usize,
    pub end: usize,
    pub uri: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RecognizerRequest {
    pub text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RecognizerResponse {
    pub annotations: Vec<ExternalAnnotation>,
}

/// A remote entity recognizer.
#[async_trait]
pub trait RecognizerClient: Send + Sync {
    fn name(&self) -> &str;

    async fn annotate(&self, text: &str) -> Result<Vec<ExternalAnnotation>, RecognizerError>;
}

/// Speaks `POST {"text": ...}` → `{"annotations": [{"start", "end", "uri"}]}`.
#[derive(Debug, Clone)]
pub struct HttpRecognizer {
    name: String,
    endpoint: String,
    client: reqwest::Client,
}

impl HttpRecognizer {
    pub fn new(name: impl Into<String>, endpoint: impl Into<String>, timeout: Duration) -> Self {
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .unwrap_or_else(|_| reqwest::Client::new());
        Self { name: name.into(), endpoint: endpoint.into(), client }
    }
}

#[async_trait]
impl RecognizerClient for HttpRecognizer {
    fn name(&self) -> &str {
        &self.name
    }

    async fn annotate(&self, text: &str) -> Result<Vec<ExternalAnnotation>, RecognizerError> {
        let unavailable = |reason: String| RecognizerError::Unavailable { name: self.name.clone(), reason };
        let response = self
            .client
            .post(&self.endpoint)
            .json(&RecognizerRequest { text: text.to_string() })
            .send()
            .await
            .map_err(|e| unavailable(e.to_string()))?;
        if !response.status().is_success() {
            return Err(unavailable(format!("HTTP {}", response.status())));
        }
        let body = response.bytes().await.map_err(|e| unavailable(e.to_string()))?;
        let parsed: RecognizerResponse = serde_json::from_slice(&body).map_err(|e| {
            RecognizerError::Protocol { name: self.name.clone(), reason: e.to_string() }
        })?;
        Ok(parsed.annotations)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExternalRecognition {
    pub output: RecognizerOutput,
    /// One entry per dropped annotation.
    pub warnings: Vec<String>,
}

/// Runs an external recognizer and maps its IRIs onto canonical entities.
/// Annotations whose IRI is not in the index are dropped with a warning.
pub async fn recognize_external(
    text: &str,
    client: &dyn RecognizerClient,
    index: &Index,
) -> Result<ExternalRecognition, RecognizerError> {
    let annotations = client.annotate(text).await?;
    let len = text.chars().count();
    let mut spans = Vec::new();
    let mut warnings = Vec::new();
    for a in annotations {
        if a.start >= a.end || a.end > len {
            return Err(RecognizerError::Protocol {
                name: client.name().to_string(),
                reason: format!("span [{}, {}) outside text of length {len}", a.start, a.end),
            });
        }
        match index.resolve(&a.uri) {
            Some(entity) => spans.push(RawSpan { start: a.start, end: a.end, candidate: Candidate::Entity(entity) }),
            None => warnings.push(format!(
                "{}: dropped [{}, {}) with unknown IRI {}",
                client.name(),
                a.start,
                a.end,
                a.uri
            )),
        }
    }
    Ok(ExternalRecognition {
        output: RecognizerOutput { recognizer_name: client.name().to_string(), spans },
        warnings,
    })
}

/// Merges recognizer outputs into sorted, non-overlapping spans.
///
/// Identical `(start, end, entity)` spans are merged and their recognizers
/// unioned. Overlaps are resolved by endorsement count, then span length,
/// then earlier start (then lower entity id). Unresolved IRI candidates are
/// ignored. `total_recognizers` is the number of recognizers that were run,
/// including any that returned nothing.
pub fn ensemble_merge(text: &str, outputs: &[RecognizerOutput], total_recognizers: usize) -> Vec<EntitySpan> {
    let mut endorsed: BTreeMap<(usize, usize, CanonicalEntityId), BTreeSet<&str>> = BTreeMap::new();
    let mut participants = BTreeSet::new();
    for output in outputs {
        participants.insert(output.recognizer_name.as_str());
        for span in &output.spans {
            if let Candidate::Entity(entity) = span.candidate {
                endorsed
                    .entry((span.start, span.end, entity))
                    .or_default()
                    .insert(&output.recognizer_name);
            }
        }
    }
    let total = total_recognizers.max(participants.len()).max(1);

    let mut ranked: Vec<_> = endorsed.into_iter().collect();
    ranked.sort_by(|((s1, e1, id1), r1), ((s2, e2, id2), r2)| {
        r2.len()
            .cmp(&r1.len())
            .then((e2 - s2).cmp(&(e1 - s1)))
            .then(s1.cmp(s2))
            .then(id1.cmp(id2))
    });

    let mut chosen: Vec<((usize, usize, CanonicalEntityId), BTreeSet<&str>)> = Vec::new();
    for candidate in ranked {
        let (start, end, _) = candidate.0;
        if chosen.iter().all(|((s, e, _), _)| end <= *s || start >= *e) {
            chosen.push(candidate);
        }
    }
    chosen.sort_by_key(|((start, _, _), _)| *start);

    let chars: Vec<char> = text.chars().collect();
    chosen
        .into_iter()
        .map(|((start, end, entity), recognizers)| EntitySpan {
            start,
            end,
            surface: chars[start.min(chars.len())..end.min(chars.len())].iter().collect(),
            entity,
            confidence: recognizers.len() as f64 / total as f64,
            recognizers: recognizers.into_iter().map(str::to_string).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{DatasetId, DatasetRegistry};
    use crate::iri::Iri;
    use crate::model::{Subject, Term, Triple, RDFS_LABEL};

    fn output(name: &str, spans: &[(usize, usize, u32)]) -> RecognizerOutput {
        RecognizerOutput {
            recognizer_name: name.to_string(),
            spans: spans
                .iter()
                .map(|&(start, end, id)| RawSpan { start, end, candidate: Candidate::Entity(CanonicalEntityId(id)) })
                .collect(),
        }
    }

    fn fixture() -> (Index, LabelTable) {
        let t = |s: &str, p: &str, o: Term| Triple {
            subject: Subject::Iri { value: Iri::parse(s).unwrap() },
            predicate: Iri::parse(p).unwrap(),
            object: o,
            dataset: DatasetId(0),
        };
        let triples = vec![
            t("http://x/NY", RDFS_LABEL, Term::literal("New York")),
            t("http://x/NYC", RDFS_LABEL, Term::literal("New York City")),
            t("http://x/York", RDFS_LABEL, Term::literal("York")),
            t("http://x/Paris1", RDFS_LABEL, Term::literal("Paris")),
            t("http://x/Paris2", RDFS_LABEL, Term::literal("Paris")),
            t("http://x/Paris2", "http://x/pop", Term::literal("2M")),
            t("http://x/A", RDFS_LABEL, Term::literal("Twin")),
            t("http://x/B", RDFS_LABEL, Term::literal("Twin")),
        ];
        let mut registry = DatasetRegistry::new();
        registry.register("kg", "kg.nt").unwrap();
        let index = Index::build(triples, registry);
        let table = LabelTable::extract(&index);
        (index, table)
    }

    fn matched(text: &str) -> Vec<(String, String)> {
        let (index, table) = fixture();
        let chars: Vec<char> = text.chars().collect();
        recognize_gazetteer(text, &table, &index)
            .spans
            .into_iter()
            .map(|s| {
                let Candidate::Entity(id) = s.candidate else { unreachable!() };
                (chars[s.start..s.end].iter().collect(), index.representative(id).unwrap().to_string())
            })
            .collect()
    }

    #[test]
    fn longest_match_wins() {
        assert_eq!(
            matched("I love New York City and York."),
            vec![
                ("New York City".to_string(), "http://x/NYC".to_string()),
                ("York".to_string(), "http://x/York".to_string()),
            ]
        );
        assert_eq!(matched("new york!"), vec![("new york".into(), "http://x/NY".into())]);
    }

    #[test]
    fn matches_respect_token_boundaries() {
        assert!(matched("Yorkshire and Parisian").is_empty());
    }

    #[test]
    fn ambiguity_prefers_more_facts_then_lower_id() {
        assert_eq!(matched("Paris"), vec![("Paris".into(), "http://x/Paris2".into())]);
        assert_eq!(matched("twin"), vec![("twin".into(), "http://x/A".into())]);
    }

    #[test]
    fn empty_text_has_no_spans() {
        let (index, table) = fixture();
        assert!(recognize_gazetteer("", &table, &index).spans.is_empty());
    }

    #[test]
    fn merge_single_input_passthrough() {
        let merged = ensemble_merge("Aristotle and Plato", &[output("a", &[(0, 9, 0), (14, 19, 1)])], 1);
        assert_eq!(merged.len(), 2);
        assert!(merged.iter().all(|s| s.confidence == 1.0));
        assert_eq!(merged[1].surface, "Plato");
    }

    #[test]
    fn merge_unions_identical_spans() {
        let text = "Aristotle";
        let merged = ensemble_merge(text, &[output("A", &[(0, 9, 0)]), output("B", &[(0, 9, 0)])], 2);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].confidence, 1.0);
        assert_eq!(merged[0].recognizers, BTreeSet::from(["A".to_string(), "B".to_string()]));
    }

    #[test]
    fn merge_overlap_rules() {
        let text = "Aristotle Onassis was here";
        // longer span wins on equal endorsement
        let merged = ensemble_merge(text, &[output("A", &[(0, 9, 0)]), output("B", &[(0, 17, 1)])], 2);
        assert_eq!((merged.len(), merged[0].end, merged[0].confidence), (1, 17, 0.5));
        // endorsement beats length
        let merged = ensemble_merge(
            text,
            &[output("A", &[(0, 9, 0)]), output("B", &[(0, 9, 0)]), output("C", &[(0, 17, 1)])],
            3,
        );
        assert_eq!((merged[0].end, merged[0].recognizers.len()), (9, 2));
        // equal endorsement and length: earlier start wins
        let merged = ensemble_merge(text, &[output("A", &[(0, 9, 0)]), output("B", &[(4, 13, 1)])], 2);
        assert_eq!((merged.len(), merged[0].start), (1, 0));
    }

    #[test]
    fn confidence_counts_silent_recognizers() {
        let merged = ensemble_merge("Aristotle", &[output("A", &[(0, 9, 0)])], 3);
        assert!((merged[0].confidence - 1.0 / 3.0).abs() < 1e-12);
    }

    struct Stub(Vec<ExternalAnnotation>);

    #[async_trait]
    impl RecognizerClient for Stub {
        fn name(&self) -> &str {
            "stub"
        }
        async fn annotate(&self, _text: &str) -> Result<Vec<ExternalAnnotation>, RecognizerError> {
            Ok(self.0.clone())
        }
    }

    #[tokio::test]
    async fn external_maps_and_drops() {
        let (index, _) = fixture();
        let stub = Stub(vec![
            ExternalAnnotation { start: 0, end: 4, uri: "HTTP://x/York".into() },
            ExternalAnnotation { start: 5, end: 9, uri: "http://x/Unknown".into() },
        ]);
        let result = recognize_external("York Town", &stub, &index).await.unwrap();
        assert_eq!(result.output.spans.len(), 1);
        assert_eq!(result.warnings.len(), 1);
        assert_eq!(
            result.output.spans[0].candidate,
            Candidate::Entity(index.resolve("http://x/York").unwrap())
        );
    }

    #[tokio::test]
    async fn external_out_of_bounds_is_protocol_error() {
        let (index, _) = fixture();
        let stub = Stub(vec![ExternalAnnotation { start: 0, end: 40, uri: "http://x/York".into() }]);
        let err = recognize_external("York", &stub, &index).await.unwrap_err();
        assert!(matches!(err, RecognizerError::Protocol { .. }));
    }

    #[tokio::test]
    async fn unreachable_endpoint_is_unavailable() {
        let (index, _) = fixture();
        let client = HttpRecognizer::new("dead", "http://127.0.0.1:9/annotate", Duration::from_secs(2));
        let err = recognize_external("York", &client, &index).await.unwrap_err();
        assert!(matches!(err, RecognizerError::Unavailable { .. }));
    }
}
