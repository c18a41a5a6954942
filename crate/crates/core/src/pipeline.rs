//! The end-to-end question → annotated, validated answer pipeline.

use std::sync::Arc;

use chrono::{DateTime, Utc};
use futures::future::join_all;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{annotate, AnnotatedResponse, AnnotationError};
use crate::index::Index;
use crate::labels::LabelTable;
use crate::llm::{Provider, ProviderError};
use crate::recognition::{
    ensemble_merge, recognize_external, recognize_gazetteer, EntitySpan, RecognizerClient,
};
use crate::validation::{validate_response, PairEvidence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub question: String,
    pub answer: AnnotatedResponse,
    pub validation: Vec<PairEvidence>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    #[serde(flatten)]
    pub response: AnnotatedResponse,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("all recognizers failed: {}", .0.join("; "))]
    RecognizersUnavailable(Vec<String>),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
}

/// The index, its label table and the recognizers to run against them.
pub struct Engine {
    index: Index,
    labels: LabelTable,
    gazetteer: bool,
    external: Vec<Arc<dyn RecognizerClient>>,
}

impl Engine {
    pub fn new(index: Index, labels: LabelTable) -> Self {
        Self { index, labels, gazetteer: true, external: Vec::new() }
    }

    /// Builds the label table from the index with the bundled stoplist.
    pub fn from_index(index: Index) -> Self {
        let labels = LabelTable::extract(&index);
        Self::new(index, labels)
    }

    pub fn with_recognizer(mut self, client: Arc<dyn RecognizerClient>) -> Self {
        self.external.push(client);
        self
    }

    pub fn without_gazetteer(mut self) -> Self {
        self.gazetteer = false;
        self
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn labels(&self) -> &LabelTable {
        &self.labels
    }

    pub fn recognizer_count(&self) -> usize {
        self.gazetteer as usize + self.external.len()
    }

    /// Runs every recognizer and merges their outputs. Failing external
    /// recognizers become warnings unless every recognizer failed.
    pub async fn recognize(&self, text: &str) -> Result<(Vec<EntitySpan>, Vec<String>), PipelineError> {
        let mut outputs = Vec::new();
        if self.gazetteer {
            outputs.push(recognize_gazetteer(text, &self.labels, &self.index));
        }
        let results = join_all(
            self.external.iter().map(|client| recognize_external(text, client.as_ref(), &self.index)),
        )
        .await;

        let mut warnings = Vec::new();
        let mut failures = Vec::new();
        for result in results {
            match result {
                Ok(recognition) => {
                    warnings.extend(recognition.warnings);
                    outputs.push(recognition.output);
                }
                Err(e) => {
                    tracing::warn!(error = %e, "recognizer failed");
                    failures.push(e.to_string());
                }
            }
        }
        if outputs.is_empty() && self.recognizer_count() > 0 {
            return Err(PipelineError::RecognizersUnavailable(failures));
        }
        warnings.extend(failures);
        Ok((ensemble_merge(text, &outputs, self.recognizer_count()), warnings))
    }

    pub async fn annotate_text(
        &self,
        text: &str,
        provider_info: &str,
        timestamp: DateTime<Utc>,
    ) -> Result<Annotation, PipelineError> {
        let (spans, warnings) = self.recognize(text).await?;
        let response = annotate(text, spans, &self.index, provider_info, timestamp)?;
        Ok(Annotation { response, warnings })
    }

    /// ask → recognize → merge → annotate → validate.
    pub async fn run_pipeline(
        &self,
        question: &str,
        provider: &Provider,
        timestamp: DateTime<Utc>,
    ) -> Result<PipelineResult, PipelineError> {
        let answer = provider.ask(question).await?;
        let Annotation { response, warnings } =
            self.annotate_text(&answer.text, &answer.provider_info, timestamp).await?;
        let validation = validate_response(&response, &self.index);
        Ok(PipelineResult { question: question.to_string(), answer: response, validation, warnings })
    }
}
