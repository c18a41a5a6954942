//! Line-oriented N-Triples reader with per-line error recovery.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::CharIndices;

use serde::Serialize;
use thiserror::Error;

use crate::dataset::{DatasetId, DatasetRegistry, RegistryError};
use crate::iri::Iri;
use crate::model::{is_iri_forbidden, Subject, Term, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Stop at the first malformed line.
    Strict,
    /// Record an error for each malformed line and keep going.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[error("line {line_number}: {reason}")]
pub struct ParseError {
    /// 1-based line number in the source.
    pub line_number: usize,
    pub reason: String,
    pub raw_line: String,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O error reading {source_name}: {source}")]
    Io {
        source_name: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {source_name}: {error}")]
    Parse { source_name: String, error: ParseError },
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseOutput {
    pub triples: Vec<Triple>,
    pub errors: Vec<ParseError>,
}

/// Parses an N-Triples stream, attributing every triple to `dataset`.
pub fn parse_ntriples<R: BufRead>(
    mut reader: R,
    dataset: DatasetId,
    mode: ParseMode,
) -> Result<ParseOutput, IngestError> {
    let mut output = ParseOutput::default();
    let mut buf = Vec::new();
    let mut line_number = 0;
    loop {
        buf.clear();
        let read = reader.read_until(b'\n', &mut buf).map_err(|source| IngestError::Io {
            source_name: format!("dataset {dataset}"),
            source,
        })?;
        if read == 0 {
            break;
        }
        line_number += 1;
        while matches!(buf.last(), Some(b'\n' | b'\r')) {
            buf.pop();
        }
        let result = match std::str::from_utf8(&buf) {
            Ok(line) => parse_line(line, dataset),
            Err(e) => Err(format!("invalid UTF-8 at byte {}", e.valid_up_to())),
        };
        match result {
            Ok(Some(triple)) => output.triples.push(triple),
            Ok(None) => {}
            Err(reason) => {
                let error = ParseError {
                    line_number,
                    reason,
                    raw_line: String::from_utf8_lossy(&buf).into_owned(),
                };
                if mode == ParseMode::Strict {
                    return Err(IngestError::Parse {
                        source_name: format!("dataset {dataset}"),
                        error,
                    });
                }
                output.errors.push(error);
            }
        }
    }
    Ok(output)
}

/// Parses one line. Blank and comment-only lines yield `Ok(None)`.
pub fn parse_line(line: &str, dataset: DatasetId) -> Result<Option<Triple>, String> {
    let mut cursor = Cursor::new(line);
    cursor.skip_ws();
    match cursor.peek() {
        None | Some('#') => return Ok(None),
        _ => {}
    }
    let subject = match cursor.peek() {
        Some('<') => Subject::Iri { value: cursor.iri_ref()? },
        Some('_') => Subject::Blank { value: cursor.blank_node()? },
        _ => return Err(cursor.unexpected("subject IRI or blank node")),
    };
    cursor.skip_ws();
    let predicate = match cursor.peek() {
        Some('<') => cursor.iri_ref()?,
        _ => return Err(cursor.unexpected("predicate IRI")),
    };
    cursor.skip_ws();
    let object = match cursor.peek() {
        Some('<') => Term::Iri { value: cursor.iri_ref()? },
        Some('_') => Term::Blank { value: cursor.blank_node()? },
        Some('"') => cursor.literal()?,
        _ => return Err(cursor.unexpected("object term")),
    };
    cursor.skip_ws();
    if cursor.next() != Some('.') {
        return Err("missing terminating '.'".to_string());
    }
    cursor.skip_ws();
    match cursor.peek() {
        None | Some('#') => Ok(Some(Triple { subject, predicate, object, dataset })),
        Some(_) => Err(cursor.unexpected("end of statement")),
    }
}

struct Cursor<'a> {
    line: &'a str,
    chars: std::iter::Peekable<CharIndices<'a>>,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a str) -> Self {
        Self { line, chars: line.char_indices().peekable() }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn next(&mut self) -> Option<char> {
        self.chars.next().map(|(_, c)| c)
    }

    fn position(&mut self) -> usize {
        self.chars.peek().map_or(self.line.len(), |&(i, _)| i)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.next();
        }
    }

    fn unexpected(&mut self, expected: &str) -> String {
        match self.peek() {
            Some(c) => format!("expected {expected}, found {c:?} at column {}", self.position() + 1),
            None => format!("expected {expected}, found end of line"),
        }
    }

    fn iri_ref(&mut self) -> Result<Iri, String> {
        self.next(); // '<'
        let mut raw = String::new();
        loop {
            match self.next() {
                None => return Err("unterminated IRI".to_string()),
                Some('>') => break,
                Some('\\') => raw.push(self.unicode_escape()?),
                Some(c) if is_iri_forbidden(c) => {
                    return Err(format!("character {c:?} not allowed in IRI"));
                }
                Some(c) => raw.push(c),
            }
        }
        Iri::parse(&raw).map_err(|e| format!("invalid IRI <{raw}>: {e}"))
    }

    /// Reads `uXXXX` or `UXXXXXXXX` after a backslash.
    fn unicode_escape(&mut self) -> Result<char, String> {
        let digits = match self.next() {
            Some('u') => 4,
            Some('U') => 8,
            other => return Err(format!("invalid escape sequence \\{}", other.map_or(String::new(), String::from))),
        };
        let mut code = 0u32;
        for _ in 0..digits {
            let digit = self
                .next()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| "truncated unicode escape".to_string())?;
            code = code * 16 + digit;
        }
        char::from_u32(code).ok_or_else(|| format!("escape U+{code:X} is not a scalar value"))
    }

    fn blank_node(&mut self) -> Result<String, String> {
        let start = self.position();
        self.next();
        if self.next() != Some(':') {
            return Err("blank node must start with '_:'".to_string());
        }
        match self.peek() {
            Some(c) if c.is_alphanumeric() || c == '_' => {}
            _ => return Err(self.unexpected("blank node label")),
        }
        let mut end = self.position();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\u{00B7}') {
                self.next();
                end = self.position();
            } else {
                break;
            }
        }
        let mut label = &self.line[start..end];
        // a trailing '.' terminates the statement rather than the label
        let trimmed = label.trim_end_matches('.');
        if trimmed.len() != label.len() {
            let restart = start + trimmed.len();
            label = trimmed;
            self.chars = self.line[restart..].char_indices().peekable();
            self.line = &self.line[restart..];
        }
        Ok(label.to_string())
    }

    fn literal(&mut self) -> Result<Term, String> {
        self.next(); // '"'
        let mut value = String::new();
        loop {
            match self.next() {
                None => return Err("unterminated string literal".to_string()),
                Some('"') => break,
                Some('\\') => match self.peek() {
                    Some('u' | 'U') => value.push(self.unicode_escape()?),
                    Some(c) => {
                        self.next();
                        value.push(match c {
                            't' => '\t',
                            'b' => '\u{0008}',
                            'n' => '\n',
                            'r' => '\r',
                            'f' => '\u{000C}',
                            '"' => '"',
                            '\'' => '\'',
                            '\\' => '\\',
                            other => return Err(format!("invalid escape sequence \\{other}")),
                        });
                    }
                    None => return Err("unterminated string literal".to_string()),
                },
                Some(c) => value.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.next();
                let language = self.language_tag()?;
                Ok(Term::Literal { value, datatype: None, language: Some(language) })
            }
            Some('^') => {
                self.next();
                if self.next() != Some('^') || self.peek() != Some('<') {
                    return Err("expected '^^<datatype>' after literal".to_string());
                }
                let datatype = self.iri_ref()?;
                Ok(Term::Literal { value, datatype: Some(datatype), language: None })
            }
            _ => Ok(Term::Literal { value, datatype: None, language: None }),
        }
    }

    fn language_tag(&mut self) -> Result<String, String> {
        let mut tag = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '-' {
                tag.push(c);
                self.next();
            } else {
                break;
            }
        }
        let mut parts = tag.split('-');
        let primary_ok = parts
            .next()
            .is_some_and(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphabetic()));
        if !primary_ok || parts.any(str::is_empty) {
            return Err(format!("invalid language tag {tag:?}"));
        }
        Ok(tag)
    }
}

/// Outcome of ingesting one N-Triples file.
#[derive(Debug, Clone)]
pub struct IngestReport {
    pub dataset: DatasetId,
    pub name: String,
    pub triples: usize,
    pub errors: Vec<ParseError>,
}

/// Registers each `(name, path)` source and parses the files in parallel.
///
/// Sources are registered in name order; dataset ids follow that order.
pub fn ingest_files<P: AsRef<Path> + Sync>(
    sources: &[(String, P)],
    mode: ParseMode,
) -> Result<(DatasetRegistry, Vec<Triple>, Vec<IngestReport>), IngestError> {
    let mut ordered: Vec<_> = sources.iter().collect();
    ordered.sort_by(|a, b| a.0.cmp(&b.0));

    let mut registry = DatasetRegistry::new();
    let mut jobs = Vec::with_capacity(ordered.len());
    for (name, path) in ordered {
        let id = registry.register(name, &path.as_ref().display().to_string())?;
        jobs.push((id, name.clone(), path.as_ref()));
    }

    let results: Vec<Result<ParseOutput, IngestError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(id, ref name, path)| {
                scope.spawn(move || {
                    let file = File::open(path).map_err(|source| IngestError::Io {
                        source_name: path.display().to_string(),
                        source,
                    })?;
                    parse_ntriples(BufReader::new(file), id, mode).map_err(|e| match e {
                        IngestError::Io { source, .. } => IngestError::Io {
                            source_name: path.display().to_string(),
                            source,
                        },
                        IngestError::Parse { error, .. } => {
                            IngestError::Parse { source_name: name.clone(), error }
                        }
                        other => other,
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("parser thread panicked")).collect()
    });

    let mut triples = Vec::new();
    let mut reports = Vec::with_capacity(jobs.len());
    for ((id, name, _), result) in jobs.into_iter().zip(results) {
        let output = result?;
        registry.set_triple_count(id, output.triples.len() as u64)?;
        reports.push(IngestReport {
            dataset: id,
            name,
            triples: output.triples.len(),
            errors: output.errors,
        });
        triples.extend(output.triples);
    }
    Ok((registry, triples, reports))
}
