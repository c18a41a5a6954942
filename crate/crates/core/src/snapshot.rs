//! Versioned, sectioned text snapshot of a built [`Index`].
//!
//! ```text
//! GPTLODS-IDX v1
//! DATASETS\t<n>      id \t name \t source_path \t triple_count
//! IRIS\t<n>          one normalized IRI per line, sorted
//! UNIONS\t<n>        iri_index \t iri_index   (sameAs edges)
//! LABELS\t<n>        entity_id \t preferred label
//! TRIPLES\t<n>       dataset_id \t N-Triples statement
//! END
//! ```
//!
//! Text fields escape `\\`, tab, newline and carriage return. The output is a
//! pure function of the index, so identical builds give identical bytes.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::dataset::{DatasetId, DatasetRegistry};
use crate::index::{CanonicalEntityId, Index};
use crate::iri::Iri;
use crate::ntriples::parse_line;

pub const MAGIC: &str = "GPTLODS-IDX v1";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("unsupported snapshot header {0:?}, expected {MAGIC:?}")]
    Version(String),
    #[error("corrupt snapshot section {section}: {reason}")]
    Corrupt { section: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn corrupt(section: &'static str, reason: impl Into<String>) -> SnapshotError {
    SnapshotError::Corrupt { section, reason: reason.into() }
}

pub fn save_snapshot(index: &Index, path: impl AsRef<Path>) -> Result<(), SnapshotError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_snapshot(index, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Index, SnapshotError> {
    read_snapshot(BufReader::new(File::open(path)?))
}

pub fn write_snapshot<W: Write>(index: &Index, out: &mut W) -> io::Result<()> {
    writeln!(out, "{MAGIC}")?;

    let registry = index.registry();
    writeln!(out, "DATASETS\t{}", registry.len())?;
    for d in registry.iter() {
        writeln!(out, "{}\t{}\t{}\t{}", d.id, escape(&d.name), escape(&d.source_path), d.triple_count)?;
    }

    writeln!(out, "IRIS\t{}", index.iris().len())?;
    for iri in index.iris() {
        writeln!(out, "{}", escape(iri.as_str()))?;
    }

    writeln!(out, "UNIONS\t{}", index.same_as_pairs().len())?;
    for (a, b) in index.same_as_pairs() {
        writeln!(out, "{a}\t{b}")?;
    }

    let labels: Vec<_> = index
        .entity_ids()
        .filter_map(|id| index.preferred_label_raw(id).map(|l| (id, l)))
        .collect();
    writeln!(out, "LABELS\t{}", labels.len())?;
    for (id, label) in labels {
        writeln!(out, "{id}\t{}", escape(label))?;
    }

    writeln!(out, "TRIPLES\t{}", index.triples().len())?;
    for t in index.triples() {
        writeln!(out, "{}\t{}", t.dataset, t.to_ntriples())?;
    }
    writeln!(out, "END")
}

pub fn read_snapshot<R: BufRead>(reader: R) -> Result<Index, SnapshotError> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header != MAGIC {
        return Err(SnapshotError::Version(header));
    }
    let mut sections = Sections { lines };

    let mut registry = DatasetRegistry::new();
    for line in sections.open("DATASETS")? {
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, name, path, count] = fields[..] else {
            return Err(corrupt("DATASETS", format!("expected 4 fields in {line:?}")));
        };
        let count: u64 = count.parse().map_err(|_| corrupt("DATASETS", "bad triple count"))?;
        let assigned = registry
            .register(&unescape(name), &unescape(path))
            .map_err(|e| corrupt("DATASETS", e.to_string()))?;
        if id != assigned.to_string() {
            return Err(corrupt("DATASETS", format!("ids not dense at {id}")));
        }
        registry.set_triple_count(assigned, count).expect("just registered");
    }

    let mut iris = Vec::new();
    for line in sections.open("IRIS")? {
        let raw = unescape(&line);
        let iri = Iri::parse(&raw).map_err(|e| corrupt("IRIS", e.to_string()))?;
        if iri.as_str() != raw {
            return Err(corrupt("IRIS", format!("IRI not normalized: {raw:?}")));
        }
        iris.push(iri);
    }

    let mut unions = Vec::new();
    for line in sections.open("UNIONS")? {
        let parsed = line
            .split_once('\t')
            .and_then(|(a, b)| Some((a.parse::<u32>().ok()?, b.parse::<u32>().ok()?)));
        unions.push(parsed.ok_or_else(|| corrupt("UNIONS", format!("bad pair {line:?}")))?);
    }

    let mut labels = Vec::new();
    for line in sections.open("LABELS")? {
        let parsed = line
            .split_once('\t')
            .and_then(|(id, label)| Some((CanonicalEntityId(id.parse().ok()?), unescape(label))));
        labels.push(parsed.ok_or_else(|| corrupt("LABELS", format!("bad label row {line:?}")))?);
    }

    let mut triples = Vec::new();
    for line in sections.open("TRIPLES")? {
        let (dataset, statement) = line
            .split_once('\t')
            .ok_or_else(|| corrupt("TRIPLES", format!("bad row {line:?}")))?;
        let dataset = DatasetId(dataset.parse().map_err(|_| corrupt("TRIPLES", "bad dataset id"))?);
        let triple = parse_line(statement, dataset)
            .map_err(|e| corrupt("TRIPLES", e))?
            .ok_or_else(|| corrupt("TRIPLES", "empty statement"))?;
        triples.push(triple);
    }
    if triples.windows(2).any(|w| w[0] >= w[1]) {
        return Err(corrupt("TRIPLES", "triples not sorted and distinct"));
    }

    match sections.lines.next().transpose()? {
        Some(end) if end == "END" => {}
        _ => return Err(corrupt("END", "missing END marker")),
    }

    let index = Index::assemble(registry, iris, unions, triples)
        .map_err(|e| corrupt("TRIPLES", e.to_string()))?;

    let expected: Vec<_> = index
        .entity_ids()
        .filter_map(|id| index.preferred_label_raw(id).map(|l| (id, l.to_string())))
        .collect();
    if expected != labels {
        return Err(corrupt("LABELS", "labels disagree with triples"));
    }
    Ok(index)
}

struct Sections<I> {
    lines: I,
}

impl<I: Iterator<Item = io::Result<String>>> Sections<I> {
    /// Reads the header of section `name` and returns its body lines.
    fn open(&mut self, name: &'static str) -> Result<Vec<String>, SnapshotError> {
        let header = self
            .lines
            .next()
            .transpose()?
            .ok_or_else(|| corrupt(name, "missing section header"))?;
        let count: usize = header
            .strip_prefix(name)
            .and_then(|rest| rest.strip_prefix('\t'))
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| corrupt(name, format!("bad section header {header:?}")))?;
        let mut body = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            match self.lines.next().transpose()? {
                Some(line) => body.push(line),
                None => return Err(corrupt(name, "truncated section")),
            }
        }
        Ok(body)
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}
