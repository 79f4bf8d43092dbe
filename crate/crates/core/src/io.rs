//! JSON-lines record formats.
//!
//! Numbers are written by `serde_json`, which emits the shortest decimal that
//! round-trips to the same `f64`; identical inputs therefore produce
//! byte-identical files.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::embedding::{EmbeddingSequence, Modality};
use crate::error::{Error, Result};
use crate::localization::TimedMoment;
use crate::synthetic::{FrameSpan, GroundingCase};

/// `{"id": s, "modality": "visual"|"textual", "vectors": [[f, ...], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub id: String,
    pub modality: Modality,
    pub vectors: Vec<Vec<f64>>,
}

impl SequenceRecord {
    pub fn to_sequence(&self) -> Result<EmbeddingSequence> {
        EmbeddingSequence::new(self.vectors.clone(), self.modality)
    }

    pub fn from_sequence(id: impl Into<String>, seq: &EmbeddingSequence) -> Self {
        Self {
            id: id.into(),
            modality: seq.modality(),
            vectors: seq.vectors().to_vec(),
        }
    }
}

/// One grounding case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub duration_s: f64,
    pub truth: FrameSpan,
    pub visual: Vec<Vec<f64>>,
    pub words: Vec<Vec<f64>>,
    pub phrases: Vec<Vec<f64>>,
    pub sentence: Vec<f64>,
}

impl From<&GroundingCase> for DatasetRecord {
    fn from(case: &GroundingCase) -> Self {
        Self {
            id: case.id.clone(),
            duration_s: case.duration_s,
            truth: case.truth,
            visual: case.visual.vectors().to_vec(),
            words: case.words.vectors().to_vec(),
            phrases: case.phrases.vectors().to_vec(),
            sentence: case.sentence.clone(),
        }
    }
}

impl DatasetRecord {
    pub fn to_case(&self) -> Result<GroundingCase> {
        GroundingCase::new(
            self.id.clone(),
            EmbeddingSequence::visual(self.visual.clone())?,
            EmbeddingSequence::textual(self.words.clone())?,
            EmbeddingSequence::textual(self.phrases.clone())?,
            self.sentence.clone(),
            self.truth,
            self.duration_s,
        )
    }
}

/// `{"id": s, "moments": [{"start_s": f, "end_s": f, "score": f}, ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub moments: Vec<TimedMoment>,
}

/// Parses one record per non-blank line; errors carry the 1-based line number.
pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Record {
            line: k + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Record {
            line: k + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(mut writer: impl Write, records: &[T]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

/// Reads a dataset file into validated cases.
pub fn read_dataset(reader: impl BufRead) -> Result<Vec<GroundingCase>> {
    read_jsonl::<DatasetRecord>(reader)?
        .iter()
        .enumerate()
        .map(|(k, r)| {
            r.to_case().map_err(|e| Error::Record {
                line: k + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
