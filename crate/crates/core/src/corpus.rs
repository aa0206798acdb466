//! Transcript and background-corpus ingestion.
//!
//! A transcript file is a CSV with (at least) the columns `group_id`,
//! `person_id`, `chat_time` and `chat_text`. Column order is free and header
//! names are matched case-insensitively. Rows are grouped by `group_id`;
//! within a group the file order defines the turn index `t`, timestamps are
//! informational only.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use chrono::NaiveDateTime;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{GcaError, Result};

pub const REQUIRED_COLUMNS: [&str; 4] = ["group_id", "person_id", "chat_time", "chat_text"];

const TIME_FORMATS: [&str; 6] = [
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%m/%d/%y %H:%M",
    "%m/%d/%Y %H:%M",
    "%m/%d/%Y %H:%M:%S",
];

/// One message by one participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub group_id: String,
    pub participant_id: String,
    /// 1-based position within the group's sequence.
    pub index: usize,
    pub timestamp: Option<NaiveDateTime>,
    pub text: String,
    pub tokens: Vec<String>,
}

impl Contribution {
    pub fn new(
        group_id: impl Into<String>,
        participant_id: impl Into<String>,
        index: usize,
        text: impl Into<String>,
    ) -> Self {
        let text = text.into();
        Contribution {
            group_id: group_id.into(),
            participant_id: participant_id.into(),
            index,
            timestamp: None,
            tokens: tokenize(&text),
            text,
        }
    }

    pub fn word_count(&self) -> usize {
        self.tokens.len()
    }
}

/// The ordered conversation of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTranscript {
    pub group_id: String,
    /// Participants in order of first appearance.
    pub participants: Vec<String>,
    pub contributions: Vec<Contribution>,
}

impl GroupTranscript {
    /// Builds a transcript from `(participant, text)` turns, assigning
    /// indices `1..=n` in order.
    pub fn from_turns<P, T>(group_id: &str, turns: impl IntoIterator<Item = (P, T)>) -> Result<Self>
    where
        P: Into<String>,
        T: Into<String>,
    {
        let contributions = turns
            .into_iter()
            .enumerate()
            .map(|(i, (p, t))| Contribution::new(group_id, p, i + 1, t))
            .collect();
        Self::from_contributions(group_id, contributions)
    }

    /// Validates and wraps contributions that already carry indices.
    pub fn from_contributions(group_id: &str, contributions: Vec<Contribution>) -> Result<Self> {
        if contributions.is_empty() {
            return Err(GcaError::EmptyInput(format!(
                "group {group_id} has no contributions"
            )));
        }
        let mut participants: Vec<String> = Vec::new();
        for (i, c) in contributions.iter().enumerate() {
            if c.index != i + 1 {
                return Err(GcaError::Argument(format!(
                    "group {group_id}: contribution {} carries index {}",
                    i + 1,
                    c.index
                )));
            }
            if c.group_id != group_id {
                return Err(GcaError::Argument(format!(
                    "contribution {} belongs to group {}, not {group_id}",
                    c.index, c.group_id
                )));
            }
            if !participants.contains(&c.participant_id) {
                participants.push(c.participant_id.clone());
            }
        }
        Ok(GroupTranscript {
            group_id: group_id.to_string(),
            participants,
            contributions,
        })
    }

    /// Number of contributions.
    pub fn n(&self) -> usize {
        self.contributions.len()
    }

    /// Number of distinct participants.
    pub fn k(&self) -> usize {
        self.participants.len()
    }

    /// Position of `participant` in [`GroupTranscript::participants`].
    pub fn participant_index(&self, participant: &str) -> Option<usize> {
        self.participants.iter().position(|p| p == participant)
    }

    /// Speaker index (into `participants`) for every turn.
    pub fn speakers(&self) -> Vec<usize> {
        self.contributions
            .iter()
            .map(|c| {
                self.participant_index(&c.participant_id)
                    .expect("participant registered at construction")
            })
            .collect()
    }
}

/// Where a background document came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceTag {
    Transcript,
    AssignedReading,
    Expansion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundDocument {
    pub doc_id: String,
    pub source_tag: SourceTag,
    pub tokens: Vec<String>,
}

impl BackgroundDocument {
    /// Tokenizes `text`; documents that normalize to nothing are rejected.
    pub fn new(doc_id: impl Into<String>, source_tag: SourceTag, text: &str) -> Result<Self> {
        let doc_id = doc_id.into();
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(GcaError::EmptyInput(format!(
                "document {doc_id} has no tokens"
            )));
        }
        Ok(BackgroundDocument {
            doc_id,
            source_tag,
            tokens,
        })
    }
}

/// Result of reading a transcript file.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub groups: Vec<GroupTranscript>,
    /// Human-readable notes about retained-but-suspicious rows.
    pub warnings: Vec<String>,
}

/// Lowercases and splits on every non-alphanumeric character.
///
/// Stopwords are kept; weighting takes care of them.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn parse_time(raw: &str) -> Option<NaiveDateTime> {
    let raw = raw.trim();
    TIME_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
}

fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| GcaError::io(path, e))?;
    String::from_utf8(bytes).map_err(|_| GcaError::Encoding {
        path: path.to_path_buf(),
    })
}

/// Reads a transcript CSV from disk.
pub fn ingest_transcripts(path: impl AsRef<Path>) -> Result<Ingested> {
    let path = path.as_ref();
    let text = read_utf8(path)?;
    ingest_transcripts_str(&text)
}

/// Parses transcript CSV text.
pub fn ingest_transcripts_str(text: &str) -> Result<Ingested> {
    if text.trim().is_empty() {
        return Err(GcaError::EmptyInput("transcript file is empty".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_lowercase())
        .collect();
    let mut col = [0usize; 4];
    for (slot, name) in col.iter_mut().zip(REQUIRED_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| GcaError::MissingColumn {
                column: name.to_string(),
            })?;
    }
    let [g_col, p_col, t_col, x_col] = col;

    let mut groups: IndexMap<String, Vec<Contribution>> = IndexMap::new();
    let mut warnings = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        let group_id = record[g_col].trim().to_string();
        let participant_id = record[p_col].trim().to_string();
        let raw_time = &record[t_col];
        let chat_text = record[x_col].to_string();
        let line = row_no + 2;
        if group_id.is_empty() || participant_id.is_empty() {
            return Err(GcaError::Argument(format!(
                "line {line}: group_id and person_id must be non-empty"
            )));
        }
        let timestamp = parse_time(raw_time);
        if timestamp.is_none() && !raw_time.trim().is_empty() {
            warnings.push(format!("line {line}: unparsed chat_time `{raw_time}`"));
        }
        if chat_text.trim().is_empty() {
            warnings.push(format!(
                "line {line}: empty chat_text (kept with zero tokens)"
            ));
        }
        let bucket = groups.entry(group_id.clone()).or_default();
        let index = bucket.len() + 1;
        bucket.push(Contribution {
            tokens: tokenize(&chat_text),
            group_id: group_id.clone(),
            participant_id,
            index,
            timestamp,
            text: chat_text,
        });
    }
    if groups.is_empty() {
        return Err(GcaError::EmptyInput("transcript file has no rows".into()));
    }
    let groups = groups
        .into_iter()
        .map(|(gid, contribs)| GroupTranscript::from_contributions(&gid, contribs))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ingested { groups, warnings })
}

/// Writes transcripts in the canonical four-column layout.
pub fn write_transcripts_csv<W: std::io::Write>(groups: &[GroupTranscript], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REQUIRED_COLUMNS)?;
    for g in groups {
        for c in &g.contributions {
            let time = c
                .timestamp
                .map(|t| t.format("%Y-%m-%dT%H:%M:%S").to_string())
                .unwrap_or_default();
            w.write_record([&c.group_id, &c.participant_id, &time, &c.text])?;
        }
    }
    w.flush().map_err(|e| GcaError::io("<csv writer>", e))?;
    Ok(())
}

#[derive(Deserialize)]
struct JsonDoc {
    doc_id: String,
    source_tag: SourceTag,
    text: String,
}

/// Loads a background corpus from a directory (one document per file, file
/// stem as id, tagged `expansion`) or from a JSON-lines file.
///
/// Documents that tokenize to nothing are skipped with a log message.
pub fn load_background_corpus(path: impl AsRef<Path>) -> Result<Vec<BackgroundDocument>> {
    let path = path.as_ref();
    let mut docs = Vec::new();
    if path.is_dir() {
        let mut entries: Vec<_> = fs::read_dir(path)
            .map_err(|e| GcaError::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        entries.sort();
        for file in entries {
            let text = read_utf8(&file)?;
            let id = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            match BackgroundDocument::new(id, SourceTag::Expansion, &text) {
                Ok(d) => docs.push(d),
                Err(e) => log::warn!("skipping {}: {e}", file.display()),
            }
        }
    } else {
        let text = read_utf8(path)?;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let raw: JsonDoc = serde_json::from_str(line).map_err(|e| {
                GcaError::Serialization(format!("{}:{}: {e}", path.display(), i + 1))
            })?;
            match BackgroundDocument::new(raw.doc_id, raw.source_tag, &raw.text) {
                Ok(d) => docs.push(d),
                Err(e) => log::warn!("skipping line {}: {e}", i + 1),
            }
        }
    }
    if docs.is_empty() {
        return Err(GcaError::EmptyInput(format!(
            "no documents found in {}",
            path.display()
        )));
    }
    Ok(docs)
}

/// Every contribution of every group as a `transcript` document.
pub fn transcript_documents(groups: &[GroupTranscript]) -> Vec<BackgroundDocument> {
    groups
        .iter()
        .flat_map(|g| g.contributions.iter())
        .filter(|c| !c.tokens.is_empty())
        .map(|c| BackgroundDocument {
            doc_id: format!("{}#{}", c.group_id, c.index),
            source_tag: SourceTag::Transcript,
            tokens: c.tokens.clone(),
        })
        .collect()
}

/// Distinct participant ids across several groups.
pub fn distinct_participants(groups: &[GroupTranscript]) -> BTreeSet<(String, String)> {
    groups
        .iter()
        .flat_map(|g| {
            g.participants
                .iter()
                .map(move |p| (g.group_id.clone(), p.clone()))
        })
        .collect()
}
