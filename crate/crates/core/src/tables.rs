//! CSV files exchanged between stages: profiles, role assignments, topic
//! relevance and quiz scores.
//!
//! Headers are matched case-insensitively; extra columns are kept where a
//! reader can use them and ignored otherwise.

use std::io::{Read, Write};
use std::path::Path;

use indexmap::IndexMap;

use crate::composition::{GroupRelevanceScore, QuizScore, RoleAssignment};
use crate::error::{GcaError, Result};
use crate::measures::{GcaProfile, ProfileFlag};
use crate::roles::{FeatureTable, FEATURE_NAMES};

/// Column order of a profiles file.
pub const PROFILE_COLUMNS: [&str; 10] = [
    "group_id",
    "participant_id",
    "participation",
    "internal_cohesion",
    "overall_responsivity",
    "social_impact",
    "newness",
    "density",
    "n_contributions",
    "flags",
];

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| GcaError::io(path, e))
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|e| GcaError::io(path, e))
}

/// A CSV file as named string columns.
struct Columns {
    headers: Vec<String>,
    records: Vec<csv::StringRecord>,
}

impl Columns {
    fn read<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(false)
            .from_reader(reader);
        let headers = rdr
            .headers()?
            .iter()
            .map(|h| h.trim().trim_start_matches('\u{feff}').to_ascii_lowercase())
            .collect();
        let records = rdr.records().collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Columns { headers, records })
    }

    fn position(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.position(name).ok_or_else(|| GcaError::MissingColumn {
            column: name.to_string(),
        })
    }

    fn number(&self, row: usize, col: usize) -> Result<f64> {
        let raw = self.records[row].get(col).unwrap_or("").trim();
        raw.parse::<f64>().map_err(|_| {
            GcaError::Argument(format!(
                "row {}: column `{}` holds '{raw}', not a number",
                row + 2,
                self.headers[col]
            ))
        })
    }

    fn text(&self, row: usize, col: usize) -> String {
        self.records[row].get(col).unwrap_or("").trim().to_string()
    }
}

pub fn write_profiles<W: Write>(profiles: &[GcaProfile], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROFILE_COLUMNS)?;
    for p in profiles {
        let flags: Vec<&str> = p.flags.iter().map(|f| f.as_str()).collect();
        w.write_record([
            p.group_id.clone(),
            p.participant_id.clone(),
            p.participation.to_string(),
            p.internal_cohesion.to_string(),
            p.overall_responsivity.to_string(),
            p.social_impact.to_string(),
            p.newness.to_string(),
            p.density.to_string(),
            p.n_contributions.to_string(),
            flags.join("|"),
        ])?;
    }
    w.flush().map_err(|e| GcaError::io("<profiles>", e))
}

pub fn write_profiles_file(profiles: &[GcaProfile], path: &Path) -> Result<()> {
    write_profiles(profiles, create(path)?)
}

/// A profiles-like table: keyed rows with the six features in canonical
/// order, plus any other columns as text.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub keys: Vec<(String, String)>,
    pub features: FeatureTable,
    pub extra: IndexMap<String, Vec<String>>,
}

impl ProfileTable {
    /// Full profiles, when the optional count/flag columns are present.
    pub fn profiles(&self) -> Vec<GcaProfile> {
        let counts = self.extra.get("n_contributions");
        let flags = self.extra.get("flags");
        self.keys
            .iter()
            .zip(&self.features.rows)
            .enumerate()
            .map(|(i, ((g, p), f))| GcaProfile {
                group_id: g.clone(),
                participant_id: p.clone(),
                participation: f[0],
                social_impact: f[1],
                overall_responsivity: f[2],
                internal_cohesion: f[3],
                newness: f[4],
                density: f[5],
                n_contributions: counts.and_then(|c| c[i].parse().ok()).unwrap_or(0),
                flags: flags
                    .map(|fl| fl[i].split('|').filter_map(ProfileFlag::parse).collect())
                    .unwrap_or_default(),
            })
            .collect()
    }

    /// Values of an extra column, e.g. reference labels.
    pub fn column(&self, name: &str) -> Result<&[String]> {
        self.extra
            .get(&name.to_ascii_lowercase())
            .map(Vec::as_slice)
            .ok_or_else(|| GcaError::MissingColumn {
                column: name.to_string(),
            })
    }
}

pub fn read_profiles<R: Read>(reader: R) -> Result<ProfileTable> {
    let cols = Columns::read(reader)?;
    let g = cols.require("group_id")?;
    let p = cols.require("participant_id")?;
    let feats: Vec<usize> = FEATURE_NAMES
        .iter()
        .map(|f| cols.require(f))
        .collect::<Result<_>>()?;
    if cols.records.is_empty() {
        return Err(GcaError::EmptyInput("profiles file has no rows".into()));
    }
    let mut keys = Vec::with_capacity(cols.records.len());
    let mut rows = Vec::with_capacity(cols.records.len());
    for r in 0..cols.records.len() {
        keys.push((cols.text(r, g), cols.text(r, p)));
        rows.push(
            feats
                .iter()
                .map(|&c| cols.number(r, c))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    let mut extra = IndexMap::new();
    for (c, h) in cols.headers.iter().enumerate() {
        if c != g && c != p && !feats.contains(&c) {
            extra.insert(
                h.clone(),
                (0..cols.records.len()).map(|r| cols.text(r, c)).collect(),
            );
        }
    }
    Ok(ProfileTable {
        keys,
        features: FeatureTable::new(FEATURE_NAMES.iter().map(|s| s.to_string()).collect(), rows)?,
        extra,
    })
}

pub fn read_profiles_file(path: &Path) -> Result<ProfileTable> {
    read_profiles(open(path)?)
}

/// Writes a feature table keyed by synthetic ids, with a label column.
pub fn write_labeled_features<W: Write>(
    table: &FeatureTable,
    group: &str,
    labels: &[usize],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["group_id".to_string(), "participant_id".to_string()];
    header.extend(table.columns.iter().cloned());
    header.push("label".into());
    w.write_record(&header)?;
    for (i, (row, l)) in table.rows.iter().zip(labels).enumerate() {
        let mut rec = vec![group.to_string(), format!("r{:05}", i + 1)];
        rec.extend(row.iter().map(f64::to_string));
        rec.push(l.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| GcaError::io("<features>", e))
}

/// Cluster and role of one participant.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentRow {
    pub group_id: String,
    pub participant_id: String,
    pub cluster: usize,
    pub role: String,
}

pub fn write_assignments<W: Write>(rows: &[AssignmentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group_id", "participant_id", "cluster", "role"])?;
    for r in rows {
        w.write_record([
            r.group_id.as_str(),
            r.participant_id.as_str(),
            &r.cluster.to_string(),
            r.role.as_str(),
        ])?;
    }
    w.flush().map_err(|e| GcaError::io("<assignments>", e))
}

pub fn write_assignments_file(rows: &[AssignmentRow], path: &Path) -> Result<()> {
    write_assignments(rows, create(path)?)
}

/// Role assignments for the group report; `role` falls back to `cluster`.
pub fn read_assignments<R: Read>(reader: R) -> Result<Vec<RoleAssignment>> {
    let cols = Columns::read(reader)?;
    let g = cols.require("group_id")?;
    let p = cols.require("participant_id")?;
    let role = cols
        .position("role")
        .or_else(|| cols.position("cluster"))
        .ok_or_else(|| GcaError::MissingColumn {
            column: "role".into(),
        })?;
    Ok((0..cols.records.len())
        .map(|r| RoleAssignment {
            group_id: cols.text(r, g),
            participant_id: cols.text(r, p),
            role: cols.text(r, role),
        })
        .collect())
}

pub fn read_assignments_file(path: &Path) -> Result<Vec<RoleAssignment>> {
    read_assignments(open(path)?)
}

/// One label column keyed by `(group_id, participant_id)` when those
/// columns exist, by row number otherwise.
pub fn read_label_column<R: Read>(reader: R, column: &str) -> Result<Vec<(String, String)>> {
    let cols = Columns::read(reader)?;
    let c = cols.require(&column.to_ascii_lowercase())?;
    let keyed = cols
        .position("group_id")
        .zip(cols.position("participant_id"));
    Ok((0..cols.records.len())
        .map(|r| {
            let key = match keyed {
                Some((g, p)) => format!("{}\u{1f}{}", cols.text(r, g), cols.text(r, p)),
                None => r.to_string(),
            };
            (key, cols.text(r, c))
        })
        .collect())
}

pub fn write_relevance<W: Write>(rows: &[GroupRelevanceScore], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group_id", "relevance"])?;
    for r in rows {
        w.write_record([r.group_id.clone(), r.relevance.to_string()])?;
    }
    w.flush().map_err(|e| GcaError::io("<relevance>", e))
}

pub fn read_relevance<R: Read>(reader: R) -> Result<Vec<GroupRelevanceScore>> {
    let cols = Columns::read(reader)?;
    let g = cols.require("group_id")?;
    let v = cols.require("relevance")?;
    (0..cols.records.len())
        .map(|r| {
            Ok(GroupRelevanceScore {
                group_id: cols.text(r, g),
                relevance: cols.number(r, v)?,
            })
        })
        .collect()
}

pub fn read_quiz<R: Read>(reader: R) -> Result<Vec<QuizScore>> {
    let cols = Columns::read(reader)?;
    let p = cols.require("participant_id")?;
    let pre = cols.require("pre_pct")?;
    let post = cols.require("post_pct")?;
    (0..cols.records.len())
        .map(|r| {
            Ok(QuizScore {
                participant_id: cols.text(r, p),
                pre_pct: cols.number(r, pre)?,
                post_pct: cols.number(r, post)?,
            })
        })
        .collect()
}

/// Opens `path` and applies one of the readers above.
pub fn read_file<T>(path: &Path, reader: impl FnOnce(std::fs::File) -> Result<T>) -> Result<T> {
    reader(open(path)?)
}

/// Creates `path` and applies one of the writers above.
pub fn write_file(path: &Path, writer: impl FnOnce(std::fs::File) -> Result<()>) -> Result<()> {
    writer(create(path)?)
}
