//! Append-only JSONL audit log with size-based rotation.
//!
//! Every line is flushed and fsynced before `append` returns. Rotated files
//! are `<path>.1` (newest) through `<path>.<keep>`.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::scoring::{CandidateProfile, DisabilityType, MatchResult, ScoringConfig};

pub const DEFAULT_MAX_BYTES: u64 = 16 * 1024 * 1024;
pub const DEFAULT_KEEP: usize = 5;

/// What is kept about a candidate: identifiers and scoring inputs only.
/// Address, coordinates, skills and exclusion text are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSnapshot {
    pub id: String,
    pub education_level: u8,
    pub disability_type: DisabilityType,
    pub attitude: f64,
    pub years_experience: f64,
    pub unemployment_months: u32,
    pub exclusion_count: usize,
}

impl From<&CandidateProfile> for CandidateSnapshot {
    fn from(c: &CandidateProfile) -> Self {
        CandidateSnapshot {
            id: c.id.clone(),
            education_level: c.education_level.get(),
            disability_type: c.disability_type,
            attitude: c.attitude,
            years_experience: c.years_experience,
            unemployment_months: c.unemployment_months,
            exclusion_count: c.exclusions.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub company_id: String,
    pub final_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorAction {
    None,
    Accepted,
    Overridden { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum AuditEvent {
    Match {
        candidate: CandidateSnapshot,
        config: ScoringConfig,
        k: usize,
        recommendations: Vec<Recommendation>,
        operator_action: OperatorAction,
    },
    ConfigUpdate {
        previous: ScoringConfig,
        config: ScoringConfig,
    },
    Override {
        /// The match request this action applies to.
        target: String,
        operator_action: OperatorAction,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub timestamp: DateTime<Utc>,
    pub request_id: String,
    #[serde(flatten)]
    pub event: AuditEvent,
}

impl AuditRecord {
    pub fn for_match(
        request_id: String,
        cand: &CandidateProfile,
        cfg: &ScoringConfig,
        k: usize,
        results: &[MatchResult],
        probabilities: Option<&[f64]>,
    ) -> Self {
        let recommendations = results
            .iter()
            .enumerate()
            .map(|(i, r)| Recommendation {
                company_id: r.company_id.clone(),
                final_score: r.final_score,
                probability: probabilities.map(|p| p[i]),
            })
            .collect();
        AuditRecord {
            timestamp: Utc::now(),
            request_id,
            event: AuditEvent::Match {
                candidate: cand.into(),
                config: cfg.clone(),
                k,
                recommendations,
                operator_action: OperatorAction::None,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverrideState {
    Open,
    Decided,
}

/// Single writer; callers serialize access (the service wraps it in a mutex).
pub struct AuditLog {
    path: PathBuf,
    file: File,
    size: u64,
    max_bytes: u64,
    keep: usize,
    /// Match request ids seen in this log (including rotated files).
    requests: HashMap<String, OverrideState>,
}

impl AuditLog {
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<Self> {
        Self::with_rotation(path, DEFAULT_MAX_BYTES, DEFAULT_KEEP)
    }

    /// Opens for append and replays existing files so overrides of earlier
    /// requests are still checked after a restart.
    pub fn with_rotation(path: impl AsRef<Path>, max_bytes: u64, keep: usize) -> std::io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut requests = HashMap::new();
        let mut files: Vec<PathBuf> = (1..=keep).rev().map(|i| rotated(&path, i)).collect();
        files.push(path.clone());
        for f in files.iter().filter(|f| f.exists()) {
            for rec in read_records(f)? {
                match rec.event {
                    AuditEvent::Match { .. } => {
                        requests.insert(rec.request_id, OverrideState::Open);
                    }
                    AuditEvent::Override { target, .. } => {
                        requests.insert(target, OverrideState::Decided);
                    }
                    AuditEvent::ConfigUpdate { .. } => {}
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        let size = file.metadata()?.len();
        Ok(AuditLog { path, file, size, max_bytes: max_bytes.max(1), keep, requests })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn override_state(&self, request_id: &str) -> Option<OverrideState> {
        self.requests.get(request_id).copied()
    }

    /// Writes one line and fsyncs it.
    pub fn append(&mut self, rec: &AuditRecord) -> std::io::Result<()> {
        let mut line = serde_json::to_vec(rec).map_err(std::io::Error::other)?;
        line.push(b'\n');
        if self.size > 0 && self.size + line.len() as u64 > self.max_bytes {
            self.rotate()?;
        }
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        self.size += line.len() as u64;
        match &rec.event {
            AuditEvent::Match { .. } => {
                self.requests.insert(rec.request_id.clone(), OverrideState::Open);
            }
            AuditEvent::Override { target, .. } => {
                self.requests.insert(target.clone(), OverrideState::Decided);
            }
            AuditEvent::ConfigUpdate { .. } => {}
        }
        Ok(())
    }

    fn rotate(&mut self) -> std::io::Result<()> {
        if self.keep == 0 {
            self.file.set_len(0)?;
            self.size = 0;
            return Ok(());
        }
        let oldest = rotated(&self.path, self.keep);
        if oldest.exists() {
            fs::remove_file(&oldest)?;
        }
        for i in (1..self.keep).rev() {
            let from = rotated(&self.path, i);
            if from.exists() {
                fs::rename(&from, rotated(&self.path, i + 1))?;
            }
        }
        fs::rename(&self.path, rotated(&self.path, 1))?;
        self.file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        self.size = 0;
        Ok(())
    }
}

fn rotated(path: &Path, i: usize) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(format!(".{i}"));
    PathBuf::from(s)
}

pub fn read_records(path: impl AsRef<Path>) -> std::io::Result<Vec<AuditRecord>> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?);
    }
    Ok(out)
}
