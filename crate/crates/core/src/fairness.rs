//! Statistical-parity audit of recommendation rates across candidate groups.
//!
//! A candidate counts as recommended when at least one of their results
//! passed every gate.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scoring::{CandidateProfile, DisabilityType, EducationLevel, Gate, MatchResult};

pub const DEFAULT_MAX_DISPARITY: f64 = 0.10;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FairnessError {
    #[error("unknown group key {0:?} (expected disability_type or education_level)")]
    UnknownKey(String),
    #[error("result references unknown candidate {0}")]
    UnknownCandidate(String),
    #[error("max_disparity must be in [0, 1], got {0}")]
    Threshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    DisabilityType,
    EducationLevel,
}

impl GroupKey {
    pub fn as_str(&self) -> &'static str {
        match self {
            GroupKey::DisabilityType => "disability_type",
            GroupKey::EducationLevel => "education_level",
        }
    }

    /// Every group the key can take, in a fixed order.
    pub fn all_groups(&self) -> Vec<String> {
        match self {
            GroupKey::DisabilityType => DisabilityType::ALL.iter().map(|d| d.as_str().to_string()).collect(),
            GroupKey::EducationLevel => (0..EducationLevel::LABELS.len()).map(|l| l.to_string()).collect(),
        }
    }

    pub fn group_of(&self, c: &CandidateProfile) -> String {
        match self {
            GroupKey::DisabilityType => c.disability_type.as_str().to_string(),
            GroupKey::EducationLevel => c.education_level.get().to_string(),
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroupKey {
    type Err = FairnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "disability_type" => Ok(GroupKey::DisabilityType),
            "education_level" => Ok(GroupKey::EducationLevel),
            other => Err(FairnessError::UnknownKey(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRate {
    pub group: String,
    pub recommended: usize,
    pub total: usize,
    /// Zero for empty groups.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub key: GroupKey,
    pub groups: Vec<GroupRate>,
    /// Max minus min rate over groups with members.
    pub disparity: f64,
}

impl ParityReport {
    pub fn rate(&self, group: &str) -> Option<f64> {
        self.groups.iter().find(|g| g.group == group).map(|g| g.rate)
    }

    fn extremes(&self) -> Option<(&GroupRate, &GroupRate)> {
        let mut populated = self.groups.iter().filter(|g| g.total > 0);
        let first = populated.next()?;
        Some(populated.fold((first, first), |(lo, hi), g| {
            (if g.rate < lo.rate { g } else { lo }, if g.rate > hi.rate { g } else { hi })
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityAlert {
    pub key: GroupKey,
    pub highest_group: String,
    pub highest_rate: f64,
    pub lowest_group: String,
    pub lowest_rate: f64,
    pub disparity: f64,
    pub threshold: f64,
}

impl fmt::Display for ParityAlert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parity alert on {}: {} at {:.3} vs {} at {:.3} (disparity {:.3} > {:.3})",
            self.key, self.highest_group, self.highest_rate, self.lowest_group, self.lowest_rate, self.disparity, self.threshold
        )
    }
}

pub fn parity_report(
    results: &[MatchResult],
    candidates: &[CandidateProfile],
    key: GroupKey,
) -> Result<ParityReport, FairnessError> {
    let by_id: HashMap<&str, &CandidateProfile> = candidates.iter().map(|c| (c.id.as_str(), c)).collect();
    let mut recommended: HashSet<&str> = HashSet::new();
    for r in results {
        if !by_id.contains_key(r.candidate_id.as_str()) {
            return Err(FairnessError::UnknownCandidate(r.candidate_id.clone()));
        }
        if r.gate == Gate::Passed {
            recommended.insert(r.candidate_id.as_str());
        }
    }

    let names = key.all_groups();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();
    let mut counts = vec![(0usize, 0usize); names.len()];
    let mut seen: HashSet<&str> = HashSet::new();
    for c in candidates {
        if !seen.insert(c.id.as_str()) {
            continue;
        }
        let slot = &mut counts[index[key.group_of(c).as_str()]];
        slot.1 += 1;
        if recommended.contains(c.id.as_str()) {
            slot.0 += 1;
        }
    }

    let groups: Vec<GroupRate> = names
        .into_iter()
        .zip(counts)
        .map(|(group, (rec, total))| GroupRate {
            group,
            recommended: rec,
            total,
            rate: if total == 0 { 0.0 } else { rec as f64 / total as f64 },
        })
        .collect();
    let mut report = ParityReport { key, groups, disparity: 0.0 };
    if let Some((lo, hi)) = report.extremes() {
        report.disparity = hi.rate - lo.rate;
    }
    Ok(report)
}

/// At most one alert: raised when disparity strictly exceeds `max_disparity`.
pub fn check_alert(report: &ParityReport, max_disparity: f64) -> Result<Vec<ParityAlert>, FairnessError> {
    if !(0.0..=1.0).contains(&max_disparity) {
        return Err(FairnessError::Threshold(max_disparity));
    }
    let Some((lo, hi)) = report.extremes() else {
        return Ok(Vec::new());
    };
    if report.disparity <= max_disparity {
        return Ok(Vec::new());
    }
    Ok(vec![ParityAlert {
        key: report.key,
        highest_group: hi.group.clone(),
        highest_rate: hi.rate,
        lowest_group: lo.group.clone(),
        lowest_rate: lo.rate,
        disparity: report.disparity,
        threshold: max_disparity,
    }])
}

/// Columns `group_key,group,recommended,total,rate`.
pub fn write_parity_csv<W: Write>(report: &ParityReport, writer: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["group_key", "group", "recommended", "total", "rate"])?;
    for g in &report.groups {
        wtr.write_record([
            report.key.as_str().to_string(),
            g.group.clone(),
            g.recommended.to_string(),
            g.total.to_string(),
            g.rate.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn summary(report: &ParityReport, alerts: &[ParityAlert]) -> String {
    let mut out = format!("recommendation rate by {}\n", report.key);
    for g in &report.groups {
        if g.total == 0 {
            out.push_str(&format!("  {:<14} {:>6} candidates\n", g.group, 0));
        } else {
            out.push_str(&format!("  {:<14} {:>6} candidates  rate {:.3}\n", g.group, g.total, g.rate));
        }
    }
    out.push_str(&format!("disparity {:.3}\n", report.disparity));
    if alerts.is_empty() {
        out.push_str("no alerts\n");
    }
    for a in alerts {
        out.push_str(&format!("{a}\n"));
    }
    out
}
