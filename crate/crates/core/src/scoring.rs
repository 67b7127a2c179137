//! Gated, weighted multi-criteria scoring of candidate/company pairs.
//!
//! A pair first runs through four hard gates, in this order: exclusion
//! phrases against the company's task text, minimum attitude, maximum
//! distance, minimum compatibility. Pairs that pass get a final score equal
//! to the weight-normalized combination of four components:
//!
//! | component        | default weight | value                                   |
//! |------------------|----------------|-----------------------------------------|
//! | compatibility    | 0.35           | TF-IDF cosine of skills vs. tasks       |
//! | distance factor  | 0.25           | `clamp(1 - d / d_max, 0, 1)`            |
//! | attitude         | 0.20           | candidate attitude score                |
//! | company factor   | 0.15           | certification, remote work, hire record |
//!
//! The weights are divided by their sum, so the final score is a convex
//! combination and scaling all weights leaves every score unchanged.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{haversine_km, GeoPoint};
use crate::text_it::{ExclusionSet, SparseVector, TfidfModel};

pub const DISTANCE_LIMIT_RANGE_KM: (f64, f64) = (5.0, 50.0);

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("candidate {0} has no geocoded residence")]
    CandidateLocationMissing(String),
    #[error("company {0} has no geocoded location")]
    CompanyLocationMissing(String),
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{field} must be finite and >= 0 (got {value})")]
    NegativeWeight { field: &'static str, value: f64 },
    #[error("at least one weight must be positive")]
    AllWeightsZero,
    #[error("{field} must lie in [{min}, {max}] (got {value})")]
    OutOfRange { field: &'static str, value: f64, min: f64, max: f64 },
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("config file: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown {kind} {value:?}")]
pub struct UnknownVariant {
    pub kind: &'static str,
    pub value: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisabilityType {
    Physical,
    Visual,
    Hearing,
    Intellectual,
    Psychiatric,
    Multiple,
}

impl DisabilityType {
    pub const ALL: [DisabilityType; 6] = [
        DisabilityType::Physical,
        DisabilityType::Visual,
        DisabilityType::Hearing,
        DisabilityType::Intellectual,
        DisabilityType::Psychiatric,
        DisabilityType::Multiple,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DisabilityType::Physical => "physical",
            DisabilityType::Visual => "visual",
            DisabilityType::Hearing => "hearing",
            DisabilityType::Intellectual => "intellectual",
            DisabilityType::Psychiatric => "psychiatric",
            DisabilityType::Multiple => "multiple",
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for DisabilityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DisabilityType {
    type Err = UnknownVariant;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DisabilityType::ALL
            .into_iter()
            .find(|d| d.as_str() == s.trim())
            .ok_or_else(|| UnknownVariant { kind: "disability_type", value: s.to_string() })
    }
}

/// Ordinal education level, 0 (none / primary) to 4 (postgraduate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct EducationLevel(u8);

impl EducationLevel {
    pub const MAX: u8 = 4;
    pub const LABELS: [&'static str; 5] = ["primary", "lower_secondary", "upper_secondary", "bachelor", "postgraduate"];

    pub fn new(level: u8) -> Result<Self, UnknownVariant> {
        if level <= Self::MAX {
            Ok(EducationLevel(level))
        } else {
            Err(UnknownVariant { kind: "education_level", value: level.to_string() })
        }
    }

    pub fn get(&self) -> u8 {
        self.0
    }

    pub fn label(&self) -> &'static str {
        Self::LABELS[self.0 as usize]
    }
}

impl TryFrom<u8> for EducationLevel {
    type Error = UnknownVariant;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        EducationLevel::new(v)
    }
}

impl From<EducationLevel> for u8 {
    fn from(e: EducationLevel) -> u8 {
        e.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateProfile {
    pub id: String,
    /// Free-text residence address; only needed when `residence` is absent.
    #[serde(default)]
    pub address: Option<String>,
    #[serde(default)]
    pub residence: Option<GeoPoint>,
    pub education_level: EducationLevel,
    pub disability_type: DisabilityType,
    pub attitude: f64,
    pub years_experience: f64,
    pub unemployment_months: u32,
    #[serde(default)]
    pub skills_text: String,
    #[serde(default)]
    pub exclusions: Vec<String>,
}

impl CandidateProfile {
    /// Returns `(field, reason)` for the first violated invariant.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.id.trim().is_empty() {
            return Err(("id", "missing id".into()));
        }
        if !(self.attitude.is_finite() && (0.0..=1.0).contains(&self.attitude)) {
            return Err(("attitude", format!("{} outside [0, 1]", self.attitude)));
        }
        if !(self.years_experience.is_finite() && self.years_experience >= 0.0) {
            return Err(("years_experience", format!("{} is negative or not finite", self.years_experience)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompanyProfile {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub address: Option<String>,
    #[serde(default)]
    pub location: Option<GeoPoint>,
    pub sector: String,
    pub employee_count: u32,
    pub open_positions: u32,
    pub tasks_text: String,
    pub remote_available: bool,
    pub certified: bool,
    pub past_disability_hires: u32,
}

impl CompanyProfile {
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.id.trim().is_empty() {
            return Err(("id", "missing id".into()));
        }
        if self.employee_count < 1 {
            return Err(("employee_count", "must be at least 1".into()));
        }
        Ok(())
    }
}

/// Component weights and the three operator thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    pub w_compat: f64,
    pub w_dist: f64,
    pub w_att: f64,
    pub w_company: f64,
    pub attitude_min: f64,
    pub distance_max_km: f64,
    pub compat_min: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            w_compat: 0.35,
            w_dist: 0.25,
            w_att: 0.20,
            w_company: 0.15,
            attitude_min: 0.3,
            distance_max_km: 30.0,
            compat_min: 0.0,
        }
    }
}

/// Per-request partial configuration; absent fields keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub w_compat: Option<f64>,
    pub w_dist: Option<f64>,
    pub w_att: Option<f64>,
    pub w_company: Option<f64>,
    pub attitude_min: Option<f64>,
    pub distance_max_km: Option<f64>,
    pub compat_min: Option<f64>,
}

impl ConfigOverrides {
    pub fn is_empty(&self) -> bool {
        *self == ConfigOverrides::default()
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let weights = [
            ("w_compat", self.w_compat),
            ("w_dist", self.w_dist),
            ("w_att", self.w_att),
            ("w_company", self.w_company),
        ];
        for (field, value) in weights {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ConfigError::NegativeWeight { field, value });
            }
        }
        if weights.iter().all(|(_, w)| *w == 0.0) {
            return Err(ConfigError::AllWeightsZero);
        }
        let (dmin, dmax) = DISTANCE_LIMIT_RANGE_KM;
        let ranges = [
            ("attitude_min", self.attitude_min, 0.0, 1.0),
            ("compat_min", self.compat_min, 0.0, 1.0),
            ("distance_max_km", self.distance_max_km, dmin, dmax),
        ];
        for (field, value, min, max) in ranges {
            if !(value.is_finite() && value >= min && value <= max) {
                return Err(ConfigError::OutOfRange { field, value, min, max });
            }
        }
        Ok(())
    }

    pub fn weight_sum(&self) -> f64 {
        self.w_compat + self.w_dist + self.w_att + self.w_company
    }

    /// Applies `overrides` and validates the result.
    pub fn with_overrides(&self, o: &ConfigOverrides) -> Result<ScoringConfig, ConfigError> {
        let cfg = ScoringConfig {
            w_compat: o.w_compat.unwrap_or(self.w_compat),
            w_dist: o.w_dist.unwrap_or(self.w_dist),
            w_att: o.w_att.unwrap_or(self.w_att),
            w_company: o.w_company.unwrap_or(self.w_company),
            attitude_min: o.attitude_min.unwrap_or(self.attitude_min),
            distance_max_km: o.distance_max_km.unwrap_or(self.distance_max_km),
            compat_min: o.compat_min.unwrap_or(self.compat_min),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses `key = value` lines. Missing keys take defaults; unknown keys are rejected.
    pub fn from_kv_str(text: &str) -> Result<ScoringConfig, ConfigError> {
        let cfg: ScoringConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            match msg.strip_prefix("unknown field `") {
                Some(rest) => ConfigError::UnknownKey(rest.split('`').next().unwrap_or("").to_string()),
                None => ConfigError::Parse(msg),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_kv_string(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ScoringConfig, ConfigError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::from_kv_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_kv_string())
    }
}

/// Linear decay: 1 at zero distance, 0 at and beyond `d_max`.
pub fn distance_factor(d_km: f64, d_max: f64) -> Result<f64, ConfigError> {
    if !(d_max.is_finite() && d_max > 0.0) {
        return Err(ConfigError::OutOfRange { field: "distance_max_km", value: d_max, min: 0.0, max: f64::INFINITY });
    }
    Ok((1.0 - d_km / d_max).clamp(0.0, 1.0))
}

/// `0.4·certified + 0.3·remote + 0.3·min(1, hires / 5)`.
pub fn company_factor(c: &CompanyProfile) -> f64 {
    let certified = if c.certified { 1.0 } else { 0.0 };
    let remote = if c.remote_available { 1.0 } else { 0.0 };
    let record = (c.past_disability_hires as f64 / 5.0).min(1.0);
    0.4 * certified + 0.3 * remote + 0.3 * record
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    Passed,
    ExcludedByTasks,
    BelowAttitude,
    BeyondDistance,
    BelowCompatibility,
}

impl Gate {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gate::Passed => "passed",
            Gate::ExcludedByTasks => "excluded_by_tasks",
            Gate::BelowAttitude => "below_attitude",
            Gate::BeyondDistance => "beyond_distance",
            Gate::BelowCompatibility => "below_compatibility",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gate {
    type Err = UnknownVariant;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Gate::Passed, Gate::ExcludedByTasks, Gate::BelowAttitude, Gate::BeyondDistance, Gate::BelowCompatibility]
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| UnknownVariant { kind: "gate", value: s.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Compatibility,
    Distance,
    Attitude,
    Company,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub component: Component,
    /// Normalized weight (the four sum to 1).
    pub weight: f64,
    pub value: f64,
    /// `weight * value`; zero for gated pairs.
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub candidate_id: String,
    pub company_id: String,
    pub compat: f64,
    pub dist_factor: f64,
    pub attitude: f64,
    pub company_factor: f64,
    pub distance_km: f64,
    pub final_score: f64,
    pub gate: Gate,
    pub explanation: Vec<Contribution>,
    /// Exclusion phrases and the task terms they matched, when excluded.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded_terms: Vec<(String, String)>,
}

/// Raw component values and gate outcome of one pair, without allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore {
    pub compat: f64,
    pub dist_factor: f64,
    pub attitude: f64,
    pub company_factor: f64,
    pub distance_km: f64,
    pub gate: Gate,
    pub final_score: f64,
}

/// Company data derived once per TF-IDF model and reused across candidates.
#[derive(Debug, Clone)]
pub struct PreparedCompany {
    pub location: GeoPoint,
    pub task_terms: HashSet<String>,
    pub task_vector: SparseVector,
    pub company_factor: f64,
}

impl PreparedCompany {
    pub fn new(c: &CompanyProfile, tfidf: &TfidfModel) -> Result<Self, ScoreError> {
        let location = c.location.ok_or_else(|| ScoreError::CompanyLocationMissing(c.id.clone()))?;
        let tokens = tfidf.tokenize(&c.tasks_text).tokens;
        Ok(PreparedCompany {
            location,
            task_vector: tfidf.vectorize_tokens(&tokens),
            task_terms: tokens.into_iter().collect(),
            company_factor: company_factor(c),
        })
    }
}

pub fn prepare_companies(companies: &[CompanyProfile], tfidf: &TfidfModel) -> Result<Vec<PreparedCompany>, ScoreError> {
    use rayon::prelude::*;
    companies.par_iter().map(|c| PreparedCompany::new(c, tfidf)).collect()
}

#[derive(Debug, Clone)]
pub struct PreparedCandidate {
    pub residence: GeoPoint,
    pub exclusions: ExclusionSet,
    pub skills_vector: SparseVector,
    /// Subtracted from the compatibility before gating; zero in normal use.
    /// Lets audits inject a known bias against a group.
    pub compat_penalty: f64,
}

impl PreparedCandidate {
    pub fn new(c: &CandidateProfile, tfidf: &TfidfModel) -> Result<Self, ScoreError> {
        let residence = c.residence.ok_or_else(|| ScoreError::CandidateLocationMissing(c.id.clone()))?;
        Ok(PreparedCandidate {
            residence,
            exclusions: ExclusionSet::new(&c.exclusions, tfidf.stop_words()),
            skills_vector: tfidf.vectorize(&c.skills_text),
            compat_penalty: 0.0,
        })
    }
}

fn normalized_weights(cfg: &ScoringConfig) -> [f64; 4] {
    let sum = cfg.weight_sum();
    [cfg.w_compat / sum, cfg.w_dist / sum, cfg.w_att / sum, cfg.w_company / sum]
}

fn contributions(cfg: &ScoringConfig, values: [f64; 4]) -> [f64; 4] {
    let w = normalized_weights(cfg);
    [w[0] * values[0], w[1] * values[1], w[2] * values[2], w[3] * values[3]]
}

/// Scores a prepared pair. `cfg` must already be validated.
pub fn score_prepared(
    attitude: f64,
    cand: &PreparedCandidate,
    comp: &PreparedCompany,
    cfg: &ScoringConfig,
) -> PairScore {
    let distance_km = haversine_km(cand.residence, comp.location);
    let dist_factor = (1.0 - distance_km / cfg.distance_max_km).clamp(0.0, 1.0);
    let compat = (cand.skills_vector.cosine(&comp.task_vector) - cand.compat_penalty).max(0.0);
    let gate = if cand.exclusions.any_match(&comp.task_terms) {
        Gate::ExcludedByTasks
    } else if attitude < cfg.attitude_min {
        Gate::BelowAttitude
    } else if distance_km > cfg.distance_max_km {
        Gate::BeyondDistance
    } else if compat < cfg.compat_min {
        Gate::BelowCompatibility
    } else {
        Gate::Passed
    };
    let final_score = if gate == Gate::Passed {
        contributions(cfg, [compat, dist_factor, attitude, comp.company_factor]).iter().sum()
    } else {
        0.0
    };
    PairScore { compat, dist_factor, attitude, company_factor: comp.company_factor, distance_km, gate, final_score }
}

fn materialize(
    cand: &CandidateProfile,
    comp: &CompanyProfile,
    s: PairScore,
    cfg: &ScoringConfig,
    excluded_terms: Vec<(String, String)>,
) -> MatchResult {
    let values = [s.compat, s.dist_factor, s.attitude, s.company_factor];
    let weights = normalized_weights(cfg);
    let contrib = if s.gate == Gate::Passed { contributions(cfg, values) } else { [0.0; 4] };
    let components = [Component::Compatibility, Component::Distance, Component::Attitude, Component::Company];
    let explanation = (0..4)
        .map(|i| Contribution {
            component: components[i],
            weight: weights[i],
            value: values[i],
            contribution: contrib[i],
        })
        .collect();
    MatchResult {
        candidate_id: cand.id.clone(),
        company_id: comp.id.clone(),
        compat: s.compat,
        dist_factor: s.dist_factor,
        attitude: s.attitude,
        company_factor: s.company_factor,
        distance_km: s.distance_km,
        final_score: s.final_score,
        gate: s.gate,
        explanation,
        excluded_terms,
    }
}

/// Raw components of a pair (used by feature extraction).
pub fn pair_components(
    cand: &CandidateProfile,
    comp: &CompanyProfile,
    tfidf: &TfidfModel,
    cfg: &ScoringConfig,
) -> Result<PairScore, ScoreError> {
    cfg.validate()?;
    let pc = PreparedCandidate::new(cand, tfidf)?;
    let pm = PreparedCompany::new(comp, tfidf)?;
    Ok(score_prepared(cand.attitude, &pc, &pm, cfg))
}

pub fn score_pair(
    cand: &CandidateProfile,
    comp: &CompanyProfile,
    tfidf: &TfidfModel,
    cfg: &ScoringConfig,
) -> Result<MatchResult, ScoreError> {
    cfg.validate()?;
    let pc = PreparedCandidate::new(cand, tfidf)?;
    let pm = PreparedCompany::new(comp, tfidf)?;
    let s = score_prepared(cand.attitude, &pc, &pm, cfg);
    let excluded_terms = if s.gate == Gate::ExcludedByTasks {
        pc.exclusions.screen(&pm.task_terms).matched_terms
    } else {
        Vec::new()
    };
    Ok(materialize(cand, comp, s, cfg, excluded_terms))
}

/// Ranking order: higher final first, then nearer, then smaller company id.
pub fn rank_order(a: (&PairScore, &str), b: (&PairScore, &str)) -> Ordering {
    b.0.final_score
        .total_cmp(&a.0.final_score)
        .then(a.0.distance_km.total_cmp(&b.0.distance_km))
        .then_with(|| a.1.cmp(b.1))
}

/// Top-`k` gate-passed results for one candidate against prepared companies.
pub fn rank_prepared(
    cand: &CandidateProfile,
    prepared_cand: &PreparedCandidate,
    companies: &[CompanyProfile],
    prepared: &[PreparedCompany],
    cfg: &ScoringConfig,
    k: usize,
) -> Vec<MatchResult> {
    debug_assert_eq!(companies.len(), prepared.len());
    if k == 0 {
        return Vec::new();
    }
    let mut passed: Vec<(usize, PairScore)> = prepared
        .iter()
        .enumerate()
        .filter_map(|(i, pc)| {
            let s = score_prepared(cand.attitude, prepared_cand, pc, cfg);
            (s.gate == Gate::Passed).then_some((i, s))
        })
        .collect();
    let cmp = |a: &(usize, PairScore), b: &(usize, PairScore)| {
        rank_order((&a.1, &companies[a.0].id), (&b.1, &companies[b.0].id))
    };
    if passed.len() > k {
        passed.select_nth_unstable_by(k - 1, cmp);
        passed.truncate(k);
    }
    passed.sort_by(cmp);
    passed
        .into_iter()
        .map(|(i, s)| materialize(cand, &companies[i], s, cfg, Vec::new()))
        .collect()
}

pub fn rank_companies(
    cand: &CandidateProfile,
    companies: &[CompanyProfile],
    tfidf: &TfidfModel,
    cfg: &ScoringConfig,
    k: usize,
) -> Result<Vec<MatchResult>, ScoreError> {
    cfg.validate()?;
    let pc = PreparedCandidate::new(cand, tfidf)?;
    let prepared = prepare_companies(companies, tfidf)?;
    Ok(rank_prepared(cand, &pc, companies, &prepared, cfg, k))
}
