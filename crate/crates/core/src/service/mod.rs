//! Matching service: shared state, request handling and the HTTP front end.
//!
//! Datasets, the TF-IDF model, the learned model and the scoring config are
//! immutable snapshots behind `Arc`s; updates swap the whole snapshot, so a
//! request sees exactly one version of each from start to finish.

mod audit;
mod http;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use chrono::Utc;
use serde::{Deserialize, Serialize};

pub use audit::{
    read_records, AuditEvent, AuditLog, AuditRecord, CandidateSnapshot, OperatorAction, OverrideState, Recommendation,
};
pub use http::{router, serve, AUTH_TOKEN_ENV};

use crate::learning::{FeatureVector, ModelBundle};
use crate::scoring::{
    pair_components, prepare_companies, rank_prepared, CandidateProfile, CompanyProfile, ConfigError, ConfigOverrides,
    MatchResult, PreparedCandidate, PreparedCompany, ScoreError, ScoringConfig,
};
use crate::text_it::{TextError, TfidfModel};

pub const DEFAULT_K: usize = 10;
pub const MAX_K: usize = 1000;
const LATENCY_WINDOW: usize = 1024;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("bad request: {field}: {reason}")]
    BadRequest { field: String, reason: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(#[from] ConfigError),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("datasets not loaded")]
    Unavailable,
    #[error("audit log: {0}")]
    Audit(#[from] std::io::Error),
    #[error(transparent)]
    Score(ScoreError),
}

impl ServiceError {
    fn bad(field: &str, reason: impl Into<String>) -> Self {
        ServiceError::BadRequest { field: field.to_string(), reason: reason.into() }
    }
}

impl From<ScoreError> for ServiceError {
    fn from(e: ScoreError) -> Self {
        match e {
            ScoreError::Config(c) => ServiceError::InvalidConfig(c),
            other => ServiceError::Score(other),
        }
    }
}

/// Loaded candidates and companies with per-company scoring data.
pub struct Dataset {
    pub candidates: Vec<CandidateProfile>,
    pub companies: Vec<CompanyProfile>,
    pub tfidf: TfidfModel,
    prepared: Vec<PreparedCompany>,
    by_id: HashMap<String, usize>,
}

impl Dataset {
    /// Fits the TF-IDF model on the companies' task descriptions.
    pub fn build(candidates: Vec<CandidateProfile>, companies: Vec<CompanyProfile>) -> Result<Self, DatasetError> {
        let tfidf = crate::pipeline::company_tfidf(&companies)?;
        Self::with_tfidf(candidates, companies, tfidf)
    }

    pub fn with_tfidf(
        candidates: Vec<CandidateProfile>,
        companies: Vec<CompanyProfile>,
        tfidf: TfidfModel,
    ) -> Result<Self, DatasetError> {
        let prepared = prepare_companies(&companies, &tfidf)?;
        let by_id = candidates.iter().enumerate().map(|(i, c)| (c.id.clone(), i)).collect();
        Ok(Dataset { candidates, companies, tfidf, prepared, by_id })
    }

    pub fn candidate(&self, id: &str) -> Option<&CandidateProfile> {
        self.by_id.get(id).map(|&i| &self.candidates[i])
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchRequest {
    #[serde(default)]
    pub candidate_id: Option<String>,
    #[serde(default)]
    pub candidate: Option<CandidateProfile>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub overrides: Option<ConfigOverrides>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResponse {
    pub request_id: String,
    pub candidate_id: String,
    pub config: ScoringConfig,
    pub results: Vec<MatchResult>,
    /// Calibrated placement probability per result, when a model is loaded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverrideDecision {
    Accepted,
    Overridden,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideRequest {
    pub request_id: String,
    pub action: OverrideDecision,
    #[serde(default)]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub candidates: usize,
    pub companies: usize,
    pub open_positions: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub samples: usize,
    pub p50_ms: Option<f64>,
    pub p90_ms: Option<f64>,
    pub p99_ms: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsSnapshot {
    pub totals: Totals,
    /// Zero when there are no candidates.
    pub mean_attitude: f64,
    pub disability_histogram: BTreeMap<String, usize>,
    pub sector_histogram: BTreeMap<String, usize>,
    pub latency: LatencySummary,
}

pub struct MatchService {
    data: RwLock<Option<Arc<Dataset>>>,
    config: RwLock<Arc<ScoringConfig>>,
    model: RwLock<Option<Arc<ModelBundle>>>,
    audit: Mutex<AuditLog>,
    latencies_ms: Mutex<VecDeque<f64>>,
}

impl MatchService {
    pub fn new(config: ScoringConfig, audit: AuditLog) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(MatchService {
            data: RwLock::new(None),
            config: RwLock::new(Arc::new(config)),
            model: RwLock::new(None),
            audit: Mutex::new(audit),
            latencies_ms: Mutex::new(VecDeque::with_capacity(LATENCY_WINDOW)),
        })
    }

    pub fn load_dataset(&self, dataset: Dataset) {
        *self.data.write().unwrap() = Some(Arc::new(dataset));
    }

    pub fn load_model(&self, model: ModelBundle) {
        *self.model.write().unwrap() = Some(Arc::new(model));
    }

    pub fn dataset(&self) -> Option<Arc<Dataset>> {
        self.data.read().unwrap().clone()
    }

    pub fn config(&self) -> Arc<ScoringConfig> {
        self.config.read().unwrap().clone()
    }

    pub fn has_model(&self) -> bool {
        self.model.read().unwrap().is_some()
    }

    pub fn handle_match(&self, req: &MatchRequest) -> Result<MatchResponse, ServiceError> {
        let start = Instant::now();
        let k = req.k.unwrap_or(DEFAULT_K);
        if k == 0 || k > MAX_K {
            return Err(ServiceError::bad("k", format!("must be in 1..={MAX_K}")));
        }
        let data = self.dataset().ok_or(ServiceError::Unavailable)?;
        let base = self.config();
        let cfg = match &req.overrides {
            Some(o) => base.with_overrides(o)?,
            None => (*base).clone(),
        };

        let cand = match (&req.candidate_id, &req.candidate) {
            (Some(id), None) => data.candidate(id).ok_or_else(|| ServiceError::NotFound(format!("candidate {id}")))?,
            (None, Some(c)) => {
                c.validate().map_err(|(field, reason)| ServiceError::bad(&format!("candidate.{field}"), reason))?;
                if c.residence.is_none() {
                    return Err(ServiceError::bad("candidate.residence", "coordinates are required"));
                }
                c
            }
            _ => return Err(ServiceError::bad("candidate", "give exactly one of candidate_id or candidate")),
        };

        let pc = PreparedCandidate::new(cand, &data.tfidf)?;
        let results = rank_prepared(cand, &pc, &data.companies, &data.prepared, &cfg, k);
        let model = self.model.read().unwrap().clone();
        let probabilities = match model {
            Some(m) => Some(self.probabilities(&m, &data, cand, &results, &cfg)?),
            None => None,
        };

        let request_id = new_request_id();
        let rec = AuditRecord::for_match(request_id.clone(), cand, &cfg, k, &results, probabilities.as_deref());
        self.audit.lock().unwrap().append(&rec)?;
        self.record_latency(start.elapsed().as_secs_f64() * 1e3);
        Ok(MatchResponse { request_id, candidate_id: cand.id.clone(), config: cfg, results, probabilities })
    }

    fn probabilities(
        &self,
        model: &ModelBundle,
        data: &Dataset,
        cand: &CandidateProfile,
        results: &[MatchResult],
        cfg: &ScoringConfig,
    ) -> Result<Vec<f64>, ServiceError> {
        let by_id: HashMap<&str, &CompanyProfile> = data.companies.iter().map(|c| (c.id.as_str(), c)).collect();
        results
            .iter()
            .map(|r| {
                let comp = by_id[r.company_id.as_str()];
                let s = pair_components(cand, comp, &data.tfidf, cfg)?;
                Ok(model.probability(&FeatureVector::from_parts(cand, comp, &s)))
            })
            .collect()
    }

    /// Validates and swaps the global config; the change is audited.
    pub fn update_config(&self, new: ScoringConfig) -> Result<ScoringConfig, ServiceError> {
        new.validate()?;
        let mut audit = self.audit.lock().unwrap();
        let mut slot = self.config.write().unwrap();
        let rec = AuditRecord {
            timestamp: Utc::now(),
            request_id: new_request_id(),
            event: AuditEvent::ConfigUpdate { previous: (**slot).clone(), config: new.clone() },
        };
        audit.append(&rec)?;
        *slot = Arc::new(new.clone());
        Ok(new)
    }

    pub fn record_override(&self, req: &OverrideRequest) -> Result<AuditRecord, ServiceError> {
        let action = match (&req.action, req.reason.as_deref().map(str::trim)) {
            (OverrideDecision::Accepted, _) => OperatorAction::Accepted,
            (OverrideDecision::Overridden, Some(r)) if !r.is_empty() => {
                OperatorAction::Overridden { reason: req.reason.clone().unwrap_or_default() }
            }
            (OverrideDecision::Overridden, _) => return Err(ServiceError::bad("reason", "required when overriding")),
        };
        let mut audit = self.audit.lock().unwrap();
        match audit.override_state(&req.request_id) {
            None => return Err(ServiceError::NotFound(format!("request {}", req.request_id))),
            Some(OverrideState::Decided) => {
                return Err(ServiceError::Conflict(format!("request {} already has an operator action", req.request_id)))
            }
            Some(OverrideState::Open) => {}
        }
        let rec = AuditRecord {
            timestamp: Utc::now(),
            request_id: new_request_id(),
            event: AuditEvent::Override { target: req.request_id.clone(), operator_action: action },
        };
        audit.append(&rec)?;
        Ok(rec)
    }

    pub fn analytics_snapshot(&self) -> AnalyticsSnapshot {
        let mut snap = AnalyticsSnapshot { latency: self.latency_summary(), ..Default::default() };
        let Some(data) = self.dataset() else {
            return snap;
        };
        snap.totals = Totals {
            candidates: data.candidates.len(),
            companies: data.companies.len(),
            open_positions: data.companies.iter().map(|c| c.open_positions as u64).sum(),
        };
        if !data.candidates.is_empty() {
            snap.mean_attitude = data.candidates.iter().map(|c| c.attitude).sum::<f64>() / data.candidates.len() as f64;
        }
        for c in &data.candidates {
            *snap.disability_histogram.entry(c.disability_type.as_str().to_string()).or_default() += 1;
        }
        for c in &data.companies {
            *snap.sector_histogram.entry(c.sector.clone()).or_default() += 1;
        }
        snap
    }

    fn record_latency(&self, ms: f64) {
        let mut q = self.latencies_ms.lock().unwrap();
        if q.len() == LATENCY_WINDOW {
            q.pop_front();
        }
        q.push_back(ms);
    }

    fn latency_summary(&self) -> LatencySummary {
        let mut v: Vec<f64> = self.latencies_ms.lock().unwrap().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        // nearest-rank percentile
        let pct = |p: f64| (!v.is_empty()).then(|| v[((p * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1]);
        LatencySummary { samples: v.len(), p50_ms: pct(0.50), p90_ms: pct(0.90), p99_ms: pct(0.99) }
    }
}

fn new_request_id() -> String {
    uuid::Uuid::new_v4().to_string()
}

#[cfg(test)]
mod tests;
