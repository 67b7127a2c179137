//! End-to-end steps shared by the command line tool and the examples:
//! generate a dataset, train a calibrated model, load CSV inputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geo::{CachedGeocoder, GeoCache, GeoError, NominatimClient, RateLimiter};
use crate::ingest::{self, IngestError, ValidationReport};
use crate::learning::{
    evaluate, fit_forest, fit_isotonic, oob_scores, random_search, apply_calibrator, EvalReport, FeatureVector,
    ForestParams, LearnError, ModelBundle,
};
use crate::scoring::{CandidateProfile, CompanyProfile, ScoreError, ScoringConfig};
use crate::synthetic::{gen_candidates, gen_companies, gen_labeled_pairs, save_pairs_csv, GenParams, LabeledPair};
use crate::text_it::{fit_tfidf, TextError, TfidfModel};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error("{0}")]
    Input(String),
}

/// TF-IDF over the companies' task descriptions, one document per company.
pub fn company_tfidf(companies: &[CompanyProfile]) -> Result<TfidfModel, TextError> {
    let corpus: Vec<&str> = companies.iter().map(|c| c.tasks_text.as_str()).collect();
    fit_tfidf(&corpus)
}

pub struct GeneratedFiles {
    pub candidates: PathBuf,
    pub companies: PathBuf,
    pub pairs: PathBuf,
    pub pair_count: usize,
}

/// Writes `candidates.csv`, `companies.csv` and `pairs.csv` into `dir`.
pub fn generate_dataset(p: &GenParams, cfg: &ScoringConfig, dir: &Path) -> Result<GeneratedFiles, PipelineError> {
    std::fs::create_dir_all(dir)?;
    let cands = gen_candidates(p);
    let comps = gen_companies(p);
    let tfidf = company_tfidf(&comps)?;
    let pairs = gen_labeled_pairs(&cands, &comps, p, &tfidf, cfg)?;
    let files = GeneratedFiles {
        candidates: dir.join("candidates.csv"),
        companies: dir.join("companies.csv"),
        pairs: dir.join("pairs.csv"),
        pair_count: pairs.len(),
    };
    ingest::save_candidates_csv(&cands, &files.candidates)?;
    ingest::save_companies_csv(&comps, &files.companies)?;
    save_pairs_csv(&pairs, &files.pairs)?;
    Ok(files)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub params: ForestParams,
    /// When set, `params` is replaced by the best of this many random-search trials.
    pub search_budget: Option<usize>,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { params: ForestParams::default(), search_budget: None, seed: 42, workers: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub pair_count: usize,
    pub params: ForestParams,
    /// Calibrated out-of-bag predictions scored against the training labels.
    pub oob: EvalReport,
}

/// Trains a forest on all pairs and fits the isotonic calibrator on the
/// forest's out-of-bag scores.
pub fn train_model(pairs: &[LabeledPair], opts: &TrainOptions) -> Result<(ModelBundle, TrainSummary), PipelineError> {
    let params = match opts.search_budget {
        Some(budget) => random_search(pairs, budget, opts.seed, opts.workers)?.best_params,
        None => opts.params.clone(),
    };
    let x: Vec<FeatureVector> = pairs.iter().map(|p| p.features).collect();
    let y: Vec<u8> = pairs.iter().map(|p| p.label).collect();
    let forest = fit_forest(&x, &y, &params, opts.seed, opts.workers)?;
    let oob = oob_scores(&forest, &x, &y)?;
    let calibrator = fit_isotonic(&oob, &y)?;
    let calibrated: Vec<f64> = oob.iter().map(|&s| apply_calibrator(&calibrator, s)).collect();
    let report = evaluate(&calibrated, &y, 0.5)?;
    let summary = TrainSummary { pair_count: pairs.len(), params, oob: report };
    Ok((ModelBundle::new(forest, Some(calibrator)), summary))
}

pub struct Inputs {
    pub candidates: Vec<CandidateProfile>,
    pub companies: Vec<CompanyProfile>,
    pub candidate_report: ValidationReport,
    pub company_report: ValidationReport,
}

/// Parses both CSV files. Rows without coordinates are geocoded when a
/// geocoder URL is configured, otherwise loading fails listing them.
pub fn load_inputs(candidates: &Path, companies: &Path, geocode_cache: Option<&Path>) -> Result<Inputs, PipelineError> {
    let (mut cands, candidate_report) = ingest::parse_candidates_csv(candidates)?;
    let (mut comps, company_report) = ingest::parse_companies_csv(companies)?;
    let missing = cands.iter().filter(|c| c.residence.is_none()).count() + comps.iter().filter(|c| c.location.is_none()).count();
    if missing > 0 {
        let client = NominatimClient::from_env().ok_or_else(|| {
            PipelineError::Input(format!("{missing} row(s) lack coordinates and no geocoder URL is configured"))
        })?;
        let cache = match geocode_cache {
            Some(p) => GeoCache::load(p)?,
            None => GeoCache::new(),
        };
        let mut geocoder = CachedGeocoder::new(cache, RateLimiter::default(), client);
        let mut failed = ingest::resolve_candidates(&mut cands, &mut geocoder);
        failed.extend(ingest::resolve_companies(&mut comps, &mut geocoder));
        if geocode_cache.is_some() {
            geocoder.cache.persist()?;
        }
        if let Some((id, err)) = failed.first() {
            return Err(PipelineError::Input(format!("{} row(s) could not be geocoded, first {id}: {err}", failed.len())));
        }
    }
    Ok(Inputs { candidates: cands, companies: comps, candidate_report, company_report })
}
