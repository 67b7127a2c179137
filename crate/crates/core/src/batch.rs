//! Data-parallel top-k ranking over a full candidate × company grid.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scoring::{
    prepare_companies, rank_prepared, CandidateProfile, CompanyProfile, MatchResult, PreparedCandidate, ScoreError,
    ScoringConfig,
};
use crate::text_it::TfidfModel;

pub const BATCH_CSV_HEADER: [&str; 10] =
    ["candidate_id", "rank", "company_id", "final", "compat", "dist_factor", "attitude", "company_factor", "distance_km", "gate"];

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateMatches {
    pub candidate_id: String,
    pub matches: Vec<MatchResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    /// One entry per input candidate, in input order.
    pub results: Vec<CandidateMatches>,
    pub pair_count: u64,
    pub elapsed_secs: f64,
    pub worker_count: usize,
}

impl BatchReport {
    pub fn all_matches(&self) -> impl Iterator<Item = &MatchResult> {
        self.results.iter().flat_map(|c| &c.matches)
    }
}

/// Ranks every company for every candidate on a pool of `workers` threads.
/// Each candidate's list equals what `rank_companies` returns for it alone.
pub fn batch_match(
    candidates: &[CandidateProfile],
    companies: &[CompanyProfile],
    tfidf: &TfidfModel,
    cfg: &ScoringConfig,
    k: usize,
    workers: usize,
) -> Result<BatchReport, BatchError> {
    if k == 0 {
        return Err(BatchError::Param("k must be at least 1".into()));
    }
    if workers == 0 {
        return Err(BatchError::Param("workers must be at least 1".into()));
    }
    cfg.validate().map_err(ScoreError::from)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BatchError::Param(e.to_string()))?;

    let start = Instant::now();
    let results = pool.install(|| -> Result<Vec<CandidateMatches>, ScoreError> {
        let prepared = prepare_companies(companies, tfidf)?;
        candidates
            .par_iter()
            .map(|cand| {
                let pc = PreparedCandidate::new(cand, tfidf)?;
                let matches = rank_prepared(cand, &pc, companies, &prepared, cfg, k);
                Ok(CandidateMatches { candidate_id: cand.id.clone(), matches })
            })
            .collect()
    })?;
    Ok(BatchReport {
        results,
        pair_count: candidates.len() as u64 * companies.len() as u64,
        elapsed_secs: start.elapsed().as_secs_f64(),
        worker_count: workers,
    })
}

/// One row per recommendation, ranks starting at 1.
pub fn write_batch_csv<W: Write>(report: &BatchReport, writer: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(BATCH_CSV_HEADER)?;
    for cm in &report.results {
        for (i, m) in cm.matches.iter().enumerate() {
            wtr.write_record([
                cm.candidate_id.clone(),
                (i + 1).to_string(),
                m.company_id.clone(),
                m.final_score.to_string(),
                m.compat.to_string(),
                m.dist_factor.to_string(),
                m.attitude.to_string(),
                m.company_factor.to_string(),
                m.distance_km.to_string(),
                m.gate.as_str().to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_batch_csv(report: &BatchReport, path: impl AsRef<Path>) -> csv::Result<()> {
    write_batch_csv(report, std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::rank_companies;
    use crate::synthetic::{gen_candidates, gen_companies, GenParams, Lexicon};
    use crate::text_it::fit_tfidf;

    fn world(n: usize, m: usize) -> (Vec<CandidateProfile>, Vec<CompanyProfile>, TfidfModel) {
        let p = GenParams { n_candidates: n, n_companies: m, seed: 5, noise: 0.05 };
        (gen_candidates(&p), gen_companies(&p), fit_tfidf(&Lexicon::bundled().corpus()).unwrap())
    }

    #[test]
    fn single_candidate_equals_rank_companies() {
        let (cands, comps, tfidf) = world(1, 200);
        let cfg = ScoringConfig::default();
        let r = batch_match(&cands, &comps, &tfidf, &cfg, 10, 2).unwrap();
        assert_eq!(r.results[0].matches, rank_companies(&cands[0], &comps, &tfidf, &cfg, 10).unwrap());
        assert_eq!(r.pair_count, 200);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let (cands, comps, tfidf) = world(100, 100);
        let cfg = ScoringConfig::default();
        let a = batch_match(&cands, &comps, &tfidf, &cfg, 5, 1).unwrap();
        let b = batch_match(&cands, &comps, &tfidf, &cfg, 5, 8).unwrap();
        assert_eq!(a.results, b.results);
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        write_batch_csv(&a, &mut ca).unwrap();
        write_batch_csv(&b, &mut cb).unwrap();
        assert_eq!(ca, cb);
        assert_eq!((a.worker_count, b.worker_count), (1, 8));
    }

    #[test]
    fn missing_location_names_the_entity() {
        let (mut cands, comps, tfidf) = world(3, 10);
        cands[1].residence = None;
        let err = batch_match(&cands, &comps, &tfidf, &ScoringConfig::default(), 3, 2).unwrap_err();
        assert!(err.to_string().contains(&cands[1].id), "{err}");
    }

    #[test]
    fn csv_layout() {
        let (cands, comps, tfidf) = world(2, 50);
        let r = batch_match(&cands, &comps, &tfidf, &ScoringConfig::default(), 2, 1).unwrap();
        let mut out = Vec::new();
        write_batch_csv(&r, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), BATCH_CSV_HEADER.join(","));
        assert_eq!(lines.count(), r.all_matches().count());
    }

    #[test]
    fn zero_k_rejected() {
        let (cands, comps, tfidf) = world(1, 1);
        assert!(matches!(batch_match(&cands, &comps, &tfidf, &ScoringConfig::default(), 0, 1), Err(BatchError::Param(_))));
    }
}
