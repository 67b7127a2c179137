use serde::{Deserialize, Serialize};

use crate::scoring::{pair_components, CandidateProfile, CompanyProfile, PairScore, ScoreError, ScoringConfig};
use crate::text_it::TfidfModel;

pub const FEATURE_COUNT: usize = 10;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "compat",
    "distance_km",
    "dist_factor",
    "attitude",
    "company_factor",
    "education_level",
    "years_experience",
    "unemployment_months",
    "remote_available",
    "certified",
];

/// Fixed-order pair features; see [`FEATURE_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Builds from already-computed pair components.
    pub fn from_parts(cand: &CandidateProfile, comp: &CompanyProfile, s: &PairScore) -> Self {
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        FeatureVector([
            s.compat,
            s.distance_km,
            s.dist_factor,
            cand.attitude,
            s.company_factor,
            cand.education_level.get() as f64,
            cand.years_experience,
            cand.unemployment_months as f64,
            flag(comp.remote_available),
            flag(comp.certified),
        ])
    }
}

impl TryFrom<&[f64]> for FeatureVector {
    type Error = usize;
    fn try_from(v: &[f64]) -> Result<Self, usize> {
        <[f64; FEATURE_COUNT]>::try_from(v).map(FeatureVector).map_err(|_| v.len())
    }
}

pub fn featurize_pair(
    cand: &CandidateProfile,
    comp: &CompanyProfile,
    tfidf: &TfidfModel,
    cfg: &ScoringConfig,
) -> Result<FeatureVector, ScoreError> {
    let s = pair_components(cand, comp, tfidf, cfg)?;
    Ok(FeatureVector::from_parts(cand, comp, &s))
}
