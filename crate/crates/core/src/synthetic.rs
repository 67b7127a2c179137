//! Seeded synthetic candidates, companies and Bernoulli-labeled pairs.
//!
//! Nothing here is fitted to real placement data; every distribution is a
//! fixed artifact choice. Each entity draws from its own stream (see
//! [`crate::streams`]), so output is identical for any worker count.

use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geo::GeoPoint;
use crate::learning::{FeatureVector, FEATURE_NAMES};
use crate::scoring::{
    prepare_companies, score_prepared, CandidateProfile, CompanyProfile, DisabilityType, EducationLevel, Gate,
    PreparedCandidate, ScoreError, ScoringConfig,
};
use crate::streams::{stream_rng, DOMAIN_CANDIDATE, DOMAIN_COMPANY, DOMAIN_PAIR};
use crate::text_it::TfidfModel;

const PROFILES_LEXICON: &str = include_str!("../data/profiles_it.txt");
const EXCLUSIONS_LEXICON: &str = include_str!("../data/exclusions_it.txt");

/// Bounding box (lat_min, lat_max, lon_min, lon_max) of the Villafranca di
/// Verona employment-center catchment, used for all synthetic locations.
pub const VERONA_BBOX: (f64, f64, f64, f64) = (45.30, 45.42, 10.76, 10.94);

const DISABILITY_WEIGHTS: [f64; 6] = [0.30, 0.10, 0.10, 0.20, 0.20, 0.10];

/// `P(education_level | disability_type)`, rows in [`DisabilityType::ALL`] order.
pub const EDUCATION_TABLE: [[f64; 5]; 6] = [
    [0.05, 0.30, 0.45, 0.15, 0.05],
    [0.05, 0.25, 0.45, 0.18, 0.07],
    [0.06, 0.30, 0.44, 0.15, 0.05],
    [0.35, 0.45, 0.17, 0.03, 0.00],
    [0.10, 0.35, 0.38, 0.13, 0.04],
    [0.25, 0.40, 0.27, 0.06, 0.02],
];

const EXCLUSION_COUNT_WEIGHTS: [f64; 3] = [0.65, 0.27, 0.08];

/// Probability of being qualified for one or two job profiles.
const SECOND_PROFILE_WEIGHTS: [f64; 2] = [0.7, 0.3];

/// Probability that a candidate lists every core task of a profile rather than one.
const FULL_SKILLS_PROB: f64 = 0.75;

const ATTITUDE_BETA: (f64, f64) = (1.3, 1.3);

const CERTIFIED_PROB: f64 = 0.9;

const COMUNI: [&str; 12] = [
    "Villafranca di Verona",
    "Povegliano Veronese",
    "Mozzecane",
    "Vigasio",
    "Sommacampagna",
    "Valeggio sul Mincio",
    "Castel d'Azzano",
    "Nogarole Rocca",
    "Erbè",
    "Trevenzuolo",
    "Isola della Scala",
    "Sona",
];

const STREETS: [&str; 10] = [
    "Via Roma",
    "Via Garibaldi",
    "Via Mazzini",
    "Corso Porta Nuova",
    "Via Cavour",
    "Via dell'Artigianato",
    "Via dell'Industria",
    "Via Verdi",
    "Piazza Vittorio Emanuele",
    "Via San Giovanni",
];

const NAME_PARTS: [&str; 10] =
    ["Adige", "Scaligera", "Arena", "Garda", "Lessinia", "Valpolicella", "Baldo", "Mincio", "Berica", "Veneta"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n_candidates: usize,
    pub n_companies: usize,
    pub seed: u64,
    pub noise: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { n_candidates: 100, n_companies: 100, seed: 42, noise: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub candidate_id: String,
    pub company_id: String,
    pub features: FeatureVector,
    pub label: u8,
    pub p_true: f64,
}

/// One standard job profile: the tasks a company posts for it and the
/// working condition it imposes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobProfile {
    pub sector: String,
    pub name: String,
    pub core_tasks: Vec<String>,
    pub condition: String,
}

impl JobProfile {
    /// What a qualified candidate lists as skills.
    pub fn skills_text(&self) -> String {
        self.core_tasks.join(", ")
    }

    /// What a company posting this profile lists as tasks.
    pub fn tasks_text(&self) -> String {
        format!("{}, {}", self.core_tasks.join(", "), self.condition)
    }
}

/// Job-profile catalogue plus the list of working conditions candidates may exclude.
#[derive(Debug)]
pub struct Lexicon {
    pub profiles: Vec<JobProfile>,
    pub exclusions: Vec<String>,
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

impl Lexicon {
    pub fn bundled() -> &'static Lexicon {
        static LEX: OnceLock<Lexicon> = OnceLock::new();
        LEX.get_or_init(|| Lexicon::parse(PROFILES_LEXICON, EXCLUSIONS_LEXICON))
    }

    /// `profiles`: `sector<TAB>name<TAB>core; core<TAB>condition` lines.
    pub fn parse(profiles: &str, exclusions: &str) -> Lexicon {
        let profiles = data_lines(profiles)
            .filter_map(|line| {
                let mut cols = line.split('\t');
                let (sector, name, core, condition) = (cols.next()?, cols.next()?, cols.next()?, cols.next()?);
                Some(JobProfile {
                    sector: sector.to_string(),
                    name: name.to_string(),
                    core_tasks: core.split(';').map(|t| t.trim().to_string()).collect(),
                    condition: condition.trim().to_string(),
                })
            })
            .collect();
        let exclusions = data_lines(exclusions).map(String::from).collect();
        Lexicon { profiles, exclusions }
    }

    pub fn sector_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for p in &self.profiles {
            if !names.contains(&p.sector.as_str()) {
                names.push(&p.sector);
            }
        }
        names
    }

    /// One document per profile (its task text); the default TF-IDF corpus.
    pub fn corpus(&self) -> Vec<String> {
        self.profiles.iter().map(JobProfile::tasks_text).collect()
    }
}

fn categorical(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

fn point_in_bbox(rng: &mut ChaCha8Rng) -> GeoPoint {
    let (lat0, lat1, lon0, lon1) = VERONA_BBOX;
    let lat = lat0 + (lat1 - lat0) * rng.random::<f64>();
    let lon = lon0 + (lon1 - lon0) * rng.random::<f64>();
    GeoPoint::new((lat * 1e5).round() / 1e5, (lon * 1e5).round() / 1e5).expect("bbox is valid")
}

fn address(rng: &mut ChaCha8Rng) -> String {
    format!("{} {}, {}", STREETS.choose(rng).unwrap(), rng.random_range(1..120), COMUNI.choose(rng).unwrap())
}

fn pick_phrases(rng: &mut ChaCha8Rng, pool: &[String], n: usize) -> Vec<String> {
    pool.choose_multiple(rng, n.min(pool.len())).cloned().collect()
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn gen_candidate(seed: u64, index: usize, lex: &Lexicon) -> CandidateProfile {
    let mut rng = stream_rng(seed, DOMAIN_CANDIDATE, index as u64);
    let disability_type = DisabilityType::ALL[categorical(&mut rng, &DISABILITY_WEIGHTS)];
    let education = categorical(&mut rng, &EDUCATION_TABLE[disability_type.index()]);
    let attitude = round4(Beta::new(ATTITUDE_BETA.0, ATTITUDE_BETA.1).unwrap().sample(&mut rng));
    let years_experience = round1(Exp::new(1.0 / 6.0f64).unwrap().sample(&mut rng).min(40.0));
    let unemployment_months = (Exp::new(1.0 / 18.0).unwrap().sample(&mut rng) as u32).min(240);
    let residence = point_in_bbox(&mut rng);
    let address = address(&mut rng);

    let n_profiles = 1 + categorical(&mut rng, &SECOND_PROFILE_WEIGHTS);
    let profiles: Vec<&JobProfile> = lex.profiles.choose_multiple(&mut rng, n_profiles).collect();
    let skills: Vec<String> = profiles
        .into_iter()
        .map(|jp| {
            if rng.random_bool(FULL_SKILLS_PROB) {
                jp.skills_text()
            } else {
                jp.core_tasks.choose(&mut rng).expect("profile has core tasks").clone()
            }
        })
        .collect();

    let n_excl = categorical(&mut rng, &EXCLUSION_COUNT_WEIGHTS);
    let exclusions = pick_phrases(&mut rng, &lex.exclusions, n_excl);

    CandidateProfile {
        id: format!("C{index:06}"),
        address: Some(address),
        residence: Some(residence),
        education_level: EducationLevel::new(education as u8).unwrap(),
        disability_type,
        attitude,
        years_experience,
        unemployment_months,
        skills_text: skills.join(", "),
        exclusions,
    }
}

fn gen_company(seed: u64, index: usize, lex: &Lexicon) -> CompanyProfile {
    let mut rng = stream_rng(seed, DOMAIN_COMPANY, index as u64);
    let profile = lex.profiles.choose(&mut rng).expect("non-empty catalogue");
    let sector = &profile.sector;
    let location = point_in_bbox(&mut rng);
    let address = address(&mut rng);
    let employee_count = 15 + Exp::new(1.0 / 60.0f64).unwrap().sample(&mut rng) as u32;
    let open_positions = rng.random_range(1..=4);
    let remote_p = if sector == "ufficio" { 0.8 } else { 0.4 };
    let remote_available = rng.random_bool(remote_p);
    let certified = rng.random_bool(CERTIFIED_PROB);
    let past_disability_hires = Exp::new(1.0 / 6.0f64).unwrap().sample(&mut rng) as u32;
    let name = format!("{} {} Srl", NAME_PARTS.choose(&mut rng).unwrap(), capitalize(sector));
    CompanyProfile {
        id: format!("A{index:06}"),
        name,
        address: Some(address),
        location: Some(location),
        sector: sector.clone(),
        employee_count,
        open_positions,
        tasks_text: profile.tasks_text(),
        remote_available,
        certified,
        past_disability_hires,
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

pub fn gen_candidates(p: &GenParams) -> Vec<CandidateProfile> {
    let lex = Lexicon::bundled();
    (0..p.n_candidates).into_par_iter().map(|i| gen_candidate(p.seed, i, lex)).collect()
}

pub fn gen_companies(p: &GenParams) -> Vec<CompanyProfile> {
    let lex = Lexicon::bundled();
    (0..p.n_companies).into_par_iter().map(|i| gen_company(p.seed, i, lex)).collect()
}

/// Label probability of a scored pair given one standard-normal draw `z`.
pub fn label_probability(gate: Gate, final_score: f64, noise: f64, z: f64) -> f64 {
    let p = if gate == Gate::Passed {
        0.05 + 0.90 * final_score + noise * z
    } else {
        0.02 + (noise / 2.0) * z
    };
    p.clamp(0.0, 1.0)
}

/// Labeled referral pairs, candidate-major.
///
/// A candidate/company combination is a referral when the candidate's skills
/// and the company's tasks share at least one indexed term (`compat > 0`);
/// only referrals are emitted. Each pair draws from its own stream keyed by
/// its position in the full candidate × company grid.
pub fn gen_labeled_pairs(
    cands: &[CandidateProfile],
    comps: &[CompanyProfile],
    p: &GenParams,
    tfidf: &TfidfModel,
    cfg: &ScoringConfig,
) -> Result<Vec<LabeledPair>, ScoreError> {
    cfg.validate()?;
    let prepared = prepare_companies(comps, tfidf)?;
    let n_comp = comps.len() as u64;
    let per_candidate: Result<Vec<Vec<LabeledPair>>, ScoreError> = cands
        .par_iter()
        .enumerate()
        .map(|(i, cand)| {
            let pc = PreparedCandidate::new(cand, tfidf)?;
            Ok(comps
                .iter()
                .zip(&prepared)
                .enumerate()
                .filter_map(|(j, (comp, pm))| {
                    let s = score_prepared(cand.attitude, &pc, pm, cfg);
                    if s.compat <= 0.0 {
                        return None;
                    }
                    let mut rng = stream_rng(p.seed, DOMAIN_PAIR, i as u64 * n_comp + j as u64);
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let p_true = label_probability(s.gate, s.final_score, p.noise, z);
                    let u: f64 = rng.random();
                    Some(LabeledPair {
                        candidate_id: cand.id.clone(),
                        company_id: comp.id.clone(),
                        features: FeatureVector::from_parts(cand, comp, &s),
                        label: u8::from(u < p_true),
                        p_true,
                    })
                })
                .collect())
        })
        .collect();
    Ok(per_candidate?.into_iter().flatten().collect())
}

/// Writes `pairs.csv`: feature columns, then `label`, `p_true`.
pub fn write_pairs_csv<W: Write>(pairs: &[LabeledPair], writer: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = vec!["candidate_id", "company_id"];
    header.extend(FEATURE_NAMES);
    header.extend(["label", "p_true"]);
    wtr.write_record(&header)?;
    for p in pairs {
        let mut row = vec![p.candidate_id.clone(), p.company_id.clone()];
        row.extend(p.features.0.iter().map(|v| v.to_string()));
        row.push(p.label.to_string());
        row.push(p.p_true.to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_pairs_csv(pairs: &[LabeledPair], path: impl AsRef<Path>) -> csv::Result<()> {
    write_pairs_csv(pairs, std::fs::File::create(path)?)
}

/// Reads a file produced by [`write_pairs_csv`].
pub fn read_pairs_csv<R: std::io::Read>(reader: R) -> Result<Vec<LabeledPair>, PairsCsvError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let width = 2 + FEATURE_NAMES.len() + 2;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |what: &str| PairsCsvError::Row { line, reason: what.to_string() };
        if rec.len() != width {
            return Err(bad("wrong number of fields"));
        }
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(&format!("column {i} is not a number")));
        let mut features = [0.0; FEATURE_NAMES.len()];
        for (k, slot) in features.iter_mut().enumerate() {
            *slot = num(2 + k)?;
        }
        let label = match &rec[width - 2] {
            "0" => 0,
            "1" => 1,
            _ => return Err(bad("label must be 0 or 1")),
        };
        out.push(LabeledPair {
            candidate_id: rec[0].to_string(),
            company_id: rec[1].to_string(),
            features: FeatureVector(features),
            label,
            p_true: num(width - 1)?,
        });
    }
    Ok(out)
}

pub fn load_pairs_csv(path: impl AsRef<Path>) -> Result<Vec<LabeledPair>, PairsCsvError> {
    read_pairs_csv(std::fs::File::open(path)?)
}

#[derive(Debug, thiserror::Error)]
pub enum PairsCsvError {
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
