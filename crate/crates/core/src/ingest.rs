//! CSV import and export of candidate and company datasets.
//!
//! Bad rows are rejected one by one with the offending field; a missing
//! column rejects the whole file.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geo::{CachedGeocoder, GeoError, GeoPoint, Geocoder};
use crate::scoring::{CandidateProfile, CompanyProfile, DisabilityType, EducationLevel};

pub const CANDIDATE_COLUMNS: [&str; 11] = [
    "id",
    "address",
    "lat",
    "lon",
    "education_level",
    "disability_type",
    "attitude",
    "years_experience",
    "unemployment_months",
    "skills_text",
    "exclusions",
];

pub const COMPANY_COLUMNS: [&str; 12] = [
    "id",
    "name",
    "address",
    "lat",
    "lon",
    "sector",
    "employee_count",
    "open_positions",
    "tasks_text",
    "remote_available",
    "certified",
    "past_disability_hires",
];

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("missing required column(s): {}", .0.join(", "))]
    MissingColumns(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// 1-based line number in the file (the header is line 1).
    pub line: u64,
    pub field: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub accepted_count: usize,
    pub rejected: Vec<RejectedRow>,
}

impl ValidationReport {
    pub fn total_rows(&self) -> usize {
        self.accepted_count + self.rejected.len()
    }
}

type FieldResult<T> = Result<T, (&'static str, String)>;

/// Column positions resolved from the header.
struct Columns<const N: usize> {
    names: [&'static str; N],
    index: [usize; N],
}

impl<const N: usize> Columns<N> {
    fn resolve(names: [&'static str; N], header: &csv::StringRecord) -> Result<Self, IngestError> {
        let mut index = [0; N];
        let mut missing = Vec::new();
        for (slot, name) in index.iter_mut().zip(names) {
            match header.iter().position(|h| h.trim() == name) {
                Some(i) => *slot = i,
                None => missing.push(name.to_string()),
            }
        }
        if missing.is_empty() {
            Ok(Columns { names, index })
        } else {
            Err(IngestError::MissingColumns(missing))
        }
    }

    fn get<'r>(&self, rec: &'r csv::StringRecord, name: &'static str) -> FieldResult<&'r str> {
        let k = self.names.iter().position(|n| *n == name).expect("known column");
        rec.get(self.index[k]).ok_or((name, "field missing from row".into()))
    }
}

fn parse_num<T: std::str::FromStr>(name: &'static str, raw: &str) -> FieldResult<T>
where
    T::Err: std::fmt::Display,
{
    raw.trim().parse::<T>().map_err(|e| (name, format!("{raw:?}: {e}")))
}

fn parse_bool(name: &'static str, raw: &str) -> FieldResult<bool> {
    match raw.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err((name, format!("{other:?} is not true/false"))),
    }
}

fn opt_text(raw: &str) -> Option<String> {
    let t = raw.trim();
    (!t.is_empty()).then(|| t.to_string())
}

fn parse_point(lat: &str, lon: &str) -> FieldResult<Option<GeoPoint>> {
    match (lat.trim(), lon.trim()) {
        ("", "") => Ok(None),
        ("", _) => Err(("lat", "lat is empty but lon is set".into())),
        (_, "") => Err(("lon", "lon is empty but lat is set".into())),
        (a, b) => {
            let lat: f64 = parse_num("lat", a)?;
            let lon: f64 = parse_num("lon", b)?;
            GeoPoint::new(lat, lon).map(Some).map_err(|e| ("lat", e.to_string()))
        }
    }
}

fn read_rows<R: Read, T, const N: usize>(
    reader: R,
    names: [&'static str; N],
    parse: impl Fn(&Columns<N>, &csv::StringRecord) -> FieldResult<T>,
) -> Result<(Vec<T>, ValidationReport), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let cols = Columns::resolve(names, rdr.headers()?)?;
    let mut out = Vec::new();
    let mut report = ValidationReport::default();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        match parse(&cols, &rec) {
            Ok(v) => {
                out.push(v);
                report.accepted_count += 1;
            }
            Err((field, reason)) => report.rejected.push(RejectedRow { line, field: field.to_string(), reason }),
        }
    }
    Ok((out, report))
}

fn candidate_row(c: &Columns<11>, r: &csv::StringRecord) -> FieldResult<CandidateProfile> {
    let id = c.get(r, "id")?.trim().to_string();
    if id.is_empty() {
        return Err(("id", "missing id".into()));
    }
    let level: u8 = parse_num("education_level", c.get(r, "education_level")?)?;
    let education_level = EducationLevel::new(level).map_err(|e| ("education_level", e.to_string()))?;
    let disability_type: DisabilityType =
        c.get(r, "disability_type")?.trim().parse().map_err(|e: crate::scoring::UnknownVariant| ("disability_type", e.to_string()))?;
    let exclusions = c
        .get(r, "exclusions")?
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    let cand = CandidateProfile {
        id,
        address: opt_text(c.get(r, "address")?),
        residence: parse_point(c.get(r, "lat")?, c.get(r, "lon")?)?,
        education_level,
        disability_type,
        attitude: parse_num("attitude", c.get(r, "attitude")?)?,
        years_experience: parse_num("years_experience", c.get(r, "years_experience")?)?,
        unemployment_months: parse_num("unemployment_months", c.get(r, "unemployment_months")?)?,
        skills_text: c.get(r, "skills_text")?.to_string(),
        exclusions,
    };
    cand.validate()?;
    Ok(cand)
}

fn company_row(c: &Columns<12>, r: &csv::StringRecord) -> FieldResult<CompanyProfile> {
    let id = c.get(r, "id")?.trim().to_string();
    if id.is_empty() {
        return Err(("id", "missing id".into()));
    }
    let comp = CompanyProfile {
        id,
        name: c.get(r, "name")?.to_string(),
        address: opt_text(c.get(r, "address")?),
        location: parse_point(c.get(r, "lat")?, c.get(r, "lon")?)?,
        sector: c.get(r, "sector")?.trim().to_string(),
        employee_count: parse_num("employee_count", c.get(r, "employee_count")?)?,
        open_positions: parse_num("open_positions", c.get(r, "open_positions")?)?,
        tasks_text: c.get(r, "tasks_text")?.to_string(),
        remote_available: parse_bool("remote_available", c.get(r, "remote_available")?)?,
        certified: parse_bool("certified", c.get(r, "certified")?)?,
        past_disability_hires: parse_num("past_disability_hires", c.get(r, "past_disability_hires")?)?,
    };
    comp.validate()?;
    Ok(comp)
}

pub fn read_candidates<R: Read>(reader: R) -> Result<(Vec<CandidateProfile>, ValidationReport), IngestError> {
    read_rows(reader, CANDIDATE_COLUMNS, candidate_row)
}

pub fn read_companies<R: Read>(reader: R) -> Result<(Vec<CompanyProfile>, ValidationReport), IngestError> {
    read_rows(reader, COMPANY_COLUMNS, company_row)
}

pub fn parse_candidates_csv(path: impl AsRef<Path>) -> Result<(Vec<CandidateProfile>, ValidationReport), IngestError> {
    read_candidates(File::open(path)?)
}

pub fn parse_companies_csv(path: impl AsRef<Path>) -> Result<(Vec<CompanyProfile>, ValidationReport), IngestError> {
    read_companies(File::open(path)?)
}

fn point_fields(p: Option<GeoPoint>) -> (String, String) {
    p.map_or((String::new(), String::new()), |p| (p.lat().to_string(), p.lon().to_string()))
}

pub fn write_candidates<W: Write>(cands: &[CandidateProfile], writer: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CANDIDATE_COLUMNS)?;
    for c in cands {
        let (lat, lon) = point_fields(c.residence);
        wtr.write_record([
            c.id.clone(),
            c.address.clone().unwrap_or_default(),
            lat,
            lon,
            c.education_level.get().to_string(),
            c.disability_type.as_str().to_string(),
            c.attitude.to_string(),
            c.years_experience.to_string(),
            c.unemployment_months.to_string(),
            c.skills_text.clone(),
            c.exclusions.join(";"),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_companies<W: Write>(comps: &[CompanyProfile], writer: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(COMPANY_COLUMNS)?;
    for c in comps {
        let (lat, lon) = point_fields(c.location);
        wtr.write_record([
            c.id.clone(),
            c.name.clone(),
            c.address.clone().unwrap_or_default(),
            lat,
            lon,
            c.sector.clone(),
            c.employee_count.to_string(),
            c.open_positions.to_string(),
            c.tasks_text.clone(),
            c.remote_available.to_string(),
            c.certified.to_string(),
            c.past_disability_hires.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_candidates_csv(cands: &[CandidateProfile], path: impl AsRef<Path>) -> csv::Result<()> {
    write_candidates(cands, File::create(path)?)
}

pub fn save_companies_csv(comps: &[CompanyProfile], path: impl AsRef<Path>) -> csv::Result<()> {
    write_companies(comps, File::create(path)?)
}

/// Geocodes every candidate lacking coordinates. Returns the ids that could
/// not be resolved; those keep `residence = None`.
pub fn resolve_candidates<G: Geocoder>(
    cands: &mut [CandidateProfile],
    geocoder: &mut CachedGeocoder<G>,
) -> Vec<(String, GeoError)> {
    let mut failed = Vec::new();
    for c in cands.iter_mut().filter(|c| c.residence.is_none()) {
        match geocoder.geocode(c.address.as_deref().unwrap_or("")) {
            Ok(p) => c.residence = Some(p),
            Err(e) => failed.push((c.id.clone(), e)),
        }
    }
    failed
}

pub fn resolve_companies<G: Geocoder>(
    comps: &mut [CompanyProfile],
    geocoder: &mut CachedGeocoder<G>,
) -> Vec<(String, GeoError)> {
    let mut failed = Vec::new();
    for c in comps.iter_mut().filter(|c| c.location.is_none()) {
        match geocoder.geocode(c.address.as_deref().unwrap_or("")) {
            Ok(p) => c.location = Some(p),
            Err(e) => failed.push((c.id.clone(), e)),
        }
    }
    failed
}
