//! Scores one candidate against a handful of companies and explains each
//! score, including the pairs that a gate rejects.
//!
//! Run with `cargo run --example rank_candidate`.

use jobmatch::geo::GeoPoint;
use jobmatch::scoring::{
    rank_companies, score_pair, CandidateProfile, CompanyProfile, DisabilityType, EducationLevel, ScoringConfig,
};
use jobmatch::text_it::fit_tfidf;

fn company(id: &str, lat: f64, lon: f64, tasks: &str, certified: bool) -> CompanyProfile {
    CompanyProfile {
        id: id.into(),
        name: format!("Azienda {id}"),
        address: None,
        location: Some(GeoPoint::new(lat, lon).unwrap()),
        sector: "ristorazione".into(),
        employee_count: 40,
        open_positions: 2,
        tasks_text: tasks.into(),
        remote_available: false,
        certified,
        past_disability_hires: 3,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cand = CandidateProfile {
        id: "C1".into(),
        address: None,
        residence: Some(GeoPoint::new(45.4384, 10.9916)?),
        education_level: EducationLevel::new(2)?,
        disability_type: DisabilityType::Physical,
        attitude: 0.7,
        years_experience: 3.0,
        unemployment_months: 8,
        skills_text: "servizio ai tavoli, accoglienza clienti, preparazione sala".into(),
        exclusions: vec!["sollevamento carichi".into()],
    };
    let companies = vec![
        company("A1", 45.44, 10.99, "servizio ai tavoli e accoglienza clienti in sala", true),
        company("A2", 45.35, 10.85, "preparazione sala e servizio ai tavoli", false),
        company("A3", 45.43, 10.98, "sollevamento carichi pesanti e servizio clienti", true),
        company("A4", 45.90, 11.50, "servizio ai tavoli", true),
    ];
    let corpus: Vec<&str> = companies.iter().map(|c| c.tasks_text.as_str()).collect();
    let tfidf = fit_tfidf(&corpus)?;
    let cfg = ScoringConfig::default();

    for comp in &companies {
        let r = score_pair(&cand, comp, &tfidf, &cfg)?;
        println!("{} gate={} final={:.4} distance={:.1} km", r.company_id, r.gate, r.final_score, r.distance_km);
        for c in &r.explanation {
            println!("    {:<16} w={:.3} v={:.3} -> {:.4}", format!("{:?}", c.component), c.weight, c.value, c.contribution);
        }
        for (phrase, term) in &r.excluded_terms {
            println!("    excluded: {phrase:?} matched {term:?}");
        }
    }

    let top = rank_companies(&cand, &companies, &tfidf, &cfg, 3)?;
    let ids: Vec<&str> = top.iter().map(|r| r.company_id.as_str()).collect();
    println!("top {}: {ids:?}", top.len());
    Ok(())
}
