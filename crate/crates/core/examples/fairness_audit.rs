//! Recommendation-rate parity across disability types and education levels.
//!
//! Run with `cargo run --release --example fairness_audit`.

use jobmatch::batch::batch_match;
use jobmatch::fairness::{check_alert, parity_report, summary, GroupKey, DEFAULT_MAX_DISPARITY};
use jobmatch::pipeline::company_tfidf;
use jobmatch::scoring::ScoringConfig;
use jobmatch::synthetic::{gen_candidates, gen_companies, GenParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = GenParams { n_candidates: 600, n_companies: 200, seed: 21, noise: 0.05 };
    let cands = gen_candidates(&p);
    let comps = gen_companies(&p);
    let tfidf = company_tfidf(&comps)?;
    // a strict skills gate makes differences between groups visible
    let cfg = ScoringConfig { compat_min: 0.3, ..Default::default() };

    let report = batch_match(&cands, &comps, &tfidf, &cfg, 5, 2)?;
    let results: Vec<_> = report.all_matches().cloned().collect();
    for key in [GroupKey::DisabilityType, GroupKey::EducationLevel] {
        let parity = parity_report(&results, &cands, key)?;
        let alerts = check_alert(&parity, DEFAULT_MAX_DISPARITY)?;
        println!("{}", summary(&parity, &alerts));
    }
    Ok(())
}
