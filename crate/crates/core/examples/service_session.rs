//! Drives the matching service in process: a match, an operator override,
//! a config update, and the analytics snapshot, all recorded in the audit log.
//!
//! Run with `cargo run --example service_session`. The same operations are
//! exposed over HTTP by `jobmatch serve`.

use jobmatch::scoring::{ConfigOverrides, ScoringConfig};
use jobmatch::service::{read_records, AuditLog, Dataset, MatchRequest, MatchService, OverrideDecision, OverrideRequest};
use jobmatch::synthetic::{gen_candidates, gen_companies, GenParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = GenParams { n_candidates: 50, n_companies: 80, seed: 5, noise: 0.05 };
    let dir = tempfile::tempdir()?;
    let log_path = dir.path().join("audit.jsonl");
    let service = MatchService::new(ScoringConfig::default(), AuditLog::open(&log_path)?)?;
    service.load_dataset(Dataset::build(gen_candidates(&p), gen_companies(&p))?);

    let req = MatchRequest { candidate_id: Some("C000003".into()), k: Some(3), ..Default::default() };
    let resp = service.handle_match(&req)?;
    println!("request {}", resp.request_id);
    for r in &resp.results {
        println!("  {} {:.4} at {:.1} km", r.company_id, r.final_score, r.distance_km);
    }

    let narrow = MatchRequest {
        overrides: Some(ConfigOverrides { distance_max_km: Some(5.0), ..Default::default() }),
        ..req.clone()
    };
    println!("within 5 km: {} result(s)", service.handle_match(&narrow)?.results.len());
    let bad = MatchRequest {
        overrides: Some(ConfigOverrides { distance_max_km: Some(60.0), ..Default::default() }),
        ..req
    };
    println!("60 km override: {}", service.handle_match(&bad).unwrap_err());

    let decision = OverrideRequest {
        request_id: resp.request_id.clone(),
        action: OverrideDecision::Overridden,
        reason: Some("candidate prefers part-time work".into()),
    };
    service.record_override(&decision)?;
    println!("second override: {}", service.record_override(&decision).unwrap_err());

    service.update_config(ScoringConfig { w_dist: 0.4, ..ScoringConfig::default() })?;
    let snap = service.analytics_snapshot();
    println!("{} candidates, {} companies, mean attitude {:.3}", snap.totals.candidates, snap.totals.companies, snap.mean_attitude);

    for rec in read_records(&log_path)? {
        println!("audit: {}", serde_json::to_string(&rec)?);
    }
    Ok(())
}
