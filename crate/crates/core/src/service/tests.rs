use super::*;
use crate::scoring::rank_companies;
use crate::synthetic::{gen_candidates, gen_companies, GenParams};

fn service_with(n: usize, m: usize) -> (MatchService, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let log = AuditLog::open(dir.path().join("audit.jsonl")).unwrap();
    let svc = MatchService::new(ScoringConfig::default(), log).unwrap();
    let p = GenParams { n_candidates: n, n_companies: m, seed: 21, noise: 0.05 };
    svc.load_dataset(Dataset::build(gen_candidates(&p), gen_companies(&p)).unwrap());
    (svc, dir)
}

fn by_id(id: &str, k: usize) -> MatchRequest {
    MatchRequest { candidate_id: Some(id.into()), k: Some(k), ..Default::default() }
}

fn audit_lines(dir: &tempfile::TempDir) -> Vec<AuditRecord> {
    read_records(dir.path().join("audit.jsonl")).unwrap()
}

#[test]
fn match_by_id_is_audited_and_equals_ranking() {
    let (svc, dir) = service_with(20, 200);
    let data = svc.dataset().unwrap();
    let cand = data.candidates.iter().find(|c| c.attitude >= 0.3 && c.exclusions.is_empty()).unwrap().clone();
    let resp = svc.handle_match(&by_id(&cand.id, 5)).unwrap();
    assert!(resp.results.len() <= 5);
    assert_eq!(resp.results, rank_companies(&cand, &data.companies, &data.tfidf, &ScoringConfig::default(), 5).unwrap());
    let lines = audit_lines(&dir);
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0].request_id, resp.request_id);
    let again = svc.handle_match(&by_id(&cand.id, 5)).unwrap();
    assert_eq!(again.results, resp.results);
    assert_ne!(again.request_id, resp.request_id);
}

#[test]
fn payload_candidate_and_validation() {
    let (svc, _dir) = service_with(3, 50);
    let mut c = svc.dataset().unwrap().candidates[0].clone();
    c.id = "walk-in".into();
    let resp = svc.handle_match(&MatchRequest { candidate: Some(c.clone()), ..Default::default() }).unwrap();
    assert_eq!(resp.candidate_id, "walk-in");

    c.attitude = 1.5;
    match svc.handle_match(&MatchRequest { candidate: Some(c.clone()), ..Default::default() }) {
        Err(ServiceError::BadRequest { field, .. }) => assert_eq!(field, "candidate.attitude"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(svc.handle_match(&MatchRequest::default()), Err(ServiceError::BadRequest { .. })));
    assert!(matches!(svc.handle_match(&by_id("nobody", 3)), Err(ServiceError::NotFound(_))));
    assert!(matches!(svc.handle_match(&by_id("C000000", 0)), Err(ServiceError::BadRequest { .. })));
}

#[test]
fn out_of_range_override_is_a_config_error() {
    let (svc, dir) = service_with(3, 20);
    let req = MatchRequest {
        overrides: Some(ConfigOverrides { distance_max_km: Some(60.0), ..Default::default() }),
        ..by_id("C000001", 3)
    };
    assert!(matches!(svc.handle_match(&req), Err(ServiceError::InvalidConfig(_))));
    assert!(audit_lines(&dir).is_empty());
}

#[test]
fn unavailable_without_data() {
    let dir = tempfile::tempdir().unwrap();
    let svc = MatchService::new(ScoringConfig::default(), AuditLog::open(dir.path().join("a.jsonl")).unwrap()).unwrap();
    assert!(matches!(svc.handle_match(&by_id("C000000", 3)), Err(ServiceError::Unavailable)));
    let snap = svc.analytics_snapshot();
    assert_eq!(snap.totals, Totals::default());
    assert!(snap.disability_histogram.is_empty() && snap.sector_histogram.is_empty());
}

#[test]
fn config_updates_apply_and_reject() {
    let (svc, dir) = service_with(50, 50);
    let before = svc.handle_match(&by_id("C000003", 50)).unwrap();
    let strict = ScoringConfig { attitude_min: 1.0, ..Default::default() };
    svc.update_config(strict.clone()).unwrap();
    assert_eq!(*svc.config(), strict);
    let after = svc.handle_match(&by_id("C000003", 50)).unwrap();
    assert!(after.results.len() <= before.results.len());
    assert_eq!(after.config, strict);

    let bad = ScoringConfig { w_dist: -0.1, ..Default::default() };
    assert!(matches!(svc.update_config(bad), Err(ServiceError::InvalidConfig(_))));
    assert_eq!(*svc.config(), strict);
    let kinds: Vec<bool> = audit_lines(&dir).iter().map(|r| matches!(r.event, AuditEvent::ConfigUpdate { .. })).collect();
    assert_eq!(kinds, vec![false, true, false]);
}

#[test]
fn overrides_once_per_request() {
    let (svc, dir) = service_with(5, 30);
    let resp = svc.handle_match(&by_id("C000002", 3)).unwrap();
    let ov = |id: &str| OverrideRequest {
        request_id: id.into(),
        action: OverrideDecision::Overridden,
        reason: Some("Candidato preferisce part-time".into()),
    };
    svc.record_override(&ov(&resp.request_id)).unwrap();
    assert!(matches!(svc.record_override(&ov(&resp.request_id)), Err(ServiceError::Conflict(_))));
    assert!(matches!(svc.record_override(&ov("missing")), Err(ServiceError::NotFound(_))));
    let no_reason = OverrideRequest { reason: None, ..ov(&resp.request_id) };
    assert!(matches!(svc.record_override(&no_reason), Err(ServiceError::BadRequest { .. })));
    let last = audit_lines(&dir).pop().unwrap();
    assert_eq!(
        last.event,
        AuditEvent::Override {
            target: resp.request_id,
            operator_action: OperatorAction::Overridden { reason: "Candidato preferisce part-time".into() }
        }
    );
}

#[test]
fn analytics_totals() {
    let (svc, _dir) = service_with(1000, 40);
    let data = svc.dataset().unwrap();
    svc.handle_match(&by_id("C000000", 3)).unwrap();
    let snap = svc.analytics_snapshot();
    assert_eq!(snap.totals.candidates, 1000);
    assert_eq!(snap.totals.companies, 40);
    assert_eq!(snap.totals.open_positions, data.companies.iter().map(|c| c.open_positions as u64).sum::<u64>());
    let direct = data.candidates.iter().map(|c| c.attitude).sum::<f64>() / 1000.0;
    assert!((snap.mean_attitude - direct).abs() < 1e-9);
    assert_eq!(snap.disability_histogram.values().sum::<usize>(), 1000);
    assert_eq!(snap.sector_histogram.values().sum::<usize>(), 40);
    assert_eq!(snap.latency.samples, 1);
    assert!(snap.latency.p50_ms.is_some());
}
