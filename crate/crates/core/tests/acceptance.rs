//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass a substring to run only matching checks.

use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jobmatch::batch::{batch_match, write_batch_csv};
use jobmatch::fairness::{check_alert, parity_report, GroupKey};
use jobmatch::geo::{haversine_km, GeoPoint};
use jobmatch::learning::{apply_calibrator, evaluate, fit_isotonic, load_model, save_model, split_indices};
use jobmatch::pipeline::{company_tfidf, generate_dataset, load_inputs, train_model, TrainOptions};
use jobmatch::scoring::{
    prepare_companies, rank_prepared, CandidateProfile, DisabilityType, PreparedCandidate, ScoringConfig,
};
use jobmatch::service::{AuditLog, Dataset, MatchRequest, MatchService};
use jobmatch::synthetic::{gen_candidates, gen_companies, gen_labeled_pairs, load_pairs_csv, GenParams, Lexicon};
use jobmatch::text_it::fit_tfidf;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Check = fn() -> Outcome;

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

fn random_point(rng: &mut ChaCha8Rng) -> GeoPoint {
    GeoPoint::new(rng.random_range(-90.0..=90.0), rng.random_range(-180.0..180.0)).unwrap()
}

fn geodesic() -> Outcome {
    let t0 = Instant::now();
    let d = haversine_km(GeoPoint::new(0.0, 0.0).unwrap(), GeoPoint::new(0.0, 180.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut asym, mut triangle) = (0usize, 0usize);
    for _ in 0..10_000 {
        let (a, b, c) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
        let ab = haversine_km(a, b);
        if (ab - haversine_km(b, a)).abs() > 1e-9 {
            asym += 1;
        }
        if haversine_km(a, c) > ab + haversine_km(b, c) + 1e-9 {
            triangle += 1;
        }
    }
    let elapsed = t0.elapsed();
    let pass = (d - 20015.087).abs() <= 0.001 && asym == 0 && triangle == 0 && elapsed < Duration::from_secs(1);
    outcome(pass, format!("antipode {d:.4} km, {asym} asymmetric, {triangle} triangle violations over 10000 pairs, {}", secs(elapsed)))
}

fn tfidf_oracle() -> Outcome {
    let corpus = ["sollevamento pesi magazzino", "magazzino logistica inventario", "ufficio inventario contabilità"];
    let m = fit_tfidf(&corpus).unwrap();
    // smoothed idf with N = 3: df 1 -> ln(4/2) + 1, df 2 -> ln(4/3) + 1
    let r = 2f64.ln() + 1.0;
    let c = (4.0f64 / 3.0).ln() + 1.0;
    let two_rare_one_common = (2.0 * r * r + c * c).sqrt();
    let one_rare_two_common = (r * r + 2.0 * c * c).sqrt();
    let expected = [
        ((0, 1), c * c / (two_rare_one_common * one_rare_two_common)),
        ((1, 2), c * c / (one_rare_two_common * two_rare_one_common)),
        ((0, 2), 0.0),
        ((0, 0), 1.0),
    ];
    let mut worst: f64 = 0.0;
    for ((i, j), want) in expected {
        worst = worst.max((m.similarity(corpus[i], corpus[j]) - want).abs());
    }
    outcome(worst <= 1e-9, format!("max deviation {worst:.2e} over 4 document pairs"))
}

/// Minimum squared error of a non-decreasing step function on a 0.01 grid,
/// by dynamic programming over distinct scores.
fn grid_minimum(points: &[(f64, u8)]) -> f64 {
    let mut groups: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for &(s, y) in points {
        groups.entry(s.to_bits()).or_default().push(y as f64);
    }
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mut best = vec![0.0; grid.len()];
    for ys in groups.values() {
        let mut running = f64::INFINITY;
        for (g, &v) in grid.iter().enumerate() {
            running = running.min(best[g]);
            best[g] = running + ys.iter().map(|y| (v - y).powi(2)).sum::<f64>();
        }
    }
    best.into_iter().fold(f64::INFINITY, f64::min)
}

fn pava_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=6);
        // few distinct scores so that ties occur
        let points: Vec<(f64, u8)> =
            (0..n).map(|_| (rng.random_range(0..4) as f64 / 4.0, rng.random_range(0..=1u8))).collect();
        let (s, y): (Vec<f64>, Vec<u8>) = points.iter().copied().unzip();
        let cal = fit_isotonic(&s, &y).unwrap();
        let sse: f64 = points.iter().map(|&(s, y)| (apply_calibrator(&cal, s) - y as f64).powi(2)).sum();
        let gap = sse - grid_minimum(&points);
        worst = worst.max(gap);
        if gap > 1e-6 {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("1000 instances, worst excess over grid minimum {worst:.2e}"))
}

fn latency() -> Outcome {
    let p = GenParams { n_candidates: 50, n_companies: 10_000, seed: 8, noise: 0.05 };
    let dir = tempfile::tempdir().unwrap();
    let service = MatchService::new(ScoringConfig::default(), AuditLog::open(dir.path().join("audit.jsonl")).unwrap()).unwrap();
    service.load_dataset(Dataset::build(gen_candidates(&p), gen_companies(&p)).unwrap());
    let mut times: Vec<Duration> = (0..50)
        .map(|i| {
            let req = MatchRequest { candidate_id: Some(format!("C{i:06}")), k: Some(10), ..Default::default() };
            let t0 = Instant::now();
            service.handle_match(&req).unwrap();
            t0.elapsed()
        })
        .collect();
    times.sort();
    let median = (times[24] + times[25]) / 2;
    outcome(
        median < Duration::from_millis(100),
        format!("median {:.2} ms, max {:.2} ms over 50 audited requests against 10000 companies", median.as_secs_f64() * 1e3, times[49].as_secs_f64() * 1e3),
    )
}

fn throughput() -> Outcome {
    let p = GenParams { n_candidates: 500, n_companies: 1000, seed: 12, noise: 0.05 };
    let cands = gen_candidates(&p);
    let comps = gen_companies(&p);
    let tfidf = company_tfidf(&comps).unwrap();
    let cfg = ScoringConfig::default();
    let mut outputs = Vec::new();
    let mut timings = Vec::new();
    let mut pairs = 0;
    for workers in [1, 2, 8] {
        let report = batch_match(&cands, &comps, &tfidf, &cfg, 10, workers).unwrap();
        pairs = report.pair_count;
        timings.push(format!("{workers}w {:.2}s", report.elapsed_secs));
        let mut buf = Vec::new();
        write_batch_csv(&report, &mut buf).unwrap();
        outputs.push((buf, report.elapsed_secs));
    }
    let identical = outputs.windows(2).all(|w| w[0].0 == w[1].0);
    let slowest = outputs.iter().map(|o| o.1).fold(0.0, f64::max);
    outcome(
        pairs == 500_000 && identical && slowest < 600.0,
        format!("{pairs} pairs, {}, outputs identical: {identical}", timings.join(", ")),
    )
}

fn learned_band() -> Outcome {
    let t0 = Instant::now();
    let p = GenParams { n_candidates: 2500, n_companies: 300, seed: 1, noise: 0.05 };
    let tfidf = fit_tfidf(&Lexicon::bundled().corpus()).unwrap();
    let pairs = gen_labeled_pairs(&gen_candidates(&p), &gen_companies(&p), &p, &tfidf, &ScoringConfig::default()).unwrap();
    if pairs.len() < 60_000 {
        return outcome(false, format!("only {} pairs generated", pairs.len()));
    }
    let (a, b) = split_indices(pairs.len(), 99);
    let order: Vec<usize> = a.into_iter().chain(b).collect();
    let train: Vec<_> = order[..50_000].iter().map(|&i| pairs[i].clone()).collect();
    let test: Vec<_> = order[50_000..60_000].iter().map(|&i| pairs[i].clone()).collect();

    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let opts = TrainOptions { seed: 1, workers, ..Default::default() };
    let (model, _) = train_model(&train, &opts).unwrap();

    let labels: Vec<u8> = test.iter().map(|q| q.label).collect();
    let raw: Vec<f64> = test.iter().map(|q| model.raw_score(&q.features)).collect();
    let cal: Vec<f64> = test.iter().map(|q| model.probability(&q.features)).collect();
    let mae = |s: &[f64]| s.iter().zip(&test).map(|(s, q)| (s - q.p_true).abs()).sum::<f64>() / test.len() as f64;
    let report = evaluate(&cal, &labels, 0.5).unwrap();
    let auc = report.roc_auc.unwrap_or(f64::NAN);
    let (mae_raw, mae_cal) = (mae(&raw), mae(&cal));
    let elapsed = t0.elapsed();
    outcome(
        report.f1 >= 0.75 && (0.60..=0.90).contains(&auc) && mae_cal < mae_raw && elapsed < Duration::from_secs(300),
        format!(
            "F1 {:.4}, ROC-AUC {auc:.4}, MAE raw {mae_raw:.4} calibrated {mae_cal:.4}, {}",
            report.f1,
            secs(elapsed)
        ),
    )
}

fn run_pipeline(workers: usize) -> Vec<(String, Vec<u8>)> {
    let dir = tempfile::tempdir().unwrap();
    let p = GenParams { n_candidates: 300, n_companies: 200, seed: 31, noise: 0.05 };
    let cfg = ScoringConfig::default();
    let files = generate_dataset(&p, &cfg, dir.path()).unwrap();
    let pairs = load_pairs_csv(&files.pairs).unwrap();
    let (model, _) = train_model(&pairs, &TrainOptions { seed: 5, workers, ..Default::default() }).unwrap();
    let model_path = dir.path().join("model.json");
    save_model(&model, &model_path).unwrap();
    let reloaded = load_model(&model_path).unwrap();
    let inputs = load_inputs(&files.candidates, &files.companies, None).unwrap();
    let tfidf = company_tfidf(&inputs.companies).unwrap();
    let report = batch_match(&inputs.candidates, &inputs.companies, &tfidf, &cfg, 10, workers).unwrap();
    let mut matches = Vec::new();
    write_batch_csv(&report, &mut matches).unwrap();
    let probs: String = pairs.iter().map(|q| format!("{}\n", reloaded.probability(&q.features))).collect();
    let mut out: Vec<(String, Vec<u8>)> = ["candidates.csv", "companies.csv", "pairs.csv", "model.json"]
        .into_iter()
        .map(|f| (f.to_string(), std::fs::read(dir.path().join(f)).unwrap()))
        .collect();
    out.push(("matches.csv".into(), matches));
    out.push(("probabilities".into(), probs.into_bytes()));
    out
}

fn determinism() -> Outcome {
    let runs = [run_pipeline(1), run_pipeline(1), run_pipeline(2), run_pipeline(8)];
    let differing: Vec<&str> = runs[0]
        .iter()
        .enumerate()
        .filter(|(i, _)| runs[1..].iter().any(|r| r[*i].1 != runs[0][*i].1))
        .map(|(_, (name, _))| name.as_str())
        .collect();
    let bytes: usize = runs[0].iter().map(|f| f.1.len()).sum();
    outcome(
        differing.is_empty(),
        format!("4 runs (workers 1, 1, 2, 8), {} artifacts, {bytes} bytes each, differing: {differing:?}", runs[0].len()),
    )
}

/// 10,000 generated candidates with disability types assigned round-robin,
/// so every group has the same distribution of scoring attributes.
fn symmetric_population() -> Vec<CandidateProfile> {
    let p = GenParams { n_candidates: 10_000, n_companies: 0, seed: 404, noise: 0.05 };
    let mut cands = gen_candidates(&p);
    for (i, c) in cands.iter_mut().enumerate() {
        c.disability_type = DisabilityType::ALL[i % DisabilityType::ALL.len()];
    }
    cands
}

fn fairness() -> Outcome {
    let cands = symmetric_population();
    let comps = gen_companies(&GenParams { n_candidates: 0, n_companies: 500, seed: 405, noise: 0.05 });
    let tfidf = company_tfidf(&comps).unwrap();
    let prepared = prepare_companies(&comps, &tfidf).unwrap();
    let cfg = ScoringConfig { compat_min: 0.5, ..Default::default() };
    let penalized = DisabilityType::Visual;
    let run = |penalty: f64| {
        let results: Vec<_> = cands
            .iter()
            .flat_map(|c| {
                let mut pc = PreparedCandidate::new(c, &tfidf).unwrap();
                if c.disability_type == penalized {
                    pc.compat_penalty = penalty;
                }
                rank_prepared(c, &pc, &comps, &prepared, &cfg, 5)
            })
            .collect();
        let report = parity_report(&results, &cands, GroupKey::DisabilityType).unwrap();
        let alerts = check_alert(&report, 0.10).unwrap();
        (report, alerts)
    };
    let (fair, fair_alerts) = run(0.0);
    let (biased, alerts) = run(0.3);
    let names_group = alerts.len() == 1 && alerts[0].lowest_group == penalized.as_str();
    outcome(
        fair.disparity < 0.05 && fair_alerts.is_empty() && names_group,
        format!(
            "symmetric disparity {:.4}; with penalty disparity {:.4}, {} alert(s), lowest group {}",
            fair.disparity,
            biased.disparity,
            alerts.len(),
            alerts.first().map_or("-", |a| a.lowest_group.as_str())
        ),
    )
}

fn audit_completeness() -> Outcome {
    const SENTINEL: &str = "SENTINEL-7f3a Via Nascosta";
    let p = GenParams { n_candidates: 40, n_companies: 200, seed: 17, noise: 0.05 };
    let mut cands = gen_candidates(&p);
    for (i, c) in cands.iter_mut().enumerate() {
        c.address = Some(format!("{SENTINEL} {i}"));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("audit.jsonl");
    let service = MatchService::new(ScoringConfig::default(), AuditLog::open(&path).unwrap()).unwrap();
    service.load_dataset(Dataset::build(cands.clone(), gen_companies(&p)).unwrap());
    for i in 0..100 {
        // alternate lookups by id with full payloads that carry the address
        let req = if i % 2 == 0 {
            MatchRequest { candidate_id: Some(cands[i % cands.len()].id.clone()), ..Default::default() }
        } else {
            MatchRequest { candidate: Some(cands[i % cands.len()].clone()), ..Default::default() }
        };
        service.handle_match(&req).unwrap();
    }
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let parsed = lines.iter().filter(|l| serde_json::from_str::<jobmatch::service::AuditRecord>(l).is_ok()).count();
    let leaks = lines.iter().filter(|l| l.contains("SENTINEL") || l.contains("Via Nascosta")).count();
    let ids: HashSet<&str> = lines.iter().filter_map(|l| l.split("\"request_id\":\"").nth(1)?.split('"').next()).collect();
    outcome(
        lines.len() == 100 && parsed == 100 && leaks == 0 && ids.len() == 100,
        format!("{} lines, {parsed} parseable, {} distinct request ids, {leaks} containing the sentinel", lines.len(), ids.len()),
    )
}

fn main() {
    let checks: [(&str, Check); 9] = [
        ("geodesic correctness", geodesic),
        ("tf-idf oracle", tfidf_oracle),
        ("pava optimality", pava_optimality),
        ("latency", latency),
        ("throughput", throughput),
        ("learned-model band", learned_band),
        ("determinism", determinism),
        ("fairness", fairness),
        ("audit completeness", audit_completeness),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
