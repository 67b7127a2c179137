use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jobmatch::geo::GeoPoint;
use jobmatch::learning::{
    evaluate, featurize_pair, fit_forest, load_model, predict_proba, random_search, save_model, split_indices,
    train_forest, FeatureVector, ForestParams, LearnError, ModelBundle, FEATURE_COUNT,
};
use jobmatch::pipeline::{company_tfidf, train_model, TrainOptions};
use jobmatch::scoring::{CandidateProfile, CompanyProfile, DisabilityType, EducationLevel, ScoringConfig};
use jobmatch::synthetic::{gen_candidates, gen_companies, gen_labeled_pairs, GenParams, LabeledPair};
use jobmatch::text_it::fit_tfidf;

fn dataset(n_candidates: usize, n_companies: usize, seed: u64) -> Vec<LabeledPair> {
    let p = GenParams { n_candidates, n_companies, seed, noise: 0.05 };
    let comps = gen_companies(&p);
    let tfidf = company_tfidf(&comps).unwrap();
    gen_labeled_pairs(&gen_candidates(&p), &comps, &p, &tfidf, &ScoringConfig::default()).unwrap()
}

fn xy(pairs: &[LabeledPair]) -> (Vec<FeatureVector>, Vec<u8>) {
    pairs.iter().map(|p| (p.features, p.label)).unzip()
}

#[test]
fn toy_pair_features() {
    let corpus = ["sollevamento pesi magazzino", "magazzino logistica inventario", "ufficio inventario contabilità"];
    let tfidf = fit_tfidf(&corpus).unwrap();
    let cand = CandidateProfile {
        id: "C".into(),
        address: None,
        residence: Some(GeoPoint::new(45.0, 10.0).unwrap()),
        education_level: EducationLevel::new(3).unwrap(),
        disability_type: DisabilityType::Hearing,
        attitude: 0.6,
        years_experience: 4.5,
        unemployment_months: 7,
        skills_text: "magazzino inventario".into(),
        exclusions: vec![],
    };
    let comp = CompanyProfile {
        id: "A".into(),
        name: "Magazzini".into(),
        address: None,
        location: Some(GeoPoint::new(45.1, 10.0).unwrap()),
        sector: "logistica".into(),
        employee_count: 30,
        open_positions: 1,
        tasks_text: corpus[1].into(),
        remote_available: false,
        certified: true,
        past_disability_hires: 2,
    };
    let fv = featurize_pair(&cand, &comp, &tfidf, &ScoringConfig::default()).unwrap();

    let r = 2f64.ln() + 1.0;
    let c = (4.0f64 / 3.0).ln() + 1.0;
    // along a meridian the great-circle distance is R times the angle
    let d = 6371.0 * 0.1f64.to_radians();
    let expected = [
        2f64.sqrt() * c / (2.0 * c * c + r * r).sqrt(),
        d,
        1.0 - d / 30.0,
        0.6,
        0.4 + 0.3 * 2.0 / 5.0,
        3.0,
        4.5,
        7.0,
        0.0,
        1.0,
    ];
    for (i, (got, want)) in fv.as_slice().iter().zip(expected).enumerate() {
        assert!((got - want).abs() < 1e-9, "slot {i}: {got} vs {want}");
    }
    assert_eq!(featurize_pair(&cand, &comp, &tfidf, &ScoringConfig::default()).unwrap(), fv);
}

/// Training accuracy of the best single threshold on feature 0, by brute force.
fn best_stump_accuracy(x: &[FeatureVector], y: &[u8]) -> f64 {
    let mut cuts: Vec<f64> = x.iter().map(|v| v.0[0]).collect();
    cuts.push(f64::NEG_INFINITY);
    cuts.iter()
        .flat_map(|&t| [(t, true), (t, false)])
        .map(|(t, pos_above)| {
            let hits = x.iter().zip(y).filter(|(v, &l)| ((v.0[0] > t) == pos_above) == (l == 1)).count();
            hits as f64 / x.len() as f64
        })
        .fold(0.0, f64::max)
}

#[test]
fn single_stump_separates_one_dimensional_data() {
    let x: Vec<FeatureVector> = (0..40)
        .map(|i| {
            let mut v = [0.5; FEATURE_COUNT];
            v[0] = i as f64 * 0.25;
            FeatureVector(v)
        })
        .collect();
    let y: Vec<u8> = (0..40).map(|i| u8::from(i >= 23)).collect();
    let params = ForestParams { n_trees: 1, max_depth: 1, min_samples_leaf: 1, features_per_split: FEATURE_COUNT, bootstrap: false };
    let forest = fit_forest(&x, &y, &params, 9, 1).unwrap();
    let probs: Vec<f64> = x.iter().map(|v| predict_proba(&forest, v)).collect();
    let accuracy = probs.iter().zip(&y).filter(|(p, &l)| (**p >= 0.5) == (l == 1)).count() as f64 / x.len() as f64;
    assert_eq!(best_stump_accuracy(&x, &y), 1.0);
    assert_eq!(accuracy, 1.0);
    assert_eq!(forest.trees[0].depth(), 1);
}

#[test]
fn worker_count_does_not_change_the_forest() {
    let pairs = dataset(150, 60, 4);
    let params = ForestParams { n_trees: 24, ..Default::default() };
    let one = train_forest(&pairs, &params, 17, 1).unwrap();
    let eight = train_forest(&pairs, &params, 17, 8).unwrap();
    assert_eq!(one, eight);
    let probe = &pairs[..200];
    for q in probe {
        assert_eq!(predict_proba(&one, &q.features).to_bits(), predict_proba(&eight, &q.features).to_bits());
    }
}

#[test]
fn row_order_does_not_change_predictions() {
    let pairs = dataset(150, 60, 5);
    let mut shuffled = pairs.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
    assert_ne!(shuffled.iter().map(|q| &q.candidate_id).collect::<Vec<_>>(), pairs.iter().map(|q| &q.candidate_id).collect::<Vec<_>>());
    let params = ForestParams { n_trees: 16, ..Default::default() };
    let a = train_forest(&pairs, &params, 2, 2).unwrap();
    let b = train_forest(&shuffled, &params, 2, 2).unwrap();
    for q in &pairs {
        assert_eq!(predict_proba(&a, &q.features), predict_proba(&b, &q.features));
    }
}

#[test]
fn trees_respect_limits_and_leaves_are_fractions() {
    let pairs = dataset(120, 50, 6);
    let params = ForestParams { n_trees: 8, max_depth: 4, min_samples_leaf: 10, ..Default::default() };
    let forest = train_forest(&pairs, &params, 1, 1).unwrap();
    assert_eq!(forest.trees.len(), 8);
    for t in &forest.trees {
        assert!(t.depth() <= 4);
        assert!(t.leaves().all(|f| (0.0..=1.0).contains(&f)));
    }
    assert!(matches!(forest.predict_row(&[0.0; 3]), Err(LearnError::Shape { .. })));
}

#[test]
fn model_file_round_trip_is_bit_exact() {
    let pairs = dataset(200, 60, 7);
    let opts = TrainOptions { params: ForestParams { n_trees: 30, ..Default::default() }, ..Default::default() };
    let (model, _) = train_model(&pairs, &opts).unwrap();
    assert!(model.calibrator.is_some());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&model, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, model);
    for q in &pairs {
        assert_eq!(back.raw_score(&q.features).to_bits(), model.raw_score(&q.features).to_bits());
        assert_eq!(back.probability(&q.features).to_bits(), model.probability(&q.features).to_bits());
    }
}

#[test]
fn model_file_header_is_checked() {
    let pairs = dataset(60, 30, 8);
    let forest = train_forest(&pairs, &ForestParams { n_trees: 2, ..Default::default() }, 0, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    for edit in [
        |b: &mut ModelBundle| b.version = 99,
        |b: &mut ModelBundle| b.format = "other".into(),
        |b: &mut ModelBundle| b.feature_names.reverse(),
    ] {
        let mut bundle = ModelBundle::new(forest.clone(), None);
        edit(&mut bundle);
        save_model(&bundle, &path).unwrap();
        assert!(matches!(load_model(&path), Err(LearnError::Format(_))));
    }
    std::fs::write(&path, "{").unwrap();
    assert!(matches!(load_model(&path), Err(LearnError::Json(_))));
}

#[test]
fn search_beats_or_ties_default_params() {
    let pairs = dataset(300, 80, 9);
    let seed = 13;
    let outcome = random_search(&pairs, 20, seed, 4).unwrap();
    assert_eq!(outcome.trials.len(), 20);

    let (train, val) = split_indices(pairs.len(), seed);
    let (xt, yt) = xy(&train.iter().map(|&i| pairs[i].clone()).collect::<Vec<_>>());
    let (xv, yv) = xy(&val.iter().map(|&i| pairs[i].clone()).collect::<Vec<_>>());
    let forest = fit_forest(&xt, &yt, &ForestParams::default(), seed, 1).unwrap();
    let default_f1 = evaluate(&forest.predict_many(&xv), &yv, 0.5).unwrap().f1;
    assert!(outcome.best_report.f1 >= default_f1, "{} < {default_f1}", outcome.best_report.f1);

    let first_best = outcome.trials.iter().position(|(_, r)| r.f1 == outcome.best_report.f1).unwrap();
    assert_eq!(outcome.trials[first_best].0, outcome.best_params);
}

#[test]
fn search_is_seeded() {
    let pairs = dataset(120, 40, 10);
    let a = random_search(&pairs, 3, 5, 1).unwrap();
    let b = random_search(&pairs, 3, 5, 3).unwrap();
    assert_eq!(a, b);
    let single = random_search(&pairs, 1, 5, 1).unwrap();
    assert_eq!(single.best_params, single.trials[0].0);
}

#[test]
fn labels_follow_their_probabilities() {
    // Monte Carlo: over ~100k pairs the label mean tracks the mean p_true
    let pairs = dataset(4000, 300, 11);
    assert!(pairs.len() >= 95_000, "{}", pairs.len());
    let n = pairs.len() as f64;
    let label_mean = pairs.iter().map(|q| q.label as f64).sum::<f64>() / n;
    let p_mean = pairs.iter().map(|q| q.p_true).sum::<f64>() / n;
    assert!((label_mean - p_mean).abs() < 0.01, "{label_mean} vs {p_mean}");
}
