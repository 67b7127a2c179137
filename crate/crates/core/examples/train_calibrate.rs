//! Trains the forest, calibrates it, and evaluates it on held-out pairs.
//!
//! Run with `cargo run --release --example train_calibrate`.

use jobmatch::learning::{evaluate, load_model, save_model, split_indices};
use jobmatch::pipeline::{company_tfidf, train_model, TrainOptions};
use jobmatch::scoring::ScoringConfig;
use jobmatch::synthetic::{gen_candidates, gen_companies, gen_labeled_pairs, GenParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = GenParams { n_candidates: 800, n_companies: 150, seed: 11, noise: 0.05 };
    let comps = gen_companies(&p);
    let tfidf = company_tfidf(&comps)?;
    let pairs = gen_labeled_pairs(&gen_candidates(&p), &comps, &p, &tfidf, &ScoringConfig::default())?;

    let (train_idx, test_idx) = split_indices(pairs.len(), 5);
    let train: Vec<_> = train_idx.iter().map(|&i| pairs[i].clone()).collect();
    let test: Vec<_> = test_idx.iter().map(|&i| pairs[i].clone()).collect();
    println!("{} training pairs, {} test pairs", train.len(), test.len());

    let (model, summary) = train_model(&train, &TrainOptions { workers: 2, ..Default::default() })?;
    println!("out-of-bag F1 {:.3}", summary.oob.f1);

    let labels: Vec<u8> = test.iter().map(|q| q.label).collect();
    let raw: Vec<f64> = test.iter().map(|q| model.raw_score(&q.features)).collect();
    let cal: Vec<f64> = test.iter().map(|q| model.probability(&q.features)).collect();
    for (name, scores) in [("raw", &raw), ("calibrated", &cal)] {
        let r = evaluate(scores, &labels, 0.5)?;
        let mae = scores.iter().zip(&test).map(|(s, q)| (s - q.p_true).abs()).sum::<f64>() / test.len() as f64;
        println!(
            "{name:<10} precision {:.3} recall {:.3} F1 {:.3} AUC {:.3} MAE vs p_true {:.4}",
            r.precision,
            r.recall,
            r.f1,
            r.roc_auc.unwrap_or(f64::NAN),
            mae
        );
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.json");
    save_model(&model, &path)?;
    let back = load_model(&path)?;
    let same = test.iter().all(|q| back.probability(&q.features) == model.probability(&q.features));
    println!("reloaded model reproduces every probability: {same}");
    Ok(())
}
