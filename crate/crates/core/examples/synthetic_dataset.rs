//! Generates a synthetic population and its labeled referral pairs.
//!
//! Run with `cargo run --example synthetic_dataset`.

use jobmatch::pipeline::company_tfidf;
use jobmatch::scoring::ScoringConfig;
use jobmatch::synthetic::{gen_candidates, gen_companies, gen_labeled_pairs, GenParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = GenParams { n_candidates: 400, n_companies: 120, seed: 7, noise: 0.05 };
    let cands = gen_candidates(&p);
    let comps = gen_companies(&p);
    let tfidf = company_tfidf(&comps)?;
    let pairs = gen_labeled_pairs(&cands, &comps, &p, &tfidf, &ScoringConfig::default())?;

    let c = &cands[0];
    println!("{} {} edu={} attitude={:.3} skills={:?}", c.id, c.disability_type, c.education_level.label(), c.attitude, c.skills_text);
    let m = &comps[0];
    println!("{} {} certified={} tasks={:?}", m.id, m.sector, m.certified, m.tasks_text);

    let positives = pairs.iter().filter(|q| q.label == 1).count();
    let mean_p = pairs.iter().map(|q| q.p_true).sum::<f64>() / pairs.len() as f64;
    println!("{} pairs, {} positive ({:.3}), mean p_true {:.3}", pairs.len(), positives, positives as f64 / pairs.len() as f64, mean_p);
    println!("features of the first pair: {:?}", pairs[0].features.as_slice());
    Ok(())
}
