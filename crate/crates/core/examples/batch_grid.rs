//! Scores every candidate against every company on several threads and
//! writes the top matches as CSV.
//!
//! Run with `cargo run --release --example batch_grid`.

use jobmatch::batch::{batch_match, write_batch_csv};
use jobmatch::pipeline::company_tfidf;
use jobmatch::scoring::ScoringConfig;
use jobmatch::synthetic::{gen_candidates, gen_companies, GenParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = GenParams { n_candidates: 500, n_companies: 1000, seed: 3, noise: 0.05 };
    let cands = gen_candidates(&p);
    let comps = gen_companies(&p);
    let tfidf = company_tfidf(&comps)?;
    let cfg = ScoringConfig::default();

    let mut csv_by_workers = Vec::new();
    for workers in [1, 4] {
        let report = batch_match(&cands, &comps, &tfidf, &cfg, 5, workers)?;
        println!("{} pairs on {} worker(s) in {:.3}s", report.pair_count, report.worker_count, report.elapsed_secs);
        let mut buf = Vec::new();
        write_batch_csv(&report, &mut buf)?;
        csv_by_workers.push(buf);
    }
    println!("outputs identical: {}", csv_by_workers[0] == csv_by_workers[1]);
    let text = String::from_utf8(csv_by_workers.swap_remove(0))?;
    for line in text.lines().take(6) {
        println!("{line}");
    }
    Ok(())
}
