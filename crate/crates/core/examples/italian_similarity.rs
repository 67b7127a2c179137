//! Italian tokenization and TF-IDF cosine similarity.
//!
//! Run with `cargo run --example italian_similarity`.

use jobmatch::text_it::{fit_tfidf, tokenize_it};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tasks = [
        "Preparazione dei tavoli e servizio ai clienti in sala",
        "Lavaggio delle stoviglie e pulizia della cucina",
        "Archiviazione documenti e inserimento dati al computer",
        "Carico e scarico merci in magazzino con il transpallet",
    ];
    let skills = "Esperienza nel servizio ai tavoli, accoglienza dei clienti";

    println!("tokens: {:?}", tokenize_it(skills).as_slice());
    let model = fit_tfidf(&tasks)?;
    println!("{} documents, {} terms", model.doc_count(), model.vocabulary_len());

    let query = model.vectorize(skills);
    let mut scored: Vec<(f64, &str)> = tasks.iter().map(|t| (query.cosine(&model.vectorize(t)), *t)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (sim, text) in scored {
        println!("{sim:.4}  {text}");
    }
    Ok(())
}
