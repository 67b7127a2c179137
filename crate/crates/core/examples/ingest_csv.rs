//! Reads candidate and company CSVs, reporting rows that fail validation.
//!
//! Run with `cargo run --example ingest_csv`.

use jobmatch::ingest::{read_candidates, read_companies, write_candidates, CANDIDATE_COLUMNS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let header = CANDIDATE_COLUMNS.join(",");
    let candidates = format!(
        "{header}\n\
         C1,,45.43,10.99,2,physical,0.8,3,6,servizio ai tavoli,sollevamento carichi\n\
         C2,,45.40,10.90,9,visual,0.5,1,2,archiviazione,\n\
         C3,,45.41,10.95,1,hearing,1.4,0,12,pulizia uffici,\n\
         C4,\"Via Roma 1, Verona\",,,3,multiple,0.6,5,0,magazzino,turni notturni;lavoro in quota\n"
    );
    println!("columns: {header}");
    let (cands, report) = read_candidates(candidates.as_bytes())?;
    println!("{} accepted of {} rows", report.accepted_count, report.total_rows());
    for r in &report.rejected {
        println!("  line {} field {}: {}", r.line, r.field, r.reason);
    }
    for c in &cands {
        println!("  {} residence={:?} exclusions={:?}", c.id, c.residence.map(|p| (p.lat(), p.lon())), c.exclusions);
    }

    let missing = "id,name\nA1,Trattoria\n";
    match read_companies(missing.as_bytes()) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("companies: {e}"),
    }

    let mut out = Vec::new();
    write_candidates(&cands, &mut out)?;
    print!("{}", String::from_utf8(out)?);
    Ok(())
}
