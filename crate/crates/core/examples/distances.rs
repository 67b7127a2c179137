//! Great-circle distances and an offline geocoding cache.
//!
//! Run with `cargo run --example distances`.

use std::cell::Cell;
use std::time::Duration;

use jobmatch::geo::{haversine_km, CachedGeocoder, GeoCache, GeoPoint, Geocoder, RateLimiter};

/// Stands in for a Nominatim server; counts the lookups it serves.
struct Gazetteer {
    calls: Cell<u32>,
}

impl Geocoder for Gazetteer {
    fn search(&self, address: &str) -> Result<Vec<GeoPoint>, String> {
        self.calls.set(self.calls.get() + 1);
        let point = match address {
            a if a.contains("Villafranca") => GeoPoint::new(45.3540, 10.8447),
            a if a.contains("Verona") => GeoPoint::new(45.4384, 10.9916),
            _ => return Ok(Vec::new()),
        };
        Ok(vec![point.map_err(|e| e.to_string())?])
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let north = GeoPoint::new(90.0, 0.0)?;
    let south = GeoPoint::new(-90.0, 0.0)?;
    println!("pole to pole: {:.3} km", haversine_km(north, south));

    let dir = tempfile::tempdir()?;
    let cache_path = dir.path().join("geocache.csv");
    let client = Gazetteer { calls: Cell::new(0) };
    let mut geocoder =
        CachedGeocoder::new(GeoCache::load(&cache_path)?, RateLimiter::new(Duration::from_millis(50)), client);

    let verona = geocoder.geocode("Piazza Bra, Verona")?;
    let villafranca = geocoder.geocode("Corso Vittorio Emanuele, Villafranca di Verona")?;
    // repeated and differently spaced lookups are cache hits
    geocoder.geocode("piazza bra,  VERONA")?;
    println!("Verona to Villafranca: {:.2} km", haversine_km(verona, villafranca));
    println!("client calls: {}, cached addresses: {}", geocoder.client.calls.get(), geocoder.cache.len());
    match geocoder.geocode("Nowhere 1") {
        Ok(p) => println!("unexpected hit {p:?}"),
        Err(e) => println!("lookup failed: {e}"),
    }

    geocoder.cache.persist()?;
    let reloaded = GeoCache::load(&cache_path)?;
    println!("reloaded {} entries from {}", reloaded.len(), cache_path.display());
    Ok(())
}
