//! Great-circle distance and a persistent, rate-limited geocoding cache.
//!
//! Distances use the haversine formula on a sphere of radius
//! [`EARTH_RADIUS_KM`]. Geocoding goes through a [`Geocoder`] client
//! (a Nominatim-compatible HTTP endpoint in production, a stub in tests)
//! and every successful lookup is memoized in a [`GeoCache`] that is
//! persisted as CSV (`address,lat,lon,retrieved_at`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Environment variable holding the geocoder base URL.
pub const GEOCODER_URL_ENV: &str = "GEOCODER_URL";

const CACHE_HEADER: [&str; 4] = ["address", "lat", "lon", "retrieved_at"];

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("invalid coordinate: lat={lat}, lon={lon}")]
    InvalidPoint { lat: f64, lon: f64 },
    #[error("empty address")]
    EmptyAddress,
    #[error("geocoding failed for {address:?}: {reason}")]
    Lookup { address: String, reason: String },
    #[error("cache parse error at line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error("cache io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// A latitude/longitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint", into = "RawPoint")]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPoint {
    lat: f64,
    lon: f64,
}

impl TryFrom<RawPoint> for GeoPoint {
    type Error = GeoError;
    fn try_from(raw: RawPoint) -> Result<Self, Self::Error> {
        GeoPoint::new(raw.lat, raw.lon)
    }
}

impl From<GeoPoint> for RawPoint {
    fn from(p: GeoPoint) -> Self {
        RawPoint { lat: p.lat, lon: p.lon }
    }
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        let ok = lat.is_finite()
            && lon.is_finite()
            && (-90.0..=90.0).contains(&lat)
            && (-180.0..=180.0).contains(&lon);
        if ok {
            Ok(GeoPoint { lat, lon })
        } else {
            Err(GeoError::InvalidPoint { lat, lon })
        }
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lat, self.lon)
    }
}

/// Great-circle distance in kilometres.
///
/// The argument order is canonicalized before evaluation so that
/// `haversine_km(a, b)` and `haversine_km(b, a)` are bit-identical.
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    if a == b {
        return 0.0;
    }
    let (p, q) = if (a.lat, a.lon) <= (b.lat, b.lon) { (a, b) } else { (b, a) };
    let phi1 = p.lat.to_radians();
    let phi2 = q.lat.to_radians();
    let dphi = (q.lat - p.lat).to_radians();
    let dlambda = (q.lon - p.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.clamp(0.0, 1.0).sqrt().asin()
}

/// Cache key: lowercase, internal whitespace collapsed, trailing commas stripped.
pub fn normalize_address(address: &str) -> String {
    let collapsed = address.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_end_matches(|c: char| c == ',' || c.is_whitespace())
        .to_lowercase()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub point: GeoPoint,
    pub retrieved_at: DateTime<Utc>,
}

/// Address → coordinates memo. Entries are never overwritten or expired.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeoCache {
    entries: BTreeMap<String, CacheEntry>,
    path: Option<PathBuf>,
}

impl GeoCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads the cache from `path`; a missing file yields an empty cache bound to `path`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, GeoError> {
        let path = path.as_ref();
        let mut cache = if path.exists() {
            load_cache(path)?
        } else {
            GeoCache::new()
        };
        cache.path = Some(path.to_path_buf());
        Ok(cache)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, address: &str) -> Option<&CacheEntry> {
        self.entries.get(&normalize_address(address))
    }

    /// Inserts unless the normalized key is already present. Returns whether it was inserted.
    pub fn insert(&mut self, address: &str, point: GeoPoint, retrieved_at: DateTime<Utc>) -> bool {
        let key = normalize_address(address);
        if self.entries.contains_key(&key) {
            return false;
        }
        self.entries.insert(key, CacheEntry { point, retrieved_at });
        true
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &CacheEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Writes back to the path the cache was loaded from, if any.
    pub fn persist(&self) -> Result<(), GeoError> {
        match &self.path {
            Some(p) => save_cache(self, p),
            None => Ok(()),
        }
    }
}

pub fn load_cache(path: impl AsRef<Path>) -> Result<GeoCache, GeoError> {
    let file = std::fs::File::open(path.as_ref())?;
    read_cache(file)
}

pub fn read_cache<R: std::io::Read>(reader: R) -> Result<GeoCache, GeoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut cache = GeoCache::new();
    let mut records = rdr.records();
    match records.next() {
        None => return Ok(cache),
        Some(header) => {
            let header = header?;
            if header.iter().ne(CACHE_HEADER.iter().copied()) {
                return Err(GeoError::Parse {
                    line: 1,
                    reason: format!("expected header {}", CACHE_HEADER.join(",")),
                });
            }
        }
    }
    for rec in records {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |reason: String| GeoError::Parse { line, reason };
        if rec.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", rec.len())));
        }
        let lat: f64 = rec[1].parse().map_err(|_| bad(format!("lat {:?} is not a number", &rec[1])))?;
        let lon: f64 = rec[2].parse().map_err(|_| bad(format!("lon {:?} is not a number", &rec[2])))?;
        let point = GeoPoint::new(lat, lon).map_err(|e| bad(e.to_string()))?;
        let retrieved_at = DateTime::parse_from_rfc3339(&rec[3])
            .map_err(|e| bad(format!("retrieved_at {:?}: {e}", &rec[3])))?
            .with_timezone(&Utc);
        cache.entries.insert(normalize_address(&rec[0]), CacheEntry { point, retrieved_at });
    }
    Ok(cache)
}

pub fn save_cache(cache: &GeoCache, path: impl AsRef<Path>) -> Result<(), GeoError> {
    let path = path.as_ref();
    let tmp = path.with_extension("csv.tmp");
    {
        let file = std::fs::File::create(&tmp)?;
        write_cache(cache, file)?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_cache<W: std::io::Write>(cache: &GeoCache, writer: W) -> Result<(), GeoError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CACHE_HEADER)?;
    for (address, entry) in &cache.entries {
        wtr.write_record([
            address.as_str(),
            &entry.point.lat.to_string(),
            &entry.point.lon.to_string(),
            &entry.retrieved_at.to_rfc3339_opts(SecondsFormat::AutoSi, true),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Enforces a minimum spacing between external calls.
#[derive(Debug, Clone)]
pub struct RateLimiter {
    min_interval: Duration,
    last_call: Option<Instant>,
}

impl Default for RateLimiter {
    fn default() -> Self {
        Self::new(Duration::from_secs(1))
    }
}

impl RateLimiter {
    pub fn new(min_interval: Duration) -> Self {
        RateLimiter { min_interval, last_call: None }
    }

    pub fn min_interval(&self) -> Duration {
        self.min_interval
    }

    /// Blocks until a call is allowed, then records it.
    pub fn acquire(&mut self) {
        if let Some(last) = self.last_call {
            let elapsed = last.elapsed();
            if elapsed < self.min_interval {
                thread::sleep(self.min_interval - elapsed);
            }
        }
        self.last_call = Some(Instant::now());
    }
}

/// Forward geocoding backend.
pub trait Geocoder {
    /// Returns candidate coordinates for `address`, best match first.
    fn search(&self, address: &str) -> Result<Vec<GeoPoint>, String>;
}

/// Looks up `address`, consulting `cache` first. A miss issues exactly one
/// rate-limited client call; on failure the cache is left untouched.
pub fn geocode<G: Geocoder + ?Sized>(
    address: &str,
    cache: &mut GeoCache,
    limiter: &mut RateLimiter,
    client: &G,
) -> Result<GeoPoint, GeoError> {
    if address.trim().is_empty() {
        return Err(GeoError::EmptyAddress);
    }
    if let Some(hit) = cache.get(address) {
        return Ok(hit.point);
    }
    limiter.acquire();
    let lookup_err = |reason: String| GeoError::Lookup { address: address.to_string(), reason };
    let point = client
        .search(address)
        .map_err(lookup_err)?
        .into_iter()
        .next()
        .ok_or_else(|| lookup_err("no results".into()))?;
    cache.insert(address, point, Utc::now());
    Ok(point)
}

/// Single-writer bundle of cache, limiter and client.
pub struct CachedGeocoder<G> {
    pub cache: GeoCache,
    pub limiter: RateLimiter,
    pub client: G,
}

impl<G: Geocoder> CachedGeocoder<G> {
    pub fn new(cache: GeoCache, limiter: RateLimiter, client: G) -> Self {
        CachedGeocoder { cache, limiter, client }
    }

    pub fn geocode(&mut self, address: &str) -> Result<GeoPoint, GeoError> {
        geocode(address, &mut self.cache, &mut self.limiter, &self.client)
    }
}

/// Blocking client for a Nominatim-compatible `/search` endpoint.
pub struct NominatimClient {
    base_url: String,
    agent: ureq::Agent,
    user_agent: String,
}

#[derive(Deserialize)]
struct NominatimHit {
    lat: String,
    lon: String,
}

impl NominatimClient {
    pub fn new(base_url: impl Into<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(10)))
            .build();
        NominatimClient {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            agent: config.into(),
            user_agent: concat!("jobmatch/", env!("CARGO_PKG_VERSION")).to_string(),
        }
    }

    /// Builds a client from `GEOCODER_URL`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var(GEOCODER_URL_ENV).ok().filter(|s| !s.is_empty()).map(Self::new)
    }

    pub fn search_url(&self, address: &str) -> String {
        let mut url = url::Url::parse(&format!("{}/search", self.base_url))
            .unwrap_or_else(|_| url::Url::parse("http://invalid/search").unwrap());
        url.query_pairs_mut().append_pair("q", address).append_pair("format", "json");
        url.to_string()
    }
}

impl Geocoder for NominatimClient {
    fn search(&self, address: &str) -> Result<Vec<GeoPoint>, String> {
        let body = self
            .agent
            .get(&self.search_url(address))
            .header("User-Agent", &self.user_agent)
            .call()
            .map_err(|e| e.to_string())?
            .body_mut()
            .read_to_string()
            .map_err(|e| e.to_string())?;
        let hits: Vec<NominatimHit> = serde_json::from_str(&body).map_err(|e| e.to_string())?;
        hits.into_iter()
            .map(|h| {
                let lat = h.lat.parse::<f64>().map_err(|e| e.to_string())?;
                let lon = h.lon.parse::<f64>().map_err(|e| e.to_string())?;
                GeoPoint::new(lat, lon).map_err(|e| e.to_string())
            })
            .collect()
    }
}
