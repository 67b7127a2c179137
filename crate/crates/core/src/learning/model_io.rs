//! JSON model bundle with a format and version header.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{apply_calibrator, predict_proba, Calibrator, FeatureVector, Forest, LearnError, FEATURE_NAMES};

pub const MODEL_FORMAT: &str = "jobmatch-forest";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format: String,
    pub version: u32,
    pub feature_names: Vec<String>,
    pub forest: Forest,
    pub calibrator: Option<Calibrator>,
}

impl ModelBundle {
    pub fn new(forest: Forest, calibrator: Option<Calibrator>) -> Self {
        ModelBundle {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            forest,
            calibrator,
        }
    }

    pub fn raw_score(&self, fv: &FeatureVector) -> f64 {
        predict_proba(&self.forest, fv)
    }

    /// Calibrated probability, or the raw score when no calibrator is stored.
    pub fn probability(&self, fv: &FeatureVector) -> f64 {
        let raw = self.raw_score(fv);
        match &self.calibrator {
            Some(c) => apply_calibrator(c, raw),
            None => raw,
        }
    }

    fn check(&self) -> Result<(), LearnError> {
        if self.format != MODEL_FORMAT {
            return Err(LearnError::Format(format!("unknown format {:?}", self.format)));
        }
        if self.version != MODEL_VERSION {
            return Err(LearnError::Format(format!("unsupported version {}", self.version)));
        }
        if self.feature_names != FEATURE_NAMES {
            return Err(LearnError::Format("feature layout differs".into()));
        }
        if self.forest.trees.is_empty() {
            return Err(LearnError::Format("forest has no trees".into()));
        }
        if let Some(c) = &self.calibrator {
            c.validate()?;
        }
        Ok(())
    }
}

pub fn save_model(bundle: &ModelBundle, path: impl AsRef<Path>) -> Result<(), LearnError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, bundle)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelBundle, LearnError> {
    let bundle: ModelBundle = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    bundle.check()?;
    Ok(bundle)
}
