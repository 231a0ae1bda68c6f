use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LINE_FACTOR: f64 = 1.2;

const BUNDLED_SANS: &str = include_str!("../../assets/sans-serif.metrics.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FontError {
    #[error("unknown font family `{0}`")]
    UnknownFont(String),
    #[error("font size must be positive, got {0}")]
    InvalidSize(f64),
    #[error("invalid metrics file: {0}")]
    InvalidMetrics(String),
}

/// Advance widths and vertical metrics for one family, in font units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FontMetrics {
    pub version: u32,
    pub family: String,
    pub units_per_em: f64,
    pub ascent: f64,
    pub descent: f64,
    pub default_advance: f64,
    /// Keyed by decimal code point.
    pub advances: BTreeMap<String, f64>,
    #[serde(skip)]
    lookup: BTreeMap<u32, f64>,
}

impl FontMetrics {
    pub fn from_json(json: &str) -> Result<FontMetrics, FontError> {
        let mut m: FontMetrics = serde_json::from_str(json).map_err(|e| FontError::InvalidMetrics(e.to_string()))?;
        if m.units_per_em <= 0.0 {
            return Err(FontError::InvalidMetrics("unitsPerEm must be positive".into()));
        }
        for (k, v) in &m.advances {
            let cp = k.parse::<u32>().map_err(|_| FontError::InvalidMetrics(format!("bad code point `{k}`")))?;
            m.lookup.insert(cp, *v);
        }
        Ok(m)
    }

    pub fn advance(&self, c: char) -> f64 {
        self.lookup.get(&(c as u32)).copied().unwrap_or(self.default_advance)
    }

    pub fn line_height(&self, size: f64) -> f64 {
        (self.ascent - self.descent) * size / self.units_per_em * LINE_FACTOR
    }

    pub fn ascent_at(&self, size: f64) -> f64 {
        self.ascent * size / self.units_per_em
    }

    fn line_width(&self, line: &str, size: f64) -> f64 {
        let units: f64 = line.chars().map(|c| self.advance(c)).sum();
        units * size / self.units_per_em
    }
}

/// Available families plus an optional fallback used for unknown names.
#[derive(Debug, Clone, PartialEq)]
pub struct FontSet {
    fonts: BTreeMap<String, FontMetrics>,
    default: Option<String>,
}

impl FontSet {
    pub fn bundled() -> FontSet {
        let sans = FontMetrics::from_json(BUNDLED_SANS).expect("bundled metrics are valid");
        let family = sans.family.clone();
        FontSet { fonts: BTreeMap::from([(family.clone(), sans)]), default: Some(family) }
    }

    pub fn without_default(mut self) -> FontSet {
        self.default = None;
        self
    }

    pub fn insert(&mut self, metrics: FontMetrics) {
        self.fonts.insert(metrics.family.clone(), metrics);
    }

    pub fn get(&self, family: &str) -> Result<&FontMetrics, FontError> {
        self.fonts
            .get(family)
            .or_else(|| self.default.as_ref().and_then(|d| self.fonts.get(d)))
            .ok_or_else(|| FontError::UnknownFont(family.to_owned()))
    }

    /// Width is the widest line; height is one line height per `\n`-separated line.
    pub fn measure_text(&self, text: &str, family: &str, size: f64) -> Result<(f64, f64), FontError> {
        if size.is_nan() || size <= 0.0 {
            return Err(FontError::InvalidSize(size));
        }
        let m = self.get(family)?;
        let mut width: f64 = 0.0;
        let mut lines = 0;
        for line in text.split('\n') {
            width = width.max(m.line_width(line, size));
            lines += 1;
        }
        Ok((width, m.line_height(size) * lines as f64))
    }
}
