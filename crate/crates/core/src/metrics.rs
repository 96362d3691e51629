//! Tracking Error Rate and Average Tracked Distance.

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{GroundTruth, PixelPos};

fn distances(tracked: &[PixelPos], truth: &[PixelPos]) -> Result<Vec<f64>> {
    if tracked.len() != truth.len() {
        return Err(Error::LengthMismatch {
            what: "tracked path".into(),
            expected: truth.len(),
            got: tracked.len(),
        });
    }
    Ok(tracked
        .iter()
        .zip(truth)
        .map(|(a, b)| a.distance(b))
        .collect())
}

fn rate_at(dist: &[f64], tau_match: f64) -> f64 {
    if dist.is_empty() {
        return 0.0;
    }
    let errors = dist.iter().filter(|&&d| d >= tau_match).count();
    errors as f64 / dist.len() as f64
}

fn mean(dist: &[f64]) -> f64 {
    if dist.is_empty() {
        0.0
    } else {
        dist.iter().sum::<f64>() / dist.len() as f64
    }
}

/// Fraction of frames whose tracked position is at distance `>= tau_match`
/// from the annotation. A distance of exactly `tau_match` is an error.
pub fn ter(tracked: &[PixelPos], truth: &GroundTruth, tau_match: f64) -> Result<f64> {
    Ok(rate_at(&distances(tracked, truth.positions())?, tau_match))
}

/// Mean Euclidean distance between tracked and annotated positions.
pub fn atd(tracked: &[PixelPos], truth: &GroundTruth) -> Result<f64> {
    Ok(mean(&distances(tracked, truth.positions())?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    /// `(tau_match, TER)` in the order the thresholds were requested.
    pub ter_by_threshold: Vec<(f64, f64)>,
    pub atd: f64,
    pub per_frame_distances: Vec<f64>,
}

impl EvalReport {
    pub fn evaluate(tracked: &[PixelPos], truth: &GroundTruth, thresholds: &[f64]) -> Result<Self> {
        if let Some(bad) = thresholds.iter().find(|t| t.is_nan() || **t <= 0.0) {
            return Err(Error::Config(format!(
                "match thresholds must be positive, got {bad}"
            )));
        }
        let dist = distances(tracked, truth.positions())?;
        Ok(Self {
            ter_by_threshold: thresholds.iter().map(|&t| (t, rate_at(&dist, t))).collect(),
            atd: mean(&dist),
            per_frame_distances: dist,
        })
    }

    pub fn ter(&self, tau_match: f64) -> Option<f64> {
        self.ter_by_threshold
            .iter()
            .find(|(t, _)| *t == tau_match)
            .map(|&(_, r)| r)
    }
}

/// `15.0` becomes `"15"`, `7.5` stays `"7.5"`.
pub fn threshold_key(t: f64) -> String {
    format!("{t}")
}

pub(crate) struct ThresholdMap<'a>(pub &'a [(f64, f64)]);

impl Serialize for ThresholdMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (t, v) in self.0 {
            map.serialize_entry(&threshold_key(*t), v)?;
        }
        map.end()
    }
}

/// `{"ter": {"15": .., "20": ..}, "atd": .., "per_frame": [..]}`
impl Serialize for EvalReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("ter", &ThresholdMap(&self.ter_by_threshold))?;
        map.serialize_entry("atd", &self.atd)?;
        map.serialize_entry("per_frame", &self.per_frame_distances)?;
        map.end()
    }
}
