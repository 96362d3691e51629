//! End-to-end pipelines behind the command-line tool: configuration, the
//! three tracking methods, side-by-side comparison and output formats.
//!
//! Configuration is plain `key = value` text with dotted keys, for example
//!
//! ```text
//! rf.peak = 200
//! score.area = 20
//! dp.alpha = 0.1
//! eval.thresholds = [15, 20]
//! ```
//!
//! which is read as TOML. Unknown keys are rejected.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dp::{baseline_bbox_track, run_forward, traceback_argmax, traceback_seeded, TrackPath, TrackerConfig};
use crate::error::{Error, Result};
use crate::frame::{FrameSequence, GrayFrame, GroundTruth, PixelPos};
use crate::metrics::{EvalReport, ThresholdMap};
use crate::replication::ReplicationFunction;
use crate::scoring::{motion_scores, per_frame_scores};
use crate::segmentation::{find_seed, SeedParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BaselineBbox,
    Dp,
    DpRf,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::BaselineBbox => "baseline-bbox",
            Method::Dp => "dp",
            Method::DpRf => "dp-rf",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "baseline-bbox" => Ok(Method::BaselineBbox),
            "dp" => Ok(Method::Dp),
            "dp-rf" => Ok(Method::DpRf),
            _ => Err(format!("unknown method `{s}` (expected baseline-bbox, dp or dp-rf)")),
        }
    }
}

/// Where the DP traceback starts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TracebackMode {
    /// Seeded for `dp-rf`, arg-max for `dp`.
    #[default]
    Auto,
    Argmax,
    Seeded,
}

impl TracebackMode {
    pub fn resolve(self, method: Method) -> TracebackMode {
        match (self, method) {
            (TracebackMode::Auto, Method::DpRf) => TracebackMode::Seeded,
            (TracebackMode::Auto, _) => TracebackMode::Argmax,
            (m, _) => m,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TracebackMode::Auto => "auto",
            TracebackMode::Argmax => "argmax",
            TracebackMode::Seeded => "seeded",
        }
    }
}

/// Which version of the last frame the seed segmentation looks at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedSource {
    #[default]
    Raw,
    /// Replicated values rescaled to `0..=255`.
    Replicated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfSection {
    pub left: u8,
    pub peak: u8,
    pub right: u8,
}

impl Default for RfSection {
    fn default() -> Self {
        let rf = ReplicationFunction::default();
        Self {
            left: rf.left(),
            peak: rf.peak(),
            right: rf.right(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreSection {
    pub area: usize,
    /// Selects `dp-rf` over `dp` when no method is given.
    pub use_rf: bool,
}

impl Default for ScoreSection {
    fn default() -> Self {
        Self {
            area: 20,
            use_rf: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpSection {
    pub radius_j: usize,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beam: Option<usize>,
    pub traceback: TracebackMode,
}

impl Default for DpSection {
    fn default() -> Self {
        Self {
            radius_j: 10,
            alpha: 0.1,
            beam: None,
            traceback: TracebackMode::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegSection {
    pub min_area: usize,
    pub invert_person: bool,
    pub source: SeedSource,
}

impl Default for SegSection {
    fn default() -> Self {
        Self {
            min_area: 25,
            invert_person: false,
            source: SeedSource::Raw,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub diff_threshold: u8,
}

impl Default for BaselineSection {
    fn default() -> Self {
        Self { diff_threshold: 25 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Match thresholds in pixels. Also accepted as `tau_match`, either a
    /// single number or a list.
    #[serde(alias = "tau_match", deserialize_with = "one_or_many")]
    pub thresholds: Vec<f64>,
}

fn one_or_many<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(t) => vec![t],
        OneOrMany::Many(ts) => ts,
    })
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            thresholds: vec![15.0, 20.0],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    pub rf: RfSection,
    pub score: ScoreSection,
    pub dp: DpSection,
    pub seg: SegSection,
    pub baseline: BaselineSection,
    pub eval: EvalSection,
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn parse_override(spec: &str) -> Result<toml::Table> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let (key, value) = (key.trim(), value.trim());
    toml::from_str(&format!("{key} = {value}"))
        .or_else(|_| toml::from_str(&format!("{key} = \"{value}\"")))
        .map_err(|e| Error::Config(format!("override `{spec}`: {e}")))
}

impl RunConfig {
    /// Parses configuration text.
    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_table(toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads an optional config file and applies `key=value` overrides on top.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|source| Error::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                toml::from_str(&text).map_err(|e| Error::Parse {
                    path: p.to_path_buf(),
                    message: e.to_string(),
                })?
            }
            None => toml::Table::new(),
        };
        for spec in overrides {
            merge(&mut table, parse_override(spec)?);
        }
        Self::from_table(table)
    }

    pub fn validate(&self) -> Result<()> {
        self.replication()?;
        self.tracker(false).validate()?;
        if self.seg.min_area == 0 {
            return Err(Error::Config("seg.min_area must be at least 1".into()));
        }
        if let Some(t) = self.eval.thresholds.iter().find(|t| t.is_nan() || **t <= 0.0) {
            return Err(Error::Config(format!("eval.thresholds must be positive, got {t}")));
        }
        Ok(())
    }

    pub fn replication(&self) -> Result<ReplicationFunction> {
        ReplicationFunction::new(self.rf.left, self.rf.peak, self.rf.right)
    }

    pub fn tracker(&self, use_rf: bool) -> TrackerConfig {
        TrackerConfig {
            radius_j: self.dp.radius_j,
            alpha: self.dp.alpha,
            area: self.score.area,
            beam: self.dp.beam,
            rf: if use_rf { self.replication().ok() } else { None },
        }
    }

    pub fn seed_params(&self) -> SeedParams {
        SeedParams {
            min_area: self.seg.min_area,
            invert_person: self.seg.invert_person,
        }
    }

    /// Explicit method, else `dp-rf` or `dp` according to `score.use_rf`.
    pub fn resolved_method(&self) -> Method {
        self.method.unwrap_or(if self.score.use_rf {
            Method::DpRf
        } else {
            Method::Dp
        })
    }

    /// The configuration as `key = value` lines, readable by
    /// [`RunConfig::from_text`].
    pub fn to_text(&self) -> String {
        fn walk(prefix: &str, table: &toml::Table, out: &mut String) {
            for (k, v) in table {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                match v {
                    toml::Value::Table(t) => walk(&key, t, out),
                    leaf => {
                        let _ = writeln!(out, "{key} = {leaf}");
                    }
                }
            }
        }
        let mut out = String::new();
        let table = toml::Table::try_from(self).expect("config serializes to a table");
        walk("", &table, &mut out);
        out
    }
}

/// Result of one tracking run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackOutcome {
    pub method: Method,
    /// `None` for the baseline.
    pub traceback: Option<TracebackMode>,
    pub seed: Option<PixelPos>,
    pub path: TrackPath,
}

fn seed_frame(seq: &FrameSequence, cfg: &RunConfig) -> Result<GrayFrame> {
    let last = seq.last();
    Ok(match cfg.seg.source {
        SeedSource::Raw => last.clone(),
        SeedSource::Replicated => cfg
            .replication()?
            .apply(last)
            .map(|&v| (v * 255.0).round() as u8),
    })
}

/// Runs one method end to end. A `seed_override` forces a seeded traceback
/// from that position instead of the segmentation seed.
pub fn track(
    seq: &FrameSequence,
    cfg: &RunConfig,
    method: Method,
    seed_override: Option<PixelPos>,
) -> Result<TrackOutcome> {
    cfg.validate()?;
    if method == Method::BaselineBbox {
        return Ok(TrackOutcome {
            method,
            traceback: None,
            seed: None,
            path: baseline_bbox_track(seq, cfg.baseline.diff_threshold),
        });
    }

    let tracker = cfg.tracker(method == Method::DpRf);
    let fields = per_frame_scores(motion_scores(seq, tracker.rf.as_ref(), tracker.area)?);
    let (scores, back) = run_forward(&fields, &tracker)?;

    let mode = if seed_override.is_some() {
        TracebackMode::Seeded
    } else {
        cfg.dp.traceback.resolve(method)
    };
    let (seed, path) = match mode {
        TracebackMode::Seeded => {
            let seed = match seed_override {
                Some(s) => s,
                None => find_seed(&seed_frame(seq, cfg)?, cfg.seed_params())?,
            };
            (Some(seed), traceback_seeded(seed, &scores, &back)?)
        }
        _ => (None, traceback_argmax(&scores, &back)),
    };
    Ok(TrackOutcome {
        method,
        traceback: Some(mode),
        seed,
        path,
    })
}

/// Path CSV: the effective configuration as `#` comment lines, then
/// `frame,row,col,score` rows.
pub fn path_csv(outcome: &TrackOutcome, cfg: &RunConfig) -> String {
    let mut effective = cfg.clone();
    effective.method = Some(outcome.method);
    let mut out = String::new();
    for line in effective.to_text().lines() {
        let _ = writeln!(out, "# {line}");
    }
    if let Some(mode) = outcome.traceback {
        let _ = writeln!(out, "# traceback = {}", mode.name());
    }
    if let Some(seed) = outcome.seed {
        let _ = writeln!(out, "# seed = {},{}", seed.row, seed.col);
    }
    out.push_str("frame,row,col,score\n");
    for (t, (p, s)) in outcome.path.positions.iter().zip(&outcome.path.scores).enumerate() {
        let _ = writeln!(out, "{t},{},{},{s}", p.row, p.col);
    }
    out
}

/// Copies of the input frames with a 5-pixel-wide white cross on each
/// tracked position.
pub fn overlay_frames(seq: &FrameSequence, path: &TrackPath) -> Vec<GrayFrame> {
    seq.frames()
        .iter()
        .zip(&path.positions)
        .map(|(f, &p)| {
            let mut out = f.clone();
            draw_cross(&mut out, p, 2);
            out
        })
        .collect()
}

fn draw_cross(frame: &mut GrayFrame, center: PixelPos, arm: usize) {
    let (w, h) = frame.dims();
    for r in center.row.saturating_sub(arm)..=(center.row + arm).min(h - 1) {
        frame[(r, center.col)] = 255;
    }
    for c in center.col.saturating_sub(arm)..=(center.col + arm).min(w - 1) {
        frame[(center.row, c)] = 255;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodRun {
    pub outcome: TrackOutcome,
    pub report: EvalReport,
}

/// `dp` and `dp-rf` evaluated against the same ground truth with every
/// other parameter shared.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub config: RunConfig,
    pub dp: MethodRun,
    pub dp_rf: MethodRun,
}

impl CompareReport {
    /// `dp-rf` minus `dp`, per threshold.
    pub fn ter_deltas(&self) -> Vec<(f64, f64)> {
        self.dp
            .report
            .ter_by_threshold
            .iter()
            .zip(&self.dp_rf.report.ter_by_threshold)
            .map(|(&(t, a), &(_, b))| (t, b - a))
            .collect()
    }

    pub fn atd_delta(&self) -> f64 {
        self.dp_rf.report.atd - self.dp.report.atd
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Run<'a> {
            traceback: &'static str,
            seed: Option<[usize; 2]>,
            report: &'a EvalReport,
        }
        #[derive(Serialize)]
        struct Delta<'a> {
            ter: ThresholdMap<'a>,
            atd: f64,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            config: &'a RunConfig,
            dp: Run<'a>,
            #[serde(rename = "dp-rf")]
            dp_rf: Run<'a>,
            delta: Delta<'a>,
        }
        fn run(m: &MethodRun) -> Run<'_> {
            Run {
                traceback: m.outcome.traceback.map_or("none", |t| t.name()),
                seed: m.outcome.seed.map(|s| [s.row, s.col]),
                report: &m.report,
            }
        }
        let deltas = self.ter_deltas();
        let doc = Doc {
            config: &self.config,
            dp: run(&self.dp),
            dp_rf: run(&self.dp_rf),
            delta: Delta {
                ter: ThresholdMap(&deltas),
                atd: self.atd_delta(),
            },
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# effective configuration");
        for line in self.config.to_text().lines() {
            let _ = writeln!(out, "#   {line}");
        }
        let _ = write!(out, "{:<8}{:<10}", "method", "traceback");
        for (t, _) in &self.dp.report.ter_by_threshold {
            let _ = write!(out, "{:>12}", format!("TER@{t}"));
        }
        let _ = writeln!(out, "{:>10}", "ATD");
        for m in [&self.dp, &self.dp_rf] {
            let tb = m.outcome.traceback.map_or("none", |t| t.name());
            let _ = write!(out, "{:<8}{:<10}", m.outcome.method.name(), tb);
            for (_, r) in &m.report.ter_by_threshold {
                let _ = write!(out, "{:>11.2}%", 100.0 * r);
            }
            let _ = writeln!(out, "{:>10.3}", m.report.atd);
        }
        let _ = write!(out, "{:<18}", "delta");
        for (_, d) in self.ter_deltas() {
            let _ = write!(out, "{:>+11.2}%", 100.0 * d);
        }
        let _ = writeln!(out, "{:>+10.3}", self.atd_delta());
        out
    }
}

/// Runs `dp` and `dp-rf` with the same configuration and evaluates both at
/// `cfg.eval.thresholds`.
pub fn compare(
    seq: &FrameSequence,
    truth: &GroundTruth,
    cfg: &RunConfig,
    seed_override: Option<PixelPos>,
) -> Result<CompareReport> {
    truth.validate_against(seq)?;
    let run = |method| -> Result<MethodRun> {
        let outcome = track(seq, cfg, method, seed_override)?;
        let report = EvalReport::evaluate(&outcome.path.positions, truth, &cfg.eval.thresholds)?;
        Ok(MethodRun { outcome, report })
    };
    let mut config = cfg.clone();
    config.method = None;
    Ok(CompareReport {
        config,
        dp: run(Method::Dp)?,
        dp_rf: run(Method::DpRf)?,
    })
}
