//! Synthetic ground-truthed scenes and an exhaustive best-path oracle.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dp::{PenaltyKernel, TrackPath};
use crate::error::{Error, Result};
use crate::frame::{FrameSequence, GrayFrame, GroundTruth, PixelPos};
use crate::scoring::ScoreField;

/// A filled disc following one `(row, col)` center per frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub radius: usize,
    pub intensity: u8,
    pub trajectory: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub background: u8,
    /// Uniform additive noise in `[-noise, noise]`, clamped to `[0, 255]`.
    #[serde(default)]
    pub noise: u8,
    #[serde(default)]
    pub seed: u64,
    /// Blobs are drawn in list order, later ones on top.
    pub blobs: Vec<BlobSpec>,
    /// Index of the tracked blob.
    #[serde(default)]
    pub target: usize,
}

#[derive(Clone, Debug)]
pub struct SyntheticScene {
    pub sequence: FrameSequence,
    /// Centers per blob, in `blobs` order.
    pub truths: Vec<GroundTruth>,
    pub target: usize,
}

impl SyntheticScene {
    pub fn target_truth(&self) -> &GroundTruth {
        &self.truths[self.target]
    }
}

impl SceneSpec {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn num_frames(&self) -> usize {
        self.blobs.first().map_or(0, |b| b.trajectory.len())
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Scene("frame dimensions must be non-zero".into()));
        }
        if self.blobs.is_empty() {
            return Err(Error::Scene("at least one blob is required".into()));
        }
        if self.target >= self.blobs.len() {
            return Err(Error::Scene(format!(
                "target {} but only {} blobs",
                self.target,
                self.blobs.len()
            )));
        }
        let t = self.num_frames();
        if t < 2 {
            return Err(Error::Scene("trajectories need at least 2 frames".into()));
        }
        for (i, b) in self.blobs.iter().enumerate() {
            if b.trajectory.len() != t {
                return Err(Error::Scene(format!(
                    "blob {i} has {} trajectory points, expected {t}",
                    b.trajectory.len()
                )));
            }
            if let Some((f, &(r, c))) = b
                .trajectory
                .iter()
                .enumerate()
                .find(|(_, &(r, c))| r >= self.height || c >= self.width)
            {
                return Err(Error::Scene(format!(
                    "blob {i} center ({r}, {c}) at frame {f} is outside the {}x{} frame",
                    self.width, self.height
                )));
            }
        }
        Ok(())
    }
}

fn paint_disc(frame: &mut GrayFrame, center: (usize, usize), radius: usize, intensity: u8) {
    let (cr, cc) = (center.0 as isize, center.1 as isize);
    let rad = radius as isize;
    for r in (cr - rad).max(0)..=(cr + rad).min(frame.height() as isize - 1) {
        for c in (cc - rad).max(0)..=(cc + rad).min(frame.width() as isize - 1) {
            if (r - cr).pow(2) + (c - cc).pow(2) <= rad * rad {
                frame[(r as usize, c as usize)] = intensity;
            }
        }
    }
}

/// Renders the scene; deterministic for a given spec.
pub fn generate(spec: &SceneSpec) -> Result<SyntheticScene> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = i16::from(spec.noise);
    let frames = (0..spec.num_frames())
        .map(|t| {
            let mut f = GrayFrame::filled(spec.width, spec.height, spec.background);
            for b in &spec.blobs {
                paint_disc(&mut f, b.trajectory[t], b.radius, b.intensity);
            }
            if noise > 0 {
                for v in f.data_mut() {
                    *v = (i16::from(*v) + rng.gen_range(-noise..=noise)).clamp(0, 255) as u8;
                }
            }
            f
        })
        .collect();
    let truths = spec
        .blobs
        .iter()
        .map(|b| {
            GroundTruth::new(
                b.trajectory
                    .iter()
                    .map(|&(r, c)| PixelPos::new(r, c))
                    .collect(),
            )
        })
        .collect();
    Ok(SyntheticScene {
        sequence: FrameSequence::new(frames)?,
        truths,
        target: spec.target,
    })
}

/// Piecewise-linear trajectory through `(frame, (row, col))` keyframes,
/// rounded to whole pixels. Keyframes must be in increasing frame order and
/// the first must be frame 0.
pub fn interpolate(keys: &[(usize, (f64, f64))]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for pair in keys.windows(2) {
        let (t0, (r0, c0)) = pair[0];
        let (t1, (r1, c1)) = pair[1];
        for t in t0..t1 {
            let a = (t - t0) as f64 / (t1 - t0) as f64;
            out.push((
                (r0 + a * (r1 - r0)).round() as usize,
                (c0 + a * (c1 - c0)).round() as usize,
            ));
        }
    }
    if let Some(&(_, (r, c))) = keys.last() {
        out.push((r.round() as usize, c.round() as usize));
    }
    out
}

/// A bright hand (200) travelling from the lower right, across a swaying
/// face (140), to the lower left, in front of a static torso (100) on a dark
/// background (20). The face moves more pixels per frame than the hand, so
/// raw difference images favour it.
pub fn occlusion_scenario() -> SceneSpec {
    const T: usize = 40;
    let hand = interpolate(&[
        (0, (84.0, 78.0)),
        (12, (44.0, 66.0)),
        (20, (26.0, 46.0)),
        (28, (44.0, 24.0)),
        (39, (80.0, 14.0)),
    ]);
    let face = (0..T)
        .map(|t| {
            let phase = t as f64 * std::f64::consts::TAU / 10.0;
            ((26.0 + 3.0 * phase.cos()).round() as usize, (48.0 + 7.0 * phase.sin()).round() as usize)
        })
        .collect();
    SceneSpec {
        width: 100,
        height: 100,
        background: 20,
        noise: 8,
        seed: 104,
        target: 2,
        blobs: vec![
            BlobSpec {
                radius: 28,
                intensity: 100,
                trajectory: vec![(92, 50); T],
            },
            BlobSpec {
                radius: 14,
                intensity: 140,
                trajectory: face,
            },
            BlobSpec {
                radius: 8,
                intensity: 200,
                trajectory: hand,
            },
        ],
    }
}

/// One noiseless bright disc drifting towards the lower left.
pub fn single_blob_scenario() -> SceneSpec {
    SceneSpec {
        width: 64,
        height: 64,
        background: 20,
        noise: 0,
        seed: 1,
        target: 0,
        blobs: vec![BlobSpec {
            radius: 8,
            intensity: 200,
            trajectory: interpolate(&[(0, (14.0, 46.0)), (15, (46.0, 16.0))]),
        }],
    }
}

/// Largest number of constrained paths the oracle will enumerate.
pub const ORACLE_PATH_LIMIT: u128 = 10_000_000;

/// Number of paths whose consecutive positions differ by at most `j` in
/// each coordinate, or `None` once it exceeds `limit`.
pub fn count_constrained_paths(w: usize, h: usize, t_len: usize, j: usize, limit: u128) -> Option<u128> {
    let n = w * h;
    if t_len == 0 {
        return Some(0);
    }
    if n as u128 > limit {
        return None;
    }
    let mut counts = vec![1u128; n];
    for _ in 1..t_len {
        let mut next = vec![0u128; n];
        for (u, slot) in next.iter_mut().enumerate() {
            let (r, c) = (u / w, u % w);
            for pr in r.saturating_sub(j)..=(r + j).min(h - 1) {
                for pc in c.saturating_sub(j)..=(c + j).min(w - 1) {
                    *slot = slot.saturating_add(counts[pr * w + pc]);
                }
            }
        }
        counts = next;
        if counts.iter().fold(0u128, |a, &b| a.saturating_add(b)) > limit {
            return None;
        }
    }
    Some(counts.iter().sum())
}

struct Search<'a> {
    fields: &'a [ScoreField],
    kernel: &'a PenaltyKernel,
    j: usize,
    path: Vec<PixelPos>,
    prefix: Vec<f64>,
    best: Option<(f64, Vec<PixelPos>, Vec<f64>)>,
}

impl Search<'_> {
    /// True if `candidate` read from the last frame backwards is smaller.
    fn reversed_less(candidate: &[PixelPos], incumbent: &[PixelPos]) -> bool {
        candidate.iter().rev().lt(incumbent.iter().rev())
    }

    fn visit(&mut self, score: f64) {
        let t = self.path.len() - 1;
        if t + 1 == self.fields.len() {
            let better = match &self.best {
                None => true,
                Some((b, bp, _)) => score > *b || (score == *b && Self::reversed_less(&self.path, bp)),
            };
            if better {
                self.best = Some((score, self.path.clone(), self.prefix.clone()));
            }
            return;
        }
        let u = self.path[t];
        let q = &self.fields[t + 1];
        let (h, w) = (q.height(), q.width());
        for r in u.row.saturating_sub(self.j)..=(u.row + self.j).min(h - 1) {
            for c in u.col.saturating_sub(self.j)..=(u.col + self.j).min(w - 1) {
                let v = PixelPos::new(r, c);
                let s = (score - self.kernel.between(u, v)) + q[v];
                self.path.push(v);
                self.prefix.push(s);
                self.visit(s);
                self.path.pop();
                self.prefix.pop();
            }
        }
    }
}

/// Enumerates every path with steps of at most `j` per coordinate and
/// returns the one maximizing `sum q - sum tau`. Among equal scores the path
/// that is smallest when compared from the last frame backwards, position by
/// position in row-major order, wins.
///
/// Scores accumulate frame by frame as `(s - tau) + q`.
pub fn brute_force_best_path(fields: &[ScoreField], kernel: &PenaltyKernel, j: usize) -> Result<TrackPath> {
    let first = fields.first().ok_or(Error::NoFrames)?;
    for (t, f) in fields.iter().enumerate().skip(1) {
        first.ensure_same_dims(f, format!("score field {t}"))?;
    }
    if j > kernel.radius() {
        return Err(Error::Config(format!(
            "window radius {j} exceeds kernel radius {}",
            kernel.radius()
        )));
    }
    let (w, h) = first.dims();
    match count_constrained_paths(w, h, fields.len(), j, ORACLE_PATH_LIMIT) {
        Some(_) => {}
        None => {
            let bound = (w as u128 * h as u128).saturating_pow(fields.len() as u32);
            return Err(Error::InstanceTooLarge {
                paths: bound,
                limit: ORACLE_PATH_LIMIT,
            });
        }
    }

    let mut search = Search {
        fields,
        kernel,
        j,
        path: Vec::with_capacity(fields.len()),
        prefix: Vec::with_capacity(fields.len()),
        best: None,
    };
    for i in 0..first.len() {
        let u = first.pos_of(i);
        let s = first[u];
        search.path.push(u);
        search.prefix.push(s);
        search.visit(s);
        search.path.pop();
        search.prefix.pop();
    }
    let (total_score, positions, scores) = search.best.expect("at least one path");
    Ok(TrackPath {
        positions,
        scores,
        total_score,
    })
}
