//! Dynamic-programming tracker.
//!
//! The forward pass fills a table of best cumulative scores
//! `C(t, u) = max_{u' in M(u)} { C(t-1, u') - tau(u', u) } + q(t, u)` together
//! with the arg-max backpointers. `M(u)` is the `(2J+1) × (2J+1)` window
//! around `u` and `tau` the scaled Euclidean jump penalty. Traceback then
//! follows the backpointers from the last frame. Ties are always resolved
//! towards the smallest row-major index.

mod baseline;
mod forward;
mod traceback;

pub use baseline::baseline_bbox_track;
pub use forward::{forward_pass, forward_pass_pruned, run_forward};
pub use traceback::{traceback_argmax, traceback_seeded};

use crate::error::{Error, Result};
use crate::frame::{Grid, PixelPos};
use crate::replication::ReplicationFunction;

/// Jump penalty `alpha * sqrt(di² + dj²)` for every offset within `radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyKernel {
    radius: usize,
    alpha: f64,
    values: Vec<f64>,
}

impl PenaltyKernel {
    /// Panics on a negative or NaN `alpha`.
    pub fn new(alpha: f64, radius: usize) -> Self {
        assert!(alpha >= 0.0, "penalty weight must be non-negative");
        let side = 2 * radius + 1;
        let r = radius as f64;
        let values = (0..side * side)
            .map(|i| {
                let di = (i / side) as f64 - r;
                let dj = (i % side) as f64 - r;
                alpha * (di * di + dj * dj).sqrt()
            })
            .collect();
        Self {
            radius,
            alpha,
            values,
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Side length `2n + 1`.
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Row-major values, offset `(-n, -n)` first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Penalty for a move by `(drow, dcol)`. Panics outside the radius.
    #[inline]
    pub fn at(&self, drow: isize, dcol: isize) -> f64 {
        let n = self.radius as isize;
        assert!(drow.abs() <= n && dcol.abs() <= n, "offset outside kernel");
        self.values[((drow + n) as usize) * self.side() + (dcol + n) as usize]
    }

    /// Penalty for moving from `from` to `to`.
    #[inline]
    pub fn between(&self, from: PixelPos, to: PixelPos) -> f64 {
        self.at(
            to.row as isize - from.row as isize,
            to.col as isize - from.col as isize,
        )
    }
}

/// Tracker parameters shared by the DP pipelines.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackerConfig {
    /// Predecessor window radius `J`; also the penalty kernel radius.
    pub radius_j: usize,
    /// Jump-penalty weight.
    pub alpha: f64,
    /// Side of the square detecting area summed into local scores.
    pub area: usize,
    /// Keep only this many best positions per frame as predecessors.
    pub beam: Option<usize>,
    pub rf: Option<ReplicationFunction>,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            radius_j: 10,
            alpha: 0.1,
            area: 20,
            beam: None,
            rf: None,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radius_j < 1 {
            return Err(Error::Config("dp.radius_j must be at least 1".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!(
                "dp.alpha must be finite and non-negative, got {}",
                self.alpha
            )));
        }
        if self.area < 1 {
            return Err(Error::Config("score.area must be at least 1".into()));
        }
        if self.beam == Some(0) {
            return Err(Error::Config("dp.beam must be at least 1".into()));
        }
        Ok(())
    }

    pub fn kernel(&self) -> PenaltyKernel {
        PenaltyKernel::new(self.alpha, self.radius_j)
    }
}

/// Best cumulative score `C(t, u)` for every frame. Pruned cells hold
/// `f64::NEG_INFINITY`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable {
    frames: Vec<Grid<f64>>,
}

impl ScoreTable {
    pub fn frames(&self) -> &[Grid<f64>] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Score at zero-based frame `t`.
    pub fn get(&self, t: usize, pos: PixelPos) -> f64 {
        self.frames[t][pos]
    }

    pub fn last(&self) -> &Grid<f64> {
        self.frames.last().expect("score table is never empty")
    }
}

/// Best predecessor `B(t, u)` for zero-based frames `1..T`, stored as
/// row-major indices.
#[derive(Clone, Debug, PartialEq)]
pub struct BackpointerTable {
    width: usize,
    height: usize,
    frames: Vec<Grid<u32>>,
}

impl BackpointerTable {
    /// Number of frames covered, i.e. one more than the stored transitions.
    pub fn num_frames(&self) -> usize {
        self.frames.len() + 1
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Predecessor at frame `t - 1` of `pos` at zero-based frame `t >= 1`.
    pub fn get(&self, t: usize, pos: PixelPos) -> PixelPos {
        assert!(t >= 1, "frame 0 has no predecessor");
        let idx = self.frames[t - 1][pos] as usize;
        PixelPos::new(idx / self.width, idx % self.width)
    }
}

/// A tracked position per frame.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackPath {
    pub positions: Vec<PixelPos>,
    /// Per-frame score; for DP paths this is `C(t, u_t)`.
    pub scores: Vec<f64>,
    /// Path objective `sum q - sum tau`, equal to the last cumulative score.
    pub total_score: f64,
}

impl TrackPath {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Largest per-coordinate step between consecutive frames.
    pub fn max_step(&self) -> usize {
        self.positions
            .windows(2)
            .map(|w| w[0].max_step(&w[1]))
            .max()
            .unwrap_or(0)
    }
}
