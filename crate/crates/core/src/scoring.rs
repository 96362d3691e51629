//! Difference images and the windowed local score.

use crate::error::Result;
use crate::frame::{FrameSequence, Grid, RealFrame};
use crate::replication::ReplicationFunction;

/// Signed per-pixel difference of two consecutive frames.
pub type DiffFrame = Grid<f64>;

/// Non-negative local score `q(t, u)` for every position of one frame.
pub type ScoreField = Grid<f64>;

/// Element-wise `curr - prev`.
pub fn diff(curr: &RealFrame, prev: &RealFrame) -> Result<DiffFrame> {
    curr.ensure_same_dims(prev, "previous frame")?;
    let data = curr
        .data()
        .iter()
        .zip(prev.data())
        .map(|(a, b)| a - b)
        .collect();
    Grid::from_vec(curr.width(), curr.height(), data)
}

/// Offsets `(before, after)` of a detecting window of side `area` around its
/// anchor. Odd sides are centered; even sides put the extra cell before the
/// anchor, so a 20-wide window spans `[u - 10, u + 9]`.
pub fn window_extent(area: usize) -> (usize, usize) {
    let before = area / 2;
    (before, area - 1 - before)
}

/// Sum of `values[i]` over the clipped window `[i - before, i + after]`,
/// accumulated in increasing index order.
fn window_sums_1d(values: &[f64], before: usize, after: usize, out: &mut [f64]) {
    let n = values.len();
    for (i, o) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(before);
        let hi = (i + after).min(n - 1);
        *o = values[lo..=hi].iter().sum();
    }
}

/// For each position `u`, the sum of `|d|` over the `area × area` detecting
/// window anchored at `u`; cells outside the frame contribute nothing.
///
/// Panics if `area` is zero.
pub fn local_score_field(d: &DiffFrame, area: usize) -> ScoreField {
    assert!(area >= 1, "detecting area must be at least 1");
    let (w, h) = d.dims();
    let (before, after) = window_extent(area);

    let abs: Vec<f64> = d.data().iter().map(|v| v.abs()).collect();
    let mut horizontal = vec![0.0; w * h];
    for (row_in, row_out) in abs.chunks_exact(w).zip(horizontal.chunks_exact_mut(w)) {
        window_sums_1d(row_in, before, after, row_out);
    }

    let mut out = vec![0.0; w * h];
    let mut column = vec![0.0; h];
    let mut column_out = vec![0.0; h];
    for c in 0..w {
        for r in 0..h {
            column[r] = horizontal[r * w + c];
        }
        window_sums_1d(&column, before, after, &mut column_out);
        for r in 0..h {
            out[r * w + c] = column_out[r];
        }
    }
    Grid::from_vec(w, h, out).expect("dimensions preserved")
}

/// Local score fields for the transitions `t = 2..=T`, built from frames `t`
/// and `t - 1`. With `rf`, frames are replicated before differencing.
pub fn motion_scores(
    seq: &FrameSequence,
    rf: Option<&ReplicationFunction>,
    area: usize,
) -> Result<Vec<ScoreField>> {
    let values: Vec<RealFrame> = match rf {
        Some(rf) => seq.frames().iter().map(|f| rf.apply(f)).collect(),
        None => seq.frames().iter().map(|f| f.to_real()).collect(),
    };
    values
        .windows(2)
        .map(|pair| Ok(local_score_field(&diff(&pair[1], &pair[0])?, area)))
        .collect()
}

/// Expands the `T - 1` transition fields into one field per frame. The first
/// frame has no incoming difference, so it reuses the first transition.
pub fn per_frame_scores(mut transitions: Vec<ScoreField>) -> Vec<ScoreField> {
    if let Some(first) = transitions.first().cloned() {
        transitions.insert(0, first);
    }
    transitions
}
