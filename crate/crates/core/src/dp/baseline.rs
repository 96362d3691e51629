use super::TrackPath;
use crate::frame::{FrameSequence, PixelPos};

/// Bounding-box tracker: for each consecutive pair, the center of the box
/// around all pixels whose absolute difference exceeds `diff_threshold`.
///
/// There is no temporal model. A pair without changes repeats the previous
/// position (or the frame center if nothing has moved yet), and frame 0
/// reuses frame 1's position. Per-frame scores are changed-pixel counts.
pub fn baseline_bbox_track(seq: &FrameSequence, diff_threshold: u8) -> TrackPath {
    let (w, h) = (seq.width(), seq.height());
    let mut centers: Vec<Option<PixelPos>> = Vec::with_capacity(seq.len());
    let mut counts = Vec::with_capacity(seq.len());
    for pair in seq.frames().windows(2) {
        let (mut r0, mut c0, mut r1, mut c1) = (usize::MAX, usize::MAX, 0, 0);
        let mut changed = 0usize;
        for (i, (&a, &b)) in pair[0].data().iter().zip(pair[1].data()).enumerate() {
            if a.abs_diff(b) > diff_threshold {
                let (r, c) = (i / w, i % w);
                r0 = r0.min(r);
                r1 = r1.max(r);
                c0 = c0.min(c);
                c1 = c1.max(c);
                changed += 1;
            }
        }
        centers.push((changed > 0).then(|| PixelPos::new((r0 + r1) / 2, (c0 + c1) / 2)));
        counts.push(changed as f64);
    }

    let fallback = centers
        .iter()
        .flatten()
        .next()
        .copied()
        .unwrap_or(PixelPos::new(h / 2, w / 2));
    let mut positions = Vec::with_capacity(seq.len());
    let mut last = fallback;
    for c in centers {
        last = c.unwrap_or(last);
        positions.push(last);
    }
    positions.insert(0, positions[0]);
    counts.insert(0, counts[0]);

    TrackPath {
        total_score: counts.iter().sum(),
        scores: counts,
        positions,
    }
}
