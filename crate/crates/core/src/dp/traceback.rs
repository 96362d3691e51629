use super::{BackpointerTable, ScoreTable, TrackPath};
use crate::error::Result;
use crate::frame::PixelPos;

fn follow(start: PixelPos, scores: &ScoreTable, back: &BackpointerTable) -> TrackPath {
    let t_len = scores.len();
    let mut positions = vec![start; t_len];
    for t in (1..t_len).rev() {
        positions[t - 1] = back.get(t, positions[t]);
    }
    let per_frame: Vec<f64> = positions
        .iter()
        .enumerate()
        .map(|(t, &p)| scores.get(t, p))
        .collect();
    TrackPath {
        total_score: per_frame[t_len - 1],
        scores: per_frame,
        positions,
    }
}

/// Starts at the best final cumulative score (smallest index on ties) and
/// follows the backpointers to the first frame.
pub fn traceback_argmax(scores: &ScoreTable, back: &BackpointerTable) -> TrackPath {
    let last = scores.last();
    let mut best = 0;
    for (i, &v) in last.data().iter().enumerate() {
        if v > last.data()[best] {
            best = i;
        }
    }
    follow(last.pos_of(best), scores, back)
}

/// Follows the backpointers from a given final-frame position.
pub fn traceback_seeded(
    seed: PixelPos,
    scores: &ScoreTable,
    back: &BackpointerTable,
) -> Result<TrackPath> {
    scores.last().check_bounds(seed)?;
    Ok(follow(seed, scores, back))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{forward_pass, TrackerConfig};
    use crate::error::Error;
    use crate::frame::Grid;
    use crate::scoring::ScoreField;

    fn cfg() -> TrackerConfig {
        TrackerConfig {
            radius_j: 2,
            alpha: 0.1,
            ..Default::default()
        }
    }

    #[test]
    fn single_frame_path() {
        let f = Grid::from_vec(3, 2, vec![0.1, 0.2, 0.9, 0.3, 0.9, 0.0]).unwrap();
        let (c, b) = forward_pass(&[f], &cfg()).unwrap();
        let p = traceback_argmax(&c, &b);
        assert_eq!(p.positions, vec![PixelPos::new(0, 2)]);
        let s = traceback_seeded(PixelPos::new(1, 0), &c, &b).unwrap();
        assert_eq!(s.positions, vec![PixelPos::new(1, 0)]);
        assert_eq!(s.total_score, 0.3);
    }

    #[test]
    fn zero_scores_stay_at_origin() {
        let fields = vec![ScoreField::filled(5, 4, 0.0); 4];
        let (c, b) = forward_pass(&fields, &cfg()).unwrap();
        let p = traceback_argmax(&c, &b);
        assert!(p.positions.iter().all(|&u| u == PixelPos::new(0, 0)));
    }

    #[test]
    fn seeding_at_argmax_matches_argmax_traceback() {
        let fields: Vec<ScoreField> = (0..4)
            .map(|t| Grid::from_fn(6, 5, |r, c| ((r * 31 + c * 17 + t * 7) % 11) as f64))
            .collect();
        let (c, b) = forward_pass(&fields, &cfg()).unwrap();
        let a = traceback_argmax(&c, &b);
        let s = traceback_seeded(*a.positions.last().unwrap(), &c, &b).unwrap();
        assert_eq!(a, s);
        assert!(a.max_step() <= 2);
    }

    #[test]
    fn seed_out_of_bounds() {
        let fields = vec![ScoreField::filled(5, 4, 0.0); 2];
        let (c, b) = forward_pass(&fields, &cfg()).unwrap();
        assert!(matches!(
            traceback_seeded(PixelPos::new(4, 0), &c, &b),
            Err(Error::OutOfBounds { .. })
        ));
    }
}
