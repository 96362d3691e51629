//! Triangular gray-level replication function.
//!
//! Maps an intensity to a membership degree in `[0, 1]`: zero up to `left`,
//! rising linearly to one at `peak`, falling linearly back to zero at `right`
//! and zero beyond. Placing the peak on the target's gray level makes that
//! band dominate the difference images.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{GrayFrame, Grid};

/// Grid of membership degrees, every value in `[0, 1]`.
pub type ReplicatedFrame = Grid<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawBreakpoints", into = "RawBreakpoints")]
pub struct ReplicationFunction {
    left: u8,
    peak: u8,
    right: u8,
}

#[derive(Serialize, Deserialize)]
struct RawBreakpoints {
    left: u8,
    peak: u8,
    right: u8,
}

impl TryFrom<RawBreakpoints> for ReplicationFunction {
    type Error = Error;

    fn try_from(raw: RawBreakpoints) -> Result<Self> {
        Self::new(raw.left, raw.peak, raw.right)
    }
}

impl From<ReplicationFunction> for RawBreakpoints {
    fn from(rf: ReplicationFunction) -> Self {
        Self {
            left: rf.left,
            peak: rf.peak,
            right: rf.right,
        }
    }
}

impl Default for ReplicationFunction {
    /// `(0, 170, 255)`: a mid-bright peak.
    fn default() -> Self {
        Self {
            left: 0,
            peak: 170,
            right: 255,
        }
    }
}

impl ReplicationFunction {
    pub fn new(left: u8, peak: u8, right: u8) -> Result<Self> {
        if left < peak && peak < right {
            Ok(Self { left, peak, right })
        } else {
            Err(Error::Breakpoints { left, peak, right })
        }
    }

    pub fn left(&self) -> u8 {
        self.left
    }

    pub fn peak(&self) -> u8 {
        self.peak
    }

    pub fn right(&self) -> u8 {
        self.right
    }

    pub fn evaluate(&self, g: u8) -> f64 {
        if g <= self.left || g >= self.right {
            0.0
        } else if g == self.peak {
            1.0
        } else if g < self.peak {
            f64::from(g - self.left) / f64::from(self.peak - self.left)
        } else {
            f64::from(self.right - g) / f64::from(self.right - self.peak)
        }
    }

    pub fn lookup_table(&self) -> [f64; 256] {
        std::array::from_fn(|g| self.evaluate(g as u8))
    }

    pub fn apply(&self, frame: &GrayFrame) -> ReplicatedFrame {
        let lut = self.lookup_table();
        frame.map(|&g| lut[g as usize])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::PixelPos;
    use proptest::prelude::*;

    fn rf(l: u8, p: u8, r: u8) -> ReplicationFunction {
        ReplicationFunction::new(l, p, r).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(rf(0, 128, 255).evaluate(128), 1.0);
        assert_eq!(rf(0, 128, 255).evaluate(0), 0.0);
        assert_eq!(rf(0, 100, 200).evaluate(50), 0.5);
        assert_eq!(rf(0, 100, 200).evaluate(150), 0.5);
        assert_eq!(rf(0, 100, 200).evaluate(220), 0.0);
        assert_eq!(rf(0, 100, 200).evaluate(200), 0.0);
    }

    #[test]
    fn rejects_unordered_breakpoints() {
        assert!(ReplicationFunction::new(10, 10, 20).is_err());
        assert!(ReplicationFunction::new(30, 20, 40).is_err());
        assert!(ReplicationFunction::new(0, 255, 255).is_err());
    }

    #[test]
    fn apply_examples() {
        let f = rf(0, 100, 200);
        let uniform_peak = GrayFrame::filled(4, 3, 100);
        assert!(f.apply(&uniform_peak).data().iter().all(|&v| v == 1.0));
        let uniform_left = GrayFrame::filled(4, 3, 0);
        assert!(f.apply(&uniform_left).data().iter().all(|&v| v == 0.0));
        let two = GrayFrame::from_vec(2, 1, vec![100, 0]).unwrap();
        assert_eq!(f.apply(&two).data(), &[1.0, 0.0]);
    }

    #[test]
    fn config_deserialization_validates() {
        let ok: ReplicationFunction =
            serde_json::from_str(r#"{"left":0,"peak":170,"right":255}"#).unwrap();
        assert_eq!(ok, ReplicationFunction::default());
        assert!(
            serde_json::from_str::<ReplicationFunction>(r#"{"left":9,"peak":3,"right":255}"#)
                .is_err()
        );
    }

    fn breakpoints() -> impl Strategy<Value = ReplicationFunction> {
        (0u8..=253, 1u8..=254, 2u8..=255).prop_filter_map("ordered", |(a, b, c)| {
            let mut v = [a, b, c];
            v.sort();
            ReplicationFunction::new(v[0], v[1], v[2]).ok()
        })
    }

    proptest! {
        #[test]
        fn range_and_unimodality(f in breakpoints()) {
            let lut = f.lookup_table();
            prop_assert!(lut.iter().all(|&v| (0.0..=1.0).contains(&v)));
            for g in 1..=f.peak() as usize {
                prop_assert!(lut[g] >= lut[g - 1]);
            }
            for g in f.peak() as usize + 1..256 {
                prop_assert!(lut[g] <= lut[g - 1]);
            }
            prop_assert_eq!(lut[f.peak() as usize], 1.0);
            prop_assert_eq!(lut[f.left() as usize], 0.0);
            prop_assert_eq!(lut[f.right() as usize], 0.0);
        }

        #[test]
        fn apply_commutes_with_crop(
            f in breakpoints(),
            data in proptest::collection::vec(any::<u8>(), 6 * 5),
            r0 in 0usize..5, c0 in 0usize..6,
        ) {
            let frame = GrayFrame::from_vec(6, 5, data).unwrap();
            let (h, w) = (5 - r0, 6 - c0);
            let origin = PixelPos::new(r0, c0);
            prop_assert_eq!(
                f.apply(&frame).crop(origin, w, h),
                f.apply(&frame.crop(origin, w, h))
            );
        }
    }
}
