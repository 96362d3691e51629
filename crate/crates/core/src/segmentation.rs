//! Otsu thresholding, person/skin segmentation and seed-pixel selection in
//! the last frame.

use std::collections::VecDeque;

use log::warn;

use crate::error::{Error, Result};
use crate::frame::{GrayFrame, Grid, PixelPos};

pub type BinaryMask = Grid<bool>;

pub type Histogram = [u64; 256];

/// Threshold `level` splits intensities into `g < level` and `g >= level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OtsuThreshold {
    pub level: u8,
    /// All mass sat in a single bin; `level` is that bin.
    pub degenerate: bool,
}

pub fn histogram(frame: &GrayFrame) -> Histogram {
    let mut h = [0u64; 256];
    for &g in frame.data() {
        h[g as usize] += 1;
    }
    h
}

pub fn masked_histogram(frame: &GrayFrame, mask: &BinaryMask) -> Histogram {
    let mut h = [0u64; 256];
    for (&g, &m) in frame.data().iter().zip(mask.data()) {
        if m {
            h[g as usize] += 1;
        }
    }
    h
}

/// Level maximizing the between-class variance, which is the same as
/// minimizing the weighted within-class variance. Ties go to the smallest
/// level.
pub fn otsu_threshold(hist: &Histogram) -> Result<OtsuThreshold> {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let mut nonzero = hist.iter().enumerate().filter(|(_, &n)| n > 0);
    let first_bin = nonzero.next().map(|(g, _)| g).unwrap();
    if nonzero.next().is_none() {
        return Ok(OtsuThreshold {
            level: first_bin as u8,
            degenerate: true,
        });
    }

    let n = total as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(g, &c)| g as f64 * c as f64).sum();
    let mut n0 = 0.0;
    let mut s0 = 0.0;
    let mut best = (0u8, f64::NEG_INFINITY);
    for t in 0..256usize {
        if t > 0 {
            let c = hist[t - 1] as f64;
            n0 += c;
            s0 += (t - 1) as f64 * c;
        }
        let n1 = n - n0;
        let between = if n0 == 0.0 || n1 == 0.0 {
            0.0
        } else {
            let m0 = s0 / n0;
            let m1 = (sum_all - s0) / n1;
            (n0 / n) * (n1 / n) * (m0 - m1) * (m0 - m1)
        };
        if between > best.1 {
            best = (t as u8, between);
        }
    }
    Ok(OtsuThreshold {
        level: best.0,
        degenerate: false,
    })
}

#[derive(Clone, Debug)]
pub struct PersonSegmentation {
    pub mask: BinaryMask,
    /// Input frame with everything outside `mask` set to zero.
    pub masked: GrayFrame,
    pub threshold: OtsuThreshold,
}

/// First Otsu pass: separates the person from the background. The brighter
/// class is foreground unless `invert` is set. A single-level frame yields a
/// full mask.
pub fn segment_person(frame: &GrayFrame, invert: bool) -> PersonSegmentation {
    let threshold = otsu_threshold(&histogram(frame)).expect("frames are never empty");
    let mask = if threshold.degenerate {
        warn!(
            "person segmentation: single gray level {}, using the whole frame",
            threshold.level
        );
        BinaryMask::filled(frame.width(), frame.height(), true)
    } else {
        frame.map(|&g| (g >= threshold.level) != invert)
    };
    let masked_data = frame
        .data()
        .iter()
        .zip(mask.data())
        .map(|(&g, &m)| if m { g } else { 0 })
        .collect();
    PersonSegmentation {
        masked: GrayFrame::from_vec(frame.width(), frame.height(), masked_data).expect("dims"),
        mask,
        threshold,
    }
}

/// Second Otsu pass over the in-person pixels only: skin is the brighter
/// class. A single-level person region is returned whole; an empty one gives
/// an empty mask.
pub fn segment_skin(masked: &GrayFrame, person_mask: &BinaryMask) -> BinaryMask {
    let hist = masked_histogram(masked, person_mask);
    let threshold = match otsu_threshold(&hist) {
        Err(_) => return BinaryMask::filled(masked.width(), masked.height(), false),
        Ok(t) => t,
    };
    if threshold.degenerate {
        warn!(
            "skin segmentation: person region has single gray level {}, using all of it",
            threshold.level
        );
        return person_mask.clone();
    }
    let data = masked
        .data()
        .iter()
        .zip(person_mask.data())
        .map(|(&g, &m)| m && g >= threshold.level)
        .collect();
    BinaryMask::from_vec(masked.width(), masked.height(), data).expect("dims")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    /// Member pixels in row-major order.
    pub pixels: Vec<PixelPos>,
    /// Inclusive `(top_left, bottom_right)`.
    pub bbox: (PixelPos, PixelPos),
    /// Mean position rounded to the nearest pixel.
    pub centroid: PixelPos,
    pub area: usize,
}

impl Component {
    fn from_pixels(mut pixels: Vec<PixelPos>) -> Self {
        pixels.sort();
        let area = pixels.len();
        let (mut tl, mut br) = (pixels[0], pixels[0]);
        let (mut sr, mut sc) = (0.0, 0.0);
        for p in &pixels {
            tl.row = tl.row.min(p.row);
            tl.col = tl.col.min(p.col);
            br.row = br.row.max(p.row);
            br.col = br.col.max(p.col);
            sr += p.row as f64;
            sc += p.col as f64;
        }
        let centroid = PixelPos::new(
            (sr / area as f64).round() as usize,
            (sc / area as f64).round() as usize,
        );
        Self {
            pixels,
            bbox: (tl, br),
            centroid,
            area,
        }
    }

    /// Member pixel closest to the centroid, smallest index on ties.
    pub fn snapped_centroid(&self) -> PixelPos {
        let mut best = self.pixels[0];
        let mut best_d = f64::INFINITY;
        for p in &self.pixels {
            let d = p.distance(&self.centroid);
            if d < best_d {
                best = *p;
                best_d = d;
            }
        }
        best
    }
}

/// 8-connected components, largest first; equal areas keep scan order.
pub fn connected_components(mask: &BinaryMask) -> Vec<Component> {
    let (w, h) = mask.dims();
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask.data()[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut pixels = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (r, c) = (i / w, i % w);
            pixels.push(PixelPos::new(r, c));
            for nr in r.saturating_sub(1)..=(r + 1).min(h - 1) {
                for nc in c.saturating_sub(1)..=(c + 1).min(w - 1) {
                    let j = nr * w + nc;
                    if mask.data()[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        out.push(Component::from_pixels(pixels));
    }
    out.sort_by_key(|c| std::cmp::Reverse(c.area));
    out
}

/// Picks the bottom-left-most component (largest `row - col` of its
/// centroid) among those of at least `min_area` pixels and returns its
/// centroid snapped into the component.
pub fn select_right_hand_seed(components: &[Component], min_area: usize) -> Result<PixelPos> {
    let key = |c: &Component| c.centroid.row as i64 - c.centroid.col as i64;
    let mut best: Option<&Component> = None;
    for c in components.iter().filter(|c| c.area >= min_area) {
        if best.is_none_or(|b| key(c) > key(b)) {
            best = Some(c);
        }
    }
    best.map(Component::snapped_centroid)
        .ok_or(Error::NoSeedComponent { min_area })
}

/// Parameters of the last-frame seed search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedParams {
    pub min_area: usize,
    pub invert_person: bool,
}

impl Default for SeedParams {
    fn default() -> Self {
        Self {
            min_area: 25,
            invert_person: false,
        }
    }
}

/// Person segmentation, skin segmentation, components and the bottom-left
/// rule, in that order.
pub fn find_seed(frame: &GrayFrame, params: SeedParams) -> Result<PixelPos> {
    let person = segment_person(frame, params.invert_person);
    let skin = segment_skin(&person.masked, &person.mask);
    select_right_hand_seed(&connected_components(&skin), params.min_area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive minimization of the weighted within-class variance,
    /// computed from scratch for every level.
    fn brute_otsu(hist: &Histogram) -> u8 {
        let n: u64 = hist.iter().sum();
        let class_var = |range: std::ops::Range<usize>| {
            let cnt: u64 = hist[range.clone()].iter().sum();
            if cnt == 0 {
                return 0.0;
            }
            let mean = range.clone().map(|g| g as f64 * hist[g] as f64).sum::<f64>() / cnt as f64;
            range.map(|g| hist[g] as f64 * (g as f64 - mean).powi(2)).sum::<f64>()
        };
        let mut best = (0u8, f64::INFINITY);
        for t in 0..256 {
            let v = (class_var(0..t) + class_var(t..256)) / n as f64;
            if v < best.1 {
                best = (t as u8, v);
            }
        }
        best.0
    }

    #[test]
    fn two_spikes_split_at_first_separating_level() {
        let mut h = [0u64; 256];
        h[0] = 40;
        h[255] = 7;
        assert_eq!(
            otsu_threshold(&h).unwrap(),
            OtsuThreshold {
                level: 1,
                degenerate: false
            }
        );
        assert_eq!(brute_otsu(&h), 1);
    }

    #[test]
    fn single_bin_is_degenerate() {
        let mut h = [0u64; 256];
        h[7] = 12;
        assert_eq!(
            otsu_threshold(&h).unwrap(),
            OtsuThreshold {
                level: 7,
                degenerate: true
            }
        );
        assert!(matches!(otsu_threshold(&[0; 256]), Err(Error::EmptyHistogram)));
    }

    proptest! {
        #[test]
        fn otsu_matches_exhaustive(hist in proptest::collection::vec(0u64..50, 256)) {
            let h: Histogram = hist.try_into().unwrap();
            prop_assume!(h.iter().filter(|&&c| c > 0).count() >= 2);
            prop_assert_eq!(otsu_threshold(&h).unwrap().level, brute_otsu(&h));
        }

        #[test]
        fn components_partition_the_mask(bits in proptest::collection::vec(any::<bool>(), 9 * 7)) {
            let mask = BinaryMask::from_vec(9, 7, bits).unwrap();
            let comps = connected_components(&mask);
            let mut covered = BinaryMask::filled(9, 7, false);
            for c in &comps {
                prop_assert_eq!(c.area, c.pixels.len());
                for &p in &c.pixels {
                    prop_assert!(mask[p]);
                    prop_assert!(!covered[p]);
                    covered[p] = true;
                }
            }
            prop_assert_eq!(covered, mask);
            prop_assert!(comps.windows(2).all(|w| w[0].area >= w[1].area));
        }

        #[test]
        fn skin_is_inside_person(data in proptest::collection::vec(any::<u8>(), 10 * 8)) {
            let frame = GrayFrame::from_vec(10, 8, data).unwrap();
            let person = segment_person(&frame, false);
            let skin = segment_skin(&person.masked, &person.mask);
            for (s, p) in skin.data().iter().zip(person.mask.data()) {
                prop_assert!(!s || *p);
            }
        }
    }

    fn two_level(w: usize, h: usize, region: impl Fn(usize, usize) -> bool, lo: u8, hi: u8) -> GrayFrame {
        GrayFrame::from_fn(w, h, |r, c| if region(r, c) { hi } else { lo })
    }

    #[test]
    fn person_is_bright_region() {
        let inside = |r: usize, c: usize| (3..9).contains(&r) && (2..6).contains(&c);
        let frame = two_level(12, 10, inside, 20, 200);
        let seg = segment_person(&frame, false);
        assert_eq!(seg.threshold.level, 21);
        assert_eq!(seg.mask, Grid::from_fn(12, 10, inside));
        assert_eq!(seg.masked, frame.map(|&g| if g == 200 { 200 } else { 0 }));

        let inverted = segment_person(&frame, true);
        assert_eq!(inverted.mask, Grid::from_fn(12, 10, |r, c| !inside(r, c)));
    }

    #[test]
    fn binary_frame_person_is_bright_class() {
        let frame = two_level(5, 5, |r, c| r == c, 0, 255);
        assert_eq!(segment_person(&frame, false).mask, Grid::from_fn(5, 5, |r, c| r == c));
    }

    #[test]
    fn uniform_frame_is_whole_person() {
        let seg = segment_person(&GrayFrame::filled(6, 4, 90), false);
        assert!(seg.threshold.degenerate);
        assert!(seg.mask.data().iter().all(|&m| m));
    }

    #[test]
    fn skin_is_bright_part_of_person() {
        let person = Grid::from_fn(10, 10, |r, _| r >= 2);
        let skin_region = |r: usize, c: usize| r >= 6 && c < 4;
        let frame = GrayFrame::from_fn(10, 10, |r, c| {
            if !person[(r, c)] {
                0
            } else if skin_region(r, c) {
                220
            } else {
                100
            }
        });
        let skin = segment_skin(&frame, &person);
        assert_eq!(skin, Grid::from_fn(10, 10, skin_region));
    }

    #[test]
    fn skin_degenerate_and_empty_cases() {
        let person = Grid::from_fn(6, 6, |r, c| r > 1 && c > 1);
        let uniform = GrayFrame::from_fn(6, 6, |r, c| if person[(r, c)] { 150 } else { 0 });
        assert_eq!(segment_skin(&uniform, &person), person);

        let empty = BinaryMask::filled(6, 6, false);
        assert_eq!(segment_skin(&uniform, &empty), empty);
    }

    fn square(mask: &mut BinaryMask, r: usize, c: usize, side: usize) {
        for rr in r..r + side {
            for cc in c..c + side {
                mask[(rr, cc)] = true;
            }
        }
    }

    #[test]
    fn component_examples() {
        assert!(connected_components(&BinaryMask::filled(4, 4, false)).is_empty());

        let mut two = BinaryMask::filled(10, 10, false);
        square(&mut two, 0, 0, 3);
        square(&mut two, 5, 5, 3);
        let comps = connected_components(&two);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.area == 9));
        assert_eq!(comps[1].centroid, PixelPos::new(6, 6));
        assert_eq!(comps[1].bbox, (PixelPos::new(5, 5), PixelPos::new(7, 7)));

        let mut one = BinaryMask::filled(4, 4, false);
        one[(2, 3)] = true;
        let comps = connected_components(&one);
        assert_eq!(comps.len(), 1);
        assert_eq!((comps[0].area, comps[0].centroid), (1, PixelPos::new(2, 3)));
    }

    #[test]
    fn diagonal_pixels_are_connected() {
        let mask = Grid::from_fn(4, 4, |r, c| r == c);
        assert_eq!(connected_components(&mask).len(), 1);
    }

    fn component_at(center: PixelPos) -> Component {
        let mut pixels = vec![];
        for r in center.row - 3..=center.row + 3 {
            for c in center.col - 3..=center.col + 3 {
                pixels.push(PixelPos::new(r, c));
            }
        }
        Component::from_pixels(pixels)
    }

    #[test]
    fn seed_prefers_bottom_left() {
        let comps = vec![
            component_at(PixelPos::new(10, 50)),
            component_at(PixelPos::new(40, 45)),
            component_at(PixelPos::new(42, 8)),
        ];
        assert_eq!(select_right_hand_seed(&comps, 25).unwrap(), PixelPos::new(42, 8));
        assert_eq!(
            select_right_hand_seed(&comps[..1], 25).unwrap(),
            PixelPos::new(10, 50)
        );
        assert!(matches!(
            select_right_hand_seed(&[], 25),
            Err(Error::NoSeedComponent { .. })
        ));
        assert!(select_right_hand_seed(&comps, 50).is_err());
    }

    #[test]
    fn seed_snaps_into_ring() {
        // centroid of a ring falls in its hole
        let mut pixels = vec![];
        for r in 0..9usize {
            for c in 0..9usize {
                if r == 0 || r == 8 || c == 0 || c == 8 {
                    pixels.push(PixelPos::new(r + 10, c + 10));
                }
            }
        }
        let ring = Component::from_pixels(pixels);
        assert_eq!(ring.centroid, PixelPos::new(14, 14));
        let seed = select_right_hand_seed(std::slice::from_ref(&ring), 25).unwrap();
        assert!(ring.pixels.contains(&seed));
        assert_eq!(seed, PixelPos::new(10, 14));
    }

    #[test]
    fn seed_lies_in_skin_of_synthetic_frame() {
        // background 20, torso 100, face 220 top right, hand 220 bottom left
        let frame = GrayFrame::from_fn(60, 50, |r, c| {
            let face = (5..15).contains(&r) && (35..45).contains(&c);
            let hand = (38..46).contains(&r) && (5..13).contains(&c);
            let torso = (15..50).contains(&r) && (15..45).contains(&c);
            if face || hand {
                220
            } else if torso {
                100
            } else {
                20
            }
        });
        let seed = find_seed(&frame, SeedParams::default()).unwrap();
        let person = segment_person(&frame, false);
        let skin = segment_skin(&person.masked, &person.mask);
        assert!(skin[seed]);
        assert_eq!(seed, PixelPos::new(42, 9));
    }
}
