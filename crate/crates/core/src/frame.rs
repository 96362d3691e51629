//! Frame and sequence data model.
//!
//! All grids are row-major with the origin at the top-left corner; positions
//! are `(row, col)`.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A pixel position, `row` counted downwards and `col` to the right.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelPos {
    pub row: usize,
    pub col: usize,
}

impl PixelPos {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// Euclidean distance in pixels.
    pub fn distance(&self, other: &PixelPos) -> f64 {
        let dr = self.row as f64 - other.row as f64;
        let dc = self.col as f64 - other.col as f64;
        dr.hypot(dc)
    }

    /// Chebyshev step size, i.e. the larger of the row and column offsets.
    pub fn max_step(&self, other: &PixelPos) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }
}

impl fmt::Display for PixelPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Parses `"row,col"`.
impl FromStr for PixelPos {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (r, c) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `row,col`, got `{s}`"))?;
        let row = r
            .trim()
            .parse()
            .map_err(|e| format!("bad row `{}`: {e}", r.trim()))?;
        let col = c
            .trim()
            .parse()
            .map_err(|e| format!("bad column `{}`: {e}", c.trim()))?;
        Ok(Self { row, col })
    }
}

/// Dense 2-D grid of cells, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

pub type GrayFrame = Grid<u8>;
pub type RealFrame = Grid<f64>;

impl<T> Grid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyGrid { width, height });
        }
        if data.len() != width * height {
            return Err(Error::GridData {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds a grid by evaluating `f(row, col)` at every cell.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be non-zero");
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn contains(&self, pos: PixelPos) -> bool {
        pos.row < self.height && pos.col < self.width
    }

    pub fn check_bounds(&self, pos: PixelPos) -> Result<()> {
        if self.contains(pos) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                pos,
                width: self.width,
                height: self.height,
            })
        }
    }

    pub fn linear_index(&self, pos: PixelPos) -> usize {
        pos.row * self.width + pos.col
    }

    pub fn pos_of(&self, index: usize) -> PixelPos {
        PixelPos::new(index / self.width, index % self.width)
    }

    pub fn get(&self, pos: PixelPos) -> Option<&T> {
        self.contains(pos).then(|| &self.data[self.linear_index(pos)])
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, T> {
        self.data.chunks_exact(self.width)
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Fails with [`Error::DimensionMismatch`] unless `other` has the same size.
    pub fn ensure_same_dims<U>(&self, other: &Grid<U>, what: impl Into<String>) -> Result<()> {
        if self.dims() == other.dims() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                what: what.into(),
                want_w: self.width,
                want_h: self.height,
                got_w: other.width,
                got_h: other.height,
            })
        }
    }
}

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self::from_fn(width, height, |_, _| value.clone())
    }

    /// Copies the `height × width` block whose top-left corner is `origin`.
    /// Panics if the block does not fit.
    pub fn crop(&self, origin: PixelPos, width: usize, height: usize) -> Self {
        assert!(
            origin.row + height <= self.height && origin.col + width <= self.width,
            "crop exceeds grid"
        );
        Self::from_fn(width, height, |r, c| {
            self[(origin.row + r, origin.col + c)].clone()
        })
    }
}

impl<T> Index<PixelPos> for Grid<T> {
    type Output = T;

    fn index(&self, pos: PixelPos) -> &T {
        debug_assert!(self.contains(pos));
        &self.data[pos.row * self.width + pos.col]
    }
}

impl<T> IndexMut<PixelPos> for Grid<T> {
    fn index_mut(&mut self, pos: PixelPos) -> &mut T {
        debug_assert!(self.contains(pos));
        &mut self.data[pos.row * self.width + pos.col]
    }
}

impl<T> Index<(usize, usize)> for Grid<T> {
    type Output = T;

    fn index(&self, (row, col): (usize, usize)) -> &T {
        &self.data[row * self.width + col]
    }
}

impl<T> IndexMut<(usize, usize)> for Grid<T> {
    fn index_mut(&mut self, (row, col): (usize, usize)) -> &mut T {
        &mut self.data[row * self.width + col]
    }
}

impl GrayFrame {
    pub fn to_real(&self) -> RealFrame {
        self.map(|&v| f64::from(v))
    }
}

/// An ordered list of equally sized frames, at least two long.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSequence {
    frames: Vec<GrayFrame>,
}

impl FrameSequence {
    pub fn new(frames: Vec<GrayFrame>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::TooFewFrames(frames.len()));
        }
        let first = &frames[0];
        for (i, f) in frames.iter().enumerate().skip(1) {
            first.ensure_same_dims(f, format!("frame {i}"))?;
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[GrayFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn last(&self) -> &GrayFrame {
        &self.frames[self.frames.len() - 1]
    }

    pub fn into_frames(self) -> Vec<GrayFrame> {
        self.frames
    }
}

/// Annotated target position for every frame of a sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruth {
    positions: Vec<PixelPos>,
}

impl GroundTruth {
    pub fn new(positions: Vec<PixelPos>) -> Self {
        Self { positions }
    }

    pub fn positions(&self) -> &[PixelPos] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Checks the annotation against the sequence it is meant to describe.
    pub fn validate_against(&self, seq: &FrameSequence) -> Result<()> {
        if self.len() != seq.len() {
            return Err(Error::LengthMismatch {
                what: "ground truth".into(),
                expected: seq.len(),
                got: self.len(),
            });
        }
        for &p in &self.positions {
            seq.frames()[0].check_bounds(p)?;
        }
        Ok(())
    }
}
