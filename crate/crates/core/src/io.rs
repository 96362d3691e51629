//! Loading and saving frames, sequences and annotation CSVs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{FrameSequence, GrayFrame, GroundTruth, PixelPos};

const FRAME_EXTENSIONS: [&str; 2] = ["pgm", "png"];

fn is_frame_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| FRAME_EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

/// Lists the `.pgm`/`.png` files of `dir` in lexicographic filename order.
pub fn list_frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let io_err = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.is_file() && is_frame_file(&path) {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Integer ITU-R BT.601 luma, rounded.
fn luma601(r: u8, g: u8, b: u8) -> u8 {
    let y = 299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b);
    ((y + 500) / 1000) as u8
}

/// Reads one image file as an 8-bit gray frame. Color images go through
/// BT.601 luma.
pub fn load_frame(path: &Path) -> Result<GrayFrame> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = if img.color().has_color() {
        img.to_rgb8()
            .pixels()
            .map(|p| luma601(p[0], p[1], p[2]))
            .collect()
    } else {
        match img {
            DynamicImage::ImageLuma8(buf) => buf.into_raw(),
            other => other.to_luma8().into_raw(),
        }
    };
    GrayFrame::from_vec(w, h, data)
}

/// Loads every frame file of `dir` in filename order.
pub fn load_sequence(dir: &Path) -> Result<FrameSequence> {
    let files = list_frame_files(dir)?;
    if files.is_empty() {
        return Err(Error::EmptyInput(dir.to_path_buf()));
    }
    let mut frames: Vec<GrayFrame> = Vec::with_capacity(files.len());
    for path in &files {
        let frame = load_frame(path)?;
        if let Some(first) = frames.first() {
            first.ensure_same_dims(&frame, path.display().to_string())?;
        }
        frames.push(frame);
    }
    FrameSequence::new(frames)
}

/// Writes `frame` as binary PGM (P5) or PNG depending on the extension.
pub fn save_frame(frame: &GrayFrame, path: &Path) -> Result<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let (w, h) = (frame.width() as u32, frame.height() as u32);
    let image_err = |source| Error::Image {
        path: path.to_path_buf(),
        source,
    };
    match ext.as_deref() {
        Some("pgm") => {
            let file = fs::File::create(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            PnmEncoder::new(std::io::BufWriter::new(file))
                .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
                .write_image(frame.data(), w, h, ExtendedColorType::L8)
                .map_err(image_err)
        }
        Some("png") => image::save_buffer(path, frame.data(), w, h, ExtendedColorType::L8)
            .map_err(image_err),
        _ => Err(Error::Parse {
            path: path.to_path_buf(),
            message: "frame files must end in .pgm or .png".into(),
        }),
    }
}

/// Writes frames as `frame_0000.pgm`, `frame_0001.pgm`, ... into `dir`.
pub fn save_sequence(frames: &[GrayFrame], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let path = dir.join(format!("frame_{i:04}.pgm"));
            save_frame(f, &path).map(|_| path)
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct AnnotationRow {
    frame: usize,
    row: usize,
    col: usize,
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: err.to_string(),
    }
}

/// Reads a `frame,row,col` CSV with exactly `frames` rows covering frames
/// `0..frames`. Lines starting with `#` are ignored.
pub fn load_ground_truth(path: &Path, frames: usize) -> Result<GroundTruth> {
    read_annotations(path, Some(frames))
}

/// Reads any `frame,row,col[,...]` CSV whose frame column covers `0..n`
/// exactly once, such as a tracker path file. Extra columns are ignored.
pub fn load_annotations(path: &Path) -> Result<GroundTruth> {
    read_annotations(path, None)
}

fn read_annotations(path: &Path, expected: Option<usize>) -> Result<GroundTruth> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    for rec in reader.deserialize::<AnnotationRow>() {
        rows.push(rec.map_err(|e| csv_error(path, e))?);
    }
    let frames = expected.unwrap_or(rows.len());
    if rows.len() != frames {
        return Err(Error::LengthMismatch {
            what: path.display().to_string(),
            expected: frames,
            got: rows.len(),
        });
    }
    let mut positions: Vec<Option<PixelPos>> = vec![None; frames];
    for r in rows {
        let slot = positions.get_mut(r.frame).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            message: format!("frame index {} out of range 0..{frames}", r.frame),
        })?;
        if slot.is_some() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!("frame {} annotated twice", r.frame),
            });
        }
        *slot = Some(PixelPos::new(r.row, r.col));
    }
    // as many rows as slots and no duplicates, so every slot is filled
    Ok(GroundTruth::new(positions.into_iter().flatten().collect()))
}

/// Writes annotations in the format read by [`load_ground_truth`].
pub fn write_ground_truth(gt: &GroundTruth, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = String::from("frame,row,col\n");
    for (i, p) in gt.positions().iter().enumerate() {
        out.push_str(&format!("{i},{},{}\n", p.row, p.col));
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(io_err)
}
