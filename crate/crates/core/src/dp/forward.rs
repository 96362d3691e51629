use rayon::prelude::*;

use super::{BackpointerTable, PenaltyKernel, ScoreTable, TrackerConfig};
use crate::error::{Error, Result};
use crate::frame::Grid;
use crate::scoring::ScoreField;

fn check_fields(fields: &[ScoreField]) -> Result<()> {
    let first = fields.first().ok_or(Error::NoFrames)?;
    for (t, f) in fields.iter().enumerate().skip(1) {
        first.ensure_same_dims(f, format!("score field {t}"))?;
    }
    Ok(())
}

/// One exact DP step. Rows are independent, so they are filled in parallel;
/// each cell's reduction order is fixed, which keeps results bit-identical
/// to a sequential run.
fn step_exact(
    prev: &Grid<f64>,
    q: &ScoreField,
    kernel: &PenaltyKernel,
) -> (Grid<f64>, Grid<u32>) {
    let (w, h) = prev.dims();
    let j = kernel.radius();
    let mut scores = vec![0.0; w * h];
    let mut back = vec![0u32; w * h];
    scores
        .par_chunks_mut(w)
        .zip(back.par_chunks_mut(w))
        .enumerate()
        .for_each(|(r, (score_row, back_row))| {
            let (r0, r1) = (r.saturating_sub(j), (r + j).min(h - 1));
            for c in 0..w {
                let (c0, c1) = (c.saturating_sub(j), (c + j).min(w - 1));
                let mut best = f64::NEG_INFINITY;
                let mut arg = usize::MAX;
                for pr in r0..=r1 {
                    let prev_row = &prev.data()[pr * w..(pr + 1) * w];
                    let dr = r as isize - pr as isize;
                    for (pc, &p) in prev_row.iter().enumerate().take(c1 + 1).skip(c0) {
                        let v = p - kernel.at(dr, c as isize - pc as isize);
                        if arg == usize::MAX || v > best {
                            best = v;
                            arg = pr * w + pc;
                        }
                    }
                }
                score_row[c] = best + q[(r, c)];
                back_row[c] = arg as u32;
            }
        });
    (
        Grid::from_vec(w, h, scores).expect("dims"),
        Grid::from_vec(w, h, back).expect("dims"),
    )
}

fn check_index_range(fields: &[ScoreField]) -> Result<()> {
    let n = fields[0].len();
    if n > u32::MAX as usize {
        return Err(Error::Config(format!(
            "frames with {n} positions exceed the backpointer index range"
        )));
    }
    Ok(())
}

/// Exact forward pass over one local score field per frame. Ignores
/// `cfg.beam`; see [`run_forward`].
pub fn forward_pass(
    fields: &[ScoreField],
    cfg: &TrackerConfig,
) -> Result<(ScoreTable, BackpointerTable)> {
    cfg.validate()?;
    check_fields(fields)?;
    check_index_range(fields)?;
    let kernel = cfg.kernel();
    let (width, height) = fields[0].dims();

    let mut scores = Vec::with_capacity(fields.len());
    let mut back = Vec::with_capacity(fields.len().saturating_sub(1));
    scores.push(fields[0].clone());
    for q in &fields[1..] {
        let (c, b) = step_exact(scores.last().unwrap(), q, &kernel);
        scores.push(c);
        back.push(b);
    }
    Ok((
        ScoreTable { frames: scores },
        BackpointerTable {
            width,
            height,
            frames: back,
        },
    ))
}

/// Sets every cell outside the `beam` best (ties to the smaller index) to
/// negative infinity.
fn prune(grid: &mut Grid<f64>, beam: usize) {
    let n = grid.len();
    if beam >= n {
        return;
    }
    let data = grid.data();
    let mut order: Vec<usize> = (0..n).collect();
    order.select_nth_unstable_by(beam, |&a, &b| data[b].total_cmp(&data[a]).then(a.cmp(&b)));
    for &i in &order[beam..] {
        grid.data_mut()[i] = f64::NEG_INFINITY;
    }
}

/// Forward pass where only the `beam` best positions of each frame survive
/// as predecessors for the next. Cells with no surviving predecessor in
/// their window get `-inf` and point at the first cell of that window.
///
/// Work is proportional to `beam × (2J+1)²` per frame instead of
/// `positions × (2J+1)²`. With `beam` at least the number of positions the
/// result is that of [`forward_pass`].
pub fn forward_pass_pruned(
    fields: &[ScoreField],
    cfg: &TrackerConfig,
    beam: usize,
) -> Result<(ScoreTable, BackpointerTable)> {
    cfg.validate()?;
    if beam == 0 {
        return Err(Error::Config("dp.beam must be at least 1".into()));
    }
    check_fields(fields)?;
    check_index_range(fields)?;
    let (w, h) = fields[0].dims();
    if beam >= w * h {
        return forward_pass(fields, cfg);
    }
    let kernel = cfg.kernel();
    let j = cfg.radius_j;

    let mut first = fields[0].clone();
    prune(&mut first, beam);
    let mut scores = vec![first];
    let mut back = Vec::with_capacity(fields.len() - 1);

    for q in &fields[1..] {
        let prev = scores.last().unwrap();
        let mut best = vec![f64::NEG_INFINITY; w * h];
        let mut arg = vec![u32::MAX; w * h];
        // survivors in ascending index order, so strict `>` keeps the
        // smallest index on ties exactly as the exact pass does
        for (s, &cs) in prev.data().iter().enumerate() {
            if cs == f64::NEG_INFINITY {
                continue;
            }
            let (sr, sc) = (s / w, s % w);
            for r in sr.saturating_sub(j)..=(sr + j).min(h - 1) {
                for c in sc.saturating_sub(j)..=(sc + j).min(w - 1) {
                    let v = cs - kernel.at(r as isize - sr as isize, c as isize - sc as isize);
                    let u = r * w + c;
                    if arg[u] == u32::MAX || v > best[u] {
                        best[u] = v;
                        arg[u] = s as u32;
                    }
                }
            }
        }
        for u in 0..w * h {
            if arg[u] == u32::MAX {
                let (r, c) = (u / w, u % w);
                arg[u] = (r.saturating_sub(j) * w + c.saturating_sub(j)) as u32;
            } else {
                best[u] += q.data()[u];
            }
        }
        let mut c = Grid::from_vec(w, h, best).expect("dims");
        prune(&mut c, beam);
        scores.push(c);
        back.push(Grid::from_vec(w, h, arg).expect("dims"));
    }
    Ok((
        ScoreTable { frames: scores },
        BackpointerTable {
            width: w,
            height: h,
            frames: back,
        },
    ))
}

/// Exact or pruned forward pass depending on `cfg.beam`.
pub fn run_forward(
    fields: &[ScoreField],
    cfg: &TrackerConfig,
) -> Result<(ScoreTable, BackpointerTable)> {
    match cfg.beam {
        Some(k) => forward_pass_pruned(fields, cfg, k),
        None => forward_pass(fields, cfg),
    }
}
