//! Block-matching motion estimate used to rank clips by motion.
//!
//! Luma is split into 16x16 blocks (partial blocks at the right and bottom
//! edges included). For every block of `a` an exhaustive +-8 pixel search
//! finds the displacement into `b` with the lowest SAD; samples of `b`
//! outside the frame replicate the edge. Ties go to the shorter vector, so
//! flat content reports no motion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::frame::Frame;

pub const BLOCK: usize = 16;
pub const RADIUS: isize = 8;

/// Displacement `(dy, dx)` of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockVector {
    pub top: usize,
    pub left: usize,
    pub dy: isize,
    pub dx: isize,
}

impl BlockVector {
    pub fn magnitude(&self) -> f64 {
        ((self.dy * self.dy + self.dx * self.dx) as f64).sqrt()
    }
}

fn pad_replicate(plane: &[f32], h: usize, w: usize, r: usize) -> Vec<f32> {
    let (ph, pw) = (h + 2 * r, w + 2 * r);
    let mut out = Vec::with_capacity(ph * pw);
    for py in 0..ph {
        let y = py.saturating_sub(r).min(h - 1);
        for px in 0..pw {
            let x = px.saturating_sub(r).min(w - 1);
            out.push(plane[y * w + x]);
        }
    }
    out
}

pub fn block_vectors(a: &Frame, b: &Frame) -> Result<Vec<BlockVector>> {
    a.same_dims(b)?;
    let (h, w) = a.dims();
    let la = a.luma();
    let r = RADIUS as usize;
    let pb = pad_replicate(&b.luma(), h, w, r);
    let pw = w + 2 * r;

    let blocks: Vec<(usize, usize)> = (0..h)
        .step_by(BLOCK)
        .flat_map(|top| (0..w).step_by(BLOCK).map(move |left| (top, left)))
        .collect();

    let vectors = blocks
        .into_par_iter()
        .map(|(top, left)| {
            let bh = BLOCK.min(h - top);
            let bw = BLOCK.min(w - left);
            let sad = |dy: isize, dx: isize, limit: f32| -> f32 {
                let mut acc = 0.0f32;
                for y in 0..bh {
                    let arow = &la[(top + y) * w + left..(top + y) * w + left + bw];
                    let py = (top + y) as isize + dy + RADIUS;
                    let px = left as isize + dx + RADIUS;
                    let start = py as usize * pw + px as usize;
                    let brow = &pb[start..start + bw];
                    acc += arow
                        .iter()
                        .zip(brow)
                        .map(|(p, q)| (p - q).abs())
                        .sum::<f32>();
                    if acc > limit {
                        break;
                    }
                }
                acc
            };
            let mut best = (sad(0, 0, f32::INFINITY), 0isize, 0isize);
            for dy in -RADIUS..=RADIUS {
                for dx in -RADIUS..=RADIUS {
                    if dy == 0 && dx == 0 {
                        continue;
                    }
                    let s = sad(dy, dx, best.0);
                    let shorter = dy * dy + dx * dx < best.1 * best.1 + best.2 * best.2;
                    if s < best.0 || (s == best.0 && shorter) {
                        best = (s, dy, dx);
                    }
                }
            }
            BlockVector {
                top,
                left,
                dy: best.1,
                dx: best.2,
            }
        })
        .collect();
    Ok(vectors)
}

/// Mean block displacement magnitude in pixels.
pub fn estimate_flow_magnitude(a: &Frame, b: &Frame) -> Result<f64> {
    let vectors = block_vectors(a, b)?;
    Ok(vectors.iter().map(BlockVector::magnitude).sum::<f64>() / vectors.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowStats {
    /// Magnitude between frame `i` and `i + 1`.
    pub pair_magnitudes: Vec<f64>,
    pub mean: f64,
}

impl FlowStats {
    pub fn from_pairs(pair_magnitudes: Vec<f64>) -> Self {
        let mean = if pair_magnitudes.is_empty() {
            0.0
        } else {
            pair_magnitudes.iter().sum::<f64>() / pair_magnitudes.len() as f64
        };
        Self {
            pair_magnitudes,
            mean,
        }
    }

    pub fn of_frames(frames: &[Frame]) -> Result<Self> {
        let mags = frames
            .windows(2)
            .map(|p| estimate_flow_magnitude(&p[0], &p[1]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_pairs(mags))
    }

    /// Mean magnitude over the pairs inside frames `start .. start + len`.
    pub fn window_mean(&self, start: usize, len: usize) -> f64 {
        if len < 2 {
            return 0.0;
        }
        let pairs = &self.pair_magnitudes[start..start + len - 1];
        pairs.iter().sum::<f64>() / pairs.len() as f64
    }
}
