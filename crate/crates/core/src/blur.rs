//! Online motion-blur synthesis by temporal stacking of neighbouring frames.
//!
//! A blurred frame is a convex combination of the `N` frames centred on it:
//! every neighbour (the centre included) gets weight `r`, and the centre
//! additionally keeps `1 - N*r`. Each intermediate frame is replaced with
//! probability `p`; boundary frames are copied. Second-order blur applies
//! the whole procedure again to the first pass's output.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{clamp_unit, Clip, Frame};
use crate::seed::{self, Stream};

pub const FRAME_COUNTS: [usize; 3] = [3, 5, 7];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlurParams {
    /// Number of stacked frames `N`, one of 3, 5, 7.
    pub n: usize,
    /// Stacking coefficient in `[0, 1/N]`.
    pub r: f64,
    /// Per-frame synthesis probability in `(0.5, 1]`.
    pub p: f64,
    /// 1 = single pass, 2 = a second pass over the first pass's output.
    pub order: u8,
    pub seed: u64,
}

impl BlurParams {
    pub fn new(n: usize, r: f64, p: f64, order: u8, seed: u64) -> Result<Self> {
        let params = Self {
            n,
            r,
            p,
            order,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        validate_window(self.n, self.r)?;
        if !(self.p > 0.5 && self.p <= 1.0) {
            return Err(Error::param("p", format!("{} is outside (0.5, 1]", self.p)));
        }
        if !matches!(self.order, 1 | 2) {
            return Err(Error::param(
                "order",
                format!("{} must be 1 or 2", self.order),
            ));
        }
        Ok(())
    }

    /// Frame indices (0-based, inclusive) eligible for synthesis in a clip of
    /// `len` frames: a margin of `ceil(N/2)` on both sides in 1-based terms.
    pub fn eligible_range(&self, len: usize) -> Option<(usize, usize)> {
        let half_up = self.n.div_ceil(2);
        let lo = half_up - 1;
        let hi = len.checked_sub(half_up + 1)?;
        (lo <= hi).then_some((lo, hi))
    }
}

fn validate_window(n: usize, r: f64) -> Result<()> {
    if !FRAME_COUNTS.contains(&n) {
        return Err(Error::param("n", format!("{n} is not one of 3, 5, 7")));
    }
    if !(0.0..=1.0 / n as f64).contains(&r) {
        return Err(Error::param("r", format!("{r} is outside [0, 1/{n}]")));
    }
    Ok(())
}

/// Parameters and Bernoulli outcomes of one synthesis pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassRecord {
    pub params: BlurParams,
    pub applied: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlurOutcome {
    pub clip: Clip,
    /// Whether any pass replaced frame `i`.
    pub applied: Vec<bool>,
    pub passes: Vec<PassRecord>,
}

/// Draws `N`, `r` and `p` uniformly over their domains. The result is a
/// first-order parameter set carrying `seed`.
pub fn sample_params(seed: u64) -> BlurParams {
    let mut rng = seed::rng(seed, Stream::BlurParams, 0);
    let n = FRAME_COUNTS[rng.random_range(0..FRAME_COUNTS.len())];
    let r = rng.random::<f64>() / n as f64;
    let p = 1.0 - rng.random::<f64>() * 0.5;
    BlurParams {
        n,
        r,
        p,
        order: 1,
        seed,
    }
}

/// Weighted stack around frame `t` before the final clamp.
pub fn stack_frame_unclamped(clip: &Clip, t: usize, n: usize, r: f64) -> Result<Vec<f32>> {
    validate_window(n, r)?;
    let half = n / 2;
    let len = clip.len();
    if t < half || t + half >= len {
        return Err(Error::IndexOutOfRange {
            index: t,
            lo: half,
            hi: len.saturating_sub(half + 1),
        });
    }
    let window = &clip.frames()[t - half..=t + half];
    let center = clip[t].data();
    let center_extra = 1.0 - n as f64 * r;

    const CHUNK: usize = 2048;
    let mut out = vec![0.0f32; center.len()];
    let mut acc = [0.0f64; CHUNK];
    for (start, dst) in (0..center.len()).step_by(CHUNK).zip(out.chunks_mut(CHUNK)) {
        let acc = &mut acc[..dst.len()];
        acc.fill(0.0);
        for frame in window {
            let src = &frame.data()[start..start + dst.len()];
            for (a, &v) in acc.iter_mut().zip(src) {
                *a += r * f64::from(v);
            }
        }
        let src = &center[start..start + dst.len()];
        for ((d, a), &v) in dst.iter_mut().zip(acc.iter()).zip(src) {
            *d = (*a + center_extra * f64::from(v)) as f32;
        }
    }
    Ok(out)
}

/// Blurred version of frame `t`, clamped to `[0, 1]`.
pub fn stack_frame(clip: &Clip, t: usize, n: usize, r: f64) -> Result<Frame> {
    let data = stack_frame_unclamped(clip, t, n, r)?;
    let (h, w) = clip.dims();
    Ok(Frame::from_clamped(
        h,
        w,
        data.into_iter().map(clamp_unit).collect(),
    ))
}

fn bernoulli(seed: u64, pass: u64, index: usize, p: f64) -> bool {
    let mut rng = seed::rng(seed, Stream::BlurBernoulli, (pass << 32) | index as u64);
    rng.random::<f64>() < p
}

fn run_pass(clip: &Clip, params: &BlurParams, pass: u64) -> Result<(Clip, Vec<bool>)> {
    let len = clip.len();
    let range = params.eligible_range(len);
    let applied: Vec<bool> = (0..len)
        .map(|i| match range {
            Some((lo, hi)) if (lo..=hi).contains(&i) => bernoulli(params.seed, pass, i, params.p),
            _ => false,
        })
        .collect();
    let frames = (0..len)
        .into_par_iter()
        .map(|i| {
            if applied[i] {
                stack_frame(clip, i, params.n, params.r)
            } else {
                Ok(clip[i].clone())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((Clip::with_fps(frames, clip.fps())?, applied))
}

/// Parameters of the second pass of an order-2 synthesis, drawn
/// independently from `seed`.
pub fn second_pass_params(seed: u64) -> BlurParams {
    sample_params(seed::derive(seed, Stream::BlurSecondPass, 0))
}

pub fn synthesize_clip(clip: &Clip, params: &BlurParams) -> Result<BlurOutcome> {
    params.validate()?;
    let mut passes = vec![BlurParams {
        order: 1,
        ..*params
    }];
    if params.order == 2 {
        passes.push(second_pass_params(params.seed));
    }
    let required = passes.iter().map(|p| p.n).max().unwrap_or(params.n);
    if clip.len() < required {
        return Err(Error::ClipTooShort {
            len: clip.len(),
            required,
        });
    }

    let mut current = clip.clone();
    let mut applied = vec![false; clip.len()];
    let mut records = Vec::with_capacity(passes.len());
    for (pass, pass_params) in passes.into_iter().enumerate() {
        let (next, flags) = run_pass(&current, &pass_params, pass as u64)?;
        for (a, f) in applied.iter_mut().zip(&flags) {
            *a |= *f;
        }
        records.push(PassRecord {
            params: pass_params,
            applied: flags,
        });
        current = next;
    }
    Ok(BlurOutcome {
        clip: current,
        applied,
        passes: records,
    })
}
