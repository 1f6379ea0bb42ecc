//! Separable bicubic resampling.
//!
//! Catmull-Rom kernel (a = -0.5), pixel centers at `(i + 0.5) / size`,
//! replicate edges. When shrinking, the kernel is stretched by the inverse
//! scale so every source pixel contributes (antialiased, as in MATLAB's
//! `imresize`). Weights are normalized per output sample.

use crate::error::{Error, Result};
use crate::frame::{clamp_unit, Frame, GrayMap, CHANNELS};

const A: f64 = -0.5;

/// Catmull-Rom cubic convolution kernel.
pub fn cubic(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        ((A + 2.0) * x - (A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((A * x - 5.0 * A) * x + 8.0 * A) * x - 4.0 * A
    } else {
        0.0
    }
}

/// Contributions of source samples to one output sample.
#[derive(Debug, Clone)]
pub(crate) struct Taps {
    pub first: usize,
    pub weights: Vec<f64>,
}

/// Per-output-index taps along one axis. Out-of-range source indices are
/// folded onto the edge sample, so `first + weights.len() <= in_len`.
pub(crate) fn axis_taps(in_len: usize, out_len: usize) -> Vec<Taps> {
    let scale = out_len as f64 / in_len as f64;
    let (stretch, radius) = if scale < 1.0 {
        (scale, 2.0 / scale)
    } else {
        (1.0, 2.0)
    };
    (0..out_len)
        .map(|o| {
            let center = (o as f64 + 0.5) / scale - 0.5;
            let lo = (center - radius).floor() as isize;
            let hi = (center + radius).ceil() as isize;
            let first = lo.clamp(0, in_len as isize - 1) as usize;
            let last = hi.clamp(0, in_len as isize - 1) as usize;
            let mut weights = vec![0.0; last - first + 1];
            let mut sum = 0.0;
            for j in lo..=hi {
                let w = cubic((center - j as f64) * stretch);
                if w == 0.0 {
                    continue;
                }
                let idx = j.clamp(0, in_len as isize - 1) as usize;
                weights[idx - first] += w;
                sum += w;
            }
            for w in &mut weights {
                *w /= sum;
            }
            Taps { first, weights }
        })
        .collect()
}

/// Resamples an interleaved `h x w x ch` buffer. Output is not clamped.
pub(crate) fn resize_interleaved(
    data: &[f32],
    h: usize,
    w: usize,
    ch: usize,
    out_h: usize,
    out_w: usize,
) -> Vec<f64> {
    let xt = axis_taps(w, out_w);
    let yt = axis_taps(h, out_h);

    // Horizontal pass: h x out_w.
    let mut tmp = vec![0.0f64; h * out_w * ch];
    for y in 0..h {
        let row = &data[y * w * ch..(y + 1) * w * ch];
        let dst = &mut tmp[y * out_w * ch..(y + 1) * out_w * ch];
        for (ox, taps) in xt.iter().enumerate() {
            for c in 0..ch {
                let mut acc = 0.0;
                for (k, &wt) in taps.weights.iter().enumerate() {
                    acc += wt * f64::from(row[(taps.first + k) * ch + c]);
                }
                dst[ox * ch + c] = acc;
            }
        }
    }

    // Vertical pass: out_h x out_w.
    let stride = out_w * ch;
    let mut out = vec![0.0f64; out_h * stride];
    for (oy, taps) in yt.iter().enumerate() {
        let dst = &mut out[oy * stride..(oy + 1) * stride];
        for (k, &wt) in taps.weights.iter().enumerate() {
            let src = &tmp[(taps.first + k) * stride..(taps.first + k + 1) * stride];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += wt * s;
            }
        }
    }
    out
}

fn check_out(out_h: usize, out_w: usize) -> Result<()> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::InvalidDimensions(format!(
            "resize target {out_h}x{out_w} must be at least 1x1"
        )));
    }
    Ok(())
}

pub fn resize_bicubic(frame: &Frame, out_h: usize, out_w: usize) -> Result<Frame> {
    check_out(out_h, out_w)?;
    if frame.dims() == (out_h, out_w) {
        return Ok(frame.clone());
    }
    let out = resize_interleaved(
        frame.data(),
        frame.height(),
        frame.width(),
        CHANNELS,
        out_h,
        out_w,
    );
    Ok(Frame::from_clamped(
        out_h,
        out_w,
        out.into_iter().map(|v| clamp_unit(v as f32)).collect(),
    ))
}

pub fn resize_map_bicubic(map: &GrayMap, out_h: usize, out_w: usize) -> Result<GrayMap> {
    check_out(out_h, out_w)?;
    if map.dims() == (out_h, out_w) {
        return Ok(map.clone());
    }
    let out = resize_interleaved(map.data(), map.height(), map.width(), 1, out_h, out_w);
    Ok(GrayMap::from_clamped(
        out_h,
        out_w,
        out.into_iter().map(|v| v as f32).collect(),
    ))
}

/// Bicubic downsampling by an integer factor; dimensions must divide.
pub fn downscale(frame: &Frame, factor: usize) -> Result<Frame> {
    if factor == 0 {
        return Err(Error::param("scale_factor", "must be at least 1"));
    }
    let (h, w) = frame.dims();
    if h % factor != 0 || w % factor != 0 {
        return Err(Error::InvalidDimensions(format!(
            "{h}x{w} is not divisible by {factor}"
        )));
    }
    resize_bicubic(frame, h / factor, w / factor)
}
