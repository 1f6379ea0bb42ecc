//! Blurring-mask ground truth from clear/blurred frame pairs.
//!
//! Pipeline: bicubic downsample both frames, take the per-pixel channel
//! mean of squared differences times `k`, clamp to `[0, 1]`, soften with a
//! Gaussian, then invert so clear regions read 1 and fully blurred regions
//! read 0. A frame is gated in for the mask loss when its mean mask value
//! falls below the gate threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::gaussian_blur;
use crate::frame::{Frame, GrayMap, CHANNELS};
use crate::resample::downscale;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaskParams {
    /// Magnification factor applied to the residual.
    pub k: f64,
    pub kernel_size: usize,
    pub sigma: f64,
    pub gate_threshold: f64,
    /// HR to LR downsampling factor applied before the residual.
    pub scale_factor: usize,
}

impl Default for MaskParams {
    fn default() -> Self {
        Self {
            k: 100.0,
            kernel_size: 7,
            sigma: 3.0,
            gate_threshold: 0.6,
            scale_factor: 4,
        }
    }
}

impl MaskParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::param("k", format!("{} must be positive", self.k)));
        }
        if self.kernel_size == 0 || self.kernel_size.is_multiple_of(2) {
            return Err(Error::param(
                "kernel_size",
                format!("{} must be odd", self.kernel_size),
            ));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param(
                "sigma",
                format!("{} must be positive", self.sigma),
            ));
        }
        if !(self.gate_threshold > 0.0 && self.gate_threshold < 1.0) {
            return Err(Error::param(
                "gate_threshold",
                format!("{} is outside (0, 1)", self.gate_threshold),
            ));
        }
        if self.scale_factor == 0 {
            return Err(Error::param("scale_factor", "must be at least 1"));
        }
        Ok(())
    }
}

/// Magnified residual before clamping; values are nonnegative but may
/// exceed 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualMap {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl ResidualMap {
    pub fn clamped(&self) -> GrayMap {
        GrayMap::from_clamped(
            self.height,
            self.width,
            self.data.iter().map(|&v| v.min(1.0) as f32).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskPair {
    pub mask_gt: GrayMap,
    /// `mean(mask_gt) < gate_threshold`
    pub gated: bool,
}

/// `k` times the per-pixel channel-mean squared difference.
pub fn residual_map(clear_lr: &Frame, blur_lr: &Frame, k: f64) -> Result<ResidualMap> {
    clear_lr.same_dims(blur_lr)?;
    let data = clear_lr
        .data()
        .chunks_exact(CHANNELS)
        .zip(blur_lr.data().chunks_exact(CHANNELS))
        .map(|(a, b)| {
            let sq: f64 = a
                .iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let d = f64::from(x) - f64::from(y);
                    d * d
                })
                .sum();
            k * sq / CHANNELS as f64
        })
        .collect();
    Ok(ResidualMap {
        height: clear_lr.height(),
        width: clear_lr.width(),
        data,
    })
}

/// Softens a clamped residual and applies the clear = 1 convention.
pub fn soften_and_invert(clamped: &GrayMap, params: &MaskParams) -> Result<GrayMap> {
    Ok(gaussian_blur(clamped, params.kernel_size, params.sigma)?.inverted())
}

/// Mask ground truth from frames already at LR resolution.
pub fn make_mask_gt_lr(clear_lr: &Frame, blur_lr: &Frame, params: &MaskParams) -> Result<MaskPair> {
    params.validate()?;
    let clamped = residual_map(clear_lr, blur_lr, params.k)?.clamped();
    let mask_gt = soften_and_invert(&clamped, params)?;
    let gated = mask_gt.mean() < params.gate_threshold;
    Ok(MaskPair { mask_gt, gated })
}

/// Mask ground truth from an HR clear/blurred pair; the mask is at
/// `1 / scale_factor` resolution.
pub fn make_mask_gt(clear_hr: &Frame, blur_hr: &Frame, params: &MaskParams) -> Result<MaskPair> {
    params.validate()?;
    clear_hr.same_dims(blur_hr)?;
    let clear_lr = downscale(clear_hr, params.scale_factor)?;
    let blur_lr = downscale(blur_hr, params.scale_factor)?;
    make_mask_gt_lr(&clear_lr, &blur_lr, params)
}

/// Gated mean absolute error between a ground-truth and a predicted mask;
/// exactly 0 when the frame is not gated in.
pub fn mask_loss(mask_gt: &GrayMap, mask_pred: &GrayMap, gate_threshold: f64) -> Result<f64> {
    mask_gt.same_dims(mask_pred)?;
    if mask_gt.mean() >= gate_threshold {
        return Ok(0.0);
    }
    let sum: f64 = mask_gt
        .data()
        .iter()
        .zip(mask_pred.data())
        .map(|(&a, &b)| (f64::from(a) - f64::from(b)).abs())
        .sum();
    Ok(sum / mask_gt.data().len() as f64)
}
