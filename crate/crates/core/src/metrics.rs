//! Full-reference metrics between frames of equal size.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::gaussian_kernel;
use crate::frame::Frame;
use crate::resample::resize_bicubic;

/// Mean absolute difference over all samples.
pub fn l1(a: &Frame, b: &Frame) -> Result<f64> {
    a.same_dims(b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (f64::from(x) - f64::from(y)).abs())
        .sum();
    Ok(sum / a.data().len() as f64)
}

pub fn mse(a: &Frame, b: &Frame) -> Result<f64> {
    a.same_dims(b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// `10 log10(1 / MSE)` in dB; `+inf` for identical frames.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64> {
    let m = mse(a, b)?;
    Ok(if m == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * m.log10()
    })
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const C1: f64 = 0.01 * 0.01;
const C2: f64 = 0.03 * 0.03;

/// Valid-region separable filtering of a single plane.
fn filter_valid(plane: &[f64], h: usize, w: usize, k: &[f64]) -> (Vec<f64>, usize, usize) {
    let n = k.len();
    let (vh, vw) = (h - n + 1, w - n + 1);
    let mut tmp = vec![0.0; h * vw];
    for y in 0..h {
        for x in 0..vw {
            tmp[y * vw + x] = k
                .iter()
                .enumerate()
                .map(|(i, &wt)| wt * plane[y * w + x + i])
                .sum();
        }
    }
    let mut out = vec![0.0; vh * vw];
    for y in 0..vh {
        for (i, &wt) in k.iter().enumerate() {
            let src = &tmp[(y + i) * vw..(y + i + 1) * vw];
            for (d, &s) in out[y * vw..(y + 1) * vw].iter_mut().zip(src) {
                *d += wt * s;
            }
        }
    }
    (out, vh, vw)
}

/// Single-scale SSIM on BT.601 luma with an 11x11 Gaussian window
/// (sigma 1.5), averaged over the positions where the window fits.
pub fn ssim(a: &Frame, b: &Frame) -> Result<f64> {
    a.same_dims(b)?;
    let (h, w) = a.dims();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::InvalidDimensions(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {h}x{w}"
        )));
    }
    let k = gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)?;
    let x: Vec<f64> = a.luma().into_iter().map(f64::from).collect();
    let y: Vec<f64> = b.luma().into_iter().map(f64::from).collect();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();

    let (mx, vh, vw) = filter_valid(&x, h, w, &k);
    let (my, ..) = filter_valid(&y, h, w, &k);
    let (sxx, ..) = filter_valid(&xx, h, w, &k);
    let (syy, ..) = filter_valid(&yy, h, w, &k);
    let (sxy, ..) = filter_valid(&xy, h, w, &k);

    let mut total = 0.0;
    for i in 0..vh * vw {
        let (ux, uy) = (mx[i], my[i]);
        let vx = sxx[i] - ux * ux;
        let vy = syy[i] - uy * uy;
        let cxy = sxy[i] - ux * uy;
        total +=
            ((2.0 * ux * uy + C1) * (2.0 * cxy + C2)) / ((ux * ux + uy * uy + C1) * (vx + vy + C2));
    }
    Ok(total / (vh * vw) as f64)
}

/// L1 between the 4x bicubic downsample of an HR motion-blurred frame and a
/// cleaned LR frame.
pub fn cleaning_residual(hr_motion: &Frame, cleaned_lr: &Frame) -> Result<f64> {
    let (lh, lw) = cleaned_lr.dims();
    if hr_motion.dims() != (lh * 4, lw * 4) {
        return Err(Error::DimensionMismatch {
            left_h: hr_motion.height(),
            left_w: hr_motion.width(),
            right_h: lh * 4,
            right_w: lw * 4,
        });
    }
    l1(&resize_bicubic(hr_motion, lh, lw)?, cleaned_lr)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L1,
    Psnr,
    Ssim,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::L1, Metric::Psnr, Metric::Ssim];

    pub fn name(self) -> &'static str {
        match self {
            Metric::L1 => "l1",
            Metric::Psnr => "psnr",
            Metric::Ssim => "ssim",
        }
    }

    pub fn compute(self, a: &Frame, b: &Frame) -> Result<f64> {
        match self {
            Metric::L1 => l1(a, b),
            Metric::Psnr => psnr(a, b),
            Metric::Ssim => ssim(a, b),
        }
    }
}

/// Non-finite values (PSNR of identical frames) are written as `null` and
/// read back as `+inf`.
mod nullable_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        v.is_finite().then_some(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }

    pub mod vec {
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            v.iter()
                .map(|x| x.is_finite().then_some(*x))
                .collect::<Vec<_>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Ok(Vec::<Option<f64>>::deserialize(d)?
                .into_iter()
                .map(|x| x.unwrap_or(f64::INFINITY))
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    #[serde(with = "nullable_f64::vec")]
    pub values: Vec<f64>,
    #[serde(with = "nullable_f64")]
    pub mean: f64,
    #[serde(with = "nullable_f64")]
    pub std: f64,
}

impl MetricSeries {
    pub fn new(values: Vec<f64>) -> Self {
        let n = values.len() as f64;
        if values.is_empty() {
            return Self {
                values,
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let std = if mean.is_finite() {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
        } else {
            f64::NAN
        };
        Self { values, mean, std }
    }
}

/// Per-frame values and aggregates keyed by metric name.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub frames: usize,
    pub metrics: BTreeMap<String, MetricSeries>,
}

impl MetricReport {
    pub fn from_pairs<'a>(
        pairs: impl IntoIterator<Item = (&'a Frame, &'a Frame)>,
        metrics: &[Metric],
    ) -> Result<Self> {
        let mut values: BTreeMap<Metric, Vec<f64>> = BTreeMap::new();
        let mut frames = 0;
        for (a, b) in pairs {
            for &m in metrics {
                values.entry(m).or_default().push(m.compute(a, b)?);
            }
            frames += 1;
        }
        Ok(Self::from_values(
            frames,
            values.into_iter().map(|(m, v)| (m.name().to_string(), v)),
        ))
    }

    pub fn from_values(
        frames: usize,
        values: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Self {
        Self {
            frames,
            metrics: values
                .into_iter()
                .map(|(k, v)| (k, MetricSeries::new(v)))
                .collect(),
        }
    }

    /// Adds metric series from another report over the same frames, e.g.
    /// no-reference scores computed by an external tool.
    pub fn merge(&mut self, other: MetricReport) -> Result<()> {
        if other.frames != self.frames {
            return Err(Error::FrameCountMismatch {
                left: self.frames,
                right: other.frames,
            });
        }
        self.metrics.extend(other.metrics);
        Ok(())
    }
}
