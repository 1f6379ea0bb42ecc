//! Higher-order single-image degradation: repeated blur, resize, noise and
//! JPEG stages followed by a final bicubic resize to `1 / final_scale`.
//!
//! Sampling and application are split: [`sample_trace`] draws every random
//! choice into a [`DegradeTrace`], and [`replay_trace`] applies it. Replaying
//! a saved trace therefore reproduces the output bit-exactly.

mod jpeg;
mod noise;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use jpeg::{decode_jpeg, encode_jpeg, jpeg_cycle, FULL_CHROMA_QUALITY};
pub use noise::{add_noise, NoiseKind};

use crate::error::{Error, Result};
use crate::filter::gaussian_blur_frame;
use crate::frame::Frame;
use crate::resample::resize_bicubic;
use crate::seed::{self, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlurStage {
    pub probability: f64,
    /// Inclusive range; only odd sizes are drawn.
    pub kernel_size: [usize; 2],
    pub sigma: [f64; 2],
    /// Chance of drawing independent vertical and horizontal sigmas.
    pub anisotropic_probability: f64,
}

impl Default for BlurStage {
    fn default() -> Self {
        Self {
            probability: 0.8,
            kernel_size: [7, 21],
            sigma: [0.2, 3.0],
            anisotropic_probability: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResizeMode {
    #[default]
    Bicubic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResizeStage {
    pub probability: f64,
    pub mode: ResizeMode,
    pub scale: [f64; 2],
}

impl Default for ResizeStage {
    fn default() -> Self {
        Self {
            probability: 1.0,
            mode: ResizeMode::Bicubic,
            scale: [0.3, 1.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseStage {
    pub probability: f64,
    pub gaussian_sigma: [f64; 2],
    pub poisson_scale: [f64; 2],
    /// Chance of poisson-like rather than gaussian noise.
    pub poisson_probability: f64,
    pub gray_probability: f64,
}

impl Default for NoiseStage {
    fn default() -> Self {
        Self {
            probability: 1.0,
            gaussian_sigma: [0.0, 0.1],
            poisson_scale: [0.0, 0.05],
            poisson_probability: 0.4,
            gray_probability: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JpegStage {
    pub probability: f64,
    pub quality: [u8; 2],
}

impl Default for JpegStage {
    fn default() -> Self {
        Self {
            probability: 1.0,
            quality: [30, 95],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageConfig {
    pub blur: BlurStage,
    pub resize: ResizeStage,
    pub noise: NoiseStage,
    pub jpeg: JpegStage,
}

impl StageConfig {
    /// A stage whose every sub-step is switched off.
    pub fn disabled() -> Self {
        Self {
            blur: BlurStage {
                probability: 0.0,
                ..Default::default()
            },
            resize: ResizeStage {
                probability: 0.0,
                ..Default::default()
            },
            noise: NoiseStage {
                probability: 0.0,
                ..Default::default()
            },
            jpeg: JpegStage {
                probability: 0.0,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegradeConfig {
    /// One entry per degradation order.
    pub stages: Vec<StageConfig>,
    pub final_scale: usize,
    pub seed: u64,
}

impl Default for DegradeConfig {
    fn default() -> Self {
        Self::with_order(2, 0)
    }
}

fn check_prob(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(
            name,
            format!("probability {p} is outside [0, 1]"),
        ));
    }
    Ok(())
}

fn check_range(
    name: &'static str,
    [lo, hi]: [f64; 2],
    min: f64,
    min_inclusive: bool,
) -> Result<()> {
    let lower_ok = if min_inclusive { lo >= min } else { lo > min };
    if !(lower_ok && lo <= hi && hi.is_finite()) {
        return Err(Error::param(name, format!("invalid range [{lo}, {hi}]")));
    }
    Ok(())
}

impl DegradeConfig {
    pub fn with_order(order: usize, seed: u64) -> Self {
        Self {
            stages: vec![StageConfig::default(); order],
            final_scale: 4,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.final_scale == 0 {
            return Err(Error::param("final_scale", "must be at least 1"));
        }
        for s in &self.stages {
            check_prob("blur.probability", s.blur.probability)?;
            check_prob(
                "blur.anisotropic_probability",
                s.blur.anisotropic_probability,
            )?;
            let [klo, khi] = s.blur.kernel_size;
            if klo > khi || odd_sizes(klo, khi).next().is_none() {
                return Err(Error::param(
                    "blur.kernel_size",
                    format!("range [{klo}, {khi}] holds no odd size"),
                ));
            }
            check_range("blur.sigma", s.blur.sigma, 0.0, false)?;
            check_prob("resize.probability", s.resize.probability)?;
            check_range("resize.scale", s.resize.scale, 0.0, false)?;
            check_prob("noise.probability", s.noise.probability)?;
            check_prob("noise.poisson_probability", s.noise.poisson_probability)?;
            check_prob("noise.gray_probability", s.noise.gray_probability)?;
            check_range("noise.gaussian_sigma", s.noise.gaussian_sigma, 0.0, true)?;
            check_range("noise.poisson_scale", s.noise.poisson_scale, 0.0, true)?;
            check_prob("jpeg.probability", s.jpeg.probability)?;
            let [qlo, qhi] = s.jpeg.quality;
            if !(1 <= qlo && qlo <= qhi && qhi <= 100) {
                return Err(Error::param(
                    "jpeg.quality",
                    format!("range [{qlo}, {qhi}] must lie within [1, 100]"),
                ));
            }
        }
        Ok(())
    }
}

fn odd_sizes(lo: usize, hi: usize) -> impl Iterator<Item = usize> {
    (lo.max(1)..=hi).filter(|k| k % 2 == 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlurTrace {
    pub kernel_size: usize,
    pub sigma_y: f64,
    pub sigma_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResizeTrace {
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseTrace {
    pub kind: NoiseKind,
    pub strength: f64,
    pub gray: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTrace {
    pub blur: Option<BlurTrace>,
    pub resize: Option<ResizeTrace>,
    pub noise: Option<NoiseTrace>,
    pub jpeg_quality: Option<u8>,
}

/// Everything that was sampled for one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradeTrace {
    pub seed: u64,
    pub input_height: usize,
    pub input_width: usize,
    pub stages: Vec<StageTrace>,
    pub output_height: usize,
    pub output_width: usize,
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn sample_stage(rng: &mut ChaCha8Rng, cfg: &StageConfig, dims: &mut (usize, usize)) -> StageTrace {
    let mut trace = StageTrace::default();

    if rng.random::<f64>() < cfg.blur.probability {
        let sizes: Vec<usize> =
            odd_sizes(cfg.blur.kernel_size[0], cfg.blur.kernel_size[1]).collect();
        let kernel_size = sizes[rng.random_range(0..sizes.len())];
        let sigma_x = uniform(rng, cfg.blur.sigma);
        let sigma_y = if rng.random::<f64>() < cfg.blur.anisotropic_probability {
            uniform(rng, cfg.blur.sigma)
        } else {
            sigma_x
        };
        trace.blur = Some(BlurTrace {
            kernel_size,
            sigma_y,
            sigma_x,
        });
    }

    if rng.random::<f64>() < cfg.resize.probability {
        let scale = uniform(rng, cfg.resize.scale);
        let height = ((dims.0 as f64 * scale).round() as usize).max(1);
        let width = ((dims.1 as f64 * scale).round() as usize).max(1);
        *dims = (height, width);
        trace.resize = Some(ResizeTrace { height, width });
    }

    if rng.random::<f64>() < cfg.noise.probability {
        let (kind, range) = if rng.random::<f64>() < cfg.noise.poisson_probability {
            (NoiseKind::PoissonLike, cfg.noise.poisson_scale)
        } else {
            (NoiseKind::Gaussian, cfg.noise.gaussian_sigma)
        };
        let strength = uniform(rng, range);
        let gray = rng.random::<f64>() < cfg.noise.gray_probability;
        trace.noise = Some(NoiseTrace {
            kind,
            strength,
            gray,
            seed: rng.random(),
        });
    }

    if rng.random::<f64>() < cfg.jpeg.probability {
        let [lo, hi] = cfg.jpeg.quality;
        trace.jpeg_quality = Some(rng.random_range(lo..=hi));
    }
    trace
}

fn check_divisible(h: usize, w: usize, factor: usize) -> Result<()> {
    if !h.is_multiple_of(factor) || !w.is_multiple_of(factor) {
        return Err(Error::InvalidDimensions(format!(
            "{h}x{w} is not divisible by {factor}"
        )));
    }
    Ok(())
}

/// Draws every random choice for a `height x width` input.
pub fn sample_trace(height: usize, width: usize, config: &DegradeConfig) -> Result<DegradeTrace> {
    config.validate()?;
    check_divisible(height, width, config.final_scale)?;
    let mut dims = (height, width);
    let stages = config
        .stages
        .iter()
        .enumerate()
        .map(|(i, cfg)| {
            let mut rng = seed::rng(config.seed, Stream::Degrade, i as u64);
            sample_stage(&mut rng, cfg, &mut dims)
        })
        .collect();
    Ok(DegradeTrace {
        seed: config.seed,
        input_height: height,
        input_width: width,
        stages,
        output_height: height / config.final_scale,
        output_width: width / config.final_scale,
    })
}

/// Applies a recorded trace.
pub fn replay_trace(frame: &Frame, trace: &DegradeTrace) -> Result<Frame> {
    if frame.dims() != (trace.input_height, trace.input_width) {
        return Err(Error::DimensionMismatch {
            left_h: frame.height(),
            left_w: frame.width(),
            right_h: trace.input_height,
            right_w: trace.input_width,
        });
    }
    let mut cur = frame.clone();
    for stage in &trace.stages {
        if let Some(b) = stage.blur {
            cur = gaussian_blur_frame(&cur, b.kernel_size, b.sigma_y, b.sigma_x)?;
        }
        if let Some(r) = stage.resize {
            cur = resize_bicubic(&cur, r.height, r.width)?;
        }
        if let Some(n) = stage.noise {
            cur = add_noise(&cur, n.kind, n.strength, n.gray, n.seed)?;
        }
        if let Some(q) = stage.jpeg_quality {
            cur = jpeg_cycle(&cur, q)?;
        }
    }
    resize_bicubic(&cur, trace.output_height, trace.output_width)
}

pub fn degrade_frame(frame: &Frame, config: &DegradeConfig) -> Result<(Frame, DegradeTrace)> {
    let trace = sample_trace(frame.height(), frame.width(), config)?;
    let out = replay_trace(frame, &trace)?;
    Ok((out, trace))
}

/// Per-frame seed for frame `index` of a sequence degraded under `seed`.
pub fn frame_seed(seed: u64, index: u64) -> u64 {
    seed::derive(seed, Stream::DegradeFrame, index)
}
