//! Turns a directory of source videos into train/valid/test clip folders.
//!
//! Layout of the output:
//!
//! ```text
//! out/manifest.json
//! out/{split}/{clip_id}/hr/%08d.png     clear ground truth
//! out/{split}/{clip_id}/lr/%08d.png     network input
//! out/{split}/{clip_id}/mask/%08d.png   only with blur synthesis
//! out/{split}/{clip_id}/clip.json       per-clip synthesis record
//! ```

mod manifest;
mod select;

pub use manifest::{
    validate_dataset, ClipEntry, DatasetManifest, GlobalInfo, Split, SplitTotals, ValidationReport,
    VideoEntry, MANIFEST_FILE, SCHEMA_VERSION,
};
pub use select::{assign_splits, select_clips, ClipWindow, Policy};

use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blur::{self, BlurParams, PassRecord};
use crate::degrade::{self, DegradeConfig, DegradeTrace};
use crate::error::{Error, Result};
use crate::flow::FlowStats;
use crate::frame::{Clip, Frame};
use crate::io;
use crate::mask::{self, MaskParams};
use crate::resample::{downscale, resize_bicubic};
use crate::seed::{self, Stream};

/// Blur synthesis applied to every clip. Unset `n`, `r`, `p` are sampled
/// per clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlurSynthesis {
    pub order: u8,
    pub n: Option<usize>,
    pub r: Option<f64>,
    pub p: Option<f64>,
}

impl Default for BlurSynthesis {
    fn default() -> Self {
        Self {
            order: 1,
            n: None,
            r: None,
            p: None,
        }
    }
}

impl BlurSynthesis {
    pub fn params(&self, seed: u64) -> Result<BlurParams> {
        let sampled = blur::sample_params(seed);
        BlurParams::new(
            self.n.unwrap_or(sampled.n),
            self.r.unwrap_or(sampled.r),
            self.p.unwrap_or(sampled.p),
            self.order,
            seed,
        )
    }

    fn validate(&self) -> Result<()> {
        // A sampled field never fails, so checking with seed 0 covers the
        // fixed ones.
        self.params(0).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetOptions {
    pub hr_height: usize,
    pub hr_width: usize,
    pub scale_factor: usize,
    /// Relative shares of videos in train, test, valid.
    pub split_ratios: [u32; 3],
    /// Put every video in this split instead of drawing.
    pub force_split: Option<Split>,
    pub train_clips_per_video: usize,
    pub train_clip_len: usize,
    /// Inclusive range for the number of clips taken from an eval video.
    pub eval_clips_per_video: [usize; 2],
    pub eval_clip_len: usize,
    pub blur: Option<BlurSynthesis>,
    pub mask: MaskParams,
    /// Replaces the plain bicubic LR with the degradation chain.
    pub degrade: Option<DegradeConfig>,
    pub seed: u64,
    /// Compute the manifest without writing anything.
    pub dry_run: bool,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self {
            hr_height: 544,
            hr_width: 960,
            scale_factor: 4,
            split_ratios: [90, 6, 4],
            force_split: None,
            train_clips_per_video: 10,
            train_clip_len: 15,
            eval_clips_per_video: [1, 4],
            eval_clip_len: 7,
            blur: None,
            mask: MaskParams::default(),
            degrade: None,
            seed: 0,
            dry_run: false,
        }
    }
}

impl DatasetOptions {
    pub fn validate(&self) -> Result<()> {
        let f = self.scale_factor;
        if f == 0 || self.hr_height == 0 || self.hr_width == 0 {
            return Err(Error::param(
                "scale_factor",
                "dimensions and factor must be positive",
            ));
        }
        if !self.hr_height.is_multiple_of(f) || !self.hr_width.is_multiple_of(f) {
            return Err(Error::InvalidDimensions(format!(
                "HR {}x{} is not divisible by {f}",
                self.hr_width, self.hr_height
            )));
        }
        if self.train_clip_len == 0 || self.eval_clip_len == 0 {
            return Err(Error::param("clip_len", "must be at least 1"));
        }
        let [lo, hi] = self.eval_clips_per_video;
        if lo > hi {
            return Err(Error::param(
                "eval_clips_per_video",
                format!("empty range [{lo}, {hi}]"),
            ));
        }
        if let Some(b) = &self.blur {
            b.validate()?;
            // sampled N can be as large as the biggest allowed count
            let need =
                b.n.unwrap_or(blur::FRAME_COUNTS[blur::FRAME_COUNTS.len() - 1]);
            let shortest = self.train_clip_len.min(self.eval_clip_len);
            if shortest < need {
                return Err(Error::ClipTooShort {
                    len: shortest,
                    required: need,
                });
            }
        }
        self.mask.validate()?;
        if self.mask.scale_factor != f {
            return Err(Error::param(
                "mask.scale_factor",
                format!("{} differs from scale_factor {f}", self.mask.scale_factor),
            ));
        }
        if let Some(d) = &self.degrade {
            d.validate()?;
            if d.final_scale != f {
                return Err(Error::param(
                    "degrade.final_scale",
                    format!("{} differs from scale_factor {f}", d.final_scale),
                ));
            }
        }
        Ok(())
    }

    pub fn clip_len(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train_clip_len,
            Split::Valid | Split::Test => self.eval_clip_len,
        }
    }

    fn global(&self) -> GlobalInfo {
        GlobalInfo {
            scale_factor: self.scale_factor,
            hr_width: self.hr_width,
            hr_height: self.hr_height,
            lr_width: self.hr_width / self.scale_factor,
            lr_height: self.hr_height / self.scale_factor,
            train_clip_len: self.train_clip_len,
            eval_clip_len: self.eval_clip_len,
            seed: self.seed,
        }
    }
}

/// Scales `frame` to cover `height x width` with its aspect ratio kept, then
/// center-crops.
pub fn fit_to(frame: &Frame, height: usize, width: usize) -> Result<Frame> {
    let (h, w) = frame.dims();
    if (h, w) == (height, width) {
        return Ok(frame.clone());
    }
    let scale = (height as f64 / h as f64).max(width as f64 / w as f64);
    let sh = ((h as f64 * scale).round() as usize).max(height);
    let sw = ((w as f64 * scale).round() as usize).max(width);
    let scaled = resize_bicubic(frame, sh, sw)?;
    scaled.crop((sh - height) / 2, (sw - width) / 2, height, width)
}

/// A source video that contributed nothing, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedVideo {
    pub video_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub manifest: DatasetManifest,
    pub skipped: Vec<SkippedVideo>,
}

/// Written next to each clip's frame folders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub clip_id: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blur_passes: Vec<PassRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gated: Vec<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degrade: Vec<DegradeTrace>,
}

struct SourceVideo {
    id: String,
    frames: Vec<PathBuf>,
}

fn discover_videos(src: &Path) -> Result<Vec<SourceVideo>> {
    let found = io::discover_clips(src)?;
    if found.is_empty() {
        return Err(Error::MissingFile {
            path: src.to_path_buf(),
        });
    }
    Ok(found
        .into_iter()
        .map(|c| {
            let id = if c.name.is_empty() {
                src.file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "video".into())
            } else {
                c.name
            };
            SourceVideo {
                id,
                frames: c.frames,
            }
        })
        .collect())
}

fn load_hr(path: &Path, expect: (usize, usize), opts: &DatasetOptions) -> Result<Frame> {
    let f = io::load_frame(path)?;
    if f.dims() != expect {
        return Err(Error::InvalidDimensions(format!(
            "{} is {}x{} but the first frame of its video is {}x{}",
            path.display(),
            f.width(),
            f.height(),
            expect.1,
            expect.0
        )));
    }
    fit_to(&f, opts.hr_height, opts.hr_width)
}

enum VideoOutcome {
    Done(VideoEntry, Vec<ClipEntry>),
    Skipped(SkippedVideo),
}

fn process_video(
    index: usize,
    video: &SourceVideo,
    split: Split,
    out: &Path,
    opts: &DatasetOptions,
) -> Result<VideoOutcome> {
    let source_dims = io::png_dims(&video.frames[0])?;
    let len = video.frames.len();
    let clip_len = opts.clip_len(split);
    let policy = Policy::for_split(split);
    let mut count = match policy {
        Policy::Train => opts.train_clips_per_video,
        Policy::Eval => {
            let [lo, hi] = opts.eval_clips_per_video;
            seed::rng(opts.seed, Stream::ClipCount, index as u64).random_range(lo..=hi)
        }
    };
    count = count.min(len / clip_len);
    if count == 0 {
        return Ok(VideoOutcome::Skipped(SkippedVideo {
            video_id: video.id.clone(),
            reason: format!("{len} frames cannot hold a {clip_len}-frame clip"),
        }));
    }

    let lr: Vec<Frame> = video
        .frames
        .iter()
        .map(|p| downscale(&load_hr(p, source_dims, opts)?, opts.scale_factor))
        .collect::<Result<_>>()?;
    let flow = FlowStats::of_frames(&lr)?;
    drop(lr);

    let video_seed = seed::derive(opts.seed, Stream::ClipSeed, index as u64);
    // Greedy placement can strand the last window; take fewer rather than fail.
    let windows = loop {
        match select_clips(len, &flow, policy, count, clip_len, video_seed) {
            Ok(w) => break w,
            Err(Error::InsufficientFrames { .. }) if count > 1 => count -= 1,
            Err(e) => return Err(e),
        }
    };

    let mut clips = Vec::with_capacity(windows.len());
    for (k, w) in windows.iter().enumerate() {
        let clip_id = format!("{}_{k:03}", video.id);
        let clip_seed = seed::derive(video_seed, Stream::ClipSeed, k as u64);
        let gated_fraction = write_clip(
            &video.frames[w.start..w.end()],
            source_dims,
            &out.join(split.name()).join(&clip_id),
            &clip_id,
            clip_seed,
            opts,
        )?;
        clips.push(ClipEntry {
            clip_id,
            video_id: video.id.clone(),
            split,
            start: w.start,
            end: w.end(),
            length: w.len,
            mean_flow: w.mean_flow,
            gated_fraction,
        });
    }
    let entry = VideoEntry {
        video_id: video.id.clone(),
        frame_count: len,
        width: source_dims.1,
        height: source_dims.0,
        split,
    };
    Ok(VideoOutcome::Done(entry, clips))
}

/// Renders one clip. Returns the gated fraction when masks were made.
fn write_clip(
    sources: &[PathBuf],
    source_dims: (usize, usize),
    dir: &Path,
    clip_id: &str,
    clip_seed: u64,
    opts: &DatasetOptions,
) -> Result<Option<f64>> {
    let hr = Clip::new(
        sources
            .iter()
            .map(|p| load_hr(p, source_dims, opts))
            .collect::<Result<_>>()?,
    )?;
    let mut record = ClipRecord {
        clip_id: clip_id.to_string(),
        seed: clip_seed,
        blur_passes: Vec::new(),
        gated: Vec::new(),
        degrade: Vec::new(),
    };

    let (input, masks) = match &opts.blur {
        Some(b) => {
            let params = b.params(clip_seed)?;
            let outcome = blur::synthesize_clip(&hr, &params)?;
            let masks = hr
                .frames()
                .iter()
                .zip(outcome.clip.frames())
                .map(|(c, bl)| mask::make_mask_gt(c, bl, &opts.mask))
                .collect::<Result<Vec<_>>>()?;
            record.blur_passes = outcome.passes;
            record.gated = masks.iter().map(|m| m.gated).collect();
            (outcome.clip, Some(masks))
        }
        None => (hr.clone(), None),
    };

    let lr: Vec<Frame> = match &opts.degrade {
        Some(cfg) => input
            .frames()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let cfg = DegradeConfig {
                    seed: degrade::frame_seed(clip_seed, i as u64),
                    ..cfg.clone()
                };
                let (out, trace) = degrade::degrade_frame(f, &cfg)?;
                Ok((out, trace))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .map(|(f, t)| {
                record.degrade.push(t);
                f
            })
            .collect(),
        None => input
            .frames()
            .iter()
            .map(|f| downscale(f, opts.scale_factor))
            .collect::<Result<_>>()?,
    };

    let gated_fraction = masks
        .as_ref()
        .map(|m| m.iter().filter(|p| p.gated).count() as f64 / m.len() as f64);
    if opts.dry_run {
        return Ok(gated_fraction);
    }

    for sub in ["hr", "lr"] {
        io::create_dir_all(dir.join(sub))?;
    }
    for (i, (h, l)) in hr.frames().iter().zip(&lr).enumerate() {
        io::save_frame(h, dir.join("hr").join(io::frame_file_name(i)))?;
        io::save_frame(l, dir.join("lr").join(io::frame_file_name(i)))?;
    }
    if let Some(masks) = &masks {
        io::create_dir_all(dir.join("mask"))?;
        for (i, m) in masks.iter().enumerate() {
            io::save_mask(&m.mask_gt, dir.join("mask").join(io::frame_file_name(i)))?;
        }
    }
    io::write_json(&record, dir.join("clip.json"))?;
    Ok(gated_fraction)
}

/// Builds the dataset under `out` from the videos under `src`.
///
/// Each subdirectory of `src` holding PNG frames is one video; if `src`
/// itself holds frames it is a single video. Videos are processed in
/// parallel and the output is independent of scheduling.
pub fn build_dataset(
    src: impl AsRef<Path>,
    out: impl AsRef<Path>,
    opts: &DatasetOptions,
) -> Result<BuildReport> {
    opts.validate()?;
    let (src, out) = (src.as_ref(), out.as_ref());
    let videos = discover_videos(src)?;
    let splits = match opts.force_split {
        Some(s) => vec![s; videos.len()],
        None => assign_splits(videos.len(), opts.split_ratios, opts.seed)?,
    };
    if !opts.dry_run {
        io::create_dir_all(out)?;
    }

    let outcomes = videos
        .par_iter()
        .zip(splits.par_iter())
        .enumerate()
        .map(|(i, (v, &s))| process_video(i, v, s, out, opts))
        .collect::<Result<Vec<_>>>()?;

    let mut entries = Vec::new();
    let mut clips = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            VideoOutcome::Done(v, c) => {
                entries.push(v);
                clips.extend(c);
            }
            VideoOutcome::Skipped(s) => skipped.push(s),
        }
    }
    let manifest = DatasetManifest {
        schema_version: SCHEMA_VERSION,
        global: opts.global(),
        splits: DatasetManifest::tally(&entries, &clips),
        videos: entries,
        clips,
    };
    manifest.check_arithmetic()?;
    if !opts.dry_run {
        manifest.save(out)?;
    }
    Ok(BuildReport { manifest, skipped })
}
