use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            _ => Err(Error::param("split", format!("unknown split `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalInfo {
    pub scale_factor: usize,
    pub hr_width: usize,
    pub hr_height: usize,
    pub lr_width: usize,
    pub lr_height: usize,
    pub train_clip_len: usize,
    pub eval_clip_len: usize,
    pub seed: u64,
}

impl GlobalInfo {
    pub fn clip_len(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train_clip_len,
            Split::Valid | Split::Test => self.eval_clip_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoEntry {
    pub video_id: String,
    pub frame_count: usize,
    /// Source resolution before scaling and cropping.
    pub width: usize,
    pub height: usize,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipEntry {
    pub clip_id: String,
    pub video_id: String,
    pub split: Split,
    /// First source frame, inclusive.
    pub start: usize,
    /// Last source frame, exclusive.
    pub end: usize,
    pub length: usize,
    pub mean_flow: f64,
    /// Fraction of frames whose mask is gated in; absent when no masks
    /// were generated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gated_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitTotals {
    pub videos: usize,
    pub clips: usize,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub global: GlobalInfo,
    pub videos: Vec<VideoEntry>,
    pub clips: Vec<ClipEntry>,
    pub splits: BTreeMap<Split, SplitTotals>,
}

fn split_err(split: Split, msg: impl fmt::Display) -> Error {
    Error::Manifest(format!("split `{split}`: {msg}"))
}

impl DatasetManifest {
    /// Totals recomputed from the video and clip lists.
    pub fn tally(videos: &[VideoEntry], clips: &[ClipEntry]) -> BTreeMap<Split, SplitTotals> {
        let mut totals: BTreeMap<Split, SplitTotals> = Split::ALL
            .iter()
            .map(|&s| (s, SplitTotals::default()))
            .collect();
        for v in videos {
            totals.entry(v.split).or_default().videos += 1;
        }
        for c in clips {
            let t = totals.entry(c.split).or_default();
            t.clips += 1;
            t.frames += c.length;
        }
        totals
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        io::read_json(dir.as_ref().join(MANIFEST_FILE))
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        io::write_json(self, dir.as_ref().join(MANIFEST_FILE))
    }

    /// Checks the declared per-split totals against the clip list, clip
    /// lengths against the declared lengths, and window overlap.
    pub fn check_arithmetic(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Manifest(format!(
                "unsupported schema version {}",
                self.schema_version
            )));
        }
        let computed = Self::tally(&self.videos, &self.clips);
        for split in Split::ALL {
            let declared = self.splits.get(&split).copied().unwrap_or_default();
            let actual = computed.get(&split).copied().unwrap_or_default();
            if declared.clips != actual.clips {
                return Err(split_err(
                    split,
                    format!(
                        "declares {} clips but lists {}",
                        declared.clips, actual.clips
                    ),
                ));
            }
            if declared.frames != actual.frames {
                return Err(split_err(
                    split,
                    format!(
                        "declares {} frames but its clips hold {}",
                        declared.frames, actual.frames
                    ),
                ));
            }
            if !self.videos.is_empty() && declared.videos != actual.videos {
                return Err(split_err(
                    split,
                    format!(
                        "declares {} videos but lists {}",
                        declared.videos, actual.videos
                    ),
                ));
            }
        }

        let mut ids = BTreeSet::new();
        let mut windows: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
        for c in &self.clips {
            if !ids.insert(c.clip_id.as_str()) {
                return Err(split_err(
                    c.split,
                    format!("duplicate clip id `{}`", c.clip_id),
                ));
            }
            let want = self.global.clip_len(c.split);
            if c.length != want {
                return Err(split_err(
                    c.split,
                    format!(
                        "clip `{}` has {} frames, expected {want}",
                        c.clip_id, c.length
                    ),
                ));
            }
            if c.end < c.start || c.end - c.start != c.length {
                return Err(split_err(
                    c.split,
                    format!(
                        "clip `{}` range {}..{} disagrees with its length",
                        c.clip_id, c.start, c.end
                    ),
                ));
            }
            windows
                .entry(&c.video_id)
                .or_default()
                .push((c.start, c.end));
        }
        for (video, mut w) in windows {
            w.sort_unstable();
            if w.windows(2).any(|p| p[1].0 < p[0].1) {
                return Err(Error::Manifest(format!(
                    "video `{video}` has overlapping clips"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of [`validate_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub splits: BTreeMap<Split, SplitTotals>,
    pub clips_checked: usize,
    pub files_checked: usize,
}

fn check_dir(dir: &Path, split: Split, expected: usize, dims: (usize, usize)) -> Result<usize> {
    let files =
        io::list_frames(dir).map_err(|e| split_err(split, format!("{}: {e}", dir.display())))?;
    if files.len() != expected {
        return Err(split_err(
            split,
            format!(
                "{} holds {} frames, expected {expected}",
                dir.display(),
                files.len()
            ),
        ));
    }
    for f in &files {
        let got = io::png_dims(f)?;
        if got != dims {
            return Err(split_err(
                split,
                format!(
                    "{} is {}x{}, expected {}x{}",
                    f.display(),
                    got.1,
                    got.0,
                    dims.1,
                    dims.0
                ),
            ));
        }
    }
    Ok(files.len())
}

/// Re-scans a dataset directory against its manifest.
pub fn validate_dataset(root: impl AsRef<Path>) -> Result<ValidationReport> {
    let root = root.as_ref();
    let manifest = DatasetManifest::load(root)?;
    manifest.check_arithmetic()?;
    let g = &manifest.global;
    if g.hr_height != g.lr_height * g.scale_factor || g.hr_width != g.lr_width * g.scale_factor {
        return Err(Error::Manifest(format!(
            "LR {}x{} is not HR {}x{} divided by {}",
            g.lr_width, g.lr_height, g.hr_width, g.hr_height, g.scale_factor
        )));
    }
    let mut files_checked = 0;
    for c in &manifest.clips {
        let dir = root.join(c.split.name()).join(&c.clip_id);
        files_checked += check_dir(
            &dir.join("hr"),
            c.split,
            c.length,
            (g.hr_height, g.hr_width),
        )?;
        files_checked += check_dir(
            &dir.join("lr"),
            c.split,
            c.length,
            (g.lr_height, g.lr_width),
        )?;
        if c.gated_fraction.is_some() {
            files_checked += check_dir(
                &dir.join("mask"),
                c.split,
                c.length,
                (g.lr_height, g.lr_width),
            )?;
        }
    }
    Ok(ValidationReport {
        splits: manifest.splits.clone(),
        clips_checked: manifest.clips.len(),
        files_checked,
    })
}
