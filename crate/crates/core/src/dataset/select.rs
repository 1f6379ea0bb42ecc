use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowStats;
use crate::seed::{self, Stream};

use super::manifest::Split;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Prefer low-motion windows (lower half of the flow ranking).
    Train,
    /// Prefer fast-motion windows (upper quartile of the flow ranking).
    Eval,
}

impl Policy {
    pub fn for_split(split: Split) -> Self {
        match split {
            Split::Train => Policy::Train,
            Split::Valid | Split::Test => Policy::Eval,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipWindow {
    pub start: usize,
    pub len: usize,
    pub mean_flow: f64,
}

impl ClipWindow {
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    fn overlaps(&self, other: &ClipWindow) -> bool {
        self.start < other.end() && other.start < self.end()
    }
}

/// Picks `count` non-overlapping windows of `clip_len` frames.
///
/// Candidates are every window start; each window scores the mean flow of
/// the frame pairs inside it. The preferred pool is every window at or
/// below the median score (train) or at or above the upper-quartile score
/// (eval), so ties keep the pool wide. Windows are drawn uniformly from
/// the shuffled pool; if it cannot supply enough disjoint windows the rest
/// of the ranking is used in preference order.
pub fn select_clips(
    video_len: usize,
    flow: &FlowStats,
    policy: Policy,
    count: usize,
    clip_len: usize,
    seed: u64,
) -> Result<Vec<ClipWindow>> {
    if clip_len == 0 {
        return Err(Error::param("clip_len", "must be at least 1"));
    }
    if video_len < clip_len || count * clip_len > video_len {
        return Err(Error::InsufficientFrames {
            requested: count,
            clip_len,
            available: video_len,
        });
    }
    if flow.pair_magnitudes.len() + 1 != video_len {
        return Err(Error::param(
            "flow",
            format!(
                "{} frame pairs do not describe a {video_len}-frame video",
                flow.pair_magnitudes.len()
            ),
        ));
    }
    if count == 0 {
        return Ok(Vec::new());
    }

    let windows: Vec<ClipWindow> = (0..=video_len - clip_len)
        .map(|start| ClipWindow {
            start,
            len: clip_len,
            mean_flow: flow.window_mean(start, clip_len),
        })
        .collect();

    // Preference order: train ascending flow, eval descending; ties by start.
    let mut ranked = windows.clone();
    ranked.sort_by(|a, b| {
        let ord = a.mean_flow.total_cmp(&b.mean_flow);
        let ord = if policy == Policy::Eval {
            ord.reverse()
        } else {
            ord
        };
        ord.then(a.start.cmp(&b.start))
    });
    let n = ranked.len();
    let cutoff_rank = match policy {
        Policy::Train => n.div_ceil(2),
        Policy::Eval => n.div_ceil(4),
    };
    let cutoff = ranked[cutoff_rank - 1].mean_flow;
    let mut pool: Vec<ClipWindow> = windows
        .iter()
        .copied()
        .filter(|w| match policy {
            Policy::Train => w.mean_flow <= cutoff,
            Policy::Eval => w.mean_flow >= cutoff,
        })
        .collect();

    let mut rng = seed::rng(seed, Stream::ClipSelect, 0);
    pool.shuffle(&mut rng);

    let mut chosen: Vec<ClipWindow> = Vec::with_capacity(count);
    for w in pool.iter().chain(ranked.iter()) {
        if chosen.len() == count {
            break;
        }
        if chosen.iter().all(|c| !c.overlaps(w)) {
            chosen.push(*w);
        }
    }
    if chosen.len() < count {
        return Err(Error::InsufficientFrames {
            requested: count,
            clip_len,
            available: video_len,
        });
    }
    chosen.sort_by_key(|w| w.start);
    Ok(chosen)
}

/// Assigns each of `n` videos to a split so that the counts follow
/// `ratios` (train, test, valid) as closely as rounding allows.
pub fn assign_splits(n: usize, ratios: [u32; 3], seed: u64) -> Result<Vec<Split>> {
    let total: u32 = ratios.iter().sum();
    if total == 0 {
        return Err(Error::param("split_ratios", "must not all be zero"));
    }
    let share = |r: u32| ((n as f64) * f64::from(r) / f64::from(total)).round() as usize;
    let n_train = share(ratios[0]).min(n);
    let n_test = share(ratios[1]).min(n - n_train);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed, Stream::SplitAssign, 0));
    let mut splits = vec![Split::Valid; n];
    for (rank, &video) in order.iter().enumerate() {
        splits[video] = if rank < n_train {
            Split::Train
        } else if rank < n_train + n_test {
            Split::Test
        } else {
            Split::Valid
        };
    }
    Ok(splits)
}
