#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use blursynth::frame::Frame;
use blursynth::io;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn noise_frame(seed: u64, h: usize, w: usize) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Frame::from_fn(h, w, |_, _, _| rng.random::<f32>()).unwrap()
}

/// Smooth random texture: a few low-frequency sinusoids per channel.
pub fn texture(seed: u64, h: usize, w: usize) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<[f32; 4]> = (0..12)
        .map(|_| {
            [
                rng.random_range(0.02..0.35),
                rng.random_range(0.02..0.35),
                rng.random_range(0.0..std::f32::consts::TAU),
                rng.random_range(0.05..0.15),
            ]
        })
        .collect();
    Frame::from_fn(h, w, |y, x, c| {
        let mut v = 0.5;
        for (i, [fy, fx, ph, amp]) in waves.iter().enumerate() {
            if i % 3 == c {
                v += amp * (fy * y as f32 + fx * x as f32 + ph).sin();
            }
        }
        v
    })
    .unwrap()
}

/// `len` frames of `base` panned horizontally by `speed(t)` pixels per frame.
pub fn panning(
    base: &Frame,
    h: usize,
    w: usize,
    len: usize,
    speed: impl Fn(usize) -> usize,
) -> Vec<Frame> {
    let mut offset = 0;
    (0..len)
        .map(|t| {
            if t > 0 {
                offset += speed(t);
            }
            base.crop(0, offset, h, w).unwrap()
        })
        .collect()
}

pub fn write_frames(dir: &Path, frames: &[Frame]) {
    io::create_dir_all(dir).unwrap();
    for (i, f) in frames.iter().enumerate() {
        io::save_frame(f, dir.join(io::frame_file_name(i))).unwrap();
    }
}

/// Relative path to file bytes for every file below `root`.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    if root.exists() {
        walk(root, root, &mut out);
    }
    out
}

pub fn blursynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blursynth"))
        .args(args)
        .env_remove("BLURSYNTH_JOBS")
        .output()
        .unwrap()
}

pub fn summary(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().last().unwrap_or_else(|| {
        panic!(
            "no stdout; stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    });
    serde_json::from_str(line).unwrap()
}

pub fn error_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
