//! Command-line front end.
//!
//! Every subcommand prints a one-line JSON summary as the last line of
//! stdout. Usage errors exit with 2, processing failures exit with 1 and a
//! JSON error object on stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::blur::{self, BlurParams, PassRecord};
use crate::dataset::{self, DatasetOptions, Split};
use crate::degrade::{self, DegradeConfig, DegradeTrace};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::io::{self, ClipDir};
use crate::mask::{self, MaskParams};
use crate::metrics::{Metric, MetricReport};
use crate::seed::{self, Stream};

#[derive(Debug, Parser)]
#[command(
    name = "blursynth",
    version,
    about = "Motion-blur video super-resolution data toolkit"
)]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "BLURSYNTH_JOBS", default_value_t = 0)]
    jobs: usize,

    /// Resolve and print parameters without writing files.
    #[arg(long, global = true)]
    dry_run: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize motion blur over clips of PNG frames.
    Synth(SynthArgs),
    /// Derive blurring-mask ground truth from clear/blurred frame pairs.
    Maskgt(MaskArgs),
    /// Run the degradation chain, producing LR frames.
    Degrade(DegradeArgs),
    /// Build a train/valid/test dataset from source videos.
    Dataset(DatasetArgs),
    /// Compare two frame directories.
    Metrics(MetricsArgs),
    /// Check a dataset directory against its manifest.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    order: u8,
    /// Frames stacked per output frame (3, 5 or 7).
    #[arg(long, required_unless_present = "random")]
    n_frames: Option<usize>,
    /// Stacking coefficient in [0, 1/N].
    #[arg(long, required_unless_present = "random")]
    r: Option<f64>,
    /// Per-frame synthesis probability in (0.5, 1].
    #[arg(long)]
    p: Option<f64>,
    /// Sample N, r and p per clip.
    #[arg(long, conflicts_with_all = ["n_frames", "r", "p"])]
    random: bool,
}

#[derive(Debug, Args)]
struct MaskArgs {
    #[arg(long)]
    clear: PathBuf,
    #[arg(long)]
    blur: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100.0)]
    k: f64,
    #[arg(long, default_value_t = 0.6)]
    gate_threshold: f64,
}

#[derive(Debug, Args)]
struct DegradeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON degradation config; its seed field is replaced by `--seed`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of degradation stages when no config is given.
    #[arg(long, default_value_t = 2, conflicts_with = "config")]
    order: usize,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON dataset options; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Synthesize motion blur with per-clip sampled parameters and write masks.
    #[arg(long)]
    blur: bool,
    /// Blur synthesis order, implies `--blur`.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    order: Option<u8>,
    /// Produce LR frames with the default degradation chain.
    #[arg(long)]
    degrade: bool,
    /// Put every video in one split.
    #[arg(long)]
    split: Option<Split>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    /// Reference frames.
    #[arg(long)]
    reference: PathBuf,
    /// Frames under test.
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "l1,psnr,ssim")]
    metrics: Vec<Metric>,
    /// Write the full report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Merge per-frame scores from an external report (same JSON schema).
    #[arg(long)]
    merge: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    dataset: PathBuf,
}

impl clap::ValueEnum for Metric {
    fn value_variants<'a>() -> &'a [Self] {
        &Metric::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

impl clap::ValueEnum for Split {
    fn value_variants<'a>() -> &'a [Self] {
        &Split::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => return fail(&Error::param("jobs", e.to_string())),
    };
    let start = Instant::now();
    match pool.install(|| dispatch(&cli)) {
        Ok(mut summary) => {
            summary["command"] = json!(command_name(&cli.command));
            summary["dry_run"] = json!(cli.dry_run);
            summary["jobs"] = json!(pool.current_num_threads());
            summary["wall_time_s"] = json!(start.elapsed().as_secs_f64());
            println!("{summary}");
            0
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> i32 {
    eprintln!(
        "{}",
        json!({ "error": { "kind": e.kind(), "message": e.to_string() } })
    );
    1
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Synth(_) => "synth",
        Command::Maskgt(_) => "maskgt",
        Command::Degrade(_) => "degrade",
        Command::Dataset(_) => "dataset",
        Command::Metrics(_) => "metrics",
        Command::Validate(_) => "validate",
    }
}

fn dispatch(cli: &Cli) -> Result<Value> {
    let dry = cli.dry_run;
    match &cli.command {
        Command::Synth(a) => synth(a, dry),
        Command::Maskgt(a) => maskgt(a, dry),
        Command::Degrade(a) => degrade_cmd(a, dry),
        Command::Dataset(a) => dataset_cmd(a, dry),
        Command::Metrics(a) => metrics_cmd(a, dry),
        Command::Validate(a) => validate(a),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn clip_out_dir(out: &Path, clip: &ClipDir) -> PathBuf {
    if clip.name.is_empty() {
        out.to_path_buf()
    } else {
        out.join(&clip.name)
    }
}

fn discover_nonempty(root: &Path) -> Result<Vec<ClipDir>> {
    let clips = io::discover_clips(root)?;
    if clips.is_empty() {
        return Err(Error::MissingFile {
            path: root.join("*.png"),
        });
    }
    Ok(clips)
}

fn save_frames(frames: &[Frame], dir: &Path) -> Result<()> {
    io::create_dir_all(dir)?;
    frames
        .par_iter()
        .enumerate()
        .try_for_each(|(i, f)| io::save_frame(f, dir.join(io::frame_file_name(i))))
}

/// Seed used for clip `index` of a batch run under `seed`.
pub fn clip_seed(seed: u64, index: usize) -> u64 {
    seed::derive(seed, Stream::ClipSeed, index as u64)
}

#[derive(Serialize)]
struct SynthSidecar<'a> {
    clip: &'a str,
    seed: u64,
    passes: &'a [PassRecord],
}

fn synth(a: &SynthArgs, dry: bool) -> Result<Value> {
    let clips = discover_nonempty(&a.input)?;
    let mut params = Vec::with_capacity(clips.len());
    for (i, clip) in clips.iter().enumerate() {
        let s = clip_seed(a.seed, i);
        let p = if a.random {
            BlurParams {
                order: a.order,
                ..blur::sample_params(s)
            }
        } else {
            // clap guarantees n and r unless --random
            BlurParams::new(
                a.n_frames.unwrap_or_default(),
                a.r.unwrap_or_default(),
                a.p.unwrap_or(1.0),
                a.order,
                s,
            )?
        };
        if clip.frames.len() < p.n {
            return Err(Error::ClipTooShort {
                len: clip.frames.len(),
                required: p.n,
            });
        }
        params.push(p);
    }

    let mut frames = 0;
    let mut applied = 0;
    if !dry {
        for (clip, p) in clips.iter().zip(&params) {
            let input = io::load_clip(&clip.frames)?;
            let outcome = blur::synthesize_clip(&input, p)?;
            let dir = clip_out_dir(&a.out, clip);
            save_frames(outcome.clip.frames(), &dir)?;
            io::write_json(
                &SynthSidecar {
                    clip: &clip.name,
                    seed: p.seed,
                    passes: &outcome.passes,
                },
                dir.join("blur.json"),
            )?;
            frames += outcome.clip.len();
            applied += outcome.applied.iter().filter(|&&x| x).count();
        }
    }
    let per_clip: Vec<Value> = clips
        .iter()
        .zip(&params)
        .map(|(c, p)| json!({ "clip": c.name, "params": to_value(p) }))
        .collect();
    Ok(json!({
        "seed": a.seed,
        "order": a.order,
        "random": a.random,
        "clips": clips.len(),
        "frames": frames,
        "applied": applied,
        "params": per_clip,
    }))
}

#[derive(Serialize)]
struct GateRecord {
    frame: usize,
    mean: f64,
    gated: bool,
}

fn maskgt(a: &MaskArgs, dry: bool) -> Result<Value> {
    let params = MaskParams {
        k: a.k,
        gate_threshold: a.gate_threshold,
        ..MaskParams::default()
    };
    params.validate()?;
    let clear = discover_nonempty(&a.clear)?;
    let blurred = discover_nonempty(&a.blur)?;
    if clear.len() != blurred.len() {
        return Err(Error::FrameCountMismatch {
            left: clear.len(),
            right: blurred.len(),
        });
    }
    for (c, b) in clear.iter().zip(&blurred) {
        if c.name != b.name {
            return Err(Error::param(
                "blur",
                format!("clip `{}` has no counterpart (found `{}`)", c.name, b.name),
            ));
        }
        if c.frames.len() != b.frames.len() {
            return Err(Error::FrameCountMismatch {
                left: c.frames.len(),
                right: b.frames.len(),
            });
        }
    }

    let total: usize = clear.iter().map(|c| c.frames.len()).sum();
    let mut masks = 0;
    let mut gated = 0;
    if !dry {
        for (c, b) in clear.iter().zip(&blurred) {
            let pairs = c
                .frames
                .par_iter()
                .zip(&b.frames)
                .map(|(cp, bp)| {
                    let clear = io::load_frame(cp)?;
                    let blur = io::load_frame(bp)?;
                    mask::make_mask_gt(&clear, &blur, &params)
                })
                .collect::<Result<Vec<_>>>()?;
            let dir = clip_out_dir(&a.out, c);
            io::create_dir_all(&dir)?;
            pairs.par_iter().enumerate().try_for_each(|(i, m)| {
                io::save_mask(&m.mask_gt, dir.join(io::frame_file_name(i)))
            })?;
            let records: Vec<GateRecord> = pairs
                .iter()
                .enumerate()
                .map(|(i, m)| GateRecord {
                    frame: i,
                    mean: m.mask_gt.mean(),
                    gated: m.gated,
                })
                .collect();
            io::write_json(&records, dir.join("gating.json"))?;
            masks += pairs.len();
            gated += pairs.iter().filter(|m| m.gated).count();
        }
    }
    let fraction = if masks > 0 {
        gated as f64 / masks as f64
    } else {
        0.0
    };
    Ok(json!({
        "params": to_value(&params),
        "clips": clear.len(),
        "frames": total,
        "masks": masks,
        "gated": gated,
        "gated_fraction": fraction,
    }))
}

fn degrade_cmd(a: &DegradeArgs, dry: bool) -> Result<Value> {
    let mut config: DegradeConfig = match &a.config {
        Some(p) => io::read_json(p)?,
        None => DegradeConfig::with_order(a.order, a.seed),
    };
    config.seed = a.seed;
    config.validate()?;
    let clips = discover_nonempty(&a.input)?;
    let mut frames = 0;
    if !dry {
        for (ci, clip) in clips.iter().enumerate() {
            let base = clip_seed(a.seed, ci);
            let results = clip
                .frames
                .par_iter()
                .enumerate()
                .map(|(i, path)| {
                    let f = io::load_frame(path)?;
                    let cfg = DegradeConfig {
                        seed: degrade::frame_seed(base, i as u64),
                        ..config.clone()
                    };
                    degrade::degrade_frame(&f, &cfg)
                })
                .collect::<Result<Vec<_>>>()?;
            let (out, traces): (Vec<Frame>, Vec<DegradeTrace>) = results.into_iter().unzip();
            let dir = clip_out_dir(&a.out, clip);
            save_frames(&out, &dir)?;
            io::write_json(&traces, dir.join("traces.json"))?;
            frames += out.len();
        }
    }
    Ok(json!({
        "seed": a.seed,
        "config": to_value(&config),
        "clips": clips.len(),
        "frames": frames,
    }))
}

fn dataset_cmd(a: &DatasetArgs, dry: bool) -> Result<Value> {
    let mut opts: DatasetOptions = match &a.config {
        Some(p) => io::read_json(p)?,
        None => DatasetOptions::default(),
    };
    opts.seed = a.seed;
    opts.dry_run = dry;
    if a.blur || a.order.is_some() {
        let mut b = opts.blur.take().unwrap_or_default();
        if let Some(o) = a.order {
            b.order = o;
        }
        opts.blur = Some(b);
    }
    if a.degrade && opts.degrade.is_none() {
        opts.degrade = Some(DegradeConfig::default());
    }
    if a.split.is_some() {
        opts.force_split = a.split;
    }
    let report = dataset::build_dataset(&a.src, &a.out, &opts)?;
    Ok(json!({
        "seed": a.seed,
        "options": to_value(&opts),
        "videos": report.manifest.videos.len(),
        "clips": report.manifest.clips.len(),
        "splits": to_value(&report.manifest.splits),
        "skipped": to_value(&report.skipped),
    }))
}

fn metrics_cmd(a: &MetricsArgs, dry: bool) -> Result<Value> {
    let reference = io::list_frames(&a.reference)?;
    let test = io::list_frames(&a.test)?;
    if reference.len() != test.len() {
        return Err(Error::FrameCountMismatch {
            left: reference.len(),
            right: test.len(),
        });
    }
    let names: Vec<&str> = a.metrics.iter().map(|m| m.name()).collect();
    if dry {
        return Ok(json!({ "frames": reference.len(), "metrics": names }));
    }
    let per_frame = reference
        .par_iter()
        .zip(&test)
        .map(|(r, t)| {
            let (r, t) = (io::load_frame(r)?, io::load_frame(t)?);
            a.metrics
                .iter()
                .map(|m| m.compute(&r, &t))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = MetricReport::from_values(
        reference.len(),
        a.metrics.iter().enumerate().map(|(k, m)| {
            (
                m.name().to_string(),
                per_frame.iter().map(|v| v[k]).collect(),
            )
        }),
    );
    if let Some(p) = &a.merge {
        report.merge(io::read_json(p)?)?;
    }
    if let Some(p) = &a.out {
        io::write_json(&report, p)?;
    }
    let means: serde_json::Map<String, Value> = report
        .metrics
        .iter()
        .map(|(k, s)| (k.clone(), finite_or_null(s.mean)))
        .collect();
    Ok(json!({ "frames": report.frames, "metrics": names, "mean": means }))
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn validate(a: &ValidateArgs) -> Result<Value> {
    let report = dataset::validate_dataset(&a.dataset)?;
    Ok(json!({
        "dataset": a.dataset,
        "valid": true,
        "report": to_value(&report),
    }))
}
