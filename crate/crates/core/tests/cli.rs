mod common;

use std::fs;

use blursynth::dataset::DatasetManifest;
use blursynth::degrade::{replay_trace, DegradeTrace};
use blursynth::io;
use common::*;
use tempfile::TempDir;

/// Three clips of moving texture under `root/{a,b,c}`.
fn clips_fixture(root: &std::path::Path, len: usize) {
    for (i, name) in ["a", "b", "c"].iter().enumerate() {
        let base = texture(i as u64, 24, 80);
        write_frames(
            &root.join(name),
            &panning(&base, 24, 32, len, |t| t % 3 + 1),
        );
    }
}

#[test]
fn synth_is_byte_reproducible() {
    let tmp = TempDir::new().unwrap();
    let src = tmp.path().join("clips");
    clips_fixture(&src, 8);
    let (o1, o2) = (tmp.path().join("o1"), tmp.path().join("o2"));
    for (out, jobs) in [(&o1, "1"), (&o2, "4")] {
        let r = blursynth(&[
            "--jobs",
            jobs,
            "synth",
            "--in",
            s(&src),
            "--out",
            s(out),
            "--seed",
            "7",
            "--order",
            "1",
            "--n-frames",
            "3",
            "--r",
            "0.3",
            "--p",
            "0.9",
        ]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        let sum = summary(&r);
        assert_eq!(sum["seed"], 7);
        assert_eq!(sum["frames"], 24);
        assert_eq!(sum["clips"], 3);
    }
    let (t1, t2) = (tree(&o1), tree(&o2));
    assert_eq!(t1.len(), 3 * 9);
    assert_eq!(t1, t2);
}

#[test]
fn synth_random_and_order_two() {
    let tmp = TempDir::new().unwrap();
    let src = tmp.path().join("clips");
    clips_fixture(&src, 9);
    let out = tmp.path().join("out");
    let r = blursynth(&[
        "synth",
        "--in",
        s(&src),
        "--out",
        s(&out),
        "--seed",
        "3",
        "--order",
        "2",
        "--random",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let sum = summary(&r);
    for p in sum["params"].as_array().unwrap() {
        assert_eq!(p["params"]["order"], 2);
        let n = p["params"]["n"].as_u64().unwrap();
        assert!([3, 5, 7].contains(&n));
    }
    let sidecar: serde_json::Value = io::read_json(out.join("a/blur.json")).unwrap();
    assert_eq!(sidecar["passes"].as_array().unwrap().len(), 2);
}

#[test]
fn dry_run_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    let src = tmp.path().join("clips");
    clips_fixture(&src, 8);
    let out = tmp.path().join("out");
    let r = blursynth(&[
        "--dry-run",
        "synth",
        "--in",
        s(&src),
        "--out",
        s(&out),
        "--random",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let sum = summary(&r);
    assert_eq!(sum["dry_run"], true);
    assert_eq!(sum["params"].as_array().unwrap().len(), 3);
    assert!(!out.exists());

    let r = blursynth(&[
        "--dry-run",
        "degrade",
        "--in",
        s(&src),
        "--out",
        s(&out),
        "--seed",
        "1",
    ]);
    assert!(r.status.success());
    assert_eq!(summary(&r)["config"]["stages"].as_array().unwrap().len(), 2);
    assert!(!out.exists());
}

#[test]
fn usage_and_processing_errors() {
    let r = blursynth(&["synth", "--bogus"]);
    assert_eq!(r.status.code(), Some(2));
    let r = blursynth(&["frobnicate"]);
    assert_eq!(r.status.code(), Some(2));
    let r = blursynth(&["synth", "--in", "x", "--out", "y", "--random", "--r", "0.1"]);
    assert_eq!(r.status.code(), Some(2));

    let tmp = TempDir::new().unwrap();
    let src = tmp.path().join("clips");
    clips_fixture(&src, 6);
    let r = blursynth(&[
        "synth",
        "--in",
        s(&src),
        "--out",
        s(&tmp.path().join("o")),
        "--n-frames",
        "4",
        "--r",
        "0.1",
    ]);
    assert_eq!(r.status.code(), Some(1));
    let err = error_json(&r);
    assert_eq!(err["error"]["kind"], "invalid_parameter");
    assert!(err["error"]["message"].as_str().unwrap().contains("`n`"));

    let r = blursynth(&[
        "synth",
        "--in",
        s(&tmp.path().join("missing")),
        "--out",
        "o",
        "--random",
    ]);
    assert_eq!(r.status.code(), Some(1));
    assert_eq!(error_json(&r)["error"]["kind"], "missing_file");
}

#[test]
fn maskgt_counts_masks_and_reports_gating() {
    let tmp = TempDir::new().unwrap();
    let clear = tmp.path().join("hr");
    clips_fixture(&clear, 5);
    let blurred = tmp.path().join("blurred");
    let r = blursynth(&[
        "synth",
        "--in",
        s(&clear),
        "--out",
        s(&blurred),
        "--n-frames",
        "3",
        "--r",
        "0.33",
        "--p",
        "1",
    ]);
    assert!(r.status.success());
    let out = tmp.path().join("masks");
    let r = blursynth(&[
        "maskgt",
        "--clear",
        s(&clear),
        "--blur",
        s(&blurred),
        "--k",
        "100",
        "--out",
        s(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let sum = summary(&r);
    assert_eq!(sum["masks"], 15);
    assert_eq!(sum["frames"], 15);

    let mut gated = 0;
    for name in ["a", "b", "c"] {
        let files = io::list_frames(out.join(name)).unwrap();
        assert_eq!(files.len(), 5);
        for f in &files {
            let m = io::load_mask(f).unwrap();
            assert_eq!(m.dims(), (6, 8));
        }
        let records: Vec<serde_json::Value> =
            io::read_json(out.join(name).join("gating.json")).unwrap();
        gated += records.iter().filter(|r| r["gated"] == true).count();
        // boundary frames are untouched, so their masks are all ones
        let first = io::load_mask(&files[0]).unwrap();
        assert!(first.data().iter().all(|&v| v == 1.0));
    }
    assert_eq!(sum["gated"], gated);
    let frac = sum["gated_fraction"].as_f64().unwrap();
    assert!((frac - gated as f64 / 15.0).abs() < 1e-12);
}

#[test]
fn degrade_writes_replayable_traces() {
    let tmp = TempDir::new().unwrap();
    let src = tmp.path().join("clips");
    clips_fixture(&src, 3);
    let (o1, o2) = (tmp.path().join("o1"), tmp.path().join("o2"));
    for o in [&o1, &o2] {
        let r = blursynth(&["degrade", "--in", s(&src), "--out", s(o), "--seed", "11"]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        assert_eq!(summary(&r)["frames"], 9);
    }
    assert_eq!(tree(&o1), tree(&o2));

    let traces: Vec<DegradeTrace> = io::read_json(o1.join("b/traces.json")).unwrap();
    assert_eq!(traces.len(), 3);
    for (i, t) in traces.iter().enumerate() {
        let input = io::load_frame(src.join("b").join(io::frame_file_name(i))).unwrap();
        let saved = io::load_frame(o1.join("b").join(io::frame_file_name(i))).unwrap();
        assert_eq!(saved.dims(), (6, 8));
        assert_eq!(replay_trace(&input, t).unwrap().quantized(), saved);
    }

    let cfg = tmp.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"stages": [{"blur": {"probability": 0.0}}], "final_scale": 4}"#,
    )
    .unwrap();
    let r = blursynth(&[
        "--dry-run",
        "degrade",
        "--in",
        s(&src),
        "--out",
        "x",
        "--config",
        s(&cfg),
        "--seed",
        "5",
    ]);
    assert!(r.status.success());
    let sum = summary(&r);
    assert_eq!(sum["config"]["seed"], 5);
    assert_eq!(sum["config"]["stages"][0]["blur"]["probability"], 0.0);

    fs::write(&cfg, r#"{"stages": [], "colour": 1}"#).unwrap();
    let r = blursynth(&[
        "degrade",
        "--in",
        s(&src),
        "--out",
        "x",
        "--config",
        s(&cfg),
    ]);
    assert_eq!(r.status.code(), Some(1));
    assert_eq!(error_json(&r)["error"]["kind"], "json");
}

#[test]
fn metrics_report_and_count_mismatch() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let frames: Vec<_> = (0..4).map(|i| texture(i, 24, 24)).collect();
    write_frames(&a, &frames);
    let report = tmp.path().join("report.json");
    let r = blursynth(&[
        "metrics",
        "--reference",
        s(&a),
        "--test",
        s(&a),
        "--out",
        s(&report),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let sum = summary(&r);
    assert_eq!(sum["frames"], 4);
    assert_eq!(sum["mean"]["l1"], 0.0);
    assert_eq!(sum["mean"]["ssim"], 1.0);
    assert!(sum["mean"]["psnr"].is_null());
    let full: serde_json::Value = io::read_json(&report).unwrap();
    assert_eq!(full["metrics"]["l1"]["values"].as_array().unwrap().len(), 4);

    let b = tmp.path().join("b");
    write_frames(&b, &frames[..3]);
    let r = blursynth(&["metrics", "--reference", s(&a), "--test", s(&b)]);
    assert_eq!(r.status.code(), Some(1));
    assert_eq!(error_json(&r)["error"]["kind"], "frame_count_mismatch");
}

#[test]
fn dataset_and_validate() {
    let tmp = TempDir::new().unwrap();
    let src = tmp.path().join("src");
    for v in 0..3 {
        let base = texture(100 + v, 40, 200);
        write_frames(
            &src.join(format!("v{v}")),
            &panning(&base, 40, 60, 20, |t| t % 4),
        );
    }
    let cfg = tmp.path().join("opts.json");
    fs::write(
        &cfg,
        r#"{"hr_height": 32, "hr_width": 48, "train_clips_per_video": 2, "train_clip_len": 7, "eval_clip_len": 7}"#,
    )
    .unwrap();
    let out = tmp.path().join("ds");
    let r = blursynth(&[
        "dataset",
        "--src",
        s(&src),
        "--out",
        s(&out),
        "--config",
        s(&cfg),
        "--seed",
        "2",
        "--blur",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let sum = summary(&r);
    assert_eq!(sum["clips"], 6);
    assert_eq!(sum["splits"]["train"]["frames"], 42);

    let r = blursynth(&["validate", "--dataset", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(summary(&r)["valid"], true);

    let mut m = DatasetManifest::load(&out).unwrap();
    m.splits
        .get_mut(&blursynth::dataset::Split::Train)
        .unwrap()
        .frames += 1;
    m.save(&out).unwrap();
    let r = blursynth(&["validate", "--dataset", s(&out)]);
    assert_eq!(r.status.code(), Some(1));
    let err = error_json(&r);
    assert_eq!(err["error"]["kind"], "manifest");
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("`train`"));
}
