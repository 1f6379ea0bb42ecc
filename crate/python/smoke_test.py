"""Smoke test for the pyblursynth extension.

Build and install the extension first:

    pip install maturin
    maturin develop -m crates/python/Cargo.toml

Then run ``python python/smoke_test.py``. If a ``blursynth`` binary is on
PATH (or given via BLURSYNTH_BIN) the script also checks that the bindings
and the CLI agree on a small three-clip fixture.
"""

import json
import os
import shutil
import subprocess
import sys
import tempfile
import threading

import numpy as np
import pyblursynth as bs


def clip(seed, n=9, h=24, w=32):
    rng = np.random.default_rng(seed)
    base = rng.random((h, w + 2 * n, 3), dtype=np.float32)
    return [np.ascontiguousarray(base[:, t : t + w]) for t in range(n)]


def check_identity():
    frames = clip(0)
    out, applied = bs.synthesize(frames, n=3, r=0.0, p=1.0, seed=1)
    assert all(np.array_equal(a, b) for a, b in zip(frames, out))
    # eligible window for n=3 over 9 frames is indices 1..=6
    assert applied == [False] + [True] * 6 + [False, False]


def check_errors():
    try:
        bs.synthesize(clip(0), n=4, r=0.1)
    except ValueError as e:
        assert "`n`" in str(e), e
    else:
        raise AssertionError("n=4 accepted")
    a = np.zeros((16, 16, 3), np.float32)
    try:
        bs.mask_gt(a, np.zeros((16, 20, 3), np.float32))
    except ValueError:
        pass
    else:
        raise AssertionError("mismatched shapes accepted")


def check_mask_and_degrade():
    a = clip(1)[0]
    mask, gated = bs.mask_gt(a, a)
    assert mask.shape == (6, 8) and np.all(mask == 1.0) and not gated
    # float64 and strided input are converted
    mask64, _ = bs.mask_gt(a.astype(np.float64), a[:, ::1])
    assert np.array_equal(mask, mask64)
    lr, trace = bs.degrade(a, seed=3)
    assert lr.shape == (6, 8, 3)
    lr2, trace2 = bs.degrade(a, seed=3)
    assert np.array_equal(lr, lr2) and trace == trace2
    assert json.loads(trace)["output_height"] == 6


def check_threads():
    frames = clip(2, n=15, h=64, w=64)
    ref, _ = bs.synthesize(frames, n=5, r=0.15, p=0.9, seed=9)
    results = [None] * 4

    def work(i):
        results[i] = bs.synthesize(frames, n=5, r=0.15, p=0.9, seed=9)[0]

    threads = [threading.Thread(target=work, args=(i,)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for r in results:
        assert all(np.array_equal(a, b) for a, b in zip(ref, r))


def quantize(x):
    return np.floor(np.clip(x, 0, 1) * 255 + 0.5).astype(np.uint8)


def check_cli_parity(binary):
    try:
        from PIL import Image
    except ImportError:
        print("skip cli parity: Pillow missing")
        return
    tmp = tempfile.mkdtemp()
    try:
        src = os.path.join(tmp, "clips")
        for c in range(3):
            d = os.path.join(src, f"clip{c}")
            os.makedirs(d)
            for i, f in enumerate(clip(10 + c)):
                Image.fromarray(quantize(f), "RGB").save(os.path.join(d, f"{i:08d}.png"))
        out = os.path.join(tmp, "blurred")
        subprocess.run(
            [binary, "synth", "--in", src, "--out", out, "--seed", "5",
             "--n-frames", "5", "--r", "0.18", "--p", "0.8"],
            check=True, capture_output=True,
        )
        masks = os.path.join(tmp, "masks")
        subprocess.run(
            [binary, "maskgt", "--clear", src, "--blur", out, "--out", masks],
            check=True, capture_output=True,
        )
        for c in range(3):
            name = f"clip{c}"
            files = sorted(os.listdir(os.path.join(src, name)))
            frames = [np.asarray(Image.open(os.path.join(src, name, f)), np.float32) / 255 for f in files]
            with open(os.path.join(out, name, "blur.json")) as fh:
                seed = json.load(fh)["seed"]
            py_out, _ = bs.synthesize(frames, n=5, r=0.18, p=0.8, seed=seed)
            for f, mine in zip(files, py_out):
                theirs = np.asarray(Image.open(os.path.join(out, name, f)))
                assert np.array_equal(quantize(mine), theirs), (name, f)
                blurred = theirs.astype(np.float32) / 255
                clear = np.asarray(Image.open(os.path.join(src, name, f)), np.float32) / 255
                m, _ = bs.mask_gt(clear, blurred)
                cli_mask = np.asarray(Image.open(os.path.join(masks, name, f)))
                assert np.array_equal(quantize(m), cli_mask), (name, f)
        print("cli parity: ok")
    finally:
        shutil.rmtree(tmp)


def main():
    print("pyblursynth", bs.__version__)
    check_identity()
    check_errors()
    check_mask_and_degrade()
    check_threads()
    binary = os.environ.get("BLURSYNTH_BIN") or shutil.which("blursynth")
    if binary:
        check_cli_parity(binary)
    else:
        print("skip cli parity: no blursynth binary")
    print("smoke test passed")


if __name__ == "__main__":
    sys.exit(main())
