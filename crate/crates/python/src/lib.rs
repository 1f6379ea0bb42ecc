//! Python bindings: blur synthesis, mask ground truth and the degradation
//! chain on NumPy arrays.
//!
//! Frames are `float32` arrays of shape `(H, W, 3)` with values in `[0, 1]`;
//! masks are `(H, W)`. Other dtypes and non-contiguous arrays are converted
//! by NumPy first. Pixel data is copied once into native storage so the
//! computation can run with the GIL released.

use blursynth::blur::{synthesize_clip, BlurParams};
use blursynth::degrade::{degrade_frame, DegradeConfig};
use blursynth::frame::{Clip, Frame, CHANNELS};
use blursynth::mask::{make_mask_gt, MaskParams};
use blursynth::Error;
use numpy::{
    AllowTypeChange, PyArray1, PyArray2, PyArray3, PyArrayLike3, PyArrayMethods,
    PyUntypedArrayMethods,
};
use pyo3::exceptions::{PyFileNotFoundError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::MissingFile { .. } => PyFileNotFoundError::new_err(msg),
        Error::Io { .. } => PyOSError::new_err(msg),
        Error::InvalidParameter { .. }
        | Error::InvalidDimensions(_)
        | Error::DimensionMismatch { .. }
        | Error::SampleOutOfRange { .. }
        | Error::OutOfBounds { .. }
        | Error::IndexOutOfRange { .. }
        | Error::ClipTooShort { .. }
        | Error::FrameCountMismatch { .. } => PyValueError::new_err(msg),
        _ => PyRuntimeError::new_err(msg),
    }
}

fn frame_from(array: &PyArrayLike3<'_, f32, AllowTypeChange>) -> PyResult<Frame> {
    let shape = array.shape();
    if shape[2] != CHANNELS {
        return Err(PyValueError::new_err(format!(
            "expected an (H, W, 3) array, got {shape:?}"
        )));
    }
    let data = match array.as_slice() {
        Ok(s) => s.to_vec(),
        Err(_) => array.as_array().iter().copied().collect(),
    };
    Frame::new(shape[0], shape[1], data).map_err(to_py)
}

type Frames<'py> = Vec<Bound<'py, PyArray3<f32>>>;

fn frame_to_py<'py>(py: Python<'py>, frame: Frame) -> PyResult<Bound<'py, PyArray3<f32>>> {
    let (h, w) = frame.dims();
    PyArray1::from_vec(py, frame.into_data()).reshape([h, w, CHANNELS])
}

/// Motion-blur a clip by weighted frame stacking.
///
/// Returns the blurred frames and, per frame, whether any pass replaced it.
#[pyfunction]
#[pyo3(signature = (frames, n, r, p = 1.0, seed = 0, order = 1))]
fn synthesize<'py>(
    py: Python<'py>,
    frames: Vec<PyArrayLike3<'py, f32, AllowTypeChange>>,
    n: usize,
    r: f64,
    p: f64,
    seed: u64,
    order: u8,
) -> PyResult<(Frames<'py>, Vec<bool>)> {
    let params = BlurParams::new(n, r, p, order, seed).map_err(to_py)?;
    let frames = frames
        .iter()
        .map(frame_from)
        .collect::<PyResult<Vec<_>>>()?;
    let outcome = py
        .detach(|| Clip::new(frames).and_then(|clip| synthesize_clip(&clip, &params)))
        .map_err(to_py)?;
    let out = outcome
        .clip
        .into_frames()
        .into_iter()
        .map(|f| frame_to_py(py, f))
        .collect::<PyResult<_>>()?;
    Ok((out, outcome.applied))
}

/// Mask ground truth at 1/4 resolution (1 = clear) and the gate flag.
#[pyfunction]
#[pyo3(signature = (clear, blur, k = 100.0, gate_threshold = 0.6))]
fn mask_gt<'py>(
    py: Python<'py>,
    clear: PyArrayLike3<'py, f32, AllowTypeChange>,
    blur: PyArrayLike3<'py, f32, AllowTypeChange>,
    k: f64,
    gate_threshold: f64,
) -> PyResult<(Bound<'py, PyArray2<f32>>, bool)> {
    let params = MaskParams {
        k,
        gate_threshold,
        ..MaskParams::default()
    };
    let (clear, blur) = (frame_from(&clear)?, frame_from(&blur)?);
    let pair = py
        .detach(|| make_mask_gt(&clear, &blur, &params))
        .map_err(to_py)?;
    let (h, w) = pair.mask_gt.dims();
    let mask = PyArray1::from_vec(py, pair.mask_gt.into_data()).reshape([h, w])?;
    Ok((mask, pair.gated))
}

/// Run the degradation chain on one frame.
///
/// `config_json` uses the same schema as the CLI config file; its seed is
/// replaced by `seed`. Returns the LR frame and the sampled trace as JSON.
#[pyfunction]
#[pyo3(signature = (frame, seed = 0, config_json = None))]
fn degrade<'py>(
    py: Python<'py>,
    frame: PyArrayLike3<'py, f32, AllowTypeChange>,
    seed: u64,
    config_json: Option<&str>,
) -> PyResult<(Bound<'py, PyArray3<f32>>, String)> {
    let mut config: DegradeConfig = match config_json {
        Some(text) => serde_json::from_str(text)
            .map_err(|e| PyValueError::new_err(format!("invalid config_json: {e}")))?,
        None => DegradeConfig::default(),
    };
    config.seed = seed;
    let frame = frame_from(&frame)?;
    let (out, trace) = py
        .detach(|| degrade_frame(&frame, &config))
        .map_err(to_py)?;
    let trace =
        serde_json::to_string(&trace).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((frame_to_py(py, out)?, trace))
}

#[pymodule]
fn pyblursynth(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(mask_gt, m)?)?;
    m.add_function(wrap_pyfunction!(degrade, m)?)?;
    Ok(())
}
