//! Lossless PNG frame and mask I/O plus clip directory discovery.
//!
//! Frames are 8-bit RGB, masks 8-bit grayscale (255 = 1.0). Frame files
//! inside a clip directory are named `%08d.png`.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};
use crate::frame::{Clip, Frame, GrayMap};

pub fn frame_file_name(index: usize) -> String {
    format!("{index:08}.png")
}

struct Decoded {
    height: usize,
    width: usize,
    color: ColorType,
    bytes: Vec<u8>,
}

fn decode_png(path: &Path) -> Result<Decoded> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile {
            path: path.to_path_buf(),
        },
        _ => Error::io(path, e),
    })?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    let (color, depth) = reader.output_color_type();
    if depth != BitDepth::Eight {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("bit depth {depth:?}, expected 8"),
        });
    }
    let size = reader.output_buffer_size().ok_or_else(|| Error::Decode {
        path: path.to_path_buf(),
        detail: "image too large".into(),
    })?;
    let mut bytes = vec![0; size];
    let info = reader.next_frame(&mut bytes).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    bytes.truncate(info.buffer_size());
    Ok(Decoded {
        height: info.height as usize,
        width: info.width as usize,
        color,
        bytes,
    })
}

/// Loads an 8-bit RGB PNG; each sample `v` becomes `v / 255`.
pub fn load_frame(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    let d = decode_png(path)?;
    if d.color != ColorType::Rgb {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("color type {:?}, expected RGB", d.color),
        });
    }
    Frame::from_u8(d.height, d.width, &d.bytes)
}

/// Loads an 8-bit grayscale PNG mask.
pub fn load_mask(path: impl AsRef<Path>) -> Result<GrayMap> {
    let path = path.as_ref();
    let d = decode_png(path)?;
    if d.color != ColorType::Grayscale {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("color type {:?}, expected grayscale", d.color),
        });
    }
    GrayMap::new(
        d.height,
        d.width,
        d.bytes.iter().map(|&b| f32::from(b) / 255.0).collect(),
    )
}

/// Reads only the PNG header and returns `(height, width)`.
pub fn png_dims(path: impl AsRef<Path>) -> Result<(usize, usize)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    let info = decoder.read_header_info().map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    Ok((info.height as usize, info.width as usize))
}

fn encode_png(
    path: &Path,
    height: usize,
    width: usize,
    color: ColorType,
    bytes: &[u8],
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    encoder.set_color(color);
    encoder.set_depth(BitDepth::Eight);
    let to_io = |e: png::EncodingError| match e {
        png::EncodingError::IoError(source) => Error::io(path, source),
        other => Error::io(path, std::io::Error::other(other.to_string())),
    };
    let mut writer = encoder.write_header().map_err(to_io)?;
    writer.write_image_data(bytes).map_err(to_io)?;
    writer.finish().map_err(to_io)
}

/// Writes an 8-bit RGB PNG; sample `v` becomes `round(v * 255)`.
pub fn save_frame(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    encode_png(
        path.as_ref(),
        frame.height(),
        frame.width(),
        ColorType::Rgb,
        &frame.to_u8(),
    )
}

pub fn save_mask(mask: &GrayMap, path: impl AsRef<Path>) -> Result<()> {
    encode_png(
        path.as_ref(),
        mask.height(),
        mask.width(),
        ColorType::Grayscale,
        &mask.to_u8(),
    )
}

/// PNG files directly inside `dir`, sorted by file name.
pub fn list_frames(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile {
            path: dir.to_path_buf(),
        },
        _ => Error::io(dir, e),
    })?;
    let mut frames = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_png = path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            frames.push(path);
        }
    }
    frames.sort();
    Ok(frames)
}

/// A clip found on disk: its name relative to the scanned root (empty when
/// the root itself holds the frames) and its sorted frame files.
#[derive(Debug, Clone)]
pub struct ClipDir {
    pub name: String,
    pub frames: Vec<PathBuf>,
}

/// If `root` holds PNG files it is a single clip; otherwise every
/// subdirectory containing PNG files is one clip, sorted by name.
pub fn discover_clips(root: impl AsRef<Path>) -> Result<Vec<ClipDir>> {
    let root = root.as_ref();
    let direct = list_frames(root)?;
    if !direct.is_empty() {
        return Ok(vec![ClipDir {
            name: String::new(),
            frames: direct,
        }]);
    }
    let mut subdirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    let mut clips = Vec::new();
    for dir in subdirs {
        let frames = list_frames(&dir)?;
        if frames.is_empty() {
            continue;
        }
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        clips.push(ClipDir { name, frames });
    }
    Ok(clips)
}

pub fn load_clip(frames: &[PathBuf]) -> Result<Clip> {
    Clip::new(frames.iter().map(load_frame).collect::<Result<_>>()?)
}

pub fn create_dir_all(path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: serde::Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile {
            path: path.to_path_buf(),
        },
        _ => Error::io(path, e),
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
