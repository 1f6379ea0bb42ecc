use std::io::Cursor;

use jpeg_encoder::{ColorType, Encoder, SamplingFactor};
use zune_jpeg::zune_core::colorspace::ColorSpace;
use zune_jpeg::zune_core::options::DecoderOptions;
use zune_jpeg::JpegDecoder;

use crate::error::{Error, Result};
use crate::frame::Frame;

/// Chroma is subsampled 4:2:0 below this quality and kept 4:4:4 at or above.
pub const FULL_CHROMA_QUALITY: u8 = 90;

pub fn encode_jpeg(frame: &Frame, quality: u8) -> Result<Vec<u8>> {
    if !(1..=100).contains(&quality) {
        return Err(Error::param(
            "quality",
            format!("{quality} is outside [1, 100]"),
        ));
    }
    let (h, w) = frame.dims();
    let (h16, w16) = match (u16::try_from(h), u16::try_from(w)) {
        (Ok(h), Ok(w)) => (h, w),
        _ => return Err(Error::Jpeg(format!("{h}x{w} exceeds the JPEG size limit"))),
    };
    let mut bytes = Vec::new();
    let mut encoder = Encoder::new(&mut bytes, quality);
    encoder.set_sampling_factor(if quality < FULL_CHROMA_QUALITY {
        SamplingFactor::R_4_2_0
    } else {
        SamplingFactor::R_4_4_4
    });
    encoder
        .encode(&frame.to_u8(), w16, h16, ColorType::Rgb)
        .map_err(|e| Error::Jpeg(e.to_string()))?;
    Ok(bytes)
}

pub fn decode_jpeg(bytes: &[u8]) -> Result<Frame> {
    let options = DecoderOptions::default()
        .jpeg_set_out_colorspace(ColorSpace::RGB)
        .set_use_unsafe(false);
    let mut decoder = JpegDecoder::new_with_options(Cursor::new(bytes), options);
    let pixels = decoder
        .decode()
        .map_err(|e| Error::Jpeg(format!("{e:?}")))?;
    let (w, h) = decoder
        .dimensions()
        .ok_or_else(|| Error::Jpeg("missing dimensions".into()))?;
    Frame::from_u8(h, w, &pixels)
}

/// Baseline JPEG encode at `quality` followed by a decode.
pub fn jpeg_cycle(frame: &Frame, quality: u8) -> Result<Frame> {
    decode_jpeg(&encode_jpeg(frame, quality)?)
}
