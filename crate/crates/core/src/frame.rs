//! RGB frames, single-channel maps and clips.
//!
//! Samples are `f32` in `[0, 1]`, row-major, channels interleaved in RGB
//! order. Constructors validate the range; internal producers clamp.

use crate::error::{Error, Result};

pub const CHANNELS: usize = 3;

fn check_dims(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidDimensions(format!(
            "{height}x{width}: height and width must be at least 1"
        )));
    }
    Ok(())
}

fn check_range(data: &[f32]) -> Result<()> {
    match data.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(index) => Err(Error::SampleOutOfRange {
            index,
            value: data[index],
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Frame {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        check_dims(height, width)?;
        if data.len() != height * width * CHANNELS {
            return Err(Error::InvalidDimensions(format!(
                "{height}x{width}x3 frame needs {} samples, got {}",
                height * width * CHANNELS,
                data.len()
            )));
        }
        check_range(&data)?;
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, value: f32) -> Result<Self> {
        Self::new(height, width, vec![value; height * width * CHANNELS])
    }

    /// Builds a frame from a per-sample function of `(row, col, channel)`;
    /// results are clamped to `[0, 1]`.
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        check_dims(height, width)?;
        let mut data = Vec::with_capacity(height * width * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                for c in 0..CHANNELS {
                    data.push(f(y, x, c));
                }
            }
        }
        Ok(Self::from_clamped(height, width, data))
    }

    /// Clamps every sample into `[0, 1]`; NaN maps to 0.
    pub(crate) fn from_clamped(height: usize, width: usize, mut data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), height * width * CHANNELS);
        for v in &mut data {
            *v = clamp_unit(*v);
        }
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * CHANNELS + c]
    }

    pub fn pixel(&self, y: usize, x: usize) -> [f32; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn same_dims(&self, other: &Frame) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left_h: self.height,
                left_w: self.width,
                right_h: other.height,
                right_w: other.width,
            });
        }
        Ok(())
    }

    /// Snaps every sample to the nearest 8-bit level, i.e. what a PNG
    /// save/load cycle produces.
    pub fn quantized(&self) -> Frame {
        let data = self
            .data
            .iter()
            .map(|&v| f32::from(to_u8(v)) / 255.0)
            .collect();
        Frame {
            height: self.height,
            width: self.width,
            data,
        }
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| to_u8(v)).collect()
    }

    pub fn from_u8(height: usize, width: usize, bytes: &[u8]) -> Result<Self> {
        check_dims(height, width)?;
        if bytes.len() != height * width * CHANNELS {
            return Err(Error::InvalidDimensions(format!(
                "expected {} RGB bytes, got {}",
                height * width * CHANNELS,
                bytes.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data: bytes.iter().map(|&b| f32::from(b) / 255.0).collect(),
        })
    }

    /// BT.601 luma.
    pub fn luma(&self) -> Vec<f32> {
        self.data
            .chunks_exact(CHANNELS)
            .map(|p| luma(p[0], p[1], p[2]))
            .collect()
    }

    /// Copies the `h`x`w` window whose top-left corner is `(top, left)`.
    pub fn crop(&self, top: usize, left: usize, h: usize, w: usize) -> Result<Frame> {
        if h == 0 || w == 0 || top + h > self.height || left + w > self.width {
            return Err(Error::OutOfBounds {
                top,
                left,
                h,
                w,
                height: self.height,
                width: self.width,
            });
        }
        let mut data = Vec::with_capacity(h * w * CHANNELS);
        for y in top..top + h {
            let start = (y * self.width + left) * CHANNELS;
            data.extend_from_slice(&self.data[start..start + w * CHANNELS]);
        }
        Ok(Frame {
            height: h,
            width: w,
            data,
        })
    }
}

#[inline]
pub(crate) fn luma(r: f32, g: f32, b: f32) -> f32 {
    0.299 * r + 0.587 * g + 0.114 * b
}

#[inline]
pub(crate) fn clamp_unit(v: f32) -> f32 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// `round(v * 255)`, half away from zero.
#[inline]
pub fn to_u8(v: f32) -> u8 {
    (clamp_unit(v) * 255.0).round() as u8
}

/// Single-channel map in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayMap {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl GrayMap {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        check_dims(height, width)?;
        if data.len() != height * width {
            return Err(Error::InvalidDimensions(format!(
                "{height}x{width} map needs {} samples, got {}",
                height * width,
                data.len()
            )));
        }
        check_range(&data)?;
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, value: f32) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub(crate) fn from_clamped(height: usize, width: usize, mut data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        for v in &mut data {
            *v = clamp_unit(*v);
        }
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| f64::from(v)).sum::<f64>() / self.data.len() as f64
    }

    pub fn same_dims(&self, other: &GrayMap) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left_h: self.height,
                left_w: self.width,
                right_h: other.height,
                right_w: other.width,
            });
        }
        Ok(())
    }

    /// `1 - v` for every sample.
    pub fn inverted(&self) -> GrayMap {
        GrayMap {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| 1.0 - v).collect(),
        }
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| to_u8(v)).collect()
    }
}

/// Ordered frames sharing one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    frames: Vec<Frame>,
    fps: f32,
}

impl Clip {
    pub const DEFAULT_FPS: f32 = 30.0;

    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        Self::with_fps(frames, Self::DEFAULT_FPS)
    }

    pub fn with_fps(frames: Vec<Frame>, fps: f32) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidDimensions("a clip needs at least one frame".into()))?;
        for f in &frames[1..] {
            first.same_dims(f)?;
        }
        Ok(Self { frames, fps })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn fps(&self) -> f32 {
        self.fps
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }
}

impl std::ops::Index<usize> for Clip {
    type Output = Frame;

    fn index(&self, i: usize) -> &Frame {
        &self.frames[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(h: usize, w: usize) -> Frame {
        Frame::from_fn(h, w, |y, x, c| {
            ((y * w + x) * 3 + c) as f32 / (h * w * 3) as f32
        })
        .unwrap()
    }

    #[test]
    fn rejects_out_of_range_and_bad_lengths() {
        assert!(matches!(
            Frame::new(1, 1, vec![0.0, 1.5, 0.0]),
            Err(Error::SampleOutOfRange { index: 1, .. })
        ));
        assert!(Frame::new(1, 1, vec![0.0, f32::NAN, 0.0]).is_err());
        assert!(Frame::new(2, 1, vec![0.0; 3]).is_err());
        assert!(Frame::new(0, 1, vec![]).is_err());
        assert!(GrayMap::new(1, 2, vec![0.0, -0.1]).is_err());
    }

    #[test]
    fn full_crop_is_identity() {
        let f = ramp(5, 7);
        assert_eq!(f.crop(0, 0, 5, 7).unwrap(), f);
    }

    #[test]
    fn single_pixel_crop() {
        let f = ramp(5, 7);
        for (r, c) in [(0, 0), (4, 6), (2, 3)] {
            let p = f.crop(r, c, 1, 1).unwrap();
            assert_eq!(p.pixel(0, 0), f.pixel(r, c));
        }
    }

    #[test]
    fn crop_out_of_bounds() {
        let f = ramp(5, 7);
        assert!(matches!(f.crop(3, 0, 3, 1), Err(Error::OutOfBounds { .. })));
        assert!(f.crop(0, 7, 1, 1).is_err());
        assert!(f.crop(0, 0, 0, 1).is_err());
    }

    #[test]
    fn clip_requires_uniform_dims() {
        let a = Frame::filled(2, 2, 0.0).unwrap();
        let b = Frame::filled(2, 3, 0.0).unwrap();
        assert!(Clip::new(vec![a.clone(), b]).is_err());
        assert!(Clip::new(vec![]).is_err());
        assert_eq!(Clip::new(vec![a.clone(), a]).unwrap().len(), 2);
    }

    #[test]
    fn u8_quantization_rounds_half_up() {
        assert_eq!(to_u8(0.5), 128);
        assert_eq!(to_u8(1.0), 255);
        assert_eq!(to_u8(0.0), 0);
        for k in 0..=255u8 {
            assert_eq!(to_u8(f32::from(k) / 255.0), k);
        }
    }

    proptest! {
        #[test]
        fn nested_crop_composes(
            h in 1usize..=12, w in 1usize..=12,
            a in 0usize..100, b in 0usize..100, c in 0usize..100, d in 0usize..100,
            e in 0usize..100, g in 0usize..100,
        ) {
            let (t1, l1) = (a % (13 - h), b % (13 - w));
            let (h2, w2) = (1 + c % h, 1 + d % w);
            let (t2, l2) = (e % (h - h2 + 1), g % (w - w2 + 1));
            let f = ramp(12, 12);
            let nested = f.crop(t1, l1, h, w).unwrap().crop(t2, l2, h2, w2).unwrap();
            // direct index arithmetic
            for y in 0..h2 {
                for x in 0..w2 {
                    prop_assert_eq!(nested.pixel(y, x), f.pixel(t1 + t2 + y, l1 + l2 + x));
                }
            }
        }
    }
}
