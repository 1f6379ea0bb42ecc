//! Separable Gaussian filtering with replicate-edge padding.

use crate::error::{Error, Result};
use crate::frame::{Frame, GrayMap, CHANNELS};

/// Normalized 1-D Gaussian taps for offsets `-k/2 ..= k/2`.
pub fn gaussian_kernel(kernel_size: usize, sigma: f64) -> Result<Vec<f64>> {
    if kernel_size == 0 || kernel_size.is_multiple_of(2) {
        return Err(Error::param(
            "kernel_size",
            format!("{kernel_size} must be odd and at least 1"),
        ));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", format!("{sigma} must be positive")));
    }
    let half = (kernel_size / 2) as isize;
    let mut taps: Vec<f64> = (-half..=half)
        .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    Ok(taps)
}

/// Convolves an interleaved buffer with `ky` vertically and `kx`
/// horizontally. Output is not clamped.
pub(crate) fn convolve_separable(
    data: &[f32],
    h: usize,
    w: usize,
    ch: usize,
    ky: &[f64],
    kx: &[f64],
) -> Vec<f64> {
    let hx = (kx.len() / 2) as isize;
    let hy = (ky.len() / 2) as isize;
    let stride = w * ch;

    let mut tmp = vec![0.0f64; h * stride];
    for y in 0..h {
        let row = &data[y * stride..(y + 1) * stride];
        let dst = &mut tmp[y * stride..(y + 1) * stride];
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for (k, &wt) in kx.iter().enumerate() {
                    let sx = (x as isize + k as isize - hx).clamp(0, w as isize - 1) as usize;
                    acc += wt * f64::from(row[sx * ch + c]);
                }
                dst[x * ch + c] = acc;
            }
        }
    }

    let mut out = vec![0.0f64; h * stride];
    for y in 0..h {
        let dst = &mut out[y * stride..(y + 1) * stride];
        for (k, &wt) in ky.iter().enumerate() {
            let sy = (y as isize + k as isize - hy).clamp(0, h as isize - 1) as usize;
            let src = &tmp[sy * stride..(sy + 1) * stride];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += wt * s;
            }
        }
    }
    out
}

pub fn gaussian_blur(map: &GrayMap, kernel_size: usize, sigma: f64) -> Result<GrayMap> {
    let k = gaussian_kernel(kernel_size, sigma)?;
    let out = convolve_separable(map.data(), map.height(), map.width(), 1, &k, &k);
    Ok(GrayMap::from_clamped(
        map.height(),
        map.width(),
        out.into_iter().map(|v| v as f32).collect(),
    ))
}

/// Axis-aligned (possibly anisotropic) Gaussian blur of an RGB frame.
pub fn gaussian_blur_frame(
    frame: &Frame,
    kernel_size: usize,
    sigma_y: f64,
    sigma_x: f64,
) -> Result<Frame> {
    let ky = gaussian_kernel(kernel_size, sigma_y)?;
    let kx = gaussian_kernel(kernel_size, sigma_x)?;
    let out = convolve_separable(
        frame.data(),
        frame.height(),
        frame.width(),
        CHANNELS,
        &ky,
        &kx,
    );
    Ok(Frame::from_clamped(
        frame.height(),
        frame.width(),
        out.into_iter().map(|v| v as f32).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent 2-D kernel straight from the Gaussian formula.
    fn kernel_2d(k: usize, sigma: f64) -> Vec<Vec<f64>> {
        let half = (k / 2) as i64;
        let mut rows = Vec::new();
        let mut sum = 0.0;
        for dy in -half..=half {
            let mut row = Vec::new();
            for dx in -half..=half {
                let v = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                sum += v;
                row.push(v);
            }
            rows.push(row);
        }
        rows.iter()
            .map(|r| r.iter().map(|v| v / sum).collect())
            .collect()
    }

    fn dense_conv(map: &GrayMap, k2: &[Vec<f64>]) -> Vec<f64> {
        let (h, w) = map.dims();
        let half = (k2.len() / 2) as isize;
        let mut out = Vec::new();
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut acc = 0.0;
                for (i, row) in k2.iter().enumerate() {
                    for (j, wt) in row.iter().enumerate() {
                        let sy = (y + i as isize - half).clamp(0, h as isize - 1) as usize;
                        let sx = (x + j as isize - half).clamp(0, w as isize - 1) as usize;
                        acc += wt * f64::from(map.get(sy, sx));
                    }
                }
                out.push(acc);
            }
        }
        out
    }

    #[test]
    fn kernel_is_normalized() {
        for (k, s) in [(1, 0.5), (7, 3.0), (21, 0.2), (9, 10.0)] {
            let taps = gaussian_kernel(k, s).unwrap();
            assert_eq!(taps.len(), k);
            assert!((taps.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_even_size_and_bad_sigma() {
        assert!(gaussian_kernel(6, 1.0).is_err());
        assert!(gaussian_kernel(0, 1.0).is_err());
        assert!(gaussian_kernel(7, 0.0).is_err());
        let m = GrayMap::filled(3, 3, 0.5).unwrap();
        assert!(gaussian_blur(&m, 4, 1.0).is_err());
    }

    #[test]
    fn constants_are_preserved() {
        let m = GrayMap::filled(10, 6, 0.73).unwrap();
        let b = gaussian_blur(&m, 7, 3.0).unwrap();
        assert!(b.data().iter().all(|&v| (v - 0.73).abs() < 1e-6));
    }

    #[test]
    fn impulse_reproduces_all_49_taps() {
        let mut data = vec![0.0; 15 * 15];
        data[7 * 15 + 7] = 1.0;
        let m = GrayMap::new(15, 15, data).unwrap();
        let b = gaussian_blur(&m, 7, 3.0).unwrap();
        let k2 = kernel_2d(7, 3.0);
        for (dy, row) in k2.iter().enumerate() {
            for (dx, &want) in row.iter().enumerate() {
                // Convolution flips the kernel; it is symmetric.
                let got = f64::from(b.get(4 + dy, 4 + dx));
                assert!((got - want).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn separable_equals_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(k, s) in &[(7, 3.0), (5, 0.8), (3, 2.0)] {
            let (h, w) = (rng.random_range(1..20), rng.random_range(1..20));
            let m = GrayMap::new(h, w, (0..h * w).map(|_| rng.random::<f32>()).collect()).unwrap();
            let sep = gaussian_blur(&m, k, s).unwrap();
            let dense = dense_conv(&m, &kernel_2d(k, s));
            for (a, b) in sep.data().iter().zip(&dense) {
                assert!((f64::from(*a) - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn frame_blur_preserves_constants() {
        let f = Frame::filled(9, 9, 0.2).unwrap();
        let b = gaussian_blur_frame(&f, 11, 0.5, 2.5).unwrap();
        assert!(b.data().iter().all(|&v| (v - 0.2).abs() < 1e-6));
    }
}
