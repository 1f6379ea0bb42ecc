use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{luma, Frame, CHANNELS};
use crate::seed::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Additive N(0, strength^2).
    Gaussian,
    /// Signal-dependent: standard deviation `strength * sqrt(v)`.
    PoissonLike,
}

/// Adds seeded noise and clamps to `[0, 1]`. With `gray` one draw per pixel
/// is shared by all three channels (poisson-like noise then scales with luma).
pub fn add_noise(
    frame: &Frame,
    kind: NoiseKind,
    strength: f64,
    gray: bool,
    seed: u64,
) -> Result<Frame> {
    if !(strength >= 0.0 && strength.is_finite()) {
        return Err(Error::param(
            "strength",
            format!("{strength} must be nonnegative"),
        ));
    }
    if strength == 0.0 {
        return Ok(frame.clone());
    }
    let mut rng = seed::rng(seed, Stream::Noise, 0);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut data = Vec::with_capacity(frame.data().len());
    for px in frame.data().chunks_exact(CHANNELS) {
        if gray {
            let n = draw();
            let std = match kind {
                NoiseKind::Gaussian => strength,
                NoiseKind::PoissonLike => strength * f64::from(luma(px[0], px[1], px[2])).sqrt(),
            };
            data.extend(px.iter().map(|&v| (f64::from(v) + std * n) as f32));
        } else {
            for &v in px {
                let std = match kind {
                    NoiseKind::Gaussian => strength,
                    NoiseKind::PoissonLike => strength * f64::from(v).sqrt(),
                };
                data.push((f64::from(v) + std * draw()) as f32);
            }
        }
    }
    Ok(Frame::from_clamped(frame.height(), frame.width(), data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_strength_is_identity() {
        let f = Frame::from_fn(5, 5, |y, x, c| (y + x + c) as f32 / 12.0).unwrap();
        for kind in [NoiseKind::Gaussian, NoiseKind::PoissonLike] {
            assert_eq!(add_noise(&f, kind, 0.0, false, 1).unwrap(), f);
        }
        assert!(add_noise(&f, NoiseKind::Gaussian, -0.1, false, 1).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let f = Frame::filled(256, 256, 0.5).unwrap();
        let out = add_noise(&f, NoiseKind::Gaussian, 0.05, false, 99).unwrap();
        let n = out.data().len() as f64;
        let mean = out.data().iter().map(|&v| f64::from(v)).sum::<f64>() / n;
        let var = out
            .data()
            .iter()
            .map(|&v| (f64::from(v) - mean).powi(2))
            .sum::<f64>()
            / n;
        assert!((mean - 0.5).abs() < 0.003, "{mean}");
        assert!((var.sqrt() - 0.05).abs() < 0.005, "{}", var.sqrt());
    }

    #[test]
    fn gray_noise_shares_draws() {
        let f = Frame::filled(16, 16, 0.5).unwrap();
        for kind in [NoiseKind::Gaussian, NoiseKind::PoissonLike] {
            let out = add_noise(&f, kind, 0.05, true, 3).unwrap();
            for px in out.data().chunks_exact(3) {
                assert_eq!(px[0], px[1]);
                assert_eq!(px[1], px[2]);
            }
        }
    }

    #[test]
    fn poisson_like_is_signal_dependent() {
        let dark = Frame::filled(64, 64, 0.0).unwrap();
        assert_eq!(
            add_noise(&dark, NoiseKind::PoissonLike, 0.05, false, 4).unwrap(),
            dark
        );
        let f = Frame::filled(64, 64, 0.25).unwrap();
        let out = add_noise(&f, NoiseKind::PoissonLike, 0.05, false, 4).unwrap();
        let n = out.data().len() as f64;
        let var = out
            .data()
            .iter()
            .map(|&v| (f64::from(v) - 0.25).powi(2))
            .sum::<f64>()
            / n;
        // std = 0.05 * sqrt(0.25)
        assert!((var.sqrt() - 0.025).abs() < 0.003);
    }

    #[test]
    fn seeded() {
        let f = Frame::filled(8, 8, 0.5).unwrap();
        let a = add_noise(&f, NoiseKind::Gaussian, 0.1, false, 5).unwrap();
        assert_eq!(
            a,
            add_noise(&f, NoiseKind::Gaussian, 0.1, false, 5).unwrap()
        );
        assert_ne!(
            a,
            add_noise(&f, NoiseKind::Gaussian, 0.1, false, 6).unwrap()
        );
    }
}
