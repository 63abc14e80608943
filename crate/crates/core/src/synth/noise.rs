use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scene::RenderedFrame;
use crate::error::{Error, Result};
use crate::flow::{FlowField, B_MIN};
use crate::grid::ScalarGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Laplace scale of the flow error on the background.
    pub flow_noise_scale: f64,
    /// Additional scale per pixel of relative motion, on moving objects and
    /// on the background they uncover.
    pub motion_noise_gain: f64,
    /// Per-frame probability that a moving object's flow collapses to the
    /// background motion.
    pub failure_rate: f64,
    /// Multiplier between the true error scale and the reported `b`.
    pub calibration_factor: f64,
    /// Flip probability for provider-mask pixels on the object boundary.
    pub mask_corruption: f64,
    /// Weight of distractor overlap in the synthetic appearance score.
    pub appearance_confusion: f64,
    /// Half-width of the uniform noise added to appearance scores.
    pub appearance_noise: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            flow_noise_scale: 0.3,
            motion_noise_gain: 0.1,
            failure_rate: 0.0,
            calibration_factor: 1.0,
            mask_corruption: 0.0,
            appearance_confusion: 0.9,
            appearance_noise: 0.05,
        }
    }
}

impl NoiseModel {
    /// No flow or appearance noise and perfectly calibrated uncertainty.
    pub fn clean() -> Self {
        Self {
            flow_noise_scale: 0.0,
            motion_noise_gain: 0.0,
            failure_rate: 0.0,
            calibration_factor: 1.0,
            mask_corruption: 0.0,
            appearance_confusion: 0.0,
            appearance_noise: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("noise.flow_scale", self.flow_noise_scale),
            ("noise.motion_gain", self.motion_noise_gain),
            ("noise.confusion", self.appearance_confusion),
            ("noise.appearance_noise", self.appearance_noise),
        ];
        for (k, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(k, "must be finite and non-negative"));
            }
        }
        for (k, v) in [
            ("noise.failure_rate", self.failure_rate),
            ("noise.mask_corruption", self.mask_corruption),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(k, "must lie in [0, 1]"));
            }
        }
        if !(self.calibration_factor >= 0.0 && self.calibration_factor.is_finite()) {
            return Err(Error::config(
                "noise.calibration",
                "must be finite and non-negative",
            ));
        }
        if self.appearance_confusion > 1.0 {
            return Err(Error::config("noise.confusion", "must not exceed 1"));
        }
        Ok(())
    }
}

/// Laplace(0, b) sample by inverse CDF.
pub fn sample_laplace(rng: &mut impl Rng, b: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    let u: f64 = rng.gen::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

/// Adds Laplace noise with a constant scale to the means and reports
/// `b = calibration_factor * scale`.
pub fn corrupt_flow(true_flow: &FlowField, noise: &NoiseModel, seed: u64) -> FlowField {
    let (w, h) = true_flow.dims();
    let s = ScalarGrid::filled(w, h, noise.flow_noise_scale);
    corrupt_flow_with_scales(true_flow, &s, &s, noise.calibration_factor, seed)
}

/// Adds per-pixel, per-axis Laplace noise. The reported scale is
/// `max(calibration * scale, B_MIN)`; values are rounded through `f32` so an
/// on-disk round trip is exact.
pub fn corrupt_flow_with_scales(
    true_flow: &FlowField,
    scale_u: &ScalarGrid,
    scale_v: &ScalarGrid,
    calibration: f64,
    seed: u64,
) -> FlowField {
    let (w, h) = true_flow.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = |v: f64| v as f32 as f64;
    let mut mu = ScalarGrid::zeros(w, h);
    let mut mv = ScalarGrid::zeros(w, h);
    let mut bu = ScalarGrid::zeros(w, h);
    let mut bv = ScalarGrid::zeros(w, h);
    for row in 0..h {
        for col in 0..w {
            let su = scale_u.get(row, col);
            let sv = scale_v.get(row, col);
            let nu = sample_laplace(&mut rng, su);
            let nv = sample_laplace(&mut rng, sv);
            mu.set(row, col, q(true_flow.mean_u.get(row, col) + nu));
            mv.set(row, col, q(true_flow.mean_v.get(row, col) + nv));
            bu.set(row, col, q((calibration * su).max(B_MIN)));
            bv.set(row, col, q((calibration * sv).max(B_MIN)));
        }
    }
    FlowField::new(mu, mv, bu, bv).expect("scales are floored")
}

/// Noisy provider flow for a rendered frame.
///
/// The error scale grows with each object's motion relative to the
/// background, on the object and on the background it uncovers. With
/// probability `failure_rate` a moving object's flow fails: if another object
/// was within three box diagonals in the previous frame, the object is matched
/// to the nearest such look-alike; otherwise its pixels and the background it
/// uncovers take the background motion. The reported scale on corrupted pixels
/// is at least the size of the resulting error.
pub fn synth_flow(frame: &RenderedFrame, noise: &NoiseModel, seed: u64) -> FlowField {
    let (w, h) = (frame.width, frame.height);
    let mut mean = frame.true_flow.clone();
    let mut su = ScalarGrid::filled(w, h, noise.flow_noise_scale);
    let mut sv = su.clone();
    if frame.index == 0 {
        return corrupt_flow_with_scales(&mean, &su, &sv, noise.calibration_factor, seed);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f1a5_u64);
    let failed: Vec<bool> = frame
        .relative_motion
        .iter()
        .map(|m| {
            let moving = m.x.hypot(m.y) >= 0.5;
            let draw = rng.gen::<f64>();
            moving && draw < noise.failure_rate
        })
        .collect();
    let bg = (-frame.camera_shift.0, -frame.camera_shift.1);
    let swap: Vec<Option<(f64, f64)>> = (0..failed.len())
        .map(|k| {
            let b = frame.object_boxes[k]?;
            let c = frame.centers[k];
            let reach = 3.0 * b.w.hypot(b.h);
            frame
                .prev_centers
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k && frame.object_boxes[j].is_some())
                .map(|(_, p)| (p.x - c.x, p.y - c.y))
                .filter(|d| d.0.hypot(d.1) <= reach)
                .min_by(|a, b| a.0.hypot(a.1).total_cmp(&b.0.hypot(b.1)))
        })
        .collect();

    for row in 0..h {
        for col in 0..w {
            let i = row * w + col;
            let owner = match (frame.labels[i], frame.disoccluded[i]) {
                (0, 0) => None,
                (0, d) => Some(d as usize - 1),
                (l, _) => Some(l as usize - 1),
            };
            let Some(k) = owner else { continue };
            let m = frame.relative_motion[k];
            let extra = noise.motion_noise_gain * m.x.hypot(m.y);
            let mut a = noise.flow_noise_scale + extra;
            let mut b = a;
            let wrong = match (failed[k], swap[k], frame.labels[i] > 0) {
                (false, _, _) | (true, Some(_), false) => None,
                (true, Some(d), true) => Some(d),
                (true, None, _) => Some(bg),
            };
            if let Some((wu, wv)) = wrong {
                let eu = mean.mean_u.get(row, col) - wu;
                let ev = mean.mean_v.get(row, col) - wv;
                mean.mean_u.set(row, col, wu);
                mean.mean_v.set(row, col, wv);
                a = a.max(eu.abs());
                b = b.max(ev.abs());
            }
            su.set(row, col, a);
            sv.set(row, col, b);
        }
    }
    corrupt_flow_with_scales(&mean, &su, &sv, noise.calibration_factor, seed)
}
