use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::derive_seed;
use super::noise::NoiseModel;
use super::scenario::{ObjectParams, Scenario};
use super::scene::Shape;

/// Knobs for [`distractor_suite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub noise: NoiseModel,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            frames: 50,
            noise: NoiseModel {
                flow_noise_scale: 0.3,
                motion_noise_gain: 0.05,
                failure_rate: 0.2,
                calibration_factor: 1.0,
                mask_corruption: 0.1,
                appearance_confusion: 0.97,
                appearance_noise: 0.08,
            },
        }
    }
}

fn polar(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> (f64, f64) {
    let speed = rng.gen_range(lo..=hi);
    let a = rng.gen_range(0.0..TAU);
    (speed * a.cos(), speed * a.sin())
}

/// Scenes with fast look-alike objects under camera shake.
///
/// Even-numbered scenes are convoys: a bouncing target followed along the
/// same path, two frames behind, by an identical-looking object, plus one
/// freely bouncing look-alike. The target is painted on top. A zero-flow
/// prior centred on the previous position sits midway between the target and
/// its follower, so only the flow separates them.
///
/// Odd-numbered scenes are sprints: a target moving further than its own size
/// each frame and a slow, smaller object of the same shape. Appearance alone
/// suffices there; a flow failure leaves no overlap between the target and
/// the previous box.
pub fn distractor_suite(count: usize, seed: u64, cfg: &SuiteConfig) -> Vec<Scenario> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[i as u64]));
            let (w, h) = (cfg.width as f64, cfg.height as f64);
            let shape = if rng.gen_bool(0.5) {
                Shape::Rect
            } else {
                Shape::Ellipse
            };
            let side = rng.gen_range(0.13..0.17) * w.min(h);
            let size = (
                side * rng.gen_range(0.9..1.1),
                side * rng.gen_range(0.9..1.1),
            );
            let start = (rng.gen_range(0.3..0.7) * w, rng.gen_range(0.3..0.7) * h);
            let wander_start = (rng.gen_range(0.1..0.9) * w, rng.gen_range(0.1..0.9) * h);
            let wander_v = polar(&mut rng, 0.5, 2.0);
            let look_alike = |start, velocity, target| ObjectParams {
                shape,
                size,
                start,
                velocity,
                bounce: true,
                growth: 1.0,
                target,
            };

            let objects = if i % 2 == 0 {
                let v = polar(&mut rng, 0.6 * side, 0.9 * side);
                let lag = 2.0;
                let follower = (start.0 - lag * v.0, start.1 - lag * v.1);
                vec![
                    look_alike(follower, v, false),
                    look_alike(wander_start, wander_v, false),
                    look_alike(start, v, true),
                ]
            } else {
                let v = polar(&mut rng, 1.2 * side, 1.6 * side);
                let small = ObjectParams {
                    size: (0.6 * size.0, 0.6 * size.1),
                    ..look_alike(wander_start, wander_v, false)
                };
                vec![small, look_alike(start, v, true)]
            };
            Scenario {
                width: cfg.width,
                height: cfg.height,
                frames: cfg.frames,
                seed: derive_seed(seed, &[i as u64, 1]),
                camera_shift: (0.0, 0.0),
                camera_shake: rng.gen_range(0.0..2.0),
                camera_period: rng.gen_range(10.0..24.0),
                objects,
                noise: cfg.noise,
                proposals: Default::default(),
            }
        })
        .collect()
}
