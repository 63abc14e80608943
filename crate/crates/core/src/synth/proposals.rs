use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::AABox;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalConfig {
    /// Exact number of proposals per frame.
    pub count: usize,
    /// Copies per object; the first copy is exact.
    pub jitter: usize,
    /// Maximum centre shift of a jittered copy, in pixels.
    pub jitter_px: f64,
    /// Maximum relative size change of a jittered copy.
    pub scale_jitter: f64,
    /// Spacing of the background grid as a fraction of the previous box size.
    pub grid_step: f64,
}

impl Default for ProposalConfig {
    fn default() -> Self {
        Self {
            count: 24,
            jitter: 3,
            jitter_px: 2.0,
            scale_jitter: 0.05,
            grid_step: 0.5,
        }
    }
}

impl ProposalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::config("proposals.count", "must be positive"));
        }
        if self.jitter == 0 {
            return Err(Error::config("proposals.jitter", "must be positive"));
        }
        if !(self.jitter_px >= 0.0) {
            return Err(Error::config("proposals.jitter_px", "must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.scale_jitter) {
            return Err(Error::config(
                "proposals.scale_jitter",
                "must lie in [0, 1)",
            ));
        }
        if !(self.grid_step > 0.0) {
            return Err(Error::config("proposals.grid_step", "must be positive"));
        }
        Ok(())
    }
}

fn jittered(b: &AABox, cfg: &ProposalConfig, rng: &mut ChaCha8Rng) -> Vec<AABox> {
    let mut out = vec![*b];
    for _ in 1..cfg.jitter {
        let dx = rng.gen_range(-1.0..=1.0) * cfg.jitter_px;
        let dy = rng.gen_range(-1.0..=1.0) * cfg.jitter_px;
        let s = 1.0 + rng.gen_range(-1.0..=1.0) * cfg.scale_jitter;
        out.push(AABox {
            cx: b.cx + dx,
            cy: b.cy + dy,
            w: b.w * s,
            h: b.h * s,
        });
    }
    out
}

/// Candidate boxes for one frame, exactly `cfg.count` of them: jittered
/// copies of the ground truth (first copy exact), jittered copies of each
/// in-frame distractor, then a spiral grid of previous-size boxes around the
/// previous centre.
pub fn generate_proposals(
    prev_box: &AABox,
    gt: Option<&AABox>,
    distractors: &[AABox],
    width: usize,
    height: usize,
    cfg: &ProposalConfig,
    seed: u64,
) -> Vec<AABox> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(cfg.count);
    if let Some(g) = gt.filter(|g| g.intersects_image(width, height)) {
        out.extend(jittered(g, cfg, &mut rng));
    }
    for d in distractors
        .iter()
        .filter(|d| d.intersects_image(width, height))
    {
        out.extend(jittered(d, cfg, &mut rng));
    }
    let (sx, sy) = (prev_box.w * cfg.grid_step, prev_box.h * cfg.grid_step);
    let mut ring: i64 = 0;
    while out.len() < cfg.count {
        for j in -ring..=ring {
            for i in -ring..=ring {
                if i.abs().max(j.abs()) != ring || out.len() >= cfg.count {
                    continue;
                }
                out.push(AABox {
                    cx: prev_box.cx + i as f64 * sx,
                    cy: prev_box.cy + j as f64 * sy,
                    ..*prev_box
                });
            }
        }
        ring += 1;
    }
    out.truncate(cfg.count);
    out
}
