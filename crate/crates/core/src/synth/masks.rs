use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scene::RenderedFrame;
use crate::error::Result;
use crate::grid::{ProbMask, ScalarGrid};
use crate::scoring::Proposal;
use crate::tracker::MaskSource;

/// Segmentation stand-in: inside the proposal box enlarged by `context`, it
/// segments whichever object has the most visible pixels there.
#[derive(Debug, Clone)]
pub struct SyntheticMaskSource<'a> {
    frame: &'a RenderedFrame,
    pub context: f64,
    pub foreground: f64,
    pub background: f64,
    /// Flip probability for pixels on the object boundary.
    pub corruption: f64,
    seed: u64,
}

impl<'a> SyntheticMaskSource<'a> {
    pub fn new(frame: &'a RenderedFrame, corruption: f64, seed: u64) -> Self {
        Self {
            frame,
            context: 1.5,
            foreground: 0.9,
            background: 0.05,
            corruption,
            seed,
        }
    }
}

impl MaskSource for SyntheticMaskSource<'_> {
    fn predict_mask(&mut self, proposal: &Proposal) -> Result<ProbMask> {
        let f = self.frame;
        let (w, h) = (f.width, f.height);
        let region = crate::geometry::AABox {
            w: proposal.bbox.w * self.context,
            h: proposal.bbox.h * self.context,
            ..proposal.bbox
        };
        let ((r0, r1), (c0, c1)) = region.pixel_ranges(w, h);
        let mut counts = vec![0usize; f.object_boxes.len() + 1];
        for r in r0..r1 {
            for c in c0..c1 {
                counts[f.label(r, c) as usize] += 1;
            }
        }
        let best = (1..counts.len())
            .filter(|&l| counts[l] > 0)
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)));
        let Some(label) = best else {
            return Ok(ProbMask::filled(w, h, 0.0));
        };
        let label = label as u16;
        let on = |r: usize, c: usize| f.label(r, c) == label;

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut g = ScalarGrid::zeros(w, h);
        for r in r0..r1 {
            for c in c0..c1 {
                let here = on(r, c);
                let edge = [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)]
                    .iter()
                    .any(|&(dr, dc)| {
                        let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                        rr >= 0
                            && cc >= 0
                            && (rr as usize) < h
                            && (cc as usize) < w
                            && on(rr as usize, cc as usize) != here
                    });
                let flip = edge && self.corruption > 0.0 && rng.gen::<f64>() < self.corruption;
                let v = if here != flip {
                    self.foreground
                } else {
                    self.background
                };
                g.set(r, c, v);
            }
        }
        Ok(ProbMask::clamped(g))
    }
}
