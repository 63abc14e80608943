use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::noise::NoiseModel;
use crate::geometry::{iou, AABox};

/// Stand-in for a learned similarity score in `[0, 1]`.
///
/// `d = visibility * IoU(gt) + confusion * max(similarity * IoU(distractor)) + noise`,
/// clipped. `visibility` is the visible fraction of the target, so an
/// occluded target looks less like itself. `similarity` is the ratio of the
/// smaller to the larger of the distractor and target areas.
pub fn synth_appearance(
    proposals: &[AABox],
    gt: Option<&AABox>,
    visibility: f64,
    distractors: &[AABox],
    noise: &NoiseModel,
    seed: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    proposals
        .iter()
        .map(|p| {
            let own = gt.map_or(0.0, |g| iou(p, g)) * visibility.clamp(0.0, 1.0);
            let other = distractors
                .iter()
                .map(|d| {
                    let sim = gt.map_or(1.0, |g| {
                        let (a, b) = (g.w * g.h, d.w * d.h);
                        a.min(b) / a.max(b)
                    });
                    sim * iou(p, d)
                })
                .fold(0.0, f64::max);
            let jitter = if noise.appearance_noise > 0.0 {
                rng.gen_range(-noise.appearance_noise..=noise.appearance_noise)
            } else {
                0.0
            };
            (own + noise.appearance_confusion * other + jitter).clamp(0.0, 1.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_in_gt_overlap_without_noise() {
        let gt = AABox::new(20.0, 20.0, 10.0, 10.0).unwrap();
        let props: Vec<AABox> = (0..8)
            .map(|i| AABox::new(20.0 + i as f64, 20.0, 10.0, 10.0).unwrap())
            .collect();
        let d = synth_appearance(&props, Some(&gt), 1.0, &[], &NoiseModel::clean(), 1);
        assert_eq!(d[0], 1.0);
        assert!(d.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn confusion_raises_distractor_scores() {
        let gt = AABox::new(10.0, 10.0, 6.0, 6.0).unwrap();
        let dis = AABox::new(40.0, 10.0, 6.0, 6.0).unwrap();
        let noise = NoiseModel {
            appearance_confusion: 0.95,
            ..NoiseModel::clean()
        };
        let d = synth_appearance(&[gt, dis], Some(&gt), 1.0, &[dis], &noise, 1);
        assert_eq!(d, vec![1.0, 0.95]);
        let noisy = NoiseModel {
            appearance_noise: 0.5,
            ..noise
        };
        let d = synth_appearance(&[gt, dis], None, 1.0, &[dis], &noisy, 4);
        assert!(d.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
