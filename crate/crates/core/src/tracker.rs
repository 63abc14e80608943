//! Per-frame tracking state machine.
//!
//! Each step propagates the previous soft mask through the flow field into a
//! FlowMask, scores every proposal, keeps the best one, asks the mask source
//! for that proposal's mask and reports the mask's minimum bounding rectangle.
//! The ablation variants differ only in which flow field feeds the FlowMask,
//! what is stored as the previous mask, and whether flow enters through the
//! score or through hard proposal rejection.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flow::{propagate_mask, FlowField, KernelConfig, B_MIN};
use crate::geometry::{alb_of_mask, mbr_of_mask, AABox, RotBox};
use crate::grid::{check_dims, BinaryMask, ProbMask};
use crate::scoring::{
    compute_normalizer, score_proposal, select_best, FlowNormalizer, Proposal, ProposalScore,
    ScoreConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Flow means and per-pixel uncertainty.
    Full,
    /// Zero-mean flow with a fixed scale.
    NoFlow,
    /// Flow means with a fixed scale.
    NoUncertainty,
    /// Previous mask replaced by its filled axis-aligned box.
    SegmaskAlb,
    /// Previous mask replaced by its filled minimum bounding rectangle.
    SegmaskMbr,
    /// Cosine-penalty scoring after discarding motion-inconsistent proposals.
    FlowReject,
    /// Cosine-penalty scoring only.
    Baseline,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Full,
        Variant::NoFlow,
        Variant::NoUncertainty,
        Variant::SegmaskAlb,
        Variant::SegmaskMbr,
        Variant::FlowReject,
        Variant::Baseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoFlow => "no_flow",
            Variant::NoUncertainty => "no_uncertainty",
            Variant::SegmaskAlb => "segmask_alb",
            Variant::SegmaskMbr => "segmask_mbr",
            Variant::FlowReject => "flow_reject",
            Variant::Baseline => "baseline",
        }
    }

    /// Whether the variant builds a FlowMask and scores with it.
    pub fn uses_flow_mask(self) -> bool {
        !matches!(self, Variant::FlowReject | Variant::Baseline)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::config("variant", format!("unknown variant `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantConfig {
    pub mode: Variant,
    /// Laplace scale used by `no_flow` and `no_uncertainty`.
    pub fixed_scale_b: f64,
    /// Minimum fraction of warped pixels a proposal must contain under `flow_reject`.
    pub reject_threshold: f64,
}

impl Default for VariantConfig {
    fn default() -> Self {
        Self {
            mode: Variant::Full,
            fixed_scale_b: 1.0,
            reject_threshold: 0.25,
        }
    }
}

impl VariantConfig {
    pub fn new(mode: Variant) -> Self {
        Self {
            mode,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fixed_scale_b >= B_MIN) || !self.fixed_scale_b.is_finite() {
            return Err(Error::config(
                "fixed_scale_b",
                format!("must be >= {B_MIN}"),
            ));
        }
        if !(0.0..=1.0).contains(&self.reject_threshold) {
            return Err(Error::config("reject_threshold", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Flow field the variant feeds into mask propagation.
    pub fn effective_flow(&self, flow: &FlowField) -> FlowField {
        match self.mode {
            Variant::NoFlow => {
                let (w, h) = flow.dims();
                FlowField::uniform(w, h, 0.0, 0.0, self.fixed_scale_b)
            }
            Variant::NoUncertainty => flow.with_fixed_scale(self.fixed_scale_b),
            _ => flow.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagnostic {
    /// The thresholded initial mask was empty; the filled box was used instead.
    DegenerateMask,
    /// The selected proposal's mask was empty after thresholding; the previous
    /// mask was kept.
    MaskDropout,
    /// Flow rejection would have removed every proposal; none were removed.
    RejectionBypass,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Diagnostic::DegenerateMask => "degenerate mask",
            Diagnostic::MaskDropout => "mask dropout",
            Diagnostic::RejectionBypass => "rejection bypass",
        })
    }
}

/// Source of the segmentation mask for a chosen proposal.
pub trait MaskSource {
    fn predict_mask(&mut self, proposal: &Proposal) -> Result<ProbMask>;
}

impl<F> MaskSource for F
where
    F: FnMut(&Proposal) -> Result<ProbMask>,
{
    fn predict_mask(&mut self, proposal: &Proposal) -> Result<ProbMask> {
        self(proposal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState {
    pub prev_box: AABox,
    pub prev_rot_box: RotBox,
    pub prev_binary_mask: BinaryMask,
    /// Soft mask propagated by the next step.
    pub prev_prob_mask: ProbMask,
    pub normalizer: FlowNormalizer,
    pub frame_index: usize,
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub rot_box: RotBox,
    /// Index into the proposals passed to [`Tracker::step`].
    pub selected: usize,
    /// Per-proposal scores; `None` for proposals that were off-image or rejected.
    pub scores: Vec<Option<ProposalScore>>,
    pub diagnostics: Vec<Diagnostic>,
    pub flow_mask: Option<ProbMask>,
}

#[derive(Debug, Clone)]
pub struct Tracker {
    score: ScoreConfig,
    variant: VariantConfig,
    kernel: KernelConfig,
    state: TrackerState,
}

impl Tracker {
    /// Seeds the tracker from the first-frame box and mask. An initial mask
    /// that is empty after thresholding is replaced by the filled box.
    pub fn init(
        gt: &RotBox,
        init_mask: &ProbMask,
        score: ScoreConfig,
        variant: VariantConfig,
        kernel: KernelConfig,
    ) -> Result<(Self, Vec<Diagnostic>)> {
        gt.validate()?;
        score.validate()?;
        variant.validate()?;
        kernel.validate()?;
        let (w, h) = init_mask.dims();
        let prev_box = gt.bounding_box();
        let mut diagnostics = Vec::new();

        let mut binary = init_mask.threshold(score.t_seg);
        let mut soft = init_mask.clone();
        if binary.is_empty() {
            diagnostics.push(Diagnostic::DegenerateMask);
            binary = BinaryMask::from_rotbox(w, h, gt);
            if binary.is_empty() {
                let c = gt.center();
                let col = c.x.round().clamp(0.0, w as f64 - 1.0) as usize;
                let row = c.y.round().clamp(0.0, h as f64 - 1.0) as usize;
                binary.set(row, col, true);
            }
            soft = binary.to_prob();
        }
        let soft = stored_mask(variant.mode, &binary, soft)?;
        let normalizer = compute_normalizer(&binary, &prev_box);
        let state = TrackerState {
            prev_box,
            prev_rot_box: *gt,
            prev_binary_mask: binary,
            prev_prob_mask: soft,
            normalizer,
            frame_index: 0,
        };
        Ok((
            Self {
                score,
                variant,
                kernel,
                state,
            },
            diagnostics,
        ))
    }

    pub fn state(&self) -> &TrackerState {
        &self.state
    }

    pub fn score_config(&self) -> &ScoreConfig {
        &self.score
    }

    pub fn variant(&self) -> &VariantConfig {
        &self.variant
    }

    pub fn kernel(&self) -> &KernelConfig {
        &self.kernel
    }

    /// Advances one frame. `flow` is the backward flow from this frame to the
    /// previous one.
    pub fn step(
        &mut self,
        proposals: &[Proposal],
        masks: &mut dyn MaskSource,
        flow: &FlowField,
    ) -> Result<StepOutput> {
        if proposals.is_empty() {
            return Err(Error::NoProposals);
        }
        let dims = self.state.prev_prob_mask.dims();
        check_dims(dims, flow.dims())?;
        let (w, h) = dims;

        let mut diagnostics = Vec::new();
        let mut candidates: Vec<usize> = (0..proposals.len())
            .filter(|&i| {
                let b = &proposals[i].bbox;
                b.validate().is_ok() && b.intersects_image(w, h)
            })
            .collect();
        if candidates.is_empty() {
            return Err(Error::OffImageProposal);
        }

        if self.variant.mode == Variant::FlowReject {
            let (kept, bypass) = flow_rejection_filter(
                &self.state,
                proposals,
                &candidates,
                flow,
                self.variant.reject_threshold,
            );
            if bypass {
                diagnostics.push(Diagnostic::RejectionBypass);
            }
            candidates = kept;
        }

        let flow_mask = if self.variant.mode.uses_flow_mask() {
            let eff = self.variant.effective_flow(flow);
            Some(propagate_mask(
                &self.state.prev_prob_mask,
                &eff,
                &self.kernel,
            )?)
        } else {
            None
        };

        let mut scores = vec![None; proposals.len()];
        let mut ranked = Vec::with_capacity(candidates.len());
        for &i in &candidates {
            let s = score_proposal(
                &proposals[i],
                &self.state.prev_box,
                &self.score,
                flow_mask.as_ref().map(|m| (m, self.state.normalizer)),
            )?;
            scores[i] = Some(s);
            ranked.push((proposals[i].bbox, s.total));
        }
        let selected = candidates[select_best(&ranked, &self.state.prev_box)?];
        let winner = proposals[selected];

        let mask = masks.predict_mask(&winner)?;
        check_dims(dims, mask.dims())?;
        let binary = mask.threshold(self.score.t_seg);
        let rot_box = if binary.is_empty() {
            diagnostics.push(Diagnostic::MaskDropout);
            winner.bbox.to_rotbox()
        } else {
            let out = mbr_of_mask(&binary)?;
            self.state.prev_prob_mask = stored_mask(self.variant.mode, &binary, mask)?;
            self.state.prev_binary_mask = binary;
            out
        };

        self.state.prev_box = winner.bbox;
        self.state.prev_rot_box = rot_box;
        self.state.normalizer = compute_normalizer(&self.state.prev_binary_mask, &winner.bbox);
        self.state.frame_index += 1;

        Ok(StepOutput {
            rot_box,
            selected,
            scores,
            diagnostics,
            flow_mask,
        })
    }
}

/// Mask kept for the next propagation: the soft mask, or for the segmask
/// ablations the filled ALB / MBR region of the binary mask.
fn stored_mask(mode: Variant, binary: &BinaryMask, soft: ProbMask) -> Result<ProbMask> {
    let (w, h) = binary.dims();
    Ok(match mode {
        Variant::SegmaskAlb => BinaryMask::from_aabox(w, h, &alb_of_mask(binary)?).to_prob(),
        Variant::SegmaskMbr => BinaryMask::from_rotbox(w, h, &mbr_of_mask(binary)?).to_prob(),
        _ => soft,
    })
}

/// Pixels of the current frame whose backward flow mean lands strictly inside
/// the previous box: the previous box warped forward by the flow.
pub fn warped_pixels(prev_box: &AABox, flow: &FlowField) -> Vec<(usize, usize)> {
    let (w, h) = flow.dims();
    let mut out = Vec::new();
    for row in 0..h {
        for col in 0..w {
            let x = col as f64 + flow.mean_u.get(row, col);
            let y = row as f64 + flow.mean_v.get(row, col);
            if prev_box.contains(x, y) {
                out.push((row, col));
            }
        }
    }
    out
}

/// Keeps the candidate proposals that contain at least `threshold` of the
/// warped previous-box pixels. When every candidate would be dropped the input
/// set is returned with the bypass flag raised.
pub fn flow_rejection_filter(
    state: &TrackerState,
    proposals: &[Proposal],
    candidates: &[usize],
    flow: &FlowField,
    threshold: f64,
) -> (Vec<usize>, bool) {
    let warped = warped_pixels(&state.prev_box, flow);
    let need = threshold * warped.len() as f64;
    let kept: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&i| {
            let b = &proposals[i].bbox;
            let inside = warped
                .iter()
                .filter(|&&(r, c)| b.contains(c as f64, r as f64))
                .count();
            inside as f64 >= need
        })
        .collect();
    if kept.is_empty() {
        (candidates.to_vec(), true)
    } else {
        (kept, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AABox;

    const W: usize = 40;
    const H: usize = 40;

    fn block(x0: usize, y0: usize, w: usize, h: usize) -> BinaryMask {
        BinaryMask::from_fn(W, H, |r, c| {
            (y0..y0 + h).contains(&r) && (x0..x0 + w).contains(&c)
        })
    }

    fn bounds(m: &BinaryMask) -> AABox {
        alb_of_mask(m).unwrap()
    }

    fn tracker(mode: Variant, mask: &BinaryMask, score: ScoreConfig) -> (Tracker, Vec<Diagnostic>) {
        Tracker::init(
            &bounds(mask).to_rotbox(),
            &mask.to_prob(),
            score,
            VariantConfig::new(mode),
            KernelConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn init_normalizer() {
        let full = block(10, 10, 8, 6);
        let (t, d) = tracker(Variant::Full, &full, ScoreConfig::default());
        assert!(d.is_empty());
        assert_eq!(t.state().normalizer.t_flow, 1.0);

        let gt = bounds(&full).to_rotbox();
        let half = block(10, 10, 4, 6).to_prob();
        let (t, _) = Tracker::init(
            &gt,
            &half,
            ScoreConfig::default(),
            VariantConfig::default(),
            KernelConfig::default(),
        )
        .unwrap();
        assert_eq!(t.state().normalizer.t_flow, 0.5);

        let (t, d) = Tracker::init(
            &gt,
            &ProbMask::filled(W, H, 0.0),
            ScoreConfig::default(),
            VariantConfig::default(),
            KernelConfig::default(),
        )
        .unwrap();
        assert_eq!(d, vec![Diagnostic::DegenerateMask]);
        assert_eq!(t.state().normalizer.t_flow, 1.0);
        assert_eq!(t.state().prev_binary_mask, full);
    }

    #[test]
    fn init_rejects_degenerate_box() {
        let bad = RotBox {
            corners: [crate::geometry::Point::new(1.0, 1.0); 4],
        };
        assert!(Tracker::init(
            &bad,
            &ProbMask::filled(W, H, 0.0),
            ScoreConfig::default(),
            VariantConfig::default(),
            KernelConfig::default()
        )
        .is_err());
    }

    #[test]
    fn fixed_point_on_identity_flow() {
        let m = block(12, 14, 7, 5);
        let (mut t, _) = tracker(Variant::Full, &m, ScoreConfig::default());
        let before = t.state().normalizer;
        let props = [Proposal {
            bbox: bounds(&m),
            d: 1.0,
        }];
        let mut src = |_: &Proposal| Ok(m.to_prob());
        let out = t
            .step(&props, &mut src, &FlowField::identity(W, H))
            .unwrap();
        assert_eq!(out.rot_box, mbr_of_mask(&m).unwrap());
        assert_eq!(t.state().normalizer, before);
        assert!(out.diagnostics.is_empty());
    }

    #[test]
    fn flow_beats_more_similar_distractor() {
        let target = block(5, 15, 6, 6);
        let distractor = block(27, 15, 6, 6);
        let score = ScoreConfig {
            k_c: 0.42,
            k_f: 1.0,
            window_scale: 10.0,
            ..Default::default()
        };
        let (mut t, _) = tracker(Variant::Full, &target, score);
        let props = [
            Proposal {
                bbox: bounds(&target),
                d: 0.9,
            },
            Proposal {
                bbox: bounds(&distractor),
                d: 0.95,
            },
        ];
        let mut src = |p: &Proposal| Ok(BinaryMask::from_aabox(W, H, &p.bbox).to_prob());
        let out = t
            .step(&props, &mut src, &FlowField::identity(W, H))
            .unwrap();
        let s0 = out.scores[0].unwrap();
        let s1 = out.scores[1].unwrap();
        assert_eq!(s0.flow, Some(1.0));
        assert_eq!(s1.flow, Some(0.0));
        assert!((s0.total - (0.58 * 0.9 + 0.42)).abs() < 1e-12);
        assert!((s1.total - 0.58 * 0.95).abs() < 1e-12);
        assert_eq!(out.selected, 0);

        // the appearance-only baseline picks the distractor
        let score0 = ScoreConfig { k_c: 0.0, ..score };
        let (mut b, _) = tracker(Variant::Baseline, &target, score0);
        let out = b
            .step(&props, &mut src, &FlowField::identity(W, H))
            .unwrap();
        assert_eq!(out.selected, 1);
    }

    #[test]
    fn mask_dropout_keeps_previous_mask() {
        let m = block(10, 10, 5, 5);
        let (mut t, _) = tracker(Variant::Full, &m, ScoreConfig::default());
        let props = [Proposal {
            bbox: AABox::new(14.0, 12.0, 5.0, 5.0).unwrap(),
            d: 1.0,
        }];
        let mut empty = |_: &Proposal| Ok(ProbMask::filled(W, H, 0.0));
        let out = t
            .step(&props, &mut empty, &FlowField::identity(W, H))
            .unwrap();
        assert_eq!(out.diagnostics, vec![Diagnostic::MaskDropout]);
        assert_eq!(t.state().prev_binary_mask, m);
        assert_eq!(t.state().prev_box, props[0].bbox);
        assert_eq!(
            t.state().normalizer,
            compute_normalizer(&t.state().prev_binary_mask, &t.state().prev_box)
        );
    }

    #[test]
    fn all_off_image_errors() {
        let m = block(10, 10, 5, 5);
        let (mut t, _) = tracker(Variant::Full, &m, ScoreConfig::default());
        let props = [Proposal {
            bbox: AABox::new(-50.0, 12.0, 5.0, 5.0).unwrap(),
            d: 1.0,
        }];
        let mut src = |_: &Proposal| Ok(m.to_prob());
        assert!(matches!(
            t.step(&props, &mut src, &FlowField::identity(W, H)),
            Err(Error::OffImageProposal)
        ));
        assert!(matches!(
            t.step(&[], &mut src, &FlowField::identity(W, H)),
            Err(Error::NoProposals)
        ));
    }

    #[test]
    fn segmask_variants_store_filled_regions() {
        // L-shaped mask: ALB fill differs from the mask itself
        let l = BinaryMask::from_fn(W, H, |r, c| {
            ((5..15).contains(&r) && (5..8).contains(&c))
                || ((12..15).contains(&r) && (5..15).contains(&c))
        });
        let (t, _) = tracker(Variant::SegmaskAlb, &l, ScoreConfig::default());
        assert_eq!(t.state().prev_prob_mask, block(5, 5, 10, 10).to_prob());
        let (t, _) = tracker(Variant::SegmaskMbr, &l, ScoreConfig::default());
        let stored = t.state().prev_prob_mask.threshold(0.5);
        assert!(stored.count() >= l.count());
        let (t, _) = tracker(Variant::Full, &l, ScoreConfig::default());
        assert_eq!(t.state().prev_prob_mask, l.to_prob());
    }

    fn rejection_state() -> TrackerState {
        // 10x10 previous box over pixels 10..20
        let m = block(10, 10, 10, 10);
        tracker(Variant::FlowReject, &m, ScoreConfig::default())
            .0
            .state()
            .clone()
    }

    fn prop(x0: usize, y0: usize, w: usize, h: usize) -> Proposal {
        Proposal {
            bbox: AABox::from_bounds(
                x0 as f64 - 0.5,
                y0 as f64 - 0.5,
                (x0 + w) as f64 - 0.5,
                (y0 + h) as f64 - 0.5,
            )
            .unwrap(),
            d: 1.0,
        }
    }

    #[test]
    fn rejection_threshold_boundary() {
        let state = rejection_state();
        let flow = FlowField::identity(W, H);
        assert_eq!(warped_pixels(&state.prev_box, &flow).len(), 100);
        let props = [
            prop(10, 10, 4, 6),   // 24 warped pixels
            prop(10, 10, 5, 5),   // 25
            prop(10, 10, 10, 10), // all
            prop(25, 25, 5, 5),   // none
        ];
        let (kept, bypass) = flow_rejection_filter(&state, &props, &[0, 1, 2, 3], &flow, 0.25);
        assert_eq!(kept, vec![1, 2]);
        assert!(!bypass);
    }

    #[test]
    fn rejection_bypass() {
        let state = rejection_state();
        let flow = FlowField::identity(W, H);
        let props = [prop(25, 25, 5, 5), prop(0, 0, 3, 3)];
        let (kept, bypass) = flow_rejection_filter(&state, &props, &[0, 1], &flow, 0.25);
        assert_eq!(kept, vec![0, 1]);
        assert!(bypass);
    }

    #[test]
    fn rejection_follows_flow() {
        let state = rejection_state();
        // content moved +8 px in x: backward mean -8
        let flow = FlowField::uniform(W, H, -8.0, 0.0, B_MIN);
        let props = [prop(10, 10, 10, 10), prop(18, 10, 10, 10)];
        let (kept, _) = flow_rejection_filter(&state, &props, &[0, 1], &flow, 0.25);
        assert_eq!(kept, vec![1]);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("ours".parse::<Variant>().is_err());
    }

    #[test]
    fn effective_flows() {
        let f = FlowField::uniform(4, 4, -2.0, 1.0, 0.3);
        let vc = VariantConfig {
            mode: Variant::NoFlow,
            fixed_scale_b: 1.5,
            reject_threshold: 0.25,
        };
        let nf = vc.effective_flow(&f);
        assert_eq!(nf.mean_u.max(), 0.0);
        assert_eq!(nf.scale_v.min(), 1.5);
        let nu = VariantConfig {
            mode: Variant::NoUncertainty,
            ..vc
        }
        .effective_flow(&f);
        assert_eq!(nu.mean_u, f.mean_u);
        assert_eq!(nu.scale_u.max(), 1.5);
        let full = VariantConfig::new(Variant::Full).effective_flow(&f);
        assert_eq!(full, f);
    }
}
