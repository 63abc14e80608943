//! Per-proposal scores and box selection.
//!
//! A proposal's total score mixes its appearance score `d`, damped by the
//! size-change penalty, with a motion term:
//!
//! ```text
//! total  = (1 - k_c) * p_s * d + k_c * motion
//! motion = (1 - k_f) * p_c + k_f * min(f_s / t_flow, 1)
//! ```
//!
//! `p_c` is a raised-cosine window around the previous centre and `f_s` the
//! mean FlowMask probability inside the proposal. With `k_f = 0` the motion
//! term is the plain cosine penalty.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{AABox, Point};
use crate::grid::{BinaryMask, ProbMask};

/// Lower clamp on the flow-score normaliser.
pub const T_FLOW_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreConfig {
    /// Weight of the motion term against the appearance term, in `[0, 1]`.
    pub k_c: f64,
    /// Sharpness of the size-change penalty, `>= 0`.
    pub k_p: f64,
    /// Weight of the flow score inside the motion term, in `[0, 1]`.
    pub k_f: f64,
    /// Mask binarisation threshold, in `(0, 1)`.
    pub t_seg: f64,
    /// Cosine window half-support as a multiple of the previous box extent.
    pub window_scale: f64,
    /// Context padding `p = padding_factor * (w + h)` in the padded area.
    pub padding_factor: f64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            k_c: 0.42,
            k_p: 0.04,
            k_f: 0.5,
            t_seg: 0.30,
            window_scale: 2.0,
            padding_factor: 0.5,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.k_c) {
            return Err(Error::config("k_c", format!("{} not in [0, 1]", self.k_c)));
        }
        if !(self.k_p >= 0.0) || !self.k_p.is_finite() {
            return Err(Error::config("k_p", format!("{} must be >= 0", self.k_p)));
        }
        if !unit(self.k_f) {
            return Err(Error::config("k_f", format!("{} not in [0, 1]", self.k_f)));
        }
        if !(self.t_seg > 0.0 && self.t_seg < 1.0) {
            return Err(Error::config(
                "t_seg",
                format!("{} not in (0, 1)", self.t_seg),
            ));
        }
        if !(self.window_scale > 0.0) || !self.window_scale.is_finite() {
            return Err(Error::config("window_scale", "must be positive"));
        }
        if !(self.padding_factor >= 0.0) || !self.padding_factor.is_finite() {
            return Err(Error::config("padding_factor", "must be >= 0"));
        }
        Ok(())
    }
}

fn padded_side(b: &AABox, padding_factor: f64) -> f64 {
    let p = padding_factor * (b.w + b.h);
    ((b.w + p) * (b.h + p)).sqrt()
}

fn change(r: f64) -> f64 {
    r.max(1.0 / r)
}

/// `exp((1 - max(r/r', r'/r) * max(s/s', s'/s)) * k_p)` with `r` the aspect
/// ratio and `s` the padded side of each box.
pub fn size_penalty(prop: &AABox, prev: &AABox, k_p: f64) -> f64 {
    size_penalty_with(prop, prev, k_p, 0.5)
}

pub fn size_penalty_with(prop: &AABox, prev: &AABox, k_p: f64, padding_factor: f64) -> f64 {
    let r = (prop.w / prop.h) / (prev.w / prev.h);
    let s = padded_side(prop, padding_factor) / padded_side(prev, padding_factor);
    ((1.0 - change(r) * change(s)) * k_p).exp()
}

/// Separable raised-cosine window centred on the previous box, reaching zero
/// at `window_scale` times the box width (height) away from the centre.
pub fn cosine_penalty(center: Point, prev: &AABox, window_scale: f64) -> f64 {
    let axis = |delta: f64, extent: f64| {
        let r = window_scale * extent;
        if delta.abs() >= r {
            0.0
        } else {
            0.5 * (1.0 + (PI * delta / r).cos())
        }
    };
    axis(center.x - prev.cx, prev.w) * axis(center.y - prev.cy, prev.h)
}

/// Mean FlowMask probability over the pixels whose centres lie strictly inside
/// the box, clipped to the image. A box that overlaps the image without
/// containing any pixel centre reads the pixel nearest to its clipped centre.
pub fn flow_score(bbox: &AABox, flowmask: &ProbMask) -> Result<f64> {
    let (w, h) = flowmask.dims();
    if !bbox.intersects_image(w, h) {
        return Err(Error::OffImageProposal);
    }
    let ((r0, r1), (c0, c1)) = bbox.pixel_ranges(w, h);
    let n = (r1 - r0) * (c1 - c0);
    if n == 0 {
        let c = bbox.cx.round().clamp(0.0, w as f64 - 1.0) as usize;
        let r = bbox.cy.round().clamp(0.0, h as f64 - 1.0) as usize;
        return Ok(flowmask.get(r, c));
    }
    let mut sum = 0.0;
    for r in r0..r1 {
        sum += flowmask.grid().row(r)[c0..c1].iter().sum::<f64>();
    }
    Ok((sum / n as f64).clamp(0.0, 1.0))
}

/// Shape correction for the flow score: fraction of the previous box covered
/// by the previous binary mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowNormalizer {
    pub t_flow: f64,
    /// The mask was empty; `t_flow` sits at its lower clamp.
    pub degenerate: bool,
}

impl FlowNormalizer {
    pub const UNIT: FlowNormalizer = FlowNormalizer {
        t_flow: 1.0,
        degenerate: false,
    };
}

/// Foreground pixel count of `mask` over the pixel count of `prev_box`,
/// clamped to `[T_FLOW_MIN, 1]`.
pub fn compute_normalizer(mask: &BinaryMask, prev_box: &AABox) -> FlowNormalizer {
    let fg = mask.count();
    if fg == 0 {
        return FlowNormalizer {
            t_flow: T_FLOW_MIN,
            degenerate: true,
        };
    }
    let (w, h) = mask.dims();
    let n_box = prev_box.pixel_count(w, h);
    let ratio = if n_box == 0 {
        1.0
    } else {
        fg as f64 / n_box as f64
    };
    FlowNormalizer {
        t_flow: ratio.clamp(T_FLOW_MIN, 1.0),
        degenerate: false,
    }
}

pub fn normalized_flow_score(f_s: f64, norm: FlowNormalizer) -> f64 {
    (f_s / norm.t_flow).min(1.0)
}

pub fn motion_score(p_c: f64, f_s_prime: f64, k_f: f64) -> f64 {
    (1.0 - k_f) * p_c + k_f * f_s_prime
}

pub fn total_score(d: f64, p_s: f64, motion: f64, k_c: f64) -> f64 {
    (1.0 - k_c) * p_s * d + k_c * motion
}

/// Candidate for an appearance-matched box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub bbox: AABox,
    /// Appearance matching score.
    pub d: f64,
}

/// Score breakdown for one proposal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalScore {
    pub p_s: f64,
    pub p_c: f64,
    /// Normalised flow score, `None` when no FlowMask was used.
    pub flow: Option<f64>,
    pub motion: f64,
    pub total: f64,
}

/// Scores one proposal; `flow` carries the FlowMask and its normaliser when the
/// flow term is active.
pub fn score_proposal(
    prop: &Proposal,
    prev: &AABox,
    cfg: &ScoreConfig,
    flow: Option<(&ProbMask, FlowNormalizer)>,
) -> Result<ProposalScore> {
    let p_s = size_penalty_with(&prop.bbox, prev, cfg.k_p, cfg.padding_factor);
    let p_c = cosine_penalty(prop.bbox.center(), prev, cfg.window_scale);
    let (flow, motion) = match flow {
        Some((mask, norm)) => {
            let f = normalized_flow_score(flow_score(&prop.bbox, mask)?, norm);
            (Some(f), motion_score(p_c, f, cfg.k_f))
        }
        None => (None, p_c),
    };
    Ok(ProposalScore {
        p_s,
        p_c,
        flow,
        motion,
        total: total_score(prop.d, p_s, motion, cfg.k_c),
    })
}

/// Index of the highest total score. Ties go to the box whose centre is
/// closest to `prev`, then to the lowest index.
pub fn select_best(candidates: &[(AABox, f64)], prev: &AABox) -> Result<usize> {
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, (bbox, score)) in candidates.iter().enumerate() {
        let dist = bbox.center_distance(prev);
        let better = match best {
            None => true,
            Some((_, s, d)) => *score > s || (*score == s && dist < d),
        };
        if better {
            best = Some((i, *score, dist));
        }
    }
    best.map(|(i, _, _)| i).ok_or(Error::NoProposals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(cx: f64, cy: f64, w: f64, h: f64) -> AABox {
        AABox::new(cx, cy, w, h).unwrap()
    }

    #[test]
    fn size_penalty_cases() {
        let prev = bx(10.0, 10.0, 10.0, 10.0);
        assert_eq!(size_penalty(&prev, &prev, 0.3), 1.0);
        assert_eq!(size_penalty(&bx(3.0, 3.0, 40.0, 5.0), &prev, 0.0), 1.0);
        let prop = bx(10.0, 10.0, 20.0, 10.0);
        let p = size_penalty(&prop, &prev, 0.1);
        // s = sqrt(35 * 25), s' = 20
        let expect = ((1.0 - 2.0 * 875f64.sqrt() / 20.0) * 0.1).exp();
        assert!((p - expect).abs() < 1e-12);
        assert!((p - 0.8222).abs() < 1e-4);
        assert!((size_penalty(&prev, &prop, 0.1) - p).abs() < 1e-15);
    }

    #[test]
    fn cosine_cases() {
        let prev = bx(50.0, 50.0, 10.0, 8.0);
        assert_eq!(cosine_penalty(Point::new(50.0, 50.0), &prev, 2.0), 1.0);
        assert_eq!(cosine_penalty(Point::new(70.0, 50.0), &prev, 2.0), 0.0);
        assert!((cosine_penalty(Point::new(60.0, 50.0), &prev, 2.0) - 0.5).abs() < 1e-15);
        assert_eq!(cosine_penalty(Point::new(90.0, 50.0), &prev, 2.0), 0.0);
    }

    #[test]
    fn flow_score_cases() {
        let half = ProbMask::filled(20, 20, 0.5);
        let b = AABox::from_bounds(2.5, 2.5, 8.5, 6.5).unwrap();
        assert_eq!(flow_score(&b, &half).unwrap(), 0.5);
        let zeros = ProbMask::filled(20, 20, 0.0);
        assert_eq!(flow_score(&b, &zeros).unwrap(), 0.0);
        // indicator over the left half of the box's 6 columns
        let ind = BinaryMask::from_fn(20, 20, |_, c| c <= 5).to_prob();
        assert_eq!(flow_score(&b, &ind).unwrap(), 0.5);
        let off = bx(-30.0, 5.0, 4.0, 4.0);
        assert!(matches!(
            flow_score(&off, &half),
            Err(Error::OffImageProposal)
        ));
    }

    #[test]
    fn normalizer_cases() {
        let prev = AABox::from_bounds(1.5, 1.5, 5.5, 5.5).unwrap(); // 16 pixels
        let full = BinaryMask::from_aabox(10, 10, &prev);
        assert_eq!(compute_normalizer(&full, &prev).t_flow, 1.0);
        let half = BinaryMask::from_fn(10, 10, |r, c| (2..4).contains(&r) && (2..6).contains(&c));
        assert_eq!(compute_normalizer(&half, &prev).t_flow, 0.5);
        // 24 mask pixels against a 20-pixel box
        let prev20 = AABox::from_bounds(1.5, 1.5, 6.5, 5.5).unwrap();
        let spill = BinaryMask::from_fn(10, 10, |r, c| (2..6).contains(&r) && (2..8).contains(&c));
        assert_eq!(prev20.pixel_count(10, 10), 20);
        assert!((spill.count() as f64 / 20.0 - 1.2).abs() < 1e-15);
        assert_eq!(compute_normalizer(&spill, &prev20).t_flow, 1.0);
        let empty = compute_normalizer(&BinaryMask::empty(10, 10), &prev);
        assert!(empty.degenerate);
        assert_eq!(empty.t_flow, T_FLOW_MIN);
    }

    #[test]
    fn eq8_and_eq9() {
        let n = |t| FlowNormalizer {
            t_flow: t,
            degenerate: false,
        };
        assert_eq!(normalized_flow_score(0.6, n(0.5)), 1.0);
        assert!((normalized_flow_score(0.3, n(0.6)) - 0.5).abs() < 1e-15);
        assert_eq!(normalized_flow_score(0.0, n(0.37)), 0.0);
        assert_eq!(motion_score(0.37, 0.9, 0.0), 0.37);
        assert_eq!(motion_score(0.37, 0.9, 1.0), 0.9);
        assert!((motion_score(0.5, 1.0, 0.4) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn total_score_cases() {
        assert_eq!(total_score(0.8, 0.9, 0.1, 0.0), 0.9 * 0.8);
        assert_eq!(total_score(0.8, 0.9, 0.1, 1.0), 0.1);
        assert!((total_score(0.8, 1.0, 0.9, 0.42) - 0.842).abs() < 1e-12);
    }

    #[test]
    fn select_best_ties() {
        let prev = bx(0.0, 0.0, 4.0, 4.0);
        assert_eq!(
            select_best(&[(bx(9.0, 9.0, 2.0, 2.0), 0.1)], &prev).unwrap(),
            0
        );
        let c = [
            (bx(1.0, 0.0, 2.0, 2.0), 0.2),
            (bx(8.0, 0.0, 2.0, 2.0), 0.9),
            (bx(3.0, 0.0, 2.0, 2.0), 0.9),
        ];
        assert_eq!(select_best(&c, &prev).unwrap(), 2);
        let same = [(bx(3.0, 0.0, 2.0, 2.0), 0.5), (bx(0.0, 3.0, 2.0, 2.0), 0.5)];
        assert_eq!(select_best(&same, &prev).unwrap(), 0);
        assert!(matches!(select_best(&[], &prev), Err(Error::NoProposals)));
    }

    #[test]
    fn config_validation() {
        assert!(ScoreConfig::default().validate().is_ok());
        let bad = ScoreConfig {
            k_f: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ScoreConfig {
            t_seg: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
