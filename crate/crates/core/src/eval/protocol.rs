use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{iou, polygon_overlap, RotBox};

/// How predicted and ground-truth boxes are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapMode {
    /// Exact rotated-polygon IoU.
    #[default]
    Polygon,
    /// IoU of the axis-aligned bounding boxes.
    AxisAligned,
}

impl OverlapMode {
    pub fn overlap(self, a: &RotBox, b: &RotBox) -> Result<f64> {
        match self {
            OverlapMode::Polygon => polygon_overlap(a, b),
            OverlapMode::AxisAligned => {
                a.validate()?;
                b.validate()?;
                Ok(iou(&a.bounding_box(), &b.bounding_box()))
            }
        }
    }
}

impl fmt::Display for OverlapMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OverlapMode::Polygon => "polygon",
            OverlapMode::AxisAligned => "axis",
        })
    }
}

impl FromStr for OverlapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polygon" => Ok(OverlapMode::Polygon),
            "axis" | "axis_aligned" => Ok(OverlapMode::AxisAligned),
            _ => Err(Error::config(
                "overlap",
                format!("unknown overlap mode `{s}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    /// Frames between a failure and the re-initialisation.
    pub reinit_delay: usize,
    /// Frames after each initialisation excluded from accuracy.
    pub burn_in: usize,
    /// Inclusive range of sequence lengths averaged by EAO.
    pub eao_range: (usize, usize),
    pub overlap: OverlapMode,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            reinit_delay: 5,
            burn_in: 10,
            eao_range: (10, 50),
            overlap: OverlapMode::Polygon,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reinit_delay == 0 {
            return Err(Error::config("reinit_delay", "must be at least 1"));
        }
        let (lo, hi) = self.eao_range;
        if lo == 0 || lo > hi {
            return Err(Error::config(
                "eao_low",
                "EAO range must satisfy 1 <= low <= high",
            ));
        }
        Ok(())
    }
}

/// Anything that can be driven by the reset protocol.
pub trait FrameTracker {
    fn init(&mut self, frame: usize, gt: &RotBox) -> Result<()>;
    fn track(&mut self, frame: usize) -> Result<RotBox>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameStatus {
    Init,
    Tracked { overlap: f64, in_burn_in: bool },
    Failure,
    Skipped,
}

/// Overlaps of the tracked frames after one initialisation, and whether the
/// run ended in a failure.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub overlaps: Vec<f64>,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceResult {
    pub frames: Vec<FrameStatus>,
    pub outputs: Vec<Option<RotBox>>,
}

impl SequenceResult {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn failures(&self) -> usize {
        self.frames
            .iter()
            .filter(|f| matches!(f, FrameStatus::Failure))
            .count()
    }

    /// Failures per 100 frames.
    pub fn robustness(&self) -> f64 {
        if self.frames.is_empty() {
            0.0
        } else {
            100.0 * self.failures() as f64 / self.frames.len() as f64
        }
    }

    /// Overlaps that count toward accuracy: tracked frames outside burn-in.
    pub fn accuracy_overlaps(&self) -> Vec<f64> {
        self.frames
            .iter()
            .filter_map(|f| match *f {
                FrameStatus::Tracked {
                    overlap,
                    in_burn_in: false,
                } => Some(overlap),
                _ => None,
            })
            .collect()
    }

    /// Mean overlap outside burn-in, or `None` when no frame qualifies.
    pub fn accuracy(&self) -> Option<f64> {
        let v = self.accuracy_overlaps();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn segments(&self) -> Vec<Segment> {
        let mut out: Vec<Segment> = Vec::new();
        let mut open: Option<Segment> = None;
        for f in &self.frames {
            match *f {
                FrameStatus::Init => {
                    if let Some(s) = open.take() {
                        out.push(s);
                    }
                    open = Some(Segment {
                        overlaps: Vec::new(),
                        failed: false,
                    });
                }
                FrameStatus::Tracked { overlap, .. } => {
                    if let Some(s) = open.as_mut() {
                        s.overlaps.push(overlap);
                    }
                }
                FrameStatus::Failure => {
                    if let Some(mut s) = open.take() {
                        s.failed = true;
                        out.push(s);
                    }
                }
                FrameStatus::Skipped => {}
            }
        }
        out.extend(open);
        out
    }

    /// Rebuilds burn-in flags and overlaps from per-frame outputs.
    pub fn from_outputs(
        kinds: &[FrameStatus],
        outputs: &[Option<RotBox>],
        gt: &[RotBox],
        cfg: &ProtocolConfig,
    ) -> Result<Self> {
        if kinds.len() != gt.len() || outputs.len() != gt.len() {
            return Err(Error::Insufficient(format!(
                "{} result lines for {} ground-truth frames",
                kinds.len(),
                gt.len()
            )));
        }
        let mut frames = Vec::with_capacity(kinds.len());
        let mut last_init: Option<usize> = None;
        for (t, k) in kinds.iter().enumerate() {
            frames.push(match k {
                FrameStatus::Init => {
                    last_init = Some(t);
                    FrameStatus::Init
                }
                FrameStatus::Tracked { .. } => {
                    let out = outputs[t].ok_or_else(|| {
                        Error::Format(format!("frame {t}: tracked without a box"))
                    })?;
                    let overlap = cfg.overlap.overlap(&out, &gt[t])?;
                    let since = t - last_init.ok_or_else(|| {
                        Error::Format(format!("frame {t}: tracked before any init"))
                    })?;
                    FrameStatus::Tracked {
                        overlap,
                        in_burn_in: since <= cfg.burn_in,
                    }
                }
                other => *other,
            });
        }
        Ok(Self {
            frames,
            outputs: outputs.to_vec(),
        })
    }
}

/// Runs the reset-based protocol: a frame whose overlap is zero is a failure,
/// the tracker is re-initialised `reinit_delay` frames later, and the frames
/// in between are skipped.
pub fn run_protocol(
    gt: &[RotBox],
    tracker: &mut dyn FrameTracker,
    cfg: &ProtocolConfig,
) -> Result<SequenceResult> {
    cfg.validate()?;
    let n = gt.len();
    if n < 2 {
        return Err(Error::Insufficient(format!(
            "a sequence needs at least 2 frames, got {n}"
        )));
    }
    let mut frames = Vec::with_capacity(n);
    let mut outputs = Vec::with_capacity(n);
    let mut t = 0;
    while t < n {
        tracker.init(t, &gt[t])?;
        frames.push(FrameStatus::Init);
        outputs.push(Some(gt[t]));
        let init_at = t;
        t += 1;
        while t < n {
            let out = tracker.track(t)?;
            let overlap = cfg.overlap.overlap(&out, &gt[t])?;
            outputs.push(Some(out));
            if overlap <= 0.0 {
                frames.push(FrameStatus::Failure);
                let resume = (t + cfg.reinit_delay).min(n);
                for _ in t + 1..resume {
                    frames.push(FrameStatus::Skipped);
                    outputs.push(None);
                }
                t = resume;
                break;
            }
            frames.push(FrameStatus::Tracked {
                overlap,
                in_burn_in: t - init_at <= cfg.burn_in,
            });
            t += 1;
        }
    }
    Ok(SequenceResult { frames, outputs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AABox;

    /// Replays a scripted list of outputs.
    struct Scripted {
        outputs: Vec<RotBox>,
        inits: Vec<usize>,
    }

    impl FrameTracker for Scripted {
        fn init(&mut self, frame: usize, _: &RotBox) -> Result<()> {
            self.inits.push(frame);
            Ok(())
        }
        fn track(&mut self, frame: usize) -> Result<RotBox> {
            Ok(self.outputs[frame])
        }
    }

    fn boxes(n: usize, fail_at: &[usize]) -> (Vec<RotBox>, Vec<RotBox>) {
        let gt = AABox::new(10.0, 10.0, 4.0, 4.0).unwrap().to_rotbox();
        let miss = AABox::new(40.0, 40.0, 4.0, 4.0).unwrap().to_rotbox();
        let outs = (0..n)
            .map(|t| if fail_at.contains(&t) { miss } else { gt })
            .collect();
        (vec![gt; n], outs)
    }

    #[test]
    fn reinit_after_delay_and_burn_in() {
        let (gt, outs) = boxes(30, &[12]);
        let mut tr = Scripted {
            outputs: outs,
            inits: vec![],
        };
        let r = run_protocol(&gt, &mut tr, &ProtocolConfig::default()).unwrap();
        assert_eq!(tr.inits, vec![0, 17]);
        assert_eq!(r.frames[12], FrameStatus::Failure);
        assert!(r.frames[13..17].iter().all(|f| *f == FrameStatus::Skipped));
        assert_eq!(r.failures(), 1);
        // frames 1..=10 and 18..=27 are burn-in
        let counted = r.accuracy_overlaps().len();
        assert_eq!(counted, 1 + 2);
        assert_eq!(r.accuracy(), Some(1.0));
        let segs = r.segments();
        assert_eq!(segs.len(), 2);
        assert!(segs[0].failed && segs[0].overlaps.len() == 11);
        assert!(!segs[1].failed && segs[1].overlaps.len() == 12);
    }

    #[test]
    fn failure_near_end_truncates() {
        let (gt, outs) = boxes(8, &[6]);
        let mut tr = Scripted {
            outputs: outs,
            inits: vec![],
        };
        let r = run_protocol(&gt, &mut tr, &ProtocolConfig::default()).unwrap();
        assert_eq!(r.len(), 8);
        assert_eq!(r.frames[7], FrameStatus::Skipped);
        assert_eq!(tr.inits, vec![0]);
        assert_eq!(r.accuracy(), None);
    }

    #[test]
    fn rebuild_from_outputs_matches() {
        let (gt, outs) = boxes(30, &[12, 25]);
        let mut tr = Scripted {
            outputs: outs,
            inits: vec![],
        };
        let cfg = ProtocolConfig::default();
        let r = run_protocol(&gt, &mut tr, &cfg).unwrap();
        let again = SequenceResult::from_outputs(&r.frames, &r.outputs, &gt, &cfg).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn overlap_modes() {
        let a = RotBox::from_center(0.0, 0.0, 10.0, 10.0, 0.0).unwrap();
        let b = RotBox::from_center(0.0, 0.0, 10.0, 10.0, std::f64::consts::FRAC_PI_4).unwrap();
        let p = OverlapMode::Polygon.overlap(&a, &b).unwrap();
        let x = OverlapMode::AxisAligned.overlap(&a, &b).unwrap();
        assert!((p - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!((x - 0.5).abs() < 1e-9);
        assert_eq!(
            "axis".parse::<OverlapMode>().unwrap(),
            OverlapMode::AxisAligned
        );
    }
}
