use rayon::prelude::*;

use super::eao::eao;
use super::protocol::{run_protocol, FrameTracker, ProtocolConfig, SequenceResult};
use crate::dataset::SceneData;
use crate::error::{Error, Result};
use crate::flow::KernelConfig;
use crate::geometry::RotBox;
use crate::scoring::{Proposal, ScoreConfig};
use crate::synth::{
    derive_seed, generate_proposals, synth_appearance, SyntheticMaskSource, STREAM_APPEARANCE,
    STREAM_MASK, STREAM_PROPOSALS,
};
use crate::tracker::{Diagnostic, StepOutput, Tracker, Variant, VariantConfig};

/// Everything that configures one tracker run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunSettings {
    pub score: ScoreConfig,
    pub variant: VariantConfig,
    pub kernel: KernelConfig,
}

impl RunSettings {
    pub fn with_variant(mut self, mode: Variant) -> Self {
        self.variant.mode = mode;
        self
    }
}

/// Per-frame record of a synthetic run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub frame: usize,
    pub selected: usize,
    pub proposals: Vec<Proposal>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Drives a [`Tracker`] on a synthetic scene with the synthetic providers.
pub struct SyntheticTracker<'a> {
    scene: &'a SceneData,
    settings: RunSettings,
    tracker: Option<Tracker>,
    pub steps: Vec<StepRecord>,
    pub init_diagnostics: Vec<Diagnostic>,
}

impl<'a> SyntheticTracker<'a> {
    pub fn new(scene: &'a SceneData, settings: RunSettings) -> Self {
        Self {
            scene,
            settings,
            tracker: None,
            steps: Vec::new(),
            init_diagnostics: Vec::new(),
        }
    }

    pub fn tracker(&self) -> Option<&Tracker> {
        self.tracker.as_ref()
    }

    /// Proposals the providers emit for `frame` given the previous box.
    pub fn proposals_for(&self, frame: usize, prev: &crate::geometry::AABox) -> Vec<Proposal> {
        let s = &self.scene.scenario;
        let f = &self.scene.frames[frame];
        let gt = f.target_in_frame().then(|| f.target_box());
        let dis = f.distractor_boxes();
        let boxes = generate_proposals(
            prev,
            gt.as_ref(),
            &dis,
            s.width,
            s.height,
            &s.proposals,
            derive_seed(s.seed, &[frame as u64, STREAM_PROPOSALS]),
        );
        let d = synth_appearance(
            &boxes,
            gt.as_ref(),
            f.target_visibility(),
            &dis,
            &s.noise,
            derive_seed(s.seed, &[frame as u64, STREAM_APPEARANCE]),
        );
        boxes
            .into_iter()
            .zip(d)
            .map(|(bbox, d)| Proposal { bbox, d })
            .collect()
    }

    /// One tracker step with full output.
    pub fn step(&mut self, frame: usize) -> Result<StepOutput> {
        let prev = self
            .tracker
            .as_ref()
            .ok_or_else(|| Error::Insufficient("tracker not initialised".into()))?
            .state()
            .prev_box;
        let proposals = self.proposals_for(frame, &prev);
        let s = &self.scene.scenario;
        let mut masks = SyntheticMaskSource::new(
            &self.scene.frames[frame],
            s.noise.mask_corruption,
            derive_seed(s.seed, &[frame as u64, STREAM_MASK]),
        );
        let tracker = self.tracker.as_mut().expect("checked above");
        let out = tracker.step(&proposals, &mut masks, &self.scene.flows[frame])?;
        self.steps.push(StepRecord {
            frame,
            selected: out.selected,
            proposals,
            diagnostics: out.diagnostics.clone(),
        });
        Ok(out)
    }
}

impl FrameTracker for SyntheticTracker<'_> {
    fn init(&mut self, frame: usize, gt: &RotBox) -> Result<()> {
        let (t, diag) = Tracker::init(
            gt,
            &self.scene.masks[frame],
            self.settings.score,
            self.settings.variant,
            self.settings.kernel,
        )?;
        self.tracker = Some(t);
        self.init_diagnostics.extend(diag);
        Ok(())
    }

    fn track(&mut self, frame: usize) -> Result<RotBox> {
        Ok(self.step(frame)?.rot_box)
    }
}

pub fn run_scene(
    scene: &SceneData,
    settings: &RunSettings,
    protocol: &ProtocolConfig,
) -> Result<SequenceResult> {
    let mut t = SyntheticTracker::new(scene, *settings);
    run_protocol(&scene.groundtruth(), &mut t, protocol)
}

/// Tracks every frame after frame 0 without resets, returning the step records.
pub fn track_without_resets(scene: &SceneData, settings: &RunSettings) -> Result<Vec<StepRecord>> {
    let mut t = SyntheticTracker::new(scene, *settings);
    t.init(0, &scene.frames[0].gt)?;
    for frame in 1..scene.len() {
        t.step(frame)?;
    }
    Ok(t.steps)
}

/// Aggregate metrics over a set of sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub sequences: Vec<SequenceResult>,
    pub eao: f64,
    /// Mean of the per-sequence accuracies that are defined.
    pub accuracy: f64,
    pub failures: usize,
    pub frames: usize,
}

impl EvalSummary {
    pub fn from_results(sequences: Vec<SequenceResult>, protocol: &ProtocolConfig) -> Result<Self> {
        let segments: Vec<_> = sequences.iter().flat_map(|s| s.segments()).collect();
        let eao = eao(&segments, protocol.eao_range.0, protocol.eao_range.1)?;
        let accs: Vec<f64> = sequences.iter().filter_map(|s| s.accuracy()).collect();
        let accuracy = if accs.is_empty() {
            0.0
        } else {
            accs.iter().sum::<f64>() / accs.len() as f64
        };
        let failures = sequences.iter().map(|s| s.failures()).sum();
        let frames = sequences.iter().map(|s| s.len()).sum();
        Ok(Self {
            sequences,
            eao,
            accuracy,
            failures,
            frames,
        })
    }

    /// Failures per 100 frames.
    pub fn robustness(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            100.0 * self.failures as f64 / self.frames as f64
        }
    }

    pub fn mean_failures(&self) -> f64 {
        self.failures as f64 / self.sequences.len().max(1) as f64
    }
}

/// Runs the protocol on every scene in parallel; results keep scene order.
pub fn evaluate(
    scenes: &[SceneData],
    settings: &RunSettings,
    protocol: &ProtocolConfig,
) -> Result<EvalSummary> {
    let results = scenes
        .par_iter()
        .map(|s| run_scene(s, settings, protocol))
        .collect::<Result<Vec<_>>>()?;
    EvalSummary::from_results(results, protocol)
}
