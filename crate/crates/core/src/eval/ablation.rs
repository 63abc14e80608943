use std::fmt::Write as _;

use rayon::prelude::*;

use super::protocol::ProtocolConfig;
use super::runner::{run_scene, EvalSummary, RunSettings};
use crate::dataset::SceneData;
use crate::error::Result;
use crate::tracker::Variant;

pub const CSV_HEADER: &str = "variant,eao,robustness,accuracy,failures,frames";

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub variant: Variant,
    pub eao: f64,
    /// Failures per 100 frames.
    pub robustness: f64,
    pub accuracy: f64,
    pub failures: usize,
    pub frames: usize,
}

impl AblationRow {
    pub fn from_summary(variant: Variant, s: &EvalSummary) -> Self {
        Self {
            variant,
            eao: s.eao,
            robustness: s.robustness(),
            accuracy: s.accuracy,
            failures: s.failures,
            frames: s.frames,
        }
    }
}

/// Evaluates each variant on every scene. All (variant, scene) runs execute
/// in parallel; rows follow `variants`.
pub fn ablation_report(
    scenes: &[SceneData],
    variants: &[Variant],
    base: &RunSettings,
    protocol: &ProtocolConfig,
) -> Result<Vec<AblationRow>> {
    let jobs: Vec<(usize, usize)> = (0..variants.len())
        .flat_map(|v| (0..scenes.len()).map(move |s| (v, s)))
        .collect();
    let mut results = jobs
        .par_iter()
        .map(|&(v, s)| run_scene(&scenes[s], &base.with_variant(variants[v]), protocol))
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    variants
        .iter()
        .map(|&v| {
            let seqs: Vec<_> = results.by_ref().take(scenes.len()).collect();
            let summary = EvalSummary::from_results(seqs, protocol)?;
            Ok(AblationRow::from_summary(v, &summary))
        })
        .collect()
}

pub fn to_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{},{}",
            r.variant, r.eao, r.robustness, r.accuracy, r.failures, r.frames
        );
    }
    out
}

pub fn to_table(rows: &[AblationRow]) -> String {
    let mut out = format!(
        "{:<16}{:>10}{:>12}{:>10}{:>10}{:>8}\n",
        "variant", "eao", "robustness", "accuracy", "failures", "frames"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<16}{:>10.4}{:>12.3}{:>10.4}{:>10}{:>8}",
            r.variant.name(),
            r.eao,
            r.robustness,
            r.accuracy,
            r.failures,
            r.frames
        );
    }
    out
}
