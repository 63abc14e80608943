use super::protocol::Segment;
use crate::error::{Error, Result};

/// Expected overlap `Φ(L)` for every `L` in `low..=high`.
///
/// A segment that ended in failure contributes zeros after the failure and
/// counts for every `L`. A segment that reached the end of its sequence
/// without failing counts only when it is at least `L` frames long. Entries
/// with no contributing segment are `None`.
pub fn expected_overlap_curve(segments: &[Segment], low: usize, high: usize) -> Vec<Option<f64>> {
    let prefix: Vec<Vec<f64>> = segments
        .iter()
        .map(|s| {
            let mut p = Vec::with_capacity(s.overlaps.len() + 1);
            let mut acc = 0.0;
            p.push(acc);
            for &o in &s.overlaps {
                acc += o;
                p.push(acc);
            }
            p
        })
        .collect();
    (low..=high)
        .map(|l| {
            let mut sum = 0.0;
            let mut count = 0usize;
            for (s, p) in segments.iter().zip(&prefix) {
                let m = s.overlaps.len();
                if !s.failed && m < l {
                    continue;
                }
                sum += p[l.min(m)] / l as f64;
                count += 1;
            }
            (count > 0).then(|| sum / count as f64)
        })
        .collect()
}

/// Expected average overlap: the mean of `Φ(L)` over `low..=high`, skipping
/// lengths no segment covers.
pub fn eao(segments: &[Segment], low: usize, high: usize) -> Result<f64> {
    if low == 0 || low > high {
        return Err(Error::config(
            "eao_low",
            "EAO range must satisfy 1 <= low <= high",
        ));
    }
    if segments.is_empty() {
        return Err(Error::Insufficient("EAO needs at least one segment".into()));
    }
    let curve: Vec<f64> = expected_overlap_curve(segments, low, high)
        .into_iter()
        .flatten()
        .collect();
    if curve.is_empty() {
        return Err(Error::Insufficient(format!(
            "no segment covers any length in {low}..={high}"
        )));
    }
    Ok(curve.iter().sum::<f64>() / curve.len() as f64)
}
