//! Scores a target and a more similar-looking distractor. Appearance alone
//! picks the distractor; the flow term recovers the target.

use uft::flow::propagate_mask;
use uft::scoring::{compute_normalizer, score_proposal};
use uft::{AABox, BinaryMask, FlowField, KernelConfig, Proposal, ScoreConfig};

fn main() -> uft::Result<()> {
    let (w, h) = (64, 48);
    let prev_box = AABox::new(24.0, 24.0, 10.0, 10.0)?;
    let prev_mask = BinaryMask::from_aabox(w, h, &prev_box);
    let flow = FlowField::uniform(w, h, -5.0, 0.0, 0.4);
    let flow_mask = propagate_mask(&prev_mask.to_prob(), &flow, &KernelConfig::default())?;
    let norm = compute_normalizer(&prev_mask, &prev_box);

    let target = Proposal {
        bbox: AABox::new(29.0, 24.0, 10.0, 10.0)?,
        d: 0.90,
    };
    let distractor = Proposal {
        bbox: AABox::new(19.0, 24.0, 10.0, 10.0)?,
        d: 0.95,
    };
    let cfg = ScoreConfig::default();
    println!(
        "{:<12}{:>8}{:>8}{:>8}{:>10}{:>8}",
        "", "d", "p_s", "p_c", "flow", "total"
    );
    for (name, p) in [("target", target), ("distractor", distractor)] {
        for (mode, fm) in [
            ("appearance", None),
            ("with flow", Some((&flow_mask, norm))),
        ] {
            let s = score_proposal(&p, &prev_box, &cfg, fm)?;
            println!(
                "{:<12}{:>8.3}{:>8.3}{:>8.3}{:>10}{:>8.4}  {mode}",
                name,
                p.d,
                s.p_s,
                s.p_c,
                s.flow.map_or("-".into(), |f| format!("{f:.3}")),
                s.total
            );
        }
    }
    Ok(())
}
