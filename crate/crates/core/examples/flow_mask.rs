//! Propagates a mask through a noisy flow field. Pixels whose flow is
//! uncertain spread their probability over a wider neighbourhood.

use uft::flow::propagate_mask_oracle;
use uft::{propagate_mask, AABox, BinaryMask, FlowField, KernelConfig, ScalarGrid};

fn main() -> uft::Result<()> {
    let (w, h) = (48, 32);
    let prev = BinaryMask::from_aabox(w, h, &AABox::new(14.0, 16.0, 10.0, 10.0)?).to_prob();

    // Backward flow: every pixel of the current frame came from 4 px to its left.
    let mean_u = ScalarGrid::filled(w, h, -4.0);
    let mean_v = ScalarGrid::zeros(w, h);
    for (label, b) in [("confident", 0.05), ("typical", 0.5), ("uncertain", 2.5)] {
        let s = ScalarGrid::filled(w, h, b);
        let flow = FlowField::new(mean_u.clone(), mean_v.clone(), s.clone(), s)?;
        let cur = propagate_mask(&prev, &flow, &KernelConfig::default())?;
        let row: Vec<String> = (12..26).map(|c| format!("{:.2}", cur.get(16, c))).collect();
        println!("{label:>9} b={b:<4} row 16: {}", row.join(" "));
    }

    let noisy = ScalarGrid::from_fn(w, h, |r, c| 0.3 + 0.05 * ((r * 7 + c * 3) % 11) as f64);
    let flow = FlowField::new(mean_u, mean_v, noisy.clone(), noisy)?;
    let cfg = KernelConfig {
        truncation_k: 12.0,
        ..KernelConfig::default()
    };
    let fast = propagate_mask(&prev, &flow, &cfg)?;
    let exact = propagate_mask_oracle(&prev, &flow)?;
    println!(
        "separable vs dense propagation: max |diff| = {:.2e}",
        fast.grid().max_abs_diff(exact.grid())?
    );
    Ok(())
}
