//! Runs every tracker variant over a generated distractor suite and prints
//! the ablation table.

use std::time::Instant;

use uft::dataset::SceneData;
use uft::eval::ablation::{ablation_report, to_table};
use uft::eval::{ProtocolConfig, RunSettings};
use uft::synth::{distractor_suite, SuiteConfig};
use uft::Variant;

fn main() -> uft::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20);
    let seed: u64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let start = Instant::now();
    let scenes = distractor_suite(n, seed, &SuiteConfig::default())
        .iter()
        .enumerate()
        .map(|(i, s)| SceneData::generate(format!("scene_{i:03}"), s))
        .collect::<uft::Result<Vec<_>>>()?;
    let rows = ablation_report(
        &scenes,
        &Variant::ALL,
        &RunSettings::default(),
        &ProtocolConfig::default(),
    )?;
    print!("{}", to_table(&rows));
    println!("{} scenes in {:.1?}", scenes.len(), start.elapsed());
    Ok(())
}
