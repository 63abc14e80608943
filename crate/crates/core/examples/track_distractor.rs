//! Tracks one convoy scene (a target trailed by an identical object) with and
//! without the flow term, printing the per-frame overlap.

use uft::dataset::SceneData;
use uft::eval::{run_scene, FrameStatus, ProtocolConfig, RunSettings};
use uft::synth::{distractor_suite, SuiteConfig};
use uft::Variant;

fn main() -> uft::Result<()> {
    let scenario = &distractor_suite(1, 11, &SuiteConfig::default())[0];
    let scene = SceneData::generate("convoy", scenario)?;
    let protocol = ProtocolConfig::default();
    let runs = [Variant::Full, Variant::NoFlow]
        .map(|v| run_scene(&scene, &RunSettings::default().with_variant(v), &protocol));
    let [full, no_flow] = runs;
    let (full, no_flow) = (full?, no_flow?);

    let cell = |s: &FrameStatus| match s {
        FrameStatus::Init => "init".to_string(),
        FrameStatus::Tracked { overlap, .. } => format!("{overlap:.2}"),
        FrameStatus::Failure => "FAIL".to_string(),
        FrameStatus::Skipped => "-".to_string(),
    };
    println!("frame    full  no_flow");
    for (t, (a, b)) in full.frames.iter().zip(&no_flow.frames).enumerate() {
        println!("{t:5}  {:>6}  {:>7}", cell(a), cell(b));
    }
    println!(
        "failures: full {}, no_flow {}",
        full.failures(),
        no_flow.failures()
    );
    Ok(())
}
