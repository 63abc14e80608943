//! Writes a scene to disk, tracks it from the stored files, saves the
//! results file and scores it, the same path the `uft` binary takes.

use std::fs;

use uft::dataset::SceneData;
use uft::eval::results::{parse_records, records_of, to_statuses, write_records};
use uft::eval::{run_scene, EvalSummary, ProtocolConfig, RunSettings, SequenceResult};
use uft::synth::Scenario;

fn main() -> uft::Result<()> {
    let dir = std::env::temp_dir().join("uft_roundtrip");
    let scene = SceneData::generate("walk", &Scenario::single_object(48, 40, 20, (1.5, -0.5)))?;
    scene.save(&dir)?;
    let mut files: Vec<String> = fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect();
    files.sort();
    println!(
        "{}: {} files, first {:?}",
        dir.display(),
        files.len(),
        &files[..3]
    );

    let loaded = SceneData::load(&dir)?;
    let protocol = ProtocolConfig::default();
    let result = run_scene(&loaded, &RunSettings::default(), &protocol)?;
    let text = write_records(&records_of(&result), false);
    fs::write(dir.join("results.txt"), &text)?;
    print!(
        "{}",
        text.lines()
            .take(3)
            .map(|l| format!("{l}\n"))
            .collect::<String>()
    );

    let (kinds, boxes) = to_statuses(&parse_records(&text)?);
    let reread = SequenceResult::from_outputs(&kinds, &boxes, &loaded.groundtruth(), &protocol)?;
    let summary = EvalSummary::from_results(vec![reread], &protocol)?;
    println!(
        "accuracy {:.4}, failures {}, EAO {:.4}",
        summary.accuracy, summary.failures, summary.eao
    );
    Ok(())
}
