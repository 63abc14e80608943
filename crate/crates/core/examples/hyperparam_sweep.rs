use uft::dataset::SceneData;
use uft::eval::{evaluate, random_search, ProtocolConfig, RunSettings, SearchRanges};
use uft::synth::{distractor_suite, SuiteConfig};
use uft::ScoreConfig;

fn main() -> uft::Result<()> {
    let scenes = distractor_suite(6, 21, &SuiteConfig::default())
        .iter()
        .enumerate()
        .map(|(i, s)| SceneData::generate(format!("scene_{i}"), s))
        .collect::<uft::Result<Vec<_>>>()?;
    let protocol = ProtocolConfig::default();
    let result = random_search(
        &ScoreConfig::default(),
        &SearchRanges::default(),
        12,
        5,
        |score| {
            let settings = RunSettings {
                score: *score,
                ..RunSettings::default()
            };
            Ok(evaluate(&scenes, &settings, &protocol)?.eao)
        },
    )?;
    for t in result.leaderboard.iter().take(5) {
        let c = t.config;
        println!(
            "trial {:2}: k_c {:.3} k_p {:.3} k_f {:.3} -> EAO {:.4}",
            t.index, c.k_c, c.k_p, c.k_f, t.objective
        );
    }
    let default_eao = evaluate(&scenes, &RunSettings::default(), &protocol)?.eao;
    println!("defaults -> EAO {default_eao:.4}");
    Ok(())
}
