use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scoring::ScoreConfig;

/// Closed sampling intervals for the searched weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRanges {
    pub k_c: (f64, f64),
    pub k_p: (f64, f64),
    pub k_f: (f64, f64),
}

impl Default for SearchRanges {
    fn default() -> Self {
        Self {
            k_c: (0.40, 0.43),
            k_p: (0.0, 1.0),
            k_f: (0.0, 1.0),
        }
    }
}

impl SearchRanges {
    pub fn validate(&self) -> Result<()> {
        for (k, (lo, hi)) in [("k_c", self.k_c), ("k_p", self.k_p), ("k_f", self.k_f)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::config(k, format!("empty search range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trial {
    pub index: usize,
    pub config: ScoreConfig,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Trials sorted by objective, best first; ties keep trial order.
    pub leaderboard: Vec<Trial>,
}

impl SearchResult {
    pub fn best(&self) -> &Trial {
        &self.leaderboard[0]
    }
}

/// Uniform random search over `(k_c, k_p, k_f)`. Samples depend only on
/// `seed`; trials are evaluated in parallel.
pub fn random_search<F>(
    base: &ScoreConfig,
    ranges: &SearchRanges,
    trials: usize,
    seed: u64,
    objective: F,
) -> Result<SearchResult>
where
    F: Fn(&ScoreConfig) -> Result<f64> + Sync,
{
    ranges.validate()?;
    if trials == 0 {
        return Err(Error::config("trials", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |(lo, hi): (f64, f64)| lo + (hi - lo) * rng.gen::<f64>();
    let configs: Vec<ScoreConfig> = (0..trials)
        .map(|_| ScoreConfig {
            k_c: draw(ranges.k_c),
            k_p: draw(ranges.k_p),
            k_f: draw(ranges.k_f),
            ..*base
        })
        .collect();
    let mut leaderboard = configs
        .par_iter()
        .enumerate()
        .map(|(index, c)| {
            let o = objective(c)?;
            Ok(Trial {
                index,
                config: *c,
                objective: if o.is_nan() { f64::NEG_INFINITY } else { o },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    leaderboard.sort_by(|a, b| b.objective.total_cmp(&a.objective));
    Ok(SearchResult { leaderboard })
}
