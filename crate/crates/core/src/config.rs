//! Run configuration for the command-line front end.
//!
//! Files are flat `key = value` text with `#` comments. Every key is
//! optional, so an empty file is valid. Keys and defaults:
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `k_c` | 0.42 | weight of the motion term against appearance |
//! | `k_p` | 0.04 | size-change penalty rate |
//! | `k_f` | 0.5 | weight of the flow score inside the motion term |
//! | `t_seg` | 0.30 | mask binarisation threshold |
//! | `window_scale` | 2.0 | cosine window extent in units of the previous box |
//! | `padding_factor` | 0.5 | context padding in the size penalty |
//! | `variant` | full | tracker variant |
//! | `fixed_scale_b` | 1.0 | Laplace scale used by `no_flow` and `no_uncertainty` |
//! | `reject_threshold` | 0.25 | warped-pixel fraction a proposal must keep under `flow_reject` |
//! | `truncation_k` | 6 | kernel support in units of `b` |
//! | `renormalize_at_border` | true | renormalise kernels clipped by the image border |
//! | `reinit_delay` | 5 | frames between a failure and re-initialisation |
//! | `burn_in` | 10 | frames after an initialisation excluded from accuracy |
//! | `eao_low`, `eao_high` | 10, 50 | sequence-length range averaged by EAO |
//! | `overlap` | polygon | `polygon` or `axis` |
//! | `seed` | 0 | seed for `synth` and `sweep` |
//! | `trials` | 20 | random-search trials |
//! | `sweep_k_c`, `sweep_k_p`, `sweep_k_f` | `0.40,0.43`, `0,1`, `0,1` | search intervals |
//!
//! Any key can be overridden by an environment variable named `UFT_` plus
//! the upper-cased key, e.g. `UFT_K_C=0.41` or `UFT_VARIANT=no_flow`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{ProtocolConfig, RunSettings, SearchRanges};
use crate::flow::KernelConfig;
use crate::keyvalue::{self, parse_bool, parse_pair, parse_value};
use crate::scoring::ScoreConfig;
use crate::tracker::VariantConfig;

pub const ENV_PREFIX: &str = "UFT_";

pub const KEYS: &[&str] = &[
    "k_c",
    "k_p",
    "k_f",
    "t_seg",
    "window_scale",
    "padding_factor",
    "variant",
    "fixed_scale_b",
    "reject_threshold",
    "truncation_k",
    "renormalize_at_border",
    "reinit_delay",
    "burn_in",
    "eao_low",
    "eao_high",
    "overlap",
    "seed",
    "trials",
    "sweep_k_c",
    "sweep_k_p",
    "sweep_k_f",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub score: ScoreConfig,
    pub variant: VariantConfig,
    pub kernel: KernelConfig,
    pub protocol: ProtocolConfig,
    pub seed: u64,
    pub trials: usize,
    pub ranges: SearchRanges,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            score: ScoreConfig::default(),
            variant: VariantConfig::default(),
            kernel: KernelConfig::default(),
            protocol: ProtocolConfig::default(),
            seed: 0,
            trials: 20,
            ranges: SearchRanges::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for e in keyvalue::parse(text)? {
            cfg.set(&e.key, &e.value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one key. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "k_c" => self.score.k_c = parse_value(key, value)?,
            "k_p" => self.score.k_p = parse_value(key, value)?,
            "k_f" => self.score.k_f = parse_value(key, value)?,
            "t_seg" => self.score.t_seg = parse_value(key, value)?,
            "window_scale" => self.score.window_scale = parse_value(key, value)?,
            "padding_factor" => self.score.padding_factor = parse_value(key, value)?,
            "variant" => self.variant.mode = parse_value(key, value)?,
            "fixed_scale_b" => self.variant.fixed_scale_b = parse_value(key, value)?,
            "reject_threshold" => self.variant.reject_threshold = parse_value(key, value)?,
            "truncation_k" => self.kernel.truncation_k = parse_value(key, value)?,
            "renormalize_at_border" => self.kernel.renormalize_at_border = parse_bool(key, value)?,
            "reinit_delay" => self.protocol.reinit_delay = parse_value(key, value)?,
            "burn_in" => self.protocol.burn_in = parse_value(key, value)?,
            "eao_low" => self.protocol.eao_range.0 = parse_value(key, value)?,
            "eao_high" => self.protocol.eao_range.1 = parse_value(key, value)?,
            "overlap" => self.protocol.overlap = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "trials" => self.trials = parse_value(key, value)?,
            "sweep_k_c" => self.ranges.k_c = parse_pair(key, value)?,
            "sweep_k_p" => self.ranges.k_p = parse_pair(key, value)?,
            "sweep_k_f" => self.ranges.k_f = parse_pair(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies `UFT_*` overrides from `vars`. Unrecognised `UFT_` names are
    /// rejected.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut pairs: Vec<(String, String)> = vars
            .into_iter()
            .filter_map(|(k, v)| {
                let name = k.as_ref().strip_prefix(ENV_PREFIX)?.to_ascii_lowercase();
                Some((name, v.as_ref().to_string()))
            })
            .collect();
        pairs.sort();
        for (name, value) in pairs {
            if !KEYS.contains(&name.as_str()) {
                let var = format!("{ENV_PREFIX}{}", name.to_ascii_uppercase());
                return Err(Error::config(var, "unknown environment override"));
            }
            self.set(&name, &value)?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.score.validate()?;
        self.variant.validate()?;
        self.kernel.validate()?;
        self.protocol.validate()?;
        self.ranges.validate()?;
        if self.trials == 0 {
            return Err(Error::config("trials", "must be positive"));
        }
        Ok(())
    }

    pub fn settings(&self) -> RunSettings {
        RunSettings {
            score: self.score,
            variant: self.variant,
            kernel: self.kernel,
        }
    }

    /// The configuration in file syntax, one line per key.
    pub fn to_text(&self) -> String {
        let s = &self.score;
        let p = &self.protocol;
        let r = &self.ranges;
        let lines = [
            format!("k_c = {}", s.k_c),
            format!("k_p = {}", s.k_p),
            format!("k_f = {}", s.k_f),
            format!("t_seg = {}", s.t_seg),
            format!("window_scale = {}", s.window_scale),
            format!("padding_factor = {}", s.padding_factor),
            format!("variant = {}", self.variant.mode),
            format!("fixed_scale_b = {}", self.variant.fixed_scale_b),
            format!("reject_threshold = {}", self.variant.reject_threshold),
            format!("truncation_k = {}", self.kernel.truncation_k),
            format!(
                "renormalize_at_border = {}",
                self.kernel.renormalize_at_border
            ),
            format!("reinit_delay = {}", p.reinit_delay),
            format!("burn_in = {}", p.burn_in),
            format!("eao_low = {}", p.eao_range.0),
            format!("eao_high = {}", p.eao_range.1),
            format!("overlap = {}", p.overlap),
            format!("seed = {}", self.seed),
            format!("trials = {}", self.trials),
            format!("sweep_k_c = {},{}", r.k_c.0, r.k_c.1),
            format!("sweep_k_p = {},{}", r.k_p.0, r.k_p.1),
            format!("sweep_k_f = {},{}", r.k_f.0, r.k_f.1),
        ];
        lines.iter().map(|l| format!("{l}\n")).collect()
    }
}
