//! Parametric scene description and its `key = value` file format.
//!
//! ```text
//! width = 80
//! height = 80
//! frames = 50
//! seed = 7
//! camera.shift = 0,0       # constant per-frame translation
//! camera.shake = 2         # amplitude of a sinusoidal offset
//! camera.period = 16
//! object.0.shape = rect    # rect | ellipse
//! object.0.size = 12,12
//! object.0.start = 20,30
//! object.0.velocity = 2,1
//! object.0.bounce = true   # reflect off the image border
//! object.0.growth = 1.0    # per-frame scale factor
//! object.0.target = true
//! noise.flow_scale = 0.3
//! proposals.count = 24
//! ```

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use super::noise::NoiseModel;
use super::proposals::ProposalConfig;
use super::scene::{ObjectSpec, SceneSpec, Shape};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::keyvalue::{self, parse_bool, parse_pair, parse_value};

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectParams {
    pub shape: Shape,
    pub size: (f64, f64),
    pub start: (f64, f64),
    pub velocity: (f64, f64),
    pub bounce: bool,
    pub growth: f64,
    pub target: bool,
}

impl Default for ObjectParams {
    fn default() -> Self {
        Self {
            shape: Shape::Rect,
            size: (10.0, 10.0),
            start: (0.0, 0.0),
            velocity: (0.0, 0.0),
            bounce: true,
            growth: 1.0,
            target: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub seed: u64,
    pub camera_shift: (f64, f64),
    pub camera_shake: f64,
    pub camera_period: f64,
    pub objects: Vec<ObjectParams>,
    pub noise: NoiseModel,
    pub proposals: ProposalConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            frames: 30,
            seed: 0,
            camera_shift: (0.0, 0.0),
            camera_shake: 0.0,
            camera_period: 16.0,
            objects: Vec::new(),
            noise: NoiseModel::default(),
            proposals: ProposalConfig::default(),
        }
    }
}

/// Reflects `x` into `[lo, hi]`.
fn reflect(x: f64, lo: f64, hi: f64) -> f64 {
    let span = hi - lo;
    if span <= 0.0 {
        return lo;
    }
    let y = (x - lo).rem_euclid(2.0 * span);
    lo + if y > span { 2.0 * span - y } else { y }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::config("width", "image size must be positive"));
        }
        if self.frames == 0 {
            return Err(Error::config("frames", "must be positive"));
        }
        if self.objects.iter().filter(|o| o.target).count() != 1 {
            return Err(Error::config(
                "object",
                "exactly one object must be the target",
            ));
        }
        if !(self.camera_period > 0.0) {
            return Err(Error::config("camera.period", "must be positive"));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if !(o.size.0 > 0.0 && o.size.1 > 0.0) {
                return Err(Error::config(
                    format!("object.{i}.size"),
                    "must be positive",
                ));
            }
            if !(o.growth > 0.0) {
                return Err(Error::config(
                    format!("object.{i}.growth"),
                    "must be positive",
                ));
            }
        }
        self.noise.validate()?;
        self.proposals.validate()
    }

    fn camera_offset(&self, t: usize) -> (f64, f64) {
        let t = t as f64;
        let wobble = self.camera_shake * (TAU * t / self.camera_period).sin();
        (
            self.camera_shift.0 * t + wobble,
            self.camera_shift.1 * t + 0.5 * wobble,
        )
    }

    /// Expands the trajectories into per-frame centres, scales and camera shifts.
    pub fn to_scene_spec(&self) -> Result<SceneSpec> {
        self.validate()?;
        let objects = self
            .objects
            .iter()
            .map(|o| {
                let centers = (0..self.frames)
                    .map(|t| {
                        let s = o.growth.powi(t as i32);
                        let x = o.start.0 + o.velocity.0 * t as f64;
                        let y = o.start.1 + o.velocity.1 * t as f64;
                        if o.bounce {
                            let (hw, hh) = (o.size.0 * s / 2.0, o.size.1 * s / 2.0);
                            Point::new(
                                reflect(x, hw, self.width as f64 - hw),
                                reflect(y, hh, self.height as f64 - hh),
                            )
                        } else {
                            Point::new(x, y)
                        }
                    })
                    .collect();
                let scales = if o.growth == 1.0 {
                    Vec::new()
                } else {
                    (0..self.frames).map(|t| o.growth.powi(t as i32)).collect()
                };
                ObjectSpec {
                    shape: o.shape,
                    size: o.size,
                    centers,
                    scales,
                    is_target: o.target,
                }
            })
            .collect();
        let camera_shift = (0..self.frames)
            .map(|t| {
                if t == 0 {
                    (0.0, 0.0)
                } else {
                    let a = self.camera_offset(t);
                    let b = self.camera_offset(t - 1);
                    (a.0 - b.0, a.1 - b.1)
                }
            })
            .collect();
        Ok(SceneSpec {
            width: self.width,
            height: self.height,
            num_frames: self.frames,
            objects,
            camera_shift,
            seed: self.seed,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Scenario::default();
        let mut objects: BTreeMap<usize, ObjectParams> = BTreeMap::new();
        for e in keyvalue::parse(text)? {
            let (k, v) = (e.key.as_str(), e.value.as_str());
            match k {
                "width" => s.width = parse_value(k, v)?,
                "height" => s.height = parse_value(k, v)?,
                "frames" => s.frames = parse_value(k, v)?,
                "seed" => s.seed = parse_value(k, v)?,
                "camera.shift" => s.camera_shift = parse_pair(k, v)?,
                "camera.shake" => s.camera_shake = parse_value(k, v)?,
                "camera.period" => s.camera_period = parse_value(k, v)?,
                "noise.flow_scale" => s.noise.flow_noise_scale = parse_value(k, v)?,
                "noise.motion_gain" => s.noise.motion_noise_gain = parse_value(k, v)?,
                "noise.failure_rate" => s.noise.failure_rate = parse_value(k, v)?,
                "noise.calibration" => s.noise.calibration_factor = parse_value(k, v)?,
                "noise.mask_corruption" => s.noise.mask_corruption = parse_value(k, v)?,
                "noise.confusion" => s.noise.appearance_confusion = parse_value(k, v)?,
                "noise.appearance_noise" => s.noise.appearance_noise = parse_value(k, v)?,
                "proposals.count" => s.proposals.count = parse_value(k, v)?,
                "proposals.jitter" => s.proposals.jitter = parse_value(k, v)?,
                "proposals.jitter_px" => s.proposals.jitter_px = parse_value(k, v)?,
                "proposals.scale_jitter" => s.proposals.scale_jitter = parse_value(k, v)?,
                "proposals.grid_step" => s.proposals.grid_step = parse_value(k, v)?,
                _ => {
                    let Some((idx, field)) =
                        k.strip_prefix("object.").and_then(|r| r.split_once('.'))
                    else {
                        return Err(Error::config(k, "unknown key"));
                    };
                    let idx: usize = parse_value(k, idx)?;
                    let o = objects.entry(idx).or_default();
                    match field {
                        "shape" => {
                            o.shape = match v {
                                "rect" => Shape::Rect,
                                "ellipse" => Shape::Ellipse,
                                _ => return Err(Error::config(k, format!("unknown shape `{v}`"))),
                            }
                        }
                        "size" => o.size = parse_pair(k, v)?,
                        "start" => o.start = parse_pair(k, v)?,
                        "velocity" => o.velocity = parse_pair(k, v)?,
                        "bounce" => o.bounce = parse_bool(k, v)?,
                        "growth" => o.growth = parse_value(k, v)?,
                        "target" => o.target = parse_bool(k, v)?,
                        _ => return Err(Error::config(k, "unknown key")),
                    }
                }
            }
        }
        if objects.keys().enumerate().any(|(i, &k)| i != k) {
            return Err(Error::config(
                "object",
                "object indices must be 0, 1, 2, ...",
            ));
        }
        s.objects = objects.into_values().collect();
        s.validate()?;
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut t = String::new();
        let n = &self.noise;
        let p = &self.proposals;
        let _ = writeln!(t, "width = {}", self.width);
        let _ = writeln!(t, "height = {}", self.height);
        let _ = writeln!(t, "frames = {}", self.frames);
        let _ = writeln!(t, "seed = {}", self.seed);
        let _ = writeln!(
            t,
            "camera.shift = {},{}",
            self.camera_shift.0, self.camera_shift.1
        );
        let _ = writeln!(t, "camera.shake = {}", self.camera_shake);
        let _ = writeln!(t, "camera.period = {}", self.camera_period);
        for (i, o) in self.objects.iter().enumerate() {
            let _ = writeln!(t, "object.{i}.shape = {}", o.shape.name());
            let _ = writeln!(t, "object.{i}.size = {},{}", o.size.0, o.size.1);
            let _ = writeln!(t, "object.{i}.start = {},{}", o.start.0, o.start.1);
            let _ = writeln!(t, "object.{i}.velocity = {},{}", o.velocity.0, o.velocity.1);
            let _ = writeln!(t, "object.{i}.bounce = {}", o.bounce);
            let _ = writeln!(t, "object.{i}.growth = {}", o.growth);
            let _ = writeln!(t, "object.{i}.target = {}", o.target);
        }
        let _ = writeln!(t, "noise.flow_scale = {}", n.flow_noise_scale);
        let _ = writeln!(t, "noise.motion_gain = {}", n.motion_noise_gain);
        let _ = writeln!(t, "noise.failure_rate = {}", n.failure_rate);
        let _ = writeln!(t, "noise.calibration = {}", n.calibration_factor);
        let _ = writeln!(t, "noise.mask_corruption = {}", n.mask_corruption);
        let _ = writeln!(t, "noise.confusion = {}", n.appearance_confusion);
        let _ = writeln!(t, "noise.appearance_noise = {}", n.appearance_noise);
        let _ = writeln!(t, "proposals.count = {}", p.count);
        let _ = writeln!(t, "proposals.jitter = {}", p.jitter);
        let _ = writeln!(t, "proposals.jitter_px = {}", p.jitter_px);
        let _ = writeln!(t, "proposals.scale_jitter = {}", p.scale_jitter);
        let _ = writeln!(t, "proposals.grid_step = {}", p.grid_step);
        t
    }

    /// A single target moving at constant velocity on a static background.
    pub fn single_object(width: usize, height: usize, frames: usize, velocity: (f64, f64)) -> Self {
        Scenario {
            width,
            height,
            frames,
            objects: vec![ObjectParams {
                size: (width as f64 / 5.0, height as f64 / 5.0),
                start: (width as f64 / 2.0, height as f64 / 2.0),
                velocity,
                target: true,
                ..Default::default()
            }],
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut s = Scenario::single_object(48, 40, 12, (1.5, -0.5));
        s.objects.push(ObjectParams {
            shape: Shape::Ellipse,
            start: (5.0, 6.0),
            growth: 1.01,
            ..Default::default()
        });
        s.camera_shake = 1.25;
        s.seed = 99;
        let back = Scenario::parse(&s.to_text()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_scene_spec().unwrap(), s.to_scene_spec().unwrap());
    }

    #[test]
    fn parse_errors_name_key() {
        let base = Scenario::single_object(32, 32, 4, (0.0, 0.0)).to_text();
        let err = Scenario::parse(&format!("{base}bogus = 1\n")).unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let err = Scenario::parse(&base.replace("frames = 4", "frames = x")).unwrap_err();
        assert!(err.to_string().contains("frames"));
        let err = Scenario::parse(&base.replace("target = true", "target = false")).unwrap_err();
        assert!(err.to_string().contains("target"));
    }

    #[test]
    fn bounce_stays_inside() {
        let s = Scenario::single_object(40, 30, 200, (3.7, -2.3));
        let spec = s.to_scene_spec().unwrap();
        for c in &spec.objects[0].centers {
            assert!(
                c.x >= 4.0 && c.x <= 36.0 && c.y >= 3.0 && c.y <= 27.0,
                "{c:?}"
            );
        }
        assert_eq!(reflect(12.0, 0.0, 10.0), 8.0);
        assert_eq!(reflect(-3.0, 0.0, 10.0), 3.0);
    }

    #[test]
    fn camera_shift_telescopes() {
        let s = Scenario {
            camera_shift: (1.0, 0.5),
            camera_shake: 2.0,
            ..Scenario::single_object(32, 32, 20, (0.0, 0.0))
        };
        let spec = s.to_scene_spec().unwrap();
        let off = spec.camera_offset(19);
        let want = s.camera_offset(19);
        assert!((off.0 - want.0).abs() < 1e-9 && (off.1 - want.1).abs() < 1e-9);
    }
}
