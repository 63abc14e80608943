//! Scene directories on disk.
//!
//! ```text
//! <scene>/scene.cfg          scenario parameters (key = value)
//! <scene>/groundtruth.txt    one line per frame: x1,y1,x2,y2,x3,y3,x4,y4
//! <scene>/mask_NNNNN.ufg     target mask, 1 channel
//! <scene>/flow_NNNNN.ufg     backward flow to the previous frame, 4 channels
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::geometry::RotBox;
use crate::grid::ProbMask;
use crate::io_util::write_atomic;
use crate::synth::{derive_seed, render_scene, synth_flow, RenderedFrame, Scenario, STREAM_FLOW};
use crate::ufg::UfgImage;

pub const SCENE_FILE: &str = "scene.cfg";
pub const GROUNDTRUTH_FILE: &str = "groundtruth.txt";

pub fn mask_file(frame: usize) -> String {
    format!("mask_{frame:05}.ufg")
}

pub fn flow_file(frame: usize) -> String {
    format!("flow_{frame:05}.ufg")
}

pub fn format_coords(v: &[f64; 8]) -> String {
    v.iter()
        .map(|x| format!("{x:.6}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// A scene with its rendered frames and provider flows.
#[derive(Debug, Clone)]
pub struct SceneData {
    pub name: String,
    pub scenario: Scenario,
    pub frames: Vec<RenderedFrame>,
    /// `flows[t]` maps frame `t` back to `t-1`; `flows[0]` is unused.
    pub flows: Vec<FlowField>,
    /// Target masks used for (re)initialisation.
    pub masks: Vec<ProbMask>,
}

impl SceneData {
    pub fn generate(name: impl Into<String>, scenario: &Scenario) -> Result<Self> {
        let spec = scenario.to_scene_spec()?;
        let frames = render_scene(&spec)?;
        let flows = frames
            .iter()
            .map(|f| {
                synth_flow(
                    f,
                    &scenario.noise,
                    derive_seed(scenario.seed, &[f.index as u64, STREAM_FLOW]),
                )
            })
            .collect();
        let masks = frames.iter().map(|f| f.target_mask().to_prob()).collect();
        Ok(Self {
            name: name.into(),
            scenario: scenario.clone(),
            frames,
            flows,
            masks,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.scenario.width, self.scenario.height)
    }

    pub fn groundtruth(&self) -> Vec<RotBox> {
        self.frames.iter().map(|f| f.gt).collect()
    }

    /// Writes the scene; every file is written atomically.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_atomic(&dir.join(SCENE_FILE), self.scenario.to_text().as_bytes())?;
        let gt: String = self
            .frames
            .iter()
            .map(|f| format_coords(&f.gt.flat()) + "\n")
            .collect();
        write_atomic(&dir.join(GROUNDTRUTH_FILE), gt.as_bytes())?;
        for (t, (mask, flow)) in self.masks.iter().zip(&self.flows).enumerate() {
            UfgImage::from(mask).save(&dir.join(mask_file(t)))?;
            UfgImage::from(flow).save(&dir.join(flow_file(t)))?;
        }
        Ok(())
    }

    /// Loads a scene directory. Frames are re-rendered from `scene.cfg`;
    /// masks and flows come from disk. Missing frame files are reported
    /// together.
    pub fn load(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(SCENE_FILE))
            .map_err(|e| Error::Format(format!("{}: {e}", dir.join(SCENE_FILE).display())))?;
        let scenario = Scenario::parse(&text)
            .map_err(|e| Error::Format(format!("{}: {e}", dir.join(SCENE_FILE).display())))?;
        let n = scenario.frames;

        let gt_text = fs::read_to_string(dir.join(GROUNDTRUTH_FILE))?;
        let gt = parse_groundtruth(&gt_text)?;
        if gt.len() != n {
            return Err(Error::Format(format!(
                "{GROUNDTRUTH_FILE} has {} lines, scene has {n} frames",
                gt.len()
            )));
        }
        let missing: Vec<usize> = (0..n)
            .filter(|&t| !dir.join(mask_file(t)).is_file() || !dir.join(flow_file(t)).is_file())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Insufficient(format!(
                "missing mask/flow files for frames {missing:?}"
            )));
        }

        let frames = render_scene(&scenario.to_scene_spec()?)?;
        let (w, h) = (scenario.width, scenario.height);
        let mut masks = Vec::with_capacity(n);
        let mut flows = Vec::with_capacity(n);
        for t in 0..n {
            let mask = ProbMask::try_from(&UfgImage::load(&dir.join(mask_file(t)))?)?;
            let flow = FlowField::try_from(&UfgImage::load(&dir.join(flow_file(t)))?)?;
            if mask.dims() != (w, h) || flow.dims() != (w, h) {
                return Err(Error::DimensionMismatch {
                    expected: (w, h),
                    got: if mask.dims() != (w, h) {
                        mask.dims()
                    } else {
                        flow.dims()
                    },
                });
            }
            masks.push(mask);
            flows.push(flow);
        }
        let mut frames = frames;
        for (f, g) in frames.iter_mut().zip(gt) {
            f.gt = g;
        }
        let name = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(Self {
            name,
            scenario,
            frames,
            flows,
            masks,
        })
    }
}

pub fn parse_groundtruth(text: &str) -> Result<Vec<RotBox>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let v: Vec<f64> = l
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("groundtruth line {}: {e}", i + 1)))?;
            RotBox::from_flat(&v)
                .map_err(|e| Error::Format(format!("groundtruth line {}: {e}", i + 1)))
        })
        .collect()
}

/// Scene directories under `root` (those containing `scene.cfg`), sorted by
/// name. A scene directory itself yields just that directory.
pub fn discover_scenes(root: &Path) -> Result<Vec<PathBuf>> {
    if root.join(SCENE_FILE).is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut out: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(SCENE_FILE).is_file())
        .collect();
    out.sort();
    if out.is_empty() {
        return Err(Error::Insufficient(format!(
            "no scene directories under {}",
            root.display()
        )));
    }
    Ok(out)
}

pub fn load_dataset(root: &Path) -> Result<Vec<SceneData>> {
    discover_scenes(root)?
        .iter()
        .map(|p| SceneData::load(p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::Scenario;

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = Scenario::single_object(32, 24, 10, (1.0, 0.5));
        let data = SceneData::generate("a", &s).unwrap();
        data.save(dir.path()).unwrap();
        for t in 0..10 {
            assert!(dir.path().join(mask_file(t)).is_file());
            assert!(dir.path().join(flow_file(t)).is_file());
        }
        let gt = fs::read_to_string(dir.path().join(GROUNDTRUTH_FILE)).unwrap();
        assert_eq!(gt.lines().count(), 10);
        let back = SceneData::load(dir.path()).unwrap();
        assert_eq!(back.flows, data.flows);
        assert_eq!(back.masks, data.masks);
        assert_eq!(back.groundtruth(), data.groundtruth());
    }

    #[test]
    fn missing_frames_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        let s = Scenario::single_object(16, 16, 5, (0.0, 0.0));
        SceneData::generate("a", &s)
            .unwrap()
            .save(dir.path())
            .unwrap();
        fs::remove_file(dir.path().join(flow_file(2))).unwrap();
        fs::remove_file(dir.path().join(mask_file(4))).unwrap();
        let err = SceneData::load(dir.path()).unwrap_err().to_string();
        assert!(err.contains("[2, 4]"), "{err}");
    }

    #[test]
    fn discovers_sorted_scenes() {
        let dir = tempfile::tempdir().unwrap();
        let s = Scenario::single_object(16, 16, 2, (0.0, 0.0));
        for name in ["b", "a"] {
            SceneData::generate(name, &s)
                .unwrap()
                .save(&dir.path().join(name))
                .unwrap();
        }
        let found = discover_scenes(dir.path()).unwrap();
        assert_eq!(found.len(), 2);
        assert!(found[0].ends_with("a"));
        assert!(discover_scenes(&dir.path().join("a")).unwrap().len() == 1);
        let set = load_dataset(dir.path()).unwrap();
        assert_eq!(set[1].name, "b");
    }
}
