//! `UFG1` grid container: the magic `UFG1`, then little-endian `u32` width,
//! height and channel count, then `width * height * channels` little-endian
//! `f32` values, row-major with channels interleaved.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::grid::{ProbMask, ScalarGrid};

pub const MAGIC: &[u8; 4] = b"UFG1";

#[derive(Debug, Clone, PartialEq)]
pub struct UfgImage {
    pub width: u32,
    pub height: u32,
    pub channels: u32,
    pub data: Vec<f32>,
}

impl UfgImage {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&self.channels.to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..4] != MAGIC {
            return Err(Error::Format("missing UFG1 header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let (width, height, channels) = (word(4), word(8), word(12));
        let n = width as usize * height as usize * channels as usize;
        if bytes.len() != 16 + 4 * n {
            return Err(Error::Format(format!(
                "UFG1 payload is {} bytes, header implies {}",
                bytes.len() - 16,
                4 * n
            )));
        }
        let data = bytes[16..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::decode(&buf)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.encode())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::decode(&fs::read(path)?)
    }

    /// Whole-file atomic write (temp file + rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io_util::write_atomic(path, &self.encode())
    }

    fn expect_channels(&self, c: u32) -> Result<()> {
        if self.channels != c {
            return Err(Error::Format(format!(
                "expected {c} channel(s), found {}",
                self.channels
            )));
        }
        Ok(())
    }

    fn channel(&self, c: usize) -> Vec<f64> {
        let k = self.channels as usize;
        self.data
            .iter()
            .skip(c)
            .step_by(k)
            .map(|&v| v as f64)
            .collect()
    }
}

impl From<&ScalarGrid> for UfgImage {
    fn from(g: &ScalarGrid) -> Self {
        Self {
            width: g.width() as u32,
            height: g.height() as u32,
            channels: 1,
            data: g.values().iter().map(|&v| v as f32).collect(),
        }
    }
}

impl TryFrom<&UfgImage> for ScalarGrid {
    type Error = Error;

    fn try_from(img: &UfgImage) -> Result<Self> {
        img.expect_channels(1)?;
        ScalarGrid::new(img.width as usize, img.height as usize, img.channel(0))
    }
}

impl From<&ProbMask> for UfgImage {
    fn from(m: &ProbMask) -> Self {
        m.grid().into()
    }
}

impl TryFrom<&UfgImage> for ProbMask {
    type Error = Error;

    fn try_from(img: &UfgImage) -> Result<Self> {
        ProbMask::new(ScalarGrid::try_from(img)?)
    }
}

impl From<&FlowField> for UfgImage {
    fn from(f: &FlowField) -> Self {
        let (w, h) = f.dims();
        let mut data = Vec::with_capacity(w * h * 4);
        let grids = [&f.mean_u, &f.mean_v, &f.scale_u, &f.scale_v];
        for i in 0..w * h {
            for g in grids {
                data.push(g.values()[i] as f32);
            }
        }
        Self {
            width: w as u32,
            height: h as u32,
            channels: 4,
            data,
        }
    }
}

impl TryFrom<&UfgImage> for FlowField {
    type Error = Error;

    fn try_from(img: &UfgImage) -> Result<Self> {
        img.expect_channels(4)?;
        let (w, h) = (img.width as usize, img.height as usize);
        let g = |c| ScalarGrid::new(w, h, img.channel(c));
        FlowField::new(g(0)?, g(1)?, g(2)?, g(3)?)
    }
}
