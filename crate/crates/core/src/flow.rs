//! FlowMask: foreground probability at frame `t` obtained by pushing the
//! previous frame's foreground probabilities through an uncertainty-aware
//! backward correspondence model.
//!
//! Each pixel `i` of frame `t` carries a mean displacement `(u, v)` towards
//! frame `t-1` and per-axis Laplace scales `(b_u, b_v)`. The probability that
//! `i` corresponds to pixel `j` of frame `t-1` is the product of two 1D Laplace
//! densities evaluated at the integer offset `j - i`, renormalised into a
//! discrete distribution. The FlowMask value at `i` is the expectation of the
//! previous mask under that distribution:
//!
//! ```text
//! out(i) = sum_j w_i(j) * prev(j)
//! ```
//!
//! [`propagate_mask`] truncates every kernel to `|offset - mean| <= k * b` per
//! axis and evaluates the weights separably; [`propagate_mask_oracle`] sums the
//! unfactored product over the entire grid and is kept as the reference.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{check_dims, ProbMask, ScalarGrid};

/// Floor on Laplace scales, in pixels. At this scale the kernel is a delta for
/// any integer mean.
pub const B_MIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    /// Horizontal displacement from frame `t` to frame `t-1`.
    pub mean_u: ScalarGrid,
    /// Vertical displacement from frame `t` to frame `t-1`.
    pub mean_v: ScalarGrid,
    pub scale_u: ScalarGrid,
    pub scale_v: ScalarGrid,
}

impl FlowField {
    /// Scales below [`B_MIN`] are raised to it.
    pub fn new(
        mean_u: ScalarGrid,
        mean_v: ScalarGrid,
        scale_u: ScalarGrid,
        scale_v: ScalarGrid,
    ) -> Result<Self> {
        let d = mean_u.dims();
        for g in [&mean_v, &scale_u, &scale_v] {
            check_dims(d, g.dims())?;
        }
        Ok(Self {
            mean_u,
            mean_v,
            scale_u: scale_u.map(|b| b.max(B_MIN)),
            scale_v: scale_v.map(|b| b.max(B_MIN)),
        })
    }

    /// Constant mean `(u, v)` and isotropic scale `b` everywhere.
    pub fn uniform(width: usize, height: usize, u: f64, v: f64, b: f64) -> Self {
        let b = b.max(B_MIN);
        Self {
            mean_u: ScalarGrid::filled(width, height, u),
            mean_v: ScalarGrid::filled(width, height, v),
            scale_u: ScalarGrid::filled(width, height, b),
            scale_v: ScalarGrid::filled(width, height, b),
        }
    }

    /// Zero displacement with the minimum scale.
    pub fn identity(width: usize, height: usize) -> Self {
        Self::uniform(width, height, 0.0, 0.0, B_MIN)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.mean_u.dims()
    }

    pub fn width(&self) -> usize {
        self.mean_u.width()
    }

    pub fn height(&self) -> usize {
        self.mean_u.height()
    }

    /// Same means, every scale replaced by `b`.
    pub fn with_fixed_scale(&self, b: f64) -> Self {
        let (w, h) = self.dims();
        let b = b.max(B_MIN);
        Self {
            mean_u: self.mean_u.clone(),
            mean_v: self.mean_v.clone(),
            scale_u: ScalarGrid::filled(w, h, b),
            scale_v: ScalarGrid::filled(w, h, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Support per axis is every integer offset within `truncation_k * b` of
    /// the mean.
    pub truncation_k: f64,
    /// Renormalise over in-image pixels; otherwise mass that falls outside the
    /// image counts as background.
    pub renormalize_at_border: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            truncation_k: 6.0,
            renormalize_at_border: true,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.truncation_k >= 1.0) || !self.truncation_k.is_finite() {
            return Err(Error::config(
                "truncation_k",
                format!("must be a finite value >= 1, got {}", self.truncation_k),
            ));
        }
        Ok(())
    }
}

/// Laplace density `exp(-|u - mu| / b) / (2b)`.
pub fn laplace_density(u: f64, mu: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::NonpositiveScale(b));
    }
    Ok((-(u - mu).abs() / b).exp() / (2.0 * b))
}

/// Discrete correspondence weights of one output pixel: an outer product of
/// per-axis weights over the in-image part of the truncated support.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceKernel {
    /// First column of the support.
    pub col0: usize,
    /// First row of the support.
    pub row0: usize,
    pub wx: Vec<f64>,
    pub wy: Vec<f64>,
}

impl CorrespondenceKernel {
    /// Weight of pixel `(row, col)` of frame `t-1`; zero outside the support.
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        if row < self.row0 || col < self.col0 {
            return 0.0;
        }
        let (r, c) = (row - self.row0, col - self.col0);
        match (self.wy.get(r), self.wx.get(c)) {
            (Some(a), Some(b)) => a * b,
            _ => 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.wx.iter().sum::<f64>() * self.wy.iter().sum::<f64>()
    }

    /// Dense `width x height` grid of weights.
    pub fn to_grid(&self, width: usize, height: usize) -> ScalarGrid {
        ScalarGrid::from_fn(width, height, |r, c| self.weight(r, c))
    }

    fn apply(&self, prev: &ScalarGrid) -> f64 {
        let mut acc = 0.0;
        for (dy, &wy) in self.wy.iter().enumerate() {
            if wy == 0.0 {
                continue;
            }
            let row = &prev.row(self.row0 + dy)[self.col0..self.col0 + self.wx.len()];
            let inner: f64 = row.iter().zip(&self.wx).map(|(p, w)| p * w).sum();
            acc += wy * inner;
        }
        acc
    }
}

/// 1D weights for a pixel at `pos` with mean `mu` and scale `b` on an axis of
/// length `len`. Returns the first in-image index and the weights, or `None`
/// when the truncated support misses the image entirely.
///
/// With border renormalisation the support is centred on the in-image point
/// nearest the mean, so a correspondence that lands outside the image puts
/// its mass on the pixels nearest to it.
fn axis_weights(
    pos: usize,
    mu: f64,
    b: f64,
    len: usize,
    cfg: &KernelConfig,
) -> Option<(usize, Vec<f64>)> {
    let center = pos as f64 + mu;
    let reach = cfg.truncation_k * b;
    let anchor = if cfg.renormalize_at_border {
        center.clamp(0.0, len as f64 - 1.0)
    } else {
        center
    };
    let lo = (anchor - reach).floor();
    let hi = (anchor + reach).ceil();
    let lo_in = lo.max(0.0);
    let hi_in = hi.min(len as f64 - 1.0);
    if lo_in > hi_in {
        return None;
    }
    let (lo_in, hi_in) = (lo_in as usize, hi_in as usize);

    // Work relative to the smallest exponent so that narrow kernels whose
    // in-image part sits far from the mean do not underflow to all zeros.
    let expo = |d: f64| (d - center).abs() / b;
    let shift = if cfg.renormalize_at_border {
        (lo_in..=hi_in)
            .map(|d| expo(d as f64))
            .fold(f64::INFINITY, f64::min)
    } else {
        expo(center.round().clamp(lo, hi))
    };
    let mut w: Vec<f64> = (lo_in..=hi_in)
        .map(|d| (shift - expo(d as f64)).exp())
        .collect();

    let norm = if cfg.renormalize_at_border {
        w.iter().sum::<f64>()
    } else {
        let (lo, hi) = (lo as i64, hi as i64);
        (lo..=hi)
            .map(|d| (shift - expo(d as f64)).exp())
            .sum::<f64>()
    };
    for v in &mut w {
        *v /= norm;
    }
    Some((lo_in, w))
}

/// Correspondence distribution of pixel `(row, col)` of frame `t` over the
/// pixels of frame `t-1`.
pub fn correspondence_kernel(
    row: usize,
    col: usize,
    flow: &FlowField,
    cfg: &KernelConfig,
) -> Result<CorrespondenceKernel> {
    cfg.validate()?;
    let (w, h) = flow.dims();
    if row >= h || col >= w {
        return Err(Error::InvalidGrid(format!(
            "pixel ({row}, {col}) outside {w}x{h}"
        )));
    }
    kernel_unchecked(row, col, flow, cfg)
}

fn kernel_unchecked(
    row: usize,
    col: usize,
    flow: &FlowField,
    cfg: &KernelConfig,
) -> Result<CorrespondenceKernel> {
    let (w, h) = flow.dims();
    let off_grid = || Error::CorrespondenceOffGrid { row, col };
    let (col0, wx) = axis_weights(
        col,
        flow.mean_u.get(row, col),
        flow.scale_u.get(row, col),
        w,
        cfg,
    )
    .ok_or_else(off_grid)?;
    let (row0, wy) = axis_weights(
        row,
        flow.mean_v.get(row, col),
        flow.scale_v.get(row, col),
        h,
        cfg,
    )
    .ok_or_else(off_grid)?;
    Ok(CorrespondenceKernel { col0, row0, wx, wy })
}

/// Truncated separable evaluation of the FlowMask.
///
/// Without border renormalisation, pixels whose correspondence support lies
/// entirely outside the image get probability zero. Rows are processed in
/// parallel.
pub fn propagate_mask(prev: &ProbMask, flow: &FlowField, cfg: &KernelConfig) -> Result<ProbMask> {
    cfg.validate()?;
    check_dims(prev.dims(), flow.dims())?;
    let (w, h) = flow.dims();
    let prev = prev.grid();
    let values: Vec<f64> = (0..h)
        .into_par_iter()
        .flat_map_iter(|row| {
            (0..w).map(move |col| match kernel_unchecked(row, col, flow, cfg) {
                Ok(k) => k.apply(prev),
                Err(_) => 0.0,
            })
        })
        .collect();
    Ok(ProbMask::clamped(ScalarGrid::new(w, h, values)?))
}

/// Reference FlowMask with border renormalisation: for every output pixel the
/// product density is evaluated at every pixel of the grid, without
/// truncation. Cost is quadratic in the pixel count; meant for small grids.
pub fn propagate_mask_oracle(prev: &ProbMask, flow: &FlowField) -> Result<ProbMask> {
    propagate_mask_oracle_with(prev, flow, true)
}

/// As [`propagate_mask_oracle`]; with `renormalize = false` the weights are
/// normalised by the closed-form sum of the density over all integer offsets,
/// so mass leaving the image is lost.
#[allow(clippy::needless_range_loop)]
pub fn propagate_mask_oracle_with(
    prev: &ProbMask,
    flow: &FlowField,
    renormalize: bool,
) -> Result<ProbMask> {
    check_dims(prev.dims(), flow.dims())?;
    let (w, h) = flow.dims();
    let mut out = ScalarGrid::zeros(w, h);
    let mut dx = vec![0.0; w];
    let mut dy = vec![0.0; h];
    for row in 0..h {
        for col in 0..w {
            let (mu, mv) = (flow.mean_u.get(row, col), flow.mean_v.get(row, col));
            let (bu, bv) = (flow.scale_u.get(row, col), flow.scale_v.get(row, col));
            for (jc, d) in dx.iter_mut().enumerate() {
                *d = laplace_density(jc as f64 - col as f64, mu, bu)?;
            }
            for (jr, d) in dy.iter_mut().enumerate() {
                *d = laplace_density(jr as f64 - row as f64, mv, bv)?;
            }
            let mut total = 0.0;
            let mut acc = 0.0;
            for jr in 0..h {
                for jc in 0..w {
                    let p = dx[jc] * dy[jr];
                    total += p;
                    acc += p * prev.get(jr, jc);
                }
            }
            let norm = if renormalize {
                total
            } else {
                lattice_mass(mu, bu) * lattice_mass(mv, bv)
            };
            out.set(row, col, if norm > 0.0 { acc / norm } else { 0.0 });
        }
    }
    Ok(ProbMask::clamped(out))
}

/// `sum over all integers d of laplace_density(d, mu, b)` in closed form.
fn lattice_mass(mu: f64, b: f64) -> f64 {
    let f = mu - mu.floor();
    let q = (-1.0 / b).exp();
    ((-f / b).exp() + (-(1.0 - f) / b).exp()) / (1.0 - q) / (2.0 * b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn density_values() {
        assert_eq!(laplace_density(0.0, 0.0, 1.0).unwrap(), 0.5);
        assert!(close(
            laplace_density(2.0, 0.0, 1.0).unwrap(),
            0.5 * (-2.0f64).exp(),
            1e-15
        ));
        assert!(close(
            laplace_density(2.0, 0.0, 1.0).unwrap(),
            0.067668,
            1e-6
        ));
        assert!(close(
            laplace_density(3.0, 1.0, 0.5).unwrap(),
            (-4.0f64).exp(),
            1e-12
        ));
        assert!(close(
            laplace_density(3.0, 1.0, 0.5).unwrap(),
            0.018316,
            1e-6
        ));
        assert!(matches!(
            laplace_density(0.0, 0.0, 0.0),
            Err(Error::NonpositiveScale(_))
        ));
        assert!(laplace_density(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn near_delta_kernel() {
        let flow = FlowField::identity(11, 11);
        let k = correspondence_kernel(5, 5, &flow, &KernelConfig::default()).unwrap();
        let g = k.to_grid(11, 11);
        for r in 0..11 {
            for c in 0..11 {
                let want = if (r, c) == (5, 5) { 1.0 } else { 0.0 };
                assert!(close(g.get(r, c), want, 1e-9));
            }
        }
    }

    #[test]
    fn symmetric_unit_kernel() {
        let flow = FlowField::uniform(61, 61, 0.0, 0.0, 1.0);
        let cfg = KernelConfig {
            truncation_k: 20.0,
            renormalize_at_border: true,
        };
        let k = correspondence_kernel(30, 30, &flow, &cfg).unwrap();
        assert!(close(k.total(), 1.0, 1e-12));
        for d in 1..=20 {
            assert!(close(k.weight(30, 30 + d), k.weight(30, 30 - d), 1e-15));
            assert!(close(k.weight(30 + d, 30), k.weight(30 - d, 30), 1e-15));
        }
    }

    #[test]
    fn off_grid_support() {
        let flow = FlowField::uniform(8, 8, -40.0, 0.0, 0.5);
        let open = KernelConfig {
            renormalize_at_border: false,
            ..KernelConfig::default()
        };
        let err = correspondence_kernel(3, 3, &flow, &open).unwrap_err();
        assert!(matches!(err, Error::CorrespondenceOffGrid { .. }));
        let out = propagate_mask(&ProbMask::filled(8, 8, 0.7), &flow, &open).unwrap();
        assert_eq!(out.grid().max(), 0.0);

        let k = correspondence_kernel(3, 3, &flow, &KernelConfig::default()).unwrap();
        assert!(close(k.total(), 1.0, 1e-12));
        assert_eq!(k.col0, 0);
        assert!(k.weight(3, 0) > k.weight(3, 1));
        let prev = ProbMask::new(ScalarGrid::from_fn(8, 8, |_, c| c as f64 / 8.0)).unwrap();
        let wide = KernelConfig {
            truncation_k: 40.0,
            ..KernelConfig::default()
        };
        let fast = propagate_mask(&prev, &flow, &wide).unwrap();
        let exact = propagate_mask_oracle(&prev, &flow).unwrap();
        assert!(fast.grid().max_abs_diff(exact.grid()).unwrap() < 1e-12);
    }

    #[test]
    fn lattice_mass_matches_direct_sum() {
        for &(mu, b) in &[(0.0, 1.0), (0.3, 0.5), (-2.7, 2.0), (5.5, 0.2)] {
            let direct: f64 = (-400..=400)
                .map(|d| laplace_density(d as f64, mu, b).unwrap())
                .sum();
            assert!(close(lattice_mass(mu, b), direct, 1e-12), "{mu} {b}");
        }
    }

    #[test]
    fn border_policy_background() {
        // Kernel half outside the left border loses that mass without renormalisation.
        let flow = FlowField::uniform(9, 9, 0.0, 0.0, 1.0);
        let cfg = KernelConfig {
            truncation_k: 30.0,
            renormalize_at_border: false,
        };
        let out = propagate_mask(&ProbMask::filled(9, 9, 1.0), &flow, &cfg).unwrap();
        assert!(out.get(4, 0) < 0.8);
        assert!(out.get(4, 4) > 0.97);
        let oracle =
            propagate_mask_oracle_with(&ProbMask::filled(9, 9, 1.0), &flow, false).unwrap();
        assert!(out.grid().max_abs_diff(oracle.grid()).unwrap() < 1e-10);
    }

    #[test]
    fn dimension_mismatch() {
        let flow = FlowField::identity(4, 4);
        let prev = ProbMask::filled(5, 4, 0.0);
        assert!(matches!(
            propagate_mask(&prev, &flow, &KernelConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(propagate_mask_oracle(&prev, &flow).is_err());
    }

    #[test]
    fn scales_are_floored() {
        let g = ScalarGrid::filled(2, 2, 0.0);
        let f = FlowField::new(g.clone(), g.clone(), g.clone(), g).unwrap();
        assert_eq!(f.scale_u.min(), B_MIN);
    }

    #[test]
    fn rejects_small_truncation() {
        let cfg = KernelConfig {
            truncation_k: 0.5,
            renormalize_at_border: true,
        };
        assert!(correspondence_kernel(0, 0, &FlowField::identity(2, 2), &cfg).is_err());
    }
}
