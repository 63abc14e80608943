use crate::error::{Error, Result};
use crate::flow::{FlowField, B_MIN};
use crate::geometry::{AABox, Point, RotBox};
use crate::grid::{BinaryMask, ScalarGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Rect,
    Ellipse,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::Rect => "rect",
            Shape::Ellipse => "ellipse",
        }
    }
}

/// One object with a per-frame world-space centre and uniform scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSpec {
    pub shape: Shape,
    /// Width and height at scale 1.
    pub size: (f64, f64),
    pub centers: Vec<Point>,
    /// Per-frame scale; empty means constant 1.
    pub scales: Vec<f64>,
    pub is_target: bool,
}

impl ObjectSpec {
    pub fn scale(&self, t: usize) -> f64 {
        self.scales.get(t).copied().unwrap_or(1.0)
    }

    fn contains(&self, center: Point, scale: f64, col: f64, row: f64) -> bool {
        let hw = self.size.0 * scale / 2.0;
        let hh = self.size.1 * scale / 2.0;
        let dx = col - center.x;
        let dy = row - center.y;
        match self.shape {
            Shape::Rect => dx >= -hw && dx < hw && dy >= -hh && dy < hh,
            Shape::Ellipse => {
                let ex = (dx + 0.5) / hw;
                let ey = (dy + 0.5) / hh;
                ex * ex + ey * ey < 1.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub num_frames: usize,
    /// Objects in paint order: later objects occlude earlier ones.
    pub objects: Vec<ObjectSpec>,
    /// Image-space camera translation between frame `t-1` and `t`; entry 0 is ignored.
    pub camera_shift: Vec<(f64, f64)>,
    pub seed: u64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.num_frames == 0 {
            return Err(Error::config(
                "scene",
                "width, height and frames must be positive",
            ));
        }
        if self.objects.len() > u16::MAX as usize - 1 {
            return Err(Error::config("scene", "too many objects"));
        }
        if self.objects.iter().filter(|o| o.is_target).count() != 1 {
            return Err(Error::config(
                "scene",
                "exactly one object must be the target",
            ));
        }
        if self.camera_shift.len() != self.num_frames {
            return Err(Error::config("camera", "one shift per frame required"));
        }
        for (i, o) in self.objects.iter().enumerate() {
            let key = format!("object.{i}");
            if !(o.size.0 > 0.0 && o.size.1 > 0.0) {
                return Err(Error::config(key, "size must be positive"));
            }
            if o.centers.len() != self.num_frames {
                return Err(Error::config(key, "one centre per frame required"));
            }
            if !o.scales.is_empty() && o.scales.len() != self.num_frames {
                return Err(Error::config(key, "one scale per frame required"));
            }
            if o.scales.iter().any(|&s| !(s > 0.0)) {
                return Err(Error::config(key, "scales must be positive"));
            }
        }
        Ok(())
    }

    pub fn target_index(&self) -> usize {
        self.objects.iter().position(|o| o.is_target).unwrap_or(0)
    }

    /// Cumulative camera offset at frame `t`.
    pub fn camera_offset(&self, t: usize) -> (f64, f64) {
        self.camera_shift[1..=t]
            .iter()
            .fold((0.0, 0.0), |a, s| (a.0 + s.0, a.1 + s.1))
    }

    /// Image-space centre of object `k` at frame `t`.
    pub fn image_center(&self, k: usize, t: usize) -> Point {
        let (ox, oy) = self.camera_offset(t);
        let c = self.objects[k].centers[t];
        Point::new(c.x + ox, c.y + oy)
    }
}

/// Rendered frame: ownership labels, ground truth and the exact backward flow.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedFrame {
    pub index: usize,
    pub width: usize,
    pub height: usize,
    /// 0 for background, `k + 1` for object `k`.
    pub labels: Vec<u16>,
    /// Bounds of each object's complete (unoccluded, unclipped) pixel set.
    pub object_boxes: Vec<Option<AABox>>,
    /// Pixel count of each object's complete shape.
    pub object_pixels: Vec<usize>,
    pub target: usize,
    pub gt: RotBox,
    /// Image-space displacement of each object relative to the background
    /// between the previous frame and this one.
    pub relative_motion: Vec<Point>,
    /// Image-space centre of each object in this frame and the previous one.
    pub centers: Vec<Point>,
    pub prev_centers: Vec<Point>,
    /// Background pixels revealed this frame, labelled with the uncovering object.
    pub disoccluded: Vec<u16>,
    pub camera_shift: (f64, f64),
    pub true_flow: FlowField,
}

impl RenderedFrame {
    pub fn label(&self, row: usize, col: usize) -> u16 {
        self.labels[row * self.width + col]
    }

    pub fn object_mask(&self, k: usize) -> BinaryMask {
        let l = k as u16 + 1;
        BinaryMask::from_fn(self.width, self.height, |r, c| self.label(r, c) == l)
    }

    pub fn target_mask(&self) -> BinaryMask {
        self.object_mask(self.target)
    }

    pub fn visible_count(&self, k: usize) -> usize {
        let l = k as u16 + 1;
        self.labels.iter().filter(|&&v| v == l).count()
    }

    pub fn target_box(&self) -> AABox {
        self.gt.bounding_box()
    }

    /// Whether any of the target's full extent overlaps the image.
    pub fn target_in_frame(&self) -> bool {
        self.target_box().intersects_image(self.width, self.height)
    }

    /// Fraction of the target's full pixel set that is visible.
    pub fn target_visibility(&self) -> f64 {
        let full = self.object_pixels[self.target].max(1);
        (self.visible_count(self.target) as f64 / full as f64).min(1.0)
    }

    /// Boxes of the non-target objects that overlap the image.
    pub fn distractor_boxes(&self) -> Vec<AABox> {
        self.object_boxes
            .iter()
            .enumerate()
            .filter(|&(k, b)| k != self.target && b.is_some())
            .filter_map(|(_, b)| *b)
            .filter(|b| b.intersects_image(self.width, self.height))
            .collect()
    }
}

/// Bounds and pixel count of the complete shape.
fn full_extent(obj: &ObjectSpec, center: Point, scale: f64) -> (Option<AABox>, usize) {
    let hw = obj.size.0 * scale / 2.0 + 1.0;
    let hh = obj.size.1 * scale / 2.0 + 1.0;
    let (c0, c1) = (
        (center.x - hw).floor() as i64,
        (center.x + hw).ceil() as i64,
    );
    let (r0, r1) = (
        (center.y - hh).floor() as i64,
        (center.y + hh).ceil() as i64,
    );
    let mut b: Option<(i64, i64, i64, i64)> = None;
    let mut count = 0;
    for r in r0..=r1 {
        for c in c0..=c1 {
            if obj.contains(center, scale, c as f64, r as f64) {
                count += 1;
                b = Some(match b {
                    None => (c, r, c, r),
                    Some((x0, y0, x1, y1)) => (x0.min(c), y0.min(r), x1.max(c), y1.max(r)),
                });
            }
        }
    }
    let bounds = b.map(|(x0, y0, x1, y1)| {
        AABox::from_bounds(
            x0 as f64 - 0.5,
            y0 as f64 - 0.5,
            x1 as f64 + 0.5,
            y1 as f64 + 0.5,
        )
        .expect("non-empty pixel extent")
    });
    (bounds, count)
}

fn render_labels(spec: &SceneSpec, t: usize) -> Vec<u16> {
    let (w, h) = (spec.width, spec.height);
    let mut labels = vec![0u16; w * h];
    for (k, obj) in spec.objects.iter().enumerate() {
        let c = spec.image_center(k, t);
        let s = obj.scale(t);
        let Some(b) = full_extent(obj, c, s).0 else {
            continue;
        };
        let ((r0, r1), (c0, c1)) = b.pixel_ranges(w, h);
        for row in r0..r1 {
            for col in c0..c1 {
                if obj.contains(c, s, col as f64, row as f64) {
                    labels[row * w + col] = k as u16 + 1;
                }
            }
        }
    }
    labels
}

/// Renders every frame of the scene with its exact backward flow.
///
/// Object pixels map through the object's own translation and scaling.
/// Background pixels move with the camera, except where they were hidden at
/// `t-1`: there the source is pushed back along the uncovering object's
/// motion to the nearest visible background pixel.
pub fn render_scene(spec: &SceneSpec) -> Result<Vec<RenderedFrame>> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let target = spec.target_index();
    let mut frames: Vec<RenderedFrame> = Vec::with_capacity(spec.num_frames);
    for t in 0..spec.num_frames {
        let labels = render_labels(spec, t);
        let (object_boxes, object_pixels): (Vec<Option<AABox>>, Vec<usize>) = spec
            .objects
            .iter()
            .enumerate()
            .map(|(k, o)| full_extent(o, spec.image_center(k, t), o.scale(t)))
            .unzip();
        let gt = match object_boxes[target] {
            Some(b) => b.to_rotbox(),
            None => {
                let c = spec.image_center(target, t);
                AABox::new(c.x.round(), c.y.round(), 1.0, 1.0)?.to_rotbox()
            }
        };
        let shift = if t == 0 {
            (0.0, 0.0)
        } else {
            spec.camera_shift[t]
        };
        let relative_motion: Vec<Point> = (0..spec.objects.len())
            .map(|k| {
                if t == 0 {
                    Point::new(0.0, 0.0)
                } else {
                    let a = spec.image_center(k, t);
                    let b = spec.image_center(k, t - 1);
                    Point::new(a.x - b.x - shift.0, a.y - b.y - shift.1)
                }
            })
            .collect();

        let centers: Vec<Point> = (0..spec.objects.len())
            .map(|k| spec.image_center(k, t))
            .collect();
        let prev_centers: Vec<Point> = (0..spec.objects.len())
            .map(|k| spec.image_center(k, t.saturating_sub(1)))
            .collect();

        let mut disoccluded = vec![0u16; w * h];
        let true_flow = if t == 0 {
            FlowField::identity(w, h)
        } else {
            let prev_labels = &frames[t - 1].labels;
            let prev_label = |x: f64, y: f64| -> u16 {
                let (c, r) = (x.round(), y.round());
                if c < 0.0 || r < 0.0 || c >= w as f64 || r >= h as f64 {
                    0
                } else {
                    prev_labels[r as usize * w + c as usize]
                }
            };
            let mut mu = ScalarGrid::zeros(w, h);
            let mut mv = ScalarGrid::zeros(w, h);
            for row in 0..h {
                for col in 0..w {
                    let (x, y) = (col as f64, row as f64);
                    let l = labels[row * w + col];
                    let src = if l > 0 {
                        let k = l as usize - 1;
                        let a = spec.image_center(k, t);
                        let b = spec.image_center(k, t - 1);
                        let ratio = spec.objects[k].scale(t - 1) / spec.objects[k].scale(t);
                        Point::new(
                            b.x - 0.5 + (x - (a.x - 0.5)) * ratio,
                            b.y - 0.5 + (y - (a.y - 0.5)) * ratio,
                        )
                    } else {
                        let mut s = Point::new(x - shift.0, y - shift.1);
                        let hidden_by = prev_label(s.x, s.y);
                        if hidden_by > 0 {
                            disoccluded[row * w + col] = hidden_by;
                            let r = relative_motion[hidden_by as usize - 1];
                            let n = r.x.hypot(r.y);
                            if n > 0.0 {
                                let step = Point::new(r.x / n, r.y / n);
                                let limit = 4 * (w + h);
                                for _ in 0..limit {
                                    if prev_label(s.x, s.y) == 0 {
                                        break;
                                    }
                                    s = Point::new(s.x - step.x, s.y - step.y);
                                }
                            }
                        }
                        s
                    };
                    mu.set(row, col, src.x - x);
                    mv.set(row, col, src.y - y);
                }
            }
            FlowField::new(
                mu,
                mv,
                ScalarGrid::filled(w, h, B_MIN),
                ScalarGrid::filled(w, h, B_MIN),
            )?
        };

        frames.push(RenderedFrame {
            index: t,
            width: w,
            height: h,
            labels,
            object_boxes,
            object_pixels,
            target,
            gt,
            relative_motion,
            centers,
            prev_centers,
            disoccluded,
            camera_shift: shift,
            true_flow,
        });
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{propagate_mask, KernelConfig};
    use crate::geometry::iou;

    fn moving_rect(frames: usize, v: (f64, f64), shift: (f64, f64)) -> SceneSpec {
        let centers = (0..frames)
            .map(|t| Point::new(20.0 + v.0 * t as f64, 24.0 + v.1 * t as f64))
            .collect();
        let mut camera_shift = vec![shift; frames];
        camera_shift[0] = (0.0, 0.0);
        SceneSpec {
            width: 64,
            height: 48,
            num_frames: frames,
            objects: vec![ObjectSpec {
                shape: Shape::Rect,
                size: (10.0, 8.0),
                centers,
                scales: vec![],
                is_target: true,
            }],
            camera_shift,
            seed: 1,
        }
    }

    #[test]
    fn rect_pixel_extent() {
        let frames = render_scene(&moving_rect(1, (0.0, 0.0), (0.0, 0.0))).unwrap();
        let f = &frames[0];
        assert_eq!(f.visible_count(0), 80);
        let b = f.target_box();
        assert_eq!((b.x0(), b.x1(), b.y0(), b.y1()), (14.5, 24.5, 19.5, 27.5));
        assert!(f.target_in_frame());
        assert_eq!(f.target_visibility(), 1.0);
    }

    #[test]
    fn translation_flow_is_exact() {
        let frames = render_scene(&moving_rect(3, (2.0, 0.0), (0.0, 0.0))).unwrap();
        let f = &frames[1];
        let (r, c) = f.target_mask().foreground().next().unwrap();
        assert_eq!(f.true_flow.mean_u.get(r, c), -2.0);
        assert_eq!(f.true_flow.mean_v.get(r, c), 0.0);
        assert_eq!(f.true_flow.mean_u.get(0, 0), 0.0);
    }

    #[test]
    fn camera_shift_moves_background() {
        let frames = render_scene(&moving_rect(3, (0.0, 0.0), (1.0, -2.0))).unwrap();
        let f = &frames[2];
        assert_eq!(f.true_flow.mean_u.get(0, 0), -1.0);
        assert_eq!(f.true_flow.mean_v.get(0, 0), 2.0);
        assert_eq!(
            f.target_box().center().x,
            frames[0].target_box().center().x + 2.0
        );
        assert_eq!(f.relative_motion[0], Point::new(0.0, 0.0));
    }

    #[test]
    fn true_flow_reproduces_target_mask() {
        for &(v, shift) in &[
            ((2.0, 0.0), (0.0, 0.0)),
            ((3.0, -1.0), (1.0, 1.0)),
            ((-2.0, 2.0), (-1.0, 0.0)),
        ] {
            let frames = render_scene(&moving_rect(4, v, shift)).unwrap();
            for t in 1..4 {
                let prev = frames[t - 1].target_mask().to_prob();
                let out = propagate_mask(&prev, &frames[t].true_flow, &KernelConfig::default())
                    .unwrap()
                    .threshold(0.5);
                let want = frames[t].target_mask();
                let inter = out.foreground().filter(|&(r, c)| want.get(r, c)).count();
                let union = out.count() + want.count() - inter;
                assert!(inter as f64 / union as f64 >= 0.99, "{v:?} {shift:?} t={t}");
            }
        }
    }

    #[test]
    fn occlusion_and_gt_extent() {
        let mut spec = moving_rect(2, (0.0, 0.0), (0.0, 0.0));
        spec.objects.push(ObjectSpec {
            shape: Shape::Ellipse,
            size: (8.0, 8.0),
            centers: vec![Point::new(20.0, 24.0); 2],
            scales: vec![],
            is_target: false,
        });
        let frames = render_scene(&spec).unwrap();
        let f = &frames[0];
        assert!(f.visible_count(0) < 80);
        // ground truth keeps the full target extent
        assert!(iou(&f.target_box(), &frames[0].object_boxes[0].unwrap()) == 1.0);
        assert_eq!(f.target_box().w, 10.0);
        assert!(f.target_visibility() < 1.0);
        assert_eq!(f.distractor_boxes().len(), 1);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = moving_rect(2, (0.0, 0.0), (0.0, 0.0));
        s.objects[0].is_target = false;
        assert!(render_scene(&s).is_err());
        let mut s = moving_rect(2, (0.0, 0.0), (0.0, 0.0));
        s.camera_shift.pop();
        assert!(render_scene(&s).is_err());
    }

    #[test]
    fn camera_shift_warp_is_exact() {
        let frames = render_scene(&moving_rect(3, (0.0, 0.0), (3.0, 0.0))).unwrap();
        let f = &frames[1];
        let (r, c) = f.target_mask().foreground().next().unwrap();
        assert_eq!(
            (f.true_flow.mean_u.get(r, c), f.true_flow.mean_v.get(r, c)),
            (-3.0, 0.0)
        );
        assert_eq!(
            (f.true_flow.mean_u.get(0, 0), f.true_flow.mean_v.get(0, 0)),
            (-3.0, 0.0)
        );
        for t in 1..3 {
            let warped = propagate_mask(
                &frames[t - 1].target_mask().to_prob(),
                &frames[t].true_flow,
                &KernelConfig::default(),
            )
            .unwrap()
            .threshold(0.5);
            assert_eq!(warped, frames[t].target_mask(), "t={t}");
        }
    }
}
