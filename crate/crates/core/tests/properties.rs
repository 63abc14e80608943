use proptest::prelude::*;

use uft::config::RunConfig;
use uft::eval::results::{parse_records, write_records, Record};
use uft::eval::{eao, Segment};
use uft::flow::correspondence_kernel;
use uft::scoring::{cosine_penalty, size_penalty};
use uft::{
    polygon_overlap, propagate_mask, AABox, FlowField, KernelConfig, Point, ProbMask, RotBox,
    ScalarGrid,
};

fn grid(w: usize, h: usize, seed: &[f64]) -> ScalarGrid {
    ScalarGrid::from_fn(w, h, |r, c| seed[(r * w + c) % seed.len()])
}

fn flow_strategy() -> impl Strategy<Value = FlowField> {
    (
        4usize..12,
        4usize..12,
        prop::collection::vec(-6.0f64..6.0, 1..20),
        prop::collection::vec(-6.0f64..6.0, 1..20),
        prop::collection::vec(0.2f64..3.0, 1..20),
        prop::collection::vec(0.2f64..3.0, 1..20),
    )
        .prop_map(|(w, h, mu, mv, bu, bv)| {
            FlowField::new(
                grid(w, h, &mu),
                grid(w, h, &mv),
                grid(w, h, &bu),
                grid(w, h, &bv),
            )
            .unwrap()
        })
}

fn rotbox() -> impl Strategy<Value = RotBox> {
    (
        0.0f64..60.0,
        0.0f64..60.0,
        1.0f64..30.0,
        1.0f64..30.0,
        -3.2f64..3.2,
    )
        .prop_map(|(x, y, w, h, a)| RotBox::from_center(x, y, w, h, a).unwrap())
}

fn aabox() -> impl Strategy<Value = AABox> {
    (0.0f64..60.0, 0.0f64..60.0, 1.0f64..30.0, 1.0f64..30.0)
        .prop_map(|(x, y, w, h)| AABox::new(x, y, w, h).unwrap())
}

fn segment() -> impl Strategy<Value = Segment> {
    (prop::collection::vec(0.0f64..=1.0, 0..40), any::<bool>())
        .prop_map(|(overlaps, failed)| Segment { overlaps, failed })
}

fn brute_eao(segments: &[Segment], low: usize, high: usize) -> Option<f64> {
    let mut phis = Vec::new();
    for l in low..=high {
        let mut per_segment = Vec::new();
        for s in segments {
            if !s.failed && s.overlaps.len() < l {
                continue;
            }
            let padded: Vec<f64> = (0..l)
                .map(|i| s.overlaps.get(i).copied().unwrap_or(0.0))
                .collect();
            per_segment.push(padded.iter().sum::<f64>() / l as f64);
        }
        if !per_segment.is_empty() {
            phis.push(per_segment.iter().sum::<f64>() / per_segment.len() as f64);
        }
    }
    (!phis.is_empty()).then(|| phis.iter().sum::<f64>() / phis.len() as f64)
}

proptest! {
    #[test]
    fn flowmask_stays_within_previous_range(
        flow in flow_strategy(),
        vals in prop::collection::vec(0.0f64..=1.0, 1..30),
    ) {
        let (w, h) = flow.dims();
        let prev = ProbMask::new(grid(w, h, &vals)).unwrap();
        let out = propagate_mask(&prev, &flow, &KernelConfig::default()).unwrap();
        let (lo, hi) = (prev.grid().min(), prev.grid().max());
        for &v in out.grid().values() {
            prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9, "{v} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn renormalised_kernels_sum_to_one(flow in flow_strategy(), r in 0usize..4, c in 0usize..4) {
        let k = correspondence_kernel(r, c, &flow, &KernelConfig::default()).unwrap();
        prop_assert!((k.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn clipped_kernels_never_exceed_one(flow in flow_strategy(), r in 0usize..4, c in 0usize..4) {
        let cfg = KernelConfig { renormalize_at_border: false, ..KernelConfig::default() };
        if let Ok(k) = correspondence_kernel(r, c, &flow, &cfg) {
            prop_assert!(k.total() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn size_penalty_symmetric_and_bounded(a in aabox(), b in aabox(), k_p in 0.0f64..1.0) {
        let (ab, ba) = (size_penalty(&a, &b, k_p), size_penalty(&b, &a, k_p));
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ab > 0.0 && ab <= 1.0 + 1e-12);
        prop_assert!((size_penalty(&a, &a, k_p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_window_decreases_with_distance(
        prev in aabox(),
        dx in 0.0f64..80.0,
        extra in 0.0f64..20.0,
        dy in -10.0f64..10.0,
        scale in 0.5f64..4.0,
    ) {
        let at = |d: f64| cosine_penalty(Point::new(prev.cx + d, prev.cy + dy), &prev, scale);
        let (near, far) = (at(dx), at(dx + extra));
        prop_assert!(far <= near + 1e-12);
        prop_assert!((0.0..=1.0).contains(&near));
    }

    #[test]
    fn polygon_iou_symmetric_and_bounded(a in rotbox(), b in rotbox()) {
        let ab = polygon_overlap(&a, &b).unwrap();
        let ba = polygon_overlap(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ab));
        prop_assert!((polygon_overlap(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn eao_matches_brute_force(
        segs in prop::collection::vec(segment(), 1..8),
        low in 1usize..20,
        span in 0usize..30,
    ) {
        let high = low + span;
        match (eao(&segs, low, high), brute_eao(&segs, low, high)) {
            (Ok(fast), Some(slow)) => prop_assert!((fast - slow).abs() < 1e-9),
            (Err(_), None) => {}
            (fast, slow) => prop_assert!(false, "{fast:?} vs {slow:?}"),
        }
    }

    #[test]
    fn lowering_an_overlap_never_raises_eao(
        segs in prop::collection::vec(segment(), 1..8),
        pick in any::<prop::sample::Index>(),
        factor in 0.0f64..1.0,
    ) {
        let Ok(before) = eao(&segs, 1, 30) else { return Ok(()) };
        let mut lowered = segs.clone();
        let lens: Vec<usize> = lowered.iter().map(|s| s.overlaps.len()).collect();
        let total: usize = lens.iter().sum();
        if total == 0 {
            return Ok(());
        }
        let mut i = pick.index(total);
        for s in &mut lowered {
            if i < s.overlaps.len() {
                s.overlaps[i] *= factor;
                break;
            }
            i -= s.overlaps.len();
        }
        prop_assert!(eao(&lowered, 1, 30).unwrap() <= before + 1e-12);
    }

    #[test]
    fn failing_earlier_never_raises_eao(
        segs in prop::collection::vec(segment(), 1..8),
        pick in any::<prop::sample::Index>(),
        cut in any::<prop::sample::Index>(),
    ) {
        let Ok(before) = eao(&segs, 1, 30) else { return Ok(()) };
        let failed: Vec<usize> = (0..segs.len()).filter(|&i| segs[i].failed).collect();
        if failed.is_empty() {
            return Ok(());
        }
        let mut earlier = segs.clone();
        let s = &mut earlier[failed[pick.index(failed.len())]];
        s.overlaps.truncate(cut.index(s.overlaps.len() + 1));
        prop_assert!(eao(&earlier, 1, 30).unwrap() <= before + 1e-12);
    }

    #[test]
    fn results_survive_a_write_parse_cycle(
        boxes in prop::collection::vec(prop::option::of(rotbox()), 1..20),
        vot in any::<bool>(),
    ) {
        let mut records = vec![Record::Init];
        records.extend(boxes.iter().map(|b| match b {
            Some(b) => Record::Ok(*b),
            None => Record::Fail,
        }));
        let parsed = parse_records(&write_records(&records, vot)).unwrap();
        prop_assert_eq!(parsed.len(), records.len());
        for (a, b) in records.iter().zip(&parsed) {
            match (a, b) {
                (Record::Ok(x), Record::Ok(y)) => {
                    for (p, q) in x.flat().iter().zip(y.flat()) {
                        prop_assert!((p - q).abs() <= 5e-7);
                    }
                }
                (Record::Init, Record::Init) | (Record::Fail, Record::Fail) => {}
                _ => prop_assert!(false, "{a:?} became {b:?}"),
            }
        }
    }

    #[test]
    fn config_survives_a_text_cycle(
        k_c in 0.0f64..=1.0,
        k_p in 0.0f64..=1.0,
        k_f in 0.0f64..=1.0,
        variant in prop::sample::select(vec!["full", "no_flow", "no_uncertainty", "segmask_alb", "segmask_mbr", "flow_reject", "baseline"]),
        seed in any::<u64>(),
        trials in 1usize..100,
        renorm in any::<bool>(),
    ) {
        let mut cfg = RunConfig::default();
        for (k, v) in [
            ("k_c", k_c.to_string()),
            ("k_p", k_p.to_string()),
            ("k_f", k_f.to_string()),
            ("variant", variant.to_string()),
            ("seed", seed.to_string()),
            ("trials", trials.to_string()),
            ("renormalize_at_border", renorm.to_string()),
        ] {
            cfg.set(k, &v).unwrap();
        }
        cfg.validate().unwrap();
        prop_assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
