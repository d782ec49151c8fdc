//! Bend-classification and segmentation checks against analytic fixtures
//! and the independent curvature-side oracle.

use rivercover::meander::{
    classify_bend, curvature_side_oracle, get_meander_segments, segments_alternate, BankSide,
    BendLabel, SegmentKind, TangentStep,
};
use rivercover::river_map::{
    get_directional_contours, get_downriver_direction, width_profile, RiverModel,
};
use rivercover::synth::{annulus_river, rectangle_river, s_curve_river, sine_river, SineRiver, WidthFn};
use rivercover::Point;

fn three_meander_sine() -> rivercover::synth::SynthRiver {
    sine_river(
        SineRiver {
            half_waves: 3,
            wavelength: 900.0,
            amplitude: 110.0,
            width: WidthFn::Constant(90.0),
            resolution: 3.0,
        }
        .with_arc_length(2760.0),
    )
    .unwrap()
}

#[test]
fn straight_river_classifies_straight() {
    let r = rectangle_river(800.0, 90.0, 3.0).unwrap();
    let c = get_directional_contours(&r.map, r.start).unwrap();
    let step = TangentStep::for_river(3.0, 90.0);
    let mut straight = 0;
    let mut total = 0;
    let mut arc = step.get();
    while arc <= c.left.length() - step.get() {
        total += 1;
        if classify_bend(&r.map, &c.left, arc, step).unwrap() == BendLabel::Straight {
            straight += 1;
        }
        arc += step.get();
    }
    assert!(total > 5);
    assert_eq!(straight, total, "straight river must classify straight everywhere");
}

#[test]
fn annulus_banks_classify_inner_and_outer() {
    let r = annulus_river(260.0, 350.0, 3.0).unwrap();
    let c = get_directional_contours(&r.map, r.start).unwrap();
    let step = TangentStep::for_river(3.0, 90.0);
    // identify which bank is the small-radius one by total length
    let (small, large) = if c.left.length() < c.right.length() {
        (&c.left, &c.right)
    } else {
        (&c.right, &c.left)
    };
    let count = |bank: &rivercover::Polyline, want: BendLabel| -> (usize, usize) {
        let mut hits = 0;
        let mut total = 0;
        let mut arc = step.get() * 1.5;
        while arc <= bank.length() - step.get() * 1.5 {
            let got = classify_bend(&r.map, bank, arc, step).unwrap();
            total += 1;
            if got == want {
                hits += 1;
            }
            arc += step.get();
        }
        (hits, total)
    };
    let (inner_hits, inner_total) = count(small, BendLabel::Inner);
    let (outer_hits, outer_total) = count(large, BendLabel::Outer);
    assert!(
        inner_hits as f64 >= 0.95 * inner_total as f64,
        "small-radius bank: {inner_hits}/{inner_total} inner"
    );
    assert!(
        outer_hits as f64 >= 0.95 * outer_total as f64,
        "large-radius bank: {outer_hits}/{outer_total} outer"
    );
}

#[test]
fn sine_bank_labels_alternate_per_half_wave() {
    let r = three_meander_sine();
    let c = get_directional_contours(&r.map, r.start).unwrap();
    let step = TangentStep::for_river(3.0, 90.0);
    // majority label of the left bank per half-wave must alternate
    let bank = &c.left;
    let third = bank.length() / 3.0;
    let mut majorities = Vec::new();
    for half_wave in 0..3 {
        let lo = half_wave as f64 * third;
        let hi = lo + third;
        let (mut inner, mut outer) = (0, 0);
        let mut arc = (lo + step.get()).max(step.get() * 1.5);
        while arc <= hi.min(bank.length() - step.get() * 1.5) {
            match classify_bend(&r.map, bank, arc, step).unwrap() {
                BendLabel::Inner => inner += 1,
                BendLabel::Outer => outer += 1,
                BendLabel::Straight => {}
            }
            arc += step.get() / 2.0;
        }
        assert!(inner + outer > 3, "half-wave {half_wave}: too few bend labels");
        majorities.push(if inner > outer { BendLabel::Inner } else { BendLabel::Outer });
    }
    assert_ne!(majorities[0], majorities[1], "{majorities:?}");
    assert_ne!(majorities[1], majorities[2], "{majorities:?}");
    assert_eq!(majorities[0], majorities[2], "{majorities:?}");
}

/// Circle, sine and S-curve fixtures with bend radii well above the raster
/// noise floor at 2 m cells.
pub fn oracle_fixtures() -> Vec<rivercover::synth::SynthRiver> {
    vec![
        annulus_river(260.0, 340.0, 2.0).unwrap(),
        sine_river(SineRiver {
            half_waves: 3,
            wavelength: 600.0,
            amplitude: 90.0,
            width: WidthFn::Constant(80.0),
            resolution: 2.0,
        })
        .unwrap(),
        s_curve_river(800.0, 120.0, 350.0, 80.0, 2.0).unwrap(),
    ]
}

#[test]
fn oracle_agreement_on_sine_annulus_s_curve() {
    let mut agree = 0usize;
    let mut total = 0usize;
    for r in &oracle_fixtures() {
        let c = get_directional_contours(&r.map, r.start).unwrap();
        let step = TangentStep::for_river(r.map.resolution(), 80.0);
        for bank in [&c.left, &c.right] {
            let mut arc = step.get() * 1.5;
            while arc <= bank.length() - step.get() * 1.5 {
                let got = classify_bend(&r.map, bank, arc, step).unwrap();
                let want = curvature_side_oracle(&r.map, bank, arc, step);
                if let Some(want) = want {
                    total += 1;
                    if got == want {
                        agree += 1;
                    }
                }
                arc += step.get();
            }
        }
    }
    assert!(total > 50, "too few comparable samples: {total}");
    let pct = agree as f64 / total as f64;
    assert!(pct >= 0.99, "oracle agreement {:.2}% ({agree}/{total})", pct * 100.0);
}

#[test]
fn straight_river_is_one_segment() {
    let r = rectangle_river(800.0, 90.0, 3.0).unwrap();
    let model = RiverModel::analyze(r.map.clone(), r.start).unwrap();
    assert_eq!(model.segments.len(), 1);
    assert_eq!(model.segments[0].kind, SegmentKind::Straight);
    let span = model.segments[0].end_arc - model.segments[0].start_arc;
    assert!((span - model.contours.length()).abs() < 1e-9);
    // no upstream bend anywhere: tie rule assigns Left
    assert_eq!(model.segments[0].inner_bank, BankSide::Left);
}

#[test]
fn one_sine_period_gives_two_opposite_segments() {
    let r = sine_river(SineRiver {
        half_waves: 2,
        wavelength: 1000.0,
        amplitude: 120.0,
        width: WidthFn::Constant(90.0),
        resolution: 3.0,
    })
    .unwrap();
    let model = RiverModel::analyze(r.map.clone(), r.start).unwrap();
    let bends: Vec<_> = model
        .segments
        .iter()
        .filter(|s| s.kind == SegmentKind::Bend)
        .collect();
    assert_eq!(bends.len(), 2, "segments: {:?}", model.segments);
    assert_ne!(bends[0].inner_bank, bends[1].inner_bank);
    // boundary near the inflection (mid-arc) within one tangent step
    let mid = model.contours.length() / 2.0;
    assert!(
        (bends[0].end_arc - mid).abs() <= model.step.get() + 1e-9,
        "boundary {} vs inflection {mid}",
        bends[0].end_arc
    );
}

#[test]
fn s_curve_with_tail_gives_two_bends_and_a_straight() {
    let r = s_curve_river(1100.0, 140.0, 450.0, 90.0, 3.0).unwrap();
    let model = RiverModel::analyze(r.map.clone(), r.start).unwrap();
    let kinds: Vec<SegmentKind> = model.segments.iter().map(|s| s.kind).collect();
    let bends = kinds.iter().filter(|k| **k == SegmentKind::Bend).count();
    let straights = kinds.iter().filter(|k| **k == SegmentKind::Straight).count();
    assert_eq!(bends, 2, "segments: {:?}", model.segments);
    assert!(straights >= 1, "expected a straight tail segment: {kinds:?}");
    assert!(segments_alternate(&model.segments));
    // the straight tail inherits its inner bank from the nearest upstream bend
    let tail = model.segments.last().unwrap();
    assert_eq!(tail.kind, SegmentKind::Straight);
}

#[test]
fn segmentation_is_a_partition() {
    let r = three_meander_sine();
    let model = RiverModel::analyze(r.map.clone(), r.start).unwrap();
    let total = model.contours.length();
    assert!(model.segments.first().unwrap().start_arc.abs() < 1e-9);
    assert!((model.segments.last().unwrap().end_arc - total).abs() < 1e-9);
    for w in model.segments.windows(2) {
        assert!(
            (w[0].end_arc - w[1].start_arc).abs() < 1e-9,
            "gap between segments"
        );
    }
}

#[test]
fn mirrored_map_swaps_inner_banks() {
    let r = three_meander_sine();
    let model = RiverModel::analyze(r.map.clone(), r.start).unwrap();
    let mirrored = r.map.mirrored_vertical();
    let ext_y = mirrored.grid_height() as f64 * mirrored.resolution();
    let start_m = Point::new(r.start.x, ext_y - r.start.y);
    let model_m = RiverModel::analyze(mirrored, start_m).unwrap();
    let bends: Vec<BankSide> = model
        .segments
        .iter()
        .filter(|s| s.kind == SegmentKind::Bend)
        .map(|s| s.inner_bank)
        .collect();
    let bends_m: Vec<BankSide> = model_m
        .segments
        .iter()
        .filter(|s| s.kind == SegmentKind::Bend)
        .map(|s| s.inner_bank)
        .collect();
    assert_eq!(bends.len(), bends_m.len());
    for (a, b) in bends.iter().zip(&bends_m) {
        assert_eq!(*a, b.opposite(), "mirroring must swap inner banks");
    }
}

#[test]
fn halving_step_moves_boundaries_less_than_step() {
    // a crisp fixture: bend radius ~100 m keeps the half-step signal strong
    let r = sine_river(SineRiver {
        half_waves: 3,
        wavelength: 600.0,
        amplitude: 90.0,
        width: WidthFn::Constant(80.0),
        resolution: 2.0,
    })
    .unwrap();
    let model = RiverModel::analyze(r.map.clone(), r.start).unwrap();
    let half = model.step.halved(r.map.resolution());
    let segs2 = get_meander_segments(
        &r.map,
        &model.contours,
        &model.flow,
        half,
    )
    .unwrap();
    let b1: Vec<f64> = model.segments.iter().map(|s| s.end_arc).collect();
    let bends2: Vec<f64> = segs2.iter().map(|s| s.end_arc).collect();
    // every original boundary should have a counterpart within one step
    for b in b1.iter().take(b1.len() - 1) {
        let nearest = bends2
            .iter()
            .map(|x| (x - b).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(
            nearest < model.step.get(),
            "boundary {b} moved {nearest} (> {})",
            model.step.get()
        );
    }
}

#[test]
fn width_profile_on_taper() {
    let r = sine_river(SineRiver {
        half_waves: 2,
        wavelength: 500.0,
        amplitude: 30.0,
        width: WidthFn::Taper {
            from: 120.0,
            to: 60.0,
        },
        resolution: 3.0,
    })
    .unwrap();
    let c = get_directional_contours(&r.map, r.start).unwrap();
    let prof = width_profile(&c);
    let mid = prof.width_at(c.length() / 2.0);
    assert!((mid - 90.0).abs() <= 6.0, "taper mid width {mid}");
    // widths strictly positive, arcs strictly increasing
    let mut prev = f64::NEG_INFINITY;
    for (a, w) in &prof.samples {
        assert!(*w > 0.0);
        assert!(*a > prev);
        prev = *a;
    }
}

#[test]
fn sine_flow_heading_matches_analytic_tangent() {
    // centerline y = 50 sin(2 pi x / 500): analytic tangent at x=0 is
    // (1, 0.628)/|.| = (0.847, 0.532)
    let r = sine_river(SineRiver {
        half_waves: 4,
        wavelength: 500.0,
        amplitude: 50.0,
        width: WidthFn::Constant(80.0),
        resolution: 2.0,
    })
    .unwrap();
    let c = get_directional_contours(&r.map, r.start).unwrap();
    let f = get_downriver_direction(&c, r.start).unwrap();
    let analytic = Point::new(1.0, 0.628).normalized().unwrap();
    let err = f.heading.angle_between(analytic).to_degrees();
    assert!(err < 5.0, "heading {:?} vs analytic {:?}: {err} deg", f.heading, analytic);
}

#[test]
fn annulus_bank_lengths_match_arc_formulas() {
    // quarter bend of radii 100 and 180: bank lengths pi/2 * r within 3%
    let r = annulus_river(100.0, 180.0, 2.0).unwrap();
    let c = get_directional_contours(&r.map, r.start).unwrap();
    let (small, large) = if c.left.length() < c.right.length() {
        (c.left.length(), c.right.length())
    } else {
        (c.right.length(), c.left.length())
    };
    let quarter = std::f64::consts::FRAC_PI_2;
    assert!(
        (small - quarter * 100.0).abs() / (quarter * 100.0) < 0.03,
        "inner bank {small} vs {}",
        quarter * 100.0
    );
    assert!(
        (large - quarter * 180.0).abs() / (quarter * 180.0) < 0.03,
        "outer bank {large} vs {}",
        quarter * 180.0
    );
    // width between matched banks: 80 m give or take two cells
    let prof = width_profile(&c);
    assert!((prof.mean_width() - 80.0).abs() < 4.0, "width {}", prof.mean_width());
}

#[test]
fn deployment_scale_fixture_width_is_ninety() {
    let r = three_meander_sine();
    let c = get_directional_contours(&r.map, r.start).unwrap();
    let prof = width_profile(&c);
    let mean = prof.mean_width();
    assert!((mean - 90.0).abs() <= 3.0, "mean width {mean}");
    // width continuity between consecutive samples
    for w in prof.samples.windows(2) {
        assert!(
            (w[1].1 - w[0].1).abs() < 4.0 * 3.0 + 1.0,
            "width jump {} -> {}",
            w[0].1,
            w[1].1
        );
    }
}

#[test]
fn bank_ordering_keeps_water_on_the_correct_side() {
    // walking the left bank in contour order keeps water on the right;
    // walking the right bank keeps water on the left
    let r = three_meander_sine();
    let c = get_directional_contours(&r.map, r.start).unwrap();
    let probe_dist = 3.0 * r.map.resolution();
    for (bank, water_side_sign) in [(&c.left, -1.0), (&c.right, 1.0)] {
        let mut hits = 0;
        let mut total = 0;
        let mut arc = 30.0;
        while arc < bank.length() - 30.0 {
            let p = bank.point_at(arc);
            let t = bank.segment_dir_at(arc);
            let probe = p + t.perp() * (water_side_sign * probe_dist);
            total += 1;
            if r.map.is_free_at(probe) {
                hits += 1;
            }
            arc += 60.0;
        }
        assert!(
            hits as f64 >= 0.9 * total as f64,
            "water on the wrong side: {hits}/{total}"
        );
    }
}
