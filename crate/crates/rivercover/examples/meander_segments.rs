//! Classify bends by the consecutive-tangent intersection test and split the
//! river into meander segments.
//!
//! Run with: cargo run --example meander_segments

use rivercover::meander::{bend_labels_csv, segments_to_geojson};
use rivercover::river_map::RiverModel;
use rivercover::synth::{s_curve_river, sine_river, SineRiver, WidthFn};

fn main() -> rivercover::Result<()> {
    let out_dir = std::env::temp_dir().join("rivercover-examples");
    std::fs::create_dir_all(&out_dir)?;

    let river = sine_river(SineRiver {
        half_waves: 3,
        wavelength: 800.0,
        amplitude: 100.0,
        width: WidthFn::Constant(90.0),
        resolution: 3.0,
    })?;
    let model = RiverModel::analyze(river.map.clone(), river.start)?;
    println!(
        "tangent step {:.1} m over a {:.0} m centerline",
        model.step.get(),
        model.contours.length()
    );
    for (i, seg) in model.segments.iter().enumerate() {
        println!(
            "segment {i}: [{:6.0} .. {:6.0}] m  {:?}  inner bank {:?}  apex ({:.0}, {:.0})",
            seg.start_arc, seg.end_arc, seg.kind, seg.inner_bank, seg.apex.x, seg.apex.y
        );
    }

    // per-sample labels as CSV, segments as GeoJSON
    let csv = out_dir.join("bend_labels.csv");
    std::fs::write(&csv, bend_labels_csv(&model.map, &model.contours, model.step))?;
    let gj = out_dir.join("segments.geojson");
    std::fs::write(&gj, segments_to_geojson(&model.segments, &model.contours))?;
    println!("wrote {} and {}", csv.display(), gj.display());

    // an S-curve with a long straight tail keeps a Straight segment
    let tail = s_curve_river(900.0, 120.0, 400.0, 85.0, 3.0)?;
    let model = RiverModel::analyze(tail.map.clone(), tail.start)?;
    let kinds: Vec<String> = model
        .segments
        .iter()
        .map(|s| format!("{:?}", s.kind))
        .collect();
    println!("s-curve with tail decomposes into: {}", kinds.join(", "));
    Ok(())
}
