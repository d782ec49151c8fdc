//! Plan a meander-aware coverage tour and export it for an autopilot.
//!
//! Run with: cargo run --example plan_m_cover

use rivercover::mission_io::{export_plan, MissionFormat, DEFAULT_WAYPOINT_BUDGET};
use rivercover::planner::{coverage_fraction, m_cover, Direction};
use rivercover::river_map::GeoRef;
use rivercover::synth::{sine_river, SineRiver, WidthFn};

fn main() -> rivercover::Result<()> {
    let out_dir = std::env::temp_dir().join("rivercover-examples");
    std::fs::create_dir_all(&out_dir)?;

    // the short deployment scale: 2.76 km of river, 90 m wide, 45 m footprint
    let river = sine_river(
        SineRiver {
            half_waves: 3,
            wavelength: 900.0,
            amplitude: 110.0,
            width: WidthFn::Constant(90.0),
            resolution: 3.0,
        }
        .with_arc_length(2760.0),
    )?;
    let spacing = 45.0;
    let plan = m_cover(&river.map, river.start, spacing)?;

    let up: f64 = plan
        .passes()
        .filter(|p| p.direction == Direction::Upstream)
        .map(|p| p.polyline.length())
        .sum();
    let down: f64 = plan
        .passes()
        .filter(|p| p.direction == Direction::Downstream)
        .map(|p| p.polyline.length())
        .sum();
    let completeness =
        coverage_fraction(&river.map, &plan, spacing / 2.0 + river.map.resolution());
    println!(
        "m-cover: {:.2} km total, {:.2} km upstream lanes, {:.2} km downstream lanes",
        plan.total_length() / 1000.0,
        up / 1000.0,
        down / 1000.0
    );
    println!(
        "lane counts per segment: {:?}, completeness {:.1}%",
        plan.lane_counts(),
        completeness * 100.0
    );
    println!(
        "tour closes {:.1} m from the start",
        plan.end_point().unwrap().distance(plan.start)
    );

    // autopilot waypoints need a geographic anchor for the local frame
    let geo = GeoRef::new(33.79, -80.76);
    let wpl = export_plan(&plan, MissionFormat::QgcWpl110, Some(&geo), DEFAULT_WAYPOINT_BUDGET)?;
    let path = out_dir.join("m_cover.wpl");
    std::fs::write(&path, &wpl.body)?;
    println!(
        "wrote {} ({} waypoints)",
        path.display(),
        wpl.body.lines().count() - 1
    );
    Ok(())
}
