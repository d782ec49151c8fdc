//! Mission round trips: the same plan as QGC WPL 110, GPX and GeoJSON.
//!
//! Run with: cargo run --example export_mission

use rivercover::mission_io::{
    decimate_points, export_plan, import_plan, plan_waypoints, MissionFormat,
};
use rivercover::planner::m_cover;
use rivercover::river_map::GeoRef;
use rivercover::synth::{sine_river, SineRiver, WidthFn};

fn main() -> rivercover::Result<()> {
    let out_dir = std::env::temp_dir().join("rivercover-examples");
    std::fs::create_dir_all(&out_dir)?;

    let river = sine_river(SineRiver {
        half_waves: 2,
        wavelength: 900.0,
        amplitude: 110.0,
        width: WidthFn::Constant(90.0),
        resolution: 3.0,
    })?;
    let plan = m_cover(&river.map, river.start, 45.0)?;
    let geo = GeoRef::new(33.79, -80.76);
    let budget = 200; // tight autopilot
    let raw = plan_waypoints(&plan);
    let decimated = decimate_points(&raw, budget);
    println!(
        "plan has {} raw vertices, {} after decimation to the {budget}-waypoint budget",
        raw.len(),
        decimated.len()
    );

    for format in [
        MissionFormat::QgcWpl110,
        MissionFormat::Gpx,
        MissionFormat::GeoJson,
    ] {
        let geo_arg = match format {
            MissionFormat::GeoJson => None, // metric, structure-preserving
            _ => Some(&geo),
        };
        let file = export_plan(&plan, format, geo_arg, budget)?;
        let path = out_dir.join(format!("mission.{}", format.extension()));
        std::fs::write(&path, &file.body)?;

        let imported = import_plan(&file, geo_arg)?;
        let back = plan_waypoints(&imported);
        let worst = match format {
            MissionFormat::GeoJson => plan_waypoints(&plan)
                .iter()
                .zip(&back)
                .map(|(a, b)| a.distance(*b))
                .fold(0.0, f64::max),
            _ => decimated
                .iter()
                .zip(&back)
                .map(|(a, b)| a.distance(*b))
                .fold(0.0, f64::max),
        };
        println!(
            "{:>8}: {:6} bytes -> round-trip error {:.2e} m ({} elements back)",
            format.extension(),
            file.body.len(),
            worst,
            imported.elements.len()
        );
    }
    println!("GeoJSON preserves pass directions; WPL and GPX carry geometry only");
    println!("files under {}", out_dir.display());
    Ok(())
}
