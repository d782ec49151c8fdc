//! Load a river map and extract its geometric substrate: bank contours,
//! centerline, flow direction and width profile.
//!
//! Run with: cargo run --example load_and_extract

use rivercover::river_map::{
    contours_to_geojson, get_directional_contours, get_downriver_direction, load_map, save_pgm,
    width_profile,
};
use rivercover::synth::{sine_river, SineRiver, WidthFn};

fn main() -> rivercover::Result<()> {
    let out_dir = std::env::temp_dir().join("rivercover-examples");
    std::fs::create_dir_all(&out_dir)?;

    // build a 2 km meandering river and write it out as a PGM raster
    let river = sine_river(
        SineRiver {
            half_waves: 3,
            wavelength: 700.0,
            amplitude: 90.0,
            width: WidthFn::Taper { from: 110.0, to: 70.0 },
            resolution: 3.0,
        }
        .with_arc_length(2000.0),
    )?;
    let pgm = out_dir.join("river.pgm");
    save_pgm(&river.map, &pgm)?;

    // reload it exactly the way the CLI would
    let map = load_map(&pgm, None)?;
    println!(
        "loaded {}x{} cells at {} m/cell, {} free cells, {} openings",
        map.grid_width(),
        map.grid_height(),
        map.resolution(),
        map.free_count(),
        map.openings().len()
    );

    let contours = get_directional_contours(&map, river.start)?;
    let flow = get_downriver_direction(&contours, river.start)?;
    let profile = width_profile(&contours);
    println!(
        "banks: left {:.0} m, right {:.0} m, centerline {:.0} m",
        contours.left.length(),
        contours.right.length(),
        contours.centerline.length()
    );
    println!(
        "coverage heading ({:+.2}, {:+.2}), start at the {:?} end",
        flow.heading.x, flow.heading.y, flow.orientation
    );
    println!(
        "width: mean {:.1} m, at mid-river {:.1} m",
        profile.mean_width(),
        profile.width_at(contours.length() / 2.0)
    );

    let banks = out_dir.join("banks.geojson");
    std::fs::write(&banks, contours_to_geojson(&contours, None))?;
    println!("wrote {} and {}", pgm.display(), banks.display());
    Ok(())
}
