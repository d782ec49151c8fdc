//! The three baseline patterns: longitudinal serpentine, transversal
//! boustrophedon, and the single-pass zig-zag.
//!
//! Run with: cargo run --example plan_baselines

use rivercover::planner::{coverage_fraction, l_cover, t_cover, z_cover};
use rivercover::synth::{sine_river, SineRiver, WidthFn};

fn main() -> rivercover::Result<()> {
    let river = sine_river(
        SineRiver {
            half_waves: 3,
            wavelength: 800.0,
            amplitude: 95.0,
            width: WidthFn::Constant(90.0),
            resolution: 3.0,
        }
        .with_arc_length(2200.0),
    )?;
    let spacing = 30.0;
    let radius = spacing / 2.0 + river.map.resolution();

    for plan in [
        l_cover(&river.map, river.start, spacing)?,
        t_cover(&river.map, river.start, spacing)?,
        z_cover(&river.map, river.start, spacing)?,
    ] {
        let covered = coverage_fraction(&river.map, &plan, radius);
        let closes = plan
            .end_point()
            .map(|e| e.distance(plan.start) <= 2.0 * spacing)
            .unwrap_or(false);
        println!(
            "{:>8}: {:6.2} km, {:3} passes, coverage {:5.1}%, returns to start: {}",
            plan.algorithm.name(),
            plan.total_length() / 1000.0,
            plan.passes().count(),
            covered * 100.0,
            closes
        );
    }
    println!("z-cover trades completeness for a single fast pass downriver");
    Ok(())
}
