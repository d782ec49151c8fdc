//! Width-based meander coverage: cluster the river into same-width reaches,
//! then run the meander tour with the right lane count in each reach.
//!
//! Run with: cargo run --example plan_width_m_cover

use rivercover::planner::{get_same_width_clusters, m_cover, width_based_m_cover};
use rivercover::river_map::RiverModel;
use rivercover::synth::{sine_river, SineRiver, WidthFn};

fn main() -> rivercover::Result<()> {
    // a river that narrows from 120 m to 60 m over three bends
    let river = sine_river(SineRiver {
        half_waves: 3,
        wavelength: 700.0,
        amplitude: 85.0,
        width: WidthFn::Taper { from: 120.0, to: 60.0 },
        resolution: 3.0,
    })?;
    let spacing = 30.0;

    let model = RiverModel::analyze(river.map.clone(), river.start)?;
    let clusters = get_same_width_clusters(&model.contours, &model.flow, spacing);
    println!("same-width clusters at {spacing} m spacing:");
    for c in &clusters {
        println!(
            "  [{:6.0} .. {:6.0}] m  nominal width {:5.1} m  -> {} passes",
            c.start_arc, c.end_arc, c.nominal_width, c.pass_count
        );
    }

    let wm = width_based_m_cover(&river.map, river.start, spacing)?;
    let m = m_cover(&river.map, river.start, spacing)?;
    println!(
        "width-m-cover: {:.2} km, lane counts {:?}",
        wm.total_length() / 1000.0,
        wm.lane_counts()
    );
    println!(
        "plain m-cover: {:.2} km, lane counts {:?}",
        m.total_length() / 1000.0,
        m.lane_counts()
    );
    println!("the width-based variant adapts its pass count per reach;");
    println!("plain m-cover picks one count per meander from its mean width");
    Ok(())
}
