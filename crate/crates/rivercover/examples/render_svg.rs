//! Render the river, its bend labels and a plan as a deterministic SVG.
//!
//! Run with: cargo run --example render_svg

use rivercover::planner::m_cover;
use rivercover::render::{render_svg, RenderOptions};
use rivercover::river_map::RiverModel;
use rivercover::synth::{sine_river, SineRiver, WidthFn};

fn main() -> rivercover::Result<()> {
    let out_dir = std::env::temp_dir().join("rivercover-examples");
    std::fs::create_dir_all(&out_dir)?;

    let river = sine_river(SineRiver {
        half_waves: 3,
        wavelength: 700.0,
        amplitude: 90.0,
        width: WidthFn::Constant(85.0),
        resolution: 3.0,
    })?;
    let model = RiverModel::analyze(river.map.clone(), river.start)?;
    let plan = m_cover(&river.map, river.start, 42.0)?;

    let svg = render_svg(&model, Some(&plan), &RenderOptions::default());
    // byte-identical on every run with the same inputs
    let again = render_svg(&model, Some(&plan), &RenderOptions::default());
    assert_eq!(svg, again);

    let path = out_dir.join("m_cover.svg");
    std::fs::write(&path, &svg)?;
    println!(
        "wrote {} ({} bytes): water, inner/outer bend markers,",
        path.display(),
        svg.len()
    );
    println!("upstream lanes in blue, downstream lanes in green, connectors dashed");
    Ok(())
}
