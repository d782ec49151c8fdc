//! Synthesize a meander-conditioned current field, calibrate it against the
//! observed upstream/downstream asymmetry, and race the planners on it.
//!
//! Run with: cargo run --example compare_current

use rivercover::current_sim::{
    calibrated_field, compare_plans, traverse_time, BoatModel, OUTER_LANE_UP_DOWN_RATIO,
};
use rivercover::planner::{l_cover, m_cover, t_cover};
use rivercover::river_map::RiverModel;
use rivercover::synth::{sine_river, SineRiver, WidthFn};

fn main() -> rivercover::Result<()> {
    let out_dir = std::env::temp_dir().join("rivercover-examples");
    std::fs::create_dir_all(&out_dir)?;

    // three meanders with a width step: the serpentine baseline ends up with
    // odd pass counts and pays a deadhead transit home
    let river = sine_river(
        SineRiver {
            half_waves: 3,
            wavelength: 800.0,
            amplitude: 100.0,
            width: WidthFn::Step {
                first: 74.0,
                second: 102.0,
                at_frac: 0.5,
                ramp_frac: 0.002,
            },
            resolution: 3.0,
        }
        .with_arc_length(2400.0),
    )?;
    let spacing = 22.0;
    let boat = BoatModel::new(4.0);
    let model = RiverModel::analyze(river.map.clone(), river.start)?;

    // outermost of four lanes sits at cross-fraction 0.875; pin its
    // upstream:downstream time ratio to the observed 1.47
    let field = calibrated_field(&model, boat.speed_through_water, 0.875, OUTER_LANE_UP_DOWN_RATIO, 0.2)?;
    println!(
        "calibrated field: v_min {:.2} m/s, v_max {:.2} m/s, boat {:.1} m/s",
        field.v_min, field.v_max, boat.speed_through_water
    );

    let m = m_cover(&river.map, river.start, spacing)?;
    let l = l_cover(&river.map, river.start, spacing)?;
    let t = t_cover(&river.map, river.start, spacing)?;
    let cmp = compare_plans(&[&m, &l, &t], &field, &boat)?;
    print!("{}", cmp.to_csv());
    println!(
        "m-cover saves {:.1}% of l-cover's time",
        cmp.savings_pct("m-cover", "l-cover").unwrap()
    );

    let report = traverse_time(&m, &field, &boat)?;
    println!(
        "m-cover split: upstream passes {:.0} s, downstream passes {:.0} s",
        report.time_by_direction(rivercover::planner::Direction::Upstream),
        report.time_by_direction(rivercover::planner::Direction::Downstream),
    );

    let csv = out_dir.join("comparison.csv");
    std::fs::write(&csv, cmp.to_csv())?;
    let field_csv = out_dir.join("field.csv");
    std::fs::write(&field_csv, field.to_csv())?;
    println!("wrote {} and {}", csv.display(), field_csv.display());
    Ok(())
}
