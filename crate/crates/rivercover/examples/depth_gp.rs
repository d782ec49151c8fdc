//! Fit a Gaussian-process depth surface from sparse sonar samples and grade
//! it by cross-validation.
//!
//! Run with: cargo run --example depth_gp

use rivercover::bathymetry::{
    cross_validated_rmse, fit_depth_gp, rmse, DepthLayer, DepthSample, FitOptions,
};
use rivercover::synth::rectangle_river;
use rivercover::Point;

fn main() -> rivercover::Result<()> {
    let out_dir = std::env::temp_dir().join("rivercover-examples");
    std::fs::create_dir_all(&out_dir)?;

    let river = rectangle_river(600.0, 90.0, 3.0)?;

    // synthetic bed: a gentle thalweg that deepens downriver
    let truth = |p: Point| 3.0 + 0.004 * p.x + 1.5 * ((p.y - 49.0) / 30.0).cos();
    let mut samples = Vec::new();
    for i in 0..120 {
        let x = 8.0 + 4.9 * i as f64;
        let y = 18.0 + 60.0 * ((i as f64 * 0.37).sin() * 0.5 + 0.5);
        let p = Point::new(x, y);
        samples.push(DepthSample { position: p, depth: truth(p) });
    }

    let (depth_map, gp) = fit_depth_gp(
        &river.map,
        &samples,
        FitOptions::Auto { restarts: 5, seed: 42 },
    )?;
    let hp = gp.hyperparams();
    println!(
        "fitted hyperparameters: length scale {:.1} m, signal var {:.3}, noise var {:.5}",
        hp.length_scale, hp.signal_var, hp.noise_var
    );
    println!("training rmse: {:.3} m", rmse(&depth_map, &samples)?);

    let cv = cross_validated_rmse(
        &river.map,
        &samples,
        FitOptions::Params(hp),
        5,
        42,
    )?;
    let range = samples.iter().map(|s| s.depth).fold(f64::NEG_INFINITY, f64::max)
        - samples.iter().map(|s| s.depth).fold(f64::INFINITY, f64::min);
    println!(
        "5-fold cross-validated rmse: {:.3} m ({:.1}% of the {:.2} m depth range)",
        cv,
        cv / range * 100.0,
        range
    );

    let mean_path = out_dir.join("depth_mean.asc");
    std::fs::write(&mean_path, depth_map.to_esri_ascii(DepthLayer::Mean))?;
    let std_path = out_dir.join("depth_std.asc");
    std::fs::write(&std_path, depth_map.to_esri_ascii(DepthLayer::Std))?;
    println!("wrote {} and {}", mean_path.display(), std_path.display());
    Ok(())
}
