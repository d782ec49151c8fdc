//! Command-line entry point: `plan`, `compare`, `render`, `depthmap`.
//!
//! Every option can also be supplied through a flat `key=value` config file
//! (`--config`); command-line flags win over config values, which win over
//! defaults. Exit codes: 0 success, 2 validation error, 3 planning
//! infeasibility.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::bathymetry::{
    cross_validated_rmse, fit_depth_gp, samples_from_csv, samples_from_gpx, DepthLayer,
    DepthSample, FitOptions, GpHyperParams,
};
use crate::current_sim::{
    calibrated_field, compare_plans, synth_current_field, BoatModel, OUTER_LANE_UP_DOWN_RATIO,
};
use crate::mission_io::{export_plan, MissionFormat, DEFAULT_WAYPOINT_BUDGET};
use crate::planner::{
    coverage_fraction, l_cover_with, m_cover_with, round_to_even_half_up, t_cover_with,
    width_based_m_cover_with, z_cover_with, Algorithm, CoveragePlan, PlanOptions,
};
use crate::render::{render_svg, RenderOptions};
use crate::river_map::{
    contours_to_geojson, load_map, width_profile, GeoRef, RiverModel, StartEnd,
};
use crate::{Error, Point, Result};

#[derive(Parser)]
#[command(name = "rivercover", about = "Meander-aware river coverage planning", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a coverage tour and export it.
    Plan(PlanArgs),
    /// Compare planner traversal times on a synthetic current field.
    Compare(CompareArgs),
    /// Render the river and a plan as SVG.
    Render(RenderArgs),
    /// Fit a depth surface from sonar samples.
    Depthmap(DepthArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Occupancy map: PGM raster or GeoJSON polygon.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Meters per cell (PGM input only).
    #[arg(long)]
    resolution: Option<f64>,
    /// Start point "X,Y" in map meters.
    #[arg(long)]
    start: Option<String>,
    /// Sensor footprint / lane spacing in meters.
    #[arg(long)]
    spacing: Option<f64>,
    /// Flat key=value config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Treat the start as the upstream end (coverage heads downstream first).
    #[arg(long)]
    start_upstream: bool,
    /// Georeference "LAT,LON[,ROT_DEG]" anchoring map meters to WGS84.
    #[arg(long)]
    geo: Option<String>,
    /// Seed for randomized restarts.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// m-cover, width-m-cover, l-cover, t-cover or z-cover.
    #[arg(long)]
    algo: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Autopilot waypoint limit for WPL/GPX export.
    #[arg(long)]
    waypoint_budget: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated algorithms to compare.
    #[arg(long)]
    algos: Option<String>,
    /// Slowest (inner-bank) current in m/s; omit to calibrate.
    #[arg(long)]
    vmin: Option<f64>,
    /// Fastest (outer-bank) current in m/s; omit to calibrate.
    #[arg(long)]
    vmax: Option<f64>,
    /// Boat speed through water in m/s.
    #[arg(long)]
    boat_speed: Option<f64>,
    /// Turning cost in seconds per radian.
    #[arg(long)]
    turn_penalty: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    algo: Option<String>,
    /// Output SVG path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DepthArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Depth samples: CSV "x,y,depth".
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Kernel length scale (meters); omit all three for auto-fit.
    #[arg(long)]
    length_scale: Option<f64>,
    #[arg(long)]
    signal_var: Option<f64>,
    #[arg(long)]
    noise_var: Option<f64>,
    /// Cross-validation folds.
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI; returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version by "erroring" with a display
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Render(a) => cmd_render(a),
        Command::Depthmap(a) => cmd_depthmap(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) | Error::Io(_) => 2,
                Error::Infeasible(_) => 3,
                Error::Internal(_) => 1,
            }
        }
    }
}

/// Flat key=value configuration, lowest-precedence parameter source.
struct Config(BTreeMap<String, String>);

impl Config {
    fn load(path: Option<&Path>) -> Result<Config> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::validation(format!("cannot read config {}: {e}", path.display()))
            })?;
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(Error::validation(format!("config line is not key=value: {line}")));
                };
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Config(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::validation(format!("config {key}: cannot parse {raw:?}"))),
        }
    }
}

fn resolve<T: FromStr>(flag: Option<T>, cfg: &Config, key: &str) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.get(key),
    }
}

fn require<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| Error::validation(format!("missing required parameter {what}")))
}

fn parse_point(text: &str) -> Result<Point> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::validation(format!("expected X,Y, got {text:?}")));
    }
    let x = parts[0]
        .parse()
        .map_err(|_| Error::validation(format!("bad X coordinate {:?}", parts[0])))?;
    let y = parts[1]
        .parse()
        .map_err(|_| Error::validation(format!("bad Y coordinate {:?}", parts[1])))?;
    Ok(Point::new(x, y))
}

fn parse_geo(text: &str) -> Result<GeoRef> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(Error::validation("geo expects LAT,LON[,ROT_DEG]"));
    }
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::validation(format!("bad geo value {s:?}")))
    };
    Ok(GeoRef {
        origin_lat: num(parts[0])?,
        origin_lon: num(parts[1])?,
        rotation_rad: if parts.len() == 3 { num(parts[2])?.to_radians() } else { 0.0 },
    })
}

struct Loaded {
    model: RiverModel,
    start: Point,
    spacing: f64,
    opts: PlanOptions,
    geo: Option<GeoRef>,
}

fn load_common(common: &CommonArgs, cfg: &Config) -> Result<Loaded> {
    let map_path = require(
        resolve(common.map.clone(), cfg, "map")?,
        "--map",
    )?;
    let resolution = resolve(common.resolution, cfg, "resolution")?;
    let start_text = require(resolve(common.start.clone(), cfg, "start")?, "--start")?;
    let spacing = require(resolve(common.spacing, cfg, "spacing")?, "--spacing")?;
    if spacing <= 0.0 || !spacing.is_finite() {
        return Err(Error::validation(format!(
            "spacing must be > 0, got {spacing}"
        )));
    }
    let start = parse_point(&start_text)?;
    let geo = match resolve(common.geo.clone(), cfg, "geo")? {
        Some(text) => Some(parse_geo(&text)?),
        None => None,
    };
    let start_upstream =
        common.start_upstream || cfg.get::<bool>("start-upstream")?.unwrap_or(false);

    let mut map = load_map(&map_path, resolution)?;
    if geo.is_some() {
        map.set_geo(geo);
    }
    let opts = PlanOptions {
        start_end: if start_upstream {
            StartEnd::Upstream
        } else {
            StartEnd::Downstream
        },
        tangent_step: None,
    };
    let model = RiverModel::analyze_with(map, start, opts.start_end, None)?;
    Ok(Loaded {
        model,
        start,
        spacing,
        opts,
        geo,
    })
}

fn plan_with(
    algorithm: Algorithm,
    model: &RiverModel,
    start: Point,
    spacing: f64,
    opts: &PlanOptions,
) -> Result<CoveragePlan> {
    let map = &model.map;
    match algorithm {
        Algorithm::MCover => m_cover_with(map, start, spacing, opts),
        Algorithm::WidthMCover => width_based_m_cover_with(map, start, spacing, opts),
        Algorithm::LCover => l_cover_with(map, start, spacing, opts),
        Algorithm::TCover => t_cover_with(map, start, spacing, opts),
        Algorithm::ZCover => z_cover_with(map, start, spacing, opts),
    }
}

fn cmd_plan(args: PlanArgs) -> Result<()> {
    let cfg = Config::load(args.common.config.as_deref())?;
    let loaded = load_common(&args.common, &cfg)?;
    let algo = Algorithm::parse(
        &resolve(args.algo.clone(), &cfg, "algo")?.unwrap_or_else(|| "m-cover".to_string()),
    )?;
    let out = require(resolve(args.out.clone(), &cfg, "out")?, "--out")?;
    let budget = resolve(args.waypoint_budget, &cfg, "waypoint-budget")?
        .unwrap_or(DEFAULT_WAYPOINT_BUDGET);

    let plan = plan_with(algo, &loaded.model, loaded.start, loaded.spacing, &loaded.opts)?;
    std::fs::create_dir_all(&out)?;
    let geojson = export_plan(&plan, MissionFormat::GeoJson, None, budget)?;
    std::fs::write(out.join("plan.geojson"), &geojson.body)?;
    std::fs::write(
        out.join("banks.geojson"),
        contours_to_geojson(&loaded.model.contours, loaded.geo.as_ref()),
    )?;
    if let Some(geo) = &loaded.geo {
        let wpl = export_plan(&plan, MissionFormat::QgcWpl110, Some(geo), budget)?;
        std::fs::write(out.join("mission.wpl"), &wpl.body)?;
        let gpx = export_plan(&plan, MissionFormat::Gpx, Some(geo), budget)?;
        std::fs::write(out.join("plan.gpx"), &gpx.body)?;
    }

    let radius = loaded.spacing / 2.0 + loaded.model.map.resolution();
    let completeness = coverage_fraction(&loaded.model.map, &plan, radius);
    let passes: Vec<String> = plan
        .lane_counts()
        .iter()
        .map(|(_, k)| k.to_string())
        .collect();
    println!(
        "plan algo={} length_m={:.1} passes={} completeness={:.1}% complete={}",
        algo.name(),
        plan.total_length(),
        passes.join(","),
        completeness * 100.0,
        completeness >= 0.99
    );
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let cfg = Config::load(args.common.config.as_deref())?;
    let loaded = load_common(&args.common, &cfg)?;
    let algos_text = resolve(args.algos.clone(), &cfg, "algos")?
        .unwrap_or_else(|| "m-cover,l-cover".to_string());
    let algos: Vec<Algorithm> = algos_text
        .split(',')
        .map(|s| Algorithm::parse(s.trim()))
        .collect::<Result<_>>()?;
    if algos.len() < 2 {
        return Err(Error::validation("compare needs at least two algorithms"));
    }
    let boat_speed = resolve(args.boat_speed, &cfg, "boat-speed")?.unwrap_or(4.0);
    let turn_penalty = resolve(args.turn_penalty, &cfg, "turn-penalty")?.unwrap_or(0.0);
    let vmin = resolve(args.vmin, &cfg, "vmin")?;
    let vmax = resolve(args.vmax, &cfg, "vmax")?;
    let out = require(resolve(args.out.clone(), &cfg, "out")?, "--out")?;

    let model = &loaded.model;
    let field = match (vmin, vmax) {
        (Some(lo), Some(hi)) => synth_current_field(model, lo, hi)?,
        (None, None) => {
            // calibrate against the outer-lane up/down time ratio
            let prof = width_profile(&model.contours);
            let k = round_to_even_half_up(prof.mean_width() / loaded.spacing, 2) as f64;
            let outer_u = (k - 0.5) / k;
            calibrated_field(model, boat_speed, outer_u, OUTER_LANE_UP_DOWN_RATIO, 0.2)?
        }
        _ => {
            return Err(Error::validation(
                "give both --vmin and --vmax, or neither to calibrate",
            ))
        }
    };
    let boat = BoatModel {
        speed_through_water: boat_speed,
        turn_penalty,
    };
    if boat_speed <= field.v_max {
        return Err(Error::validation(format!(
            "boat speed {boat_speed} m/s must exceed the fastest current {:.2} m/s",
            field.v_max
        )));
    }

    let plans: Vec<CoveragePlan> = algos
        .iter()
        .map(|a| plan_with(*a, model, loaded.start, loaded.spacing, &loaded.opts))
        .collect::<Result<_>>()?;
    let refs: Vec<&CoveragePlan> = plans.iter().collect();
    let cmp = compare_plans(&refs, &field, &boat)?;

    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("comparison.csv"), cmp.to_csv())?;
    std::fs::write(out.join("field.csv"), field.to_csv())?;

    let fastest = cmp.fastest().algorithm.clone();
    let runner_up = cmp
        .rows
        .iter()
        .filter(|r| r.algorithm != fastest)
        .min_by(|a, b| a.time_s.partial_cmp(&b.time_s).unwrap())
        .map(|r| r.algorithm.clone())
        .unwrap_or_default();
    let margin = cmp.savings_pct(&fastest, &runner_up).unwrap_or(0.0);
    println!("compare fastest={fastest} margin={margin:.1}% vs={runner_up}");
    Ok(())
}

fn cmd_render(args: RenderArgs) -> Result<()> {
    let cfg = Config::load(args.common.config.as_deref())?;
    let loaded = load_common(&args.common, &cfg)?;
    let algo = Algorithm::parse(
        &resolve(args.algo.clone(), &cfg, "algo")?.unwrap_or_else(|| "m-cover".to_string()),
    )?;
    let out = require(resolve(args.out.clone(), &cfg, "out")?, "--out")?;
    let plan = plan_with(algo, &loaded.model, loaded.start, loaded.spacing, &loaded.opts)?;
    let svg = render_svg(&loaded.model, Some(&plan), &RenderOptions::default());
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&out, svg)
        .map_err(|e| Error::validation(format!("cannot write {}: {e}", out.display())))?;
    println!("render algo={} out={}", algo.name(), out.display());
    Ok(())
}

fn cmd_depthmap(args: DepthArgs) -> Result<()> {
    let cfg = Config::load(args.common.config.as_deref())?;
    // depthmap does not need start/spacing; load the map directly
    let map_path = require(resolve(args.common.map.clone(), &cfg, "map")?, "--map")?;
    let resolution = resolve(args.common.resolution, &cfg, "resolution")?;
    let samples_path = require(resolve(args.samples.clone(), &cfg, "samples")?, "--samples")?;
    let out = require(resolve(args.out.clone(), &cfg, "out")?, "--out")?;
    let folds = resolve(args.folds, &cfg, "folds")?.unwrap_or(5);
    let seed = resolve(args.common.seed, &cfg, "seed")?.unwrap_or(0);

    let mut map = load_map(&map_path, resolution)?;
    let geo = match resolve(args.common.geo.clone(), &cfg, "geo")? {
        Some(text) => Some(parse_geo(&text)?),
        None => None,
    };
    if geo.is_some() {
        map.set_geo(geo);
    }
    let text = std::fs::read_to_string(&samples_path).map_err(|e| {
        Error::validation(format!("cannot read samples {}: {e}", samples_path.display()))
    })?;
    let samples: Vec<DepthSample> = match samples_path.extension().and_then(|e| e.to_str()) {
        Some("gpx") => {
            let geo = map.geo().copied().ok_or_else(|| {
                Error::validation("GPX depth samples need a georeference (--geo lat,lon)")
            })?;
            samples_from_gpx(&text, &geo)?
        }
        _ => samples_from_csv(&text)?,
    };

    let length_scale = resolve(args.length_scale, &cfg, "length-scale")?;
    let signal_var = resolve(args.signal_var, &cfg, "signal-var")?;
    let noise_var = resolve(args.noise_var, &cfg, "noise-var")?;
    let options = match (length_scale, signal_var, noise_var) {
        (Some(l), Some(s), Some(n)) => FitOptions::Params(GpHyperParams {
            length_scale: l,
            signal_var: s,
            noise_var: n,
        }),
        (None, None, None) => FitOptions::Auto { restarts: 5, seed },
        _ => {
            return Err(Error::validation(
                "give all of --length-scale/--signal-var/--noise-var, or none for auto",
            ))
        }
    };

    let (depth_map, gp) = fit_depth_gp(&map, &samples, options)?;
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("depth_mean.asc"), depth_map.to_esri_ascii(DepthLayer::Mean))?;
    std::fs::write(out.join("depth_std.asc"), depth_map.to_esri_ascii(DepthLayer::Std))?;
    let cv = cross_validated_rmse(&map, &samples, options, folds, seed)?;
    let hp = gp.hyperparams();
    println!(
        "depthmap samples={} rmse_m={:.3} folds={folds} length_scale={:.1} signal_var={:.4} noise_var={:.6}",
        samples.len(),
        cv,
        hp.length_scale,
        hp.signal_var,
        hp.noise_var
    );
    Ok(())
}
