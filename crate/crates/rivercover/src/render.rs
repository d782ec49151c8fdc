//! Deterministic SVG rendering of maps, bend labels and plans.
//!
//! Output bytes depend only on the inputs: fixed-precision coordinates, no
//! timestamps, stable element order.

use std::fmt::Write as _;

use crate::meander::{classify_bend, BendLabel};
use crate::planner::{CoveragePlan, Direction, PlanElement};
use crate::river_map::RiverModel;

#[derive(Debug, Clone, Copy)]
pub struct RenderOptions {
    /// Draw inner/outer markers sampled along both banks.
    pub bend_markers: bool,
    /// Margin around the river, in meters.
    pub margin: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            bend_markers: true,
            margin: 30.0,
        }
    }
}

const UPSTREAM_COLOR: &str = "#1f77b4";
const DOWNSTREAM_COLOR: &str = "#2ca02c";
const CONNECTOR_COLOR: &str = "#888888";
const WATER_COLOR: &str = "#d9ecf5";
const BANK_COLOR: &str = "#4a6b52";
const INNER_MARKER: &str = "#ff7f0e";
const OUTER_MARKER: &str = "#2ca02c";

/// Renders the river and, optionally, a coverage plan.
pub fn render_svg(model: &RiverModel, plan: Option<&CoveragePlan>, opts: &RenderOptions) -> String {
    let ext = model.map.extent();
    let m = opts.margin;
    let (w, h) = (ext.x + 2.0 * m, ext.y + 2.0 * m);
    // svg y axis points down; flip about the map height
    let tx = |p: crate::Point| -> (f64, f64) { (p.x + m, ext.y - p.y + m) };
    let path_of = |pts: &[crate::Point], close: bool| -> String {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = tx(*p);
            let _ = write!(d, "{}{x:.2} {y:.2} ", if i == 0 { "M" } else { "L" });
        }
        if close {
            d.push('Z');
        }
        d
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w:.2} {h:.2}\" width=\"{w:.0}\" height=\"{h:.0}\">"
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"#f7f5f0\"/>");

    // water polygon: left bank forward, right bank back
    let mut ring: Vec<crate::Point> = model.contours.left.points().to_vec();
    ring.extend(model.contours.right.points().iter().rev());
    let _ = writeln!(
        svg,
        "<path d=\"{}\" fill=\"{WATER_COLOR}\" stroke=\"none\"/>",
        path_of(&ring, true)
    );
    for bank in [&model.contours.left, &model.contours.right] {
        let _ = writeln!(
            svg,
            "<path d=\"{}\" fill=\"none\" stroke=\"{BANK_COLOR}\" stroke-width=\"2\"/>",
            path_of(bank.points(), false)
        );
    }
    let _ = writeln!(
        svg,
        "<path d=\"{}\" fill=\"none\" stroke=\"#b0c4cc\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>",
        path_of(model.contours.centerline.points(), false)
    );

    if opts.bend_markers {
        let step = model.step;
        for bank in [&model.contours.left, &model.contours.right] {
            let mut arc = 1.5 * step.get();
            while arc <= bank.length() - 1.5 * step.get() {
                if let Ok(label) = classify_bend(&model.map, bank, arc, step) {
                    let color = match label {
                        BendLabel::Inner => INNER_MARKER,
                        BendLabel::Outer => OUTER_MARKER,
                        BendLabel::Straight => {
                            arc += step.get();
                            continue;
                        }
                    };
                    let (x, y) = tx(bank.point_at(arc));
                    let _ = writeln!(
                        svg,
                        "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>"
                    );
                }
                arc += step.get();
            }
        }
    }

    if let Some(plan) = plan {
        for element in &plan.elements {
            match element {
                PlanElement::Pass(p) => {
                    let color = match p.direction {
                        Direction::Upstream => UPSTREAM_COLOR,
                        Direction::Downstream => DOWNSTREAM_COLOR,
                    };
                    let _ = writeln!(
                        svg,
                        "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                        path_of(p.polyline.points(), false)
                    );
                }
                PlanElement::Connector(c) => {
                    let _ = writeln!(
                        svg,
                        "<path d=\"{}\" fill=\"none\" stroke=\"{CONNECTOR_COLOR}\" stroke-width=\"1\" stroke-dasharray=\"3 3\"/>",
                        path_of(c.points(), false)
                    );
                }
            }
        }
        let (sx, sy) = tx(plan.start);
        let _ = writeln!(
            svg,
            "<circle cx=\"{sx:.2}\" cy=\"{sy:.2}\" r=\"5\" fill=\"#d62728\" stroke=\"#fff\" stroke-width=\"1.5\"/>"
        );
    }

    svg.push_str("</svg>\n");
    svg
}
