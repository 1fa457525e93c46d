//! Deterministic CSV, JSON, and SVG emission. All reals go through
//! [`real17`] so byte output is stable across runs and platforms.

use ips_lab_core::cherrypick::{BatterySummary, CherryReport, SearchOutcome, TradeoffPoint};
use ips_lab_core::ips::IpsGeometry;
use ips_lab_core::json::{escape, real17};
use ips_lab_core::multilabel::SimplexLabeling;
use ips_lab_core::solver::SolveResult;
use std::fmt::Write as _;

pub fn frontier_csv(ips: &IpsGeometry<f64>) -> String {
    let mut out = String::from("frontier,tnr,tpr\n");
    for v in ips.upper() {
        let _ = writeln!(out, "upper,{},{}", real17(v.tnr), real17(v.tpr));
    }
    for v in ips.lower() {
        let _ = writeln!(out, "lower,{},{}", real17(v.tnr), real17(v.tpr));
    }
    out
}

pub fn optima_csv(result: &SolveResult<f64>) -> String {
    let mut out =
        String::from("tnr0,tpr0,tnr1,tpr1,objective,fairness,frontier_dist0,frontier_dist1\n");
    for o in &result.optima {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            real17(o.group0.tnr),
            real17(o.group0.tpr),
            real17(o.group1.tnr),
            real17(o.group1.tpr),
            real17(o.objective),
            real17(o.fairness),
            real17(o.frontier_dist0),
            real17(o.frontier_dist1),
        );
    }
    out
}

pub fn detect_json(result: &SolveResult<f64>, report: &CherryReport<f64>) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"best_value\": {},", real17(result.best_value));
    let _ = writeln!(out, "  \"grid_pitch\": {},", real17(result.grid_pitch));
    let _ = writeln!(out, "  \"opt_tol\": {},", real17(result.opt_tol));
    let _ = writeln!(out, "  \"cp_tol\": {},", real17(report.cp_tol));
    let _ = writeln!(out, "  \"exists_clean\": {},", report.exists_clean);
    let _ = writeln!(out, "  \"all_cherry_pick\": {},", report.all_cherry_pick);
    let _ = writeln!(
        out,
        "  \"minmax_frontier_dist\": {},",
        real17(report.minmax_frontier_dist)
    );
    let _ = writeln!(out, "  \"total_optima\": {},", result.total_optima);
    let _ = writeln!(out, "  \"optima_truncated\": {},", result.optima_truncated);
    out.push_str("  \"optima\": [\n");
    for (k, o) in report.per_optimum.iter().enumerate() {
        let _ = write!(
            out,
            "    {{\"tnr0\": {}, \"tpr0\": {}, \"tnr1\": {}, \"tpr1\": {}, \"objective\": {}, \"fairness\": {}, \"frontier_dist0\": {}, \"frontier_dist1\": {}, \"cherry_picks\": {}}}",
            real17(o.pair.group0.tnr),
            real17(o.pair.group0.tpr),
            real17(o.pair.group1.tnr),
            real17(o.pair.group1.tpr),
            real17(o.pair.objective),
            real17(o.pair.fairness),
            real17(o.frontier_dist0),
            real17(o.frontier_dist1),
            o.cherry_picks
        );
        out.push_str(if k + 1 < report.per_optimum.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn battery_csv(summary: &BatterySummary<f64>) -> String {
    let mut out = String::from(
        "instance,metric,c,fairness,exists_clean,grid_best,frontier_best,slack,minmax_frontier_dist\n",
    );
    for cell in &summary.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            cell.instance,
            cell.metric,
            real17(cell.c),
            cell.fairness,
            cell.exists_clean,
            real17(cell.grid_best),
            real17(cell.frontier_best),
            real17(cell.slack),
            real17(cell.minmax_frontier_dist),
        );
    }
    out
}

pub fn search_json(outcome: &SearchOutcome<f64>) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"cells_scanned\": {},", outcome.cells_scanned);
    match &outcome.finding {
        Some(f) => {
            out.push_str("  \"finding\": {\n");
            let _ = writeln!(out, "    \"gamma\": {},", real17(f.gamma));
            let _ = writeln!(out, "    \"eps_prime\": {},", real17(f.eps_prime));
            let _ = writeln!(out, "    \"c\": {},", real17(f.c));
            let _ = writeln!(out, "    \"cap_tnr\": {},", real17(f.cap_tnr));
            let _ = writeln!(out, "    \"cap_tpr\": {},", real17(f.cap_tpr));
            let _ = writeln!(out, "    \"grid_best\": {},", real17(f.check.grid.best_value));
            let _ = writeln!(out, "    \"frontier_best\": {},", real17(f.check.frontier_best));
            let _ = writeln!(out, "    \"opt_tol\": {},", real17(f.check.grid.opt_tol));
            let _ = writeln!(out, "    \"cp_tol\": {},", real17(f.check.cp_tol));
            let _ = writeln!(
                out,
                "    \"minmax_frontier_dist\": {},",
                real17(f.check.grid.minmax_frontier_dist)
            );
            let _ = writeln!(
                out,
                "    \"refined_minmax_frontier_dist\": {},",
                real17(f.refined.grid.minmax_frontier_dist)
            );
            let _ = writeln!(out, "    \"oracle_minmax\": {},", real17(f.oracle_minmax));
            let _ = writeln!(out, "    \"confirmed\": {},", f.confirmed);
            let _ = writeln!(out, "    \"total_optima\": {},", f.check.grid.total_optima);
            out.push_str("    \"optima\": [\n");
            for (k, o) in f.check.grid.optima.iter().enumerate() {
                let _ = write!(
                    out,
                    "      {{\"tnr0\": {}, \"tpr0\": {}, \"tnr1\": {}, \"tpr1\": {}, \"objective\": {}, \"fairness\": {}, \"frontier_dist0\": {}, \"frontier_dist1\": {}}}",
                    real17(o.group0.tnr),
                    real17(o.group0.tpr),
                    real17(o.group1.tnr),
                    real17(o.group1.tpr),
                    real17(o.objective),
                    real17(o.fairness),
                    real17(o.frontier_dist0),
                    real17(o.frontier_dist1),
                );
                out.push_str(if k + 1 < f.check.grid.optima.len() { ",\n" } else { "\n" });
            }
            out.push_str("    ]\n  },\n");
        }
        None => {
            out.push_str("  \"finding\": null,\n");
        }
    }
    out.push_str("  \"log\": [\n");
    for (k, cell) in outcome.log.iter().enumerate() {
        let _ = write!(
            out,
            "    {{\"gamma\": {}, \"eps_prime\": {}, \"c\": {}, \"cap_tnr\": {}, \"cap_tpr\": {}, \"grid_best\": {}, \"frontier_best\": {}, \"minmax_frontier_dist\": {}, \"all_cherry_pick\": {}}}",
            real17(cell.gamma),
            real17(cell.eps_prime),
            real17(cell.c),
            real17(cell.cap_tnr),
            real17(cell.cap_tpr),
            real17(cell.grid_best),
            real17(cell.frontier_best),
            real17(cell.minmax_frontier_dist),
            cell.all_cherry_pick
        );
        out.push_str(if k + 1 < outcome.log.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn tradeoff_csv(curve: &[TradeoffPoint<f64>]) -> String {
    let mut out = String::from("c,best_value,best_metric,fairness_at_opt,exists_clean\n");
    for p in curve {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            real17(p.c),
            real17(p.best_value),
            real17(p.best_metric),
            real17(p.fairness_at_opt),
            p.exists_clean
        );
    }
    out
}

pub fn labeling_csv(labeling: &SimplexLabeling) -> String {
    let mut out = String::new();
    for i in 0..labeling.n {
        let _ = write!(out, "c{i},");
    }
    out.push_str("labels\n");
    for cell in &labeling.cells {
        for k in &cell.coords {
            let _ = write!(out, "{k},");
        }
        let labels: Vec<String> = cell.labels.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(out, "{}", labels.join("|"));
    }
    out
}

pub fn fqc_json(report: &ips_lab_core::metrics::FqcReport<f64>) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"passes\": {},", report.passes);
    let _ = writeln!(out, "  \"grid_n\": {},", report.grid_n);
    let _ = writeln!(out, "  \"cells_checked\": {},", report.cells_checked);
    match &report.witness {
        Some(w) => {
            let _ = writeln!(out, "  \"witness\": {{");
            let _ = writeln!(out, "    \"group\": \"{}\",", escape(&w.group));
            let _ = writeln!(out, "    \"tnr\": {},", real17(w.point.tnr));
            let _ = writeln!(out, "    \"tpr\": {},", real17(w.point.tpr));
            let _ = writeln!(out, "    \"other_tnr\": {},", real17(w.other_point.tnr));
            let _ = writeln!(out, "    \"other_tpr\": {},", real17(w.other_point.tpr));
            let _ = writeln!(out, "    \"d_tnr\": {},", real17(w.d_tnr));
            let _ = writeln!(out, "    \"d_tpr\": {}", real17(w.d_tpr));
            let _ = writeln!(out, "  }}");
        }
        None => {
            let _ = writeln!(out, "  \"witness\": null");
        }
    }
    out.push_str("}\n");
    out
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

fn svg_header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    )
}

fn polyline(points: &[(f64, f64)], stroke: &str) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.3},{y:.3}"))
        .collect();
    format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"/>\n",
        coords.join(" ")
    )
}

/// Frontier plot: both polylines in a unit box with light axes.
pub fn frontier_svg(ips: &IpsGeometry<f64>) -> String {
    let (w, h, pad) = (480.0, 480.0, 40.0);
    let scale = |tnr: f64, tpr: f64| -> (f64, f64) {
        (pad + tnr * (w - 2.0 * pad), h - pad - tpr * (h - 2.0 * pad))
    };
    let mut svg = svg_header(w, h);
    svg.push_str(&polyline(
        &[scale(0.0, 1.0), scale(0.0, 0.0), scale(1.0, 0.0)],
        "#888888",
    ));
    let upper: Vec<(f64, f64)> = ips.upper().iter().map(|v| scale(v.tnr, v.tpr)).collect();
    let lower: Vec<(f64, f64)> = ips.lower().iter().map(|v| scale(v.tnr, v.tpr)).collect();
    svg.push_str(&polyline(&upper, "#1f6fb2"));
    svg.push_str(&polyline(&lower, "#b25f1f"));
    svg.push_str("</svg>\n");
    svg
}

/// Ternary plot of a three-label simplex labeling: one dot per grid cell,
/// colored by its allowed-label set.
pub fn ternary_svg(labeling: &SimplexLabeling) -> Option<String> {
    if labeling.n != 3 {
        return None;
    }
    let (w, h, pad) = (520.0, 480.0, 30.0);
    let side = w - 2.0 * pad;
    let height = side * 3f64.sqrt() / 2.0;
    let corners = [
        (pad, pad + height),
        (pad + side, pad + height),
        (pad + side / 2.0, pad),
    ];
    let mut svg = svg_header(w, h);
    let g = labeling.grid as f64;
    for cell in &labeling.cells {
        let t: Vec<f64> = cell.coords.iter().map(|&k| k as f64 / g).collect();
        let x = t[0] * corners[0].0 + t[1] * corners[1].0 + t[2] * corners[2].0;
        let y = t[0] * corners[0].1 + t[1] * corners[1].1 + t[2] * corners[2].1;
        let mut rgb = [0u32; 3];
        for &l in &cell.labels {
            rgb[l] = 230 / cell.labels.len() as u32 + 25;
        }
        svg.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.4\" fill=\"rgb({},{},{})\"/>\n",
            rgb[0], rgb[1], rgb[2]
        ));
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

/// Trade-off curve: best metric value and fairness at the optimum against
/// the penalty weight.
pub fn tradeoff_svg(curve: &[TradeoffPoint<f64>]) -> String {
    let (w, h, pad) = (520.0, 360.0, 40.0);
    let mut svg = svg_header(w, h);
    if curve.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let c_max = curve.last().map(|p| p.c).unwrap_or(1.0).max(1e-9);
    let v_min = curve
        .iter()
        .flat_map(|p| [p.best_metric, p.fairness_at_opt])
        .fold(f64::INFINITY, f64::min);
    let v_max = curve
        .iter()
        .flat_map(|p| [p.best_metric, p.fairness_at_opt])
        .fold(f64::NEG_INFINITY, f64::max);
    let span = (v_max - v_min).max(1e-9);
    let scale = |c: f64, v: f64| -> (f64, f64) {
        (
            pad + c / c_max * (w - 2.0 * pad),
            h - pad - (v - v_min) / span * (h - 2.0 * pad),
        )
    };
    let metric: Vec<(f64, f64)> = curve.iter().map(|p| scale(p.c, p.best_metric)).collect();
    let fairness: Vec<(f64, f64)> = curve
        .iter()
        .map(|p| scale(p.c, p.fairness_at_opt))
        .collect();
    svg.push_str(&polyline(
        &[scale(0.0, v_max), scale(0.0, v_min), scale(c_max, v_min)],
        "#888888",
    ));
    svg.push_str(&polyline(&metric, "#1f6fb2"));
    svg.push_str(&polyline(&fairness, "#b21f2f"));
    svg.push_str("</svg>\n");
    svg
}
