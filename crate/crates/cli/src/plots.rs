//! Self-contained SVG figures: trajectories, capture-time heatmaps and
//! boundary overlays.

use std::fmt::Write as _;
use std::path::Path;

use simulcap::dynamics::TraceSample;
use simulcap::experiments::Polyline;
use simulcap::{Outcome, Point};

use crate::error::CliError;
use crate::output::{read_boundary, read_map, read_trace, write_text, MapRow};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 560.0;
const MARGIN: f64 = 50.0;
const COLORBAR: f64 = 90.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#bcbd22",
];
const INTRUDER: &str = "#d62728";
const TIMEOUT_FILL: &str = "#b0b0b0";
const ERROR_FILL: &str = "#000000";

/// Maps world coordinates into the plot area, y up, equal aspect.
#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
    left: f64,
    bottom: f64,
}

impl Frame {
    fn fit(points: impl IntoIterator<Item = Point>, plot_width: f64, plot_height: f64) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for p in points.into_iter().filter(|p| p.is_finite()) {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-9);
        let pad = 0.04 * span;
        let (x0, x1, y0, y1) = (x0 - pad, x1 + pad, y0 - pad, y1 + pad);
        let scale = (plot_width / (x1 - x0)).min(plot_height / (y1 - y0));
        let left = MARGIN + 0.5 * (plot_width - scale * (x1 - x0));
        let bottom = MARGIN + plot_height - 0.5 * (plot_height - scale * (y1 - y0));
        Frame {
            x0,
            y0,
            scale,
            left,
            bottom,
        }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (
            self.left + self.scale * (p.x - self.x0),
            self.bottom - self.scale * (p.y - self.y0),
        )
    }
}

fn open(width: f64, height: f64, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"##
    );
    let _ = writeln!(
        s,
        r##"<rect width="{width}" height="{height}" fill="white"/>"##
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"##,
        width / 2.0,
        escape(title)
    );
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn polyline_attr(frame: &Frame, points: &[Point]) -> String {
    let mut s = String::new();
    for (k, &p) in points.iter().enumerate() {
        let (x, y) = frame.map(p);
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

fn draw_polyline(out: &mut String, frame: &Frame, line: &Polyline, stroke: &str, width: f64) {
    let tag = if line.closed { "polygon" } else { "polyline" };
    let _ = writeln!(
        out,
        r##"<{tag} points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"##,
        polyline_attr(frame, &line.points)
    );
}

fn draw_target(out: &mut String, frame: &Frame, target: Point) {
    let (x, y) = frame.map(target);
    let _ = writeln!(
        out,
        r##"<path d="M{:.2},{y:.2}H{:.2}M{x:.2},{:.2}V{:.2}" stroke="black" stroke-width="2"/>"##,
        x - 6.0,
        x + 6.0,
        y - 6.0,
        y + 6.0
    );
}

fn draw_axes(out: &mut String, frame: &Frame, lo: Point, hi: Point) {
    let (x0, y0) = frame.map(lo);
    let (x1, y1) = frame.map(hi);
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        out,
        r##"<text x="{x0:.2}" y="{:.2}">({}, {})</text>"##,
        y0 + 16.0,
        short(lo.x),
        short(lo.y)
    );
    let _ = writeln!(
        out,
        r##"<text x="{x1:.2}" y="{:.2}" text-anchor="end">({}, {})</text>"##,
        y1 - 5.0,
        short(hi.x),
        short(hi.y)
    );
}

fn short(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Agent paths with start markers, the target and, on capture, the final positions.
pub fn trajectory_svg(samples: &[TraceSample], target: Point, outcome: Option<&Outcome>) -> String {
    let title = match outcome {
        Some(Outcome::SimultaneousCapture(t)) => {
            format!("Simultaneous capture at t = {}", short(*t))
        }
        Some(Outcome::Breach(t)) => format!("Target breached at t = {}", short(*t)),
        Some(Outcome::Timeout(t)) => format!("No capture by t = {}", short(*t)),
        None => "Trajectories".to_string(),
    };
    let all = samples
        .iter()
        .flat_map(|s| s.defenders.iter().copied().chain([s.intruder]))
        .chain([target]);
    let frame = Frame::fit(all, WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let mut out = open(WIDTH, HEIGHT, &title);
    draw_target(&mut out, &frame, target);
    let n = samples.first().map_or(0, |s| s.defenders.len());
    for a in 0..=n {
        let path: Vec<Point> = samples
            .iter()
            .map(|s| if a < n { s.defenders[a] } else { s.intruder })
            .collect();
        let color = if a < n {
            PALETTE[a % PALETTE.len()]
        } else {
            INTRUDER
        };
        let dash = if a < n {
            ""
        } else {
            r##" stroke-dasharray="6 3""##
        };
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>"##,
            polyline_attr(&frame, &path)
        );
        if let (Some(&start), Some(&end)) = (path.first(), path.last()) {
            let (x, y) = frame.map(start);
            let _ = writeln!(
                out,
                r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{color}"/>"##
            );
            let (x, y) = frame.map(end);
            let _ = writeln!(
                out,
                r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="white" stroke="{color}" stroke-width="1.5"/>"##
            );
            let label = if a < n {
                format!("P{}", a + 1)
            } else {
                "intruder".into()
            };
            let (x, y) = frame.map(start);
            let _ = writeln!(
                out,
                r##"<text x="{:.2}" y="{:.2}" fill="{color}">{label}</text>"##,
                x + 6.0,
                y - 6.0
            );
        }
    }
    if let (Some(Outcome::SimultaneousCapture(_)), Some(last)) = (outcome, samples.last()) {
        let (x, y) = frame.map(last.intruder);
        let _ = writeln!(
            out,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="9" fill="none" stroke="black" stroke-width="1.5"/>"##
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Piecewise-linear approximation of the viridis colormap on `[0, 1]`.
pub fn colormap(u: f64) -> String {
    const STOPS: [(f64, f64, f64); 6] = [
        (68.0, 1.0, 84.0),
        (65.0, 68.0, 135.0),
        (42.0, 120.0, 142.0),
        (34.0, 168.0, 132.0),
        (122.0, 209.0, 81.0),
        (253.0, 231.0, 37.0),
    ];
    let u = if u.is_finite() {
        u.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let pos = u * (STOPS.len() - 1) as f64;
    let k = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - k as f64;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    let mix = |p: f64, q: f64| (p + f * (q - p)).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

fn spacing(values: impl Iterator<Item = f64>) -> f64 {
    let mut sorted: Vec<f64> = values.collect();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .reduce(f64::min)
        .unwrap_or(1.0)
}

/// Capture-time heatmap. Breach cells are white, timeouts grey with a cross,
/// errors black; the boundary is drawn on top.
pub fn heatmap_svg(rows: &[MapRow], boundary: &[Polyline], target: Point, title: &str) -> String {
    let dx = spacing(rows.iter().map(|r| r.point.x));
    let dy = spacing(rows.iter().map(|r| r.point.y));
    let corners = rows.iter().flat_map(|r| {
        [
            r.point + Point::new(-0.5 * dx, -0.5 * dy),
            r.point + Point::new(0.5 * dx, 0.5 * dy),
        ]
    });
    let frame = Frame::fit(corners, WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let width = WIDTH + COLORBAR;
    let mut out = open(width, HEIGHT, title);
    let t_max = rows.iter().filter_map(|r| r.t_star).fold(0.0, f64::max);
    let (w, h) = (dx * frame.scale, dy * frame.scale);
    for r in rows {
        let (cx, cy) = frame.map(r.point);
        let (x, y) = (cx - 0.5 * w, cy - 0.5 * h);
        let fill = match (r.class.as_str(), r.t_star) {
            ("capture", Some(t)) => colormap(if t_max > 0.0 { t / t_max } else { 0.0 }),
            ("breach", _) => "#ffffff".into(),
            ("timeout", _) => TIMEOUT_FILL.into(),
            _ => ERROR_FILL.into(),
        };
        let _ = writeln!(
            out,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"##,
            w + 0.05,
            h + 0.05
        );
        if r.class == "timeout" {
            let _ = writeln!(
                out,
                r##"<path d="M{x:.2},{y:.2}l{w:.2},{h:.2}M{:.2},{y:.2}l{:.2},{h:.2}" stroke="#555" stroke-width="0.6"/>"##,
                x + w,
                -w
            );
        }
    }
    if let (Some(lo), Some(hi)) = (
        rows.iter()
            .map(|r| r.point)
            .reduce(|a, b| Point::new(a.x.min(b.x), a.y.min(b.y))),
        rows.iter()
            .map(|r| r.point)
            .reduce(|a, b| Point::new(a.x.max(b.x), a.y.max(b.y))),
    ) {
        draw_axes(
            &mut out,
            &frame,
            lo + Point::new(-0.5 * dx, -0.5 * dy),
            hi + Point::new(0.5 * dx, 0.5 * dy),
        );
    }
    for line in boundary {
        draw_polyline(&mut out, &frame, line, "black", 1.6);
    }
    draw_target(&mut out, &frame, target);

    let bar_x = WIDTH + 5.0;
    let bar_h = HEIGHT - 2.0 * MARGIN;
    let steps = 64;
    for k in 0..steps {
        let u = (k as f64 + 0.5) / steps as f64;
        let y = MARGIN + bar_h * (1.0 - (k + 1) as f64 / steps as f64);
        let _ = writeln!(
            out,
            r##"<rect x="{bar_x:.2}" y="{y:.2}" width="18" height="{:.2}" fill="{}"/>"##,
            bar_h / steps as f64 + 0.3,
            colormap(u)
        );
    }
    let _ = writeln!(
        out,
        r##"<rect x="{bar_x:.2}" y="{MARGIN}" width="18" height="{bar_h:.2}" fill="none" stroke="#444"/>"##
    );
    for k in 0..=4 {
        let u = k as f64 / 4.0;
        let y = MARGIN + bar_h * (1.0 - u);
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}">{}</text>"##,
            bar_x + 22.0,
            y + 4.0,
            short(u * t_max)
        );
    }
    let _ = writeln!(
        out,
        r##"<text x="{:.2}" y="{:.2}">t*</text>"##,
        bar_x,
        MARGIN - 8.0
    );
    let legend_y = HEIGHT - MARGIN + 20.0;
    let _ = writeln!(
        out,
        r##"<rect x="{bar_x:.2}" y="{legend_y:.2}" width="12" height="12" fill="white" stroke="#444"/><text x="{:.2}" y="{:.2}">breach</text>"##,
        bar_x + 16.0,
        legend_y + 10.0
    );
    let _ = writeln!(
        out,
        r##"<rect x="{bar_x:.2}" y="{:.2}" width="12" height="12" fill="{TIMEOUT_FILL}" stroke="#444"/><text x="{:.2}" y="{:.2}">timeout</text>"##,
        legend_y + 16.0,
        bar_x + 16.0,
        legend_y + 26.0
    );
    out.push_str("</svg>\n");
    out
}

/// One boundary per setting in a shared frame, with a legend.
pub fn overlay_svg(
    lo: Point,
    hi: Point,
    curves: &[(String, Vec<Polyline>)],
    target: Point,
    title: &str,
) -> String {
    let frame = Frame::fit([lo, hi], WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let width = WIDTH + 2.0 * COLORBAR;
    let mut out = open(width, HEIGHT, title);
    draw_axes(&mut out, &frame, lo, hi);
    draw_target(&mut out, &frame, target);
    for (k, (label, lines)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        for line in lines {
            draw_polyline(&mut out, &frame, line, color, 1.8);
        }
        let y = MARGIN + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="3"/><text x="{:.2}" y="{:.2}">{}</text>"##,
            WIDTH + 5.0,
            y,
            WIDTH + 25.0,
            y,
            WIDTH + 30.0,
            y + 4.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Renders a trace CSV to an SVG file.
pub fn plot_trace_file(
    trace: &Path,
    target: Point,
    outcome: Option<&Outcome>,
    out: &Path,
) -> Result<(), CliError> {
    let samples = read_trace(trace)?;
    write_text(out, &trajectory_svg(&samples, target, outcome))
}

/// Renders a map CSV and, if given, its boundary CSV to a heatmap SVG file.
pub fn plot_map_files(
    map: &Path,
    boundary: Option<&Path>,
    target: Point,
    title: &str,
    out: &Path,
) -> Result<(), CliError> {
    let rows = read_map(map)?;
    let lines = boundary.map(read_boundary).transpose()?.unwrap_or_default();
    write_text(out, &heatmap_svg(&rows, &lines, target, title))
}

/// Renders labelled boundary CSVs into one overlay SVG file.
pub fn plot_overlay_files(
    lo: Point,
    hi: Point,
    boundaries: &[(String, &Path)],
    target: Point,
    title: &str,
    out: &Path,
) -> Result<(), CliError> {
    let curves = boundaries
        .iter()
        .map(|(label, path)| Ok((label.clone(), read_boundary(path)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    write_text(out, &overlay_svg(lo, hi, &curves, target, title))
}
