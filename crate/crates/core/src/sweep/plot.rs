//! Minimal SVG line plots of run records.
//!
//! Output depends only on the record and the style, so identical runs give
//! identical files.

use std::fmt::Write as _;
use std::path::Path;

use super::RunRecord;
use crate::error::{Error, Result};

const COLORS: [&str; 6] = ["#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d68910", "#555555"];
const LEFT: f64 = 78.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 34.0;
const GAP: f64 = 52.0;

/// Which columns to draw: each panel plots its columns against `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotStyle {
    pub x: String,
    pub panels: Vec<Vec<String>>,
    pub title: Option<String>,
    pub width: f64,
    pub panel_height: f64,
}

impl PlotStyle {
    pub fn new(x: &str, panels: &[&[&str]]) -> Self {
        PlotStyle {
            x: x.to_string(),
            panels: panels
                .iter()
                .map(|p| p.iter().map(|c| c.to_string()).collect())
                .collect(),
            title: None,
            width: 640.0,
            panel_height: 260.0,
        }
    }

    /// Default layout for the records of a sweep kind.
    pub fn for_kind(kind: &str) -> Option<Self> {
        let style = match kind {
            "spectrum" => Self::new("nu_ghz", &[&["abs2_ta", "abs2_tb", "sum"]]),
            "pulse-width" => Self::new("width_ghz", &[&["efficiency", "elastic"]]),
            "pulse" => Self::new("detuning_ghz", &[&["input"], &["elastic", "inelastic"]]),
            "flux" => Self::new(
                "f",
                &[&["w21_ghz", "w31_ghz", "w32_ghz"], &["g31_ghz", "g21_ghz", "g32_ghz"], &["eff_down", "eff_up"]],
            ),
            "circuit" => Self::new("f", &[&["eff_down", "eff_up"]]),
            "saturation" => Self::new("omega_p_over_g31", &[&["abs2_ta", "abs2_tb", "sum"]]),
            "steady" => Self::new(
                "delta_p_over_g31",
                &[&["abs2_ta", "abs2_ta_weak"], &["abs2_tb", "abs2_tb_weak"]],
            ),
            "optimal-bias" => Self::new("f", &[&["efficiency"]]),
            _ => return None,
        };
        Some(Self {
            title: Some(kind.to_string()),
            ..style
        })
    }
}

/// Axis label with units for a record column.
pub fn axis_label(column: &str) -> String {
    let label = match column {
        "nu_ghz" => "frequency ν (GHz)",
        "detuning_ghz" => "offset from line center (GHz)",
        "width_ghz" => "pulse width d (GHz)",
        "f" => "reduced flux f (Φ0)",
        "omega_p_over_g31" => "probe strength Ω_p / Γ31",
        "delta_p_over_g31" => "probe detuning Δ_p / Γ31",
        "input" | "elastic" | "inelastic" => "spectral density (1/GHz)",
        "re_ta" | "im_ta" => "amplitude",
        "abs_n21" | "abs_n31" | "abs_n32" => "|matrix element|",
        c if c.starts_with("abs2_") || c.starts_with("eff") || c == "sum" || c == "efficiency" => "probability",
        c if c.ends_with("_ghz") => "frequency (GHz)",
        c => c,
    };
    label.to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Range padded so that a constant series still spans some height.
fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.04 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

/// Ticks on a 1-2-5 ladder and the decimals needed to print them.
fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals.min(12))
}

fn column_index(record: &RunRecord, name: &str) -> Result<usize> {
    record
        .columns
        .iter()
        .position(|c| c == name)
        .ok_or_else(|| Error::Config(format!("record of kind `{}` has no column `{name}`", record.kind)))
}

pub fn render_svg(record: &RunRecord, style: &PlotStyle) -> Result<String> {
    if record.rows.is_empty() {
        return Err(Error::InvalidGrid("record has no rows to plot".into()));
    }
    if style.panels.is_empty() || style.panels.iter().any(|p| p.is_empty()) {
        return Err(Error::Config("plot style needs at least one column per panel".into()));
    }
    let xi = column_index(record, &style.x)?;
    let xs: Vec<f64> = record.rows.iter().map(|r| r[xi]).collect();
    let (x0, x1) = padded(
        xs.iter().copied().fold(f64::INFINITY, f64::min),
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );

    let plot_w = style.width - LEFT - RIGHT;
    let ph = style.panel_height;
    let height = TOP + style.panels.len() as f64 * (ph + GAP);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{height:.0}" viewBox="0 0 {w:.0} {height:.0}" font-family="sans-serif" font-size="11">"#,
        w = style.width
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(t) = &style.title {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
            LEFT + plot_w / 2.0,
            escape(t)
        );
    }

    for (p, panel) in style.panels.iter().enumerate() {
        let top = TOP + p as f64 * (ph + GAP);
        let series: Vec<(String, Vec<f64>)> = panel
            .iter()
            .map(|c| {
                let k = column_index(record, c)?;
                Ok((c.clone(), record.rows.iter().map(|r| r[k]).collect()))
            })
            .collect::<Result<_>>()?;
        let all = series.iter().flat_map(|(_, v)| v.iter().copied());
        let (ylo, yhi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (y0, y1) = padded(ylo, yhi);
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

        let _ = writeln!(
            svg,
            r##"<rect x="{LEFT:.1}" y="{top:.1}" width="{plot_w:.1}" height="{ph:.1}" fill="none" stroke="#000"/>"##
        );
        let (xt, xd) = ticks(x0, x1);
        for t in xt {
            let x = sx(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{top:.2}" x2="{x:.2}" y2="{:.2}" stroke="#e4e4e4"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{:.*}</text>"##,
                top + ph,
                top + ph + 14.0,
                xd,
                t + 0.0
            );
        }
        let (yt, yd) = ticks(y0, y1);
        for t in yt {
            let y = sy(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e4e4e4"/><text x="{:.2}" y="{:.2}" text-anchor="end">{:.*}</text>"##,
                LEFT + plot_w,
                LEFT - 4.0,
                y + 4.0,
                yd,
                t + 0.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            top + ph + 32.0,
            escape(&axis_label(&style.x))
        );
        let _ = writeln!(
            svg,
            r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            top + ph / 2.0,
            escape(&axis_label(&panel[0]))
        );

        for (s, (name, ys)) in series.iter().enumerate() {
            let color = COLORS[s % COLORS.len()];
            let mut pts = String::new();
            for (x, y) in xs.iter().zip(ys) {
                let _ = write!(pts, "{:.2},{:.2} ", sx(*x), sy(*y));
            }
            if xs.len() == 1 {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    sx(xs[0]),
                    sy(ys[0])
                );
            } else {
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    pts.trim_end()
                );
            }
            let ly = top + 14.0 + 14.0 * s as f64;
            let lx = LEFT + plot_w - 120.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
                ly - 4.0,
                lx + 18.0,
                ly - 4.0,
                lx + 22.0,
                escape(name)
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders `record` and writes the SVG to `path`.
pub fn emit_plot(record: &RunRecord, style: &PlotStyle, path: &Path) -> Result<()> {
    let svg = render_svg(record, style)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
