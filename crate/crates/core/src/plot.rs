//! Minimal standalone-SVG figure writer: line panels for 1D densities,
//! scatter and heatmap panels for the 2D experiments. No raster output and
//! no plotting dependency, so figures diff cleanly.

use crate::analytic::DensityGrid;
use crate::error::{Result, SgError};
use crate::matrix::Matrix;
use std::fmt::Write as _;

pub const BLUE: &str = "#1f77b4";
pub const GREEN: &str = "#2ca02c";
pub const RED: &str = "#d62728";
pub const GRAY: &str = "#7f7f7f";
pub const ORANGE: &str = "#ff7f0e";
pub const PURPLE: &str = "#9467bd";

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 46.0;
const MARGIN_B: f64 = 34.0;
const MARGIN_T: f64 = 26.0;
const MARGIN_R: f64 = 12.0;

#[derive(Debug, Clone)]
pub struct LineSeries {
    pub label: String,
    pub color: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ScatterSeries {
    pub label: String,
    pub color: String,
    pub points: Matrix,
    pub radius: f64,
}

/// One plot panel; panels tile horizontally in a figure.
#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub lines: Vec<LineSeries>,
    pub scatters: Vec<ScatterSeries>,
    pub heat: Option<DensityGrid>,
    /// Fixed data range (x0, x1, y0, y1); auto-fit when absent.
    pub range: Option<(f64, f64, f64, f64)>,
}

impl Panel {
    pub fn titled(title: impl Into<String>) -> Self {
        Panel { title: title.into(), ..Panel::default() }
    }

    fn data_range(&self) -> (f64, f64, f64, f64) {
        if let Some(r) = self.range {
            return r;
        }
        let mut x0 = f64::INFINITY;
        let mut x1 = f64::NEG_INFINITY;
        let mut y0 = f64::INFINITY;
        let mut y1 = f64::NEG_INFINITY;
        for s in &self.lines {
            for (&x, &y) in s.xs.iter().zip(&s.ys) {
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
        for s in &self.scatters {
            for row in s.points.iter_rows() {
                x0 = x0.min(row[0]);
                x1 = x1.max(row[0]);
                y0 = y0.min(row[1]);
                y1 = y1.max(row[1]);
            }
        }
        if let Some(g) = &self.heat {
            x0 = x0.min(g.spec().lower()[0]);
            x1 = x1.max(g.spec().upper()[0]);
            y0 = y0.min(g.spec().lower()[1]);
            y1 = y1.max(g.spec().upper()[1]);
        }
        if !x0.is_finite() || !x1.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if !y0.is_finite() || !y1.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let pad = 0.04 * (y1 - y0);
        (x0, x1, y0 - pad, y1 + pad)
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-2..1e4).contains(&a) {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

/// Five-stop blue-to-yellow color map for heat panels.
fn heat_color(v: f64) -> String {
    const STOPS: [(f64, [u8; 3]); 5] = [
        (0.0, [68, 1, 84]),
        (0.25, [59, 82, 139]),
        (0.5, [33, 145, 140]),
        (0.75, [94, 201, 98]),
        (1.0, [253, 231, 37]),
    ];
    let v = v.clamp(0.0, 1.0);
    let mut rgb = STOPS[4].1;
    for w in STOPS.windows(2) {
        let (a, ca) = w[0];
        let (b, cb) = w[1];
        if v <= b {
            let f = if b > a { (v - a) / (b - a) } else { 0.0 };
            rgb = [
                (ca[0] as f64 + f * (cb[0] as f64 - ca[0] as f64)) as u8,
                (ca[1] as f64 + f * (cb[1] as f64 - ca[1] as f64)) as u8,
                (ca[2] as f64 + f * (cb[2] as f64 - ca[2] as f64)) as u8,
            ];
            break;
        }
    }
    format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2])
}

fn render_panel(out: &mut String, panel: &Panel, x_off: f64) {
    let (x0, x1, y0, y1) = panel.data_range();
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let px = |x: f64| x_off + MARGIN_L + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"16\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
        x_off + MARGIN_L + plot_w / 2.0,
        panel.title
    );

    if let Some(g) = &panel.heat {
        let max = g.values().iter().cloned().fold(0.0f64, f64::max).max(1e-300);
        let (rx, ry) = (g.spec().resolution()[0], g.spec().resolution()[1]);
        let (w0, w1) = (g.spec().cell_width(0), g.spec().cell_width(1));
        for i in 0..rx {
            for j in 0..ry {
                let v = g.values()[i * ry + j] / max;
                if v < 1e-4 {
                    continue;
                }
                let cx = g.spec().lower()[0] + i as f64 * w0;
                let cy = g.spec().lower()[1] + j as f64 * w1;
                let _ = writeln!(
                    out,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                    px(cx),
                    py(cy + w1),
                    (px(cx + w0) - px(cx)).abs() + 0.3,
                    (py(cy) - py(cy + w1)).abs() + 0.3,
                    heat_color(v.sqrt())
                );
            }
        }
    }

    for s in &panel.scatters {
        for row in s.points.iter_rows() {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{}\" fill=\"{}\" fill-opacity=\"0.5\"/>",
                px(row[0]),
                py(row[1]),
                s.radius,
                s.color
            );
        }
    }

    for s in &panel.lines {
        let mut d = String::new();
        for (k, (&x, &y)) in s.xs.iter().zip(&s.ys).enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if k == 0 { "M" } else { "L" }, px(x), py(y));
        }
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\"/>",
            d.trim_end(),
            s.color
        );
    }

    // frame and ticks
    let _ = writeln!(
        out,
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>",
        x_off + MARGIN_L,
        MARGIN_T,
        plot_w,
        plot_h
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"9\" text-anchor=\"middle\">{}</text>",
            px(fx),
            PANEL_H - MARGIN_B + 14.0,
            fmt_tick(fx)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"9\" text-anchor=\"end\">{}</text>",
            x_off + MARGIN_L - 4.0,
            py(fy) + 3.0,
            fmt_tick(fy)
        );
    }

    // legend
    let labels: Vec<(&str, &str)> = panel
        .lines
        .iter()
        .map(|s| (s.label.as_str(), s.color.as_str()))
        .chain(panel.scatters.iter().map(|s| (s.label.as_str(), s.color.as_str())))
        .filter(|(l, _)| !l.is_empty())
        .collect();
    for (k, (label, color)) in labels.iter().enumerate() {
        let ly = MARGIN_T + 12.0 + 13.0 * k as f64;
        let lx = x_off + MARGIN_L + plot_w - 90.0;
        let _ = writeln!(
            out,
            "<rect x=\"{lx:.1}\" y=\"{:.1}\" width=\"14\" height=\"3\" fill=\"{color}\"/>",
            ly - 3.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{ly:.1}\" font-size=\"10\">{label}</text>",
            lx + 18.0
        );
    }
}

/// Render panels side by side into one standalone SVG document.
pub fn render_figure(panels: &[Panel]) -> Result<String> {
    if panels.is_empty() {
        return Err(SgError::Config("figure needs at least one panel".into()));
    }
    let total_w = PANEL_W * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w}\" height=\"{PANEL_H}\" viewBox=\"0 0 {total_w} {PANEL_H}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(out, "<rect width=\"{total_w}\" height=\"{PANEL_H}\" fill=\"white\"/>");
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, PANEL_W * i as f64);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Line series for a 1D density grid.
pub fn grid_series(label: &str, color: &str, grid: &DensityGrid) -> LineSeries {
    LineSeries {
        label: label.into(),
        color: color.into(),
        xs: grid.spec().axis_centers(0),
        ys: grid.values().to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{DensityGrid, GridSpec, MixtureDensity};

    #[test]
    fn figure_is_well_formed_svg() {
        let spec = GridSpec::new(vec![-3.0], vec![3.0], vec![60]).unwrap();
        let mix = MixtureDensity::two_mode(1.0, 0.3);
        let g = DensityGrid::from_density(&spec, |x| mix.density_at(x).unwrap()).unwrap();
        let panel = Panel {
            title: "density".into(),
            lines: vec![grid_series("p_t", BLUE, &g)],
            ..Panel::default()
        };
        let svg = render_figure(&[panel.clone(), panel]).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.contains("p_t"));
    }

    #[test]
    fn heat_color_endpoints() {
        assert_eq!(heat_color(0.0), "#440154");
        assert_eq!(heat_color(1.0), "#fde725");
    }

    #[test]
    fn deterministic_render() {
        let spec = GridSpec::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![8, 8]).unwrap();
        let g = DensityGrid::from_density(&spec, |x| (-x[0] * x[0] - x[1] * x[1]).exp()).unwrap();
        let panel = Panel { title: "heat".into(), heat: Some(g), ..Panel::default() };
        let a = render_figure(std::slice::from_ref(&panel)).unwrap();
        let b = render_figure(std::slice::from_ref(&panel)).unwrap();
        assert_eq!(a, b);
    }
}
