//! Minimal self-contained SVG line charts.
//!
//! One document holds several stacked panels. Each panel draws its series as
//! polylines over a plain axis frame with five ticks per side; optional
//! shaded vertical bands mark frequency windows. No external assets.

const PANEL_WIDTH: f64 = 800.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 42.0;
const TICKS: usize = 5;

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Shaded `[x_lo, x_hi]` bands behind the data.
    pub bands: Vec<(f64, f64)>,
}

struct Extent {
    lo: f64,
    hi: f64,
}

impl Extent {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo > hi {
            (lo, hi) = (0.0, 1.0);
        }
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        Extent { lo, hi }
    }

    fn map(&self, v: f64, pixel_lo: f64, pixel_hi: f64) -> f64 {
        pixel_lo + (v - self.lo) / (self.hi - self.lo) * (pixel_hi - pixel_lo)
    }
}

fn tick_text(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs();
    if (1e-3..1e4).contains(&magnitude) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn render_panel(panel: &Panel, y_offset: f64, out: &mut String) {
    let x_extent = Extent::of(panel.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let y_extent = Extent::of(panel.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let left = MARGIN_LEFT;
    let right = PANEL_WIDTH - MARGIN_RIGHT;
    let top = y_offset + MARGIN_TOP;
    let bottom = y_offset + PANEL_HEIGHT - MARGIN_BOTTOM;

    out.push_str(&format!("<g font-family=\"sans-serif\" font-size=\"12\">\n"));
    out.push_str(&format!(
        "<text x=\"{left}\" y=\"{}\" font-size=\"14\">{}</text>\n",
        y_offset + 18.0,
        panel.title
    ));

    for &(band_lo, band_hi) in &panel.bands {
        let x0 = x_extent.map(band_lo.max(x_extent.lo), left, right);
        let x1 = x_extent.map(band_hi.min(x_extent.hi), left, right);
        if x1 > x0 {
            out.push_str(&format!(
                "<rect x=\"{x0:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                 fill=\"#f4c7c3\" opacity=\"0.6\"/>\n",
                x1 - x0,
                bottom - top
            ));
        }
    }

    // frame and ticks
    out.push_str(&format!(
        "<rect x=\"{left:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
         fill=\"none\" stroke=\"#444\"/>\n",
        right - left,
        bottom - top
    ));
    for i in 0..TICKS {
        let f = i as f64 / (TICKS - 1) as f64;
        let xv = x_extent.lo + f * (x_extent.hi - x_extent.lo);
        let xp = x_extent.map(xv, left, right);
        out.push_str(&format!(
            "<line x1=\"{xp:.2}\" y1=\"{bottom:.2}\" x2=\"{xp:.2}\" y2=\"{:.2}\" stroke=\"#444\"/>\n",
            bottom + 4.0
        ));
        out.push_str(&format!(
            "<text x=\"{xp:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            bottom + 18.0,
            tick_text(xv)
        ));
        let yv = y_extent.lo + f * (y_extent.hi - y_extent.lo);
        let yp = y_extent.map(yv, bottom, top);
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{yp:.2}\" x2=\"{left:.2}\" y2=\"{yp:.2}\" stroke=\"#444\"/>\n",
            left - 4.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            left - 8.0,
            yp + 4.0,
            tick_text(yv)
        ));
    }
    if y_extent.lo < 0.0 && y_extent.hi > 0.0 {
        let zero = y_extent.map(0.0, bottom, top);
        out.push_str(&format!(
            "<line x1=\"{left:.2}\" y1=\"{zero:.2}\" x2=\"{right:.2}\" y2=\"{zero:.2}\" \
             stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n"
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
        (left + right) / 2.0,
        bottom + 34.0,
        panel.x_label
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" transform=\"rotate(-90 16 {:.2})\" text-anchor=\"middle\">{}</text>\n",
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        panel.y_label
    ));

    for (i, series) in panel.series.iter().enumerate() {
        let mut coords = String::new();
        for &(x, y) in series.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            coords.push_str(&format!(
                "{:.2},{:.2} ",
                x_extent.map(x, left, right),
                y_extent.map(y, bottom, top)
            ));
        }
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.4\"/>\n",
            coords.trim_end(),
            series.color
        ));
        let legend_x = left + 12.0 + 150.0 * i as f64;
        out.push_str(&format!(
            "<line x1=\"{legend_x:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\" \
             stroke-width=\"2\"/>\n",
            top + 10.0,
            legend_x + 22.0,
            top + 10.0,
            series.color
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
            legend_x + 28.0,
            top + 14.0,
            series.label
        ));
    }
    out.push_str("</g>\n");
}

/// A complete SVG document with the panels stacked vertically.
pub fn document(panels: &[Panel]) -> String {
    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PANEL_WIDTH}\" height=\"{height}\" \
         viewBox=\"0 0 {PANEL_WIDTH} {height}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for (i, panel) in panels.iter().enumerate() {
        render_panel(panel, PANEL_HEIGHT * i as f64, &mut out);
    }
    out.push_str("</svg>\n");
    out
}
