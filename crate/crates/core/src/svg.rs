//! Minimal static SVG plotting for the command-line figures.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::output::Table;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn fwd(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::Log => v.log10(),
        }
    }

    fn slope(self, v: f64) -> f64 {
        match self {
            Scale::Linear => 1.0,
            Scale::Log => 1.0 / (v * std::f64::consts::LN_10),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

#[derive(Debug, Clone)]
pub struct Heat {
    /// Cell centres and values.
    pub cells: Vec<(f64, f64, f64)>,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
    pub arrows: Vec<(f64, f64, f64, f64)>,
    pub heat: Option<Heat>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            series: Vec::new(),
            arrows: Vec::new(),
            heat: None,
        }
    }

    pub fn scales(mut self, x: Scale, y: Scale) -> Self {
        self.x_scale = x;
        self.y_scale = y;
        self
    }

    pub fn line(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { label: label.into(), points, style: Style::Line });
        self
    }

    pub fn markers(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { label: label.into(), points, style: Style::Markers });
        self
    }

    fn usable(&self, (x, y): (f64, f64)) -> bool {
        let ok = |s: Scale, v: f64| v.is_finite() && (s == Scale::Linear || v > 0.0);
        ok(self.x_scale, x) && ok(self.y_scale, y)
    }

    fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        let mut pts: Vec<(f64, f64)> = self.series.iter().flat_map(|s| s.points.iter().copied()).collect();
        pts.extend(self.arrows.iter().map(|a| (a.0, a.1)));
        if let Some(h) = &self.heat {
            pts.extend(h.cells.iter().map(|c| (c.0, c.1)));
        }
        let pts: Vec<(f64, f64)> = pts
            .into_iter()
            .filter(|&p| self.usable(p))
            .map(|(x, y)| (self.x_scale.fwd(x), self.y_scale.fwd(y)))
            .collect();
        if pts.is_empty() {
            return None;
        }
        let fold = |f: fn(&(f64, f64)) -> f64| {
            pts.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
        };
        let (x0, x1) = fold(|p| p.0);
        let (y0, y1) = fold(|p| p.1);
        let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, b + 0.5) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Some((x0, x1, y0, y1))
    }

    pub fn render(&self) -> Result<String> {
        let (x0, x1, y0, y1) = self.bounds().ok_or_else(|| Error::Render("nothing to plot".into()))?;
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |v: f64| LEFT + (self.x_scale.fwd(v) - x0) / (x1 - x0) * pw;
        let sy = |v: f64| TOP + ph - (self.y_scale.fwd(v) - y0) / (y1 - y0) * ph;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        if let Some(h) = &self.heat {
            let cw = pw / h.nx as f64;
            let ch = ph / h.ny as f64;
            let vmax = h.cells.iter().map(|c| c.2.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            for &(x, y, v) in &h.cells {
                if !self.usable((x, y)) {
                    continue;
                }
                let t = (v.abs() / vmax).powf(0.25);
                let shade = (255.0 * (1.0 - t)).round() as u8;
                let fill =
                    if v < 0.0 { format!("rgb(255,{shade},{shade})") } else { format!("rgb({shade},{shade},255)") };
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                    sx(x) - cw / 2.0,
                    sy(y) - ch / 2.0,
                    cw + 0.5,
                    ch + 0.5
                );
            }
        }
        let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = x0 + f * (x1 - x0);
            let yv = y0 + f * (y1 - y0);
            let px = LEFT + f * pw;
            let py = TOP + ph - f * ph;
            let lab = |sc: Scale, v: f64| match sc {
                Scale::Linear => format!("{v:.3e}"),
                Scale::Log => format!("1e{v:.1}"),
            };
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 18.0,
                lab(self.x_scale, xv)
            );
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 5.0,
                LEFT - 7.0,
                py + 4.0,
                lab(self.y_scale, yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            W / 2.0,
            esc(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 15.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            TOP + ph / 2.0,
            esc(&self.y_label)
        );
        for &(x, y, dx, dy) in &self.arrows {
            if !self.usable((x, y)) {
                continue;
            }
            let (px, py) = (sx(x), sy(y));
            let dx = dx * self.x_scale.slope(x) * pw / (x1 - x0);
            let dy = dy * self.y_scale.slope(y) * ph / (y1 - y0);
            let n = (dx * dx + dy * dy).sqrt();
            if n == 0.0 || !n.is_finite() {
                continue;
            }
            let (ux, uy) = (dx / n * 10.0, -dy / n * 10.0);
            let _ = writeln!(
                s,
                r##"<line x1="{px:.2}" y1="{py:.2}" x2="{:.2}" y2="{:.2}" stroke="#777"/><circle cx="{:.2}" cy="{:.2}" r="1.5" fill="#777"/>"##,
                px + ux,
                py + uy,
                px + ux,
                py + uy
            );
        }
        let mut legend = 0;
        for (k, ser) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let pts: Vec<(f64, f64)> = ser.points.iter().copied().filter(|&p| self.usable(p)).collect();
            match ser.style {
                Style::Line => {
                    let mut d = String::new();
                    for (j, &(x, y)) in pts.iter().enumerate() {
                        let _ = write!(d, "{}{:.2},{:.2} ", if j == 0 { "M" } else { "L" }, sx(x), sy(y));
                    }
                    let _ =
                        writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
                }
                Style::Markers => {
                    for &(x, y) in &pts {
                        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
                    }
                }
            }
            if ser.label.is_empty() {
                continue;
            }
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
                LEFT + 10.0,
                TOP + 16.0 + 14.0 * legend as f64,
                esc(&ser.label)
            );
            legend += 1;
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    Pop,
    DynamicRoute,
    DcLocus,
    Nyquist,
    RezMap,
    TrDet,
    Nullclines,
    PhasePortrait,
    Bifurcation,
}

fn col(t: &Table, name: &str) -> Result<Vec<f64>> {
    t.column(name).ok_or_else(|| Error::Render(format!("table `{}` lacks numeric column `{name}`", t.name)))
}

fn zip(a: Vec<f64>, b: Vec<f64>) -> Vec<(f64, f64)> {
    a.into_iter().zip(b).collect()
}

/// Renders one of the standard figure kinds from a table with the matching
/// column schema.
pub fn render_figure(t: &Table, kind: FigureKind) -> Result<String> {
    if t.rows.is_empty() {
        return Err(Error::Render(format!("table `{}` is empty", t.name)));
    }
    let plot = match kind {
        FigureKind::Pop | FigureKind::DynamicRoute => {
            let title = if kind == FigureKind::Pop { "Power-off plot" } else { "Dynamic route" };
            Plot::new(title, "x", "dx/dt (1/s)")
                .scales(Scale::Log, Scale::Linear)
                .line("f_x", zip(col(t, "x")?, col(t, "dxdt_per_s")?))
        }
        FigureKind::DcLocus => Plot::new("DC locus", "i_Q (A)", "v_Q (V)")
            .scales(Scale::Log, Scale::Linear)
            .line("v_Q(i_Q)", zip(col(t, "i_q_A")?, col(t, "v_q_V")?)),
        FigureKind::Nyquist => {
            let re = col(t, "re_ohm")?;
            let im = col(t, "im_ohm")?;
            let lower: Vec<(f64, f64)> = re.iter().zip(&im).rev().map(|(&a, &b)| (a, -b)).collect();
            Plot::new("Nyquist plot", "Re Z (ohm)", "Im Z (ohm)").line("f > 0", zip(re, im)).line("f < 0", lower)
        }
        FigureKind::RezMap => return render_rez_map(t, None),
        FigureKind::TrDet => {
            let tr = col(t, "tr")?;
            let det = col(t, "det")?;
            let m = tr.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let parabola = crate::roots::linspace(-m, m, 101).into_iter().map(|x| (x, x * x / 4.0)).collect();
            Plot::new("Trace-determinant plane", "tr (1/s)", "det (1/s^2)")
                .line("det = tr^2/4", parabola)
                .markers("fixed points", zip(tr, det))
        }
        FigureKind::Nullclines => return render_nullclines(t, None, None),
        FigureKind::PhasePortrait => {
            let x = col(t, "x")?;
            let v = col(t, "v_V")?;
            let mut p = Plot::new("Phase portrait", "x", "v (V)");
            match t.column("orbit") {
                Some(id) => {
                    let mut start = 0;
                    for k in 1..=id.len() {
                        if k == id.len() || id[k] != id[start] {
                            let label = if start == 0 { "orbits" } else { "" };
                            p = p.line(label, zip(x[start..k].to_vec(), v[start..k].to_vec()));
                            start = k;
                        }
                    }
                }
                None => p = p.line("orbit", zip(x, v)),
            }
            p
        }
        FigureKind::Bifurcation => {
            let p = col(t, "param")?;
            Plot::new("Bifurcation diagram", "parameter", "v (V)")
                .markers("v max", zip(p.clone(), col(t, "v_max_V")?))
                .markers("v min", zip(p, col(t, "v_min_V")?))
        }
    };
    plot.render()
}

/// Heat map of Re Z over (i_Q, f) from `i_A, f_Hz, re_ohm` rows, with the
/// Re Z = 0 contour overlaid from `contour` (`i_A, f_Hz`) when given.
pub fn render_rez_map(map: &Table, contour: Option<&Table>) -> Result<String> {
    if map.rows.is_empty() {
        return Err(Error::Render(format!("table `{}` is empty", map.name)));
    }
    let i = col(map, "i_A")?;
    let f = col(map, "f_Hz")?;
    let re = col(map, "re_ohm")?;
    let mut ui = i.clone();
    ui.sort_by(f64::total_cmp);
    ui.dedup();
    let nx = ui.len();
    let ny = map.rows.len() / nx.max(1);
    let cells: Vec<(f64, f64, f64)> = i.iter().zip(&f).zip(&re).map(|((&a, &b), &c)| (a, b, c)).collect();
    let mut p = Plot::new("Re Z(i_Q, f)", "i_Q (A)", "f (Hz)").scales(Scale::Log, Scale::Log);
    p.heat = Some(Heat { cells, nx, ny });
    if let Some(c) = contour.filter(|c| !c.rows.is_empty()) {
        p = p.markers("Re Z = 0", zip(col(c, "i_A")?, col(c, "f_Hz")?));
    }
    p.render()
}

/// Both nullclines from `x, v0_V, v1_V` rows, with direction-field glyphs
/// from `field` (`x, v_V, dx, dv`) and fixed points from `points`
/// (`x_q, v_q`) when given.
pub fn render_nullclines(curves: &Table, field: Option<&Table>, points: Option<&Table>) -> Result<String> {
    if curves.rows.is_empty() {
        return Err(Error::Render(format!("table `{}` is empty", curves.name)));
    }
    let x = col(curves, "x")?;
    let v1 = zip(x.clone(), col(curves, "v1_V")?);
    let mut v_top = v1.iter().map(|p| p.1).fold(0.0, f64::max);
    let mut arrows = Vec::new();
    if let Some(f) = field {
        let (fx, fv, dx, dv) = (col(f, "x")?, col(f, "v_V")?, col(f, "dx")?, col(f, "dv")?);
        arrows = (0..fx.len()).map(|k| (fx[k], fv[k], dx[k], dv[k])).collect();
        v_top = fv.iter().copied().fold(v_top, f64::max);
    }
    // the x-nullcline runs off to large v as x -> 1; keep the window on the circuit's range
    let v_top = 1.1 * v_top;
    let v0: Vec<(f64, f64)> = zip(x, col(curves, "v0_V")?).into_iter().filter(|p| p.1 <= v_top).collect();
    let mut p = Plot::new("Nullclines", "x", "v (V)").line("dx/dt = 0", v0).line("dv/dt = 0", v1);
    p.arrows = arrows;
    if let Some(q) = points.filter(|q| !q.rows.is_empty()) {
        p = p.markers("fixed points", zip(col(q, "x_q")?, col(q, "v_q")?));
    }
    p.render()
}
