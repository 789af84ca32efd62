//! SVG scatter plots of 2-D datasets, optionally over the region a model flags.

use std::fmt::Write as _;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::InstanceFlagger;

const NEG_COLOR: &str = "#3566a8";
const POS_COLOR: &str = "#d9822b";
const SUBGROUP_COLORS: [&str; 6] = [
    "#c0392b", "#27ae60", "#8e44ad", "#16a085", "#b7950b", "#2c3e50",
];
const SHADE_COLOR: &str = "#f6d6b8";

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub width: u32,
    pub height: u32,
    /// Cells per side of the decision grid.
    pub grid: usize,
    /// Padding around the data, as a fraction of its span.
    pub margin: f64,
    /// Per-instance subgroup ids (0 = background) for coloring.
    pub subgroups: Option<Vec<usize>>,
    /// Free text embedded as an XML comment.
    pub comment: Option<String>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            width: 640,
            height: 640,
            grid: 100,
            margin: 0.05,
            subgroups: None,
            comment: None,
        }
    }
}

/// Axis-aligned plotting window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    /// Bounding box of the data padded by `margin` of its span on every side.
    pub fn of(data: &Dataset, margin: f64) -> Result<Self> {
        require_2d(data)?;
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let pad = |lo: f64, hi: f64| {
            let span = if hi > lo { hi - lo } else { 1.0 };
            (lo - margin * span, hi + margin * span)
        };
        let axis = |j: usize| {
            let v = (0..data.len()).map(|i| data.features(i)[j]);
            let lo = v.clone().fold(f64::INFINITY, f64::min);
            let hi = v.fold(f64::NEG_INFINITY, f64::max);
            pad(lo, hi)
        };
        let (x_min, x_max) = axis(0);
        let (y_min, y_max) = axis(1);
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }

    /// Cell `(row, col)` of an `n`×`n` grid holding the point, row 0 at the bottom.
    pub fn cell_of(&self, x: f64, y: f64, n: usize) -> Option<(usize, usize)> {
        if !self.contains(x, y) {
            return None;
        }
        let idx =
            |v: f64, lo: f64, hi: f64| (((v - lo) / (hi - lo) * n as f64) as usize).min(n - 1);
        Some((
            idx(y, self.y_min, self.y_max),
            idx(x, self.x_min, self.x_max),
        ))
    }
}

fn require_2d(data: &Dataset) -> Result<()> {
    if data.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: data.dim(),
        });
    }
    Ok(())
}

/// Flags at the center of each cell of an `n`×`n` grid, row-major from the bottom row.
pub fn decision_grid<F: InstanceFlagger + ?Sized>(
    flagger: &F,
    bounds: &Bounds,
    n: usize,
) -> Result<Vec<bool>> {
    let dx = (bounds.x_max - bounds.x_min) / n as f64;
    let dy = (bounds.y_max - bounds.y_min) / n as f64;
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        let y = bounds.y_min + (r as f64 + 0.5) * dy;
        for c in 0..n {
            let x = bounds.x_min + (c as f64 + 0.5) * dx;
            out.push(flagger.flag(&[x, y])?);
        }
    }
    Ok(out)
}

fn escape_comment(s: &str) -> String {
    s.replace("--", "- -")
}

/// Negatives are drawn as triangles, positives as circles; one marker per instance.
pub fn render_svg<F: InstanceFlagger + ?Sized>(
    data: &Dataset,
    model: Option<&F>,
    opts: &PlotOptions,
) -> Result<String> {
    require_2d(data)?;
    if let Some(m) = model {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim(),
            });
        }
    }
    if let Some(g) = &opts.subgroups {
        if g.len() != data.len() {
            return Err(Error::LengthMismatch {
                expected: data.len(),
                found: g.len(),
            });
        }
    }
    let b = Bounds::of(data, opts.margin)?;
    let (w, h) = (opts.width as f64, opts.height as f64);
    let px = |x: f64| (x - b.x_min) / (b.x_max - b.x_min) * w;
    let py = |y: f64| h - (y - b.y_min) / (b.y_max - b.y_min) * h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        opts.width, opts.height, opts.width, opts.height
    );
    if let Some(c) = &opts.comment {
        let _ = writeln!(s, "<!--\n{}\n-->", escape_comment(c.trim_end()));
    }
    let _ = writeln!(
        s,
        r#"<!-- bounds x=[{}, {}] y=[{}, {}] -->"#,
        b.x_min, b.x_max, b.y_min, b.y_max
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    );

    if let Some(m) = model {
        let n = opts.grid;
        let cells = decision_grid(m, &b, n)?;
        let (cw, ch) = (w / n as f64, h / n as f64);
        let _ = writeln!(
            s,
            r#"<g class="region" fill="{SHADE_COLOR}" stroke="none">"#
        );
        for r in 0..n {
            // One rect per horizontal run of flagged cells.
            let mut c = 0;
            while c < n {
                if !cells[r * n + c] {
                    c += 1;
                    continue;
                }
                let start = c;
                while c < n && cells[r * n + c] {
                    c += 1;
                }
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
                    start as f64 * cw,
                    h - (r + 1) as f64 * ch,
                    (c - start) as f64 * cw,
                    ch
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }

    let _ = writeln!(s, r#"<g class="points" stroke="black" stroke-width="0.4">"#);
    for (i, inst) in data.instances().iter().enumerate() {
        let (cx, cy) = (px(inst.features[0]), py(inst.features[1]));
        let group = opts.subgroups.as_ref().map_or(0, |g| g[i]);
        let fill = if group > 0 {
            SUBGROUP_COLORS[(group - 1) % SUBGROUP_COLORS.len()]
        } else if inst.label.is_positive() {
            POS_COLOR
        } else {
            NEG_COLOR
        };
        if inst.label.is_positive() {
            let _ = writeln!(
                s,
                r#"<circle class="pos" cx="{cx:.2}" cy="{cy:.2}" r="3.5" fill="{fill}"/>"#
            );
        } else {
            let _ = writeln!(
                s,
                r#"<polygon class="neg" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{fill}"/>"#,
                cx,
                cy - 4.5,
                cx - 4.0,
                cy + 3.0,
                cx + 4.0,
                cy + 3.0
            );
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="8" y="16" font-family="sans-serif" font-size="12">triangle: negative, circle: positive</text>"#
    );
    s.push_str("</svg>\n");
    Ok(s)
}
