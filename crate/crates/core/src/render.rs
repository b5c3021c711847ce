//! ASCII and SVG renderings of an Ext chart in Adams coordinates:
//! `x = t - s` (stem), `y = s` (filtration).

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::fp::Prime;
use crate::resolution::chart::class_bidegree;
use crate::resolution::ExtChart;

/// Horizontal range of stems drawn for a chart.
pub fn stem_range(c: &ExtChart) -> (i32, i32) {
    let lo = c.ranks.keys().map(|&(s, t)| t - s as i32).min().unwrap_or(0).min(0);
    let hi = c.t_max.max(lo);
    (lo, hi)
}

fn cell_char(c: &ExtChart, stem: i32, s: usize) -> char {
    match c.at(stem, s) {
        None => '?',
        Some(0) => ' ',
        Some(n) if n <= 9 => char::from_digit(n as u32, 10).unwrap(),
        Some(_) => '#',
    }
}

/// One row per filtration (highest first), two characters per stem.
/// Blank is rank 0, a digit is the rank, `#` is 10 or more, `?` masked.
pub fn emit_ascii(c: &ExtChart) -> String {
    let (lo, hi) = stem_range(c);
    let mut out = String::new();
    for s in (0..=c.s_max).rev() {
        let row: String = (lo..=hi).map(|stem| format!(" {}", cell_char(c, stem, s))).collect();
        let _ = writeln!(out, "{s:>3} |{}", row.trim_end());
    }
    let _ = writeln!(out, "    +{}", "-".repeat(2 * (hi - lo + 1) as usize));
    let ticks: String = (lo..=hi).map(|stem| format!(" {}", stem.rem_euclid(10))).collect();
    let _ = writeln!(out, "     {}", ticks);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeStyle {
    pub class: String,
    /// Displacement of the edge in `(stem, s)`; must equal the class's.
    pub shift: (i32, i32),
    pub color: String,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartStyle {
    pub cell: f64,
    pub dot_radius: f64,
    pub margin: f64,
    pub edges: Vec<EdgeStyle>,
    pub mask_fill: String,
    pub dot_color: String,
}

impl ChartStyle {
    /// Edge styles for the named classes of `Ext(F_p)`, each displaced by
    /// its own bidegree.
    pub fn for_prime(p: Prime) -> Self {
        let palette: &[(&str, &str)] = match p.value() {
            2 => &[("h0", "#000000"), ("h1", "#1f5fbf"), ("h2", "#2a8c2a"), ("v1", "#b8860b")],
            _ => &[("h0", "#000000"), ("alpha", "#1f5fbf"), ("beta", "#b22222")],
        };
        let edges = palette
            .iter()
            .filter_map(|&(name, color)| {
                let (s, t) = class_bidegree(p, name)?;
                Some(EdgeStyle { class: name.into(), shift: (t - s as i32, s as i32), color: color.into(), width: 1.0 })
            })
            .collect();
        ChartStyle {
            cell: 24.0,
            dot_radius: 3.0,
            margin: 28.0,
            edges,
            mask_fill: "#c8c8c8".into(),
            dot_color: "#000000".into(),
        }
    }

    /// Styles whose displacement disagrees with the class bidegree.
    pub fn mismatched_edges(&self, p: Prime) -> Vec<String> {
        self.edges
            .iter()
            .filter(|e| class_bidegree(p, &e.class).map(|(s, t)| (t - s as i32, s as i32)) != Some(e.shift))
            .map(|e| e.class.clone())
            .collect()
    }
}

struct Geometry {
    lo: i32,
    s_max: usize,
    cell: f64,
    margin: f64,
    dot: f64,
}

impl Geometry {
    fn x(&self, stem: i32) -> f64 {
        self.margin + (stem - self.lo) as f64 * self.cell + self.cell / 2.0
    }
    fn y(&self, s: usize) -> f64 {
        self.margin + (self.s_max - s) as f64 * self.cell + self.cell / 2.0
    }
    /// Centre of dot `i` of `n` in a cell.
    fn dot(&self, stem: i32, s: usize, i: usize, n: usize) -> (f64, f64) {
        let step = (2.5 * self.dot).min(self.cell / (n as f64 + 1.0));
        let off = (i as f64 - (n as f64 - 1.0) / 2.0) * step;
        (self.x(stem) + off, self.y(s))
    }
}

/// An SVG 1.1 document: axes, masked cells, one dot per rank unit and the
/// product edges with a style. Output depends only on the inputs.
pub fn emit_svg(c: &ExtChart, style: &ChartStyle) -> String {
    let (lo, hi) = stem_range(c);
    let g = Geometry { lo, s_max: c.s_max, cell: style.cell, margin: style.margin, dot: style.dot_radius };
    let cols = (hi - lo + 1) as f64;
    let rows = (c.s_max + 1) as f64;
    let width = 2.0 * style.margin + cols * style.cell;
    let height = 2.0 * style.margin + rows * style.cell;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(&c.name));
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width:.1}" height="{height:.1}" fill="white"/>"#);

    let _ = writeln!(out, r#"<g class="mask" fill="{}" fill-opacity="0.5">"#, style.mask_fill);
    for s in 0..=c.s_max {
        for stem in lo..=hi {
            if c.at(stem, s).is_none() {
                let x = g.x(stem) - style.cell / 2.0;
                let y = g.y(s) - style.cell / 2.0;
                let _ = writeln!(
                    out,
                    r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}"/>"#,
                    style.cell, style.cell
                );
            }
        }
    }
    let _ = writeln!(out, "</g>");

    let x0 = style.margin;
    let y0 = height - style.margin;
    let _ = writeln!(out, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(out, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}"/>"#, width - style.margin);
    let _ = writeln!(out, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{:.2}"/>"#, style.margin);
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g class="labels" font-family="monospace" font-size="10" text-anchor="middle">"#);
    for stem in lo..=hi {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{stem}</text>"#, g.x(stem), y0 + 14.0);
    }
    for s in 0..=c.s_max {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{s}</text>"#, x0 - 10.0, g.y(s) + 3.0);
    }
    let _ = writeln!(out, "</g>");

    let by_class: BTreeMap<&str, &EdgeStyle> = style.edges.iter().map(|e| (e.class.as_str(), e)).collect();
    let _ = writeln!(out, r#"<g class="products" fill="none">"#);
    for e in c.product_edges() {
        let Some(st) = by_class.get(e.class.as_str()) else { continue };
        let (s1, t1, i) = e.from;
        let (s2, t2, j) = e.to;
        let (stem1, stem2) = (t1 - s1 as i32, t2 - s2 as i32);
        let (xa, ya) = g.dot(stem1, s1, i, c.rank(s1, t1));
        let (xb, yb) = g.dot(stem2, s2, j, c.rank(s2, t2));
        let _ = writeln!(
            out,
            r#"<line class="{}" x1="{xa:.2}" y1="{ya:.2}" x2="{xb:.2}" y2="{yb:.2}" stroke="{}" stroke-width="{:.2}"/>"#,
            escape(&e.class),
            st.color,
            st.width
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="dots" fill="{}">"#, style.dot_color);
    for (&(s, t), &n) in &c.ranks {
        if c.is_masked(s, t) {
            continue;
        }
        let stem = t - s as i32;
        for i in 0..n {
            let (x, y) = g.dot(stem, s, i, n);
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" data-stem="{stem}" data-s="{s}"/>"#,
                style.dot_radius
            );
        }
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let mut c = ExtChart::new("pt", Prime::TWO, 0, 0);
        c.ranks.insert((0, 0), 1);
        let a = emit_ascii(&c);
        assert_eq!(a.lines().next().unwrap(), "  0 | 1");
    }

    #[test]
    fn masked_cell() {
        let c = ExtChart::new("x", Prime::TWO, 1, 1);
        let a = emit_ascii(&c);
        // (stem 1, s 1) has t = 2 > t_max
        assert_eq!(a.lines().next().unwrap(), "  1 |   ?");
    }

    #[test]
    fn styles_match_bidegrees() {
        for p in [Prime::TWO, Prime::THREE] {
            assert!(ChartStyle::for_prime(p).mismatched_edges(p).is_empty());
        }
        let mut st = ChartStyle::for_prime(Prime::TWO);
        st.edges[0].shift = (1, 1);
        assert_eq!(st.mismatched_edges(Prime::TWO), vec!["h0".to_string()]);
    }
}
