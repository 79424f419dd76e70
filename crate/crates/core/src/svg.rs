//! SVG 1.1 drawings of grids, puzzles, edge values and G₀ circuits.
//!
//! Geometry is computed on lattice points and only converted to floats when
//! coordinates are printed.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::grid::{ConvexGrid, DirEdge, LatticePoint, LittleTriangle};
use crate::puzzle::Puzzle;
use crate::rational::{self, Rational};
use crate::rigidity::{self, G0Edge};

const SCALE: f64 = 60.0;
const MARGIN: f64 = 30.0;

#[derive(Clone, Debug, Default)]
pub struct Drawing<'a> {
    pub puzzle: Option<&'a Puzzle>,
    /// Values printed at edge midpoints.
    pub values: Option<&'a BTreeMap<DirEdge, Rational>>,
    pub circuit: Option<&'a [G0Edge]>,
}

struct Frame {
    x0: f64,
    y1: f64,
}

impl Frame {
    fn point(&self, p: LatticePoint) -> (f64, f64) {
        let (x, y) = p.cartesian();
        (MARGIN + (x - self.x0) * SCALE, MARGIN + (self.y1 - y) * SCALE)
    }

    fn mid(&self, e: DirEdge) -> (f64, f64) {
        let (a, b) = (self.point(e.tail), self.point(e.head()));
        ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0)
    }

    fn polygon(&self, t: &LittleTriangle) -> String {
        t.vertices().iter().map(|&v| self.point(v)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ")
    }
}

pub fn render(grid: &ConvexGrid, d: &Drawing) -> String {
    let pts: Vec<(f64, f64)> = grid.vertices().iter().map(|v| v.cartesian()).collect();
    let x0 = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x1 = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y0 = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let y1 = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let f = Frame { x0, y1 };
    let (w, h) = (2.0 * MARGIN + (x1 - x0) * SCALE, 2.0 * MARGIN + (y1 - y0) * SCALE);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    s.push_str(concat!(
        "<defs>\n",
        r#"<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto">"#,
        r##"<path d="M0,0 L10,5 L0,10 z" fill="#1f5fbf"/></marker>"##,
        "\n",
        r#"<marker id="arrow-red" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto">"#,
        r##"<path d="M0,0 L10,5 L0,10 z" fill="#c0392b"/></marker>"##,
        "\n</defs>\n",
    ));

    let rhombi = d.puzzle.map(|p| rigidity::split_rhombi(grid, p)).unwrap_or_default();
    let shaded: Vec<LittleTriangle> = rhombi.iter().flat_map(|&(n, t)| [n, t]).collect();
    s.push_str("<g id=\"triangles\">\n");
    for t in grid.triangles() {
        let fill = if shaded.contains(t) { "#e6eef9" } else { "#ffffff" };
        let _ = writeln!(s, r##"<polygon points="{}" fill="{fill}" stroke="#9a9a9a" stroke-width="1"/>"##, f.polygon(t));
    }
    if let Some(p) = d.puzzle {
        for t in &p.triangles {
            let _ = writeln!(s, r##"<polygon points="{}" fill="#bdbdbd" stroke="#000000" stroke-width="4"/>"##, f.polygon(t));
        }
    }
    s.push_str("</g>\n");

    if let Some(p) = d.puzzle {
        s.push_str("<g id=\"paths\">\n");
        for q in &p.paths {
            if q.is_degenerate() {
                let (x, y) = f.mid(q.from);
                let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="#1f5fbf"/>"##);
                continue;
            }
            let Some(vs) = q.vertices(grid) else { continue };
            let pts: Vec<String> =
                vs.iter().map(|&e| f.mid(grid.edge(e))).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                s,
                r##"<polyline points="{}" fill="none" stroke="#1f5fbf" stroke-width="3" marker-end="url(#arrow)"/>"##,
                pts.join(" ")
            );
        }
        s.push_str("</g>\n");
    }

    if let Some(c) = d.circuit {
        s.push_str("<g id=\"circuit\">\n");
        for x in c {
            let (a, b) = (f.point(x.from()), f.point(x.to()));
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c0392b" stroke-width="3" marker-end="url(#arrow-red)"/>"##,
                a.0, a.1, b.0, b.1
            );
        }
        s.push_str("</g>\n");
    }

    if let Some(vals) = d.values {
        s.push_str("<g id=\"values\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">\n");
        for (e, v) in vals {
            let (x, y) = f.mid(*e);
            let _ = writeln!(s, r##"<text x="{x:.2}" y="{:.2}" fill="#333333">{}</text>"##, y + 4.0, rational::format(v));
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}
