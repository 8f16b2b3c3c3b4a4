//! SVG phase portraits.

use std::fmt::Write as _;
use std::path::Path;

use foldsaddle_core::flow::{integrate, lower_arc_closed, upper_arc_closed, ArcSide};
use foldsaddle_core::sigma::pseudo_equilibria;
use foldsaddle_core::structures::find_canard_cycles;
use foldsaddle_core::{FilippovSystem, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitOptions {
    /// Trajectories started on Σ; the same count starts above and below.
    pub fan: usize,
    pub max_time: f64,
    pub width: f64,
    pub height: f64,
    pub cycles: bool,
}

impl Default for PortraitOptions {
    fn default() -> Self {
        PortraitOptions { fan: 9, max_time: 20.0, width: 600.0, height: 600.0, cycles: true }
    }
}

struct View {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    w: f64,
    h: f64,
}

impl View {
    fn px(&self, p: Point) -> (f64, f64) {
        ((p.x - self.x0) / (self.x1 - self.x0) * self.w, (self.y1 - p.y) / (self.y1 - self.y0) * self.h)
    }
}

fn polyline(out: &mut String, v: &View, pts: &[Point], class: &str) {
    if pts.len() < 2 {
        return;
    }
    let mut d = String::new();
    for p in pts {
        let (x, y) = v.px(*p);
        let _ = write!(d, "{x:.3},{y:.3} ");
    }
    let _ = writeln!(out, r#"  <polyline class="{class}" points="{}"/>"#, d.trim_end());
}

fn line(out: &mut String, v: &View, a: Point, b: Point, class: &str, extra: &str) {
    let (x1, y1) = v.px(a);
    let (x2, y2) = v.px(b);
    let _ = writeln!(out, r#"  <line class="{class}" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"{extra}/>"#);
}

/// Renders the portrait as an SVG 1.1 document.
pub fn render_portrait(sys: &FilippovSystem, opts: &PortraitOptions) -> String {
    let w = sys.window;
    let v = View { x0: w.xmin, x1: w.xmax, y0: w.ymin, y1: w.ymax, w: opts.width, h: opts.height };
    let p = sys.params;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{1}" viewBox="0 0 {0} {1}">"#,
        opts.width, opts.height
    );
    let _ = writeln!(
        out,
        "  <title>{} lambda={} alpha={} beta={}</title>",
        p.tau.name(),
        p.lambda,
        p.alpha,
        p.beta
    );
    out.push_str(
        "  <style>\n    .sigma { stroke: black; stroke-width: 1.5; }\n    .locus { stroke: gray; stroke-width: 1; stroke-dasharray: 2 3; }\n    \
         .upper, .lower, .cycle { fill: none; stroke-width: 1; }\n    .upper { stroke: #1f5fa8; }\n    .lower { stroke: #a8321f; }\n    \
         .cycle { stroke: #197a2e; stroke-width: 2; }\n    .sliding { fill: none; stroke: black; stroke-width: 4; }\n    \
         .key-point { fill: black; }\n    .pseudo-equilibrium { fill: white; stroke: black; stroke-width: 1.5; }\n    text { font: 12px sans-serif; }\n  </style>\n",
    );
    let _ = writeln!(out, r#"  <defs><clipPath id="frame"><rect x="0" y="0" width="{}" height="{}"/></clipPath></defs>"#, opts.width, opts.height);
    out.push_str("  <g clip-path=\"url(#frame)\">\n");

    // Loci X.f = 0 and Y.f = 0.
    let vertical = |out: &mut String, x: f64, id: &str| {
        if x >= w.xmin && x <= w.xmax {
            line(out, &v, Point::new(x, w.ymin), Point::new(x, w.ymax), "locus", &format!(r#" id="{id}""#));
        }
    };
    vertical(&mut out, p.lambda, "locus-xf");
    if let Some(x) = sys.second_upper_root() {
        vertical(&mut out, x, "locus-xf2");
    }
    match sys.lower_fold_line_slope() {
        Some(k) => line(
            &mut out,
            &v,
            Point::new(w.xmin, k * w.xmin - p.beta),
            Point::new(w.xmax, k * w.xmax - p.beta),
            "locus",
            r#" id="locus-yf""#,
        ),
        None => vertical(&mut out, 0.0, "locus-yf"),
    }

    let mut starts: Vec<Point> = Vec::new();
    let n = opts.fan;
    for k in 0..n {
        let x = w.xmin + (w.xmax - w.xmin) * (k as f64 + 0.5) / n as f64;
        starts.extend([Point::on_sigma(x), Point::new(x, 0.5 * w.ymax), Point::new(x, 0.5 * w.ymin)]);
    }
    for s in starts {
        let Ok(tr) = integrate(sys, s, opts.max_time) else { continue };
        for a in &tr.arcs {
            let class = match a.side {
                ArcSide::Upper => "upper",
                ArcSide::Lower => "lower",
                ArcSide::Sliding => "sliding",
            };
            polyline(&mut out, &v, &a.samples, class);
        }
    }
    if opts.cycles {
        for c in find_canard_cycles(sys, (w.xmin, w.xmax)) {
            if let (Some(up), Some(down)) = (upper_arc_closed(sys, c.fixed_abscissa), lower_arc_closed(sys, c.upper_landing)) {
                let mut pts = up.samples.clone();
                pts.extend(down.samples.iter().skip(1));
                polyline(&mut out, &v, &pts, "cycle");
            }
        }
    }
    out.push_str("  </g>\n");
    line(&mut out, &v, Point::new(w.xmin, 0.0), Point::new(w.xmax, 0.0), "sigma", r#" id="sigma""#);

    let kp = sys.key_points();
    let mut named = vec![("d", kp.d), ("S", kp.s)];
    named.extend(kp.e().map(|q| ("e", q)));
    named.extend(kp.i().map(|q| ("i", q)));
    named.extend(kp.h.map(|q| ("h", q)));
    named.extend(kp.j.map(|q| ("j", q)));
    for (name, q) in named {
        let (x, y) = v.px(q);
        let _ = writeln!(
            out,
            r#"  <circle class="key-point" id="pt-{name}" data-x="{}" data-y="{}" cx="{x:.3}" cy="{y:.3}" r="3"/>"#,
            q.x, q.y
        );
        let _ = writeln!(out, r#"  <text x="{:.3}" y="{:.3}">{name}</text>"#, x + 4.0, y - 4.0);
    }
    for pe in pseudo_equilibria(sys, (w.xmin, w.xmax)) {
        let (x, y) = v.px(Point::on_sigma(pe.abscissa));
        let _ = writeln!(out, r#"  <circle class="pseudo-equilibrium" data-x="{}" cx="{x:.3}" cy="{y:.3}" r="4"/>"#, pe.abscissa);
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_portrait(sys: &FilippovSystem, path: &Path, opts: &PortraitOptions) -> std::io::Result<()> {
    std::fs::write(path, render_portrait(sys, opts))
}

/// Names of the key points a portrait of `sys` must show.
pub fn expected_points(sys: &FilippovSystem) -> Vec<&'static str> {
    let kp = sys.key_points();
    let mut v = vec!["d", "S"];
    if kp.e().is_some() {
        v.push("e");
    }
    if kp.i().is_some() {
        v.push("i");
    }
    if kp.h.is_some() {
        v.push("h");
    }
    if kp.j.is_some() {
        v.push("j");
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use foldsaddle_core::{make_system, TauKind};

    #[test]
    fn parses_and_has_one_sigma() {
        let sys = make_system(TauKind::Inv, 0.0, -1.0, 0.0).unwrap();
        let s = render_portrait(&sys, &PortraitOptions { fan: 3, ..Default::default() });
        let doc = roxmltree::Document::parse(&s).unwrap();
        let sig = doc.descendants().filter(|n| n.attribute("class") == Some("sigma")).count();
        assert_eq!(sig, 1);
        for name in expected_points(&sys) {
            assert!(doc.descendants().any(|n| n.attribute("id") == Some(&*format!("pt-{name}"))));
        }
    }
}
