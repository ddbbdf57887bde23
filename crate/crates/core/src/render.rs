//! Hand-written SVG for Ford domains and branch systems.

use std::fmt::Write as _;

use crate::branch::{Branch, BranchSystem, Facing};
use crate::ford::{FordDomain, Strip};

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 30.0;

/// Affine map from the upper half-plane window to SVG pixels, with equal
/// scale on both axes so circles stay circles.
struct View {
    x0: f64,
    scale: f64,
    height: f64,
}

impl View {
    fn new(xmin: f64, xmax: f64, ymax: f64) -> Self {
        let scale = (WIDTH - 2.0 * MARGIN) / (xmax - xmin).max(1e-9);
        View {
            x0: xmin,
            scale,
            height: ymax * scale + 2.0 * MARGIN,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) * self.scale
    }

    fn py(&self, y: f64) -> f64 {
        self.height - MARGIN - y * self.scale
    }

    fn axis_y(&self) -> f64 {
        self.py(0.0)
    }
}

fn window(domain: Option<&FordDomain>, strip: Option<Strip>, extra: &[f64]) -> (f64, f64, f64) {
    let mut xs: Vec<f64> = extra.to_vec();
    let mut ymax: f64 = 1.0;
    if let Some(d) = domain {
        for s in &d.sides {
            xs.push(s.sphere.center - s.sphere.radius);
            xs.push(s.sphere.center + s.sphere.radius);
            ymax = ymax.max(s.sphere.radius);
        }
    }
    if let Some(s) = strip {
        xs.push(s.left);
        xs.push(s.right);
    }
    if xs.is_empty() {
        return (-1.0, 1.0, 1.0);
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.05 * (hi - lo).max(1.0);
    (lo - pad, hi + pad, ymax * 1.25)
}

fn header(out: &mut String, view: &View) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#,
        w = WIDTH,
        h = view.height
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn axis(out: &mut String, view: &View) {
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="0" y1="{y:.3}" x2="{w:.0}" y2="{y:.3}" stroke="black" stroke-width="1"/>"#,
        y = view.axis_y(),
        w = WIDTH
    );
}

/// Closed path of the common exterior K inside the window.
fn exterior_path(view: &View, domain: &FordDomain, xmin: f64, xmax: f64, ytop: f64) -> String {
    let mut p = String::new();
    let _ = write!(
        p,
        "M {:.3} {:.3} L {:.3} {:.3}",
        view.px(xmin),
        view.py(ytop),
        view.px(xmin),
        view.axis_y()
    );
    for s in &domain.sides {
        let r = s.sphere.radius * view.scale;
        let _ = write!(
            p,
            " L {:.3} {:.3} A {r:.3} {r:.3} 0 0 1 {:.3} {:.3}",
            view.px(s.start.x),
            view.py(s.start.y),
            view.px(s.end.x),
            view.py(s.end.y)
        );
    }
    let _ = write!(
        p,
        " L {:.3} {:.3} L {:.3} {:.3} Z",
        view.px(xmax),
        view.axis_y(),
        view.px(xmax),
        view.py(ytop)
    );
    p
}

fn domain_layer(
    out: &mut String,
    view: &View,
    domain: &FordDomain,
    strip: Option<Strip>,
    bounds: (f64, f64, f64),
) {
    let (xmin, xmax, ymax) = bounds;
    let k = exterior_path(view, domain, xmin, xmax, ymax);
    let _ = writeln!(
        out,
        r##"<path class="exterior" d="{k}" fill="#dde6f0" stroke="none"/>"##
    );
    if let Some(st) = strip {
        let _ = writeln!(
            out,
            r#"<clipPath id="strip"><rect x="{:.3}" y="0" width="{:.3}" height="{:.3}"/></clipPath>"#,
            view.px(st.left),
            view.px(st.right) - view.px(st.left),
            view.height
        );
        let _ = writeln!(
            out,
            r##"<path class="strip-region" d="{k}" fill="#9fb7d4" stroke="none" clip-path="url(#strip)"/>"##
        );
        for x in [st.left, st.right] {
            let _ = writeln!(
                out,
                r#"<line class="wall" x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}" stroke="gray" stroke-dasharray="4 3"/>"#,
                view.py(ymax),
                view.axis_y(),
                x = view.px(x)
            );
        }
    }
    let mut sides: Vec<_> = domain.sides.iter().collect();
    sides.sort_by(|a, b| a.start.x.total_cmp(&b.start.x));
    for s in &sides {
        let (c, r) = (s.sphere.center, s.sphere.radius);
        let rp = r * view.scale;
        let _ = writeln!(
            out,
            r#"<path class="sphere" d="M {:.3} {:.3} A {rp:.3} {rp:.3} 0 0 1 {:.3} {:.3}" fill="none" stroke="gray" stroke-width="0.6"/>"#,
            view.px(c - r),
            view.axis_y(),
            view.px(c + r),
            view.axis_y()
        );
    }
    for s in &sides {
        let rp = s.sphere.radius * view.scale;
        let _ = writeln!(
            out,
            r#"<path class="side" d="M {:.3} {:.3} A {rp:.3} {rp:.3} 0 0 1 {:.3} {:.3}" fill="none" stroke="black" stroke-width="2"/>"#,
            view.px(s.start.x),
            view.py(s.start.y),
            view.px(s.end.x),
            view.py(s.end.y)
        );
    }
}

/// The Ford domain: real axis, isometric spheres, the common exterior K
/// and, with a strip, the part W between the walls.
pub fn render_domain_svg(domain: Option<&FordDomain>, strip: Option<Strip>) -> String {
    let bounds = window(domain, strip, &[]);
    let view = View::new(bounds.0, bounds.1, bounds.2);
    let mut out = String::new();
    header(&mut out, &view);
    if let Some(d) = domain {
        domain_layer(&mut out, &view, d, strip, bounds);
    }
    axis(&mut out, &view);
    out.push_str("</svg>\n");
    out
}

fn subscript(n: usize) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    n.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap_or(0) as usize])
        .collect()
}

/// Branch bases as vertical lines with one facing stripe and label per
/// branch; branches listed in `active` are drawn solid.
pub fn render_branches_svg(
    sys: &BranchSystem,
    active: &[usize],
    domain: Option<&FordDomain>,
    strip: Option<Strip>,
) -> String {
    let xs = sys.x_values();
    let bounds = window(domain, strip, &xs);
    let view = View::new(bounds.0, bounds.1, bounds.2);
    let mut out = String::new();
    header(&mut out, &view);
    if let Some(d) = domain {
        domain_layer(&mut out, &view, d, strip, bounds);
    }
    axis(&mut out, &view);
    let top = view.py(bounds.2);
    for x in &xs {
        let _ = writeln!(
            out,
            r#"<line class="base" x1="{x:.3}" y1="{top:.3}" x2="{x:.3}" y2="{:.3}" stroke="black" stroke-width="1.2"/>"#,
            view.axis_y(),
            x = view.px(*x)
        );
    }
    // stripes: left to right by base, right-facing before left-facing
    let mut order: Vec<&Branch> = sys.branches.iter().collect();
    order.sort_by(|a, b| {
        a.x.total_cmp(&b.x)
            .then((a.facing == Facing::Left).cmp(&(b.facing == Facing::Left)))
    });
    let stripe_w = 10.0;
    for b in order {
        let x = view.px(b.x);
        let (sx, tx, anchor) = match b.facing {
            Facing::Right => (x, x + stripe_w + 2.0, "start"),
            Facing::Left => (x - stripe_w, x - stripe_w - 2.0, "end"),
        };
        let level = if b.facing == Facing::Right { 0.55 } else { 0.3 };
        let y = top + (view.axis_y() - top) * level;
        let opacity = if active.contains(&b.label) {
            "0.9"
        } else {
            "0.35"
        };
        let _ = writeln!(
            out,
            r##"<rect class="stripe" x="{sx:.3}" y="{:.3}" width="{stripe_w:.1}" height="{:.3}" fill="#c0504d" fill-opacity="{opacity}"/>"##,
            y - 40.0,
            80.0
        );
        let _ = writeln!(
            out,
            r#"<text class="label" x="{tx:.3}" y="{y:.3}" font-size="13" text-anchor="{anchor}">C{}</text>"#,
            subscript(b.label)
        );
    }
    out.push_str("</svg>\n");
    out
}
