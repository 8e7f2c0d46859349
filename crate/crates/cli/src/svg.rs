//! Static SVG plots: phase portraits, bifurcation curves and region rasters.

use std::fmt::Write;

use holling_bt::bt::CurveSet;
use holling_bt::Region;

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 50.0;

/// Linear map from a data box to the drawing area (y up).
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn around(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut f = Frame {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for (x, y) in points.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            f.x0 = f.x0.min(x);
            f.x1 = f.x1.max(x);
            f.y0 = f.y0.min(y);
            f.y1 = f.y1.max(y);
        }
        if !f.x0.is_finite() {
            return Frame {
                x0: 0.0,
                x1: 1.0,
                y0: 0.0,
                y1: 1.0,
            };
        }
        // keep degenerate boxes drawable
        let grow = |lo: &mut f64, hi: &mut f64| {
            let w = (*hi - *lo).max(1e-12 * (1.0 + lo.abs()));
            *lo -= 0.02 * w;
            *hi += 0.02 * w;
        };
        grow(&mut f.x0, &mut f.x1);
        grow(&mut f.y0, &mut f.y1);
        f
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn open(title: &str, desc: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .unwrap();
    writeln!(s, "<title>{}</title>", escape(title)).unwrap();
    writeln!(s, "<desc>{}</desc>", escape(desc)).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    s
}

fn axes(s: &mut String, f: &Frame, xl: &str, yl: &str) {
    let (l, r, t, b) = (PAD, W - PAD, PAD, H - PAD);
    writeln!(
        s,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    )
    .unwrap();
    let label = |s: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" font-size="11" text-anchor="{anchor}">{}</text>"#,
            escape(text)
        )
        .unwrap();
    };
    label(s, l, b + 16.0, "start", &format!("{:.4}", f.x0));
    label(s, r, b + 16.0, "end", &format!("{:.4}", f.x1));
    label(s, l - 4.0, b, "end", &format!("{:.4}", f.y0));
    label(s, l - 4.0, t + 10.0, "end", &format!("{:.4}", f.y1));
    label(s, (l + r) / 2.0, b + 32.0, "middle", xl);
    label(s, 14.0, (t + b) / 2.0, "middle", yl);
}

fn polyline(s: &mut String, f: &Frame, pts: &[(f64, f64)], color: &str) {
    let coords: Vec<String> = pts
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| format!("{:.2},{:.2}", f.px(*x), f.py(*y)))
        .collect();
    if !coords.is_empty() {
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            coords.join(" ")
        )
        .unwrap();
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];

/// Trajectories in the `(x, y)` plane with equilibria marked.
pub fn phase_portrait(
    trajectories: &[Vec<(f64, f64)>],
    equilibria: &[(f64, f64)],
    desc: &str,
) -> String {
    let f = Frame::around(trajectories.iter().flatten().chain(equilibria).copied());
    let mut s = open("phase portrait", desc);
    axes(&mut s, &f, "x (prey)", "y (predator)");
    for (i, t) in trajectories.iter().enumerate() {
        polyline(&mut s, &f, t, COLORS[i % COLORS.len()]);
    }
    for (x, y) in equilibria {
        writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="black"/>"#,
            f.px(*x),
            f.py(*y)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// T, H and P curves in the `(lambda1, lambda2)` plane.
pub fn curves(set: &CurveSet, desc: &str) -> String {
    let b = set.lambda_box;
    let f = Frame::around([(b.l1_min, b.l2_min), (b.l1_max, b.l2_max)].into_iter());
    let mut s = open("bifurcation curves", desc);
    axes(&mut s, &f, "lambda1", "lambda2");
    for (i, (name, pts)) in [("T", &set.t), ("H", &set.h), ("P", &set.p)]
        .into_iter()
        .enumerate()
    {
        let mut v: Vec<(f64, f64)> = pts.iter().map(|c| (c.lambda1, c.lambda2)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        polyline(&mut s, &f, &v, COLORS[i]);
        for (x, y) in &v {
            writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="{}"/>"#,
                f.px(*x),
                f.py(*y),
                COLORS[i]
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{}">{name}</text>"#,
            W - PAD + 8.0,
            PAD + 16.0 * i as f64,
            COLORS[i]
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Region tags on an `(c, h)` grid.
pub fn region_raster(cells: &[(f64, f64, Region)], nc: usize, nh: usize, desc: &str) -> String {
    let f = Frame::around(cells.iter().map(|(h, c, _)| (*c, *h)));
    let mut s = open("harvesting regions", desc);
    let (cw, ch) = (
        (W - 2.0 * PAD) / nc.max(1) as f64,
        (H - 2.0 * PAD) / nh.max(1) as f64,
    );
    for (h, c, r) in cells {
        let color = match r {
            Region::K1 => "#9ecae1",
            Region::K2 => "#de2d26",
            Region::K3 => "#fdd49e",
            Region::None => "#eeeeee",
        };
        writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
            f.px(*c) - cw / 2.0,
            f.py(*h) - ch / 2.0,
            cw,
            ch
        )
        .unwrap();
    }
    axes(&mut s, &f, "c", "h");
    s.push_str("</svg>\n");
    s
}
