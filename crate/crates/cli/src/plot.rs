//! Static SVG line charts of Pickands functions.

use std::fmt::Write;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 44.0;
const Y_MIN: f64 = 0.45;
const Y_MAX: f64 = 1.05;

fn sx(t: f64) -> f64 {
    LEFT + t * (WIDTH - LEFT - RIGHT)
}

fn sy(a: f64) -> f64 {
    let a = a.clamp(Y_MIN, Y_MAX);
    TOP + (Y_MAX - a) / (Y_MAX - Y_MIN) * (HEIGHT - TOP - BOTTOM)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A named polyline.
pub struct Series<'a> {
    pub label: &'a str,
    pub t: &'a [f64],
    pub a: &'a [f64],
    pub color: &'a str,
    pub dashed: bool,
}

/// The admissible region `max(t, 1-t) <= A(t) <= 1` shaded, with each
/// series drawn on top.
pub fn pickands_svg(title: &str, series: &[Series]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="#e8e8e8" stroke="#888888"/>"##,
        sx(0.0),
        sy(1.0),
        sx(0.5),
        sy(0.5),
        sx(1.0),
        sy(1.0)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"##,
        LEFT,
        TOP,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{t:.2}</text>"#,
            sx(t),
            HEIGHT - BOTTOM + 16.0
        );
    }
    for i in 0..=5 {
        let a = 0.5 + i as f64 * 0.1;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{a:.1}</text>"#,
            LEFT - 6.0,
            sy(a) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#,
        sx(0.5),
        HEIGHT - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        TOP - 14.0,
        escape(title)
    );
    for (k, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser
            .t
            .iter()
            .zip(ser.a)
            .filter(|(_, a)| a.is_finite())
            .map(|(&t, &a)| format!("{:.2},{:.2}", sx(t), sy(a)))
            .collect();
        let dash = if ser.dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.8"{dash}/>"#,
            pts.join(" "),
            ser.color
        );
        let y = TOP + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="1.8"{dash}/>"#,
            sx(0.36),
            sx(0.42),
            ser.color
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            sx(0.44),
            y + 4.0,
            escape(ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_well_formed_and_deterministic() {
        let t = [0.0, 0.5, 1.0];
        let a = [1.0, 0.75, 1.0];
        let series = [Series { label: "A<hat>", t: &t, a: &a, color: "#1f77b4", dashed: false }];
        let one = pickands_svg("test", &series);
        assert_eq!(one, pickands_svg("test", &series));
        assert!(one.starts_with("<svg") && one.ends_with("</svg>\n"));
        assert!(one.contains("A&lt;hat&gt;"));
        assert_eq!(one.matches("<polyline").count(), 1);
    }
}
