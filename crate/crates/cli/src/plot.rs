//! Predicted-versus-true scatter plots as standalone SVG.

use std::fmt::Write;

use nlse_core::regression::{ParameterMetrics, TrendBin};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 56.0;

struct Frame {
    lo: f64,
    hi: f64,
}

impl Frame {
    fn px(&self, v: f64) -> f64 {
        MARGIN + (v - self.lo) / (self.hi - self.lo) * (SIZE - 2.0 * MARGIN)
    }

    fn py(&self, v: f64) -> f64 {
        SIZE - self.px(v)
    }
}

/// Band around the binned trend at `k` residual standard deviations.
fn band(frame: &Frame, bins: &[&TrendBin], k: f64) -> String {
    let upper = bins.iter().map(|b| (b.mean_truth, b.mean_pred + k * b.residual_std));
    let lower = bins.iter().rev().map(|b| (b.mean_truth, b.mean_pred - k * b.residual_std));
    upper
        .chain(lower)
        .map(|(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Scatter of `preds` against `truths` with the identity line, binned trend
/// circles and shaded 1σ and 4σ bands.
pub fn predicted_vs_true(
    name: &str,
    preds: &[f64],
    truths: &[f64],
    trend: &[TrendBin],
    stats: &ParameterMetrics,
) -> String {
    let finite = preds.iter().chain(truths).copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(0.0f64, f64::min);
    let hi = finite.fold(1.0f64, f64::max);
    let pad = 0.02 * (hi - lo);
    let frame = Frame {
        lo: lo - pad,
        hi: hi + pad,
    };
    let bins: Vec<&TrendBin> = trend.iter().filter(|b| !b.empty).collect();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{name}: sigma = {:.3}, R2 = {}</text>"#,
        SIZE / 2.0,
        stats.residual_std,
        stats.r2.map_or("undefined".to_string(), |r| format!("{r:.4}"))
    );
    if bins.len() >= 2 {
        let _ = writeln!(
            s,
            r##"<polygon class="band-4sigma" points="{}" fill="#9ecae1" fill-opacity="0.35" stroke="none"/>"##,
            band(&frame, &bins, 4.0)
        );
        let _ = writeln!(
            s,
            r##"<polygon class="band-1sigma" points="{}" fill="#3182bd" fill-opacity="0.45" stroke="none"/>"##,
            band(&frame, &bins, 1.0)
        );
    }
    let _ = writeln!(
        s,
        r#"<line class="identity" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1" stroke-dasharray="6 4"/>"#,
        frame.px(frame.lo),
        frame.py(frame.lo),
        frame.px(frame.hi),
        frame.py(frame.hi)
    );
    let _ = writeln!(s, r##"<g fill="#636363" fill-opacity="0.5">"##);
    for (&p, &t) in preds.iter().zip(truths) {
        let _ = writeln!(
            s,
            r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="1.2"/>"#,
            frame.px(t),
            frame.py(p)
        );
    }
    let _ = writeln!(s, "</g>");
    for b in &bins {
        let _ = writeln!(
            s,
            r##"<circle class="trend" cx="{:.2}" cy="{:.2}" r="4" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
            frame.px(b.mean_truth),
            frame.py(b.mean_pred)
        );
    }

    let (x0, x1) = (MARGIN, SIZE - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0},{x0} L{x0},{x1} L{x1},{x1}" fill="none" stroke="black"/>"#
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let (x, y) = (frame.px(tick), frame.py(tick));
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{tick}</text>"#,
            x1 + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{tick}</text>"#,
            x0 - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">true (normalized)</text>"#,
        SIZE / 2.0,
        SIZE - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">predicted (normalized)</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    s.push_str("</svg>\n");
    s
}
