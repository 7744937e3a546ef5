//! Dependency-free SVG scatter plot: predicted vs truth, identity line,
//! least-squares fit line, RMSE/R² annotation. Output is byte-stable for
//! identical input.

use crate::eval::{r_squared, rmse};
use crate::scalar::Real;

const W: f64 = 640.0;
const H: f64 = 640.0;
const MARGIN: f64 = 60.0;

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

/// Render an accuracy-comparison scatter of `pred` against `truth`.
/// `pred` and `truth` must have equal nonzero length.
pub fn scatter_svg<S: Real>(pred: &[S], truth: &[S], title: &str) -> Vec<u8> {
    assert_eq!(pred.len(), truth.len(), "equal-length sequences required");
    assert!(!pred.is_empty(), "at least one point required");

    let p64: Vec<f64> = pred.iter().map(|v| v.to_f64_lossy()).collect();
    let t64: Vec<f64> = truth.iter().map(|v| v.to_f64_lossy()).collect();

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in p64.iter().chain(&t64) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if hi - lo < 1e-9 {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let lo = lo - pad;
    let hi = hi + pad;
    let span = hi - lo;

    let sx = |v: f64| MARGIN + (v - lo) / span * (W - 2.0 * MARGIN);
    let sy = |v: f64| H - MARGIN - (v - lo) / span * (H - 2.0 * MARGIN);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">{}</text>\n",
        W / 2.0,
        xml_escape(title)
    ));

    // axes
    s.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN),
        fmt(H - MARGIN),
        fmt(W - MARGIN),
        fmt(H - MARGIN)
    ));
    s.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN),
        fmt(H - MARGIN),
        fmt(MARGIN),
        fmt(MARGIN)
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">truth (mm)</text>\n",
        W / 2.0,
        H - 18.0
    ));
    s.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 {})\">predicted (mm)</text>\n",
        H / 2.0,
        H / 2.0
    ));
    for (v, label) in [(lo + pad, fmt(lo + pad)), (hi - pad, fmt(hi - pad))] {
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            fmt(sx(v)),
            fmt(H - MARGIN + 16.0),
            label
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            fmt(MARGIN - 6.0),
            fmt(sy(v) + 4.0),
            label
        ));
    }

    // identity line
    s.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n",
        fmt(sx(lo)),
        fmt(sy(lo)),
        fmt(sx(hi)),
        fmt(sy(hi))
    ));

    // least-squares fit pred = a * truth + b (needs variance in truth)
    if let Some((a, b)) = lsq_fit(&t64, &p64) {
        s.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"steelblue\"/>\n",
            fmt(sx(lo)),
            fmt(sy(a * lo + b)),
            fmt(sx(hi)),
            fmt(sy(a * hi + b))
        ));
    }

    for (p, t) in p64.iter().zip(&t64) {
        s.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"seagreen\" fill-opacity=\"0.7\"/>\n",
            fmt(sx(*t)),
            fmt(sy(*p))
        ));
    }

    let mut annot = format!("RMSE = {} mm", fmt(rmse(&p64, &t64).expect("nonempty")));
    if let Ok(r2) = r_squared(&p64, &t64) {
        annot.push_str(&format!(", R\u{b2} = {}", fmt(r2)));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
        fmt(MARGIN + 8.0),
        fmt(MARGIN + 8.0),
        annot
    ));

    s.push_str("</svg>\n");
    s.into_bytes()
}

fn lsq_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx < 1e-12 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let a = sxy / sxx;
    Some((a, my - a * mx))
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
