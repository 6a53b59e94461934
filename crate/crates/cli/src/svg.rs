use std::fmt::Write;

use np_spectra::curves::SpectralCurve;
use np_spectra::spectra::{Space, SpectrumReport};
use num_complex::Complex64 as C64;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 48.0;

struct Frame {
    half_width: f64,
}

impl Frame {
    fn x(&self, re: f64) -> f64 {
        MARGIN + (re + self.half_width) / (2.0 * self.half_width) * (SIZE - 2.0 * MARGIN)
    }

    fn y(&self, im: f64) -> f64 {
        SIZE - MARGIN - (im + self.half_width) / (2.0 * self.half_width) * (SIZE - 2.0 * MARGIN)
    }

    fn scale(&self, r: f64) -> f64 {
        r / (2.0 * self.half_width) * (SIZE - 2.0 * MARGIN)
    }
}

fn closed_path(frame: &Frame, points: &[C64]) -> String {
    let mut d = String::new();
    for (k, p) in points.iter().enumerate() {
        let cmd = if k == 0 { 'M' } else { 'L' };
        write!(d, "{cmd}{:.3} {:.3} ", frame.x(p.re), frame.y(p.im)).unwrap();
    }
    d.push('Z');
    d
}

/// Static SVG of the spectral regions of a report: filled curve regions
/// and their reflections, the disk bracket (weighted), the essential
/// interval (energy) and eigenvalue ticks.
pub fn render_regions(report: &SpectrumReport, curves: &[SpectralCurve]) -> String {
    let radius = report
        .outer_bracket
        .as_ref()
        .and_then(|o| o.disk_radius)
        .unwrap_or(0.0);
    let frame = Frame {
        half_width: 0.55_f64.max(1.1 * radius),
    };
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#).unwrap();
    let (cx, cy) = (frame.x(0.0), frame.y(0.0));
    writeln!(
        svg,
        r##"<g class="axes" stroke="#888" stroke-width="1"><line x1="{MARGIN}" y1="{cy:.3}" x2="{:.3}" y2="{cy:.3}"/><line x1="{cx:.3}" y1="{:.3}" x2="{cx:.3}" y2="{MARGIN}"/></g>"##,
        SIZE - MARGIN,
        SIZE - MARGIN
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{:.3}" y="{:.3}" font-size="14" text-anchor="end">Re λ</text>"#,
        SIZE - MARGIN,
        cy - 6.0
    )
    .unwrap();
    writeln!(svg, r#"<text x="{:.3}" y="{:.3}" font-size="14">Im λ</text>"#, cx + 6.0, MARGIN - 8.0).unwrap();
    for x in [-0.5, 0.5] {
        writeln!(
            svg,
            r#"<text x="{:.3}" y="{:.3}" font-size="11" text-anchor="middle">{x}</text>"#,
            frame.x(x),
            cy + 16.0
        )
        .unwrap();
    }

    for curve in curves {
        for reflected in [false, true] {
            let fill = if reflected { "#cc6677" } else { "#4477aa" };
            writeln!(
                svg,
                r#"<path class="region" d="{}" fill="{fill}" fill-opacity="0.25" stroke="{fill}" stroke-width="1"/>"#,
                closed_path(&frame, &curve.polyline(reflected))
            )
            .unwrap();
        }
    }

    if radius > 0.0 {
        writeln!(
            svg,
            r##"<circle class="disk-bracket" cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" fill="none" stroke="#444" stroke-dasharray="6 4"/>"##,
            frame.scale(radius)
        )
        .unwrap();
    }

    let bar = |svg: &mut String, class: &str, lo: f64, hi: f64, color: &str| {
        writeln!(
            svg,
            r#"<rect class="{class}" x="{:.3}" y="{:.3}" width="{:.3}" height="6" fill="{color}"/>"#,
            frame.x(lo),
            cy - 3.0,
            frame.x(hi) - frame.x(lo)
        )
        .unwrap();
    };
    let tick = |svg: &mut String, x: f64| {
        writeln!(
            svg,
            r##"<line class="eigen-tick" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#117733" stroke-width="2"/>"##,
            frame.x(x),
            cy - 10.0,
            frame.x(x),
            cy + 10.0
        )
        .unwrap();
    };
    match report.space {
        Space::Energy => {
            for iv in &report.essential_core.intervals {
                bar(&mut svg, "essential-core", iv[0], iv[1], "#332288");
            }
            if let Some(mu) = report.mu_plus {
                tick(&mut svg, mu.value);
            }
            if let Some(mu) = report.mu_minus {
                tick(&mut svg, -mu.value);
            }
        }
        Space::Weighted { .. } => {
            for iv in &report.essential_core.intervals {
                bar(&mut svg, "eigen-interval", iv[0], iv[1], "#117733");
            }
            for b in &report.branches {
                tick(&mut svg, b.samples[0].1);
                tick(&mut svg, b.samples[b.samples.len() - 1].1);
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}
