//! Two-line diagrams: top intervals above, bottom intervals below, gaps left
//! blank. With a report, one extra row per part of the decomposition shows
//! the transition set and the tower floors of each domain.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::decompose::{DecompositionReport, DomainKind};
use crate::ggiet::{GGiet, ItemKind, Label, Layout};
use crate::intervals::Interval;
use crate::scalar::Scalar;

const WIDTH: u32 = 1000;
const MARGIN: u32 = 40;
const SPAN: i64 = 920;
const BAR: u32 = 40;
const TOP_Y: u32 = 50;
const BOTTOM_Y: u32 = 130;
const ROW0_Y: u32 = 210;
const ROW_STEP: u32 = 40;
const ROW_H: u32 = 18;

const TINTS: [&str; 8] = ["#e6550d", "#3182bd", "#31a354", "#756bb1", "#d6616b", "#8c6d31", "#17becf", "#7f7f7f"];
const TRANSITION: &str = "#cccccc";

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Stable fill for a label: the hue comes from the label's hash, saturation
/// 60% and lightness 72%, written as `#rrggbb` (SVG 1.1 has no `hsl()`).
pub fn label_color(label: &str) -> String {
    let h = (fnv1a(label) % 360) as f64;
    let (s, l) = (0.60, 0.72);
    let c = (1.0 - (2.0 * l - 1.0f64).abs()) * s;
    let x = c * (1.0 - ((h / 60.0) % 2.0 - 1.0).abs());
    let (r, g, b) = match (h / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Scale {
    ambient: Scalar,
}

impl Scale {
    fn x(&self, pos: &Scalar) -> String {
        if self.ambient.is_zero() {
            return MARGIN.to_string();
        }
        let t = &(pos * &Scalar::from_int(SPAN)) / &self.ambient;
        (&t + &Scalar::from_int(MARGIN as i64)).to_decimal(3)
    }

    fn rect(&self, out: &mut String, iv: &Interval, y: u32, h: u32, attrs: &str) {
        let w = if self.ambient.is_zero() {
            Scalar::zero()
        } else {
            &(&iv.length() * &Scalar::from_int(SPAN)) / &self.ambient
        };
        writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" {}/>"#,
            self.x(&iv.lo),
            y,
            w.to_decimal(3),
            h,
            attrs
        )
        .unwrap();
    }

    fn mid(&self, iv: &Interval) -> String {
        let m = &(&iv.lo + &iv.hi) / &Scalar::from_int(2);
        self.x(&m)
    }
}

fn line(
    out: &mut String,
    sc: &Scale,
    layout: &Layout,
    y: u32,
    m: &GGiet,
    colors: &BTreeMap<Label, String>,
    slopes: bool,
) {
    for (item, iv) in layout.positioned() {
        match &item.kind {
            ItemKind::Gap => {
                sc.rect(out, &iv, y, BAR, r##"class="gap" fill="none" stroke="#999999" stroke-dasharray="4 3""##);
            }
            ItemKind::Interval(l) => {
                let fill = colors.get(l).cloned().unwrap_or_else(|| label_color(l));
                sc.rect(out, &iv, y, BAR, &format!(r##"class="interval" fill="{}" stroke="#000000""##, escape(&fill)));
                writeln!(
                    out,
                    r#"<text class="label" x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
                    sc.mid(&iv),
                    y + BAR / 2 + 5,
                    escape(l)
                )
                .unwrap();
                if slopes {
                    if let Some(s) = m.slope(l) {
                        writeln!(
                            out,
                            r#"<text class="slope" x="{}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
                            sc.mid(&iv),
                            y - 6,
                            escape(&s.to_string())
                        )
                        .unwrap();
                    }
                }
            }
        }
    }
}

fn row_caption(out: &mut String, y: u32, text: &str) {
    writeln!(out, r#"<text class="caption" x="{}" y="{}" font-size="11">{}</text>"#, MARGIN, y - 3, escape(text))
        .unwrap();
}

/// Renders the map and, optionally, its decomposition. The output depends
/// only on the inputs.
pub fn render_svg(m: &GGiet, report: Option<&DecompositionReport>, colors: Option<&BTreeMap<Label, String>>) -> String {
    let empty = BTreeMap::new();
    let colors = colors.unwrap_or(&empty);
    let sc = Scale { ambient: m.ambient().clone() };
    let rows = report.map(|r| r.domains.len() + 1).unwrap_or(0) as u32;
    let height = if rows == 0 { BOTTOM_Y + BAR + 30 } else { ROW0_Y + rows * ROW_STEP + 10 };

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = WIDTH,
        h = height
    )
    .unwrap();
    writeln!(out, r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##, WIDTH, height).unwrap();
    let full = format!("{}", MARGIN as i64 + SPAN);
    for y in [TOP_Y + BAR, BOTTOM_Y + BAR] {
        writeln!(out, r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000000"/>"##, MARGIN, y, full, y).unwrap();
    }
    writeln!(out, r#"<g class="top">"#).unwrap();
    line(&mut out, &sc, m.top(), TOP_Y, m, colors, true);
    writeln!(out, "</g>").unwrap();
    writeln!(out, r#"<g class="bottom">"#).unwrap();
    line(&mut out, &sc, m.bottom(), BOTTOM_Y, m, colors, false);
    writeln!(out, "</g>").unwrap();

    if let Some(rep) = report {
        writeln!(out, r#"<g class="decomposition">"#).unwrap();
        let y = ROW0_Y;
        row_caption(&mut out, y, "transition");
        for iv in &rep.transition {
            sc.rect(&mut out, iv, y, ROW_H, &format!(r##"class="transition" fill="{}" stroke="none""##, TRANSITION));
        }
        for (i, d) in rep.domains.iter().enumerate() {
            let y = ROW0_Y + (i as u32 + 1) * ROW_STEP;
            let tint = TINTS[i % TINTS.len()];
            let caption = match &d.kind {
                DomainKind::Periodic { period, .. } => format!("domain {}: periodic, period {}", i + 1, period),
                DomainKind::Quasiminimal { d_i, .. } => format!("domain {}: quasiminimal, {} letters", i + 1, d_i),
            };
            let caption = if d.certified { caption } else { format!("{} (uncertified)", caption) };
            row_caption(&mut out, y, &caption);
            for f in &d.tower.floors {
                sc.rect(
                    &mut out,
                    &f.interval,
                    y,
                    ROW_H,
                    &format!(r##"class="floor" fill="{}" fill-opacity="0.5" stroke="{}""##, tint, tint),
                );
            }
        }
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    out
}
