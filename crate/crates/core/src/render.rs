//! Text and SVG pictures of activation diagrams. Vertices run left to
//! right, time runs upward with row 0 at the bottom.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::cascade::{stv, ActivationDiagram, StimulusSet, Stv};
use crate::error::{Error, Result};

pub const PRIMARY: char = 'O';
pub const SECONDARY: char = '*';
pub const INACTIVE: char = '.';

fn glyph(d: &ActivationDiagram, s: Stv) -> char {
    if d.primaries().contains(&s) {
        PRIMARY
    } else if d.secondaries().contains(&s) {
        SECONDARY
    } else {
        INACTIVE
    }
}

/// `horizon + 1` lines, one glyph per vertex in ascending order.
pub fn render_ascii(d: &ActivationDiagram) -> String {
    let mut out = String::new();
    for t in (0..=d.horizon()).rev() {
        for &v in d.network().vertices() {
            out.push(glyph(d, stv(v, t)));
        }
        out.push('\n');
    }
    out
}

/// Reads `render_ascii` output back, taking column `c` as vertex `c + 1`.
/// Returns the primaries and the secondaries.
pub fn parse_ascii(text: &str) -> Result<(StimulusSet, BTreeSet<Stv>)> {
    let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let mut primaries = StimulusSet::new();
    let mut secondaries = BTreeSet::new();
    let height = rows.len() as u32;
    for (k, row) in rows.iter().enumerate() {
        let t = height - 1 - k as u32;
        for (c, ch) in row.trim_end().chars().enumerate() {
            let s = stv(c as u32 + 1, t);
            match ch {
                PRIMARY => {
                    primaries.insert(s);
                }
                SECONDARY => {
                    secondaries.insert(s);
                }
                INACTIVE => {}
                other => {
                    return Err(Error::Parse(format!(
                        "unexpected glyph {other:?} in row {t}"
                    )))
                }
            }
        }
    }
    Ok((primaries, secondaries))
}

const STEP: i64 = 20;
const RADIUS: i64 = 6;

/// One circle per space-time vertex at `(vertex, -time)`; active ones are
/// filled and primaries get a second ring.
pub fn render_svg(d: &ActivationDiagram) -> String {
    let vertices: Vec<u32> = d.network().vertices().iter().copied().collect();
    let (lo, hi) = match (vertices.first(), vertices.last()) {
        (Some(&a), Some(&b)) => (a as i64, b as i64),
        _ => (0, 0),
    };
    let h = d.horizon() as i64;
    let x0 = lo * STEP - STEP;
    let y0 = -h * STEP - STEP;
    let w = (hi - lo + 2) * STEP;
    let ht = (h + 2) * STEP;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {y0} {w} {ht}" width="{w}" height="{ht}">"#
    )
    .unwrap();
    for t in 0..=d.horizon() {
        for &v in &vertices {
            let s = stv(v, t);
            let (cx, cy) = (v as i64 * STEP, -(t as i64) * STEP);
            match glyph(d, s) {
                INACTIVE => writeln!(
                    out,
                    r##"  <circle cx="{cx}" cy="{cy}" r="{}" fill="none" stroke="#bbb"/>"##,
                    RADIUS / 2
                ),
                SECONDARY => writeln!(
                    out,
                    r#"  <circle cx="{cx}" cy="{cy}" r="{RADIUS}" fill="black"/>"#
                ),
                _ => writeln!(
                    out,
                    r#"  <circle cx="{cx}" cy="{cy}" r="{RADIUS}" fill="black"/>
  <circle cx="{cx}" cy="{cy}" r="{}" fill="none" stroke="black"/>"#,
                    RADIUS + 3
                ),
            }
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}
