//! Visual scaffolds: equidistant lines with numbered segments, drawn over an
//! image.

use std::fmt;
use std::str::FromStr;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::scene::{Color, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaffoldVariant {
    /// Horizontal lines, segments numbered top to bottom.
    Rows,
    /// Horizontal lines without numbers.
    RowsNonum,
    /// Vertical lines, segments numbered left to right.
    Columns,
    /// Both, cells numbered row-major.
    Grid,
    None,
}

impl ScaffoldVariant {
    pub const ALL: [ScaffoldVariant; 5] = [
        ScaffoldVariant::Rows,
        ScaffoldVariant::RowsNonum,
        ScaffoldVariant::Columns,
        ScaffoldVariant::Grid,
        ScaffoldVariant::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScaffoldVariant::Rows => "rows",
            ScaffoldVariant::RowsNonum => "rows_nonum",
            ScaffoldVariant::Columns => "columns",
            ScaffoldVariant::Grid => "grid",
            ScaffoldVariant::None => "none",
        }
    }
}

impl fmt::Display for ScaffoldVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScaffoldVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScaffoldVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown scaffold variant `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScaffoldConfig {
    pub variant: ScaffoldVariant,
    pub n_lines: u32,
    pub stroke_color: [u8; 3],
    pub stroke_width: u32,
}

impl Default for ScaffoldConfig {
    fn default() -> Self {
        Self {
            variant: ScaffoldVariant::Rows,
            n_lines: 3,
            stroke_color: [0, 0, 0],
            stroke_width: 2,
        }
    }
}

impl ScaffoldConfig {
    pub fn with_variant(variant: ScaffoldVariant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ScaffoldError> {
        if self.variant != ScaffoldVariant::None && self.n_lines == 0 {
            return Err(ScaffoldError::InvalidConfig("n_lines must be at least 1".into()));
        }
        if self.stroke_width == 0 {
            return Err(ScaffoldError::InvalidConfig("stroke_width must be at least 1".into()));
        }
        if Color::ALL.iter().any(|c| c.rgb() == self.stroke_color) {
            return Err(ScaffoldError::InvalidConfig(
                "stroke_color must differ from every object color".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScaffoldError {
    #[error("invalid scaffold config: {0}")]
    InvalidConfig(String),
    #[error("image {width}x{height} is too small for {what}")]
    Degenerate {
        width: u32,
        height: u32,
        what: String,
    },
}

/// `n` equidistant positions splitting `extent` into `n + 1` segments,
/// rounded to the nearest pixel (halves round up).
pub fn line_positions(extent: u32, n: u32) -> Result<Vec<u32>, ScaffoldError> {
    if n == 0 || extent <= n {
        return Err(ScaffoldError::Degenerate {
            width: extent,
            height: extent,
            what: format!("{n} lines"),
        });
    }
    let (extent, n) = (u64::from(extent), u64::from(n));
    Ok((1..=n)
        .map(|k| ((2 * k * extent + n + 1) / (2 * (n + 1))) as u32)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Label {
    pub number: usize,
    /// Bounding box of the drawn numeral.
    pub rect: Rect,
}

/// Everything a scaffold paints: stroke rectangles and numeral boxes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScaffoldLayout {
    pub strokes: Vec<Rect>,
    pub labels: Vec<Label>,
}

impl ScaffoldLayout {
    /// Whether a pixel can be touched by the scaffold.
    pub fn covers(&self, x: i64, y: i64) -> bool {
        self.strokes.iter().any(|r| r.contains(x, y)) || self.labels.iter().any(|l| l.rect.contains(x, y))
    }
}

const DIGIT_W: i64 = 8;
const DIGIT_H: i64 = 14;
const DIGIT_T: i64 = 2;
const DIGIT_GAP: i64 = 2;
const LABEL_PAD: i64 = 3;

fn label_size(number: usize) -> (i64, i64) {
    let digits = number.to_string().len() as i64;
    (digits * DIGIT_W + (digits - 1) * DIGIT_GAP, DIGIT_H)
}

/// Stroke band of a line at `pos`: `width` pixels centered on it.
fn band(pos: u32, width: u32) -> (i64, i64) {
    let start = i64::from(pos) - i64::from(width / 2);
    (start, start + i64::from(width))
}

/// Start of each segment's usable area (just past the preceding stroke).
fn segment_starts(positions: &[u32], width: u32) -> Vec<i64> {
    std::iter::once(0)
        .chain(positions.iter().map(|p| band(*p, width).1))
        .collect()
}

fn segment_ends(positions: &[u32], width: u32, extent: u32) -> Vec<i64> {
    positions
        .iter()
        .map(|p| band(*p, width).0)
        .chain(std::iter::once(i64::from(extent)))
        .collect()
}

pub fn layout(width: u32, height: u32, config: &ScaffoldConfig) -> Result<ScaffoldLayout, ScaffoldError> {
    config.validate()?;
    let variant = config.variant;
    if variant == ScaffoldVariant::None {
        return Ok(ScaffoldLayout::default());
    }
    let w = config.stroke_width;
    if width <= w || height <= w {
        return Err(ScaffoldError::Degenerate {
            width,
            height,
            what: format!("stroke width {w}"),
        });
    }
    let degenerate = |what: String| ScaffoldError::Degenerate { width, height, what };
    let horizontal = matches!(variant, ScaffoldVariant::Rows | ScaffoldVariant::RowsNonum | ScaffoldVariant::Grid);
    let vertical = matches!(variant, ScaffoldVariant::Columns | ScaffoldVariant::Grid);

    let rows = if horizontal {
        line_positions(height, config.n_lines).map_err(|_| degenerate(format!("{} rows", config.n_lines)))?
    } else {
        Vec::new()
    };
    let cols = if vertical {
        line_positions(width, config.n_lines).map_err(|_| degenerate(format!("{} columns", config.n_lines)))?
    } else {
        Vec::new()
    };

    let mut out = ScaffoldLayout::default();
    for &p in &rows {
        let (top, bottom) = band(p, w);
        out.strokes.push(Rect {
            left: 0,
            top,
            right: i64::from(width),
            bottom,
        });
    }
    for &p in &cols {
        let (left, right) = band(p, w);
        out.strokes.push(Rect {
            left,
            top: 0,
            right,
            bottom: i64::from(height),
        });
    }

    if variant == ScaffoldVariant::RowsNonum {
        return Ok(out);
    }
    let row_starts = segment_starts(&rows, w);
    let row_ends = segment_ends(&rows, w, height);
    let col_starts = segment_starts(&cols, w);
    let col_ends = segment_ends(&cols, w, width);
    let mut number = 0;
    for (r, (&top, &bottom)) in row_starts.iter().zip(&row_ends).enumerate() {
        for (c, (&left, &right)) in col_starts.iter().zip(&col_ends).enumerate() {
            number += 1;
            debug_assert_eq!(number, r * col_starts.len() + c + 1);
            let (lw, lh) = label_size(number);
            let rect = Rect {
                left: left + LABEL_PAD,
                top: top + LABEL_PAD,
                right: left + LABEL_PAD + lw,
                bottom: top + LABEL_PAD + lh,
            };
            if rect.right > right || rect.bottom > bottom {
                return Err(degenerate(format!("label {number}")));
            }
            out.labels.push(Label { number, rect });
        }
    }
    Ok(out)
}

/// Returns a scaffolded copy of `image`; the input is left untouched.
pub fn apply_scaffold(image: &RgbImage, config: &ScaffoldConfig) -> Result<RgbImage, ScaffoldError> {
    let plan = layout(image.width(), image.height(), config)?;
    let mut out = image.clone();
    let ink = Rgb(config.stroke_color);
    for r in &plan.strokes {
        fill(&mut out, r, ink);
    }
    for label in &plan.labels {
        draw_number(&mut out, label, ink);
    }
    Ok(out)
}

fn fill(img: &mut RgbImage, r: &Rect, ink: Rgb<u8>) {
    let (w, h) = (i64::from(img.width()), i64::from(img.height()));
    for y in r.top.max(0)..r.bottom.min(h) {
        for x in r.left.max(0)..r.right.min(w) {
            img.put_pixel(x as u32, y as u32, ink);
        }
    }
}

/// Seven-segment masks, bit order a b c d e f g.
const SEGMENTS: [u8; 10] = [
    0b1111110, 0b0110000, 0b1101101, 0b1111001, 0b0110011, 0b1011011, 0b1011111, 0b1110000,
    0b1111111, 0b1111011,
];

fn draw_number(img: &mut RgbImage, label: &Label, ink: Rgb<u8>) {
    let mut x = label.rect.left;
    let y = label.rect.top;
    for ch in label.number.to_string().chars() {
        let digit = ch.to_digit(10).expect("decimal digit") as usize;
        draw_digit(img, x, y, SEGMENTS[digit], ink);
        x += DIGIT_W + DIGIT_GAP;
    }
}

fn draw_digit(img: &mut RgbImage, x: i64, y: i64, mask: u8, ink: Rgb<u8>) {
    let mid = DIGIT_H / 2;
    let seg = |left, top, right, bottom| Rect {
        left: x + left,
        top: y + top,
        right: x + right,
        bottom: y + bottom,
    };
    let parts = [
        seg(0, 0, DIGIT_W, DIGIT_T),                          // a
        seg(DIGIT_W - DIGIT_T, 0, DIGIT_W, mid + 1),          // b
        seg(DIGIT_W - DIGIT_T, mid - 1, DIGIT_W, DIGIT_H),    // c
        seg(0, DIGIT_H - DIGIT_T, DIGIT_W, DIGIT_H),          // d
        seg(0, mid - 1, DIGIT_T, DIGIT_H),                    // e
        seg(0, 0, DIGIT_T, mid + 1),                          // f
        seg(0, mid - 1, DIGIT_W, mid + 1),                    // g
    ];
    for (i, part) in parts.iter().enumerate() {
        if mask & (1 << (6 - i)) != 0 {
            fill(img, part, ink);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::BACKGROUND;

    fn white(w: u32, h: u32) -> RgbImage {
        RgbImage::from_pixel(w, h, BACKGROUND)
    }

    #[test]
    fn positions() {
        assert_eq!(line_positions(512, 3).unwrap(), vec![128, 256, 384]);
        assert_eq!(line_positions(512, 1).unwrap(), vec![256]);
        assert_eq!(line_positions(100, 3).unwrap(), vec![25, 50, 75]);
        assert_eq!(line_positions(10, 2).unwrap(), vec![3, 7]);
        assert!(line_positions(3, 3).is_err());
        assert!(line_positions(100, 0).is_err());
    }

    #[test]
    fn none_is_identity() {
        let img = white(64, 64);
        let out = apply_scaffold(&img, &ScaffoldConfig::with_variant(ScaffoldVariant::None)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn rows_draw_full_width_lines_and_four_labels() {
        let img = white(512, 512);
        let cfg = ScaffoldConfig::default();
        let out = apply_scaffold(&img, &cfg).unwrap();
        for y in [128u32, 256, 384] {
            assert!((0..512).all(|x| out.get_pixel(x, y).0 == [0, 0, 0]));
        }
        let plan = layout(512, 512, &cfg).unwrap();
        assert_eq!(plan.labels.iter().map(|l| l.number).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        assert!(plan.labels.windows(2).all(|w| w[0].rect.top < w[1].rect.top));
    }

    #[test]
    fn grid_numbers_cells_row_major() {
        let plan = layout(512, 512, &ScaffoldConfig::with_variant(ScaffoldVariant::Grid)).unwrap();
        assert_eq!(plan.strokes.len(), 6);
        assert_eq!(plan.labels.len(), 16);
        // Cell 2 is right of cell 1; cell 5 is below cell 1.
        assert!(plan.labels[1].rect.left > plan.labels[0].rect.left);
        assert_eq!(plan.labels[1].rect.top, plan.labels[0].rect.top);
        assert!(plan.labels[4].rect.top > plan.labels[0].rect.top);
        assert_eq!(plan.labels[4].rect.left, plan.labels[0].rect.left);
    }

    #[test]
    fn digits_render_distinctly() {
        let mut seen = std::collections::HashSet::new();
        for (d, mask) in SEGMENTS.iter().enumerate() {
            let mut img = white(12, 16);
            draw_digit(&mut img, 0, 0, *mask, Rgb([0, 0, 0]));
            assert!(seen.insert(img.into_raw()), "digit {d} collides");
        }
    }

    #[test]
    fn degenerate_images_are_rejected() {
        let err = apply_scaffold(&white(2, 2), &ScaffoldConfig::default()).unwrap_err();
        assert!(matches!(err, ScaffoldError::Degenerate { .. }));
        // Lines fit, but 4 segments of 5 px cannot hold a numeral.
        assert!(apply_scaffold(&white(20, 20), &ScaffoldConfig::default()).is_err());
        let nonum = ScaffoldConfig::with_variant(ScaffoldVariant::RowsNonum);
        assert!(apply_scaffold(&white(20, 20), &nonum).is_ok());
    }

    #[test]
    fn palette_colored_strokes_are_rejected() {
        let cfg = ScaffoldConfig {
            stroke_color: Color::Red.rgb(),
            ..ScaffoldConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(ScaffoldError::InvalidConfig(_))));
    }
}
