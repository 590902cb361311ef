//! Scene vocabulary: shapes, colors, placed objects and whole scenes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    #[serde(rename = "letter_L")]
    LetterL,
    #[serde(rename = "letter_T")]
    LetterT,
    Circle,
    Square,
    Triangle,
    Star,
    Cross,
    #[serde(rename = "letter_X")]
    LetterX,
}

impl Shape {
    pub const ALL: [Shape; 8] = [
        Shape::LetterL,
        Shape::LetterT,
        Shape::Circle,
        Shape::Square,
        Shape::Triangle,
        Shape::Star,
        Shape::Cross,
        Shape::LetterX,
    ];

    /// Canonical identifier, as used in manifests and the synonym table.
    pub fn as_str(self) -> &'static str {
        match self {
            Shape::LetterL => "letter_L",
            Shape::LetterT => "letter_T",
            Shape::Circle => "circle",
            Shape::Square => "square",
            Shape::Triangle => "triangle",
            Shape::Star => "star",
            Shape::Cross => "cross",
            Shape::LetterX => "letter_X",
        }
    }

    /// Name used in prompts and oracle answers ("L", "circle", ...).
    pub fn display_name(self) -> &'static str {
        match self {
            Shape::LetterL => "L",
            Shape::LetterT => "T",
            Shape::LetterX => "X",
            other => other.as_str(),
        }
    }

    pub fn plural_name(self) -> &'static str {
        match self {
            Shape::LetterL => "L shapes",
            Shape::LetterT => "T shapes",
            Shape::Circle => "circles",
            Shape::Square => "squares",
            Shape::Triangle => "triangles",
            Shape::Star => "stars",
            Shape::Cross => "crosses",
            Shape::LetterX => "X shapes",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Shape {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Shape::ALL
            .into_iter()
            .find(|shape| shape.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Red,
    Green,
    Blue,
    Yellow,
    Purple,
    Orange,
    Cyan,
    Magenta,
}

impl Color {
    pub const ALL: [Color; 8] = [
        Color::Red,
        Color::Green,
        Color::Blue,
        Color::Yellow,
        Color::Purple,
        Color::Orange,
        Color::Cyan,
        Color::Magenta,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Yellow => "yellow",
            Color::Purple => "purple",
            Color::Orange => "orange",
            Color::Cyan => "cyan",
            Color::Magenta => "magenta",
        }
    }

    /// Fixed fill color. None of these is black or white.
    pub fn rgb(self) -> [u8; 3] {
        match self {
            Color::Red => [220, 30, 30],
            Color::Green => [30, 170, 50],
            Color::Blue => [30, 70, 220],
            Color::Yellow => [235, 205, 20],
            Color::Purple => [130, 50, 170],
            Color::Orange => [245, 130, 20],
            Color::Cyan => [20, 200, 215],
            Color::Magenta => [225, 30, 185],
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Color {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Color::ALL
            .into_iter()
            .find(|color| color.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown vocabulary name `{0}`")]
pub struct UnknownName(pub String);

/// The (shape, color) pair an object is described by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectKind {
    pub shape: Shape,
    pub color: Color,
}

impl ObjectKind {
    pub const fn new(shape: Shape, color: Color) -> Self {
        Self { shape, color }
    }

    /// All 64 combinations, color-major.
    pub fn all() -> impl Iterator<Item = ObjectKind> {
        Color::ALL
            .into_iter()
            .flat_map(|color| Shape::ALL.into_iter().map(move |shape| ObjectKind { shape, color }))
    }

    /// "green L", "red circle".
    pub fn phrase(&self) -> String {
        format!("{} {}", self.color, self.shape.display_name())
    }

    /// "blue circles".
    pub fn plural_phrase(&self) -> String {
        format!("{} {}", self.color, self.shape.plural_name())
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.color, self.shape)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub enum Rotation {
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270];

    pub fn degrees(self) -> u16 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }
}

impl TryFrom<u16> for Rotation {
    type Error = String;

    fn try_from(value: u16) -> Result<Self, Self::Error> {
        match value {
            0 => Ok(Rotation::R0),
            90 => Ok(Rotation::R90),
            180 => Ok(Rotation::R180),
            270 => Ok(Rotation::R270),
            other => Err(format!("rotation must be 0, 90, 180 or 270, got {other}")),
        }
    }
}

impl From<Rotation> for u16 {
    fn from(value: Rotation) -> Self {
        value.degrees()
    }
}

/// Axis-aligned pixel rectangle, half-open on the right and bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub left: i64,
    pub top: i64,
    pub right: i64,
    pub bottom: i64,
}

impl Rect {
    pub fn width(&self) -> i64 {
        self.right - self.left
    }

    pub fn height(&self) -> i64 {
        self.bottom - self.top
    }

    pub fn area(&self) -> i64 {
        self.width().max(0) * self.height().max(0)
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.left < other.right
            && other.left < self.right
            && self.top < other.bottom
            && other.top < self.bottom
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.left && x < self.right && y >= self.top && y < self.bottom
    }

    /// Grow by `margin` on every side.
    pub fn inflate(&self, margin: i64) -> Rect {
        Rect {
            left: self.left - margin,
            top: self.top - margin,
            right: self.right + margin,
            bottom: self.bottom + margin,
        }
    }
}

/// One placed object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub shape: Shape,
    pub color: Color,
    pub cx: u32,
    pub cy: u32,
    pub size: u32,
    pub rot: Rotation,
}

impl ObjectSpec {
    pub fn kind(&self) -> ObjectKind {
        ObjectKind::new(self.shape, self.color)
    }

    /// Bounding box: `size` pixels wide and tall, starting at `c - size/2`.
    pub fn bbox(&self) -> Rect {
        let half = i64::from(self.size / 2);
        let left = i64::from(self.cx) - half;
        let top = i64::from(self.cy) - half;
        Rect {
            left,
            top,
            right: left + i64::from(self.size),
            bottom: top + i64::from(self.size),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
}

impl Default for Canvas {
    fn default() -> Self {
        Self {
            width: 512,
            height: 512,
        }
    }
}

impl Canvas {
    pub fn rect(&self) -> Rect {
        Rect {
            left: 0,
            top: 0,
            right: i64::from(self.width),
            bottom: i64::from(self.height),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub canvas: Canvas,
    pub seed: u64,
    pub objects: Vec<ObjectSpec>,
}

impl SceneSpec {
    pub fn empty(canvas: Canvas) -> Self {
        Self {
            canvas,
            seed: 0,
            objects: Vec::new(),
        }
    }

    pub fn kinds(&self) -> Vec<ObjectKind> {
        self.objects.iter().map(ObjectSpec::kind).collect()
    }

    /// Checks that every object lies inside the canvas and no two bounding
    /// boxes intersect.
    pub fn validate(&self) -> Result<(), String> {
        let canvas = self.canvas.rect();
        for (i, obj) in self.objects.iter().enumerate() {
            let b = obj.bbox();
            if b.left < canvas.left
                || b.top < canvas.top
                || b.right > canvas.right
                || b.bottom > canvas.bottom
            {
                return Err(format!("object {i} leaves the canvas"));
            }
        }
        for i in 0..self.objects.len() {
            for j in (i + 1)..self.objects.len() {
                if self.objects[i].bbox().intersects(&self.objects[j].bbox()) {
                    return Err(format!("objects {i} and {j} overlap"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for shape in Shape::ALL {
            assert_eq!(shape.as_str().parse::<Shape>().unwrap(), shape);
            let json = serde_json::to_string(&shape).unwrap();
            assert_eq!(json, format!("\"{}\"", shape.as_str()));
        }
        for color in Color::ALL {
            assert_eq!(color.as_str().parse::<Color>().unwrap(), color);
        }
        assert!("hexagon".parse::<Shape>().is_err());
    }

    #[test]
    fn palette_avoids_black_and_white() {
        for color in Color::ALL {
            let rgb = color.rgb();
            assert_ne!(rgb, [0, 0, 0]);
            assert_ne!(rgb, [255, 255, 255]);
        }
    }

    #[test]
    fn bbox_is_size_square() {
        let obj = ObjectSpec {
            shape: Shape::Square,
            color: Color::Red,
            cx: 256,
            cy: 256,
            size: 64,
            rot: Rotation::R0,
        };
        let b = obj.bbox();
        assert_eq!((b.left, b.top, b.right, b.bottom), (224, 224, 288, 288));
    }

    #[test]
    fn rotation_rejects_odd_angles() {
        assert!(serde_json::from_str::<Rotation>("45").is_err());
        assert_eq!(serde_json::from_str::<Rotation>("270").unwrap(), Rotation::R270);
    }
}
