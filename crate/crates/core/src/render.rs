//! Rasterization of scenes.
//!
//! Shapes are defined in a unit box and sampled at pixel centers. Rotations
//! are quarter turns, applied as exact coordinate swaps, and the star uses
//! precomputed vertices, so output does not depend on platform libm.

use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};

use crate::scene::{ObjectSpec, Rotation, SceneSpec, Shape};

pub const BACKGROUND: Rgb<u8> = Rgb([255, 255, 255]);

/// Stroke thickness of letters and the cross, relative to object size.
const STROKE: f64 = 0.22;

const STAR: [(f64, f64); 10] = [
    (0.5, 0.0),
    (0.617557, 0.338197),
    (0.975528, 0.345492),
    (0.690211, 0.561803),
    (0.793893, 0.904508),
    (0.5, 0.7),
    (0.206107, 0.904508),
    (0.309789, 0.561803),
    (0.024472, 0.345492),
    (0.382443, 0.338197),
];

pub fn render(scene: &SceneSpec) -> RgbImage {
    let mut img = RgbImage::from_pixel(scene.canvas.width, scene.canvas.height, BACKGROUND);
    for obj in &scene.objects {
        draw_object(&mut img, obj);
    }
    img
}

fn draw_object(img: &mut RgbImage, obj: &ObjectSpec) {
    let b = obj.bbox();
    let size = f64::from(obj.size);
    let fill = Rgb(obj.color.rgb());
    for py in b.top.max(0)..b.bottom.min(i64::from(img.height())) {
        for px in b.left.max(0)..b.right.min(i64::from(img.width())) {
            let u = ((px - b.left) as f64 + 0.5) / size;
            let v = ((py - b.top) as f64 + 0.5) / size;
            let (u, v) = unrotate(u, v, obj.rot);
            if inside(obj.shape, u, v) {
                img.put_pixel(px as u32, py as u32, fill);
            }
        }
    }
}

/// Maps a point of the rotated glyph back into the upright glyph frame.
/// Rotations are clockwise on a y-down canvas.
fn unrotate(u: f64, v: f64, rot: Rotation) -> (f64, f64) {
    let turns = rot.degrees() / 90;
    let (mut u, mut v) = (u, v);
    for _ in 0..turns {
        (u, v) = (v, 1.0 - u);
    }
    (u, v)
}

fn inside(shape: Shape, u: f64, v: f64) -> bool {
    let half = STROKE / 2.0;
    match shape {
        Shape::Square => true,
        Shape::Circle => (u - 0.5) * (u - 0.5) + (v - 0.5) * (v - 0.5) <= 0.25,
        Shape::Triangle => (u - 0.5).abs() * 2.0 <= v,
        Shape::Star => in_polygon(&STAR, u, v),
        Shape::Cross => (u - 0.5).abs() <= half || (v - 0.5).abs() <= half,
        Shape::LetterL => u <= STROKE || v >= 1.0 - STROKE,
        Shape::LetterT => v <= STROKE || (u - 0.5).abs() <= half,
        Shape::LetterX => (u - v).abs() <= STROKE * 0.75 || (u + v - 1.0).abs() <= STROKE * 0.75,
    }
}

fn in_polygon(poly: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>, image::ImageError> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

pub fn decode_image(bytes: &[u8]) -> Result<RgbImage, image::ImageError> {
    Ok(image::load_from_memory(bytes)?.to_rgb8())
}

pub fn load_image(path: &Path) -> Result<RgbImage, image::ImageError> {
    Ok(image::open(path)?.to_rgb8())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Canvas, Color};

    fn one(shape: Shape, rot: Rotation) -> SceneSpec {
        SceneSpec {
            canvas: Canvas::default(),
            seed: 0,
            objects: vec![ObjectSpec {
                shape,
                color: Color::Red,
                cx: 256,
                cy: 256,
                size: 64,
                rot,
            }],
        }
    }

    #[test]
    fn empty_scene_is_white() {
        let img = render(&SceneSpec::empty(Canvas::default()));
        assert_eq!(img.dimensions(), (512, 512));
        assert!(img.pixels().all(|p| *p == BACKGROUND));
    }

    #[test]
    fn centered_square_is_one_block() {
        let img = render(&one(Shape::Square, Rotation::R0));
        let red = Rgb(Color::Red.rgb());
        for (x, y, p) in img.enumerate_pixels() {
            let inside = (224..288).contains(&x) && (224..288).contains(&y);
            assert_eq!(*p == red, inside, "pixel ({x},{y})");
        }
    }

    #[test]
    fn rotation_moves_letter_strokes() {
        let upright = render(&one(Shape::LetterL, Rotation::R0));
        let turned = render(&one(Shape::LetterL, Rotation::R90));
        assert_ne!(upright, turned);
        let count = |img: &RgbImage| img.pixels().filter(|p| **p != BACKGROUND).count();
        assert_eq!(count(&upright), count(&turned));
        // Four quarter turns return to the start.
        let (u, v) = (0.25, 0.625);
        let mut p = (u, v);
        for _ in 0..4 {
            p = unrotate(p.0, p.1, Rotation::R90);
        }
        assert_eq!(p, (u, v));
    }

    #[test]
    fn every_shape_draws_inside_its_box() {
        for shape in Shape::ALL {
            let img = render(&one(shape, Rotation::R180));
            let painted: Vec<_> = img
                .enumerate_pixels()
                .filter(|(_, _, p)| **p != BACKGROUND)
                .collect();
            assert!(!painted.is_empty(), "{shape}");
            assert!(painted
                .iter()
                .all(|(x, y, _)| (224..288).contains(x) && (224..288).contains(y)));
        }
    }

    #[test]
    fn png_round_trip_and_determinism() {
        let scene = one(Shape::Star, Rotation::R0);
        let a = encode_png(&render(&scene)).unwrap();
        let b = encode_png(&render(&scene)).unwrap();
        assert_eq!(a, b);
        assert_eq!(decode_image(&a).unwrap(), render(&scene));
    }
}
