//! Assignment of objects to horizontal bands for row-by-row scoring.

use crate::scene::{ObjectKind, SceneSpec};

/// Row index (1-based, top to bottom) of each object, in object order.
///
/// The canvas height is split into `n_rows` equal bands and each object goes
/// to the band covering most of its bounding box. Equal overlaps go to the
/// upper band.
///
/// # Panics
/// If `n_rows` is zero.
pub fn row_assignment(scene: &SceneSpec, n_rows: usize) -> Vec<usize> {
    assert!(n_rows >= 1, "n_rows must be at least 1");
    let n = n_rows as i64;
    let height = i64::from(scene.canvas.height);
    scene
        .objects
        .iter()
        .map(|obj| {
            let b = obj.bbox();
            // Band k spans [(k-1)H/n, kH/n); scale everything by n to stay integral.
            let (top, bottom) = (b.top * n, b.bottom * n);
            let mut best_row = 1;
            let mut best_overlap = -1;
            for k in 1..=n {
                let band_top = (k - 1) * height;
                let band_bottom = k * height;
                let overlap = (bottom.min(band_bottom) - top.max(band_top)).max(0);
                if overlap > best_overlap {
                    best_overlap = overlap;
                    best_row = k as usize;
                }
            }
            best_row
        })
        .collect()
}

/// Object kinds grouped per row, top row first.
pub fn kinds_by_row(scene: &SceneSpec, n_rows: usize) -> Vec<Vec<ObjectKind>> {
    let mut rows = vec![Vec::new(); n_rows];
    for (obj, row) in scene.objects.iter().zip(row_assignment(scene, n_rows)) {
        rows[row - 1].push(obj.kind());
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Canvas, Color, ObjectSpec, Rotation, Shape};

    fn at(cy: u32, size: u32) -> ObjectSpec {
        ObjectSpec {
            shape: Shape::Square,
            color: Color::Blue,
            cx: 100,
            cy,
            size,
            rot: Rotation::R0,
        }
    }

    fn scene(objects: Vec<ObjectSpec>) -> SceneSpec {
        SceneSpec {
            canvas: Canvas::default(),
            seed: 0,
            objects,
        }
    }

    #[test]
    fn fully_inside_band_two() {
        // Bands of 128 px: band 2 is [128, 256).
        assert_eq!(row_assignment(&scene(vec![at(190, 40)]), 4), vec![2]);
    }

    #[test]
    fn straddling_tie_goes_up() {
        // Box [236, 276): 20 px in band 2, 20 px in band 3.
        assert_eq!(row_assignment(&scene(vec![at(256, 40)]), 4), vec![2]);
        // One pixel lower tips it into band 3.
        assert_eq!(row_assignment(&scene(vec![at(257, 40)]), 4), vec![3]);
    }

    #[test]
    fn single_row() {
        let s = scene(vec![at(30, 40), at(480, 40), at(256, 40)]);
        assert_eq!(row_assignment(&s, 1), vec![1, 1, 1]);
    }

    #[test]
    fn fractional_band_edges() {
        // 512 / 3 bands: edges at 170.67 and 341.33.
        // Box [150, 190): 20.67 px in band 1, 19.33 px in band 2.
        assert_eq!(row_assignment(&scene(vec![at(170, 40)]), 3), vec![1]);
        let rows = kinds_by_row(&scene(vec![at(170, 40), at(500, 20)]), 3);
        assert_eq!(rows.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 0, 1]);
    }
}
