//! Feature-triplet counting.
//!
//! A triple of objects is a feature triplet when one pair shares exactly one
//! feature (shape only, or color only) and a different pair of the same
//! triple shares exactly the other feature.

use serde::{Deserialize, Serialize};

use crate::scene::ObjectKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TripletCount(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairShare {
    None,
    ShapeOnly,
    ColorOnly,
    Both,
}

fn pair_share(a: ObjectKind, b: ObjectKind) -> PairShare {
    match (a.shape == b.shape, a.color == b.color) {
        (true, true) => PairShare::Both,
        (true, false) => PairShare::ShapeOnly,
        (false, true) => PairShare::ColorOnly,
        (false, false) => PairShare::None,
    }
}

/// Whether the three objects form a feature triplet.
pub fn is_triplet(a: ObjectKind, b: ObjectKind, c: ObjectKind) -> bool {
    let pairs = [pair_share(a, b), pair_share(a, c), pair_share(b, c)];
    // Two distinct pairs are needed, so any ShapeOnly together with any
    // ColorOnly among the three pairs qualifies.
    pairs.contains(&PairShare::ShapeOnly) && pairs.contains(&PairShare::ColorOnly)
}

/// Exhaustive count over all unordered triples.
pub fn count_feature_triplets<I>(objects: I) -> TripletCount
where
    I: IntoIterator,
    I::Item: Into<ObjectKind>,
{
    let kinds: Vec<ObjectKind> = objects.into_iter().map(Into::into).collect();
    let n = kinds.len();
    let mut total = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                if is_triplet(kinds[i], kinds[j], kinds[k]) {
                    total += 1;
                }
            }
        }
    }
    TripletCount(total)
}

/// Number of triplets that include object `index`, used for incremental
/// updates during assignment search.
pub(crate) fn triplets_containing(kinds: &[ObjectKind], index: usize) -> u64 {
    let n = kinds.len();
    let pivot = kinds[index];
    let mut total = 0u64;
    for j in 0..n {
        if j == index {
            continue;
        }
        for k in (j + 1)..n {
            if k == index {
                continue;
            }
            if is_triplet(pivot, kinds[j], kinds[k]) {
                total += 1;
            }
        }
    }
    total
}

impl From<&crate::scene::ObjectSpec> for ObjectKind {
    fn from(obj: &crate::scene::ObjectSpec) -> Self {
        obj.kind()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Color, Shape};

    fn k(color: Color, shape: Shape) -> ObjectKind {
        ObjectKind::new(shape, color)
    }

    #[test]
    fn worked_example_is_one_triplet() {
        let objs = [
            k(Color::Green, Shape::LetterX),
            k(Color::Green, Shape::Triangle),
            k(Color::Yellow, Shape::Triangle),
        ];
        assert_eq!(count_feature_triplets(objs), TripletCount(1));
    }

    #[test]
    fn identical_objects_are_not_triplets() {
        let objs = [k(Color::Red, Shape::Circle); 3];
        assert_eq!(count_feature_triplets(objs), TripletCount(0));
    }

    #[test]
    fn empty_and_small_lists() {
        assert_eq!(count_feature_triplets(Vec::<ObjectKind>::new()), TripletCount(0));
        assert_eq!(
            count_feature_triplets([k(Color::Red, Shape::Circle), k(Color::Red, Shape::Star)]),
            TripletCount(0)
        );
    }

    #[test]
    fn all_distinct_features_have_no_triplets() {
        let objs: Vec<_> = Shape::ALL
            .into_iter()
            .zip(Color::ALL)
            .map(|(s, c)| ObjectKind::new(s, c))
            .collect();
        assert_eq!(count_feature_triplets(objs), TripletCount(0));
    }

    #[test]
    fn incremental_count_sums_to_three_times_total() {
        let objs = [
            k(Color::Green, Shape::LetterX),
            k(Color::Green, Shape::Triangle),
            k(Color::Yellow, Shape::Triangle),
            k(Color::Yellow, Shape::LetterX),
            k(Color::Red, Shape::Triangle),
        ];
        let total = count_feature_triplets(objs).0;
        let per: u64 = (0..objs.len()).map(|i| triplets_containing(&objs, i)).sum();
        assert_eq!(per, 3 * total);
    }
}
