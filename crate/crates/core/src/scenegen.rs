//! Seeded generators for the four benchmark tasks.
//!
//! Every generator is a pure function of `(config, seed, params)`: the RNG is
//! a ChaCha stream seeded from the scene seed, and objects are placed by
//! rejection sampling with a hard attempt limit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{
    synthetic_id, GroundTruth, ImageSource, Relation, SceneParams, TaskInstance, Target,
};
use crate::scene::{Canvas, Color, ObjectKind, ObjectSpec, Rect, Rotation, SceneSpec, Shape};
use crate::triplets::{count_feature_triplets, triplets_containing};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("seed {seed}: could not place object {object} after {attempts} attempts")]
    Placement {
        seed: u64,
        object: usize,
        attempts: u32,
    },
    #[error("seed {seed}: no assignment of {n_objects} objects with exactly {n_triplets} triplets found after {restarts} restarts")]
    Infeasible {
        seed: u64,
        n_objects: usize,
        n_triplets: u64,
        restarts: u32,
    },
    #[error("seed {seed}: invalid parameters: {reason}")]
    InvalidParams { seed: u64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub canvas: Canvas,
    /// Object edge length range in pixels (inclusive; sizes are even).
    pub min_size: u32,
    pub max_size: u32,
    /// Minimum empty space between two bounding boxes.
    pub min_gap: u32,
    pub max_attempts: u32,
    pub max_restarts: u32,
    pub search_target: ObjectKind,
    pub search_distractors: Vec<ObjectKind>,
    /// Minimum horizontal and vertical separation of the two spatial targets.
    pub spatial_margin: u32,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            canvas: Canvas::default(),
            min_size: 32,
            max_size: 40,
            min_gap: 4,
            max_attempts: 10_000,
            max_restarts: 1_000,
            search_target: ObjectKind::new(Shape::LetterL, Color::Green),
            search_distractors: vec![
                ObjectKind::new(Shape::LetterL, Color::Red),
                ObjectKind::new(Shape::LetterT, Color::Green),
                ObjectKind::new(Shape::LetterT, Color::Red),
            ],
            spatial_margin: 32,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SceneGenerator {
    config: GeneratorConfig,
}

impl SceneGenerator {
    pub fn new(config: GeneratorConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    /// Conjunctive search: one target among distractors that each share a
    /// single feature with it, or distractors only when `present` is false.
    /// Dispatches on `params` to the matching generator.
    pub fn generate(&self, seed: u64, params: &SceneParams) -> Result<TaskInstance, GenError> {
        match params {
            SceneParams::Search { n_objects, present } => self.gen_search_scene(seed, *n_objects, *present),
            SceneParams::Count {
                n_targets,
                n_distractors,
                target,
            } => self.gen_count_scene(seed, *n_targets, *target, *n_distractors),
            SceneParams::Describe {
                n_objects,
                n_triplets,
            } => self.gen_description_scene(seed, *n_objects, *n_triplets),
            SceneParams::Spatial { n_distractors } => self.gen_spatial_instance_with(seed, *n_distractors),
        }
    }

    pub fn gen_search_scene(
        &self,
        seed: u64,
        n_objects: usize,
        present: bool,
    ) -> Result<TaskInstance, GenError> {
        if n_objects < 2 {
            return Err(invalid(seed, "search scenes need at least 2 objects"));
        }
        let target = self.config.search_target;
        if self.config.search_distractors.is_empty()
            || self.config.search_distractors.contains(&target)
        {
            return Err(invalid(seed, "search distractors must be non-empty and exclude the target"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut kinds = Vec::with_capacity(n_objects);
        if present {
            kinds.push(target);
        }
        while kinds.len() < n_objects {
            let d = *self
                .config
                .search_distractors
                .choose(&mut rng)
                .expect("non-empty distractors");
            kinds.push(d);
        }
        kinds.shuffle(&mut rng);
        let objects = self.place(seed, &mut rng, &kinds, &[])?;
        let params = SceneParams::Search { n_objects, present };
        Ok(self.finish(
            seed,
            params,
            objects,
            GroundTruth::Search {
                present,
                target: Target::Object(target),
            },
        ))
    }

    pub fn gen_count_scene(
        &self,
        seed: u64,
        n_targets: usize,
        target: ObjectKind,
        n_distractors: usize,
    ) -> Result<TaskInstance, GenError> {
        if n_targets < 1 {
            return Err(invalid(seed, "count scenes need at least one target"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let others: Vec<ObjectKind> = ObjectKind::all().filter(|k| *k != target).collect();
        let mut kinds = vec![target; n_targets];
        for _ in 0..n_distractors {
            kinds.push(*others.choose(&mut rng).expect("63 alternatives"));
        }
        kinds.shuffle(&mut rng);
        let objects = self.place(seed, &mut rng, &kinds, &[])?;
        let params = SceneParams::Count {
            n_targets,
            n_distractors,
            target,
        };
        Ok(self.finish(
            seed,
            params,
            objects,
            GroundTruth::Count {
                count: n_targets as u32,
                target: Target::Object(target),
            },
        ))
    }

    /// Scene whose feature-triplet count is exactly `n_triplets`.
    pub fn gen_description_scene(
        &self,
        seed: u64,
        n_objects: usize,
        n_triplets: u64,
    ) -> Result<TaskInstance, GenError> {
        if n_objects == 0 {
            return Err(invalid(seed, "description scenes need at least one object"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kinds = self.assign_triplets(seed, &mut rng, n_objects, n_triplets)?;
        let objects = self.place(seed, &mut rng, &kinds, &[])?;
        let ground = objects.iter().map(ObjectSpec::kind).collect();
        let params = SceneParams::Describe {
            n_objects,
            n_triplets,
        };
        Ok(self.finish(seed, params, objects, GroundTruth::Describe { objects: ground }))
    }

    /// Four-option quadrant question about two uniquely identifiable objects
    /// with default distractor count.
    pub fn gen_spatial_instance(&self, seed: u64) -> Result<TaskInstance, GenError> {
        self.gen_spatial_instance_with(seed, 6)
    }

    pub fn gen_spatial_instance_with(
        &self,
        seed: u64,
        n_distractors: usize,
    ) -> Result<TaskInstance, GenError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let relation = Relation::OPTIONS[rng.gen_range(0..4)];
        let all: Vec<ObjectKind> = ObjectKind::all().collect();
        let kind_a = *all.choose(&mut rng).expect("palette");
        let kind_b = loop {
            let k = *all.choose(&mut rng).expect("palette");
            if k != kind_a {
                break k;
            }
        };

        let margin = i64::from(self.config.spatial_margin);
        let mut pair = None;
        for _ in 0..self.config.max_attempts {
            let a = self.random_object(&mut rng, kind_a);
            let b = self.random_object(&mut rng, kind_b);
            let (ax, ay) = (i64::from(a.cx), i64::from(a.cy));
            let (bx, by) = (i64::from(b.cx), i64::from(b.cy));
            if (ax - bx).abs() < margin || (ay - by).abs() < margin {
                continue;
            }
            if Relation::between((ax, ay), (bx, by)) != Some(relation) {
                continue;
            }
            if self.too_close(&a.bbox(), &[b]) {
                continue;
            }
            pair = Some((a, b));
            break;
        }
        let (a, b) = pair.ok_or(GenError::Placement {
            seed,
            object: 1,
            attempts: self.config.max_attempts,
        })?;

        let distractor_kinds: Vec<ObjectKind> =
            all.iter().copied().filter(|k| *k != kind_a && *k != kind_b).collect();
        let kinds: Vec<ObjectKind> = (0..n_distractors)
            .map(|_| *distractor_kinds.choose(&mut rng).expect("palette"))
            .collect();
        let placed = [a, b];
        let mut objects = placed.to_vec();
        objects.extend(self.place(seed, &mut rng, &kinds, &placed)?);

        let params = SceneParams::Spatial { n_distractors };
        Ok(self.finish(
            seed,
            params,
            objects,
            GroundTruth::Spatial {
                correct: relation.index(),
                object_a: Target::Object(kind_a),
                object_b: Target::Object(kind_b),
                options: Relation::OPTIONS.iter().map(|r| r.text().to_string()).collect(),
            },
        ))
    }

    fn finish(
        &self,
        seed: u64,
        params: SceneParams,
        objects: Vec<ObjectSpec>,
        ground_truth: GroundTruth,
    ) -> TaskInstance {
        TaskInstance {
            id: synthetic_id(&params, seed),
            image: ImageSource::Scene {
                scene: SceneSpec {
                    canvas: self.config.canvas,
                    seed,
                    objects,
                },
                params,
            },
            ground_truth,
        }
    }

    fn random_object(&self, rng: &mut ChaCha8Rng, kind: ObjectKind) -> ObjectSpec {
        let size = 2 * rng.gen_range(self.config.min_size / 2..=self.config.max_size / 2);
        let half = size / 2;
        let cx = rng.gen_range(half..=self.config.canvas.width - size + half);
        let cy = rng.gen_range(half..=self.config.canvas.height - size + half);
        let rot = Rotation::ALL[rng.gen_range(0..4)];
        ObjectSpec {
            shape: kind.shape,
            color: kind.color,
            cx,
            cy,
            size,
            rot,
        }
    }

    fn too_close(&self, bbox: &Rect, placed: &[ObjectSpec]) -> bool {
        let grown = bbox.inflate(i64::from(self.config.min_gap));
        placed.iter().any(|o| grown.intersects(&o.bbox()))
    }

    /// Rejection-samples a position for each kind, in order.
    fn place(
        &self,
        seed: u64,
        rng: &mut ChaCha8Rng,
        kinds: &[ObjectKind],
        already: &[ObjectSpec],
    ) -> Result<Vec<ObjectSpec>, GenError> {
        let max = self.config.max_size;
        if max > self.config.canvas.width || max > self.config.canvas.height || self.config.min_size < 2 {
            return Err(invalid(seed, "object size range does not fit the canvas"));
        }
        let mut all = already.to_vec();
        let mut placed = Vec::with_capacity(kinds.len());
        for (index, kind) in kinds.iter().enumerate() {
            let mut ok = None;
            for _ in 0..self.config.max_attempts {
                let candidate = self.random_object(rng, *kind);
                if !self.too_close(&candidate.bbox(), &all) {
                    ok = Some(candidate);
                    break;
                }
            }
            let obj = ok.ok_or(GenError::Placement {
                seed,
                object: already.len() + index,
                attempts: self.config.max_attempts,
            })?;
            all.push(obj);
            placed.push(obj);
        }
        Ok(placed)
    }

    /// Randomized local search over (shape, color) assignments, with restarts,
    /// until the exhaustive triplet count equals the request.
    fn assign_triplets(
        &self,
        seed: u64,
        rng: &mut ChaCha8Rng,
        n_objects: usize,
        n_triplets: u64,
    ) -> Result<Vec<ObjectKind>, GenError> {
        let n = n_objects as u64;
        let max_triples = n * n.saturating_sub(1) * n.saturating_sub(2) / 6;
        if n_triplets > max_triples {
            return Err(GenError::Infeasible {
                seed,
                n_objects,
                n_triplets,
                restarts: 0,
            });
        }
        let steps = 60 * n_objects.max(4);
        for _ in 0..self.config.max_restarts {
            let mut kinds: Vec<ObjectKind> = (0..n_objects)
                .map(|_| {
                    ObjectKind::new(
                        *Shape::ALL.choose(rng).expect("shapes"),
                        *Color::ALL.choose(rng).expect("colors"),
                    )
                })
                .collect();
            let mut total = count_feature_triplets(kinds.iter().copied()).0;
            for _ in 0..steps {
                if total == n_triplets {
                    break;
                }
                let i = rng.gen_range(0..n_objects);
                let current = kinds[i];
                let before = triplets_containing(&kinds, i);
                let mut best: Vec<(ObjectKind, u64)> = Vec::new();
                let mut best_gap = u64::MAX;
                let candidates = Shape::ALL
                    .into_iter()
                    .filter(|s| *s != current.shape)
                    .map(|s| ObjectKind::new(s, current.color))
                    .chain(
                        Color::ALL
                            .into_iter()
                            .filter(|c| *c != current.color)
                            .map(|c| ObjectKind::new(current.shape, c)),
                    );
                for candidate in candidates {
                    kinds[i] = candidate;
                    let after = triplets_containing(&kinds, i);
                    let new_total = total - before + after;
                    let gap = new_total.abs_diff(n_triplets);
                    if gap < best_gap {
                        best_gap = gap;
                        best.clear();
                    }
                    if gap == best_gap {
                        best.push((candidate, new_total));
                    }
                }
                let (chosen, new_total) = if best_gap < total.abs_diff(n_triplets) || rng.gen_bool(0.5) {
                    *best.choose(rng).expect("14 candidates")
                } else {
                    (current, total)
                };
                kinds[i] = chosen;
                total = new_total;
            }
            if total == n_triplets {
                debug_assert_eq!(count_feature_triplets(kinds.iter().copied()).0, n_triplets);
                return Ok(kinds);
            }
        }
        Err(GenError::Infeasible {
            seed,
            n_objects,
            n_triplets,
            restarts: self.config.max_restarts,
        })
    }
}

fn invalid(seed: u64, reason: &str) -> GenError {
    GenError::InvalidParams {
        seed,
        reason: reason.to_string(),
    }
}
