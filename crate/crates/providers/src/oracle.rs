//! A model that answers from ground truth, with seeded, configurable errors.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use bindbench_core::{GroundTruth, ObjectKind, TaskInstance};

/// Error rates of the oracle. All zero gives exactly correct answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleErrorModel {
    /// Probability of answering the wrong boolean on search.
    pub flip_rate: f64,
    /// `(offset, probability)` pairs added to the true count; the remaining
    /// mass leaves the count unchanged. Results are clamped at zero.
    pub count_noise: Vec<(i64, f64)>,
    /// Per-object probability of reporting another object's color.
    pub color_swap_rate: f64,
    /// Per-object probability of reporting another object's shape.
    pub shape_swap_rate: f64,
    /// Per-object probability of leaving the object out.
    pub omission_rate: f64,
    /// Probability of picking a wrong option on spatial questions.
    pub choice_error_rate: f64,
    pub seed: u64,
}

impl Default for OracleErrorModel {
    fn default() -> Self {
        Self {
            flip_rate: 0.0,
            count_noise: Vec::new(),
            color_swap_rate: 0.0,
            shape_swap_rate: 0.0,
            omission_rate: 0.0,
            choice_error_rate: 0.0,
            seed: 0,
        }
    }
}

impl OracleErrorModel {
    pub fn perfect() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), String> {
        let rates = [
            ("flip_rate", self.flip_rate),
            ("color_swap_rate", self.color_swap_rate),
            ("shape_swap_rate", self.shape_swap_rate),
            ("omission_rate", self.omission_rate),
            ("choice_error_rate", self.choice_error_rate),
        ];
        for (name, rate) in rates {
            if !(0.0..=1.0).contains(&rate) {
                return Err(format!("{name} must be in [0, 1], got {rate}"));
            }
        }
        let mut total = 0.0;
        for (offset, p) in &self.count_noise {
            if !(0.0..=1.0).contains(p) {
                return Err(format!("count_noise probability for offset {offset} is {p}"));
            }
            total += p;
        }
        if total > 1.0 + 1e-9 {
            return Err(format!("count_noise probabilities sum to {total} > 1"));
        }
        Ok(())
    }

    /// RNG for one answer. Keyed by content, never by call order, so results
    /// do not depend on scheduling.
    fn rng(&self, instance_id: &str, salt: &str) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(instance_id.as_bytes());
        h.update([0]);
        h.update(salt.as_bytes());
        let digest = h.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(seed)
    }
}

/// Answer text for `instance` in the bracketed answer grammar.
pub fn oracle_answer(instance: &TaskInstance, model: &OracleErrorModel) -> String {
    oracle_answer_salted(instance, model, "")
}

/// Like [`oracle_answer`], with `salt` (typically the prompt) mixed into the
/// RNG so that each prompt condition draws its own errors.
pub fn oracle_answer_salted(instance: &TaskInstance, model: &OracleErrorModel, salt: &str) -> String {
    let mut rng = model.rng(&instance.id, salt);
    match &instance.ground_truth {
        GroundTruth::Search { present, .. } => {
            let answer = if rng.gen_bool(model.flip_rate) { !present } else { *present };
            format!("[{}]", if answer { "True" } else { "False" })
        }
        GroundTruth::Count { count, .. } => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut offset = 0;
            for (o, p) in &model.count_noise {
                acc += p;
                if u < acc {
                    offset = *o;
                    break;
                }
            }
            format!("[{}]", (i64::from(*count) + offset).max(0))
        }
        GroundTruth::Describe { objects } => {
            let ordered = reading_order(instance, objects);
            let mut lines = Vec::new();
            for kind in &ordered {
                if rng.gen_bool(model.omission_rate) {
                    continue;
                }
                let mut reported = *kind;
                if rng.gen_bool(model.color_swap_rate) {
                    if let Some(c) = borrow(&mut rng, &ordered, |k| k.color, kind.color) {
                        reported.color = c;
                    }
                }
                if rng.gen_bool(model.shape_swap_rate) {
                    if let Some(s) = borrow(&mut rng, &ordered, |k| k.shape, kind.shape) {
                        reported.shape = s;
                    }
                }
                lines.push(reported.phrase());
            }
            let mut text = String::from("[\n");
            for line in lines {
                text.push_str(&line);
                text.push('\n');
            }
            text.push(']');
            text
        }
        GroundTruth::Spatial { correct, options, .. } => {
            let n = options.len().max(1);
            let mut pick = *correct;
            if n > 1 && rng.gen_bool(model.choice_error_rate) {
                let wrong: Vec<usize> = (0..n).filter(|i| i != correct).collect();
                pick = *wrong.choose(&mut rng).expect("at least one wrong option");
            }
            format!("[{}]", (b'A' + pick as u8) as char)
        }
    }
}

/// Scene objects top to bottom, left to right; ground-truth order when no
/// scene is available.
fn reading_order(instance: &TaskInstance, truth: &[ObjectKind]) -> Vec<ObjectKind> {
    match instance.scene() {
        Some(scene) => {
            let mut objs: Vec<_> = scene.objects.iter().collect();
            objs.sort_by_key(|o| (o.cy, o.cx));
            objs.into_iter().map(|o| o.kind()).collect()
        }
        None => truth.to_vec(),
    }
}

/// A feature value carried by another object in the scene: an illusory
/// conjunction. `None` when every object shares `own`.
fn borrow<T: Copy + PartialEq>(
    rng: &mut ChaCha8Rng,
    objects: &[ObjectKind],
    feature: impl Fn(&ObjectKind) -> T,
    own: T,
) -> Option<T> {
    let others: Vec<T> = objects.iter().map(&feature).filter(|v| *v != own).collect();
    others.choose(rng).copied()
}
