//! Task instances: an image source plus the ground truth a model is scored
//! against.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scene::{ObjectKind, SceneSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Search,
    Count,
    Describe,
    Spatial,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Search, Task::Count, Task::Describe, Task::Spatial];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Search => "search",
            Task::Count => "count",
            Task::Describe => "describe",
            Task::Spatial => "spatial",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown task `{s}`"))
    }
}

/// What a question refers to: a palette object, or free text for external
/// images ("strawberries", "the jar").
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Object(ObjectKind),
    Named(String),
}

impl Target {
    pub fn phrase(&self) -> String {
        match self {
            Target::Object(kind) => kind.phrase(),
            Target::Named(name) => name.clone(),
        }
    }

    pub fn plural_phrase(&self) -> String {
        match self {
            Target::Object(kind) => kind.plural_phrase(),
            Target::Named(name) => name.clone(),
        }
    }
}

/// Relation of object A to object B on a y-down canvas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

impl Relation {
    /// Option order used by every generated spatial question (A-D).
    pub const OPTIONS: [Relation; 4] = [
        Relation::TopLeft,
        Relation::TopRight,
        Relation::BottomLeft,
        Relation::BottomRight,
    ];

    pub fn text(self) -> &'static str {
        match self {
            Relation::TopLeft => "top-left",
            Relation::TopRight => "top-right",
            Relation::BottomLeft => "bottom-left",
            Relation::BottomRight => "bottom-right",
        }
    }

    pub fn index(self) -> usize {
        Relation::OPTIONS.iter().position(|r| *r == self).unwrap_or(0)
    }

    pub fn from_index(index: usize) -> Option<Relation> {
        Relation::OPTIONS.get(index).copied()
    }

    /// Sign rule over `(x_a - x_b, y_a - y_b)`; `None` when either
    /// difference is zero.
    pub fn between(a: (i64, i64), b: (i64, i64)) -> Option<Relation> {
        let dx = a.0 - b.0;
        let dy = a.1 - b.1;
        match (dx.signum(), dy.signum()) {
            (-1, -1) => Some(Relation::TopLeft),
            (1, -1) => Some(Relation::TopRight),
            (-1, 1) => Some(Relation::BottomLeft),
            (1, 1) => Some(Relation::BottomRight),
            _ => None,
        }
    }

    pub fn opposite(self) -> Relation {
        match self {
            Relation::TopLeft => Relation::BottomRight,
            Relation::TopRight => Relation::BottomLeft,
            Relation::BottomLeft => Relation::TopRight,
            Relation::BottomRight => Relation::TopLeft,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum GroundTruth {
    Search {
        present: bool,
        target: Target,
    },
    Count {
        count: u32,
        target: Target,
    },
    Describe {
        objects: Vec<ObjectKind>,
    },
    Spatial {
        correct: usize,
        object_a: Target,
        object_b: Target,
        options: Vec<String>,
    },
}

impl GroundTruth {
    pub fn task(&self) -> Task {
        match self {
            GroundTruth::Search { .. } => Task::Search,
            GroundTruth::Count { .. } => Task::Count,
            GroundTruth::Describe { .. } => Task::Describe,
            GroundTruth::Spatial { .. } => Task::Spatial,
        }
    }
}

/// Generator parameters of a synthetic instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum SceneParams {
    Search {
        n_objects: usize,
        present: bool,
    },
    Count {
        n_targets: usize,
        n_distractors: usize,
        target: ObjectKind,
    },
    Describe {
        n_objects: usize,
        n_triplets: u64,
    },
    Spatial {
        n_distractors: usize,
    },
}

impl SceneParams {
    /// Short slug used in instance ids and image file names.
    pub fn slug(&self) -> String {
        match self {
            SceneParams::Search { n_objects, present } => {
                format!("n{n_objects}-{}", if *present { "present" } else { "absent" })
            }
            SceneParams::Count {
                n_targets,
                n_distractors,
                ..
            } => format!("t{n_targets}-d{n_distractors}"),
            SceneParams::Describe {
                n_objects,
                n_triplets,
            } => format!("n{n_objects}-t{n_triplets}"),
            SceneParams::Spatial { n_distractors } => format!("d{n_distractors}"),
        }
    }

    /// Difficulty level reported in aggregate tables. Descriptions are
    /// keyed by object count and triplet count together.
    pub fn difficulty(&self) -> String {
        match self {
            SceneParams::Search { n_objects, .. } => n_objects.to_string(),
            SceneParams::Count { n_targets, .. } => n_targets.to_string(),
            SceneParams::Describe {
                n_objects,
                n_triplets,
            } => format!("{n_objects}/{n_triplets}"),
            SceneParams::Spatial { .. } => "2d".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ImageSource {
    Scene {
        scene: SceneSpec,
        params: SceneParams,
    },
    External {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        difficulty: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub id: String,
    pub image: ImageSource,
    pub ground_truth: GroundTruth,
}

impl TaskInstance {
    pub fn task(&self) -> Task {
        self.ground_truth.task()
    }

    pub fn scene(&self) -> Option<&SceneSpec> {
        match &self.image {
            ImageSource::Scene { scene, .. } => Some(scene),
            ImageSource::External { .. } => None,
        }
    }

    pub fn difficulty(&self) -> String {
        match &self.image {
            ImageSource::Scene { params, .. } => params.difficulty(),
            ImageSource::External { difficulty, .. } => {
                difficulty.clone().unwrap_or_else(|| "external".to_string())
            }
        }
    }
}

/// `<task>_<params>_<seed>`, shared by instance ids and PNG names.
pub fn synthetic_id(params: &SceneParams, seed: u64) -> String {
    let task = match params {
        SceneParams::Search { .. } => Task::Search,
        SceneParams::Count { .. } => Task::Count,
        SceneParams::Describe { .. } => Task::Describe,
        SceneParams::Spatial { .. } => Task::Spatial,
    };
    format!("{task}_{}_{seed}", params.slug())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_rule() {
        assert_eq!(Relation::between((100, 100), (300, 300)), Some(Relation::TopLeft));
        assert_eq!(Relation::between((300, 300), (100, 100)), Some(Relation::BottomRight));
        assert_eq!(Relation::between((300, 100), (100, 300)), Some(Relation::TopRight));
        assert_eq!(Relation::between((100, 300), (100, 100)), None);
    }

    #[test]
    fn swapping_gives_diagonal_opposite() {
        for a in [(10, 20), (400, 30), (50, 450), (300, 300)] {
            for b in [(200, 200), (5, 7), (499, 501)] {
                if let Some(r) = Relation::between(a, b) {
                    assert_eq!(Relation::between(b, a), Some(r.opposite()));
                    assert_eq!(r.index() + r.opposite().index(), 3);
                }
            }
        }
    }

    #[test]
    fn ground_truth_json_shape() {
        let gt = GroundTruth::Count {
            count: 14,
            target: Target::Named("strawberries".into()),
        };
        let json = serde_json::to_value(&gt).unwrap();
        assert_eq!(json["task"], "count");
        assert_eq!(json["count"], 14);
        let back: GroundTruth = serde_json::from_value(json).unwrap();
        assert_eq!(back, gt);
    }
}
