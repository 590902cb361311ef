//! Scene generation, scaffolding, prompting, answer parsing and scoring for
//! feature-binding benchmarks.

pub mod ingest;
pub mod instance;
pub mod manifest;
pub mod metrics;
pub mod parsing;
pub mod prompting;
pub mod render;
pub mod rows;
pub mod scaffold;
pub mod scene;
pub mod scenegen;
pub mod scoring;
pub mod triplets;

pub use instance::{GroundTruth, ImageSource, Relation, SceneParams, Target, Task, TaskInstance};
pub use parsing::{parse_answer, AnswerValue, ParseOptions, ParseStatus, ParsedAnswer};
pub use prompting::{build_prompt, Condition, PromptMetadata, PromptText};
pub use scaffold::{apply_scaffold, ScaffoldConfig, ScaffoldVariant};
pub use scene::{Canvas, Color, ObjectKind, ObjectSpec, Rotation, SceneSpec, Shape};
pub use scenegen::{GenError, GeneratorConfig, SceneGenerator};
