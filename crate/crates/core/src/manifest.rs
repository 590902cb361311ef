//! On-disk form of generated instances: a JSON manifest next to a PNG.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::instance::{GroundTruth, ImageSource, SceneParams, Task, TaskInstance};
use crate::render::{encode_png, render};
use crate::scene::{Canvas, ObjectSpec, SceneSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub id: String,
    pub task: Task,
    pub seed: u64,
    pub params: SceneParams,
    pub canvas: Canvas,
    pub objects: Vec<ObjectSpec>,
    pub ground_truth: GroundTruth,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("instance `{0}` has no synthetic scene")]
    NotSynthetic(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot encode image: {0}")]
    Image(#[from] image::ImageError),
    #[error("bad manifest {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl SceneManifest {
    pub fn from_instance(instance: &TaskInstance) -> Result<Self, ManifestError> {
        let ImageSource::Scene { scene, params } = &instance.image else {
            return Err(ManifestError::NotSynthetic(instance.id.clone()));
        };
        Ok(Self {
            id: instance.id.clone(),
            task: instance.task(),
            seed: scene.seed,
            params: params.clone(),
            canvas: scene.canvas,
            objects: scene.objects.clone(),
            ground_truth: instance.ground_truth.clone(),
        })
    }

    pub fn into_instance(self) -> TaskInstance {
        TaskInstance {
            id: self.id,
            image: ImageSource::Scene {
                scene: SceneSpec {
                    canvas: self.canvas,
                    seed: self.seed,
                    objects: self.objects,
                },
                params: self.params,
            },
            ground_truth: self.ground_truth,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ManifestError + '_ {
    move |source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `<id>.json` and `<id>.png` into `dir`; returns both paths.
pub fn write_instance(dir: &Path, instance: &TaskInstance) -> Result<(PathBuf, PathBuf), ManifestError> {
    let manifest = SceneManifest::from_instance(instance)?;
    let scene = instance.scene().expect("checked above");
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let json_path = dir.join(format!("{}.json", manifest.id));
    let png_path = dir.join(format!("{}.png", manifest.id));
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    std::fs::write(&json_path, json).map_err(io_err(&json_path))?;
    let png = encode_png(&render(scene))?;
    std::fs::write(&png_path, png).map_err(io_err(&png_path))?;
    Ok((json_path, png_path))
}

pub fn read_manifest(path: &Path) -> Result<SceneManifest, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| ManifestError::Json {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenegen::SceneGenerator;

    #[test]
    fn round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let inst = SceneGenerator::default().gen_search_scene(7, 5, true).unwrap();
        let (json, png) = write_instance(dir.path(), &inst).unwrap();
        assert_eq!(json.file_name().unwrap(), "search_n5-present_7.json");
        assert!(png.is_file());
        let back = read_manifest(&json).unwrap().into_instance();
        assert_eq!(back, inst);
    }
}
