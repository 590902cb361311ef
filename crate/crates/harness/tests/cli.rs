mod common;

use std::path::Path;
use std::process::{Command, Output};

fn bindbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bindbench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_run_score_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, common::oracle_toml(Path::new("out"), Path::new("cache"), 4)).unwrap();

    let out = bindbench(&["gen", "--config", p(&config), "--out", p(&dir.path().join("scenes"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let pngs = std::fs::read_dir(dir.path().join("scenes"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "png"))
        .count();
    assert_eq!(pngs, 5 * 4);

    let out = bindbench(&["run", "--config", p(&config)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // Relative paths resolve next to the config file.
    let records = dir.path().join("out/records.jsonl");
    assert_eq!(std::fs::read_to_string(&records).unwrap().lines().count(), 5 * 4 * 2);

    let scores = dir.path().join("scores.json");
    let out = bindbench(&["score", "--records", p(&records), "--out", p(&scores)]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&scores).unwrap()).unwrap();
    let cells = json["cells"].as_array().unwrap();
    assert!(cells
        .iter()
        .filter(|c| c["metric"] == "accuracy")
        .all(|c| c["value"] == 1.0));

    let report = dir.path().join("report");
    let out = bindbench(&["report", "--records", p(&records), "--out", p(&report)]);
    assert!(out.status.success());
    for f in ["tables/search.csv", "tables/count.md", "tables/describe.json", "charts/spatial.svg"] {
        assert!(report.join(f).is_file(), "{f}");
    }
}

#[test]
fn run_exits_2_when_cells_are_incomplete() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        r#"
instances_per_cell = 1
conditions = ["simple"]
out_dir = "out"

[tasks.search]
n_objects = [4]

[[providers]]
kind = "openai_compatible"
model_id = "nowhere"
base_url = "http://127.0.0.1:9"
max_retries = 0
timeout_secs = 2
"#,
    )
    .unwrap();
    let out = bindbench(&["run", "--config", p(&config)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("incomplete"));
}

#[test]
fn augment_single_file_and_directory() {
    let dir = tempfile::tempdir().unwrap();
    let scenes = dir.path().join("scenes");
    std::fs::create_dir_all(&scenes).unwrap();
    let img = image::RgbImage::from_pixel(256, 192, image::Rgb([255, 255, 255]));
    img.save(scenes.join("a.png")).unwrap();
    img.save(scenes.join("b.png")).unwrap();

    let single = dir.path().join("single.png");
    let out = bindbench(&["augment", "--variant", "rows", "--n", "3", "--in", p(&scenes.join("a.png")), "--out", p(&single)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let drawn = image::open(&single).unwrap().to_rgb8();
    assert_eq!(drawn.dimensions(), (256, 192));
    assert!(drawn.pixels().any(|px| px.0 != [255, 255, 255]));

    let many = dir.path().join("many");
    let out = bindbench(&["augment", "--variant", "none", "--n", "3", "--in", p(&scenes), "--out", p(&many)]);
    assert!(out.status.success());
    let copy = image::open(many.join("b.png")).unwrap().to_rgb8();
    assert_eq!(copy, img, "none leaves pixels unchanged");
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = bindbench(&["augment", "--variant", "spiral", "--in", "x.png", "--out", "y.png"]);
    assert!(!out.status.success());
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "conditions = []\nproviders = []\n").unwrap();
    let out = bindbench(&["run", "--config", p(&config)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid config"));
}
