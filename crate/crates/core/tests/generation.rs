use bindbench_core::render::{encode_png, render};
use bindbench_core::triplets::count_feature_triplets;
use bindbench_core::{GroundTruth, Relation, SceneGenerator};

fn generator() -> SceneGenerator {
    SceneGenerator::default()
}

#[test]
fn same_seed_same_bytes() {
    let g = generator();
    for seed in [0, 1, 99] {
        let a = g.gen_count_scene(seed, 8, bindbench_core::ObjectKind::new(
            bindbench_core::Shape::Circle,
            bindbench_core::Color::Blue,
        ), 6).unwrap();
        let b = g.gen_count_scene(seed, 8, bindbench_core::ObjectKind::new(
            bindbench_core::Shape::Circle,
            bindbench_core::Color::Blue,
        ), 6).unwrap();
        assert_eq!(a, b);
        let (sa, sb) = (a.scene().unwrap(), b.scene().unwrap());
        assert_eq!(encode_png(&render(sa)).unwrap(), encode_png(&render(sb)).unwrap());
    }
}

#[test]
fn scenes_are_valid_and_non_overlapping() {
    let g = generator();
    for seed in 0..20 {
        for inst in [
            g.gen_search_scene(seed, 30, seed % 2 == 0).unwrap(),
            g.gen_description_scene(seed, 15, 20).unwrap(),
            g.gen_spatial_instance(seed).unwrap(),
        ] {
            inst.scene().unwrap().validate().unwrap();
        }
    }
}

#[test]
fn search_truth_matches_scene() {
    let g = generator();
    let target = g.config().search_target;
    for seed in 0..30 {
        let present = seed % 3 != 0;
        let inst = g.gen_search_scene(seed, 12, present).unwrap();
        let GroundTruth::Search { present: truth, .. } = inst.ground_truth else {
            panic!("wrong task")
        };
        let found = inst.scene().unwrap().objects.iter().filter(|o| o.kind() == target).count();
        assert_eq!(truth, present);
        assert_eq!(found, usize::from(present));
    }
}

#[test]
fn description_triplets_exact_on_small_sweep() {
    let g = generator();
    for (n, t) in [(10, 5), (10, 20), (15, 35), (20, 50)] {
        let inst = g.gen_description_scene(n as u64 * 100 + t, n, t).unwrap();
        let scene = inst.scene().unwrap();
        assert_eq!(count_feature_triplets(&scene.objects).0, t, "n={n} t={t}");
    }
}

#[test]
fn spatial_relations_are_roughly_balanced() {
    let g = generator();
    let mut counts = [0usize; 4];
    for seed in 0..200 {
        let inst = g.gen_spatial_instance(seed).unwrap();
        let GroundTruth::Spatial { correct, .. } = inst.ground_truth else {
            panic!("wrong task")
        };
        let scene = inst.scene().unwrap();
        let (a, b) = (&scene.objects[0], &scene.objects[1]);
        let rel = Relation::between(
            (i64::from(a.cx), i64::from(a.cy)),
            (i64::from(b.cx), i64::from(b.cy)),
        )
        .unwrap();
        assert_eq!(rel.index(), correct);
        counts[correct] += 1;
    }
    for c in counts {
        assert!((35..=65).contains(&c), "{counts:?}");
    }
}
