use std::path::Path;

use nalgebra::Vector3;
use semprop::harness::{generate_scene, ConfusionMatrix, ScenarioConfig};
use semprop::map::{load_snapshot, save_snapshot, RegionMask, VoxelGrid};
use semprop::moments::UpdateOptions;
use semprop::property::PropertyTable;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn checkerboard_config() -> ScenarioConfig {
    let mut regions = String::new();
    for by in 0..4 {
        for bx in 0..4 {
            if (bx + by) % 2 == 1 {
                regions.push_str(&format!(
                    "  {{ class = \"ice\", x = [{}, {}], y = [{}, {}] }},\n",
                    bx * 4,
                    bx * 4 + 4,
                    by * 4,
                    by * 4 + 4
                ));
            }
        }
    }
    let text = format!(
        r#"
version = 1
seed = 8

[table]
classes = ["snow", "ice"]

[scene]
width = 16
height = 16
background = "snow"
regions = [
{regions}]

[scene.camera]
width = 64
height = 64
fx = 64.0
fy = 64.0
altitude = 1.0
frames = 10

[classifier]
kind = "symmetric"
accuracy = 0.9
"#
    );
    ScenarioConfig::parse(&text, Path::new("checkerboard.toml")).unwrap()
}

#[test]
fn noisy_checkerboard_is_recovered() {
    let cfg = checkerboard_config();
    let table = cfg.resolve_table().unwrap();
    let conf = cfg.confusion(2).unwrap();
    let scene = generate_scene(&cfg, &table, &conf, &mut ChaCha8Rng::seed_from_u64(cfg.seed)).unwrap();
    assert_eq!(scene.frames.len(), 10);

    let labelled: usize = scene.frames.iter().map(|(f, _)| f.labels.iter().filter(|&&l| l != 0).count()).sum();
    let wrong: usize = scene
        .frames
        .iter()
        .map(|(f, pose)| {
            let mut wrong = 0;
            for v in 0..f.height {
                for u in 0..f.width {
                    let l = f.labels[v * f.width + u];
                    if l == 0 {
                        continue;
                    }
                    let p = pose.transform(&scene.camera.back_project(u as f64, v as f64, f.depth[v * f.width + u] as f64));
                    let [x, y, _] = scene.truth_grid.voxel_id(&p);
                    if scene.layout.truth.labels[y as usize * 16 + x as usize] + 1 != l as usize {
                        wrong += 1;
                    }
                }
            }
            wrong
        })
        .sum();
    let noise = wrong as f64 / labelled as f64;
    assert!((noise - 0.1).abs() < 0.01, "label noise {noise}");

    let grid = scene.fuse(&table).unwrap();
    let map = scene.layout.probability_map(&grid).unwrap().argmax_map();
    let hits = map.labels.iter().zip(&scene.layout.truth.labels).filter(|(a, b)| a == b).count();
    assert!(hits as f64 / 256.0 >= 0.99, "recovered {hits}/256");
}

#[test]
fn integration_adds_exactly_the_point_count() {
    let cfg = checkerboard_config();
    let table = cfg.resolve_table().unwrap();
    let scene = generate_scene(&cfg, &table, &ConfusionMatrix::uniform(2), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let mut grid = scene.layout.empty_grid(&table).unwrap();
    let before: f64 = grid.cells().map(|(_, c)| c.alpha.total()).sum();
    let mut points = 0;
    for (frame, pose) in &scene.frames {
        let cloud = semprop::map::project_labels(frame, &scene.camera, pose, scene.stride).unwrap();
        points += cloud.len();
        let snapshot: Vec<Vec<f64>> = grid.cells().map(|(_, c)| c.alpha.alpha().to_vec()).collect();
        grid.integrate_cloud(&cloud).unwrap();
        for ((_, c), old) in grid.cells().zip(&snapshot) {
            assert!(c.alpha.alpha().iter().zip(old).all(|(n, o)| n >= o));
        }
    }
    let after: f64 = grid.cells().map(|(_, c)| c.alpha.total()).sum();
    assert_eq!(after - before, points as f64);
}

#[test]
fn expected_property_matches_mixture_quadrature() {
    let table = PropertyTable::friction();
    let mut grid = VoxelGrid::with_table(table.clone(), 0.1, Vector3::zeros()).unwrap();
    grid.add_counts([0, 0, 0], &[3.0, 0.0, 1.0, 0.0, 0.0, 2.0, 5.0, 1.0]).unwrap();
    let region = RegionMask::new([[0, 0, 0]]);
    let e = grid.expected_property(&region).unwrap();
    let mixture = grid.query_cell(&[0, 0, 0]).unwrap().property.unwrap();
    // composite Simpson over ±12 sd of the widest component
    let (lo, hi, n) = (-1.5, 2.5, 400_000);
    let h = (hi - lo) / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let x = lo + i as f64 * h;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * x * mixture.pdf(x);
    }
    let quad = s * h / 3.0;
    assert!((e - quad).abs() < 1e-10, "{e} vs {quad}");
}

#[test]
fn repeated_measurement_raises_favoured_weight() {
    let table = PropertyTable::friction().select(&["snow", "ice"]).unwrap();
    let mut grid = VoxelGrid::with_table(table.clone(), 0.05, Vector3::zeros()).unwrap();
    let region = RegionMask::new([[0, 0, 0], [1, 0, 0], [0, 1, 0]]);
    let mut last = 0.0;
    for _ in 0..5 {
        grid.apply_property_measurement(&region, 0.19, &table, &UpdateOptions::default()).unwrap();
        let ice = grid.local_psi(&[0, 0, 0]).unwrap().a().alpha()[1];
        assert!(ice > last);
        last = ice;
    }
    assert_eq!(grid.cell(&[1, 0, 0]).unwrap().measurement_count, 5);
    assert_eq!(grid.shared_priors().count(), 1);
}

#[test]
fn corrected_map_survives_a_snapshot() {
    let table = PropertyTable::friction().select(&["snow", "ice"]).unwrap();
    let mut grid = VoxelGrid::with_table(table.clone(), 0.05, Vector3::new(0.0, 0.0, -0.025)).unwrap();
    for x in 0..4 {
        grid.add_counts([x, 0, 0], &[4.0, 0.0]).unwrap();
    }
    let region = RegionMask::new([[0, 0, 0], [1, 0, 0]]);
    grid.apply_property_measurement(&region, 0.18, &table, &UpdateOptions::default()).unwrap();
    grid.add_counts([0, 0, 0], &[0.0, 1.0]).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.json");
    save_snapshot(&grid, &path).unwrap();
    let back = load_snapshot(&path).unwrap();
    assert_eq!(back, grid);
    for x in 0..4 {
        assert_eq!(back.query_cell(&[x, 0, 0]).unwrap(), grid.query_cell(&[x, 0, 0]).unwrap());
    }
    let again = dir.path().join("again.json");
    save_snapshot(&back, &again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}
