use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mexlab_core::datasets::{load_csv, load_matrix_csv, synth_halfspace, synth_tree_labeled, write_csv, write_matrix_csv};
use mexlab_core::oracle::ServerModel;

#[test]
fn dataset_csv_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (ds, _) = synth_halfspace(7, 200, &mut rng).unwrap();
    let path = dir.path().join("ds.csv");
    write_csv(&ds, &path).unwrap();
    let back = load_csv(&path).unwrap();
    assert_eq!(back.labels, ds.labels);
    for (a, b) in back.features.iter().flatten().zip(ds.features.iter().flatten()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn matrix_csv_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let rows = vec![vec![0.1, -1e-300, 123456.789], vec![f64::MIN_POSITIVE, 1.0 / 3.0, -0.0]];
    let path = dir.path().join("m.csv");
    write_matrix_csv(&rows, &path).unwrap();
    let back = load_matrix_csv(&path).unwrap();
    let bits = |m: &[Vec<f64>]| m.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&back), bits(&rows));
}

#[test]
fn three_class_tree_survives_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (ds, tree) = synth_tree_labeled(5, 300, 3, 3, &mut rng).unwrap();
    let path = dir.path().join("tree.csv");
    write_csv(&ds, &path).unwrap();
    let back = load_csv(&path).unwrap();
    assert_eq!(back.classes(), vec![0, 1, 2]);

    let model = ServerModel::DecisionTree(tree);
    let json = serde_json::to_string(&model).unwrap();
    let model2: ServerModel = serde_json::from_str(&json).unwrap();
    for (x, y) in back.features.iter().zip(&back.labels) {
        assert_eq!(model2.predict(x).unwrap(), *y);
    }
}
