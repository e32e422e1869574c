use super::*;
use proptest::prelude::*;

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("f{i}")).collect()
}

fn two_blob_dataset(per_class: usize, spread: f64) -> Dataset {
    // deterministic separable blobs around (2,2) and (-2,-2)
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..per_class {
        let dx = spread * ((i % 5) as f64 / 5.0 - 0.4);
        let dy = spread * ((i % 7) as f64 / 7.0 - 0.4);
        rows.push(vec![2.0 + dx, 2.0 + dy]);
        labels.push(true);
        rows.push(vec![-2.0 + dy, -2.0 + dx]);
        labels.push(false);
    }
    Dataset::new(SelectedFeatures::unscored(names(2)), rows, labels).unwrap()
}

// ---- mutual information ----

#[test]
fn mi_perfectly_informative_binary_feature() {
    let column = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
    let labels = vec![false, false, false, true, true, true];
    let mi = mutual_information(&column, &labels, 2).unwrap();
    assert!((mi - 1.0).abs() < 1e-12);
}

#[test]
fn mi_discrete_example() {
    let mi = mutual_information(&[1.0, 1.0, 2.0, 2.0], &[false, false, true, true], 2).unwrap();
    assert!((mi - 1.0).abs() < 1e-12);
}

#[test]
fn mi_independent_feature_is_near_zero() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let n = 4000;
    let column: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let labels: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    let mi = mutual_information(&column, &labels, 10).unwrap();
    assert!(mi <= 0.05, "mi = {mi}");
}

#[test]
fn mi_rejects_single_class() {
    assert!(mutual_information(&[1.0, 2.0], &[true, true], 2).is_err());
}

/// Brute-force plug-in MI: recounts every joint-histogram cell by scanning
/// the data, independent of the single-pass implementation.
pub fn mi_brute_force(column: &[f64], labels: &[bool], bins: usize) -> f64 {
    let mn = column.iter().cloned().fold(f64::INFINITY, f64::min);
    let mx = column.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n = column.len() as f64;
    let bin_of = |v: f64| -> usize {
        if mx == mn {
            0
        } else {
            let width = (mx - mn) / bins as f64;
            (((v - mn) / width).floor() as usize).min(bins - 1)
        }
    };
    let n_genuine = labels.iter().filter(|&&l| l).count();
    let p_label = [(labels.len() - n_genuine) as f64 / n, n_genuine as f64 / n];
    let mut mi = 0.0;
    for b in 0..bins {
        let cell0 = column
            .iter()
            .zip(labels)
            .filter(|(v, l)| bin_of(**v) == b && !**l)
            .count() as f64;
        let cell1 = column
            .iter()
            .zip(labels)
            .filter(|(v, l)| bin_of(**v) == b && **l)
            .count() as f64;
        let p_bin = (cell0 + cell1) / n;
        if p_bin == 0.0 {
            continue;
        }
        for (y, cell) in [cell0, cell1].iter().enumerate() {
            let p = cell / n;
            if p > 0.0 {
                mi += p * (p / (p_bin * p_label[y])).log2();
            }
        }
    }
    mi.max(0.0)
}

#[test]
fn mi_matches_brute_force_on_random_instances() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for case in 0..120 {
        let n = rng.random_range(4..40);
        let bins = rng.random_range(2..8);
        let column: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        labels[0] = true;
        labels[1] = false;
        let fast = mutual_information(&column, &labels, bins).unwrap();
        let slow = mi_brute_force(&column, &labels, bins);
        assert_eq!(fast, slow, "case {case}");
    }
}

// ---- selection ----

#[test]
fn select_all_returns_sorted_by_mi() {
    let labels = vec![false, false, true, true];
    let cols = vec![
        vec![1.0, 1.0, 2.0, 2.0], // perfect
        vec![1.0, 2.0, 1.0, 2.0], // useless
        vec![1.0, 1.0, 1.0, 2.0], // partial
    ];
    let sel = select_top_k(&names(3), &cols, &labels, 3, 2).unwrap();
    assert_eq!(sel.names[0], "f0");
    assert!(sel.scores.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn select_tie_break_prefers_catalog_order() {
    let labels = vec![false, false, true, true];
    let cols = vec![vec![1.0, 1.0, 2.0, 2.0], vec![1.0, 1.0, 2.0, 2.0]];
    let sel = select_top_k(&names(2), &cols, &labels, 1, 2).unwrap();
    assert_eq!(sel.names, vec!["f0".to_string()]);
}

#[test]
fn select_rejects_oversized_k() {
    let labels = vec![false, true];
    let cols = vec![vec![1.0, 2.0]];
    assert!(select_top_k(&names(1), &cols, &labels, 2, 2).is_err());
}

#[test]
fn select_is_row_permutation_invariant() {
    let labels = vec![false, true, true, false, true, false];
    let cols = vec![
        vec![1.0, 3.0, 2.5, 0.5, 3.5, 1.5],
        vec![5.0, 5.5, 4.0, 4.5, 6.0, 5.2],
    ];
    let sel1 = select_top_k(&names(2), &cols, &labels, 2, 4).unwrap();
    // reverse row order
    let cols_r: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| c.iter().rev().copied().collect())
        .collect();
    let labels_r: Vec<bool> = labels.iter().rev().copied().collect();
    let sel2 = select_top_k(&names(2), &cols_r, &labels_r, 2, 4).unwrap();
    assert_eq!(sel1, sel2);
}

// ---- SMOTE ----

#[test]
fn smote_on_identical_cloud_reproduces_the_point() {
    let minority = vec![vec![3.0, -1.0]; 8];
    let out = smote(&minority, 5, 10, 42).unwrap();
    assert_eq!(out.len(), 10);
    for row in out {
        assert_eq!(row, vec![3.0, -1.0]);
    }
}

#[test]
fn smote_balances_to_the_training_total() {
    // 20 genuine oversampled to match 108 impostors: 216 rows total
    let minority: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * i) as f64 % 7.0]).collect();
    let synthetic = smote(&minority, 5, 108 - 20, 7).unwrap();
    assert_eq!(minority.len() + synthetic.len() + 108 - 108, 108);
    let total = minority.len() + synthetic.len() + 108;
    assert_eq!(total, 216);
}

#[test]
fn smote_rejects_tiny_minority() {
    let minority = vec![vec![0.0]; 5];
    assert!(smote(&minority, 5, 3, 1).is_err());
}

#[test]
fn smote_points_lie_on_parent_neighbor_segments() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let minority: Vec<Vec<f64>> = (0..30)
        .map(|_| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect();
    let k = 5;
    let out = smote(&minority, k, 60, 99).unwrap();

    // exhaustive oracle: recompute each row's true k nearest neighbors
    let knn_of = |i: usize| -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = (0..minority.len())
            .filter(|&j| j != i)
            .map(|j| (sq_dist(&minority[i], &minority[j]), j))
            .collect();
        d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        d.iter().take(k).map(|&(_, j)| j).collect()
    };

    for s in &out {
        let mut explained = false;
        'outer: for (p_idx, p) in minority.iter().enumerate() {
            for &q_idx in &knn_of(p_idx) {
                let q = &minority[q_idx];
                // consistent interpolation parameter across dimensions
                let mut u: Option<f64> = None;
                let mut ok = true;
                for ((sv, pv), qv) in s.iter().zip(p).zip(q) {
                    let denom = qv - pv;
                    if denom.abs() < 1e-12 {
                        if (sv - pv).abs() > 1e-9 {
                            ok = false;
                            break;
                        }
                    } else {
                        let ui = (sv - pv) / denom;
                        match u {
                            None => u = Some(ui),
                            Some(prev) if (prev - ui).abs() > 1e-9 => {
                                ok = false;
                                break;
                            }
                            _ => {}
                        }
                    }
                }
                let in_range = u.map_or(true, |v| (-1e-9..=1.0 + 1e-9).contains(&v));
                if ok && in_range {
                    explained = true;
                    break 'outer;
                }
            }
        }
        assert!(explained, "synthetic point off every parent-neighbor segment");
    }
}

#[test]
fn smote_is_deterministic() {
    let minority: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
    assert_eq!(smote(&minority, 5, 20, 5).unwrap(), smote(&minority, 5, 20, 5).unwrap());
}

// ---- training ----

#[test]
fn one_nn_memorizes_training_rows() {
    let data = two_blob_dataset(10, 0.6);
    let params = HyperParams::default().with("k", ParamValue::Int(1));
    let model = train(ClassifierKind::Knn, &data, &params, 1).unwrap();
    for (row, &label) in data.rows.iter().zip(&data.labels) {
        assert_eq!(model.decide_row(row).accept, label);
    }
    assert_eq!(model.train_error, 0.0);
}

#[test]
fn linear_models_separate_blobs_perfectly() {
    let data = two_blob_dataset(20, 0.6);
    for (kind, params) in [
        (ClassifierKind::LogReg, HyperParams::default().with("l2", ParamValue::Float(0.01))),
        (
            ClassifierKind::Svm,
            HyperParams::default()
                .with("kernel", ParamValue::Text("linear".into()))
                .with("c", ParamValue::Float(1.0)),
        ),
    ] {
        let model = train(kind, &data, &params, 9).unwrap();
        assert_eq!(model.train_error, 0.0, "{kind}");
    }
}

#[test]
fn bayes_falls_back_to_label_prior_on_constant_features() {
    let rows = vec![vec![4.0, 4.0]; 12];
    let labels: Vec<bool> = (0..12).map(|i| i < 3).collect(); // 3 genuine, 9 impostor
    let data = Dataset::new(SelectedFeatures::unscored(names(2)), rows, labels).unwrap();
    let model = train(ClassifierKind::Bayes, &data, &HyperParams::default(), 1).unwrap();
    let d = model.decide_row(&[4.0, 4.0]);
    assert!((d.score - 0.25).abs() < 1e-9);
    assert!(!d.accept);
}

#[test]
fn degenerate_columns_never_crash_any_kind() {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..16 {
        rows.push(vec![1.0, i as f64]);
        labels.push(i % 2 == 0);
    }
    let data = Dataset::new(SelectedFeatures::unscored(names(2)), rows, labels).unwrap();
    for kind in ClassifierKind::ALL {
        let params = default_grid(kind, 2)[0].clone();
        let model = train(kind, &data, &params, 3).unwrap();
        let d = model.decide_row(&[1.0, 2.0]);
        assert!(d.score.is_finite(), "{kind}");
    }
}

#[test]
fn training_is_bit_exact_given_seed() {
    let data = two_blob_dataset(12, 1.0);
    for kind in ClassifierKind::ALL {
        let params = default_grid(kind, 2)[0].clone();
        let a = train(kind, &data, &params, 77).unwrap();
        let b = train(kind, &data, &params, 77).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap(),
            "{kind}"
        );
    }
}

// ---- tuning ----

#[test]
fn singleton_grid_returns_that_point() {
    let data = two_blob_dataset(10, 0.6);
    let grid = vec![HyperParams::default().with("k", ParamValue::Int(3))];
    let tuned = tune(ClassifierKind::Knn, &data, &grid, 10, 1).unwrap();
    assert_eq!(tuned, grid[0]);
}

#[test]
fn equal_cv_hter_keeps_first_grid_point() {
    // both k values classify the well-separated blobs perfectly
    let data = two_blob_dataset(12, 0.4);
    let grid = vec![
        HyperParams::default().with("k", ParamValue::Int(3)),
        HyperParams::default().with("k", ParamValue::Int(1)),
    ];
    let tuned = tune(ClassifierKind::Knn, &data, &grid, 10, 1).unwrap();
    assert_eq!(tuned, grid[0]);
}

#[test]
fn knn_grid_prefers_small_k_on_fine_grained_clusters() {
    // tight same-label micro-clusters far apart: 1-NN is ideal
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in 0..10 {
        let center = c as f64 * 50.0;
        let label = c % 2 == 0;
        for j in 0..6 {
            rows.push(vec![center + j as f64 * 0.05]);
            labels.push(label);
        }
    }
    let data = Dataset::new(SelectedFeatures::unscored(names(1)), rows, labels).unwrap();
    let tuned = tune(ClassifierKind::Knn, &data, &default_grid(ClassifierKind::Knn, 1), 10, 5).unwrap();
    assert!(tuned.int("k", 0) <= 3, "tuned k = {}", tuned.int("k", 0));
}

#[test]
fn tune_rejects_fewer_rows_than_folds() {
    let data = two_blob_dataset(2, 0.1); // 4 rows
    let grid = default_grid(ClassifierKind::Knn, 2);
    assert!(tune(ClassifierKind::Knn, &data, &grid, 10, 1).is_err());
}

#[test]
fn tune_is_deterministic() {
    let data = two_blob_dataset(10, 2.5);
    let grid = default_grid(ClassifierKind::Svm, 2);
    let a = tune(ClassifierKind::Svm, &data, &grid, 5, 21).unwrap();
    let b = tune(ClassifierKind::Svm, &data, &grid, 5, 21).unwrap();
    assert_eq!(a, b);
}

// ---- prediction ----

#[test]
fn one_nn_midpoint_tie_rejects() {
    let data = Dataset::new(
        SelectedFeatures::unscored(names(1)),
        vec![vec![0.0], vec![1.0]],
        vec![true, false],
    )
    .unwrap();
    let params = HyperParams::default().with("k", ParamValue::Int(1));
    let model = train(ClassifierKind::Knn, &data, &params, 1).unwrap();
    let d = model.decide_row(&[0.5]);
    assert!(!d.accept, "midpoint between opposite labels must fail closed");
}

#[test]
fn deep_genuine_point_accepted_by_all_six_kinds() {
    let data = two_blob_dataset(20, 0.6);
    for kind in ClassifierKind::ALL {
        let params = default_grid(kind, 2)[0].clone();
        let model = train(kind, &data, &params, 13).unwrap();
        let d = model.decide_row(&[2.0, 2.0]);
        assert!(d.accept, "{kind} rejected the genuine blob center (score {})", d.score);
    }
}

#[test]
fn predict_rejects_missing_feature() {
    use crate::features::FeatureVector;
    use crate::signal::Session;
    let data = two_blob_dataset(10, 0.6);
    let model = train(ClassifierKind::Bayes, &data, &HyperParams::default(), 1).unwrap();
    let mut values = std::collections::BTreeMap::new();
    values.insert("f0".to_string(), 2.0);
    let vector = FeatureVector {
        subject_id: "s".into(),
        session: Session::Testing,
        start_ms: 0,
        label: None,
        values,
    };
    match model.decide(&vector) {
        Err(crate::error::Error::MissingFeature(name)) => assert_eq!(name, "f1"),
        other => panic!("expected MissingFeature, got {other:?}"),
    }
}

// ---- persistence ----

#[test]
fn model_round_trip_reproduces_predictions_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let data = two_blob_dataset(15, 1.2);
    let probes: Vec<Vec<f64>> = (0..20)
        .map(|i| vec![i as f64 * 0.4 - 4.0, 3.0 - i as f64 * 0.3])
        .collect();
    for kind in ClassifierKind::ALL {
        let params = default_grid(kind, 2)[0].clone();
        let model = train(kind, &data, &params, 5).unwrap();
        let path = dir.path().join(format!("{}.model.json", kind.token()));
        save_model(&path, &model).unwrap();
        let loaded = load_model(&path).unwrap();
        for probe in &probes {
            let a = model.decide_row(probe);
            let b = loaded.decide_row(probe);
            assert_eq!(a.score.to_bits(), b.score.to_bits(), "{kind}");
            assert_eq!(a.accept, b.accept);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn smote_output_count_is_exact(
        n_min in 6usize..20,
        n_syn in 0usize..40,
        seed in 0u64..1000,
    ) {
        let minority: Vec<Vec<f64>> = (0..n_min).map(|i| vec![i as f64, (i as f64).sin()]).collect();
        let out = smote(&minority, 5, n_syn, seed).unwrap();
        prop_assert_eq!(out.len(), n_syn);
    }
}
