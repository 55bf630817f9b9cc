use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use qmlids::dataset::Dataset;
use qmlids::ingest::{ingest_csv, ingest_reader};
use qmlids::preprocess::{preprocess, stratified_split, FittedReducer, LabelMode, PreprocessConfig, Reducer};
use qmlids::report::comparison_table;
use qmlids::synth::{make_synthetic, SynthConfig, SynthKind};
use qmlids_core::linalg::Matrix;
use qmlids_core::metrics::evaluate;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn flows_config() -> PreprocessConfig {
    PreprocessConfig {
        mode: LabelMode::Multiclass,
        drop_columns: vec!["flow_id".into()],
        categorical_columns: vec!["proto".into(), "service".into()],
        ..PreprocessConfig::default()
    }
}

#[test]
fn flows_fixture_ingest() {
    let ds = ingest_csv(&fixture("flows.csv"), &flows_config()).unwrap();
    assert_eq!(ds.len(), 300);
    assert_eq!(ds.class_names, ["benign", "dos", "portscan"]);
    assert_eq!(ds.class_counts(), [150, 90, 60]);
    // 6 numeric columns + 3 protocols + 5 services
    assert_eq!(ds.num_features(), 14);
    assert!(ds.feature_names.iter().any(|n| n == "proto=icmp"));
    assert!(ds.features.as_slice().iter().any(|v| v.is_nan()));
    assert!(ds.provenance.transforms[0].contains("2 dropped"));

    let binary = PreprocessConfig { mode: LabelMode::Binary, ..flows_config() };
    let ds = ingest_csv(&fixture("flows.csv"), &binary).unwrap();
    assert_eq!(ds.class_names, ["benign", "attack"]);
    assert_eq!(ds.class_counts(), [150, 150]);
}

#[test]
fn positive_classes_select_attacks() {
    let cfg = PreprocessConfig {
        mode: LabelMode::Binary,
        positive_classes: vec!["dos".into()],
        ..flows_config()
    };
    // unlisted attack labels fall on the benign side
    let ds = ingest_csv(&fixture("flows.csv"), &cfg).unwrap();
    assert_eq!(ds.class_counts(), [210, 90]);
}

#[test]
fn one_hot_levels_sorted() {
    let text = "a,kind,label\n1,z,benign\n2,b,attack\n3,m,benign\n4,b,attack\n";
    let cfg = PreprocessConfig { categorical_columns: vec!["kind".into()], ..PreprocessConfig::default() };
    let ds = ingest_reader(text.as_bytes(), "inline", &cfg).unwrap();
    assert_eq!(ds.feature_names, ["a", "kind=b", "kind=m", "kind=z"]);
    assert_eq!(ds.features.row(0), [1.0, 0.0, 0.0, 1.0]);
}

#[test]
fn missing_label_column_is_an_error() {
    let text = "a,b\n1,2\n";
    assert!(ingest_reader(text.as_bytes(), "inline", &PreprocessConfig::default()).is_err());
}

#[test]
fn no_test_leakage() {
    let ds = ingest_csv(&fixture("flows.csv"), &flows_config()).unwrap();
    let cfg = PreprocessConfig { reducer: Reducer::Pca, ..flows_config() };
    let split = preprocess(ds.clone(), &cfg).unwrap();
    let n_train = split.train.len();
    for entry in split.train.provenance.transforms.iter().filter(|e| e.contains("fitted on")) {
        assert!(entry.contains(&format!("fitted on {n_train} train rows")), "{entry}");
    }
    assert_eq!(split.train.provenance.transforms, split.test.provenance.transforms);

    // Corrupting the test rows must leave every fitted statistic unchanged.
    let mut poisoned = ds.clone();
    let (_, test_idx) = stratified_split(&ds.labels, 3, cfg.train_fraction, cfg.seed).unwrap();
    for &i in &test_idx {
        poisoned.features.row_mut(i).iter_mut().for_each(|v| *v = 1e9);
    }
    let again = preprocess(poisoned, &cfg).unwrap();
    assert_eq!(again.fitted, split.fitted);
    assert_eq!(again.train.features, split.train.features);
    assert!(matches!(again.fitted.reducer, Some(FittedReducer::Pca(_))));
    // Clipping keeps the poisoned test rows in range.
    assert!(again.test.features.as_slice().iter().all(|v| (0.0..=PI).contains(v)));
}

#[test]
fn fitted_extrema_match_train_split() {
    let ds = make_synthetic(&SynthConfig { kind: SynthKind::Blobs, n_per_class: 30, ..SynthConfig::default() }).unwrap();
    let cfg = PreprocessConfig::default();
    let (tr, _) = stratified_split(&ds.labels, 2, cfg.train_fraction, cfg.seed).unwrap();
    let split = preprocess(ds.clone(), &cfg).unwrap();
    for j in 0..ds.num_features() {
        let col: Vec<f64> = tr.iter().map(|&i| ds.features.row(i)[j]).collect();
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(split.fitted.scale.lo[j], lo);
        assert_eq!(split.fitted.scale.hi[j], hi);
    }
}

#[test]
fn report_table_layout() {
    use qmlids::experiment::{MetricsReport, ModelKind, NamedClassMetrics};
    use qmlids_core::metrics::ClassMetrics;
    let mk = |id: &str, kind, dataset: &str, f1: f64| MetricsReport {
        model_id: id.into(),
        model_kind: kind,
        dataset: dataset.into(),
        per_class: vec![NamedClassMetrics {
            class: "benign".into(),
            metrics: ClassMetrics { precision: f1, recall: f1, f1, support: 10 },
        }],
        macro_f1: f1,
        accuracy: f1,
        confusion: vec![vec![10]],
        test_size: 10,
        config_hash: String::new(),
        wall_clock_s: 0.5,
    };
    let reports = [
        mk("vqc", ModelKind::Vqc, "blobs", 0.975),
        mk("svm_rbf", ModelKind::SvmRbf, "blobs", 1.0),
        mk("vqc", ModelKind::Vqc, "xor", 0.5),
    ];
    let t = comparison_table(&reports);
    assert_eq!(t.header, ["model", "blobs", "xor"]);
    assert_eq!(t.rows[0], ["vqc", "97.50", "50.00"]);
    assert_eq!(t.rows[1], ["svm_rbf", "100.00", "-"]);
    assert_eq!(t.to_csv().unwrap().lines().next().unwrap(), "model,blobs,xor");
}

fn labeled_matrix(n: usize, d: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
    (
        prop::collection::vec(prop::collection::vec(-1e3f64..1e3, d), n),
        prop::collection::vec(0usize..2, n),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaled_features_in_range((rows, mut labels) in labeled_matrix(24, 6), target in 2usize..7) {
        // keep at least two rows per class
        labels[0] = 0; labels[1] = 0; labels[2] = 1; labels[3] = 1;
        let ds = Dataset::new(
            Matrix::from_rows(&rows).unwrap(),
            labels,
            vec!["benign".into(), "attack".into()],
            (0..6).map(|j| format!("f{j}")).collect(),
        ).unwrap();
        for reducer in [Reducer::Pca, Reducer::TopVariance] {
            let cfg = PreprocessConfig { reducer, target_dim: target, ..PreprocessConfig::default() };
            let split = preprocess(ds.clone(), &cfg).unwrap();
            prop_assert_eq!(split.train.num_features(), target.min(6));
            for v in split.train.features.as_slice().iter().chain(split.test.features.as_slice()) {
                prop_assert!((0.0..=PI).contains(v), "value {} out of range", v);
            }
            prop_assert_eq!(split.train.len() + split.test.len(), 24);
        }
    }

    #[test]
    fn metrics_identities(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..80)) {
        let (t, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let m = evaluate(&t, &p, 4).unwrap();
        let mean = m.per_class.iter().map(|c| c.f1).sum::<f64>() / 4.0;
        prop_assert!((m.macro_f1 - mean).abs() < 1e-12);
        let total: u64 = m.confusion.iter().flatten().sum();
        prop_assert_eq!(total as usize, t.len());
        let hits = t.iter().zip(&p).filter(|(a, b)| a == b).count();
        prop_assert!((m.accuracy - hits as f64 / t.len() as f64).abs() < 1e-12);
    }
}
