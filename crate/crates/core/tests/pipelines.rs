use rss_sense::gesture::{
    evaluate, evaluation_set, load_gesture_corpus, train, training_set, ClassifierKind, SegmentationConfig,
    TrainConfig, TrainedModel,
};
use rss_sense::heart::{rmse_against, stream_heart_rate, HeartRateConfig};
use rss_sense::sim::corpora::{
    make_corpora_with, write_corpora, CROSSING_DIR, GESTURE_TEST_DIR, GESTURE_TRAIN_DIR, VITALS_DIR,
};
use rss_sense::sim::CorpusSpec;
use rss_sense::speed::{calibrate_alpha, estimate_speed, SpeedConfig};
use rss_sense::trace::{gt, load_trace};

fn small_spec() -> CorpusSpec {
    CorpusSpec {
        vitals_duration: 60.0,
        gesture_train_per_class: 6,
        gesture_test_per_class: 3,
        crossing_speeds: vec![0.6, 1.2],
        crossing_positions: 2,
        crossing_angles: vec![90.0],
        ..Default::default()
    }
}

#[test]
fn corpora_survive_disk_and_feed_every_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let corpora = make_corpora_with(&small_spec(), 3).unwrap();
    write_corpora(&corpora, dir.path()).unwrap();

    let vitals = load_trace(dir.path().join(VITALS_DIR).join(format!("{}.csv", corpora.vitals[0].id))).unwrap();
    assert_eq!(vitals.rss(), corpora.vitals[0].trace.rss());
    let est = stream_heart_rate(&vitals, &HeartRateConfig::default()).unwrap();
    let truth = &vitals.ground_truth().series[gt::HEART_RATE_BPM];
    assert!(rmse_against(&est, &vitals, truth).unwrap() < 3.0);

    let seg = SegmentationConfig::default();
    let train_corpus = load_gesture_corpus(&dir.path().join(GESTURE_TRAIN_DIR)).unwrap();
    let test_corpus = load_gesture_corpus(&dir.path().join(GESTURE_TEST_DIR)).unwrap();
    assert_eq!((train_corpus.len(), test_corpus.len()), (48, 24));
    let model = train(
        &training_set(&train_corpus, &seg).unwrap(),
        ClassifierKind::RandomForest,
        &TrainConfig::default(),
        5,
    )
    .unwrap();
    let reloaded = TrainedModel::from_json(&model.to_json().unwrap()).unwrap();
    let cm = evaluate(&reloaded, &evaluation_set(&test_corpus, &seg).unwrap()).unwrap();
    assert!(cm.mean_accuracy() > 0.5, "{}", cm.mean_accuracy());

    let crossings: Vec<_> = corpora
        .crossing
        .iter()
        .map(|e| load_trace(dir.path().join(CROSSING_DIR).join(format!("{}.csv", e.id))).unwrap())
        .collect();
    let cfg = SpeedConfig::default();
    let points: Vec<(f64, f64)> = crossings
        .iter()
        .map(|t| {
            let ev = estimate_speed(t, &cfg).unwrap().expect("crossing detected");
            (ev.f_min_av, t.ground_truth().value(gt::SPEED_MPS).unwrap())
        })
        .collect();
    let (alpha, residual) = calibrate_alpha(&points).unwrap();
    assert!(alpha > 0.0 && residual < 0.15, "alpha {alpha} residual {residual}");
}

#[test]
fn corpora_are_reproducible_from_the_seed() {
    let spec = small_spec();
    assert_eq!(make_corpora_with(&spec, 9).unwrap(), make_corpora_with(&spec, 9).unwrap());
    let a = make_corpora_with(&spec, 9).unwrap();
    let b = make_corpora_with(&spec, 10).unwrap();
    assert_ne!(a.vitals[0].trace.rss(), b.vitals[0].trace.rss());
}
