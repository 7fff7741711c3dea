use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rss_sense::sim::NoiseModel;
use rss_sense::trace::{save_trace, RssTrace, TraceMetadata};

fn rss_sense(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rss-sense"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn version_names_the_tool() {
    let dir = tempfile::tempdir().unwrap();
    let o = rss_sense(dir.path(), &["version"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("rss-sense-cli "), "{}", stdout(&o));
}

#[test]
fn estimate_without_calibration_says_how_to_calibrate() {
    let dir = tempfile::tempdir().unwrap();
    let o = rss_sense(dir.path(), &["--seed", "1", "-o", "walk.csv", "simulate", "crossing"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = rss_sense(dir.path(), &["speed", "estimate", "walk.csv", "--link", "hall"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("rss-sense speed calibrate --link hall"), "{}", stderr(&o));
}

#[test]
fn stationary_trace_gets_a_no_crossing_row() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("link.alpha"), "alpha=1.0\n").unwrap();
    let noise = NoiseModel {
        gaussian_sigma: 0.01,
        impulse_prob: 0.0,
        ..Default::default()
    }
    .with_seed(2)
    .realize(30 * 449)
    .unwrap();
    let still = RssTrace::from_samples(TraceMetadata::new(449.0), noise.values.iter().map(|v| v - 50.0).collect());
    save_trace(&still.unwrap(), dir.path().join("still.csv")).unwrap();
    let o = rss_sense(dir.path(), &["speed", "estimate", "still.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("trace,status,t_cross_s,f_min_av_hz,v_hat_mps,true_speed_mps"));
    assert!(lines.next().unwrap().starts_with("still.csv,no crossing,"), "{out}");
}

#[test]
fn simulated_crossing_is_estimated_near_its_speed() {
    let dir = tempfile::tempdir().unwrap();
    for (seed, speed, name) in [("1", "0.6", "a.csv"), ("2", "1.2", "b.csv"), ("3", "0.9", "c.csv")] {
        let o = rss_sense(dir.path(), &["--seed", seed, "-o", name, "simulate", "crossing", "--speed", speed]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let o = rss_sense(dir.path(), &["speed", "calibrate", "a.csv", "b.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(dir.path().join("link.alpha")).unwrap().starts_with("alpha="));
    let o = rss_sense(dir.path(), &["speed", "estimate", "c.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "crossing");
    let v: f64 = row[4].parse().unwrap();
    assert!((v - 0.9).abs() < 0.15, "{out}");
}

#[test]
fn gesture_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("small.toml"),
        "[corpus]\nvitals_duration = 30.0\ngesture_train_per_class = 4\ngesture_test_per_class = 2\n\
         crossing_speeds = [0.6]\ncrossing_positions = 1\ncrossing_angles = [90.0]\n",
    )
    .unwrap();
    let o = rss_sense(dir.path(), &["--config", "small.toml", "-o", "corpora", "simulate", "corpora"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = rss_sense(dir.path(), &["-o", "model.json", "gesture", "train", "corpora/gesture_train"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("model.json.manifest.json").exists());
    let o = rss_sense(dir.path(), &["gesture", "eval", "corpora/gesture_test", "--model", "model.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 9);
    let o = rss_sense(dir.path(), &["--seed", "4", "-o", "wave.csv", "simulate", "gesture", "--label", "punch"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = rss_sense(dir.path(), &["gesture", "classify", "wave.csv", "--model", "model.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1);
}
