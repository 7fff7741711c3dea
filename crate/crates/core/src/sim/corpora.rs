//! The standard evaluation corpora and their on-disk layout.
//!
//! ```text
//! <root>/vitals/manifest.csv          file,subject
//! <root>/gesture_train/manifest.csv   file,label,start_s,end_s
//! <root>/gesture_test/manifest.csv    file,label,start_s,end_s
//! <root>/crossing/manifest.csv        file,speed_mps,position_m,angle_deg
//! ```
//!
//! Each manifest sits next to the trace CSVs it lists.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::crossing::{simulate_crossing, CrossingModel, LinkGeometry, WalkPath};
use super::gesture::{simulate_gesture, GestureTemplate};
use super::noise::NoiseModel;
use super::vitals::{simulate_vitals, VitalSignsProfile};
use crate::error::{Error, Result};
use crate::gesture::{write_gesture_manifest, GestureLabel, GestureManifestEntry};
use crate::trace::{save_trace, RssTrace};

pub const VITALS_DIR: &str = "vitals";
pub const GESTURE_TRAIN_DIR: &str = "gesture_train";
pub const GESTURE_TEST_DIR: &str = "gesture_test";
pub const CROSSING_DIR: &str = "crossing";
pub const MANIFEST: &str = "manifest.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub fs: f64,
    pub vitals_duration: f64,
    pub vitals_noise: NoiseModel,
    pub gesture_train_per_class: usize,
    pub gesture_test_per_class: usize,
    pub gesture_noise: NoiseModel,
    /// Range of the quiet padding on either side of a gesture, s.
    pub gesture_pad: (f64, f64),
    pub crossing_speeds: Vec<f64>,
    pub crossing_positions: usize,
    pub crossing_angles: Vec<f64>,
    pub crossing_noise: NoiseModel,
    pub crossing_start_offset: f64,
    pub link: LinkGeometry,
    pub crossing_model: CrossingModel,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            fs: crate::NOMINAL_SAMPLE_RATE_HZ,
            vitals_duration: 300.0,
            vitals_noise: NoiseModel {
                gaussian_sigma: 0.016,
                impulse_prob: 0.001,
                impulse_scale: 3.0,
                seed: 0,
            },
            gesture_train_per_class: 40,
            gesture_test_per_class: 25,
            gesture_noise: NoiseModel {
                gaussian_sigma: 0.05,
                impulse_prob: 0.0005,
                impulse_scale: 3.0,
                seed: 0,
            },
            gesture_pad: (1.5, 2.5),
            crossing_speeds: (3..=18).map(|k| k as f64 / 10.0).collect(),
            crossing_positions: 8,
            crossing_angles: vec![30.0, 45.0, 60.0, 75.0, 90.0],
            crossing_noise: NoiseModel {
                gaussian_sigma: 0.01,
                impulse_prob: 0.0,
                impulse_scale: 3.0,
                seed: 0,
            },
            crossing_start_offset: 5.0,
            link: LinkGeometry::default(),
            crossing_model: CrossingModel::default(),
        }
    }
}

/// `count` equispaced crossing points on the link, keeping `margin` metres
/// clear of either antenna.
pub fn crossing_positions(link_length: f64, count: usize, margin: f64) -> Vec<f64> {
    let span = link_length - 2.0 * margin;
    (0..count)
        .map(|i| margin + span * (i as f64 + 0.5) / count as f64)
        .collect()
}

/// Heart-rate profiles of the three synthetic subjects.
pub fn vitals_subjects() -> Vec<VitalSignsProfile> {
    vec![
        VitalSignsProfile {
            heart_rate: vec![(0.0, 60.0), (300.0, 66.0)],
            breathing_rate: 15.0,
            ..VitalSignsProfile::default()
        },
        VitalSignsProfile {
            heart_rate: vec![(0.0, 72.0), (150.0, 84.0), (300.0, 74.0)],
            breathing_rate: 12.0,
            ..VitalSignsProfile::default()
        },
        VitalSignsProfile {
            heart_rate: vec![(0.0, 88.0), (100.0, 78.0), (200.0, 70.0), (300.0, 76.0)],
            breathing_rate: 18.0,
            ..VitalSignsProfile::default()
        },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct VitalsEntry {
    pub id: String,
    pub subject: String,
    pub trace: RssTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GestureEntry {
    pub id: String,
    pub label: GestureLabel,
    pub trace: RssTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingEntry {
    pub id: String,
    pub speed: f64,
    pub position: f64,
    pub angle: f64,
    pub trace: RssTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpora {
    pub vitals: Vec<VitalsEntry>,
    pub gesture_train: Vec<GestureEntry>,
    pub gesture_test: Vec<GestureEntry>,
    pub crossing: Vec<CrossingEntry>,
}

/// Independent seed streams for the three corpora.
fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}

pub fn make_vitals_corpus(spec: &CorpusSpec, seed: u64) -> Result<Vec<VitalsEntry>> {
    let mut rng = stream(seed, 1);
    vitals_subjects()
        .iter()
        .enumerate()
        .map(|(i, profile)| {
            let noise = spec.vitals_noise.with_seed(rng.random());
            Ok(VitalsEntry {
                id: format!("subject{}", i + 1),
                subject: format!("s{}", i + 1),
                trace: simulate_vitals(profile, &noise, spec.vitals_duration, spec.fs)?,
            })
        })
        .collect()
}

fn make_gesture_set(spec: &CorpusSpec, per_class: usize, rng: &mut ChaCha8Rng, prefix: &str) -> Result<Vec<GestureEntry>> {
    let mut out = Vec::with_capacity(per_class * GestureLabel::COUNT);
    for label in GestureLabel::ALL {
        let template = GestureTemplate::standard(label);
        for k in 0..per_class {
            let (lo, hi) = spec.gesture_pad;
            let pre = rng.random_range(lo..=hi);
            let post = rng.random_range(lo..=hi);
            let noise = spec.gesture_noise.with_seed(rng.random());
            let trace = simulate_gesture(&template, &noise, pre, post, spec.fs, rng.random())?;
            out.push(GestureEntry {
                id: format!("{prefix}_{label}_{k:03}"),
                label,
                trace,
            });
        }
    }
    Ok(out)
}

pub fn make_gesture_corpora(spec: &CorpusSpec, seed: u64) -> Result<(Vec<GestureEntry>, Vec<GestureEntry>)> {
    let mut rng = stream(seed, 2);
    let train = make_gesture_set(spec, spec.gesture_train_per_class, &mut rng, "train")?;
    let test = make_gesture_set(spec, spec.gesture_test_per_class, &mut rng, "test")?;
    Ok((train, test))
}

pub fn make_crossing_corpus(spec: &CorpusSpec, seed: u64) -> Result<Vec<CrossingEntry>> {
    let mut rng = stream(seed, 3);
    let positions = crossing_positions(spec.link.length(), spec.crossing_positions, 0.3);
    let mut out = Vec::new();
    for &angle in &spec.crossing_angles {
        for &speed in &spec.crossing_speeds {
            for (pi, &position) in positions.iter().enumerate() {
                let path = WalkPath::centred(position, angle, speed, spec.crossing_start_offset);
                let noise = spec.crossing_noise.with_seed(rng.random());
                let trace = simulate_crossing(&spec.link, &path, &spec.crossing_model, &noise, spec.fs)?;
                out.push(CrossingEntry {
                    id: format!("a{angle:02}_v{:03}_p{pi}", (speed * 100.0).round() as u32),
                    speed,
                    position,
                    angle,
                    trace,
                });
            }
        }
    }
    Ok(out)
}

pub fn make_corpora(seed: u64) -> Result<Corpora> {
    make_corpora_with(&CorpusSpec::default(), seed)
}

pub fn make_corpora_with(spec: &CorpusSpec, seed: u64) -> Result<Corpora> {
    let vitals = make_vitals_corpus(spec, seed)?;
    let (gesture_train, gesture_test) = make_gesture_corpora(spec, seed)?;
    let crossing = make_crossing_corpus(spec, seed)?;
    Ok(Corpora {
        vitals,
        gesture_train,
        gesture_test,
        crossing,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_vitals_corpus(entries: &[VitalsEntry], dir: &Path) -> Result<()> {
    create_dir(dir)?;
    let mut manifest = String::from("file,subject\n");
    for e in entries {
        let file = format!("{}.csv", e.id);
        save_trace(&e.trace, dir.join(&file))?;
        manifest.push_str(&format!("{file},{}\n", e.subject));
    }
    write_text(&dir.join(MANIFEST), &manifest)
}

pub fn write_gesture_corpus(entries: &[GestureEntry], dir: &Path) -> Result<()> {
    create_dir(dir)?;
    let mut rows = Vec::with_capacity(entries.len());
    for e in entries {
        let file = format!("{}.csv", e.id);
        save_trace(&e.trace, dir.join(&file))?;
        let g = e.trace.ground_truth();
        let bound = |k| g.value(k).ok_or_else(|| Error::InvalidTrace(format!("{} lacks gesture bounds", e.id)));
        rows.push(GestureManifestEntry {
            file,
            label: e.label,
            start_s: bound(crate::trace::gt::GESTURE_START_S)?,
            end_s: bound(crate::trace::gt::GESTURE_END_S)?,
        });
    }
    let mut buf = Vec::new();
    write_gesture_manifest(&mut buf, &rows).map_err(|e| Error::io(dir.join(MANIFEST), e))?;
    write_text(&dir.join(MANIFEST), &String::from_utf8_lossy(&buf))
}

pub fn write_crossing_corpus(entries: &[CrossingEntry], dir: &Path) -> Result<()> {
    create_dir(dir)?;
    let mut manifest = String::from("file,speed_mps,position_m,angle_deg\n");
    for e in entries {
        let file = format!("{}.csv", e.id);
        save_trace(&e.trace, dir.join(&file))?;
        manifest.push_str(&format!("{file},{},{},{}\n", e.speed, e.position, e.angle));
    }
    write_text(&dir.join(MANIFEST), &manifest)
}

pub fn write_corpora(c: &Corpora, root: &Path) -> Result<()> {
    write_vitals_corpus(&c.vitals, &root.join(VITALS_DIR))?;
    write_gesture_corpus(&c.gesture_train, &root.join(GESTURE_TRAIN_DIR))?;
    write_gesture_corpus(&c.gesture_test, &root.join(GESTURE_TEST_DIR))?;
    write_crossing_corpus(&c.crossing, &root.join(CROSSING_DIR))
}

/// Rows of a simple comma-separated manifest with a known header, as
/// `(line number, fields)`.
pub fn read_manifest_rows(path: &Path, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("{}: expected header {header}", path.display()),
            })
        }
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if fields.len() != width {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        rows.push((i + 1, fields));
    }
    Ok(rows)
}
