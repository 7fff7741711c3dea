use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Map, Value};

use rss_sense::gesture::{
    classification_segment, evaluate, evaluation_set, extract_features, load_gesture_corpus, train, training_set,
    GestureLabel, TrainedModel,
};
use rss_sense::heart::{rmse_against, stream_heart_rate_with, write_estimates_csv, Harmonics, HeartRateEstimate};
use rss_sense::sim::corpora::write_corpora;
use rss_sense::sim::{
    make_corpora_with, simulate_crossing, simulate_gesture, simulate_vitals, GestureTemplate, VitalSignsProfile,
    WalkPath,
};
use rss_sense::speed::{calibrate_alpha, estimate_speed, read_alpha, write_alpha};
use rss_sense::trace::{gt, load_trace, to_csv_string, RssTrace};

use crate::config::Config;
use crate::inputs::{expand, trace_name};
use crate::manifest::RunManifest;
use crate::{Cli, Command, GestureAction, HeartrateArgs, LinkArgs, Select, SimulateKind, SpeedAction};

pub fn run(cli: &Cli) -> Result<()> {
    let config = Config::load(cli.config.as_deref())?;
    let ctx = Ctx {
        seed: cli.seed,
        output: cli.output.clone(),
        config,
    };
    match &cli.command {
        Command::Simulate { kind } => simulate(&ctx, kind),
        Command::Heartrate(args) => heartrate(&ctx, args),
        Command::Gesture { action } => gesture(&ctx, action),
        Command::Speed { action } => speed(&ctx, action),
        Command::Version => {
            println!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}

struct Ctx {
    seed: u64,
    output: Option<PathBuf>,
    config: Config,
}

impl Ctx {
    fn manifest(&self, command: &str) -> RunManifest {
        RunManifest::new(command, self.seed, &self.config)
    }

    /// Writes `text` to the output file, or stdout without one; returns the
    /// file written.
    fn emit(&self, text: &str) -> Result<Option<PathBuf>> {
        match &self.output {
            Some(path) => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
                }
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
                Ok(Some(path.clone()))
            }
            None => {
                io::stdout().write_all(text.as_bytes())?;
                Ok(None)
            }
        }
    }

    fn finish(&self, mut manifest: RunManifest, written: Option<PathBuf>) -> Result<()> {
        if let Some(path) = written {
            manifest.outputs.push(path.clone());
            manifest.write(&path)?;
        }
        Ok(())
    }

    fn required_output(&self, what: &str) -> Result<&Path> {
        match &self.output {
            Some(p) => Ok(p),
            None => bail!("{what} needs --output"),
        }
    }
}

fn load(path: &Path) -> Result<RssTrace> {
    load_trace(path).with_context(|| format!("loading {}", path.display()))
}

fn parse_profile(text: &str) -> Result<Vec<(f64, f64)>> {
    text.split(',')
        .map(|pair| {
            let (t, bpm) = pair.split_once(':').with_context(|| format!("expected t:bpm, found '{pair}'"))?;
            Ok((t.trim().parse()?, bpm.trim().parse()?))
        })
        .collect()
}

fn simulate(ctx: &Ctx, kind: &SimulateKind) -> Result<()> {
    let spec = &ctx.config.corpus;
    let fs_hz = spec.fs;
    let (name, trace) = match kind {
        SimulateKind::Corpora => {
            let root = ctx.required_output("simulate corpora")?;
            let corpora = make_corpora_with(spec, ctx.seed)?;
            write_corpora(&corpora, root)?;
            let mut m = ctx.manifest("simulate corpora");
            m.outputs.push(root.to_path_buf());
            m.results = json!({
                "vitals": corpora.vitals.len(),
                "gesture_train": corpora.gesture_train.len(),
                "gesture_test": corpora.gesture_test.len(),
                "crossing": corpora.crossing.len(),
            });
            m.write(root)?;
            return Ok(());
        }
        SimulateKind::Vitals {
            hr,
            hr_profile,
            breathing_rate,
            duration,
        } => {
            let heart_rate = match hr_profile {
                Some(p) => parse_profile(p)?,
                None => vec![(0.0, *hr)],
            };
            let profile = VitalSignsProfile {
                heart_rate,
                breathing_rate: *breathing_rate,
                ..VitalSignsProfile::default()
            };
            let noise = spec.vitals_noise.with_seed(ctx.seed);
            ("simulate vitals", simulate_vitals(&profile, &noise, *duration, fs_hz)?)
        }
        SimulateKind::Crossing {
            speed,
            position,
            angle,
            start_offset,
        } => {
            let y = position.unwrap_or(0.5 * spec.link.length());
            let path = WalkPath::centred(y, *angle, *speed, *start_offset);
            let noise = spec.crossing_noise.with_seed(ctx.seed);
            ("simulate crossing", simulate_crossing(&spec.link, &path, &spec.crossing_model, &noise, fs_hz)?)
        }
        SimulateKind::Gesture { label, pre, post } => {
            let noise = spec.gesture_noise.with_seed(ctx.seed);
            let template = GestureTemplate::standard(*label);
            ("simulate gesture", simulate_gesture(&template, &noise, *pre, *post, fs_hz, ctx.seed)?)
        }
    };
    let written = ctx.emit(&to_csv_string(&trace))?;
    ctx.finish(ctx.manifest(name), written)
}

/// Squared-error sum and count of the estimates carrying a bpm.
fn squared_errors(estimates: &[HeartRateEstimate], trace: &RssTrace, truth: &[f64]) -> (f64, usize) {
    let n = estimates.iter().filter(|e| e.bpm.is_some()).count();
    match rmse_against(estimates, trace, truth) {
        Some(r) => (r * r * n as f64, n),
        None => (0.0, 0),
    }
}

fn heartrate(ctx: &Ctx, args: &HeartrateArgs) -> Result<()> {
    let paths = expand(&args.inputs, Select::All)?;
    let mut cfg = ctx.config.heart.clone();
    if let Some(w) = args.window {
        cfg.window = w;
    }
    let harmonics = if args.single_harmonic {
        Harmonics::Fundamental
    } else {
        Harmonics::Superposition
    };
    let traces = paths.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
    let mut m = ctx.manifest("heartrate");
    m.inputs = paths.clone();

    if !args.sweep.is_empty() {
        let mut table = String::from("window_s,rmse_bpm,estimates\n");
        let mut results = Map::new();
        for &w in &args.sweep {
            let c = rss_sense::heart::HeartRateConfig { window: w, ..cfg.clone() };
            let (mut sse, mut count) = (0.0, 0);
            for tr in &traces {
                let truth = tr
                    .ground_truth()
                    .series
                    .get(gt::HEART_RATE_BPM)
                    .context("window sweep needs traces with a heart-rate ground truth")?;
                let (s, n) = squared_errors(&stream_heart_rate_with(tr, &c, harmonics)?, tr, truth);
                sse += s;
                count += n;
            }
            let rmse = if count > 0 { (sse / count as f64).sqrt() } else { f64::NAN };
            table.push_str(&format!("{w},{rmse},{count}\n"));
            results.insert(format!("{w}"), json!(rmse));
            eprintln!("window {w} s: RMSE {rmse:.3} bpm over {count} estimates");
        }
        m.results = Value::Object(results);
        let written = ctx.emit(&table)?;
        return ctx.finish(m, written);
    }

    let mut results = Map::new();
    let mut outputs = Vec::new();
    let per_trace_dir = traces.len() > 1;
    if per_trace_dir {
        fs::create_dir_all(ctx.required_output("heart rate over several traces")?)?;
    }
    for (path, tr) in paths.iter().zip(&traces) {
        let estimates = stream_heart_rate_with(tr, &cfg, harmonics)?;
        let name = trace_name(path);
        if let Some(truth) = tr.ground_truth().series.get(gt::HEART_RATE_BPM) {
            if let Some(r) = rmse_against(&estimates, tr, truth) {
                eprintln!("{name}: RMSE {r:.3} bpm");
                results.insert(name.clone(), json!(r));
            }
        }
        let mut buf = Vec::new();
        write_estimates_csv(&mut buf, &estimates)?;
        if per_trace_dir {
            let out = ctx.output.as_ref().expect("checked above").join(name.replace(".csv", "_hr.csv"));
            fs::write(&out, &buf).with_context(|| format!("writing {}", out.display()))?;
            outputs.push(out);
        } else if let Some(p) = ctx.emit(&String::from_utf8(buf)?)? {
            outputs.push(p);
        }
    }
    m.results = Value::Object(results);
    m.outputs = outputs;
    if let Some(out) = &ctx.output {
        m.write(out)?;
    }
    Ok(())
}

fn gesture(ctx: &Ctx, action: &GestureAction) -> Result<()> {
    let seg = &ctx.config.segmentation;
    match action {
        GestureAction::Train { corpus, classifier } => {
            let out = ctx.required_output("gesture train")?;
            let data = training_set(&load_gesture_corpus(corpus)?, seg)?;
            let model = train(&data, (*classifier).into(), &ctx.config.train, ctx.seed)?;
            model.save(out)?;
            eprintln!("trained {} on {} segments", model.kind(), data.len());
            let mut m = ctx.manifest("gesture train");
            m.inputs.push(corpus.clone());
            m.results = json!({ "classifier": model.kind().as_str(), "samples": data.len() });
            ctx.finish(m, Some(out.to_path_buf()))
        }
        GestureAction::Classify { trace, model } => {
            let model = TrainedModel::load(model)?;
            let tr = load(trace)?;
            let segment = classification_segment(&tr, seg)?;
            let label = model.classify(&extract_features(&segment.samples, tr.sample_rate())?)?;
            println!("{label}");
            let Some(out) = &ctx.output else {
                return Ok(());
            };
            let text = format!(
                "trace,label,start_s,end_s\n{},{label},{},{}\n",
                trace_name(trace),
                segment.start,
                segment.end
            );
            fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
            let mut m = ctx.manifest("gesture classify");
            m.inputs.push(trace.clone());
            m.results = json!({ "label": label.as_str() });
            ctx.finish(m, Some(out.clone()))
        }
        GestureAction::Eval { corpus, model } => {
            let model = TrainedModel::load(model)?;
            let data = evaluation_set(&load_gesture_corpus(corpus)?, seg)?;
            let cm = evaluate(&model, &data)?;
            let acc = cm.per_class_accuracy();
            for (l, a) in GestureLabel::ALL.iter().zip(acc) {
                if let Some(a) = a {
                    eprintln!("{l:>8}: {a:.3}");
                }
            }
            eprintln!("mean accuracy {:.4}", cm.mean_accuracy());
            let mut m = ctx.manifest("gesture eval");
            m.inputs.push(corpus.clone());
            m.results = json!({ "classifier": model.kind().as_str(), "mean_accuracy": cm.mean_accuracy() });
            let written = ctx.emit(&cm.to_csv())?;
            ctx.finish(m, written)
        }
    }
}

fn alpha_path(link: &LinkArgs) -> PathBuf {
    link.calibration_dir.join(format!("{}.alpha", link.link))
}

fn speed(ctx: &Ctx, action: &SpeedAction) -> Result<()> {
    match action {
        SpeedAction::Calibrate { inputs, link } => {
            let paths = expand(inputs, link.select)?;
            if paths.len() < 2 {
                bail!("calibration needs at least two traces with a known speed");
            }
            let mut points = Vec::new();
            for p in &paths {
                let tr = load(p)?;
                let truth = tr
                    .ground_truth()
                    .value(gt::SPEED_MPS)
                    .with_context(|| format!("{} has no speed ground truth", p.display()))?;
                match estimate_speed(&tr, &ctx.config.speed)? {
                    Some(e) => points.push((e.f_min_av, truth)),
                    None => eprintln!("{}: no crossing found, skipped", trace_name(p)),
                }
            }
            let (alpha, residual) = calibrate_alpha(&points)?;
            let out = ctx.output.clone().unwrap_or_else(|| alpha_path(link));
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            write_alpha(&out, alpha)?;
            eprintln!("alpha {alpha:.6} m, residual RMSE {residual:.4} m/s over {} crossings", points.len());
            let mut m = ctx.manifest("speed calibrate");
            m.inputs = paths;
            m.results = json!({ "link": link.link, "alpha": alpha, "residual_rmse_mps": residual, "points": points.len() });
            ctx.finish(m, Some(out))
        }
        SpeedAction::Estimate { inputs, link } => {
            let path = alpha_path(link);
            if !path.exists() {
                bail!(
                    "no calibration for link '{}' at {}; run `rss-sense speed calibrate --link {}` first",
                    link.link,
                    path.display(),
                    link.link
                );
            }
            let cfg = rss_sense::speed::SpeedConfig {
                alpha: read_alpha(&path)?,
                ..ctx.config.speed.clone()
            };
            let paths = expand(inputs, link.select)?;
            let mut table = String::from("trace,status,t_cross_s,f_min_av_hz,v_hat_mps,true_speed_mps\n");
            let (mut sse, mut count) = (0.0, 0usize);
            for p in &paths {
                let tr = load(p)?;
                let truth = tr.ground_truth().value(gt::SPEED_MPS);
                let truth_field = truth.map(|v| v.to_string()).unwrap_or_default();
                match estimate_speed(&tr, &cfg)? {
                    Some(e) => {
                        table.push_str(&format!(
                            "{},crossing,{},{},{},{truth_field}\n",
                            trace_name(p),
                            e.t_cross,
                            e.f_min_av,
                            e.v_hat
                        ));
                        if let Some(v) = truth {
                            sse += (e.v_hat - v).powi(2);
                            count += 1;
                        }
                    }
                    None => table.push_str(&format!("{},no crossing,,,,{truth_field}\n", trace_name(p))),
                }
            }
            let mut m = ctx.manifest("speed estimate");
            m.inputs = paths;
            m.inputs.push(path);
            if count > 0 {
                let rmse = (sse / count as f64).sqrt();
                eprintln!("speed RMSE {rmse:.4} m/s over {count} crossings");
                m.results = json!({ "rmse_mps": rmse, "crossings": count });
            }
            let written = ctx.emit(&table)?;
            ctx.finish(m, written)
        }
    }
}

