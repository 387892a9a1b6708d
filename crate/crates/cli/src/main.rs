use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use sensecap::bounds::{
    bound_report, fano_lower_relaxed, fano_lower_tight, lossless_condition, preprocessing_check,
    typicality_upper_bound, CrossMIMatrix, DEFAULT_EPSILON,
};
use sensecap::knn_mi::{estimate_dtmi, Aggregation, EstimatorConfig};
use sensecap::pipelines::{
    aoa_sweep, cov_detect, cross_validate, rssi_detect, shuffle_labels, snr_sweep, AoAScenario,
    DetectorConfig, SweepPoint, DEFAULT_GRID_STEP,
};
use sensecap::report::config::RunConfig;
use sensecap::report::{
    emit_line_plot, emit_report, load_labeled_csv, load_matrix_csv, load_paired_csv, load_series_csv,
    pearson, PlotSpec, ReportError, RunReport, Series,
};
use sensecap::simchannel::{
    cross_mi_exact, exact_channel_mi, reference_joint, run_monte_carlo, ChannelModel, CrossMIStrategy,
    Decoder,
};
use sensecap::stats::pearson_named;
use sensecap::typicality::{
    exact_matching_count, matching_set_log_size_bound, typicality_probability, DrawMode,
};
use sensecap::{Error, EstimatorId, Result, RngSeed, StateSpace};

#[derive(Parser)]
#[command(name = "sensecap", version, about = "Sensing-capability analysis from task mutual information")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize)]
struct Global {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// MI estimator: ksg1, ksg2 or mixed_ksg.
    #[arg(long, global = true, default_value = "mixed_ksg")]
    estimator: EstimatorId,
    /// Neighbour count for the MI estimator.
    #[arg(long, global = true, default_value_t = 3)]
    k: usize,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also write an SVG plot (aoa-sweep).
    #[arg(long, global = true)]
    #[serde(skip)]
    plot: Option<PathBuf>,
    /// Record wall time in the report (breaks byte-for-byte reruns).
    #[arg(long, global = true)]
    #[serde(skip)]
    timing: bool,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Estimate I(X;Y) from two paired CSV files.
    MiEstimate {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value = "joint")]
        aggregation: Aggregation,
    },
    /// Error bounds from entropies and MI values, or from a channel config.
    Bounds {
        #[arg(long)]
        h_w: Option<f64>,
        #[arg(long)]
        dtmi: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Common cross term Σ_i I for the upper bound.
        #[arg(long)]
        cross: Option<f64>,
        /// I(X^n; D) for the preprocessing check.
        #[arg(long)]
        i_x_d: Option<f64>,
    },
    /// Monte Carlo error of a configured channel and its bound sandwich.
    Simulate,
    /// Matching-set probabilities and size bounds for a configured channel.
    Typicality,
    /// MUSIC direction classification over an SNR or distance sweep.
    AoaSweep,
    /// Cross-validated KNN classification of a labelled CSV.
    Classify {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// Neighbours used by the classifier.
        #[arg(long, default_value_t = 3)]
        neighbors: usize,
        #[arg(long, default_value = "per_dimension_sum")]
        aggregation: Aggregation,
        /// Permute the labels first (null control).
        #[arg(long)]
        shuffle_labels: bool,
    },
    /// Presence (CoV) or door-state (RSSI) detection on a matrix CSV.
    Detect {
        #[arg(long, value_enum)]
        kind: DetectorKind,
        #[arg(long)]
        data: PathBuf,
        /// One-column CSV of per-tag baselines (rssi only).
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Pearson correlation of two one-column CSV series.
    Correlate {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum DetectorKind {
    Cov,
    Rssi,
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn config_of(g: &Global) -> Result<RunConfig> {
    match &g.config {
        Some(p) => Ok(RunConfig::load(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn need_config(g: &Global, what: &str) -> Result<RunConfig> {
    if g.config.is_none() {
        return Err(ReportError::Config(format!("{what} needs --config")).into());
    }
    config_of(g)
}

fn estimator(g: &Global, aggregation: Aggregation) -> EstimatorConfig {
    EstimatorConfig {
        estimator: g.estimator,
        k: g.k,
        aggregation,
        jitter_seed: RngSeed::new(g.seed),
    }
}

fn mi_estimate(g: &Global, x: &Path, y: &Path, aggregation: Aggregation) -> Result<Value> {
    let samples = load_paired_csv(x, y)?;
    Ok(to_json(&estimate_dtmi(&samples, &estimator(g, aggregation))?))
}

fn bounds_from_flags(
    g: &Global,
    h_w: Option<f64>,
    dtmi: Option<f64>,
    m: Option<usize>,
    n: Option<usize>,
    cross: Option<f64>,
    i_x_d: Option<f64>,
) -> Result<Value> {
    let missing = |f: &str| Error::from(ReportError::Config(format!("bounds needs --{f} (or --config)")));
    let m = m.ok_or_else(|| missing("m"))?;
    let h_w = h_w.unwrap_or((m as f64).log2());
    let dtmi = dtmi.ok_or_else(|| missing("dtmi"))?;
    let mut out = json!({
        "h_w_bits": h_w,
        "dtmi_bits": dtmi,
        "m": m,
        "lower_relaxed": fano_lower_relaxed(h_w, dtmi, m)?,
        "lower_tight": fano_lower_tight(h_w, dtmi, m)?,
    });
    if let Some(c) = cross {
        let n = n.ok_or_else(|| missing("n"))?;
        let eps = g.epsilon.unwrap_or(DEFAULT_EPSILON);
        let upper = typicality_upper_bound(&CrossMIMatrix::constant(m, c)?, &StateSpace::uniform(m)?, n, eps)?;
        let avg = vec![vec![c / n as f64; m]; m];
        out["upper"] = to_json(&upper);
        out["lossless"] = to_json(&lossless_condition(m, n, &avg, eps)?);
        out["epsilon"] = json!(eps);
        out["n"] = json!(n);
    }
    if let Some(i) = i_x_d {
        out["preprocessing"] = to_json(&preprocessing_check(h_w, i)?);
    }
    Ok(out)
}

fn bounds_from_config(g: &Global, cfg: &RunConfig) -> Result<Value> {
    let space = cfg.space()?;
    let enc = cfg.encoder()?;
    let ch = cfg.channel()?;
    let eps = g.epsilon.unwrap_or(DEFAULT_EPSILON);
    let mi = exact_channel_mi(&enc, &ch, &space)?;
    let cross = cross_mi_exact(&enc, &ch, &space, CrossMIStrategy::ReferenceJoint)?;
    let n = enc.n();
    let report = bound_report(&space, mi.total, &cross, n, eps)?;
    let avg: Vec<Vec<f64>> = cross.terms().iter().map(|r| r.iter().map(|t| t / n as f64).collect()).collect();
    Ok(json!({
        "channel_mi": to_json(&mi),
        "bounds": to_json(&report),
        "lossless": to_json(&lossless_condition(space.m(), n, &avg, eps)?),
    }))
}

fn simulate(g: &Global) -> Result<Value> {
    let cfg = need_config(g, "simulate")?;
    let space = cfg.space()?;
    let enc = cfg.encoder()?;
    let ch = cfg.channel()?;
    let decoder = cfg.decoder();
    let trials = g.trials.unwrap_or(100_000);
    let mc = run_monte_carlo(&space, &enc, &ch, decoder, trials, RngSeed::new(g.seed))?;
    let mut out = json!({ "decoder": to_json(&decoder), "monte_carlo": to_json(&mc) });
    if let ChannelModel::Discrete(_) = ch {
        let eps = match decoder {
            Decoder::Typicality { epsilon } => epsilon,
            _ => g.epsilon.unwrap_or(DEFAULT_EPSILON),
        };
        let mi = exact_channel_mi(&enc, &ch, &space)?;
        let cross = cross_mi_exact(&enc, &ch, &space, CrossMIStrategy::ReferenceJoint)?;
        let b = bound_report(&space, mi.total, &cross, enc.n(), eps)?;
        let hw = mc.ci_95.half_width();
        out["bounds"] = to_json(&b);
        out["channel_mi"] = to_json(&mi);
        out["verdict"] = json!({
            "above_lower": mc.p_e >= b.lower_tight - 3.0 * hw,
            "below_upper": mc.p_e <= b.upper_clamped + 3.0 * hw,
            "tolerance": 3.0 * hw,
        });
    }
    Ok(out)
}

fn typicality(g: &Global) -> Result<Value> {
    let cfg = need_config(g, "typicality")?;
    let space = cfg.space()?;
    let enc = cfg.encoder()?;
    let ChannelModel::Discrete(dmc) = cfg.channel()? else {
        return Err(ReportError::Config("typicality needs a discrete channel".into()).into());
    };
    let eps = g.epsilon.unwrap_or(0.1);
    let trials = g.trials.unwrap_or(10_000);
    let r = reference_joint(&enc, &dmc, &space)?;
    let seed = RngSeed::new(g.seed);
    let joint = typicality_probability(&r, eps, DrawMode::JointDraw, trials, seed.substream(0))?;
    let product = typicality_probability(&r, eps, DrawMode::ProductDraw, trials, seed.substream(1))?;
    let n = r.n() as f64;
    let total = r.total_mi();
    let exact = exact_matching_count(&r, eps).ok();
    Ok(json!({
        "n": r.n(),
        "epsilon": eps,
        "total_mi_bits": total,
        "joint_draw": to_json(&joint),
        "product_draw": to_json(&product),
        "product_bound": (3.0 * n * eps - total).exp2().min(1.0),
        "log2_size_bound": matching_set_log_size_bound(&r, eps),
        "exact_count": exact.map(|c| c.to_string()),
    }))
}

fn default_sweep() -> Vec<SweepPoint> {
    snr_sweep(&AoAScenario::default(), &[-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0])
}

fn aoa(g: &Global) -> Result<Value> {
    let cfg = config_of(g)?;
    let (points, cfg_trials, step) = match &cfg.sweep {
        Some(s) => (s.points(), s.trials_per_point, s.grid_step_deg.map(f64::to_radians)),
        None => (default_sweep(), None, None),
    };
    if let Some(w) = points.first().and_then(|p| p.scenario.geometry.ambiguity_warning()) {
        eprintln!("warning: {w}");
    }
    let trials = g.trials.or(cfg_trials).unwrap_or(2000);
    let step = step.unwrap_or(DEFAULT_GRID_STEP);
    let series = aoa_sweep(&points, trials, &estimator(g, Aggregation::Joint), step, RngSeed::new(g.seed))?;
    let xs: Vec<f64> = series.iter().map(|r| r.value).collect();
    let acc: Vec<f64> = series.iter().map(|r| r.accuracy).collect();
    let dtmi: Vec<f64> = series.iter().map(|r| r.dtmi.bits).collect();
    let fano: Vec<f64> = series.iter().map(|r| 1.0 - r.fano_lower).collect();
    let corr_mi = pearson_named(&acc, &dtmi, "accuracy", "dtmi").ok();
    let corr_fano = pearson_named(&acc, &fano, "accuracy", "one_minus_fano_lower").ok();
    if let Some(p) = &g.plot {
        let m = points[0].scenario.m_classes as f64;
        let norm: Vec<f64> = dtmi.iter().map(|d| d / m.log2()).collect();
        emit_line_plot(
            &[
                Series::new("accuracy", &xs, &acc),
                Series::new("DTMI / log2 m", &xs, &norm),
                Series::new("1 - Fano lower", &xs, &fano),
            ],
            &PlotSpec {
                title: "Direction classification".into(),
                x_label: "sweep value".into(),
                y_label: "fraction".into(),
            },
            p,
        )?;
    }
    Ok(json!({
        "trials_per_point": trials,
        "grid_step_rad": step,
        "points": to_json(&points),
        "series": to_json(&series),
        "pearson_accuracy_dtmi": to_json(&corr_mi),
        "pearson_accuracy_fano": to_json(&corr_fano),
    }))
}

fn classify(
    g: &Global,
    data: &Path,
    folds: usize,
    neighbors: usize,
    aggregation: Aggregation,
    shuffle: bool,
) -> Result<Value> {
    let mut ds = load_labeled_csv(data)?;
    let seed = RngSeed::new(g.seed);
    if shuffle {
        ds = shuffle_labels(&ds, seed.substream(1))?;
    }
    let r = cross_validate(&ds, folds, neighbors, &estimator(g, aggregation), seed)?;
    Ok(json!({
        "rows": ds.len(),
        "classes": ds.space().labels(),
        "cross_validation": to_json(&r),
    }))
}

fn detect(g: &Global, kind: DetectorKind, data: &Path, baseline: Option<&Path>, window: Option<usize>) -> Result<Value> {
    let mut cfg: DetectorConfig = config_of(g)?.detector.unwrap_or_default();
    if let Some(w) = window {
        cfg.window_len = w;
    }
    let m = load_matrix_csv(data)?;
    Ok(match kind {
        DetectorKind::Cov => json!({ "config": to_json(&cfg), "decision": to_json(&cov_detect(&m, &cfg)?) }),
        DetectorKind::Rssi => {
            let b = baseline.map(load_series_csv).transpose()?;
            json!({ "config": to_json(&cfg), "decision": to_json(&rssi_detect(&m, b.as_deref(), &cfg)?) })
        }
    })
}

fn correlate(a: &Path, b: &Path) -> Result<Value> {
    let xa = load_series_csv(a)?;
    let xb = load_series_csv(b)?;
    let name = |p: &Path| p.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let r = if name(a).is_empty() {
        pearson(&xa, &xb)?
    } else {
        pearson_named(&xa, &xb, &name(a), &name(b))?
    };
    Ok(to_json(&r))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::MiEstimate { .. } => "mi-estimate",
        Command::Bounds { .. } => "bounds",
        Command::Simulate => "simulate",
        Command::Typicality => "typicality",
        Command::AoaSweep => "aoa-sweep",
        Command::Classify { .. } => "classify",
        Command::Detect { .. } => "detect",
        Command::Correlate { .. } => "correlate",
    }
}

fn run(cli: &Cli) -> Result<()> {
    let start = Instant::now();
    let g = &cli.global;
    let results = match &cli.command {
        Command::MiEstimate { x, y, aggregation } => mi_estimate(g, x, y, *aggregation)?,
        Command::Bounds {
            h_w,
            dtmi,
            m,
            n,
            cross,
            i_x_d,
        } => match g.config {
            Some(_) => bounds_from_config(g, &config_of(g)?)?,
            None => bounds_from_flags(g, *h_w, *dtmi, *m, *n, *cross, *i_x_d)?,
        },
        Command::Simulate => simulate(g)?,
        Command::Typicality => typicality(g)?,
        Command::AoaSweep => aoa(g)?,
        Command::Classify {
            data,
            folds,
            neighbors,
            aggregation,
            shuffle_labels,
        } => classify(g, data, *folds, *neighbors, *aggregation, *shuffle_labels)?,
        Command::Detect {
            kind,
            data,
            baseline,
            window,
        } => detect(g, *kind, data, baseline.as_deref(), *window)?,
        Command::Correlate { a, b } => correlate(a, b)?,
    };
    let echo = json!({
        "flags": to_json(g),
        "args": to_json(&cli.command),
        "file": to_json(&config_of(g)?),
    });
    let mut report = RunReport::new(command_name(&cli.command), echo, g.seed, results);
    if g.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    match &g.out {
        Some(p) => emit_report(&report, p)?,
        None => print!("{}", report.to_canonical_string()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
