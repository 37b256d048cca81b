//! Command-line driver: odometry over correspondence files, synthetic scene
//! generation, trajectory evaluation, and throughput benchmarking.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector2;

use crate::config::{parse_odometry, parse_scene};
use crate::io::{
    read_correspondences, read_trajectory, write_correspondence_file, write_trajectory,
    CorrespondenceFile,
};
use crate::metrics::evaluate;
use crate::pipeline::{estimate_frame, run_sequence, OdometryConfig};
use crate::synth::{generate_pair, SceneNoise, SceneShape, SceneSpec};
use crate::types::Pose2;
use crate::uncertainty::NoiseParams;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "orora", version, about = "Outlier-robust 2-D radar odometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a trajectory from a directory of correspondence files.
    Odometry(OdometryArgs),
    /// Generate synthetic correspondence files with a ground-truth trajectory.
    Synth(SynthArgs),
    /// Compare an estimated trajectory against ground truth.
    Eval(EvalArgs),
    /// Time the frame estimator on synthetic inputs.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Obstructed,
    Open,
}

#[derive(Debug, Args)]
struct OdometryArgs {
    /// Directory of `.corr` files, processed in filename order.
    #[arg(long)]
    input: PathBuf,
    /// Configuration file; built-in defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output trajectory file.
    #[arg(long)]
    output: PathBuf,
    /// Parameter preset; explicit config keys override it.
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Scene recipe file (`scene.*` keys).
    #[arg(long)]
    spec: PathBuf,
    /// Number of correspondence files to emit.
    #[arg(long)]
    frames: usize,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Estimated trajectory.
    #[arg(long)]
    est: PathBuf,
    /// Ground-truth trajectory.
    #[arg(long)]
    gt: PathBuf,
    /// Comma-separated segment lengths in meters.
    #[arg(long)]
    segments: Option<String>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Correspondences per synthetic frame.
    #[arg(long, default_value_t = 500)]
    pairs: usize,
    /// Number of frames to time.
    #[arg(long, default_value_t = 50)]
    frames: usize,
    /// Accepted for timing stability; the estimator is single-threaded.
    #[arg(long)]
    single_thread: bool,
    /// Also sweep outlier ratios and write `ratio success_rate` lines here.
    #[arg(long)]
    robustness_curve: Option<PathBuf>,
    /// Trials per ratio for the robustness curve.
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

/// Parses `args` (including the program name) and runs one subcommand.
/// Returns the process exit code instead of exiting, so tests can call it.
pub fn cli_run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let mut stdout = std::io::stdout();
    match execute(cli.command, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Odometry(args) => run_odometry(&args, out),
        Command::Synth(args) => run_synth(&args, out),
        Command::Eval(args) => run_eval(&args, out),
        Command::Bench(args) => run_bench(&args, out),
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::file(path, e))
}

fn emit(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<()> {
    out.write_fmt(text)
        .and_then(|()| out.write_all(b"\n"))
        .map_err(|e| Error::invalid(format!("cannot write output: {e}")))
}

fn load_config(config: Option<&Path>, preset: Option<PresetArg>) -> Result<OdometryConfig> {
    let mut text = match preset {
        Some(PresetArg::Obstructed) => "preset = obstructed\n".to_string(),
        Some(PresetArg::Open) => "preset = open\n".to_string(),
        None => String::new(),
    };
    if let Some(path) = config {
        text.push_str(&read_file(path)?);
    }
    parse_odometry(&text)
}

fn run_odometry(args: &OdometryArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = load_config(args.config.as_deref(), args.preset)?;
    let entries =
        std::fs::read_dir(&args.input).map_err(|e| Error::file(&args.input, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|ext| ext == "corr"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::invalid(format!(
            "no .corr files in `{}`",
            args.input.display()
        )));
    }
    let frames = paths
        .iter()
        .map(|p| {
            read_correspondences(p)
                .map_err(|e| Error::invalid(format!("{}: {e}", p.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    let (trajectory, results) = run_sequence(&frames, &cfg);
    write_trajectory(&args.output, &trajectory, &results)?;
    let degenerate = results.iter().filter(|r| r.degenerate_stage.is_some()).count();
    emit(
        out,
        format_args!(
            "odometry: {} frames ({} degenerate), wrote {}",
            results.len(),
            degenerate,
            args.output.display()
        ),
    )
}

fn run_synth(args: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    if args.frames == 0 {
        return Err(Error::invalid("--frames must be at least 1".to_string()));
    }
    let mut spec = parse_scene(&read_file(&args.spec)?)?;
    if let Ok(seed_text) = std::env::var("ORORA_SEED") {
        spec.seed = seed_text.parse().map_err(|_| {
            Error::invalid(format!("ORORA_SEED must be an integer, got `{seed_text}`"))
        })?;
    }
    std::fs::create_dir_all(&args.out).map_err(|e| Error::file(&args.out, e))?;
    let mut truth = vec![Pose2::identity()];
    for k in 0..args.frames {
        let frame_spec = SceneSpec { seed: spec.seed.wrapping_add(k as u64), ..spec };
        let (correspondences, pose, _) = generate_pair(&frame_spec)?;
        let file = CorrespondenceFile {
            src_frame: k as u64 + 1,
            dst_frame: k as u64,
            geometry: None,
            correspondences,
        };
        let path = args.out.join(format!("corr_{k:06}.corr"));
        write_correspondence_file(&path, &file)?;
        let next = truth.last().unwrap().compose(&pose);
        truth.push(next);
    }
    let gt_path = args.out.join("gt.traj");
    write_trajectory(&gt_path, &truth, &[])?;
    emit(
        out,
        format_args!(
            "synth: wrote {} correspondence files and gt.traj to {}",
            args.frames,
            args.out.display()
        ),
    )
}

fn parse_segment_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|part| {
            let length: f64 = part
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad segment length `{part}`")))?;
            if !length.is_finite() || length <= 0.0 {
                return Err(Error::invalid(format!("segment length must be positive: `{part}`")));
            }
            Ok(length)
        })
        .collect()
}

fn run_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let estimated = read_trajectory(&args.est)
        .map_err(|e| Error::invalid(format!("{}: {e}", args.est.display())))?;
    let truth = read_trajectory(&args.gt)
        .map_err(|e| Error::invalid(format!("{}: {e}", args.gt.display())))?;
    let lengths = match &args.segments {
        Some(text) => parse_segment_list(text)?,
        None => crate::metrics::DEFAULT_SEGMENT_LENGTHS.to_vec(),
    };
    let error = evaluate(&estimated, &truth, &lengths)?;
    emit(out, format_args!("poses     segments  t_rel(%)  r_rel(deg/100m)"))?;
    emit(
        out,
        format_args!(
            "{:<9} {:<9} {:<9.3} {:.4}",
            estimated.len(),
            error.segments.len(),
            error.t_rel,
            error.r_rel
        ),
    )?;
    emit(out, format_args!("t_rel={:.9}", error.t_rel))?;
    emit(out, format_args!("r_rel={:.9}", error.r_rel))
}

fn bench_scene(pairs: usize, ratio: f64, seed: u64) -> Result<crate::types::CorrespondenceSet> {
    let spec = SceneSpec {
        point_count: pairs,
        extent: 100.0,
        pose: Pose2::new(0.25, Vector2::new(1.5, -0.8)),
        outlier_ratio: ratio,
        noise: SceneNoise { sigma_range: 0.1, sigma_azimuth: 0.018 },
        shape: SceneShape::Ring,
        seed,
        noise_truncation: None,
    };
    Ok(generate_pair(&spec)?.0)
}

fn bench_config() -> OdometryConfig {
    let mut cfg = OdometryConfig::default();
    cfg.noise = NoiseParams::new(0.1, 0.054).expect("valid bench noise");
    cfg.mcis.cbar = 1.0;
    cfg.gnc.cbar = 1.0;
    cfg
}

fn run_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    if args.pairs < 2 || args.frames == 0 {
        return Err(Error::invalid(
            "--pairs must be at least 2 and --frames at least 1".to_string(),
        ));
    }
    let cfg = bench_config();
    let frames = (0..args.frames)
        .map(|k| bench_scene(args.pairs, 0.5, 4000 + k as u64))
        .collect::<Result<Vec<_>>>()?;
    let mut stage_totals = [0u64; 4];
    let mut total_us = 0u64;
    for frame in &frames {
        let clock = std::time::Instant::now();
        let result = estimate_frame(frame, &Pose2::identity(), &cfg);
        total_us += clock.elapsed().as_micros() as u64;
        stage_totals[0] += result.timings.doppler_us;
        stage_totals[1] += result.timings.inlier_selection_us;
        stage_totals[2] += result.timings.rotation_us;
        stage_totals[3] += result.timings.translation_us;
    }
    let n = args.frames as f64;
    emit(
        out,
        format_args!("bench: {} frames of {} correspondences", args.frames, args.pairs),
    )?;
    for (name, total) in
        ["doppler", "inlier_selection", "rotation", "translation"].iter().zip(stage_totals)
    {
        emit(out, format_args!("stage_{name}_us={:.1}", total as f64 / n))?;
    }
    emit(out, format_args!("mean_ms={:.3}", total_us as f64 / n / 1000.0))?;

    if let Some(curve_path) = &args.robustness_curve {
        let ratios = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.97, 0.99];
        let truth = Pose2::new(0.25, Vector2::new(1.5, -0.8));
        let mut text = String::from("# outlier_ratio success_rate\n");
        for (i, &ratio) in ratios.iter().enumerate() {
            let mut successes = 0usize;
            for trial in 0..args.trials {
                let seed = 5000 + (i * args.trials + trial) as u64;
                let corr = bench_scene(args.pairs, ratio, seed)?;
                let result = estimate_frame(&corr, &Pose2::identity(), &cfg);
                let angle_err = (result.pose.angle() - truth.angle()).abs();
                let trans_err = (result.pose.translation() - truth.translation()).norm();
                if result.degenerate_stage.is_none()
                    && angle_err < 0.5f64.to_radians()
                    && trans_err < 0.3
                {
                    successes += 1;
                }
            }
            text.push_str(&format!(
                "{ratio:.2} {:.3}\n",
                successes as f64 / args.trials as f64
            ));
        }
        std::fs::write(curve_path, text).map_err(|e| Error::file(curve_path, e))?;
        emit(out, format_args!("robustness curve written to {}", curve_path.display()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::scene_to_kv;
    use std::fs;

    fn run(args: &[&str]) -> (i32, String) {
        let cli = match Cli::try_parse_from(args) {
            Ok(cli) => cli,
            Err(e) => return (e.exit_code(), e.to_string()),
        };
        let mut buffer: Vec<u8> = Vec::new();
        let code = match execute(cli.command, &mut buffer) {
            Ok(()) => 0,
            Err(e) => return (1, format!("error: {e}")),
        };
        (code, String::from_utf8(buffer).unwrap())
    }

    fn write_scene(dir: &Path, spec: &SceneSpec) -> PathBuf {
        let path = dir.join("scene.cfg");
        fs::write(&path, scene_to_kv(spec)).unwrap();
        path
    }

    fn zero_noise_spec() -> SceneSpec {
        SceneSpec {
            point_count: 40,
            extent: 60.0,
            pose: Pose2::new(0.02, Vector2::new(1.2, 0.05)),
            outlier_ratio: 0.0,
            noise: SceneNoise::none(),
            shape: SceneShape::IsotropicDisk,
            seed: 11,
            noise_truncation: None,
        }
    }

    #[test]
    fn unknown_flags_exit_nonzero() {
        let (code, _) = run(&["orora", "odometry", "--frobnicate"]);
        assert_ne!(code, 0);
        let (code, _) = run(&["orora", "warp"]);
        assert_ne!(code, 0);
    }

    #[test]
    fn missing_config_file_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.cfg");
        let (code, message) = run(&[
            "orora",
            "odometry",
            "--input",
            dir.path().to_str().unwrap(),
            "--config",
            missing.to_str().unwrap(),
            "--output",
            dir.path().join("out.traj").to_str().unwrap(),
        ]);
        assert_eq!(code, 1);
        assert!(message.contains("nope.cfg"), "message: {message}");
    }

    #[test]
    fn synth_then_odometry_then_eval_recovers_zero_noise_motion() {
        let dir = tempfile::tempdir().unwrap();
        let scene_path = write_scene(dir.path(), &zero_noise_spec());
        let data_dir = dir.path().join("frames");
        let (code, _) = run(&[
            "orora",
            "synth",
            "--spec",
            scene_path.to_str().unwrap(),
            "--frames",
            "20",
            "--out",
            data_dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert!(data_dir.join("corr_000000.corr").exists());
        assert!(data_dir.join("corr_000019.corr").exists());
        assert!(data_dir.join("gt.traj").exists());

        let config_path = dir.path().join("run.cfg");
        fs::write(&config_path, "doppler.enabled = false\nmcis.cbar = 1.0\ngnc.cbar = 1.0\n")
            .unwrap();
        let out_path = dir.path().join("est.traj");
        let (code, message) = run(&[
            "orora",
            "odometry",
            "--input",
            data_dir.to_str().unwrap(),
            "--config",
            config_path.to_str().unwrap(),
            "--output",
            out_path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{message}");
        assert!(message.contains("20 frames (0 degenerate)"), "{message}");

        let (code, report) = run(&[
            "orora",
            "eval",
            "--est",
            out_path.to_str().unwrap(),
            "--gt",
            data_dir.join("gt.traj").to_str().unwrap(),
            "--segments",
            "10",
        ]);
        assert_eq!(code, 0, "{report}");
        let t_rel: f64 = report
            .lines()
            .find_map(|l| l.strip_prefix("t_rel="))
            .unwrap()
            .parse()
            .unwrap();
        assert!(t_rel < 1e-6, "t_rel {t_rel}");
    }

    #[test]
    fn eval_of_a_trajectory_against_itself_is_zero() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("line.traj");
        let poses: Vec<Pose2> =
            (0..30).map(|i| Pose2::new(0.0, Vector2::new(i as f64, 0.0))).collect();
        write_trajectory(&path, &poses, &[]).unwrap();
        let (code, report) = run(&[
            "orora",
            "eval",
            "--est",
            path.to_str().unwrap(),
            "--gt",
            path.to_str().unwrap(),
            "--segments",
            "5,10",
        ]);
        assert_eq!(code, 0);
        assert!(report.contains("t_rel=0.000"), "{report}");
        assert!(report.contains("r_rel=0.000"), "{report}");
    }

    #[test]
    fn eval_rejects_mismatched_trajectories() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.traj");
        let b = dir.path().join("b.traj");
        let poses: Vec<Pose2> =
            (0..10).map(|i| Pose2::new(0.0, Vector2::new(i as f64, 0.0))).collect();
        write_trajectory(&a, &poses, &[]).unwrap();
        write_trajectory(&b, &poses[..9], &[]).unwrap();
        let (code, message) = run(&[
            "orora",
            "eval",
            "--est",
            a.to_str().unwrap(),
            "--gt",
            b.to_str().unwrap(),
            "--segments",
            "2",
        ]);
        assert_eq!(code, 1);
        assert!(message.contains("lengths differ"), "{message}");
    }

    #[test]
    fn odometry_requires_correspondence_files() {
        let dir = tempfile::tempdir().unwrap();
        let (code, message) = run(&[
            "orora",
            "odometry",
            "--input",
            dir.path().to_str().unwrap(),
            "--output",
            dir.path().join("o.traj").to_str().unwrap(),
        ]);
        assert_eq!(code, 1);
        assert!(message.contains("no .corr files"), "{message}");
    }

    #[test]
    fn bench_reports_per_stage_statistics_and_a_curve() {
        let dir = tempfile::tempdir().unwrap();
        let curve = dir.path().join("curve.txt");
        let (code, report) = run(&[
            "orora",
            "bench",
            "--pairs",
            "60",
            "--frames",
            "3",
            "--trials",
            "2",
            "--robustness-curve",
            curve.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{report}");
        assert!(report.contains("stage_inlier_selection_us="), "{report}");
        assert!(report.contains("mean_ms="), "{report}");
        let curve_text = fs::read_to_string(&curve).unwrap();
        assert!(curve_text.starts_with("# outlier_ratio success_rate\n"));
        assert_eq!(curve_text.lines().count(), 14, "{curve_text}");
        assert!(curve_text.contains("\n0.99 "), "{curve_text}");
    }

    #[test]
    fn preset_flag_feeds_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let scene_path = write_scene(dir.path(), &zero_noise_spec());
        let data_dir = dir.path().join("frames");
        let (code, _) = run(&[
            "orora",
            "synth",
            "--spec",
            scene_path.to_str().unwrap(),
            "--frames",
            "2",
            "--out",
            data_dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let config_path = dir.path().join("run.cfg");
        fs::write(&config_path, "doppler.enabled = false\n").unwrap();
        let out_path = dir.path().join("est.traj");
        let (code, _) = run(&[
            "orora",
            "odometry",
            "--input",
            data_dir.to_str().unwrap(),
            "--config",
            config_path.to_str().unwrap(),
            "--output",
            out_path.to_str().unwrap(),
            "--preset",
            "open",
        ]);
        assert_eq!(code, 0);
        assert!(out_path.exists());
    }
}
