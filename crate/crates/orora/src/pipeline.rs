//! Frame-to-frame orchestration: Doppler correction, inlier selection,
//! rotation, then translation, chained into an absolute trajectory.

use std::time::Instant;

use crate::acote::{estimate_translation, AcoteConfig};
use crate::gnc::{estimate_rotation, GncConfig};
use crate::mcis::{prune, McisConfig};
use crate::metrics::MetricsConfig;
use crate::preprocess::{doppler_compensate, DopplerConfig, VoxelConfig};
use crate::types::{CorrespondenceSet, Pose2};
use crate::uncertainty::NoiseParams;
use crate::Result;

/// Named parameter sets for the two environments the estimator is tuned for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Cluttered surroundings: tight consistency bound, wide azimuth noise.
    Obstructed,
    /// Open surroundings: looser bound, narrow azimuth noise.
    Open,
}

/// Every tunable of the odometry pipeline in one place.
#[derive(Debug, Clone, PartialEq)]
pub struct OdometryConfig {
    pub noise: NoiseParams,
    pub doppler: DopplerConfig,
    /// Scan downsampling; applied when raw point clouds are ingested, not in
    /// the per-correspondence path.
    pub voxel: VoxelConfig,
    pub mcis: McisConfig,
    pub gnc: GncConfig,
    pub acote: AcoteConfig,
    pub metrics: MetricsConfig,
}

impl OdometryConfig {
    /// Baseline configuration for the given environment.
    pub fn preset(preset: Preset) -> Self {
        let (voxel_size, cbar, sigma_azimuth_deg) = match preset {
            Preset::Obstructed => (0.6, 0.75, 10.8),
            Preset::Open => (0.8, 1.0, 1.8),
        };
        let mut cfg = OdometryConfig {
            noise: NoiseParams::new(0.1, sigma_azimuth_deg * std::f64::consts::PI / 180.0)
                .expect("preset noise is valid"),
            doppler: DopplerConfig::default(),
            voxel: VoxelConfig { voxel_size },
            mcis: McisConfig { cbar, ..McisConfig::default() },
            gnc: GncConfig { cbar, ..GncConfig::default() },
            acote: AcoteConfig::default(),
            metrics: MetricsConfig::default(),
        };
        cfg.gnc.kappa = 1.4;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.doppler.validate()?;
        self.voxel.validate()?;
        self.gnc.validate()?;
        self.acote.validate()?;
        Ok(())
    }
}

impl Default for OdometryConfig {
    fn default() -> Self {
        OdometryConfig::preset(Preset::Obstructed)
    }
}

/// The four stages of one frame estimate, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Doppler,
    InlierSelection,
    Rotation,
    Translation,
}

/// Wall-clock cost of each stage in microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageTimings {
    pub doppler_us: u64,
    pub inlier_selection_us: u64,
    pub rotation_us: u64,
    pub translation_us: u64,
}

impl StageTimings {
    pub fn total_us(&self) -> u64 {
        self.doppler_us + self.inlier_selection_us + self.rotation_us + self.translation_us
    }
}

/// Outcome of one frame: the relative pose plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    /// Motion taking current-scan points into the previous scan's frame.
    pub pose: Pose2,
    pub inlier_count: usize,
    pub outlier_count: usize,
    pub gnc_iterations: usize,
    pub timings: StageTimings,
    /// Stage that failed, if any; the pose is then the previous one repeated.
    pub degenerate_stage: Option<Stage>,
    pub gnc_converged: bool,
    /// False when the clique search hit its time budget.
    pub clique_exact: bool,
    /// Stages entered, in order; the last one is the failing stage when
    /// `degenerate_stage` is set.
    pub stages: Vec<Stage>,
}

struct FrameRun {
    result: FrameResult,
    fallback: Pose2,
}

impl FrameRun {
    fn new(input_count: usize, fallback: Pose2) -> Self {
        FrameRun {
            result: FrameResult {
                pose: fallback,
                inlier_count: 0,
                outlier_count: input_count,
                gnc_iterations: 0,
                timings: StageTimings::default(),
                degenerate_stage: None,
                gnc_converged: false,
                clique_exact: true,
                stages: Vec::with_capacity(4),
            },
            fallback,
        }
    }

    fn fail(mut self, stage: Stage) -> FrameResult {
        self.result.pose = self.fallback;
        self.result.degenerate_stage = Some(stage);
        self.result
    }
}

/// Estimates the motion between two scans from their correspondences.
///
/// Stages run in a fixed order: Doppler compensation using the previous
/// relative pose, consistency pruning, rotation, translation. A failure at
/// any stage yields the constant-velocity prediction (`prev_pose` repeated)
/// with the failing stage flagged; the call never aborts.
pub fn estimate_frame(
    corr: &CorrespondenceSet,
    prev_pose: &Pose2,
    cfg: &OdometryConfig,
) -> FrameResult {
    let mut run = FrameRun::new(corr.len(), *prev_pose);
    let working = corr.with_noise(cfg.noise);

    run.result.stages.push(Stage::Doppler);
    let clock = Instant::now();
    let compensated = doppler_compensate(&working, prev_pose, &cfg.doppler);
    run.result.timings.doppler_us = clock.elapsed().as_micros() as u64;
    let compensated = match compensated {
        Ok(c) => c,
        Err(_) => return run.fail(Stage::Doppler),
    };

    run.result.stages.push(Stage::InlierSelection);
    let clock = Instant::now();
    let pruned = prune(&compensated, &cfg.noise, &cfg.mcis);
    run.result.timings.inlier_selection_us = clock.elapsed().as_micros() as u64;
    let pruned = match pruned {
        Ok(p) => p,
        Err(_) => return run.fail(Stage::InlierSelection),
    };
    run.result.inlier_count = pruned.inliers.len();
    run.result.outlier_count = corr.len() - pruned.inliers.len();
    run.result.clique_exact = pruned.clique_exact;

    run.result.stages.push(Stage::Rotation);
    let clock = Instant::now();
    let rotation = estimate_rotation(&pruned.inliers, &cfg.gnc);
    run.result.timings.rotation_us = clock.elapsed().as_micros() as u64;
    let rotation = match rotation {
        Ok(r) => r,
        Err(_) => return run.fail(Stage::Rotation),
    };
    run.result.gnc_iterations = rotation.iterations;
    run.result.gnc_converged = rotation.converged;

    run.result.stages.push(Stage::Translation);
    let clock = Instant::now();
    let translation =
        estimate_translation(&pruned.inliers, rotation.rotation, &cfg.noise, &cfg.acote);
    run.result.timings.translation_us = clock.elapsed().as_micros() as u64;
    let translation = match translation {
        Ok(t) => t,
        Err(_) => return run.fail(Stage::Translation),
    };

    run.result.pose = Pose2::new(rotation.rotation, translation.translation);
    run.result
}

/// Runs the estimator over consecutive frames and accumulates absolute poses.
///
/// The trajectory starts at identity and grows by one pose per frame,
/// `T_k = T_{k-1} * pose_k`. Each frame's Doppler step sees the previous
/// frame's relative pose, including constant-velocity fallbacks.
pub fn run_sequence(
    frames: &[CorrespondenceSet],
    cfg: &OdometryConfig,
) -> (Vec<Pose2>, Vec<FrameResult>) {
    let mut trajectory = Vec::with_capacity(frames.len() + 1);
    trajectory.push(Pose2::identity());
    let mut results = Vec::with_capacity(frames.len());
    let mut prev_relative = Pose2::identity();
    for frame in frames {
        let result = estimate_frame(frame, &prev_relative, cfg);
        prev_relative = result.pose;
        let absolute = trajectory.last().unwrap().compose(&result.pose);
        trajectory.push(absolute);
        results.push(result);
    }
    (trajectory, results)
}
