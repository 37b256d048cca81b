//! Flat `key = value` configuration files for the estimator and for
//! synthetic scenes: `#` comments, last duplicate wins, unknown keys are
//! errors with line numbers.

use std::time::Duration;

use nalgebra::Vector2;

use crate::gnc::TimChain;
use crate::pipeline::{OdometryConfig, Preset};
use crate::synth::{SceneShape, SceneSpec};
use crate::types::Pose2;
use crate::uncertainty::NoiseParams;
use crate::{Error, Result};

fn tokenize(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| {
            Error::format(line, format!("expected `key = value`, got `{content}`"))
        })?;
        entries.push((line, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

fn parse_f64(line: usize, value: &str) -> Result<f64> {
    let x: f64 = value
        .parse()
        .map_err(|_| Error::format(line, format!("expected a number, got `{value}`")))?;
    if !x.is_finite() {
        return Err(Error::format(line, format!("number must be finite, got `{value}`")));
    }
    Ok(x)
}

fn parse_int<T: std::str::FromStr>(line: usize, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::format(line, format!("expected an integer, got `{value}`")))
}

fn parse_bool(line: usize, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::format(line, format!("expected `true` or `false`, got `{value}`"))),
    }
}

fn parse_lengths(line: usize, value: &str) -> Result<Vec<f64>> {
    let lengths = value
        .split(',')
        .map(|part| parse_f64(line, part.trim()))
        .collect::<Result<Vec<f64>>>()?;
    if lengths.is_empty() {
        return Err(Error::format(line, "expected at least one length".to_string()));
    }
    Ok(lengths)
}

fn parse_preset(line: usize, value: &str) -> Result<Preset> {
    match value {
        "obstructed" => Ok(Preset::Obstructed),
        "open" => Ok(Preset::Open),
        _ => Err(Error::format(
            line,
            format!("expected `obstructed` or `open`, got `{value}`"),
        )),
    }
}

fn parse_chain(line: usize, value: &str) -> Result<TimChain> {
    match value {
        "closed" => Ok(TimChain::Closed),
        "open" => Ok(TimChain::Open),
        _ => Err(Error::format(line, format!("expected `closed` or `open`, got `{value}`"))),
    }
}

fn parse_shape(line: usize, value: &str) -> Result<SceneShape> {
    match value {
        "isotropic-disk" => Ok(SceneShape::IsotropicDisk),
        "corridor" => Ok(SceneShape::Corridor),
        "ring" => Ok(SceneShape::Ring),
        _ => Err(Error::format(
            line,
            format!("expected `isotropic-disk`, `corridor`, or `ring`, got `{value}`"),
        )),
    }
}

fn parse_pose(line: usize, value: &str) -> Result<Pose2> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::format(
            line,
            format!("expected `x y yaw` (three numbers), got `{value}`"),
        ));
    }
    let x = parse_f64(line, parts[0])?;
    let y = parse_f64(line, parts[1])?;
    let yaw = parse_f64(line, parts[2])?;
    Ok(Pose2::new(yaw, Vector2::new(x, y)))
}

fn parse_truncation(line: usize, value: &str) -> Result<Option<f64>> {
    if value == "none" {
        Ok(None)
    } else {
        parse_f64(line, value).map(Some)
    }
}

/// Parses an estimator configuration.
///
/// A `preset` key is applied first regardless of its position; every other
/// key then overrides the preset's value. Missing keys keep their defaults.
pub fn parse_odometry(text: &str) -> Result<OdometryConfig> {
    let entries = tokenize(text)?;
    let mut cfg = OdometryConfig::default();
    for (line, key, value) in &entries {
        if key == "preset" {
            cfg = OdometryConfig::preset(parse_preset(*line, value)?);
        }
    }
    let mut sigma_range = cfg.noise.sigma_range;
    let mut sigma_azimuth = cfg.noise.sigma_azimuth;
    for (line, key, value) in &entries {
        let line = *line;
        match key.as_str() {
            "preset" => {}
            "noise.sigma_range" => sigma_range = parse_f64(line, value)?,
            "noise.sigma_azimuth" => sigma_azimuth = parse_f64(line, value)?,
            "doppler.beta" => cfg.doppler.beta = parse_f64(line, value)?,
            "doppler.scan_period" => cfg.doppler.scan_period = parse_f64(line, value)?,
            "doppler.enabled" => cfg.doppler.enabled = parse_bool(line, value)?,
            "voxel.size" => cfg.voxel.voxel_size = parse_f64(line, value)?,
            "mcis.cbar" => cfg.mcis.cbar = parse_f64(line, value)?,
            "mcis.time_budget_ms" => {
                cfg.mcis.time_budget = Duration::from_millis(parse_int(line, value)?)
            }
            "gnc.cbar" => cfg.gnc.cbar = parse_f64(line, value)?,
            "gnc.kappa" => cfg.gnc.kappa = parse_f64(line, value)?,
            "gnc.max_iterations" => cfg.gnc.max_iterations = parse_int(line, value)?,
            "gnc.convergence_tol" => cfg.gnc.convergence_tol = parse_f64(line, value)?,
            "gnc.tim_chain" => cfg.gnc.tim_chain = parse_chain(line, value)?,
            "acote.sigma_floor" => cfg.acote.sigma_floor = parse_f64(line, value)?,
            "metrics.segment_lengths" => {
                cfg.metrics.segment_lengths = parse_lengths(line, value)?
            }
            _ => return Err(Error::format(line, format!("unknown key `{key}`"))),
        }
    }
    cfg.noise = NoiseParams::new(sigma_range, sigma_azimuth)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Serializes a configuration so that `parse_odometry` reproduces it.
pub fn odometry_to_kv(cfg: &OdometryConfig) -> String {
    let lengths: Vec<String> =
        cfg.metrics.segment_lengths.iter().map(|l| l.to_string()).collect();
    let chain = match cfg.gnc.tim_chain {
        TimChain::Closed => "closed",
        TimChain::Open => "open",
    };
    format!(
        "noise.sigma_range = {}\n\
         noise.sigma_azimuth = {}\n\
         doppler.beta = {}\n\
         doppler.scan_period = {}\n\
         doppler.enabled = {}\n\
         voxel.size = {}\n\
         mcis.cbar = {}\n\
         mcis.time_budget_ms = {}\n\
         gnc.cbar = {}\n\
         gnc.kappa = {}\n\
         gnc.max_iterations = {}\n\
         gnc.convergence_tol = {}\n\
         gnc.tim_chain = {}\n\
         acote.sigma_floor = {}\n\
         metrics.segment_lengths = {}\n",
        cfg.noise.sigma_range,
        cfg.noise.sigma_azimuth,
        cfg.doppler.beta,
        cfg.doppler.scan_period,
        cfg.doppler.enabled,
        cfg.voxel.voxel_size,
        cfg.mcis.cbar,
        cfg.mcis.time_budget.as_millis(),
        cfg.gnc.cbar,
        cfg.gnc.kappa,
        cfg.gnc.max_iterations,
        cfg.gnc.convergence_tol,
        chain,
        cfg.acote.sigma_floor,
        lengths.join(","),
    )
}

/// Parses a synthetic-scene recipe; keys share the odometry dialect.
pub fn parse_scene(text: &str) -> Result<SceneSpec> {
    let mut spec = SceneSpec::default();
    for (line, key, value) in tokenize(text)? {
        match key.as_str() {
            "scene.points" => spec.point_count = parse_int(line, &value)?,
            "scene.extent" => spec.extent = parse_f64(line, &value)?,
            "scene.outlier_ratio" => spec.outlier_ratio = parse_f64(line, &value)?,
            "scene.seed" => spec.seed = parse_int(line, &value)?,
            "scene.shape" => spec.shape = parse_shape(line, &value)?,
            "scene.pose" => spec.pose = parse_pose(line, &value)?,
            "scene.noise.sigma_range" => spec.noise.sigma_range = parse_f64(line, &value)?,
            "scene.noise.sigma_azimuth" => spec.noise.sigma_azimuth = parse_f64(line, &value)?,
            "scene.truncation_sigmas" => spec.noise_truncation = parse_truncation(line, &value)?,
            _ => return Err(Error::format(line, format!("unknown key `{key}`"))),
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// Serializes a scene recipe so that `parse_scene` reproduces it.
pub fn scene_to_kv(spec: &SceneSpec) -> String {
    let shape = match spec.shape {
        SceneShape::IsotropicDisk => "isotropic-disk",
        SceneShape::Corridor => "corridor",
        SceneShape::Ring => "ring",
    };
    let truncation = match spec.noise_truncation {
        None => "none".to_string(),
        Some(k) => k.to_string(),
    };
    format!(
        "scene.points = {}\n\
         scene.extent = {}\n\
         scene.outlier_ratio = {}\n\
         scene.seed = {}\n\
         scene.shape = {}\n\
         scene.pose = {} {} {}\n\
         scene.noise.sigma_range = {}\n\
         scene.noise.sigma_azimuth = {}\n\
         scene.truncation_sigmas = {}\n",
        spec.point_count,
        spec.extent,
        spec.outlier_ratio,
        spec.seed,
        shape,
        spec.pose.translation().x,
        spec.pose.translation().y,
        spec.pose.angle(),
        spec.noise.sigma_range,
        spec.noise.sigma_azimuth,
        truncation,
    )
}
