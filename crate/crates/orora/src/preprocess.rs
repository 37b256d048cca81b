//! Scan preprocessing: voxel downsampling and Doppler range correction.

use std::collections::BTreeMap;

use crate::types::{CorrespondenceSet, Pose2, RadarPoint};
use crate::{Error, Result};

/// Doppler range-distortion model for a mechanically scanning radar.
///
/// A sensor moving at velocity `v` biases the measured range of a return at
/// azimuth `theta` by `beta * (v_x cos theta + v_y sin theta)`. The lateral
/// velocity is taken as zero (no-slip assumption), and `v_x` is read off the
/// previous frame's translation divided by the scan period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerConfig {
    /// Distortion coefficient, seconds (sensor dependent).
    pub beta: f64,
    /// Time between scans, seconds.
    pub scan_period: f64,
    pub enabled: bool,
}

impl Default for DopplerConfig {
    fn default() -> Self {
        DopplerConfig {
            beta: 0.049,
            scan_period: 0.25,
            enabled: true,
        }
    }
}

impl DopplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() {
            return Err(Error::invalid(format!("doppler beta must be finite, got {}", self.beta)));
        }
        if !self.scan_period.is_finite() || self.scan_period <= 0.0 {
            return Err(Error::invalid(format!(
                "scan period must be positive, got {}",
                self.scan_period
            )));
        }
        Ok(())
    }
}

/// Grid size for voxel downsampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelConfig {
    /// Cell edge length, meters.
    pub voxel_size: f64,
}

impl Default for VoxelConfig {
    fn default() -> Self {
        VoxelConfig { voxel_size: 0.6 }
    }
}

impl VoxelConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.voxel_size.is_finite() || self.voxel_size <= 0.0 {
            return Err(Error::invalid(format!(
                "voxel size must be positive, got {}",
                self.voxel_size
            )));
        }
        Ok(())
    }
}

/// Downsamples a point cloud to one representative per occupied grid cell.
///
/// The representative is the input point closest to its cell's center (ties
/// go to the earlier input point), so every output point is an actual
/// measurement. Output is ordered by cell index, which makes the result
/// independent of input order up to ties.
pub fn voxel_sample(points: &[RadarPoint], cfg: &VoxelConfig) -> Result<Vec<RadarPoint>> {
    cfg.validate()?;
    let size = cfg.voxel_size;
    // Cell -> (index of best point so far, its squared distance to center).
    let mut cells: BTreeMap<(i64, i64), (usize, f64)> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        let ix = (p.x() / size).floor() as i64;
        let iy = (p.y() / size).floor() as i64;
        let cx = (ix as f64 + 0.5) * size;
        let cy = (iy as f64 + 0.5) * size;
        let d2 = (p.x() - cx).powi(2) + (p.y() - cy).powi(2);
        cells
            .entry((ix, iy))
            .and_modify(|best| {
                if d2 < best.1 {
                    *best = (i, d2);
                }
            })
            .or_insert((i, d2));
    }
    Ok(cells.values().map(|&(i, _)| points[i]).collect())
}

/// Removes the Doppler range bias from both points of every correspondence.
///
/// `prev_pose` supplies the velocity estimate: its x-translation over one
/// scan period. Ranges shift by `beta * v_x * cos(theta)` while azimuths are
/// carried over bit-for-bit; a shift that would drive a range negative is
/// floored at zero. Covariances are recomputed at the corrected ranges.
/// Disabled configs return the input unchanged.
pub fn doppler_compensate(
    corr: &CorrespondenceSet,
    prev_pose: &Pose2,
    cfg: &DopplerConfig,
) -> Result<CorrespondenceSet> {
    cfg.validate()?;
    if !cfg.enabled || cfg.beta == 0.0 {
        return Ok(corr.clone());
    }
    let v_x = prev_pose.translation().x / cfg.scan_period;
    let shift = |p: &RadarPoint| {
        let delta = cfg.beta * v_x * p.azimuth().cos();
        let range = (p.range() + delta).max(0.0);
        RadarPoint::from_polar_wrapped(range, p.azimuth())
    };
    let pairs = corr
        .pairs()
        .iter()
        .map(|c| crate::types::Correspondence {
            src_index: c.src_index,
            dst_index: c.dst_index,
            src: shift(&c.src),
            dst: shift(&c.dst),
        })
        .collect();
    CorrespondenceSet::new(pairs, *corr.noise())
}
