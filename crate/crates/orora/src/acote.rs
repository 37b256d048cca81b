//! Component-wise translation estimation with per-measurement uncertainty.
//!
//! Once the rotation is fixed, every correspondence votes for a translation
//! `v = q - R p` with an anisotropic covariance propagated from both
//! returns. Each axis is solved independently: the interval
//! `[v - sigma, v + sigma]` of every vote is cut into candidate regions by
//! the sorted interval endpoints, each region's consensus set is fit by an
//! inverse-variance weighted mean, and the candidate with the lowest
//! truncated cost wins. Votes outside a candidate's consensus contribute
//! their sigma as a constant penalty instead of a squared residual.

use nalgebra::{Rotation2, Vector2};

use crate::types::CorrespondenceSet;
use crate::uncertainty::{point_covariance, rotate_covariance, NoiseParams};
use crate::{Error, Result};

/// Two candidate costs within this of each other count as tied and fall
/// through to the deterministic tie-break.
const COST_TIE_EPS: f64 = 1e-12;

/// Parameters of the translation stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcoteConfig {
    /// Lower bound on per-axis sigmas, guarding against zero-width intervals
    /// and unbounded weights.
    pub sigma_floor: f64,
}

impl Default for AcoteConfig {
    fn default() -> Self {
        AcoteConfig { sigma_floor: 1e-4 }
    }
}

impl AcoteConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.sigma_floor.is_finite() || self.sigma_floor <= 0.0 {
            return Err(Error::invalid(format!(
                "sigma floor must be positive, got {}",
                self.sigma_floor
            )));
        }
        Ok(())
    }
}

/// One correspondence's translation vote and its per-axis standard
/// deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationMeasurement {
    pub value: Vector2<f64>,
    pub sigma: Vector2<f64>,
}

/// The sorted interval endpoints of all votes along one axis.
#[derive(Debug, Clone)]
pub struct BoundarySet {
    /// `(endpoint value, measurement index, true for the upper endpoint)`,
    /// ascending by value.
    entries: Vec<(f64, usize, bool)>,
}

impl BoundarySet {
    /// Endpoints `v - sigma` and `v + sigma` of every measurement on `axis`.
    pub fn build(measurements: &[TranslationMeasurement], axis: usize) -> Self {
        let mut entries = Vec::with_capacity(2 * measurements.len());
        for (m, t) in measurements.iter().enumerate() {
            entries.push((t.value[axis] - t.sigma[axis], m, false));
            entries.push((t.value[axis] + t.sigma[axis], m, true));
        }
        entries.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap()
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        BoundarySet { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.0)
    }
}

/// Result of one axis of the consensus search.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisEstimate {
    pub value: f64,
    /// Indices of the measurements in the winning consensus set, ascending.
    pub inliers: Vec<usize>,
    /// The probe location the winning consensus was collected at.
    pub probe: f64,
    /// The winning truncated cost.
    pub cost: f64,
}

/// Rotation-compensated translation votes for a set of correspondences.
///
/// The vote covariance is `C_dst + R C_src R^T`; its diagonal, floored at
/// `sigma_floor` after the square root, gives the per-axis sigmas.
pub fn build_measurements(
    corr: &CorrespondenceSet,
    rotation: f64,
    noise: &NoiseParams,
    cfg: &AcoteConfig,
) -> Vec<TranslationMeasurement> {
    let rot = Rotation2::new(rotation);
    corr.pairs()
        .iter()
        .map(|c| {
            let value = c.dst.position() - rot * c.src.position();
            let c_src = rotate_covariance(&point_covariance(&c.src, noise), &rot);
            let c_dst = point_covariance(&c.dst, noise);
            let combined = c_dst.matrix() + c_src.matrix();
            let sigma = Vector2::new(
                combined[(0, 0)].max(0.0).sqrt().max(cfg.sigma_floor),
                combined[(1, 1)].max(0.0).sqrt().max(cfg.sigma_floor),
            );
            TranslationMeasurement { value, sigma }
        })
        .collect()
}

/// Consensus translation along one axis (0 for x, 1 for y).
///
/// Candidates are the midpoints of consecutive distinct interval endpoints.
/// Each candidate keeps the measurements whose intervals contain it, fits
/// them with an inverse-variance weighted mean, and is scored by the fit
/// residuals plus the sigmas of everything left out. Cost ties (within
/// 1e-12) prefer the larger consensus set, then the smaller magnitude.
pub fn estimate_axis(measurements: &[TranslationMeasurement], axis: usize) -> Result<AxisEstimate> {
    assert!(axis < 2, "axis must be 0 or 1");
    if measurements.is_empty() {
        return Err(Error::Degenerate("no translation votes"));
    }
    let boundaries = BoundarySet::build(measurements, axis);
    let endpoints: Vec<f64> = boundaries.values().collect();
    let sigma_total: f64 = measurements.iter().map(|t| t.sigma[axis]).sum();

    let mut best: Option<AxisEstimate> = None;
    for gap in endpoints.windows(2) {
        if gap[1] == gap[0] {
            continue;
        }
        let probe = 0.5 * (gap[0] + gap[1]);
        let mut inliers = Vec::new();
        let mut weight_sum = 0.0;
        let mut weighted_value = 0.0;
        for (m, t) in measurements.iter().enumerate() {
            let d = probe - t.value[axis];
            if d * d <= t.sigma[axis] * t.sigma[axis] {
                inliers.push(m);
                let w = 1.0 / (t.sigma[axis] * t.sigma[axis]);
                weight_sum += w;
                weighted_value += w * t.value[axis];
            }
        }
        if inliers.is_empty() {
            continue;
        }
        let value = weighted_value / weight_sum;
        let mut cost = 0.0;
        let mut inlier_sigma = 0.0;
        for &m in &inliers {
            let t = &measurements[m];
            let r = (value - t.value[axis]) / t.sigma[axis];
            cost += r * r;
            inlier_sigma += t.sigma[axis];
        }
        cost += sigma_total - inlier_sigma;
        let candidate = AxisEstimate { value, inliers, probe, cost };
        best = Some(match best.take() {
            None => candidate,
            Some(incumbent) => {
                if candidate.cost < incumbent.cost - COST_TIE_EPS {
                    candidate
                } else if (candidate.cost - incumbent.cost).abs() <= COST_TIE_EPS
                    && (candidate.inliers.len() > incumbent.inliers.len()
                        || (candidate.inliers.len() == incumbent.inliers.len()
                            && candidate.value.abs() < incumbent.value.abs()))
                {
                    candidate
                } else {
                    incumbent
                }
            }
        });
    }
    // Every measurement's own interval has positive width (sigmas are
    // floored), so at least one probe lands inside it and the candidate list
    // cannot come up empty.
    Ok(best.expect("at least one candidate has a non-empty consensus"))
}

/// Full translation estimate for a set of pruned correspondences under a
/// fixed rotation.
#[derive(Debug, Clone)]
pub struct TranslationEstimate {
    pub translation: Vector2<f64>,
    pub axis_x: AxisEstimate,
    pub axis_y: AxisEstimate,
}

/// Estimates both translation components independently.
pub fn estimate_translation(
    corr: &CorrespondenceSet,
    rotation: f64,
    noise: &NoiseParams,
    cfg: &AcoteConfig,
) -> Result<TranslationEstimate> {
    cfg.validate()?;
    let measurements = build_measurements(corr, rotation, noise, cfg);
    let axis_x = estimate_axis(&measurements, 0)?;
    let axis_y = estimate_axis(&measurements, 1)?;
    Ok(TranslationEstimate {
        translation: Vector2::new(axis_x.value, axis_y.value),
        axis_x,
        axis_y,
    })
}
