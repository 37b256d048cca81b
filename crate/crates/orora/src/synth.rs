//! Synthetic correspondence scenes with known ground truth, plus slow
//! brute-force oracles used to cross-check the estimators in tests.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::acote::TranslationMeasurement;
use crate::gnc::TimPair;
use crate::mcis::ConsistencyGraph;
use crate::types::{Correspondence, CorrespondenceSet, Pose2, RadarPoint};
use crate::uncertainty::NoiseParams;
use crate::{Error, Result};

/// Generator-side polar noise levels. Unlike [`NoiseParams`] these may be
/// zero, so scenes can be rendered without any perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneNoise {
    /// Standard deviation of the range perturbation in meters.
    pub sigma_range: f64,
    /// Standard deviation of the azimuth perturbation in radians.
    pub sigma_azimuth: f64,
}

impl SceneNoise {
    pub fn none() -> Self {
        SceneNoise { sigma_range: 0.0, sigma_azimuth: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma_range", self.sigma_range), ("sigma_azimuth", self.sigma_azimuth)]
        {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for SceneNoise {
    fn default() -> Self {
        SceneNoise { sigma_range: 0.1, sigma_azimuth: 0.018 }
    }
}

/// Spatial layout of the source returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneShape {
    /// Ranges uniform in `[0.02, 0.5] * extent`, azimuths uniform.
    IsotropicDisk,
    /// A band along x: `|x| <= extent / 2`, `|y| <= extent / 20`.
    Corridor,
    /// Ranges uniform in `[0.15, 0.19] * extent`, azimuths uniform; landmarks
    /// at comparable ranges, so their azimuthal noise is comparable too.
    Ring,
}

/// Recipe for one synthetic correspondence set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub point_count: usize,
    /// Workspace diameter in meters; outlier destinations are uniform over
    /// the `extent x extent` box centered on the sensor.
    pub extent: f64,
    /// Ground-truth motion taking source points into the destination frame.
    pub pose: Pose2,
    /// Fraction of correspondences replaced by random destinations, in [0, 1).
    pub outlier_ratio: f64,
    pub noise: SceneNoise,
    pub shape: SceneShape,
    pub seed: u64,
    /// Optional clamp on the noise draws, in multiples of sigma.
    pub noise_truncation: Option<f64>,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.extent.is_finite() || self.extent <= 0.0 {
            return Err(Error::invalid(format!("extent must be positive, got {}", self.extent)));
        }
        if !self.outlier_ratio.is_finite() || !(0.0..1.0).contains(&self.outlier_ratio) {
            return Err(Error::invalid(format!(
                "outlier_ratio must lie in [0, 1), got {}",
                self.outlier_ratio
            )));
        }
        if let Some(k) = self.noise_truncation {
            if !k.is_finite() || k <= 0.0 {
                return Err(Error::invalid(format!(
                    "noise_truncation must be positive, got {k}"
                )));
            }
        }
        self.noise.validate()
    }
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            point_count: 100,
            extent: 100.0,
            pose: Pose2::identity(),
            outlier_ratio: 0.5,
            noise: SceneNoise::default(),
            shape: SceneShape::IsotropicDisk,
            seed: 0,
            noise_truncation: None,
        }
    }
}

fn sample_source(spec: &SceneSpec, rng: &mut ChaCha8Rng) -> RadarPoint {
    let (x, y) = match spec.shape {
        SceneShape::IsotropicDisk => {
            let range = rng.random_range(0.02 * spec.extent..=0.5 * spec.extent);
            let angle = rng.random_range(-PI..PI);
            (range * angle.cos(), range * angle.sin())
        }
        SceneShape::Corridor => (
            rng.random_range(-0.5 * spec.extent..=0.5 * spec.extent),
            rng.random_range(-0.05 * spec.extent..=0.05 * spec.extent),
        ),
        SceneShape::Ring => {
            let range = rng.random_range(0.15 * spec.extent..=0.19 * spec.extent);
            let angle = rng.random_range(-PI..PI);
            (range * angle.cos(), range * angle.sin())
        }
    };
    RadarPoint::from_cartesian(x, y).expect("sampled coordinates are finite")
}

/// Applies exact polar noise to a Cartesian point: the range and azimuth are
/// perturbed, not a linearization around the point.
fn perturb(
    point: nalgebra::Vector2<f64>,
    spec: &SceneSpec,
    range_noise: &Normal<f64>,
    azimuth_noise: &Normal<f64>,
    rng: &mut ChaCha8Rng,
) -> RadarPoint {
    let mut dr = range_noise.sample(rng);
    let mut da = azimuth_noise.sample(rng);
    if let Some(k) = spec.noise_truncation {
        dr = dr.clamp(-k * spec.noise.sigma_range, k * spec.noise.sigma_range);
        da = da.clamp(-k * spec.noise.sigma_azimuth, k * spec.noise.sigma_azimuth);
    }
    if dr == 0.0 && da == 0.0 {
        return RadarPoint::from_cartesian(point.x, point.y).expect("finite point");
    }
    let range = (point.norm() + dr).max(0.0);
    let azimuth = point.y.atan2(point.x) + da;
    RadarPoint::from_cartesian(range * azimuth.cos(), range * azimuth.sin())
        .expect("perturbed point is finite")
}

/// Draws one correspondence set under a known motion.
///
/// Returns the set, the ground-truth pose, and per-correspondence labels
/// (`true` marks a real match). Inlier destinations are the transformed
/// sources under exact polar noise; outlier destinations are uniform over the
/// workspace box. The set carries the scene's noise levels when both are
/// positive and the default estimation noise otherwise; callers with their
/// own model rebind via `with_noise`.
pub fn generate_pair(spec: &SceneSpec) -> Result<(CorrespondenceSet, Pose2, Vec<bool>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.point_count;
    let outlier_count = ((spec.outlier_ratio * n as f64).round() as usize).min(n);
    let mut labels = vec![true; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for &i in order.iter().take(outlier_count) {
        labels[i] = false;
    }

    let range_noise = Normal::new(0.0, spec.noise.sigma_range).expect("validated sigma");
    let azimuth_noise = Normal::new(0.0, spec.noise.sigma_azimuth).expect("validated sigma");
    let half = 0.5 * spec.extent;
    let mut pairs = Vec::with_capacity(n);
    for (i, &inlier) in labels.iter().enumerate() {
        let src = sample_source(spec, &mut rng);
        let dst = if inlier {
            let moved = spec.pose.transform_point(src.position());
            perturb(moved, spec, &range_noise, &azimuth_noise, &mut rng)
        } else {
            let x = rng.random_range(-half..=half);
            let y = rng.random_range(-half..=half);
            RadarPoint::from_cartesian(x, y).expect("finite point")
        };
        pairs.push(Correspondence { src_index: i, dst_index: i, src, dst });
    }

    let noise = if spec.noise.sigma_range > 0.0 && spec.noise.sigma_azimuth > 0.0 {
        NoiseParams::new(spec.noise.sigma_range, spec.noise.sigma_azimuth)?
    } else {
        NoiseParams::default()
    };
    Ok((CorrespondenceSet::new(pairs, noise)?, spec.pose, labels))
}

/// Brute-force weighted rotation fit: scans a 1e-4 rad grid over (-pi, pi)
/// and returns the angle with the smallest weighted squared residual.
pub fn oracle_rotation(tims: &[TimPair], weights: &[f64]) -> f64 {
    assert_eq!(tims.len(), weights.len(), "one weight per difference pair");
    const STEP: f64 = 1e-4;
    let steps = (2.0 * PI / STEP).round() as usize;
    let mut best_angle = 0.0;
    let mut best_cost = f64::INFINITY;
    for k in 0..steps {
        let theta = -PI + k as f64 * STEP;
        let (s, c) = theta.sin_cos();
        let mut cost = 0.0;
        for (t, w) in tims.iter().zip(weights) {
            let rx = c * t.src_diff.x - s * t.src_diff.y;
            let ry = s * t.src_diff.x + c * t.src_diff.y;
            let dx = t.dst_diff.x - rx;
            let dy = t.dst_diff.y - ry;
            cost += w * (dx * dx + dy * dy);
        }
        if cost < best_cost {
            best_cost = cost;
            best_angle = theta;
        }
    }
    best_angle
}

/// Brute-force interval-consensus translation along one axis, written with
/// plain loops so it shares nothing with the production search beyond the
/// measurement type. Returns the estimate and the consensus indices.
pub fn oracle_acote(measurements: &[TranslationMeasurement], axis: usize) -> (f64, Vec<usize>) {
    assert!(axis < 2, "axis must be 0 or 1");
    assert!(!measurements.is_empty(), "need at least one vote");
    let values: Vec<f64> = measurements.iter().map(|t| t.value[axis]).collect();
    let sigmas: Vec<f64> = measurements.iter().map(|t| t.sigma[axis]).collect();
    let mut endpoints = Vec::with_capacity(2 * values.len());
    for (v, s) in values.iter().zip(&sigmas) {
        endpoints.push(v - s);
        endpoints.push(v + s);
    }
    endpoints.sort_by(|a, b| a.partial_cmp(b).expect("finite endpoints"));
    let total_sigma: f64 = sigmas.iter().sum();

    let mut best: Option<(f64, Vec<usize>, f64)> = None;
    for pair in endpoints.windows(2) {
        if pair[0] == pair[1] {
            continue;
        }
        let probe = 0.5 * (pair[0] + pair[1]);
        let mut members = Vec::new();
        let mut weight_sum = 0.0;
        let mut value_sum = 0.0;
        for i in 0..values.len() {
            let d = probe - values[i];
            if d * d <= sigmas[i] * sigmas[i] {
                members.push(i);
                let w = 1.0 / (sigmas[i] * sigmas[i]);
                weight_sum += w;
                value_sum += w * values[i];
            }
        }
        if members.is_empty() {
            continue;
        }
        let value = value_sum / weight_sum;
        let mut cost = 0.0;
        let mut kept_sigma = 0.0;
        for &i in &members {
            let r = (value - values[i]) / sigmas[i];
            cost += r * r;
            kept_sigma += sigmas[i];
        }
        cost += total_sigma - kept_sigma;
        let take = match &best {
            None => true,
            Some((bv, bm, bc)) => {
                cost < bc - 1e-12
                    || ((cost - bc).abs() <= 1e-12
                        && (members.len() > bm.len()
                            || (members.len() == bm.len() && value.abs() < bv.abs())))
            }
        };
        if take {
            best = Some((value, members, cost));
        }
    }
    let (value, members, _) = best.expect("some interval midpoint is always covered");
    (value, members)
}

fn extend_clique(
    graph: &ConsistencyGraph,
    current: &mut Vec<usize>,
    mut candidates: Vec<usize>,
    mut excluded: Vec<usize>,
    best: &mut Vec<usize>,
) {
    if candidates.is_empty() && excluded.is_empty() {
        if current.len() > best.len()
            || (current.len() == best.len() && current.as_slice() < best.as_slice())
        {
            *best = current.clone();
        }
        return;
    }
    while let Some(&v) = candidates.first() {
        let next_candidates =
            candidates.iter().copied().filter(|&u| graph.is_edge(v, u)).collect();
        let next_excluded = excluded.iter().copied().filter(|&u| graph.is_edge(v, u)).collect();
        current.push(v);
        extend_clique(graph, current, next_candidates, next_excluded, best);
        current.pop();
        candidates.remove(0);
        excluded.push(v);
    }
}

/// Exhaustive maximum-clique search (Bron-Kerbosch over plain vectors) with
/// the same tie rule as the production search: largest, then lexicographically
/// smallest. Panics on graphs with more than 30 vertices.
pub fn oracle_max_clique(graph: &ConsistencyGraph) -> Vec<usize> {
    let n = graph.vertex_count();
    assert!(n <= 30, "oracle enumeration is exponential; got {n} vertices");
    let mut best = Vec::new();
    let mut current = Vec::new();
    extend_clique(graph, &mut current, (0..n).collect(), Vec::new(), &mut best);
    best
}
