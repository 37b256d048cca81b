//! Rotation estimation by graduated non-convexity with a truncated-loss
//! objective.
//!
//! Subtracting paired correspondences cancels the unknown translation, so
//! the rotation can be solved on difference vectors alone. Each difference
//! pair gets a weight in [0, 1]; the solver alternates a closed-form
//! weighted rotation fit with a weight update, while a control parameter
//! `mu` walks the surrogate cost from nearly convex toward the exact
//! truncated loss. Pairs whose residual ends up beyond the truncation bound
//! fall to weight zero and stop influencing the fit.

use nalgebra::{Rotation2, Vector2};

use crate::types::CorrespondenceSet;
use crate::{Error, Result};

/// How correspondences are paired into difference vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimChain {
    /// Consecutive pairs plus a wrap-around pair; yields as many difference
    /// vectors as correspondences.
    Closed,
    /// Consecutive pairs only; yields one fewer.
    Open,
}

/// A translation-invariant measurement: the difference of two source points
/// and the difference of their matched destination points. Under the true
/// motion `dst_diff = R * src_diff` up to noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimPair {
    pub src_diff: Vector2<f64>,
    pub dst_diff: Vector2<f64>,
    /// Ranges of the two destination returns the pair was built from; longer
    /// ranges mean noisier differences and a smaller initial weight.
    pub prior_ranges: (f64, f64),
}

/// Parameters of the graduated non-convexity schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GncConfig {
    /// Truncation bound: residual norms beyond `cbar` count as outliers.
    pub cbar: f64,
    /// Multiplicative step of the control parameter per iteration.
    pub kappa: f64,
    pub max_iterations: usize,
    /// Convergence threshold on the change of the weighted cost.
    pub convergence_tol: f64,
    pub tim_chain: TimChain,
}

impl Default for GncConfig {
    fn default() -> Self {
        GncConfig {
            cbar: 0.75,
            kappa: 1.4,
            max_iterations: 100,
            convergence_tol: 1e-7,
            tim_chain: TimChain::Closed,
        }
    }
}

impl GncConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.cbar.is_finite() || self.cbar <= 0.0 {
            return Err(Error::invalid(format!("cbar must be positive, got {}", self.cbar)));
        }
        if !self.kappa.is_finite() || self.kappa <= 1.0 {
            return Err(Error::invalid(format!(
                "kappa must exceed 1 for the schedule to progress, got {}",
                self.kappa
            )));
        }
        if !self.convergence_tol.is_finite() || self.convergence_tol <= 0.0 {
            return Err(Error::invalid(format!(
                "convergence tolerance must be positive, got {}",
                self.convergence_tol
            )));
        }
        Ok(())
    }
}

/// One solver iteration as recorded in the state trace.
#[derive(Debug, Clone)]
pub struct GncIteration {
    pub mu: f64,
    pub rotation: f64,
    pub cost: f64,
    pub weights: Vec<f64>,
}

/// Full solver state after (or during) a run.
#[derive(Debug, Clone)]
pub struct GncState {
    pub mu: f64,
    pub weights: Vec<f64>,
    /// Current rotation estimate, radians.
    pub rotation: f64,
    /// Iterations performed after initialization.
    pub iterations: usize,
    /// Weighted cost after initialization and after each iteration.
    pub cost_history: Vec<f64>,
    /// Per-iteration snapshots, starting with the initialization.
    pub trace: Vec<GncIteration>,
    pub converged: bool,
}

/// Builds difference-vector pairs from consecutive correspondences.
///
/// Needs at least two correspondences. The closed chain wraps the last
/// correspondence back to the first so every correspondence appears in
/// exactly two pairs.
pub fn build_tims(inliers: &CorrespondenceSet, chain: TimChain) -> Result<Vec<TimPair>> {
    let pairs = inliers.pairs();
    let m = pairs.len();
    if m < 2 {
        return Err(Error::Degenerate(
            "difference vectors need at least two correspondences",
        ));
    }
    let count = match chain {
        TimChain::Closed => m,
        TimChain::Open => m - 1,
    };
    let mut tims = Vec::with_capacity(count);
    for i in 0..count {
        let j = (i + 1) % m;
        tims.push(TimPair {
            src_diff: pairs[j].src.position() - pairs[i].src.position(),
            dst_diff: pairs[j].dst.position() - pairs[i].dst.position(),
            prior_ranges: (pairs[i].dst.range(), pairs[j].dst.range()),
        });
    }
    Ok(tims)
}

/// Squared residual of one pair under a rotation angle.
pub fn residual_sq(tim: &TimPair, rotation: f64) -> f64 {
    (tim.dst_diff - Rotation2::new(rotation) * tim.src_diff).norm_squared()
}

/// Closed-form weighted least-squares rotation.
///
/// Minimizing `sum w ||dst - R(theta) src||^2` reduces to maximizing
/// `cos(theta) * sum w <src, dst> + sin(theta) * sum w cross(src, dst)`,
/// whose optimum is the atan2 of the two sums. Degenerate when both sums
/// vanish (all weights zero or perfectly canceling geometry).
pub fn solve_weighted_rotation(tims: &[TimPair], weights: &[f64]) -> Result<f64> {
    assert_eq!(tims.len(), weights.len());
    let mut dot_sum = 0.0;
    let mut cross_sum = 0.0;
    for (tim, &w) in tims.iter().zip(weights) {
        dot_sum += w * tim.src_diff.dot(&tim.dst_diff);
        cross_sum += w * (tim.src_diff.x * tim.dst_diff.y - tim.src_diff.y * tim.dst_diff.x);
    }
    if dot_sum.abs() < 1e-12 && cross_sum.abs() < 1e-12 {
        return Err(Error::Degenerate(
            "weighted difference vectors do not constrain the rotation",
        ));
    }
    Ok(cross_sum.atan2(dot_sum))
}

/// Truncated-loss weight for a squared residual at the current `mu`.
///
/// Zero beyond `(mu+1)/mu * cbar^2`, one below `mu/(mu+1) * cbar^2`, and
/// `cbar * sqrt(mu*(mu+1)/r) - mu` in between; the three branches meet
/// continuously at the two thresholds.
fn weight_for_residual(residual_sq: f64, mu: f64, cbar: f64) -> f64 {
    let cbar_sq = cbar * cbar;
    let upper = (mu + 1.0) / mu * cbar_sq;
    let lower = mu / (mu + 1.0) * cbar_sq;
    if residual_sq >= upper {
        0.0
    } else if residual_sq < lower {
        1.0
    } else {
        (cbar * (mu * (mu + 1.0) / residual_sq).sqrt() - mu).clamp(0.0, 1.0)
    }
}

/// Recomputes all weights for a rotation estimate.
pub fn update_weights(tims: &[TimPair], rotation: f64, mu: f64, cbar: f64) -> Vec<f64> {
    let rot = Rotation2::new(rotation);
    tims.iter()
        .map(|tim| {
            let r = (tim.dst_diff - rot * tim.src_diff).norm_squared();
            weight_for_residual(r, mu, cbar)
        })
        .collect()
}

/// Penalty term paired with the weight update: the surrogate cost adds
/// `penalty(w)` for every pair so that down-weighting is not free.
pub fn penalty(weight: f64, mu: f64, cbar: f64) -> f64 {
    mu * (1.0 - weight) / (mu + weight) * cbar * cbar
}

fn weighted_cost(tims: &[TimPair], rotation: f64, weights: &[f64]) -> f64 {
    let rot = Rotation2::new(rotation);
    tims.iter()
        .zip(weights)
        .map(|(tim, &w)| w * (tim.dst_diff - rot * tim.src_diff).norm_squared())
        .sum()
}

/// Initializes the solver state.
///
/// Initial weights are inverse range magnitudes `1 / sqrt(g1^2 + g2^2)`
/// normalized so the most trusted pair gets weight one; the first rotation
/// is solved under them. `mu` starts at `cbar^2 / (2 r_max - cbar^2)`, which
/// makes the surrogate loss nearly convex when the worst residual `r_max`
/// is large, and is floored at 1e-6 when that denominator is not positive.
pub fn initialize(tims: &[TimPair], cfg: &GncConfig) -> Result<GncState> {
    cfg.validate()?;
    if tims.is_empty() {
        return Err(Error::Degenerate("no difference vectors to initialize from"));
    }
    let raw: Vec<f64> = tims
        .iter()
        .map(|t| {
            let (g1, g2) = t.prior_ranges;
            1.0 / g1.hypot(g2).max(1e-12)
        })
        .collect();
    let max_raw = raw.iter().cloned().fold(f64::MIN, f64::max);
    let prior: Vec<f64> = raw.iter().map(|&w| w / max_raw).collect();

    let rotation = solve_weighted_rotation(tims, &prior)?;
    let max_residual = tims
        .iter()
        .map(|t| residual_sq(t, rotation))
        .fold(0.0f64, f64::max);
    let cbar_sq = cfg.cbar * cfg.cbar;
    let denominator = 2.0 * max_residual - cbar_sq;
    let mu = if denominator <= 0.0 { 1e-6 } else { cbar_sq / denominator };
    let weights = update_weights(tims, rotation, mu, cfg.cbar);
    let cost = weighted_cost(tims, rotation, &weights);
    Ok(GncState {
        mu,
        weights: weights.clone(),
        rotation,
        iterations: 0,
        cost_history: vec![cost],
        trace: vec![GncIteration { mu, rotation, cost, weights }],
        converged: false,
    })
}

/// Runs the full schedule on prebuilt difference vectors.
pub fn estimate_rotation_from_tims(tims: &[TimPair], cfg: &GncConfig) -> Result<GncState> {
    let mut state = initialize(tims, cfg)?;
    let mut prev_cost = state.cost_history[0];
    for _ in 0..cfg.max_iterations {
        let rotation = solve_weighted_rotation(tims, &state.weights)?;
        state.mu *= cfg.kappa;
        let weights = update_weights(tims, rotation, state.mu, cfg.cbar);
        let cost = weighted_cost(tims, rotation, &weights);
        state.rotation = rotation;
        state.weights = weights.clone();
        state.iterations += 1;
        state.cost_history.push(cost);
        state.trace.push(GncIteration { mu: state.mu, rotation, cost, weights });
        if (cost - prev_cost).abs() < cfg.convergence_tol {
            state.converged = true;
            break;
        }
        prev_cost = cost;
    }
    Ok(state)
}

/// Builds difference vectors from pruned correspondences and estimates the
/// rotation between the scans.
pub fn estimate_rotation(inliers: &CorrespondenceSet, cfg: &GncConfig) -> Result<GncState> {
    let tims = build_tims(inliers, cfg.tim_chain)?;
    estimate_rotation_from_tims(&tims, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Correspondence, Pose2, RadarPoint};
    use crate::uncertainty::NoiseParams;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::FRAC_PI_2;

    fn pt(x: f64, y: f64) -> RadarPoint {
        RadarPoint::from_cartesian(x, y).unwrap()
    }

    fn set_under_motion(srcs: &[(f64, f64)], motion: &Pose2) -> CorrespondenceSet {
        let pairs = srcs
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| {
                let d = motion.transform_point(nalgebra::Vector2::new(x, y));
                Correspondence {
                    src_index: i,
                    dst_index: i,
                    src: pt(x, y),
                    dst: pt(d.x, d.y),
                }
            })
            .collect();
        CorrespondenceSet::new(pairs, NoiseParams::default()).unwrap()
    }

    fn tim(src: (f64, f64), dst: (f64, f64)) -> TimPair {
        TimPair {
            src_diff: Vector2::new(src.0, src.1),
            dst_diff: Vector2::new(dst.0, dst.1),
            prior_ranges: (10.0, 10.0),
        }
    }

    #[test]
    fn build_tims_counts_follow_the_chain_mode() {
        let motion = Pose2::new(0.1, Vector2::new(1.0, 2.0));
        let set = set_under_motion(&[(1.0, 0.0), (0.0, 2.0), (-3.0, 1.0), (2.0, 2.0)], &motion);
        assert_eq!(build_tims(&set, TimChain::Closed).unwrap().len(), 4);
        assert_eq!(build_tims(&set, TimChain::Open).unwrap().len(), 3);
    }

    #[test]
    fn build_tims_cancels_pure_translation() {
        let motion = Pose2::new(0.0, Vector2::new(5.0, -3.0));
        let set = set_under_motion(&[(1.0, 0.0), (0.0, 2.0), (-3.0, 1.0)], &motion);
        for tim in build_tims(&set, TimChain::Closed).unwrap() {
            assert_relative_eq!(tim.src_diff, tim.dst_diff, epsilon = 1e-12);
        }
    }

    #[test]
    fn build_tims_differences_rotate_with_the_motion() {
        let angle = 0.7;
        let motion = Pose2::new(angle, Vector2::new(-2.0, 4.0));
        let set = set_under_motion(&[(1.0, 0.0), (0.0, 2.0), (-3.0, 1.0), (4.0, -2.0)], &motion);
        let rot = nalgebra::Rotation2::new(angle);
        for tim in build_tims(&set, TimChain::Closed).unwrap() {
            assert_relative_eq!(tim.dst_diff, rot * tim.src_diff, epsilon = 1e-12);
        }
    }

    #[test]
    fn build_tims_records_destination_ranges() {
        // Destinations are (4, 0) and (1, 4), so the recorded ranges must be
        // 4 and sqrt(17) rather than the source ranges 3 and 4.
        let motion = Pose2::new(0.0, Vector2::new(1.0, 0.0));
        let set = set_under_motion(&[(3.0, 0.0), (0.0, 4.0)], &motion);
        let tims = build_tims(&set, TimChain::Open).unwrap();
        assert_relative_eq!(tims[0].prior_ranges.0, 4.0, epsilon = 1e-12);
        assert_relative_eq!(tims[0].prior_ranges.1, 17f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn build_tims_needs_two_correspondences() {
        let motion = Pose2::identity();
        let set = set_under_motion(&[(1.0, 1.0)], &motion);
        assert!(matches!(
            build_tims(&set, TimChain::Closed),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn solve_recovers_quarter_turn() {
        let tims = vec![tim((1.0, 0.0), (0.0, 1.0)), tim((0.0, 1.0), (-1.0, 0.0))];
        let angle = solve_weighted_rotation(&tims, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(angle, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn solve_ignores_zero_weight_pairs() {
        let tims = vec![tim((1.0, 0.0), (0.0, 1.0)), tim((1.0, 0.0), (17.0, -40.0))];
        let angle = solve_weighted_rotation(&tims, &[1.0, 0.0]).unwrap();
        assert_relative_eq!(angle, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn solve_with_all_zero_weights_is_degenerate() {
        let tims = vec![tim((1.0, 0.0), (0.0, 1.0))];
        assert!(matches!(
            solve_weighted_rotation(&tims, &[0.0]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn solve_matches_grid_search_on_noisy_problem() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let truth = 37f64.to_radians();
        let rot = nalgebra::Rotation2::new(truth);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let tims: Vec<TimPair> = (0..40)
            .map(|_| {
                let src = Vector2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
                let dst = rot * src + Vector2::new(noise.sample(&mut rng), noise.sample(&mut rng));
                TimPair { src_diff: src, dst_diff: dst, prior_ranges: (10.0, 10.0) }
            })
            .collect();
        let weights: Vec<f64> = (0..40).map(|_| rng.random_range(0.1..1.0)).collect();
        let angle = solve_weighted_rotation(&tims, &weights).unwrap();
        let grid = crate::synth::oracle_rotation(&tims, &weights);
        assert!((angle - grid).abs() < 1e-4, "closed form {angle} vs grid {grid}");
        assert!((angle - truth).abs() < 0.01);
    }

    #[test]
    fn solve_is_invariant_to_weight_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let rot = nalgebra::Rotation2::new(-1.1);
        let tims: Vec<TimPair> = (0..20)
            .map(|_| {
                let src = Vector2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
                TimPair { src_diff: src, dst_diff: rot * src, prior_ranges: (5.0, 5.0) }
            })
            .collect();
        let weights: Vec<f64> = (0..20).map(|_| rng.random_range(0.01..1.0)).collect();
        let scaled: Vec<f64> = weights.iter().map(|w| 3.7 * w).collect();
        let a = solve_weighted_rotation(&tims, &weights).unwrap();
        let b = solve_weighted_rotation(&tims, &scaled).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn weight_midband_value_is_exact() {
        // At mu = 1, cbar = 1, r = 1 the middle branch gives sqrt(2) - 1.
        let w = weight_for_residual(1.0, 1.0, 1.0);
        assert_relative_eq!(w, 2f64.sqrt() - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn weight_branches_meet_continuously() {
        for &(mu, cbar) in &[(0.5, 0.75), (1.0, 1.0), (3.0, 0.3), (10.0, 2.0)] {
            let cbar_sq: f64 = cbar * cbar;
            let upper = (mu + 1.0) / mu * cbar_sq;
            let lower = mu / (mu + 1.0) * cbar_sq;
            let eps = 1e-12;
            let at_upper = weight_for_residual(upper - eps * upper, mu, cbar);
            assert!(at_upper < 1e-9, "jump at the outlier threshold: {at_upper}");
            let at_lower = weight_for_residual(lower + eps * lower, mu, cbar);
            assert!((at_lower - 1.0).abs() < 1e-9, "jump at the inlier threshold: {at_lower}");
        }
    }

    #[test]
    fn weight_is_monotone_in_the_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..200 {
            let mu = rng.random_range(0.01..20.0);
            let cbar = rng.random_range(0.1..3.0);
            let r1 = rng.random_range(0.0..10.0);
            let r2 = r1 + rng.random_range(0.0..5.0);
            let w1 = weight_for_residual(r1, mu, cbar);
            let w2 = weight_for_residual(r2, mu, cbar);
            assert!(w2 <= w1 + 1e-15);
            assert!((0.0..=1.0).contains(&w1));
        }
    }

    #[test]
    fn update_weights_flags_the_gross_outlier() {
        let rot_angle = 0.4;
        let rot = nalgebra::Rotation2::new(rot_angle);
        let good_src = Vector2::new(2.0, 1.0);
        let tims = vec![
            TimPair { src_diff: good_src, dst_diff: rot * good_src, prior_ranges: (5.0, 5.0) },
            tim((1.0, 0.0), (30.0, -2.0)),
        ];
        let w = update_weights(&tims, rot_angle, 5.0, 0.5);
        assert_relative_eq!(w[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(w[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn initialize_trusts_short_ranges_most() {
        let rot = nalgebra::Rotation2::new(0.2);
        let mk = |ranges: (f64, f64)| {
            let src = Vector2::new(1.0, 1.0);
            TimPair { src_diff: src, dst_diff: rot * src, prior_ranges: ranges }
        };
        let tims = vec![mk((5.0, 5.0)), mk((10.0, 10.0)), mk((20.0, 20.0))];
        let state = initialize(&tims, &GncConfig::default()).unwrap();
        // Priors feed the first solve; the stored weights are already the
        // first truncated-loss update, which for a clean problem are all one.
        assert!(state.weights.iter().all(|&w| (w - 1.0).abs() < 1e-12));
        assert_relative_eq!(state.rotation, 0.2, epsilon = 1e-9);
    }

    #[test]
    fn initialize_floors_mu_on_clean_problems() {
        // Zero residuals make the schedule denominator negative.
        let rot = nalgebra::Rotation2::new(-0.3);
        let tims: Vec<TimPair> = [(1.0, 0.0), (0.0, 1.0), (2.0, -1.0)]
            .iter()
            .map(|&(x, y)| {
                let src = Vector2::new(x, y);
                TimPair { src_diff: src, dst_diff: rot * src, prior_ranges: (8.0, 8.0) }
            })
            .collect();
        let state = initialize(&tims, &GncConfig::default()).unwrap();
        assert_relative_eq!(state.mu, 1e-6);
        assert!(state.weights.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn initialize_sets_mu_from_worst_residual() {
        let tims = vec![
            tim((1.0, 0.0), (1.0, 0.0)),
            tim((1.0, 0.0), (3.0, 0.0)), // residual 4 under identity rotation
        ];
        let cfg = GncConfig { cbar: 1.0, ..GncConfig::default() };
        let state = initialize(&tims, &cfg).unwrap();
        // Prior weights are equal, the solve lands near identity, and the
        // worst squared residual is about 4, so mu ~ 1/(2*4 - 1).
        assert!((state.mu - 1.0 / 7.0).abs() < 0.05, "mu = {}", state.mu);
    }

    #[test]
    fn estimate_recovers_exact_rotation() {
        let motion = Pose2::new(25f64.to_radians(), Vector2::new(3.0, -1.0));
        let set = set_under_motion(
            &[(5.0, 0.0), (0.0, 7.0), (-4.0, -3.0), (6.0, 2.0), (-1.0, 5.0)],
            &motion,
        );
        let state = estimate_rotation(&set, &GncConfig::default()).unwrap();
        assert!(state.converged);
        assert_relative_eq!(state.rotation, 25f64.to_radians(), epsilon = 1e-9);
    }

    #[test]
    fn estimate_on_pure_translation_returns_zero_rotation() {
        let motion = Pose2::new(0.0, Vector2::new(2.0, 2.0));
        let set = set_under_motion(&[(1.0, 0.0), (0.0, 2.0), (-3.0, 1.0)], &motion);
        let state = estimate_rotation(&set, &GncConfig::default()).unwrap();
        assert_relative_eq!(state.rotation, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn estimate_survives_seventy_percent_outlier_tims() {
        let mut successes = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
            let truth = rng.random_range(-0.5..0.5);
            let rot = nalgebra::Rotation2::new(truth);
            let noise = Normal::new(0.0, 0.01).unwrap();
            let tims: Vec<TimPair> = (0..100)
                .map(|i| {
                    let src = Vector2::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0));
                    let dst = if i < 70 {
                        Vector2::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0))
                    } else {
                        rot * src + Vector2::new(noise.sample(&mut rng), noise.sample(&mut rng))
                    };
                    TimPair { src_diff: src, dst_diff: dst, prior_ranges: (10.0, 10.0) }
                })
                .collect();
            let cfg = GncConfig { cbar: 0.1, ..GncConfig::default() };
            if let Ok(state) = estimate_rotation_from_tims(&tims, &cfg) {
                if (state.rotation - truth).abs() < 0.5f64.to_radians() {
                    successes += 1;
                }
            }
        }
        assert!(successes >= 95, "only {successes}/100 runs recovered the rotation");
    }

    #[test]
    fn mu_trace_follows_the_geometric_schedule_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let rot = nalgebra::Rotation2::new(0.6);
        let tims: Vec<TimPair> = (0..30)
            .map(|i| {
                let src = Vector2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
                let dst = if i % 3 == 0 {
                    Vector2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0))
                } else {
                    rot * src
                };
                TimPair { src_diff: src, dst_diff: dst, prior_ranges: (10.0, 10.0) }
            })
            .collect();
        let cfg = GncConfig { cbar: 0.2, ..GncConfig::default() };
        let state = estimate_rotation_from_tims(&tims, &cfg).unwrap();
        assert!(state.trace.len() >= 2);
        let mut expected = state.trace[0].mu;
        for step in &state.trace[1..] {
            expected *= cfg.kappa;
            assert_eq!(step.mu.to_bits(), expected.to_bits());
        }
    }

    #[test]
    fn cost_history_matches_trace_and_never_explodes() {
        let motion = Pose2::new(0.3, Vector2::new(1.0, 1.0));
        let set = set_under_motion(&[(5.0, 0.0), (0.0, 7.0), (-4.0, -3.0), (6.0, 2.0)], &motion);
        let state = estimate_rotation(&set, &GncConfig::default()).unwrap();
        assert_eq!(state.cost_history.len(), state.trace.len());
        for (h, t) in state.cost_history.iter().zip(&state.trace) {
            assert_eq!(h.to_bits(), t.cost.to_bits());
        }
        assert_eq!(state.iterations + 1, state.trace.len());
    }
}
