//! Core geometric types: radar points, rigid 2-D poses, correspondences.

use nalgebra::{Matrix2, Rotation2, Vector2};

use crate::uncertainty::{point_covariance, NoiseParams, PointCovariance};
use crate::{Error, Result};

/// Wraps an angle to the half-open interval (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut wrapped = angle.rem_euclid(tau);
    if wrapped > std::f64::consts::PI {
        wrapped -= tau;
    }
    wrapped
}

/// Shortest signed difference `a - b`, wrapped to (-pi, pi].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// Discretization of a polar radar scan: `n_range` range bins of width
/// `range_resolution` meters and `n_azimuth` evenly spaced azimuth bins
/// covering a full revolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGeometry {
    pub n_range: usize,
    pub n_azimuth: usize,
    pub range_resolution: f64,
}

impl ScanGeometry {
    pub fn new(n_range: usize, n_azimuth: usize, range_resolution: f64) -> Result<Self> {
        if n_range == 0 || n_azimuth == 0 {
            return Err(Error::invalid("scan geometry needs at least one bin per axis"));
        }
        if !range_resolution.is_finite() || range_resolution <= 0.0 {
            return Err(Error::invalid(format!(
                "range resolution must be positive and finite, got {range_resolution}"
            )));
        }
        Ok(ScanGeometry {
            n_range,
            n_azimuth,
            range_resolution,
        })
    }
}

/// A single radar return, stored in both Cartesian and polar form.
///
/// The representations are kept consistent: `range` is the Euclidean norm of
/// `(x, y)` and `azimuth` lies in (-pi, pi]. A point at the origin carries
/// azimuth 0 by convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarPoint {
    x: f64,
    y: f64,
    range: f64,
    azimuth: f64,
}

impl RadarPoint {
    /// Builds a point from Cartesian coordinates, deriving range and azimuth.
    pub fn from_cartesian(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::invalid(format!("non-finite coordinates ({x}, {y})")));
        }
        let range = x.hypot(y);
        let azimuth = if range == 0.0 { 0.0 } else { wrap_angle(y.atan2(x)) };
        Ok(RadarPoint { x, y, range, azimuth })
    }

    /// Builds a point from a range (meters) and azimuth (radians).
    pub fn from_polar(range: f64, azimuth: f64) -> Result<Self> {
        if !range.is_finite() || !azimuth.is_finite() {
            return Err(Error::invalid(format!(
                "non-finite polar coordinates ({range}, {azimuth})"
            )));
        }
        if range < 0.0 {
            return Err(Error::invalid(format!("negative range {range}")));
        }
        let azimuth = if range == 0.0 { 0.0 } else { wrap_angle(azimuth) };
        Ok(RadarPoint::from_polar_wrapped(range, azimuth))
    }

    /// Like [`RadarPoint::from_polar`] but trusts the caller that `azimuth`
    /// already lies in (-pi, pi] and `range >= 0`, so the azimuth is carried
    /// over bit-for-bit. Used where an existing point's azimuth must survive
    /// a range adjustment exactly.
    pub(crate) fn from_polar_wrapped(range: f64, azimuth: f64) -> Self {
        debug_assert!(range >= 0.0);
        debug_assert!(azimuth > -std::f64::consts::PI - 1e-15);
        debug_assert!(azimuth <= std::f64::consts::PI + 1e-15);
        RadarPoint {
            x: range * azimuth.cos(),
            y: range * azimuth.sin(),
            range,
            azimuth,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Range in meters; always the Euclidean norm of the Cartesian position.
    pub fn range(&self) -> f64 {
        self.range
    }

    /// Azimuth in radians, in (-pi, pi].
    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }
}

/// Converts integer scan-bin indices to a Cartesian point.
///
/// Bin `(h, w)` maps to range `h * range_resolution` and azimuth
/// `2*pi*w / n_azimuth`, wrapped to (-pi, pi]. Indices at or beyond the bin
/// counts are rejected.
pub fn polar_to_cartesian(h: usize, w: usize, geometry: &ScanGeometry) -> Result<RadarPoint> {
    if h >= geometry.n_range {
        return Err(Error::invalid(format!(
            "range bin {h} out of bounds (scan has {} bins)",
            geometry.n_range
        )));
    }
    if w >= geometry.n_azimuth {
        return Err(Error::invalid(format!(
            "azimuth bin {w} out of bounds (scan has {} bins)",
            geometry.n_azimuth
        )));
    }
    let range = h as f64 * geometry.range_resolution;
    let azimuth = std::f64::consts::TAU * w as f64 / geometry.n_azimuth as f64;
    RadarPoint::from_polar(range, azimuth)
}

/// A rigid 2-D transform. `transform_point` computes `R * p + t`.
///
/// Used throughout as the motion that maps points of the current scan into
/// the previous scan's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    rotation: Rotation2<f64>,
    translation: Vector2<f64>,
}

impl Pose2 {
    pub fn identity() -> Self {
        Pose2 {
            rotation: Rotation2::identity(),
            translation: Vector2::zeros(),
        }
    }

    /// Builds a pose from a yaw angle (radians) and a translation.
    pub fn new(angle: f64, translation: Vector2<f64>) -> Self {
        Pose2 {
            rotation: Rotation2::new(angle),
            translation,
        }
    }

    pub fn from_parts(rotation: Rotation2<f64>, translation: Vector2<f64>) -> Self {
        Pose2 { rotation, translation }
    }

    pub fn rotation(&self) -> &Rotation2<f64> {
        &self.rotation
    }

    pub fn rotation_matrix(&self) -> Matrix2<f64> {
        *self.rotation.matrix()
    }

    /// Yaw angle in (-pi, pi].
    pub fn angle(&self) -> f64 {
        wrap_angle(self.rotation.angle())
    }

    pub fn translation(&self) -> Vector2<f64> {
        self.translation
    }

    pub fn transform_point(&self, p: Vector2<f64>) -> Vector2<f64> {
        self.rotation * p + self.translation
    }

    /// Composition `self * other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        Pose2 {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose2 {
        let inv_rot = self.rotation.inverse();
        Pose2 {
            rotation: inv_rot,
            translation: -(inv_rot * self.translation),
        }
    }
}

/// One matched pair of returns: `src` from the current scan, `dst` from the
/// previous scan. Indices refer back to the points' positions in their
/// original scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub src_index: usize,
    pub dst_index: usize,
    pub src: RadarPoint,
    pub dst: RadarPoint,
}

/// A set of correspondences for one frame together with the per-point
/// covariances implied by a noise model.
///
/// Each scan index appears at most once, so the set represents a one-to-one
/// matching. Covariances are recomputed whenever the points or the noise
/// model change.
#[derive(Debug, Clone)]
pub struct CorrespondenceSet {
    pairs: Vec<Correspondence>,
    covariances_src: Vec<PointCovariance>,
    covariances_dst: Vec<PointCovariance>,
    noise: NoiseParams,
}

impl CorrespondenceSet {
    pub fn new(pairs: Vec<Correspondence>, noise: NoiseParams) -> Result<Self> {
        let mut src_seen = std::collections::HashSet::new();
        let mut dst_seen = std::collections::HashSet::new();
        for c in &pairs {
            if !src_seen.insert(c.src_index) {
                return Err(Error::invalid(format!(
                    "source index {} appears in more than one correspondence",
                    c.src_index
                )));
            }
            if !dst_seen.insert(c.dst_index) {
                return Err(Error::invalid(format!(
                    "destination index {} appears in more than one correspondence",
                    c.dst_index
                )));
            }
        }
        let covariances_src = pairs.iter().map(|c| point_covariance(&c.src, &noise)).collect();
        let covariances_dst = pairs.iter().map(|c| point_covariance(&c.dst, &noise)).collect();
        Ok(CorrespondenceSet {
            pairs,
            covariances_src,
            covariances_dst,
            noise,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[Correspondence] {
        &self.pairs
    }

    pub fn noise(&self) -> &NoiseParams {
        &self.noise
    }

    /// Covariance of the source point of correspondence `m`.
    pub fn covariance_src(&self, m: usize) -> &PointCovariance {
        &self.covariances_src[m]
    }

    /// Covariance of the destination point of correspondence `m`.
    pub fn covariance_dst(&self, m: usize) -> &PointCovariance {
        &self.covariances_dst[m]
    }

    /// The same correspondences under a different noise model, with
    /// covariances recomputed.
    pub fn with_noise(&self, noise: NoiseParams) -> Self {
        CorrespondenceSet::new(self.pairs.clone(), noise)
            .expect("indices were unique in the source set")
    }

    /// The subset selected by `indices` (positions into this set, in the
    /// given order). Covariances are carried over.
    pub fn subset(&self, indices: &[usize]) -> Self {
        CorrespondenceSet {
            pairs: indices.iter().map(|&m| self.pairs[m]).collect(),
            covariances_src: indices.iter().map(|&m| self.covariances_src[m]).collect(),
            covariances_dst: indices.iter().map(|&m| self.covariances_dst[m]).collect(),
            noise: self.noise,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn geometry(n_range: usize, n_azimuth: usize, res: f64) -> ScanGeometry {
        ScanGeometry::new(n_range, n_azimuth, res).unwrap()
    }

    #[test]
    fn wrap_angle_covers_boundaries() {
        assert_relative_eq!(wrap_angle(0.0), 0.0);
        assert_relative_eq!(wrap_angle(PI), PI);
        assert_relative_eq!(wrap_angle(-PI), PI);
        assert_relative_eq!(wrap_angle(TAU), 0.0);
        assert_relative_eq!(wrap_angle(1.5 * PI), -0.5 * PI, epsilon = 1e-12);
        assert_relative_eq!(wrap_angle(-2.5 * PI), -0.5 * PI, epsilon = 1e-12);
    }

    #[test]
    fn angle_diff_takes_shortest_arc() {
        assert_relative_eq!(angle_diff(0.1, -0.1), 0.2, epsilon = 1e-12);
        assert_relative_eq!(angle_diff(PI - 0.1, -PI + 0.1), -0.2, epsilon = 1e-12);
    }

    #[test]
    fn polar_to_cartesian_quarter_turn() {
        let g = geometry(200, 400, 0.05);
        let p = polar_to_cartesian(100, 100, &g).unwrap();
        assert_relative_eq!(p.range(), 5.0, epsilon = 1e-12);
        assert_relative_eq!(p.azimuth(), FRAC_PI_2, epsilon = 1e-12);
        assert_relative_eq!(p.x(), 0.0, epsilon = 1e-9);
        assert_relative_eq!(p.y(), 5.0, epsilon = 1e-9);
    }

    #[test]
    fn polar_to_cartesian_wraps_past_half_turn() {
        // Bin 399 of 400 sits just below a full turn, so the stored azimuth
        // must come out on the negative side: -2*pi/400.
        let g = geometry(4000, 400, 0.0596);
        let p = polar_to_cartesian(3371, 399, &g).unwrap();
        assert_relative_eq!(p.range(), 3371.0 * 0.0596, epsilon = 1e-12);
        assert_relative_eq!(p.azimuth(), -PI / 200.0, epsilon = 1e-12);
        assert_relative_eq!(p.x(), p.range() * (PI / 200.0).cos(), epsilon = 1e-9);
        assert_relative_eq!(p.y(), -p.range() * (PI / 200.0).sin(), epsilon = 1e-9);
    }

    #[test]
    fn polar_to_cartesian_zero_range_bin() {
        let g = geometry(10, 8, 0.5);
        let p = polar_to_cartesian(0, 5, &g).unwrap();
        assert_eq!(p.x(), 0.0);
        assert_eq!(p.y(), 0.0);
        assert_eq!(p.azimuth(), 0.0, "origin carries azimuth 0 by convention");
    }

    #[test]
    fn polar_to_cartesian_rejects_out_of_range_bins() {
        let g = geometry(200, 400, 0.05);
        assert!(polar_to_cartesian(200, 0, &g).is_err());
        assert!(polar_to_cartesian(0, 400, &g).is_err());
    }

    #[test]
    fn from_polar_rejects_bad_input() {
        assert!(RadarPoint::from_polar(-1.0, 0.0).is_err());
        assert!(RadarPoint::from_polar(f64::NAN, 0.0).is_err());
        assert!(RadarPoint::from_cartesian(f64::INFINITY, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn cartesian_polar_round_trip(x in -500.0f64..500.0, y in -500.0f64..500.0) {
            let p = RadarPoint::from_cartesian(x, y).unwrap();
            prop_assert!((p.range() - x.hypot(y)).abs() < 1e-12);
            let q = RadarPoint::from_polar(p.range(), p.azimuth()).unwrap();
            prop_assert!((q.x() - x).abs() < 1e-9);
            prop_assert!((q.y() - y).abs() < 1e-9);
        }

        #[test]
        fn wrap_angle_is_idempotent_and_in_range(a in -1000.0f64..1000.0) {
            let w = wrap_angle(a);
            prop_assert!(w > -PI && w <= PI);
            prop_assert!((wrap_angle(w) - w).abs() < 1e-12);
        }
    }

    #[test]
    fn pose_compose_matches_homogeneous_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = Pose2::new(
                rng.random_range(-PI..PI),
                Vector2::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)),
            );
            let b = Pose2::new(
                rng.random_range(-PI..PI),
                Vector2::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)),
            );
            let c = a.compose(&b);

            let to_h = |p: &Pose2| {
                let r = p.rotation_matrix();
                nalgebra::Matrix3::new(
                    r[(0, 0)],
                    r[(0, 1)],
                    p.translation().x,
                    r[(1, 0)],
                    r[(1, 1)],
                    p.translation().y,
                    0.0,
                    0.0,
                    1.0,
                )
            };
            let h = to_h(&a) * to_h(&b);
            let ch = to_h(&c);
            assert_relative_eq!(h, ch, epsilon = 1e-9);
        }
    }

    #[test]
    fn pose_composition_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..500 {
            let mut random_pose = || {
                Pose2::new(
                    rng.random_range(-PI..PI),
                    Vector2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)),
                )
            };
            let (a, b, c) = (random_pose(), random_pose(), random_pose());
            let left = a.compose(&b).compose(&c);
            let right = a.compose(&b.compose(&c));
            assert_relative_eq!(left.angle(), right.angle(), epsilon = 1e-9);
            assert_relative_eq!(left.translation(), right.translation(), epsilon = 1e-9);
        }
    }

    #[test]
    fn pose_inverse_composes_to_identity() {
        let p = Pose2::new(0.7, Vector2::new(3.0, -2.0));
        let id = p.compose(&p.inverse());
        assert_relative_eq!(id.angle(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(id.translation().norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pose_transform_point_rotates_then_translates() {
        let p = Pose2::new(FRAC_PI_2, Vector2::new(1.0, 0.0));
        let q = p.transform_point(Vector2::new(1.0, 0.0));
        assert_relative_eq!(q, Vector2::new(1.0, 1.0), epsilon = 1e-12);
    }

    #[test]
    fn correspondence_set_rejects_duplicate_indices() {
        let pt = |x: f64, y: f64| RadarPoint::from_cartesian(x, y).unwrap();
        let noise = NoiseParams::default();
        let pairs = vec![
            Correspondence { src_index: 0, dst_index: 0, src: pt(1.0, 0.0), dst: pt(1.0, 0.1) },
            Correspondence { src_index: 0, dst_index: 1, src: pt(2.0, 0.0), dst: pt(2.0, 0.1) },
        ];
        assert!(CorrespondenceSet::new(pairs, noise).is_err());
    }

    #[test]
    fn correspondence_set_subset_keeps_covariances_aligned() {
        let pt = |x: f64, y: f64| RadarPoint::from_cartesian(x, y).unwrap();
        let noise = NoiseParams::default();
        let pairs: Vec<_> = (0..5)
            .map(|i| Correspondence {
                src_index: i,
                dst_index: i,
                src: pt(i as f64 + 1.0, 0.5),
                dst: pt(i as f64 + 1.0, -0.5),
            })
            .collect();
        let set = CorrespondenceSet::new(pairs, noise).unwrap();
        let sub = set.subset(&[3, 1]);
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.pairs()[0].src_index, 3);
        assert_eq!(sub.covariance_src(0).matrix(), set.covariance_src(3).matrix());
        assert_eq!(sub.covariance_dst(1).matrix(), set.covariance_dst(1).matrix());
    }
}
