//! Relative trajectory error: translation drift in percent and rotation
//! drift in degrees per 100 m, averaged over fixed-length path segments.

use crate::types::Pose2;
use crate::{Error, Result};

/// Segment lengths (meters) used when none are configured.
pub const DEFAULT_SEGMENT_LENGTHS: [f64; 8] =
    [100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0];

/// Evaluation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsConfig {
    /// Path lengths over which relative errors are measured.
    pub segment_lengths: Vec<f64>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { segment_lengths: DEFAULT_SEGMENT_LENGTHS.to_vec() }
    }
}

/// Error of one evaluated segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentError {
    /// Index of the first pose of the segment.
    pub start: usize,
    /// Index of the first pose at least the requested length away.
    pub end: usize,
    /// Ground-truth path length actually covered, meters.
    pub length: f64,
    /// Norm of the relative translation discrepancy, meters.
    pub translation_error: f64,
    /// Magnitude of the relative rotation discrepancy, radians.
    pub rotation_error: f64,
}

/// Aggregated relative drift of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryError {
    /// Mean translation drift, percent of distance traveled.
    pub t_rel: f64,
    /// Mean rotation drift, degrees per 100 m.
    pub r_rel: f64,
    pub segments: Vec<SegmentError>,
}

/// Compares an estimated trajectory against ground truth.
///
/// For every start pose and every configured segment length, the first pose
/// at least that far along the ground-truth path closes a segment; the
/// relative motions of estimate and truth over the segment are compared, and
/// their discrepancy is normalized by the covered path length. Segments that
/// run past the end of the trajectory are skipped; if not a single segment
/// fits, the usable path length is reported in the error.
pub fn evaluate(
    estimated: &[Pose2],
    truth: &[Pose2],
    segment_lengths: &[f64],
) -> Result<TrajectoryError> {
    if estimated.len() != truth.len() {
        return Err(Error::invalid(format!(
            "trajectory lengths differ: {} estimated vs {} truth",
            estimated.len(),
            truth.len()
        )));
    }
    if truth.len() < 2 {
        return Err(Error::invalid(format!("need at least 2 poses, got {}", truth.len())));
    }
    if segment_lengths.is_empty() {
        return Err(Error::invalid("no segment lengths given".to_string()));
    }
    for &l in segment_lengths {
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::invalid(format!("segment length must be positive, got {l}")));
        }
    }

    let mut cumulative = Vec::with_capacity(truth.len());
    cumulative.push(0.0);
    for pair in truth.windows(2) {
        let step = (pair[1].translation() - pair[0].translation()).norm();
        cumulative.push(cumulative.last().unwrap() + step);
    }
    let total = *cumulative.last().unwrap();
    let smallest = segment_lengths.iter().cloned().fold(f64::INFINITY, f64::min);
    if total < smallest {
        return Err(Error::invalid(format!(
            "trajectory covers {total:.3} m, shorter than the smallest segment length \
             {smallest:.3} m"
        )));
    }

    let mut segments = Vec::new();
    let mut t_sum = 0.0;
    let mut r_sum = 0.0;
    for start in 0..truth.len() {
        for &length in segment_lengths {
            let target = cumulative[start] + length;
            let end = cumulative.partition_point(|&c| c < target);
            if end >= truth.len() {
                continue;
            }
            let covered = cumulative[end] - cumulative[start];
            let rel_truth = truth[start].inverse().compose(&truth[end]);
            let rel_est = estimated[start].inverse().compose(&estimated[end]);
            let discrepancy = rel_truth.inverse().compose(&rel_est);
            let translation_error = discrepancy.translation().norm();
            let rotation_error = discrepancy.angle().abs();
            t_sum += translation_error / covered;
            r_sum += rotation_error.to_degrees() / covered;
            segments.push(SegmentError {
                start,
                end,
                length: covered,
                translation_error,
                rotation_error,
            });
        }
    }
    let count = segments.len() as f64;
    Ok(TrajectoryError {
        t_rel: 100.0 * t_sum / count,
        r_rel: 100.0 * r_sum / count,
        segments,
    })
}
