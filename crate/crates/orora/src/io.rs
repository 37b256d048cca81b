//! Plain-text readers and writers for correspondence sets and trajectories.
//! Grammar and byte-exact layout are documented in `docs/formats.md`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector2;

use crate::pipeline::{FrameResult, Stage};
use crate::types::{polar_to_cartesian, Correspondence, CorrespondenceSet, Pose2, RadarPoint};
use crate::uncertainty::NoiseParams;
use crate::{Error, Result};

pub use crate::types::ScanGeometry;

const CORR_MAGIC: &str = "orora-corr v1";
const TRAJ_MAGIC: &str = "orora-traj v1";

/// One parsed correspondence file: header plus the matched points.
#[derive(Debug, Clone)]
pub struct CorrespondenceFile {
    pub src_frame: u64,
    pub dst_frame: u64,
    pub geometry: Option<ScanGeometry>,
    pub correspondences: CorrespondenceSet,
}

/// Lines that carry content: `(line number, trimmed text)`, comments and
/// blanks removed.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            None
        } else {
            Some((idx + 1, content))
        }
    })
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::format(line, format!("expected {what}, got `{field}`")))
}

fn parse_coordinate(line: usize, field: &str) -> Result<f64> {
    let value: f64 = parse_field(line, field, "a number")?;
    if !value.is_finite() {
        return Err(Error::format(line, format!("coordinate must be finite, got `{field}`")));
    }
    Ok(value)
}

fn parse_correspondence_text(text: &str) -> Result<CorrespondenceFile> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, line)) if line == CORR_MAGIC => {}
        Some((n, line)) => {
            return Err(Error::format(n, format!("expected `{CORR_MAGIC}`, got `{line}`")))
        }
        None => return Err(Error::format(1, format!("missing `{CORR_MAGIC}` header"))),
    }

    let mut src_frame = 0;
    let mut dst_frame = 1;
    let mut geometry: Option<ScanGeometry> = None;
    let mut pairs: Vec<Correspondence> = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "frames" => {
                if !pairs.is_empty() {
                    return Err(Error::format(n, "header line after data rows".to_string()));
                }
                if fields.len() != 3 {
                    return Err(Error::format(n, "expected `frames <src> <dst>`".to_string()));
                }
                src_frame = parse_field(n, fields[1], "a frame id")?;
                dst_frame = parse_field(n, fields[2], "a frame id")?;
            }
            "geometry" => {
                if !pairs.is_empty() {
                    return Err(Error::format(n, "header line after data rows".to_string()));
                }
                if fields.len() != 4 {
                    return Err(Error::format(
                        n,
                        "expected `geometry <n_range> <n_azimuth> <resolution>`".to_string(),
                    ));
                }
                let n_range = parse_field(n, fields[1], "a bin count")?;
                let n_azimuth = parse_field(n, fields[2], "a bin count")?;
                let resolution = parse_coordinate(n, fields[3])?;
                geometry = Some(
                    ScanGeometry::new(n_range, n_azimuth, resolution)
                        .map_err(|e| Error::format(n, e.to_string()))?,
                );
            }
            "c" => {
                if fields.len() != 5 {
                    return Err(Error::format(
                        n,
                        "expected `c <x_src> <y_src> <x_dst> <y_dst>`".to_string(),
                    ));
                }
                let coords: Vec<f64> = fields[1..]
                    .iter()
                    .map(|f| parse_coordinate(n, f))
                    .collect::<Result<_>>()?;
                let src = RadarPoint::from_cartesian(coords[0], coords[1])
                    .map_err(|e| Error::format(n, e.to_string()))?;
                let dst = RadarPoint::from_cartesian(coords[2], coords[3])
                    .map_err(|e| Error::format(n, e.to_string()))?;
                let index = pairs.len();
                pairs.push(Correspondence { src_index: index, dst_index: index, src, dst });
            }
            "p" => {
                let geometry = geometry.as_ref().ok_or_else(|| {
                    Error::format(n, "polar row without a `geometry` header".to_string())
                })?;
                if fields.len() != 5 {
                    return Err(Error::format(
                        n,
                        "expected `p <h_src> <w_src> <h_dst> <w_dst>`".to_string(),
                    ));
                }
                let bins: Vec<usize> = fields[1..]
                    .iter()
                    .map(|f| parse_field(n, f, "a bin index"))
                    .collect::<Result<_>>()?;
                let src = polar_to_cartesian(bins[0], bins[1], geometry)
                    .map_err(|e| Error::format(n, e.to_string()))?;
                let dst = polar_to_cartesian(bins[2], bins[3], geometry)
                    .map_err(|e| Error::format(n, e.to_string()))?;
                let index = pairs.len();
                pairs.push(Correspondence { src_index: index, dst_index: index, src, dst });
            }
            other => {
                return Err(Error::format(n, format!("unknown row tag `{other}`")));
            }
        }
    }
    let correspondences = CorrespondenceSet::new(pairs, NoiseParams::default())?;
    Ok(CorrespondenceFile { src_frame, dst_frame, geometry, correspondences })
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::file(path, e))
}

fn write_string(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::file(path, e))
}

/// Reads a correspondence file including its header.
pub fn read_correspondence_file(path: impl AsRef<Path>) -> Result<CorrespondenceFile> {
    parse_correspondence_text(&read_to_string(path.as_ref())?)
}

/// Reads just the correspondences of a file, row order preserved.
pub fn read_correspondences(path: impl AsRef<Path>) -> Result<CorrespondenceSet> {
    Ok(read_correspondence_file(path)?.correspondences)
}

fn format_correspondence_text(file: &CorrespondenceFile) -> String {
    let mut text = String::new();
    writeln!(text, "{CORR_MAGIC}").unwrap();
    writeln!(text, "frames {} {}", file.src_frame, file.dst_frame).unwrap();
    if let Some(g) = &file.geometry {
        writeln!(text, "geometry {} {} {:.9}", g.n_range, g.n_azimuth, g.range_resolution)
            .unwrap();
    }
    for c in file.correspondences.pairs() {
        let s = c.src.position();
        let d = c.dst.position();
        writeln!(text, "c {:.9} {:.9} {:.9} {:.9}", s.x, s.y, d.x, d.y).unwrap();
    }
    text
}

/// Writes a correspondence file with Cartesian rows.
pub fn write_correspondence_file(path: impl AsRef<Path>, file: &CorrespondenceFile) -> Result<()> {
    write_string(path.as_ref(), &format_correspondence_text(file))
}

fn flags_token(result: &FrameResult) -> String {
    let mut parts: Vec<&str> = Vec::new();
    match result.degenerate_stage {
        Some(Stage::Doppler) => parts.push("d:doppler"),
        Some(Stage::InlierSelection) => parts.push("d:inlier"),
        Some(Stage::Rotation) => parts.push("d:rotation"),
        Some(Stage::Translation) => parts.push("d:translation"),
        None => {}
    }
    if result.gnc_iterations > 0 && !result.gnc_converged {
        parts.push("nc");
    }
    if !result.clique_exact {
        parts.push("ic");
    }
    if parts.is_empty() {
        "-".to_string()
    } else {
        parts.join(",")
    }
}

fn format_trajectory_text(trajectory: &[Pose2], results: &[FrameResult]) -> Result<String> {
    if trajectory.is_empty() {
        return Err(Error::invalid("trajectory must contain at least one pose".to_string()));
    }
    if !results.is_empty() && results.len() + 1 != trajectory.len() {
        return Err(Error::invalid(format!(
            "{} poses need {} frame results, got {}",
            trajectory.len(),
            trajectory.len() - 1,
            results.len()
        )));
    }
    let mut text = String::new();
    writeln!(text, "{TRAJ_MAGIC}").unwrap();
    for (k, pose) in trajectory.iter().enumerate() {
        let t = pose.translation();
        write!(text, "{k} {:.9} {:.9} {:.9}", t.x, t.y, pose.angle()).unwrap();
        match (k, results.is_empty()) {
            (0, _) | (_, true) => writeln!(text, " 0 0 0 0 0 0 0 -").unwrap(),
            _ => {
                let r = &results[k - 1];
                writeln!(
                    text,
                    " {} {} {} {} {} {} {} {}",
                    r.inlier_count,
                    r.outlier_count,
                    r.gnc_iterations,
                    r.timings.doppler_us,
                    r.timings.inlier_selection_us,
                    r.timings.rotation_us,
                    r.timings.translation_us,
                    flags_token(r),
                )
                .unwrap();
            }
        }
    }
    Ok(text)
}

/// Writes a trajectory with one line per pose.
///
/// Row `k > 0` carries the diagnostics of the frame that produced it; pass an
/// empty `results` slice (ground-truth files) to zero every diagnostic.
pub fn write_trajectory(
    path: impl AsRef<Path>,
    trajectory: &[Pose2],
    results: &[FrameResult],
) -> Result<()> {
    write_string(path.as_ref(), &format_trajectory_text(trajectory, results)?)
}

fn parse_trajectory_text(text: &str) -> Result<Vec<Pose2>> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, line)) if line == TRAJ_MAGIC => {}
        Some((n, line)) => {
            return Err(Error::format(n, format!("expected `{TRAJ_MAGIC}`, got `{line}`")))
        }
        None => return Err(Error::format(1, format!("missing `{TRAJ_MAGIC}` header"))),
    }
    let mut poses = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 12 {
            return Err(Error::format(
                n,
                format!("expected 12 fields per pose row, got {}", fields.len()),
            ));
        }
        let index: usize = parse_field(n, fields[0], "a frame index")?;
        if index != poses.len() {
            return Err(Error::format(
                n,
                format!("expected frame index {}, got {index}", poses.len()),
            ));
        }
        let x = parse_coordinate(n, fields[1])?;
        let y = parse_coordinate(n, fields[2])?;
        let yaw = parse_coordinate(n, fields[3])?;
        poses.push(Pose2::new(yaw, Vector2::new(x, y)));
    }
    if poses.is_empty() {
        return Err(Error::format(1, "trajectory has no pose rows".to_string()));
    }
    Ok(poses)
}

/// Reads the poses of a trajectory file, ignoring diagnostics columns.
pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Vec<Pose2>> {
    parse_trajectory_text(&read_to_string(path.as_ref())?)
}
