//! Anisotropic measurement uncertainty for polar radar returns.
//!
//! A return at range `gamma` and azimuth `theta` carries independent range
//! noise (std `sigma_range`, meters) and azimuth noise (std `sigma_azimuth`,
//! radians). Linearized at the measurement, the Cartesian covariance is
//!
//! ```text
//! C = A * diag(sigma_range^2, sigma_azimuth^2) * A^T,   A = [u | gamma*B*u]
//! ```
//!
//! where `u = (cos theta, sin theta)` is the radial direction and `B` rotates
//! it a quarter turn onto the tangential direction. Range noise acts radially
//! and azimuth noise tangentially with lever arm `gamma`, so distant returns
//! are far less certain across the beam than along it.

use nalgebra::{Matrix2, Rotation2};

use crate::types::RadarPoint;
use crate::{Error, Result};

/// Standard deviations of the polar measurement noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Range noise, meters.
    pub sigma_range: f64,
    /// Azimuth noise, radians.
    pub sigma_azimuth: f64,
}

impl NoiseParams {
    pub fn new(sigma_range: f64, sigma_azimuth: f64) -> Result<Self> {
        if !sigma_range.is_finite() || sigma_range <= 0.0 {
            return Err(Error::invalid(format!(
                "sigma_range must be positive and finite, got {sigma_range}"
            )));
        }
        if !sigma_azimuth.is_finite() || sigma_azimuth <= 0.0 {
            return Err(Error::invalid(format!(
                "sigma_azimuth must be positive and finite, got {sigma_azimuth}"
            )));
        }
        Ok(NoiseParams {
            sigma_range,
            sigma_azimuth,
        })
    }
}

impl Default for NoiseParams {
    /// 0.1 m range noise and 10.8 degrees azimuth noise, suited to cluttered
    /// environments where feature azimuths are unreliable.
    fn default() -> Self {
        NoiseParams {
            sigma_range: 0.1,
            sigma_azimuth: 10.8f64.to_radians(),
        }
    }
}

/// A 2x2 position covariance. Symmetric positive semi-definite by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCovariance {
    matrix: Matrix2<f64>,
}

impl PointCovariance {
    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.matrix
    }

    #[cfg(test)]
    pub(crate) fn from_matrix(matrix: Matrix2<f64>) -> Self {
        PointCovariance { matrix }
    }
}

/// Cartesian covariance of one radar return under the given noise model.
///
/// The eigenvalues are `sigma_range^2` along the radial direction and
/// `(gamma * sigma_azimuth)^2` along the tangential one; at the origin the
/// tangential part vanishes.
pub fn point_covariance(point: &RadarPoint, noise: &NoiseParams) -> PointCovariance {
    let theta = point.azimuth();
    let gamma = point.range();
    let (sin, cos) = theta.sin_cos();
    // A = [u | gamma*B*u] with u = (cos, sin), B*u = (-sin, cos).
    let a = Matrix2::new(cos, -gamma * sin, sin, gamma * cos);
    let d = Matrix2::new(
        noise.sigma_range * noise.sigma_range,
        0.0,
        0.0,
        noise.sigma_azimuth * noise.sigma_azimuth,
    );
    PointCovariance {
        matrix: a * d * a.transpose(),
    }
}

/// Transports a covariance through a rotation: `R * C * R^T`.
pub fn rotate_covariance(cov: &PointCovariance, rotation: &Rotation2<f64>) -> PointCovariance {
    let r = rotation.matrix();
    PointCovariance {
        matrix: r * cov.matrix * r.transpose(),
    }
}

/// Radial/tangential uncertainty radius `sigma_range + gamma * sigma_azimuth`
/// of one return; used by consistency checks as a conservative scalar bound.
pub fn uncertainty_radius(point: &RadarPoint, noise: &NoiseParams) -> f64 {
    noise.sigma_range + point.range() * noise.sigma_azimuth
}
