//! Fréchet distance between Gaussian fits of two 2D sample sets.
//!
//! `FD^2 = |mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2})`. For 2x2
//! positive semi-definite matrices the eigenvalues of `S_a S_b` are real and
//! non-negative, so `tr (S_a S_b)^{1/2} = sqrt(tr(S_a S_b) + 2 sqrt(det(S_a S_b)))`.

use crate::drift::SampleSet;
use crate::error::{Error, Result};

use super::mixture::Matrix2x2;

/// Ridge added to a covariance whose determinant falls below
/// [`SINGULAR_DET`].
pub const COVARIANCE_RIDGE: f64 = 1e-10;
const SINGULAR_DET: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FdReport {
    pub fd: f64,
    pub mean_a: [f64; 2],
    pub cov_a: Matrix2x2,
    pub mean_b: [f64; 2],
    pub cov_b: Matrix2x2,
    pub n_a: usize,
    pub n_b: usize,
    /// A covariance was near singular and got the ridge.
    pub regularized: bool,
}

/// Sample mean and unbiased covariance of 2D points.
pub fn fit_moments(set: &SampleSet) -> Result<([f64; 2], Matrix2x2)> {
    if set.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: set.dim(),
        });
    }
    let n = set.len();
    if n < 3 {
        return Err(Error::invalid(
            "sample set",
            format!("need at least 3 points, got {n}"),
        ));
    }
    let mut mean = [0.0; 2];
    for p in set.iter() {
        mean[0] += p[0];
        mean[1] += p[1];
    }
    mean[0] /= n as f64;
    mean[1] /= n as f64;
    let mut cov = [[0.0; 2]; 2];
    for p in set.iter() {
        let d = [p[0] - mean[0], p[1] - mean[1]];
        cov[0][0] += d[0] * d[0];
        cov[0][1] += d[0] * d[1];
        cov[1][1] += d[1] * d[1];
    }
    let denom = (n - 1) as f64;
    cov[0][0] /= denom;
    cov[0][1] /= denom;
    cov[1][1] /= denom;
    cov[1][0] = cov[0][1];
    Ok((mean, cov))
}

fn det(m: &Matrix2x2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn regularize(m: &mut Matrix2x2) -> bool {
    if det(m) < SINGULAR_DET {
        m[0][0] += COVARIANCE_RIDGE;
        m[1][1] += COVARIANCE_RIDGE;
        true
    } else {
        false
    }
}

/// `tr((A B)^{1/2})` for symmetric positive semi-definite 2x2 `A`, `B`.
pub fn trace_sqrt_product(a: &Matrix2x2, b: &Matrix2x2) -> f64 {
    let tr_ab = a[0][0] * b[0][0] + a[0][1] * b[1][0] + a[1][0] * b[0][1] + a[1][1] * b[1][1];
    let det_ab = (det(a) * det(b)).max(0.0);
    (tr_ab + 2.0 * det_ab.sqrt()).max(0.0).sqrt()
}

/// Fréchet distance between Gaussians with the given moments.
pub fn frechet_from_moments(
    mean_a: &[f64; 2],
    cov_a: &Matrix2x2,
    mean_b: &[f64; 2],
    cov_b: &Matrix2x2,
) -> f64 {
    let dm = (mean_a[0] - mean_b[0]).powi(2) + (mean_a[1] - mean_b[1]).powi(2);
    let tr = cov_a[0][0] + cov_a[1][1] + cov_b[0][0] + cov_b[1][1];
    let fd2 = dm + tr - 2.0 * trace_sqrt_product(cov_a, cov_b);
    fd2.max(0.0).sqrt()
}

/// Fit a Gaussian to each set and return their Fréchet distance.
pub fn frechet_distance(a: &SampleSet, b: &SampleSet) -> Result<FdReport> {
    let (mean_a, mut cov_a) = fit_moments(a)?;
    let (mean_b, mut cov_b) = fit_moments(b)?;
    let ra = regularize(&mut cov_a);
    let rb = regularize(&mut cov_b);
    // Identical moments are exactly zero; the trace formula would leave
    // round-off of order sqrt(eps) there.
    let fd = if mean_a == mean_b && cov_a == cov_b {
        0.0
    } else {
        frechet_from_moments(&mean_a, &cov_a, &mean_b, &cov_b)
    };
    Ok(FdReport {
        fd,
        mean_a,
        cov_a,
        mean_b,
        cov_b,
        n_a: a.len(),
        n_b: b.len(),
        regularized: ra || rb,
    })
}
