use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::drift::{SampleRole, SampleSet};
use crate::error::{Error, Result};
use crate::rng::{self, streams, StreamRng};

pub type Matrix2x2 = [[f64; 2]; 2];

/// Lower-triangular Cholesky factor of a symmetric positive-definite 2x2
/// matrix.
pub fn cholesky2(m: &Matrix2x2) -> Result<Matrix2x2> {
    let [[a, b], [c, d]] = *m;
    if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
        return Err(Error::NonFinite("covariance"));
    }
    if (b - c).abs() > 1e-12 * (1.0 + b.abs()) || a <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let l00 = a.sqrt();
    let l10 = b / l00;
    let rest = d - l10 * l10;
    if rest <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    Ok([[l00, 0.0], [l10, rest.sqrt()]])
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub mean: [f64; 2],
    pub covariance: Matrix2x2,
    pub weight: f64,
}

/// Two-dimensional Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<MixtureComponent>,
    factors: Vec<Matrix2x2>,
}

impl GaussianMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("mixture", "no components"));
        }
        if components
            .iter()
            .any(|c| !(c.weight.is_finite() && c.weight > 0.0))
        {
            return Err(Error::invalid("mixture", "weights must be positive"));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("mixture", format!("weights sum to {total}")));
        }
        let factors = components
            .iter()
            .map(|c| cholesky2(&c.covariance))
            .collect::<Result<_>>()?;
        Ok(GaussianMixture {
            components,
            factors,
        })
    }

    /// Single Gaussian.
    pub fn gaussian(mean: [f64; 2], covariance: Matrix2x2) -> Result<Self> {
        Self::new(vec![MixtureComponent {
            mean,
            covariance,
            weight: 1.0,
        }])
    }

    /// `N(0, I)`, the latent distribution of the toy task.
    pub fn standard_normal() -> Self {
        Self::gaussian([0.0, 0.0], IDENTITY).expect("identity is positive definite")
    }

    /// Equal-weight mixture of `N((0,0), I)` and `N((3,2), I)`.
    pub fn toy_target() -> Self {
        Self::new(vec![
            MixtureComponent {
                mean: [0.0, 0.0],
                covariance: IDENTITY,
                weight: 0.5,
            },
            MixtureComponent {
                mean: [3.0, 2.0],
                covariance: IDENTITY,
                weight: 0.5,
            },
        ])
        .expect("toy target is valid")
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    /// Population mean and covariance.
    pub fn moments(&self) -> ([f64; 2], Matrix2x2) {
        let mut mean = [0.0; 2];
        for c in &self.components {
            for (m, x) in mean.iter_mut().zip(c.mean) {
                *m += c.weight * x;
            }
        }
        let mut cov = [[0.0; 2]; 2];
        for c in &self.components {
            let d = [c.mean[0] - mean[0], c.mean[1] - mean[1]];
            for i in 0..2 {
                for j in 0..2 {
                    cov[i][j] += c.weight * (c.covariance[i][j] + d[i] * d[j]);
                }
            }
        }
        (mean, cov)
    }

    /// Draw one point and the index of its component.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ([f64; 2], usize) {
        let mut u: f64 = rng.random();
        let mut idx = self.components.len() - 1;
        for (i, c) in self.components.iter().enumerate() {
            if u < c.weight {
                idx = i;
                break;
            }
            u -= c.weight;
        }
        let z0: f64 = StandardNormal.sample(rng);
        let z1: f64 = StandardNormal.sample(rng);
        let l = &self.factors[idx];
        let m = &self.components[idx].mean;
        (
            [m[0] + l[0][0] * z0, m[1] + l[1][0] * z0 + l[1][1] * z1],
            idx,
        )
    }

    /// `n` draws with their component labels.
    pub fn sample_labeled<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (Vec<f64>, Vec<usize>) {
        let mut data = Vec::with_capacity(2 * n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let (x, i) = self.draw(rng);
            data.extend_from_slice(&x);
            labels.push(i);
        }
        (data, labels)
    }

    pub fn sample_with<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
        role: SampleRole,
    ) -> Result<SampleSet> {
        if n == 0 {
            return Err(Error::EmptyBatch);
        }
        let (data, _) = self.sample_labeled(n, rng);
        SampleSet::from_flat(2, data, role)
    }
}

pub const IDENTITY: Matrix2x2 = [[1.0, 0.0], [0.0, 1.0]];

/// `n` i.i.d. draws from `m`, seeded.
pub fn sample_mixture(m: &GaussianMixture, n: usize, seed: u64) -> Result<SampleSet> {
    let mut rng: StreamRng = rng::stream(seed, streams::TARGET);
    m.sample_with(n, &mut rng, SampleRole::TargetP)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_known() {
        let l = cholesky2(&[[4.0, 2.0], [2.0, 5.0]]).unwrap();
        assert_eq!(l, [[2.0, 0.0], [1.0, 2.0]]);
        assert_eq!(
            cholesky2(&[[1.0, 2.0], [2.0, 1.0]]),
            Err(Error::NotPositiveDefinite)
        );
        assert_eq!(
            cholesky2(&[[1.0, 0.5], [0.0, 1.0]]),
            Err(Error::NotPositiveDefinite)
        );
        assert!(GaussianMixture::gaussian([0.0; 2], [[-1.0, 0.0], [0.0, 1.0]]).is_err());
    }

    #[test]
    fn toy_target_moments() {
        let (mean, cov) = GaussianMixture::toy_target().moments();
        assert_eq!(mean, [1.5, 1.0]);
        assert_eq!(cov, [[3.25, 1.5], [1.5, 2.0]]);
    }

    #[test]
    fn component_proportions_and_means() {
        let m = GaussianMixture::toy_target();
        let n = 10_000;
        let mut rng = rng::stream(0, streams::TARGET);
        let (data, labels) = m.sample_labeled(n, &mut rng);
        let second = labels.iter().filter(|&&l| l == 1).count();
        // Binomial(n, 1/2): 3 sigma = 1.5 sqrt(n).
        let three_sigma = 1.5 * (n as f64).sqrt();
        assert!(
            (second as f64 - n as f64 / 2.0).abs() < three_sigma,
            "{second}"
        );

        let mut sum = [0.0; 2];
        for (x, _) in data.chunks_exact(2).zip(&labels).filter(|(_, &l)| l == 1) {
            sum[0] += x[0];
            sum[1] += x[1];
        }
        let tol = 3.0 / (second as f64).sqrt();
        assert!((sum[0] / second as f64 - 3.0).abs() < tol);
        assert!((sum[1] / second as f64 - 2.0).abs() < tol);
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let m = GaussianMixture::toy_target();
        let a = sample_mixture(&m, 500, 42).unwrap();
        let b = sample_mixture(&m, 500, 42).unwrap();
        let c = sample_mixture(&m, 500, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(sample_mixture(&m, 0, 1).is_err());
    }
}
