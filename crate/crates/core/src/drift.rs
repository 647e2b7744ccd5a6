//! Training drift `V_{p,q} = V_p^+ - V_q^-` on sample batches.
//!
//! Attraction pulls a query point toward target samples `p`, repulsion pushes
//! it away from generated samples `q`. Both are kernel-weighted mean
//! displacements with uniform batch weights, either raw (divided by the batch
//! size) or normalized by the batch kernel mass.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{check_dim, check_point, Kernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleRole {
    TargetP,
    GeneratedQ,
}

impl SampleRole {
    fn name(self) -> &'static str {
        match self {
            SampleRole::TargetP => "target_p",
            SampleRole::GeneratedQ => "generated_q",
        }
    }
}

/// A non-empty batch of finite points of equal dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    data: Vec<f64>,
    role: SampleRole,
}

impl SampleSet {
    pub fn new(points: Vec<Vec<f64>>, role: SampleRole) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or(Error::EmptyBatch)?;
        let mut data = Vec::with_capacity(dim * points.len());
        for p in &points {
            check_dim(dim, p.len())?;
            data.extend_from_slice(p);
        }
        Self::from_flat(dim, data, role)
    }

    /// Build from row-major coordinates, `data.len()` a multiple of `dim`.
    pub fn from_flat(dim: usize, data: Vec<f64>, role: SampleRole) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("sample set", "zero-dimensional points"));
        }
        if data.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.len() % dim,
            });
        }
        if data.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("sample set"));
        }
        Ok(SampleSet { dim, data, role })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn role(&self) -> SampleRole {
        self.role
    }

    pub fn with_role(mut self, role: SampleRole) -> Self {
        self.role = role;
        self
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    /// Row-major coordinates.
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.data
    }

    /// Apply `f` to every point, keeping the role.
    pub fn map_points<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let points = self.iter().map(&mut f).collect();
        Self::new(points, self.role)
    }
}

/// Drift evaluation options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftConfig {
    pub kernel: Kernel,
    /// Divide each term by its batch kernel mass.
    pub normalized: bool,
    /// Drop (one copy of) the query point from the repulsion batch.
    pub exclude_self: bool,
    /// Lower bound applied to the normalizers. Zero disables flooring.
    pub normalizer_floor: f64,
}

impl DriftConfig {
    /// Normalized drift with self-exclusion and no flooring.
    pub fn new(kernel: Kernel) -> Self {
        DriftConfig {
            kernel,
            normalized: true,
            exclude_self: true,
            normalizer_floor: 0.0,
        }
    }

    /// Unnormalized (raw) drift, self-exclusion on.
    pub fn raw(kernel: Kernel) -> Self {
        DriftConfig {
            normalized: false,
            ..Self::new(kernel)
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.normalizer_floor.is_finite() && self.normalizer_floor >= 0.0) {
            return Err(Error::invalid(
                "normalizer floor",
                format!(
                    "must be finite and non-negative, got {}",
                    self.normalizer_floor
                ),
            ));
        }
        Ok(())
    }
}

fn check_role(set: &SampleSet, expected: SampleRole) -> Result<()> {
    if set.role != expected {
        return Err(Error::WrongRole {
            expected: expected.name(),
            found: set.role.name(),
        });
    }
    Ok(())
}

/// Weighted mean displacement of `x` over `set`, skipping the first point
/// equal to `x` when `skip_self`.
fn batch_term(cfg: &DriftConfig, set: &SampleSet, x: &[f64], skip_self: bool) -> Result<Vec<f64>> {
    let mut skipped = !skip_self;
    let mut count = 0usize;
    let mut z = 0.0;
    let mut v = vec![0.0; x.len()];
    for y in set.iter() {
        if !skipped && y == x {
            skipped = true;
            continue;
        }
        count += 1;
        let k = cfg.kernel.value(x, y);
        z += k;
        for ((vi, yi), xi) in v.iter_mut().zip(y).zip(x) {
            *vi += k * (yi - xi);
        }
    }
    if count == 0 {
        return Err(Error::EmptyBatch);
    }
    let denom = if cfg.normalized {
        let z = z.max(cfg.normalizer_floor);
        if z <= 0.0 {
            return Err(Error::NormalizerUnderflow);
        }
        z
    } else {
        count as f64
    };
    v.iter_mut().for_each(|c| *c /= denom);
    Ok(v)
}

fn check_query(set: &SampleSet, x: &[f64]) -> Result<()> {
    check_dim(set.dim, x.len())?;
    check_point(x)
}

/// `V_p^+(x)`, the pull toward target samples.
pub fn attraction(cfg: &DriftConfig, p: &SampleSet, x: &[f64]) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_role(p, SampleRole::TargetP)?;
    check_query(p, x)?;
    batch_term(cfg, p, x, false)
}

/// `V_q^-(x)`, the kernel-weighted displacement toward generated samples.
/// The drift subtracts it, so it pushes `x` away from `q`.
pub fn repulsion(cfg: &DriftConfig, q: &SampleSet, x: &[f64]) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_role(q, SampleRole::GeneratedQ)?;
    check_query(q, x)?;
    batch_term(cfg, q, x, cfg.exclude_self)
}

/// `V_{p,q}(x) = V_p^+(x) - V_q^-(x)`.
pub fn drift(cfg: &DriftConfig, p: &SampleSet, q: &SampleSet, x: &[f64]) -> Result<Vec<f64>> {
    let mut a = attraction(cfg, p, x)?;
    let r = repulsion(cfg, q, x)?;
    a.iter_mut().zip(&r).for_each(|(ai, ri)| *ai -= ri);
    Ok(a)
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    Ok(())
}

/// `(1 - gamma) V_{p,q}(x)`.
pub fn friction_scaled_drift(
    cfg: &DriftConfig,
    p: &SampleSet,
    q: &SampleSet,
    x: &[f64],
    gamma: f64,
) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    let mut v = drift(cfg, p, q, x)?;
    let scale = 1.0 - gamma;
    v.iter_mut().for_each(|c| *c *= scale);
    Ok(v)
}

/// Friction-scaled drift at every point of `queries`, evaluated in parallel.
/// Returns row-major drifts with the same layout as `queries`.
pub fn drift_batch(
    cfg: &DriftConfig,
    p: &SampleSet,
    q: &SampleSet,
    queries: &SampleSet,
    gamma: f64,
) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    cfg.validate()?;
    check_role(p, SampleRole::TargetP)?;
    check_role(q, SampleRole::GeneratedQ)?;
    check_dim(p.dim, queries.dim)?;
    check_dim(q.dim, queries.dim)?;
    let scale = 1.0 - gamma;
    let rows: Vec<Vec<f64>> = queries
        .data
        .par_chunks_exact(queries.dim)
        .map(|x| {
            let mut a = batch_term(cfg, p, x, false)?;
            let r = batch_term(cfg, q, x, cfg.exclude_self)?;
            a.iter_mut()
                .zip(&r)
                .for_each(|(ai, ri)| *ai = (*ai - ri) * scale);
            Ok(a)
        })
        .collect::<Result<_>>()?;
    Ok(rows.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{single_drift, DiscreteMeasure};

    fn set(points: &[&[f64]], role: SampleRole) -> SampleSet {
        SampleSet::new(points.iter().map(|p| p.to_vec()).collect(), role).unwrap()
    }

    #[test]
    fn sample_set_validation() {
        assert_eq!(
            SampleSet::new(vec![], SampleRole::TargetP),
            Err(Error::EmptyBatch)
        );
        assert!(SampleSet::new(vec![vec![0.0], vec![1.0, 2.0]], SampleRole::TargetP).is_err());
        assert!(SampleSet::new(vec![vec![f64::NAN]], SampleRole::TargetP).is_err());
        assert!(SampleSet::from_flat(2, vec![0.0; 3], SampleRole::TargetP).is_err());
    }

    #[test]
    fn attraction_examples() {
        let g = DriftConfig::new(Kernel::gaussian(1.3).unwrap());
        let p = set(&[&[2.0, -1.0]], SampleRole::TargetP);
        assert_eq!(attraction(&g, &p, &[0.5, 0.0]).unwrap(), vec![1.5, -1.0]);

        let sym = set(
            &[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]],
            SampleRole::TargetP,
        );
        let v = attraction(&g, &sym, &[0.0, 0.0]).unwrap();
        assert!(v.iter().all(|c| c.abs() < 1e-16));

        // Raw one-dimensional form: -exp(-a / tau) a.
        let tau = 0.8;
        let a = 0.37;
        let raw = DriftConfig::raw(Kernel::laplace(tau).unwrap());
        let p0 = set(&[&[0.0]], SampleRole::TargetP);
        let v = attraction(&raw, &p0, &[a]).unwrap();
        assert!((v[0] + (-a / tau).exp() * a).abs() < 1e-16);
    }

    #[test]
    fn repulsion_examples() {
        let tau = 0.8;
        let a = 0.37;
        let raw = DriftConfig::raw(Kernel::laplace(tau).unwrap());
        let q = set(&[&[-a]], SampleRole::GeneratedQ);
        let v = repulsion(&raw, &q, &[a]).unwrap();
        assert!((v[0] - (-2.0 * a / tau).exp() * (-2.0 * a)).abs() < 1e-16);

        let only_self = set(&[&[a]], SampleRole::GeneratedQ);
        assert_eq!(repulsion(&raw, &only_self, &[a]), Err(Error::EmptyBatch));

        let g = DriftConfig::new(Kernel::gaussian(1.0).unwrap());
        let sym = set(&[&[2.0, 1.0], &[0.0, 1.0]], SampleRole::GeneratedQ);
        assert_eq!(repulsion(&g, &sym, &[1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn exclude_self_changes_normalizer() {
        let g = DriftConfig::new(Kernel::gaussian(1.0).unwrap());
        let q = set(&[&[0.0], &[1.0]], SampleRole::GeneratedQ);
        let with = repulsion(&g, &q, &[0.0]).unwrap();
        let without = repulsion(
            &DriftConfig {
                exclude_self: false,
                ..g
            },
            &q,
            &[0.0],
        )
        .unwrap();
        assert_eq!(with, vec![1.0]);
        let k = (-0.5f64).exp();
        assert!((without[0] - k / (1.0 + k)).abs() < 1e-16);
    }

    #[test]
    fn role_is_checked() {
        let g = DriftConfig::new(Kernel::gaussian(1.0).unwrap());
        let q = set(&[&[0.0]], SampleRole::GeneratedQ);
        assert!(matches!(
            attraction(&g, &q, &[1.0]),
            Err(Error::WrongRole { .. })
        ));
    }

    #[test]
    fn drift_examples() {
        let g = DriftConfig {
            exclude_self: false,
            ..DriftConfig::new(Kernel::gaussian(0.9).unwrap())
        };
        let pts: &[&[f64]] = &[&[0.0, 0.0], &[1.0, 2.0], &[-1.5, 0.5]];
        let p = set(pts, SampleRole::TargetP);
        let q = set(pts, SampleRole::GeneratedQ);
        for x in pts {
            let v = drift(&g, &p, &q, x).unwrap();
            assert!(v.iter().all(|c| c.abs() < 1e-12));
        }

        let tau = 1.1;
        let a = 0.42;
        let raw = DriftConfig::raw(Kernel::laplace(tau).unwrap());
        let v = drift(
            &raw,
            &set(&[&[0.0]], SampleRole::TargetP),
            &set(&[&[-a]], SampleRole::GeneratedQ),
            &[a],
        )
        .unwrap();
        let kt = (-a / tau).exp();
        let kd = kt * kt;
        assert!((v[0] - (-kt * a + 2.0 * kd * a)).abs() < 1e-14);
    }

    #[test]
    fn drift_matches_reference_sum() {
        // Single-atom batches cancel their normalizers: (3,2)-(1,1) minus
        // (0,0)-(1,1) is (3, 2). Cross-check with the measure-level drift.
        let g = DriftConfig::new(Kernel::gaussian(1.0).unwrap());
        let p = set(&[&[3.0, 2.0]], SampleRole::TargetP);
        let q = set(&[&[0.0, 0.0]], SampleRole::GeneratedQ);
        let v = drift(&g, &p, &q, &[1.0, 1.0]).unwrap();
        assert_eq!(v, vec![3.0, 2.0]);

        let pm = DiscreteMeasure::dirac(vec![3.0, 2.0]).unwrap();
        let qm = DiscreteMeasure::dirac(vec![0.0, 0.0]).unwrap();
        let vp = single_drift(&g.kernel, &pm, &[1.0, 1.0], true).unwrap();
        let vq = single_drift(&g.kernel, &qm, &[1.0, 1.0], true).unwrap();
        assert_eq!(v, vec![vp[0] - vq[0], vp[1] - vq[1]]);
    }

    #[test]
    fn friction_scaling() {
        let g = DriftConfig::new(Kernel::laplace(1.0).unwrap());
        let p = set(&[&[1.0, 2.0], &[0.0, -1.0]], SampleRole::TargetP);
        let q = set(&[&[0.3, 0.3], &[-2.0, 1.0]], SampleRole::GeneratedQ);
        let x = [0.1, 0.2];
        let v = drift(&g, &p, &q, &x).unwrap();
        assert_eq!(friction_scaled_drift(&g, &p, &q, &x, 0.0).unwrap(), v);
        assert!(friction_scaled_drift(&g, &p, &q, &x, 1.0)
            .unwrap()
            .iter()
            .all(|c| *c == 0.0));
        let half = friction_scaled_drift(&g, &p, &q, &x, 0.5).unwrap();
        assert_eq!(half, vec![0.5 * v[0], 0.5 * v[1]]);
        assert_eq!(
            friction_scaled_drift(&g, &p, &q, &x, 1.5),
            Err(Error::GammaOutOfRange(1.5))
        );
        assert!(friction_scaled_drift(&g, &p, &q, &x, -0.1).is_err());
    }

    #[test]
    fn batch_matches_pointwise() {
        let g = DriftConfig::new(Kernel::laplace(1.0).unwrap());
        let p = set(
            &[&[1.0, 2.0], &[0.0, -1.0], &[3.0, 0.0]],
            SampleRole::TargetP,
        );
        let q = set(
            &[&[0.3, 0.3], &[-2.0, 1.0], &[0.5, 0.5]],
            SampleRole::GeneratedQ,
        );
        let batch = drift_batch(&g, &p, &q, &q, 0.25).unwrap();
        for (i, x) in q.iter().enumerate() {
            let v = friction_scaled_drift(&g, &p, &q, x, 0.25).unwrap();
            assert_eq!(&batch[2 * i..2 * i + 2], v.as_slice());
        }
    }

    #[test]
    fn floor_prevents_underflow() {
        let g = DriftConfig {
            exclude_self: false,
            ..DriftConfig::new(Kernel::gaussian(0.01).unwrap())
        };
        let p = set(&[&[0.0]], SampleRole::TargetP);
        let q = set(&[&[0.0]], SampleRole::GeneratedQ);
        assert_eq!(drift(&g, &p, &q, &[100.0]), Err(Error::NormalizerUnderflow));
        let floored = DriftConfig {
            normalizer_floor: 1e-300,
            ..g
        };
        assert_eq!(drift(&floored, &p, &q, &[100.0]).unwrap(), vec![0.0]);
    }
}
