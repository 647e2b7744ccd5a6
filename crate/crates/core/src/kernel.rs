//! Radial kernels, smoothed densities and single-measure drifts.
//!
//! For a discrete measure `mu = sum_j w_j delta(y_j)` the smoothed density is
//! `Z(x) = sum_j w_j k(x, y_j)` and the drift is the kernel-weighted mean
//! displacement `sum_j w_j k(x, y_j) (y_j - x)`, optionally divided by `Z(x)`.
//! Under the Gaussian kernel the normalized drift equals `tau^2 grad log Z`;
//! [`check_log_gradient_identity`] measures how far a kernel is from that.

use crate::error::{Error, Result};
use crate::numeric::{norm, squared_distance};

/// Central finite-difference step used by the gradient checks.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// `exp(-|x - y| / tau)`
    Laplace,
    /// `exp(-|x - y|^2 / (2 tau^2))`
    Gaussian,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Laplace => "laplace",
            KernelFamily::Gaussian => "gaussian",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "laplace" => Ok(KernelFamily::Laplace),
            "gaussian" => Ok(KernelFamily::Gaussian),
            other => Err(Error::Parse(format!("unknown kernel family `{other}`"))),
        }
    }
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A radial kernel with bandwidth `tau > 0`. Values lie in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
    tau: f64,
}

impl Kernel {
    pub fn new(family: KernelFamily, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid(
                "bandwidth",
                format!("tau must be positive, got {tau}"),
            ));
        }
        Ok(Kernel { family, tau })
    }

    pub fn laplace(tau: f64) -> Result<Self> {
        Self::new(KernelFamily::Laplace, tau)
    }

    pub fn gaussian(tau: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, tau)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Kernel value as a function of the squared distance.
    #[inline]
    pub fn from_squared_distance(&self, dist_sq: f64) -> f64 {
        match self.family {
            KernelFamily::Laplace => (-dist_sq.sqrt() / self.tau).exp(),
            KernelFamily::Gaussian => (-dist_sq / (2.0 * self.tau * self.tau)).exp(),
        }
    }

    /// Unchecked evaluation for hot loops; callers guarantee matching lengths.
    #[inline]
    pub(crate) fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.from_squared_distance(squared_distance(x, y))
    }

    /// `k(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_pair(x, y)?;
        Ok(self.value(x, y))
    }

    /// Gradient of `k(x, y)` with respect to `x`.
    ///
    /// The Laplace kernel is not differentiable at `x = y`; that case is an
    /// error rather than a zero convention.
    pub fn grad_x(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_pair(x, y)?;
        let dist_sq = squared_distance(x, y);
        let k = self.from_squared_distance(dist_sq);
        match self.family {
            KernelFamily::Gaussian => {
                let scale = k / (self.tau * self.tau);
                Ok(x.iter().zip(y).map(|(a, b)| (b - a) * scale).collect())
            }
            KernelFamily::Laplace => {
                if dist_sq == 0.0 {
                    return Err(Error::LaplaceSingularity);
                }
                let scale = -k / (self.tau * dist_sq.sqrt());
                Ok(x.iter().zip(y).map(|(a, b)| (a - b) * scale).collect())
            }
        }
    }
}

/// A point in `R^d` with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("point", "zero-dimensional point"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Finitely many weighted atoms; weights are positive and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let dim = atoms.first().map(Vec::len).ok_or(Error::EmptyBatch)?;
        if dim == 0 {
            return Err(Error::invalid("measure", "zero-dimensional atoms"));
        }
        if weights.len() != atoms.len() {
            return Err(Error::DimensionMismatch {
                expected: atoms.len(),
                got: weights.len(),
            });
        }
        let mut flat = Vec::with_capacity(dim * atoms.len());
        for atom in &atoms {
            if atom.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: atom.len(),
                });
            }
            flat.extend_from_slice(atom);
        }
        if flat.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("measure atoms"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid(
                "measure",
                "weights must be positive and finite",
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(
                "measure",
                format!("weights sum to {total}, not 1"),
            ));
        }
        Ok(DiscreteMeasure {
            dim,
            atoms: flat,
            weights,
        })
    }

    /// Equal weights on every atom.
    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let n = atoms.len();
        if n == 0 {
            return Err(Error::EmptyBatch);
        }
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    /// Point mass at `y`.
    pub fn dirac(y: Vec<f64>) -> Result<Self> {
        Self::new(vec![y], vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, j: usize) -> &[f64] {
        &self.atoms[j * self.dim..(j + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(atom, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.atoms
            .chunks_exact(self.dim)
            .zip(self.weights.iter().copied())
    }

    /// Same measure with every atom shifted by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        check_dim(self.dim, offset.len())?;
        let atoms = self
            .atoms
            .chunks_exact(self.dim)
            .map(|a| a.iter().zip(offset).map(|(x, o)| x + o).collect())
            .collect();
        Self::new(atoms, self.weights.clone())
    }

    pub(crate) fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (atom, w) in self.iter() {
            for (mi, a) in m.iter_mut().zip(atom) {
                *mi += w * a;
            }
        }
        m
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn check_point(x: &[f64]) -> Result<()> {
    if x.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("query point"));
    }
    Ok(())
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    check_dim(x.len(), y.len())?;
    check_point(x)?;
    check_point(y)
}

/// Kernel mass and weighted displacement of `x` against a set of weighted
/// atoms. Returns `(Z, numerator)`.
pub(crate) fn kernel_moments<'a, I>(kernel: &Kernel, atoms: I, x: &[f64]) -> (f64, Vec<f64>)
where
    I: IntoIterator<Item = (&'a [f64], f64)>,
{
    let mut z = 0.0;
    let mut numerator = vec![0.0; x.len()];
    for (y, w) in atoms {
        let wk = w * kernel.value(x, y);
        z += wk;
        for ((n, yi), xi) in numerator.iter_mut().zip(y).zip(x) {
            *n += wk * (yi - xi);
        }
    }
    (z, numerator)
}

/// `Z_mu(x) = sum_j w_j k(x, y_j)`.
pub fn smoothed_density(kernel: &Kernel, mu: &DiscreteMeasure, x: &[f64]) -> Result<f64> {
    check_dim(mu.dim(), x.len())?;
    check_point(x)?;
    Ok(mu.iter().map(|(y, w)| w * kernel.value(x, y)).sum())
}

/// Drift of `x` toward the atoms of `mu`; divided by `Z_mu(x)` when
/// `normalized`.
pub fn single_drift(
    kernel: &Kernel,
    mu: &DiscreteMeasure,
    x: &[f64],
    normalized: bool,
) -> Result<Vec<f64>> {
    check_dim(mu.dim(), x.len())?;
    check_point(x)?;
    if !normalized {
        return Ok(kernel_moments(kernel, mu.iter(), x).1);
    }
    // Normalize the weights before scaling displacements, so a single atom
    // gets weight exactly 1 and the drift is exactly `y - x`.
    let wk: Vec<f64> = mu.iter().map(|(y, w)| w * kernel.value(x, y)).collect();
    let z: f64 = wk.iter().sum();
    if z <= 0.0 {
        return Err(Error::NormalizerUnderflow);
    }
    let mut v = vec![0.0; x.len()];
    for ((y, _), k) in mu.iter().zip(&wk) {
        let s = k / z;
        for ((c, yi), xi) in v.iter_mut().zip(y).zip(x) {
            *c += s * (yi - xi);
        }
    }
    Ok(v)
}

/// `tau^2 grad log Z_mu(x)` by central differences with step `h`.
pub fn log_density_gradient(
    kernel: &Kernel,
    mu: &DiscreteMeasure,
    x: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    check_dim(mu.dim(), x.len())?;
    check_point(x)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::DegenerateStep(h));
    }
    let tau2 = kernel.tau() * kernel.tau();
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let xi = x[i];
        let (plus, minus) = (xi + h, xi - h);
        if plus == xi || minus == xi {
            return Err(Error::DegenerateStep(h));
        }
        probe[i] = plus;
        let zp = smoothed_density(kernel, mu, &probe)?;
        probe[i] = minus;
        let zm = smoothed_density(kernel, mu, &probe)?;
        probe[i] = xi;
        if zp <= 0.0 || zm <= 0.0 {
            return Err(Error::NormalizerUnderflow);
        }
        grad.push(tau2 * (zp.ln() - zm.ln()) / (plus - minus));
    }
    Ok(grad)
}

/// `| V_mu(x) - tau^2 grad log Z_mu(x) |` with the gradient taken by central
/// differences of step `h` ([`FD_STEP`] is the usual choice).
///
/// Near zero for the Gaussian kernel; generically positive for Laplace. For
/// the Laplace kernel `x` must not coincide with an atom.
pub fn check_log_gradient_identity(
    kernel: &Kernel,
    mu: &DiscreteMeasure,
    x: &[f64],
    h: f64,
) -> Result<f64> {
    check_dim(mu.dim(), x.len())?;
    if kernel.family() == KernelFamily::Laplace
        && mu.iter().any(|(y, _)| squared_distance(x, y) == 0.0)
    {
        return Err(Error::LaplaceSingularity);
    }
    let drift = single_drift(kernel, mu, x, true)?;
    let grad = log_density_gradient(kernel, mu, x, h)?;
    let gap: Vec<f64> = drift.iter().zip(&grad).map(|(a, b)| a - b).collect();
    Ok(norm(&gap))
}
