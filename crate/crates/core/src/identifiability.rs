//! Grid scans that probe when a vanishing drift forces `p = q`.
//!
//! With a Gaussian kernel, `V_p - V_q = 0` on an open set implies `p = q`.
//! These checks cannot prove that; they scan a finite grid and report the
//! largest drift and smoothed-density gaps, and they contrast the Gaussian
//! log-gradient identity with its failure under the Laplace kernel.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{
    check_dim, check_log_gradient_identity, single_drift, smoothed_density, DiscreteMeasure,
    Kernel, KernelFamily, Point, FD_STEP,
};
use crate::numeric::{median, norm, squared_distance};

/// Axis-aligned box sampled with `resolution` points per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    lower: Point,
    upper: Point,
    resolution: usize,
}

impl ScanGrid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, resolution: usize) -> Result<Self> {
        let lower = Point::new(lower)?;
        let upper = Point::new(upper)?;
        check_dim(lower.dim(), upper.dim())?;
        if lower.iter().zip(upper.iter()).any(|(l, u)| l >= u) {
            return Err(Error::invalid(
                "scan grid",
                "lower corner must be below upper corner",
            ));
        }
        if resolution < 2 {
            return Err(Error::invalid(
                "scan grid",
                "need at least 2 points per axis",
            ));
        }
        Ok(ScanGrid {
            lower,
            upper,
            resolution,
        })
    }

    /// The cube `[-half_width, half_width]^dim`.
    pub fn cube(dim: usize, half_width: f64, resolution: usize) -> Result<Self> {
        Self::new(vec![-half_width; dim], vec![half_width; dim], resolution)
    }

    /// `[-5, 5]^d` with 61 points per axis for `d <= 2`, coarser above.
    pub fn default_for(dim: usize) -> Result<Self> {
        let resolution = match dim {
            0..=2 => 61,
            3 => 21,
            _ => 11,
        };
        Self::cube(dim, 5.0, resolution)
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing between neighbouring nodes along each axis.
    pub fn spacing(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(self.upper.iter())
            .map(|(l, u)| (u - l) / (self.resolution - 1) as f64)
            .collect()
    }

    /// The `index`-th node in row-major order (last axis fastest).
    pub fn node(&self, mut index: usize) -> Vec<f64> {
        let d = self.dim();
        let step = self.spacing();
        let mut x = vec![0.0; d];
        for axis in (0..d).rev() {
            let k = index % self.resolution;
            index /= self.resolution;
            x[axis] = if k == self.resolution - 1 {
                self.upper[axis]
            } else {
                self.lower[axis] + k as f64 * step[axis]
            };
        }
        x
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }
}

/// Maxima of a grid scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub kernel: KernelFamily,
    pub tau: f64,
    pub n_atoms_p: usize,
    pub n_atoms_q: usize,
    pub max_drift_norm: f64,
    pub max_density_gap: f64,
    pub argmax_drift: Point,
    pub argmax_density: Point,
    /// Grid nodes skipped because they coincide with an atom (Laplace only).
    pub skipped: usize,
}

impl ScanReport {
    pub const CSV_HEADER: &'static str =
        "kernel,tau,n_atoms_p,n_atoms_q,max_drift_norm,max_density_gap,argmax_drift,argmax_density";

    pub fn csv_row(&self) -> String {
        let coords = |p: &Point| {
            p.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.kernel,
            self.tau,
            self.n_atoms_p,
            self.n_atoms_q,
            self.max_drift_norm,
            self.max_density_gap,
            coords(&self.argmax_drift),
            coords(&self.argmax_density)
        )
    }
}

fn coincides_with_atom(x: &[f64], mu: &DiscreteMeasure) -> bool {
    mu.iter().any(|(y, _)| squared_distance(x, y) == 0.0)
}

#[derive(Clone, Copy)]
struct Gap {
    drift: f64,
    drift_at: usize,
    density: f64,
    density_at: usize,
    skipped: usize,
}

impl Gap {
    fn merge(self, other: Gap) -> Gap {
        // Ties resolve to the lower index so the result is order independent.
        let pick = |a: (f64, usize), b: (f64, usize)| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        };
        let (drift, drift_at) = pick((self.drift, self.drift_at), (other.drift, other.drift_at));
        let (density, density_at) = pick(
            (self.density, self.density_at),
            (other.density, other.density_at),
        );
        Gap {
            drift,
            drift_at,
            density,
            density_at,
            skipped: self.skipped + other.skipped,
        }
    }

    const EMPTY: Gap = Gap {
        drift: 0.0,
        drift_at: usize::MAX,
        density: 0.0,
        density_at: usize::MAX,
        skipped: 0,
    };
}

fn scan(
    kernel: &Kernel,
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    grid: &ScanGrid,
    want_drift: bool,
) -> Result<ScanReport> {
    check_dim(p.dim(), q.dim())?;
    check_dim(p.dim(), grid.dim())?;
    let laplace = kernel.family() == KernelFamily::Laplace;
    let gap = (0..grid.len())
        .into_par_iter()
        .map(|i| -> Result<Gap> {
            let x = grid.node(i);
            let mut g = Gap::EMPTY;
            let zp = smoothed_density(kernel, p, &x)?;
            let zq = smoothed_density(kernel, q, &x)?;
            g.density = (zp - zq).abs();
            g.density_at = i;
            if want_drift {
                if laplace && (coincides_with_atom(&x, p) || coincides_with_atom(&x, q)) {
                    g.skipped = 1;
                } else {
                    let vp = single_drift(kernel, p, &x, true)?;
                    let vq = single_drift(kernel, q, &x, true)?;
                    let diff: Vec<f64> = vp.iter().zip(&vq).map(|(a, b)| a - b).collect();
                    g.drift = norm(&diff);
                    g.drift_at = i;
                }
            }
            Ok(g)
        })
        .try_reduce(|| Gap::EMPTY, |a, b| Ok(a.merge(b)))?;
    let node = |i: usize| Point::new(grid.node(if i == usize::MAX { 0 } else { i }));
    Ok(ScanReport {
        kernel: kernel.family(),
        tau: kernel.tau(),
        n_atoms_p: p.len(),
        n_atoms_q: q.len(),
        max_drift_norm: gap.drift,
        max_density_gap: gap.density,
        argmax_drift: node(gap.drift_at)?,
        argmax_density: node(gap.density_at)?,
        skipped: gap.skipped,
    })
}

/// Max over the grid of `|V_p(x) - V_q(x)|` (normalized drifts), together
/// with the smoothed-density gap.
pub fn drift_gap_scan(
    kernel: &Kernel,
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    grid: &ScanGrid,
) -> Result<ScanReport> {
    scan(kernel, p, q, grid, true)
}

/// Max over the grid of `|Z_p(x) - Z_q(x)|`. The drift fields of the report
/// are left at zero.
pub fn density_gap_scan(
    kernel: &Kernel,
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    grid: &ScanGrid,
) -> Result<ScanReport> {
    scan(kernel, p, q, grid, false)
}

/// Riemann sum of `Z_mu` over the grid nodes.
pub fn smoothed_mass(kernel: &Kernel, mu: &DiscreteMeasure, grid: &ScanGrid) -> Result<f64> {
    check_dim(mu.dim(), grid.dim())?;
    let cell: f64 = grid.spacing().iter().product();
    let total: f64 = (0..grid.len())
        .into_par_iter()
        .map(|i| smoothed_density(kernel, mu, &grid.node(i)))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .sum();
    Ok(total * cell)
}

/// One grid node of the kernel contrast.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastRow {
    pub point: Vec<f64>,
    pub gaussian_residual: f64,
    /// `None` where the node coincides with an atom.
    pub laplace_residual: Option<f64>,
}

/// Log-gradient residuals under both kernels on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastReport {
    pub tau: f64,
    pub rows: Vec<ContrastRow>,
    pub skipped: usize,
}

impl ContrastReport {
    pub const CSV_HEADER: &'static str = "point,gaussian_residual,laplace_residual";

    pub fn gaussian_max(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.gaussian_residual)
            .fold(0.0, f64::max)
    }

    pub fn gaussian_median(&self) -> f64 {
        median(
            &self
                .rows
                .iter()
                .map(|r| r.gaussian_residual)
                .collect::<Vec<_>>(),
        )
    }

    pub fn laplace_median(&self) -> f64 {
        median(&self.laplace_values())
    }

    pub fn laplace_max(&self) -> f64 {
        self.laplace_values().into_iter().fold(0.0, f64::max)
    }

    fn laplace_values(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.laplace_residual)
            .collect()
    }

    pub fn csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.rows.iter().map(|r| {
            let point = r
                .point
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            let lap = r
                .laplace_residual
                .map(|v| v.to_string())
                .unwrap_or_default();
            format!("{point},{},{lap}", r.gaussian_residual)
        })
    }
}

/// Residual of `V_mu = tau^2 grad log Z_mu` at every grid node under the
/// Gaussian and the Laplace kernel with the same bandwidth.
pub fn kernel_contrast_report(
    tau: f64,
    mu: &DiscreteMeasure,
    grid: &ScanGrid,
) -> Result<ContrastReport> {
    check_dim(mu.dim(), grid.dim())?;
    let gaussian = Kernel::gaussian(tau)?;
    let laplace = Kernel::laplace(tau)?;
    let rows = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let gaussian_residual = check_log_gradient_identity(&gaussian, mu, &x, FD_STEP)?;
            let laplace_residual = match check_log_gradient_identity(&laplace, mu, &x, FD_STEP) {
                Ok(r) => Some(r),
                Err(Error::LaplaceSingularity) => None,
                Err(e) => return Err(e),
            };
            Ok(ContrastRow {
                point: x,
                gaussian_residual,
                laplace_residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let skipped = rows.iter().filter(|r| r.laplace_residual.is_none()).count();
    Ok(ContrastReport { tau, rows, skipped })
}

/// Random measure with atoms uniform on `[-half_width, half_width]^dim` and
/// flat-Dirichlet weights.
pub fn random_measure<R: Rng + ?Sized>(
    rng: &mut R,
    n_atoms: usize,
    dim: usize,
    half_width: f64,
) -> Result<DiscreteMeasure> {
    if n_atoms == 0 {
        return Err(Error::EmptyBatch);
    }
    let atoms = (0..n_atoms)
        .map(|_| {
            (0..dim)
                .map(|_| rng.random_range(-half_width..=half_width))
                .collect()
        })
        .collect();
    // Normalized unit exponentials are Dirichlet(1, ..., 1).
    let raw: Vec<f64> = (0..n_atoms)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            e.max(f64::MIN_POSITIVE)
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // Put the rounding residue on the largest weight so the sum is 1.
    let residue = 1.0 - weights.iter().sum::<f64>();
    if let Some(w) = weights.iter_mut().max_by(|a, b| a.total_cmp(b)) {
        *w += residue;
    }
    DiscreteMeasure::new(atoms, weights)
}

/// Total-variation distance between two discrete measures, treating atoms
/// closer than `atom_tol` as the same location. Zero iff the measures agree
/// up to that tolerance.
pub fn displaced_mass(p: &DiscreteMeasure, q: &DiscreteMeasure, atom_tol: f64) -> Result<f64> {
    check_dim(p.dim(), q.dim())?;
    let tol_sq = atom_tol * atom_tol;
    // Merge atoms of both measures into shared locations.
    let mut locations: Vec<(&[f64], f64, f64)> = Vec::new();
    for (atom, w, from_p) in p
        .iter()
        .map(|(a, w)| (a, w, true))
        .chain(q.iter().map(|(a, w)| (a, w, false)))
    {
        let slot = locations
            .iter_mut()
            .find(|(loc, _, _)| squared_distance(loc, atom) <= tol_sq);
        match slot {
            Some(s) => {
                if from_p {
                    s.1 += w
                } else {
                    s.2 += w
                }
            }
            None => locations.push(if from_p {
                (atom, w, 0.0)
            } else {
                (atom, 0.0, w)
            }),
        }
    }
    Ok(0.5 * locations.iter().map(|(_, a, b)| (a - b).abs()).sum::<f64>())
}

/// Largest drift difference between two measures, maximized over the
/// grid. Convenience for sweeps.
pub fn max_drift_gap(
    kernel: &Kernel,
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    grid: &ScanGrid,
) -> Result<f64> {
    Ok(drift_gap_scan(kernel, p, q, grid)?.max_drift_norm)
}

/// Difference of first moments; a non-zero value forces `Z_p != Z_q`.
pub fn mean_gap(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64> {
    check_dim(p.dim(), q.dim())?;
    let d: Vec<f64> = p.mean().iter().zip(q.mean()).map(|(a, b)| a - b).collect();
    Ok(norm(&d))
}

/// Half-width of the box random atoms are drawn from.
pub const ATOM_HALF_WIDTH: f64 = 2.0;
/// Minimum displaced mass for a pair to count as distinct.
pub const DISTINCT_MASS: f64 = 0.05;
const ATOM_TOL: f64 = 1e-9;

/// Which pair a sweep row scanned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// Independent draws with displaced mass at least [`DISTINCT_MASS`].
    Distinct,
    /// A measure against itself.
    Control,
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairKind::Distinct => "distinct",
            PairKind::Control => "control",
        })
    }
}

/// One scanned pair of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub trial: usize,
    pub pair: PairKind,
    pub displaced_mass: f64,
    pub report: ScanReport,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str =
        "trial,pair,displaced_mass,kernel,tau,n_atoms_p,n_atoms_q,\
max_drift_norm,max_density_gap,argmax_drift,argmax_density";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.trial,
            self.pair,
            self.displaced_mass,
            self.report.csv_row()
        )
    }
}

/// For each trial draw random `p` and `q` (redrawing `q` until the pair is
/// distinct) and scan both `(p, q)` and the control `(p, p)`. Rows come
/// back as distinct/control pairs in trial order.
pub fn identifiability_sweep(
    kernel: &Kernel,
    n_atoms: usize,
    grid: &ScanGrid,
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let dim = grid.dim();
    let per_trial = |trial: usize| -> Result<[SweepRow; 2]> {
        let mut r = crate::rng::trial_stream(seed, crate::rng::streams::MEASURES, trial as u64);
        let p = random_measure(&mut r, n_atoms, dim, ATOM_HALF_WIDTH)?;
        let (q, mass) = loop {
            let q = random_measure(&mut r, n_atoms, dim, ATOM_HALF_WIDTH)?;
            let mass = displaced_mass(&p, &q, ATOM_TOL)?;
            if mass >= DISTINCT_MASS {
                break (q, mass);
            }
        };
        Ok([
            SweepRow {
                trial,
                pair: PairKind::Distinct,
                displaced_mass: mass,
                report: drift_gap_scan(kernel, &p, &q, grid)?,
            },
            SweepRow {
                trial,
                pair: PairKind::Control,
                displaced_mass: 0.0,
                report: drift_gap_scan(kernel, &p, &p, grid)?,
            },
        ])
    };
    let rows = (0..trials)
        .into_par_iter()
        .map(per_trial)
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, streams};

    #[test]
    fn grid_nodes() {
        let g = ScanGrid::new(vec![-1.0, 0.0], vec![1.0, 2.0], 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.node(0), vec![-1.0, 0.0]);
        assert_eq!(g.node(1), vec![-1.0, 1.0]);
        assert_eq!(g.node(8), vec![1.0, 2.0]);
        assert!(ScanGrid::new(vec![0.0], vec![0.0], 3).is_err());
        assert!(ScanGrid::new(vec![0.0], vec![1.0], 1).is_err());
        assert_eq!(ScanGrid::default_for(2).unwrap().resolution(), 61);
    }

    #[test]
    fn identical_measures_have_no_gap() {
        let k = Kernel::gaussian(1.0).unwrap();
        let mut r = rng::stream(3, streams::MEASURES);
        let p = random_measure(&mut r, 6, 2, 2.0).unwrap();
        let rep = drift_gap_scan(&k, &p, &p.clone(), &ScanGrid::cube(2, 5.0, 21).unwrap()).unwrap();
        assert!(rep.max_drift_norm < 1e-12);
        assert!(rep.max_density_gap < 1e-12);
    }

    #[test]
    fn dirac_offset_gap_is_constant() {
        let k = Kernel::gaussian(1.0).unwrap();
        let p = DiscreteMeasure::dirac(vec![0.0, 0.0]).unwrap();
        let q = DiscreteMeasure::dirac(vec![1.0, 0.0]).unwrap();
        let rep = drift_gap_scan(&k, &p, &q, &ScanGrid::cube(2, 3.0, 25).unwrap()).unwrap();
        assert!((rep.max_drift_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn laplace_skips_atoms() {
        let k = Kernel::laplace(1.0).unwrap();
        let p = DiscreteMeasure::dirac(vec![0.0, 0.0]).unwrap();
        let q = DiscreteMeasure::dirac(vec![1.0, 1.0]).unwrap();
        let grid = ScanGrid::cube(2, 2.0, 5).unwrap();
        let rep = drift_gap_scan(&k, &p, &q, &grid).unwrap();
        assert_eq!(rep.skipped, 2);
    }

    #[test]
    fn smoothed_mass_matches_gaussian_normalizer() {
        let tau = 0.8;
        let k = Kernel::gaussian(tau).unwrap();
        let mu =
            DiscreteMeasure::new(vec![vec![0.0, 0.0], vec![1.0, -0.5]], vec![0.4, 0.6]).unwrap();
        // Atom hull plus 6 tau on every side.
        let grid = ScanGrid::new(
            vec![-6.0 * tau, -0.5 - 6.0 * tau],
            vec![1.0 + 6.0 * tau, 6.0 * tau],
            121,
        )
        .unwrap();
        let mass = smoothed_mass(&k, &mu, &grid).unwrap();
        let expected = 2.0 * std::f64::consts::PI * tau * tau;
        assert!((mass / expected - 1.0).abs() < 0.01, "{mass} vs {expected}");
    }

    #[test]
    fn different_means_give_density_gap() {
        let k = Kernel::gaussian(1.0).unwrap();
        let p = DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let q = DiscreteMeasure::uniform(vec![vec![0.0, 0.5], vec![1.0, 0.5]]).unwrap();
        assert!(mean_gap(&p, &q).unwrap() > 0.0);
        let rep = density_gap_scan(&k, &p, &q, &ScanGrid::cube(2, 4.0, 21).unwrap()).unwrap();
        assert!(rep.max_density_gap > 1e-3);
        assert_eq!(rep.max_drift_norm, 0.0);
    }

    #[test]
    fn contrast_report_two_atoms() {
        let mu =
            DiscreteMeasure::new(vec![vec![0.0, 0.0], vec![2.0, 1.0]], vec![0.3, 0.7]).unwrap();
        let rep = kernel_contrast_report(1.0, &mu, &ScanGrid::cube(2, 3.0, 13).unwrap()).unwrap();
        assert!(rep.gaussian_max() < 1e-4, "{}", rep.gaussian_max());
        assert!(rep.laplace_median() > 1e-3, "{}", rep.laplace_median());
    }

    #[test]
    fn contrast_report_single_atom_closed_form() {
        // Gaussian: drift and tau^2 grad log Z both equal y - x.
        // Laplace: tau^2 grad log Z = tau (y - x)/|y - x|, so the residual
        // is | |y - x| - tau |.
        let tau = 0.7;
        let y = vec![0.25, -0.25];
        let mu = DiscreteMeasure::dirac(y.clone()).unwrap();
        let rep = kernel_contrast_report(tau, &mu, &ScanGrid::cube(2, 2.0, 9).unwrap()).unwrap();
        assert!(rep.gaussian_max() < 1e-8);
        for row in &rep.rows {
            let dist = squared_distance(&row.point, &y).sqrt();
            let lap = row.laplace_residual.unwrap();
            assert!((lap - (dist - tau).abs()).abs() < 1e-6, "{row:?}");
        }
    }

    #[test]
    fn random_measures_are_valid() {
        let mut r = rng::stream(11, streams::MEASURES);
        for n in [1, 2, 5, 20] {
            let m = random_measure(&mut r, n, 3, 2.0).unwrap();
            assert_eq!(m.len(), n);
            assert!(m.iter().all(|(a, _)| a.iter().all(|c| c.abs() <= 2.0)));
        }
    }

    #[test]
    fn displaced_mass_examples() {
        let p = DiscreteMeasure::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        let q = DiscreteMeasure::new(vec![vec![1.0], vec![0.0]], vec![0.5, 0.5]).unwrap();
        assert_eq!(displaced_mass(&p, &q, 1e-9).unwrap(), 0.0);
        let r = DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![0.4, 0.6]).unwrap();
        assert!((displaced_mass(&p, &r, 1e-9).unwrap() - 0.1).abs() < 1e-15);
        let s = DiscreteMeasure::dirac(vec![5.0]).unwrap();
        assert_eq!(displaced_mass(&p, &s, 1e-9).unwrap(), 1.0);
    }

    #[test]
    fn sweep_separates_distinct_from_control() {
        let k = Kernel::gaussian(1.0).unwrap();
        let grid = ScanGrid::cube(2, 5.0, 11).unwrap();
        let rows = identifiability_sweep(&k, 4, &grid, 20, 9).unwrap();
        assert_eq!(rows.len(), 40);
        for r in &rows {
            match r.pair {
                PairKind::Distinct => {
                    assert!(r.displaced_mass >= DISTINCT_MASS);
                    assert!(r.report.max_drift_norm > 1e-6);
                }
                PairKind::Control => assert!(r.report.max_drift_norm < 1e-12),
            }
        }
        assert_eq!(rows, identifiability_sweep(&k, 4, &grid, 20, 9).unwrap());
    }
}
