//! Independent finite-difference eigensolver for the fiber problem.
//!
//! Conservative three-point discretization on `N` interior nodes, Sturm
//! sequence counting with bisection for eigenvalues and inverse iteration
//! for eigenvectors.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::profile::CelerityProfile;

/// Symmetric tridiagonal matrix of the discretized fiber operator.
#[derive(Debug, Clone)]
pub struct FdDiscretization {
    pub n: usize,
    pub h: f64,
    /// Interior nodes `y_i = i h`, `i = 1..=n`.
    pub nodes: Vec<f64>,
    pub diag: Vec<f64>,
    /// `off[i]` couples nodes `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl FdDiscretization {
    /// Discretize `-(c u')' + c mu^2 u` with `h = H / (n + 1)`.
    ///
    /// Interface coefficients are harmonic means over the cell for
    /// piecewise-constant profiles and midpoint values otherwise.
    pub fn new(profile: &CelerityProfile, mu: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("FD grid needs at least one node".into()));
        }
        let height = profile.height();
        let h = height / (n + 1) as f64;
        let y = |i: usize| if i == n + 1 { height } else { i as f64 * h };
        let step_type = profile.as_piecewise_constant().is_some();
        let half: Vec<f64> = (0..=n)
            .map(|i| {
                if step_type {
                    h / (profile.travel(y(i + 1)) - profile.travel(y(i)))
                } else {
                    profile.value(0.5 * (y(i) + y(i + 1)))
                }
            })
            .collect();
        let h2 = h * h;
        let nodes: Vec<f64> = (1..=n).map(y).collect();
        let diag = (1..=n)
            .map(|i| {
                let yi = y(i);
                let c = 0.5 * (profile.value(yi) + profile.value_left(yi));
                (half[i - 1] + half[i]) / h2 + c * mu * mu
            })
            .collect();
        let off = (1..n).map(|i| -half[i] / h2).collect();
        Ok(Self { n, h, nodes, diag, off })
    }

    /// `||T||_inf`.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let r = if i + 1 < self.n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + l + r
            })
            .fold(0.0, f64::max)
    }

    /// Interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < self.n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - l - r);
            hi = hi.max(self.diag[i] + l + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + self.max_abs_diag());
        let mut count = 0;
        let mut d = self.diag[0] - x;
        for i in 0..self.n {
            if i > 0 {
                d = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / d;
            }
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn max_abs_diag(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The `k`-th smallest eigenvalue (`k >= 1`) by bisection on the Sturm
    /// count, down to a few units of rounding in `||T||`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let tol = 4.0 * f64::EPSILON * self.norm_inf();
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solve `(T - sigma I) x = b` by Gaussian elimination with partial
    /// pivoting.
    fn shifted_solve(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - sigma).collect();
        let mut du = self.off.clone();
        let dl = &self.off;
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut r = b.to_vec();
        let guard = f64::EPSILON * self.norm_inf();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = guard;
                }
                let l = dl[i] / d[i];
                d[i + 1] -= l * du[i];
                r[i + 1] -= l * r[i];
            } else {
                let l = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - l * temp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -l * du2[i];
                }
                du[i] = temp;
                let ri = r[i];
                r[i] = r[i + 1];
                r[i + 1] = ri - l * r[i];
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = guard;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = r[i];
            if i + 1 < n {
                s -= du[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= du2[i] * x[i + 2];
            }
            x[i] = s / d[i];
        }
        x
    }
}

/// Smallest `num_eigs` eigenvalues of the FD matrix with `n` interior nodes.
pub fn fd_spectrum(profile: &CelerityProfile, mu: f64, num_eigs: usize, n: usize) -> Result<Vec<f64>> {
    if num_eigs > n {
        return Err(Error::TooManyRequested { requested: num_eigs, order: n });
    }
    let fd = FdDiscretization::new(profile, mu, n)?;
    Ok((1..=num_eigs).into_par_iter().map(|k| fd.eigenvalue(k)).collect())
}

/// Eigenvector of the FD matrix for an eigenvalue estimate `lambda_hat`.
#[derive(Debug, Clone)]
pub struct FdEigenvector {
    /// Nodes including both boundary points.
    pub nodes: Vec<f64>,
    /// Values at `nodes`, zero at the boundary, `sum h x_i^2 = 1`, first
    /// interior value positive.
    pub values: Vec<f64>,
}

impl FdEigenvector {
    /// Piecewise-linear interpolation between nodes.
    pub fn interpolate(&self, y: f64) -> f64 {
        let i = self.nodes.partition_point(|&g| g <= y).saturating_sub(1).min(self.nodes.len() - 2);
        let w = (y - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }

    /// Discrete `sum h x_i^2` over nodes inside `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let h = self.nodes[1] - self.nodes[0];
        self.nodes.iter().zip(&self.values).filter(|(y, _)| **y >= a && **y <= b).map(|(_, v)| h * v * v).sum()
    }
}

/// Inverse iteration for the eigenvector of `lambda_hat`.
pub fn fd_eigenvector(profile: &CelerityProfile, mu: f64, lambda_hat: f64, n: usize) -> Result<FdEigenvector> {
    let fd = FdDiscretization::new(profile, mu, n)?;
    fd_eigenvector_of(&fd, lambda_hat)
}

/// [`fd_eigenvector`] for an existing discretization.
pub fn fd_eigenvector_of(fd: &FdDiscretization, lambda_hat: f64) -> Result<FdEigenvector> {
    let gap = 1e-8;
    if fd.sturm_count(lambda_hat + gap) - fd.sturm_count(lambda_hat - gap) > 1 {
        return Err(Error::ClusterUnresolved { lambda: lambda_hat });
    }
    let n = fd.n;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 101) as f64 / 101.0).collect();
    for _ in 0..4 {
        let y = fd.shifted_solve(lambda_hat, &x);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = y.into_iter().map(|v| v / norm).collect();
    }
    let scale = (fd.h * x.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let sign = if x[0] < 0.0 { -1.0 } else { 1.0 };
    let mut values = Vec::with_capacity(n + 2);
    values.push(0.0);
    values.extend(x.iter().map(|v| sign * v / scale));
    values.push(0.0);
    let mut nodes = Vec::with_capacity(n + 2);
    nodes.push(0.0);
    nodes.extend_from_slice(&fd.nodes);
    nodes.push(fd.h * (n + 1) as f64);
    Ok(FdEigenvector { nodes, values })
}

/// Extrapolate `(h, value)` pairs with an error expansion in `h^2, h^4, ...`.
/// The last entry is taken as the finest level.
pub fn richardson(levels: &[(f64, f64)]) -> f64 {
    assert!(!levels.is_empty());
    let mut table: Vec<f64> = levels.iter().map(|l| l.1).collect();
    let hs: Vec<f64> = levels.iter().map(|l| l.0).collect();
    for order in 1..levels.len() {
        for i in (order..levels.len()).rev() {
            let ratio = (hs[i - order] / hs[i]).powi(2 * order as i32);
            table[i] = (ratio * table[i] - table[i - 1]) / (ratio - 1.0);
        }
    }
    *table.last().unwrap()
}

/// Eigenvalues extrapolated from FD spectra at each grid size in `ns`.
pub fn fd_spectrum_extrapolated(profile: &CelerityProfile, mu: f64, num_eigs: usize, ns: &[usize]) -> Result<Vec<f64>> {
    let h = profile.height();
    let spectra: Vec<Vec<f64>> = ns.iter().map(|&n| fd_spectrum(profile, mu, num_eigs, n)).collect::<Result<_>>()?;
    Ok((0..num_eigs)
        .map(|k| {
            let levels: Vec<(f64, f64)> =
                ns.iter().zip(&spectra).map(|(&n, s)| (h / (n + 1) as f64, s[k])).collect();
            richardson(&levels)
        })
        .collect())
}

/// Outcome of [`compare`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rel_errors: Vec<f64>,
    pub worst_index: usize,
    pub worst_error: f64,
    pub passed: bool,
}

/// Per-index relative error of `solver` against `oracle`.
pub fn compare(solver: &[f64], oracle: &[f64], rel_tol: f64) -> Result<CompareReport> {
    if solver.len() != oracle.len() {
        return Err(Error::LengthMismatch { left: solver.len(), right: oracle.len() });
    }
    let rel_errors: Vec<f64> = solver
        .iter()
        .zip(oracle)
        .map(|(s, o)| if s == o { 0.0 } else { (s - o).abs() / o.abs().max(f64::MIN_POSITIVE) })
        .collect();
    let (worst_index, worst_error) =
        rel_errors.iter().enumerate().fold((0, 0.0), |(bi, be), (i, &e)| if e > be { (i, e) } else { (bi, be) });
    Ok(CompareReport { passed: worst_error <= rel_tol, rel_errors, worst_index, worst_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_profile_converges_to_closed_form() {
        let p = CelerityProfile::constant(1.0, PI).unwrap();
        let l = fd_spectrum(&p, 1.0, 1, 4096).unwrap();
        assert!((l[0] - 2.0).abs() < 5e-6);
        let p = CelerityProfile::constant(4.0, PI).unwrap();
        let l = fd_spectrum(&p, 1.0, 2, 4096).unwrap();
        assert!((l[1] - 20.0).abs() < 1e-4);
    }

    #[test]
    fn matrix_is_positive_and_bounded() {
        let p = CelerityProfile::piecewise_constant(vec![0.0, 1.0, 2.0], vec![1.0, 4.0]).unwrap();
        let fd = FdDiscretization::new(&p, 1.0, 200).unwrap();
        let (lo, hi) = fd.gershgorin();
        let first = fd.eigenvalue(1);
        let last = fd.eigenvalue(200);
        assert!(first > 1.0 && first >= lo && last <= hi);
        assert_eq!(fd.sturm_count(first - 1e-9), 0);
        assert_eq!(fd.sturm_count(last + 1e-6), 200);
    }

    #[test]
    fn sturm_count_matches_bisection_output() {
        let p = CelerityProfile::piecewise_constant(vec![0.0, 0.7, 2.0], vec![3.0, 1.0]).unwrap();
        let fd = FdDiscretization::new(&p, 2.0, 300).unwrap();
        for k in 1..=20 {
            let l = fd.eigenvalue(k);
            assert_eq!(fd.sturm_count(l - 1e-7 * l), k - 1);
            assert_eq!(fd.sturm_count(l + 1e-7 * l), k);
        }
    }

    #[test]
    fn richardson_improves_constant_case() {
        let p = CelerityProfile::constant(1.0, PI).unwrap();
        let ns = [1024, 2048, 4096];
        let raw = fd_spectrum(&p, 1.0, 1, 4096).unwrap()[0];
        let ext = fd_spectrum_extrapolated(&p, 1.0, 1, &ns).unwrap()[0];
        assert!((ext - 2.0).abs() * 10.0 <= (raw - 2.0).abs());
    }

    #[test]
    fn too_many_requested() {
        let p = CelerityProfile::constant(1.0, 1.0).unwrap();
        assert!(matches!(fd_spectrum(&p, 1.0, 11, 10), Err(Error::TooManyRequested { .. })));
    }

    #[test]
    fn eigenvectors_are_sines_and_orthogonal() {
        let p = CelerityProfile::constant(1.0, PI).unwrap();
        let fd = FdDiscretization::new(&p, 1.0, 4096).unwrap();
        let v1 = fd_eigenvector_of(&fd, fd.eigenvalue(1)).unwrap();
        let v2 = fd_eigenvector_of(&fd, fd.eigenvalue(2)).unwrap();
        let err = v1
            .nodes
            .iter()
            .zip(&v1.values)
            .map(|(y, v)| (v - (2.0 / PI).sqrt() * y.sin()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
        let dot: f64 = v1.values.iter().zip(&v2.values).map(|(a, b)| fd.h * a * b).sum();
        assert!(dot.abs() < 1e-8);
    }

    #[test]
    fn compare_reports_worst_index() {
        let a = [1.0, 2.0, 3.0];
        let r = compare(&a, &a, 1e-12).unwrap();
        assert!(r.passed && r.worst_error == 0.0);
        let r = compare(&[1.0, 2.1, 3.0], &a, 1e-3).unwrap();
        assert!(!r.passed && r.worst_index == 1);
        assert!(matches!(compare(&a, &a[..2], 1.0), Err(Error::LengthMismatch { left: 3, right: 2 })));
    }
}
