//! Piecewise-constant approximation of bounded-variation profiles and the
//! convergence of fiber eigenpairs along the approximation ladder.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fiber::{eigenpair, FiberEigenpair, GridSpec};
use crate::profile::CelerityProfile;
use crate::report::{g12, Csv};

/// Sample `profile` at the left endpoints of `n` equal pieces.
///
/// Partition points within `1e-12 H` of a profile knot are moved onto it,
/// so commensurate layered targets are reproduced exactly. Left-endpoint
/// sampling never increases the total variation or the range.
pub fn approximate_pc(profile: &CelerityProfile, n: usize) -> Result<CelerityProfile> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one piece".into()));
    }
    let h = profile.height();
    let knots = profile.knots();
    let tol = 1e-12 * h;
    let mut bp: Vec<f64> = (0..=n)
        .map(|i| {
            let y = h * i as f64 / n as f64;
            let j = knots.partition_point(|&k| k < y);
            [j.checked_sub(1), Some(j)]
                .into_iter()
                .flatten()
                .filter_map(|j| knots.get(j).copied())
                .find(|&k| (k - y).abs() <= tol)
                .unwrap_or(y)
        })
        .collect();
    bp[0] = 0.0;
    bp[n] = h;
    let values = bp[..n].iter().map(|&y| profile.value(y)).collect();
    CelerityProfile::piecewise_constant(bp, values)
}

/// `sup |a - b|` over the dense samples of both profiles, taking one-sided
/// values at every sample.
pub fn sup_distance(a: &CelerityProfile, b: &CelerityProfile) -> f64 {
    let mut ys = a.dense_sample();
    ys.extend(b.dense_sample());
    ys.iter()
        .map(|&y| (a.value(y) - b.value(y)).abs().max((a.value_left(y) - b.value_left(y)).abs()))
        .fold(0.0, f64::max)
}

/// Approximants of one target at several resolutions.
#[derive(Debug, Clone)]
pub struct ApproximationLadder {
    pub ns: Vec<usize>,
    pub approximants: Vec<CelerityProfile>,
    pub sup_errors: Vec<f64>,
    pub tvs: Vec<f64>,
}

impl ApproximationLadder {
    pub fn new(target: &CelerityProfile, ns: &[usize]) -> Result<Self> {
        let approximants: Vec<CelerityProfile> =
            ns.par_iter().map(|&n| approximate_pc(target, n)).collect::<Result<_>>()?;
        let sup_errors = approximants.par_iter().map(|a| sup_distance(a, target)).collect();
        let tvs = approximants.iter().map(CelerityProfile::total_variation).collect();
        Ok(Self { ns: ns.to_vec(), approximants, sup_errors, tvs })
    }
}

/// One rung of [`eigenpair_convergence`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub lambda_n: f64,
    pub err_lambda: f64,
    pub err_u_sup: f64,
    pub err_flux_sup: f64,
}

/// Eigenpair errors of the approximants against the target.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub mu: f64,
    pub ell: usize,
    pub lambda: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut csv = Csv::new(&["n", "lambda_n", "err_lambda", "err_u_sup", "err_flux_sup"]);
        for r in &self.rows {
            csv.row(&[r.n.to_string(), g12(r.lambda_n), g12(r.err_lambda), g12(r.err_u_sup), g12(r.err_flux_sup)]);
        }
        csv.finish()
    }

    /// Empirical order of each error column, from a least-squares fit of
    /// `ln err` against `ln n`.
    pub fn observed_orders(&self) -> [f64; 3] {
        let ns: Vec<f64> = self.rows.iter().map(|r| r.n as f64).collect();
        let col = |f: fn(&ConvergenceRow) -> f64| -> f64 {
            -crate::diagnostics::log_log_slope(&ns, &self.rows.iter().map(f).collect::<Vec<_>>())
        };
        [col(|r| r.err_lambda), col(|r| r.err_u_sup), col(|r| r.err_flux_sup)]
    }
}

/// Solve the `ell`-th eigenpair of each approximant and compare it with the
/// target's on a common grid.
///
/// The grid is `grid_n` equal intervals plus every approximant breakpoint.
/// All eigenpairs share the sign convention `u'(0) > 0`, and the index
/// `ell` is certified by the phase count on each approximant.
pub fn eigenpair_convergence(
    profile: &CelerityProfile,
    mu: f64,
    ell: usize,
    ns: &[usize],
    grid_n: usize,
) -> Result<ConvergenceTable> {
    let ladder = ApproximationLadder::new(profile, ns)?;
    let h = profile.height();
    let mut pts: Vec<f64> = (0..=grid_n.max(2)).map(|i| h * i as f64 / grid_n.max(2) as f64).collect();
    for a in &ladder.approximants {
        pts.extend(a.knots());
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * h);
    let spec = GridSpec::Points(pts);

    let target = eigenpair(profile, mu, ell, &spec)?;
    let rows = ladder
        .approximants
        .par_iter()
        .zip(ns.par_iter())
        .map(|(approx, &n)| {
            let e = eigenpair(approx, mu, ell, &spec)?;
            let (err_u_sup, err_flux_sup) = sup_errors(&target, &e);
            Ok(ConvergenceRow {
                n,
                lambda_n: e.lambda(),
                err_lambda: (e.lambda() - target.lambda()).abs(),
                err_u_sup,
                err_flux_sup,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ConvergenceTable { mu, ell, lambda: target.lambda(), rows })
}

fn sup_errors(target: &FiberEigenpair, other: &FiberEigenpair) -> (f64, f64) {
    target.grid().iter().zip(target.u()).zip(target.flux()).fold((0.0f64, 0.0f64), |(eu, ef), ((&y, &u), &f)| {
        let (uo, fo) = other.state_at(y);
        (eu.max((u - uo).abs()), ef.max((f - fo).abs()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{Interpolation, Preset};

    #[test]
    fn constant_is_reproduced() {
        let c = CelerityProfile::constant(2.5, 1.0).unwrap();
        for n in [1, 3, 10] {
            let a = approximate_pc(&c, n).unwrap();
            assert!(a.as_piecewise_constant().unwrap().values().iter().all(|&v| v == 2.5));
            assert_eq!(sup_distance(&a, &c), 0.0);
        }
    }

    #[test]
    fn ramp_two_pieces() {
        let r = CelerityProfile::preset(Preset::LinearRamp { start: 1.0, end: 2.0 }, 1.0).unwrap();
        let a = approximate_pc(&r, 2).unwrap();
        assert_eq!(a.as_piecewise_constant().unwrap().values(), &[1.0, 1.5]);
        assert!((a.total_variation() - 0.5).abs() < 1e-15);
        assert!((sup_distance(&a, &r) - 0.5).abs() < 1e-3);
    }

    #[test]
    fn commensurate_layers_reproduced() {
        let t = CelerityProfile::piecewise_constant(vec![0.0, 0.3, 1.0], vec![1.0, 3.0]).unwrap();
        let a = approximate_pc(&t, 10).unwrap();
        assert_eq!(sup_distance(&a, &t), 0.0);
        assert!((a.total_variation() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ramp_sup_error_halves_when_n_quadruples() {
        let r = CelerityProfile::preset(Preset::LinearRamp { start: 1.0, end: 2.0 }, 1.0).unwrap();
        let ladder = ApproximationLadder::new(&r, &[4, 16, 64]).unwrap();
        for w in ladder.sup_errors.windows(2) {
            assert!(w[1] <= 0.5 * w[0]);
        }
        assert!(ladder.tvs.iter().all(|&tv| tv <= 1.0 + 1e-15));
    }

    #[test]
    fn sampled_step_range_kept() {
        let s = CelerityProfile::sampled(vec![0.0, 0.25, 0.6, 1.0], vec![2.0, 0.5, 4.0, 1.0], Interpolation::Step)
            .unwrap();
        for n in [1, 2, 5, 7, 40] {
            let a = approximate_pc(&s, n).unwrap();
            assert!(a.c_min() >= s.c_min() && a.c_max() <= s.c_max());
            assert!(a.total_variation() <= s.total_variation() + 1e-14);
        }
    }

    #[test]
    fn constant_target_has_zero_errors() {
        let c = CelerityProfile::constant(1.0, std::f64::consts::PI).unwrap();
        let t = eigenpair_convergence(&c, 1.0, 2, &[4, 16], 64).unwrap();
        for r in &t.rows {
            assert!(r.err_lambda < 1e-12 && r.err_u_sup < 1e-10 && r.err_flux_sup < 1e-10, "{r:?}");
        }
        assert!(t.to_csv().starts_with("n,lambda_n,err_lambda,err_u_sup,err_flux_sup\n"));
    }
}
