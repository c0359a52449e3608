//! Conditional-independence testing on pooled data and the conversion of the
//! weighted results into sound d-separation and d-connection statements.

mod convert;

pub use convert::{statements_to_dstatements, Conversion};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{input_err, Error, Result};
use crate::model::PooledDataset;
use crate::statement::{TestKind, WeightedStatement};
use crate::varset::{VarId, VarSet};

pub const DEFAULT_ALPHA: f64 = 0.05;
/// Weight assigned when a p-value underflows to zero.
pub const WEIGHT_CAP: f64 = 1e6;
const P_FLOOR: f64 = 1e-300;
const CLAMP_EPS: f64 = 1e-12;
const PIVOT_TOL: f64 = 1e-10;

/// Sample covariance (denominator `N - 1`) of the given columns.
pub fn sample_covariance(data: &PooledDataset, cols: &[usize]) -> DMatrix<f64> {
    let n = data.n_rows();
    let k = cols.len();
    let means: Vec<f64> = cols
        .iter()
        .map(|&c| data.column(c).iter().sum::<f64>() / n as f64)
        .collect();
    let mut cov = DMatrix::<f64>::zeros(k, k);
    for a in 0..k {
        let ca = data.column(cols[a]);
        for b in a..k {
            let cb = data.column(cols[b]);
            let s: f64 = ca
                .iter()
                .zip(cb)
                .map(|(u, v)| (u - means[a]) * (v - means[b]))
                .sum();
            let v = s / (n as f64 - 1.0);
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    cov
}

/// Partial correlation of `x` and `y` given `w` from a covariance matrix,
/// through the Schur complement of the conditioning block. Not clamped.
pub fn partial_correlation_from_cov(
    cov: &DMatrix<f64>,
    x: usize,
    y: usize,
    w: &[usize],
) -> Result<f64> {
    let idx: Vec<usize> = [x, y].iter().chain(w).copied().collect();
    let sd: Vec<f64> = idx.iter().map(|&i| cov[(i, i)].sqrt()).collect();
    if let Some(pos) = sd.iter().position(|s| !s.is_finite() || *s <= 0.0) {
        return Err(Error::Degenerate(format!(
            "variable {} has zero variance",
            idx[pos]
        )));
    }
    let c = |a: usize, b: usize| cov[(idx[a], idx[b])] / (sd[a] * sd[b]);
    let k = w.len();
    if k == 0 {
        return Ok(c(0, 1).clamp(-1.0, 1.0));
    }
    let cww = DMatrix::from_fn(k, k, |a, b| c(a + 2, b + 2));
    let chol = cww
        .cholesky()
        .filter(|ch| ch.l_dirty().diagonal().iter().all(|d| d * d > PIVOT_TOL))
        .ok_or_else(|| Error::Degenerate("singular conditioning covariance".into()))?;
    let cwx = DVector::from_fn(k, |a, _| c(a + 2, 0));
    let cwy = DVector::from_fn(k, |a, _| c(a + 2, 1));
    let a = chol.solve(&cwx);
    let b = chol.solve(&cwy);
    let sxx = 1.0 - cwx.dot(&a);
    let syy = 1.0 - cwy.dot(&b);
    let sxy = c(0, 1) - cwx.dot(&b);
    if sxx <= PIVOT_TOL || syy <= PIVOT_TOL {
        return Err(Error::Degenerate(
            "an endpoint is a linear function of the conditioning set".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Sample partial correlation of columns `x` and `y` given `w`, clamped to
/// `[-1 + 1e-12, 1 - 1e-12]`.
pub fn partial_correlation(data: &PooledDataset, x: usize, y: usize, w: &[usize]) -> Result<f64> {
    check_columns(data.n_columns(), x, y, w)?;
    if data.n_rows() <= w.len() + 3 {
        return Err(Error::NotTestable(format!(
            "{} rows for conditioning set of size {}",
            data.n_rows(),
            w.len()
        )));
    }
    let cols: Vec<usize> = [x, y].iter().chain(w).copied().collect();
    let cov = sample_covariance(data, &cols);
    let local: Vec<usize> = (2..cols.len()).collect();
    Ok(clamp(partial_correlation_from_cov(&cov, 0, 1, &local)?))
}

fn clamp(r: f64) -> f64 {
    r.clamp(-1.0 + CLAMP_EPS, 1.0 - CLAMP_EPS)
}

fn check_columns(n: usize, x: usize, y: usize, w: &[usize]) -> Result<()> {
    let mut seen = VarSet::EMPTY;
    for &c in [x, y].iter().chain(w) {
        if c >= n {
            return input_err(format!("column {c} out of range"));
        }
        if seen.contains(c) {
            return input_err(format!("column {c} used twice"));
        }
        seen.insert(c);
    }
    Ok(())
}

/// Fisher z-test of zero partial correlation: returns the two-sided p-value
/// and the decision at level `alpha`.
pub fn fisher_z_test(r: f64, n: usize, order: usize, alpha: f64) -> Result<(f64, TestKind)> {
    if n <= order + 3 {
        return Err(Error::NotTestable(format!(
            "N = {n} is too small for order {order}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return input_err("alpha must lie in (0, 1)");
    }
    if !r.is_finite() || r.abs() >= 1.0 {
        let r = if r.is_finite() {
            clamp(r)
        } else {
            return input_err("correlation is not finite");
        };
        return fisher_z_test(r, n, order, alpha);
    }
    let z = ((n - order - 3) as f64).sqrt() * r.atanh();
    let p = erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0);
    let kind = if p > alpha {
        TestKind::Independent
    } else {
        TestKind::Dependent
    };
    Ok((p, kind))
}

/// `|ln p - ln alpha|`, with `p` floored at 1e-300 and `p = 0` mapped to
/// [`WEIGHT_CAP`].
pub fn weight_frequentist(p_value: f64, alpha: f64) -> Result<f64> {
    weight_frequentist_capped(p_value, alpha, WEIGHT_CAP)
}

pub fn weight_frequentist_capped(p_value: f64, alpha: f64, cap: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_value) {
        return input_err(format!("p-value {p_value} outside [0, 1]"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return input_err("alpha must lie in (0, 1)");
    }
    if p_value == 0.0 {
        return Ok(cap);
    }
    Ok((p_value.max(P_FLOOR).ln() - alpha.ln()).abs().min(cap))
}

/// A conditional-independence test bound to one dataset.
pub trait CiTest {
    fn n_columns(&self) -> usize;
    /// p-value of the null hypothesis `x ⊥⊥ y | w`.
    fn p_value(&self, x: usize, y: usize, w: &[usize]) -> Result<f64>;
}

/// Partial correlation with Fisher's z-transform. The full sample covariance
/// is computed once.
pub struct FisherZ {
    cov: DMatrix<f64>,
    n: usize,
}

impl FisherZ {
    pub fn new(data: &PooledDataset) -> Self {
        let cols: Vec<usize> = (0..data.n_columns()).collect();
        FisherZ {
            cov: sample_covariance(data, &cols),
            n: data.n_rows(),
        }
    }

    pub fn partial_correlation(&self, x: usize, y: usize, w: &[usize]) -> Result<f64> {
        check_columns(self.cov.nrows(), x, y, w)?;
        Ok(clamp(partial_correlation_from_cov(&self.cov, x, y, w)?))
    }
}

impl CiTest for FisherZ {
    fn n_columns(&self) -> usize {
        self.cov.nrows()
    }

    fn p_value(&self, x: usize, y: usize, w: &[usize]) -> Result<f64> {
        if self.n <= w.len() + 3 {
            return Err(Error::NotTestable(format!(
                "N = {} is too small for order {}",
                self.n,
                w.len()
            )));
        }
        let r = self.partial_correlation(x, y, w)?;
        // alpha only affects the decision, not the p-value
        Ok(fisher_z_test(r, self.n, w.len(), DEFAULT_ALPHA)?.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkipRecord {
    pub x: VarId,
    pub y: VarId,
    pub w: Vec<VarId>,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TestRun {
    pub statements: Vec<WeightedStatement>,
    pub skipped: Vec<SkipRecord>,
}

/// Tests every pair of `scope` against every conditioning subset of the rest
/// of `scope` of size at most `max_order`, with partial correlation and
/// Fisher's z. Column indices double as variable ids.
pub fn run_all_tests(
    data: &PooledDataset,
    scope: VarSet,
    max_order: usize,
    alpha: f64,
) -> Result<TestRun> {
    run_all_tests_with(&FisherZ::new(data), scope, max_order, alpha)
}

pub fn run_all_tests_with(
    test: &dyn CiTest,
    scope: VarSet,
    max_order: usize,
    alpha: f64,
) -> Result<TestRun> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return input_err("alpha must lie in (0, 1)");
    }
    if scope.iter().any(|c| c >= test.n_columns()) {
        return input_err("scope references a missing column");
    }
    let mut run = TestRun::default();
    let members: Vec<VarId> = scope.iter().collect();
    for (i, &x) in members.iter().enumerate() {
        for &y in &members[i + 1..] {
            for w in scope.without(x).without(y).subsets_up_to(max_order) {
                let wl: Vec<VarId> = w.iter().collect();
                match test.p_value(x, y, &wl) {
                    Ok(p) => {
                        let kind = if p > alpha {
                            TestKind::Independent
                        } else {
                            TestKind::Dependent
                        };
                        let weight = weight_frequentist(p, alpha)?;
                        run.statements.push(WeightedStatement::new(
                            kind,
                            x,
                            y,
                            w,
                            weight,
                            Some(p),
                        )?);
                    }
                    Err(e @ (Error::Degenerate(_) | Error::NotTestable(_))) => {
                        run.skipped.push(SkipRecord {
                            x,
                            y,
                            w: wl,
                            reason: e.to_string(),
                        })
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(run)
}
