use nalgebra::{DMatrix, DVector};

use super::design::validate_design;
use super::scm::JciScm;
use crate::error::Result;
use crate::graph::{enumerate_d_statements, DetRelationSet};
use crate::indep::partial_correlation_from_cov;
use crate::statement::DStatement;
use crate::varset::VarId;

/// The deterministic relations of a model: the regime determines each
/// intervention variable, and the intervention variables jointly determine
/// the regime when the design says so.
pub fn det_relations(model: &JciScm) -> Result<DetRelationSet> {
    let report = validate_design(model.design())?;
    Ok(DetRelationSet::jci(
        model.regime(),
        model.graph().interventions(),
        report.interventions_determine_regime,
    ))
}

/// Population D-separation facts over the observed variables of `model`.
pub fn oracle_independences(model: &JciScm, max_order: usize) -> Result<Vec<DStatement>> {
    let det = det_relations(model)?;
    enumerate_d_statements(model.graph(), &det, model.graph().observed(), max_order)
}

/// Exact first and second moments of every model variable, indexed by id.
#[derive(Clone, Debug)]
pub struct Moments {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl Moments {
    pub fn partial_correlation(&self, x: VarId, y: VarId, w: &[VarId]) -> Result<f64> {
        partial_correlation_from_cov(&self.cov, x, y, w)
    }
}

/// Moments within one regime: `X = (I - B)^-1 (c_r + E)`.
pub fn regime_moments(model: &JciScm, r: usize) -> Moments {
    let g = model.graph();
    let n = g.n();
    let mut b = DMatrix::<f64>::zeros(n, n);
    let mut c = DVector::<f64>::zeros(n);
    let mut noise = DVector::<f64>::zeros(n);
    for v in 0..n {
        match model.mechanism(v) {
            Some(m) => {
                for &(p, coef) in &m.coefficients {
                    b[(v, p)] = coef;
                }
                noise[v] = m.noise_var;
            }
            None => c[v] = model.dummy_value(v, r),
        }
    }
    let a = (DMatrix::<f64>::identity(n, n) - b)
        .try_inverse()
        .expect("I - B is unit triangular up to permutation");
    let mean = &a * c;
    let cov = &a * DMatrix::from_diagonal(&noise) * a.transpose();
    Moments { mean, cov }
}

/// Moments of the pooled mixture over regimes weighted by the design
/// probabilities.
pub fn pooled_moments(model: &JciScm) -> Moments {
    let n = model.graph().n();
    let mut mean = DVector::<f64>::zeros(n);
    let mut second = DMatrix::<f64>::zeros(n, n);
    for (r, &p) in model.design().regime_probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let m = regime_moments(model, r);
        second += (&m.cov + &m.mean * m.mean.transpose()) * p;
        mean += &m.mean * p;
    }
    let cov = second - &mean * mean.transpose();
    Moments { mean, cov }
}
