//! Synthetic benchmark: random JCI models are simulated, tested and fed to
//! pooled discovery (`acid_jci`) and to a per-regime baseline whose scores
//! are averaged over regimes (`merged_aci`).

mod pr;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use pr::{pr_curve_from, precision_gap, PrCurve, PrPoint};

use crate::acid::{
    ground_rules, AcidSolver, Feature, ProblemSpec, ProblemVariable, ScoredPrediction,
};
use crate::error::{input_err, Error, Result};
use crate::graph::{CausalGraph, DetRelationSet};
use crate::indep::{run_all_tests, statements_to_dstatements};
use crate::model::{
    column_ids, det_relations, random_jci_model, sample, Allocation, GeneratorConfig, PooledDataset,
};
use crate::statement::WeightedStatement;
use crate::varset::{VarId, VarSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AcidJci,
    MergedAci,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::AcidJci => "acid_jci",
            Method::MergedAci => "merged_aci",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s.trim() {
            "acid_jci" => Ok(Method::AcidJci),
            "merged_aci" => Ok(Method::MergedAci),
            other => input_err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// System variables per model.
    pub p: usize,
    /// Interventions (experimental regimes) per model.
    pub i: usize,
    pub n_models: usize,
    pub n_samples: usize,
    pub alpha: f64,
    /// Largest conditioning set; `None` uses all other observed variables.
    pub max_order: Option<usize>,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Latent confounders per model; `None` uses half of `p`.
    pub latents: Option<usize>,
    pub generator: GeneratorConfig,
    /// Worker threads; 0 picks the available parallelism.
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn new(p: usize, i: usize, n_models: usize) -> Self {
        ExperimentConfig {
            p,
            i,
            n_models,
            n_samples: 500,
            alpha: crate::indep::DEFAULT_ALPHA,
            max_order: None,
            seed: 0,
            methods: vec![Method::AcidJci, Method::MergedAci],
            latents: None,
            generator: GeneratorConfig::default(),
            threads: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n_models == 0 || self.n_samples == 0 {
            return input_err("p, n_models and n_samples must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return input_err("alpha must lie in (0, 1)");
        }
        if self.methods.is_empty() {
            return input_err("no methods selected");
        }
        if self.n_samples < self.i + 1 {
            return input_err("every regime needs at least one sample");
        }
        Ok(())
    }

    /// Conditioning-set cap for pooled tests over `1 + i + p` variables.
    pub fn pooled_max_order(&self) -> usize {
        self.max_order.unwrap_or(self.i + self.p - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionRecord {
    pub model: usize,
    pub method: Method,
    pub x: String,
    pub y: String,
    pub feature: Feature,
    pub confidence: f64,
    /// Whether the feature holds in the true graph.
    pub truth: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub model: usize,
    /// `None` when the model itself could not be generated or sampled.
    pub method: Option<Method>,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ModelStats {
    pub tests: usize,
    pub skipped_tests: usize,
    pub dropped_independences: usize,
    /// Regimes that contributed scores to the baseline, out of all regimes.
    pub baseline_regimes: Option<(usize, usize)>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ModelOutcome {
    pub model: usize,
    pub records: Vec<PredictionRecord>,
    pub failures: Vec<Failure>,
    pub stats: ModelStats,
    /// Wall-clock seconds per method.
    #[serde(skip)]
    pub seconds: Vec<(Method, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub models: Vec<ModelOutcome>,
}

impl ExperimentResult {
    pub fn records(&self) -> impl Iterator<Item = &PredictionRecord> {
        self.models.iter().flat_map(|m| m.records.iter())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Failure> {
        self.models.iter().flat_map(|m| m.failures.iter())
    }

    pub fn curve(&self, method: Method, feature: Feature) -> PrCurve {
        let recs: Vec<PredictionRecord> = self
            .records()
            .filter(|r| r.method == method)
            .cloned()
            .collect();
        pr_curve(&recs, feature)
    }
}

/// Precision-recall curve of the records of one feature class.
pub fn pr_curve(records: &[PredictionRecord], feature_class: Feature) -> PrCurve {
    let scored: Vec<(f64, bool)> = records
        .iter()
        .filter(|r| r.feature == feature_class)
        .map(|r| (r.confidence, r.truth))
        .collect();
    pr_curve_from(feature_class, &scored)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `stream` of model `index`.
pub fn derive_seed(seed: u64, index: usize, stream: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ index as u64) ^ stream)
}

fn remap(s: &WeightedStatement, ids: &[VarId]) -> Result<WeightedStatement> {
    let w: VarSet = s.w.iter().map(|c| ids[c]).collect();
    WeightedStatement::new(s.kind, ids[s.x], ids[s.y], w, s.weight, s.p_value)
}

fn ordered_system_pairs(systems: &[VarId]) -> Vec<(VarId, VarId)> {
    let mut out = Vec::new();
    for &a in systems {
        for &b in systems {
            if a != b {
                out.push((a, b));
            }
        }
    }
    out
}

/// Scores every ordered pair of `systems` from pooled tests over all
/// observed columns with the JCI rules.
pub fn acid_jci_scores(
    data: &PooledDataset,
    graph: &CausalGraph,
    ids: &[VarId],
    det: &DetRelationSet,
    max_order: usize,
    alpha: f64,
    stats: &mut ModelStats,
) -> Result<Vec<ScoredPrediction>> {
    let run = run_all_tests(data, VarSet::full(data.n_columns()), max_order, alpha)?;
    stats.tests += run.statements.len();
    stats.skipped_tests += run.skipped.len();
    let stmts = run
        .statements
        .iter()
        .map(|s| remap(s, ids))
        .collect::<Result<Vec<_>>>()?;
    let conv = statements_to_dstatements(&stmts, det);
    stats.dropped_independences += conv.dropped;
    let scope: VarSet = ids.iter().collect();
    let spec = ProblemSpec::new(ProblemVariable::from_graph(graph, scope), max_order)
        .jci(det.clone())
        .with_inputs(conv.dstatements);
    let problem = ground_rules(&spec)?;
    let systems: Vec<VarId> = graph
        .systems()
        .iter()
        .filter(|v| scope.contains(*v))
        .collect();
    AcidSolver::new(&problem).score(&ordered_system_pairs(&systems))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MergedScores {
    pub predictions: Vec<ScoredPrediction>,
    pub contributing_regimes: Vec<usize>,
    pub n_regimes: usize,
}

/// Runs discovery separately on the system columns of each regime (no dummy
/// variables, no JCI rules) and averages each feature's confidence over the
/// regimes that produced scores.
pub fn merged_aci_baseline(
    data: &PooledDataset,
    graph: &CausalGraph,
    ids: &[VarId],
    max_order: usize,
    alpha: f64,
    stats: &mut ModelStats,
) -> Result<MergedScores> {
    let sys_cols = data.system_columns();
    let sys_ids: Vec<VarId> = sys_cols.iter().map(|&c| ids[c]).collect();
    let pairs = ordered_system_pairs(&sys_ids);
    let regimes: Vec<usize> = {
        let mut r: Vec<usize> = data.regimes().to_vec();
        r.dedup();
        r.sort_unstable();
        r.dedup();
        r
    };
    let order = max_order.min(sys_ids.len().saturating_sub(2));
    let mut sums: BTreeMap<(VarId, VarId, Feature), f64> = BTreeMap::new();
    let mut contributing = Vec::new();
    for &r in &regimes {
        let sub = data.regime_subset(r, &sys_cols);
        let run = run_all_tests(&sub, VarSet::full(sub.n_columns()), order, alpha)?;
        stats.tests += run.statements.len();
        stats.skipped_tests += run.skipped.len();
        if run.statements.is_empty() {
            continue;
        }
        let stmts = run
            .statements
            .iter()
            .map(|s| remap(s, &sys_ids))
            .collect::<Result<Vec<_>>>()?;
        let conv = statements_to_dstatements(&stmts, &DetRelationSet::empty());
        let scope: VarSet = sys_ids.iter().collect();
        let spec = ProblemSpec::new(ProblemVariable::from_graph(graph, scope), order)
            .with_inputs(conv.dstatements);
        let problem = ground_rules(&spec)?;
        for s in AcidSolver::new(&problem).score(&pairs)? {
            *sums.entry((s.x, s.y, s.feature)).or_default() += s.confidence;
        }
        contributing.push(r);
    }
    let k = contributing.len() as f64;
    let predictions = if contributing.is_empty() {
        Vec::new()
    } else {
        pairs
            .iter()
            .flat_map(|&(x, y)| {
                [Feature::Ancestral, Feature::NonAncestral].map(|f| ScoredPrediction {
                    x,
                    y,
                    feature: f,
                    confidence: sums[&(x, y, f)] / k,
                })
            })
            .collect()
    };
    Ok(MergedScores {
        predictions,
        contributing_regimes: contributing,
        n_regimes: regimes.len(),
    })
}

fn run_model(cfg: &ExperimentConfig, index: usize) -> ModelOutcome {
    let mut out = ModelOutcome {
        model: index,
        ..Default::default()
    };
    let latents = cfg
        .latents
        .unwrap_or_else(|| crate::model::default_latents(cfg.p));
    let setup = random_jci_model(
        cfg.p,
        cfg.i,
        latents,
        derive_seed(cfg.seed, index, 1),
        &cfg.generator,
    )
    .and_then(|m| {
        let data = sample(
            &m,
            cfg.n_samples,
            &Allocation::Random,
            derive_seed(cfg.seed, index, 2),
        )?;
        Ok((m, data))
    });
    let (model, data) = match setup {
        Ok(x) => x,
        Err(e) => {
            out.failures.push(Failure {
                model: index,
                method: None,
                reason: e.to_string(),
            });
            return out;
        }
    };
    out.stats.warnings.extend(data.warnings.iter().cloned());
    let g = model.graph();
    let ids = column_ids(&model);
    for &method in &cfg.methods {
        let start = Instant::now();
        let scored = match method {
            Method::AcidJci => det_relations(&model).and_then(|det| {
                acid_jci_scores(
                    &data,
                    g,
                    &ids,
                    &det,
                    cfg.pooled_max_order(),
                    cfg.alpha,
                    &mut out.stats,
                )
            }),
            Method::MergedAci => merged_aci_baseline(
                &data,
                g,
                &ids,
                cfg.pooled_max_order(),
                cfg.alpha,
                &mut out.stats,
            )
            .map(|m| {
                out.stats.baseline_regimes = Some((m.contributing_regimes.len(), m.n_regimes));
                m.predictions
            }),
        };
        out.seconds.push((method, start.elapsed().as_secs_f64()));
        match scored {
            Ok(preds) => {
                for s in preds {
                    let anc = g.is_ancestor(s.x, s.y);
                    out.records.push(PredictionRecord {
                        model: index,
                        method,
                        x: g.name(s.x).to_string(),
                        y: g.name(s.y).to_string(),
                        feature: s.feature,
                        confidence: s.confidence,
                        truth: if s.feature == Feature::Ancestral {
                            anc
                        } else {
                            !anc
                        },
                    });
                }
            }
            Err(e) => out.failures.push(Failure {
                model: index,
                method: Some(method),
                reason: e.to_string(),
            }),
        }
    }
    out
}

/// Runs every model of the experiment. Models run in parallel; results are
/// ordered by model index and do not depend on the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let threads = if cfg.threads == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        cfg.threads
    }
    .min(cfg.n_models);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<ModelOutcome>>> = Mutex::new(vec![None; cfg.n_models]);
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= cfg.n_models {
                    break;
                }
                let outcome = run_model(cfg, k);
                slots.lock().expect("no poisoned lock")[k] = Some(outcome);
            });
        }
    });
    let models = slots
        .into_inner()
        .map_err(|_| Error::Input("worker panicked".into()))?
        .into_iter()
        .map(|m| m.expect("every model ran"))
        .collect();
    Ok(ExperimentResult {
        config: cfg.clone(),
        models,
    })
}

fn fmt_conf(c: f64) -> String {
    if c == f64::INFINITY {
        "inf".into()
    } else if c == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{c}")
    }
}

pub fn predictions_csv(result: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "model",
        "method",
        "X",
        "Y",
        "feature",
        "confidence",
        "truth",
    ])?;
    for r in result.records() {
        w.write_record([
            r.model.to_string(),
            r.method.as_str().to_string(),
            r.x.clone(),
            r.y.clone(),
            r.feature.as_str().to_string(),
            fmt_conf(r.confidence),
            r.truth.to_string(),
        ])?;
    }
    Ok(
        String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
            .expect("utf-8 csv"),
    )
}

pub fn pr_csv(result: &ExperimentResult, feature: Feature) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "recall", "precision", "threshold"])?;
    for &m in &result.config.methods {
        for p in result.curve(m, feature).points {
            w.write_record([
                m.as_str().to_string(),
                format!("{}", p.recall),
                format!("{}", p.precision),
                fmt_conf(p.threshold),
            ])?;
        }
    }
    Ok(
        String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
            .expect("utf-8 csv"),
    )
}

#[derive(Serialize)]
struct MethodReport {
    method: Method,
    models_scored: usize,
    failures: usize,
    records: usize,
    ancestral_positives: usize,
    nonancestral_positives: usize,
    recall_defined: bool,
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a ExperimentConfig,
    model_failures: Vec<&'a Failure>,
    methods: Vec<MethodReport>,
    tests: usize,
    skipped_tests: usize,
    dropped_independences: usize,
    baseline_regimes_contributing: usize,
    baseline_regimes_total: usize,
    warnings: Vec<String>,
    failures: Vec<&'a Failure>,
}

pub fn report_json(result: &ExperimentResult) -> Result<String> {
    let failures: Vec<&Failure> = result.failures().collect();
    let methods = result
        .config
        .methods
        .iter()
        .map(|&m| {
            let anc = result.curve(m, Feature::Ancestral);
            let non = result.curve(m, Feature::NonAncestral);
            let failed = failures
                .iter()
                .filter(|f| f.method.is_none_or(|x| x == m))
                .count();
            MethodReport {
                method: m,
                models_scored: result.config.n_models - failed,
                failures: failed,
                records: result.records().filter(|r| r.method == m).count(),
                ancestral_positives: anc.positives,
                nonancestral_positives: non.positives,
                recall_defined: anc.recall_defined() && non.recall_defined(),
            }
        })
        .collect();
    let sum =
        |f: fn(&ModelStats) -> usize| result.models.iter().map(|m| f(&m.stats)).sum::<usize>();
    let report = Report {
        config: &result.config,
        model_failures: failures
            .iter()
            .copied()
            .filter(|f| f.method.is_none())
            .collect(),
        methods,
        tests: sum(|s| s.tests),
        skipped_tests: sum(|s| s.skipped_tests),
        dropped_independences: sum(|s| s.dropped_independences),
        baseline_regimes_contributing: sum(|s| s.baseline_regimes.map_or(0, |b| b.0)),
        baseline_regimes_total: sum(|s| s.baseline_regimes.map_or(0, |b| b.1)),
        warnings: result
            .models
            .iter()
            .flat_map(|m| {
                m.stats
                    .warnings
                    .iter()
                    .map(move |w| format!("model {}: {w}", m.model))
            })
            .collect(),
        failures,
    };
    Ok(serde_json::to_string_pretty(&report)?)
}

pub fn timing_json(result: &ExperimentResult) -> Result<String> {
    let mut per_method: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for m in &result.models {
        for &(method, s) in &m.seconds {
            per_method.entry(method.as_str()).or_default().push(s);
        }
    }
    let summary: BTreeMap<&str, serde_json::Value> = per_method
        .into_iter()
        .map(|(k, v)| {
            let total: f64 = v.iter().sum();
            let max = v.iter().copied().fold(0.0, f64::max);
            (k, serde_json::json!({ "total_seconds": total, "max_seconds": max, "per_model_seconds": v }))
        })
        .collect();
    Ok(serde_json::to_string_pretty(&summary)?)
}

/// Writes `predictions.csv`, `pr_ancestral.csv`, `pr_nonancestral.csv`,
/// `report.json` and `timing.json` into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("predictions.csv"), predictions_csv(result)?)?;
    std::fs::write(
        dir.join("pr_ancestral.csv"),
        pr_csv(result, Feature::Ancestral)?,
    )?;
    std::fs::write(
        dir.join("pr_nonancestral.csv"),
        pr_csv(result, Feature::NonAncestral)?,
    )?;
    std::fs::write(dir.join("report.json"), report_json(result)?)?;
    std::fs::write(dir.join("timing.json"), timing_json(result)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_per_model_and_stream() {
        assert_ne!(derive_seed(1, 0, 1), derive_seed(1, 1, 1));
        assert_ne!(derive_seed(1, 0, 1), derive_seed(1, 0, 2));
        assert_eq!(derive_seed(7, 3, 1), derive_seed(7, 3, 1));
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::new(3, 1, 1);
        assert!(c.validate().is_ok());
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            methods: vec![],
            ..ExperimentConfig::new(3, 1, 1)
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::AcidJci, Method::MergedAci] {
            assert_eq!(Method::parse(m.as_str()).unwrap(), m);
        }
        assert!(Method::parse("hej").is_err());
    }
}
