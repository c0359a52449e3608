use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::design::ExperimentalDesignMatrix;
use crate::error::{input_err, Result};
use crate::graph::{CausalGraph, DetRelationSet, GraphFile, VarKind, Variable};
use crate::varset::{VarId, VarSet};

/// Linear structural equation `X = Σ coef·parent + E`, `E ~ N(0, noise_var)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mechanism {
    /// `(parent id, coefficient)` sorted by parent id.
    pub coefficients: Vec<(VarId, f64)>,
    pub noise_var: f64,
}

impl Mechanism {
    pub fn coefficient(&self, parent: VarId) -> f64 {
        self.coefficients
            .iter()
            .find(|(p, _)| *p == parent)
            .map_or(0.0, |(_, c)| *c)
    }
}

/// Linear-Gaussian JCI model. The regime takes the values `0..n_regimes`,
/// intervention node `k` (in id order) takes the values of design column `k`,
/// and every system or latent node has a [`Mechanism`].
#[derive(Clone, Debug, PartialEq)]
pub struct JciScm {
    graph: CausalGraph,
    design: ExperimentalDesignMatrix,
    mechanisms: Vec<Option<Mechanism>>,
}

impl JciScm {
    pub fn new(
        graph: CausalGraph,
        design: ExperimentalDesignMatrix,
        mut mechanisms: Vec<Option<Mechanism>>,
    ) -> Result<Self> {
        if !graph.is_jci() {
            return input_err("a JCI model needs a JCI graph");
        }
        let r = graph.regime().expect("JCI graphs have a regime");
        let ints = graph.interventions();
        if ints.len() != design.n_columns() {
            return input_err(format!(
                "graph has {} intervention variables but the design has {} columns",
                ints.len(),
                design.n_columns()
            ));
        }
        for i in ints {
            if !graph.has_edge(r, i) {
                return input_err(format!(
                    "intervention variable {} is not a child of the regime",
                    graph.name(i)
                ));
            }
        }
        if ints.is_empty() && !graph.children(r).is_empty() {
            return input_err("the regime may only act through intervention variables");
        }
        if mechanisms.len() != graph.n() {
            return input_err("one mechanism slot per variable is required");
        }
        for (v, slot) in mechanisms.iter_mut().enumerate() {
            let kind = graph.kind(v);
            match (slot, kind.is_dummy()) {
                (Some(_), true) => {
                    return input_err(format!(
                        "dummy variable {} cannot have a mechanism",
                        graph.name(v)
                    ))
                }
                (None, false) => {
                    return input_err(format!("variable {} has no mechanism", graph.name(v)))
                }
                (None, true) => {}
                (Some(m), false) => {
                    m.coefficients.sort_by_key(|(p, _)| *p);
                    let listed: VarSet = m.coefficients.iter().map(|(p, _)| *p).collect();
                    if listed != graph.parents(v) || listed.len() != m.coefficients.len() {
                        return input_err(format!(
                            "mechanism of {} does not match its parents",
                            graph.name(v)
                        ));
                    }
                    if m.coefficients.iter().any(|(_, c)| !c.is_finite())
                        || m.noise_var.is_nan()
                        || m.noise_var < 0.0
                    {
                        return input_err(format!(
                            "mechanism of {} has invalid parameters",
                            graph.name(v)
                        ));
                    }
                }
            }
        }
        Ok(JciScm {
            graph,
            design,
            mechanisms,
        })
    }

    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn design(&self) -> &ExperimentalDesignMatrix {
        &self.design
    }

    pub fn mechanism(&self, v: VarId) -> Option<&Mechanism> {
        self.mechanisms[v].as_ref()
    }

    pub fn regime(&self) -> VarId {
        self.graph.regime().expect("JCI graphs have a regime")
    }

    /// Intervention node ids in design-column order.
    pub fn intervention_ids(&self) -> Vec<VarId> {
        self.graph.interventions().iter().collect()
    }

    /// Observed variables in dataset column order: regime, interventions,
    /// then system variables, each group by id.
    pub fn observed_columns(&self) -> Vec<VarId> {
        let mut cols = vec![self.regime()];
        cols.extend(self.graph.interventions().iter());
        cols.extend(self.graph.systems().iter());
        cols
    }

    /// Value of a dummy variable in regime `r`.
    pub fn dummy_value(&self, v: VarId, r: usize) -> f64 {
        if v == self.regime() {
            return r as f64;
        }
        let col = self
            .graph
            .interventions()
            .iter()
            .position(|i| i == v)
            .expect("not a dummy variable");
        self.design.value(r, col)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            graph: GraphFile::from_graph(&self.graph, &DetRelationSet::empty()),
            design: self.design.clone(),
            mechanisms: self
                .mechanisms
                .iter()
                .enumerate()
                .filter_map(|(v, m)| {
                    m.as_ref().map(|m| MechanismEntry {
                        var: v,
                        mechanism: m.clone(),
                    })
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("models always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.into_model()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MechanismEntry {
    pub var: VarId,
    #[serde(flatten)]
    pub mechanism: Mechanism,
}

/// JSON form of a [`JciScm`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub graph: GraphFile,
    pub design: ExperimentalDesignMatrix,
    pub mechanisms: Vec<MechanismEntry>,
}

impl ModelFile {
    pub fn into_model(self) -> Result<JciScm> {
        let (graph, _) = self.graph.into_graph()?;
        let mut mechanisms = vec![None; graph.n()];
        for e in self.mechanisms {
            if e.var >= graph.n() {
                return input_err(format!("mechanism for unknown variable {}", e.var));
            }
            mechanisms[e.var] = Some(e.mechanism);
        }
        JciScm::new(graph, self.design, mechanisms)
    }
}

/// Parameters of [`random_jci_model`]. Ranges are magnitudes; signs are
/// drawn uniformly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub edge_prob: f64,
    pub coef_range: (f64, f64),
    pub noise_var_range: (f64, f64),
    pub intervention_coef_range: (f64, f64),
    pub latent_coef_range: (f64, f64),
    pub targets_per_intervention: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            edge_prob: 0.5,
            coef_range: (0.5, 1.5),
            noise_var_range: (0.5, 1.5),
            intervention_coef_range: (0.5, 2.0),
            latent_coef_range: (0.5, 1.5),
            targets_per_intervention: 1,
        }
    }
}

impl GeneratorConfig {
    fn validate(&self, p: usize) -> Result<()> {
        let ok_range =
            |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi;
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return input_err("edge probability must lie in [0, 1]");
        }
        for (name, r) in [
            ("coef_range", self.coef_range),
            ("noise_var_range", self.noise_var_range),
            ("intervention_coef_range", self.intervention_coef_range),
            ("latent_coef_range", self.latent_coef_range),
        ] {
            if !ok_range(r) {
                return input_err(format!("{name} must satisfy 0 <= lo <= hi"));
            }
        }
        if self.targets_per_intervention == 0 || self.targets_per_intervention > p {
            return input_err(format!("targets_per_intervention must lie in 1..={p}"));
        }
        Ok(())
    }
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn signed(rng: &mut impl Rng, range: (f64, f64)) -> f64 {
    let m = uniform(rng, range);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Default number of latent confounders for `p` system variables.
pub fn default_latents(p: usize) -> usize {
    p / 2
}

/// Random linear-Gaussian JCI model with `p` system variables, `i` soft
/// interventions under indicator coding and `latent_count` latent
/// confounders. Ids: `R = 0`, `I1..Ii = 1..=i`, then `X1..Xp`, then latents.
pub fn random_jci_model(
    p: usize,
    i: usize,
    latent_count: usize,
    seed: u64,
    cfg: &GeneratorConfig,
) -> Result<JciScm> {
    if p == 0 {
        return input_err("at least one system variable is required");
    }
    if latent_count > 0 && p < 2 {
        return input_err("latent confounders need at least two system variables");
    }
    if 1 + i + p + latent_count > crate::varset::MAX_VARS {
        return input_err("too many variables");
    }
    cfg.validate(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let r: VarId = 0;
    let ints: Vec<VarId> = (1..=i).collect();
    let sys: Vec<VarId> = (i + 1..=i + p).collect();
    let lats: Vec<VarId> = (i + p + 1..=i + p + latent_count).collect();

    let mut variables = vec![Variable {
        id: r,
        name: "R".into(),
        kind: VarKind::Regime,
    }];
    variables.extend(ints.iter().enumerate().map(|(k, &id)| Variable {
        id,
        name: format!("I{}", k + 1),
        kind: VarKind::Intervention,
    }));
    variables.extend(sys.iter().enumerate().map(|(k, &id)| Variable {
        id,
        name: format!("X{}", k + 1),
        kind: VarKind::System,
    }));
    variables.extend(lats.iter().enumerate().map(|(k, &id)| Variable {
        id,
        name: format!("L{}", k + 1),
        kind: VarKind::Latent,
    }));

    let n = variables.len();
    let mut coefs: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); n];
    let mut edges: Vec<(VarId, VarId)> = ints.iter().map(|&k| (r, k)).collect();

    let mut order = sys.clone();
    for k in (1..order.len()).rev() {
        let j = rng.random_range(0..=k);
        order.swap(k, j);
    }
    for a in 0..order.len() {
        for b in a + 1..order.len() {
            if rng.random_bool(cfg.edge_prob) {
                edges.push((order[a], order[b]));
                coefs[order[b]].push((order[a], signed(&mut rng, cfg.coef_range)));
            }
        }
    }
    let mut noise = vec![0.0; n];
    for &x in &sys {
        noise[x] = uniform(&mut rng, cfg.noise_var_range);
    }
    for &l in &lats {
        noise[l] = uniform(&mut rng, cfg.noise_var_range);
        for t in sample_indices(&mut rng, p, 2).into_iter() {
            edges.push((l, sys[t]));
            coefs[sys[t]].push((l, signed(&mut rng, cfg.latent_coef_range)));
        }
    }
    for &k in &ints {
        for t in sample_indices(&mut rng, p, cfg.targets_per_intervention).into_iter() {
            edges.push((k, sys[t]));
            coefs[sys[t]].push((k, signed(&mut rng, cfg.intervention_coef_range)));
        }
    }

    let graph = CausalGraph::new_jci(variables, &edges)?;
    let mechanisms = (0..n)
        .map(|v| {
            (!graph.kind(v).is_dummy()).then(|| Mechanism {
                coefficients: std::mem::take(&mut coefs[v]),
                noise_var: noise[v],
            })
        })
        .collect();
    JciScm::new(graph, ExperimentalDesignMatrix::indicators(i), mechanisms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_design;

    #[test]
    fn generator_is_deterministic() {
        let cfg = GeneratorConfig::default();
        let a = random_jci_model(4, 3, 2, 17, &cfg).unwrap();
        let b = random_jci_model(4, 3, 2, 17, &cfg).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_jci_model(4, 3, 2, 18, &cfg).unwrap());
    }

    #[test]
    fn zero_interventions_give_one_regime() {
        let m = random_jci_model(3, 0, 1, 1, &GeneratorConfig::default()).unwrap();
        assert_eq!(m.design().n_regimes(), 1);
        assert_eq!(m.design().n_columns(), 0);
        assert!(m.graph().interventions().is_empty());
    }

    #[test]
    fn interventions_have_one_system_child_and_design_is_valid() {
        let cfg = GeneratorConfig::default();
        for seed in 0..200 {
            let m = random_jci_model(4, 3, 2, seed, &cfg).unwrap();
            let g = m.graph();
            assert!(g.topological_order().is_some());
            for i in g.interventions() {
                assert_eq!(g.children(i).len(), 1);
                assert!(g.children(i).is_subset(g.systems()));
            }
            for l in g.of_kind(VarKind::Latent) {
                assert_eq!(g.children(l).len(), 2);
                assert!(g.parents(l).is_empty());
            }
            assert!(validate_design(m.design()).unwrap().is_valid());
        }
    }

    #[test]
    fn json_roundtrip() {
        let m = random_jci_model(3, 2, 1, 5, &GeneratorConfig::default()).unwrap();
        assert_eq!(JciScm::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn invalid_configs_rejected() {
        let cfg = GeneratorConfig {
            edge_prob: 1.5,
            ..Default::default()
        };
        assert!(random_jci_model(3, 1, 0, 0, &cfg).is_err());
        assert!(random_jci_model(0, 1, 0, 0, &GeneratorConfig::default()).is_err());
        assert!(random_jci_model(1, 1, 1, 0, &GeneratorConfig::default()).is_err());
        let cfg = GeneratorConfig {
            targets_per_intervention: 4,
            ..Default::default()
        };
        assert!(random_jci_model(3, 1, 0, 0, &cfg).is_err());
    }

    #[test]
    fn mismatched_mechanism_rejected() {
        let m = random_jci_model(3, 1, 0, 3, &GeneratorConfig::default()).unwrap();
        let x = m.graph().systems().first().unwrap();
        let mut mechs: Vec<Option<Mechanism>> = (0..m.graph().n())
            .map(|v| m.mechanism(v).cloned())
            .collect();
        mechs[x].as_mut().unwrap().coefficients.push((0, 1.0));
        assert!(JciScm::new(m.graph().clone(), m.design().clone(), mechs).is_err());
    }
}
