//! Causal DAGs over typed variables and the exact graphical oracles built on
//! them: ancestry, d-separation, deterministic closure, D-separation and
//! latent projection.

mod admg;
mod det;
mod io;
mod separation;

pub use admg::{latent_project, Admg};
pub use det::{functionally_determined, DetRelation, DetRelationSet};
pub use io::{GraphFile, GraphFileDet, GraphFileVariable};
pub use separation::{enumerate_d_statements, is_d_separated, is_det_separated, statement_count};

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use crate::varset::{VarId, VarSet, MAX_VARS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    System,
    Regime,
    Intervention,
    Latent,
}

impl VarKind {
    pub fn is_dummy(self) -> bool {
        matches!(self, VarKind::Regime | VarKind::Intervention)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub kind: VarKind,
}

/// A directed acyclic graph whose node ids are `0..n`.
///
/// When built with [`CausalGraph::new_jci`] the graph additionally satisfies
/// the JCI shape: the regime node has no parents, only intervention nodes have
/// the regime as parent, and intervention nodes have no other parents. A JCI
/// graph without intervention nodes lets the regime point directly at system
/// variables; the regime then doubles as the only intervention variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalGraph {
    variables: Vec<Variable>,
    parents: Vec<VarSet>,
    children: Vec<VarSet>,
    jci: bool,
}

impl CausalGraph {
    /// Builds a plain DAG. Ids of `variables` must be exactly `0..n` in order.
    pub fn new(variables: Vec<Variable>, edges: &[(VarId, VarId)]) -> Result<Self> {
        let n = variables.len();
        if n > MAX_VARS {
            return input_err(format!(
                "at most {MAX_VARS} variables are supported, got {n}"
            ));
        }
        for (i, v) in variables.iter().enumerate() {
            if v.id != i {
                return input_err(format!(
                    "variable ids must be 0..n in order; found id {} at position {i}",
                    v.id
                ));
            }
        }
        let mut names = std::collections::HashSet::new();
        for v in &variables {
            if !names.insert(v.name.as_str()) {
                return input_err(format!("duplicate variable name {:?}", v.name));
            }
        }
        if variables
            .iter()
            .filter(|v| v.kind == VarKind::Regime)
            .count()
            > 1
        {
            return input_err("at most one regime variable is allowed");
        }
        let mut parents = vec![VarSet::EMPTY; n];
        let mut children = vec![VarSet::EMPTY; n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return input_err(format!("edge ({a}, {b}) references an unknown variable"));
            }
            if a == b {
                return input_err(format!("self loop on {}", variables[a].name));
            }
            parents[b].insert(a);
            children[a].insert(b);
        }
        let g = CausalGraph {
            variables,
            parents,
            children,
            jci: false,
        };
        if g.topological_order().is_none() {
            return input_err("graph contains a directed cycle");
        }
        Ok(g)
    }

    /// Builds a graph and enforces the JCI shape constraints.
    pub fn new_jci(variables: Vec<Variable>, edges: &[(VarId, VarId)]) -> Result<Self> {
        let mut g = Self::new(variables, edges)?;
        g.check_jci_shape()?;
        g.jci = true;
        Ok(g)
    }

    fn check_jci_shape(&self) -> Result<()> {
        let Some(r) = self.regime() else {
            return input_err("a JCI graph needs a regime variable");
        };
        let has_interventions = !self.interventions().is_empty();
        if !self.parents[r].is_empty() {
            return input_err("the regime variable cannot have parents");
        }
        for c in self.children[r] {
            let kind = self.variables[c].kind;
            if has_interventions && kind != VarKind::Intervention {
                return input_err(format!(
                    "regime points at non-intervention variable {}",
                    self.name(c)
                ));
            }
            if !has_interventions && kind == VarKind::Latent {
                return input_err(format!("regime points at latent variable {}", self.name(c)));
            }
        }
        for i in self.interventions() {
            if !self.parents[i].difference(VarSet::singleton(r)).is_empty() {
                return input_err(format!(
                    "intervention variable {} has a parent other than the regime",
                    self.name(i)
                ));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn is_jci(&self) -> bool {
        self.jci
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.variables[v]
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.variables[v].name
    }

    pub fn kind(&self, v: VarId) -> VarKind {
        self.variables[v].kind
    }

    pub fn id_of(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn all(&self) -> VarSet {
        VarSet::full(self.n())
    }

    pub fn parents(&self, v: VarId) -> VarSet {
        self.parents[v]
    }

    pub fn children(&self, v: VarId) -> VarSet {
        self.children[v]
    }

    pub fn has_edge(&self, a: VarId, b: VarId) -> bool {
        self.children[a].contains(b)
    }

    /// Edges as (parent, child) pairs in lexicographic order.
    pub fn edges(&self) -> Vec<(VarId, VarId)> {
        (0..self.n())
            .flat_map(|a| self.children[a].iter().map(move |b| (a, b)))
            .collect()
    }

    pub fn of_kind(&self, kind: VarKind) -> VarSet {
        self.variables
            .iter()
            .filter(|v| v.kind == kind)
            .map(|v| v.id)
            .collect()
    }

    pub fn regime(&self) -> Option<VarId> {
        self.variables
            .iter()
            .find(|v| v.kind == VarKind::Regime)
            .map(|v| v.id)
    }

    pub fn interventions(&self) -> VarSet {
        self.of_kind(VarKind::Intervention)
    }

    pub fn systems(&self) -> VarSet {
        self.of_kind(VarKind::System)
    }

    /// Every non-latent variable.
    pub fn observed(&self) -> VarSet {
        self.all().difference(self.of_kind(VarKind::Latent))
    }

    /// Kahn order with ties broken by id; `None` when the graph is cyclic.
    pub fn topological_order(&self) -> Option<Vec<VarId>> {
        let n = self.n();
        let mut indeg: Vec<usize> = self.parents.iter().map(|p| p.len()).collect();
        let mut ready: std::collections::BTreeSet<VarId> =
            (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for c in self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// All variables with a directed path into `targets`, targets included.
    pub fn ancestors(&self, targets: VarSet) -> Result<VarSet> {
        self.check_ids(targets)?;
        Ok(self.ancestors_unchecked(targets))
    }

    pub(crate) fn ancestors_unchecked(&self, targets: VarSet) -> VarSet {
        let mut seen = targets;
        let mut stack: Vec<VarId> = targets.iter().collect();
        while let Some(v) = stack.pop() {
            for p in self.parents[v].difference(seen) {
                seen.insert(p);
                stack.push(p);
            }
        }
        seen
    }

    /// All variables reachable from `sources` by directed paths, sources included.
    pub fn descendants(&self, sources: VarSet) -> VarSet {
        let mut seen = sources;
        let mut stack: Vec<VarId> = sources.iter().collect();
        while let Some(v) = stack.pop() {
            for c in self.children[v].difference(seen) {
                seen.insert(c);
                stack.push(c);
            }
        }
        seen
    }

    /// Whether `a` is an ancestor of `b` (reflexive).
    pub fn is_ancestor(&self, a: VarId, b: VarId) -> bool {
        self.ancestors_unchecked(VarSet::singleton(b)).contains(a)
    }

    pub(crate) fn check_ids(&self, s: VarSet) -> Result<()> {
        if !s.is_subset(self.all()) {
            return input_err(format!("unknown variable ids in {s:?}"));
        }
        Ok(())
    }

    pub fn names_of(&self, s: VarSet) -> Vec<&str> {
        s.iter().map(|v| self.name(v)).collect()
    }
}

/// Incremental construction by name, mostly for tests and examples.
#[derive(Default)]
pub struct GraphBuilder {
    variables: Vec<Variable>,
    edges: Vec<(VarId, VarId)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(&mut self, name: &str, kind: VarKind) -> VarId {
        let id = self.variables.len();
        self.variables.push(Variable {
            id,
            name: name.to_string(),
            kind,
        });
        id
    }

    pub fn system(&mut self, name: &str) -> VarId {
        self.var(name, VarKind::System)
    }

    pub fn edge(&mut self, a: VarId, b: VarId) -> &mut Self {
        self.edges.push((a, b));
        self
    }

    pub fn build(self) -> Result<CausalGraph> {
        CausalGraph::new(self.variables, &self.edges)
    }

    pub fn build_jci(self) -> Result<CausalGraph> {
        CausalGraph::new_jci(self.variables, &self.edges)
    }
}
