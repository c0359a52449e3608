use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::Serialize;

use super::ground::{GroundedProblem, ProblemVariable};
use super::maxsat::{tol, MaxSat, MaxSatOutcome, SoftLit};
use super::sat::{Lit, Solver};
use crate::error::{input_err, Error, Result};
use crate::graph::CausalGraph;
use crate::statement::SepKind;
use crate::varset::{VarId, VarSet};

/// A reflexive, transitive and antisymmetric ancestry relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AncestralStructure {
    ids: Vec<VarId>,
    causes: Vec<bool>,
}

impl AncestralStructure {
    /// Builds the relation from `causes(a, b)` over distinct ids; the diagonal
    /// is set to true.
    pub fn from_fn(ids: &[VarId], mut causes: impl FnMut(VarId, VarId) -> bool) -> Self {
        let n = ids.len();
        let mut m = vec![false; n * n];
        for (i, &a) in ids.iter().enumerate() {
            for (j, &b) in ids.iter().enumerate() {
                m[i * n + j] = i == j || causes(a, b);
            }
        }
        AncestralStructure {
            ids: ids.to_vec(),
            causes: m,
        }
    }

    /// The ancestry relation of `g` restricted to `scope`.
    pub fn from_graph(g: &CausalGraph, scope: VarSet) -> Result<Self> {
        g.check_ids(scope)?;
        let ids: Vec<VarId> = scope.iter().collect();
        let anc: Vec<VarSet> = ids
            .iter()
            .map(|&b| g.ancestors_unchecked(VarSet::singleton(b)))
            .collect();
        let pos: HashMap<VarId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        Ok(Self::from_fn(&ids, |a, b| anc[pos[&b]].contains(a)))
    }

    pub fn ids(&self) -> &[VarId] {
        &self.ids
    }

    fn pos(&self, v: VarId) -> Result<usize> {
        self.ids
            .iter()
            .position(|&x| x == v)
            .ok_or_else(|| Error::Input(format!("variable {v} is not in the structure")))
    }

    pub fn causes(&self, a: VarId, b: VarId) -> Result<bool> {
        Ok(self.causes[self.pos(a)? * self.ids.len() + self.pos(b)?])
    }

    /// Off-diagonal pairs `(a, b)` with `a ⇝ b`.
    pub fn pairs(&self) -> Vec<(VarId, VarId)> {
        let n = self.ids.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.causes[i * n + j] {
                    out.push((self.ids[i], self.ids[j]));
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        let n = self.ids.len();
        let c = |i: usize, j: usize| self.causes[i * n + j];
        (0..n).all(|i| c(i, i))
            && (0..n).all(|i| (0..n).all(|j| i == j || !(c(i, j) && c(j, i))))
            && (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| !(c(i, j) && c(j, k)) || c(i, k))))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub structure: AncestralStructure,
    /// One value per grounded atom, in the order of [`GroundedProblem::atoms`]
    /// (true: separated).
    pub dstatement_assignment: Vec<bool>,
    pub loss: f64,
    /// Number of distinct optimal ancestral structures, when counted.
    pub optimum_count: Option<usize>,
    /// True when counting stopped at the configured limit.
    pub count_truncated: bool,
}

impl Solution {
    pub fn separated(
        &self,
        problem: &GroundedProblem,
        x: VarId,
        y: VarId,
        w: VarSet,
    ) -> Result<Option<bool>> {
        let n = problem.n();
        Ok(problem
            .sep_lit(x, y, w, true)?
            .map(|l| self.dstatement_assignment[l.var() - n * n]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    /// Report the lexicographically smallest optimal structure (row-major
    /// over the problem variables sorted by id, absent before present).
    pub canonical: bool,
    /// Count distinct optimal structures up to this many.
    pub count_limit: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            canonical: true,
            count_limit: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Feature {
    Ancestral,
    NonAncestral,
}

impl Feature {
    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Ancestral => "ancestral",
            Feature::NonAncestral => "nonancestral",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScoredPrediction {
    pub x: VarId,
    pub y: VarId,
    pub feature: Feature,
    /// Positive values favour the feature; infinite when the opposite
    /// feature is inconsistent with the hard constraints.
    pub confidence: f64,
}

/// Incremental solver over one grounded problem. Repeated queries share the
/// learnt clauses and cores.
pub struct AcidSolver<'p> {
    problem: &'p GroundedProblem,
    ms: MaxSat,
    labels: HashMap<Lit, String>,
    optimum: Option<(f64, Vec<bool>)>,
}

impl<'p> AcidSolver<'p> {
    pub fn new(problem: &'p GroundedProblem) -> Self {
        let mut sat = Solver::new();
        sat.ensure_vars(problem.n_sat_vars());
        let mut hard = Vec::new();
        let mut labels = HashMap::new();
        for c in problem.clauses() {
            if let [l] = c.lits[..] {
                if let Entry::Vacant(e) = labels.entry(l) {
                    hard.push(l);
                    e.insert(format!("{} ({:?})", problem.describe(l), c.tag));
                }
            } else {
                sat.add_clause(&c.lits);
            }
        }
        let n = problem.n();
        let mut softs = Vec::new();
        for s in problem.inputs() {
            if s.weight.is_finite() {
                let lit = problem
                    .sep_lit(s.x, s.y, s.w, s.kind == SepKind::Separated)
                    .expect("inputs are in scope")
                    .expect("inputs are grounded");
                softs.push(SoftLit {
                    lit,
                    weight: s.weight,
                });
            }
        }
        debug_assert!(softs.iter().all(|s| s.lit.var() >= n * n));
        AcidSolver {
            problem,
            ms: MaxSat::new(sat, hard, &softs),
            labels,
            optimum: None,
        }
    }

    pub fn problem(&self) -> &GroundedProblem {
        self.problem
    }

    fn run(&mut self, extra: &[Lit]) -> std::result::Result<(f64, Vec<bool>), Vec<Lit>> {
        match self.ms.solve(extra) {
            MaxSatOutcome::Optimal { cost, model } => Ok((cost, model)),
            MaxSatOutcome::Infeasible(core) => Err(core),
        }
    }

    fn conflict(&self, core: &[Lit]) -> Error {
        let mut conflict: Vec<String> = core
            .iter()
            .map(|l| {
                self.labels
                    .get(l)
                    .cloned()
                    .unwrap_or_else(|| format!("{} (assumed)", self.problem.describe(*l)))
            })
            .collect();
        if conflict.is_empty() {
            conflict.push("the grounded rules themselves".into());
        }
        Error::Infeasible { conflict }
    }

    /// Optimal loss and one optimal model.
    pub fn optimum(&mut self) -> Result<(f64, Vec<bool>)> {
        if self.optimum.is_none() {
            let r = self.run(&[]).map_err(|core| self.conflict(&core))?;
            self.optimum = Some(r);
        }
        Ok(self.optimum.clone().expect("just computed"))
    }

    /// Optimal loss under additional hard literals; `None` when infeasible.
    fn constrained(&mut self, extra: &[Lit]) -> Option<(f64, Vec<bool>)> {
        self.run(extra).ok()
    }

    fn anc_vars(&self) -> Vec<usize> {
        let n = self.problem.n();
        (0..n)
            .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| a * n + b))
            .collect()
    }

    fn solution_from(&self, loss: f64, model: &[bool]) -> Solution {
        let p = self.problem;
        let n = p.n();
        let ids = p.ids();
        let structure = AncestralStructure::from_fn(&ids, |a, b| {
            let (la, lb) = (p.local(a).expect("id"), p.local(b).expect("id"));
            model[la * n + lb]
        });
        Solution {
            structure,
            dstatement_assignment: model[n * n..n * n + p.atoms().len()].to_vec(),
            loss,
            optimum_count: None,
            count_truncated: false,
        }
    }

    pub fn minimize(&mut self, opts: &SolveOptions) -> Result<Solution> {
        let (c, mut model) = self.optimum()?;
        if opts.canonical {
            let mut fixed = Vec::new();
            for v in self.anc_vars() {
                if !model[v] {
                    fixed.push(Lit::neg(v));
                    continue;
                }
                fixed.push(Lit::neg(v));
                match self.constrained(&fixed) {
                    Some((c2, m2)) if c2 <= c + tol(c) => model = m2,
                    _ => {
                        fixed.pop();
                        fixed.push(Lit::pos(v));
                    }
                }
            }
        }
        let mut sol = self.solution_from(c, &model);
        if let Some(limit) = opts.count_limit {
            let (count, truncated) = self.count_optima(c, limit);
            sol.optimum_count = Some(count);
            sol.count_truncated = truncated;
        }
        Ok(sol)
    }

    fn count_optima(&mut self, c: f64, limit: usize) -> (usize, bool) {
        let act = self.ms.sat().new_var();
        let guard = Lit::pos(act);
        let vars = self.anc_vars();
        let mut count = 0;
        let mut truncated = false;
        while let Some((c2, m)) = self.constrained(&[guard]) {
            if c2 > c + tol(c) {
                break;
            }
            if count == limit {
                truncated = true;
                break;
            }
            count += 1;
            let mut block = vec![!guard];
            block.extend(vars.iter().map(|&v| Lit::new(v, !m[v])));
            self.ms.add_clause(&block);
        }
        self.ms.add_clause(&[!guard]);
        (count, truncated)
    }

    /// Confidence of `a ⇝ b` and of `a ⇝̸ b`.
    pub fn score_pair(&mut self, a: VarId, b: VarId) -> Result<[ScoredPrediction; 2]> {
        let lit = self.problem.anc_lit(a, b, true)?;
        let (c, model) = self.optimum()?;
        let holds = model[lit.var()];
        let other = self
            .constrained(&[if holds { !lit } else { lit }])
            .map(|(c2, _)| c2)
            .unwrap_or(f64::INFINITY);
        let (loss_true, loss_false) = if holds { (c, other) } else { (other, c) };
        let conf = loss_false - loss_true;
        Ok([
            ScoredPrediction {
                x: a,
                y: b,
                feature: Feature::Ancestral,
                confidence: conf,
            },
            ScoredPrediction {
                x: a,
                y: b,
                feature: Feature::NonAncestral,
                confidence: 0.0 - conf,
            },
        ])
    }

    pub fn score(&mut self, pairs: &[(VarId, VarId)]) -> Result<Vec<ScoredPrediction>> {
        let mut out = Vec::with_capacity(2 * pairs.len());
        for &(a, b) in pairs {
            out.extend(self.score_pair(a, b)?);
        }
        Ok(out)
    }

    /// Number of SAT calls so far.
    pub fn sat_calls(&self) -> u64 {
        self.ms.sat_calls
    }
}

/// Global minimizer of the total weight of violated inputs.
pub fn minimize_loss(problem: &GroundedProblem, opts: &SolveOptions) -> Result<Solution> {
    AcidSolver::new(problem).minimize(opts)
}

/// Scores `X ⇝ Y` and `X ⇝̸ Y` for each pair.
pub fn score_predictions(
    problem: &GroundedProblem,
    pairs: &[(VarId, VarId)],
) -> Result<Vec<ScoredPrediction>> {
    AcidSolver::new(problem).score(pairs)
}

/// All ordered pairs of distinct problem variables of the given kinds.
pub fn ordered_pairs(
    problem: &GroundedProblem,
    keep: impl Fn(&ProblemVariable) -> bool,
) -> Vec<(VarId, VarId)> {
    let vs: Vec<VarId> = problem
        .variables()
        .iter()
        .filter(|v| keep(v))
        .map(|v| v.id)
        .collect();
    let mut out = Vec::new();
    for &a in &vs {
        for &b in &vs {
            if a != b {
                out.push((a, b));
            }
        }
    }
    out
}

/// Checks that `sol` satisfies every hard clause of `problem` and that its
/// loss equals the weight of the inputs it violates.
pub fn check_solution(problem: &GroundedProblem, sol: &Solution) -> Result<()> {
    let n = problem.n();
    let ids = problem.ids();
    let value = |l: Lit| -> bool {
        let v = l.var();
        let t = if v < n * n {
            sol.structure
                .causes(ids[v / n], ids[v % n])
                .unwrap_or(false)
        } else {
            sol.dstatement_assignment[v - n * n]
        };
        t == l.is_positive()
    };
    if !sol.structure.is_valid() {
        return input_err("structure violates the partial order axioms");
    }
    for c in problem.clauses() {
        if !c.lits.iter().any(|&l| value(l)) {
            return Err(Error::Contradiction(format!("violated {:?} clause", c.tag)));
        }
    }
    let mut loss = 0.0;
    for s in problem.inputs() {
        let l = problem
            .sep_lit(s.x, s.y, s.w, s.kind == SepKind::Separated)?
            .expect("grounded");
        if !value(l) {
            loss += s.weight;
        }
    }
    if (loss - sol.loss).abs() > 1e-6 * loss.abs().max(1.0) {
        return Err(Error::Contradiction(format!(
            "loss {} does not match violated weight {loss}",
            sol.loss
        )));
    }
    Ok(())
}
