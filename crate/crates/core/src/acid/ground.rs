use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::sat::Lit;
use crate::error::{input_err, Error, Result};
use crate::graph::{CausalGraph, DetRelation, DetRelationSet, VarKind};
use crate::statement::DStatement;
use crate::varset::{VarId, VarSet};

/// Default cap on the number of variables of a grounded problem.
pub const DEFAULT_MAX_VARIABLES: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProblemVariable {
    pub id: VarId,
    pub name: String,
    pub kind: VarKind,
}

impl ProblemVariable {
    /// The variables of `scope` in `g`.
    pub fn from_graph(g: &CausalGraph, scope: VarSet) -> Vec<ProblemVariable> {
        scope
            .iter()
            .map(|v| ProblemVariable {
                id: v,
                name: g.name(v).to_string(),
                kind: g.kind(v),
            })
            .collect()
    }
}

/// Hard background knowledge on ancestral relations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum BackgroundFact {
    Cause(VarId, VarId),
    NonCause(VarId, VarId),
    /// `cause` is an ancestor of at least one of `effects`.
    OneOf {
        cause: VarId,
        effects: Vec<VarId>,
    },
}

/// Parses one fact per line: `cause X Y`, `noncause X Y` or
/// `oneof X: Y1 Y2 ...`. Blank lines and `#` comments are skipped.
pub fn parse_background(
    text: &str,
    mut resolve: impl FnMut(&str) -> Result<VarId>,
) -> Result<Vec<BackgroundFact>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let mut resolve_at = |name: &str| resolve(name).map_err(|e| err(e.to_string()));
        let (head, rest) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| err("missing arguments".into()))?;
        match head {
            "cause" | "noncause" => {
                let args: Vec<&str> = rest.split_whitespace().collect();
                if args.len() != 2 {
                    return Err(err(format!("`{head}` takes two variables")));
                }
                let (a, b) = (resolve_at(args[0])?, resolve_at(args[1])?);
                out.push(if head == "cause" {
                    BackgroundFact::Cause(a, b)
                } else {
                    BackgroundFact::NonCause(a, b)
                });
            }
            "oneof" => {
                let (cause, effects) = rest
                    .split_once(':')
                    .ok_or_else(|| err("expected `oneof X: Y1 Y2 ...`".into()))?;
                let cause = resolve_at(cause.trim())?;
                let effects = effects
                    .split_whitespace()
                    .map(&mut resolve_at)
                    .collect::<Result<Vec<_>>>()?;
                if effects.is_empty() {
                    return Err(err("`oneof` needs at least one effect".into()));
                }
                out.push(BackgroundFact::OneOf { cause, effects });
            }
            other => return Err(err(format!("unknown fact `{other}`"))),
        }
    }
    Ok(out)
}

/// Where a hard clause comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleTag {
    Transitivity,
    Antisymmetry,
    /// Separation with no ancestry into the separating set rules out ancestry.
    SeparationNonAncestor,
    /// Dependence created by adding `Z`: `Z` is not an ancestor.
    ConnectionGainedNonAncestor,
    /// Independence created by adding `Z`: `Z` is an ancestor.
    SeparationGainedAncestor,
    /// Transfer of a separation to a different conditioning set.
    SeparationTransfer,
    /// Conditioning on a common neighbour connects.
    CommonNeighbourConnects,
    /// The regime causes and is connected to every intervention variable.
    JciRegimeToIntervention,
    /// The regime reaches system variables only through intervention variables.
    JciRegimeThroughIntervention,
    /// All intervention variables separate the regime from the system.
    JciInterventionsScreen,
    /// System variables cause no dummy variable.
    JciSystemNotCausingDummies,
    /// Regime dependence implies ancestry.
    JciRegimeUnconfounded,
    /// Intervention dependence given the regime implies ancestry.
    JciInterventionUnconfounded,
    /// Adding the regime to a separating set keeps it separating.
    JciAddRegime,
    /// Adding an intervention variable to a separating set keeps it separating.
    JciAddIntervention,
    /// Intervention variables cause neither the regime nor each other.
    JciDummyStructure,
    Background,
    /// An input statement with infinite weight.
    Input,
}

impl RuleTag {
    pub fn is_acid_rule(self) -> bool {
        use RuleTag::*;
        matches!(
            self,
            SeparationNonAncestor
                | ConnectionGainedNonAncestor
                | SeparationGainedAncestor
                | SeparationTransfer
                | CommonNeighbourConnects
        )
    }

    pub fn is_jci(self) -> bool {
        use RuleTag::*;
        matches!(
            self,
            JciRegimeToIntervention
                | JciRegimeThroughIntervention
                | JciInterventionsScreen
                | JciSystemNotCausingDummies
                | JciRegimeUnconfounded
                | JciInterventionUnconfounded
                | JciAddRegime
                | JciAddIntervention
                | JciDummyStructure
        )
    }
}

/// A grounded hard clause. The first `premises` literals are negated
/// premises, the rest is the conclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardClause {
    pub lits: Vec<Lit>,
    pub premises: usize,
    pub tag: RuleTag,
}

/// A d-separation atom over local variable indices, `x < y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DAtom {
    pub x: usize,
    pub y: usize,
    pub w: VarSet,
}

/// What a literal of a grounded problem means.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Atom {
    Ancestor(usize, usize),
    Separated(DAtom),
}

/// Everything needed to ground a problem.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub variables: Vec<ProblemVariable>,
    /// Largest conditioning set size of the grounded atoms (closures of such
    /// sets under `det` are added as well).
    pub max_order: usize,
    pub jci: bool,
    pub det: DetRelationSet,
    pub background: Vec<BackgroundFact>,
    pub inputs: Vec<DStatement>,
    pub max_variables: usize,
}

impl ProblemSpec {
    pub fn new(variables: Vec<ProblemVariable>, max_order: usize) -> Self {
        ProblemSpec {
            variables,
            max_order,
            jci: false,
            det: DetRelationSet::empty(),
            background: Vec::new(),
            inputs: Vec::new(),
            max_variables: DEFAULT_MAX_VARIABLES,
        }
    }

    pub fn jci(mut self, det: DetRelationSet) -> Self {
        self.jci = true;
        self.det = det;
        self
    }

    pub fn with_inputs(mut self, inputs: Vec<DStatement>) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn with_background(mut self, background: Vec<BackgroundFact>) -> Self {
        self.background = background;
        self
    }
}

/// The grounded optimization problem. Boolean variable `a·n + b` is the
/// ancestral atom `a ⇝ b` (local indices, diagonal unused); variable
/// `n² + k` is the k-th d-separation atom (true: separated).
#[derive(Clone, Debug)]
pub struct GroundedProblem {
    variables: Vec<ProblemVariable>,
    local_of: HashMap<VarId, usize>,
    max_order: usize,
    jci: bool,
    atoms: Vec<DAtom>,
    atom_index: HashMap<(usize, usize, u64), usize>,
    clauses: Vec<HardClause>,
    inputs: Vec<DStatement>,
}

impl GroundedProblem {
    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[ProblemVariable] {
        &self.variables
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn is_jci(&self) -> bool {
        self.jci
    }

    pub fn ids(&self) -> Vec<VarId> {
        self.variables.iter().map(|v| v.id).collect()
    }

    pub fn local(&self, id: VarId) -> Result<usize> {
        self.local_of
            .get(&id)
            .copied()
            .ok_or_else(|| Error::Input(format!("variable {id} is not part of the problem")))
    }

    fn local_set(&self, s: VarSet) -> Result<VarSet> {
        s.iter().map(|v| self.local(v)).collect()
    }

    pub fn external_set(&self, s: VarSet) -> VarSet {
        s.iter().map(|v| self.variables[v].id).collect()
    }

    pub fn atoms(&self) -> &[DAtom] {
        &self.atoms
    }

    pub fn clauses(&self) -> &[HardClause] {
        &self.clauses
    }

    pub fn inputs(&self) -> &[DStatement] {
        &self.inputs
    }

    pub fn n_sat_vars(&self) -> usize {
        self.n() * self.n() + self.atoms.len()
    }

    /// Literal for `a ⇝ b` over local indices, `a != b`.
    pub fn anc_lit_local(&self, a: usize, b: usize, positive: bool) -> Lit {
        debug_assert_ne!(a, b);
        Lit::new(a * self.n() + b, positive)
    }

    /// Literal for `a ⇝ b` over variable ids.
    pub fn anc_lit(&self, a: VarId, b: VarId, positive: bool) -> Result<Lit> {
        let (la, lb) = (self.local(a)?, self.local(b)?);
        if la == lb {
            return input_err("ancestral atoms need two distinct variables");
        }
        Ok(self.anc_lit_local(la, lb, positive))
    }

    fn atom_local(&self, x: usize, y: usize, w: VarSet) -> Option<usize> {
        self.atom_index
            .get(&(x.min(y), x.max(y), w.bits()))
            .copied()
    }

    /// Literal of the separation atom `x ⊥ y | w` (variable ids), if grounded.
    pub fn sep_lit(&self, x: VarId, y: VarId, w: VarSet, separated: bool) -> Result<Option<Lit>> {
        let (lx, ly, lw) = (self.local(x)?, self.local(y)?, self.local_set(w)?);
        Ok(self
            .atom_local(lx, ly, lw)
            .map(|k| Lit::new(self.n() * self.n() + k, separated)))
    }

    pub fn atom_of(&self, var: usize) -> Atom {
        let n = self.n();
        if var < n * n {
            Atom::Ancestor(var / n, var % n)
        } else {
            Atom::Separated(self.atoms[var - n * n])
        }
    }

    /// Human-readable form of a literal.
    pub fn describe(&self, lit: Lit) -> String {
        let name = |v: usize| self.variables[v].name.as_str();
        match self.atom_of(lit.var()) {
            Atom::Ancestor(a, b) => {
                format!(
                    "{} {} {}",
                    name(a),
                    if lit.is_positive() { "~>" } else { "!~>" },
                    name(b)
                )
            }
            Atom::Separated(d) => {
                let w: Vec<&str> = d.w.iter().map(name).collect();
                format!(
                    "{} {} {} | {}",
                    if lit.is_positive() { "sep" } else { "con" },
                    name(d.x),
                    name(d.y),
                    w.join(" ")
                )
            }
        }
    }

    /// Number of hard clauses per tag.
    pub fn clause_counts(&self) -> Vec<(RuleTag, usize)> {
        let mut m: std::collections::BTreeMap<RuleTag, usize> = Default::default();
        for c in &self.clauses {
            *m.entry(c.tag).or_default() += 1;
        }
        m.into_iter().collect()
    }
}

struct Builder {
    n: usize,
    atoms: Vec<DAtom>,
    atom_index: HashMap<(usize, usize, u64), usize>,
    clauses: Vec<HardClause>,
    seen: HashSet<Vec<Lit>>,
}

impl Builder {
    fn add_atom(&mut self, x: usize, y: usize, w: VarSet) -> usize {
        let (x, y) = (x.min(y), x.max(y));
        let next = self.atoms.len();
        *self.atom_index.entry((x, y, w.bits())).or_insert_with(|| {
            self.atoms.push(DAtom { x, y, w });
            next
        })
    }

    fn atom(&self, x: usize, y: usize, w: VarSet) -> Option<usize> {
        self.atom_index
            .get(&(x.min(y), x.max(y), w.bits()))
            .copied()
    }

    fn sep(&self, k: usize, positive: bool) -> Lit {
        Lit::new(self.n * self.n + k, positive)
    }

    fn anc(&self, a: usize, b: usize, positive: bool) -> Lit {
        Lit::new(a * self.n + b, positive)
    }

    fn clause(&mut self, premises: Vec<Lit>, conclusion: Vec<Lit>, tag: RuleTag) {
        let k = premises.len();
        let mut lits = premises;
        lits.extend(conclusion);
        let mut key = lits.clone();
        key.sort_unstable();
        key.dedup();
        if key.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        if self.seen.insert(key) {
            self.clauses.push(HardClause {
                lits,
                premises: k,
                tag,
            });
        }
    }
}

/// Grounds the ancestral axioms, the ACID rules over d-separation atoms, the
/// JCI background rules (when `spec.jci`), the background facts and the
/// infinite-weight inputs.
///
/// The atom universe holds every `(x, y, W)` with `|W| <= max_order`, the
/// closures `(x, y, Det(W))` whose endpoints stay outside `Det(W)`, and every
/// atom used by an input. A rule instance is grounded only when all of its
/// premise atoms are in the universe; conclusions about missing atoms are
/// left out.
pub fn ground_rules(spec: &ProblemSpec) -> Result<GroundedProblem> {
    let mut variables = spec.variables.clone();
    variables.sort_by_key(|v| v.id);
    let n = variables.len();
    if n > spec.max_variables {
        return input_err(format!(
            "{n} variables exceed the exact-search limit of {}",
            spec.max_variables
        ));
    }
    if variables.windows(2).any(|w| w[0].id == w[1].id) {
        return input_err("duplicate problem variable");
    }
    if variables.iter().any(|v| v.kind == VarKind::Latent) {
        return input_err("latent variables cannot be problem variables");
    }
    let local_of: HashMap<VarId, usize> = variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.id, i))
        .collect();
    let to_local = |s: VarSet| -> Result<VarSet> {
        s.iter()
            .map(|v| {
                local_of
                    .get(&v)
                    .copied()
                    .ok_or_else(|| Error::Input(format!("variable {v} is not part of the problem")))
            })
            .collect()
    };
    let regimes: Vec<usize> = (0..n)
        .filter(|&i| variables[i].kind == VarKind::Regime)
        .collect();
    if regimes.len() > 1 {
        return input_err("at most one regime variable is allowed");
    }
    if spec.jci && regimes.is_empty() {
        return input_err("JCI grounding needs a regime variable");
    }
    let det = DetRelationSet::new(
        spec.det
            .relations()
            .iter()
            .map(|r| {
                Ok(DetRelation {
                    determiners: to_local(r.determiners)?,
                    determined: *local_of.get(&r.determined).ok_or_else(|| {
                        Error::Input(format!(
                            "variable {} is not part of the problem",
                            r.determined
                        ))
                    })?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    )?;

    let mut b = Builder {
        n,
        atoms: Vec::new(),
        atom_index: HashMap::new(),
        clauses: Vec::new(),
        seen: HashSet::new(),
    };
    let all = VarSet::full(n);

    // atom universe
    for x in 0..n {
        for y in x + 1..n {
            for w in all.without(x).without(y).subsets_up_to(spec.max_order) {
                b.add_atom(x, y, w);
                let closed = det.closure(w);
                if closed != w && !closed.contains(x) && !closed.contains(y) {
                    b.add_atom(x, y, closed);
                }
            }
        }
    }
    let mut inputs = Vec::with_capacity(spec.inputs.len());
    for s in &spec.inputs {
        let (lx, ly, lw) = (
            *local_of
                .get(&s.x)
                .ok_or_else(|| Error::Input(format!("input mentions unknown variable {}", s.x)))?,
            *local_of
                .get(&s.y)
                .ok_or_else(|| Error::Input(format!("input mentions unknown variable {}", s.y)))?,
            to_local(s.w)?,
        );
        b.add_atom(lx, ly, lw);
        inputs.push(s.clone());
    }
    let atoms_snapshot = b.atoms.clone();

    // ancestral axioms
    for a in 0..n {
        for c in 0..n {
            if a == c {
                continue;
            }
            if a < c {
                b.clause(
                    vec![],
                    vec![b.anc(a, c, false), b.anc(c, a, false)],
                    RuleTag::Antisymmetry,
                );
            }
            for m in 0..n {
                if m != a && m != c {
                    b.clause(
                        vec![b.anc(a, m, false), b.anc(m, c, false)],
                        vec![b.anc(a, c, true)],
                        RuleTag::Transitivity,
                    );
                }
            }
        }
    }

    // ACID rules
    for s in &atoms_snapshot {
        let (x, y, w) = (s.x, s.y, s.w);
        let ks = b.atom(x, y, w).expect("atom in universe");
        let free = all.difference(w).without(x).without(y);

        for (p, q) in [(x, y), (y, x)] {
            let mut prem = vec![b.sep(ks, false)];
            prem.extend(w.iter().map(|v| b.anc(p, v, true)));
            b.clause(
                prem,
                vec![b.anc(p, q, false)],
                RuleTag::SeparationNonAncestor,
            );
        }

        for z in free {
            let wz = w.with(z);
            if let Some(kt) = b.atom(x, y, wz) {
                // separation lost by adding z
                let prem = vec![b.sep(ks, false), b.sep(kt, true)];
                for e in [x, y] {
                    if let Some(k) = b.atom(e, z, w) {
                        b.clause(
                            prem.clone(),
                            vec![b.sep(k, false)],
                            RuleTag::ConnectionGainedNonAncestor,
                        );
                    }
                }
                for v in [x, y].into_iter().chain(w.iter()) {
                    b.clause(
                        prem.clone(),
                        vec![b.anc(z, v, false)],
                        RuleTag::ConnectionGainedNonAncestor,
                    );
                }
                // separation gained by adding z
                let prem = vec![b.sep(ks, true), b.sep(kt, false)];
                for e in [x, y] {
                    if let Some(k) = b.atom(e, z, w) {
                        b.clause(
                            prem.clone(),
                            vec![b.sep(k, false)],
                            RuleTag::SeparationGainedAncestor,
                        );
                    }
                }
                let concl: Vec<Lit> = [x, y]
                    .into_iter()
                    .chain(w.iter())
                    .map(|v| b.anc(z, v, true))
                    .collect();
                b.clause(prem, concl, RuleTag::SeparationGainedAncestor);

                for (p, q) in [(x, y), (y, x)] {
                    for u in free.without(z) {
                        let wu = w.with(u);
                        if let (Some(ku), Some(kv)) = (b.atom(p, z, wu), b.atom(p, q, wu)) {
                            b.clause(
                                vec![b.sep(ks, true), b.sep(kt, false), b.sep(ku, false)],
                                vec![b.sep(kv, true)],
                                RuleTag::SeparationTransfer,
                            );
                        }
                    }
                }
            }
            if let (Some(ka), Some(kb), Some(kt)) =
                (b.atom(z, x, w), b.atom(z, y, w), b.atom(x, y, wz))
            {
                b.clause(
                    vec![b.sep(ka, true), b.sep(kb, true), b.sep(ks, false)],
                    vec![b.sep(kt, false)],
                    RuleTag::CommonNeighbourConnects,
                );
            }
        }
    }

    if spec.jci {
        ground_jci(&mut b, &variables, &atoms_snapshot);
    }

    for f in &spec.background {
        let l = |v: &VarId| {
            local_of.get(v).copied().ok_or_else(|| {
                Error::Input(format!("background fact mentions unknown variable {v}"))
            })
        };
        match f {
            BackgroundFact::Cause(a, c) | BackgroundFact::NonCause(a, c) => {
                let (la, lc) = (l(a)?, l(c)?);
                let positive = matches!(f, BackgroundFact::Cause(..));
                if la == lc {
                    if positive {
                        continue;
                    }
                    return input_err("a variable is always its own ancestor");
                }
                b.clause(vec![], vec![b.anc(la, lc, positive)], RuleTag::Background);
            }
            BackgroundFact::OneOf { cause, effects } => {
                let lc = l(cause)?;
                let mut lits = Vec::new();
                for e in effects {
                    let le = l(e)?;
                    if le == lc {
                        lits.clear();
                        break;
                    }
                    lits.push(b.anc(lc, le, true));
                }
                if !lits.is_empty() {
                    b.clause(vec![], lits, RuleTag::Background);
                }
            }
        }
    }

    for s in &inputs {
        if s.weight.is_infinite() {
            let (lx, ly, lw) = (local_of[&s.x], local_of[&s.y], to_local(s.w)?);
            let k = b.atom(lx, ly, lw).expect("input atoms are grounded");
            b.clause(
                vec![],
                vec![b.sep(k, s.kind.is_separated())],
                RuleTag::Input,
            );
        }
    }

    Ok(GroundedProblem {
        variables,
        local_of,
        max_order: spec.max_order,
        jci: spec.jci,
        atoms: b.atoms,
        atom_index: b.atom_index,
        clauses: b.clauses,
        inputs,
    })
}

/// JCI background rules. Without intervention variables the regime itself
/// plays the role of the single intervention variable, and the rules that
/// would then be trivial are skipped.
fn ground_jci(b: &mut Builder, variables: &[ProblemVariable], atoms: &[DAtom]) {
    let n = variables.len();
    let of = |k: VarKind| -> Vec<usize> { (0..n).filter(|&i| variables[i].kind == k).collect() };
    let r = of(VarKind::Regime)[0];
    let ints = of(VarKind::Intervention);
    let sys = of(VarKind::System);
    let int_set: VarSet = ints.iter().collect();
    let sys_set: VarSet = sys.iter().collect();

    for &i in &ints {
        b.clause(
            vec![],
            vec![b.anc(r, i, true)],
            RuleTag::JciRegimeToIntervention,
        );
    }
    for a in atoms {
        if a.x == r && int_set.contains(a.y) || a.y == r && int_set.contains(a.x) {
            let k = b.atom(a.x, a.y, a.w).expect("atom in universe");
            b.clause(
                vec![],
                vec![b.sep(k, false)],
                RuleTag::JciRegimeToIntervention,
            );
        }
    }

    for &j in &sys {
        if !ints.is_empty() {
            let concl: Vec<Lit> = ints.iter().map(|&i| b.anc(i, j, true)).collect();
            b.clause(
                vec![b.anc(r, j, false)],
                concl,
                RuleTag::JciRegimeThroughIntervention,
            );
            for w in sys_set.without(j).subsets_up_to(n) {
                if let Some(k) = b.atom(r, j, w.union(int_set)) {
                    b.clause(
                        vec![],
                        vec![b.sep(k, true)],
                        RuleTag::JciInterventionsScreen,
                    );
                }
            }
        }
        b.clause(
            vec![],
            vec![b.anc(j, r, false)],
            RuleTag::JciSystemNotCausingDummies,
        );
        for &i in &ints {
            b.clause(
                vec![],
                vec![b.anc(j, i, false)],
                RuleTag::JciSystemNotCausingDummies,
            );
        }
        if let Some(k) = b.atom(r, j, VarSet::EMPTY) {
            b.clause(
                vec![b.sep(k, true)],
                vec![b.anc(r, j, true)],
                RuleTag::JciRegimeUnconfounded,
            );
        }
        for &i in &ints {
            if let Some(k) = b.atom(i, j, VarSet::singleton(r)) {
                b.clause(
                    vec![b.sep(k, true)],
                    vec![b.anc(i, j, true)],
                    RuleTag::JciInterventionUnconfounded,
                );
            }
        }
    }

    for &i in &ints {
        b.clause(vec![], vec![b.anc(i, r, false)], RuleTag::JciDummyStructure);
        for &k in &ints {
            if k != i {
                b.clause(vec![], vec![b.anc(i, k, false)], RuleTag::JciDummyStructure);
            }
        }
    }

    for a in atoms {
        if !sys_set.contains(a.x) || !sys_set.contains(a.y) {
            continue;
        }
        let ks = b.atom(a.x, a.y, a.w).expect("atom in universe");
        if !a.w.contains(r) {
            if let Some(kt) = b.atom(a.x, a.y, a.w.with(r)) {
                b.clause(
                    vec![b.sep(ks, false)],
                    vec![b.sep(kt, true)],
                    RuleTag::JciAddRegime,
                );
            }
        }
        for &i in &ints {
            if !a.w.contains(i) {
                if let Some(kt) = b.atom(a.x, a.y, a.w.with(i)) {
                    b.clause(
                        vec![b.sep(ks, false)],
                        vec![b.sep(kt, true)],
                        RuleTag::JciAddIntervention,
                    );
                }
            }
        }
    }
}
