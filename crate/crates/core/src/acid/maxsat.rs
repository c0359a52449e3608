//! Exact weighted MaxSAT by core-guided relaxation. Each unsatisfiable core
//! over the soft literals raises the lower bound by its smallest weight; that
//! weight is taken off every member and put on a totalizer counting how many
//! members are violated, so a second violation inside the core is charged
//! again. Soft literals are assumed in descending weight strata, each new
//! stratum starting at the heaviest literal the last model violates.

use std::collections::{HashMap, HashSet};

use super::sat::{Lit, SatResult, Solver};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoftLit {
    /// Violated when false.
    pub lit: Lit,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MaxSatOutcome {
    Optimal {
        cost: f64,
        model: Vec<bool>,
    },
    /// The hard part is unsatisfiable; the payload is a conflicting subset of
    /// the hard and extra assumption literals.
    Infeasible(Vec<Lit>),
}

const MINIMIZE_BUDGET: u64 = 1000;

pub(crate) fn tol(x: f64) -> f64 {
    1e-9 * x.abs().max(1.0)
}

/// Unary counter: `outputs[k]` is forced true once more than `k` inputs are.
struct Totalizer {
    outputs: Vec<Lit>,
}

pub struct MaxSat {
    sat: Solver,
    hard: Vec<Lit>,
    hard_set: HashSet<Lit>,
    softs: Vec<SoftLit>,
    totalizers: Vec<Totalizer>,
    totalizer_of: HashMap<Vec<Lit>, usize>,
    /// Cores of the unconstrained problem in the order they were relaxed.
    base_cores: Option<Vec<Vec<Lit>>>,
    pub sat_calls: u64,
}

/// Residual weights of the literals currently assumed, in insertion order.
#[derive(Default)]
struct Residual {
    lits: Vec<Lit>,
    weight: Vec<f64>,
    index: HashMap<Lit, usize>,
    /// Totalizer output position of relaxation literals: `!outputs[k]`.
    counter: Vec<Option<(usize, usize)>>,
}

impl Residual {
    fn add(&mut self, lit: Lit, w: f64, counter: Option<(usize, usize)>) {
        match self.index.get(&lit) {
            Some(&i) => self.weight[i] += w,
            None => {
                self.index.insert(lit, self.lits.len());
                self.lits.push(lit);
                self.weight.push(w);
                self.counter.push(counter);
            }
        }
    }
}

impl MaxSat {
    /// `hard` literals are assumed in every call. Soft literals with zero
    /// weight are ignored; repeated soft literals are merged by adding their
    /// weights.
    pub fn new(sat: Solver, hard: Vec<Lit>, softs: &[SoftLit]) -> Self {
        let mut merged: Vec<SoftLit> = Vec::new();
        let mut soft_of = HashMap::new();
        for s in softs {
            if s.weight.is_nan() || s.weight <= 0.0 {
                continue;
            }
            match soft_of.get(&s.lit) {
                Some(&i) => {
                    let m: &mut SoftLit = &mut merged[i];
                    m.weight += s.weight;
                }
                None => {
                    soft_of.insert(s.lit, merged.len());
                    merged.push(*s);
                }
            }
        }
        let hard_set = hard.iter().copied().collect();
        MaxSat {
            sat,
            hard,
            hard_set,
            softs: merged,
            totalizers: Vec::new(),
            totalizer_of: HashMap::new(),
            base_cores: None,
            sat_calls: 0,
        }
    }

    pub fn sat(&mut self) -> &mut Solver {
        &mut self.sat
    }

    pub fn softs(&self) -> &[SoftLit] {
        &self.softs
    }

    /// Adds a permanent hard clause.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        self.sat.add_clause(lits);
    }

    /// Total weight of the soft literals falsified by `model`, summed in a
    /// fixed order.
    pub fn cost_of(&self, model: &[bool]) -> f64 {
        self.softs
            .iter()
            .filter(|s| model[s.lit.var()] != s.lit.is_positive())
            .map(|s| s.weight)
            .sum()
    }

    fn call(&mut self, assumptions: &[Lit]) -> SatResult {
        self.sat_calls += 1;
        self.sat.solve(assumptions)
    }

    /// Minimum total weight of violated soft literals subject to the hard
    /// clauses, the hard literals and the `extra` literals.
    pub fn solve(&mut self, extra: &[Lit]) -> MaxSatOutcome {
        let mut base: Vec<Lit> = self.hard.clone();
        let mut seen: HashSet<Lit> = self.hard_set.clone();
        base.extend(extra.iter().copied().filter(|&l| seen.insert(l)));

        let mut best = match self.call(&base) {
            SatResult::Unsat(core) => return MaxSatOutcome::Infeasible(core),
            SatResult::Sat => self.sat.model().to_vec(),
        };
        let mut ub = self.cost_of(&best);
        let mut lb = 0.0;
        let mut res = Residual::default();
        for s in &self.softs {
            if !self.hard_set.contains(&s.lit) {
                res.add(s.lit, s.weight, None);
            }
        }
        let scale = self.softs.iter().map(|s| s.weight).fold(0.0, f64::max);
        let eps = tol(scale);
        let mut stratum = scale;
        // cores without extra literals stay cores under any extra literals
        let recording = base.len() == self.hard.len() && self.base_cores.is_none();
        if let Some(cores) = self.base_cores.clone() {
            for core in cores {
                let idx: Vec<usize> = core.iter().map(|l| res.index[l]).collect();
                self.relax(&mut res, &idx, &mut lb, eps);
            }
        }
        let mut recorded = Vec::new();

        loop {
            if ub <= lb + tol(ub) {
                if recording {
                    self.base_cores = Some(recorded);
                }
                return MaxSatOutcome::Optimal {
                    cost: ub,
                    model: best,
                };
            }
            let active: Vec<usize> = (0..res.lits.len())
                .filter(|&i| res.weight[i] > eps)
                .collect();
            let mut assumptions = base.clone();
            assumptions.extend(
                active
                    .iter()
                    .filter(|&&i| res.weight[i] >= stratum)
                    .map(|&i| res.lits[i]),
            );
            match self.call(&assumptions) {
                SatResult::Sat => {
                    let c = self.cost_of(self.sat.model());
                    if c < ub {
                        ub = c;
                        best = self.sat.model().to_vec();
                    }
                    let violated = |l: Lit| self.sat.model()[l.var()] != l.is_positive();
                    let lower = active
                        .iter()
                        .filter(|&&i| res.weight[i] < stratum && violated(res.lits[i]))
                        .map(|&i| res.weight[i])
                        .fold(0.0, f64::max);
                    if lower <= eps {
                        // every residual soft literal holds: the bound is met
                        if recording {
                            self.base_cores = Some(recorded);
                        }
                        return MaxSatOutcome::Optimal {
                            cost: ub,
                            model: best,
                        };
                    }
                    stratum = lower;
                }
                SatResult::Unsat(core) => {
                    let mut soft_core: Vec<usize> = core
                        .iter()
                        .filter(|l| !seen.contains(l))
                        .filter_map(|l| res.index.get(l).copied())
                        .collect();
                    if soft_core.is_empty() {
                        return MaxSatOutcome::Infeasible(core);
                    }
                    soft_core = self.minimize_core(&base, &res, soft_core);
                    soft_core.sort_unstable();
                    soft_core.dedup();
                    if recording {
                        recorded.push(soft_core.iter().map(|&i| res.lits[i]).collect());
                    }
                    self.relax(&mut res, &soft_core, &mut lb, eps);
                }
            }
        }
    }

    fn relax(&mut self, res: &mut Residual, core: &[usize], lb: &mut f64, eps: f64) {
        let w = core
            .iter()
            .map(|&i| res.weight[i])
            .fold(f64::INFINITY, f64::min);
        *lb += w;
        for &i in core {
            res.weight[i] -= w;
            if res.weight[i] <= eps {
                res.weight[i] = 0.0;
            }
            if let Some((t, k)) = res.counter[i] {
                if let Some(&next) = self.totalizers[t].outputs.get(k + 1) {
                    res.add(!next, w, Some((t, k + 1)));
                }
            }
        }
        if core.len() > 1 {
            let mut inputs: Vec<Lit> = core.iter().map(|&i| !res.lits[i]).collect();
            inputs.sort_unstable_by_key(|l| (l.var(), l.is_positive()));
            let t = self.totalizer(inputs);
            // at least one member is violated, so counting starts at two
            let second = self.totalizers[t].outputs[1];
            res.add(!second, w, Some((t, 1)));
        }
    }

    fn totalizer(&mut self, inputs: Vec<Lit>) -> usize {
        if let Some(&t) = self.totalizer_of.get(&inputs) {
            return t;
        }
        let outputs = self.count_up(&inputs);
        let t = self.totalizers.len();
        self.totalizers.push(Totalizer { outputs });
        self.totalizer_of.insert(inputs, t);
        t
    }

    fn count_up(&mut self, inputs: &[Lit]) -> Vec<Lit> {
        if inputs.len() == 1 {
            return inputs.to_vec();
        }
        let (l, r) = inputs.split_at(inputs.len() / 2);
        let a = self.count_up(l);
        let b = self.count_up(r);
        let out: Vec<Lit> = (0..inputs.len())
            .map(|_| Lit::pos(self.sat.new_var()))
            .collect();
        for i in 0..=a.len() {
            for j in 0..=b.len() {
                if i + j == 0 {
                    continue;
                }
                let mut clause = vec![out[i + j - 1]];
                if i > 0 {
                    clause.push(!a[i - 1]);
                }
                if j > 0 {
                    clause.push(!b[j - 1]);
                }
                self.sat.add_clause(&clause);
            }
        }
        out
    }

    /// Deletion-based shrinking of a core under a conflict budget.
    fn minimize_core(&mut self, base: &[Lit], res: &Residual, core: Vec<usize>) -> Vec<usize> {
        let mut current = core;
        // try dropping cheap elements first so the kept core is expensive
        let mut order = current.clone();
        order.sort_by(|&a, &b| res.weight[a].total_cmp(&res.weight[b]).then(a.cmp(&b)));
        for e in order {
            if !current.contains(&e) || current.len() == 1 {
                continue;
            }
            let mut assumptions = base.to_vec();
            assumptions.extend(current.iter().filter(|&&i| i != e).map(|&i| res.lits[i]));
            self.sat_calls += 1;
            if let Some(SatResult::Unsat(core)) =
                self.sat.solve_limited(&assumptions, MINIMIZE_BUDGET)
            {
                let reduced: Vec<usize> = core
                    .iter()
                    .filter_map(|l| res.index.get(l).copied())
                    .collect();
                if !reduced.is_empty() {
                    current = reduced;
                }
            }
        }
        current
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn brute_maxsat(n: usize, hard: &[Vec<Lit>], softs: &[SoftLit]) -> Option<f64> {
        let mut best: Option<f64> = None;
        for m in 0u32..1 << n {
            let val = |l: &Lit| (m >> l.var() & 1 == 1) == l.is_positive();
            if hard.iter().all(|c| c.iter().any(val)) {
                let cost: f64 = softs
                    .iter()
                    .filter(|s| !val(&s.lit))
                    .map(|s| s.weight)
                    .sum();
                best = Some(best.map_or(cost, |b: f64| b.min(cost)));
            }
        }
        best
    }

    #[test]
    fn maxsat_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..600 {
            let n = rng.random_range(2..11);
            let hard: Vec<Vec<Lit>> = (0..rng.random_range(0..12))
                .map(|_| {
                    (0..rng.random_range(1..4))
                        .map(|_| Lit::new(rng.random_range(0..n), rng.random_bool(0.5)))
                        .collect()
                })
                .collect();
            let softs: Vec<SoftLit> = (0..rng.random_range(0..24))
                .map(|_| SoftLit {
                    lit: Lit::new(rng.random_range(0..n), rng.random_bool(0.5)),
                    weight: rng.random_range(0.0..3.0),
                })
                .collect();
            let mut sat = Solver::new();
            sat.ensure_vars(n);
            for c in &hard {
                sat.add_clause(c);
            }
            let mut ms = MaxSat::new(sat, Vec::new(), &softs);
            match (ms.solve(&[]), brute_maxsat(n, &hard, &softs)) {
                (MaxSatOutcome::Optimal { cost, model }, Some(b)) => {
                    assert!((cost - b).abs() < 1e-9, "{cost} vs {b}");
                    assert!(hard
                        .iter()
                        .all(|c| c.iter().any(|l| model[l.var()] == l.is_positive())));
                }
                (MaxSatOutcome::Infeasible(_), None) => {}
                (got, want) => panic!("mismatch: {got:?} vs {want:?}"),
            }
            // extra assumptions behave like added unit clauses, across
            // repeated queries on the same solver
            for _ in 0..3 {
                let extra = Lit::new(rng.random_range(0..n), rng.random_bool(0.5));
                let mut hard2 = hard.clone();
                hard2.push(vec![extra]);
                match (ms.solve(&[extra]), brute_maxsat(n, &hard2, &softs)) {
                    (MaxSatOutcome::Optimal { cost, .. }, Some(b)) => {
                        assert!((cost - b).abs() < 1e-9)
                    }
                    (MaxSatOutcome::Infeasible(_), None) => {}
                    (got, want) => panic!("mismatch with extra: {got:?} vs {want:?}"),
                }
            }
        }
    }
}
