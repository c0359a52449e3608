//! A small incremental CDCL SAT solver: two watched literals, first-UIP
//! learning, VSIDS-style activities with phase saving, Luby restarts and
//! solving under assumptions with final-conflict analysis.

use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: usize, positive: bool) -> Lit {
        Lit((var as u32) << 1 | (!positive) as u32)
    }

    pub fn pos(var: usize) -> Lit {
        Lit::new(var, true)
    }

    pub fn neg(var: usize) -> Lit {
        Lit::new(var, false)
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    /// Unsatisfiable under the assumptions; the payload is a subset of the
    /// assumptions that is already contradictory (empty: unsatisfiable
    /// without assumptions).
    Unsat(Vec<Lit>),
}

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;
const NO_REASON: u32 = u32::MAX;

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    activity: f64,
}

/// Binary max-heap over variables keyed by activity.
#[derive(Default)]
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl VarHeap {
    fn grow(&mut self) {
        self.pos.push(NOT_IN_HEAP);
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] != NOT_IN_HEAP
    }

    fn less(act: &[f64], a: usize, b: usize) -> bool {
        match act[a].partial_cmp(&act[b]).unwrap_or(Ordering::Equal) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => a < b,
        }
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::less(act, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i]] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let child = if r < self.heap.len() && Self::less(act, self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            if !Self::less(act, self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i]] = i;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v] = i;
        self.up(i, act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.up(self.pos[v], act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("nonempty");
        self.pos[top] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = 0;
            self.down(0, act);
        }
        Some(top)
    }
}

fn luby(mut i: u64) -> u64 {
    // i-th element (0-based) of 1,1,2,1,1,2,4,...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1u64 << seq
}

pub struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<u32>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    model: Vec<bool>,
    ok: bool,
    n_learnts: usize,
    max_learnts: usize,
    pub conflicts: u64,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            phase: Vec::new(),
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::default(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: Vec::new(),
            model: Vec::new(),
            ok: true,
            n_learnts: 0,
            max_learnts: 4000,
            conflicts: 0,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn new_var(&mut self) -> usize {
        let v = self.assigns.len();
        self.assigns.push(UNDEF);
        self.level.push(0);
        self.reason.push(NO_REASON);
        self.phase.push(false);
        self.activity.push(0.0);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.grow();
        self.heap.insert(v, &self.activity);
        v
    }

    pub fn ensure_vars(&mut self, n: usize) {
        while self.n_vars() < n {
            self.new_var();
        }
    }

    /// Preferred polarity for a variable when it is first decided.
    pub fn set_phase(&mut self, v: usize, positive: bool) {
        self.phase[v] = positive;
    }

    fn value(&self, l: Lit) -> i8 {
        let a = self.assigns[l.var()];
        if l.is_positive() {
            a
        } else {
            -a
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a permanent clause. Returns `false` once the clause set is
    /// unsatisfiable on its own.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return true;
        }
        c.retain(|&l| self.value(l) != FALSE);
        if c.iter().any(|&l| self.value(l) == TRUE) {
            return true;
        }
        match c.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(c[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(c, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cr = self.clauses.len() as u32;
        self.watches[(!lits[0]).index()].push(cr);
        self.watches[(!lits[1]).index()].push(cr);
        self.clauses.push(Clause {
            lits,
            learnt,
            activity: 0.0,
        });
        if learnt {
            self.n_learnts += 1;
        }
        cr
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        let v = l.var();
        self.assigns[v] = if l.is_positive() { TRUE } else { FALSE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns a conflicting clause.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.index()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let cr = ws[i];
                i += 1;
                let clause = &mut self.clauses[cr as usize];
                if clause.lits.is_empty() {
                    // deleted clause, drop the watch
                    continue;
                }
                if clause.lits[0] == false_lit {
                    clause.lits.swap(0, 1);
                }
                let first = clause.lits[0];
                let first_val = {
                    let a = self.assigns[first.var()];
                    if first.is_positive() {
                        a
                    } else {
                        -a
                    }
                };
                if first_val == TRUE {
                    ws[j] = cr;
                    j += 1;
                    continue;
                }
                let mut found = false;
                for k in 2..clause.lits.len() {
                    let l = clause.lits[k];
                    let a = self.assigns[l.var()];
                    let val = if l.is_positive() { a } else { -a };
                    if val != FALSE {
                        clause.lits.swap(1, k);
                        self.watches[(!clause.lits[1]).index()].push(cr);
                        found = true;
                        break;
                    }
                }
                if found {
                    continue;
                }
                ws[j] = cr;
                j += 1;
                if first_val == FALSE {
                    conflict = Some(cr);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, cr);
                }
            }
            ws.truncate(j);
            // watches for p may have gained entries while ws was taken out
            let added = std::mem::take(&mut self.watches[p.index()]);
            ws.extend(added);
            self.watches[p.index()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var();
            self.phase[v] = l.is_positive();
            self.assigns[v] = UNDEF;
            self.reason[v] = NO_REASON;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cr: u32) {
        let c = &mut self.clauses[cr as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis; returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut path = 0;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            self.bump_clause(confl);
            let lits = self.clauses[confl as usize].lits.clone();
            let start = if p.is_some() { 1 } else { 0 };
            for &q in &lits[start..] {
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[lit.var()] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var()];
        }
        learnt[0] = !p.expect("conflict has a UIP");

        // drop literals implied by the rest of the clause
        let keep: Vec<bool> = learnt
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                if k == 0 {
                    return true;
                }
                let r = self.reason[l.var()];
                if r == NO_REASON {
                    return true;
                }
                self.clauses[r as usize].lits[1..]
                    .iter()
                    .any(|q| !self.seen[q.var()] && self.level[q.var()] > 0)
            })
            .collect();
        for &l in &learnt[1..] {
            self.seen[l.var()] = false;
        }
        let mut out: Vec<Lit> = learnt
            .into_iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(l, _)| l)
            .collect();

        let bt = if out.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for k in 2..out.len() {
                if self.level[out[k].var()] > self.level[out[max_i].var()] {
                    max_i = k;
                }
            }
            out.swap(1, max_i);
            self.level[out[1].var()]
        };
        (out, bt)
    }

    /// The assumptions responsible for `p` being false.
    fn analyze_final(&mut self, p: Lit) -> Vec<Lit> {
        if self.decision_level() == 0 {
            return vec![!p];
        }
        let mut core = vec![p];
        self.seen[p.var()] = true;
        let start = self.trail_lim[0];
        for k in (start..self.trail.len()).rev() {
            let v = self.trail[k].var();
            if !self.seen[v] {
                continue;
            }
            let r = self.reason[v];
            if r == NO_REASON {
                if self.level[v] > 0 {
                    core.push(!self.trail[k]);
                }
            } else {
                for &q in &self.clauses[r as usize].lits[1..] {
                    if self.level[q.var()] > 0 {
                        self.seen[q.var()] = true;
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[p.var()] = false;
        // core holds the negations of assumptions; flip back
        core.iter().map(|&l| !l).collect()
    }

    fn reduce_learnts(&mut self) {
        let mut idx: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| {
                self.clauses[i].learnt
                    && !self.clauses[i].lits.is_empty()
                    && self.clauses[i].lits.len() > 2
            })
            .collect();
        idx.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .partial_cmp(&self.clauses[b].activity)
                .unwrap_or(Ordering::Equal)
        });
        let locked = |s: &Solver, i: usize| {
            let l = s.clauses[i].lits[0];
            s.value(l) == TRUE && s.reason[l.var()] == i as u32
        };
        let remove = idx.len() / 2;
        let mut removed = 0;
        for &i in idx.iter().take(remove) {
            if !locked(self, i) {
                self.clauses[i].lits.clear();
                self.n_learnts -= 1;
                removed += 1;
            }
        }
        if removed > 0 {
            for ws in self.watches.iter_mut() {
                let clauses = &self.clauses;
                ws.retain(|&cr| !clauses[cr as usize].lits.is_empty());
            }
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(Lit::new(v, self.phase[v]));
            }
        }
        None
    }

    /// Solves under `assumptions`. On success the model is available through
    /// [`Solver::model_value`].
    pub fn solve(&mut self, assumptions: &[Lit]) -> SatResult {
        self.solve_limited(assumptions, u64::MAX)
            .expect("unlimited search always finishes")
    }

    /// Like [`Solver::solve`] but gives up (`None`) after `max_conflicts`.
    pub fn solve_limited(&mut self, assumptions: &[Lit], max_conflicts: u64) -> Option<SatResult> {
        if !self.ok {
            return Some(SatResult::Unsat(Vec::new()));
        }
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return Some(SatResult::Unsat(Vec::new()));
        }
        let mut restart = 0u64;
        let mut spent = 0u64;
        loop {
            let budget = (100 * luby(restart)).min(max_conflicts - spent);
            restart += 1;
            let before = self.conflicts;
            let r = self.search(assumptions, budget);
            spent += self.conflicts - before;
            self.cancel_until(0);
            if r.is_some() {
                return r;
            }
            if spent >= max_conflicts {
                return None;
            }
        }
    }

    fn search(&mut self, assumptions: &[Lit], budget: u64) -> Option<SatResult> {
        let mut conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(SatResult::Unsat(Vec::new()));
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let first = learnt[0];
                    let cr = self.attach(learnt, true);
                    self.bump_clause(cr);
                    self.enqueue(first, cr);
                }
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
                continue;
            }
            if conflicts >= budget {
                return None;
            }
            if self.decision_level() == 0 && self.n_learnts > self.max_learnts {
                self.reduce_learnts();
                self.max_learnts += self.max_learnts / 10;
            }
            let mut next = None;
            while (self.decision_level() as usize) < assumptions.len() {
                let a = assumptions[self.decision_level() as usize];
                match self.value(a) {
                    TRUE => self.trail_lim.push(self.trail.len()),
                    FALSE => return Some(SatResult::Unsat(self.analyze_final(!a))),
                    _ => {
                        next = Some(a);
                        break;
                    }
                }
            }
            let lit = match next {
                Some(a) => a,
                None => match self.pick_branch() {
                    Some(l) => l,
                    None => {
                        self.model = self.assigns.iter().map(|&a| a == TRUE).collect();
                        return Some(SatResult::Sat);
                    }
                },
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(lit, NO_REASON);
        }
    }

    pub fn model_value(&self, v: usize) -> bool {
        self.model[v]
    }

    pub fn model(&self) -> &[bool] {
        &self.model
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(x: i32) -> Lit {
        Lit::new(x.unsigned_abs() as usize - 1, x > 0)
    }

    fn solver(n: usize, clauses: &[&[i32]]) -> Solver {
        let mut s = Solver::new();
        s.ensure_vars(n);
        for c in clauses {
            s.add_clause(&c.iter().map(|&x| lit(x)).collect::<Vec<_>>());
        }
        s
    }

    #[test]
    fn luby_sequence() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn simple_sat_and_unsat() {
        let mut s = solver(3, &[&[1, 2], &[-1, 3], &[-2, 3]]);
        assert_eq!(s.solve(&[]), SatResult::Sat);
        assert!(s.model_value(2));
        assert!(!s.add_clause(&[lit(-3)]) || s.solve(&[]) != SatResult::Sat);
    }

    #[test]
    fn assumption_core() {
        // a -> c, b -> !c
        let mut s = solver(4, &[&[-1, 3], &[-2, -3]]);
        match s.solve(&[lit(4), lit(1), lit(2)]) {
            SatResult::Unsat(core) => {
                let mut core = core;
                core.sort();
                assert_eq!(core, vec![lit(1), lit(2)]);
            }
            SatResult::Sat => panic!("expected unsat"),
        }
        assert_eq!(s.solve(&[lit(1)]), SatResult::Sat);
        assert!(!s.model_value(1));
    }

    fn pigeonhole(holes: usize) -> Solver {
        let pigeons = holes + 1;
        let var = |p: usize, h: usize| p * holes + h;
        let mut s = Solver::new();
        s.ensure_vars(pigeons * holes);
        for p in 0..pigeons {
            s.add_clause(&(0..holes).map(|h| Lit::pos(var(p, h))).collect::<Vec<_>>());
        }
        for h in 0..holes {
            for a in 0..pigeons {
                for b in a + 1..pigeons {
                    s.add_clause(&[Lit::neg(var(a, h)), Lit::neg(var(b, h))]);
                }
            }
        }
        s
    }

    #[test]
    fn pigeonhole_is_unsat() {
        for holes in 2..6 {
            assert_eq!(pigeonhole(holes).solve(&[]), SatResult::Unsat(vec![]));
        }
    }

    #[test]
    fn random_3sat_models_satisfy_clauses() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = 12;
            let clauses: Vec<Vec<Lit>> = (0..40)
                .map(|_| {
                    (0..3)
                        .map(|_| Lit::new(rng.random_range(0..n), rng.random_bool(0.5)))
                        .collect()
                })
                .collect();
            let mut s = Solver::new();
            s.ensure_vars(n);
            for c in &clauses {
                s.add_clause(c);
            }
            // brute force
            let brute = (0u32..1 << n).any(|m| {
                clauses.iter().all(|c| {
                    c.iter()
                        .any(|l| ((m >> l.var()) & 1 == 1) == l.is_positive())
                })
            });
            match s.solve(&[]) {
                SatResult::Sat => {
                    assert!(brute);
                    for c in &clauses {
                        assert!(c.iter().any(|l| s.model_value(l.var()) == l.is_positive()));
                    }
                }
                SatResult::Unsat(_) => assert!(!brute),
            }
        }
    }
}
