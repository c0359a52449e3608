#![allow(dead_code)]

use jci::acid::{GroundedProblem, Lit};
use jci::graph::{CausalGraph, DetRelation, DetRelationSet, GraphBuilder, VarKind};
use jci::statement::SepKind;
use jci::{VarId, VarSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random DAG over `n` system variables under a random order.
pub fn random_dag(rng: &mut ChaCha8Rng, n: usize, p_edge: f64) -> CausalGraph {
    let mut b = GraphBuilder::new();
    for k in 0..n {
        b.system(&format!("V{k}"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p_edge) {
                b.edge(order[i], order[j]);
            }
        }
    }
    b.build().unwrap()
}

/// Random JCI graph: regime `R` = 0, interventions `I1..Ii`, systems
/// `X1..Xp`, then latents. With `i = 0` the regime points at systems directly.
pub fn random_jci_graph(
    rng: &mut ChaCha8Rng,
    p: usize,
    i: usize,
    latents: usize,
    p_edge: f64,
) -> CausalGraph {
    let mut b = GraphBuilder::new();
    let r = b.var("R", VarKind::Regime);
    let ints: Vec<VarId> = (1..=i)
        .map(|k| b.var(&format!("I{k}"), VarKind::Intervention))
        .collect();
    let sys: Vec<VarId> = (1..=p).map(|k| b.system(&format!("X{k}"))).collect();
    let lats: Vec<VarId> = (1..=latents)
        .map(|k| b.var(&format!("L{k}"), VarKind::Latent))
        .collect();
    for &v in &ints {
        b.edge(r, v);
    }
    let mut order = sys.clone();
    order.shuffle(rng);
    for a in 0..p {
        for c in a + 1..p {
            if rng.random_bool(p_edge) {
                b.edge(order[a], order[c]);
            }
        }
    }
    let sources: Vec<VarId> = if ints.is_empty() {
        vec![r]
    } else {
        ints.clone()
    };
    for &s in &sources {
        for &x in &sys {
            if rng.random_bool(p_edge * 0.6) {
                b.edge(s, x);
            }
        }
    }
    for &l in &lats {
        let mut targets = sys.clone();
        targets.shuffle(rng);
        for &x in targets.iter().take(2) {
            b.edge(l, x);
        }
    }
    b.build_jci().unwrap()
}

/// `m[a][b]`: a directed path from `a` to `b` exists (reflexive).
pub fn ancestor_matrix(g: &CausalGraph) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut m = vec![vec![false; n]; n];
    for (a, row) in m.iter_mut().enumerate() {
        row[a] = true;
    }
    for (a, b) in g.edges() {
        m[a][b] = true;
    }
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                if m[a][k] && m[k][b] {
                    m[a][b] = true;
                }
            }
        }
    }
    m
}

/// Fixpoint of the relations, computed independently of the library.
pub fn closure_by_hand(det: &DetRelationSet, w: VarSet) -> VarSet {
    let mut cur = w;
    loop {
        let next = det
            .relations()
            .iter()
            .filter(|r| r.determiners.is_subset(cur))
            .fold(cur, |acc, r| acc.with(r.determined));
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// Separation by enumerating every simple path between `x` and `y`. A path
/// is blocked by a non-collider (end nodes included) in `blockers` or by a
/// collider that is not an ancestor of `w`.
pub fn path_separated(g: &CausalGraph, x: VarId, y: VarId, w: VarSet, blockers: VarSet) -> bool {
    let anc = ancestor_matrix(g);
    let n = g.n();
    let adj = |a: usize, b: usize| g.has_edge(a, b) || g.has_edge(b, a);
    let collider_open = |c: usize| w.iter().any(|v| anc[c][v]);
    let mut path = vec![x];
    let mut on = vec![false; n];
    on[x] = true;
    fn blocked(
        g: &CausalGraph,
        path: &[usize],
        blockers: VarSet,
        open: &dyn Fn(usize) -> bool,
    ) -> bool {
        let k = path.len();
        if blockers.contains(path[0]) || blockers.contains(path[k - 1]) {
            return true;
        }
        (1..k - 1).any(|i| {
            let (a, m, b) = (path[i - 1], path[i], path[i + 1]);
            let collider = g.has_edge(a, m) && g.has_edge(b, m);
            if collider {
                !open(m)
            } else {
                blockers.contains(m)
            }
        })
    }
    fn walk(
        g: &CausalGraph,
        y: usize,
        path: &mut Vec<usize>,
        on: &mut Vec<bool>,
        adj: &dyn Fn(usize, usize) -> bool,
        blockers: VarSet,
        open: &dyn Fn(usize) -> bool,
    ) -> bool {
        let last = *path.last().unwrap();
        if last == y {
            return !blocked(g, path, blockers, open);
        }
        for v in 0..g.n() {
            if !on[v] && adj(last, v) {
                on[v] = true;
                path.push(v);
                let found = walk(g, y, path, on, adj, blockers, open);
                path.pop();
                on[v] = false;
                if found {
                    return true;
                }
            }
        }
        false
    }
    !walk(g, y, &mut path, &mut on, &adj, blockers, &collider_open)
}

pub fn path_d_separated(g: &CausalGraph, x: VarId, y: VarId, w: VarSet) -> bool {
    path_separated(g, x, y, w, w)
}

pub fn path_det_separated(
    g: &CausalGraph,
    det: &DetRelationSet,
    x: VarId,
    y: VarId,
    w: VarSet,
) -> bool {
    path_separated(g, x, y, w, closure_by_hand(det, w))
}

/// Exhaustive optimum of a grounded problem: every partial order on the
/// problem variables combined with every assignment of the d-separation
/// atoms that satisfies the hard clauses. Returns the optimal loss and the
/// number of distinct optimal ancestral structures, or `None` when nothing
/// is feasible.
pub fn brute_force(problem: &GroundedProblem) -> Option<(f64, usize)> {
    let n = problem.n();
    let k = problem.atoms().len();
    assert!(k <= 16, "too many atoms for exhaustive search");
    let off: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let soft: Vec<(Lit, f64)> = problem
        .inputs()
        .iter()
        .filter(|s| s.weight.is_finite())
        .map(|s| {
            (
                problem
                    .sep_lit(s.x, s.y, s.w, s.kind == SepKind::Separated)
                    .unwrap()
                    .unwrap(),
                s.weight,
            )
        })
        .collect();
    let mut best: Option<f64> = None;
    let mut count = 0;
    for mask in 0u64..1 << off.len() {
        let mut m = vec![vec![false; n]; n];
        for (a, row) in m.iter_mut().enumerate() {
            row[a] = true;
        }
        for (bit, &(a, b)) in off.iter().enumerate() {
            m[a][b] = mask >> bit & 1 == 1;
        }
        let partial_order = (0..n).all(|a| (0..n).all(|b| a == b || !(m[a][b] && m[b][a])))
            && (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| !(m[a][b] && m[b][c]) || m[a][c])));
        if !partial_order {
            continue;
        }
        let mut structure_best: Option<f64> = None;
        for atoms in 0u64..1 << k {
            let value = |l: Lit| {
                let v = l.var();
                let t = if v < n * n {
                    m[v / n][v % n]
                } else {
                    atoms >> (v - n * n) & 1 == 1
                };
                t == l.is_positive()
            };
            if !problem
                .clauses()
                .iter()
                .all(|c| c.lits.iter().any(|&l| value(l)))
            {
                continue;
            }
            let loss: f64 = soft
                .iter()
                .filter(|(l, _)| !value(*l))
                .map(|(_, w)| w)
                .sum();
            structure_best = Some(structure_best.map_or(loss, |b: f64| b.min(loss)));
        }
        if let Some(loss) = structure_best {
            match best {
                Some(b) if loss > b + 1e-9 => {}
                Some(b) if (loss - b).abs() <= 1e-9 => count += 1,
                _ => {
                    best = Some(loss);
                    count = 1;
                }
            }
        }
    }
    best.map(|b| (b, count))
}

fn chain_graph(names: &[(&str, VarKind)], edges: &[(usize, usize)]) -> CausalGraph {
    let mut b = GraphBuilder::new();
    for (name, kind) in names {
        b.var(name, *kind);
    }
    for &(x, y) in edges {
        b.edge(x, y);
    }
    b.build_jci().unwrap()
}

/// `I1 -> X1 -> X2`, the regime written as `I1`.
pub fn instrumented_chain() -> CausalGraph {
    chain_graph(
        &[
            ("I1", VarKind::Regime),
            ("X1", VarKind::System),
            ("X2", VarKind::System),
        ],
        &[(0, 1), (1, 2)],
    )
}

/// `I1 -> X1 -> X2 -> X3` and `I1 -> X3`, the regime written as `I1`.
pub fn instrumented_shortcut() -> CausalGraph {
    chain_graph(
        &[
            ("I1", VarKind::Regime),
            ("X1", VarKind::System),
            ("X2", VarKind::System),
            ("X3", VarKind::System),
        ],
        &[(0, 1), (0, 3), (1, 2), (2, 3)],
    )
}

/// `R -> X1 -> X2 -> Y`.
pub fn icp_chain() -> CausalGraph {
    chain_graph(
        &[
            ("R", VarKind::Regime),
            ("X1", VarKind::System),
            ("X2", VarKind::System),
            ("Y", VarKind::System),
        ],
        &[(0, 1), (1, 2), (2, 3)],
    )
}

/// `R -> I1 -> X2 -> Y`.
pub fn icp_with_intervention() -> CausalGraph {
    chain_graph(
        &[
            ("R", VarKind::Regime),
            ("I1", VarKind::Intervention),
            ("X2", VarKind::System),
            ("Y", VarKind::System),
        ],
        &[(0, 1), (1, 2), (2, 3)],
    )
}

/// Deterministic relations of a JCI graph with indicator-coded interventions.
pub fn jci_det(g: &CausalGraph) -> DetRelationSet {
    let ints = g.interventions();
    DetRelationSet::jci(g.regime().unwrap(), ints, !ints.is_empty())
}

/// Oracle statements of `g` over its observed variables, converted into
/// d-statements.
pub fn oracle_dstatements(g: &CausalGraph, max_order: usize) -> Vec<jci::statement::DStatement> {
    let det = jci_det(g);
    let raw = jci::graph::enumerate_d_statements(g, &det, g.observed(), max_order).unwrap();
    let tests: Vec<_> = raw.iter().map(|s| s.as_test_result()).collect();
    jci::indep::statements_to_dstatements(&tests, &det).dstatements
}

/// Grounded JCI problem over the observed variables of `g` with oracle inputs.
pub fn oracle_problem(g: &CausalGraph, max_order: usize) -> GroundedProblem {
    use jci::acid::{ground_rules, ProblemSpec, ProblemVariable};
    let spec = ProblemSpec::new(ProblemVariable::from_graph(g, g.observed()), max_order)
        .jci(jci_det(g))
        .with_inputs(oracle_dstatements(g, max_order));
    ground_rules(&spec).unwrap()
}

/// `X -> Y -> Z`, `Y -> U` with `Y` a function of `X`.
pub fn determined_chain() -> (CausalGraph, DetRelationSet) {
    let mut b = GraphBuilder::new();
    let [x, y, z, u] = ["X", "Y", "Z", "U"].map(|n| b.system(n));
    b.edge(x, y).edge(y, z).edge(y, u);
    let det = DetRelationSet::new(vec![DetRelation {
        determiners: VarSet::singleton(x),
        determined: y,
    }])
    .unwrap();
    (b.build().unwrap(), det)
}

/// `X -> Y <- S`, `X -> Z`, `X -> U` with `Y = X xor S`.
pub fn xor_collider() -> (CausalGraph, DetRelationSet) {
    let mut b = GraphBuilder::new();
    let [x, y, z, u, s] = ["X", "Y", "Z", "U", "S"].map(|n| b.system(n));
    b.edge(x, y).edge(s, y).edge(x, z).edge(x, u);
    let rel = |a: VarId, c: VarId, d: VarId| DetRelation {
        determiners: VarSet::singleton(a).with(c),
        determined: d,
    };
    let det = DetRelationSet::new(vec![rel(x, s, y), rel(y, x, s), rel(y, s, x)]).unwrap();
    (b.build().unwrap(), det)
}

pub fn set(ids: &[VarId]) -> VarSet {
    ids.iter().copied().collect()
}

/// Every `(x, y, w)` with `x < y` in `scope` and `w` drawn from the rest of
/// `scope` with at most `max_order` elements.
pub fn all_triples(scope: VarSet, max_order: usize) -> Vec<(VarId, VarId, VarSet)> {
    let mut out = Vec::new();
    for x in scope.iter() {
        for y in scope.iter().filter(|&y| y > x) {
            for w in scope.without(x).without(y).subsets_up_to(max_order) {
                out.push((x, y, w));
            }
        }
    }
    out
}
