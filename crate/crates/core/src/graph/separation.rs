use super::{CausalGraph, DetRelationSet};
use crate::error::{input_err, Result};
use crate::statement::{DStatement, SepKind};
use crate::varset::{VarId, VarSet};

fn check_sets(g: &CausalGraph, x: VarSet, y: VarSet, w: VarSet) -> Result<()> {
    g.check_ids(x.union(y).union(w))?;
    if x.is_empty() || y.is_empty() {
        return input_err("separation endpoints must be nonempty");
    }
    if !x.is_disjoint(y) || !x.is_disjoint(w) || !y.is_disjoint(w) {
        return input_err("separation sets must be pairwise disjoint");
    }
    Ok(())
}

/// Standard d-separation of `x` and `y` given `w`.
pub fn is_d_separated(g: &CausalGraph, x: VarSet, y: VarSet, w: VarSet) -> Result<bool> {
    check_sets(g, x, y, w)?;
    let openers = g.ancestors_unchecked(w);
    Ok(!reachable(g, x, y, w, openers))
}

/// D-separation: like d-separation, except that non-colliders (end nodes
/// included) block when they lie in the deterministic closure of `w`.
pub fn is_det_separated(
    g: &CausalGraph,
    det: &DetRelationSet,
    x: VarSet,
    y: VarSet,
    w: VarSet,
) -> Result<bool> {
    check_sets(g, x, y, w)?;
    let blockers = det.closure(w);
    let openers = g.ancestors_unchecked(w);
    Ok(!reachable(g, x, y, blockers, openers))
}

const UP: usize = 0; // entered from a child
const DOWN: usize = 1; // entered from a parent

/// Whether some walk from `x` to `y` is open: every non-collider outside
/// `blockers` and every collider inside `openers`. Open walks and open paths
/// coincide as long as `openers` is closed under ancestors.
fn reachable(g: &CausalGraph, x: VarSet, y: VarSet, blockers: VarSet, openers: VarSet) -> bool {
    let mut visited = [VarSet::EMPTY; 2];
    let mut stack: Vec<(VarId, usize)> = x.difference(blockers).iter().map(|v| (v, UP)).collect();
    while let Some((v, dir)) = stack.pop() {
        if visited[dir].contains(v) {
            continue;
        }
        visited[dir].insert(v);
        let blocked = blockers.contains(v);
        if y.contains(v) && !blocked {
            return true;
        }
        if dir == UP {
            if !blocked {
                stack.extend(g.parents(v).iter().map(|p| (p, UP)));
                stack.extend(g.children(v).iter().map(|c| (c, DOWN)));
            }
        } else {
            if !blocked {
                stack.extend(g.children(v).iter().map(|c| (c, DOWN)));
            }
            if openers.contains(v) {
                stack.extend(g.parents(v).iter().map(|p| (p, UP)));
            }
        }
    }
    false
}

/// Number of statements [`enumerate_d_statements`] emits for `n` scope
/// variables.
pub fn statement_count(n: usize, max_order: usize) -> usize {
    fn binom(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    if n < 2 {
        return 0;
    }
    binom(n, 2) * (0..=max_order).map(|k| binom(n - 2, k)).sum::<usize>()
}

/// Every pairwise D-separation fact over `scope` with conditioning sets of
/// size at most `max_order`, as infinite-weight statements.
pub fn enumerate_d_statements(
    g: &CausalGraph,
    det: &DetRelationSet,
    scope: VarSet,
    max_order: usize,
) -> Result<Vec<DStatement>> {
    g.check_ids(scope)?;
    let members: Vec<VarId> = scope.iter().collect();
    let mut out = Vec::with_capacity(statement_count(members.len(), max_order));
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            let rest = scope.without(a).without(b);
            for w in rest.subsets_up_to(max_order) {
                let sep = is_det_separated(g, det, VarSet::singleton(a), VarSet::singleton(b), w)?;
                let kind = if sep {
                    SepKind::Separated
                } else {
                    SepKind::Connected
                };
                out.push(DStatement::new(kind, a, b, w, f64::INFINITY)?);
            }
        }
    }
    Ok(out)
}
