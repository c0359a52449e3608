use std::collections::HashSet;

use serde::Serialize;

use crate::error::{input_err, Result};
use crate::statement::{DStatement, SepKind};
use crate::varset::{VarId, VarSet};

fn index(dstmts: &[DStatement]) -> HashSet<(VarId, VarId, u64, SepKind)> {
    dstmts
        .iter()
        .map(|s| (s.x.min(s.y), s.x.max(s.y), s.w.bits(), s.kind))
        .collect()
}

fn has(
    idx: &HashSet<(VarId, VarId, u64, SepKind)>,
    x: VarId,
    y: VarId,
    w: VarSet,
    kind: SepKind,
) -> bool {
    idx.contains(&(x.min(y), x.max(y), w.bits(), kind))
}

/// Pairs `(X, Y)` of `scope` with `R ⊥̸ X`, `X ⊥̸ Y` and `R ⊥ Y | X` all
/// present in `dstmts`; each such pair has `X ⇝ Y`.
pub fn lcd_scan(dstmts: &[DStatement], regime: VarId, scope: VarSet) -> Vec<(VarId, VarId)> {
    let idx = index(dstmts);
    let vars: Vec<VarId> = scope.without(regime).iter().collect();
    let mut out = Vec::new();
    for &x in &vars {
        if !has(&idx, regime, x, VarSet::EMPTY, SepKind::Connected) {
            continue;
        }
        for &y in &vars {
            if y != x
                && has(&idx, x, y, VarSet::EMPTY, SepKind::Connected)
                && has(&idx, regime, y, VarSet::singleton(x), SepKind::Separated)
            {
                out.push((x, y));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IcpResult {
    /// Intersection of all sets separating the regime from the target.
    Intersection(VarSet),
    /// No set in scope separates the regime from the target.
    NoInvariantSet,
}

/// Intersection of all `S ⊆ scope ∖ {regime, target}` with `R ⊥ target | S`
/// present in `dstmts`.
pub fn icp_intersection(
    dstmts: &[DStatement],
    regime: VarId,
    target: VarId,
    scope: VarSet,
) -> Result<IcpResult> {
    if target == regime {
        return input_err("the target must differ from the regime");
    }
    let allowed = scope.without(regime).without(target);
    let mut meet: Option<VarSet> = None;
    for s in dstmts {
        let pair = (s.x.min(s.y), s.x.max(s.y));
        if s.kind == SepKind::Separated
            && pair == (regime.min(target), regime.max(target))
            && s.w.is_subset(allowed)
        {
            meet = Some(meet.map_or(s.w, |m| m.intersection(s.w)));
        }
    }
    Ok(meet.map_or(IcpResult::NoInvariantSet, IcpResult::Intersection))
}
