use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{CausalGraph, VarKind};
use crate::varset::{VarId, VarSet};

/// Acyclic directed mixed graph. Node ids refer to the graph it was derived
/// from; bidirected pairs are stored with the smaller id first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admg {
    pub nodes: VarSet,
    pub directed: BTreeSet<(VarId, VarId)>,
    pub bidirected: BTreeSet<(VarId, VarId)>,
}

impl Admg {
    pub fn add_bidirected(&mut self, a: VarId, b: VarId) {
        self.bidirected.insert((a.min(b), a.max(b)));
    }

    pub fn is_adjacent(&self, a: VarId, b: VarId) -> bool {
        self.directed.contains(&(a, b))
            || self.directed.contains(&(b, a))
            || self.bidirected.contains(&(a.min(b), a.max(b)))
    }
}

/// Projects out every latent variable: `A -> B` when a directed path from `A`
/// to `B` has only latent interior nodes, `A <-> B` when some latent variable
/// reaches both through such paths.
pub fn latent_project(g: &CausalGraph) -> Admg {
    let latent = g.of_kind(VarKind::Latent);
    let observed = g.all().difference(latent);

    // Observed nodes reachable from `v` through latent-only interiors.
    let reach = |v: VarId| -> VarSet {
        let mut out = VarSet::EMPTY;
        let mut seen = VarSet::EMPTY;
        let mut stack: Vec<VarId> = g.children(v).iter().collect();
        while let Some(c) = stack.pop() {
            if seen.contains(c) {
                continue;
            }
            seen.insert(c);
            if latent.contains(c) {
                stack.extend(g.children(c).iter());
            } else {
                out.insert(c);
            }
        }
        out
    };

    let mut admg = Admg {
        nodes: observed,
        ..Default::default()
    };
    for a in observed {
        for b in reach(a) {
            admg.directed.insert((a, b));
        }
    }
    for l in latent {
        let targets: Vec<VarId> = reach(l).iter().collect();
        for (i, &a) in targets.iter().enumerate() {
            for &b in &targets[i + 1..] {
                admg.add_bidirected(a, b);
            }
        }
    }
    admg
}
