use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::CausalGraph;
use crate::error::{input_err, Result};
use crate::varset::{VarId, VarSet};

/// `determined` is a deterministic function of `determiners` and of no strict
/// subset of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetRelation {
    pub determiners: VarSet,
    pub determined: VarId,
}

/// The complete list of deterministic relations of a system.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DetRelationSet {
    relations: Vec<DetRelation>,
}

impl DetRelationSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates and stores `relations`. Non-minimal entries are rejected, not
    /// silently reduced.
    pub fn new(relations: Vec<DetRelation>) -> Result<Self> {
        for (i, a) in relations.iter().enumerate() {
            if a.determiners.contains(a.determined) {
                return input_err(format!(
                    "variable {} is listed among its own determiners",
                    a.determined
                ));
            }
            for (j, b) in relations.iter().enumerate() {
                if i == j || a.determined != b.determined {
                    continue;
                }
                if a.determiners == b.determiners {
                    return input_err(format!(
                        "duplicate deterministic relation for variable {}",
                        a.determined
                    ));
                }
                if b.determiners.is_subset(a.determiners) {
                    return input_err(format!(
                        "relation {:?} -> {} is not minimal: {:?} already determines it",
                        a.determiners, a.determined, b.determiners
                    ));
                }
            }
        }
        Ok(DetRelationSet { relations })
    }

    /// The relations implied by a JCI design: the regime determines every
    /// intervention variable and, optionally, the intervention variables
    /// jointly determine the regime.
    pub fn jci(regime: VarId, interventions: VarSet, interventions_determine_regime: bool) -> Self {
        let mut relations: Vec<DetRelation> = interventions
            .iter()
            .map(|i| DetRelation {
                determiners: VarSet::singleton(regime),
                determined: i,
            })
            .collect();
        if interventions_determine_regime {
            relations.push(DetRelation {
                determiners: interventions,
                determined: regime,
            });
        }
        // A regime that is the sole determiner of each column, and a single
        // joint relation back, is always minimal.
        DetRelationSet { relations }
    }

    pub fn relations(&self) -> &[DetRelation] {
        &self.relations
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// A copy without the given relation.
    pub fn without(&self, rel: &DetRelation) -> Self {
        DetRelationSet {
            relations: self
                .relations
                .iter()
                .filter(|r| *r != rel)
                .copied()
                .collect(),
        }
    }

    /// Least fixpoint of `w` under the relations: repeatedly adds the
    /// determined variable of any relation whose determiners are already in.
    pub fn closure(&self, w: VarSet) -> VarSet {
        let mut cur = w;
        loop {
            let mut next = cur;
            for r in &self.relations {
                if r.determiners.is_subset(next) {
                    next.insert(r.determined);
                }
            }
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }
}

/// Whether `x` is functionally determined by `w`: `x` is in `w`, or `x` has no
/// noise term and all of its parents are functionally determined by `w`.
pub fn functionally_determined(
    graph: &CausalGraph,
    x: VarId,
    w: VarSet,
    noiseless: VarSet,
) -> bool {
    fn rec(
        g: &CausalGraph,
        v: VarId,
        w: VarSet,
        noiseless: VarSet,
        memo: &mut HashMap<VarId, bool>,
    ) -> bool {
        if w.contains(v) {
            return true;
        }
        if !noiseless.contains(v) {
            return false;
        }
        if let Some(&b) = memo.get(&v) {
            return b;
        }
        let b = g.parents(v).iter().all(|p| rec(g, p, w, noiseless, memo));
        memo.insert(v, b);
        b
    }
    rec(graph, x, w, noiseless, &mut HashMap::new())
}
