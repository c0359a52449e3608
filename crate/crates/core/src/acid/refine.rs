use std::collections::HashMap;

use super::ground::ProblemVariable;
use super::solve::AncestralStructure;
use crate::error::{Error, Result};
use crate::graph::Admg;
use crate::statement::{DStatement, SepKind};
use crate::varset::VarId;

/// Reads an ADMG off an ancestral structure and complete oracle statements.
///
/// Two variables are adjacent unless some statement separates them. Adjacent
/// pairs get `X -> Y` when `X ⇝ Y` and `X <-> Y` when neither is an ancestor
/// of the other. Bidirected edges touching a dummy variable are dropped.
pub fn refine_to_admg(
    structure: &AncestralStructure,
    dstmts: &[DStatement],
    variables: &[ProblemVariable],
) -> Result<Admg> {
    let ids = structure.ids();
    let kind: HashMap<VarId, _> = variables.iter().map(|v| (v.id, v.kind)).collect();
    let mut admg = Admg {
        nodes: ids.iter().collect(),
        ..Default::default()
    };
    let mut verdicts: HashMap<(VarId, VarId, u64), SepKind> = HashMap::new();
    for s in dstmts {
        if let Some(prev) = verdicts.insert((s.x.min(s.y), s.x.max(s.y), s.w.bits()), s.kind) {
            if prev != s.kind {
                return Err(Error::Refinement(format!(
                    "conflicting statements for ({}, {}) given {:?}",
                    s.x, s.y, s.w
                )));
            }
        }
    }
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            let separated = dstmts
                .iter()
                .any(|s| s.kind == SepKind::Separated && (s.x.min(s.y), s.x.max(s.y)) == (a, b));
            if separated {
                continue;
            }
            match (structure.causes(a, b)?, structure.causes(b, a)?) {
                (true, true) => {
                    return Err(Error::Refinement(format!(
                        "{a} and {b} are ancestors of each other"
                    )))
                }
                (true, false) => {
                    admg.directed.insert((a, b));
                }
                (false, true) => {
                    admg.directed.insert((b, a));
                }
                (false, false) => {
                    let dummy = |v: VarId| kind.get(&v).is_some_and(|k| k.is_dummy());
                    if !dummy(a) && !dummy(b) {
                        admg.add_bidirected(a, b);
                    }
                }
            }
        }
    }
    Ok(admg)
}
