use std::collections::BTreeMap;

use crate::graph::DetRelationSet;
use crate::statement::{DStatement, SepKind, TestKind, WeightedStatement};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Conversion {
    /// Sorted by statement key, one entry per (kind, pair, conditioning set).
    pub dstatements: Vec<DStatement>,
    /// Independences ignored because an endpoint lies in `Det(W)`.
    pub dropped: usize,
}

/// Dependences become d-connections given `W`. Independences become
/// d-separations given `Det(W)` unless an endpoint is in `Det(W)`, in which
/// case they carry no graphical information and are dropped. Duplicates keep
/// the largest weight.
pub fn statements_to_dstatements(stmts: &[WeightedStatement], det: &DetRelationSet) -> Conversion {
    let mut out: BTreeMap<_, DStatement> = BTreeMap::new();
    let mut dropped = 0;
    for s in stmts {
        let d = match s.kind {
            TestKind::Dependent => DStatement {
                kind: SepKind::Connected,
                x: s.x,
                y: s.y,
                w: s.w,
                weight: s.weight,
            },
            TestKind::Independent => {
                let closed = det.closure(s.w);
                if closed.contains(s.x) || closed.contains(s.y) {
                    dropped += 1;
                    continue;
                }
                DStatement {
                    kind: SepKind::Separated,
                    x: s.x,
                    y: s.y,
                    w: closed,
                    weight: s.weight,
                }
            }
        };
        out.entry(d.key())
            .and_modify(|e: &mut DStatement| e.weight = e.weight.max(d.weight))
            .or_insert(d);
    }
    Conversion {
        dstatements: out.into_values().collect(),
        dropped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DetRelation;
    use crate::varset::VarSet;

    const R: usize = 0;
    const I1: usize = 1;
    const X1: usize = 2;
    const X2: usize = 3;

    fn ind(x: usize, y: usize, w: &[usize], weight: f64) -> WeightedStatement {
        WeightedStatement::new(
            TestKind::Independent,
            x,
            y,
            w.iter().collect(),
            weight,
            None,
        )
        .unwrap()
    }

    #[test]
    fn determined_endpoint_is_dropped() {
        let det = DetRelationSet::new(vec![DetRelation {
            determiners: VarSet::singleton(R),
            determined: I1,
        }])
        .unwrap();
        let c = statements_to_dstatements(&[ind(I1, X2, &[R], 1.0)], &det);
        assert!(c.dstatements.is_empty());
        assert_eq!(c.dropped, 1);
    }

    #[test]
    fn separating_set_is_closed() {
        let det = DetRelationSet::jci(R, VarSet::singleton(I1), true);
        let c = statements_to_dstatements(&[ind(X1, X2, &[I1], 2.0)], &det);
        assert_eq!(c.dropped, 0);
        assert_eq!(
            c.dstatements,
            vec![DStatement::separated(X1, X2, [I1, R].iter().collect(), 2.0).unwrap()]
        );
    }

    #[test]
    fn dependences_pass_through_and_duplicates_keep_max() {
        let dep =
            WeightedStatement::new(TestKind::Dependent, X1, X2, VarSet::EMPTY, 3.2, None).unwrap();
        let c = statements_to_dstatements(&[dep], &DetRelationSet::empty());
        assert_eq!(
            c.dstatements,
            vec![DStatement::connected(X1, X2, VarSet::EMPTY, 3.2).unwrap()]
        );

        let det = DetRelationSet::jci(R, VarSet::singleton(I1), true);
        let c = statements_to_dstatements(
            &[
                ind(X1, X2, &[I1], 2.0),
                ind(X1, X2, &[R], 5.0),
                ind(X1, X2, &[I1, R], 1.0),
            ],
            &det,
        );
        assert_eq!(c.dstatements.len(), 1);
        assert_eq!(c.dstatements[0].weight, 5.0);
    }
}
