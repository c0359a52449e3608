//! JSON graph files:
//!
//! ```json
//! {"variables": [{"id": 0, "name": "R", "kind": "regime"}, ...],
//!  "edges": [[0, 1], ...],
//!  "det": [{"from": [0], "to": 1}, ...]}
//! ```
//!
//! Ids must be `0..n`. A graph containing a regime variable is loaded as a
//! JCI graph and must satisfy the JCI shape.

use serde::{Deserialize, Serialize};

use super::{CausalGraph, DetRelation, DetRelationSet, VarKind, Variable};
use crate::error::Result;
use crate::varset::VarId;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphFileVariable {
    pub id: VarId,
    pub name: String,
    pub kind: VarKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphFileDet {
    pub from: Vec<VarId>,
    pub to: VarId,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphFile {
    pub variables: Vec<GraphFileVariable>,
    pub edges: Vec<[VarId; 2]>,
    #[serde(default)]
    pub det: Vec<GraphFileDet>,
}

impl GraphFile {
    pub fn from_graph(g: &CausalGraph, det: &DetRelationSet) -> Self {
        GraphFile {
            variables: g
                .variables()
                .iter()
                .map(|v| GraphFileVariable {
                    id: v.id,
                    name: v.name.clone(),
                    kind: v.kind,
                })
                .collect(),
            edges: g.edges().into_iter().map(|(a, b)| [a, b]).collect(),
            det: det
                .relations()
                .iter()
                .map(|r| GraphFileDet {
                    from: r.determiners.iter().collect(),
                    to: r.determined,
                })
                .collect(),
        }
    }

    pub fn into_graph(self) -> Result<(CausalGraph, DetRelationSet)> {
        let mut vars: Vec<Variable> = self
            .variables
            .into_iter()
            .map(|v| Variable {
                id: v.id,
                name: v.name,
                kind: v.kind,
            })
            .collect();
        vars.sort_by_key(|v| v.id);
        let jci = vars.iter().any(|v| v.kind == VarKind::Regime);
        let edges: Vec<(VarId, VarId)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let g = if jci {
            CausalGraph::new_jci(vars, &edges)?
        } else {
            CausalGraph::new(vars, &edges)?
        };
        let rels = self
            .det
            .into_iter()
            .map(|d| {
                g.check_ids(d.from.iter().collect())?;
                g.check_ids(crate::VarSet::singleton(d.to))?;
                Ok(DetRelation {
                    determiners: d.from.iter().collect(),
                    determined: d.to,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((g, DetRelationSet::new(rels)?))
    }

    pub fn parse(text: &str) -> Result<(CausalGraph, DetRelationSet)> {
        let f: GraphFile = serde_json::from_str(text)?;
        f.into_graph()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph files always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_jci_graph() {
        let text = r#"{"variables":[{"id":0,"name":"R","kind":"regime"},{"id":1,"name":"I1","kind":"intervention"},
            {"id":2,"name":"X1","kind":"system"}],"edges":[[0,1],[1,2]],"det":[{"from":[0],"to":1}]}"#;
        let (g, d) = GraphFile::parse(text).unwrap();
        assert!(g.is_jci());
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(d.relations().len(), 1);
        let again = GraphFile::from_graph(&g, &d).to_json();
        let (g2, d2) = GraphFile::parse(&again).unwrap();
        assert_eq!(g, g2);
        assert_eq!(d, d2);
    }

    #[test]
    fn rejects_bad_ids() {
        let text = r#"{"variables":[{"id":1,"name":"A","kind":"system"}],"edges":[]}"#;
        assert!(GraphFile::parse(text).is_err());
    }
}
