//! Weighted (in)dependence test results and the d-separation statements
//! derived from them, plus the line-oriented statement file format:
//!
//! ```text
//! sep X1 X2 | R I1 : 3.25
//! con X1 X3 | : inf
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::varset::{VarId, VarSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TestKind {
    Independent,
    Dependent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SepKind {
    Separated,
    Connected,
}

impl SepKind {
    pub fn is_separated(self) -> bool {
        self == SepKind::Separated
    }

    fn keyword(self) -> &'static str {
        match self {
            SepKind::Separated => "sep",
            SepKind::Connected => "con",
        }
    }
}

fn check_triple(x: VarId, y: VarId, w: VarSet, weight: f64) -> Result<(VarId, VarId)> {
    if x == y {
        return Err(Error::Input(format!("statement endpoints coincide ({x})")));
    }
    if w.contains(x) || w.contains(y) {
        return Err(Error::Input(
            "statement endpoint inside its conditioning set".into(),
        ));
    }
    if weight.is_nan() || weight < 0.0 {
        return Err(Error::Input(format!(
            "statement weight must be nonnegative, got {weight}"
        )));
    }
    Ok((x.min(y), x.max(y)))
}

/// A statistical test result: `x` and `y` (in)dependent given `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedStatement {
    pub kind: TestKind,
    pub x: VarId,
    pub y: VarId,
    pub w: VarSet,
    pub weight: f64,
    pub p_value: Option<f64>,
}

impl WeightedStatement {
    pub fn new(
        kind: TestKind,
        x: VarId,
        y: VarId,
        w: VarSet,
        weight: f64,
        p_value: Option<f64>,
    ) -> Result<Self> {
        let (x, y) = check_triple(x, y, w, weight)?;
        Ok(WeightedStatement {
            kind,
            x,
            y,
            w,
            weight,
            p_value,
        })
    }

    pub fn order(&self) -> usize {
        self.w.len()
    }
}

/// A d-separation or d-connection statement with a confidence weight;
/// `f64::INFINITY` marks oracle knowledge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DStatement {
    pub kind: SepKind,
    pub x: VarId,
    pub y: VarId,
    pub w: VarSet,
    pub weight: f64,
}

impl DStatement {
    /// Normalizes the pair so that `x < y`.
    pub fn new(kind: SepKind, x: VarId, y: VarId, w: VarSet, weight: f64) -> Result<Self> {
        let (x, y) = check_triple(x, y, w, weight)?;
        Ok(DStatement {
            kind,
            x,
            y,
            w,
            weight,
        })
    }

    pub fn separated(x: VarId, y: VarId, w: VarSet, weight: f64) -> Result<Self> {
        Self::new(SepKind::Separated, x, y, w, weight)
    }

    pub fn connected(x: VarId, y: VarId, w: VarSet, weight: f64) -> Result<Self> {
        Self::new(SepKind::Connected, x, y, w, weight)
    }

    pub fn involves(&self, v: VarId) -> bool {
        self.x == v || self.y == v
    }

    /// Reads an oracle (or graph-derived) statement as the matching
    /// population-level test result.
    pub fn as_test_result(&self) -> WeightedStatement {
        WeightedStatement {
            kind: if self.kind.is_separated() {
                TestKind::Independent
            } else {
                TestKind::Dependent
            },
            x: self.x,
            y: self.y,
            w: self.w,
            weight: self.weight,
            p_value: None,
        }
    }

    /// Sort key: pair, conditioning set, kind.
    pub fn key(&self) -> (VarId, VarId, usize, u64, SepKind) {
        (self.x, self.y, self.w.len(), self.w.bits(), self.kind)
    }
}

impl From<&WeightedStatement> for DStatement {
    /// The literal reading of a test result, without any determinism handling.
    fn from(s: &WeightedStatement) -> Self {
        DStatement {
            kind: match s.kind {
                TestKind::Independent => SepKind::Separated,
                TestKind::Dependent => SepKind::Connected,
            },
            x: s.x,
            y: s.y,
            w: s.w,
            weight: s.weight,
        }
    }
}

fn fmt_weight(w: f64) -> String {
    if w.is_infinite() {
        "inf".to_string()
    } else {
        format!("{w}")
    }
}

/// Renders statements one per line using `names` for variable ids.
pub fn write_statements<S: AsRef<str>>(stmts: &[DStatement], names: &[S]) -> String {
    let mut out = String::new();
    for s in stmts {
        let _ = write!(
            out,
            "{} {} {} |",
            s.kind.keyword(),
            names[s.x].as_ref(),
            names[s.y].as_ref()
        );
        for v in s.w {
            let _ = write!(out, " {}", names[v].as_ref());
        }
        let _ = writeln!(out, " : {}", fmt_weight(s.weight));
    }
    out
}

/// Parses the statement file format. `resolve` maps a variable name to its
/// id; blank lines and lines starting with `#` are skipped.
pub fn parse_statements(
    text: &str,
    mut resolve: impl FnMut(&str) -> Result<VarId>,
) -> Result<Vec<DStatement>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let perr = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (body, weight) = line
            .rsplit_once(':')
            .ok_or_else(|| perr("missing ': weight'".into()))?;
        let weight = match weight.trim() {
            "inf" | "+inf" | "Inf" => f64::INFINITY,
            w => w
                .parse::<f64>()
                .map_err(|e| perr(format!("bad weight {w:?}: {e}")))?,
        };
        let (head, cond) = body
            .split_once('|')
            .ok_or_else(|| perr("missing '|'".into()))?;
        let head: Vec<&str> = head.split_whitespace().collect();
        let [kind, x, y] = head.as_slice() else {
            return Err(perr("expected `sep|con X Y`".into()));
        };
        let kind = match *kind {
            "sep" => SepKind::Separated,
            "con" => SepKind::Connected,
            k => return Err(perr(format!("unknown statement kind {k:?}"))),
        };
        let x = resolve(x)?;
        let y = resolve(y)?;
        let mut w = VarSet::EMPTY;
        for name in cond.split_whitespace() {
            w.insert(resolve(name)?);
        }
        out.push(DStatement::new(kind, x, y, w, weight).map_err(|e| perr(e.to_string()))?);
    }
    Ok(out)
}
