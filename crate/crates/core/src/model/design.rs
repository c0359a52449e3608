//! Experimental design matrices: the map from each regime to the values of the
//! intervention variables, with regime probabilities.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};

const PROB_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentalDesignMatrix {
    names: Vec<String>,
    values: Vec<Vec<f64>>,
    regime_probs: Vec<f64>,
}

impl ExperimentalDesignMatrix {
    /// `values[r][c]` is the value of intervention column `c` in regime `r`.
    pub fn new(names: Vec<String>, values: Vec<Vec<f64>>, regime_probs: Vec<f64>) -> Result<Self> {
        if values.len() != regime_probs.len() {
            return input_err(format!(
                "design has {} regimes but {} probabilities",
                values.len(),
                regime_probs.len()
            ));
        }
        if let Some(row) = values.iter().find(|row| row.len() != names.len()) {
            return input_err(format!(
                "design row has {} values, expected {}",
                row.len(),
                names.len()
            ));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return input_err("design values must be finite");
        }
        if regime_probs.iter().any(|p| p.is_nan() || *p < 0.0) {
            return input_err("regime probabilities must be nonnegative");
        }
        let total: f64 = regime_probs.iter().sum();
        if !values.is_empty() && (total - 1.0).abs() > PROB_TOL {
            return input_err(format!("regime probabilities sum to {total}, not 1"));
        }
        Ok(ExperimentalDesignMatrix {
            names,
            values,
            regime_probs,
        })
    }

    /// Probabilities proportional to the dataset sizes `counts`.
    pub fn from_counts(
        names: Vec<String>,
        values: Vec<Vec<f64>>,
        counts: &[usize],
    ) -> Result<Self> {
        let total: usize = counts.iter().sum();
        if total == 0 {
            return input_err("dataset sizes sum to zero");
        }
        let mut probs: Vec<f64> = counts.iter().map(|&d| d as f64 / total as f64).collect();
        renormalize(&mut probs);
        Self::new(names, values, probs)
    }

    /// One observational regime followed by `i` experimental regimes, each
    /// flagged by its own indicator column, with uniform probabilities.
    pub fn indicators(i: usize) -> Self {
        let names = (1..=i).map(|k| format!("I{k}")).collect();
        let values = (0..=i)
            .map(|r| (1..=i).map(|k| if k == r { 1.0 } else { 0.0 }).collect())
            .collect();
        let mut probs = vec![1.0 / (i + 1) as f64; i + 1];
        renormalize(&mut probs);
        ExperimentalDesignMatrix {
            names,
            values,
            regime_probs: probs,
        }
    }

    pub fn n_regimes(&self) -> usize {
        self.values.len()
    }

    pub fn n_columns(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn value(&self, regime: usize, column: usize) -> f64 {
        self.values[regime][column]
    }

    pub fn row(&self, regime: usize) -> &[f64] {
        &self.values[regime]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[c]).collect()
    }

    pub fn regime_probs(&self) -> &[f64] {
        &self.regime_probs
    }

    pub fn with_probs(&self, probs: Vec<f64>) -> Result<Self> {
        Self::new(self.names.clone(), self.values.clone(), probs)
    }

    /// Regimes with positive probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_regimes())
            .filter(|&r| self.regime_probs[r] > 0.0)
            .collect()
    }

    /// CSV with header `R,<names>,p`; `R` holds the regime index.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["R".to_string()];
        header.extend(self.names.iter().cloned());
        header.push("p".into());
        w.write_record(&header)?;
        for (r, row) in self.values.iter().enumerate() {
            let mut rec = vec![r.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            rec.push(self.regime_probs[r].to_string());
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.len() < 2 || header[0] != "R" || header[header.len() - 1] != "p" {
            return input_err("design CSV header must be `R,<intervention names>,p`");
        }
        let names = header[1..header.len() - 1].to_vec();
        let mut rows: Vec<(usize, Vec<f64>, f64)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Input(format!("bad number {s:?}: {e}")))
            };
            let r = rec[0]
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::Input(format!("bad regime index: {e}")))?;
            let vals = (1..rec.len() - 1)
                .map(|i| parse(&rec[i]))
                .collect::<Result<Vec<_>>>()?;
            rows.push((r, vals, parse(&rec[rec.len() - 1])?));
        }
        rows.sort_by_key(|(r, _, _)| *r);
        if rows.iter().enumerate().any(|(i, (r, _, _))| *r != i) {
            return input_err("design regimes must be numbered 0..n");
        }
        let (values, probs) = rows.into_iter().map(|(_, v, p)| (v, p)).unzip();
        Self::new(names, values, probs)
    }
}

fn renormalize(probs: &mut [f64]) {
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        for p in probs.iter_mut() {
            *p /= total;
        }
    }
}

/// A column that is a function of other columns on the design's support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeterminedColumn {
    pub column: usize,
    /// A minimal set of other columns determining it (empty: constant column).
    pub by: Vec<usize>,
}

/// Two intervention columns independent given a set of the others.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndependentPair {
    pub a: usize,
    pub b: usize,
    pub given: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DesignReport {
    /// Deterministic relations among intervention columns beyond the allowed
    /// ones (constant, duplicated or derived columns).
    pub determined_columns: Vec<DeterminedColumn>,
    /// A strict subset of the columns that already determines the regime.
    pub regime_determined_by_subset: Option<Vec<usize>>,
    /// Pairs violating the requirement that intervention variables stay
    /// dependent given any subset of the remaining ones.
    pub independent_pairs: Vec<IndependentPair>,
    /// Whether all columns jointly determine the regime.
    pub interventions_determine_regime: bool,
}

impl DesignReport {
    /// No deterministic relations beyond regime → column and columns → regime.
    pub fn restricted_determinism(&self) -> bool {
        self.determined_columns.is_empty() && self.regime_determined_by_subset.is_none()
    }

    pub fn pairwise_dependent(&self) -> bool {
        self.independent_pairs.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.restricted_determinism() && self.pairwise_dependent()
    }
}

type Key = Vec<u64>;

fn key_of(d: &ExperimentalDesignMatrix, r: usize, cols: &[usize]) -> Key {
    // exact value-table analysis: compare bit patterns (with -0.0 == 0.0)
    cols.iter()
        .map(|&c| (d.value(r, c) + 0.0).to_bits())
        .collect()
}

/// Whether the `cols` tuple determines `target` (a column, or the regime
/// index when `None`) on the support.
fn determines(
    d: &ExperimentalDesignMatrix,
    support: &[usize],
    cols: &[usize],
    target: Option<usize>,
) -> bool {
    let mut seen: HashMap<Key, u64> = HashMap::new();
    for &r in support {
        let t = match target {
            Some(c) => (d.value(r, c) + 0.0).to_bits(),
            None => r as u64,
        };
        if let Some(prev) = seen.insert(key_of(d, r, cols), t) {
            if prev != t {
                return false;
            }
        }
    }
    true
}

fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u64..(1u64 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &c)| c)
                .collect()
        })
        .collect();
    out.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn minimal_determining_set(
    d: &ExperimentalDesignMatrix,
    support: &[usize],
    candidates: &[usize],
    target: Option<usize>,
    strict: bool,
) -> Option<Vec<usize>> {
    subsets(candidates)
        .into_iter()
        .filter(|s| !strict || s.len() < candidates.len())
        .find(|s| determines(d, support, s, target))
}

/// Exact conditional independence of columns `a` and `b` given `given` under
/// the regime probabilities.
fn columns_independent(d: &ExperimentalDesignMatrix, a: usize, b: usize, given: &[usize]) -> bool {
    let mut strata: HashMap<Key, Vec<usize>> = HashMap::new();
    for r in d.support() {
        strata.entry(key_of(d, r, given)).or_default().push(r);
    }
    for regimes in strata.values() {
        let total: f64 = regimes.iter().map(|&r| d.regime_probs[r]).sum();
        let mut pa: HashMap<u64, f64> = HashMap::new();
        let mut pb: HashMap<u64, f64> = HashMap::new();
        let mut pab: HashMap<(u64, u64), f64> = HashMap::new();
        for &r in regimes {
            let p = d.regime_probs[r] / total;
            let (va, vb) = (
                (d.value(r, a) + 0.0).to_bits(),
                (d.value(r, b) + 0.0).to_bits(),
            );
            *pa.entry(va).or_default() += p;
            *pb.entry(vb).or_default() += p;
            *pab.entry((va, vb)).or_default() += p;
        }
        for (&va, &qa) in &pa {
            for (&vb, &qb) in &pb {
                let joint = pab.get(&(va, vb)).copied().unwrap_or(0.0);
                if (joint - qa * qb).abs() > PROB_TOL {
                    return false;
                }
            }
        }
    }
    true
}

/// Checks a design against the JCI determinism restrictions and the pairwise
/// dependence requirement on intervention variables.
pub fn validate_design(design: &ExperimentalDesignMatrix) -> Result<DesignReport> {
    if design.n_regimes() == 0 {
        return input_err("empty design matrix");
    }
    let support = design.support();
    let m = design.n_columns();
    let all: Vec<usize> = (0..m).collect();
    let mut report = DesignReport::default();

    for c in 0..m {
        let others: Vec<usize> = all.iter().copied().filter(|&o| o != c).collect();
        if let Some(by) = minimal_determining_set(design, &support, &others, Some(c), false) {
            report
                .determined_columns
                .push(DeterminedColumn { column: c, by });
        }
    }
    if m > 0 {
        report.regime_determined_by_subset =
            minimal_determining_set(design, &support, &all, None, true);
    }
    report.interventions_determine_regime = determines(design, &support, &all, None);

    for a in 0..m {
        for b in a + 1..m {
            let rest: Vec<usize> = all.iter().copied().filter(|&o| o != a && o != b).collect();
            for given in subsets(&rest) {
                if columns_independent(design, a, b, &given) {
                    report
                        .independent_pairs
                        .push(IndependentPair { a, b, given });
                }
            }
        }
    }
    Ok(report)
}

/// Which original columns ended up in each normalized column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnMapping {
    pub groups: Vec<Vec<usize>>,
    pub dropped_constant: Vec<usize>,
}

/// Drops constant columns and merges every column determined by other columns
/// with its determining set into one multi-valued column, until no column is
/// determined by the others.
pub fn normalize_design(
    design: &ExperimentalDesignMatrix,
) -> Result<(ExperimentalDesignMatrix, ColumnMapping)> {
    let support = design.support();
    let n = design.n_regimes();
    // (original columns, display name, per-regime values)
    let mut cols: Vec<(Vec<usize>, String, Vec<f64>)> = (0..design.n_columns())
        .map(|c| (vec![c], design.names[c].clone(), design.column(c)))
        .collect();
    let mut dropped = Vec::new();

    loop {
        let tmp = ExperimentalDesignMatrix {
            names: cols.iter().map(|c| c.1.clone()).collect(),
            values: (0..n)
                .map(|r| cols.iter().map(|c| c.2[r]).collect())
                .collect(),
            regime_probs: design.regime_probs.clone(),
        };
        let idx: Vec<usize> = (0..cols.len()).collect();
        let mut merge: Option<Vec<usize>> = None;
        for c in 0..cols.len() {
            let others: Vec<usize> = idx.iter().copied().filter(|&o| o != c).collect();
            if let Some(by) = minimal_determining_set(&tmp, &support, &others, Some(c), false) {
                let mut group = by;
                group.push(c);
                group.sort_unstable();
                merge = Some(group);
                break;
            }
        }
        let Some(group) = merge else { break };
        if group.len() == 1 {
            let (orig, _, _) = cols.remove(group[0]);
            dropped.extend(orig);
            continue;
        }
        // tuple values coded by order of first appearance over the regimes
        let mut codes: HashMap<Key, f64> = HashMap::new();
        let merged_values: Vec<f64> = (0..n)
            .map(|r| {
                let next = codes.len() as f64;
                *codes.entry(key_of(&tmp, r, &group)).or_insert(next)
            })
            .collect();
        let mut originals: Vec<usize> = group.iter().flat_map(|&g| cols[g].0.clone()).collect();
        originals.sort_unstable();
        let name = group
            .iter()
            .map(|&g| cols[g].1.clone())
            .collect::<Vec<_>>()
            .join("+");
        let pos = group[0];
        for &g in group.iter().rev() {
            cols.remove(g);
        }
        cols.insert(pos, (originals, name, merged_values));
    }

    dropped.sort_unstable();
    let out = ExperimentalDesignMatrix {
        names: cols.iter().map(|c| c.1.clone()).collect(),
        values: (0..n)
            .map(|r| cols.iter().map(|c| c.2[r]).collect())
            .collect(),
        regime_probs: design.regime_probs.clone(),
    };
    Ok((
        out,
        ColumnMapping {
            groups: cols.into_iter().map(|c| c.0).collect(),
            dropped_constant: dropped,
        },
    ))
}
