use std::collections::BTreeMap;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::design::ExperimentalDesignMatrix;
use super::scm::JciScm;
use crate::error::{input_err, Error, Result};
use crate::graph::VarKind;
use crate::varset::VarId;

#[derive(Clone, Debug, PartialEq)]
pub enum Allocation {
    /// One row per positive-probability regime, the rest drawn from the
    /// regime probabilities.
    Random,
    /// Explicit row counts per regime.
    Counts(Vec<usize>),
}

/// Pooled table: the regime column, the intervention columns, then the
/// observed system columns. Column `c` is variable `c` of the data's own
/// index space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PooledDataset {
    names: Vec<String>,
    kinds: Vec<VarKind>,
    columns: Vec<Vec<f64>>,
    regimes: Vec<usize>,
    pub warnings: Vec<String>,
}

impl PooledDataset {
    pub fn new(
        names: Vec<String>,
        kinds: Vec<VarKind>,
        columns: Vec<Vec<f64>>,
        regimes: Vec<usize>,
    ) -> Result<Self> {
        if names.len() != kinds.len() || names.len() != columns.len() {
            return input_err("names, kinds and columns must have equal lengths");
        }
        if columns.iter().any(|c| c.len() != regimes.len()) {
            return input_err("all columns must have one entry per row");
        }
        if kinds.iter().filter(|k| **k == VarKind::Regime).count() > 1 {
            return input_err("at most one regime column is allowed");
        }
        if kinds.contains(&VarKind::Latent) {
            return input_err("datasets cannot contain latent columns");
        }
        Ok(PooledDataset {
            names,
            kinds,
            columns,
            regimes,
            warnings: Vec::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.regimes.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[VarKind] {
        &self.kinds
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.columns[c]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Regime label of each row.
    pub fn regimes(&self) -> &[usize] {
        &self.regimes
    }

    pub fn column_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn regime_column(&self) -> Option<usize> {
        self.kinds.iter().position(|k| *k == VarKind::Regime)
    }

    pub fn intervention_columns(&self) -> Vec<usize> {
        (0..self.n_columns())
            .filter(|&c| self.kinds[c] == VarKind::Intervention)
            .collect()
    }

    pub fn system_columns(&self) -> Vec<usize> {
        (0..self.n_columns())
            .filter(|&c| self.kinds[c] == VarKind::System)
            .collect()
    }

    /// Row counts per regime label `0..=max label`.
    pub fn regime_counts(&self) -> Vec<usize> {
        let n = self.regimes.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![0; n];
        for &r in &self.regimes {
            counts[r] += 1;
        }
        counts
    }

    /// Rows of one regime, keeping only `cols`.
    pub fn regime_subset(&self, regime: usize, cols: &[usize]) -> PooledDataset {
        let rows: Vec<usize> = (0..self.n_rows())
            .filter(|&i| self.regimes[i] == regime)
            .collect();
        PooledDataset {
            names: cols.iter().map(|&c| self.names[c].clone()).collect(),
            kinds: cols.iter().map(|&c| self.kinds[c]).collect(),
            columns: cols
                .iter()
                .map(|&c| rows.iter().map(|&i| self.columns[c][i]).collect())
                .collect(),
            regimes: vec![regime; rows.len()],
            warnings: Vec::new(),
        }
    }

    /// The design implied by the data: intervention values per regime and
    /// probabilities proportional to row counts.
    pub fn design(&self) -> Result<ExperimentalDesignMatrix> {
        let ints = self.intervention_columns();
        let mut rows: BTreeMap<usize, (Vec<f64>, usize)> = BTreeMap::new();
        for i in 0..self.n_rows() {
            let vals: Vec<f64> = ints.iter().map(|&c| self.columns[c][i]).collect();
            let entry = rows
                .entry(self.regimes[i])
                .or_insert_with(|| (vals.clone(), 0));
            if entry.0 != vals {
                return input_err(format!(
                    "intervention columns are not a function of the regime (regime {})",
                    self.regimes[i]
                ));
            }
            entry.1 += 1;
        }
        if rows.keys().enumerate().any(|(i, r)| i != *r) {
            return input_err("regime labels must be 0..n without gaps");
        }
        let names = ints.iter().map(|&c| self.names[c].clone()).collect();
        let (values, counts): (Vec<_>, Vec<_>) = rows.into_values().unzip();
        ExperimentalDesignMatrix::from_counts(names, values, &counts)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.names)?;
        for i in 0..self.n_rows() {
            w.write_record(self.columns.iter().map(|c| format_value(c[i])))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Reads `R,I1,...,Im,X1,...,Xp`: the first column is the regime (integer
    /// labels), the columns right after it whose names start with `I` are
    /// intervention columns, the rest are system columns.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let names: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        if names.is_empty() {
            return input_err("empty CSV header");
        }
        let mut kinds = vec![VarKind::Regime];
        let mut in_interventions = true;
        for name in &names[1..] {
            in_interventions &= name.starts_with('I');
            kinds.push(if in_interventions {
                VarKind::Intervention
            } else {
                VarKind::System
            });
        }
        let mut columns = vec![Vec::new(); names.len()];
        let mut regimes = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != names.len() {
                return Err(Error::Parse {
                    line: line + 2,
                    msg: "wrong number of fields".into(),
                });
            }
            for (c, field) in rec.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|e| Error::Parse {
                    line: line + 2,
                    msg: format!("bad number {field:?}: {e}"),
                })?;
                columns[c].push(v);
            }
            let r = columns[0][columns[0].len() - 1];
            if r < 0.0 || r.fract() != 0.0 {
                return Err(Error::Parse {
                    line: line + 2,
                    msg: format!("regime label {r} is not a nonnegative integer"),
                });
            }
            regimes.push(r as usize);
        }
        Self::new(names, kinds, columns, regimes)
    }
}

fn format_value(v: f64) -> String {
    // shortest representation that parses back to the same value
    format!("{v}")
}

fn regime_counts(
    model: &JciScm,
    n_total: usize,
    allocation: &Allocation,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let design = model.design();
    let n = design.n_regimes();
    match allocation {
        Allocation::Counts(c) => {
            if c.len() != n {
                return input_err(format!(
                    "allocation has {} entries for {n} regimes",
                    c.len()
                ));
            }
            if c.iter().sum::<usize>() != n_total {
                return input_err("allocation does not sum to the requested sample size");
            }
            Ok(c.clone())
        }
        Allocation::Random => {
            let support = design.support();
            if n_total < support.len() {
                return input_err(format!(
                    "{n_total} rows cannot cover {} regimes",
                    support.len()
                ));
            }
            let mut counts = vec![0; n];
            for &r in &support {
                counts[r] = 1;
            }
            let dist = WeightedIndex::new(design.regime_probs())
                .map_err(|e| Error::Input(e.to_string()))?;
            for _ in support.len()..n_total {
                counts[dist.sample(rng)] += 1;
            }
            Ok(counts)
        }
    }
}

/// Draws a pooled dataset. Rows are grouped by regime in increasing order;
/// latent variables are simulated but not returned.
pub fn sample(
    model: &JciScm,
    n_total: usize,
    allocation: &Allocation,
    seed: u64,
) -> Result<PooledDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = regime_counts(model, n_total, allocation, &mut rng)?;
    let g = model.graph();
    let order = g.topological_order().expect("model graphs are acyclic");
    let cols = model.observed_columns();
    let mut columns = vec![Vec::with_capacity(n_total); cols.len()];
    let mut regimes = Vec::with_capacity(n_total);
    let mut values = vec![0.0; g.n()];
    for (r, &count) in counts.iter().enumerate() {
        for _ in 0..count {
            for &v in &order {
                values[v] = match model.mechanism(v) {
                    None => model.dummy_value(v, r),
                    Some(m) => {
                        let e: f64 = rng.sample(StandardNormal);
                        m.coefficients
                            .iter()
                            .map(|&(p, c)| c * values[p])
                            .sum::<f64>()
                            + m.noise_var.sqrt() * e
                    }
                };
            }
            for (k, &v) in cols.iter().enumerate() {
                columns[k].push(values[v]);
            }
            regimes.push(r);
        }
    }
    let names = cols.iter().map(|&v| g.name(v).to_string()).collect();
    let kinds = cols.iter().map(|&v| g.kind(v)).collect();
    let mut data = PooledDataset::new(names, kinds, columns, regimes)?;
    for r in model.design().support() {
        if counts[r] == 0 {
            data.warnings
                .push(format!("regime {r} has positive probability but no rows"));
        }
    }
    Ok(data)
}

/// Graph id of each dataset column produced by [`sample`].
pub fn column_ids(model: &JciScm) -> Vec<VarId> {
    model.observed_columns()
}
