mod common;

use common::*;
use jci::graph::{GraphBuilder, VarKind};
use jci::indep::run_all_tests;
use jci::model::{
    column_ids, det_relations, oracle_independences, pooled_moments, random_jci_model,
    regime_moments, sample, validate_design, Allocation, ExperimentalDesignMatrix, GeneratorConfig,
    JciScm, Mechanism, PooledDataset,
};
use jci::statement::{SepKind, TestKind};
use jci::{VarId, VarSet};
use proptest::prelude::*;
use rand::Rng;

fn model(p: usize, i: usize, latents: usize, seed: u64) -> JciScm {
    random_jci_model(p, i, latents, seed, &GeneratorConfig::default()).unwrap()
}

fn chain(b: f64, noise: f64) -> JciScm {
    let mut gb = GraphBuilder::new();
    gb.var("R", VarKind::Regime);
    let x1 = gb.system("X1");
    let x2 = gb.system("X2");
    gb.edge(x1, x2);
    let g = gb.build_jci().unwrap();
    let mechs = vec![
        None,
        Some(Mechanism {
            coefficients: vec![],
            noise_var: noise,
        }),
        Some(Mechanism {
            coefficients: vec![(x1, b)],
            noise_var: noise,
        }),
    ];
    JciScm::new(g, ExperimentalDesignMatrix::indicators(0), mechs).unwrap()
}

#[test]
fn separations_have_zero_partial_correlation() {
    let mut checked = [0usize; 2];
    for seed in 0..40 {
        let m = model(3 + seed as usize % 2, 1 + seed as usize % 3, 1, seed);
        let g = m.graph();
        let det = det_relations(&m).unwrap();
        let ints = g.interventions();
        let r = m.regime();
        for s in oracle_independences(&m, 2).unwrap() {
            if s.kind != SepKind::Separated {
                continue;
            }
            let closed = det.closure(s.w);
            if closed.contains(s.x) || closed.contains(s.y) {
                continue;
            }
            // within a regime the dummies are constants
            if g.systems().contains(s.x) && g.systems().contains(s.y) {
                let w: Vec<VarId> = s.w.iter().filter(|&v| g.systems().contains(v)).collect();
                for reg in 0..m.design().n_regimes() {
                    let pc = regime_moments(&m, reg)
                        .partial_correlation(s.x, s.y, &w)
                        .unwrap();
                    assert!(pc.abs() < 1e-9, "seed {seed} regime {reg}: {s:?} has {pc}");
                    checked[0] += 1;
                }
            }
            // pooled, once the regime is pinned down by the indicators
            if ints.is_subset(closed) && !ints.is_empty() {
                let w: Vec<VarId> = closed.without(r).iter().collect();
                let pc = pooled_moments(&m)
                    .partial_correlation(s.x, s.y, &w)
                    .unwrap();
                assert!(pc.abs() < 1e-9, "seed {seed} pooled: {s:?} has {pc}");
                checked[1] += 1;
            }
        }
    }
    assert!(checked[0] > 100 && checked[1] > 20, "{checked:?}");
}

#[test]
fn connections_usually_have_nonzero_partial_correlation() {
    let mut total = 0;
    let mut faithful = 0;
    for seed in 0..20 {
        let m = model(4, 0, 0, seed);
        for s in oracle_independences(&m, 1).unwrap() {
            if s.kind == SepKind::Connected
                && m.graph().systems().contains(s.x)
                && m.graph().systems().contains(s.y)
            {
                let w: Vec<VarId> =
                    s.w.iter()
                        .filter(|&v| m.graph().systems().contains(v))
                        .collect();
                total += 1;
                if regime_moments(&m, 0)
                    .partial_correlation(s.x, s.y, &w)
                    .unwrap()
                    .abs()
                    > 1e-6
                {
                    faithful += 1;
                }
            }
        }
    }
    assert!(faithful * 100 >= total * 99, "{faithful}/{total}");
}

#[test]
fn generator_output_is_a_valid_jci_model() {
    let mut r = rng(4);
    for seed in 0..1000 {
        let p = r.random_range(2..=5);
        let i = r.random_range(0..=4);
        let latents = r.random_range(0..=p / 2);
        let m = model(p, i, latents, seed);
        let g = m.graph();
        assert!(g.topological_order().is_some());
        assert!(g.is_jci());
        assert_eq!(g.n(), 1 + i + p + latents);
        assert!(validate_design(m.design()).unwrap().is_valid());
        for k in g.interventions().iter() {
            assert_eq!(g.parents(k), VarSet::singleton(m.regime()));
            let kids = g.children(k);
            assert_eq!(kids.len(), 1);
            assert!(kids.is_subset(g.systems()));
        }
        for l in g.of_kind(VarKind::Latent).iter() {
            assert!(g.parents(l).is_empty());
            assert_eq!(g.children(l).len(), 2);
        }
        assert_eq!(column_ids(&m), (0..1 + i + p).collect::<Vec<_>>());
    }
}

#[test]
fn generator_is_deterministic_in_the_seed() {
    assert_eq!(model(4, 2, 2, 77), model(4, 2, 2, 77));
    assert_ne!(model(4, 2, 2, 77), model(4, 2, 2, 78));
    let a = sample(&model(3, 2, 1, 5), 200, &Allocation::Random, 9).unwrap();
    let b = sample(&model(3, 2, 1, 5), 200, &Allocation::Random, 9).unwrap();
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
}

#[test]
fn chain_covariance_matches_population() {
    let n = 10_000;
    let d = sample(&chain(1.0, 1.0), n, &Allocation::Counts(vec![n]), 123).unwrap();
    let (x1, x2) = (d.column(1), d.column(2));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let cov = |a: &[f64], b: &[f64]| {
        let (ma, mb) = (mean(a), mean(b));
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - ma) * (y - mb))
            .sum::<f64>()
            / (n - 1) as f64
    };
    // var of a Gaussian sample covariance: (s_ab^2 + s_aa s_bb) / n
    let target = [[1.0, 1.0], [1.0, 2.0]];
    let cols = [x1, x2];
    for a in 0..2 {
        for b in 0..2 {
            let se =
                ((target[a][b] * target[a][b] + target[a][a] * target[b][b]) / n as f64).sqrt();
            let got = cov(cols[a], cols[b]);
            assert!(
                (got - target[a][b]).abs() < 3.0 * se,
                "cov[{a}][{b}] = {got}"
            );
        }
    }
}

#[test]
fn single_regime_without_interventions() {
    let d = sample(&model(3, 0, 1, 2), 300, &Allocation::Random, 0).unwrap();
    assert_eq!(d.regime_counts(), vec![300]);
    assert!(d.column(0).iter().all(|&v| v == 0.0));
}

#[test]
fn csv_round_trip_keeps_kinds_and_values() {
    let d = sample(&model(3, 2, 1, 8), 50, &Allocation::Random, 3).unwrap();
    let back = PooledDataset::from_csv(&d.to_csv().unwrap()).unwrap();
    assert_eq!(back.names(), d.names());
    assert_eq!(back.kinds(), d.kinds());
    assert_eq!(back.regimes(), d.regimes());
    for c in 0..d.n_columns() {
        for (a, b) in back.column(c).iter().zip(d.column(c)) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}

/// With two regimes the numeric regime column is an affine function of the
/// single indicator, so linear tests see every regime effect. With more
/// regimes they cannot, and statements mentioning `R` are left out.
#[test]
fn oracle_and_fisher_z_mostly_agree_on_large_samples() {
    let mut total = 0;
    let mut agree = 0;
    for seed in 0..20 {
        let i = 1 + seed as usize % 3;
        let m = model(3, i, 1, 1000 + seed);
        let d = sample(&m, 50_000, &Allocation::Random, seed).unwrap();
        let oracle = oracle_independences(&m, 1).unwrap();
        let run = run_all_tests(&d, VarSet::full(d.n_columns()), 1, 0.05).unwrap();
        for s in &oracle {
            if i > 1 && (s.x == 0 || s.w.contains(0)) {
                continue;
            }
            // degenerate pairs such as R and a lone indicator are skipped by the tests
            let Some(t) = run
                .statements
                .iter()
                .find(|t| t.x == s.x && t.y == s.y && t.w == s.w)
            else {
                continue;
            };
            total += 1;
            if (s.kind == SepKind::Separated) == (t.kind == TestKind::Independent) {
                agree += 1;
            }
        }
    }
    assert!(total > 500);
    assert!(agree as f64 >= 0.95 * total as f64, "{agree}/{total}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rows_follow_the_design(seed in any::<u64>(), p in 1usize..=4, i in 0usize..=3, n in 10usize..=300) {
        let m = model(p, i, 0, seed);
        let d = sample(&m, n, &Allocation::Random, seed ^ 0x5a5a).unwrap();
        prop_assert_eq!(d.n_rows(), n);
        prop_assert_eq!(d.regime_counts().iter().sum::<usize>(), n);
        prop_assert!(d.regime_counts().iter().all(|&c| c >= 1));
        for (row, &reg) in d.regimes().iter().enumerate() {
            prop_assert_eq!(d.column(0)[row], reg as f64);
            for k in 0..i {
                prop_assert_eq!(d.column(1 + k)[row], m.design().value(reg, k));
            }
        }
        let implied = d.design().unwrap();
        prop_assert_eq!(implied.names(), m.design().names());
        for reg in 0..m.design().n_regimes() {
            prop_assert_eq!(implied.row(reg), m.design().row(reg));
        }
    }

    #[test]
    fn fixed_allocation_is_respected(seed in any::<u64>(), counts in prop::collection::vec(1usize..40, 3)) {
        let m = model(2, 2, 0, seed);
        let n = counts.iter().sum();
        let d = sample(&m, n, &Allocation::Counts(counts.clone()), seed).unwrap();
        prop_assert_eq!(d.regime_counts(), counts);
    }
}
