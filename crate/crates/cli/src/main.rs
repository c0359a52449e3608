use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use jci::acid::{
    ground_rules, parse_background, AcidSolver, ProblemSpec, ProblemVariable, ScoredPrediction,
};
use jci::eval::{run_experiment, write_outputs, ExperimentConfig, Method};
use jci::graph::{DetRelationSet, VarKind};
use jci::indep::{run_all_tests, statements_to_dstatements, DEFAULT_ALPHA};
use jci::model::{
    default_latents, random_jci_model, sample, validate_design, Allocation,
    ExperimentalDesignMatrix, GeneratorConfig, PooledDataset,
};
use jci::statement::{parse_statements, write_statements, DStatement};
use jci::{VarId, VarSet};

#[derive(Parser)]
#[command(
    name = "jci",
    version,
    about = "Joint causal inference from pooled experimental data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random JCI model and sample a pooled dataset from it.
    Simulate {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        i: usize,
        /// Latent confounders; defaults to half of `p`.
        #[arg(long)]
        latents: Option<usize>,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run partial-correlation tests on a pooled dataset.
    Test {
        #[arg(long)]
        data: PathBuf,
        /// Largest conditioning set; defaults to the column count minus two.
        #[arg(long)]
        max_order: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Convert the results into d-statements using the deterministic
        /// relations implied by the dataset's design.
        #[arg(long)]
        det_from_design: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Minimize the weighted loss over ancestral structures and score pairs.
    Discover {
        #[arg(long)]
        statements: PathBuf,
        /// Apply the JCI background knowledge (regime `R`, design columns as
        /// intervention variables).
        #[arg(long)]
        jci: bool,
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(long)]
        background: Option<PathBuf>,
        #[arg(long)]
        max_order: Option<usize>,
        /// `all`, or a file with one `X Y` pair per line.
        #[arg(long, default_value = "all")]
        score_pairs: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the synthetic benchmark.
    Eval {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        i: usize,
        #[arg(long, default_value_t = 100)]
        n_models: usize,
        #[arg(long, default_value_t = 500)]
        n_samples: usize,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        max_order: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "acid_jci,merged_aci")]
        methods: Vec<String>,
        #[arg(long)]
        latents: Option<usize>,
        /// Worker threads; 0 uses every available core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn simulate(
    p: usize,
    i: usize,
    latents: Option<usize>,
    n: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<()> {
    let model = random_jci_model(
        p,
        i,
        latents.unwrap_or_else(|| default_latents(p)),
        seed,
        &GeneratorConfig::default(),
    )?;
    let data = sample(&model, n, &Allocation::Random, seed.wrapping_add(1))?;
    fs::create_dir_all(out_dir)?;
    write(&out_dir.join("model.json"), &model.to_json())?;
    write(&out_dir.join("data.csv"), &data.to_csv()?)?;
    write(&out_dir.join("design.csv"), &model.design().to_csv()?)?;
    eprintln!(
        "wrote {} rows over {} columns to {}",
        data.n_rows(),
        data.n_columns(),
        out_dir.display()
    );
    Ok(())
}

fn design_det(data: &PooledDataset) -> Result<DetRelationSet> {
    let regime = data
        .regime_column()
        .context("--det-from-design needs a regime column `R`")?;
    let ints: VarSet = data.intervention_columns().into_iter().collect();
    let report = validate_design(&data.design()?)?;
    if !report.is_valid() {
        eprintln!("warning: design violates the JCI assumptions: {report:?}");
    }
    Ok(DetRelationSet::jci(
        regime,
        ints,
        report.interventions_determine_regime,
    ))
}

fn test(
    data: &Path,
    max_order: Option<usize>,
    alpha: f64,
    det_from_design: bool,
    out: &Path,
) -> Result<()> {
    let data = PooledDataset::from_csv(&read(data)?)?;
    let k = data.n_columns();
    let max_order = max_order.unwrap_or(k.saturating_sub(2));
    let run = run_all_tests(&data, VarSet::full(k), max_order, alpha)?;
    for s in &run.skipped {
        eprintln!(
            "skipped {} {} | {:?}: {}",
            data.names()[s.x],
            data.names()[s.y],
            s.w,
            s.reason
        );
    }
    let stmts: Vec<DStatement> = if det_from_design {
        let conv = statements_to_dstatements(&run.statements, &design_det(&data)?);
        eprintln!(
            "dropped {} independences with a determined endpoint",
            conv.dropped
        );
        conv.dstatements
    } else {
        run.statements.iter().map(DStatement::from).collect()
    };
    write(out, &write_statements(&stmts, data.names()))?;
    eprintln!("{} statements, {} skipped", stmts.len(), run.skipped.len());
    Ok(())
}

/// Variables in id order: the regime, the design's intervention columns,
/// then everything else by first appearance in the statement file.
struct Names {
    names: Vec<String>,
    kinds: Vec<VarKind>,
}

impl Names {
    fn id(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|n| n == name)
    }

    fn resolve(&self, name: &str) -> jci::Result<VarId> {
        self.id(name)
            .ok_or_else(|| jci::Error::Input(format!("unknown variable `{name}`")))
    }

    fn push(&mut self, name: &str, kind: VarKind) {
        if self.id(name).is_none() {
            self.names.push(name.to_string());
            self.kinds.push(kind);
        }
    }
}

fn statement_names(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let body = line.rsplit_once(':').map_or(line, |(b, _)| b);
        out.extend(body.split_whitespace().skip(1).filter(|t| *t != "|"));
    }
    out
}

fn parse_pairs(text: &str, names: &Names) -> Result<Vec<(VarId, VarId)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let [x, y] = parts.as_slice() else {
            bail!("line {}: expected `X Y`", i + 1);
        };
        out.push((names.resolve(x)?, names.resolve(y)?));
    }
    Ok(out)
}

fn fmt_conf(c: f64) -> String {
    if c.is_infinite() {
        if c > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{c}")
    }
}

#[allow(clippy::too_many_arguments)]
fn discover(
    statements: &Path,
    jci: bool,
    design: Option<&Path>,
    background: Option<&Path>,
    max_order: Option<usize>,
    score_pairs: &str,
    out: &Path,
) -> Result<()> {
    let text = read(statements)?;
    let mut names = Names {
        names: Vec::new(),
        kinds: Vec::new(),
    };
    let design = design
        .map(|p| read(p).and_then(|t| Ok(ExperimentalDesignMatrix::from_csv(&t)?)))
        .transpose()?;
    if design.is_some() && !jci {
        bail!("--design only applies with --jci");
    }
    if jci {
        names.push("R", VarKind::Regime);
        if let Some(d) = &design {
            for n in d.names() {
                names.push(n, VarKind::Intervention);
            }
        }
    }
    for n in statement_names(&text) {
        names.push(n, VarKind::System);
    }
    let dstmts = parse_statements(&text, |n| names.resolve(n))?;
    let det = if jci {
        let ints: VarSet = (0..names.names.len())
            .filter(|&v| names.kinds[v] == VarKind::Intervention)
            .collect();
        let determine = match &design {
            Some(d) => validate_design(d)?.interventions_determine_regime,
            None => false,
        };
        Some(DetRelationSet::jci(0, ints, determine))
    } else {
        None
    };
    let variables: Vec<ProblemVariable> = (0..names.names.len())
        .map(|v| ProblemVariable {
            id: v,
            name: names.names[v].clone(),
            kind: names.kinds[v],
        })
        .collect();
    let max_order =
        max_order.unwrap_or_else(|| dstmts.iter().map(|s| s.w.len()).max().unwrap_or(0));
    let mut spec = ProblemSpec::new(variables, max_order).with_inputs(dstmts);
    if let Some(det) = det {
        spec = spec.jci(det);
    }
    if let Some(bg) = background {
        spec = spec.with_background(parse_background(&read(bg)?, |n| names.resolve(n))?);
    }
    let problem = ground_rules(&spec)?;
    let pairs = if score_pairs == "all" {
        let vs: Vec<VarId> = (0..names.names.len())
            .filter(|&v| names.kinds[v] == VarKind::System)
            .collect();
        vs.iter()
            .flat_map(|&a| vs.iter().filter(move |&&b| b != a).map(move |&b| (a, b)))
            .collect()
    } else {
        parse_pairs(&read(Path::new(score_pairs))?, &names)?
    };
    let mut solver = AcidSolver::new(&problem);
    let (loss, _) = solver.optimum()?;
    eprintln!("optimal loss {loss}");
    let preds: Vec<ScoredPrediction> = solver.score(&pairs)?;
    let mut csv = String::from("X,Y,feature,confidence\n");
    for p in &preds {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            names.names[p.x],
            names.names[p.y],
            p.feature.as_str(),
            fmt_conf(p.confidence)
        ));
    }
    write(out, &csv)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate {
            p,
            i,
            latents,
            n,
            seed,
            out_dir,
        } => simulate(p, i, latents, n, seed, &out_dir),
        Command::Test {
            data,
            max_order,
            alpha,
            det_from_design,
            out,
        } => test(&data, max_order, alpha, det_from_design, &out),
        Command::Discover {
            statements,
            jci,
            design,
            background,
            max_order,
            score_pairs,
            out,
        } => discover(
            &statements,
            jci,
            design.as_deref(),
            background.as_deref(),
            max_order,
            &score_pairs,
            &out,
        ),
        Command::Eval {
            p,
            i,
            n_models,
            n_samples,
            alpha,
            max_order,
            seed,
            methods,
            latents,
            threads,
            out_dir,
        } => {
            let mut cfg = ExperimentConfig::new(p, i, n_models);
            cfg.n_samples = n_samples;
            cfg.alpha = alpha;
            cfg.max_order = max_order;
            cfg.seed = seed;
            cfg.methods = methods
                .iter()
                .map(|m| Method::parse(m))
                .collect::<jci::Result<_>>()?;
            cfg.latents = latents;
            cfg.threads = threads;
            let result = run_experiment(&cfg)?;
            write_outputs(&result, &out_dir)?;
            let failures = result.failures().count();
            eprintln!(
                "{} models, {} failures, outputs in {}",
                n_models,
                failures,
                out_dir.display()
            );
            Ok(())
        }
    }
}
