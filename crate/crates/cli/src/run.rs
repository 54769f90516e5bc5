use std::cell::Cell;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use phs_core::cart::{
    km_table, write_km_table, SurvivalDataset, SurvivalSchema, Tree, TreeExchange, TreeModel, TreeNodeReport, TreeProposal,
    TreeRunSummary,
};
use phs_core::diagnostics::{histogram, mcse, CsvFields, HistogramReport, McseEstimate, RunReport, MCSE_MIN_LEN};
use phs_core::linreg::{generate_dataset, FlipSweep, LinearModelPosterior, ModelIndex, RegressionData};
use phs_core::mixture::UniformWalkProposal;
use phs_core::samplers::{
    run_mh_with, run_phs_with, run_pt_with, EnsembleStats, Exchange, PlainSwap, Recorder, RunOptions, SwapMode,
    TemperatureLadder,
};
use phs_core::{ChainState, Target, Update};
use sha2::{Digest, Sha256};

use crate::config::{
    CartTarget, ExperimentConfig, LinregData, LinregTarget, MixtureTarget, ModelInit, PtSampler, SamplerSpec, SchemaSource,
    SwapSpec, TargetSpec,
};

/// What a finished run left behind.
#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub report: RunReport,
    /// Output file names, in the order they were written.
    pub files: Vec<String>,
}

/// Prints a progress line every 1% and remembers the last completed iteration.
struct Progress<'a, R: ?Sized> {
    inner: &'a mut R,
    total: usize,
    step: usize,
    enabled: bool,
    done: &'a Cell<usize>,
}

impl<S, R: Recorder<S> + ?Sized> Recorder<S> for Progress<'_, R> {
    fn record(&mut self, iteration: usize, chains: &[ChainState<S>], stats: &EnsembleStats) {
        self.inner.record(iteration, chains, stats);
        let n = iteration + 1;
        self.done.set(n);
        if self.enabled && (n.is_multiple_of(self.step) || n == self.total) {
            eprintln!(
                "progress {:>3}% ({n}/{}) log density {:.4}",
                n * 100 / self.total,
                self.total,
                chains[0].log_density()
            );
        }
    }
}

/// Chain-1 states and log densities with no further bookkeeping.
struct Path1<S> {
    states: Vec<S>,
    log_densities: Vec<f64>,
}

impl<S: Clone> Recorder<S> for Path1<S> {
    fn record(&mut self, _iteration: usize, chains: &[ChainState<S>], _stats: &EnsembleStats) {
        self.states.push(chains[0].value().clone());
        self.log_densities.push(chains[0].log_density());
    }
}

fn swap_mode(swap: SwapSpec) -> SwapMode {
    match swap {
        SwapSpec::Deterministic => SwapMode::PtDeterministic,
        SwapSpec::Independent(s) => SwapMode::PtIndependent(s),
    }
}

fn ladder(sampler: &SamplerSpec) -> Result<Option<TemperatureLadder>> {
    Ok(match sampler {
        SamplerSpec::Pt(PtSampler {
            chains,
            temperatures: Some(t),
            ..
        }) => {
            if t.len() != *chains {
                bail!("{} temperatures for {chains} chains", t.len());
            }
            Some(TemperatureLadder::new(t.clone())?)
        }
        SamplerSpec::Pt(PtSampler {
            chains, t_max: Some(t), ..
        }) => Some(TemperatureLadder::equally_spaced(*chains, *t)?),
        SamplerSpec::Pt(_) => bail!("pt needs temperatures or t_max"),
        _ => None,
    })
}

/// Runs whichever sampler the config names against `target`.
fn drive<T, U, X, R>(
    cfg: &ExperimentConfig,
    target: &T,
    kernel: U,
    exchange: &X,
    init: T::State,
    recorder: &mut R,
) -> Result<EnsembleStats>
where
    T: Target,
    U: Update<T::State> + Clone,
    X: Exchange<T>,
    R: Recorder<T::State> + ?Sized,
{
    let opts = RunOptions::new(cfg.n_iter, cfg.seed).parallel(cfg.parallel);
    let done = Cell::new(0);
    let mut rec = Progress {
        inner: recorder,
        total: cfg.n_iter,
        step: (cfg.n_iter / 100).max(1),
        enabled: cfg.progress,
        done: &done,
    };
    let m = cfg.sampler.chains();
    let kernels = vec![kernel; m];
    let result = match &cfg.sampler {
        SamplerSpec::Mh => run_mh_with(target, &kernels[0], init, opts, &mut rec),
        SamplerSpec::Pt(PtSampler { swap, .. }) => {
            let ladder = ladder(&cfg.sampler)?.expect("pt ladder");
            run_pt_with(target, &ladder, &kernels, swap_mode(*swap), init, opts, &mut rec)
        }
        SamplerSpec::Phs(_) => run_phs_with(target, &kernels, exchange, init, opts, &mut rec),
    };
    match result {
        Ok((stats, _)) => Ok(stats),
        Err(e) => Err(e).with_context(|| format!("sampler failed at iteration {}", done.get() + 1)),
    }
}

/// Writes `iteration, fields.., log_density`, keeping every `thin`-th iteration.
fn write_trace<S: CsvFields>(path: &Path, states: &[S], log_densities: &[f64], thin: usize) -> Result<()> {
    let mut w = csv_writer(path)?;
    let Some(first) = states.first() else {
        bail!("empty trace");
    };
    let mut header = vec!["iteration".to_string()];
    header.extend(first.field_names());
    header.push("log_density".into());
    writeln!(w, "{}", header.join(","))?;
    for (i, (s, ld)) in states.iter().zip(log_densities).enumerate() {
        if (i + 1) % thin == 0 {
            writeln!(w, "{},{},{ld:?}", i + 1, s.fields().join(","))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<V: serde::Serialize>(path: &Path, value: &V) -> Result<()> {
    let mut w = csv_writer(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// MCSE of each column, or nothing when the chain is too short for the estimator.
fn column_mcse(columns: &[Vec<f64>]) -> Result<Vec<McseEstimate>> {
    if columns.first().is_none_or(|c| c.len() < MCSE_MIN_LEN) {
        return Ok(Vec::new());
    }
    Ok(columns.iter().map(|c| mcse(c)).collect::<phs_core::Result<_>>()?)
}

fn base_report(cfg: &ExperimentConfig, stats: &EnsembleStats) -> RunReport {
    RunReport {
        sampler: cfg.sampler.kind().into(),
        target: cfg.target.kind().into(),
        n_iter: cfg.n_iter,
        seed: cfg.seed,
        acceptance_rates: stats.acceptance_rates(),
        swap_rate: stats.swap_rate(),
        ..Default::default()
    }
}

fn bool_columns<V: AsRef<[bool]>>(rows: &[V], p: usize) -> Vec<Vec<f64>> {
    (0..p)
        .map(|j| rows.iter().map(|r| r.as_ref()[j] as u8 as f64).collect())
        .collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Loads the regression data a linreg config names.
pub fn linreg_data(cfg: &ExperimentConfig, data: &LinregData) -> Result<RegressionData> {
    Ok(match data {
        LinregData::Csv(p) => {
            let f = File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            RegressionData::read_csv(f)?
        }
        LinregData::Generate(g) => generate_dataset(&g.generator(), g.data_seed.unwrap_or(cfg.seed))?.data,
    })
}

pub fn cart_schema(schema: &SchemaSource) -> Result<SurvivalSchema> {
    Ok(match schema {
        SchemaSource::Inline(s) => s.clone(),
        SchemaSource::File(p) => {
            SurvivalSchema::from_json_file(p).with_context(|| format!("cannot read schema {}", p.display()))?
        }
    })
}

pub fn cart_data(data: &Path, schema: &SchemaSource) -> Result<SurvivalDataset> {
    let schema = cart_schema(schema)?;
    SurvivalDataset::read_csv_file(data, &schema).with_context(|| format!("cannot load {}", data.display()))
}

/// Runs the experiment and writes every output into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let mut files = Vec::new();
    let mut out = |name: &str| {
        files.push(name.to_string());
        out_dir.join(name)
    };
    // The output location is not part of the experiment.
    let mut recorded = cfg.clone();
    recorded.out_dir = None;
    let expanded = serde_json::to_string_pretty(&recorded)?;
    std::fs::write(out("config.json"), format!("{expanded}\n"))?;

    let report = match &cfg.target {
        TargetSpec::Mixture(MixtureTarget {
            mixture,
            delta,
            init,
            histogram: h,
        }) => {
            let kernel = UniformWalkProposal::new(*delta)?;
            let mut path = Path1 {
                states: Vec::with_capacity(cfg.n_iter),
                log_densities: Vec::with_capacity(cfg.n_iter),
            };
            let stats = drive(cfg, mixture, kernel, &PlainSwap, *init, &mut path)?;
            write_trace(&out("trace.csv"), &path.states, &path.log_densities, cfg.trace_thin)?;
            let hist = histogram(&path.states, h.lo, h.hi, h.bins)?;
            hist.write_csv(csv_writer(&out("histogram.csv"))?)?;
            let mut report = base_report(cfg, &stats);
            report.set_mcse(&column_mcse(&[path.states])?);
            report.histogram = Some(HistogramReport::from(&hist));
            report
        }
        TargetSpec::Linreg(LinregTarget { data, init }) => {
            let data = linreg_data(cfg, data)?;
            let post = LinearModelPosterior::new(&data);
            let p = data.p();
            let start = match init {
                ModelInit::Null => ModelIndex::empty(p),
                ModelInit::Full => ModelIndex::full(p),
            };
            let mut path = Path1 {
                states: Vec::with_capacity(cfg.n_iter),
                log_densities: Vec::with_capacity(cfg.n_iter),
            };
            let stats = drive(cfg, &post, FlipSweep, &PlainSwap, start, &mut path)?;
            write_trace(&out("trace.csv"), &path.states, &path.log_densities, cfg.trace_thin)?;
            let mut report = base_report(cfg, &stats);
            report.inclusion_probabilities = phs_core::diagnostics::inclusion_probabilities(&path.states)?;
            report.set_mcse(&column_mcse(&bool_columns(&path.states, p))?);
            if post.singular_count() > 0 {
                eprintln!("warning: {} singular design submatrices were scored as zero mass", post.singular_count());
            }
            report
        }
        TargetSpec::Cart(CartTarget {
            data,
            schema,
            max_leaves,
            cross_moves,
            ..
        }) => {
            let data = cart_data(data, schema)?;
            let names: Vec<String> = data.covariates().iter().map(|c| c.name.clone()).collect();
            let model = TreeModel::new(data, *max_leaves)?;
            let root = model.fit(Tree::Leaf);
            if !model.log_density(&root).is_finite() {
                bail!("the single-leaf tree has zero posterior mass; the data need at least two distinct uncensored times");
            }
            let mut summary = TreeRunSummary::new(names.len());
            let stats = drive(
                cfg,
                &model,
                TreeProposal::new(&model),
                &TreeExchange::new(*cross_moves),
                root,
                &mut summary,
            )?;
            let mut w = csv_writer(&out("trace.csv"))?;
            writeln!(w, "iteration,log_marginal,leaves")?;
            for r in summary.rows.iter().filter(|r| r.iteration % cfg.trace_thin == 0) {
                writeln!(w, "{},{:?},{}", r.iteration, r.log_marginal, r.leaves)?;
            }
            w.flush()?;
            let modal = summary.modal_report(&model).context("no tree was recorded")?;
            write_json(&out("modal_tree.json"), &modal)?;
            let (best, _, _) = summary.modal.as_ref().expect("modal tree");
            let rows = km_table(&model, best)?;
            write_km_table(&rows, csv_writer(&out("km_table.csv"))?)?;
            let incl = summary.inclusion_probabilities();
            let by_name: BTreeMap<&str, f64> = names.iter().map(String::as_str).zip(incl.iter().copied()).collect();
            write_json(&out("inclusion.json"), &by_name)?;
            let mut report = base_report(cfg, &stats);
            report.inclusion_probabilities = incl;
            report.set_mcse(&column_mcse(&bool_columns(&summary.usage, names.len()))?);
            if model.failed_mode_count() > 0 {
                eprintln!(
                    "warning: the leaf mode search failed {} times; those trees were scored as zero mass",
                    model.failed_mode_count()
                );
            }
            report
        }
    };
    report.write_json(&out("report.json"))?;

    let mut outputs = BTreeMap::new();
    for name in &files {
        let bytes = std::fs::read(out_dir.join(name))?;
        outputs.insert(name.clone(), sha256_hex(&bytes));
    }
    let manifest = serde_json::json!({
        "config_sha256": sha256_hex(expanded.as_bytes()),
        "seed": cfg.seed,
        "sampler": cfg.sampler.kind(),
        "target": cfg.target.kind(),
        "n_iter": cfg.n_iter,
        "outputs": outputs,
    });
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    files.push("manifest.json".into());
    Ok(RunOutcome {
        out_dir: out_dir.to_path_buf(),
        report,
        files,
    })
}

/// Rebuilds a tree from `modal_tree.json` (or a bare tree node report).
pub fn tree_from_report_json(model: &TreeModel, text: &str) -> Result<Tree> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let node = value.get("tree").cloned().unwrap_or(value);
    let report: TreeNodeReport = serde_json::from_value(node).context("not a tree report")?;
    fn build(model: &TreeModel, n: &TreeNodeReport) -> Result<Tree> {
        Ok(match n {
            TreeNodeReport::Leaf { .. } => Tree::Leaf,
            TreeNodeReport::Split { rule, left, right } => {
                let r = model
                    .rules()
                    .resolve(rule)
                    .with_context(|| format!("rule {rule:?} does not occur in this dataset"))?;
                Tree::split(r, build(model, left)?, build(model, right)?)
            }
        })
    }
    build(model, &report)
}
