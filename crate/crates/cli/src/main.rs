use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use phs_cli::config::{self, CartTarget, LinregData, LinregTarget, Overrides, TargetSpec};
use phs_cli::run::{cart_data, linreg_data, run_experiment};
use phs_core::cart::{
    enumerate_tree_posterior, kaplan_meier, km_table, write_km_table, KmRow, TreeModel, TreeNodeReport,
    KM_TABLE_TIMES,
};
use phs_core::linreg::{enumerate_exact_posterior, LinearModelPosterior, MAX_ENUMERATION_P};

/// Multi-chain MCMC experiments for Bayesian model selection.
#[derive(Parser)]
#[command(name = "phs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON).
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to $PHS_OUT_DIR, then the config's out_dir, then ./out.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Number of iterations.
    #[arg(long)]
    iters: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sampler and write the outputs.
    Run(Common),
    /// Check a config and print its expanded form.
    Validate(Common),
    /// Exact posterior of a small linreg or tree config, by enumeration.
    Enumerate {
        #[command(flatten)]
        common: Common,
        /// How many top models to print.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Kaplan-Meier survival at 12, 24 and 36 months.
    Km {
        #[command(flatten)]
        common: Common,
        /// Tree JSON (modal_tree.json) giving the leaves; the whole sample when absent.
        #[arg(long)]
        tree: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<config::ExperimentConfig> {
    let source = std::fs::read_to_string(&common.config)
        .with_context(|| format!("cannot read {}", common.config.display()))?;
    let base = common.config.parent().unwrap_or(Path::new("."));
    let out_dir = common
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("PHS_OUT_DIR").map(PathBuf::from));
    let overrides = Overrides {
        seed: common.seed,
        n_iter: common.iters,
        out_dir,
    };
    config::load_config(&source, base, &overrides).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| format!("  {e}")).collect();
        anyhow::anyhow!("invalid config {}:\n{}", common.config.display(), lines.join("\n"))
    })
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate(common) => {
            let cfg = load(&common)?;
            println!("{}", serde_json::to_string_pretty(&cfg)?);
        }
        Command::Run(common) => {
            let cfg = load(&common)?;
            let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
            let outcome = run_experiment(&cfg, &dir)?;
            eprintln!("wrote {} files to {}", outcome.files.len(), outcome.out_dir.display());
        }
        Command::Enumerate { common, top } => enumerate(&load(&common)?, top)?,
        Command::Km { common, tree } => km(&load(&common)?, tree.as_deref())?,
    }
    Ok(())
}

fn enumerate(cfg: &config::ExperimentConfig, top: usize) -> Result<()> {
    match &cfg.target {
        TargetSpec::Linreg(LinregTarget { data, .. }) => {
            if let LinregData::Generate(g) = data {
                anyhow::ensure!(g.p <= MAX_ENUMERATION_P, "p = {} is too large to enumerate", g.p);
            }
            let data = linreg_data(cfg, data)?;
            let exact = enumerate_exact_posterior(&LinearModelPosterior::new(&data), MAX_ENUMERATION_P)?;
            let incl: Vec<String> = exact.inclusion.iter().map(|x| format!("{x:.6}")).collect();
            println!("inclusion {}", incl.join(" "));
            println!("rank,model,probability");
            for (i, (gamma, prob)) in exact.ranked().into_iter().take(top).enumerate() {
                let bits: String = gamma.as_slice().iter().map(|&b| if b { '1' } else { '0' }).collect();
                println!("{},{bits},{prob:.6e}", i + 1);
            }
        }
        TargetSpec::Cart(CartTarget {
            data,
            schema,
            max_leaves,
            ..
        }) => {
            let model = TreeModel::new(cart_data(data, schema)?, *max_leaves)?;
            let table = enumerate_tree_posterior(&model)?;
            let mut order: Vec<usize> = (0..table.trees.len()).collect();
            order.sort_by(|&a, &b| table.probabilities[b].total_cmp(&table.probabilities[a]));
            println!("{} trees", table.trees.len());
            for (rank, &i) in order.iter().take(top).enumerate() {
                let fitted = model.fit(table.trees[i].clone());
                let json = serde_json::to_string(&TreeNodeReport::new(&model, &fitted))?;
                println!("{} p={:.6e} log_marginal={:.6} {json}", rank + 1, table.probabilities[i], table.log_marginals[i]);
            }
        }
        TargetSpec::Mixture(_) => anyhow::bail!("enumeration needs a linreg or cart target"),
    }
    Ok(())
}

fn km(cfg: &config::ExperimentConfig, tree: Option<&Path>) -> Result<()> {
    let TargetSpec::Cart(CartTarget {
        data,
        schema,
        max_leaves,
        ..
    }) = &cfg.target
    else {
        anyhow::bail!("km needs a cart target");
    };
    let dataset = cart_data(data, schema)?;
    let rows = match tree {
        None => {
            let s = kaplan_meier(dataset.times(), dataset.events(), &KM_TABLE_TIMES)?;
            vec![KmRow {
                leaf: 1,
                size: dataset.len(),
                s12: s[0],
                s24: s[1],
                s36: s[2],
            }]
        }
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let model = TreeModel::new(dataset, *max_leaves)?;
            let tree = phs_cli::run::tree_from_report_json(&model, &text)?;
            km_table(&model, &model.fit(tree))?
        }
    };
    write_km_table(&rows, std::io::stdout().lock())?;
    Ok(())
}
