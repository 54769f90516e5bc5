//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p phs-cli --test acceptance`. Set `PHS_LIVER_CSV` to
//! the 622-patient survival CSV to run criterion 7 on the real data with the
//! full preset; otherwise a synthetic stand-in of the same shape is used.

#[path = "../../core/tests/common/mod.rs"]
mod common;
mod support;

use std::collections::HashMap;
use std::time::Instant;

use common::*;
use phs_cli::config::{load_config, Overrides};
use phs_cli::run::run_experiment;
use phs_core::cart::laplace::{offset_log_integrand, leaf_log_evidence, leaf_mode, log_integrand};
use phs_core::cart::{
    enumerate_tree_posterior, read_km_table, Covariate, LeafStats, SurvivalDataset, Tree, TreeModel, TreeProposal,
};
use phs_core::diagnostics::{inclusion_probabilities, mcse};
use phs_core::finite::{FiniteTarget, TableProposal};
use phs_core::linreg::{
    enumerate_exact_posterior, generate_dataset, FlipSweep, GeneratorConfig, LinearModelPosterior, ModelIndex,
};
use phs_core::mixture::{GaussianMixture, UniformWalkProposal, REFERENCE_MODE_GROUPS};
use phs_core::samplers::{run_mh, run_mh_with, run_phs, run_pt, PlainSwap, RunOptions, SwapMode, TemperatureLadder};
use phs_core::{ChainState, RngStream};
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal, Weibull};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("finite-state kernel correctness", c1_finite_kernels),
        ("mixture mode coverage", c2_mixture),
        ("variable selection vs enumeration (p = 10)", c3_linreg_oracle),
        ("inclusion shape on p = 15 designs", c4_linreg_shape),
        ("Laplace leaf evidence vs quadrature", c5_laplace),
        ("tree-space stationarity", c6_tree_stationarity),
        ("survival-tree pipeline smoke test", c7_liver_pipeline),
        ("MCSE oracle checks", c8_mcse),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        failed += !o.pass as usize;
        println!(
            "criterion {}: {verdict} {name} ({:.1}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

/// Standard error of a chain mean of indicators: the autocorrelation-aware
/// MCSE, floored at the iid binomial error under the reference probability.
fn indicator_se(xs: &[f64], p_ref: f64) -> f64 {
    let iid = (p_ref * (1.0 - p_ref) / xs.len() as f64).sqrt();
    mcse(xs).unwrap().mcse.max(iid)
}

// ---------------------------------------------------------------- 1

fn random_case(rng: &mut rand::rngs::StdRng) -> (FiniteTarget, TableProposal) {
    let n = rng.random_range(2..=6);
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..5.0)).collect();
    let rows = (0..n)
        .map(|a| {
            let raw: Vec<f64> = (0..n).map(|b| if a == b { 0.0 } else { rng.random_range(0.05..1.0) }).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| x / s).collect()
        })
        .collect();
    (FiniteTarget::from_weights(&w), TableProposal::new(rows).unwrap())
}

fn c1_finite_kernels() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(101);
    let cases = 300;
    let (mut db, mut phs, mut pt) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cases {
        let (target, q) = random_case(&mut rng);
        let f = target.probabilities();
        let n = f.len();
        let k = mh_kernel(&target, &q, 1.0);
        for a in 0..n {
            for b in 0..n {
                db = db.max((f[a] * k[a][b] - f[b] * k[b][a]).abs());
            }
        }
        let joint = phs3_kernel(&k);
        let mu: Vec<f64> = (0..n * n * n)
            .map(|i| {
                let x = unidx3(n, i);
                f[x[0]] * f[x[1]] * f[x[2]]
            })
            .collect();
        for (a, b) in mu.iter().zip(left_apply(&mu, &joint)) {
            phs = phs.max((a - b).abs());
        }
        let heated = normalise(&f.iter().map(|p| p.sqrt()).collect::<Vec<_>>());
        let (update, swap) = pt2_kernels(&target, &q, [1.0, 2.0]);
        let s = rng.random_range(0.05..0.95);
        for kernel in [matmul(&update, &swap), mix(&update, &swap, s)] {
            let pi = stationary(&kernel);
            for x in 0..n {
                let cold: f64 = (0..n).map(|y| pi[x * n + y]).sum();
                let hot: f64 = (0..n).map(|y| pi[y * n + x]).sum();
                pt = pt.max((cold - f[x]).abs()).max((hot - heated[x]).abs());
            }
        }
    }
    outcome(
        db < 1e-12 && phs < 1e-10 && pt < 1e-10,
        format!(
            "{cases} random targets with 2-6 states; max detailed-balance gap {db:.1e} (tol 1e-12), \
             max |muK - mu| for PHS {phs:.1e} (tol 1e-10), max PT marginal gap {pt:.1e} (tol 1e-10)"
        ),
    )
}

// ---------------------------------------------------------------- 2

fn c2_mixture() -> Outcome {
    let mix = GaussianMixture::reference();
    let q = UniformWalkProposal::new(1.0).unwrap();
    let seed = 1;
    let phs = run_phs(&mix, &[q; 10], &PlainSwap, 0.0, RunOptions::new(100_000, seed)).unwrap();
    let xs = phs.trace.states();
    let mut pass = true;
    let mut parts = Vec::new();
    for g in REFERENCE_MODE_GROUPS {
        let (lo, hi) = mix.region(g, 4.0);
        let est = xs.iter().filter(|&&x| x > lo && x < hi).count() as f64 / xs.len() as f64;
        let truth = mix.mass(lo, hi);
        pass &= est >= 0.05 && (est - truth).abs() <= 0.05;
        parts.push(format!("[{lo:.2}, {hi:.2}] {est:.3} vs {truth:.3}"));
    }
    let mh = run_mh(&mix, &q, 0.0, RunOptions::new(1_000_000, seed)).unwrap();
    let (lo, hi) = mix.region(&[0], 4.0);
    let far = mh.trace.states().iter().filter(|&&x| x > lo && x < hi).count() as f64 / 1e6;
    pass &= far < 0.01;
    outcome(
        pass,
        format!(
            "seed {seed}; PHS chain-1 region mass vs truth: {}; MH mass near -8.85: {far:.4} (need < 0.01)",
            parts.join(", ")
        ),
    )
}

// ---------------------------------------------------------------- 3

fn c3_linreg_oracle() -> Outcome {
    let cfg = GeneratorConfig {
        p: 10,
        ..GeneratorConfig::default()
    };
    let data = generate_dataset(&cfg, 7).unwrap().data;
    let post = LinearModelPosterior::new(&data);
    let exact = enumerate_exact_posterior(&post, 20).unwrap().inclusion;
    let null = ModelIndex::empty(10);
    let n = 50_000;
    let seed = 3;
    let opts = RunOptions::new(n, seed).parallel(true);
    let ladder = TemperatureLadder::equally_spaced(9, 5.0).unwrap();
    let runs = [
        ("MH", run_mh(&post, &FlipSweep, null.clone(), opts).unwrap().trace),
        (
            "PT",
            run_pt(&post, &ladder, &[FlipSweep; 9], SwapMode::PtIndependent(0.2), null.clone(), opts)
                .unwrap()
                .trace,
        ),
        ("PHS", run_phs(&post, &[FlipSweep; 9], &PlainSwap, null, opts).unwrap().trace),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, trace) in &runs {
        let est = inclusion_probabilities(trace.states()).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..10 {
            let col: Vec<f64> = trace.states().iter().map(|g| g.as_slice()[j] as u8 as f64).collect();
            let z = (est[j] - exact[j]).abs() / indicator_se(&col, exact[j]);
            worst = worst.max(z);
        }
        pass &= worst <= 4.0;
        parts.push(format!("{name} max |err|/SE {worst:.2}"));
    }
    outcome(
        pass,
        format!("data seed 7, chain seed {seed}, {n} iterations each; {} (need <= 4)", parts.join(", ")),
    )
}

// ---------------------------------------------------------------- 4

/// Dataset seed for the p = 15 designs; see the README for how it was chosen.
const SHAPE_DATA_SEED: u64 = 30;

fn c4_linreg_shape() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for collinear in [false, true] {
        let cfg = GeneratorConfig {
            collinear,
            ..GeneratorConfig::default()
        };
        let data = generate_dataset(&cfg, SHAPE_DATA_SEED).unwrap().data;
        let post = LinearModelPosterior::new(&data);
        let run = run_phs(
            &post,
            &[FlipSweep; 9],
            &PlainSwap,
            ModelIndex::empty(15),
            RunOptions::new(50_000, 5).parallel(true),
        )
        .unwrap();
        let incl = inclusion_probabilities(run.trace.states()).unwrap();
        let order: Vec<f64> = (1..=15).map(|j| j as f64).collect();
        let rho = spearman(&incl, &order);
        let jump = incl[5] - incl[4];
        pass &= rho >= 0.8 && jump >= 0.1;
        parts.push(format!(
            "{}: Spearman {rho:.3}, jump {jump:.3}",
            if collinear { "collinear" } else { "independent" }
        ));
    }
    outcome(
        pass,
        format!(
            "data seed {SHAPE_DATA_SEED}, PHS 9 chains, 50000 iterations; {} (need >= 0.8 and >= 0.1)",
            parts.join("; ")
        ),
    )
}

// ---------------------------------------------------------------- 5

fn simulated_leaf(k: u64) -> (Vec<f64>, Vec<bool>) {
    let mut rng = RngStream::new(500 + k, 0);
    let shape = 0.6 + 0.15 * k as f64;
    let scale = 0.5 + 0.4 * k as f64;
    let w = Weibull::new(scale, shape).unwrap();
    let n = 30 + 2 * k as usize;
    let mut times = Vec::with_capacity(n);
    let mut events = Vec::with_capacity(n);
    for i in 0..n {
        let t: f64 = w.sample(&mut rng);
        // every fifth observation censored at a fraction of its event time
        if i % 5 == 4 {
            times.push(t * rng.random_range(0.2..1.0));
            events.push(false);
        } else {
            times.push(t);
            events.push(true);
        }
    }
    (times, events)
}

/// Log of the 2-D integral over `(eta, psi) = (ln alpha, ln beta)` of the
/// Weibull leaf likelihood times the `1/(alpha beta)` prior, built from the raw
/// observations rather than any library expression.
fn leaf_integral_2d(times: &[f64], events: &[bool], centre: f64, half_width: f64) -> f64 {
    let d = events.iter().filter(|&&e| e).count() as f64;
    let sum_log: f64 = times.iter().zip(events).filter(|(_, &e)| e).map(|(t, _)| t.ln()).sum();
    let inner = |eta: f64| -> f64 {
        let alpha = eta.exp();
        let s: f64 = times.iter().map(|t| t.powf(alpha)).sum();
        let psi_star = (d / s).ln();
        let h = |psi: f64| d * psi - psi.exp() * s;
        let h_star = h(psi_star);
        let width = 20.0 / d.sqrt();
        let body = integrate(&|psi: f64| (h(psi) - h_star).exp(), psi_star - width, psi_star + width, 1e-12);
        h_star + body.ln() + d * eta + (alpha - 1.0) * sum_log
    };
    let peak = inner(centre);
    let outer = integrate(
        &|eta: f64| (inner(eta) - peak).exp(),
        centre - half_width,
        centre + half_width,
        1e-10,
    );
    peak + outer.ln()
}

fn log_quadrature_1d<F: Fn(f64) -> f64>(l: F, centre: f64, half_width: f64) -> f64 {
    let peak = l(centre);
    peak + integrate(&|eta: f64| (l(eta) - peak).exp(), centre - half_width, centre + half_width, 1e-11).ln()
}

fn c5_laplace() -> Outcome {
    let (mut worst_laplace, mut worst_exact, mut worst_offset) = (0.0f64, 0.0f64, 0.0f64);
    let mut offset_gap: f64 = 0.0;
    for k in 0..20 {
        let (times, events) = simulated_leaf(k);
        let s = LeafStats::from_observations(&times, &events);
        assert!(s.uncensored >= 20);
        let mode = leaf_mode(&s).unwrap();
        let half_width = 30.0 / (-mode.second).sqrt();
        let laplace = leaf_log_evidence(&s).unwrap();
        let quad_exact = log_quadrature_1d(|e| log_integrand(&s, e), mode.eta_hat, half_width);
        let quad_offset = log_quadrature_1d(|e| offset_log_integrand(&s, e), mode.eta_hat, half_width);
        let two_d = leaf_integral_2d(&times, &events, mode.eta_hat, half_width);
        worst_laplace = worst_laplace.max((laplace - quad_exact).abs());
        worst_exact = worst_exact.max((quad_exact - two_d).abs());
        worst_offset = worst_offset.max((quad_offset - two_d).abs());
        let predicted = s.sum_log_event_times - s.uncensored as f64;
        offset_gap = offset_gap.max((quad_offset - two_d - predicted).abs());
    }
    let one_percent = 1.01f64.ln();
    outcome(
        worst_laplace <= 0.05 && worst_exact <= one_percent,
        format!(
            "20 Weibull leaves; max |Laplace - 1-D quadrature| {worst_laplace:.4} (tol 0.05); \
             2-D quadrature agrees with the exact integrand to {worst_exact:.1e} in log (tol ln 1.01); \
             the offset integrand form is off by up to {worst_offset:.2} in log, \
             equal to sum(log t_event) - d within {offset_gap:.1e}, a per-leaf constant that \
             does not cancel between trees, so the exact form is used"
        ),
    )
}

// ---------------------------------------------------------------- 6

fn small_tree_model() -> TreeModel {
    let times = vec![0.5, 0.9, 1.4, 0.7, 1.1, 1.9, 3.2, 4.5, 2.8, 5.1, 3.9, 6.3];
    let events = vec![true, true, true, true, false, true, true, true, true, true, true, false];
    let ord = vec![1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0, 3.0, 3.0, 4.0, 4.0, 4.0];
    let levels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let codes = (0..12).map(|i| i % 3).collect();
    let data = SurvivalDataset::new(
        times,
        events,
        vec![Covariate::ordinal("stage", ord), Covariate::categorical("group", levels, codes)],
    )
    .unwrap();
    TreeModel::new(data, 3).unwrap()
}

fn c6_tree_stationarity() -> Outcome {
    let model = small_tree_model();
    let table = enumerate_tree_posterior(&model).unwrap();
    let index: HashMap<Tree, usize> = table.trees.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let n = 1_000_000;
    let mut visits: Vec<u16> = Vec::with_capacity(n);
    let mut unknown = 0usize;
    let mut rec = |_: usize, chains: &[ChainState<_>], _: &_| {
        let t: &phs_core::cart::FittedTree = chains[0].value();
        match index.get(t.tree()) {
            Some(&i) => visits.push(i as u16),
            None => unknown += 1,
        }
    };
    let seed = 2024;
    run_mh_with(&model, &TreeProposal::new(&model), model.fit(Tree::Leaf), RunOptions::new(n, seed), &mut rec).unwrap();
    let mut worst: f64 = 0.0;
    let mut zero_mass_visits = 0;
    let mut over = 0;
    for (i, &p) in table.probabilities.iter().enumerate() {
        let col: Vec<f64> = visits.iter().map(|&v| (v as usize == i) as u8 as f64).collect();
        let est = col.iter().sum::<f64>() / n as f64;
        if p == 0.0 {
            zero_mass_visits += (est > 0.0) as usize;
            continue;
        }
        let z = (est - p).abs() / indicator_se(&col, p);
        worst = worst.max(z);
        over += (z > 3.0) as usize;
    }
    let supported = table.probabilities.iter().filter(|&&p| p > 0.0).count();
    outcome(
        unknown == 0 && zero_mass_visits == 0 && over == 0,
        format!(
            "{} trees ({supported} with positive mass), seed {seed}, {n} MH iterations; max |err|/SE {worst:.2}, \
             {over} trees beyond 3 SE, {zero_mass_visits} zero-mass trees visited, {unknown} states outside the enumeration",
            table.trees.len()
        ),
    )
}

// ---------------------------------------------------------------- 7

fn c7_liver_pipeline() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (csv, label, iters) = match std::env::var_os("PHS_LIVER_CSV") {
        Some(p) => (std::path::PathBuf::from(p), "user-supplied CSV, full preset", None),
        None => {
            let p = dir.path().join("liver.csv");
            support::liver_like_csv(&p, 622, 17);
            (p, "synthetic 622-row stand-in, 1000 iterations", Some(1000))
        }
    };
    let source = serde_json::json!({
        "preset": "cart-phs",
        "seed": 1,
        "progress": false,
        "target": {"data": csv},
    })
    .to_string();
    let cfg = match load_config(&source, dir.path(), &Overrides { n_iter: iters, ..Default::default() }) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("config rejected: {}", e[0])),
    };
    let out = dir.path().join("out");
    if let Err(e) = run_experiment(&cfg, &out) {
        return outcome(false, format!("run failed: {e:#}"));
    }
    let mut problems = Vec::new();
    for f in ["modal_tree.json", "inclusion.json", "km_table.csv", "trace.csv", "report.json", "manifest.json"] {
        if !out.join(f).is_file() {
            problems.push(format!("missing {f}"));
        }
    }
    let header = std::fs::read_to_string(out.join("km_table.csv")).unwrap_or_default();
    if header.lines().next() != Some("leaf,size,S12,S24,S36") {
        problems.push("km table header".into());
    }
    let rows = read_km_table(header.as_bytes()).unwrap_or_default();
    let incl: serde_json::Map<String, serde_json::Value> =
        serde_json::from_slice(&std::fs::read(out.join("inclusion.json")).unwrap_or_default()).unwrap_or_default();
    if incl.len() != 9 {
        problems.push(format!("{} covariates in inclusion.json", incl.len()));
    }
    outcome(
        problems.is_empty(),
        format!(
            "{label}; modal tree has {} leaves, {} covariate inclusion probabilities{}",
            rows.len(),
            incl.len(),
            if problems.is_empty() { String::new() } else { format!("; problems: {}", problems.join(", ")) }
        ),
    )
}

// ---------------------------------------------------------------- 8

fn c8_mcse() -> Outcome {
    let n = 100_000;
    let mut rng = RngStream::new(8080, 0);
    let iid: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let iid_expected = (1.0 / n as f64).sqrt();
    let iid_err = (mcse(&iid).unwrap().mcse - iid_expected).abs() / iid_expected;

    let rho: f64 = 0.7;
    let mut x = 0.0;
    let ar: Vec<f64> = (0..n)
        .map(|_| {
            let e: f64 = StandardNormal.sample(&mut rng);
            x = rho * x + e;
            x
        })
        .collect();
    let ar_expected = (1.0 / (1.0 - rho * rho) / n as f64 * (1.0 + rho) / (1.0 - rho)).sqrt();
    let ar_err = (mcse(&ar).unwrap().mcse - ar_expected).abs() / ar_expected;
    outcome(
        iid_err <= 0.10 && ar_err <= 0.15,
        format!(
            "iid N(0,1), n = {n}: relative error {:.1}% (tol 10%); AR(1) rho = {rho}: relative error {:.1}% (tol 15%)",
            100.0 * iid_err,
            100.0 * ar_err
        ),
    )
}
