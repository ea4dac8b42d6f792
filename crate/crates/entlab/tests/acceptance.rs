//! The acceptance criteria, one PASS/FAIL line each. Exits non-zero if any
//! criterion fails.

use std::process::Command;
use std::time::Instant;

use entlab::commands::{sweep, verify, Measure, RunSettings, Suite, VerifyOptions};
use entlab::generate::{parse_grid, Family};
use entlab_core::decomp::{
    avg_entanglement, entanglement_of_assistance, entanglement_of_formation, measure_memory_orthogonal, random_basis,
    OptimizerConfig,
};
use entlab_core::experiments::{
    batch_decomposition, batch_state, verify_ineq_assistance, verify_ineq_formation, MemorySide, SLACK_TOLERANCE,
};
use entlab_core::measures::{ef_2qubit_closed, pure_entanglement, qrelative_entropy, reduced_entropy};
use entlab_core::ree::{flagged_state, minimizer_candidate_check, ree, ree_extension_closed, ree_pure};
use entlab_core::states::{gen_random_density, gen_random_pure, purify, DensityMatrix};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Allowance for last-bit rounding in comparisons that hold exactly in real
/// arithmetic.
const ROUNDING: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn settings(restarts: usize, seed: u64, command: &str) -> RunSettings {
    RunSettings {
        command: command.into(),
        seed,
        optimizer: OptimizerConfig::default().with_restarts(restarts),
        threads: 0,
    }
}

fn hs_states() -> Vec<DensityMatrix> {
    (0..200).map(|i| gen_random_density(&[2, 2], 4, 20_000 + i).unwrap()).collect()
}

fn pure_consistency() -> Outcome {
    let cfg = OptimizerConfig::default();
    let (mut worst_ree, mut worst_closed) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let psi = gen_random_pure(&[2, 2], 10_000 + i).unwrap();
        let rho = psi.density();
        let sb = reduced_entropy(&rho, &[1]).unwrap().value();
        let r = ree(&rho, &cfg.clone().with_seed(i)).unwrap().value.value();
        worst_ree = worst_ree.max((r - sb).abs());
        let closed = ree_pure(&psi).unwrap().value() - pure_entanglement(&psi).unwrap().value();
        worst_closed = worst_closed.max(closed.abs());
    }
    outcome(
        worst_ree <= 1e-4 && worst_closed <= 1e-10,
        format!("max |ree - S_B| = {worst_ree:.3e}, max |ree_pure - E| = {worst_closed:.3e}"),
    )
}

fn formation_oracle(states: &[DensityMatrix], ef: &[f64]) -> Outcome {
    let gaps: Vec<f64> = states
        .iter()
        .zip(ef)
        .map(|(rho, e)| e - ef_2qubit_closed(rho).unwrap().value())
        .collect();
    let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    outcome(
        lo >= -ROUNDING && hi <= 5e-3,
        format!("E_F - closed form in [{lo:.3e}, {hi:.3e}] over {} states", states.len()),
    )
}

fn ordering_chain(states: &[DensityMatrix], ef: &[f64], cfg: &OptimizerConfig) -> Outcome {
    let mut failures = 0;
    let mut worst_upper = f64::NEG_INFINITY;
    let mut worst_lower = f64::NEG_INFINITY;
    for (i, (rho, &e)) in states.iter().zip(ef).enumerate() {
        let r = ree(rho, &cfg.clone().with_seed(i as u64)).unwrap();
        let (lo, v) = (r.ppt_lower.value(), r.value.value());
        worst_lower = worst_lower.max(lo - v);
        worst_upper = worst_upper.max(v - e);
        if lo > v + ROUNDING || v > e + 5e-3 {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{failures} failures; max(ppt - ree) = {worst_lower:.3e}, max(ree - E_F) = {worst_upper:.3e}"),
    )
}

fn interpolation_bracket(cfg: &OptimizerConfig) -> Outcome {
    let mut failures = 0;
    let mut margin = f64::INFINITY;
    for i in 0..50u64 {
        let rho = batch_state(31, i);
        let c = cfg.clone().with_seed(i);
        let ef = entanglement_of_formation(&rho, &c).unwrap().value.value();
        let ea = entanglement_of_assistance(&rho, &c).unwrap().value.value();
        let ext = purify(&rho, rho.dim()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(500 + i);
        for _ in 0..8 {
            let basis = random_basis(rho.dim(), &mut rng);
            let avg = avg_entanglement(&measure_memory_orthogonal(&ext, &basis).unwrap()).unwrap().value();
            margin = margin.min((avg - (ef - 5e-3)).min(ea + 5e-3 - avg));
            if avg < ef - 5e-3 || avg > ea + 5e-3 {
                failures += 1;
            }
        }
    }
    outcome(failures == 0, format!("{failures} of 400 outside the bracket; smallest margin {margin:.3e}"))
}

fn closed_extension() -> Outcome {
    let (mut avg_err, mut direct_err, mut undercut) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for i in 0..100u64 {
        let eps = batch_decomposition(47, i, 4 + (i % 3) as usize).unwrap();
        let (closed, sigma) = ree_extension_closed(&eps).unwrap();
        avg_err = avg_err.max((closed.value() - avg_entanglement(&eps).unwrap().value()).abs());
        let direct = qrelative_entropy(&flagged_state(&eps).unwrap(), &sigma).unwrap().value();
        direct_err = direct_err.max((direct - closed.value()).abs());
        let mut rng = ChaCha8Rng::seed_from_u64(900 + i);
        undercut = undercut.max(minimizer_candidate_check(&eps, 1000, &mut rng).unwrap());
    }
    outcome(
        avg_err <= 1e-10 && direct_err <= 1e-8 && undercut <= 1e-8,
        format!("closed vs avg {avg_err:.3e}, direct {direct_err:.3e}, best candidate undercut {undercut:.3e}"),
    )
}

fn inequality_suites() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for suite in [Suite::Formation, Suite::Assistance] {
        let opts = VerifyOptions {
            suite,
            n: 500,
            samples: 4,
            side: MemorySide::Bob,
            coherent: false,
            adversarial: false,
        };
        let out = verify(&opts, &settings(8, 8, "acceptance")).unwrap();
        let min = out.records.rows.iter().filter_map(|r| match r[3] {
            entlab::report::Cell::Num(x) => Some(x),
            _ => None,
        });
        let min = min.fold(f64::INFINITY, f64::min);
        pass &= out.investigate == 0 && min >= -SLACK_TOLERANCE && out.records.rows.len() == 500;
        parts.push(format!("{} min slack {min:.3e}", suite.name()));
    }
    let cfg = OptimizerConfig::default().with_restarts(8);
    let mut pure_max = f64::NEG_INFINITY;
    let mut pure_min = f64::INFINITY;
    for i in 0..20u64 {
        let rho = gen_random_pure(&[2, 2], 30_000 + i).unwrap().density();
        for rec in [
            verify_ineq_formation(&rho, &cfg, "pure").unwrap(),
            verify_ineq_assistance(&rho, &cfg, "pure").unwrap(),
        ] {
            pure_max = pure_max.max(rec.slack);
            pure_min = pure_min.min(rec.slack);
        }
    }
    pass &= pure_max <= 1e-4 && pure_min >= -SLACK_TOLERANCE;
    parts.push(format!("pure slack in [{pure_min:.3e}, {pure_max:.3e}]"));
    outcome(pass, parts.join("; "))
}

fn batch_suite(suite: Suite, n: usize) -> Outcome {
    let opts = VerifyOptions {
        suite,
        n,
        samples: 4,
        side: MemorySide::Bob,
        coherent: false,
        adversarial: false,
    };
    let out = verify(&opts, &settings(8, 5, "acceptance")).unwrap();
    outcome(
        out.investigate == 0 && out.pass == n,
        format!("{} of {n} pass, {} investigate", out.pass, out.investigate),
    )
}

fn werner_family() -> Outcome {
    let grid = parse_grid("0:1:0.1").unwrap();
    let report = sweep(Family::Werner, &grid, &[Measure::Ree], &settings(32, 0, "acceptance")).unwrap();
    let values: Vec<(f64, f64)> = report
        .rows
        .iter()
        .map(|r| match (&r[0], &r[1]) {
            (entlab::report::Cell::Num(p), entlab::report::Cell::Num(v)) => (*p, *v),
            _ => unreachable!("numeric sweep cells"),
        })
        .collect();
    let separable = values
        .iter()
        .filter(|(p, _)| *p <= 1.0 / 3.0)
        .map(|(_, v)| *v)
        .fold(0.0f64, f64::max);
    let top = values.last().unwrap().1;
    let drop = values.windows(2).map(|w| w[0].1 - w[1].1).fold(f64::NEG_INFINITY, f64::max);
    outcome(
        separable <= 1e-4 && (top - 1.0).abs() <= 1e-3 && drop <= 1e-4,
        format!("max ree for p <= 1/3 = {separable:.3e}, ree(1) = {top:.9}, largest decrease {drop:.3e}"),
    )
}

fn assistance_endpoint() -> Outcome {
    let rho = DensityMatrix::maximally_mixed(&[2, 2]);
    let ea = entanglement_of_assistance(&rho, &OptimizerConfig::default()).unwrap().value.value();
    outcome(ea >= 1.0 - 1e-3 && ea <= 1.0 + 1e-6, format!("E_A(I/4) = {ea:.12}"))
}

fn run_cli(args: &[&str], threads: &str, out: Option<&std::path::Path>) -> (Vec<u8>, Vec<u8>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_entlab"));
    cmd.args(args).env("ENTLAB_THREADS", threads);
    if let Some(p) = out {
        cmd.arg("--out").arg(p);
    }
    let o = cmd.output().expect("entlab runs");
    let file = out.map(|p| std::fs::read(p).expect("records written")).unwrap_or_default();
    (o.stdout, file)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [
        &["compute", "--gen", "random:3:11", "--measures", "ree,ppt,ef,ea", "--seed", "4"],
        &["compute", "--gen", "werner:0.6", "--format", "json", "--seed", "9"],
        &["sweep", "--family", "bell-diagonal", "--grid", "0:1:0.25", "--measures", "ree,ef", "--seed", "2"],
        &["verify", "formation", "--n", "12", "--seed", "3"],
    ];
    let mut identical = 0;
    for (k, args) in runs.iter().enumerate() {
        let a = dir.path().join(format!("a{k}.out"));
        let b = dir.path().join(format!("b{k}.out"));
        let first = run_cli(args, "1", Some(&a));
        let second = run_cli(args, "0", Some(&b));
        if first == second && !first.1.is_empty() {
            identical += 1;
        }
    }
    outcome(identical == runs.len(), format!("{identical} of {} commands byte-identical across runs", runs.len()))
}

fn main() {
    let start = Instant::now();
    let cfg = OptimizerConfig::default();
    let states = hs_states();
    let ef: Vec<f64> = states
        .iter()
        .enumerate()
        .map(|(i, rho)| entanglement_of_formation(rho, &cfg.clone().with_seed(i as u64)).unwrap().value.value())
        .collect();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("pure-state consistency", Box::new(pure_consistency)),
        ("formation oracle", Box::new(|| formation_oracle(&states, &ef))),
        ("ordering chain", Box::new(|| ordering_chain(&states, &ef, &cfg))),
        ("interpolation bracket", Box::new(|| interpolation_bracket(&cfg))),
        ("closed-form extension ree", Box::new(closed_extension)),
        ("inequality suites", Box::new(inequality_suites)),
        ("information ledger", Box::new(|| batch_suite(Suite::Infoledger, 100))),
        ("proof chain", Box::new(|| batch_suite(Suite::Proofchain, 200))),
        ("werner family", Box::new(werner_family)),
        ("assistance endpoint", Box::new(assistance_endpoint)),
        ("cli determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} {:>2} {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
