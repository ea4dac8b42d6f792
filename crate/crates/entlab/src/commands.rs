//! The compute, sweep and verify commands, independent of argument parsing.

use entlab_core::decomp::{entanglement_of_assistance, entanglement_of_formation, OptimizerConfig};
use entlab_core::experiments::{
    batch_decomposition, batch_state, check_ordering, explore_conjecture, info_ledger, item_seed,
    proof_chain_check, verify_ineq_assistance, verify_ineq_formation, ConjectureConfig, GapStats, InequalityRecord,
    MapSampler, MemorySide, SlackClass, ORDERING_TOLERANCE, SLACK_TOLERANCE,
};
use entlab_core::measures::{ef_2qubit_closed, reduced_entropy, vn_entropy};
use entlab_core::ree::{ree, ree_ppt_bracket};
use entlab_core::report::{Bound, Diagnostics};
use entlab_core::states::{pure_extension, DensityMatrix};
use entlab_core::Tolerances;

use crate::batch::run_indexed;
use crate::generate::Family;
use crate::report::{Cell, Report};
use crate::CliError;

/// Settings echoed into every report.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub command: String,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    pub threads: usize,
}

impl RunSettings {
    pub fn meta(&self, extra: &[(&str, String)]) -> Vec<(String, String)> {
        let o = &self.optimizer;
        let t = Tolerances::DEFAULT;
        let mut meta = vec![
            ("tool".to_string(), format!("entlab {}", env!("CARGO_PKG_VERSION"))),
            ("command".to_string(), self.command.clone()),
            ("seed".to_string(), self.seed.to_string()),
            (
                "optimizer".to_string(),
                format!(
                    "restarts={} max_iterations={} gradient_tolerance={:e} size_cap={}",
                    o.restarts,
                    o.max_iterations,
                    o.gradient_tolerance,
                    o.size_cap.map_or("auto".to_string(), |k| k.to_string())
                ),
            ),
            (
                "tolerances".to_string(),
                format!(
                    "structural={:e} eig_cutoff={:e} reconstruction={:e} norm={:e} tie={:e} slack={:e} ordering={:e}",
                    t.structural, t.eig_cutoff, t.reconstruction, t.norm, t.tie, SLACK_TOLERANCE, ORDERING_TOLERANCE
                ),
            ),
        ];
        meta.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
        meta
    }

    fn item_config(&self, index: u64) -> OptimizerConfig {
        self.optimizer.clone().with_seed(item_seed(self.seed, index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Ree,
    Ppt,
    Ef,
    Ea,
    EfClosed,
    EntropyA,
    EntropyB,
    Entropy,
    Mutual,
}

impl Measure {
    pub const ALL: [Measure; 9] = [
        Measure::Ree,
        Measure::Ppt,
        Measure::Ef,
        Measure::Ea,
        Measure::EfClosed,
        Measure::EntropyA,
        Measure::EntropyB,
        Measure::Entropy,
        Measure::Mutual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Ree => "ree",
            Measure::Ppt => "ppt",
            Measure::Ef => "ef",
            Measure::Ea => "ea",
            Measure::EfClosed => "ef-closed",
            Measure::EntropyA => "sa",
            Measure::EntropyB => "sb",
            Measure::Entropy => "s",
            Measure::Mutual => "mi",
        }
    }

    /// The guarantee a sweep column carries.
    pub fn column_flag(self) -> &'static str {
        match self {
            Measure::Ree | Measure::Ef => Bound::UpperBoundOfMin.flag(),
            Measure::Ea => Bound::LowerBoundOfMax.flag(),
            Measure::Ppt => Bound::CertifiedLower.flag(),
            _ => Bound::Exact.flag(),
        }
    }

    pub fn parse_list(list: &str) -> Result<Vec<Measure>, CliError> {
        let mut out = Vec::new();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let m = Measure::ALL
                .into_iter()
                .find(|m| m.name() == name.to_ascii_lowercase())
                .ok_or_else(|| {
                    let known: Vec<&str> = Measure::ALL.iter().map(|m| m.name()).collect();
                    CliError::input(format!("unknown measure `{name}` (known: {})", known.join(", ")))
                })?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        if out.is_empty() {
            return Err(CliError::input("no measures requested"));
        }
        Ok(out)
    }
}

/// One evaluated measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub measure: Measure,
    pub value: f64,
    pub bound: Bound,
    pub diagnostics: Option<Diagnostics>,
    /// Upper end of the PPT bracket.
    pub upper: Option<f64>,
    pub newton_steps: Option<usize>,
}

fn exact(measure: Measure, value: f64) -> Evaluation {
    Evaluation {
        measure,
        value,
        bound: Bound::Exact,
        diagnostics: None,
        upper: None,
        newton_steps: None,
    }
}

pub fn evaluate(rho: &DensityMatrix, measure: Measure, cfg: &OptimizerConfig) -> Result<Evaluation, CliError> {
    let bipartite = || -> Result<(), CliError> {
        if rho.dims().len() != 2 {
            return Err(CliError::input(format!(
                "measure `{}` needs a bipartite state, got dims {:?}",
                measure.name(),
                rho.dims()
            )));
        }
        Ok(())
    };
    Ok(match measure {
        Measure::Ree => {
            bipartite()?;
            let r = ree(rho, cfg)?;
            Evaluation {
                measure,
                value: r.value.value(),
                bound: r.bound,
                diagnostics: Some(r.diagnostics),
                upper: None,
                newton_steps: None,
            }
        }
        Measure::Ppt => {
            bipartite()?;
            let b = ree_ppt_bracket(rho)?;
            Evaluation {
                measure,
                value: b.lower.value(),
                bound: Bound::CertifiedLower,
                diagnostics: None,
                upper: Some(b.upper.value()),
                newton_steps: Some(b.newton_steps),
            }
        }
        Measure::Ef | Measure::Ea => {
            bipartite()?;
            let r = if measure == Measure::Ef {
                entanglement_of_formation(rho, cfg)?
            } else {
                entanglement_of_assistance(rho, cfg)?
            };
            Evaluation {
                measure,
                value: r.value.value(),
                bound: r.bound,
                diagnostics: Some(r.diagnostics),
                upper: None,
                newton_steps: None,
            }
        }
        Measure::EfClosed => exact(measure, ef_2qubit_closed(rho)?.value()),
        Measure::EntropyA => {
            bipartite()?;
            exact(measure, reduced_entropy(rho, &[0])?.value())
        }
        Measure::EntropyB => {
            bipartite()?;
            exact(measure, reduced_entropy(rho, &[1])?.value())
        }
        Measure::Entropy => exact(measure, vn_entropy(rho).value()),
        Measure::Mutual => {
            bipartite()?;
            let sa = reduced_entropy(rho, &[0])?.value();
            let sb = reduced_entropy(rho, &[1])?.value();
            exact(measure, (sa + sb - vn_entropy(rho).value()).max(0.0))
        }
    })
}

pub const COMPUTE_COLUMNS: [&str; 11] = [
    "measure",
    "value_ebits",
    "flag",
    "restarts",
    "converged",
    "best_restart",
    "iterations",
    "residual",
    "spread",
    "size",
    "bracket_upper",
];

/// One row per requested measure.
pub fn compute(
    rho: &DensityMatrix,
    input: &str,
    measures: &[Measure],
    settings: &RunSettings,
) -> Result<Report, CliError> {
    let mut report = Report::new(
        settings.meta(&[("input", input.to_string()), ("dims", format!("{:?}", rho.dims()))]),
        &COMPUTE_COLUMNS,
    );
    let cfg = settings.optimizer.clone().with_seed(settings.seed);
    for &m in measures {
        let e = evaluate(rho, m, &cfg)?;
        let mut row = vec![Cell::text(m.name()), Cell::Num(e.value), Cell::text(e.bound.flag())];
        match &e.diagnostics {
            Some(d) => row.extend([
                Cell::Int(d.restarts as u64),
                Cell::Int(d.converged_restarts as u64),
                Cell::Int(d.best_restart as u64),
                Cell::Int(d.iterations as u64),
                Cell::Num(d.residual),
                Cell::Num(d.spread()),
                Cell::Int(d.size as u64),
            ]),
            None => {
                row.extend([Cell::Empty, Cell::Empty, Cell::Empty]);
                row.push(e.newton_steps.map_or(Cell::Empty, |n| Cell::Int(n as u64)));
                row.extend([Cell::Empty, Cell::Empty, Cell::Empty]);
            }
        }
        row.push(e.upper.map_or(Cell::Empty, Cell::Num));
        report.push(row);
    }
    Ok(report)
}

/// `param` followed by one column per measure. Column guarantees are listed
/// in the metadata.
pub fn sweep(family: Family, grid: &[f64], measures: &[Measure], settings: &RunSettings) -> Result<Report, CliError> {
    if grid.is_empty() {
        return Err(CliError::input("empty grid"));
    }
    let flags: Vec<String> = measures.iter().map(|m| format!("{}={}", m.name(), m.column_flag())).collect();
    let mut columns = vec!["param"];
    columns.extend(measures.iter().map(|m| m.name()));
    let mut report = Report::new(
        settings.meta(&[("family", family.name().to_string()), ("flags", flags.join(" "))]),
        &columns,
    );
    let rows = run_indexed(grid.len(), settings.threads, |i| -> Result<Vec<Cell>, CliError> {
        let p = grid[i as usize];
        let rho = family.state(p, settings.seed)?;
        let cfg = settings.optimizer.clone().with_seed(settings.seed);
        let mut row = vec![Cell::Num(p)];
        for &m in measures {
            row.push(Cell::Num(evaluate(&rho, m, &cfg)?.value));
        }
        Ok(row)
    })?;
    for row in rows {
        report.push(row?);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Ordering,
    #[value(alias = "eq8")]
    Formation,
    #[value(alias = "eq9")]
    Assistance,
    Conjecture,
    Proofchain,
    Infoledger,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Ordering => "ordering",
            Suite::Formation => "formation",
            Suite::Assistance => "assistance",
            Suite::Conjecture => "conjecture",
            Suite::Proofchain => "proofchain",
            Suite::Infoledger => "infoledger",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub n: usize,
    /// Memory maps per state (conjecture) or sampled measurements per state
    /// (ordering).
    pub samples: usize,
    pub side: MemorySide,
    pub coherent: bool,
    pub adversarial: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub summary: Report,
    pub records: Report,
    pub pass: usize,
    pub ties: usize,
    pub investigate: usize,
}

impl VerifyOutcome {
    pub fn exit_code(&self) -> u8 {
        u8::from(self.investigate > 0)
    }
}

/// Memory dimension of decomposition item `index`: 4, 5 or 6.
pub fn decomposition_memory(index: u64) -> usize {
    4 + (index % 3) as usize
}

const LEDGER_TOLERANCE: f64 = 1e-8;

const INEQUALITY_COLUMNS: [&str; 7] = ["id", "lhs", "rhs", "slack", "class", "pass", "note"];

fn inequality_row(r: &InequalityRecord) -> Vec<Cell> {
    vec![
        Cell::text(r.state_id.clone()),
        Cell::Num(r.lhs.value()),
        Cell::Num(r.rhs.value()),
        Cell::Num(r.slack),
        Cell::text(r.class.label()),
        Cell::text(r.pass.to_string()),
        Cell::text(r.note.clone()),
    ]
}

fn class_of(ok: bool) -> SlackClass {
    if ok {
        SlackClass::Pass
    } else {
        SlackClass::Investigate
    }
}

struct Collected {
    records: Report,
    classes: Vec<SlackClass>,
    stats: Option<GapStats>,
}

fn collect_inequalities(records: Vec<InequalityRecord>, meta: Vec<(String, String)>) -> Collected {
    let mut report = Report::new(meta, &INEQUALITY_COLUMNS);
    for r in &records {
        report.push(inequality_row(r));
    }
    Collected {
        records: report,
        classes: records.iter().map(|r| r.class).collect(),
        stats: Some(GapStats::from_records(&records)),
    }
}

fn gather<T: Send>(
    n: usize,
    settings: &RunSettings,
    f: impl Fn(u64) -> entlab_core::Result<T> + Sync + Send,
) -> Result<Vec<T>, CliError> {
    run_indexed(n, settings.threads, f)?
        .into_iter()
        .collect::<entlab_core::Result<Vec<T>>>()
        .map_err(CliError::from)
}

pub fn verify(opts: &VerifyOptions, settings: &RunSettings) -> Result<VerifyOutcome, CliError> {
    if opts.n == 0 {
        return Err(CliError::input("--n must be positive"));
    }
    let side = match opts.side {
        MemorySide::Alice => "alice",
        MemorySide::Bob => "bob",
    };
    let meta = settings.meta(&[
        ("suite", opts.suite.name().to_string()),
        ("n", opts.n.to_string()),
        ("samples", opts.samples.to_string()),
        ("memory_side", side.to_string()),
        ("coherent_maps", opts.coherent.to_string()),
        ("adversarial", opts.adversarial.to_string()),
    ]);
    let seed = settings.seed;
    let collected = match opts.suite {
        Suite::Formation | Suite::Assistance => {
            let formation = opts.suite == Suite::Formation;
            let records = gather(opts.n, settings, |i| {
                let rho = batch_state(seed, i);
                let id = format!("state{i}");
                let cfg = settings.item_config(i);
                if formation {
                    verify_ineq_formation(&rho, &cfg, &id)
                } else {
                    verify_ineq_assistance(&rho, &cfg, &id)
                }
            })?;
            collect_inequalities(records, meta.clone())
        }
        Suite::Conjecture => {
            let reports = gather(opts.n, settings, |i| {
                let eps = batch_decomposition(seed, i, decomposition_memory(i))?;
                let ext = pure_extension(&eps)?;
                let cfg = ConjectureConfig {
                    samples: opts.samples,
                    side: opts.side,
                    adversarial: opts.adversarial,
                    optimizer: settings.item_config(i),
                    seed: item_seed(seed, i),
                    ..ConjectureConfig::default()
                };
                explore_conjecture(&ext, &MapSampler { coherent: opts.coherent }, &cfg)
            })?;
            let records = reports
                .into_iter()
                .enumerate()
                .flat_map(|(i, r)| {
                    r.records.into_iter().map(move |mut rec| {
                        rec.state_id = format!("state{i}/{}", rec.state_id);
                        rec
                    })
                })
                .collect();
            collect_inequalities(records, meta.clone())
        }
        Suite::Ordering => {
            let reports = gather(opts.n, settings, |i| {
                check_ordering(&batch_state(seed, i), &settings.item_config(i), opts.samples)
            })?;
            let mut report = Report::new(
                meta.clone(),
                &["id", "ppt_lower", "ree", "ef", "ea", "sampled_min", "sampled_max", "class", "failures"],
            );
            let mut classes = Vec::new();
            for (i, r) in reports.iter().enumerate() {
                let sampled = r.sampled.iter().map(|e| e.value());
                let class = class_of(r.passed());
                report.push(vec![
                    Cell::text(format!("state{i}")),
                    Cell::Num(r.ppt_lower.value()),
                    Cell::Num(r.ree.value()),
                    Cell::Num(r.formation.value()),
                    Cell::Num(r.assistance.value()),
                    Cell::Num(sampled.clone().fold(f64::INFINITY, f64::min)),
                    Cell::Num(sampled.fold(f64::NEG_INFINITY, f64::max)),
                    Cell::text(class.label()),
                    Cell::text(r.failures.join("; ")),
                ]);
                classes.push(class);
            }
            Collected {
                records: report,
                classes,
                stats: None,
            }
        }
        Suite::Proofchain => {
            let reports = gather(opts.n, settings, |i| {
                proof_chain_check(&batch_decomposition(seed, i, decomposition_memory(i))?)
            })?;
            let mut report = Report::new(
                meta.clone(),
                &[
                    "id",
                    "member_divergence",
                    "entropy",
                    "local_divergence",
                    "holevo",
                    "identity_i",
                    "monotone_ii",
                    "identity_iii",
                    "class",
                ],
            );
            let mut classes = Vec::new();
            for (i, r) in reports.iter().enumerate() {
                let class = class_of(r.holds());
                report.push(vec![
                    Cell::text(format!("pair{i}")),
                    Cell::Num(r.member_divergence),
                    Cell::Num(r.entropy),
                    Cell::Num(r.local_divergence),
                    Cell::Num(r.holevo),
                    Cell::text(r.identity_i.to_string()),
                    Cell::text(r.monotone_ii.to_string()),
                    Cell::text(r.identity_iii.to_string()),
                    Cell::text(class.label()),
                ]);
                classes.push(class);
            }
            Collected {
                records: report,
                classes,
                stats: None,
            }
        }
        Suite::Infoledger => {
            let ledgers = gather(opts.n, settings, |i| {
                info_ledger(&batch_decomposition(seed, i, decomposition_memory(i))?)
            })?;
            let mut report = Report::new(
                meta.clone(),
                &[
                    "id",
                    "i_pure",
                    "i_classical",
                    "i_traced",
                    "entropy",
                    "first_loss_error",
                    "second_loss_error",
                    "pure_error",
                    "class",
                ],
            );
            let mut classes = Vec::new();
            for (i, l) in ledgers.iter().enumerate() {
                let s = l.system_entropy.value();
                let errors = [l.first_loss() - s, l.second_loss() - s, l.pure.value() - 2.0 * s];
                let class = class_of(errors.iter().all(|e| e.abs() <= LEDGER_TOLERANCE));
                let mut row = vec![
                    Cell::text(format!("pair{i}")),
                    Cell::Num(l.pure.value()),
                    Cell::Num(l.classical.value()),
                    Cell::Num(l.traced.value()),
                    Cell::Num(s),
                ];
                row.extend(errors.map(Cell::Num));
                row.push(Cell::text(class.label()));
                report.push(row);
                classes.push(class);
            }
            Collected {
                records: report,
                classes,
                stats: None,
            }
        }
    };
    let count = |c: SlackClass| collected.classes.iter().filter(|&&k| k == c).count();
    let (pass, ties, investigate) = (count(SlackClass::Pass), count(SlackClass::Tie), count(SlackClass::Investigate));
    let mut summary = Report::new(
        meta,
        &[
            "suite",
            "records",
            "pass",
            "tie",
            "investigate",
            "min_slack",
            "mean_slack",
            "max_slack",
            "status",
        ],
    );
    let gap = |f: fn(&GapStats) -> f64| collected.stats.as_ref().map_or(Cell::Empty, |s| Cell::Num(f(s)));
    summary.push(vec![
        Cell::text(opts.suite.name()),
        Cell::Int(collected.classes.len() as u64),
        Cell::Int(pass as u64),
        Cell::Int(ties as u64),
        Cell::Int(investigate as u64),
        gap(|s| s.min),
        gap(|s| s.mean),
        gap(|s| s.max),
        Cell::text(if investigate == 0 { "ok" } else { "investigate" }),
    ]);
    Ok(VerifyOutcome {
        summary,
        records: collected.records,
        pass,
        ties,
        investigate,
    })
}
