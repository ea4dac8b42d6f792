//! Verifications built from the measures: the ordering chain, the
//! formation and assistance inequalities, the memory-map conjecture
//! explorer, the formation budget, the proof-chain identities and the
//! mutual-information ledger.

mod conjecture;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decomp::{
    avg_entanglement, entanglement_of_assistance, entanglement_of_formation, measure_memory_orthogonal,
    random_basis, OptimizerConfig,
};
use crate::error::Result;
use crate::math::shannon_entropy;
use crate::measures::{mutual_information, qrelative_entropy, reduced_entropy, vn_entropy, Ebits};
use crate::ree::{flagged_state, ree};
use crate::states::{gen_random_density_with, pure_extension, purify, Decomposition, DensityMatrix};

pub use conjecture::{
    conjecture_record, explore_conjecture, extension_ree, ConjectureConfig, ConjectureReport, GapStats, MapSampler,
    MemoryMap, MemorySide,
};

/// Slack below which a record is a failure worth inspecting.
pub const SLACK_TOLERANCE: f64 = 1e-4;
/// Tolerance for comparisons between optimized measures.
pub const ORDERING_TOLERANCE: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlackClass {
    Pass,
    /// Negative slack within the numerical tolerance.
    Tie,
    Investigate,
}

impl SlackClass {
    pub fn of(slack: f64) -> Self {
        if slack >= 0.0 {
            SlackClass::Pass
        } else if slack >= -SLACK_TOLERANCE {
            SlackClass::Tie
        } else {
            SlackClass::Investigate
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SlackClass::Pass => "pass",
            SlackClass::Tie => "numerical-tie",
            SlackClass::Investigate => "investigate",
        }
    }
}

/// `lhs ≤ rhs` checked with `slack = rhs − lhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityRecord {
    pub state_id: String,
    pub lhs: Ebits,
    pub rhs: Ebits,
    pub slack: f64,
    pub pass: bool,
    pub class: SlackClass,
    /// Which sides are one-sided numerical estimates.
    pub note: String,
}

impl InequalityRecord {
    pub fn new(state_id: impl Into<String>, lhs: Ebits, rhs: Ebits, note: impl Into<String>) -> Self {
        let slack = if lhs.is_infinite() || rhs.is_infinite() {
            if rhs.is_infinite() {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        } else {
            rhs.value() - lhs.value()
        };
        let class = SlackClass::of(slack);
        Self {
            state_id: state_id.into(),
            lhs,
            rhs,
            slack,
            pass: slack >= -SLACK_TOLERANCE,
            class,
            note: note.into(),
        }
    }
}

/// `S(ρ_B) ≤ E_F(ρ) + S(ρ)`: the REE of the pure extension across `MA : B`
/// against the formation cost plus the entropy.
pub fn verify_ineq_formation(rho: &DensityMatrix, cfg: &OptimizerConfig, state_id: &str) -> Result<InequalityRecord> {
    let lhs = reduced_entropy(rho, &[1])?;
    let ef = entanglement_of_formation(rho, cfg)?;
    let rhs = Ebits::new(ef.value.value() + vn_entropy(rho).value());
    Ok(InequalityRecord::new(state_id, lhs, rhs, format!("rhs uses E_F {}", ef.bound.flag())))
}

/// `E_A(ρ) ≤ E_RE(ρ) + S(ρ)`.
pub fn verify_ineq_assistance(rho: &DensityMatrix, cfg: &OptimizerConfig, state_id: &str) -> Result<InequalityRecord> {
    let ea = entanglement_of_assistance(rho, cfg)?;
    let r = ree(rho, cfg)?;
    let rhs = Ebits::new(r.value.value() + vn_entropy(rho).value());
    Ok(InequalityRecord::new(
        state_id,
        ea.value,
        rhs,
        format!("lhs E_A {}; rhs REE {}", ea.bound.flag(), r.bound.flag()),
    ))
}

/// All measures of one state and the ordering checks between them.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub ppt_lower: Ebits,
    pub ree: Ebits,
    pub formation: Ebits,
    pub assistance: Ebits,
    /// Average entanglement of decompositions from random orthogonal
    /// measurements of a full-dimension purification memory.
    pub sampled: Vec<Ebits>,
    pub failures: Vec<String>,
}

impl OrderingReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Distillable entanglement is bounded, never computed.
    pub fn distillable_note(&self) -> String {
        format!("E_D <= {}", self.ree)
    }
}

/// Checks `ppt_lower ≤ REE ≤ E_F` and `REE ≤ avg(ε) ≤ E_A` on `samples`
/// orthogonally measured decompositions.
pub fn check_ordering(rho: &DensityMatrix, cfg: &OptimizerConfig, samples: usize) -> Result<OrderingReport> {
    let r = ree(rho, cfg)?;
    let ef = entanglement_of_formation(rho, cfg)?.value;
    let ea = entanglement_of_assistance(rho, cfg)?.value;
    let mut failures = Vec::new();
    let tol = ORDERING_TOLERANCE;
    if r.ppt_lower.value() > r.value.value() + 1e-6 {
        failures.push(format!("ppt_lower {} > ree {}", r.ppt_lower, r.value));
    }
    if r.value.value() > ef.value() + tol {
        failures.push(format!("ree {} > E_F {}", r.value, ef));
    }
    if ef.value() > ea.value() + 1e-6 {
        failures.push(format!("E_F {ef} > E_A {ea}"));
    }
    let ext = purify(rho, rho.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6f72_6465);
    let mut sampled = Vec::with_capacity(samples);
    for _ in 0..samples {
        let basis = random_basis(rho.dim(), &mut rng);
        let v = avg_entanglement(&measure_memory_orthogonal(&ext, &basis)?)?;
        if v.value() < r.value.value() - tol {
            failures.push(format!("sampled average {v} < ree {}", r.value));
        }
        if v.value() > ea.value() + tol {
            failures.push(format!("sampled average {v} > E_A {ea}"));
        }
        sampled.push(v);
    }
    Ok(OrderingReport {
        ppt_lower: r.ppt_lower,
        ree: r.value,
        formation: ef,
        assistance: ea,
        sampled,
        failures,
    })
}

/// Entanglement cost of sharing `n` copies, per copy.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetLedger {
    /// Compress and teleport `B` whole: `S(ρ_B)`.
    pub naive: Ebits,
    /// Compress each block of identical members: `Σ p_i S(ρ_B^i)`.
    pub block: Ebits,
    /// Classical description of the memory, `H({p_i})` bits.
    pub classical_bits: f64,
    /// Whether the memory is teleported instead of sent classically.
    pub teleport_memory: bool,
}

impl BudgetLedger {
    /// `S(ρ_B) − Σ p_i S(ρ_B^i)`.
    pub fn concavity_gap(&self) -> f64 {
        self.naive.value() - self.block.value()
    }

    /// Entanglement consumed by the block strategy, with `H({p_i})` extra
    /// ebits when the memory is teleported.
    pub fn block_entanglement(&self) -> f64 {
        self.block.value() + if self.teleport_memory { self.classical_bits } else { 0.0 }
    }
}

pub fn formation_budget(eps: &Decomposition) -> Result<BudgetLedger> {
    let block = avg_entanglement(eps)?;
    let naive = reduced_entropy(eps.target(), &[1])?;
    if block.value() > naive.value() + 1e-8 {
        return Err(crate::Error::validation(
            crate::Invariant::Reconstruction,
            block.value() - naive.value(),
        ));
    }
    Ok(BudgetLedger {
        naive,
        block,
        classical_bits: shannon_entropy(&eps.weights()),
        teleport_memory: false,
    })
}

/// The three steps behind the formation inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofChainReport {
    /// `Σ p_i S(ψ^i‖ρ)`.
    pub member_divergence: f64,
    /// `S(ρ)`.
    pub entropy: f64,
    /// `Σ p_i S(ρ_B^i‖ρ_B)`.
    pub local_divergence: f64,
    /// `S(ρ_B) − Σ p_i S(ρ_B^i)`.
    pub holevo: f64,
    pub identity_i: bool,
    pub monotone_ii: bool,
    pub identity_iii: bool,
}

impl ProofChainReport {
    pub fn holds(&self) -> bool {
        self.identity_i && self.monotone_ii && self.identity_iii
    }
}

pub fn proof_chain_check(eps: &Decomposition) -> Result<ProofChainReport> {
    let rho = eps.target();
    let rho_b = rho.reduce(&[1])?;
    let members = eps.pure_members("proof_chain_check")?;
    let mut member_divergence = 0.0;
    let mut local_divergence = 0.0;
    let mut avg = 0.0;
    for (p, psi) in &members {
        member_divergence += p * qrelative_entropy(&psi.density(), rho)?.value();
        let b = psi.reduced(1)?;
        local_divergence += p * qrelative_entropy(&b, &rho_b)?.value();
        avg += p * vn_entropy(&b).value();
    }
    let entropy = vn_entropy(rho).value();
    let holevo = vn_entropy(&rho_b).value() - avg;
    let tol = 1e-8;
    Ok(ProofChainReport {
        member_divergence,
        entropy,
        local_divergence,
        holevo,
        identity_i: (member_divergence - entropy).abs() <= tol,
        monotone_ii: local_divergence <= member_divergence + tol,
        identity_iii: (local_divergence - holevo).abs() <= tol,
    })
}

/// Mutual information between memory and system at each stage.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoLedger {
    pub pure: Ebits,
    pub classical: Ebits,
    pub traced: Ebits,
    pub system_entropy: Ebits,
}

impl InfoLedger {
    /// Loss from decohering the memory.
    pub fn first_loss(&self) -> f64 {
        self.pure.value() - self.classical.value()
    }

    /// Loss from discarding the memory.
    pub fn second_loss(&self) -> f64 {
        self.classical.value() - self.traced.value()
    }
}

pub fn info_ledger(eps: &Decomposition) -> Result<InfoLedger> {
    let pure = mutual_information(&pure_extension(eps)?.density())?;
    let classical = mutual_information(&flagged_state(eps)?)?;
    let rho = eps.target();
    let mut dims = alloc::vec![1];
    dims.extend_from_slice(rho.dims());
    let traced = mutual_information(&DensityMatrix::from_trusted(rho.matrix().clone(), &dims))?;
    Ok(InfoLedger {
        pure,
        classical,
        traced,
        system_entropy: vn_entropy(rho),
    })
}

/// Seed of batch item `index`: the first output of the ChaCha stream
/// `index + 1` under the base seed.
pub fn item_seed(base: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(index + 1);
    rng.next_u64()
}

/// Batch state `index`: a Hilbert–Schmidt-style random 2⊗2 state whose rank
/// is uniform on 1–4.
pub fn batch_state(base: u64, index: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(item_seed(base, index));
    let rank = rng.random_range(1..=4);
    gen_random_density_with(&[2, 2], rank, &mut rng).expect("valid dims")
}

/// Random pure-member decomposition of a batch state, reached by a Haar
/// mixer on a memory of dimension `memory`.
pub fn batch_decomposition(base: u64, index: u64, memory: usize) -> Result<Decomposition> {
    let rho = batch_state(base, index);
    let mut rng = ChaCha8Rng::seed_from_u64(item_seed(base ^ 0x6465_636f, index));
    let ext = purify(&rho, memory.max(rho.rank()))?;
    crate::decomp::remix(&ext, &crate::decomp::UnitaryMixer::haar(ext.memory_dim(), &mut rng))
}
