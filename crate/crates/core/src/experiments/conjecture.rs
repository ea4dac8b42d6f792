//! Sampling memory channels `ρ_MAB → χ_MAB` and recording
//! `E_RE(ρ) ≤ E_RE(χ) + I(M:AB)_ρ − I(M:AB)_χ` for each.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{InequalityRecord, SlackClass};
use crate::decomp::{random_basis, MemoryPOVM, OptimizerConfig};
use crate::error::{Error, Result};
use crate::measures::{mutual_information, reduced_entropy, Ebits};
use crate::qmat::{expm_antihermitian, kron, partial_trace, ComplexMatrix, C64};
use crate::ree::ree;
use crate::report::Bound;
use crate::states::{DensityMatrix, MemoryExtendedState};

/// Which party holds the memory: `Alice` evaluates the `MA : B` cut, `Bob`
/// the `A : BM` cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemorySide {
    Alice,
    Bob,
}

/// Trace-preserving maps acting on the memory alone.
#[derive(Debug, Clone, PartialEq)]
pub enum MemoryMap {
    Identity,
    /// Complete dephasing in an orthonormal basis.
    Dephase(Vec<Vec<C64>>),
    /// Measure with a POVM and keep the outcome as a classical record.
    MeasureRecord(MemoryPOVM),
    /// `(1 − γ) id + γ · dephasing` in a basis; keeps memory coherences.
    PartialDephase { basis: Vec<Vec<C64>>, gamma: f64 },
    TraceOut,
}

impl MemoryMap {
    pub fn name(&self) -> &'static str {
        match self {
            MemoryMap::Identity => "identity",
            MemoryMap::Dephase(_) => "dephase",
            MemoryMap::MeasureRecord(_) => "measure-record",
            MemoryMap::PartialDephase { .. } => "partial-dephase",
            MemoryMap::TraceOut => "trace-out",
        }
    }

    /// Applies the map to a state with dims `[d_M, d_A, d_B]`. Basis maps
    /// return the state expressed in the dephasing basis, a local unitary
    /// change on the memory.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let [dm, da, db] = tri_dims(rho)?;
        let n = da * db;
        match self {
            MemoryMap::Identity => Ok(rho.clone()),
            MemoryMap::TraceOut => {
                let sys = partial_trace(rho.matrix(), &[dm, da, db], &[1, 2])?;
                Ok(DensityMatrix::from_trusted(sys, &[1, da, db]))
            }
            MemoryMap::Dephase(basis) => {
                let rotated = rotate_memory(rho, basis)?;
                Ok(DensityMatrix::from_trusted(block_diagonal(rotated.matrix(), dm, n), &[dm, da, db]))
            }
            MemoryMap::PartialDephase { basis, gamma } => {
                if !(0.0..=1.0).contains(gamma) {
                    return Err(Error::Parameter(format!("dephasing strength {gamma} outside [0, 1]")));
                }
                let rotated = rotate_memory(rho, basis)?;
                let diag = block_diagonal(rotated.matrix(), dm, n);
                let m = &rotated.matrix().scale(1.0 - gamma) + &diag.scale(*gamma);
                Ok(DensityMatrix::from_trusted(m, &[dm, da, db]))
            }
            MemoryMap::MeasureRecord(povm) => {
                if povm.dim() != dm {
                    return Err(Error::Dimension(format!("POVM on {} for memory {dm}", povm.dim())));
                }
                let k = povm.elements().len();
                let id = ComplexMatrix::identity(n);
                let mut out = ComplexMatrix::zeros(k * n, k * n);
                for (i, a) in povm.elements().iter().enumerate() {
                    let big = kron(a, &id);
                    let post = &(&big * rho.matrix()) * &big.adjoint();
                    let block = partial_trace(&post, &[dm, da, db], &[1, 2])?;
                    for r in 0..n {
                        for c in 0..n {
                            out[(i * n + r, i * n + c)] = block[(r, c)];
                        }
                    }
                }
                Ok(DensityMatrix::from_trusted(out, &[k, da, db]))
            }
        }
    }

    fn perturbed(&self, u: &ComplexMatrix) -> Option<MemoryMap> {
        let rotate = |basis: &Vec<Vec<C64>>| basis.iter().map(|b| u.apply(b)).collect::<Vec<_>>();
        match self {
            MemoryMap::Dephase(b) => Some(MemoryMap::Dephase(rotate(b))),
            MemoryMap::PartialDephase { basis, gamma } => Some(MemoryMap::PartialDephase {
                basis: rotate(basis),
                gamma: *gamma,
            }),
            MemoryMap::MeasureRecord(p) => {
                let ua = u.adjoint();
                MemoryPOVM::new(p.elements().iter().map(|a| a * &ua).collect())
                    .ok()
                    .map(MemoryMap::MeasureRecord)
            }
            _ => None,
        }
    }
}

fn tri_dims(rho: &DensityMatrix) -> Result<[usize; 3]> {
    match rho.dims() {
        &[m, a, b] => Ok([m, a, b]),
        d => Err(Error::Dimension(format!("expected dims [d_M, d_A, d_B], got {d:?}"))),
    }
}

fn rotate_memory(rho: &DensityMatrix, basis: &[Vec<C64>]) -> Result<DensityMatrix> {
    let [dm, da, db] = tri_dims(rho)?;
    if basis.len() != dm || basis.iter().any(|b| b.len() != dm) {
        return Err(Error::Dimension(format!("basis of {} vectors for memory {dm}", basis.len())));
    }
    // Rejects non-orthonormal input before rotating.
    MemoryPOVM::projective(basis)?;
    let u = ComplexMatrix::from_fn(dm, dm, |j, m| basis[j][m].conj());
    Ok(rho.conjugate_by(&kron(&u, &ComplexMatrix::identity(da * db))))
}

fn block_diagonal(m: &ComplexMatrix, blocks: usize, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(blocks * n, blocks * n, |r, c| if r / n == c / n { m[(r, c)] } else { C64::new(0.0, 0.0) })
}

fn off_block_norm(m: &ComplexMatrix, blocks: usize, n: usize) -> f64 {
    let mut acc = 0.0;
    for r in 0..blocks * n {
        for c in 0..blocks * n {
            if r / n != c / n {
                acc += m[(r, c)].norm_sqr();
            }
        }
    }
    crate::math::sqrt(acc)
}

/// `(M, A, B) → (A, M, B)` reordering.
fn swap_memory_and_a(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let [dm, da, db] = tri_dims(rho)?;
    let idx = |m: usize, a: usize, b: usize| (m * da + a) * db + b;
    let jdx = |a: usize, m: usize, b: usize| (a * dm + m) * db + b;
    let d = dm * da * db;
    let mut out = ComplexMatrix::zeros(d, d);
    for m in 0..dm {
        for a in 0..da {
            for b in 0..db {
                for m2 in 0..dm {
                    for a2 in 0..da {
                        for b2 in 0..db {
                            out[(jdx(a, m, b), jdx(a2, m2, b2))] = rho.matrix()[(idx(m, a, b), idx(m2, a2, b2))];
                        }
                    }
                }
            }
        }
    }
    Ok(DensityMatrix::from_trusted(out, &[da, dm, db]))
}

/// REE of a memory-extended state across the cut chosen by `side`.
///
/// States classical on the memory use additivity over the flagged blocks
/// (each block a pure closed form or a two-party REE); pure states use the
/// reduced entropy; anything else is optimized over the regrouped cut.
pub fn extension_ree(rho: &DensityMatrix, side: MemorySide, cfg: &OptimizerConfig) -> Result<(Ebits, Bound)> {
    let [dm, da, db] = tri_dims(rho)?;
    let n = da * db;
    let cutoff = crate::tol::Tolerances::DEFAULT.eig_cutoff;
    if off_block_norm(rho.matrix(), dm, n) <= cutoff {
        let mut total = 0.0;
        let mut exact = true;
        for i in 0..dm {
            let block = ComplexMatrix::from_fn(n, n, |r, c| rho.matrix()[(i * n + r, i * n + c)]);
            let q = block.trace().re;
            if q < 1e-14 {
                continue;
            }
            let sigma = DensityMatrix::from_trusted(block.scale(1.0 / q), &[da, db]);
            let e = if sigma.rank() <= 1 {
                reduced_entropy(&sigma, &[1])?.value()
            } else {
                exact = false;
                ree(&sigma, cfg)?.value.value()
            };
            total += q * e;
        }
        let bound = if exact { Bound::Exact } else { Bound::UpperBoundOfMin };
        return Ok((Ebits::new(total), bound));
    }
    if rho.rank() <= 1 {
        let keep = match side {
            MemorySide::Alice => 2,
            MemorySide::Bob => 1,
        };
        return Ok((reduced_entropy(rho, &[keep])?, Bound::Exact));
    }
    let bipartite = match side {
        MemorySide::Alice => rho.regroup(&[dm * da, db])?,
        MemorySide::Bob => swap_memory_and_a(rho)?.regroup(&[da, dm * db])?,
    };
    Ok((ree(&bipartite, cfg)?.value, Bound::UpperBoundOfMin))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureConfig {
    pub samples: usize,
    pub side: MemorySide,
    /// Refine the worst sampled map by random local search.
    pub adversarial: bool,
    pub adversarial_steps: usize,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
}

impl Default for ConjectureConfig {
    fn default() -> Self {
        Self {
            samples: 16,
            side: MemorySide::Bob,
            adversarial: false,
            adversarial_steps: 24,
            optimizer: OptimizerConfig::default().with_restarts(8),
            seed: 0,
        }
    }
}

/// Draws memory maps: random-basis dephasing, depolarized-projector records
/// (partial decoherence), random POVM records, and trace-out; coherent
/// partial dephasing only when enabled.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapSampler {
    pub coherent: bool,
}

impl MapSampler {
    pub fn draw<R: Rng + ?Sized>(&self, dm: usize, rng: &mut R) -> Result<MemoryMap> {
        let families = if self.coherent { 5 } else { 4 };
        Ok(match rng.random_range(0..families) {
            0 => MemoryMap::Dephase(random_basis(dm, rng)),
            1 => {
                let eta = rng.random::<f64>();
                MemoryMap::MeasureRecord(MemoryPOVM::depolarized(&random_basis(dm, rng), eta)?)
            }
            2 => {
                let outcomes = rng.random_range(2..=dm + 2);
                MemoryMap::MeasureRecord(MemoryPOVM::random(dm, outcomes, rng)?)
            }
            3 => MemoryMap::TraceOut,
            _ => MemoryMap::PartialDephase {
                basis: random_basis(dm, rng),
                gamma: rng.random::<f64>(),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapStats {
    pub count: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub ties: usize,
    /// Records below the tolerance, left for manual review.
    pub flagged: usize,
}

impl GapStats {
    pub fn from_records(records: &[InequalityRecord]) -> Self {
        let count = records.len();
        let slacks = records.iter().map(|r| r.slack);
        Self {
            count,
            min: slacks.clone().fold(f64::INFINITY, f64::min),
            mean: if count == 0 { 0.0 } else { slacks.clone().sum::<f64>() / count as f64 },
            max: slacks.fold(f64::NEG_INFINITY, f64::max),
            ties: records.iter().filter(|r| r.class == SlackClass::Tie).count(),
            flagged: records.iter().filter(|r| r.class == SlackClass::Investigate).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureReport {
    pub records: Vec<InequalityRecord>,
    pub stats: GapStats,
}

struct Lhs {
    value: (Ebits, Bound),
    info: f64,
}

fn lhs_of(rho: &DensityMatrix, cfg: &ConjectureConfig) -> Result<Lhs> {
    Ok(Lhs {
        value: extension_ree(rho, cfg.side, &cfg.optimizer)?,
        info: mutual_information(rho)?.value(),
    })
}

fn record_with(rho: &DensityMatrix, lhs: &Lhs, map: &MemoryMap, cfg: &ConjectureConfig, id: String) -> Result<InequalityRecord> {
    let chi = map.apply(rho)?;
    let (e_chi, b_chi) = extension_ree(&chi, cfg.side, &cfg.optimizer)?;
    let rhs = Ebits::new(e_chi.value() + (lhs.info - mutual_information(&chi)?.value()));
    let note = format!("{}; lhs {}; rhs {}", map.name(), lhs.value.1.flag(), b_chi.flag());
    Ok(InequalityRecord::new(id, lhs.value.0, rhs, note))
}

/// One record for a single map applied to the extension `rho` (dims
/// `[d_M, d_A, d_B]`).
pub fn conjecture_record(rho: &DensityMatrix, map: &MemoryMap, cfg: &ConjectureConfig) -> Result<InequalityRecord> {
    let lhs = lhs_of(rho, cfg)?;
    record_with(rho, &lhs, map, cfg, String::from(map.name()))
}

/// Samples `cfg.samples` maps on the memory of `ext` and records the gap of
/// each. Negative slacks are flagged, never labelled as violations.
pub fn explore_conjecture(ext: &MemoryExtendedState, sampler: &MapSampler, cfg: &ConjectureConfig) -> Result<ConjectureReport> {
    let rho = ext.density();
    let dm = ext.memory_dim();
    let lhs = lhs_of(&rho, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x636f_6e6a);
    let mut records = Vec::with_capacity(cfg.samples);
    let mut maps = Vec::with_capacity(cfg.samples);
    for s in 0..cfg.samples {
        let map = sampler.draw(dm, &mut rng)?;
        records.push(record_with(&rho, &lhs, &map, cfg, format!("map{s}:{}", map.name()))?);
        maps.push(map);
    }
    if cfg.adversarial {
        let worst = (0..records.len())
            .filter(|&i| maps[i].perturbed(&ComplexMatrix::identity(dm)).is_some())
            .min_by(|&i, &j| records[i].slack.total_cmp(&records[j].slack));
        if let Some(i) = worst {
            let mut current = maps[i].clone();
            let mut best = records[i].slack;
            let mut scale = 0.3;
            for step in 0..cfg.adversarial_steps {
                let g = ComplexMatrix::ginibre(dm, dm, &mut rng);
                let u = expm_antihermitian(&(&g - &g.adjoint()).scale(0.5 * scale));
                let Some(candidate) = current.perturbed(&u) else { break };
                let rec = record_with(&rho, &lhs, &candidate, cfg, format!("search{step}:{}", candidate.name()))?;
                if rec.slack < best {
                    best = rec.slack;
                    current = candidate;
                    records.push(rec);
                } else {
                    scale *= 0.8;
                }
            }
        }
    }
    let stats = GapStats::from_records(&records);
    Ok(ConjectureReport { records, stats })
}
