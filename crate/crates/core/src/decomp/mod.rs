//! Decompositions reached by acting on the memory of a purification:
//! unitary remixing, orthogonal and generalized measurements, and the
//! min/max of the average member entanglement over them.

mod manifold;

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Invariant, Result};
use crate::math::{exp, sqrt};
use crate::measures::{vn_entropy, Ebits};
use crate::qmat::{
    complex_gaussian, expm_antihermitian, haar_unitary, herm_eig_unchecked, isometry_residual, kron,
    ComplexMatrix, C64, ZERO,
};
use crate::report::{Bound, Diagnostics};
use crate::states::{Decomposition, DensityMatrix, Member, MemoryExtendedState, PureState};
use crate::tol::Tolerances;


/// Largest decomposition size the optimizers accept.
pub const MAX_DECOMPOSITION_SIZE: usize = 64;
/// Cap applied to the default size `rank²`.
pub const DEFAULT_SIZE_CAP: usize = 16;

/// A `k × k` unitary acting on the memory, optionally remembering the `k²`
/// real generator parameters it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMixer {
    params: Option<Vec<f64>>,
    unitary: ComplexMatrix,
}

impl UnitaryMixer {
    /// `U = exp(G)` with `G` anti-Hermitian: the first `k` parameters are the
    /// diagonal phases `G_jj = iθ_j`, then each pair `j < l` contributes
    /// `G_jl = a + ib`, `G_lj = −a + ib`.
    pub fn from_generator(k: usize, params: &[f64]) -> Result<Self> {
        let unitary = expm_antihermitian(&generator(k, params)?);
        Ok(Self {
            params: Some(params.to_vec()),
            unitary,
        })
    }

    pub fn from_unitary(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::Dimension(format!("mixer must be square, got {}x{}", u.rows(), u.cols())));
        }
        let resid = isometry_residual(&u);
        if resid > Tolerances::DEFAULT.structural {
            return Err(Error::validation(Invariant::Unitarity, resid));
        }
        Ok(Self {
            params: None,
            unitary: u,
        })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            params: Some(alloc::vec![0.0; k * k]),
            unitary: ComplexMatrix::identity(k),
        }
    }

    pub fn haar<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        Self {
            params: None,
            unitary: haar_unitary(k, rng),
        }
    }

    /// `U|j⟩ = e^{iφ_j} |perm[j]⟩`.
    pub fn permutation_with_phases(perm: &[usize], phases: &[f64]) -> Result<Self> {
        let k = perm.len();
        let mut u = ComplexMatrix::zeros(k, k);
        for (j, &p) in perm.iter().enumerate() {
            if p >= k {
                return Err(Error::Parameter(format!("permutation entry {p} out of range")));
            }
            u[(p, j)] = crate::math::cis(phases.get(j).copied().unwrap_or(0.0));
        }
        Self::from_unitary(u)
    }

    pub fn size(&self) -> usize {
        self.unitary.rows()
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn params(&self) -> Option<&[f64]> {
        self.params.as_deref()
    }
}

fn generator(k: usize, params: &[f64]) -> Result<ComplexMatrix> {
    if params.len() != k * k {
        return Err(Error::Dimension(format!("{} generator parameters for k = {k}", params.len())));
    }
    let mut g = ComplexMatrix::zeros(k, k);
    for j in 0..k {
        g[(j, j)] = C64::new(0.0, params[j]);
    }
    let mut idx = k;
    for j in 0..k {
        for l in j + 1..k {
            let (a, b) = (params[idx], params[idx + 1]);
            g[(j, l)] = C64::new(a, b);
            g[(l, j)] = C64::new(-a, b);
            idx += 2;
        }
    }
    Ok(g)
}

/// Generalized measurement on the memory given by Kraus operators `A_i`
/// with `Σ A_i† A_i = I`; the effects are `E_i = A_i† A_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryPOVM {
    elements: Vec<ComplexMatrix>,
}

impl MemoryPOVM {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::validation(Invariant::Completeness, 0.0));
        };
        let d = first.rows();
        if elements.iter().any(|a| a.rows() != d || a.cols() != d) {
            return Err(Error::Dimension("POVM elements must share one square shape".into()));
        }
        let mut sum = ComplexMatrix::zeros(d, d);
        for a in &elements {
            sum = &sum + &(&a.adjoint() * a);
        }
        let resid = (&sum - &ComplexMatrix::identity(d)).frobenius_norm();
        if resid > Tolerances::DEFAULT.structural {
            return Err(Error::validation(Invariant::Completeness, resid));
        }
        Ok(Self { elements })
    }

    /// Rank-one projectors onto an orthonormal basis.
    pub fn projective(basis: &[Vec<C64>]) -> Result<Self> {
        check_orthonormal_basis(basis)?;
        Self::new(basis.iter().map(|b| ComplexMatrix::projector(b)).collect())
    }

    /// Effects `(1 − η) Π_i + η I/d` over an orthonormal basis: `η = 0` is the
    /// projective measurement, `η = 1` carries no information.
    pub fn depolarized(basis: &[Vec<C64>], eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Parameter(format!("depolarizing weight {eta} outside [0, 1]")));
        }
        check_orthonormal_basis(basis)?;
        let d = basis.len();
        let on = sqrt(1.0 - eta + eta / d as f64);
        let off = sqrt(eta / d as f64);
        let id = ComplexMatrix::identity(d);
        let elements = basis
            .iter()
            .map(|b| {
                let p = ComplexMatrix::projector(b);
                &p.scale(on) + &(&id - &p).scale(off)
            })
            .collect();
        Self::new(elements)
    }

    /// The single-outcome measurement `{I}`.
    pub fn trivial(d: usize) -> Self {
        Self {
            elements: alloc::vec![ComplexMatrix::identity(d)],
        }
    }

    /// Random `outcomes`-element POVM: Ginibre operators `G_i` whitened by
    /// `(Σ G_i†G_i)^{-1/2}`.
    pub fn random<R: Rng + ?Sized>(d: usize, outcomes: usize, rng: &mut R) -> Result<Self> {
        if outcomes == 0 {
            return Err(Error::Parameter("a POVM needs at least one outcome".into()));
        }
        let gs: Vec<ComplexMatrix> = (0..outcomes).map(|_| ComplexMatrix::ginibre(d, d, rng)).collect();
        let mut s = ComplexMatrix::zeros(d, d);
        for g in &gs {
            s = &s + &(&g.adjoint() * g);
        }
        let inv_root = herm_eig_unchecked(&s).map(|l| 1.0 / sqrt(l));
        Self::new(gs.iter().map(|g| g * &inv_root).collect())
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }
}

fn check_orthonormal_basis(basis: &[Vec<C64>]) -> Result<()> {
    if basis.is_empty() || basis.iter().any(|b| b.len() != basis.len()) {
        return Err(Error::Dimension(format!(
            "a memory basis needs d vectors of length d, got {}",
            basis.len()
        )));
    }
    let resid = isometry_residual(&ComplexMatrix::from_columns(basis));
    if resid > Tolerances::DEFAULT.structural {
        return Err(Error::validation(Invariant::Orthonormality, resid));
    }
    Ok(())
}

/// Random orthonormal basis of `C^d` (columns of a Haar unitary).
pub fn random_basis<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Vec<C64>> {
    let u = haar_unitary(d, rng);
    (0..d).map(|j| u.column(j)).collect()
}

/// Multi-start optimizer settings shared by the decomposition and REE
/// searches.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Decomposition size `k`; `None` means `min(rank², 16)`.
    pub size_cap: Option<usize>,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            size_cap: None,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_size(mut self, k: usize) -> Self {
        self.size_cap = Some(k);
        self
    }

    pub(crate) fn check_counts(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::Parameter("restarts and iteration limits must be positive".into()));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::Parameter("gradient tolerance must be positive".into()));
        }
        Ok(())
    }

    /// The decomposition size for a state of the given rank.
    pub fn decomposition_size(&self, rank: usize) -> Result<usize> {
        self.check_counts()?;
        let k = self
            .size_cap
            .unwrap_or_else(|| (rank * rank).min(DEFAULT_SIZE_CAP).max(rank));
        if k < rank {
            return Err(Error::Parameter(format!("decomposition size {k} is below the rank {rank}")));
        }
        if k > MAX_DECOMPOSITION_SIZE {
            return Err(Error::Parameter(format!(
                "decomposition size {k} exceeds {MAX_DECOMPOSITION_SIZE}"
            )));
        }
        Ok(k)
    }
}

/// Which extreme of the average entanglement a report carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Formation,
    Assistance,
}

/// Optimized average entanglement with its witness decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub extremum: Extremum,
    pub value: Ebits,
    pub bound: Bound,
    pub witness: Decomposition,
    /// The memory unitary that produces `witness` from the eigendecomposition
    /// purification.
    pub mixer: UnitaryMixer,
    pub diagnostics: Diagnostics,
}

fn split_blocks(psi: &PureState, dm: usize) -> Vec<&[C64]> {
    let n = psi.amplitudes().len() / dm;
    psi.amplitudes().chunks(n).collect()
}

fn members_from_rows(rows: Vec<Vec<C64>>, dims: &[usize], target: DensityMatrix) -> Result<Decomposition> {
    let cutoff = Tolerances::DEFAULT.eig_cutoff;
    let mut members: Vec<(f64, PureState)> = Vec::new();
    for row in rows {
        let q: f64 = row.iter().map(|z| z.norm_sqr()).sum();
        if q < cutoff {
            continue;
        }
        members.push((q, PureState::normalized(row, dims)?));
    }
    let total: f64 = members.iter().map(|(w, _)| w).sum();
    Decomposition::new(
        members.into_iter().map(|(w, p)| (w / total, Member::Pure(p))).collect(),
        target,
    )
}

/// Applies `U ⊗ I` to the memory of a pure extension and reads off the
/// induced decomposition of `ρ_AB`: member `j` is `Σ_m U_jm ⟨m|ψ⟩`, with
/// zero-weight members dropped.
pub fn remix(psi_mab: &MemoryExtendedState, mixer: &UnitaryMixer) -> Result<Decomposition> {
    let psi = psi_mab
        .pure_state()
        .ok_or_else(|| Error::Parameter("remix needs a pure memory extension".into()))?;
    let [dm, da, db] = psi_mab.dims();
    if mixer.size() != dm {
        return Err(Error::Dimension(format!("mixer size {} for memory dimension {dm}", mixer.size())));
    }
    let blocks = split_blocks(psi, dm);
    let u = mixer.unitary();
    let n = da * db;
    let rows = (0..dm)
        .map(|j| {
            let mut v = alloc::vec![ZERO; n];
            for (m, block) in blocks.iter().enumerate() {
                let c = u[(j, m)];
                if c == ZERO {
                    continue;
                }
                for (x, y) in v.iter_mut().zip(block.iter()) {
                    *x += c * y;
                }
            }
            v
        })
        .collect();
    members_from_rows(rows, &[da, db], psi_mab.system())
}

/// Projective measurement of the memory in the orthonormal basis `{|n_j⟩}`:
/// member `j` is `(⟨n_j| ⊗ I)|ψ⟩` with weight `‖(⟨n_j| ⊗ I)|ψ⟩‖²`.
pub fn measure_memory_orthogonal(psi_mab: &MemoryExtendedState, basis: &[Vec<C64>]) -> Result<Decomposition> {
    if basis.len() != psi_mab.memory_dim() {
        return Err(Error::Dimension(format!(
            "{} basis vectors for memory dimension {}",
            basis.len(),
            psi_mab.memory_dim()
        )));
    }
    check_orthonormal_basis(basis)?;
    let dm = basis.len();
    let u = ComplexMatrix::from_fn(dm, dm, |j, m| basis[j][m].conj());
    remix(psi_mab, &UnitaryMixer { params: None, unitary: u })
}

/// Generalized measurement on the memory: outcome `i` occurs with
/// `q_i = Tr(A_i ρ A_i†)` and leaves `Tr_M(A_i ρ A_i†)/q_i` on AB.
pub fn measure_memory_povm(rho_mab: &MemoryExtendedState, povm: &MemoryPOVM) -> Result<Decomposition> {
    let [dm, da, db] = rho_mab.dims();
    if povm.dim() != dm {
        return Err(Error::Dimension(format!("POVM on dimension {} for memory {dm}", povm.dim())));
    }
    let rho = rho_mab.density();
    let id = ComplexMatrix::identity(da * db);
    let cutoff = Tolerances::DEFAULT.eig_cutoff;
    let mut members = Vec::new();
    for a in povm.elements() {
        let big = kron(a, &id);
        let post = &(&big * rho.matrix()) * &big.adjoint();
        let q = post.trace().re;
        if q < cutoff {
            continue;
        }
        let reduced = crate::qmat::partial_trace(&post, &[dm, da, db], &[1, 2])?;
        members.push((q, DensityMatrix::from_trusted(reduced, &[da, db])));
    }
    let total: f64 = members.iter().map(|(w, _)| w).sum();
    Decomposition::new(
        members.into_iter().map(|(w, r)| (w / total, Member::Mixed(r))).collect(),
        rho_mab.system(),
    )
}

/// `Σ_i p_i S(ρ_B^i)` over pure members.
pub fn avg_entanglement(eps: &Decomposition) -> Result<Ebits> {
    let members = eps.pure_members("avg_entanglement")?;
    let mut acc = 0.0;
    for (w, psi) in members {
        acc += w * vn_entropy(&psi.reduced(1)?).value();
    }
    Ok(Ebits::new(acc))
}

/// Entanglement of formation as the minimum average entanglement over the
/// decompositions reachable by `k × k` memory unitaries. The value is an
/// upper bound on the exact minimum.
pub fn entanglement_of_formation(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<MeasureReport> {
    manifold::optimize(rho, cfg, Extremum::Formation)
}

/// Entanglement of assistance as the maximum of the same objective; a lower
/// bound on the exact maximum.
pub fn entanglement_of_assistance(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<MeasureReport> {
    manifold::optimize(rho, cfg, Extremum::Assistance)
}

/// Softmax weights; exposed for the ansatz code.
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|&x| exp(x - max)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

pub(crate) fn random_complex_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}
