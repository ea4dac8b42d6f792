//! Extensions of a bipartite state by a memory register `M`, ordered
//! `M ⊗ A ⊗ B`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{Decomposition, DensityMatrix, PureState};
use crate::error::{Error, Invariant, Result};
use crate::math::sqrt;
use crate::qmat::{kron, ComplexMatrix, C64, ZERO};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryKind {
    /// `|ψ_MAB⟩ = Σ √p_i |m_i⟩|ψ_i⟩`.
    Pure,
    /// `Σ p_i |m_i⟩⟨m_i| ⊗ ρ_i`, block-diagonal in the memory basis.
    Classical,
}

#[derive(Debug, Clone, PartialEq)]
enum Payload {
    Pure(PureState),
    Classical(DensityMatrix),
}

/// Tripartite state over memory, A and B.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryExtendedState {
    dims: [usize; 3],
    payload: Payload,
}

impl MemoryExtendedState {
    pub fn from_pure(psi: PureState) -> Result<Self> {
        let dims = tripartite(psi.dims())?;
        Ok(Self {
            dims,
            payload: Payload::Pure(psi),
        })
    }

    /// Accepts a tripartite density matrix only if it is block-diagonal in
    /// the computational memory basis.
    pub fn from_classical(rho: DensityMatrix) -> Result<Self> {
        let dims = tripartite(rho.dims())?;
        let off = off_block_norm(rho.matrix(), dims[0]);
        if off > Tolerances::DEFAULT.structural {
            return Err(Error::validation(Invariant::BlockDiagonal, off));
        }
        Ok(Self {
            dims,
            payload: Payload::Classical(rho),
        })
    }

    pub fn kind(&self) -> MemoryKind {
        match self.payload {
            Payload::Pure(_) => MemoryKind::Pure,
            Payload::Classical(_) => MemoryKind::Classical,
        }
    }

    /// `[d_M, d_A, d_B]`.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn memory_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn pure_state(&self) -> Option<&PureState> {
        match &self.payload {
            Payload::Pure(p) => Some(p),
            Payload::Classical(_) => None,
        }
    }

    /// The full tripartite density matrix.
    pub fn density(&self) -> DensityMatrix {
        match &self.payload {
            Payload::Pure(p) => p.density(),
            Payload::Classical(r) => r.clone(),
        }
    }

    /// `Tr_M`, the bipartite state on A ⊗ B.
    pub fn system(&self) -> DensityMatrix {
        self.density().reduce(&[1, 2]).expect("tripartite dims")
    }

    pub fn memory_marginal(&self) -> DensityMatrix {
        self.density().reduce(&[0]).expect("tripartite dims")
    }

    /// Blocks `⟨m_i|ρ|m_i⟩` with their weights, for classical extensions.
    pub fn memory_blocks(&self) -> Option<Vec<(f64, DensityMatrix)>> {
        let Payload::Classical(rho) = &self.payload else {
            return None;
        };
        let n = self.dims[1] * self.dims[2];
        let m = rho.matrix();
        let mut out = Vec::new();
        for i in 0..self.dims[0] {
            let block = ComplexMatrix::from_fn(n, n, |r, c| m[(i * n + r, i * n + c)]);
            let w = block.trace().re;
            if w > Tolerances::DEFAULT.eig_cutoff {
                out.push((w, DensityMatrix::from_trusted(block, &self.dims[1..])));
            }
        }
        Some(out)
    }
}

fn tripartite(dims: &[usize]) -> Result<[usize; 3]> {
    match dims {
        &[m, a, b] => Ok([m, a, b]),
        _ => Err(Error::Dimension(format!("expected dims [d_M, d_A, d_B], got {dims:?}"))),
    }
}

fn off_block_norm(m: &ComplexMatrix, dm: usize) -> f64 {
    let n = m.rows() / dm;
    let mut acc = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i / n != j / n {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    sqrt(acc)
}

/// Eigendecomposition purification `Σ_i √λ_i |i⟩_M |e_i⟩` of a bipartite
/// state, padded to a memory of dimension `memory_dim`.
pub fn purify(rho: &DensityMatrix, memory_dim: usize) -> Result<MemoryExtendedState> {
    let (da, db) = rho.require_bipartite()?;
    let eig = rho.eigen();
    let rank = eig.rank(Tolerances::DEFAULT.eig_cutoff);
    if memory_dim < rank {
        return Err(Error::Capacity {
            rank,
            memory: memory_dim,
        });
    }
    let n = da * db;
    let mut amps = vec![ZERO; memory_dim * n];
    for i in 0..rank {
        let s = sqrt(eig.values()[i]);
        let e = eig.vector(i);
        for (x, v) in amps[i * n..(i + 1) * n].iter_mut().zip(&e) {
            *x = v * s;
        }
    }
    let psi = PureState::normalized(amps, &[memory_dim, da, db])?;
    MemoryExtendedState::from_pure(psi)
}

/// `Σ √p_i |m_i⟩|ψ_i⟩` for a pure-member decomposition.
pub fn pure_extension(eps: &Decomposition) -> Result<MemoryExtendedState> {
    let members = eps.pure_members("pure_extension")?;
    let (da, db) = eps.target().require_bipartite()?;
    let n = da * db;
    let mut amps: Vec<C64> = Vec::with_capacity(members.len() * n);
    for (w, psi) in &members {
        let s = sqrt(*w);
        amps.extend(psi.amplitudes().iter().map(|a| a * s));
    }
    MemoryExtendedState::from_pure(PureState::normalized(amps, &[members.len(), da, db])?)
}

/// `Σ p_i |m_i⟩⟨m_i| ⊗ |ψ_i⟩⟨ψ_i|`: the memory classically records which
/// member was prepared.
pub fn canonical_extension(eps: &Decomposition) -> Result<MemoryExtendedState> {
    eps.pure_members("canonical_extension")?;
    flagged_extension(eps)
}

/// `Σ p_i |m_i⟩⟨m_i| ⊗ ρ_i` for any (possibly mixed) decomposition.
pub(crate) fn flagged_extension(eps: &Decomposition) -> Result<MemoryExtendedState> {
    let (da, db) = eps.target().require_bipartite()?;
    let k = eps.len();
    let mut m = ComplexMatrix::zeros(k * da * db, k * da * db);
    for (i, (w, member)) in eps.members().iter().enumerate() {
        let mut flag = ComplexMatrix::zeros(k, k);
        flag[(i, i)] = C64::new(*w, 0.0);
        let block = kron(&flag, member.density().matrix());
        m = &m + &block;
    }
    MemoryExtendedState::from_classical(DensityMatrix::from_trusted(m, &[k, da, db]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::Member;
    use crate::states::{bell_state, gen_random_density, schmidt, Bell};

    #[test]
    fn purifying_a_pure_state_gives_a_product() {
        let psi = bell_state(Bell::PhiPlus);
        let ext = purify(&psi.density(), 2).unwrap();
        let amps = ext.pure_state().unwrap().amplitudes();
        let (head, tail) = amps.split_at(4);
        assert!(tail.iter().all(|z| z.norm_sqr() == 0.0));
        assert!((head[0].norm_sqr() - 0.5).abs() <= 1e-14);
        assert!(ext.system().matrix().max_abs_diff(psi.density().matrix()) <= 1e-14);
    }

    #[test]
    fn purified_maximally_mixed_qubit_is_maximally_entangled() {
        let rho = DensityMatrix::maximally_mixed(&[2, 1]);
        let ext = purify(&rho, 2).unwrap();
        let psi = ext.pure_state().unwrap().regroup(&[2, 2]).unwrap();
        let f = schmidt(&psi).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((f.coefficients[0] - h).abs() <= 1e-12 && (f.coefficients[1] - h).abs() <= 1e-12);
    }

    #[test]
    fn purification_traces_back() {
        let rho = gen_random_density(&[3, 3], 3, 17).unwrap();
        let ext = purify(&rho, 3).unwrap();
        assert!((&ext.system().into_matrix() - rho.matrix()).frobenius_norm() <= 1e-8);
        let mem = ext.memory_marginal();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(mem.matrix()[(i, j)].norm_sqr() <= 1e-24);
                }
            }
        }
        assert!(matches!(purify(&rho, 2), Err(Error::Capacity { rank: 3, memory: 2 })));
    }

    #[test]
    fn single_member_extension_is_a_product() {
        let psi = bell_state(Bell::PsiPlus);
        let eps = Decomposition::pure(alloc::vec![(1.0, psi.clone())]).unwrap();
        let ext = canonical_extension(&eps).unwrap();
        assert_eq!(ext.dims(), [1, 2, 2]);
        assert!(ext.density().matrix().max_abs_diff(psi.density().matrix()) <= 1e-15);
    }

    #[test]
    fn bell_mixture_extension_is_block_diagonal() {
        let eps = Decomposition::pure(alloc::vec![
            (0.5, bell_state(Bell::PhiPlus)),
            (0.5, bell_state(Bell::PsiMinus)),
        ])
        .unwrap();
        let ext = canonical_extension(&eps).unwrap();
        assert_eq!(ext.kind(), MemoryKind::Classical);
        assert_eq!(ext.density().dim(), 8);
        assert!(off_block_norm(ext.density().matrix(), 2) == 0.0);
        assert!((&ext.system().into_matrix() - eps.target().matrix()).frobenius_norm() <= 1e-8);
        let blocks = ext.memory_blocks().unwrap();
        assert_eq!(blocks.len(), 2);
    }

    #[test]
    fn non_block_diagonal_state_is_rejected_as_classical() {
        let ext = purify(&gen_random_density(&[2, 2], 2, 4).unwrap(), 2).unwrap();
        let err = MemoryExtendedState::from_classical(ext.density()).unwrap_err();
        assert_eq!(err.invariant(), Some(Invariant::BlockDiagonal));
    }

    #[test]
    fn canonical_extension_rejects_mixed_members() {
        let rho = gen_random_density(&[2, 2], 2, 1).unwrap();
        let eps = Decomposition::from_members(alloc::vec![(1.0, Member::Mixed(rho))]).unwrap();
        assert!(matches!(canonical_extension(&eps), Err(Error::MixedMembers(_))));
    }
}
