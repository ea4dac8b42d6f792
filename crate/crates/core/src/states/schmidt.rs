use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{DensityMatrix, PureState};
use crate::error::Result;
use crate::math::{cabs, sqrt};
use crate::qmat::{complete_basis, gram_schmidt, herm_eig_unchecked, kron_vec, ComplexMatrix, C64, ZERO};

/// Coefficients at or below this are treated as exact zeros when building
/// the B-side basis.
const COEFF_FLOOR: f64 = 1e-14;
const DEGENERACY: f64 = 1e-10;

/// `|ψ⟩ = Σ_k c_k |a_k⟩|b_k⟩` with `c` descending.
///
/// Phase convention: the first non-negligible component of every `a_k` is
/// real and positive; `b_k` carries whatever phase makes the sum exact.
/// Vectors sharing a degenerate coefficient are ordered lexicographically by
/// their `a_k` components.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtForm {
    pub coefficients: Vec<f64>,
    pub basis_a: Vec<Vec<C64>>,
    pub basis_b: Vec<Vec<C64>>,
    dims: [usize; 2],
}

impl SchmidtForm {
    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn reconstruct(&self) -> PureState {
        let n = self.dims[0] * self.dims[1];
        let mut v = alloc::vec![ZERO; n];
        for ((c, a), b) in self.coefficients.iter().zip(&self.basis_a).zip(&self.basis_b) {
            for (x, y) in v.iter_mut().zip(kron_vec(a, b)) {
                *x += y * *c;
            }
        }
        PureState::normalized(v, &self.dims).expect("Schmidt coefficients are normalized")
    }

    /// `Σ_k c_k² |a_k b_k⟩⟨a_k b_k|`: the state with every off-diagonal
    /// element in the Schmidt product basis deleted. Separable.
    pub fn dephased(&self) -> DensityMatrix {
        let n = self.dims[0] * self.dims[1];
        let mut m = ComplexMatrix::zeros(n, n);
        for ((c, a), b) in self.coefficients.iter().zip(&self.basis_a).zip(&self.basis_b) {
            let w = c * c;
            if w == 0.0 {
                continue;
            }
            let ab = kron_vec(a, b);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += ab[i] * ab[j].conj() * w;
                }
            }
        }
        DensityMatrix::from_trusted(m, &self.dims)
    }

    /// Squared coefficients: the spectrum of either reduced state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c * c).collect()
    }
}

fn fix_phase(v: &mut [C64]) {
    let scale = v.iter().map(|z| cabs(*z)).fold(0.0, f64::max);
    if let Some(&lead) = v.iter().find(|z| cabs(**z) > 1e-8 * scale) {
        let rot = lead.conj() / cabs(lead);
        for x in v.iter_mut() {
            *x *= rot;
        }
    }
}

fn lex_cmp(u: &[C64], v: &[C64]) -> Ordering {
    for (a, b) in u.iter().zip(v) {
        let o = a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Schmidt decomposition of a bipartite pure state via the spectrum of
/// `ρ_A = Ψ Ψ†`.
pub fn schmidt(psi: &PureState) -> Result<SchmidtForm> {
    let (da, db) = psi.require_bipartite()?;
    let amps = psi.amplitudes();
    let psi_mat = ComplexMatrix::from_fn(da, db, |i, j| amps[i * db + j]);
    let rho_a = &psi_mat * &psi_mat.adjoint();
    let eig = herm_eig_unchecked(&rho_a);
    let r = da.min(db);

    let mut coefficients = Vec::with_capacity(r);
    let mut basis_a = Vec::with_capacity(r);
    for k in 0..r {
        coefficients.push(sqrt(eig.values()[k].max(0.0)));
        let mut a = eig.vector(k);
        fix_phase(&mut a);
        basis_a.push(a);
    }

    // Order degenerate groups lexicographically.
    let mut start = 0;
    while start < r {
        let mut end = start + 1;
        while end < r && (coefficients[start] - coefficients[end]).abs() <= DEGENERACY {
            end += 1;
        }
        basis_a[start..end].sort_by(|u, v| lex_cmp(u, v));
        start = end;
    }

    let mut raw_b: Vec<Vec<C64>> = Vec::with_capacity(r);
    for k in 0..r {
        let c = coefficients[k];
        if c <= COEFF_FLOOR {
            break;
        }
        let a = &basis_a[k];
        let b: Vec<C64> = (0..db)
            .map(|j| (0..da).map(|i| a[i].conj() * psi_mat[(i, j)]).sum::<C64>() / c)
            .collect();
        raw_b.push(b);
    }
    let nonzero = raw_b.len();
    let mut basis_b = gram_schmidt(&raw_b, 1e-12);
    if basis_b.len() < nonzero {
        // Numerically dependent B vectors: keep the raw ones.
        basis_b = raw_b;
    }
    let mut basis_b = complete_basis(basis_b, db);
    basis_b.truncate(r);
    for b in basis_b.iter_mut().skip(nonzero) {
        fix_phase(b);
    }
    for c in coefficients.iter_mut().skip(nonzero) {
        *c = 0.0;
    }

    Ok(SchmidtForm {
        coefficients,
        basis_a,
        basis_b,
        dims: [da, db],
    })
}
