//! Entropic functionals in base-2 units.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::{binary_entropy, eta, log2, sqrt};
use crate::qmat::{herm_eig_unchecked, ComplexMatrix, C64, ZERO};
use crate::states::{schmidt, DensityMatrix, MemoryExtendedState, PureState};
use crate::tol::Tolerances;

/// Rounding slack below zero that is silently clamped.
const NEGATIVE_SLACK: f64 = 1e-9;

/// A nonnegative quantity of entanglement or information in ebits/bits.
/// Infinity is a distinguished value used only for support violations.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Ebits(f64);

impl Ebits {
    pub const ZERO: Ebits = Ebits(0.0);
    pub const INFINITE: Ebits = Ebits(f64::INFINITY);

    /// Clamps rounding noise in `[-1e-9, 0)` to zero.
    pub fn new(value: f64) -> Self {
        if value < 0.0 && value >= -NEGATIVE_SLACK {
            Ebits(0.0)
        } else {
            Ebits(value)
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }
}

impl fmt::Display for Ebits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// `−Σ λ log₂ λ` over a spectrum, with `0 log 0 = 0` at the eigenvalue cutoff.
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    let cutoff = Tolerances::DEFAULT.eig_cutoff;
    values.iter().map(|&l| eta(l, cutoff)).sum()
}

/// Von Neumann entropy `S(ρ)`.
pub fn vn_entropy(rho: &DensityMatrix) -> Ebits {
    Ebits::new(matrix_entropy(rho.matrix()))
}

pub(crate) fn matrix_entropy(m: &ComplexMatrix) -> f64 {
    spectrum_entropy(herm_eig_unchecked(m).values())
}

/// Entropy of one reduced state of a multipartite density matrix.
pub fn reduced_entropy(rho: &DensityMatrix, keep: &[usize]) -> Result<Ebits> {
    Ok(vn_entropy(&rho.reduce(keep)?))
}

/// `S(ρ‖σ) = Tr ρ log₂ ρ − Tr ρ log₂ σ`, evaluated in the eigenbasis of σ.
///
/// Returns [`Ebits::INFINITE`] when ρ has weight above the cutoff on an
/// eigenvector of σ whose eigenvalue is at or below the cutoff.
pub fn qrelative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Ebits> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "relative entropy between dims {:?} and {:?}",
            rho.dims(),
            sigma.dims()
        )));
    }
    Ok(relative_entropy_matrices(rho.matrix(), sigma.matrix()))
}

pub(crate) fn relative_entropy_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Ebits {
    let cutoff = Tolerances::DEFAULT.eig_cutoff;
    let eig = herm_eig_unchecked(sigma);
    let v = eig.vectors();
    let n = eig.dim();
    let mut cross = 0.0;
    for k in 0..n {
        // (V†ρV)_kk
        let mut w = 0.0;
        for i in 0..n {
            let mut acc = ZERO;
            for j in 0..n {
                acc += rho[(i, j)] * v[(j, k)];
            }
            w += (v[(i, k)].conj() * acc).re;
        }
        let lambda = eig.values()[k];
        if lambda <= cutoff {
            if w > cutoff {
                return Ebits::INFINITE;
            }
            continue;
        }
        cross -= w * log2(lambda);
    }
    Ebits::new(cross - matrix_entropy(rho))
}

/// `I(M : AB) = S(ρ_M) + S(ρ_AB) − S(ρ_MAB)` for dims `[d_M, d_A, d_B]`.
pub fn mutual_information(rho: &DensityMatrix) -> Result<Ebits> {
    if rho.dims().len() != 3 {
        return Err(Error::Dimension(format!(
            "mutual information M:(AB) needs dims [d_M, d_A, d_B], got {:?}",
            rho.dims()
        )));
    }
    let sm = reduced_entropy(rho, &[0])?.value();
    let sab = reduced_entropy(rho, &[1, 2])?.value();
    let s = vn_entropy(rho).value();
    Ok(Ebits::new((sm + sab - s).max(0.0)))
}

pub fn extension_mutual_information(ext: &MemoryExtendedState) -> Ebits {
    mutual_information(&ext.density()).expect("extensions are tripartite")
}

/// Entanglement entropy of a bipartite pure state from its Schmidt
/// coefficients.
pub fn pure_entanglement(psi: &PureState) -> Result<Ebits> {
    let f = schmidt(psi)?;
    Ok(Ebits::new(spectrum_entropy(&f.probabilities())))
}

/// Concurrence of a two-qubit state from the spectrum of
/// `√ρ ρ̃ √ρ`, where `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dims() != [2, 2] {
        return Err(Error::Dimension(format!("concurrence needs a 2⊗2 state, got {:?}", rho.dims())));
    }
    let yy = ComplexMatrix::from_fn(4, 4, |i, j| match (i, j) {
        (0, 3) | (3, 0) => C64::new(-1.0, 0.0),
        (1, 2) | (2, 1) => C64::new(1.0, 0.0),
        _ => ZERO,
    });
    let flipped = &(&yy * &rho.matrix().conj()) * &yy;
    let root = rho.eigen().map(|l| sqrt(l.max(0.0)));
    let m = &(&root * &flipped) * &root;
    let mut lambdas: Vec<f64> = herm_eig_unchecked(&m)
        .values()
        .iter()
        .map(|&mu| sqrt(mu.max(0.0)))
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Closed-form two-qubit entanglement of formation
/// `h((1 + √(1 − C²))/2)`.
pub fn ef_2qubit_closed(rho: &DensityMatrix) -> Result<Ebits> {
    let c = concurrence(rho)?.min(1.0);
    if c == 0.0 {
        return Ok(Ebits::ZERO);
    }
    Ok(Ebits::new(binary_entropy((1.0 + sqrt(1.0 - c * c)) / 2.0)))
}
