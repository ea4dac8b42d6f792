//! State families and seeded random generators used by tests and sweeps.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::qmat::{complex_gaussian, ComplexMatrix, C64, ZERO};

/// The four Bell states in the order used by [`gen_bell_diagonal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl Bell {
    pub const ALL: [Bell; 4] = [Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus, Bell::PsiMinus];
}

pub fn bell_state(which: Bell) -> PureState {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let (p, m) = (C64::new(h, 0.0), C64::new(-h, 0.0));
    let amps = match which {
        Bell::PhiPlus => [p, ZERO, ZERO, p],
        Bell::PhiMinus => [p, ZERO, ZERO, m],
        Bell::PsiPlus => [ZERO, p, p, ZERO],
        Bell::PsiMinus => [ZERO, p, m, ZERO],
    };
    PureState::new(amps.to_vec(), &[2, 2]).expect("Bell states are normalized")
}

/// `|Ψ⁻⟩ = (|01⟩ − |10⟩)/√2`.
pub fn singlet() -> PureState {
    bell_state(Bell::PsiMinus)
}

/// Werner state `p |Ψ⁻⟩⟨Ψ⁻| + (1 − p) I/4`; PPT (hence separable) iff `p ≤ 1/3`.
pub fn gen_werner(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("Werner weight {p} outside [0, 1]")));
    }
    let s = singlet().density();
    let mixed = DensityMatrix::maximally_mixed(&[2, 2]);
    s.mix(p, &mixed)
}

/// `Σ λ_k |B_k⟩⟨B_k|` over the Bell basis (Φ⁺, Φ⁻, Ψ⁺, Ψ⁻).
pub fn gen_bell_diagonal(weights: [f64; 4]) -> Result<DensityMatrix> {
    if weights.iter().any(|&w| !(w >= 0.0) || w > 1.0) {
        return Err(Error::Parameter(format!("Bell weights {weights:?} must lie in [0, 1]")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Parameter(format!("Bell weights sum to {total}, not 1")));
    }
    let mut m = ComplexMatrix::zeros(4, 4);
    for (w, b) in weights.iter().zip(Bell::ALL) {
        m = &m + &bell_state(b).density().matrix().scale(*w);
    }
    Ok(DensityMatrix::from_trusted(m, &[2, 2]))
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn gen_random_pure(dims: &[usize], seed: u64) -> Result<PureState> {
    gen_random_pure_with(dims, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn gen_random_pure_with<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState> {
    let n: usize = dims.iter().product();
    if dims.is_empty() || n == 0 {
        return Err(Error::Parameter(format!("invalid dims {dims:?}")));
    }
    let v: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
    PureState::normalized(v, dims)
}

/// `G G† / Tr(G G†)` with `G` an `n × rank` Ginibre matrix; Hilbert–Schmidt
/// distributed when `rank = n`.
pub fn gen_random_density(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    gen_random_density_with(dims, rank, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn gen_random_density_with<R: Rng + ?Sized>(
    dims: &[usize],
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let n: usize = dims.iter().product();
    if dims.is_empty() || n == 0 {
        return Err(Error::Parameter(format!("invalid dims {dims:?}")));
    }
    if rank == 0 || rank > n {
        return Err(Error::Parameter(format!("rank {rank} outside 1..={n}")));
    }
    let g = ComplexMatrix::ginibre(n, rank, rng);
    let w = &g * &g.adjoint();
    Ok(DensityMatrix::from_trusted(w, dims))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::validate_density;

    #[test]
    fn werner_endpoints() {
        let one = gen_werner(1.0).unwrap();
        assert!(one.matrix().max_abs_diff(singlet().density().matrix()) <= 1e-15);
        let zero = gen_werner(0.0).unwrap();
        assert!(zero.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) <= 1e-15);
        assert!(gen_werner(1.5).is_err());
    }

    #[test]
    fn werner_third_sits_on_ppt_boundary() {
        // Oracle: the partial transpose of ρ(p) has spectrum
        // {(1+p)/4 (x3), (1-3p)/4}, so p = 1/3 gives a zero eigenvalue.
        let rho = gen_werner(1.0 / 3.0).unwrap();
        assert!(rho.min_pt_eigenvalue().abs() <= 1e-10);
        assert!(gen_werner(0.5).unwrap().min_pt_eigenvalue() < -0.1);
        assert!(gen_werner(0.2).unwrap().min_pt_eigenvalue() > 0.0);
    }

    #[test]
    fn bell_diagonal_validates_weights() {
        assert!(gen_bell_diagonal([0.5, 0.5, 0.1, 0.0]).is_err());
        assert!(gen_bell_diagonal([-0.1, 0.6, 0.5, 0.0]).is_err());
        let rho = gen_bell_diagonal([0.75, 0.25, 0.0, 0.0]).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 0.5).abs() <= 1e-15);
        assert!((rho.matrix()[(0, 3)].re - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn generators_are_seeded_and_valid() {
        let a = gen_random_density(&[2, 2], 3, 42).unwrap();
        let b = gen_random_density(&[2, 2], 3, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rank(), 3);
        assert!(validate_density(a.matrix().clone(), &[2, 2]).is_ok());
        let full = gen_random_density(&[3, 3], 9, 1).unwrap();
        assert_eq!(full.rank(), 9);
        assert!(gen_random_density(&[2, 2], 5, 1).is_err());
        let p = gen_random_pure(&[2, 3], 5).unwrap();
        assert_eq!(p, gen_random_pure(&[2, 3], 5).unwrap());
        assert_ne!(p, gen_random_pure(&[2, 3], 6).unwrap());
    }
}
