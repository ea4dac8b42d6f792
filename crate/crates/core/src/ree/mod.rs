//! Relative entropy of entanglement: a multi-start separable-ansatz
//! minimizer, a certified lower bound over the PPT relaxation, and the
//! closed forms for pure states and flagged memory extensions.

mod ansatz;
mod ppt;

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decomp::{random_complex_vec, OptimizerConfig};
use crate::error::{Error, Invariant, Result};
use crate::math::{ln, ln_1p, LN2};
use crate::measures::{qrelative_entropy, vn_entropy, Ebits};
use crate::qmat::{ComplexMatrix, HermitianEigen, C64};
use crate::report::{Bound, Diagnostics};
use crate::states::{Decomposition, DensityMatrix, PureState};
use crate::tol::Tolerances;

pub use ppt::PptBracket;

/// Identity weight mixed into every ansatz state so its logarithm stays
/// finite: the optimizer evaluates `(1 − nε)σ + εI`.
pub const ANSATZ_FLOOR: f64 = 1e-9;

/// One product term `w |a⟩⟨a| ⊗ |b⟩⟨b|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzTerm {
    pub weight: f64,
    pub a: PureState,
    pub b: PureState,
}

/// A finite convex combination of product pure states.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableAnsatz {
    dims: [usize; 2],
    terms: Vec<AnsatzTerm>,
}

impl SeparableAnsatz {
    pub fn new(terms: Vec<AnsatzTerm>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::validation(Invariant::Weights, 0.0));
        };
        let dims = [first.a.amplitudes().len(), first.b.amplitudes().len()];
        for t in &terms {
            if t.a.amplitudes().len() != dims[0] || t.b.amplitudes().len() != dims[1] {
                return Err(Error::Dimension("ansatz terms disagree on local dimensions".into()));
            }
            if !(t.weight > 0.0) || !t.weight.is_finite() {
                return Err(Error::validation(Invariant::Weights, t.weight));
            }
        }
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        if (total - 1.0).abs() > Tolerances::DEFAULT.structural {
            return Err(Error::validation(Invariant::Weights, total - 1.0));
        }
        Ok(Self { dims, terms })
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn terms(&self) -> &[AnsatzTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `σ = Σ w_j |a_j⟩⟨a_j| ⊗ |b_j⟩⟨b_j|`.
    pub fn density(&self) -> DensityMatrix {
        let n = self.dims[0] * self.dims[1];
        let mut m = ComplexMatrix::zeros(n, n);
        for t in &self.terms {
            let v = crate::qmat::kron_vec(t.a.amplitudes(), t.b.amplitudes());
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += v[i] * v[j].conj() * t.weight;
                }
            }
        }
        DensityMatrix::from_trusted(m, &self.dims)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReeReport {
    pub value: Ebits,
    pub bound: Bound,
    pub witness: SeparableAnsatz,
    pub ppt_lower: Ebits,
    pub diagnostics: Diagnostics,
}

/// Ansatz size for local dimensions `(d_A, d_B)`.
pub fn ansatz_size(da: usize, db: usize) -> usize {
    (da * db) * (da * db)
}

/// Minimizes `S(ρ‖σ)` over separable ansätze with multi-start L-BFGS and
/// attaches the PPT lower bracket.
pub fn ree(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<ReeReport> {
    let (da, db) = rho.require_bipartite()?;
    cfg.decomposition_size(1)?;
    let m = ansatz_size(da, db);
    let problem = ansatz::Problem::new(rho, da, db, m, ANSATZ_FLOOR);
    let entropy = vn_entropy(rho).value();
    let mut best: Option<(usize, crate::optim::Outcome)> = None;
    let mut worst = f64::NAN;
    let mut iterations = 0;
    let mut converged = 0;
    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7265_6500);
        rng.set_stream(restart as u64 + 1);
        let x0 = problem.random_start(&mut rng);
        let out = crate::optim::lbfgs(
            |x, g| problem.eval(x, Some(g)),
            x0,
            cfg.max_iterations,
            cfg.gradient_tolerance,
            10,
        );
        iterations += out.iterations;
        converged += out.converged as usize;
        let v = out.value - entropy;
        if worst.is_nan() || v > worst {
            worst = v;
        }
        match &best {
            Some((_, b)) if b.value <= out.value => {}
            _ => best = Some((restart, out)),
        }
    }
    let (best_restart, out) = best.ok_or_else(|| Error::Parameter("no restarts".into()))?;
    let witness = problem.realize(&out.x)?;
    let value = qrelative_entropy(rho, &witness.density())?;
    let bracket = ree_ppt_bracket(rho)?;
    Ok(ReeReport {
        value,
        bound: Bound::UpperBoundOfMin,
        witness,
        ppt_lower: bracket.lower,
        diagnostics: Diagnostics {
            restarts: cfg.restarts,
            best_restart,
            converged_restarts: converged,
            iterations,
            residual: out.grad_norm,
            best: out.value - entropy,
            worst,
            size: m,
        },
    })
}

/// Certified lower bound on the REE: the minimum relative entropy to the PPT
/// set, which contains every separable state.
pub fn ree_ppt_lower(rho: &DensityMatrix) -> Result<Ebits> {
    Ok(ree_ppt_bracket(rho)?.lower)
}

/// Lower bound and primal value of the PPT relaxation.
pub fn ree_ppt_bracket(rho: &DensityMatrix) -> Result<PptBracket> {
    let (da, db) = rho.require_bipartite()?;
    Ok(ppt::solve(rho, da, db))
}

/// `E_RE(|ψ⟩) = S(ρ_B)`.
pub fn ree_pure(psi: &PureState) -> Result<Ebits> {
    psi.require_bipartite()?;
    Ok(vn_entropy(&psi.reduced(1)?))
}

/// Closed-form REE of the flagged extension `Σ p_i |ψ_i⟩⟨ψ_i| ⊗ |i⟩⟨i|`
/// across `A : (BM)`, with the block minimizer
/// `σ = Σ p_i |i⟩⟨i| ⊗ σ_i`, where `σ_i` is member `i` dephased in its
/// Schmidt basis. The memory is the leading factor.
pub fn ree_extension_closed(eps: &Decomposition) -> Result<(Ebits, DensityMatrix)> {
    let members = eps.pure_members("ree_extension_closed")?;
    let dims = members[0].1.dims().to_vec();
    let (da, db) = (dims[0], dims[1]);
    let k = members.len();
    let n = da * db;
    let mut value = 0.0;
    let mut sigma = ComplexMatrix::zeros(k * n, k * n);
    for (i, (p, psi)) in members.iter().enumerate() {
        value += p * vn_entropy(&psi.reduced(1)?).value();
        let block = crate::states::schmidt(psi)?.dephased();
        for r in 0..n {
            for c in 0..n {
                sigma[(i * n + r, i * n + c)] = block.matrix()[(r, c)] * *p;
            }
        }
    }
    Ok((Ebits::new(value), DensityMatrix::from_trusted(sigma, &[k, da, db])))
}

/// `Σ p_i |i⟩⟨i| ⊗ |ψ_i⟩⟨ψ_i|` with the memory leading.
pub fn flagged_state(eps: &Decomposition) -> Result<DensityMatrix> {
    let dims = eps.target().dims().to_vec();
    let n = eps.target().dim();
    let k = eps.len();
    let mut m = ComplexMatrix::zeros(k * n, k * n);
    for (i, (p, member)) in eps.members().iter().enumerate() {
        let block = member.density();
        for r in 0..n {
            for c in 0..n {
                m[(i * n + r, i * n + c)] = block.matrix()[(r, c)] * *p;
            }
        }
    }
    let mut all = alloc::vec![k];
    all.extend(dims);
    Ok(DensityMatrix::from_trusted(m, &all))
}

/// Random separable block-diagonal state `Σ r_i |i⟩⟨i| ⊗ τ_i` with each
/// `τ_i` a random mixture of `terms` product states.
pub fn random_block_candidate<R: Rng + ?Sized>(
    k: usize,
    da: usize,
    db: usize,
    terms: usize,
    rng: &mut R,
) -> DensityMatrix {
    let n = da * db;
    let mut m = ComplexMatrix::zeros(k * n, k * n);
    let r: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let rs: f64 = r.iter().sum();
    for (i, ri) in r.iter().enumerate() {
        let w: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
        let ws: f64 = w.iter().sum();
        for wj in &w {
            let a = normalize(random_complex_vec(da, rng));
            let b = normalize(random_complex_vec(db, rng));
            let v = crate::qmat::kron_vec(&a, &b);
            let s = ri / rs * wj / ws;
            for x in 0..n {
                for y in 0..n {
                    m[(i * n + x, i * n + y)] += v[x] * v[y].conj() * s;
                }
            }
        }
    }
    DensityMatrix::from_trusted(m, &[k, da, db])
}

/// Block candidate obtained by perturbing the closed-form minimizer toward a
/// random separable block state.
pub fn perturbed_block_candidate<R: Rng + ?Sized>(closed: &DensityMatrix, t: f64, rng: &mut R) -> DensityMatrix {
    let d = closed.dims();
    let other = random_block_candidate(d[0], d[1], d[2], 2, rng);
    closed.mix(1.0 - t, &other).expect("same dims")
}

fn normalize(mut v: Vec<C64>) -> Vec<C64> {
    let nv = crate::qmat::vec_norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    v
}

/// Checks the block minimizer against `count` random separable
/// block-diagonal candidates and returns the largest amount by which any
/// candidate undercuts the closed form (negative when none does).
pub fn minimizer_candidate_check<R: Rng + ?Sized>(eps: &Decomposition, count: usize, rng: &mut R) -> Result<f64> {
    let (closed, sigma) = ree_extension_closed(eps)?;
    let rho = flagged_state(eps)?;
    let [k, da, db] = [sigma.dims()[0], sigma.dims()[1], sigma.dims()[2]];
    let mut worst = f64::NEG_INFINITY;
    for c in 0..count {
        let cand = if c % 2 == 0 {
            random_block_candidate(k, da, db, 1 + c % 4, rng)
        } else {
            perturbed_block_candidate(&sigma, libm::pow(10.0, -((c % 7) as f64)), rng)
        };
        let v = qrelative_entropy(&rho, &cand)?.value();
        worst = worst.max(closed.value() - v);
    }
    Ok(worst)
}

/// First divided difference of `ln`.
pub(crate) fn dd1(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi - lo <= 1e-8 * hi {
        2.0 / (a + b)
    } else {
        ln_1p((hi - lo) / lo) / (hi - lo)
    }
}

/// Second divided difference of `ln`.
pub(crate) fn dd2(a: f64, b: f64, c: f64) -> f64 {
    let mut v = [a, b, c];
    v.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    let [x, y, z] = v;
    if x - z <= 1e-5 * x {
        let m = (x + y + z) / 3.0;
        -0.5 / (m * m)
    } else {
        (dd1(x, y) - dd1(y, z)) / (x - z)
    }
}

/// For `σ = V Λ V†` with `Λ > 0`: returns `−Tr ρ log₂ σ`, the gradient
/// `G = −(1/ln 2) V (L ∘ V†ρV) V†` of that quantity, and `V†ρV`.
pub(crate) fn cross_entropy_gradient(rho: &ComplexMatrix, eig: &HermitianEigen) -> (f64, ComplexMatrix, ComplexMatrix) {
    let rt = eig.rotate_into(rho);
    let lam = eig.values();
    let n = lam.len();
    let mut cross = 0.0;
    for k in 0..n {
        cross -= rt[(k, k)].re * ln(lam[k]);
    }
    let inner = ComplexMatrix::from_fn(n, n, |i, j| rt[(i, j)] * (-dd1(lam[i], lam[j]) / LN2));
    let v = eig.vectors();
    let g = &(v * &inner) * &v.adjoint();
    (cross / LN2, g, rt)
}
