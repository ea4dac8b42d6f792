//! Multi-start descent on the unitary group for the average entanglement
//! `Σ_j q_j S(ρ_B^j)` of the decomposition `M = U W`, where the rows of `W`
//! are the scaled eigenvectors `√λ_i e_i` of the target.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{members_from_rows, Extremum, MeasureReport, OptimizerConfig, UnitaryMixer};
use crate::error::Result;
use crate::math::{cis, eta, log2, sqrt, LN2};
use crate::measures::Ebits;
use crate::qmat::{gram_schmidt, haar_unitary, herm_eig_unchecked, ComplexMatrix, C64, ZERO};
use crate::report::{Bound, Diagnostics};
use crate::states::DensityMatrix;
use crate::tol::Tolerances;

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
const STALL_LIMIT: usize = 12;

/// `S(Tr_A vv†) · q` style term for one unnormalized member `v`:
/// returns `f = −Tr X log X + q log q` with `X = Tr_A vv†`, `q = Tr X`, and
/// writes `(I ⊗ G) v` into `grad` where `G = log q − log X`, so that
/// `df = 2 Re⟨grad, dv⟩`.
pub(crate) fn member_term(v: &[C64], da: usize, db: usize, grad: Option<&mut [C64]>) -> f64 {
    let mut x = alloc::vec![ZERO; db * db];
    for a in 0..da {
        let block = &v[a * db..(a + 1) * db];
        for i in 0..db {
            for j in 0..db {
                x[i * db + j] += block[i] * block[j].conj();
            }
        }
    }
    let q: f64 = (0..db).map(|i| x[i * db + i].re).sum();
    if q <= 0.0 {
        if let Some(g) = grad {
            g.iter_mut().for_each(|z| *z = ZERO);
        }
        return 0.0;
    }
    let lq = log2(q);
    let (value, gmat) = if db == 2 {
        two_level(&x, q, lq, grad.is_some())
    } else {
        general(&x, db, q, lq, grad.is_some())
    };
    if let (Some(g), Some(gm)) = (grad, gmat) {
        for a in 0..da {
            for i in 0..db {
                let mut acc = ZERO;
                for j in 0..db {
                    acc += gm[i * db + j] * v[a * db + j];
                }
                g[a * db + i] = acc;
            }
        }
    }
    value
}

fn two_level(x: &[C64], q: f64, lq: f64, want: bool) -> (f64, Option<Vec<C64>>) {
    let half = 0.5 * (x[0].re - x[3].re);
    let b = x[1];
    let r = sqrt(half * half + b.norm_sqr());
    let hi = 0.5 * q + r;
    let lo = 0.5 * q - r;
    let value = eta(hi, 0.0) + eta(lo, 0.0) - eta(q, 0.0);
    if !want {
        return (value, None);
    }
    let l_hi = log2(hi);
    let l_lo = if lo > 0.0 { log2(lo) } else { l_hi };
    let c0 = 0.5 * (l_hi + l_lo);
    let c1 = if r > 1e-14 * q {
        (l_hi - l_lo) / (2.0 * r)
    } else {
        2.0 / (q * LN2)
    };
    // log X = c0 I + c1 (X − q/2 I)
    let g = alloc::vec![
        C64::new(lq - c0 - c1 * half, 0.0),
        -b * c1,
        -b.conj() * c1,
        C64::new(lq - c0 + c1 * half, 0.0),
    ];
    (value, Some(g))
}

fn general(x: &[C64], db: usize, q: f64, lq: f64, want: bool) -> (f64, Option<Vec<C64>>) {
    let xm = ComplexMatrix::from_fn(db, db, |i, j| x[i * db + j]);
    let e = herm_eig_unchecked(&xm);
    let value = e.values().iter().map(|&m| eta(m, 0.0)).sum::<f64>() - eta(q, 0.0);
    if !want {
        return (value, None);
    }
    let g = e.map(|m| if m > 0.0 { lq - log2(m) } else { 0.0 });
    (value, Some(g.data().to_vec()))
}

struct Problem {
    da: usize,
    db: usize,
    sign: f64,
}

impl Problem {
    /// Signed objective `F = sign·f` and its row gradients.
    fn eval(&self, m: &ComplexMatrix) -> (f64, ComplexMatrix) {
        let n = m.cols();
        let mut grad = ComplexMatrix::zeros(m.rows(), n);
        let mut total = 0.0;
        let mut buf = alloc::vec![ZERO; n];
        for j in 0..m.rows() {
            total += member_term(m.row(j), self.da, self.db, Some(&mut buf));
            for (x, &g) in buf.iter().enumerate() {
                grad[(j, x)] = g * self.sign;
            }
        }
        (self.sign * total, grad)
    }

    fn value(&self, m: &ComplexMatrix) -> f64 {
        let total: f64 = (0..m.rows())
            .map(|j| member_term(m.row(j), self.da, self.db, None))
            .sum();
        self.sign * total
    }
}

/// `A = R M† − M R†`: the gradient of `F(exp(Ω) M)` at `Ω = 0` under
/// `⟨X, Y⟩ = Re Tr X†Y`.
fn lie_gradient(m: &ComplexMatrix, r: &ComplexMatrix) -> ComplexMatrix {
    let rm = r * &m.adjoint();
    &rm - &rm.adjoint()
}

struct Run {
    value: f64,
    m: ComplexMatrix,
    u: ComplexMatrix,
    iterations: usize,
    converged: bool,
    residual: f64,
}

fn descend(p: &Problem, mut m: ComplexMatrix, mut u: ComplexMatrix, cfg: &OptimizerConfig) -> Run {
    let k = m.rows();
    let n = m.cols();
    let (mut f, mut r) = p.eval(&m);
    let mut a = lie_gradient(&m, &r);
    let mut gnorm = a.frobenius_norm();
    let mut t = 0.1 / gnorm.max(1e-12);
    let mut stalls = 0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        if gnorm <= cfg.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let mut cols: Vec<Vec<C64>> = (0..n).map(|x| m.column(x)).collect();
        cols.extend((0..n).map(|x| r.column(x)));
        let basis = gram_schmidt(&cols, 1e-10);
        let q = ComplexMatrix::from_columns(&basis);
        let qa = q.adjoint();
        let mq = &qa * &m;
        let rq = &qa * &r;
        let uq = &qa * &u;
        // D̃ = −(R̃ M̃† − M̃ R̃†), and H = −i D̃ is Hermitian.
        let rm = &rq * &mq.adjoint();
        let d = &rm.adjoint() - &rm;
        let h = d.scale_complex(C64::new(0.0, -1.0)).hermitian_part();
        let eig = herm_eig_unchecked(&h);
        let spread = eig.values().iter().fold(0.0f64, |s, &x| s.max(x.abs()));
        if spread > 0.0 {
            t = t.min(core::f64::consts::PI / spread);
        }
        let slope = -gnorm * gnorm;
        let step = |tt: f64| -> ComplexMatrix {
            let vecs = eig.vectors();
            let dim = eig.dim();
            let ph: Vec<C64> = eig.values().iter().map(|&x| cis(tt * x) - C64::new(1.0, 0.0)).collect();
            ComplexMatrix::from_fn(dim, dim, |i, j| {
                let mut acc = ZERO;
                for l in 0..dim {
                    acc += vecs[(i, l)] * ph[l] * vecs[(j, l)].conj();
                }
                acc
            })
        };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let e = step(t);
            let qe = &q * &e;
            let m_new = &m + &(&qe * &mq);
            let f_new = p.value(&m_new);
            if f_new <= f + ARMIJO * t * slope {
                accepted = Some((m_new, qe, f_new));
                break;
            }
            t *= 0.5;
        }
        let Some((m_new, qe, f_new)) = accepted else {
            break;
        };
        u = &u + &(&qe * &uq);
        let decrease = f - f_new;
        m = m_new;
        let (f2, r2) = p.eval(&m);
        f = f2;
        r = r2;
        let a_new = lie_gradient(&m, &r);
        let y = &a_new - &a;
        let sy = -t * a.inner_re(&y);
        let ss = t * t * gnorm * gnorm;
        a = a_new;
        gnorm = a.frobenius_norm();
        t = if sy > 0.0 { ss / sy } else { 2.0 * t };
        t = t.clamp(1e-12, 1e6);
        if decrease <= 1e-15 * f.abs().max(1.0) {
            stalls += 1;
            if stalls >= STALL_LIMIT {
                converged = gnorm <= sqrt(cfg.gradient_tolerance);
                break;
            }
        } else {
            stalls = 0;
        }
        let _ = k;
    }
    Run {
        value: p.sign * f,
        m,
        u,
        iterations,
        converged,
        residual: gnorm,
    }
}

pub(super) fn optimize(rho: &DensityMatrix, cfg: &OptimizerConfig, extremum: Extremum) -> Result<MeasureReport> {
    let (da, db) = rho.require_bipartite()?;
    let eig = rho.eigen();
    let rank = eig.rank(Tolerances::DEFAULT.eig_cutoff).max(1);
    let k = cfg.decomposition_size(rank)?;
    let n = da * db;
    let mut w = ComplexMatrix::zeros(k, n);
    for i in 0..rank {
        let s = sqrt(eig.values()[i].max(0.0));
        for x in 0..n {
            w[(i, x)] = eig.vectors()[(x, i)] * s;
        }
    }
    let sign = match extremum {
        Extremum::Formation => 1.0,
        Extremum::Assistance => -1.0,
    };
    let problem = Problem { da, db, sign };
    let restarts = if rank == 1 { 1 } else { cfg.restarts };
    let mut best: Option<(usize, Run)> = None;
    let mut worst = f64::NAN;
    let mut total_iterations = 0;
    let mut converged_restarts = 0;
    for restart in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(restart as u64 + 1);
        let u0 = haar_unitary(k, &mut rng);
        let m0 = &u0 * &w;
        let run = descend(&problem, m0, u0, cfg);
        total_iterations += run.iterations;
        converged_restarts += run.converged as usize;
        let better = |a: f64, b: f64| sign * a < sign * b;
        if worst.is_nan() || better(worst, run.value) {
            worst = run.value;
        }
        match &best {
            Some((_, b)) if !better(run.value, b.value) => {}
            _ => best = Some((restart, run)),
        }
    }
    let (best_restart, run) = best.expect("at least one restart");
    let rows = (0..k).map(|j| run.m.row(j).to_vec()).collect();
    let witness = members_from_rows(rows, &[da, db], rho.clone())?;
    let mixer = UnitaryMixer::from_unitary(run.u)?;
    let bound = if rank == 1 {
        Bound::Exact
    } else {
        match extremum {
            Extremum::Formation => Bound::UpperBoundOfMin,
            Extremum::Assistance => Bound::LowerBoundOfMax,
        }
    };
    Ok(MeasureReport {
        extremum,
        value: Ebits::new(run.value),
        bound,
        witness,
        mixer,
        diagnostics: Diagnostics {
            restarts,
            best_restart,
            converged_restarts,
            iterations: total_iterations,
            residual: run.residual,
            best: run.value,
            worst,
            size: k,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::complex_gaussian;

    fn objective(m: &ComplexMatrix, da: usize, db: usize) -> f64 {
        (0..m.rows()).map(|j| member_term(m.row(j), da, db, None)).sum()
    }

    fn check_gradient(da: usize, db: usize, k: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = da * db;
        let m = ComplexMatrix::from_fn(k, n, |_, _| complex_gaussian(&mut rng)).scale(0.4);
        let p = Problem { da, db, sign: 1.0 };
        let (_, r) = p.eval(&m);
        let a = lie_gradient(&m, &r);
        let g = ComplexMatrix::ginibre(k, k, &mut rng);
        let omega = &g - &g.adjoint();
        let h = 1e-5;
        let plus = &crate::qmat::expm_antihermitian(&omega.scale(h)) * &m;
        let minus = &crate::qmat::expm_antihermitian(&omega.scale(-h)) * &m;
        let numeric = (objective(&plus, da, db) - objective(&minus, da, db)) / (2.0 * h);
        let analytic = a.inner_re(&omega);
        assert!(
            (numeric - analytic).abs() <= 1e-6 * analytic.abs().max(1.0),
            "{numeric} vs {analytic}"
        );
    }

    #[test]
    fn gradient_matches_central_differences_qubits() {
        for seed in 0..5 {
            check_gradient(2, 2, 6, seed);
        }
    }

    #[test]
    fn gradient_matches_central_differences_qutrits() {
        check_gradient(2, 3, 5, 11);
        check_gradient(3, 3, 4, 12);
    }

    #[test]
    fn two_level_path_matches_general_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let v: Vec<C64> = (0..6).map(|_| complex_gaussian(&mut rng)).collect();
            let mut g1 = alloc::vec![ZERO; 6];
            let f1 = member_term(&v, 3, 2, Some(&mut g1));
            let mut x = alloc::vec![ZERO; 4];
            for a in 0..3 {
                for i in 0..2 {
                    for j in 0..2 {
                        x[i * 2 + j] += v[a * 2 + i] * v[a * 2 + j].conj();
                    }
                }
            }
            let q = x[0].re + x[3].re;
            let (f2, gm) = general(&x, 2, q, log2(q), true);
            assert!((f1 - f2).abs() < 1e-12);
            let gm = gm.unwrap();
            for a in 0..3 {
                for i in 0..2 {
                    let z = gm[i * 2] * v[a * 2] + gm[i * 2 + 1] * v[a * 2 + 1];
                    assert!((z - g1[a * 2 + i]).norm_sqr() < 1e-20);
                }
            }
        }
    }
}
