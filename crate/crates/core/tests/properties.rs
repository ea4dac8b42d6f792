use entlab_core::decomp::{
    avg_entanglement, measure_memory_orthogonal, measure_memory_povm, random_basis, remix, MemoryPOVM,
    OptimizerConfig, UnitaryMixer,
};
use entlab_core::experiments::{formation_budget, info_ledger, proof_chain_check};
use entlab_core::measures::{mutual_information, qrelative_entropy, reduced_entropy, vn_entropy};
use entlab_core::qmat::{haar_unitary, herm_eig, isometry_residual, partial_trace, partial_transpose, tensor};
use entlab_core::ree::{ree, ree_extension_closed};
use entlab_core::states::{
    gen_random_density, gen_random_pure, pure_extension, purify, schmidt, DensityMatrix,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dims() -> impl Strategy<Value = [usize; 2]> {
    (1usize..=3, 2usize..=3).prop_map(|(a, b)| [a + 1, b])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), d in dims()) {
        let a = gen_random_density(&[d[0]], d[0], seed).unwrap();
        let b = gen_random_density(&[d[1]], d[1], seed ^ 1).unwrap();
        let ab = tensor(a.matrix(), b.matrix()).unwrap();
        let back = partial_trace(&ab, &d, &[0]).unwrap();
        prop_assert!(back.max_abs_diff(a.matrix()) <= 1e-12);
        let twice = partial_transpose(&partial_transpose(&ab, &d, 1).unwrap(), &d, 1).unwrap();
        prop_assert!(twice.max_abs_diff(&ab) == 0.0);
    }

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), d in dims(), rank in 1usize..=4) {
        let n = d[0] * d[1];
        let rho = gen_random_density(&d, rank.min(n), seed).unwrap();
        let e = herm_eig(rho.matrix()).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(rho.matrix()) <= 1e-12);
        prop_assert!(e.values().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(isometry_residual(e.vectors()) <= 1e-12);
    }

    #[test]
    fn entropies_are_bounded(seed in any::<u64>(), d in dims()) {
        let rho = gen_random_density(&d, d[0] * d[1], seed).unwrap();
        let s = vn_entropy(&rho).value();
        prop_assert!(s >= 0.0 && s <= libm::log2((d[0] * d[1]) as f64) + 1e-12);
        let sigma = gen_random_density(&d, d[0] * d[1], seed ^ 7).unwrap();
        prop_assert!(qrelative_entropy(&rho, &sigma).unwrap().value() >= 0.0);
        prop_assert!(qrelative_entropy(&rho, &rho).unwrap().value() <= 1e-10);
    }

    #[test]
    fn schmidt_forms_reconstruct(seed in any::<u64>(), d in dims()) {
        let psi = gen_random_pure(&d, seed).unwrap();
        let f = schmidt(&psi).unwrap();
        prop_assert!((f.reconstruct().overlap(&psi) - 1.0).abs() <= 1e-10);
        let s: f64 = f.probabilities().iter().sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn remixing_preserves_the_state(seed in any::<u64>(), rank in 1usize..=4, extra in 0usize..3) {
        let rho = gen_random_density(&[2, 2], rank, seed).unwrap();
        let ext = purify(&rho, rank + extra).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mixer = UnitaryMixer::haar(rank + extra, &mut rng);
        let eps = remix(&ext, &mixer).unwrap();
        prop_assert!(eps.reconstruction_residual() <= 1e-8);
        prop_assert!(eps.len() <= rank + extra);
        let basis = random_basis(rank + extra, &mut rng);
        let m = measure_memory_orthogonal(&ext, &basis).unwrap();
        prop_assert!((m.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        let povm = MemoryPOVM::random(rank + extra, 3, &mut rng).unwrap();
        prop_assert!(measure_memory_povm(&ext, &povm).unwrap().reconstruction_residual() <= 1e-8);
    }

    #[test]
    fn generator_mixers_are_unitary(params in proptest::collection::vec(-3.0f64..3.0, 16)) {
        let u = UnitaryMixer::from_generator(4, &params).unwrap();
        prop_assert!(isometry_residual(u.unitary()) <= 1e-10);
    }

    #[test]
    fn decomposition_identities(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = gen_random_density(&[2, 2], rank, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let eps = remix(&purify(&rho, 4).unwrap(), &UnitaryMixer::haar(4, &mut rng)).unwrap();
        let avg = avg_entanglement(&eps).unwrap().value();
        let (closed, _) = ree_extension_closed(&eps).unwrap();
        prop_assert!((closed.value() - avg).abs() <= 1e-10);
        prop_assert!(proof_chain_check(&eps).unwrap().holds());
        let ledger = info_ledger(&eps).unwrap();
        let s = ledger.system_entropy.value();
        prop_assert!((ledger.first_loss() - s).abs() <= 1e-8);
        prop_assert!((ledger.second_loss() - s).abs() <= 1e-8);
        prop_assert!(formation_budget(&eps).unwrap().concavity_gap() >= -1e-8);
        let ext = pure_extension(&eps).unwrap();
        prop_assert!(mutual_information(&ext.density()).unwrap().value() >= 0.0);
    }

    #[test]
    fn mixing_never_exceeds_local_entropy(seed in any::<u64>()) {
        let rho = gen_random_density(&[2, 2], 2, seed).unwrap();
        let sb = reduced_entropy(&rho, &[1]).unwrap().value();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps = remix(&purify(&rho, 3).unwrap(), &UnitaryMixer::haar(3, &mut rng)).unwrap();
        prop_assert!(avg_entanglement(&eps).unwrap().value() <= sb + 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ree_is_local_unitary_invariant_and_bracketed(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = gen_random_density(&[2, 2], rank, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = tensor(&haar_unitary(2, &mut rng), &haar_unitary(2, &mut rng)).unwrap();
        let moved: DensityMatrix = rho.conjugate_by(&u);
        let cfg = OptimizerConfig::default().with_restarts(8);
        let a = ree(&rho, &cfg).unwrap();
        let b = ree(&moved, &cfg).unwrap();
        prop_assert!((a.value.value() - b.value.value()).abs() <= 1e-4);
        prop_assert!(a.ppt_lower.value() <= a.value.value() + 1e-6);
    }
}
