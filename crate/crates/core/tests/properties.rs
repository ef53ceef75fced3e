use cobweb_core::measures::{
    cobweb_spectrum, marginal_spectra, ppt_report, scaling_entropy, splitting_entropy,
};
use cobweb_core::nogo::{cnot_disentangle, obstruction};
use cobweb_core::protocol::{
    branch_probabilities, generalized_target, joint_state, normalization_constants, normalization_constants_general,
    run_protocol,
};
use cobweb_core::qlinalg::{
    fidelity, hermitian_eigenvalues, partial_trace, partial_transpose, von_neumann_entropy, Tensor,
};
use cobweb_core::session::{run_session, DeliveryOrder};
use cobweb_core::zsa::project_qubit;
use cobweb_core::{
    BellOutcome, DensityMatrix, LinearOperator, OutcomeSelection, PureState, UnknownQubit, ZsaAmplitudes, C64,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

fn gaussian_matrix(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

fn random_density(seed: u64, n: usize) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian_matrix(&mut rng, 1 << n);
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m / tr).unwrap()
}

fn random_unitary(seed: u64, d: usize) -> LinearOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LinearOperator::unitary(gaussian_matrix(&mut rng, d).qr().q()).unwrap()
}

fn zsa(seed: u64, n: usize) -> ZsaAmplitudes {
    ZsaAmplitudes::random(&mut ChaCha8Rng::seed_from_u64(seed), n).unwrap()
}

fn qubit() -> impl Strategy<Value = UnknownQubit> {
    (0.0..=PI, 0.0..2.0 * PI).prop_map(|(t, p)| UnknownQubit::new(t, p).unwrap())
}

fn interior_qubit() -> impl Strategy<Value = UnknownQubit> {
    (0.05..PI - 0.05, 0.0..2.0 * PI).prop_map(|(t, p)| UnknownQubit::new(t, p).unwrap())
}

fn outcome() -> impl Strategy<Value = BellOutcome> {
    prop::sample::select(BellOutcome::ALL.to_vec())
}

fn max_abs(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn is_product(state: &PureState) -> bool {
    (1..=state.num_qubits()).all(|k| state.reduced_density(&[k]).unwrap().eigenvalues()[0] < 1e-10)
}

proptest! {
    #[test]
    fn tensor_associative(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (x, y, z) = (random_density(a, 1), random_density(b, 2), random_density(c, 1));
        let left = x.tensor(&y).tensor(&z);
        let right = x.tensor(&y.tensor(&z));
        prop_assert_eq!(left.dim(), 16);
        prop_assert!(max_abs(left.matrix(), right.matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product(a in any::<u64>(), b in any::<u64>(), na in 1usize..3, nb in 1usize..3) {
        let (x, y) = (random_density(a, na), random_density(b, nb));
        let joint = x.tensor(&y);
        let keep_a: Vec<usize> = (1..=na).collect();
        let keep_b: Vec<usize> = (na + 1..=na + nb).collect();
        prop_assert!(max_abs(partial_trace(&joint, &keep_a).unwrap().matrix(), x.matrix()) < 1e-12);
        prop_assert!(max_abs(partial_trace(&joint, &keep_b).unwrap().matrix(), y.matrix()) < 1e-12);
    }

    #[test]
    fn partial_transpose_involution(seed in any::<u64>(), n in 2usize..4, k in 1usize..4) {
        let k = k.min(n);
        let rho = random_density(seed, n);
        let once = partial_transpose(&rho, k).unwrap();
        let twice = once.partial_transpose(k).unwrap();
        prop_assert_eq!(twice.matrix(), rho.matrix());
        prop_assert!((once.trace() - C64::from(1.0)).norm() < 1e-12);
        prop_assert!(max_abs(once.matrix(), &once.matrix().adjoint()) < 1e-15);
    }

    #[test]
    fn two_qubit_pt_spectrum_sums_to_one(seed in any::<u64>()) {
        let pt = partial_transpose(&random_density(seed, 2), 2).unwrap();
        let sum: f64 = hermitian_eigenvalues(&pt).unwrap().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn entropy_unitarily_invariant(seed in any::<u64>(), useed in any::<u64>(), n in 1usize..4) {
        let rho = random_density(seed, n);
        let rotated = random_unitary(useed, 1 << n).conjugate(&rho).unwrap();
        prop_assert!((von_neumann_entropy(&rho) - von_neumann_entropy(&rotated)).abs() < 1e-9);
    }

    #[test]
    fn zsa_state_on_one_hot_support(seed in any::<u64>(), n in 2usize..9) {
        let z = zsa(seed, n);
        let s = z.build_state();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        for (i, a) in s.amplitudes().iter().enumerate() {
            if i.count_ones() != 1 {
                prop_assert_eq!(*a, C64::from(0.0));
            }
        }
    }

    #[test]
    fn single_marginal_spectrum(seed in any::<u64>(), n in 2usize..7, k in 1usize..7) {
        let z = zsa(seed, n);
        let k = k.min(n);
        let p = z.coeff(k).norm_sqr();
        let oracle = z.build_state().reduced_density(&[k]).unwrap();
        let closed = z.reduced_single(k).unwrap();
        prop_assert!(max_abs(oracle.matrix(), closed.matrix()) < 1e-11);
        let mut expected = [p, 1.0 - p];
        expected.sort_by(f64::total_cmp);
        let spectrum = oracle.eigenvalues();
        prop_assert!((spectrum[0] - expected[0]).abs() < 1e-10 && (spectrum[1] - expected[1]).abs() < 1e-10);
        prop_assert!((von_neumann_entropy(&oracle) - splitting_entropy(&z, k).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn projections(seed in any::<u64>(), n in 3usize..7, k in 1usize..7) {
        let z = zsa(seed, n);
        let k = k.min(n);
        let state = z.build_state();
        let (_, one) = project_qubit(&state, k, 1).unwrap();
        prop_assert!(is_product(&one));
        if n == 3 {
            let (_, zero) = project_qubit(&state, k, 0).unwrap();
            prop_assert!(zero.density().max_coherence() > 1e-6);
        }
    }

    #[test]
    fn phase_strip_round_trip(seed in any::<u64>(), n in 2usize..7) {
        let z = zsa(seed, n);
        let form = z.lu_phase_strip();
        let back = form.undo(&form.stripped_state()).unwrap();
        let original = z.build_state();
        for (a, b) in back.amplitudes().iter().zip(original.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn protocol_hits_target(seed in any::<u64>(), n in 3usize..7, q in qubit(), o in outcome()) {
        let z = zsa(seed, n);
        let t = run_protocol(&q, &z, OutcomeSelection::Forced(o)).unwrap();
        let target = generalized_target(&q, &z, o.reference_bit()).unwrap().renormalize().unwrap();
        prop_assert!(fidelity(t.final_state.vector(), &target).unwrap() >= 1.0 - 1e-10);
        prop_assert_eq!(t.cbits_sent, 2);
    }

    #[test]
    fn branch_probabilities_pair_up(seed in any::<u64>(), n in 3usize..7, q in qubit()) {
        let z = zsa(seed, n);
        let p = branch_probabilities(&joint_state(&q, &z).unwrap()).unwrap();
        prop_assert!(p.iter().all(|x| *x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((p[0] - p[1]).abs() < 1e-12 && (p[2] - p[3]).abs() < 1e-12);
        let closed = normalization_constants(&q, &z).unwrap().branch_probabilities();
        for (a, b) in p.iter().zip(closed) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn normalization_constants_match_norms(seed in any::<u64>(), n in 3usize..7, q in qubit()) {
        let z = zsa(seed, n);
        let closed = normalization_constants(&q, &z).unwrap();
        let general = normalization_constants_general(&q, &z).unwrap();
        for r in [0u8, 1] {
            let direct = 1.0 / generalized_target(&q, &z, r).unwrap().norm();
            prop_assert!((closed.for_reference(r) - direct).abs() < 1e-12 * direct);
            prop_assert!((general.for_reference(r) - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn session_is_protocol(seed in any::<u64>(), zseed in any::<u64>(), n in 3usize..7, q in qubit()) {
        let z = zsa(zseed, n);
        let s = run_session(&q, &z, seed, &DeliveryOrder::Sequential).unwrap();
        let p = run_protocol(&q, &z, OutcomeSelection::Sampled { seed }).unwrap();
        prop_assert_eq!(&s.transcript, &p);
        prop_assert_eq!(s.log.entries().len(), n - 1);
        prop_assert_eq!(s.ledger.cbits_total as usize, 2 * (n - 1));
        prop_assert!(s.log.entries().iter().all(|m| m.from == 1 && m.payload.decode().unwrap() == p.outcome));
    }

    #[test]
    fn ppt_closed_form(seed in any::<u64>()) {
        let r = ppt_report(&zsa(seed, 3)).unwrap();
        prop_assert!(r.max_deviation() < 1e-10);
        prop_assert!(r.eigenvalues[3] < -1e-12);
    }

    #[test]
    fn cobweb_spectrum_both_marginals(seed in any::<u64>(), q in qubit(), o in outcome()) {
        let z = zsa(seed, 3);
        let c = run_protocol(&q, &z, OutcomeSelection::Forced(o)).unwrap().final_state;
        let closed = cobweb_spectrum(&c).unwrap();
        let (b, cc) = marginal_spectra(c.vector()).unwrap();
        for spectrum in [b, cc] {
            prop_assert!((spectrum[0] - closed.eta_minus).abs() < 1e-10);
            prop_assert!((spectrum[1] - closed.eta_plus).abs() < 1e-10);
        }
    }

    #[test]
    fn disentangler(seed in any::<u64>(), q in qubit()) {
        let z = zsa(seed, 3);
        let c = run_protocol(&q, &z, OutcomeSelection::Forced(BellOutcome::PsiMinus)).unwrap().final_state;
        let d = cnot_disentangle(&c).unwrap();
        prop_assert!(d.success_fidelity >= 1.0 - 1e-12);
        prop_assert!((d.success_probability - d.closed_form_probability).abs() < 1e-12);
    }

    #[test]
    fn obstruction_matches_overlap(seed in any::<u64>(), q in interior_qubit()) {
        let r = obstruction(&q, &zsa(seed, 3)).unwrap();
        prop_assert!((r.value - r.oracle).abs() < 1e-11);
        if r.re_c2_c3_conj.abs() > 1e-9 {
            prop_assert!(r.value > 0.0);
        }
    }
}

#[test]
fn output_fidelity_uniform_over_bloch_grid() {
    let z = zsa(17, 4);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        for j in 0..20 {
            let q = UnknownQubit::new(PI * i as f64 / 19.0, 2.0 * PI * j as f64 / 20.0).unwrap();
            for o in BellOutcome::ALL {
                let t = run_protocol(&q, &z, OutcomeSelection::Forced(o)).unwrap();
                let target = generalized_target(&q, &z, o.reference_bit()).unwrap().renormalize().unwrap();
                worst = worst.max(1.0 - fidelity(t.final_state.vector(), &target).unwrap());
            }
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn basis_inputs_split_product_and_entangled() {
    let z = zsa(5, 3);
    let cobweb = |q: &UnknownQubit, o| run_protocol(q, &z, OutcomeSelection::Forced(o)).unwrap().final_state;
    assert!(cobweb(&UnknownQubit::zero(), BellOutcome::PsiMinus).is_product());
    assert!(!cobweb(&UnknownQubit::zero(), BellOutcome::PhiMinus).is_product());
    assert!(cobweb(&UnknownQubit::one(), BellOutcome::PhiMinus).is_product());
    assert!(!cobweb(&UnknownQubit::one(), BellOutcome::PsiMinus).is_product());
}

#[test]
fn scaling_monotone_and_ebits_match() {
    let mut previous = f64::INFINITY;
    for n in 2..=64 {
        let e = scaling_entropy(n);
        assert!(e < previous);
        previous = e;
    }
    assert!(scaling_entropy(1 << 20) < 1e-4);
    for n in 3..=8 {
        let s = run_session(&UnknownQubit::zero(), &ZsaAmplitudes::roots_of_unity(n).unwrap(), 0, &DeliveryOrder::Sequential).unwrap();
        assert!((s.ledger.ebits_consumed - scaling_entropy(n)).abs() < 1e-12);
        assert_eq!(s.ledger.cbits_total as usize, 2 * (n - 1));
    }
}
