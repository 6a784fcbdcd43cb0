use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qha_core::conv::{conv_op_op, ps_convolve};
use qha_core::fourier::symplectic_fourier;
use qha_core::gabor::{gabor_matrix, reconstruct_wigner, twisted_convolve, Lattice4, PhaseConstant, SubLattice, TwistPhase};
use qha_core::io::{emit_operator, emit_psf, emit_signal, parse_operator, parse_psf, parse_signal};
use qha_core::operator::{
    is_positive, random_signal, random_state, trace, FiniteRankOperator, LinearOperator,
};
use qha_core::quantization::{fourier_tau_wigner, op_tau, tau_wigner_op};
use qha_core::schwartz::WeightParam;
use qha_core::tfa::gaussian;
use qha_core::{make_grid, GridSpec, LatticePoint, PhaseSpaceFunction, Tau};

fn grids() -> impl Strategy<Value = GridSpec> {
    (prop::sample::select(vec![8usize, 12, 16]), 2.0f64..6.0).prop_map(|(n, l)| make_grid(n, l).unwrap())
}

fn taus() -> impl Strategy<Value = Tau> {
    (0.0f64..=1.0).prop_map(|t| Tau::new(t).unwrap())
}

fn random_op(g: GridSpec, seed: u64, rank: usize) -> FiniteRankOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = (0..rank).map(|_| (random_signal(g, &mut rng), random_signal(g, &mut rng))).collect();
    FiniteRankOperator::new(g, terms).unwrap()
}

fn random_psf(g: GridSpec, seed: u64) -> PhaseSpaceFunction {
    let a = random_signal(g, &mut ChaCha8Rng::seed_from_u64(seed));
    let b = random_signal(g, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a));
    PhaseSpaceFunction::from_index_fn(g, |i, j| a.values()[i] * b.values()[j] + a.values()[j].conj())
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weight_is_submultiplicative_and_even(
        s in 0.0f64..6.0, x in -10.0f64..10.0, w in -10.0f64..10.0, u in -10.0f64..10.0, v in -10.0f64..10.0,
    ) {
        let p = WeightParam::new(s).unwrap();
        prop_assert!(p.at(x + u, w + v) <= p.at(x, w) * p.at(u, v) * (1.0 + 1e-12));
        prop_assert_eq!(p.at(-x, -w), p.at(x, w));
        prop_assert!(p.at(x, w) >= 1.0);
    }

    #[test]
    fn symplectic_transform_is_unitary_involution(g in grids(), seed in any::<u64>()) {
        let a = random_psf(g, seed);
        let fa = symplectic_fourier(&a);
        prop_assert!(symplectic_fourier(&fa).rel_diff(&a) < 1e-12);
        prop_assert!((fa.norm() - a.norm()).abs() < 1e-12 * a.norm());
    }

    // pi_tau(z)* = pi_{1-tau}(-z) on the lattice except where -z leaves the grid (offset -N/2)
    #[test]
    fn spreading_of_adjoint_is_reflected_conjugate(g in grids(), seed in any::<u64>(), t in taus()) {
        let n = g.n();
        let s = random_op(g, seed, 2);
        let lhs = fourier_tau_wigner(&s.adjoint(), t);
        let rhs = fourier_tau_wigner(&s, t.complement());
        let scale = rhs.values().max_abs();
        for i in 1..n {
            for j in 1..n {
                let v = rhs.values().get(n - i, n - j).conj();
                prop_assert!((lhs.values().get(i, j) - v).norm() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn wigner_integrates_to_trace(g in grids(), seed in any::<u64>(), t in taus()) {
        let s = random_op(g, seed, 3);
        let w = tau_wigner_op(&s, t);
        prop_assert!(close(w.values().integral(), trace(&s).1, 1e-12));
    }

    #[test]
    fn quantization_inverts_wigner(g in grids(), seed in any::<u64>(), t in taus()) {
        let s = random_op(g, seed, 2);
        let back = op_tau(&tau_wigner_op(&s, t), t).unwrap();
        prop_assert!(back.kernel().rel_diff(&s.kernel()) < 1e-11);
    }

    #[test]
    fn symbol_conversion_matches_direct(g in grids(), seed in any::<u64>(), t in taus(), t2 in taus()) {
        let s = random_op(g, seed, 2);
        let converted = tau_wigner_op(&s, t).convert_to(t2);
        prop_assert!(converted.values().rel_diff(tau_wigner_op(&s, t2).values()) < 1e-12);
    }

    #[test]
    fn wigner_is_linear(g in grids(), seed in any::<u64>(), t in taus(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let c = Complex64::new(re, im);
        let s = random_op(g, seed, 1);
        let r = random_op(g, seed.wrapping_add(1), 2);
        let lhs = tau_wigner_op(&s.scale(c).add(&r).unwrap(), t);
        let rhs = tau_wigner_op(&s, t).values().scale(c).add(tau_wigner_op(&r, t).values()).unwrap();
        prop_assert!(lhs.values().max_abs_diff(&rhs) < 1e-12 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn operator_convolution_commutes_and_integrates(g in grids(), seed in any::<u64>()) {
        let s = random_op(g, seed, 2);
        let t = random_op(g, seed.wrapping_mul(3), 1);
        let st = conv_op_op(&s, &t).unwrap();
        prop_assert!(st.rel_diff(&conv_op_op(&t, &s).unwrap()) < 1e-12);
        prop_assert!(close(st.integral(), trace(&s).1 * trace(&t).1, 1e-11));
    }

    #[test]
    fn function_convolution_commutes(g in grids(), seed in any::<u64>()) {
        let a = random_psf(g, seed);
        let b = random_psf(g, seed.wrapping_add(7));
        prop_assert!(ps_convolve(&a, &b).unwrap().rel_diff(&ps_convolve(&b, &a).unwrap()) < 1e-12);
    }

    #[test]
    fn random_states_are_deterministic_positive_and_normalized(g in grids(), seed in any::<u64>(), rank in 1usize..4) {
        let s = random_state(g, rank, seed).unwrap();
        prop_assert_eq!(&s, &random_state(g, rank, seed).unwrap());
        prop_assert!((trace(&s).1 - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(is_positive(&s, None).positive);
    }

    #[test]
    fn emit_then_parse_is_identity(g in grids(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_signal(g, &mut rng);
        prop_assert_eq!(parse_signal(&emit_signal(&f)).unwrap(), f);
        let s = random_op(g, seed, 2);
        prop_assert_eq!(parse_operator(&emit_operator(&s)).unwrap(), s);
        let a = random_psf(g, seed);
        prop_assert_eq!(parse_psf(&emit_psf(&a)).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn twisted_convolution_is_bilinear(seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let g = make_grid(8, 2.0).unwrap();
        let lat = SubLattice::new(g, 1).unwrap();
        let rand4 = |k: u64| {
            let v = random_signal(make_grid(4096, 64.0).unwrap(), &mut ChaCha8Rng::seed_from_u64(seed ^ k));
            Lattice4::from_fn(lat, move |a, b, c, d| v.values()[((a * 8 + b) * 8 + c) * 8 + d])
        };
        let (f, f2, h) = (rand4(1), rand4(2), rand4(3));
        let c = Complex64::new(re, im);
        for phase in [TwistPhase::Theta, TwistPhase::NegTheta, TwistPhase::Off] {
            let lhs = twisted_convolve(&f.scale(c).add(&f2).unwrap(), &h, phase).unwrap();
            let rhs = twisted_convolve(&f, &h, phase).unwrap().scale(c)
                .add(&twisted_convolve(&f2, &h, phase).unwrap()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-11 * rhs.max_abs().max(1.0));
        }
    }

    #[test]
    fn reconstruction_is_linear_and_exact(seed in any::<u64>(), t in taus()) {
        let g = make_grid(8, 2.0).unwrap();
        let phi = gaussian(g).normalized().unwrap();
        let s = random_op(g, seed, 1);
        let r = random_op(g, seed.wrapping_add(5), 1);
        let pts: Vec<LatticePoint> = [(0, 0), (1, -1), (-2, 3)].iter().map(|(p, q)| LatticePoint::new(g, *p, *q).unwrap()).collect();
        let rec = |op: &FiniteRankOperator| {
            reconstruct_wigner(&gabor_matrix(op, &phi, 1).unwrap(), t, &pts, PhaseConstant::Derived).unwrap()
        };
        let sum = rec(&s.add(&r).unwrap());
        let (a, b) = (rec(&s), rec(&r));
        let w = tau_wigner_op(&s.add(&r).unwrap(), t);
        for k in 0..pts.len() {
            prop_assert!(close(sum[k], a[k] + b[k], 1e-11));
            prop_assert!(close(sum[k], w.values().at(&pts[k]), 1e-10));
        }
    }
}
