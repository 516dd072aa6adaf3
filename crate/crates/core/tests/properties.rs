mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ctc_core::analysis::{
    boosted_success, entropy_skew, parity_recursion, skew_classical, skew_noisy,
};
use ctc_core::catalog::{build_scenario, Params};
use ctc_core::engine::{bell_projections, project_with_pair};
use ctc_core::{compile_unitary, CtcModel, PureState, Simulator};
use num_complex::Complex64;
use proptest::prelude::*;

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bell_projections_are_complete(seed in any::<u64>()) {
        let c = common::random_sized_circuit(seed, 2, 3, 8);
        let set = bell_projections(&c).unwrap();
        prop_assert_eq!(set.len(), 1 << (2 * c.ctc_labels().len()));
        let total: f64 = set.iter().map(|e| e.norm_sqr).sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "total {}", total);
    }

    #[test]
    fn outputs_are_density_operators(seed in any::<u64>(), lambda in 0.05f64..1.0, k in 0.05f64..0.95) {
        let c = common::random_sized_circuit(seed, 2, 3, 8);
        let sim = Simulator::default();
        for m in [
            CtcModel::NoisyBell { lambda },
            CtcModel::Classical { k, floor: false },
            CtcModel::Classical { k, floor: true },
        ] {
            let r = sim.run(&c, &m).unwrap();
            prop_assert!(r.z > 0.0);
            prop_assert!((r.rho.trace() - 1.0).abs() < 1e-12);
            prop_assert!(r.rho.hermiticity_defect() < 1e-12);
            prop_assert!(r.rho.eigenvalues().iter().all(|&x| x > -1e-12));
        }
    }

    #[test]
    fn compiled_unitary_matches_gatewise_evolution(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let c = common::random_sized_circuit(seed, 2, 3, 8);
        let labels = c.labels();
        let mut s = PureState::scalar(Complex64::new(1.0, 0.0));
        for l in &labels {
            s = s.tensor(&common::random_qubit(&mut rng, l)).unwrap();
        }
        let u = compile_unitary(&c).unwrap();
        prop_assert!(u.is_unitary(1e-10));
        let v = u.matrix() * nalgebra::DVector::from_column_slice(s.amplitudes());
        let w = c.evolve(&s).unwrap();
        let gap = v.iter().zip(w.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(gap < 1e-12, "gap {}", gap);
    }

    #[test]
    fn relative_phase_of_the_pair_is_invisible(seed in any::<u64>(), chi in -PI..PI) {
        let c = common::random_sized_circuit(seed, 2, 3, 8);
        let pair = [
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(FRAC_1_SQRT_2, chi),
        ];
        let twisted = project_with_pair(&c, &pair).unwrap();
        let set = bell_projections(&c).unwrap();
        let b = &set.entries[0].state;
        let gap = twisted.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(gap < 1e-12);
    }

    #[test]
    fn skew_multiplies_the_odds(theta in 0.05f64..1.5, phase in -3.0f64..3.0, lambda in 0.01f64..1.0, k in 0.01f64..0.99) {
        let p = params(&[("psi_theta", theta), ("psi_phase", phase)]);
        let sc = build_scenario("cnot_gun", &p).unwrap();
        let prior = theta.cos().powi(2) / theta.sin().powi(2);
        let sim = Simulator::default();
        let cases = [
            (CtcModel::NoisyBell { lambda }, skew_noisy(lambda).unwrap().omega),
            (CtcModel::Classical { k, floor: false }, skew_classical(k).unwrap().omega),
        ];
        for (m, omega) in cases {
            let r = sim.run(&sc.circuit, &m).unwrap();
            let odds = r.rho.entry(0, 0).re / r.rho.entry(1, 1).re;
            prop_assert!((odds / (omega * prior) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn boosting_composes(p in 0.0f64..1.0, o1 in 0.0f64..50.0, o2 in 0.0f64..50.0) {
        let two = boosted_success(boosted_success(p, o1).unwrap(), o2).unwrap();
        let one = boosted_success(p, o1 * o2).unwrap();
        prop_assert!((two - one).abs() < 1e-12);
    }

    #[test]
    fn entropy_change_matches_direct_sum(
        raw in proptest::collection::vec(0.01f64..1.0, 2..8),
        omega in 0.01f64..40.0,
    ) {
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let h = |q: &[f64]| -q.iter().map(|x| x * x.ln()).sum::<f64>();
        let s0 = h(&probs);
        let a = probs[0];
        let z = (omega - 1.0) * a + 1.0;
        let mut skewed: Vec<f64> = probs.iter().map(|x| x / z).collect();
        skewed[0] = omega * a / z;
        let direct = h(&skewed) - s0;
        let r = entropy_skew(a, s0, omega).unwrap();
        prop_assert!((r.delta_s - direct).abs() < 1e-10, "{} vs {}", r.delta_s, direct);
    }

    #[test]
    fn parity_bias_never_grows(alphas in proptest::collection::vec(-1.0f64..1.0, 1..10)) {
        let r = parity_recursion(&alphas).unwrap();
        let mut prev = 0.5;
        for &e in &r.epsilons {
            prop_assert!(e <= prev + 1e-15);
            prev = e;
        }
        let prod: f64 = alphas.iter().map(|a| 2.0 * a * a - 1.0).product();
        prop_assert!((r.e2 - (1.0 + prod) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn chain_equals_single_gate_substitution(
        ts in 0.05f64..1.5, g1 in 0.05f64..1.5, g2 in 0.05f64..1.5, lambda in 0.05f64..1.0, k in 0.05f64..0.95,
    ) {
        let chain = build_scenario("backprop_chain", &params(&[("theta_s", ts), ("theta_g1", g1), ("theta_g2", g2)])).unwrap();
        let tg = (g1.sin() * g2.sin()).abs().asin();
        let single = build_scenario("backprop_single", &params(&[("theta_s", ts), ("theta_g", tg)])).unwrap();
        let sim = Simulator::default();
        for m in [CtcModel::ExactBell, CtcModel::NoisyBell { lambda }, CtcModel::Classical { k, floor: false }] {
            let a = sim.run(&chain.circuit, &m).unwrap();
            let b = sim.run(&single.circuit, &m).unwrap();
            let fa = ctc_core::analysis::flip_probability(&a, "c1", "probe").unwrap();
            let fb = ctc_core::analysis::flip_probability(&b, "ctl", "probe").unwrap();
            prop_assert!((fa - fb).abs() < 1e-12, "{:?}: {} vs {}", m, fa, fb);
        }
    }

    #[test]
    fn grandfather_trio_hits_each_orthogonal_state(theta in 0.0f64..PI, phase in -3.0f64..3.0) {
        let p = params(&[("psi_theta", theta), ("psi_phase", phase)]);
        for (name, label) in [("grandfather_not", "N"), ("grandfather_pf", "-"), ("grandfather_rot", "-N")] {
            let sc = build_scenario(name, &p).unwrap();
            let set = bell_projections(&sc.circuit).unwrap();
            for e in set.iter() {
                let want = if e.label == label { 1.0 } else { 0.0 };
                prop_assert!((e.norm_sqr - want).abs() < 1e-12, "{} {}", name, e.label);
            }
            prop_assert!(Simulator::default().run(&sc.circuit, &CtcModel::ExactBell).unwrap_err().is_paradox());
        }
    }
}
