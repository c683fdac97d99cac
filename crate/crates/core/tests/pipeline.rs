use proptest::prelude::*;
use splinewave_core::assembly::SystemMatrices;
use splinewave_core::derham2d::{BoundaryCondition, DeRhamPair};
use splinewave_core::geometry::{quarter_annulus, unit_square, Coefficient};
use splinewave_core::reference::analytic_mode;
use splinewave_core::solver::{energy, max_relative_drift, run, Method, RunOptions, SolverState, Stepper};

fn annulus_system(p: usize, e: usize, bc: BoundaryCondition) -> SystemMatrices {
    let pair = DeRhamPair::new((p, p), (e, e), bc).unwrap();
    SystemMatrices::new(pair, quarter_annulus(1.0, 2.0).unwrap(), Coefficient::SineProduct).unwrap()
}

fn state_from(sys: &SystemMatrices, seed: &[f64]) -> SolverState {
    let mut s = SolverState::zeros(sys);
    let n = seed.len();
    for (i, x) in s.v.iter_mut().chain(s.phi.iter_mut()).enumerate() {
        *x = seed[i % n] * (1.0 + (i / n) as f64).recip();
    }
    s
}

fn bc_of(mixed: bool) -> BoundaryCondition {
    if mixed {
        BoundaryCondition::MixedPeriodic
    } else {
        BoundaryCondition::Dirichlet
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_is_conserved_for_any_data(
        seed in prop::collection::vec(-1.0f64..1.0, 7),
        k in 0.01f64..0.5,
        p in 2usize..=3,
        mixed in any::<bool>(),
        galerkin in any::<bool>(),
    ) {
        let sys = annulus_system(p, 4, bc_of(mixed));
        let method = if galerkin { Method::Galerkin } else { Method::QuasiInterpolation };
        let stepper = Stepper::new(&sys, method, k).unwrap();
        let mut s = state_from(&sys, &seed);
        let e0 = energy(&sys, &s);
        prop_assume!(e0 > 1e-6);
        for _ in 0..10 {
            stepper.step(&mut s).unwrap();
        }
        prop_assert!((energy(&sys, &s) - e0).abs() <= 1e-12 * e0);
    }

    #[test]
    fn stepping_back_recovers_the_start(
        seed in prop::collection::vec(-1.0f64..1.0, 5),
        k in 0.01f64..0.3,
        mixed in any::<bool>(),
    ) {
        let sys = annulus_system(3, 4, bc_of(mixed));
        for method in [Method::QuasiInterpolation, Method::Galerkin] {
            let forward = Stepper::new(&sys, method, k).unwrap();
            let backward = Stepper::new(&sys, method, -k).unwrap();
            let start = state_from(&sys, &seed);
            let mut s = start.clone();
            for _ in 0..5 {
                forward.step(&mut s).unwrap();
            }
            for _ in 0..5 {
                backward.step(&mut s).unwrap();
            }
            let diff = s.v.iter().zip(&start.v).chain(s.phi.iter().zip(&start.phi))
                .map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(diff <= 1e-10, "{} {}", method.name(), diff);
        }
    }

    #[test]
    fn projectors_reproduce_discrete_fields(
        seed in prop::collection::vec(-1.0f64..1.0, 6),
        p in 2usize..=3,
        mixed in any::<bool>(),
    ) {
        let pair = DeRhamPair::new((p, p), (5, 6), bc_of(mixed)).unwrap();
        let v: Vec<f64> = (0..pair.x1_dim()).map(|i| seed[i % 6] + 0.01 * i as f64).collect();
        let phi: Vec<f64> = (0..pair.x2_dim()).map(|i| seed[(i + 3) % 6] - 0.02 * i as f64).collect();
        let v2 = pair.project_pi1(|xi| pair.eval_x1(&v, xi)).coeffs;
        let phi2 = pair.project_pi2(|xi| pair.eval_x2(&phi, xi)).coeffs;
        let dv = v.iter().zip(&v2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let dp = phi.iter().zip(&phi2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(dv <= 1e-11 && dp <= 1e-11, "{} {}", dv, dp);
    }
}

#[test]
fn analytic_mode_converges_at_third_order() {
    let wave = analytic_mode(1, 1).unwrap();
    let mut errors = Vec::new();
    for e in [4, 8, 16] {
        let pair = DeRhamPair::new((3, 3), (e, e), BoundaryCondition::Dirichlet).unwrap();
        let sys = SystemMatrices::new(pair, unit_square(), Coefficient::Constant(1.0)).unwrap();
        let opts = RunOptions { k: 1e-3, steps: 50, energy_stride: 10, error_quadrature: 6 };
        let out = run(&sys, Method::QuasiInterpolation, wave.initial_state(&sys), Some(&wave), opts).unwrap();
        assert!(max_relative_drift(&out.energy) <= 1e-13);
        errors.push(out.errors.unwrap().energy_inf);
    }
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 2.7, "{errors:?}");
    }
}
