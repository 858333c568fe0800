use ebola_ocp::models::{SeirParams, SirParams};
use ebola_ocp::{pmp, Strategy, StrategyTag};
use proptest::prelude::*;

const STEP: f64 = 1e-5;

fn controlled(scale: f64) -> Vec<Strategy> {
    let (sir, seir) = (SirParams::default(), SeirParams::default());
    vec![
        Strategy::SirVaccination { params: sir, b: scale },
        Strategy::SirTreatmentEducation { params: sir, c1: 1.0, c2: 5.0 * scale, c3: 5.0 * scale },
        Strategy::SeirVaccination { params: seir, d: 5.0 * scale },
        Strategy::SeirVaccinationExposedWeighted { params: seir, k1: 1.0, k2: 5.0, k3: 5.0 * scale },
        Strategy::SeirTreatmentEducation { params: seir, d1: 1.0, d2: 5.0 * scale, d3: 5.0 * scale },
    ]
}

fn mixed_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn bumped(v: &[f64], j: usize, h: f64) -> Vec<f64> {
    let mut w = v.to_vec();
    w[j] += h;
    w
}

fn h(s: &Strategy, x: &[f64], u: &[f64], phi: &[f64]) -> f64 {
    pmp::hamiltonian(s, x, u, phi).unwrap()
}

proptest! {
    #[test]
    fn adjoint_is_minus_state_gradient_of_the_hamiltonian(
        x in prop::collection::vec(0.0f64..1.0, 4),
        u in prop::collection::vec(0.0f64..=1.0, 2),
        phi in prop::collection::vec(-5.0f64..5.0, 4),
    ) {
        for s in controlled(1.0) {
            let n = s.n_states();
            let (x, u, phi) = (&x[..n], &u[..s.n_controls()], &phi[..n]);
            let adj = pmp::adjoint_field(&s, x, u, phi).unwrap();
            for (j, &a) in adj.iter().enumerate() {
                let fd = (h(&s, &bumped(x, j, STEP), u, phi) - h(&s, &bumped(x, j, -STEP), u, phi)) / (2.0 * STEP);
                prop_assert!(mixed_error(a, -fd) < 1e-6, "{} component {j}: {a} vs {}", s.tag(), -fd);
            }
        }
    }

    #[test]
    fn model_field_is_the_costate_gradient_of_the_hamiltonian(
        x in prop::collection::vec(0.0f64..1.0, 4),
        u in prop::collection::vec(0.0f64..=1.0, 2),
        phi in prop::collection::vec(-5.0f64..5.0, 4),
    ) {
        for s in controlled(1.0) {
            let n = s.n_states();
            let (x, u, phi) = (&x[..n], &u[..s.n_controls()], &phi[..n]);
            let f = s.field(x, u).unwrap();
            for (j, &fj) in f.iter().enumerate() {
                let fd = (h(&s, x, u, &bumped(phi, j, STEP)) - h(&s, x, u, &bumped(phi, j, -STEP))) / (2.0 * STEP);
                prop_assert!(mixed_error(fj, fd) < 1e-6);
            }
        }
    }

    #[test]
    fn characterized_controls_lie_in_the_box(
        x in prop::collection::vec(0.0f64..1.0, 4),
        phi in prop::collection::vec(-50.0f64..50.0, 4),
    ) {
        for s in controlled(1.0) {
            let n = s.n_states();
            let c = pmp::characterize_control(&s, &x[..n], &phi[..n]).unwrap();
            prop_assert_eq!(c.len(), s.n_controls());
            prop_assert!(c.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn scaling_costates_and_control_weights_together_leaves_controls_unchanged(
        x in prop::collection::vec(0.0f64..1.0, 4),
        phi in prop::collection::vec(-3.0f64..3.0, 4),
        alpha in 0.25f64..4.0,
    ) {
        for (s, scaled) in controlled(1.0).into_iter().zip(controlled(alpha)) {
            let n = s.n_states();
            let scaled_phi: Vec<f64> = phi[..n].iter().map(|p| alpha * p).collect();
            let a = pmp::characterize_control(&s, &x[..n], &phi[..n]).unwrap();
            let b = pmp::characterize_control(&scaled, &x[..n], &scaled_phi).unwrap();
            for (p, q) in a.iter().zip(&b) {
                prop_assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn equal_costates_leave_only_the_running_cost(
        x in prop::collection::vec(0.0f64..1.0, 4),
        u in prop::collection::vec(0.0f64..=1.0, 2),
        level in -5.0f64..5.0,
    ) {
        for s in controlled(1.0) {
            let n = s.n_states();
            let (x, u) = (&x[..n], &u[..s.n_controls()]);
            let phi = vec![level; n];
            let lhs = h(&s, x, u, &phi);
            let cost = s.running_cost(x, u).unwrap();
            prop_assert!((lhs - cost).abs() < 1e-12);
            prop_assert_eq!(pmp::characterize_control(&s, x, &phi).unwrap(), vec![0.0; s.n_controls()]);
        }
    }
}

#[test]
fn structurally_constant_costate_has_no_dynamics() {
    for s in controlled(1.0) {
        let n = s.n_states();
        let x = vec![0.25; n];
        let phi: Vec<f64> = (0..n).map(|j| j as f64 - 1.5).collect();
        let u = vec![0.5; s.n_controls()];
        let adj = pmp::adjoint_field(&s, &x, &u, &phi).unwrap();
        assert_eq!(adj[n - 1], 0.0, "{}", s.tag());
    }
}

#[test]
fn uncontrolled_strategies_have_no_adjoint() {
    for tag in [StrategyTag::SirUncontrolled, StrategyTag::SeirUncontrolled] {
        let s = Strategy::uncontrolled(match tag.family() {
            ebola_ocp::ModelFamily::Sir => ebola_ocp::ModelParams::Sir(SirParams::default()),
            ebola_ocp::ModelFamily::Seir => ebola_ocp::ModelParams::Seir(SeirParams::default()),
        });
        let n = s.n_states();
        assert!(pmp::adjoint_field(&s, &vec![0.2; n], &[], &vec![0.0; n]).is_err());
    }
}
