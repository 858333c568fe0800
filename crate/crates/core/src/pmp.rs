//! Costate equations and control characterizations for every controlled strategy.
//!
//! Each adjoint field is `-∂H/∂x` of the strategy's Hamiltonian
//! `H = L(x, u) + φ·f(x, u)`, and each control is the stationary point of `H`
//! in `u`, clamped to `[0, 1]`. The last costate (φ3 for SIR, φ4 for SEIR)
//! has a zero derivative and a zero terminal value, so it vanishes
//! identically; it is kept so the formulas read as in the derivation.

use crate::error::{Error, Result};
use crate::models::Strategy;

/// Projection onto the admissible control interval.
#[inline]
pub fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// `dφ/dt` for `strategy` at frozen state `x` and controls `u`.
pub fn adjoint_field(strategy: &Strategy, x: &[f64], u: &[f64], phi: &[f64]) -> Result<Vec<f64>> {
    if !strategy.tag().is_controlled() {
        return Err(Error::NoAdjoint(strategy.tag()));
    }
    strategy.check_arity(x, u)?;
    check_costate(strategy, phi)?;
    let mut out = vec![0.0; phi.len()];
    adjoint_field_into(strategy, x, u, phi, &mut out);
    Ok(out)
}

fn check_costate(strategy: &Strategy, phi: &[f64]) -> Result<()> {
    if phi.len() == strategy.n_states() {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "strategy {} has {} costates, got {}",
            strategy.tag(),
            strategy.n_states(),
            phi.len()
        )))
    }
}

/// Unchecked variant of [`adjoint_field`] used inside the sweep.
/// Uncontrolled strategies produce a zero field.
pub fn adjoint_field_into(strategy: &Strategy, x: &[f64], u: &[f64], phi: &[f64], out: &mut [f64]) {
    match *strategy {
        Strategy::SirUncontrolled(_) | Strategy::SeirUncontrolled(_) => out.fill(0.0),

        Strategy::SirVaccination { params, .. } => {
            let (nu, delta) = (params.infection_rate, params.recovery_rate);
            let (s, i) = (x[0], x[1]);
            let eta = u[0];
            out[0] = nu * i * (phi[0] - phi[1]) + eta * (phi[0] - phi[2]);
            out[1] = -1.0 + nu * s * (phi[0] - phi[1]) + delta * (phi[1] - phi[2]);
            out[2] = 0.0;
        }

        Strategy::SirTreatmentEducation { params, c1, .. } => {
            let (nu, delta) = (params.infection_rate, params.recovery_rate);
            let (s, i) = (x[0], x[1]);
            let (treat, edu) = (u[0], u[1]);
            out[0] = nu * i * (phi[0] - phi[1]) + edu * (phi[0] - phi[2]);
            out[1] = -c1
                + nu * s * (phi[0] - phi[1])
                + delta * (phi[1] - phi[2])
                + treat * (phi[1] - phi[2]);
            out[2] = 0.0;
        }

        Strategy::SeirVaccination { params, .. } => {
            seir_vaccination_adjoint(&params, 0.0, 1.0, x, u[0], phi, out);
        }

        Strategy::SeirVaccinationExposedWeighted { params, k1, k2, .. } => {
            seir_vaccination_adjoint(&params, k1, k2, x, u[0], phi, out);
        }

        Strategy::SeirTreatmentEducation { params, d1, .. } => {
            let (nu, rho, delta) = (
                params.transmission_rate,
                params.infectious_rate,
                params.recovery_rate,
            );
            let (s, i) = (x[0], x[2]);
            let (treat, edu) = (u[0], u[1]);
            out[0] = nu * i * (phi[0] - phi[1]) + edu * (phi[0] - phi[3]);
            out[1] = rho * (phi[1] - phi[2]);
            out[2] = -d1
                + nu * s * (phi[0] - phi[1])
                + delta * (phi[2] - phi[3])
                + treat * (phi[2] - phi[3]);
            out[3] = 0.0;
        }
    }
}

/// SEIR vaccination adjoints with running cost `we·e + wi·i + (w/2)η²`.
fn seir_vaccination_adjoint(
    params: &crate::models::SeirParams,
    we: f64,
    wi: f64,
    x: &[f64],
    eta: f64,
    phi: &[f64],
    out: &mut [f64],
) {
    let (nu, rho, delta) = (
        params.transmission_rate,
        params.infectious_rate,
        params.recovery_rate,
    );
    let (s, i) = (x[0], x[2]);
    out[0] = nu * i * (phi[0] - phi[1]) + eta * (phi[0] - phi[3]);
    out[1] = -we + rho * (phi[1] - phi[2]);
    out[2] = -wi + nu * s * (phi[0] - phi[1]) + delta * (phi[2] - phi[3]);
    out[3] = 0.0;
}

/// Optimal controls at state `x` and costate `phi`, clamped to `[0, 1]`.
pub fn characterize_control(strategy: &Strategy, x: &[f64], phi: &[f64]) -> Result<Vec<f64>> {
    if x.len() != strategy.n_states() {
        return Err(Error::Shape(format!(
            "strategy {} expects a state of dimension {}, got {}",
            strategy.tag(),
            strategy.n_states(),
            x.len()
        )));
    }
    check_costate(strategy, phi)?;
    let mut out = vec![0.0; strategy.n_controls()];
    characterize_control_into(strategy, x, phi, &mut out);
    Ok(out)
}

pub fn characterize_control_into(strategy: &Strategy, x: &[f64], phi: &[f64], out: &mut [f64]) {
    match *strategy {
        Strategy::SirUncontrolled(_) | Strategy::SeirUncontrolled(_) => {}
        Strategy::SirVaccination { b, .. } => {
            out[0] = clamp_unit(x[0] / b * (phi[0] - phi[2]));
        }
        Strategy::SirTreatmentEducation { c2, c3, .. } => {
            out[0] = clamp_unit(x[1] / c2 * (phi[1] - phi[2]));
            out[1] = clamp_unit(x[0] / c3 * (phi[0] - phi[2]));
        }
        Strategy::SeirVaccination { d: w, .. }
        | Strategy::SeirVaccinationExposedWeighted { k3: w, .. } => {
            out[0] = clamp_unit(x[0] / w * (phi[0] - phi[3]));
        }
        Strategy::SeirTreatmentEducation { d2, d3, .. } => {
            out[0] = clamp_unit(x[2] / d2 * (phi[2] - phi[3]));
            out[1] = clamp_unit(x[0] / d3 * (phi[0] - phi[3]));
        }
    }
}

/// `H = L(x, u) + φ·f(x, u)`.
pub fn hamiltonian(strategy: &Strategy, x: &[f64], u: &[f64], phi: &[f64]) -> Result<f64> {
    strategy.check_arity(x, u)?;
    check_costate(strategy, phi)?;
    let mut f = vec![0.0; x.len()];
    strategy.field_into(x, u, &mut f);
    let coupling: f64 = phi.iter().zip(&f).map(|(p, fi)| p * fi).sum();
    Ok(strategy.running_cost_unchecked(x, u) + coupling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{SeirParams, SirParams, StrategyTag};

    fn sir_vacc(b: f64) -> Strategy {
        Strategy::SirVaccination {
            params: SirParams::default(),
            b,
        }
    }

    #[test]
    fn sir_vaccination_adjoint_at_zero_costate() {
        let d = adjoint_field(&sir_vacc(1.0), &[0.6, 0.3, 0.1], &[0.4], &[0.0; 3]).unwrap();
        assert_eq!(d, vec![0.0, -1.0, 0.0]);
    }

    #[test]
    fn exposed_weighted_adjoint_at_zero_costate() {
        let strat = Strategy::SeirVaccinationExposedWeighted {
            params: SeirParams::default(),
            k1: 1.0,
            k2: 5.0,
            k3: 5.0,
        };
        let d = adjoint_field(&strat, &[0.5, 0.2, 0.2, 0.1], &[0.3], &[0.0; 4]).unwrap();
        assert_eq!(d, vec![0.0, -1.0, -5.0, 0.0]);
    }

    #[test]
    fn equal_costates_leave_only_source_terms() {
        let phi = [0.7; 4];
        let strat = Strategy::SeirTreatmentEducation {
            params: SeirParams::default(),
            d1: 2.0,
            d2: 5.0,
            d3: 5.0,
        };
        let d = adjoint_field(&strat, &[0.5, 0.2, 0.2, 0.1], &[0.3, 0.6], &phi).unwrap();
        assert_eq!(d, vec![0.0, 0.0, -2.0, 0.0]);
    }

    #[test]
    fn uncontrolled_has_no_adjoint() {
        let err = adjoint_field(
            &Strategy::SirUncontrolled(SirParams::default()),
            &[0.9, 0.1, 0.0],
            &[],
            &[0.0; 3],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoAdjoint(StrategyTag::SirUncontrolled)));
    }

    #[test]
    fn characterization_examples() {
        let strat = sir_vacc(1.0);
        assert_eq!(characterize_control(&strat, &[0.5, 0.3, 0.2], &[0.0; 3]).unwrap(), vec![0.0]);
        assert_eq!(
            characterize_control(&strat, &[0.5, 0.3, 0.2], &[10.0, 0.0, 0.0]).unwrap(),
            vec![1.0]
        );
        assert_eq!(
            characterize_control(&strat, &[0.5, 0.3, 0.2], &[1.0, 0.0, 0.0]).unwrap(),
            vec![0.5]
        );
        assert_eq!(
            characterize_control(&strat, &[0.5, 0.3, 0.2], &[-3.0, 0.0, 0.0]).unwrap(),
            vec![0.0]
        );
    }

    #[test]
    fn hamiltonian_by_hand() {
        let strat = sir_vacc(1.0);
        let x = [0.95, 0.05, 0.0];
        assert_eq!(hamiltonian(&strat, &x, &[0.0], &[0.0; 3]).unwrap(), 0.05);
        let h = hamiltonian(&strat, &x, &[0.1], &[1.0; 3]).unwrap();
        assert!((h - 0.055).abs() < 1e-15, "{h}");
    }

    #[test]
    fn hamiltonian_with_zero_costate_is_running_cost() {
        let strat = Strategy::SirTreatmentEducation {
            params: SirParams::default(),
            c1: 1.0,
            c2: 5.0,
            c3: 5.0,
        };
        let (x, u) = ([0.4, 0.3, 0.3], [0.2, 0.9]);
        assert_eq!(
            hamiltonian(&strat, &x, &u, &[0.0; 3]).unwrap(),
            strat.running_cost(&x, &u).unwrap()
        );
    }
}
