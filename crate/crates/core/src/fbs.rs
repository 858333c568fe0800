//! Forward-backward sweep for the optimality systems.
//!
//! Each iteration integrates the state forward under the current controls,
//! integrates the costates backward from zero terminal values along that
//! state, recomputes the characterized controls node by node and blends them
//! into the current controls with weight `relaxation`. Iteration stops once
//! every control, state and costate component changes by at most
//! `tolerance` relative to its L1 norm over the grid.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::integrator::{integrate_backward, integrate_forward, ControlTrajectory, TimeGrid, Trajectory};
use crate::models::{validate_initial_state, ModelParams, Strategy};
use crate::pmp;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbsSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight of the freshly characterized control in the update, in `(0, 1]`.
    /// At 0.5 the SIR treatment/education sweep falls into a period-2 cycle.
    pub relaxation: f64,
    pub grid: TimeGrid,
}

impl FbsSettings {
    pub const DEFAULT_TOLERANCE: f64 = 1e-3;
    pub const DEFAULT_MAX_ITERATIONS: usize = 200;
    pub const DEFAULT_RELAXATION: f64 = 0.3;

    pub fn with_grid(grid: TimeGrid) -> Self {
        Self {
            grid,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::validation(
                "solver.tolerance",
                format!("must be positive, got {}", self.tolerance),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::validation("solver.max_iterations", "must be positive"));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::validation(
                "solver.relaxation",
                format!("must lie in (0, 1], got {}", self.relaxation),
            ));
        }
        Ok(())
    }
}

impl Default for FbsSettings {
    fn default() -> Self {
        Self {
            tolerance: Self::DEFAULT_TOLERANCE,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            relaxation: Self::DEFAULT_RELAXATION,
            grid: TimeGrid::default(),
        }
    }
}

/// Outcome of [`solve`]. `state` and `adjoint` are recomputed from the
/// returned `controls`, so the triple is mutually consistent.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub strategy: Strategy,
    pub state: Trajectory,
    pub adjoint: Trajectory,
    pub controls: ControlTrajectory,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Per iteration: the largest relative L1 change over all signals, minus
    /// the tolerance. Nonpositive once converged.
    pub residual_history: Vec<f64>,
}

impl SolveReport {
    /// `(time, value)` of the largest infected proportion.
    pub fn peak_infected(&self) -> (f64, f64) {
        peak_infected(&self.strategy, &self.state)
    }

    pub fn final_recovered(&self) -> f64 {
        final_recovered(&self.strategy, &self.state)
    }

    /// `max_k |u_k - characterize(x_k, φ_k)|` over nodes and controls.
    pub fn fixed_point_residual(&self) -> f64 {
        let mut c = vec![0.0; self.strategy.n_controls()];
        let mut worst: f64 = 0.0;
        for k in 0..self.state.len() {
            pmp::characterize_control_into(&self.strategy, self.state.row(k), self.adjoint.row(k), &mut c);
            for (u, ck) in self.controls.row(k).iter().zip(&c) {
                worst = worst.max((u - ck).abs());
            }
        }
        worst
    }
}

pub fn peak_infected(strategy: &Strategy, state: &Trajectory) -> (f64, f64) {
    let (k, v) = state.argmax(strategy.family().infected_index());
    (state.grid().node(k), v)
}

pub fn final_recovered(strategy: &Strategy, state: &Trajectory) -> f64 {
    state.last()[strategy.family().recovered_index()]
}

/// Trapezoidal quadrature of the running cost over the grid.
pub fn evaluate_objective(
    strategy: &Strategy,
    state: &Trajectory,
    controls: &ControlTrajectory,
) -> Result<f64> {
    if state.grid() != controls.grid() {
        return Err(Error::GridMismatch);
    }
    if state.dim() != strategy.n_states() {
        return Err(Error::Shape(format!(
            "strategy {} expects {} state components, got {}",
            strategy.tag(),
            strategy.n_states(),
            state.dim()
        )));
    }
    if controls.n_controls() != strategy.n_controls() {
        return Err(Error::Arity {
            strategy: strategy.tag(),
            expected: strategy.n_controls(),
            got: controls.n_controls(),
        });
    }
    let n = state.grid().n_steps();
    let cost = |k: usize| strategy.running_cost_unchecked(state.row(k), controls.row(k));
    let interior: f64 = (1..n).map(cost).sum();
    Ok(state.grid().step() * (interior + 0.5 * (cost(0) + cost(n))))
}

/// State trajectory of `strategy` from `x0` under fixed `controls`.
pub fn forward(strategy: &Strategy, x0: &[f64], controls: &ControlTrajectory) -> Result<Trajectory> {
    strategy.check_arity(x0, &vec![0.0; controls.n_controls()])?;
    integrate_forward(
        |_t, x: &[f64], u: &[f64], out: &mut [f64]| strategy.field_into(x, u, out),
        x0,
        controls.grid(),
        controls,
    )
}

/// Costate trajectory along `state` and `controls`, anchored at zero at `tf`.
pub fn backward(
    strategy: &Strategy,
    state: &Trajectory,
    controls: &ControlTrajectory,
) -> Result<Trajectory> {
    if !strategy.tag().is_controlled() {
        return Err(Error::NoAdjoint(strategy.tag()));
    }
    let terminal = vec![0.0; strategy.n_states()];
    integrate_backward(
        |_t, phi: &[f64], x: &[f64], u: &[f64], out: &mut [f64]| {
            pmp::adjoint_field_into(strategy, x, u, phi, out)
        },
        &terminal,
        state.grid(),
        state,
        controls,
    )
}

/// Objective value reached from `x0` under fixed `controls`.
pub fn objective_for_controls(
    strategy: &Strategy,
    x0: &[f64],
    controls: &ControlTrajectory,
) -> Result<f64> {
    let state = forward(strategy, x0, controls)?;
    evaluate_objective(strategy, &state, controls)
}

/// Uncontrolled trajectory of the model from `x0`.
pub fn solve_uncontrolled(params: &ModelParams, x0: &[f64], grid: &TimeGrid) -> Result<Trajectory> {
    params.validate()?;
    validate_initial_state(params.family(), x0)?;
    let strategy = Strategy::uncontrolled(*params);
    forward(&strategy, x0, &ControlTrajectory::zeros(*grid, 0))
}

/// Relative L1 change of each component minus `tol`, maximized over components.
fn signal_residual(new: &Trajectory, old: &Trajectory, tol: f64) -> f64 {
    (0..new.dim())
        .map(|j| {
            let norm = new.component_l1(j);
            let change = new.component_l1_distance(old, j);
            if norm > 0.0 {
                change / norm - tol
            } else if change == 0.0 {
                -tol
            } else {
                f64::INFINITY
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Runs the forward-backward sweep for a controlled strategy.
///
/// Running out of iterations is not an error: the report comes back with
/// `converged == false`.
pub fn solve(strategy: &Strategy, x0: &[f64], settings: &FbsSettings) -> Result<SolveReport> {
    settings.validate()?;
    strategy.validate()?;
    if !strategy.tag().is_controlled() {
        return Err(Error::NoAdjoint(strategy.tag()));
    }
    validate_initial_state(strategy.family(), x0)?;

    let grid = settings.grid;
    let theta = settings.relaxation;
    let n_controls = strategy.n_controls();

    let mut controls = ControlTrajectory::zeros(grid, n_controls);
    let mut prev_state = Trajectory::zeros(grid, strategy.n_states());
    let mut prev_adjoint = Trajectory::zeros(grid, strategy.n_states());
    let mut history = Vec::new();
    let mut converged = false;
    let mut characterized = vec![0.0; n_controls];

    while history.len() < settings.max_iterations {
        let state = forward(strategy, x0, &controls)?;
        let adjoint = backward(strategy, &state, &controls)?;

        let mut updated = controls.as_trajectory().clone();
        for k in 0..grid.len() {
            pmp::characterize_control_into(strategy, state.row(k), adjoint.row(k), &mut characterized);
            let row = &mut updated.as_mut_slice()[k * n_controls..(k + 1) * n_controls];
            for (u, c) in row.iter_mut().zip(&characterized) {
                *u = pmp::clamp_unit(theta * c + (1.0 - theta) * *u);
            }
        }

        let residual = signal_residual(&updated, controls.as_trajectory(), settings.tolerance)
            .max(signal_residual(&state, &prev_state, settings.tolerance))
            .max(signal_residual(&adjoint, &prev_adjoint, settings.tolerance));
        history.push(residual);

        controls = ControlTrajectory::from_trajectory_unchecked(updated);
        prev_state = state;
        prev_adjoint = adjoint;
        if residual <= 0.0 {
            converged = true;
            break;
        }
    }

    let state = forward(strategy, x0, &controls)?;
    let adjoint = backward(strategy, &state, &controls)?;
    let objective = evaluate_objective(strategy, &state, &controls)?;
    Ok(SolveReport {
        strategy: *strategy,
        state,
        adjoint,
        controls,
        objective,
        iterations: history.len(),
        converged,
        residual_history: history,
    })
}

/// Objective values for every control held constant at each of `levels`
/// (both controls share the level for two-control strategies).
pub fn constant_control_objectives(
    strategy: &Strategy,
    x0: &[f64],
    grid: &TimeGrid,
    levels: &[f64],
    exec: Execution,
) -> Result<Vec<f64>> {
    validate_initial_state(strategy.family(), x0)?;
    exec.try_map(levels, |&c| {
        let controls = ControlTrajectory::constant(*grid, strategy.n_controls(), c)?;
        objective_for_controls(strategy, x0, &controls)
    })
}

/// Solves several independent problems with shared settings.
pub fn solve_batch(
    problems: &[(Strategy, Vec<f64>)],
    settings: &FbsSettings,
    exec: Execution,
) -> Result<Vec<SolveReport>> {
    exec.try_map(problems, |(strategy, x0)| solve(strategy, x0, settings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{SeirParams, SirParams};

    const SIR_X0: [f64; 3] = [0.95, 0.05, 0.0];
    const SEIR_X0: [f64; 4] = [0.88, 0.07, 0.05, 0.0];

    fn sir_vacc() -> Strategy {
        Strategy::SirVaccination {
            params: SirParams::default(),
            b: 1.0,
        }
    }

    #[test]
    fn objective_of_zero_signals_is_zero() {
        let grid = TimeGrid::horizon(10.0, 50).unwrap();
        let j = evaluate_objective(
            &sir_vacc(),
            &Trajectory::zeros(grid, 3),
            &ControlTrajectory::zeros(grid, 1),
        )
        .unwrap();
        assert_eq!(j, 0.0);
    }

    #[test]
    fn objective_of_constant_infection() {
        let grid = TimeGrid::horizon(100.0, 1000).unwrap();
        let state = Trajectory::constant(grid, &[0.95, 0.05, 0.0]);
        let j = evaluate_objective(&sir_vacc(), &state, &ControlTrajectory::zeros(grid, 1)).unwrap();
        assert!((j - 5.0).abs() < 1e-12, "{j}");
    }

    #[test]
    fn objective_rejects_grid_mismatch() {
        let a = TimeGrid::horizon(10.0, 50).unwrap();
        let b = TimeGrid::horizon(10.0, 60).unwrap();
        let err = evaluate_objective(&sir_vacc(), &Trajectory::zeros(a, 3), &ControlTrajectory::zeros(b, 1))
            .unwrap_err();
        assert!(matches!(err, Error::GridMismatch));
    }

    #[test]
    fn uncontrolled_sir_peak() {
        let traj = solve_uncontrolled(
            &ModelParams::Sir(SirParams::default()),
            &SIR_X0,
            &TimeGrid::default(),
        )
        .unwrap();
        let oracle = 0.5 + 0.5 * (0.5f64 / 0.95).ln();
        let (_, peak) = traj.argmax(1);
        assert!((peak - 0.179).abs() <= 0.002);
        assert!((peak - oracle).abs() < 1e-4, "{peak} vs {oracle}");
    }

    #[test]
    fn uncontrolled_seir_burns_out() {
        let traj = solve_uncontrolled(
            &ModelParams::Seir(SeirParams::default()),
            &SEIR_X0,
            &TimeGrid::horizon(400.0, 4000).unwrap(),
        )
        .unwrap();
        let end = traj.last();
        assert!(end[1] < 1e-2 && end[2] < 1e-2);
        assert!((end[0] + end[3] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn infection_free_start_stays_put() {
        let traj = solve_uncontrolled(
            &ModelParams::Seir(SeirParams::default()),
            &[0.9, 0.0, 0.0, 0.1],
            &TimeGrid::default(),
        )
        .unwrap();
        assert!(traj.rows().all(|row| row == [0.9, 0.0, 0.0, 0.1]));
    }

    #[test]
    fn loose_tolerance_converges_immediately() {
        let settings = FbsSettings {
            tolerance: 1.0,
            ..FbsSettings::default()
        };
        let report = solve(&sir_vacc(), &SIR_X0, &settings).unwrap();
        assert!(report.converged);
        assert!(report.iterations <= 2);
    }

    #[test]
    fn sir_vaccination_beats_doing_nothing() {
        let report = solve(&sir_vacc(), &SIR_X0, &FbsSettings::default()).unwrap();
        assert!(report.converged, "{:?}", report.residual_history);
        let j0 = objective_for_controls(&sir_vacc(), &SIR_X0, &ControlTrajectory::zeros(TimeGrid::default(), 1))
            .unwrap();
        assert!(report.objective < j0, "{} vs {j0}", report.objective);
        assert!(report.residual_history.last().unwrap() <= &0.0);
        assert!(report.adjoint.last().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn solve_rejects_bad_input() {
        let s = FbsSettings::default();
        assert!(matches!(
            solve(&Strategy::SirUncontrolled(SirParams::default()), &SIR_X0, &s),
            Err(Error::NoAdjoint(_))
        ));
        assert!(solve(&sir_vacc(), &[0.5, 0.4, 0.0], &s).is_err());
        let bad = FbsSettings { relaxation: 0.0, ..s };
        assert!(solve(&sir_vacc(), &SIR_X0, &bad).is_err());
    }

    #[test]
    fn max_iterations_yields_unconverged_report() {
        let settings = FbsSettings {
            max_iterations: 1,
            tolerance: 1e-9,
            ..FbsSettings::default()
        };
        let report = solve(&sir_vacc(), &SIR_X0, &settings).unwrap();
        assert!(!report.converged);
        assert_eq!(report.iterations, 1);
    }
}
