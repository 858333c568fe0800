//! Fixed-step classical Runge-Kutta integration on a shared uniform grid.
//!
//! States are integrated forward from node 0, adjoints backward from the
//! last node. Frozen discrete signals (controls, and the state trajectory
//! during a backward pass) are sampled at half steps by averaging the two
//! adjacent nodes.

use crate::error::{Error, Result};

/// Uniform grid of `n_steps` intervals covering `[t0, tf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    tf: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub const DEFAULT_FINAL_TIME: f64 = 100.0;
    pub const DEFAULT_STEPS: usize = 1000;

    pub fn new(t0: f64, tf: f64, n_steps: usize) -> Result<Self> {
        if !t0.is_finite() || !tf.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "endpoints must be finite, got [{t0}, {tf}]"
            )));
        }
        if tf <= t0 {
            return Err(Error::InvalidGrid(format!(
                "final time {tf} must exceed initial time {t0}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be positive".into()));
        }
        Ok(Self { t0, tf, n_steps })
    }

    /// Grid on `[0, tf]`.
    pub fn horizon(tf: f64, n_steps: usize) -> Result<Self> {
        Self::new(0.0, tf, n_steps)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.tf - self.t0) / self.n_steps as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        debug_assert!(k <= self.n_steps);
        if k == self.n_steps {
            self.tf
        } else {
            self.t0 + k as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.node(k))
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t0: 0.0,
            tf: Self::DEFAULT_FINAL_TIME,
            n_steps: Self::DEFAULT_STEPS,
        }
    }
}

/// Vector-valued signal sampled at every node of a [`TimeGrid`].
///
/// Values are stored row-major: node `k` occupies `data[k*dim .. (k+1)*dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    dim: usize,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() * dim {
            return Err(Error::Shape(format!(
                "expected {} values ({} nodes x {dim}), got {}",
                grid.len() * dim,
                grid.len(),
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Shape(format!(
                "non-finite value at node {}",
                pos / dim.max(1)
            )));
        }
        Ok(Self { grid, dim, data })
    }

    pub fn zeros(grid: TimeGrid, dim: usize) -> Self {
        Self {
            grid,
            dim,
            data: vec![0.0; grid.len() * dim],
        }
    }

    /// Same vector at every node.
    pub fn constant(grid: TimeGrid, value: &[f64]) -> Self {
        let data = value
            .iter()
            .copied()
            .cycle()
            .take(grid.len() * value.len())
            .collect();
        Self {
            grid,
            dim: value.len(),
            data,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |k| self.row(k))
    }

    pub fn first(&self) -> &[f64] {
        self.row(0)
    }

    pub fn last(&self) -> &[f64] {
        self.row(self.grid.n_steps())
    }

    /// Samples of component `j` across all nodes.
    pub fn component(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        assert!(j < self.dim, "component {j} out of range for dim {}", self.dim);
        self.data.iter().skip(j).step_by(self.dim).copied()
    }

    /// Node index and value of the largest sample of component `j`.
    /// Ties resolve to the earliest node.
    pub fn argmax(&self, j: usize) -> (usize, f64) {
        self.component(j)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, v)| {
                if v > best.1 {
                    (k, v)
                } else {
                    best
                }
            })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// L1 norm of component `j` over the nodes (no quadrature weights).
    pub fn component_l1(&self, j: usize) -> f64 {
        self.component(j).map(f64::abs).sum()
    }

    /// L1 norm of `self_j - other_j` over the nodes.
    pub fn component_l1_distance(&self, other: &Trajectory, j: usize) -> f64 {
        self.component(j)
            .zip(other.component(j))
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// Control signals sampled on a grid, every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTrajectory(Trajectory);

impl ControlTrajectory {
    pub fn new(values: Trajectory) -> Result<Self> {
        if let Some(pos) = values
            .as_slice()
            .iter()
            .position(|v| !(0.0..=1.0).contains(v))
        {
            return Err(Error::validation(
                "controls",
                format!(
                    "value {} at node {} lies outside [0, 1]",
                    values.as_slice()[pos],
                    pos / values.dim().max(1)
                ),
            ));
        }
        Ok(Self(values))
    }

    pub fn zeros(grid: TimeGrid, n_controls: usize) -> Self {
        Self(Trajectory::zeros(grid, n_controls))
    }

    /// Every control held at `level` over the whole horizon.
    pub fn constant(grid: TimeGrid, n_controls: usize, level: f64) -> Result<Self> {
        Self::new(Trajectory::constant(grid, &vec![level; n_controls]))
    }

    pub fn n_controls(&self) -> usize {
        self.0.dim()
    }

    pub fn grid(&self) -> &TimeGrid {
        self.0.grid()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        self.0.row(k)
    }

    pub fn as_trajectory(&self) -> &Trajectory {
        &self.0
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.0
    }

    pub(crate) fn from_trajectory_unchecked(values: Trajectory) -> Self {
        debug_assert!(values.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        Self(values)
    }
}

/// Frozen auxiliary inputs seen by a vector field over one RK4 step:
/// the samples at the step start, the half step and the step end.
#[derive(Debug, Clone, Copy)]
pub struct AuxSamples<'a> {
    pub start: &'a [f64],
    pub mid: &'a [f64],
    pub end: &'a [f64],
}

impl AuxSamples<'static> {
    pub const NONE: AuxSamples<'static> = AuxSamples {
        start: &[],
        mid: &[],
        end: &[],
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("non-finite value produced during a Runge-Kutta step")]
pub struct NonFiniteStep;

/// One classical RK4 step of `dx/dt = field(t, x, aux)` with signed step `h`.
///
/// `field` writes the derivative into its last argument.
pub fn rk4_step<F>(
    field: F,
    t: f64,
    x: &[f64],
    aux: AuxSamples<'_>,
    h: f64,
) -> Result<Vec<f64>, NonFiniteStep>
where
    F: Fn(f64, &[f64], &[f64], &mut [f64]),
{
    let mut ws = Rk4Workspace::new(x.len());
    let mut out = vec![0.0; x.len()];
    ws.step(&field, t, x, aux, h, &mut out)?;
    Ok(out)
}

struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    probe: Vec<f64>,
}

impl Rk4Workspace {
    fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            probe: vec![0.0; dim],
        }
    }

    fn step<F>(
        &mut self,
        field: &F,
        t: f64,
        x: &[f64],
        aux: AuxSamples<'_>,
        h: f64,
        out: &mut [f64],
    ) -> Result<(), NonFiniteStep>
    where
        F: Fn(f64, &[f64], &[f64], &mut [f64]),
    {
        debug_assert!(h != 0.0, "RK4 step size must be nonzero");
        let half = 0.5 * h;

        field(t, x, aux.start, &mut self.k1);
        axpy(&mut self.probe, x, half, &self.k1);
        field(t + half, &self.probe, aux.mid, &mut self.k2);
        axpy(&mut self.probe, x, half, &self.k2);
        field(t + half, &self.probe, aux.mid, &mut self.k3);
        axpy(&mut self.probe, x, h, &self.k3);
        field(t + h, &self.probe, aux.end, &mut self.k4);

        let sixth = h / 6.0;
        for (j, o) in out.iter_mut().enumerate() {
            *o = x[j] + sixth * (self.k1[j] + 2.0 * self.k2[j] + 2.0 * self.k3[j] + self.k4[j]);
        }
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(NonFiniteStep)
        }
    }
}

#[inline]
fn axpy(out: &mut [f64], x: &[f64], a: f64, k: &[f64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + a * ki;
    }
}

fn midpoint(out: &mut [f64], a: &[f64], b: &[f64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = 0.5 * (x + y);
    }
}

fn check_grid(grid: &TimeGrid, other: &TimeGrid) -> Result<()> {
    if grid == other {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Integrates `dx/dt = field(t, x, u(t))` from `x0` across `grid`.
pub fn integrate_forward<F>(
    field: F,
    x0: &[f64],
    grid: &TimeGrid,
    controls: &ControlTrajectory,
) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &[f64], &mut [f64]),
{
    check_grid(grid, controls.grid())?;
    if let Some(k) = x0.iter().position(|v| !v.is_finite()) {
        return Err(Error::Shape(format!("initial state component {k} is not finite")));
    }
    let dim = x0.len();
    let h = grid.step();
    let mut traj = Trajectory::zeros(*grid, dim);
    let mut ws = Rk4Workspace::new(dim);
    let mut u_mid = vec![0.0; controls.n_controls()];

    let data = traj.as_mut_slice();
    data[..dim].copy_from_slice(x0);
    for k in 0..grid.n_steps() {
        let (u0, u1) = (controls.row(k), controls.row(k + 1));
        midpoint(&mut u_mid, u0, u1);
        let aux = AuxSamples {
            start: u0,
            mid: &u_mid,
            end: u1,
        };
        let (done, rest) = data.split_at_mut((k + 1) * dim);
        let x = &done[k * dim..];
        ws.step(&field, grid.node(k), x, aux, h, &mut rest[..dim])
            .map_err(|_| Error::Diverged {
                node: k + 1,
                time: grid.node(k + 1),
            })?;
    }
    Ok(traj)
}

/// Integrates `dφ/dt = field(t, φ, x(t), u(t))` backward from `phi_f` at the
/// final node, with `state` and `controls` frozen.
pub fn integrate_backward<G>(
    field: G,
    phi_f: &[f64],
    grid: &TimeGrid,
    state: &Trajectory,
    controls: &ControlTrajectory,
) -> Result<Trajectory>
where
    G: Fn(f64, &[f64], &[f64], &[f64], &mut [f64]),
{
    check_grid(grid, state.grid())?;
    check_grid(grid, controls.grid())?;
    let dim = phi_f.len();
    let nx = state.dim();
    let nu = controls.n_controls();
    let h = grid.step();
    let n = grid.n_steps();

    // The field sees [x..., u...] as one auxiliary vector.
    let split_field = |t: f64, phi: &[f64], aux: &[f64], out: &mut [f64]| {
        let (x, u) = aux.split_at(nx);
        field(t, phi, x, u, out)
    };
    let pack = |k: usize, buf: &mut Vec<f64>| {
        buf.clear();
        buf.extend_from_slice(state.row(k));
        buf.extend_from_slice(controls.row(k));
    };

    let mut traj = Trajectory::zeros(*grid, dim);
    let mut ws = Rk4Workspace::new(dim);
    let mut start = Vec::with_capacity(nx + nu);
    let mut end = Vec::with_capacity(nx + nu);
    let mut mid = vec![0.0; nx + nu];

    let data = traj.as_mut_slice();
    data[n * dim..].copy_from_slice(phi_f);
    for k in (0..n).rev() {
        pack(k + 1, &mut start);
        pack(k, &mut end);
        midpoint(&mut mid, &start, &end);
        let aux = AuxSamples {
            start: &start,
            mid: &mid,
            end: &end,
        };
        let (head, tail) = data.split_at_mut((k + 1) * dim);
        let phi = &tail[..dim];
        ws.step(&split_field, grid.node(k + 1), phi, aux, -h, &mut head[k * dim..])
            .map_err(|_| Error::Diverged {
                node: k,
                time: grid.node(k),
            })?;
    }
    Ok(traj)
}
