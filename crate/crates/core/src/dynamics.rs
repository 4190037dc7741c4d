//! Time integration of the penalized Galerkin system
//! `2 rho M a + C v + K u - penalty(u) = F(t)` by the average-acceleration
//! Newmark scheme with a semismooth Newton corrector.

use crate::analysis::{energy_row, EnergyRow, EnergyTrace};
use crate::error::{Error, Result};
use crate::fem::{assemble_load, DofMap, FemSystem};
use crate::geometry::{deformed_gap, HalfSpace, Mesh};
use crate::penalty::{penalty_jacobian, penalty_residual, PenaltyState};
use crate::real::{as_f64, real, Real};
use crate::sparse::{norm_vec, SparseSym, SpdSolver};

/// Discrete state at one time instant, on the free dofs.
#[derive(Debug, Clone)]
pub struct State<T: Real> {
    pub t: T,
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub a: Vec<T>,
    pub penalty: PenaltyState<T>,
}

/// Uniform time grid on `[0, T]` with an optional force shutdown time `T0`
/// that must lie on a grid point.
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid<T: Real> {
    pub t_final: T,
    pub dt: T,
    pub steps: usize,
    pub t0: Option<T>,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_final: T, dt: T, t0: Option<T>) -> Result<Self> {
        if !(t_final > T::zero()) || !(dt > T::zero()) {
            return Err(Error::InvalidTimeGrid(format!(
                "need T > 0 and dt > 0, got T = {}, dt = {}",
                as_f64(t_final),
                as_f64(dt)
            )));
        }
        let steps_f = (t_final / dt).round();
        let steps = steps_f.to_usize().ok_or_else(|| {
            Error::InvalidTimeGrid("step count does not fit in usize".into())
        })?;
        let tol = real::<T>(1e-12) * (T::one() + t_final.abs());
        if steps == 0 || (steps_f * dt - t_final).abs() > tol {
            return Err(Error::InvalidTimeGrid(format!(
                "dt = {} does not divide T = {}",
                as_f64(dt),
                as_f64(t_final)
            )));
        }
        if let Some(t0) = t0 {
            if !(t0 > T::zero() && t0 < t_final) {
                return Err(Error::InvalidTimeGrid(format!(
                    "T0 = {} must satisfy 0 < T0 < T",
                    as_f64(t0)
                )));
            }
            let k = (t0 / dt).round();
            if (k * dt - t0).abs() > tol {
                return Err(Error::InvalidTimeGrid(format!(
                    "T0 = {} does not lie on a grid point",
                    as_f64(t0)
                )));
            }
        }
        Ok(Self {
            t_final,
            dt,
            steps,
            t0,
        })
    }

    pub fn time_at(&self, n: usize) -> T {
        real::<T>(n as f64) * self.dt
    }
}

/// When the constant body force acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceWindow {
    Always,
    /// Active for `t < T0`, zero from the shutdown time on.
    UntilShutdown,
}

/// Body-force specification: a constant vector with an activity window.
#[derive(Debug, Clone, Copy)]
pub struct ForceSpec<T: Real> {
    pub vector: [T; 3],
    pub window: ForceWindow,
}

impl<T: Real> ForceSpec<T> {
    pub fn zero() -> Self {
        Self {
            vector: [T::zero(); 3],
            window: ForceWindow::Always,
        }
    }

    pub fn constant(vector: [T; 3]) -> Self {
        Self {
            vector,
            window: ForceWindow::Always,
        }
    }

    pub fn until_shutdown(vector: [T; 3]) -> Self {
        Self {
            vector,
            window: ForceWindow::UntilShutdown,
        }
    }

    pub fn is_active(&self, t: T, t0: Option<T>) -> bool {
        match self.window {
            ForceWindow::Always => true,
            ForceWindow::UntilShutdown => match t0 {
                Some(t0) => t < t0,
                None => true,
            },
        }
    }

    /// Exact `L^2(0,T; L^2)` norm squared of the piecewise-constant force:
    /// `|c|^2 * volume * (active duration)`.
    pub fn l2_time_norm_sq(&self, volume: T, grid: &TimeGrid<T>) -> T {
        let c = self.vector;
        let mag_sq = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
        let duration = match self.window {
            ForceWindow::Always => grid.t_final,
            ForceWindow::UntilShutdown => grid.t0.unwrap_or(grid.t_final).min(grid.t_final),
        };
        mag_sq * volume * duration
    }
}

/// Initial data and forcing. The initial displacement must be discretely
/// admissible; no constraint is imposed on the initial velocity.
#[derive(Debug, Clone)]
pub struct ProblemData<T: Real> {
    pub u0: Vec<T>,
    pub u1: Vec<T>,
    pub force: ForceSpec<T>,
}

impl<T: Real> ProblemData<T> {
    pub fn new(
        u0: Vec<T>,
        u1: Vec<T>,
        force: ForceSpec<T>,
        mesh: &Mesh<T>,
        hs: &HalfSpace<T>,
        dofs: &DofMap,
    ) -> Result<Self> {
        let n = dofs.n_free();
        for (len, name) in [(u0.len(), "u0"), (u1.len(), "u1")] {
            if len != n {
                let _ = name;
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        let gaps = deformed_gap(mesh, hs, &dofs.expand(&u0))?;
        let tol = real::<T>(-1e-12);
        for (k, &g) in gaps.values.iter().enumerate() {
            if g < tol {
                return Err(Error::Inadmissible {
                    vertex: mesh.contact_vertices()[k],
                    gap: as_f64(g),
                });
            }
        }
        Ok(Self { u0, u1, force })
    }
}

/// Per-step integrator diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct StepStats<T: Real> {
    pub newton_iters: usize,
    /// Trapezoidal dissipation increment `dt * C vbar . vbar` with the
    /// midpoint velocity `vbar = (u_next - u_prev)/dt`.
    pub dissipation: T,
    pub halved: bool,
}

/// One-step integrator with a factorization cache keyed by the penalty
/// active set. The linear part `(4/dt^2) M + (2/dt) C + K` is fixed per
/// stepper.
pub struct Stepper<'a, T: Real> {
    mesh: &'a Mesh<T>,
    dofs: &'a DofMap,
    sys: &'a FemSystem<T>,
    hs: &'a HalfSpace<T>,
    kappa: T,
    dt: T,
    j_lin: SparseSym<T>,
    cache: Option<(Vec<usize>, SpdSolver<T>)>,
}

pub const NEWTON_MAX_ITERS: usize = 50;

impl<'a, T: Real> Stepper<'a, T> {
    pub fn new(
        mesh: &'a Mesh<T>,
        dofs: &'a DofMap,
        sys: &'a FemSystem<T>,
        hs: &'a HalfSpace<T>,
        kappa: T,
        dt: T,
    ) -> Self {
        let four_over_dt2 = real::<T>(4.0) / (dt * dt);
        let two_over_dt = real::<T>(2.0) / dt;
        let mut triplets = Vec::new();
        for (r, c, v) in sys.m.triplets() {
            triplets.push((r, c, four_over_dt2 * v));
        }
        for (r, c, v) in sys.c.triplets() {
            triplets.push((r, c, two_over_dt * v));
        }
        triplets.extend(sys.k.triplets());
        let j_lin = SparseSym::from_triplets(dofs.n_free(), triplets);
        Self {
            mesh,
            dofs,
            sys,
            hs,
            kappa,
            dt,
            j_lin,
            cache: None,
        }
    }

    /// Advances one step of size `dt`. On success returns the new state and
    /// diagnostics; on Newton stagnation returns the residual history.
    pub fn step(&mut self, state: &State<T>, f_next: &[T]) -> Result<(State<T>, StepStats<T>)> {
        let n = self.dofs.n_free();
        let dt = self.dt;
        let four_over_dt2 = real::<T>(4.0) / (dt * dt);
        let tol = real::<T>(1e-10) * (T::one() + norm_vec(f_next));

        // Newmark (beta = 1/4, gamma = 1/2) kinematics in terms of the
        // end-of-step displacement x:
        //   a(x) = (4/dt^2)(x - u_n - dt v_n) - a_n
        //   v(x) = v_n + dt/2 (a_n + a(x))
        let accel = |x: &[T]| -> Vec<T> {
            (0..n)
                .map(|i| four_over_dt2 * (x[i] - state.u[i] - dt * state.v[i]) - state.a[i])
                .collect()
        };
        let veloc = |a_next: &[T]| -> Vec<T> {
            let half_dt = dt / real::<T>(2.0);
            (0..n)
                .map(|i| state.v[i] + half_dt * (state.a[i] + a_next[i]))
                .collect()
        };

        // constant-acceleration predictor
        let mut x: Vec<T> = (0..n)
            .map(|i| state.u[i] + dt * state.v[i] + dt * dt / real::<T>(2.0) * state.a[i])
            .collect();

        let mut residuals: Vec<f64> = Vec::new();
        let mut pen_state;
        let mut iters = 0usize;
        // an increment below working precision means the iterate cannot
        // improve further even when the absolute residual target is under
        // the roundoff floor of the 4/dt^2-scaled mass term
        let mut stagnated = false;
        loop {
            let a_next = accel(&x);
            let v_next = veloc(&a_next);
            let (pen_force, pstate) = penalty_residual(
                self.mesh,
                self.hs,
                &self.sys.contact_table,
                self.dofs,
                &x,
                self.kappa,
            );
            pen_state = pstate;
            let mut r = self.sys.m.apply(&a_next);
            let cv = self.sys.c.apply(&v_next);
            let kx = self.sys.k.apply(&x);
            for i in 0..n {
                r[i] = r[i] + cv[i] + kx[i] - pen_force[i] - f_next[i];
            }
            let r_norm = norm_vec(&r);
            residuals.push(as_f64(r_norm));
            if !r_norm.is_finite() {
                return Err(Error::StepFailure {
                    step: 0,
                    iterations: iters,
                    residuals,
                });
            }
            if r_norm <= tol || stagnated {
                let stats = StepStats {
                    newton_iters: iters,
                    dissipation: self.dissipation_increment(&state.u, &x),
                    halved: false,
                };
                let next = State {
                    t: state.t + dt,
                    u: x,
                    v: v_next,
                    a: a_next,
                    penalty: pen_state,
                };
                return Ok((next, stats));
            }
            if iters >= NEWTON_MAX_ITERS {
                return Err(Error::StepFailure {
                    step: 0,
                    iterations: iters,
                    residuals,
                });
            }
            let solver = self.solver_for(&pen_state.active_set)?;
            let delta = solver.solve(&r)?;
            for i in 0..n {
                x[i] = x[i] - delta[i];
            }
            let floor = real::<T>(64.0) * T::epsilon() * (T::one() + norm_vec(&x));
            stagnated = norm_vec(&delta) <= floor;
            iters += 1;
        }
    }

    fn dissipation_increment(&self, u_prev: &[T], u_next: &[T]) -> T {
        let vbar: Vec<T> = u_prev
            .iter()
            .zip(u_next)
            .map(|(a, b)| (*b - *a) / self.dt)
            .collect();
        self.dt * self.sys.c.quad_form(&vbar)
    }

    fn solver_for(&mut self, active_set: &[usize]) -> Result<&SpdSolver<T>> {
        let stale = match &self.cache {
            Some((key, _)) => key.as_slice() != active_set,
            None => true,
        };
        if stale {
            let j = if active_set.is_empty() {
                self.j_lin.clone()
            } else {
                let jpen = penalty_jacobian(
                    active_set,
                    &self.sys.contact_table,
                    self.hs,
                    self.dofs,
                    self.kappa,
                );
                self.j_lin.add(&jpen)
            };
            let solver = SpdSolver::new(&j)?;
            self.cache = Some((active_set.to_vec(), solver));
        }
        Ok(&self.cache.as_ref().unwrap().1)
    }
}

/// One-shot implicit step (builds a throwaway factorization cache).
pub fn step<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    sys: &FemSystem<T>,
    hs: &HalfSpace<T>,
    state: &State<T>,
    dt: T,
    kappa: T,
    f_next: &[T],
) -> Result<State<T>> {
    let mut stepper = Stepper::new(mesh, dofs, sys, hs, kappa, dt);
    stepper.step(state, f_next).map(|(s, _)| s)
}

/// Simulation output: states at the grid points plus the energy trace.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub states: Vec<State<T>>,
    pub trace: EnergyTrace<T>,
}

/// Runs the integrator over the grid. Per-step hooks receive
/// `(step index, state, energy row)` and must not mutate them. The initial
/// acceleration is solved consistently from the residual at `t = 0`. A step
/// whose Newton corrector fails is retried once as two half steps before the
/// failure is propagated with its step index.
pub fn simulate<T: Real, H>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    sys: &FemSystem<T>,
    hs: &HalfSpace<T>,
    data: &ProblemData<T>,
    grid: &TimeGrid<T>,
    kappa: T,
    mut hook: H,
) -> Result<Trajectory<T>>
where
    H: FnMut(usize, &State<T>, &EnergyRow<T>),
{
    let n = dofs.n_free();
    if data.u0.len() != n || data.u1.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: data.u0.len(),
        });
    }
    let f_unit = assemble_load(mesh, dofs, |_, _| data.force.vector, T::zero());
    let f_zero = vec![T::zero(); n];
    let load_at = |t: T| -> &[T] {
        if data.force.is_active(t, grid.t0) {
            &f_unit
        } else {
            &f_zero
        }
    };

    // consistent initial acceleration: M a0 = F(0) + penalty(u0) - C u1 - K u0
    let (pen_force, pen_state) =
        penalty_residual(mesh, hs, &sys.contact_table, dofs, &data.u0, kappa);
    let f0 = load_at(T::zero());
    let cv = sys.c.apply(&data.u1);
    let ku = sys.k.apply(&data.u0);
    let rhs: Vec<T> = (0..n)
        .map(|i| f0[i] + pen_force[i] - cv[i] - ku[i])
        .collect();
    let mass_solver = SpdSolver::new(&sys.m)?;
    let a0 = mass_solver.solve(&rhs)?;

    let state0 = State {
        t: T::zero(),
        u: data.u0.clone(),
        v: data.u1.clone(),
        a: a0,
        penalty: pen_state,
    };
    let mut row0 = energy_row(sys, &state0, f0, kappa);
    row0.dissipation_increment = T::zero();
    row0.newton_iters = 0;
    hook(0, &state0, &row0);

    let mut states = Vec::with_capacity(grid.steps + 1);
    let mut rows = Vec::with_capacity(grid.steps + 1);
    states.push(state0);
    rows.push(row0);

    let mut stepper = Stepper::new(mesh, dofs, sys, hs, kappa, grid.dt);
    let mut half_stepper: Option<Stepper<T>> = None;

    for step_idx in 0..grid.steps {
        let t_next = grid.time_at(step_idx + 1);
        let f_next = load_at(t_next);
        let prev = states.last().unwrap();
        let (next, stats) = match stepper.step(prev, f_next) {
            Ok(ok) => ok,
            Err(Error::StepFailure {
                iterations,
                residuals,
                ..
            }) => {
                // retry once with two half steps
                let half = half_stepper.get_or_insert_with(|| {
                    Stepper::new(mesh, dofs, sys, hs, kappa, grid.dt / real(2.0))
                });
                let t_mid = prev.t + grid.dt / real(2.0);
                let f_mid = load_at(t_mid);
                let attempt = half.step(prev, f_mid).and_then(|(mid, s1)| {
                    half.step(&mid, f_next).map(|(end, s2)| {
                        let stats = StepStats {
                            newton_iters: s1.newton_iters + s2.newton_iters,
                            dissipation: s1.dissipation + s2.dissipation,
                            halved: true,
                        };
                        (end, stats)
                    })
                });
                match attempt {
                    Ok(ok) => ok,
                    Err(_) => {
                        return Err(Error::StepFailure {
                            step: step_idx,
                            iterations,
                            residuals,
                        })
                    }
                }
            }
            Err(e) => return Err(e),
        };
        let mut row = energy_row(sys, &next, f_next, kappa);
        row.dissipation_increment = stats.dissipation;
        row.newton_iters = stats.newton_iters;
        hook(step_idx + 1, &next, &row);
        states.push(next);
        rows.push(row);
    }

    Ok(Trajectory {
        states,
        trace: EnergyTrace { rows },
    })
}
