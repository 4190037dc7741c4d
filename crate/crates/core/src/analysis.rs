//! Quantitative post-processing: the energy decomposition, the Gronwall
//! constant and its violation bound, the smallness condition with the
//! exponential decay constants, decay-rate fits, and the residual of the
//! limit variational inequality.

use crate::dynamics::{ProblemData, State, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::fem::{assemble_load, DofMap, FemSystem};
use crate::geometry::{deformed_gap, FacetClass, HalfSpace, Mesh};
use crate::material::{max_tensor_component, positive_definiteness_constants, MaterialParams};
use crate::penalty::penalty_residual;
use crate::real::{as_f64, real, Real};
use crate::sparse::dot_vec;

/// Per-step energy decomposition and diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct EnergyRow<T: Real> {
    pub t: T,
    /// `rho * \int |u'|^2` (half the 2rho-weighted mass form).
    pub kinetic: T,
    /// `1/2 * \int A e(u):e(u)`.
    pub elastic: T,
    /// `(1/(2 kappa)) * violation^2`.
    pub penalty: T,
    /// `\int f(t) . u(t)`.
    pub work: T,
    /// `kinetic + elastic + penalty - work`.
    pub total: T,
    pub violation_l2: T,
    pub min_gap: T,
    /// `dt * C vbar . vbar` over the step ending here (0 on the first row).
    pub dissipation_increment: T,
    pub newton_iters: usize,
}

#[derive(Debug, Clone)]
pub struct EnergyTrace<T: Real> {
    pub rows: Vec<EnergyRow<T>>,
}

impl<T: Real> EnergyTrace<T> {
    pub fn max_violation(&self) -> T {
        self.rows
            .iter()
            .fold(T::zero(), |m, r| if r.violation_l2 > m { r.violation_l2 } else { m })
    }

    /// Trapezoidal time average of the violation over the trace.
    pub fn time_avg_violation(&self) -> T {
        if self.rows.len() < 2 {
            return T::zero();
        }
        let mut acc = T::zero();
        let half = real::<T>(0.5);
        for w in self.rows.windows(2) {
            acc = acc + half * (w[1].t - w[0].t) * (w[0].violation_l2 + w[1].violation_l2);
        }
        acc / (self.rows.last().unwrap().t - self.rows[0].t)
    }

    pub fn dissipation_cumulative(&self) -> Vec<T> {
        let mut acc = T::zero();
        self.rows
            .iter()
            .map(|r| {
                acc = acc + r.dissipation_increment;
                acc
            })
            .collect()
    }
}

/// Energy terms of one state against the assembled forms; the dissipation
/// increment and Newton count are integrator-owned and left zero here.
pub fn energy_row<T: Real>(
    sys: &FemSystem<T>,
    state: &State<T>,
    f_t: &[T],
    kappa: T,
) -> EnergyRow<T> {
    let half = real::<T>(0.5);
    let kinetic = half * sys.m.quad_form(&state.v);
    let elastic = half * sys.k.quad_form(&state.u);
    let viol = state.penalty.violation_l2;
    let penalty = viol * viol / (kappa + kappa);
    let work = dot_vec(f_t, &state.u);
    EnergyRow {
        t: state.t,
        kinetic,
        elastic,
        penalty,
        work,
        total: kinetic + elastic + penalty - work,
        violation_l2: viol,
        min_gap: state.penalty.min_gap,
        dissipation_increment: T::zero(),
        newton_iters: 0,
    }
}

/// Gronwall data constant
/// `b = max(1/2, rho, c0 ce2 / 2) * (|u1|^2 + |f|^2 + \int A e(u0):e(u0))`
/// evaluated with the discrete norms.
pub fn gronwall_b<T: Real>(
    mesh: &Mesh<T>,
    sys: &FemSystem<T>,
    p: &MaterialParams<T>,
    data: &ProblemData<T>,
    grid: &TimeGrid<T>,
    c0: T,
) -> T {
    let (_, ce2) = positive_definiteness_constants(p);
    let half = real::<T>(0.5);
    let pref = half.max(p.rho).max(c0 * ce2 * half);
    let term_u1 = sys.gram_l2.quad_form(&data.u1);
    let term_f = data.force.l2_time_norm_sq(mesh.volume(), grid);
    let term_u0 = sys.k.quad_form(&data.u0);
    pref * (term_u1 + term_f + term_u0)
}

/// A-priori violation bound `sqrt(kappa * T * b * e^T)`.
pub fn violation_bound<T: Real>(kappa: T, t_final: T, b: T) -> T {
    (kappa * t_final * b * t_final.exp()).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct SmallnessReport<T: Real> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// Smallness condition `rho / (ce1 * maxB) <= 1 / (2 c0^2 ce2)` under which
/// the energy decays exponentially after force shutdown.
pub fn smallness_check<T: Real>(p: &MaterialParams<T>, c0: T) -> SmallnessReport<T> {
    let (ce1, ce2) = positive_definiteness_constants(p);
    let (_, max_b) = max_tensor_component(p);
    let lhs = p.rho / (ce1 * max_b);
    let rhs = T::one() / (real::<T>(2.0) * c0 * c0 * ce2);
    SmallnessReport {
        lhs,
        rhs,
        holds: lhs <= rhs,
    }
}

/// Constants of the exponential decay estimate.
#[derive(Debug, Clone, Copy)]
pub struct DecayConstants<T: Real> {
    pub eta: T,
    pub epsilon: T,
    pub c_d: T,
    /// Lower equivalence factor `min(1 - eps/2, 1 - eps rho c0^2 ce1)`.
    pub equiv_lo: T,
    /// Upper equivalence factor `max(1 + eps/2, 1 + eps rho c0^2 ce1)`.
    pub equiv_hi: T,
    /// Multiplies the shutdown energy to give the squared norm bound.
    pub c_tilde_factor: T,
}

fn decay_constants_raw<T: Real>(p: &MaterialParams<T>, c0: T) -> DecayConstants<T> {
    let (ce1, ce2) = positive_definiteness_constants(p);
    let (_, max_b) = max_tensor_component(p);
    let two = real::<T>(2.0);
    let half = real::<T>(0.5);
    let eta = two * ce1 * max_b;
    // epsilon: midpoint of the admissible open interval
    let eps_sup = (T::one() / (ce1 * max_b))
        .min(two)
        .min(T::one() / (p.rho * c0 * c0 * ce1));
    let epsilon = half * eps_sup;
    let cross = epsilon * p.rho * c0 * c0 * ce1;
    let equiv_lo = (T::one() - epsilon * half).min(T::one() - cross);
    let equiv_hi = (T::one() + epsilon * half).max(T::one() + cross);
    let num = (T::one() / (two * ce2 * c0 * c0) - p.rho / (ce1 * max_b))
        .min(T::one() / (two * ce1 * max_b));
    let c_d = num / equiv_hi;
    let norm_lo = (T::one() / (two * c0 * c0 * ce1)).min(p.rho);
    let c_tilde_factor = equiv_hi / (norm_lo * equiv_lo);
    DecayConstants {
        eta,
        epsilon,
        c_d,
        equiv_lo,
        equiv_hi,
        c_tilde_factor,
    }
}

/// Decay constants; refuses when the smallness condition fails.
pub fn decay_constants<T: Real>(p: &MaterialParams<T>, c0: T) -> Result<DecayConstants<T>> {
    let s = smallness_check(p, c0);
    if !s.holds {
        return Err(Error::SmallnessViolated {
            lhs: as_f64(s.lhs),
            rhs: as_f64(s.rhs),
        });
    }
    Ok(decay_constants_raw(p, c0))
}

/// Every scalar constant the estimates depend on, for reporting.
#[derive(Debug, Clone, Copy)]
pub struct ConstantsReport<T: Real> {
    pub c0: T,
    pub ce1: T,
    pub ce2: T,
    pub max_a: T,
    pub max_b: T,
    pub b: T,
    pub smallness_lhs: T,
    pub smallness_rhs: T,
    pub smallness_holds: bool,
    pub epsilon: T,
    pub eta: T,
    pub c_d: T,
    pub c_tilde_factor: T,
}

/// Assembles the full constants report from the discrete Korn estimate and
/// the problem data. `c_d` is meaningful only when the smallness flag holds.
pub fn constants_report<T: Real>(
    p: &MaterialParams<T>,
    mesh: &Mesh<T>,
    sys: &FemSystem<T>,
    data: &ProblemData<T>,
    grid: &TimeGrid<T>,
    c0: T,
) -> ConstantsReport<T> {
    let (ce1, ce2) = positive_definiteness_constants(p);
    let (max_a, max_b) = max_tensor_component(p);
    let b = gronwall_b(mesh, sys, p, data, grid, c0);
    let s = smallness_check(p, c0);
    let dc = decay_constants_raw(p, c0);
    ConstantsReport {
        c0,
        ce1,
        ce2,
        max_a,
        max_b,
        b,
        smallness_lhs: s.lhs,
        smallness_rhs: s.rhs,
        smallness_holds: s.holds,
        epsilon: dc.epsilon,
        eta: dc.eta,
        c_d: dc.c_d,
        c_tilde_factor: dc.c_tilde_factor,
    }
}

/// Log-linear least-squares fit of the energy decay.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit<T: Real> {
    /// Positive decay constant (negated fitted slope of `log E`).
    pub rate: T,
    pub r_squared: T,
    /// Fitted `log E` at `t = 0`.
    pub log_intercept: T,
}

/// Fits `log E(t)` over `[T0 + 0.1 (T - T0), T]`; refuses on nonpositive
/// energies in the window.
pub fn fit_decay_rate<T: Real>(trace: &EnergyTrace<T>, t0: T, t_final: T) -> Result<DecayFit<T>> {
    let start = t0 + real::<T>(0.1) * (t_final - t0);
    let tol = real::<T>(1e-12) * (T::one() + t_final.abs());
    let pts: Vec<(T, T)> = trace
        .rows
        .iter()
        .filter(|r| r.t >= start - tol && r.t <= t_final + tol)
        .map(|r| (r.t, r.total))
        .collect();
    if pts.len() < 2 {
        return Err(Error::FitRefused(format!(
            "only {} samples in the fit window",
            pts.len()
        )));
    }
    if let Some(&(t, e)) = pts.iter().find(|&&(_, e)| !(e > T::zero())) {
        return Err(Error::FitRefused(format!(
            "nonpositive energy {} at t = {}",
            as_f64(e),
            as_f64(t)
        )));
    }
    let n = real::<T>(pts.len() as f64);
    let sx: T = pts.iter().map(|&(t, _)| t).sum();
    let sy: T = pts.iter().map(|&(_, e)| e.ln()).sum();
    let (mx, my) = (sx / n, sy / n);
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for &(t, e) in &pts {
        let (dx, dy) = (t - mx, e.ln() - my);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() {
        return Err(Error::FitRefused("degenerate time window".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == T::zero() {
        T::one()
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(DecayFit {
        rate: -slope,
        r_squared,
        log_intercept: my - slope * mx,
    })
}

/// Work-free energy and the modified energy `H = E + eps rho \int u'.u` of
/// one (displacement, velocity) pair.
pub fn modified_energy<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    sys: &FemSystem<T>,
    hs: &HalfSpace<T>,
    p: &MaterialParams<T>,
    u: &[T],
    v: &[T],
    kappa: T,
    epsilon: T,
) -> (T, T) {
    let half = real::<T>(0.5);
    let kinetic = half * sys.m.quad_form(v);
    let elastic = half * sys.k.quad_form(u);
    let (_, pstate) = penalty_residual(mesh, hs, &sys.contact_table, dofs, u, kappa);
    let pen = pstate.violation_l2 * pstate.violation_l2 / (kappa + kappa);
    let e = kinetic + elastic + pen;
    let h = e + epsilon * p.rho * sys.gram_l2.bilinear(v, u);
    (e, h)
}

/// Pointwise decay-curve comparison after shutdown.
#[derive(Debug, Clone, Copy)]
pub struct DecayCheckRow<T: Real> {
    pub t: T,
    pub e: T,
    pub e_bound: T,
    pub e_fit: T,
    pub norm_sum: T,
    pub norm_bound: T,
}

#[derive(Debug, Clone)]
pub struct DecayCheck<T: Real> {
    pub rows: Vec<DecayCheckRow<T>>,
    /// Grid points where `|u| + |u'|` exceeds the norm bound.
    pub violations: usize,
    pub fit: DecayFit<T>,
    pub e_shutdown: T,
}

/// Checks the exponential bounds along a trajectory: the energy against
/// `(hi/lo) E(T0) exp(-c_d (t - T0))` and the discrete norms against
/// `sqrt(C~) exp(-(c_d/2)(t - T0))` with `C~ = c_tilde_factor * E(T0)`.
pub fn decay_check<T: Real>(
    traj: &Trajectory<T>,
    sys: &FemSystem<T>,
    dc: &DecayConstants<T>,
    t0: T,
    t_final: T,
) -> Result<DecayCheck<T>> {
    let tol = real::<T>(1e-12) * (T::one() + t_final.abs());
    let idx0 = traj
        .trace
        .rows
        .iter()
        .position(|r| r.t >= t0 - tol)
        .ok_or_else(|| Error::FitRefused("shutdown time beyond trace".into()))?;
    let e_shutdown = traj.trace.rows[idx0].total;
    let fit = fit_decay_rate(&traj.trace, t0, t_final)?;
    let c_tilde = dc.c_tilde_factor * e_shutdown;
    let equiv_ratio = dc.equiv_hi / dc.equiv_lo;
    let half = real::<T>(0.5);
    let slack = T::one() + real::<T>(1e-9);
    let mut rows = Vec::with_capacity(traj.trace.rows.len() - idx0);
    let mut violations = 0usize;
    for (row, state) in traj.trace.rows[idx0..]
        .iter()
        .zip(&traj.states[idx0..])
    {
        let dt0 = row.t - t0;
        let e_bound = equiv_ratio * e_shutdown * (-dc.c_d * dt0).exp();
        let e_fit = (fit.log_intercept - fit.rate * row.t).exp();
        let norm_sum =
            sys.gram_h1.quad_form(&state.u).sqrt() + sys.gram_l2.quad_form(&state.v).sqrt();
        let norm_bound = c_tilde.sqrt() * (-half * dc.c_d * dt0).exp();
        if norm_sum > norm_bound * slack {
            violations += 1;
        }
        rows.push(DecayCheckRow {
            t: row.t,
            e: row.total,
            e_bound,
            e_fit,
            norm_sum,
            norm_bound,
        });
    }
    Ok(DecayCheck {
        rows,
        violations,
        fit,
        e_shutdown,
    })
}

/// Cumulative Gronwall quantities of a trajectory against `T b e^T`.
#[derive(Debug, Clone, Copy)]
pub struct AprioriCheck<T: Real> {
    /// Worst ratio of any cumulative quantity to the bound.
    pub max_ratio: T,
    pub violations: usize,
}

/// Checks the a-priori bound: the three time-integrated quantities
/// `rho \int |u'|^2`, `(1/(2 c0 ce1)) \int |u|_V^2` and
/// `(1/(2 kappa)) \int violation^2` each stay below `T b e^T`.
pub fn gronwall_apriori_check<T: Real>(
    traj: &Trajectory<T>,
    sys: &FemSystem<T>,
    p: &MaterialParams<T>,
    kappa: T,
    b: T,
    c0: T,
) -> AprioriCheck<T> {
    let (ce1, _) = positive_definiteness_constants(p);
    let half = real::<T>(0.5);
    let two = real::<T>(2.0);
    let t_final = traj.trace.rows.last().map(|r| r.t).unwrap_or(T::zero());
    let bound = t_final * b * t_final.exp();
    let mut acc_v = T::zero();
    let mut acc_u = T::zero();
    let mut acc_g = T::zero();
    let mut max_ratio = T::zero();
    let mut violations = 0usize;
    let slack = T::one() + real::<T>(1e-9);
    let mut prev: Option<(T, T, T, T)> = None;
    for (row, state) in traj.trace.rows.iter().zip(&traj.states) {
        let iv = sys.gram_l2.quad_form(&state.v);
        let iu = sys.gram_h1.quad_form(&state.u);
        let ig = row.violation_l2 * row.violation_l2;
        if let Some((tp, vp, up, gp)) = prev {
            let w = half * (row.t - tp);
            acc_v = acc_v + w * (vp + iv);
            acc_u = acc_u + w * (up + iu);
            acc_g = acc_g + w * (gp + ig);
        }
        prev = Some((row.t, iv, iu, ig));
        let quantities = [
            p.rho * acc_v,
            acc_u / (two * c0 * ce1),
            acc_g / (two * kappa),
        ];
        for q in quantities {
            if bound > T::zero() {
                let ratio = q / bound;
                if ratio > max_ratio {
                    max_ratio = ratio;
                }
                if q > bound * slack {
                    violations += 1;
                }
            } else if q > T::zero() {
                violations += 1;
                max_ratio = T::infinity();
            }
        }
    }
    AprioriCheck {
        max_ratio,
        violations,
    }
}

/// Admissible competitor field for the variational-inequality residual.
#[derive(Debug, Clone)]
pub enum TestField<T: Real> {
    /// Time-constant field `v(t) = u`.
    Constant { name: String, u: Vec<T> },
    /// The trajectory itself; an identity check rather than a competitor,
    /// so it is exempt from the admissibility validation.
    TrajectoryItself,
    /// `v(t) = base + r(t) * add` with the smoothstep ramp
    /// `r = 3 s^2 - 2 s^3`, `s = t / T`.
    Ramped {
        name: String,
        base: Vec<T>,
        add: Vec<T>,
    },
}

impl<T: Real> TestField<T> {
    pub fn name(&self) -> &str {
        match self {
            TestField::Constant { name, .. } => name,
            TestField::TrajectoryItself => "trajectory",
            TestField::Ramped { name, .. } => name,
        }
    }

    fn ramp(t: T, t_final: T) -> (T, T) {
        let s = t / t_final;
        let (two, three, six) = (real::<T>(2.0), real::<T>(3.0), real::<T>(6.0));
        let r = three * s * s - two * s * s * s;
        let dr = six * (s - s * s) / t_final;
        (r, dr)
    }

    fn write_value(&self, t: T, t_final: T, state: &State<T>, out: &mut [T]) {
        match self {
            TestField::Constant { u, .. } => out.copy_from_slice(u),
            TestField::TrajectoryItself => out.copy_from_slice(&state.u),
            TestField::Ramped { base, add, .. } => {
                let (r, _) = Self::ramp(t, t_final);
                for i in 0..out.len() {
                    out[i] = base[i] + r * add[i];
                }
            }
        }
    }

    fn write_derivative(&self, t: T, t_final: T, state: &State<T>, out: &mut [T]) {
        match self {
            TestField::Constant { .. } => out.fill(T::zero()),
            TestField::TrajectoryItself => out.copy_from_slice(&state.v),
            TestField::Ramped { base: _, add, .. } => {
                let (_, dr) = Self::ramp(t, t_final);
                for i in 0..out.len() {
                    out[i] = dr * add[i];
                }
            }
        }
    }
}

/// Displacement field along `+q` growing linearly with the distance from the
/// clamped face: admissible lift used to build competitor fields.
pub fn q_aligned_lift<T: Real>(mesh: &Mesh<T>, dofs: &DofMap, hs: &HalfSpace<T>) -> Vec<T> {
    // locate the clamped plane: the axis along which the Dirichlet vertices
    // do not extend
    let mut dir_verts: Vec<usize> = mesh
        .boundary_facets
        .iter()
        .filter(|f| f.class == FacetClass::Dirichlet)
        .flat_map(|f| f.verts)
        .collect();
    dir_verts.sort_unstable();
    dir_verts.dedup();
    let mut axis = 0;
    let mut plane = T::zero();
    let mut best_extent = T::infinity();
    for a in 0..3 {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for &v in &dir_verts {
            let x = mesh.vertices[v][a];
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if hi - lo < best_extent {
            best_extent = hi - lo;
            axis = a;
            plane = lo;
        }
    }
    let mut d_max = T::zero();
    for v in &mesh.vertices {
        d_max = d_max.max((v[axis] - plane).abs());
    }
    let q = hs.normal();
    let mut lift = vec![T::zero(); dofs.n_free()];
    for v in 0..mesh.n_vertices() {
        let beta = (mesh.vertices[v][axis] - plane).abs() / d_max;
        for c in 0..3 {
            if let Some(d) = dofs.dof(v, c) {
                lift[d] = beta * q[c];
            }
        }
    }
    lift
}

/// The built-in competitor family: the initial datum, the trajectory
/// itself, two static lifts along `+q`, and their smoothly ramped versions.
pub fn builtin_test_family<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMap,
    hs: &HalfSpace<T>,
    u0: &[T],
) -> Vec<TestField<T>> {
    let lift = q_aligned_lift(mesh, dofs, hs);
    let shifted = |s: f64| -> Vec<T> {
        let sv = real::<T>(s);
        u0.iter().zip(&lift).map(|(a, l)| *a + sv * *l).collect()
    };
    let scaled = |s: f64| -> Vec<T> {
        let sv = real::<T>(s);
        lift.iter().map(|l| sv * *l).collect()
    };
    vec![
        TestField::Constant {
            name: "u0".into(),
            u: u0.to_vec(),
        },
        TestField::TrajectoryItself,
        TestField::Constant {
            name: "u0+0.1*lift".into(),
            u: shifted(0.1),
        },
        TestField::Constant {
            name: "u0+0.5*lift".into(),
            u: shifted(0.5),
        },
        TestField::Ramped {
            name: "u0+ramp*0.1*lift".into(),
            base: u0.to_vec(),
            add: scaled(0.1),
        },
        TestField::Ramped {
            name: "u0+ramp*0.5*lift".into(),
            base: u0.to_vec(),
            add: scaled(0.5),
        },
    ]
}

#[derive(Debug, Clone)]
pub struct ViReport<T: Real> {
    pub residuals: Vec<(String, T)>,
    pub min_residual: T,
}

fn check_admissible<T: Real>(
    mesh: &Mesh<T>,
    hs: &HalfSpace<T>,
    dofs: &DofMap,
    u: &[T],
) -> Result<()> {
    let gaps = deformed_gap(mesh, hs, &dofs.expand(u))?;
    let tol = real::<T>(-1e-12);
    for (k, &g) in gaps.values.iter().enumerate() {
        if g < tol {
            return Err(Error::Inadmissible {
                vertex: mesh.contact_vertices()[k],
                gap: as_f64(g),
            });
        }
    }
    Ok(())
}

/// Residual `LHS - RHS` of the limit variational inequality, evaluated by
/// trapezoidal time quadrature along the trajectory for each competitor
/// field; nonnegative values certify the inequality.
#[allow(clippy::too_many_arguments)]
pub fn vi_residual<T: Real>(
    traj: &Trajectory<T>,
    fields: &[TestField<T>],
    mesh: &Mesh<T>,
    dofs: &DofMap,
    sys: &FemSystem<T>,
    hs: &HalfSpace<T>,
    data: &ProblemData<T>,
    grid: &TimeGrid<T>,
    _kappa: T,
) -> Result<ViReport<T>> {
    let n = dofs.n_free();
    let steps = grid.steps;
    if traj.states.len() != steps + 1 {
        return Err(Error::DimensionMismatch {
            expected: steps + 1,
            got: traj.states.len(),
        });
    }

    // admissibility of the competitors; ramped fields are affine in the ramp
    // value, so checking both endpoints covers all t
    for field in fields {
        match field {
            TestField::Constant { u, .. } => check_admissible(mesh, hs, dofs, u)?,
            TestField::Ramped { base, add, .. } => {
                check_admissible(mesh, hs, dofs, base)?;
                let end: Vec<T> = base.iter().zip(add).map(|(b, a)| *b + *a).collect();
                check_admissible(mesh, hs, dofs, &end)?;
            }
            TestField::TrajectoryItself => {}
        }
    }

    let f_unit = assemble_load(mesh, dofs, |_, _| data.force.vector, T::zero());
    let f_zero = vec![T::zero(); n];

    let mut integrals = vec![T::zero(); fields.len()];
    let mut v_buf = vec![T::zero(); n];
    let mut dv_buf = vec![T::zero(); n];
    let half = real::<T>(0.5);

    for (idx, state) in traj.states.iter().enumerate() {
        let t = state.t;
        let w = if idx == 0 || idx == steps {
            half * grid.dt
        } else {
            grid.dt
        };
        let m_du = sys.m.apply(&state.v);
        let k_u = sys.k.apply(&state.u);
        let c_du = sys.c.apply(&state.v);
        let load: &[T] = if data.force.is_active(t, grid.t0) {
            &f_unit
        } else {
            &f_zero
        };
        for (f, field) in fields.iter().enumerate() {
            field.write_value(t, grid.t_final, state, &mut v_buf);
            field.write_derivative(t, grid.t_final, state, &mut dv_buf);
            let mut g = T::zero();
            for i in 0..n {
                let dv_minus_du = dv_buf[i] - state.v[i];
                let v_minus_u = v_buf[i] - state.u[i];
                g = g - m_du[i] * dv_minus_du + k_u[i] * v_minus_u + c_du[i] * v_buf[i]
                    - load[i] * v_minus_u;
            }
            integrals[f] = integrals[f] + w * g;
        }
    }

    let first = traj.states.first().unwrap();
    let last = traj.states.last().unwrap();
    let m_du_t = sys.m.apply(&last.v);
    let m_u1 = sys.m.apply(&data.u1);
    let c_ut = sys.c.quad_form(&last.u);
    let c_u0 = sys.c.quad_form(&data.u0);

    let mut residuals = Vec::with_capacity(fields.len());
    let mut min_residual = T::infinity();
    for (f, field) in fields.iter().enumerate() {
        field.write_value(grid.t_final, grid.t_final, last, &mut v_buf);
        let mut boundary = T::zero();
        for i in 0..n {
            boundary = boundary + m_du_t[i] * (v_buf[i] - last.u[i]);
        }
        field.write_value(T::zero(), grid.t_final, first, &mut dv_buf);
        for i in 0..n {
            boundary = boundary - m_u1[i] * (dv_buf[i] - data.u0[i]);
        }
        let res = boundary + integrals[f] - half * c_ut + half * c_u0;
        if res < min_residual {
            min_residual = res;
        }
        residuals.push((field.name().to_string(), res));
    }

    Ok(ViReport {
        residuals,
        min_residual,
    })
}
