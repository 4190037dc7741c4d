//! Negative-part nonlinearity and the penalty functional on the contact
//! boundary: residual force, generalized derivative, and stored energy.

use crate::fem::DofMap;
use crate::geometry::{HalfSpace, Mesh};
use crate::real::{real, Real};
use crate::sparse::SparseSym;

/// `{x}^- = -min(x, 0)`, the monotone Lipschitz-1 negative part.
#[inline]
pub fn negative_part<T: Real>(x: T) -> T {
    -x.min(T::zero())
}

/// Snapshot of the penalty term at one displacement.
#[derive(Debug, Clone)]
pub struct PenaltyState<T: Real> {
    pub kappa: T,
    /// Indices into the contact table with negative gap.
    pub active_set: Vec<usize>,
    /// Nodal-quadrature `L^2(Gamma)` norm of the gap's negative part.
    pub violation_l2: T,
    /// Per-contact-vertex multiplier `(1/kappa) {g}^-`, aligned with the
    /// contact table.
    pub pressure: Vec<T>,
    /// Smallest gap over the contact vertices.
    pub min_gap: T,
}

impl<T: Real> PenaltyState<T> {
    pub fn empty(kappa: T) -> Self {
        Self {
            kappa,
            active_set: Vec::new(),
            violation_l2: T::zero(),
            pressure: Vec::new(),
            min_gap: T::zero(),
        }
    }

    pub fn max_pressure(&self) -> T {
        self.pressure
            .iter()
            .fold(T::zero(), |m, p| if *p > m { *p } else { m })
    }
}

/// Penalty force and state at displacement `u` (free dofs). The force on a
/// violated contact vertex acts along `+q` with magnitude
/// `(1/kappa) * area_weight * {g}^-`, restoring admissibility.
pub fn penalty_residual<T: Real>(
    mesh: &Mesh<T>,
    hs: &HalfSpace<T>,
    contact_table: &[(usize, T)],
    dofs: &DofMap,
    u: &[T],
    kappa: T,
) -> (Vec<T>, PenaltyState<T>) {
    let q = hs.normal();
    let inv_kappa = T::one() / kappa;
    let mut force = vec![T::zero(); dofs.n_free()];
    let mut active_set = Vec::new();
    let mut pressure = Vec::with_capacity(contact_table.len());
    let mut viol_sq = T::zero();
    let mut min_gap = T::infinity();
    for (k, &(v, w)) in contact_table.iter().enumerate() {
        let x = mesh.vertices[v];
        let d = dofs.vertex_disp(u, v);
        let gap = (x[0] + d[0]) * q[0] + (x[1] + d[1]) * q[1] + (x[2] + d[2]) * q[2];
        if gap < min_gap {
            min_gap = gap;
        }
        let neg = negative_part(gap);
        let p = inv_kappa * neg;
        pressure.push(p);
        if gap < T::zero() {
            active_set.push(k);
            viol_sq = viol_sq + w * neg * neg;
            let f = w * p;
            for c in 0..3 {
                if let Some(dof) = dofs.dof(v, c) {
                    force[dof] = force[dof] + f * q[c];
                }
            }
        }
    }
    if contact_table.is_empty() {
        min_gap = T::zero();
    }
    (
        force,
        PenaltyState {
            kappa,
            active_set,
            violation_l2: viol_sq.sqrt(),
            pressure,
            min_gap,
        },
    )
}

/// Generalized derivative of the penalty force: adds
/// `(1/kappa) * area_weight * (q ⊗ q)` to the diagonal block of each active
/// contact vertex. Kink points (gap exactly zero) are treated as inactive.
pub fn penalty_jacobian<T: Real>(
    active_set: &[usize],
    contact_table: &[(usize, T)],
    hs: &HalfSpace<T>,
    dofs: &DofMap,
    kappa: T,
) -> SparseSym<T> {
    let q = hs.normal();
    let inv_kappa = T::one() / kappa;
    let mut triplets = Vec::with_capacity(9 * active_set.len());
    for &k in active_set {
        let (v, w) = contact_table[k];
        let s = inv_kappa * w;
        for i in 0..3 {
            for j in 0..3 {
                if let (Some(di), Some(dj)) = (dofs.dof(v, i), dofs.dof(v, j)) {
                    triplets.push((di, dj, s * q[i] * q[j]));
                }
            }
        }
    }
    SparseSym::from_triplets(dofs.n_free(), triplets)
}

/// Energy paid for violating the constraint: `(1/(2 kappa)) * violation^2`.
pub fn penalty_energy<T: Real>(state: &PenaltyState<T>) -> T {
    state.violation_l2 * state.violation_l2 / (real::<T>(2.0) * state.kappa)
}
