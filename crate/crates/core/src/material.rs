//! Constitutive constants and the isotropic fourth-order elasticity and
//! viscosity tensors, applied through their two-term closed-form contraction.

use crate::error::{Error, Result};
use crate::real::{as_f64, real, Real};

/// Lamé constants, viscosity constants and mass density of the solid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams<T: Real> {
    pub lambda: T,
    pub mu: T,
    pub theta: T,
    pub xi: T,
    pub rho: T,
}

impl<T: Real> MaterialParams<T> {
    /// Validates the sign constraints: `lambda >= 0`, `mu > 0`, `theta >= 0`,
    /// `xi > 0`, `rho > 0`.
    pub fn new(lambda: T, mu: T, theta: T, xi: T, rho: T) -> Result<Self> {
        let bad = |name: &str, v: T| {
            Error::InvalidMaterial(format!("{name} = {} out of range", as_f64(v)))
        };
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(bad("lambda", lambda));
        }
        if !(mu > T::zero()) || !mu.is_finite() {
            return Err(bad("mu", mu));
        }
        if !(theta >= T::zero()) || !theta.is_finite() {
            return Err(bad("theta", theta));
        }
        if !(xi > T::zero()) || !xi.is_finite() {
            return Err(bad("xi", xi));
        }
        if !(rho > T::zero()) || !rho.is_finite() {
            return Err(bad("rho", rho));
        }
        Ok(Self {
            lambda,
            mu,
            theta,
            xi,
            rho,
        })
    }
}

/// Symmetric 3x3 tensor in Voigt storage, ordered (11, 22, 33, 23, 13, 12).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor2<T: Real>(pub [T; 6]);

impl<T: Real> SymTensor2<T> {
    pub fn zero() -> Self {
        Self([T::zero(); 6])
    }

    pub fn identity() -> Self {
        let one = T::one();
        let z = T::zero();
        Self([one, one, one, z, z, z])
    }

    /// Entry `t_ij` with `i, j` in `0..3`.
    pub fn get(&self, i: usize, j: usize) -> T {
        const IDX: [[usize; 3]; 3] = [[0, 5, 4], [5, 1, 3], [4, 3, 2]];
        self.0[IDX[i][j]]
    }

    pub fn trace(&self) -> T {
        self.0[0] + self.0[1] + self.0[2]
    }

    /// Full double contraction `sum_ij a_ij b_ij` (off-diagonals counted twice).
    pub fn contract(&self, other: &Self) -> T {
        let a = &self.0;
        let b = &other.0;
        let two = real::<T>(2.0);
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + two * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5])
    }

    /// Squared Frobenius norm `sum_ij |t_ij|^2`.
    pub fn frob_sq(&self) -> T {
        self.contract(self)
    }

    pub fn scale(&self, s: T) -> Self {
        Self(self.0.map(|v| v * s))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = [T::zero(); 6];
        for k in 0..6 {
            out[k] = self.0[k] + other.0[k];
        }
        Self(out)
    }
}

/// Isotropic contraction `sigma_ij = a tr(e) delta_ij + 2 b e_ij`.
fn isotropic_apply<T: Real>(a: T, b: T, e: &SymTensor2<T>) -> SymTensor2<T> {
    let tr = e.trace();
    let two_b = b + b;
    let mut out = e.0.map(|v| two_b * v);
    for k in 0..3 {
        out[k] = out[k] + a * tr;
    }
    SymTensor2(out)
}

/// Stress from the elasticity tensor: `sigma = lambda tr(e) I + 2 mu e`.
pub fn elasticity_apply<T: Real>(p: &MaterialParams<T>, e: &SymTensor2<T>) -> SymTensor2<T> {
    isotropic_apply(p.lambda, p.mu, e)
}

/// Viscous stress from the viscosity tensor: `sigma = theta tr(e) I + 2 xi e`.
pub fn viscosity_apply<T: Real>(p: &MaterialParams<T>, e: &SymTensor2<T>) -> SymTensor2<T> {
    isotropic_apply(p.theta, p.xi, e)
}

/// Sharp positive-definiteness constants for the isotropic tensors:
/// `sum |t_ij|^2 <= ce1 * (A t : t)` with `ce1 = 1/(2 mu)`, and `ce2 = 1/(2 xi)`
/// for the viscosity tensor.
pub fn positive_definiteness_constants<T: Real>(p: &MaterialParams<T>) -> (T, T) {
    let two = real::<T>(2.0);
    (T::one() / (two * p.mu), T::one() / (two * p.xi))
}

/// Largest tensor component in absolute value: `lambda + 2 mu` for the
/// elasticity tensor (attained at the 1111 component) and `theta + 2 xi`
/// for the viscosity tensor.
pub fn max_tensor_component<T: Real>(p: &MaterialParams<T>) -> (T, T) {
    let two = real::<T>(2.0);
    (p.lambda + two * p.mu, p.theta + two * p.xi)
}
