//! Bell-family initial states and their evolution under two identical,
//! independent local channels.
//!
//! Indices follow the product basis `{|11⟩, |10⟩, |01⟩, |00⟩}`; matrix
//! index `i` is element `ρ_{i+1}` in the usual 1-based labelling.

use nalgebra::SMatrix;

use crate::lie_channel::{transfer_matrix, ChannelCoefficients};
use crate::{Error, JointDensity, Result, C64};

/// Largest magnitude treated as zero when checking the X-state pattern.
pub const X_STATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// β|01⟩ + η|10⟩
    Phi,
    /// β|00⟩ + η|11⟩
    Psi,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi" => Ok(Family::Phi),
            "psi" => Ok(Family::Psi),
            other => Err(Error::InvalidParams(format!(
                "unknown state family {other:?}"
            ))),
        }
    }
}

/// `β|ab⟩ + η|a'b'⟩` with real β ∈ (0, 1) and `η = √(1−β²) e^{iφ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellFamilyState {
    pub family: Family,
    pub beta: f64,
    pub eta_phase: f64,
}

impl BellFamilyState {
    pub fn new(family: Family, beta: f64, eta_phase: f64) -> Result<Self> {
        let s = Self {
            family,
            beta,
            eta_phase,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_beta2(family: Family, beta2: f64, eta_phase: f64) -> Result<Self> {
        if !(beta2 > 0.0 && beta2 < 1.0) {
            return Err(Error::Domain(format!(
                "beta^2 must lie in (0, 1), got {beta2}"
            )));
        }
        Self::new(family, beta2.sqrt(), eta_phase)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Domain(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        if !self.eta_phase.is_finite() {
            return Err(Error::Domain("eta phase must be finite".into()));
        }
        Ok(())
    }

    pub fn eta(&self) -> C64 {
        C64::from_polar((1.0 - self.beta * self.beta).sqrt(), self.eta_phase)
    }

    /// State vector in the product basis.
    pub fn ket(&self) -> [C64; 4] {
        let zero = C64::new(0.0, 0.0);
        let beta = C64::new(self.beta, 0.0);
        let mut v = [zero; 4];
        match self.family {
            Family::Phi => {
                v[2] = beta; // |01⟩
                v[1] = self.eta(); // |10⟩
            }
            Family::Psi => {
                v[3] = beta; // |00⟩
                v[0] = self.eta(); // |11⟩
            }
        }
        v
    }
}

/// Pure-state density matrix `|ξ⟩⟨ξ|`.
pub fn initial_state(s: &BellFamilyState) -> Result<JointDensity> {
    s.validate()?;
    let v = s.ket();
    Ok(JointDensity::from_fn(|i, j| v[i] * v[j].conj()))
}

/// Whether only the diagonal and anti-diagonal are non-zero.
pub fn is_x_state(rho: &JointDensity, tol: f64) -> bool {
    (0..4).all(|i| (0..4).all(|j| i == j || i + j == 3 || rho[(i, j)].norm() <= tol))
}

/// Row/column split of a two-qubit index into local indices (A, B).
fn split(i: usize) -> (usize, usize) {
    (i / 2, i % 2)
}

/// Reorder `ρ[(aᵢ bᵢ), (aⱼ bⱼ)]` into the vector indexed by
/// `(aᵢ aⱼ)(bᵢ bⱼ)` on which `T ⊗ T` acts.
fn realign(rho: &JointDensity) -> SMatrix<C64, 16, 1> {
    let mut v = SMatrix::<C64, 16, 1>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let (ai, bi) = split(i);
            let (aj, bj) = split(j);
            v[(2 * ai + aj) * 4 + 2 * bi + bj] = rho[(i, j)];
        }
    }
    v
}

fn unrealign(v: &SMatrix<C64, 16, 1>) -> JointDensity {
    JointDensity::from_fn(|i, j| {
        let (ai, bi) = split(i);
        let (aj, bj) = split(j);
        v[(2 * ai + aj) * 4 + 2 * bi + bj]
    })
}

/// Evolve a two-qubit state with the same channel on each qubit.
pub fn evolve_pair(c: &ChannelCoefficients, rho0: &JointDensity) -> JointDensity {
    let t = transfer_matrix(c);
    unrealign(&(t.kronecker(&t) * realign(rho0)))
}

/// The printed element-by-element formulas for X-state evolution,
/// including the `l·m` coefficient on ρ₂₂(0) in the ρ₂₂ entry. This is a
/// cross-check surface only: the tensor-product result of [`evolve_pair`]
/// differs from it in ρ₂₂ by `e^{−2Γₖ}(l·n − l·m)ρ₂₂(0)`.
pub fn explicit_elements(c: &ChannelCoefficients, rho0: &JointDensity) -> Result<JointDensity> {
    if !is_x_state(rho0, X_STATE_TOL) {
        return Err(Error::Shape(
            "explicit formulas need an X-state input".into(),
        ));
    }
    let e = |i: usize, j: usize| rho0[(i - 1, j - 1)];
    let re = |v: f64| C64::new(v, 0.0);
    let (l, m, n, p) = (re(c.l), re(c.m), re(c.n), re(c.p));
    let (q, r, x, y) = (c.q, c.r, c.x, c.y);

    let r11 = l * l * e(1, 1) + l * m * e(2, 2) + m * l * e(3, 3) + m * m * e(4, 4);
    let r22 = l * p * e(1, 1) + l * m * e(2, 2) + m * p * e(3, 3) + m * n * e(4, 4);
    let r33 = l * p * e(1, 1) + p * m * e(2, 2) + n * l * e(3, 3) + n * m * e(4, 4);
    let r44 = p * p * e(1, 1) + p * n * e(2, 2) + n * p * e(3, 3) + n * n * e(4, 4);

    let r14 = x * x * e(1, 4) + x * y * e(2, 3) + y * x * e(3, 2) + y * y * e(4, 1);
    let r23 = x * r * e(1, 4) + x * q * e(2, 3) + y * r * e(3, 2) + y * q * e(4, 1);
    let r32 = r * x * e(1, 4) + r * y * e(2, 3) + q * x * e(3, 2) + q * y * e(4, 1);
    let r41 = r * r * e(1, 4) + r * q * e(2, 3) + q * r * e(3, 2) + q * q * e(4, 1);

    let s = re((-2.0 * c.gamma_k).exp());
    let mut out = JointDensity::zeros();
    for (i, j, v) in [
        (1, 1, r11),
        (2, 2, r22),
        (3, 3, r33),
        (4, 4, r44),
        (1, 4, r14),
        (2, 3, r23),
        (3, 2, r32),
        (4, 1, r41),
    ] {
        out[(i - 1, j - 1)] = v * s;
    }
    Ok(out)
}

/// Expected ρ₂₂ gap between [`evolve_pair`] and [`explicit_elements`].
pub fn rho22_discrepancy(c: &ChannelCoefficients, rho0: &JointDensity) -> C64 {
    rho0[(1, 1)] * ((c.l * c.n - c.l * c.m) * (-2.0 * c.gamma_k).exp())
}
