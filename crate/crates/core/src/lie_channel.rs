//! Disentangled propagator of the single-qubit master equation.
//!
//! The time-ordered exponential of each superoperator algebra is written
//! as `e^{X₊L₊} e^{X₀L₀} e^{X₋L₋}`. The coefficients start at zero (the
//! identity map) and follow the Riccati system
//!
//! ```text
//! Ẋ₊ = μ₊ − μ₋X₊² + μ₀X₊
//! Ẋ₀ = μ₀ − 2μ₋X₊
//! Ẋ₋ = μ₋ e^{X₀}
//! ```
//!
//! with `μ = ε` for the complex coherence triple `j` and `μ = ν` for the
//! real population triple `k`. Both triples are integrated together as one
//! nine-component real system under a single step controller.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::{Matrix4, Vector4};

use crate::kernels::{BathParams, CoefficientModel, CoefficientSet};
use crate::ode::{DenseRun, Dopri5, OdeFailure, OdeStats};
use crate::{Density2, Error, Result, C64};

/// Largest exponent accepted before `exp` overflows.
const MAX_EXPONENT: f64 = 709.0;

/// The six disentangling coefficients at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisentangleState {
    pub t: f64,
    pub j_plus: C64,
    pub j_0: C64,
    pub j_minus: C64,
    pub k_plus: f64,
    pub k_0: f64,
    pub k_minus: f64,
}

/// Time derivative of a [`DisentangleState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisentangleRate {
    pub j_plus: C64,
    pub j_0: C64,
    pub j_minus: C64,
    pub k_plus: f64,
    pub k_0: f64,
    pub k_minus: f64,
}

impl DisentangleState {
    pub fn zero(t: f64) -> Self {
        let z = C64::new(0.0, 0.0);
        Self {
            t,
            j_plus: z,
            j_0: z,
            j_minus: z,
            k_plus: 0.0,
            k_0: 0.0,
            k_minus: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Largest modulus among the six coefficients.
    pub fn max_magnitude(&self) -> f64 {
        [
            self.j_plus.norm(),
            self.j_0.norm(),
            self.j_minus.norm(),
            self.k_plus.abs(),
            self.k_0.abs(),
            self.k_minus.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    fn to_array(self) -> [f64; 9] {
        [
            self.j_plus.re,
            self.j_plus.im,
            self.j_0.re,
            self.j_0.im,
            self.j_minus.re,
            self.j_minus.im,
            self.k_plus,
            self.k_0,
            self.k_minus,
        ]
    }

    fn from_array(t: f64, a: &[f64; 9]) -> Self {
        Self {
            t,
            j_plus: C64::new(a[0], a[1]),
            j_0: C64::new(a[2], a[3]),
            j_minus: C64::new(a[4], a[5]),
            k_plus: a[6],
            k_0: a[7],
            k_minus: a[8],
        }
    }
}

fn riccati_triple<T>(mu_plus: T, mu_0: T, mu_minus: T, x_plus: T, exp_x0: T) -> (T, T, T)
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + From<f64>,
{
    let two = T::from(2.0);
    (
        mu_plus - mu_minus * x_plus * x_plus + mu_0 * x_plus,
        mu_0 - two * mu_minus * x_plus,
        mu_minus * exp_x0,
    )
}

/// Right-hand side of the two Riccati systems.
pub fn riccati_rhs(state: &DisentangleState, c: &CoefficientSet) -> DisentangleRate {
    let (j_plus, j_0, j_minus) = riccati_triple(
        c.eps_plus,
        c.eps0,
        c.eps_minus,
        state.j_plus,
        state.j_0.exp(),
    );
    let (k_plus, k_0, k_minus) =
        riccati_triple(c.nu_plus, c.nu0, c.nu_minus, state.k_plus, state.k_0.exp());
    DisentangleRate {
        j_plus,
        j_0,
        j_minus,
        k_plus,
        k_0,
        k_minus,
    }
}

/// Adaptive integration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub blowup_threshold: f64,
    /// Cap the step at π/(8ω₀) to resolve the 2ω₀ rotation. Only disabled
    /// for diagnostics.
    pub oscillation_cap: bool,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-9,
            max_step: 0.01,
            blowup_threshold: 1e8,
            oscillation_cap: true,
        }
    }
}

impl IntegratorSettings {
    /// Defaults with `max_step = 0.01/γ`.
    pub fn for_params(p: &BathParams) -> Self {
        Self {
            max_step: 0.01 / p.gamma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.rel_tol) && ok(self.abs_tol)) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0) || !(self.blowup_threshold > 0.0) {
            return Err(Error::InvalidParams(
                "max_step and blowup_threshold must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Effective step cap for the given parameters.
    pub fn step_cap(&self, p: &BathParams) -> f64 {
        if self.oscillation_cap {
            self.max_step.min(PI / (8.0 * p.omega0))
        } else {
            f64::INFINITY
        }
    }

    pub(crate) fn solver(&self, p: &BathParams) -> Dopri5 {
        Dopri5 {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.step_cap(p),
            blowup_threshold: self.blowup_threshold,
            ..Dopri5::default()
        }
    }
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        None => return Err(Error::Grid("time grid is empty".into())),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::Grid(format!("time grid must start at 0, got {t0}")))
        }
        _ => {}
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Grid("time grid must be strictly ascending".into()));
    }
    Ok(())
}

pub(crate) fn ode_error(f: OdeFailure, threshold: f64) -> Error {
    match f {
        OdeFailure::Blowup { t } => Error::Blowup { t, threshold },
        OdeFailure::StepUnderflow { t, h } => Error::Tolerance { t, h },
        OdeFailure::MaxSteps { t } => Error::Tolerance { t, h: 0.0 },
    }
}

/// Trajectory of an integration that may have stopped early.
#[derive(Debug)]
pub struct PartialTrajectory {
    /// One state per grid point reached, in grid order.
    pub states: Vec<DisentangleState>,
    pub failure: Option<Error>,
    pub stats: OdeStats,
}

/// Integrate the disentangling coefficients from the zero state and sample
/// them on `t_grid`.
pub fn integrate(
    p: &BathParams,
    t_grid: &[f64],
    s: &IntegratorSettings,
) -> Result<Vec<DisentangleState>> {
    let run = integrate_partial(CoefficientModel::Full, p, t_grid, s)?;
    match run.failure {
        Some(e) => Err(e),
        None => Ok(run.states),
    }
}

/// Like [`integrate`], but keeps the states computed before a failure.
pub fn integrate_partial(
    model: CoefficientModel,
    p: &BathParams,
    t_grid: &[f64],
    s: &IntegratorSettings,
) -> Result<PartialTrajectory> {
    p.validate()?;
    s.validate()?;
    check_grid(t_grid)?;
    let rhs = |t: f64, y: &[f64; 9]| {
        let c = model.coefficients(t, p);
        let d = riccati_rhs(&DisentangleState::from_array(t, y), &c);
        [
            d.j_plus.re,
            d.j_plus.im,
            d.j_0.re,
            d.j_0.im,
            d.j_minus.re,
            d.j_minus.im,
            d.k_plus,
            d.k_0,
            d.k_minus,
        ]
    };
    let size = |y: &[f64; 9]| DisentangleState::from_array(0.0, y).max_magnitude();
    let DenseRun {
        samples,
        failure,
        stats,
    } = s
        .solver(p)
        .solve(rhs, DisentangleState::zero(0.0).to_array(), t_grid, size);
    let states = samples
        .iter()
        .zip(t_grid)
        .map(|(y, &t)| DisentangleState::from_array(t, y))
        .collect();
    Ok(PartialTrajectory {
        states,
        failure: failure.map(|f| ode_error(f, s.blowup_threshold)),
        stats,
    })
}

/// Entries of the single-qubit propagator plus the decay exponent Γₖ.
///
/// The physical map is `e^{−Γₖ}` times the linear map below:
///
/// ```text
/// ρ11 → l ρ11 + m ρ00     ρ10 → x ρ10 + y ρ01
/// ρ00 → n ρ00 + p ρ11     ρ01 → q ρ01 + r ρ10
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCoefficients {
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub p: f64,
    pub q: C64,
    pub r: C64,
    pub x: C64,
    pub y: C64,
    pub gamma_k: f64,
}

impl ChannelCoefficients {
    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self {
            l: 1.0,
            m: 0.0,
            n: 1.0,
            p: 0.0,
            q: one,
            r: zero,
            x: one,
            y: zero,
            gamma_k: 0.0,
        }
    }

    pub fn scale(&self) -> f64 {
        (-self.gamma_k).exp()
    }

    /// Population trace residuals `|e^{−Γₖ}(l+p) − 1|` and `|e^{−Γₖ}(m+n) − 1|`.
    pub fn trace_residuals(&self) -> (f64, f64) {
        let s = self.scale();
        (
            (s * (self.l + self.p) - 1.0).abs(),
            (s * (self.m + self.n) - 1.0).abs(),
        )
    }

    /// Hermiticity residuals `e^{−Γₖ}|x − q*|` and `e^{−Γₖ}|y − r*|`.
    pub fn hermiticity_residuals(&self) -> (f64, f64) {
        let s = self.scale();
        (
            s * (self.x - self.q.conj()).norm(),
            s * (self.y - self.r.conj()).norm(),
        )
    }
}

/// `e^{z/2}` for complex `z`, refusing exponents that would overflow.
fn half_exp(z: C64, what: &str) -> Result<C64> {
    let re = 0.5 * z.re;
    if !re.is_finite() || re.abs() > MAX_EXPONENT {
        return Err(Error::Overflow(format!("{what}/2 = {re} out of range")));
    }
    Ok(C64::from_polar(re.exp(), 0.5 * z.im))
}

/// Assemble the propagator entries from the disentangling coefficients.
pub fn channel_at(state: &DisentangleState, gamma_k: f64) -> Result<ChannelCoefficients> {
    if !state.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite disentangling state at t = {}",
            state.t
        )));
    }
    let ek_up = half_exp(C64::new(state.k_0, 0.0), "k0")?.re;
    let ek_dn = half_exp(C64::new(-state.k_0, 0.0), "k0")?.re;
    let ej_up = half_exp(state.j_0, "Re j0")?;
    let ej_dn = half_exp(-state.j_0, "Re j0")?;
    Ok(ChannelCoefficients {
        l: ek_up + ek_dn * state.k_plus * state.k_minus,
        m: ek_dn * state.k_plus,
        n: ek_dn,
        p: ek_dn * state.k_minus,
        q: ej_dn,
        r: ej_dn * state.j_minus,
        x: ej_up + ej_dn * state.j_plus * state.j_minus,
        y: ej_dn * state.j_plus,
        gamma_k,
    })
}

/// Channel at every state of a trajectory, with Γₖ from `model`.
pub fn channels(
    model: CoefficientModel,
    p: &BathParams,
    states: &[DisentangleState],
) -> Result<Vec<ChannelCoefficients>> {
    states
        .iter()
        .map(|s| channel_at(s, model.decay_exponent(s.t, p)))
        .collect()
}

/// Evolve a single-qubit density matrix through the channel.
pub fn apply_channel(c: &ChannelCoefficients, rho0: &Density2) -> Density2 {
    let s = c.scale();
    let (r11, r10, r01, r00) = (rho0[(0, 0)], rho0[(0, 1)], rho0[(1, 0)], rho0[(1, 1)]);
    Density2::new(
        (r11 * c.l + r00 * c.m) * s,
        (c.x * r10 + c.y * r01) * s,
        (c.q * r01 + c.r * r10) * s,
        (r00 * c.n + r11 * c.p) * s,
    )
}

/// Row-major vectorization `(ρ11, ρ10, ρ01, ρ00)`.
pub fn vectorize(rho: &Density2) -> Vector4<C64> {
    Vector4::new(rho[(0, 0)], rho[(0, 1)], rho[(1, 0)], rho[(1, 1)])
}

pub fn unvectorize(v: &Vector4<C64>) -> Density2 {
    Density2::new(v[0], v[1], v[2], v[3])
}

/// Linear map of the channel on [`vectorize`]d density matrices.
pub fn transfer_matrix(c: &ChannelCoefficients) -> Matrix4<C64> {
    let s = c.scale();
    let re = |v: f64| C64::new(v * s, 0.0);
    let mut t = Matrix4::zeros();
    t[(0, 0)] = re(c.l);
    t[(0, 3)] = re(c.m);
    t[(3, 0)] = re(c.p);
    t[(3, 3)] = re(c.n);
    t[(1, 1)] = c.x * s;
    t[(1, 2)] = c.y * s;
    t[(2, 1)] = c.r * s;
    t[(2, 2)] = c.q * s;
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::coefficients;
    use approx::assert_relative_eq;

    fn preset(omega0: f64) -> BathParams {
        BathParams::new(omega0, 1.0, 10.0).unwrap()
    }

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn rhs_at_origin_only_drives_j0() {
        let p = preset(10.0);
        let d = riccati_rhs(&DisentangleState::zero(0.0), &coefficients(0.0, &p));
        assert_eq!(d.j_0, C64::new(0.0, -20.0));
        assert_eq!(d.j_plus, C64::new(0.0, 0.0));
        assert_eq!(d.j_minus, C64::new(0.0, 0.0));
        assert_eq!((d.k_plus, d.k_0, d.k_minus), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rhs_at_zero_state_is_the_coefficients() {
        let p = preset(3.0);
        let c = coefficients(0.8, &p);
        let d = riccati_rhs(&DisentangleState::zero(0.8), &c);
        assert_eq!(d.j_plus, c.eps_plus);
        assert_eq!(d.j_0, c.eps0);
        assert_eq!(d.j_minus, c.eps_minus);
        assert_eq!((d.k_plus, d.k_0, d.k_minus), (c.nu_plus, c.nu0, c.nu_minus));
    }

    #[test]
    fn single_point_grid() {
        let states = integrate(&preset(10.0), &[0.0], &IntegratorSettings::default()).unwrap();
        assert_eq!(states, vec![DisentangleState::zero(0.0)]);
    }

    #[test]
    fn grid_must_start_at_zero_and_ascend() {
        let s = IntegratorSettings::default();
        assert!(matches!(
            integrate(&preset(10.0), &[0.1, 0.2], &s),
            Err(Error::Grid(_))
        ));
        assert!(matches!(
            integrate(&preset(10.0), &[0.0, 0.2, 0.2], &s),
            Err(Error::Grid(_))
        ));
        assert!(matches!(
            integrate(&preset(10.0), &[], &s),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn invalid_settings_rejected() {
        let s = IntegratorSettings {
            rel_tol: 0.0,
            ..IntegratorSettings::default()
        };
        assert!(integrate(&preset(10.0), &[0.0, 1.0], &s).is_err());
    }

    #[test]
    fn identity_channel_from_zero_state() {
        let c = channel_at(&DisentangleState::zero(0.0), 0.0).unwrap();
        assert_eq!(c, ChannelCoefficients::identity());
        assert_eq!(transfer_matrix(&c), Matrix4::identity());
    }

    #[test]
    fn population_substitution() {
        let mut s = DisentangleState::zero(1.0);
        s.k_0 = -2.0 * 2f64.ln();
        let c = channel_at(&s, 0.0).unwrap();
        assert_relative_eq!(c.l, 0.5, epsilon = 1e-15);
        assert_relative_eq!(c.n, 2.0, epsilon = 1e-15);
        assert_eq!((c.m, c.p), (0.0, 0.0));
    }

    #[test]
    fn large_imaginary_j0_is_a_pure_phase() {
        let mut s = DisentangleState::zero(1.0);
        s.j_0 = C64::new(0.0, -5.0e4);
        let c = channel_at(&s, 0.0).unwrap();
        assert_relative_eq!(c.q.norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.x.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn overflow_is_reported() {
        let mut s = DisentangleState::zero(1.0);
        s.k_0 = 2000.0;
        assert!(matches!(channel_at(&s, 0.0), Err(Error::Overflow(_))));
        let mut s = DisentangleState::zero(1.0);
        s.j_0 = C64::new(-1500.0, 0.0);
        assert!(matches!(channel_at(&s, 0.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let rho = Density2::new(
            C64::new(0.3, 0.0),
            C64::new(0.1, 0.2),
            C64::new(0.1, -0.2),
            C64::new(0.7, 0.0),
        );
        assert_eq!(apply_channel(&ChannelCoefficients::identity(), &rho), rho);
    }

    #[test]
    fn trace_and_hermiticity_on_preset_c() {
        let p = preset(3.0);
        let t = grid(10.0, 101);
        let states = integrate(&p, &t, &IntegratorSettings::default()).unwrap();
        let chans = channels(CoefficientModel::Full, &p, &states).unwrap();
        for c in &chans {
            let (a, b) = c.trace_residuals();
            assert!(a < 1e-6 && b < 1e-6, "{a} {b}");
            let (h1, h2) = c.hermiticity_residuals();
            assert!(h1 < 1e-6 && h2 < 1e-6, "{h1} {h2}");
        }
    }

    #[test]
    fn hermiticity_pairs_on_preset_b() {
        let p = preset(10.0);
        let states = integrate(&p, &[0.0, 1.0], &IntegratorSettings::default()).unwrap();
        let c = channel_at(&states[1], crate::kernels::decay_exponent(1.0, &p)).unwrap();
        assert!((c.x - c.q.conj()).norm() < 1e-6);
        assert!((c.y - c.r.conj()).norm() < 1e-6);
    }

    #[test]
    fn ground_state_stays_normalised() {
        let p = preset(10.0);
        let t = grid(5.0, 26);
        let states = integrate(&p, &t, &IntegratorSettings::default()).unwrap();
        let ground = Density2::new(
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        );
        for c in channels(CoefficientModel::Full, &p, &states).unwrap() {
            let out = apply_channel(&c, &ground);
            assert!((out.trace().re - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn finite_difference_matches_rhs() {
        let p = preset(10.0);
        let h = 1e-4;
        let t = [0.0, 1.0 - h, 1.0, 1.0 + h];
        let states = integrate(&p, &t, &IntegratorSettings::default()).unwrap();
        let d = riccati_rhs(&states[2], &coefficients(1.0, &p));
        let fd = |a: C64, b: C64| (b - a) / (2.0 * h);
        let (lo, hi) = (&states[1], &states[3]);
        let tol = 1e-5;
        assert!((fd(lo.j_plus, hi.j_plus) - d.j_plus).norm() < tol * (1.0 + d.j_plus.norm()));
        assert!((fd(lo.j_0, hi.j_0) - d.j_0).norm() < tol * (1.0 + d.j_0.norm()));
        assert!((fd(lo.j_minus, hi.j_minus) - d.j_minus).norm() < tol * (1.0 + d.j_minus.norm()));
        let fdr = |a: f64, b: f64| (b - a) / (2.0 * h);
        assert!((fdr(lo.k_plus, hi.k_plus) - d.k_plus).abs() < tol * (1.0 + d.k_plus.abs()));
        assert!((fdr(lo.k_0, hi.k_0) - d.k_0).abs() < tol * (1.0 + d.k_0.abs()));
        assert!((fdr(lo.k_minus, hi.k_minus) - d.k_minus).abs() < tol * (1.0 + d.k_minus.abs()));
    }

    #[test]
    fn grid_refinement_is_consistent() {
        let p = preset(10.0);
        let s = IntegratorSettings::default();
        let coarse = integrate(&p, &grid(10.0, 101), &s).unwrap();
        let fine = integrate(&p, &grid(10.0, 201), &s).unwrap();
        for (i, a) in coarse.iter().enumerate() {
            let b = &fine[2 * i];
            let ca = channel_at(a, 0.0).unwrap();
            let cb = channel_at(b, 0.0).unwrap();
            let g = crate::kernels::decay_exponent(a.t, &p);
            let scale = (-g).exp();
            assert!(scale * (ca.x - cb.x).norm() < 10.0 * s.rel_tol);
            assert!(scale * (ca.l - cb.l).abs() < 10.0 * s.rel_tol);
        }
    }

    #[test]
    fn transfer_matrix_matches_apply() {
        let p = preset(10.0);
        let states = integrate(&p, &[0.0, 2.0], &IntegratorSettings::default()).unwrap();
        let c = channel_at(&states[1], crate::kernels::decay_exponent(2.0, &p)).unwrap();
        let rho = Density2::new(
            C64::new(0.6, 0.0),
            C64::new(0.2, -0.3),
            C64::new(0.2, 0.3),
            C64::new(0.4, 0.0),
        );
        let via_t = unvectorize(&(transfer_matrix(&c) * vectorize(&rho)));
        assert!((via_t - apply_channel(&c, &rho)).norm() < 1e-14);
        // Columns of the population block sum to one.
        let t = transfer_matrix(&c);
        assert!(((t[(0, 0)] + t[(3, 0)]).re - 1.0).abs() < 1e-6);
        assert!(((t[(0, 3)] + t[(3, 3)]).re - 1.0).abs() < 1e-6);
    }
}
