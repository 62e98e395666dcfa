//! Lorentzian reservoir kernels and the time-dependent coefficients of the
//! single-qubit master equation.
//!
//! All functions are pure in `(t, params)`. Frequencies and times share one
//! unit system; nothing here assumes `γ = 1`.

use std::f64::consts::PI;

use crate::{Error, Result, C64};

/// Atom frequency and Lorentzian reservoir parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// Atomic transition frequency ω₀.
    pub omega0: f64,
    /// Spectral width γ of the Lorentzian.
    pub gamma: f64,
    /// Coupling strength λ.
    pub lambda: f64,
}

impl BathParams {
    pub fn new(omega0: f64, gamma: f64, lambda: f64) -> Result<Self> {
        let p = Self {
            omega0,
            gamma,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega0", self.omega0),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Reservoir correlation time τ_r = 1/γ.
    pub fn correlation_time(&self) -> f64 {
        1.0 / self.gamma
    }

    /// γ + 2iω₀, the complex rate appearing in the counter-rotating kernel.
    fn z(&self) -> C64 {
        C64::new(self.gamma, 2.0 * self.omega0)
    }
}

/// Coefficients multiplying the superoperators J₀, J₊, J₋, K₀, K₊, K₋.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub eps0: C64,
    pub eps_plus: C64,
    pub eps_minus: C64,
    pub nu0: f64,
    pub nu_plus: f64,
    pub nu_minus: f64,
}

/// Which generator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientModel {
    /// Full generator including counter-rotating contributions.
    #[default]
    Full,
    /// Exploration mode: the generator with ε₊, ε₋ and every α-derived
    /// term removed. Not a validated model.
    TruncatedRwa,
}

impl CoefficientModel {
    pub fn coefficients(self, t: f64, p: &BathParams) -> CoefficientSet {
        match self {
            CoefficientModel::Full => coefficients(t, p),
            CoefficientModel::TruncatedRwa => {
                let f = rise(t, p);
                CoefficientSet {
                    eps0: C64::new(0.0, -2.0 * p.omega0),
                    eps_plus: C64::new(0.0, 0.0),
                    eps_minus: C64::new(0.0, 0.0),
                    nu0: -p.lambda * f,
                    nu_plus: 0.0,
                    nu_minus: p.lambda * f,
                }
            }
        }
    }

    /// Scalar decay exponent Γₖ(t) for this generator.
    pub fn decay_exponent(self, t: f64, p: &BathParams) -> f64 {
        match self {
            CoefficientModel::Full => decay_exponent(t, p),
            CoefficientModel::TruncatedRwa => 0.5 * p.lambda * rise_integral(t, p),
        }
    }
}

/// Lorentzian spectral density J(ω).
pub fn spectral_density(omega: f64, p: &BathParams) -> f64 {
    let dw = omega - p.omega0;
    p.lambda * p.gamma * p.gamma / (2.0 * PI * (dw * dw + p.gamma * p.gamma))
}

/// Rotating-wave correlation function α₁(t) = (γλ/2)e^{−γt}.
pub fn alpha1(t: f64, p: &BathParams) -> C64 {
    C64::new(0.5 * p.gamma * p.lambda * (-p.gamma * t).exp(), 0.0)
}

/// Counter-rotating correlation function α₂(t) = (γλ/2)e^{(−γ+2iω₀)t}.
pub fn alpha2(t: f64, p: &BathParams) -> C64 {
    let amp = 0.5 * p.gamma * p.lambda * (-p.gamma * t).exp();
    C64::from_polar(amp, 2.0 * p.omega0 * t)
}

/// α(t) = (1 − e^{−(γ+2iω₀)t}) / (γ + 2iω₀).
pub fn alpha(t: f64, p: &BathParams) -> C64 {
    -expm1_complex(-p.z() * t) / p.z()
}

/// ∫₀ᵗ α(s) ds in closed form, returned as α̃^R + iα̃^I.
pub fn alpha_tilde(t: f64, p: &BathParams) -> C64 {
    let (g, w) = (p.gamma, p.omega0);
    let d = 4.0 * w * w + g * g;
    let decay = (-g * t).exp();
    let sin2 = (2.0 * w * t).sin();
    // 1 − e^{−γt}cos(2ω₀t), written to stay accurate for small t.
    let one_minus_c = -(-g * t).exp_m1() + decay * 2.0 * (w * t).sin().powi(2);
    let s = decay * sin2;

    let re = (g * t + ((4.0 * w * w - g * g) * one_minus_c - 4.0 * w * g * s) / d) / d;
    let im = (-2.0 * w * t + (4.0 * w * g * one_minus_c + (4.0 * w * w - g * g) * s) / d) / d;
    C64::new(re, im)
}

/// f(t) = 1 − e^{−γt}.
pub fn rise(t: f64, p: &BathParams) -> f64 {
    -(-p.gamma * t).exp_m1()
}

/// F(t) = ∫₀ᵗ f = t − (1 − e^{−γt})/γ.
pub fn rise_integral(t: f64, p: &BathParams) -> f64 {
    x_plus_expm1_neg(p.gamma * t) / p.gamma
}

/// Decay exponent Γₖ(t) = λ(γα̃^R + F(t))/2.
pub fn decay_exponent(t: f64, p: &BathParams) -> f64 {
    0.5 * p.lambda * (p.gamma * alpha_tilde(t, p).re + rise_integral(t, p))
}

/// Master-equation coefficients at time `t`.
pub fn coefficients(t: f64, p: &BathParams) -> CoefficientSet {
    let a = alpha(t, p);
    let f = rise(t, p);
    let (lam, g) = (p.lambda, p.gamma);
    let eps_plus = 0.5 * lam * (g * a + f);
    CoefficientSet {
        eps0: C64::new(0.0, -(2.0 * p.omega0 - lam * g * a.im)),
        eps_plus,
        eps_minus: eps_plus.conj(),
        nu0: lam * (g * a.re - f),
        nu_plus: lam * g * a.re,
        nu_minus: lam * f,
    }
}

/// e^z − 1 without cancellation near z = 0.
fn expm1_complex(z: C64) -> C64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    let re = z.re.exp_m1() * c - 2.0 * half * half;
    let im = z.re.exp() * s;
    C64::new(re, im)
}

/// x + e^{−x} − 1, series below x = 0.1.
fn x_plus_expm1_neg(x: f64) -> f64 {
    if x.abs() >= 0.1 {
        return x + (-x).exp_m1();
    }
    // Σ_{k≥2} (−x)^k / k!
    let mut term = 0.5 * x * x;
    let mut sum = term;
    for k in 3..20 {
        term *= -x / k as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}
