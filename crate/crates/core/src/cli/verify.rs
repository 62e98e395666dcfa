//! Oracle checks with a tab-separated PASS/FAIL summary.

use std::fmt;

use super::sweep::{channel_series, sweep, SweepSpec};
use super::{linspace, Preset};
use crate::entanglement::{concurrence_general, concurrence_xstate};
use crate::kernels::{self, BathParams};
use crate::lie_channel::{apply_channel, channel_at, integrate, IntegratorSettings};
use crate::oracle::{self, quadrature};
use crate::two_qubit::{
    evolve_pair, explicit_elements, initial_state, rho22_discrepancy, BellFamilyState, Family,
};
use crate::{Density2, Error, JointDensity, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// NaN when the check could not be evaluated.
    pub deviation: f64,
    pub bound: f64,
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, deviation: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            deviation,
            bound,
            note: None,
        }
    }

    fn failed(name: impl Into<String>, bound: f64, e: &Error) -> Self {
        Self {
            note: Some(e.to_string()),
            ..Self::new(name, f64::NAN, bound)
        }
    }

    fn from_result(name: &str, bound: f64, r: Result<f64>) -> Self {
        match r {
            Ok(d) => Self::new(name, d, bound),
            Err(e) => Self::failed(name, bound, &e),
        }
    }

    pub fn passed(&self) -> bool {
        self.deviation < self.bound
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{:e}\t{:e}\t{}",
            self.name,
            self.deviation,
            self.bound,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub presets: Vec<Preset>,
    /// Overrides the integrator tolerance when set.
    pub rel_tol: Option<f64>,
    /// Drop the π/(8ω₀) step cap (negative control).
    pub uncapped: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            presets: Preset::ALL.to_vec(),
            rel_tol: None,
            uncapped: false,
        }
    }
}

impl VerifyOptions {
    pub fn settings(&self, p: &BathParams) -> IntegratorSettings {
        let mut s = IntegratorSettings::for_params(p);
        if let Some(tol) = self.rel_tol {
            s.rel_tol = tol;
            s.abs_tol = tol;
        }
        s.oscillation_cap = !self.uncapped;
        s
    }
}

fn max_abs<I: IntoIterator<Item = C64>>(it: I) -> f64 {
    it.into_iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Closed-form α̃ and Γₖ against adaptive quadrature of their integrands,
/// on 41 points of γt ∈ [0, 20].
pub fn kernel_quadrature(p: &BathParams) -> (f64, f64) {
    let mut dev_alpha = 0.0f64;
    let mut dev_gamma = 0.0f64;
    for t in linspace(0.0, 20.0 / p.gamma, 41) {
        let a = quadrature::integrate_complex(|s| kernels::alpha(s, p), 0.0, t, 1e-13);
        dev_alpha = dev_alpha.max((a - kernels::alpha_tilde(t, p)).norm());
        let g = quadrature::integrate(
            |s| 0.5 * p.lambda * (p.gamma * kernels::alpha(s, p).re + kernels::rise(s, p)),
            0.0,
            t,
            1e-13,
        );
        dev_gamma = dev_gamma.max((g - kernels::decay_exponent(t, p)).abs());
    }
    (dev_alpha, dev_gamma)
}

/// α₁ and α₂ against the Fourier integrals of the spectral density.
pub fn kernel_correlation(p: &BathParams) -> f64 {
    let lorentz = |u: f64| kernels::spectral_density(u + p.omega0, p);
    let mut dev = 0.0f64;
    for t in linspace(0.5 / p.gamma, 5.0 / p.gamma, 10) {
        let ft = quadrature::fourier_real_line(lorentz, t, 1e-13);
        let a1 = ft.conj();
        let a2 = ft * C64::from_polar(1.0, 2.0 * p.omega0 * t);
        dev = dev
            .max((a1 - kernels::alpha1(t, p)).norm())
            .max((a2 - kernels::alpha2(t, p)).norm());
    }
    dev
}

fn oracle_states() -> Vec<Density2> {
    let c = |re: f64, im: f64| C64::new(re, im);
    vec![
        Density2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)),
        Density2::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
        Density2::new(c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)),
        Density2::new(c(0.6, 0.0), c(0.3, -0.2), c(0.3, 0.2), c(0.4, 0.0)),
    ]
}

/// Largest elementwise gap between the disentangled channel and direct
/// integration of the master equation, over several initial states on a
/// 201-point grid of γt ∈ [0, 10].
pub fn oracle_equivalence(p: &BathParams, s: &IntegratorSettings) -> Result<f64> {
    let grid = linspace(0.0, 10.0 / p.gamma, 201);
    let states = integrate(p, &grid, s)?;
    let channels: Vec<_> = states
        .iter()
        .map(|st| channel_at(st, kernels::decay_exponent(st.t, p)))
        .collect::<Result<_>>()?;
    let mut dev = 0.0f64;
    for rho0 in oracle_states() {
        let direct = oracle::integrate_master_direct(p, &rho0, &grid, s)?;
        for (c, d) in channels.iter().zip(&direct) {
            dev = dev.max(max_abs((apply_channel(c, &rho0) - d).iter().copied()));
        }
    }
    Ok(dev)
}

/// Evolved two-qubit states for every β² of the default grid, both
/// families, every time point.
fn evolved_states(spec: &SweepSpec) -> Result<Vec<(f64, JointDensity)>> {
    let series = channel_series(spec)?;
    if let Some(e) = series.failure {
        return Err(e);
    }
    let beta2 = spec.beta2_grid();
    let mut initial = Vec::new();
    for fam in [Family::Phi, Family::Psi] {
        for &b in &beta2 {
            initial.push(initial_state(&BellFamilyState::from_beta2(
                fam,
                b,
                spec.eta_phase,
            )?)?);
        }
    }
    let mut out = Vec::with_capacity(series.times.len() * initial.len());
    for (t, c) in series.times.iter().zip(&series.channels) {
        let c = c.as_ref().expect("complete series");
        for rho0 in &initial {
            out.push((*t, evolve_pair(c, rho0)));
        }
    }
    Ok(out)
}

/// (max |tr ρ − 1|, max |ρ − ρ†|) over the default sweep grids.
pub fn trace_hermiticity(spec: &SweepSpec) -> Result<(f64, f64)> {
    let mut tr = 0.0f64;
    let mut herm = 0.0f64;
    for (_, rho) in evolved_states(spec)? {
        tr = tr.max((rho.trace() - C64::new(1.0, 0.0)).norm());
        herm = herm.max(max_abs((rho - rho.adjoint()).iter().copied()));
    }
    Ok((tr, herm))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceComparison {
    pub max_deviation: f64,
    pub compared: usize,
    /// States outside the positive cone; the spin-flip concurrence is
    /// undefined there.
    pub non_positive: usize,
}

/// X-state closed form against the spin-flip singular values on every
/// evolved state of the default sweep grids.
pub fn concurrence_dual_path(spec: &SweepSpec) -> Result<ConcurrenceComparison> {
    let mut cmp = ConcurrenceComparison {
        max_deviation: 0.0,
        compared: 0,
        non_positive: 0,
    };
    for (_, rho) in evolved_states(spec)? {
        match (concurrence_xstate(&rho), concurrence_general(&rho)) {
            (Ok(x), Ok(g)) => {
                cmp.max_deviation = cmp.max_deviation.max((x.value - g).abs());
                cmp.compared += 1;
            }
            (_, Err(Error::Numerical(_))) | (Err(Error::NegativeDiagonal { .. }), _) => {
                cmp.non_positive += 1
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Ok(cmp)
}

/// (max gap on the elements other than ρ₂₂, max gap of ρ₂₂ from the
/// predicted `(l·n − l·m)ρ₂₂(0)` discrepancy).
pub fn two_qubit_dual_path(spec: &SweepSpec) -> Result<(f64, f64)> {
    let series = channel_series(spec)?;
    if let Some(e) = series.failure {
        return Err(e);
    }
    let mut others = 0.0f64;
    let mut rho22 = 0.0f64;
    for c in series.channels.iter().flatten() {
        for fam in [Family::Phi, Family::Psi] {
            for b in [0.1, 0.25, 0.5, 0.9] {
                let rho0 = initial_state(&BellFamilyState::from_beta2(fam, b, 0.7)?)?;
                let full = evolve_pair(c, &rho0);
                let printed = explicit_elements(c, &rho0)?;
                for i in 0..4 {
                    for j in 0..4 {
                        let d = (full[(i, j)] - printed[(i, j)]).norm();
                        if (i, j) == (1, 1) {
                            let expected = rho22_discrepancy(c, &rho0);
                            rho22 = rho22.max((full[(1, 1)] - printed[(1, 1)] - expected).norm());
                        } else {
                            others = others.max(d);
                        }
                    }
                }
            }
        }
    }
    Ok((others, rho22))
}

/// |C(0) − 2β√(1−β²)| for both families over a β² and phase grid.
pub fn initial_anchor() -> Result<f64> {
    let mut dev = 0.0f64;
    for fam in [Family::Phi, Family::Psi] {
        for b2 in linspace(1e-4, 1.0 - 1e-4, 51) {
            for phase in linspace(0.0, 2.0 * std::f64::consts::PI, 9) {
                let rho = initial_state(&BellFamilyState::from_beta2(fam, b2, phase)?)?;
                let c = concurrence_xstate(&rho)?.value;
                dev = dev.max((c - 2.0 * (b2 * (1.0 - b2)).sqrt()).abs());
            }
        }
    }
    Ok(dev)
}

/// Largest integro-differential residual of the rotating-wave amplitude on
/// 201 points of γt ∈ [0, 10].
pub fn rwa_residual_max(p: &BathParams) -> f64 {
    linspace(0.0, 10.0 / p.gamma, 201)
        .into_iter()
        .map(|t| oracle::rwa_residual(t, p))
        .fold(0.0, f64::max)
}

/// max |C(t, β²) − C(t, 1 − β²)| on the Phi surface.
pub fn phi_symmetry(spec: &SweepSpec) -> Result<f64> {
    let spec = SweepSpec {
        family: Family::Phi,
        ..spec.clone()
    };
    let s = sweep(&spec)?;
    if let Some(e) = s.failure {
        return Err(e);
    }
    let nb = s.beta2.len();
    let mut dev = 0.0f64;
    for it in 0..s.times.len() {
        for ib in 0..nb {
            let (a, b) = (s.at(it, ib), s.at(it, nb - 1 - ib));
            if a.is_nan() != b.is_nan() {
                return Ok(f64::INFINITY);
            }
            if !a.is_nan() {
                dev = dev.max((a - b).abs());
            }
        }
    }
    Ok(dev)
}

fn preset_spec(preset: Preset, opts: &VerifyOptions) -> SweepSpec {
    let mut spec = SweepSpec::new(preset, Family::Phi);
    spec.settings = opts.settings(&spec.params);
    spec
}

/// Run every check for the selected presets.
pub fn run(opts: &VerifyOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    for &preset in &opts.presets {
        let spec = preset_spec(preset, opts);
        let p = spec.params;
        let tag = preset.name();
        if !preset.is_rwa() {
            let (a, g) = kernel_quadrature(&p);
            checks.push(Check::new(format!("kernel_alpha_tilde_{tag}"), a, 1e-8));
            checks.push(Check::new(format!("kernel_gamma_k_{tag}"), g, 1e-8));
            checks.push(Check::new(
                format!("kernel_correlation_{tag}"),
                kernel_correlation(&p),
                1e-8,
            ));
            checks.push(Check::from_result(
                &format!("oracle_equivalence_{tag}"),
                1e-6,
                oracle_equivalence(&p, &spec.settings),
            ));
            match two_qubit_dual_path(&SweepSpec {
                t_steps: 51,
                ..spec.clone()
            }) {
                Ok((o, r)) => {
                    checks.push(Check::new(format!("two_qubit_dual_path_{tag}"), o, 1e-12));
                    checks.push(Check::new(format!("two_qubit_rho22_typo_{tag}"), r, 1e-12));
                }
                Err(e) => checks.push(Check::failed(
                    format!("two_qubit_dual_path_{tag}"),
                    1e-12,
                    &e,
                )),
            }
        } else {
            checks.push(Check::new("rwa_residual", rwa_residual_max(&p), 1e-6));
        }
        match trace_hermiticity(&spec) {
            Ok((t, h)) => {
                checks.push(Check::new(format!("trace_{tag}"), t, 1e-6));
                checks.push(Check::new(format!("hermiticity_{tag}"), h, 1e-6));
            }
            Err(e) => checks.push(Check::failed(format!("trace_{tag}"), 1e-6, &e)),
        }
        match concurrence_dual_path(&spec) {
            Ok(c) => {
                let mut check = Check::new(
                    format!("concurrence_dual_path_{tag}"),
                    c.max_deviation,
                    1e-10,
                );
                if c.non_positive > 0 {
                    check.note = Some(format!(
                        "{} of {} states outside the positive cone",
                        c.non_positive,
                        c.non_positive + c.compared
                    ));
                }
                checks.push(check);
            }
            Err(e) => checks.push(Check::failed(
                format!("concurrence_dual_path_{tag}"),
                1e-10,
                &e,
            )),
        }
        checks.push(Check::from_result(
            &format!("phi_symmetry_{tag}"),
            1e-9,
            phi_symmetry(&spec),
        ));
    }
    checks.push(Check::from_result(
        "initial_anchor",
        1e-12,
        initial_anchor(),
    ));
    checks
}
