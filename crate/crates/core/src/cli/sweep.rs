//! Concurrence surfaces over (γt, β²).

use std::io::Write;

use super::{format_float, linspace, Preset};
use crate::entanglement::concurrence_xstate;
use crate::kernels::{BathParams, CoefficientModel};
use crate::lie_channel::{channel_at, integrate_partial, ChannelCoefficients, IntegratorSettings};
use crate::oracle::rwa_channel;
use crate::two_qubit::{evolve_pair, initial_state, BellFamilyState, Family};
use crate::{Error, JointDensity, Result};

/// Open-interval clip applied to β² grids.
pub const BETA2_CLIP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub preset: Preset,
    pub params: BathParams,
    pub model: CoefficientModel,
    pub family: Family,
    pub beta2_min: f64,
    pub beta2_max: f64,
    pub beta2_steps: usize,
    pub eta_phase: f64,
    /// In units of 1/γ.
    pub t_max: f64,
    pub t_steps: usize,
    pub settings: IntegratorSettings,
}

impl SweepSpec {
    /// Default grids: 51 β² points and 201 time points on γt ∈ [0, 10].
    pub fn new(preset: Preset, family: Family) -> Self {
        let params = preset.params();
        Self {
            preset,
            params,
            model: CoefficientModel::Full,
            family,
            beta2_min: BETA2_CLIP,
            beta2_max: 1.0 - BETA2_CLIP,
            beta2_steps: 51,
            eta_phase: 0.0,
            t_max: 10.0,
            t_steps: 201,
            settings: IntegratorSettings::for_params(&params),
        }
    }

    /// Restrict the β² axis to one value.
    pub fn single_beta2(mut self, beta2: f64) -> Self {
        self.beta2_min = beta2;
        self.beta2_max = beta2;
        self.beta2_steps = 1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.settings.validate()?;
        if self.t_steps == 0 || self.beta2_steps == 0 {
            return Err(Error::Grid("grids must be non-empty".into()));
        }
        if !(self.t_max >= 0.0) || (self.t_steps > 1 && self.t_max == 0.0) {
            return Err(Error::Grid(format!("invalid t_max {}", self.t_max)));
        }
        if !(self.beta2_max >= self.beta2_min) {
            return Err(Error::Grid("beta2 grid must be ascending".into()));
        }
        Ok(())
    }

    pub fn t_grid(&self) -> Vec<f64> {
        linspace(0.0, self.t_max / self.params.gamma, self.t_steps)
    }

    pub fn beta2_grid(&self) -> Vec<f64> {
        let lo = self.beta2_min.clamp(BETA2_CLIP, 1.0 - BETA2_CLIP);
        let hi = self.beta2_max.clamp(BETA2_CLIP, 1.0 - BETA2_CLIP);
        linspace(lo, hi, self.beta2_steps)
    }
}

/// Channels on the time grid; `None` marks points lost to a failure.
#[derive(Debug)]
pub struct ChannelSeries {
    pub times: Vec<f64>,
    pub channels: Vec<Option<ChannelCoefficients>>,
    /// Riccati integrations performed (zero for the rotating-wave preset).
    pub integrations: usize,
    pub failure: Option<Error>,
}

pub fn channel_series(spec: &SweepSpec) -> Result<ChannelSeries> {
    spec.validate()?;
    let times = spec.t_grid();
    if spec.preset.is_rwa() {
        return Ok(ChannelSeries {
            channels: times
                .iter()
                .map(|&t| Some(rwa_channel(t, &spec.params)))
                .collect(),
            times,
            integrations: 0,
            failure: None,
        });
    }
    let run = integrate_partial(spec.model, &spec.params, &times, &spec.settings)?;
    let mut failure = run.failure;
    let mut channels = Vec::with_capacity(times.len());
    for s in &run.states {
        match channel_at(s, spec.model.decay_exponent(s.t, &spec.params)) {
            Ok(c) => channels.push(Some(c)),
            Err(e) => {
                failure.get_or_insert(e);
                break;
            }
        }
    }
    channels.resize(times.len(), None);
    Ok(ChannelSeries {
        times,
        channels,
        integrations: 1,
        failure,
    })
}

/// Concurrence on the (γt, β²) grid, row-major with time outer.
#[derive(Debug)]
pub struct ConcurrenceSurface {
    pub family: Family,
    pub times: Vec<f64>,
    pub beta2: Vec<f64>,
    pub values: Vec<f64>,
    pub integrations: usize,
    pub failure: Option<Error>,
    /// Grid points whose concurrence could not be evaluated.
    pub warnings: Vec<String>,
}

impl ConcurrenceSurface {
    pub fn at(&self, it: usize, ib: usize) -> f64 {
        self.values[it * self.beta2.len() + ib]
    }

    /// Time series for one β² column.
    pub fn column(&self, ib: usize) -> Vec<f64> {
        (0..self.times.len()).map(|it| self.at(it, ib)).collect()
    }

    /// Write `gamma_t,beta2,concurrence` rows; γt uses the given γ.
    pub fn write_csv<W: Write>(&self, mut w: W, gamma: f64) -> std::io::Result<()> {
        writeln!(w, "gamma_t,beta2,concurrence")?;
        for (it, t) in self.times.iter().enumerate() {
            for (ib, b) in self.beta2.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{}",
                    format_float(gamma * t),
                    format_float(*b),
                    format_float(self.at(it, ib))
                )?;
            }
        }
        Ok(())
    }
}

/// Two-qubit states for every β² on one channel.
pub fn evolve_family(
    family: Family,
    beta2: &[f64],
    eta_phase: f64,
    c: &ChannelCoefficients,
) -> Result<Vec<JointDensity>> {
    beta2
        .iter()
        .map(|&b| {
            let rho0 = initial_state(&BellFamilyState::from_beta2(family, b, eta_phase)?)?;
            Ok(evolve_pair(c, &rho0))
        })
        .collect()
}

/// One channel integration, reused across the β² axis.
pub fn sweep(spec: &SweepSpec) -> Result<ConcurrenceSurface> {
    let series = channel_series(spec)?;
    let beta2 = spec.beta2_grid();
    let initial: Vec<JointDensity> = beta2
        .iter()
        .map(|&b| {
            initial_state(&BellFamilyState::from_beta2(
                spec.family,
                b,
                spec.eta_phase,
            )?)
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(series.times.len() * beta2.len());
    let mut warnings = Vec::new();
    for (t, ch) in series.times.iter().zip(&series.channels) {
        for (rho0, b) in initial.iter().zip(&beta2) {
            let v = match ch {
                None => f64::NAN,
                Some(c) => match concurrence_xstate(&evolve_pair(c, rho0)) {
                    Ok(r) => r.value,
                    Err(e) => {
                        warnings.push(format!("gamma_t={t} beta2={b}: {e}"));
                        f64::NAN
                    }
                },
            };
            values.push(v);
        }
    }
    Ok(ConcurrenceSurface {
        family: spec.family,
        times: series.times,
        beta2,
        values,
        integrations: series.integrations,
        failure: series.failure,
        warnings,
    })
}

/// CSV dump of disentangling coefficients, channel entries and Γₖ.
pub fn write_trace<W: Write>(spec: &SweepSpec, mut w: W) -> Result<Option<Error>> {
    spec.validate()?;
    let times = spec.t_grid();
    writeln!(
        w,
        "gamma_t,j_plus_re,j_plus_im,j_0_re,j_0_im,j_minus_re,j_minus_im,k_plus,k_0,k_minus,\
         l,m,n,p,q_re,q_im,r_re,r_im,x_re,x_im,y_re,y_im,gamma_k"
    )?;
    let g = spec.params.gamma;
    if spec.preset.is_rwa() {
        for &t in &times {
            let c = rwa_channel(t, &spec.params);
            let mut fields = vec![format_float(g * t)];
            fields.extend(std::iter::repeat_n("NaN".to_string(), 9));
            fields.extend(channel_fields(&c));
            writeln!(w, "{}", fields.join(","))?;
        }
        return Ok(None);
    }
    let run = integrate_partial(spec.model, &spec.params, &times, &spec.settings)?;
    for s in &run.states {
        let c = channel_at(s, spec.model.decay_exponent(s.t, &spec.params))?;
        let mut fields = vec![format_float(g * s.t)];
        for v in [
            s.j_plus.re,
            s.j_plus.im,
            s.j_0.re,
            s.j_0.im,
            s.j_minus.re,
            s.j_minus.im,
            s.k_plus,
            s.k_0,
            s.k_minus,
        ] {
            fields.push(format_float(v));
        }
        fields.extend(channel_fields(&c));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(run.failure)
}

fn channel_fields(c: &ChannelCoefficients) -> Vec<String> {
    [
        c.l, c.m, c.n, c.p, c.q.re, c.q.im, c.r.re, c.r.im, c.x.re, c.x.im, c.y.re, c.y.im,
        c.gamma_k,
    ]
    .into_iter()
    .map(format_float)
    .collect()
}
