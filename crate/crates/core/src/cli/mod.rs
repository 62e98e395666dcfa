//! Parameter presets, surface sweeps, the verification suite and text
//! reports behind the `decoherence` binary.

pub mod report;
pub mod sweep;
pub mod verify;

use std::str::FromStr;

use crate::kernels::BathParams;
use crate::{Error, Result};

/// Parameter sets with λ = 10γ and γ = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// ω₀ = 10λ = 100γ
    A,
    /// ω₀ = λ = 10γ
    B,
    /// ω₀ = 3γ < λ
    C,
    /// Exact rotating-wave model, λ = 10γ.
    Rwa,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::A, Preset::B, Preset::C, Preset::Rwa];
    pub const NON_RWA: [Preset; 3] = [Preset::A, Preset::B, Preset::C];

    pub fn params(self) -> BathParams {
        let omega0 = match self {
            Preset::A => 100.0,
            Preset::B => 10.0,
            Preset::C => 3.0,
            // Not used by the rotating-wave amplitude.
            Preset::Rwa => 100.0,
        };
        BathParams {
            omega0,
            gamma: 1.0,
            lambda: 10.0,
        }
    }

    pub fn is_rwa(self) -> bool {
        self == Preset::Rwa
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::A => "A",
            Preset::B => "B",
            Preset::C => "C",
            Preset::Rwa => "RWA",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::A => "omega0 = 10 lambda, lambda = 10 gamma (omega0 >> gamma)",
            Preset::B => "omega0 = lambda = 10 gamma",
            Preset::C => "omega0 = 3 gamma < lambda = 10 gamma",
            Preset::Rwa => "rotating-wave model, lambda = 10 gamma",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Preset::A),
            "B" => Ok(Preset::B),
            "C" => Ok(Preset::C),
            "RWA" => Ok(Preset::Rwa),
            other => Err(Error::InvalidParams(format!("unknown preset {other:?}"))),
        }
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `n` evenly spaced points on `[a, b]`; a single point yields `[a]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Decimal float with 17 significant digits; NaN is written as `NaN`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_case_definitions() {
        let a = Preset::A.params();
        assert_eq!((a.omega0, a.lambda, a.gamma), (100.0, 10.0, 1.0));
        let b = Preset::B.params();
        assert_eq!((b.omega0, b.lambda), (10.0, 10.0));
        let c = Preset::C.params();
        assert_eq!((c.omega0, c.lambda), (3.0, 10.0));
        for p in Preset::ALL {
            assert!(p.params().validate().is_ok());
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("D".parse::<Preset>().is_err());
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 10.0, 1), vec![0.0]);
        let g = linspace(1e-4, 1.0 - 1e-4, 51);
        assert_eq!(g.len(), 51);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[50], 1.0 - 1e-4);
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 0.0, 12345.678901234567] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(f64::NAN), "NaN");
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
    }
}
