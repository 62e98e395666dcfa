//! Per-β² death, revival and plateau summaries.

use std::io::Write;

use super::sweep::ConcurrenceSurface;
use crate::entanglement::{
    detect_esd, find_plateau, EsdReport, Plateau, DEFAULT_DEATH_THRESHOLD,
    DEFAULT_REVIVAL_AMPLITUDE,
};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub beta2: f64,
    pub esd: EsdReport,
    /// Episodes whose peak exceeds [`DEFAULT_REVIVAL_AMPLITUDE`].
    pub revivals: usize,
    pub max_revival: f64,
    pub plateau: Option<Plateau>,
}

/// Longest stretch with |dC/dt| < `0.01·max C` (per unit γt) and C above
/// the death threshold.
pub fn plateau_of(times: &[f64], values: &[f64], gamma: f64) -> Result<Option<Plateau>> {
    let peak = values
        .iter()
        .copied()
        .filter(|v| !v.is_nan())
        .fold(0.0, f64::max);
    let scaled: Vec<f64> = times.iter().map(|t| gamma * t).collect();
    let plateau = find_plateau(&scaled, values, 0.01 * peak, DEFAULT_DEATH_THRESHOLD)?;
    Ok(plateau.map(|p| Plateau {
        start: p.start / gamma,
        end: p.end / gamma,
        ..p
    }))
}

pub fn report(surface: &ConcurrenceSurface, gamma: f64) -> Result<Vec<ReportRow>> {
    (0..surface.beta2.len())
        .map(|ib| {
            let values = surface.column(ib);
            let esd = detect_esd(&surface.times, &values, DEFAULT_DEATH_THRESHOLD)?;
            Ok(ReportRow {
                beta2: surface.beta2[ib],
                revivals: esd.revival_count(DEFAULT_REVIVAL_AMPLITUDE),
                max_revival: esd.max_revival_amplitude(),
                plateau: plateau_of(&surface.times, &values, gamma)?,
                esd,
            })
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:.6}"))
}

/// Tab-separated table; times are printed as γt.
pub fn write_report<W: Write>(rows: &[ReportRow], gamma: f64, mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "beta2\tdeath_gamma_t\tpermanent_death_gamma_t\trevivals\tmax_revival\tplateau_start\tplateau_end\tplateau_level"
    )?;
    for r in rows {
        writeln!(
            w,
            "{:.6}\t{}\t{}\t{}\t{:.6e}\t{}\t{}\t{}",
            r.beta2,
            opt(r.esd.death_time.map(|t| gamma * t)),
            opt(r.esd.permanent_death_time.map(|t| gamma * t)),
            r.revivals,
            r.max_revival,
            opt(r.plateau.map(|p| gamma * p.start)),
            opt(r.plateau.map(|p| gamma * p.end)),
            opt(r.plateau.map(|p| p.mean_level)),
        )?;
    }
    Ok(())
}
