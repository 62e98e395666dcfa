//! Wootters concurrence and sudden-death / revival detection.

use nalgebra::{Matrix4, SMatrix};

use crate::two_qubit::{is_x_state, X_STATE_TOL};
use crate::{Error, JointDensity, Result, C64};

/// Diagonal entries more negative than this are rejected.
pub const DIAGONAL_TOL: f64 = 1e-9;

/// Death threshold for [`detect_esd`].
pub const DEFAULT_DEATH_THRESHOLD: f64 = 1e-6;

/// Minimum peak amplitude counted as a revival in reports.
pub const DEFAULT_REVIVAL_AMPLITUDE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceResult {
    /// `max{0, c1, c2}`
    pub value: f64,
    /// `2(|ρ₂₃| − √(ρ₁₁ρ₄₄))`
    pub c1: f64,
    /// `2(|ρ₁₄| − √(ρ₂₂ρ₃₃))`
    pub c2: f64,
}

/// Closed-form concurrence of an X-state.
///
/// Any global decay prefactor must already be part of `rho`.
pub fn concurrence_xstate(rho: &JointDensity) -> Result<ConcurrenceResult> {
    if !is_x_state(rho, X_STATE_TOL) {
        return Err(Error::Shape("concurrence_xstate needs an X-state".into()));
    }
    let mut diag = [0.0; 4];
    for (i, d) in diag.iter_mut().enumerate() {
        let v = rho[(i, i)].re;
        if v < -DIAGONAL_TOL {
            return Err(Error::NegativeDiagonal {
                index: i + 1,
                value: v,
            });
        }
        *d = v.max(0.0);
    }
    // √(ρ23 ρ32) rather than |ρ23|, so that both halves of a slightly
    // non-Hermitian input count equally.
    let c1 = 2.0 * ((rho[(1, 2)].norm() * rho[(2, 1)].norm()).sqrt() - (diag[0] * diag[3]).sqrt());
    let c2 = 2.0 * ((rho[(0, 3)].norm() * rho[(3, 0)].norm()).sqrt() - (diag[1] * diag[2]).sqrt());
    Ok(ConcurrenceResult {
        value: 0.0f64.max(c1).max(c2),
        c1,
        c2,
    })
}

/// σ_y ⊗ σ_y in the product basis (real and symmetric).
fn spin_flip() -> Matrix4<C64> {
    let mut y = Matrix4::zeros();
    for i in 0..4 {
        let s = if i == 0 || i == 3 { -1.0 } else { 1.0 };
        y[(i, 3 - i)] = C64::new(s, 0.0);
    }
    y
}

/// Concurrence of an arbitrary two-qubit density matrix.
///
/// With `ρ = W W†` the values λᵢ (square roots of the eigenvalues of
/// `ρ σ_y⊗σ_y ρ* σ_y⊗σ_y`) are the singular values of `Wᵀ (σ_y⊗σ_y) W`.
/// `W` comes from a diagonally pivoted Cholesky factorization, which keeps
/// small populations to full relative accuracy.
pub fn concurrence_general(rho: &JointDensity) -> Result<f64> {
    let scale = rho.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1e-300);
    let herm_dev = (rho - rho.adjoint())
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    if herm_dev > 1e-8 * scale {
        return Err(Error::Numerical(format!(
            "matrix is not Hermitian (deviation {herm_dev:e})"
        )));
    }
    let w = psd_factor(&((rho + rho.adjoint()) * C64::new(0.5, 0.0)), 1e-8 * scale)?;
    let tau = w.transpose() * spin_flip() * w;
    let mut sv = complex_singular_values(&tau);
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(0.0f64.max(sv[0] - sv[1] - sv[2] - sv[3]))
}

/// `W` with `W W† = a` for Hermitian positive semidefinite `a`. Pivots in
/// `[−tol, 0]` end the factorization; more negative ones are rejected.
fn psd_factor(a: &Matrix4<C64>, tol: f64) -> Result<Matrix4<C64>> {
    let mut a = *a;
    let mut w = Matrix4::<C64>::zeros();
    let mut done = [false; 4];
    for k in 0..4 {
        let (j, pivot) = (0..4)
            .filter(|&i| !done[i])
            .map(|i| (i, a[(i, i)].re))
            .fold((usize::MAX, f64::NEG_INFINITY), |b, c| {
                if c.1 > b.1 {
                    c
                } else {
                    b
                }
            });
        if pivot <= 0.0 {
            if pivot < -tol {
                return Err(Error::Numerical(format!("negative pivot {pivot:e}")));
            }
            let min_rest = (0..4)
                .filter(|&i| !done[i])
                .map(|i| a[(i, i)].re)
                .fold(0.0, f64::min);
            if min_rest < -tol {
                return Err(Error::Numerical(format!("negative pivot {min_rest:e}")));
            }
            break;
        }
        let root = pivot.sqrt();
        for i in 0..4 {
            if !done[i] {
                w[(i, k)] = if i == j {
                    C64::new(root, 0.0)
                } else {
                    a[(i, j)] / root
                };
            }
        }
        done[j] = true;
        for r in 0..4 {
            for c in 0..4 {
                if !done[r] && !done[c] {
                    a[(r, c)] -= w[(r, k)] * w[(c, k)].conj();
                }
            }
        }
    }
    Ok(w)
}

/// Singular values of a complex 4×4 matrix via its real 8×8 embedding,
/// in which every value appears twice.
fn complex_singular_values(m: &Matrix4<C64>) -> Vec<f64> {
    let mut big = SMatrix::<f64, 8, 8>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let z = m[(i, j)];
            big[(i, j)] = z.re;
            big[(i + 4, j + 4)] = z.re;
            big[(i, j + 4)] = -z.im;
            big[(i + 4, j)] = z.im;
        }
    }
    let mut sv: Vec<f64> = big.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.into_iter().step_by(2).collect()
}

/// One interval where concurrence rose back above the death threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalEpisode {
    pub start: f64,
    /// Last sample above threshold; `None` if still alive at the end.
    pub end: Option<f64>,
    pub peak: f64,
    pub peak_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsdReport {
    pub threshold: f64,
    /// First sample time with concurrence below the threshold.
    pub death_time: Option<f64>,
    /// Start of the final below-threshold run, if the sequence ends dead.
    pub permanent_death_time: Option<f64>,
    pub episodes: Vec<RevivalEpisode>,
}

impl EsdReport {
    pub fn revived(&self) -> bool {
        !self.episodes.is_empty()
    }

    /// Episodes whose peak exceeds `amplitude`.
    pub fn revivals_above(&self, amplitude: f64) -> Vec<RevivalEpisode> {
        self.episodes
            .iter()
            .copied()
            .filter(|e| e.peak > amplitude)
            .collect()
    }

    pub fn revival_count(&self, amplitude: f64) -> usize {
        self.revivals_above(amplitude).len()
    }

    pub fn max_revival_amplitude(&self) -> f64 {
        self.episodes.iter().fold(0.0, |m, e| m.max(e.peak))
    }
}

fn check_series(times: &[f64], values: &[f64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::Grid(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < 3 {
        return Err(Error::Grid(format!(
            "need at least 3 samples, got {}",
            times.len()
        )));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Grid(
            "time samples must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Locate the first death and every later revival in a concurrence series.
///
/// NaN samples (failed grid points) are treated as missing and skipped.
pub fn detect_esd(times: &[f64], values: &[f64], threshold: f64) -> Result<EsdReport> {
    check_series(times, values)?;
    if !(threshold > 0.0) {
        return Err(Error::InvalidParams(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let samples: Vec<(f64, f64)> = times
        .iter()
        .copied()
        .zip(values.iter().copied())
        .filter(|(_, v)| !v.is_nan())
        .collect();

    let death_idx = samples.iter().position(|&(_, v)| v < threshold);
    let mut report = EsdReport {
        threshold,
        death_time: death_idx.map(|i| samples[i].0),
        permanent_death_time: None,
        episodes: Vec::new(),
    };
    let Some(death_idx) = death_idx else {
        return Ok(report);
    };

    let mut current: Option<RevivalEpisode> = None;
    let mut last_alive = samples[death_idx].0;
    for &(t, v) in &samples[death_idx..] {
        if v >= threshold {
            let ep = current.get_or_insert(RevivalEpisode {
                start: t,
                end: None,
                peak: v,
                peak_time: t,
            });
            if v > ep.peak {
                ep.peak = v;
                ep.peak_time = t;
            }
            last_alive = t;
        } else if let Some(mut ep) = current.take() {
            ep.end = Some(last_alive);
            report.episodes.push(ep);
        }
    }
    if let Some(ep) = current {
        report.episodes.push(ep);
    } else {
        let tail_start = samples
            .iter()
            .rposition(|&(_, v)| v >= threshold)
            .map_or(0, |i| i + 1);
        report.permanent_death_time = Some(samples[tail_start].0);
    }
    Ok(report)
}

/// A run of samples where the concurrence is nearly flat and non-zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub start: f64,
    pub end: f64,
    pub mean_level: f64,
}

impl Plateau {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Longest interval over which `|ΔC/Δt| < slope_bound` between consecutive
/// samples while `C ≥ floor`. Flat zero stretches are excluded by `floor`.
pub fn find_plateau(
    times: &[f64],
    values: &[f64],
    slope_bound: f64,
    floor: f64,
) -> Result<Option<Plateau>> {
    check_series(times, values)?;
    let mut best: Option<(usize, usize)> = None;
    let mut run_start: Option<usize> = None;
    for i in 0..times.len() - 1 {
        let slope = (values[i + 1] - values[i]) / (times[i + 1] - times[i]);
        let flat = slope.abs() < slope_bound && values[i] >= floor && values[i + 1] >= floor;
        match (flat, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                if best.is_none_or(|(a, b)| times[i] - times[s] > times[b] - times[a]) {
                    best = Some((s, i));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        let e = times.len() - 1;
        if best.is_none_or(|(a, b)| times[e] - times[s] > times[b] - times[a]) {
            best = Some((s, e));
        }
    }
    Ok(best.map(|(a, b)| Plateau {
        start: times[a],
        end: times[b],
        mean_level: values[a..=b].iter().sum::<f64>() / (b - a + 1) as f64,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_qubit::{initial_state, BellFamilyState, Family};

    fn werner(p: f64) -> JointDensity {
        // p|Ψ⁻⟩⟨Ψ⁻| + (1−p)I/4 with |Ψ⁻⟩ = (|10⟩ − |01⟩)/√2
        let mut rho = JointDensity::identity() * C64::new((1.0 - p) / 4.0, 0.0);
        rho[(1, 1)] += C64::new(p / 2.0, 0.0);
        rho[(2, 2)] += C64::new(p / 2.0, 0.0);
        rho[(1, 2)] -= C64::new(p / 2.0, 0.0);
        rho[(2, 1)] -= C64::new(p / 2.0, 0.0);
        rho
    }

    /// Brute force: square roots of the eigenvalues of ρρ̃ from a complex
    /// Schur decomposition (fine for full-rank states).
    fn concurrence_by_eigenvalues(rho: &JointDensity) -> f64 {
        let y = spin_flip();
        let r = rho * y * rho.map(|z| z.conj()) * y;
        let mut ev: Vec<f64> = r
            .schur()
            .eigenvalues()
            .unwrap()
            .iter()
            .map(|z| z.re.max(0.0).sqrt())
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        0.0f64.max(ev[0] - ev[1] - ev[2] - ev[3])
    }

    #[test]
    fn bell_phi_at_origin() {
        let rho =
            initial_state(&BellFamilyState::from_beta2(Family::Phi, 0.5, 0.0).unwrap()).unwrap();
        let c = concurrence_xstate(&rho).unwrap();
        assert!((c.value - 1.0).abs() < 1e-15);
        assert!((c.c1 - 1.0).abs() < 1e-15);
        assert!((c.c2 + 1.0).abs() < 1e-15);
        assert!((concurrence_general(&rho).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbalanced_phi_at_origin() {
        let rho =
            initial_state(&BellFamilyState::from_beta2(Family::Phi, 0.25, 0.0).unwrap()).unwrap();
        let c = concurrence_xstate(&rho).unwrap();
        assert!((c.value - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn product_state_is_separable() {
        let mut rho = JointDensity::zeros();
        rho[(0, 0)] = C64::new(1.0, 0.0);
        let c = concurrence_xstate(&rho).unwrap();
        assert_eq!(c.value, 0.0);
        assert!(c.c1 <= 0.0 && c.c2 <= 0.0);
        assert_eq!(concurrence_general(&rho).unwrap(), 0.0);
    }

    #[test]
    fn nearly_pure_ground_state_is_separable() {
        // Tiny complex coherences used to derail a Hermitian eigensolver.
        let c = |re: f64, im: f64| C64::new(re, im);
        let mut rho = JointDensity::zeros();
        rho[(0, 0)] = c(5.130471669266343e-6, 0.0);
        rho[(0, 3)] = c(2.0122008165739788e-16, 2.1489305282882172e-16);
        rho[(3, 0)] = rho[(0, 3)].conj();
        rho[(1, 1)] = c(0.0022599239800523575, 0.0);
        rho[(2, 2)] = c(0.0022599239800529408, 0.0);
        rho[(1, 2)] = c(6.63995050252776e-16, 0.0);
        rho[(2, 1)] = rho[(1, 2)];
        rho[(3, 3)] = c(0.9954750215680158, 0.0);
        assert_eq!(concurrence_xstate(&rho).unwrap().value, 0.0);
        assert!(concurrence_general(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn rank_deficient_x_state_keeps_small_populations() {
        // √(ρ11 ρ44) ≈ 2.2e-9 must survive the factorization.
        let c = |re: f64| C64::new(re, 0.0);
        let mut rho = JointDensity::zeros();
        rho[(0, 0)] = c(1e-17);
        rho[(1, 1)] = c(0.25);
        rho[(2, 2)] = c(0.25);
        rho[(1, 2)] = c(0.25);
        rho[(2, 1)] = c(0.25);
        rho[(3, 3)] = c(0.5 - 1e-17);
        let x = concurrence_xstate(&rho).unwrap().value;
        let g = concurrence_general(&rho).unwrap();
        assert!((x - g).abs() < 1e-14, "{x} {g}");
    }

    #[test]
    fn werner_state() {
        let rho = werner(0.8);
        assert!((concurrence_general(&rho).unwrap() - 0.7).abs() < 1e-12);
        assert!((concurrence_by_eigenvalues(&rho) - 0.7).abs() < 1e-10);
        assert!((concurrence_xstate(&rho).unwrap().value - 0.7).abs() < 1e-15);
        assert_eq!(concurrence_general(&werner(0.3)).unwrap(), 0.0);
    }

    #[test]
    fn all_bell_states_are_maximal() {
        for family in [Family::Phi, Family::Psi] {
            for phase in [0.0, 1.0, 3.0] {
                let rho = initial_state(&BellFamilyState::from_beta2(family, 0.5, phase).unwrap())
                    .unwrap();
                assert!((concurrence_general(&rho).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut rho = werner(0.5);
        rho[(0, 1)] = C64::new(0.01, 0.0);
        rho[(1, 0)] = C64::new(0.01, 0.0);
        assert!(matches!(concurrence_xstate(&rho), Err(Error::Shape(_))));

        let mut neg = JointDensity::zeros();
        neg[(0, 0)] = C64::new(1.1, 0.0);
        neg[(3, 3)] = C64::new(-0.1, 0.0);
        assert!(matches!(
            concurrence_xstate(&neg),
            Err(Error::NegativeDiagonal { index: 4, .. })
        ));
        assert!(matches!(
            concurrence_general(&neg),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn esd_constant_zero() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let r = detect_esd(&t, &[0.0; 4], 1e-6).unwrap();
        assert_eq!(r.death_time, Some(0.0));
        assert_eq!(r.permanent_death_time, Some(0.0));
        assert!(!r.revived());
    }

    #[test]
    fn esd_episodes_and_permanent_death() {
        let t: Vec<f64> = (0..12).map(f64::from).collect();
        let v = [1.0, 0.5, 0.0, 0.2, 0.3, 0.0, 0.0, 0.05, 0.0, 0.0, 0.0, 0.0];
        let r = detect_esd(&t, &v, 1e-6).unwrap();
        assert_eq!(r.death_time, Some(2.0));
        assert_eq!(r.episodes.len(), 2);
        assert_eq!(r.episodes[0].peak, 0.3);
        assert_eq!(r.episodes[0].start, 3.0);
        assert_eq!(r.episodes[0].end, Some(4.0));
        assert_eq!(r.revival_count(0.1), 1);
        assert_eq!(r.permanent_death_time, Some(8.0));
        assert_eq!(r.max_revival_amplitude(), 0.3);
    }

    #[test]
    fn esd_never_dies() {
        let r = detect_esd(&[0.0, 1.0, 2.0], &[1.0, 0.9, 0.8], 1e-6).unwrap();
        assert_eq!(r.death_time, None);
        assert!(r.episodes.is_empty());
    }

    #[test]
    fn esd_grid_errors() {
        assert!(matches!(
            detect_esd(&[0.0, 1.0], &[1.0, 0.0], 1e-6),
            Err(Error::Grid(_))
        ));
        assert!(matches!(
            detect_esd(&[0.0, 1.0, 1.0], &[1.0, 0.0, 0.0], 1e-6),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn plateau_excludes_zero_stretch() {
        let t: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let v = [1.0, 0.8, 0.6, 0.6, 0.6, 0.6, 0.3, 0.0, 0.0, 0.0];
        let p = find_plateau(&t, &v, 0.01, 1e-6).unwrap().unwrap();
        assert!((p.start - 0.2).abs() < 1e-12 && (p.end - 0.5).abs() < 1e-12);
        assert!((p.mean_level - 0.6).abs() < 1e-12);
    }
}
