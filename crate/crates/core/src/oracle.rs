//! Brute-force references for the disentangled solution.
//!
//! * [`integrate_master_direct`] integrates the single-qubit master
//!   equation itself, applying every superoperator by explicit matrix
//!   products.
//! * [`quadrature`] evaluates kernel integrals numerically.
//! * [`rwa_amplitude`] / [`rwa_channel`] give the exact rotating-wave model
//!   used for comparison surfaces.

use nalgebra::Matrix2;

use crate::kernels::{self, BathParams};
use crate::lie_channel::{check_grid, ode_error, ChannelCoefficients, IntegratorSettings};
use crate::{Density2, Result, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn sigma_plus() -> Matrix2<C64> {
    Matrix2::new(c(0.0), c(1.0), c(0.0), c(0.0))
}

fn sigma_minus() -> Matrix2<C64> {
    Matrix2::new(c(0.0), c(0.0), c(1.0), c(0.0))
}

fn sigma_z() -> Matrix2<C64> {
    Matrix2::new(c(1.0), c(0.0), c(0.0), c(-1.0))
}

/// Full master-equation generator applied to `rho` at time `t`.
pub fn master_rhs(t: f64, p: &BathParams, rho: &Density2) -> Density2 {
    let (lam, g) = (p.lambda, p.gamma);
    let a = kernels::alpha(t, p);
    let f = kernels::rise(t, p);
    let (sp, sm, sz) = (sigma_plus(), sigma_minus(), sigma_z());
    let id = Matrix2::<C64>::identity();
    let excited = sp * sm;

    let j0 = (sz * rho - rho * sz) * c(0.25);
    let jp = sp * rho * sp;
    let jm = sm * rho * sm;
    let k0 = (excited * rho + rho * excited - id * rho) * c(0.5);
    let kp = sp * rho * sm;
    let km = sm * rho * sp;

    let i = C64::new(0.0, 1.0);
    rho * c(-0.5 * lam * (g * a.re + f)) - j0 * (i * (2.0 * p.omega0 - lam * g * a.im))
        + jp * (0.5 * lam * (g * a + f))
        + jm * (0.5 * lam * (g * a.conj() + f))
        + k0 * c(lam * (g * a.re - f))
        + kp * c(lam * g * a.re)
        + km * c(lam * f)
}

/// Integrate the master equation directly for a Hermitian initial state.
///
/// The state is carried as `(ρ11, ρ00, Re ρ10, Im ρ10)`; ρ00 is evolved on
/// its own rather than fixed by the trace so that trace drift stays
/// visible.
pub fn integrate_master_direct(
    p: &BathParams,
    rho0: &Density2,
    t_grid: &[f64],
    s: &IntegratorSettings,
) -> Result<Vec<Density2>> {
    p.validate()?;
    s.validate()?;
    check_grid(t_grid)?;
    let pack = |rho: &Density2| {
        [
            rho[(0, 0)].re,
            rho[(1, 1)].re,
            rho[(0, 1)].re,
            rho[(0, 1)].im,
        ]
    };
    let unpack = |y: &[f64; 4]| {
        let coh = C64::new(y[2], y[3]);
        Density2::new(c(y[0]), coh, coh.conj(), c(y[1]))
    };
    let rhs = |t: f64, y: &[f64; 4]| pack(&master_rhs(t, p, &unpack(y)));
    let size = |y: &[f64; 4]| y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let run = s.solver(p).solve(rhs, pack(rho0), t_grid, size);
    if let Some(f) = run.failure {
        return Err(ode_error(f, s.blowup_threshold));
    }
    Ok(run.samples.iter().map(unpack).collect())
}

/// Excited-state amplitude q(t) of the exact rotating-wave model with the
/// kernel α₁, normalised so that q(0) = 1.
pub fn rwa_amplitude(t: f64, p: &BathParams) -> C64 {
    let g = p.gamma;
    let disc = 2.0 * p.lambda * g - g * g;
    let envelope = (-0.5 * g * t).exp();
    let scale = g * g.max(p.lambda);
    let bracket = if disc.abs() <= 1e-12 * scale {
        1.0 + 0.5 * g * t
    } else if disc > 0.0 {
        let d = disc.sqrt();
        (0.5 * d * t).cos() + g / d * (0.5 * d * t).sin()
    } else {
        let d = (-disc).sqrt();
        (0.5 * d * t).cosh() + g / d * (0.5 * d * t).sinh()
    };
    c(envelope * bracket)
}

/// Rotating-wave channel packaged for the two-qubit pipeline (Γₖ = 0).
pub fn rwa_channel(t: f64, p: &BathParams) -> ChannelCoefficients {
    let q = rwa_amplitude(t, p);
    let pop = q.norm_sqr();
    ChannelCoefficients {
        l: pop,
        m: 0.0,
        n: 1.0,
        p: 1.0 - pop,
        q: q.conj(),
        r: c(0.0),
        x: q,
        y: c(0.0),
        gamma_k: 0.0,
    }
}

/// |q̇(t) + ∫₀ᵗ α₁(t−s) q(s) ds| with q̇ by central differences.
pub fn rwa_residual(t: f64, p: &BathParams) -> f64 {
    let h = 1e-5 / p.gamma;
    let dq = (rwa_amplitude(t + h, p) - rwa_amplitude(t - h, p)) / (2.0 * h);
    let memory = quadrature::integrate_complex(
        |s| kernels::alpha1(t - s, p) * rwa_amplitude(s, p),
        0.0,
        t,
        1e-12,
    );
    (dq + memory).norm()
}

pub mod quadrature {
    //! Adaptive Gauss–Kronrod (7/15) and oscillatory half-line integrals.

    use std::f64::consts::PI;

    use crate::C64;

    const XGK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_8,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];

    fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let fc = f(center);
        let mut kronrod = fc * WGK[7];
        let mut gauss = fc * WG[3];
        for j in 0..7 {
            let dx = half * XGK[j];
            let pair = f(center - dx) + f(center + dx);
            kronrod += pair * WGK[j];
            if j % 2 == 1 {
                gauss += pair * WG[j / 2];
            }
        }
        let value = kronrod * half;
        let err = ((kronrod - gauss) * half).norm();
        (value, err)
    }

    fn adapt<F: Fn(f64) -> C64>(
        f: &F,
        a: f64,
        b: f64,
        whole: C64,
        tol: f64,
        floor: f64,
        depth: u32,
    ) -> C64 {
        let mid = 0.5 * (a + b);
        let (left, el) = gk15(f, a, mid);
        let (right, er) = gk15(f, mid, b);
        let sum = left + right;
        let tol = tol.max(floor);
        if depth == 0 || (el + er <= tol && (sum - whole).norm() <= 1e3 * tol) {
            return sum;
        }
        adapt(f, a, mid, left, 0.5 * tol, 0.5 * floor, depth - 1)
            + adapt(f, mid, b, right, 0.5 * tol, 0.5 * floor, depth - 1)
    }

    /// ∫ₐᵇ f for complex-valued `f`.
    ///
    /// Requests below the rounding level of ∫|f| are raised to it.
    pub fn integrate_complex<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, abs_tol: f64) -> C64 {
        if a == b {
            return C64::new(0.0, 0.0);
        }
        let (whole, _) = gk15(&f, a, b);
        let (magnitude, _) = gk15(&|x| C64::new(f(x).norm(), 0.0), a, b);
        let floor = 64.0 * f64::EPSILON * magnitude.re;
        adapt(&f, a, b, whole, abs_tol, floor, 30)
    }

    /// ∫ₐᵇ f for real-valued `f`.
    pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
        integrate_complex(|x| C64::new(f(x), 0.0), a, b, abs_tol).re
    }

    /// Wynn's ε-algorithm applied to a sequence of partial sums.
    fn wynn_epsilon(sums: &[f64]) -> f64 {
        let n = sums.len();
        let mut prev = vec![0.0; n + 1];
        let mut cur: Vec<f64> = sums.to_vec();
        let mut best = *sums.last().unwrap();
        let mut col = 0;
        while cur.len() > 1 {
            let mut next = Vec::with_capacity(cur.len() - 1);
            for i in 0..cur.len() - 1 {
                let diff = cur[i + 1] - cur[i];
                if diff == 0.0 {
                    return cur[i + 1];
                }
                next.push(prev[i + 1] + 1.0 / diff);
            }
            prev = cur;
            cur = next;
            col += 1;
            if col % 2 == 0 {
                best = *cur.last().unwrap();
            }
        }
        best
    }

    /// ∫₀^∞ h(x) cos(ωx) dx and ∫₀^∞ h(x) sin(ωx) dx for ω > 0 and `h`
    /// decaying at infinity: integrate half-periods and extrapolate the
    /// alternating partial sums.
    pub fn fourier_half_line<H: Fn(f64) -> f64>(h: H, omega: f64, abs_tol: f64) -> (f64, f64) {
        assert!(omega > 0.0, "frequency must be positive");
        let half_period = PI / omega;
        let terms = 48;
        let (mut cos_sum, mut sin_sum) = (0.0, 0.0);
        let mut cos_partial = Vec::with_capacity(terms);
        let mut sin_partial = Vec::with_capacity(terms);
        for k in 0..terms {
            let a = k as f64 * half_period;
            let b = a + half_period;
            let v = integrate_complex(
                |x| C64::from_polar(h(x), omega * x),
                a,
                b,
                abs_tol / terms as f64,
            );
            cos_sum += v.re;
            sin_sum += v.im;
            cos_partial.push(cos_sum);
            sin_partial.push(sin_sum);
        }
        (wynn_epsilon(&cos_partial), wynn_epsilon(&sin_partial))
    }

    /// ∫_{−∞}^{∞} h(x) e^{iωx} dx for ω > 0.
    pub fn fourier_real_line<H: Fn(f64) -> f64>(h: H, omega: f64, abs_tol: f64) -> C64 {
        let (c_pos, s_pos) = fourier_half_line(&h, omega, 0.5 * abs_tol);
        let (c_neg, s_neg) = fourier_half_line(|x| h(-x), omega, 0.5 * abs_tol);
        C64::new(c_pos + c_neg, s_pos - s_neg)
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_channel::{apply_channel, channels, integrate};
    use crate::CoefficientModel;

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
    }

    fn dm(r11: f64, r10: C64, r00: f64) -> Density2 {
        Density2::new(c(r11), r10, r10.conj(), c(r00))
    }

    #[test]
    fn direct_starts_at_initial_state() {
        let p = BathParams::new(10.0, 1.0, 10.0).unwrap();
        let rho = dm(0.3, C64::new(0.2, 0.1), 0.7);
        let out =
            integrate_master_direct(&p, &rho, &[0.0], &IntegratorSettings::default()).unwrap();
        assert_eq!(out, vec![rho]);
    }

    #[test]
    fn generator_is_trace_free_and_hermitian() {
        let p = BathParams::new(3.0, 1.0, 10.0).unwrap();
        let rho = dm(0.4, C64::new(0.1, -0.3), 0.6);
        for t in [0.0, 0.2, 1.0, 7.5] {
            let d = master_rhs(t, &p, &rho);
            assert!(d.trace().norm() < 1e-13);
            assert!((d - d.adjoint()).norm() < 1e-13);
        }
    }

    #[test]
    fn mixed_state_trace_conserved() {
        let p = BathParams::new(3.0, 1.0, 10.0).unwrap();
        let rho = dm(0.5, c(0.0), 0.5);
        let out =
            integrate_master_direct(&p, &rho, &grid(10.0, 101), &IntegratorSettings::default())
                .unwrap();
        for r in out {
            assert!((r.trace().re - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn excited_state_matches_lie_channel_on_preset_b() {
        let p = BathParams::new(10.0, 1.0, 10.0).unwrap();
        let s = IntegratorSettings::default();
        let t = grid(10.0, 101);
        let rho = dm(1.0, c(0.0), 0.0);
        let direct = integrate_master_direct(&p, &rho, &t, &s).unwrap();
        let chans = channels(CoefficientModel::Full, &p, &integrate(&p, &t, &s).unwrap()).unwrap();
        for (d, ch) in direct.iter().zip(&chans) {
            let lie = apply_channel(ch, &rho);
            let dev = (d - lie).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            assert!(dev < 1e-6, "deviation {dev}");
        }
    }

    #[test]
    fn excited_population_decays_on_preset_a() {
        let p = BathParams::new(100.0, 1.0, 10.0).unwrap();
        let out = integrate_master_direct(
            &p,
            &dm(1.0, c(0.0), 0.0),
            &[0.0, 5.0],
            &IntegratorSettings::default(),
        )
        .unwrap();
        assert!(out[1][(0, 0)].re < 0.01);
    }

    #[test]
    fn rwa_amplitude_at_origin_and_bounded() {
        let p = BathParams::new(10.0, 1.0, 10.0).unwrap();
        assert_eq!(rwa_amplitude(0.0, &p), c(1.0));
        for t in grid(10.0, 501) {
            assert!(rwa_amplitude(t, &p).norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn rwa_amplitude_weak_coupling_and_critical_branches() {
        // 2λγ < γ²: overdamped, monotone decay.
        let weak = BathParams::new(10.0, 1.0, 0.2).unwrap();
        let mut last = 1.0;
        for t in grid(10.0, 101).into_iter().skip(1) {
            let q = rwa_amplitude(t, &weak).re;
            assert!(q > 0.0 && q < last);
            last = q;
        }
        for t in [0.5, 3.0, 8.0] {
            assert!(rwa_residual(t, &weak) < 1e-6);
        }
        // 2λγ = γ²
        let crit = BathParams::new(10.0, 1.0, 0.5).unwrap();
        for t in [0.5, 3.0] {
            assert!(rwa_residual(t, &crit) < 1e-6);
        }
    }

    #[test]
    fn rwa_first_zero() {
        let p = BathParams::new(10.0, 1.0, 10.0).unwrap();
        let d = 19f64.sqrt();
        let t_zero = 2.0 * (std::f64::consts::PI - d.atan()) / d;
        assert!(rwa_amplitude(t_zero, &p).norm() < 1e-14);
        // Bisection on the closed form lands on the same root.
        let (mut lo, mut hi) = (0.5, 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if rwa_amplitude(mid, &p).re > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - t_zero).abs() < 1e-12);
        assert!((t_zero - 0.8242).abs() < 1e-4);
    }

    #[test]
    fn rwa_channel_identity_and_trace() {
        let p = BathParams::new(10.0, 1.0, 10.0).unwrap();
        assert_eq!(rwa_channel(0.0, &p), ChannelCoefficients::identity());
        for t in grid(10.0, 51) {
            let ch = rwa_channel(t, &p);
            let (a, b) = ch.trace_residuals();
            assert!(a < 1e-15 && b == 0.0);
        }
    }
}
