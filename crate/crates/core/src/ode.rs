//! Dormand–Prince 5(4) with the standard continuous extension.
//!
//! The state is a fixed-size real array; complex systems are packed as
//! interleaved real/imaginary parts. Output is sampled from the dense
//! interpolant, so the accepted step sequence does not depend on the
//! output grid.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Abort once the size of the state exceeds this.
    pub blowup_threshold: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-9,
            max_step: f64::INFINITY,
            blowup_threshold: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeFailure {
    Blowup { t: f64 },
    StepUnderflow { t: f64, h: f64 },
    MaxSteps { t: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Samples produced before the run stopped, plus the reason it stopped early.
#[derive(Debug, Clone)]
pub struct DenseRun<const N: usize> {
    pub samples: Vec<[f64; N]>,
    pub failure: Option<OdeFailure>,
    pub stats: OdeStats,
}

impl Dopri5 {
    /// Integrate from `t_out[0]` with initial value `y0`, sampling the
    /// solution at every entry of the ascending grid `t_out`.
    ///
    /// `size` measures the state for the blow-up check.
    pub fn solve<const N: usize, F, S>(
        &self,
        mut rhs: F,
        y0: [f64; N],
        t_out: &[f64],
        size: S,
    ) -> DenseRun<N>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        S: Fn(&[f64; N]) -> f64,
    {
        let mut stats = OdeStats::default();
        let mut samples = Vec::with_capacity(t_out.len());
        if t_out.is_empty() {
            return DenseRun {
                samples,
                failure: None,
                stats,
            };
        }
        let t_end = *t_out.last().unwrap();
        let mut t = t_out[0];
        let mut y = y0;
        samples.push(y0);
        let mut next = 1;
        while next < t_out.len() && t_out[next] <= t {
            samples.push(y0);
            next += 1;
        }
        if next == t_out.len() {
            return DenseRun {
                samples,
                failure: None,
                stats,
            };
        }

        let mut k1 = rhs(t, &y);
        stats.evaluations += 1;
        let mut h = self.initial_step(&mut rhs, t, &y, &k1, t_end - t, &mut stats);
        let mut last_rejected = false;

        let fail = |samples, failure, stats| DenseRun {
            samples,
            failure: Some(failure),
            stats,
        };

        loop {
            if stats.accepted + stats.rejected >= self.max_steps {
                return fail(samples, OdeFailure::MaxSteps { t }, stats);
            }
            h = h.min(self.max_step);
            let remaining = t_end - t;
            if h >= remaining || remaining - h < 1e-12 * remaining.abs().max(1e-300) {
                h = remaining;
            }
            let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
            if h < h_min {
                return fail(samples, OdeFailure::StepUnderflow { t, h }, stats);
            }

            let stage = |base: &[f64; N], terms: &[(f64, &[f64; N])]| {
                let mut out = *base;
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (c, k) in terms {
                        acc += c * k[i];
                    }
                    *o += h * acc;
                }
                out
            };

            let k2 = rhs(t + C2 * h, &stage(&y, &[(A21, &k1)]));
            let k3 = rhs(t + C3 * h, &stage(&y, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(
                t + C4 * h,
                &stage(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = rhs(
                t + C5 * h,
                &stage(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let y6 = stage(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            );
            let k6 = rhs(t + h, &y6);
            let y_new = stage(
                &y,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = rhs(t + h, &y_new);
            stats.evaluations += 6;

            let mut err_sq = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.abs_tol + self.rel_tol * y[i].abs().max(y_new[i].abs());
                err_sq += (e / sc) * (e / sc);
            }
            let err = (err_sq / N as f64).sqrt();

            if !err.is_finite() {
                stats.rejected += 1;
                last_rejected = true;
                h *= 0.2;
                continue;
            }

            if err <= 1.0 {
                stats.accepted += 1;
                if size(&y_new) > self.blowup_threshold || y_new.iter().any(|v| !v.is_finite()) {
                    return fail(samples, OdeFailure::Blowup { t: t + h }, stats);
                }

                let mut cont = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = y_new[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    cont[0][i] = y[i];
                    cont[1][i] = ydiff;
                    cont[2][i] = bspl;
                    cont[3][i] = ydiff - h * k7[i] - bspl;
                    cont[4][i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let t_new = if h == remaining { t_end } else { t + h };
                while next < t_out.len() && t_out[next] <= t_new {
                    if t_out[next] == t_new {
                        samples.push(y_new);
                    } else {
                        let theta = (t_out[next] - t) / h;
                        let theta1 = 1.0 - theta;
                        let mut s = [0.0; N];
                        for i in 0..N {
                            s[i] = cont[0][i]
                                + theta
                                    * (cont[1][i]
                                        + theta1
                                            * (cont[2][i]
                                                + theta * (cont[3][i] + theta1 * cont[4][i])));
                        }
                        samples.push(s);
                    }
                    next += 1;
                }

                t = t_new;
                y = y_new;
                k1 = k7;
                if next == t_out.len() {
                    return DenseRun {
                        samples,
                        failure: None,
                        stats,
                    };
                }
                let mut fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
                if last_rejected {
                    fac = fac.min(1.0);
                }
                h *= fac;
                last_rejected = false;
            } else {
                stats.rejected += 1;
                last_rejected = true;
                h *= (0.9 * err.powf(-0.2)).max(0.2);
            }
        }
    }

    fn initial_step<const N: usize, F>(
        &self,
        rhs: &mut F,
        t: f64,
        y: &[f64; N],
        f0: &[f64; N],
        span: f64,
        stats: &mut OdeStats,
    ) -> f64
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let sc = |i: usize| self.abs_tol + self.rel_tol * y[i].abs();
        let rms = |v: &[f64; N]| {
            (v.iter()
                .enumerate()
                .map(|(i, x)| (x / sc(i)).powi(2))
                .sum::<f64>()
                / N as f64)
                .sqrt()
        };
        let d0 = rms(y);
        let d1 = rms(f0);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(self.max_step).min(span);
        let mut y1 = *y;
        for i in 0..N {
            y1[i] += h0 * f0[i];
        }
        let f1 = rhs(t + h0, &y1);
        stats.evaluations += 1;
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = f1[i] - f0[i];
        }
        let d2 = rms(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.max_step).min(span)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn exponential_decay() {
        let solver = Dopri5::default();
        let grid = linspace(0.0, 5.0, 51);
        let run = solver.solve(|_, y: &[f64; 1]| [-y[0]], [1.0], &grid, |y| y[0].abs());
        assert!(run.failure.is_none());
        for (t, y) in grid.iter().zip(&run.samples) {
            assert!((y[0] - (-t).exp()).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let solver = Dopri5 {
            max_step: 0.5,
            ..Dopri5::default()
        };
        // Off-step sample points exercise the interpolant.
        let grid = linspace(0.0, 20.0, 997);
        let run = solver.solve(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            [1.0, 0.0],
            &grid,
            |y| y[0].hypot(y[1]),
        );
        assert!(run.failure.is_none());
        for (t, y) in grid.iter().zip(&run.samples) {
            assert!((y[0] - t.cos()).abs() < 1e-7, "t={t}");
            assert!((y[1] + t.sin()).abs() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn step_sequence_independent_of_output_grid() {
        let solver = Dopri5::default();
        let f = |t: f64, y: &[f64; 1]| [(3.0 * t).cos() * y[0]];
        let coarse = linspace(0.0, 4.0, 9);
        let fine = linspace(0.0, 4.0, 17);
        let a = solver.solve(f, [1.0], &coarse, |y| y[0].abs());
        let b = solver.solve(f, [1.0], &fine, |y| y[0].abs());
        assert_eq!(a.stats.accepted, b.stats.accepted);
        for (i, y) in a.samples.iter().enumerate() {
            assert!((y[0] - b.samples[2 * i][0]).abs() < 1e-12);
        }
    }

    #[test]
    fn blowup_is_reported_with_time() {
        let solver = Dopri5 {
            blowup_threshold: 1e8,
            ..Dopri5::default()
        };
        // y' = y², y(0) = 1 blows up at t = 1.
        let grid = linspace(0.0, 2.0, 21);
        let run = solver.solve(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            [1.0],
            &grid,
            |y| y[0].abs(),
        );
        match run.failure {
            Some(OdeFailure::Blowup { t }) => assert!(t > 0.99 && t <= 1.0, "t={t}"),
            other => panic!("expected blowup, got {other:?}"),
        }
        assert_eq!(run.samples.len(), 10);
    }

    #[test]
    fn single_point_grid_returns_initial_value() {
        let run = Dopri5::default().solve(|_, y: &[f64; 1]| [y[0]], [2.5], &[0.0], |y| y[0]);
        assert_eq!(run.samples, vec![[2.5]]);
        assert!(run.failure.is_none());
    }
}
