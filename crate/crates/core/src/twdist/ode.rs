//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

/// Why an integration stopped early.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum OdeFailure {
    StepUnderflow { t: f64 },
    NonFinite { t: f64 },
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// 5th-order weights (first-same-as-last: equal to the last row of `A`).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
/// Difference between the 5th- and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) struct DormandPrince<const N: usize, F> {
    rhs: F,
    rtol: f64,
    atol: f64,
    h: f64,
}

impl<const N: usize, F> DormandPrince<N, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub(crate) fn new(rhs: F, tol: f64, initial_step: f64) -> Self {
        Self { rhs, rtol: tol, atol: tol, h: initial_step.abs() }
    }

    /// Advances `y` from `t0` to exactly `t1` (either direction).
    pub(crate) fn advance(&mut self, t0: f64, t1: f64, y: &mut [f64; N]) -> Result<(), OdeFailure> {
        let dir = if t1 >= t0 { 1.0 } else { -1.0 };
        let mut t = t0;
        let min_step = 1e-14 * (1.0 + t0.abs().max(t1.abs()));
        while (t1 - t) * dir > 0.0 {
            let remaining = (t1 - t).abs();
            let mut h = self.h.min(remaining);
            let last = h >= remaining;
            if !last && remaining - h < min_step {
                h = remaining;
            }
            let (y_new, err) = self.step(t, y, dir * h);
            if !y_new.iter().all(|v| v.is_finite()) || !err.is_finite() {
                if h <= min_step {
                    return Err(OdeFailure::NonFinite { t });
                }
                self.h = h * 0.1;
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if h >= remaining { t1 } else { t + dir * h };
                *y = y_new;
                // A step clipped to hit t1 says nothing about the step size we
                // can afford next time.
                if !(last && h < self.h) {
                    self.h = h * factor;
                }
            } else {
                self.h = h * factor;
                if self.h < min_step {
                    return Err(OdeFailure::StepUnderflow { t });
                }
            }
        }
        Ok(())
    }

    fn step(&self, t: f64, y: &[f64; N], h: f64) -> ([f64; N], f64) {
        let mut k = [[0.0; N]; 7];
        k[0] = (self.rhs)(t, y);
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = (self.rhs)(t + C[s] * h, &ys);
        }
        let mut y_new = *y;
        let mut err_sq = 0.0;
        for i in 0..N {
            let mut incr = 0.0;
            let mut e = 0.0;
            for s in 0..7 {
                incr += B5[s] * k[s][i];
                e += E[s] * k[s][i];
            }
            y_new[i] += h * incr;
            let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (h * e / scale).powi(2);
        }
        (y_new, (err_sq / N as f64).sqrt())
    }
}
