//! Dormand-Prince 5(4) integrator with embedded error control.
//!
//! Small, allocation-free and generic over the state dimension. Callers
//! receive every accepted step (endpoints, states and slopes), which is
//! enough to build cubic Hermite dense output for event location.

use crate::error::{Error, Result};

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

// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One accepted step, reported to the observer.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub x0: f64,
    pub x1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    pub dy0: [f64; N],
    pub dy1: [f64; N],
}

/// Adaptive Dormand-Prince integrator.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5<const N: usize> {
    pub atol: [f64; N],
    pub rtol: [f64; N],
    pub max_steps: usize,
}

impl<const N: usize> Dopri5<N> {
    pub fn new(atol: [f64; N], rtol: [f64; N]) -> Self {
        Self { atol, rtol, max_steps: 2_000_000 }
    }

    /// Integrate from `x0` to `x1` (either direction), returning the final
    /// state. `observer` sees every accepted step in order.
    pub fn integrate<F, O>(&self, mut f: F, x0: f64, x1: f64, y0: [f64; N], mut observer: O) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        O: FnMut(&Step<N>),
    {
        let span = x1 - x0;
        if span == 0.0 {
            return Ok(y0);
        }
        let dir = span.signum();
        let mut x = x0;
        let mut y = y0;
        let mut k1 = f(x, &y);
        let mut h = self.initial_step(&mut f, x, &y, &k1, span.abs()) * dir;
        let h_min = 1e-14 * (x0.abs().max(x1.abs()).max(span.abs()));
        let mut steps = 0;
        let mut last_rejected = false;

        loop {
            if (x1 - x) * dir <= 0.0 {
                return Ok(y);
            }
            let remaining = x1 - x;
            let final_step = h.abs() >= remaining.abs();
            if final_step {
                h = remaining;
            }
            steps += 1;
            if steps > self.max_steps || h.abs() < h_min {
                return Err(Error::StepSizeUnderflow { y: x });
            }

            let mut tmp = [0.0; N];
            for i in 0..N {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            let k2 = f(x + C2 * h, &tmp);
            for i in 0..N {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            let k3 = f(x + C3 * h, &tmp);
            for i in 0..N {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            let k4 = f(x + C4 * h, &tmp);
            for i in 0..N {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            let k5 = f(x + C5 * h, &tmp);
            for i in 0..N {
                tmp[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let x_new = if final_step { x1 } else { x + h };
            let k6 = f(x + h, &tmp);
            let mut y_new = [0.0; N];
            for i in 0..N {
                y_new[i] = y[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            let k7 = f(x_new, &y_new);

            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol[i] + self.rtol[i] * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }

            if err <= 1.0 {
                observer(&Step { x0: x, x1: x_new, y0: y, y1: y_new, dy0: k1, dy1: k7 });
                x = x_new;
                y = y_new;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let fac = if last_rejected { fac.min(1.0) } else { fac };
                last_rejected = false;
                if !final_step {
                    h *= fac;
                }
            } else {
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 1.0) } else { 0.1 };
                h *= fac;
                last_rejected = true;
            }
        }
    }

    fn initial_step<F>(&self, f: &mut F, x: f64, y: &[f64; N], dy: &[f64; N], span: f64) -> f64
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..N {
            let sc = self.atol[i] + self.rtol[i] * y[i].abs();
            d0 = d0.max((y[i] / sc).abs());
            d1 = d1.max((dy[i] / sc).abs());
        }
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = y[i] + h0 * dy[i];
        }
        let dy1 = f(x + h0, &y1);
        let mut d2: f64 = 0.0;
        for i in 0..N {
            let sc = self.atol[i] + self.rtol[i] * y[i].abs();
            d2 = d2.max(((dy1[i] - dy[i]) / sc).abs() / h0);
        }
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * span)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }
}
