//! Dormand–Prince 5(4) integrator with embedded error control and the
//! standard fourth-order continuous extension.

use std::ops::ControlFlow;

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

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn with_tolerance(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, h_init: 1e-2, h_min: 1e-12, h_max: 0.5, max_steps: 10_000_000 }
    }
}

/// One accepted step, with dense output on `[t0, t0 + h]`.
#[derive(Debug, Clone, Copy)]
pub struct Step<const D: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; D],
    pub y1: [f64; D],
    rcont: [[f64; D]; 5],
}

impl<const D: usize> Step<D> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn dense_component(&self, i: usize, t: f64) -> f64 {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])))
    }

    pub fn dense(&self, t: f64) -> [f64; D] {
        std::array::from_fn(|i| self.dense_component(i, t))
    }
}

#[inline]
fn lin<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

impl Dopri5 {
    /// Integrates from `t0` to `t_end > t0`, calling `observer` on every
    /// accepted step. Returns the final time and state (earlier if the observer breaks).
    pub fn integrate<const D: usize, F, O>(
        &self,
        mut rhs: F,
        t0: f64,
        y0: [f64; D],
        t_end: f64,
        mut observer: O,
    ) -> Result<(f64, [f64; D])>
    where
        F: FnMut(f64, &[f64; D]) -> [f64; D],
        O: FnMut(&Step<D>) -> ControlFlow<()>,
    {
        if !(t_end > t0) {
            return Err(Error::Domain(format!("integration interval [{t0}, {t_end}] is empty")));
        }
        let mut t = t0;
        let mut y = y0;
        let mut k1 = rhs(t, &y);
        let mut h = self.h_init.min(t_end - t0).min(self.h_max);
        let mut err_prev: f64 = 1e-4;
        let mut rejected = false;
        for _ in 0..self.max_steps {
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }
            let k2 = rhs(t + C2 * h, &lin(&y, h, &[(A21, &k1)]));
            let k3 = rhs(t + C3 * h, &lin(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(t + C4 * h, &lin(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(t + C5 * h, &lin(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = rhs(t + h, &lin(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y1 = lin(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = rhs(t + h, &y1);

            let mut err = 0.0;
            for i in 0..D {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y1[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / D as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integration(format!("non-finite error estimate at t = {t}, state {y:?}")));
            }

            if err <= 1.0 {
                let mut rcont = [[0.0; D]; 5];
                for i in 0..D {
                    let dy = y1[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    rcont[0][i] = y[i];
                    rcont[1][i] = dy;
                    rcont[2][i] = bspl;
                    rcont[3][i] = dy - h * k7[i] - bspl;
                    rcont[4][i] =
                        h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                let step = Step { t0: t, h, y0: y, y1, rcont };
                t = if last { t_end } else { t + h };
                y = y1;
                k1 = k7;
                if observer(&step).is_break() || last {
                    return Ok((t, y));
                }
                // PI step-size controller
                let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                let fac = if rejected { fac.min(1.0) } else { fac };
                h = (h * fac.clamp(0.2, 10.0)).min(self.h_max);
                err_prev = err.max(1e-4);
                rejected = false;
            } else {
                h *= (0.9 * err.powf(-0.2)).max(0.2);
                rejected = true;
            }
            if h < self.h_min {
                return Err(Error::Integration(format!("step size underflow (h = {h:e}) at t = {t}, state {y:?}")));
            }
        }
        Err(Error::Integration(format!("step budget exhausted at t = {t}, state {y:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let solver = Dopri5::with_tolerance(1e-11);
        let mut max_dense_err: f64 = 0.0;
        let (t, y) = solver
            .integrate(
                |_, y: &[f64; 2]| [y[1], -y[0]],
                0.0,
                [0.0, 1.0],
                20.0,
                |step| {
                    let tm = step.t0 + 0.37 * step.h;
                    max_dense_err = max_dense_err.max((step.dense_component(0, tm) - tm.sin()).abs());
                    ControlFlow::Continue(())
                },
            )
            .unwrap();
        assert_eq!(t, 20.0);
        assert!((y[0] - 20f64.sin()).abs() < 1e-9);
        assert!((y[1] - 20f64.cos()).abs() < 1e-9);
        assert!(max_dense_err < 1e-8);
    }

    #[test]
    fn observer_can_stop() {
        let solver = Dopri5::with_tolerance(1e-8);
        let (t, _) = solver
            .integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 10.0, |step| {
                if step.t1() > 1.0 {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })
            .unwrap();
        assert!(t > 1.0 && t < 10.0);
    }

    #[test]
    fn empty_interval_is_an_error() {
        let solver = Dopri5::with_tolerance(1e-8);
        assert!(solver.integrate(|_, y: &[f64; 1]| [y[0]], 1.0, [1.0], 1.0, |_| ControlFlow::Continue(())).is_err());
    }
}
