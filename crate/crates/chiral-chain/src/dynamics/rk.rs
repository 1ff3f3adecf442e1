//! Adaptive Dormand–Prince 5(4) integrator over complex state vectors.

use num_complex::Complex64 as C64;

use crate::error::{ChainError, Result};

const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 5.0;
const MAX_STEPS: u64 = 200_000_000;

// Dormand-Prince coefficients
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order solution weights equal A[5]; embedded fourth-order weights:
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Stepwise adaptive integrator for an autonomous system y' = f(t, y).
///
/// The right-hand side writes its result into the provided buffer so
/// integration allocates nothing per step (FSAL reuses the last stage).
pub(crate) struct Dopri5<F>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    f: F,
    rtol: f64,
    atol: f64,
    t: f64,
    y: Vec<C64>,
    h: f64,
    k: [Vec<C64>; 7],
    y_stage: Vec<C64>,
    y_next: Vec<C64>,
    steps: u64,
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    pub fn new(mut f: F, t0: f64, y0: Vec<C64>, rtol: f64, atol: f64) -> Self {
        let n = y0.len();
        let mut k = [(); 7].map(|_| vec![C64::new(0.0, 0.0); n]);
        f(t0, &y0, &mut k[0]);
        let y_stage = vec![C64::new(0.0, 0.0); n];
        let y_next = vec![C64::new(0.0, 0.0); n];
        Dopri5 {
            f,
            rtol,
            atol,
            t: t0,
            y: y0,
            h: 1e-4,
            k,
            y_stage,
            y_next,
            steps: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[C64] {
        &self.y
    }

    /// One accepted adaptive step of at most `h_max`; returns the new time.
    pub fn step(&mut self, h_max: f64) -> Result<f64> {
        loop {
            self.steps += 1;
            if self.steps > MAX_STEPS {
                return Err(ChainError::Integration {
                    t: self.t,
                    reason: "step budget exhausted".into(),
                });
            }
            let h = self.h.min(h_max);
            if h < 1e-14 * self.t.abs().max(1.0) {
                return Err(ChainError::Integration {
                    t: self.t,
                    reason: "step size underflow".into(),
                });
            }
            let n = self.y.len();
            // stages 2..7 (k[0] is fresh from FSAL or construction)
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, kj) in self.k.iter().enumerate().take(s) {
                        let a = A[s - 1][j];
                        if a != 0.0 {
                            acc += kj[i] * a;
                        }
                    }
                    self.y_stage[i] = self.y[i] + acc * h;
                }
                let (ks, rest) = self.k.split_at_mut(s);
                let _ = ks;
                (self.f)(self.t + C[s] * h, &self.y_stage, &mut rest[0]);
            }
            // fifth-order solution is the last stage's argument; its stage
            // coefficients equal the solution weights (FSAL property)
            self.y_next.copy_from_slice(&self.y_stage);
            // scaled error estimate from the embedded fourth-order weights
            let mut err_sq = 0.0;
            for i in 0..n {
                let mut e = C64::new(0.0, 0.0);
                for (j, kj) in self.k.iter().enumerate() {
                    let db = (if j < 6 { A[5][j] } else { 0.0 }) - B4[j];
                    if db != 0.0 {
                        e += kj[i] * db;
                    }
                }
                let scale =
                    self.atol + self.rtol * self.y[i].norm().max(self.y_next[i].norm());
                let r = e.norm() * h / scale;
                err_sq += r * r;
            }
            let err = (err_sq / n as f64).sqrt();
            if err <= 1.0 {
                self.t += h;
                std::mem::swap(&mut self.y, &mut self.y_next);
                // FSAL: last stage evaluated at (t+h, y_new)
                self.k.swap(0, 6);
                let scale = if err == 0.0 {
                    MAX_SCALE
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_SCALE, MAX_SCALE)
                };
                self.h = (h * scale).max(1e-14);
                return Ok(self.t);
            }
            self.h = h * (SAFETY * err.powf(-0.2)).clamp(MIN_SCALE, 1.0);
        }
    }

    /// Integrates exactly to `t_target` (which must lie ahead).
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target {
            let remaining = t_target - self.t;
            self.step(remaining)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_decay_matches_closed_form() {
        let lambda = C64::new(-0.5, 0.3);
        let y0 = vec![C64::new(1.0, -0.2)];
        let mut solver = Dopri5::new(
            |_t, y: &[C64], dy: &mut [C64]| dy[0] = lambda * y[0],
            0.0,
            y0.clone(),
            1e-10,
            1e-14,
        );
        solver.advance_to(7.5).unwrap();
        let expect = y0[0] * (lambda * 7.5).exp();
        assert!((solver.y()[0] - expect).norm() < 1e-9);
    }

    #[test]
    fn inhomogeneous_relaxation() {
        // y' = -y + 1 from 0: y(t) = 1 - e^{-t}
        let mut solver = Dopri5::new(
            |_t, y: &[C64], dy: &mut [C64]| dy[0] = C64::new(1.0, 0.0) - y[0],
            0.0,
            vec![C64::new(0.0, 0.0)],
            1e-10,
            1e-14,
        );
        solver.advance_to(3.0).unwrap();
        assert!((solver.y()[0].re - (1.0 - (-3.0f64).exp())).abs() < 1e-10);
        assert!(solver.y()[0].im.abs() < 1e-12);
    }

    #[test]
    fn tightening_tolerance_converges() {
        let run = |rtol: f64| {
            let mut s = Dopri5::new(
                |t, y: &[C64], dy: &mut [C64]| {
                    dy[0] = C64::new(0.0, 2.0 * t) * y[0];
                },
                0.0,
                vec![C64::new(1.0, 0.0)],
                rtol,
                1e-16,
            );
            s.advance_to(2.0).unwrap();
            s.y()[0]
        };
        let loose = run(1e-6);
        let tight = run(1e-12);
        // analytic: exp(i t^2)
        let expect = C64::new(0.0, 4.0).exp();
        assert!((tight - expect).norm() < (loose - expect).norm().max(1e-12));
        assert!((loose - expect).norm() < 1e-5);
    }
}
