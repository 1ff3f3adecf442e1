//! Time evolution of the dipole amplitudes under the weak-drive linear
//! equation dσ/dt = Mσ − iΩv, traversal-time extraction, and the
//! subharmonic-oscillation diagnostic.
//!
//! The propagator never forms M: the coupling matrix is diagonal plus a
//! rank-one upper and lower phase profile, so one right-hand-side
//! evaluation costs O(N) via running phase sums. Explicit adaptive
//! Runge-Kutta is used throughout; M may be defective (it is triangular
//! with equal diagonal at |D| = 1), so spectral propagation is not an
//! option, and the integrator works at the critical points where M is
//! singular.

mod oracle;
mod rk;

pub use oracle::{lindblad_oracle, OracleResult};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{ChainError, Result};
use crate::model::{ChainConfig, drive_vector};
use crate::steady_state::solve_steady_config;
use rk::Dopri5;

/// Default relative tolerance of the adaptive integrator.
pub const DEFAULT_RTOL: f64 = 1e-9;
const DEFAULT_ATOL: f64 = 1e-14;
/// Default cap on the traversal-time search.
pub const DEFAULT_T_MAX: f64 = 1e6;

/// Right-hand side Mσ − iΩv evaluated in O(N) from the semiseparable
/// structure of M.
pub(crate) struct ChainPropagator {
    n: usize,
    gamma_l: f64,
    gamma_r: f64,
    /// iδ_μ − 1/2 per site.
    diag: Vec<C64>,
    /// e^{iξ·i} per site (0-based).
    phase: Vec<C64>,
    /// −iΩ v_μ drive term.
    drive: Vec<C64>,
}

impl ChainPropagator {
    pub fn new(config: &ChainConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n_atoms;
        let (gamma_l, gamma_r) = config.rates()?;
        let delta = config.detunings()?;
        let diag = delta.iter().map(|&d| C64::new(-0.5, d)).collect();
        let phase = (0..n)
            .map(|i| C64::new(0.0, config.xi * i as f64).exp())
            .collect();
        let v = drive_vector(config)?;
        let drive = v
            .iter()
            .map(|&vi| -C64::new(0.0, config.rabi) * vi)
            .collect();
        Ok(ChainPropagator {
            n,
            gamma_l,
            gamma_r,
            diag,
            phase,
            drive,
        })
    }

    pub fn rhs(&self, sigma: &[C64], out: &mut [C64]) {
        for i in 0..self.n {
            out[i] = self.diag[i] * sigma[i] + self.drive[i];
        }
        // lower triangle: -gamma_R e^{i xi (mu - nu)} sigma_nu, nu < mu
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.n {
            out[i] -= self.phase[i] * acc * self.gamma_r;
            acc += self.phase[i].conj() * sigma[i];
        }
        // upper triangle: -gamma_L e^{i xi (nu - mu)} sigma_nu, nu > mu
        acc = C64::new(0.0, 0.0);
        for i in (0..self.n).rev() {
            out[i] -= self.phase[i].conj() * acc * self.gamma_l;
            acc += self.phase[i] * sigma[i];
        }
    }
}

/// Sampled solution of the propagated dipole amplitudes.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    /// Sample times, strictly increasing, in units of 1/γ.
    pub times: Vec<f64>,
    /// σ(t) per sample, time-major.
    pub sigma_t: Vec<Vec<C64>>,
    /// |σ_μ(t)|² per sample.
    pub populations_t: Vec<Vec<f64>>,
    /// Total population P_t = Σ_μ |σ_μ(t)|².
    pub total_population_t: Vec<f64>,
}

impl Trajectory {
    /// Normalized site populations of one sample; zero vector while the
    /// chain is still fully in the ground state.
    pub fn normalized_at(&self, idx: usize) -> Vec<f64> {
        let tot = self.total_population_t[idx];
        if tot <= 0.0 {
            return vec![0.0; self.populations_t[idx].len()];
        }
        self.populations_t[idx].iter().map(|p| p / tot).collect()
    }
}

/// Integrates dσ/dt = Mσ − iΩv from `sigma0` and samples on `t_grid`.
///
/// `t_grid` must start at zero and increase strictly. Works at critical
/// points: no inversion of M is involved.
pub fn propagate(config: &ChainConfig, sigma0: &[C64], t_grid: &[f64]) -> Result<Trajectory> {
    propagate_with_tol(config, sigma0, t_grid, DEFAULT_RTOL)
}

/// [`propagate`] with an explicit integrator tolerance.
pub fn propagate_with_tol(
    config: &ChainConfig,
    sigma0: &[C64],
    t_grid: &[f64],
    rtol: f64,
) -> Result<Trajectory> {
    if sigma0.len() != config.n_atoms {
        return Err(ChainError::domain(format!(
            "sigma0 length {} does not match n_atoms {}",
            sigma0.len(),
            config.n_atoms
        )));
    }
    if t_grid.is_empty() || t_grid[0] != 0.0 {
        return Err(ChainError::domain("t_grid must start at 0"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ChainError::domain("t_grid must increase strictly"));
    }
    let prop = ChainPropagator::new(config)?;
    let mut solver = Dopri5::new(
        move |_t, y: &[C64], dy: &mut [C64]| prop.rhs(y, dy),
        0.0,
        sigma0.to_vec(),
        rtol,
        DEFAULT_ATOL,
    );

    let mut traj = Trajectory {
        times: Vec::with_capacity(t_grid.len()),
        sigma_t: Vec::with_capacity(t_grid.len()),
        populations_t: Vec::with_capacity(t_grid.len()),
        total_population_t: Vec::with_capacity(t_grid.len()),
    };
    for &t in t_grid {
        solver.advance_to(t)?;
        let y = solver.y().to_vec();
        let pops: Vec<f64> = y.iter().map(|s| s.norm_sqr()).collect();
        let total = pops.iter().sum();
        traj.times.push(t);
        traj.sigma_t.push(y);
        traj.populations_t.push(pops);
        traj.total_population_t.push(total);
    }
    Ok(traj)
}

/// First time the far-end population reaches `threshold_fraction` of its
/// steady value, refined by bisection to a relative 1e-6 in t.
pub fn traversal_time(config: &ChainConfig, threshold_fraction: f64) -> Result<f64> {
    traversal_time_with(config, threshold_fraction, DEFAULT_T_MAX)
}

/// [`traversal_time`] with an explicit search cap.
pub fn traversal_time_with(
    config: &ChainConfig,
    threshold_fraction: f64,
    t_max: f64,
) -> Result<f64> {
    if !(0.0 < threshold_fraction && threshold_fraction < 1.0) {
        return Err(ChainError::domain(
            "threshold fraction must lie strictly between 0 and 1",
        ));
    }
    if config.directionality <= 0.0 {
        return Err(ChainError::domain(
            "traversal time requires D > 0 so that site N is the far end",
        ));
    }
    // steady-state target; propagates CriticalPoint for singular M
    let steady = solve_steady_config(config)?;
    let n = config.n_atoms;
    let target = threshold_fraction * steady.populations[n - 1];

    let prop = ChainPropagator::new(config)?;
    let far_pop = |y: &[C64]| y[n - 1].norm_sqr();

    let mut solver = Dopri5::new(
        |_t, y: &[C64], dy: &mut [C64]| prop.rhs(y, dy),
        0.0,
        vec![C64::new(0.0, 0.0); n],
        DEFAULT_RTOL,
        DEFAULT_ATOL,
    );

    // march until the far-end population first crosses the target
    let mut t_lo = 0.0;
    let mut y_lo = solver.y().to_vec();
    loop {
        if solver.t() >= t_max {
            return Err(ChainError::Timeout { t_max });
        }
        let t_new = solver.step(t_max - solver.t())?;
        if far_pop(solver.y()) >= target {
            break;
        }
        t_lo = t_new;
        y_lo.copy_from_slice(solver.y());
    }
    let mut t_hi = solver.t();

    // bisection refinement, re-integrating the bracketing step
    while t_hi - t_lo > 1e-6 * t_hi.max(1e-9) {
        let t_mid = 0.5 * (t_lo + t_hi);
        let mut probe = Dopri5::new(
            |_t, y: &[C64], dy: &mut [C64]| prop.rhs(y, dy),
            t_lo,
            y_lo.clone(),
            DEFAULT_RTOL * 0.1,
            DEFAULT_ATOL,
        );
        probe.advance_to(t_mid)?;
        if far_pop(probe.y()) >= target {
            t_hi = t_mid;
        } else {
            t_lo = t_mid;
            y_lo.copy_from_slice(probe.y());
        }
    }
    Ok(0.5 * (t_lo + t_hi))
}

/// Dominant oscillation of a total-population series.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SubharmonicMetric {
    /// Period of the dominant oscillation, units of 1/γ; zero when the
    /// series carries no detectable oscillation.
    pub period: f64,
    /// Autocorrelation at the first interior peak relative to lag zero;
    /// zero when no peak exists.
    pub persistence: f64,
}

/// Locates the first non-lag-zero peak of the autocorrelation of `p_t`
/// and reports its period and relative height.
///
/// The caller supplies a window past the initial transient. A series with
/// no interior autocorrelation peak (monotone equilibration, constant
/// tail) reports `period = 0, persistence = 0`. Detecting an oscillation
/// the window cannot hold three times is an insufficient-data error.
pub fn subharmonic_metric(p_t: &[f64], times: &[f64]) -> Result<SubharmonicMetric> {
    let n = p_t.len();
    if n != times.len() {
        return Err(ChainError::domain("p_t and times must have equal length"));
    }
    if n < 16 {
        return Err(ChainError::InsufficientData(
            "need at least 16 samples".into(),
        ));
    }
    let dt = times[1] - times[0];
    if dt <= 0.0 {
        return Err(ChainError::domain("times must increase"));
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
            return Err(ChainError::domain("times must be uniformly spaced"));
        }
    }

    let mean = p_t.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = p_t.iter().map(|p| p - mean).collect();
    let n_lag = n / 2;
    // unbiased autocorrelation so a pure tone scores persistence ~ 1
    let r: Vec<f64> = (0..n_lag)
        .map(|lag| {
            let m = n - lag;
            (0..m).map(|i| x[i] * x[i + lag]).sum::<f64>() / m as f64
        })
        .collect();
    if !(r[0] > 0.0) || !r[0].is_finite() {
        // constant series
        return Ok(SubharmonicMetric {
            period: 0.0,
            persistence: 0.0,
        });
    }
    for lag in 1..n_lag - 1 {
        if r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] {
            let period = lag as f64 * dt;
            let window = times[n - 1] - times[0];
            if window < 3.0 * period {
                return Err(ChainError::InsufficientData(format!(
                    "window {window:.3} holds fewer than three periods of {period:.3}"
                )));
            }
            return Ok(SubharmonicMetric {
                period,
                persistence: r[lag] / r[0],
            });
        }
    }
    Ok(SubharmonicMetric {
        period: 0.0,
        persistence: 0.0,
    })
}
