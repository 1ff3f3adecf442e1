//! Direct solution of the weak-drive steady state M σ = iΩ v and the
//! normalized population distribution derived from it.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{ChainError, Result};
use crate::model::{build_coupling_matrix, drive_vector, ChainConfig, CouplingMatrix};

/// Condition-number estimates above this are treated as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e12;

/// Steady-state dipole amplitudes and their population distributions.
#[derive(Debug, Clone, Serialize)]
pub struct SteadyState {
    /// Complex dipole amplitudes σ^(s), 0-based storage of sites 1..N.
    pub sigma: Vec<C64>,
    /// Raw populations P_j = |σ_j|².
    pub populations: Vec<f64>,
    /// Normalized populations P̃_j, summing to one.
    pub normalized: Vec<f64>,
    /// ‖Mσ − iΩv‖ / ‖iΩv‖ of the returned solution.
    pub residual: f64,
    /// Condition-number estimate of M used for the singularity guard.
    pub condition_estimate: f64,
}

impl SteadyState {
    pub fn n(&self) -> usize {
        self.sigma.len()
    }
}

/// Condition-number estimate σ_max/σ_min from the full singular value
/// decomposition; infinite when the matrix is exactly rank deficient.
///
/// Deterministic for a fixed matrix.
pub fn condition_check(m: &CouplingMatrix) -> f64 {
    let svd = match m.as_faer().svd() {
        Ok(svd) => svd,
        // SVD failure on a finite matrix: report as singular so callers skip.
        Err(_) => return f64::INFINITY,
    };
    let s = svd.S();
    let n = m.n();
    let mut smax = 0.0f64;
    let mut smin = f64::INFINITY;
    for i in 0..n {
        let v = s[i].re;
        smax = smax.max(v);
        smin = smin.min(v);
    }
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Solves M σ = iΩ v by LU factorization and fills the population record.
///
/// Fails with [`ChainError::CriticalPoint`] when the condition estimate
/// exceeds [`SINGULARITY_THRESHOLD`]; exact critical points are reported,
/// never regularized.
pub fn solve_steady(m: &CouplingMatrix, v: &[C64], omega: f64) -> Result<SteadyState> {
    let n = m.n();
    if v.len() != n {
        return Err(ChainError::domain(format!(
            "drive vector length {} does not match matrix dimension {}",
            v.len(),
            n
        )));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(ChainError::domain(
            "rabi amplitude must be positive for a normalizable steady state",
        ));
    }
    let condition = condition_check(m);
    if !condition.is_finite() || condition > SINGULARITY_THRESHOLD {
        return Err(ChainError::CriticalPoint { condition });
    }

    let rhs = Mat::from_fn(n, 1, |i, _| C64::new(0.0, omega) * v[i]);
    let lu = m.as_faer().partial_piv_lu();
    let sol = lu.solve(&rhs);
    let sigma: Vec<C64> = (0..n).map(|i| sol[(i, 0)]).collect();

    // residual of the linear solve, relative to the drive
    let prod = m.as_faer() * &sol;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        num += (prod[(i, 0)] - rhs[(i, 0)]).norm_sqr();
        den += rhs[(i, 0)].norm_sqr();
    }
    let residual = (num / den).sqrt();

    let populations: Vec<f64> = sigma.iter().map(|s| s.norm_sqr()).collect();
    // total is strictly positive for omega > 0 and nonsingular M
    let total: f64 = populations.iter().sum();
    let normalized: Vec<f64> = populations.iter().map(|p| p / total).collect();

    Ok(SteadyState {
        sigma,
        populations,
        normalized,
        residual,
        condition_estimate: condition,
    })
}

/// Builds the coupling matrix and drive for `config` and solves for its
/// steady state.
pub fn solve_steady_config(config: &ChainConfig) -> Result<SteadyState> {
    let m = build_coupling_matrix(config)?;
    let v = drive_vector(config)?;
    solve_steady(&m, &v, config.rabi)
}

/// Closed-form normalized edge population P̃_1 = A / (2A + (N−2)A²) with
/// A = |1 − e^{iξ}|², valid for reciprocal coupling (D = 0), zero
/// detuning, and transverse drive.
///
/// Diverges as A → 0 (the ξ ≈ 0 critical regime), reported as
/// [`ChainError::CriticalPoint`].
pub fn edge_population_analytic(n: usize, xi: f64) -> Result<f64> {
    if n < 3 {
        return Err(ChainError::domain("edge formula requires N >= 3"));
    }
    let a = (C64::new(1.0, 0.0) - C64::new(0.0, xi).exp()).norm_sqr();
    if a < 1e-12 {
        return Err(ChainError::CriticalPoint {
            condition: f64::INFINITY,
        });
    }
    Ok(a / (2.0 * a + (n as f64 - 2.0) * a * a))
}
