//! Small-N brute-force reference: integrates the full master equation in
//! the 2^N-dimensional Hilbert space, with the drive and coherent
//! exchange in the Hamiltonian and two collective decay channels.
//!
//! Basis ordering is the tensor product with site 1 as the most
//! significant qubit; per site, bit 0 is the ground state and bit 1 the
//! excited state, so site μ of an N-site chain occupies bit N−μ of the
//! basis index.

use num_complex::Complex64 as C64;

use super::rk::Dopri5;
use crate::error::{ChainError, Result};
use crate::model::{drive_vector, ChainConfig};

/// Final-time expectation values of the master-equation evolution.
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// ⟨σ_μ⟩ per site.
    pub expectations: Vec<C64>,
    /// Excited-state populations ⟨σ_μ†σ_μ⟩ per site.
    pub populations: Vec<f64>,
    /// |tr ρ − 1| at the final time.
    pub trace_error: f64,
}

const MAX_ORACLE_ATOMS: usize = 6;
const TRACE_DRIFT_LIMIT: f64 = 1e-6;

struct DenseOp {
    dim: usize,
    a: Vec<C64>,
}

impl DenseOp {
    fn zeros(dim: usize) -> Self {
        DenseOp {
            dim,
            a: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> C64 {
        self.a[r * self.dim + c]
    }

    #[inline]
    fn add(&mut self, r: usize, c: usize, v: C64) {
        self.a[r * self.dim + c] += v;
    }

    fn dagger(&self) -> DenseOp {
        let mut out = DenseOp::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.a[c * self.dim + r] = self.at(r, c).conj();
            }
        }
        out
    }

    fn matmul(&self, rhs: &DenseOp, out: &mut DenseOp) {
        let d = self.dim;
        for r in 0..d {
            for c in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.a[r * d + k] * rhs.a[k * d + c];
                }
                out.a[r * d + c] = acc;
            }
        }
    }
}

fn matmul_into(d: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
    for r in 0..d {
        for c in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += a[r * d + k] * b[k * d + c];
            }
            out[r * d + c] = acc;
        }
    }
}

/// Lowering operator of 1-based site `mu`.
fn lowering_op(n: usize, mu: usize) -> DenseOp {
    let dim = 1usize << n;
    let bit = 1usize << (n - mu);
    let mut op = DenseOp::zeros(dim);
    for col in 0..dim {
        if col & bit != 0 {
            op.add(col & !bit, col, C64::new(1.0, 0.0));
        }
    }
    op
}

/// Integrates the full Lindblad dynamics from the global ground state to
/// `t_end` and reports site expectation values.
pub fn lindblad_oracle(config: &ChainConfig, t_end: f64) -> Result<OracleResult> {
    config.validate()?;
    let n = config.n_atoms;
    if n > MAX_ORACLE_ATOMS {
        return Err(ChainError::Capability(format!(
            "oracle state space is 2^N; N = {n} exceeds the N <= {MAX_ORACLE_ATOMS} limit"
        )));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(ChainError::domain("t_end must be positive"));
    }
    let dim = 1usize << n;
    let (gamma_l, gamma_r) = config.rates()?;
    let delta = config.detunings()?;
    let xi = config.xi;
    let v = drive_vector(config)?;

    let sigma: Vec<DenseOp> = (1..=n).map(|mu| lowering_op(n, mu)).collect();

    // H = sum_mu (Omega_mu sigma_mu^+ + h.c.) - sum_mu delta_mu n_mu
    //     - i (gamma_L/2) sum_{mu<nu} (e^{i xi (nu-mu)} sigma_mu^+ sigma_nu - h.c.)
    //     - i (gamma_R/2) sum_{mu>nu} (e^{i xi (mu-nu)} sigma_mu^+ sigma_nu - h.c.)
    let mut h = DenseOp::zeros(dim);
    for (i, s) in sigma.iter().enumerate() {
        let omega_mu = config.rabi * v[i];
        let sd = s.dagger();
        for r in 0..dim {
            for c in 0..dim {
                let val = omega_mu * sd.at(r, c) + omega_mu.conj() * s.at(r, c);
                if val != C64::new(0.0, 0.0) {
                    h.add(r, c, val);
                }
            }
        }
        // number operator is diagonal
        let bit = 1usize << (n - 1 - i);
        for b in 0..dim {
            if b & bit != 0 {
                h.add(b, b, C64::new(-delta[i], 0.0));
            }
        }
    }
    let mut tmp = DenseOp::zeros(dim);
    for mu in 0..n {
        for nu in 0..n {
            if mu == nu {
                continue;
            }
            let (g, dist) = if mu < nu {
                (gamma_l, (nu - mu) as f64)
            } else {
                (gamma_r, (mu - nu) as f64)
            };
            // -i (g/2) e^{i xi d} sigma_mu^+ sigma_nu, the h.c. arrives
            // from the transposed (nu, mu) term of the double sum
            let coeff = C64::new(0.0, -g / 2.0) * C64::new(0.0, xi * dist).exp();
            sigma[mu].dagger().matmul(&sigma[nu], &mut tmp);
            for r in 0..dim {
                for c in 0..dim {
                    let val = tmp.at(r, c);
                    if val != C64::new(0.0, 0.0) {
                        h.add(r, c, coeff * val);
                    }
                }
            }
        }
    }

    // collective jump operators J_L = sum e^{+i xi x_nu} sigma_nu,
    // J_R = sum e^{-i xi x_nu} sigma_nu with x_nu = nu - 1
    let mut jl = DenseOp::zeros(dim);
    let mut jr = DenseOp::zeros(dim);
    for (i, s) in sigma.iter().enumerate() {
        let ph = C64::new(0.0, xi * i as f64).exp();
        for r in 0..dim {
            for c in 0..dim {
                let val = s.at(r, c);
                if val != C64::new(0.0, 0.0) {
                    jl.add(r, c, ph * val);
                    jr.add(r, c, ph.conj() * val);
                }
            }
        }
    }
    let jl_d = jl.dagger();
    let jr_d = jr.dagger();
    let mut jl_dj = DenseOp::zeros(dim);
    jl_d.matmul(&jl, &mut jl_dj);
    let mut jr_dj = DenseOp::zeros(dim);
    jr_d.matmul(&jr, &mut jr_dj);

    let h_flat = h.a.clone();
    let jl_flat = jl.a.clone();
    let jr_flat = jr.a.clone();
    let jl_d_flat = jl_d.a.clone();
    let jr_d_flat = jr_d.a.clone();
    let jl_dj_flat = jl_dj.a.clone();
    let jr_dj_flat = jr_dj.a.clone();

    let mut buf_a = vec![C64::new(0.0, 0.0); dim * dim];
    let mut buf_b = vec![C64::new(0.0, 0.0); dim * dim];
    let rhs = move |_t: f64, rho: &[C64], out: &mut [C64]| {
        // -i [H, rho]
        matmul_into(dim, &h_flat, rho, &mut buf_a);
        matmul_into(dim, rho, &h_flat, &mut buf_b);
        for i in 0..dim * dim {
            out[i] = C64::new(0.0, -1.0) * (buf_a[i] - buf_b[i]);
        }
        for (g, j, jd, jdj) in [
            (gamma_l, &jl_flat, &jl_d_flat, &jl_dj_flat),
            (gamma_r, &jr_flat, &jr_d_flat, &jr_dj_flat),
        ] {
            if g == 0.0 {
                continue;
            }
            // g (J rho J^+ - {J^+ J, rho}/2)
            matmul_into(dim, j, rho, &mut buf_a);
            matmul_into(dim, &buf_a, jd, &mut buf_b);
            for i in 0..dim * dim {
                out[i] += g * buf_b[i];
            }
            matmul_into(dim, jdj, rho, &mut buf_a);
            matmul_into(dim, rho, jdj, &mut buf_b);
            for i in 0..dim * dim {
                out[i] -= 0.5 * g * (buf_a[i] + buf_b[i]);
            }
        }
    };

    // start from the global ground state
    let mut rho0 = vec![C64::new(0.0, 0.0); dim * dim];
    rho0[0] = C64::new(1.0, 0.0);
    let mut solver = Dopri5::new(rhs, 0.0, rho0, 1e-9, 1e-12);

    let trace = |rho: &[C64]| -> C64 { (0..dim).map(|b| rho[b * dim + b]).sum() };
    // verify trace preservation at intermediate checkpoints
    let checkpoints = 16;
    for c in 1..=checkpoints {
        let t = t_end * c as f64 / checkpoints as f64;
        solver.advance_to(t)?;
        let drift = (trace(solver.y()) - C64::new(1.0, 0.0)).norm();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(ChainError::Integration {
                t,
                reason: format!("density-matrix trace drifted by {drift:.3e}"),
            });
        }
    }

    let rho = solver.y();
    let mut expectations = Vec::with_capacity(n);
    let mut populations = Vec::with_capacity(n);
    for mu in 1..=n {
        let bit = 1usize << (n - mu);
        // tr(rho sigma_mu) over basis states with the site excited
        let mut exp = C64::new(0.0, 0.0);
        let mut pop = 0.0;
        for b in 0..dim {
            if b & bit != 0 {
                exp += rho[(b & !bit) * dim + b];
                pop += rho[b * dim + b].re;
            }
        }
        expectations.push(exp);
        populations.push(pop);
    }
    let trace_error = (trace(rho) - C64::new(1.0, 0.0)).norm();
    Ok(OracleResult {
        expectations,
        populations,
        trace_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady_state::solve_steady_config;
    use std::f64::consts::PI;

    #[test]
    fn single_atom_weak_drive() {
        let cfg = ChainConfig::new(1, 0.0, 0.0).with_rabi(1e-3);
        let res = lindblad_oracle(&cfg, 60.0).unwrap();
        // optical Bloch steady state: <sigma> = -2 i Omega + O(Omega^3)
        let expect = C64::new(0.0, -2e-3);
        assert!(
            (res.expectations[0] - expect).norm() < 1e-7,
            "{:?}",
            res.expectations[0]
        );
        assert!(res.trace_error < 1e-8);
        assert!(res.populations[0] >= 0.0 && res.populations[0] <= 1.0);
    }

    #[test]
    fn undriven_chain_stays_in_vacuum() {
        let cfg = ChainConfig::new(3, 1.2, 0.4).with_rabi(0.0);
        let res = lindblad_oracle(&cfg, 10.0).unwrap();
        for e in &res.expectations {
            assert!(e.norm() < 1e-12);
        }
        for &p in &res.populations {
            assert!(p.abs() < 1e-12);
        }
        assert!(res.trace_error < 1e-10);
    }

    #[test]
    fn oracle_matches_weak_drive_steady_state() {
        let cfg = ChainConfig::new(3, PI / 4.0, 0.5).with_rabi(1e-3);
        let oracle = lindblad_oracle(&cfg, 600.0).unwrap();
        let linear = solve_steady_config(&cfg).unwrap();
        for mu in 0..3 {
            let rel = (oracle.expectations[mu] - linear.sigma[mu]).norm()
                / linear.sigma[mu].norm();
            assert!(rel < 0.01, "site {mu}: rel dev {rel:.2e}");
        }
        assert!(oracle.trace_error < 1e-8);
    }

    #[test]
    fn oracle_refuses_large_chains() {
        let cfg = ChainConfig::new(7, 1.0, 0.0);
        assert!(matches!(
            lindblad_oracle(&cfg, 1.0),
            Err(ChainError::Capability(_))
        ));
    }
}
