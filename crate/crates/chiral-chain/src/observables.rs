//! Diagnostics of the steady-state distribution: excess populations,
//! participation ratio, structure factors, and transport imbalance.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{ChainError, Result};

/// Above-uniform population excess ΔP̃_j = |P̃_j − 1/N|·Θ(P̃_j − 1/N).
///
/// Θ(0) := 0, so sites exactly at the uniform value contribute nothing.
pub fn excess_population(p_norm: &[f64]) -> Vec<f64> {
    let n = p_norm.len() as f64;
    let uniform = 1.0 / n;
    p_norm
        .iter()
        .map(|&p| if p > uniform { p - uniform } else { 0.0 })
        .collect()
}

/// Participation ratio (Σ ΔP̃)² / Σ (ΔP̃)² of the excess distribution.
///
/// Zero by convention when every excess vanishes (the exactly uniform
/// state), which marks the extended-distribution limit.
pub fn participation_ratio(p_norm: &[f64]) -> f64 {
    let dp = excess_population(p_norm);
    let sum: f64 = dp.iter().sum();
    let sq: f64 = dp.iter().map(|d| d * d).sum();
    if sq == 0.0 {
        0.0
    } else {
        sum * sum / sq
    }
}

/// Structure factor S(k) = |Σ_j e^{ikj} P̃_j|² of the population profile.
pub fn structure_factor(p_norm: &[f64], k: f64) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for (i, &p) in p_norm.iter().enumerate() {
        // 1-based site index in the exponent; |.|^2 removes the offset anyway
        acc += C64::new(0.0, k * (i + 1) as f64).exp() * p;
    }
    acc.norm_sqr()
}

/// Momentum grid used by [`structure_spectrum_on`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KGrid {
    /// The N discrete Fourier momenta k_m = 2πm/N, m = 0..N−1. Orthogonal
    /// and complete for an N-site chain; a uniform profile gives exactly
    /// zero at every m ≠ 0.
    Fourier,
    /// N evenly spaced momenta spanning [0, 2π] inclusive of both
    /// endpoints, k_m = 2πm/(N−1). The endpoint bins alias k = 0 and are
    /// excluded from the nonzero-k maximum.
    Spanning,
}

/// Structure factor sampled on a momentum grid, with the dominant
/// nonzero-k peak recorded.
#[derive(Debug, Clone, Serialize)]
pub struct StructureSpectrum {
    /// Grid momenta, radians per site.
    pub k_values: Vec<f64>,
    /// S(k) on the grid.
    pub s_values: Vec<f64>,
    /// (k, S) of the maximum over grid momenta excluding k = 0 (and its
    /// 2π alias on the spanning grid).
    pub max_nonzero_k: (f64, f64),
}

/// Evaluates S(k) on the N Fourier momenta k = 2πm/N.
pub fn structure_spectrum(p_norm: &[f64]) -> Result<StructureSpectrum> {
    structure_spectrum_on(p_norm, KGrid::Fourier)
}

/// Evaluates S(k) on the selected momentum grid.
pub fn structure_spectrum_on(p_norm: &[f64], grid: KGrid) -> Result<StructureSpectrum> {
    let n = p_norm.len();
    let min_n = match grid {
        KGrid::Fourier => 2,
        KGrid::Spanning => 3,
    };
    if n < min_n {
        return Err(ChainError::domain(format!(
            "structure spectrum needs at least {min_n} sites on this grid"
        )));
    }
    let tau = std::f64::consts::TAU;
    let k_values: Vec<f64> = match grid {
        KGrid::Fourier => (0..n).map(|m| tau * m as f64 / n as f64).collect(),
        KGrid::Spanning => (0..n).map(|m| tau * m as f64 / (n - 1) as f64).collect(),
    };
    let s_values: Vec<f64> = k_values.iter().map(|&k| structure_factor(p_norm, k)).collect();
    // skip m = 0 always, and the k = 2pi endpoint on the spanning grid
    let last = match grid {
        KGrid::Fourier => n,
        KGrid::Spanning => n - 1,
    };
    let mut max_nonzero_k = (0.0, f64::NEG_INFINITY);
    for m in 1..last {
        if s_values[m] > max_nonzero_k.1 {
            max_nonzero_k = (k_values[m], s_values[m]);
        }
    }
    Ok(StructureSpectrum {
        k_values,
        s_values,
        max_nonzero_k,
    })
}

/// Left-minus-right population imbalance; the central site of an odd
/// chain is excluded. Result lies in [−1, 1].
pub fn transport_imbalance(p_norm: &[f64]) -> Result<f64> {
    let n = p_norm.len();
    if n < 2 {
        return Err(ChainError::domain(
            "transport imbalance requires at least two sites",
        ));
    }
    let (left_end, right_start) = if n % 2 == 1 {
        ((n - 1) / 2, (n + 1) / 2)
    } else {
        (n / 2, n / 2)
    };
    let left: f64 = p_norm[..left_end].iter().sum();
    let right: f64 = p_norm[right_start..].iter().sum();
    let total: f64 = p_norm.iter().sum();
    Ok((left - right) / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn excess_of_uniform_is_zero() {
        let p = vec![0.25; 4];
        assert_eq!(excess_population(&p), vec![0.0; 4]);
    }

    #[test]
    fn excess_examples() {
        let dp = excess_population(&[0.75, 0.25]);
        assert!((dp[0] - 0.25).abs() < 1e-15 && dp[1] == 0.0);
        let dp = excess_population(&[0.4, 0.2, 0.2, 0.2]);
        assert!((dp[0] - 0.15).abs() < 1e-15);
        assert_eq!(&dp[1..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn participation_ratio_examples() {
        let mut p = vec![0.0; 10];
        p[0] = 1.0;
        assert!((participation_ratio(&p) - 1.0).abs() < 1e-14);
        assert_eq!(participation_ratio(&[0.2; 5]), 0.0);
    }

    #[test]
    fn structure_factor_normalization() {
        let p = [0.1, 0.4, 0.3, 0.2];
        assert!((structure_factor(&p, 0.0) - 1.0).abs() < 1e-12);
        // uniform profile vanishes on nonzero Fourier momenta
        let u = [0.125; 8];
        for m in 1..8 {
            assert!(structure_factor(&u, TAU * m as f64 / 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_of_uniform_profile() {
        let u = vec![1.0 / 48.0; 48];
        let spec = structure_spectrum(&u).unwrap();
        assert!((spec.s_values[0] - 1.0).abs() < 1e-12);
        assert!(spec.max_nonzero_k.1.abs() < 1e-12);
    }

    #[test]
    fn period_eight_comb_peaks_at_its_wavevector() {
        // P = 1/6 at sites 1, 9, ..., 41 of a 48-site chain
        let mut p = vec![0.0; 48];
        for j in (0..48).step_by(8) {
            p[j] = 1.0 / 6.0;
        }
        let spec = structure_spectrum(&p).unwrap();
        assert!((spec.max_nonzero_k.0 - TAU / 8.0).abs() < 1e-12);
        assert!((spec.max_nonzero_k.1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spanning_grid_excludes_the_alias_endpoint() {
        let mut p = vec![0.0; 16];
        p[0] = 0.6;
        p[8] = 0.4;
        let spec = structure_spectrum_on(&p, KGrid::Spanning).unwrap();
        assert_eq!(spec.k_values.len(), 16);
        assert!((spec.k_values[15] - TAU).abs() < 1e-12);
        // endpoint bin equals S(0) = 1 but must not win the nonzero max
        assert!(spec.max_nonzero_k.1 < 1.0);
        assert!(spec.max_nonzero_k.0 > 0.0 && spec.max_nonzero_k.0 < TAU);
    }

    #[test]
    fn transport_examples() {
        assert!((transport_imbalance(&[1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        let sym = [0.2, 0.1, 0.4, 0.1, 0.2];
        assert!(transport_imbalance(&sym).unwrap().abs() < 1e-15);
        assert!(transport_imbalance(&[1.0]).is_err());
    }

    #[test]
    fn transport_even_split() {
        let p = [0.5, 0.3, 0.1, 0.1];
        let t = transport_imbalance(&p).unwrap();
        assert!((t - 0.6).abs() < 1e-14);
    }

    fn normalized_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(1e-6..1.0f64, n).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn double_sum_equals_squared_transform(p in normalized_vec(12), m in 1usize..12) {
            let k = TAU * m as f64 / 12.0;
            // direct double sum
            let mut acc = C64::new(0.0, 0.0);
            for (j, &pj) in p.iter().enumerate() {
                for (l, &pl) in p.iter().enumerate() {
                    acc += C64::new(0.0, k * (j as f64 - l as f64)).exp() * pj * pl;
                }
            }
            prop_assert!(acc.im.abs() < 1e-12);
            prop_assert!((acc.re - structure_factor(&p, k)).abs() < 1e-12);
        }

        #[test]
        fn pr_is_permutation_invariant_and_bounded(p in normalized_vec(10), seed in 0u64..1000) {
            let pr = participation_ratio(&p);
            prop_assert!((0.0..=10.0 + 1e-9).contains(&pr));
            let mut q = p.clone();
            // cheap deterministic shuffle
            let n = q.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                q.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert!((participation_ratio(&q) - pr).abs() < 1e-12);
        }

        #[test]
        fn transport_negates_under_reversal(p in normalized_vec(11)) {
            let t = transport_imbalance(&p).unwrap();
            prop_assert!((-1.0..=1.0).contains(&t));
            let mut q = p.clone();
            q.reverse();
            prop_assert!((transport_imbalance(&q).unwrap() + t).abs() < 1e-12);
        }

        #[test]
        fn structure_factor_mirror_symmetry(p in normalized_vec(9), k in 0.0..TAU) {
            let s1 = structure_factor(&p, k);
            let s2 = structure_factor(&p, TAU - k);
            prop_assert!((s1 - s2).abs() < 1e-12);
            prop_assert!(s1 >= -1e-12);
        }
    }

    #[test]
    fn spectrum_rejects_tiny_chains() {
        assert!(structure_spectrum(&[1.0]).is_err());
        assert!(structure_spectrum_on(&[0.5, 0.5], KGrid::Spanning).is_err());
        assert!(structure_spectrum(&[0.5, 0.5]).is_ok());
    }

    #[test]
    fn fourier_grid_matches_pi_for_even_n() {
        let p = [0.3, 0.2, 0.3, 0.2];
        let spec = structure_spectrum(&p).unwrap();
        let s_pi = structure_factor(&p, PI);
        assert!((spec.s_values[2] - s_pi).abs() < 1e-14);
    }
}
