//! Eigen-analysis of the coupling matrix: decay rates, collective
//! frequency shifts, decoherence-free mode counting, and extraction of
//! the subradiant sector.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{ChainError, Result};
use crate::model::CouplingMatrix;

/// Default tolerance below which a decay rate counts as decoherence-free.
pub const DECOHERENCE_FREE_TOL: f64 = 1e-10;

/// Eigenvalues of M ordered by ascending decay rate −Re(λ).
#[derive(Debug, Clone, Serialize)]
pub struct EigenSpectrum {
    /// Eigenvalues as returned by the solver.
    pub eigenvalues: Vec<C64>,
    /// Permutation of `eigenvalues` sorting by ascending decay rate.
    pub sort_order: Vec<usize>,
    /// Decay rates −Re(λ) in sorted order, clamped at zero against
    /// eigensolver rounding.
    pub decay_rates: Vec<f64>,
    /// Frequency shifts Im(λ) in sorted order.
    pub shifts: Vec<f64>,
}

impl EigenSpectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalue at the given position of the sorted (subradiant-first)
    /// order.
    pub fn sorted_eigenvalue(&self, rank: usize) -> C64 {
        self.eigenvalues[self.sort_order[rank]]
    }
}

/// Full eigenvalue set of M. Works for defective matrices since only the
/// eigenvalues are required.
pub fn eigen_spectrum(m: &CouplingMatrix) -> Result<EigenSpectrum> {
    let eigenvalues: Vec<C64> = m
        .as_faer()
        .eigenvalues()
        .map_err(|e| ChainError::EigenSolver(format!("{e:?}")))?;
    let n = eigenvalues.len();
    let mut sort_order: Vec<usize> = (0..n).collect();
    // ascending decay rate; ties broken by shift for a deterministic order
    sort_order.sort_by(|&a, &b| {
        let da = -eigenvalues[a].re;
        let db = -eigenvalues[b].re;
        da.partial_cmp(&db)
            .unwrap()
            .then(eigenvalues[a].im.partial_cmp(&eigenvalues[b].im).unwrap())
    });
    let decay_rates: Vec<f64> = sort_order
        .iter()
        .map(|&i| (-eigenvalues[i].re).max(0.0))
        .collect();
    let shifts: Vec<f64> = sort_order.iter().map(|&i| eigenvalues[i].im).collect();
    Ok(EigenSpectrum {
        eigenvalues,
        sort_order,
        decay_rates,
        shifts,
    })
}

/// Number of eigenvalues with decay rate below `tol`.
pub fn decoherence_free_count(spec: &EigenSpectrum, tol: f64) -> usize {
    spec.decay_rates.iter().filter(|&&r| r < tol).count()
}

/// Sorted positions and frequency shifts of the modes with decay rate
/// below `cutoff` (in γ). May be empty.
pub fn subradiant_sector(spec: &EigenSpectrum, cutoff: f64) -> (Vec<usize>, Vec<f64>) {
    let mut idx = Vec::new();
    let mut shifts = Vec::new();
    for (rank, &rate) in spec.decay_rates.iter().enumerate() {
        if rate < cutoff {
            idx.push(rank);
            shifts.push(spec.shifts[rank]);
        } else {
            // decay_rates is ascending; nothing further qualifies
            break;
        }
    }
    (idx, shifts)
}
