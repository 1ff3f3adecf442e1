//! Physical configuration of the chain and construction of the coupling
//! matrix and drive vector consumed by every other module.
//!
//! Conventions: the single-atom decay rate γ is the unit of all rates and
//! detunings, time is measured in 1/γ, and site positions are equidistant
//! with k_s·spacing = ξ, so the accumulated propagation phase between
//! sites μ and ν is ξ|μ−ν|. Formulas quote 1-based site indices μ = 1..N;
//! storage is 0-based with index i = μ−1.

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{ChainError, Result};

/// Site-resolved detuning profile δ_μ, in units of γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "lowercase")]
pub enum DetuningProfile {
    /// δ_μ = δ0 for every site.
    Uniform { delta0: f64 },
    /// Linear ramp δ_μ = (s/N)(μ−1).
    Linear { s: f64 },
    /// Harmonic well δ_μ = h·[μ − (N+1)/2]².
    Harmonic { h: f64 },
}

impl DetuningProfile {
    pub fn uniform(delta0: f64) -> Self {
        DetuningProfile::Uniform { delta0 }
    }

    pub fn linear(s: f64) -> Self {
        DetuningProfile::Linear { s }
    }

    pub fn harmonic(h: f64) -> Self {
        DetuningProfile::Harmonic { h }
    }
}

impl Default for DetuningProfile {
    fn default() -> Self {
        DetuningProfile::Uniform { delta0: 0.0 }
    }
}

/// Full parameter set of one simulation point.
///
/// Serializes to JSON with keys `n_atoms`, `xi`, `directionality`, `rabi`,
/// `theta_s`, `detuning {type, params}`; angles in radians, rates in γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Number of atoms N ≥ 1.
    pub n_atoms: usize,
    /// Dimensionless inter-atomic phase ξ = k_s·spacing, in [0, 2π].
    pub xi: f64,
    /// Directionality D = (γ_R − γ_L)/γ, in [−1, 1].
    pub directionality: f64,
    /// Drive amplitude Ω in units of γ.
    pub rabi: f64,
    /// Excitation angle θ_s in radians.
    pub theta_s: f64,
    #[serde(default)]
    pub detuning: DetuningProfile,
}

impl ChainConfig {
    /// Configuration with the phase-diagram defaults: θ_s = π/2, weak
    /// drive Ω = 10⁻³, zero detuning.
    pub fn new(n_atoms: usize, xi: f64, directionality: f64) -> Self {
        ChainConfig {
            n_atoms,
            xi,
            directionality,
            rabi: 1e-3,
            theta_s: std::f64::consts::FRAC_PI_2,
            detuning: DetuningProfile::default(),
        }
    }

    pub fn with_rabi(mut self, rabi: f64) -> Self {
        self.rabi = rabi;
        self
    }

    pub fn with_theta_s(mut self, theta_s: f64) -> Self {
        self.theta_s = theta_s;
        self
    }

    pub fn with_detuning(mut self, detuning: DetuningProfile) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_n_atoms(mut self, n_atoms: usize) -> Self {
        self.n_atoms = n_atoms;
        self
    }

    /// Checks every invariant of the parameter set.
    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(ChainError::domain("n_atoms must be at least 1"));
        }
        if !(0.0..=std::f64::consts::TAU).contains(&self.xi) || !self.xi.is_finite() {
            return Err(ChainError::domain(format!(
                "xi = {} outside [0, 2*pi]",
                self.xi
            )));
        }
        if !(-1.0..=1.0).contains(&self.directionality) || !self.directionality.is_finite() {
            return Err(ChainError::domain(format!(
                "directionality = {} outside [-1, 1]",
                self.directionality
            )));
        }
        if self.rabi < 0.0 || !self.rabi.is_finite() {
            return Err(ChainError::domain(format!(
                "rabi = {} must be non-negative",
                self.rabi
            )));
        }
        if !self.theta_s.is_finite() {
            return Err(ChainError::domain("theta_s must be finite"));
        }
        let finite = match self.detuning {
            DetuningProfile::Uniform { delta0 } => delta0.is_finite(),
            DetuningProfile::Linear { s } => s.is_finite(),
            DetuningProfile::Harmonic { h } => h.is_finite(),
        };
        if !finite {
            return Err(ChainError::domain("detuning parameter must be finite"));
        }
        Ok(())
    }

    /// Left/right decay rates (γ_L, γ_R) derived from the directionality.
    pub fn rates(&self) -> Result<(f64, f64)> {
        gamma_rates(self.directionality)
    }

    /// Detunings of every site, 0-based storage of δ_1..δ_N.
    pub fn detunings(&self) -> Result<Vec<f64>> {
        (1..=self.n_atoms)
            .map(|mu| detuning_at(self.detuning, mu, self.n_atoms))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ChainConfig =
            serde_json::from_str(text).map_err(|e| ChainError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ChainConfig is always serializable")
    }
}

/// Decay rates (γ_L, γ_R) = ((1−D)/2, (1+D)/2); the sum is exactly γ = 1.
pub fn gamma_rates(d: f64) -> Result<(f64, f64)> {
    if !(-1.0..=1.0).contains(&d) || !d.is_finite() {
        return Err(ChainError::domain(format!(
            "directionality D = {d} outside [-1, 1]"
        )));
    }
    Ok(((1.0 - d) / 2.0, (1.0 + d) / 2.0))
}

/// Evaluates δ_μ for the 1-based site index μ.
pub fn detuning_at(profile: DetuningProfile, mu: usize, n: usize) -> Result<f64> {
    if mu == 0 || mu > n {
        return Err(ChainError::domain(format!(
            "site index mu = {mu} outside 1..={n}"
        )));
    }
    let mu = mu as f64;
    let n = n as f64;
    Ok(match profile {
        DetuningProfile::Uniform { delta0 } => delta0,
        DetuningProfile::Linear { s } => (s / n) * (mu - 1.0),
        DetuningProfile::Harmonic { h } => {
            let x = mu - (n + 1.0) / 2.0;
            h * x * x
        }
    })
}

/// Dense N×N non-Hermitian coupling matrix, in units of γ.
///
/// Entries are M_μν = −γ_L e^{iξ|μ−ν|} above the diagonal,
/// iδ_μ − 1/2 on it, and −γ_R e^{iξ|μ−ν|} below.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    n: usize,
    mat: Mat<C64>,
}

impl CouplingMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at 0-based (row, col) = (μ−1, ν−1).
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.mat[(i, i)]).sum()
    }

    pub(crate) fn as_faer(&self) -> &Mat<C64> {
        &self.mat
    }
}

/// Builds the coupling matrix of Eq.-of-motion form dσ/dt = Mσ − iΩv.
pub fn build_coupling_matrix(config: &ChainConfig) -> Result<CouplingMatrix> {
    config.validate()?;
    let n = config.n_atoms;
    let (gl, gr) = config.rates()?;
    let delta = config.detunings()?;
    let xi = config.xi;
    let mat = Mat::from_fn(n, n, |row, col| {
        if row == col {
            C64::new(-0.5, delta[row])
        } else {
            let g = if row < col { gl } else { gr };
            let phase = xi * (row as f64 - col as f64).abs();
            -g * C64::new(0.0, phase).exp()
        }
    });
    Ok(CouplingMatrix { n, mat })
}

/// Drive phase vector v_μ = e^{i·cos(θ_s)·ξ·(μ−1)}; every entry has unit
/// modulus.
pub fn drive_vector(config: &ChainConfig) -> Result<Vec<C64>> {
    config.validate()?;
    let q = config.theta_s.cos() * config.xi;
    Ok((0..config.n_atoms)
        .map(|i| C64::new(0.0, q * i as f64).exp())
        .collect())
}
