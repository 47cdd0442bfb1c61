//! Spin-bath correlation functions, spectral densities and Born–Markov
//! coefficients.
//!
//! Each bath spin has Hamiltonian `½(ω σ_z + Δ σ_x)` and couples to the
//! oscillator position through `g σ_z`. The bath correlation function splits as
//! `C(τ) = C₀ + ν(τ) − iη(τ)`; the four coefficients of the Born–Markov
//! equation are half-line Fourier integrals of `ν` and `η`.

mod coefficients;
mod correlation;
mod spectral;

pub use coefficients::{
    coefficients_discrete, coefficients_frequency_domain, coefficients_ohmic_closed, coefficients_quadrature,
    qbm_coefficients, qbm_coefficients_quadrature, CoefficientOptions, CoefficientSet, D0Policy,
    Method, Regulator,
};
pub use correlation::{correlation_closed, correlation_oracle};
pub use spectral::{
    coth_factor, kernels, ohmic_j, qbm_kernels, surrogate_density, tanh_factor, BroadenedBath,
    Kernels, OhmicDensity, SpectralDensity, Surrogate,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// One bath spin: asymmetry `ω`, tunnelling `Δ`, coupling `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinParams {
    pub omega: f64,
    pub delta: f64,
    pub g: f64,
}

impl SpinParams {
    pub fn new(omega: f64, delta: f64, g: f64) -> Result<Self> {
        let s = Self { omega, delta, g };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.delta.is_finite() && self.g.is_finite()) {
            return Err(invalid("spin", "parameters must be finite"));
        }
        if self.delta < 0.0 {
            return Err(invalid("delta", format!("must be non-negative, got {}", self.delta)));
        }
        if self.omega == 0.0 && self.delta == 0.0 {
            return Err(invalid("spin", "omega and delta cannot both vanish"));
        }
        Ok(())
    }
}

/// Splitting `ω̃ = √(ω² + Δ²)` and mixing angle `θ = atan2(Δ, ω)`.
pub fn tilde_frequency(spin: &SpinParams) -> (f64, f64) {
    (spin.omega.hypot(spin.delta), spin.delta.atan2(spin.omega))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SpinParams>", into = "Vec<SpinParams>")]
pub struct DiscreteBath {
    spins: Vec<SpinParams>,
}

impl DiscreteBath {
    pub fn new(spins: Vec<SpinParams>) -> Result<Self> {
        if spins.is_empty() {
            return Err(invalid("spins", "bath needs at least one spin"));
        }
        for s in &spins {
            s.validate()?;
        }
        Ok(Self { spins })
    }

    pub fn spins(&self) -> &[SpinParams] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    /// Thermal mean force `Σ g_i ⟨σ_z^(i)⟩_T`. Reported, not enforced: a
    /// nonzero value only shifts the oscillator equilibrium.
    pub fn mean_force(&self, temperature: f64) -> Result<f64> {
        spectral::check_temperature(temperature)?;
        Ok(self
            .spins
            .iter()
            .map(|s| {
                let (wt, _) = tilde_frequency(s);
                // ⟨σ_z⟩ = −(ω/ω̃) tanh(ω̃/2T)
                -s.g * s.omega / wt * tanh_factor(wt, temperature)
            })
            .sum())
    }
}

impl TryFrom<Vec<SpinParams>> for DiscreteBath {
    type Error = crate::Error;

    fn try_from(spins: Vec<SpinParams>) -> Result<Self> {
        Self::new(spins)
    }
}

impl From<DiscreteBath> for Vec<SpinParams> {
    fn from(b: DiscreteBath) -> Self {
        b.spins
    }
}

/// `C₀ = Σ (g ω/ω̃)²`, the static part of the correlation function.
pub fn c0(bath: &DiscreteBath) -> f64 {
    bath.spins
        .iter()
        .map(|s| {
            let (wt, _) = tilde_frequency(s);
            let a = s.g * s.omega / wt;
            a * a
        })
        .sum()
}
