//! Master-equation generators, time integration and observables.
//!
//! Every generator compiles to a [`Superoperator`] whose factors are banded,
//! so one right-hand-side evaluation costs `O(bandwidth · d²)`. The
//! Born–Markov generator uses the dimensionful `X, P` of the oscillator; the
//! joint and adiabatic generators use the dimensionless `x̂ = a + a†`.

mod generator;
mod integrate;

pub use generator::{
    adiabatic_generator, adiabatic_rhs, bm_generator, bm_rhs, joint_generator,
    joint_generator_with_dissipator_sign, joint_rhs, position_momentum, slaving_residual, slaving_residual_matrix,
    tls_blocks, Generator, Superoperator,
};
pub use integrate::{
    convergence_study, heating_rate_estimate, integrate, integrate_with, ConvergenceStudy, HeatingFit,
    IntegrateOptions, Sample, Trajectory,
};
pub(crate) use integrate::line_fit;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Mass and bare frequency of the central oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSpec {
    pub mass: f64,
    pub omega0: f64,
}

impl OscillatorSpec {
    pub fn new(mass: f64, omega0: f64) -> Result<Self> {
        let s = Self { mass, omega0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(invalid("mass", format!("must be positive, got {}", self.mass)));
        }
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(invalid("omega0", format!("must be positive, got {}", self.omega0)));
        }
        Ok(())
    }
}

/// Parameters of the oscillator coupled to one damped two-level system.
///
/// `nbar` and `big_gamma` are derived and kept consistent by the constructors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TlsJointSpec {
    pub omega0: f64,
    pub delta: f64,
    pub g: f64,
    pub gamma_tls: f64,
    pub temperature: f64,
    pub nbar: f64,
    pub big_gamma: f64,
    /// Multiplies `Δ` in the `[σ_x, ρ]` term: 1 gives `Δσ_x`, ½ gives `(Δ/2)σ_x`.
    pub hamiltonian_factor: f64,
}

impl TlsJointSpec {
    /// Derives `n̄ = 1/(e^{Δ/2T} − 1)` from the temperature.
    pub fn from_temperature(omega0: f64, delta: f64, g: f64, gamma_tls: f64, temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0) {
            return Err(invalid("temperature", format!("must be non-negative, got {temperature}")));
        }
        check_delta(delta)?;
        Self::build(omega0, delta, g, gamma_tls, temperature, nbar_from_temperature(delta, temperature))
    }

    /// Inverts the occupancy relation: `T = Δ/(2 ln(1 + 1/n̄))`.
    pub fn from_nbar(omega0: f64, delta: f64, g: f64, gamma_tls: f64, nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(invalid("nbar", format!("must be finite and non-negative, got {nbar}")));
        }
        check_delta(delta)?;
        Self::build(omega0, delta, g, gamma_tls, temperature_from_nbar(delta, nbar), nbar)
    }

    fn build(omega0: f64, delta: f64, g: f64, gamma_tls: f64, temperature: f64, nbar: f64) -> Result<Self> {
        let spec = Self {
            omega0,
            delta,
            g,
            gamma_tls,
            temperature,
            nbar,
            big_gamma: heating_rate(g, gamma_tls, nbar),
            hamiltonian_factor: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_hamiltonian_factor(mut self, factor: f64) -> Result<Self> {
        self.hamiltonian_factor = factor;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0) {
            return Err(invalid("omega0", format!("must be positive, got {}", self.omega0)));
        }
        check_delta(self.delta)?;
        if !self.g.is_finite() {
            return Err(invalid("g", "must be finite"));
        }
        if !(self.gamma_tls > 0.0 && self.gamma_tls.is_finite()) {
            return Err(invalid("gamma_tls", format!("must be positive, got {}", self.gamma_tls)));
        }
        if !(self.nbar >= 0.0 && self.nbar.is_finite()) {
            return Err(invalid("nbar", format!("must be finite and non-negative, got {}", self.nbar)));
        }
        if self.hamiltonian_factor != 1.0 && self.hamiltonian_factor != 0.5 {
            return Err(invalid(
                "hamiltonian_factor",
                format!("must be 1 or 0.5, got {}", self.hamiltonian_factor),
            ));
        }
        Ok(())
    }

    /// `p₊/p₋ = n̄/(n̄ + 1)`, the ratio the dissipators relax to.
    pub fn detailed_balance_ratio(&self) -> f64 {
        self.nbar / (self.nbar + 1.0)
    }

    /// `p₊/p₋ = e^{−Δ/T}`, the Boltzmann ratio of the thermal TLS state.
    pub fn boltzmann_ratio(&self) -> f64 {
        if self.temperature == 0.0 {
            0.0
        } else {
            (-self.delta / self.temperature).exp()
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(invalid("delta", format!("must be positive, got {delta}")))
    }
}

/// `n̄ = 1/(e^{Δ/2T} − 1)`; zero at `T = 0`.
pub fn nbar_from_temperature(delta: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        0.0
    } else {
        1.0 / (0.5 * delta / temperature).exp_m1()
    }
}

pub fn temperature_from_nbar(delta: f64, nbar: f64) -> f64 {
    if nbar == 0.0 {
        0.0
    } else {
        0.5 * delta / (1.0 / nbar).ln_1p()
    }
}

/// `Γ = 2g²/(γ(2n̄ + 1))`.
pub fn heating_rate(g: f64, gamma_tls: f64, nbar: f64) -> f64 {
    2.0 * g * g / (gamma_tls * (2.0 * nbar + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occupancy_round_trip() {
        let spec = TlsJointSpec::from_temperature(1.0, 1.0, 1.0, 10.0, 1.0).unwrap();
        assert!((spec.nbar - 1.541_494_082_536_798).abs() < 1e-12);
        let back = TlsJointSpec::from_nbar(1.0, 1.0, 1.0, 10.0, spec.nbar).unwrap();
        assert!((back.temperature - 1.0).abs() < 1e-12);
        let cold = TlsJointSpec::from_nbar(1.0, 1.0, 1.0, 10.0, 0.0).unwrap();
        assert_eq!(cold.temperature, 0.0);
        assert_eq!(cold.boltzmann_ratio(), 0.0);
    }

    #[test]
    fn heating_rate_values() {
        let spec = TlsJointSpec::from_nbar(1.0, 1.0, 1.0, 10.0, 0.0).unwrap();
        assert!((spec.big_gamma - 0.2).abs() < 1e-15);
        let rates: Vec<f64> = [0.0, 0.5, 1.0, 3.0].iter().map(|&n| heating_rate(1.0, 10.0, n)).collect();
        assert!(rates.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn population_conventions_differ() {
        let spec = TlsJointSpec::from_temperature(1.0, 1.0, 1.0, 10.0, 1.0).unwrap();
        assert!((spec.detailed_balance_ratio() - (-0.5f64).exp()).abs() < 1e-14);
        assert!((spec.boltzmann_ratio() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs() {
        assert!(TlsJointSpec::from_nbar(1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(TlsJointSpec::from_nbar(1.0, 0.0, 1.0, 10.0, 0.0).is_err());
        assert!(TlsJointSpec::from_temperature(1.0, 1.0, 1.0, 10.0, -1.0).is_err());
        let spec = TlsJointSpec::from_nbar(1.0, 1.0, 1.0, 10.0, 0.0).unwrap();
        assert!(spec.with_hamiltonian_factor(0.5).is_ok());
        assert!(spec.with_hamiltonian_factor(2.0).is_err());
        assert!(OscillatorSpec::new(0.0, 1.0).is_err());
    }
}
