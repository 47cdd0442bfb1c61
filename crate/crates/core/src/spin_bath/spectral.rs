use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{tilde_frequency, DiscreteBath};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{adaptive, fourier_half_line, semi_infinite, QuadratureSpec, Trig};

/// A spectral density `J(ω̃)` on `ω̃ ≥ 0`.
pub trait SpectralDensity: Send + Sync {
    fn eval(&self, omega: f64) -> f64;

    /// Frequency below which all structure of `J` lies; beyond it `J` is
    /// smooth and eventually monotone.
    fn scale(&self) -> f64;

    /// Narrowest feature width; bounds how finely regulated integrals must
    /// resolve `J`.
    fn resolution(&self) -> f64 {
        self.scale()
    }

    /// Interior points where `J` varies rapidly.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Whether `∫_0^∞ J` converges.
    fn integrable(&self) -> bool;
}

/// Ohmic density with a Lorentz–Drude cutoff,
/// `J(ω̃) = (2Mγ₀/π) ω̃ Λ²/(Λ² + ω̃²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OhmicDensity {
    pub mass: f64,
    pub gamma0: f64,
    pub cutoff_freq: f64,
}

impl OhmicDensity {
    pub fn new(mass: f64, gamma0: f64, cutoff_freq: f64) -> Result<Self> {
        let d = Self {
            mass,
            gamma0,
            cutoff_freq,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("gamma0", self.gamma0),
            ("cutoff_freq", self.cutoff_freq),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `(Λ²/(Λ² + Ω²))`, the Lorentz–Drude suppression at `omega`.
    pub fn drude_factor(&self, omega: f64) -> f64 {
        let l2 = self.cutoff_freq * self.cutoff_freq;
        l2 / (l2 + omega * omega)
    }

    /// `∫_0^W J dω̃ = (Mγ₀/π) Λ² ln(1 + W²/Λ²)`; grows without bound in `W`.
    pub fn integral_up_to(&self, omega_max: f64) -> f64 {
        let l = self.cutoff_freq;
        self.mass * self.gamma0 / PI * l * l * (omega_max * omega_max / (l * l)).ln_1p()
    }
}

pub fn ohmic_j(density: &OhmicDensity, omega_tilde: f64) -> f64 {
    2.0 * density.mass * density.gamma0 / PI * omega_tilde * density.drude_factor(omega_tilde)
}

impl SpectralDensity for OhmicDensity {
    fn eval(&self, omega: f64) -> f64 {
        ohmic_j(self, omega)
    }

    fn scale(&self) -> f64 {
        4.0 * self.cutoff_freq
    }

    fn resolution(&self) -> f64 {
        self.cutoff_freq
    }

    fn integrable(&self) -> bool {
        false
    }
}

/// `tanh(ω/2T)` with the `T = 0` branch returning `sign(ω)`.
pub fn tanh_factor(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        omega.signum()
    } else {
        (0.5 * omega / temperature).tanh()
    }
}

/// `coth(ω/2T)` with the `T = 0` branch returning `sign(ω)`.
pub fn coth_factor(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        omega.signum()
    } else {
        1.0 / (0.5 * omega / temperature).tanh()
    }
}

/// Oscillator-bath density that reproduces the spin-bath kernels:
/// `J_osc(ω̃) = J(ω̃) tanh(ω̃/2T)`.
pub struct Surrogate<'a> {
    inner: &'a dyn SpectralDensity,
    temperature: f64,
}

pub fn surrogate_density(j: &dyn SpectralDensity, temperature: f64) -> Result<Surrogate<'_>> {
    if !(temperature >= 0.0) {
        return Err(invalid(
            "temperature",
            format!("must be non-negative, got {temperature}"),
        ));
    }
    Ok(Surrogate {
        inner: j,
        temperature,
    })
}

impl Surrogate<'_> {
    pub fn temperature(&self) -> f64 {
        self.temperature
    }
}

impl SpectralDensity for Surrogate<'_> {
    fn eval(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        self.inner.eval(omega) * tanh_factor(omega, self.temperature)
    }

    fn scale(&self) -> f64 {
        self.inner.scale()
    }

    fn resolution(&self) -> f64 {
        if self.temperature > 0.0 {
            self.inner.resolution().min(2.0 * PI * self.temperature)
        } else {
            self.inner.resolution()
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }

    fn integrable(&self) -> bool {
        self.inner.integrable()
    }
}

/// Discrete bath with each `δ(ω̃ − ω̃_i)` replaced by a normalised Gaussian of
/// width `width`.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadenedBath {
    lines: Vec<(f64, f64)>,
    width: f64,
}

impl BroadenedBath {
    pub fn new(bath: &DiscreteBath, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(invalid("width", format!("must be positive, got {width}")));
        }
        let lines = bath
            .spins()
            .iter()
            .map(|s| {
                let (wt, _) = tilde_frequency(s);
                let amp = s.g * s.delta / wt;
                (wt, amp * amp)
            })
            .collect();
        Ok(Self { lines, width })
    }
}

impl SpectralDensity for BroadenedBath {
    fn eval(&self, omega: f64) -> f64 {
        let norm = 1.0 / (self.width * (2.0 * PI).sqrt());
        self.lines
            .iter()
            .map(|(w0, weight)| {
                let z = (omega - w0) / self.width;
                if z.abs() > 40.0 {
                    0.0
                } else {
                    weight * norm * (-0.5 * z * z).exp()
                }
            })
            .sum()
    }

    fn scale(&self) -> f64 {
        let top = self.lines.iter().map(|l| l.0).fold(0.0, f64::max);
        top + 12.0 * self.width
    }

    fn resolution(&self) -> f64 {
        self.width
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        for (w0, _) in &self.lines {
            for k in -6..=6 {
                pts.push(w0 + k as f64 * self.width);
            }
        }
        pts
    }

    fn integrable(&self) -> bool {
        true
    }
}

/// Noise and dissipation kernels at one time lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernels {
    pub nu: f64,
    pub eta: f64,
    pub nu_error: f64,
    pub eta_error: f64,
    /// Upper frequency reached by the integration. For `τ = 0` and a
    /// non-integrable density this is the cutoff the value depends on.
    pub omega_max: f64,
}

/// Spin-bath kernels `ν(τ) = ∫ J cos(ω̃τ)` and `η(τ) = ∫ J tanh(ω̃/2T) sin(ω̃τ)`.
pub fn kernels(
    j: &dyn SpectralDensity,
    temperature: f64,
    tau: f64,
    quad: &QuadratureSpec,
) -> Result<Kernels> {
    check_temperature(temperature)?;
    let noise = |w: f64| j.eval(w);
    let dissipation = |w: f64| j.eval(w) * tanh_factor(w, temperature);
    kernel_pair(&noise, &dissipation, j, temperature, tau, quad)
}

/// Oscillator-bath kernels `ν_osc(τ) = ∫ J_osc coth(ω̃/2T) cos(ω̃τ)` and
/// `η_osc(τ) = ∫ J_osc sin(ω̃τ)`.
pub fn qbm_kernels(
    j_osc: &dyn SpectralDensity,
    temperature: f64,
    tau: f64,
    quad: &QuadratureSpec,
) -> Result<Kernels> {
    check_temperature(temperature)?;
    let noise = |w: f64| {
        if w <= 0.0 {
            0.0
        } else {
            j_osc.eval(w) * coth_factor(w, temperature)
        }
    };
    let dissipation = |w: f64| j_osc.eval(w);
    kernel_pair(&noise, &dissipation, j_osc, temperature, tau, quad)
}

fn kernel_pair(
    noise: &dyn Fn(f64) -> f64,
    dissipation: &dyn Fn(f64) -> f64,
    j: &dyn SpectralDensity,
    temperature: f64,
    tau: f64,
    quad: &QuadratureSpec,
) -> Result<Kernels> {
    if tau < 0.0 {
        return Err(invalid("tau", format!("kernels are evaluated for tau >= 0, got {tau}")));
    }
    let points = j.breakpoints();
    if tau == 0.0 {
        let (nu, omega_max) = match (quad.omega_max, j.integrable()) {
            (Some(w), _) => (adaptive(&noise, 0.0, w, &points, quad)?, w),
            (None, true) => (
                semi_infinite(&noise, 0.0, j.scale(), &points, quad)?,
                f64::INFINITY,
            ),
            (None, false) => {
                return Err(invalid(
                    "omega_max",
                    "nu(0) diverges for this density; supply a finite omega_max",
                ))
            }
        };
        return Ok(Kernels {
            nu: nu.value,
            eta: 0.0,
            nu_error: nu.error,
            eta_error: 0.0,
            omega_max,
        });
    }
    let feature_end = j.scale().max(5.0 * temperature);
    let nu = fourier_half_line(&noise, Trig::Cos, tau, feature_end, &points, quad)?;
    let eta = fourier_half_line(&dissipation, Trig::Sin, tau, feature_end, &points, quad)?;
    Ok(Kernels {
        nu: nu.estimate.value,
        eta: eta.estimate.value,
        nu_error: nu.estimate.error,
        eta_error: eta.estimate.error,
        omega_max: nu.omega_max.max(eta.omega_max),
    })
}

pub(crate) fn check_temperature(temperature: f64) -> Result<()> {
    if temperature >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "temperature",
            reason: format!("must be non-negative, got {temperature}"),
        })
    }
}
