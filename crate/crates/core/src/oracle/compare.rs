use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ExactJointSpec, ExactModel};
use crate::dynamics::{bm_generator, integrate, line_fit, IntegrateOptions, OscillatorSpec};
use crate::error::{invalid, Error, Result};
use crate::operators::{c, DensityMatrix, FockSpace};
use crate::spin_bath::{coefficients_discrete, CoefficientSet, DiscreteBath, SpinParams};

/// Settings of the exact-versus-Born–Markov coherence comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComparisonOptions {
    pub g_scale: f64,
    /// Line width used for the discrete-bath coefficients.
    pub epsilon: f64,
    pub t_end: f64,
    pub samples: usize,
    /// Born–Markov steps per sample.
    pub substeps: usize,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        Self {
            g_scale: 0.05,
            epsilon: 0.1,
            t_end: 20.0,
            samples: 40,
            substeps: 10,
        }
    }
}

/// Coherence `⟨0|ρ|1⟩` from both evolutions and the fitted trends.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceComparison {
    pub times: Vec<f64>,
    pub exact: Vec<Complex64>,
    pub bm: Vec<Complex64>,
    pub coefficients: CoefficientSet,
    /// Slopes of `ln|ρ₀₁|`; negative for decay.
    pub exact_rate: f64,
    pub bm_rate: f64,
    /// Rotation frequency of `ρ₀₁` minus `Ω₀`.
    pub exact_shift: f64,
    pub bm_shift: f64,
    pub exact_monotone: bool,
    pub bm_monotone: bool,
    pub energy_drift: f64,
}

impl CoherenceComparison {
    /// `exact_rate / bm_rate`.
    pub fn rate_ratio(&self) -> f64 {
        self.exact_rate / self.bm_rate
    }

    /// Both envelopes decay monotonically, the rates agree within `factor`
    /// and the frequency shifts have the same sign.
    pub fn trend_agrees(&self, factor: f64) -> bool {
        let r = self.rate_ratio();
        self.exact_monotone
            && self.bm_monotone
            && self.exact_rate < 0.0
            && self.bm_rate < 0.0
            && r <= factor
            && r >= 1.0 / factor
            && self.exact_shift.signum() == self.bm_shift.signum()
    }
}

/// Four unbiased spins (`ω = 0`, so the thermal mean force vanishes) with
/// splittings `0.85, 0.95, 1.05, 1.15` spread around a unit oscillator frequency.
pub fn trend_bath() -> DiscreteBath {
    let spins = [0.85, 0.95, 1.05, 1.15]
        .iter()
        .map(|&d| SpinParams { omega: 0.0, delta: d, g: 1.0 })
        .collect();
    DiscreteBath::new(spins).expect("static bath is valid")
}

/// Default comparison setup: unit oscillator, [`trend_bath`], cutoff 8, `T = 0.5`.
pub fn trend_spec() -> ExactJointSpec {
    ExactJointSpec {
        osc: OscillatorSpec {
            mass: 1.0,
            omega0: 1.0,
        },
        bath: trend_bath(),
        cutoff: 8,
        temperature: 0.5,
    }
}

fn monotone_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
}

fn unwrap_phase(z: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(z.len());
    let mut offset = 0.0;
    let mut prev = f64::NAN;
    for v in z {
        let a = v.arg();
        if prev.is_finite() {
            let jump = a - prev;
            if jump > std::f64::consts::PI {
                offset -= 2.0 * std::f64::consts::PI;
            } else if jump < -std::f64::consts::PI {
                offset += 2.0 * std::f64::consts::PI;
            }
        }
        prev = a;
        out.push(a + offset);
    }
    out
}

/// Evolves `(|0⟩ + |1⟩)/√2` exactly with the spins and under the Born–Markov
/// generator built from the same bath, then compares the coherence trends.
pub fn coherence_comparison(spec: &ExactJointSpec, opts: &ComparisonOptions) -> Result<CoherenceComparison> {
    if opts.samples < 4 || opts.substeps == 0 || !(opts.t_end > 0.0) {
        return Err(invalid("comparison", "needs t_end > 0, at least 4 samples and 1 substep"));
    }
    let space = FockSpace::new(spec.cutoff)?;
    let mut psi = DVector::from_element(spec.cutoff, c(0.0));
    psi[0] = c(1.0);
    psi[1] = c(1.0);
    let rho0 = DensityMatrix::from_pure(vec![spec.cutoff], &psi)?;

    let model = ExactModel::new(spec, opts.g_scale)?;
    let exact = model.trajectory(&rho0, opts.t_end, opts.samples)?;

    let scaled = DiscreteBath::new(
        spec.bath
            .spins()
            .iter()
            .map(|s| SpinParams { g: s.g * opts.g_scale, ..*s })
            .collect(),
    )?;
    let coefficients = coefficients_discrete(&scaled, spec.temperature, &spec.osc, opts.epsilon)?;
    let generator = bm_generator(space, &spec.osc, &coefficients)?;
    let dt = opts.t_end / (opts.samples * opts.substeps) as f64;
    let mut iopts = IntegrateOptions::new(opts.t_end, dt, opts.substeps);
    iopts.store_states = true;
    let bm = integrate(&generator, &rho0, &iopts)?;
    let states = bm
        .states
        .ok_or_else(|| Error::Numerical("integrator returned no states".into()))?;
    if states.len() != exact.reduced.len() {
        return Err(Error::Numerical(format!(
            "sample grids differ: {} exact, {} Born-Markov",
            exact.reduced.len(),
            states.len()
        )));
    }

    let times = exact.times.clone();
    let ex: Vec<Complex64> = exact.reduced.iter().map(|r| r[(0, 1)]).collect();
    let bmc: Vec<Complex64> = states.iter().map(|r| r[(0, 1)]).collect();
    let fit = |z: &[Complex64]| {
        let log_abs: Vec<(f64, f64)> = times.iter().zip(z).map(|(t, v)| (*t, v.norm().ln())).collect();
        let phase: Vec<(f64, f64)> = times.iter().copied().zip(unwrap_phase(z)).collect();
        (line_fit(&log_abs).0, line_fit(&phase).0 - spec.osc.omega0)
    };
    let (exact_rate, exact_shift) = fit(&ex);
    let (bm_rate, bm_shift) = fit(&bmc);
    let env = |z: &[Complex64]| z.iter().map(|v| v.norm()).collect::<Vec<_>>();
    Ok(CoherenceComparison {
        exact_monotone: monotone_decreasing(&env(&ex)),
        bm_monotone: monotone_decreasing(&env(&bmc)),
        times,
        exact: ex,
        bm: bmc,
        coefficients,
        exact_rate,
        bm_rate,
        exact_shift,
        bm_shift,
        energy_drift: exact.energy_drift,
    })
}
