use serde::{Deserialize, Serialize};

use crate::dynamics::OscillatorSpec;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::spin_bath::{
    coefficients_frequency_domain, coefficients_ohmic_closed, coefficients_quadrature,
    CoefficientOptions, OhmicDensity, Regulator, SpectralDensity,
};

/// Pairwise relative deviation above which the cross-check fails.
pub const CROSSCHECK_TOL: f64 = 1e-2;

/// One coefficient obtained by each available route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathValues {
    pub regulated: f64,
    pub frequency_domain: f64,
    pub closed_form: Option<f64>,
}

impl PathValues {
    fn named(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![("regulated", self.regulated), ("frequency_domain", self.frequency_domain)];
        if let Some(c) = self.closed_form {
            v.push(("closed_form", c));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub coefficient: String,
    pub first: String,
    pub second: String,
    pub relative: f64,
}

/// `γ` and `D₁` by every route, with all pairwise relative deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub gamma: PathValues,
    pub d1: PathValues,
    pub deviations: Vec<Deviation>,
}

impl CrosscheckReport {
    fn build(gamma: PathValues, d1: PathValues) -> Self {
        let mut deviations = Vec::new();
        for (name, values) in [("gamma", &gamma), ("d1", &d1)] {
            let named = values.named();
            for i in 0..named.len() {
                for k in i + 1..named.len() {
                    let (a, b) = (named[i].1, named[k].1);
                    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
                    deviations.push(Deviation {
                        coefficient: name.into(),
                        first: named[i].0.into(),
                        second: named[k].0.into(),
                        relative: (a - b).abs() / scale,
                    });
                }
            }
        }
        Self { gamma, d1, deviations }
    }

    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().map(|d| d.relative).fold(0.0, f64::max)
    }

    pub fn failures(&self, tolerance: f64) -> Vec<&Deviation> {
        self.deviations
            .iter()
            .filter(|d| !(d.relative <= tolerance))
            .collect()
    }

    /// Error naming the worst offending pair, if any exceeds `tolerance`.
    pub fn check(&self, tolerance: f64) -> Result<()> {
        let worst = self
            .failures(tolerance)
            .into_iter()
            .max_by(|a, b| a.relative.total_cmp(&b.relative));
        match worst {
            None => Ok(()),
            Some(d) => Err(Error::Numerical(format!(
                "{}: {} vs {} differ by {:e} (tolerance {:e})",
                d.coefficient, d.first, d.second, d.relative, tolerance
            ))),
        }
    }
}

/// Loose internal gate so that disagreements surface in the report rather
/// than as an extrapolation error.
fn report_options(quad: &QuadratureSpec) -> CoefficientOptions {
    CoefficientOptions {
        quad: *quad,
        regulator: Regulator {
            epsilon0: None,
            tolerance: 0.5,
        },
        ..Default::default()
    }
}

fn paths(j: &dyn SpectralDensity, temperature: f64, osc: &OscillatorSpec, quad: &QuadratureSpec) -> Result<(PathValues, PathValues)> {
    let opts = report_options(quad);
    let reg = coefficients_quadrature(j, temperature, osc, &opts)?;
    let fd = coefficients_frequency_domain(j, temperature, osc, &opts)?;
    Ok((
        PathValues {
            regulated: reg.gamma,
            frequency_domain: fd.gamma,
            closed_form: None,
        },
        PathValues {
            regulated: reg.d1,
            frequency_domain: fd.d1,
            closed_form: None,
        },
    ))
}

/// Regulated τ-integral against the delta-function form for any density.
pub fn quadrature_crosscheck(
    j: &dyn SpectralDensity,
    temperature: f64,
    osc: &OscillatorSpec,
    quad: &QuadratureSpec,
) -> Result<CrosscheckReport> {
    let (gamma, d1) = paths(j, temperature, osc, quad)?;
    Ok(CrosscheckReport::build(gamma, d1))
}

/// As [`quadrature_crosscheck`], adding the ohmic closed forms as a third route.
pub fn ohmic_crosscheck(
    density: &OhmicDensity,
    temperature: f64,
    osc: &OscillatorSpec,
    quad: &QuadratureSpec,
) -> Result<CrosscheckReport> {
    let (mut gamma, mut d1) = paths(density, temperature, osc, quad)?;
    let closed = coefficients_ohmic_closed(density, temperature, osc, &report_options(quad))?;
    gamma.closed_form = Some(closed.gamma);
    d1.closed_form = Some(closed.d1);
    Ok(CrosscheckReport::build(gamma, d1))
}
