use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::spectral::{check_temperature, coth_factor, tanh_factor, OhmicDensity, SpectralDensity};
use super::{c0, tilde_frequency, DiscreteBath};
use crate::dynamics::OscillatorSpec;
use crate::error::{Error, Result};
use crate::quadrature::{principal_value, semi_infinite, Estimate, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    Qbm,
}

/// The Born–Markov coefficients `Ω̃₀², γ, D = D₀ + D₁, f = f₀ + f₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub omega_shift_sq: f64,
    pub gamma: f64,
    pub d0: f64,
    pub d1: f64,
    pub f0: f64,
    pub f1: f64,
    /// Static correlation `C₀` that produced `f0`.
    pub c0: f64,
    pub method: Method,
    /// Largest absolute error estimate among the numerically obtained entries.
    pub error: f64,
}

impl CoefficientSet {
    pub fn zero() -> Self {
        Self {
            omega_shift_sq: 0.0,
            gamma: 0.0,
            d0: 0.0,
            d1: 0.0,
            f0: 0.0,
            f1: 0.0,
            c0: 0.0,
            method: Method::ClosedForm,
            error: 0.0,
        }
    }

    pub fn d(&self) -> f64 {
        self.d0 + self.d1
    }

    pub fn f(&self) -> f64 {
        self.f0 + self.f1
    }

    pub fn is_finite(&self) -> bool {
        [
            self.omega_shift_sq,
            self.gamma,
            self.d0,
            self.d1,
            self.f0,
            self.f1,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Choice of the constant diffusion `D₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum D0Policy {
    /// `D₀ = (π/2) J(Ω₀)`, the zero-temperature oscillator-bath diffusion.
    #[default]
    ZeroTemperatureQbm,
    /// The regulated integral, which vanishes for `Ω₀ > 0`.
    Regulated,
    Value(f64),
}

impl D0Policy {
    fn resolve(&self, j: &dyn SpectralDensity, omega0: f64) -> f64 {
        match *self {
            D0Policy::ZeroTemperatureQbm => 0.5 * PI * j.eval(omega0),
            D0Policy::Regulated => 0.0,
            D0Policy::Value(v) => v,
        }
    }
}

/// Exponential regulator schedule `ε₀, ε₀/2, ε₀/4` and the accepted residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Regulator {
    /// Starting `ε`; by default a twentieth of the smallest frequency scale.
    pub epsilon0: Option<f64>,
    /// Relative bound on the extrapolation residual and on the disagreement
    /// with the frequency-domain forms.
    pub tolerance: f64,
}

impl Default for Regulator {
    fn default() -> Self {
        Self {
            epsilon0: None,
            tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct CoefficientOptions {
    pub d0: D0Policy,
    /// `C₀`; zero for a continuum density with no static part.
    pub c0: f64,
    pub quad: QuadratureSpec,
    pub regulator: Regulator,
}

/// Noise density `n` and dissipation density `d` with `ν = ∫ n cos`, `η = ∫ d sin`.
/// All four coefficients are linear functionals of this pair.
struct KernelPair<'a> {
    noise: &'a dyn Fn(f64) -> f64,
    dissipation: &'a dyn Fn(f64) -> f64,
    j: &'a dyn SpectralDensity,
    temperature: f64,
}

impl KernelPair<'_> {
    fn span(&self, omega0: f64) -> f64 {
        self.j.scale().max(4.0 * omega0).max(10.0 * self.temperature)
    }

    fn points(&self, omega0: f64, eps: f64) -> Vec<f64> {
        let mut pts = self.j.breakpoints();
        pts.push(omega0);
        for k in [1.0, 4.0, 16.0, 64.0] {
            pts.push(omega0 - k * eps);
            pts.push(omega0 + k * eps);
        }
        pts.retain(|p| *p > 0.0);
        pts
    }
}

struct Raw {
    omega_shift_sq: Estimate,
    gamma: Estimate,
    d1: Estimate,
    f1: Estimate,
}

/// The four regulated integrals at one `ε`, with the τ integral done exactly.
fn regulated_at(pair: &KernelPair, osc: &OscillatorSpec, eps: f64, quad: &QuadratureSpec) -> Result<Raw> {
    let (m, w0) = (osc.mass, osc.omega0);
    let lorentz = |x: f64| eps / (eps * eps + x * x);
    let disp = |x: f64| x / (eps * eps + x * x);
    let span = pair.span(w0);
    let pts = pair.points(w0, eps);
    let integrate = |f: &dyn Fn(f64) -> f64| semi_infinite(&f, 0.0, span, &pts, quad);

    let gamma = integrate(&|w| {
        (pair.dissipation)(w) * 0.5 * (lorentz(w - w0) - lorentz(w + w0))
    })?;
    let d1 = integrate(&|w| (pair.noise)(w) * 0.5 * (lorentz(w - w0) + lorentz(w + w0)))?;
    let shift = integrate(&|w| (pair.dissipation)(w) * 0.5 * (disp(w + w0) + disp(w - w0)))?;
    let f1 = integrate(&|w| (pair.noise)(w) * 0.5 * (disp(w0 + w) + disp(w0 - w)))?;
    Ok(Raw {
        omega_shift_sq: shift.scale(-2.0 / m),
        gamma: gamma.scale(1.0 / (m * w0)),
        d1,
        f1: f1.scale(-1.0 / (m * w0)),
    })
}

struct Extrapolated {
    value: f64,
    residual: f64,
}

fn richardson(s: [f64; 3]) -> Extrapolated {
    let r1a = 2.0 * s[1] - s[0];
    let r1b = 2.0 * s[2] - s[1];
    let r2 = (4.0 * r1b - r1a) / 3.0;
    Extrapolated {
        value: r2,
        residual: (r2 - r1b).abs(),
    }
}

fn default_epsilon(pair: &KernelPair, omega0: f64) -> f64 {
    let mut scale = omega0.min(pair.j.resolution());
    if pair.temperature > 0.0 {
        scale = scale.min(2.0 * PI * pair.temperature);
    }
    0.05 * scale
}

fn within(value: f64, reference: f64, tol: f64) -> bool {
    (value - reference).abs() <= tol * reference.abs().max(value.abs()).max(1e-300)
}

/// Regulated Richardson route, checked against the frequency-domain route.
fn regulated(
    pair: &KernelPair,
    osc: &OscillatorSpec,
    opts: &CoefficientOptions,
) -> Result<(f64, f64, f64, f64, f64)> {
    let eps0 = opts
        .regulator
        .epsilon0
        .unwrap_or_else(|| default_epsilon(pair, osc.omega0));
    if !(eps0 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon0",
            reason: format!("must be positive, got {eps0}"),
        });
    }
    let levels = [
        regulated_at(pair, osc, eps0, &opts.quad)?,
        regulated_at(pair, osc, 0.5 * eps0, &opts.quad)?,
        regulated_at(pair, osc, 0.25 * eps0, &opts.quad)?,
    ];
    let mut error = levels
        .iter()
        .flat_map(|r| [r.omega_shift_sq.error, r.gamma.error, r.d1.error, r.f1.error])
        .fold(0.0, f64::max);

    let reference = frequency_domain(pair, osc, &opts.quad)?;
    let tol = opts.regulator.tolerance;
    let mut out = [0.0; 4];
    let picks: [(&'static str, fn(&Raw) -> f64, f64); 4] = [
        ("omega_shift_sq", |r| r.omega_shift_sq.value, reference.0),
        ("gamma", |r| r.gamma.value, reference.1),
        ("d1", |r| r.d1.value, reference.2),
        ("f1", |r| r.f1.value, reference.3),
    ];
    for (k, (name, pick, fd)) in picks.iter().enumerate() {
        let e = richardson([pick(&levels[0]), pick(&levels[1]), pick(&levels[2])]);
        let scale = e.value.abs().max(pick(&levels[0]).abs()).max(1e-300);
        if e.residual > tol * scale {
            return Err(Error::ExtrapolationFailed {
                coefficient: name,
                residual: e.residual,
                tolerance: tol * scale,
            });
        }
        if !within(e.value, *fd, tol) {
            return Err(Error::ExtrapolationFailed {
                coefficient: name,
                residual: (e.value - fd).abs(),
                tolerance: tol * fd.abs(),
            });
        }
        error = error.max(e.residual);
        out[k] = e.value;
    }
    Ok((out[0], out[1], out[2], out[3], error.max(reference.4)))
}

/// Delta-function and principal-value forms.
fn frequency_domain(
    pair: &KernelPair,
    osc: &OscillatorSpec,
    quad: &QuadratureSpec,
) -> Result<(f64, f64, f64, f64, f64)> {
    let (m, w0) = (osc.mass, osc.omega0);
    let gamma = 0.5 * PI * (pair.dissipation)(w0) / (m * w0);
    let d1 = 0.5 * PI * (pair.noise)(w0);
    let (shift, f1) = principal_values(pair, osc, quad)?;
    let error = shift.error.max(f1.error);
    Ok((shift.value, gamma, d1, f1.value, error))
}

/// `Ω̃₀² = −(2/M) PV∫ d ω/(ω² − Ω₀²)` and `f₁ = (1/M) PV∫ n/(ω² − Ω₀²)`.
fn principal_values(
    pair: &KernelPair,
    osc: &OscillatorSpec,
    quad: &QuadratureSpec,
) -> Result<(Estimate, Estimate)> {
    let (m, w0) = (osc.mass, osc.omega0);
    let span = pair.span(w0);
    let pts = pair.j.breakpoints();
    let shift = principal_value(
        &|w: f64| (pair.dissipation)(w) * w / (w + w0),
        w0,
        span,
        &pts,
        quad,
    )?;
    let f1 = principal_value(&|w: f64| (pair.noise)(w) / (w + w0), w0, span, &pts, quad)?;
    Ok((shift.scale(-2.0 / m), f1.scale(1.0 / m)))
}

fn spin_pair<'a>(
    j: &'a dyn SpectralDensity,
    temperature: f64,
    noise: &'a dyn Fn(f64) -> f64,
    dissipation: &'a dyn Fn(f64) -> f64,
) -> KernelPair<'a> {
    KernelPair {
        noise,
        dissipation,
        j,
        temperature,
    }
}

fn assemble(
    values: (f64, f64, f64, f64, f64),
    d0: f64,
    osc: &OscillatorSpec,
    c0: f64,
    method: Method,
) -> CoefficientSet {
    CoefficientSet {
        omega_shift_sq: values.0,
        gamma: values.1,
        d0,
        d1: values.2,
        f0: -c0 / (osc.mass * osc.omega0 * osc.omega0),
        f1: values.3,
        c0,
        method,
        error: values.4,
    }
}

/// Spin-bath coefficients from the regulated τ integrals, extrapolated to
/// `ε → 0` and cross-checked against the frequency-domain forms.
pub fn coefficients_quadrature(
    j: &dyn SpectralDensity,
    temperature: f64,
    osc: &OscillatorSpec,
    opts: &CoefficientOptions,
) -> Result<CoefficientSet> {
    check_temperature(temperature)?;
    osc.validate()?;
    let noise = |w: f64| j.eval(w);
    let dissipation = |w: f64| j.eval(w) * tanh_factor(w, temperature);
    let pair = spin_pair(j, temperature, &noise, &dissipation);
    let values = regulated(&pair, osc, opts)?;
    Ok(assemble(
        values,
        opts.d0.resolve(j, osc.omega0),
        osc,
        opts.c0,
        Method::Quadrature,
    ))
}

/// Spin-bath coefficients from the delta and principal-value forms alone.
pub fn coefficients_frequency_domain(
    j: &dyn SpectralDensity,
    temperature: f64,
    osc: &OscillatorSpec,
    opts: &CoefficientOptions,
) -> Result<CoefficientSet> {
    check_temperature(temperature)?;
    osc.validate()?;
    let noise = |w: f64| j.eval(w);
    let dissipation = |w: f64| j.eval(w) * tanh_factor(w, temperature);
    let pair = spin_pair(j, temperature, &noise, &dissipation);
    let values = frequency_domain(&pair, osc, &opts.quad)?;
    Ok(assemble(
        values,
        opts.d0.resolve(j, osc.omega0),
        osc,
        opts.c0,
        Method::Quadrature,
    ))
}

/// Ohmic spin bath: `γ` and `D₁` in closed form, `Ω̃₀²` and `f₁` by principal
/// value.
pub fn coefficients_ohmic_closed(
    density: &OhmicDensity,
    temperature: f64,
    osc: &OscillatorSpec,
    opts: &CoefficientOptions,
) -> Result<CoefficientSet> {
    check_temperature(temperature)?;
    density.validate()?;
    osc.validate()?;
    let w0 = osc.omega0;
    let drude = density.drude_factor(w0);
    let gamma = density.gamma0 * drude * tanh_factor(w0, temperature);
    let d1 = density.mass * density.gamma0 * w0 * drude;
    let noise = |w: f64| density.eval(w);
    let dissipation = |w: f64| density.eval(w) * tanh_factor(w, temperature);
    let pair = spin_pair(density, temperature, &noise, &dissipation);
    let (shift, f1) = principal_values(&pair, osc, &opts.quad)?;
    Ok(assemble(
        (shift.value, gamma, d1, f1.value, shift.error.max(f1.error)),
        opts.d0.resolve(density, w0),
        osc,
        opts.c0,
        Method::ClosedForm,
    ))
}

/// Oscillator-bath comparator for the same ohmic density:
/// `γ = γ₀Λ²/(Λ² + Ω₀²)`, `D = Mγ₀Ω₀Λ²/(Λ² + Ω₀²) coth(Ω₀/2T)`, `D₀ = 0`.
pub fn qbm_coefficients(
    density: &OhmicDensity,
    temperature: f64,
    osc: &OscillatorSpec,
    quad: &QuadratureSpec,
) -> Result<CoefficientSet> {
    check_temperature(temperature)?;
    density.validate()?;
    osc.validate()?;
    let w0 = osc.omega0;
    let drude = density.drude_factor(w0);
    let gamma = density.gamma0 * drude;
    let d1 = density.mass * density.gamma0 * w0 * drude * coth_factor(w0, temperature);
    let noise = |w: f64| qbm_noise(density, temperature, w);
    let dissipation = |w: f64| density.eval(w);
    let pair = spin_pair(density, temperature, &noise, &dissipation);
    let (shift, f1) = principal_values(&pair, osc, quad)?;
    Ok(assemble(
        (shift.value, gamma, d1, f1.value, shift.error.max(f1.error)),
        0.0,
        osc,
        0.0,
        Method::Qbm,
    ))
}

/// Oscillator-bath coefficients for an arbitrary density `J_osc` by the
/// regulated route; `D₀ = 0`.
pub fn qbm_coefficients_quadrature(
    j_osc: &dyn SpectralDensity,
    temperature: f64,
    osc: &OscillatorSpec,
    opts: &CoefficientOptions,
) -> Result<CoefficientSet> {
    check_temperature(temperature)?;
    osc.validate()?;
    let noise = |w: f64| qbm_noise(j_osc, temperature, w);
    let dissipation = |w: f64| j_osc.eval(w);
    let pair = spin_pair(j_osc, temperature, &noise, &dissipation);
    let values = regulated(&pair, osc, opts)?;
    Ok(assemble(values, 0.0, osc, 0.0, Method::Qbm))
}

/// Coefficients of a discrete bath at a fixed regulator `ε`.
///
/// Each line contributes a Lorentzian of width `ε`, so no limit is taken; the
/// static part gives `D₀ = C₀ε/(ε² + Ω₀²)` and `f₀ = −C₀/(M(ε² + Ω₀²))`. This is
/// the only meaningful Born–Markov reading of a finite bath, whose spectrum is
/// a set of isolated lines.
pub fn coefficients_discrete(
    bath: &DiscreteBath,
    temperature: f64,
    osc: &OscillatorSpec,
    epsilon: f64,
) -> Result<CoefficientSet> {
    check_temperature(temperature)?;
    osc.validate()?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: format!("must be positive, got {epsilon}"),
        });
    }
    let (m, w0, e2) = (osc.mass, osc.omega0, epsilon * epsilon);
    let lorentz = |x: f64| epsilon / (e2 + x * x);
    let disp = |x: f64| x / (e2 + x * x);
    let mut out = CoefficientSet::zero();
    for s in bath.spins() {
        let (wt, _) = tilde_frequency(s);
        let a = (s.g * s.delta / wt).powi(2);
        let th = tanh_factor(wt, temperature);
        out.gamma += a * th * 0.5 * (lorentz(wt - w0) - lorentz(wt + w0)) / (m * w0);
        out.d1 += a * 0.5 * (lorentz(wt - w0) + lorentz(wt + w0));
        out.omega_shift_sq -= 2.0 / m * a * th * 0.5 * (disp(wt + w0) + disp(wt - w0));
        out.f1 -= a * 0.5 * (disp(w0 + wt) + disp(w0 - wt)) / (m * w0);
    }
    let static_part = c0(bath);
    out.c0 = static_part;
    out.d0 = static_part * epsilon / (e2 + w0 * w0);
    out.f0 = -static_part / (m * (e2 + w0 * w0));
    out.method = Method::ClosedForm;
    Ok(out)
}

fn qbm_noise(j: &dyn SpectralDensity, temperature: f64, w: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        j.eval(w) * coth_factor(w, temperature)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_bath::surrogate_density;

    fn setup() -> (OhmicDensity, OscillatorSpec) {
        (
            OhmicDensity::new(1.0, 1.0, 10.0).unwrap(),
            OscillatorSpec::new(1.0, 1.0).unwrap(),
        )
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn closed_form_zero_temperature_values() {
        let (d, osc) = setup();
        let cs = coefficients_ohmic_closed(&d, 0.0, &osc, &CoefficientOptions::default()).unwrap();
        assert_eq!(cs.gamma, 100.0 / 101.0);
        assert_eq!(cs.d1, 100.0 / 101.0);
        assert!((cs.d() - 200.0 / 101.0).abs() < 1e-15);
        assert_eq!(cs.method, Method::ClosedForm);
        // PV entries against their closed forms
        assert!(rel(cs.omega_shift_sq, -2000.0 / 101.0) < 1e-8);
        let f1 = 2.0 * 100.0 / PI * 10f64.ln() / 101.0;
        assert!(rel(cs.f1, f1) < 1e-8);
        assert_eq!(cs.f0, 0.0);
    }

    #[test]
    fn closed_form_half_damping_temperature() {
        let (d, osc) = setup();
        let t = 1.0 / (2.0 * 0.5f64.atanh());
        assert!((t - 0.910_239_226_626_837).abs() < 1e-12);
        let cs = coefficients_ohmic_closed(&d, t, &osc, &CoefficientOptions::default()).unwrap();
        assert!((cs.gamma - 0.5 * 100.0 / 101.0).abs() < 1e-14);
    }

    #[test]
    fn d0_policies() {
        let (d, osc) = setup();
        let mut opts = CoefficientOptions::default();
        let fig = coefficients_ohmic_closed(&d, 0.3, &osc, &opts).unwrap();
        assert!((fig.d0 - 100.0 / 101.0).abs() < 1e-14);
        opts.d0 = D0Policy::Regulated;
        assert_eq!(coefficients_ohmic_closed(&d, 0.3, &osc, &opts).unwrap().d0, 0.0);
        opts.d0 = D0Policy::Value(0.25);
        assert_eq!(coefficients_ohmic_closed(&d, 0.3, &osc, &opts).unwrap().d0, 0.25);
    }

    #[test]
    fn f0_from_static_correlation() {
        let (d, _) = setup();
        let osc = OscillatorSpec::new(2.0, 0.5).unwrap();
        let opts = CoefficientOptions {
            c0: 0.3,
            ..Default::default()
        };
        let cs = coefficients_ohmic_closed(&d, 0.3, &osc, &opts).unwrap();
        assert!((cs.f0 + 0.3 / (2.0 * 0.25)).abs() < 1e-15);
        assert_eq!(cs.c0, 0.3);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let (d, osc) = setup();
        let opts = CoefficientOptions::default();
        for t in [0.0, 0.1, 1.0] {
            let q = coefficients_quadrature(&d, t, &osc, &opts).unwrap();
            let c = coefficients_ohmic_closed(&d, t, &osc, &opts).unwrap();
            assert!(rel(q.gamma, c.gamma) < 1e-4, "gamma at T={t}");
            assert!(rel(q.d1, c.d1) < 1e-4, "d1 at T={t}");
            assert!(rel(q.omega_shift_sq, c.omega_shift_sq) < 1e-4);
            assert!(rel(q.f1, c.f1) < 1e-4);
            assert_eq!(q.method, Method::Quadrature);
        }
    }

    #[test]
    fn frequency_domain_route_matches_closed_form_tightly() {
        let (d, osc) = setup();
        let opts = CoefficientOptions::default();
        let q = coefficients_frequency_domain(&d, 0.7, &osc, &opts).unwrap();
        let c = coefficients_ohmic_closed(&d, 0.7, &osc, &opts).unwrap();
        assert!(rel(q.gamma, c.gamma) < 1e-13);
        assert!(rel(q.d1, c.d1) < 1e-13);
    }

    #[test]
    fn zero_temperature_shift_closed_form() {
        let d = OhmicDensity::new(1.5, 0.4, 3.0).unwrap();
        let osc = OscillatorSpec::new(1.5, 0.8).unwrap();
        let cs = coefficients_ohmic_closed(&d, 0.0, &osc, &CoefficientOptions::default()).unwrap();
        let expect = -2.0 * 0.4 * 27.0 / (9.0 + 0.64);
        assert!(rel(cs.omega_shift_sq, expect) < 1e-8);
        // the spin-bath f₁ does not depend on temperature
        let hot = coefficients_ohmic_closed(&d, 5.0, &osc, &CoefficientOptions::default()).unwrap();
        assert!(rel(hot.f1, cs.f1) < 1e-12);
    }

    #[test]
    fn high_temperature_kills_damping_not_diffusion() {
        let (d, osc) = setup();
        let opts = CoefficientOptions::default();
        let cold = coefficients_ohmic_closed(&d, 0.0, &osc, &opts).unwrap();
        let hot = coefficients_ohmic_closed(&d, 1e6, &osc, &opts).unwrap();
        assert!(hot.gamma < 1e-6);
        assert_eq!(hot.d1, cold.d1);
    }

    #[test]
    fn qbm_values_and_ratio() {
        let (d, osc) = setup();
        let quad = QuadratureSpec::default();
        let cold = qbm_coefficients(&d, 0.0, &osc, &quad).unwrap();
        assert_eq!(cold.d1, 100.0 / 101.0);
        assert_eq!(cold.d0, 0.0);
        for t in [0.05, 0.5, 2.0] {
            let q = qbm_coefficients(&d, t, &osc, &quad).unwrap();
            assert_eq!(q.gamma, cold.gamma);
            assert!(q.d1 > cold.d1);
            let s = coefficients_ohmic_closed(&d, t, &osc, &CoefficientOptions::default()).unwrap();
            assert!((s.gamma / q.gamma - (0.5 / t).tanh()).abs() < 1e-12);
        }
        // T-independent QBM frequency shift equals the zero-temperature spin value
        let spin0 = coefficients_ohmic_closed(&d, 0.0, &osc, &CoefficientOptions::default()).unwrap();
        assert!(rel(cold.omega_shift_sq, spin0.omega_shift_sq) < 1e-10);
    }

    #[test]
    fn surrogate_density_through_qbm_formulas_reproduces_spin_coefficients() {
        let (d, osc) = setup();
        let t = 0.6;
        let opts = CoefficientOptions {
            d0: D0Policy::Regulated,
            ..Default::default()
        };
        let spin = coefficients_quadrature(&d, t, &osc, &opts).unwrap();
        let sur = surrogate_density(&d, t).unwrap();
        let qbm = qbm_coefficients_quadrature(&sur, t, &osc, &opts).unwrap();
        assert!(rel(qbm.gamma, spin.gamma) < 1e-6);
        assert!(rel(qbm.d1, spin.d1) < 1e-6);
        assert!(rel(qbm.omega_shift_sq, spin.omega_shift_sq) < 1e-6);
        assert!(rel(qbm.f1, spin.f1) < 1e-6);
    }

    #[test]
    fn tight_regulator_tolerance_fails_explicitly() {
        let (d, osc) = setup();
        let opts = CoefficientOptions {
            regulator: Regulator {
                epsilon0: Some(0.5),
                tolerance: 1e-12,
            },
            ..Default::default()
        };
        let err = coefficients_quadrature(&d, 0.3, &osc, &opts).unwrap_err();
        assert!(matches!(err, Error::ExtrapolationFailed { .. }));
    }

    #[test]
    fn discrete_matches_damped_time_integrals() {
        use crate::quadrature::adaptive;
        use crate::spin_bath::{correlation_closed, SpinParams};
        let bath = DiscreteBath::new(vec![
            SpinParams::new(0.3, 0.8, 0.2).unwrap(),
            SpinParams::new(-0.1, 1.3, 0.1).unwrap(),
        ])
        .unwrap();
        let osc = OscillatorSpec::new(1.2, 1.1).unwrap();
        let (t, eps) = (0.4, 0.2);
        let co = coefficients_discrete(&bath, t, &osc, eps).unwrap();
        let corr = |tau: f64| correlation_closed(&bath, t, tau).unwrap();
        let w0 = osc.omega0;
        let end = 40.0 / eps;
        let pts: Vec<f64> = (1..400).map(|k| k as f64 * end / 400.0).collect();
        let quad = QuadratureSpec::default();
        let d = adaptive(&|s: f64| corr(s).re * (w0 * s).cos() * (-eps * s).exp(), 0.0, end, &pts, &quad).unwrap();
        let g = adaptive(&|s: f64| -corr(s).im * (w0 * s).sin() * (-eps * s).exp(), 0.0, end, &pts, &quad).unwrap();
        let f = adaptive(&|s: f64| corr(s).re * (w0 * s).sin() * (-eps * s).exp(), 0.0, end, &pts, &quad).unwrap();
        let shift = adaptive(&|s: f64| -corr(s).im * (w0 * s).cos() * (-eps * s).exp(), 0.0, end, &pts, &quad).unwrap();
        assert!(rel(co.d(), d.value) < 1e-8, "{} {}", co.d(), d.value);
        assert!(rel(co.gamma, g.value / (osc.mass * w0)) < 1e-8);
        assert!(rel(co.f(), -f.value / (osc.mass * w0)) < 1e-8);
        assert!(rel(co.omega_shift_sq, -2.0 / osc.mass * shift.value) < 1e-8);
        assert!(coefficients_discrete(&bath, t, &osc, 0.0).is_err());
    }
}
