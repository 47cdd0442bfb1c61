//! Adaptive Gauss–Kronrod quadrature plus the two special forms the bath
//! coefficients need: Fourier integrals over a half line (cycle summation with
//! Wynn ε acceleration) and Cauchy principal values at a simple pole.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and budgets shared by every quadrature entry point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of subintervals for one adaptive integration.
    pub max_intervals: usize,
    /// Maximum number of half periods summed in a Fourier tail.
    pub max_cycles: usize,
    /// Finite upper limit used when an integral only converges with a cutoff.
    pub omega_max: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_intervals: 4000,
            max_cycles: 2000,
            omega_max: None,
        }
    }
}

impl QuadratureSpec {
    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Integral value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl Estimate {
    fn zero() -> Self {
        Self {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        }
    }

    pub(crate) fn scale(self, factor: f64) -> Estimate {
        Estimate {
            value: self.value * factor,
            error: self.error * factor.abs(),
            evaluations: self.evaluations,
        }
    }

    fn add(self, other: Estimate) -> Estimate {
        Estimate {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel; the error is the distance to the embedded
/// 7-point Gauss rule.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Estimate {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        evaluations: 15,
    }
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Globally adaptive bisection over `[a, b]`, splitting at the interior `points`
/// first.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::zero());
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = points
        .iter()
        .copied()
        .filter(|p| *p > lo && *p < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut edges = vec![lo];
    edges.extend(cuts);
    edges.push(hi);
    let mut total = Estimate::zero();
    for w in edges.windows(2) {
        let est = gauss_kronrod(f, w[0], w[1]);
        total = total.add(est);
        heap.push(Panel {
            a: w[0],
            b: w[1],
            est,
        });
    }

    while total.error > spec.target(total.value) {
        if heap.len() >= spec.max_intervals {
            return Err(Error::QuadratureFailed {
                requested: spec.target(total.value),
                achieved: total.error,
                context: format!("adaptive on [{lo}, {hi}] exhausted {} panels", heap.len()),
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval below floating-point resolution; accept what we have
            heap.push(worst);
            break;
        }
        let left = gauss_kronrod(f, worst.a, mid);
        let right = gauss_kronrod(f, mid, worst.b);
        total.value += left.value + right.value - worst.est.value;
        total.error += left.error + right.error - worst.est.error;
        total.evaluations += 30;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            est: left,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            est: right,
        });
    }
    // re-sum to shed accumulated cancellation in the running totals
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.est.value, e + p.est.error));
    Ok(Estimate {
        value: sign * value,
        error,
        evaluations: total.evaluations,
    })
}

/// `∫_a^∞ f`, with structure expected only below `a + scale`.
///
/// `[a, a + scale]` is integrated directly; the remainder is mapped onto
/// `[0, 1)` through `x = b + t/(1 − t)`.
pub fn semi_infinite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    scale: f64,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let b = a + scale;
    let near = adaptive(f, a, b, points, spec)?;
    let mapped = |t: f64| {
        let s = 1.0 - t;
        let x = b + scale * t / s;
        f(x) * scale / (s * s)
    };
    let far = adaptive(&mapped, 0.0, 1.0, &[], spec)?;
    Ok(near.add(far))
}

/// Trigonometric weight of a Fourier integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Sin,
    Cos,
}

impl Trig {
    fn eval(self, x: f64) -> f64 {
        match self {
            Trig::Sin => x.sin(),
            Trig::Cos => x.cos(),
        }
    }
}

/// Result of a half-line Fourier integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierEstimate {
    pub estimate: Estimate,
    /// Last frequency actually integrated before extrapolation.
    pub omega_max: f64,
    pub cycles: usize,
}

/// `∫_0^∞ f(ω) trig(ωτ) dω` for `f` with a slowly decaying, eventually monotone
/// tail.
///
/// `[0, A]` (with `A ≥ feature_end` a multiple of the half period `π/τ`) is
/// integrated adaptively; the tail is summed half period by half period and the
/// alternating partial sums are extrapolated with Wynn's ε algorithm.
pub fn fourier_half_line<F: Fn(f64) -> f64>(
    f: &F,
    trig: Trig,
    tau: f64,
    feature_end: f64,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<FourierEstimate> {
    if tau <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: format!("Fourier integral needs tau > 0, got {tau}"),
        });
    }
    let half_period = PI / tau;
    let start = (feature_end / half_period).ceil().max(1.0) * half_period;
    let g = |w: f64| f(w) * trig.eval(w * tau);
    // panel breakpoints at half periods keep the oscillation resolved
    let n_half = (start / half_period).round() as usize;
    let mut cuts: Vec<f64> = points.to_vec();
    if n_half <= 4 * spec.max_intervals / 10 {
        cuts.extend((1..n_half).map(|k| k as f64 * half_period));
    }
    let head = adaptive(&g, 0.0, start, &cuts, spec)?;

    let mut partial = Vec::with_capacity(64);
    let mut sum = head.value;
    let mut err = head.error;
    let mut evals = head.evaluations;
    let mut extrapolated = Vec::new();
    let mut lo = start;
    let cycle_spec = QuadratureSpec {
        abs_tol: spec.abs_tol * 1e-2,
        ..*spec
    };
    for cycle in 0..spec.max_cycles {
        let hi = lo + half_period;
        let piece = adaptive(&g, lo, hi, &[], &cycle_spec)?;
        sum += piece.value;
        err += piece.error;
        evals += piece.evaluations;
        lo = hi;
        partial.push(sum);
        if partial.len() >= 3 {
            let window = &partial[partial.len().saturating_sub(40)..];
            extrapolated.push(wynn_epsilon(window));
        }
        let n = extrapolated.len();
        if n >= 4 {
            let last = extrapolated[n - 1];
            let spread = (last - extrapolated[n - 2])
                .abs()
                .max((last - extrapolated[n - 3]).abs());
            if spread + err <= spec.target(last) && cycle >= 6 {
                return Ok(FourierEstimate {
                    estimate: Estimate {
                        value: last,
                        error: spread + err,
                        evaluations: evals,
                    },
                    omega_max: lo,
                    cycles: cycle + 1,
                });
            }
        }
    }
    let n = extrapolated.len();
    let achieved = if n >= 2 {
        (extrapolated[n - 1] - extrapolated[n - 2]).abs()
    } else {
        f64::INFINITY
    };
    Err(Error::QuadratureFailed {
        requested: spec.target(sum),
        achieved,
        context: format!(
            "Fourier tail at tau = {tau} not converged after {} half periods (omega_max = {lo})",
            spec.max_cycles
        ),
    })
}

/// Wynn's ε algorithm: the highest even-column entry built from `sums`.
pub fn wynn_epsilon(sums: &[f64]) -> f64 {
    let n = sums.len();
    if n == 0 {
        return f64::NAN;
    }
    let mut prev = vec![0.0; n];
    let mut cur = sums.to_vec();
    let mut best = sums[n - 1];
    for k in 1..n {
        let mut next = Vec::with_capacity(n - k);
        for j in 0..n - k {
            let diff = cur[j + 1] - cur[j];
            if diff == 0.0 || !diff.is_finite() {
                return if k % 2 == 1 { cur[j + 1] } else { best };
            }
            next.push(prev[j + 1] + 1.0 / diff);
        }
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            best = *cur.last().expect("non-empty column");
        }
    }
    best
}

/// `PV ∫_0^∞ h(ω)/(ω − pole) dω` for smooth `h` and `pole > 0`.
///
/// The symmetric window `[pole − δ, pole + δ]` is integrated as
/// `∫_0^δ [h(pole + u) − h(pole − u)]/u du`, which has no singularity. The
/// computation is repeated with `δ/2`; both answers are exact in theory, so
/// their difference joins the error estimate.
pub fn principal_value<H: Fn(f64) -> f64>(
    h: &H,
    pole: f64,
    scale: f64,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if !(pole > 0.0) {
        return Err(Error::InvalidParameter {
            name: "pole",
            reason: format!("principal value needs a positive pole, got {pole}"),
        });
    }
    let delta = 0.5 * pole.min(scale);
    let first = pv_with_window(h, pole, delta, scale, points, spec)?;
    let second = pv_with_window(h, pole, 0.5 * delta, scale, points, spec)?;
    Ok(Estimate {
        value: second.value,
        error: second.error.max((first.value - second.value).abs()),
        evaluations: first.evaluations + second.evaluations,
    })
}

fn pv_with_window<H: Fn(f64) -> f64>(
    h: &H,
    pole: f64,
    delta: f64,
    scale: f64,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let g = |w: f64| h(w) / (w - pole);
    let odd = |u: f64| (h(pole + u) - h(pole - u)) / u;
    let below = adaptive(&g, 0.0, pole - delta, points, spec)?;
    let window = adaptive(&odd, 0.0, delta, &[], spec)?;
    let above = semi_infinite(&g, pole + delta, scale.max(pole), points, spec)?;
    Ok(below.add(window).add(above))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn kronrod_panel_is_exact_for_low_degree_polynomials() {
        for k in 0..=22 {
            let est = gauss_kronrod(&|x: f64| x.powi(k), 0.0, 1.0);
            let exact = 1.0 / (k as f64 + 1.0);
            assert!((est.value - exact).abs() < 1e-14, "degree {k}");
        }
        // the embedded Gauss rule is exact through degree 13
        let est = gauss_kronrod(&|x: f64| x.powi(13), -1.0, 1.0);
        assert!(est.error < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let est = adaptive(&|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &[], &spec()).unwrap();
        assert!((est.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn adaptive_reversed_limits_change_sign() {
        let f = |x: f64| x.exp();
        let fwd = adaptive(&f, 0.0, 1.0, &[], &spec()).unwrap().value;
        let back = adaptive(&f, 1.0, 0.0, &[], &spec()).unwrap().value;
        assert!((fwd + back).abs() < 1e-14);
        assert!((fwd - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_reports_budget_exhaustion() {
        let tight = QuadratureSpec {
            abs_tol: 0.0,
            rel_tol: 0.0,
            max_intervals: 8,
            ..spec()
        };
        let err = adaptive(&|x: f64| (1.0 / x).sin(), 1e-3, 1.0, &[], &tight).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailed { .. }));
    }

    #[test]
    fn semi_infinite_lorentzian() {
        let est = semi_infinite(&|x: f64| 1.0 / (1.0 + x * x), 0.0, 1.0, &[], &spec()).unwrap();
        assert!((est.value - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn wynn_accelerates_alternating_harmonic_series() {
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        assert!((wynn_epsilon(&sums) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_integral() {
        // ∫ sin(ωτ)/ω dω = π/2 for every τ > 0
        for tau in [0.3, 1.0, 7.0] {
            let est = fourier_half_line(&|w: f64| 1.0 / w, Trig::Sin, tau, 1.0, &[], &spec())
                .unwrap();
            assert!((est.estimate.value - PI / 2.0).abs() < 1e-8, "tau {tau}");
        }
    }

    #[test]
    fn cosine_transform_of_lorentzian() {
        // ∫ cos(ωτ)/(1 + ω²) dω = (π/2) e^{−τ}
        for tau in [0.1, 1.0, 4.0] {
            let est = fourier_half_line(
                &|w: f64| 1.0 / (1.0 + w * w),
                Trig::Cos,
                tau,
                5.0,
                &[],
                &spec(),
            )
            .unwrap();
            assert!(
                (est.estimate.value - PI / 2.0 * (-tau).exp()).abs() < 1e-8,
                "tau {tau}"
            );
        }
    }

    #[test]
    fn fourier_rejects_nonpositive_tau() {
        assert!(fourier_half_line(&|w: f64| w, Trig::Cos, 0.0, 1.0, &[], &spec()).is_err());
    }

    #[test]
    fn principal_value_against_closed_form() {
        // PV ∫_0^∞ 1/((1 + ω²)(ω − p)) dω = −(π p/2 + ln p)/(1 + p²)
        for p in [0.3, 1.0, 2.5] {
            let est =
                principal_value(&|w: f64| 1.0 / (1.0 + w * w), p, 1.0, &[], &spec()).unwrap();
            let exact = -(PI * p / 2.0 + p.ln()) / (1.0 + p * p);
            assert!((est.value - exact).abs() < 1e-9, "pole {p}: {}", est.value);
        }
    }
}
