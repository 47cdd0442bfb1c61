use serde::{Deserialize, Serialize};

use super::Generator;
use crate::error::{invalid, Error, Result};
use crate::operators::{
    c, dimensionless_momentum, dimensionless_position, hermiticity_defect, max_abs_diff,
    min_eigenvalue, number, purity, trace, trace_of_product, ComplexMatrix, DensityMatrix, FockSpace,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateOptions {
    pub t_end: f64,
    pub dt: f64,
    /// Steps between recorded samples.
    pub sample_every: usize,
    /// Largest accepted step-doubling estimate of the local error.
    pub local_tol: f64,
    pub store_states: bool,
}

impl IntegrateOptions {
    pub fn new(t_end: f64, dt: f64, sample_every: usize) -> Self {
        Self {
            t_end,
            dt,
            sample_every,
            local_tol: 1e-6,
            store_states: false,
        }
    }
}

/// Largest tolerated `|Tr ρ − 1|` before the run is aborted.
pub const TRACE_GATE: f64 = 1e-6;

/// Observables at one sample time. Oscillator quantities use `x̂ = a + a†`,
/// `p̂ = −i(a − a†)` on the reduced oscillator state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub n: f64,
    pub x: f64,
    pub p: f64,
    pub var_x: f64,
    pub purity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub hermiticity: f64,
    /// Step-doubling estimate taken at this sample, when one fitted.
    pub local_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dims: Vec<usize>,
    /// Step actually used: `t_end` divided by a whole number of steps.
    pub dt: f64,
    pub samples: Vec<Sample>,
    pub states: Option<Vec<ComplexMatrix>>,
    pub max_local_error: f64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn occupations(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.n).collect()
    }

    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }
}

struct Observer {
    space: FockSpace,
    n: ComplexMatrix,
    x: ComplexMatrix,
    p: ComplexMatrix,
    x2: ComplexMatrix,
    tail: usize,
}

impl Observer {
    fn new(dims: &[usize]) -> Result<Self> {
        let space = FockSpace::new(dims[0])?;
        let x = dimensionless_position(space);
        let tail: usize = dims[1..].iter().product();
        Ok(Self {
            space,
            n: number(space),
            x2: &x * &x,
            x,
            p: dimensionless_momentum(space),
            tail,
        })
    }

    fn reduced(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        if self.tail == 1 {
            return rho.clone();
        }
        let k = self.tail;
        ComplexMatrix::from_fn(self.space.cutoff(), self.space.cutoff(), |i, j| {
            (0..k).map(|s| rho[(i * k + s, j * k + s)]).sum()
        })
    }

    fn sample(&self, t: f64, rho: &ComplexMatrix, local_error: Option<f64>) -> Sample {
        let red = self.reduced(rho);
        let x = trace_of_product(&self.x, &red).re;
        Sample {
            t,
            n: trace_of_product(&self.n, &red).re,
            x,
            p: trace_of_product(&self.p, &red).re,
            var_x: trace_of_product(&self.x2, &red).re - x * x,
            purity: purity(rho),
            trace: trace(rho).re,
            min_eigenvalue: min_eigenvalue(rho),
            hermiticity: hermiticity_defect(rho),
            local_error,
        }
    }
}

struct Stepper<'a> {
    gen: &'a dyn Generator,
    k: [ComplexMatrix; 4],
    tmp: ComplexMatrix,
}

impl<'a> Stepper<'a> {
    fn new(gen: &'a dyn Generator) -> Self {
        let d = gen.dim();
        let z = ComplexMatrix::zeros(d, d);
        Self {
            gen,
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z,
        }
    }

    /// One classical RK4 step followed by `ρ ← (ρ + ρ†)/2`.
    fn step(&mut self, rho: &mut ComplexMatrix, h: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        self.gen.apply_into(rho, k1);
        self.tmp.copy_from(rho);
        axpy(&mut self.tmp, c(0.5 * h), k1);
        self.gen.apply_into(&self.tmp, k2);
        self.tmp.copy_from(rho);
        axpy(&mut self.tmp, c(0.5 * h), k2);
        self.gen.apply_into(&self.tmp, k3);
        self.tmp.copy_from(rho);
        axpy(&mut self.tmp, c(h), k3);
        self.gen.apply_into(&self.tmp, k4);
        axpy(rho, c(h / 6.0), k1);
        axpy(rho, c(h / 3.0), k2);
        axpy(rho, c(h / 3.0), k3);
        axpy(rho, c(h / 6.0), k4);
        symmetrize(rho);
    }
}

/// `y += a·x`.
fn axpy(y: &mut ComplexMatrix, a: num_complex::Complex64, x: &ComplexMatrix) {
    for (y, x) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *y += a * x;
    }
}

fn symmetrize(rho: &mut ComplexMatrix) {
    let d = rho.nrows();
    for j in 0..d {
        rho[(j, j)].im = 0.0;
        for i in 0..j {
            let avg = 0.5 * (rho[(i, j)] + rho[(j, i)].conj());
            rho[(i, j)] = avg;
            rho[(j, i)] = avg.conj();
        }
    }
}

fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(invalid("t_end", format!("must be positive, got {t_end}")));
    }
    if !(dt > 0.0 && dt <= t_end) {
        return Err(invalid("dt", format!("must lie in (0, t_end], got {dt}")));
    }
    Ok(((t_end / dt) - 1e-9).ceil().max(1.0) as usize)
}

/// Fixed-step RK4 from `rho0` to `opts.t_end`.
///
/// At each sample a single `2dt` step is compared with the two regular steps
/// that follow; `|Δ|/15` estimates their local error. The run fails at the
/// first sample whose trace drifts beyond [`TRACE_GATE`] or whose local error
/// exceeds `opts.local_tol`.
pub fn integrate(gen: &dyn Generator, rho0: &DensityMatrix, opts: &IntegrateOptions) -> Result<Trajectory> {
    let mut states = opts.store_states.then(Vec::new);
    let mut traj = integrate_with(gen, rho0, opts, &mut |_, rho| {
        if let Some(st) = states.as_mut() {
            st.push(rho.clone());
        }
        Ok(())
    })?;
    traj.states = states;
    Ok(traj)
}

/// As [`integrate`], handing every recorded sample and its full state to
/// `on_sample` instead of storing states. An error from the callback aborts
/// the run.
pub fn integrate_with(
    gen: &dyn Generator,
    rho0: &DensityMatrix,
    opts: &IntegrateOptions,
    on_sample: &mut dyn FnMut(&Sample, &ComplexMatrix) -> Result<()>,
) -> Result<Trajectory> {
    if rho0.dims() != gen.dims().as_slice() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            found: rho0.dim(),
        });
    }
    if opts.sample_every == 0 {
        return Err(invalid("sample_every", "must be at least 1"));
    }
    let steps = step_count(opts.t_end, opts.dt)?;
    let h = opts.t_end / steps as f64;
    let observer = Observer::new(rho0.dims())?;
    let mut stepper = Stepper::new(gen);
    let mut rho = rho0.matrix().clone();
    let first = observer.sample(0.0, &rho, None);
    on_sample(&first, &rho)?;
    let mut samples = vec![first];
    let mut max_local: f64 = 0.0;
    let mut pending: Option<(ComplexMatrix, usize)> = None;
    let mut local_at_sample: Option<f64> = None;

    for step in 0..steps {
        if step % opts.sample_every == 0 && step + 2 <= steps {
            let mut big = rho.clone();
            stepper.step(&mut big, 2.0 * h);
            pending = Some((big, step + 2));
        }
        stepper.step(&mut rho, h);
        let done = step + 1;
        if let Some((big, at)) = &pending {
            if *at == done {
                let err = max_abs_diff(&rho, big) / 15.0;
                max_local = max_local.max(err);
                local_at_sample = Some(err);
                if err > opts.local_tol {
                    return Err(Error::IntegrationFailed {
                        time: done as f64 * h,
                        reason: format!("step-doubling error {err:e} above {:e}", opts.local_tol),
                    });
                }
                pending = None;
            }
        }
        if done % opts.sample_every == 0 || done == steps {
            let t = done as f64 * h;
            let s = observer.sample(t, &rho, local_at_sample.take());
            if (s.trace - 1.0).abs() > TRACE_GATE || !s.trace.is_finite() {
                return Err(Error::IntegrationFailed {
                    time: t,
                    reason: format!("trace drifted to {}", s.trace),
                });
            }
            on_sample(&s, &rho)?;
            samples.push(s);
        }
    }
    Ok(Trajectory {
        dims: rho0.dims().to_vec(),
        dt: h,
        samples,
        states: None,
        max_local_error: max_local,
    })
}

/// Endpoint differences under step halving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub dt: f64,
    /// `max |ρ_dt − ρ_{dt/2}|` at `t_end`.
    pub coarse_difference: f64,
    /// `max |ρ_{dt/2} − ρ_{dt/4}|` at `t_end`.
    pub fine_difference: f64,
    /// Ratio of the two; 16 for a fourth-order method.
    pub factor: f64,
}

pub fn convergence_study(gen: &dyn Generator, rho0: &DensityMatrix, t_end: f64, dt: f64) -> Result<ConvergenceStudy> {
    let endpoint = |h: f64| -> Result<ComplexMatrix> {
        let steps = step_count(t_end, h)?;
        let h = t_end / steps as f64;
        let mut stepper = Stepper::new(gen);
        let mut rho = rho0.matrix().clone();
        for _ in 0..steps {
            stepper.step(&mut rho, h);
        }
        Ok(rho)
    };
    let (a, b, q) = (endpoint(dt)?, endpoint(0.5 * dt)?, endpoint(0.25 * dt)?);
    let coarse = max_abs_diff(&a, &b);
    let fine = max_abs_diff(&b, &q);
    Ok(ConvergenceStudy {
        dt,
        coarse_difference: coarse,
        fine_difference: fine,
        factor: coarse / fine,
    })
}

/// Least-squares line through `⟨N⟩(t)` on a time window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation from the line.
    pub residual: f64,
    pub samples: usize,
}

pub fn heating_rate_estimate(traj: &Trajectory, window: (f64, f64)) -> Result<HeatingFit> {
    let (t0, t1) = window;
    let first = traj.samples.first().map_or(0.0, |s| s.t);
    let last = traj.samples.last().map_or(0.0, |s| s.t);
    let slack = 1e-9 * last.abs().max(1.0);
    if !(t0 < t1) || t0 < first - slack || t1 > last + slack {
        return Err(invalid(
            "window",
            format!("({t0}, {t1}) is not inside the trajectory span ({first}, {last})"),
        ));
    }
    let pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|s| s.t >= t0 - slack && s.t <= t1 + slack)
        .map(|s| (s.t, s.n))
        .collect();
    if pts.len() < 4 {
        return Err(invalid(
            "window",
            format!("needs at least 4 samples, found {}", pts.len()),
        ));
    }
    let (slope, intercept, residual) = line_fit(&pts);
    Ok(HeatingFit {
        slope,
        intercept,
        residual,
        samples: pts.len(),
    })
}

/// Least-squares `(slope, intercept, rms residual)` through `(t, y)` points.
pub(crate) fn line_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    (slope, intercept, residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{adiabatic_generator, bm_generator, joint_generator, OscillatorSpec, TlsJointSpec};
    use crate::operators::{coherent_state, fock_state, plus_minus_populations, thermal_tls_state};
    use crate::spin_bath::CoefficientSet;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn line_trajectory(slope: f64, times: &[f64]) -> Trajectory {
        let samples = times
            .iter()
            .map(|&t| Sample {
                t,
                n: slope * t,
                x: 0.0,
                p: 0.0,
                var_x: 1.0,
                purity: 1.0,
                trace: 1.0,
                min_eigenvalue: 0.0,
                hermiticity: 0.0,
                local_error: None,
            })
            .collect();
        Trajectory {
            dims: vec![2],
            dt: 0.1,
            samples,
            states: None,
            max_local_error: 0.0,
        }
    }

    #[test]
    fn fit_of_exact_line() {
        let times: Vec<f64> = (0..11).map(|k| k as f64 * 0.5).collect();
        let fit = heating_rate_estimate(&line_trajectory(0.4, &times), (0.0, 5.0)).unwrap();
        assert!((fit.slope - 0.4).abs() < 1e-14);
        assert!(fit.residual < 1e-14);
        assert!(heating_rate_estimate(&line_trajectory(0.4, &times), (0.0, 1.0)).is_err());
        assert!(heating_rate_estimate(&line_trajectory(0.4, &times), (0.0, 9.0)).is_err());
    }

    #[test]
    fn free_oscillation_returns_after_one_period() {
        let space = FockSpace::new(30).unwrap();
        let osc = OscillatorSpec::new(1.0, 1.0).unwrap();
        let gen = bm_generator(space, &osc, &CoefficientSet::zero()).unwrap();
        let rho0 = coherent_state(space, Complex64::new(1.0, 0.5)).unwrap();
        let traj = integrate(&gen, &rho0, &IntegrateOptions::new(2.0 * PI, 2.0 * PI / 2000.0, 100)).unwrap();
        let (s0, s1) = (traj.samples[0], traj.final_sample());
        assert!((s0.x - s1.x).abs() < 1e-6);
        assert!((s0.n - s1.n).abs() < 1e-9);
        assert!((s1.purity - 1.0).abs() < 1e-9);
    }

    #[test]
    fn adiabatic_vacuum_heats_linearly() {
        let space = FockSpace::new(60).unwrap();
        let gen = adiabatic_generator(space, 1.0, 0.2).unwrap();
        let rho0 = fock_state(space, 0).unwrap();
        let traj = integrate(&gen, &rho0, &IntegrateOptions::new(5.0, 0.01, 10)).unwrap();
        assert!((traj.final_sample().n - 2.0).abs() < 1e-6);
        let fit = heating_rate_estimate(&traj, (1.0, 5.0)).unwrap();
        assert!((fit.slope - 0.4).abs() < 1e-6);
        for s in &traj.samples {
            assert!((s.trace - 1.0).abs() < 1e-10);
            assert!(s.hermiticity < 1e-12);
        }
    }

    #[test]
    fn uncoupled_tls_relaxes_to_detailed_balance() {
        let space = FockSpace::new(2).unwrap();
        let spec = TlsJointSpec::from_nbar(1.0, 1.0, 0.0, 10.0, 0.5).unwrap();
        let gen = joint_generator(space, &spec).unwrap();
        let rho0 = fock_state(space, 0).unwrap().tensor(&thermal_tls_state(1.0, 5.0).unwrap());
        let mut opts = IntegrateOptions::new(6.0, 0.005, 100);
        opts.store_states = true;
        let traj = integrate(&gen, &rho0, &opts).unwrap();
        let last = DensityMatrix::new(vec![2, 2], traj.states.clone().unwrap().pop().unwrap()).unwrap();
        let tls = crate::operators::partial_trace(&last, 1).unwrap();
        let (pp, pm) = plus_minus_populations(tls.matrix());
        assert!((pp / pm - spec.detailed_balance_ratio()).abs() < 1e-8);
        assert!(traj.final_sample().n.abs() < 1e-12);
    }

    #[test]
    fn too_large_step_trips_a_gate() {
        let space = FockSpace::new(20).unwrap();
        let spec = TlsJointSpec::from_nbar(1.0, 1.0, 1.0, 100.0, 1.0).unwrap();
        let gen = joint_generator(space, &spec).unwrap();
        let rho0 = fock_state(space, 0).unwrap().tensor(&thermal_tls_state(1.0, 0.5).unwrap());
        let err = integrate(&gen, &rho0, &IntegrateOptions::new(1.0, 0.05, 2)).unwrap_err();
        assert!(matches!(err, Error::IntegrationFailed { .. }));
    }

    #[test]
    fn fourth_order_convergence() {
        let space = FockSpace::new(12).unwrap();
        let spec = TlsJointSpec::from_nbar(1.0, 1.0, 1.0, 10.0, 0.5).unwrap();
        let gen = joint_generator(space, &spec).unwrap();
        let rho0 = fock_state(space, 0).unwrap().tensor(&thermal_tls_state(1.0, 0.5).unwrap());
        let study = convergence_study(&gen, &rho0, 1.0, 0.04).unwrap();
        assert!(study.factor > 12.0 && study.factor < 20.0, "factor {}", study.factor);
    }

    #[test]
    fn rejects_bad_options() {
        let space = FockSpace::new(4).unwrap();
        let gen = adiabatic_generator(space, 1.0, 0.1).unwrap();
        let rho0 = fock_state(space, 0).unwrap();
        assert!(integrate(&gen, &rho0, &IntegrateOptions::new(1.0, 0.0, 1)).is_err());
        assert!(integrate(&gen, &rho0, &IntegrateOptions::new(1.0, 0.1, 0)).is_err());
        let joint = rho0.tensor(&thermal_tls_state(1.0, 0.0).unwrap());
        assert!(integrate(&gen, &joint, &IntegrateOptions::new(1.0, 0.1, 1)).is_err());
    }
}
