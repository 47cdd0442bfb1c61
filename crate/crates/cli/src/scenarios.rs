//! One runner per mode, each returning result tables.

use num_complex::Complex64;
use oscspin_core::dynamics::{
    adiabatic_generator, bm_generator, heating_rate_estimate, integrate, integrate_with,
    joint_generator, slaving_residual_matrix, Generator, IntegrateOptions, OscillatorSpec,
    Sample, TlsJointSpec, Trajectory,
};
use oscspin_core::operators::{
    coherent_state, fock_state, plus_minus_populations, thermal_fock_state, thermal_tls_state,
    ComplexMatrix, DensityMatrix, FockSpace,
};
use oscspin_core::spin_bath::{
    coefficients_discrete, coefficients_frequency_domain, coefficients_ohmic_closed,
    coefficients_quadrature, qbm_coefficients, CoefficientOptions, CoefficientSet, D0Policy,
    DiscreteBath, OhmicDensity, Regulator,
};
use rayon::prelude::*;

use crate::config::{default_joint_dt, BathKind, InitialState, Route, ScenarioConfig};
use crate::output::{label, ResultTable};
use crate::CliError;

pub const COEFFICIENT_COLUMNS: [&str; 11] = [
    "temperature",
    "omega_shift_sq",
    "gamma",
    "d0",
    "d1",
    "d",
    "f0",
    "f1",
    "f",
    "c0",
    "error",
];

pub const TRAJECTORY_COLUMNS: [&str; 9] = [
    "t",
    "n",
    "x",
    "p",
    "var_x",
    "purity",
    "trace",
    "min_eigenvalue",
    "hermiticity",
];

pub fn oscillator(cfg: &ScenarioConfig) -> Result<OscillatorSpec, CliError> {
    Ok(OscillatorSpec::new(cfg.oscillator.mass, cfg.oscillator.omega0)?)
}

pub fn ohmic_density(cfg: &ScenarioConfig) -> Result<OhmicDensity, CliError> {
    Ok(OhmicDensity::new(cfg.bath.mass, cfg.bath.gamma0, cfg.bath.cutoff_freq)?)
}

fn coefficient_options(cfg: &ScenarioConfig) -> CoefficientOptions {
    let c = &cfg.coefficients;
    CoefficientOptions {
        d0: c.d0,
        c0: c.c0,
        regulator: Regulator {
            epsilon0: c.epsilon0,
            tolerance: c.tolerance,
        },
        ..Default::default()
    }
}

/// Coefficients of the configured bath at `temperature`.
pub fn coefficient_set(cfg: &ScenarioConfig, temperature: f64) -> Result<CoefficientSet, CliError> {
    let osc = oscillator(cfg)?;
    let opts = coefficient_options(cfg);
    let set = match cfg.bath.kind {
        BathKind::Ohmic => {
            let d = ohmic_density(cfg)?;
            match cfg.coefficients.route {
                Route::ClosedForm => coefficients_ohmic_closed(&d, temperature, &osc, &opts)?,
                Route::Quadrature => coefficients_quadrature(&d, temperature, &osc, &opts)?,
                Route::FrequencyDomain => coefficients_frequency_domain(&d, temperature, &osc, &opts)?,
            }
        }
        BathKind::Discrete => {
            let bath = DiscreteBath::new(cfg.bath.spins.clone())?;
            let mut set = coefficients_discrete(&bath, temperature, &osc, cfg.coefficients.line_width)?;
            if let D0Policy::Value(v) = cfg.coefficients.d0 {
                set.d0 = v;
            }
            set
        }
    };
    Ok(set)
}

fn coefficient_row(t: f64, c: &CoefficientSet) -> Vec<f64> {
    vec![
        t,
        c.omega_shift_sq,
        c.gamma,
        c.d0,
        c.d1,
        c.d(),
        c.f0,
        c.f1,
        c.f(),
        c.c0,
        c.error,
    ]
}

pub fn run_coefficients(cfg: &ScenarioConfig) -> Result<Vec<ResultTable>, CliError> {
    let t = cfg.coefficients.temperature;
    let set = coefficient_set(cfg, t)?;
    let mut table = ResultTable::new("coefficients", &COEFFICIENT_COLUMNS);
    table.push(coefficient_row(t, &set));
    Ok(vec![table])
}

pub fn run_sweep_temperature(cfg: &ScenarioConfig) -> Result<Vec<ResultTable>, CliError> {
    let temps = cfg.sweep.temperatures(cfg.oscillator.omega0);
    let rows = temps
        .par_iter()
        .map(|&t| coefficient_set(cfg, t).map(|c| coefficient_row(t, &c)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = ResultTable::new("sweep_temperature", &COEFFICIENT_COLUMNS);
    for r in rows {
        table.push(r);
    }
    Ok(vec![table])
}

/// `γ` and `D` of the spin bath and the oscillator bath over the grid,
/// normalized by their zero-temperature values.
pub fn run_fig2(cfg: &ScenarioConfig) -> Result<ResultTable, CliError> {
    let osc = oscillator(cfg)?;
    let d = ohmic_density(cfg)?;
    let opts = coefficient_options(cfg);
    let quad = opts.quad;
    let gamma_zero = coefficients_ohmic_closed(&d, 0.0, &osc, &opts)?.gamma;
    let d_qbm_zero = qbm_coefficients(&d, 0.0, &osc, &quad)?.d();
    let temps = cfg.sweep.temperatures(osc.omega0);
    let rows = temps
        .par_iter()
        .map(|&t| -> Result<Vec<f64>, CliError> {
            let spin = coefficients_ohmic_closed(&d, t, &osc, &opts)?;
            let qbm = qbm_coefficients(&d, t, &osc, &quad)?;
            Ok(vec![
                t,
                spin.gamma / gamma_zero,
                qbm.gamma / gamma_zero,
                spin.d() / d_qbm_zero,
                qbm.d() / d_qbm_zero,
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = ResultTable::new(
        "fig2",
        &["T", "gamma_spin_ratio", "gamma_qbm_ratio", "d_spin_ratio", "d_qbm_ratio"],
    );
    table.note("gamma_zero_temperature", gamma_zero);
    table.note("d_qbm_zero_temperature", d_qbm_zero);
    table.note("d0", coefficient_set(cfg, 0.0)?.d0);
    for r in rows {
        table.push(r);
    }
    Ok(table)
}

pub fn initial_oscillator(initial: InitialState, space: FockSpace) -> Result<DensityMatrix, CliError> {
    Ok(match initial {
        InitialState::Vacuum => fock_state(space, 0)?,
        InitialState::Fock { n } => fock_state(space, n)?,
        InitialState::Coherent { re, im } => coherent_state(space, Complex64::new(re, im))?,
        InitialState::Thermal { nbar } => thermal_fock_state(space, nbar)?,
    })
}

fn sample_every(interval: f64, dt: f64) -> usize {
    ((interval / dt).round() as usize).max(1)
}

fn trajectory_row(s: &Sample) -> Vec<f64> {
    vec![
        s.t,
        s.n,
        s.x,
        s.p,
        s.var_x,
        s.purity,
        s.trace,
        s.min_eigenvalue,
        s.hermiticity,
    ]
}

fn trajectory_table(name: &str, traj: &Trajectory, cutoff: usize) -> ResultTable {
    let mut table = ResultTable::new(name, &TRAJECTORY_COLUMNS);
    for s in &traj.samples {
        table.push(trajectory_row(s));
    }
    table.note("cutoff", cutoff);
    table.note("dt", traj.dt);
    table.note("max_local_error", traj.max_local_error);
    table
}

fn evolution_options(cfg: &ScenarioConfig) -> (usize, IntegrateOptions) {
    let ev = &cfg.evolution;
    let dt = ev.dt.expect("resolved configuration");
    let mut opts = IntegrateOptions::new(ev.t_end, dt, sample_every(ev.sample_interval, dt));
    opts.local_tol = ev.local_tol;
    (ev.cutoff.expect("resolved configuration"), opts)
}

pub fn run_evolve_bm(cfg: &ScenarioConfig) -> Result<Vec<ResultTable>, CliError> {
    let (cutoff, opts) = evolution_options(cfg);
    let space = FockSpace::new(cutoff)?;
    let coeffs = coefficient_set(cfg, cfg.coefficients.temperature)?;
    let w2 = cfg.oscillator.omega0.powi(2) + coeffs.omega_shift_sq;
    if !(w2 > 0.0) {
        return Err(CliError::Config(format!(
            "renormalized frequency squared Ω₀² + δΩ² = {w2:.4} is not positive; \
             the bath inverts the oscillator (weaken `bath.gamma0` or lower `bath.cutoff_freq`)"
        )));
    }
    let gen = bm_generator(space, &oscillator(cfg)?, &coeffs)?;
    let rho0 = initial_oscillator(cfg.evolution.initial, space)?;
    let traj = integrate(&gen, &rho0, &opts)?;
    let mut table = trajectory_table("evolve_bm", &traj, cutoff);
    table.note("omega_shift_sq", coeffs.omega_shift_sq);
    table.note("gamma", coeffs.gamma);
    table.note("d", coeffs.d());
    table.note("f", coeffs.f());
    Ok(vec![table])
}

pub fn tls_spec(cfg: &ScenarioConfig, gamma_tls: f64, nbar: Option<f64>) -> Result<TlsJointSpec, CliError> {
    let t = &cfg.tls;
    let w0 = cfg.oscillator.omega0;
    let spec = match (nbar.or(t.nbar), t.temperature) {
        (Some(n), _) => TlsJointSpec::from_nbar(w0, t.delta, t.g, gamma_tls, n)?,
        (None, Some(temp)) => TlsJointSpec::from_temperature(w0, t.delta, t.g, gamma_tls, temp)?,
        (None, None) => return Err(CliError::Config("`tls.nbar` or `tls.temperature` is required".into())),
    };
    Ok(spec.with_hamiltonian_factor(t.hamiltonian_factor)?)
}

/// Oscillator state ⊗ thermal TLS state at the run temperature.
pub fn joint_initial(osc: &DensityMatrix, spec: &TlsJointSpec) -> Result<DensityMatrix, CliError> {
    Ok(osc.tensor(&thermal_tls_state(spec.delta, spec.temperature)?))
}

/// Trace over the oscillator of an oscillator ⊗ TLS matrix.
fn reduced_tls(rho: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(2, 2);
    for n in 0..rho.nrows() / 2 {
        for a in 0..2 {
            for b in 0..2 {
                out[(a, b)] += rho[(2 * n + a, 2 * n + b)];
            }
        }
    }
    out
}

struct JointRun {
    traj: Trajectory,
    slaving: Vec<f64>,
    populations: Vec<(f64, f64)>,
}

fn run_joint(gen: &dyn Generator, rho0: &DensityMatrix, opts: &IntegrateOptions, space: FockSpace, spec: &TlsJointSpec) -> Result<JointRun, CliError> {
    let mut slaving = Vec::new();
    let mut populations = Vec::new();
    let traj = integrate_with(gen, rho0, opts, &mut |_, rho| {
        slaving.push(slaving_residual_matrix(rho, space, spec)?);
        populations.push(plus_minus_populations(&reduced_tls(rho)));
        Ok(())
    })?;
    Ok(JointRun {
        traj,
        slaving,
        populations,
    })
}

pub fn run_evolve_joint(cfg: &ScenarioConfig) -> Result<Vec<ResultTable>, CliError> {
    let (cutoff, opts) = evolution_options(cfg);
    let space = FockSpace::new(cutoff)?;
    let spec = tls_spec(cfg, cfg.tls.gamma_tls, None)?;
    let gen = joint_generator(space, &spec)?;
    let rho0 = joint_initial(&initial_oscillator(cfg.evolution.initial, space)?, &spec)?;
    let run = run_joint(&gen, &rho0, &opts, space, &spec)?;
    let mut columns: Vec<&str> = TRAJECTORY_COLUMNS.to_vec();
    columns.extend(["slaving_residual", "p_plus", "p_minus"]);
    let mut table = ResultTable::new("evolve_joint", &columns);
    for ((s, r), (pp, pm)) in run.traj.samples.iter().zip(&run.slaving).zip(&run.populations) {
        let mut row = trajectory_row(s);
        row.extend([*r, *pp, *pm]);
        table.push(row);
    }
    table.note("cutoff", cutoff);
    table.note("dt", run.traj.dt);
    table.note("max_local_error", run.traj.max_local_error);
    note_tls(&mut table, &spec);
    Ok(vec![table])
}

fn note_tls(table: &mut ResultTable, spec: &TlsJointSpec) {
    table.note("nbar", spec.nbar);
    table.note("tls_temperature", spec.temperature);
    table.note("Gamma", spec.big_gamma);
    table.note("detailed_balance_ratio", spec.detailed_balance_ratio());
    table.note("boltzmann_ratio", spec.boltzmann_ratio());
    table.note("hamiltonian_factor", spec.hamiltonian_factor);
}

pub fn run_evolve_adiabatic(cfg: &ScenarioConfig) -> Result<Vec<ResultTable>, CliError> {
    let (cutoff, opts) = evolution_options(cfg);
    let space = FockSpace::new(cutoff)?;
    let spec = tls_spec(cfg, cfg.tls.gamma_tls, None)?;
    let gen = adiabatic_generator(space, cfg.oscillator.omega0, spec.big_gamma)?;
    let rho0 = initial_oscillator(cfg.evolution.initial, space)?;
    let traj = integrate(&gen, &rho0, &opts)?;
    let mut table = trajectory_table("evolve_adiabatic", &traj, cutoff);
    note_tls(&mut table, &spec);
    Ok(vec![table])
}

/// Projected occupation `2Γt` plus six thermal standard deviations must stay
/// below half the cutoff.
pub fn check_truncation(big_gamma: f64, t_end: f64, cutoff: usize) -> Result<(), CliError> {
    let n = 2.0 * big_gamma * t_end;
    let reach = n + 6.0 * (n * (n + 1.0)).sqrt();
    if reach > 0.5 * cutoff as f64 {
        return Err(CliError::Numerical(format!(
            "cutoff {cutoff} too small: projected <N> = {n:.3} reaches {reach:.1} > cutoff/2"
        )));
    }
    Ok(())
}

/// Per-run summary of a full-versus-adiabatic heating comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig3Point {
    pub gamma_tls: f64,
    pub nbar: f64,
    pub big_gamma: f64,
    pub full_slope: f64,
    pub adiabatic_slope: f64,
    pub max_abs_difference: f64,
    pub final_slaving_residual: f64,
    pub max_local_error: f64,
}

fn fig3_single(cfg: &ScenarioConfig, gamma_tls: f64, nbar: f64) -> Result<(ResultTable, Fig3Point), CliError> {
    let f = &cfg.fig3;
    let space = FockSpace::new(f.cutoff)?;
    let spec = tls_spec(cfg, gamma_tls, Some(nbar))?;
    check_truncation(spec.big_gamma, f.t_end, f.cutoff)?;

    let dt = f.dt.unwrap_or_else(|| default_joint_dt(spec.omega0, gamma_tls));
    let mut jopts = IntegrateOptions::new(f.t_end, dt, sample_every(f.sample_interval, dt));
    jopts.local_tol = cfg.evolution.local_tol;
    let vacuum = fock_state(space, 0)?;
    let joint = run_joint(
        &joint_generator(space, &spec)?,
        &joint_initial(&vacuum, &spec)?,
        &jopts,
        space,
        &spec,
    )?;

    let adt = (0.01 / spec.omega0).min(dt * sample_every(f.sample_interval, dt) as f64);
    let mut aopts = IntegrateOptions::new(f.t_end, adt, sample_every(f.sample_interval, adt));
    aopts.local_tol = cfg.evolution.local_tol;
    let adiabatic = integrate(&adiabatic_generator(space, spec.omega0, spec.big_gamma)?, &vacuum, &aopts)?;

    let (js, as_) = (&joint.traj.samples, &adiabatic.samples);
    if js.len() != as_.len() || js.iter().zip(as_).any(|(a, b)| (a.t - b.t).abs() > 1e-9) {
        return Err(CliError::Numerical(
            "joint and adiabatic sample grids differ; choose dt dividing sample_interval".into(),
        ));
    }
    let mut table = ResultTable::new(
        format!("fig3_gamma{}_nbar{}", label(gamma_tls), label(nbar)),
        &["t", "n_full", "n_adiabatic", "slaving_residual"],
    );
    let mut max_diff: f64 = 0.0;
    for ((a, b), r) in js.iter().zip(as_).zip(&joint.slaving) {
        max_diff = max_diff.max((a.n - b.n).abs());
        table.push(vec![a.t, a.n, b.n, *r]);
    }
    let window = (f.fit_start, f.t_end);
    let point = Fig3Point {
        gamma_tls,
        nbar,
        big_gamma: spec.big_gamma,
        full_slope: heating_rate_estimate(&joint.traj, window)?.slope,
        adiabatic_slope: heating_rate_estimate(&adiabatic, window)?.slope,
        max_abs_difference: max_diff,
        final_slaving_residual: *joint.slaving.last().unwrap_or(&f64::NAN),
        max_local_error: joint.traj.max_local_error.max(adiabatic.max_local_error),
    };
    table.note("gamma_tls", gamma_tls);
    note_tls(&mut table, &spec);
    table.note("cutoff", f.cutoff);
    table.note("dt_joint", joint.traj.dt);
    table.note("dt_adiabatic", adiabatic.dt);
    table.note("initial_state", "oscillator vacuum x thermal TLS state at the run temperature");
    table.note("full_slope", point.full_slope);
    table.note("adiabatic_slope", point.adiabatic_slope);
    table.note("max_local_error", point.max_local_error);
    Ok((table, point))
}

/// One table per `(γ_tls, n̄)` plus a summary, in grid order.
pub fn run_fig3(cfg: &ScenarioConfig) -> Result<(Vec<ResultTable>, Vec<Fig3Point>), CliError> {
    let f = &cfg.fig3;
    let grid: Vec<(f64, f64)> = f
        .gammas
        .iter()
        .flat_map(|&g| f.nbars.iter().map(move |&n| (g, n)))
        .collect();
    let results = grid
        .par_iter()
        .map(|&(g, n)| fig3_single(cfg, g, n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut summary = ResultTable::new(
        "fig3_summary",
        &[
            "gamma_tls",
            "nbar",
            "big_gamma",
            "full_slope",
            "adiabatic_slope",
            "max_abs_difference",
            "final_slaving_residual",
            "max_local_error",
        ],
    );
    summary.note("fit_window", format!("[{}, {}]", f.fit_start, f.t_end));
    let mut tables = Vec::with_capacity(results.len() + 1);
    let mut points = Vec::with_capacity(results.len());
    for (t, p) in results {
        summary.push(vec![
            p.gamma_tls,
            p.nbar,
            p.big_gamma,
            p.full_slope,
            p.adiabatic_slope,
            p.max_abs_difference,
            p.final_slaving_residual,
            p.max_local_error,
        ]);
        tables.push(t);
        points.push(p);
    }
    tables.push(summary);
    Ok((tables, points))
}
