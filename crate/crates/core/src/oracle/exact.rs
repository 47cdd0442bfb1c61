use serde::{Deserialize, Serialize};

use super::expm;
use crate::dynamics::{position_momentum, OscillatorSpec};
use crate::error::{invalid, Error, Result};
use crate::operators::{
    c, check_same_dim, commutator, identity, pauli, spin_eigenbasis, tensor, trace_of_product, Axis,
    ComplexMatrix, DensityMatrix, FockSpace, I,
};
use crate::spin_bath::{tanh_factor, tilde_frequency, DiscreteBath};

/// Largest joint dimension `cutoff · 2^N` handled by dense exponentiation.
pub const MAX_EXACT_DIM: usize = 512;
pub const MAX_EXACT_SPINS: usize = 4;

/// Oscillator plus a handful of bath spins, evolved without approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactJointSpec {
    pub osc: OscillatorSpec,
    pub bath: DiscreteBath,
    pub cutoff: usize,
    pub temperature: f64,
}

impl ExactJointSpec {
    pub fn new(osc: OscillatorSpec, bath: DiscreteBath, cutoff: usize, temperature: f64) -> Result<Self> {
        let s = Self {
            osc,
            bath,
            cutoff,
            temperature,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.osc.validate()?;
        FockSpace::new(self.cutoff)?;
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(invalid(
                "temperature",
                format!("must be finite and non-negative, got {}", self.temperature),
            ));
        }
        if self.bath.len() > MAX_EXACT_SPINS {
            return Err(invalid(
                "bath",
                format!("at most {MAX_EXACT_SPINS} spins, got {}", self.bath.len()),
            ));
        }
        let dim = self.dim();
        if dim > MAX_EXACT_DIM {
            return Err(Error::TooLarge {
                dim,
                limit: MAX_EXACT_DIM,
            });
        }
        Ok(())
    }

    pub fn bath_dim(&self) -> usize {
        1 << self.bath.len()
    }

    pub fn dim(&self) -> usize {
        self.cutoff * self.bath_dim()
    }
}

/// Full Hamiltonian `H_S ⊗ I + I ⊗ H_E + X ⊗ Σ g_i σ_z^(i)` with the couplings
/// scaled by `g_scale`, and the thermal product state of the bath.
#[derive(Debug, Clone)]
pub struct ExactModel {
    spec: ExactJointSpec,
    x: ComplexMatrix,
    p: ComplexMatrix,
    h_system: ComplexMatrix,
    force: ComplexMatrix,
    hamiltonian: ComplexMatrix,
    bath_state: ComplexMatrix,
}

/// `op` on spin `k` of `n`, spin 0 being the leftmost factor.
fn embed(op: &ComplexMatrix, k: usize, n: usize) -> ComplexMatrix {
    let mut out = identity(1);
    for i in 0..n {
        out = if i == k { tensor(&out, op) } else { tensor(&out, &identity(2)) };
    }
    out
}

impl ExactModel {
    pub fn new(spec: &ExactJointSpec, g_scale: f64) -> Result<Self> {
        spec.validate()?;
        if !g_scale.is_finite() {
            return Err(invalid("g_scale", "must be finite"));
        }
        let space = FockSpace::new(spec.cutoff)?;
        let (x, p) = position_momentum(space, &spec.osc);
        let m = spec.osc.mass;
        let w0 = spec.osc.omega0;
        let h_system = &p * &p * c(0.5 / m) + &x * &x * c(0.5 * m * w0 * w0);

        let n = spec.bath.len();
        let db = spec.bath_dim();
        let (sx, sz) = (pauli(Axis::X), pauli(Axis::Z));
        let mut h_bath = ComplexMatrix::zeros(db, db);
        let mut force = ComplexMatrix::zeros(db, db);
        let mut bath_state = identity(1);
        for (k, s) in spec.bath.spins().iter().enumerate() {
            let local = (&sz * c(s.omega) + &sx * c(s.delta)) * c(0.5);
            h_bath += embed(&local, k, n);
            force += embed(&sz, k, n) * c(g_scale * s.g);
            bath_state = tensor(&bath_state, &thermal_spin(s.omega, s.delta, spec.temperature));
        }
        let hamiltonian = tensor(&h_system, &identity(db)) + tensor(&identity(spec.cutoff), &h_bath) + tensor(&x, &force);
        Ok(Self {
            spec: spec.clone(),
            x,
            p,
            h_system,
            force,
            hamiltonian,
            bath_state,
        })
    }

    pub fn spec(&self) -> &ExactJointSpec {
        &self.spec
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn bath_state(&self) -> &ComplexMatrix {
        &self.bath_state
    }

    /// `ρ_S(0) ⊗ ρ_E(0)`.
    pub fn initial_state(&self, rho_osc0: &DensityMatrix) -> Result<ComplexMatrix> {
        check_same_dim(self.spec.cutoff, rho_osc0.dim())?;
        Ok(tensor(rho_osc0.matrix(), &self.bath_state))
    }

    /// `e^{−iHt}`.
    pub fn propagator(&self, t: f64) -> Result<ComplexMatrix> {
        expm(&(&self.hamiltonian * (-I * t)))
    }

    pub fn reduce(&self, joint: &ComplexMatrix) -> ComplexMatrix {
        let (n, db) = (self.spec.cutoff, self.spec.bath_dim());
        ComplexMatrix::from_fn(n, n, |i, j| (0..db).map(|a| joint[(i * db + a, j * db + a)]).sum())
    }

    pub fn energy(&self, joint: &ComplexMatrix) -> f64 {
        trace_of_product(&self.hamiltonian, joint).re
    }

    pub fn evolve(&self, rho_osc0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        let rho = self.initial_state(rho_osc0)?;
        let u = self.propagator(t)?;
        let out = self.reduce(&(&u * rho * u.adjoint()));
        DensityMatrix::new(vec![self.spec.cutoff], hermitian_part(&out))
    }

    /// Reduced states at `t = k·t_end/steps`, `k = 0..=steps`, reusing one
    /// step propagator.
    pub fn trajectory(&self, rho_osc0: &DensityMatrix, t_end: f64, steps: usize) -> Result<ExactTrajectory> {
        if !(t_end > 0.0) || steps == 0 {
            return Err(invalid("t_end", "needs t_end > 0 and at least one step"));
        }
        let dt = t_end / steps as f64;
        let u = self.propagator(dt)?;
        let ud = u.adjoint();
        let mut rho = self.initial_state(rho_osc0)?;
        let e0 = self.energy(&rho);
        let mut out = ExactTrajectory {
            times: Vec::with_capacity(steps + 1),
            reduced: Vec::with_capacity(steps + 1),
            energy_drift: 0.0,
        };
        for k in 0..=steps {
            if k > 0 {
                rho = &u * &rho * &ud;
            }
            out.times.push(k as f64 * dt);
            out.reduced.push(self.reduce(&rho));
            out.energy_drift = out.energy_drift.max((self.energy(&rho) - e0).abs());
        }
        Ok(out)
    }

    /// Bath contribution to `d²⟨X⟩/dt²` at `t = 0`, from `i[H, P]` with and
    /// without the coupling. Equals `−⟨Σ g_i σ_z^(i)⟩/M`.
    pub fn initial_force_drift(&self, rho_osc0: &DensityMatrix) -> Result<f64> {
        let rho = self.initial_state(rho_osc0)?;
        let db = self.spec.bath_dim();
        let p_full = tensor(&self.p, &identity(db));
        let full = commutator(&self.hamiltonian, &p_full) * I;
        let free = tensor(&(commutator(&self.h_system, &self.p) * I), &identity(db));
        Ok(trace_of_product(&(full - free), &rho).re / self.spec.osc.mass)
    }

    /// Thermal expectation of the bath force operator `Σ g_i σ_z^(i)`.
    pub fn mean_force(&self) -> f64 {
        trace_of_product(&self.force, &self.bath_state).re
    }

    pub fn position(&self) -> &ComplexMatrix {
        &self.x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactTrajectory {
    pub times: Vec<f64>,
    pub reduced: Vec<ComplexMatrix>,
    /// `max_t |⟨H⟩(t) − ⟨H⟩(0)|`.
    pub energy_drift: f64,
}

/// Gibbs state of `½(ω σ_z + Δ σ_x)`; the ground state at `T = 0`.
fn thermal_spin(omega: f64, delta: f64, temperature: f64) -> ComplexMatrix {
    let spin = crate::spin_bath::SpinParams { omega, delta, g: 0.0 };
    let (wt, theta) = tilde_frequency(&spin);
    let p_up = 0.5 * (1.0 - tanh_factor(wt, temperature));
    let u = spin_eigenbasis(theta);
    let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(p_up), c(1.0 - p_up)]));
    &u * d * u.adjoint()
}

fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Reduced oscillator state after exact evolution of `ρ_S(0) ⊗ ρ_E(0)` for a
/// time `t` with all couplings scaled by `g_scale`.
pub fn exact_joint_evolution(
    spec: &ExactJointSpec,
    g_scale: f64,
    rho_osc0: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    ExactModel::new(spec, g_scale)?.evolve(rho_osc0, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{coherent_state, fock_state, max_abs_diff};
    use num_complex::Complex64;
    use crate::spin_bath::SpinParams;

    fn spec(omegas: &[f64], temperature: f64) -> ExactJointSpec {
        let spins = omegas
            .iter()
            .enumerate()
            .map(|(k, &w)| SpinParams::new(w, 0.8 + 0.15 * k as f64, 1.0).unwrap())
            .collect();
        ExactJointSpec::new(
            OscillatorSpec::new(1.0, 1.0).unwrap(),
            DiscreteBath::new(spins).unwrap(),
            8,
            temperature,
        )
        .unwrap()
    }

    #[test]
    fn uncoupled_matches_free_oscillator() {
        let s = spec(&[0.3, -0.2, 0.1], 0.5);
        let rho0 = coherent_state(FockSpace::new(8).unwrap(), Complex64::new(0.6, 0.2)).unwrap();
        let t = 2.7;
        let out = exact_joint_evolution(&s, 0.0, &rho0, t).unwrap();
        let model = ExactModel::new(&s, 0.0).unwrap();
        let u = expm(&(&model.h_system * (-I * t))).unwrap();
        let free = &u * rho0.matrix() * u.adjoint();
        assert!(max_abs_diff(out.matrix(), &free) < 1e-10);
        let at_zero = exact_joint_evolution(&s, 1.0, &rho0, 0.0).unwrap();
        assert!(max_abs_diff(at_zero.matrix(), rho0.matrix()) < 1e-12);
    }

    #[test]
    fn energy_conserved_and_trace_kept() {
        let s = spec(&[0.3, -0.2, 0.1, 0.4], 0.7);
        let rho0 = coherent_state(FockSpace::new(8).unwrap(), Complex64::new(0.5, 0.0)).unwrap();
        let model = ExactModel::new(&s, 0.2).unwrap();
        let traj = model.trajectory(&rho0, 5.0, 10).unwrap();
        assert!(traj.energy_drift < 1e-9, "{}", traj.energy_drift);
        for r in &traj.reduced {
            assert!((r.trace() - c(1.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_mean_force_gives_no_initial_drift() {
        let rho0 = fock_state(FockSpace::new(8).unwrap(), 1).unwrap();
        let unbiased = ExactModel::new(&spec(&[0.0, 0.0, 0.0, 0.0], 0.5), 0.3).unwrap();
        assert!(unbiased.mean_force().abs() < 1e-14);
        assert!(unbiased.initial_force_drift(&rho0).unwrap().abs() < 1e-8);
        let biased = ExactModel::new(&spec(&[0.5, 0.2, 0.0, 0.0], 0.5), 0.3).unwrap();
        let drift = biased.initial_force_drift(&rho0).unwrap();
        assert!((drift + biased.mean_force()).abs() < 1e-12);
        let expected: f64 = 0.3 * biased.spec.bath.mean_force(0.5).unwrap();
        assert!((biased.mean_force() - expected).abs() < 1e-12);
    }

    #[test]
    fn thermal_spin_populations() {
        let rho = thermal_spin(0.6, 0.8, 0.5);
        let h = (pauli(Axis::Z) * c(0.6) + pauli(Axis::X) * c(0.8)) * c(0.5);
        let gibbs = expm(&(h * c(-1.0 / 0.5))).unwrap();
        let gibbs = &gibbs * c(1.0 / gibbs.trace().re);
        assert!(max_abs_diff(&rho, &gibbs) < 1e-14);
    }

    #[test]
    fn size_bounds() {
        let bath = DiscreteBath::new(vec![SpinParams::new(0.1, 1.0, 1.0).unwrap(); 4]).unwrap();
        let osc = OscillatorSpec::new(1.0, 1.0).unwrap();
        assert!(matches!(
            ExactJointSpec::new(osc, bath.clone(), 40, 0.1).unwrap_err(),
            Error::TooLarge { .. }
        ));
        let five = DiscreteBath::new(vec![SpinParams::new(0.1, 1.0, 1.0).unwrap(); 5]).unwrap();
        assert!(ExactJointSpec::new(osc, five, 2, 0.1).is_err());
        assert!(ExactJointSpec::new(osc, bath, 32, 0.1).is_ok());
    }
}
