use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{c, ComplexMatrix, DensityMatrix, I};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Pauli matrices in the computational basis.
pub fn pauli(axis: Axis) -> ComplexMatrix {
    let z = c(0.0);
    match axis {
        Axis::X => ComplexMatrix::from_row_slice(2, 2, &[z, c(1.0), c(1.0), z]),
        Axis::Y => ComplexMatrix::from_row_slice(2, 2, &[z, -I, I, z]),
        Axis::Z => ComplexMatrix::from_row_slice(2, 2, &[c(1.0), z, z, c(-1.0)]),
    }
}

/// `|+⟩ = (|0⟩ + |1⟩)/√2`, the `+1` eigenvector of `σ_x`.
pub fn ket_plus() -> DVector<num_complex::Complex64> {
    DVector::from_vec(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)])
}

/// `|−⟩ = (|0⟩ − |1⟩)/√2`, the `−1` eigenvector of `σ_x`.
pub fn ket_minus() -> DVector<num_complex::Complex64> {
    DVector::from_vec(vec![c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)])
}

/// Unitary whose columns are `|+⟩, |−⟩`.
pub fn sigma_x_eigenbasis() -> ComplexMatrix {
    let (p, m) = (ket_plus(), ket_minus());
    ComplexMatrix::from_columns(&[p, m])
}

/// `σ₊ = |+⟩⟨−|`.
pub fn sigma_raise() -> ComplexMatrix {
    ket_plus() * ket_minus().adjoint()
}

/// `σ₋ = |−⟩⟨+|`.
pub fn sigma_lower() -> ComplexMatrix {
    ket_minus() * ket_plus().adjoint()
}

/// Eigenbasis of `½(ω σ_z + Δ σ_x)` for mixing angle `θ = atan2(Δ, ω)`:
/// columns `cos(θ/2)|0⟩ + sin(θ/2)|1⟩` and `−sin(θ/2)|0⟩ + cos(θ/2)|1⟩`.
pub fn spin_eigenbasis(theta: f64) -> ComplexMatrix {
    let (s, co) = (0.5 * theta).sin_cos();
    ComplexMatrix::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)])
}

/// `U† A U`: the representation of `A` in the basis given by the columns of `U`.
pub fn to_basis(a: &ComplexMatrix, u: &ComplexMatrix) -> ComplexMatrix {
    u.adjoint() * a * u
}

/// `ρ_T = p₊|+⟩⟨+| + p₋|−⟩⟨−|` with `p₊/p₋ = exp(−Δ/T)`.
pub fn thermal_tls_state(delta: f64, temperature: f64) -> Result<DensityMatrix> {
    if !(delta > 0.0) {
        return Err(invalid("delta", format!("must be positive, got {delta}")));
    }
    if !(temperature >= 0.0) {
        return Err(invalid(
            "temperature",
            format!("must be non-negative, got {temperature}"),
        ));
    }
    let boltzmann = if temperature == 0.0 {
        0.0
    } else {
        (-delta / temperature).exp()
    };
    let p_minus = 1.0 / (1.0 + boltzmann);
    let p_plus = boltzmann / (1.0 + boltzmann);
    Ok(tls_state_from_populations(p_plus, p_minus))
}

pub(crate) fn tls_state_from_populations(p_plus: f64, p_minus: f64) -> DensityMatrix {
    let (kp, km) = (ket_plus(), ket_minus());
    let m = &kp * kp.adjoint() * c(p_plus) + &km * km.adjoint() * c(p_minus);
    DensityMatrix::from_matrix_unchecked(vec![2], m)
}

/// Populations `(p₊, p₋)` of a two-level state in the `σ_x` eigenbasis.
pub fn plus_minus_populations(rho: &ComplexMatrix) -> (f64, f64) {
    let (kp, km) = (ket_plus(), ket_minus());
    let pp = (kp.adjoint() * rho * &kp)[(0, 0)].re;
    let pm = (km.adjoint() * rho * &km)[(0, 0)].re;
    (pp, pm)
}
