//! Finite-dimensional operator algebra.
//!
//! Everything is stored as dense complex matrices. Two-level operators live in
//! the computational (`σ_z`) basis; the `σ_x` eigenbasis `{|+⟩, |−⟩}` is reached
//! through the fixed unitary `(|0⟩ ± |1⟩)/√2`. Composite spaces are always
//! ordered oscillator first, two-level system second.

mod banded;
mod fock;
mod state;
mod tls;

pub use banded::Banded;
pub use fock::{
    annihilation, coherent_state, creation, dimensionless_momentum, dimensionless_position,
    fock_state, number, thermal_fock_state, FockSpace,
};
pub use state::{expectation, partial_trace, random_density_matrix, DensityMatrix};
pub use tls::{
    ket_minus, ket_plus, pauli, plus_minus_populations, sigma_lower, sigma_raise, sigma_x_eigenbasis, spin_eigenbasis,
    thermal_tls_state, to_basis, Axis,
};
pub(crate) use state::{min_eigenvalue, purity, trace_of_product};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense square complex matrix; the carrier for every operator and state.
pub type ComplexMatrix = DMatrix<Complex64>;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

/// Kronecker product `A ⊗ B`; row index of the result is `i_A * dim(B) + i_B`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Entrywise comparison with an explicit absolute tolerance.
pub fn approx_eq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && max_abs_diff(a, b) <= tol
}

/// `max |A − A†|` entrywise.
pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Lindblad dissipator `D[A]ρ = AρA† − ½(A†Aρ + ρA†A)`.
pub fn dissipator(a: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_square(a)?;
    check_same_dim(a.nrows(), rho.nrows())?;
    let ad = a.adjoint();
    let ada = &ad * a;
    Ok(a * rho * &ad - (&ada * rho + rho * &ada) * c(0.5))
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn check_square(a: &ComplexMatrix) -> Result<()> {
    if a.nrows() == a.ncols() && a.nrows() >= 1 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        })
    }
}

/// Column-stacked vectorisation: entry `(i, j)` lands at `i + j * dim`.
pub fn vectorize(a: &ComplexMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(a.as_slice())
}

pub fn unvectorize(v: &nalgebra::DVector<Complex64>, dim: usize) -> ComplexMatrix {
    assert_eq!(v.len(), dim * dim, "vector length is not a square dimension");
    ComplexMatrix::from_column_slice(dim, dim, v.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_tensor_identity() {
        assert!(approx_eq(&tensor(&identity(2), &identity(3)), &identity(6), 0.0));
    }

    #[test]
    fn tensor_of_position_with_sigma_z_has_block_structure() {
        let x = dimensionless_position(FockSpace::new(2).unwrap());
        let sz = pauli(Axis::Z);
        let t = tensor(&x, &sz);
        let zero = ComplexMatrix::zeros(2, 2);
        for (bi, bj, expect) in [(0, 0, &zero), (0, 1, &sz), (1, 0, &sz), (1, 1, &zero)] {
            let block = t.view((2 * bi, 2 * bj), (2, 2)).into_owned();
            assert!(approx_eq(&block, expect, 0.0));
        }
    }

    #[test]
    fn dissipator_of_lowering_on_plus_projector() {
        let plus = ket_plus();
        let minus = ket_minus();
        let pp = &plus * plus.adjoint();
        let mm = &minus * minus.adjoint();
        let out = dissipator(&sigma_lower(), &pp).unwrap();
        assert!(approx_eq(&out, &(&mm - &pp), 1e-15));
        let out = dissipator(&sigma_lower(), &mm).unwrap();
        assert!(approx_eq(&out, &ComplexMatrix::zeros(2, 2), 1e-15));
    }

    #[test]
    fn dissipator_on_thermal_oscillator_is_traceless() {
        let space = FockSpace::new(10).unwrap();
        let rho = thermal_fock_state(space, 0.7).unwrap();
        let out = dissipator(&annihilation(space), rho.matrix()).unwrap();
        assert!(trace(&out).norm() < 1e-12);
    }

    #[test]
    fn dissipator_rejects_mismatched_dimensions() {
        let err = dissipator(&identity(3), &identity(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn vectorize_is_column_stacking() {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| c((i + 10 * j) as f64));
        let v = vectorize(&m);
        assert_eq!(v[1 + 3 * 2], c(21.0));
        assert!(approx_eq(&unvectorize(&v, 3), &m, 0.0));
    }
}
