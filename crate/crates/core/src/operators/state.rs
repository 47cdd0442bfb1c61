use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use super::{c, check_same_dim, hermiticity_defect, trace, ComplexMatrix};
use crate::error::{Error, Result};

/// Entrywise Hermiticity tolerance for a valid state.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace tolerance for a valid state.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue tolerated (integrator noise).
pub const POSITIVITY_TOL: f64 = -1e-9;

/// Hermitian, unit-trace, positive matrix over an ordered product of factors.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity before accepting `matrix`.
    pub fn new(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidState(format!("bad factor dimensions {dims:?}")));
        }
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: matrix.nrows(),
            });
        }
        let herm = hermiticity_defect(&matrix);
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("Hermiticity defect {herm:e}")));
        }
        let tr = trace(&matrix);
        if (tr - c(1.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let state = Self { dims, matrix };
        let min_eig = state.min_eigenvalue();
        if min_eig < POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(state)
    }

    pub fn from_pure(dims: Vec<usize>, psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let psi = psi / c(norm);
        Self::new(dims, &psi * psi.adjoint())
    }

    pub(crate) fn from_matrix_unchecked(dims: Vec<usize>, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.nrows());
        Self { dims, matrix }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        trace(&self.matrix)
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        purity(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    /// Product state `self ⊗ other`.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_matrix_unchecked(dims, self.matrix.kronecker(&other.matrix))
    }
}

pub(crate) fn purity(m: &ComplexMatrix) -> f64 {
    // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub(crate) fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    let herm = (m + m.adjoint()) * c(0.5);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Reduced state on factor `keep`, tracing out every other factor.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if keep >= dims.len() {
        return Err(Error::InvalidFactor {
            index: keep,
            factors: dims.len(),
        });
    }
    let left: usize = dims[..keep].iter().product();
    let mid = dims[keep];
    let right: usize = dims[keep + 1..].iter().product();
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(mid, mid);
    for a in 0..mid {
        for b in 0..mid {
            let mut acc = c(0.0);
            for l in 0..left {
                for r in 0..right {
                    acc += m[((l * mid + a) * right + r, (l * mid + b) * right + r)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(vec![mid], out))
}

/// `Tr(op · ρ)`.
pub fn expectation(op: &ComplexMatrix, rho: &DensityMatrix) -> Result<Complex64> {
    check_same_dim(rho.dim(), op.nrows())?;
    check_same_dim(rho.dim(), op.ncols())?;
    Ok(trace_of_product(op, rho.matrix()))
}

/// `Tr(A·B)` without forming the product.
pub(crate) fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = c(0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Random full-rank state `G G† / Tr(G G†)` from a complex Ginibre matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    let mut m = m / c(tr);
    // exact Hermiticity after rounding
    m = (&m + m.adjoint()) * c(0.5);
    DensityMatrix::from_matrix_unchecked(dims, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{
        approx_eq, identity, ket_minus, ket_plus, number, pauli, thermal_fock_state,
        thermal_tls_state, Axis, FockSpace,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_non_hermitian_and_bad_trace() {
        let mut m = identity(2) * c(0.5);
        m[(0, 1)] = c(0.1);
        assert!(DensityMatrix::new(vec![2], m).is_err());
        assert!(DensityMatrix::new(vec![2], identity(2)).is_err());
        let neg = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![c(1.5), c(-0.5)]));
        assert!(DensityMatrix::new(vec![2], neg).is_err());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let space = FockSpace::new(4).unwrap();
        let osc = thermal_fock_state(space, 0.4).unwrap();
        let tls = thermal_tls_state(1.0, 0.8).unwrap();
        let joint = osc.tensor(&tls);
        let reduced = partial_trace(&joint, 0).unwrap();
        assert!(approx_eq(reduced.matrix(), osc.matrix(), 1e-15));
        let reduced = partial_trace(&joint, 1).unwrap();
        assert!(approx_eq(reduced.matrix(), tls.matrix(), 1e-15));
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let s = 1.0 / 2f64.sqrt();
        let psi = DVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]);
        let bell = DensityMatrix::from_pure(vec![2, 2], &psi).unwrap();
        for keep in 0..2 {
            let r = partial_trace(&bell, keep).unwrap();
            assert!(approx_eq(r.matrix(), &(identity(2) * c(0.5)), 1e-15));
        }
        assert!(partial_trace(&bell, 2).is_err());
    }

    #[test]
    fn plus_minus_blocks_sum_to_partial_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 5;
        for _ in 0..10 {
            let rho = random_density_matrix(vec![n, 2], &mut rng);
            let reduced = partial_trace(&rho, 0).unwrap();
            // ⟨+|ρ|+⟩ + ⟨−|ρ|−⟩ computed through explicit bra/ket contractions
            let mut blocks = ComplexMatrix::zeros(n, n);
            for ket in [ket_plus(), ket_minus()] {
                let ket = ComplexMatrix::from_column_slice(2, 1, ket.as_slice());
                let proj = identity(n).kronecker(&ket);
                blocks += proj.adjoint() * rho.matrix() * &proj;
            }
            assert!(approx_eq(reduced.matrix(), &blocks, 1e-14));
        }
    }

    #[test]
    fn expectation_values() {
        let sz = pauli(Axis::Z);
        let mixed = DensityMatrix::new(vec![2], identity(2) * c(0.5)).unwrap();
        assert!(expectation(&sz, &mixed).unwrap().norm() < 1e-16);
        let space = FockSpace::new(3).unwrap();
        assert!(expectation(&number(space), &mixed).is_err());
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density_matrix(vec![3, 2], &mut rng);
        assert!(DensityMatrix::new(rho.dims().to_vec(), rho.matrix().clone()).is_ok());
        assert!(rho.purity() < 1.0);
    }
}
