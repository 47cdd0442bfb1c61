use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{c, ComplexMatrix, DensityMatrix, I};
use crate::error::{invalid, Result};

/// Truncated oscillator space spanned by `|0⟩ … |cutoff − 1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    cutoff: usize,
}

impl FockSpace {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(invalid("cutoff", format!("must be at least 2, got {cutoff}")));
        }
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }
}

/// `a` with `a|n⟩ = √n |n − 1⟩`.
pub fn annihilation(space: FockSpace) -> ComplexMatrix {
    let n = space.cutoff;
    let mut a = ComplexMatrix::zeros(n, n);
    for k in 0..n - 1 {
        a[(k, k + 1)] = c(((k + 1) as f64).sqrt());
    }
    a
}

pub fn creation(space: FockSpace) -> ComplexMatrix {
    annihilation(space).adjoint()
}

/// `a†a`, exactly diagonal.
pub fn number(space: FockSpace) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_fn(space.cutoff, |k, _| c(k as f64)))
}

/// `x̂ = a + a†`.
pub fn dimensionless_position(space: FockSpace) -> ComplexMatrix {
    let a = annihilation(space);
    &a + a.adjoint()
}

/// `p̂ = −i(a − a†)`.
pub fn dimensionless_momentum(space: FockSpace) -> ComplexMatrix {
    let a = annihilation(space);
    (&a - a.adjoint()) * (-I)
}

pub fn fock_state(space: FockSpace, n: usize) -> Result<DensityMatrix> {
    if n >= space.cutoff {
        return Err(invalid("n", format!("{n} outside a cutoff of {}", space.cutoff)));
    }
    let mut m = ComplexMatrix::zeros(space.cutoff, space.cutoff);
    m[(n, n)] = c(1.0);
    DensityMatrix::new(vec![space.cutoff], m)
}

/// Geometric occupation distribution with mean `nbar`, truncated and renormalised.
pub fn thermal_fock_state(space: FockSpace, nbar: f64) -> Result<DensityMatrix> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(invalid("nbar", format!("must be finite and non-negative, got {nbar}")));
    }
    let ratio = nbar / (nbar + 1.0);
    let weights: Vec<f64> = (0..space.cutoff).map(|k| ratio.powi(k as i32)).collect();
    let norm: f64 = weights.iter().sum();
    let diag = DVector::from_iterator(space.cutoff, weights.iter().map(|w| c(w / norm)));
    DensityMatrix::new(vec![space.cutoff], ComplexMatrix::from_diagonal(&diag))
}

/// Coherent state `|α⟩`, truncated and renormalised.
pub fn coherent_state(space: FockSpace, alpha: Complex64) -> Result<DensityMatrix> {
    let mut amp = Vec::with_capacity(space.cutoff);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 0..space.cutoff {
        if k > 0 {
            term *= alpha / (k as f64).sqrt();
        }
        amp.push(term);
    }
    let norm = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let psi = DVector::from_iterator(space.cutoff, amp.into_iter().map(|z| z / norm));
    DensityMatrix::from_pure(vec![space.cutoff], &psi)
}
