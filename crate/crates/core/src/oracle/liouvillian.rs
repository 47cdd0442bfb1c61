use nalgebra::Schur;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::Generator;
use crate::error::{Error, Result};
use crate::operators::{
    c, frobenius_norm, identity, max_abs_diff, random_density_matrix, unvectorize, vectorize,
    ComplexMatrix,
};

/// Largest state dimension for which the `d² × d²` matrix is built.
pub const MAX_LIOUVILLIAN_DIM: usize = 64;

/// Relative additivity defect above which a right-hand side is rejected.
const LINEARITY_TOL: f64 = 1e-10;

/// Dense matrix of a linear map on column-stacked `d × d` matrices.
#[derive(Debug, Clone)]
pub struct LiouvillianMatrix {
    dim: usize,
    entries: ComplexMatrix,
}

impl LiouvillianMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dim_sq(&self) -> usize {
        self.dim * self.dim
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.nrows(),
            });
        }
        Ok(unvectorize(&(&self.entries * vectorize(rho)), self.dim))
    }

    /// Complex spectrum from a Schur decomposition.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let schur = Schur::try_new(self.entries.clone(), 1e-14, 100_000)
            .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
        let (_, t) = schur.unpack();
        Ok(t.diagonal().iter().copied().collect())
    }

    /// Largest real part in the spectrum.
    pub fn spectral_abscissa(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// `|Tr L(I/d)|`, zero for any trace-preserving generator.
    pub fn identity_trace_defect(&self) -> f64 {
        let id = identity(self.dim) * c(1.0 / self.dim as f64);
        let out = unvectorize(&(&self.entries * vectorize(&id)), self.dim);
        out.trace().norm()
    }
}

/// Builds the matrix column by column from `rhs` applied to matrix units,
/// after checking additivity on random inputs.
pub fn liouvillian_from_rhs<F>(rhs: F, dim: usize) -> Result<LiouvillianMatrix>
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    if dim == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    if dim > MAX_LIOUVILLIAN_DIM {
        return Err(Error::TooLarge {
            dim,
            limit: MAX_LIOUVILLIAN_DIM,
        });
    }
    check_additive(&rhs, dim)?;
    let n = dim * dim;
    let mut entries = ComplexMatrix::zeros(n, n);
    let mut unit = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        for row in 0..dim {
            unit[(row, col)] = c(1.0);
            let image = rhs(&unit);
            unit[(row, col)] = c(0.0);
            if image.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: image.nrows(),
                });
            }
            entries.set_column(row + col * dim, &vectorize(&image));
        }
    }
    Ok(LiouvillianMatrix { dim, entries })
}

pub fn liouvillian_of(gen: &dyn Generator) -> Result<LiouvillianMatrix> {
    liouvillian_from_rhs(|rho| gen.apply(rho), gen.dim())
}

fn check_additive<F>(rhs: &F, dim: usize) -> Result<()>
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    let mut rng = ChaCha8Rng::seed_from_u64(0x11_0u64 + dim as u64);
    let mut random = || {
        ComplexMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    };
    for _ in 0..2 {
        let (a, b) = (random(), random());
        let sum = rhs(&(&a + &b));
        let parts = rhs(&a) + rhs(&b);
        let scale = frobenius_norm(&sum).max(frobenius_norm(&parts)).max(1.0);
        let defect = max_abs_diff(&sum, &parts) / scale;
        if !(defect <= LINEARITY_TOL) {
            return Err(Error::Nonlinear { defect });
        }
    }
    Ok(())
}

/// Largest entrywise deviation between the matrix form and direct
/// application, over `samples` seeded random density matrices.
pub fn equivalence_defect(gen: &dyn Generator, liouvillian: &LiouvillianMatrix, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let rho = random_density_matrix(gen.dims(), &mut rng);
        let direct = gen.apply(rho.matrix());
        let via = liouvillian.apply(rho.matrix())?;
        worst = worst.max(max_abs_diff(&direct, &via));
    }
    Ok(worst)
}
