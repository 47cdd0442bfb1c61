use num_complex::Complex64;

use super::{OscillatorSpec, TlsJointSpec};
use crate::error::{Error, Result};
use crate::operators::{
    annihilation, c, check_same_dim, dimensionless_position, frobenius_norm, identity, number,
    pauli, sigma_lower, sigma_raise, tensor, Axis, Banded, ComplexMatrix, DensityMatrix,
    FockSpace, I,
};
use crate::spin_bath::CoefficientSet;

/// A linear map on density matrices, applied as `out = L(ρ)`.
pub trait Generator: Send + Sync {
    fn dim(&self) -> usize;

    /// Factor dimensions of the states this generator acts on.
    fn dims(&self) -> Vec<usize>;

    fn apply_into(&self, rho: &ComplexMatrix, out: &mut ComplexMatrix);

    fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim(), self.dim());
        self.apply_into(rho, &mut out);
        out
    }
}

/// `L(ρ) = Aρ + ρB + Σ_k c_k L_k ρ R_k` with banded `A`, `B`, `L_k`, `R_k`.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dims: Vec<usize>,
    left: Banded,
    right: Banded,
    sandwiches: Vec<(Complex64, Banded, Banded)>,
}

impl Superoperator {
    pub(crate) fn new(
        dims: Vec<usize>,
        left: &ComplexMatrix,
        right: &ComplexMatrix,
        sandwiches: Vec<(Complex64, ComplexMatrix, ComplexMatrix)>,
    ) -> Self {
        Self {
            dims,
            left: Banded::from_dense(left),
            right: Banded::from_dense(right),
            sandwiches: sandwiches
                .into_iter()
                .filter(|(k, _, _)| *k != c(0.0))
                .map(|(k, l, r)| (k, Banded::from_dense(&l), Banded::from_dense(&r)))
                .collect(),
        }
    }

    /// Same map written with dense products, for cross-checks.
    pub fn apply_dense(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.left.to_dense() * rho + rho * self.right.to_dense();
        for (k, l, r) in &self.sandwiches {
            out += l.to_dense() * rho * r.to_dense() * *k;
        }
        out
    }
}

impl Generator for Superoperator {
    fn dim(&self) -> usize {
        self.left.dim()
    }

    fn dims(&self) -> Vec<usize> {
        self.dims.clone()
    }

    fn apply_into(&self, rho: &ComplexMatrix, out: &mut ComplexMatrix) {
        let one = c(1.0);
        out.fill(c(0.0));
        self.left.left_mul_acc(one, rho, out);
        self.right.right_mul_acc(one, rho, out);
        for (k, l, r) in &self.sandwiches {
            let tmp = l.left_mul(rho);
            r.right_mul_acc(*k, &tmp, out);
        }
    }
}

/// Dimensionful `X = (a + a†)/√(2MΩ₀)` and `P = −i√(MΩ₀/2)(a − a†)`.
pub fn position_momentum(space: FockSpace, osc: &OscillatorSpec) -> (ComplexMatrix, ComplexMatrix) {
    let a = annihilation(space);
    let ad = a.adjoint();
    let x = (&a + &ad) * c((1.0 / (2.0 * osc.mass * osc.omega0)).sqrt());
    let p = (&a - &ad) * (-I * (0.5 * osc.mass * osc.omega0).sqrt());
    (x, p)
}

/// Born–Markov generator
/// `−i[H_S + ½MΩ̃₀²X², ρ] − iγ[X,{P,ρ}] − D[X,[X,ρ]] − f[X,[P,ρ]]`
/// with `H_S = P²/2M + ½MΩ₀²X²`.
pub fn bm_generator(space: FockSpace, osc: &OscillatorSpec, coeffs: &CoefficientSet) -> Result<Superoperator> {
    osc.validate()?;
    if !coeffs.is_finite() {
        return Err(Error::Numerical("coefficients must be finite".into()));
    }
    let (x, p) = position_momentum(space, osc);
    let m = osc.mass;
    let x2 = &x * &x;
    let h = &p * &p * c(0.5 / m)
        + &x2 * c(0.5 * m * (osc.omega0 * osc.omega0 + coeffs.omega_shift_sq));
    let xp = &x * &p;
    let px = &p * &x;
    let (gamma, d, f) = (coeffs.gamma, coeffs.d(), coeffs.f());
    let left = &h * (-I) + &xp * (-I * gamma) - &x2 * c(d) - &xp * c(f);
    let right = &h * I + &px * (I * gamma) - &x2 * c(d) - &px * c(f);
    let sandwiches = vec![
        (-I * gamma + f, x.clone(), p.clone()),
        (I * gamma + f, p, x.clone()),
        (c(2.0 * d), x.clone(), x),
    ];
    Ok(Superoperator::new(vec![space.cutoff()], &left, &right, sandwiches))
}

/// Joint oscillator–TLS generator
/// `−iΩ₀[a†a, ρ] − iλΔ[σ_x, ρ] − ig[x̂σ_z, ρ] + γ(n̄+1)D[σ₋]ρ + γn̄D[σ₊]ρ`,
/// `λ` being the Hamiltonian factor of `spec`.
pub fn joint_generator(space: FockSpace, spec: &TlsJointSpec) -> Result<Superoperator> {
    joint_generator_with_dissipator_sign(space, spec, 1.0)
}

/// Verification hook: scales both dissipators by `sign`.
#[doc(hidden)]
pub fn joint_generator_with_dissipator_sign(
    space: FockSpace,
    spec: &TlsJointSpec,
    sign: f64,
) -> Result<Superoperator> {
    spec.validate()?;
    let n = space.cutoff();
    let id_osc = identity(n);
    let id_tls = identity(2);
    let h = tensor(&number(space), &id_tls) * c(spec.omega0)
        + tensor(&id_osc, &pauli(Axis::X)) * c(spec.hamiltonian_factor * spec.delta)
        + tensor(&dimensionless_position(space), &pauli(Axis::Z)) * c(spec.g);
    let mut left = &h * (-I);
    let mut right = &h * I;
    let mut sandwiches = Vec::new();
    for (rate, op) in [
        (spec.gamma_tls * (spec.nbar + 1.0), sigma_lower()),
        (spec.gamma_tls * spec.nbar, sigma_raise()),
    ] {
        if rate == 0.0 {
            continue;
        }
        let rate = sign * rate;
        let jump = tensor(&id_osc, &op);
        let jd = jump.adjoint();
        let jj = &jd * &jump;
        left -= &jj * c(0.5 * rate);
        right -= &jj * c(0.5 * rate);
        sandwiches.push((c(rate), jump, jd));
    }
    Ok(Superoperator::new(vec![n, 2], &left, &right, sandwiches))
}

/// Adiabatic oscillator generator `−iΩ₀[a†a, ρ] − Γ[x̂,[x̂,ρ]]`.
pub fn adiabatic_generator(space: FockSpace, omega0: f64, big_gamma: f64) -> Result<Superoperator> {
    if !(omega0 > 0.0) {
        return Err(crate::error::invalid("omega0", format!("must be positive, got {omega0}")));
    }
    if !(big_gamma >= 0.0) {
        return Err(crate::error::invalid(
            "big_gamma",
            format!("must be non-negative, got {big_gamma}"),
        ));
    }
    let nop = number(space);
    let x = dimensionless_position(space);
    let x2 = &x * &x;
    let left = &nop * (-I * omega0) - &x2 * c(big_gamma);
    let right = &nop * (I * omega0) - &x2 * c(big_gamma);
    let sandwiches = vec![(c(2.0 * big_gamma), x.clone(), x)];
    Ok(Superoperator::new(vec![space.cutoff()], &left, &right, sandwiches))
}

fn oscillator_space(rho: &DensityMatrix, tls: bool) -> Result<FockSpace> {
    let dims = rho.dims();
    let expected = if tls { 2 } else { 1 };
    if dims.len() != expected || (tls && dims[1] != 2) {
        return Err(Error::InvalidState(format!(
            "expected {} factor(s){}, got dims {dims:?}",
            expected,
            if tls { " (oscillator, TLS)" } else { "" }
        )));
    }
    FockSpace::new(dims[0])
}

pub fn bm_rhs(rho: &DensityMatrix, osc: &OscillatorSpec, coeffs: &CoefficientSet) -> Result<ComplexMatrix> {
    let space = oscillator_space(rho, false)?;
    Ok(bm_generator(space, osc, coeffs)?.apply(rho.matrix()))
}

pub fn joint_rhs(rho: &DensityMatrix, spec: &TlsJointSpec) -> Result<ComplexMatrix> {
    let space = oscillator_space(rho, true)?;
    Ok(joint_generator(space, spec)?.apply(rho.matrix()))
}

pub fn adiabatic_rhs(rho: &DensityMatrix, omega0: f64, big_gamma: f64) -> Result<ComplexMatrix> {
    let space = oscillator_space(rho, false)?;
    Ok(adiabatic_generator(space, omega0, big_gamma)?.apply(rho.matrix()))
}

/// Oscillator blocks `(ρ₊₊, ρ₋₋, ρ₊₋)` of a joint state in the `σ_x` eigenbasis.
pub fn tls_blocks(rho: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    let d = rho.nrows();
    if d % 2 != 0 || rho.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d + d % 2,
            found: d,
        });
    }
    let n = d / 2;
    let block = |s: usize, t: usize| ComplexMatrix::from_fn(n, n, |i, j| rho[(2 * i + s, 2 * j + t)]);
    let (b00, b01, b10, b11) = (block(0, 0), block(0, 1), block(1, 0), block(1, 1));
    let half = c(0.5);
    let pp = (&b00 + &b01 + &b10 + &b11) * half;
    let mm = (&b00 - &b01 - &b10 + &b11) * half;
    let pm = (&b00 - &b01 + &b10 - &b11) * half;
    Ok((pp, mm, pm))
}

/// Relative distance of `ρ₊₋` from the slaved value
/// `−(2ig/γ(2n̄+1))(x̂ρ₋₋ − ρ₊₊x̂)`; the absolute size of the prediction when
/// `ρ₊₋` vanishes to roundoff.
pub fn slaving_residual(rho: &DensityMatrix, spec: &TlsJointSpec) -> Result<f64> {
    let space = oscillator_space(rho, true)?;
    slaving_residual_matrix(rho.matrix(), space, spec)
}

pub fn slaving_residual_matrix(rho: &ComplexMatrix, space: FockSpace, spec: &TlsJointSpec) -> Result<f64> {
    check_same_dim(2 * space.cutoff(), rho.nrows())?;
    let (pp, mm, pm) = tls_blocks(rho)?;
    let x = dimensionless_position(space);
    let k = -I * (2.0 * spec.g / (spec.gamma_tls * (2.0 * spec.nbar + 1.0)));
    let predicted = (&x * &mm - &pp * &x) * k;
    let norm = frobenius_norm(&pm);
    let diff = frobenius_norm(&(&pm - &predicted));
    // below roundoff the coherence block counts as zero
    let floor = 1e-14 * frobenius_norm(rho);
    Ok(if norm > floor { diff / norm } else { diff })
}
