use num_complex::Complex64;

use super::spectral::{check_temperature, tanh_factor};
use super::{tilde_frequency, DiscreteBath};
use crate::error::Result;
use crate::operators::{c, pauli, spin_eigenbasis, to_basis, Axis, ComplexMatrix, I};

/// `C(τ) = C₀ + Σ (gΔ/ω̃)² [cos ω̃τ − i tanh(ω̃/2T) sin ω̃τ]`.
pub fn correlation_closed(bath: &DiscreteBath, temperature: f64, tau: f64) -> Result<Complex64> {
    check_temperature(temperature)?;
    let mut total = c(super::c0(bath));
    for s in bath.spins() {
        let (wt, _) = tilde_frequency(s);
        let amp = s.g * s.delta / wt;
        let (sn, cs) = (wt * tau).sin_cos();
        total += amp * amp * Complex64::new(cs, -tanh_factor(wt, temperature) * sn);
    }
    Ok(total)
}

/// `C(τ) = Σ g² Tr[ρ_T σ_z(τ) σ_z]` from explicit 2×2 algebra: eigenbasis,
/// Heisenberg conjugation `e^{iHτ} σ_z e^{−iHτ}` and thermal trace.
pub fn correlation_oracle(bath: &DiscreteBath, temperature: f64, tau: f64) -> Result<Complex64> {
    check_temperature(temperature)?;
    let mut total = Complex64::new(0.0, 0.0);
    for s in bath.spins() {
        let (wt, theta) = tilde_frequency(s);
        let energies = [0.5 * wt, -0.5 * wt];
        let sz = to_basis(&pauli(Axis::Z), &spin_eigenbasis(theta));
        // excited-state weight 1/(1 + e^{ω̃/T}), written to stay finite as T → 0
        let p_up = if temperature == 0.0 {
            0.0
        } else {
            1.0 / (1.0 + (wt / temperature).exp())
        };
        let pops = [p_up, 1.0 - p_up];
        let heisenberg = ComplexMatrix::from_fn(2, 2, |j, k| {
            sz[(j, k)] * (I * (energies[j] - energies[k]) * tau).exp()
        });
        let product = heisenberg * &sz;
        let tr: Complex64 = (0..2).map(|j| product[(j, j)] * pops[j]).sum();
        total += tr * (s.g * s.g);
    }
    Ok(total)
}
