use super::concave::{sup_difference, ConcaveFn};
use super::formula::Integral;
use super::measure::{monge_ampere, Measure1D};
use crate::error::{Error, Result};

/// Absolute tolerance for any numerical quadrature behind an energy.
pub const DEFAULT_TOL: f64 = 1e-9;

/// `∫ (f − g) dμ`; `−∞` is a value, `+∞` an error.
pub fn integrate_against(f: &ConcaveFn, g: &ConcaveFn, mu: &Measure1D, tol: f64) -> Result<Integral> {
    mu.integrate_difference(f, g, tol)
}

fn require_dominated(psi: &ConcaveFn, phi: &ConcaveFn, what: &str) -> Result<()> {
    if sup_difference(psi, phi)? == f64::INFINITY {
        return Err(Error::Precondition(format!("{what}: sup(psi - phi) is infinite")));
    }
    Ok(())
}

/// `E(ψ, φ) = ∫ (ψ − φ) (MA(φ) + MA(ψ))` for `ψ <= φ + C`.
pub fn local_energy(psi: &ConcaveFn, phi: &ConcaveFn) -> Result<Integral> {
    require_dominated(psi, phi, "local energy")?;
    let a = integrate_against(psi, phi, &monge_ampere(phi), DEFAULT_TOL)?;
    let b = integrate_against(psi, phi, &monge_ampere(psi), DEFAULT_TOL)?;
    Ok(a.plus(b))
}

/// `∫ (ψ₀ − φ₀) dMA(ψ₁) + ∫ (ψ₁ − φ₁) dMA(φ₀)` for `ψ_j <= φ_j + C`.
pub fn mixed_local_energy(psi0: &ConcaveFn, psi1: &ConcaveFn, phi0: &ConcaveFn, phi1: &ConcaveFn) -> Result<Integral> {
    require_dominated(psi0, phi0, "mixed energy, first pair")?;
    require_dominated(psi1, phi1, "mixed energy, second pair")?;
    let a = integrate_against(psi0, phi0, &monge_ampere(psi1), DEFAULT_TOL)?;
    let b = integrate_against(psi1, phi1, &monge_ampere(phi0), DEFAULT_TOL)?;
    Ok(a.plus(b))
}
