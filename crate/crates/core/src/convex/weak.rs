use super::measure::Measure1D;
use crate::error::{Error, Result};

/// Gaps between the last measure of a sequence and a limit candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakReport {
    /// `|∫ f dμ_n − ∫ f dμ|` per test function, at the last index.
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    /// `|μ_n(ℝ) − μ(ℝ)|` at the last index.
    pub mass_gap: f64,
    pub within_tol: bool,
}

/// Compares the last measure of `seq` with `mu` on bounded continuous test
/// functions and on total mass.
pub fn weak_convergence_check(
    seq: &[Measure1D],
    mu: &Measure1D,
    test_fns: &[&dyn Fn(f64) -> f64],
    tol: f64,
) -> Result<WeakReport> {
    let last = seq.last().ok_or_else(|| Error::InvalidMeasure("empty measure sequence".into()))?;
    let quad_tol = (tol * 1e-3).max(1e-13);
    let mut gaps = Vec::with_capacity(test_fns.len());
    for f in test_fns {
        let a = last.integrate_fn(f, quad_tol)?;
        let b = mu.integrate_fn(f, quad_tol)?;
        gaps.push((a - b).abs());
    }
    let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
    let mass_gap = (last.total_mass()? - mu.total_mass()?).abs();
    Ok(WeakReport { within_tol: max_gap < tol && mass_gap < tol, gaps, max_gap, mass_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{cutoff, monge_ampere, ConcaveFn};
    use crate::rational::{qi, qr};

    #[test]
    fn constant_sequence_has_zero_gap() {
        let mu = monge_ampere(&ConcaveFn::with_alpha_singularity(&qr(1, 3)).unwrap());
        let r = weak_convergence_check(&[mu.clone(), mu.clone()], &mu, &[&|_| 1.0, &|u: f64| (-u.abs()).exp()], 1e-9)
            .unwrap();
        assert_eq!(r.max_gap, 0.0);
        assert_eq!(r.mass_gap, 0.0);
    }

    #[test]
    fn cutoffs_converge() {
        let psi = ConcaveFn::canonical();
        let phi = ConcaveFn::with_alpha_singularity(&qr(1, 4)).unwrap();
        let target = monge_ampere(&phi);
        let seq: Vec<Measure1D> =
            [10, 100, 1000].iter().map(|&n| monge_ampere(&cutoff(&phi, &psi, &qi(n)).unwrap())).collect();
        for m in &seq {
            assert!((m.total_mass().unwrap() - 1.0).abs() < 1e-10);
        }
        let fns: [&dyn Fn(f64) -> f64; 3] = [&|_| 1.0, &|u: f64| (-u.abs()).exp(), &|u: f64| 1.0 / (1.0 + u * u)];
        let r = weak_convergence_check(&seq, &target, &fns, 1e-3).unwrap();
        assert!(r.within_tol, "{r:?}");
    }
}
