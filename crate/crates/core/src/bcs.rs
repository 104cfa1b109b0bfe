//! Mean-field consistency check on the pairing model.
//!
//! With a static order parameter the lattice kernel collapses to diagonal
//! mean-field coefficients, and the stationarity condition of the effective
//! action becomes the standard BCS gap equation
//!
//! ```text
//! −2/g + N(0) ∫_{−Λ}^{Λ} dω / (ε_k² + Δ₀² + ω²) = 0
//! ```
//!
//! (frequency integral taken along the rotated axis, where the integrand is
//! positive definite). The integral has the closed form `(2/E)·arctan(Λ/E)`
//! with `E = √(ε_k² + Δ₀²)`.

use crate::error::{Error, Result};

/// Pairing-model parameters. `delta0` holds the gap amplitude once solved
/// (zero for the normal state or before solving).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcsModel {
    /// interaction constant g > 0
    pub g: f64,
    /// density of states N(0) at the Fermi level
    pub n0: f64,
    /// single-particle energy ε_k
    pub epsilon_k: f64,
    /// frequency cutoff Λ
    pub cutoff: f64,
    /// gap amplitude Δ₀
    pub delta0: f64,
}

impl BcsModel {
    pub fn new(g: f64, n0: f64, epsilon_k: f64, cutoff: f64) -> Result<Self> {
        if !(g > 0.0) {
            return Err(Error::Domain(format!("coupling g must be positive, got {g}")));
        }
        if !(n0 > 0.0) {
            return Err(Error::Domain(format!("density of states must be positive, got {n0}")));
        }
        if !(cutoff > 0.0) {
            return Err(Error::Domain(format!("cutoff must be positive, got {cutoff}")));
        }
        Ok(Self { g, n0, epsilon_k, cutoff, delta0: 0.0 })
    }
}

/// Mean-field kernel coefficients at frequency ω:
///
/// ```text
/// G_MF = ω Δ₀² / (ε_k² + Δ₀² − ω²)
/// K_MF = ω (ε_k² + Δ₀² − ω²) / (ε_k² − ω²)
/// ```
///
/// Errors when ω² collides with either pole.
pub fn mf_kernels(model: &BcsModel, omega: f64) -> Result<(f64, f64)> {
    let e2 = model.epsilon_k * model.epsilon_k + model.delta0 * model.delta0;
    let w2 = omega * omega;
    let near = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if near(w2, e2) {
        return Err(Error::Domain(format!(
            "omega^2 = epsilon_k^2 + delta0^2 = {e2}: mean-field kernel pole"
        )));
    }
    if near(w2, model.epsilon_k * model.epsilon_k) {
        return Err(Error::Domain(format!(
            "omega^2 = epsilon_k^2 = {}: mean-field kernel pole",
            model.epsilon_k * model.epsilon_k
        )));
    }
    let g_mf = omega * model.delta0 * model.delta0 / (e2 - w2);
    let k_mf = omega * (e2 - w2) / (model.epsilon_k * model.epsilon_k - w2);
    Ok((g_mf, k_mf))
}

/// Gap-equation residual at a trial gap:
/// `−2/g + N(0)·(2/E)·arctan(Λ/E)`, `E = √(ε_k² + Δ₀²)`.
/// Strictly decreasing in `delta0`.
pub fn gap_residual(model: &BcsModel, delta0: f64) -> Result<f64> {
    let e = (model.epsilon_k * model.epsilon_k + delta0 * delta0).sqrt();
    if e == 0.0 {
        return Err(Error::Domain(
            "gap integral diverges at epsilon_k = delta0 = 0".into(),
        ));
    }
    Ok(-2.0 / model.g + model.n0 * (2.0 / e) * (model.cutoff / e).atan())
}

/// Residual tolerance of the gap solver.
pub const GAP_TOLERANCE: f64 = 1e-10;

/// Solve the gap equation by bisection.
///
/// Returns 0 when `gap_residual(0) ≤ 0` (the normal state: no root exists,
/// since the residual decreases with the gap). Otherwise brackets the root
/// by doubling and bisects until `|residual| < 1e-10`.
pub fn solve_gap(model: &BcsModel) -> Result<f64> {
    let at_zero = gap_residual(model, 0.0)?;
    if at_zero <= 0.0 {
        return Ok(0.0);
    }
    let mut hi = model.epsilon_k.abs().max(model.cutoff).max(1.0);
    while gap_residual(model, hi)? > 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Domain("gap bracket diverged".into()));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = gap_residual(model, mid)?;
        if r.abs() < GAP_TOLERANCE {
            return Ok(mid);
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Domain("gap bisection failed to reach tolerance".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model(g: f64, epsilon_k: f64, cutoff: f64) -> BcsModel {
        BcsModel::new(g, 1.0, epsilon_k, cutoff).unwrap()
    }

    #[test]
    fn normal_state_kernels() {
        let m = model(1.0, 1.0, 10.0);
        let (g_mf, k_mf) = mf_kernels(&m, 2.0).unwrap();
        assert_eq!(g_mf, 0.0);
        assert_relative_eq!(k_mf, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn kernels_vanish_at_zero_frequency() {
        let mut m = model(1.0, 1.0, 10.0);
        m.delta0 = 0.5;
        let (g_mf, k_mf) = mf_kernels(&m, 0.0).unwrap();
        assert_eq!(g_mf, 0.0);
        assert_eq!(k_mf, 0.0);
    }

    #[test]
    fn kernels_hand_value() {
        // eps_k = 1, delta0 = 0.5, omega = 2
        let mut m = model(1.0, 1.0, 10.0);
        m.delta0 = 0.5;
        let (g_mf, k_mf) = mf_kernels(&m, 2.0).unwrap();
        // E^2 = 1.25; G = 2*0.25/(1.25-4) = -0.5/2.75
        assert_relative_eq!(g_mf, 2.0 * 0.25 / (1.25 - 4.0), max_relative = 1e-15);
        assert_relative_eq!(k_mf, 2.0 * (1.25 - 4.0) / (1.0 - 4.0), max_relative = 1e-15);
        assert!(mf_kernels(&m, 1.25f64.sqrt()).is_err());
        assert!(mf_kernels(&m, 1.0).is_err());
    }

    #[test]
    fn residual_monotone_in_gap() {
        let m = model(1.5, 0.7, 50.0);
        let mut prev = f64::INFINITY;
        for i in 0..30 {
            let r = gap_residual(&m, 0.2 * i as f64).unwrap();
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn residual_large_cutoff_limit() {
        // Λ → ∞: residual → -2/g + N(0)·π/E
        let m = model(2.0, 1.0, 1e8);
        let e = 1.0f64;
        let limit = -2.0 / m.g + m.n0 * std::f64::consts::PI / e;
        assert_relative_eq!(gap_residual(&m, 0.0).unwrap(), limit, max_relative = 1e-7);
    }

    #[test]
    fn weak_coupling_stays_normal() {
        // residual(0) = -2/g + N0 (2/E) atan(L/E) <= 0 for small g
        let m = model(0.1, 1.0, 10.0);
        assert!(gap_residual(&m, 0.0).unwrap() <= 0.0);
        assert_eq!(solve_gap(&m).unwrap(), 0.0);
    }

    #[test]
    fn solver_certificate() {
        let m = model(2.5, 0.4, 100.0);
        let gap = solve_gap(&m).unwrap();
        assert!(gap > 0.0);
        assert!(gap_residual(&m, gap).unwrap().abs() < GAP_TOLERANCE);
    }

    #[test]
    fn large_cutoff_closed_form_inversion() {
        // Λ → ∞: Δ₀ = sqrt((π g N0 / 2)² − ε_k²) when positive
        let m = model(1.8, 0.9, 1e9);
        let gap = solve_gap(&m).unwrap();
        let predicted = ((std::f64::consts::PI * m.g * m.n0 / 2.0).powi(2)
            - m.epsilon_k * m.epsilon_k)
            .sqrt();
        assert_relative_eq!(gap, predicted, max_relative = 1e-8);
    }

    #[test]
    fn gap_nondecreasing_in_coupling() {
        let mut prev = -1.0;
        for i in 0..20 {
            let g = 0.5 + 0.25 * i as f64;
            let gap = solve_gap(&model(g, 0.8, 50.0)).unwrap();
            assert!(gap >= prev - 1e-12, "gap decreased: {prev} -> {gap} at g = {g}");
            prev = gap;
        }
    }
}
