//! Exact time-domain reference: unitary propagation of
//! `i dU/dt = H(t) U`, `H(t) = −[Δ₁(t)σ₁ + Δ₃σ₃]`.
//!
//! The spin-spin correlator is `K(t,0) = ½ tr[U†(t,0) σ₃ U(t,0) σ₃]` and the
//! survival probability `P↓↓ = (1 + K)/2`. Closed forms for the static-drive
//! and zero-gap limits serve as fixtures for the integrator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::DriveSpec;

/// Resolution guard: `dt · max(Δ, w, ε, A)` must stay below this.
const RESOLUTION_LIMIT: f64 = 0.02;

type Mat2 = [Complex64; 4];

const IDENTITY: Mat2 = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(1.0, 0.0),
];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn dagger(a: &Mat2) -> Mat2 {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

/// `½ tr[U† σ₃ U σ₃]` for a 2×2 `U`.
fn correlator_of(u: &Mat2) -> f64 {
    0.5 * (u[0].norm_sqr() - u[1].norm_sqr() - u[2].norm_sqr() + u[3].norm_sqr())
}

/// Time grid, propagators and derived observables of one propagation run.
#[derive(Debug, Clone)]
pub struct PropagatorTrace {
    pub drive: DriveSpec,
    pub times: Vec<f64>,
    pub propagators: Vec<Mat2>,
    pub correlator: Vec<f64>,
    pub survival: Vec<f64>,
}

impl PropagatorTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest entry magnitude of `U†U − 1` over the whole trace.
    pub fn max_unitarity_defect(&self) -> f64 {
        self.propagators
            .iter()
            .map(|u| {
                let p = mat_mul(&dagger(u), u);
                (p[0] - 1.0).norm().max(p[1].norm()).max(p[2].norm()).max((p[3] - 1.0).norm())
            })
            .fold(0.0, f64::max)
    }

    /// Two-time correlator `K(t_i, t_j)` from the stored propagators via
    /// `U(t_i, t_j) = U(t_i, 0) U(t_j, 0)†`.
    pub fn correlator_between(&self, i: usize, j: usize) -> f64 {
        let u = mat_mul(&self.propagators[i], &dagger(&self.propagators[j]));
        correlator_of(&u)
    }

    /// Keep every `stride`-th sample (always keeps the first one).
    pub fn decimated(&self, stride: usize) -> PropagatorTrace {
        let stride = stride.max(1);
        let pick = |v: &Vec<f64>| v.iter().copied().step_by(stride).collect();
        PropagatorTrace {
            drive: self.drive.clone(),
            times: pick(&self.times),
            propagators: self.propagators.iter().copied().step_by(stride).collect(),
            correlator: pick(&self.correlator),
            survival: pick(&self.survival),
        }
    }
}

/// Default step: `factor · 2π / max(w, Ω)` with `Ω = √(ε² + Δ²)`;
/// the conventional factor is `10⁻³`.
pub fn suggested_dt(drive: &DriveSpec, factor: f64) -> f64 {
    let rabi = drive.epsilon.hypot(drive.delta);
    factor * std::f64::consts::TAU / drive.omega_drive.max(rabi)
}

/// Integrate the propagator with a classical fixed-step fourth-order scheme,
/// sampling the Hamiltonian at the substep times.
pub fn propagate(drive: &DriveSpec, dt: f64, n_steps: usize) -> Result<PropagatorTrace> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let scale = drive
        .delta
        .abs()
        .max(drive.omega_drive.abs())
        .max(drive.epsilon.abs())
        .max(drive.amplitude.abs());
    let product = dt * scale;
    if product > RESOLUTION_LIMIT {
        return Err(Error::ResolutionGuard { product, suggested: RESOLUTION_LIMIT / scale });
    }

    let d3 = drive.delta3();
    // dU/dt = i [Δ₁σ₁ + Δ₃σ₃] U
    let rhs = |d1: f64, u: &Mat2| -> Mat2 {
        let i = Complex64::new(0.0, 1.0);
        [
            i * (d3 * u[0] + d1 * u[2]),
            i * (d3 * u[1] + d1 * u[3]),
            i * (d1 * u[0] - d3 * u[2]),
            i * (d1 * u[1] - d3 * u[3]),
        ]
    };

    let mut u = IDENTITY;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut propagators = Vec::with_capacity(n_steps + 1);
    let mut correlator = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    propagators.push(u);
    correlator.push(correlator_of(&u));
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let d1_a = drive.delta1(t);
        let d1_b = drive.delta1(t + 0.5 * dt);
        let d1_c = drive.delta1(t + dt);
        let k1 = rhs(d1_a, &u);
        let u2 = std::array::from_fn(|i| u[i] + 0.5 * dt * k1[i]);
        let k2 = rhs(d1_b, &u2);
        let u3 = std::array::from_fn(|i| u[i] + 0.5 * dt * k2[i]);
        let k3 = rhs(d1_b, &u3);
        let u4 = std::array::from_fn(|i| u[i] + dt * k3[i]);
        let k4 = rhs(d1_c, &u4);
        u = std::array::from_fn(|i| {
            u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        });
        times.push((step + 1) as f64 * dt);
        propagators.push(u);
        correlator.push(correlator_of(&u));
    }
    let survival = correlator.iter().map(|k| 0.5 * (1.0 + k)).collect();
    Ok(PropagatorTrace { drive: drive.clone(), times, propagators, correlator, survival })
}

/// Closed-form correlator for Δ = 0:
/// `K(t,t') = sign(t−t')·cos[2∫_{t'}^{t} Δ₁(s) ds]`, with `sign(0) = +1`.
pub fn analytic_delta_zero(drive: &DriveSpec, t: f64, t_prime: f64) -> Result<f64> {
    if drive.delta != 0.0 {
        return Err(Error::Domain(format!(
            "analytic closed form requires delta = 0, got {}",
            drive.delta
        )));
    }
    let mut phase = 0.0;
    for h in &drive.harmonics {
        let s = h.spectral_weight();
        if h.frequency == 0.0 {
            phase += s * (t - t_prime);
        } else {
            phase += s * ((h.frequency * t).sin() - (h.frequency * t_prime).sin()) / h.frequency;
        }
    }
    let sign = if t >= t_prime { 1.0 } else { -1.0 };
    Ok(sign * (2.0 * phase).cos())
}

/// Static-drive (A = 0) correlator `(Δ² + ε²·cos(Ωt))/Ω²`, `Ω = √(ε²+Δ²)`.
/// A free spin (ε = Δ = 0) keeps `K = 1`.
pub fn static_rabi_reference(epsilon: f64, delta: f64, t: f64) -> f64 {
    let omega2 = epsilon * epsilon + delta * delta;
    if omega2 == 0.0 {
        return 1.0;
    }
    (delta * delta + epsilon * epsilon * (omega2.sqrt() * t).cos()) / omega2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn drive(eps: f64, a: f64, w: f64, delta: f64) -> DriveSpec {
        DriveSpec::monochromatic(eps, a, w, delta).unwrap()
    }

    #[test]
    fn starts_at_identity() {
        let tr = propagate(&drive(1.0, 0.5, 1.0, 1.0), 1e-3, 10).unwrap();
        assert_eq!(tr.correlator[0], 1.0);
        assert_eq!(tr.survival[0], 1.0);
    }

    #[test]
    fn resolution_guard_trips() {
        match propagate(&drive(1.0, 0.5, 1.0, 1.0), 0.1, 10) {
            Err(Error::ResolutionGuard { suggested, .. }) => assert!(suggested <= 0.02),
            other => panic!("expected guard, got {other:?}"),
        }
    }

    #[test]
    fn static_drive_matches_rabi_form() {
        // A = 0: K(t,0) = (Δ² + ε² cos Ωt)/Ω², checked over Ωt in [0, 50]
        let (eps, delta) = (1.3f64, 1.0f64);
        let omega = eps.hypot(delta);
        let d = drive(eps, 0.0, 1.0, delta);
        let t_end = 50.0 / omega;
        let dt = 5e-4f64;
        let n = (t_end / dt).ceil() as usize;
        let tr = propagate(&d, dt, n).unwrap();
        let mut worst = 0.0f64;
        for (i, &t) in tr.times.iter().enumerate() {
            worst = worst.max((tr.correlator[i] - static_rabi_reference(eps, delta, t)).abs());
        }
        assert!(worst < 1e-6, "sup error {worst}");
    }

    #[test]
    fn zero_gap_matches_closed_form() {
        // Δ = 0: K(t,0) = cos(εt + (2A/w) sin wt)
        let (eps, a, w) = (0.7, 0.3, 1.0);
        let d = drive(eps, a, w, 0.0);
        let dt = 1e-3;
        let n = 20_000;
        let tr = propagate(&d, dt, n).unwrap();
        let mut worst = 0.0f64;
        for (i, &t) in tr.times.iter().enumerate() {
            let reference = (eps * t + 2.0 * a / w * (w * t).sin()).cos();
            worst = worst.max((tr.correlator[i] - reference).abs());
        }
        assert!(worst < 1e-6, "sup error {worst}");
        // and against the library closed form
        assert_relative_eq!(
            analytic_delta_zero(&d, 7.3, 0.0).unwrap(),
            (eps * 7.3 + 2.0 * a / w * (w * 7.3f64).sin()).cos(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn analytic_closed_form_limits() {
        let d = drive(0.7, 0.3, 1.0, 0.0);
        // equal times: sign(0) = +1, integral vanishes
        assert_eq!(analytic_delta_zero(&d, 2.0, 2.0).unwrap(), 1.0);
        // A = 0: cos(eps (t - t'))
        let d0 = drive(0.7, 0.0, 1.0, 0.0);
        assert_relative_eq!(
            analytic_delta_zero(&d0, 3.0, 1.0).unwrap(),
            (0.7f64 * 2.0).cos(),
            max_relative = 1e-13
        );
        // nonzero delta is a domain error
        assert!(analytic_delta_zero(&drive(1.0, 0.1, 1.0, 1.0), 1.0, 0.0).is_err());
    }

    #[test]
    fn zero_gap_phase_against_quadrature() {
        // the closed-form phase integral versus plain Simpson quadrature of
        // 2*Delta1 over [t', t]
        let d = drive(0.9, 0.3, 1.0, 0.0);
        let (t, t_prime) = (2.0, 0.0);
        let n = 20_000;
        let h = (t - t_prime) / n as f64;
        let mut phase = d.delta1(t_prime) + d.delta1(t);
        for i in 1..n {
            let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
            phase += weight * d.delta1(t_prime + i as f64 * h);
        }
        phase *= 2.0 * h / 3.0;
        let reference = phase.cos();
        assert_relative_eq!(
            analytic_delta_zero(&d, t, t_prime).unwrap(),
            reference,
            max_relative = 1e-10
        );
    }

    #[test]
    fn rabi_reference_limits() {
        assert_eq!(static_rabi_reference(0.0, 0.0, 5.0), 1.0);
        for &t in &[0.0, 0.7, 2.9] {
            assert_relative_eq!(static_rabi_reference(0.0, 1.0, t), 1.0, max_relative = 1e-15);
            assert_relative_eq!(static_rabi_reference(1.3, 0.0, t), (1.3 * t).cos(), max_relative = 1e-13);
            // eps = delta: (1 + cos(sqrt(2) eps t))/2
            let e = 0.9f64;
            assert_relative_eq!(
                static_rabi_reference(e, e, t),
                0.5 * (1.0 + (2f64.sqrt() * e * t).cos()),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn unitarity_and_bounds() {
        let tr = propagate(&drive(4.0, 2.05, 4.0, 1.0), 5e-4, 40_000).unwrap();
        assert!(tr.max_unitarity_defect() < 1e-9);
        for (k, p) in tr.correlator.iter().zip(tr.survival.iter()) {
            assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(k));
            assert!((-1e-12..=1.0 + 1e-12).contains(p));
        }
    }

    #[test]
    fn two_time_reduction() {
        // K(t,t') from stored U's equals a fresh propagation started at t'
        let d = drive(1.1, 0.4, 1.3, 1.0);
        let dt = 2e-4;
        let tr = propagate(&d, dt, 30_000).unwrap();
        let (i, j) = (25_000, 10_000);
        let via_stored = tr.correlator_between(i, j);

        // re-propagate from t_j with the drive shifted in time
        let t0 = tr.times[j];
        let shifted = |t: f64| d.delta1(t + t0);
        let mut u = IDENTITY;
        let d3 = d.delta3();
        let rhs = |d1: f64, u: &Mat2| -> Mat2 {
            let im = Complex64::new(0.0, 1.0);
            [
                im * (d3 * u[0] + d1 * u[2]),
                im * (d3 * u[1] + d1 * u[3]),
                im * (d1 * u[0] - d3 * u[2]),
                im * (d1 * u[1] - d3 * u[3]),
            ]
        };
        for step in 0..(i - j) {
            let t = step as f64 * dt;
            let k1 = rhs(shifted(t), &u);
            let u2: Mat2 = std::array::from_fn(|m| u[m] + 0.5 * dt * k1[m]);
            let k2 = rhs(shifted(t + 0.5 * dt), &u2);
            let u3: Mat2 = std::array::from_fn(|m| u[m] + 0.5 * dt * k2[m]);
            let k3 = rhs(shifted(t + 0.5 * dt), &u3);
            let u4: Mat2 = std::array::from_fn(|m| u[m] + dt * k3[m]);
            let k4 = rhs(shifted(t + dt), &u4);
            u = std::array::from_fn(|m| u[m] + dt / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]));
        }
        let direct = correlator_of(&u);
        assert!((via_stored - direct).abs() < 1e-9, "{via_stored} vs {direct}");
    }

    #[test]
    fn step_halving_reduces_error() {
        let d = drive(1.3, 0.0, 1.0, 1.0);
        let t_end = 20.0;
        let mut errors = Vec::new();
        for &dt in &[4e-3f64, 2e-3, 1e-3] {
            let n = (t_end / dt).round() as usize;
            let tr = propagate(&d, dt, n).unwrap();
            let mut worst = 0.0f64;
            for (i, &t) in tr.times.iter().enumerate() {
                worst = worst.max((tr.correlator[i] - static_rabi_reference(1.3, 1.0, t)).abs());
            }
            errors.push(worst);
        }
        assert!(errors[1] < errors[0] && errors[2] < errors[1], "{errors:?}");
    }

    #[test]
    fn decimation_keeps_grid_alignment() {
        let tr = propagate(&drive(1.0, 0.2, 1.0, 1.0), 1e-3, 100).unwrap();
        let thin = tr.decimated(10);
        assert_eq!(thin.len(), 11);
        assert_eq!(thin.times[1], tr.times[10]);
        assert_eq!(thin.correlator[3], tr.correlator[30]);
    }
}
