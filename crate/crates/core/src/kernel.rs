//! The driving field, its Fourier comb, and the band elements of the
//! frequency-lattice kernel.
//!
//! A drive with a finite set of spectral lines couples Fourier components of
//! the spin correlator that differ by sums of line frequencies. For the
//! monochromatic drive the coupling is pentadiagonal on the lattice
//! `{ω + k·w}` and is fully described by three band elements `β₀`, `β₁`, `β₂`
//! built from the pole function `f[x] = 2x/(x² − Δ²)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One spectral line of the drive comb, `coefficient · δ(ω − frequency)`.
///
/// Coefficients follow the comb normalization in which a cosine of amplitude
/// `A` contributes coefficient `A` at each of `±w`, while a constant `c`
/// contributes `c` at zero. The actual Fourier weight of a finite-frequency
/// line is therefore `coefficient/2`; see [`Harmonic::spectral_weight`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub coefficient: f64,
    pub frequency: f64,
}

impl Harmonic {
    /// Fourier weight of this line: `coefficient` for the static line,
    /// `coefficient/2` for each member of a cosine pair.
    pub fn spectral_weight(&self) -> f64 {
        if self.frequency == 0.0 {
            self.coefficient
        } else {
            0.5 * self.coefficient
        }
    }
}

/// Hop direction on the frequency lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Driving-field parameters and their spectral comb.
///
/// `Δ₁(t) = ε/2 + A·cos(wt)`, `Δ₂(t) ≡ 0`, `Δ₃ = Δ/2` static.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSpec {
    pub epsilon: f64,
    pub amplitude: f64,
    pub omega_drive: f64,
    pub delta: f64,
    pub harmonics: Vec<Harmonic>,
}

impl DriveSpec {
    /// Monochromatic drive. The comb is `{(ε/2, 0), (A, +w), (A, −w)}`.
    pub fn monochromatic(epsilon: f64, amplitude: f64, omega_drive: f64, delta: f64) -> Result<Self> {
        if !(omega_drive > 0.0) {
            return Err(Error::InvalidDrive(format!(
                "omega_drive must be positive, got {omega_drive}"
            )));
        }
        // delta = 0 is a valid drive for the time-domain limit; the lattice
        // kernel itself requires delta > 0 and checks at evaluation time.
        if !(delta >= 0.0) {
            return Err(Error::InvalidDrive(format!("delta must be non-negative, got {delta}")));
        }
        if !(amplitude >= 0.0) {
            return Err(Error::InvalidDrive(format!(
                "amplitude must be non-negative, got {amplitude}"
            )));
        }
        Ok(Self {
            epsilon,
            amplitude,
            omega_drive,
            delta,
            harmonics: vec![
                Harmonic { coefficient: 0.5 * epsilon, frequency: 0.0 },
                Harmonic { coefficient: amplitude, frequency: omega_drive },
                Harmonic { coefficient: amplitude, frequency: -omega_drive },
            ],
        })
    }

    /// A drive with an explicit comb. Line frequencies must be pairwise
    /// distinct; the nominal (ε, A, w) fields are kept for bookkeeping.
    pub fn with_harmonics(
        epsilon: f64,
        amplitude: f64,
        omega_drive: f64,
        delta: f64,
        harmonics: Vec<Harmonic>,
    ) -> Result<Self> {
        let mut drive = Self::monochromatic(epsilon, amplitude, omega_drive, delta)?;
        for (i, a) in harmonics.iter().enumerate() {
            for b in harmonics.iter().skip(i + 1) {
                if a.frequency == b.frequency {
                    return Err(Error::InvalidDrive(format!(
                        "duplicate harmonic frequency {}",
                        a.frequency
                    )));
                }
            }
        }
        drive.harmonics = harmonics;
        Ok(drive)
    }

    /// Transverse field `Δ₁(t)` reconstructed from the comb.
    pub fn delta1(&self, t: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| h.spectral_weight() * (h.frequency * t).cos())
            .sum()
    }

    /// Static longitudinal component `Δ₃ = Δ/2`.
    pub fn delta3(&self) -> f64 {
        0.5 * self.delta
    }
}

/// Imaginary pole shift `γ̃` pushing every kernel pole into the lower
/// half-plane, so time-domain responses decay as `e^{−γ̃t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    pub gamma: f64,
}

impl Regularization {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::InvalidDrive(format!("gamma must be non-negative, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    /// Default broadening `γ̃ = 10⁻²·Δ`.
    pub fn default_for(delta: f64) -> Self {
        Self { gamma: 1e-2 * delta }
    }
}

/// `f[x] = 2z/(z² − Δ²)` with `z = x + iγ̃`.
///
/// Odd in `x` at γ̃ = 0, finite for every real `x` once γ̃ > 0.
pub fn f_reg(x: f64, delta: f64, gamma: f64) -> Result<Complex64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("f[x] requires delta > 0, got {delta}")));
    }
    let z = Complex64::new(x, gamma);
    let denom = z * z - delta * delta;
    if denom.norm() == 0.0 {
        return Err(Error::PoleOnGrid { x, delta });
    }
    Ok(2.0 * z / denom)
}

/// Band elements of the lattice kernel for a given drive and regularization.
///
/// ```text
/// β₀(ω,w)   = ε²f[ω] + A²(f[ω−w] + f[ω+w])      diagonal
/// β₁(ω,σw)  = εA(f[ω] + f[ω+σw])                one-step hop ω → ω+σw
/// β₂(ω,σw)  = A²f[ω+σw]                          two-step hop ω → ω+2σw
/// ```
///
/// The hops satisfy `β₁(ω,σw) = β₁(ω+σw,−σw)` and `β₂(ω,σw) = β₂(ω+2σw,−σw)`,
/// so the lattice operator is complex symmetric.
#[derive(Debug, Clone)]
pub struct BandKernel {
    pub drive: DriveSpec,
    pub reg: Regularization,
}

impl BandKernel {
    pub fn new(drive: DriveSpec, reg: Regularization) -> Self {
        Self { drive, reg }
    }

    fn f(&self, x: f64) -> Result<Complex64> {
        f_reg(x, self.drive.delta, self.reg.gamma)
    }

    pub fn beta0(&self, omega: f64) -> Result<Complex64> {
        let eps = self.drive.epsilon;
        let a = self.drive.amplitude;
        let w = self.drive.omega_drive;
        let mut value = Complex64::new(0.0, 0.0);
        // zero couplings contribute nothing and must not probe poles
        if eps != 0.0 {
            value += eps * eps * self.f(omega)?;
        }
        if a != 0.0 {
            value += a * a * (self.f(omega - w)? + self.f(omega + w)?);
        }
        Ok(value)
    }

    pub fn beta1(&self, omega: f64, sign: Sign) -> Result<Complex64> {
        let eps = self.drive.epsilon;
        let a = self.drive.amplitude;
        if eps == 0.0 || a == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let sw = sign.factor() * self.drive.omega_drive;
        Ok(eps * a * (self.f(omega)? + self.f(omega + sw)?))
    }

    pub fn beta2(&self, omega: f64, sign: Sign) -> Result<Complex64> {
        let a = self.drive.amplitude;
        if a == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let sw = sign.factor() * self.drive.omega_drive;
        Ok(a * a * self.f(omega + sw)?)
    }

    /// Dispatch by band index; the sign is ignored for `kind = 0`.
    pub fn beta(&self, kind: u8, omega: f64, sign: Sign) -> Result<Complex64> {
        match kind {
            0 => self.beta0(omega),
            1 => self.beta1(omega, sign),
            2 => self.beta2(omega, sign),
            k => Err(Error::Domain(format!("band index {k} out of range (0..=2)"))),
        }
    }
}

/// One term of the general kernel: weight attached to the constraint
/// `ω + ω′ = shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTerm {
    pub shift: f64,
    pub weight: Complex64,
}

/// The antisymmetric kernel for an arbitrary finite comb, evaluated by
/// pairing spectral lines.
///
/// Each ordered pair of lines `(a, b)` contributes
///
/// ```text
/// 4·s_a·s_b·(ω′ − ω) / [(ν_a + ω + Δ + iγ̃)(ν_a + ω′ + Δ + iγ̃)]
/// ```
///
/// on the shift `ν_b − ν_a`, where `s` is the line's spectral weight. Terms
/// are returned per ordered pair, in pair order, so swapping `(ω, ω′)`
/// negates the list term by term. For the monochromatic drive the per-shift
/// sums, evaluated on their constraint, reproduce the band elements of
/// [`BandKernel`].
pub fn g_kernel_general(
    omega: f64,
    omega_prime: f64,
    drive: &DriveSpec,
    reg: &Regularization,
) -> Result<Vec<KernelTerm>> {
    let delta = drive.delta;
    let gamma = reg.gamma;
    let mut terms = Vec::with_capacity(drive.harmonics.len() * drive.harmonics.len());
    for a in &drive.harmonics {
        // shared pole pair for every partner of line a
        let pa = Complex64::new(a.frequency + omega + delta, gamma);
        let pb = Complex64::new(a.frequency + omega_prime + delta, gamma);
        if gamma == 0.0 && (pa.norm() == 0.0 || pb.norm() == 0.0) {
            return Err(Error::PoleOnGrid { x: a.frequency + omega + delta, delta });
        }
        for b in &drive.harmonics {
            let weight = 4.0 * a.spectral_weight() * b.spectral_weight() * (omega_prime - omega)
                / (pa * pb);
            terms.push(KernelTerm { shift: b.frequency - a.frequency, weight });
        }
    }
    Ok(terms)
}

/// Sum the general kernel's weights on a given shift, evaluated on the
/// constraint `ω′ = shift − ω`. For the monochromatic drive,
/// `shift = −σkw` reproduces `β_k(ω, σw)`.
pub fn regroup_on_shift(
    omega: f64,
    shift: f64,
    drive: &DriveSpec,
    reg: &Regularization,
) -> Result<Complex64> {
    let terms = g_kernel_general(omega, shift - omega, drive, reg)?;
    let tol = 1e-9 * (1.0 + drive.omega_drive.abs());
    Ok(terms
        .iter()
        .filter(|t| (t.shift - shift).abs() < tol)
        .map(|t| t.weight)
        .sum())
}
