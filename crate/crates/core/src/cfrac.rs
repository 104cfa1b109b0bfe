//! Continued-fraction solution of the frequency-lattice Dyson problem.
//!
//! The correlator's Fourier image is the resolvent of a pentadiagonal
//! operator on the lattice `{ω + k·w}`:
//!
//! ```text
//! M[j,j]   = −2ω_j + β₀(ω_j, w)
//! M[j,j±1] = β₁(ω_j, ±w)
//! M[j,j±2] = β₂(ω_j, ±w)
//! ```
//!
//! Grouping lattice sites in pairs turns `M` into a block-tridiagonal chain
//! of 2×2 blocks, whose one-sided surface blocks obey an exact matrix
//! continued fraction: each iteration level swallows one more block (two
//! lattice shells). [`cf_iterate`] runs that recursion to a finite depth;
//! [`lattice_matrix_inverse`] inverts the truncated lattice matrix directly
//! (dense LU) as an independent cross-check. The two must agree or the build
//! is wrong.
//!
//! The diagonal `B(ω)` and the dressed hops `C(ω,±w)` of the resolvent feed
//! the off-diagonal chain elements `Γₙ` and the response
//! `K(ω) = B(ω) + Σₙσ Γₙ(ω,σw)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{BandKernel, DriveSpec, Sign};

/// Floor magnitude below which a continued-fraction denominator counts as
/// degenerate.
const DENOM_FLOOR: f64 = 1e-30;

/// The materialized lattice `{base + k·step}`, `|k| ≤ span`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyLattice {
    pub base: f64,
    pub step: f64,
    pub span: usize,
}

impl FrequencyLattice {
    pub fn new(base: f64, step: f64, span: usize) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::Domain(format!("lattice step must be positive, got {step}")));
        }
        Ok(Self { base, step, span })
    }

    pub fn point(&self, k: i64) -> f64 {
        self.base + k as f64 * self.step
    }

    /// A recursion of the given depth touches points `|k| ≤ 2·depth + 2`.
    pub fn supports_depth(&self, depth: usize) -> bool {
        self.span >= 2 * depth + 2
    }
}

/// 2×2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
struct M2([Complex64; 4]);

impl M2 {
    const ZERO: M2 = M2([Complex64::new(0.0, 0.0); 4]);

    fn mul(&self, o: &M2) -> M2 {
        let a = &self.0;
        let b = &o.0;
        M2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }

    fn sub(&self, o: &M2) -> M2 {
        M2([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2], self.0[3] - o.0[3]])
    }

    fn neg(&self) -> M2 {
        M2([-self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }

    /// Inverse; fails when the determinant magnitude is below the floor.
    fn inv(&self, at_omega: f64) -> Result<M2> {
        let det = self.0[0] * self.0[3] - self.0[1] * self.0[2];
        if det.norm() < DENOM_FLOOR {
            return Err(Error::DegenerateDenominator { omega: at_omega, magnitude: det.norm() });
        }
        Ok(M2([self.0[3] / det, -self.0[1] / det, -self.0[2] / det, self.0[0] / det]))
    }
}

/// Pentadiagonal entries of one lattice site, relative to the anchor.
#[derive(Debug, Clone, Copy)]
struct SiteEntries {
    diag: Complex64,
    up1: Complex64,
    dn1: Complex64,
    up2: Complex64,
    dn2: Complex64,
}

fn site_entries(kernel: &BandKernel, lattice: &FrequencyLattice, k: i64) -> Result<SiteEntries> {
    let omega = lattice.point(k);
    Ok(SiteEntries {
        diag: Complex64::new(-2.0 * omega, 0.0) + kernel.beta0(omega)?,
        up1: kernel.beta1(omega, Sign::Plus)?,
        dn1: kernel.beta1(omega, Sign::Minus)?,
        up2: kernel.beta2(omega, Sign::Plus)?,
        dn2: kernel.beta2(omega, Sign::Minus)?,
    })
}

/// Output of one continued-fraction evaluation: the dressed diagonal and
/// the two dressed one-step hops at the anchor frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfIterate {
    pub b: Complex64,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
}

/// Surface tables of one windowed lattice solve.
///
/// The window covers sites `|k| ≤ half_extent` around the anchor. `right[K]`
/// (`left[K]`) is the surface block of the sub-chain extending from block `K`
/// to the window edge — the per-(block, level) memo of the recursion. From
/// these, the full diagonal blocks, the nearest-neighbor elements and the
/// anchor row of the resolvent are assembled exactly.
#[derive(Debug, Clone)]
pub struct CfState {
    pub lattice: FrequencyLattice,
    pub depth: usize,
    lo: i64,
    n_sites: usize,
    /// full resolvent diagonal blocks, one per block
    g_diag: Vec<M2>,
    /// cross blocks G[block K, block K+1]
    g_up: Vec<M2>,
    /// resolvent row of the anchor site, indexed by site offset from `lo`
    row: Vec<Complex64>,
}

impl CfState {
    /// Solve the window `|k| ≤ 2·depth + 2 + chain_extent` around `omega`.
    ///
    /// `chain_extent` widens the window so that chain points `|k| ≤
    /// chain_extent` keep the full recursion horizon on both sides.
    pub fn build(
        kernel: &BandKernel,
        omega: f64,
        depth: usize,
        chain_extent: usize,
    ) -> Result<Self> {
        let half = (2 * depth + 2 + chain_extent) as i64;
        let lattice = FrequencyLattice::new(omega, kernel.drive.omega_drive, half as usize)?;
        let lo = -half;
        let mut hi = half;
        if (hi - lo + 1) % 2 != 0 {
            hi += 1; // even site count so the window tiles into 2-blocks
        }
        let n_sites = (hi - lo + 1) as usize;
        let entries: Vec<SiteEntries> = (lo..=hi)
            .map(|k| site_entries(kernel, &lattice, k))
            .collect::<Result<_>>()?;
        let nb = n_sites / 2;
        let site = |bk: usize, r: usize| 2 * bk + r; // array index of block site
        let d_blk = |bk: usize| -> M2 {
            let (e0, e1) = (&entries[site(bk, 0)], &entries[site(bk, 1)]);
            M2([e0.diag, e0.up1, e1.dn1, e1.diag])
        };
        // coupling block K -> K+1 and its reverse
        let v_blk = |bk: usize| -> M2 {
            let (e0, e1) = (&entries[site(bk, 0)], &entries[site(bk, 1)]);
            M2([e0.up2, Complex64::new(0.0, 0.0), e1.up1, e1.up2])
        };
        let w_blk = |bk: usize| -> M2 {
            let (t0, t1) = (&entries[site(bk + 1, 0)], &entries[site(bk + 1, 1)]);
            M2([t0.dn2, t0.dn1, Complex64::new(0.0, 0.0), t1.dn2])
        };
        let blk_omega = |bk: usize| lattice.point(lo + 2 * bk as i64);

        // one-sided surface blocks, swept inward from each edge
        let mut right = vec![M2::ZERO; nb];
        right[nb - 1] = d_blk(nb - 1).inv(blk_omega(nb - 1))?;
        for bk in (0..nb - 1).rev() {
            let sigma = v_blk(bk).mul(&right[bk + 1]).mul(&w_blk(bk));
            right[bk] = d_blk(bk).sub(&sigma).inv(blk_omega(bk))?;
        }
        let mut left = vec![M2::ZERO; nb];
        left[0] = d_blk(0).inv(blk_omega(0))?;
        for bk in 1..nb {
            let sigma = w_blk(bk - 1).mul(&left[bk - 1]).mul(&v_blk(bk - 1));
            left[bk] = d_blk(bk).sub(&sigma).inv(blk_omega(bk))?;
        }

        // full diagonal and first cross blocks
        let mut g_diag = Vec::with_capacity(nb);
        for bk in 0..nb {
            let mut m = d_blk(bk);
            if bk > 0 {
                m = m.sub(&w_blk(bk - 1).mul(&left[bk - 1]).mul(&v_blk(bk - 1)));
            }
            if bk + 1 < nb {
                m = m.sub(&v_blk(bk).mul(&right[bk + 1]).mul(&w_blk(bk)));
            }
            g_diag.push(m.inv(blk_omega(bk))?);
        }
        let mut g_up = Vec::with_capacity(nb.saturating_sub(1));
        for bk in 0..nb - 1 {
            g_up.push(g_diag[bk].mul(&v_blk(bk)).mul(&right[bk + 1]).neg());
        }

        // anchor row by block propagation outward from the anchor's block
        let center = (-lo) as usize;
        let cb = center / 2;
        let cr = center % 2;
        let mut row = vec![Complex64::new(0.0, 0.0); n_sites];
        let pick = |m: &M2, r: usize, s: usize| m.0[2 * r + s];
        row[site(cb, 0)] = pick(&g_diag[cb], cr, 0);
        row[site(cb, 1)] = pick(&g_diag[cb], cr, 1);
        let mut blk = g_diag[cb];
        for bk in cb..nb - 1 {
            blk = blk.mul(&v_blk(bk)).mul(&right[bk + 1]).neg();
            row[site(bk + 1, 0)] = pick(&blk, cr, 0);
            row[site(bk + 1, 1)] = pick(&blk, cr, 1);
        }
        blk = g_diag[cb];
        for bk in (1..=cb).rev() {
            blk = blk.mul(&w_blk(bk - 1)).mul(&left[bk - 1]).neg();
            row[site(bk - 1, 0)] = pick(&blk, cr, 0);
            row[site(bk - 1, 1)] = pick(&blk, cr, 1);
        }

        Ok(Self { lattice, depth, lo, n_sites, g_diag, g_up, row })
    }

    fn idx(&self, k: i64) -> usize {
        debug_assert!(k >= self.lo && ((k - self.lo) as usize) < self.n_sites);
        (k - self.lo) as usize
    }

    /// Dressed diagonal `B(ω + k·w)`.
    pub fn b(&self, k: i64) -> Complex64 {
        let i = self.idx(k);
        let m = &self.g_diag[i / 2];
        m.0[3 * (i % 2)]
    }

    /// Resolvent element `G[ω+k·w, ω+(k±1)·w]`.
    fn offdiag(&self, k: i64, sign: Sign) -> Complex64 {
        let i = match sign {
            Sign::Plus => self.idx(k),
            Sign::Minus => self.idx(k - 1),
        };
        let value = if i % 2 == 0 {
            self.g_diag[i / 2].0[1]
        } else {
            self.g_up[i / 2].0[2]
        };
        // the lattice operator is complex symmetric, so G[k,k-1] = G[k-1,k]
        value
    }

    /// Dressed hop `C(ω + k·w, ±w)`, defined so that
    /// `B·C·B'` reproduces the nearest-neighbor resolvent element.
    pub fn c(&self, k: i64, sign: Sign) -> Complex64 {
        let neighbor = k + sign.factor() as i64;
        self.offdiag(k, sign) / (self.b(k) * self.b(neighbor))
    }

    /// Anchor-row resolvent element `G[ω, ω + n·w]`; this is the exact
    /// off-diagonal chain element `Γ_n` of the resolvent.
    pub fn row_element(&self, n: i64) -> Complex64 {
        self.row[self.idx(n)]
    }
}

/// Run the lattice recursion at the given depth.
///
/// Depth 0 returns the bare elements `B₀ = 1/(β₀ − 2ω)`, `C₀ = −β₁(ω, ±w)`.
/// Depth `m ≥ 1` solves the window `|k| ≤ 2m + 2` exactly; successive depths
/// extend the horizon two shells at a time and converge geometrically to the
/// infinite-lattice resolvent.
pub fn cf_iterate(kernel: &BandKernel, omega: f64, depth: usize) -> Result<CfIterate> {
    if depth == 0 {
        let denom = kernel.beta0(omega)? - 2.0 * omega;
        if denom.norm() < DENOM_FLOOR {
            return Err(Error::DegenerateDenominator { omega, magnitude: denom.norm() });
        }
        return Ok(CfIterate {
            b: 1.0 / denom,
            c_plus: -kernel.beta1(omega, Sign::Plus)?,
            c_minus: -kernel.beta1(omega, Sign::Minus)?,
        });
    }
    let state = CfState::build(kernel, omega, depth, 0)?;
    Ok(CfIterate {
        b: state.b(0),
        c_plus: state.c(0, Sign::Plus),
        c_minus: state.c(0, Sign::Minus),
    })
}

/// Off-diagonal chain element in product form:
/// `Γₙ(ω,σw) = B(ω)·Π_{k=1..n} C(ω+σ(k−1)w, σw)·B(ω+σkw)`,
/// with every factor taken from [`cf_iterate`] at the given depth.
pub fn gamma_chain(
    kernel: &BandKernel,
    omega: f64,
    n: usize,
    sign: Sign,
    depth: usize,
) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::Domain("gamma_chain requires n >= 1".into()));
    }
    let w = kernel.drive.omega_drive;
    let s = sign.factor();
    let mut product = cf_iterate(kernel, omega, depth)?.b;
    for k in 1..=n {
        let here = cf_iterate(kernel, omega + s * (k - 1) as f64 * w, depth)?;
        let c = match sign {
            Sign::Plus => here.c_plus,
            Sign::Minus => here.c_minus,
        };
        let next = cf_iterate(kernel, omega + s * k as f64 * w, depth)?.b;
        product = product * c * next;
    }
    Ok(product)
}

/// Which route produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodTag {
    ContinuedFraction,
    TimeDomain,
}

impl MethodTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::ContinuedFraction => "continued_fraction",
            MethodTag::TimeDomain => "time_domain",
        }
    }
}

/// Complex response samples on a frequency grid, with method metadata.
#[derive(Debug, Clone)]
pub struct ResponseSpectrum {
    pub grid: Vec<f64>,
    /// full contraction K(ω)
    pub values: Vec<Complex64>,
    /// translation-invariant part B(ω) (equals `values` for the time-domain
    /// route, which has no band decomposition)
    pub diagonal: Vec<Complex64>,
    pub depth: usize,
    pub gamma_used: f64,
    pub n_gamma_terms: usize,
    pub drive: DriveSpec,
    pub method: MethodTag,
}

impl ResponseSpectrum {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    fn check_grid(grid: &[f64]) -> Result<()> {
        if grid.len() < 2 {
            return Err(Error::Domain("frequency grid needs at least 2 points".into()));
        }
        if !grid.windows(2).all(|p| p[1] > p[0]) {
            return Err(Error::Domain("frequency grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Assemble `K(ω) = B(ω) + Σ_{n=1..n_gamma, σ=±} Γₙ(ω, σw)` over a grid.
///
/// The chain elements are the exact off-diagonal resolvent elements of the
/// windowed solve (the product form of [`gamma_chain`] factorizes them only
/// approximately and can manufacture spurious structure at zeros of interior
/// diagonals). Grid points are independent; evaluation is parallel and each
/// point owns its surface tables.
pub fn assemble_response(
    kernel: &BandKernel,
    grid: &[f64],
    depth: usize,
    n_gamma: usize,
) -> Result<ResponseSpectrum> {
    if depth < 1 {
        return Err(Error::Domain("assemble_response requires depth >= 1".into()));
    }
    ResponseSpectrum::check_grid(grid)?;
    let pairs: Vec<(Complex64, Complex64)> = grid
        .par_iter()
        .map(|&omega| -> Result<(Complex64, Complex64)> {
            let state = CfState::build(kernel, omega, depth, n_gamma)?;
            let b = state.b(0);
            let mut k_val = b;
            for n in 1..=n_gamma as i64 {
                k_val += state.row_element(n) + state.row_element(-n);
            }
            Ok((k_val, b))
        })
        .collect::<Result<_>>()?;
    Ok(ResponseSpectrum {
        grid: grid.to_vec(),
        values: pairs.iter().map(|p| p.0).collect(),
        diagonal: pairs.iter().map(|p| p.1).collect(),
        depth,
        gamma_used: kernel.reg.gamma,
        n_gamma_terms: n_gamma,
        drive: kernel.drive.clone(),
        method: MethodTag::ContinuedFraction,
    })
}

/// Diagonal and off-diagonal bands of the inverse of the truncated lattice
/// matrix, plus a condition estimate.
#[derive(Debug, Clone)]
pub struct LatticeInverse {
    pub lattice: FrequencyLattice,
    /// `G[k,k]` for k = −span..span
    pub diagonal: Vec<Complex64>,
    /// `G[k,k+1]` for k = −span..span−1
    pub hop1: Vec<Complex64>,
    /// `G[k,k+2]` for k = −span..span−2
    pub hop2: Vec<Complex64>,
    pub condition: f64,
}

impl LatticeInverse {
    pub fn center_diagonal(&self) -> Complex64 {
        self.diagonal[self.diagonal.len() / 2]
    }
}

/// Build the `(2·span+1)`-dimensional lattice matrix around `omega0` and
/// invert it by dense LU with partial pivoting.
///
/// Independent of the surface recursion in every step: same matrix, different
/// factorization. Disagreement between the two routes is a build failure.
pub fn lattice_matrix_inverse(
    kernel: &BandKernel,
    omega0: f64,
    span: usize,
) -> Result<LatticeInverse> {
    if span < 4 {
        return Err(Error::Domain(format!("span must be at least 4, got {span}")));
    }
    let lattice = FrequencyLattice::new(omega0, kernel.drive.omega_drive, span)?;
    let n = 2 * span + 1;
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let e = site_entries(kernel, &lattice, i as i64 - span as i64)?;
        m[i * n + i] = e.diag;
        if i + 1 < n {
            m[i * n + i + 1] = e.up1;
        }
        if i >= 1 {
            m[i * n + i - 1] = e.dn1;
        }
        if i + 2 < n {
            m[i * n + i + 2] = e.up2;
        }
        if i >= 2 {
            m[i * n + i - 2] = e.dn2;
        }
    }
    let norm_m = one_norm(&m, n);
    let inv = dense_inverse(m, n)?;
    let condition = norm_m * one_norm(&inv, n);
    if !condition.is_finite() || condition > 1e15 {
        return Err(Error::SingularMatrix { condition });
    }
    let diagonal = (0..n).map(|i| inv[i * n + i]).collect();
    let hop1 = (0..n - 1).map(|i| inv[i * n + i + 1]).collect();
    let hop2 = (0..n - 2).map(|i| inv[i * n + i + 2]).collect();
    Ok(LatticeInverse { lattice, diagonal, hop1, hop2, condition })
}

fn one_norm(m: &[Complex64], n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| m[i * n + j].norm()).sum())
        .fold(0.0f64, f64::max)
}

/// Dense inverse via LU with partial pivoting.
fn dense_inverse(mut a: Vec<Complex64>, n: usize) -> Result<Vec<Complex64>> {
    let mut piv: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let (best, mag) = (col..n)
            .map(|r| (r, a[r * n + col].norm()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag < DENOM_FLOOR {
            return Err(Error::SingularMatrix { condition: f64::INFINITY });
        }
        if best != col {
            for j in 0..n {
                a.swap(col * n + j, best * n + j);
            }
            piv.swap(col, best);
        }
        let pivot = a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] / pivot;
            a[r * n + col] = factor;
            for j in col + 1..n {
                let sub = factor * a[col * n + j];
                a[r * n + j] -= sub;
            }
        }
    }
    // solve A X = I column by column
    let mut inv = vec![Complex64::new(0.0, 0.0); n * n];
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for col in 0..n {
        for (r, &p) in piv.iter().enumerate() {
            x[r] = if p == col { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        }
        for r in 1..n {
            for j in 0..r {
                let sub = a[r * n + j] * x[j];
                x[r] -= sub;
            }
        }
        for r in (0..n).rev() {
            for j in r + 1..n {
                let sub = a[r * n + j] * x[j];
                x[r] -= sub;
            }
            x[r] /= a[r * n + r];
        }
        for r in 0..n {
            inv[r * n + col] = x[r];
        }
    }
    Ok(inv)
}
