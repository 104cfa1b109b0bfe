//! Frequency-space view of time-domain traces: damped transform, peak
//! detection and peak matching between the two solution routes.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cfrac::{MethodTag, ResponseSpectrum};
use crate::error::{Error, Result};
use crate::oracle::PropagatorTrace;

/// Truncation guard: `e^{−γT}` must be below this before transforming.
const DECAY_LIMIT: f64 = 1e-4;

/// `K(ω) = ∫₀ᵀ e^{iωt} e^{−γt} K(t,0) dt` by trapezoidal accumulation on the
/// trace's own grid, per grid frequency.
pub fn damped_transform(
    trace: &PropagatorTrace,
    gamma: f64,
    omega_grid: &[f64],
) -> Result<ResponseSpectrum> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    if trace.len() < 2 {
        return Err(Error::Domain("trace too short to transform".into()));
    }
    if omega_grid.len() < 2 || !omega_grid.windows(2).all(|p| p[1] > p[0]) {
        return Err(Error::Domain("frequency grid must be strictly increasing, len >= 2".into()));
    }
    let t_end = *trace.times.last().unwrap();
    let decay = (-gamma * t_end).exp();
    if decay >= DECAY_LIMIT {
        return Err(Error::DecayGuard { decay, min_window: -DECAY_LIMIT.ln() / gamma });
    }
    let dt = trace.times[1] - trace.times[0];
    let n = trace.len();
    // damped samples with trapezoid weights
    let damped: Vec<f64> = trace
        .correlator
        .iter()
        .zip(trace.times.iter())
        .enumerate()
        .map(|(i, (k, t))| {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            w * k * (-gamma * t).exp() * dt
        })
        .collect();
    let values: Vec<Complex64> = omega_grid
        .par_iter()
        .map(|&omega| {
            let rot = Complex64::from_polar(1.0, omega * dt);
            let mut phase = Complex64::from_polar(1.0, omega * trace.times[0]);
            let mut acc = Complex64::new(0.0, 0.0);
            for &d in &damped {
                acc += d * phase;
                phase *= rot;
            }
            acc
        })
        .collect();
    Ok(ResponseSpectrum {
        grid: omega_grid.to_vec(),
        diagonal: values.clone(),
        values,
        depth: 0,
        gamma_used: gamma,
        n_gamma_terms: 0,
        drive: trace.drive.clone(),
        method: MethodTag::TimeDomain,
    })
}

/// One detected spectral peak, positions in units of the gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub omega_over_delta: f64,
    pub height: f64,
    pub prominence: f64,
}

/// Peak list of one spectrum inside a window.
#[derive(Debug, Clone)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    pub method_tag: MethodTag,
    pub window: (f64, f64),
}

impl PeakReport {
    pub fn max_prominence(&self) -> f64 {
        self.peaks.iter().map(|p| p.prominence).fold(0.0, f64::max)
    }
}

/// Local maxima of `|K(ω)|` inside `window` whose prominence (height above
/// the higher of the two flanking minima) exceeds `prominence`. Positions are
/// refined by a parabola through the three bins around each maximum.
pub fn find_peaks(
    spec: &ResponseSpectrum,
    prominence: f64,
    window: (f64, f64),
) -> Result<PeakReport> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::EmptyWindow { omega_min: lo, omega_max: hi });
    }
    if !(prominence > 0.0) {
        return Err(Error::Domain(format!("prominence must be positive, got {prominence}")));
    }
    let mag = spec.magnitudes();
    let idx: Vec<usize> = spec
        .grid
        .iter()
        .enumerate()
        .filter(|(_, &g)| g > lo && g < hi)
        .map(|(i, _)| i)
        .collect();
    if idx.is_empty() {
        return Err(Error::EmptyWindow { omega_min: lo, omega_max: hi });
    }
    let (first, last) = (idx[0], *idx.last().unwrap());
    let mut peaks = Vec::new();
    for i in idx {
        if i == 0 || i + 1 >= mag.len() || i == first || i == last {
            continue;
        }
        // plateau-tolerant local maximum
        if !(mag[i] >= mag[i - 1] && mag[i] > mag[i + 1]) {
            continue;
        }
        // walk each side to the lowest point before a higher bar (or the
        // window edge); prominence = height above the higher of the two
        let mut left_min = mag[i];
        for j in (first..i).rev() {
            left_min = left_min.min(mag[j]);
            if mag[j] > mag[i] {
                break;
            }
        }
        let mut right_min = mag[i];
        for j in i + 1..=last {
            right_min = right_min.min(mag[j]);
            if mag[j] > mag[i] {
                break;
            }
        }
        let prom = mag[i] - left_min.max(right_min);
        if prom <= prominence {
            continue;
        }
        // parabolic sub-bin refinement
        let (a, b, c) = (mag[i - 1], mag[i], mag[i + 1]);
        let curvature = a - 2.0 * b + c;
        let shift = if curvature != 0.0 { 0.5 * (a - c) / curvature } else { 0.0 };
        let bin = spec.grid[i + 1] - spec.grid[i];
        peaks.push(Peak {
            omega_over_delta: spec.grid[i] + shift * bin,
            height: b,
            prominence: prom,
        });
    }
    peaks.sort_by(|p, q| p.omega_over_delta.total_cmp(&q.omega_over_delta));
    Ok(PeakReport { peaks, method_tag: spec.method, window })
}

/// One matched pair of peaks and the frequency mismatch.
#[derive(Debug, Clone, Copy)]
pub struct MatchedPair {
    pub a: Peak,
    pub b: Peak,
    pub delta_omega: f64,
}

/// Result of greedy nearest-neighbor peak matching.
#[derive(Debug, Clone)]
pub struct MatchTable {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_a: Vec<Peak>,
    pub unmatched_b: Vec<Peak>,
    /// true when every peak of the higher-prominence report found a partner
    /// within tolerance
    pub success: bool,
}

/// Match two peak reports by frequency, nearest pairs first, each peak used
/// at most once. Success requires every peak of the dominant report (the one
/// holding the single most prominent peak) to be matched within `tol`.
pub fn compare_peaks(a: &PeakReport, b: &PeakReport, tol: f64) -> MatchTable {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, pa) in a.peaks.iter().enumerate() {
        for (j, pb) in b.peaks.iter().enumerate() {
            let d = (pa.omega_over_delta - pb.omega_over_delta).abs();
            if d <= tol {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut used_a = vec![false; a.peaks.len()];
    let mut used_b = vec![false; b.peaks.len()];
    let mut pairs = Vec::new();
    for (d, i, j) in candidates {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        pairs.push(MatchedPair { a: a.peaks[i], b: b.peaks[j], delta_omega: d });
    }
    let unmatched_a: Vec<Peak> =
        a.peaks.iter().zip(&used_a).filter(|(_, &u)| !u).map(|(p, _)| *p).collect();
    let unmatched_b: Vec<Peak> =
        b.peaks.iter().zip(&used_b).filter(|(_, &u)| !u).map(|(p, _)| *p).collect();
    let a_dominant = a.max_prominence() >= b.max_prominence();
    let success = if a_dominant { unmatched_a.is_empty() } else { unmatched_b.is_empty() };
    MatchTable { pairs, unmatched_a, unmatched_b, success }
}
