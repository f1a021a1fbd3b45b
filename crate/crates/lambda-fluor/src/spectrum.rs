//! Fluorescence spectra through the quantum regression theorem.
//!
//! The emitted field separates into a coherent δ-peak at the laser
//! frequency, reported as the scalar intensity
//!
//! ```text
//! I_coh = π(γ₁|ρ_ab|² + γ₂|ρ_ac|² + 2p√(γ₁γ₂)·Re(ρ_ab ρ_ca)),
//! ```
//!
//! and an incoherent part driven by steady-state fluctuations. Two-time
//! fluctuation correlations evolve under the same generator B as one-time
//! averages, so the normalized incoherent spectrum at offset ω from the
//! laser reduces to resolvent solves against the initial covariances:
//!
//! ```text
//! S_inc(ω) = Re{ [K V₁]_ab + [K V₂]_ac } / (2π ρ_aa),   K = (iω − B)⁻¹,
//! V₁ = γ₁ R_ab + p√(γ₁γ₂) R_ac,   V₂ = γ₂ R_ac + p√(γ₁γ₂) R_ab.
//! ```
//!
//! The 1/(2π) prefactor fixes the normalization so that the narrow
//! feature's closed-form relative height coincides with the measured,
//! background-subtracted amplitude; with it, the sum-rule constant
//! relating ∫S_inc dω to (I_tot − I_coh)/ρ_aa comes out the same for
//! every parameter set.
//!
//! The δ-peak is never placed on the frequency grid — a distribution
//! cannot be sampled — and every grid value is an offset ω − ω_L in the
//! rotating frame, matching how such spectra are plotted.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{SteadyState, DARK_POPULATION_THRESHOLD};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{idx, operator_product, Liouvillian, SystemParams, DIM, SIGMA_BASIS};

/// Steady-state covariances ⟨δσᵢ δσ_ba⟩ and ⟨δσᵢ δσ_ca⟩ that seed the
/// regression-theorem solves.
#[derive(Debug, Clone)]
pub struct CovariancePair {
    pub r_ab: [Complex64; DIM],
    pub r_ac: [Complex64; DIM],
}

/// Builds both covariance vectors from a steady state. Each entry is
/// ⟨σᵢ σ_t⟩ˢˢ − ⟨σᵢ⟩ˢˢ⟨σ_t⟩ˢˢ with the operator product reduced through
/// the algebra (products hitting |b⟩⟨b| resolve via completeness).
pub fn covariance_init(steady: &SteadyState) -> CovariancePair {
    let x = &steady.sigma_ss;
    let build = |target: usize| {
        let mut r = [Complex64::new(0.0, 0.0); DIM];
        for (i, entry) in r.iter_mut().enumerate() {
            let product = operator_product(SIGMA_BASIS[i], SIGMA_BASIS[target]);
            *entry = product.expectation(x) - x[i] * x[target];
        }
        r
    };
    CovariancePair {
        r_ab: build(idx::RHO_BA),
        r_ac: build(idx::RHO_CA),
    }
}

/// Absolute intensity of the coherent (elastic) peak.
pub fn coherent_intensity(steady: &SteadyState, params: &SystemParams) -> f64 {
    let ab = steady.sigma_ss[idx::RHO_AB];
    let ac = steady.sigma_ss[idx::RHO_AC];
    let ca = steady.sigma_ss[idx::RHO_CA];
    PI * (params.gamma1 * ab.norm_sqr()
        + params.gamma2 * ac.norm_sqr()
        + 2.0 * params.cross_damping() * (ab * ca).re)
}

/// Total fluorescence intensity π(γ₁+γ₂)ρ_aaˢˢ.
pub fn total_intensity(steady: &SteadyState, params: &SystemParams) -> f64 {
    PI * (params.gamma1 + params.gamma2) * steady.rho_aa()
}

/// Sampled incoherent spectrum plus the scalar intensities that go with it.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Frequency offsets ω − ω_L, ascending.
    pub offsets: Vec<f64>,
    /// Normalized incoherent spectral density at each offset.
    pub s_inc: Vec<f64>,
    /// Coherent δ-peak intensity, kept off the grid.
    pub i_coh_abs: f64,
    pub i_tot: f64,
    /// Normalization population; also what the sum rule divides by.
    pub rho_aa_ss: f64,
    /// Parameters the spectrum was computed for.
    pub params: SystemParams,
}

impl SpectrumResult {
    /// Value at the grid point nearest the laser frequency.
    pub fn at_center(&self) -> f64 {
        let i = nearest_index(&self.offsets, 0.0);
        self.s_inc[i]
    }
}

pub(crate) fn nearest_index(offsets: &[f64], target: f64) -> usize {
    let mut best = 0;
    let mut dist = f64::INFINITY;
    for (i, w) in offsets.iter().enumerate() {
        let d = (w - target).abs();
        if d < dist {
            dist = d;
            best = i;
        }
    }
    best
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::GridCoverage("empty frequency grid".into()));
    }
    if grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::GridCoverage("non-finite grid point".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::GridCoverage(
            "grid must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Evaluates the normalized incoherent spectrum on a sorted grid of
/// offsets from the laser frequency.
///
/// Per grid point this assembles iω − B, factorizes once, and solves the
/// two covariance right-hand sides; grid points run in parallel and the
/// output keeps grid order. Fails when the steady upper population is
/// below the fluorescence threshold or when a grid point lands on an
/// undamped mode of the generator.
pub fn incoherent_spectrum(
    liou: &Liouvillian,
    steady: &SteadyState,
    cov: &CovariancePair,
    grid: &[f64],
) -> Result<SpectrumResult> {
    check_grid(grid)?;
    let rho_aa = steady.rho_aa();
    if rho_aa < DARK_POPULATION_THRESHOLD {
        return Err(Error::NoFluorescence {
            rho_aa,
            threshold: DARK_POPULATION_THRESHOLD,
        });
    }
    let params = liou.params;
    let cross = params.cross_damping();
    let mut v1 = [Complex64::new(0.0, 0.0); DIM];
    let mut v2 = [Complex64::new(0.0, 0.0); DIM];
    for i in 0..DIM {
        v1[i] = params.gamma1 * cov.r_ab[i] + cross * cov.r_ac[i];
        v2[i] = params.gamma2 * cov.r_ac[i] + cross * cov.r_ab[i];
    }
    let norm = 1.0 / (2.0 * PI * rho_aa);

    let s_inc: Result<Vec<f64>> = grid
        .par_iter()
        .map(|&omega| {
            let mut resolvent = [[Complex64::new(0.0, 0.0); DIM]; DIM];
            for (r, (row_out, row_b)) in resolvent.iter_mut().zip(liou.b_matrix.iter()).enumerate()
            {
                for (out, b) in row_out.iter_mut().zip(row_b.iter()) {
                    *out = -b;
                }
                row_out[r] += Complex64::new(0.0, omega);
            }
            let (x1, x2) =
                linalg::solve_two(&resolvent, &v1, &v2).ok_or(Error::NumericalFailure {
                    context: "incoherent_spectrum".into(),
                    details: format!("resolvent singular at offset {omega}"),
                })?;
            Ok((x1[idx::RHO_AB] + x2[idx::RHO_AC]).re * norm)
        })
        .collect();

    Ok(SpectrumResult {
        offsets: grid.to_vec(),
        s_inc: s_inc?,
        i_coh_abs: coherent_intensity(steady, &params),
        i_tot: total_intensity(steady, &params),
        rho_aa_ss: rho_aa,
        params,
    })
}

/// Result of the spectral power bookkeeping check.
#[derive(Debug, Clone, Copy)]
pub struct SumRule {
    /// (I_tot − I_coh) / (ρ_aaˢˢ ∫S_inc dω). The same constant for every
    /// parameter set when spectrum, intensities, and steady state are
    /// mutually consistent.
    pub c: f64,
    /// Relative shift of `c` when the grid is coarsened by a factor two.
    pub residual: f64,
    /// The quadrature value ∫S_inc dω itself.
    pub integral: f64,
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

fn every_other(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..n).step_by(2).collect();
    if *out.last().unwrap() != n - 1 {
        out.push(n - 1);
    }
    out
}

/// Integrates the incoherent spectrum and relates it to the intensity
/// balance I_tot − I_coh.
///
/// Requires the grid to reach at least ten times the largest rate scale
/// on each side and to resolve the predicted narrow feature. The
/// returned constant is dimensionless and parameter-independent; its
/// grid-halving residual quantifies quadrature convergence.
pub fn sum_rule_check(spectrum: &SpectrumResult) -> Result<SumRule> {
    let params = &spectrum.params;
    let needed = 10.0
        * params
            .omega1
            .max(params.omega2)
            .max(params.detuning.abs())
            .max(params.gamma1)
            .max(params.gamma2);
    let left = -spectrum.offsets.first().copied().unwrap_or(0.0);
    let right = spectrum.offsets.last().copied().unwrap_or(0.0);
    if left < needed * (1.0 - 1e-9) || right < needed * (1.0 - 1e-9) {
        return Err(Error::GridCoverage(format!(
            "sum rule needs ±{needed} around the laser, grid spans [{}, {}]",
            -left, right
        )));
    }
    if let Some(width) = narrow_width_scale(params) {
        let inside = spectrum.offsets.iter().filter(|w| w.abs() <= width).count();
        if inside < 5 {
            return Err(Error::GridCoverage(format!(
                "narrow feature of scale {width:e} not resolved ({inside} points inside)"
            )));
        }
    }

    let integral = trapezoid(&spectrum.offsets, &spectrum.s_inc);
    let coarse_idx = every_other(spectrum.offsets.len());
    let xc: Vec<f64> = coarse_idx.iter().map(|&i| spectrum.offsets[i]).collect();
    let yc: Vec<f64> = coarse_idx.iter().map(|&i| spectrum.s_inc[i]).collect();
    let integral_coarse = trapezoid(&xc, &yc);

    let numerator = spectrum.i_tot - spectrum.i_coh_abs;
    let c = numerator / (spectrum.rho_aa_ss * integral);
    let c_coarse = numerator / (spectrum.rho_aa_ss * integral_coarse);
    Ok(SumRule {
        c,
        residual: ((c - c_coarse) / c).abs(),
        integral,
    })
}

/// Expected width scale of the narrow central feature, generalized to
/// mildly asymmetric parameters through quadratic means. `None` when the
/// parameters predict no narrow feature (zero splitting or no drive).
pub fn narrow_width_scale(params: &SystemParams) -> Option<f64> {
    let gamma = 0.5 * (params.gamma1 + params.gamma2);
    let omega_sq = 0.5 * (params.omega1 * params.omega1 + params.omega2 * params.omega2);
    let delta_sq = params.detuning * params.detuning;
    let split_sq = params.splitting * params.splitting;
    if omega_sq <= 0.0 || split_sq <= 0.0 {
        return None;
    }
    let width = 2.0 * gamma * (split_sq / omega_sq) * (delta_sq + gamma * gamma + 2.0 * omega_sq)
        / (delta_sq + gamma * gamma + 4.0 * omega_sq);
    Some(width.min(gamma))
}

/// Uniform symmetric grid of offsets covering [−span, span].
/// Odd point counts place a point exactly at the laser frequency.
pub fn uniform_grid(span: f64, points: usize) -> Result<Vec<f64>> {
    if !span.is_finite() || span <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "grid span must be finite and > 0, got {span}"
        )));
    }
    if points < 3 {
        return Err(Error::InvalidConfig(format!(
            "grid needs at least 3 points, got {points}"
        )));
    }
    let mid = (points - 1) as f64 / 2.0;
    let h = 2.0 * span / (points - 1) as f64;
    Ok((0..points).map(|i| (i as f64 - mid) * h).collect())
}

/// Merges a logarithmically spaced insert around the laser frequency into
/// an existing grid so the narrow central feature is resolved. The insert
/// covers |ω| ≤ 50× the predicted width with about a thousand points per
/// side, reaching three decades below the width itself.
pub fn with_center_refinement(grid: Vec<f64>, params: &SystemParams) -> Vec<f64> {
    let span = grid.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let gamma = 0.5 * (params.gamma1 + params.gamma2);
    let width = narrow_width_scale(params).unwrap_or(1e-3 * gamma);
    let hi = (50.0 * width).min(0.5 * span);
    let lo = (1e-3 * width).min(hi * 1e-2);
    if hi <= 0.0 || lo <= 0.0 {
        return grid;
    }
    let per_side = 1000usize;
    let ratio = hi / lo;
    let mut merged = grid;
    merged.push(0.0);
    for k in 0..=per_side {
        let x = lo * ratio.powf(k as f64 / per_side as f64);
        merged.push(x);
        merged.push(-x);
    }
    sort_dedupe(merged)
}

/// Merges logarithmic inserts around every spectral line of the
/// generator: each eigenvalue contributes a Lorentzian centered at its
/// frequency with its decay rate as width, and slow modes can hide
/// structures far finer than any uniform spacing. Quadrature-grade grids
/// (the sum rule) need this; plotting grids usually do not.
pub fn with_mode_refinement(grid: Vec<f64>, liou: &Liouvillian) -> Vec<f64> {
    let span = grid.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let mut merged = grid;
    for ev in crate::linalg::embedded_eigenvalues(&liou.b_matrix) {
        let width = ev.re.abs().max(1e-12);
        let center = ev.im;
        if center.abs() > span {
            continue;
        }
        // ~55 points per decade over [width/100, 100·width] each side
        let lo = 0.01 * width;
        let steps = 220usize;
        for k in 0..=steps {
            let d = lo * 1e4f64.powf(k as f64 / steps as f64);
            merged.push(center + d);
            merged.push(center - d);
        }
        merged.push(center);
    }
    sort_dedupe(merged)
        .into_iter()
        .filter(|w| w.abs() <= span)
        .collect()
}

/// Extends a grid with logarithmically spaced tail points out to
/// `outer_span` on both sides, for quadrature over slowly decaying wings.
pub fn with_log_tails(grid: Vec<f64>, outer_span: f64, points_per_side: usize) -> Vec<f64> {
    let inner = grid.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if outer_span <= inner || points_per_side == 0 {
        return sort_dedupe(grid);
    }
    let ratio = outer_span / inner;
    let mut merged = grid;
    for k in 1..=points_per_side {
        let x = inner * ratio.powf(k as f64 / points_per_side as f64);
        merged.push(x);
        merged.push(-x);
    }
    sort_dedupe(merged)
}

fn sort_dedupe(mut grid: Vec<f64>) -> Vec<f64> {
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();
    grid
}
