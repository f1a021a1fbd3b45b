//! Acceptance and invariant checks, runnable in-process.
//!
//! Every check pins its tolerance in code and reports a one-line verdict
//! with the measured numbers, so the same suite backs both the `validate`
//! subcommand and the acceptance test target. Randomized checks use a
//! fixed seed; the whole suite is deterministic.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{
    closed_form_population, count_sidebands, measure_peak, narrow_peak_prediction,
    optimal_detuning, InterferenceLimit, PeakReport,
};
use crate::config::RunConfig;
use crate::dynamics::{dark_state_scan, pairing_defect, rk4_step, steady_state, time_evolve_final};
use crate::error::Result;
use crate::linalg;
use crate::model::{
    build_liouvillian, idx, level_swap_basis, rho_bb_rate, Liouvillian, ParamField, SigmaVector,
    SystemParams, CONJ_PAIR, DIM,
};
use crate::spectrum::{
    coherent_intensity, covariance_init, incoherent_spectrum, sum_rule_check, uniform_grid,
    with_center_refinement, with_log_tails, with_mode_refinement, CovariancePair, SpectrumResult,
};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct Check {
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.detail
        )
    }
}

fn narrow_feature_params() -> SystemParams {
    SystemParams::symmetric(1.0, 3.0, 0.0, 0.1, 1.0).expect("valid")
}

fn computed_spectrum(params: &SystemParams, span: f64, refine: bool) -> Result<SpectrumResult> {
    let liou = build_liouvillian(params)?;
    let ss = steady_state(&liou)?;
    let cov = covariance_init(&ss);
    let grid = uniform_grid(span, 4001)?;
    let grid = if refine {
        with_center_refinement(grid, params)
    } else {
        grid
    };
    incoherent_spectrum(&liou, &ss, &cov, &grid)
}

fn quadrature_spectrum(params: &SystemParams) -> Result<SpectrumResult> {
    let liou = build_liouvillian(params)?;
    let ss = steady_state(&liou)?;
    let cov = covariance_init(&ss);
    let span = 10.0
        * params
            .omega1
            .max(params.omega2)
            .max(params.detuning.abs())
            .max(params.gamma1)
            .max(params.gamma2);
    let grid = uniform_grid(span, 4001)?;
    let grid = with_center_refinement(grid, params);
    let grid = with_mode_refinement(grid, &liou);
    let grid = with_log_tails(grid, 2000.0, 600);
    incoherent_spectrum(&liou, &ss, &cov, &grid)
}

fn within(measured: f64, target: f64, rel: f64) -> bool {
    (measured - target).abs() <= rel * target.abs()
}

fn fail_from_error(id: &'static str, err: impl std::fmt::Display) -> Check {
    Check {
        id,
        passed: false,
        detail: format!("errored: {err}"),
    }
}

/// Central-feature reproduction at strong symmetric drive: the measured
/// amplitude and width must land on the reference values 0.365 (±10%)
/// and 0.0011 (±20%).
pub fn criterion_1_narrow_peak() -> Check {
    const ID: &str = "criterion-1-narrow-peak";
    let report = match computed_spectrum(&narrow_feature_params(), 30.0, true)
        .and_then(|s| measure_peak(&s))
    {
        Ok(r) => r,
        Err(e) => return fail_from_error(ID, e),
    };
    let amplitude_ok = within(report.amplitude_measured, 0.365, 0.10);
    let width_ok = within(report.fwhm_measured, 0.0011, 0.20);
    Check {
        id: ID,
        passed: amplitude_ok && width_ok,
        detail: format!(
            "A = {:.4} (0.365 ± 10%), Γ = {:.4e} (0.0011 ± 20%)",
            report.amplitude_measured, report.fwhm_measured
        ),
    }
}

fn measured_peak_at(detuning: f64, span: f64) -> Result<PeakReport> {
    let params = SystemParams {
        detuning,
        ..narrow_feature_params()
    };
    measure_peak(&computed_spectrum(&params, span, true)?)
}

/// At the optimal detuning √17.01 the feature grows to 17.951 (±5%) with
/// width 0.0015 (±20%), and its relative intensity A·Γ exceeds the
/// zero-detuning one by more than 50×.
pub fn criterion_2_optimal_detuning() -> Check {
    const ID: &str = "criterion-2-optimal-detuning";
    let at_zero = match measured_peak_at(0.0, 30.0) {
        Ok(r) => r,
        Err(e) => return fail_from_error(ID, e),
    };
    let at_max = match measured_peak_at(17.01f64.sqrt(), 45.0) {
        Ok(r) => r,
        Err(e) => return fail_from_error(ID, e),
    };
    let amplitude_ok = within(at_max.amplitude_measured, 17.951, 0.05);
    let width_ok = within(at_max.fwhm_measured, 0.0015, 0.20);
    let ratio = (at_max.amplitude_measured * at_max.fwhm_measured)
        / (at_zero.amplitude_measured * at_zero.fwhm_measured);
    Check {
        id: ID,
        passed: amplitude_ok && width_ok && ratio > 50.0,
        detail: format!(
            "A = {:.3} (17.951 ± 5%), Γ = {:.4e} (0.0015 ± 20%), intensity ratio = {:.1} (> 50)",
            at_max.amplitude_measured, at_max.fwhm_measured, ratio
        ),
    }
}

/// Dark-state suppression at weak drive and tiny splitting: populations
/// against their closed forms, and the interference-on/off contrast.
pub fn criterion_3_dark_state_suppression() -> Check {
    const ID: &str = "criterion-3-dark-state-suppression";
    let run = || -> Result<(f64, f64)> {
        let mut rho = [0.0; 2];
        for (k, p) in [0.0, 1.0].into_iter().enumerate() {
            let params = SystemParams::symmetric(1.0, 0.2, 0.0, 1e-3, p)?;
            let liou = build_liouvillian(&params)?;
            rho[k] = steady_state(&liou)?.rho_aa();
        }
        Ok((rho[0], rho[1]))
    };
    let (p0, p1) = match run() {
        Ok(v) => v,
        Err(e) => return fail_from_error(ID, e),
    };
    let p1_ok = (p1 - 0.037037).abs() <= 1e-6;
    let p0_ok = within(p0, 2.5e-5, 0.05);
    let ratio = p1 / p0;
    Check {
        id: ID,
        passed: p1_ok && p0_ok && ratio > 1e3,
        detail: format!(
            "ρ_aa(p=1) = {p1:.8} (0.037037 ± 1e−6), ρ_aa(p=0) = {p0:.3e} (2.5e−5 ± 5%), \
             ratio = {ratio:.0} (> 1000)"
        ),
    }
}

fn linspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![from];
    }
    let h = (to - from) / (n - 1) as f64;
    (0..n).map(|i| from + h * i as f64).collect()
}

/// Steady-state solver against the symmetric-regime closed forms over a
/// 5×5×5 grid of drive, detuning, and splitting, both interference
/// limits, at relative 1e−6.
pub fn criterion_4_closed_form_agreement() -> Check {
    const ID: &str = "criterion-4-closed-form-agreement";
    let mut worst = (0.0f64, String::new());
    for &omega in &linspace(0.5, 5.0, 5) {
        for &delta in &linspace(0.0, 4.0, 5) {
            for &split in &linspace(0.01, 0.5, 5) {
                for (p, limit) in [
                    (1.0, InterferenceLimit::Maximal),
                    (0.0, InterferenceLimit::None),
                ] {
                    let step = || -> Result<f64> {
                        let params = SystemParams::symmetric(1.0, omega, delta, split, p)?;
                        let solver = steady_state(&build_liouvillian(&params)?)?.rho_aa();
                        let oracle = closed_form_population(&params, limit)?;
                        Ok(((solver - oracle) / oracle).abs())
                    };
                    match step() {
                        Ok(dev) => {
                            if dev > worst.0 {
                                worst = (dev, format!("Ω={omega}, Δ={delta}, δ={split}, p={p}"));
                            }
                        }
                        Err(e) => return fail_from_error(ID, e),
                    }
                }
            }
        }
    }
    Check {
        id: ID,
        passed: worst.0 <= 1e-6,
        detail: format!(
            "worst relative deviation {:.2e} at {} (≤ 1e−6 over 250 points)",
            worst.0, worst.1
        ),
    }
}

/// Sideband counting: two pairs at partial interference, one pair at
/// maximal interference.
pub fn criterion_5_sideband_counts() -> Check {
    const ID: &str = "criterion-5-sideband-counts";
    let count_at = |p: f64| -> Result<usize> {
        let params = SystemParams::symmetric(1.0, 4.0, 0.0, 0.5, p)?;
        Ok(count_sidebands(&computed_spectrum(&params, 40.0, false)?))
    };
    let (at_08, at_10) = match (count_at(0.8), count_at(1.0)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail_from_error(ID, e),
    };
    Check {
        id: ID,
        passed: at_08 == 2 && at_10 == 1,
        detail: format!("pairs(p=0.8) = {at_08} (expect 2), pairs(p=1) = {at_10} (expect 1)"),
    }
}

/// Center contrast with and without interference at weak drive.
///
/// The p=1 spectrum's middle structure is suppressed — its center is a
/// local minimum — but the pointwise ratio at these parameters computes
/// to ≈ 4.4 (confirmed by an independent time-domain oracle), not the
/// stated 10. The check asserts the stated bound and reports honestly.
pub fn criterion_5_center_contrast() -> Check {
    const ID: &str = "criterion-5-center-contrast";
    let center_at = |p: f64| -> Result<f64> {
        let params = SystemParams::symmetric(1.0, 0.2, 0.0, 0.1, p)?;
        let liou = build_liouvillian(&params)?;
        let ss = steady_state(&liou)?;
        let cov = covariance_init(&ss);
        let grid = uniform_grid(2.0, 5)?;
        Ok(incoherent_spectrum(&liou, &ss, &cov, &grid)?.at_center())
    };
    let (s0, s1) = match (center_at(0.0), center_at(1.0)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail_from_error(ID, e),
    };
    let ratio = s0 / s1;
    Check {
        id: ID,
        passed: ratio > 10.0,
        detail: format!(
            "S(ω_L; p=0)/S(ω_L; p=1) = {s0:.4}/{s1:.4} = {ratio:.2} (stated bound > 10; \
             the p=1 center is a local minimum, but the pointwise ratio here is ~4.4)"
        ),
    }
}

/// The constant relating ∫S_inc dω to (I_tot − I_coh)/ρ_aa must agree
/// across parameter sets to 0.5% and move < 0.1% under grid coarsening.
pub fn criterion_6_sum_rule_constancy() -> Check {
    const ID: &str = "criterion-6-sum-rule-constancy";
    let sets = [
        SystemParams::symmetric(1.0, 4.0, 0.0, 0.5, 0.8),
        SystemParams::new(1.0, 1.0, 3.0, 4.0, 2.0, 0.1, 1.0),
        SystemParams::symmetric(1.0, 3.0, 0.0, 0.1, 1.0),
    ];
    let mut cs = Vec::new();
    let mut residuals = Vec::new();
    for params in sets {
        let sum = match params
            .and_then(|p| quadrature_spectrum(&p))
            .and_then(|s| sum_rule_check(&s))
        {
            Ok(s) => s,
            Err(e) => return fail_from_error(ID, e),
        };
        cs.push(sum.c);
        residuals.push(sum.residual);
    }
    let c_min = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_max = cs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (c_max - c_min) / c_min;
    let worst_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Check {
        id: ID,
        passed: spread <= 5e-3 && worst_residual <= 1e-3,
        detail: format!(
            "c = [{:.5}, {:.5}, {:.5}], spread = {:.2e} (≤ 5e−3), worst halving shift = \
             {:.2e} (≤ 1e−3)",
            cs[0], cs[1], cs[2], spread, worst_residual
        ),
    }
}

/// One random, gap-checked parameter draw for the oracle-equivalence run.
/// Equilibration to 1e−6 within t = 10³ needs a spectral gap; a near-dark
/// draw cannot converge there under any correct integrator.
fn draw_params(rng: &mut ChaCha8Rng) -> (SystemParams, usize) {
    let mut rejected = 0;
    loop {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let params = SystemParams::new(
            rng.random_range(0.6..1.4),
            rng.random_range(0.6..1.4),
            rng.random_range(0.4..2.2),
            rng.random_range(0.4..2.2),
            rng.random_range(-1.5..1.5),
            sign * rng.random_range(0.3..1.0),
            rng.random_range(0.0..0.99),
        )
        .expect("ranges satisfy the invariants");
        let liou = build_liouvillian(&params).expect("validated");
        let gap = -linalg::spectral_abscissa(&liou.b_matrix);
        let rcond = linalg::reciprocal_condition(&liou.b_matrix);
        if gap >= 0.035 && rcond >= 1e-9 {
            return (params, rejected);
        }
        rejected += 1;
    }
}

fn random_pure_state(rng: &mut ChaCha8Rng) -> SigmaVector {
    let mut amp = [Complex64::new(0.0, 0.0); 3];
    let mut norm = 0.0;
    for a in amp.iter_mut() {
        *a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        norm += a.norm_sqr();
    }
    let scale = norm.sqrt().recip();
    for a in amp.iter_mut() {
        *a *= scale;
    }
    let (a, b, c) = (amp[0], amp[1], amp[2]);
    let mut x = [Complex64::new(0.0, 0.0); DIM];
    x[idx::RHO_AA] = Complex64::new(a.norm_sqr(), 0.0);
    x[idx::RHO_CC] = Complex64::new(c.norm_sqr(), 0.0);
    x[idx::RHO_AB] = a * b.conj();
    x[idx::RHO_BA] = x[idx::RHO_AB].conj();
    x[idx::RHO_AC] = a * c.conj();
    x[idx::RHO_CA] = x[idx::RHO_AC].conj();
    x[idx::RHO_BC] = b * c.conj();
    x[idx::RHO_CB] = x[idx::RHO_BC].conj();
    x
}

struct DrawOutcome {
    max_component_error: f64,
    max_pairing_drift: f64,
    max_trace_drift: f64,
}

/// Integrates the 9-component system — the tracked eight plus ρ_bb from
/// its own equation of motion — and monitors the Hermiticity pairing and
/// the reconstructed trace along the way. Drifts are normalized per unit
/// γ₁t.
fn audit_trajectory(liou: &Liouvillian, initial: &SigmaVector, t_final: f64) -> (f64, f64) {
    let params = liou.params;
    let dt = liou.max_step();
    let steps = (t_final / dt).ceil() as usize;
    let mut state = [Complex64::new(0.0, 0.0); 9];
    state[..DIM].copy_from_slice(initial);
    let rho_bb0 = 1.0 - initial[idx::RHO_AA].re - initial[idx::RHO_CC].re;
    state[DIM] = Complex64::new(rho_bb0, 0.0);

    let rhs9 = |x: &[Complex64; 9]| -> [Complex64; 9] {
        let mut eight = [Complex64::new(0.0, 0.0); DIM];
        eight.copy_from_slice(&x[..DIM]);
        let dx = liou.rhs(&eight);
        let mut out = [Complex64::new(0.0, 0.0); 9];
        out[..DIM].copy_from_slice(&dx);
        out[DIM] = rho_bb_rate(&params, &eight);
        out
    };

    let mut max_pairing = 0.0f64;
    let mut max_trace = 0.0f64;
    for step in 1..=steps {
        state = rk4_step(rhs9, &state, dt);
        if step % 64 == 0 || step == steps {
            let t = step as f64 * dt;
            let allowance = (params.gamma1 * t).max(1.0);
            let mut eight = [Complex64::new(0.0, 0.0); DIM];
            eight.copy_from_slice(&state[..DIM]);
            let trace = state[idx::RHO_AA] + state[idx::RHO_CC] + state[DIM];
            max_pairing = max_pairing.max(pairing_defect(&eight) / allowance);
            max_trace = max_trace.max((trace - Complex64::new(1.0, 0.0)).norm() / allowance);
        }
    }
    (max_pairing, max_trace)
}

/// 100 seeded random draws: the long-time integrator endpoint must agree
/// with the direct steady-state solve to 1e−6 per component, and the
/// integrator must preserve the Hermiticity pairing and the reconstructed
/// trace to 1e−9 per unit γ₁t.
pub fn criterion_7_oracle_equivalence() -> Check {
    const ID: &str = "criterion-7-oracle-equivalence";
    let mut rng = ChaCha8Rng::seed_from_u64(0x4c61_6d62);
    let mut draws = Vec::with_capacity(100);
    let mut rejected_total = 0;
    for _ in 0..100 {
        let (params, rejected) = draw_params(&mut rng);
        rejected_total += rejected;
        draws.push((params, random_pure_state(&mut rng)));
    }

    let outcomes: Vec<std::result::Result<DrawOutcome, String>> = draws
        .par_iter()
        .map(|(params, initial)| {
            let run = || -> Result<DrawOutcome> {
                let liou = build_liouvillian(params)?;
                let ss = steady_state(&liou)?;
                let final_state = time_evolve_final(&liou, initial, 1000.0, liou.max_step())?;
                let err = final_state
                    .iter()
                    .zip(ss.sigma_ss.iter())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0f64, f64::max);
                let (pairing, trace) = audit_trajectory(&liou, initial, 100.0);
                Ok(DrawOutcome {
                    max_component_error: err,
                    max_pairing_drift: pairing,
                    max_trace_drift: trace,
                })
            };
            run().map_err(|e| e.to_string())
        })
        .collect();

    let mut worst = DrawOutcome {
        max_component_error: 0.0,
        max_pairing_drift: 0.0,
        max_trace_drift: 0.0,
    };
    for outcome in outcomes {
        match outcome {
            Ok(o) => {
                worst.max_component_error = worst.max_component_error.max(o.max_component_error);
                worst.max_pairing_drift = worst.max_pairing_drift.max(o.max_pairing_drift);
                worst.max_trace_drift = worst.max_trace_drift.max(o.max_trace_drift);
            }
            Err(e) => return fail_from_error(ID, e),
        }
    }
    Check {
        id: ID,
        passed: worst.max_component_error <= 1e-6
            && worst.max_pairing_drift <= 1e-9
            && worst.max_trace_drift <= 1e-9,
        detail: format!(
            "100 draws ({rejected_total} gap-rejected): worst |solve − evolve| = {:.2e} \
             (≤ 1e−6), pairing drift = {:.2e}, trace drift = {:.2e} (≤ 1e−9 per γ₁t)",
            worst.max_component_error, worst.max_pairing_drift, worst.max_trace_drift
        ),
    }
}

/// Level-swap symmetry of the generator and the spectrum, and the
/// algebraic identities of the narrow-peak closed forms.
#[allow(clippy::needless_range_loop)] // permutation algebra reads best indexed
pub fn criterion_8_symmetry_suite() -> Check {
    const ID: &str = "criterion-8-symmetry-suite";
    let mut rng = ChaCha8Rng::seed_from_u64(0x5379_6d6d);
    let (p_mat, e_vec) = level_swap_basis();

    // exact affine conjugation of the generator under b↔c
    let mut worst_b = 0.0f64;
    for _ in 0..25 {
        let params = SystemParams::new(
            rng.random_range(0.3..2.5),
            rng.random_range(0.3..2.5),
            rng.random_range(0.0..4.0),
            rng.random_range(0.0..4.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.0..1.0),
        )
        .expect("ranges satisfy the invariants");
        let liou = build_liouvillian(&params).expect("validated");
        let swapped = build_liouvillian(&params.relabeled()).expect("validated");
        let scale = params.rate_scale().max(1.0);
        for r in 0..DIM {
            for col in 0..DIM {
                let mut lhs = Complex64::new(0.0, 0.0);
                let mut rhs = Complex64::new(0.0, 0.0);
                for k in 0..DIM {
                    lhs += swapped.b_matrix[r][k] * p_mat[k][col];
                    rhs += p_mat[r][k] * liou.b_matrix[k][col];
                }
                worst_b = worst_b.max((lhs - rhs).norm() / scale);
            }
            let mut lhs = swapped.i_vector[r];
            let mut rhs = Complex64::new(0.0, 0.0);
            for k in 0..DIM {
                lhs += swapped.b_matrix[r][k] * e_vec[k];
                rhs += p_mat[r][k] * liou.i_vector[k];
            }
            worst_b = worst_b.max((lhs - rhs).norm() / scale);
        }
    }

    // pointwise spectrum invariance under the same swap
    let spectrum_pair = || -> Result<f64> {
        let params = SystemParams::new(1.0, 0.7, 1.3, 2.1, 0.8, 0.25, 0.9)?;
        let grid = uniform_grid(25.0, 801)?;
        let mut spectra = Vec::new();
        for pset in [params, params.relabeled()] {
            let liou = build_liouvillian(&pset)?;
            let ss = steady_state(&liou)?;
            let cov = covariance_init(&ss);
            spectra.push(incoherent_spectrum(&liou, &ss, &cov, &grid)?);
        }
        Ok(spectra[0]
            .s_inc
            .iter()
            .zip(spectra[1].s_inc.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    };
    let worst_spec = match spectrum_pair() {
        Ok(v) => v,
        Err(e) => return fail_from_error(ID, e),
    };

    // closed-form identities: width×height product and δ-independence
    let mut worst_product = 0.0f64;
    let mut worst_split_dep = 0.0f64;
    for _ in 0..50 {
        let gamma = rng.random_range(0.5..2.0);
        let omega = rng.random_range(0.5..4.0);
        let detuning = rng.random_range(-3.0..3.0);
        let split = rng.random_range(0.02..0.5);
        let run = || -> Result<(f64, f64)> {
            let a = narrow_peak_prediction(&SystemParams::symmetric(
                gamma, omega, detuning, split, 1.0,
            )?)?;
            let b = narrow_peak_prediction(&SystemParams::symmetric(
                gamma,
                omega,
                detuning,
                split / 2.0,
                1.0,
            )?)?;
            let product_dev = ((a.rel_intensity - a.fwhm * a.height) / a.rel_intensity).abs();
            let split_dev = ((a.rel_intensity - b.rel_intensity) / a.rel_intensity).abs();
            Ok((product_dev, split_dev))
        };
        match run() {
            Ok((pd, sd)) => {
                worst_product = worst_product.max(pd);
                worst_split_dep = worst_split_dep.max(sd);
            }
            Err(e) => return fail_from_error(ID, e),
        }
    }

    Check {
        id: ID,
        passed: worst_b <= 1e-13
            && worst_spec <= 1e-10
            && worst_product <= 1e-12
            && worst_split_dep <= 1e-12,
        detail: format!(
            "generator swap defect = {worst_b:.1e} (≤ 1e−13·scale), spectrum swap defect = \
             {worst_spec:.1e} (≤ 1e−10), width×height vs closed form = {worst_product:.1e}, \
             splitting dependence = {worst_split_dep:.1e} (≤ 1e−12)"
        ),
    }
}

/// Measured width of the narrow feature against the δ² law: log-log slope
/// 2 ± 0.1 over δ ∈ {0.02, 0.05, 0.1}.
pub fn criterion_9_width_scaling() -> Check {
    const ID: &str = "criterion-9-width-scaling";
    let splits = [0.02, 0.05, 0.1];
    let mut logs = Vec::new();
    for &split in &splits {
        let params = SystemParams {
            splitting: split,
            ..narrow_feature_params()
        };
        let width = match computed_spectrum(&params, 30.0, true).and_then(|s| measure_peak(&s)) {
            Ok(r) => r.fwhm_measured,
            Err(e) => return fail_from_error(ID, e),
        };
        logs.push((split.ln(), width.ln()));
    }
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = logs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let slope = logs
        .iter()
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum::<f64>()
        / logs.iter().map(|(x, _)| (x - mean_x).powi(2)).sum::<f64>();
    Check {
        id: ID,
        passed: (slope - 2.0).abs() <= 0.1,
        detail: format!("log-log slope = {slope:.4} (2 ± 0.1)"),
    }
}

/// The measured width against the full closed form (rate prefactor and
/// bracket factor), within 10% in the strong-drive small-splitting regime.
pub fn invariant_width_prefactor() -> Check {
    const ID: &str = "invariant-width-prefactor";
    let mut worst = 0.0f64;
    for split in [0.05, 0.1] {
        let params = SystemParams {
            splitting: split,
            ..narrow_feature_params()
        };
        let measured = match computed_spectrum(&params, 30.0, true).and_then(|s| measure_peak(&s)) {
            Ok(r) => r.fwhm_measured,
            Err(e) => return fail_from_error(ID, e),
        };
        let predicted = match narrow_peak_prediction(&params) {
            Ok(p) => p.fwhm,
            Err(e) => return fail_from_error(ID, e),
        };
        worst = worst.max((measured / predicted - 1.0).abs());
    }
    Check {
        id: ID,
        passed: worst <= 0.10,
        detail: format!("worst measured/closed-form width deviation = {worst:.2e} (≤ 0.1)"),
    }
}

/// Trace-rate cancellation and conjugation pairing of the generator over
/// random parameters and states.
#[allow(clippy::needless_range_loop)] // permutation algebra reads best indexed
pub fn invariant_generator_structure() -> Check {
    const ID: &str = "invariant-generator-structure";
    let mut rng = ChaCha8Rng::seed_from_u64(0x4765_6e21);
    let mut worst_trace = 0.0f64;
    let mut worst_pairing = 0.0f64;
    for _ in 0..50 {
        let params = SystemParams::new(
            rng.random_range(0.3..2.5),
            rng.random_range(0.3..2.5),
            rng.random_range(0.0..4.0),
            rng.random_range(0.0..4.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.0..1.0),
        )
        .expect("ranges satisfy the invariants");
        let liou = build_liouvillian(&params).expect("validated");
        let scale = params.rate_scale().max(1.0);
        for r in 0..DIM {
            for c in 0..DIM {
                let a = liou.b_matrix[r][c];
                let b = liou.b_matrix[CONJ_PAIR[r]][CONJ_PAIR[c]];
                worst_pairing = worst_pairing.max((a - b.conj()).norm() / scale);
            }
        }
        let mut x = [Complex64::new(0.0, 0.0); DIM];
        for entry in x.iter_mut() {
            *entry = Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        }
        let rate = liou.rhs(&x);
        let total = rate[idx::RHO_AA] + rate[idx::RHO_CC] + rho_bb_rate(&params, &x);
        worst_trace = worst_trace.max(total.norm() / scale);
    }
    Check {
        id: ID,
        passed: worst_pairing <= 1e-14 && worst_trace <= 1e-13,
        detail: format!(
            "conjugation-pairing defect = {worst_pairing:.1e}, trace-rate residual = \
             {worst_trace:.1e}"
        ),
    }
}

/// Spectrum linearity in the covariances (tests the resolvent path).
pub fn invariant_spectrum_linearity() -> Check {
    const ID: &str = "invariant-spectrum-linearity";
    let run = || -> Result<f64> {
        let params = narrow_feature_params();
        let liou = build_liouvillian(&params)?;
        let ss = steady_state(&liou)?;
        let cov = covariance_init(&ss);
        let grid = uniform_grid(20.0, 301)?;
        let base = incoherent_spectrum(&liou, &ss, &cov, &grid)?;
        let lambda = 3.5;
        let mut scaled = CovariancePair {
            r_ab: cov.r_ab,
            r_ac: cov.r_ac,
        };
        for i in 0..DIM {
            scaled.r_ab[i] *= lambda;
            scaled.r_ac[i] *= lambda;
        }
        let scaled = incoherent_spectrum(&liou, &ss, &scaled, &grid)?;
        Ok(base
            .s_inc
            .iter()
            .zip(scaled.s_inc.iter())
            .map(|(a, b)| (lambda * a - b).abs() / b.abs().max(1e-12))
            .fold(0.0, f64::max))
    };
    match run() {
        Ok(worst) => Check {
            id: ID,
            passed: worst <= 1e-12,
            detail: format!("worst relative nonlinearity = {worst:.1e} (≤ 1e−12)"),
        },
        Err(e) => fail_from_error(ID, e),
    }
}

/// Closed-form detuning optimum against a numerical sweep of the coherent
/// intensity (the formula is approximate; 10% window).
pub fn invariant_detuning_optimum() -> Check {
    const ID: &str = "invariant-detuning-optimum";
    let run = || -> Result<(f64, f64)> {
        let base = narrow_feature_params();
        let formula = optimal_detuning(&base)?;
        let mut best = (0.0, f64::NEG_INFINITY);
        let mut detuning = 0.0;
        while detuning <= 2.0 * formula {
            let params = SystemParams { detuning, ..base };
            let ss = steady_state(&build_liouvillian(&params)?)?;
            let i_coh = coherent_intensity(&ss, &params);
            if i_coh > best.1 {
                best = (detuning, i_coh);
            }
            detuning += formula / 400.0;
        }
        Ok((formula, best.0))
    };
    match run() {
        Ok((formula, numeric)) => Check {
            id: ID,
            passed: (numeric - formula).abs() <= 0.10 * formula,
            detail: format!("closed form {formula:.5} vs numerical argmax {numeric:.5} (± 10%)"),
        },
        Err(e) => fail_from_error(ID, e),
    }
}

/// Dark-state scan wiring: closed-form values, dark flag at the exact
/// trapping point, and per-row error capture.
pub fn invariant_scan_behavior() -> Check {
    const ID: &str = "invariant-scan-behavior";
    let unwrap_row = |row: &crate::dynamics::ScanRow| -> Result<crate::dynamics::ScanPoint> {
        row.point
            .clone()
            .map_err(|e| crate::error::Error::NumericalFailure {
                context: "scan row".into(),
                details: e,
            })
    };
    let run = || -> Result<(f64, f64, bool, bool)> {
        let base = SystemParams::symmetric(1.0, 0.2, 0.0, 1e-3, 0.0)?;
        let rows = dark_state_scan(&base, ParamField::P, 0.0, 1.0, 2)?;
        let p0 = unwrap_row(&rows[0])?;
        let p1 = unwrap_row(&rows[1])?;
        let zero = dark_state_scan(&base, ParamField::Splitting, 0.0, 0.0, 1)?;
        let at_zero = unwrap_row(&zero[0])?;
        let bad = dark_state_scan(&base, ParamField::Gamma1, -1.0, -1.0, 1)?;
        Ok((p0.rho_aa, p1.rho_aa, at_zero.dark, bad[0].point.is_err()))
    };
    match run() {
        Ok((p0, p1, dark_at_zero, bad_recorded)) => Check {
            id: ID,
            passed: within(p0, 2.49838e-5, 1e-3)
                && within(p1, 0.037037, 1e-4)
                && dark_at_zero
                && bad_recorded,
            detail: format!(
                "ρ_aa(p=0) = {p0:.4e}, ρ_aa(p=1) = {p1:.6}, dark at δ=0: {dark_at_zero}, \
                 invalid row recorded: {bad_recorded}"
            ),
        },
        Err(e) => fail_from_error(ID, e),
    }
}

/// Config round-trip identity.
pub fn invariant_config_round_trip() -> Check {
    const ID: &str = "invariant-config-round-trip";
    let text = "gamma1 = 1\ngamma2 = 0.75\nomega1 = 3\nomega2 = 3.5\ndetuning = -0.25\n\
                splitting = 0.1\np = 0.9\ngrid.span = 33.5\ngrid.points = 1001\n\
                grid.refine_center = true\noutput.format = csv\n";
    match RunConfig::parse(text) {
        Ok(config) => {
            let echoed = RunConfig::parse(&config.to_text());
            let passed = matches!(&echoed, Ok(e) if *e == config);
            Check {
                id: ID,
                passed,
                detail: if passed {
                    "parse → to_text → parse is the identity".into()
                } else {
                    format!("round trip diverged: {echoed:?}")
                },
            }
        }
        Err(e) => fail_from_error(ID, e),
    }
}

/// Runs the full suite in order: the nine acceptance criteria (criterion
/// 5 contributes two checks), then the module-invariant checks.
pub fn run_all() -> Vec<Check> {
    vec![
        criterion_1_narrow_peak(),
        criterion_2_optimal_detuning(),
        criterion_3_dark_state_suppression(),
        criterion_4_closed_form_agreement(),
        criterion_5_sideband_counts(),
        criterion_5_center_contrast(),
        criterion_6_sum_rule_constancy(),
        criterion_7_oracle_equivalence(),
        criterion_8_symmetry_suite(),
        criterion_9_width_scaling(),
        invariant_width_prefactor(),
        invariant_generator_structure(),
        invariant_spectrum_linearity(),
        invariant_detuning_optimum(),
        invariant_scan_behavior(),
        invariant_config_round_trip(),
    ]
}
