//! Steady states and time evolution of the driven Λ system.
//!
//! The steady state is obtained by a direct linear solve of B ρ⃗ = −I⃗.
//! Where the generator is genuinely singular the steady state depends on
//! the initial condition — with no drive every lower-level distribution is
//! stationary — so a reciprocal-condition threshold switches to long-time
//! integration from a fixed, documented initial state (ρ_bb = ρ_cc = 1/2)
//! to keep results reproducible. Trapping points with the drive on stay
//! solvable: the dark state is the unique attractor there and the direct
//! solve lands on it.
//!
//! The integrator is a classical fixed-step fourth-order Runge-Kutta: an
//! 8-dimensional linear system needs no adaptive machinery, and a fixed
//! step keeps the oracle bit-reproducible.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{idx, Liouvillian, ParamField, SigmaVector, SystemParams, CONJ_PAIR, DIM};

/// Reciprocal-condition threshold below which the direct solve is
/// abandoned for the integrator fallback.
pub const RCOND_FALLBACK_THRESHOLD: f64 = 1e-12;

/// Steady upper-level population below which the state counts as dark.
pub const DARK_POPULATION_THRESHOLD: f64 = 1e-8;

/// Tolerances of the steady-state consistency checks. The returned state
/// is conjugate-paired exactly (by projection); the raw-solve gate only
/// catches a genuinely broken factorization, so it sits well above the
/// ε/rcond dirt of legitimately ill-conditioned solves.
const REALNESS_TOL: f64 = 1e-10;
const RAW_PAIRING_GATE: f64 = 1e-8;
const CAUCHY_SCHWARZ_SLACK: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Steady-state expectation values of the tracked operators, plus the
/// reconstructed ρ_bb and solve diagnostics.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub sigma_ss: SigmaVector,
    /// Reconstructed as 1 − ρ_aa − ρ_cc.
    pub rho_bb: f64,
    /// Upper population below [`DARK_POPULATION_THRESHOLD`].
    pub dark: bool,
    /// Reciprocal condition of the generator at these parameters.
    pub condition_estimate: f64,
}

impl SteadyState {
    pub fn rho_aa(&self) -> f64 {
        self.sigma_ss[idx::RHO_AA].re
    }

    pub fn rho_cc(&self) -> f64 {
        self.sigma_ss[idx::RHO_CC].re
    }
}

/// Projects a solved vector onto the Hermiticity-consistent subspace:
/// real populations, conjugate-paired coherences. The exact solution
/// lives there; this strips the antisymmetric part of the solve error.
fn symmetrize(x: &SigmaVector) -> SigmaVector {
    let mut out = *x;
    out[idx::RHO_AA] = Complex64::new(x[idx::RHO_AA].re, 0.0);
    out[idx::RHO_CC] = Complex64::new(x[idx::RHO_CC].re, 0.0);
    for (i, j) in [
        (idx::RHO_AB, idx::RHO_BA),
        (idx::RHO_AC, idx::RHO_CA),
        (idx::RHO_BC, idx::RHO_CB),
    ] {
        let mean = 0.5 * (x[i] + x[j].conj());
        out[i] = mean;
        out[j] = mean.conj();
    }
    out
}

/// Packs a validated solution into a [`SteadyState`], clipping the
/// populations into [0, 1] (the consistency check has already bounded any
/// violation at the 1e−10 level, so this only removes roundoff dust).
fn finalize(x: SigmaVector, rcond: f64) -> SteadyState {
    let mut x = x;
    let rho_aa = x[idx::RHO_AA].re.clamp(0.0, 1.0);
    let rho_cc = x[idx::RHO_CC].re.clamp(0.0, 1.0);
    x[idx::RHO_AA] = Complex64::new(rho_aa, 0.0);
    x[idx::RHO_CC] = Complex64::new(rho_cc, 0.0);
    SteadyState {
        sigma_ss: x,
        rho_bb: (1.0 - rho_aa - rho_cc).clamp(0.0, 1.0),
        dark: rho_aa < DARK_POPULATION_THRESHOLD,
        condition_estimate: rcond,
    }
}

/// Largest deviation from the Hermiticity pairing and from realness of
/// the populations.
pub fn pairing_defect(x: &SigmaVector) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..DIM {
        worst = worst.max((x[i] - x[CONJ_PAIR[i]].conj()).norm());
    }
    worst
        .max(x[idx::RHO_AA].im.abs())
        .max(x[idx::RHO_CC].im.abs())
}

fn check_physical(x: &SigmaVector, rcond: f64, context: &str) -> Result<()> {
    let fail = |details: String| {
        Err(Error::NumericalFailure {
            context: context.to_string(),
            details,
        })
    };
    let raa = x[idx::RHO_AA].re;
    let rcc = x[idx::RHO_CC].re;
    let rbb = 1.0 - raa - rcc;
    for (name, v) in [("rho_aa", raa), ("rho_cc", rcc), ("rho_bb", rbb)] {
        if !(-REALNESS_TOL..=1.0 + REALNESS_TOL).contains(&v) {
            return fail(format!("population {name} = {v} outside [0, 1]"));
        }
    }
    if x[idx::RHO_AA].im.abs() > REALNESS_TOL || x[idx::RHO_CC].im.abs() > REALNESS_TOL {
        return fail(format!(
            "population imaginary residue {:e}/{:e} (rcond {rcond:e})",
            x[idx::RHO_AA].im,
            x[idx::RHO_CC].im
        ));
    }
    // |ρ_mn|² ≤ ρ_mm ρ_nn for each coherence
    let pops = [raa.max(0.0), rbb.max(0.0), rcc.max(0.0)];
    for (i, m, n) in [
        (idx::RHO_AB, 0usize, 1usize),
        (idx::RHO_AC, 0, 2),
        (idx::RHO_BC, 1, 2),
    ] {
        let bound = pops[m] * pops[n] + CAUCHY_SCHWARZ_SLACK;
        if x[i].norm_sqr() > bound {
            return fail(format!(
                "coherence {i} violates |ρ|² ≤ ρρ: {:e} > {:e}",
                x[i].norm_sqr(),
                bound
            ));
        }
    }
    Ok(())
}

/// Computes the steady state of the generator.
///
/// Solves B ρ⃗ = −I⃗ directly while the generator is invertible; at (or
/// numerically near) dark-state singularities it integrates from the
/// canonical mixed lower-level state instead and flags the result dark
/// when the upper population has emptied.
pub fn steady_state(liou: &Liouvillian) -> Result<SteadyState> {
    let rcond = linalg::reciprocal_condition(&liou.b_matrix);
    if rcond > RCOND_FALLBACK_THRESHOLD {
        let mut rhs = [ZERO; DIM];
        for (r, i) in rhs.iter_mut().zip(liou.i_vector.iter()) {
            *r = -*i;
        }
        let x = linalg::solve(&liou.b_matrix, &rhs).ok_or_else(|| Error::NumericalFailure {
            context: "steady_state".into(),
            details: format!("LU solve failed despite rcond {rcond:e}"),
        })?;
        // measure the solve's pairing dirt before projecting it away
        let defect = pairing_defect(&x);
        if defect > RAW_PAIRING_GATE {
            return Err(Error::NumericalFailure {
                context: "steady_state".into(),
                details: format!("pairing defect {defect:e} after solve (rcond {rcond:e})"),
            });
        }
        let x = symmetrize(&x);
        check_physical(&x, rcond, "steady_state")?;
        return Ok(finalize(x, rcond));
    }

    // Singular (dark-state) branch: relax the canonical mixed state
    // ρ_bb = ρ_cc = 1/2 until the generator residual is negligible.
    let mut x = [ZERO; DIM];
    x[idx::RHO_CC] = Complex64::new(0.5, 0.0);
    let dt = liou.default_step();
    let scale = liou.params.rate_scale().max(1.0);
    let tol = 1e-12 * scale;
    let chunk_steps = (50.0 / (liou.params.gamma1 * dt)).ceil() as usize;
    let max_chunks = 400;
    let mut t = 0.0;
    for _ in 0..max_chunks {
        for _ in 0..chunk_steps {
            x = rk4_step(|s| liou.rhs(s), &x, dt);
        }
        t += chunk_steps as f64 * dt;
        let residual = inf_norm(&liou.rhs(&x));
        if residual <= tol {
            let x = symmetrize(&x);
            check_physical(&x, rcond, "steady_state fallback")?;
            return Ok(finalize(x, rcond));
        }
    }
    Err(Error::NumericalFailure {
        context: "steady_state fallback".into(),
        details: format!(
            "no convergence after t = {t:.1}/γ₁ (residual {:e}, rcond {rcond:e})",
            inf_norm(&liou.rhs(&x))
        ),
    })
}

fn inf_norm(x: &SigmaVector) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// One classical fourth-order Runge-Kutta step of dx/dt = f(x).
pub(crate) fn rk4_step<const N: usize>(
    f: impl Fn(&[Complex64; N]) -> [Complex64; N],
    x: &[Complex64; N],
    dt: f64,
) -> [Complex64; N] {
    let k1 = f(x);
    let k2 = f(&axpy(x, &k1, 0.5 * dt));
    let k3 = f(&axpy(x, &k2, 0.5 * dt));
    let k4 = f(&axpy(x, &k3, dt));
    let mut out = *x;
    let w = dt / 6.0;
    for i in 0..N {
        out[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(x: &[Complex64; N], k: &[Complex64; N], h: f64) -> [Complex64; N] {
    let mut out = *x;
    for i in 0..N {
        out[i] += h * k[i];
    }
    out
}

/// A fixed-step trajectory; `states[n]` is the state at time `n·dt`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<SigmaVector>,
}

impl Trajectory {
    pub fn final_state(&self) -> &SigmaVector {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.states.len()).map(move |n| n as f64 * self.dt)
    }
}

fn check_step(liou: &Liouvillian, dt: f64) -> Result<()> {
    let max_dt = liou.max_step();
    if !dt.is_finite() || dt <= 0.0 || dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::StepSize { dt, max_dt });
    }
    Ok(())
}

fn check_initial(initial: &SigmaVector) -> Result<()> {
    let defect = pairing_defect(initial);
    if defect > 1e-9 {
        return Err(Error::InvalidParameter {
            field: "initial",
            reason: format!("not Hermiticity-consistent (defect {defect:e})"),
        });
    }
    let raa = initial[idx::RHO_AA].re;
    let rcc = initial[idx::RHO_CC].re;
    let rbb = 1.0 - raa - rcc;
    for (name, v) in [("rho_aa", raa), ("rho_cc", rcc), ("rho_bb", rbb)] {
        if !(-1e-9..=1.0 + 1e-9).contains(&v) {
            return Err(Error::InvalidParameter {
                field: "initial",
                reason: format!("population {name} = {v} outside [0, 1]"),
            });
        }
    }
    Ok(())
}

fn step_count(t_final: f64, dt: f64) -> usize {
    ((t_final / dt) - 1e-9).ceil().max(0.0) as usize
}

/// Integrates dρ⃗/dt = B ρ⃗ + I⃗ with fixed-step RK4, recording every step.
///
/// The step must satisfy dt ≤ 0.01/max(γ₁+γ₂, Ω₁, Ω₂, |Δ|+|δ|); the
/// initial state must be Hermiticity-consistent with populations in
/// [0, 1]. The stored trajectory ends at the first multiple of dt at or
/// beyond `t_final`.
pub fn time_evolve(
    liou: &Liouvillian,
    initial: &SigmaVector,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    check_step(liou, dt)?;
    check_initial(initial)?;
    let steps = step_count(t_final, dt);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(*initial);
    let mut x = *initial;
    for _ in 0..steps {
        x = rk4_step(|s| liou.rhs(s), &x, dt);
        states.push(x);
    }
    Ok(Trajectory { dt, states })
}

/// Same integration as [`time_evolve`] but keeps only the final state;
/// use for long horizons where storing the path would be wasteful.
pub fn time_evolve_final(
    liou: &Liouvillian,
    initial: &SigmaVector,
    t_final: f64,
    dt: f64,
) -> Result<SigmaVector> {
    check_step(liou, dt)?;
    check_initial(initial)?;
    let mut x = *initial;
    for _ in 0..step_count(t_final, dt) {
        x = rk4_step(|s| liou.rhs(s), &x, dt);
    }
    Ok(x)
}

/// State with all population in the ground level b.
pub fn ground_state_b() -> SigmaVector {
    [ZERO; DIM]
}

/// One row of a parameter sweep. A failed point records its error
/// message instead of aborting the sweep.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub value: f64,
    pub point: std::result::Result<ScanPoint, String>,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanPoint {
    pub rho_aa: f64,
    pub i_tot: f64,
    pub dark: bool,
}

/// Sweeps one parameter over `steps` evenly spaced values and records the
/// steady upper population, the total fluorescence intensity
/// I_tot = π(γ₁+γ₂)ρ_aa, and the dark flag at every point.
///
/// Points are evaluated in parallel; row order follows the sweep values.
pub fn dark_state_scan(
    params: &SystemParams,
    vary: ParamField,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<Vec<ScanRow>> {
    if steps < 1 {
        return Err(Error::InvalidConfig("sweep needs at least 1 step".into()));
    }
    if !from.is_finite() || !to.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "sweep range [{from}, {to}] must be finite"
        )));
    }
    params.validate()?;
    let values: Vec<f64> = if steps == 1 {
        vec![from]
    } else {
        let h = (to - from) / (steps - 1) as f64;
        (0..steps).map(|i| from + h * i as f64).collect()
    };
    Ok(values
        .into_par_iter()
        .map(|value| {
            let point = vary
                .apply(params, value)
                .and_then(|p| {
                    let liou = crate::model::build_liouvillian(&p)?;
                    let ss = steady_state(&liou)?;
                    Ok(ScanPoint {
                        rho_aa: ss.rho_aa(),
                        i_tot: crate::spectrum::total_intensity(&ss, &p),
                        dark: ss.dark,
                    })
                })
                .map_err(|e| e.to_string());
            ScanRow { value, point }
        })
        .collect())
}
