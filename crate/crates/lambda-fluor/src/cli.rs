//! Command implementations behind the `lambda-fluor` binary.
//!
//! Each command renders its full output as a string (CSV or flat
//! `key = value` text) so runs are byte-reproducible and directly
//! testable; the binary only decides where the bytes go. CSV headers echo
//! the resolved configuration as `# `-prefixed lines, with computed
//! scalars under the `result.` namespace, so a header reparses to the
//! exact `RunConfig` that produced the file.

use std::fmt::Write as _;

use crate::analysis::{measure_peak, optimal_detuning};
use crate::config::{OutputFormat, RunConfig};
use crate::dynamics::{dark_state_scan, steady_state, SteadyState};
use crate::error::{Error, Result};
use crate::model::{build_liouvillian, idx, ParamField, SystemParams};
use crate::spectrum::{
    covariance_init, incoherent_spectrum, uniform_grid, with_center_refinement, SpectrumResult,
};
use crate::validate;

fn config_header(out: &mut String, config: &RunConfig) {
    for line in config.to_text().lines() {
        let _ = writeln!(out, "# {line}");
    }
}

fn steady_for(params: &SystemParams) -> Result<SteadyState> {
    steady_state(&build_liouvillian(params)?)
}

/// Steady-state report: populations, coherences, intensities, dark flag.
pub fn run_steady(config: &RunConfig) -> Result<String> {
    let params = &config.params;
    let ss = steady_for(params)?;
    let i_coh = crate::spectrum::coherent_intensity(&ss, params);
    let i_tot = crate::spectrum::total_intensity(&ss, params);
    let fields: Vec<(&str, String)> = vec![
        ("rho_aa_ss", format!("{}", ss.rho_aa())),
        ("rho_bb_ss", format!("{}", ss.rho_bb)),
        ("rho_cc_ss", format!("{}", ss.rho_cc())),
        ("rho_ab_re", format!("{}", ss.sigma_ss[idx::RHO_AB].re)),
        ("rho_ab_im", format!("{}", ss.sigma_ss[idx::RHO_AB].im)),
        ("rho_ac_re", format!("{}", ss.sigma_ss[idx::RHO_AC].re)),
        ("rho_ac_im", format!("{}", ss.sigma_ss[idx::RHO_AC].im)),
        ("rho_bc_re", format!("{}", ss.sigma_ss[idx::RHO_BC].re)),
        ("rho_bc_im", format!("{}", ss.sigma_ss[idx::RHO_BC].im)),
        ("i_coh_abs", format!("{i_coh}")),
        ("i_tot", format!("{i_tot}")),
        ("dark", format!("{}", ss.dark)),
        ("condition_estimate", format!("{}", ss.condition_estimate)),
    ];
    let mut out = String::new();
    match config.output.format.unwrap_or(OutputFormat::StructuredText) {
        OutputFormat::StructuredText => {
            for (key, value) in fields {
                let _ = writeln!(out, "{key} = {value}");
            }
        }
        OutputFormat::Csv => {
            config_header(&mut out, config);
            let names: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let values: Vec<&str> = fields.iter().map(|(_, v)| v.as_str()).collect();
            let _ = writeln!(out, "{}", names.join(","));
            let _ = writeln!(out, "{}", values.join(","));
        }
    }
    Ok(out)
}

fn spectrum_for(config: &RunConfig) -> Result<SpectrumResult> {
    let params = &config.params;
    let liou = build_liouvillian(params)?;
    let ss = steady_state(&liou)?;
    let cov = covariance_init(&ss);
    let grid = uniform_grid(config.grid.span, config.grid.points)?;
    let grid = if config.grid.refine_center {
        with_center_refinement(grid, params)
    } else {
        grid
    };
    incoherent_spectrum(&liou, &ss, &cov, &grid)
}

/// Incoherent spectrum as CSV: `omega_offset,s_inc` rows in ascending
/// offset, full double precision.
pub fn run_spectrum(config: &RunConfig) -> Result<String> {
    if config.output.format == Some(OutputFormat::StructuredText) {
        return Err(Error::InvalidConfig(
            "the spectrum command emits csv; set output.format = csv or leave it unset".into(),
        ));
    }
    let spectrum = spectrum_for(config)?;
    let mut out = String::new();
    config_header(&mut out, config);
    let _ = writeln!(out, "# result.rho_aa_ss = {}", spectrum.rho_aa_ss);
    let _ = writeln!(out, "# result.i_coh_abs = {}", spectrum.i_coh_abs);
    let _ = writeln!(out, "# result.i_tot = {}", spectrum.i_tot);
    let _ = writeln!(out, "omega_offset,s_inc");
    for (w, s) in spectrum.offsets.iter().zip(spectrum.s_inc.iter()) {
        let _ = writeln!(out, "{w},{s}");
    }
    Ok(out)
}

/// Narrow-feature measurement plus every closed-form prediction that
/// applies at these parameters.
pub fn run_peak(config: &RunConfig) -> Result<String> {
    if config.output.format == Some(OutputFormat::Csv) {
        return Err(Error::InvalidConfig(
            "the peak command emits a structured-text report".into(),
        ));
    }
    let mut peak_config = config.clone();
    peak_config.grid.refine_center = true;
    let spectrum = spectrum_for(&peak_config)?;
    let report = measure_peak(&spectrum)?;
    let mut out = String::new();
    let _ = writeln!(out, "amplitude_measured = {}", report.amplitude_measured);
    let _ = writeln!(out, "fwhm_measured = {}", report.fwhm_measured);
    let _ = writeln!(out, "baseline = {}", report.baseline);
    let _ = writeln!(
        out,
        "rel_intensity_measured = {}",
        report.rel_intensity_measured()
    );
    match &report.prediction {
        Some(p) => {
            let _ = writeln!(out, "fwhm_predicted = {}", p.fwhm);
            let _ = writeln!(out, "amplitude_predicted = {}", p.height);
            let _ = writeln!(out, "rel_intensity_predicted = {}", p.rel_intensity);
        }
        None => {
            for key in [
                "fwhm_predicted",
                "amplitude_predicted",
                "rel_intensity_predicted",
            ] {
                let _ = writeln!(out, "{key} = n/a");
            }
        }
    }
    match optimal_detuning(&config.params) {
        Ok(d) => {
            let _ = writeln!(out, "detuning_optimal = {d}");
        }
        Err(_) => {
            let _ = writeln!(out, "detuning_optimal = n/a");
        }
    }
    Ok(out)
}

/// Sweeps one parameter and emits per-point steady-state observables and
/// the closed-form peak predictions where they apply.
pub fn run_sweep(
    config: &RunConfig,
    vary: &str,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<String> {
    if config.output.format == Some(OutputFormat::StructuredText) {
        return Err(Error::InvalidConfig(
            "the sweep command emits csv; set output.format = csv or leave it unset".into(),
        ));
    }
    let field = ParamField::from_key(vary)?;
    let rows = dark_state_scan(&config.params, field, from, to, steps)?;
    let mut out = String::new();
    config_header(&mut out, config);
    let _ = writeln!(out, "# result.sweep_vary = {vary}");
    let _ = writeln!(out, "# result.sweep_from = {from}");
    let _ = writeln!(out, "# result.sweep_to = {to}");
    let _ = writeln!(out, "# result.sweep_steps = {steps}");
    let _ = writeln!(
        out,
        "{vary},rho_aa_ss,i_tot,dark,fwhm_predicted,amplitude_predicted,error"
    );
    for row in rows {
        match &row.point {
            Ok(point) => {
                let prediction = field
                    .apply(&config.params, row.value)
                    .ok()
                    .and_then(|p| crate::analysis::narrow_peak_prediction(&p).ok());
                let (fwhm, height) = match prediction {
                    Some(p) => (format!("{}", p.fwhm), format!("{}", p.height)),
                    None => (String::new(), String::new()),
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},",
                    row.value, point.rho_aa, point.i_tot, point.dark, fwhm, height
                );
            }
            Err(message) => {
                let sanitized = message.replace(',', ";").replace('\n', " ");
                let _ = writeln!(out, "{},,,,,,{sanitized}", row.value);
            }
        }
    }
    Ok(out)
}

/// Runs the acceptance and invariant suite; the bool reports whether
/// everything passed.
pub fn run_validate() -> (String, bool) {
    let checks = validate::run_all();
    let mut out = String::new();
    let mut all_passed = true;
    for check in &checks {
        let _ = writeln!(out, "{}", check.line());
        all_passed &= check.passed;
    }
    let _ = writeln!(
        out,
        "{} of {} checks passed",
        checks.iter().filter(|c| c.passed).count(),
        checks.len()
    );
    (out, all_passed)
}
