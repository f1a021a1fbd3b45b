//! End-to-end tests of the `lambda-fluor` binary: exit codes, output
//! formats, overrides, and reproducibility.

use std::path::PathBuf;
use std::process::{Command, Output};

const NARROW_FEATURE: &str = "\
gamma1 = 1
gamma2 = 1
omega1 = 3
omega2 = 3
detuning = 0
splitting = 0.1
p = 1
grid.span = 30
grid.points = 2001
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lambda-fluor"))
}

fn write_config(dir: &std::path::Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lambda-fluor-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn steady_reports_the_reference_population() {
    let dir = tempdir("steady");
    let config = write_config(&dir, "narrow.conf", NARROW_FEATURE);
    let output = bin()
        .arg("steady")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let text = stdout_of(&output);
    assert!(text.contains("rho_aa_ss = 0.4734350"), "{text}");
    assert!(text.contains("i_tot = 2.974680"), "{text}");
    assert!(text.contains("dark = false"), "{text}");
}

#[test]
fn steady_dark_point_flags_dark() {
    let dir = tempdir("dark");
    let config = write_config(
        &dir,
        "cpt.conf",
        "gamma1 = 1\ngamma2 = 1\nomega1 = 0.2\nomega2 = 0.2\ndetuning = 0\nsplitting = 0\np = 0\n",
    );
    let output = bin()
        .arg("steady")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let text = stdout_of(&output);
    assert!(text.contains("dark = true"), "{text}");
    assert!(text.contains("i_tot = 0"), "{text}");
}

#[test]
fn steady_without_drive_reports_zeros() {
    let dir = tempdir("undriven");
    let config = write_config(
        &dir,
        "off.conf",
        "gamma1 = 1\ngamma2 = 1\nomega1 = 0\nomega2 = 0\ndetuning = 0\nsplitting = 0.1\np = 0\n",
    );
    let output = bin()
        .arg("steady")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let text = stdout_of(&output);
    assert!(text.contains("rho_aa_ss = 0\n"), "{text}");
    assert!(text.contains("rho_ab_re = 0\n"), "{text}");
    assert!(text.contains("i_coh_abs = 0\n"), "{text}");
    assert!(text.contains("i_tot = 0\n"), "{text}");
    assert!(text.contains("dark = true"), "{text}");
}

#[test]
fn invalid_parameter_exits_2_naming_the_field() {
    let dir = tempdir("badp");
    let config = write_config(
        &dir,
        "bad.conf",
        &NARROW_FEATURE.replace("p = 1", "p = 1.5"),
    );
    let output = bin()
        .arg("steady")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{}", stderr_of(&output));
    assert!(stderr_of(&output).contains('p'), "{}", stderr_of(&output));
}

#[test]
fn missing_config_file_exits_2() {
    let output = bin()
        .arg("steady")
        .arg("--config")
        .arg("/nonexistent/path.conf")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_required_key_exits_2() {
    let dir = tempdir("incomplete");
    let config = write_config(&dir, "incomplete.conf", "gamma1 = 1\ngamma2 = 1\n");
    let output = bin()
        .arg("steady")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(
        stderr_of(&output).contains("omega1"),
        "{}",
        stderr_of(&output)
    );
}

#[test]
fn dark_config_has_no_spectrum_and_exits_3() {
    let dir = tempdir("nofluor");
    let config = write_config(
        &dir,
        "cpt.conf",
        "gamma1 = 1\ngamma2 = 1\nomega1 = 0.2\nomega2 = 0.2\ndetuning = 0\nsplitting = 0\np = 0\n",
    );
    let output = bin()
        .arg("spectrum")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "{}", stderr_of(&output));
    assert!(
        stderr_of(&output).contains("no fluorescence"),
        "{}",
        stderr_of(&output)
    );
}

#[test]
fn spectrum_runs_are_byte_identical_and_reparseable() {
    let dir = tempdir("spectrum");
    let config = write_config(&dir, "narrow.conf", NARROW_FEATURE);
    let out1 = dir.join("run1.csv");
    let out2 = dir.join("run2.csv");
    for out in [&out1, &out2] {
        let output = bin()
            .arg("spectrum")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(out)
            .arg("--refine-center")
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", stderr_of(&output));
    }
    let bytes1 = std::fs::read(&out1).unwrap();
    let bytes2 = std::fs::read(&out2).unwrap();
    assert_eq!(bytes1, bytes2);

    let text = String::from_utf8(bytes1).unwrap();
    assert!(text.contains("omega_offset,s_inc"));
    assert!(text.contains("# result.i_tot = "));
    // the refined grid is much denser than the base 2001 points
    let rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert!(rows > 3000, "only {rows} rows");
    // header echo reparses to a config with refinement switched on
    let echoed: String = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| format!("{}\n", l.trim_start_matches("# ")))
        .collect();
    let reparsed = lambda_fluor::config::RunConfig::parse(&echoed).unwrap();
    assert!(reparsed.grid.refine_center);
    assert_eq!(reparsed.params.omega1, 3.0);
}

#[test]
fn span_and_points_overrides_change_the_grid() {
    let dir = tempdir("overrides");
    let config = write_config(&dir, "narrow.conf", NARROW_FEATURE);
    let output = bin()
        .arg("spectrum")
        .arg("--config")
        .arg(&config)
        .arg("--span")
        .arg("10")
        .arg("--points")
        .arg("11")
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let text = stdout_of(&output);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 11);
    assert!(rows[0].starts_with("-10,"));
    assert!(rows[10].starts_with("10,"));
}

#[test]
fn peak_reports_measured_and_predicted_values() {
    let dir = tempdir("peak");
    let config = write_config(&dir, "narrow.conf", NARROW_FEATURE);
    let output = bin()
        .arg("peak")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let text = stdout_of(&output);
    let amplitude: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("amplitude_measured = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((amplitude - 0.365).abs() < 0.01, "{amplitude}");
    let width: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("fwhm_measured = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((width - 0.00114).abs() < 0.0002, "{width}");
    assert!(text.contains("fwhm_predicted = 0.00114"), "{text}");
    assert!(text.contains("detuning_optimal = 4.124"), "{text}");
}

#[test]
fn sweep_emits_ordered_rows_under_thread_cap() {
    let dir = tempdir("sweep");
    let config = write_config(&dir, "narrow.conf", NARROW_FEATURE);
    let output = bin()
        .arg("sweep")
        .arg("--config")
        .arg(&config)
        .arg("--vary")
        .arg("splitting")
        .arg("--from")
        .arg("0.02")
        .arg("--to")
        .arg("0.1")
        .arg("--steps")
        .arg("5")
        .env("LAMBDA_FLUOR_THREADS", "2")
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let text = stdout_of(&output);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        rows[0],
        "splitting,rho_aa_ss,i_tot,dark,fwhm_predicted,amplitude_predicted,error"
    );
    assert_eq!(rows.len(), 6);
    let mut previous = f64::NEG_INFINITY;
    for row in &rows[1..] {
        let value: f64 = row.split(',').next().unwrap().parse().unwrap();
        assert!(value > previous);
        previous = value;
    }
    assert!(text.contains("# result.sweep_vary = splitting"));
}

#[test]
fn sweep_rejects_unknown_parameter_keys() {
    let dir = tempdir("sweepbad");
    let config = write_config(&dir, "narrow.conf", NARROW_FEATURE);
    let output = bin()
        .arg("sweep")
        .arg("--config")
        .arg(&config)
        .arg("--vary")
        .arg("velocity")
        .arg("--from")
        .arg("0")
        .arg("--to")
        .arg("1")
        .arg("--steps")
        .arg("2")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{}", stderr_of(&output));
    assert!(stderr_of(&output).contains("velocity"));
}

#[test]
fn validate_reports_the_known_red_check_and_exits_4() {
    let output = bin().arg("validate").output().unwrap();
    assert_eq!(output.status.code(), Some(4), "{}", stderr_of(&output));
    let text = stdout_of(&output);
    let fails: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(
        fails.len(),
        1,
        "expected exactly the documented red check:\n{text}"
    );
    assert!(fails[0].contains("criterion-5-center-contrast"), "{text}");
    assert!(text.contains("15 of 16 checks passed"), "{text}");
}
