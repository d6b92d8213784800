use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use optomech_cli::config::SimulationConfig;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn optomech(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optomech"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let at = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(at).unwrap().parse().unwrap()).collect()
}

fn value(body: &str, key: &str) -> String {
    body.lines()
        .filter_map(|l| l.split_once(" = "))
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v.to_string())
        .unwrap_or_else(|| panic!("no {key} in\n{body}"))
}

fn grid(lo: f64, hi: f64, points: u32) -> String {
    format!("numerics.freq_grid.min = {lo:e}\nnumerics.freq_grid.max = {hi:e}\nnumerics.freq_grid.points = {points}\n")
}

#[test]
fn mode_table_layout_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "");
    let csv = stdout(&optomech(&["modes", "--n-limit", "3", "--p-limit", "4"], &cfg));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,p,omega_np_rad_s,f_np_hz,w_n_m,m_n_kg,overlap");
    assert_eq!(lines.len(), 1 + 12);
    assert!(lines[1].starts_with("1,0,") && lines[5].starts_with("2,0,") && lines[12].starts_with("3,3,"));
    let f = column(&csv, "f_np_hz")[0];
    let w = column(&csv, "w_n_m")[0];
    let m = column(&csv, "m_n_kg")[0];
    assert!((f - 2.049e6).abs() < 1e3, "{f}");
    assert!((w - 3.785e-3).abs() < 1e-6, "{w}");
    assert!((m - 3.71e-5).abs() < 1e-7, "{m}");

    let tiny = write(dir.path(), "t.cfg", "optics.waist_m = 1e-12\n");
    let csv = stdout(&optomech(&["modes", "--n-limit", "2", "--p-limit", "3"], &tiny));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",1.00000000e0")), "{csv}");
}

#[test]
fn csv_numbers_use_nine_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "");
    let csv = stdout(&optomech(&["modes", "--n-limit", "2", "--p-limit", "2"], &cfg));
    assert_eq!(csv.lines().filter(|l| l.starts_with('n')).count(), 1);
    for line in csv.lines().skip(1) {
        for cell in line.split(',').skip(2) {
            let (mantissa, exponent) = cell.split_once('e').unwrap();
            assert_eq!(mantissa.trim_start_matches('-').len(), 10, "{cell}");
            exponent.parse::<i32>().unwrap();
        }
    }
}

#[test]
fn susceptibility_normalization_and_hermitian_symmetry() {
    let dir = tempfile::tempdir().unwrap();
    let plus = write(dir.path(), "p.cfg", &grid(0.01, 0.9, 7));
    let minus = write(dir.path(), "m.cfg", &grid(-0.9, -0.01, 7));
    let out = optomech(&["susceptibility"], &plus);
    let a = stdout(&out);
    let report = String::from_utf8(out.stderr).unwrap();
    let chi0: f64 = value(&report, "report.chi_eff0_m_n").parse().unwrap();
    assert!((chi0 - 1.4e-8).abs() < 0.07e-8);
    assert!((column(&a, "re_chi_tilde")[0] - 1.0).abs() < 1e-3);
    assert!(column(&a, "im_chi_tilde")[0].abs() < 1e-3);

    let b = stdout(&optomech(&["susceptibility"], &minus));
    let (re_a, im_a) = (column(&a, "re_chi_eff_m_n"), column(&a, "im_chi_eff_m_n"));
    let (re_b, im_b) = (column(&b, "re_chi_eff_m_n"), column(&b, "im_chi_eff_m_n"));
    for i in 0..7 {
        let j = 6 - i;
        assert!((re_a[i] - re_b[j]).abs() <= 1e-8 * re_a[i].abs());
        assert!((im_a[i] + im_b[j]).abs() <= 1e-8 * im_a[i].abs());
    }
}

#[test]
fn mass_scan_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "");
    let csv = stdout(&optomech(&["mass-scan", "--ratios", "1,10,37.8469878"], &cfg));
    assert_eq!(csv.lines().next().unwrap(), "w1_over_w0,w0_m,m_eff_kg,m_opt_kg,m_eff_over_m1");
    let w0 = column(&csv, "w0_m");
    let m_eff = column(&csv, "m_eff_kg");
    let m_opt = column(&csv, "m_opt_kg");
    assert!((m_eff[1] - 1e-6).abs() < 0.3e-6, "{}", m_eff[1]);
    assert!((m_eff[2] - 2e-7).abs() < 0.6e-7, "{}", m_eff[2]);
    for (w, m) in w0.iter().zip(&m_opt) {
        let closed = 12.0 / std::f64::consts::PI.powi(2) * (std::f64::consts::PI / 4.0) * 2200.0 * 1.5e-3 * w * w;
        assert!((m - closed).abs() <= 1e-8 * closed);
    }
    let bad = optomech(&["mass-scan", "--ratios", "0.5"], &cfg);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn operating_point_values() {
    let dir = tempfile::tempdir().unwrap();
    let body = stdout(&optomech(&["operating-point"], &write(dir.path(), "a.cfg", "")));
    assert_eq!(value(&body, "branches"), "1");
    let psi_nl: f64 = value(&body, "point.0.psi_nl_over_gamma").parse().unwrap();
    let sigma: f64 = value(&body, "point.0.sigma_norm").parse().unwrap();
    assert!((psi_nl - 0.28).abs() < 0.015 && (sigma - 0.93).abs() < 0.01);
    assert_eq!(value(&body, "point.0.stability"), "stable");

    let dark = stdout(&optomech(&["operating-point"], &write(dir.path(), "b.cfg", "drive.p_in_w = 0\n")));
    assert_eq!(value(&dark, "point.0.psi_nl_over_gamma"), "0.00000000e0");
    assert_eq!(value(&dark, "point.0.sigma_norm"), "1.04000000e0");

    let wide = stdout(&optomech(&["operating-point"], &write(dir.path(), "c.cfg", "optics.waist_m = 400e-6\n")));
    let psi_nl: f64 = value(&wide, "point.0.psi_nl_over_gamma").parse().unwrap();
    assert!((psi_nl - 0.11).abs() < 0.01);
}

#[test]
fn kerr_without_coupling_is_shot_noise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", &format!("drive.p_in_w = 0\n{}", grid(0.01, 5.0, 40)));
    let csv = stdout(&optomech(&["squeeze", "--variant", "kerr"], &cfg));
    assert_eq!(csv.lines().next().unwrap(), "omega_over_omega_m,s_opt,theta_opt_rad,s_theta0,s_theta90");
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("1.00000000e0")), "{csv}");
}

#[test]
fn squeeze_scan_and_single_oscillator() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", &format!("numerics.theta_points = 36\n{}", grid(0.05, 0.5, 4)));
    let scan = dir.path().join("scan.csv");
    let csv = stdout(&optomech(&["squeeze", "--scan", scan.to_str().unwrap()], &cfg));
    let table = std::fs::read_to_string(&scan).unwrap();
    assert_eq!(table.lines().count(), 1 + 4 * 36);
    let s_theta = column(&table, "s_theta");
    for (i, s_opt) in column(&csv, "s_opt").iter().enumerate() {
        let row_min = s_theta[36 * i..36 * (i + 1)].iter().copied().fold(f64::INFINITY, f64::min);
        assert!(*s_opt <= row_min * (1.0 + 1e-12));
    }
    let low = write(dir.path(), "low.cfg", &grid(0.02, 0.1, 5));
    let single = stdout(&optomech(&["squeeze", "--variant", "single_oscillator"], &low));
    let full = column(&stdout(&optomech(&["squeeze"], &low)), "s_opt");
    for (a, b) in column(&single, "s_opt").iter().zip(&full) {
        assert!((a - b).abs() < 0.05 * b, "{a} vs {b}");
    }
}

#[test]
fn zero_frequency_with_thermal_noise_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", &grid(0.0, 1.0, 3));
    let out = optomech(&["squeeze", "--variant", "single_oscillator"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    let cold = write(dir.path(), "d.cfg", &format!("environment.temperature_k = 0\n{}", grid(0.0, 1.0, 3)));
    assert!(optomech(&["squeeze", "--variant", "kerr"], &cold).status.success());
}

#[test]
fn bistable_sweep_has_three_branches_with_alternating_stability() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "cavity.psi0_over_gamma = -3\n");
    let csv = stdout(&optomech(&["bistability", "--p-min", "0.05", "--p-max", "0.25", "--p-points", "41"], &cfg));
    assert_eq!(csv.lines().next().unwrap(), "p_in_w,branch_id,i_bar,psi_bar_over_gamma,sigma_norm,stability");
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let mut triples = 0;
    let mut previous_single: Option<&str> = None;
    let mut powers: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    powers.dedup();
    for power in powers {
        let at: Vec<&Vec<&str>> = rows.iter().filter(|r| r[0] == power).collect();
        match at.len() {
            3 => {
                triples += 1;
                let ids: Vec<&str> = at.iter().map(|r| r[1]).collect();
                assert_eq!(ids, ["0", "1", "2"]);
                let stability: Vec<&str> = at.iter().map(|r| r[5]).collect();
                assert_eq!(stability, ["stable", "unstable", "stable"]);
                let i_bar: Vec<f64> = at.iter().map(|r| r[2].parse().unwrap()).collect();
                assert!(i_bar[0] < i_bar[1] && i_bar[1] < i_bar[2]);
            }
            1 => previous_single = Some(at[0][1]),
            _ => {}
        }
    }
    assert!(triples > 0);
    assert_eq!(previous_single, Some("2"));

    let wrong = optomech(&["bistability"], &write(dir.path(), "d.cfg", ""));
    assert_eq!(wrong.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&wrong.stderr).contains("psi0_over_gamma"));
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.cfg", "optics.waist_m = 2e-4\ngeometry.h0 = 1\n");
    let out = optomech(&["modes"], &bad);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2: geometry.h0: unknown key"));
    let anchors = write(dir.path(), "anchors.cfg", "cavity.tau_s = 1e-12\ncavity.omega_cav_over_omega_m = 1\n");
    assert_eq!(optomech(&["modes"], &anchors).status.code(), Some(2));
    let missing = optomech(&["modes"], &dir.path().join("missing.cfg"));
    assert_eq!(missing.status.code(), Some(4));
    let unwritable = optomech(
        &["modes", "--out", dir.path().join("no/such/dir.csv").to_str().unwrap()],
        &write(dir.path(), "ok.cfg", ""),
    );
    assert_eq!(unwritable.status.code(), Some(4));
}

#[test]
fn report_echo_reparses_and_records_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "optics.waist_m = 3.3e-4\nnumerics.loss_model = viscous\n");
    let out_path = dir.path().join("modes.csv");
    let report_path = dir.path().join("report.txt");
    let out = Command::new(env!("CARGO_BIN_EXE_optomech"))
        .args(["modes", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_path)
        .arg("--report")
        .arg(&report_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report = std::fs::read_to_string(&report_path).unwrap();
    for key in [
        "report.command",
        "report.mode_count",
        "report.truncation",
        "report.wall_clock_s",
        "report.output",
        "report.omega_m_rad_s",
        "report.h0_over_r",
        "report.warnings",
    ] {
        value(&report, key);
    }
    assert_eq!(value(&report, "report.output"), out_path.display().to_string());
    let original = SimulationConfig::parse(&std::fs::read_to_string(&cfg).unwrap()).unwrap();
    assert_eq!(SimulationConfig::parse(&report).unwrap(), original);
    assert!(out_path.exists());
}
