use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_holonomy-lab"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "status {:?}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn run_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "noisy.cfg",
        "figure=per-state\ntau_min=5\ntau_max=30\ntau_points=6\nlambda2=0,0.01\nsteps=200\n",
    );
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "3", "3"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}.csv"));
        run_ok(
            bin()
                .env("RAYON_NUM_THREADS", threads)
                .arg("run")
                .arg(&cfg)
                .arg("--out")
                .arg(&out),
        );
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ideal.csv");
    let cfg = write_config(dir.path(), "ideal.cfg", "figure=ideal-mean\ntau_points=4\nsamples=50\n");
    run_ok(bin().arg("run").arg(&cfg).arg("--out").arg(&out).args(["--tau-min", "10", "--tau-max", "40"]));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "omega_tau,F_mean");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][0], 10.0);
    assert_eq!(rows[3][0], 40.0);
    for r in &rows {
        assert!(r[1] >= 0.0 && r[1] <= 1.0 + 1e-9);
    }
    // 12 significant digits at most
    for cell in text.lines().skip(1).flat_map(|l| l.split(',')) {
        let digits = cell.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
        assert!(digits.trim_start_matches('0').len() <= 12, "{cell}");
    }
}

#[test]
fn revival_grid_point_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rev.csv");
    let tau = holonomy_core::closed_form::optimal_time(1.0);
    let cfg = write_config(
        dir.path(),
        "rev.cfg",
        &format!("figure=ideal-mean\ntau_min={tau:?}\ntau_max=20\ntau_points=2\n"),
    );
    run_ok(bin().arg("run").arg(&cfg).arg("--out").arg(&out));
    let text = std::fs::read_to_string(&out).unwrap();
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((first[1] - 1.0).abs() < 1e-9);
}

#[test]
fn config_errors_exit_with_one_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "figure=ideal-mean\ntau_points=1\n");
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau_points"));

    let cfg = write_config(dir.path(), "bad2.cfg", "figure=ideal-mean\n");
    let out = bin().arg("run").arg(&cfg).args(["--kappa", "abc"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kappa"));

    let out = bin().arg("run").arg(dir.path().join("missing.cfg")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rates_subcommand_prints_config_lines() {
    let out = run_ok(bin().args(["rates", "--kappa", "0.01", "--omega-c", "100", "--temperature", "1"]));
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.starts_with("gamma.++=")).unwrap();
    let g: f64 = line.split('=').nth(1).unwrap().parse().unwrap();
    assert!((g - 2.0 * std::f64::consts::PI * 0.01).abs() < 1e-12);
    let table = holonomy_core::bath::RateTable::parse_config(&text).unwrap();
    assert!((table.delta[0][0] - 1.0).abs() < 1e-4);

    let out = bin().args(["rates", "--kappa=-1", "--omega-c", "100", "--temperature", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn revivals_subcommand() {
    let out = run_ok(bin().args(["revivals", "--k-max", "3", "--n", "1"]));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1,18.2510040419,18.2510040419,"));

    let out = run_ok(bin().args(["revivals", "--k-max", "2", "--n", "2"]));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn optimal_report_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let cfg = write_config(
        dir.path(),
        "rep.cfg",
        "figure=noisy-mean\nlambda2=0.01\nsteps=200\nsamples=20\n",
    );
    run_ok(bin().arg("optimal-report").arg(&cfg).arg("--out").arg(&out));
    let text = std::fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "F_mean_l2=0.01");
    let rel: f64 = row[4].parse().unwrap();
    assert!(rel.abs() < 0.05);
}
