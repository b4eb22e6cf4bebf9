use std::path::Path;
use std::process::{Command, Output};

use chd_sim::read_csv;

const SMALL: &str = "\
K = 2
N = 2
Ms = 1
U = 1
V = 2
J = 2
T = 8
packets = 5
calibration_draws = 5
rho = 0.9
";

fn chd_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chd-sim")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn p_sweep_emits_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL}p = [0.1, 0.2, 0.4, 0.8]\nsnr_db = [0, 2, 4, 6, 8, 10]\n"),
    );
    let out = dir.path().join("r.csv");
    let res = chd_sim(&["--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = read_csv(&out).unwrap();
    assert_eq!(rows.len(), 24);
    assert_eq!(rows[0].p, Some(0.1));
    assert_eq!(rows[6].p, Some(0.2));
    assert_eq!(rows[5].snr_db, 10.0);
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.ber));
        assert!((0.0..=1.0).contains(&r.mmd_rate_ul) && (0.0..=1.0).contains(&r.mmd_rate_dl));
        assert!(r.avg_delay_slots.is_none_or(|d| d >= 1.0));
        assert_eq!(r.slots_ma + r.slots_bc, r.slots_total);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}snr_db = [0, 5]\nreplications = 2\n"));
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(
        chd_sim(&["--config", &cfg, "--out", a.to_str().unwrap(), "--jobs", "1"])
            .status
            .success()
    );
    assert!(
        chd_sim(&["--config", &cfg, "--out", b.to_str().unwrap(), "--jobs", "3"])
            .status
            .success()
    );
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let c = dir.path().join("c.csv");
    assert!(
        chd_sim(&["--config", &cfg, "--out", c.to_str().unwrap(), "--seed", "99"])
            .status
            .success()
    );
    let rows = read_csv(&c).unwrap();
    assert!(rows.iter().all(|r| r.seed == 99));
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn packets_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}snr_db = 10\n"));
    let out = dir.path().join("r.csv");
    assert!(
        chd_sim(&["--config", &cfg, "--out", out.to_str().unwrap(), "--packets", "9"])
            .status
            .success()
    );
    let rows = read_csv(&out).unwrap();
    assert_eq!(rows[0].packets_delivered, 9);
}

#[test]
fn unwritable_output_fails_without_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("missing").join("r.csv");
    let res = chd_sim(&["--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(!out.exists());
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "Ms = 2\nJ = 5\n");
    let res = chd_sim(&["--config", &cfg, "--out", dir.path().join("r.csv").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("J"));
    assert!(!dir.path().join("r.csv").exists());

    let res = chd_sim(&["--out", "x.csv"]);
    assert_eq!(res.status.code(), Some(1));
    let res = chd_sim(&["--config", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn runtime_failure_exits_with_two() {
    // Path gain underflows to zero, so every metric is zero and G is undefined.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}xi = 1\ndistance = 1e300\n"));
    let res = chd_sim(&["--config", &cfg, "--out", dir.path().join("r.csv").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(!dir.path().join("r.csv").exists());
}
