//! End-to-end checks of the installed binary: exit codes, determinism of
//! emitted bytes, and config-file/flag precedence.

use std::path::PathBuf;
use std::process::{Command, Output};

use cavity_dark::export::state_from_bin;

const BIN: &str = env!("CARGO_BIN_EXE_cavity-dark");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("CAVITY_DARK_MAX_WORKERS")
        .output()
        .expect("binary must launch")
}

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cavity-dark-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn usage_and_configuration_errors_exit_with_code_2() {
    assert_eq!(run(&["simulate", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&["figure", "9z"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--omega", "-5"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--omega", "abc"]).status.code(), Some(2));
    // a basis index without its partner is a usage error
    assert_eq!(
        run(&["simulate", "--basis-m", "0", "--tmax", "0.1"]).status.code(),
        Some(2)
    );
    // formats that do not apply to the requested run
    assert_eq!(
        run(&["simulate", "--one-atom", "--format", "bin", "--tmax", "0.1"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["dark", "--mmax", "2", "--format", "bin"]).status.code(), Some(2));
    // a zero split step can never advance the field
    let out = run(&[
        "grid", "--gsize", "16", "--dtau", "0", "--tmax", "0.05", "--samples", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty(), "errors must be reported on stderr");
}

#[test]
fn io_failures_exit_with_code_1() {
    assert_eq!(
        run(&["dark", "--mmax", "2", "--config", "/no/such/file.toml"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["dark", "--mmax", "2", "--out", "/no/such/dir/out.csv"]).status.code(),
        Some(1)
    );
}

#[test]
fn repeated_invocations_emit_identical_bytes() {
    let args = [
        "simulate", "--one-atom", "--kappa", "20", "--mmax", "8", "--tmax", "0.2",
        "--samples", "5",
    ];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    assert!(text.starts_with("# model = full\n"), "{text}");
    assert!(text.contains("# kappa = 20\n"));
    assert!(text.contains("\ntau,survival,boundary_population\n"));

    let args = ["dark", "--mmax", "4", "--format", "json"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("\"central_amplitude\": 0.5"), "{text}");
}

#[test]
fn binary_snapshot_round_trips_through_stdout() {
    let out = run(&[
        "simulate", "--mmax", "4", "--kappa", "20", "--tmax", "0.1", "--samples", "3",
        "--format", "bin",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let state = state_from_bin(out.stdout.as_slice()).unwrap();
    assert_eq!(state.m_max(), 4);
    assert!((state.time - 0.1).abs() < 1e-12);
    assert!(state.survival_probability() <= 1.0);
}

#[test]
fn config_file_seeds_runs_and_flags_override_it() {
    let dir = scratch_dir();
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "omega = 25.0\nkappa = 20.0\nm_max = 4\n").unwrap();
    let cfgs = cfg.to_str().unwrap();

    // rate estimate E^2 kappa / omega^2 for the ground dark state: the file
    // alone gives 4 * 20 / 625, the flag moves omega to 50 giving 4 * 20 / 2500
    let base = run(&[
        "dark", "--config", cfgs, "--basis-m", "0", "--basis-n", "0", "--format", "json",
    ]);
    assert!(base.status.success());
    let text = String::from_utf8(base.stdout).unwrap();
    assert!(text.contains("\"omega\": 25.0"), "{text}");
    assert!(text.contains("\"rate\": 0.128"), "{text}");

    let overridden = run(&[
        "dark", "--config", cfgs, "--omega", "50", "--basis-m", "0", "--basis-n", "0",
        "--format", "json",
    ]);
    assert!(overridden.status.success());
    let text = String::from_utf8(overridden.stdout).unwrap();
    assert!(text.contains("\"omega\": 50.0"), "{text}");
    assert!(text.contains("\"rate\": 0.032"), "{text}");

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sweep_output_is_stable_across_worker_settings() {
    let dir = scratch_dir();
    let cfg = dir.join("sweep.toml");
    std::fs::write(
        &cfg,
        "sweep_omega = [25.0, 50.0]\nsweep_kappa = [20.0]\nm_max = 6\nt_max = 0.5\nsamples = 51\ntolerance = 1e-8\n",
    )
    .unwrap();
    let cfgs = cfg.to_str().unwrap();

    let serial = run(&["sweep", "--config", cfgs, "--workers", "1"]);
    assert!(serial.status.success(), "{}", String::from_utf8_lossy(&serial.stderr));
    let parallel = run(&["sweep", "--config", cfgs, "--workers", "4"]);
    assert!(parallel.status.success());
    assert_eq!(serial.stdout, parallel.stdout);

    // the environment cap only limits the pool, never the result
    let capped = Command::new(BIN)
        .args(["sweep", "--config", cfgs, "--workers", "4"])
        .env("CAVITY_DARK_MAX_WORKERS", "1")
        .output()
        .unwrap();
    assert!(capped.status.success());
    assert_eq!(capped.stdout, serial.stdout);

    let text = String::from_utf8(serial.stdout).unwrap();
    assert!(text.contains("# tolerance = 0.00000001\n") || text.contains("# tolerance = 1e-8\n"));
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(
        lines.next().unwrap(),
        "omega,kappa,delta,basis_m,basis_n,plateau_survival,decay_rate,r_squared,truncation_flagged,error"
    );
    assert_eq!(lines.count(), 2, "one row per grid point");

    let _ = std::fs::remove_dir_all(&dir);
}
