use lrmctdh::io::Checkpoint;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrmctdh")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(out: &str, key: &str) -> String {
    let prefix = format!("{key} = ");
    out.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("no `{key}` in\n{out}")).to_string()
}

fn ground(cfg: &Path, dir: &Path) -> String {
    let o = run(&["ground", "--config", cfg.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

#[test]
fn ground_then_linres_with_matrix_dump() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("harmonic_n2_m2.cfg");
    let out = ground(&cfg, dir.path());
    let energy: f64 = value(&out, "energy").parse().unwrap();
    assert!(energy > 1.0 && energy < 1.5);

    let ckpt = dir.path().join("ground.ckpt");
    let o = run(&["linres", "--config", cfg.to_str().unwrap(), "--checkpoint", ckpt.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap(), "--dump-matrix"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(value(&out, "zero_modes"), "10 (expected 10)");
    for f in ["spectrum.csv", "weights.csv", "response.csv"] {
        let text = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(text.contains("# config_sha256 = "), "{f}");
    }
    let dump = Checkpoint::load(&dir.path().join("linres_matrix.ckpt")).unwrap();
    let l = dump.get("L").unwrap();
    assert_eq!(l.nrows().to_string(), value(&out, "dimension"));
}

#[test]
fn resume_reproduces_the_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("harmonic_n2_m2.cfg");
    let first: f64 = value(&ground(&cfg, dir.path()), "energy").parse().unwrap();
    let ckpt = dir.path().join("ground.ckpt");
    let o = run(&["ground", "--config", cfg.to_str().unwrap(), "--checkpoint", ckpt.to_str().unwrap(), "--resume", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let second: f64 = value(&stdout(&o), "energy").parse().unwrap();
    assert!((first - second).abs() < 1e-12, "{first} vs {second}");
}

#[test]
fn noninteracting_excitation_is_the_trap_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("free.cfg");
    std::fs::write(&cfg, "[system]\nstatistics = boson\nparticles = 2\norbitals = 1\n[grid]\npoints = 48\nx_min = -8\nx_max = 8\n").unwrap();
    ground(&cfg, dir.path());
    let ckpt = dir.path().join("ground.ckpt");
    let o = run(&["linres", "--config", cfg.to_str().unwrap(), "--checkpoint", ckpt.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lowest: f64 = value(&out, "lowest_excitations").split_whitespace().next().unwrap().parse().unwrap();
    assert!((lowest - 1.0).abs() < 1e-6, "{lowest}");
    assert_eq!(value(&out, "zero_modes"), "4 (expected 4)");
}

#[test]
fn oracle_and_propcheck_pass() {
    let o = run(&["oracle", "--config", fixture("bdg_n2_m1.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l.starts_with("max_abs_diff") && l.ends_with("PASS")));

    let o = run(&["oracle", "--config", fixture("coupled_oscillators.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));

    let o = run(&["propcheck", "--config", fixture("harmonic_n2_m2.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("differential conditions PASS"));
}

#[test]
fn bad_input_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "[system]\nstatistics = boson\nparticles = 2\norbitals = 2\n").unwrap();
    let o = run(&["ground", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.points"));

    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["ground"]).status.code(), Some(1));
    let missing = dir.path().join("nope.ckpt");
    let o = run(&["linres", "--config", fixture("harmonic_n2_m2.cfg").to_str().unwrap(), "--checkpoint", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
