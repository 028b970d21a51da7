//! Batch front end behind the `lrmctdh` binary.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure
//! (non-convergence, rejected checkpoint, failed self-check).

use crate::config::{Config, PerturbationKind, StatisticsKind};
use crate::groundstate::{self, DistinguishableGroundState, GroundState};
use crate::hamiltonian::{DistinguishableSystem, IdenticalSystem};
use crate::io::{fmt_num, write_csv, Checkpoint, CheckpointHeader};
use crate::linalg::{self, eigh, C64};
use crate::linres_distinguishable::{self as lrd, DistPerturbation};
use crate::linres_identical::{self as lri, Perturbation};
use crate::oracle;
use crate::spectrum::{self, Layout, ModeKind, Spectrum, SpectrumOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "lrmctdh", version, about = "Excitation spectra from linear response around multiconfigurational Hartree ground states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the ground state and write a checkpoint.
    Ground {
        #[command(flatten)]
        common: Common,
        /// Start from the orbitals stored in --checkpoint.
        #[arg(long)]
        resume: bool,
    },
    /// Assemble and diagonalise the response matrix around a checkpointed ground state.
    Linres {
        #[command(flatten)]
        common: Common,
    },
    /// Compare against the matching independent reference.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
    /// Propagate a slightly perturbed ground state and report the gauge conditions.
    Propcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticsArg {
    Boson,
    Fermion,
    Dist,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Checkpoint path; defaults to `<out-dir>/ground.ckpt`.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Write L, P and R in checkpoint format.
    #[arg(long)]
    pub dump_matrix: bool,
    /// Absolute zero-mode threshold; default is 1e-6 max|omega|.
    #[arg(long)]
    pub tol_zero: Option<f64>,
    /// Override `system.statistics`.
    #[arg(long, value_enum)]
    pub statistics: Option<StatisticsArg>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Lib(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Lib(e) => match e {
                E::Config(_) | E::Io(_) | E::Grid(_) | E::Fock(_) | E::Hamiltonian(_) | E::LinRes(_) => 1,
                E::GroundState(_) | E::Spectrum(_) | E::Oracle(_) => 2,
            },
        }
    }
}

macro_rules! lib {
    ($e:expr) => {
        $e.map_err(|e| CliError::Lib(e.into()))
    };
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ground { common, resume } => run_ground(&common, resume),
        Command::Linres { common } => run_linres(&common),
        Command::Oracle { common } => run_oracle(&common),
        Command::Propcheck { common, steps, dt } => run_propcheck(&common, steps, dt),
    }
}

fn load_config(common: &Common) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(&common.config).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg = lib!(Config::parse(&text))?;
    if let Some(s) = common.statistics {
        cfg.statistics = match s {
            StatisticsArg::Boson => StatisticsKind::Boson,
            StatisticsArg::Fermion => StatisticsKind::Fermion,
            StatisticsArg::Dist => StatisticsKind::Dist,
        };
        if cfg.statistics == StatisticsKind::Dist && cfg.orbitals.len() == 1 {
            cfg.orbitals = vec![cfg.orbitals[0]; 2];
        }
        lib!(cfg.validate())?;
    }
    if common.tol_zero.is_some() {
        cfg.tol_zero = common.tol_zero;
    }
    Ok(cfg)
}

fn checkpoint_path(common: &Common) -> PathBuf {
    common.checkpoint.clone().unwrap_or_else(|| common.out_dir.join("ground.ckpt"))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))
}

fn header(cfg: &Config, kind: &str) -> CheckpointHeader {
    CheckpointHeader {
        kind: kind.to_string(),
        statistics: cfg.statistics.name().to_string(),
        particles: cfg.particles,
        orbitals: cfg.orbitals.clone(),
        points: cfg.points,
        energy: 0.0,
        residual_orb: 0.0,
        residual_c: 0.0,
        mu_hermiticity: 0.0,
        iterations: 0,
        converged: false,
        config: cfg.render(),
        config_hash: cfg.hash(),
        arrays: Vec::new(),
    }
}

fn occupations(rho: &Mat<C64>) -> Vec<f64> {
    let (mut w, _) = eigh(rho);
    w.reverse();
    w
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.10}")).collect::<Vec<_>>().join(" ")
}

enum Ground {
    Identical(IdenticalSystem, GroundState),
    Dist(DistinguishableSystem, DistinguishableGroundState),
}

fn solve(cfg: &Config, guess: Option<&Checkpoint>) -> Result<Ground, CliError> {
    let opts = cfg.solver_options();
    if cfg.statistics == StatisticsKind::Dist {
        let system = lib!(cfg.distinguishable_system())?;
        let guess = match guess {
            Some(ck) => Some((0..cfg.orbitals.len()).map(|j| lib!(ck.get(&format!("orbitals.{j}"))).cloned()).collect::<Result<Vec<_>, _>>()?),
            None => None,
        };
        let gs = lib!(groundstate::solve_distinguishable(&system, guess.as_deref(), &opts))?;
        Ok(Ground::Dist(system, gs))
    } else {
        let system = lib!(cfg.identical_system())?;
        let guess = match guess {
            Some(ck) => Some(lib!(ck.get("orbitals"))?.clone()),
            None => None,
        };
        let gs = lib!(groundstate::solve_identical(&system, guess.as_ref(), &opts))?;
        Ok(Ground::Identical(system, gs))
    }
}

fn ground_checkpoint(cfg: &Config, ground: &Ground) -> Checkpoint {
    let mut ck = Checkpoint::new(header(cfg, "ground"));
    match ground {
        Ground::Identical(_, gs) => {
            ck.header.energy = gs.energy;
            ck.header.residual_orb = gs.residual_orb;
            ck.header.residual_c = gs.residual_c;
            ck.header.mu_hermiticity = gs.mu_hermiticity;
            ck.header.iterations = gs.iterations;
            ck.push("orbitals", gs.orbitals.clone());
            ck.push_vector("coefficients", &gs.coefficients);
            ck.push("mu", gs.mu.clone());
        }
        Ground::Dist(_, gs) => {
            ck.header.energy = gs.energy;
            ck.header.residual_orb = gs.residual_orb;
            ck.header.residual_c = gs.residual_c;
            ck.header.mu_hermiticity = gs.mu_hermiticity;
            ck.header.iterations = gs.iterations;
            for (j, o) in gs.orbitals.iter().enumerate() {
                ck.push(&format!("orbitals.{j}"), o.clone());
            }
            ck.push_vector("coefficients", &gs.coefficients);
            for (j, m) in gs.mu.iter().enumerate() {
                ck.push(&format!("mu.{j}"), m.clone());
            }
        }
    }
    ck.header.converged = true;
    ck
}

fn run_ground(common: &Common, resume: bool) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let path = checkpoint_path(common);
    let previous = if resume {
        let ck = lib!(Checkpoint::load(&path))?;
        check_compatible(&cfg, &ck)?;
        Some(ck)
    } else {
        None
    };
    let ground = solve(&cfg, previous.as_ref())?;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    let ck = ground_checkpoint(&cfg, &ground);
    lib!(ck.save(&path))?;
    println!("# config_sha256 = {}", cfg.hash());
    println!("energy = {}", fmt_num(ck.header.energy));
    match &ground {
        Ground::Identical(_, gs) => println!("natural_occupations = {}", fmt_list(&occupations(&gs.rho1))),
        Ground::Dist(_, gs) => {
            for (j, r) in gs.rho.iter().enumerate() {
                println!("natural_occupations[{j}] = {}", fmt_list(&occupations(r)));
            }
        }
    }
    println!("residual_orb = {:e}", ck.header.residual_orb);
    println!("residual_c = {:e}", ck.header.residual_c);
    println!("mu_hermiticity = {:e}", ck.header.mu_hermiticity);
    println!("iterations = {}", ck.header.iterations);
    println!("checkpoint = {}", path.display());
    Ok(())
}

fn check_compatible(cfg: &Config, ck: &Checkpoint) -> Result<(), CliError> {
    let h = &ck.header;
    if h.kind != "ground" {
        return Err(CliError::Usage(format!("checkpoint kind `{}` is not a ground state", h.kind)));
    }
    if h.statistics != cfg.statistics.name() || h.orbitals != cfg.orbitals || h.points != cfg.points || (cfg.statistics != StatisticsKind::Dist && h.particles != cfg.particles) {
        return Err(CliError::Usage("checkpoint dimensions or statistics do not match the configuration".into()));
    }
    Ok(())
}

fn load_ground(cfg: &Config, common: &Common) -> Result<Ground, CliError> {
    let ck = lib!(Checkpoint::load(&checkpoint_path(common)))?;
    check_compatible(cfg, &ck)?;
    let coef = lib!(ck.vector("coefficients"))?;
    let ground = if cfg.statistics == StatisticsKind::Dist {
        let system = lib!(cfg.distinguishable_system())?;
        let orb = (0..cfg.orbitals.len()).map(|j| lib!(ck.get(&format!("orbitals.{j}"))).cloned()).collect::<Result<Vec<_>, _>>()?;
        let gs = groundstate::evaluate_distinguishable(&system, orb, coef);
        Ground::Dist(system, gs)
    } else {
        let system = lib!(cfg.identical_system())?;
        let gs = groundstate::evaluate_identical(&system, lib!(ck.get("orbitals"))?.clone(), coef);
        Ground::Identical(system, gs)
    };
    let (ro, rc) = match &ground {
        Ground::Identical(_, g) => (g.residual_orb, g.residual_c),
        Ground::Dist(_, g) => (g.residual_orb, g.residual_c),
    };
    if !ck.header.converged || ro > 10.0 * cfg.tol_orb || rc > 10.0 * cfg.tol_c {
        return Err(CliError::Numerical(format!("checkpoint is not a converged ground state (orbital residual {ro:e}, coefficient residual {rc:e})")));
    }
    Ok(ground)
}

/// Assembled and diagonalised response for either kind of system.
pub struct Analysis {
    pub matrix: Mat<C64>,
    pub projector: Mat<C64>,
    pub layout: Layout,
    pub spectrum: Spectrum,
    pub drive: Option<Vec<C64>>,
    pub expected_zero: usize,
    pub symmetry: (f64, f64),
    pub gauge_residual: f64,
}

fn spectrum_options(cfg: &Config) -> SpectrumOptions {
    SpectrumOptions { tol_zero: cfg.tol_zero, ..SpectrumOptions::default() }
}

fn one_body_operator(kind: PerturbationKind, grid: &crate::grid::Grid) -> Option<Mat<C64>> {
    let x = grid.position_operator();
    match kind {
        PerturbationKind::None => None,
        PerturbationKind::Position => Some(x),
        PerturbationKind::PositionSquared => Some(&x * &x),
    }
}

fn analyse(cfg: &Config, ground: &Ground) -> Result<Analysis, CliError> {
    let opts = spectrum_options(cfg);
    match ground {
        Ground::Identical(system, gs) => {
            let lr = lib!(lri::assemble(system, gs))?;
            let spec = lib!(spectrum::diagonalize(&lr.matrix, lr.layout, &opts))?;
            let drive = match one_body_operator(cfg.perturbation, &system.grid) {
                Some(op) => Some(lib!(lr.perturbation_vector(system, gs, &Perturbation::one_body(op)))?),
                None => None,
            };
            Ok(Analysis {
                symmetry: lr.symmetry_residuals(),
                gauge_residual: lr.gauge_residual(gs),
                expected_zero: lr.expected_zero_modes(),
                matrix: lr.matrix,
                projector: lr.projector,
                layout: lr.layout,
                spectrum: spec,
                drive,
            })
        }
        Ground::Dist(system, gs) => {
            let lr = lib!(lrd::assemble(system, gs))?;
            let spec = lib!(spectrum::diagonalize(&lr.matrix, lr.layout, &opts))?;
            let drive = match one_body_operator(cfg.perturbation, &system.grids[cfg.perturbation_dof]) {
                Some(op) => Some(lib!(lr.perturbation_vector(system, gs, &DistPerturbation::single(cfg.perturbation_dof, op)))?),
                None => None,
            };
            Ok(Analysis {
                symmetry: lr.symmetry_residuals(),
                gauge_residual: lr.gauge_residual(gs),
                expected_zero: lr.expected_zero_modes(),
                matrix: lr.matrix,
                projector: lr.projector,
                layout: lr.layout,
                spectrum: spec,
                drive,
            })
        }
    }
}

fn run_linres(common: &Common) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let ground = load_ground(&cfg, common)?;
    let a = analyse(&cfg, &ground)?;
    ensure_dir(&common.out_dir)?;
    let (rendered, hash) = (cfg.render(), cfg.hash());
    let spec = &a.spectrum;
    let gammas: Vec<C64> = match &a.drive {
        Some(r) => spec.modes.iter().map(|m| -linalg::dot(&m.left, r)).collect(),
        None => vec![C64::new(0.0, 0.0); spec.modes.len()],
    };
    let rows: Vec<Vec<String>> = spec
        .modes
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let partner = m.partner.map(|p| gammas[p].norm()).unwrap_or(0.0);
            vec![
                i.to_string(),
                fmt_num(m.omega.re),
                fmt_num(m.omega.im),
                fmt_num(m.sng),
                (m.kind == ModeKind::Zero).to_string(),
                fmt_num(gammas[i].norm()),
                fmt_num(partner),
            ]
        })
        .collect();
    write_csv(&common.out_dir.join("spectrum.csv"), &rendered, &hash, &["index", "re_omega", "im_omega", "sng", "is_zero_mode", "abs_gamma_k", "abs_gamma_minus_k"], &rows).map_err(|e| CliError::Lib(e.into()))?;
    if let Some(r) = &a.drive {
        let weights = spec.response_weights(r);
        let rows: Vec<Vec<String>> = weights
            .iter()
            .map(|w| vec![w.mode.to_string(), fmt_num(w.omega.re), fmt_num(w.omega.im), fmt_num(w.gamma_plus.re), fmt_num(w.gamma_plus.im), fmt_num(w.gamma_minus.re), fmt_num(w.gamma_minus.im), fmt_num(w.gamma_plus.norm_sqr())])
            .collect();
        write_csv(&common.out_dir.join("weights.csv"), &rendered, &hash, &["mode", "re_omega", "im_omega", "re_gamma_k", "im_gamma_k", "re_gamma_minus_k", "im_gamma_minus_k", "strength"], &rows).map_err(|e| CliError::Lib(e.into()))?;
        if !cfg.drive.is_empty() {
            let mut rows = Vec::new();
            for &w in &cfg.drive {
                let x = lib!(spec.reconstruct(C64::new(w, 0.0), r, 1e-10))?;
                rows.push(vec![fmt_num(w), fmt_num(linalg::norm(&x))]);
            }
            write_csv(&common.out_dir.join("response.csv"), &rendered, &hash, &["omega", "response_norm"], &rows).map_err(|e| CliError::Lib(e.into()))?;
        }
    }
    if common.dump_matrix {
        let mut ck = Checkpoint::new(header(&cfg, "matrix"));
        ck.push("L", a.matrix.clone());
        ck.push("P", a.projector.clone());
        if let Some(r) = &a.drive {
            ck.push_vector("R", r);
        }
        lib!(ck.save(&common.out_dir.join("linres_matrix.ckpt")))?;
    }
    println!("# config_sha256 = {hash}");
    println!("dimension = {}", a.layout.dim());
    println!("zero_modes = {} (expected {})", spec.zero_count(), a.expected_zero);
    println!("complex_modes = {}", spec.complex_modes().len());
    println!("sigma1_residual = {:e}", a.symmetry.0);
    println!("sigma3_residual = {:e}", a.symmetry.1);
    println!("gauge_residual = {:e}", a.gauge_residual);
    println!("biorthogonality_defect = {:e}", spec.biorthogonality_defect());
    let ex = spec.excitation_energies();
    println!("lowest_excitations = {}", fmt_list(&ex[..ex.len().min(6)]));
    if spec.zero_count() != a.expected_zero {
        // unoccupied natural orbitals are removed by the regularised metric and add zero modes
        println!("warning: zero-mode count differs from 2(M^2+1); check for (nearly) unoccupied natural orbitals");
    }
    Ok(())
}

fn print_table(title: &str, labels: (&str, &str), a: &[f64], b: &[f64], tol: f64) -> bool {
    println!("{title}");
    println!("{:>4} {:>22} {:>22} {:>12}", "k", labels.0, labels.1, "abs_diff");
    let mut worst = 0.0f64;
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        let d = (x - y).abs();
        worst = worst.max(d);
        println!("{:>4} {:>22.15} {:>22.15} {:>12.3e}", k + 1, x, y, d);
    }
    let ok = worst < tol;
    if tol.is_finite() {
        println!("max_abs_diff = {worst:.3e} (tolerance {tol:e}) {}", if ok { "PASS" } else { "FAIL" });
    } else {
        println!("max_abs_diff = {worst:.3e} (no tolerance: finite-M comparison)");
    }
    ok
}

/// Sec. II self-test on a few-point grid: projected Schroedinger response vs exact energies.
pub fn schroedinger_self_test(cfg: &Config) -> Result<(bool, f64, f64, f64), crate::Error> {
    let stats = cfg.statistics.identical().unwrap_or(crate::fockspace::Statistics::Boson);
    let n = cfg.particles.clamp(1, 2);
    let grid = crate::grid::Grid::new(8, cfg.x_min, cfg.x_max)?;
    let h = grid.one_body_hamiltonian(cfg.mass, &grid.harmonic_potential(cfg.trap_frequency));
    let kernel = grid.discretize(&cfg.kernel())?;
    let ex = oracle::exact_diag_grid(n, stats, &h, &kernel, usize::MAX)?;
    let hm = ex.hamiltonian.clone().expect("small basis is dense");
    let se = oracle::se_linear_response(&hm, &SpectrumOptions::default())?;
    let got = se.spectrum.excitation_energies();
    let mut rel = 0.0f64;
    for (a, b) in got.iter().zip(ex.excitations()) {
        rel = rel.max((a - b).abs() / b.abs().max(1.0));
    }
    let res = se.spectrum.resolution_checks(&se.matrix);
    Ok((rel < 1e-12 && res.identity < 1e-10 && res.spectral < 1e-10 && got.len() == ex.excitations().len(), rel, res.identity, res.spectral))
}

fn run_oracle(common: &Common) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    println!("# config_sha256 = {}", cfg.hash());
    let mut ok = true;
    if cfg.statistics != StatisticsKind::Dist {
        let (pass, rel, id, sp) = lib!(schroedinger_self_test(&cfg))?;
        println!("schroedinger response self-test: rel_eig {rel:.2e} identity {id:.2e} spectral {sp:.2e} {}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    }
    let ground = solve(&cfg, None)?;
    let a = analyse(&cfg, &ground)?;
    let lr = a.spectrum.excitation_energies();
    match &ground {
        Ground::Identical(system, gs) => {
            if cfg.orbitals[0] == 1 && cfg.statistics == StatisticsKind::Boson && matches!(cfg.interaction, crate::config::InteractionKind::Contact | crate::config::InteractionKind::None) {
                let bdg = lib!(oracle::bdg_reference(&system.one_body, &system.kernel, cfg.particles))?;
                let k = 5.min(bdg.frequencies.len()).min(lr.len());
                ok &= print_table("BdG vs linear response (M=1)", ("bdg", "linres"), &bdg.frequencies[..k], &lr[..k], 1e-7);
            }
            if cfg.particles <= 3 {
                let stats = cfg.statistics.identical().unwrap();
                let ex = lib!(oracle::exact_diag_grid(cfg.particles, stats, &system.one_body, &system.kernel, 8))?;
                let exc = ex.excitations();
                let k = 5.min(exc.len()).min(lr.len());
                println!("variational gap E_mchx - E_exact = {:.3e}", gs.energy - ex.energies[0]);
                print_table("exact diagonalisation vs linear response", ("exact", "linres"), &exc[..k], &lr[..k], f64::INFINITY);
            }
        }
        Ground::Dist(..) => {
            if cfg.orbitals.len() == 2 && matches!(cfg.interaction, crate::config::InteractionKind::Bilinear | crate::config::InteractionKind::None) {
                let lambda = if cfg.interaction == crate::config::InteractionKind::None { 0.0 } else { cfg.strength };
                let reference = lib!(oracle::coupled_oscillators_reference(lambda))?;
                let reference: Vec<f64> = reference.iter().map(|w| w * cfg.trap_frequency).collect();
                let k = 2.min(lr.len());
                ok &= print_table("coupled oscillators vs linear response", ("analytic", "linres"), &reference[..k], &lr[..k], 1e-3);
            } else {
                return Err(CliError::Usage("the distinguishable oracle covers two bilinearly coupled oscillators".into()));
            }
        }
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::Numerical("oracle comparison failed".into()))
    }
}

fn run_propcheck(common: &Common, steps: usize, dt: f64) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    if cfg.statistics == StatisticsKind::Dist {
        return Err(CliError::Usage("propcheck supports identical particles only".into()));
    }
    let ground = match load_ground(&cfg, common) {
        Ok(g) => g,
        Err(CliError::Lib(crate::Error::Io(_))) => solve(&cfg, None)?,
        Err(e) => return Err(e),
    };
    let Ground::Identical(system, gs) = ground else { unreachable!() };
    let (orb, coef) = perturbed_state(&gs, 1e-3, 7);
    let report = lib!(groundstate::propagate_check(&system, &orb, &coef, dt, steps, true))?;
    let worst = report.max_orbital_overlap_rate().max(report.max_coefficient_overlap_rate()).max(report.max_state_overlap_rate());
    println!("# config_sha256 = {}", cfg.hash());
    println!("steps = {steps} dt = {dt}");
    println!("max_orbital_overlap_rate = {:e}", report.max_orbital_overlap_rate());
    println!("max_coefficient_overlap_rate = {:e}", report.max_coefficient_overlap_rate());
    println!("max_state_overlap_rate = {:e}", report.max_state_overlap_rate());
    println!("max_orthonormality_drift = {:e}", report.max_orthonormality_drift());
    let ok = worst < 1e-8;
    println!("differential conditions {}", if ok { "PASS" } else { "FAIL" });
    if ok {
        Ok(())
    } else {
        Err(CliError::Numerical("differential conditions violated".into()))
    }
}

/// Ground state displaced by a random amplitude `eta`, orbitals re-orthonormalised and C normalised.
pub fn perturbed_state(gs: &GroundState, eta: f64, seed: u64) -> (Mat<C64>, Vec<C64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = |_: usize, _: usize| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let (n, m) = (gs.orbitals.nrows(), gs.orbitals.ncols());
    let d = Mat::from_fn(n, m, &mut g);
    let mut orb = &gs.orbitals + &linalg::scale(&d, C64::new(eta, 0.0));
    linalg::gram_schmidt(&mut orb);
    let mut coef: Vec<C64> = gs.coefficients.iter().enumerate().map(|(i, c)| c + g(i, 0) * eta).collect();
    let nc = linalg::norm(&coef);
    coef.iter_mut().for_each(|x| *x /= nc);
    (orb, coef)
}
