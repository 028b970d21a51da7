//! Flat `key = value` run configuration grouped in `[section]`s.
//!
//! ```text
//! [system]
//! statistics = boson        # boson | fermion | dist
//! particles = 2
//! orbitals = 2              # comma list per dof for dist
//! [grid]
//! points = 48
//! x_min = -8
//! x_max = 8
//! ```
//!
//! [`Config::render`] emits every key including defaults; parsing the rendered
//! text reproduces the same value bit for bit.

use crate::fockspace::{FockSpace, Statistics};
use crate::grid::{Grid, InteractionKernel};
use crate::groundstate::SolverOptions;
use crate::hamiltonian::{Coupling, DistinguishableSystem, IdenticalSystem};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: invalid value `{value}` for `{key}`")]
    BadValue { line: usize, key: String, value: String },
    #[error("missing mandatory key `{0}`")]
    Missing(String),
    #[error("inconsistent configuration: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatisticsKind {
    Boson,
    Fermion,
    Dist,
}

impl StatisticsKind {
    pub fn name(self) -> &'static str {
        match self {
            StatisticsKind::Boson => "boson",
            StatisticsKind::Fermion => "fermion",
            StatisticsKind::Dist => "dist",
        }
    }

    pub fn identical(self) -> Option<Statistics> {
        match self {
            StatisticsKind::Boson => Some(Statistics::Boson),
            StatisticsKind::Fermion => Some(Statistics::Fermion),
            StatisticsKind::Dist => None,
        }
    }
}

impl FromStr for StatisticsKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "boson" => Ok(StatisticsKind::Boson),
            "fermion" => Ok(StatisticsKind::Fermion),
            "dist" => Ok(StatisticsKind::Dist),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionKind {
    None,
    Contact,
    Gaussian,
    /// `strength * x_j x_{j+1}` between neighbouring dofs.
    Bilinear,
}

impl InteractionKind {
    fn name(self) -> &'static str {
        match self {
            InteractionKind::None => "none",
            InteractionKind::Contact => "contact",
            InteractionKind::Gaussian => "gaussian",
            InteractionKind::Bilinear => "bilinear",
        }
    }
}

impl FromStr for InteractionKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "none" => Ok(InteractionKind::None),
            "contact" => Ok(InteractionKind::Contact),
            "gaussian" => Ok(InteractionKind::Gaussian),
            "bilinear" => Ok(InteractionKind::Bilinear),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationKind {
    None,
    /// `f = x` (summed over particles, or on one dof).
    Position,
    /// `f = x^2`.
    PositionSquared,
}

impl PerturbationKind {
    fn name(self) -> &'static str {
        match self {
            PerturbationKind::None => "none",
            PerturbationKind::Position => "position",
            PerturbationKind::PositionSquared => "position2",
        }
    }
}

impl FromStr for PerturbationKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "none" => Ok(PerturbationKind::None),
            "position" => Ok(PerturbationKind::Position),
            "position2" => Ok(PerturbationKind::PositionSquared),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub statistics: StatisticsKind,
    /// Ignored for `dist`.
    pub particles: usize,
    /// One entry for identical particles, one per dof otherwise.
    pub orbitals: Vec<usize>,
    pub mass: f64,
    pub points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub trap_frequency: f64,
    pub interaction: InteractionKind,
    pub strength: f64,
    pub width: f64,
    pub tol_orb: f64,
    pub tol_c: f64,
    pub max_iter: usize,
    pub tol_zero: Option<f64>,
    pub perturbation: PerturbationKind,
    pub perturbation_dof: usize,
    /// Driving frequencies for the reconstructed response.
    pub drive: Vec<f64>,
}

const KEYS: &[(&str, &[&str])] = &[
    ("system", &["statistics", "particles", "orbitals", "mass"]),
    ("grid", &["points", "x_min", "x_max", "trap_frequency"]),
    ("interaction", &["kind", "strength", "width"]),
    ("solver", &["tol_orb", "tol_c", "max_iter", "tol_zero"]),
    ("perturbation", &["operator", "dof", "omega"]),
];

const MANDATORY: &[&str] = &["system.statistics", "system.orbitals", "grid.points", "grid.x_min", "grid.x_max"];

struct Entry {
    line: usize,
    value: String,
}

fn parse_value<T: FromStr>(key: &str, e: &Entry) -> Result<T, ConfigError> {
    e.value.parse::<T>().map_err(|_| ConfigError::BadValue { line: e.line, key: key.to_string(), value: e.value.clone() })
}

fn parse_list<T: FromStr>(key: &str, e: &Entry) -> Result<Vec<T>, ConfigError> {
    if e.value.trim().is_empty() {
        return Ok(Vec::new());
    }
    e.value
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| ConfigError::BadValue { line: e.line, key: key.to_string(), value: e.value.clone() }))
        .collect()
}

fn fmt_f64(x: f64) -> String {
    // shortest round-trip representation
    format!("{x:?}")
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut entries: std::collections::HashMap<String, Entry> = std::collections::HashMap::new();
        let mut section: Option<&str> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax { line, message: "unterminated section header".into() })?.trim();
                section = Some(
                    KEYS.iter()
                        .find(|(s, _)| *s == name)
                        .map(|(s, _)| *s)
                        .ok_or_else(|| ConfigError::UnknownSection { line, name: name.to_string() })?,
                );
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax { line, message: format!("expected `key = value`, found `{content}`") })?;
            let sec = section.ok_or_else(|| ConfigError::Syntax { line, message: "key outside of any section".into() })?;
            let key = key.trim();
            let allowed = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(ConfigError::UnknownKey { line, key: format!("{sec}.{key}") });
            }
            let full = format!("{sec}.{key}");
            if entries.contains_key(&full) {
                return Err(ConfigError::Duplicate { line, key: full });
            }
            entries.insert(full, Entry { line, value: value.trim().to_string() });
        }
        for k in MANDATORY {
            if !entries.contains_key(*k) {
                return Err(ConfigError::Missing(k.to_string()));
            }
        }
        let get = |k: &str| entries.get(k);
        let statistics: StatisticsKind = parse_value("system.statistics", &entries["system.statistics"])?;
        let particles = match get("system.particles") {
            Some(e) => parse_value("system.particles", e)?,
            None if statistics == StatisticsKind::Dist => 1,
            None => return Err(ConfigError::Missing("system.particles".into())),
        };
        let f = |k: &str, d: f64| -> Result<f64, ConfigError> { get(k).map(|e| parse_value(k, e)).unwrap_or(Ok(d)) };
        let cfg = Config {
            statistics,
            particles,
            orbitals: parse_list("system.orbitals", &entries["system.orbitals"])?,
            mass: f("system.mass", 1.0)?,
            points: parse_value("grid.points", &entries["grid.points"])?,
            x_min: parse_value("grid.x_min", &entries["grid.x_min"])?,
            x_max: parse_value("grid.x_max", &entries["grid.x_max"])?,
            trap_frequency: f("grid.trap_frequency", 1.0)?,
            interaction: get("interaction.kind").map(|e| parse_value("interaction.kind", e)).unwrap_or(Ok(InteractionKind::None))?,
            strength: f("interaction.strength", 0.0)?,
            width: f("interaction.width", 1.0)?,
            tol_orb: f("solver.tol_orb", SolverOptions::default().tol_orb)?,
            tol_c: f("solver.tol_c", SolverOptions::default().tol_c)?,
            max_iter: get("solver.max_iter").map(|e| parse_value("solver.max_iter", e)).unwrap_or(Ok(SolverOptions::default().max_iter))?,
            tol_zero: match get("solver.tol_zero") {
                Some(e) if e.value != "auto" => Some(parse_value("solver.tol_zero", e)?),
                _ => None,
            },
            perturbation: get("perturbation.operator").map(|e| parse_value("perturbation.operator", e)).unwrap_or(Ok(PerturbationKind::Position))?,
            perturbation_dof: get("perturbation.dof").map(|e| parse_value("perturbation.dof", e)).unwrap_or(Ok(0))?,
            drive: get("perturbation.omega").map(|e| parse_list("perturbation.omega", e)).unwrap_or(Ok(Vec::new()))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Inconsistent(m.to_string()));
        if self.orbitals.is_empty() || self.orbitals.contains(&0) {
            return bad("every orbital count must be positive");
        }
        match self.statistics {
            StatisticsKind::Dist => {
                if self.interaction != InteractionKind::None && self.interaction != InteractionKind::Bilinear {
                    return bad("distinguishable dofs support interaction kinds none and bilinear");
                }
                if self.perturbation_dof >= self.orbitals.len() {
                    return bad("perturbation.dof exceeds the number of dofs");
                }
            }
            _ => {
                if self.orbitals.len() != 1 {
                    return bad("identical particles take a single orbital count");
                }
                if self.interaction == InteractionKind::Bilinear {
                    return bad("bilinear coupling needs statistics = dist");
                }
                if self.particles == 0 {
                    return bad("particles must be positive");
                }
            }
        }
        if !(self.x_max > self.x_min) {
            return bad("grid.x_max must exceed grid.x_min");
        }
        Ok(())
    }

    /// Canonical text with every key; the hash is taken over this string.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "[system]");
        let _ = writeln!(s, "statistics = {}", self.statistics.name());
        let _ = writeln!(s, "particles = {}", self.particles);
        let _ = writeln!(s, "orbitals = {}", list(&self.orbitals));
        let _ = writeln!(s, "mass = {}", fmt_f64(self.mass));
        let _ = writeln!(s, "[grid]");
        let _ = writeln!(s, "points = {}", self.points);
        let _ = writeln!(s, "x_min = {}", fmt_f64(self.x_min));
        let _ = writeln!(s, "x_max = {}", fmt_f64(self.x_max));
        let _ = writeln!(s, "trap_frequency = {}", fmt_f64(self.trap_frequency));
        let _ = writeln!(s, "[interaction]");
        let _ = writeln!(s, "kind = {}", self.interaction.name());
        let _ = writeln!(s, "strength = {}", fmt_f64(self.strength));
        let _ = writeln!(s, "width = {}", fmt_f64(self.width));
        let _ = writeln!(s, "[solver]");
        let _ = writeln!(s, "tol_orb = {}", fmt_f64(self.tol_orb));
        let _ = writeln!(s, "tol_c = {}", fmt_f64(self.tol_c));
        let _ = writeln!(s, "max_iter = {}", self.max_iter);
        let _ = writeln!(s, "tol_zero = {}", self.tol_zero.map(fmt_f64).unwrap_or_else(|| "auto".into()));
        let _ = writeln!(s, "[perturbation]");
        let _ = writeln!(s, "operator = {}", self.perturbation.name());
        let _ = writeln!(s, "dof = {}", self.perturbation_dof);
        let _ = writeln!(s, "omega = {}", self.drive.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(","));
        s
    }

    pub fn hash(&self) -> String {
        Sha256::digest(self.render().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { tol_orb: self.tol_orb, tol_c: self.tol_c, max_iter: self.max_iter, ..SolverOptions::default() }
    }

    pub fn grid(&self) -> Result<Grid, crate::Error> {
        Ok(Grid::new(self.points, self.x_min, self.x_max)?)
    }

    pub fn kernel(&self) -> InteractionKernel {
        match self.interaction {
            InteractionKind::Contact => InteractionKernel::Contact { strength: self.strength },
            InteractionKind::Gaussian => InteractionKernel::Gaussian { strength: self.strength, width: self.width },
            InteractionKind::None | InteractionKind::Bilinear => InteractionKernel::None,
        }
    }

    pub fn identical_system(&self) -> Result<IdenticalSystem, crate::Error> {
        let stats = self.statistics.identical().ok_or_else(|| ConfigError::Inconsistent("statistics = dist has no identical-particle system".into()))?;
        let grid = self.grid()?;
        let h = grid.one_body_hamiltonian(self.mass, &grid.harmonic_potential(self.trap_frequency));
        let kernel = grid.discretize(&self.kernel())?;
        let space = FockSpace::new(self.particles, self.orbitals[0], stats)?;
        Ok(IdenticalSystem::new(grid, h, kernel, space)?)
    }

    pub fn distinguishable_system(&self) -> Result<DistinguishableSystem, crate::Error> {
        let q = self.orbitals.len();
        let grids: Vec<Grid> = (0..q).map(|_| self.grid()).collect::<Result<_, _>>()?;
        let h = grids.iter().map(|g| g.one_body_hamiltonian(self.mass, &g.harmonic_potential(self.trap_frequency))).collect();
        let coupling = if self.interaction == InteractionKind::Bilinear && q >= 2 && self.strength != 0.0 {
            let terms = (0..q - 1).map(|j| Coupling::bilinear_term(&grids, j, j + 1, self.strength)).collect::<Result<Vec<_>, _>>()?;
            Coupling::Pairwise(terms)
        } else {
            Coupling::none()
        };
        DistinguishableSystem::new(grids, h, coupling, &self.orbitals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "[system]\nstatistics = boson\nparticles = 2\norbitals = 2\n[grid]\npoints = 32\nx_min = -6\nx_max = 6\n";

    #[test]
    fn defaults_and_round_trip() {
        let c = Config::parse(BASE).unwrap();
        assert_eq!(c.mass, 1.0);
        assert_eq!(c.interaction, InteractionKind::None);
        assert_eq!(c.tol_zero, None);
        let again = Config::parse(&c.render()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.hash(), c.hash());
    }

    #[test]
    fn floats_round_trip_bit_exactly() {
        let mut c = Config::parse(BASE).unwrap();
        c.strength = 0.1 + 0.2;
        c.x_min = -std::f64::consts::PI;
        c.drive = vec![1.0 / 3.0, 2e-300];
        c.tol_zero = Some(1.2345678901234567e-7);
        let again = Config::parse(&c.render()).unwrap();
        assert_eq!(again.strength.to_bits(), c.strength.to_bits());
        assert_eq!(again, c);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = Config::parse("[system]\nstatistics = boson\nparticles two\n").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 3, .. }), "{e:?}");
        let e = Config::parse(&BASE.replace("points = 32", "points = x")).unwrap_err();
        assert!(matches!(e, ConfigError::BadValue { line: 6, .. }), "{e:?}");
        let e = Config::parse(&format!("{BASE}[bogus]\n")).unwrap_err();
        assert!(matches!(e, ConfigError::UnknownSection { line: 9, .. }));
        let e = Config::parse(&format!("{BASE}colour = red\n")).unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey { line: 9, .. }));
    }

    #[test]
    fn missing_key_is_named() {
        let e = Config::parse(&BASE.replace("x_max = 6\n", "")).unwrap_err();
        assert_eq!(e, ConfigError::Missing("grid.x_max".into()));
        assert!(e.to_string().contains("grid.x_max"));
    }

    #[test]
    fn dist_builds_chain_coupling() {
        let c = Config::parse("[system]\nstatistics = dist\norbitals = 2,2\n[grid]\npoints = 12\nx_min = -5\nx_max = 5\n[interaction]\nkind = bilinear\nstrength = 0.2\n").unwrap();
        let s = c.distinguishable_system().unwrap();
        assert_eq!(s.n_dof(), 2);
        assert!(!s.coupling.is_zero());
        assert!(Config::parse("[system]\nstatistics = boson\nparticles = 2\norbitals = 2\n[grid]\npoints = 12\nx_min = -5\nx_max = 5\n[interaction]\nkind = bilinear\n").is_err());
    }
}
