#![allow(dead_code)]

use lrmctdh::config::Config;
use lrmctdh::groundstate::{solve_distinguishable, solve_identical, DistinguishableGroundState, GroundState};
use lrmctdh::hamiltonian::{DistinguishableSystem, IdenticalSystem};

pub fn identical_cfg(stats: &str, n: usize, m: usize, points: usize, half_width: f64, interaction: &str) -> Config {
    Config::parse(&format!(
        "[system]\nstatistics = {stats}\nparticles = {n}\norbitals = {m}\n[grid]\npoints = {points}\nx_min = -{half_width}\nx_max = {half_width}\n[interaction]\n{interaction}\n"
    ))
    .unwrap()
}

pub fn contact(strength: f64) -> String {
    format!("kind = contact\nstrength = {strength}")
}

pub fn gaussian(strength: f64, width: f64) -> String {
    format!("kind = gaussian\nstrength = {strength}\nwidth = {width}")
}

pub fn identical(cfg: &Config) -> (IdenticalSystem, GroundState) {
    let sys = cfg.identical_system().unwrap();
    let gs = solve_identical(&sys, None, &cfg.solver_options()).unwrap();
    (sys, gs)
}

pub fn oscillators(orbitals: &str, points: usize, half_width: f64, lambda: f64) -> (DistinguishableSystem, DistinguishableGroundState) {
    let cfg = Config::parse(&format!(
        "[system]\nstatistics = dist\norbitals = {orbitals}\n[grid]\npoints = {points}\nx_min = -{half_width}\nx_max = {half_width}\n[interaction]\nkind = bilinear\nstrength = {lambda}\n"
    ))
    .unwrap();
    let sys = cfg.distinguishable_system().unwrap();
    let gs = solve_distinguishable(&sys, None, &cfg.solver_options()).unwrap();
    (sys, gs)
}

/// Distinct values (spacing above `tol`) of an ascending list.
pub fn distinct(values: &[f64], tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &v in values {
        if out.last().map_or(true, |&l| (v - l).abs() > tol) {
            out.push(v);
        }
    }
    out
}
