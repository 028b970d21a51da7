//! Dipole response of two interacting bosons: mode strengths and the
//! reconstructed response norm as a function of driving frequency.

use lrmctdh::config::Config;
use lrmctdh::groundstate::solve_identical;
use lrmctdh::linalg::norm;
use lrmctdh::linres_identical::{assemble, Perturbation};
use lrmctdh::spectrum::{diagonalize, SpectrumOptions};
use lrmctdh::C64;

fn main() -> Result<(), lrmctdh::Error> {
    let cfg = Config::parse("[system]\nstatistics = boson\nparticles = 2\norbitals = 2\n[grid]\npoints = 32\nx_min = -7\nx_max = 7\n[interaction]\nkind = contact\nstrength = 1.0\n")?;
    let sys = cfg.identical_system()?;
    let gs = solve_identical(&sys, None, &cfg.solver_options())?;
    let lr = assemble(&sys, &gs)?;
    let spec = diagonalize(&lr.matrix, lr.layout, &SpectrumOptions::default())?;

    for (name, op) in [("x", sys.grid.position_operator()), ("x^2", &sys.grid.position_operator() * &sys.grid.position_operator())] {
        let r = lr.perturbation_vector(&sys, &gs, &Perturbation::one_body(op))?;
        let mut w = spec.response_weights(&r);
        w.sort_by(|a, b| b.gamma_plus.norm().total_cmp(&a.gamma_plus.norm()));
        println!("f = {name}: strongest modes");
        for x in w.iter().take(3) {
            println!("  omega {:.8}  |gamma_k|^2 {:.6e}  |gamma_-k|^2 {:.6e}", x.omega.re, x.gamma_plus.norm_sqr(), x.gamma_minus.norm_sqr());
        }
        println!("  {:>8} {:>14}", "omega", "|response|");
        for k in 0..=12 {
            let omega = 0.25 * k as f64 + 0.05;
            let y = spec.reconstruct(C64::new(omega, 0.02), &r, 1e-12)?;
            println!("  {:>8.3} {:>14.6e}", omega, norm(&y));
        }
    }
    Ok(())
}
