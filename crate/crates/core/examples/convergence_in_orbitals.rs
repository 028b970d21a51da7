//! Excitation energies of two contact-interacting bosons versus the number of
//! orbitals, against exact diagonalisation on the same grid.
//!
//! The lowest mode is the centre-of-mass (Kohn) mode at exactly 1; a single
//! orbital already reproduces it. The breathing mode near 1.92 is the one that
//! needs correlation.

use lrmctdh::config::Config;
use lrmctdh::fockspace::Statistics;
use lrmctdh::groundstate::solve_identical;
use lrmctdh::linres_identical::assemble;
use lrmctdh::oracle::exact_diag_grid;
use lrmctdh::spectrum::{diagonalize, SpectrumOptions};

fn main() -> Result<(), lrmctdh::Error> {
    let text = |m: usize| format!("[system]\nstatistics = boson\nparticles = 2\norbitals = {m}\n[grid]\npoints = 48\nx_min = -8\nx_max = 8\n[interaction]\nkind = contact\nstrength = 0.5\n");
    let sys = Config::parse(&text(1))?.identical_system()?;
    let exact = exact_diag_grid(2, Statistics::Boson, &sys.one_body, &sys.kernel, 6)?;
    let ex = exact.excitations();
    println!("exact: {:.8?}", &ex[..4]);
    for m in 1..=4 {
        let cfg = Config::parse(&text(m))?;
        let sys = cfg.identical_system()?;
        let gs = solve_identical(&sys, None, &cfg.solver_options())?;
        let lr = assemble(&sys, &gs)?;
        let spec = diagonalize(&lr.matrix, lr.layout, &SpectrumOptions::default())?;
        let w = spec.excitation_energies();
        println!(
            "M={m} dim={:>4} kohn {:.8} (err {:.1e})  breathing {:.8} (err {:.1e})",
            lr.dim(),
            w[0],
            (w[0] - ex[0]).abs(),
            w[1],
            (w[1] - ex[1]).abs()
        );
    }
    Ok(())
}
