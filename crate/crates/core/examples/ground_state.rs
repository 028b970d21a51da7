//! Multiconfigurational ground states of two contact-interacting bosons, with
//! the exact grid energy as variational floor.

use lrmctdh::config::Config;
use lrmctdh::fockspace::Statistics;
use lrmctdh::groundstate::solve_identical;
use lrmctdh::linalg::eigh;
use lrmctdh::oracle::exact_diag_grid;

fn main() -> Result<(), lrmctdh::Error> {
    let base = "[system]\nstatistics = boson\nparticles = 2\norbitals = {M}\n[grid]\npoints = 48\nx_min = -8\nx_max = 8\n[interaction]\nkind = contact\nstrength = 0.5\n";
    let cfg = Config::parse(&base.replace("{M}", "1"))?;
    let sys = cfg.identical_system()?;
    let exact = exact_diag_grid(2, Statistics::Boson, &sys.one_body, &sys.kernel, 1)?;
    println!("exact grid energy: {:.10}", exact.energies[0]);
    println!("{:>2} {:>14} {:>12} {:>6}  natural occupations", "M", "energy", "E - exact", "iters");
    for m in 1..=4 {
        let cfg = Config::parse(&base.replace("{M}", &m.to_string()))?;
        let sys = cfg.identical_system()?;
        let gs = solve_identical(&sys, None, &cfg.solver_options())?;
        let (mut occ, _) = eigh(&gs.rho1);
        occ.reverse();
        println!("{:>2} {:>14.10} {:>12.3e} {:>6}  {:.6?}", m, gs.energy, gs.energy - exact.energies[0], gs.iterations, occ);
    }
    Ok(())
}
