//! One orbital: the response spectrum is the particle-conserving
//! Bogoliubov-de Gennes spectrum of the condensate.

use lrmctdh::config::Config;
use lrmctdh::groundstate::solve_identical;
use lrmctdh::linres_identical::assemble;
use lrmctdh::oracle::bdg_reference;
use lrmctdh::spectrum::{diagonalize, SpectrumOptions};

fn main() -> Result<(), lrmctdh::Error> {
    for lambda in [0.1, 1.0] {
        let cfg = Config::parse(&format!(
            "[system]\nstatistics = boson\nparticles = 2\norbitals = 1\n[grid]\npoints = 64\nx_min = -8\nx_max = 8\n[interaction]\nkind = contact\nstrength = {lambda}\n"
        ))?;
        let sys = cfg.identical_system()?;
        let gs = solve_identical(&sys, None, &cfg.solver_options())?;
        let lr = assemble(&sys, &gs)?;
        let spec = diagonalize(&lr.matrix, lr.layout, &SpectrumOptions::default())?;
        let bdg = bdg_reference(&sys.one_body, &sys.kernel, 2)?;
        println!("lambda = {lambda}: mu = {:.10}, zero modes {}", bdg.chemical_potential, spec.zero_count());
        println!("{:>3} {:>20} {:>20} {:>10} {:>10}", "k", "linear response", "BdG", "diff", "|u|2-|v|2");
        for (k, (a, b)) in spec.excitation_energies().iter().zip(&bdg.frequencies).take(6).enumerate() {
            println!("{:>3} {:>20.14} {:>20.14} {:>10.1e} {:>10.6}", k + 1, a, b, (a - b).abs(), bdg.norms[k]);
        }
    }
    Ok(())
}
