//! Two bilinearly coupled oscillators treated as distinguishable degrees of
//! freedom; normal modes sqrt(1 -+ lambda).

use lrmctdh::config::Config;
use lrmctdh::groundstate::solve_distinguishable;
use lrmctdh::linres_distinguishable::assemble;
use lrmctdh::oracle::coupled_oscillators_reference;
use lrmctdh::spectrum::{diagonalize, SpectrumOptions};

fn main() -> Result<(), lrmctdh::Error> {
    for orbitals in ["1,1", "2,2", "4,4"] {
        for lambda in [0.2, 0.5, 0.9] {
            let cfg = Config::parse(&format!(
                "[system]\nstatistics = dist\norbitals = {orbitals}\n[grid]\npoints = 32\nx_min = -8\nx_max = 8\n[interaction]\nkind = bilinear\nstrength = {lambda}\n"
            ))?;
            let sys = cfg.distinguishable_system()?;
            let gs = solve_distinguishable(&sys, None, &cfg.solver_options())?;
            let lr = assemble(&sys, &gs)?;
            let spec = diagonalize(&lr.matrix, lr.layout, &SpectrumOptions::default())?;
            let w = spec.excitation_energies();
            let [lo, hi] = coupled_oscillators_reference(lambda)?;
            println!(
                "M=({orbitals}) lambda={lambda}: {:.8} {:.8}  analytic {:.8} {:.8}  zero modes {}/{}",
                w[0],
                w[1],
                lo,
                hi,
                spec.zero_count(),
                lr.expected_zero_modes()
            );
        }
    }
    Ok(())
}
