//! Linear response of the bare Schroedinger equation around the exact ground
//! state: excitation energies are exactly E_k - E_0 and the mode expansion
//! reproduces the driven response.

use lrmctdh::fockspace::Statistics;
use lrmctdh::grid::{Grid, InteractionKernel};
use lrmctdh::linalg::{column, dot};
use lrmctdh::oracle::{exact_diag_grid, se_linear_response};
use lrmctdh::spectrum::SpectrumOptions;
use lrmctdh::C64;

fn main() -> Result<(), lrmctdh::Error> {
    let grid = Grid::new(10, -5.0, 5.0)?;
    let h = grid.one_body_hamiltonian(1.0, &grid.harmonic_potential(1.0));
    let kernel = grid.discretize(&InteractionKernel::Gaussian { strength: 0.8, width: 0.5 })?;
    let exact = exact_diag_grid(2, Statistics::Fermion, &h, &kernel, usize::MAX)?;
    let se = se_linear_response(exact.hamiltonian.as_ref().unwrap(), &SpectrumOptions::default())?;
    let got = se.spectrum.excitation_energies();
    let worst = got.iter().zip(exact.excitations()).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)).fold(0.0, f64::max);
    let res = se.spectrum.resolution_checks(&se.matrix);
    println!("basis {} states, {} excitations", exact.basis.len(), got.len());
    println!("max relative |omega_k - (E_k - E_0)| = {worst:.2e}");
    println!("identity resolution defect {:.2e}, spectral resolution defect {:.2e}", res.identity, res.spectral);

    let x = grid.position_operator();
    let f = exact.basis.to_dense(&exact.basis.one_body(|j, i| x[(j, i)]));
    let r = se.perturbation_vector(&f);
    let omega = 0.7;
    let coef = se.coefficients(&f, omega)?;
    let y = se.spectrum.reconstruct(C64::new(omega, 0.0), &r, 1e-12)?;
    let n = exact.basis.len();
    println!("{:>3} {:>10} {:>24} {:>24}", "k", "omega_k", "c_k closed form", "c_k from modes");
    for k in 1..6 {
        let from_modes = dot(&column(&se.states, k), &y[..n]);
        println!("{:>3} {:>10.6} {:>24.12e} {:>24.12e}", k, se.exact_excitations[k - 1], coef.c_plus[k - 1].re, from_modes.re);
    }
    Ok(())
}
