//! Sine-DVR discretisation of the harmonic oscillator: spectrum accuracy versus grid size.

use lrmctdh::grid::Grid;
use lrmctdh::linalg::eigh;

fn main() -> Result<(), lrmctdh::Error> {
    println!("{:>6} {:>8} {:>14} {:>14} {:>14}", "points", "dx", "E0 - 0.5", "E3 - 3.5", "E8 - 8.5");
    for n in [16, 24, 32, 48, 64, 96] {
        let grid = Grid::new(n, -8.0, 8.0)?;
        let h = grid.one_body_hamiltonian(1.0, &grid.harmonic_potential(1.0));
        let (w, _) = eigh(&h);
        println!("{:>6} {:>8.4} {:>14.3e} {:>14.3e} {:>14.3e}", n, grid.weight(), w[0] - 0.5, w[3] - 3.5, w[8] - 8.5);
    }

    // position matrix elements in the oscillator basis: <0|x|1> = 1/sqrt(2)
    let grid = Grid::new(48, -8.0, 8.0)?;
    let h = grid.one_body_hamiltonian(1.0, &grid.harmonic_potential(1.0));
    let (_, u) = eigh(&h);
    let x = grid.position_operator();
    let phi0 = lrmctdh::linalg::column(&u, 0);
    let phi1 = lrmctdh::linalg::column(&u, 1);
    let x01 = lrmctdh::linalg::dot(&phi0, &lrmctdh::linalg::matvec(&x, &phi1));
    println!("|<0|x|1>| = {:.12} (exact {:.12})", x01.norm(), 0.5f64.sqrt());
    Ok(())
}
