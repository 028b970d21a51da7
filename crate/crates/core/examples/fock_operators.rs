//! Configuration spaces and second-quantised operators, checked against
//! first-quantised (anti)symmetrised matrices.

use lrmctdh::fockspace::{FockSpace, Statistics};
use lrmctdh::oracle::fock_operator_defect;
use lrmctdh::C64;

fn main() -> Result<(), lrmctdh::Error> {
    let space = FockSpace::new(3, 3, Statistics::Boson)?;
    println!("N=3 bosons in M=3 orbitals: {} permanents", space.len());
    for i in 0..space.len() {
        println!("  {:>2} {:?}", i, space.config(i));
    }

    // c+_0 c_1 on a uniform superposition
    let c: Vec<C64> = vec![C64::new(1.0 / (space.len() as f64).sqrt(), 0.0); space.len()];
    let out = space.apply_one_body(&c, 0, 1);
    println!("c+_0 c_1 |uniform> support: {:?}", out.iter().enumerate().filter(|(_, x)| x.norm() > 0.0).map(|(i, _)| i).collect::<Vec<_>>());

    let (rho1, _) = space.reduced_densities(&c);
    let trace: f64 = (0..3).map(|k| rho1[(k, k)].re).sum();
    println!("trace rho1 = {trace:.12}");

    println!("\nmax deviation from first-quantised operators:");
    for st in [Statistics::Boson, Statistics::Fermion] {
        for (n, m) in [(2, 2), (2, 3), (3, 3), (2, 5), (4, 2)] {
            if st == Statistics::Fermion && n > m {
                continue;
            }
            println!("  {:?} N={n} M={m}: {:.1e}", st, fock_operator_defect(n, m, st)?);
        }
    }
    Ok(())
}
