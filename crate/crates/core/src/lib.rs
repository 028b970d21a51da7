//! Linear response of multiconfigurational Hartree ground states for
//! one-dimensional grid systems of identical bosons, fermions or
//! distinguishable degrees of freedom.
//!
//! The library is organised bottom up: [`grid`] and [`fockspace`] provide the
//! discretisation and configuration spaces, [`hamiltonian`] the matrix
//! elements and mean fields, [`groundstate`] the stationary reference state,
//! [`linres_identical`] and [`linres_distinguishable`] assemble the response
//! matrices, [`spectrum`] diagonalises them, and [`oracle`] holds independent
//! reference solutions. The runnable examples under `examples/` walk through
//! each capability:
//!
//! ```text
//! cargo run --release -p lrmctdh --example harmonic_grid
//! cargo run --release -p lrmctdh --example fock_operators
//! cargo run --release -p lrmctdh --example ground_state
//! cargo run --release -p lrmctdh --example bdg_comparison
//! cargo run --release -p lrmctdh --example convergence_in_orbitals
//! cargo run --release -p lrmctdh --example coupled_oscillators
//! cargo run --release -p lrmctdh --example response_function
//! cargo run --release -p lrmctdh --example exact_response
//! ```

pub mod cli;
pub mod config;
pub mod fockspace;
pub mod grid;
pub mod groundstate;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
pub mod linres_distinguishable;
pub mod linres_identical;
pub mod oracle;
pub mod spectrum;

pub use linalg::C64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Grid(#[from] grid::GridError),
    #[error(transparent)]
    Fock(#[from] fockspace::FockError),
    #[error(transparent)]
    Hamiltonian(#[from] hamiltonian::HamiltonianError),
    #[error(transparent)]
    GroundState(#[from] groundstate::GroundStateError),
    #[error(transparent)]
    LinRes(#[from] linres_identical::LinResError),
    #[error(transparent)]
    Spectrum(#[from] spectrum::SpectrumError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Io(#[from] io::IoError),
}
