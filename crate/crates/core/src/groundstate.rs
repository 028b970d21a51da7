//! Ground states of the multiconfigurational ansatz by alternating CI
//! diagonalisation and projected imaginary-time orbital relaxation, plus a
//! real-time check of the fully projected equations of motion.

use crate::fockspace::TwoBodyDensity;
use crate::hamiltonian::{one_body_matrix, DistinguishableSystem, IdenticalSystem};
use crate::linalg::{
    self, adjoint, c, column, eigh, gram_schmidt, hermitian_function, identity, lanczos_lowest, matvec, max_abs, C64, ZERO,
};
use faer::Mat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GroundStateError {
    #[error("ground state not converged after {iterations} iterations (orbital residual {residual_orb:e}, CI residual {residual_c:e}, energy {energy})")]
    NotConverged { iterations: usize, residual_orb: f64, residual_c: f64, energy: f64 },
    #[error("initial orbitals have shape {got:?}, expected {expected:?}")]
    GuessShape { got: (usize, usize), expected: (usize, usize) },
    #[error("orbitals became linearly dependent (pivot {0:e})")]
    LinearDependence(f64),
    #[error("norm drift {drift:e} at step {step} exceeds 1e-6")]
    NormDrift { step: usize, drift: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol_orb: f64,
    pub tol_c: f64,
    pub max_iter: usize,
    /// Initial imaginary-time step.
    pub step: f64,
    /// Orbital steps per CI diagonalisation.
    pub inner_steps: usize,
    /// Precondition the orbital gradient with `(h - e_min + 1)^-1`.
    pub preconditioned: bool,
    /// Use Lanczos instead of dense diagonalisation above this CI size.
    pub lanczos_threshold: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_orb: 1e-8,
            tol_c: 1e-10,
            max_iter: 500,
            step: 0.01,
            inner_steps: 20,
            preconditioned: true,
            lanczos_threshold: 500,
        }
    }
}

/// Relative floor for eigenvalues of one-body densities before inversion.
pub const DENSITY_FLOOR: f64 = 1e-10;

/// `rho^-1` with eigenvalues floored at `DENSITY_FLOOR * trace`.
pub fn regularized_inverse(rho: &Mat<C64>) -> Mat<C64> {
    let tr: f64 = (0..rho.nrows()).map(|k| rho[(k, k)].re).sum();
    let floor = DENSITY_FLOOR * tr.max(1.0);
    hermitian_function(rho, |x| 1.0 / x.max(floor))
}

/// `rho^p` with the same eigenvalue floor.
pub fn regularized_power(rho: &Mat<C64>, p: f64) -> Mat<C64> {
    let tr: f64 = (0..rho.nrows()).map(|k| rho[(k, k)].re).sum();
    let floor = DENSITY_FLOOR * tr.max(1.0);
    hermitian_function(rho, |x| x.max(floor).powf(p))
}

/// `1 - Phi Phi^dagger` on coefficient space.
pub fn orbital_projector(orbitals: &Mat<C64>) -> Mat<C64> {
    &identity(orbitals.nrows()) - &(orbitals * &adjoint(orbitals))
}

fn lowest_eigenpair(h: &Mat<C64>, previous: Option<&[C64]>, opts: &SolverOptions) -> (f64, Vec<C64>) {
    let n = h.nrows();
    let (e, mut v) = if n > opts.lanczos_threshold {
        let start: Vec<C64> = match previous {
            Some(p) if p.len() == n => p.to_vec(),
            _ => (0..n).map(|i| c(1.0 / (1.0 + i as f64))).collect(),
        };
        lanczos_lowest(h, &start, 300, 1e-13)
    } else {
        let (w, u) = eigh(h);
        (w[0], column(&u, 0))
    };
    fix_phase(&mut v);
    (e, v)
}

/// Rotates a vector so that its largest component is real and positive.
pub fn fix_phase(v: &mut [C64]) {
    let big = v.iter().copied().fold(ZERO, |a, b| if b.norm() > a.norm() { b } else { a });
    if big.norm() > 0.0 {
        let ph = big.conj() / big.norm();
        v.iter_mut().for_each(|x| *x *= ph);
    }
}

fn preconditioner(h: &Mat<C64>, enabled: bool) -> Option<Mat<C64>> {
    if !enabled {
        return None;
    }
    let (w, _) = eigh(h);
    let shift = w[0];
    Some(hermitian_function(h, |x| 1.0 / (x - shift + 1.0)))
}

/// Descent direction `P K^-1 G (rho^-1)^T` for gradient columns `G`.
fn descent(g: &Mat<C64>, rho_inv: &Mat<C64>, kinv: Option<&Mat<C64>>, proj: &Mat<C64>) -> Mat<C64> {
    let d = g * &linalg::transpose(rho_inv);
    match kinv {
        Some(k) => proj * &(k * &d),
        None => d,
    }
}

fn retract(orbitals: &Mat<C64>, dir: &Mat<C64>, tau: f64) -> Result<Mat<C64>, GroundStateError> {
    let mut trial = orbitals - &linalg::scale(dir, c(tau));
    let pivot = gram_schmidt(&mut trial);
    if !(pivot > 1e-8) {
        return Err(GroundStateError::LinearDependence(pivot));
    }
    Ok(trial)
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub orbitals: Mat<C64>,
    pub coefficients: Vec<C64>,
    pub energy: f64,
    pub rho1: Mat<C64>,
    pub rho2: TwoBodyDensity,
    /// `mu_kq = <phi_q|F_k>`.
    pub mu: Mat<C64>,
    pub residual_orb: f64,
    pub residual_c: f64,
    pub mu_hermiticity: f64,
    pub iterations: usize,
    pub energy_trace: Vec<f64>,
}

/// `E = sum h_kq rho_kq + 1/2 sum W_ksql rho_kslq` for fixed densities.
fn energy_at(system: &IdenticalSystem, orbitals: &Mat<C64>, rho1: &Mat<C64>, rho2: &TwoBodyDensity) -> f64 {
    let m = system.n_orbitals();
    let h = one_body_matrix(orbitals, &system.one_body);
    let mut e = ZERO;
    for k in 0..m {
        for q in 0..m {
            e += h[(k, q)] * rho1[(k, q)];
        }
    }
    if system.space.n_particles() >= 2 && !system.kernel.is_zero() {
        let w = system.two_body_tensor(orbitals, &system.local_potentials(orbitals));
        for k in 0..m {
            for s in 0..m {
                for l in 0..m {
                    for q in 0..m {
                        e += w.get(k, s, q, l) * rho2.get(k, s, l, q) * 0.5;
                    }
                }
            }
        }
    }
    e.re
}

pub fn initial_orbitals(one_body: &Mat<C64>, m: usize) -> Mat<C64> {
    let (_, u) = eigh(one_body);
    let mut o = Mat::from_fn(one_body.nrows(), m, |i, k| u[(i, k)]);
    for k in 0..m {
        let mut col = column(&o, k);
        fix_phase(&mut col);
        linalg::set_column(&mut o, k, &col);
    }
    o
}

/// Alternating CI / orbital relaxation for identical particles.
pub fn solve_identical(system: &IdenticalSystem, guess: Option<&Mat<C64>>, opts: &SolverOptions) -> Result<GroundState, GroundStateError> {
    let n = system.grid.len();
    let m = system.n_orbitals();
    let mut orbitals = match guess {
        Some(g) => {
            if (g.nrows(), g.ncols()) != (n, m) {
                return Err(GroundStateError::GuessShape { got: (g.nrows(), g.ncols()), expected: (n, m) });
            }
            let mut o = g.clone();
            gram_schmidt(&mut o);
            o
        }
        None => initial_orbitals(&system.one_body, m),
    };
    let kinv = preconditioner(&system.one_body, opts.preconditioned);
    let mut tau = opts.step;
    let tau_max = if opts.preconditioned { 2.0 } else { 50.0 * opts.step };
    let mut prev_c: Option<Vec<C64>> = None;
    let mut trace = Vec::new();
    let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for iter in 1..=opts.max_iter {
        let h_ci = system.hamiltonian_matrix(&orbitals);
        let (e, coef) = lowest_eigenpair(&h_ci, prev_c.as_deref(), opts);
        let hc = matvec(&h_ci, &coef);
        let residual_c = linalg::norm(&hc.iter().zip(&coef).map(|(a, b)| a - b * e).collect::<Vec<_>>());
        let (rho1, rho2) = system.space.reduced_densities(&coef);
        let forces = system.orbital_forces(&orbitals, &rho1, &rho2);
        let proj = orbital_projector(&orbitals);
        let grad = &proj * &forces;
        let residual_orb = (0..m).map(|k| linalg::norm(&column(&grad, k))).fold(0.0, f64::max);
        trace.push(e);
        last = (e, residual_orb, residual_c);
        if residual_orb < opts.tol_orb && residual_c < opts.tol_c {
            let mu = linalg::transpose(&(&adjoint(&orbitals) * &forces));
            let mu_hermiticity = linalg::max_abs_diff(&mu, &adjoint(&mu));
            return Ok(GroundState {
                orbitals,
                coefficients: coef,
                energy: e,
                rho1,
                rho2,
                mu,
                residual_orb,
                residual_c,
                mu_hermiticity,
                iterations: iter,
                energy_trace: trace,
            });
        }
        let rho_inv = regularized_inverse(&rho1);
        let mut e_cur = energy_at(system, &orbitals, &rho1, &rho2);
        for _ in 0..opts.inner_steps {
            let g0 = &orbital_projector(&orbitals) * &system.orbital_forces(&orbitals, &rho1, &rho2);
            if (0..m).map(|k| linalg::norm(&column(&g0, k))).fold(0.0, f64::max) < 0.1 * opts.tol_orb {
                break;
            }
            let mut accepted = false;
            for _ in 0..40 {
                let p0 = orbital_projector(&orbitals);
                let d0 = descent(&g0, &rho_inv, kinv.as_ref(), &p0);
                let half = retract(&orbitals, &d0, 0.5 * tau)?;
                let gh = &orbital_projector(&half) * &system.orbital_forces(&half, &rho1, &rho2);
                let dh = descent(&gh, &rho_inv, kinv.as_ref(), &orbital_projector(&half));
                let trial = retract(&orbitals, &dh, tau)?;
                let e_new = energy_at(system, &trial, &rho1, &rho2);
                // near convergence energy differences drop below rounding; fall back to the gradient norm
                let noise = 1e-12 * e_cur.abs().max(1.0);
                let improves = e_new < e_cur - noise
                    || (e_new <= e_cur + noise && {
                        let gt = &orbital_projector(&trial) * &system.orbital_forces(&trial, &rho1, &rho2);
                        gt.norm_l2() < g0.norm_l2()
                    });
                if improves {
                    orbitals = trial;
                    e_cur = e_new;
                    tau = (tau * 1.2).min(tau_max);
                    accepted = true;
                    break;
                }
                tau *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        prev_c = Some(coef);
    }
    Err(GroundStateError::NotConverged { iterations: opts.max_iter, residual_orb: last.1, residual_c: last.2, energy: last.0 })
}

/// Densities, energy, `mu` and residuals of a given identical-particle state.
pub fn evaluate_identical(system: &IdenticalSystem, orbitals: Mat<C64>, coefficients: Vec<C64>) -> GroundState {
    let m = system.n_orbitals();
    let h_ci = system.hamiltonian_matrix(&orbitals);
    let hc = matvec(&h_ci, &coefficients);
    let e = linalg::dot(&coefficients, &hc).re;
    let residual_c = linalg::norm(&hc.iter().zip(&coefficients).map(|(a, b)| a - b * e).collect::<Vec<_>>());
    let (rho1, rho2) = system.space.reduced_densities(&coefficients);
    let forces = system.orbital_forces(&orbitals, &rho1, &rho2);
    let grad = &orbital_projector(&orbitals) * &forces;
    let residual_orb = (0..m).map(|k| linalg::norm(&column(&grad, k))).fold(0.0, f64::max);
    let mu = linalg::transpose(&(&adjoint(&orbitals) * &forces));
    let mu_hermiticity = linalg::max_abs_diff(&mu, &adjoint(&mu));
    GroundState { orbitals, coefficients, energy: e, rho1, rho2, mu, residual_orb, residual_c, mu_hermiticity, iterations: 0, energy_trace: vec![e] }
}

/// `(P F, P_C H C)`: right-hand sides of `i rho phi' = P F` and `i C' = P_C H C`.
pub fn nonlinear_rhs(system: &IdenticalSystem, orbitals: &Mat<C64>, coefficients: &[C64]) -> (Mat<C64>, Vec<C64>) {
    let (rho1, rho2) = system.space.reduced_densities(coefficients);
    let g = &orbital_projector(orbitals) * &system.orbital_forces(orbitals, &rho1, &rho2);
    let h = system.hamiltonian_matrix(orbitals);
    let hc = matvec(&h, coefficients);
    let overlap = linalg::dot(coefficients, &hc);
    let gc = hc.iter().zip(coefficients).map(|(a, b)| a - b * overlap).collect();
    (g, gc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub orbital_overlap_rate: f64,
    pub coefficient_overlap_rate: f64,
    pub state_overlap_rate: f64,
    pub orthonormality_drift: f64,
    pub norm_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationReport {
    pub steps: Vec<StepDiagnostics>,
}

impl PropagationReport {
    pub fn max_orbital_overlap_rate(&self) -> f64 {
        self.steps.iter().map(|s| s.orbital_overlap_rate).fold(0.0, f64::max)
    }
    pub fn max_coefficient_overlap_rate(&self) -> f64 {
        self.steps.iter().map(|s| s.coefficient_overlap_rate).fold(0.0, f64::max)
    }
    pub fn max_state_overlap_rate(&self) -> f64 {
        self.steps.iter().map(|s| s.state_overlap_rate).fold(0.0, f64::max)
    }
    pub fn max_orthonormality_drift(&self) -> f64 {
        self.steps.iter().map(|s| s.orthonormality_drift).fold(0.0, f64::max)
    }
}

fn time_derivative(system: &IdenticalSystem, orbitals: &Mat<C64>, coefficients: &[C64], projector: bool) -> (Mat<C64>, Vec<C64>) {
    let (rho1, rho2) = system.space.reduced_densities(coefficients);
    // exact complement projector even after the integrator's orthonormality drift
    let gram = &adjoint(orbitals) * orbitals;
    let gram_inv = linalg::hermitian_function(&linalg::hermitian_part(&gram), |x| 1.0 / x);
    let p = &identity(orbitals.nrows()) - &(&(orbitals * &gram_inv) * &adjoint(orbitals));
    let g = &p * &system.orbital_forces(orbitals, &rho1, &rho2);
    let rho_inv = regularized_inverse(&rho1);
    let mi = C64::new(0.0, -1.0);
    let dphi = linalg::scale(&(&g * &linalg::transpose(&rho_inv)), mi);
    let h = system.hamiltonian_matrix(orbitals);
    let hc = matvec(&h, coefficients);
    let dc = if projector {
        let ov = linalg::dot(coefficients, &hc) / linalg::norm(coefficients).powi(2);
        hc.iter().zip(coefficients).map(|(a, b)| (a - b * ov) * mi).collect()
    } else {
        hc.iter().map(|a| a * mi).collect()
    };
    (dphi, dc)
}

/// RK4 integration of the fully projected real-time equations, recording
/// gauge and orthonormality diagnostics at every step.
pub fn propagate_check(system: &IdenticalSystem, orbitals: &Mat<C64>, coefficients: &[C64], dt: f64, steps: usize, projector: bool) -> Result<PropagationReport, GroundStateError> {
    let m = orbitals.ncols();
    let mut phi = orbitals.clone();
    let mut cf = coefficients.to_vec();
    let norm0 = linalg::norm(&cf);
    let mut out = Vec::with_capacity(steps);
    let add = |p: &Mat<C64>, cv: &[C64], dp: &Mat<C64>, dc: &[C64], h: f64| {
        (p + &linalg::scale(dp, c(h)), cv.iter().zip(dc).map(|(a, b)| a + b * h).collect::<Vec<_>>())
    };
    for step in 1..=steps {
        let (k1p, k1c) = time_derivative(system, &phi, &cf, projector);
        let (p2, c2) = add(&phi, &cf, &k1p, &k1c, 0.5 * dt);
        let (k2p, k2c) = time_derivative(system, &p2, &c2, projector);
        let (p3, c3) = add(&phi, &cf, &k2p, &k2c, 0.5 * dt);
        let (k3p, k3c) = time_derivative(system, &p3, &c3, projector);
        let (p4, c4) = add(&phi, &cf, &k3p, &k3c, dt);
        let (k4p, k4c) = time_derivative(system, &p4, &c4, projector);
        let dp = &(&(&k1p + &linalg::scale(&k2p, c(2.0))) + &linalg::scale(&k3p, c(2.0))) + &k4p;
        phi = &phi + &linalg::scale(&dp, c(dt / 6.0));
        for i in 0..cf.len() {
            cf[i] += (k1c[i] + k2c[i] * 2.0 + k3c[i] * 2.0 + k4c[i]) * (dt / 6.0);
        }
        let (dphi, dc) = time_derivative(system, &phi, &cf, projector);
        let ov = &adjoint(&phi) * &dphi;
        let orbital_rate = max_abs(&ov);
        let coef_rate = linalg::dot(&cf, &dc).norm();
        let (rho1, _) = system.space.reduced_densities(&cf);
        let mut state = linalg::dot(&cf, &dc);
        for k in 0..m {
            for q in 0..m {
                state += rho1[(k, q)] * ov[(k, q)];
            }
        }
        let orth = linalg::max_abs_diff(&(&adjoint(&phi) * &phi), &identity(m));
        let norm_drift = (linalg::norm(&cf) - norm0).abs();
        if norm_drift > 1e-6 {
            return Err(GroundStateError::NormDrift { step, drift: norm_drift });
        }
        out.push(StepDiagnostics {
            step,
            time: step as f64 * dt,
            orbital_overlap_rate: orbital_rate,
            coefficient_overlap_rate: coef_rate,
            state_overlap_rate: state.norm(),
            orthonormality_drift: orth,
            norm_drift,
        });
    }
    Ok(PropagationReport { steps: out })
}

/// Ground state of distinguishable degrees of freedom.
#[derive(Debug, Clone)]
pub struct DistinguishableGroundState {
    pub orbitals: Vec<Mat<C64>>,
    pub coefficients: Vec<C64>,
    pub energy: f64,
    pub rho: Vec<Mat<C64>>,
    /// `mu^j_nm = <phi^j_m|F^j_n>`.
    pub mu: Vec<Mat<C64>>,
    pub residual_orb: f64,
    pub residual_c: f64,
    pub mu_hermiticity: f64,
    pub iterations: usize,
    pub energy_trace: Vec<f64>,
}

fn energy_dist(system: &DistinguishableSystem, orbitals: &[Mat<C64>], coefficients: &[C64]) -> f64 {
    let h = system.hamiltonian_matrix(orbitals);
    linalg::dot(coefficients, &matvec(&h, coefficients)).re
}

pub fn solve_distinguishable(system: &DistinguishableSystem, guess: Option<&[Mat<C64>]>, opts: &SolverOptions) -> Result<DistinguishableGroundState, GroundStateError> {
    let q = system.n_dof();
    let dims = system.basis.dims().to_vec();
    let mut orbitals: Vec<Mat<C64>> = match guess {
        Some(g) => {
            let mut out = Vec::new();
            for j in 0..q {
                if (g[j].nrows(), g[j].ncols()) != (system.grids[j].len(), dims[j]) {
                    return Err(GroundStateError::GuessShape { got: (g[j].nrows(), g[j].ncols()), expected: (system.grids[j].len(), dims[j]) });
                }
                let mut o = g[j].clone();
                gram_schmidt(&mut o);
                out.push(o);
            }
            out
        }
        None => (0..q).map(|j| initial_orbitals(&system.one_body[j], dims[j])).collect(),
    };
    let kinv: Vec<Option<Mat<C64>>> = system.one_body.iter().map(|h| preconditioner(h, opts.preconditioned)).collect();
    let mut tau = opts.step;
    let tau_max = if opts.preconditioned { 2.0 } else { 50.0 * opts.step };
    let mut prev_c: Option<Vec<C64>> = None;
    let mut trace = Vec::new();
    let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let grads = |orb: &[Mat<C64>], coef: &[C64]| -> Vec<Mat<C64>> {
        system
            .orbital_forces(orb, coef)
            .iter()
            .zip(orb)
            .map(|(f, o)| &orbital_projector(o) * f)
            .collect()
    };
    let max_col = |gs: &[Mat<C64>]| -> f64 {
        gs.iter()
            .flat_map(|g| (0..g.ncols()).map(move |k| linalg::norm(&column(g, k))))
            .fold(0.0, f64::max)
    };
    for iter in 1..=opts.max_iter {
        let h_ci = system.hamiltonian_matrix(&orbitals);
        let (e, coef) = lowest_eigenpair(&h_ci, prev_c.as_deref(), opts);
        let hc = matvec(&h_ci, &coef);
        let residual_c = linalg::norm(&hc.iter().zip(&coef).map(|(a, b)| a - b * e).collect::<Vec<_>>());
        let forces = system.orbital_forces(&orbitals, &coef);
        let g: Vec<Mat<C64>> = forces.iter().zip(&orbitals).map(|(f, o)| &orbital_projector(o) * f).collect();
        let residual_orb = max_col(&g);
        trace.push(e);
        last = (e, residual_orb, residual_c);
        if residual_orb < opts.tol_orb && residual_c < opts.tol_c {
            let mu: Vec<Mat<C64>> = forces
                .iter()
                .zip(&orbitals)
                .map(|(f, o)| {
                    let ov = &adjoint(o) * f;
                    Mat::from_fn(ov.nrows(), ov.ncols(), |n, m| ov[(m, n)])
                })
                .collect();
            let mu_hermiticity = mu.iter().map(|x| linalg::max_abs_diff(x, &adjoint(x))).fold(0.0, f64::max);
            let rho = (0..q).map(|j| system.basis.reduced_density(&coef, j)).collect();
            return Ok(DistinguishableGroundState {
                orbitals,
                coefficients: coef,
                energy: e,
                rho,
                mu,
                residual_orb,
                residual_c,
                mu_hermiticity,
                iterations: iter,
                energy_trace: trace,
            });
        }
        let rho_inv: Vec<Mat<C64>> = (0..q).map(|j| regularized_inverse(&system.basis.reduced_density(&coef, j))).collect();
        let mut e_cur = energy_dist(system, &orbitals, &coef);
        for _ in 0..opts.inner_steps {
            let g0 = grads(&orbitals, &coef);
            if max_col(&g0) < 0.1 * opts.tol_orb {
                break;
            }
            let mut accepted = false;
            for _ in 0..40 {
                let mut half = Vec::with_capacity(q);
                for j in 0..q {
                    let d = descent(&g0[j], &rho_inv[j], kinv[j].as_ref(), &orbital_projector(&orbitals[j]));
                    half.push(retract(&orbitals[j], &d, 0.5 * tau)?);
                }
                let gh = grads(&half, &coef);
                let mut trial = Vec::with_capacity(q);
                for j in 0..q {
                    let d = descent(&gh[j], &rho_inv[j], kinv[j].as_ref(), &orbital_projector(&half[j]));
                    trial.push(retract(&orbitals[j], &d, tau)?);
                }
                let e_new = energy_dist(system, &trial, &coef);
                let noise = 1e-12 * e_cur.abs().max(1.0);
                let improves = e_new < e_cur - noise
                    || (e_new <= e_cur + noise && {
                        let gt = grads(&trial, &coef);
                        gt.iter().map(|g| g.norm_l2().powi(2)).sum::<f64>() < g0.iter().map(|g| g.norm_l2().powi(2)).sum::<f64>()
                    });
                if improves {
                    orbitals = trial;
                    e_cur = e_new;
                    tau = (tau * 1.2).min(tau_max);
                    accepted = true;
                    break;
                }
                tau *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        prev_c = Some(coef);
    }
    Err(GroundStateError::NotConverged { iterations: opts.max_iter, residual_orb: last.1, residual_c: last.2, energy: last.0 })
}

/// Densities, energy, `mu` and residuals of a given distinguishable state.
pub fn evaluate_distinguishable(system: &DistinguishableSystem, orbitals: Vec<Mat<C64>>, coefficients: Vec<C64>) -> DistinguishableGroundState {
    let h_ci = system.hamiltonian_matrix(&orbitals);
    let hc = matvec(&h_ci, &coefficients);
    let e = linalg::dot(&coefficients, &hc).re;
    let residual_c = linalg::norm(&hc.iter().zip(&coefficients).map(|(a, b)| a - b * e).collect::<Vec<_>>());
    let forces = system.orbital_forces(&orbitals, &coefficients);
    let mut residual_orb = 0.0f64;
    let mut mu = Vec::new();
    for (f, o) in forces.iter().zip(&orbitals) {
        let g = &orbital_projector(o) * f;
        residual_orb = (0..g.ncols()).map(|k| linalg::norm(&column(&g, k))).fold(residual_orb, f64::max);
        let ov = &adjoint(o) * f;
        mu.push(Mat::from_fn(ov.nrows(), ov.ncols(), |n, m| ov[(m, n)]));
    }
    let mu_hermiticity = mu.iter().map(|x| linalg::max_abs_diff(x, &adjoint(x))).fold(0.0, f64::max);
    let rho = (0..system.n_dof()).map(|j| system.basis.reduced_density(&coefficients, j)).collect();
    DistinguishableGroundState { orbitals, coefficients, energy: e, rho, mu, residual_orb, residual_c, mu_hermiticity, iterations: 0, energy_trace: vec![e] }
}

/// Per-dof `P_j F^j` and `P_C H C` for distinguishable degrees of freedom.
pub fn nonlinear_rhs_distinguishable(system: &DistinguishableSystem, orbitals: &[Mat<C64>], coefficients: &[C64]) -> (Vec<Mat<C64>>, Vec<C64>) {
    let g = system
        .orbital_forces(orbitals, coefficients)
        .iter()
        .zip(orbitals)
        .map(|(f, o)| &orbital_projector(o) * f)
        .collect();
    let h = system.hamiltonian_matrix(orbitals);
    let hc = matvec(&h, coefficients);
    let overlap = linalg::dot(coefficients, &hc);
    let gc = hc.iter().zip(coefficients).map(|(a, b)| a - b * overlap).collect();
    (g, gc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{FockSpace, Statistics};
    use crate::grid::{Grid, InteractionKernel};
    use crate::hamiltonian::Coupling;

    fn harmonic(n_pts: usize, n: usize, m: usize, st: Statistics, lambda: f64) -> IdenticalSystem {
        let g = Grid::new(n_pts, -7.0, 7.0).unwrap();
        let h = g.one_body_hamiltonian(1.0, &g.harmonic_potential(1.0));
        let k = g.discretize(&InteractionKernel::Contact { strength: lambda }).unwrap();
        IdenticalSystem::new(g, h, k, FockSpace::new(n, m, st).unwrap()).unwrap()
    }

    #[test]
    fn single_particle_harmonic() {
        let sys = harmonic(48, 1, 1, Statistics::Boson, 0.0);
        let gs = solve_identical(&sys, None, &SolverOptions::default()).unwrap();
        assert!((gs.energy - 0.5).abs() < 1e-8);
    }

    #[test]
    fn noninteracting_fermions_fill_shells() {
        let sys = harmonic(48, 2, 3, Statistics::Fermion, 0.0);
        let gs = solve_identical(&sys, None, &SolverOptions::default()).unwrap();
        assert!((gs.energy - 2.0).abs() < 1e-8);
    }

    #[test]
    fn interacting_bosons_converge_monotonically() {
        let sys = harmonic(40, 2, 2, Statistics::Boson, 0.5);
        let gs = solve_identical(&sys, None, &SolverOptions::default()).unwrap();
        assert!(gs.residual_orb < 1e-8);
        assert!(gs.mu_hermiticity < 1e-7);
        for w in gs.energy_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        let tr: f64 = (0..2).map(|k| gs.rho1[(k, k)].re).sum();
        assert!((tr - 2.0).abs() < 1e-12);
        let (g, gc) = nonlinear_rhs(&sys, &gs.orbitals, &gs.coefficients);
        assert!(max_abs(&g) < 1e-8);
        assert!(linalg::norm(&gc) < 1e-10);
    }

    #[test]
    fn coupled_oscillators_ground_energy() {
        let grids = vec![Grid::new(40, -7.0, 7.0).unwrap(), Grid::new(40, -7.0, 7.0).unwrap()];
        let hs: Vec<Mat<C64>> = grids.iter().map(|g| g.one_body_hamiltonian(1.0, &g.harmonic_potential(1.0))).collect();
        let coupling = Coupling::bilinear(&grids, 0, 1, 0.2).unwrap();
        let sys = DistinguishableSystem::new(grids, hs, coupling, &[4, 4]).unwrap();
        let gs = solve_distinguishable(&sys, None, &SolverOptions::default()).unwrap();
        let exact = 0.5 * (1.2f64.sqrt() + 0.8f64.sqrt());
        assert!((gs.energy - exact).abs() < 1e-4, "{}", gs.energy);
    }

    #[test]
    fn uncoupled_oscillators() {
        let grids = vec![Grid::new(32, -7.0, 7.0).unwrap(), Grid::new(32, -7.0, 7.0).unwrap()];
        let hs: Vec<Mat<C64>> = grids.iter().map(|g| g.one_body_hamiltonian(1.0, &g.harmonic_potential(1.0))).collect();
        let sys = DistinguishableSystem::new(grids, hs, Coupling::none(), &[1, 1]).unwrap();
        let gs = solve_distinguishable(&sys, None, &SolverOptions::default()).unwrap();
        assert!((gs.energy - 1.0).abs() < 1e-8);
    }

    #[test]
    fn projected_propagation_keeps_gauge() {
        let sys = harmonic(32, 2, 2, Statistics::Boson, 0.3);
        let gs = solve_identical(&sys, None, &SolverOptions::default()).unwrap();
        let mut phi = gs.orbitals.clone();
        for i in 0..phi.nrows() {
            phi[(i, 1)] += c(0.01 * (i as f64 * 0.3).sin());
        }
        gram_schmidt(&mut phi);
        let rep = propagate_check(&sys, &phi, &gs.coefficients, 0.002, 20, true).unwrap();
        assert!(rep.max_orbital_overlap_rate() < 1e-8);
        assert!(rep.max_coefficient_overlap_rate() < 1e-8);
        let off = propagate_check(&sys, &phi, &gs.coefficients, 0.002, 2, false).unwrap();
        assert!((off.max_coefficient_overlap_rate() - gs.energy).abs() < 0.1);
    }
}
