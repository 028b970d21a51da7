//! Independent reference solutions. Nothing here goes through the
//! occupation-number machinery in [`crate::fockspace`]: many-body matrices are
//! built from (anti)symmetrized first-quantized product states.

use crate::fockspace::Statistics;
use crate::grid::PairKernel;
use crate::linalg::{self, adjoint, c, eigh, hermitian_function, identity, matvec, C64, ZERO};
use crate::spectrum::{self, Layout, Spectrum, SpectrumOptions};
use faer::Mat;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("basis of {size} states exceeds the limit of {limit}")]
    BasisTooLarge { size: usize, limit: usize },
    #[error("exact references support at most 3 particles, got {0}")]
    TooManyParticles(usize),
    #[error("{particles} fermions do not fit into {sites} single-particle states")]
    PauliOverflow { particles: usize, sites: usize },
    #[error("coupling {0} outside the stable range |lambda| < 1")]
    UnstableCoupling(f64),
    #[error("Gross-Pitaevskii iteration did not converge (residual {0:e})")]
    MeanFieldNotConverged(f64),
    #[error(transparent)]
    Spectrum(#[from] spectrum::SpectrumError),
}

pub const EXACT_BASIS_LIMIT: usize = 20_000;
const DENSE_LIMIT: usize = 3_000;

/// Sparse rows `(column, value)`.
pub type SparseRows = Vec<Vec<(usize, C64)>>;

/// Canonical (sorted) particle tuples spanning the (anti)symmetric subspace.
#[derive(Debug, Clone)]
pub struct SymmetrizedBasis {
    sites: usize,
    particles: usize,
    statistics: Statistics,
    tuples: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn occupation_factorials(t: &[usize]) -> f64 {
    let mut out = 1.0;
    let mut run = 1;
    for w in 1..=t.len() {
        if w < t.len() && t[w] == t[w - 1] {
            run += 1;
        } else {
            out *= factorial(run);
            run = 1;
        }
    }
    out
}

/// Distinct arrangements of a sorted tuple with their permutation signs.
fn arrangements(t: &[usize]) -> Vec<(Vec<usize>, f64)> {
    fn rec(rest: &mut Vec<usize>, cur: &mut Vec<usize>, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            out.push((cur.clone(), sign));
            return;
        }
        let mut last = None;
        for pos in 0..rest.len() {
            if Some(rest[pos]) == last {
                continue;
            }
            last = Some(rest[pos]);
            let v = rest.remove(pos);
            cur.push(v);
            // moving element `pos` to the front costs `pos` transpositions
            rec(rest, cur, if pos % 2 == 0 { sign } else { -sign }, out);
            cur.pop();
            rest.insert(pos, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut t.to_vec(), &mut Vec::new(), 1.0, &mut out);
    out
}

impl SymmetrizedBasis {
    pub fn new(sites: usize, particles: usize, statistics: Statistics, limit: usize) -> Result<SymmetrizedBasis, OracleError> {
        if statistics == Statistics::Fermion && particles > sites {
            return Err(OracleError::PauliOverflow { particles, sites });
        }
        let size = match statistics {
            Statistics::Boson => crate::fockspace::binomial(sites + particles - 1, particles),
            Statistics::Fermion => crate::fockspace::binomial(sites, particles),
        };
        if size > limit as f64 {
            return Err(OracleError::BasisTooLarge { size: size as usize, limit });
        }
        let mut tuples = Vec::with_capacity(size as usize);
        let mut cur = Vec::with_capacity(particles);
        fn rec(start: usize, sites: usize, left: usize, strict: bool, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for s in start..sites {
                cur.push(s);
                rec(if strict { s + 1 } else { s }, sites, left - 1, strict, cur, out);
                cur.pop();
            }
        }
        rec(0, sites, particles, statistics == Statistics::Fermion, &mut cur, &mut tuples);
        let index = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(SymmetrizedBasis { sites, particles, statistics, tuples, index })
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuple(&self, i: usize) -> &[usize] {
        &self.tuples[i]
    }

    pub fn find(&self, t: &[usize]) -> Option<usize> {
        self.index.get(t).copied()
    }

    fn canonical(&self, u: &[usize]) -> bool {
        match self.statistics {
            Statistics::Boson => u.windows(2).all(|w| w[0] <= w[1]),
            Statistics::Fermion => u.windows(2).all(|w| w[0] < w[1]),
        }
    }

    /// `<s| O |t>` assembled from arrangements `u` of `t` and product-state moves
    /// `u -> u'` with `u'` canonical.
    fn assemble(&self, moves: impl Fn(&[usize], &mut dyn FnMut(Vec<usize>, C64))) -> SparseRows {
        self.assemble_many(1, |u, emit| moves(u, &mut |t, v| emit(0, t, v))).pop().unwrap()
    }

    /// Like `assemble`, for `count` operators filled in one pass; moves are tagged by operator index.
    fn assemble_many(&self, count: usize, moves: impl Fn(&[usize], &mut dyn FnMut(usize, Vec<usize>, C64))) -> Vec<SparseRows> {
        let mut rows: Vec<Vec<HashMap<usize, C64>>> = vec![vec![HashMap::new(); self.len()]; count];
        for (ti, t) in self.tuples.iter().enumerate() {
            let nt = occupation_factorials(t);
            for (u, sign) in arrangements(t) {
                let sign = if self.statistics == Statistics::Fermion { sign } else { 1.0 };
                moves(&u, &mut |op: usize, target: Vec<usize>, value: C64| {
                    if value == ZERO || !self.canonical(&target) {
                        return;
                    }
                    let si = self.index[&target];
                    let ns = occupation_factorials(&target);
                    let f = match self.statistics {
                        Statistics::Boson => (nt / ns).sqrt(),
                        Statistics::Fermion => 1.0,
                    };
                    *rows[op][si].entry(ti).or_insert(ZERO) += value * (sign * f);
                });
            }
        }
        rows.into_iter()
            .map(|op| {
                op.into_iter()
                    .map(|r| {
                        let mut v: Vec<(usize, C64)> = r.into_iter().filter(|(_, x)| *x != ZERO).collect();
                        v.sort_by_key(|x| x.0);
                        v
                    })
                    .collect()
            })
            .collect()
    }

    /// Every unit one-body operator `sum_a |k><q|_a`, indexed by `k*M + q`.
    fn unit_one_body_all(&self) -> Vec<SparseRows> {
        let m = self.sites;
        self.assemble_many(m * m, |u, emit| {
            for a in 0..u.len() {
                for k in 0..m {
                    let mut t = u.to_vec();
                    t[a] = k;
                    emit(k * m + u[a], t, c(1.0));
                }
            }
        })
    }

    /// Every unit two-body operator `sum_{a != b} |k s><q l|_ab`, indexed by `((k*M + s)*M + l)*M + q`.
    fn unit_two_body_all(&self) -> Vec<SparseRows> {
        let m = self.sites;
        let strict = self.statistics == Statistics::Fermion;
        self.assemble_many(m * m * m * m, |u, emit| {
            for a in 0..u.len() {
                for b in 0..u.len() {
                    if a == b {
                        continue;
                    }
                    // the untouched particles must already be in canonical order
                    let mut rest = (0..u.len()).filter(|&p| p != a && p != b).map(|p| u[p]);
                    let mut prev = rest.next();
                    let ordered = rest.all(|x| {
                        let ok = prev.is_none_or(|p| if strict { p < x } else { p <= x });
                        prev = Some(x);
                        ok
                    });
                    if !ordered {
                        continue;
                    }
                    for k in 0..m {
                        for s in 0..m {
                            let mut t = u.to_vec();
                            t[a] = k;
                            t[b] = s;
                            emit(((k * m + s) * m + u[b]) * m + u[a], t, c(1.0));
                        }
                    }
                }
            }
        })
    }

    /// `sum_a op_a` with `op(j, i) = <j|op|i>`.
    pub fn one_body(&self, op: impl Fn(usize, usize) -> C64) -> SparseRows {
        let sites = self.sites;
        self.assemble(|u, emit| {
            for a in 0..u.len() {
                for j in 0..sites {
                    let mut t = u.to_vec();
                    t[a] = j;
                    emit(t, op(j, u[a]));
                }
            }
        })
    }

    /// `sum_{a != b} op_ab` with `op(j1, j2, i1, i2) = <j1 j2|op|i1 i2>`.
    pub fn two_body(&self, op: impl Fn(usize, usize, usize, usize) -> C64) -> SparseRows {
        let sites = self.sites;
        self.assemble(|u, emit| {
            for a in 0..u.len() {
                for b in 0..u.len() {
                    if a == b {
                        continue;
                    }
                    for j1 in 0..sites {
                        for j2 in 0..sites {
                            let mut t = u.to_vec();
                            t[a] = j1;
                            t[b] = j2;
                            emit(t, op(j1, j2, u[a], u[b]));
                        }
                    }
                }
            }
        })
    }

    /// `sum_{a < b} W(x_a, x_b)` for a kernel diagonal in the product basis.
    pub fn diagonal_pair_potential(&self, kernel: &PairKernel) -> Vec<f64> {
        self.tuples
            .iter()
            .map(|t| {
                let mut e = 0.0;
                for a in 0..t.len() {
                    for b in a + 1..t.len() {
                        e += kernel.get(t[a], t[b]);
                    }
                }
                e
            })
            .collect()
    }

    pub fn to_dense(&self, rows: &SparseRows) -> Mat<C64> {
        let n = self.len();
        let mut m = Mat::<C64>::zeros(n, n);
        for (i, r) in rows.iter().enumerate() {
            for &(j, v) in r {
                m[(i, j)] += v;
            }
        }
        m
    }

    pub fn n_particles(&self) -> usize {
        self.particles
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }
}

pub fn sparse_matvec(rows: &SparseRows, x: &[C64]) -> Vec<C64> {
    rows.iter().map(|r| r.iter().map(|&(j, v)| v * x[j]).sum()).collect()
}

/// Lowest eigenpairs of the many-body grid Hamiltonian.
#[derive(Debug, Clone)]
pub struct ExactSpectrum {
    pub basis: SymmetrizedBasis,
    pub energies: Vec<f64>,
    /// Columns are eigenvectors in the symmetrized basis.
    pub states: Mat<C64>,
    /// Dense Hamiltonian when the basis is small enough to store it.
    pub hamiltonian: Option<Mat<C64>>,
}

impl ExactSpectrum {
    pub fn excitations(&self) -> Vec<f64> {
        self.energies.iter().map(|e| e - self.energies[0]).skip(1).collect()
    }
}

/// Exact diagonalization for `N <= 3` particles on the grid.
pub fn exact_diag_grid(particles: usize, statistics: Statistics, one_body: &Mat<C64>, kernel: &PairKernel, n_states: usize) -> Result<ExactSpectrum, OracleError> {
    if particles > 3 {
        return Err(OracleError::TooManyParticles(particles));
    }
    let n = one_body.nrows();
    let basis = SymmetrizedBasis::new(n, particles, statistics, EXACT_BASIS_LIMIT)?;
    let mut rows = basis.one_body(|j, i| one_body[(j, i)]);
    let diag = basis.diagonal_pair_potential(kernel);
    for (i, r) in rows.iter_mut().enumerate() {
        match r.iter_mut().find(|x| x.0 == i) {
            Some(x) => x.1 += diag[i],
            None => r.push((i, c(diag[i]))),
        }
    }
    let size = basis.len();
    let k = n_states.min(size);
    if size <= DENSE_LIMIT {
        let h = basis.to_dense(&rows);
        let (w, u) = eigh(&h);
        let states = Mat::from_fn(size, k, |i, j| u[(i, j)]);
        return Ok(ExactSpectrum { basis, energies: w[..k].to_vec(), states, hamiltonian: Some(h) });
    }
    let (energies, states) = lanczos_lowest_many(&rows, k, 1e-12);
    Ok(ExactSpectrum { basis, energies, states, hamiltonian: None })
}

/// Lanczos with full reorthogonalisation on a sparse Hermitian matrix, keeping `k` Ritz pairs.
fn lanczos_lowest_many(rows: &SparseRows, k: usize, tol: f64) -> (Vec<f64>, Mat<C64>) {
    let n = rows.len();
    let kmax = n.min(600.max(40 * k));
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut v: Vec<C64> = (0..n).map(|i| c(1.0 + ((i * 7919) % 101) as f64 / 101.0)).collect();
    let nv = linalg::norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    loop {
        basis.push(v.clone());
        let mut w = sparse_matvec(rows, &v);
        alphas.push(linalg::dot(&v, &w).re);
        for _ in 0..2 {
            for b in &basis {
                let s = linalg::dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= s * y);
            }
        }
        let beta = linalg::norm(&w);
        let m = basis.len();
        let done = if m >= k && m % 20 == 0 || m >= kmax || beta < 1e-12 {
            let t = tridiag(&alphas, &betas);
            let (_, tu) = eigh(&t);
            let resid = (0..k.min(m)).map(|j| beta * tu[(m - 1, j)].norm()).fold(0.0, f64::max);
            resid < tol || m >= kmax || beta < 1e-12
        } else {
            false
        };
        if done {
            break;
        }
        betas.push(beta);
        v = w.iter().map(|x| x / beta).collect();
    }
    let m = basis.len();
    let t = tridiag(&alphas, &betas[..m - 1]);
    let (tw, tu) = eigh(&t);
    let kk = k.min(m);
    let mut states = Mat::<C64>::zeros(n, kk);
    for j in 0..kk {
        for (b, vec) in basis.iter().enumerate() {
            let coef = tu[(b, j)];
            for i in 0..n {
                states[(i, j)] += coef * vec[i];
            }
        }
    }
    (tw[..kk].to_vec(), states)
}

fn tridiag(alphas: &[f64], betas: &[f64]) -> Mat<C64> {
    let m = alphas.len();
    Mat::from_fn(m, m, |i, j| {
        if i == j {
            c(alphas[i])
        } else if i + 1 == j {
            c(betas[i])
        } else if j + 1 == i {
            c(betas[j])
        } else {
            ZERO
        }
    })
}

/// Linear response of the bare projected Schroedinger equation around the exact ground state.
#[derive(Debug, Clone)]
pub struct SeResponse {
    pub matrix: Mat<C64>,
    pub spectrum: Spectrum,
    /// `E_k - E_0` from the dense diagonalization, `k >= 1`.
    pub exact_excitations: Vec<f64>,
    pub ground_energy: f64,
    pub ground_state: Vec<C64>,
    pub states: Mat<C64>,
}

#[derive(Debug, Clone)]
pub struct SeCoefficients {
    /// `<Phi_k| f^dagger |Phi_0>`, `k >= 1`.
    pub overlaps_plus: Vec<C64>,
    /// `<Phi_k| f |Phi_0>^*`, `k >= 1`.
    pub overlaps_minus: Vec<C64>,
    /// Expansion coefficients `c_k = <Phi_k|f^dagger|Phi_0> / (omega - omega_k)`.
    pub c_plus: Vec<C64>,
    /// `c_-k = <Phi_k|f|Phi_0>^* / (omega + omega_k)`.
    pub c_minus: Vec<C64>,
}

/// Builds `diag(P (H - E_0) P, -P* (H* - E_0) P*)` from a dense many-body Hamiltonian.
pub fn se_linear_response(h: &Mat<C64>, opts: &SpectrumOptions) -> Result<SeResponse, OracleError> {
    let n = h.nrows();
    let (w, u) = eigh(h);
    let e0 = w[0];
    let phi0 = linalg::column(&u, 0);
    let p = &identity(n) - &Mat::from_fn(n, n, |i, j| phi0[i] * phi0[j].conj());
    let shifted = h - &linalg::scale(&identity(n), c(e0));
    let upper = &(&p * &shifted) * &p;
    let mut l = Mat::<C64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for i in 0..n {
            l[(i, j)] = upper[(i, j)];
            l[(n + i, n + j)] = -upper[(i, j)].conj();
        }
    }
    let layout = Layout { orbital: n, coefficient: 0 };
    let spectrum = spectrum::diagonalize(&l, layout, opts)?;
    Ok(SeResponse {
        matrix: l,
        spectrum,
        exact_excitations: w[1..].iter().map(|x| x - e0).collect(),
        ground_energy: e0,
        ground_state: phi0,
        states: u,
    })
}

impl SeResponse {
    /// Driving vector `(-P f^dagger Phi_0, (P f Phi_0)^*)` for a many-body operator `f^dagger`.
    pub fn perturbation_vector(&self, f_dag: &Mat<C64>) -> Vec<C64> {
        let n = self.ground_state.len();
        let f = adjoint(f_dag);
        let proj = |v: Vec<C64>| -> Vec<C64> {
            let o = linalg::dot(&self.ground_state, &v);
            v.iter().zip(&self.ground_state).map(|(a, b)| a - o * b).collect()
        };
        let a = proj(matvec(f_dag, &self.ground_state));
        let b = proj(matvec(&f, &self.ground_state));
        let mut r = vec![ZERO; 2 * n];
        for i in 0..n {
            r[i] = -a[i];
            r[n + i] = b[i].conj();
        }
        r
    }

    /// Closed-form expansion coefficients for the driven response at `omega`.
    pub fn coefficients(&self, f_dag: &Mat<C64>, omega: f64) -> Result<SeCoefficients, OracleError> {
        let n = self.ground_state.len();
        let f = adjoint(f_dag);
        let fd0 = matvec(f_dag, &self.ground_state);
        let f0 = matvec(&f, &self.ground_state);
        let mut out = SeCoefficients { overlaps_plus: vec![], overlaps_minus: vec![], c_plus: vec![], c_minus: vec![] };
        for k in 1..n {
            let phik = linalg::column(&self.states, k);
            let wk = self.exact_excitations[k - 1];
            let a = linalg::dot(&phik, &fd0);
            let b = linalg::dot(&phik, &f0).conj();
            if (omega - wk).abs() < 1e-12 * wk.abs().max(1.0) && a.norm() > 0.0 {
                return Err(spectrum::SpectrumError::Resonance { omega: c(omega), mode: k, mode_omega: c(wk) }.into());
            }
            out.overlaps_plus.push(a);
            out.overlaps_minus.push(b);
            out.c_plus.push(a / (omega - wk));
            out.c_minus.push(b / (omega + wk));
        }
        Ok(out)
    }
}

/// Particle-conserving Bogoliubov-de Gennes excitations of a contact-interacting condensate.
#[derive(Debug, Clone)]
pub struct BdgResult {
    /// Positive frequencies, ascending, zero mode removed.
    pub frequencies: Vec<f64>,
    pub chemical_potential: f64,
    pub condensate: Vec<C64>,
    /// `sum |u|^2 - |v|^2` per returned mode.
    pub norms: Vec<f64>,
    pub scf_residual: f64,
}

/// Self-consistent Gross-Pitaevskii orbital on the grid, then the Castin-Dum BdG spectrum.
/// `kernel` must be local (contact); its diagonal holds `lambda / dx`.
pub fn bdg_reference(one_body: &Mat<C64>, kernel: &PairKernel, particles: usize) -> Result<BdgResult, OracleError> {
    let n = one_body.nrows();
    let g: Vec<f64> = (0..n).map(|i| kernel.get(i, i) * (particles as f64 - 1.0)).collect();
    let (_, u0) = eigh(one_body);
    let mut psi = linalg::column(&u0, 0);
    let mut mu = 0.0;
    let mut residual = f64::INFINITY;
    let mut mix = 0.5;
    for it in 0..5000 {
        let hgp = Mat::from_fn(n, n, |i, j| one_body[(i, j)] + if i == j { c(g[i] * psi[i].norm_sqr()) } else { ZERO });
        let hp = matvec(&hgp, &psi);
        mu = linalg::dot(&psi, &hp).re;
        residual = linalg::norm(&hp.iter().zip(&psi).map(|(a, b)| a - b * mu).collect::<Vec<_>>());
        if residual < 1e-13 {
            break;
        }
        let (_, u) = eigh(&hgp);
        let mut next = linalg::column(&u, 0);
        let ov = linalg::dot(&psi, &next);
        let ph = if ov.norm() > 0.0 { ov.conj() / ov.norm() } else { c(1.0) };
        next.iter_mut().for_each(|x| *x *= ph);
        let mixed: Vec<C64> = psi.iter().zip(&next).map(|(a, b)| a * (1.0 - mix) + b * mix).collect();
        let nm = linalg::norm(&mixed);
        psi = mixed.iter().map(|x| x / nm).collect();
        if it > 50 {
            mix = 1.0;
        }
    }
    if residual > 1e-10 {
        return Err(OracleError::MeanFieldNotConverged(residual));
    }
    let q = &identity(n) - &Mat::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
    let hgp = Mat::from_fn(n, n, |i, j| one_body[(i, j)] + if i == j { c(g[i] * psi[i].norm_sqr() - mu) } else { ZERO });
    let a0 = Mat::from_fn(n, n, |i, j| hgp[(i, j)] + if i == j { c(g[i] * psi[i].norm_sqr()) } else { ZERO });
    let b0 = Mat::from_fn(n, n, |i, j| if i == j { psi[i] * psi[i] * g[i] } else { ZERO });
    let a = &(&q * &a0) * &q;
    let b = &(&q * &b0) * &linalg::conj(&q);
    // real condensate: (A - B)(A + B) p = w^2 p
    let sum = linalg::hermitian_part(&(&a + &b));
    let diff = linalg::hermitian_part(&(&a - &b));
    let s = hermitian_function(&diff, |x| x.max(0.0).sqrt());
    let t = &(&s * &sum) * &s;
    let (w2, vecs) = eigh(&t);
    let scale = w2.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut freqs = Vec::new();
    let mut norms = Vec::new();
    for (k, &x) in w2.iter().enumerate() {
        if x <= 1e-9 * scale.max(1.0) {
            continue;
        }
        let omega = x.sqrt();
        let wv: Vec<C64> = linalg::column(&vecs, k).iter().map(|y| y / omega.sqrt()).collect();
        let p = matvec(&s, &wv);
        let m: Vec<C64> = matvec(&sum, &p).iter().map(|y| y / omega).collect();
        let u: Vec<C64> = p.iter().zip(&m).map(|(a, b)| (a + b) * 0.5).collect();
        let v: Vec<C64> = p.iter().zip(&m).map(|(a, b)| (a - b) * 0.5).collect();
        norms.push(linalg::norm(&u).powi(2) - linalg::norm(&v).powi(2));
        freqs.push(omega);
    }
    Ok(BdgResult { frequencies: freqs, chemical_potential: mu, condensate: psi, norms, scf_residual: residual })
}

/// Largest deviation between the occupation-number operator tables and
/// first-quantized `sum_a |k><q|_a` and `sum_{a != b} |k><q|_a |s><l|_b`.
pub fn fock_operator_defect(particles: usize, orbitals: usize, statistics: Statistics) -> Result<f64, crate::Error> {
    let space = crate::fockspace::FockSpace::new(particles, orbitals, statistics)?;
    let basis = SymmetrizedBasis::new(orbitals, particles, statistics, EXACT_BASIS_LIMIT)?;
    let n = space.len();
    // occupation-number configuration -> oracle index
    let map: Vec<usize> = (0..n)
        .map(|i| {
            let t: Vec<usize> = space.config(i).iter().enumerate().flat_map(|(p, &k)| std::iter::repeat(p).take(k as usize)).collect();
            basis.find(&t).expect("configuration missing from oracle basis")
        })
        .collect();
    let compare = |op: &crate::fockspace::SparseOp, rows: &SparseRows| -> f64 {
        let dense = basis.to_dense(rows);
        let mut mine = Mat::<C64>::zeros(n, n);
        for &(to, from, f) in op.iter() {
            mine[(map[to], map[from])] += c(f);
        }
        linalg::max_abs_diff(&mine, &dense)
    };
    let m = orbitals;
    let mut worst = 0.0f64;
    let all = basis.unit_one_body_all();
    for k in 0..m {
        for q in 0..m {
            worst = worst.max(compare(space.one_body_op(k, q), &all[k * m + q]));
        }
    }
    if particles >= 2 {
        let all = basis.unit_two_body_all();
        for k in 0..m {
            for s in 0..m {
                for l in 0..m {
                    for q in 0..m {
                        worst = worst.max(compare(space.two_body_op(k, s, l, q), &all[((k * m + s) * m + l) * m + q]));
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Normal-mode frequencies of `1/2 (p1^2 + x1^2 + p2^2 + x2^2) + lambda x1 x2`, ascending.
pub fn coupled_oscillators_reference(lambda: f64) -> Result<[f64; 2], OracleError> {
    if !(lambda.abs() < 1.0) {
        return Err(OracleError::UnstableCoupling(lambda));
    }
    let (a, b) = ((1.0 - lambda.abs()).sqrt(), (1.0 + lambda.abs()).sqrt());
    Ok([a, b])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, InteractionKernel};

    fn trap(n: usize, l: f64) -> (Grid, Mat<C64>) {
        let g = Grid::new(n, -l, l).unwrap();
        let h = g.one_body_hamiltonian(1.0, &g.harmonic_potential(1.0));
        (g, h)
    }

    #[test]
    fn arrangements_signs() {
        let a = arrangements(&[0, 1, 2]);
        assert_eq!(a.len(), 6);
        let s: f64 = a.iter().map(|x| x.1).sum();
        assert_eq!(s, 0.0);
        assert_eq!(arrangements(&[1, 1, 2]).len(), 3);
        assert_eq!(occupation_factorials(&[1, 1, 1, 2, 2]), 12.0);
    }

    #[test]
    fn single_particle_matches_dvr() {
        let (g, h) = trap(16, 6.0);
        let k = g.discretize(&InteractionKernel::None).unwrap();
        let ex = exact_diag_grid(1, Statistics::Boson, &h, &k, 5).unwrap();
        let (w, _) = eigh(&h);
        for i in 0..5 {
            assert!((ex.energies[i] - w[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn noninteracting_pairs_sum_levels() {
        let (g, h) = trap(16, 6.0);
        let k = g.discretize(&InteractionKernel::None).unwrap();
        let (w, _) = eigh(&h);
        let b = exact_diag_grid(2, Statistics::Boson, &h, &k, 4).unwrap();
        let expected_b = [2.0 * w[0], w[0] + w[1], (w[0] + w[2]).min(2.0 * w[1])];
        for i in 0..3 {
            assert!((b.energies[i] - expected_b[i]).abs() < 1e-11, "{:?}", b.energies);
        }
        let f = exact_diag_grid(2, Statistics::Fermion, &h, &k, 3).unwrap();
        assert!((f.energies[0] - (w[0] + w[1])).abs() < 1e-11);
        assert!((f.energies[1] - (w[0] + w[2])).abs() < 1e-11);
    }

    #[test]
    fn lanczos_path_matches_dense() {
        let (g, h) = trap(12, 5.0);
        let k = g.discretize(&InteractionKernel::Contact { strength: 0.5 }).unwrap();
        let dense = exact_diag_grid(3, Statistics::Boson, &h, &k, 3).unwrap();
        let basis = dense.basis.clone();
        let mut rows = basis.one_body(|j, i| h[(j, i)]);
        let diag = basis.diagonal_pair_potential(&k);
        for (i, r) in rows.iter_mut().enumerate() {
            r.push((i, c(diag[i])));
        }
        let (e, _) = lanczos_lowest_many(&rows, 3, 1e-12);
        for i in 0..3 {
            assert!((e[i] - dense.energies[i]).abs() < 1e-9, "{e:?} {:?}", dense.energies);
        }
    }

    #[test]
    fn se_oracle_branches_and_coefficients() {
        let (g, h) = trap(8, 4.0);
        let k = g.discretize(&InteractionKernel::Contact { strength: 0.3 }).unwrap();
        let ex = exact_diag_grid(2, Statistics::Boson, &h, &k, 36).unwrap();
        let hm = ex.hamiltonian.clone().unwrap();
        let se = se_linear_response(&hm, &SpectrumOptions::default()).unwrap();
        let got = se.spectrum.excitation_energies();
        for (a, b) in got.iter().zip(&se.exact_excitations) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} {b}");
        }
        let res = se.spectrum.resolution_checks(&se.matrix);
        assert!(res.identity < 1e-10 && res.spectral < 1e-10, "{res:?}");
        let x = g.position_operator();
        let fd = ex.basis.to_dense(&ex.basis.one_body(|j, i| x[(j, i)]));
        let r = se.perturbation_vector(&fd);
        let omega = 0.37;
        let coef = se.coefficients(&fd, omega).unwrap();
        let y = se.spectrum.reconstruct(c(omega), &r, 1e-12).unwrap();
        let n = ex.basis.len();
        for kk in 1..n {
            let phik = linalg::column(&se.states, kk);
            let up = linalg::dot(&phik, &y[..n]);
            assert!((up - coef.c_plus[kk - 1]).norm() < 1e-10);
        }
        // f commuting with H: no excitation content
        let r0 = se.perturbation_vector(&hm);
        assert!(linalg::norm(&r0) < 1e-10);
    }

    #[test]
    fn bdg_without_interaction_gives_gaps() {
        let (g, h) = trap(24, 6.0);
        let k = g.discretize(&InteractionKernel::Contact { strength: 0.0 }).unwrap();
        let b = bdg_reference(&h, &k, 2).unwrap();
        let (w, _) = eigh(&h);
        for i in 0..4 {
            assert!((b.frequencies[i] - (w[i + 1] - w[0])).abs() < 1e-9);
        }
        for nrm in &b.norms {
            assert!((nrm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fock_tables_match_first_quantization() {
        for (n, m, st) in [(2, 3, Statistics::Boson), (3, 2, Statistics::Boson), (2, 4, Statistics::Fermion), (3, 5, Statistics::Fermion)] {
            let d = fock_operator_defect(n, m, st).unwrap();
            assert!(d < 1e-13, "{n} {m} {st:?}: {d}");
        }
    }

    #[test]
    fn oscillator_reference() {
        let [lo, hi] = coupled_oscillators_reference(0.2).unwrap();
        assert!((lo - 0.894427190999916).abs() < 1e-14);
        assert!((hi - 1.0954451150103321).abs() < 1e-14);
        assert_eq!(coupled_oscillators_reference(0.0).unwrap(), [1.0, 1.0]);
        assert!(coupled_oscillators_reference(1.0).is_err());
    }
}
