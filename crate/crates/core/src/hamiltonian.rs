//! Orbital matrix elements, local potentials, exchange operators and mean
//! fields for identical and distinguishable systems.

use crate::fockspace::{FockSpace, ProductBasis, TwoBodyDensity};
use crate::grid::{Grid, PairKernel};
use crate::linalg::{adjoint, c, column, C64, ZERO};
use faer::Mat;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HamiltonianError {
    #[error("general coupling tables are limited to at most 3 degrees of freedom, got {0}")]
    TableTooManyDof(usize),
    #[error("coupling table has {got} values, expected {expected}")]
    TableShape { got: usize, expected: usize },
    #[error("pair term couples degree of freedom {0} with itself")]
    SelfPair(usize),
    #[error("degree of freedom index {0} out of range")]
    DofOutOfRange(usize),
    #[error("one-body operator is {got}x{got}, grid has {n} points")]
    OperatorShape { got: usize, n: usize },
}

/// `h_kq = <phi_k| op |phi_q>` for coefficient orbitals stored as columns.
pub fn one_body_matrix(orbitals: &Mat<C64>, op: &Mat<C64>) -> Mat<C64> {
    &(&adjoint(orbitals) * op) * orbitals
}

/// `W_ksql = <phi_k phi_s| W |phi_q phi_l>`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodyTensor {
    m: usize,
    data: Vec<C64>,
}

impl TwoBodyTensor {
    pub fn zeros(m: usize) -> TwoBodyTensor {
        TwoBodyTensor { m, data: vec![ZERO; m * m * m * m] }
    }

    pub fn get(&self, k: usize, s: usize, q: usize, l: usize) -> C64 {
        let m = self.m;
        self.data[((k * m + s) * m + q) * m + l]
    }

    fn set(&mut self, k: usize, s: usize, q: usize, l: usize, v: C64) {
        let m = self.m;
        self.data[((k * m + s) * m + q) * m + l] = v;
    }
}

/// `W_sl(i)` for all orbital pairs, as functions on the grid.
#[derive(Debug, Clone)]
pub struct LocalPotentials {
    m: usize,
    data: Vec<Vec<C64>>,
}

impl LocalPotentials {
    pub fn new(kernel: &PairKernel, orbitals: &Mat<C64>) -> LocalPotentials {
        let m = orbitals.ncols();
        let cols: Vec<Vec<C64>> = (0..m).map(|k| column(orbitals, k)).collect();
        let mut data = Vec::with_capacity(m * m);
        for s in 0..m {
            for l in 0..m {
                data.push(kernel.potential(&cols[s], &cols[l]));
            }
        }
        LocalPotentials { m, data }
    }

    pub fn get(&self, s: usize, l: usize) -> &[C64] {
        &self.data[s * self.m + l]
    }
}

/// `K_sl` as a matrix on coefficients: `(K_sl f)(i) = W_{s f}(i) phi_l(i)`.
pub fn exchange_operator(kernel: &PairKernel, bra: &[C64], ket: &[C64]) -> Mat<C64> {
    let n = kernel.len();
    Mat::from_fn(n, n, |i, j| bra[j].conj() * kernel.get(i, j) * ket[i])
}

#[derive(Debug, Clone)]
pub struct IdenticalSystem {
    pub grid: Grid,
    pub one_body: Mat<C64>,
    pub kernel: PairKernel,
    pub space: FockSpace,
}

impl IdenticalSystem {
    pub fn new(grid: Grid, one_body: Mat<C64>, kernel: PairKernel, space: FockSpace) -> Result<IdenticalSystem, HamiltonianError> {
        if one_body.nrows() != grid.len() || one_body.ncols() != grid.len() || kernel.len() != grid.len() {
            return Err(HamiltonianError::OperatorShape { got: one_body.nrows(), n: grid.len() });
        }
        Ok(IdenticalSystem { grid, one_body, kernel, space })
    }

    pub fn n_orbitals(&self) -> usize {
        self.space.n_orbitals()
    }

    pub fn local_potentials(&self, orbitals: &Mat<C64>) -> LocalPotentials {
        LocalPotentials::new(&self.kernel, orbitals)
    }

    pub fn two_body_tensor(&self, orbitals: &Mat<C64>, pots: &LocalPotentials) -> TwoBodyTensor {
        let m = orbitals.ncols();
        let n = orbitals.nrows();
        let mut w = TwoBodyTensor::zeros(m);
        for k in 0..m {
            for q in 0..m {
                let d: Vec<C64> = (0..n).map(|i| orbitals[(i, k)].conj() * orbitals[(i, q)]).collect();
                for s in 0..m {
                    for l in 0..m {
                        let v: C64 = d.iter().zip(pots.get(s, l)).map(|(a, b)| a * b).sum();
                        w.set(k, s, q, l, v);
                    }
                }
            }
        }
        w
    }

    /// Second-quantised Hamiltonian matrix in the configuration basis.
    pub fn hamiltonian_matrix(&self, orbitals: &Mat<C64>) -> Mat<C64> {
        let h = one_body_matrix(orbitals, &self.one_body);
        let pots = self.local_potentials(orbitals);
        let w = self.two_body_tensor(orbitals, &pots);
        self.space.hamiltonian_matrix(&h, &w)
    }

    /// `Omega_kq(i) = sum_sl rho_kslq W_sl(i)`.
    pub fn mean_fields(&self, rho2: &TwoBodyDensity, pots: &LocalPotentials) -> Vec<Vec<C64>> {
        let m = self.n_orbitals();
        let n = self.grid.len();
        let mut out = Vec::with_capacity(m * m);
        for k in 0..m {
            for q in 0..m {
                let mut v = vec![ZERO; n];
                for s in 0..m {
                    for l in 0..m {
                        let r = rho2.get(k, s, l, q);
                        if r == ZERO {
                            continue;
                        }
                        v.iter_mut().zip(pots.get(s, l)).for_each(|(a, b)| *a += r * b);
                    }
                }
                out.push(v);
            }
        }
        out
    }

    /// Columns `F_k = sum_q [rho_kq h + Omega_kq] phi_q`.
    pub fn orbital_forces(&self, orbitals: &Mat<C64>, rho1: &Mat<C64>, rho2: &TwoBodyDensity) -> Mat<C64> {
        let pots = self.local_potentials(orbitals);
        let omega = self.mean_fields(rho2, &pots);
        let hphi = &self.one_body * orbitals;
        let m = self.n_orbitals();
        let n = self.grid.len();
        Mat::from_fn(n, m, |i, k| {
            let mut s = ZERO;
            for q in 0..m {
                s += rho1[(k, q)] * hphi[(i, q)] + omega[k * m + q][i] * orbitals[(i, q)];
            }
            s
        })
    }
}

/// One pairwise term `V(x_a, x_b)` sampled on the grids of `a` and `b`, strength included.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTerm {
    pub a: usize,
    pub b: usize,
    pub values: Mat<f64>,
}

/// All-body potential between distinguishable degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    Pairwise(Vec<PairTerm>),
    /// Full table over the product grid, row-major, at most 3 degrees of freedom.
    Table { dims: Vec<usize>, values: Vec<f64> },
}

impl Coupling {
    pub fn none() -> Coupling {
        Coupling::Pairwise(Vec::new())
    }

    /// `lambda * x_a * x_b`.
    pub fn bilinear(grids: &[Grid], a: usize, b: usize, lambda: f64) -> Result<Coupling, HamiltonianError> {
        Ok(Coupling::Pairwise(vec![Self::bilinear_term(grids, a, b, lambda)?]))
    }

    pub fn bilinear_term(grids: &[Grid], a: usize, b: usize, lambda: f64) -> Result<PairTerm, HamiltonianError> {
        if a == b {
            return Err(HamiltonianError::SelfPair(a));
        }
        let q = grids.len();
        if a >= q || b >= q {
            return Err(HamiltonianError::DofOutOfRange(a.max(b)));
        }
        let (xa, xb) = (grids[a].points(), grids[b].points());
        Ok(PairTerm { a, b, values: Mat::from_fn(xa.len(), xb.len(), |i, j| lambda * xa[i] * xb[j]) })
    }

    pub fn table(dims: Vec<usize>, values: Vec<f64>) -> Result<Coupling, HamiltonianError> {
        if dims.len() > 3 {
            return Err(HamiltonianError::TableTooManyDof(dims.len()));
        }
        let expected = dims.iter().product::<usize>();
        if values.len() != expected {
            return Err(HamiltonianError::TableShape { got: values.len(), expected });
        }
        Ok(Coupling::Table { dims, values })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coupling::Pairwise(t) => t.is_empty(),
            Coupling::Table { values, .. } => values.iter().all(|&v| v == 0.0),
        }
    }

    /// Function on the grid of `j`: integral of `W` against `conj(bra_l) ket_l` over all `l != j`.
    pub fn local(&self, j: usize, bra: &[&[C64]], ket: &[&[C64]]) -> Vec<C64> {
        let q = bra.len();
        let dens: Vec<Vec<C64>> = (0..q).map(|l| density(bra[l], ket[l])).collect();
        let n_j = bra[j].len();
        match self {
            Coupling::Pairwise(terms) => {
                let ov: Vec<C64> = dens.iter().map(|d| d.iter().sum()).collect();
                let mut out = vec![ZERO; n_j];
                let mut constant = ZERO;
                for t in terms {
                    if t.a == j {
                        let f = product_except(&ov, &[t.a, t.b]);
                        for (i, o) in out.iter_mut().enumerate() {
                            *o += f * (0..t.values.ncols()).map(|i2| dens[t.b][i2] * t.values[(i, i2)]).sum::<C64>();
                        }
                    } else if t.b == j {
                        let f = product_except(&ov, &[t.a, t.b]);
                        for (i, o) in out.iter_mut().enumerate() {
                            *o += f * (0..t.values.nrows()).map(|i2| dens[t.a][i2] * t.values[(i2, i)]).sum::<C64>();
                        }
                    } else {
                        constant += product_except(&ov, &[t.a, t.b, j]) * pair_element(t, &dens[t.a], &dens[t.b]);
                    }
                }
                out.iter_mut().for_each(|o| *o += constant);
                out
            }
            Coupling::Table { dims, values } => {
                let mut out = vec![ZERO; n_j];
                for (flat, &v) in values.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let idx = unflatten(flat, dims);
                    let mut w = c(v);
                    for l in 0..q {
                        if l != j {
                            w *= dens[l][idx[l]];
                        }
                    }
                    out[idx[j]] += w;
                }
                out
            }
        }
    }

    /// Kernel on the grids of `j` and `k`: integral of `W` against
    /// `conj(bra_l) ket_l` over all `l` other than `j` and `k`.
    pub fn pair_kernel(&self, j: usize, k: usize, bra: &[&[C64]], ket: &[&[C64]]) -> Mat<C64> {
        let q = bra.len();
        let dens: Vec<Vec<C64>> = (0..q).map(|l| density(bra[l], ket[l])).collect();
        let (n_j, n_k) = (bra[j].len(), bra[k].len());
        match self {
            Coupling::Pairwise(terms) => {
                let ov: Vec<C64> = dens.iter().map(|d| d.iter().sum()).collect();
                let mut fj = vec![ZERO; n_j];
                let mut fk = vec![ZERO; n_k];
                let mut constant = ZERO;
                let mut out = Mat::<C64>::zeros(n_j, n_k);
                for t in terms {
                    let (a, b) = (t.a, t.b);
                    if (a == j && b == k) || (a == k && b == j) {
                        let f = product_except(&ov, &[a, b]);
                        for i in 0..n_j {
                            for i2 in 0..n_k {
                                let v = if a == j { t.values[(i, i2)] } else { t.values[(i2, i)] };
                                out[(i, i2)] += f * v;
                            }
                        }
                    } else if a == j || b == j {
                        let other = if a == j { b } else { a };
                        let f = product_except(&ov, &[j, k, other]);
                        let g = pair_marginal(t, j, &dens[other]);
                        fj.iter_mut().zip(&g).for_each(|(x, y)| *x += f * y);
                    } else if a == k || b == k {
                        let other = if a == k { b } else { a };
                        let f = product_except(&ov, &[j, k, other]);
                        let g = pair_marginal(t, k, &dens[other]);
                        fk.iter_mut().zip(&g).for_each(|(x, y)| *x += f * y);
                    } else {
                        constant += product_except(&ov, &[j, k, a, b]) * pair_element(t, &dens[a], &dens[b]);
                    }
                }
                for i in 0..n_j {
                    for i2 in 0..n_k {
                        out[(i, i2)] += fj[i] + fk[i2] + constant;
                    }
                }
                out
            }
            Coupling::Table { dims, values } => {
                let mut out = Mat::<C64>::zeros(n_j, n_k);
                for (flat, &v) in values.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let idx = unflatten(flat, dims);
                    let mut w = c(v);
                    for l in 0..q {
                        if l != j && l != k {
                            w *= dens[l][idx[l]];
                        }
                    }
                    out[(idx[j], idx[k])] += w;
                }
                out
            }
        }
    }

    /// `<bra| W |ket>` for Hartree products.
    pub fn element(&self, bra: &[&[C64]], ket: &[&[C64]]) -> C64 {
        let d = density(bra[0], ket[0]);
        self.local(0, bra, ket).iter().zip(&d).map(|(a, b)| a * b).sum()
    }
}

fn density(bra: &[C64], ket: &[C64]) -> Vec<C64> {
    bra.iter().zip(ket).map(|(b, k)| b.conj() * k).collect()
}

fn product_except(ov: &[C64], skip: &[usize]) -> C64 {
    ov.iter()
        .enumerate()
        .filter(|(l, _)| !skip.contains(l))
        .map(|(_, v)| *v)
        .fold(c(1.0), |a, b| a * b)
}

fn pair_element(t: &PairTerm, da: &[C64], db: &[C64]) -> C64 {
    let mut s = ZERO;
    for i in 0..t.values.nrows() {
        for i2 in 0..t.values.ncols() {
            s += da[i] * t.values[(i, i2)] * db[i2];
        }
    }
    s
}

/// Integrates the partner coordinate of term `t` against `d`, leaving a function of `keep`.
fn pair_marginal(t: &PairTerm, keep: usize, d: &[C64]) -> Vec<C64> {
    if t.a == keep {
        (0..t.values.nrows())
            .map(|i| (0..t.values.ncols()).map(|i2| t.values[(i, i2)] * d[i2]).sum())
            .collect()
    } else {
        (0..t.values.ncols())
            .map(|i| (0..t.values.nrows()).map(|i2| t.values[(i2, i)] * d[i2]).sum())
            .collect()
    }
}

fn unflatten(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for j in (0..dims.len()).rev() {
        idx[j] = flat % dims[j];
        flat /= dims[j];
    }
    idx
}

/// Distinguishable degrees of freedom, each with its own grid and one-body operator.
#[derive(Debug, Clone)]
pub struct DistinguishableSystem {
    pub grids: Vec<Grid>,
    pub one_body: Vec<Mat<C64>>,
    pub coupling: Coupling,
    pub basis: ProductBasis,
}

/// Per-configuration orbital columns, borrowed from the per-dof orbital matrices.
pub fn config_orbitals<'a>(basis: &ProductBasis, orbitals: &'a [Vec<Vec<C64>>], i: usize) -> Vec<&'a [C64]> {
    (0..basis.n_dof()).map(|j| orbitals[j][basis.digit(i, j)].as_slice()).collect()
}

/// Orbital matrices split into column vectors per degree of freedom.
pub fn orbital_columns(orbitals: &[Mat<C64>]) -> Vec<Vec<Vec<C64>>> {
    orbitals.iter().map(|o| (0..o.ncols()).map(|k| column(o, k)).collect()).collect()
}

impl DistinguishableSystem {
    pub fn new(grids: Vec<Grid>, one_body: Vec<Mat<C64>>, coupling: Coupling, orbitals_per_dof: &[usize]) -> Result<DistinguishableSystem, crate::Error> {
        if grids.len() != one_body.len() || grids.len() != orbitals_per_dof.len() {
            return Err(HamiltonianError::DofOutOfRange(grids.len()).into());
        }
        for (g, h) in grids.iter().zip(&one_body) {
            if h.nrows() != g.len() || h.ncols() != g.len() {
                return Err(HamiltonianError::OperatorShape { got: h.nrows(), n: g.len() }.into());
            }
        }
        match &coupling {
            Coupling::Pairwise(terms) => {
                for t in terms {
                    if t.a == t.b {
                        return Err(HamiltonianError::SelfPair(t.a).into());
                    }
                    if t.a >= grids.len() || t.b >= grids.len() {
                        return Err(HamiltonianError::DofOutOfRange(t.a.max(t.b)).into());
                    }
                }
            }
            Coupling::Table { dims, .. } => {
                if dims.len() != grids.len() || dims.iter().zip(&grids).any(|(d, g)| *d != g.len()) {
                    return Err(HamiltonianError::TableShape { got: dims.iter().product(), expected: grids.iter().map(|g| g.len()).product() }.into());
                }
            }
        }
        let basis = ProductBasis::new(orbitals_per_dof)?;
        Ok(DistinguishableSystem { grids, one_body, coupling, basis })
    }

    pub fn n_dof(&self) -> usize {
        self.grids.len()
    }

    /// `H_{n m} = sum_j h^j_{n_j m_j} prod_{l != j} delta + W_{n m}`.
    pub fn hamiltonian_matrix(&self, orbitals: &[Mat<C64>]) -> Mat<C64> {
        let hs: Vec<Mat<C64>> = orbitals.iter().zip(&self.one_body).map(|(o, h)| one_body_matrix(o, h)).collect();
        let cols = orbital_columns(orbitals);
        let nc = self.basis.len();
        let mut out = Mat::<C64>::zeros(nc, nc);
        for b in 0..nc {
            for j in 0..self.n_dof() {
                let mj = self.basis.digit(b, j);
                for n in 0..self.basis.dims()[j] {
                    out[(self.basis.replace(b, j, n), b)] += hs[j][(n, mj)];
                }
            }
        }
        if !self.coupling.is_zero() {
            for a in 0..nc {
                let bra = config_orbitals(&self.basis, &cols, a);
                for b in 0..nc {
                    let ket = config_orbitals(&self.basis, &cols, b);
                    out[(a, b)] += self.coupling.element(&bra, &ket);
                }
            }
        }
        out
    }

    /// `Omega^j_{nm}(x_j) = sum rho_{n m} W_{n[j] m[j]}(x_j)`, indexed `[j][n * M_j + m]`.
    pub fn mean_fields(&self, orbitals: &[Mat<C64>], coefficients: &[C64]) -> Vec<Vec<Vec<C64>>> {
        let cols = orbital_columns(orbitals);
        let q = self.n_dof();
        let dims = self.basis.dims();
        let mut out: Vec<Vec<Vec<C64>>> = (0..q)
            .map(|j| vec![vec![ZERO; self.grids[j].len()]; dims[j] * dims[j]])
            .collect();
        if self.coupling.is_zero() {
            return out;
        }
        let nc = self.basis.len();
        for a in 0..nc {
            let bra = config_orbitals(&self.basis, &cols, a);
            for b in 0..nc {
                let rho = coefficients[a].conj() * coefficients[b];
                if rho == ZERO {
                    continue;
                }
                let ket = config_orbitals(&self.basis, &cols, b);
                for j in 0..q {
                    let v = self.coupling.local(j, &bra, &ket);
                    let slot = &mut out[j][self.basis.digit(a, j) * dims[j] + self.basis.digit(b, j)];
                    slot.iter_mut().zip(&v).for_each(|(s, x)| *s += rho * x);
                }
            }
        }
        out
    }

    /// Per-dof columns `F^j_n = sum_m [rho^j_nm h^j + Omega^j_nm] phi^j_m`.
    pub fn orbital_forces(&self, orbitals: &[Mat<C64>], coefficients: &[C64]) -> Vec<Mat<C64>> {
        let omega = self.mean_fields(orbitals, coefficients);
        (0..self.n_dof())
            .map(|j| {
                let rho = self.basis.reduced_density(coefficients, j);
                let hphi = &self.one_body[j] * &orbitals[j];
                let mj = orbitals[j].ncols();
                Mat::from_fn(orbitals[j].nrows(), mj, |i, n| {
                    let mut s = ZERO;
                    for m in 0..mj {
                        s += rho[(n, m)] * hphi[(i, m)] + omega[j][n * mj + m][i] * orbitals[j][(i, m)];
                    }
                    s
                })
            })
            .collect()
    }
}
