//! Linear-response matrix around a stationary state of identical bosons or fermions.
//!
//! Vectors are laid out as `(u, v, C_u, C_v)` where `u` stacks the orbital
//! perturbations `u_k` (`k * n + i`), `v` their conjugate partners and the last
//! two blocks the coefficient perturbations.

use crate::fockspace::{Statistics, TwoBodyDensity};
use crate::grid::PairKernel;
use crate::groundstate::{nonlinear_rhs, orbital_projector, regularized_power, GroundState};
use crate::hamiltonian::{IdenticalSystem, LocalPotentials};
use crate::linalg::{self, c, column, hermitian_part, identity, matvec, C64, ZERO};
use crate::spectrum::Layout;
use faer::Mat;
use rand::{Rng, SeedableRng};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinResError {
    #[error("reference state has {got} orbitals, system expects {expected}")]
    OrbitalCount { got: usize, expected: usize },
    #[error("reference state has {got} coefficients, system expects {expected}")]
    CoefficientCount { got: usize, expected: usize },
    #[error("perturbation operator is {got}x{got}, grid has {n} points")]
    PerturbationShape { got: usize, n: usize },
    #[error("perturbation vector has length {got}, layout expects {expected}")]
    VectorLength { got: usize, expected: usize },
}

/// Unprojected blocks of the response operator.
#[derive(Debug, Clone)]
pub struct Blocks {
    pub a: Mat<C64>,
    pub b: Mat<C64>,
    pub oc_u: Mat<C64>,
    pub oc_v: Mat<C64>,
    /// Built from `oc_u^dagger`.
    pub co_u: Mat<C64>,
    /// Built from `oc_v^T`.
    pub co_v: Mat<C64>,
    /// Direct construction of the coefficient-orbital couplings, kept for cross-checking.
    pub co_u_direct: Mat<C64>,
    pub co_v_direct: Mat<C64>,
    /// `H - epsilon`.
    pub cc: Mat<C64>,
}

#[derive(Debug, Clone)]
pub struct IdenticalResponse {
    pub layout: Layout,
    pub n_points: usize,
    pub n_orbitals: usize,
    pub statistics: Statistics,
    pub blocks: Blocks,
    /// Unprojected operator `[[A, B, oc_u, oc_v], [-B*, -A*, -oc_v*, -oc_u*], ...]`.
    pub operator: Mat<C64>,
    /// `P * operator`, before the metric transformation.
    pub raw: Mat<C64>,
    /// `P M^-1/2 operator M^-1/2 P`.
    pub matrix: Mat<C64>,
    pub projector: Mat<C64>,
    pub metric_sqrt: Mat<C64>,
    pub metric_inv_sqrt: Mat<C64>,
    pub energy: f64,
}

/// Perturbing operator `f^dagger e^{-i w t} + f e^{i w t}` with optional two-body part `g`.
#[derive(Debug, Clone, Default)]
pub struct Perturbation {
    /// `f^dagger` as an operator on grid coefficients.
    pub one_body: Option<Mat<C64>>,
    /// Real symmetric pair kernel.
    pub two_body: Option<PairKernel>,
}

impl Perturbation {
    pub fn one_body(op: Mat<C64>) -> Perturbation {
        Perturbation { one_body: Some(op), two_body: None }
    }

    pub fn two_body(kernel: PairKernel) -> Perturbation {
        Perturbation { one_body: None, two_body: Some(kernel) }
    }
}

/// Orbital and coefficient perturbations recovered from a metric-space vector.
#[derive(Debug, Clone)]
pub struct Components {
    pub u: Mat<C64>,
    pub v: Mat<C64>,
    pub cu: Vec<C64>,
    pub cv: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct LinearizationReport {
    pub etas: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log eta`.
    pub slope: f64,
}

fn block_kron(small: &Mat<C64>, n: usize) -> Mat<C64> {
    let m = small.nrows();
    let mut out = Mat::<C64>::zeros(m * n, m * n);
    for k in 0..m {
        for q in 0..m {
            let v = small[(k, q)];
            for i in 0..n {
                out[(k * n + i, q * n + i)] = v;
            }
        }
    }
    out
}

pub(crate) fn block_diag(blocks: &[&Mat<C64>]) -> Mat<C64> {
    let d: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::<C64>::zeros(d, d);
    let mut off = 0;
    for b in blocks {
        for j in 0..b.ncols() {
            for i in 0..b.nrows() {
                out[(off + i, off + j)] = b[(i, j)];
            }
        }
        off += b.nrows();
    }
    out
}

pub(crate) fn write_block(dst: &mut Mat<C64>, r0: usize, c0: usize, src: &Mat<C64>, f: impl Fn(C64) -> C64) {
    for j in 0..src.ncols() {
        for i in 0..src.nrows() {
            dst[(r0 + i, c0 + j)] = f(src[(i, j)]);
        }
    }
}

/// All `rho_hat_{abcd} C` vectors, indexed `((a*M+b)*M+c)*M+d`.
fn two_body_actions(system: &IdenticalSystem, coef: &[C64]) -> Vec<Vec<C64>> {
    let m = system.n_orbitals();
    let mut out = Vec::with_capacity(m * m * m * m);
    for a in 0..m {
        for b in 0..m {
            for cc in 0..m {
                for d in 0..m {
                    out.push(system.space.apply_two_body(coef, a, b, cc, d));
                }
            }
        }
    }
    out
}

fn one_body_actions(system: &IdenticalSystem, coef: &[C64]) -> Vec<Vec<C64>> {
    let m = system.n_orbitals();
    let mut out = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            out.push(system.space.apply_one_body(coef, a, b));
        }
    }
    out
}

/// Builds the unprojected blocks from a stationary state.
pub fn build_blocks(system: &IdenticalSystem, gs: &GroundState) -> Result<Blocks, LinResError> {
    build_blocks_with_exchange(system, gs, system.space.statistics().exchange_sign())
}

/// As [`build_blocks`] with the sign of the exchange term in the orbital-orbital
/// block given explicitly; statistics enter nowhere else.
pub fn build_blocks_with_exchange(system: &IdenticalSystem, gs: &GroundState, sign: f64) -> Result<Blocks, LinResError> {
    let m = system.n_orbitals();
    let n = system.grid.len();
    let nc = system.space.len();
    if gs.orbitals.ncols() != m {
        return Err(LinResError::OrbitalCount { got: gs.orbitals.ncols(), expected: m });
    }
    if gs.coefficients.len() != nc {
        return Err(LinResError::CoefficientCount { got: gs.coefficients.len(), expected: nc });
    }
    let phi = &gs.orbitals;
    let psi: Vec<Vec<C64>> = (0..m).map(|k| column(phi, k)).collect();
    let rho1 = &gs.rho1;
    let rho2: &TwoBodyDensity = &gs.rho2;
    let mu = hermitian_part(&gs.mu);
    let kernel = &system.kernel;
    let h = &system.one_body;
    let pots: LocalPotentials = system.local_potentials(phi);
    let omega = system.mean_fields(rho2, &pots);
    let hpsi: Vec<Vec<C64>> = (0..m).map(|q| matvec(h, &psi[q])).collect();
    let idx4 = |a: usize, b: usize, cc: usize, d: usize| ((a * m + b) * m + cc) * m + d;

    let mut a = Mat::<C64>::zeros(m * n, m * n);
    let mut b = Mat::<C64>::zeros(m * n, m * n);
    for k in 0..m {
        for q in 0..m {
            // X(i,j) = sum_sl rho_kslq psi_l(i) conj psi_s(j); Y(i,j) = sum_sl rho_kqls psi_s(i) psi_l(j)
            let rx = Mat::from_fn(m, m, |l, s| rho2.get(k, s, l, q));
            let ry = Mat::from_fn(m, m, |s, l| rho2.get(k, q, l, s));
            let x = &(phi * &rx) * &linalg::adjoint(phi);
            let y = &(phi * &ry) * &linalg::transpose(phi);
            let r = rho1[(k, q)];
            for j in 0..n {
                for i in 0..n {
                    let w = kernel.get(i, j);
                    let mut va = r * h[(i, j)] + x[(i, j)] * (sign * w);
                    if i == j {
                        va += omega[k * m + q][i] - mu[(k, q)];
                    }
                    a[(k * n + i, q * n + j)] = va;
                    b[(k * n + i, q * n + j)] = y[(i, j)] * w;
                }
            }
        }
    }

    let t1 = one_body_actions(system, &gs.coefficients);
    let t2 = two_body_actions(system, &gs.coefficients);
    // W_sl psi_q for every (s, l, q)
    let wpsi: Vec<Vec<C64>> = (0..m * m * m)
        .map(|t| {
            let (s, l, q) = (t / (m * m), (t / m) % m, t % m);
            pots.get(s, l).iter().zip(&psi[q]).map(|(w, p)| w * p).collect()
        })
        .collect();
    let wp = |s: usize, l: usize, q: usize| &wpsi[(s * m + l) * m + q];

    let mut oc_u = Mat::<C64>::zeros(m * n, nc);
    let mut oc_v = Mat::<C64>::zeros(m * n, nc);
    for k in 0..m {
        for q in 0..m {
            let au = &t1[q * m + k];
            let av = &t1[k * m + q];
            for mm in 0..nc {
                let (cu, cv) = (au[mm].conj(), av[mm]);
                if cu == ZERO && cv == ZERO {
                    continue;
                }
                for i in 0..n {
                    oc_u[(k * n + i, mm)] += cu * hpsi[q][i];
                    oc_v[(k * n + i, mm)] += cv * hpsi[q][i];
                }
            }
            for s in 0..m {
                for l in 0..m {
                    let bu = &t2[idx4(q, l, s, k)];
                    let bv = &t2[idx4(k, s, l, q)];
                    let f = wp(s, l, q);
                    for mm in 0..nc {
                        let (cu, cv) = (bu[mm].conj(), bv[mm]);
                        if cu == ZERO && cv == ZERO {
                            continue;
                        }
                        for i in 0..n {
                            oc_u[(k * n + i, mm)] += cu * f[i];
                            oc_v[(k * n + i, mm)] += cv * f[i];
                        }
                    }
                }
            }
        }
    }

    let mut co_u_direct = Mat::<C64>::zeros(nc, m * n);
    let mut co_v_direct = Mat::<C64>::zeros(nc, m * n);
    for q in 0..m {
        for k in 0..m {
            let t = &t1[k * m + q];
            for mm in 0..nc {
                if t[mm] == ZERO {
                    continue;
                }
                for i in 0..n {
                    co_u_direct[(mm, q * n + i)] += hpsi[k][i].conj() * t[mm];
                }
            }
            let t = &t1[q * m + k];
            for mm in 0..nc {
                if t[mm] == ZERO {
                    continue;
                }
                for i in 0..n {
                    co_v_direct[(mm, q * n + i)] += hpsi[k][i] * t[mm];
                }
            }
            for s in 0..m {
                for l in 0..m {
                    let t = &t2[idx4(k, s, l, q)];
                    let wsl = pots.get(s, l);
                    for mm in 0..nc {
                        if t[mm] == ZERO {
                            continue;
                        }
                        for i in 0..n {
                            co_u_direct[(mm, q * n + i)] += psi[k][i].conj() * wsl[i] * t[mm];
                        }
                    }
                    // co_v column (k, i): sum_sql (W_sl psi_q)(i) (rho_kslq C)_m
                    let f = wp(s, l, q);
                    for mm in 0..nc {
                        if t[mm] == ZERO {
                            continue;
                        }
                        for i in 0..n {
                            co_v_direct[(mm, k * n + i)] += f[i] * t[mm];
                        }
                    }
                }
            }
        }
    }

    let hmat = system.hamiltonian_matrix(phi);
    let eps = linalg::dot(&gs.coefficients, &matvec(&hmat, &gs.coefficients)).re;
    let cc = &hmat - &linalg::scale(&identity(nc), c(eps));
    Ok(Blocks {
        co_u: linalg::adjoint(&oc_u),
        co_v: linalg::transpose(&oc_v),
        a,
        b,
        oc_u,
        oc_v,
        co_u_direct,
        co_v_direct,
        cc,
    })
}

/// Assembles the projected, metric-transformed response matrix.
pub fn assemble(system: &IdenticalSystem, gs: &GroundState) -> Result<IdenticalResponse, LinResError> {
    let blocks = build_blocks(system, gs)?;
    let m = system.n_orbitals();
    let n = system.grid.len();
    let nc = system.space.len();
    let layout = Layout { orbital: m * n, coefficient: nc };
    let d = layout.dim();
    let (o, cu0, cv0) = (m * n, 2 * m * n, 2 * m * n + nc);

    let mut op = Mat::<C64>::zeros(d, d);
    let neg_conj = |z: C64| -z.conj();
    let id = |z: C64| z;
    write_block(&mut op, 0, 0, &blocks.a, id);
    write_block(&mut op, 0, o, &blocks.b, id);
    write_block(&mut op, 0, cu0, &blocks.oc_u, id);
    write_block(&mut op, 0, cv0, &blocks.oc_v, id);
    write_block(&mut op, o, 0, &blocks.b, neg_conj);
    write_block(&mut op, o, o, &blocks.a, neg_conj);
    write_block(&mut op, o, cu0, &blocks.oc_v, neg_conj);
    write_block(&mut op, o, cv0, &blocks.oc_u, neg_conj);
    write_block(&mut op, cu0, 0, &blocks.co_u, id);
    write_block(&mut op, cu0, o, &blocks.co_v, id);
    write_block(&mut op, cu0, cu0, &blocks.cc, id);
    write_block(&mut op, cv0, 0, &blocks.co_v, neg_conj);
    write_block(&mut op, cv0, o, &blocks.co_u, neg_conj);
    write_block(&mut op, cv0, cv0, &blocks.cc, neg_conj);

    let p_orb = orbital_projector(&gs.orbitals);
    let p_orb_big = block_kron(&identity(m), n);
    let p_orb_big = {
        let mut t = p_orb_big;
        for k in 0..m {
            for j in 0..n {
                for i in 0..n {
                    t[(k * n + i, k * n + j)] = p_orb[(i, j)];
                }
            }
        }
        t
    };
    let cvec = &gs.coefficients;
    let p_c = Mat::from_fn(nc, nc, |i, j| if i == j { c(1.0) } else { ZERO } - cvec[i] * cvec[j].conj());
    let projector = block_diag(&[&p_orb_big, &linalg::conj(&p_orb_big), &p_c, &linalg::conj(&p_c)]);

    let rs = regularized_power(&gs.rho1, 0.5);
    let ris = regularized_power(&gs.rho1, -0.5);
    let one = identity(nc);
    let metric_sqrt = block_diag(&[&block_kron(&rs, n), &block_kron(&linalg::conj(&rs), n), &one, &one]);
    let metric_inv_sqrt = block_diag(&[&block_kron(&ris, n), &block_kron(&linalg::conj(&ris), n), &one, &one]);

    let raw = &projector * &op;
    let inner = &(&metric_inv_sqrt * &op) * &metric_inv_sqrt;
    let matrix = &(&projector * &inner) * &projector;
    Ok(IdenticalResponse {
        layout,
        n_points: n,
        n_orbitals: m,
        statistics: system.space.statistics(),
        blocks,
        operator: op,
        raw,
        matrix,
        projector,
        metric_sqrt,
        metric_inv_sqrt,
        energy: gs.energy,
    })
}

impl IdenticalResponse {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Gauge directions spanning the kernel of the projector: `2 (M^2 + 1)` vectors.
    pub fn gauge_modes(&self, gs: &GroundState) -> Vec<Vec<C64>> {
        let (m, n) = (self.n_orbitals, self.n_points);
        let d = self.dim();
        let mut out = Vec::new();
        for p in 0..m {
            for q in 0..m {
                let mut z = vec![ZERO; d];
                for i in 0..n {
                    z[p * n + i] = gs.orbitals[(i, q)];
                }
                out.push(z);
                let mut z = vec![ZERO; d];
                for i in 0..n {
                    z[m * n + p * n + i] = gs.orbitals[(i, q)].conj();
                }
                out.push(z);
            }
        }
        let mut z = vec![ZERO; d];
        z[self.layout.cu_range()].copy_from_slice(&gs.coefficients);
        out.push(z);
        let mut z = vec![ZERO; d];
        for (x, y) in z[self.layout.cv_range()].iter_mut().zip(&gs.coefficients) {
            *x = y.conj();
        }
        out.push(z);
        out
    }

    pub fn expected_zero_modes(&self) -> usize {
        2 * (self.n_orbitals * self.n_orbitals + 1)
    }

    /// `max |L z|` over the gauge directions.
    pub fn gauge_residual(&self, gs: &GroundState) -> f64 {
        self.gauge_modes(gs).iter().map(|z| linalg::norm(&matvec(&self.matrix, z))).fold(0.0, f64::max)
    }

    /// `max|co_u - oc_u^dagger|`, `max|co_v - oc_v^T|` against the direct construction.
    pub fn coupling_consistency(&self) -> (f64, f64) {
        (
            linalg::max_abs_diff(&self.blocks.co_u_direct, &self.blocks.co_u),
            linalg::max_abs_diff(&self.blocks.co_v_direct, &self.blocks.co_v),
        )
    }

    pub fn symmetry_residuals(&self) -> (f64, f64) {
        (self.layout.sigma1_residual(&self.matrix), self.layout.sigma3_residual(&self.matrix))
    }

    /// Driving vector `R` of the inhomogeneous response equation in metric space.
    pub fn perturbation_vector(&self, system: &IdenticalSystem, gs: &GroundState, pert: &Perturbation) -> Result<Vec<C64>, LinResError> {
        let (m, n) = (self.n_orbitals, self.n_points);
        let nc = self.layout.coefficient;
        let d = self.dim();
        let l = self.layout;
        let mut one = vec![ZERO; d];
        let mut two = vec![ZERO; d];
        let psi: Vec<Vec<C64>> = (0..m).map(|k| column(&gs.orbitals, k)).collect();
        if let Some(fd) = &pert.one_body {
            if fd.nrows() != n || fd.ncols() != n {
                return Err(LinResError::PerturbationShape { got: fd.nrows(), n });
            }
            let f = linalg::adjoint(fd);
            let fd_orb = crate::hamiltonian::one_body_matrix(&gs.orbitals, fd);
            let f_orb = crate::hamiltonian::one_body_matrix(&gs.orbitals, &f);
            for k in 0..m {
                let a = matvec(fd, &psi[k]);
                let b = matvec(&f, &psi[k]);
                for i in 0..n {
                    one[k * n + i] = -a[i];
                    one[m * n + k * n + i] = b[i].conj();
                }
            }
            for k in 0..m {
                for q in 0..m {
                    let t = system.space.apply_one_body(&gs.coefficients, k, q);
                    for mm in 0..nc {
                        two[l.cu_range().start + mm] -= fd_orb[(k, q)] * t[mm];
                        two[l.cv_range().start + mm] += (f_orb[(k, q)] * t[mm]).conj();
                    }
                }
            }
        }
        if let Some(g) = &pert.two_body {
            if g.len() != n {
                return Err(LinResError::PerturbationShape { got: g.len(), n });
            }
            let gp = LocalPotentials::new(g, &gs.orbitals);
            let omega_g = system.mean_fields(&gs.rho2, &gp);
            for k in 0..m {
                let mut acc = vec![ZERO; n];
                for q in 0..m {
                    for i in 0..n {
                        acc[i] += omega_g[k * m + q][i] * psi[q][i];
                    }
                }
                for i in 0..n {
                    two[k * n + i] -= acc[i];
                    two[m * n + k * n + i] += acc[i].conj();
                }
            }
            let gt = system.two_body_tensor(&gs.orbitals, &gp);
            let mut s = vec![ZERO; nc];
            for k in 0..m {
                for sidx in 0..m {
                    for q in 0..m {
                        for li in 0..m {
                            let w = gt.get(k, sidx, q, li);
                            if w == ZERO {
                                continue;
                            }
                            let t = system.space.apply_two_body(&gs.coefficients, k, sidx, li, q);
                            s.iter_mut().zip(&t).for_each(|(a, b)| *a += w * b * 0.5);
                        }
                    }
                }
            }
            for mm in 0..nc {
                two[l.cu_range().start + mm] -= s[mm];
                two[l.cv_range().start + mm] += s[mm].conj();
            }
        }
        let a = matvec(&self.metric_sqrt, &one);
        let b = matvec(&self.metric_inv_sqrt, &two);
        let sum: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        Ok(matvec(&self.projector, &sum))
    }

    /// Undoes the metric transformation and splits a vector into its blocks.
    pub fn components(&self, y: &[C64]) -> Result<Components, LinResError> {
        if y.len() != self.dim() {
            return Err(LinResError::VectorLength { got: y.len(), expected: self.dim() });
        }
        let x = matvec(&self.metric_inv_sqrt, y);
        let (m, n) = (self.n_orbitals, self.n_points);
        Ok(Components {
            u: Mat::from_fn(n, m, |i, k| x[k * n + i]),
            v: Mat::from_fn(n, m, |i, k| x[m * n + k * n + i]),
            cu: x[self.layout.cu_range()].to_vec(),
            cv: x[self.layout.cv_range()].to_vec(),
        })
    }

    /// Compares finite differences of the nonlinear stationarity conditions with the
    /// linear operator along a random admissible direction.
    pub fn linearization_check(&self, system: &IdenticalSystem, gs: &GroundState, etas: &[f64], seed: u64) -> LinearizationReport {
        let (m, n) = (self.n_orbitals, self.n_points);
        let nc = self.layout.coefficient;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut rnd = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let p_orb = orbital_projector(&gs.orbitals);
        let raw_dir = Mat::from_fn(n, m, |_, _| rnd());
        let dpsi = &p_orb * &raw_dir;
        let c0 = &gs.coefficients;
        let mut dc: Vec<C64> = (0..nc).map(|_| rnd()).collect();
        let ov = linalg::dot(c0, &dc);
        dc.iter_mut().zip(c0).for_each(|(a, b)| *a -= ov * b);
        let scale = 1.0 / (linalg::norm(&dc).max(1e-300) + dpsi.norm_l2());
        let dpsi = linalg::scale(&dpsi, c(scale));
        dc.iter_mut().for_each(|a| *a *= scale);

        let mut x = vec![ZERO; self.dim()];
        for k in 0..m {
            for i in 0..n {
                x[k * n + i] = dpsi[(i, k)];
                x[m * n + k * n + i] = dpsi[(i, k)].conj();
            }
        }
        for mm in 0..nc {
            x[self.layout.cu_range().start + mm] = dc[mm];
            x[self.layout.cv_range().start + mm] = dc[mm].conj();
        }
        let y = matvec(&self.raw, &x);

        let p_c = |v: &[C64]| -> Vec<C64> {
            let o = linalg::dot(c0, v);
            v.iter().zip(c0).map(|(a, b)| a - o * b).collect()
        };
        let (g0, gc0) = nonlinear_rhs(system, &gs.orbitals, c0);
        let mut errors = Vec::with_capacity(etas.len());
        for &eta in etas {
            let phi = &gs.orbitals + &linalg::scale(&dpsi, c(eta));
            let cc: Vec<C64> = c0.iter().zip(&dc).map(|(a, b)| a + b * eta).collect();
            let (g1, gc1) = nonlinear_rhs(system, &phi, &cc);
            let dg = &p_orb * &linalg::scale(&(&g1 - &g0), c(1.0 / eta));
            let dgc = p_c(&gc1.iter().zip(&gc0).map(|(a, b)| (a - b) / eta).collect::<Vec<_>>());
            let mut err = 0.0;
            for k in 0..m {
                for i in 0..n {
                    err += (dg[(i, k)] - y[k * n + i]).norm_sqr();
                }
            }
            for mm in 0..nc {
                err += (dgc[mm] - y[self.layout.cu_range().start + mm]).norm_sqr();
            }
            errors.push(err.sqrt());
        }
        let slope = log_slope(etas, &errors);
        LinearizationReport { etas: etas.to_vec(), errors, slope }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(1e-300).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
