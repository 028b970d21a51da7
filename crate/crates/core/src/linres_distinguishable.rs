//! Linear-response matrix around a stationary multi-dof Hartree state of
//! distinguishable degrees of freedom.
//!
//! The orbital block stacks every degree of freedom in turn: `(j, n, i)` sits at
//! `offset_j + n * n_j + i`.

use crate::fockspace::ProductBasis;
use crate::groundstate::{nonlinear_rhs_distinguishable, orbital_projector, regularized_power, DistinguishableGroundState};
use crate::hamiltonian::{config_orbitals, orbital_columns, Coupling, DistinguishableSystem};
use crate::linalg::{self, c, hermitian_part, identity, matvec, C64, ZERO};
use crate::linres_identical::{block_diag, log_slope, write_block, Blocks, LinResError, LinearizationReport};
use crate::spectrum::Layout;
use faer::Mat;
use rand::{Rng, SeedableRng};

#[derive(Debug, Clone)]
pub struct DistinguishableResponse {
    pub layout: Layout,
    /// Orbitals per degree of freedom.
    pub dims: Vec<usize>,
    /// Grid points per degree of freedom.
    pub points: Vec<usize>,
    pub offsets: Vec<usize>,
    pub blocks: Blocks,
    pub operator: Mat<C64>,
    pub raw: Mat<C64>,
    pub matrix: Mat<C64>,
    pub projector: Mat<C64>,
    pub metric_sqrt: Mat<C64>,
    pub metric_inv_sqrt: Mat<C64>,
    pub energy: f64,
}

/// One-body perturbation `f^dagger` acting on a single degree of freedom.
#[derive(Debug, Clone)]
pub struct DofPerturbation {
    pub dof: usize,
    pub op: Mat<C64>,
}

/// Per-dof one-body fields plus an optional real all-body field `g`.
#[derive(Debug, Clone, Default)]
pub struct DistPerturbation {
    pub one_body: Vec<DofPerturbation>,
    pub all_body: Option<Coupling>,
}

impl DistPerturbation {
    pub fn single(dof: usize, op: Mat<C64>) -> DistPerturbation {
        DistPerturbation { one_body: vec![DofPerturbation { dof, op }], all_body: None }
    }
}

#[derive(Debug, Clone)]
pub struct DistinguishableComponents {
    pub u: Vec<Mat<C64>>,
    pub v: Vec<Mat<C64>>,
    pub cu: Vec<C64>,
    pub cv: Vec<C64>,
}

struct Index {
    offsets: Vec<usize>,
    points: Vec<usize>,
}

impl Index {
    fn at(&self, j: usize, n: usize, i: usize) -> usize {
        self.offsets[j] + n * self.points[j] + i
    }
}

/// `local(j, bra a, ket b)` for every pair of configurations, indexed `(a * nc + b) * Q + j`.
fn local_fields(system: &DistinguishableSystem, cols: &[Vec<Vec<C64>>]) -> Vec<Vec<C64>> {
    let basis = &system.basis;
    let (nc, q) = (basis.len(), system.n_dof());
    let mut out = Vec::with_capacity(nc * nc * q);
    for a in 0..nc {
        let bra = config_orbitals(basis, cols, a);
        for b in 0..nc {
            let ket = config_orbitals(basis, cols, b);
            for j in 0..q {
                out.push(system.coupling.local(j, &bra, &ket));
            }
        }
    }
    out
}

pub fn build_blocks(system: &DistinguishableSystem, gs: &DistinguishableGroundState) -> Result<Blocks, LinResError> {
    let basis: &ProductBasis = &system.basis;
    let q = system.n_dof();
    let dims = basis.dims().to_vec();
    let points: Vec<usize> = system.grids.iter().map(|g| g.len()).collect();
    let nc = basis.len();
    for j in 0..q {
        if gs.orbitals[j].ncols() != dims[j] {
            return Err(LinResError::OrbitalCount { got: gs.orbitals[j].ncols(), expected: dims[j] });
        }
    }
    if gs.coefficients.len() != nc {
        return Err(LinResError::CoefficientCount { got: gs.coefficients.len(), expected: nc });
    }
    let mut offsets = vec![0; q];
    for j in 1..q {
        offsets[j] = offsets[j - 1] + dims[j - 1] * points[j - 1];
    }
    let o: usize = (0..q).map(|j| dims[j] * points[j]).sum();
    let ix = Index { offsets, points: points.clone() };
    let cols = orbital_columns(&gs.orbitals);
    let coef = &gs.coefficients;
    let omega = system.mean_fields(&gs.orbitals, coef);
    let hphi: Vec<Vec<Vec<C64>>> = (0..q)
        .map(|j| cols[j].iter().map(|p| matvec(&system.one_body[j], p)).collect())
        .collect();
    let coupled = !system.coupling.is_zero();
    let locals = if coupled { local_fields(system, &cols) } else { Vec::new() };
    let local = |a: usize, b: usize, j: usize| -> &[C64] { &locals[(a * nc + b) * q + j] };

    let mut a_mat = Mat::<C64>::zeros(o, o);
    let mut b_mat = Mat::<C64>::zeros(o, o);
    for j in 0..q {
        let rho = &gs.rho[j];
        let mu = hermitian_part(&gs.mu[j]);
        let h = &system.one_body[j];
        let (mj, pj) = (dims[j], points[j]);
        for n in 0..mj {
            for m in 0..mj {
                for i2 in 0..pj {
                    for i in 0..pj {
                        a_mat[(ix.at(j, n, i), ix.at(j, m, i2))] = rho[(n, m)] * h[(i, i2)];
                    }
                }
                for i in 0..pj {
                    a_mat[(ix.at(j, n, i), ix.at(j, m, i))] += omega[j][n * mj + m][i] - mu[(n, m)];
                }
            }
        }
    }
    if coupled {
        for a in 0..nc {
            let bra = config_orbitals(basis, &cols, a);
            for b in 0..nc {
                let rho = coef[a].conj() * coef[b];
                if rho == ZERO {
                    continue;
                }
                let ket = config_orbitals(basis, &cols, b);
                for j in 0..q {
                    for k in 0..q {
                        if k == j {
                            continue;
                        }
                        let pk = system.coupling.pair_kernel(j, k, &bra, &ket);
                        let (nj, mj) = (basis.digit(a, j), basis.digit(b, j));
                        let (nk, mk) = (basis.digit(a, k), basis.digit(b, k));
                        for i2 in 0..points[k] {
                            let f1 = rho * cols[k][nk][i2].conj();
                            let f2 = rho * cols[k][mk][i2];
                            for i in 0..points[j] {
                                let w = pk[(i, i2)] * cols[j][mj][i];
                                a_mat[(ix.at(j, nj, i), ix.at(k, mk, i2))] += w * f1;
                                b_mat[(ix.at(j, nj, i), ix.at(k, nk, i2))] += w * f2;
                            }
                        }
                    }
                }
            }
        }
    }

    let mut oc_u = Mat::<C64>::zeros(o, nc);
    let mut oc_v = Mat::<C64>::zeros(o, nc);
    let mut co_u_direct = Mat::<C64>::zeros(nc, o);
    let mut co_v_direct = Mat::<C64>::zeros(nc, o);
    for b in 0..nc {
        for j in 0..q {
            let mj = basis.digit(b, j);
            for n in 0..dims[j] {
                let sw = basis.replace(b, j, n);
                let (cu, cv) = (coef[sw].conj(), coef[sw]);
                for i in 0..points[j] {
                    // column b of oc_u; column b of oc_v (row slot n_j = mj)
                    oc_u[(ix.at(j, n, i), b)] += cu * hphi[j][mj][i];
                    oc_v[(ix.at(j, mj, i), b)] += cv * hphi[j][n][i];
                    co_u_direct[(b, ix.at(j, n, i))] += hphi[j][mj][i].conj() * cv;
                    co_v_direct[(b, ix.at(j, mj, i))] += hphi[j][n][i] * cv;
                }
            }
            if coupled {
                for a in 0..nc {
                    // a plays n-vector, b plays m-vector
                    let l = local(a, b, j);
                    let (nj, mjb) = (basis.digit(a, j), basis.digit(b, j));
                    let lt = local(b, a, j);
                    let nb = basis.digit(b, j);
                    let ma = basis.digit(a, j);
                    for i in 0..points[j] {
                        oc_u[(ix.at(j, nj, i), b)] += coef[a].conj() * l[i] * cols[j][mjb][i];
                        // oc_v column b: sum_a C_a local(j, b, a) phi^j_{a_j}
                        oc_v[(ix.at(j, nb, i), b)] += coef[a] * lt[i] * cols[j][ma][i];
                        co_u_direct[(b, ix.at(j, ma, i))] += coef[a] * cols[j][nb][i].conj() * lt[i];
                        co_v_direct[(b, ix.at(j, nb, i))] += coef[a] * lt[i] * cols[j][ma][i];
                    }
                }
            }
        }
    }

    let hmat = system.hamiltonian_matrix(&gs.orbitals);
    let eps = linalg::dot(coef, &matvec(&hmat, coef)).re;
    let cc = &hmat - &linalg::scale(&identity(nc), c(eps));
    Ok(Blocks {
        co_u: linalg::adjoint(&oc_u),
        co_v: linalg::transpose(&oc_v),
        a: a_mat,
        b: b_mat,
        oc_u,
        oc_v,
        co_u_direct,
        co_v_direct,
        cc,
    })
}

fn per_dof_kron(dims: &[usize], points: &[usize], f: impl Fn(usize) -> Mat<C64>, orbital_side: bool) -> Mat<C64> {
    // orbital_side: block (n, m) of dof j is small_j[(n, m)] * 1; otherwise small_j acts on the grid index
    let blocks: Vec<Mat<C64>> = (0..dims.len())
        .map(|j| {
            let s = f(j);
            let (mj, pj) = (dims[j], points[j]);
            let mut out = Mat::<C64>::zeros(mj * pj, mj * pj);
            for n in 0..mj {
                if orbital_side {
                    for m in 0..mj {
                        for i in 0..pj {
                            out[(n * pj + i, m * pj + i)] = s[(n, m)];
                        }
                    }
                } else {
                    for i2 in 0..pj {
                        for i in 0..pj {
                            out[(n * pj + i, n * pj + i2)] = s[(i, i2)];
                        }
                    }
                }
            }
            out
        })
        .collect();
    let refs: Vec<&Mat<C64>> = blocks.iter().collect();
    block_diag(&refs)
}

pub fn assemble(system: &DistinguishableSystem, gs: &DistinguishableGroundState) -> Result<DistinguishableResponse, LinResError> {
    let blocks = build_blocks(system, gs)?;
    let dims = system.basis.dims().to_vec();
    let points: Vec<usize> = system.grids.iter().map(|g| g.len()).collect();
    let q = dims.len();
    let nc = system.basis.len();
    let o: usize = (0..q).map(|j| dims[j] * points[j]).sum();
    let mut offsets = vec![0; q];
    for j in 1..q {
        offsets[j] = offsets[j - 1] + dims[j - 1] * points[j - 1];
    }
    let layout = Layout { orbital: o, coefficient: nc };
    let d = layout.dim();
    let (cu0, cv0) = (2 * o, 2 * o + nc);
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

    let p_orb = per_dof_kron(&dims, &points, |j| orbital_projector(&gs.orbitals[j]), false);
    let cvec = &gs.coefficients;
    let p_c = Mat::from_fn(nc, nc, |i, j| if i == j { c(1.0) } else { ZERO } - cvec[i] * cvec[j].conj());
    let projector = block_diag(&[&p_orb, &linalg::conj(&p_orb), &p_c, &linalg::conj(&p_c)]);
    let rs = per_dof_kron(&dims, &points, |j| regularized_power(&gs.rho[j], 0.5), true);
    let ris = per_dof_kron(&dims, &points, |j| regularized_power(&gs.rho[j], -0.5), true);
    let one = identity(nc);
    let metric_sqrt = block_diag(&[&rs, &linalg::conj(&rs), &one, &one]);
    let metric_inv_sqrt = block_diag(&[&ris, &linalg::conj(&ris), &one, &one]);
    let raw = &projector * &op;
    let inner = &(&metric_inv_sqrt * &op) * &metric_inv_sqrt;
    let matrix = &(&projector * &inner) * &projector;
    Ok(DistinguishableResponse {
        layout,
        dims,
        points,
        offsets,
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

impl DistinguishableResponse {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn at(&self, j: usize, n: usize, i: usize) -> usize {
        self.offsets[j] + n * self.points[j] + i
    }

    /// Kernel of the projector: `2 (sum_j M_j^2 + 1)` vectors.
    pub fn gauge_modes(&self, gs: &DistinguishableGroundState) -> Vec<Vec<C64>> {
        let d = self.dim();
        let o = self.layout.orbital;
        let mut out = Vec::new();
        for j in 0..self.dims.len() {
            for p in 0..self.dims[j] {
                for q in 0..self.dims[j] {
                    let mut z = vec![ZERO; d];
                    let mut zc = vec![ZERO; d];
                    for i in 0..self.points[j] {
                        z[self.at(j, p, i)] = gs.orbitals[j][(i, q)];
                        zc[o + self.at(j, p, i)] = gs.orbitals[j][(i, q)].conj();
                    }
                    out.push(z);
                    out.push(zc);
                }
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
        2 * (self.dims.iter().map(|m| m * m).sum::<usize>() + 1)
    }

    pub fn gauge_residual(&self, gs: &DistinguishableGroundState) -> f64 {
        self.gauge_modes(gs).iter().map(|z| linalg::norm(&matvec(&self.matrix, z))).fold(0.0, f64::max)
    }

    pub fn coupling_consistency(&self) -> (f64, f64) {
        (
            linalg::max_abs_diff(&self.blocks.co_u_direct, &self.blocks.co_u),
            linalg::max_abs_diff(&self.blocks.co_v_direct, &self.blocks.co_v),
        )
    }

    pub fn symmetry_residuals(&self) -> (f64, f64) {
        (self.layout.sigma1_residual(&self.matrix), self.layout.sigma3_residual(&self.matrix))
    }

    /// Driving vector for single-dof one-body fields and an optional all-body field.
    pub fn perturbation_vector(&self, system: &DistinguishableSystem, gs: &DistinguishableGroundState, pert: &DistPerturbation) -> Result<Vec<C64>, LinResError> {
        let d = self.dim();
        let o = self.layout.orbital;
        let nc = self.layout.coefficient;
        let mut one = vec![ZERO; d];
        let mut two = vec![ZERO; d];
        for p in &pert.one_body {
            let j = p.dof;
            let nj = self.points[j];
            if p.op.nrows() != nj || p.op.ncols() != nj {
                return Err(LinResError::PerturbationShape { got: p.op.nrows(), n: nj });
            }
            let f = linalg::adjoint(&p.op);
            let phi = &gs.orbitals[j];
            let a = &p.op * phi;
            let b = &f * phi;
            for n in 0..self.dims[j] {
                for i in 0..nj {
                    one[self.at(j, n, i)] -= a[(i, n)];
                    one[o + self.at(j, n, i)] += b[(i, n)].conj();
                }
            }
            let fd_orb = crate::hamiltonian::one_body_matrix(phi, &p.op);
            let f_orb = crate::hamiltonian::one_body_matrix(phi, &f);
            for n in 0..self.dims[j] {
                for m in 0..self.dims[j] {
                    let t = system.basis.tensor_density_action(&gs.coefficients, j, n, m);
                    for mm in 0..nc {
                        two[2 * o + mm] -= fd_orb[(n, m)] * t[mm];
                        two[2 * o + nc + mm] += (f_orb[(n, m)] * t[mm]).conj();
                    }
                }
            }
        }
        if let Some(g) = &pert.all_body {
            let gsys = DistinguishableSystem { coupling: g.clone(), ..system.clone() };
            let omega_g = gsys.mean_fields(&gs.orbitals, &gs.coefficients);
            for j in 0..self.dims.len() {
                let mj = self.dims[j];
                for n in 0..mj {
                    for i in 0..self.points[j] {
                        let mut acc = ZERO;
                        for m in 0..mj {
                            acc += omega_g[j][n * mj + m][i] * gs.orbitals[j][(i, m)];
                        }
                        two[self.at(j, n, i)] -= acc;
                        two[o + self.at(j, n, i)] += acc.conj();
                    }
                }
            }
            let cols = orbital_columns(&gs.orbitals);
            let basis = &system.basis;
            for a in 0..nc {
                let bra = config_orbitals(basis, &cols, a);
                let mut acc = ZERO;
                for b in 0..nc {
                    let ket = config_orbitals(basis, &cols, b);
                    acc += g.element(&bra, &ket) * gs.coefficients[b];
                }
                two[2 * o + a] -= acc;
                two[2 * o + nc + a] += acc.conj();
            }
        }
        let a = matvec(&self.metric_sqrt, &one);
        let b = matvec(&self.metric_inv_sqrt, &two);
        let sum: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        Ok(matvec(&self.projector, &sum))
    }

    pub fn components(&self, y: &[C64]) -> Result<DistinguishableComponents, LinResError> {
        if y.len() != self.dim() {
            return Err(LinResError::VectorLength { got: y.len(), expected: self.dim() });
        }
        let x = matvec(&self.metric_inv_sqrt, y);
        let o = self.layout.orbital;
        let q = self.dims.len();
        let u = (0..q).map(|j| Mat::from_fn(self.points[j], self.dims[j], |i, n| x[self.at(j, n, i)])).collect();
        let v = (0..q).map(|j| Mat::from_fn(self.points[j], self.dims[j], |i, n| x[o + self.at(j, n, i)])).collect();
        Ok(DistinguishableComponents { u, v, cu: x[self.layout.cu_range()].to_vec(), cv: x[self.layout.cv_range()].to_vec() })
    }

    pub fn linearization_check(&self, system: &DistinguishableSystem, gs: &DistinguishableGroundState, etas: &[f64], seed: u64) -> LinearizationReport {
        let q = self.dims.len();
        let o = self.layout.orbital;
        let nc = self.layout.coefficient;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut rnd = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let projs: Vec<Mat<C64>> = gs.orbitals.iter().map(orbital_projector).collect();
        let mut dphi: Vec<Mat<C64>> = (0..q)
            .map(|j| &projs[j] * &Mat::from_fn(self.points[j], self.dims[j], |_, _| rnd()))
            .collect();
        let c0 = &gs.coefficients;
        let mut dc: Vec<C64> = (0..nc).map(|_| rnd()).collect();
        let ov = linalg::dot(c0, &dc);
        dc.iter_mut().zip(c0).for_each(|(a, b)| *a -= ov * b);
        let total = linalg::norm(&dc) + dphi.iter().map(|m| m.norm_l2()).sum::<f64>();
        dc.iter_mut().for_each(|a| *a /= total);
        for m in dphi.iter_mut() {
            *m = linalg::scale(m, c(1.0 / total));
        }
        let mut x = vec![ZERO; self.dim()];
        for j in 0..q {
            for n in 0..self.dims[j] {
                for i in 0..self.points[j] {
                    x[self.at(j, n, i)] = dphi[j][(i, n)];
                    x[o + self.at(j, n, i)] = dphi[j][(i, n)].conj();
                }
            }
        }
        for mm in 0..nc {
            x[2 * o + mm] = dc[mm];
            x[2 * o + nc + mm] = dc[mm].conj();
        }
        let y = matvec(&self.raw, &x);
        let (g0, gc0) = nonlinear_rhs_distinguishable(system, &gs.orbitals, c0);
        let mut errors = Vec::with_capacity(etas.len());
        for &eta in etas {
            let phi: Vec<Mat<C64>> = (0..q).map(|j| &gs.orbitals[j] + &linalg::scale(&dphi[j], c(eta))).collect();
            let cc: Vec<C64> = c0.iter().zip(&dc).map(|(a, b)| a + b * eta).collect();
            let (g1, gc1) = nonlinear_rhs_distinguishable(system, &phi, &cc);
            let mut err = 0.0;
            for j in 0..q {
                let dg = &projs[j] * &linalg::scale(&(&g1[j] - &g0[j]), c(1.0 / eta));
                for n in 0..self.dims[j] {
                    for i in 0..self.points[j] {
                        err += (dg[(i, n)] - y[self.at(j, n, i)]).norm_sqr();
                    }
                }
            }
            let dgc: Vec<C64> = gc1.iter().zip(&gc0).map(|(a, b)| (a - b) / eta).collect();
            let ovc = linalg::dot(c0, &dgc);
            for mm in 0..nc {
                err += (dgc[mm] - c0[mm] * ovc - y[2 * o + mm]).norm_sqr();
            }
            errors.push(err.sqrt());
        }
        let slope = log_slope(etas, &errors);
        LinearizationReport { etas: etas.to_vec(), errors, slope }
    }
}
