//! Configuration spaces and the action of one- and two-body density operators
//! on coefficient vectors.
//!
//! Identical particles use occupation vectors ordered lexicographically
//! descending, so the first configuration is `(N, 0, ..., 0)`. Distinguishable
//! particles use row-major tensor order over the per-degree-of-freedom
//! orbital indices. All orbital indices in this API are 0-based.

use crate::linalg::{C64, ZERO};
use faer::Mat;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Boson,
    Fermion,
}

impl Statistics {
    /// +1 for bosons, -1 for fermions.
    pub fn exchange_sign(self) -> f64 {
        match self {
            Statistics::Boson => 1.0,
            Statistics::Fermion => -1.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FockError {
    #[error("need at least one particle and one orbital (N={0}, M={1})")]
    Empty(usize, usize),
    #[error("{n} fermions do not fit into {m} orbitals")]
    PauliOverflow { n: usize, m: usize },
    #[error("configuration space of {0} states exceeds the limit {1}")]
    TooLarge(usize, usize),
}

/// Sparse matrix of a density operator: `(row, column, value)` triples.
pub type SparseOp = Vec<(usize, usize, f64)>;

/// Binomial coefficient as f64, exact for the sizes used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0f64;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

/// Number of configurations for `n` identical particles in `m` orbitals.
pub fn space_size(n: usize, m: usize, statistics: Statistics) -> f64 {
    match statistics {
        Statistics::Boson => binomial(n + m - 1, n),
        Statistics::Fermion => binomial(m, n),
    }
}

const MAX_CONFIGS: usize = 2_000_000;

#[derive(Debug, Clone)]
pub struct FockSpace {
    n_particles: usize,
    n_orbitals: usize,
    statistics: Statistics,
    occupations: Vec<u16>,
    index: HashMap<Vec<u16>, usize>,
    one_body: Vec<SparseOp>,
    two_body: Vec<SparseOp>,
}

impl FockSpace {
    pub fn new(n_particles: usize, n_orbitals: usize, statistics: Statistics) -> Result<FockSpace, FockError> {
        if n_particles == 0 || n_orbitals == 0 {
            return Err(FockError::Empty(n_particles, n_orbitals));
        }
        if statistics == Statistics::Fermion && n_particles > n_orbitals {
            return Err(FockError::PauliOverflow { n: n_particles, m: n_orbitals });
        }
        let size = space_size(n_particles, n_orbitals, statistics);
        if size > MAX_CONFIGS as f64 {
            return Err(FockError::TooLarge(size as usize, MAX_CONFIGS));
        }
        let cap = match statistics {
            Statistics::Boson => n_particles,
            Statistics::Fermion => 1,
        };
        let mut occupations = Vec::with_capacity(size as usize * n_orbitals);
        let mut current = vec![0u16; n_orbitals];
        enumerate(&mut current, 0, n_particles, cap, &mut occupations);
        let count = occupations.len() / n_orbitals;
        let mut index = HashMap::with_capacity(count);
        for i in 0..count {
            index.insert(occupations[i * n_orbitals..(i + 1) * n_orbitals].to_vec(), i);
        }
        let mut space = FockSpace {
            n_particles,
            n_orbitals,
            statistics,
            occupations,
            index,
            one_body: Vec::new(),
            two_body: Vec::new(),
        };
        space.build_tables();
        Ok(space)
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn len(&self) -> usize {
        self.occupations.len() / self.n_orbitals
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn config(&self, i: usize) -> &[u16] {
        &self.occupations[i * self.n_orbitals..(i + 1) * self.n_orbitals]
    }

    pub fn rank(&self, occupation: &[u16]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn unrank(&self, i: usize) -> Option<Vec<u16>> {
        (i < self.len()).then(|| self.config(i).to_vec())
    }

    fn annihilate(&self, occ: &mut [u16], p: usize) -> Option<f64> {
        if occ[p] == 0 {
            return None;
        }
        let f = match self.statistics {
            Statistics::Boson => (occ[p] as f64).sqrt(),
            Statistics::Fermion => parity(&occ[..p]),
        };
        occ[p] -= 1;
        Some(f)
    }

    fn create(&self, occ: &mut [u16], p: usize) -> Option<f64> {
        match self.statistics {
            Statistics::Boson => {
                occ[p] += 1;
                Some((occ[p] as f64).sqrt())
            }
            Statistics::Fermion => {
                if occ[p] == 1 {
                    return None;
                }
                let s = parity(&occ[..p]);
                occ[p] = 1;
                Some(s)
            }
        }
    }

    /// Applies creators and annihilators right to left: `ops` lists
    /// `(orbital, is_creator)` in written order.
    fn string_on(&self, from: usize, ops: &[(usize, bool)], scratch: &mut Vec<u16>) -> Option<(usize, f64)> {
        scratch.clear();
        scratch.extend_from_slice(self.config(from));
        let mut factor = 1.0;
        for &(p, creator) in ops.iter().rev() {
            let f = if creator { self.create(scratch, p) } else { self.annihilate(scratch, p) }?;
            factor *= f;
        }
        let to = self.rank(scratch)?;
        Some((to, factor))
    }

    fn build_tables(&mut self) {
        let m = self.n_orbitals;
        let n_conf = self.len();
        let mut scratch = Vec::with_capacity(m);
        let mut one = vec![SparseOp::new(); m * m];
        for k in 0..m {
            for q in 0..m {
                let ops = [(k, true), (q, false)];
                for from in 0..n_conf {
                    if let Some((to, f)) = self.string_on(from, &ops, &mut scratch) {
                        one[k * m + q].push((to, from, f));
                    }
                }
            }
        }
        let mut two = vec![SparseOp::new(); m * m * m * m];
        if self.n_particles >= 2 {
            for k in 0..m {
                for s in 0..m {
                    for l in 0..m {
                        for q in 0..m {
                            let ops = [(k, true), (s, true), (l, false), (q, false)];
                            let slot = &mut two[((k * m + s) * m + l) * m + q];
                            for from in 0..n_conf {
                                if let Some((to, f)) = self.string_on(from, &ops, &mut scratch) {
                                    slot.push((to, from, f));
                                }
                            }
                        }
                    }
                }
            }
        }
        self.one_body = one;
        self.two_body = two;
    }

    /// Sparse matrix of `c+_k c_q`.
    pub fn one_body_op(&self, k: usize, q: usize) -> &SparseOp {
        &self.one_body[k * self.n_orbitals + q]
    }

    /// Sparse matrix of `c+_k c+_s c_l c_q`.
    pub fn two_body_op(&self, k: usize, s: usize, l: usize, q: usize) -> &SparseOp {
        let m = self.n_orbitals;
        &self.two_body[((k * m + s) * m + l) * m + q]
    }

    /// `C^{rho_kq}`: the coefficient vector of `c+_k c_q |Psi>`.
    pub fn apply_one_body(&self, c: &[C64], k: usize, q: usize) -> Vec<C64> {
        apply_sparse(self.one_body_op(k, q), c, self.len())
    }

    /// `C^{rho_kslq}`: the coefficient vector of `c+_k c+_s c_l c_q |Psi>`.
    pub fn apply_two_body(&self, c: &[C64], k: usize, s: usize, l: usize, q: usize) -> Vec<C64> {
        apply_sparse(self.two_body_op(k, s, l, q), c, self.len())
    }

    /// One- and two-body reduced density matrices `<c+_k c_q>` and `<c+_k c+_s c_l c_q>`.
    pub fn reduced_densities(&self, c: &[C64]) -> (Mat<C64>, TwoBodyDensity) {
        let m = self.n_orbitals;
        let rho1 = Mat::from_fn(m, m, |k, q| expectation(self.one_body_op(k, q), c));
        let mut rho2 = TwoBodyDensity::zeros(m);
        for (slot, op) in self.two_body.iter().enumerate() {
            rho2.data[slot] = expectation(op, c);
        }
        (rho1, rho2)
    }

    /// Dense `sum h_kq rho_kq + 1/2 sum W_ksql rho_kslq`.
    pub fn hamiltonian_matrix(&self, h: &Mat<C64>, w: &crate::hamiltonian::TwoBodyTensor) -> Mat<C64> {
        let m = self.n_orbitals;
        let n_conf = self.len();
        let mut out = Mat::<C64>::zeros(n_conf, n_conf);
        for k in 0..m {
            for q in 0..m {
                let hk = h[(k, q)];
                for &(to, from, f) in self.one_body_op(k, q) {
                    out[(to, from)] += hk * f;
                }
            }
        }
        if self.n_particles >= 2 {
            for k in 0..m {
                for s in 0..m {
                    for l in 0..m {
                        for q in 0..m {
                            let wk = w.get(k, s, q, l) * 0.5;
                            if wk == ZERO {
                                continue;
                            }
                            for &(to, from, f) in self.two_body_op(k, s, l, q) {
                                out[(to, from)] += wk * f;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// `C^H` for the second-quantised Hamiltonian with matrix elements `h`, `w`.
    pub fn apply_second_quantized(&self, c: &[C64], h: &Mat<C64>, w: &crate::hamiltonian::TwoBodyTensor) -> Vec<C64> {
        crate::linalg::matvec(&self.hamiltonian_matrix(h, w), c)
    }
}

fn parity(occ: &[u16]) -> f64 {
    let s: u32 = occ.iter().map(|&x| x as u32).sum();
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn enumerate(current: &mut Vec<u16>, pos: usize, remaining: usize, cap: usize, out: &mut Vec<u16>) {
    let m = current.len();
    if pos == m - 1 {
        if remaining <= cap {
            current[pos] = remaining as u16;
            out.extend_from_slice(current);
        }
        return;
    }
    let top = remaining.min(cap);
    for v in (0..=top).rev() {
        current[pos] = v as u16;
        enumerate(current, pos + 1, remaining - v, cap, out);
    }
    current[pos] = 0;
}

pub fn apply_sparse(op: &SparseOp, c: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n];
    for &(to, from, f) in op {
        out[to] += c[from] * f;
    }
    out
}

fn expectation(op: &SparseOp, c: &[C64]) -> C64 {
    op.iter().map(|&(to, from, f)| c[to].conj() * c[from] * f).sum()
}

/// `rho_kslq = <c+_k c+_s c_l c_q>`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodyDensity {
    m: usize,
    data: Vec<C64>,
}

impl TwoBodyDensity {
    pub fn zeros(m: usize) -> TwoBodyDensity {
        TwoBodyDensity { m, data: vec![ZERO; m * m * m * m] }
    }

    pub fn n_orbitals(&self) -> usize {
        self.m
    }

    pub fn get(&self, k: usize, s: usize, l: usize, q: usize) -> C64 {
        let m = self.m;
        self.data[((k * m + s) * m + l) * m + q]
    }
}

/// Product configuration space for distinguishable degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductBasis {
    dims: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl ProductBasis {
    pub fn new(dims: &[usize]) -> Result<ProductBasis, FockError> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(FockError::Empty(dims.len(), dims.iter().copied().min().unwrap_or(0)));
        }
        let mut strides = vec![1usize; dims.len()];
        for j in (0..dims.len() - 1).rev() {
            strides[j] = strides[j + 1] * dims[j + 1];
        }
        let len = dims.iter().product::<usize>();
        if len > MAX_CONFIGS {
            return Err(FockError::TooLarge(len, MAX_CONFIGS));
        }
        Ok(ProductBasis { dims: dims.to_vec(), strides, len })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_dof(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn stride(&self, j: usize) -> usize {
        self.strides[j]
    }

    /// Orbital index of degree of freedom `j` in configuration `i`.
    pub fn digit(&self, i: usize, j: usize) -> usize {
        (i / self.strides[j]) % self.dims[j]
    }

    pub fn config(&self, i: usize) -> Vec<usize> {
        (0..self.dims.len()).map(|j| self.digit(i, j)).collect()
    }

    pub fn rank(&self, config: &[usize]) -> Option<usize> {
        if config.len() != self.dims.len() || config.iter().zip(&self.dims).any(|(c, d)| c >= d) {
            return None;
        }
        Some(config.iter().zip(&self.strides).map(|(c, s)| c * s).sum())
    }

    /// Configuration `i` with the orbital of degree of freedom `j` replaced by `n`.
    pub fn replace(&self, i: usize, j: usize, n: usize) -> usize {
        i - self.digit(i, j) * self.strides[j] + n * self.strides[j]
    }

    /// `E^j_{nm}` on slot `j`: moves amplitude from orbital `m` to `n`.
    pub fn tensor_density_action(&self, c: &[C64], j: usize, n: usize, m: usize) -> Vec<C64> {
        let mut out = vec![ZERO; self.len];
        for i in 0..self.len {
            if self.digit(i, j) == m {
                out[self.replace(i, j, n)] += c[i];
            }
        }
        out
    }

    /// `rho^j_{nm} = sum_{other slots} conj(C_{..n..}) C_{..m..}`.
    pub fn reduced_density(&self, c: &[C64], j: usize) -> Mat<C64> {
        let d = self.dims[j];
        let mut rho = Mat::<C64>::zeros(d, d);
        for i in 0..self.len {
            if self.digit(i, j) != 0 {
                continue;
            }
            for n in 0..d {
                let a = c[self.replace(i, j, n)].conj();
                for m in 0..d {
                    rho[(n, m)] += a * c[self.replace(i, j, m)];
                }
            }
        }
        rho
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use proptest::prelude::*;

    #[test]
    fn sizes_and_ordering() {
        let b = FockSpace::new(2, 2, Statistics::Boson).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.config(0), &[2, 0]);
        assert_eq!(b.config(1), &[1, 1]);
        assert_eq!(b.config(2), &[0, 2]);
        let f = FockSpace::new(2, 3, Statistics::Fermion).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.config(0), &[1, 1, 0]);
        assert_eq!(f.config(2), &[0, 1, 1]);
        assert_eq!(FockSpace::new(3, 4, Statistics::Boson).unwrap().len(), 20);
        assert_eq!(space_size(10, 4, Statistics::Boson), 286.0);
        assert_eq!(space_size(2, 5, Statistics::Fermion), 10.0);
        assert!(matches!(FockSpace::new(3, 2, Statistics::Fermion), Err(FockError::PauliOverflow { .. })));
    }

    #[test]
    fn boson_hop_factor() {
        let b = FockSpace::new(2, 2, Statistics::Boson).unwrap();
        let out = b.apply_one_body(&[c(1.0), c(0.0), c(0.0)], 1, 0);
        assert!((out[1] - c(2f64.sqrt())).norm() < 1e-15);
        assert_eq!(out[0], ZERO);
    }

    #[test]
    fn fermion_sign() {
        let f = FockSpace::new(2, 3, Statistics::Fermion).unwrap();
        let out = f.apply_one_body(&[c(1.0), c(0.0), c(0.0)], 2, 0);
        assert_eq!(out[2], c(-1.0));
        // c+_k c_k over (1,1,0) gives back each occupied orbital
        let o = f.apply_one_body(&[c(1.0), c(0.0), c(0.0)], 1, 1);
        assert_eq!(o[0], c(1.0));
    }

    #[test]
    fn product_basis_example() {
        let p = ProductBasis::new(&[2, 2]).unwrap();
        let i = p.rank(&[0, 0]).unwrap();
        let mut v = vec![ZERO; 4];
        v[i] = c(1.0);
        let out = p.tensor_density_action(&v, 0, 1, 0);
        assert_eq!(out[p.rank(&[1, 0]).unwrap()], c(1.0));
        assert_eq!(p.config(3), vec![1, 1]);
    }

    fn random_state(n: usize, seed: u64) -> Vec<C64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let nv = crate::linalg::norm(&v);
        v.iter().map(|x| x / nv).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn rank_unrank_bijection(n in 1usize..5, m in 1usize..5, fermion in any::<bool>()) {
            let st = if fermion { Statistics::Fermion } else { Statistics::Boson };
            prop_assume!(!(fermion && n > m));
            let s = FockSpace::new(n, m, st).unwrap();
            prop_assert_eq!(s.len() as f64, space_size(n, m, st));
            for i in 0..s.len() {
                let occ = s.unrank(i).unwrap();
                prop_assert_eq!(occ.iter().map(|&x| x as usize).sum::<usize>(), n);
                prop_assert_eq!(s.rank(&occ), Some(i));
                if i > 0 { prop_assert!(s.config(i - 1) > s.config(i)); }
            }
        }

        #[test]
        fn densities_trace_and_hermiticity(n in 1usize..4, m in 1usize..4, fermion in any::<bool>(), seed in 0u64..1000) {
            let st = if fermion { Statistics::Fermion } else { Statistics::Boson };
            prop_assume!(!(fermion && n > m));
            let s = FockSpace::new(n, m, st).unwrap();
            let cvec = random_state(s.len(), seed);
            let (rho1, rho2) = s.reduced_densities(&cvec);
            let tr: C64 = (0..m).map(|k| rho1[(k, k)]).sum();
            prop_assert!((tr - c(n as f64)).norm() < 1e-12);
            let mut tr2 = ZERO;
            for k in 0..m { for q in 0..m {
                prop_assert!((rho1[(k, q)] - rho1[(q, k)].conj()).norm() < 1e-13);
                tr2 += rho2.get(k, q, q, k);
                for sx in 0..m { for l in 0..m {
                    let sgn = st.exchange_sign();
                    prop_assert!((rho2.get(k, sx, l, q) - rho2.get(q, l, sx, k).conj()).norm() < 1e-13);
                    prop_assert!((rho2.get(k, sx, l, q) - rho2.get(sx, k, l, q) * sgn).norm() < 1e-13);
                }}
            }}
            prop_assert!((tr2 - c((n * (n - 1)) as f64)).norm() < 1e-11);
        }

        #[test]
        fn product_density_trace(d0 in 1usize..4, d1 in 1usize..4, d2 in 1usize..3, seed in 0u64..1000) {
            let p = ProductBasis::new(&[d0, d1, d2]).unwrap();
            let cvec = random_state(p.len(), seed);
            for j in 0..3 {
                let rho = p.reduced_density(&cvec, j);
                let tr: C64 = (0..p.dims()[j]).map(|k| rho[(k, k)]).sum();
                prop_assert!((tr - c(1.0)).norm() < 1e-12);
                for a in 0..p.dims()[j] { for b in 0..p.dims()[j] {
                    let direct = crate::linalg::dot(&cvec, &p.tensor_density_action(&cvec, j, a, b));
                    prop_assert!((direct - rho[(a, b)]).norm() < 1e-13);
                }}
            }
        }
    }
}
