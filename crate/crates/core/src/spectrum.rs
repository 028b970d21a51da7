//! Eigen-decomposition of response matrices with the `(u, v)` pairing
//! structure, left vectors from the `Sigma_3` metric, response weights and
//! resolution checks.

use crate::linalg::{self, adjoint, c, eigh, identity, max_abs, C64, ZERO};
use faer::Mat;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpectrumError {
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("matrix is {got}x{got}, layout expects {expected}")]
    Shape { got: usize, expected: usize },
    #[error("cannot pair {positive} positive with {negative} negative frequencies")]
    Pairing { positive: usize, negative: usize },
    #[error("mode near {omega} has vanishing Sigma_3 norm {norm:e}")]
    NullNorm { omega: C64, norm: f64 },
    #[error("frequency {omega} is resonant with mode {mode} at {mode_omega}")]
    Resonance { omega: C64, mode: usize, mode_omega: C64 },
    #[error("found {found} zero modes, expected {expected}")]
    ZeroModeMismatch { found: usize, expected: usize },
}

/// Block layout `(u, v, C_u, C_v)`; `orbital` is the length of `u`, `coefficient` that of `C_u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub orbital: usize,
    pub coefficient: usize,
}

impl Layout {
    pub fn dim(&self) -> usize {
        2 * (self.orbital + self.coefficient)
    }

    pub fn u_range(&self) -> std::ops::Range<usize> {
        0..self.orbital
    }

    pub fn v_range(&self) -> std::ops::Range<usize> {
        self.orbital..2 * self.orbital
    }

    pub fn cu_range(&self) -> std::ops::Range<usize> {
        2 * self.orbital..2 * self.orbital + self.coefficient
    }

    pub fn cv_range(&self) -> std::ops::Range<usize> {
        2 * self.orbital + self.coefficient..self.dim()
    }

    /// Index of the partner slot under `Sigma_1`.
    pub fn swap(&self, i: usize) -> usize {
        let (o, c) = (self.orbital, self.coefficient);
        if i < o {
            i + o
        } else if i < 2 * o {
            i - o
        } else if i < 2 * o + c {
            i + c
        } else {
            i - c
        }
    }

    pub fn sign(&self, i: usize) -> f64 {
        if i < self.orbital || (2 * self.orbital..2 * self.orbital + self.coefficient).contains(&i) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn sigma1(&self, x: &[C64]) -> Vec<C64> {
        (0..self.dim()).map(|i| x[self.swap(i)]).collect()
    }

    pub fn sigma3(&self, x: &[C64]) -> Vec<C64> {
        (0..self.dim()).map(|i| x[i] * self.sign(i)).collect()
    }

    /// `x^dagger Sigma_3 y`.
    pub fn metric(&self, x: &[C64], y: &[C64]) -> C64 {
        (0..self.dim()).map(|i| x[i].conj() * y[i] * self.sign(i)).sum()
    }

    /// `max |Sigma_1 L Sigma_1 + conj(L)|`.
    pub fn sigma1_residual(&self, l: &Mat<C64>) -> f64 {
        let d = self.dim();
        let mut r = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                r = r.max((l[(self.swap(i), self.swap(j))] + l[(i, j)].conj()).norm());
            }
        }
        r
    }

    /// `max |Sigma_3 L Sigma_3 - L^dagger|`.
    pub fn sigma3_residual(&self, l: &Mat<C64>) -> f64 {
        let d = self.dim();
        let mut r = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                r = r.max((l[(i, j)] * (self.sign(i) * self.sign(j)) - l[(j, i)].conj()).norm());
            }
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Absolute zero-mode threshold; defaults to `1e-6 * max|omega|`.
    pub tol_zero: Option<f64>,
    pub tol_im_rel: f64,
    pub degeneracy_rel: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { tol_zero: None, tol_im_rel: 1e-7, degeneracy_rel: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Zero,
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftMethod {
    /// `L = sng Sigma_3 R`.
    Metric,
    /// Rows of the inverse of the right-vector matrix.
    ExplicitInverse,
}

#[derive(Debug, Clone)]
pub struct Mode {
    pub omega: C64,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
    pub sng: f64,
    pub kind: ModeKind,
    /// Index of the `Sigma_1` partner for non-zero modes.
    pub partner: Option<usize>,
    /// Imaginary part beyond tolerance.
    pub complex: bool,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub layout: Layout,
    /// All modes sorted by real part.
    pub modes: Vec<Mode>,
    pub tol_zero: f64,
    pub tol_im: f64,
    pub left_method: LeftMethod,
    /// `max |omega_p + conj(omega_n)|` over matched solver eigenvalues.
    pub pairing_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseWeight {
    /// Index into `Spectrum::modes` of the positive mode.
    pub mode: usize,
    pub omega: C64,
    pub gamma_plus: C64,
    pub gamma_minus: C64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionDefects {
    /// `max |sum_k R^k L^k^dagger - 1|`.
    pub identity: f64,
    /// `max |sum_k omega_k R^k L^k^dagger - L| / max |L|`.
    pub spectral: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroModeReport {
    pub found: usize,
    pub expected: usize,
}

/// Minimum-cost perfect matching on a square cost matrix, returning `assign[row] = col`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Rotates a cluster of right vectors so that `R^dagger Sigma_3 R` is diagonal with entries +-1.
fn metric_normalize(layout: &Layout, cluster: &[Vec<C64>], omega: C64) -> Result<Vec<(Vec<C64>, f64)>, SpectrumError> {
    let k = cluster.len();
    let g = Mat::from_fn(k, k, |a, b| layout.metric(&cluster[a], &cluster[b]));
    let (d, u) = eigh(&g);
    let mut out = Vec::with_capacity(k);
    for (col, &dv) in d.iter().enumerate() {
        if dv.abs() < 1e-12 {
            return Err(SpectrumError::NullNorm { omega, norm: dv.abs() });
        }
        let s = 1.0 / dv.abs().sqrt();
        let mut v = vec![ZERO; layout.dim()];
        for (a, r) in cluster.iter().enumerate() {
            let coef = u[(a, col)] * s;
            v.iter_mut().zip(r).for_each(|(x, y)| *x += coef * y);
        }
        out.push((v, dv.signum()));
    }
    Ok(out)
}

fn clusters(indices: &[usize], w: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let mut sorted = indices.to_vec();
    sorted.sort_by(|&a, &b| w[a].re.partial_cmp(&w[b].re).unwrap().then(w[a].im.partial_cmp(&w[b].im).unwrap()));
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in sorted {
        match out.last_mut() {
            Some(last) if (w[*last.last().unwrap()] - w[i]).norm() < tol => last.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Full eigen-decomposition of a response matrix with the pairing structure of `layout`.
pub fn diagonalize(l: &Mat<C64>, layout: Layout, opts: &SpectrumOptions) -> Result<Spectrum, SpectrumError> {
    let d = layout.dim();
    if l.nrows() != d || l.ncols() != d {
        return Err(SpectrumError::Shape { got: l.nrows(), expected: d });
    }
    let evd = l.eigen().map_err(|e| SpectrumError::Eigensolver(format!("{e:?}")))?;
    let w: Vec<C64> = (0..d).map(|i| evd.S()[i]).collect();
    let vecs = evd.U();
    let col = |i: usize| -> Vec<C64> { (0..d).map(|r| vecs[(r, i)]).collect() };
    let max_abs_w = w.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let max_re = w.iter().map(|x| x.re.abs()).fold(0.0, f64::max);
    let tol_zero = opts.tol_zero.unwrap_or(1e-6 * max_abs_w);
    let tol_im = opts.tol_im_rel * max_re;
    let tol_deg = opts.degeneracy_rel * max_abs_w.max(1.0);

    let zero: Vec<usize> = (0..d).filter(|&i| w[i].norm() < tol_zero).collect();
    let pos: Vec<usize> = (0..d).filter(|&i| w[i].norm() >= tol_zero && w[i].re >= 0.0).collect();
    let neg: Vec<usize> = (0..d).filter(|&i| w[i].norm() >= tol_zero && w[i].re < 0.0).collect();
    if pos.len() != neg.len() {
        return Err(SpectrumError::Pairing { positive: pos.len(), negative: neg.len() });
    }
    let cost: Vec<Vec<f64>> = pos.iter().map(|&p| neg.iter().map(|&n| (w[p] + w[n].conj()).norm()).collect()).collect();
    let assign = hungarian(&cost);
    let pairing_residual = assign.iter().enumerate().map(|(a, &b)| cost[a][b]).fold(0.0, f64::max);

    let mut modes: Vec<Mode> = Vec::with_capacity(d);
    for cl in clusters(&zero, &w, f64::INFINITY) {
        let vs: Vec<Vec<C64>> = cl.iter().map(|&i| col(i)).collect();
        let normalized = match metric_normalize(&layout, &vs, ZERO) {
            Ok(n) => n,
            Err(_) => vs.into_iter().map(|v| {
                let nv = linalg::norm(&v);
                (v.iter().map(|x| x / nv).collect(), 1.0)
            }).collect(),
        };
        for ((v, s), &i) in normalized.into_iter().zip(&cl) {
            modes.push(Mode { omega: w[i], right: v, left: Vec::new(), sng: s, kind: ModeKind::Zero, partner: None, complex: false });
        }
    }
    for cl in clusters(&pos, &w, tol_deg) {
        let vs: Vec<Vec<C64>> = cl.iter().map(|&i| col(i)).collect();
        let omega = cl.iter().map(|&i| w[i]).sum::<C64>() / cl.len() as f64;
        for (v, s) in metric_normalize(&layout, &vs, omega)? {
            let partner_vec = layout.sigma1(&v.iter().map(|x| x.conj()).collect::<Vec<_>>());
            let complex = omega.im.abs() > tol_im;
            let a = modes.len();
            modes.push(Mode { omega, right: v, left: Vec::new(), sng: s, kind: ModeKind::Positive, partner: Some(a + 1), complex });
            modes.push(Mode { omega: -omega.conj(), right: partner_vec, left: Vec::new(), sng: -s, kind: ModeKind::Negative, partner: Some(a), complex });
        }
    }
    for m in modes.iter_mut() {
        m.left = layout.sigma3(&m.right).iter().map(|x| x * m.sng).collect();
    }
    let mut spec = Spectrum { layout, modes, tol_zero, tol_im, left_method: LeftMethod::Metric, pairing_residual };
    if spec.biorthogonality_defect() > 1e-8 {
        spec.explicit_left_vectors()?;
    }
    spec.sort();
    Ok(spec)
}

impl Spectrum {
    fn sort(&mut self) {
        let n = self.modes.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let (x, y) = (self.modes[a].omega, self.modes[b].omega);
            x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap())
        });
        let mut new_index = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let mut sorted: Vec<Mode> = order.iter().map(|&i| self.modes[i].clone()).collect();
        for m in sorted.iter_mut() {
            m.partner = m.partner.map(|p| new_index[p]);
        }
        self.modes = sorted;
    }

    fn right_matrix(&self) -> Mat<C64> {
        let d = self.layout.dim();
        Mat::from_fn(d, self.modes.len(), |i, j| self.modes[j].right[i])
    }

    fn left_matrix(&self) -> Mat<C64> {
        let d = self.layout.dim();
        Mat::from_fn(d, self.modes.len(), |i, j| self.modes[j].left[i])
    }

    fn explicit_left_vectors(&mut self) -> Result<(), SpectrumError> {
        let r = self.right_matrix();
        let inv = faer::linalg::solvers::DenseSolveCore::inverse(&r.partial_piv_lu());
        let l = adjoint(&inv);
        for (j, m) in self.modes.iter_mut().enumerate() {
            m.left = linalg::column(&l, j);
        }
        self.left_method = LeftMethod::ExplicitInverse;
        Ok(())
    }

    /// `max |L^dagger R - 1|` over all retained modes.
    pub fn biorthogonality_defect(&self) -> f64 {
        let g = &adjoint(&self.left_matrix()) * &self.right_matrix();
        linalg::max_abs_diff(&g, &identity(self.modes.len()))
    }

    /// `max |(L^k)^dagger R^{-k'}|` over positive `k`, `k'`.
    pub fn cross_pairing_defect(&self) -> f64 {
        let mut r = 0.0f64;
        for a in self.modes.iter().filter(|m| m.kind == ModeKind::Positive) {
            for b in self.modes.iter().filter(|m| m.kind == ModeKind::Positive) {
                let partner = &self.modes[b.partner.unwrap()];
                r = r.max(linalg::dot(&a.left, &partner.right).norm());
            }
        }
        r
    }

    /// `max_k |Sigma_1 conj(R^k) - R^{-k}|` after fixing the phase of the partner.
    pub fn partner_defect(&self) -> f64 {
        let mut r = 0.0f64;
        for m in self.modes.iter().filter(|m| m.kind == ModeKind::Positive) {
            let p = &self.modes[m.partner.unwrap()];
            let expected = self.layout.sigma1(&m.right.iter().map(|x| x.conj()).collect::<Vec<_>>());
            let ov = linalg::dot(&expected, &p.right);
            let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { c(1.0) };
            let diff: Vec<C64> = expected.iter().zip(&p.right).map(|(a, b)| a * ph - b).collect();
            r = r.max(linalg::norm(&diff) / linalg::norm(&expected).max(1e-300));
            r = r.max((m.omega + p.omega.conj()).norm());
        }
        r
    }

    pub fn positive_modes(&self) -> impl Iterator<Item = (usize, &Mode)> {
        self.modes.iter().enumerate().filter(|(_, m)| m.kind == ModeKind::Positive)
    }

    /// Real parts of the positive-branch frequencies, ascending.
    pub fn excitation_energies(&self) -> Vec<f64> {
        self.positive_modes().map(|(_, m)| m.omega.re).collect()
    }

    pub fn zero_count(&self) -> usize {
        self.modes.iter().filter(|m| m.kind == ModeKind::Zero).count()
    }

    pub fn complex_modes(&self) -> Vec<usize> {
        self.modes.iter().enumerate().filter(|(_, m)| m.complex).map(|(i, _)| i).collect()
    }

    pub fn classify_zero_modes(&self, expected: usize) -> Result<ZeroModeReport, SpectrumError> {
        let found = self.zero_count();
        if found != expected {
            return Err(SpectrumError::ZeroModeMismatch { found, expected });
        }
        Ok(ZeroModeReport { found, expected })
    }

    /// `gamma_k = -(L^k)^dagger R` and `gamma_-k = -(L^-k)^dagger R` for every positive mode.
    pub fn response_weights(&self, r: &[C64]) -> Vec<ResponseWeight> {
        self.positive_modes()
            .map(|(i, m)| {
                let p = &self.modes[m.partner.unwrap()];
                ResponseWeight { mode: i, omega: m.omega, gamma_plus: -linalg::dot(&m.left, r), gamma_minus: -linalg::dot(&p.left, r) }
            })
            .collect()
    }

    /// Solution `x` of `(L - omega) x = R` expanded over the non-zero modes.
    pub fn reconstruct(&self, omega: C64, r: &[C64], guard: f64) -> Result<Vec<C64>, SpectrumError> {
        let mut x = vec![ZERO; self.layout.dim()];
        for (i, m) in self.modes.iter().enumerate() {
            if m.kind == ModeKind::Zero {
                continue;
            }
            let gamma = -linalg::dot(&m.left, r);
            let den = omega - m.omega;
            if den.norm() < guard * m.omega.norm().max(1.0) {
                if gamma.norm() > 0.0 {
                    return Err(SpectrumError::Resonance { omega, mode: i, mode_omega: m.omega });
                }
                continue;
            }
            let coef = gamma / den;
            x.iter_mut().zip(&m.right).for_each(|(a, b)| *a += coef * b);
        }
        Ok(x)
    }

    pub fn resolution_checks(&self, l: &Mat<C64>) -> ResolutionDefects {
        let r = self.right_matrix();
        let lm = self.left_matrix();
        let ident = &r * &adjoint(&lm);
        let d = self.layout.dim();
        let rw = Mat::from_fn(d, self.modes.len(), |i, j| r[(i, j)] * self.modes[j].omega);
        let spec = &rw * &adjoint(&lm);
        ResolutionDefects {
            identity: linalg::max_abs_diff(&ident, &identity(d)),
            spectral: linalg::max_abs_diff(&spec, l) / max_abs(l).max(1e-300),
        }
    }

    /// Same as `resolution_checks` but with a subset of modes dropped, to show truncation defects.
    pub fn truncated_identity_defect(&self, keep: usize) -> f64 {
        let d = self.layout.dim();
        let mut acc = Mat::<C64>::zeros(d, d);
        for m in self.modes.iter().take(keep) {
            for j in 0..d {
                let lj = m.left[j].conj();
                for i in 0..d {
                    acc[(i, j)] += m.right[i] * lj;
                }
            }
        }
        linalg::max_abs_diff(&acc, &identity(d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Random matrix with the response symmetries: `[[A, B], [-B*, -A*]]`, A Hermitian, B symmetric.
    fn random_response(n: usize, seed: u64) -> Mat<C64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut rnd = |_: usize, _: usize| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let a0 = Mat::from_fn(n, n, &mut rnd);
        let b0 = Mat::from_fn(n, n, &mut rnd);
        let mut a = linalg::hermitian_part(&a0);
        for i in 0..n {
            a[(i, i)] += c(4.0 + i as f64);
        }
        let b = Mat::from_fn(n, n, |i, j| (b0[(i, j)] + b0[(j, i)]) * 0.25);
        Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - n)],
            (false, true) => -b[(i - n, j)].conj(),
            (false, false) => -a[(i - n, j - n)].conj(),
        })
    }

    #[test]
    fn hungarian_small() {
        let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let a = hungarian(&cost);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn random_response_pairs_and_resolves() {
        let l = random_response(6, 5);
        let layout = Layout { orbital: 6, coefficient: 0 };
        assert!(layout.sigma1_residual(&l) < 1e-14);
        assert!(layout.sigma3_residual(&l) < 1e-14);
        let s = diagonalize(&l, layout, &SpectrumOptions::default()).unwrap();
        assert_eq!(s.excitation_energies().len(), 6);
        assert!(s.biorthogonality_defect() < 1e-10);
        assert!(s.partner_defect() < 1e-10);
        assert!(s.cross_pairing_defect() < 1e-10);
        let res = s.resolution_checks(&l);
        assert!(res.identity < 1e-10 && res.spectral < 1e-10);
        assert!(s.truncated_identity_defect(6) > 0.1);
    }

    #[test]
    fn reconstruct_solves_linear_system() {
        let l = random_response(5, 9);
        let layout = Layout { orbital: 5, coefficient: 0 };
        let s = diagonalize(&l, layout, &SpectrumOptions::default()).unwrap();
        let r: Vec<C64> = (0..10).map(|i| C64::new(0.1 * i as f64, 1.0)).collect();
        let omega = c(0.37);
        let x = s.reconstruct(omega, &r, 1e-12).unwrap();
        let lx = linalg::matvec(&l, &x);
        for i in 0..10 {
            assert!((lx[i] - x[i] * omega - r[i]).norm() < 1e-9);
        }
        let w0 = s.positive_modes().next().unwrap().1.omega;
        assert!(matches!(s.reconstruct(w0, &r, 1e-12), Err(SpectrumError::Resonance { .. })));
    }

    #[test]
    fn degenerate_block_gets_metric_orthonormal_vectors() {
        let n = 3;
        let a = Mat::from_fn(n, n, |i, j| if i == j { c(2.0) } else { ZERO });
        let l = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => a[(i, j)],
            (false, false) => -a[(i - n, j - n)],
            _ => ZERO,
        });
        let s = diagonalize(&l, Layout { orbital: 3, coefficient: 0 }, &SpectrumOptions::default()).unwrap();
        assert!(s.biorthogonality_defect() < 1e-12);
        assert_eq!(s.excitation_energies(), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn sigma_helpers_roundtrip() {
        let layout = Layout { orbital: 2, coefficient: 1 };
        let x: Vec<C64> = (0..6).map(|i| c(i as f64)).collect();
        assert_eq!(layout.sigma1(&layout.sigma1(&x)), x);
        assert_eq!(layout.sigma1(&x)[0], c(2.0));
        assert_eq!(layout.sigma1(&x)[4], c(5.0));
        assert_eq!(layout.sigma3(&x)[2], c(-2.0));
        assert_eq!(layout.sigma3(&x)[4], c(4.0));
    }
}
