//! One-dimensional sine-DVR grids with hard walls, one-body operators and
//! two-body kernel tables.
//!
//! Orbitals are stored as DVR coefficients, `psi_i = sqrt(dx) * phi(x_i)`, so
//! the Euclidean inner product of coefficient vectors is the grid inner
//! product `dx * sum conj(a_i) b_i` of the sampled functions.

use crate::linalg::{c, C64, ZERO};
use faer::Mat;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("grid range must satisfy x_min < x_max (got {0}, {1})")]
    BadRange(f64, f64),
    #[error("kernel table is {rows}x{cols}, grid has {n} points")]
    TableShape { rows: usize, cols: usize, n: usize },
    #[error("kernel table is not symmetric (max asymmetry {0:e})")]
    AsymmetricTable(f64),
    #[error("gaussian kernel width must be positive, got {0}")]
    BadWidth(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n_points: usize,
    x_min: f64,
    x_max: f64,
    dx: f64,
    points: Vec<f64>,
}

impl Grid {
    pub fn new(n_points: usize, x_min: f64, x_max: f64) -> Result<Grid, GridError> {
        if n_points < 4 {
            return Err(GridError::TooFewPoints(n_points));
        }
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(GridError::BadRange(x_min, x_max));
        }
        let dx = (x_max - x_min) / (n_points as f64 + 1.0);
        let points = (1..=n_points).map(|i| x_min + i as f64 * dx).collect();
        Ok(Grid { n_points, x_min, x_max, dx, points })
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Quadrature weight, equal to the spacing.
    pub fn weight(&self) -> f64 {
        self.dx
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    /// `weight * sum conj(a_i) b_i` for sampled function values.
    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        let s: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
        s * self.dx
    }

    pub fn to_coefficients(&self, values: &[C64]) -> Vec<C64> {
        let s = self.dx.sqrt();
        values.iter().map(|v| v * s).collect()
    }

    pub fn to_values(&self, coefficients: &[C64]) -> Vec<C64> {
        let s = 1.0 / self.dx.sqrt();
        coefficients.iter().map(|v| v * s).collect()
    }

    /// Sine-DVR kinetic energy `-1/(2m) d^2/dx^2` with Dirichlet walls.
    pub fn kinetic(&self, mass: f64) -> Mat<f64> {
        let n = self.n_points;
        let np1 = n as f64 + 1.0;
        let len = self.x_max - self.x_min;
        let norm = (2.0 / np1).sqrt();
        let basis = Mat::from_fn(n, n, |i, k| norm * ((i + 1) as f64 * (k + 1) as f64 * PI / np1).sin());
        let energies: Vec<f64> = (1..=n)
            .map(|k| (k as f64 * PI / len).powi(2) / (2.0 * mass))
            .collect();
        Mat::from_fn(n, n, |i, j| {
            (0..n).map(|k| basis[(i, k)] * energies[k] * basis[(j, k)]).sum()
        })
    }

    pub fn harmonic_potential(&self, omega0: f64) -> Vec<f64> {
        self.points.iter().map(|x| 0.5 * omega0 * omega0 * x * x).collect()
    }

    /// `T + diag(V)` as a complex operator matrix.
    pub fn one_body_hamiltonian(&self, mass: f64, potential: &[f64]) -> Mat<C64> {
        let t = self.kinetic(mass);
        Mat::from_fn(self.n_points, self.n_points, |i, j| {
            c(t[(i, j)] + if i == j { potential[i] } else { 0.0 })
        })
    }

    /// Multiplication by `x` on the grid.
    pub fn position_operator(&self) -> Mat<C64> {
        let n = self.n_points;
        Mat::from_fn(n, n, |i, j| if i == j { c(self.points[i]) } else { ZERO })
    }

    pub fn discretize(&self, kernel: &InteractionKernel) -> Result<PairKernel, GridError> {
        let n = self.n_points;
        match kernel {
            InteractionKernel::None => Ok(PairKernel::local(vec![0.0; n])),
            InteractionKernel::Contact { strength } => Ok(PairKernel::local(vec![strength / self.dx; n])),
            InteractionKernel::Gaussian { strength, width } => {
                if !(*width > 0.0) {
                    return Err(GridError::BadWidth(*width));
                }
                let x = &self.points;
                Ok(PairKernel::dense(Mat::from_fn(n, n, |i, j| {
                    strength * (-(x[i] - x[j]).powi(2) / (2.0 * width * width)).exp()
                })))
            }
            InteractionKernel::Table(t) => {
                if t.nrows() != n || t.ncols() != n {
                    return Err(GridError::TableShape { rows: t.nrows(), cols: t.ncols(), n });
                }
                let mut asym = 0.0f64;
                let mut scale = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        asym = asym.max((t[(i, j)] - t[(j, i)]).abs());
                        scale = scale.max(t[(i, j)].abs());
                    }
                }
                if asym > 1e-12 * scale.max(1.0) {
                    return Err(GridError::AsymmetricTable(asym));
                }
                Ok(PairKernel::dense(t.clone()))
            }
        }
    }
}

/// Pair interaction `W(x, x')` in physical form.
#[derive(Debug, Clone, PartialEq)]
pub enum InteractionKernel {
    None,
    /// `strength * delta(x - x')`
    Contact { strength: f64 },
    /// `strength * exp(-(x - x')^2 / (2 width^2))`
    Gaussian { strength: f64, width: f64 },
    /// Values `W(x_i, x_j)` on the grid.
    Table(Mat<f64>),
}

/// Discretised symmetric pair kernel `W(i, j)` acting on DVR coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PairKernel {
    n: usize,
    diagonal: Vec<f64>,
    table: Option<Mat<f64>>,
}

impl PairKernel {
    pub fn local(diagonal: Vec<f64>) -> PairKernel {
        PairKernel { n: diagonal.len(), diagonal, table: None }
    }

    pub fn dense(table: Mat<f64>) -> PairKernel {
        let n = table.nrows();
        let diagonal = (0..n).map(|i| table[(i, i)]).collect();
        PairKernel { n, diagonal, table: Some(table) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_local(&self) -> bool {
        self.table.is_none()
    }

    pub fn is_zero(&self) -> bool {
        match &self.table {
            None => self.diagonal.iter().all(|&d| d == 0.0),
            Some(t) => (0..self.n).all(|i| (0..self.n).all(|j| t[(i, j)] == 0.0)),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.table {
            Some(t) => t[(i, j)],
            None => {
                if i == j {
                    self.diagonal[i]
                } else {
                    0.0
                }
            }
        }
    }

    /// `V(i) = sum_j conj(bra_j) W(i, j) ket_j`.
    pub fn potential(&self, bra: &[C64], ket: &[C64]) -> Vec<C64> {
        match &self.table {
            None => (0..self.n).map(|i| bra[i].conj() * ket[i] * self.diagonal[i]).collect(),
            Some(t) => {
                let d: Vec<C64> = bra.iter().zip(ket).map(|(b, k)| b.conj() * k).collect();
                (0..self.n)
                    .map(|i| (0..self.n).map(|j| d[j] * t[(i, j)]).sum())
                    .collect()
            }
        }
    }

    /// `sum_j W(i, j) f_j` for an arbitrary density `f`.
    pub fn convolve(&self, f: &[C64]) -> Vec<C64> {
        match &self.table {
            None => (0..self.n).map(|i| f[i] * self.diagonal[i]).collect(),
            Some(t) => (0..self.n)
                .map(|i| (0..self.n).map(|j| f[j] * t[(i, j)]).sum())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn example_points_and_weight() {
        let g = Grid::new(4, 0.0, 5.0).unwrap();
        assert_eq!(g.points(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(g.weight(), 1.0);
    }

    #[test]
    fn rejects_small_grids() {
        assert_eq!(Grid::new(3, 0.0, 1.0), Err(GridError::TooFewPoints(3)));
        assert!(Grid::new(8, 1.0, 1.0).is_err());
    }

    // Closed-form sine-DVR kinetic matrix, summed analytically.
    fn kinetic_closed_form(g: &Grid, mass: f64) -> Mat<f64> {
        let n = g.len();
        let np1 = n as f64 + 1.0;
        let (a, b) = g.range();
        let pref = PI * PI / (2.0 * (b - a).powi(2)) / (2.0 * mass);
        Mat::from_fn(n, n, |i, j| {
            let (ii, jj) = ((i + 1) as f64, (j + 1) as f64);
            if i == j {
                pref * ((2.0 * np1 * np1 + 1.0) / 3.0 - 1.0 / (PI * ii / np1).sin().powi(2))
            } else {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                pref * sign
                    * (1.0 / (PI * (ii - jj) / (2.0 * np1)).sin().powi(2)
                        - 1.0 / (PI * (ii + jj) / (2.0 * np1)).sin().powi(2))
            }
        })
    }

    #[test]
    fn kinetic_matches_closed_form() {
        let g = Grid::new(17, -3.0, 4.0).unwrap();
        let t = g.kinetic(1.3);
        let tc = kinetic_closed_form(&g, 1.3);
        for i in 0..17 {
            for j in 0..17 {
                assert!((t[(i, j)] - tc[(i, j)]).abs() < 1e-10 * tc[(0, 0)].abs());
            }
        }
    }

    #[test]
    fn kinetic_spectrum_is_particle_in_box() {
        let g = Grid::new(32, 0.0, 2.0).unwrap();
        let (w, _) = crate::linalg::eigh_real(&g.kinetic(1.0));
        for k in 1..=5 {
            let exact = (k as f64 * PI / 2.0).powi(2) / 2.0;
            assert!((w[k - 1] - exact).abs() < 1e-10 * exact);
        }
    }

    #[test]
    fn harmonic_ground_energy() {
        let g = Grid::new(64, -8.0, 8.0).unwrap();
        let h = g.one_body_hamiltonian(1.0, &g.harmonic_potential(1.0));
        let (w, _) = crate::linalg::eigh(&h);
        assert!((w[0] - 0.5).abs() < 1e-8);
        assert!((w[1] - 1.5).abs() < 1e-8);
    }

    #[test]
    fn contact_potential_is_density() {
        let g = Grid::new(16, -2.0, 2.0).unwrap();
        let k = g.discretize(&InteractionKernel::Contact { strength: 1.0 }).unwrap();
        let values: Vec<C64> = g.points().iter().map(|x| c((-x * x).exp())).collect();
        let coef = g.to_coefficients(&values);
        let v = k.potential(&coef, &coef);
        for i in 0..16 {
            assert!((v[i] - values[i].norm_sqr()).norm() < 1e-14);
        }
    }

    #[test]
    fn asymmetric_table_rejected() {
        let g = Grid::new(4, 0.0, 1.0).unwrap();
        let t = Mat::from_fn(4, 4, |i, j| (i * 4 + j) as f64);
        assert!(matches!(
            g.discretize(&InteractionKernel::Table(t)),
            Err(GridError::AsymmetricTable(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn inner_product_is_sesquilinear(re in prop::collection::vec(-1.0f64..1.0, 8), im in prop::collection::vec(-1.0f64..1.0, 8), s in -2.0f64..2.0) {
            let g = Grid::new(8, -1.0, 2.0).unwrap();
            let a: Vec<C64> = re.iter().zip(&im).map(|(r, i)| C64::new(*r, *i)).collect();
            let b: Vec<C64> = im.iter().zip(&re).map(|(r, i)| C64::new(*r, -*i)).collect();
            let sb: Vec<C64> = b.iter().map(|x| x * s).collect();
            let lhs = g.inner(&a, &sb);
            prop_assert!((lhs - g.inner(&a, &b) * s).norm() < 1e-12);
            prop_assert!((g.inner(&a, &b) - g.inner(&b, &a).conj()).norm() < 1e-12);
            let ca = g.to_coefficients(&a);
            let cb = g.to_coefficients(&b);
            prop_assert!((crate::linalg::dot(&ca, &cb) - g.inner(&a, &b)).norm() < 1e-12);
        }

        #[test]
        fn gaussian_kernel_symmetric(w in 0.1f64..3.0, s in -2.0f64..2.0) {
            let g = Grid::new(10, -3.0, 3.0).unwrap();
            let k = g.discretize(&InteractionKernel::Gaussian { strength: s, width: w }).unwrap();
            for i in 0..10 { for j in 0..10 { prop_assert_eq!(k.get(i, j), k.get(j, i)); } }
        }
    }
}
