//! Shared fixtures and independent oracles for the integration suites.
//!
//! The oracles here are deliberately implemented from scratch on matrix
//! representations (generic exponential series, terminating unipotent
//! logarithms, hand-derived closed formulas) so that they share no code path with
//! the chart arithmetic they check.

#![allow(dead_code)]

use lie_control::linalg::Matrix;
use lie_control::poly::Poly;
use lie_control::spectral::{heisenberg_example_f0, AutomorphismModel};
use lie_control::{ControlMap, ControlRange, GroupModel, LinearSystem, StructureConstants};
use rand::Rng;

// ---------------------------------------------------------------------
// Matrix oracles
// ---------------------------------------------------------------------

/// Plain scaling-and-squaring Taylor exponential.
pub fn mat_exp(m: &Matrix) -> Matrix {
    let n = m.nrows();
    let norm = m.norm();
    let scalings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let a = m / 2f64.powi(scalings as i32);
    let mut sum = Matrix::identity(n, n);
    let mut term = Matrix::identity(n, n);
    for j in 1..60 {
        term = &term * &a / j as f64;
        sum += &term;
        if term.amax() < 1e-19 {
            break;
        }
    }
    for _ in 0..scalings {
        sum = &sum * &sum;
    }
    sum
}

/// Terminating logarithm of a unipotent matrix `I + N`.
pub fn mat_log_unipotent(g: &Matrix) -> Matrix {
    let n = g.nrows();
    let nil = g - Matrix::identity(n, n);
    let mut sum = Matrix::zeros(n, n);
    let mut power = Matrix::identity(n, n);
    for j in 1..=n {
        power = &power * &nil;
        if power.amax() == 0.0 {
            break;
        }
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        sum += &power * (sign / j as f64);
    }
    sum
}

// ---------------------------------------------------------------------
// Heisenberg 3×3 unipotent representation
// ---------------------------------------------------------------------

/// Chart point to the faithful 3×3 unipotent matrix.
pub fn heis_group_matrix(x: &[f64]) -> Matrix {
    Matrix::from_row_slice(3, 3, &[1.0, x[1], x[0], 0.0, 1.0, x[2], 0.0, 0.0, 1.0])
}

/// Algebra coordinates to the 3×3 strictly upper matrix.
pub fn heis_algebra_matrix(a: &[f64]) -> Matrix {
    Matrix::from_row_slice(3, 3, &[0.0, a[1], a[0], 0.0, 0.0, a[2], 0.0, 0.0, 0.0])
}

pub fn heis_chart_of_matrix(m: &Matrix) -> [f64; 3] {
    [m[(0, 2)], m[(0, 1)], m[(1, 2)]]
}

pub fn heis_algebra_of_matrix(m: &Matrix) -> [f64; 3] {
    [m[(0, 2)], m[(0, 1)], m[(1, 2)]]
}

// ---------------------------------------------------------------------
// Aff(2,ℝ) 2×2 representation (the chart product corresponds to the
// *anti*-homomorphism g ↦ M(g): M(g₁·g₂) = M(g₂)·M(g₁))
// ---------------------------------------------------------------------

pub fn aff2_group_matrix(x: &[f64]) -> Matrix {
    Matrix::from_row_slice(2, 2, &[x[0], x[1], 0.0, 1.0])
}

pub fn aff2_algebra_matrix(a: &[f64]) -> Matrix {
    Matrix::from_row_slice(2, 2, &[a[0], a[1], 0.0, 0.0])
}

pub fn aff2_chart_of_matrix(m: &Matrix) -> [f64; 2] {
    [m[(0, 0)], m[(0, 1)]]
}

// ---------------------------------------------------------------------
// Strictly upper-triangular n×n algebras (step n−1 nilpotent)
// ---------------------------------------------------------------------

/// Basis `E_{ij}`, `i < j`, in lexicographic order.
pub fn strict_upper_basis(n: usize) -> Vec<(usize, usize)> {
    let mut basis = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            basis.push((i, j));
        }
    }
    basis
}

fn unit_matrix(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

/// Structure constants of the strictly upper-triangular matrices, computed
/// by decomposing the matrix commutators onto the basis.
pub fn strict_upper_structure_constants(n: usize) -> StructureConstants {
    let basis = strict_upper_basis(n);
    let dim = basis.len();
    let mut flat = vec![0.0; dim * dim * dim];
    for (ai, &(i1, j1)) in basis.iter().enumerate() {
        for (bi, &(i2, j2)) in basis.iter().enumerate() {
            let comm = unit_matrix(n, i1, j1) * unit_matrix(n, i2, j2)
                - unit_matrix(n, i2, j2) * unit_matrix(n, i1, j1);
            for (ci, &(i3, j3)) in basis.iter().enumerate() {
                flat[(ai * dim + bi) * dim + ci] = comm[(i3, j3)];
            }
        }
    }
    StructureConstants::from_flat(dim, flat).unwrap()
}

/// Algebra coordinates (w.r.t. the lexicographic `E_{ij}` basis) to matrix.
pub fn strict_upper_matrix(n: usize, coords: &[f64]) -> Matrix {
    let basis = strict_upper_basis(n);
    let mut m = Matrix::zeros(n, n);
    for (c, &(i, j)) in coords.iter().zip(&basis) {
        m[(i, j)] = *c;
    }
    m
}

pub fn strict_upper_coords(n: usize, m: &Matrix) -> Vec<f64> {
    strict_upper_basis(n)
        .iter()
        .map(|&(i, j)| m[(i, j)])
        .collect()
}

// ---------------------------------------------------------------------
// System fixtures
// ---------------------------------------------------------------------

pub fn heisenberg_example_system() -> LinearSystem {
    lie_control::specfile::SystemSpecFile::preset("heisenberg-paper")
        .unwrap()
        .build()
        .unwrap()
}

pub fn aff2_system_with_range(
    a: f64,
    d: f64,
    h: Vec<f64>,
    g: Vec<f64>,
    range: ControlRange,
) -> LinearSystem {
    let model = GroupModel::aff2();
    let aut = AutomorphismModel::aff2(&model, a, d).unwrap();
    let beta = ControlMap::Aff2Poly {
        h: Poly::new(h),
        g: Poly::new(g),
    };
    LinearSystem::new(model, aut, beta, range).unwrap()
}

pub fn aff2_system(a: f64, d: f64, h: Vec<f64>, g: Vec<f64>, r: f64) -> LinearSystem {
    aff2_system_with_range(a, d, h, g, ControlRange::symmetric_box(1, r).unwrap())
}

pub fn euclidean_system(a: &Matrix, b: &Matrix, range: ControlRange) -> LinearSystem {
    let model = GroupModel::euclidean(a.nrows()).unwrap();
    let aut = AutomorphismModel::linear(&model, a.clone()).unwrap();
    LinearSystem::new(model, aut, ControlMap::LinearB(b.clone()), range).unwrap()
}

pub fn heisenberg_model() -> GroupModel {
    GroupModel::heisenberg()
}

pub fn heisenberg_example_aut() -> AutomorphismModel {
    let m = GroupModel::heisenberg();
    AutomorphismModel::chart_poly(&m, heisenberg_example_f0()).unwrap()
}

// ---------------------------------------------------------------------
// Aff(2,ℝ) reference closed forms (general controls)
// ---------------------------------------------------------------------

pub struct Aff2Params {
    pub a: f64,
    pub d: f64,
    pub h: Poly,
    pub g: Poly,
}

impl Aff2Params {
    pub fn x_plus(&self, u: f64, x: f64) -> [f64; 2] {
        let (hv, hp) = (self.h.eval(u), self.h.deriv(u));
        let (gv, gp) = (self.g.eval(u), self.g.deriv(u));
        [
            hp / hv * x,
            (x / self.d) * ((hp / hv) * (-self.a - gv) + gp),
        ]
    }

    pub fn x_minus(&self, u: f64, x: f64) -> [f64; 2] {
        let (hv, hp) = (self.h.eval(u), self.h.deriv(u));
        let gp = self.g.deriv(u);
        [-hp / hv * x, -gp / hv * x]
    }

    /// `Ad_{u₁} X⁺_{u₀}`.
    pub fn ad1_plus(&self, u0: f64, u1: f64, x: f64) -> [f64; 2] {
        let (h0, hp0) = (self.h.eval(u0), self.h.deriv(u0));
        let h1 = self.h.eval(u1);
        let (g0, g1) = (self.g.eval(u0), self.g.eval(u1));
        let gp0 = self.g.deriv(u0);
        let d = self.d;
        let a = self.a;
        [
            hp0 / h0 * x,
            -((a + g1) / (d * h0)) * hp0 * x - ((a + g0) * hp0 * h1 / (d * d * h0)) * x
                + gp0 * h1 / (d * d) * x,
        ]
    }

    /// `Ad_{u₂u₁} X⁺_{u₀}`.
    pub fn ad2_plus(&self, u0: f64, u1: f64, u2: f64, x: f64) -> [f64; 2] {
        let (h0, hp0) = (self.h.eval(u0), self.h.deriv(u0));
        let (h1, h2) = (self.h.eval(u1), self.h.eval(u2));
        let (g0, g1, g2) = (self.g.eval(u0), self.g.eval(u1), self.g.eval(u2));
        let gp0 = self.g.deriv(u0);
        let d = self.d;
        let a = self.a;
        let t21 = -((a + g2) / (d * h0)) * hp0 * x
            - ((a + g1) * hp0 * h2 / (d * d * h0)) * x
            - ((a + g0) * hp0 * h1 * h2 / (d * d * d * h0)) * x
            + gp0 * h1 * h2 / (d * d * d) * x;
        [hp0 / h0 * x, t21]
    }

    /// `Ad⁻¹_{u₁} X⁻_{u₀}` (the overall sign follows the general chain
    /// formula: the leading component is `−h'(u₀)/h(u₀)·x`).
    pub fn ad1_minus(&self, u0: f64, u1: f64, x: f64) -> [f64; 2] {
        let (h0, hp0) = (self.h.eval(u0), self.h.deriv(u0));
        let h1 = self.h.eval(u1);
        let g1 = self.g.eval(u1);
        let gp0 = self.g.deriv(u0);
        let d = self.d;
        let a = self.a;
        [
            -hp0 / h0 * x,
            -((a + g1) * hp0 / (h0 * h1)) * x - d * gp0 / (h0 * h1) * x,
        ]
    }

    /// `Ad⁻¹⁻¹_{u₂u₁} X⁻_{u₀}`.
    pub fn ad2_minus(&self, u0: f64, u1: f64, u2: f64, x: f64) -> [f64; 2] {
        let (h0, hp0) = (self.h.eval(u0), self.h.deriv(u0));
        let (h1, h2) = (self.h.eval(u1), self.h.eval(u2));
        let (g1, g2) = (self.g.eval(u1), self.g.eval(u2));
        let gp0 = self.g.deriv(u0);
        let d = self.d;
        let a = self.a;
        let s21 = -((a + g1) * hp0 / (h0 * h1)) * x
            - d * (a + g2) * hp0 / (h0 * h1 * h2) * x
            - d * d * gp0 / (h0 * h1 * h2) * x;
        [-hp0 / h0 * x, s21]
    }

    /// Closed-form solution `φ(k, (x,y), u)`, `k ≥ 1`, built from the product
    /// structure directly.
    pub fn phi(&self, k: usize, x: f64, y: f64, us: &[f64]) -> [f64; 2] {
        assert!(k >= 1 && us.len() >= k);
        let d = self.d;
        let a = self.a;
        let first: f64 = (0..k).map(|j| self.h.eval(us[k - 1 - j])).product::<f64>() * x;
        let mut second = d.powi(k as i32 - 1) * (a + self.g.eval(us[0])) * x;
        for j in 0..k.saturating_sub(1) {
            let hprod: f64 = (0..=j).map(|i| self.h.eval(us[i])).product();
            second += d.powi((k - 2 - j) as i32) * (a + self.g.eval(us[j + 1])) * hprod * x;
        }
        second += d.powi(k as i32) * y;
        second -= a * (0..k).map(|j| d.powi((k - 1 - j) as i32)).sum::<f64>();
        [first, second]
    }
}

// ---------------------------------------------------------------------
// Randomness helpers
// ---------------------------------------------------------------------

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
}

/// Random invertible matrix (rejection on small determinants).
pub fn random_invertible<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    loop {
        let m = random_matrix(rng, n);
        let det = m.clone().lu().determinant();
        if det.abs() > 0.05 {
            return m;
        }
    }
}

/// Random orthogonal matrix from the QR factorization of a random matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let m = random_matrix(rng, n);
    m.qr().q()
}

/// Relative error with an absolute floor for near-zero references.
pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-6)
}
