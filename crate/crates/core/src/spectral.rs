//! Automorphism models and the generalized-eigenspace splitting of the
//! differential at the identity.
//!
//! For an automorphism `f₀` of `G` the differential `d(f₀)_e : 𝔤 → 𝔤` is a
//! Lie algebra automorphism. Its generalized eigenspaces, grouped by the
//! modulus of the eigenvalue relative to 1, give the unstable / center /
//! stable subalgebras
//!
//! `𝔤⁺ = ⊕_{|α|>1} 𝔤_α`, `𝔤⁰ = ⊕_{|α|=1} 𝔤_α`, `𝔤⁻ = ⊕_{|α|<1} 𝔤_α`,
//!
//! with `𝔤 = 𝔤⁺ ⊕ 𝔤⁰ ⊕ 𝔤⁻`, plus the center-(un)stable sums
//! `𝔤^{+,0} = 𝔤⁺ ⊕ 𝔤⁰` and `𝔤^{-,0} = 𝔤⁻ ⊕ 𝔤⁰`. All blocks are Lie
//! subalgebras and satisfy `[𝔤⁺,𝔤⁰] ⊂ 𝔤⁺`, `[𝔤⁻,𝔤⁰] ⊂ 𝔤⁻`; `closure_check`
//! verifies this numerically.
//!
//! Floating point cannot compare `|α|` to 1 exactly, so the splitting takes
//! a modulus tolerance: eigenvalues within `[1−tol, 1+tol]` are assigned to
//! the center block, and moduli within a decade of the band edges raise the
//! `boundary_warning` flag on the split.

use nalgebra::DVector;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{Family, GroupElement, GroupModel};
use crate::linalg::{self, Matrix, Vector};
use crate::poly::PolyMap;

/// Modulus tolerance used with analytic Jacobians.
pub const DEFAULT_MODULUS_TOL: f64 = 1e-9;
/// Modulus tolerance to use with finite-difference Jacobians (FD noise is
/// around 1e-8).
pub const DEFAULT_MODULUS_TOL_FD: f64 = 1e-6;

/// Concrete automorphism families.
#[derive(Clone, Debug)]
pub enum AutKind {
    /// Chart-linear map `g ↦ A g` (Euclidean spaces and exponential
    /// coordinates on nilpotent groups).
    Linear(Matrix),
    /// The Aff(2,ℝ) automorphism `φ(x,y) = (x, a(x−1) + dy)`, `d ≠ 0`.
    Aff2 { a: f64, d: f64 },
    /// A polynomial chart map on a nilpotent family (e.g. the Heisenberg
    /// chart, where automorphisms are polynomial but not linear).
    ChartPoly(PolyMap),
    /// `exp ∘ L ∘ log` for an algebra automorphism `L`; the canonical form
    /// of any automorphism of a simply connected group with global `exp`.
    ExpLinear(Matrix),
}

/// A validated automorphism of a group model, with its differential at the
/// identity and the inverse differential cached.
#[derive(Clone, Debug)]
pub struct AutomorphismModel {
    kind: AutKind,
    diff: Matrix,
    diff_inv: Matrix,
}

/// Residuals from the randomized automorphism checks.
#[derive(Clone, Debug)]
pub struct AutomorphismReport {
    pub identity_residual: f64,
    pub max_homomorphism_residual: f64,
    pub max_inverse_residual: f64,
    pub pairs_checked: usize,
}

impl AutomorphismReport {
    pub fn passes(&self) -> bool {
        self.identity_residual <= 1e-12
            && self.max_homomorphism_residual <= 1e-10
            && self.max_inverse_residual <= 1e-10
    }
}

impl AutomorphismModel {
    /// Chart-linear automorphism. Valid on Euclidean models (any invertible
    /// matrix) and on exponential-coordinate nilpotent models (the matrix
    /// must be a Lie algebra automorphism).
    pub fn linear(model: &GroupModel, a: Matrix) -> Result<Self> {
        if !matches!(model.family(), Family::Euclidean | Family::Nilpotent) {
            return Err(Error::Model(
                "chart-linear automorphisms are only valid on Euclidean and exponential-coordinate nilpotent models".into(),
            ));
        }
        Self::from_kind(model, AutKind::Linear(a))
    }

    /// The Aff(2,ℝ) automorphism family `φ(x,y) = (x, a(x−1) + dy)`.
    pub fn aff2(model: &GroupModel, a: f64, d: f64) -> Result<Self> {
        if model.family() != Family::Aff2 {
            return Err(Error::Model("Aff2 automorphism on a non-Aff2 model".into()));
        }
        if d == 0.0 || !d.is_finite() || !a.is_finite() {
            return Err(Error::Argument(
                "Aff2 automorphism requires finite a and non-zero d".into(),
            ));
        }
        Self::from_kind(model, AutKind::Aff2 { a, d })
    }

    /// Polynomial chart automorphism on a nilpotent family.
    pub fn chart_poly(model: &GroupModel, map: PolyMap) -> Result<Self> {
        if !model.is_nilpotent() {
            return Err(Error::Model(
                "polynomial chart automorphisms are supported on nilpotent families only".into(),
            ));
        }
        Self::from_kind(model, AutKind::ChartPoly(map))
    }

    /// `exp ∘ L ∘ log` for an algebra automorphism `L`.
    pub fn exp_linear(model: &GroupModel, l: Matrix) -> Result<Self> {
        Self::from_kind(model, AutKind::ExpLinear(l))
    }

    fn from_kind(model: &GroupModel, kind: AutKind) -> Result<Self> {
        let d = model.dim();
        let diff = analytic_differential(model, &kind)?;
        if diff.nrows() != d || diff.ncols() != d {
            return Err(Error::Model(format!(
                "automorphism differential is {}×{}, expected {d}×{d}",
                diff.nrows(),
                diff.ncols()
            )));
        }
        let diff_inv = linalg::invert(&diff, 1e-12).map_err(|_| {
            Error::Model("f_0 is not an automorphism: singular differential".into())
        })?;

        // The differential must be an automorphism of the Lie algebra.
        let res = algebra_automorphism_residual(model, &diff);
        if res > 1e-9 {
            return Err(Error::Model(format!(
                "differential is not a Lie algebra automorphism (bracket residual {res:.3e})"
            )));
        }

        let aut = AutomorphismModel {
            kind,
            diff,
            diff_inv,
        };

        // f_0(e) = e.
        let e = model.identity();
        let fe = aut.apply(model, &e)?;
        if model.chart_distance(&fe, &e) > 1e-12 {
            return Err(Error::Model(
                "automorphism does not fix the identity".into(),
            ));
        }

        // A polynomial chart map on a simply connected nilpotent group is an
        // automorphism iff it coincides with exp ∘ L ∘ log; spot-check that
        // identity on a deterministic sample.
        if matches!(aut.kind, AutKind::ChartPoly(_)) {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..20 {
                let g = model.random_element(&mut rng);
                let via_poly = aut.apply(model, &g)?;
                let via_exp = exp_linear_apply(model, &aut.diff, &g)?;
                if model.chart_distance(&via_poly, &via_exp) > 1e-9 {
                    return Err(Error::Model(
                        "chart polynomial is not a group automorphism (disagrees with exp∘L∘log)"
                            .into(),
                    ));
                }
            }
        }

        Ok(aut)
    }

    pub fn kind(&self) -> &AutKind {
        &self.kind
    }

    /// Apply `f₀`.
    pub fn apply(&self, model: &GroupModel, g: &GroupElement) -> Result<GroupElement> {
        match &self.kind {
            AutKind::Linear(a) => {
                let coords = a * g.coords();
                model.element(coords.as_slice())
            }
            AutKind::Aff2 { a, d } => {
                let (x, y) = (g.coords()[0], g.coords()[1]);
                model.element(&[x, a * (x - 1.0) + d * y])
            }
            AutKind::ChartPoly(p) => {
                let out = p.eval(g.as_slice())?;
                model.element(&out)
            }
            AutKind::ExpLinear(l) => exp_linear_apply(model, l, g),
        }
    }

    /// Apply `f₀⁻¹`.
    pub fn apply_inv(&self, model: &GroupModel, g: &GroupElement) -> Result<GroupElement> {
        match &self.kind {
            AutKind::Linear(_) => {
                let coords = &self.diff_inv * g.coords();
                model.element(coords.as_slice())
            }
            AutKind::Aff2 { a, d } => {
                let (x, y) = (g.coords()[0], g.coords()[1]);
                model.element(&[x, -(a / d) * (x - 1.0) + y / d])
            }
            AutKind::ChartPoly(_) | AutKind::ExpLinear(_) => {
                exp_linear_apply(model, &self.diff_inv, g)
            }
        }
    }

    /// Apply `f₀^k` for any integer `k`.
    pub fn apply_pow(&self, model: &GroupModel, g: &GroupElement, k: i64) -> Result<GroupElement> {
        let mut out = g.clone();
        for _ in 0..k.unsigned_abs() {
            out = if k >= 0 {
                self.apply(model, &out)?
            } else {
                self.apply_inv(model, &out)?
            };
        }
        Ok(out)
    }

    /// The inverse automorphism as a model of its own (used by reversed
    /// systems).
    pub fn inverse(&self, model: &GroupModel) -> Result<AutomorphismModel> {
        let kind = match &self.kind {
            AutKind::Linear(_) => AutKind::Linear(self.diff_inv.clone()),
            AutKind::Aff2 { a, d } => AutKind::Aff2 {
                a: -a / d,
                d: 1.0 / d,
            },
            AutKind::ChartPoly(_) | AutKind::ExpLinear(_) => {
                AutKind::ExpLinear(self.diff_inv.clone())
            }
        };
        Self::from_kind(model, kind)
    }

    /// The differential at the identity in the chart basis (analytic).
    pub fn differential(&self) -> &Matrix {
        &self.diff
    }

    /// Randomized validation: identity fixed point, homomorphism property on
    /// `pairs` random pairs, and the inverse round trip.
    pub fn validate(
        &self,
        model: &GroupModel,
        pairs: usize,
        seed: u64,
    ) -> Result<AutomorphismReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = model.identity();
        let identity_residual = model.chart_distance(&self.apply(model, &e)?, &e);
        let mut max_hom: f64 = 0.0;
        let mut max_inv: f64 = 0.0;
        for _ in 0..pairs {
            let g = model.random_element(&mut rng);
            let h = model.random_element(&mut rng);
            let lhs = self.apply(model, &model.mul(&g, &h)?)?;
            let rhs = model.mul(&self.apply(model, &g)?, &self.apply(model, &h)?)?;
            max_hom = max_hom.max(model.chart_distance(&lhs, &rhs));
            let back = self.apply_inv(model, &self.apply(model, &g)?)?;
            max_inv = max_inv.max(model.chart_distance(&back, &g));
        }
        Ok(AutomorphismReport {
            identity_residual,
            max_homomorphism_residual: max_hom,
            max_inverse_residual: max_inv,
            pairs_checked: pairs,
        })
    }
}

fn exp_linear_apply(model: &GroupModel, l: &Matrix, g: &GroupElement) -> Result<GroupElement> {
    let x = model.log(g)?;
    let lx = l * x.coords();
    model.exp(&model.algebra_element(lx.as_slice())?)
}

fn analytic_differential(model: &GroupModel, kind: &AutKind) -> Result<Matrix> {
    Ok(match kind {
        AutKind::Linear(a) => a.clone(),
        AutKind::Aff2 { a, d } => Matrix::from_row_slice(2, 2, &[1.0, 0.0, *a, *d]),
        AutKind::ChartPoly(p) => p.jacobian(model.identity().as_slice())?,
        AutKind::ExpLinear(l) => l.clone(),
    })
}

/// Largest defect of `L[e_i,e_j] = [L e_i, L e_j]` over all basis pairs.
pub fn algebra_automorphism_residual(model: &GroupModel, l: &Matrix) -> f64 {
    let d = model.dim();
    let sc = model.structure_constants();
    let basis: Vec<Vector> = (0..d)
        .map(|i| {
            let mut v = Vector::zeros(d);
            v[i] = 1.0;
            v
        })
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let lhs = l * sc.bracket(&basis[i], &basis[j]);
            let li = l * &basis[i];
            let lj = l * &basis[j];
            let rhs = sc.bracket(&li, &lj);
            worst = worst.max((lhs - rhs).amax());
        }
    }
    worst
}

/// The matrix of `d(f₀)_e` in the chart basis (analytic form).
///
/// Errors with a model error when the result is singular, since then `f₀`
/// cannot be an automorphism.
pub fn differential_at_identity(model: &GroupModel, aut: &AutomorphismModel) -> Result<Matrix> {
    let _ = model;
    let m = aut.differential().clone();
    let det = m.clone().lu().determinant();
    if !det.is_finite() || det.abs() < 1e-12 {
        return Err(Error::Model(format!(
            "differential at identity is singular (|det| = {:.3e})",
            det.abs()
        )));
    }
    Ok(m)
}

/// Central finite-difference differential of an arbitrary chart map through
/// `log ∘ f ∘ exp` at 0, step `1e-6`. Used as an independent cross-check of
/// the analytic Jacobians.
pub fn differential_fd_at_identity<F>(model: &GroupModel, f: F) -> Result<Matrix>
where
    F: Fn(&GroupElement) -> Result<GroupElement>,
{
    let d = model.dim();
    let h = 1e-6;
    let mut jac = Matrix::zeros(d, d);
    for j in 0..d {
        let mut plus = DVector::zeros(d);
        plus[j] = h;
        let mut minus = DVector::zeros(d);
        minus[j] = -h;
        let gp = model.exp(&model.algebra_element(plus.as_slice())?)?;
        let gm = model.exp(&model.algebra_element(minus.as_slice())?)?;
        let fp = model.log(&f(&gp)?)?;
        let fm = model.log(&f(&gm)?)?;
        for i in 0..d {
            jac[(i, j)] = (fp.coords()[i] - fm.coords()[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Eigenvalues of `d(f₀)_e` with real bases for the unstable / center /
/// stable generalized eigenspace sums.
#[derive(Clone, Debug)]
pub struct SpectralSplit {
    /// Eigenvalues repeated according to algebraic multiplicity.
    pub eigenvalues: Vec<Complex<f64>>,
    pub basis_plus: Matrix,
    pub basis_zero: Matrix,
    pub basis_minus: Matrix,
    /// Modulus tolerance used for the grouping.
    pub tol: f64,
    /// Set when some eigenvalue modulus falls within a decade of the
    /// `1 ± tol` band edges, i.e. the block assignment is sensitive to the
    /// tolerance. Boundary moduli are assigned to the center block.
    pub boundary_warning: bool,
}

impl SpectralSplit {
    pub fn dims(&self) -> (usize, usize, usize) {
        (
            self.basis_plus.ncols(),
            self.basis_zero.ncols(),
            self.basis_minus.ncols(),
        )
    }

    /// Basis of the center-unstable sum `𝔤^{+,0}`.
    pub fn basis_center_unstable(&self) -> Matrix {
        concat_cols(&self.basis_plus, &self.basis_zero)
    }

    /// Basis of the center-stable sum `𝔤^{-,0}`.
    pub fn basis_center_stable(&self) -> Matrix {
        concat_cols(&self.basis_minus, &self.basis_zero)
    }

    /// True when every eigenvalue modulus is 1 within the tolerance.
    pub fn all_center(&self) -> bool {
        self.basis_zero.ncols() == self.eigenvalues.len()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|a| a.norm()).collect()
    }
}

fn concat_cols(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.nrows().max(b.nrows());
    let mut out = Matrix::zeros(n, a.ncols() + b.ncols());
    out.view_mut((0, 0), (n, a.ncols())).copy_from(a);
    out.view_mut((0, a.ncols()), (n, b.ncols())).copy_from(b);
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Block {
    Plus,
    Zero,
    Minus,
}

/// Generalized-eigenspace splitting of an invertible matrix, grouped by
/// eigenvalue modulus against `1 ± tol`.
///
/// Each block basis is the orthonormal kernel of the product of the real
/// factors `(L − α)` / `(L² − 2Re(α)L + |α|²)` over the block's eigenvalues,
/// so defective (Jordan) structure is captured and complex pairs produce
/// real bases.
pub fn eigensplit(l: &Matrix, tol: f64) -> Result<SpectralSplit> {
    if l.nrows() != l.ncols() || l.nrows() == 0 {
        return Err(Error::Argument(
            "eigensplit expects a non-empty square matrix".into(),
        ));
    }
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::Argument(format!(
            "modulus tolerance {tol} outside (0, 0.5)"
        )));
    }
    let det = l.clone().lu().determinant();
    if !det.is_finite() || det.abs() < 1e-12 {
        return Err(Error::Precondition(format!(
            "eigensplit requires an invertible matrix (|det| = {:.3e})",
            det.abs()
        )));
    }
    let d = l.nrows();
    let eigenvalues: Vec<Complex<f64>> = l.complex_eigenvalues().iter().copied().collect();

    let classify = |a: &Complex<f64>| -> Block {
        let m = a.norm();
        if m > 1.0 + tol {
            Block::Plus
        } else if m < 1.0 - tol {
            Block::Minus
        } else {
            Block::Zero
        }
    };
    let boundary_warning = eigenvalues.iter().any(|a| {
        let gap = (a.norm() - 1.0).abs();
        gap >= tol / 10.0 && gap <= tol * 10.0
    });

    let mut bases = Vec::with_capacity(3);
    for block in [Block::Plus, Block::Zero, Block::Minus] {
        // Real eigenvalues contribute linear factors; conjugate pairs (the
        // real Schur form produces exactly mirrored imaginary parts, so the
        // sign test is reliable) contribute quadratic real factors.
        let mut dim_block = 0usize;
        let mut factors: Vec<Matrix> = Vec::new();
        for a in eigenvalues.iter().filter(|a| classify(a) == block) {
            if a.im == 0.0 {
                dim_block += 1;
                factors.push(l - Matrix::identity(d, d) * a.re);
            } else if a.im > 0.0 {
                dim_block += 2;
                factors.push(l * l - l * (2.0 * a.re) + Matrix::identity(d, d) * a.norm_sqr());
            }
        }
        if dim_block == d {
            bases.push(Matrix::identity(d, d));
            continue;
        }
        if dim_block == 0 {
            bases.push(Matrix::zeros(d, 0));
            continue;
        }
        let mut product = Matrix::identity(d, d);
        for f in factors {
            product = f * product;
            let norm = product.norm();
            if norm > 0.0 {
                product /= norm;
            }
        }
        bases.push(linalg::kernel_basis(&product, dim_block)?);
    }
    let basis_minus = bases.pop().unwrap();
    let basis_zero = bases.pop().unwrap();
    let basis_plus = bases.pop().unwrap();

    Ok(SpectralSplit {
        eigenvalues,
        basis_plus,
        basis_zero,
        basis_minus,
        tol,
        boundary_warning,
    })
}

/// One subalgebra-closure statement with its numerical residual.
#[derive(Clone, Debug)]
pub struct ClosureCheck {
    pub holds: bool,
    pub residual: f64,
}

/// Report of the bracket-closure relations between the split blocks.
#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub plus_subalgebra: ClosureCheck,
    pub zero_subalgebra: ClosureCheck,
    pub minus_subalgebra: ClosureCheck,
    /// `[𝔤⁺, 𝔤⁰] ⊂ 𝔤⁺`
    pub plus_zero_in_plus: ClosureCheck,
    /// `[𝔤⁻, 𝔤⁰] ⊂ 𝔤⁻`
    pub minus_zero_in_minus: ClosureCheck,
    pub tol: f64,
}

impl ClosureReport {
    pub fn all_hold(&self) -> bool {
        self.plus_subalgebra.holds
            && self.zero_subalgebra.holds
            && self.minus_subalgebra.holds
            && self.plus_zero_in_plus.holds
            && self.minus_zero_in_minus.holds
    }
}

/// Check that each block is closed under the bracket and that
/// `[𝔤^±, 𝔤⁰] ⊂ 𝔤^±`. Report-only: residuals are returned, nothing fails.
pub fn closure_check(model: &GroupModel, split: &SpectralSplit, tol: f64) -> ClosureReport {
    let sc = model.structure_constants();
    let residual = |from_a: &Matrix, from_b: &Matrix, target: &Matrix| -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..from_a.ncols() {
            for j in 0..from_b.ncols() {
                let v = sc.bracket(
                    &from_a.column(i).into_owned(),
                    &from_b.column(j).into_owned(),
                );
                worst = worst.max(linalg::span_residual(target, &v));
            }
        }
        worst
    };
    let check = |r: f64| ClosureCheck {
        holds: r <= tol,
        residual: r,
    };
    let p = &split.basis_plus;
    let z = &split.basis_zero;
    let m = &split.basis_minus;
    ClosureReport {
        plus_subalgebra: check(residual(p, p, p)),
        zero_subalgebra: check(residual(z, z, z)),
        minus_subalgebra: check(residual(m, m, m)),
        plus_zero_in_plus: check(residual(p, z, p)),
        minus_zero_in_minus: check(residual(m, z, m)),
        tol,
    }
}

/// Result of [`equivariance_check`].
#[derive(Clone, Debug)]
pub struct EquivarianceReport {
    /// Max `‖π(f₀(g)) − f₀'(π(g))‖` over the random sample.
    pub commutation_residual: f64,
    /// Max `‖π(g·h) − π(g)·π(h)‖` over the random sample.
    pub homomorphism_residual: f64,
    /// Rank of `dπ_e` (full row rank ⇔ surjective on the algebra level).
    pub dpi_rank: usize,
    pub plus_inclusion_residual: f64,
    pub zero_inclusion_residual: f64,
    pub minus_inclusion_residual: f64,
    pub holds: bool,
}

/// Verify that a surjective chart homomorphism `π : G → H` intertwining the
/// automorphisms maps each block of the source splitting into the
/// corresponding block of the target splitting.
///
/// Errors with a precondition error when `π ∘ f₀ ≠ f₀' ∘ π` (beyond `1e-10`
/// on a random sample).
pub fn equivariance_check(
    model: &GroupModel,
    aut: &AutomorphismModel,
    pi: &PolyMap,
    target_model: &GroupModel,
    target_aut: &AutomorphismModel,
    tol: f64,
    seed: u64,
) -> Result<EquivarianceReport> {
    if pi.arity != model.dim() || pi.out_dim() != target_model.dim() {
        return Err(Error::Argument(format!(
            "chart homomorphism maps ℝ^{} → ℝ^{}, models have dims {} and {}",
            pi.arity,
            pi.out_dim(),
            model.dim(),
            target_model.dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let project = |g: &GroupElement| -> Result<GroupElement> {
        target_model.element(&pi.eval(g.as_slice())?)
    };

    let mut commutation: f64 = 0.0;
    let mut homres: f64 = 0.0;
    for _ in 0..50 {
        let g = model.random_element(&mut rng);
        let h = model.random_element(&mut rng);
        let lhs = project(&aut.apply(model, &g)?)?;
        let rhs = target_aut.apply(target_model, &project(&g)?)?;
        commutation = commutation.max(target_model.chart_distance(&lhs, &rhs));
        let ph = target_model.chart_distance(
            &project(&model.mul(&g, &h)?)?,
            &target_model.mul(&project(&g)?, &project(&h)?)?,
        );
        homres = homres.max(ph);
    }
    if commutation > 1e-10 {
        return Err(Error::Precondition(format!(
            "π does not intertwine the automorphisms (residual {commutation:.3e})"
        )));
    }

    let dpi = pi.jacobian(model.identity().as_slice())?;
    let (dpi_rank, _) = linalg::rank_with_svs(&dpi, 1e-10);
    let split = eigensplit(aut.differential(), DEFAULT_MODULUS_TOL)?;
    let target_split = eigensplit(target_aut.differential(), DEFAULT_MODULUS_TOL)?;

    let inclusion = |from: &Matrix, to: &Matrix| -> f64 {
        let mapped = &dpi * from;
        let mut worst: f64 = 0.0;
        for j in 0..mapped.ncols() {
            worst = worst.max(linalg::span_residual(to, &mapped.column(j).into_owned()));
        }
        worst
    };
    let plus = inclusion(&split.basis_plus, &target_split.basis_plus);
    let zero = inclusion(&split.basis_zero, &target_split.basis_zero);
    let minus = inclusion(&split.basis_minus, &target_split.basis_minus);

    Ok(EquivarianceReport {
        commutation_residual: commutation,
        homomorphism_residual: homres,
        dpi_rank,
        plus_inclusion_residual: plus,
        zero_inclusion_residual: zero,
        minus_inclusion_residual: minus,
        holds: plus <= tol && zero <= tol && minus <= tol,
    })
}

/// The Heisenberg worked-example automorphism
/// `f₀(x) = (x₁+x₂+x₂²/2, x₂, x₂+x₃)` as a chart polynomial.
pub fn heisenberg_example_f0() -> PolyMap {
    use crate::poly::Monomial;
    PolyMap::new(
        3,
        vec![
            vec![
                Monomial {
                    coeff: 1.0,
                    powers: vec![1, 0, 0],
                },
                Monomial {
                    coeff: 1.0,
                    powers: vec![0, 1, 0],
                },
                Monomial {
                    coeff: 0.5,
                    powers: vec![0, 2, 0],
                },
            ],
            vec![Monomial {
                coeff: 1.0,
                powers: vec![0, 1, 0],
            }],
            vec![
                Monomial {
                    coeff: 1.0,
                    powers: vec![0, 1, 0],
                },
                Monomial {
                    coeff: 1.0,
                    powers: vec![0, 0, 1],
                },
            ],
        ],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Monomial;

    #[test]
    fn aff2_differential_and_eigenvalues() {
        let m = GroupModel::aff2();
        let aut = AutomorphismModel::aff2(&m, 1.5, 2.0).unwrap();
        let j = differential_at_identity(&m, &aut).unwrap();
        assert_eq!(j, Matrix::from_row_slice(2, 2, &[1.0, 0.0, 1.5, 2.0]));
        let mut moduli: Vec<f64> = j.complex_eigenvalues().iter().map(|a| a.norm()).collect();
        moduli.sort_by(f64::total_cmp);
        assert!((moduli[0] - 1.0).abs() < 1e-12 && (moduli[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_example_differential() {
        let m = GroupModel::heisenberg();
        let aut = AutomorphismModel::chart_poly(&m, heisenberg_example_f0()).unwrap();
        let j = differential_at_identity(&m, &aut).unwrap();
        let expected = Matrix::from_row_slice(3, 3, &[1., 1., 0., 0., 1., 0., 0., 1., 1.]);
        assert_eq!(j, expected);
        for a in j.complex_eigenvalues().iter() {
            assert!((a - Complex::new(1.0, 0.0)).norm() < 1e-9);
        }
        // Finite differences agree with the analytic Jacobian.
        let fd = differential_fd_at_identity(&m, |g| aut.apply(&m, g)).unwrap();
        assert!((&fd - &j).amax() < 1e-8);
    }

    #[test]
    fn euclidean_differential_is_the_matrix_itself() {
        let m = GroupModel::euclidean(2).unwrap();
        let a = Matrix::from_row_slice(2, 2, &[0., 1., -1., 0.]);
        let aut = AutomorphismModel::linear(&m, a.clone()).unwrap();
        assert_eq!(differential_at_identity(&m, &aut).unwrap(), a);
    }

    #[test]
    fn automorphism_validation_accepts_real_automorphisms() {
        let m = GroupModel::heisenberg();
        let aut = AutomorphismModel::chart_poly(&m, heisenberg_example_f0()).unwrap();
        let report = aut.validate(&m, 50, 7).unwrap();
        assert!(report.passes(), "{report:?}");

        let a2 = GroupModel::aff2();
        let aut2 = AutomorphismModel::aff2(&a2, -0.7, 3.0).unwrap();
        assert!(aut2.validate(&a2, 50, 7).unwrap().passes());
    }

    #[test]
    fn non_automorphism_chart_map_is_rejected() {
        // f(x) = (x₁ + x₂², x₂, x₃) fixes e and has unit Jacobian at e, but
        // is not a homomorphism.
        let m = GroupModel::heisenberg();
        let bad = PolyMap::new(
            3,
            vec![
                vec![
                    Monomial {
                        coeff: 1.0,
                        powers: vec![1, 0, 0],
                    },
                    Monomial {
                        coeff: 1.0,
                        powers: vec![0, 2, 0],
                    },
                ],
                vec![Monomial {
                    coeff: 1.0,
                    powers: vec![0, 1, 0],
                }],
                vec![Monomial {
                    coeff: 1.0,
                    powers: vec![0, 0, 1],
                }],
            ],
        )
        .unwrap();
        assert!(matches!(
            AutomorphismModel::chart_poly(&m, bad),
            Err(Error::Model(_))
        ));
    }

    #[test]
    fn aff2_requires_nonzero_d() {
        let m = GroupModel::aff2();
        assert!(matches!(
            AutomorphismModel::aff2(&m, 1.0, 0.0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn singular_linear_map_is_not_an_automorphism() {
        let m = GroupModel::euclidean(2).unwrap();
        let singular = Matrix::from_row_slice(2, 2, &[1., 2., 2., 4.]);
        assert!(matches!(
            AutomorphismModel::linear(&m, singular),
            Err(Error::Model(_))
        ));
    }

    #[test]
    fn linear_map_must_respect_the_bracket() {
        // Invertible but not a Lie algebra automorphism of the Heisenberg
        // structure constants: swapping e₁ and e₂ moves the center onto a
        // non-central direction.
        let sc = crate::group::StructureConstants::from_entries(3, &[(1, 2, 0, 1.0)]).unwrap();
        let m = GroupModel::nilpotent(sc).unwrap();
        let swap = Matrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 0., 0., 0., 1.]);
        assert!(matches!(
            AutomorphismModel::linear(&m, swap),
            Err(Error::Model(_))
        ));
    }

    #[test]
    fn inverse_automorphism_round_trips() {
        let m = GroupModel::heisenberg();
        let aut = AutomorphismModel::chart_poly(&m, heisenberg_example_f0()).unwrap();
        let inv = aut.inverse(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = m.random_element(&mut rng);
            let back = inv.apply(&m, &aut.apply(&m, &g).unwrap()).unwrap();
            assert!(m.chart_distance(&back, &g) < 1e-12);
        }
    }

    #[test]
    fn eigensplit_diagonal() {
        let l = Matrix::from_diagonal(&Vector::from_column_slice(&[2.0, 1.0, 0.5]));
        let s = eigensplit(&l, 1e-6).unwrap();
        assert_eq!(s.dims(), (1, 1, 1));
        assert!(s.basis_plus.column(0)[0].abs() > 0.999);
        assert!(s.basis_zero.column(0)[1].abs() > 0.999);
        assert!(s.basis_minus.column(0)[2].abs() > 0.999);
        assert!(!s.boundary_warning);
    }

    #[test]
    fn eigensplit_defective_unit_block() {
        let l = Matrix::from_row_slice(3, 3, &[1., 1., 0., 0., 1., 0., 0., 1., 1.]);
        let s = eigensplit(&l, 1e-6).unwrap();
        assert_eq!(s.dims(), (0, 3, 0));
        assert!(s.all_center());
    }

    #[test]
    fn eigensplit_rotation_pair_on_unit_circle() {
        let (c, si) = (1.0f64.cos(), 1.0f64.sin());
        let l = Matrix::from_row_slice(2, 2, &[c, -si, si, c]);
        let s = eigensplit(&l, 1e-6).unwrap();
        assert_eq!(s.dims(), (0, 2, 0));
        for a in &s.eigenvalues {
            assert!((a.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigensplit_flags_near_boundary_moduli() {
        let l = Matrix::from_diagonal(&Vector::from_column_slice(&[1.0 + 5e-7, 2.0]));
        let s = eigensplit(&l, 1e-6).unwrap();
        assert!(s.boundary_warning);
        assert_eq!(s.dims(), (1, 1, 0));
    }

    #[test]
    fn eigensplit_rejects_singular_and_bad_tol() {
        let l = Matrix::from_row_slice(2, 2, &[1., 1., 1., 1.]);
        assert!(matches!(eigensplit(&l, 1e-6), Err(Error::Precondition(_))));
        let ok = Matrix::identity(2, 2);
        assert!(matches!(eigensplit(&ok, 0.7), Err(Error::Argument(_))));
    }

    #[test]
    fn closure_checks_per_family() {
        // Abelian: everything vanishes.
        let e = GroupModel::euclidean(3).unwrap();
        let s = eigensplit(
            &Matrix::from_diagonal(&Vector::from_column_slice(&[2., 1., 0.5])),
            1e-9,
        )
        .unwrap();
        assert!(closure_check(&e, &s, 1e-10).all_hold());

        // Heisenberg example: single center block.
        let h = GroupModel::heisenberg();
        let aut = AutomorphismModel::chart_poly(&h, heisenberg_example_f0()).unwrap();
        let s = eigensplit(aut.differential(), 1e-9).unwrap();
        assert!(closure_check(&h, &s, 1e-10).all_hold());

        // Aff2 with d = 2, a = 1: one-dimensional unstable block and
        // [𝔤⁺, 𝔤⁰] ⊂ 𝔤⁺.
        let a = GroupModel::aff2();
        let aut = AutomorphismModel::aff2(&a, 1.0, 2.0).unwrap();
        let s = eigensplit(aut.differential(), 1e-9).unwrap();
        assert_eq!(s.dims(), (1, 1, 0));
        let report = closure_check(&a, &s, 1e-10);
        assert!(report.all_hold(), "{report:?}");
        assert!(report.plus_zero_in_plus.residual <= 1e-10);
    }

    #[test]
    fn equivariance_heisenberg_center_quotient() {
        let h = GroupModel::heisenberg();
        let aut = AutomorphismModel::chart_poly(&h, heisenberg_example_f0()).unwrap();
        let quotient = GroupModel::euclidean(2).unwrap();
        let qaut =
            AutomorphismModel::linear(&quotient, Matrix::from_row_slice(2, 2, &[1., 0., 1., 1.]))
                .unwrap();
        // π drops the central coordinate.
        let pi = PolyMap::new(
            3,
            vec![
                vec![Monomial {
                    coeff: 1.0,
                    powers: vec![0, 1, 0],
                }],
                vec![Monomial {
                    coeff: 1.0,
                    powers: vec![0, 0, 1],
                }],
            ],
        )
        .unwrap();
        let report = equivariance_check(&h, &aut, &pi, &quotient, &qaut, 1e-9, 11).unwrap();
        assert!(report.holds, "{report:?}");
        assert_eq!(report.dpi_rank, 2);
        assert!(report.homomorphism_residual < 1e-12);
    }

    #[test]
    fn equivariance_identity_homomorphism() {
        let h = GroupModel::heisenberg();
        let aut = AutomorphismModel::chart_poly(&h, heisenberg_example_f0()).unwrap();
        let pi = PolyMap::identity(3);
        let report = equivariance_check(&h, &aut, &pi, &h, &aut, 1e-9, 11).unwrap();
        assert!(report.holds);
    }

    #[test]
    fn equivariance_euclidean_projection() {
        let e2 = GroupModel::euclidean(2).unwrap();
        let e1 = GroupModel::euclidean(1).unwrap();
        let a = AutomorphismModel::linear(
            &e2,
            Matrix::from_diagonal(&Vector::from_column_slice(&[2., 1.])),
        )
        .unwrap();
        let a1 = AutomorphismModel::linear(&e1, Matrix::from_element(1, 1, 1.0)).unwrap();
        let pi = PolyMap::new(
            2,
            vec![vec![Monomial {
                coeff: 1.0,
                powers: vec![0, 1],
            }]],
        )
        .unwrap();
        let report = equivariance_check(&e2, &a, &pi, &e1, &a1, 1e-9, 11).unwrap();
        assert!(report.holds);
    }

    #[test]
    fn equivariance_precondition_failure() {
        let e2 = GroupModel::euclidean(2).unwrap();
        let a = AutomorphismModel::linear(
            &e2,
            Matrix::from_diagonal(&Vector::from_column_slice(&[2., 1.])),
        )
        .unwrap();
        let e1 = GroupModel::euclidean(1).unwrap();
        // Projecting onto the first coordinate sends multiplication by 2 to
        // multiplication by 1 downstairs, which cannot commute.
        let a1 = AutomorphismModel::linear(&e1, Matrix::from_element(1, 1, 1.0)).unwrap();
        let pi = PolyMap::new(
            2,
            vec![vec![Monomial {
                coeff: 1.0,
                powers: vec![1, 0],
            }]],
        )
        .unwrap();
        assert!(matches!(
            equivariance_check(&e2, &a, &pi, &e1, &a1, 1e-9, 11),
            Err(Error::Precondition(_))
        ));
    }
}
