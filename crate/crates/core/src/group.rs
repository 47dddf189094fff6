//! Chart arithmetic for the supported group families.
//!
//! Each family is modelled in a fixed global chart:
//!
//! * `Euclidean(d)` — `ℝ^d` with addition; the chart and the Lie algebra
//!   coincide.
//! * `Aff2` — the affine half-plane `ℝ⁺ ⋉ ℝ` with chart `(x, y)`, `x > 0`,
//!   identity `(1, 0)` and product `(x₁,y₁)·(x₂,y₂) = (x₁x₂, y₂ + x₂y₁)`.
//! * `Heisenberg` — `ℝ³` with product
//!   `(x₁,x₂,x₃)·(y₁,y₂,y₃) = (x₁+y₁+x₂y₃, x₂+y₂, x₃+y₃)`.
//! * `Nilpotent` — exponential coordinates on a simply connected nilpotent
//!   group given by structure constants; the product is the (terminating)
//!   Baker–Campbell–Hausdorff series.
//!
//! Groups are abstract chart models rather than forced matrix
//! representations; the faithful matrix pictures appear only in test oracles.
//! (The `Aff2` chart product corresponds to an *anti*-homomorphism of the
//! usual 2×2 affine matrices, so working in the chart sidesteps any
//! composition-order confusion.)

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::bch;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Largest nilpotency step supported by the truncated BCH product.
pub const MAX_NILPOTENCY_STEP: usize = 5;

/// Supported group families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Euclidean,
    Aff2,
    Heisenberg,
    Nilpotent,
}

/// Element of the Lie algebra in coordinates w.r.t. the model's fixed basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    coords: Vector,
}

impl AlgebraElement {
    pub fn coords(&self) -> &Vector {
        &self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }

    pub(crate) fn from_vector(coords: Vector) -> Self {
        AlgebraElement { coords }
    }
}

/// Group element in the model's global chart.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    coords: Vector,
}

impl GroupElement {
    pub fn coords(&self) -> &Vector {
        &self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }
}

/// Structure constants `c[i][j][k]` with `[e_i, e_j] = Σ_k c[i][j][k] e_k`,
/// stored flat in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureConstants {
    dim: usize,
    c: Vec<f64>,
}

impl StructureConstants {
    pub fn zeros(dim: usize) -> Self {
        StructureConstants {
            dim,
            c: vec![0.0; dim * dim * dim],
        }
    }

    /// Build from a list of `(i, j, k, value)` entries; the antisymmetric
    /// counterpart `(j, i, k, -value)` is filled in automatically.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut sc = Self::zeros(dim);
        for &(i, j, k, v) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Argument(format!(
                    "structure constant index ({i},{j},{k}) out of range for dim {dim}"
                )));
            }
            sc.c[(i * dim + j) * dim + k] += v;
            sc.c[(j * dim + i) * dim + k] -= v;
        }
        Ok(sc)
    }

    pub fn from_flat(dim: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != dim * dim * dim {
            return Err(Error::Argument(format!(
                "structure constant array has length {}, expected {}",
                c.len(),
                dim * dim * dim
            )));
        }
        if !linalg::all_finite(&c) {
            return Err(Error::Argument("structure constants must be finite".into()));
        }
        Ok(StructureConstants { dim, c })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    /// `[x, y]` in basis coordinates.
    pub fn bracket(&self, x: &Vector, y: &Vector) -> Vector {
        let d = self.dim;
        let mut out = Vector::zeros(d);
        for i in 0..d {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..d {
                let yj = y[j];
                if yj == 0.0 {
                    continue;
                }
                for k in 0..d {
                    out[k] += xi * yj * self.at(i, j, k);
                }
            }
        }
        out
    }

    /// Largest absolute antisymmetry defect `c[i][j][k] + c[j][i][k]`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    worst = worst.max((self.at(i, j, k) + self.at(j, i, k)).abs());
                }
            }
        }
        worst
    }

    /// Largest Jacobi residual `‖[e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]‖_∞`
    /// over all basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim;
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
                for k in 0..d {
                    let t1 = self.bracket(&basis[i], &self.bracket(&basis[j], &basis[k]));
                    let t2 = self.bracket(&basis[j], &self.bracket(&basis[k], &basis[i]));
                    let t3 = self.bracket(&basis[k], &self.bracket(&basis[i], &basis[j]));
                    worst = worst.max((t1 + t2 + t3).amax());
                }
            }
        }
        worst
    }

    /// Nilpotency step from the lower central series
    /// `g ⊃ [g,g] ⊃ [g,[g,g]] ⊃ …`, or `None` if the series does not reach
    /// zero within `dim` iterations.
    pub fn nilpotency_step(&self) -> Option<usize> {
        let d = self.dim;
        let basis: Vec<Vector> = (0..d)
            .map(|i| {
                let mut v = Vector::zeros(d);
                v[i] = 1.0;
                v
            })
            .collect();
        let mut current: Vec<Vector> = basis.clone();
        for step in 1..=d + 1 {
            let mut next: Vec<Vector> = Vec::new();
            for b in &basis {
                for v in &current {
                    let w = self.bracket(b, v);
                    if w.amax() > 1e-12 {
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                return Some(step);
            }
            let cols = Matrix::from_columns(&next.iter().map(|v| v.column(0)).collect::<Vec<_>>());
            let (rank, _) = linalg::rank_with_svs(&cols, 1e-10);
            let mut reduced = Vec::with_capacity(rank);
            if rank > 0 {
                // Orthonormal spanning set keeps the span while bounding growth.
                let svd = cols.svd(true, false);
                let u = svd.u.unwrap();
                for c in 0..rank {
                    reduced.push(u.column(c).into_owned());
                }
            }
            current = reduced;
        }
        None
    }
}

/// A group family instance: dimension, structure constants and (for
/// nilpotent families) the nilpotency step.
#[derive(Clone, Debug)]
pub struct GroupModel {
    family: Family,
    dim: usize,
    structure: StructureConstants,
    nilpotency_step: Option<usize>,
}

impl GroupModel {
    /// Additive group `ℝ^d`.
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument(
                "Euclidean dimension must be positive".into(),
            ));
        }
        Ok(GroupModel {
            family: Family::Euclidean,
            dim,
            structure: StructureConstants::zeros(dim),
            nilpotency_step: Some(1),
        })
    }

    /// The affine half-plane `Aff(2,ℝ) = ℝ⁺ ⋉ ℝ`.
    ///
    /// In the chart basis `{∂x, ∂y}` at the identity `(1,0)` the bracket is
    /// `[E₁, E₂] = −E₂`, which follows from the second-order term of the
    /// chart product.
    pub fn aff2() -> Self {
        let structure = StructureConstants::from_entries(2, &[(0, 1, 1, -1.0)]).unwrap();
        GroupModel {
            family: Family::Aff2,
            dim: 2,
            structure,
            nilpotency_step: None,
        }
    }

    /// The 3-dimensional Heisenberg group with `[e₂, e₃] = e₁`.
    pub fn heisenberg() -> Self {
        let structure = StructureConstants::from_entries(3, &[(1, 2, 0, 1.0)]).unwrap();
        GroupModel {
            family: Family::Heisenberg,
            dim: 3,
            structure,
            nilpotency_step: Some(2),
        }
    }

    /// A simply connected nilpotent group in exponential coordinates, given
    /// by structure constants. The constants must be antisymmetric, satisfy
    /// the Jacobi identity within `1e-12`, and be nilpotent of step ≤ 5.
    pub fn nilpotent(structure: StructureConstants) -> Result<Self> {
        let asym = structure.antisymmetry_residual();
        if asym > 1e-12 {
            return Err(Error::Model(format!(
                "structure constants are not antisymmetric (residual {asym:.3e})"
            )));
        }
        let jac = structure.jacobi_residual();
        if jac > 1e-12 {
            return Err(Error::Model(format!(
                "structure constants violate the Jacobi identity (residual {jac:.3e})"
            )));
        }
        let step = structure.nilpotency_step().ok_or_else(|| {
            Error::Model("lower central series does not terminate: algebra is not nilpotent".into())
        })?;
        if step > MAX_NILPOTENCY_STEP {
            return Err(Error::Model(format!(
                "nilpotency step {step} exceeds the supported maximum {MAX_NILPOTENCY_STEP}"
            )));
        }
        let dim = structure.dim();
        Ok(GroupModel {
            family: Family::Nilpotent,
            dim,
            structure,
            nilpotency_step: Some(step),
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure_constants(&self) -> &StructureConstants {
        &self.structure
    }

    pub fn nilpotency_step(&self) -> Option<usize> {
        self.nilpotency_step
    }

    pub fn is_nilpotent(&self) -> bool {
        self.nilpotency_step.is_some()
    }

    /// The identity element (chart origin; `(1,0)` for `Aff2`).
    pub fn identity(&self) -> GroupElement {
        let mut coords = Vector::zeros(self.dim);
        if self.family == Family::Aff2 {
            coords[0] = 1.0;
        }
        GroupElement { coords }
    }

    /// Validate chart coordinates and build a group element.
    pub fn element(&self, coords: &[f64]) -> Result<GroupElement> {
        if coords.len() != self.dim {
            return Err(Error::Argument(format!(
                "element has {} coordinates, model dimension is {}",
                coords.len(),
                self.dim
            )));
        }
        if !linalg::all_finite(coords) {
            return Err(Error::Domain("element coordinates must be finite".into()));
        }
        if self.family == Family::Aff2 && coords[0] <= 0.0 {
            return Err(Error::Domain(format!(
                "Aff2 chart requires a strictly positive first coordinate, got {}",
                coords[0]
            )));
        }
        Ok(GroupElement {
            coords: DVector::from_column_slice(coords),
        })
    }

    /// Validate coordinates and build an algebra element.
    pub fn algebra_element(&self, coords: &[f64]) -> Result<AlgebraElement> {
        if coords.len() != self.dim {
            return Err(Error::Argument(format!(
                "algebra element has {} coordinates, model dimension is {}",
                coords.len(),
                self.dim
            )));
        }
        if !linalg::all_finite(coords) {
            return Err(Error::Domain("algebra coordinates must be finite".into()));
        }
        Ok(AlgebraElement {
            coords: DVector::from_column_slice(coords),
        })
    }

    fn check(&self, g: &GroupElement) -> Result<()> {
        if g.coords.len() != self.dim {
            return Err(Error::Argument(format!(
                "element dimension {} does not match model dimension {}",
                g.coords.len(),
                self.dim
            )));
        }
        if self.family == Family::Aff2 && g.coords[0] <= 0.0 {
            return Err(Error::Domain(format!(
                "Aff2 chart requires a strictly positive first coordinate, got {}",
                g.coords[0]
            )));
        }
        Ok(())
    }

    /// Group product in chart coordinates.
    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        self.check(h)?;
        let (a, b) = (&g.coords, &h.coords);
        let coords = match self.family {
            Family::Euclidean => a + b,
            Family::Aff2 => {
                let x = a[0] * b[0];
                if x <= 0.0 || !x.is_finite() {
                    return Err(Error::Domain(
                        "Aff2 product left the chart (first coordinate must stay positive)".into(),
                    ));
                }
                Vector::from_column_slice(&[x, b[1] + b[0] * a[1]])
            }
            Family::Heisenberg => {
                Vector::from_column_slice(&[a[0] + b[0] + a[1] * b[2], a[1] + b[1], a[2] + b[2]])
            }
            Family::Nilpotent => {
                let step = self.nilpotency_step.expect("nilpotent family has a step");
                return bch::bch(
                    self,
                    &AlgebraElement { coords: a.clone() },
                    &AlgebraElement { coords: b.clone() },
                    step,
                )
                .map(|z| GroupElement { coords: z.coords });
            }
        };
        Ok(GroupElement { coords })
    }

    /// Group inverse.
    pub fn inv(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        let a = &g.coords;
        let coords = match self.family {
            Family::Euclidean | Family::Nilpotent => -a,
            Family::Aff2 => Vector::from_column_slice(&[1.0 / a[0], -a[1] / a[0]]),
            Family::Heisenberg => Vector::from_column_slice(&[-a[0] + a[1] * a[2], -a[1], -a[2]]),
        };
        Ok(GroupElement { coords })
    }

    /// Exponential map. Globally defined (and polynomial) on the nilpotent
    /// families; on `Aff2` it is the closed form `(e^α, β·(e^α−1)/α)` with a
    /// series fallback near `α = 0`.
    pub fn exp(&self, x: &AlgebraElement) -> Result<GroupElement> {
        if x.coords.len() != self.dim {
            return Err(Error::Argument(format!(
                "algebra element dimension {} does not match model dimension {}",
                x.coords.len(),
                self.dim
            )));
        }
        let a = &x.coords;
        let coords = match self.family {
            Family::Euclidean | Family::Nilpotent => a.clone(),
            Family::Aff2 => Vector::from_column_slice(&[a[0].exp(), a[1] * expm1_over(a[0])]),
            Family::Heisenberg => {
                Vector::from_column_slice(&[a[0] + a[1] * a[2] / 2.0, a[1], a[2]])
            }
        };
        Ok(GroupElement { coords })
    }

    /// Logarithm, inverse of [`GroupModel::exp`] on its image (all of `G`
    /// for the supported families).
    pub fn log(&self, g: &GroupElement) -> Result<AlgebraElement> {
        self.check(g)?;
        let a = &g.coords;
        let coords = match self.family {
            Family::Euclidean | Family::Nilpotent => a.clone(),
            Family::Aff2 => {
                let alpha = a[0].ln();
                Vector::from_column_slice(&[alpha, a[1] / expm1_over(alpha)])
            }
            Family::Heisenberg => {
                Vector::from_column_slice(&[a[0] - a[1] * a[2] / 2.0, a[1], a[2]])
            }
        };
        Ok(AlgebraElement { coords })
    }

    /// Lie bracket via the structure constants.
    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        if x.coords.len() != self.dim || y.coords.len() != self.dim {
            return Err(Error::Argument(
                "bracket arguments must match the model dimension".into(),
            ));
        }
        Ok(AlgebraElement {
            coords: self.structure.bracket(&x.coords, &y.coords),
        })
    }

    /// Truncated BCH series `C(X,Y)` up to the given order; exact when the
    /// model is nilpotent with step ≤ `order`.
    pub fn bch(
        &self,
        x: &AlgebraElement,
        y: &AlgebraElement,
        order: usize,
    ) -> Result<AlgebraElement> {
        bch::bch(self, x, y, order)
    }

    /// Euclidean distance between chart coordinates.
    pub fn chart_distance(&self, g: &GroupElement, h: &GroupElement) -> f64 {
        (&g.coords - &h.coords).norm()
    }

    /// A random element with chart coordinates of order one, valid for the
    /// family's chart (Aff2 first coordinates land in `[e⁻¹, e]`).
    pub fn random_element<R: rand::Rng>(&self, rng: &mut R) -> GroupElement {
        let mut coords = Vector::zeros(self.dim);
        for i in 0..self.dim {
            coords[i] = rng.gen_range(-1.0..1.0);
        }
        if self.family == Family::Aff2 {
            coords[0] = coords[0].exp();
        }
        GroupElement { coords }
    }

    /// A random algebra element with coordinates in `[-1, 1]`.
    pub fn random_algebra_element<R: rand::Rng>(&self, rng: &mut R) -> AlgebraElement {
        let mut coords = Vector::zeros(self.dim);
        for i in 0..self.dim {
            coords[i] = rng.gen_range(-1.0..1.0);
        }
        AlgebraElement { coords }
    }
}

/// `(e^α − 1)/α` with its removable singularity handled by a series for
/// `|α| < 1e-6`.
fn expm1_over(alpha: f64) -> f64 {
    if alpha.abs() < 1e-6 {
        1.0 + alpha / 2.0 + alpha * alpha / 6.0 + alpha * alpha * alpha / 24.0
    } else {
        alpha.exp_m1() / alpha
    }
}
