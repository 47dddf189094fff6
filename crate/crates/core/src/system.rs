//! The discrete-time linear control system model.
//!
//! A system is a group model `G`, an automorphism `f₀`, a control-to-group
//! map `β(u) = f_u(e)` and a control range `U ∋ 0`. One step of the dynamics
//! is
//!
//! `step(g, u) = f_u(g) = β(u) · f₀(g)`
//!
//! and `φ(k, g, u) = f_{u_{k−1}} ∘ ⋯ ∘ f_{u_0}(g)` is the solution map. The
//! solutions from an arbitrary start factor through the identity:
//! `φ(k, g, u) = φ(k, e, u) · f₀^k(g)` (checked numerically by
//! [`LinearSystem::translation_identity_residual`]).
//!
//! The *reversed* system has automorphism `f₀⁻¹` and translation
//! `β*(u) = f_u⁻¹(e) = f₀⁻¹(β(u)⁻¹)`; its step map is exactly `f_u⁻¹`, so
//! its reachable sets are the original controllable sets.
//!
//! Exact set claims are only made for finite control sets (`FiniteSet`
//! ranges, a flagged sub-sampling of the compact range `U`); box ranges feed
//! the cloud simulator in [`crate::sim`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel};
use crate::linalg::Matrix;
use crate::poly::{Poly, PolyMap};
use crate::spectral::AutomorphismModel;

/// Chart-coordinate tolerance used to deduplicate enumerated set elements.
pub const DEDUP_TOL: f64 = 1e-9;

/// Admissible control values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ControlRange {
    /// A product of intervals with `lo < 0 < hi` per channel (a compact
    /// neighborhood of 0).
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// A finite sub-sampling of the control range; must contain 0. Set
    /// claims made over it are one-sided (reachability witnesses).
    #[serde(rename = "finite_set")]
    FiniteSet { points: Vec<Vec<f64>> },
}

impl ControlRange {
    /// Symmetric box `[-r, r]^channels`.
    pub fn symmetric_box(channels: usize, r: f64) -> Result<Self> {
        let range = ControlRange::Box {
            lo: vec![-r; channels],
            hi: vec![r; channels],
        };
        range.validate()?;
        Ok(range)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ControlRange::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(Error::Argument(
                        "box bounds must be non-empty and match".into(),
                    ));
                }
                for (l, h) in lo.iter().zip(hi) {
                    if !(l.is_finite() && h.is_finite() && *l < 0.0 && 0.0 < *h) {
                        return Err(Error::Argument(format!(
                            "box range must satisfy lo < 0 < hi per channel, got [{l}, {h}]"
                        )));
                    }
                }
            }
            ControlRange::FiniteSet { points } => {
                if points.is_empty() {
                    return Err(Error::Argument("finite control set is empty".into()));
                }
                let m = points[0].len();
                if m == 0 {
                    return Err(Error::Argument(
                        "controls must have at least one channel".into(),
                    ));
                }
                if points.iter().any(|p| p.len() != m) {
                    return Err(Error::Argument(
                        "control points have mixed channel counts".into(),
                    ));
                }
                let has_zero = points.iter().any(|p| p.iter().all(|x| x.abs() <= 1e-12));
                if !has_zero {
                    return Err(Error::Argument(
                        "finite control set must contain 0 (the range is a neighborhood of 0)"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        match self {
            ControlRange::Box { lo, .. } => lo.len(),
            ControlRange::FiniteSet { points } => points[0].len(),
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        if u.len() != self.channels() {
            return false;
        }
        match self {
            ControlRange::Box { lo, hi } => u
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (l, h))| *l <= *x && *x <= *h),
            ControlRange::FiniteSet { points } => points
                .iter()
                .any(|p| p.iter().zip(u).all(|(a, b)| (a - b).abs() <= 1e-12)),
        }
    }

    /// Componentwise strict interior (defined for box ranges only).
    pub fn is_interior(&self, u: &[f64]) -> bool {
        match self {
            ControlRange::Box { lo, hi } => {
                u.len() == lo.len()
                    && u.iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(x, (l, h))| *l < *x && *x < *h)
            }
            ControlRange::FiniteSet { .. } => false,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ControlRange::FiniteSet { .. })
    }

    /// The points of a finite range.
    pub fn finite_points(&self) -> Result<&[Vec<f64>]> {
        match self {
            ControlRange::FiniteSet { points } => Ok(points),
            ControlRange::Box { .. } => Err(Error::Precondition(
                "operation requires a finite control set, got a box range".into(),
            )),
        }
    }
}

/// The control-to-group map `u ↦ f_u(e)`.
#[derive(Clone, Debug)]
pub enum ControlMap {
    /// `u ↦ B u` in chart coordinates (Euclidean spaces, exponential
    /// coordinates).
    LinearB(Matrix),
    /// The Aff(2,ℝ) form `u ↦ (h(u), g(u))` with `h(0) = 1`, `g(0) = 0`.
    Aff2Poly { h: Poly, g: Poly },
    /// A polynomial map from controls to chart coordinates.
    Poly(PolyMap),
    /// `u ↦ f₀⁻¹(β(u)⁻¹)`, the translation of a reversed system.
    Reversed {
        inner: Box<ControlMap>,
        aut_inv: AutomorphismModel,
    },
}

impl ControlMap {
    pub fn channels(&self) -> usize {
        match self {
            ControlMap::LinearB(b) => b.ncols(),
            ControlMap::Aff2Poly { .. } => 1,
            ControlMap::Poly(p) => p.arity,
            ControlMap::Reversed { inner, .. } => inner.channels(),
        }
    }

    pub fn eval(&self, model: &GroupModel, u: &[f64]) -> Result<GroupElement> {
        if u.len() != self.channels() {
            return Err(Error::Argument(format!(
                "control has {} channels, map expects {}",
                u.len(),
                self.channels()
            )));
        }
        match self {
            ControlMap::LinearB(b) => {
                let coords = b * crate::linalg::Vector::from_column_slice(u);
                model.element(coords.as_slice())
            }
            ControlMap::Aff2Poly { h, g } => model.element(&[h.eval(u[0]), g.eval(u[0])]),
            ControlMap::Poly(p) => model.element(&p.eval(u)?),
            ControlMap::Reversed { inner, aut_inv } => {
                let b = inner.eval(model, u)?;
                aut_inv.apply(model, &model.inv(&b)?)
            }
        }
    }
}

/// A finite admissible control word `u_0, …, u_{k−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSequence {
    controls: Vec<Vec<f64>>,
}

impl ControlSequence {
    /// Validate every entry against the range.
    pub fn new(range: &ControlRange, controls: Vec<Vec<f64>>) -> Result<Self> {
        for (i, u) in controls.iter().enumerate() {
            if !range.contains(u) {
                return Err(Error::Argument(format!(
                    "control #{i} {u:?} is outside the admissible range"
                )));
            }
        }
        Ok(ControlSequence { controls })
    }

    /// The all-zero word of length `k`.
    pub fn zeros(channels: usize, k: usize) -> Self {
        ControlSequence {
            controls: vec![vec![0.0; channels]; k],
        }
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn controls(&self) -> &[Vec<f64>] {
        &self.controls
    }
}

/// A discrete-time linear control system on a group model.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    model: GroupModel,
    aut: AutomorphismModel,
    beta: ControlMap,
    range: ControlRange,
}

impl LinearSystem {
    pub fn new(
        model: GroupModel,
        aut: AutomorphismModel,
        beta: ControlMap,
        range: ControlRange,
    ) -> Result<Self> {
        range.validate()?;
        if beta.channels() != range.channels() {
            return Err(Error::Argument(format!(
                "control map has {} channels, range has {}",
                beta.channels(),
                range.channels()
            )));
        }
        if let ControlMap::Aff2Poly { h, g } = &beta {
            if h.coeffs.first().copied() != Some(1.0)
                || g.coeffs.first().copied().unwrap_or(0.0) != 0.0
            {
                return Err(Error::Argument(
                    "Aff2 control maps require h(0) = 1 and g(0) = 0".into(),
                ));
            }
        }
        let sys = LinearSystem {
            model,
            aut,
            beta,
            range,
        };
        // β(0) = e: the zero control must act as the bare automorphism.
        let zero = vec![0.0; sys.range.channels()];
        let b0 = sys.beta.eval(&sys.model, &zero)?;
        let e = sys.model.identity();
        if sys.model.chart_distance(&b0, &e) > 1e-12 {
            return Err(Error::Model(format!(
                "β(0) must be the identity, distance {:.3e}",
                sys.model.chart_distance(&b0, &e)
            )));
        }
        Ok(sys)
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn aut(&self) -> &AutomorphismModel {
        &self.aut
    }

    pub fn beta(&self) -> &ControlMap {
        &self.beta
    }

    pub fn range(&self) -> &ControlRange {
        &self.range
    }

    pub fn channels(&self) -> usize {
        self.range.channels()
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// `f_u(g) = β(u) · f₀(g)` without admissibility enforcement (the maps
    /// are globally defined; range membership is a modelling constraint).
    pub fn map_fu(&self, g: &GroupElement, u: &[f64]) -> Result<GroupElement> {
        let b = self.beta.eval(&self.model, u)?;
        let fg = self.aut.apply(&self.model, g)?;
        self.model.mul(&b, &fg)
    }

    /// `f_u⁻¹(g) = f₀⁻¹(β(u)⁻¹ · g)`.
    pub fn map_fu_inv(&self, g: &GroupElement, u: &[f64]) -> Result<GroupElement> {
        let b = self.beta.eval(&self.model, u)?;
        let shifted = self.model.mul(&self.model.inv(&b)?, g)?;
        self.aut.apply_inv(&self.model, &shifted)
    }

    /// One step of the dynamics; the control must be admissible.
    pub fn step(&self, g: &GroupElement, u: &[f64]) -> Result<GroupElement> {
        if !self.range.contains(u) {
            return Err(Error::Argument(format!(
                "control {u:?} is outside the admissible range"
            )));
        }
        self.map_fu(g, u)
    }

    /// `φ(k, g, u)`: the k-fold composition along the control word.
    pub fn trajectory(
        &self,
        k: usize,
        g: &GroupElement,
        useq: &ControlSequence,
    ) -> Result<GroupElement> {
        if useq.len() < k {
            return Err(Error::Argument(format!(
                "control sequence has length {}, need at least {k}",
                useq.len()
            )));
        }
        self.trajectory_raw(k, g, useq.controls())
    }

    pub(crate) fn trajectory_raw(
        &self,
        k: usize,
        g: &GroupElement,
        controls: &[Vec<f64>],
    ) -> Result<GroupElement> {
        let mut state = g.clone();
        for u in controls.iter().take(k) {
            state = self.map_fu(&state, u)?;
        }
        Ok(state)
    }

    /// `f₀^k(g)` for any integer `k`.
    pub fn f0_pow(&self, g: &GroupElement, k: i64) -> Result<GroupElement> {
        self.aut.apply_pow(&self.model, g, k)
    }

    /// The closed-form parameters `(a, d, h'(0), g'(0))` of an Aff(2,ℝ)
    /// system, when both the automorphism and the control map are in the
    /// canonical Aff2 form.
    pub fn aff2_params(&self) -> Option<(f64, f64, f64, f64)> {
        match (self.aut.kind(), &self.beta) {
            (crate::spectral::AutKind::Aff2 { a, d }, ControlMap::Aff2Poly { h, g }) => {
                Some((*a, *d, h.deriv(0.0), g.deriv(0.0)))
            }
            _ => None,
        }
    }

    /// Chart distance between `φ(k,g,u)` and `φ(k,e,u)·f₀^k(g)`; zero up to
    /// rounding for a genuine linear system.
    pub fn translation_identity_residual(
        &self,
        k: usize,
        g: &GroupElement,
        useq: &ControlSequence,
    ) -> Result<f64> {
        let lhs = self.trajectory(k, g, useq)?;
        let from_e = self.trajectory(k, &self.model.identity(), useq)?;
        let rhs = self.model.mul(&from_e, &self.f0_pow(g, k as i64)?)?;
        Ok(self.model.chart_distance(&lhs, &rhs))
    }

    /// The reversed system: automorphism `f₀⁻¹`, translation `f_u⁻¹(e)`.
    /// Its step map is `f_u⁻¹`, so reversing twice gives back the original
    /// dynamics (as maps).
    pub fn reversed(&self) -> Result<LinearSystem> {
        let aut_inv = self.aut.inverse(&self.model)?;
        let beta = ControlMap::Reversed {
            inner: Box::new(self.beta.clone()),
            aut_inv: aut_inv.clone(),
        };
        LinearSystem::new(self.model.clone(), aut_inv, beta, self.range.clone())
    }

    /// Exact enumeration of `ℛ_k(from)` over a finite control set, with
    /// grid deduplication at [`DEDUP_TOL`].
    pub fn reachable_set_finite(&self, k: usize, from: &GroupElement) -> Result<Vec<GroupElement>> {
        self.enumerate_levels(k, from, false)
    }

    /// Exact enumeration of the controllable set `𝒞_k(to)` (states that
    /// reach `to` in exactly `k` steps) by inverting steps.
    pub fn controllable_set_finite(
        &self,
        k: usize,
        to: &GroupElement,
    ) -> Result<Vec<GroupElement>> {
        self.enumerate_levels(k, to, true)
    }

    fn enumerate_levels(
        &self,
        k: usize,
        start: &GroupElement,
        backward: bool,
    ) -> Result<Vec<GroupElement>> {
        let points = self.range.finite_points()?.to_vec();
        let nu = points.len() as f64;
        if nu.powi(k as i32) > 1e6 {
            return Err(Error::Resource(format!(
                "|U|^k = {} exceeds the exact-enumeration guard of 1e6",
                nu.powi(k as i32)
            )));
        }
        let mut level = vec![start.clone()];
        for _ in 0..k {
            let mut next = Vec::new();
            let mut seen = GridSet::new(DEDUP_TOL, self.model.dim());
            for g in &level {
                for u in &points {
                    let image = if backward {
                        self.map_fu_inv(g, u)?
                    } else {
                        self.map_fu(g, u)?
                    };
                    if seen.insert(image.as_slice()) {
                        next.push(image);
                    }
                }
            }
            level = next;
        }
        Ok(level)
    }
}

/// Spatial-hash set over a fixed grid, used for deduplicating chart points.
pub(crate) struct GridSet {
    cell: f64,
    dim: usize,
    keys: std::collections::HashSet<Vec<i64>>,
}

impl GridSet {
    pub fn new(cell: f64, dim: usize) -> Self {
        GridSet {
            cell,
            dim,
            keys: std::collections::HashSet::new(),
        }
    }

    pub fn key(&self, coords: &[f64]) -> Vec<i64> {
        coords
            .iter()
            .map(|&x| (x / self.cell).round() as i64)
            .collect()
    }

    /// Insert; returns false if the cell was already occupied (the first
    /// representative wins).
    pub fn insert(&mut self, coords: &[f64]) -> bool {
        debug_assert_eq!(coords.len(), self.dim);
        self.keys.insert(self.key(coords))
    }

    #[allow(dead_code)]
    pub fn len(&self) -> usize {
        self.keys.len()
    }
}

/// Is every point of `a` within `tol` of some point of `b`?
pub fn set_subset(model: &GroupModel, a: &[GroupElement], b: &[GroupElement], tol: f64) -> bool {
    a.iter()
        .all(|p| b.iter().any(|q| model.chart_distance(p, q) <= tol))
}

/// Symmetric tolerance-matching set equality.
pub fn set_eq(model: &GroupModel, a: &[GroupElement], b: &[GroupElement], tol: f64) -> bool {
    set_subset(model, a, b, tol) && set_subset(model, b, a, tol)
}
