//! Control vector fields, adjoint chains and accessibility rank tests.
//!
//! For interior controls `u` the fields
//!
//! `X⁺_u(x) = ∂/∂v|₀ f_u⁻¹∘f_{u+v}(x)` and
//! `X⁻_u(x) = ∂/∂v|₀ f_u∘f_{u+v}⁻¹(x)`
//!
//! measure how the one-step dynamics reacts to control perturbations. Their
//! pullbacks along composed flows,
//!
//! `Ad_{u_k…u_1} X⁺_{u_0}(x) = (dφ_x)⁻¹ X⁺_{u_0}(φ(x))`,
//! `φ = f_{u_k}∘⋯∘f_{u_1}`
//!
//! (and the inverse-composition variant for the minus direction), span the
//! distribution Γ⁺(x) / Γ⁻(x). The system is forward (resp. backward)
//! accessible iff that span has full dimension at every point, which
//! [`gamma_rank`] estimates by stacking sampled chain vectors and
//! thresholding singular values. Full rank is a sound certificate up to the
//! finite-difference tolerance; a rank deficit over finitely many chains and
//! samples is only evidence, so such reports carry `heuristic_negative`.
//!
//! [`regular_pair_rank`] tests the control-derivative rank of the solution
//! map `u ↦ φ(k, g, u)`: full rank makes `(g, u)` a regular pair, certifying
//! `φ(k,g,u) ∈ int ℛ_k(g)`, and at `g = e` with `u` interior it proves that
//! `ℛ` is open.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::linalg::{self, Matrix, Vector};
use crate::system::{ControlRange, ControlSequence, LinearSystem};

/// Finite-difference step for first derivatives in the control direction.
pub const FD_STEP_CONTROL: f64 = 1e-5;
/// Finite-difference step for state Jacobians.
pub const FD_STEP_STATE: f64 = 1e-6;
/// Default relative singular-value threshold for numerical ranks.
pub const DEFAULT_RANK_TOL: f64 = 1e-7;

/// A tangent vector in chart coordinates, attached to a base point.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub base: GroupElement,
    pub vec: Vector,
}

/// Direction of an adjoint chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainDirection {
    /// Forward fields `X⁺` transported along `f_{u_k}∘⋯∘f_{u_1}`.
    Plus,
    /// Backward fields `X⁻` transported along `f_{u_k}⁻¹∘⋯∘f_{u_1}⁻¹`.
    Minus,
}

/// Numerical rank of a stacked family of vectors.
#[derive(Clone, Debug)]
pub struct RankReport {
    pub rank: usize,
    pub dim: usize,
    pub singular_values: Vec<f64>,
    pub vectors_used: usize,
    /// `rank == dim`.
    pub accessible: bool,
    pub tol: f64,
    /// Set when the verdict is negative: finitely many chains and control
    /// samples can never refute accessibility, only fail to certify it.
    pub heuristic_negative: bool,
}

impl RankReport {
    fn from_vectors(vectors: &[Vector], dim: usize, tol: f64) -> Self {
        let mut sorted: Vec<Vector> = vectors.to_vec();
        sorted.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let (rank, svs) = if sorted.is_empty() {
            (0, Vec::new())
        } else {
            let m = Matrix::from_columns(&sorted.iter().map(|v| v.column(0)).collect::<Vec<_>>());
            linalg::rank_with_svs(&m, tol)
        };
        let accessible = rank == dim;
        RankReport {
            rank,
            dim,
            singular_values: svs.into_iter().take(dim).collect(),
            vectors_used: sorted.len(),
            accessible,
            tol,
            heuristic_negative: !accessible,
        }
    }
}

fn require_interior(sys: &LinearSystem, u: &[f64]) -> Result<()> {
    if !sys.range().is_interior(u) {
        return Err(Error::Precondition(format!(
            "control {u:?} must be strictly interior to the box range (finite sets have no interior)"
        )));
    }
    Ok(())
}

fn control_derivative<F>(channels: usize, u: &[f64], eval: F) -> Result<Vec<Vector>>
where
    F: Fn(&[f64]) -> Result<GroupElement>,
{
    let mut out = Vec::with_capacity(channels);
    let h = FD_STEP_CONTROL;
    for c in 0..channels {
        let mut up = u.to_vec();
        up[c] += h;
        let mut um = u.to_vec();
        um[c] -= h;
        let gp = eval(&up)?;
        let gm = eval(&um)?;
        out.push((gp.coords() - gm.coords()) / (2.0 * h));
    }
    Ok(out)
}

/// `X⁺_u(x)` per control channel (central differences, step `1e-5`).
pub fn x_plus(sys: &LinearSystem, u: &[f64], x: &GroupElement) -> Result<Vec<TangentVector>> {
    require_interior(sys, u)?;
    let vecs = control_derivative(sys.channels(), u, |uv| {
        let fwd = sys.map_fu(x, uv)?;
        sys.map_fu_inv(&fwd, u)
    })?;
    Ok(vecs
        .into_iter()
        .map(|v| TangentVector {
            base: x.clone(),
            vec: v,
        })
        .collect())
}

/// `X⁻_u(x)` per control channel.
pub fn x_minus(sys: &LinearSystem, u: &[f64], x: &GroupElement) -> Result<Vec<TangentVector>> {
    require_interior(sys, u)?;
    let vecs = control_derivative(sys.channels(), u, |uv| {
        let back = sys.map_fu_inv(x, uv)?;
        sys.map_fu(&back, u)
    })?;
    Ok(vecs
        .into_iter()
        .map(|v| TangentVector {
            base: x.clone(),
            vec: v,
        })
        .collect())
}

fn compose(
    sys: &LinearSystem,
    direction: ChainDirection,
    controls: &[Vec<f64>],
    x: &GroupElement,
) -> Result<GroupElement> {
    let mut state = x.clone();
    for u in controls {
        state = match direction {
            ChainDirection::Plus => sys.map_fu(&state, u)?,
            ChainDirection::Minus => sys.map_fu_inv(&state, u)?,
        };
    }
    Ok(state)
}

/// Central-difference Jacobian of the composed flow at `x` (step `1e-6`).
fn composition_jacobian(
    sys: &LinearSystem,
    direction: ChainDirection,
    controls: &[Vec<f64>],
    x: &GroupElement,
) -> Result<Matrix> {
    let d = sys.dim();
    let h = FD_STEP_STATE;
    let mut jac = Matrix::zeros(d, d);
    for j in 0..d {
        let mut cp = x.as_slice().to_vec();
        cp[j] += h;
        let mut cm = x.as_slice().to_vec();
        cm[j] -= h;
        let gp = compose(sys, direction, controls, &sys.model().element(&cp)?)?;
        let gm = compose(sys, direction, controls, &sys.model().element(&cm)?)?;
        for i in 0..d {
            jac[(i, j)] = (gp.as_slice()[i] - gm.as_slice()[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Adjoint-transported control field: the pullback of `X^±_{u_0}` along the
/// composition of the outer controls, evaluated at `x`. An empty chain
/// returns the raw field.
pub fn ad_chain(
    sys: &LinearSystem,
    direction: ChainDirection,
    outer_controls: &[Vec<f64>],
    u0: &[f64],
    x: &GroupElement,
) -> Result<Vec<TangentVector>> {
    for u in outer_controls {
        require_interior(sys, u)?;
    }
    if outer_controls.is_empty() {
        return match direction {
            ChainDirection::Plus => x_plus(sys, u0, x),
            ChainDirection::Minus => x_minus(sys, u0, x),
        };
    }
    let composed = compose(sys, direction, outer_controls, x)?;
    let field = match direction {
        ChainDirection::Plus => x_plus(sys, u0, &composed)?,
        ChainDirection::Minus => x_minus(sys, u0, &composed)?,
    };
    let jac = composition_jacobian(sys, direction, outer_controls, x)?;
    let det = jac.clone().lu().determinant();
    if !det.is_finite() || det.abs() < 1e-10 {
        return Err(Error::Numerical(format!(
            "composition Jacobian is numerically singular (|det| = {:.3e})",
            det.abs()
        )));
    }
    field
        .into_iter()
        .map(|tv| {
            let v = linalg::solve(&jac, &tv.vec, 1e-10)?;
            Ok(TangentVector {
                base: x.clone(),
                vec: v,
            })
        })
        .collect()
}

/// Options for the Γ-rank sampling.
#[derive(Clone, Copy, Debug)]
pub struct GammaOptions {
    /// Longest adjoint chain (number of outer controls).
    pub depth: usize,
    /// Extra pseudo-random interior control tuples per chain length.
    pub samples: usize,
    /// Relative singular-value threshold.
    pub tol: f64,
    pub seed: u64,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions {
            depth: 3,
            samples: 8,
            tol: DEFAULT_RANK_TOL,
            seed: 42,
        }
    }
}

/// Deterministic interior control lattice `{lo/2, 0, hi/2}` per channel
/// (cross product over channels).
fn interior_lattice(range: &ControlRange) -> Result<Vec<Vec<f64>>> {
    let (lo, hi) = match range {
        ControlRange::Box { lo, hi } => (lo, hi),
        ControlRange::FiniteSet { .. } => {
            return Err(Error::Precondition(
                "accessibility sampling requires a box control range".into(),
            ))
        }
    };
    let mut lattice: Vec<Vec<f64>> = vec![Vec::new()];
    for c in 0..lo.len() {
        let choices = [lo[c] / 2.0, 0.0, hi[c] / 2.0];
        let mut next = Vec::with_capacity(lattice.len() * 3);
        for prefix in &lattice {
            for &v in &choices {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        lattice = next;
    }
    Ok(lattice)
}

/// Index odometer over `slots` positions each ranging over `base` values,
/// capped at `cap` tuples.
fn index_tuples(slots: usize, base: usize, cap: usize) -> Vec<Vec<usize>> {
    let total = (base as f64).powi(slots as i32);
    let count = if total > cap as f64 {
        cap
    } else {
        total as usize
    };
    let mut out = Vec::with_capacity(count);
    let mut idx = vec![0usize; slots];
    for _ in 0..count {
        out.push(idx.clone());
        for slot in (0..slots).rev() {
            idx[slot] += 1;
            if idx[slot] < base {
                break;
            }
            idx[slot] = 0;
        }
    }
    out
}

/// Rank of the sampled span Γ^±(x): adjoint chains of length `0..=depth`
/// over the deterministic interior lattice (the all-zero tuple always
/// included) plus seeded random interior tuples.
pub fn gamma_rank(
    sys: &LinearSystem,
    x: &GroupElement,
    direction: ChainDirection,
    opts: &GammaOptions,
) -> Result<RankReport> {
    if opts.depth < 1 {
        return Err(Error::Argument(
            "gamma_rank depth must be at least 1".into(),
        ));
    }
    let lattice = interior_lattice(sys.range())?;
    let (lo, hi) = match sys.range() {
        ControlRange::Box { lo, hi } => (lo.clone(), hi.clone()),
        ControlRange::FiniteSet { .. } => unreachable!("interior_lattice rejected finite sets"),
    };
    let m = sys.channels();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut vectors: Vec<Vector> = Vec::new();

    for chain_len in 0..=opts.depth {
        let slots = chain_len + 1;
        for combo in index_tuples(slots, lattice.len(), 729) {
            let tuple: Vec<Vec<f64>> = combo.iter().map(|&i| lattice[i].clone()).collect();
            let (u0, outer) = tuple.split_first().unwrap();
            for tv in ad_chain(sys, direction, outer, u0, x)? {
                vectors.push(tv.vec);
            }
        }
        for _ in 0..opts.samples {
            let tuple: Vec<Vec<f64>> = (0..slots)
                .map(|_| {
                    (0..m)
                        .map(|c| {
                            let t: f64 = rng.gen_range(0.1..0.9);
                            lo[c] + t * (hi[c] - lo[c])
                        })
                        .collect()
                })
                .collect();
            let (u0, outer) = tuple.split_first().unwrap();
            for tv in ad_chain(sys, direction, outer, u0, x)? {
                vectors.push(tv.vec);
            }
        }
    }

    Ok(RankReport::from_vectors(&vectors, sys.dim(), opts.tol))
}

/// The closed-form Aff(2,ℝ) accessibility criterion:
/// `h'(0) ≠ 0` and `−a·h'(0) ≠ g'(0)(d−1)`, with equality tested at `1e-12`.
pub fn aff2_accessible(a: f64, d: f64, hp0: f64, gp0: f64) -> Result<bool> {
    if d == 0.0 || !d.is_finite() {
        return Err(Error::Argument("Aff2 automorphisms require d ≠ 0".into()));
    }
    if !(a.is_finite() && hp0.is_finite() && gp0.is_finite()) {
        return Err(Error::Argument(
            "Aff2 accessibility parameters must be finite".into(),
        ));
    }
    Ok(hp0.abs() > 1e-12 && (-a * hp0 - gp0 * (d - 1.0)).abs() > 1e-12)
}

/// Rank of `∂φ(k, g, ·)/∂(u_0 … u_{k−1})` at the given interior control
/// word (central differences). Full rank makes `(g, u)` a regular pair:
/// `φ(k,g,u)` lies in the interior of `ℛ_k(g)`, and at `g = e` it proves
/// that `ℛ` is open.
pub fn regular_pair_rank(
    sys: &LinearSystem,
    g: &GroupElement,
    useq: &ControlSequence,
) -> Result<RankReport> {
    regular_pair_rank_with_tol(sys, g, useq, DEFAULT_RANK_TOL)
}

/// [`regular_pair_rank`] with an explicit singular-value threshold.
pub fn regular_pair_rank_with_tol(
    sys: &LinearSystem,
    g: &GroupElement,
    useq: &ControlSequence,
    tol: f64,
) -> Result<RankReport> {
    for u in useq.controls() {
        require_interior(sys, u)?;
    }
    let jac = control_jacobian(sys, g, useq.controls())?;
    let (rank, svs) = linalg::rank_with_svs(&jac, tol);
    let dim = sys.dim();
    Ok(RankReport {
        rank,
        dim,
        singular_values: svs.into_iter().take(dim).collect(),
        vectors_used: jac.ncols(),
        accessible: rank == dim,
        tol,
        heuristic_negative: rank != dim,
    })
}

/// Central-difference Jacobian of the solution map in the controls,
/// one column per `(step, channel)` in chronological order.
pub fn control_jacobian(
    sys: &LinearSystem,
    g: &GroupElement,
    controls: &[Vec<f64>],
) -> Result<Matrix> {
    let k = controls.len();
    let m = sys.channels();
    let d = sys.dim();
    let h = FD_STEP_CONTROL;
    let mut jac = Matrix::zeros(d, k * m);
    for j in 0..k {
        for c in 0..m {
            let mut up = controls.to_vec();
            up[j][c] += h;
            let mut um = controls.to_vec();
            um[j][c] -= h;
            let gp = sys.trajectory_raw(k, g, &up)?;
            let gm = sys.trajectory_raw(k, g, &um)?;
            for i in 0..d {
                jac[(i, j * m + c)] = (gp.as_slice()[i] - gm.as_slice()[i]) / (2.0 * h);
            }
        }
    }
    Ok(jac)
}

/// Search for a full-rank regular pair at `g` over control words of length
/// `1..=max_k`: the all-zero word first, then the interior lattice (capped),
/// then seeded random interior words. Returns the first certificate found;
/// `None` is not a refutation (and is the only possible answer for finite
/// control sets, which have empty interior).
pub fn search_regular_pair(
    sys: &LinearSystem,
    g: &GroupElement,
    max_k: usize,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<Option<(usize, RankReport)>> {
    if !matches!(sys.range(), ControlRange::Box { .. }) {
        return Ok(None);
    }
    let lattice = interior_lattice(sys.range())?;
    let (lo, hi) = match sys.range() {
        ControlRange::Box { lo, hi } => (lo.clone(), hi.clone()),
        ControlRange::FiniteSet { .. } => unreachable!(),
    };
    let m = sys.channels();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 1..=max_k {
        let mut candidates: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; m]; k]];
        for combo in index_tuples(k, lattice.len(), 729) {
            candidates.push(combo.iter().map(|&i| lattice[i].clone()).collect());
        }
        for _ in 0..samples {
            candidates.push(
                (0..k)
                    .map(|_| {
                        (0..m)
                            .map(|c| {
                                let t: f64 = rng.gen_range(0.1..0.9);
                                lo[c] + t * (hi[c] - lo[c])
                            })
                            .collect()
                    })
                    .collect(),
            );
        }
        for controls in candidates {
            let useq = ControlSequence::new(sys.range(), controls)?;
            let report = regular_pair_rank_with_tol(sys, g, &useq, tol)?;
            if report.accessible {
                return Ok(Some((k, report)));
            }
        }
    }
    Ok(None)
}
