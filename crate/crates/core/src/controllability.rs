//! The verdict engine.
//!
//! Combines the spectral data of `d(f₀)_e` with openness certificates into a
//! structured controllability verdict:
//!
//! * sufficient condition on solvable groups (tag `T3.4`): `ℛ` and `𝒞` open
//!   and `G = G⁰` imply controllability;
//! * the Aff(2,ℝ) closed-form sufficient condition (tag `T3.9`):
//!   `h'(0) ≠ 0`, `−a·h'(0) ≠ g'(0)(d−1)` and `d = 1`;
//! * the nilpotent simply connected equivalence (tag `T4.3`): controllable
//!   **iff** `ℛ`, `𝒞` open and `G = G⁰`;
//! * the classical Euclidean criterion (tag `EUC`): controllable **iff**
//!   `rank[B AB ⋯ A^{d−1}B] = d` and all eigenvalues of `A` have modulus 1.
//!
//! Openness of `ℛ` (resp. `𝒞`) is *proven* only through a full-rank regular
//! pair at the identity of the system (resp. the reversed system); absence
//! of a certificate after the bounded search is never treated as refutation.
//! `NotControllable` is only emitted where an equivalence is available
//! (Euclidean, nilpotent simply connected); for solvable non-nilpotent
//! groups a failed sufficient condition caps the verdict at `Inconclusive`.

use std::fmt;

use crate::accessibility::{
    self, gamma_rank, search_regular_pair, ChainDirection, GammaOptions, DEFAULT_RANK_TOL,
};
use crate::error::{Error, Result};
use crate::group::Family;
use crate::linalg::{self, Matrix};
use crate::spectral::{differential_at_identity, eigensplit, SpectralSplit, DEFAULT_MODULUS_TOL};
use crate::system::{ControlMap, ControlRange, LinearSystem};

/// Structural class of the state group, as far as the verdict logic cares.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupClass {
    /// `ℝ^d`: the sharp classical criterion applies.
    Euclidean,
    /// Nilpotent and simply connected: controllability is equivalent to
    /// openness plus `G = G⁰`.
    NilpotentSc,
    /// Solvable, simply connected, not nilpotent (`Aff(2,ℝ)`): only the
    /// sufficient direction is available.
    SolvableSc,
    /// Solvable without a simple-connectivity guarantee; no supported
    /// family currently produces it.
    Solvable,
}

impl GroupClass {
    pub fn of_family(family: Family) -> Self {
        match family {
            Family::Euclidean => GroupClass::Euclidean,
            Family::Heisenberg | Family::Nilpotent => GroupClass::NilpotentSc,
            Family::Aff2 => GroupClass::SolvableSc,
        }
    }

    /// Euclidean spaces are nilpotent and simply connected too.
    pub fn is_nilpotent_simply_connected(&self) -> bool {
        matches!(self, GroupClass::Euclidean | GroupClass::NilpotentSc)
    }
}

impl fmt::Display for GroupClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GroupClass::Euclidean => "euclidean",
            GroupClass::NilpotentSc => "nilpotent_sc",
            GroupClass::SolvableSc => "solvable_sc",
            GroupClass::Solvable => "solvable",
        };
        f.write_str(s)
    }
}

/// How confidently an openness statement is held.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Openness {
    /// A full-rank regular pair at the identity certifies it.
    Proven,
    /// The bounded search failed and the sampled Γ-rank is deficient;
    /// evidence against, never a proof.
    HeuristicNo,
    /// Nothing could be established (e.g. finite control range).
    Unknown,
}

impl fmt::Display for Openness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Openness::Proven => "proven",
            Openness::HeuristicNo => "heuristic_no",
            Openness::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conclusion {
    Controllable,
    NotControllable,
    Inconclusive,
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Conclusion::Controllable => "Controllable",
            Conclusion::NotControllable => "NotControllable",
            Conclusion::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

/// Which result a hypothesis check belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TheoremTag {
    /// Solvable sufficient condition.
    T3_4,
    /// Aff(2,ℝ) sufficient condition.
    T3_9,
    /// Nilpotent simply connected equivalence.
    T4_3,
    /// Euclidean rank-and-moduli criterion.
    Euc,
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TheoremTag::T3_4 => "T3.4",
            TheoremTag::T3_9 => "T3.9",
            TheoremTag::T4_3 => "T4.3",
            TheoremTag::Euc => "EUC",
        };
        f.write_str(s)
    }
}

/// One checked hypothesis of one theorem.
#[derive(Clone, Debug)]
pub struct HypothesisCheck {
    pub theorem: TheoremTag,
    pub hypothesis: String,
    pub holds: bool,
}

/// Structured controllability report.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub group_class: GroupClass,
    /// All eigenvalue moduli of `d(f₀)_e`.
    pub eigen_moduli: Vec<f64>,
    /// All moduli equal 1 within the tolerance (`G = G⁰`).
    pub g_equals_g0: bool,
    pub r_open: Openness,
    pub c_open: Openness,
    /// Word length of the regular pair certifying `ℛ` open, if any.
    pub r_certificate_k: Option<usize>,
    /// Word length of the regular pair certifying `𝒞` open, if any.
    pub c_certificate_k: Option<usize>,
    pub conclusion: Conclusion,
    /// The theorem that decided the conclusion (absent for `Inconclusive`
    /// verdicts that no theorem resolved).
    pub decided_by: Option<TheoremTag>,
    pub justification: Vec<HypothesisCheck>,
    /// Carried over from the eigensplit: some modulus was close to the
    /// `1 ± tol` band edges.
    pub boundary_warning: bool,
}

/// Options for [`classify`].
#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    /// Eigenvalue-modulus tolerance (default [`DEFAULT_MODULUS_TOL`]).
    pub modulus_tol: f64,
    /// Longest control word tried in the regular-pair search; `None` means
    /// `2 · dim`.
    pub max_k: Option<usize>,
    /// Random control words per length in the searches.
    pub samples: usize,
    /// Rank threshold for the searches.
    pub rank_tol: f64,
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            modulus_tol: DEFAULT_MODULUS_TOL,
            max_k: None,
            samples: 8,
            rank_tol: DEFAULT_RANK_TOL,
            seed: 42,
        }
    }
}

/// Tri-state answer of [`reach_equals_group_test`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriState {
    Proven,
    Refuted,
    Unknown,
}

/// Result of the classical Euclidean criterion.
#[derive(Clone, Debug)]
pub struct EuclideanCheck {
    pub kalman_rank: usize,
    pub dim: usize,
    pub moduli: Vec<f64>,
    pub controllable: bool,
}

/// Kalman rank of `[B AB ⋯ A^{d−1}B]` (SVD threshold `1e-9·σ_max`) combined
/// with the unit-modulus condition on the eigenvalues of `A`.
pub fn euclidean_check(a: &Matrix, b: &Matrix) -> Result<EuclideanCheck> {
    euclidean_check_with_tol(a, b, 1e-9, DEFAULT_MODULUS_TOL)
}

pub fn euclidean_check_with_tol(
    a: &Matrix,
    b: &Matrix,
    rank_tol: f64,
    modulus_tol: f64,
) -> Result<EuclideanCheck> {
    let d = a.nrows();
    if a.ncols() != d || d == 0 {
        return Err(Error::Argument("A must be square and non-empty".into()));
    }
    if b.nrows() != d {
        return Err(Error::Argument("B must have as many rows as A".into()));
    }
    let det = a.clone().lu().determinant();
    if !det.is_finite() || det.abs() < 1e-12 {
        return Err(Error::Argument(
            "A must be invertible (f_0 is an automorphism of ℝ^d)".into(),
        ));
    }
    let m = b.ncols();
    let mut kalman = Matrix::zeros(d, d * m);
    let mut power = b.clone();
    for block in 0..d {
        kalman.view_mut((0, block * m), (d, m)).copy_from(&power);
        power = a * &power;
    }
    let (kalman_rank, _) = linalg::rank_with_svs(&kalman, rank_tol);
    let moduli: Vec<f64> = a.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    let moduli_ok = moduli.iter().all(|mo| (mo - 1.0).abs() <= modulus_tol);
    Ok(EuclideanCheck {
        kalman_rank,
        dim: d,
        moduli,
        controllable: kalman_rank == d && moduli_ok,
    })
}

/// The Aff(2,ℝ) sufficient condition: accessibility plus `d = 1` (equality
/// at `1e-12`). `false` means "not proven by this theorem", not
/// "uncontrollable".
pub fn aff2_controllable(a: f64, d: f64, hp0: f64, gp0: f64) -> Result<bool> {
    let accessible = accessibility::aff2_accessible(a, d, hp0, gp0)?;
    Ok(accessible && (d - 1.0).abs() <= 1e-12)
}

/// For nilpotent simply connected groups (Euclidean included), `ℛ = G` iff
/// `G = G^{+,0}`, decided from the eigensplit block dimensions. Boundary
/// moduli make the dimension count unreliable and yield `Unknown`.
pub fn reach_equals_group_test(sys: &LinearSystem, opts: &ClassifyOptions) -> Result<TriState> {
    let class = GroupClass::of_family(sys.model().family());
    if !class.is_nilpotent_simply_connected() {
        return Err(Error::Precondition(format!(
            "ℛ = G ⇔ G = G^{{+,0}} needs a nilpotent simply connected group, class is {class}"
        )));
    }
    let l = differential_at_identity(sys.model(), sys.aut())?;
    let split = eigensplit(&l, opts.modulus_tol)?;
    if split.boundary_warning {
        return Ok(TriState::Unknown);
    }
    let (p, z, _) = split.dims();
    Ok(if p + z == sys.dim() {
        TriState::Proven
    } else {
        TriState::Refuted
    })
}

fn openness_evidence(
    sys: &LinearSystem,
    direction: ChainDirection,
    opts: &ClassifyOptions,
) -> (Openness, Option<usize>) {
    let max_k = opts.max_k.unwrap_or(2 * sys.dim());
    match search_regular_pair(
        sys,
        &sys.model().identity(),
        max_k,
        opts.samples,
        opts.rank_tol,
        opts.seed,
    ) {
        Ok(Some((k, _))) => (Openness::Proven, Some(k)),
        Ok(None) => {
            if !matches!(sys.range(), ControlRange::Box { .. }) {
                return (Openness::Unknown, None);
            }
            // No certificate: consult the sampled Γ-rank at e as heuristic
            // evidence of inaccessibility.
            let gopts = GammaOptions {
                samples: opts.samples,
                seed: opts.seed,
                ..Default::default()
            };
            match gamma_rank(sys, &sys.model().identity(), direction, &gopts) {
                Ok(report) if !report.accessible => (Openness::HeuristicNo, None),
                _ => (Openness::Unknown, None),
            }
        }
        Err(_) => (Openness::Unknown, None),
    }
}

fn split_of(sys: &LinearSystem, opts: &ClassifyOptions) -> Result<SpectralSplit> {
    let l = differential_at_identity(sys.model(), sys.aut())?;
    eigensplit(&l, opts.modulus_tol)
}

/// Apply the strongest applicable controllability theorem.
pub fn classify(sys: &LinearSystem, opts: &ClassifyOptions) -> Result<Verdict> {
    let class = GroupClass::of_family(sys.model().family());
    let split = split_of(sys, opts)?;
    let g_equals_g0 = split.all_center();
    let eigen_moduli = split.moduli();

    let (r_open, r_certificate_k) = openness_evidence(sys, ChainDirection::Plus, opts);
    let (c_open, c_certificate_k) = match sys.reversed() {
        Ok(rev) => openness_evidence(&rev, ChainDirection::Plus, opts),
        Err(_) => (Openness::Unknown, None),
    };
    let both_open = r_open == Openness::Proven && c_open == Openness::Proven;

    let mut justification: Vec<HypothesisCheck> = Vec::new();
    let mut conclusion = Conclusion::Inconclusive;
    let mut decided_by: Option<TheoremTag> = None;

    // Euclidean systems with linear translations: the sharp criterion.
    if class == GroupClass::Euclidean {
        if let ControlMap::LinearB(b) = sys.beta() {
            let a = differential_at_identity(sys.model(), sys.aut())?;
            let euc = euclidean_check_with_tol(&a, b, opts.rank_tol, opts.modulus_tol)?;
            justification.push(HypothesisCheck {
                theorem: TheoremTag::Euc,
                hypothesis: format!(
                    "rank[B AB ⋯ A^{{d−1}}B] = d ({}/{})",
                    euc.kalman_rank, euc.dim
                ),
                holds: euc.kalman_rank == euc.dim,
            });
            let moduli_ok = euc
                .moduli
                .iter()
                .all(|m| (m - 1.0).abs() <= opts.modulus_tol);
            justification.push(HypothesisCheck {
                theorem: TheoremTag::Euc,
                hypothesis: "all eigenvalues of A have modulus 1".into(),
                holds: moduli_ok,
            });
            if euc.controllable && both_open {
                conclusion = Conclusion::Controllable;
                decided_by = Some(TheoremTag::Euc);
            } else if !euc.controllable {
                conclusion = Conclusion::NotControllable;
                decided_by = Some(TheoremTag::Euc);
            }
        }
    }

    // Aff(2,ℝ): closed-form sufficient condition.
    if conclusion == Conclusion::Inconclusive && class == GroupClass::SolvableSc {
        if let Some((a, d, hp0, gp0)) = sys.aff2_params() {
            let accessible = accessibility::aff2_accessible(a, d, hp0, gp0)?;
            justification.push(HypothesisCheck {
                theorem: TheoremTag::T3_9,
                hypothesis: "h'(0) ≠ 0 and −a·h'(0) ≠ g'(0)(d−1)".into(),
                holds: accessible,
            });
            let d_is_one = (d - 1.0).abs() <= 1e-12;
            justification.push(HypothesisCheck {
                theorem: TheoremTag::T3_9,
                hypothesis: "d = 1".into(),
                holds: d_is_one,
            });
            if accessible && d_is_one && both_open {
                conclusion = Conclusion::Controllable;
                decided_by = Some(TheoremTag::T3_9);
            }
        }
    }

    // Nilpotent simply connected: the equivalence, both directions.
    if conclusion == Conclusion::Inconclusive && class.is_nilpotent_simply_connected() {
        justification.push(HypothesisCheck {
            theorem: TheoremTag::T4_3,
            hypothesis: "all eigenvalue moduli equal 1 (G = G⁰)".into(),
            holds: g_equals_g0,
        });
        justification.push(HypothesisCheck {
            theorem: TheoremTag::T4_3,
            hypothesis: "ℛ and 𝒞 open (regular pairs at e)".into(),
            holds: both_open,
        });
        if both_open {
            conclusion = if g_equals_g0 {
                Conclusion::Controllable
            } else {
                Conclusion::NotControllable
            };
            decided_by = Some(TheoremTag::T4_3);
        }
    }

    // General solvable sufficient condition (all supported families are
    // solvable).
    if conclusion == Conclusion::Inconclusive {
        justification.push(HypothesisCheck {
            theorem: TheoremTag::T3_4,
            hypothesis: "G = G⁰ and ℛ, 𝒞 open".into(),
            holds: g_equals_g0 && both_open,
        });
        if g_equals_g0 && both_open {
            conclusion = Conclusion::Controllable;
            decided_by = Some(TheoremTag::T3_4);
        }
    }

    Ok(Verdict {
        group_class: class,
        eigen_moduli,
        g_equals_g0,
        r_open,
        c_open,
        r_certificate_k,
        c_certificate_k,
        conclusion,
        decided_by,
        justification,
        boundary_warning: split.boundary_warning,
    })
}
