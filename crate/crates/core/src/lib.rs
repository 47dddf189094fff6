//! Discrete-time linear control systems on low-dimensional Lie groups.
//!
//! A *linear* system on a connected Lie group `G` is a difference equation
//! `g_{k+1} = f_u(e) · f_0(g_k)` where `f_0` is a group automorphism and
//! `u ↦ f_u(e)` is the control-dependent translation. The crate provides:
//!
//! * [`group`] — exact chart arithmetic (product, inverse, exp, log, bracket)
//!   for the supported group families: Euclidean spaces, the affine half-plane
//!   `Aff(2,ℝ)`, the Heisenberg group and nilpotent groups given by structure
//!   constants.
//! * [`bch`] — truncated Baker–Campbell–Hausdorff series, exact on nilpotent
//!   algebras of step ≤ 5.
//! * [`spectral`] — the differential of the automorphism at the identity and
//!   its generalized-eigenspace splitting into unstable / center / stable
//!   subalgebras, with subalgebra-closure and equivariance checks.
//! * [`system`] — stepping, trajectories, reversed systems and exact
//!   reachable-set enumeration over finite control sets.
//! * [`accessibility`] — control vector fields, adjoint chains, the
//!   Jakubczyk–Sontag rank test and regular-pair ranks.
//! * [`controllability`] — the verdict engine combining the spectral data
//!   with openness certificates.
//! * [`sim`] — breadth-first reachable-cloud approximation over box control
//!   ranges, coverage metrics and CSV export.
//! * [`specfile`] — the JSON system description format used by the `liectl`
//!   command line tool, plus built-in presets.
//!
//! All operations are pure: models are immutable after construction and safe
//! to share across threads.

pub mod accessibility;
pub mod bch;
pub mod cli;
pub mod controllability;
mod error;
pub mod group;
pub mod linalg;
pub mod poly;
pub mod report;
pub mod sim;
pub mod specfile;
pub mod spectral;
pub mod system;

pub use error::{Error, Result};
pub use group::{AlgebraElement, Family, GroupElement, GroupModel, StructureConstants};
pub use spectral::{AutKind, AutomorphismModel, SpectralSplit};
pub use system::{ControlMap, ControlRange, ControlSequence, LinearSystem};
