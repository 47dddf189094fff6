//! The JSON system description format used by the `liectl` tool.
//!
//! A description names the group family, the family parameters and the
//! control range. Numbers are plain decimal doubles. Fields by family:
//!
//! * `euclidean`: `A` (d×d, row-major nested arrays), `B` (d×m);
//! * `aff2`: `a`, `d`, `h_coeffs`, `g_coeffs` (polynomial coefficients,
//!   constant term first; `h_coeffs[0]` must be 1 and `g_coeffs[0]` 0);
//! * `heisenberg`: optional `f0_poly` and `beta_poly` chart polynomials
//!   (the built-in worked example is the default for both);
//! * `nilpotent`: `structure_constants` (d×d×d nested arrays), `f0_matrix`
//!   (a Lie algebra automorphism acting in exponential coordinates) or
//!   `f0_poly`, and `beta_poly` or `B`.
//!
//! `control` is either `{"kind": "box", "lo": [...], "hi": [...]}` or
//! `{"kind": "finite_set", "points": [[...], ...]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Family, GroupModel, StructureConstants};
use crate::linalg::Matrix;
use crate::poly::{Monomial, Poly, PolyMap};
use crate::spectral::{heisenberg_example_f0, AutomorphismModel};
use crate::system::{ControlMap, ControlRange, LinearSystem};

/// On-disk system description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpecFile {
    pub family: Family,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a_matrix: Option<Vec<Vec<f64>>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b_matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure_constants: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0_matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0_poly: Option<PolyMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_poly: Option<PolyMap>,
    pub control: ControlRange,
}

impl SystemSpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Spec(format!("cannot parse system spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization cannot fail")
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Built-in presets reproducing the two worked systems.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "heisenberg-paper" => Ok(heisenberg_paper_preset()),
            "aff2-theorem39" => Ok(aff2_theorem39_preset()),
            other => Err(Error::Spec(format!(
                "unknown preset '{other}' (available: heisenberg-paper, aff2-theorem39)"
            ))),
        }
    }

    /// Construct the validated system.
    pub fn build(&self) -> Result<LinearSystem> {
        match self.family {
            Family::Euclidean => self.build_euclidean(),
            Family::Aff2 => self.build_aff2(),
            Family::Heisenberg => self.build_heisenberg(),
            Family::Nilpotent => self.build_nilpotent(),
        }
    }

    fn build_euclidean(&self) -> Result<LinearSystem> {
        let a = matrix_from_nested(
            self.a_matrix
                .as_ref()
                .ok_or_else(|| Error::Spec("euclidean systems need A".into()))?,
        )?;
        let b = matrix_from_nested(
            self.b_matrix
                .as_ref()
                .ok_or_else(|| Error::Spec("euclidean systems need B".into()))?,
        )?;
        if a.nrows() != a.ncols() {
            return Err(Error::Spec("A must be square".into()));
        }
        let model = GroupModel::euclidean(a.nrows())?;
        let aut = AutomorphismModel::linear(&model, a)?;
        LinearSystem::new(model, aut, ControlMap::LinearB(b), self.control.clone())
    }

    fn build_aff2(&self) -> Result<LinearSystem> {
        let a = self
            .a
            .ok_or_else(|| Error::Spec("aff2 systems need a".into()))?;
        let d = self
            .d
            .ok_or_else(|| Error::Spec("aff2 systems need d".into()))?;
        let h = self
            .h_coeffs
            .clone()
            .ok_or_else(|| Error::Spec("aff2 systems need h_coeffs".into()))?;
        let g = self
            .g_coeffs
            .clone()
            .ok_or_else(|| Error::Spec("aff2 systems need g_coeffs".into()))?;
        let model = GroupModel::aff2();
        let aut = AutomorphismModel::aff2(&model, a, d)?;
        let beta = ControlMap::Aff2Poly {
            h: Poly::new(h),
            g: Poly::new(g),
        };
        LinearSystem::new(model, aut, beta, self.control.clone())
    }

    fn build_heisenberg(&self) -> Result<LinearSystem> {
        let model = GroupModel::heisenberg();
        let f0 = self.f0_poly.clone().unwrap_or_else(heisenberg_example_f0);
        let aut = AutomorphismModel::chart_poly(&model, f0)?;
        let beta_map = self
            .beta_poly
            .clone()
            .unwrap_or_else(heisenberg_example_beta);
        LinearSystem::new(model, aut, ControlMap::Poly(beta_map), self.control.clone())
    }

    fn build_nilpotent(&self) -> Result<LinearSystem> {
        let nested = self
            .structure_constants
            .as_ref()
            .ok_or_else(|| Error::Spec("nilpotent systems need structure_constants".into()))?;
        let dim = nested.len();
        let mut flat = Vec::with_capacity(dim * dim * dim);
        for plane in nested {
            if plane.len() != dim {
                return Err(Error::Spec("structure_constants must be d×d×d".into()));
            }
            for row in plane {
                if row.len() != dim {
                    return Err(Error::Spec("structure_constants must be d×d×d".into()));
                }
                flat.extend_from_slice(row);
            }
        }
        let model = GroupModel::nilpotent(StructureConstants::from_flat(dim, flat)?)?;
        let aut = match (&self.f0_matrix, &self.f0_poly) {
            (Some(m), None) => AutomorphismModel::linear(&model, matrix_from_nested(m)?)?,
            (None, Some(p)) => AutomorphismModel::chart_poly(&model, p.clone())?,
            (None, None) => {
                return Err(Error::Spec(
                    "nilpotent systems need f0_matrix or f0_poly".into(),
                ))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Spec("give only one of f0_matrix and f0_poly".into()))
            }
        };
        let beta = match (&self.beta_poly, &self.b_matrix) {
            (Some(p), None) => ControlMap::Poly(p.clone()),
            (None, Some(b)) => ControlMap::LinearB(matrix_from_nested(b)?),
            (None, None) => {
                return Err(Error::Spec("nilpotent systems need beta_poly or B".into()))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Spec("give only one of beta_poly and B".into()))
            }
        };
        LinearSystem::new(model, aut, beta, self.control.clone())
    }
}

fn matrix_from_nested(rows: &[Vec<f64>]) -> Result<Matrix> {
    if rows.is_empty() {
        return Err(Error::Spec("matrix must be non-empty".into()));
    }
    let cols = rows[0].len();
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Spec(
            "matrix rows must be non-empty and of equal length".into(),
        ));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Matrix::from_row_slice(rows.len(), cols, &flat))
}

/// `β(u) = (−u/2 − u²/3, u, −u/2)` of the worked Heisenberg system.
pub fn heisenberg_example_beta() -> PolyMap {
    PolyMap::new(
        1,
        vec![
            vec![
                Monomial {
                    coeff: -0.5,
                    powers: vec![1],
                },
                Monomial {
                    coeff: -1.0 / 3.0,
                    powers: vec![2],
                },
            ],
            vec![Monomial {
                coeff: 1.0,
                powers: vec![1],
            }],
            vec![Monomial {
                coeff: -0.5,
                powers: vec![1],
            }],
        ],
    )
    .unwrap()
}

fn heisenberg_paper_preset() -> SystemSpecFile {
    SystemSpecFile {
        family: Family::Heisenberg,
        a_matrix: None,
        b_matrix: None,
        a: None,
        d: None,
        h_coeffs: None,
        g_coeffs: None,
        structure_constants: None,
        f0_matrix: None,
        f0_poly: Some(heisenberg_example_f0()),
        beta_poly: Some(heisenberg_example_beta()),
        control: ControlRange::Box {
            lo: vec![-1.0],
            hi: vec![1.0],
        },
    }
}

fn aff2_theorem39_preset() -> SystemSpecFile {
    SystemSpecFile {
        family: Family::Aff2,
        a_matrix: None,
        b_matrix: None,
        a: Some(1.0),
        d: Some(1.0),
        h_coeffs: Some(vec![1.0, 1.0]),
        g_coeffs: Some(vec![0.0]),
        structure_constants: None,
        f0_matrix: None,
        f0_poly: None,
        beta_poly: None,
        control: ControlRange::Box {
            lo: vec![-0.5],
            hi: vec![0.5],
        },
    }
}
