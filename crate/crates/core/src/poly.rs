//! Plain polynomial evaluation: univariate polynomials and polynomial maps
//! `ℝ^n → ℝ^m`, used to describe automorphisms and control-to-group maps in
//! chart coordinates. Both are serde-serializable so that system description
//! files can carry them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Univariate polynomial `c_0 + c_1 u + c_2 u² + …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Poly { coeffs: vec![c] }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    /// Derivative evaluated at `u`.
    pub fn deriv(&self, u: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * u + (i as f64) * c)
    }
}

/// One monomial `coeff · x_0^{p_0} ⋯ x_{n-1}^{p_{n-1}}` of a [`PolyMap`]
/// output coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

/// Polynomial map `ℝ^arity → ℝ^m`; `outputs[i]` is the list of monomials of
/// the i-th output coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyMap {
    pub arity: usize,
    pub outputs: Vec<Vec<Monomial>>,
}

impl PolyMap {
    pub fn new(arity: usize, outputs: Vec<Vec<Monomial>>) -> Result<Self> {
        for terms in &outputs {
            for t in terms {
                if t.powers.len() != arity {
                    return Err(Error::Argument(format!(
                        "monomial exponent vector has length {}, expected {arity}",
                        t.powers.len()
                    )));
                }
            }
        }
        Ok(PolyMap { arity, outputs })
    }

    /// Identity map on `ℝ^n`.
    pub fn identity(n: usize) -> Self {
        let outputs = (0..n)
            .map(|i| {
                let mut powers = vec![0u32; n];
                powers[i] = 1;
                vec![Monomial { coeff: 1.0, powers }]
            })
            .collect();
        PolyMap { arity: n, outputs }
    }

    /// Linear map given by a matrix (rows = outputs).
    pub fn linear(m: &Matrix) -> Self {
        let arity = m.ncols();
        let outputs = (0..m.nrows())
            .map(|i| {
                (0..arity)
                    .filter(|&j| m[(i, j)] != 0.0)
                    .map(|j| {
                        let mut powers = vec![0u32; arity];
                        powers[j] = 1;
                        Monomial {
                            coeff: m[(i, j)],
                            powers,
                        }
                    })
                    .collect()
            })
            .collect();
        PolyMap { arity, outputs }
    }

    pub fn out_dim(&self) -> usize {
        self.outputs.len()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.arity {
            return Err(Error::Argument(format!(
                "polynomial map expects {} inputs, got {}",
                self.arity,
                x.len()
            )));
        }
        Ok(self
            .outputs
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|t| {
                        t.coeff
                            * t.powers
                                .iter()
                                .zip(x)
                                .map(|(&p, &xi)| xi.powi(p as i32))
                                .product::<f64>()
                    })
                    .sum()
            })
            .collect())
    }

    /// Analytic Jacobian at `x` (rows = outputs, columns = inputs).
    pub fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        if x.len() != self.arity {
            return Err(Error::Argument(format!(
                "polynomial map expects {} inputs, got {}",
                self.arity,
                x.len()
            )));
        }
        let mut jac = Matrix::zeros(self.out_dim(), self.arity);
        for (i, terms) in self.outputs.iter().enumerate() {
            for t in terms {
                for j in 0..self.arity {
                    let p = t.powers[j];
                    if p == 0 {
                        continue;
                    }
                    let mut d = t.coeff * p as f64 * x[j].powi(p as i32 - 1);
                    for (k, (&q, &xk)) in t.powers.iter().zip(x).enumerate() {
                        if k != j {
                            d *= xk.powi(q as i32);
                        }
                    }
                    jac[(i, j)] += d;
                }
            }
        }
        Ok(jac)
    }
}
