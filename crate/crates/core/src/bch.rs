//! Truncated Baker–Campbell–Hausdorff series.
//!
//! `C(X,Y) = log(exp X · exp Y) = X + Y + ½[X,Y] + 1/12([X,[X,Y]] + [Y,[Y,X]])
//! − 1/24 [Y,[X,[X,Y]]] + …`
//!
//! Terms of every order are produced by Dynkin's commutator expansion
//!
//! `C(X,Y) = Σ_{n≥1} (−1)^{n−1}/n Σ [X^{r₁}Y^{s₁}⋯X^{rₙ}Y^{sₙ}] /
//! ((Σᵢ rᵢ+sᵢ) Πᵢ rᵢ! sᵢ!)`
//!
//! where the numerator is the right-nested bracket of the letter word. On a
//! nilpotent algebra of step `s` the series terminates: truncation at
//! `order ≥ s` is exact, which is the invariant checked by the
//! `exp(bch(X,Y)) = exp(X)·exp(Y)` tests. On non-nilpotent models the
//! truncation is only an approximation for small arguments; the caller picks
//! the order.

use crate::error::{Error, Result};
use crate::group::{AlgebraElement, GroupModel, MAX_NILPOTENCY_STEP};
use crate::linalg::Vector;

/// Truncated BCH series of `x` and `y` up to total bracket order `order`.
///
/// Orders above [`MAX_NILPOTENCY_STEP`] are rejected: no supported family
/// needs them and the term count grows quickly.
pub fn bch(
    model: &GroupModel,
    x: &AlgebraElement,
    y: &AlgebraElement,
    order: usize,
) -> Result<AlgebraElement> {
    if order < 1 {
        return Err(Error::Argument(
            "BCH truncation order must be at least 1".into(),
        ));
    }
    if order > MAX_NILPOTENCY_STEP {
        return Err(Error::Argument(format!(
            "BCH truncation order {order} exceeds the supported maximum {MAX_NILPOTENCY_STEP}"
        )));
    }
    let d = model.dim();
    if x.coords().len() != d || y.coords().len() != d {
        return Err(Error::Argument(
            "BCH arguments must match the model dimension".into(),
        ));
    }

    let sc = model.structure_constants();
    let xv = x.coords().clone();
    let yv = y.coords().clone();
    let mut acc = Vector::zeros(d);

    // Enumerate sequences ((r₁,s₁),…,(rₙ,sₙ)) of non-zero pairs with total
    // weight ≤ order, building the letter word as we go (true = X).
    let mut word: Vec<bool> = Vec::with_capacity(order);
    let mut stack: Vec<(usize, f64)> = vec![(0, 1.0)]; // (weight so far, Π rᵢ!sᵢ! so far)
    enumerate(sc, &xv, &yv, order, &mut word, &mut stack, 0, &mut acc);

    Ok(AlgebraElement::from_vector(acc))
}

/// Recursively extend the pair sequence. `n` is the number of pairs chosen so
/// far; `stack` tracks `(total weight, factorial product)`.
#[allow(clippy::too_many_arguments)]
fn enumerate(
    sc: &crate::group::StructureConstants,
    xv: &Vector,
    yv: &Vector,
    order: usize,
    word: &mut Vec<bool>,
    stack: &mut Vec<(usize, f64)>,
    n: usize,
    acc: &mut Vector,
) {
    let (weight, fact) = *stack.last().unwrap();
    if n > 0 {
        let coeff = sign(n) / (n as f64 * weight as f64 * fact);
        add_term(sc, xv, yv, word, coeff, acc);
    }
    if weight == order {
        return;
    }
    let budget = order - weight;
    for r in 0..=budget {
        for s in 0..=(budget - r) {
            if r + s == 0 {
                continue;
            }
            for _ in 0..r {
                word.push(true);
            }
            for _ in 0..s {
                word.push(false);
            }
            stack.push((weight + r + s, fact * factorial(r) * factorial(s)));
            enumerate(sc, xv, yv, order, word, stack, n + 1, acc);
            stack.pop();
            word.truncate(word.len() - r - s);
        }
    }
}

/// Add `coeff · [w₁,[w₂,[…,w_L]…]]` to the accumulator. Words whose nested
/// bracket vanishes identically (repeated trailing letter) fall out of the
/// fold naturally.
fn add_term(
    sc: &crate::group::StructureConstants,
    xv: &Vector,
    yv: &Vector,
    word: &[bool],
    coeff: f64,
    acc: &mut Vector,
) {
    let letter = |is_x: bool| if is_x { xv } else { yv };
    let mut v = letter(*word.last().unwrap()).clone();
    for &w in word[..word.len() - 1].iter().rev() {
        v = sc.bracket(letter(w), &v);
        if v.amax() == 0.0 {
            return;
        }
    }
    *acc += v * coeff;
}

fn sign(n: usize) -> f64 {
    if n % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
