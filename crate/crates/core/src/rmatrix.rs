//! The trigonometric r-matrix and generic checkers for the classical
//! quadratic and linear algebras.
//!
//! Tensor products use the convention `(A ⊗ B)[2i+k, 2j+l] = A[i,j] B[k,l]`,
//! so `A ⊗ 1` acts in the first auxiliary space `a` and `1 ⊗ B` in `b`.

use crate::error::{Error, Result};
use crate::laurent::LaurentSeries;
use crate::{c64, max_abs, Mat2, Mat4, C64};

const POLE_EPS: f64 = 1e-12;

/// `r(x) = coth x (e11⊗e11 + e22⊗e22) + csch x (e12⊗e21 + e21⊗e12)`.
pub fn r_matrix(x: C64) -> Result<Mat4> {
    let sh = x.sinh();
    if sh.norm() < POLE_EPS {
        return Err(Error::RMatrixPole);
    }
    let c = x.cosh() / sh;
    let s = sh.inv();
    let z = c64(0.0, 0.0);
    Ok(Mat4::new(
        c, z, z, z, //
        z, z, s, z, //
        z, s, z, z, //
        z, z, z, c,
    ))
}

pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

pub fn commutator4(a: &Mat4, b: &Mat4) -> Mat4 {
    a * b - b * a
}

pub fn commutator2(a: &Mat2, b: &Mat2) -> Mat2 {
    a * b - b * a
}

/// `coth(λ − μ)` expanded in `u = e^λ` around `u = ∞`, with `w = e^μ`:
/// `1 + 2 Σ_{k≥1} w^{2k} u^{-2k}`, known down to `u^{-depth}`.
pub fn coth_series(w: C64, depth: usize) -> LaurentSeries {
    let terms = (0..=depth / 2).map(|k| {
        let c = if k == 0 {
            c64(1.0, 0.0)
        } else {
            w.powi(2 * k as i32) * 2.0
        };
        (-(2 * k as i32), c)
    });
    LaurentSeries::from_terms(terms).truncated(-(depth as i32))
}

/// `csch(λ − μ) = 2 Σ_{k≥0} w^{2k+1} u^{-(2k+1)}`, known down to `u^{-depth}`.
pub fn csch_series(w: C64, depth: usize) -> LaurentSeries {
    let terms = (0..=depth / 2)
        .map(|k| 2 * k as i32 + 1)
        .filter(|&e| e as usize <= depth)
        .map(|e| (-e, w.powi(e) * 2.0));
    LaurentSeries::from_terms(terms).truncated(-(depth as i32))
}

/// A single-site Lax matrix over finitely many local Poisson variables.
pub trait LocalLax {
    fn variable_count(&self) -> usize;
    fn lax(&self, lambda: C64) -> Mat2;
    /// `∂L(λ)/∂x_var`.
    fn lax_gradient(&self, var: usize, lambda: C64) -> Mat2;
    /// `{x_i, x_j}`.
    fn bracket(&self, i: usize, j: usize) -> C64;
}

/// Both sides of `{L_a(λ), L_b(μ)} = [r_ab(λ−μ), L_a(λ) L_b(μ)]`.
pub fn quadratic_algebra_sides<L: LocalLax + ?Sized>(l: &L, lambda: C64, mu: C64) -> Result<(Mat4, Mat4)> {
    let r = r_matrix(lambda - mu)?;
    let n = l.variable_count();
    let grads_l: Vec<Mat2> = (0..n).map(|i| l.lax_gradient(i, lambda)).collect();
    let grads_m: Vec<Mat2> = (0..n).map(|i| l.lax_gradient(i, mu)).collect();
    let mut lhs = Mat4::zeros();
    for (i, gl) in grads_l.iter().enumerate() {
        for (j, gm) in grads_m.iter().enumerate() {
            let b = l.bracket(i, j);
            if b != c64(0.0, 0.0) {
                lhs += kron(gl, gm) * b;
            }
        }
    }
    let prod = kron(&l.lax(lambda), &l.lax(mu));
    Ok((lhs, commutator4(&r, &prod)))
}

/// Max entrywise residual of the quadratic algebra.
pub fn quadratic_algebra_residual<L: LocalLax + ?Sized>(l: &L, lambda: C64, mu: C64) -> Result<f64> {
    let (lhs, rhs) = quadratic_algebra_sides(l, lambda, mu)?;
    Ok(max_abs(&(lhs - rhs)))
}

/// Jacobi identity residual `{x_i,{x_j,x_k}} + cyclic` for a local bracket
/// table whose values depend on the variables; `bracket_gradient(i, j, m)`
/// is `∂{x_i,x_j}/∂x_m`.
pub fn jacobi_residual<B, G>(n: usize, bracket: B, bracket_gradient: G) -> f64
where
    B: Fn(usize, usize) -> C64,
    G: Fn(usize, usize, usize) -> C64,
{
    // {x_i, F(x)} = Σ_m {x_i, x_m} ∂F/∂x_m
    let outer =
        |i: usize, j: usize, k: usize| -> C64 { (0..n).map(|m| bracket(i, m) * bracket_gradient(j, k, m)).sum() };
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let s = outer(i, j, k) + outer(j, k, i) + outer(k, i, j);
                worst = worst.max(s.norm());
            }
        }
    }
    worst
}
