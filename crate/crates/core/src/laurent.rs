//! Laurent polynomials and truncated Laurent series in the spectral
//! variable `u = e^λ`, plus 2×2 matrices over them.
//!
//! A [`LaurentSeries`] either is an exact polynomial (finitely many
//! nonzero coefficients, nothing unknown) or carries a truncation order
//! `t`: every coefficient of `u^k` with `k >= t` is known, everything
//! below is discarded. Expansions "about powers of `e^λ`" run towards
//! negative exponents, so truncation always cuts off the low end.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients whose magnitude falls below this fraction of the largest
/// coefficient are dropped from the normal form.
pub const NORMAL_FORM_REL_EPS: f64 = 1e-15;

/// Default depth for logarithmic expansions: enough for the charges up to
/// order `u^{-2}` plus one guard order.
pub const DEFAULT_LOG_DEPTH: usize = 4;

#[derive(Clone, PartialEq, Default)]
pub struct LaurentSeries {
    coeffs: BTreeMap<i32, Complex64>,
    truncation: Option<i32>,
}

impl LaurentSeries {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(exponent: i32, c: Complex64) -> Self {
        Self::from_terms([(exponent, c)])
    }

    /// Builds an exact polynomial from `(exponent, coefficient)` pairs.
    /// Repeated exponents are summed.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i32, Complex64)>,
    {
        let mut coeffs = BTreeMap::new();
        for (e, c) in terms {
            *coeffs.entry(e).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let mut s = Self {
            coeffs,
            truncation: None,
        };
        s.normalize();
        s
    }

    /// Marks the series as known only for exponents `>= order`; lower
    /// terms are discarded. Re-truncating can only raise the order.
    pub fn truncated(mut self, order: i32) -> Self {
        let order = match self.truncation {
            Some(t) => t.max(order),
            None => order,
        };
        self.truncation = Some(order);
        self.normalize();
        self
    }

    fn normalize(&mut self) {
        if let Some(t) = self.truncation {
            self.coeffs = self.coeffs.split_off(&t);
        }
        let max = self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = max * NORMAL_FORM_REL_EPS;
        self.coeffs
            .retain(|_, c| c.norm() > cut && *c != Complex64::new(0.0, 0.0));
    }

    pub fn coeff(&self, exponent: i32) -> Complex64 {
        self.coeffs.get(&exponent).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Coefficient of `u^exponent`, failing if it lies below the
    /// truncation order.
    pub fn known_coeff(&self, exponent: i32) -> Result<Complex64> {
        match self.truncation {
            Some(t) if exponent < t => Err(Error::InsufficientPrecision {
                known: t,
                needed: exponent,
            }),
            _ => Ok(self.coeff(exponent)),
        }
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    /// Lowest retained exponent, `None` for exact polynomials.
    pub fn truncation_order(&self) -> Option<i32> {
        self.truncation
    }

    pub fn is_exact(&self) -> bool {
        self.truncation.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        self.coeffs.iter().map(|(&e, &c)| (e, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest coefficient magnitude (0 for the zero series).
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, u: Complex64) -> Complex64 {
        self.coeffs.iter().map(|(&e, &c)| c * u.powi(e)).sum()
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let mut out = Self {
            coeffs: self.coeffs.iter().map(|(&e, &c)| (e, c * k)).collect(),
            truncation: self.truncation,
        };
        out.normalize();
        out
    }

    /// Multiplies by `u^shift`.
    pub fn shift(&self, shift: i32) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&e, &c)| (e + shift, c)).collect(),
            truncation: self.truncation.map(|t| t + shift),
        }
    }

    /// Upper end of the possibly-nonzero range, counting the unknown
    /// tail of a truncated series.
    fn effective_top(&self) -> Option<i32> {
        match (self.max_exponent(), self.truncation) {
            (Some(m), Some(t)) => Some(m.max(t - 1)),
            (None, Some(t)) => Some(t - 1),
            (m, None) => m,
        }
    }

    /// Product; exact convolution of the coefficients, truncated at the
    /// tightest order the operands still determine.
    pub fn mul_series(&self, other: &Self) -> Self {
        let truncation = match (self.truncation, other.truncation) {
            (None, None) => None,
            (Some(ta), None) => other.effective_top().map(|hb| ta + hb),
            (None, Some(tb)) => self.effective_top().map(|ha| tb + ha),
            (Some(ta), Some(tb)) => {
                let ha = self.effective_top().unwrap_or(ta - 1);
                let hb = other.effective_top().unwrap_or(tb - 1);
                Some((ta + hb).max(tb + ha))
            }
        };
        let mut coeffs: BTreeMap<i32, Complex64> = BTreeMap::new();
        for (&ea, &ca) in &self.coeffs {
            for (&eb, &cb) in &other.coeffs {
                *coeffs.entry(ea + eb).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
            }
        }
        let mut out = Self { coeffs, truncation };
        out.normalize();
        out
    }

    fn add_series(&self, other: &Self, sign: f64) -> Self {
        let truncation = match (self.truncation, other.truncation) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let mut coeffs = self.coeffs.clone();
        for (&e, &c) in &other.coeffs {
            *coeffs.entry(e).or_insert(Complex64::new(0.0, 0.0)) += c * sign;
        }
        let mut out = Self { coeffs, truncation };
        out.normalize();
        out
    }

    fn leading(&self) -> Result<(i32, Complex64)> {
        self.coeffs
            .iter()
            .next_back()
            .map(|(&e, &c)| (e, c))
            .ok_or(Error::ZeroSeries)
    }

    /// Coefficients `x_1..x_depth` of `p / (c u^N) = 1 + Σ x_m u^{-m}`.
    fn normalized_tail(&self, depth: usize) -> Result<(i32, Complex64, Vec<Complex64>)> {
        let (n, lead) = self.leading()?;
        let mut tail = vec![Complex64::new(0.0, 0.0); depth + 1];
        for (m, slot) in tail.iter_mut().enumerate().skip(1) {
            *slot = self.known_coeff(n - m as i32)? / lead;
        }
        Ok((n, lead, tail))
    }

    /// Truncated inverse `q` with `p q = 1 + O(u^{-depth-1})`.
    pub fn series_inverse(&self, depth: usize) -> Result<Self> {
        let (n, lead, x) = self.normalized_tail(depth)?;
        let mut y = vec![Complex64::new(0.0, 0.0); depth + 1];
        y[0] = Complex64::new(1.0, 0.0);
        for m in 1..=depth {
            y[m] = -(1..=m).map(|k| x[k] * y[m - k]).sum::<Complex64>();
        }
        let inv_lead = lead.inv();
        Ok(
            Self::from_terms(y.iter().enumerate().map(|(m, &c)| (-n - m as i32, c * inv_lead)))
                .truncated(-n - depth as i32),
        )
    }

    /// Expands `ln p(u) = N ln u + c_0 + Σ_{m=1..depth} c_m u^{-m} + O(u^{-depth-1})`.
    pub fn log_expand(&self, depth: usize) -> Result<LogExpansion> {
        if self.is_zero() {
            return Err(Error::EmptyGeneratingFunctional);
        }
        let (n, lead, x) = self.normalized_tail(depth)?;
        // ln(1 + x) = Σ_k (-1)^{k+1} x^k / k, with x = O(u^{-1}).
        let mut out = vec![Complex64::new(0.0, 0.0); depth + 1];
        let mut power = x.clone();
        for k in 1..=depth {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            for m in 1..=depth {
                out[m] += power[m] * (sign / k as f64);
            }
            power = truncated_poly_mul(&power, &x);
        }
        out[0] = lead.ln();
        Ok(LogExpansion {
            leading_exponent: n,
            coefficients: out,
        })
    }
}

/// Product of two coefficient vectors in `u^{-1}`, keeping orders `0..len`.
fn truncated_poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let len = a.len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (i, &ai) in a.iter().enumerate() {
        if ai == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Result of [`LaurentSeries::log_expand`].
#[derive(Clone, Debug, PartialEq)]
pub struct LogExpansion {
    pub leading_exponent: i32,
    /// `c_0 ..= c_depth`; `c_m` multiplies `u^{-m}`.
    pub coefficients: Vec<Complex64>,
}

impl LogExpansion {
    pub fn depth(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Rebuilds `u^N exp(c_0 + Σ c_m u^{-m})` as a series truncated at
    /// `u^{N - depth}`.
    pub fn exponentiate(&self) -> LaurentSeries {
        let depth = self.depth();
        // exp of Σ_{m>=1} c_m y^m via e' = g' e.
        let c = &self.coefficients;
        let mut e = vec![Complex64::new(0.0, 0.0); depth + 1];
        e[0] = Complex64::new(1.0, 0.0);
        for m in 1..=depth {
            let s: Complex64 = (1..=m).map(|k| c[k] * e[m - k] * k as f64).sum();
            e[m] = s / m as f64;
        }
        let scale = c[0].exp();
        let n = self.leading_exponent;
        LaurentSeries::from_terms(e.iter().enumerate().map(|(m, &v)| (n - m as i32, v * scale)))
            .truncated(n - depth as i32)
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        }
        for (i, (e, c)) in self.coeffs.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})u^{e}")?;
        }
        if let Some(t) = self.truncation {
            write!(f, " + O(u^{})", t - 1)?;
        }
        Ok(())
    }
}

impl Add for &LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.add_series(rhs, 1.0)
    }
}

impl Sub for &LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.add_series(rhs, -1.0)
    }
}

impl Mul for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.mul_series(rhs)
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentSeries {
            type Output = LaurentSeries;
            fn $m(self, rhs: LaurentSeries) -> LaurentSeries {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// 2×2 matrix with Laurent-series entries.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentMatrix {
    pub entries: [[LaurentSeries; 2]; 2],
}

impl LaurentMatrix {
    pub fn new(a11: LaurentSeries, a12: LaurentSeries, a21: LaurentSeries, a22: LaurentSeries) -> Self {
        Self {
            entries: [[a11, a12], [a21, a22]],
        }
    }

    pub fn identity() -> Self {
        Self::new(
            LaurentSeries::one(),
            LaurentSeries::zero(),
            LaurentSeries::zero(),
            LaurentSeries::one(),
        )
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentSeries {
        &self.entries[i][j]
    }

    pub fn trace(&self) -> LaurentSeries {
        &self.entries[0][0] + &self.entries[1][1]
    }

    pub fn det(&self) -> LaurentSeries {
        let e = &self.entries;
        &(&e[0][0] * &e[1][1]) - &(&e[0][1] * &e[1][0])
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let e = &self.entries;
        Self::new(e[0][0].scale(k), e[0][1].scale(k), e[1][0].scale(k), e[1][1].scale(k))
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let a = &self.entries;
        let b = &rhs.entries;
        let entry = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
        Self::new(entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let a = &self.entries;
        let b = &rhs.entries;
        Self::new(
            &a[0][0] - &b[0][0],
            &a[0][1] - &b[0][1],
            &a[1][0] - &b[1][0],
            &a[1][1] - &b[1][1],
        )
    }

    pub fn eval(&self, u: Complex64) -> Matrix2<Complex64> {
        let e = &self.entries;
        Matrix2::new(e[0][0].eval(u), e[0][1].eval(u), e[1][0].eval(u), e[1][1].eval(u))
    }

    /// Highest exponent over all entries.
    pub fn max_exponent(&self) -> Option<i32> {
        self.entries.iter().flatten().filter_map(|s| s.max_exponent()).max()
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.entries.iter().flatten().filter_map(|s| s.min_exponent()).min()
    }

    /// Coefficient matrix of `u^exponent`.
    pub fn coeff_matrix(&self, exponent: i32) -> Result<Matrix2<Complex64>> {
        let e = &self.entries;
        Ok(Matrix2::new(
            e[0][0].known_coeff(exponent)?,
            e[0][1].known_coeff(exponent)?,
            e[1][0].known_coeff(exponent)?,
            e[1][1].known_coeff(exponent)?,
        ))
    }
}

/// Ordered product `ms[0] · ms[1] · … · ms[k-1]`.
///
/// A monodromy `L_N ⋯ L_1` is obtained by passing the sites highest first.
pub fn matrix_product_chain(ms: &[LaurentMatrix]) -> Result<LaurentMatrix> {
    let (first, rest) = ms.split_first().ok_or(Error::EmptyProduct)?;
    Ok(rest.iter().fold(first.clone(), |acc, m| acc.matmul(m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn r(re: f64) -> Complex64 {
        c(re, 0.0)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn difference_of_squares() {
        let a = LaurentSeries::from_terms([(1, r(1.0)), (-1, r(-1.0))]);
        let b = LaurentSeries::from_terms([(1, r(1.0)), (-1, r(1.0))]);
        let p = &a * &b;
        assert_eq!(p, LaurentSeries::from_terms([(2, r(1.0)), (-2, r(-1.0))]));
        assert!(p.is_exact());
    }

    #[test]
    fn one_is_identity() {
        let p = LaurentSeries::from_terms([(3, c(1.0, 2.0)), (-2, c(0.5, -1.0))]);
        assert_eq!(&LaurentSeries::one() * &p, p);
    }

    #[test]
    fn normal_form_drops_zeros() {
        let p = LaurentSeries::from_terms([(1, r(1.0)), (1, r(-1.0)), (0, r(2.0))]);
        assert_eq!(p.len(), 1);
        assert_eq!(p.max_exponent(), Some(0));
        let tiny = LaurentSeries::from_terms([(0, r(1.0)), (5, r(1e-17))]);
        assert_eq!(tiny.max_exponent(), Some(0));
    }

    #[test]
    fn product_chain_single_and_diagonal_power() {
        let u = |k: i32, v: f64| LaurentSeries::monomial(k, r(v));
        let d = LaurentMatrix::new(u(1, 1.0), LaurentSeries::zero(), LaurentSeries::zero(), u(-1, -1.0));
        assert_eq!(matrix_product_chain(std::slice::from_ref(&d)).unwrap(), d);
        for n in 1..6 {
            let chain = vec![d.clone(); n];
            let p = matrix_product_chain(&chain).unwrap();
            assert_eq!(p.entries[0][0], u(n as i32, 1.0));
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(p.entries[1][1], u(-(n as i32), sign));
            assert!(p.entries[0][1].is_zero() && p.entries[1][0].is_zero());
        }
        assert_eq!(matrix_product_chain(&[]), Err(Error::EmptyProduct));
    }

    #[test]
    fn two_by_two_product_matches_hand_expansion() {
        // A = [[u, 2], [u^-1, 3u]], B = [[1, u^-1], [u, -1]]
        let m = |e: i32, v: f64| LaurentSeries::monomial(e, r(v));
        let a = LaurentMatrix::new(m(1, 1.0), m(0, 2.0), m(-1, 1.0), m(1, 3.0));
        let b = LaurentMatrix::new(m(0, 1.0), m(-1, 1.0), m(1, 1.0), m(0, -1.0));
        let p = matrix_product_chain(&[a, b]).unwrap();
        // (1,1) = u + 2u ; (1,2) = 1 - 2 ; (2,1) = u^-1 + 3u^2 ; (2,2) = u^-2 - 3u
        assert_eq!(p.entries[0][0], m(1, 3.0));
        assert_eq!(p.entries[0][1], m(0, -1.0));
        assert_eq!(p.entries[1][0], LaurentSeries::from_terms([(-1, r(1.0)), (2, r(3.0))]));
        assert_eq!(p.entries[1][1], LaurentSeries::from_terms([(-2, r(1.0)), (1, r(-3.0))]));
    }

    #[test]
    fn log_expand_monomial() {
        let v = c(0.7, 0.3);
        let e = LaurentSeries::monomial(1, v).log_expand(4).unwrap();
        assert_eq!(e.leading_exponent, 1);
        assert!(close(e.coefficients[0], v.ln(), 1e-15));
        assert!(e.coefficients[1..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn log_expand_square() {
        // (u - u^-1)^2 = u^2 (1 - u^-2)^2, ln = 2 ln u + 2 ln(1 - u^-2)
        // = 2 ln u - 2u^-2 - u^-4 + ...
        let a = LaurentSeries::from_terms([(1, r(1.0)), (-1, r(-1.0))]);
        let e = (&a * &a).log_expand(4).unwrap();
        assert_eq!(e.leading_exponent, 2);
        let want = [0.0, 0.0, -2.0, 0.0, -1.0];
        for (got, w) in e.coefficients.iter().zip(want) {
            assert!(close(*got, r(w), 1e-14), "{got} vs {w}");
        }
    }

    #[test]
    fn log_expand_zero_fails() {
        assert_eq!(
            LaurentSeries::zero().log_expand(3),
            Err(Error::EmptyGeneratingFunctional)
        );
    }

    #[test]
    fn inverse_of_monomial_and_geometric() {
        let inv = LaurentSeries::monomial(1, r(1.0)).series_inverse(3).unwrap();
        assert_eq!(inv.coeff(-1), r(1.0));
        assert_eq!(inv.len(), 1);

        let p = LaurentSeries::from_terms([(1, r(1.0)), (-1, r(-1.0))]);
        let q = p.series_inverse(4).unwrap();
        let want = LaurentSeries::from_terms([(-1, r(1.0)), (-3, r(1.0)), (-5, r(1.0))]);
        for e in -5..=0 {
            assert!(close(q.coeff(e), want.coeff(e), 1e-15));
        }
        assert_eq!(q.truncation_order(), Some(-5));
        assert!(LaurentSeries::zero().series_inverse(2).is_err());
    }

    #[test]
    fn truncation_tracks_through_products() {
        let p = LaurentSeries::from_terms([(2, r(1.0)), (0, r(3.0))]);
        let q = p.series_inverse(4).unwrap(); // known down to u^-6
        let prod = &p * &q;
        assert_eq!(prod.truncation_order(), Some(-4));
        assert!(close(prod.coeff(0), r(1.0), 1e-15));
        for e in -4..0 {
            assert!(prod.coeff(e).norm() < 1e-14);
        }
        assert!(prod.known_coeff(-5).is_err());
    }

    fn brute_convolution(a: &[(i32, Complex64)], b: &[(i32, Complex64)]) -> BTreeMap<i32, Complex64> {
        let mut out = BTreeMap::new();
        for &(ea, ca) in a {
            for &(eb, cb) in b {
                *out.entry(ea + eb).or_insert(c(0.0, 0.0)) += ca * cb;
            }
        }
        out
    }

    fn arb_poly() -> impl Strategy<Value = Vec<(i32, Complex64)>> {
        prop::collection::vec((-4i32..=4, -1.0f64..1.0, -1.0f64..1.0), 1..6)
            .prop_map(|v| v.into_iter().map(|(e, a, b)| (e, c(a, b))).collect())
    }

    proptest! {
        #[test]
        fn mul_matches_brute_force(a in arb_poly(), b in arb_poly()) {
            let pa = LaurentSeries::from_terms(a.clone());
            let pb = LaurentSeries::from_terms(b.clone());
            let p = &pa * &pb;
            let oracle = brute_convolution(&a, &b);
            let scale = oracle.values().map(|x| x.norm()).fold(1.0, f64::max);
            for (e, want) in oracle {
                prop_assert!((p.coeff(e) - want).norm() <= 1e-14 * scale);
            }
        }

        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), d in arb_poly()) {
            let (pa, pb, pd) = (LaurentSeries::from_terms(a), LaurentSeries::from_terms(b), LaurentSeries::from_terms(d));
            let lhs = &(&pa * &pb) * &pd;
            let rhs = &pa * &(&pb * &pd);
            let dl = &pa * &(&pb + &pd);
            let dr = &(&pa * &pb) + &(&pa * &pd);
            let scale = 1.0f64.max(lhs.max_abs_coeff()).max(dl.max_abs_coeff());
            for e in -12..=12 {
                prop_assert!((lhs.coeff(e) - rhs.coeff(e)).norm() <= 1e-14 * scale);
                prop_assert!((dl.coeff(e) - dr.coeff(e)).norm() <= 1e-14 * scale);
            }
        }

        #[test]
        fn log_expand_roundtrip(a in arb_poly(), lead in (0.5f64..2.0, -1.0f64..1.0)) {
            let mut terms = a.into_iter().map(|(e, v)| (e - 5, v)).collect::<Vec<_>>();
            terms.push((0, c(lead.0, lead.1)));
            let p = LaurentSeries::from_terms(terms);
            let depth = 5;
            let e1 = p.log_expand(depth).unwrap();
            let rebuilt = e1.exponentiate();
            let e2 = rebuilt.log_expand(depth).unwrap();
            prop_assert_eq!(e1.leading_exponent, e2.leading_exponent);
            for (x, y) in e1.coefficients.iter().zip(&e2.coefficients) {
                prop_assert!((x - y).norm() <= 1e-12 * (1.0 + x.norm()));
            }
        }

        #[test]
        fn inverse_self_consistent(a in arb_poly(), lead in (0.5f64..2.0, -1.0f64..1.0)) {
            let mut terms = a.into_iter().map(|(e, v)| (e - 5, v)).collect::<Vec<_>>();
            terms.push((0, c(lead.0, lead.1)));
            let p = LaurentSeries::from_terms(terms);
            let q = p.series_inverse(6).unwrap();
            let one = &p * &q;
            let t = one.truncation_order().unwrap();
            prop_assert_eq!(t, -6);
            prop_assert!((one.coeff(0) - c(1.0, 0.0)).norm() < 1e-14);
            for e in t..0 {
                prop_assert!(one.coeff(e).norm() < 1e-14 * q.max_abs_coeff().max(1.0) * p.max_abs_coeff().max(1.0));
            }
        }

        #[test]
        fn chain_associative(a in arb_poly(), b in arb_poly(), d in arb_poly(), f in arb_poly()) {
            let m = |x: &Vec<(i32, Complex64)>, y: &Vec<(i32, Complex64)>| LaurentMatrix::new(
                LaurentSeries::from_terms(x.clone()), LaurentSeries::from_terms(y.clone()),
                LaurentSeries::from_terms(y.clone()).shift(1), LaurentSeries::from_terms(x.clone()).shift(-1));
            let (ma, mb, mc) = (m(&a, &b), m(&d, &f), m(&b, &d));
            let left = ma.matmul(&mb).matmul(&mc);
            let right = ma.matmul(&mb.matmul(&mc));
            for i in 0..2 { for j in 0..2 {
                let (l, r) = (left.get(i, j), right.get(i, j));
                let scale = l.max_abs_coeff().max(1.0);
                for e in -20..=20 {
                    prop_assert!((l.coeff(e) - r.coeff(e)).norm() <= 1e-13 * scale);
                }
            }}
        }
    }
}
