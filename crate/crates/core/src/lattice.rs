//! The periodic deformed-oscillator lattice.
//!
//! Sites are numbered `1..=N` in the public API and indices wrap around
//! (`N + 1 ≡ 1`). The Lax matrix at site `n` is
//!
//! ```text
//! L_n(u) = [[u v_n − u⁻¹ v_n⁻¹, ā_n], [a_n, −u⁻¹ v_n]],   u = e^λ
//! ```
//!
//! and the local brackets are `{a, v} = a v`, `{ā, v} = −ā v`,
//! `{a, ā} = −2 v²`, all others zero.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::laurent::{matrix_product_chain, LaurentMatrix, LaurentSeries, LogExpansion};
use crate::ode::{rk4_step, step_plan};
use crate::rmatrix::{coth_series, csch_series, kron, LocalLax};
use crate::{c64, max_abs, Mat2, Mat4, C64};

/// The explicit equations of motion are `ḟ = FLOW_SIGN · {f, I⁽²⁾}`.
pub const FLOW_SIGN: f64 = -1.0;

/// Constant relating the expansion of the r-matrix trace formula to the
/// explicit `A⁽²⁾`.
pub const TIME_LAX_NORMALIZATION: f64 = 1.0;

/// Smallest `|v|` accepted before a site counts as singular.
pub const SINGULAR_EPS: f64 = 1e-12;

fn zero() -> C64 {
    c64(0.0, 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeState {
    pub a: Vec<C64>,
    pub a_bar: Vec<C64>,
    pub v: Vec<C64>,
}

/// Per-site values of the three fields; used for time derivatives and
/// gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeTangent {
    pub a: Vec<C64>,
    pub a_bar: Vec<C64>,
    pub v: Vec<C64>,
}

impl LatticeTangent {
    pub fn zeros(n: usize) -> Self {
        Self {
            a: vec![zero(); n],
            a_bar: vec![zero(); n],
            v: vec![zero(); n],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.a
            .iter()
            .chain(&self.a_bar)
            .chain(&self.v)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        d(&self.a, &other.a)
            .max(d(&self.a_bar, &other.a_bar))
            .max(d(&self.v, &other.v))
    }

    /// `Σ_j (g_a ȧ + g_ā ā̇ + g_v v̇)`.
    pub fn pair(&self, velocity: &Self) -> C64 {
        let dot = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<C64>();
        dot(&self.a, &velocity.a) + dot(&self.a_bar, &velocity.a_bar) + dot(&self.v, &velocity.v)
    }
}

/// Charges read off `ln tr T = N ln u + I⁽⁰⁾ + I⁽¹⁾u⁻¹ + I⁽²⁾u⁻² + …`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Charges {
    pub i0: C64,
    pub i1: C64,
    pub i2: C64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    A,
    ABar,
    V,
}

/// A field at a site, 1-based; parses from `a_3`, `abar_3`, `v_3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldRef {
    pub field: Field,
    pub site: usize,
}

impl FieldRef {
    pub fn new(field: Field, site: usize) -> Self {
        Self { field, site }
    }
}

impl FromStr for FieldRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownField(s.to_string());
        let (name, site) = s.split_once('_').ok_or_else(unknown)?;
        let field = match name {
            "a" => Field::A,
            "abar" | "a_bar" => Field::ABar,
            "v" => Field::V,
            _ => return Err(unknown()),
        };
        let site = site.parse().map_err(|_| unknown())?;
        Ok(Self { field, site })
    }
}

impl fmt::Display for FieldRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.field {
            Field::A => "a",
            Field::ABar => "abar",
            Field::V => "v",
        };
        write!(f, "{name}_{}", self.site)
    }
}

/// Same-site bracket table `{f, g}` given the site's `(a, ā, v)`.
pub fn site_bracket(f: Field, g: Field, a: C64, a_bar: C64, v: C64) -> C64 {
    use Field::*;
    match (f, g) {
        (A, V) => a * v,
        (V, A) => -a * v,
        (ABar, V) => -a_bar * v,
        (V, ABar) => a_bar * v,
        (A, ABar) => -2.0 * v * v,
        (ABar, A) => 2.0 * v * v,
        _ => zero(),
    }
}

/// `[[2w² − b̄ b, 2w b̄], [2w b, b̄ b]]` with `w = e^μ`.
pub fn a2_matrix(b_bar: C64, b: C64, mu: C64) -> Mat2 {
    let w = mu.exp();
    Mat2::new(2.0 * w * w - b_bar * b, 2.0 * w * b_bar, 2.0 * w * b, b_bar * b)
}

/// `A⁽⁰⁾ = diag(1, 0)`.
pub fn time_lax_a0() -> Mat2 {
    Mat2::new(c64(1.0, 0.0), zero(), zero(), zero())
}

/// `A⁽¹⁾ = 0`.
pub fn time_lax_a1() -> Mat2 {
    Mat2::zeros()
}

/// Numeric Lax matrix from site fields at `u`.
pub fn lax_from_fields(a: C64, a_bar: C64, v: C64, u: C64) -> Mat2 {
    Mat2::new(u * v - (u * v).inv(), a_bar, a, -v / u)
}

/// `dL/dt` at `u` given field velocities.
pub fn lax_velocity(v: C64, a_dot: C64, a_bar_dot: C64, v_dot: C64, u: C64) -> Mat2 {
    Mat2::new(u * v_dot + v_dot / (v * v * u), a_bar_dot, a_dot, -v_dot / u)
}

/// One site seen as a [`LocalLax`] over the variables `(a, ā, v)`.
pub struct SiteLax {
    pub a: C64,
    pub a_bar: C64,
    pub v: C64,
}

impl LocalLax for SiteLax {
    fn variable_count(&self) -> usize {
        3
    }

    fn lax(&self, lambda: C64) -> Mat2 {
        lax_from_fields(self.a, self.a_bar, self.v, lambda.exp())
    }

    fn lax_gradient(&self, var: usize, lambda: C64) -> Mat2 {
        let u = lambda.exp();
        let (o, l) = (zero(), c64(1.0, 0.0));
        match var {
            0 => Mat2::new(o, o, l, o),
            1 => Mat2::new(o, l, o, o),
            _ => Mat2::new(u + (self.v * self.v * u).inv(), o, o, -u.inv()),
        }
    }

    fn bracket(&self, i: usize, j: usize) -> C64 {
        const F: [Field; 3] = [Field::A, Field::ABar, Field::V];
        site_bracket(F[i], F[j], self.a, self.a_bar, self.v)
    }
}

impl LatticeState {
    pub fn new(a: Vec<C64>, a_bar: Vec<C64>, v: Vec<C64>) -> Result<Self> {
        if a.len() != a_bar.len() || a.len() != v.len() {
            return Err(Error::LengthMismatch);
        }
        if a.is_empty() {
            return Err(Error::TooFewSites { min: 1, got: 0 });
        }
        let s = Self { a, a_bar, v };
        s.validate()?;
        Ok(s)
    }

    /// `a = ā = 0`, `v = 1` at every site.
    pub fn zero_amplitude(n: usize) -> Self {
        Self {
            a: vec![zero(); n],
            a_bar: vec![zero(); n],
            v: vec![c64(1.0, 0.0); n],
        }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (j, v) in self.v.iter().enumerate() {
            if !(v.norm() > SINGULAR_EPS) || !v.is_finite() {
                return Err(Error::SingularSite { site: j + 1 });
            }
        }
        if self.a.iter().chain(&self.a_bar).any(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument("non-finite field".into()));
        }
        Ok(())
    }

    /// 0-based storage index of the (periodic, 1-based) site `j`.
    pub fn idx(&self, j: isize) -> usize {
        (j - 1).rem_euclid(self.len() as isize) as usize
    }

    pub fn check_site(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.len() {
            return Err(Error::SiteOutOfRange {
                site: j,
                len: self.len(),
            });
        }
        Ok(())
    }

    pub fn a_at(&self, j: isize) -> C64 {
        self.a[self.idx(j)]
    }

    pub fn a_bar_at(&self, j: isize) -> C64 {
        self.a_bar[self.idx(j)]
    }

    pub fn v_at(&self, j: isize) -> C64 {
        self.v[self.idx(j)]
    }

    /// `b_j = a_j / v_j`.
    pub fn b(&self, j: isize) -> C64 {
        self.a_at(j) / self.v_at(j)
    }

    /// `b̄_j = ā_j / v_j`.
    pub fn b_bar(&self, j: isize) -> C64 {
        self.a_bar_at(j) / self.v_at(j)
    }

    pub fn site_lax(&self, j: usize) -> SiteLax {
        let k = self.idx(j as isize);
        SiteLax {
            a: self.a[k],
            a_bar: self.a_bar[k],
            v: self.v[k],
        }
    }

    /// `L_j` as an exact Laurent matrix.
    pub fn lax(&self, j: usize) -> Result<LaurentMatrix> {
        self.check_site(j)?;
        let k = j - 1;
        let v = self.v[k];
        if v.norm() <= SINGULAR_EPS {
            return Err(Error::SingularSite { site: j });
        }
        Ok(LaurentMatrix::new(
            LaurentSeries::from_terms([(1, v), (-1, -v.inv())]),
            LaurentSeries::constant(self.a_bar[k]),
            LaurentSeries::constant(self.a[k]),
            LaurentSeries::monomial(-1, -v),
        ))
    }

    /// `L_j(u)` evaluated numerically; `j` is periodic.
    pub fn lax_at(&self, j: isize, u: C64) -> Mat2 {
        let k = self.idx(j);
        lax_from_fields(self.a[k], self.a_bar[k], self.v[k], u)
    }

    /// Ordered product `L_hi ⋯ L_lo` (identity when `hi < lo`).
    pub fn partial_monodromy(&self, hi: usize, lo: usize) -> Result<LaurentMatrix> {
        if hi < lo {
            return Ok(LaurentMatrix::identity());
        }
        let ms = (lo..=hi).rev().map(|j| self.lax(j)).collect::<Result<Vec<_>>>()?;
        matrix_product_chain(&ms)
    }

    /// `T = L_N ⋯ L_1`.
    pub fn monodromy(&self) -> Result<LaurentMatrix> {
        self.partial_monodromy(self.len(), 1)
    }

    /// `tr T(u)` evaluated numerically.
    pub fn trace_at(&self, u: C64) -> C64 {
        let mut t = Mat2::identity();
        for j in 1..=self.len() as isize {
            t = self.lax_at(j, u) * t;
        }
        t.trace()
    }

    pub fn i2(&self) -> C64 {
        let n = self.len() as isize;
        (1..=n)
            .map(|j| self.b_bar(j + 1) * self.b(j) - self.v_at(j).powi(-2))
            .sum()
    }

    pub fn charges_closed_form(&self) -> Result<Charges> {
        if self.len() < 2 {
            return Err(Error::TooFewSites {
                min: 2,
                got: self.len(),
            });
        }
        self.validate()?;
        Ok(Charges {
            i0: self.v.iter().map(|v| v.ln()).sum(),
            i1: zero(),
            i2: self.i2(),
        })
    }

    /// `log_expand(tr T, depth)`.
    pub fn charges_from_trace(&self, depth: usize) -> Result<LogExpansion> {
        if depth < 2 {
            return Err(Error::InvalidArgument("depth must be at least 2".into()));
        }
        self.monodromy()?.trace().log_expand(depth)
    }

    /// `∂I⁽²⁾/∂(a_j, ā_j, v_j)`.
    pub fn i2_gradient(&self) -> LatticeTangent {
        let n = self.len();
        let mut g = LatticeTangent::zeros(n);
        for k in 0..n {
            let j = k as isize + 1;
            let v = self.v[k];
            g.a[k] = self.b_bar(j + 1) / v;
            g.a_bar[k] = self.b(j - 1) / v;
            g.v[k] = -(self.b_bar(j + 1) * self.b(j) + self.b_bar(j) * self.b(j - 1)) / v + 2.0 * v.powi(-3);
        }
        g
    }

    /// `FLOW_SIGN · {f, H}` for every field, given `∂H`.
    pub fn bracket_flow(&self, grad: &LatticeTangent) -> LatticeTangent {
        use Field::*;
        let n = self.len();
        let mut out = LatticeTangent::zeros(n);
        for k in 0..n {
            let (a, ab, v) = (self.a[k], self.a_bar[k], self.v[k]);
            let br = |f: Field| {
                site_bracket(f, A, a, ab, v) * grad.a[k]
                    + site_bracket(f, ABar, a, ab, v) * grad.a_bar[k]
                    + site_bracket(f, V, a, ab, v) * grad.v[k]
            };
            out.a[k] = br(A) * FLOW_SIGN;
            out.a_bar[k] = br(ABar) * FLOW_SIGN;
            out.v[k] = br(V) * FLOW_SIGN;
        }
        out
    }

    /// Explicit bulk equations of motion.
    pub fn bulk_eom(&self) -> Result<LatticeTangent> {
        self.validate()?;
        let n = self.len();
        let mut out = LatticeTangent::zeros(n);
        for k in 0..n {
            let j = k as isize + 1;
            let (bp, bm) = (self.b_bar(j + 1), self.b(j - 1));
            let rates = site_rates(self.a[k], self.a_bar[k], self.v[k], bp, bm);
            out.a[k] = rates.0;
            out.a_bar[k] = rates.1;
            out.v[k] = rates.2;
        }
        Ok(out)
    }

    /// `A⁽²⁾_j(μ)`; `j` is periodic.
    pub fn time_lax_a2(&self, j: isize, mu: C64) -> Mat2 {
        a2_matrix(self.b_bar(j), self.b(j - 1), mu)
    }

    /// Expansion coefficients `𝔸⁽⁰⁾ ..= 𝔸⁽ᵈᵉᵖᵗʰ⁾` (in powers of `u⁻¹`) of
    /// `t⁻¹(λ) tr_a{T_a(N, j) r_ab(λ−μ) T_a(j−1, 1)}`.
    pub fn time_lax_from_rmatrix(&self, j: usize, mu: C64, depth: usize) -> Result<Vec<Mat2>> {
        self.check_site(j)?;
        if depth < 2 {
            return Err(Error::InvalidArgument("depth must be at least 2".into()));
        }
        let t1 = self.partial_monodromy(self.len(), j)?;
        let t2 = self.partial_monodromy(j - 1, 1)?;
        rmatrix_trace_coefficients(&t1, &t2, mu, depth)
    }

    /// `max |L̇_j(μ) − (A_{j+1} L_j − L_j A_j)|` with `L̇_j` from the
    /// equations of motion.
    pub fn zero_curvature_residual(&self, j: usize, mu: C64) -> Result<f64> {
        self.check_site(j)?;
        let vel = self.bulk_eom()?;
        let k = j - 1;
        let w = mu.exp();
        let jj = j as isize;
        let ldot = lax_velocity(self.v[k], vel.a[k], vel.a_bar[k], vel.v[k], w);
        let l = self.lax_at(jj, w);
        let rhs = self.time_lax_a2(jj + 1, mu) * l - l * self.time_lax_a2(jj, mu);
        Ok(max_abs(&(ldot - rhs)))
    }

    /// Left side of the quadratic algebra between two different sites.
    pub fn cross_site_bracket(&self, j: usize, m: usize, lambda: C64, mu: C64) -> Result<Mat4> {
        self.check_site(j)?;
        self.check_site(m)?;
        let (sj, sm) = (self.site_lax(j), self.site_lax(m));
        let mut lhs = Mat4::zeros();
        const F: [Field; 3] = [Field::A, Field::ABar, Field::V];
        for (p, fp) in F.iter().enumerate() {
            for (q, fq) in F.iter().enumerate() {
                let b = poisson_bracket(FieldRef::new(*fp, j), FieldRef::new(*fq, m), self)?;
                lhs += kron(&sj.lax_gradient(p, lambda), &sm.lax_gradient(q, mu)) * b;
            }
        }
        Ok(lhs)
    }

    fn to_flat(&self) -> Vec<C64> {
        [self.a.as_slice(), &self.a_bar, &self.v].concat()
    }

    fn from_flat(y: &[C64]) -> Self {
        let n = y.len() / 3;
        Self {
            a: y[..n].to_vec(),
            a_bar: y[n..2 * n].to_vec(),
            v: y[2 * n..].to_vec(),
        }
    }

    /// RK4 integration of the bulk equations of motion.
    pub fn integrate(&self, dt: f64, t_end: f64, opts: &IntegrationOptions) -> Result<Trajectory<LatticeState>> {
        self.validate()?;
        let rhs = |_t: f64, y: &[C64]| -> Result<Vec<C64>> {
            let s = LatticeState::from_flat(y);
            let d = s.bulk_eom()?;
            Ok([d.a, d.a_bar, d.v].concat())
        };
        let monitor = |s: &LatticeState| Monitor {
            log_i0: s.v.clone(),
            i2: s.i2(),
            traces: opts.probes.iter().map(|&u| s.trace_at(u)).collect(),
        };
        integrate_generic(
            self.clone(),
            dt,
            t_end,
            opts,
            |s| s.to_flat(),
            |y| {
                let s = LatticeState::from_flat(y);
                s.validate().map(|_| s)
            },
            rhs,
            monitor,
        )
    }
}

/// `(ȧ, ā̇, v̇)` at one site given its fields and the neighbour values
/// `b̄_{j+1}` (`bp`) and `b_{j−1}` (`bm`).
pub fn site_rates(a: C64, a_bar: C64, v: C64, bp: C64, bm: C64) -> (C64, C64, C64) {
    let (b, bb) = (a / v, a_bar / v);
    let a_dot = 2.0 * bm * v - 2.0 * b / v + bp * b * a + bb * bm * a;
    let a_bar_dot = -2.0 * bp * v + 2.0 * bb / v - bp * b * a_bar - bb * bm * a_bar;
    let v_dot = bp * a - a_bar * bm;
    (a_dot, a_bar_dot, v_dot)
}

/// Coefficients of `t⁻¹ [[coth·M11, csch·M12], [csch·M21, coth·M22]]`,
/// `M = T2 T1`, `t = tr M`, in powers `u⁰ ..= u^{-depth}`.
pub fn rmatrix_trace_coefficients(t1: &LaurentMatrix, t2: &LaurentMatrix, mu: C64, depth: usize) -> Result<Vec<Mat2>> {
    let m = t2.matmul(t1);
    let t_inv = m.trace().series_inverse(depth)?;
    let w = mu.exp();
    let (ct, cs) = (coth_series(w, depth), csch_series(w, depth));
    let entry = |i: usize, j: usize| {
        let k = if i == j { &ct } else { &cs };
        &(k * m.get(i, j)) * &t_inv
    };
    let a = LaurentMatrix::new(entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1));
    (0..=depth as i32)
        .map(|k| a.coeff_matrix(-k).map(|c| c * c64(TIME_LAX_NORMALIZATION, 0.0)))
        .collect()
}

/// `{f, g}` from the ultralocal bracket table.
pub fn poisson_bracket(f: FieldRef, g: FieldRef, s: &LatticeState) -> Result<C64> {
    s.check_site(f.site)?;
    s.check_site(g.site)?;
    if f.site != g.site {
        return Ok(zero());
    }
    let k = f.site - 1;
    Ok(site_bracket(f.field, g.field, s.a[k], s.a_bar[k], s.v[k]))
}

/// Residual of the quadratic algebra for `L_j` at `(λ, μ)`.
pub fn check_quadratic_algebra(s: &LatticeState, lambda: C64, mu: C64, j: usize) -> Result<f64> {
    s.check_site(j)?;
    s.validate()?;
    crate::rmatrix::quadratic_algebra_residual(&s.site_lax(j), lambda, mu)
}

/// `∂{f, g}/∂x` for the site bracket table, `x ∈ (a, ā, v)`.
pub fn site_bracket_gradient(f: Field, g: Field, x: Field, a: C64, a_bar: C64, v: C64) -> C64 {
    use Field::*;
    let (sign, f, g) = match (f, g) {
        (V, A) | (V, ABar) | (ABar, A) => (-1.0, g, f),
        _ => (1.0, f, g),
    };
    let d = match (f, g, x) {
        (A, V, A) => v,
        (A, V, V) => a,
        (ABar, V, ABar) => -v,
        (ABar, V, V) => -a_bar,
        (A, ABar, V) => -4.0 * v,
        _ => zero(),
    };
    d * sign
}

/// Jacobi identity of the site bracket table at `(a, ā, v)`.
pub fn jacobi_residual(a: C64, a_bar: C64, v: C64) -> f64 {
    const F: [Field; 3] = [Field::A, Field::ABar, Field::V];
    crate::rmatrix::jacobi_residual(
        3,
        |i, j| site_bracket(F[i], F[j], a, a_bar, v),
        |i, j, m| site_bracket_gradient(F[i], F[j], F[m], a, a_bar, v),
    )
}

/// Options for the RK4 drivers.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrationOptions {
    /// Spectral probes `u*` at which `tr T(u*)` is monitored.
    pub probes: Vec<C64>,
    /// Keep every `record_every`-th state in the trajectory.
    pub record_every: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            probes: vec![c64(2.0, 0.0), c64(3.0, 0.0)],
            record_every: 1,
        }
    }
}

/// Monitored quantities at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservedSample {
    pub t: f64,
    /// `Σ ln(v_j(t)/v_j(0))` (plus `ln(X(t)/X(0))` with a defect): the
    /// branch-free change of `I⁽⁰⁾`.
    pub delta_i0: C64,
    pub i2: C64,
    pub traces: Vec<C64>,
}

/// Largest deviation from the initial value over the run.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationReport {
    pub steps: usize,
    pub dt: f64,
    pub i0_drift: f64,
    pub i2_drift: f64,
    /// Relative drift `|tr T(u*) − tr T₀(u*)| / |tr T₀(u*)|` per probe.
    pub trace_drift: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub series: Vec<ConservedSample>,
    pub report: ConservationReport,
    /// Set when the run stopped early; the recorded part is kept.
    pub abort: Option<Error>,
}

pub(crate) struct Monitor {
    /// Values whose logs sum to `I⁽⁰⁾` up to constants.
    pub log_i0: Vec<C64>,
    pub i2: C64,
    pub traces: Vec<C64>,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn integrate_generic<S, Flat, Unflat, Rhs, Mon>(
    initial: S,
    dt: f64,
    t_end: f64,
    opts: &IntegrationOptions,
    flatten: Flat,
    unflatten: Unflat,
    rhs: Rhs,
    monitor: Mon,
) -> Result<Trajectory<S>>
where
    S: Clone,
    Flat: Fn(&S) -> Vec<C64>,
    Unflat: Fn(&[C64]) -> Result<S>,
    Rhs: Fn(f64, &[C64]) -> Result<Vec<C64>>,
    Mon: Fn(&S) -> Monitor,
{
    if !(dt > 0.0) || !(t_end >= dt) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < dt <= t_end, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let every = opts.record_every.max(1);
    let (steps, h) = step_plan(dt, t_end);
    let m0 = monitor(&initial);
    let sample = |t: f64, m: &Monitor| ConservedSample {
        t,
        delta_i0: m.log_i0.iter().zip(&m0.log_i0).map(|(x, x0)| (x / x0).ln()).sum(),
        i2: m.i2,
        traces: m.traces.clone(),
    };
    let mut report = ConservationReport {
        steps: 0,
        dt: h,
        i0_drift: 0.0,
        i2_drift: 0.0,
        trace_drift: vec![0.0; m0.traces.len()],
    };
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![initial.clone()],
        series: vec![sample(0.0, &m0)],
        report: report.clone(),
        abort: None,
    };
    let mut y = flatten(&initial);
    for k in 0..steps {
        let t = k as f64 * h;
        let next = rk4_step(&rhs, t, &y, h).and_then(|y1| unflatten(&y1).map(|s| (y1, s)));
        let (y1, s) = match next {
            Ok(v) => v,
            Err(e) => {
                traj.abort = Some(e);
                break;
            }
        };
        y = y1;
        let m = monitor(&s);
        let smp = sample(t + h, &m);
        report.steps = k + 1;
        report.i0_drift = report.i0_drift.max(smp.delta_i0.norm());
        report.i2_drift = report.i2_drift.max((m.i2 - m0.i2).norm());
        for (d, (tr, tr0)) in report.trace_drift.iter_mut().zip(m.traces.iter().zip(&m0.traces)) {
            *d = d.max((tr - tr0).norm() / tr0.norm());
        }
        if (k + 1) % every == 0 || k + 1 == steps {
            traj.times.push(t + h);
            traj.states.push(s);
            traj.series.push(smp);
        }
    }
    traj.report = report;
    Ok(traj)
}
