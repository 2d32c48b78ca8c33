//! The lattice with one type-II defect replacing the Lax matrix at site `n`:
//!
//! ```text
//! L̃(u) = [[u e^{−θ} X − u⁻¹ e^{θ} X⁻¹, z̄], [z, u e^{−θ} X⁻¹ − u⁻¹ e^{θ} X]]
//! ```
//!
//! with `{z, X} = z X`, `{z̄, X} = −z̄ X`, `{z, z̄} = 2(X⁻² − X²)`.

use crate::error::{Error, Result};
use crate::lattice::{
    a2_matrix, integrate_generic, lax_velocity, site_rates, Charges, IntegrationOptions, LatticeState, LatticeTangent,
    Monitor, Trajectory, FLOW_SIGN, SINGULAR_EPS,
};
use crate::laurent::{matrix_product_chain, LaurentMatrix, LaurentSeries, LogExpansion};
use crate::rmatrix::{quadratic_algebra_residual, LocalLax};
use crate::{c64, max_abs, Mat2, C64};

fn zero() -> C64 {
    c64(0.0, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefectSite {
    /// 1-based site replaced by the defect.
    pub n: usize,
    pub theta: C64,
    pub z: C64,
    pub z_bar: C64,
    pub x: C64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DefectField {
    Z,
    ZBar,
    X,
}

const DEFECT_FIELDS: [DefectField; 3] = [DefectField::Z, DefectField::ZBar, DefectField::X];

/// Defect bracket table `{f, g}` at `X`.
pub fn defect_bracket(f: DefectField, g: DefectField, z: C64, z_bar: C64, x: C64) -> C64 {
    use DefectField::*;
    match (f, g) {
        (Z, X) => z * x,
        (X, Z) => -z * x,
        (ZBar, X) => -z_bar * x,
        (X, ZBar) => z_bar * x,
        (Z, ZBar) => 2.0 * (x.powi(-2) - x * x),
        (ZBar, Z) => -2.0 * (x.powi(-2) - x * x),
        _ => zero(),
    }
}

impl DefectSite {
    pub fn new(n: usize, theta: C64, z: C64, z_bar: C64, x: C64) -> Result<Self> {
        if !(x.norm() > SINGULAR_EPS) {
            return Err(Error::SingularDefect);
        }
        Ok(Self { n, theta, z, z_bar, x })
    }

    /// `X = 1`, `z = z̄ = 0`, `θ = 0`.
    pub fn transparent(n: usize) -> Self {
        Self {
            n,
            theta: zero(),
            z: zero(),
            z_bar: zero(),
            x: c64(1.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.norm() > SINGULAR_EPS) || !self.x.is_finite() {
            return Err(Error::SingularDefect);
        }
        Ok(())
    }

    /// `y = z X⁻¹`.
    pub fn y(&self) -> C64 {
        self.z / self.x
    }

    /// `ȳ = z̄ X⁻¹`.
    pub fn y_bar(&self) -> C64 {
        self.z_bar / self.x
    }

    pub fn lax(&self) -> Result<LaurentMatrix> {
        self.validate()?;
        let (e, x) = (self.theta.exp(), self.x);
        Ok(LaurentMatrix::new(
            LaurentSeries::from_terms([(1, x / e), (-1, -e / x)]),
            LaurentSeries::constant(self.z_bar),
            LaurentSeries::constant(self.z),
            LaurentSeries::from_terms([(1, (e * x).inv()), (-1, -e * x)]),
        ))
    }

    pub fn lax_at(&self, u: C64) -> Mat2 {
        let (e, x) = (self.theta.exp(), self.x);
        Mat2::new(u * x / e - e / (u * x), self.z_bar, self.z, u / (e * x) - e * x / u)
    }

    /// `dL̃/dt` at `u` given `(ż, ż̄, Ẋ)`.
    pub fn lax_velocity(&self, z_dot: C64, z_bar_dot: C64, x_dot: C64, u: C64) -> Mat2 {
        let (e, x) = (self.theta.exp(), self.x);
        Mat2::new(
            u * x_dot / e + e * x_dot / (u * x * x),
            z_bar_dot,
            z_dot,
            -u * x_dot / (e * x * x) - e * x_dot / u,
        )
    }
}

impl LocalLax for DefectSite {
    fn variable_count(&self) -> usize {
        3
    }

    fn lax(&self, lambda: C64) -> Mat2 {
        self.lax_at(lambda.exp())
    }

    fn lax_gradient(&self, var: usize, lambda: C64) -> Mat2 {
        let u = lambda.exp();
        let (e, x) = (self.theta.exp(), self.x);
        let (o, l) = (zero(), c64(1.0, 0.0));
        match var {
            0 => Mat2::new(o, o, l, o),
            1 => Mat2::new(o, l, o, o),
            _ => Mat2::new(u / e + e / (u * x * x), o, o, -u / (e * x * x) - e / u),
        }
    }

    fn bracket(&self, i: usize, j: usize) -> C64 {
        defect_bracket(DEFECT_FIELDS[i], DEFECT_FIELDS[j], self.z, self.z_bar, self.x)
    }
}

/// Residual of the quadratic algebra for `L̃` at `(λ, μ)`.
pub fn check_defect_algebra(d: &DefectSite, lambda: C64, mu: C64) -> Result<f64> {
    d.validate()?;
    quadratic_algebra_residual(d, lambda, mu)
}

/// Time derivatives of every bulk field and of the defect fields.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectTangent {
    pub bulk: LatticeTangent,
    pub z: C64,
    pub z_bar: C64,
    pub x: C64,
}

impl DefectTangent {
    pub fn max_abs(&self) -> f64 {
        self.bulk
            .max_abs()
            .max(self.z.norm())
            .max(self.z_bar.norm())
            .max(self.x.norm())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.bulk
            .max_abs_diff(&other.bulk)
            .max((self.z - other.z).norm())
            .max((self.z_bar - other.z_bar).norm())
            .max((self.x - other.x).norm())
    }

    pub fn pair(&self, velocity: &Self) -> C64 {
        self.bulk.pair(&velocity.bulk) + self.z * velocity.z + self.z_bar * velocity.z_bar + self.x * velocity.x
    }
}

/// A bulk lattice with one defect. The bulk fields stored at the defect
/// site are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectedLattice {
    pub bulk: LatticeState,
    pub defect: DefectSite,
}

impl DefectedLattice {
    pub fn new(bulk: LatticeState, defect: DefectSite) -> Result<Self> {
        bulk.validate()?;
        defect.validate()?;
        bulk.check_site(defect.n)?;
        Ok(Self { bulk, defect })
    }

    pub fn len(&self) -> usize {
        self.bulk.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bulk.is_empty()
    }

    /// The equations of motion and deformed time-Lax matrices need
    /// `2 ≤ n ≤ N − 1`.
    pub fn check_placement(&self) -> Result<()> {
        let (n, len) = (self.defect.n, self.len());
        if n < 2 || n + 1 > len {
            return Err(Error::DefectPlacement { site: n, len });
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        self.defect.validate()?;
        for (k, v) in self.bulk.v.iter().enumerate() {
            if k + 1 != self.defect.n && (!(v.norm() > SINGULAR_EPS) || !v.is_finite()) {
                return Err(Error::SingularSite { site: k + 1 });
            }
        }
        Ok(())
    }

    fn is_defect(&self, j: isize) -> bool {
        self.bulk.idx(j) + 1 == self.defect.n
    }

    fn n(&self) -> isize {
        self.defect.n as isize
    }

    /// `b̃_{n,n−1} = e^θ y + b_{n−1} X⁻²`.
    pub fn b_tilde(&self) -> C64 {
        let d = &self.defect;
        d.theta.exp() * d.y() + self.bulk.b(self.n() - 1) / (d.x * d.x)
    }

    /// `b̄̃_{n,n+1} = e^θ ȳ + b̄_{n+1} X⁻²`.
    pub fn b_bar_tilde(&self) -> C64 {
        let d = &self.defect;
        d.theta.exp() * d.y_bar() + self.bulk.b_bar(self.n() + 1) / (d.x * d.x)
    }

    pub fn lax(&self, j: usize) -> Result<LaurentMatrix> {
        if j == self.defect.n {
            self.defect.lax()
        } else {
            self.bulk.lax(j)
        }
    }

    pub fn lax_at(&self, j: isize, u: C64) -> Mat2 {
        if self.is_defect(j) {
            self.defect.lax_at(u)
        } else {
            self.bulk.lax_at(j, u)
        }
    }

    /// `L_N ⋯ L̃_n ⋯ L_1`.
    pub fn monodromy(&self) -> Result<LaurentMatrix> {
        let ms = (1..=self.len())
            .rev()
            .map(|j| self.lax(j))
            .collect::<Result<Vec<_>>>()?;
        matrix_product_chain(&ms)
    }

    pub fn trace_at(&self, u: C64) -> C64 {
        let mut t = Mat2::identity();
        for j in 1..=self.len() as isize {
            t = self.lax_at(j, u) * t;
        }
        t.trace()
    }

    pub fn charges_from_trace(&self, depth: usize) -> Result<LogExpansion> {
        if depth < 2 {
            return Err(Error::InvalidArgument("depth must be at least 2".into()));
        }
        self.monodromy()?.trace().log_expand(depth)
    }

    pub fn i2(&self) -> C64 {
        let (s, d, n) = (&self.bulk, &self.defect, self.n());
        let len = self.len() as isize;
        let mut total = zero();
        for j in 1..=len {
            if self.is_defect(j) {
                continue;
            }
            total -= s.v_at(j).powi(-2);
            if !self.is_defect(j + 1) {
                total += s.b_bar(j + 1) * s.b(j);
            }
        }
        let (e, x) = (d.theta.exp(), d.x);
        let (bm, bp) = (s.b(n - 1), s.b_bar(n + 1));
        total + e * (d.y_bar() * bm + bp * d.y()) + bp * bm / (x * x) - e * e / (x * x)
    }

    /// `Ĩ⁽⁰⁾ = Σ_{j≠n} ln v_j + ln X − θ`, `Ĩ⁽¹⁾ = 0`, `Ĩ⁽²⁾`.
    pub fn charges_closed_form(&self) -> Result<Charges> {
        if self.len() < 3 {
            return Err(Error::TooFewSites {
                min: 3,
                got: self.len(),
            });
        }
        self.validate()?;
        let i0 = (1..=self.len())
            .filter(|&j| j != self.defect.n)
            .map(|j| self.bulk.v[j - 1].ln())
            .sum::<C64>()
            + self.defect.x.ln()
            - self.defect.theta;
        Ok(Charges {
            i0,
            i1: zero(),
            i2: self.i2(),
        })
    }

    /// `A_j(μ)` with the deformed `Ã_n`, `Ã_{n+1}`; `j` is periodic.
    pub fn time_lax_at(&self, j: isize, mu: C64) -> Mat2 {
        let s = &self.bulk;
        if self.is_defect(j) {
            a2_matrix(self.b_bar_tilde(), s.b(j - 1), mu)
        } else if self.is_defect(j - 1) {
            a2_matrix(s.b_bar(j), self.b_tilde(), mu)
        } else {
            s.time_lax_a2(j, mu)
        }
    }

    /// `(Ã_n, Ã_{n+1})`.
    pub fn defect_time_lax(&self, mu: C64) -> Result<(Mat2, Mat2)> {
        self.check_placement()?;
        self.validate()?;
        Ok((self.time_lax_at(self.n(), mu), self.time_lax_at(self.n() + 1, mu)))
    }

    /// Explicit bulk-plus-defect equations of motion.
    pub fn eom(&self) -> Result<DefectTangent> {
        self.check_placement()?;
        self.validate()?;
        let (s, d, n) = (&self.bulk, &self.defect, self.n());
        let (bt, bbt) = (self.b_tilde(), self.b_bar_tilde());
        let mut bulk = LatticeTangent::zeros(self.len());
        for k in 0..self.len() {
            let j = k as isize + 1;
            if j == n {
                continue;
            }
            let bp = if j == n - 1 { bbt } else { s.b_bar(j + 1) };
            let bm = if j == n + 1 { bt } else { s.b(j - 1) };
            let (a, ab, v) = site_rates(s.a[k], s.a_bar[k], s.v[k], bp, bm);
            bulk.a[k] = a;
            bulk.a_bar[k] = ab;
            bulk.v[k] = v;
        }
        let (e, x) = (d.theta.exp(), d.x);
        let (bm, bp) = (s.b(n - 1), s.b_bar(n + 1));
        let z = 2.0 * e * bm * x - 2.0 * e * bt / x + bp * bt * d.z + bbt * bm * d.z;
        let z_bar = -2.0 * e * bp * x + 2.0 * e * bbt / x - bp * bt * d.z_bar - bbt * bm * d.z_bar;
        let x_dot = e * bp * d.z - e * d.z_bar * bm;
        Ok(DefectTangent {
            bulk,
            z,
            z_bar,
            x: x_dot,
        })
    }

    /// `∂Ĩ⁽²⁾` with respect to every live variable.
    pub fn i2_gradient(&self) -> DefectTangent {
        let (s, d, n) = (&self.bulk, &self.defect, self.n());
        let (bt, bbt) = (self.b_tilde(), self.b_bar_tilde());
        let mut g = LatticeTangent::zeros(self.len());
        for k in 0..self.len() {
            let j = k as isize + 1;
            if j == n {
                continue;
            }
            let v = s.v[k];
            let bp = if j == n - 1 { bbt } else { s.b_bar(j + 1) };
            let bm = if j == n + 1 { bt } else { s.b(j - 1) };
            g.a[k] = bp / v;
            g.a_bar[k] = bm / v;
            g.v[k] = -(s.a[k] * g.a[k] + s.a_bar[k] * g.a_bar[k]) / v + 2.0 * v.powi(-3);
        }
        let (e, x) = (d.theta.exp(), d.x);
        let (bm, bp) = (s.b(n - 1), s.b_bar(n + 1));
        DefectTangent {
            bulk: g,
            z: e * bp / x,
            z_bar: e * bm / x,
            x: -e * (d.z_bar * bm + bp * d.z) / (x * x) - 2.0 * bp * bm / x.powi(3) + 2.0 * e * e / x.powi(3),
        }
    }

    /// `FLOW_SIGN · {f, H}` for every live variable, given `∂H`.
    pub fn bracket_flow(&self, grad: &DefectTangent) -> DefectTangent {
        let mut bulk = self.bulk.bracket_flow(&grad.bulk);
        let k = self.defect.n - 1;
        bulk.a[k] = zero();
        bulk.a_bar[k] = zero();
        bulk.v[k] = zero();
        let d = &self.defect;
        let gv = [grad.z, grad.z_bar, grad.x];
        let flow = |f: DefectField| -> C64 {
            DEFECT_FIELDS
                .iter()
                .zip(gv)
                .map(|(&g, dg)| defect_bracket(f, g, d.z, d.z_bar, d.x) * dg)
                .sum::<C64>()
                * FLOW_SIGN
        };
        DefectTangent {
            bulk,
            z: flow(DefectField::Z),
            z_bar: flow(DefectField::ZBar),
            x: flow(DefectField::X),
        }
    }

    /// `max |L̇_j − (A_{j+1} L_j − L_j A_j)|` at site `j`, with `L̃` and the
    /// deformed `Ã` where they apply.
    pub fn zero_curvature_residual(&self, j: usize, mu: C64) -> Result<f64> {
        self.bulk.check_site(j)?;
        let vel = self.eom()?;
        let w = mu.exp();
        let jj = j as isize;
        let k = j - 1;
        let (ldot, l) = if j == self.defect.n {
            (
                self.defect.lax_velocity(vel.z, vel.z_bar, vel.x, w),
                self.defect.lax_at(w),
            )
        } else {
            let b = &vel.bulk;
            (
                lax_velocity(self.bulk.v[k], b.a[k], b.a_bar[k], b.v[k], w),
                self.bulk.lax_at(jj, w),
            )
        };
        let rhs = self.time_lax_at(jj + 1, mu) * l - l * self.time_lax_at(jj, mu);
        Ok(max_abs(&(ldot - rhs)))
    }

    fn to_flat(&self) -> Vec<C64> {
        let s = &self.bulk;
        let d = &self.defect;
        [s.a.as_slice(), &s.a_bar, &s.v, &[d.z, d.z_bar, d.x]].concat()
    }

    fn with_flat(&self, y: &[C64]) -> Self {
        let n = self.len();
        let mut out = self.clone();
        out.bulk.a.copy_from_slice(&y[..n]);
        out.bulk.a_bar.copy_from_slice(&y[n..2 * n]);
        out.bulk.v.copy_from_slice(&y[2 * n..3 * n]);
        out.defect.z = y[3 * n];
        out.defect.z_bar = y[3 * n + 1];
        out.defect.x = y[3 * n + 2];
        out
    }

    /// RK4 integration of [`DefectedLattice::eom`].
    pub fn integrate(&self, dt: f64, t_end: f64, opts: &IntegrationOptions) -> Result<Trajectory<DefectedLattice>> {
        self.check_placement()?;
        self.validate()?;
        let rhs = |_t: f64, y: &[C64]| -> Result<Vec<C64>> {
            let d = self.with_flat(y).eom()?;
            let b = d.bulk;
            Ok([b.a.as_slice(), &b.a_bar, &b.v, &[d.z, d.z_bar, d.x]].concat())
        };
        let monitor = |s: &DefectedLattice| Monitor {
            log_i0: (1..=s.len())
                .filter(|&j| j != s.defect.n)
                .map(|j| s.bulk.v[j - 1])
                .chain([s.defect.x])
                .collect(),
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
                let s = self.with_flat(y);
                s.validate().map(|_| s)
            },
            rhs,
            monitor,
        )
    }
}
