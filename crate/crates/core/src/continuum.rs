//! Liouville field theory on a periodic interval `[−L, L)`.
//!
//! Lax pair, with `u = e^λ`:
//!
//! ```text
//! U = ½ [[−iπ, −2e^{−λ−iφ}], [4 sinh(λ−iφ), iπ]]
//! V = ½ [[−iφ_x, 2e^{−λ−iφ}], [4 cosh(λ−iφ), iφ_x]]
//! ```
//!
//! whose zero-curvature condition is `φ_tt − φ_xx − 4i e^{−2iφ} = 0`.

use nalgebra::{DMatrix, DVector, Matrix4};

use crate::error::{Error, Result};
use crate::ode::{rk4_step, step_plan};
use crate::rmatrix::{commutator2, commutator4, kron, r_matrix};
use crate::{c64, max_abs, Mat2, C64, I};

/// The classical linear algebra holds with `{φ(x), π(y)} = 2 δ(x − y)`
/// for the normalisation of `U` and `r` used here.
pub const LINEAR_ALGEBRA_BRACKET_SCALE: f64 = 2.0;

/// `P = MOMENTUM_RATIO · (I⁽¹⁾_sym − I⁽¹⁾)`.
pub const MOMENTUM_RATIO: f64 = -2.0;
/// `H = HAMILTONIAN_RATIO · (I⁽¹⁾_sym + I⁽¹⁾)`.
pub const HAMILTONIAN_RATIO: f64 = -2.0;

/// Default small-`u` window, sample count and highest power for
/// [`monodromy_fit`]. The free field alone contributes `−L u³/4`, so a
/// cubic term is kept.
pub const FIT_WINDOW: (f64, f64) = (0.05, 0.2);
pub const FIT_POINTS: usize = 8;
pub const FIT_MAX_POWER: i32 = 3;

/// Fields above this modulus count as a blow-up in [`evolve`].
pub const BLOW_UP_THRESHOLD: f64 = 1e6;

fn zero() -> C64 {
    c64(0.0, 0.0)
}

pub fn lax_u(phi: C64, pi: C64, lambda: C64) -> Mat2 {
    Mat2::new(
        -I * pi,
        -2.0 * (-lambda - I * phi).exp(),
        4.0 * (lambda - I * phi).sinh(),
        I * pi,
    ) * c64(0.5, 0.0)
}

pub fn lax_v(phi: C64, phi_x: C64, lambda: C64) -> Mat2 {
    Mat2::new(
        -I * phi_x,
        2.0 * (-lambda - I * phi).exp(),
        4.0 * (lambda - I * phi).cosh(),
        I * phi_x,
    ) * c64(0.5, 0.0)
}

/// `∂U/∂φ`.
pub fn lax_u_dphi(phi: C64, lambda: C64) -> Mat2 {
    Mat2::new(
        zero(),
        2.0 * I * (-lambda - I * phi).exp(),
        -4.0 * I * (lambda - I * phi).cosh(),
        zero(),
    ) * c64(0.5, 0.0)
}

/// `∂U/∂π`.
pub fn lax_u_dpi() -> Mat2 {
    Mat2::new(-I, zero(), zero(), I) * c64(0.5, 0.0)
}

/// `g = e^{−iφσ^z/2}`.
pub fn gauge_matrix(phi: C64) -> Mat2 {
    Mat2::new((-I * phi / 2.0).exp(), zero(), zero(), (I * phi / 2.0).exp())
}

/// `Ũ = g⁻¹ U g − g⁻¹ g_x`.
pub fn gauged_u(phi: C64, phi_x: C64, pi: C64, lambda: C64) -> Mat2 {
    let d = I * (phi_x - pi);
    Mat2::new(
        d,
        -2.0 * (-lambda).exp(),
        2.0 * (lambda - 2.0 * I * phi).exp() - 2.0 * (-lambda).exp(),
        -d,
    ) * c64(0.5, 0.0)
}

/// Both sides of the linear algebra with the `δ` stripped and the bracket
/// `{φ, π} = 1`: `(∂_φU_a ⊗ ∂_πU_b − ∂_πU_a ⊗ ∂_φU_b, [r_ab, U_a + U_b])`.
pub fn linear_algebra_sides(phi: C64, pi: C64, lambda: C64, mu: C64) -> Result<(Matrix4<C64>, Matrix4<C64>)> {
    let r = r_matrix(lambda - mu)?;
    let lhs = kron(&lax_u_dphi(phi, lambda), &lax_u_dpi()) - kron(&lax_u_dpi(), &lax_u_dphi(phi, mu));
    let id = Mat2::identity();
    let sum = kron(&lax_u(phi, pi, lambda), &id) + kron(&id, &lax_u(phi, pi, mu));
    Ok((lhs, commutator4(&r, &sum)))
}

/// Max entrywise residual of the linear algebra with
/// [`LINEAR_ALGEBRA_BRACKET_SCALE`] applied to the left side.
pub fn check_linear_algebra(phi: C64, pi: C64, lambda: C64, mu: C64) -> Result<f64> {
    let (lhs, rhs) = linear_algebra_sides(phi, pi, lambda, mu)?;
    Ok(max_abs(&(lhs * c64(LINEAR_ALGEBRA_BRACKET_SCALE, 0.0) - rhs)))
}

/// Fields `(φ, π)` on the periodic grid `x_k = −L + k h`, `h = 2L/n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldConfig {
    pub half_length: f64,
    pub phi: Vec<C64>,
    pub pi: Vec<C64>,
}

/// Charges of one field slice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuumCharges {
    pub i1: C64,
    pub i1_sym: C64,
    pub momentum: C64,
    pub hamiltonian: C64,
}

impl FieldConfig {
    pub fn new(half_length: f64, phi: Vec<C64>, pi: Vec<C64>) -> Result<Self> {
        if phi.len() != pi.len() {
            return Err(Error::LengthMismatch);
        }
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half-length must be positive, got {half_length}"
            )));
        }
        if phi.len() < 4 {
            return Err(Error::InvalidGrid(format!("need at least 4 points, got {}", phi.len())));
        }
        if phi.iter().chain(&pi).any(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument("non-finite field".into()));
        }
        Ok(Self { half_length, phi, pi })
    }

    pub fn zero(half_length: f64, n: usize) -> Result<Self> {
        Self::new(half_length, vec![zero(); n], vec![zero(); n])
    }

    /// Samples `f(x) = (φ, π)` on the grid.
    pub fn from_fn<F: Fn(f64) -> (C64, C64)>(half_length: f64, n: usize, f: F) -> Result<Self> {
        let h = 2.0 * half_length / n as f64;
        let (phi, pi) = (0..n).map(|k| f(-half_length + k as f64 * h)).unzip();
        Self::new(half_length, phi, pi)
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_length / self.len() as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        -self.half_length + k as f64 * self.h()
    }

    fn at(v: &[C64], k: isize) -> C64 {
        v[k.rem_euclid(v.len() as isize) as usize]
    }

    /// Central periodic first derivative of `φ`.
    pub fn phi_x(&self) -> Vec<C64> {
        let h = self.h();
        (0..self.len() as isize)
            .map(|k| (Self::at(&self.phi, k + 1) - Self::at(&self.phi, k - 1)) / (2.0 * h))
            .collect()
    }

    /// Central periodic second derivative of `φ`.
    pub fn phi_xx(&self) -> Vec<C64> {
        let h = self.h();
        (0..self.len() as isize)
            .map(|k| (Self::at(&self.phi, k + 1) - 2.0 * self.phi[k as usize] + Self::at(&self.phi, k - 1)) / (h * h))
            .collect()
    }

    /// Periodic trapezoid rule (`h Σ f_k`).
    pub fn integrate(&self, f: &[C64]) -> C64 {
        f.iter().sum::<C64>() * self.h()
    }

    pub fn charges(&self) -> ContinuumCharges {
        let px = self.phi_x();
        let pot: Vec<C64> = self.phi.iter().map(|p| (-2.0 * I * p).exp()).collect();
        let i1_density = |s: f64| -> Vec<C64> {
            (0..self.len())
                .map(|k| {
                    let (a, b) = (px[k], self.pi[k]);
                    -0.5 * (0.25 * (a * a + b * b + 2.0 * s * a * b) + pot[k])
                })
                .collect()
        };
        let p: Vec<C64> = px.iter().zip(&self.pi).map(|(a, b)| a * b).collect();
        let h: Vec<C64> = (0..self.len())
            .map(|k| 0.5 * (px[k] * px[k] + self.pi[k] * self.pi[k]) + 2.0 * pot[k])
            .collect();
        ContinuumCharges {
            i1: self.integrate(&i1_density(-1.0)),
            i1_sym: self.integrate(&i1_density(1.0)),
            momentum: self.integrate(&p),
            hamiltonian: self.integrate(&h),
        }
    }

    /// Time-like picture: `(P⁽ᵗ⁾, H⁽ᵗ⁾)`, the latter with `−2e^{−2iφ}`.
    pub fn dual_charges(&self) -> (C64, C64) {
        let px = self.phi_x();
        let p: Vec<C64> = px.iter().zip(&self.pi).map(|(a, b)| a * b).collect();
        let h: Vec<C64> = (0..self.len())
            .map(|k| 0.5 * (px[k] * px[k] + self.pi[k] * self.pi[k]) - 2.0 * (-2.0 * I * self.phi[k]).exp())
            .collect();
        (self.integrate(&p), self.integrate(&h))
    }

    /// Hamiltonian of the semi-discrete system (forward-difference gradient
    /// energy); exactly conserved by [`liouville_rhs`].
    pub fn semi_discrete_hamiltonian(&self) -> C64 {
        let h = self.h();
        let n = self.len() as isize;
        (0..n)
            .map(|k| {
                let d = (Self::at(&self.phi, k + 1) - self.phi[k as usize]) / h;
                let p = self.pi[k as usize];
                0.5 * (d * d + p * p) + 2.0 * (-2.0 * I * self.phi[k as usize]).exp()
            })
            .sum::<C64>()
            * h
    }

    /// `Ũ` at every grid point.
    pub fn gauge_transform(&self, lambda: C64) -> Vec<Mat2> {
        let px = self.phi_x();
        (0..self.len())
            .map(|k| gauged_u(self.phi[k], px[k], self.pi[k], lambda))
            .collect()
    }
}

/// `(φ̇, π̇) = (π, φ_xx + 4i e^{−2iφ})` with central differences.
pub fn liouville_rhs(c: &FieldConfig) -> (Vec<C64>, Vec<C64>) {
    let pxx = c.phi_xx();
    let pi_dot = pxx
        .iter()
        .zip(&c.phi)
        .map(|(d, p)| d + 4.0 * I * (-2.0 * I * p).exp())
        .collect();
    (c.pi.clone(), pi_dot)
}

/// `T̃(L, −L)` as `e^{log_scale} · matrix`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monodromy {
    pub matrix: Mat2,
    pub log_scale: f64,
}

impl Monodromy {
    pub fn ln_trace(&self) -> C64 {
        self.matrix.trace().ln() + self.log_scale
    }

    pub fn ln_det(&self) -> C64 {
        self.matrix.determinant().ln() + 2.0 * self.log_scale
    }
}

/// Integrates `T_x = Ũ T` over one period with RK4 steps of `2h` (the
/// midpoints fall on grid points), renormalising by the largest entry
/// after every step. Needs an even number of grid points.
pub fn monodromy_ode(c: &FieldConfig, lambda: C64) -> Result<Monodromy> {
    let n = c.len();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidGrid("monodromy needs an even number of points".into()));
    }
    let us = c.gauge_transform(lambda);
    let step = 2.0 * c.h();
    let mut t = Mat2::identity();
    let mut log_scale = 0.0;
    for k in (0..n).step_by(2) {
        let (u0, u1, u2) = (us[k], us[k + 1], us[(k + 2) % n]);
        let k1 = u0 * t;
        let k2 = u1 * (t + k1 * c64(step / 2.0, 0.0));
        let k3 = u1 * (t + k2 * c64(step / 2.0, 0.0));
        let k4 = u2 * (t + k3 * c64(step, 0.0));
        t += (k1 + (k2 + k3) * c64(2.0, 0.0) + k4) * c64(step / 6.0, 0.0);
        let m = max_abs(&t);
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::MonodromyOverflow { x: c.x(k) });
        }
        t /= c64(m, 0.0);
        log_scale += m.ln();
    }
    Ok(Monodromy { matrix: t, log_scale })
}

/// Least-squares fit `ln tr T̃(u) ≈ Σ_{p=−1}^{max_power} c_p u^p` over real `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyFit {
    /// `c_{−1}, c_0, c_1, …`.
    pub coefficients: Vec<C64>,
}

impl MonodromyFit {
    pub fn coeff(&self, power: i32) -> C64 {
        usize::try_from(power + 1)
            .ok()
            .and_then(|k| self.coefficients.get(k).copied())
            .unwrap_or_else(zero)
    }

    pub fn c_minus1(&self) -> C64 {
        self.coeff(-1)
    }

    pub fn c0(&self) -> C64 {
        self.coeff(0)
    }

    pub fn c1(&self) -> C64 {
        self.coeff(1)
    }
}

/// Samples `ln tr T̃` at `points` equispaced `u` in `window`, unwrapping the
/// imaginary part, and fits powers `u^{−1} … u^{max_power}`.
pub fn monodromy_fit(c: &FieldConfig, window: (f64, f64), points: usize, max_power: i32) -> Result<MonodromyFit> {
    let terms = (max_power + 2).max(0) as usize;
    if max_power < 1 || points < terms || !(window.0 > 0.0 && window.1 > window.0) {
        return Err(Error::InvalidArgument(format!(
            "fit of powers -1..={max_power} needs enough points in a positive window"
        )));
    }
    let us: Vec<f64> = (0..points)
        .map(|k| window.0 + (window.1 - window.0) * k as f64 / (points - 1) as f64)
        .collect();
    let mut ys = Vec::with_capacity(points);
    let mut prev: Option<f64> = None;
    for &u in &us {
        let mut y = monodromy_ode(c, c64(u.ln(), 0.0))?.ln_trace();
        if let Some(p) = prev {
            let tau = std::f64::consts::TAU;
            y.im -= tau * ((y.im - p) / tau).round();
        }
        prev = Some(y.im);
        ys.push(y);
    }
    let a = DMatrix::from_fn(points, terms, |r, k| us[r].powi(k as i32 - 1));
    let svd = a.svd(true, true);
    let solve = |part: fn(&C64) -> f64| {
        svd.solve(&DVector::from_iterator(points, ys.iter().map(part)), 1e-14)
            .map_err(|e| Error::InvalidArgument(format!("fit failed: {e}")))
    };
    let re = solve(|z| z.re)?;
    let im = solve(|z| z.im)?;
    Ok(MonodromyFit {
        coefficients: re.iter().zip(im.iter()).map(|(&r, &i)| c64(r, i)).collect(),
    })
}

/// Samples of a field on a uniform space-time grid; `values[j][i]` is the
/// value at `(x0 + i h, t0 + j dt)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeGrid {
    pub x0: f64,
    pub h: f64,
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<Vec<C64>>,
}

impl SpaceTimeGrid {
    pub fn nx(&self) -> usize {
        self.values.first().map_or(0, |r| r.len())
    }

    pub fn nt(&self) -> usize {
        self.values.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    fn check(&self) -> Result<()> {
        if self.nt() < 3 || self.nx() < 3 || self.values.iter().any(|r| r.len() != self.nx()) {
            return Err(Error::InvalidGrid(
                "space-time grid needs at least 3x3 rectangular samples".into(),
            ));
        }
        Ok(())
    }

    /// Max over interior points of `|φ_tt − φ_xx − 4i e^{−2iφ}|` with
    /// central differences.
    pub fn liouville_residual(&self) -> Result<f64> {
        self.check()?;
        let p = &self.values;
        let mut worst: f64 = 0.0;
        for j in 1..self.nt() - 1 {
            for i in 1..self.nx() - 1 {
                let tt = (p[j + 1][i] - 2.0 * p[j][i] + p[j - 1][i]) / (self.dt * self.dt);
                let xx = (p[j][i + 1] - 2.0 * p[j][i] + p[j][i - 1]) / (self.h * self.h);
                worst = worst.max((tt - xx - 4.0 * I * (-2.0 * I * p[j][i]).exp()).norm());
            }
        }
        Ok(worst)
    }

    /// Max over interior points of `|U_t − V_x + [U, V]|` at `λ`, with all
    /// derivatives by central differences.
    pub fn zero_curvature_residual(&self, lambda: C64) -> Result<f64> {
        self.check()?;
        let p = &self.values;
        let (nx, nt) = (self.nx(), self.nt());
        let phi_t = |j: usize, i: usize| (p[j + 1][i] - p[j - 1][i]) / (2.0 * self.dt);
        let phi_x = |j: usize, i: usize| (p[j][i + 1] - p[j][i - 1]) / (2.0 * self.h);
        let mut worst: f64 = 0.0;
        for j in 2..nt - 2 {
            for i in 2..nx - 2 {
                let u = |jj: usize| lax_u(p[jj][i], phi_t(jj, i), lambda);
                let v = |ii: usize| lax_v(p[j][ii], phi_x(j, ii), lambda);
                let ut = (u(j + 1) - u(j - 1)) / c64(2.0 * self.dt, 0.0);
                let vx = (v(i + 1) - v(i - 1)) / c64(2.0 * self.h, 0.0);
                let r = ut - vx + commutator2(&u(j), &v(i));
                worst = worst.max(max_abs(&r));
            }
        }
        Ok(worst)
    }
}

/// `φ` and its first derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldPoint {
    pub phi: C64,
    pub phi_x: C64,
    pub phi_t: C64,
}

/// An exact solution of the Liouville equation, available at any point.
pub trait LiouvilleSolution {
    fn eval(&self, x: f64, t: f64) -> FieldPoint;

    fn sample(&self, x0: f64, h: f64, nx: usize, t0: f64, dt: f64, nt: usize) -> SpaceTimeGrid {
        let values = (0..nt)
            .map(|j| {
                (0..nx)
                    .map(|i| self.eval(x0 + i as f64 * h, t0 + j as f64 * dt).phi)
                    .collect()
            })
            .collect();
        SpaceTimeGrid { x0, h, t0, dt, values }
    }
}

/// `e^{−2iφ} = k m e^ξ / (1 + e^ξ)²`, `ξ = k(x + t) + m(x − t) + δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SechSolution {
    pub k: C64,
    pub m: C64,
    pub delta: C64,
}

impl Default for SechSolution {
    fn default() -> Self {
        Self {
            k: c64(1.0, 0.0),
            m: c64(0.8, 0.0),
            delta: c64(0.3, 0.2),
        }
    }
}

impl LiouvilleSolution for SechSolution {
    fn eval(&self, x: f64, t: f64) -> FieldPoint {
        let xi = self.k * (x + t) + self.m * (x - t) + self.delta;
        let w = (self.k * self.m).ln() + xi - 2.0 * (1.0 + xi.exp()).ln();
        let th = (xi / 2.0).tanh();
        let ps = -0.5 * I * self.k * th;
        let pt = -0.5 * I * self.m * th;
        FieldPoint {
            phi: 0.5 * I * w,
            phi_x: ps + pt,
            phi_t: ps - pt,
        }
    }
}

/// Monitored quantities of a field evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub t: f64,
    pub hamiltonian: C64,
    pub momentum: C64,
    pub i1: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldReport {
    pub steps: usize,
    pub dt: f64,
    /// Drift of the semi-discrete Hamiltonian.
    pub hamiltonian_drift: f64,
    pub momentum_drift: f64,
    pub i1_drift: f64,
}

#[derive(Clone, Debug)]
pub struct FieldTrajectory {
    pub snapshots: Vec<(f64, FieldConfig)>,
    pub series: Vec<FieldSample>,
    pub report: FieldReport,
    pub abort: Option<Error>,
}

impl FieldTrajectory {
    pub fn last(&self) -> &FieldConfig {
        &self.snapshots.last().expect("trajectory has an initial state").1
    }
}

/// Method-of-lines RK4 evolution under [`liouville_rhs`]; keeps every
/// `record_every`-th state.
pub fn evolve(c: &FieldConfig, dt: f64, t_end: f64, record_every: usize) -> Result<FieldTrajectory> {
    if !(dt > 0.0) || !(t_end >= dt) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < dt <= t_end, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let n = c.len();
    let l = c.half_length;
    let (steps, h) = step_plan(dt, t_end);
    let every = record_every.max(1);
    let sample = |t: f64, f: &FieldConfig| {
        let ch = f.charges();
        FieldSample {
            t,
            hamiltonian: f.semi_discrete_hamiltonian(),
            momentum: ch.momentum,
            i1: ch.i1,
        }
    };
    let s0 = sample(0.0, c);
    let mut report = FieldReport {
        steps: 0,
        dt: h,
        hamiltonian_drift: 0.0,
        momentum_drift: 0.0,
        i1_drift: 0.0,
    };
    let mut out = FieldTrajectory {
        snapshots: vec![(0.0, c.clone())],
        series: vec![s0.clone()],
        report: report.clone(),
        abort: None,
    };
    let rhs = |_t: f64, y: &[C64]| -> Result<Vec<C64>> {
        let f = FieldConfig {
            half_length: l,
            phi: y[..n].to_vec(),
            pi: y[n..].to_vec(),
        };
        let (a, b) = liouville_rhs(&f);
        Ok([a, b].concat())
    };
    let mut y = [c.phi.as_slice(), &c.pi].concat();
    for k in 0..steps {
        let t = k as f64 * h;
        y = rk4_step(&rhs, t, &y, h)?;
        if let Some(i) = y.iter().position(|z| !z.is_finite() || z.norm() > BLOW_UP_THRESHOLD) {
            out.abort = Some(Error::BlowUp {
                s: c.x(i % n),
                t: t + h,
            });
            break;
        }
        let f = FieldConfig {
            half_length: l,
            phi: y[..n].to_vec(),
            pi: y[n..].to_vec(),
        };
        let s = sample(t + h, &f);
        report.steps = k + 1;
        report.hamiltonian_drift = report.hamiltonian_drift.max((s.hamiltonian - s0.hamiltonian).norm());
        report.momentum_drift = report.momentum_drift.max((s.momentum - s0.momentum).norm());
        report.i1_drift = report.i1_drift.max((s.i1 - s0.i1).norm());
        if (k + 1) % every == 0 || k + 1 == steps {
            out.snapshots.push((t + h, f));
            out.series.push(s);
        }
    }
    out.report = report;
    Ok(out)
}

/// Smooth periodic random field: a few low Fourier modes with complex
/// amplitudes bounded by `amp`.
pub fn smooth_random_field<R: rand::Rng + ?Sized>(
    rng: &mut R,
    half_length: f64,
    n: usize,
    modes: usize,
    amp: f64,
) -> Result<FieldConfig> {
    use crate::sampling::square;
    let mut coeffs = Vec::new();
    for m in 1..=modes {
        let scale = amp / m as f64;
        coeffs.push((
            m,
            square(rng, scale),
            square(rng, scale),
            square(rng, scale),
            square(rng, scale),
        ));
    }
    let base = square(rng, amp);
    let kx = std::f64::consts::PI / half_length;
    FieldConfig::from_fn(half_length, n, |x| {
        let mut phi = base;
        let mut pi = zero();
        for &(m, a, b, c, d) in &coeffs {
            let arg = kx * m as f64 * x;
            phi += a * arg.cos() + b * arg.sin();
            pi += c * arg.cos() + d * arg.sin();
        }
        (phi, pi)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_spectral_pair, rng_from_seed, square};

    #[test]
    fn lax_u_at_origin() {
        let u = lax_u(zero(), zero(), zero());
        assert!(max_abs(&(u - Mat2::new(zero(), c64(-1.0, 0.0), zero(), zero()))) < 1e-15);
        let mut rng = rng_from_seed(1);
        for _ in 0..10 {
            let (p, q, l) = (square(&mut rng, 1.0), square(&mut rng, 1.0), square(&mut rng, 1.0));
            assert!(lax_u(p, q, l).trace().norm() < 1e-15);
            assert!(gauged_u(p, q, l, l).trace().norm() < 1e-15);
        }
    }

    #[test]
    fn gauge_identity_pointwise() {
        let mut rng = rng_from_seed(2);
        for _ in 0..10 {
            let (p, px, q, l) = (
                square(&mut rng, 1.0),
                square(&mut rng, 1.0),
                square(&mut rng, 1.0),
                square(&mut rng, 1.0),
            );
            let g = gauge_matrix(p);
            let gi = g.try_inverse().unwrap();
            let sz = Mat2::new(c64(1.0, 0.0), zero(), zero(), c64(-1.0, 0.0));
            let gx = sz * g * (-I * px / 2.0);
            let want = gi * lax_u(p, q, l) * g - gi * gx;
            assert!(max_abs(&(want - gauged_u(p, px, q, l))) < 1e-13);
        }
        assert_eq!(gauge_matrix(zero()), Mat2::identity());
        assert!((gauged_u(zero(), zero(), zero(), c64(0.3, 0.0))[(0, 1)] + c64(-0.3f64, 0.0).exp()).norm() < 1e-15);
    }

    #[test]
    fn gauge_identity_finite_difference() {
        let mut rng = rng_from_seed(3);
        let f = smooth_random_field(&mut rng, 1.0, 64, 2, 0.3).unwrap();
        let err = |c: &FieldConfig| {
            let h = c.h();
            let lam = c64(0.2, 0.1);
            let ut = c.gauge_transform(lam);
            let n = c.len();
            let mut worst: f64 = 0.0;
            for (k, u) in ut.iter().enumerate() {
                let g = gauge_matrix(c.phi[k]);
                let gi = g.try_inverse().unwrap();
                let gx = (gauge_matrix(c.phi[(k + 1) % n]) - gauge_matrix(c.phi[(k + n - 1) % n])) / c64(2.0 * h, 0.0);
                let want = gi * lax_u(c.phi[k], c.pi[k], lam) * g - gi * gx;
                worst = worst.max(max_abs(&(want - u)));
            }
            worst
        };
        let coarse = err(&f);
        assert!(coarse < 1e-2);
    }

    #[test]
    fn zero_field_charges() {
        let l = 1.7;
        let c = FieldConfig::zero(l, 40).unwrap();
        let ch = c.charges();
        assert!((ch.i1 - c64(-l, 0.0)).norm() <= 1e-13 * l);
        assert!((ch.hamiltonian - c64(4.0 * l, 0.0)).norm() <= 1e-13 * l);
        assert_eq!(ch.momentum, zero());
        let (pt, ht) = c.dual_charges();
        assert_eq!(pt, zero());
        assert!((ht - c64(-4.0 * l, 0.0)).norm() <= 1e-13 * l);
    }

    #[test]
    fn charge_identities() {
        let mut rng = rng_from_seed(4);
        let f = smooth_random_field(&mut rng, 2.0, 50, 3, 0.4).unwrap();
        let ch = f.charges();
        assert!((ch.momentum - MOMENTUM_RATIO * (ch.i1_sym - ch.i1)).norm() < 1e-12);
        assert!((ch.hamiltonian - HAMILTONIAN_RATIO * (ch.i1_sym + ch.i1)).norm() < 1e-12);
        let flipped = FieldConfig::new(f.half_length, f.phi.clone(), f.pi.iter().map(|p| -p).collect()).unwrap();
        assert!((flipped.charges().i1 - ch.i1_sym).norm() < 1e-13);
        let (pt, ht) = f.dual_charges();
        assert_eq!(pt, ch.momentum);
        let px = f.phi_x();
        let kin: Vec<C64> = (0..f.len()).map(|k| px[k] * px[k] + f.pi[k] * f.pi[k]).collect();
        assert!((ch.hamiltonian + ht - f.integrate(&kin)).norm() < 1e-12);
    }

    #[test]
    fn constant_field_rhs() {
        let p0 = c64(0.3, -0.1);
        let f = FieldConfig::new(1.0, vec![p0; 10], vec![zero(); 10]).unwrap();
        let (_, pd) = liouville_rhs(&f);
        for v in pd {
            assert!((v - 4.0 * I * (-2.0 * I * p0).exp()).norm() < 1e-14);
        }
    }

    #[test]
    fn linear_algebra() {
        let mut rng = rng_from_seed(5);
        for _ in 0..50 {
            let (p, q) = (square(&mut rng, 1.0), square(&mut rng, 1.0));
            let (l, m) = random_spectral_pair(&mut rng);
            assert!(check_linear_algebra(p, q, l, m).unwrap() <= 1e-10);
            let (lhs, rhs) = linear_algebra_sides(p, q, l, m).unwrap();
            assert!(max_abs(&(lhs * c64(2.0, 0.0) - rhs)) <= 1e-10);
            let (lhs2, _) = linear_algebra_sides(p, q, m, l).unwrap();
            // swapping (a, λ) ↔ (b, μ): P lhs(μ,λ) P = −lhs(λ,μ)
            let perm = crate::rmatrix::kron(&Mat2::identity(), &Mat2::identity());
            let swap = Matrix4::from_fn(|r, c| {
                let (i, k) = (r / 2, r % 2);
                let (j, l) = (c / 2, c % 2);
                if i == l && k == j {
                    c64(1.0, 0.0)
                } else {
                    zero()
                }
            });
            let _ = perm;
            assert!(max_abs(&(swap * lhs2 * swap + lhs)) < 1e-13);
        }
        assert!(check_linear_algebra(zero(), zero(), c64(0.4, 0.0), c64(0.4, 0.0)).is_err());
    }

    #[test]
    fn zero_field_monodromy_matches_exponential() {
        let c = FieldConfig::zero(1.0, 64).unwrap();
        let lam = c64(0.3, 0.2);
        let m = monodromy_ode(&c, lam).unwrap();
        // Ũ = [[0, −e^{−λ}], [e^{λ} − e^{−λ}, 0]] ; exp(2L Ũ) = cosh(2Lκ) I + sinh(2Lκ)/κ Ũ
        let u = gauged_u(zero(), zero(), zero(), lam);
        let kappa = (u[(0, 1)] * u[(1, 0)]).sqrt();
        let want = Mat2::identity() * (2.0 * kappa).cosh() + u * ((2.0 * kappa).sinh() / kappa);
        let got = m.matrix * c64(m.log_scale.exp(), 0.0);
        assert!(max_abs(&(got - want)) < 1e-7);
        assert!(m.ln_det().norm() < 1e-7);
        assert!(monodromy_ode(&FieldConfig::zero(1.0, 63).unwrap(), lam).is_err());
    }

    #[test]
    fn determinant_is_one() {
        let mut rng = rng_from_seed(6);
        let f = smooth_random_field(&mut rng, 1.0, 128, 2, 0.3).unwrap();
        let m = monodromy_ode(&f, c64(0.1, 0.2)).unwrap();
        assert!(m.ln_det().norm() < 1e-6);
    }

    #[test]
    fn fit_recovers_first_charge() {
        let mut rng = rng_from_seed(7);
        let l = std::f64::consts::PI;
        let f = smooth_random_field(&mut rng, l, 4096, 2, 0.3).unwrap();
        let fit = monodromy_fit(&f, FIT_WINDOW, FIT_POINTS, FIT_MAX_POWER).unwrap();
        let i1 = f.charges().i1;
        assert!((fit.c1() - i1).norm() <= 0.01 * i1.norm(), "{} vs {}", fit.c1(), i1);
        assert!((fit.c_minus1() - c64(2.0 * l, 0.0)).norm() < 1e-3);
        assert!(monodromy_fit(&f, FIT_WINDOW, 3, FIT_MAX_POWER).is_err());
    }

    #[test]
    fn exact_solution_satisfies_pde() {
        let s = SechSolution::default();
        let res = |n: usize| {
            let h = 1.0 / n as f64;
            s.sample(-0.5, h, n + 1, 0.0, h, n + 1).liouville_residual().unwrap()
        };
        let (a, b) = (res(20), res(40));
        assert!(b < 1e-2);
        assert!(a / b > 3.5, "{}", a / b);
        let zc = |n: usize| {
            let h = 1.0 / n as f64;
            s.sample(-0.5, h, n + 1, 0.0, h, n + 1)
                .zero_curvature_residual(c64(0.2, 0.1))
                .unwrap()
        };
        assert!(zc(20) / zc(40) > 3.5);
    }

    #[test]
    fn exact_solution_derivatives() {
        let s = SechSolution::default();
        let e = 1e-5;
        let p = s.eval(0.2, 0.3);
        let dx = (s.eval(0.2 + e, 0.3).phi - s.eval(0.2 - e, 0.3).phi) / (2.0 * e);
        let dt = (s.eval(0.2, 0.3 + e).phi - s.eval(0.2, 0.3 - e).phi) / (2.0 * e);
        assert!((dx - p.phi_x).norm() < 1e-8);
        assert!((dt - p.phi_t).norm() < 1e-8);
    }

    #[test]
    fn evolution_conserves_semi_discrete_hamiltonian() {
        let mut rng = rng_from_seed(8);
        let base = smooth_random_field(&mut rng, 1.0, 16, 2, 0.1).unwrap();
        let f = FieldConfig::new(
            1.0,
            base.phi.iter().map(|p| p + std::f64::consts::FRAC_PI_2).collect(),
            base.pi.clone(),
        )
        .unwrap();
        let d1 = evolve(&f, 0.01, 0.5, 1).unwrap().report;
        let d2 = evolve(&f, 0.005, 0.5, 1).unwrap().report;
        let r = d1.hamiltonian_drift / d2.hamiltonian_drift;
        assert!((12.0..=20.0).contains(&r), "{r}");
    }

    #[test]
    fn evolution_tracks_uniform_exact_solution() {
        // x-independent member of the exact family: m = −k.
        let s = SechSolution {
            k: c64(0.7, 0.0),
            m: c64(-0.7, 0.0),
            delta: c64(0.1, 0.5),
        };
        let n = 8;
        let f = FieldConfig::from_fn(1.0, n, |_| {
            let p = s.eval(0.0, 0.0);
            (p.phi, p.phi_t)
        })
        .unwrap();
        let err = |dt: f64| {
            let tr = evolve(&f, dt, 1.0, 1000).unwrap();
            (tr.last().phi[0] - s.eval(0.0, 1.0).phi).norm()
        };
        let (a, b) = (err(0.02), err(0.01));
        assert!(a < 1e-6);
        assert!((12.0..=20.0).contains(&(a / b)), "{}", a / b);
    }
}
