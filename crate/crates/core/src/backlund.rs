//! Type-II Darboux matrices and Bäcklund transformations.
//!
//! Two constructions live here:
//!
//! * the auto-BT mapping a Liouville solution `φ` to a second solution `φ̃`,
//!   driven by the defect entries `(X, Y, Z)` of a type-II Darboux matrix;
//! * the hetero-BT relating a free massless field `φ` to a solution `φ̃` of
//!   the modified Liouville equation `φ̃_xx − φ̃_tt + 4ic² e^{2iφ̃} = 0`.
//!
//! Light-cone coordinates are `σ = x + t`, `τ = x − t`.

use crate::continuum::{LiouvilleSolution, SpaceTimeGrid};
use crate::error::{Error, Result};
use crate::ode::rk4_step;
use crate::{c64, max_abs, Mat2, C64, I};

/// `|e^{iφ̃}|` beyond this counts as the Liouville pole.
pub const POLE_THRESHOLD: f64 = 1e8;

/// Type-II Darboux entries with parameter `θ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DarbouxState {
    pub x: C64,
    pub y: C64,
    pub z: C64,
    pub theta: C64,
}

impl DarbouxState {
    /// `[[u e^{−θ}X − u⁻¹e^{θ}X⁻¹, Y], [Z, u e^{−θ}X⁻¹ − u⁻¹e^{θ}X]]`.
    pub fn matrix(&self, u: C64) -> Result<Mat2> {
        if self.x == c64(0.0, 0.0) {
            return Err(Error::SingularDefect);
        }
        let (e, xi) = (self.theta.exp(), self.x.inv());
        Ok(Mat2::new(
            u / e * self.x - e / u * xi,
            self.y,
            self.z,
            u / e * xi - e / u * self.x,
        ))
    }
}

/// `φ`, `φ̃` and their first derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BtFields {
    pub phi: C64,
    pub phi_t: C64,
    pub phi_x: C64,
    pub phi_tilde: C64,
    pub phi_tilde_t: C64,
    pub phi_tilde_x: C64,
}

struct Shorthand {
    e: C64,
    em: C64,
    ep: C64,
    sh: C64,
}

fn shorthand(phi: C64, phi_tilde: C64, theta: C64) -> Shorthand {
    let s = 0.5 * (phi + phi_tilde);
    Shorthand {
        e: theta.exp(),
        em: (-I * s).exp(),
        ep: (I * s).exp(),
        sh: (I * (phi_tilde - phi)).sinh(),
    }
}

/// `(Δ_t, Δ_x)` for `Δ = φ̃ − φ` from the diagonal relations:
///
/// ```text
/// iΔ_t = −2Y(e^θ e^{−iS} + e^{−θ} e^{iS}) + 2Z e^{−θ} e^{−iS}
/// iΔ_x = −2Y(e^θ e^{−iS} − e^{−θ} e^{iS}) − 2Z e^{−θ} e^{−iS}
/// ```
///
/// with `S = (φ + φ̃)/2`.
pub fn diagonal_rates(phi: C64, phi_tilde: C64, y: C64, z: C64, theta: C64) -> (C64, C64) {
    let s = shorthand(phi, phi_tilde, theta);
    let dt = (-2.0 * y * (s.e * s.em + s.ep / s.e) + 2.0 * z * s.em / s.e) / I;
    let dx = (-2.0 * y * (s.e * s.em - s.ep / s.e) - 2.0 * z * s.em / s.e) / I;
    (dt, dx)
}

/// Solves the diagonal relations for `(Y, Z)`.
pub fn bt_solve_yz(f: &BtFields, theta: C64) -> Result<(C64, C64)> {
    let s = shorthand(f.phi, f.phi_tilde, theta);
    let a11 = -2.0 * (s.e * s.em + s.ep / s.e);
    let a12 = 2.0 * s.em / s.e;
    let a21 = -2.0 * (s.e * s.em - s.ep / s.e);
    let a22 = -2.0 * s.em / s.e;
    let det = a11 * a22 - a12 * a21;
    if !(det.norm() > 1e-300) || !det.is_finite() {
        return Err(Error::DegenerateConfiguration);
    }
    let b1 = I * (f.phi_tilde_t - f.phi_t);
    let b2 = I * (f.phi_tilde_x - f.phi_x);
    Ok(((b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det))
}

/// `(Y_t, Z_t)`:
///
/// ```text
/// Y_t = −(i/2)(φ_x + φ̃_x) Y − e^{−θ} e^{−iS} sinh iΔ
/// Z_t =  (i/2)(φ_x + φ̃_x) Z + (e^θ e^{−iS} + e^{−θ} e^{iS}) sinh iΔ
/// ```
pub fn yz_t_rates(phi: C64, phi_tilde: C64, phi_x_sum: C64, y: C64, z: C64, theta: C64) -> (C64, C64) {
    let s = shorthand(phi, phi_tilde, theta);
    let g = 0.5 * I * phi_x_sum;
    (-g * y - s.em / s.e * s.sh, g * z + (s.e * s.em + s.ep / s.e) * s.sh)
}

/// `(Y_x, Z_x)`: the time-like counterpart, with `φ_t + φ̃_t` and the sign
/// of the `e^{−θ}` sources flipped.
pub fn yz_x_rates(phi: C64, phi_tilde: C64, phi_t_sum: C64, y: C64, z: C64, theta: C64) -> (C64, C64) {
    let s = shorthand(phi, phi_tilde, theta);
    let g = 0.5 * I * phi_t_sum;
    (-g * y + s.em / s.e * s.sh, g * z + (s.e * s.em - s.ep / s.e) * s.sh)
}

/// Residuals of the `t`-relations for supplied `Y_t`, `Z_t`.
pub fn bt_residual_t(f: &BtFields, y: C64, z: C64, y_t: C64, z_t: C64, theta: C64) -> (C64, C64) {
    let (ry, rz) = yz_t_rates(f.phi, f.phi_tilde, f.phi_x + f.phi_tilde_x, y, z, theta);
    (y_t - ry, z_t - rz)
}

/// Residuals of the `x`-relations for supplied `Y_x`, `Z_x`.
pub fn bt_residual_x(f: &BtFields, y: C64, z: C64, y_x: C64, z_x: C64, theta: C64) -> (C64, C64) {
    let (ry, rz) = yz_x_rates(f.phi, f.phi_tilde, f.phi_t + f.phi_tilde_t, y, z, theta);
    (y_x - ry, z_x - rz)
}

/// Corner data `(φ̃, Y, Z)` at `(x_min, 0)`; `X` starts at `e^{i(φ̃−φ)/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BtInitial {
    pub phi_tilde: C64,
    pub y: C64,
    pub z: C64,
}

/// Uniform grid `[x_min, x_max] × [0, t_end]` with `nx × nt` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BtGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub t_end: f64,
    pub nt: usize,
}

impl BtGrid {
    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_end / (self.nt - 1) as f64
    }

    fn empty(&self) -> SpaceTimeGrid {
        SpaceTimeGrid {
            x0: self.x_min,
            h: self.h(),
            t0: 0.0,
            dt: self.dt(),
            values: vec![vec![c64(0.0, 0.0); self.nx]; self.nt],
        }
    }
}

/// Output of [`bt_evolve`]: `φ̃` and the Darboux entries on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BtSolution {
    pub theta: C64,
    pub phi_tilde: SpaceTimeGrid,
    pub x: SpaceTimeGrid,
    pub y: SpaceTimeGrid,
    pub z: SpaceTimeGrid,
}

// State layout: [φ̃, Y, Z, X].
fn t_rhs(seed: &dyn LiouvilleSolution, theta: C64, x: f64, t: f64, st: &[C64]) -> Vec<C64> {
    let p = seed.eval(x, t);
    let (pt, y, z, xx) = (st[0], st[1], st[2], st[3]);
    let (dt, dx) = diagonal_rates(p.phi, pt, y, z, theta);
    let (yt, zt) = yz_t_rates(p.phi, pt, 2.0 * p.phi_x + dx, y, z, theta);
    let xt = -0.5 * I * xx * dx - 2.0 * theta.exp() * y * (-I * p.phi).exp();
    vec![p.phi_t + dt, yt, zt, xt]
}

fn x_rhs(seed: &dyn LiouvilleSolution, theta: C64, x: f64, t: f64, st: &[C64]) -> Vec<C64> {
    let p = seed.eval(x, t);
    let (pt, y, z, xx) = (st[0], st[1], st[2], st[3]);
    let (dt, dx) = diagonal_rates(p.phi, pt, y, z, theta);
    let (yx, zx) = yz_x_rates(p.phi, pt, 2.0 * p.phi_t + dt, y, z, theta);
    let xd = -0.5 * I * xx * dt - 2.0 * theta.exp() * y * (-I * p.phi).exp();
    vec![p.phi_x + dx, yx, zx, xd]
}

/// Generates `φ̃` from the seed solution `φ`: RK4 along `t` on the left
/// edge, then RK4 sweeps along `x` on every time slice.
pub fn bt_evolve(seed: &dyn LiouvilleSolution, init: BtInitial, theta: C64, grid: BtGrid) -> Result<BtSolution> {
    if grid.nx < 3 || grid.nt < 3 || !(grid.x_max > grid.x_min) || !(grid.t_end > 0.0) {
        return Err(Error::InvalidGrid(format!("{grid:?}")));
    }
    let (h, dt) = (grid.h(), grid.dt());
    let phi0 = seed.eval(grid.x_min, 0.0).phi;
    let mut edge = vec![
        init.phi_tilde,
        init.y,
        init.z,
        (0.5 * I * (init.phi_tilde - phi0)).exp(),
    ];
    let mut out = [grid.empty(), grid.empty(), grid.empty(), grid.empty()];
    for j in 0..grid.nt {
        let t = j as f64 * dt;
        if j > 0 {
            let f = |s: f64, y: &[C64]| Ok(t_rhs(seed, theta, grid.x_min, s, y));
            edge = rk4_step(&f, t - dt, &edge, dt)?;
        }
        let mut st = edge.clone();
        for i in 0..grid.nx {
            let x = grid.x_min + i as f64 * h;
            if i > 0 {
                let f = |s: f64, y: &[C64]| Ok(x_rhs(seed, theta, s, t, y));
                st = rk4_step(&f, x - h, &st, h)?;
            }
            if st.iter().any(|v| !v.is_finite()) || (I * st[0]).exp().norm() > POLE_THRESHOLD {
                return Err(Error::BlowUp { s: x, t });
            }
            for (k, g) in out.iter_mut().enumerate() {
                g.values[j][i] = st[k];
            }
        }
    }
    let [phi_tilde, y, z, x] = out;
    Ok(BtSolution {
        theta,
        phi_tilde,
        x,
        y,
        z,
    })
}

impl BtSolution {
    /// `max |X − e^{i(φ̃−φ)/2}|`.
    pub fn x_relation_error(&self, seed: &dyn LiouvilleSolution) -> f64 {
        let g = &self.phi_tilde;
        let mut worst: f64 = 0.0;
        for j in 0..g.nt() {
            for i in 0..g.nx() {
                let phi = seed.eval(g.x(i), g.t(j)).phi;
                let want = (0.5 * I * (g.values[j][i] - phi)).exp();
                worst = worst.max((self.x.values[j][i] - want).norm());
            }
        }
        worst
    }

    /// Max residual of the `t`- and `x`-relations for `(Y, Z)`, with all
    /// derivatives of `φ̃, Y, Z` by central differences.
    pub fn relation_residuals(&self, seed: &dyn LiouvilleSolution) -> (f64, f64) {
        let g = &self.phi_tilde;
        let (h, dt) = (g.h, g.dt);
        let ct = |s: &SpaceTimeGrid, j: usize, i: usize| (s.values[j + 1][i] - s.values[j - 1][i]) / (2.0 * dt);
        let cx = |s: &SpaceTimeGrid, j: usize, i: usize| (s.values[j][i + 1] - s.values[j][i - 1]) / (2.0 * h);
        let (mut rt, mut rx): (f64, f64) = (0.0, 0.0);
        for j in 1..g.nt() - 1 {
            for i in 1..g.nx() - 1 {
                let p = seed.eval(g.x(i), g.t(j));
                let f = BtFields {
                    phi: p.phi,
                    phi_t: p.phi_t,
                    phi_x: p.phi_x,
                    phi_tilde: g.values[j][i],
                    phi_tilde_t: ct(g, j, i),
                    phi_tilde_x: cx(g, j, i),
                };
                let (y, z) = (self.y.values[j][i], self.z.values[j][i]);
                let (a, b) = bt_residual_t(&f, y, z, ct(&self.y, j, i), ct(&self.z, j, i), self.theta);
                let (c, d) = bt_residual_x(&f, y, z, cx(&self.y, j, i), cx(&self.z, j, i), self.theta);
                rt = rt.max(a.norm()).max(b.norm());
                rx = rx.max(c.norm()).max(d.norm());
            }
        }
        (rt, rx)
    }
}

/// Coupling `c` and parameter `Θ` of the hetero-BT.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeteroParams {
    pub c: C64,
    pub theta: C64,
}

impl HeteroParams {
    pub fn new(c: C64, theta: C64) -> Result<Self> {
        if c == c64(0.0, 0.0) {
            return Err(Error::InvalidArgument("hetero coupling c must be nonzero".into()));
        }
        Ok(Self { c, theta })
    }
}

/// A free massless field `φ = f(σ) + g(τ)`.
pub trait FreeField {
    /// `(φ, φ_σ, φ_τ)`.
    fn eval(&self, sigma: f64, tau: f64) -> (C64, C64, C64);
}

/// `φ = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ZeroField;

impl FreeField for ZeroField {
    fn eval(&self, _: f64, _: f64) -> (C64, C64, C64) {
        let z = c64(0.0, 0.0);
        (z, z, z)
    }
}

/// `φ = a₁ sin(k₁σ + shift) + a₂ cos(k₂τ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Harmonic {
    pub a1: f64,
    pub k1: f64,
    pub a2: f64,
    pub k2: f64,
    pub shift: f64,
}

impl Default for Harmonic {
    fn default() -> Self {
        Self {
            a1: 0.3,
            k1: 1.1,
            a2: 0.25,
            k2: 0.7,
            shift: 0.0,
        }
    }
}

impl FreeField for Harmonic {
    fn eval(&self, sigma: f64, tau: f64) -> (C64, C64, C64) {
        let arg = self.k1 * sigma + self.shift;
        (
            c64(self.a1 * arg.sin() + self.a2 * (self.k2 * tau).cos(), 0.0),
            c64(self.a1 * self.k1 * arg.cos(), 0.0),
            c64(-self.a2 * self.k2 * (self.k2 * tau).sin(), 0.0),
        )
    }
}

/// `φ̃` on the light-cone square `[0, ℓ]²`; `values[i][j]` sits at
/// `(σ_i, τ_j) = (i h, j h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeteroSolution {
    pub h: f64,
    pub values: Vec<Vec<C64>>,
}

/// Integrates
///
/// ```text
/// ∂_σ(φ̃ − φ) = ic e^{Θ} e^{i(φ̃ + φ)}
/// ∂_τ(φ̃ + φ) = ic e^{−Θ} e^{i(φ̃ − φ)}
/// ```
///
/// along `σ` on the line `τ = 0` from `φ̃(0, 0) = phi_tilde0`, then along
/// `τ` from every point of that line. RK4 in both directions.
pub fn hetero_bt_generate(
    free: &dyn FreeField,
    params: HeteroParams,
    phi_tilde0: C64,
    n: usize,
    length: f64,
) -> Result<HeteroSolution> {
    if n < 3 || !(length > 0.0) {
        return Err(Error::InvalidGrid(format!("{n} points on [0, {length}]")));
    }
    let h = length / (n - 1) as f64;
    let (ep, em) = (params.c * params.theta.exp(), params.c * (-params.theta).exp());
    let mut values = vec![vec![c64(0.0, 0.0); n]; n];
    let check = |v: C64, s: f64, t: f64| -> Result<C64> {
        if !v.is_finite() || (I * v).exp().norm() > POLE_THRESHOLD {
            Err(Error::BlowUp { s, t })
        } else {
            Ok(v)
        }
    };
    // a = φ̃ − φ along τ = 0
    let fa = |s: f64, a: &[C64]| {
        let phi = free.eval(s, 0.0).0;
        Ok(vec![I * ep * (I * (a[0] + 2.0 * phi)).exp()])
    };
    let mut a = vec![phi_tilde0 - free.eval(0.0, 0.0).0];
    values[0][0] = phi_tilde0;
    for (i, row) in values.iter_mut().enumerate().skip(1) {
        a = rk4_step(&fa, (i - 1) as f64 * h, &a, h)?;
        let s = i as f64 * h;
        row[0] = check(a[0] + free.eval(s, 0.0).0, s, 0.0)?;
    }
    // b = φ̃ + φ along each τ-line
    for (i, row) in values.iter_mut().enumerate() {
        let s = i as f64 * h;
        let fb = |t: f64, b: &[C64]| {
            let phi = free.eval(s, t).0;
            Ok(vec![I * em * (I * (b[0] - 2.0 * phi)).exp()])
        };
        let mut b = vec![row[0] + free.eval(s, 0.0).0];
        for (j, cell) in row.iter_mut().enumerate().skip(1) {
            b = rk4_step(&fb, (j - 1) as f64 * h, &b, h)?;
            let t = j as f64 * h;
            *cell = check(b[0] - free.eval(s, t).0, s, t)?;
        }
    }
    Ok(HeteroSolution { h, values })
}

/// `e^{−iφ̃}` for free input `φ = 0`: `e^{−iφ̃₀} + c e^{Θ} σ + c e^{−Θ} τ`.
pub fn zero_field_closed_form(params: HeteroParams, phi_tilde0: C64, sigma: f64, tau: f64) -> C64 {
    (-I * phi_tilde0).exp() + params.c * params.theta.exp() * sigma + params.c * (-params.theta).exp() * tau
}

impl HeteroSolution {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Max interior `|φ̃_xx − φ̃_tt + 4ic² e^{2iφ̃}|`, using
    /// `∂_x² − ∂_t² = 4∂_σ∂_τ` and a central mixed difference.
    pub fn em1_residual(&self, params: HeteroParams) -> f64 {
        let (p, h, n) = (&self.values, self.h, self.n());
        let c2 = params.c * params.c;
        let mut worst: f64 = 0.0;
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let mixed = (p[i + 1][j + 1] - p[i + 1][j - 1] - p[i - 1][j + 1] + p[i - 1][j - 1]) / (4.0 * h * h);
                worst = worst.max((4.0 * mixed + 4.0 * I * c2 * (2.0 * I * p[i][j]).exp()).norm());
            }
        }
        worst
    }

    /// Interior residuals of both light-cone relations with central
    /// differences; the `σ`-relation is only imposed on `τ = 0`.
    pub fn lightcone_residuals(&self, free: &dyn FreeField, params: HeteroParams) -> (f64, f64) {
        let (p, h, n) = (&self.values, self.h, self.n());
        let (ep, em) = (params.c * params.theta.exp(), params.c * (-params.theta).exp());
        let (mut rs, mut rt): (f64, f64) = (0.0, 0.0);
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let (phi, ps, pt) = free.eval(i as f64 * h, j as f64 * h);
                let ds = (p[i + 1][j] - p[i - 1][j]) / (2.0 * h);
                let dt = (p[i][j + 1] - p[i][j - 1]) / (2.0 * h);
                rs = rs.max((ds - ps - I * ep * (I * (p[i][j] + phi)).exp()).norm());
                rt = rt.max((dt + pt - I * em * (I * (p[i][j] - phi)).exp()).norm());
            }
        }
        (rs, rt)
    }
}

/// Exponent choice for the hetero Darboux entries:
/// `A = X = e^{i(φ̃ + sφ)/2}`, `Z = B = e^{κ(φ̃ − sφ)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DarbouxVariant {
    pub kappa: C64,
    pub sign: f64,
}

impl DarbouxVariant {
    /// Variant selected by [`select_variant`] on the reference pair.
    pub const SELECTED: DarbouxVariant = DarbouxVariant {
        kappa: C64 { re: 0.0, im: 0.5 },
        sign: -1.0,
    };

    pub const ALL: [DarbouxVariant; 4] = [
        DarbouxVariant {
            kappa: C64 { re: 0.5, im: 0.0 },
            sign: 1.0,
        },
        DarbouxVariant {
            kappa: C64 { re: 0.5, im: 0.0 },
            sign: -1.0,
        },
        DarbouxVariant {
            kappa: C64 { re: 0.0, im: 0.5 },
            sign: 1.0,
        },
        DarbouxVariant {
            kappa: C64 { re: 0.0, im: 0.5 },
            sign: -1.0,
        },
    ];

    pub fn label(&self) -> String {
        let k = if self.kappa.im != 0.0 { "i/2" } else { "1/2" };
        format!("kappa={k},s={:+}", self.sign as i32)
    }
}

/// `(A, B, X, Z)`.
pub fn hetero_entries(phi: C64, phi_tilde: C64, variant: DarbouxVariant) -> (C64, C64, C64, C64) {
    let a = (0.5 * I * (phi_tilde + variant.sign * phi)).exp();
    let b = (variant.kappa * (phi_tilde - variant.sign * phi)).exp();
    (a, b, a, b)
}

/// `[[A, X e^{−λ−Θ}], [Z e^{λ+Θ}, B]]`.
pub fn hetero_darboux(phi: C64, phi_tilde: C64, lambda: C64, params: HeteroParams, variant: DarbouxVariant) -> Mat2 {
    let (a, b, x, z) = hetero_entries(phi, phi_tilde, variant);
    let w = (lambda + params.theta).exp();
    Mat2::new(a, x / w, z * w, b)
}

/// Time part of the modified Liouville Lax pair,
/// `V⁺ = ½[[−iφ̃_x, −2c e^{−λ+iφ̃}], [2c e^{λ+iφ̃}, iφ̃_x]]`.
pub fn modified_liouville_v(phi_tilde: C64, phi_tilde_x: C64, lambda: C64, c: C64) -> Mat2 {
    Mat2::new(
        -I * phi_tilde_x,
        -2.0 * c * (-lambda + I * phi_tilde).exp(),
        2.0 * c * (lambda + I * phi_tilde).exp(),
        I * phi_tilde_x,
    ) * c64(0.5, 0.0)
}

/// Time part of the free Lax pair, `V⁻ = −(i/2)φ_x 𝟙`.
pub fn free_v(phi_x: C64) -> Mat2 {
    Mat2::identity() * (-0.5 * I * phi_x)
}

/// Max interior `|dL̃/dt − (V⁺L̃ − L̃V⁻)|` with `d/dt = ∂_σ − ∂_τ` by
/// central differences.
pub fn interface_residual(
    sol: &HeteroSolution,
    free: &dyn FreeField,
    params: HeteroParams,
    lambda: C64,
    variant: DarbouxVariant,
) -> f64 {
    let (p, h, n) = (&sol.values, sol.h, sol.n());
    let phi = |i: usize, j: usize| free.eval(i as f64 * h, j as f64 * h);
    let l = |i: usize, j: usize| hetero_darboux(phi(i, j).0, p[i][j], lambda, params, variant);
    let scale = c64(2.0 * h, 0.0);
    let mut worst: f64 = 0.0;
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let dl = (l(i + 1, j) - l(i - 1, j)) / scale - (l(i, j + 1) - l(i, j - 1)) / scale;
            let ptx = (p[i + 1][j] - p[i - 1][j] + p[i][j + 1] - p[i][j - 1]) / (2.0 * h);
            let (_, fs, ft) = phi(i, j);
            let lm = l(i, j);
            let vp = modified_liouville_v(p[i][j], ptx, lambda, params.c);
            worst = worst.max(max_abs(&(dl - (vp * lm - lm * free_v(fs + ft)))));
        }
    }
    worst
}

/// Interface residual of every variant, smallest first.
pub fn select_variant(
    sol: &HeteroSolution,
    free: &dyn FreeField,
    params: HeteroParams,
    lambda: C64,
) -> Vec<(DarbouxVariant, f64)> {
    let mut all: Vec<_> = DarbouxVariant::ALL
        .iter()
        .map(|&v| (v, interface_residual(sol, free, params, lambda, v)))
        .collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1));
    all
}
