//! Liouville theory with a type-II defect at `x₀`.
//!
//! The field is split into `φ⁻` on `[−L, x₀]` and `φ⁺` on `[x₀, L]`; the
//! defect carries `(z, z̄, X)`. With `Δ = φ⁺ − φ⁻` at the flanks,
//!
//! ```text
//! D = X e^{−iΔ/2} + X⁻¹ e^{iΔ/2},    𝒜 = X e^{−iΔ/2}.
//! ```

use crate::error::{Error, Result};
use crate::{c64, Mat2, C64, I};

/// Below this modulus `D` counts as zero.
pub const DEGENERATE_D_EPS: f64 = 1e-12;

/// Ratio between the off-diagonals of the bulk first-order `V` and the
/// defect `Ṽ` when the sewing condition holds.
pub const SEWING_NORMALIZATION: f64 = 4.0;

/// Samples on a closed interval, endpoints included.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalField {
    pub start: f64,
    pub end: f64,
    pub phi: Vec<C64>,
    pub pi: Vec<C64>,
}

impl IntervalField {
    pub fn new(start: f64, end: f64, phi: Vec<C64>, pi: Vec<C64>) -> Result<Self> {
        if phi.len() != pi.len() {
            return Err(Error::LengthMismatch);
        }
        if phi.len() < 3 || !(end > start) {
            return Err(Error::InvalidGrid(format!(
                "interval [{start}, {end}] with {} points",
                phi.len()
            )));
        }
        Ok(Self { start, end, phi, pi })
    }

    pub fn from_fn<F: Fn(f64) -> (C64, C64)>(start: f64, end: f64, n: usize, f: F) -> Result<Self> {
        let h = (end - start) / (n.max(2) - 1) as f64;
        let (phi, pi) = (0..n).map(|k| f(start + k as f64 * h)).unzip();
        Self::new(start, end, phi, pi)
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn h(&self) -> f64 {
        (self.end - self.start) / (self.len() - 1) as f64
    }

    /// Second-order derivative: central inside, one-sided at the ends.
    pub fn phi_x(&self) -> Vec<C64> {
        let (p, h, n) = (&self.phi, self.h(), self.len());
        (0..n)
            .map(|k| {
                if k == 0 {
                    (-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * h)
                } else if k == n - 1 {
                    (3.0 * p[n - 1] - 4.0 * p[n - 2] + p[n - 3]) / (2.0 * h)
                } else {
                    (p[k + 1] - p[k - 1]) / (2.0 * h)
                }
            })
            .collect()
    }

    /// Trapezoid rule.
    pub fn integrate(&self, f: &[C64]) -> C64 {
        let n = f.len();
        (f.iter().sum::<C64>() - 0.5 * (f[0] + f[n - 1])) * self.h()
    }

    fn bulk_i1(&self, s: f64) -> C64 {
        let px = self.phi_x();
        let d: Vec<C64> = (0..self.len())
            .map(|k| {
                let g = px[k] + s * self.pi[k];
                -0.5 * (0.25 * g * g + (-2.0 * I * self.phi[k]).exp())
            })
            .collect();
        self.integrate(&d)
    }

    fn bulk_p(&self) -> C64 {
        let d: Vec<C64> = self.phi_x().iter().zip(&self.pi).map(|(a, b)| a * b).collect();
        self.integrate(&d)
    }

    fn bulk_h(&self) -> C64 {
        let px = self.phi_x();
        let d: Vec<C64> = (0..self.len())
            .map(|k| 0.5 * (px[k] * px[k] + self.pi[k] * self.pi[k]) + 2.0 * (-2.0 * I * self.phi[k]).exp())
            .collect();
        self.integrate(&d)
    }
}

/// Field values at one flank of the defect.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flank {
    pub phi: C64,
    pub phi_x: C64,
    pub pi: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitFieldConfig {
    pub left: IntervalField,
    pub right: IntervalField,
    pub z: C64,
    pub z_bar: C64,
    pub x: C64,
}

impl SplitFieldConfig {
    pub fn new(left: IntervalField, right: IntervalField, z: C64, z_bar: C64, x: C64) -> Result<Self> {
        if (left.end - right.start).abs() > 1e-12 * (1.0 + left.end.abs()) {
            return Err(Error::InvalidGrid(format!(
                "sub-domains must abut: left ends at {}, right starts at {}",
                left.end, right.start
            )));
        }
        if x == c64(0.0, 0.0) || !x.is_finite() {
            return Err(Error::SingularDefect);
        }
        Ok(Self {
            left,
            right,
            z,
            z_bar,
            x,
        })
    }

    /// Samples `φ⁻, π⁻` on `[−L, x₀]` and `φ⁺, π⁺` on `[x₀, L]` with `n`
    /// points each.
    #[allow(clippy::too_many_arguments)]
    pub fn from_fns<F, G>(
        half_length: f64,
        x0: f64,
        n: usize,
        minus: F,
        plus: G,
        z: C64,
        z_bar: C64,
        x: C64,
    ) -> Result<Self>
    where
        F: Fn(f64) -> (C64, C64),
        G: Fn(f64) -> (C64, C64),
    {
        if !(x0 > -half_length && x0 < half_length) {
            return Err(Error::InvalidGrid(format!(
                "x0 = {x0} outside (-{half_length}, {half_length})"
            )));
        }
        let left = IntervalField::from_fn(-half_length, x0, n, minus)?;
        let right = IntervalField::from_fn(x0, half_length, n, plus)?;
        Self::new(left, right, z, z_bar, x)
    }

    pub fn x0(&self) -> f64 {
        self.left.end
    }

    pub fn half_length(&self) -> f64 {
        0.5 * (self.right.end - self.left.start)
    }

    /// `φ⁺(x₀⁺)` and its derivatives.
    pub fn plus(&self) -> Flank {
        Flank {
            phi: self.right.phi[0],
            phi_x: self.right.phi_x()[0],
            pi: self.right.pi[0],
        }
    }

    /// `φ⁻(x₀⁻)` and its derivatives.
    pub fn minus(&self) -> Flank {
        let n = self.left.len();
        Flank {
            phi: self.left.phi[n - 1],
            phi_x: self.left.phi_x()[n - 1],
            pi: self.left.pi[n - 1],
        }
    }

    fn delta(&self) -> C64 {
        self.plus().phi - self.minus().phi
    }

    fn sum_phase(&self) -> C64 {
        (-0.5 * I * (self.plus().phi + self.minus().phi)).exp()
    }

    pub fn d(&self) -> C64 {
        let e = (-0.5 * I * self.delta()).exp();
        self.x * e + e.inv() / self.x
    }

    pub fn calligraphic_a(&self) -> C64 {
        self.x * (-0.5 * I * self.delta()).exp()
    }

    fn checked_d(&self) -> Result<C64> {
        let d = self.d();
        if d.norm() < DEGENERATE_D_EPS {
            return Err(Error::DegenerateDefect);
        }
        Ok(d)
    }

    fn defect_potential(&self) -> C64 {
        let e = self.sum_phase();
        self.z * e + self.z_bar / e
    }

    /// First integral with the defect contribution.
    pub fn charge_i1(&self) -> Result<C64> {
        let d = self.checked_d()?;
        let a = self.calligraphic_a();
        let (p, m) = (self.plus(), self.minus());
        Ok(
            self.right.bulk_i1(-1.0) + self.left.bulk_i1(-1.0) + self.defect_potential() / d
                - I * a / (2.0 * d) * (p.phi_x - p.pi + m.phi_x - m.pi)
                + 0.5 * I * (p.phi_x - p.pi),
        )
    }

    /// Image of [`charge_i1`](Self::charge_i1) under the monodromy symmetry.
    pub fn charge_i1_sym(&self) -> Result<C64> {
        let d = self.checked_d()?;
        let a = self.calligraphic_a();
        let (p, m) = (self.plus(), self.minus());
        Ok(
            self.right.bulk_i1(1.0) + self.left.bulk_i1(1.0) + self.defect_potential() / d
                - I / (2.0 * a * d) * (p.phi_x + p.pi + m.phi_x + m.pi)
                + 0.5 * I * (p.phi_x + p.pi),
        )
    }

    /// `(P, H)` with the defect couplings.
    pub fn momentum_hamiltonian(&self) -> Result<(C64, C64)> {
        let d = self.checked_d()?;
        let a = self.calligraphic_a();
        let coupling = (a - a.inv()) / d;
        let (p, m) = (self.plus(), self.minus());
        let momentum =
            self.right.bulk_p() + self.left.bulk_p() - I * (p.pi - m.pi) - I * coupling * (p.phi_x + m.phi_x);
        let hamiltonian = self.right.bulk_h() + self.left.bulk_h()
            - 4.0 / d * self.defect_potential()
            - I * (p.phi_x - m.phi_x)
            - I * coupling * (p.pi + m.pi);
        Ok((momentum, hamiltonian))
    }

    /// `(P / (I_sym − I), H / (I_sym + I))`.
    pub fn momentum_hamiltonian_ratios(&self) -> Result<(C64, C64)> {
        let (p, h) = self.momentum_hamiltonian()?;
        let (i1, s) = (self.charge_i1()?, self.charge_i1_sym()?);
        Ok((p / (s - i1), h / (s + i1)))
    }

    /// `S₁ = X − e^{iΔ/2}`.
    pub fn sewing_residual(&self) -> C64 {
        self.x - (0.5 * I * self.delta()).exp()
    }

    /// `(V^{+(1)}, V^{−(1)}, Ṽ^{+(1)}, Ṽ^{−(1)})` at the flanks.
    pub fn v_matrices(&self, mu: C64) -> Result<VMatrices> {
        let d = self.checked_d()?;
        let a = self.calligraphic_a();
        let (p, m) = (self.plus(), self.minus());
        let em = (-mu).exp();
        let e = self.sum_phase();
        let bulk = |f: Flank| {
            let diag = -I * (f.phi_x - f.pi);
            let up = 4.0 * em * (-I * f.phi).exp();
            let down = 4.0 * em * (I * f.phi).exp();
            Mat2::new(diag, up, down, -diag)
        };
        let grad = -0.5 * I * (p.phi_x - p.pi + m.phi_x - m.pi);
        let dp = (self.z * e / a - a * self.z_bar / e + grad) / (d * d);
        let dm = (self.z_bar / (a * e) - a * self.z * e + grad) / (d * d);
        let k = 2.0 / d * em;
        let tilde_plus = Mat2::new(dp, k * e / self.x, k * self.x / e, -dp);
        let tilde_minus = Mat2::new(dm, k * self.x * e, k / (self.x * e), -dm);
        Ok(VMatrices {
            plus: bulk(p),
            minus: bulk(m),
            tilde_plus,
            tilde_minus,
        })
    }

    /// Largest off-diagonal gap `|Ṽ^{±(1)} − V^{±(1)}/4|`.
    pub fn sewing_mismatch(&self, mu: C64) -> Result<f64> {
        let v = self.v_matrices(mu)?;
        let gap = |t: &Mat2, b: &Mat2| {
            let s = c64(SEWING_NORMALIZATION, 0.0);
            (t[(0, 1)] - b[(0, 1)] / s)
                .norm()
                .max((t[(1, 0)] - b[(1, 0)] / s).norm())
        };
        Ok(gap(&v.tilde_plus, &v.plus).max(gap(&v.tilde_minus, &v.minus)))
    }
}

/// Smooth random split configuration on `[−L, L]` with the defect at `x0`:
/// `φ⁻ = c₀ + c₁ sin x`, `π⁻ = c₂ cos x`, `φ⁺ = c₃ + c₄ cos x`, `π⁺ = c₅ x`
/// with `|Re c|, |Im c| ≤ 0.5`, `|z|, |z̄| ≤ 1` and `|ln X| ≤ 0.3`.
pub fn random_split_config<R: rand::Rng + ?Sized>(
    rng: &mut R,
    half_length: f64,
    x0: f64,
    n: usize,
) -> Result<SplitFieldConfig> {
    use crate::sampling::square;
    let c: [C64; 6] = std::array::from_fn(|_| square(rng, 0.5));
    let (z, z_bar, log_x) = (square(rng, 1.0), square(rng, 1.0), square(rng, 0.3));
    SplitFieldConfig::from_fns(
        half_length,
        x0,
        n,
        move |x| (c[0] + c[1] * x.sin(), c[2] * x.cos()),
        move |x| (c[3] + c[4] * x.cos(), c[5] * x),
        z,
        z_bar,
        log_x.exp(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VMatrices {
    pub plus: Mat2,
    pub minus: Mat2,
    pub tilde_plus: Mat2,
    pub tilde_minus: Mat2,
}
