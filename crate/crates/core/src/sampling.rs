//! Seeded random configurations.
//!
//! Lattice fields are drawn with `|a|, |ā| ≤ 1` and `v = e^w`, `|w| ≤ 0.5`,
//! so that `v` stays away from zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::defect::DefectSite;
use crate::lattice::LatticeState;
use crate::{c64, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the closed disk of radius `r`.
pub fn disk<R: Rng + ?Sized>(rng: &mut R, r: f64) -> C64 {
    let rho = r * rng.gen::<f64>().sqrt();
    let arg = rng.gen_range(0.0..std::f64::consts::TAU);
    C64::from_polar(rho, arg)
}

/// Uniform sample from the square `[-r, r] + i[-r, r]`.
pub fn square<R: Rng + ?Sized>(rng: &mut R, r: f64) -> C64 {
    c64(rng.gen_range(-r..=r), rng.gen_range(-r..=r))
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> LatticeState {
    random_state_scaled(rng, n, 1.0, 0.5)
}

/// Random state with `|a|, |ā| ≤ amp` and `|ln v| ≤ log_v`.
pub fn random_state_scaled<R: Rng + ?Sized>(rng: &mut R, n: usize, amp: f64, log_v: f64) -> LatticeState {
    let a = (0..n).map(|_| disk(rng, amp)).collect();
    let a_bar = (0..n).map(|_| disk(rng, amp)).collect();
    let v = (0..n).map(|_| disk(rng, log_v).exp()).collect();
    LatticeState::new(a, a_bar, v).expect("sampled v is nonzero")
}

/// Random defect at site `n` with `|z|, |z̄| ≤ 1`, `|ln X| ≤ 0.5`, `|θ| ≤ 0.5`.
pub fn random_defect<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DefectSite {
    random_defect_scaled(rng, n, 1.0, 0.5)
}

pub fn random_defect_scaled<R: Rng + ?Sized>(rng: &mut R, n: usize, amp: f64, log_x: f64) -> DefectSite {
    let z = disk(rng, amp);
    let z_bar = disk(rng, amp);
    let x = disk(rng, log_x).exp();
    let theta = disk(rng, 0.5);
    DefectSite::new(n, theta, z, z_bar, x).expect("sampled X is nonzero")
}

/// Phase of `v` on the neutral background `v = e^{iπ/4}`, where the
/// linearised growth rates `±(2 cos k − 2 cos 2ψ)` of the `a`, `ā` modes
/// are smallest.
pub const NEUTRAL_PHASE: f64 = std::f64::consts::FRAC_PI_4;

/// Amplitude and `ln v` spread of [`near_neutral_state`].
pub const NEAR_NEUTRAL_AMPLITUDE: f64 = 1e-4;
pub const NEAR_NEUTRAL_LOG_V: f64 = 0.05;

/// Small perturbation of the neutral background. Generic states grow
/// exponentially in real time; this family stays bounded up to `t ≈ 5`.
pub fn near_neutral_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> LatticeState {
    let phase = C64::from_polar(1.0, NEUTRAL_PHASE);
    let a = (0..n).map(|_| disk(rng, NEAR_NEUTRAL_AMPLITUDE)).collect();
    let a_bar = (0..n).map(|_| disk(rng, NEAR_NEUTRAL_AMPLITUDE)).collect();
    let v = (0..n).map(|_| phase * disk(rng, NEAR_NEUTRAL_LOG_V).exp()).collect();
    LatticeState::new(a, a_bar, v).expect("sampled v is nonzero")
}

/// Defect companion of [`near_neutral_state`], with `θ = iπ/4`.
pub fn near_neutral_defect<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DefectSite {
    let z = disk(rng, NEAR_NEUTRAL_AMPLITUDE);
    let z_bar = disk(rng, NEAR_NEUTRAL_AMPLITUDE);
    let x = disk(rng, NEAR_NEUTRAL_LOG_V).exp();
    DefectSite::new(n, c64(0.0, NEUTRAL_PHASE), z, z_bar, x).expect("sampled X is nonzero")
}

/// Random spectral parameter pair away from the r-matrix pole.
pub fn random_spectral_pair<R: Rng + ?Sized>(rng: &mut R) -> (C64, C64) {
    loop {
        let l = square(rng, 1.0);
        let m = square(rng, 1.0);
        if (l - m).sinh().norm() > 0.05 {
            return (l, m);
        }
    }
}
