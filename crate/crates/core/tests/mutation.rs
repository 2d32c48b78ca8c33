//! Negative controls: a sign error in the bulk equations of motion must be
//! caught by both the zero-curvature and the conservation checks.

use liouville_defects::lattice::{lax_velocity, LatticeState, LatticeTangent};
use liouville_defects::ode::rk4_step;
use liouville_defects::sampling::{near_neutral_state, random_state, rng_from_seed, square};
use liouville_defects::{max_abs, Result, C64};

/// Bulk velocities with the sign of `v̇` flipped.
fn mutated_eom(s: &LatticeState) -> Result<LatticeTangent> {
    let mut d = s.bulk_eom()?;
    d.v.iter_mut().for_each(|x| *x = -*x);
    Ok(d)
}

fn zero_curvature_with(s: &LatticeState, vel: &LatticeTangent, mu: C64) -> f64 {
    let w = mu.exp();
    (1..=s.len())
        .map(|j| {
            let k = j - 1;
            let ldot = lax_velocity(s.v[k], vel.a[k], vel.a_bar[k], vel.v[k], w);
            let l = s.lax_at(j as isize, w);
            let rhs = s.time_lax_a2(j as isize + 1, mu) * l - l * s.time_lax_a2(j as isize, mu);
            max_abs(&(ldot - rhs))
        })
        .fold(0.0, f64::max)
}

fn i2_drift<F>(start: &LatticeState, rates: F, dt: f64, t_end: f64) -> f64
where
    F: Fn(&LatticeState) -> Result<LatticeTangent>,
{
    let n = start.len();
    let rhs = |_t: f64, y: &[C64]| -> Result<Vec<C64>> {
        let s = LatticeState::new(y[..n].to_vec(), y[n..2 * n].to_vec(), y[2 * n..].to_vec())?;
        let d = rates(&s)?;
        Ok([d.a, d.a_bar, d.v].concat())
    };
    let mut y = [start.a.as_slice(), &start.a_bar, &start.v].concat();
    let i0 = start.i2();
    let mut worst: f64 = 0.0;
    let steps = (t_end / dt).round() as usize;
    for k in 0..steps {
        y = rk4_step(&rhs, k as f64 * dt, &y, dt).unwrap();
        let s = LatticeState::new(y[..n].to_vec(), y[n..2 * n].to_vec(), y[2 * n..].to_vec()).unwrap();
        worst = worst.max((s.i2() - i0).norm());
    }
    worst
}

#[test]
fn sign_error_breaks_zero_curvature() {
    let mut rng = rng_from_seed(11);
    for _ in 0..10 {
        let s = random_state(&mut rng, 6);
        let mu = square(&mut rng, 1.0);
        let good = zero_curvature_with(&s, &s.bulk_eom().unwrap(), mu);
        let bad = zero_curvature_with(&s, &mutated_eom(&s).unwrap(), mu);
        assert!(good <= 1e-10, "{good}");
        assert!(bad >= 1e-3, "{bad}");
    }
}

#[test]
fn sign_error_breaks_conservation() {
    let s = near_neutral_state(&mut rng_from_seed(12), 8);
    let good = i2_drift(&s, |x| x.bulk_eom(), 1e-2, 2.0);
    let bad = i2_drift(&s, mutated_eom, 1e-2, 2.0);
    assert!(good < 1e-9, "{good}");
    assert!(bad > 1e3 * good, "{bad} vs {good}");
}
