//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use liouville_defects::backlund::{
    bt_evolve, hetero_bt_generate, interface_residual, zero_field_closed_form, BtGrid, BtInitial, DarbouxVariant,
    Harmonic, HeteroParams, ZeroField,
};
use liouville_defects::continuum::{
    check_linear_algebra, monodromy_fit, smooth_random_field, FieldConfig, LiouvilleSolution, SechSolution,
    FIT_MAX_POWER, FIT_POINTS, FIT_WINDOW,
};
use liouville_defects::continuum_defect::{random_split_config, SplitFieldConfig};
use liouville_defects::defect::{check_defect_algebra, DefectedLattice};
use liouville_defects::lattice::{check_quadratic_algebra, IntegrationOptions};
use liouville_defects::sampling::{
    near_neutral_defect, near_neutral_state, random_defect, random_spectral_pair, random_state, rng_from_seed, square,
};
use liouville_defects::{c64, C64, I};

/// Pinned bounds, one per quantity.
mod tol {
    pub const CHARGE_C1_ABS: f64 = 1e-12;
    pub const CHARGE_REL: f64 = 1e-12;
    pub const ALGEBRA: f64 = 1e-10;
    pub const ZERO_CURVATURE: f64 = 1e-10;
    pub const FLOW_COMPONENTWISE: f64 = 1e-12;
    pub const ORDER_MIN: f64 = 12.0;
    pub const ORDER_MAX: f64 = 20.0;
    pub const QUADRATURE_REL: f64 = 1e-13;
    pub const MONODROMY_FIT_REL: f64 = 0.01;
    pub const SEWING: f64 = 1e-12;
    /// Lower end of "order one" for the violated sewing condition.
    pub const SEWING_VIOLATED_MIN: f64 = 0.1;
    pub const REFINEMENT_MIN: f64 = 3.5;
    pub const CLOSED_FORM: f64 = 1e-8;
    pub const DISCRIMINATION_MIN: f64 = 100.0;
}

mod budget {
    use std::time::Duration;
    pub const CHARGES: Duration = Duration::from_secs(10);
    pub const ALGEBRA: Duration = Duration::from_secs(5);
    pub const CONSERVATION: Duration = Duration::from_secs(60);
    pub const SUITE: Duration = Duration::from_secs(300);
}

const SEED: u64 = 7;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rel(got: C64, want: C64) -> f64 {
    (got - want).norm() / want.norm()
}

fn worst(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |acc: f64, x| {
        if acc.is_nan() || x.is_nan() {
            f64::NAN
        } else {
            acc.max(x)
        }
    })
}

fn ratios(xs: &[f64]) -> Vec<f64> {
    xs.windows(2).map(|w| w[0] / w[1]).collect()
}

fn all_at_least(xs: &[f64], min: f64) -> bool {
    xs.iter().all(|&r| r >= min)
}

fn in_order_window(r: f64) -> bool {
    (tol::ORDER_MIN..=tol::ORDER_MAX).contains(&r)
}

fn lattice_charges() -> Verdict {
    let mut rng = rng_from_seed(SEED);
    let (mut c0, mut c1, mut c2) = (Vec::new(), Vec::new(), Vec::new());
    for n in 2..=6 {
        for _ in 0..100 {
            let s = random_state(&mut rng, n);
            let ex = s.charges_from_trace(2).expect("expansion");
            let product: C64 = s.v.iter().product();
            c0.push(rel(ex.coefficients[0].exp(), product));
            c1.push(ex.coefficients[1].norm());
            c2.push(rel(
                ex.coefficients[2],
                s.charges_closed_form().expect("closed form").i2,
            ));
        }
    }
    let (c0, c1, c2) = (worst(c0), worst(c1), worst(c2));
    verdict(
        c1 <= tol::CHARGE_C1_ABS && c2 <= tol::CHARGE_REL && c0 <= tol::CHARGE_REL,
        format!("|c1| {c1:.1e}, c2 vs I2 {c2:.1e}, exp(c0) vs prod v {c0:.1e}"),
    )
}

fn defect_charges() -> Verdict {
    let mut rng = rng_from_seed(SEED);
    let (mut c0, mut c1, mut c2) = (Vec::new(), Vec::new(), Vec::new());
    for n_sites in 3..=6 {
        for k in 0..100 {
            let site = 2 + k % (n_sites - 2);
            let bulk = random_state(&mut rng, n_sites);
            let d = random_defect(&mut rng, site);
            let dl = DefectedLattice::new(bulk.clone(), d).expect("defect placement");
            let ex = dl.charges_from_trace(2).expect("expansion");
            let product = (1..=n_sites)
                .filter(|&j| j != site)
                .map(|j| bulk.v[j - 1])
                .product::<C64>()
                * d.x
                / d.theta.exp();
            c0.push(rel(ex.coefficients[0].exp(), product));
            c1.push(ex.coefficients[1].norm());
            c2.push(rel(
                ex.coefficients[2],
                dl.charges_closed_form().expect("closed form").i2,
            ));
        }
    }
    let (c0, c1, c2) = (worst(c0), worst(c1), worst(c2));
    verdict(
        c1 <= tol::CHARGE_C1_ABS && c2 <= tol::CHARGE_REL && c0 <= tol::CHARGE_REL,
        format!("|c1| {c1:.1e}, c2 vs I2 {c2:.1e}, exp(c0) vs product {c0:.1e}"),
    )
}

fn algebra() -> Verdict {
    let mut rng = rng_from_seed(SEED);
    let (mut bulk, mut defect, mut linear) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..100 {
        let n = 3 + k % 4;
        let s = random_state(&mut rng, n);
        let (l, m) = random_spectral_pair(&mut rng);
        bulk.push(check_quadratic_algebra(&s, l, m, 1 + k % n).expect("bulk algebra"));
        let d = random_defect(&mut rng, 1);
        defect.push(check_defect_algebra(&d, l, m).expect("defect algebra"));
        let (phi, pi) = (square(&mut rng, 1.0), square(&mut rng, 1.0));
        linear.push(check_linear_algebra(phi, pi, l, m).expect("linear algebra"));
    }
    let (b, d, l) = (worst(bulk), worst(defect), worst(linear));
    verdict(
        b <= tol::ALGEBRA && d <= tol::ALGEBRA && l <= tol::ALGEBRA,
        format!("L {b:.1e}, defect L {d:.1e}, continuum {l:.1e}"),
    )
}

fn zero_curvature() -> Verdict {
    let mut rng = rng_from_seed(SEED);
    let (mut bulk, mut defect, mut flow) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..20 {
        let n = 4 + k % 4;
        let mu = square(&mut rng, 1.0);
        let s = random_state(&mut rng, n);
        bulk.extend((1..=n).map(|j| s.zero_curvature_residual(j, mu).expect("bulk residual")));
        let eom = s.bulk_eom().expect("eom");
        flow.push(eom.max_abs_diff(&s.bracket_flow(&s.i2_gradient())));
        let site = 2 + k % (n - 2);
        let dl = DefectedLattice::new(random_state(&mut rng, n), random_defect(&mut rng, site)).expect("defect");
        defect.extend((1..=n).map(|j| dl.zero_curvature_residual(j, mu).expect("defect residual")));
    }
    let (b, d, f) = (worst(bulk), worst(defect), worst(flow));
    verdict(
        b <= tol::ZERO_CURVATURE && d <= tol::ZERO_CURVATURE && f <= tol::FLOW_COMPONENTWISE,
        format!("bulk {b:.1e}, defect {d:.1e}, eom vs flow {f:.1e}"),
    )
}

fn conservation() -> Verdict {
    let mut rng = rng_from_seed(SEED);
    let opts = IntegrationOptions::default();
    let bulk = near_neutral_state(&mut rng, 8);
    let dl = DefectedLattice::new(near_neutral_state(&mut rng, 8), near_neutral_defect(&mut rng, 4)).expect("defect");
    let b = [1e-2, 5e-3].map(|dt| bulk.integrate(dt, 5.0, &opts).expect("bulk run"));
    let d = [1e-2, 5e-3].map(|dt| dl.integrate(dt, 5.0, &opts).expect("defect run"));
    if let Some(e) = b
        .iter()
        .map(|t| &t.abort)
        .chain(d.iter().map(|t| &t.abort))
        .flatten()
        .next()
    {
        return verdict(false, format!("trajectory aborted: {e}"));
    }
    let i2 = b[0].report.i2_drift / b[1].report.i2_drift;
    let i2d = d[0].report.i2_drift / d[1].report.i2_drift;
    let reports = [&b[0].report, &b[1].report, &d[0].report, &d[1].report];
    let traces: Vec<f64> = reports
        .chunks(2)
        .flat_map(|pair| pair[0].trace_drift.iter().zip(&pair[1].trace_drift).map(|(x, y)| x / y))
        .collect();
    let pass = in_order_window(i2) && in_order_window(i2d) && traces.iter().all(|&r| in_order_window(r));
    verdict(
        pass,
        format!("I2 ratio {i2:.2}, defect I2 ratio {i2d:.2}, trace ratios {traces:.2?}"),
    )
}

fn continuum_charges() -> Verdict {
    let l = 1.7;
    let zero = FieldConfig::zero(l, 40).expect("grid");
    let ch = zero.charges();
    let (_, ht) = zero.dual_charges();
    let exact = [
        rel(ch.i1, c64(-l, 0.0)),
        rel(ch.hamiltonian, c64(4.0 * l, 0.0)),
        ch.momentum.norm() / l,
        rel(ht, c64(-4.0 * l, 0.0)),
    ];
    let mut rng = rng_from_seed(SEED);
    let half = std::f64::consts::PI;
    let fits: Vec<f64> = (0..10)
        .map(|_| {
            let f = smooth_random_field(&mut rng, half, 4096, 2, 0.3).expect("field");
            let fit = monodromy_fit(&f, FIT_WINDOW, FIT_POINTS, FIT_MAX_POWER).expect("fit");
            rel(fit.c1(), f.charges().i1)
        })
        .collect();
    let (e, fw) = (worst(exact), worst(fits));
    verdict(
        e <= tol::QUADRATURE_REL && fw <= tol::MONODROMY_FIT_REL,
        format!("zero-field constants {e:.1e}, worst fit error {:.3}%", 100.0 * fw),
    )
}

fn sewing() -> Verdict {
    let mut rng = rng_from_seed(SEED);
    let mut sewn = Vec::new();
    for _ in 0..100 {
        let mut c = random_split_config(&mut rng, 1.0, 0.2, 41).expect("config");
        c.x = (0.5 * I * (c.plus().phi - c.minus().phi)).exp();
        let mu = square(&mut rng, 1.0);
        sewn.push(c.sewing_mismatch(mu).expect("mismatch"));
    }
    let zero = |_: f64| (c64(0.0, 0.0), c64(0.0, 0.0));
    let flat = SplitFieldConfig::from_fns(1.0, 0.2, 41, zero, zero, c64(0.0, 0.0), c64(0.0, 0.0), c64(2.0, 0.0))
        .expect("flat");
    let unsewn = flat.sewing_mismatch(c64(0.4, -0.3)).expect("mismatch");
    let s = worst(sewn);
    verdict(
        s <= tol::SEWING && unsewn >= tol::SEWING_VIOLATED_MIN,
        format!("S1 = 0: {s:.1e}; X = 2: {unsewn:.3}"),
    )
}

fn hetero_bt() -> Verdict {
    let params = HeteroParams::new(c64(0.4, 0.1), c64(0.2, -0.1)).expect("params");
    let free = Harmonic::default();
    let phi0 = c64(0.1, 0.0);
    let sols: Vec<_> = [21, 41, 81]
        .iter()
        .map(|&n| hetero_bt_generate(&free, params, phi0, n, 1.0).expect("generate"))
        .collect();
    let em1: Vec<f64> = sols.iter().map(|s| s.em1_residual(params)).collect();
    let refine = ratios(&em1);
    let zero = hetero_bt_generate(&ZeroField, params, phi0, 81, 1.0).expect("zero field");
    let closed = worst((0..81).flat_map(|i| {
        let zero = &zero;
        (0..81).map(move |j| {
            let want = zero_field_closed_form(params, phi0, i as f64 * zero.h, j as f64 * zero.h);
            ((-I * zero.values[i][j]).exp() - want).norm()
        })
    }));
    let lam = c64(0.3, 0.0);
    let pair = interface_residual(&sols[2], &free, params, lam, DarbouxVariant::SELECTED);
    let other = Harmonic { shift: 1.0, ..free };
    let wrong = hetero_bt_generate(&other, params, phi0, 81, 1.0).expect("non-pair");
    let non_pair = interface_residual(&wrong, &free, params, lam, DarbouxVariant::SELECTED);
    let disc = non_pair / pair;
    verdict(
        all_at_least(&refine, tol::REFINEMENT_MIN) && closed <= tol::CLOSED_FORM && disc >= tol::DISCRIMINATION_MIN,
        format!("refinement ratios {refine:.2?}, closed form {closed:.1e}, non-pair/pair {disc:.0}"),
    )
}

fn auto_bt() -> Verdict {
    let seed = SechSolution::default();
    let theta = c64(0.2, 0.1);
    let init = BtInitial {
        phi_tilde: seed.eval(-1.0, 0.0).phi + 0.3,
        y: c64(0.1, 0.05),
        z: c64(-0.2, 0.1),
    };
    let (mut pde, mut xrel) = (Vec::new(), Vec::new());
    for n in [21, 41, 81] {
        let grid = BtGrid {
            x_min: -1.0,
            x_max: 1.0,
            nx: n,
            t_end: 1.0,
            nt: n,
        };
        let sol = bt_evolve(&seed, init, theta, grid).expect("bt evolve");
        pde.push(sol.phi_tilde.liouville_residual().expect("residual"));
        xrel.push(sol.x_relation_error(&seed));
    }
    let (rp, rx) = (ratios(&pde), ratios(&xrel));
    verdict(
        all_at_least(&rp, tol::REFINEMENT_MIN) && all_at_least(&rx, tol::REFINEMENT_MIN),
        format!("PDE residual ratios {rp:.2?}, X relation ratios {rx:.2?}"),
    )
}

fn harness_determinism() -> Verdict {
    let exe = env!("CARGO_BIN_EXE_liouville-harness");
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = dir.path().join("poisson.json");
    std::fs::write(&cfg, r#"{"mode": "verify-poisson", "seed": 7, "samples": 100}"#).expect("config");
    let run = || {
        Command::new(exe)
            .arg("run")
            .arg("--config")
            .arg(&cfg)
            .output()
            .expect("spawn")
    };
    let (a, b) = (run(), run());
    let single = a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    let suite = |out: &Path| {
        Command::new(exe)
            .arg("suite")
            .arg("--out")
            .arg(out)
            .output()
            .expect("spawn")
            .status
    };
    let start = Instant::now();
    let first = suite(&dir.path().join("a"));
    let elapsed = start.elapsed();
    let second = suite(&dir.path().join("b"));
    let mut names: Vec<_> = std::fs::read_dir(dir.path().join("a"))
        .expect("suite output")
        .map(|e| e.expect("entry").file_name())
        .collect();
    names.sort();
    let identical = names.iter().all(|name| {
        std::fs::read(dir.path().join("a").join(name)).ok() == std::fs::read(dir.path().join("b").join(name)).ok()
    });
    verdict(
        single && first.success() && second.success() && identical && elapsed < budget::SUITE,
        format!(
            "run reports identical: {single}; {} suite files identical: {identical}; suite {:.1}s",
            names.len(),
            elapsed.as_secs_f64()
        ),
    )
}

type Criterion = (&'static str, Option<Duration>, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        ("lattice charges", Some(budget::CHARGES), lattice_charges),
        ("defect charges", Some(budget::CHARGES), defect_charges),
        ("Poisson algebra identities", Some(budget::ALGEBRA), algebra),
        ("zero curvature and Hamiltonian flow", None, zero_curvature),
        (
            "conservation under integration",
            Some(budget::CONSERVATION),
            conservation,
        ),
        ("continuum charges", None, continuum_charges),
        ("sewing condition", None, sewing),
        ("hetero-Backlund generator", None, hetero_bt),
        ("auto-Backlund evolution", None, auto_bt),
        ("harness determinism and suite runtime", None, harness_determinism),
    ];
    let mut failed = 0;
    for (k, (title, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed < l);
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let limit = limit.map_or(String::new(), |l| format!(" < {}s", l.as_secs()));
        println!(
            "criterion {:>2} {} {title}: {} [{:.2}s{limit}]",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
        );
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
