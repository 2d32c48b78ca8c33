//! One function per run mode. Each returns the checks it evaluated and,
//! where the mode produces one, a numeric series.

use liouville_defects::backlund::{
    bt_evolve, hetero_bt_generate, interface_residual, select_variant, zero_field_closed_form, BtGrid, BtInitial,
    DarbouxVariant, Harmonic, HeteroParams, ZeroField,
};
use liouville_defects::continuum::{
    check_linear_algebra, evolve, monodromy_fit, smooth_random_field, FieldConfig, FieldTrajectory, LiouvilleSolution,
    SechSolution, FIT_MAX_POWER, FIT_POINTS, FIT_WINDOW, HAMILTONIAN_RATIO, MOMENTUM_RATIO,
};
use liouville_defects::continuum_defect::{random_split_config, SplitFieldConfig};
use liouville_defects::defect::{check_defect_algebra, DefectSite, DefectedLattice};
use liouville_defects::lattice::{
    check_quadratic_algebra, jacobi_residual, lax_velocity, ConservationReport, ConservedSample, IntegrationOptions,
    LatticeState,
};
use liouville_defects::sampling::{
    disk, near_neutral_defect, near_neutral_state, random_defect, random_spectral_pair, random_state, rng_from_seed,
    square, SeededRng,
};
use liouville_defects::{c64, max_abs, Error, C64, I};
use rand::Rng;

use crate::config::{Cplx, InitialState, Mode, Resolved};
use crate::report::{Check, Series};

/// What a mode produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub series: Option<Series>,
    /// Early termination; the run fails.
    pub error: Option<String>,
}

impl From<Error> for Outcome {
    fn from(e: Error) -> Self {
        Self {
            error: Some(e.to_string()),
            ..Self::default()
        }
    }
}

pub fn run_mode(r: &Resolved) -> Outcome {
    let out = match r.mode {
        Mode::VerifyCharges => verify_charges(r),
        Mode::DefectCharges => defect_charges(r),
        Mode::VerifyPoisson => verify_poisson(r),
        Mode::VerifyZeroCurvature => verify_zero_curvature(r),
        Mode::LatticeSim => lattice_sim(r, false),
        Mode::LatticeDefectSim => lattice_sim(r, true),
        Mode::LiouvilleEvolve => liouville_evolve(r),
        Mode::MonodromyCheck => monodromy_check(r),
        Mode::BtEvolve => bt_mode(r),
        Mode::HeteroBt => hetero_mode(r),
    };
    out.unwrap_or_else(Outcome::from)
}

fn cx(p: Cplx) -> C64 {
    c64(p[0], p[1])
}

fn rel(got: C64, want: C64) -> f64 {
    (got - want).norm() / want.norm()
}

/// `max` that keeps NaN.
fn worse(acc: f64, x: f64) -> f64 {
    if acc.is_nan() || x.is_nan() {
        f64::NAN
    } else {
        acc.max(x)
    }
}

fn checks_only(checks: Vec<Check>) -> Result<Outcome, Error> {
    Ok(Outcome {
        checks,
        ..Outcome::default()
    })
}

fn verify_charges(r: &Resolved) -> Result<Outcome, Error> {
    let tol = &r.tolerances;
    let mut rng = rng_from_seed(r.seed);
    let (mut c1, mut c2, mut c0, mut lead) = (0.0, 0.0, 0.0, 0.0);
    for &n in &r.sites {
        for _ in 0..r.samples {
            let s = random_state(&mut rng, n);
            let ex = s.charges_from_trace(2)?;
            let product: C64 = s.v.iter().product();
            c0 = worse(c0, rel(ex.coefficients[0].exp(), product));
            c1 = worse(c1, ex.coefficients[1].norm());
            c2 = worse(c2, rel(ex.coefficients[2], s.charges_closed_form()?.i2));
            lead = worse(lead, (ex.leading_exponent - n as i32).abs() as f64);
        }
    }
    checks_only(vec![
        Check::at_most(
            "leading power of tr T equals N",
            "lattice:trace:leading-power",
            lead,
            0.0,
        ),
        Check::at_most(
            "exp(c0) = product of v_j (relative)",
            "lattice:charge:I0",
            c0,
            r.scaled(tol.series),
        ),
        Check::at_most("|c1|", "lattice:charge:I1", c1, r.scaled(tol.series)),
        Check::at_most(
            "c2 = I2 closed form (relative)",
            "lattice:charge:I2",
            c2,
            r.scaled(tol.series),
        ),
    ])
}

fn defect_charges(r: &Resolved) -> Result<Outcome, Error> {
    let tol = &r.tolerances;
    let mut rng = rng_from_seed(r.seed);
    let (mut c1, mut c2, mut c0) = (0.0, 0.0, 0.0);
    for &n_sites in &r.sites {
        for k in 0..r.samples {
            let site = 2 + k % (n_sites - 2);
            let bulk = random_state(&mut rng, n_sites);
            let d = random_defect(&mut rng, site);
            let dl = DefectedLattice::new(bulk, d)?;
            let ex = dl.charges_from_trace(2)?;
            let product: C64 = (1..=n_sites)
                .filter(|&j| j != site)
                .map(|j| dl.bulk.v[j - 1])
                .product::<C64>()
                * d.x
                / d.theta.exp();
            c0 = worse(c0, rel(ex.coefficients[0].exp(), product));
            c1 = worse(c1, ex.coefficients[1].norm());
            c2 = worse(c2, rel(ex.coefficients[2], dl.charges_closed_form()?.i2));
        }
    }
    let (mut p_ratio, mut h_ratio, mut sewn) = (0.0, 0.0, 0.0);
    let mu = cx(r.mu);
    for _ in 0..r.samples {
        let mut c = random_split_config(&mut rng, r.half_length, 0.2 * r.half_length, r.grid_points)?;
        let (p, h) = c.momentum_hamiltonian_ratios()?;
        p_ratio = worse(p_ratio, (p - MOMENTUM_RATIO).norm());
        h_ratio = worse(h_ratio, (h - HAMILTONIAN_RATIO).norm());
        c.x = (0.5 * I * (c.plus().phi - c.minus().phi)).exp();
        sewn = worse(sewn, c.sewing_mismatch(mu)?);
    }
    let zero = |_: f64| (c64(0.0, 0.0), c64(0.0, 0.0));
    let flat = SplitFieldConfig::from_fns(
        r.half_length,
        0.2 * r.half_length,
        r.grid_points,
        zero,
        zero,
        c64(0.0, 0.0),
        c64(0.0, 0.0),
        c64(2.0, 0.0),
    )?;
    let unsewn = flat.sewing_mismatch(mu)?;
    checks_only(vec![
        Check::at_most(
            "exp(c0) = product with defect (relative)",
            "defect:charge:I0",
            c0,
            r.scaled(tol.series),
        ),
        Check::at_most("|c1|", "defect:charge:I1", c1, r.scaled(tol.series)),
        Check::at_most(
            "c2 = defect I2 closed form (relative)",
            "defect:charge:I2",
            c2,
            r.scaled(tol.series),
        ),
        Check::at_most(
            "P = -2 (I1_sym - I1) with defect",
            "continuum-defect:momentum-ratio",
            p_ratio,
            r.scaled(tol.algebraic),
        ),
        Check::at_most(
            "H = -2 (I1_sym + I1) with defect",
            "continuum-defect:hamiltonian-ratio",
            h_ratio,
            r.scaled(tol.algebraic),
        ),
        Check::at_most(
            "off-diagonal mismatch with S1 = 0",
            "continuum-defect:sewing",
            sewn,
            r.scaled(tol.series),
        ),
        Check::at_least(
            "off-diagonal mismatch with X = 2 on flat flanks",
            "continuum-defect:sewing-violated",
            unsewn,
            tol.detection_min,
        ),
    ])
}

fn verify_poisson(r: &Resolved) -> Result<Outcome, Error> {
    let tol = r.scaled(r.tolerances.algebraic);
    let mut rng = rng_from_seed(r.seed);
    let (mut bulk, mut defect, mut jacobi, mut linear) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..r.samples {
        let s = random_state(&mut rng, r.n_sites);
        let (l, m) = random_spectral_pair(&mut rng);
        let j = rng.gen_range(1..=r.n_sites);
        bulk = worse(bulk, check_quadratic_algebra(&s, l, m, j)?);
        let d = random_defect(&mut rng, 1);
        defect = worse(defect, check_defect_algebra(&d, l, m)?);
        let (a, ab, v) = (square(&mut rng, 1.0), square(&mut rng, 1.0), disk(&mut rng, 0.5).exp());
        jacobi = worse(jacobi, jacobi_residual(a, ab, v));
        let (phi, pi) = (square(&mut rng, 1.0), square(&mut rng, 1.0));
        linear = worse(linear, check_linear_algebra(phi, pi, l, m)?);
    }
    checks_only(vec![
        Check::at_most("quadratic algebra for L", "lattice:quadratic-algebra", bulk, tol),
        Check::at_most(
            "quadratic algebra for the defect matrix",
            "defect:quadratic-algebra",
            defect,
            tol,
        ),
        Check::at_most("Jacobi identity of the site bracket", "lattice:jacobi", jacobi, tol),
        Check::at_most("linear algebra for U", "continuum:linear-algebra", linear, tol),
    ])
}

/// `max_j |L̇_j − (A_{j+1}L_j − L_jA_j)|` with the velocities negated.
fn flipped_eom_residual(s: &LatticeState, mu: C64) -> Result<f64, Error> {
    let vel = s.bulk_eom()?;
    let w = mu.exp();
    let mut worst: f64 = 0.0;
    for j in 1..=s.len() {
        let k = j - 1;
        let ldot = lax_velocity(s.v[k], -vel.a[k], -vel.a_bar[k], -vel.v[k], w);
        let l = s.lax_at(j as isize, w);
        let rhs = s.time_lax_a2(j as isize + 1, mu) * l - l * s.time_lax_a2(j as isize, mu);
        worst = worst.max(max_abs(&(ldot - rhs)));
    }
    Ok(worst)
}

fn verify_zero_curvature(r: &Resolved) -> Result<Outcome, Error> {
    let tol = &r.tolerances;
    let mut rng = rng_from_seed(r.seed);
    let (mut bulk, mut defect, mut flow, mut dflow) = (0.0, 0.0, 0.0, 0.0);
    let mut flipped = f64::INFINITY;
    for _ in 0..r.samples {
        let mu = square(&mut rng, 1.0);
        let s = random_state(&mut rng, r.n_sites);
        for j in 1..=r.n_sites {
            bulk = worse(bulk, s.zero_curvature_residual(j, mu)?);
        }
        let eom = s.bulk_eom()?;
        flow = worse(
            flow,
            eom.max_abs_diff(&s.bracket_flow(&s.i2_gradient())) / (1.0 + eom.max_abs()),
        );
        flipped = flipped.min(flipped_eom_residual(&s, mu)?);
        let dl = DefectedLattice::new(
            random_state(&mut rng, r.n_sites),
            random_defect(&mut rng, r.defect_site),
        )?;
        for j in 1..=r.n_sites {
            defect = worse(defect, dl.zero_curvature_residual(j, mu)?);
        }
        let eom = dl.eom()?;
        dflow = worse(
            dflow,
            eom.max_abs_diff(&dl.bracket_flow(&dl.i2_gradient())) / (1.0 + eom.max_abs()),
        );
    }
    let exact = SechSolution::default();
    let lam = cx(r.lambda);
    let continuum = |n: usize| {
        let h = 1.0 / n as f64;
        exact.sample(-0.5, h, n + 1, 0.0, h, n + 1).zero_curvature_residual(lam)
    };
    let (coarse, fine) = (continuum(20)?, continuum(40)?);
    checks_only(vec![
        Check::at_most(
            "bulk zero curvature",
            "lattice:zero-curvature",
            bulk,
            r.scaled(tol.algebraic),
        ),
        Check::at_most(
            "defect zero curvature",
            "defect:zero-curvature",
            defect,
            r.scaled(tol.algebraic),
        ),
        Check::at_most(
            "bulk equations of motion = bracket flow of I2",
            "lattice:hamiltonian-flow",
            flow,
            r.scaled(tol.series),
        ),
        Check::at_most(
            "defect equations of motion = bracket flow of I2",
            "defect:hamiltonian-flow",
            dflow,
            r.scaled(tol.series),
        ),
        Check::at_least(
            "negated equations of motion violate zero curvature",
            "lattice:zero-curvature-control",
            flipped,
            tol.detection_min,
        ),
        Check::at_least(
            "continuum zero curvature, refinement ratio on an exact solution",
            "continuum:zero-curvature",
            coarse / fine,
            tol.refinement_min,
        ),
    ])
}

fn lattice_columns(probes: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["t", "i0_re", "i0_im", "i2_re", "i2_im"].map(String::from).to_vec();
    for k in 0..probes {
        cols.push(format!("trace{k}_re"));
        cols.push(format!("trace{k}_im"));
    }
    cols.push("i2_residual".into());
    for k in 0..probes {
        cols.push(format!("trace{k}_residual"));
    }
    cols
}

fn lattice_series(samples: &[ConservedSample], probes: usize) -> Series {
    let mut out = Series::new(lattice_columns(probes));
    let Some(first) = samples.first() else {
        return out;
    };
    for s in samples {
        let mut row = vec![s.t, s.delta_i0.re, s.delta_i0.im, s.i2.re, s.i2.im];
        for z in &s.traces {
            row.extend([z.re, z.im]);
        }
        row.push((s.i2 - first.i2).norm());
        for (z, z0) in s.traces.iter().zip(&first.traces) {
            row.push((z - z0).norm());
        }
        out.push(row);
    }
    out
}

fn initial_lattice(r: &Resolved, rng: &mut SeededRng) -> LatticeState {
    match r.initial {
        InitialState::NearNeutral => near_neutral_state(rng, r.n_sites),
        InitialState::ZeroAmplitude => LatticeState::zero_amplitude(r.n_sites),
        InitialState::Random => random_state(rng, r.n_sites),
    }
}

fn initial_defect(r: &Resolved, rng: &mut SeededRng) -> DefectSite {
    match r.initial {
        InitialState::NearNeutral => near_neutral_defect(rng, r.defect_site),
        InitialState::ZeroAmplitude => DefectSite::transparent(r.defect_site),
        InitialState::Random => random_defect(rng, r.defect_site),
    }
}

fn lattice_sim(r: &Resolved, with_defect: bool) -> Result<Outcome, Error> {
    let tol = &r.tolerances;
    let mut rng = rng_from_seed(r.seed);
    let opts = IntegrationOptions {
        probes: r.probes.iter().map(|&p| cx(p)).collect(),
        record_every: 1,
    };
    let bulk = initial_lattice(r, &mut rng);
    let defected = if with_defect {
        Some(DefectedLattice::new(bulk.clone(), initial_defect(r, &mut rng))?)
    } else {
        None
    };
    let run = |dt: f64| -> Result<Run, Error> {
        Ok(match &defected {
            Some(dl) => {
                let t = dl.integrate(dt, r.t_end, &opts)?;
                Run {
                    series: t.series,
                    report: t.report,
                    abort: t.abort,
                }
            }
            None => {
                let t = bulk.integrate(dt, r.t_end, &opts)?;
                Run {
                    series: t.series,
                    report: t.report,
                    abort: t.abort,
                }
            }
        })
    };
    let coarse = run(r.dt)?;
    let mut out = Outcome {
        series: Some(lattice_series(&coarse.series, opts.probes.len())),
        ..Outcome::default()
    };
    if let Some(e) = coarse.abort {
        out.error = Some(format!("trajectory aborted: {e}"));
        return Ok(out);
    }
    let prefix = if with_defect { "defect" } else { "lattice" };
    let charge = if with_defect { "defect I2" } else { "I2" };
    if r.initial == InitialState::ZeroAmplitude {
        let rep = &coarse.report;
        out.checks.push(Check::at_most(
            format!("{charge} stays at its initial value"),
            format!("{prefix}:fixed-point:I2"),
            rep.i2_drift,
            r.scaled(tol.series),
        ));
        out.checks.push(Check::at_most(
            "I0 stays at its initial value",
            format!("{prefix}:fixed-point:I0"),
            rep.i0_drift,
            r.scaled(tol.series),
        ));
        for (k, d) in rep.trace_drift.iter().enumerate() {
            out.checks.push(Check::at_most(
                format!("tr T at probe {k} stays at its initial value"),
                format!("{prefix}:fixed-point:trace"),
                *d,
                r.scaled(tol.series),
            ));
        }
        return Ok(out);
    }
    let fine = run(r.dt / 2.0)?;
    if let Some(e) = fine.abort {
        out.error = Some(format!("trajectory aborted at dt/2: {e}"));
        return Ok(out);
    }
    let (a, b) = (&coarse.report, &fine.report);
    out.checks.push(Check::within(
        format!("{charge} drift ratio, dt vs dt/2"),
        format!("{prefix}:conservation:I2"),
        a.i2_drift / b.i2_drift,
        tol.order_min,
        tol.order_max,
    ));
    for (k, (x, y)) in a.trace_drift.iter().zip(&b.trace_drift).enumerate() {
        out.checks.push(Check::within(
            format!("tr T drift ratio at probe {k}, dt vs dt/2"),
            format!("{prefix}:conservation:trace"),
            x / y,
            tol.order_min,
            tol.order_max,
        ));
    }
    Ok(out)
}

/// A lattice trajectory without its recorded states.
struct Run {
    series: Vec<ConservedSample>,
    report: ConservationReport,
    abort: Option<Error>,
}

fn liouville_evolve(r: &Resolved) -> Result<Outcome, Error> {
    let tol = &r.tolerances;
    let l = r.half_length;
    let mut rng = rng_from_seed(r.seed);
    let zero = FieldConfig::zero(l, r.grid_points)?;
    let ch = zero.charges();
    let (_, ht) = zero.dual_charges();
    let q = r.scaled(tol.quadrature);
    let mut checks = vec![
        Check::at_most(
            "I1 = -L on the zero field (relative)",
            "continuum:zero-field:I1",
            rel(ch.i1, c64(-l, 0.0)),
            q,
        ),
        Check::at_most(
            "H = 4L on the zero field (relative)",
            "continuum:zero-field:H",
            rel(ch.hamiltonian, c64(4.0 * l, 0.0)),
            q,
        ),
        Check::at_most(
            "P = 0 on the zero field (relative to L)",
            "continuum:zero-field:P",
            ch.momentum.norm() / l,
            q,
        ),
        Check::at_most(
            "H_t = -4L on the zero field (relative)",
            "continuum:zero-field:Ht",
            rel(ht, c64(-4.0 * l, 0.0)),
            q,
        ),
    ];
    let (mut p_id, mut h_id) = (0.0, 0.0);
    for _ in 0..r.samples {
        let f = smooth_random_field(&mut rng, l, r.grid_points, 2, 0.4)?;
        let c = f.charges();
        p_id = worse(p_id, (c.momentum - MOMENTUM_RATIO * (c.i1_sym - c.i1)).norm());
        h_id = worse(h_id, (c.hamiltonian - HAMILTONIAN_RATIO * (c.i1_sym + c.i1)).norm());
    }
    checks.push(Check::at_most(
        "P = -2 (I1_sym - I1)",
        "continuum:momentum-ratio",
        p_id,
        r.scaled(tol.algebraic),
    ));
    checks.push(Check::at_most(
        "H = -2 (I1_sym + I1)",
        "continuum:hamiltonian-ratio",
        h_id,
        r.scaled(tol.algebraic),
    ));

    let base = smooth_random_field(&mut rng, l, r.grid_points, 2, 0.1)?;
    let start = FieldConfig::new(
        l,
        base.phi.iter().map(|p| p + std::f64::consts::FRAC_PI_2).collect(),
        base.pi.clone(),
    )?;
    let runs = [r.dt, r.dt / 2.0, r.dt / 4.0].map(|dt| evolve(&start, dt, r.t_end, 1));
    let [a, b, c] = runs;
    let (a, b, c) = (a?, b?, c?);
    let mut series = Series::new(["t", "h_re", "h_im", "p_re", "p_im", "i1_re", "i1_im", "h_residual"]);
    let h0 = start.semi_discrete_hamiltonian();
    for s in &a.series {
        series.push(vec![
            s.t,
            s.hamiltonian.re,
            s.hamiltonian.im,
            s.momentum.re,
            s.momentum.im,
            s.i1.re,
            s.i1.im,
            (s.hamiltonian - h0).norm(),
        ]);
    }
    let abort = [&a, &b, &c]
        .iter()
        .find_map(|t| t.abort.as_ref())
        .map(|e| format!("evolution aborted: {e}"));
    if abort.is_none() {
        checks.push(Check::within(
            "semi-discrete H drift ratio, dt vs dt/2",
            "continuum:conservation:H",
            a.report.hamiltonian_drift / b.report.hamiltonian_drift,
            tol.order_min,
            tol.order_max,
        ));
        checks.push(Check::at_least(
            "P self-convergence ratio over the run, dt/dt/2/dt/4",
            "continuum:convergence:P",
            momentum_gap(&a, &b) / momentum_gap(&b, &c),
            tol.order_min,
        ));
    }
    Ok(Outcome {
        checks,
        series: Some(series),
        error: abort,
    })
}

/// Largest `|P_coarse(t) − P_fine(t)|` over the common sample times of
/// two runs whose steps differ by a factor 2; both series start at `t = 0`.
fn momentum_gap(coarse: &FieldTrajectory, fine: &FieldTrajectory) -> f64 {
    coarse
        .series
        .iter()
        .zip(fine.series.iter().step_by(2))
        .map(|(x, y)| (x.momentum - y.momentum).norm())
        .fold(0.0, worse)
}

fn monodromy_check(r: &Resolved) -> Result<Outcome, Error> {
    let tol = r.tolerances.monodromy_fit;
    let l = r.half_length;
    let mut rng = rng_from_seed(r.seed);
    let mut series = Series::new(["sample", "i1_re", "i1_im", "fit_re", "fit_im", "relative_error"]);
    let (mut worst, mut lead) = (0.0, 0.0);
    for k in 0..r.samples {
        let f = smooth_random_field(&mut rng, l, r.grid_points, 2, 0.3)?;
        let fit = monodromy_fit(&f, FIT_WINDOW, FIT_POINTS, FIT_MAX_POWER)?;
        let i1 = f.charges().i1;
        let e = rel(fit.c1(), i1);
        worst = worse(worst, e);
        lead = worse(lead, rel(fit.c_minus1(), c64(2.0 * l, 0.0)));
        series.push(vec![k as f64, i1.re, i1.im, fit.c1().re, fit.c1().im, e]);
    }
    Ok(Outcome {
        checks: vec![
            Check::at_most("fitted c1 = I1 (relative)", "continuum:monodromy:I1", worst, tol),
            Check::at_most(
                "fitted 1/u coefficient = 2L (relative)",
                "continuum:monodromy:leading",
                lead,
                tol,
            ),
        ],
        series: Some(series),
        error: None,
    })
}

/// Smallest ratio between consecutive entries.
fn min_ratio(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[0] / w[1])
        .fold(f64::INFINITY, |acc, x| if x.is_nan() { f64::NAN } else { acc.min(x) })
}

fn bt_mode(r: &Resolved) -> Result<Outcome, Error> {
    let tol = &r.tolerances;
    let seed = SechSolution::default();
    let theta = cx(r.theta);
    let init = BtInitial {
        phi_tilde: seed.eval(-1.0, 0.0).phi + 0.3,
        y: c64(0.1, 0.05),
        z: c64(-0.2, 0.1),
    };
    let mut series = Series::new([
        "points",
        "h",
        "liouville_residual",
        "x_relation_error",
        "t_relation_residual",
        "x_relation_residual",
    ]);
    let (mut pde, mut xrel, mut trel) = (Vec::new(), Vec::new(), Vec::new());
    for &n in &r.refinements {
        let grid = BtGrid {
            x_min: -1.0,
            x_max: 1.0,
            nx: n,
            t_end: 1.0,
            nt: n,
        };
        let sol = bt_evolve(&seed, init, theta, grid)?;
        let res = sol.phi_tilde.liouville_residual()?;
        let xe = sol.x_relation_error(&seed);
        let (rt, rx) = sol.relation_residuals(&seed);
        series.push(vec![n as f64, grid.h(), res, xe, rt, rx]);
        pde.push(res);
        xrel.push(xe);
        trel.push(rt);
    }
    Ok(Outcome {
        checks: vec![
            Check::at_least(
                "Liouville residual of the generated field, refinement ratio",
                "auto-bt:liouville",
                min_ratio(&pde),
                tol.refinement_min,
            ),
            Check::at_least(
                "X = exp(i(phi~ - phi)/2), refinement ratio",
                "auto-bt:x-relation",
                min_ratio(&xrel),
                tol.refinement_min,
            ),
            Check::at_least(
                "time relations of (Y, Z), refinement ratio",
                "auto-bt:yz-relations",
                min_ratio(&trel),
                tol.refinement_min,
            ),
        ],
        series: Some(series),
        error: None,
    })
}

fn hetero_mode(r: &Resolved) -> Result<Outcome, Error> {
    let tol = &r.tolerances;
    let params = HeteroParams::new(cx(r.hetero_c), cx(r.hetero_theta))?;
    let free = Harmonic::default();
    let phi0 = c64(0.1, 0.0);
    let lam = cx(r.lambda);
    let mut series = Series::new(["points", "h", "em1_residual", "sigma_residual", "tau_residual"]);
    let (mut em1, mut sig, mut tau) = (Vec::new(), Vec::new(), Vec::new());
    let mut finest = None;
    for &n in &r.refinements {
        let sol = hetero_bt_generate(&free, params, phi0, n, 1.0)?;
        let e = sol.em1_residual(params);
        let (s, t) = sol.lightcone_residuals(&free, params);
        series.push(vec![n as f64, sol.h, e, s, t]);
        em1.push(e);
        sig.push(s);
        tau.push(t);
        finest = Some(sol);
    }
    let sol = finest.expect("at least two refinements");
    let n = sol.n();
    let zero = hetero_bt_generate(&ZeroField, params, phi0, n, 1.0)?;
    let mut closed: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = zero_field_closed_form(params, phi0, i as f64 * zero.h, j as f64 * zero.h);
            closed = worse(closed, ((-I * zero.values[i][j]).exp() - want).norm());
        }
    }
    let ranked = select_variant(&sol, &free, params, lam);
    let pair = interface_residual(&sol, &free, params, lam, DarbouxVariant::SELECTED);
    let other = Harmonic { shift: 1.0, ..free };
    let wrong = hetero_bt_generate(&other, params, phi0, n, 1.0)?;
    let non_pair = interface_residual(&wrong, &free, params, lam, DarbouxVariant::SELECTED);
    let selected_first = if ranked[0].0 == DarbouxVariant::SELECTED {
        ranked[1].1 / ranked[0].1
    } else {
        0.0
    };
    Ok(Outcome {
        checks: vec![
            Check::at_least(
                "modified Liouville residual, refinement ratio",
                "hetero-bt:pde",
                min_ratio(&em1),
                tol.refinement_min,
            ),
            Check::at_least(
                "sigma relation, refinement ratio",
                "hetero-bt:sigma-relation",
                min_ratio(&sig),
                tol.refinement_min,
            ),
            Check::at_least(
                "tau relation, refinement ratio",
                "hetero-bt:tau-relation",
                min_ratio(&tau),
                tol.refinement_min,
            ),
            Check::at_most(
                "zero free field vs closed form",
                "hetero-bt:closed-form",
                closed,
                r.scaled(tol.closed_form),
            ),
            Check::at_least(
                "interface residual, non-pair / pair",
                "hetero-bt:interface",
                non_pair / pair,
                tol.discrimination_min,
            ),
            Check::at_least(
                "selected Darboux variant ranks first, runner-up / best",
                "hetero-bt:variant",
                selected_first,
                tol.discrimination_min,
            ),
        ],
        series: Some(series),
        error: None,
    })
}
