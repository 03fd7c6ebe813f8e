//! Acceptance suite: one PASS/FAIL line per criterion, with timings.
//!
//! Runs as a plain binary (`harness = false`). The process fails if any criterion fails,
//! except those listed in `KNOWN_DEVIATIONS`, which still print FAIL together with the
//! reason.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pawlab::clockwork::{build_spectrum, complement_family};
use pawlab::gravity::{self, ClockPairConfig, PotentialModel};
use pawlab::hilbert::{c, max_abs, random_hermitian_with_spectrum, random_unitary, Operator, C64};
use pawlab::multitime::{
    direct_two_time, glm_two_time, gppt_two_time, spacetime_two_time, ExternalAverage, MemoryLayout, OutcomeBasis,
    PositionPoints, SpacetimeEvent, TwoTimeQuery,
};
use pawlab::paw::interaction::{gravitational_exact_rhs, gravitational_first_order_rhs, gravitational_universe};
use pawlab::paw::wootters::{agreement, agreement_closed_form, agreement_limit, Spin};
use pawlab::paw::{build_universe, ClockBudget};
use pawlab::spacetime::{free_particle_universe, Readout};
use pawlab::typicality::{
    oscillator_amplitude, oscillator_x_double_sum, oscillator_x_expectation, oscillator_x_first_order,
    proportional_counts, reduced_vs_canonical, sample_shell_state, temporal_trace, temporal_trace_quadrature,
    ShellModel,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose failure is understood and recorded; they do not fail the run.
const KNOWN_DEVIATIONS: &[(usize, &str)] = &[(
    10,
    "the reference second-tick expansion for d=3 uses coefficient (5/36)(4pi/3)^2 = 2.437; \
     the exact mean gives 8pi^2/9 = 8.773, a 6.3e-6 relative gap at depth 1e-3",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "time-state identity resolution", budget: secs(1.0), run: identity_resolutions },
        Criterion { id: 2, name: "emergent Schrodinger evolution", budget: secs(5.0), run: emergent_schrodinger },
        Criterion { id: 3, name: "two-spin agreement", budget: secs(10.0), run: wootters_agreement },
        Criterion { id: 4, name: "two-time propagators", budget: secs(5.0), run: two_time_propagators },
        Criterion { id: 5, name: "temporal trace equals partial trace", budget: secs(5.0), run: temporal_trace_check },
        Criterion { id: 6, name: "canonical typicality", budget: secs(30.0), run: canonical_typicality },
        Criterion { id: 7, name: "oscillator toy", budget: secs(2.0), run: oscillator_toy },
        Criterion { id: 8, name: "spacetime toy probability", budget: secs(2.0), run: spacetime_toy },
        Criterion { id: 9, name: "gravitational dilation", budget: secs(1.0), run: gravitational_dilation },
        Criterion { id: 10, name: "clock-pair conditional statistics", budget: secs(1.0), run: clock_pair_stats },
        Criterion { id: 11, name: "gravitational interaction kernel", budget: secs(5.0), run: interaction_kernel },
    ];
    let mut unexpected = 0;
    for cr in &criteria {
        let start = Instant::now();
        let out = (cr.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= cr.budget;
        let pass = out.pass && in_time;
        let timing = format!("{:.3}s of {:.0}s", elapsed.as_secs_f64(), cr.budget.as_secs_f64());
        let known = KNOWN_DEVIATIONS.iter().find(|(id, _)| *id == cr.id);
        let status = if pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {:<40} {status}  [{timing}] {}", cr.id, cr.name, out.detail);
        if !pass {
            match known {
                Some((_, why)) if in_time => println!("             known deviation: {why}"),
                _ => unexpected += 1,
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn secs(s: f64) -> Duration {
    Duration::from_secs_f64(s)
}

fn normalize(v: Vec<C64>) -> Vec<C64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    normalize((0..n).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn identity_resolutions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let d = rng.gen_range(2..=8);
        let mut pool: Vec<u64> = (1..=24).collect();
        pool.shuffle(&mut rng);
        let mut labels: Vec<u64> = pool[..d - 1].to_vec();
        labels.sort_unstable();
        let base = labels[0];
        let ratios: Vec<(u64, u64)> = labels
            .iter()
            .map(|&r| {
                let g = gcd(r, base);
                (r / g, base / g)
            })
            .collect();
        let spec = build_spectrum(-0.7, &ratios, 1.3, None, 1.0).expect("valid ratios");
        let r_max = spec.r_max() as usize;
        let count = rng.gen_range(r_max + 1..=(2 * r_max).max(r_max + 1));
        let fam = complement_family(&spec, count, rng.gen::<f64>() * 3.0).expect("enough states");
        worst = worst.max(fam.identity_defect());
    }
    outcome(worst <= 1e-12, format!("50 spectra, max defect {worst:.2e} (tol 1e-12)"))
}

fn emergent_schrodinger() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut povm = 0;
    for _ in 0..25 {
        let ds = rng.gen_range(1..=4);
        let period = 1.0 + 4.0 * rng.gen::<f64>();
        let q = 2.0 * PI / period;
        let mut pool: Vec<u64> = (0..12).collect();
        pool.shuffle(&mut rng);
        let levels: Vec<f64> = pool[..ds].iter().map(|&k| k as f64 * q).collect();
        let h = random_hermitian_with_spectrum(&mut rng, &levels);
        let coeffs = random_coeffs(&mut rng, ds);
        let dim = ds + rng.gen_range(1..=4);
        let u = build_universe(&h, &coeffs, ClockBudget { dim, period, hbar: 1.0 }).expect("representable");
        if !u.clock().is_equally_spaced() {
            povm += 1;
        }
        let t0 = rng.gen::<f64>() * period;
        for _ in 0..100 {
            let t = t0 + (rng.gen::<f64>() - 0.5) * 4.0 * period;
            worst = worst.max(u.verify_schrodinger(t0, t).expect("dims"));
        }
    }
    outcome(
        worst <= 1e-10 && povm > 0,
        format!("25 universes ({povm} with POVM clocks), max deviation {worst:.2e} (tol 1e-10)"),
    )
}

fn wootters_agreement() -> Outcome {
    let half = (agreement(Spin::new(1)) - 1.0).abs();
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    let mut closed_gap: f64 = 0.0;
    let mut last = 0.0;
    for twice in 1..=100 {
        let p = agreement(Spin::new(twice));
        closed_gap = closed_gap.max((p - agreement_closed_form(Spin::new(twice))).abs());
        monotone &= p < prev;
        prev = p;
        last = p;
    }
    let gap = (last - agreement_limit()).abs();
    outcome(
        half <= 1e-12 && monotone && gap <= 0.01,
        format!(
            "spin 1/2 |P-1| = {half:.1e}, monotone = {monotone}, P(s=50) = {last:.5} vs {:.5} (gap {gap:.4}), \
             explicit vs closed form {closed_gap:.1e}",
            agreement_limit()
        ),
    )
}

fn two_time_propagators() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let ds = rng.gen_range(2..=4);
        let dc = ds + rng.gen_range(1..=2);
        let period = 1.0 + 3.0 * rng.gen::<f64>();
        let q = 2.0 * PI / period;
        let mut pool: Vec<u64> = (0..dc as u64).collect();
        pool.shuffle(&mut rng);
        let levels: Vec<f64> = pool[..ds].iter().map(|&k| k as f64 * q).collect();
        let h = random_hermitian_with_spectrum(&mut rng, &levels);
        let coeffs = random_coeffs(&mut rng, ds);
        let u = build_universe(&h, &coeffs, ClockBudget { dim: dc, period, hbar: 1.0 }).expect("representable");
        let first = OutcomeBasis::from_columns(&random_unitary(&mut rng, ds)).expect("unitary");
        let second = OutcomeBasis::from_columns(&random_unitary(&mut rng, ds)).expect("unitary");
        let step = period / dc as f64;
        let m1 = rng.gen_range(0..dc);
        let m2 = rng.gen_range(m1..dc);
        let query = TwoTimeQuery {
            t1: m1 as f64 * step,
            t2: m2 as f64 * step,
            first,
            a: rng.gen_range(0..ds),
            second,
            b: rng.gen_range(0..ds),
        };
        let direct = direct_two_time(&u, &query).expect("query");
        let gppt = gppt_two_time(&u, &query, ExternalAverage::default()).expect("query");
        let glm = glm_two_time(&u, &query, MemoryLayout::minimal(ds)).expect("query");
        worst = worst.max((gppt - direct).abs()).max((glm - direct).abs());
    }

    // spacetime variant against its closed form
    let mut st_worst: f64 = 0.0;
    let coeffs = random_coeffs(&mut rng, 5);
    let su = free_particle_universe(&[5], 3.0, 9.0, 1.5, &coeffs).expect("universe");
    let pts = PositionPoints { frame: 7, system: 6 };
    let axis = su.axes()[0];
    for _ in 0..50 {
        let t1 = rng.gen::<f64>() * 4.0;
        let t2 = t1 + rng.gen::<f64>() * 4.0;
        let e1 = SpacetimeEvent { t: t1, x: vec![rng.gen_range(0..7)], y: vec![rng.gen_range(0..6)] };
        let e2 = SpacetimeEvent { t: t2, x: vec![rng.gen_range(0..7)], y: vec![rng.gen_range(0..6)] };
        let dist = |ev: &SpacetimeEvent| {
            ev.y[0] as f64 * axis.system.length() / 6.0 - ev.x[0] as f64 * axis.frame.length() / 7.0
        };
        let (di, df) = (dist(&e1), dist(&e2));
        let mut acc = c(0.0, 0.0);
        for (k, mode) in su.modes().iter().enumerate() {
            acc += pawlab::hilbert::cis(-mode.epsilon * (t2 - t1) + mode.momentum[0] * (df - di));
            debug_assert!((mode.epsilon - su.clock_epsilon(k)).abs() < 1e-9);
        }
        let expect = acc.norm_sqr() / (25.0 * 25.0);
        let got = spacetime_two_time(&su, pts, &e1, &e2).expect("query");
        st_worst = st_worst.max((got - expect).abs());
    }
    outcome(
        worst <= 1e-10 && st_worst <= 1e-10,
        format!("50 queries, GPPT/GLM max deviation {worst:.2e}; spacetime 50 queries {st_worst:.2e} (tol 1e-10)"),
    )
}

fn temporal_trace_check() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let counts = [20 + (seed as usize * 7) % 40, 10 + (seed as usize * 3) % 20];
        let model = ShellModel::lattice(&[0.0, 1.0], 10.0, 1.0 / 128.0, &counts).expect("lattice");
        let sample = sample_shell_state(&model, seed);
        let rho = sample.global_state().reduced_density(&[1]).expect("dims");
        let exact = temporal_trace(&sample);
        let quad = temporal_trace_quadrature(&sample, model.env().r_max() as usize + 1).expect("nodes");
        worst = worst.max(max_abs(&(exact.matrix() - rho.matrix())));
        worst = worst.max(max_abs(&(quad.matrix() - rho.matrix())));
    }
    outcome(worst <= 1e-12, format!("20 samples, max entry deviation {worst:.2e} (tol 1e-12)"))
}

fn median_trace_distance(total: usize, beta: f64) -> f64 {
    let levels = [0.0, 1.0, 2.0];
    let counts = proportional_counts(&levels, beta, total);
    let model = ShellModel::lattice(&levels, 10.0, 1.0 / 1024.0, &counts).expect("lattice");
    let mut d: Vec<f64> = (0..50u64).map(|seed| reduced_vs_canonical(&sample_shell_state(&model, seed), beta).trace_dist).collect();
    d.sort_by(f64::total_cmp);
    0.5 * (d[24] + d[25])
}

fn canonical_typicality() -> Outcome {
    let beta = 2f64.ln();
    let small = median_trace_distance(512, beta);
    let large = median_trace_distance(1024, beta);
    outcome(
        small <= 0.1 && large < small,
        format!("median trace distance {small:.4} at 512, {large:.4} at 1024 (tol 0.1, decreasing)"),
    )
}

fn oscillator_toy() -> Outcome {
    let (mass, omega) = (1.5, 1.0);
    let mut full: f64 = 0.0;
    let mut first: f64 = 0.0;
    for seed in 0..10u64 {
        let model = ShellModel::lattice(&[0.0, omega], 10.0, 1.0 / 1024.0, &[50, 30]).expect("lattice");
        let s = sample_shell_state(&model, 100 + seed);
        let amp = oscillator_amplitude(&s, mass, omega).expect("two-level");
        let delta = model.shell().delta;
        for i in 0..40 {
            let t = i as f64 * 25.0;
            let a = oscillator_x_expectation(&s, mass, omega, t).expect("two-level");
            let b = oscillator_x_double_sum(&s, mass, omega, t).expect("two-level");
            full = full.max((a - b).abs());
        }
        for i in 0..=20 {
            let t = 0.01 / delta * i as f64 / 20.0;
            let a = oscillator_x_expectation(&s, mass, omega, t).expect("two-level");
            let f = oscillator_x_first_order(&s, mass, omega, t).expect("two-level");
            first = first.max((a - f).abs() / amp);
        }
    }
    outcome(
        full <= 1e-12 && first <= 1e-3,
        format!("full form deviation {full:.2e} (tol 1e-12), first-order relative {first:.2e} (tol 1e-3)"),
    )
}

fn spacetime_toy() -> Outcome {
    let (len, big, small) = (2.0, 50.0, 1.0);
    let (c0, c1, c2) = (0.6, 0.64, 0.48);
    let su = free_particle_universe(&[3], len, big, small, &[c(c0, 0.0), c(c1, 0.0), c(c2, 0.0)]).expect("universe");
    let eps = (2.0 * PI / len).powi(2) * (0.5 / big + 0.5 / small);
    let closed = |t: f64, dist: f64, w0: f64, w1: f64| {
        let k = 2.0 * PI * dist / len;
        w0 + w1 * c0 * c1 * (eps * t + k).cos()
            + w1 * c1 * c2 * (eps * t - k).cos()
            + w1 * c0 * c2 * (1.0 - 2.0 * k.sin().powi(2))
    };
    let period = 2.0 * PI / eps;
    let mut worst: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for i in 0..64 {
        let t = period * i as f64 / 64.0;
        for j in 0..64 {
            let dist = len * j as f64 / 64.0;
            let x = 0.25 * len * (j % 4) as f64 / 4.0;
            let y = x + dist;
            let (x, y) = if y > len { (x - (y - len), len) } else { (x, y) };
            let p = su.joint_conditional_probability(t, &[x], &[y], Readout::Continuous).expect("query");
            worst = worst.max((p - closed(t, y - x, 1.0 / len, 2.0 / len)).abs());
        }
        for x in 0..3 {
            let xv = x as f64 * len / 3.0;
            norm = norm.max((su.density_normalization(t, &[xv], 8).expect("query") - 1.0).abs());
            let ro = Readout::Discrete { frame_points: 3, system_points: 3 };
            let mut total = 0.0;
            for y in 0..3 {
                let yv = y as f64 * len / 3.0;
                let p = su.joint_conditional_probability(t, &[xv], &[yv], ro).expect("query");
                worst = worst.max((p - closed(t, yv - xv, 1.0 / 3.0, 2.0 / 3.0)).abs());
                total += p;
            }
            norm = norm.max((total - 1.0).abs());
        }
    }
    outcome(
        worst <= 1e-12 && norm <= 1e-10,
        format!("64x64 grid max deviation {worst:.2e} (tol 1e-12), normalization {norm:.2e} (tol 1e-10)"),
    )
}

fn gravitational_dilation() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();

    let far = ClockPairConfig::from_depth(8, 1.0, 0.25, None, PotentialModel::Newtonian);
    let t = far.time_of_tick_a(4.0).expect("config");
    let pair = gravity::evolve_clock_pair(&far, t).expect("config");
    let r = gravity::ticks_from_state(&pair.b) / gravity::ticks_from_state(&pair.a);
    let e1 = (r - 0.75).abs();
    ok &= e1 <= 1e-12;
    notes.push(format!("far ratio err {e1:.1e}"));

    let mut e2: f64 = 0.0;
    for (u, h) in [(1e-3, 0.5), (0.1, 2.0), (0.3, 0.01)] {
        let cfg = ClockPairConfig::from_depth(6, 1.0, u, Some(h), PotentialModel::Newtonian);
        let t = cfg.time_of_tick_a(3.0).expect("config");
        let pair = gravity::evolve_clock_pair(&cfg, t).expect("config");
        let r = gravity::ticks_from_state(&pair.b) / gravity::ticks_from_state(&pair.a);
        e2 = e2.max((r - (1.0 - u) / (1.0 - u / (1.0 + h))).abs());
    }
    ok &= e2 <= 1e-12;
    notes.push(format!("finite pair err {e2:.1e}"));

    let rel = ClockPairConfig::from_depth(8, 1.0, 0.2, None, PotentialModel::Relativistic);
    let t = rel.time_of_tick_a(5.0).expect("config");
    let pair = gravity::evolve_clock_pair(&rel, t).expect("config");
    let r = gravity::ticks_from_state(&pair.b) / gravity::ticks_from_state(&pair.a);
    let e3 = (r - 0.6f64.sqrt()).abs();
    ok &= e3 <= 1e-12;
    notes.push(format!("relativistic err {e3:.1e}"));

    let mut worst_ratio: f64 = 0.0;
    for i in 0..=40 {
        let u = 10f64.powf(-6.0 + 4.0 * i as f64 / 40.0);
        let a = gravity::factor_from_depth(PotentialModel::Relativistic, u).expect("depth");
        let b = gravity::factor_from_depth(PotentialModel::Newtonian, u).expect("depth");
        worst_ratio = worst_ratio.max((a - b).abs() / (u * u));
    }
    ok &= worst_ratio <= 1.0;
    notes.push(format!("max |rel-newt|/depth^2 {worst_ratio:.3}"));

    let cfg = ClockPairConfig::from_depth(4, 1.0, 1e-6, Some(1e-3), PotentialModel::Newtonian);
    let z = gravity::redshift(&cfg).expect("finite height");
    let rz = ((z.exact - z.first_order) / z.first_order).abs();
    ok &= rz <= 1e-3 && z.exact < 0.0;
    notes.push(format!("redshift rel err {rz:.2e}"));
    outcome(ok, notes.join(", "))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * b.abs() + 1e-14
}

fn clock_pair_stats() -> Outcome {
    let u = 1e-3;
    let r3 = 3f64.sqrt();
    let mut failed: Vec<String> = Vec::new();
    let mut checks = 0;
    let mut check = |name: String, got: f64, want: f64| {
        checks += 1;
        if !close(got, want) {
            failed.push(format!("{name}: {got:.12} vs {want:.12}"));
        }
    };

    let cfg2 = ClockPairConfig::from_depth(2, 1.0, u, None, PotentialModel::Newtonian);
    let tb = 1.0 / (1.0 - u);
    for m in 0..2 {
        let mf = m as f64;
        for l in 0..2 {
            let want = 0.5 * (1.0 + (PI * (l as f64 - mf * (1.0 - u))).cos());
            check(format!("d2 P({l}|{m})"), gravity::discrete_conditional(&cfg2, l, m).unwrap(), want);
        }
        let approx = 1.0 - mf * mf * PI * PI / 4.0 * u * u;
        check(format!("d2 P({m}|{m}) expansion"), gravity::discrete_conditional(&cfg2, m, m).unwrap(), approx);
        let mean = tb / 4.0 * (1.0 - (mf * PI * (1.0 - u)).cos());
        check(format!("d2 mean({m})"), gravity::discrete_mean(&cfg2, m).unwrap(), mean);
    }
    check("d2 mean(1) expansion".into(), gravity::discrete_mean(&cfg2, 1).unwrap(), tb / 2.0 * (1.0 - PI * PI / 4.0 * u * u));

    let cfg3 = ClockPairConfig::from_depth(3, 1.0, u, None, PotentialModel::Newtonian);
    for m in 0..3 {
        let mf = m as f64;
        for l in 0..3 {
            let x = l as f64 - mf * (1.0 - u);
            let want = (3.0 + 4.0 * (2.0 * PI / 3.0 * x).cos() + 2.0 * (4.0 * PI / 3.0 * x).cos()) / 9.0;
            check(format!("d3 P({l}|{m})"), gravity::discrete_conditional(&cfg3, l, m).unwrap(), want);
        }
        let approx = 1.0 - 8.0 * PI * PI * mf * mf / 27.0 * u * u;
        check(format!("d3 P({m}|{m}) expansion"), gravity::discrete_conditional(&cfg3, m, m).unwrap(), approx);
        let a = 2.0 * PI * mf / 3.0 * (1.0 - u);
        let mean = tb / 27.0 * (9.0 - 6.0 * a.cos() - 2.0 * r3 * a.sin() - 3.0 * (2.0 * a).cos() + r3 * (2.0 * a).sin());
        check(format!("d3 mean({m})"), gravity::discrete_mean(&cfg3, m).unwrap(), mean);
    }
    let th1 = tb / 3.0;
    let th2 = 2.0 * tb / 3.0;
    check("d3 mean(0) expansion".into(), gravity::discrete_mean(&cfg3, 0).unwrap(), 0.0);
    check(
        "d3 mean(1) expansion".into(),
        gravity::discrete_mean(&cfg3, 1).unwrap(),
        th1 * (1.0 - 10.0 * r3 / 27.0 * (2.0 * PI / 3.0 * u).powi(3)),
    );
    check(
        "d3 mean(2) expansion".into(),
        gravity::discrete_mean(&cfg3, 2).unwrap(),
        th2 * (1.0 - 5.0 / 36.0 * (4.0 * PI / 3.0 * u).powi(2)),
    );

    for f in [0.0, 0.25, 0.6, 0.9] {
        let peak = 2.0 / tb * (1.0 - PI * PI * f * f * u * u);
        check(format!("continuous peak f={f}"), gravity::continuous_density(&cfg2, f, f).unwrap(), peak);
        let mean = tb / 2.0 * (1.0 - (2.0 * PI * f * (1.0 - u)).sin() / PI);
        check(format!("continuous mean f={f}"), gravity::continuous_mean(&cfg2, f).unwrap(), mean);
        let norm = gravity::continuous_normalization(&cfg3, f, 1024).unwrap();
        check(format!("continuous normalization f={f}"), norm, 1.0);
    }

    let detail = if failed.is_empty() {
        format!("{checks} closed-form checks within 1e-6 relative at depth 1e-3")
    } else {
        format!("{} of {checks} checks off: {}", failed.len(), failed.join("; "))
    };
    outcome(failed.is_empty(), detail)
}

fn interaction_kernel() -> Outcome {
    let g = 1e-5;
    let coeffs = normalize(vec![c(1.0, 0.0); 5]);
    let u = gravitational_universe(&[-3, -1, 0, 2, 5], &coeffs, g).expect("universe");
    let levels: Vec<f64> = (0..5).map(|k| u.system_h().entry(k, k).re).collect();
    let (mut first, mut exact, mut quad): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..8 {
        let t = i as f64 * 0.8;
        let phi = u.relative_state(t);
        let rhs = u.interaction_rhs(t, 2048);
        first = first.max(rhs.value.distance(&gravitational_first_order_rhs(u.system_h(), g, &phi)).unwrap());
        exact = exact.max(rhs.value.distance(&gravitational_exact_rhs(&levels, g, &phi)).unwrap());
        quad = quad.max(rhs.quadrature_error);
    }
    let bare: &Operator = u.system_h();
    let shift = g * bare.matrix().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    outcome(
        first <= 1e-6 && quad <= 1e-6,
        format!(
            "first-order correction deviation {first:.2e}, exact {exact:.2e}, quadrature {quad:.2e} (tol 1e-6; \
             correction size {shift:.1e})"
        ),
    )
}
