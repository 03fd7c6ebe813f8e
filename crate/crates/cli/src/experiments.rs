//! Named experiments. Each declares its parameters and produces tables plus checks.

use std::f64::consts::PI;

use pawlab::clockwork::{build_spectrum, complement_family};
use pawlab::gravity::{self, ClockPairConfig, PotentialModel};
use pawlab::hilbert::{c, random_hermitian_with_spectrum, random_state, random_unitary, C64};
use pawlab::multitime::{
    direct_two_time, glm_two_time, gppt_two_time, ExternalAverage, MemoryLayout, OutcomeBasis, TwoTimeQuery,
};
use pawlab::paw::wootters::{agreement, agreement_closed_form, agreement_limit, Spin};
use pawlab::paw::{build_universe, ClockBudget};
use pawlab::spacetime::{free_particle_universe, Readout};
use pawlab::typicality::{
    oscillator_x_double_sum, oscillator_x_expectation, oscillator_x_first_order, proportional_counts,
    reduced_vs_canonical, sample_shell_state, ShellModel,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ParamSpec, Params};
use crate::output::{Check, Report, Table};
use crate::CliError;

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    pub params: &'static [ParamSpec],
    pub run: fn(&Params, u64) -> Result<Report, CliError>,
}

macro_rules! p {
    ($name:literal, $default:literal, $help:literal) => {
        ParamSpec { name: $name, default: $default, help: $help }
    };
}

pub const REGISTRY: &[Experiment] = &[
    Experiment {
        name: "clock-identity",
        about: "identity defect of the time-state family for a rational spectrum",
        params: &[
            p!("d", "3", "number of clock levels"),
            p!("ratios", "[1/1,3/1]", "excited-level ratios (E_i - E_0)/unit"),
            p!("D", "0", "number of time states; 0 means r_max + 1"),
            p!("D_max", "0", "sweep up to this many states; 0 means a single row"),
            p!("t0", "0", "time origin of the family (s)"),
        ],
        run: clock_identity,
    },
    Experiment {
        name: "paw-evolve",
        about: "deviation of the conditioned state from unitary evolution",
        params: &[
            p!("ds", "3", "system dimension"),
            p!("clock_dim", "0", "clock dimension; 0 means 2*ds"),
            p!("period", "1", "clock period (s)"),
            p!("max_label", "8", "system levels are drawn from 0..=max_label in units of 2*pi/period"),
            p!("steps", "40", "number of sampled times"),
            p!("span", "2", "sampled interval in periods"),
        ],
        run: paw_evolve,
    },
    Experiment {
        name: "wootters-spins",
        about: "agreement probability of two spins versus spin size",
        params: &[p!("s_max", "10", "largest spin (half-integer, at most 100)")],
        run: wootters_spins,
    },
    Experiment {
        name: "two-time",
        about: "two-time conditional probabilities against the direct propagator",
        params: &[
            p!("queries", "20", "number of random queries"),
            p!("ds", "3", "system dimension"),
            p!("period", "2", "clock period (s)"),
        ],
        run: two_time,
    },
    Experiment {
        name: "typicality",
        about: "trace distance to the canonical state and the oscillator position trace",
        params: &[
            p!("sizes", "[128,256,512,1024]", "environment sizes inside the shell"),
            p!("levels", "[0,1,2]", "system energy levels"),
            p!("beta", "0.6931471805599453", "inverse temperature"),
            p!("spacing", "0.0009765625", "environment level spacing"),
            p!("seeds", "20", "samples per size"),
            p!("mass", "1.5", "oscillator mass (kg)"),
            p!("omega", "1", "oscillator angular frequency (1/s)"),
            p!("counts", "[50,30]", "environment states per oscillator level"),
            p!("steps", "41", "number of sampled times"),
            p!("t_max", "0", "last sampled time (s); 0 means 0.01/shell width"),
        ],
        run: typicality,
    },
    Experiment {
        name: "spacetime-toy",
        about: "conditional position probability over time and separation for three modes",
        params: &[
            p!("length", "2", "periodic box length (m)"),
            p!("frame_mass", "50", "reference particle mass (kg)"),
            p!("system_mass", "1", "system particle mass (kg)"),
            p!("c0", "0.6", "amplitude of the lowest momentum mode"),
            p!("c1", "0.64", "amplitude of the zero momentum mode"),
            p!("c2", "0.48", "amplitude of the highest momentum mode"),
            p!("nt", "64", "time samples over one clock period"),
            p!("nd", "64", "separation samples over one box length"),
        ],
        run: spacetime_toy,
    },
    Experiment {
        name: "gravity",
        about: "tick ratio, redshift and conditional tick statistics of two clocks in a potential",
        params: &[
            p!("mode", "far", "far, pair or relativistic"),
            p!("depth", "0.25", "potential depth GM/(x c^2) at the lower clock"),
            p!("height", "1", "upper clock height over x, used by mode=pair"),
            p!("d", "8", "clock dimension"),
            p!("period", "1", "clock period (s)"),
            p!("tick", "4", "lower-clock tick at which the pair is read"),
            p!("given", "1", "lower-clock tick m for the conditional distribution"),
        ],
        run: gravity_run,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

fn lib<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(format!("parameters rejected: {e}"))
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<C64>, CliError> {
    let psi = random_state(rng, vec![n]).map_err(lib)?;
    Ok((0..n).map(|k| psi.amplitude(k)).collect())
}

fn clock_identity(p: &Params, _seed: u64) -> Result<Report, CliError> {
    let d = p.usize("d")?;
    let ratios = p.ratio_list("ratios")?;
    if ratios.len() + 1 != d {
        return Err(CliError::Config(format!("d = {d} needs {} ratios, got {}", d.saturating_sub(1), ratios.len())));
    }
    let spec = build_spectrum(0.0, &ratios, 1.0, None, 1.0).map_err(lib)?;
    let r_max = spec.r_max() as usize;
    let first = match p.usize("D")? {
        0 => r_max + 1,
        n => n,
    };
    let last = match p.usize("D_max")? {
        0 => first,
        n => n,
    };
    if last < first {
        return Err(CliError::Config(format!("D_max = {last} is below D = {first}")));
    }
    let t0 = p.f64("t0")?;
    let mut table = Table::new(
        "identity",
        &[("d", "-"), ("D", "-"), ("r_max", "-"), ("period", "seconds"), ("identity_defect", "dimensionless")],
    );
    let mut worst: f64 = 0.0;
    for count in first..=last {
        let fam = complement_family(&spec, count, t0).map_err(lib)?;
        let defect = fam.identity_defect();
        worst = worst.max(defect);
        table.push(vec![d.into(), count.into(), r_max.into(), spec.period().into(), defect.into()]);
    }
    Ok(Report { tables: vec![table], checks: vec![Check::at_most("max identity defect", worst, 1e-12)] })
}

fn paw_evolve(p: &Params, seed: u64) -> Result<Report, CliError> {
    let ds = p.usize("ds")?;
    let dim = match p.usize("clock_dim")? {
        0 => 2 * ds,
        n => n,
    };
    let period = p.positive("period")?;
    let max_label = p.usize("max_label")?;
    let steps = p.usize("steps")?.max(1);
    let span = p.positive("span")?;
    if ds == 0 || max_label + 1 < ds {
        return Err(CliError::Config(format!("need 1 <= ds <= max_label + 1, got ds = {ds}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..=max_label).collect();
    pool.shuffle(&mut rng);
    let q = 2.0 * PI / period;
    let levels: Vec<f64> = pool[..ds].iter().map(|&k| k as f64 * q).collect();
    let h = random_hermitian_with_spectrum(&mut rng, &levels);
    let coeffs = random_coeffs(&mut rng, ds)?;
    let u = build_universe(&h, &coeffs, ClockBudget { dim, period, hbar: 1.0 }).map_err(lib)?;

    let mut clock = Table::new(
        "clock",
        &[("clock_dim", "-"), ("r_max", "-"), ("equally_spaced", "-"), ("constraint_residual", "dimensionless")],
    );
    let residual = u.constraint_residual();
    clock.push(vec![
        u.clock().dim().into(),
        (u.clock().r_max() as usize).into(),
        u.clock().is_equally_spaced().into(),
        residual.into(),
    ]);
    let mut trace = Table::new("evolution", &[("t", "seconds"), ("schrodinger_deviation", "dimensionless")]);
    let mut worst: f64 = 0.0;
    for i in 0..steps {
        let t = span * period * i as f64 / steps as f64;
        let dev = u.verify_schrodinger(0.0, t).map_err(lib)?;
        worst = worst.max(dev);
        trace.push(vec![t.into(), dev.into()]);
    }
    Ok(Report {
        tables: vec![clock, trace],
        checks: vec![
            Check::at_most("constraint residual", residual, 1e-10),
            Check::at_most("max schrodinger deviation", worst, 1e-10),
        ],
    })
}

fn wootters_spins(p: &Params, _seed: u64) -> Result<Report, CliError> {
    let s_max = p.positive("s_max")?;
    let twice_max = (2.0 * s_max).round();
    if (2.0 * s_max - twice_max).abs() > 1e-9 || !(1.0..=200.0).contains(&twice_max) {
        return Err(CliError::Config(format!("s_max = {s_max} must be a half-integer between 1/2 and 100")));
    }
    let mut table = Table::new(
        "agreement",
        &[("s", "-"), ("agreement", "dimensionless"), ("agreement_closed_form", "dimensionless")],
    );
    let mut increases = 0usize;
    let mut prev = f64::INFINITY;
    let mut first = f64::NAN;
    let mut gap: f64 = 0.0;
    for twice in 1..=twice_max as u32 {
        let spin = Spin::new(twice);
        let a = agreement(spin);
        let cf = agreement_closed_form(spin);
        if twice == 1 {
            first = a;
        }
        if a >= prev {
            increases += 1;
        }
        prev = a;
        gap = gap.max((a - cf).abs());
        table.push(vec![(twice as f64 / 2.0).into(), a.into(), cf.into()]);
    }
    let mut limit = Table::new(
        "limit",
        &[("s", "-"), ("agreement", "dimensionless"), ("large_spin_limit", "dimensionless")],
    );
    limit.push(vec![(twice_max / 2.0).into(), prev.into(), agreement_limit().into()]);
    Ok(Report {
        tables: vec![table, limit],
        checks: vec![
            Check::at_most("spin one half agreement deviation from 1", (first - 1.0).abs(), 1e-12),
            Check::at_most("non-decreasing steps", increases as f64, 0.0),
            Check::at_most("explicit vs closed form", gap, 1e-10),
        ],
    })
}

fn two_time(p: &Params, seed: u64) -> Result<Report, CliError> {
    let queries = p.usize("queries")?;
    let ds = p.usize("ds")?;
    let period = p.positive("period")?;
    if ds < 2 {
        return Err(CliError::Config("ds must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(
        "two_time",
        &[
            ("query", "-"),
            ("t1", "seconds"),
            ("t2", "seconds"),
            ("a", "-"),
            ("b", "-"),
            ("direct", "dimensionless"),
            ("gppt", "dimensionless"),
            ("glm", "dimensionless"),
        ],
    );
    let mut worst: f64 = 0.0;
    for i in 0..queries {
        // the clock is equally spaced with one state per tick so both constructions apply
        let dc = ds + rng.gen_range(1..=2);
        let q = 2.0 * PI / period;
        let mut pool: Vec<usize> = (0..dc).collect();
        pool.shuffle(&mut rng);
        let levels: Vec<f64> = pool[..ds].iter().map(|&k| k as f64 * q).collect();
        let h = random_hermitian_with_spectrum(&mut rng, &levels);
        let coeffs = random_coeffs(&mut rng, ds)?;
        let u = build_universe(&h, &coeffs, ClockBudget { dim: dc, period, hbar: 1.0 }).map_err(lib)?;
        let first = OutcomeBasis::from_columns(&random_unitary(&mut rng, ds)).map_err(lib)?;
        let second = OutcomeBasis::from_columns(&random_unitary(&mut rng, ds)).map_err(lib)?;
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
        let direct = direct_two_time(&u, &query).map_err(lib)?;
        let gppt = gppt_two_time(&u, &query, ExternalAverage::default()).map_err(lib)?;
        let glm = glm_two_time(&u, &query, MemoryLayout::minimal(ds)).map_err(lib)?;
        worst = worst.max((gppt - direct).abs()).max((glm - direct).abs());
        table.push(vec![
            i.into(),
            query.t1.into(),
            query.t2.into(),
            query.a.into(),
            query.b.into(),
            direct.into(),
            gppt.into(),
            glm.into(),
        ]);
    }
    Ok(Report { tables: vec![table], checks: vec![Check::at_most("max deviation from propagator", worst, 1e-10)] })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn typicality(p: &Params, seed: u64) -> Result<Report, CliError> {
    let sizes = p.usize_list("sizes")?;
    let levels = p.f64_list("levels")?;
    let beta = p.f64("beta")?;
    let spacing = p.positive("spacing")?;
    let seeds = p.usize("seeds")?;
    let mass = p.positive("mass")?;
    let omega = p.positive("omega")?;
    let counts = p.usize_list("counts")?;
    let steps = p.usize("steps")?.max(2);
    if seeds == 0 || sizes.is_empty() {
        return Err(CliError::Config("need at least one size and one seed".into()));
    }
    let energy = 10.0;

    let mut dist = Table::new(
        "trace_distance",
        &[("environment_states", "-"), ("median_trace_distance", "dimensionless"), ("mean_trace_distance", "dimensionless")],
    );
    let mut medians = Vec::new();
    for (i, &total) in sizes.iter().enumerate() {
        let model =
            ShellModel::lattice(&levels, energy, spacing, &proportional_counts(&levels, beta, total)).map_err(lib)?;
        let base = seed.wrapping_add((i as u64) << 32);
        let d: Vec<f64> = (0..seeds as u64)
            .into_par_iter()
            .map(|k| reduced_vs_canonical(&sample_shell_state(&model, base.wrapping_add(k)), beta).trace_dist)
            .collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let med = median(d);
        medians.push(med);
        dist.push(vec![total.into(), med.into(), mean.into()]);
    }

    let model = ShellModel::lattice(&[0.0, omega], energy, spacing, &counts).map_err(lib)?;
    let sample = sample_shell_state(&model, seed);
    let t_max = match p.f64("t_max")? {
        t if t > 0.0 => t,
        _ => 0.01 / model.shell().delta,
    };
    let mut osc = Table::new(
        "position",
        &[("t", "seconds"), ("x_expectation", "meters"), ("x_double_sum", "meters"), ("x_first_order", "meters")],
    );
    let mut worst: f64 = 0.0;
    for i in 0..steps {
        let t = t_max * i as f64 / (steps - 1) as f64;
        let full = oscillator_x_expectation(&sample, mass, omega, t).map_err(lib)?;
        let double = oscillator_x_double_sum(&sample, mass, omega, t).map_err(lib)?;
        let first = oscillator_x_first_order(&sample, mass, omega, t).map_err(lib)?;
        worst = worst.max((full - double).abs());
        osc.push(vec![t.into(), full.into(), double.into(), first.into()]);
    }
    let mut checks = vec![Check::at_most("position expectation vs double sum", worst, 1e-12)];
    if medians.len() > 1 {
        let rise = medians.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::at_most("largest median increase with size", rise, 0.0));
    }
    Ok(Report { tables: vec![dist, osc], checks })
}

fn spacetime_toy(p: &Params, _seed: u64) -> Result<Report, CliError> {
    let len = p.positive("length")?;
    let big = p.positive("frame_mass")?;
    let small = p.positive("system_mass")?;
    let (c0, c1, c2) = (p.f64("c0")?, p.f64("c1")?, p.f64("c2")?);
    let nt = p.usize("nt")?.max(1);
    let nd = p.usize("nd")?.max(1);
    let norm2 = c0 * c0 + c1 * c1 + c2 * c2;
    if (norm2 - 1.0).abs() > 1e-12 {
        return Err(CliError::Config(format!("c0^2 + c1^2 + c2^2 = {norm2} must equal 1")));
    }
    let su = free_particle_universe(&[3], len, big, small, &[c(c0, 0.0), c(c1, 0.0), c(c2, 0.0)]).map_err(lib)?;
    let eps = (2.0 * PI / len).powi(2) * (0.5 / big + 0.5 / small);
    let period = 2.0 * PI / eps;
    let closed = |t: f64, dist: f64| {
        let k = 2.0 * PI * dist / len;
        (1.0 + 2.0 * c0 * c1 * (eps * t + k).cos() + 2.0 * c1 * c2 * (eps * t - k).cos()
            + 2.0 * c0 * c2 * (2.0 * k).cos())
            / len
    };
    let mut table = Table::new(
        "probability",
        &[("t", "seconds"), ("separation", "meters"), ("probability_density", "1/meters"), ("closed_form", "1/meters")],
    );
    let (mut worst, mut norm): (f64, f64) = (0.0, 0.0);
    for i in 0..nt {
        let t = period * i as f64 / nt as f64;
        for j in 0..nd {
            let dist = len * j as f64 / nd as f64;
            let prob = su.joint_conditional_probability(t, &[0.0], &[dist], Readout::Continuous).map_err(lib)?;
            let cf = closed(t, dist);
            worst = worst.max((prob - cf).abs());
            table.push(vec![t.into(), dist.into(), prob.into(), cf.into()]);
        }
        norm = norm.max((su.density_normalization(t, &[0.0], 16).map_err(lib)? - 1.0).abs());
    }
    Ok(Report {
        tables: vec![table],
        checks: vec![
            Check::at_most("max deviation from closed form", worst, 1e-12),
            Check::at_most("normalization over separation", norm, 1e-10),
        ],
    })
}

fn gravity_run(p: &Params, _seed: u64) -> Result<Report, CliError> {
    let depth = p.f64("depth")?;
    let d = p.usize("d")?;
    let period = p.positive("period")?;
    let tick = p.positive("tick")?;
    let given = p.usize("given")?;
    let (model, height) = match p.string("mode") {
        "far" => (PotentialModel::Newtonian, None),
        "pair" => (PotentialModel::Newtonian, Some(p.positive("height")?)),
        "relativistic" => (PotentialModel::Relativistic, None),
        other => return Err(CliError::Config(format!("mode must be far, pair or relativistic, got {other:?}"))),
    };
    let cfg = ClockPairConfig::from_depth(d, period, depth, height, model);
    let report = gravity::tick_ratio(&cfg).map_err(lib)?;
    let t = cfg.time_of_tick_a(tick).map_err(lib)?;
    let pair = gravity::evolve_clock_pair(&cfg, t).map_err(lib)?;
    let evolved = gravity::ticks_from_state(&pair.b) / gravity::ticks_from_state(&pair.a);
    let shift = height.map(|_| gravity::redshift(&cfg)).transpose().map_err(lib)?;

    let mut summary = Table::new(
        "dilation",
        &[
            ("depth", "dimensionless"),
            ("factor_a", "dimensionless"),
            ("factor_b", "dimensionless"),
            ("tick_ratio", "dimensionless"),
            ("first_order_ratio", "dimensionless"),
            ("evolved_tick_ratio", "dimensionless"),
            ("redshift", "dimensionless"),
            ("redshift_first_order", "dimensionless"),
        ],
    );
    summary.push(vec![
        depth.into(),
        report.factor_a.into(),
        report.factor_b.into(),
        report.tick_ratio.into(),
        report.first_order.into(),
        evolved.into(),
        shift.as_ref().map(|z| z.exact).into(),
        shift.as_ref().map(|z| z.first_order).into(),
    ]);

    let probs = gravity::discrete_distribution(&cfg, given).map_err(lib)?;
    let mean = gravity::discrete_mean(&cfg, given).map_err(lib)?;
    let (_, period_b) = cfg.periods().map_err(lib)?;
    let mut dist = Table::new(
        "conditional",
        &[("given_tick", "-"), ("tick", "-"), ("tick_time", "seconds"), ("probability", "dimensionless")],
    );
    for (l, &pr) in probs.iter().enumerate() {
        dist.push(vec![given.into(), l.into(), (l as f64 * period_b / d as f64).into(), pr.into()]);
    }
    let mut means = Table::new("conditional_mean", &[("given_tick", "-"), ("mean_tick_time", "seconds")]);
    means.push(vec![given.into(), mean.into()]);
    let total: f64 = probs.iter().sum();
    Ok(Report {
        tables: vec![summary, dist, means],
        checks: vec![
            Check::at_most("evolved vs predicted tick ratio", (evolved - report.tick_ratio).abs(), 1e-12),
            Check::at_most("conditional normalization", (total - 1.0).abs(), 1e-10),
        ],
    })
}
