//! Pairs of clocks in a static gravitational potential.
//!
//! Clocks `A` (at radius `x + h`) and `B` (at radius `x`) have equally spaced spectra
//! `2*pi*k/T`. Promoting their masses to `m + H/c^2` rescales each Hamiltonian by a
//! factor `1 - GM/(r c^2)` (Newtonian potential) or `(1 - 2GM/(r c^2))^{1/2}`
//! (relativistic potential), so relative to a far clock `C` each one ticks with period
//! `T / factor`. Periods are carried as `(T, factor)` pairs and phases are reduced modulo
//! one cycle before exponentiation. Energies are in units with `hbar = 1`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::clockwork::{complement_family, simpson, ClockError, ClockSpectrum};
use crate::hilbert::{cis, HilbertError, StateVector, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GravityError {
    #[error("clocks need at least 2 levels, got {0}")]
    Dimension(usize),
    #[error("{name} = {value} is out of range")]
    Parameter { name: &'static str, value: f64 },
    #[error("depth GM/(x c^2) = {depth} reaches the horizon of the relativistic potential")]
    Horizon { depth: f64 },
    #[error("depth GM/(x c^2) = {depth} makes the Newtonian factor non-positive")]
    Overdeep { depth: f64 },
    #[error("redshift needs a finite separation")]
    FarClock,
    #[error("index {index} out of range for {d} time states")]
    Index { index: usize, d: usize },
    #[error(transparent)]
    Clock(#[from] ClockError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

pub type Result<T> = std::result::Result<T, GravityError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialModel {
    Newtonian,
    Relativistic,
}

/// `GM/(x c^2)`.
pub fn depth(gm: f64, x: f64, c: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        gm / (x * c * c)
    }
}

/// Rescaling of a clock Hamiltonian at radius `x`: `1 - u` or `(1 - 2u)^{1/2}` with
/// `u = GM/(x c^2)`. Infinite `x` gives 1.
pub fn dilation_factor(model: PotentialModel, gm: f64, x: f64, c: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(GravityError::Parameter { name: "x", value: x });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(GravityError::Parameter { name: "c", value: c });
    }
    if !(gm >= 0.0 && gm.is_finite()) {
        return Err(GravityError::Parameter { name: "GM", value: gm });
    }
    factor_from_depth(model, depth(gm, x, c))
}

pub fn factor_from_depth(model: PotentialModel, u: f64) -> Result<f64> {
    match model {
        PotentialModel::Newtonian if u >= 1.0 => Err(GravityError::Overdeep { depth: u }),
        PotentialModel::Newtonian => Ok(1.0 - u),
        PotentialModel::Relativistic if 2.0 * u >= 1.0 => Err(GravityError::Horizon { depth: u }),
        PotentialModel::Relativistic => Ok((1.0 - 2.0 * u).sqrt()),
    }
}

/// Two clocks of `d` levels and free period `period`, `B` at radius `x` and `A` at
/// `x + height` (`None` puts `A` infinitely far away).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockPairConfig {
    pub d: usize,
    pub period: f64,
    pub gm: f64,
    pub x: f64,
    pub height: Option<f64>,
    pub c: f64,
    pub model: PotentialModel,
    /// Rest energy of each clock; contributes only a global phase.
    pub static_energy: f64,
}

impl ClockPairConfig {
    /// Units with `x = c = 1`, so `GM` equals the depth of `B`.
    pub fn from_depth(d: usize, period: f64, depth: f64, height: Option<f64>, model: PotentialModel) -> Self {
        Self { d, period, gm: depth, x: 1.0, height, c: 1.0, model, static_energy: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(GravityError::Dimension(self.d));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(GravityError::Parameter { name: "T", value: self.period });
        }
        if let Some(h) = self.height {
            if !(h >= 0.0) {
                return Err(GravityError::Parameter { name: "h", value: h });
            }
        }
        if !self.static_energy.is_finite() {
            return Err(GravityError::Parameter { name: "static_energy", value: self.static_energy });
        }
        self.factors().map(|_| ())
    }

    pub fn depth_b(&self) -> f64 {
        depth(self.gm, self.x, self.c)
    }

    pub fn depth_a(&self) -> f64 {
        depth(self.gm, self.radius_a(), self.c)
    }

    fn radius_a(&self) -> f64 {
        self.height.map_or(f64::INFINITY, |h| self.x + h)
    }

    /// `(factor_A, factor_B)`.
    pub fn factors(&self) -> Result<(f64, f64)> {
        let a = dilation_factor(self.model, self.gm, self.radius_a(), self.c)?;
        let b = dilation_factor(self.model, self.gm, self.x, self.c)?;
        Ok((a, b))
    }

    /// Dilated periods `(T'', T')` of `A` and `B`.
    pub fn periods(&self) -> Result<(f64, f64)> {
        let (a, b) = self.factors()?;
        Ok((self.period / a, self.period / b))
    }

    /// Ticks `(m'', m')` clicked by `A` and `B` when `C` reads `t`.
    pub fn ticks(&self, t: f64) -> Result<(f64, f64)> {
        let (a, b) = self.factors()?;
        let n = self.d as f64 * t / self.period;
        Ok((n * a, n * b))
    }

    /// `C` time at which `A` has clicked `m` ticks.
    pub fn time_of_tick_a(&self, m: f64) -> Result<f64> {
        let (a, _) = self.factors()?;
        Ok(m * self.period / (self.d as f64 * a))
    }
}

/// States of `A` and `B` when `C` reads `t`.
#[derive(Debug, Clone)]
pub struct ClockPairState {
    pub a: StateVector,
    pub b: StateVector,
}

impl ClockPairState {
    pub fn product(&self) -> StateVector {
        self.a.tensor(&self.b)
    }
}

fn dilated_ket(d: usize, period: f64, factor: f64, t: f64, rest: f64) -> StateVector {
    let norm = 1.0 / (d as f64).sqrt();
    let cycles = t / period * factor;
    let global = cis(-(rest * factor * t).rem_euclid(2.0 * PI));
    StateVector::from_amplitudes(
        (0..d).map(|k| global * cis(-2.0 * PI * (k as f64 * cycles).rem_euclid(1.0)) * norm).collect(),
    )
}

/// Evolves both clocks from `|tau_0>|theta_0>` (flat superpositions) to `C` time `t`.
pub fn evolve_clock_pair(cfg: &ClockPairConfig, t: f64) -> Result<ClockPairState> {
    cfg.validate()?;
    let (fa, fb) = cfg.factors()?;
    Ok(ClockPairState {
        a: dilated_ket(cfg.d, cfg.period, fa, t, cfg.static_energy),
        b: dilated_ket(cfg.d, cfg.period, fb, t, cfg.static_energy),
    })
}

/// Ticks read off a clock state from the relative phase of its first two levels,
/// in `[0, d)`.
pub fn ticks_from_state(state: &StateVector) -> f64 {
    let d = state.len() as f64;
    let rel = state.amplitude(1) * state.amplitude(0).conj();
    (-rel.arg() / (2.0 * PI) * d).rem_euclid(d)
}

/// Exact and first-order tick ratios `m'/m''`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationReport {
    pub factor_a: f64,
    pub factor_b: f64,
    /// `factor_B / factor_A`.
    pub tick_ratio: f64,
    /// `1 - GM h / (x (x + h) c^2)`, or `1 - GM/(x c^2)` for a far `A`.
    pub first_order: f64,
    /// `1 - a h / c^2` with `a = GM/x^2`; `None` for a far `A`.
    pub uniform_field: Option<f64>,
}

pub fn tick_ratio(cfg: &ClockPairConfig) -> Result<DilationReport> {
    cfg.validate()?;
    let (fa, fb) = cfg.factors()?;
    let c2 = cfg.c * cfg.c;
    let (first_order, uniform_field) = match cfg.height {
        None => (1.0 - cfg.depth_b(), None),
        Some(h) => {
            let a = cfg.gm / (cfg.x * cfg.x);
            (1.0 - cfg.gm * h / (cfg.x * (cfg.x + h) * c2), Some(1.0 - a * h / c2))
        }
    };
    Ok(DilationReport { factor_a: fa, factor_b: fb, tick_ratio: fb / fa, first_order, uniform_field })
}

/// Fractional frequency shift of light from `B` received at `A`, normalized by the free
/// level spacing `1/T`: exact `factor_B - factor_A` and first-order `-a h / c^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Redshift {
    pub exact: f64,
    pub first_order: f64,
}

pub fn redshift(cfg: &ClockPairConfig) -> Result<Redshift> {
    cfg.validate()?;
    let h = cfg.height.ok_or(GravityError::FarClock)?;
    let (fa, fb) = cfg.factors()?;
    let a = cfg.gm / (cfg.x * cfg.x);
    Ok(Redshift { exact: fb - fa, first_order: -a * h / (cfg.c * cfg.c) })
}

/// `B` ticks elapsed when `A` has clicked `m`: `m * factor_B / factor_A`.
fn shifted_tick(cfg: &ClockPairConfig, m: f64) -> Result<f64> {
    let (fa, fb) = cfg.factors()?;
    Ok(m * fb / fa)
}

/// `(1/d^2) |sum_n e^{i 2 pi n (l - s)/d}|^2`.
fn discrete_kernel(d: usize, offset: f64) -> f64 {
    let z: C64 = (0..d).map(|n| cis(2.0 * PI * n as f64 * offset / d as f64)).sum();
    z.norm_sqr() / (d * d) as f64
}

/// `P(theta_l | tau_m)`: probability that `B` reads its `l`-th time state given that `A`
/// reads its `m`-th.
pub fn discrete_conditional(cfg: &ClockPairConfig, l: usize, m: usize) -> Result<f64> {
    cfg.validate()?;
    if l >= cfg.d {
        return Err(GravityError::Index { index: l, d: cfg.d });
    }
    let s = shifted_tick(cfg, m as f64)?;
    Ok(discrete_kernel(cfg.d, l as f64 - s))
}

/// `P(theta_l | tau_m)` for every `l`.
pub fn discrete_distribution(cfg: &ClockPairConfig, m: usize) -> Result<Vec<f64>> {
    (0..cfg.d).map(|l| discrete_conditional(cfg, l, m)).collect()
}

/// Same probability from the evolved states and the time states of `B`.
pub fn discrete_conditional_from_states(cfg: &ClockPairConfig, l: usize, m: usize) -> Result<f64> {
    if l >= cfg.d {
        return Err(GravityError::Index { index: l, d: cfg.d });
    }
    let t = cfg.time_of_tick_a(m as f64)?;
    let pair = evolve_clock_pair(cfg, t)?;
    let spec = ClockSpectrum::equally_spaced(cfg.d, 0.0, cfg.period, 1.0)?;
    let family = complement_family(&spec, cfg.d, 0.0)?;
    let a_amp = family.state(m % cfg.d).inner(&pair.a)?;
    let joint = a_amp.norm_sqr() * family.state(l).inner(&pair.b)?.norm_sqr();
    Ok(joint / a_amp.norm_sqr())
}

/// `<theta>(tau_m) = sum_l theta_l P(theta_l | tau_m)` with `theta_l = l T'/d`.
pub fn discrete_mean(cfg: &ClockPairConfig, m: usize) -> Result<f64> {
    let (_, tb) = cfg.periods()?;
    let p = discrete_distribution(cfg, m)?;
    Ok(p.iter().enumerate().map(|(l, pl)| l as f64 * tb / cfg.d as f64 * pl).sum())
}

/// `(T'/d^3) sum_{n,k} f(n-k) e^{i 2 pi s (n-k)/d}` with `f(j) = sum_l l e^{-i 2 pi l j/d}`.
pub fn discrete_mean_fourier(cfg: &ClockPairConfig, m: usize) -> Result<f64> {
    cfg.validate()?;
    let (_, tb) = cfg.periods()?;
    let d = cfg.d;
    let s = shifted_tick(cfg, m as f64)?;
    let f = |j: i64| -> C64 { (0..d).map(|l| cis(-2.0 * PI * (l as i64 * j) as f64 / d as f64) * l as f64).sum() };
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..d as i64 {
        for k in 0..d as i64 {
            acc += f(n - k) * cis(2.0 * PI * s * (n - k) as f64 / d as f64);
        }
    }
    Ok(acc.re * tb / (d * d * d) as f64)
}

/// Density of `B` reading `theta_g = g T'` given `A` reading `tau_f = f T''`,
/// per unit `theta`: `(1/(T' d)) |sum_n e^{-i 2 pi (g - f') n}|^2`.
pub fn continuous_density(cfg: &ClockPairConfig, g: f64, f: f64) -> Result<f64> {
    cfg.validate()?;
    let (_, tb) = cfg.periods()?;
    let fp = shifted_tick(cfg, f)?;
    let z: C64 = (0..cfg.d).map(|n| cis(-2.0 * PI * (g - fp) * n as f64)).sum();
    Ok(z.norm_sqr() / (tb * cfg.d as f64))
}

/// `<theta>(tau_f) = T'/2 + (i T'/(2 pi d)) sum_{n != k} e^{i 2 pi f' (n-k)}/(n-k)`.
pub fn continuous_mean(cfg: &ClockPairConfig, f: f64) -> Result<f64> {
    cfg.validate()?;
    let (_, tb) = cfg.periods()?;
    let fp = shifted_tick(cfg, f)?;
    let d = cfg.d as i64;
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..d {
        for k in 0..d {
            if n != k {
                acc += cis(2.0 * PI * fp * (n - k) as f64) / (n - k) as f64;
            }
        }
    }
    Ok(tb / 2.0 + (C64::new(0.0, tb / (2.0 * PI * cfg.d as f64)) * acc).re)
}

/// `int_0^{T'} theta P(theta | tau_f) d theta` by Simpson's rule on `nodes` intervals.
pub fn continuous_mean_quadrature(cfg: &ClockPairConfig, f: f64, nodes: usize) -> Result<f64> {
    let (_, tb) = cfg.periods()?;
    continuous_density(cfg, 0.0, f)?;
    Ok(simpson(|th| th * continuous_density(cfg, th / tb, f).expect("validated"), 0.0, tb, nodes))
}

/// `int_0^{T'} P(theta | tau_f) d theta` by Simpson's rule.
pub fn continuous_normalization(cfg: &ClockPairConfig, f: f64, nodes: usize) -> Result<f64> {
    let (_, tb) = cfg.periods()?;
    continuous_density(cfg, 0.0, f)?;
    Ok(simpson(|th| continuous_density(cfg, th / tb, f).expect("validated"), 0.0, tb, nodes))
}
