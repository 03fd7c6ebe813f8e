//! Space from a total-momentum constraint, spacetime from energy and momentum together.
//!
//! Frame `R` and system `S` carry equally spaced momentum grids, and position states
//! are the complement of momentum exactly as clock states are the complement of energy.
//! A universe annihilated by `P_R + P_S` gives relative states that translate under
//! `P_S`. Adding a clock `C` and the energy constraint gives conditional probabilities
//! that depend on clock time and on the distance `y - x`. Units have `hbar = 1`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::clockwork::{complement_family, ClockError, ClockSpectrum, ComplementFamily};
use crate::hilbert::{c, cis, CVector, HilbertError, Operator, StateVector, C64};
use num_integer::lcm;

use crate::rational::best_rational;

/// Largest flattened frame or system factor.
pub const MAX_FACTOR_DIM: usize = 4096;
/// Largest global amplitude count.
pub const MAX_GLOBAL_DIM: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpacetimeError {
    #[error("momentum grid needs d >= 1 and a positive finite length")]
    BadGrid,
    #[error("expected {expected} coefficients, got {found}")]
    CoeffCount { expected: usize, found: usize },
    #[error("coefficients have squared norm {norm_sqr}, expected 1")]
    NotNormalized { norm_sqr: f64 },
    #[error("momentum {momentum} on axis {axis} has no partner -p on the frame grid")]
    Unpairable { axis: usize, momentum: f64 },
    #[error("universes need between 1 and 3 spatial axes, got {0}")]
    AxisCount(usize),
    #[error("dimension {dim} exceeds the cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("dispersion table has {found} entries for {expected} modes")]
    TableSize { expected: usize, found: usize },
    #[error("dispersion value {value} is not finite")]
    BadDispersion { value: f64 },
    #[error("dispersion values cannot be placed on a clock lattice within {tol:e}")]
    Unrepresentable { tol: f64 },
    #[error("this operation needs the relativistic dispersion")]
    NotRelativistic,
    #[error("this operation needs a dispersion that splits into frame and system terms")]
    NoSplit,
    #[error("{what} = {value} lies outside [0, {length}]")]
    OutOfRange { what: &'static str, value: f64, length: f64 },
    #[error("{what} = {value} is not on the {count}-point grid")]
    OffGrid { what: &'static str, value: f64, count: usize },
    #[error("{points} readout points cannot resolve {dim} momenta")]
    TooFewPoints { points: usize, dim: usize },
    #[error("query has {found} coordinates, universe has {expected} axes")]
    Coordinates { expected: usize, found: usize },
    #[error(transparent)]
    Clock(#[from] ClockError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

pub type Result<T> = std::result::Result<T, SpacetimeError>;

/// Momenta `p_k = p0 + 2*pi*k/L` for `k = 0..d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumGrid {
    p0: f64,
    length: f64,
    d: usize,
}

impl MomentumGrid {
    pub fn new(p0: f64, length: f64, d: usize) -> Result<Self> {
        if d == 0 || !(length > 0.0 && length.is_finite() && p0.is_finite()) {
            return Err(SpacetimeError::BadGrid);
        }
        Ok(Self { p0, length, d })
    }

    /// Grid with `p = 2*pi*k/L` for `k = -half..=half`.
    pub fn symmetric(half: usize, length: f64) -> Result<Self> {
        Self::new(-2.0 * PI * half as f64 / length, length, 2 * half + 1)
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn value(&self, k: usize) -> f64 {
        self.p0 + k as f64 * self.step()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.d).map(|k| self.value(k)).collect()
    }

    /// Index of `p` on the grid, if it is within `1e-9` steps of a grid point.
    pub fn index_of(&self, p: f64) -> Option<usize> {
        let x = (p - self.p0) / self.step();
        let k = x.round();
        if (x - k).abs() > 1e-9 || k < 0.0 || k >= self.d as f64 {
            return None;
        }
        Some(k as usize)
    }

    /// The grid as a spectrum with period `L`, so position states are its time states.
    pub fn spectrum(&self) -> ClockSpectrum {
        ClockSpectrum::equally_spaced(self.d, self.p0, self.length, 1.0).expect("validated grid")
    }

    pub fn momentum_operator(&self) -> Operator {
        Operator::from_real_diagonal(&self.values())
    }

    /// Unnormalized `|x> = sum_k e^{-i p_k x}|p_k>`.
    pub fn position_ket(&self, x: f64) -> StateVector {
        self.spectrum().continuous_ket(x)
    }

    /// `|x>/sqrt(d)`.
    pub fn position_state(&self, x: f64) -> StateVector {
        self.position_ket(x).scale(c(1.0 / (self.d as f64).sqrt(), 0.0))
    }
}

/// Position states `x_j = x0 + j*L/count` conjugate to the grid.
pub fn position_family(grid: &MomentumGrid, count: usize, x0: f64) -> Result<ComplementFamily> {
    Ok(complement_family(&grid.spectrum(), count, x0)?)
}

/// How positions are read out: as densities on the continuum, or on `count`-point
/// grids starting at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    Continuous,
    Discrete { frame_points: usize, system_points: usize },
}

fn check_range(what: &'static str, value: f64, length: f64) -> Result<()> {
    let slack = 1e-12 * length;
    if !(value >= -slack && value <= length + slack) {
        return Err(SpacetimeError::OutOfRange { what, value, length });
    }
    Ok(())
}

fn check_on_grid(what: &'static str, value: f64, length: f64, count: usize) -> Result<()> {
    let s = value * count as f64 / length;
    if (s - s.round()).abs() > 1e-9 {
        return Err(SpacetimeError::OffGrid { what, value, count });
    }
    Ok(())
}

fn check_norm(coeffs: &[C64]) -> Result<()> {
    let n: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
    if (n - 1.0).abs() > 1e-10 {
        return Err(SpacetimeError::NotNormalized { norm_sqr: n });
    }
    Ok(())
}

/// `sum_k c_k |-p_k>_R |p_k>_S`.
#[derive(Debug, Clone)]
pub struct MomentumUniverse {
    frame: MomentumGrid,
    system: MomentumGrid,
    coeffs: Vec<C64>,
    pairing: Vec<usize>,
    global: StateVector,
}

pub fn momentum_constrained_universe(
    frame: MomentumGrid,
    system: MomentumGrid,
    coeffs: &[C64],
) -> Result<MomentumUniverse> {
    if coeffs.len() != system.dim() {
        return Err(SpacetimeError::CoeffCount { expected: system.dim(), found: coeffs.len() });
    }
    check_norm(coeffs)?;
    let pairing = (0..system.dim())
        .map(|k| {
            let p = system.value(k);
            frame.index_of(-p).ok_or(SpacetimeError::Unpairable { axis: 0, momentum: p })
        })
        .collect::<Result<Vec<_>>>()?;
    let (dr, ds) = (frame.dim(), system.dim());
    let mut amps = CVector::zeros(dr * ds);
    for (k, &r) in pairing.iter().enumerate() {
        amps[r * ds + k] = coeffs[k];
    }
    let global = StateVector::from_vector(amps, vec![dr, ds])?;
    Ok(MomentumUniverse { frame, system, coeffs: coeffs.to_vec(), pairing, global })
}

impl MomentumUniverse {
    pub fn frame(&self) -> &MomentumGrid {
        &self.frame
    }

    pub fn system(&self) -> &MomentumGrid {
        &self.system
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Frame index paired with each system momentum.
    pub fn pairing(&self) -> &[usize] {
        &self.pairing
    }

    pub fn global_state(&self) -> &StateVector {
        &self.global
    }

    /// `|| (P_R + P_S)|Psi> ||`
    pub fn momentum_residual(&self) -> f64 {
        let ds = self.system.dim();
        let mut acc = 0.0;
        for (idx, z) in self.global.amplitudes().iter().enumerate() {
            let p = self.frame.value(idx / ds) + self.system.value(idx % ds);
            acc += (z * p).norm_sqr();
        }
        acc.sqrt()
    }

    /// `<x|Psi>` with the unnormalized frame ket, equal to `sum_k c_k e^{-i p_k x}|p_k>`.
    /// On a grid point this is also `sqrt(d_R) <x_j|Psi>` with the normalized state.
    pub fn relative_state(&self, x: f64) -> StateVector {
        self.global.contract(0, &self.frame.position_ket(x)).expect("frame factor")
    }

    /// Probability (discrete) or density (continuous) of reading `y` on the system
    /// given `x` on the frame.
    pub fn relative_position_probability(&self, x: f64, y: f64, readout: Readout) -> Result<f64> {
        check_range("x", x, self.frame.length())?;
        check_range("y", y, self.system.length())?;
        let phi = self.relative_state(x);
        position_readout(&[self.frame], &[self.system], &phi, &[x], &[y], readout)
    }
}

/// Reads `phi` on the system grids at `y`, after the frame has been fixed at `x`.
fn position_readout(
    frames: &[MomentumGrid],
    systems: &[MomentumGrid],
    phi: &StateVector,
    x: &[f64],
    y: &[f64],
    readout: Readout,
) -> Result<f64> {
    let ket = product_ket(systems, y);
    let amp = ket.inner(phi)?;
    match readout {
        Readout::Continuous => {
            let vol: f64 = systems.iter().map(|g| g.length()).product();
            Ok(amp.norm_sqr() / vol)
        }
        Readout::Discrete { frame_points, system_points } => {
            for (j, (f, s)) in frames.iter().zip(systems).enumerate() {
                if frame_points < f.dim() {
                    return Err(SpacetimeError::TooFewPoints { points: frame_points, dim: f.dim() });
                }
                if system_points < s.dim() {
                    return Err(SpacetimeError::TooFewPoints { points: system_points, dim: s.dim() });
                }
                check_on_grid("x", x[j], f.length(), frame_points)?;
                check_on_grid("y", y[j], s.length(), system_points)?;
            }
            // d_S/D_S |<y_l|phi>|^2 with normalized <y_l| is |<y|phi>|^2 / D_S per axis
            Ok(amp.norm_sqr() / (system_points as f64).powi(systems.len() as i32))
        }
    }
}

/// Tensor product of per-axis unnormalized position kets, flattened row-major.
fn product_ket(grids: &[MomentumGrid], coords: &[f64]) -> StateVector {
    let mut ket = grids[0].position_ket(coords[0]);
    for (g, &x) in grids.iter().zip(coords).skip(1) {
        ket = ket.tensor(&g.position_ket(x));
    }
    let n = ket.len();
    ket.with_dims(vec![n]).expect("flatten")
}

/// Energy function `eps(p)` of a paired mode `(-p)_R (x) (p)_S`.
#[derive(Debug, Clone, PartialEq)]
pub enum Dispersion {
    /// `|p|^2/(2M) + |p|^2/(2m)`.
    FreeParticles { frame_mass: f64, system_mass: f64 },
    /// `sign * sqrt(|p|^2 + m^2)` for the system alone, with the frame kinetic term dropped.
    Relativistic { mass: f64, positive: bool },
    /// Explicit values per flattened system mode.
    Table(Vec<f64>),
}

impl Dispersion {
    fn frame_energy(&self, p: &[f64]) -> Option<f64> {
        let p2: f64 = p.iter().map(|v| v * v).sum();
        match self {
            Dispersion::FreeParticles { frame_mass, .. } => Some(p2 / (2.0 * frame_mass)),
            Dispersion::Relativistic { .. } => Some(0.0),
            Dispersion::Table(_) => None,
        }
    }

    fn system_energy(&self, p: &[f64]) -> Option<f64> {
        let p2: f64 = p.iter().map(|v| v * v).sum();
        match self {
            Dispersion::FreeParticles { system_mass, .. } => Some(p2 / (2.0 * system_mass)),
            Dispersion::Relativistic { mass, positive } => {
                let e = (p2 + mass * mass).sqrt();
                Some(if *positive { e } else { -e })
            }
            Dispersion::Table(_) => None,
        }
    }

    fn mode_energy(&self, p: &[f64], mode: usize) -> f64 {
        match self {
            Dispersion::Table(v) => v[mode],
            _ => {
                let back: Vec<f64> = p.iter().map(|v| -v).collect();
                self.frame_energy(&back).expect("split") + self.system_energy(p).expect("split")
            }
        }
    }
}

/// Clock construction for spacetime universes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockPlan {
    /// Pad the clock with unused levels up to this dimension.
    pub min_dim: usize,
    /// Largest accepted snap error, relative to `max |eps|`.
    pub tol: f64,
}

impl Default for ClockPlan {
    fn default() -> Self {
        Self { min_dim: 0, tol: 1e-12 }
    }
}

/// Energy offsets placed on an integer lattice: `quantum`, labels, and the worst error.
#[derive(Debug, Clone, PartialEq)]
pub struct Snap {
    pub quantum: f64,
    pub labels: Vec<u64>,
    pub error: f64,
}

/// Puts non-negative `offsets` on a lattice `label * quantum`. Rational ratios against the
/// smallest non-zero offset are tried first (common denominator up to `1e6`); otherwise
/// a uniform lattice of spacing `2 * tol * scale` is used.
pub fn snap_to_lattice(offsets: &[f64], scale: f64, tol: f64) -> Result<Snap> {
    let bound = tol * scale.max(f64::MIN_POSITIVE);
    let smallest = offsets.iter().cloned().filter(|&g| g > bound).fold(f64::INFINITY, f64::min);
    if !smallest.is_finite() {
        let error = offsets.iter().cloned().fold(0.0, f64::max);
        if error > bound {
            return Err(SpacetimeError::Unrepresentable { tol });
        }
        return Ok(Snap { quantum: 1.0, labels: vec![0; offsets.len()], error });
    }
    let finish = |quantum: f64| -> Snap {
        let labels: Vec<u64> = offsets.iter().map(|g| (g / quantum).round() as u64).collect();
        let error = offsets
            .iter()
            .zip(&labels)
            .map(|(g, &r)| (g - r as f64 * quantum).abs())
            .fold(0.0, f64::max);
        Snap { quantum, labels, error }
    };
    let mut den = 1u64;
    let mut rational = true;
    for &g in offsets {
        let (_, b) = best_rational(g / smallest, 1_000_000);
        den = lcm(den, b);
        if den > 1_000_000 {
            rational = false;
            break;
        }
    }
    if rational {
        let snap = finish(smallest / den as f64);
        if snap.error <= bound {
            return Ok(snap);
        }
    }
    let snap = finish(2.0 * bound);
    if snap.error > bound || snap.labels.iter().any(|&r| r > 1 << 52) {
        return Err(SpacetimeError::Unrepresentable { tol });
    }
    Ok(snap)
}

/// Frame and system momentum grids along one spatial axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub frame: MomentumGrid,
    pub system: MomentumGrid,
}

/// A paired mode of the universe.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub system_index: Vec<usize>,
    pub frame_index: Vec<usize>,
    pub momentum: Vec<f64>,
    pub epsilon: f64,
    pub clock_level: usize,
}

/// `sum_k c_k |-eps_k>_C |-p_k>_R |p_k>_S` on clock (x) frame (x) system, with the frame
/// and system factors flattened over the axes.
#[derive(Debug, Clone)]
pub struct SpacetimeUniverse {
    clock: ClockSpectrum,
    axes: Vec<Axis>,
    coeffs: Vec<C64>,
    dispersion: Dispersion,
    modes: Vec<Mode>,
    global: StateVector,
    snap_error: f64,
}

fn multi_index(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
    out
}

fn flat_index(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

pub fn build_spacetime_universe(
    axes: Vec<Axis>,
    coeffs: &[C64],
    dispersion: Dispersion,
    plan: ClockPlan,
) -> Result<SpacetimeUniverse> {
    if axes.is_empty() || axes.len() > 3 {
        return Err(SpacetimeError::AxisCount(axes.len()));
    }
    let sdims: Vec<usize> = axes.iter().map(|a| a.system.dim()).collect();
    let rdims: Vec<usize> = axes.iter().map(|a| a.frame.dim()).collect();
    let (ds, dr): (usize, usize) = (sdims.iter().product(), rdims.iter().product());
    for dim in [ds, dr] {
        if dim > MAX_FACTOR_DIM {
            return Err(SpacetimeError::TooLarge { dim, cap: MAX_FACTOR_DIM });
        }
    }
    if coeffs.len() != ds {
        return Err(SpacetimeError::CoeffCount { expected: ds, found: coeffs.len() });
    }
    check_norm(coeffs)?;
    if let Dispersion::Table(v) = &dispersion {
        if v.len() != ds {
            return Err(SpacetimeError::TableSize { expected: ds, found: v.len() });
        }
    }

    let mut modes = Vec::with_capacity(ds);
    for k in 0..ds {
        let system_index = multi_index(k, &sdims);
        let momentum: Vec<f64> = system_index.iter().zip(&axes).map(|(&i, a)| a.system.value(i)).collect();
        let frame_index = momentum
            .iter()
            .zip(&axes)
            .enumerate()
            .map(|(axis, (&p, a))| a.frame.index_of(-p).ok_or(SpacetimeError::Unpairable { axis, momentum: p }))
            .collect::<Result<Vec<_>>>()?;
        let epsilon = dispersion.mode_energy(&momentum, k);
        if !epsilon.is_finite() {
            return Err(SpacetimeError::BadDispersion { value: epsilon });
        }
        modes.push(Mode { system_index, frame_index, momentum, epsilon, clock_level: 0 });
    }

    // clock levels at -eps, lowest at -max eps
    let top = modes.iter().map(|m| m.epsilon).fold(f64::NEG_INFINITY, f64::max);
    let scale = modes.iter().map(|m| m.epsilon.abs()).fold(0.0, f64::max);
    let offsets: Vec<f64> = modes.iter().map(|m| top - m.epsilon).collect();
    let snap = snap_to_lattice(&offsets, scale, plan.tol)?;
    let mut labels = snap.labels.clone();
    labels.sort_unstable();
    labels.dedup();
    let mut next = 0u64;
    while labels.len() < plan.min_dim {
        if labels.binary_search(&next).is_err() {
            labels.push(next);
            labels.sort_unstable();
        }
        next += 1;
    }
    let dc = labels.len();
    if dc * dr * ds > MAX_GLOBAL_DIM {
        return Err(SpacetimeError::TooLarge { dim: dc * dr * ds, cap: MAX_GLOBAL_DIM });
    }
    for (m, &r) in modes.iter_mut().zip(&snap.labels) {
        m.clock_level = labels.binary_search(&r).expect("present");
    }
    let period = 2.0 * PI / snap.quantum;
    let clock = ClockSpectrum::new(-top, period, labels, 1.0)?;

    let mut amps = CVector::zeros(dc * dr * ds);
    for (k, m) in modes.iter().enumerate() {
        let r = flat_index(&m.frame_index, &rdims);
        amps[(m.clock_level * dr + r) * ds + k] = coeffs[k];
    }
    let global = StateVector::from_vector(amps, vec![dc, dr, ds])?;
    Ok(SpacetimeUniverse {
        clock,
        axes,
        coeffs: coeffs.to_vec(),
        dispersion,
        modes,
        global,
        snap_error: snap.error,
    })
}

impl SpacetimeUniverse {
    pub fn clock(&self) -> &ClockSpectrum {
        &self.clock
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn dispersion(&self) -> &Dispersion {
        &self.dispersion
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn global_state(&self) -> &StateVector {
        &self.global
    }

    /// Largest distance between a clock level and the `-eps_k` it stands for.
    pub fn snap_error(&self) -> f64 {
        self.snap_error
    }

    fn frames(&self) -> Vec<MomentumGrid> {
        self.axes.iter().map(|a| a.frame).collect()
    }

    fn systems(&self) -> Vec<MomentumGrid> {
        self.axes.iter().map(|a| a.system).collect()
    }

    pub fn frame_dim(&self) -> usize {
        self.axes.iter().map(|a| a.frame.dim()).product()
    }

    pub fn system_dim(&self) -> usize {
        self.axes.iter().map(|a| a.system.dim()).product()
    }

    /// Energy carried by the clock for mode `k`, i.e. the snapped `eps_k`.
    pub fn clock_epsilon(&self, k: usize) -> f64 {
        -self.clock.energy(self.modes[k].clock_level)
    }

    /// `|| (H_C + H_R + H_S)|Psi> ||` using the dispersion values for `H_R + H_S`.
    pub fn energy_residual(&self) -> f64 {
        self.modes
            .iter()
            .enumerate()
            .map(|(k, m)| (self.coeffs[k] * (m.epsilon - self.clock_epsilon(k))).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `|| (P_R + P_S)|Psi> ||` along each axis, evaluated on every basis component.
    pub fn momentum_residuals(&self) -> Vec<f64> {
        let rdims: Vec<usize> = self.axes.iter().map(|a| a.frame.dim()).collect();
        let sdims: Vec<usize> = self.axes.iter().map(|a| a.system.dim()).collect();
        let (dr, ds) = (self.frame_dim(), self.system_dim());
        let mut acc = vec![0.0; self.axes.len()];
        for (idx, z) in self.global.amplitudes().iter().enumerate() {
            if z.norm_sqr() == 0.0 {
                continue;
            }
            let r = multi_index((idx / ds) % dr, &rdims);
            let s = multi_index(idx % ds, &sdims);
            for (j, a) in self.axes.iter().enumerate() {
                let p = a.frame.value(r[j]) + a.system.value(s[j]);
                acc[j] += (z * p).norm_sqr();
            }
        }
        acc.into_iter().map(f64::sqrt).collect()
    }

    fn diagonal(&self, grids: &[MomentumGrid], f: impl Fn(&[f64]) -> Option<f64>) -> Option<Operator> {
        let dims: Vec<usize> = grids.iter().map(|g| g.dim()).collect();
        let n: usize = dims.iter().product();
        let mut vals = Vec::with_capacity(n);
        for flat in 0..n {
            let p: Vec<f64> = multi_index(flat, &dims).iter().zip(grids).map(|(&i, g)| g.value(i)).collect();
            vals.push(f(&p)?);
        }
        Some(Operator::from_real_diagonal(&vals))
    }

    /// `H_R` on the flattened frame factor, when the dispersion splits.
    pub fn frame_hamiltonian(&self) -> Option<Operator> {
        self.diagonal(&self.frames(), |p| self.dispersion.frame_energy(p))
    }

    /// `H_S` on the flattened system factor, when the dispersion splits.
    pub fn system_hamiltonian(&self) -> Option<Operator> {
        self.diagonal(&self.systems(), |p| self.dispersion.system_energy(p))
    }

    /// `P_S` along one axis on the flattened system factor.
    pub fn system_momentum(&self, axis: usize) -> Operator {
        let systems = self.systems();
        self.diagonal(&systems, |p| Some(p[axis])).expect("always defined")
    }

    /// `<t|Psi>` on frame (x) system.
    pub fn frame_system_state(&self, t: f64) -> StateVector {
        self.global.contract(0, &self.clock.continuous_ket(t)).expect("clock factor")
    }

    /// `<x|Psi>` on clock (x) system.
    pub fn clock_system_state(&self, x: &[f64]) -> Result<StateVector> {
        self.check_coords(x)?;
        Ok(self.global.contract(1, &product_ket(&self.frames(), x))?)
    }

    /// `(<t| (x) <x|)|Psi> = sum_k c_k e^{-i eps_k t} e^{-i p_k.x}|p_k>`.
    pub fn system_state(&self, t: f64, x: &[f64]) -> Result<StateVector> {
        let cs = self.clock_system_state(x)?;
        Ok(cs.contract(0, &self.clock.continuous_ket(t))?)
    }

    fn check_coords(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.axes.len() {
            return Err(SpacetimeError::Coordinates { expected: self.axes.len(), found: x.len() });
        }
        Ok(())
    }

    /// Probability (discrete) or density (continuous) of `y` on the system given `x` on
    /// the frame and `t` on the clock.
    pub fn joint_conditional_probability(&self, t: f64, x: &[f64], y: &[f64], readout: Readout) -> Result<f64> {
        self.check_coords(x)?;
        self.check_coords(y)?;
        if !t.is_finite() {
            return Err(SpacetimeError::OutOfRange { what: "t", value: t, length: self.clock.period() });
        }
        for (j, a) in self.axes.iter().enumerate() {
            check_range("x", x[j], a.frame.length())?;
            check_range("y", y[j], a.system.length())?;
        }
        let psi = self.system_state(t, x)?;
        position_readout(&self.frames(), &self.systems(), &psi, x, y, readout)
    }

    /// Integral of the continuous density over `y` by an `nodes`-per-axis rectangle
    /// rule, exact for `nodes > 2 * max momentum index span`.
    pub fn density_normalization(&self, t: f64, x: &[f64], nodes: usize) -> Result<f64> {
        let systems = self.systems();
        let dims = vec![nodes; systems.len()];
        let total = nodes.pow(systems.len() as u32);
        let cell: f64 = systems.iter().map(|g| g.length() / nodes as f64).product();
        let psi = self.system_state(t, x)?;
        let mut acc = 0.0;
        for flat in 0..total {
            let y: Vec<f64> = multi_index(flat, &dims)
                .iter()
                .zip(&systems)
                .map(|(&l, g)| l as f64 * g.length() / nodes as f64)
                .collect();
            let amp = product_ket(&systems, &y).inner(&psi)?;
            acc += amp.norm_sqr();
        }
        let vol: f64 = systems.iter().map(|g| g.length()).product();
        Ok(acc * cell / vol)
    }

    /// `eps_k^2 - |p_k|^2 - m^2` with the clock's value of `eps_k`.
    pub fn dispersion_residual(&self, k: usize) -> Result<f64> {
        let Dispersion::Relativistic { mass, .. } = self.dispersion else {
            return Err(SpacetimeError::NotRelativistic);
        };
        let e = self.clock_epsilon(k);
        let p2: f64 = self.modes[k].momentum.iter().map(|v| v * v).sum();
        Ok(e * e - p2 - mass * mass)
    }

    /// `|| (d_t^2 - sum_J d_J^2 + m^2) psi(t, x) ||` with five-point second differences
    /// of step `h` in every coordinate.
    pub fn klein_gordon_residual(&self, t: f64, x: &[f64], h: f64) -> Result<f64> {
        let Dispersion::Relativistic { mass, .. } = self.dispersion else {
            return Err(SpacetimeError::NotRelativistic);
        };
        self.check_coords(x)?;
        let second = |f: &dyn Fn(f64) -> Result<StateVector>, at: f64| -> Result<CVector> {
            let w = [-1.0, 16.0, -30.0, 16.0, -1.0];
            let mut acc = CVector::zeros(self.system_dim());
            for (s, &wk) in w.iter().enumerate() {
                let v = f(at + (s as f64 - 2.0) * h)?;
                acc += v.amplitudes() * c(wk, 0.0);
            }
            Ok(acc / c(12.0 * h * h, 0.0))
        };
        let mut total = second(&|tt| self.system_state(tt, x), t)?;
        for j in 0..x.len() {
            let f = |xj: f64| {
                let mut xs = x.to_vec();
                xs[j] = xj;
                self.system_state(t, &xs)
            };
            total -= second(&f, x[j])?;
        }
        total += self.system_state(t, x)?.amplitudes() * c(mass * mass, 0.0);
        Ok(total.norm())
    }

    /// `|| i d_t psi - H_S psi || / || H_S psi ||` with the exact time derivative.
    pub fn frame_drag(&self, t: f64, x: &[f64]) -> Result<f64> {
        let hs = self.system_hamiltonian().ok_or(SpacetimeError::NoSplit)?;
        let psi = self.system_state(t, x)?;
        let eps: Vec<f64> = (0..self.modes.len()).map(|k| self.clock_epsilon(k)).collect();
        let dt = StateVector::from_amplitudes(psi.amplitudes().iter().zip(&eps).map(|(z, e)| z * e).collect());
        let h_psi = hs.apply(&psi)?;
        Ok(dt.distance(&h_psi)? / h_psi.norm())
    }

    /// Translates the clock-system relative state by `a` with `exp(-i a.P_S)`.
    pub fn translate_by_system_momentum(&self, state: &StateVector, a: &[f64]) -> StateVector {
        let ds = self.system_dim();
        let phases: Vec<C64> =
            self.modes.iter().map(|m| cis(-m.momentum.iter().zip(a).map(|(p, ai)| p * ai).sum::<f64>())).collect();
        let amps = state.amplitudes().iter().enumerate().map(|(idx, z)| z * phases[idx % ds]).collect();
        StateVector::new(amps, state.dims().to_vec()).expect("dims")
    }
}

/// Free-particle universe with `d` modes per axis on the grid `p_k = 2*pi*(k - d/2)/L`,
/// frame and system sharing the grid.
pub fn free_particle_universe(
    dims: &[usize],
    length: f64,
    frame_mass: f64,
    system_mass: f64,
    coeffs: &[C64],
) -> Result<SpacetimeUniverse> {
    let axes = dims
        .iter()
        .map(|&d| {
            let grid = MomentumGrid::new(-2.0 * PI * (d / 2) as f64 / length, length, d)?;
            Ok(Axis { frame: grid, system: grid })
        })
        .collect::<Result<Vec<_>>>()?;
    build_spacetime_universe(axes, coeffs, Dispersion::FreeParticles { frame_mass, system_mass }, ClockPlan::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(cs: [f64; 3], l: f64, big: f64, small: f64) -> SpacetimeUniverse {
        let coeffs: Vec<C64> = cs.iter().map(|&v| c(v, 0.0)).collect();
        free_particle_universe(&[3], l, big, small, &coeffs).unwrap()
    }

    #[test]
    fn two_point_rod_states() {
        let g = MomentumGrid::new(0.0, 2.0 * PI, 2).unwrap();
        let fam = position_family(&g, 2, 0.0).unwrap();
        let a = 1.0 / 2f64.sqrt();
        assert!((fam.state(0).amplitude(0) - c(a, 0.0)).norm() < 1e-15);
        assert!((fam.state(0).amplitude(1) - c(a, 0.0)).norm() < 1e-15);
        assert!((fam.state(1).amplitude(0) - c(a, 0.0)).norm() < 1e-15);
        assert!((fam.state(1).amplitude(1) + c(a, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rod_translation_and_resolution() {
        let g = MomentumGrid::new(-1.3, 4.0, 5).unwrap();
        let fam = position_family(&g, 9, 0.2).unwrap();
        assert!(fam.identity_defect() < 1e-12);
        let p = g.momentum_operator();
        for j in 0..9 {
            let shift = crate::hilbert::unitary_from_hamiltonian(&p, fam.value(j) - 0.2, 1.0).unwrap();
            let moved = shift.apply(fam.state(0)).unwrap();
            assert!(moved.distance(fam.state(j)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn momentum_universe_translation_law() {
        let frame = MomentumGrid::symmetric(4, 3.0).unwrap();
        let system = MomentumGrid::symmetric(2, 3.0).unwrap();
        let raw = [c(0.3, 0.1), c(-0.2, 0.5), c(0.6, 0.0), c(0.1, -0.3), c(0.2, 0.2)];
        let n: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let coeffs: Vec<C64> = raw.iter().map(|z| z / n).collect();
        let u = momentum_constrained_universe(frame, system, &coeffs).unwrap();
        assert!(u.momentum_residual() < 1e-12);
        let ps = system.momentum_operator();
        let base = u.relative_state(0.0);
        for x in [0.4, 1.1, 2.9] {
            let shift = crate::hilbert::unitary_from_hamiltonian(&ps, x, 1.0).unwrap();
            assert!(u.relative_state(x).distance(&shift.apply(&base).unwrap()).unwrap() < 1e-10);
        }
        // discrete readout sums to one
        for j in 0..9 {
            let x = j as f64 * 3.0 / 9.0;
            let total: f64 = (0..7)
                .map(|l| {
                    let ro = Readout::Discrete { frame_points: 9, system_points: 7 };
                    u.relative_position_probability(x, l as f64 * 3.0 / 7.0, ro).unwrap()
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn momentum_eigenstate_is_flat_in_position() {
        let frame = MomentumGrid::symmetric(2, 1.0).unwrap();
        let system = MomentumGrid::symmetric(1, 1.0).unwrap();
        let u = momentum_constrained_universe(frame, system, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let ro = Readout::Discrete { frame_points: 5, system_points: 4 };
        for l in 0..4 {
            let p = u.relative_position_probability(0.2, l as f64 / 4.0, ro).unwrap();
            assert!((p - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn two_mode_density_is_a_cosine() {
        let l = 2.5;
        let frame = MomentumGrid::new(-2.0 * PI / l, l, 3).unwrap();
        let system = MomentumGrid::new(0.0, l, 2).unwrap();
        let a = 1.0 / 2f64.sqrt();
        let u = momentum_constrained_universe(frame, system, &[c(a, 0.0), c(a, 0.0)]).unwrap();
        for (x, y) in [(0.0, 0.3), (1.0, 2.2), (2.4, 0.1)] {
            let p = u.relative_position_probability(x, y, Readout::Continuous).unwrap();
            let expect = (1.0 + (2.0 * PI * (y - x) / l).cos()) / l;
            assert!((p - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn unpairable_and_off_grid_rejected() {
        let frame = MomentumGrid::new(0.0, 1.0, 3).unwrap();
        let system = MomentumGrid::new(0.0, 1.0, 2).unwrap();
        let a = 1.0 / 2f64.sqrt();
        let err = momentum_constrained_universe(frame, system, &[c(a, 0.0), c(a, 0.0)]).unwrap_err();
        assert!(matches!(err, SpacetimeError::Unpairable { .. }));
        let frame = MomentumGrid::symmetric(1, 1.0).unwrap();
        let u = momentum_constrained_universe(frame, frame, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let ro = Readout::Discrete { frame_points: 3, system_points: 3 };
        assert!(matches!(u.relative_position_probability(0.1, 0.0, ro), Err(SpacetimeError::OffGrid { .. })));
        assert!(matches!(
            u.relative_position_probability(1.5, 0.0, Readout::Continuous),
            Err(SpacetimeError::OutOfRange { .. })
        ));
    }

    #[test]
    fn toy_universe_constraints_and_clock() {
        let u = toy([0.6, 0.64, 0.48], 2.0, 50.0, 1.0);
        assert_eq!(u.clock().dim(), 2);
        assert!(u.energy_residual() < 1e-12);
        assert!(u.momentum_residuals()[0] < 1e-12);
        let eps = (PI).powi(2) * (1.0 / 100.0 + 0.5);
        assert!((u.clock_epsilon(0) - eps).abs() < 1e-12);
        assert!(u.clock_epsilon(1).abs() < 1e-12);
        // dense operator residual
        let hc = u.clock().hamiltonian();
        let hr = u.frame_hamiltonian().unwrap();
        let hs = u.system_hamiltonian().unwrap();
        let dims = [u.clock().dim(), 3, 3];
        let h = hc
            .embed(0, &dims)
            .unwrap()
            .add(&hr.embed(1, &dims).unwrap())
            .unwrap()
            .add(&hs.embed(2, &dims).unwrap())
            .unwrap();
        assert!(h.apply(u.global_state()).unwrap().norm() < 1e-12);
    }

    #[test]
    fn frame_and_system_evolve_together() {
        let raw: Vec<C64> = (0..5).map(|k| c(0.3 + 0.1 * k as f64, 0.2 - 0.07 * k as f64)).collect();
        let n: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let coeffs: Vec<C64> = raw.iter().map(|z| z / n).collect();
        let u = free_particle_universe(&[5], 3.0, 7.0, 2.0, &coeffs).unwrap();
        let hrs = u
            .frame_hamiltonian()
            .unwrap()
            .tensor(&Operator::identity(vec![5]).unwrap())
            .add(&Operator::identity(vec![5]).unwrap().tensor(&u.system_hamiltonian().unwrap()))
            .unwrap();
        let t0 = 0.4;
        let start = u.frame_system_state(t0);
        for t in [0.9, 3.0, 17.5] {
            let uu = crate::hilbert::unitary_from_hamiltonian(&hrs, t - t0, 1.0).unwrap();
            let evolved = uu.apply(&start.with_dims(vec![25]).unwrap()).unwrap();
            let direct = u.frame_system_state(t).with_dims(vec![25]).unwrap();
            assert!(direct.distance(&evolved).unwrap() < 1e-10);
        }
    }

    #[test]
    fn heavy_frame_drag_scales_with_mass_ratio() {
        let coeffs = [c(0.6, 0.0), c(0.0, 0.0), c(0.8, 0.0)];
        for big in [10.0, 100.0, 1000.0] {
            let u = free_particle_universe(&[3], 1.0, big, 1.0, &coeffs).unwrap();
            let drag = u.frame_drag(0.3, &[0.2]).unwrap();
            assert!((drag - 1.0 / big).abs() < 1e-12 / big.min(1.0) + 1e-12, "M={big} drag={drag}");
        }
    }

    #[test]
    fn relativistic_dispersion_residuals() {
        let l = 1.0;
        let grid = MomentumGrid::symmetric(1, l).unwrap();
        let axes = vec![Axis { frame: grid, system: grid }; 3];
        let step = 2.0 * PI / l;
        let mut coeffs = vec![c(0.0, 0.0); 27];
        coeffs[flat_index(&[2, 2, 1], &[3, 3, 3])] = c(0.6, 0.0);
        coeffs[flat_index(&[0, 1, 1], &[3, 3, 3])] = c(0.0, 0.8);
        let mass = 0.7;
        let u = build_spacetime_universe(axes, &coeffs, Dispersion::Relativistic { mass, positive: true }, ClockPlan::default())
            .unwrap();
        let idx = flat_index(&[2, 2, 1], &[3, 3, 3]);
        assert!((u.modes()[idx].epsilon - (2.0 * step * step + mass * mass).sqrt()).abs() < 1e-12);
        for k in 0..27 {
            let scale = u.modes()[k].epsilon.powi(2);
            assert!(u.dispersion_residual(k).unwrap().abs() < 1e-10 * scale);
        }
        assert!(u.energy_residual() < 1e-10);
        let kg = u.klein_gordon_residual(0.37, &[0.1, 0.5, 0.8], 1e-3).unwrap();
        assert!(kg < 1e-4, "kg={kg}");
    }

    #[test]
    fn single_mode_universe_is_flat() {
        let grid = MomentumGrid::symmetric(1, 2.0).unwrap();
        let axes = vec![Axis { frame: grid, system: grid }; 3];
        let mut coeffs = vec![c(0.0, 0.0); 27];
        coeffs[flat_index(&[2, 0, 1], &[3, 3, 3])] = c(1.0, 0.0);
        let u = build_spacetime_universe(axes, &coeffs, Dispersion::FreeParticles { frame_mass: 3.0, system_mass: 1.0 }, ClockPlan::default())
            .unwrap();
        let ro = Readout::Discrete { frame_points: 3, system_points: 3 };
        let p = u.joint_conditional_probability(0.7, &[0.0, 2.0 / 3.0, 4.0 / 3.0], &[2.0 / 3.0, 0.0, 0.0], ro).unwrap();
        assert!((p - 1.0 / 27.0).abs() < 1e-14);
    }

    #[test]
    fn snapping_prefers_rationals() {
        let s = snap_to_lattice(&[0.0, 0.75, 1.25, 2.0], 2.0, 1e-12).unwrap();
        assert_eq!(s.labels, vec![0, 3, 5, 8]);
        assert!((s.quantum - 0.25).abs() < 1e-15);
        let s = snap_to_lattice(&[0.0, 1.0, 2f64.sqrt()], 2.0, 1e-12).unwrap();
        assert!(s.error <= 2e-12);
    }
}
