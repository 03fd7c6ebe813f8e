//! Energy-constrained universes of a clock and a system.
//!
//! The global state `sum_k c_k |E = -E_k>_C |E_k>_S` is annihilated by the total
//! Hamiltonian. Conditioning it on a clock time state yields a system state that
//! follows the Schrödinger equation in the clock reading.

pub mod interaction;
pub mod wootters;

use std::f64::consts::PI;

use thiserror::Error;

use crate::clockwork::{ClockError, ClockSpectrum, ComplementFamily};
use crate::hilbert::{
    cis, eigh, unitary_from_hamiltonian, CMatrix, CVector, HilbertError, Operator, StateVector, C64,
};
use crate::tolerance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PawError {
    #[error("expected {expected} coefficients, got {found}")]
    CoeffCount { expected: usize, found: usize },
    #[error("coefficients have squared norm {norm_sqr}, expected 1")]
    NotNormalized { norm_sqr: f64 },
    #[error("clock dimension {clock} must exceed system dimension {system}")]
    ClockTooSmall { clock: usize, system: usize },
    #[error(
        "system level {level} (E = {energy}) is not on the clock lattice: nearest clock energy {nearest}, residual {residual:e}"
    )]
    Unrepresentable { level: usize, energy: f64, nearest: f64, residual: f64 },
    #[error("effect is not an orthogonal projector (deviation {deviation:e})")]
    NotProjector { deviation: f64 },
    #[error("orthogonality reached at {first} before the bound {bound}")]
    SpeedLimitViolated { first: f64, bound: f64 },
    #[error("global state violates the constraint (residual {residual:e})")]
    ConstraintViolated { residual: f64 },
    #[error(transparent)]
    Clock(#[from] ClockError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

pub type Result<T> = std::result::Result<T, PawError>;

/// Clock resources available to host the system levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockBudget {
    pub dim: usize,
    pub period: f64,
    pub hbar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeState {
    pub t: f64,
    pub state: StateVector,
}

#[derive(Debug, Clone)]
pub struct ConstrainedUniverse {
    clock: ClockSpectrum,
    system_h: Operator,
    levels: Vec<f64>,
    basis: CMatrix,
    coeffs: Vec<C64>,
    pairing: Vec<usize>,
    global: StateVector,
    residual: f64,
}

/// Pairs every system level `E_k` with a clock level at `-E_k` and builds the global
/// state. The clock ground level sits at `-max E_k`; the remaining clock levels are
/// filled with the smallest unused labels up to `budget.dim`.
pub fn build_universe(system_h: &Operator, coeffs: &[C64], budget: ClockBudget) -> Result<ConstrainedUniverse> {
    system_h.require_hermitian()?;
    let ds = system_h.dim();
    if coeffs.len() != ds {
        return Err(PawError::CoeffCount { expected: ds, found: coeffs.len() });
    }
    let norm_sqr: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > 1e-10 {
        return Err(PawError::NotNormalized { norm_sqr });
    }
    if budget.dim <= ds {
        return Err(PawError::ClockTooSmall { clock: budget.dim, system: ds });
    }
    let spec = eigh(system_h)?;
    let levels = spec.values.clone();
    let e_max = *levels.last().expect("non-empty");
    let clock_e0 = -e_max;
    let quantum = 2.0 * PI * budget.hbar / budget.period;

    let mut required = Vec::with_capacity(ds);
    for (k, &e) in levels.iter().enumerate() {
        let x = (-e - clock_e0) / quantum;
        let n = x.round();
        let nearest = -(clock_e0 + n * quantum);
        let residual = (e - nearest).abs();
        if residual > tolerance::CONSTRAINT * e.abs().max(1.0) {
            return Err(PawError::Unrepresentable { level: k, energy: e, nearest, residual });
        }
        required.push(n as u64);
    }
    let mut labels: Vec<u64> = required.clone();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() > budget.dim {
        return Err(PawError::ClockTooSmall { clock: budget.dim, system: labels.len() });
    }
    let mut filler = 0u64;
    while labels.len() < budget.dim {
        if !labels.contains(&filler) {
            labels.push(filler);
        }
        filler += 1;
    }
    labels.sort_unstable();
    let clock = ClockSpectrum::new(clock_e0, budget.period, labels, budget.hbar)?;
    let pairing: Vec<usize> = required
        .iter()
        .map(|r| clock.labels().iter().position(|l| l == r).expect("label present"))
        .collect();

    let dc = clock.dim();
    let mut amps = CVector::zeros(dc * ds);
    for k in 0..ds {
        let i = pairing[k];
        for s in 0..ds {
            amps[i * ds + s] += coeffs[k] * spec.vectors[(s, k)];
        }
    }
    let global = StateVector::from_vector(amps, vec![dc, ds])?;
    let mut u = ConstrainedUniverse {
        clock,
        system_h: system_h.clone(),
        levels,
        basis: spec.vectors,
        coeffs: coeffs.to_vec(),
        pairing,
        global,
        residual: 0.0,
    };
    u.residual = u.compute_residual();
    Ok(u)
}

impl ConstrainedUniverse {
    pub fn clock(&self) -> &ClockSpectrum {
        &self.clock
    }

    pub fn system_h(&self) -> &Operator {
        &self.system_h
    }

    /// System eigenvalues `E_k`, ascending.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Eigenvectors of the system Hamiltonian as columns, in the order of `levels`.
    pub fn eigenbasis(&self) -> &CMatrix {
        &self.basis
    }

    /// Clock level index paired with each system level.
    pub fn pairing(&self) -> &[usize] {
        &self.pairing
    }

    pub fn global_state(&self) -> &StateVector {
        &self.global
    }

    pub fn hbar(&self) -> f64 {
        self.clock.hbar()
    }

    pub fn system_dim(&self) -> usize {
        self.levels.len()
    }

    /// `||(H_C + H_S)|Psi>||`
    pub fn constraint_residual(&self) -> f64 {
        self.residual
    }

    fn compute_residual(&self) -> f64 {
        let ds = self.system_dim();
        let dc = self.clock.dim();
        let h = self.system_h.matrix();
        let psi = self.global.amplitudes();
        let mut acc = 0.0;
        for i in 0..dc {
            let ec = self.clock.energy(i);
            let row = psi.rows(i * ds, ds);
            let hs = h * row;
            for s in 0..ds {
                acc += (row[s] * ec + hs[s]).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `<alpha~(t)|Psi>`: the system state conditioned on clock reading `t`.
    pub fn relative_state(&self, t: f64) -> RelativeState {
        let ket = self.clock.continuous_ket(t);
        let state = self.global.contract(0, &ket).expect("clock factor");
        RelativeState { t, state }
    }

    /// `sqrt(d_C) <clock_state|Psi>` for any clock state.
    pub fn condition_on(&self, clock_state: &StateVector) -> Result<StateVector> {
        let s = self.global.contract(0, clock_state)?;
        Ok(s.scale(C64::new((self.clock.dim() as f64).sqrt(), 0.0)))
    }

    /// Relative state at the `m`-th state of a clock family.
    pub fn relative_state_in(&self, family: &ComplementFamily, m: usize) -> Result<StateVector> {
        self.condition_on(family.state(m))
    }

    /// `sum_k c_k e^{-i E_k t/hbar} |E_k>`, evaluated without touching the global state.
    pub fn closed_form(&self, t: f64) -> StateVector {
        let ds = self.system_dim();
        let w: CVector = CVector::from_iterator(
            ds,
            (0..ds).map(|k| self.coeffs[k] * cis(-self.levels[k] * t / self.hbar())),
        );
        StateVector::from_vector(&self.basis * w, vec![ds]).expect("dims")
    }

    pub fn system_unitary(&self, t: f64) -> Result<Operator> {
        Ok(unitary_from_hamiltonian(&self.system_h, t, self.hbar())?)
    }

    /// `||phi(t) - U_S(t - t0) phi(t0)||`
    pub fn verify_schrodinger(&self, t0: f64, t: f64) -> Result<f64> {
        let u = self.system_unitary(t - t0)?;
        let evolved = u.apply(&self.relative_state(t0).state)?;
        Ok(self.relative_state(t).state.distance(&evolved)?)
    }

    /// Born-rule probability of `effect` on the system given clock reading `t`.
    pub fn conditional_probability(&self, t: f64, effect: &Operator) -> Result<f64> {
        let deviation = effect.projector_deviation();
        if deviation > tolerance::PROJECTOR {
            return Err(PawError::NotProjector { deviation });
        }
        let phi = self.relative_state(t).state;
        Ok(effect.expectation(&phi)?.re)
    }

    /// Mean energy and spread over the coefficients.
    pub fn energy_moments(&self) -> (f64, f64) {
        let (mut m1, mut m2) = (0.0, 0.0);
        for (c, &e) in self.coeffs.iter().zip(&self.levels) {
            m1 += c.norm_sqr() * e;
            m2 += c.norm_sqr() * e * e;
        }
        (m1, (m2 - m1 * m1).max(0.0).sqrt())
    }

    /// Orthogonality-time bound and the first scanned orthogonal time.
    pub fn speed_limit(&self, t0: f64, grid: usize) -> Result<SpeedLimit> {
        let (mean, spread) = self.energy_moments();
        let ground = self.levels[0];
        let h = self.hbar();
        let b1 = if mean - ground > 0.0 { PI * h / (2.0 * (mean - ground)) } else { f64::INFINITY };
        let b2 = if spread > 0.0 { PI * h / (2.0 * spread) } else { f64::INFINITY };
        let bound = b1.max(b2);

        let phi0 = self.relative_state(t0).state;
        let overlap = |t: f64| phi0.inner(&self.relative_state(t).state).expect("dims").norm();
        let period = self.clock.period();
        let n = grid.max(16);
        let step = period / n as f64;
        let values: Vec<f64> = (0..=n + 1).map(|j| overlap(t0 + j as f64 * step)).collect();
        let mut min_overlap = f64::INFINITY;
        let mut first = None;
        for j in 1..=n {
            min_overlap = min_overlap.min(values[j]);
            if values[j] <= values[j - 1] && values[j] <= values[j + 1] {
                let (tm, vm) = golden_min(&overlap, t0 + (j - 1) as f64 * step, t0 + (j + 1) as f64 * step);
                min_overlap = min_overlap.min(vm);
                if vm < 1e-6 {
                    first = Some(tm - t0);
                    break;
                }
            }
        }
        if let Some(f) = first {
            if f < bound * (1.0 - 1e-8) {
                return Err(PawError::SpeedLimitViolated { first: f, bound });
            }
        }
        Ok(SpeedLimit { bound, first_orthogonal: first, min_overlap })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedLimit {
    /// `max(pi hbar / 2(<E> - E_ground), pi hbar / 2 Delta E)`
    pub bound: f64,
    /// Elapsed time to the first state orthogonal to the initial one, if any.
    pub first_orthogonal: Option<f64>,
    pub min_overlap: f64,
}

/// Golden-section minimization of `f` on `[a, b]`.
pub(crate) fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let scale = b.abs().max(a.abs()).max(1.0);
    while (b - a) > 1e-14 * scale {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
