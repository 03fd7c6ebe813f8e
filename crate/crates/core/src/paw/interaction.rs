//! Clock and system coupled by an interaction term.
//!
//! With `(H_C + H_S + H_int)|Psi> = 0`, the conditioned state obeys
//! `i hbar d/dt phi(t) = H_S phi(t) + (1/T) int K(t, t') phi(t') dt'` with the kernel
//! `K(t, t') = <t~| H_int |t~'>`.

use nalgebra::DMatrix;

use super::{ConstrainedUniverse, PawError, Result};
use crate::clockwork::ClockSpectrum;
use crate::hilbert::{c, cis, CMatrix, CVector, Operator, StateVector, C64};
use crate::tolerance;

#[derive(Debug, Clone)]
pub struct InteractingUniverse {
    clock: ClockSpectrum,
    system_h: Operator,
    h_int: Operator,
    global: StateVector,
    residual: f64,
}

#[derive(Debug, Clone)]
pub struct InteractionRhs {
    pub value: StateVector,
    /// Distance to the same quadrature on a grid of half the size.
    pub quadrature_error: f64,
}

impl InteractingUniverse {
    /// Checks the full constraint before accepting the state.
    pub fn new(clock: ClockSpectrum, system_h: Operator, h_int: Operator, global: StateVector) -> Result<Self> {
        system_h.require_hermitian()?;
        h_int.require_hermitian()?;
        let (dc, ds) = (clock.dim(), system_h.dim());
        for (expected, found) in [(dc * ds, h_int.dim()), (dc * ds, global.len())] {
            if expected != found {
                return Err(crate::hilbert::HilbertError::DimensionMismatch { expected, found }.into());
            }
        }
        let global = global.with_dims(vec![dc, ds])?;
        let total = clock
            .hamiltonian()
            .tensor(&Operator::identity(vec![ds])?)
            .add(&Operator::identity(vec![dc])?.tensor(&system_h))?
            .add(&h_int)?;
        let residual = total.apply(&global)?.norm();
        let scale = total.max_abs().max(1.0);
        if residual > tolerance::CONSTRAINT * scale {
            return Err(PawError::ConstraintViolated { residual });
        }
        Ok(Self { clock, system_h, h_int, global, residual })
    }

    /// The non-interacting universe viewed through this interface.
    pub fn from_constrained(u: &ConstrainedUniverse) -> Result<Self> {
        let dims = vec![u.clock().dim(), u.system_dim()];
        let zero = Operator::zeros(dims)?;
        Self::new(u.clock().clone(), u.system_h().clone(), zero, u.global_state().clone())
    }

    pub fn clock(&self) -> &ClockSpectrum {
        &self.clock
    }

    pub fn system_h(&self) -> &Operator {
        &self.system_h
    }

    pub fn h_int(&self) -> &Operator {
        &self.h_int
    }

    pub fn global_state(&self) -> &StateVector {
        &self.global
    }

    pub fn constraint_residual(&self) -> f64 {
        self.residual
    }

    /// `<t~|Psi>`
    pub fn relative_state(&self, t: f64) -> StateVector {
        self.global.contract(0, &self.clock.continuous_ket(t)).expect("clock factor")
    }

    /// `K(t, t') = <t~| H_int |t~'>` as a system operator.
    pub fn kernel(&self, t: f64, tp: f64) -> Operator {
        kernel(&self.clock, &self.h_int, self.system_h.dim(), t, tp)
    }

    /// `H_S phi(t) + (1/T) int K(t, t') phi(t') dt'` by the trapezoid rule on `grid`
    /// uniformly spaced points. The integrand is a trigonometric polynomial in `t'`, so the
    /// rule is exact once `grid` exceeds the largest clock label difference.
    pub fn interaction_rhs(&self, t: f64, grid: usize) -> InteractionRhs {
        let full = self.rhs_on_grid(t, grid.max(2));
        let half = self.rhs_on_grid(t, (grid / 2).max(1));
        let quadrature_error = full.distance(&half).expect("dims");
        InteractionRhs { value: full, quadrature_error }
    }

    fn rhs_on_grid(&self, t: f64, grid: usize) -> StateVector {
        let ds = self.system_h.dim();
        let t0 = 0.0;
        let step = self.clock.period() / grid as f64;
        let mut acc = CVector::zeros(ds);
        for k in 0..grid {
            let tp = t0 + k as f64 * step;
            let kmat = self.kernel(t, tp);
            acc += kmat.matrix() * self.relative_state(tp).amplitudes();
        }
        acc /= c(grid as f64, 0.0);
        let phi = self.relative_state(t);
        let value = self.system_h.matrix() * phi.amplitudes() + acc;
        StateVector::from_vector(value, vec![ds]).expect("dims")
    }

    /// `i hbar d/dt phi(t)` from the constraint: `-<t~| H_C |Psi>`.
    pub fn exact_rhs(&self, t: f64) -> StateVector {
        let ket = self.clock.continuous_ket(t);
        let weighted =
            StateVector::from_amplitudes((0..self.clock.dim()).map(|i| ket.amplitude(i) * self.clock.energy(i)).collect());
        self.global.contract(0, &weighted).expect("clock factor").scale(c(-1.0, 0.0))
    }

    /// `i hbar d/dt phi(t)` by a five-point central difference with step `h`.
    pub fn finite_difference_rhs(&self, t: f64, h: f64) -> StateVector {
        let f = |s: f64| self.relative_state(t + s * h).amplitudes().clone();
        let d = (f(-2.0) - f(2.0) + (f(1.0) - f(-1.0)) * c(8.0, 0.0)) / c(12.0 * h, 0.0);
        StateVector::from_vector(d * c(0.0, self.clock.hbar()), vec![self.system_h.dim()]).expect("dims")
    }

    /// `| ||phi(t)||^2 - ||phi(t0)||^2 |`
    pub fn norm_drift(&self, t0: f64, t: f64) -> f64 {
        (self.relative_state(t).norm_sqr() - self.relative_state(t0).norm_sqr()).abs()
    }
}

/// `K(t, t')_{ab} = sum_{ij} e^{i E_i t} e^{-i E_j t'} <E_i, a| H_int |E_j, b>`
pub fn kernel(clock: &ClockSpectrum, h_int: &Operator, ds: usize, t: f64, tp: f64) -> Operator {
    let dc = clock.dim();
    let left: Vec<C64> = (0..dc).map(|i| cis(clock.phase(i, t))).collect();
    let right: Vec<C64> = (0..dc).map(|j| cis(-clock.phase(j, tp))).collect();
    let h = h_int.matrix();
    let mut k = CMatrix::zeros(ds, ds);
    for i in 0..dc {
        for j in 0..dc {
            let w = left[i] * right[j];
            let block = h.view((i * ds, j * ds), (ds, ds));
            k += block * w;
        }
    }
    Operator::from_matrix(k).expect("square")
}

/// `-g H_C (x) H_S`
pub fn gravitational_coupling(clock: &ClockSpectrum, system_h: &Operator, g: f64) -> Operator {
    clock.hamiltonian().tensor(system_h).scale(c(-g, 0.0))
}

/// Universe with coupling `-g H_C (x) H_S` and `hbar = 1`. Clock levels are the given
/// integers (period `2*pi`); each system level solves `E_c + E_k - g E_c E_k = 0`, i.e.
/// `E_k = -E_c/(1 - g E_c)`.
pub fn gravitational_universe(clock_levels: &[i64], coeffs: &[C64], g: f64) -> Result<InteractingUniverse> {
    if coeffs.len() != clock_levels.len() {
        return Err(PawError::CoeffCount { expected: clock_levels.len(), found: coeffs.len() });
    }
    let mut sorted = clock_levels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let min = sorted[0];
    let labels: Vec<u64> = sorted.iter().map(|&e| (e - min) as u64).collect();
    let clock = ClockSpectrum::new(min as f64, 2.0 * std::f64::consts::PI, labels, 1.0)?;
    let system: Vec<f64> = clock_levels.iter().map(|&e| -(e as f64) / (1.0 - g * e as f64)).collect();
    let system_h = Operator::from_real_diagonal(&system);
    let (dc, ds) = (clock.dim(), system.len());
    let mut amps = CVector::zeros(dc * ds);
    for (k, &e) in clock_levels.iter().enumerate() {
        let i = sorted.iter().position(|&x| x == e).expect("present");
        amps[i * ds + k] = coeffs[k];
    }
    let global = StateVector::from_vector(amps, vec![dc, ds])?;
    let h_int = gravitational_coupling(&clock, &system_h, g);
    InteractingUniverse::new(clock, system_h, h_int, global)
}

/// `H_S/(1 - g H_S)` applied to a diagonal-basis state: the exact right-hand side of the
/// gravitational universe.
pub fn gravitational_exact_rhs(system_levels: &[f64], g: f64, phi: &StateVector) -> StateVector {
    let amps = (0..phi.len()).map(|k| phi.amplitude(k) * (system_levels[k] / (1.0 - g * system_levels[k]))).collect();
    StateVector::from_amplitudes(amps)
}

/// `(H_S + g H_S^2) phi`: first-order gravitational correction.
pub fn gravitational_first_order_rhs(system_h: &Operator, g: f64, phi: &StateVector) -> StateVector {
    let h: &DMatrix<C64> = system_h.matrix();
    let m = h + h * h * c(g, 0.0);
    StateVector::from_vector(m * phi.amplitudes(), vec![phi.len()]).expect("dims")
}
