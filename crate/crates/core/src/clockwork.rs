//! Complement observables of bounded discrete Hamiltonians.
//!
//! A [`ClockSpectrum`] stores integer labels `r_i` with `E_i = E0 + r_i * 2*pi*hbar/T`.
//! Time states `|alpha_m>` are phase superpositions of the energy eigenstates at
//! `alpha_m = t0 + m*T/D`. With `D = d` and `r_i = i` they are orthonormal and
//! define the Hermitian time operator; otherwise they form a POVM whose
//! resolution of the identity is still exact whenever `D > r_max`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::hilbert::{c, cis, CMatrix, HilbertError, Operator, StateVector, C64};
use crate::rational::{gcd, lcm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClockError {
    #[error("spectrum has no levels")]
    Empty,
    #[error("labels must start at 0 and strictly increase")]
    BadLabels,
    #[error("period and hbar must be positive and finite")]
    BadScale,
    #[error("ratio {num}/{den} is not a reduced positive fraction")]
    MalformedRatio { num: u64, den: u64 },
    #[error("two levels coincide at ratio {num}/{den}")]
    DuplicateLevel { num: u64, den: u64 },
    #[error("{count} states cannot resolve labels up to {r_max}; need at least {required}")]
    TooFewStates { count: usize, r_max: u64, required: usize },
    #[error("the Hermitian time operator needs an equally spaced spectrum (labels 0..d)")]
    NotEquallySpaced,
    #[error("expected {expected} energies, got {found}")]
    EnergyCount { expected: usize, found: usize },
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

pub type Result<T> = std::result::Result<T, ClockError>;

#[derive(Debug, Clone, PartialEq)]
pub struct ClockSpectrum {
    e0: f64,
    period: f64,
    labels: Vec<u64>,
    hbar: f64,
}

impl ClockSpectrum {
    pub fn new(e0: f64, period: f64, labels: Vec<u64>, hbar: f64) -> Result<Self> {
        if labels.is_empty() {
            return Err(ClockError::Empty);
        }
        if labels[0] != 0 || labels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ClockError::BadLabels);
        }
        if !(period > 0.0 && period.is_finite() && hbar > 0.0 && hbar.is_finite() && e0.is_finite()) {
            return Err(ClockError::BadScale);
        }
        Ok(Self { e0, period, labels, hbar })
    }

    /// Levels `E0 + k * 2*pi*hbar/T` for `k = 0..d`.
    pub fn equally_spaced(d: usize, e0: f64, period: f64, hbar: f64) -> Result<Self> {
        Self::new(e0, period, (0..d as u64).collect(), hbar)
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn r_max(&self) -> u64 {
        *self.labels.last().expect("non-empty")
    }

    /// Energy quantum `2*pi*hbar/T` of the label lattice.
    pub fn quantum(&self) -> f64 {
        2.0 * PI * self.hbar / self.period
    }

    pub fn energy(&self, i: usize) -> f64 {
        self.e0 + self.labels[i] as f64 * self.quantum()
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.energy(i)).collect()
    }

    pub fn is_equally_spaced(&self) -> bool {
        self.labels.iter().enumerate().all(|(i, &r)| r == i as u64)
    }

    pub fn hamiltonian(&self) -> Operator {
        Operator::from_real_diagonal(&self.energies())
    }

    /// Same labels with every level moved by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        Self { e0: self.e0 + delta, ..self.clone() }
    }

    /// Phase `E_i t / hbar`, with the lattice part reduced modulo one period.
    pub fn phase(&self, i: usize, t: f64) -> f64 {
        let cycles = (self.labels[i] as f64 * (t / self.period)).rem_euclid(1.0);
        self.e0 * t / self.hbar + 2.0 * PI * cycles
    }

    /// Unnormalized ket with amplitudes `e^{-i E_i t / hbar}` (squared norm `d`).
    pub fn continuous_ket(&self, t: f64) -> StateVector {
        StateVector::from_amplitudes((0..self.dim()).map(|i| cis(-self.phase(i, t))).collect())
    }
}

/// Builds a spectrum from level ratios `(E_i - E0) = unit * A_i / B_i` for the excited
/// levels. Labels become `L * A_i / B_i` with `L = lcm(B_i)` and the period is
/// `2*pi*hbar*L/unit`. A `period_hint` keeps the labels and rescales the energy unit.
pub fn build_spectrum(
    e0: f64,
    ratios: &[(u64, u64)],
    unit: f64,
    period_hint: Option<f64>,
    hbar: f64,
) -> Result<ClockSpectrum> {
    for &(num, den) in ratios {
        if num == 0 || den == 0 || gcd(num, den) != 1 {
            return Err(ClockError::MalformedRatio { num, den });
        }
    }
    let l = ratios.iter().fold(1u64, |acc, &(_, den)| lcm(acc, den));
    let mut labels = vec![0u64];
    for &(num, den) in ratios {
        if (l * num) % den != 0 {
            return Err(ClockError::MalformedRatio { num, den });
        }
        labels.push(l * num / den);
    }
    let mut sorted = labels.clone();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        let r = w[0];
        let (num, den) = ratios.iter().copied().find(|&(n, d)| l * n / d == r).unwrap_or((r, l));
        return Err(ClockError::DuplicateLevel { num, den });
    }
    if !(unit > 0.0 && unit.is_finite()) {
        return Err(ClockError::BadScale);
    }
    let period = period_hint.unwrap_or(2.0 * PI * hbar * l as f64 / unit);
    ClockSpectrum::new(e0, period, sorted, hbar)
}

/// The `D` time states `|alpha_m>` conjugate to a spectrum.
#[derive(Debug, Clone)]
pub struct ComplementFamily {
    spectrum: ClockSpectrum,
    energies: Vec<f64>,
    count: usize,
    t0: f64,
    states: Vec<StateVector>,
    values: Vec<f64>,
}

/// Builds the `D`-state family `|alpha_m> = d^{-1/2} sum_i e^{-i E_i alpha_m/hbar} |E_i>`.
/// Phases use the integer labels directly, `2*pi*((r_i m) mod D)/D`, so the lattice part
/// is exact before any trigonometry.
pub fn complement_family(spec: &ClockSpectrum, count: usize, t0: f64) -> Result<ComplementFamily> {
    let required = spec.r_max() as usize + 1;
    if count < required || count < spec.dim() {
        return Err(ClockError::TooFewStates { count, r_max: spec.r_max(), required });
    }
    let d = spec.dim();
    let norm = 1.0 / (d as f64).sqrt();
    let dm = count as u64;
    let mut states = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for m in 0..count {
        let alpha = t0 + m as f64 * spec.period() / count as f64;
        let global = spec.e0() * alpha / spec.hbar();
        let amps = (0..d)
            .map(|i| {
                let r = spec.labels()[i];
                let lattice = 2.0 * PI * ((r * m as u64) % dm) as f64 / count as f64;
                let offset = 2.0 * PI * (r as f64 * (t0 / spec.period())).rem_euclid(1.0);
                cis(-(global + offset + lattice)) * norm
            })
            .collect();
        states.push(StateVector::from_amplitudes(amps));
        values.push(alpha);
    }
    Ok(ComplementFamily { energies: spec.energies(), spectrum: spec.clone(), count, t0, states, values })
}

impl ComplementFamily {
    /// Family evaluated on the time grid of `spec` but with phases from `energies`.
    /// Used for spectra that only approximately sit on the label lattice; the identity
    /// defect then measures how far the approximation is from exact.
    pub fn with_energies(spec: &ClockSpectrum, energies: &[f64], count: usize, t0: f64) -> Result<Self> {
        if energies.len() != spec.dim() {
            return Err(ClockError::EnergyCount { expected: spec.dim(), found: energies.len() });
        }
        let required = spec.r_max() as usize + 1;
        if count < required {
            return Err(ClockError::TooFewStates { count, r_max: spec.r_max(), required });
        }
        let norm = 1.0 / (energies.len() as f64).sqrt();
        let mut states = Vec::with_capacity(count);
        let mut values = Vec::with_capacity(count);
        for m in 0..count {
            let alpha = t0 + m as f64 * spec.period() / count as f64;
            let amps = energies.iter().map(|&e| cis(-e * alpha / spec.hbar()) * norm).collect();
            states.push(StateVector::from_amplitudes(amps));
            values.push(alpha);
        }
        Ok(Self { spectrum: spec.clone(), energies: energies.to_vec(), count, t0, states, values })
    }

    pub fn spectrum(&self) -> &ClockSpectrum {
        &self.spectrum
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn state(&self, m: usize) -> &StateVector {
        &self.states[m]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, m: usize) -> f64 {
        self.values[m]
    }

    /// `(d/D) sum_m |alpha_m><alpha_m|`
    pub fn resolution(&self) -> Operator {
        let d = self.spectrum.dim();
        let mut acc = CMatrix::zeros(d, d);
        for s in &self.states {
            acc += s.amplitudes() * s.amplitudes().adjoint();
        }
        let mat = acc * c(d as f64 / self.count as f64, 0.0);
        Operator::from_matrix(mat).expect("square")
    }

    /// Max-abs entry of `(d/D) sum_m |alpha_m><alpha_m| - I`.
    pub fn identity_defect(&self) -> f64 {
        identity_defect(self)
    }

    /// `|<alpha_m|alpha_n>|` for all pairs.
    pub fn overlaps(&self) -> Vec<Vec<f64>> {
        self.states
            .iter()
            .map(|a| self.states.iter().map(|b| a.inner(b).expect("same dim").norm()).collect())
            .collect()
    }
}

/// Max-abs entry of `(d/D) sum_m |alpha_m><alpha_m| - I`.
pub fn identity_defect(family: &ComplementFamily) -> f64 {
    let d = family.spectrum.dim();
    let res = family.resolution();
    crate::hilbert::max_abs(&(res.matrix() - CMatrix::identity(d, d)))
}

/// Hermitian time operator `sum_m tau_m |tau_m><tau_m|` of an equally spaced spectrum.
pub fn tau_operator(spec: &ClockSpectrum, t0: f64) -> Result<Operator> {
    if !spec.is_equally_spaced() {
        return Err(ClockError::NotEquallySpaced);
    }
    let d = spec.dim();
    let family = complement_family(spec, d, t0)?;
    let mut mat = CMatrix::zeros(d, d);
    for (s, &tau) in family.states.iter().zip(&family.values) {
        mat += s.amplitudes() * s.amplitudes().adjoint() * c(tau, 0.0);
    }
    // exact Hermitian symmetrization
    let mat = (&mat + mat.adjoint()) * c(0.5, 0.0);
    Ok(Operator::from_matrix(mat)?)
}

/// Age operator `alpha0 + T/2 + i hbar sum_{i != j} e^{-i(E_i-E_j) alpha0/hbar}/(E_i-E_j) |E_i><E_j|`.
pub fn age_operator(spec: &ClockSpectrum, alpha0: f64) -> Operator {
    let d = spec.dim();
    let q = spec.quantum();
    let mut mat = CMatrix::zeros(d, d);
    for i in 0..d {
        mat[(i, i)] = c(alpha0 + spec.period() / 2.0, 0.0);
        for j in 0..d {
            if i == j {
                continue;
            }
            let k = spec.labels()[i] as f64 - spec.labels()[j] as f64;
            let gap = k * q;
            let phase = 2.0 * PI * (k * alpha0 / spec.period()).rem_euclid(1.0);
            mat[(i, j)] = c(0.0, spec.hbar()) * cis(-phase) / gap;
        }
    }
    Operator::from_matrix(mat).expect("square")
}

/// `<alpha~|psi>` for a state in the clock energy basis.
fn ket_overlap(state: &StateVector, spec: &ClockSpectrum, t: f64) -> C64 {
    (0..spec.dim()).map(|i| cis(spec.phase(i, t)) * state.amplitude(i)).sum()
}

/// `P(alpha) = |<alpha~|psi>|^2 / T`.
pub fn alpha_probability_density(state: &StateVector, spec: &ClockSpectrum, t: f64) -> f64 {
    ket_overlap(state, spec, t).norm_sqr() / spec.period()
}

/// Composite Simpson quadrature of `f` over `[a, b]` with `n` (rounded up to even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(2) + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Mean and variance of the time distribution `P(alpha)` over `[alpha0, alpha0 + T]`.
pub fn alpha_moments(state: &StateVector, spec: &ClockSpectrum, alpha0: f64, nodes: usize) -> (f64, f64) {
    let b = alpha0 + spec.period();
    let p = |a: f64| alpha_probability_density(state, spec, a);
    let mass = simpson(p, alpha0, b, nodes);
    let mean = simpson(|a| a * p(a), alpha0, b, nodes) / mass;
    let second = simpson(|a| (a - mean).powi(2) * p(a), alpha0, b, nodes) / mass;
    (mean, second)
}

/// Rate `d<A>/dt = 1 - |<alpha~_0|psi>|^2` for a normalized state.
pub fn age_rate(state: &StateVector, spec: &ClockSpectrum, alpha0: f64) -> f64 {
    1.0 - ket_overlap(state, spec, alpha0).norm_sqr()
}

/// Energy spread `Delta E` of a state in the clock energy basis.
pub fn energy_spread(state: &StateVector, spec: &ClockSpectrum) -> f64 {
    let (mut m1, mut m2) = (0.0, 0.0);
    for i in 0..spec.dim() {
        let p = state.amplitude(i).norm_sqr();
        let e = spec.energy(i);
        m1 += p * e;
        m2 += p * e * e;
    }
    (m2 - m1 * m1).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{eigh, unitary_from_hamiltonian};

    const TAU: f64 = 2.0 * PI;

    #[test]
    fn spectrum_from_integer_ratios() {
        let s = build_spectrum(0.0, &[(1, 1), (3, 1)], 1.0, None, 1.0).unwrap();
        assert_eq!(s.labels(), &[0, 1, 3]);
        assert!((s.period() - TAU).abs() < 1e-15);
    }

    #[test]
    fn spectrum_from_fractional_ratios() {
        let s = build_spectrum(0.0, &[(1, 2), (3, 4)], 1.0, None, 1.0).unwrap();
        assert_eq!(s.labels(), &[0, 2, 3]);
        assert!((s.period() - 4.0 * TAU).abs() < 1e-12);
        assert!((s.energy(1) - 0.5).abs() < 1e-15);
        assert!((s.energy(2) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn equally_spaced_period() {
        let de = 0.3;
        let s = build_spectrum(1.0, &[(1, 1), (2, 1), (3, 1)], de, None, 1.0).unwrap();
        assert_eq!(s.labels(), &[0, 1, 2, 3]);
        assert!((s.period() - TAU / de).abs() < 1e-12);
    }

    #[test]
    fn period_hint_rescales() {
        let s = build_spectrum(0.0, &[(1, 1), (3, 1)], 1.0, Some(2.0), 1.0).unwrap();
        assert_eq!(s.period(), 2.0);
        assert!((s.energy(1) - PI).abs() < 1e-15);
    }

    #[test]
    fn malformed_ratios() {
        assert!(matches!(build_spectrum(0.0, &[(2, 4)], 1.0, None, 1.0), Err(ClockError::MalformedRatio { .. })));
        assert!(matches!(build_spectrum(0.0, &[(0, 1)], 1.0, None, 1.0), Err(ClockError::MalformedRatio { .. })));
        assert!(matches!(
            build_spectrum(0.0, &[(1, 2), (1, 2)], 1.0, None, 1.0),
            Err(ClockError::DuplicateLevel { num: 1, den: 2 })
        ));
    }

    #[test]
    fn two_level_family() {
        let s = ClockSpectrum::equally_spaced(2, 0.0, TAU, 1.0).unwrap();
        let f = complement_family(&s, 2, 0.0).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((f.state(0).amplitude(0) - c(h, 0.0)).norm() < 1e-15);
        assert!((f.state(0).amplitude(1) - c(h, 0.0)).norm() < 1e-15);
        assert!((f.state(1).amplitude(1) - c(-h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn orthonormal_for_equal_spacing() {
        let s = ClockSpectrum::equally_spaced(3, 0.4, 1.7, 1.0).unwrap();
        let f = complement_family(&s, 3, 0.2).unwrap();
        for (m, row) in f.overlaps().iter().enumerate() {
            for (n, &v) in row.iter().enumerate() {
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
        assert!(f.identity_defect() < 1e-12);
    }

    #[test]
    fn povm_overlap_one_third() {
        let s = ClockSpectrum::new(0.0, TAU, vec![0, 1, 3], 1.0).unwrap();
        let f = complement_family(&s, 4, 0.0).unwrap();
        assert!((f.overlaps()[0][1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(f.identity_defect() < 1e-12);
    }

    #[test]
    fn too_few_states() {
        let s = ClockSpectrum::new(0.0, TAU, vec![0, 1, 3], 1.0).unwrap();
        assert!(matches!(complement_family(&s, 3, 0.0), Err(ClockError::TooFewStates { required: 4, .. })));
    }

    #[test]
    fn irrational_defect_shrinks() {
        let energies = [0.0, 1.0, 2f64.sqrt()];
        let mut last = f64::INFINITY;
        for (p, q) in [(7u64, 5u64), (17, 12), (99, 70)] {
            let s = ClockSpectrum::new(0.0, TAU * q as f64, vec![0, q, p], 1.0).unwrap();
            let f = ComplementFamily::with_energies(&s, &energies, p as usize + 1, 0.0).unwrap();
            let defect = f.identity_defect();
            assert!(defect < last, "defect {defect} did not shrink below {last}");
            assert!(defect > 1e-6);
            last = defect;
        }
    }

    #[test]
    fn shift_covariance_and_cyclicity() {
        let s = ClockSpectrum::new(0.3, 2.5, vec![0, 2, 5], 1.3).unwrap();
        let f = complement_family(&s, 7, 0.1).unwrap();
        let h = s.hamiltonian();
        for m in 0..7 {
            let u = unitary_from_hamiltonian(&h, m as f64 * s.period() / 7.0, s.hbar()).unwrap();
            let shifted = u.apply(f.state(0)).unwrap();
            assert!(shifted.distance(f.state(m)).unwrap() < 1e-10);
        }
        // one more step wraps around; with E0 = 0 there is no leftover global phase
        let s0 = s.shifted(-0.3);
        let f0 = complement_family(&s0, 7, 0.1).unwrap();
        let u = unitary_from_hamiltonian(&s0.hamiltonian(), s0.period() / 7.0, s0.hbar()).unwrap();
        assert!(u.apply(f0.state(6)).unwrap().distance(f0.state(0)).unwrap() < 1e-10);
    }

    #[test]
    fn tau_two_level_closed_form() {
        let s = ClockSpectrum::equally_spaced(2, 0.0, TAU, 1.0).unwrap();
        let tau = tau_operator(&s, 0.0).unwrap();
        // pi (I - sigma_x)/2
        let want = CMatrix::from_row_slice(2, 2, &[c(PI / 2.0, 0.0), c(-PI / 2.0, 0.0), c(-PI / 2.0, 0.0), c(PI / 2.0, 0.0)]);
        assert!(crate::hilbert::max_abs(&(tau.matrix() - want)) < 1e-14);
    }

    #[test]
    fn tau_generates_energy_shifts() {
        let s = ClockSpectrum::equally_spaced(4, 0.7, 3.0, 0.8).unwrap();
        let tau = tau_operator(&s, 0.25).unwrap();
        let e0 = StateVector::basis(vec![4], 0).unwrap();
        for n in 0..4 {
            let gap = s.energy(n) - s.energy(0);
            let u = crate::hilbert::hermitian_function(&tau, |v| cis(v * gap / s.hbar())).unwrap();
            let got = u.apply(&e0).unwrap();
            let want = StateVector::basis(vec![4], n).unwrap();
            assert!(got.distance(&want).unwrap() < 1e-10);
        }
    }

    #[test]
    fn tau_unchanged_by_energy_shift() {
        let s = ClockSpectrum::equally_spaced(3, 0.0, 2.0, 1.0).unwrap();
        let a = tau_operator(&s, 0.1).unwrap();
        let b = tau_operator(&s.shifted(5.5), 0.1).unwrap();
        assert!(crate::hilbert::max_abs(&(a.matrix() - b.matrix())) < 1e-12);
    }

    #[test]
    fn tau_eigenvalues_and_vectors() {
        let s = ClockSpectrum::equally_spaced(3, 0.0, 3.0, 1.0).unwrap();
        let tau = tau_operator(&s, 0.5).unwrap();
        let spec = eigh(&tau).unwrap();
        let family = complement_family(&s, 3, 0.5).unwrap();
        for m in 0..3 {
            assert!((spec.values[m] - (0.5 + m as f64)).abs() < 1e-12);
            let ov = spec.vector(m).inner(family.state(m)).unwrap().norm();
            assert!((ov - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tau_rejects_povm() {
        let s = ClockSpectrum::new(0.0, TAU, vec![0, 1, 3], 1.0).unwrap();
        assert!(matches!(tau_operator(&s, 0.0), Err(ClockError::NotEquallySpaced)));
    }

    #[test]
    fn age_commutator() {
        let s = ClockSpectrum::new(-0.4, 2.2, vec![0, 1, 3, 4], 0.9).unwrap();
        let a0 = 0.37;
        let age = age_operator(&s, a0);
        assert!(age.hermitian_deviation() < 1e-12);
        let h = s.hamiltonian();
        let comm = h.commutator(&age).unwrap();
        let k = s.continuous_ket(a0);
        let want = k.projector().sub(&Operator::identity(vec![4]).unwrap()).unwrap().scale(c(0.0, s.hbar()));
        assert!(crate::hilbert::max_abs(&(comm.matrix() - want.matrix())) < 1e-10);
    }

    #[test]
    fn eigenstate_age_is_midpoint() {
        let s = ClockSpectrum::new(0.0, 3.0, vec![0, 2, 3], 1.0).unwrap();
        let age = age_operator(&s, 0.5);
        for i in 0..3 {
            let e = StateVector::basis(vec![3], i).unwrap();
            assert!((age.expectation(&e).unwrap().re - 2.0).abs() < 1e-14);
            assert!(age_rate(&e, &s, 0.5).abs() < 1e-14);
            for t in [0.0, 0.7, 2.9] {
                assert!((alpha_probability_density(&e, &s, t) - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn density_examples() {
        let s = ClockSpectrum::equally_spaced(2, 0.0, 4.0, 1.0).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let psi = StateVector::from_amplitudes(vec![c(h, 0.0), c(h, 0.0)]);
        for t in [0.0, 0.3, 1.0, 2.5] {
            let want = (1.0 + (TAU * t / 4.0).cos()) / 4.0;
            assert!((alpha_probability_density(&psi, &s, t) - want).abs() < 1e-14);
        }
        let s3 = ClockSpectrum::new(0.2, 2.0, vec![0, 1, 3], 1.0).unwrap();
        let peak = s3.continuous_ket(0.6).scale(c(1.0 / 3f64.sqrt(), 0.0));
        assert!((alpha_probability_density(&peak, &s3, 0.6) - 3.0 / 2.0).abs() < 1e-13);
    }
}
