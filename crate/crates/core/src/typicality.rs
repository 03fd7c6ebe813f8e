//! Random pure states in a thin energy shell, with the environment as clock.
//!
//! The universe is an environment `C` with an integer-labelled spectrum and a small
//! system `S` given in its energy eigenbasis. Coefficients are drawn on the pairs whose
//! total energy lies in `[E, E + delta]`. The reduced state of `S` is then close to
//! canonical, the time-conditioned state follows a slightly non-local Schrödinger
//! equation, and averaging the conditioned state over one clock period reproduces the
//! partial trace over the environment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::clockwork::{ClockError, ClockSpectrum};
use crate::hilbert::{c, cis, trace_distance, CMatrix, CVector, HilbertError, Operator, StateVector, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TypicalityError {
    #[error("shell width must be finite and non-negative, got {0}")]
    BadShell(f64),
    #[error("system needs at least one level")]
    NoLevels,
    #[error("no environment level puts system level {level} inside the shell")]
    EmptyLevel { level: usize },
    #[error("environment level {env} pairs with system levels {first} and {second}")]
    Overlapping { env: usize, first: usize, second: usize },
    #[error("system level {level} is off the environment lattice by {offset:e} quanta")]
    NonCommensurate { level: usize, offset: f64 },
    #[error("expected {expected} coefficients for system level {level}, got {found}")]
    CoeffCount { level: usize, expected: usize, found: usize },
    #[error("all coefficients vanish")]
    ZeroState,
    #[error("the oscillator model needs exactly two system levels, found {0}")]
    NotTwoLevel(usize),
    #[error("level gap {gap} does not match omega = {omega}")]
    FrequencyMismatch { gap: f64, omega: f64 },
    #[error("{nodes} quadrature nodes cannot resolve labels up to {r_max}")]
    TooFewNodes { nodes: usize, r_max: u64 },
    #[error("a log-fit needs two levels with positive population")]
    Underdetermined,
    #[error(transparent)]
    Clock(#[from] ClockError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

pub type Result<T> = std::result::Result<T, TypicalityError>;

/// Total-energy window `[energy, energy + delta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyShell {
    pub energy: f64,
    pub delta: f64,
}

impl EnergyShell {
    pub fn new(energy: f64, delta: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite() && energy.is_finite()) {
            return Err(TypicalityError::BadShell(delta));
        }
        Ok(Self { energy, delta })
    }

    fn contains(&self, e: f64) -> bool {
        let slack = 1e-12 * self.energy.abs().max(1.0);
        e >= self.energy - slack && e <= self.energy + self.delta + slack
    }
}

/// Environment, system levels and the shell, with the per-level environment sets `I_j`.
#[derive(Debug, Clone)]
pub struct ShellModel {
    env: ClockSpectrum,
    levels: Vec<f64>,
    shell: EnergyShell,
    sets: Vec<Vec<usize>>,
    offsets: Vec<Vec<f64>>,
}

impl ShellModel {
    pub fn new(env: ClockSpectrum, system_levels: Vec<f64>, shell: EnergyShell) -> Result<Self> {
        if system_levels.is_empty() {
            return Err(TypicalityError::NoLevels);
        }
        let env_e = env.energies();
        let mut owner: Vec<Option<usize>> = vec![None; env.dim()];
        let mut sets = Vec::with_capacity(system_levels.len());
        let mut offsets = Vec::with_capacity(system_levels.len());
        for (j, &es) in system_levels.iter().enumerate() {
            let mut set = Vec::new();
            let mut off = Vec::new();
            for (i, &ec) in env_e.iter().enumerate() {
                if shell.contains(ec + es) {
                    if let Some(first) = owner[i] {
                        return Err(TypicalityError::Overlapping { env: i, first, second: j });
                    }
                    owner[i] = Some(j);
                    set.push(i);
                    off.push(ec + es - shell.energy);
                }
            }
            if set.is_empty() {
                return Err(TypicalityError::EmptyLevel { level: j });
            }
            sets.push(set);
            offsets.push(off);
        }
        Ok(Self { env, levels: system_levels, shell, sets, offsets })
    }

    /// Environment levels `E - E_j + n*spacing` for `n < counts[j]`, with the shell just
    /// wide enough to hold every run. System levels must sit on the spacing lattice.
    pub fn lattice(system_levels: &[f64], energy: f64, spacing: f64, counts: &[usize]) -> Result<Self> {
        if system_levels.is_empty() {
            return Err(TypicalityError::NoLevels);
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(TypicalityError::BadShell(spacing));
        }
        if counts.len() != system_levels.len() {
            return Err(TypicalityError::CoeffCount {
                level: 0,
                expected: system_levels.len(),
                found: counts.len(),
            });
        }
        let top = system_levels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut labels = Vec::new();
        for (j, (&es, &n)) in system_levels.iter().zip(counts).enumerate() {
            if n == 0 {
                return Err(TypicalityError::EmptyLevel { level: j });
            }
            let x = (top - es) / spacing;
            let base = x.round();
            if (x - base).abs() > 1e-9 * x.abs().max(1.0) {
                return Err(TypicalityError::NonCommensurate { level: j, offset: x - base });
            }
            labels.extend((0..n as u64).map(|k| (base as u64 + k, j)));
        }
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0].0 == w[1].0) {
            let (first, second) = (w[0].1.min(w[1].1), w[0].1.max(w[1].1));
            return Err(TypicalityError::Overlapping { env: w[0].0 as usize, first, second });
        }
        let shift = labels[0].0;
        let labels: Vec<u64> = labels.into_iter().map(|(r, _)| r - shift).collect();
        let widest = *counts.iter().max().expect("non-empty");
        let delta = (widest as f64 - 0.5) * spacing;
        let period = 2.0 * std::f64::consts::PI / spacing;
        let e0 = energy - top + shift as f64 * spacing;
        let env = ClockSpectrum::new(e0, period, labels, 1.0)?;
        Self::new(env, system_levels.to_vec(), EnergyShell::new(energy, delta)?)
    }

    pub fn env(&self) -> &ClockSpectrum {
        &self.env
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn shell(&self) -> EnergyShell {
        self.shell
    }

    /// Environment indices `I_j` paired with system level `j`.
    pub fn set(&self, j: usize) -> &[usize] {
        &self.sets[j]
    }

    /// Offsets `Delta_ij = E_i + E_j - E` aligned with [`ShellModel::set`].
    pub fn offsets(&self, j: usize) -> &[f64] {
        &self.offsets[j]
    }

    pub fn set_sizes(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }

    pub fn system_dim(&self) -> usize {
        self.levels.len()
    }

    pub fn system_hamiltonian(&self) -> Operator {
        Operator::from_real_diagonal(&self.levels)
    }
}

/// Level counts proportional to `exp(-beta E_j)` summing to `total` (largest remainder).
pub fn proportional_counts(levels: &[f64], beta: f64, total: usize) -> Vec<usize> {
    let w = boltzmann_weights(levels, beta);
    let raw: Vec<f64> = w.iter().map(|p| p * total as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|x| x.floor() as usize).collect();
    let mut rest = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.partial_cmp(&fa).expect("finite").then(a.cmp(&b))
    });
    for &j in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        counts[j] += 1;
        rest -= 1;
    }
    counts
}

fn boltzmann_weights(levels: &[f64], beta: f64) -> Vec<f64> {
    let low = levels.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = levels.iter().map(|e| (-beta * (e - low)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// `exp(-beta H_S)/Z` in the system energy basis.
pub fn canonical_state(levels: &[f64], beta: f64) -> Operator {
    Operator::from_real_diagonal(&boltzmann_weights(levels, beta))
}

/// Normalized shell coefficients `c_ij`, stored per system level along `I_j`.
#[derive(Debug, Clone)]
pub struct ShellSample {
    model: ShellModel,
    coeffs: Vec<Vec<C64>>,
    seed: Option<u64>,
}

/// Draws complex Gaussian coefficients with variance 1/2 per quadrature on the shell,
/// in the order system level first, then environment index.
pub fn sample_shell_state(model: &ShellModel, seed: u64) -> ShellSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.5f64.sqrt()).expect("valid");
    let mut coeffs: Vec<Vec<C64>> = model
        .sets
        .iter()
        .map(|set| set.iter().map(|_| c(normal.sample(&mut rng), normal.sample(&mut rng))).collect())
        .collect();
    let norm: f64 = coeffs.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in coeffs.iter_mut().flatten() {
        *z /= norm;
    }
    ShellSample { model: model.clone(), coeffs, seed: Some(seed) }
}

impl ShellSample {
    /// Explicit coefficients, normalized here.
    pub fn from_coefficients(model: &ShellModel, coeffs: Vec<Vec<C64>>) -> Result<Self> {
        if coeffs.len() != model.system_dim() {
            return Err(TypicalityError::CoeffCount {
                level: 0,
                expected: model.system_dim(),
                found: coeffs.len(),
            });
        }
        for (j, row) in coeffs.iter().enumerate() {
            if row.len() != model.sets[j].len() {
                return Err(TypicalityError::CoeffCount {
                    level: j,
                    expected: model.sets[j].len(),
                    found: row.len(),
                });
            }
        }
        let norm: f64 = coeffs.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(TypicalityError::ZeroState);
        }
        let coeffs = coeffs.into_iter().map(|row| row.into_iter().map(|z| z / norm).collect()).collect();
        Ok(Self { model: model.clone(), coeffs, seed: None })
    }

    pub fn model(&self) -> &ShellModel {
        &self.model
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn coeffs(&self, j: usize) -> &[C64] {
        &self.coeffs[j]
    }

    /// `sum_{i in I_j} |c_ij|^2` per system level.
    pub fn populations(&self) -> Vec<f64> {
        self.coeffs.iter().map(|row| row.iter().map(|z| z.norm_sqr()).sum()).collect()
    }

    /// `|Psi>` on environment (x) system.
    pub fn global_state(&self) -> StateVector {
        let ds = self.model.system_dim();
        let dc = self.model.env.dim();
        let mut amps = CVector::zeros(dc * ds);
        for (j, row) in self.coeffs.iter().enumerate() {
            for (&i, &z) in self.model.sets[j].iter().zip(row) {
                amps[i * ds + j] = z;
            }
        }
        StateVector::from_vector(amps, vec![dc, ds]).expect("dims")
    }
}

/// Reduced system state and its distance to the canonical state.
#[derive(Debug, Clone)]
pub struct CanonicalComparison {
    pub rho_s: Operator,
    pub canonical: Operator,
    pub trace_dist: f64,
}

/// `rho_S = sum_j (sum_i |c_ij|^2) |E_j><E_j|` against `exp(-beta H_S)/Z`.
pub fn reduced_vs_canonical(sample: &ShellSample, beta: f64) -> CanonicalComparison {
    let rho_s = Operator::from_real_diagonal(&sample.populations());
    let canonical = canonical_state(&sample.model.levels, beta);
    let trace_dist = trace_distance(&rho_s, &canonical).expect("same dimension");
    CanonicalComparison { rho_s, canonical, trace_dist }
}

/// Least-squares slope of `-ln p_j` against `E_j`, over levels with positive population.
pub fn fit_beta(levels: &[f64], populations: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .zip(populations)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&e, &p)| (e, -p.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(TypicalityError::Underdetermined);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(TypicalityError::Underdetermined);
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

/// `(1/T) int_0^T <t|Psi><Psi|t> dt`. Cross terms between different environment
/// labels average to zero over a period, so only same-index pairs survive.
pub fn temporal_trace(sample: &ShellSample) -> Operator {
    let ds = sample.model.system_dim();
    let mut by_env: Vec<Vec<(usize, C64)>> = vec![Vec::new(); sample.model.env.dim()];
    for (j, row) in sample.coeffs.iter().enumerate() {
        for (&i, &z) in sample.model.sets[j].iter().zip(row) {
            by_env[i].push((j, z));
        }
    }
    let mut mat = CMatrix::zeros(ds, ds);
    for group in &by_env {
        for &(j, a) in group {
            for &(k, b) in group {
                mat[(j, k)] += a * b.conj();
            }
        }
    }
    Operator::from_matrix(mat).expect("square")
}

/// Same average by an `nodes`-point rectangle rule over one period, which is exact
/// once `nodes > r_max`.
pub fn temporal_trace_quadrature(sample: &ShellSample, nodes: usize) -> Result<Operator> {
    let env = &sample.model.env;
    if (nodes as u64) <= env.r_max() {
        return Err(TypicalityError::TooFewNodes { nodes, r_max: env.r_max() });
    }
    let ds = sample.model.system_dim();
    let step = env.period() / nodes as f64;
    let mut mat = CMatrix::zeros(ds, ds);
    for k in 0..nodes {
        let t = k as f64 * step;
        let phi = conditioned_state(sample, t);
        mat += phi.amplitudes() * phi.amplitudes().adjoint();
    }
    Ok(Operator::from_matrix(mat * c(1.0 / nodes as f64, 0.0))?)
}

/// `<t|Psi>` with the environment time ket `sum_i e^{-i E_i t}|E_i>`.
pub fn conditioned_state(sample: &ShellSample, t: f64) -> StateVector {
    let env = &sample.model.env;
    let amps = sample
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, row)| {
            sample.model.sets[j].iter().zip(row).map(|(&i, &z)| z * cis(env.phase(i, t))).sum::<C64>()
        })
        .collect();
    StateVector::from_amplitudes(amps)
}

/// System state at clock time `t` with the global phase `e^{iEt}` removed.
#[derive(Debug, Clone)]
pub struct RelativeDynamics {
    pub t: f64,
    pub state: StateVector,
    pub alpha: Vec<C64>,
    pub norm: f64,
}

/// `alpha_j(t) = sum_i c_ij e^{i Delta_ij t}` and `|phi(t)> = sum_j alpha_j e^{-i E_j t}|E_j>`.
pub fn relative_dynamics(sample: &ShellSample, t: f64) -> RelativeDynamics {
    let hbar = sample.model.env.hbar();
    let alpha: Vec<C64> = sample
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, row)| row.iter().zip(&sample.model.offsets[j]).map(|(&z, &d)| z * cis(d * t / hbar)).sum())
        .collect();
    let amps = alpha
        .iter()
        .zip(&sample.model.levels)
        .map(|(&a, &e)| a * cis(-e * t / hbar))
        .collect();
    let norm = alpha.iter().map(|a| a.norm_sqr()).sum();
    RelativeDynamics { t, state: StateVector::from_amplitudes(amps), alpha, norm }
}

/// Non-local term `sum_j (sum_i c_ij Delta_ij e^{i Delta_ij t}) e^{-i E_j t}|E_j>`.
pub fn nonlocal_term(sample: &ShellSample, t: f64) -> StateVector {
    let hbar = sample.model.env.hbar();
    let amps = sample
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, row)| {
            let s: C64 = row
                .iter()
                .zip(&sample.model.offsets[j])
                .map(|(&z, &d)| z * d * cis(d * t / hbar))
                .sum();
            s * cis(-sample.model.levels[j] * t / hbar)
        })
        .collect();
    StateVector::from_amplitudes(amps)
}

/// Right-hand side `H_S phi - nonlocal` of `i hbar d/dt phi`.
pub fn nonlocal_rhs(sample: &ShellSample, t: f64) -> StateVector {
    let phi = relative_dynamics(sample, t).state;
    let h_phi = sample.model.system_hamiltonian().apply(&phi).expect("dims");
    h_phi.sub(&nonlocal_term(sample, t)).expect("dims")
}

/// `|| phi(t) - U_S(t - t0) phi(t0) ||`.
pub fn schrodinger_deviation(sample: &ShellSample, t0: f64, t: f64) -> f64 {
    let hbar = sample.model.env.hbar();
    let a = relative_dynamics(sample, t0).state;
    let b = relative_dynamics(sample, t).state;
    let evolved = StateVector::from_amplitudes(
        a.amplitudes()
            .iter()
            .zip(&sample.model.levels)
            .map(|(&z, &e)| z * cis(-e * (t - t0) / hbar))
            .collect(),
    );
    b.distance(&evolved).expect("dims")
}

fn require_oscillator(sample: &ShellSample, omega: f64) -> Result<()> {
    let levels = &sample.model.levels;
    if levels.len() != 2 {
        return Err(TypicalityError::NotTwoLevel(levels.len()));
    }
    let gap = levels[1] - levels[0];
    if (gap - omega).abs() > 1e-9 * omega.abs().max(1.0) {
        return Err(TypicalityError::FrequencyMismatch { gap, omega });
    }
    Ok(())
}

/// Position operator `sqrt(1/(2 m omega)) (a + a^dag)` on the two lowest levels.
pub fn oscillator_position(mass: f64, omega: f64) -> Operator {
    let x = (1.0 / (2.0 * mass * omega)).sqrt();
    let mut mat = CMatrix::zeros(2, 2);
    mat[(0, 1)] = c(x, 0.0);
    mat[(1, 0)] = c(x, 0.0);
    Operator::from_matrix(mat).expect("square")
}

/// `<phi(t)|X|phi(t)>` on the unnormalized conditioned state.
pub fn oscillator_x_expectation(sample: &ShellSample, mass: f64, omega: f64, t: f64) -> Result<f64> {
    require_oscillator(sample, omega)?;
    let phi = relative_dynamics(sample, t).state;
    Ok(oscillator_position(mass, omega).expectation(&phi)?.re)
}

/// Double sum `sqrt(2/(m omega)) sum_ik |c_i0||c_k1| cos((omega + Delta_i0 - Delta_k1) t - dphi_ik)`.
pub fn oscillator_x_double_sum(sample: &ShellSample, mass: f64, omega: f64, t: f64) -> Result<f64> {
    require_oscillator(sample, omega)?;
    let (c0, c1) = (&sample.coeffs[0], &sample.coeffs[1]);
    let (d0, d1) = (&sample.model.offsets[0], &sample.model.offsets[1]);
    let mut acc = 0.0;
    for (a, &da) in c0.iter().zip(d0) {
        for (b, &db) in c1.iter().zip(d1) {
            let dphi = b.arg() - a.arg();
            acc += a.norm() * b.norm() * ((omega + da - db) * t - dphi).cos();
        }
    }
    Ok((2.0 / (mass * omega)).sqrt() * acc)
}

/// Expansion to first order in `t (Delta_i0 - Delta_k1)` around `t = 0`.
pub fn oscillator_x_first_order(sample: &ShellSample, mass: f64, omega: f64, t: f64) -> Result<f64> {
    require_oscillator(sample, omega)?;
    let start = relative_dynamics(sample, 0.0);
    let (a0, a1) = (start.alpha[0], start.alpha[1]);
    let lead = a0.norm() * a1.norm() * (omega * t - (a1.arg() - a0.arg())).cos();
    let (c0, c1) = (&sample.coeffs[0], &sample.coeffs[1]);
    let (d0, d1) = (&sample.model.offsets[0], &sample.model.offsets[1]);
    let mut corr = 0.0;
    for (a, &da) in c0.iter().zip(d0) {
        for (b, &db) in c1.iter().zip(d1) {
            let dphi = b.arg() - a.arg();
            corr += a.norm() * b.norm() * t * (da - db) * (omega * t - dphi).sin();
        }
    }
    Ok((2.0 / (mass * omega)).sqrt() * (lead - corr))
}

/// Oscillation amplitude `sqrt(2/(m omega)) |alpha_0(0)||alpha_1(0)|`.
pub fn oscillator_amplitude(sample: &ShellSample, mass: f64, omega: f64) -> Result<f64> {
    require_oscillator(sample, omega)?;
    let start = relative_dynamics(sample, 0.0);
    Ok((2.0 / (mass * omega)).sqrt() * start.alpha[0].norm() * start.alpha[1].norm())
}
