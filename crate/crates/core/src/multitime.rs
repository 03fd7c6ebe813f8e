//! Two-time measurement statistics inside a constrained universe.
//!
//! Two routes are implemented. The external-time average conditions on a first joint
//! clock/system outcome and averages the Heisenberg-evolved projectors over the external
//! time; over one period of a commensurate spectrum this is exactly a pinching onto
//! total-energy sectors. The memory construction writes the measurement record into
//! ancilla memories, builds the piecewise global state slice by slice on an orthogonal
//! clock and reads the conditional probability as a ratio of norms.

use thiserror::Error;

use crate::clockwork::{complement_family, ClockError};
use crate::hilbert::{unitary_from_hamiltonian, CMatrix, CVector, HilbertError, StateVector, C64};
use crate::paw::ConstrainedUniverse;
use crate::spacetime::{SpacetimeError, SpacetimeUniverse};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultitimeError {
    #[error("second time {t2} precedes first time {t1}")]
    TimeOrder { t1: f64, t2: f64 },
    #[error("outcome vectors are not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("outcome index {index} out of range for {count} outcomes")]
    BadOutcome { index: usize, count: usize },
    #[error("outcome basis has dimension {found}, system has {expected}")]
    BasisDimension { expected: usize, found: usize },
    #[error("memory construction needs orthogonal time states (equally spaced clock with D = d)")]
    PovmClock,
    #[error("time {t} is not on the clock grid of spacing {step}")]
    OffGrid { t: f64, step: f64 },
    #[error("memory of dimension {dim} cannot record {outcomes} outcomes (ready index {ready})")]
    MemoryTooSmall { dim: usize, outcomes: usize, ready: usize },
    #[error("conditioning event has zero probability")]
    ZeroProbability,
    #[error("spacetime two-time statistics are implemented for one spatial axis, got {0}")]
    SpatialAxes(usize),
    #[error("{points} position points cannot resolve {dim} momenta")]
    TooFewPoints { points: usize, dim: usize },
    #[error("position index {index} out of range for {points} points")]
    PositionIndex { index: usize, points: usize },
    #[error(transparent)]
    Spacetime(#[from] SpacetimeError),
    #[error(transparent)]
    Clock(#[from] ClockError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

pub type Result<T> = std::result::Result<T, MultitimeError>;

/// Orthonormal set of rank-one outcomes on the measured system.
#[derive(Debug, Clone)]
pub struct OutcomeBasis {
    vectors: Vec<StateVector>,
}

impl OutcomeBasis {
    pub fn new(vectors: Vec<StateVector>) -> Result<Self> {
        let mut deviation = 0.0f64;
        for (i, a) in vectors.iter().enumerate() {
            for (j, b) in vectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((a.inner(b)? - C64::new(want, 0.0)).norm());
            }
        }
        if deviation > 1e-10 {
            return Err(MultitimeError::NotOrthonormal { deviation });
        }
        Ok(Self { vectors })
    }

    /// Columns of a unitary matrix.
    pub fn from_columns(m: &CMatrix) -> Result<Self> {
        Self::new((0..m.ncols()).map(|k| StateVector::from_amplitudes(m.column(k).iter().copied().collect())).collect())
    }

    pub fn computational(d: usize) -> Self {
        Self { vectors: (0..d).map(|k| StateVector::basis(vec![d], k).expect("index")).collect() }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, k: usize) -> &StateVector {
        &self.vectors[k]
    }

    fn check(&self, index: usize, dim: usize) -> Result<()> {
        if let Some(v) = self.vectors.first() {
            if v.len() != dim {
                return Err(MultitimeError::BasisDimension { expected: dim, found: v.len() });
            }
        }
        if index >= self.len() {
            return Err(MultitimeError::BadOutcome { index, count: self.len() });
        }
        Ok(())
    }
}

/// Outcome `first.vector(a)` at clock time `t1`, then `second.vector(b)` at `t2`.
#[derive(Debug, Clone)]
pub struct TwoTimeQuery {
    pub t1: f64,
    pub t2: f64,
    pub first: OutcomeBasis,
    pub a: usize,
    pub second: OutcomeBasis,
    pub b: usize,
}

impl TwoTimeQuery {
    fn validate(&self, dim: usize) -> Result<()> {
        if self.t2 < self.t1 {
            return Err(MultitimeError::TimeOrder { t1: self.t1, t2: self.t2 });
        }
        self.first.check(self.a, dim)?;
        self.second.check(self.b, dim)
    }
}

/// `|<b| U_S(t2 - t1) |a>|^2`
pub fn direct_two_time(u: &ConstrainedUniverse, q: &TwoTimeQuery) -> Result<f64> {
    q.validate(u.system_dim())?;
    let uu = unitary_from_hamiltonian(u.system_h(), q.t2 - q.t1, u.hbar())?;
    let evolved = uu.apply(q.first.vector(q.a))?;
    Ok(q.second.vector(q.b).inner(&evolved)?.norm_sqr())
}

/// Which total-energy sectors survive the external-time average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExternalAverage {
    /// Keep only the sector of the constraint, `H = 0`.
    #[default]
    ConstraintSector,
    /// Keep every sector of the total Hamiltonian. With a finite clock the edge sectors
    /// hold only part of the pairings, so the result deviates from the propagator.
    AllSectors,
}

/// Components of `|t~>/sqrt(d_C) (x) |s>` in the clock-energy (x) system-eigen basis.
fn product_components(u: &ConstrainedUniverse, t: f64, s: &StateVector) -> (Vec<C64>, Vec<C64>) {
    let clock = u.clock();
    let norm = 1.0 / (clock.dim() as f64).sqrt();
    let ket = clock.continuous_ket(t);
    let cl: Vec<C64> = (0..clock.dim()).map(|i| ket.amplitude(i) * norm).collect();
    let sys = u.eigenbasis().adjoint() * s.amplitudes();
    (cl, sys.iter().copied().collect())
}

/// External-time averaged two-time conditional probability.
pub fn gppt_two_time(u: &ConstrainedUniverse, q: &TwoTimeQuery, average: ExternalAverage) -> Result<f64> {
    q.validate(u.system_dim())?;
    let (dc, ds) = (u.clock().dim(), u.system_dim());
    let labels = u.clock().labels();
    let sector = |i: usize, k: usize| labels[i] as i64 - labels[u.pairing()[k]] as i64;

    // first projection: Pi_{a,t1} |Psi> = |t1, a> <t1, a|Psi>
    let (c1, s1) = product_components(u, q.t1, q.first.vector(q.a));
    let ket1 = u.clock().continuous_ket(q.t1).scale(C64::new(1.0 / (dc as f64).sqrt(), 0.0));
    let weight = q.first.vector(q.a).inner(&u.global_state().contract(0, &ket1)?)?;
    if weight.norm_sqr() < 1e-28 {
        return Err(MultitimeError::ZeroProbability);
    }
    let v = |i: usize, k: usize| c1[i] * s1[k] * weight;

    let (c2, s2) = product_components(u, q.t2, q.second.vector(q.b));
    let mut sectors: Vec<i64> = (0..dc).flat_map(|i| (0..ds).map(move |k| (i, k))).map(|(i, k)| sector(i, k)).collect();
    sectors.sort_unstable();
    sectors.dedup();
    if average == ExternalAverage::ConstraintSector {
        sectors.retain(|&e| e == 0);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &e in &sectors {
        let mut amp = C64::new(0.0, 0.0);
        let mut per_k = vec![C64::new(0.0, 0.0); ds];
        for i in 0..dc {
            for k in 0..ds {
                if sector(i, k) != e {
                    continue;
                }
                let x = v(i, k);
                amp += (c2[i] * s2[k]).conj() * x;
                per_k[k] += c2[i].conj() * x;
            }
        }
        num += amp.norm_sqr();
        den += per_k.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    if den < 1e-300 {
        return Err(MultitimeError::ZeroProbability);
    }
    Ok(num / den)
}

/// External-time averaged single-time probability `<Psi|Pi_{a,t}|Psi> / <Psi|Pi_t|Psi>`.
pub fn gppt_single(u: &ConstrainedUniverse, t: f64, outcome: &StateVector) -> Result<f64> {
    let ket = u.clock().continuous_ket(t);
    let cond = u.global_state().contract(0, &ket)?;
    let total = cond.norm_sqr();
    if total < 1e-300 {
        return Err(MultitimeError::ZeroProbability);
    }
    Ok(outcome.inner(&cond)?.norm_sqr() / total)
}

/// Dimensions and ready states of the two memories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryLayout {
    pub memory_dims: [usize; 2],
    pub ready: [usize; 2],
}

impl MemoryLayout {
    /// Memories just large enough for `outcomes` results, ready in outcome 0.
    pub fn minimal(outcomes: usize) -> Self {
        Self { memory_dims: [outcomes; 2], ready: [0; 2] }
    }
}

/// Piecewise global state on clock (x) system (x) memory 1 (x) memory 2.
#[derive(Debug, Clone)]
pub struct MemoryUniverse {
    state: StateVector,
    times: Vec<StateVector>,
    step: f64,
    slices: usize,
    m1: usize,
    m2: usize,
}

impl MemoryUniverse {
    pub fn global_state(&self) -> &StateVector {
        &self.state
    }

    pub fn slice_times(&self) -> Vec<f64> {
        (0..self.slices).map(|m| m as f64 * self.step).collect()
    }

    pub fn measurement_slices(&self) -> (usize, usize) {
        (self.m1, self.m2)
    }

    /// `sqrt(d_C) <t_m|Psi>` on system (x) memories.
    pub fn slice(&self, m: usize) -> StateVector {
        let scale = C64::new((self.slices as f64).sqrt(), 0.0);
        self.state.contract(0, &self.times[m]).expect("clock factor").scale(scale)
    }

    /// `|| (sqrt(d_C) <t_m| (x) <a|_{M1}) Psi ||^2`: probability that memory 1 reads `a` at slice `m`.
    pub fn first_memory_probability(&self, m: usize, a: usize) -> f64 {
        let s = self.slice(m);
        let dims = s.dims().to_vec();
        let bra = StateVector::basis(vec![dims[1]], a).expect("index");
        s.contract(1, &bra).expect("memory factor").norm_sqr()
    }

    /// `(<a|_{M1} <b|_{M2})` applied to a slice; the remaining system state.
    fn record(&self, m: usize, a: usize, b: Option<usize>) -> StateVector {
        let s = self.slice(m);
        let dims = s.dims().to_vec();
        let after_first = s.contract(1, &StateVector::basis(vec![dims[1]], a).expect("index")).expect("factor");
        match b {
            Some(b) => after_first.contract(1, &StateVector::basis(vec![dims[2]], b).expect("index")).expect("factor"),
            None => after_first,
        }
    }
}

fn grid_index(t: f64, step: f64, slices: usize) -> Result<usize> {
    let x = t / step;
    let m = x.round();
    if (x - m).abs() > 1e-9 || m < 0.0 || m as usize >= slices {
        return Err(MultitimeError::OffGrid { t, step });
    }
    Ok(m as usize)
}

/// Builds the memory universe for a measurement in `first` at `t1` and in `second` at `t2`.
/// Clock slices are `t_m = m T/d`; both times must be slices of one period.
pub fn memory_universe(u: &ConstrainedUniverse, q: &TwoTimeQuery, layout: MemoryLayout) -> Result<MemoryUniverse> {
    q.validate(u.system_dim())?;
    let clock = u.clock();
    if !clock.is_equally_spaced() {
        return Err(MultitimeError::PovmClock);
    }
    let dc = clock.dim();
    let ds = u.system_dim();
    for (basis, k) in [(&q.first, 0usize), (&q.second, 1usize)] {
        let dim = layout.memory_dims[k];
        if dim < basis.len() || layout.ready[k] >= dim {
            return Err(MultitimeError::MemoryTooSmall { dim, outcomes: basis.len(), ready: layout.ready[k] });
        }
    }
    let step = clock.period() / dc as f64;
    let m1 = grid_index(q.t1, step, dc)?;
    let m2 = grid_index(q.t2, step, dc)?;
    let family = complement_family(clock, dc, 0.0)?;
    let [d1, d2] = layout.memory_dims;
    let hbar = u.hbar();
    let h = u.system_h();
    let t_at = |m: usize| m as f64 * step;
    let phi0 = u.relative_state(0.0).state;
    let phi1 = u.relative_state(t_at(m1)).state;
    let u12 = unitary_from_hamiltonian(h, t_at(m2) - t_at(m1), hbar)?;

    let mut global = CVector::zeros(dc * ds * d1 * d2);
    let put = |g: &mut CVector, clock_state: &StateVector, sys: &StateVector, r1: usize, r2: usize| {
        for i in 0..dc {
            let ci = clock_state.amplitude(i);
            for s in 0..ds {
                g[((i * ds + s) * d1 + r1) * d2 + r2] += ci * sys.amplitude(s);
            }
        }
    };
    for m in 0..dc {
        let tm = family.state(m).scale(C64::new(1.0 / (dc as f64).sqrt(), 0.0));
        if m < m1 {
            let sys = unitary_from_hamiltonian(h, t_at(m), hbar)?.apply(&phi0)?;
            put(&mut global, &tm, &sys, layout.ready[0], layout.ready[1]);
        } else if m < m2 {
            let um = unitary_from_hamiltonian(h, t_at(m) - t_at(m1), hbar)?;
            for a in 0..q.first.len() {
                let va = q.first.vector(a);
                let amp = va.inner(&phi1)?;
                let sys = um.apply(va)?.scale(amp);
                put(&mut global, &tm, &sys, a, layout.ready[1]);
            }
        } else {
            let um = unitary_from_hamiltonian(h, t_at(m) - t_at(m2), hbar)?;
            for a in 0..q.first.len() {
                let va = q.first.vector(a);
                let amp_a = va.inner(&phi1)?;
                let evolved_a = u12.apply(va)?;
                for b in 0..q.second.len() {
                    let vb = q.second.vector(b);
                    let amp = vb.inner(&evolved_a)? * amp_a;
                    let sys = um.apply(vb)?.scale(amp);
                    put(&mut global, &tm, &sys, a, b);
                }
            }
        }
    }
    let state = StateVector::from_vector(global, vec![dc, ds, d1, d2])?;
    Ok(MemoryUniverse { state, times: family.states().to_vec(), step, slices: dc, m1, m2 })
}

/// Memory-record conditional probability
/// `||(<t2| <a|_{M1} <b|_{M2}) Psi||^2 / ||(<t1| <a|_{M1}) Psi||^2`.
pub fn glm_two_time(u: &ConstrainedUniverse, q: &TwoTimeQuery, layout: MemoryLayout) -> Result<f64> {
    let mu = memory_universe(u, q, layout)?;
    let num = mu.record(mu.m2, q.a, Some(q.b)).norm_sqr();
    let den = mu.record(mu.m1, q.a, None).norm_sqr();
    if den < 1e-28 {
        return Err(MultitimeError::ZeroProbability);
    }
    Ok(num / den)
}

/// Numbers of position points on the frame and system grids, origin at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PositionPoints {
    pub frame: usize,
    pub system: usize,
}

/// Clock reading `t` with frame at grid point `x` and system at grid point `y`
/// (indices per axis).
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeEvent {
    pub t: f64,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

fn check_points(su: &SpacetimeUniverse, points: PositionPoints, ev: &SpacetimeEvent) -> Result<()> {
    let n = su.axes().len();
    if ev.x.len() != n || ev.y.len() != n {
        return Err(SpacetimeError::Coordinates { expected: n, found: ev.x.len().min(ev.y.len()) }.into());
    }
    for a in su.axes() {
        for (pts, dim) in [(points.frame, a.frame.dim()), (points.system, a.system.dim())] {
            if pts < dim {
                return Err(MultitimeError::TooFewPoints { points: pts, dim });
            }
        }
    }
    for (&index, pts) in ev.x.iter().map(|i| (i, points.frame)).chain(ev.y.iter().map(|i| (i, points.system))) {
        if index >= pts {
            return Err(MultitimeError::PositionIndex { index, points: pts });
        }
    }
    Ok(())
}

/// Normalized product of per-axis position states `|x_j>` on `count`-point grids.
fn position_product(grids: &[crate::spacetime::MomentumGrid], idx: &[usize], count: usize) -> StateVector {
    let mut ket: Option<StateVector> = None;
    for (g, &j) in grids.iter().zip(idx) {
        let s = g.position_state(j as f64 * g.length() / count as f64);
        ket = Some(match ket {
            None => s,
            Some(k) => k.tensor(&s),
        });
    }
    let ket = ket.expect("at least one axis");
    let n = ket.len();
    ket.with_dims(vec![n]).expect("flatten")
}

/// External-time averaged `P(x_j on R, y_l on S | t on C)` with the position POVM
/// elements `(d/D)|x_j><x_j|`, computed from the global state.
pub fn spacetime_gppt_single(su: &SpacetimeUniverse, points: PositionPoints, ev: &SpacetimeEvent) -> Result<f64> {
    check_points(su, points, ev)?;
    let clock = su.clock();
    let ket = clock.continuous_ket(ev.t).scale(C64::new(1.0 / (clock.dim() as f64).sqrt(), 0.0));
    let cond = su.global_state().contract(0, &ket)?;
    let total = cond.norm_sqr();
    if total < 1e-300 {
        return Err(MultitimeError::ZeroProbability);
    }
    let frames: Vec<_> = su.axes().iter().map(|a| a.frame).collect();
    let systems: Vec<_> = su.axes().iter().map(|a| a.system).collect();
    let on_system = cond.contract(0, &position_product(&frames, &ev.x, points.frame))?;
    let amp = position_product(&systems, &ev.y, points.system).inner(&on_system)?;
    let weight = (su.frame_dim() as f64 / points.frame.pow(frames.len() as u32) as f64)
        * (su.system_dim() as f64 / points.system.pow(systems.len() as u32) as f64);
    Ok(weight * amp.norm_sqr() / total)
}

/// `|<x', y'| Pi_0 U(t' - t) Pi_0 |x, y>|^2` on a one-axis universe, with normalized
/// position states, `Pi_0` the span of the paired modes `|-p_k>|p_k>` and `U` evolving
/// each pair with its clock energy.
pub fn spacetime_two_time(
    su: &SpacetimeUniverse,
    points: PositionPoints,
    first: &SpacetimeEvent,
    second: &SpacetimeEvent,
) -> Result<f64> {
    if su.axes().len() != 1 {
        return Err(MultitimeError::SpatialAxes(su.axes().len()));
    }
    if second.t < first.t {
        return Err(MultitimeError::TimeOrder { t1: first.t, t2: second.t });
    }
    check_points(su, points, first)?;
    check_points(su, points, second)?;
    let axis = su.axes()[0];
    let ket = |ev: &SpacetimeEvent| {
        let x = axis.frame.position_state(ev.x[0] as f64 * axis.frame.length() / points.frame as f64);
        let y = axis.system.position_state(ev.y[0] as f64 * axis.system.length() / points.system as f64);
        x.tensor(&y)
    };
    let (start, end) = (ket(first), ket(second));
    let ds = axis.system.dim();
    let dt = second.t - first.t;
    let mut evolved = CVector::zeros(start.len());
    for (k, mode) in su.modes().iter().enumerate() {
        let idx = mode.frame_index[0] * ds + k;
        evolved[idx] = start.amplitude(idx) * crate::hilbert::cis(-su.clock_epsilon(k) * dt);
    }
    let evolved = StateVector::from_vector(evolved, start.dims().to_vec())?;
    Ok(end.inner(&evolved)?.norm_sqr())
}
