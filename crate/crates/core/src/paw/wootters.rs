//! Two precessing spins as clock and system.
//!
//! Averaging `|x+>|x+>` over a full precession leaves only the `m1 + m2 = 0` terms,
//! giving a stationary state annihilated by `S_z (x) 1 + 1 (x) S_z`. Finding the clock
//! spin along `+x` then predicts the system spin along `+x` with a probability that is
//! 1 for spin 1/2 and decreases toward `sqrt(3)/2` as the spin grows.

use crate::hilbert::{c, eigh, CMatrix, CVector, Operator, StateVector};

/// Spin `s = twice_s / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Spin {
    pub twice_s: u32,
}

impl Spin {
    pub fn new(twice_s: u32) -> Self {
        assert!(twice_s >= 1, "spin must be positive");
        Self { twice_s }
    }

    pub fn value(&self) -> f64 {
        self.twice_s as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_s as usize + 1
    }

    /// `m` for basis index `k`, ordered from `-s` upward.
    pub fn m(&self, k: usize) -> f64 {
        k as f64 - self.value()
    }

    pub fn sz(&self) -> Operator {
        let v: Vec<f64> = (0..self.dim()).map(|k| self.m(k)).collect();
        Operator::from_real_diagonal(&v)
    }

    pub fn sx(&self) -> Operator {
        let n = self.dim();
        let s = self.value();
        let mut mat = CMatrix::zeros(n, n);
        for k in 0..n - 1 {
            let m = self.m(k);
            // <m+1| S_+ |m>
            let v = 0.5 * (s * (s + 1.0) - m * (m + 1.0)).sqrt();
            mat[(k + 1, k)] = c(v, 0.0);
            mat[(k, k + 1)] = c(v, 0.0);
        }
        Operator::from_matrix(mat).expect("square")
    }

    /// Amplitudes of `|S_x = +s>` in the `S_z` basis: `sqrt(C(2s, s+m))/2^s`.
    pub fn x_up_amplitudes(&self) -> Vec<f64> {
        let n = self.twice_s as usize;
        let mut w = 0.5f64.powi(n as i32);
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..=n {
            out.push(w.sqrt());
            w *= (n - k) as f64 / (k + 1) as f64;
        }
        out
    }

    /// `|S_x = +s>` by diagonalizing `S_x`.
    pub fn x_up_state(&self) -> StateVector {
        let spec = eigh(&self.sx()).expect("Hermitian");
        spec.vector(self.dim() - 1)
    }
}

/// Normalized `sum_m x_m x_{-m} |m>|-m>` on the two spins.
pub fn stationary_state(spin: Spin) -> StateVector {
    let x = spin.x_up_state();
    let n = spin.dim();
    let mut amps = CVector::zeros(n * n);
    for k in 0..n {
        let partner = n - 1 - k;
        amps[k * n + partner] = x.amplitude(k) * x.amplitude(partner);
    }
    StateVector::from_vector(amps, vec![n, n]).expect("dims").normalized()
}

/// `||(S_z (x) 1 + 1 (x) S_z)|Psi>||`, evaluated on the diagonal without a dense matrix.
pub fn constraint_residual(spin: Spin, psi: &StateVector) -> f64 {
    let n = spin.dim();
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            let e = spin.m(a) + spin.m(b);
            acc += (psi.amplitude(a * n + b) * e).norm_sqr();
        }
    }
    acc.sqrt()
}

/// `P(system x+ | clock x+)` from the explicit two-spin state.
pub fn agreement(spin: Spin) -> f64 {
    let psi = stationary_state(spin);
    let x = spin.x_up_state();
    let phi = psi.contract(0, &x).expect("clock factor");
    phi.inner(&x).expect("dims").norm_sqr() / phi.norm_sqr()
}

/// `(sum a_m^4)^2 / sum a_m^6` with `a_m` the binomial amplitudes.
pub fn agreement_closed_form(spin: Spin) -> f64 {
    let a = spin.x_up_amplitudes();
    let s4: f64 = a.iter().map(|v| v.powi(4)).sum();
    let s6: f64 = a.iter().map(|v| v.powi(6)).sum();
    s4 * s4 / s6
}

/// Large-spin limit of the agreement.
pub fn agreement_limit() -> f64 {
    3f64.sqrt() / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_half_is_singlet_type() {
        let s = Spin::new(1);
        let psi = stationary_state(s);
        let a = 1.0 / 2f64.sqrt();
        assert!((psi.amplitude(1).re - a).abs() < 1e-15);
        assert!((psi.amplitude(2).re - a).abs() < 1e-15);
        assert!(psi.amplitude(0).norm() + psi.amplitude(3).norm() < 1e-15);
        assert!(constraint_residual(s, &psi) < 1e-15);
        assert!((agreement(s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn x_up_matches_binomial() {
        for twice in [1, 2, 5, 12] {
            let s = Spin::new(twice);
            let x = s.x_up_state();
            for (k, a) in s.x_up_amplitudes().into_iter().enumerate() {
                assert!((x.amplitude(k) - c(a, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn explicit_matches_closed_form() {
        for twice in 1..=20 {
            let s = Spin::new(twice);
            assert!((agreement(s) - agreement_closed_form(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn spin_one_value() {
        // a = (1/2, 1/sqrt2, 1/2): sum a^4 = 3/8, sum a^6 = 5/32
        assert!((agreement_closed_form(Spin::new(2)) - 0.9).abs() < 1e-15);
    }
}
