// SPDX-License-Identifier: MIT
//! Dense complex linear algebra over explicit tensor-product spaces.
//!
//! States and operators carry their factor dimensions so that partial traces,
//! contractions against a single factor and embeddings can be expressed by
//! factor index. Ordering is row-major: the last factor varies fastest.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::tolerance;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("factor dimensions must be positive and non-empty")]
    BadDims,
    #[error("factor index {index} out of range for {count} factors")]
    InvalidFactor { index: usize, count: usize },
    #[error("operator is not Hermitian (max |H - H^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("partial trace needs at least two factors")]
    SingleFactor,
    #[error("basis index {index} out of range for dimension {dim}")]
    BadIndex { index: usize, dim: usize },
}

pub type Result<T> = std::result::Result<T, HilbertError>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{i theta}`.
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(HilbertError::BadDims);
    }
    Ok(dims.iter().product())
}

/// Flat offsets contributed by the listed factors, in row-major order of those factors.
fn factor_offsets(dims: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let mut out = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * dims[f]);
        for &base in &out {
            for k in 0..dims[f] {
                next.push(base + k * strides[f]);
            }
        }
        out = next;
    }
    out
}

fn complement(count: usize, keep: &[usize]) -> Vec<usize> {
    (0..count).filter(|i| !keep.contains(i)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVector,
    dims: Vec<usize>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        Self::from_vector(CVector::from_vec(amps), dims)
    }

    pub fn from_vector(amps: CVector, dims: Vec<usize>) -> Result<Self> {
        let n = check_dims(&dims)?;
        if amps.len() != n {
            return Err(HilbertError::DimensionMismatch { expected: n, found: amps.len() });
        }
        Ok(Self { amps, dims })
    }

    /// Single-factor state.
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        let n = amps.len();
        Self { amps: CVector::from_vec(amps), dims: vec![n] }
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let n = check_dims(&dims)?;
        Ok(Self { amps: CVector::zeros(n), dims })
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let mut s = Self::zeros(dims)?;
        if index >= s.len() {
            return Err(HilbertError::BadIndex { index, dim: s.len() });
        }
        s.amps[index] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn amplitude(&self, i: usize) -> C64 {
        self.amps[i]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Unit-norm copy; the zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scale(C64::new(1.0 / n, 0.0))
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { amps: &self.amps * z, dims: self.dims.clone() }
    }

    fn same_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(HilbertError::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_len(other)?;
        Ok(Self { amps: &self.amps + &other.amps, dims: self.dims.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_len(other)?;
        Ok(Self { amps: &self.amps - &other.amps, dims: self.dims.clone() })
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.same_len(other)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.len() * other.len());
        for a in self.amps.iter() {
            for b in other.amps.iter() {
                amps.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { amps: CVector::from_vec(amps), dims }
    }

    /// `|self><self|`
    pub fn projector(&self) -> Operator {
        Operator { mat: &self.amps * self.amps.adjoint(), dims: self.dims.clone() }
    }

    /// Applies `<bra|` on one factor and returns the state of the remaining factors.
    pub fn contract(&self, factor: usize, bra: &StateVector) -> Result<StateVector> {
        let count = self.dims.len();
        if factor >= count {
            return Err(HilbertError::InvalidFactor { index: factor, count });
        }
        if count < 2 {
            return Err(HilbertError::SingleFactor);
        }
        if bra.len() != self.dims[factor] {
            return Err(HilbertError::DimensionMismatch { expected: self.dims[factor], found: bra.len() });
        }
        let rest = complement(count, &[factor]);
        let rest_off = factor_offsets(&self.dims, &rest);
        let f_off = factor_offsets(&self.dims, &[factor]);
        let mut out = CVector::zeros(rest_off.len());
        for (r, &ro) in rest_off.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (k, &fo) in f_off.iter().enumerate() {
                acc += bra.amps[k].conj() * self.amps[ro + fo];
            }
            out[r] = acc;
        }
        let dims = rest.iter().map(|&i| self.dims[i]).collect();
        Ok(StateVector { amps: out, dims })
    }

    /// Reduced density matrix on the listed factors, in the listed order.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<Operator> {
        let count = self.dims.len();
        validate_keep(keep, count)?;
        let traced = complement(count, keep);
        let k_off = factor_offsets(&self.dims, keep);
        let t_off = factor_offsets(&self.dims, &traced);
        let n = k_off.len();
        let mut mat = CMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let mut acc = C64::new(0.0, 0.0);
                for &t in &t_off {
                    acc += self.amps[k_off[a] + t] * self.amps[k_off[b] + t].conj();
                }
                mat[(a, b)] = acc;
                mat[(b, a)] = acc.conj();
            }
        }
        let dims = keep.iter().map(|&i| self.dims[i]).collect();
        Ok(Operator { mat, dims })
    }

    /// Reinterprets the factor structure without touching amplitudes.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        Self::from_vector(self.amps.clone(), dims)
    }
}

fn validate_keep(keep: &[usize], count: usize) -> Result<()> {
    if keep.is_empty() {
        return Err(HilbertError::BadDims);
    }
    for (i, &k) in keep.iter().enumerate() {
        if k >= count || keep[..i].contains(&k) {
            return Err(HilbertError::InvalidFactor { index: k, count });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: CMatrix,
    dims: Vec<usize>,
}

impl Operator {
    pub fn new(mat: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(HilbertError::NotSquare { rows: mat.nrows(), cols: mat.ncols() });
        }
        let n = check_dims(&dims)?;
        if n != mat.nrows() {
            return Err(HilbertError::DimensionMismatch { expected: n, found: mat.nrows() });
        }
        Ok(Self { mat, dims })
    }

    /// Single-factor operator.
    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        let n = mat.nrows();
        Self::new(mat, vec![n])
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        let n = check_dims(&dims)?;
        Ok(Self { mat: CMatrix::identity(n, n), dims })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let n = check_dims(&dims)?;
        Ok(Self { mat: CMatrix::zeros(n, n), dims })
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0)));
        Self { mat: CMatrix::from_diagonal(&d), dims: vec![values.len()] }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint(), dims: self.dims.clone() }
    }

    /// Max-abs entry of `H - H^dag`.
    pub fn hermitian_deviation(&self) -> f64 {
        max_abs(&(&self.mat - self.mat.adjoint()))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= tolerance::HERMITIAN
    }

    pub fn require_hermitian(&self) -> Result<()> {
        let deviation = self.hermitian_deviation();
        if deviation > tolerance::HERMITIAN {
            return Err(HilbertError::NotHermitian { deviation });
        }
        Ok(())
    }

    /// Max-abs deviation from `P^2 = P = P^dag`.
    pub fn projector_deviation(&self) -> f64 {
        max_abs(&(&self.mat * &self.mat - &self.mat)).max(self.hermitian_deviation())
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.mat)
    }

    fn same_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(HilbertError::DimensionMismatch { expected: self.dim(), found: n });
        }
        Ok(())
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.same_dim(state.len())?;
        Ok(StateVector { amps: &self.mat * &state.amps, dims: state.dims.clone() })
    }

    /// `self * other`
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_dim(other.dim())?;
        Ok(Self { mat: &self.mat * &other.mat, dims: self.dims.clone() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other.dim())?;
        Ok(Self { mat: &self.mat + &other.mat, dims: self.dims.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other.dim())?;
        Ok(Self { mat: &self.mat - &other.mat, dims: self.dims.clone() })
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { mat: &self.mat * z, dims: self.dims.clone() }
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.same_dim(other.dim())?;
        Ok(Self { mat: &self.mat * &other.mat - &other.mat * &self.mat, dims: self.dims.clone() })
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// `<psi|self|psi>`
    pub fn expectation(&self, state: &StateVector) -> Result<C64> {
        self.same_dim(state.len())?;
        Ok(state.amps.dotc(&(&self.mat * &state.amps)))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { mat: self.mat.kronecker(&other.mat), dims }
    }

    /// Lifts a single-factor operator to act on `position` of a product space.
    pub fn embed(&self, position: usize, dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        if position >= dims.len() {
            return Err(HilbertError::InvalidFactor { index: position, count: dims.len() });
        }
        if dims[position] != self.dim() {
            return Err(HilbertError::DimensionMismatch { expected: dims[position], found: self.dim() });
        }
        let before: usize = dims[..position].iter().product();
        let after: usize = dims[position + 1..].iter().product();
        let mat = CMatrix::identity(before, before)
            .kronecker(&self.mat)
            .kronecker(&CMatrix::identity(after, after));
        Ok(Self { mat, dims: dims.to_vec() })
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product for states and operators alike.
pub trait Tensor: Sized {
    fn kron(&self, other: &Self) -> Self;
}

impl Tensor for StateVector {
    fn kron(&self, other: &Self) -> Self {
        self.tensor(other)
    }
}

impl Tensor for Operator {
    fn kron(&self, other: &Self) -> Self {
        self.tensor(other)
    }
}

pub fn tensor_product<T: Tensor>(a: &T, b: &T) -> T {
    a.kron(b)
}

/// Traces out every factor except `keep`.
pub fn partial_trace(rho: &Operator, keep: usize) -> Result<Operator> {
    partial_trace_keep(rho, &[keep])
}

/// Traces out every factor not listed in `keep`.
pub fn partial_trace_keep(rho: &Operator, keep: &[usize]) -> Result<Operator> {
    let count = rho.dims.len();
    if count < 2 {
        return Err(HilbertError::SingleFactor);
    }
    validate_keep(keep, count)?;
    let traced = complement(count, keep);
    let k_off = factor_offsets(&rho.dims, keep);
    let t_off = factor_offsets(&rho.dims, &traced);
    let n = k_off.len();
    let mut mat = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &t_off {
                acc += rho.mat[(k_off[a] + t, k_off[b] + t)];
            }
            mat[(a, b)] = acc;
        }
    }
    let dims = keep.iter().map(|&i| rho.dims[i]).collect();
    Ok(Operator { mat, dims })
}

/// Eigendecomposition of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> StateVector {
        StateVector::from_amplitudes(self.vectors.column(k).iter().copied().collect())
    }

    /// `sum_k f(E_k) |E_k><E_k|`
    pub fn function(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let d = DVector::from_iterator(self.dim(), self.values.iter().map(|&e| f(e)));
        &self.vectors * CMatrix::from_diagonal(&d) * self.vectors.adjoint()
    }

    /// Max deviation of `V^dag V` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.vectors.adjoint() * &self.vectors - CMatrix::identity(n, n)))
    }
}

/// Hermitian eigensolve with ascending eigenvalues. Each eigenvector is phase-fixed so
/// that its first non-negligible component is real and positive.
pub fn eigh(h: &Operator) -> Result<Spectrum> {
    h.require_hermitian()?;
    // symmetrize so the solver sees an exactly Hermitian input
    let sym = (&h.mat + h.mat.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        values.push(eig.eigenvalues[k]);
        let v = eig.eigenvectors.column(k);
        let pivot = v.iter().copied().find(|z| z.norm() > 1e-8).unwrap_or(C64::new(1.0, 0.0));
        let phase = pivot.conj() / pivot.norm();
        for r in 0..n {
            vectors[(r, col)] = v[r] * phase;
        }
    }
    Ok(Spectrum { values, vectors })
}

/// Applies a scalar function to a Hermitian operator through its spectrum.
pub fn hermitian_function(h: &Operator, f: impl Fn(f64) -> C64) -> Result<Operator> {
    let spec = eigh(h)?;
    Ok(Operator { mat: spec.function(f), dims: h.dims.clone() })
}

/// `exp(-i H t / hbar)` via the spectral decomposition of `H`.
pub fn unitary_from_hamiltonian(h: &Operator, t: f64, hbar: f64) -> Result<Operator> {
    hermitian_function(h, |e| cis(-e * t / hbar))
}

/// Half the trace norm of `rho - sigma`.
pub fn trace_distance(rho: &Operator, sigma: &Operator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(HilbertError::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let diff = rho.sub(sigma)?;
    let spec = eigh(&diff)?;
    Ok(0.5 * spec.values.iter().map(|v| v.abs()).sum::<f64>())
}

/// `<bra| M |ket>` for raw amplitudes.
pub fn sandwich(bra: &StateVector, op: &Operator, ket: &StateVector) -> Result<C64> {
    let applied = op.apply(ket)?;
    bra.inner(&applied)
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unitary from the QR decomposition of a complex Gaussian matrix,
/// with the phases of `R`'s diagonal absorbed into `Q`.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..d {
        let z = r[(k, k)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, k)] *= ph;
        }
    }
    q
}

/// Uniformly random unit vector.
pub fn random_state(rng: &mut impl Rng, dims: Vec<usize>) -> Result<StateVector> {
    let n = check_dims(&dims)?;
    let amps = CVector::from_fn(n, |_, _| gaussian(rng));
    Ok(StateVector { amps, dims }.normalized())
}

/// Random Hermitian matrix with the given eigenvalues.
pub fn random_hermitian_with_spectrum(rng: &mut impl Rng, values: &[f64]) -> Operator {
    let u = random_unitary(rng, values.len());
    let d = DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0)));
    let mut mat = &u * CMatrix::from_diagonal(&d) * u.adjoint();
    mat = (&mat + mat.adjoint()) * C64::new(0.5, 0.0);
    Operator { mat, dims: vec![values.len()] }
}
