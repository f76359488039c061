//! Dense complex-matrix primitives for small density matrices.
//!
//! Everything here works for arbitrary dimension, but the crate only ever
//! builds 2×2 (dimer), 3×3 (detector) and 6×6 (dimer ⊗ detector) operators.
//! Storage is row-major.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Entrywise anti-Hermitian defect accepted by [`hermitian_eigenvalues`].
pub const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix of dimension {dim} needs {} entries, got {len}", dim * dim)]
    Malformed { dim: usize, len: usize },
    #[error("matrix is not Hermitian (max |A - A^dag| = {defect:e})")]
    NotHermitian { defect: f64 },
}

pub type QuantumResult<T> = Result<T, QuantumError>;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_entries(dim: usize, data: Vec<C64>) -> QuantumResult<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(QuantumError::Malformed { dim, len: data.len() });
        }
        Ok(Self { dim, data })
    }

    /// Real-valued matrix from row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> QuantumResult<Self> {
        Self::from_entries(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &v) in diag.iter().enumerate() {
            m[(k, k)] = v;
        }
        m
    }

    pub fn real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diagonal(&d)
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn projector(dim: usize, k: usize) -> Self {
        Self::outer_basis(dim, k, k)
    }

    /// `|i⟩⟨j|` in dimension `dim`.
    pub fn outer_basis(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) ket.
    pub fn outer(ket: &[C64]) -> Self {
        let dim = ket.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = ket[i] * ket[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff on mismatched dimensions");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `max_ij |A_ij - conj(A_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// Number of entries with modulus above `tol`.
    pub fn count_nonzero(&self, tol: f64) -> usize {
        self.data.iter().filter(|z| z.norm() > tol).count()
    }

    fn check_same_dim(&self, other: &Self) -> QuantumResult<()> {
        if self.dim != other.dim {
            return Err(QuantumError::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "adding matrices of different dimension");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "subtracting matrices of different dimension");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "multiplying matrices of different dimension");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// A density matrix with an optional label.
///
/// Construction through [`DensityMatrix::new`] checks the physical invariants
/// (Hermitian, unit trace, positive semidefinite) at [`Tolerances::default`].
/// [`DensityMatrix::new_unchecked`] wraps any matrix, which is what the
/// diagnostics path and the integrator use.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    label: Option<String>,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, InvalidState> {
        let rho = Self::new_unchecked(matrix);
        let diag = validate_density_matrix(&rho, &Tolerances::default());
        if diag.is_valid() {
            Ok(rho)
        } else {
            Err(InvalidState(diag))
        }
    }

    pub fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new_unchecked(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    /// Projector onto a normalized ket.
    pub fn pure(ket: &[C64]) -> Self {
        let norm2: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        Self::new_unchecked(ComplexMatrix::outer(ket).scale_real(1.0 / norm2))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Real part of the diagonal element `k`.
    pub fn population(&self, k: usize) -> f64 {
        self.matrix[(k, k)].re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.matrix[(i, j)] * self.matrix[(j, i)]).re;
            }
        }
        acc
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid density matrix: {0}")]
pub struct InvalidState(pub Diagnostics);

/// Bipartite layout of the full Hilbert space.
///
/// System-major ordering: full index = `system_index * detector_dim + detector_index`.
/// For the dimer ⊗ detector space that gives `|1g⟩,|1e⟩,|1r⟩,|2g⟩,|2e⟩,|2r⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HilbertLayout {
    pub system_dim: usize,
    pub detector_dim: usize,
}

impl HilbertLayout {
    pub const DIMER_DETECTOR: HilbertLayout = HilbertLayout { system_dim: 2, detector_dim: 3 };

    pub fn full_dim(&self) -> usize {
        self.system_dim * self.detector_dim
    }

    pub fn index(&self, system: usize, detector: usize) -> usize {
        system * self.detector_dim + detector
    }
}

impl Default for HilbertLayout {
    fn default() -> Self {
        Self::DIMER_DETECTOR
    }
}

/// Kronecker product `A ⊗ B` with `A` as the major factor.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim(), b.dim());
    let mut out = ComplexMatrix::zeros(na * nb);
    for ia in 0..na {
        for ja in 0..na {
            let x = a[(ia, ja)];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for ib in 0..nb {
                for jb in 0..nb {
                    out[(ia * nb + ib, ja * nb + jb)] = x * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Trace over the detector (minor) factor of a bipartite matrix.
pub fn partial_trace_matrix(m: &ComplexMatrix, layout: &HilbertLayout) -> QuantumResult<ComplexMatrix> {
    if m.dim() != layout.full_dim() {
        return Err(QuantumError::DimensionMismatch { expected: layout.full_dim(), found: m.dim() });
    }
    let (ns, nd) = (layout.system_dim, layout.detector_dim);
    let mut out = ComplexMatrix::zeros(ns);
    for a in 0..ns {
        for b in 0..ns {
            out[(a, b)] = (0..nd).map(|k| m[(a * nd + k, b * nd + k)]).sum();
        }
    }
    Ok(out)
}

/// `Tr_D ρ`, the reduced state of the system factor.
pub fn partial_trace_detector(rho_full: &DensityMatrix, layout: &HilbertLayout) -> QuantumResult<DensityMatrix> {
    partial_trace_matrix(rho_full.matrix(), layout).map(DensityMatrix::new_unchecked)
}

/// Real eigenvalues of a Hermitian matrix, ascending.
///
/// Inputs whose anti-Hermitian defect exceeds [`HERMITICITY_TOL`] are
/// rejected rather than symmetrized.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> QuantumResult<Vec<f64>> {
    let defect = a.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(QuantumError::NotHermitian { defect });
    }
    Ok(eigenvalues_of_hermitian_part(a))
}

fn eigenvalues_of_hermitian_part(a: &ComplexMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = a.hermitian_part().to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `½ Tr|P − Q|` evaluated as half the sum of absolute eigenvalues of `P − Q`.
pub fn trace_distance_general(p: &DensityMatrix, q: &DensityMatrix) -> QuantumResult<f64> {
    p.matrix().check_same_dim(q.matrix())?;
    let diff = p.matrix() - q.matrix();
    let ev = hermitian_eigenvalues(&diff)?;
    Ok(0.5 * ev.iter().map(|x| x.abs()).sum::<f64>())
}

/// Closed form for unit-trace 2×2 states: `√((P₁₁−Q₁₁)² + |P₂₁−Q₂₁|²)`.
pub fn trace_distance_two_level(p: &DensityMatrix, q: &DensityMatrix) -> QuantumResult<f64> {
    for m in [p, q] {
        if m.dim() != 2 {
            return Err(QuantumError::DimensionMismatch { expected: 2, found: m.dim() });
        }
    }
    let (p, q) = (p.matrix(), q.matrix());
    let d11 = (p[(0, 0)] - q[(0, 0)]).re;
    let d21 = p[(1, 0)] - q[(1, 0)];
    Ok((d11 * d11 + d21.norm_sqr()).sqrt())
}

/// Tolerances for the density-matrix invariants.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub trace: f64,
    pub positivity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { hermiticity: 1e-10, trace: 1e-8, positivity: 1e-8 }
    }
}

/// Report produced by [`validate_density_matrix`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Diagnostics {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub hermitian_violation: bool,
    pub trace_violation: bool,
    pub positivity_violation: bool,
}

impl Diagnostics {
    pub fn is_valid(&self) -> bool {
        !(self.hermitian_violation || self.trace_violation || self.positivity_violation)
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "hermiticity defect {:.3e}{}, trace defect {:.3e}{}, min eigenvalue {:.3e}{}",
            self.hermiticity_defect,
            if self.hermitian_violation { " (violated)" } else { "" },
            self.trace_defect,
            if self.trace_violation { " (violated)" } else { "" },
            self.min_eigenvalue,
            if self.positivity_violation { " (violated)" } else { "" },
        )
    }
}

/// Measure how far `rho` is from a valid density matrix. Never fails; the
/// eigenvalues are taken from the Hermitian part so a non-Hermitian input
/// still gets a positivity figure.
pub fn validate_density_matrix(rho: &DensityMatrix, tol: &Tolerances) -> Diagnostics {
    let m = rho.matrix();
    let hermiticity_defect = m.hermiticity_defect();
    let tr = m.trace();
    let trace_defect = (tr - C64::new(1.0, 0.0)).norm();
    let min_eigenvalue = eigenvalues_of_hermitian_part(m).first().copied().unwrap_or(0.0);
    Diagnostics {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
        hermitian_violation: hermiticity_defect > tol.hermiticity,
        trace_violation: trace_defect > tol.trace,
        positivity_violation: min_eigenvalue < -tol.positivity,
    }
}
