//! Twisted Toeplitz matrices on truncated `ℓ₂(ℤᵈ)` and their norms.
//!
//! `represent(x, N)` is the compression `A_N(x) = P_N [x] P_N` of the left
//! regular representation to the Følner box `Z_N`, with entries
//! `[x]_{mn} = x̂(m-n) e^{i n θ̃ (m-n)ᵗ}`. Matrices carry the normalized trace
//! `(1/dim) Tr`, so Schatten norms here are normalized as well.

use std::collections::BTreeMap;
use std::sync::Arc;

use faer::{Mat, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{phase, QtElement, Theta};
use crate::error::{Error, Result};
use crate::lattice::{FolnerBox, MultiIndex};

/// Largest matrix dimension [`represent`] builds unless told otherwise.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Tolerance on `max |A - A*|` under which a matrix counts as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// A dense matrix indexed by the box `Z_N`, tied to a deformation θ.
#[derive(Clone, Debug)]
pub struct TruncatedRep {
    theta: Arc<Theta>,
    boxed: FolnerBox,
    matrix: DMatrix<Complex64>,
}

impl TruncatedRep {
    /// Wraps an arbitrary `|Z_N| × |Z_N|` matrix.
    pub fn from_matrix(theta: &Arc<Theta>, radius: u32, matrix: DMatrix<Complex64>) -> Result<Self> {
        let boxed = FolnerBox::new(radius, theta.dim());
        let dim = boxed.cardinality() as usize;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(TruncatedRep {
            theta: Arc::clone(theta),
            boxed,
            matrix,
        })
    }

    pub fn identity(theta: &Arc<Theta>, radius: u32) -> Self {
        let dim = FolnerBox::new(radius, theta.dim()).cardinality() as usize;
        Self::from_matrix(theta, radius, DMatrix::identity(dim, dim)).expect("square of box size")
    }

    pub fn zeros(theta: &Arc<Theta>, radius: u32) -> Self {
        let dim = FolnerBox::new(radius, theta.dim()).cardinality() as usize;
        Self::from_matrix(theta, radius, DMatrix::zeros(dim, dim)).expect("square of box size")
    }

    pub fn theta(&self) -> &Arc<Theta> {
        &self.theta
    }

    pub fn radius(&self) -> u32 {
        self.boxed.radius
    }

    pub fn folner_box(&self) -> FolnerBox {
        self.boxed
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Entry at row `m`, column `n` (box coordinates).
    pub fn entry(&self, m: &MultiIndex, n: &MultiIndex) -> Option<Complex64> {
        let i = self.boxed.position(m)?;
        let j = self.boxed.position(n)?;
        Some(self.matrix[(i, j)])
    }

    /// Same shape, new entries.
    pub fn with_matrix(&self, matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::from_matrix(&self.theta, self.radius(), matrix)
    }

    /// `max_{ij} |a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let a = &self.matrix;
        let n = a.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_entry_diff(&self, other: &TruncatedRep) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `(1/dim) Σ a_ii`.
    pub fn normalized_trace(&self) -> Complex64 {
        let mut s = CompensatedSum::default();
        for i in 0..self.dim() {
            s.add(self.matrix[(i, i)]);
        }
        s.value() / self.dim() as f64
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.hermitian_defect() == 0.0 {
            let mut s: Vec<f64> = self.hermitian_eigenvalues_unchecked().iter().map(|v| v.abs()).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            return s;
        }
        let mut s = to_faer(&self.matrix)
            .singular_values()
            .unwrap_or_else(|_| vec![f64::NAN; self.dim()]);
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Operator norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Normalized Schatten norm `((1/dim) Σ σᵢᵖ)^{1/p}`; `p = ∞` gives the
    /// operator norm.
    pub fn schatten_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        if p == 2.0 {
            let sq: f64 = self.matrix.iter().map(|z| z.norm_sqr()).sum();
            return Ok((sq / self.dim() as f64).sqrt());
        }
        let s = self.singular_values();
        Ok(power_mean(&s, p))
    }

    /// Eigenvalues of the Hermitian part, ascending. Fails if the matrix is
    /// further than [`HERMITIAN_TOL`] from Hermitian.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        Ok(self.hermitian_eigenvalues_unchecked())
    }

    fn hermitian_eigenvalues_unchecked(&self) -> Vec<f64> {
        hermitian_eigs(&self.matrix)
    }

    /// Smallest eigenvalue of the Hermitian symmetrization.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.hermitian_eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    /// Row-major `[re, im]` pairs for debugging dumps.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Export {
            d: usize,
            radius: u32,
            dim: usize,
            data: Vec<[f64; 2]>,
        }
        let n = self.dim();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let v = self.matrix[(i, j)];
                data.push([v.re, v.im]);
            }
        }
        serde_json::to_string(&Export {
            d: self.theta.dim(),
            radius: self.radius(),
            dim: n,
            data,
        })
        .expect("serializable")
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 || p == f64::INFINITY {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "p",
            value: p,
            domain: "[1, ∞]",
        })
    }
}

/// Neumaier summation, componentwise.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: Complex64,
    carry: Complex64,
}

impl CompensatedSum {
    fn add(&mut self, v: Complex64) {
        fn step(sum: &mut f64, carry: &mut f64, v: f64) {
            let t = *sum + v;
            if sum.abs() >= v.abs() {
                *carry += (*sum - t) + v;
            } else {
                *carry += (v - t) + *sum;
            }
            *sum = t;
        }
        step(&mut self.sum.re, &mut self.carry.re, v.re);
        step(&mut self.sum.im, &mut self.carry.im, v.im);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.carry
    }
}

/// Ascending eigenvalues of `(a + a*)/2`.
pub(crate) fn hermitian_eigs(a: &DMatrix<Complex64>) -> Vec<f64> {
    let sym = Mat::<Complex64>::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = sym
        .self_adjoint_eigenvalues(Side::Lower)
        .unwrap_or_else(|_| vec![f64::NAN; a.nrows()]);
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// `((1/n) Σ vᵢᵖ)^{1/p}` for nonnegative values, `max` when `p = ∞`.
pub(crate) fn power_mean(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let top = values.iter().copied().fold(0.0, f64::max);
    if p.is_infinite() {
        return top;
    }
    if top == 0.0 {
        return 0.0;
    }
    // scaled to avoid overflow for large p
    let mean = values.iter().map(|v| (v / top).powf(p)).sum::<f64>() / values.len() as f64;
    top * mean.powf(1.0 / p)
}

fn to_faer(a: &DMatrix<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// `A_N(x)`: the twisted Toeplitz matrix of `x` compressed to `Z_N`, with the
/// default dimension cap.
pub fn represent(x: &QtElement, radius: u32) -> Result<TruncatedRep> {
    represent_with_cap(x, radius, DEFAULT_DIM_CAP)
}

pub fn represent_with_cap(x: &QtElement, radius: u32, cap: usize) -> Result<TruncatedRep> {
    let theta = x.theta();
    let boxed = FolnerBox::new(radius, theta.dim());
    let dim = boxed.cardinality();
    if dim > cap as u64 {
        return Err(Error::TooLarge {
            dim: dim as usize,
            cap,
        });
    }
    let dim = dim as usize;
    let mut a = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let n = boxed.index_at(col);
        for (k, &c) in x.terms() {
            let m = &n + k;
            if let Some(row) = boxed.position(&m) {
                a[(row, col)] = c * phase(theta, k, &n);
            }
        }
    }
    TruncatedRep::from_matrix(theta, radius, a)
}

/// `B_N`: `e_{mn} ↦ |Z_N|⁻¹ e^{-i n θ̃ (m-n)ᵗ} U^{m-n}`, extended linearly.
/// Each diagonal is summed with compensation before the `1/|Z_N|` scaling.
pub fn folner_compress(a: &TruncatedRep) -> QtElement {
    let boxed = a.folner_box();
    let theta = a.theta();
    let dim = a.dim();
    let idx: Vec<MultiIndex> = boxed.iter().collect();
    let mut sums: BTreeMap<MultiIndex, CompensatedSum> = BTreeMap::new();
    for (col, n) in idx.iter().enumerate() {
        for (row, m) in idx.iter().enumerate() {
            let v = a.matrix[(row, col)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let k = m - n;
            let w = v * phase(theta, &k, n).conj();
            sums.entry(k).or_default().add(w);
        }
    }
    let terms = sums.into_iter().map(|(k, s)| (k, s.value() / dim as f64));
    QtElement::from_coeffs(theta, terms).expect("box indices match theta")
}

/// `‖A_N(x)‖_p`, the compressed estimate of `‖x‖_{L_p}`.
pub fn lp_norm_estimate(x: &QtElement, p: f64, radius: u32) -> Result<f64> {
    check_exponent(p)?;
    represent(x, radius)?.schatten_norm(p)
}

/// Exact `‖A_N(x)‖₂² = Σ_k |x̂(k)|² · overlap(N, k)`.
pub fn l2_compressed_squared(x: &QtElement, radius: u32) -> f64 {
    x.terms()
        .map(|(k, c)| c.norm_sqr() * crate::lattice::folner_overlap_f64(radius, k))
        .sum()
}
