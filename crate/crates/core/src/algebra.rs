//! The twisted polynomial algebra 𝒫_θ.
//!
//! Elements are finite Fourier series `Σ x̂(m) U^m` where `U^m` is the ordered
//! product `U₁^{m₁}···U_d^{m_d}` of unitary generators subject to
//! `U_k U_j = e^{2πiθ_{kj}} U_j U_k`. Every phase in this crate comes from
//! [`cocycle`]: `U^k U^n = cocycle(θ, k, n) · U^{k+n}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::MultiIndex;

/// Deformation data: a real skew-symmetric `d×d` matrix θ together with the
/// strictly upper triangular matrix θ̃ with `θ̃_{jk} = -2π θ_{jk}` for `j < k`.
#[derive(Clone, PartialEq)]
pub struct Theta {
    d: usize,
    theta: Vec<f64>,
    tilde: Vec<f64>,
}

impl Theta {
    /// Builds θ from a full matrix, which must be skew-symmetric exactly.
    pub fn new(matrix: &[Vec<f64>]) -> Result<Self> {
        let d = matrix.len();
        if d == 0 {
            return Err(Error::InvalidTheta("dimension must be at least 1".into()));
        }
        let mut theta = vec![0.0; d * d];
        for (j, row) in matrix.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidTheta(format!("row {} has length {}", j + 1, row.len())));
            }
            for (k, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidTheta("non-finite entry".into()));
                }
                theta[j * d + k] = v;
            }
        }
        for j in 0..d {
            if theta[j * d + j] != 0.0 {
                return Err(Error::InvalidTheta(format!("diagonal entry {} is nonzero", j + 1)));
            }
            for k in j + 1..d {
                if theta[k * d + j] != -theta[j * d + k] {
                    return Err(Error::InvalidTheta(format!(
                        "entries ({},{}) and ({},{}) are not opposite",
                        j + 1,
                        k + 1,
                        k + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self::from_dense(d, theta))
    }

    /// Builds θ from its strict upper triangle, given as 1-based `(j, k, θ_{jk})`
    /// triples with `j < k`. Entries not listed are zero.
    pub fn from_upper(d: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidTheta("dimension must be at least 1".into()));
        }
        let mut theta = vec![0.0; d * d];
        for &(j, k, v) in entries {
            if !(1 <= j && j < k && k <= d) {
                return Err(Error::InvalidTheta(format!(
                    "entry ({j},{k}) is not strictly upper triangular in dimension {d}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidTheta("non-finite entry".into()));
            }
            theta[(j - 1) * d + (k - 1)] = v;
            theta[(k - 1) * d + (j - 1)] = -v;
        }
        Ok(Self::from_dense(d, theta))
    }

    fn from_dense(d: usize, theta: Vec<f64>) -> Self {
        let mut tilde = vec![0.0; d * d];
        for j in 0..d {
            for k in j + 1..d {
                tilde[j * d + k] = -2.0 * PI * theta[j * d + k];
            }
        }
        Theta { d, theta, tilde }
    }

    /// The classical torus.
    pub fn zero(d: usize) -> Self {
        Self::from_upper(d, &[]).expect("valid dimension")
    }

    /// Every pair of generators anticommutes: `θ_{jk} = 1/2` for `j < k`.
    pub fn anticommuting(d: usize) -> Self {
        Self::constant_upper(d, 0.5)
    }

    /// `θ_{jk} = (√5-1)/2` for `j < k`.
    pub fn golden(d: usize) -> Self {
        Self::constant_upper(d, (5f64.sqrt() - 1.0) / 2.0)
    }

    fn constant_upper(d: usize, v: f64) -> Self {
        let entries: Vec<_> = (1..=d)
            .flat_map(|j| (j + 1..=d).map(move |k| (j, k, v)))
            .collect();
        Self::from_upper(d, &entries).expect("valid dimension")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `θ_{jk}`, 1-based.
    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.theta[(j - 1) * self.d + (k - 1)]
    }

    /// `θ̃_{jk}`, 1-based.
    pub fn tilde(&self, j: usize, k: usize) -> f64 {
        self.tilde[(j - 1) * self.d + (k - 1)]
    }

    /// Strict upper triangle as 1-based triples, row by row.
    pub fn upper_entries(&self) -> Vec<(usize, usize, f64)> {
        (1..=self.d)
            .flat_map(|j| (j + 1..=self.d).map(move |k| (j, k)))
            .map(|(j, k)| (j, k, self.entry(j, k)))
            .collect()
    }

    pub fn is_commutative(&self) -> bool {
        self.tilde.iter().all(|&v| v == 0.0)
    }

    /// The bilinear form `n θ̃ kᵗ = Σ_{j<l} n_j θ̃_{jl} k_l`.
    #[allow(clippy::needless_range_loop)]
    pub fn form(&self, n: &MultiIndex, k: &MultiIndex) -> f64 {
        let (n, k) = (n.entries(), k.entries());
        let d = self.d;
        let mut acc = 0.0;
        for j in 0..d {
            if n[j] == 0 {
                continue;
            }
            let mut row = 0.0;
            for l in j + 1..d {
                if k[l] != 0 {
                    row += self.tilde[j * d + l] * k[l] as f64;
                }
            }
            acc += n[j] as f64 * row;
        }
        acc
    }
}

impl fmt::Debug for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Theta")
            .field("d", &self.d)
            .field("upper", &self.upper_entries())
            .finish()
    }
}

/// The phase `ω(k, n) = e^{i n θ̃ kᵗ}` with `U^k U^n = ω(k, n) U^{k+n}`.
pub fn cocycle(theta: &Theta, k: &MultiIndex, n: &MultiIndex) -> Result<Complex64> {
    k.check_dim(theta.dim())?;
    n.check_dim(theta.dim())?;
    Ok(phase(theta, k, n))
}

#[inline]
pub(crate) fn phase(theta: &Theta, k: &MultiIndex, n: &MultiIndex) -> Complex64 {
    let a = theta.form(n, k);
    if a == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::cis(a)
    }
}

/// Largest output box for which products accumulate into a dense array.
const DENSE_PRODUCT_CELLS: usize = 1 << 22;

fn bounding_box<'a>(keys: impl Iterator<Item = &'a MultiIndex>, d: usize) -> (Vec<i64>, Vec<i64>) {
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for m in keys {
        for (j, &v) in m.entries().iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    (lo, hi)
}

/// A finite Fourier series `Σ x̂(m) U^m` in the quantum torus.
///
/// Coefficients equal to exactly zero are never stored.
#[derive(Clone)]
pub struct QtElement {
    theta: Arc<Theta>,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl QtElement {
    pub fn zero(theta: &Arc<Theta>) -> Self {
        QtElement {
            theta: Arc::clone(theta),
            coeffs: BTreeMap::new(),
        }
    }

    /// The unit `U⁰`.
    pub fn unit(theta: &Arc<Theta>) -> Self {
        Self::monomial(theta, MultiIndex::zero(theta.dim()), Complex64::new(1.0, 0.0))
            .expect("zero index has the right dimension")
    }

    /// `c · U^m`.
    pub fn monomial(theta: &Arc<Theta>, m: MultiIndex, c: Complex64) -> Result<Self> {
        Self::from_coeffs(theta, [(m, c)])
    }

    /// The generator `U_j`, 1-based.
    pub fn generator(theta: &Arc<Theta>, j: usize) -> Result<Self> {
        let d = theta.dim();
        if !(1..=d).contains(&j) {
            return Err(Error::GeneratorOutOfRange { index: j, dim: d });
        }
        Self::monomial(theta, MultiIndex::unit(d, j), Complex64::new(1.0, 0.0))
    }

    /// Sums repeated indices; drops exact zeros.
    pub fn from_coeffs(
        theta: &Arc<Theta>,
        terms: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (m, c) in terms {
            m.check_dim(theta.dim())?;
            *coeffs.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c: &mut Complex64| *c != Complex64::new(0.0, 0.0));
        Ok(QtElement {
            theta: Arc::clone(theta),
            coeffs,
        })
    }

    pub fn theta(&self) -> &Arc<Theta> {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Stored coefficient at `m` (zero off the support).
    pub fn coeff(&self, m: &MultiIndex) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &MultiIndex> {
        self.coeffs.keys()
    }

    /// Largest `|m|_∞` over the support, 0 for the zero element.
    pub fn degree(&self) -> i64 {
        self.coeffs.keys().map(MultiIndex::linf).max().unwrap_or(0)
    }

    pub fn same_theta(&self, other: &QtElement) -> bool {
        Arc::ptr_eq(&self.theta, &other.theta) || *self.theta == *other.theta
    }

    fn check_theta(&self, other: &QtElement) -> Result<()> {
        if self.same_theta(other) {
            Ok(())
        } else {
            Err(Error::ThetaMismatch)
        }
    }

    /// Applies `f(m, x̂(m))` to every coefficient.
    pub fn map_coeffs(&self, mut f: impl FnMut(&MultiIndex, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(m, &c)| (m.clone(), f(m, c)))
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();
        QtElement {
            theta: Arc::clone(&self.theta),
            coeffs,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_coeffs(|_, v| v * c)
    }

    pub fn try_add(&self, other: &QtElement) -> Result<Self> {
        self.check_theta(other)?;
        let mut out = self.coeffs.clone();
        for (m, &c) in &other.coeffs {
            *out.entry(m.clone()).or_default() += c;
        }
        out.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(QtElement {
            theta: Arc::clone(&self.theta),
            coeffs: out,
        })
    }

    pub fn try_sub(&self, other: &QtElement) -> Result<Self> {
        self.try_add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Twisted convolution: `(xy)^(p) = Σ_{k+n=p} x̂(k) ŷ(n) ω(k, n)`.
    pub fn try_mul(&self, other: &QtElement) -> Result<Self> {
        self.check_theta(other)?;
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(QtElement::zero(&self.theta));
        }
        let d = self.theta.dim();
        let (lo1, hi1) = bounding_box(self.coeffs.keys(), d);
        let (lo2, hi2) = bounding_box(other.coeffs.keys(), d);
        let lo: Vec<i64> = lo1.iter().zip(&lo2).map(|(a, b)| a + b).collect();
        let ext: Vec<usize> = (0..d).map(|j| (hi1[j] + hi2[j] - lo[j] + 1) as usize).collect();
        let cells = ext.iter().try_fold(1usize, |acc, &e| acc.checked_mul(e));
        let mut out: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        match cells {
            Some(cells) if cells <= DENSE_PRODUCT_CELLS => {
                // dense accumulator over the box of k + n; offsets add
                let mut stride = vec![1usize; d];
                for j in (0..d.saturating_sub(1)).rev() {
                    stride[j] = stride[j + 1] * ext[j + 1];
                }
                let offset = |m: &MultiIndex, base: &[i64]| -> usize {
                    m.entries().iter().zip(base).zip(&stride).map(|((v, b), s)| (v - b) as usize * s).sum()
                };
                let right: Vec<(&MultiIndex, Complex64, usize)> =
                    other.coeffs.iter().map(|(n, &b)| (n, b, offset(n, &lo2))).collect();
                let mut acc = vec![Complex64::new(0.0, 0.0); cells];
                for (k, &a) in &self.coeffs {
                    let ok = offset(k, &lo1);
                    for &(n, b, on) in &right {
                        acc[ok + on] += a * b * phase(&self.theta, k, n);
                    }
                }
                let mut idx = vec![0i64; d];
                for (cell, &v) in acc.iter().enumerate() {
                    if v == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut rest = cell;
                    for j in 0..d {
                        idx[j] = lo[j] + (rest / stride[j]) as i64;
                        rest %= stride[j];
                    }
                    out.insert(MultiIndex::new(idx.clone()), v);
                }
            }
            _ => {
                for (k, &a) in &self.coeffs {
                    for (n, &b) in &other.coeffs {
                        let w = phase(&self.theta, k, n);
                        *out.entry(k + n).or_default() += a * b * w;
                    }
                }
                out.retain(|_, c| *c != Complex64::new(0.0, 0.0));
            }
        }
        Ok(QtElement {
            theta: Arc::clone(&self.theta),
            coeffs: out,
        })
    }

    /// `x*`, using `(U^m)* = conj(ω(m, -m)) U^{-m}`.
    pub fn adjoint(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(m, &c)| {
                let minus = -m;
                let w = phase(&self.theta, m, &minus).conj();
                (minus, c.conj() * w)
            })
            .collect();
        QtElement {
            theta: Arc::clone(&self.theta),
            coeffs,
        }
    }

    /// `|x|² = x* x`.
    pub fn abs_square(&self) -> Self {
        self.adjoint().try_mul(self).expect("same theta")
    }

    /// The trace τ(x) = x̂(0).
    pub fn trace(&self) -> Complex64 {
        self.coeff(&MultiIndex::zero(self.dim()))
    }

    /// `x̂(m) = τ((U^m)* x)`, read from the stored coefficients.
    pub fn fourier_coeff(&self, m: &MultiIndex) -> Result<Complex64> {
        m.check_dim(self.dim())?;
        Ok(self.coeff(m))
    }

    /// `δ_j`, multiplying the coefficient at `m` by `2πi m_j`.
    pub fn derivation(&self, j: usize) -> Result<Self> {
        let d = self.dim();
        if !(1..=d).contains(&j) {
            return Err(Error::GeneratorOutOfRange { index: j, dim: d });
        }
        Ok(self.map_coeffs(|m, c| c * Complex64::new(0.0, 2.0 * PI * m.entries()[j - 1] as f64)))
    }

    /// `Δ`, multiplying the coefficient at `m` by `-4π²|m|₂²`.
    pub fn laplacian(&self) -> Self {
        self.map_coeffs(|m, c| c * (-4.0 * PI * PI * m.l2_squared() as f64))
    }

    /// Parseval norm `(Σ |x̂(m)|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest coefficient modulus, 0 for the zero element.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference, for tolerance comparisons.
    pub fn max_coeff_diff(&self, other: &QtElement) -> f64 {
        let mut keys: Vec<&MultiIndex> = self.coeffs.keys().chain(other.coeffs.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|m| (self.coeff(m) - other.coeff(m)).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ElementJson::from(self)).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: ElementJson = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        raw.into_element()
    }
}

impl fmt::Debug for QtElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.coeffs.iter())
            .finish()
    }
}

impl PartialEq for QtElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_theta(other) && self.coeffs == other.coeffs
    }
}

// Operator forms panic on mismatched θ; use the `try_*` methods to handle it.
impl Add for &QtElement {
    type Output = QtElement;
    fn add(self, rhs: &QtElement) -> QtElement {
        self.try_add(rhs).expect("theta mismatch in addition")
    }
}

impl Sub for &QtElement {
    type Output = QtElement;
    fn sub(self, rhs: &QtElement) -> QtElement {
        self.try_sub(rhs).expect("theta mismatch in subtraction")
    }
}

impl Mul for &QtElement {
    type Output = QtElement;
    fn mul(self, rhs: &QtElement) -> QtElement {
        self.try_mul(rhs).expect("theta mismatch in product")
    }
}

impl Neg for &QtElement {
    type Output = QtElement;
    fn neg(self) -> QtElement {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// Wire format of an element.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementJson {
    pub d: usize,
    pub theta: Vec<(usize, usize, f64)>,
    pub coeffs: Vec<CoeffJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffJson {
    pub m: MultiIndex,
    pub re: f64,
    pub im: f64,
}

impl From<&QtElement> for ElementJson {
    fn from(x: &QtElement) -> Self {
        ElementJson {
            d: x.dim(),
            theta: x.theta.upper_entries(),
            coeffs: x
                .terms()
                .map(|(m, c)| CoeffJson {
                    m: m.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

impl ElementJson {
    pub fn into_element(self) -> Result<QtElement> {
        let theta = Arc::new(Theta::from_upper(self.d, &self.theta)?);
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.coeffs {
            if !seen.insert(c.m.clone()) {
                return Err(Error::Format(format!("repeated index {}", c.m)));
            }
        }
        QtElement::from_coeffs(
            &theta,
            self.coeffs.into_iter().map(|c| (c.m, Complex64::new(c.re, c.im))),
        )
    }
}
