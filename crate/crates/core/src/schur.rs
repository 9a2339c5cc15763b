//! Schur multipliers on truncated representations.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::algebra::{QtElement, Theta};
use crate::error::{Error, Result};
use crate::lattice::{FolnerBox, MultiIndex};
use crate::matrix::{check_exponent, power_mean, represent, TruncatedRep};
use crate::random::random_complex;
use crate::summation::{apply_multiplier, MultiplierSymbol};

type PairFn = dyn Fn(&MultiIndex, &MultiIndex) -> Complex64 + Send + Sync;

/// `ψ(m, n)`, applied entrywise to matrices indexed by a Følner box.
#[derive(Clone)]
pub struct SchurSymbol {
    eval: Arc<PairFn>,
}

impl fmt::Debug for SchurSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchurSymbol").finish_non_exhaustive()
    }
}

impl SchurSymbol {
    pub fn new(eval: impl Fn(&MultiIndex, &MultiIndex) -> Complex64 + Send + Sync + 'static) -> Self {
        SchurSymbol { eval: Arc::new(eval) }
    }

    pub fn ones() -> Self {
        Self::new(|_, _| Complex64::new(1.0, 0.0))
    }

    /// Kronecker delta `ψ(m, n) = [m = n]`.
    pub fn diagonal() -> Self {
        Self::new(|m, n| Complex64::new(if m == n { 1.0 } else { 0.0 }, 0.0))
    }

    /// `ψ(m, n) = a(m) conj(b(n))`.
    pub fn rank_one(
        a: impl Fn(&MultiIndex) -> Complex64 + Send + Sync + 'static,
        b: impl Fn(&MultiIndex) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(move |m, n| a(m) * b(n).conj())
    }

    pub fn eval(&self, m: &MultiIndex, n: &MultiIndex) -> Complex64 {
        (self.eval)(m, n)
    }

    /// Entrywise product of symbols.
    pub fn product(&self, other: &SchurSymbol) -> SchurSymbol {
        let (a, b) = (self.clone(), other.clone());
        Self::new(move |m, n| a.eval(m, n) * b.eval(m, n))
    }

    /// The symbol as a matrix over the box.
    pub fn matrix(&self, boxed: &FolnerBox) -> DMatrix<Complex64> {
        let idx: Vec<MultiIndex> = boxed.iter().collect();
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.eval(&idx[i], &idx[j]))
    }
}

/// `(M_ψ A)_{mn} = ψ(m, n) a_{mn}`.
pub fn schur_multiply(psi: &SchurSymbol, a: &TruncatedRep) -> Result<TruncatedRep> {
    let mask = psi.matrix(&a.folner_box());
    a.with_matrix(a.matrix().component_mul(&mask))
}

/// `ψ(m, n) = φ(m - n)`.
pub fn toeplitz_lift(phi: &MultiplierSymbol) -> SchurSymbol {
    let phi = phi.clone();
    SchurSymbol::new(move |m, n| phi.eval(&(m - n)))
}

/// `max |[T_φ x] - M_{φ̃}([x])|` over the entries of the truncation.
pub fn fs_identity_check(phi: &MultiplierSymbol, x: &QtElement, radius: u32) -> Result<f64> {
    let lhs = represent(&apply_multiplier(phi, x)?, radius)?;
    let rhs = schur_multiply(&toeplitz_lift(phi), &represent(x, radius)?)?;
    Ok(lhs.max_entry_diff(&rhs))
}

/// Outcome of the anticommuting-generator probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnticommutingReport {
    pub k: usize,
    pub radius: u32,
    /// `‖α‖₂`.
    pub alpha_norm: f64,
    /// Largest coefficient of `x*x + xx* - 2‖α‖²·1`.
    pub identity_defect: f64,
    /// Operator norm of the truncated representation of `x = Σ α_k U_k`.
    pub op_norm: f64,
    /// `‖α‖₂ ≤ op_norm ≤ √2‖α‖₂` within 1e-8.
    pub sandwich_holds: bool,
}

/// `x = Σ α_k U_k` on the `K`-dimensional torus with `θ_{jk} = 1/2`.
pub fn anticommuting_element(alpha: &[Complex64]) -> Result<QtElement> {
    let theta = Arc::new(Theta::anticommuting(alpha.len()));
    let d = alpha.len();
    let terms = alpha.iter().enumerate().map(|(j, &a)| (MultiIndex::unit(d, j + 1), a));
    QtElement::from_coeffs(&theta, terms.collect::<Vec<_>>())
}

pub fn anticommuting_probe(alpha: &[Complex64], radius: u32) -> Result<AnticommutingReport> {
    if alpha.len() < 2 {
        return Err(Error::Domain {
            name: "K",
            value: alpha.len() as f64,
            domain: "K ≥ 2",
        });
    }
    let x = anticommuting_element(alpha)?;
    let norm2: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    let xs = x.adjoint();
    let sym = xs.try_mul(&x)?.try_add(&x.try_mul(&xs)?)?;
    let target = QtElement::unit(x.theta()).scale(Complex64::new(2.0 * norm2, 0.0));
    let identity_defect = sym.max_coeff_diff(&target);
    let op_norm = represent(&x, radius)?.op_norm();
    let alpha_norm = norm2.sqrt();
    Ok(AnticommutingReport {
        k: alpha.len(),
        radius,
        alpha_norm,
        identity_defect,
        op_norm,
        sandwich_holds: op_norm >= alpha_norm - 1e-8 && op_norm <= SQRT_2 * alpha_norm + 1e-8,
    })
}

/// A sampled lower bound for the norm of `id_{M_level} ⊗ M_ψ` on the
/// normalized Schatten `p`-class of `M_level(M_n)`. Sampling only ever
/// produces lower bounds for the completely bounded norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplifiedLowerBound {
    pub level: usize,
    pub p: f64,
    pub trials: usize,
    pub lower_bound: f64,
}

fn schatten(a: &DMatrix<Complex64>, p: f64) -> Result<f64> {
    let s = faer::Mat::<Complex64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
        .singular_values()
        .map_err(|_| Error::Domain {
            name: "svd",
            value: f64::NAN,
            domain: "convergent factorization",
        })?;
    Ok(power_mean(&s, p))
}

pub fn amplified_lower_bound<R: Rng>(
    psi: &SchurSymbol,
    boxed: &FolnerBox,
    level: usize,
    p: f64,
    trials: usize,
    rng: &mut R,
) -> Result<AmplifiedLowerBound> {
    check_exponent(p)?;
    if !(1..=3).contains(&level) {
        return Err(Error::Domain {
            name: "level",
            value: level as f64,
            domain: "{1, 2, 3}",
        });
    }
    let mask = psi.matrix(boxed);
    let n = mask.nrows();
    let big = level * n;
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let x = DMatrix::from_fn(big, big, |_, _| random_complex(rng));
        let y = DMatrix::from_fn(big, big, |i, j| x[(i, j)] * mask[(i % n, j % n)]);
        let nx = schatten(&x, p)?;
        if nx > 0.0 {
            best = best.max(schatten(&y, p)? / nx);
        }
    }
    Ok(AmplifiedLowerBound {
        level,
        p,
        trials,
        lower_bound: best,
    })
}
