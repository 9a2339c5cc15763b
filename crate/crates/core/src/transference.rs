//! Transference between the quantum torus and operator-valued functions on
//! the classical torus.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{QtElement, Theta};
use crate::error::{Error, Result};
use crate::kernels::TorusPoint;
use crate::lattice::MultiIndex;
use crate::matrix::lp_norm_estimate;
use crate::quadrature::torus_grid;

/// `f(z) = Σ_n f_n zⁿ` with coefficients in the quantum torus.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTrigPoly {
    theta: Arc<Theta>,
    terms: BTreeMap<MultiIndex, QtElement>,
}

impl OperatorTrigPoly {
    pub fn zero(theta: &Arc<Theta>) -> Self {
        OperatorTrigPoly {
            theta: theta.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// Sums coefficients that share an index; zero coefficients are dropped.
    pub fn from_terms(theta: &Arc<Theta>, terms: impl IntoIterator<Item = (MultiIndex, QtElement)>) -> Result<Self> {
        let mut out = Self::zero(theta);
        for (n, f) in terms {
            n.check_dim(theta.dim())?;
            if !(Arc::ptr_eq(f.theta(), theta) || f.theta().as_ref() == theta.as_ref()) {
                return Err(Error::ThetaMismatch);
            }
            let sum = match out.terms.remove(&n) {
                Some(g) => g.try_add(&f)?,
                None => f,
            };
            if !sum.is_zero() {
                out.terms.insert(n, sum);
            }
        }
        Ok(out)
    }

    pub fn theta(&self) -> &Arc<Theta> {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &QtElement)> {
        self.terms.iter()
    }

    pub fn term(&self, n: &MultiIndex) -> Option<&QtElement> {
        self.terms.get(n)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `f(z)`.
    pub fn eval(&self, z: &TorusPoint) -> Result<QtElement> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.dim(),
            });
        }
        let mut acc = QtElement::zero(&self.theta);
        for (n, f) in &self.terms {
            acc = acc.try_add(&f.scale(z.character(n)))?;
        }
        Ok(acc)
    }

    /// Pointwise product `(fg)(z) = f(z)g(z)`.
    pub fn try_mul(&self, other: &OperatorTrigPoly) -> Result<Self> {
        let mut terms = Vec::new();
        for (n, f) in &self.terms {
            for (k, g) in &other.terms {
                terms.push((n + k, f.try_mul(g)?));
            }
        }
        Self::from_terms(&self.theta, terms)
    }

    pub fn try_sub(&self, other: &OperatorTrigPoly) -> Result<Self> {
        let neg = other.terms.iter().map(|(n, f)| (n.clone(), f.scale(Complex64::new(-1.0, 0.0))));
        Self::from_terms(&self.theta, self.terms.clone().into_iter().chain(neg))
    }

    /// Largest coefficient difference over all terms.
    pub fn max_coeff_diff(&self, other: &OperatorTrigPoly) -> Result<f64> {
        Ok(self
            .try_sub(other)?
            .terms
            .values()
            .map(|f| f.max_abs_coeff())
            .fold(0.0, f64::max))
    }
}

/// `π_z(U^m) = z^m U^m`.
pub fn pi_z(x: &QtElement, z: &TorusPoint) -> Result<QtElement> {
    if z.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: z.dim(),
        });
    }
    Ok(x.map_coeffs(|m, c| c * z.character(m)))
}

/// `x̃ = Σ_n x̂(n) Uⁿ zⁿ`, so that `x̃(z) = π_z(x)`.
pub fn twist(x: &QtElement) -> OperatorTrigPoly {
    let theta = x.theta().clone();
    let terms = x
        .terms()
        .map(|(n, c)| (n.clone(), QtElement::monomial(&theta, n.clone(), *c).expect("index from x")))
        .collect();
    OperatorTrigPoly { theta, terms }
}

/// Conditional expectation onto the image of [`twist`]: the term at `n`
/// keeps only the `Uⁿ` coefficient of `f_n`.
pub fn conditional_expectation(f: &OperatorTrigPoly) -> OperatorTrigPoly {
    let mut terms = BTreeMap::new();
    for (n, g) in &f.terms {
        let c = g.coeff(n);
        if c != Complex64::new(0.0, 0.0) {
            terms.insert(n.clone(), QtElement::monomial(&f.theta, n.clone(), c).expect("index from f"));
        }
    }
    OperatorTrigPoly {
        theta: f.theta.clone(),
        terms,
    }
}

/// `𝔼` from its defining integral: `y = ∫ π_{w̄}[f(w)] dw` by the trapezoid
/// rule on `n` points per axis, then `𝔼f = ỹ`. Exact once `n` exceeds the
/// spread of frequencies in `f`.
pub fn conditional_expectation_by_quadrature(f: &OperatorTrigPoly, n: usize) -> Result<OperatorTrigPoly> {
    let d = f.dim();
    if d > 2 {
        return Err(Error::Domain {
            name: "d",
            value: d as f64,
            domain: "{1, 2}",
        });
    }
    let grid = torus_grid(d, n);
    let weight = Complex64::new(1.0 / grid.len() as f64, 0.0);
    let mut y = QtElement::zero(&f.theta);
    for s in grid {
        let w = TorusPoint::new(s.clone());
        let wbar = TorusPoint::new(s.iter().map(|x| -x).collect::<Vec<_>>());
        y = y.try_add(&pi_z(&f.eval(&w)?, &wbar)?.scale(weight))?;
    }
    // trapezoid rounding leaves tiny off-diagonal residue
    let y = y.map_coeffs(|_, c| if c.norm() < 1e-13 { Complex64::new(0.0, 0.0) } else { c });
    Ok(twist(&y))
}

/// `(Σ_n ‖f_n‖₂²)^{1/2}`.
pub fn opvalued_l2_norm(f: &OperatorTrigPoly) -> f64 {
    f.terms.values().map(|g| g.l2_norm().powi(2)).sum::<f64>().sqrt()
}

/// `max_z |‖A_N π_z(x)‖_p - ‖A_N x‖_p|` over the sample points.
pub fn lp_isometry_probe(x: &QtElement, p: f64, samples: &[TorusPoint], n_rep: u32) -> Result<f64> {
    let base = lp_norm_estimate(x, p, n_rep)?;
    let mut worst: f64 = 0.0;
    for z in samples {
        let v = lp_norm_estimate(&pi_z(x, z)?, p, n_rep)?;
        worst = worst.max((v - base).abs());
    }
    Ok(worst)
}
