//! Littlewood-Paley g-function, column and row Hardy norms, BMO norms and an
//! experimental Lusin area quadrature.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{cocycle, QtElement};
use crate::error::{Error, Result};
use crate::lattice::MultiIndex;
use crate::matrix::{check_exponent, hermitian_eigs, power_mean, represent};
use crate::quadrature::torus_grid;
use crate::summation::{apply_multiplier, circular_poisson_symbol};

/// Tolerance for the positivity checks.
pub const PSD_TOL: f64 = 1e-10;

/// `d/dr 𝕡_r[x] = Σ_{n≠0} |n|₂ r^{|n|₂-1} x̂(n) Uⁿ`, stored term by term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonDerivative {
    terms: Vec<DerivativeTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeTerm {
    pub n: MultiIndex,
    pub coeff: Complex64,
    pub exponent: f64,
}

impl PoissonDerivative {
    pub fn of(x: &QtElement) -> Self {
        let terms = x
            .terms()
            .filter(|(n, _)| !n.is_zero())
            .map(|(n, &c)| {
                let a = n.l2();
                DerivativeTerm {
                    n: n.clone(),
                    coeff: c * a,
                    exponent: a - 1.0,
                }
            })
            .collect();
        PoissonDerivative { terms }
    }

    pub fn terms(&self) -> &[DerivativeTerm] {
        &self.terms
    }

    /// The derivative at a fixed `r ∈ [0, 1)` as an element.
    pub fn at(&self, x: &QtElement, r: f64) -> Result<QtElement> {
        QtElement::from_coeffs(
            x.theta(),
            self.terms.iter().map(|t| (t.n.clone(), t.coeff * r.powf(t.exponent))),
        )
    }
}

/// `∫₀¹ r^{a-2}(1-r) dr` for `a > 1`.
pub fn exponent_integral(a: f64) -> f64 {
    1.0 / (a - 1.0) - 1.0 / a
}

/// `G_c(x)²`, exact.
pub fn g_square(x: &QtElement) -> QtElement {
    let theta = x.theta();
    let dr = PoissonDerivative::of(x);
    let mut terms = Vec::with_capacity(dr.terms.len() * dr.terms.len());
    for tm in &dr.terms {
        let minus = -&tm.n;
        let adj = tm.coeff.conj() * cocycle(theta, &tm.n, &minus).expect("same dimension").conj();
        for tn in &dr.terms {
            let w = exponent_integral(tm.exponent + tn.exponent + 2.0);
            let ph = cocycle(theta, &minus, &tn.n).expect("same dimension");
            terms.push((&tn.n - &tm.n, adj * tn.coeff * ph * w));
        }
    }
    QtElement::from_coeffs(theta, terms).expect("indices from x")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HardySide {
    Column,
    Row,
}

/// `‖G_c(x)‖_p` in the truncated representation (eigenvalues of `G_c(x)²`
/// clipped at zero before the square root).
pub fn g_norm(x: &QtElement, p: f64, n_rep: u32) -> Result<f64> {
    check_exponent(p)?;
    let rep = represent(&g_square(x), n_rep)?;
    let roots: Vec<f64> = hermitian_eigs(rep.matrix()).iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok(power_mean(&roots, p))
}

/// `|x̂(0)| + ‖G_c(x)‖_p`, or the same for `x*` on the row side.
pub fn hardy_norm(x: &QtElement, p: f64, side: HardySide, n_rep: u32) -> Result<f64> {
    let g = match side {
        HardySide::Column => g_norm(x, p, n_rep)?,
        HardySide::Row => g_norm(&x.adjoint(), p, n_rep)?,
    };
    Ok(x.trace().norm() + g)
}

/// The mixed norm: exact (`max`) for `p ≥ 2`; for `p < 2` only the upper
/// bound `min(column, row)` from the trivial decompositions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixedHardy {
    pub p: f64,
    pub column: f64,
    pub row: f64,
    pub value: f64,
    pub upper_bound_only: bool,
}

pub fn mixed_hardy(x: &QtElement, p: f64, n_rep: u32) -> Result<MixedHardy> {
    let column = hardy_norm(x, p, HardySide::Column, n_rep)?;
    let row = hardy_norm(x, p, HardySide::Row, n_rep)?;
    let upper_bound_only = p < 2.0;
    let value = if upper_bound_only { column.min(row) } else { column.max(row) };
    Ok(MixedHardy {
        p,
        column,
        row,
        value,
        upper_bound_only,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BmoVariant {
    /// `𝕡_r[|x - 𝕡_r x|²]`
    Standard,
    /// `𝕡_r[|x|²] - |𝕡_r x|²`
    Garsia,
}

/// `r = 1 - 2^{-j}` for `j = 0..=16` together with `0.1, …, 0.9`.
pub fn default_r_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=16).map(|j| 1.0 - 0.5f64.powi(j)).collect();
    grid.extend((1..10).map(|k| k as f64 / 10.0));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// The positive element whose norm enters the BMO sup at radius `r`.
pub fn bmo_inner(x: &QtElement, variant: BmoVariant, r: f64) -> Result<QtElement> {
    let pr = circular_poisson_symbol(r, x.dim())?;
    let px = apply_multiplier(&pr, x)?;
    match variant {
        BmoVariant::Standard => apply_multiplier(&pr, &x.try_sub(&px)?.abs_square()),
        BmoVariant::Garsia => apply_multiplier(&pr, &x.abs_square())?.try_sub(&px.abs_square()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BmoRow {
    pub r: f64,
    pub op_norm: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BmoReport {
    pub variant: BmoVariant,
    /// `max(|x̂(0)|, sup^{1/2})`.
    pub norm: f64,
    /// Grid sup of the operator norms of the inner elements.
    pub sup: f64,
    pub argmax_r: f64,
    pub min_eigenvalue: f64,
    pub rows: Vec<BmoRow>,
}

pub fn bmo_norm(x: &QtElement, variant: BmoVariant, r_grid: &[f64], n_rep: u32) -> Result<BmoReport> {
    if r_grid.is_empty() {
        return Err(Error::Schedule("empty r grid".into()));
    }
    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let rep = represent(&bmo_inner(x, variant, r)?, n_rep)?;
        let eig = hermitian_eigs(rep.matrix());
        rows.push(BmoRow {
            r,
            op_norm: rep.op_norm(),
            min_eigenvalue: eig.first().copied().unwrap_or(0.0),
        });
    }
    let top = rows.iter().max_by(|a, b| a.op_norm.total_cmp(&b.op_norm)).expect("nonempty");
    let min_eigenvalue = rows.iter().map(|r| r.min_eigenvalue).fold(f64::INFINITY, f64::min);
    Ok(BmoReport {
        variant,
        norm: x.trace().norm().max(top.op_norm.sqrt()),
        sup: top.op_norm,
        argmax_r: top.r,
        min_eigenvalue,
        rows,
    })
}

/// Upper constant for `S_std ≤ C·S_gar`.
pub const GARSIA_UPPER: f64 = (1.0 + SQRT_2) * (1.0 + SQRT_2);
/// Upper constant for `S_gar ≤ C·S_std`.
pub const GARSIA_LOWER: f64 = (2.0 + SQRT_2) * (2.0 + SQRT_2);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GarsiaCheck {
    pub standard_sup: f64,
    pub garsia_sup: f64,
    /// `S_gar / S_std`, bounded by `(2+√2)²`.
    pub ratio_low: f64,
    /// `S_std / S_gar`, bounded by `(1+√2)²`.
    pub ratio_high: f64,
    pub holds: bool,
}

pub fn garsia_equivalence_check(x: &QtElement, r_grid: &[f64], n_rep: u32) -> Result<GarsiaCheck> {
    let s_std = bmo_norm(x, BmoVariant::Standard, r_grid, n_rep)?.sup;
    let s_gar = bmo_norm(x, BmoVariant::Garsia, r_grid, n_rep)?.sup;
    let holds = s_std <= GARSIA_UPPER * s_gar + 1e-8 && s_gar <= GARSIA_LOWER * s_std + 1e-8;
    let (ratio_low, ratio_high) = if s_std == 0.0 && s_gar == 0.0 {
        (1.0, 1.0)
    } else {
        (s_gar / s_std, s_std / s_gar)
    };
    Ok(GarsiaCheck {
        standard_sup: s_std,
        garsia_sup: s_gar,
        ratio_low,
        ratio_high,
        holds,
    })
}

/// `𝕡_{r²}[|f|²] + |𝕡_{r²} f|² - 2𝕡_r[|𝕡_r f|²]`.
pub fn convexity_defect(f: &QtElement, r: f64) -> Result<QtElement> {
    let d = f.dim();
    let pr = circular_poisson_symbol(r, d)?;
    let pr2 = circular_poisson_symbol(r * r, d)?;
    let p2f = apply_multiplier(&pr2, f)?;
    let rhs = apply_multiplier(&pr2, &f.abs_square())?.try_add(&p2f.abs_square())?;
    let lhs = apply_multiplier(&pr, &apply_multiplier(&pr, f)?.abs_square())?;
    rhs.try_sub(&lhs.scale(Complex64::new(2.0, 0.0)))
}

/// Smallest eigenvalue of the truncated convexity defect.
pub fn convexity_check(f: &QtElement, r: f64, n_rep: u32) -> Result<f64> {
    let rep = represent(&convexity_defect(f, r)?, n_rep)?;
    Ok(hermitian_eigs(rep.matrix()).first().copied().unwrap_or(0.0))
}

/// `|τ(xy*)| / (‖x‖_{H₁ᶜ} ‖y‖_{BMOᶜ})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityRow {
    pub pairing: f64,
    pub hardy: f64,
    pub bmo: f64,
    pub ratio: f64,
}

pub fn duality_ratio(x: &QtElement, y: &QtElement, r_grid: &[f64], n_rep: u32) -> Result<DualityRow> {
    let pairing = x.try_mul(&y.adjoint())?.trace().norm();
    let hardy = hardy_norm(x, 1.0, HardySide::Column, n_rep)?;
    let bmo = bmo_norm(y, BmoVariant::Standard, r_grid, n_rep)?.norm;
    Ok(DualityRow {
        pairing,
        hardy,
        bmo,
        ratio: pairing / (hardy * bmo),
    })
}

/// `f(s) = Σ F_n e^{2πi n·s}` with square matrix coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTrigPoly {
    d: usize,
    size: usize,
    terms: Vec<(MultiIndex, DMatrix<Complex64>)>,
}

impl MatrixTrigPoly {
    pub fn new(d: usize, terms: Vec<(MultiIndex, DMatrix<Complex64>)>) -> Result<Self> {
        let size = terms.first().map_or(1, |(_, m)| m.nrows());
        for (n, m) in &terms {
            n.check_dim(d)?;
            if m.nrows() != size || m.ncols() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    found: m.nrows().max(m.ncols()),
                });
            }
        }
        Ok(MatrixTrigPoly { d, size, terms })
    }

    pub fn scalar(d: usize, terms: &[(MultiIndex, Complex64)]) -> Result<Self> {
        Self::new(
            d,
            terms.iter().map(|(n, c)| (n.clone(), DMatrix::from_element(1, 1, *c))).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn eval(&self, s: &[f64]) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.size, self.size);
        for (n, m) in &self.terms {
            out += m * Complex64::from_polar(1.0, 2.0 * PI * n.dot(s));
        }
        out
    }

    fn nonconstant(&self) -> impl Iterator<Item = &(MultiIndex, DMatrix<Complex64>)> {
        self.terms.iter().filter(|(n, _)| !n.is_zero())
    }
}

/// Discretization of the truncated cone `{|t - s| ≤ βε, ε < ε₀}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LusinParams {
    pub beta: f64,
    pub p: f64,
    pub eps0: f64,
    /// Geometric ε-layers `[ε₀qʲ⁺¹, ε₀qʲ]`.
    pub layers: usize,
    pub ratio: f64,
    /// Midpoints per radial (and half the angular) direction of the ball.
    pub nodes: usize,
    /// Midpoint samples per axis of `s ∈ 𝕀ᵈ`.
    pub samples: usize,
    pub max_evals: u64,
}

impl Default for LusinParams {
    fn default() -> Self {
        LusinParams {
            beta: 1.0,
            p: 2.0,
            eps0: 1.0,
            layers: 40,
            ratio: 0.8,
            nodes: 8,
            samples: 8,
            max_evals: 200_000_000,
        }
    }
}

impl LusinParams {
    /// Halves the ε and t mesh widths over the same truncated cone.
    pub fn refined(&self) -> Self {
        LusinParams {
            layers: 2 * self.layers,
            ratio: self.ratio.sqrt(),
            nodes: 2 * self.nodes,
            ..*self
        }
    }

    fn evaluations(&self, d: usize) -> u64 {
        let ball = if d == 1 { self.nodes } else { 2 * self.nodes * self.nodes } as u64;
        (self.samples as u64).pow(d as u32) * self.layers as u64 * ball
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LusinReport {
    pub d: usize,
    pub beta: f64,
    pub p: f64,
    pub g_norm: f64,
    pub s_norm: f64,
    /// `‖S̃‖_p / ‖G̃‖_p`; absent when `G̃ = 0`.
    pub ratio: Option<f64>,
    pub evaluations: u64,
}

/// Normalized `L_p(𝕀ᵈ; L_p(M_k))` norm of `s ↦ A(s)^{1/2}` from PSD samples.
fn sampled_norm(squares: &[DMatrix<Complex64>], p: f64) -> f64 {
    let roots: Vec<f64> = squares
        .iter()
        .flat_map(hermitian_eigs)
        .map(|v| v.max(0.0).sqrt())
        .collect();
    power_mean(&roots, p)
}

/// `G̃_c(f)(s)² = Σ_{m,n≠0} (2π)²|m||n| J(2π(|m|+|n|)) F_m* F_n e_{n-m}(s)`
/// with `J(c) = ∫₀^{ε₀} ε e^{-cε} dε`.
fn g_tilde_square(f: &MatrixTrigPoly, eps0: f64, s: &[f64]) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(f.size, f.size);
    for (m, fm) in f.nonconstant() {
        for (n, fn_) in f.nonconstant() {
            let (am, an) = (m.l2(), n.l2());
            let c = 2.0 * PI * (am + an);
            let j = (1.0 - (-c * eps0).exp() * (1.0 + c * eps0)) / (c * c);
            let w = 4.0 * PI * PI * am * an * j;
            let e = Complex64::from_polar(w, 2.0 * PI * (n.dot(s) - m.dot(s)));
            out += fm.adjoint() * fn_ * e;
        }
    }
    out
}

type Coefficient<'a> = (&'a MultiIndex, DMatrix<Complex64>);

/// Ball nodes `(offset, weight)` for the unit ball of ℝᵈ, `d ∈ {1, 2}`.
fn unit_ball_nodes(d: usize, nodes: usize) -> Vec<(Vec<f64>, f64)> {
    let h = 1.0 / nodes as f64;
    if d == 1 {
        return (0..2 * nodes)
            .map(|i| (vec![-1.0 + (i as f64 + 0.5) * h], h))
            .collect();
    }
    let angles = 2 * nodes;
    let dphi = 2.0 * PI / angles as f64;
    let mut out = Vec::with_capacity(nodes * angles);
    for i in 0..nodes {
        let rho = (i as f64 + 0.5) * h;
        for j in 0..angles {
            let phi = (j as f64 + 0.5) * dphi;
            out.push((vec![rho * phi.cos(), rho * phi.sin()], rho * h * dphi));
        }
    }
    out
}

/// `‖G̃_c(f)‖_p` (closed form in ε) against `‖S̃^β_c(f)‖_p` (tensor midpoint
/// rule on the truncated cone). Experimental: the two are only equivalent up
/// to unknown constants.
pub fn lusin_square_experiment(f: &MatrixTrigPoly, params: &LusinParams) -> Result<LusinReport> {
    let d = f.dim();
    if !(1..=2).contains(&d) {
        return Err(Error::Domain {
            name: "d",
            value: d as f64,
            domain: "{1, 2}",
        });
    }
    check_exponent(params.p)?;
    if !(params.beta > 0.0) || !(params.eps0 > 0.0) || !(0.0 < params.ratio && params.ratio < 1.0) {
        return Err(Error::Domain {
            name: "cone",
            value: params.beta,
            domain: "β > 0, ε₀ > 0, 0 < q < 1",
        });
    }
    let evaluations = params.evaluations(d);
    if evaluations > params.max_evals {
        return Err(Error::Budget {
            needed: evaluations,
            cap: params.max_evals,
        });
    }
    let grid = torus_grid(d, params.samples);
    let ball = unit_ball_nodes(d, params.nodes);
    // (ε, layer width) and the coefficients of d/dε at that ε
    let layers: Vec<(f64, f64, Vec<Coefficient>)> = (0..params.layers)
        .map(|j| {
            let hi = params.eps0 * params.ratio.powi(j as i32);
            let lo = hi * params.ratio;
            let eps = 0.5 * (lo + hi);
            let coeffs = f
                .nonconstant()
                .map(|(n, fm)| {
                    let a = 2.0 * PI * n.l2();
                    (n, fm * Complex64::new(-a * (-a * eps).exp(), 0.0))
                })
                .collect();
            (eps, hi - lo, coeffs)
        })
        .collect();

    let mut g_sq = Vec::with_capacity(grid.len());
    let mut s_sq = Vec::with_capacity(grid.len());
    let mut t = vec![0.0; d];
    for s in &grid {
        g_sq.push(g_tilde_square(f, params.eps0, s));
        let mut acc = DMatrix::<Complex64>::zeros(f.size, f.size);
        for (eps, width, coeffs) in &layers {
            let radius = params.beta * eps;
            // dt over the ball of radius βε, divided by ε^{d-1}
            let scale = width * radius.powi(d as i32) / eps.powi(d as i32 - 1);
            for (u, w) in &ball {
                for k in 0..d {
                    t[k] = s[k] + radius * u[k];
                }
                let mut v = DMatrix::<Complex64>::zeros(f.size, f.size);
                for (n, c) in coeffs {
                    v += c * Complex64::from_polar(1.0, 2.0 * PI * n.dot(&t));
                }
                acc += v.adjoint() * &v * Complex64::new(w * scale, 0.0);
            }
        }
        s_sq.push(acc);
    }
    let g_norm = sampled_norm(&g_sq, params.p);
    let s_norm = sampled_norm(&s_sq, params.p);
    Ok(LusinReport {
        d,
        beta: params.beta,
        p: params.p,
        g_norm,
        s_norm,
        ratio: (g_norm > 0.0).then(|| s_norm / g_norm),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::Theta;
    use crate::random::{random_element, random_theta, rng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar_part(x: &QtElement) -> (Complex64, f64) {
        let c0 = x.trace();
        let rest = x.try_sub(&QtElement::unit(x.theta()).scale(c0)).unwrap();
        (c0, rest.max_abs_coeff())
    }

    #[test]
    fn g_square_monomials() {
        let th = Arc::new(Theta::golden(3));
        assert!(g_square(&QtElement::unit(&th)).is_zero());
        for k in [[1, 0, 0], [0, -2, 0], [1, 1, -1], [2, -1, 3]] {
            let k = MultiIndex::from(k);
            let x = QtElement::monomial(&th, k.clone(), c(1.0)).unwrap();
            let (c0, rest) = scalar_part(&g_square(&x));
            let a = k.l2();
            // |k|² (1/(2|k|-1) - 1/(2|k|))
            let want = a * a * (1.0 / (2.0 * a - 1.0) - 1.0 / (2.0 * a));
            assert!((c0.re - want).abs() < 1e-12 && c0.im.abs() < 1e-12);
            assert!(rest < 1e-12);
        }
        let th1 = Arc::new(Theta::zero(1));
        let u = QtElement::generator(&th1, 1).unwrap();
        assert_eq!(g_square(&u).trace(), c(0.5));
    }

    #[test]
    fn g_square_matches_quadrature_in_r() {
        // ∫₀¹ |D_r|²(1-r) dr by Gauss-Legendre on the derivative elements
        let th = Arc::new(random_theta(2, &mut rng(1)));
        let x = random_element(&th, 2, 0.7, &mut rng(2));
        let dr = PoissonDerivative::of(&x);
        let (nodes, weights) = crate::quadrature::gauss_legendre(60);
        let mut acc = QtElement::zero(&th);
        for (t, w) in nodes.iter().zip(&weights) {
            // r = u⁴ tames the fractional powers r^{|m|+|n|-2} at r = 0
            let u = 0.5 * (t + 1.0);
            let r = u.powi(4);
            let jac = 4.0 * u.powi(3) * 0.5;
            let y = dr.at(&x, r).unwrap().abs_square();
            acc = acc.try_add(&y.scale(c(w * (1.0 - r) * jac))).unwrap();
        }
        assert!(g_square(&x).max_coeff_diff(&acc) < 1e-9);
    }

    #[test]
    fn g_square_is_selfadjoint_and_positive() {
        let mut g = rng(5);
        for _ in 0..10 {
            let th = Arc::new(random_theta(2, &mut g));
            let x = random_element(&th, 2, 0.6, &mut g);
            let gs = g_square(&x);
            assert!(gs.max_coeff_diff(&gs.adjoint()) < 1e-12);
            let rep = represent(&gs, 3).unwrap();
            assert!(rep.min_eigenvalue().unwrap() >= -PSD_TOL);
        }
    }

    #[test]
    fn hardy_examples() {
        let th = Arc::new(Theta::golden(2));
        let one = QtElement::unit(&th);
        assert_eq!(hardy_norm(&one, 1.5, HardySide::Column, 2).unwrap(), 1.0);
        let th1 = Arc::new(Theta::zero(1));
        let u = QtElement::generator(&th1, 1).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let h = hardy_norm(&u, p, HardySide::Column, 4).unwrap();
            assert!((h - 0.5f64.sqrt()).abs() < 1e-12);
        }
        let x = random_element(&th, 2, 0.8, &mut rng(9));
        let col = hardy_norm(&x, 2.0, HardySide::Column, 3).unwrap();
        let row = hardy_norm(&x.adjoint(), 2.0, HardySide::Row, 3).unwrap();
        assert!((col - row).abs() < 1e-10);
    }

    #[test]
    fn hardy_scaling_constants_and_monotonicity() {
        let th = Arc::new(random_theta(2, &mut rng(4)));
        let x = random_element(&th, 2, 0.8, &mut rng(6));
        let z = Complex64::new(-1.5, 2.0);
        for side in [HardySide::Column, HardySide::Row] {
            let h = hardy_norm(&x, 1.3, side, 3).unwrap();
            let hz = hardy_norm(&x.scale(z), 1.3, side, 3).unwrap();
            assert!((hz - z.norm() * h).abs() < 1e-10);
        }
        let shifted = x.try_add(&QtElement::unit(&th).scale(z)).unwrap();
        assert!((g_norm(&shifted, 1.7, 3).unwrap() - g_norm(&x, 1.7, 3).unwrap()).abs() < 1e-10);
        let mut last = 0.0;
        for p in [1.0, 1.5, 2.0, 3.0, 6.0] {
            let h = hardy_norm(&x, p, HardySide::Column, 3).unwrap();
            assert!(h >= last - 1e-12);
            last = h;
        }
    }

    #[test]
    fn mixed_hardy_labels_upper_bound() {
        let th = Arc::new(Theta::golden(2));
        let x = random_element(&th, 1, 1.0, &mut rng(3));
        let lo = mixed_hardy(&x, 1.0, 2).unwrap();
        assert!(lo.upper_bound_only && lo.value == lo.column.min(lo.row));
        let hi = mixed_hardy(&x, 3.0, 2).unwrap();
        assert!(!hi.upper_bound_only && hi.value == hi.column.max(hi.row));
    }

    #[test]
    fn default_grid_shape() {
        let g = default_r_grid();
        assert_eq!(g.first(), Some(&0.0));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.contains(&0.75) && g.contains(&(1.0 - 0.5f64.powi(16))));
        assert_eq!(g.len(), 17 + 8);
    }

    #[test]
    fn bmo_monomials() {
        let th = Arc::new(Theta::golden(2));
        let grid = default_r_grid();
        for k in [[1, 0], [2, -1], [0, 3]] {
            let k = MultiIndex::from(k);
            let a = k.l2();
            let x = QtElement::monomial(&th, k, c(1.0)).unwrap();
            for r in [0.0, 0.3, 0.9] {
                let (std0, rest) = scalar_part(&bmo_inner(&x, BmoVariant::Standard, r).unwrap());
                assert!((std0.re - (1.0 - r.powf(a)).powi(2)).abs() < 1e-12 && rest < 1e-12);
                let (gar0, rest) = scalar_part(&bmo_inner(&x, BmoVariant::Garsia, r).unwrap());
                assert!((gar0.re - (1.0 - r.powf(2.0 * a))).abs() < 1e-12 && rest < 1e-12);
            }
            for v in [BmoVariant::Standard, BmoVariant::Garsia] {
                let rep = bmo_norm(&x, v, &grid, 2).unwrap();
                assert!((rep.norm - 1.0).abs() < 1e-12);
                assert_eq!(rep.argmax_r, 0.0);
            }
            let chk = garsia_equivalence_check(&x, &grid, 2).unwrap();
            assert!(chk.holds && (chk.ratio_low - 1.0).abs() < 1e-12);
        }
        let one = QtElement::unit(&th);
        assert_eq!(bmo_norm(&one, BmoVariant::Standard, &grid, 2).unwrap().norm, 1.0);
        let chk = garsia_equivalence_check(&one, &grid, 2).unwrap();
        assert_eq!((chk.ratio_low, chk.ratio_high), (1.0, 1.0));
    }

    #[test]
    fn bmo_random_positive_and_equivalent() {
        let mut g = rng(12);
        let grid = default_r_grid();
        for _ in 0..5 {
            let th = Arc::new(random_theta(2, &mut g));
            let x = random_element(&th, 2, 0.6, &mut g);
            for v in [BmoVariant::Standard, BmoVariant::Garsia] {
                assert!(bmo_norm(&x, v, &grid, 3).unwrap().min_eigenvalue >= -PSD_TOL);
            }
            let shifted = x.try_add(&QtElement::unit(&th).scale(c(3.0))).unwrap();
            let a = bmo_norm(&x, BmoVariant::Garsia, &grid, 3).unwrap().sup;
            let b = bmo_norm(&shifted, BmoVariant::Garsia, &grid, 3).unwrap().sup;
            assert!((a - b).abs() < 1e-10);
            assert!(garsia_equivalence_check(&x, &grid, 3).unwrap().holds);
        }
    }

    #[test]
    fn convexity_examples() {
        let th = Arc::new(Theta::golden(2));
        let k = MultiIndex::from([1, -2]);
        let a = k.l2();
        let x = QtElement::monomial(&th, k, c(1.0)).unwrap();
        for r in [0.2, 0.5, 0.9] {
            let (c0, rest) = scalar_part(&convexity_defect(&x, r).unwrap());
            assert!((c0.re - (1.0 - r.powf(2.0 * a)).powi(2)).abs() < 1e-12 && rest < 1e-12);
        }
        assert!(convexity_defect(&QtElement::unit(&th), 0.5).unwrap().max_abs_coeff() < 1e-15);
        let mut g = rng(21);
        for _ in 0..5 {
            let th = Arc::new(random_theta(2, &mut g));
            let f = random_element(&th, 2, 0.7, &mut g);
            for r in [0.2, 0.5, 0.9] {
                assert!(convexity_check(&f, r, 3).unwrap() >= -PSD_TOL);
            }
        }
    }

    #[test]
    fn duality_ratio_is_finite() {
        let th = Arc::new(Theta::golden(2));
        let x = random_element(&th, 1, 1.0, &mut rng(30));
        let y = random_element(&th, 1, 1.0, &mut rng(31));
        let row = duality_ratio(&x, &y, &default_r_grid(), 2).unwrap();
        assert!(row.ratio.is_finite() && row.ratio > 0.0);
    }

    fn monomial_1d(k: i64) -> MatrixTrigPoly {
        MatrixTrigPoly::scalar(1, &[(MultiIndex::from([k]), c(1.0))]).unwrap()
    }

    #[test]
    fn lusin_constant_is_zero() {
        let f = MatrixTrigPoly::new(2, vec![(MultiIndex::zero(2), DMatrix::identity(2, 2).map(|v: f64| c(v)))]).unwrap();
        let rep = lusin_square_experiment(&f, &LusinParams::default()).unwrap();
        assert_eq!((rep.g_norm, rep.s_norm, rep.ratio), (0.0, 0.0, None));
    }

    #[test]
    fn lusin_one_dimensional_closed_forms() {
        // f(s) = e^{2πis}: G̃² = (2π)² J(4π) and S̃² = 2β (2π)² J(4π)
        // are constant in s, so the ratio is √(2β) up to quadrature error.
        let f = monomial_1d(1);
        let cc = 4.0 * PI;
        let j = (1.0 - (-cc).exp() * (1.0 + cc)) / (cc * cc);
        for beta in [0.5, 1.0, 2.0] {
            let params = LusinParams { beta, ..LusinParams::default() };
            let rep = lusin_square_experiment(&f, &params).unwrap();
            assert!((rep.g_norm - (4.0 * PI * PI * j).sqrt()).abs() < 1e-12);
            let want = (2.0 * beta * 4.0 * PI * PI * j).sqrt();
            assert!((rep.s_norm - want).abs() < 5e-2 * want, "{} vs {want}", rep.s_norm);
            let fine = lusin_square_experiment(&f, &params.refined()).unwrap();
            assert!((fine.s_norm - want).abs() < (rep.s_norm - want).abs() + 1e-12);
        }
    }

    #[test]
    fn lusin_two_dimensional_matrix_case() {
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.5), c(0.0), c(-1.0)]);
        let b = DMatrix::from_row_slice(2, 2, &[c(0.0), Complex64::new(0.0, 1.0), c(1.0), c(0.0)]);
        let f = MatrixTrigPoly::new(2, vec![(MultiIndex::from([1, 0]), a), (MultiIndex::from([1, -1]), b)]).unwrap();
        let params = LusinParams {
            samples: 4,
            nodes: 4,
            layers: 20,
            ratio: 0.7,
            ..LusinParams::default()
        };
        let coarse = lusin_square_experiment(&f, &params).unwrap();
        let fine = lusin_square_experiment(&f, &params.refined()).unwrap();
        let (r0, r1) = (coarse.ratio.unwrap(), fine.ratio.unwrap());
        assert!((1.0 / 50.0..50.0).contains(&r1));
        assert!((r1 / r0 - 1.0).abs() < 0.1);
        let wider = lusin_square_experiment(&f, &LusinParams { beta: 2.0, ..params }).unwrap();
        assert!(wider.s_norm > coarse.s_norm);
    }

    #[test]
    fn lusin_rejects_bad_input() {
        let f = MatrixTrigPoly::scalar(3, &[(MultiIndex::from([1, 0, 0]), c(1.0))]).unwrap();
        assert!(lusin_square_experiment(&f, &LusinParams::default()).is_err());
        let params = LusinParams {
            max_evals: 10,
            ..LusinParams::default()
        };
        assert!(matches!(
            lusin_square_experiment(&monomial_1d(1), &params),
            Err(Error::Budget { .. })
        ));
    }
}
