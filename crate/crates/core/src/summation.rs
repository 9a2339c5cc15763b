//! Fourier multipliers and the classical summation methods as symbols.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::QtElement;
use crate::error::{Error, Result};
use crate::lattice::{folner_overlap_f64, LatticeNorm, MultiIndex};
use crate::matrix::lp_norm_estimate;
use crate::quadrature::{integrate, Tolerance};
use crate::special::{bessel_j_reduced, gamma, gamma_c};

type SymbolFn = dyn Fn(&MultiIndex) -> Complex64 + Send + Sync;
type ProfileFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// A function on `ℤᵈ`, acting on elements coefficientwise.
#[derive(Clone)]
pub struct MultiplierSymbol {
    d: usize,
    eval: Arc<SymbolFn>,
    support: Option<(LatticeNorm, f64)>,
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol")
            .field("d", &self.d)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl MultiplierSymbol {
    pub fn new(d: usize, eval: impl Fn(&MultiIndex) -> Complex64 + Send + Sync + 'static) -> Self {
        MultiplierSymbol {
            d,
            eval: Arc::new(eval),
            support: None,
        }
    }

    /// Declares that the symbol vanishes where `norm(m) > bound`.
    pub fn with_support(mut self, norm: LatticeNorm, bound: f64) -> Self {
        self.support = Some((norm, bound));
        self
    }

    pub fn constant(d: usize, c: Complex64) -> Self {
        Self::new(d, move |_| c)
    }

    /// Indicator of the origin.
    pub fn origin(d: usize) -> Self {
        Self::new(d, |m| Complex64::new(if m.is_zero() { 1.0 } else { 0.0 }, 0.0))
            .with_support(LatticeNorm::Max, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn support_bound(&self) -> Option<(LatticeNorm, f64)> {
        self.support
    }

    pub fn eval(&self, m: &MultiIndex) -> Complex64 {
        if let Some((norm, bound)) = self.support {
            if m.norm(norm) > bound {
                return Complex64::new(0.0, 0.0);
            }
        }
        (self.eval)(m)
    }

    /// Pointwise product; `T_{φψ} = T_φ ∘ T_ψ`.
    pub fn product(&self, other: &MultiplierSymbol) -> Result<MultiplierSymbol> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        let (a, b) = (self.clone(), other.clone());
        let mut out = Self::new(self.d, move |m| a.eval(m) * b.eval(m));
        out.support = match (self.support, other.support) {
            (Some(s), None) | (None, Some(s)) => Some(s),
            (Some(s), Some(t)) if s.0 == t.0 => Some((s.0, s.1.min(t.1))),
            (Some(s), Some(_)) => Some(s),
            (None, None) => None,
        };
        Ok(out)
    }
}

/// `T_φ x = Σ φ(m) x̂(m) U^m`.
pub fn apply_multiplier(phi: &MultiplierSymbol, x: &QtElement) -> Result<QtElement> {
    if phi.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: phi.dim(),
        });
    }
    Ok(x.map_coeffs(|m, c| phi.eval(m) * c))
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain {
            name: "r",
            value: r,
            domain: "[0, 1)",
        });
    }
    Ok(())
}

/// `∏ⱼ (1 - |mⱼ|/(N+1))₊`.
pub fn fejer_symbol(n: u32, d: usize) -> MultiplierSymbol {
    let scale = 1.0 / (n as f64 + 1.0);
    MultiplierSymbol::new(d, move |m| {
        real(m.entries().iter().map(|&k| (1.0 - k.abs() as f64 * scale).max(0.0)).product())
    })
    .with_support(LatticeNorm::Max, n as f64)
}

/// `r^{|m|₁}`.
pub fn square_poisson_symbol(r: f64, d: usize) -> Result<MultiplierSymbol> {
    check_radius(r)?;
    Ok(MultiplierSymbol::new(d, move |m| real(r.powi(m.l1() as i32))))
}

/// `r^{|m|₂}`.
pub fn circular_poisson_symbol(r: f64, d: usize) -> Result<MultiplierSymbol> {
    check_radius(r)?;
    Ok(MultiplierSymbol::new(d, move |m| {
        if m.is_zero() {
            real(1.0)
        } else {
            real(r.powf(m.l2()))
        }
    }))
}

/// `(1 - |m|²/R²)^α` on the ball `|m|₂ ≤ R`, principal branch.
pub fn bochner_riesz_symbol(alpha: Complex64, radius: f64, d: usize) -> Result<MultiplierSymbol> {
    if !(radius > 0.0) {
        return Err(Error::Domain {
            name: "R",
            value: radius,
            domain: "(0, ∞)",
        });
    }
    if alpha.re < 0.0 || (alpha.re == 0.0 && alpha.im != 0.0) {
        return Err(Error::Domain {
            name: "Re(alpha)",
            value: alpha.re,
            domain: "(0, ∞), or alpha = 0",
        });
    }
    let r2 = radius * radius;
    Ok(MultiplierSymbol::new(d, move |m| real_power(1.0 - m.l2_squared() as f64 / r2, alpha))
        .with_support(LatticeNorm::L2, radius))
}

// base^α for base ≥ 0; 0^α = 0 unless α = 0.
fn real_power(base: f64, alpha: Complex64) -> Complex64 {
    if base <= 0.0 {
        return if alpha == Complex64::new(0.0, 0.0) && base == 0.0 {
            real(1.0)
        } else {
            real(0.0)
        };
    }
    if alpha.im == 0.0 {
        return real(base.powf(alpha.re));
    }
    (alpha * base.ln()).exp()
}

/// Heat semigroup `e^{-4π²|m|²t}`.
pub fn heat_symbol(t: f64, d: usize) -> Result<MultiplierSymbol> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            name: "t",
            value: t,
            domain: "[0, ∞)",
        });
    }
    Ok(MultiplierSymbol::new(d, move |m| {
        real((-4.0 * PI * PI * m.l2_squared() as f64 * t).exp())
    }))
}

/// Subordinated Poisson semigroup `e^{-2π|m|₂t}`.
pub fn poisson_semigroup_symbol(t: f64, d: usize) -> Result<MultiplierSymbol> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            name: "t",
            value: t,
            domain: "[0, ∞)",
        });
    }
    Ok(MultiplierSymbol::new(d, move |m| real((-2.0 * PI * m.l2() * t).exp())))
}

/// A profile `Φ` on `ℝᵈ` with `Φ(0) = 1`, its transform `φ`, and constants
/// with `|Φ(s)| + |φ(s)| ≤ A(1+|s|)^{-d-δ}`.
#[derive(Clone)]
pub struct PhiFunction {
    d: usize,
    profile: Arc<ProfileFn>,
    transform: Arc<ProfileFn>,
    decay_constant: f64,
    decay_exponent: f64,
}

impl fmt::Debug for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiFunction")
            .field("d", &self.d)
            .field("A", &self.decay_constant)
            .field("delta", &self.decay_exponent)
            .finish_non_exhaustive()
    }
}

/// `Γ((d+1)/2) / π^{(d+1)/2}`, the normalization of the Poisson kernel on `ℝᵈ`.
pub fn poisson_constant(d: usize) -> f64 {
    let h = (d as f64 + 1.0) / 2.0;
    gamma(h) / PI.powf(h)
}

impl PhiFunction {
    pub fn new(
        d: usize,
        profile: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
        transform: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
        decay_constant: f64,
        decay_exponent: f64,
    ) -> Self {
        PhiFunction {
            d,
            profile: Arc::new(profile),
            transform: Arc::new(transform),
            decay_constant,
            decay_exponent,
        }
    }

    /// `Φ(s) = e^{-2π|s|}`, `φ(s) = c_d (1+|s|²)^{-(d+1)/2}`.
    pub fn poisson(d: usize) -> Self {
        let c = poisson_constant(d);
        let h = (d as f64 + 1.0) / 2.0;
        PhiFunction::new(
            d,
            |s| real((-2.0 * PI * norm(s)).exp()),
            move |s| real(c * (1.0 + norm_sq(s)).powf(-h)),
            1.0 + c * 2f64.powf(h),
            1.0,
        )
    }

    /// `Φ(s) = (1-|s|²)^α₊` with its radial transform
    /// `Γ(α+1) J_{d/2+α}(2π|s|) / (π^α |s|^{d/2+α})`. The decay exponent is
    /// `α - (d-1)/2`; the constant is measured on a radial grid.
    pub fn bochner_riesz(d: usize, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::Domain {
                name: "alpha",
                value: alpha,
                domain: "[0, ∞)",
            });
        }
        let transform = move |s: &[f64]| real(bochner_riesz_transform(d, alpha, norm(s)));
        let delta = alpha - (d as f64 - 1.0) / 2.0;
        let mut a: f64 = 0.0;
        for i in 0..=4000 {
            let rho = i as f64 * 0.05;
            let phi = bochner_riesz_transform(d, alpha, rho).abs();
            let big = (1.0 - rho * rho).max(0.0).powf(alpha);
            a = a.max((big + phi) * (1.0 + rho).powf(d as f64 + delta));
        }
        Ok(PhiFunction::new(
            d,
            move |s| real((1.0 - norm_sq(s)).max(0.0).powf(alpha)),
            transform,
            a * 1.05,
            delta,
        ))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `Φ(s)`.
    pub fn profile(&self, s: &[f64]) -> Complex64 {
        (self.profile)(s)
    }

    /// `φ(s)`.
    pub fn transform(&self, s: &[f64]) -> Complex64 {
        (self.transform)(s)
    }

    /// `φ_ε(s) = ε^{-d} φ(s/ε)`.
    pub fn scaled_transform(&self, eps: f64, s: &[f64]) -> Complex64 {
        let t: Vec<f64> = s.iter().map(|x| x / eps).collect();
        self.transform(&t) / eps.powi(self.d as i32)
    }

    pub fn decay_constant(&self) -> f64 {
        self.decay_constant
    }

    pub fn decay_exponent(&self) -> f64 {
        self.decay_exponent
    }

    /// Largest value of `(|Φ|+|φ|)(1+|s|)^{d+δ} / A` over the samples; at
    /// most 1 when the decay condition holds there.
    pub fn decay_ratio(&self, samples: &[Vec<f64>]) -> f64 {
        let e = self.d as f64 + self.decay_exponent;
        samples
            .iter()
            .map(|s| (self.profile(s).norm() + self.transform(s).norm()) * (1.0 + norm(s)).powf(e) / self.decay_constant)
            .fold(0.0, f64::max)
    }
}

fn norm_sq(s: &[f64]) -> f64 {
    s.iter().map(|x| x * x).sum()
}

fn norm(s: &[f64]) -> f64 {
    norm_sq(s).sqrt()
}

fn bochner_riesz_transform(d: usize, alpha: f64, rho: f64) -> f64 {
    let nu = d as f64 / 2.0 + alpha;
    // J_ν(2πρ)/ρ^ν = π^ν · J_ν(x)/(x/2)^ν at x = 2πρ
    let reduced = bessel_j_reduced(nu, 2.0 * PI * rho).expect("order and argument are nonnegative");
    gamma(alpha + 1.0) * PI.powf(nu - alpha) * reduced
}

/// `m ↦ Φ(εm)`.
pub fn phi_eps_symbol(phi: &PhiFunction, eps: f64) -> Result<MultiplierSymbol> {
    if !(eps > 0.0) {
        return Err(Error::Domain {
            name: "eps",
            value: eps,
            domain: "(0, ∞)",
        });
    }
    let phi = phi.clone();
    Ok(MultiplierSymbol::new(phi.dim(), move |m| {
        let s: Vec<f64> = m.entries().iter().map(|&k| eps * k as f64).collect();
        phi.profile(&s)
    }))
}

/// `C_{β,δ} = 2Γ(β+δ+1) / (Γ(δ+1)Γ(β))`.
pub fn br_constant(beta: Complex64, delta: f64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    2.0 * gamma_c(beta + delta + one) / (gamma_c(real(delta + 1.0)) * gamma_c(beta))
}

/// One side-by-side evaluation of the Bochner-Riesz recurrence at `v`:
/// `(1-v²)^{β+δ}` and `C_{β,δ} ∫_v¹ (1-t²)^{β-1} t^{2δ+1} (1-v²/t²)^δ dt`.
pub fn br_recurrence_sides(beta: Complex64, delta: f64, v: f64) -> Result<(Complex64, Complex64)> {
    let one = real(1.0);
    let lhs = real_power(1.0 - v * v, beta + delta);
    if v >= 1.0 {
        return Ok((lhs, real(0.0)));
    }
    let tol = Tolerance::absolute(1e-10);
    let integral = if delta < 0.0 {
        // t² = v² + (1-v²)u moves the singularity at t = v to u = 0
        let w = 1.0 - v * v;
        let e = integrate(
            |u: f64| {
                if u <= 0.0 || u >= 1.0 {
                    return real(0.0);
                }
                let t2 = v * v + w * u;
                real_power(1.0 - t2, beta - one) * (u * w).powf(delta) * 0.5 * w
            },
            0.0,
            1.0,
            tol,
        )
        .map_err(|e| at_v(e, v))?;
        e.value
    } else {
        let e = integrate(
            |t: f64| {
                if t >= 1.0 || t <= 0.0 {
                    return real(0.0);
                }
                let inner = (1.0 - v * v / (t * t)).max(0.0);
                real_power(1.0 - t * t, beta - one) * t.powf(2.0 * delta + 1.0) * inner.powf(delta)
            },
            v,
            1.0,
            tol,
        )
        .map_err(|e| at_v(e, v))?;
        e.value
    };
    Ok((lhs, br_constant(beta, delta) * integral))
}

fn at_v(e: Error, v: f64) -> Error {
    match e {
        Error::Quadrature {
            estimate,
            error,
            evaluations,
            ..
        } => Error::Quadrature {
            at: v,
            estimate,
            error,
            evaluations,
        },
        other => other,
    }
}

/// Largest `|LHS - RHS|` of the recurrence over `v_grid`.
pub fn br_recurrence_check(beta: Complex64, delta: f64, v_grid: &[f64]) -> Result<f64> {
    if !(beta.re > 0.0) {
        return Err(Error::Domain {
            name: "Re(beta)",
            value: beta.re,
            domain: "(0, ∞)",
        });
    }
    if !(delta > -0.5) {
        return Err(Error::Domain {
            name: "delta",
            value: delta,
            domain: "(-1/2, ∞)",
        });
    }
    let mut worst: f64 = 0.0;
    for &v in v_grid {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain {
                name: "v",
                value: v,
                domain: "[0, 1]",
            });
        }
        let (l, r) = br_recurrence_sides(beta, delta, v)?;
        worst = worst.max((l - r).norm());
    }
    Ok(worst)
}

/// Summation methods; the schedule parameter is `N`, `r`, `R`, `t` or `ε`.
#[derive(Debug, Clone)]
pub enum Method {
    Fejer,
    SquarePoisson,
    CircularPoisson,
    BochnerRiesz { alpha: Complex64 },
    Heat,
    PhiEps(PhiFunction),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Fejer => "fejer",
            Method::SquarePoisson => "square-poisson",
            Method::CircularPoisson => "circular-poisson",
            Method::BochnerRiesz { .. } => "bochner-riesz",
            Method::Heat => "heat",
            Method::PhiEps(_) => "phi-eps",
        }
    }

    /// The symbol at schedule parameter `param`.
    pub fn symbol(&self, param: f64, d: usize) -> Result<MultiplierSymbol> {
        match self {
            Method::Fejer => {
                if !(param >= 0.0 && param.fract() == 0.0 && param <= u32::MAX as f64) {
                    return Err(Error::Domain {
                        name: "N",
                        value: param,
                        domain: "nonnegative integers",
                    });
                }
                Ok(fejer_symbol(param as u32, d))
            }
            Method::SquarePoisson => square_poisson_symbol(param, d),
            Method::CircularPoisson => circular_poisson_symbol(param, d),
            Method::BochnerRiesz { alpha } => bochner_riesz_symbol(*alpha, param, d),
            Method::Heat => heat_symbol(param, d),
            Method::PhiEps(phi) => {
                if phi.dim() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: phi.dim(),
                    });
                }
                phi_eps_symbol(phi, param)
            }
        }
    }

    /// `true` when the mean approaches the identity as the parameter grows.
    pub fn increasing(&self) -> bool {
        !matches!(self, Method::Heat | Method::PhiEps(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConvergenceRow {
    pub param: f64,
    /// `‖A_N(mean - x)‖_p` from the truncated representation.
    pub error: f64,
    /// Coefficient-side closed form, available at `p = 2`.
    pub exact_error: Option<f64>,
    pub defect: Option<f64>,
}

/// `Σ |1-φ(m)|² |x̂(m)|² overlap(N, m)`, square-rooted.
pub fn exact_l2_error(symbol: &MultiplierSymbol, x: &QtElement, n_rep: u32) -> f64 {
    x.terms()
        .map(|(m, c)| (real(1.0) - symbol.eval(m)).norm_sqr() * c.norm_sqr() * folner_overlap_f64(n_rep, m))
        .sum::<f64>()
        .sqrt()
}

/// Error of the mean against `x` along a schedule.
pub fn mean_convergence_table(
    x: &QtElement,
    method: &Method,
    p: f64,
    schedule: &[f64],
    n_rep: u32,
) -> Result<Vec<ConvergenceRow>> {
    if schedule.is_empty() {
        return Err(Error::Schedule("empty".into()));
    }
    for w in schedule.windows(2) {
        let ok = if method.increasing() { w[1] >= w[0] } else { w[1] <= w[0] };
        if !ok {
            return Err(Error::Schedule(format!(
                "{} schedule must be {}; found {} then {}",
                method.name(),
                if method.increasing() { "nondecreasing" } else { "nonincreasing" },
                w[0],
                w[1]
            )));
        }
    }
    let d = x.dim();
    schedule
        .iter()
        .map(|&param| {
            let symbol = method.symbol(param, d)?;
            let diff = apply_multiplier(&symbol, x)?.try_sub(x)?;
            let error = lp_norm_estimate(&diff, p, n_rep)?;
            let exact_error = (p == 2.0).then(|| exact_l2_error(&symbol, x, n_rep));
            Ok(ConvergenceRow {
                param,
                error,
                exact_error,
                defect: exact_error.map(|e| (e - error).abs()),
            })
        })
        .collect()
}

/// `(d-1)|1/2 - 1/p|`.
pub fn critical_index(d: usize, p: f64) -> f64 {
    (d as f64 - 1.0) * (0.5 - 1.0 / p).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SteinRow {
    pub p: f64,
    pub alpha: f64,
    pub critical: f64,
    pub above_critical: bool,
    pub radius: f64,
    /// `‖A_N(B_R^α x - x)‖_p` at the final radius.
    pub final_error: f64,
}

/// Bochner-Riesz mean-convergence errors at radius `radius` over a grid of
/// exponents and orders.
pub fn stein_index_sweep(
    x: &QtElement,
    p_grid: &[f64],
    alpha_grid: &[f64],
    radius: f64,
    n_rep: u32,
) -> Result<Vec<SteinRow>> {
    if p_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::Schedule("empty p or alpha grid".into()));
    }
    let d = x.dim();
    let mut rows = Vec::with_capacity(p_grid.len() * alpha_grid.len());
    for &p in p_grid {
        let critical = critical_index(d, p);
        for &alpha in alpha_grid {
            let symbol = bochner_riesz_symbol(real(alpha), radius, d)?;
            let diff = apply_multiplier(&symbol, x)?.try_sub(x)?;
            rows.push(SteinRow {
                p,
                alpha,
                critical,
                above_critical: alpha > critical,
                radius,
                final_error: lp_norm_estimate(&diff, p, n_rep)?,
            });
        }
    }
    Ok(rows)
}
