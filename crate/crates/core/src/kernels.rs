//! Scalar summation kernels on the torus `[0,1)ᵈ`.
//!
//! Points are identified with `z = e^{2πis}`, so `z^m = e^{2πi m·s}` and Haar
//! measure is Lebesgue measure on the unit cube.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{FolnerBox, MultiIndex};
use crate::quadrature::{integrate, integrate_pieces, torus_grid, Tolerance};
use crate::summation::{poisson_constant, MultiplierSymbol, PhiFunction};

pub use crate::special::bessel_j;

/// A point of the torus, coordinates reduced into `[0,1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusPoint {
    s: Vec<f64>,
}

impl TorusPoint {
    pub fn new(s: impl Into<Vec<f64>>) -> Self {
        let s = s
            .into()
            .into_iter()
            .map(|x| {
                let r = x.rem_euclid(1.0);
                if r >= 1.0 {
                    0.0
                } else {
                    r
                }
            })
            .collect();
        TorusPoint { s }
    }

    pub fn origin(d: usize) -> Self {
        TorusPoint { s: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.s
    }

    /// `z^m = e^{2πi m·s}`.
    pub fn character(&self, m: &MultiIndex) -> Complex64 {
        Complex64::cis(2.0 * PI * m.dot(&self.s))
    }

    pub fn add(&self, other: &TorusPoint) -> TorusPoint {
        TorusPoint::new(self.s.iter().zip(&other.s).map(|(a, b)| a + b).collect::<Vec<_>>())
    }

    pub fn sub(&self, other: &TorusPoint) -> TorusPoint {
        TorusPoint::new(self.s.iter().zip(&other.s).map(|(a, b)| a - b).collect::<Vec<_>>())
    }

    /// Representative in `[-1/2, 1/2)` of each coordinate.
    pub fn centered(&self) -> Vec<f64> {
        self.s.iter().map(|&x| if x >= 0.5 { x - 1.0 } else { x }).collect()
    }
}

/// One-dimensional Fejér kernel `(1/(N+1)) (sin π(N+1)s / sin πs)²`.
pub fn fejer_1d(n: u32, s: f64) -> f64 {
    let k = n as f64 + 1.0;
    let den = (PI * s).sin();
    if den.abs() < 1e-7 {
        // near the peak: direct sum of the symbol
        return 1.0 + 2.0 * (1..=n).map(|j| (1.0 - j as f64 / k) * (2.0 * PI * j as f64 * s).cos()).sum::<f64>();
    }
    let num = (PI * k * s).sin();
    num * num / (k * den * den)
}

/// Square Fejér kernel, a product of one-dimensional kernels.
pub fn fejer_kernel(n: u32, s: &TorusPoint) -> f64 {
    s.coords().iter().map(|&x| fejer_1d(n, x)).product()
}

/// The bound `(π²/2)(N+1)/(1+(N+1)²s²)` for `s ∈ [-1/2, 1/2]`.
pub fn fejer_1d_bound(n: u32, s: f64) -> f64 {
    let k = n as f64 + 1.0;
    0.5 * PI * PI * k / (1.0 + k * k * s * s)
}

/// `(1-r²) / (1 - 2r cos 2πs + r²)`.
pub fn poisson_1d(r: f64, s: f64) -> f64 {
    // 1 - 2r cos 2πs + r² = (1-r)² + 4r sin²πs, without the cancellation near r = 1
    let h = (PI * s).sin();
    (1.0 - r) * (1.0 + r) / ((1.0 - r) * (1.0 - r) + 4.0 * r * h * h)
}

/// Square Poisson kernel `Σ r^{|m|₁} z^m`, a product of one-dimensional kernels.
pub fn square_poisson_kernel(r: f64, s: &TorusPoint) -> Result<f64> {
    check_r(r)?;
    Ok(s.coords().iter().map(|&x| poisson_1d(r, x)).product())
}

fn check_r(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain {
            name: "r",
            value: r,
            domain: "[0, 1)",
        });
    }
    Ok(())
}

fn check_kernel_dim(d: usize) -> Result<()> {
    if !(1..=3).contains(&d) {
        return Err(Error::Domain {
            name: "d",
            value: d as f64,
            domain: "{1, 2, 3}",
        });
    }
    Ok(())
}

/// `ε = -ln r / 2π`, so that `r = e^{-2πε}`.
pub fn poisson_eps(r: f64) -> f64 {
    -r.ln() / (2.0 * PI)
}

/// Poisson kernel on `ℝᵈ`: `c_d ε / (ε² + |s|²)^{(d+1)/2}`.
pub fn poisson_density(d: usize, eps: f64, s: &[f64]) -> f64 {
    let g = eps * eps + s.iter().map(|x| x * x).sum::<f64>();
    poisson_constant(d) * eps * density_power(d, g)
}

// g^{-(d+1)/2} without a general pow where possible
fn density_power(d: usize, g: f64) -> f64 {
    match d {
        1 => 1.0 / g,
        2 => 1.0 / (g * g.sqrt()),
        3 => 1.0 / (g * g),
        _ => g.powf(-(d as f64 + 1.0) / 2.0),
    }
}

fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => 2.0 * PI.powf(d as f64 / 2.0) / crate::special::gamma(d as f64 / 2.0),
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Upper bound for `Σ_{|m|₂ > M} r^{|m|₂}` over `ℤᵈ`.
pub fn fourier_tail_bound(d: usize, r: f64, m: u32) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let root = (d as f64).sqrt() / 2.0;
    let a = m as f64 - root;
    if a <= 0.0 {
        return f64::INFINITY;
    }
    let lam = -r.ln();
    // ∫_a^∞ ρ^k e^{-λρ} dρ = e^{-λa} Σ_j k!/(k-j)! a^{k-j} / λ^{j+1}
    let k = d - 1;
    let mut falling = 1.0;
    let mut sum = 0.0;
    for j in 0..=k {
        sum += falling * a.powi((k - j) as i32) / lam.powi(j as i32 + 1);
        falling *= (k - j) as f64;
    }
    r.powf(-root) * sphere_area(d) * (-lam * a).exp() * sum
}

/// Bound for the midpoint-rule remainder of the corrected lattice path at
/// half-width `L`.
pub fn lattice_remainder_bound(d: usize, eps: f64, l: u32) -> f64 {
    let h = (d as f64 + 1.0) / 2.0;
    let root = (d as f64).sqrt();
    let b = l as f64 - 0.5 - root;
    if b <= 0.0 {
        return f64::INFINITY;
    }
    // ∫_{L-1/2}^∞ ρ^{d-1} (ρ-√d)^{-(d+3)} dρ, expanded binomially
    let radial: f64 = (0..d)
        .map(|k| binomial(d - 1, k) * root.powi(k as i32) * b.powi(-(3 + k as i32)) / (3 + k) as f64)
        .sum();
    d as f64 / 24.0 * (4.0 * h * h + 2.0 * h) * poisson_constant(d) * eps * sphere_area(d) * radial
}

/// `∫_box φ_ε` for the Poisson density on `ℝᵈ`, `d ≤ 3`.
pub fn poisson_box_mass(d: usize, eps: f64, lo: &[f64], hi: &[f64]) -> Result<f64> {
    check_kernel_dim(d)?;
    match d {
        1 => Ok(((hi[0] / eps).atan() - (lo[0] / eps).atan()) / PI),
        2 => {
            let q = |a: f64, b: f64| (a * b / (eps * (eps * eps + a * a + b * b).sqrt())).atan() / (2.0 * PI);
            Ok(q(hi[0], hi[1]) - q(lo[0], hi[1]) - q(hi[0], lo[1]) + q(lo[0], lo[1]))
        }
        _ => {
            // z-integral in closed form, then nested adaptive quadrature in (x, y)
            let c = poisson_constant(3) * eps;
            let g = |a2: f64, z: f64| {
                let a = a2.sqrt();
                z / (2.0 * a2 * (a2 + z * z)) + (z / a).atan() / (2.0 * a2 * a)
            };
            let column = |x: f64, y: f64| {
                let a2 = eps * eps + x * x + y * y;
                c * (g(a2, hi[2]) - g(a2, lo[2]))
            };
            let cuts = |lo: f64, hi: f64| -> Vec<f64> {
                let mut v = vec![lo];
                for p in [-eps, 0.0, eps] {
                    if p > lo && p < hi {
                        v.push(p);
                    }
                }
                v.push(hi);
                v
            };
            let (xs, ys) = (cuts(lo[0], hi[0]), cuts(lo[1], hi[1]));
            let tol = Tolerance {
                abs: 1e-11,
                rel: 0.0,
                max_evals: 1_000_000,
            };
            let inner_tol = Tolerance {
                abs: 1e-12,
                ..tol
            };
            let mut failure = None;
            let e = integrate_pieces(
                |x| match integrate_pieces(|y| column(x, y), &ys, inner_tol) {
                    Ok(v) => v.value,
                    Err(err) => {
                        failure = Some(err);
                        0.0
                    }
                },
                &xs,
                tol,
            )?;
            match failure {
                Some(err) => Err(err),
                None => Ok(e.value),
            }
        }
    }
}

/// How the two circular Poisson paths are truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Ball radius `M` for the Fourier path and box half-width `M` for the
    /// lattice path.
    Shared(u32),
    /// Smallest radii whose bounds each stay under half the tolerance.
    Auto,
}

/// Both evaluations of the circular Poisson kernel with their error bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelPaths {
    /// `Σ_{|m|₂ ≤ M} r^{|m|₂} z^m`.
    pub fourier: f64,
    pub fourier_radius: u32,
    pub fourier_bound: f64,
    /// `Σ_{|m|_∞ ≤ L} φ_ε(s+m)` plus the mass of `φ_ε` outside the covered cells.
    pub lattice: f64,
    pub lattice_radius: u32,
    pub lattice_bound: f64,
}

impl KernelPaths {
    /// The lattice-side value.
    pub fn value(&self) -> f64 {
        self.lattice
    }

    pub fn gap(&self) -> f64 {
        (self.fourier - self.lattice).abs()
    }

    pub fn bound(&self) -> f64 {
        self.fourier_bound + self.lattice_bound
    }
}

/// Circular Poisson kernel `Σ r^{|m|₂} z^m` by two independent routes: the
/// Fourier series over a ball and the periodized Poisson density on `ℝᵈ`.
/// Fails if the bounds exceed `tol` or the paths disagree beyond them.
pub fn circular_poisson_kernel(r: f64, s: &TorusPoint, truncation: Truncation, tol: f64) -> Result<KernelPaths> {
    let d = s.dim();
    check_kernel_dim(d)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain {
            name: "r",
            value: r,
            domain: "(0, 1)",
        });
    }
    let eps = poisson_eps(r);
    let (m, l) = match truncation {
        Truncation::Shared(m) => (m, m),
        Truncation::Auto => {
            let half = 0.5 * tol;
            let mut m = 1;
            while fourier_tail_bound(d, r, m) > half {
                m += 1;
            }
            let mut l = 2;
            while lattice_remainder_bound(d, eps, l) > half {
                l += 1;
            }
            (m, l)
        }
    };
    let fourier_bound = fourier_tail_bound(d, r, m);
    let lattice_bound = lattice_remainder_bound(d, eps, l);
    if fourier_bound + lattice_bound > tol {
        return Err(Error::Tail {
            tail: fourier_bound + lattice_bound,
            tolerance: tol,
        });
    }
    let fourier = fourier_ball_sum(r, s.coords(), m);
    let lattice = lattice_sum(eps, s.coords(), l)?;
    let out = KernelPaths {
        fourier,
        fourier_radius: m,
        fourier_bound: fourier_bound + rounding(fourier),
        lattice,
        lattice_radius: l,
        lattice_bound: lattice_bound + rounding(lattice),
    };
    if out.gap() > out.bound() {
        return Err(Error::PathMismatch {
            a: fourier,
            b: lattice,
            bound: out.bound(),
        });
    }
    Ok(out)
}

fn rounding(v: f64) -> f64 {
    1e-12 * v.abs().max(1.0)
}

// Σ over the positive orthant with multiplicity 2^{#nonzero}, cosines only.
fn fourier_ball_sum(r: f64, s: &[f64], m: u32) -> f64 {
    let d = s.len();
    let mm = m as usize;
    let cos: Vec<Vec<f64>> = s
        .iter()
        .map(|&x| {
            (0..=mm)
                .map(|k| if k == 0 { 1.0 } else { 2.0 * (2.0 * PI * k as f64 * x).cos() })
                .collect()
        })
        .collect();
    let max_sq = mm * mm;
    let pow: Vec<f64> = (0..=max_sq).map(|n| r.powf((n as f64).sqrt())).collect();
    match d {
        1 => (0..=mm).map(|k| pow[k * k] * cos[0][k]).sum(),
        2 => {
            let mut total = 0.0;
            for a in 0..=mm {
                let rest = max_sq - a * a;
                let mut row = 0.0;
                let mut b = 0;
                while b * b <= rest {
                    row += pow[a * a + b * b] * cos[1][b];
                    b += 1;
                }
                total += cos[0][a] * row;
            }
            total
        }
        _ => {
            let mut total = 0.0;
            for a in 0..=mm {
                let ra = max_sq - a * a;
                let mut plane = 0.0;
                let mut b = 0;
                while b * b <= ra {
                    let rb = ra - b * b;
                    let base = a * a + b * b;
                    let mut row = 0.0;
                    let mut c = 0;
                    while c * c <= rb {
                        row += pow[base + c * c] * cos[2][c];
                        c += 1;
                    }
                    plane += cos[1][b] * row;
                    b += 1;
                }
                total += cos[0][a] * plane;
            }
            total
        }
    }
}

fn lattice_sum(eps: f64, s: &[f64], l: u32) -> Result<f64> {
    let d = s.len();
    let c = poisson_constant(d) * eps;
    let e2 = eps * eps;
    let li = l as i64;
    let offsets: Vec<Vec<f64>> = s
        .iter()
        .map(|&x| (-li..=li).map(|m| (x + m as f64) * (x + m as f64)).collect())
        .collect();
    let mut total = 0.0;
    match d {
        1 => {
            for &a in &offsets[0] {
                total += density_power(1, e2 + a);
            }
        }
        2 => {
            for &a in &offsets[0] {
                let mut row = 0.0;
                for &b in &offsets[1] {
                    row += density_power(2, e2 + a + b);
                }
                total += row;
            }
        }
        _ => {
            for &a in &offsets[0] {
                let mut plane = 0.0;
                for &b in &offsets[1] {
                    let ab = e2 + a + b;
                    let mut row = 0.0;
                    for &cc in &offsets[2] {
                        let g = ab + cc;
                        row += 1.0 / (g * g);
                    }
                    plane += row;
                }
                total += plane;
            }
        }
    }
    let half = l as f64 + 0.5;
    let lo: Vec<f64> = s.iter().map(|x| x - half).collect();
    let hi: Vec<f64> = s.iter().map(|x| x + half).collect();
    let outside = 1.0 - poisson_box_mass(d, eps, &lo, &hi)?;
    Ok(c * total + outside)
}

/// A truncated periodization with its tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Periodized {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Bound on `Σ_{|m|_∞ > M} |φ_ε(s+m)|` from the decay constants of `φ`.
pub fn periodize_tail_bound(phi: &PhiFunction, eps: f64, m: u32) -> f64 {
    let d = phi.dim();
    let delta = phi.decay_exponent();
    if !(delta > 0.0) {
        return f64::INFINITY;
    }
    let root = (d as f64).sqrt() / 2.0;
    let b = m as f64 - 0.5 - root;
    if b <= 0.0 {
        return f64::INFINITY;
    }
    let radial: f64 = (0..d)
        .map(|k| binomial(d - 1, k) * root.powi(k as i32) * b.powf(-delta - k as f64) / (delta + k as f64))
        .sum();
    phi.decay_constant() * eps.powf(delta) * sphere_area(d) * radial
}

/// `K_ε(s) = Σ_{|m|_∞ ≤ M} φ_ε(s+m)`.
pub fn periodize(phi: &PhiFunction, eps: f64, s: &TorusPoint, m: u32, tol: Option<f64>) -> Result<Periodized> {
    if !(eps > 0.0) {
        return Err(Error::Domain {
            name: "eps",
            value: eps,
            domain: "(0, ∞)",
        });
    }
    if phi.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.dim(),
            found: s.dim(),
        });
    }
    let tail_bound = periodize_tail_bound(phi, eps, m);
    if let Some(t) = tol {
        if tail_bound > t {
            return Err(Error::Tail {
                tail: tail_bound,
                tolerance: t,
            });
        }
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut point = vec![0.0; s.dim()];
    for k in FolnerBox::new(m, s.dim()).iter() {
        for (j, p) in point.iter_mut().enumerate() {
            *p = s.coords()[j] + k.entries()[j] as f64;
        }
        value += phi.scaled_transform(eps, &point);
    }
    Ok(Periodized { value, tail_bound })
}

/// A finitely supported scalar trigonometric polynomial `Σ f̂(m) z^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    d: usize,
    terms: Vec<(MultiIndex, Complex64)>,
}

impl TrigPoly {
    pub fn new(d: usize, terms: Vec<(MultiIndex, Complex64)>) -> Result<Self> {
        for (m, _) in &terms {
            m.check_dim(d)?;
        }
        Ok(TrigPoly { d, terms })
    }

    pub fn monomial(m: MultiIndex) -> Self {
        TrigPoly {
            d: m.dim(),
            terms: vec![(m, Complex64::new(1.0, 0.0))],
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[(MultiIndex, Complex64)] {
        &self.terms
    }

    pub fn eval(&self, s: &TorusPoint) -> Complex64 {
        self.terms.iter().map(|(m, c)| c * s.character(m)).sum()
    }
}

/// Kernel values on the uniform grid of `n` points per axis.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    d: usize,
    n: usize,
    points: Vec<TorusPoint>,
    values: Vec<Complex64>,
}

impl KernelGrid {
    pub fn sample(d: usize, n: usize, mut kernel: impl FnMut(&TorusPoint) -> Result<Complex64>) -> Result<Self> {
        let points: Vec<TorusPoint> = torus_grid(d, n).into_iter().map(TorusPoint::new).collect();
        let values = points.iter().map(&mut kernel).collect::<Result<Vec<_>>>()?;
        Ok(KernelGrid { d, n, points, values })
    }

    pub fn per_axis(&self) -> usize {
        self.n
    }

    /// Grid average of the kernel, the quadrature of its mass.
    pub fn mass(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    pub fn min_real(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }
}

/// `(K ∗ f)(z) = ∫ K(t) f(z - t) dt` by the trapezoid rule on the grid.
pub fn scalar_convolve(kernel: &KernelGrid, f: &TrigPoly, z: &TorusPoint) -> Result<Complex64> {
    if f.dim() != kernel.d || z.dim() != kernel.d {
        return Err(Error::DimensionMismatch {
            expected: kernel.d,
            found: if f.dim() != kernel.d { f.dim() } else { z.dim() },
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, k) in kernel.points.iter().zip(&kernel.values) {
        acc += k * f.eval(&z.sub(t));
    }
    Ok(acc / kernel.values.len() as f64)
}

/// `Σ φ(m) f̂(m) z^m`, the multiplier side of the convolution identity.
pub fn multiplier_side(symbol: &MultiplierSymbol, f: &TrigPoly, z: &TorusPoint) -> Complex64 {
    f.terms().iter().map(|(m, c)| symbol.eval(m) * c * z.character(m)).sum()
}

/// Kernel families with product structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelFamily {
    Fejer,
    SquarePoisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxIdentityRow {
    pub param: f64,
    /// `∫ K`.
    pub mass: f64,
    /// `∫ |K|`.
    pub l1: f64,
    /// `∫ |K|` outside the cube `|s|_∞ ≤ radius`.
    pub outside_mass: f64,
    /// Smallest sampled kernel value.
    pub min_value: f64,
}

/// Mass, L₁ norm and mass outside a neighborhood of the identity along a
/// parameter schedule.
pub fn approx_identity_report(
    family: KernelFamily,
    d: usize,
    params: &[f64],
    radius: f64,
) -> Result<Vec<ApproxIdentityRow>> {
    if !(radius > 0.0 && radius < 0.5) {
        return Err(Error::Domain {
            name: "radius",
            value: radius,
            domain: "(0, 1/2)",
        });
    }
    params
        .iter()
        .map(|&p| {
            let k1: Box<dyn Fn(f64) -> f64> = match family {
                KernelFamily::Fejer => {
                    if !(p >= 0.0 && p.fract() == 0.0) {
                        return Err(Error::Domain {
                            name: "N",
                            value: p,
                            domain: "nonnegative integers",
                        });
                    }
                    let n = p as u32;
                    Box::new(move |s| fejer_1d(n, s))
                }
                KernelFamily::SquarePoisson => {
                    check_r(p)?;
                    Box::new(move |s| poisson_1d(p, s))
                }
            };
            // width of the central peak, used as quadrature breakpoints
            let w = match family {
                KernelFamily::Fejer => 1.0 / (p + 1.0),
                KernelFamily::SquarePoisson => poisson_eps(p.max(1e-300)).min(0.25),
            };
            let mut cuts = vec![-0.5];
            for c in [-radius, -w, 0.0, w, radius] {
                if c > -0.5 && c < 0.5 && !cuts.contains(&c) {
                    cuts.push(c);
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            cuts.push(0.5);
            let tol = Tolerance::absolute(1e-12);
            let mass1 = integrate_pieces(&k1, &cuts, tol)?.value;
            let l1_1 = integrate_pieces(|s| k1(s).abs(), &cuts, tol)?.value;
            let inner: Vec<f64> = cuts.iter().copied().filter(|c| c.abs() <= radius).collect();
            let inside1 = integrate_pieces(|s| k1(s).abs(), &inner, tol)?.value;
            let min1 = (0..=1024)
                .map(|i| k1(-0.5 + i as f64 / 1024.0))
                .fold(f64::INFINITY, f64::min);
            let di = d as i32;
            let max1 = k1(0.0);
            Ok(ApproxIdentityRow {
                param: p,
                mass: mass1.powi(di),
                l1: l1_1.powi(di),
                outside_mass: l1_1.powi(di) - inside1.powi(di),
                min_value: if min1 < 0.0 { min1 * max1.powi(di - 1) } else { min1.powi(di) },
            })
        })
        .collect()
}

/// `∫_{-δ}^{δ}` of the one-dimensional kernel from its Fourier series:
/// `2δ + Σ_{k≠0} φ(k) sin(2πkδ)/(πk)`.
pub fn central_mass_series(family: KernelFamily, param: f64, radius: f64) -> f64 {
    match family {
        KernelFamily::Fejer => {
            let k1 = param + 1.0;
            2.0 * radius
                + 2.0
                    * (1..=param as u64)
                        .map(|k| (1.0 - k as f64 / k1) * (2.0 * PI * k as f64 * radius).sin() / (PI * k as f64))
                        .sum::<f64>()
        }
        KernelFamily::SquarePoisson => {
            // Σ r^k sin(kx)/k = atan(r sin x / (1 - r cos x))
            let x = 2.0 * PI * radius;
            2.0 * radius + 2.0 / PI * (param * x.sin()).atan2(1.0 - param * x.cos())
        }
    }
}

/// Quadrature of a kernel against `1` over a centered interval, used to
/// check the central mass formula.
pub fn central_mass_quadrature(kernel: impl Fn(f64) -> f64, radius: f64) -> Result<f64> {
    Ok(integrate(kernel, -radius, radius, Tolerance::absolute(1e-12))?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;
    use crate::summation::{circular_poisson_symbol, fejer_symbol, phi_eps_symbol};
    use rand::Rng;

    #[test]
    fn torus_point_reduces() {
        let p = TorusPoint::new(vec![1.25, -0.25, 3.0]);
        assert_eq!(p.coords(), &[0.25, 0.75, 0.0]);
        assert_eq!(p.centered(), vec![0.25, -0.25, 0.0]);
        let q = TorusPoint::new(vec![-1e-18]);
        assert!(q.coords()[0] < 1.0);
    }

    #[test]
    fn fejer_values_and_direct_sum() {
        assert!((fejer_kernel(1, &TorusPoint::new(vec![0.0])) - 2.0).abs() < 1e-15);
        for n in [0, 1, 5, 17] {
            for i in 0..50 {
                let s = i as f64 / 50.0 + 0.0037;
                let direct: f64 = (-(n as i64)..=n as i64)
                    .map(|k| (1.0 - k.abs() as f64 / (n as f64 + 1.0)) * (2.0 * PI * k as f64 * s).cos())
                    .sum();
                assert!((fejer_1d(n, s) - direct).abs() < 1e-10);
            }
        }
        let p = TorusPoint::new(vec![0.1, 0.3]);
        assert_eq!(fejer_kernel(4, &p), fejer_1d(4, 0.1) * fejer_1d(4, 0.3));
    }

    #[test]
    fn square_poisson_values() {
        assert!((square_poisson_kernel(0.5, &TorusPoint::new(vec![0.0])).unwrap() - 3.0).abs() < 1e-15);
        assert_eq!(square_poisson_kernel(0.0, &TorusPoint::new(vec![0.3, 0.1])).unwrap(), 1.0);
        // truncated Fourier sum within 2d r^{M+1}/(1-r)
        let (r, m) = (0.6f64, 20);
        let s = [0.13, 0.71];
        let mut direct = 0.0;
        for a in -m..=m {
            for b in -m..=m {
                let k = MultiIndex::from([a, b]);
                direct += r.powi(k.l1() as i32) * (2.0 * PI * k.dot(&s)).cos();
            }
        }
        let exact = square_poisson_kernel(r, &TorusPoint::new(s.to_vec())).unwrap();
        let tail = 2.0 * 2.0 * r.powi(m as i32 + 1) / (1.0 - r);
        assert!((exact - direct).abs() <= tail);
    }

    #[test]
    fn box_mass_matches_quadrature() {
        let eps = 0.2;
        let lo = [-0.7, -1.1, -0.4];
        let hi = [1.3, 0.6, 0.9];
        for d in 1..=3 {
            let f = |s: &[f64]| poisson_density(d, eps, s);
            let brk: Vec<Vec<f64>> = vec![vec![0.0]; d];
            let q = crate::quadrature::integrate_box(&f, &lo[..d], &hi[..d], &brk, 1e-10).unwrap();
            let m = poisson_box_mass(d, eps, &lo[..d], &hi[..d]).unwrap();
            assert!((q - m).abs() < 1e-8, "d={d}: {q} vs {m}");
        }
    }

    #[test]
    fn poisson_density_has_unit_mass() {
        for d in 1..=3 {
            let big = 1e6;
            let m = poisson_box_mass(d, 0.3, &vec![-big; d], &vec![big; d]).unwrap();
            assert!((m - 1.0).abs() < 1e-5, "d={d}: {m}");
        }
    }

    #[test]
    fn circular_matches_square_in_one_dimension() {
        for r in [0.3, 0.5, 0.7, 0.9] {
            for s in [0.0, 0.1, 0.37, 0.5, 0.93] {
                let p = TorusPoint::new(vec![s]);
                let c = circular_poisson_kernel(r, &p, Truncation::Auto, 1e-9).unwrap();
                let q = square_poisson_kernel(r, &p).unwrap();
                assert!((c.value() - q).abs() < 1e-8, "r={r} s={s}");
            }
        }
    }

    #[test]
    fn circular_paths_agree_at_shared_radius() {
        let p = TorusPoint::new(vec![0.3, 0.7]);
        let k = circular_poisson_kernel(0.5, &p, Truncation::Shared(40), 1e-6).unwrap();
        assert!(k.gap() < 1e-6);
        let err = circular_poisson_kernel(0.9, &p, Truncation::Shared(10), 1e-6);
        assert!(matches!(err, Err(Error::Tail { .. })));
    }

    #[test]
    fn circular_paths_agree_in_three_dimensions() {
        let mut g = rng(3);
        for r in [0.3, 0.7] {
            let p = TorusPoint::new((0..3).map(|_| g.random::<f64>()).collect::<Vec<_>>());
            let k = circular_poisson_kernel(r, &p, Truncation::Auto, 1e-6).unwrap();
            assert!(k.gap() < 1e-6 && k.value() > 0.0);
        }
    }

    #[test]
    fn periodize_poisson_pair_is_path_b_without_correction() {
        let phi = PhiFunction::poisson(1);
        let eps = 0.1;
        let s = TorusPoint::new(vec![0.2]);
        let p = periodize(&phi, eps, &s, 400, None).unwrap();
        let r = (-2.0 * PI * eps).exp();
        let exact = square_poisson_kernel(r, &s).unwrap();
        assert!((p.value.re - exact).abs() <= p.tail_bound);
        let q = periodize(&phi, eps, &s, 410, None).unwrap();
        assert!((q.value - p.value).norm() <= p.tail_bound);
        assert!(periodize(&phi, eps, &s, 10, Some(1e-9)).is_err());
    }

    #[test]
    fn bochner_riesz_periodization_has_unit_mass() {
        // trapezoid mass of the periodized kernel is Σ_k Φ(ε n k) = Φ(0)
        let phi = PhiFunction::bochner_riesz(1, 2.0).unwrap();
        let eps = 0.25;
        let grid = KernelGrid::sample(1, 16, |s| Ok(periodize(&phi, eps, s, 400, None)?.value)).unwrap();
        let tail = periodize_tail_bound(&phi, eps, 400);
        assert!((grid.mass().re - 1.0).abs() < 1e-4);
        assert!(tail < 1e-4);
    }

    #[test]
    fn convolution_reproduces_multipliers() {
        let n = 5;
        let grid = KernelGrid::sample(2, 16, |s| Ok(Complex64::new(fejer_kernel(n, s), 0.0))).unwrap();
        let f = TrigPoly::new(
            2,
            vec![
                (MultiIndex::from([1, -2]), Complex64::new(0.5, 1.0)),
                (MultiIndex::from([4, 5]), Complex64::new(-1.0, 0.0)),
                (MultiIndex::from([0, 0]), Complex64::new(2.0, 0.0)),
            ],
        )
        .unwrap();
        let z = TorusPoint::new(vec![0.31, 0.77]);
        let a = scalar_convolve(&grid, &f, &z).unwrap();
        let b = multiplier_side(&fejer_symbol(n, 2), &f, &z);
        assert!((a - b).norm() < 1e-13);
        assert!((grid.mass() - 1.0).norm() < 1e-13);
    }

    #[test]
    fn poisson_convolution_on_fine_grid() {
        let eps = 0.02;
        let r = (-2.0 * PI * eps).exp();
        let grid = KernelGrid::sample(1, 256, |s| Ok(Complex64::new(square_poisson_kernel(r, s)?, 0.0))).unwrap();
        let m = MultiIndex::from([3]);
        let f = TrigPoly::monomial(m.clone());
        let z = TorusPoint::new(vec![0.4]);
        let a = scalar_convolve(&grid, &f, &z).unwrap();
        let sym = phi_eps_symbol(&PhiFunction::poisson(1), eps).unwrap();
        assert!((a - multiplier_side(&sym, &f, &z)).norm() < 1e-6);
        let c = circular_poisson_symbol(r, 1).unwrap();
        assert!((sym.eval(&m) - c.eval(&m)).norm() < 1e-14);
    }

    #[test]
    fn approx_identity_examples() {
        let sched: Vec<f64> = (1..=64).map(f64::from).collect();
        let rows = approx_identity_report(KernelFamily::Fejer, 2, &sched, 0.1).unwrap();
        for w in rows.windows(2) {
            // the step from N to N+1 is a positive multiple of -Σ_{k≤N+1} sin(2πk/10)
            let n = w[0].param as usize + 1;
            let step: f64 = (1..=n).map(|k| (0.2 * PI * k as f64).sin()).sum();
            if step.abs() < 1e-9 {
                assert!((w[1].outside_mass - w[0].outside_mass).abs() < 1e-12);
            } else {
                assert!(w[1].outside_mass < w[0].outside_mass - 1e-9, "{:?}", w);
            }
        }
        for row in &rows {
            assert!((row.mass - 1.0).abs() < 1e-6);
            assert!(row.min_value >= -1e-12);
        }
        let rows = approx_identity_report(KernelFamily::SquarePoisson, 1, &[0.5, 0.9, 0.99], 0.1).unwrap();
        for row in &rows {
            assert!((row.l1 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn central_mass_series_matches_quadrature() {
        for n in [1.0, 7.0, 30.0] {
            let q = central_mass_quadrature(|s| fejer_1d(n as u32, s), 0.1).unwrap();
            assert!((q - central_mass_series(KernelFamily::Fejer, n, 0.1)).abs() < 1e-11);
        }
        for r in [0.2, 0.8, 0.95] {
            let q = central_mass_quadrature(|s| poisson_1d(r, s), 0.15).unwrap();
            assert!((q - central_mass_series(KernelFamily::SquarePoisson, r, 0.15)).abs() < 1e-11);
        }
    }

    #[test]
    fn fejer_bound_on_grid() {
        for n in [0, 3, 16, 64] {
            for i in 0..=1024 {
                let s = -0.5 + i as f64 / 1024.0;
                assert!(fejer_1d(n, s) <= fejer_1d_bound(n, s));
            }
        }
    }

    #[test]
    fn bessel_is_reexported() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        let x: f64 = 1.0;
        let want = (2.0 / (PI * x)).sqrt() * x.sin();
        assert!((bessel_j(0.5, x).unwrap() - want).abs() < 1e-9 * want);
    }
}
