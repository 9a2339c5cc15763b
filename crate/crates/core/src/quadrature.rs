//! Adaptive Gauss-Kronrod integration and a few fixed rules.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525532483,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Values that can be integrated: real or complex.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// One application of the 21-point rule: (Kronrod estimate, |K - G|).
pub fn gk21<V: QuadValue>(f: &mut impl FnMut(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = V::zero();
    for (j, &x) in XGK[..10].iter().enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).magnitude())
}

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_evals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 0.0,
            max_evals: 1_000_000,
        }
    }
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Tolerance {
            abs,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<V> {
    pub value: V,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

impl<V> PartialEq for Piece<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V> Eq for Piece<V> {}
impl<V> PartialOrd for Piece<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Piece<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive bisection: the piece with the largest error estimate is
/// split until the summed error meets the tolerance.
pub fn integrate<V: QuadValue>(mut f: impl FnMut(f64) -> V, a: f64, b: f64, tol: Tolerance) -> Result<Estimate<V>> {
    if a == b {
        return Ok(Estimate {
            value: V::zero(),
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error) = gk21(&mut f, a, b);
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        let target = tol.abs.max(tol.rel * total.magnitude());
        if total_err <= target {
            break;
        }
        if evaluations + 42 > tol.max_evals {
            return Err(Error::Quadrature {
                at: 0.5 * (a + b),
                estimate: total.magnitude(),
                error: total_err,
                evaluations,
            });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval can no longer be split in floating point
            return Err(Error::Quadrature {
                at: mid,
                estimate: total.magnitude(),
                error: total_err,
                evaluations,
            });
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        // resum occasionally to shed accumulated rounding in the running totals
        if heap.len() % 64 == 0 {
            total = heap.iter().fold(V::zero(), |acc, p| acc + p.value);
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value = heap.iter().fold(V::zero(), |acc, p| acc + p.value);
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Integrates over a sequence of breakpoints, one adaptive run per piece,
/// with the tolerance split evenly.
pub fn integrate_pieces<V: QuadValue>(
    mut f: impl FnMut(f64) -> V,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Estimate<V>> {
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    let each = Tolerance {
        abs: tol.abs / pieces,
        ..tol
    };
    let mut out = Estimate {
        value: V::zero(),
        error: 0.0,
        evaluations: 0,
    };
    for w in breaks.windows(2) {
        let e = integrate(&mut f, w[0], w[1], each)?;
        out.value = out.value + e.value;
        out.error += e.error;
        out.evaluations += e.evaluations;
    }
    Ok(out)
}

/// Nested adaptive integration over a box in up to three dimensions, with
/// each axis split at the given interior breakpoints.
pub fn integrate_box(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    lo: &[f64],
    hi: &[f64],
    breaks: &[Vec<f64>],
    tol: f64,
) -> Result<f64> {
    let d = lo.len();
    assert!(d >= 1 && d == hi.len() && d == breaks.len());
    let mut point = vec![0.0; d];
    nested(f, lo, hi, breaks, tol, 0, &mut point)
}

fn nested(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    lo: &[f64],
    hi: &[f64],
    breaks: &[Vec<f64>],
    tol: f64,
    axis: usize,
    point: &mut [f64],
) -> Result<f64> {
    let mut cuts = vec![lo[axis]];
    cuts.extend(breaks[axis].iter().copied().filter(|&b| b > lo[axis] && b < hi[axis]));
    cuts.push(hi[axis]);
    let last = axis + 1 == lo.len();
    let span: f64 = (axis + 1..lo.len()).map(|j| hi[j] - lo[j]).product();
    let inner_tol = tol / (4.0 * span.max(1.0));
    let tol = Tolerance {
        abs: tol,
        rel: 0.0,
        max_evals: 2_000_000,
    };
    let mut err = None;
    let est = integrate_pieces(
        |x| {
            point[axis] = x;
            if last {
                f(point)
            } else {
                match nested(f, lo, hi, breaks, inner_tol, axis + 1, &mut point.to_vec()) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        0.0
                    }
                }
            }
        },
        &cuts,
        tol,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(est.value),
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 1..=n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p2) / j as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Midpoints of `n` equal cells in each coordinate of `[0,1)ᵈ`, row-major.
pub fn torus_grid(d: usize, n: usize) -> Vec<Vec<f64>> {
    let total = n.pow(d as u32);
    (0..total)
        .map(|mut p| {
            let mut s = vec![0.0; d];
            for slot in s.iter_mut().rev() {
                *slot = (p % n) as f64 / n as f64;
                p /= n;
            }
            s
        })
        .collect()
}
