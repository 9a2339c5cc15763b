//! Gamma, Beta and Bessel functions of the first kind.
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function on the complex plane (Lanczos, reflected for Re z < 1/2).
pub fn gamma_c(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return Complex64::new(PI, 0.0) / (s * gamma_c(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * a
}

/// Gamma function for real arguments.
pub fn gamma(x: f64) -> f64 {
    if x == x.floor() && x <= 0.0 {
        return f64::NAN;
    }
    if x.fract() == 0.0 && x <= 21.0 {
        return (1..x as u64).map(|k| k as f64).product();
    }
    gamma_c(Complex64::new(x, 0.0)).re
}

/// Natural log of |Γ(x)| for x > 0, stable for large x.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// `B(a, b) = Γ(a)Γ(b)/Γ(a+b)`.
pub fn beta(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
    } else {
        gamma(a) * gamma(b) / gamma(a + b)
    }
}

/// `J_ν(x) / (x/2)^ν`, the entire part of the Bessel function. Valid for
/// every `x ≥ 0` and finite at the origin, where it equals `1/Γ(ν+1)`.
pub fn bessel_j_reduced(nu: f64, x: f64) -> Result<f64> {
    check_order(nu)?;
    if x < 0.0 || !x.is_finite() {
        return Err(Error::Domain {
            name: "x",
            value: x,
            domain: "[0, ∞)",
        });
    }
    if x <= SERIES_LIMIT {
        return Ok(series_reduced(nu, x));
    }
    Ok(bessel_j(nu, x)? / (0.5 * x).powf(nu))
}

/// Bessel function of the first kind, real order `ν ≥ 0`, argument `x ≥ 0`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    check_order(nu)?;
    if x < 0.0 || !x.is_finite() {
        return Err(Error::Domain {
            name: "x",
            value: x,
            domain: "[0, ∞)",
        });
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if x <= SERIES_LIMIT {
        return Ok(series_reduced(nu, x) * (0.5 * x).powf(nu));
    }
    if let Some(v) = hankel_asymptotic(nu, x) {
        return Ok(v);
    }
    Ok(miller(nu, x))
}

const SERIES_LIMIT: f64 = 12.0;

fn check_order(nu: f64) -> Result<()> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::Domain {
            name: "nu",
            value: nu,
            domain: "[0, ∞)",
        });
    }
    Ok(())
}

fn series_reduced(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0 / gamma(nu + 1.0);
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k as f64 + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

// Large-argument expansion; gives up if the smallest term is not tiny.
fn hankel_asymptotic(nu: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    let mut k = 1;
    loop {
        let odd = 2 * k - 1;
        term *= (mu - (odd * odd) as f64) / (k as f64 * 8.0 * x);
        if term.abs() > last {
            return None;
        }
        last = term.abs();
        if k % 2 == 1 {
            q += if (k / 2) % 2 == 0 { term } else { -term };
        } else {
            p += if (k / 2) % 2 == 0 { term } else { -term };
        }
        if term.abs() < 1e-16 {
            break;
        }
        k += 1;
        if k > 60 {
            return None;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    Some((2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin()))
}

// Backward recurrence from a high order, normalized by
// (x/2)^a = Σ_k (a+2k) Γ(a+k)/k! J_{a+2k}(x) for the fractional part a > 0,
// or 1 = J_0 + 2 Σ J_{2k} when a = 0.
fn miller(nu: f64, x: f64) -> f64 {
    let n = nu.floor() as usize;
    let a = nu - n as f64;
    let start = (x + 30.0 + (40.0 * x).sqrt()) as usize + n;
    let start = start + start % 2;
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut target = 0.0;
    let mut norm = 0.0;
    let weight_of = |k: usize| -> f64 {
        if a == 0.0 {
            if k == 0 {
                1.0
            } else {
                2.0
            }
        } else {
            let half = k / 2;
            (a + k as f64) * (ln_gamma(a + half as f64) - ln_gamma(half as f64 + 1.0)).exp()
        }
    };
    for k in (0..=start).rev() {
        // cur = J_{a+k}
        if k == n {
            target = cur;
        }
        if k % 2 == 0 {
            norm += weight_of(k) * cur;
        }
        if k == 0 {
            break;
        }
        let prev = 2.0 * (a + k as f64) / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            target *= 1e-250;
            norm *= 1e-250;
        }
    }
    let lhs = if a == 0.0 { 1.0 } else { (0.5 * x).powf(a) };
    target * lhs / norm
}
