//! Seeded generators for test elements and deformations.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{QtElement, Theta};
use crate::lattice::{FolnerBox, MultiIndex};

/// Deterministic generator derived from a single seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child seed for row `index` of a run seeded with `seed`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// θ with independent upper entries uniform in [0, 1).
pub fn random_theta<R: Rng>(d: usize, rng: &mut R) -> Theta {
    let entries: Vec<_> = (1..=d)
        .flat_map(|j| (j + 1..=d).map(move |k| (j, k)))
        .map(|(j, k)| (j, k, rng.random::<f64>()))
        .collect();
    Theta::from_upper(d, &entries).expect("valid upper entries")
}

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Random element supported in `{|m|_∞ ≤ degree}`; each index is kept with
/// probability `density` and gets a coefficient uniform in the unit square.
pub fn random_element<R: Rng>(theta: &Arc<Theta>, degree: u32, density: f64, rng: &mut R) -> QtElement {
    let b = FolnerBox::new(degree, theta.dim());
    let terms: Vec<(MultiIndex, Complex64)> = b
        .iter()
        .filter_map(|m| {
            if rng.random::<f64>() < density {
                Some((m, random_complex(rng)))
            } else {
                None
            }
        })
        .collect();
    QtElement::from_coeffs(theta, terms).expect("indices built from theta dimension")
}

/// `x + x*` for a random `x`.
pub fn random_selfadjoint<R: Rng>(theta: &Arc<Theta>, degree: u32, density: f64, rng: &mut R) -> QtElement {
    let x = random_element(theta, degree, density, rng);
    &x + &x.adjoint()
}

/// The fixed test element `Σ_{|m|₁ ≤ 2} 2^{-|m|₁} U^m` used by the
/// convergence experiments.
pub fn standard_test_element(theta: &Arc<Theta>) -> QtElement {
    let b = FolnerBox::new(2, theta.dim());
    let terms: Vec<_> = b
        .iter()
        .filter(|m| m.l1() <= 2)
        .map(|m| {
            let c = 0.5f64.powi(m.l1() as i32);
            (m, Complex64::new(c, 0.0))
        })
        .collect();
    QtElement::from_coeffs(theta, terms).expect("indices built from theta dimension")
}
