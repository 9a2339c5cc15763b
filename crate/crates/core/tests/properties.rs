use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use qtorus::algebra::{QtElement, Theta};
use qtorus::hardy::{g_square, hardy_norm, HardySide};
use qtorus::lattice::{folner_overlap_f64, MultiIndex};
use qtorus::matrix::represent;
use qtorus::random::{random_element, random_theta, rng};
use qtorus::schur::fs_identity_check;
use qtorus::summation::{apply_multiplier, circular_poisson_symbol, fejer_symbol};
use qtorus::transference::pi_z;
use qtorus::kernels::TorusPoint;

fn draw(seed: u64, d: usize, degree: u32) -> (Arc<Theta>, QtElement, QtElement) {
    let mut g = rng(seed);
    let th = Arc::new(random_theta(d, &mut g));
    let x = random_element(&th, degree, 0.6, &mut g);
    let y = random_element(&th, degree, 0.6, &mut g);
    (th, x, y)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn adjoint_reverses_products(seed in any::<u64>(), d in 1usize..=3) {
        let (_, x, y) = draw(seed, d, 2);
        let lhs = x.try_mul(&y).unwrap().adjoint();
        let rhs = y.adjoint().try_mul(&x.adjoint()).unwrap();
        prop_assert!(lhs.max_coeff_diff(&rhs) < 1e-13);
        // two phase roundings separate x** from x by a few ulps
        prop_assert!(x.adjoint().adjoint().max_coeff_diff(&x) < 1e-15);
    }

    #[test]
    fn representation_is_a_star_map(seed in any::<u64>(), d in 1usize..=2, n in 1u32..=3) {
        let (_, x, _) = draw(seed, d, 2);
        let a = represent(&x, n).unwrap();
        let b = represent(&x.adjoint(), n).unwrap();
        let diff = (a.matrix().adjoint() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-14);
    }

    #[test]
    fn multipliers_compose(seed in any::<u64>(), d in 1usize..=3, n in 0u32..=5, r in 0.0f64..0.99) {
        let (_, x, _) = draw(seed, d, 2);
        let f = fejer_symbol(n, d);
        let p = circular_poisson_symbol(r, d).unwrap();
        let two = apply_multiplier(&f, &apply_multiplier(&p, &x).unwrap()).unwrap();
        let one = apply_multiplier(&f.product(&p).unwrap(), &x).unwrap();
        prop_assert!(two.max_coeff_diff(&one) < 1e-15);
        prop_assert!(fs_identity_check(&f, &x, 2).unwrap() < 1e-13);
    }

    #[test]
    fn overlap_is_a_symmetric_fraction(k in prop::collection::vec(-9i64..=9, 1..=3), n in 0u32..=4) {
        let m = MultiIndex::new(k);
        let v = folner_overlap_f64(n, &m);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, folner_overlap_f64(n, &-&m));
    }

    #[test]
    fn pi_z_is_multiplicative(seed in any::<u64>(), s in prop::collection::vec(0.0f64..1.0, 2)) {
        let (_, x, y) = draw(seed, 2, 1);
        let z = TorusPoint::new(s);
        let lhs = pi_z(&x.try_mul(&y).unwrap(), &z).unwrap();
        let rhs = pi_z(&x, &z).unwrap().try_mul(&pi_z(&y, &z).unwrap()).unwrap();
        prop_assert!(lhs.max_coeff_diff(&rhs) < 1e-14);
    }

    #[test]
    fn g_square_is_positive(seed in any::<u64>()) {
        let (_, x, _) = draw(seed, 2, 2);
        let gs = g_square(&x);
        prop_assert!(gs.max_coeff_diff(&gs.adjoint()) < 1e-12);
        prop_assert!(represent(&gs, 2).unwrap().min_eigenvalue().unwrap() >= -1e-10);
    }

    #[test]
    fn hardy_norm_is_homogeneous(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let (_, x, _) = draw(seed, 2, 1);
        let c = Complex64::new(re, im);
        for side in [HardySide::Column, HardySide::Row] {
            let h = hardy_norm(&x, 1.5, side, 2).unwrap();
            let hc = hardy_norm(&x.scale(c), 1.5, side, 2).unwrap();
            prop_assert!((hc - c.norm() * h).abs() < 1e-10 * (1.0 + h));
        }
    }
}
