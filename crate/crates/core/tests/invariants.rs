use hsbif::closed_forms::{eval_radial, kelvin_radial, residual_radial, sample_radial, RadialKind};
use hsbif::grid::UniformGrid;
use hsbif::params::{
    gamma_j, harmonic_multiplicity, hardy_threshold, morse_index, morse_index_symmetric, mu_j,
};
use hsbif::spectral::{degree_ground_state, SpectrumOptions};
use hsbif::{ProblemParams, SymmetryClass};
use proptest::prelude::*;

fn admissible() -> impl Strategy<Value = ProblemParams> {
    (3u32..=7, 0.0..1.9f64, 0.0..1.0f64).prop_map(|(n, s, u)| {
        // gamma spread over [-4, threshold)
        let top = hardy_threshold(n);
        let gamma = -4.0 + u * (top + 4.0) * 0.999;
        ProblemParams::new(n, s, gamma).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gamma_j_strictly_decreasing(n in 3u32..=9, s in 0.0..1.99f64, j in 1u32..20) {
        let a = gamma_j(n, s, j).unwrap();
        let b = gamma_j(n, s, j + 1).unwrap();
        prop_assert!(b < a);
        let g1 = gamma_j(n, s, 1).unwrap();
        if s == 0.0 { prop_assert_eq!(g1, 0.0) } else { prop_assert!(g1 < 0.0) }
    }

    #[test]
    fn morse_jumps_by_multiplicity(n in 3u32..=5, s in 0.0..1.9f64, j in 1u32..=6) {
        let gj = gamma_j(n, s, j).unwrap();
        let d = 1e-6 * gj.abs().max(1.0);
        let above = ProblemParams::new(n, s, gj + d).unwrap();
        let below = ProblemParams::new(n, s, gj - d).unwrap();
        prop_assert_eq!(
            morse_index(&below).unwrap() - morse_index(&above).unwrap(),
            harmonic_multiplicity(n, j).unwrap()
        );
        prop_assert_eq!(
            morse_index_symmetric(&below, SymmetryClass::Axial).unwrap()
                - morse_index_symmetric(&above, SymmetryClass::Axial).unwrap(),
            1
        );
    }

    #[test]
    fn eigenvalue_vanishes_at_gamma_j(n in 3u32..=7, s in 0.0..1.9f64, j in 1u32..=8) {
        let p = ProblemParams::new(n, s, gamma_j(n, s, j).unwrap()).unwrap();
        let v = p.lambda1_rad() + mu_j(n, j);
        prop_assert!(v.abs() <= 1e-10 * mu_j(n, j).max(1.0), "{}", v);
    }

    #[test]
    fn kelvin_fixes_only_the_unit_bubble(p in admissible(), lam in prop_oneof![0.3..0.8f64, 1.3..3.0f64]) {
        let g = UniformGrid::symmetric(8.0, 201).unwrap();
        let u = sample_radial(RadialKind::U, &p, g.clone());
        let scale = u.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(kelvin_radial(&u, p.n).unwrap().max_abs_diff(&u) <= 1e-13 * scale);
        let ul = sample_radial(RadialKind::ULambda(lam), &p, g);
        prop_assert!(kelvin_radial(&ul, p.n).unwrap().max_abs_diff(&ul) > 1e-6 * scale);
    }

    #[test]
    fn z_changes_sign_only_at_one(p in admissible(), r in 0.01..100.0f64) {
        let z = eval_radial(RadialKind::Z, &p, r).unwrap();
        if (r - 1.0).abs() > 1e-9 {
            prop_assert_eq!(z > 0.0, r < 1.0);
        }
    }

    #[test]
    fn dilations_solve_the_equation(p in admissible(), lam in 0.25..4.0f64) {
        let g = UniformGrid::symmetric(10.0, 2001).unwrap();
        let base = residual_radial(&p, 1.0, &g);
        prop_assert!(residual_radial(&p, lam, &g) <= 10.0 * base + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn radial_ground_state_is_positive(p in admissible()) {
        let opts = SpectrumOptions { m: 800, ..SpectrumOptions::default() };
        let (lam, v, _) = degree_ground_state(&p, 0, &opts).unwrap();
        prop_assert!(lam < 0.0);
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(v.iter().all(|&x| x > -1e-12 * scale));
    }
}
