use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use thetanull::fubini::{fs_pullback, nullwert_jet, MapId, MapJet};
use thetanull::nullwerte::{projective_distance_coords, veronese_coords};
use thetanull::siegel::{random_siegel, sp_action, SymplecticMatrix};
use thetanull::theta::{reduce_characteristic, theta_char, Characteristic, Precision};

fn prec() -> Precision {
    Precision::default()
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

/// One of the generators `J`, `[[I, B], [0, I]]` with `B` symmetric in
/// `{-1, 0, 1}`, or `[[U, 0], [0, U^-T]]` for an elementary `U`.
fn generator(g: usize) -> impl Strategy<Value = SymplecticMatrix> {
    (
        0..3usize,
        proptest::collection::vec(-1i64..=1, g * g),
        0..g,
        0..g,
        -1i64..=1,
    )
        .prop_map(move |(kind, b, i, j, s)| match kind {
            0 => SymplecticMatrix::standard_form(g),
            1 => {
                let b = DMatrix::from_fn(g, g, |r, c| b[r.min(c) * g + r.max(c)]);
                SymplecticMatrix::translation(&b).unwrap()
            }
            _ => {
                let mut u = DMatrix::<i64>::identity(g, g);
                let mut u_inv_t = DMatrix::<i64>::identity(g, g);
                if i != j {
                    u[(i, j)] = s;
                    u_inv_t[(j, i)] = -s;
                }
                SymplecticMatrix::change_of_basis(&u, &u_inv_t).unwrap()
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn action_is_a_group_action(
        (g, m1, m2) in (1..=3usize).prop_flat_map(|g| (Just(g), generator(g), generator(g))),
        seed in 0..1000u64,
    ) {
        let z = random_siegel(g, seed, 1.0);
        let composed = sp_action(&m1.compose(&m2), &z).unwrap();
        let stepwise = sp_action(&m1, &sp_action(&m2, &z).unwrap()).unwrap();
        let diff = (composed.entries() - stepwise.entries()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-10 * (1.0 + composed.max_abs()), "{diff}");
    }

    #[test]
    fn veronese_squares_the_norm(x in prop::sample::select(vec![2usize, 4, 8]).prop_flat_map(|n| proptest::collection::vec(complex(), n))) {
        let v = veronese_coords(&x).unwrap();
        let n2: f64 = x.iter().map(|c| c.norm_sqr()).sum();
        let v2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((v2 - n2 * n2).abs() <= 1e-13 * n2 * n2);
    }

    #[test]
    fn distance_ignores_rescaling(
        x in proptest::collection::vec(complex(), 3),
        y in proptest::collection::vec(complex(), 3),
        s in complex(),
    ) {
        prop_assume!(s.norm() > 0.1);
        prop_assume!(x.iter().any(|c| c.norm() > 0.1) && y.iter().any(|c| c.norm() > 0.1));
        let d = projective_distance_coords(&x, &y).unwrap();
        let xs: Vec<Complex64> = x.iter().map(|c| c * s).collect();
        prop_assert!((d - projective_distance_coords(&xs, &y).unwrap()).abs() <= 1e-12);
        prop_assert!(projective_distance_coords(&x, &xs).unwrap() <= 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pullback_is_invariant_under_constant_rescaling(
        map in prop::sample::select(MapId::ALL.to_vec()),
        seed in 0..1000u64,
        s in complex(),
    ) {
        prop_assume!(s.norm() > 0.1);
        let z = random_siegel(2, seed, 1.0);
        let jet = nullwert_jet(map, &z, &prec()).unwrap();
        let h = fs_pullback(&jet).unwrap();
        prop_assert!(h.satisfies_invariants());
        let scaled: MapJet = jet.scaled(s);
        let r = h.relative_difference(&fs_pullback(&scaled).unwrap()).unwrap();
        prop_assert!(r <= 1e-12, "{r}");
    }

    #[test]
    fn reduction_sign_law(
        eps in proptest::collection::vec(-3i64..=3, 2),
        eps_prime in proptest::collection::vec(-3i64..=3, 2),
        seed in 0..1000u64,
    ) {
        let ch = Characteristic::new(eps, eps_prime).unwrap();
        let (reduced, sign) = reduce_characteristic(&ch);
        let z = random_siegel(2, seed, 1.0);
        let w = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.05)];
        let a = theta_char(&ch, &z, &w, &prec()).unwrap();
        let b = theta_char(&reduced, &z, &w, &prec()).unwrap() * sign as f64;
        prop_assert!((a - b).norm() <= 1e-11 * (1.0 + a.norm()), "{a} {b}");
        prop_assert_eq!(ch.parity(), reduced.parity());
    }
}
