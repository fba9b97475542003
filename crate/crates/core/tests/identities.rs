use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thetanull::nullwerte::{
    prime_block_residual, theta_null_prime, theta_null_second, theta_null_sj, theta_null_squared,
};
use thetanull::siegel::{block_diag, random_siegel, SiegelPoint};
use thetanull::theta::{
    addition_residual, block_factorization_residual, brute_force_theta, parity_residual, quasi_periodicity_residual,
    reduce_characteristic, theta_char, theta_second_order, Characteristic, Precision,
};

fn prec() -> Precision {
    Precision::default()
}

fn bits(rng: &mut ChaCha8Rng, g: usize) -> Vec<i64> {
    (0..g).map(|_| rng.gen_range(0..2)).collect()
}

fn vector(rng: &mut ChaCha8Rng, g: usize, re: f64, im: f64) -> Vec<Complex64> {
    (0..g)
        .map(|_| Complex64::new(rng.gen_range(-re..=re), rng.gen_range(-im..=im)))
        .collect()
}

#[test]
fn addition_formula_with_unreduced_characteristics() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for k in 0..24u64 {
        let g = 1 + (k % 2) as usize;
        let z_mat = random_siegel(g, 500 + k, 1.0);
        let (alpha, beta, eps) = (bits(&mut rng, g), bits(&mut rng, g), bits(&mut rng, g));
        let z = vector(&mut rng, g, 1.0, 0.3);
        let x = vector(&mut rng, g, 1.0, 0.3);
        let r = addition_residual(&alpha, &beta, &eps, &z_mat, &z, &x, &prec()).unwrap();
        worst = worst.max(r);
    }
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn addition_formula_fails_if_second_characteristics_are_reduced() {
    // With beta = 1 and alpha = eps = 1 the sigma = 1 term carries beta + sigma = 2;
    // reducing it to 0 flips the sign of that term.
    let z_mat = random_siegel(1, 3, 0.5);
    let z = [Complex64::new(0.2, 0.1)];
    let x = [Complex64::new(-0.3, 0.05)];
    let p = prec();
    let exact = addition_residual(&[1], &[1], &[1], &z_mat, &z, &x, &p).unwrap();
    assert!(exact <= 1e-10);
    let unreduced = Characteristic::new(vec![1], vec![2]).unwrap();
    let (reduced, sign) = reduce_characteristic(&unreduced);
    assert_eq!(sign, -1);
    let w = [z[0] + x[0]];
    let a = theta_char(&unreduced, &z_mat, &w, &p).unwrap();
    let b = theta_char(&reduced, &z_mat, &w, &p).unwrap();
    assert!((a + b).norm() <= 1e-12 && a.norm() > 1e-3);
}

#[test]
fn parity_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..30u64 {
        let g = 1 + (k % 3) as usize;
        let z_mat = random_siegel(g, 700 + k, 1.0);
        let ch = Characteristic::new(bits(&mut rng, g), bits(&mut rng, g)).unwrap();
        let z = vector(&mut rng, g, 1.0, 0.5);
        let r = parity_residual(&ch, &z_mat, &z, &prec()).unwrap();
        assert!(r <= 1e-10, "g={g} {ch} {r}");
    }
}

#[test]
fn odd_nulls_vanish() {
    for g in 1..=3usize {
        let z_mat = random_siegel(g, 40 + g as u64, 1.0);
        let mut eps = vec![0i64; g];
        let mut eps_prime = vec![0i64; g];
        eps[0] = 1;
        eps_prime[0] = 1;
        let ch = Characteristic::new(eps, eps_prime).unwrap();
        let v = theta_char(&ch, &z_mat, &vec![Complex64::new(0.0, 0.0); g], &prec()).unwrap();
        assert!(v.norm() <= 1e-12, "{v}");
    }
}

#[test]
fn quasi_periodicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for k in 0..16u64 {
        let g = 1 + (k % 2) as usize;
        // Well-conditioned points keep the shifted arguments tractable.
        let base = SiegelPoint::scaled_identity(g, 1.0).unwrap();
        let x = random_siegel(g, 900 + k, 0.3).real_part();
        let z_mat = SiegelPoint::new(base.entries() + x.map(|v| Complex64::new(v, 0.0))).unwrap();
        let u = bits(&mut rng, g);
        let n: Vec<i64> = (0..g).map(|_| rng.gen_range(-2..=2)).collect();
        let m: Vec<i64> = (0..g).map(|_| rng.gen_range(-1..=1)).collect();
        let z = vector(&mut rng, g, 0.5, 0.2);
        let r = quasi_periodicity_residual(&u, &z_mat, &z, &n, &m, &prec()).unwrap();
        assert!(r <= 1e-9, "{r}");
    }
}

#[test]
fn second_order_representative_independence() {
    let z_mat = random_siegel(2, 77, 1.0);
    let z = [Complex64::new(0.1, 0.05), Complex64::new(-0.2, 0.1)];
    let a = theta_second_order(&[1, 0], &z_mat, &z, &prec()).unwrap();
    let b = theta_second_order(&[-1, 4], &z_mat, &z, &prec()).unwrap();
    assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
    let minus = [-z[0], -z[1]];
    let c = theta_second_order(&[1, 0], &z_mat, &minus, &prec()).unwrap();
    assert!((a - c).norm() <= 1e-12 * (1.0 + a.norm()));
}

#[test]
fn block_factorization_total_genus_four() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for (k, (a, b)) in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1)].into_iter().enumerate() {
        let z1 = random_siegel(a, 60 + k as u64, 1.0);
        let z2 = random_siegel(b, 80 + k as u64, 1.0);
        let c1 = Characteristic::new(bits(&mut rng, a), bits(&mut rng, a)).unwrap();
        let c2 = Characteristic::new(bits(&mut rng, b), bits(&mut rng, b)).unwrap();
        let w1 = vector(&mut rng, a, 0.5, 0.2);
        let w2 = vector(&mut rng, b, 0.5, 0.2);
        let r = block_factorization_residual(&c1, &z1, &w1, &c2, &z2, &w2, &prec()).unwrap();
        assert!(r <= 1e-10, "({a},{b}) {r}");
        if a + b <= 4 {
            let r = prime_block_residual(&z1, &z2, &prec()).unwrap();
            assert!(r <= 1e-10, "prime ({a},{b}) {r}");
        }
    }
}

#[test]
fn oracle_equivalence_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for k in 0..12u64 {
        let g = 1 + (k % 3) as usize;
        let z_mat = random_siegel(g, 300 + k, 1.0);
        let ch = Characteristic::new(bits(&mut rng, g), bits(&mut rng, g)).unwrap();
        let z = vector(&mut rng, g, 0.5, 0.2);
        let fast = theta_char(&ch, &z_mat, &z, &prec()).unwrap();
        let slow = brute_force_theta(&ch, &z_mat, &z, if g == 3 { 15 } else { 30 });
        assert!(
            (fast - slow).norm() <= 1e-12 * slow.norm().max(1.0),
            "g={g} {fast} {slow}"
        );
    }
}

#[test]
fn nulls_never_vanish_together() {
    for k in 0..20u64 {
        let g = 1 + (k % 3) as usize;
        let z = random_siegel(g, 1200 + k, 1.0);
        assert!(theta_null_second(&z, &prec()).unwrap().max_abs() > 1e-6);
        assert!(theta_null_squared(&z, &prec()).unwrap().max_abs() > 1e-6);
        if g >= 2 {
            assert!(theta_null_sj(&z, &prec()).unwrap().max_abs() > 1e-6);
            assert!(theta_null_prime(&z, &prec()).unwrap().max_abs() > 1e-6);
        }
    }
}

#[test]
fn block_points_stay_in_siegel_space() {
    let z = block_diag(&random_siegel(2, 1, 1.0), &random_siegel(1, 2, 1.0));
    assert_eq!(z.genus(), 3);
    assert!(z.min_imag_eigenvalue() > 0.0);
}
