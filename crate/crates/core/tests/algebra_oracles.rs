mod common;

use common::*;
use proptest::prelude::*;
use tnn_core::tsvd::{nuclear_norm, singular_values, spectral_norm, t_svd};
use tnn_core::{c64, LinearTransform, Tensor3};

const TOL: f64 = 1e-10;

#[test]
fn t_product_matches_triple_loop() {
    let mut r = rng(11);
    for _ in 0..100 {
        let [n1, n2, n3] = random_dims(&mut r, [8, 6, 5]);
        let n4 = random_dims(&mut r, [8, 6, 5])[1];
        let a = random_tensor(&mut r, [n1, n2, n3]);
        let b = random_tensor(&mut r, [n2, n4, n3]);
        let got = a.t_product(&b).unwrap();
        assert!(max_diff(&got, &naive_t_product(&a, &b)) <= TOL);
    }
}

#[test]
fn t_svd_matches_jacobi_and_reconstructs() {
    let mut r = rng(12);
    for _ in 0..100 {
        let dims = random_dims(&mut r, [8, 6, 5]);
        let a = random_tensor(&mut r, dims);
        let f = t_svd(&a).unwrap();
        let oracle = oracle_singular_values(&a);
        for (k, want) in oracle.iter().enumerate() {
            let got = f.singular_values(k);
            assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() <= TOL, "slice {k}: {g} vs {w}");
            }
        }
        let s = f.s_tensor();
        let rebuilt = naive_t_product(&naive_t_product(&f.u, &s), &naive_conj_transpose(&f.v));
        assert!(max_diff(&rebuilt, &a) <= TOL);
        let w = f.width();
        let uhu = naive_t_product(&naive_conj_transpose(&f.u), &f.u);
        let vhv = naive_t_product(&naive_conj_transpose(&f.v), &f.v);
        let eye = Tensor3::identity(w, dims[2]).unwrap();
        assert!(max_diff(&uhu, &eye) <= TOL);
        assert!(max_diff(&vhv, &eye) <= TOL);
    }
}

#[test]
fn norms_match_naive_loops() {
    let mut r = rng(13);
    for _ in 0..100 {
        let dims = random_dims(&mut r, [8, 6, 5]);
        let a = random_tensor(&mut r, dims);
        let b = random_tensor(&mut r, dims);
        let sv = oracle_singular_values(&a);
        let nuclear: f64 = sv.iter().flatten().sum();
        let spectral = sv.iter().flatten().fold(0.0f64, |m, &s| m.max(s));
        assert!((nuclear_norm(&a).unwrap() - nuclear).abs() <= TOL);
        assert!((spectral_norm(&a).unwrap() - spectral).abs() <= TOL);
        assert!((a.fro_norm() - naive_fro(&a)).abs() <= TOL);
        assert!((a.inner_product(&b).unwrap() - naive_inner(&a, &b)).norm() <= TOL);

        let [n1, n2, n3] = dims;
        let inf = a.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert_eq!(a.inf_norm(), inf);
        let mut inf2 = 0.0f64;
        for i in 0..n1 {
            let mut acc = 0.0;
            for j in 0..n2 {
                for k in 0..n3 {
                    acc += a[(i, j, k)].norm_sqr();
                }
            }
            inf2 = inf2.max(acc.sqrt());
        }
        for j in 0..n2 {
            let mut acc = 0.0;
            for i in 0..n1 {
                for k in 0..n3 {
                    acc += a[(i, j, k)].norm_sqr();
                }
            }
            inf2 = inf2.max(acc.sqrt());
        }
        assert!((a.inf2_norm() - inf2).abs() <= TOL);
    }
}

#[test]
fn spectral_norm_agrees_with_power_iteration() {
    let mut r = rng(14);
    for _ in 0..30 {
        let dims = random_dims(&mut r, [8, 6, 5]);
        let a = random_tensor(&mut r, dims);
        let power = (0..dims[2])
            .map(|k| power_iteration(&slice_rows(&a, k), 20_000))
            .fold(0.0, f64::max);
        let got = spectral_norm(&a).unwrap();
        assert!((got - power).abs() <= 1e-8 * got.max(1.0), "{got} vs {power}");
    }
}

#[test]
fn duality_holds_and_is_tight() {
    let mut r = rng(15);
    for _ in 0..1000 {
        let dims = random_dims(&mut r, [6, 5, 4]);
        let a = random_tensor(&mut r, dims);
        let b = random_tensor(&mut r, dims);
        let lhs = a.inner_product(&b).unwrap().norm();
        let rhs = nuclear_norm(&a).unwrap() * spectral_norm(&b).unwrap();
        assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
    }
    for _ in 0..50 {
        let dims = random_dims(&mut r, [6, 5, 4]);
        let a = random_tensor(&mut r, dims);
        let f = t_svd(&a).unwrap();
        let b = f.u.t_product(&f.v.t_conj_transpose()).unwrap();
        let ip = a.inner_product(&b).unwrap();
        assert!((ip.re - nuclear_norm(&a).unwrap()).abs() <= 1e-8);
        assert!(ip.im.abs() <= 1e-8);
        assert!((spectral_norm(&b).unwrap() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn mode3_matches_naive() {
    let mut r = rng(16);
    for _ in 0..50 {
        let dims = random_dims(&mut r, [6, 5, 5]);
        let big = dims[2] + 2;
        let m: Vec<Vec<c64>> = (0..big)
            .map(|_| (0..dims[2]).map(|_| tnn_core::rng::complex_gaussian(&mut r)).collect())
            .collect();
        let mat = faer::Mat::from_fn(big, dims[2], |l, k| m[l][k]);
        let a = random_tensor(&mut r, dims);
        let got = a.mode3_product(mat.as_ref()).unwrap();
        assert!(max_diff(&got, &naive_mode3(&a, &m)) <= TOL);
    }
}

#[test]
fn singular_values_are_sorted_per_slice() {
    let a = seeded_tensor(3, [7, 4, 3]);
    let s = singular_values(&a).unwrap();
    assert_eq!(s.len(), 12);
    for chunk in s.chunks(4) {
        assert!(chunk.windows(2).all(|w| w[0] >= w[1]));
    }
}

fn dims_strategy() -> impl Strategy<Value = ([usize; 3], usize, u64)> {
    (1usize..6, 1usize..6, 1usize..5, 1usize..6, any::<u64>()).prop_map(|(a, b, c, d, s)| ([a, b, c], d, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn t_product_is_associative((dims, n4, seed) in dims_strategy()) {
        let mut r = rng(seed);
        let [n1, n2, n3] = dims;
        let a = random_tensor(&mut r, [n1, n2, n3]);
        let b = random_tensor(&mut r, [n2, n4, n3]);
        let c = random_tensor(&mut r, [n4, n1, n3]);
        let left = a.t_product(&b).unwrap().t_product(&c).unwrap();
        let right = a.t_product(&b.t_product(&c).unwrap()).unwrap();
        prop_assert!(max_diff(&left, &right) <= 1e-10 * (1.0 + left.inf_norm()));
    }

    #[test]
    fn conj_transpose_reverses_products((dims, n4, seed) in dims_strategy()) {
        let mut r = rng(seed);
        let [n1, n2, n3] = dims;
        let a = random_tensor(&mut r, [n1, n2, n3]);
        let b = random_tensor(&mut r, [n2, n4, n3]);
        let lhs = a.t_product(&b).unwrap().t_conj_transpose();
        let rhs = b.t_conj_transpose().t_product(&a.t_conj_transpose()).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12);
        prop_assert_eq!(a.t_conj_transpose().t_conj_transpose(), a);
    }

    #[test]
    fn mode3_is_linear((dims, _n4, seed) in dims_strategy()) {
        let mut r = rng(seed);
        let t = LinearTransform::random_conditioned(dims[2], dims[2] + 1, seed, 0.5, 2.0).unwrap();
        let a = random_tensor(&mut r, dims);
        let b = random_tensor(&mut r, dims);
        let s = c64::new(0.3, -1.7);
        let lhs = t.apply(&(&a + &b.scale(s))).unwrap();
        let rhs = &t.apply(&a).unwrap() + &t.apply(&b).unwrap().scale(s);
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-10);
        let back = t.pinv_apply(&t.apply(&a).unwrap()).unwrap();
        prop_assert!(max_diff(&back, &a) <= 1e-10);
    }

    #[test]
    fn nuclear_norm_is_a_norm((dims, _n4, seed) in dims_strategy()) {
        let mut r = rng(seed);
        let a = random_tensor(&mut r, dims);
        let b = random_tensor(&mut r, dims);
        let na = nuclear_norm(&a).unwrap();
        let nb = nuclear_norm(&b).unwrap();
        prop_assert!(nuclear_norm(&(&a + &b)).unwrap() <= (na + nb) * (1.0 + 1e-12));
        let scaled = nuclear_norm(&a.scale(c64::new(0.0, -2.5))).unwrap();
        prop_assert!((scaled - 2.5 * na).abs() <= 1e-10 * (1.0 + na));
        prop_assert!(spectral_norm(&a).unwrap() <= a.fro_norm() * (1.0 + 1e-12));
        prop_assert!(a.fro_norm() <= na * (1.0 + 1e-12));
    }
}
