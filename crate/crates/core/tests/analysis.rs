mod common;

use common::*;
use tnn_core::analysis::{
    appendix_d_bound_check, appendix_d_margin, incoherence, phase_experiment, project_s, project_s_perp, psnr,
    mpsnr, rel_error, sampling_bound, PhaseSetup, RankTarget,
};
use tnn_core::generators::{gen_single, GeneratorConfig};
use tnn_core::tsvd::t_svd;
use tnn_core::{c64, LinearTransform, SolverConfig, Tensor3};

const ONE: c64 = c64::new(1.0, 0.0);

/// `n x 1 x big` tensor whose tube `(i, 0, :)` is all ones.
fn xi(n: usize, i: usize, big: usize) -> Tensor3 {
    Tensor3::from_fn([n, 1, big], |a, _, _| if a == i { ONE } else { ZERO }).unwrap()
}

/// `1 x 1 x big` tube holding column `k` of `T`.
fn t_zeta(t: &LinearTransform, k: usize) -> Tensor3 {
    Tensor3::from_fn([1, 1, t.big_n3()], |_, _, l| t.matrix()[(l, k)]).unwrap()
}

fn generated(t: &LinearTransform, dims: [usize; 3], r: usize, seed: u64) -> Tensor3 {
    t.apply(&gen_single(t, dims, r, &GeneratorConfig::with_seed(seed)).unwrap()).unwrap()
}

#[test]
fn incoherence_matches_brute_force_basis_loop() {
    let cases = [
        (LinearTransform::dft(6).unwrap(), [9, 7, 6], 2),
        (LinearTransform::dct(5).unwrap(), [6, 8, 5], 3),
        (LinearTransform::random_conditioned(4, 7, 2, 0.5, 2.0).unwrap(), [6, 6, 4], 2),
    ];
    for (t, dims, r) in cases {
        let tx = generated(&t, dims, r, 3);
        let rep = incoherence(&tx, r, &t).unwrap();
        let (u, v) = t_svd(&tx).unwrap().skinny(r).unwrap();
        let (uh, vh) = (naive_conj_transpose(&u), naive_conj_transpose(&v));
        let [n1, n2, _] = dims;
        let big = t.big_n3();

        let mut maxima = [0.0f64; 4];
        for i in 0..n1 {
            let a = naive_t_product(&uh, &xi(n1, i, big));
            maxima[0] = maxima[0].max(naive_fro(&a).powi(2));
            for k in 0..t.n3() {
                maxima[2] = maxima[2].max(naive_fro(&naive_t_product(&a, &t_zeta(&t, k))).powi(2));
            }
        }
        for j in 0..n2 {
            let a = naive_t_product(&vh, &xi(n2, j, big));
            maxima[1] = maxima[1].max(naive_fro(&a).powi(2));
            for k in 0..t.n3() {
                maxima[3] = maxima[3].max(naive_fro(&naive_t_product(&a, &t_zeta(&t, k))).powi(2));
            }
        }
        for (got, want) in rep.per_basis_max.iter().zip(&maxima) {
            assert!((got - want).abs() <= 1e-10, "{}: {got} vs {want}", t.name());
        }

        let (rf, bf, t12) = (r as f64, big as f64, t.one_to_two().powi(2));
        let mu = (maxima[0] * n1 as f64 / (rf * bf)).max(maxima[1] * n2 as f64 / (rf * bf));
        let nu = (maxima[2] * n1 as f64 / (rf * t12)).max(maxima[3] * n2 as f64 / (rf * t12));
        assert!((rep.mu - mu).abs() <= 1e-10);
        assert!((rep.nu - nu).abs() <= 1e-10);
        // Each inequality is an equality at its maximizer.
        assert!((rep.mu_u * rf * bf / n1 as f64 - maxima[0]).abs() <= 1e-10);
        assert!((rep.mu_v * rf * bf / n2 as f64 - maxima[1]).abs() <= 1e-10);
        assert!((rep.nu_u * rf * t12 / n1 as f64 - maxima[2]).abs() <= 1e-10);
        assert!((rep.nu_v * rf * t12 / n2 as f64 - maxima[3]).abs() <= 1e-10);
    }
}

#[test]
fn projector_identities() {
    let t = LinearTransform::dft(5).unwrap();
    let tx = generated(&t, [8, 6, 5], 2, 9);
    let (u, v) = t_svd(&tx).unwrap().skinny(2).unwrap();
    let mut r = rng(41);
    for _ in 0..20 {
        let z = random_tensor(&mut r, [8, 6, 5]);
        let ps = project_s(&z, &u, &v).unwrap();
        let pp = project_s_perp(&z, &u, &v).unwrap();
        assert!(max_diff(&project_s(&ps, &u, &v).unwrap(), &ps) <= 1e-10);
        assert!(max_diff(&(&ps + &pp), &z) <= 1e-12);
        assert!(ps.inner_product(&pp).unwrap().norm() <= 1e-10);
        // U * G^H is a fixed point.
        let g = random_tensor(&mut r, [6, 2, 5]);
        let ug = naive_t_product(&u, &naive_conj_transpose(&g));
        assert!(max_diff(&project_s(&ug, &u, &v).unwrap(), &ug) <= 1e-10);
    }
    assert!(project_s(&Tensor3::zeros([7, 6, 5]).unwrap(), &u, &v).is_err());
}

#[test]
fn sampling_bound_hand_evaluated() {
    let t = LinearTransform::dft(20).unwrap();
    let got = sampling_bound(&t, 1.0, 2, 50, 50, 1.0);
    let want = 2.0 * 2.0 * 100.0 / 2500.0 * (2000f64).ln().powi(2);
    assert!((got - want).abs() <= 1e-12 * want);
}

#[test]
fn bound_holds_at_full_rank() {
    let t = LinearTransform::dft(4).unwrap();
    let tx = generated(&t, [6, 5, 4], 5, 2);
    let rep = incoherence(&tx, 5, &t).unwrap();
    let (u, v) = t_svd(&tx).unwrap().skinny(5).unwrap();
    assert!(appendix_d_bound_check(&u, &v, &t, rep.nu).unwrap());
}

#[test]
fn bound_holds_for_generated_and_fails_when_halved() {
    for t in [LinearTransform::dft(6).unwrap(), LinearTransform::dct(6).unwrap()] {
        let tx = generated(&t, [10, 8, 6], 2, 4);
        let rep = incoherence(&tx, 2, &t).unwrap();
        let (u, v) = t_svd(&tx).unwrap().skinny(2).unwrap();
        let margin = appendix_d_margin(&u, &v, &t, rep.nu).unwrap();
        assert!(margin.holds(), "{margin:?}");
        assert!(!appendix_d_bound_check(&u, &v, &t, rep.nu / 2.0).unwrap());
    }
}

#[test]
fn psnr_matches_two_pass_loop() {
    let mut r = rng(51);
    for _ in 0..20 {
        let a = random_tensor(&mut r, [5, 4, 3]).real_part();
        let b = random_tensor(&mut r, [5, 4, 3]).real_part();
        let mut sq = 0.0;
        for k in 0..3 {
            for j in 0..4 {
                for i in 0..5 {
                    sq += (a[(i, j, k)].re - b[(i, j, k)].re).powi(2);
                }
            }
        }
        let want = 10.0 * (4.0 * 60.0 / sq).log10();
        assert!((psnr(&a, &b, 2.0).unwrap() - want).abs() <= 1e-10);
    }
    let a = Tensor3::from_fn([4, 4, 2], |i, j, k| c64::new(((i + j + k) % 3) as f64 / 3.0, 0.0)).unwrap();
    let b = a.map(|z| z + c64::new(0.1, 0.0));
    assert!((psnr(&a, &b, 1.0).unwrap() - 20.0).abs() <= 1e-10);
    assert!((mpsnr(&a, &b, 1.0).unwrap() - 20.0).abs() <= 1e-10);
    assert!((rel_error(&a, &b).unwrap() - 0.1 * 32f64.sqrt() / a.fro_norm()).abs() <= 1e-12);
}

#[test]
fn phase_rows_are_monotone_and_reproducible() {
    let setup = PhaseSetup::single([10, 10, 4], LinearTransform::dft(4).unwrap());
    let ranks = [RankTarget::Single(1), RankTarget::Single(3)];
    let rates = [0.2, 0.5, 0.9];
    let cfg = SolverConfig {
        max_iters: 600,
        ..SolverConfig::default()
    };
    let gen = GeneratorConfig::default();
    let a = phase_experiment(&setup, &ranks, &rates, 4, 99, &cfg, &gen).unwrap();
    let b = phase_experiment(&setup, &ranks, &rates, 4, 99, &cfg, &gen).unwrap();
    assert_eq!(a, b);
    for row in a.chunks(rates.len()) {
        let inversions = row.windows(2).filter(|w| w[1].successes < w[0].successes).count();
        assert!(inversions <= 1, "{row:?}");
    }
    assert!(a.iter().all(|c| c.generator_failures == 0));
}
