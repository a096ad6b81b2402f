mod common;

use common::*;
use mfig_core::gamma::tensor_identity_check;
use mfig_core::{Energy, EntropyKind, Gamma2Formula, GammaContext, Graph, MeanFunction};
use proptest::prelude::*;
use rand::Rng;

/// Largest absolute summand of the symmetric form, used to scale comparisons
/// where the total cancels.
fn magnitude(ctx: &GammaContext<'_>, f: &[f64]) -> f64 {
    let a = ctx.gamma2_matrix();
    let n = ctx.n();
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            m = m.max((a.get(i, j) * (f[i] - f[j]).powi(2)).abs());
        }
    }
    m
}

#[test]
fn three_expressions_agree_on_random_cases() {
    let mut rng = rng(2024);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let g = random_graph(&mut rng);
        let n = g.n();
        let mean = random_mean(&mut rng);
        let energy = random_energy(&mut rng, n);
        let p = interior_point(&mut rng, n, 1e-2);
        let f = random_vec(&mut rng, n);
        let ctx = GammaContext::new(&g, &mean, &energy, &p).unwrap();
        let f1 = ctx.gamma2(&f, Gamma2Formula::F1).unwrap();
        let f3 = ctx.gamma2(&f, Gamma2Formula::F3).unwrap();
        let pair = ctx.gamma2_matrix().pair_form(&f);
        for v in [f3, pair] {
            let r = rel(v, f1);
            worst = worst.max(r);
            assert!(r <= 1e-9, "case {case}: {f1} vs {v} ({} / {:?})", mean.name(), energy);
        }
    }
    println!("worst relative difference {worst:e}");
}

#[test]
fn mixed_form_as_printed_agrees_and_variant_does_not() {
    let mut rng = rng(7);
    let mut variant_gap: f64 = 0.0;
    for _ in 0..100 {
        let g = random_graph(&mut rng);
        let n = g.n();
        let mean = random_mean(&mut rng);
        let energy = random_energy(&mut rng, n);
        let p = interior_point(&mut rng, n, 1e-2);
        let f = random_vec(&mut rng, n);
        let ctx = GammaContext::new(&g, &mean, &energy, &p).unwrap();
        let f1 = ctx.gamma2(&f, Gamma2Formula::F1).unwrap();
        let f2 = ctx.gamma2(&f, Gamma2Formula::F2).unwrap();
        let alt = ctx.gamma2(&f, Gamma2Formula::F2Alt).unwrap();
        let scale = f1.abs().max(magnitude(&ctx, &f));
        assert!((f2 - f1).abs() <= 1e-9 * scale, "{f1} vs {f2}");
        variant_gap = variant_gap.max((alt - f1).abs() / scale);
    }
    println!("largest relative deviation of the variant mixed form: {variant_gap:e}");
    assert!(variant_gap > 1e-3);
}

#[test]
fn closed_forms_match_generic_path() {
    let mut rng = rng(11);
    for _ in 0..200 {
        let g = random_graph(&mut rng);
        let n = g.n();
        let mean = random_mean(&mut rng);
        let p = interior_point(&mut rng, n, 1e-2);
        let f = random_vec(&mut rng, n);
        let v = random_vec(&mut rng, n);
        let w = random_symmetric(&mut rng, n);

        let lin = Energy::linear(v.clone());
        let ctx = GammaContext::new(&g, &mean, &lin, &p).unwrap();
        let generic = ctx.gamma2(&f, Gamma2Formula::F1).unwrap();
        let scale = generic.abs().max(magnitude(&ctx, &f)).max(1e-12);
        assert!((ctx.gamma2_linear(&v, &f).unwrap() - generic).abs() <= 1e-10 * scale);

        let inter = Energy::interaction(w.clone()).unwrap();
        let ctx = GammaContext::new(&g, &mean, &inter, &p).unwrap();
        let generic = ctx.gamma2(&f, Gamma2Formula::F1).unwrap();
        let scale = generic.abs().max(magnitude(&ctx, &f)).max(1e-12);
        assert!((ctx.gamma2_interaction(&w, &f).unwrap() - generic).abs() <= 1e-10 * scale);

        for u in [EntropyKind::Shannon, EntropyKind::Quadratic] {
            let du: Vec<f64> = p.iter().map(|&x| u.du(x).unwrap()).collect();
            let d2u: Vec<f64> = p.iter().map(|&x| u.d2u(x).unwrap()).collect();
            let ent = Energy::entropy(u);
            let ctx = GammaContext::new(&g, &mean, &ent, &p).unwrap();
            let generic = ctx.gamma2(&f, Gamma2Formula::F1).unwrap();
            let scale = generic.abs().max(magnitude(&ctx, &f)).max(1e-12);
            assert!((ctx.gamma2_entropy(&du, &d2u, &f).unwrap() - generic).abs() <= 1e-10 * scale);
        }
    }
}

#[test]
fn summation_identities_on_random_tensors() {
    let mut rng = rng(5);
    for n in 2..7 {
        for _ in 0..50 {
            let a = random_vec(&mut rng, n * n * n);
            let b = random_vec(&mut rng, n * n * n);
            let x = random_vec(&mut rng, n);
            let r = tensor_identity_check(n, &a, &b, &x).unwrap();
            assert!(r.worst_relative <= 1e-12, "{r:?}");
        }
    }
}

#[test]
fn coefficient_matrix_zero_beyond_distance_two() {
    let g = Graph::path(5).unwrap();
    let ctx = GammaContext::new(&g, &MeanFunction::logarithmic(), &Energy::shannon(), &[0.1, 0.3, 0.2, 0.15, 0.25]).unwrap();
    let a = ctx.gamma2_matrix();
    assert_eq!(a.get(0, 3), 0.0);
    assert_eq!(a.get(0, 4), 0.0);
    assert!(a.get(0, 2) != 0.0);
}

fn case_strategy() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma1_nonnegative_and_shift_invariant(seed in case_strategy(), c in -5.0f64..5.0) {
        let mut rng = rng(seed);
        let g = random_graph(&mut rng);
        let n = g.n();
        let mean = random_mean(&mut rng);
        let energy = random_energy(&mut rng, n);
        let p = interior_point(&mut rng, n, 1e-3);
        let f = random_vec(&mut rng, n);
        let shifted: Vec<f64> = f.iter().map(|x| x + c).collect();
        let ctx = GammaContext::new(&g, &mean, &energy, &p).unwrap();
        let g1 = ctx.gamma1(&f).unwrap();
        prop_assert!(g1 >= 0.0);
        prop_assert!((ctx.gamma1(&shifted).unwrap() - g1).abs() <= 1e-12 * (1.0 + g1));
        let a = ctx.gamma2(&f, Gamma2Formula::F3).unwrap();
        let b = ctx.gamma2(&shifted, Gamma2Formula::F3).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn gamma2_quadratic_in_potential(seed in case_strategy(), s in -3.0f64..3.0) {
        let mut rng = rng(seed);
        let g = random_graph(&mut rng);
        let n = g.n();
        let mean = random_mean(&mut rng);
        let energy = random_energy(&mut rng, n);
        let p = interior_point(&mut rng, n, 1e-3);
        let f = random_vec(&mut rng, n);
        let sf: Vec<f64> = f.iter().map(|x| s * x).collect();
        let ctx = GammaContext::new(&g, &mean, &energy, &p).unwrap();
        let a = ctx.gamma2_matrix();
        let base = a.pair_form(&f);
        prop_assert!((a.pair_form(&sf) - s * s * base).abs() <= 1e-10 * (1.0 + (s * s * base).abs()));
    }

    #[test]
    fn relabeling_invariance(seed in case_strategy()) {
        let mut rng = rng(seed);
        let g = random_graph(&mut rng);
        let n = g.n();
        let mean = random_mean(&mut rng);
        let p = interior_point(&mut rng, n, 1e-3);
        let f = random_vec(&mut rng, n);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let h = g.relabeled(&perm).unwrap();
        let mut q = vec![0.0; n];
        let mut fq = vec![0.0; n];
        for i in 0..n {
            q[perm[i]] = p[i];
            fq[perm[i]] = f[i];
        }
        let e = Energy::shannon();
        let a = GammaContext::new(&g, &mean, &e, &p).unwrap().gamma2(&f, Gamma2Formula::F1).unwrap();
        let b = GammaContext::new(&h, &mean, &e, &q).unwrap().gamma2(&fq, Gamma2Formula::F1).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }
}
