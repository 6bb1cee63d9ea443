use std::f64::consts::PI;

use gbispectrum::fourier::{fft_cyclic, gft, gft_abelian};
use gbispectrum::io::{bispectrum_from_json, bispectrum_to_json, triple_correlation_to_json};
use gbispectrum::linalg::{c, cis, frob, C64};
use gbispectrum::spectra::{
    abelian_bispectrum_values, avg_pool, bispectrum_entry, canonical_plan, commutative_bispectrum, full_bispectrum, max_pool,
    selection_plan, selective_bispectrum, triple_correlation,
};
use gbispectrum::{act, Error, GroupContext, GroupKind, GroupSignal, SpectrumMode};
use proptest::prelude::*;

fn small_groups() -> Vec<GroupKind> {
    let mut out: Vec<GroupKind> = (1..=16).map(GroupKind::Cyclic).collect();
    out.extend((1..=8).map(GroupKind::Dihedral));
    for ns in [vec![2, 2], vec![2, 3], vec![3, 3], vec![4, 2, 2], vec![2, 2, 2, 2]] {
        out.push(GroupKind::Commutative(ns));
    }
    out
}

fn abelian_groups_up_to_32() -> Vec<GroupKind> {
    let mut out: Vec<GroupKind> = (1..=32).map(GroupKind::Cyclic).collect();
    for ns in [vec![2, 2], vec![3, 3], vec![4, 4], vec![2, 8], vec![3, 3, 3], vec![4, 2, 2], vec![2, 2, 2, 2, 2]] {
        out.push(GroupKind::Commutative(ns));
    }
    out.push(GroupKind::Dihedral(1));
    out.push(GroupKind::Dihedral(2));
    out
}

// Relative distance between two bispectra with the same pair list.
fn beta_gap(a: &gbispectrum::BispectrumCoefficients, b: &gbispectrum::BispectrumCoefficients) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in a.entries().iter().zip(b.entries()) {
        assert_eq!(x.pair, y.pair);
        num += frob(&(&x.matrix - &y.matrix)).powi(2);
        den += frob(&y.matrix).powi(2);
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

#[test]
fn triple_correlation_examples() {
    let kind = GroupKind::Cyclic(5);
    let ctx = GroupContext::get(&kind).unwrap();
    let t = triple_correlation(&ctx, &GroupSignal::new(kind, vec![0.7; 5]).unwrap()).unwrap();
    assert!(t.iter().all(|v| (v - 5.0 * 0.7f64.powi(3)).abs() < 1e-14));

    let kind = GroupKind::Cyclic(4);
    let ctx = GroupContext::get(&kind).unwrap();
    let t = triple_correlation(&ctx, &GroupSignal::new(kind, vec![1.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
    for g1 in 0..4 {
        for g2 in 0..4 {
            assert_eq!(t[(g1, g2)], if g1 == 0 && g2 == 0 { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn triple_correlation_matches_direct_sum_on_nonabelian_groups() {
    for kind in [GroupKind::Dihedral(5), GroupKind::Octahedral] {
        let ctx = GroupContext::get(&kind).unwrap();
        let grp = ctx.group();
        let s = GroupSignal::random(&kind, 9).unwrap();
        let v = s.values();
        let t = triple_correlation(&ctx, &s).unwrap();
        for g1 in 0..ctx.order() {
            for g2 in 0..ctx.order() {
                let want: f64 = (0..ctx.order()).map(|g| v[g] * v[grp.mul(g, g1)] * v[grp.mul(g, g2)]).sum();
                assert!((t[(g1, g2)] - want).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn bispectrum_examples() {
    // beta_00 = F_0^3 and beta_0k = F_0 |F_k|^2.
    for kind in [GroupKind::Cyclic(6), GroupKind::Dihedral(5), GroupKind::Octahedral] {
        let ctx = GroupContext::get(&kind).unwrap();
        let s = GroupSignal::random(&kind, 1).unwrap();
        let f = gft(&ctx, &s).unwrap();
        let f0 = f.get(0)[(0, 0)];
        let b00 = bispectrum_entry(&ctx, &f, 0, 0).unwrap();
        assert!((b00[(0, 0)] - f0 * f0 * f0).norm() < 1e-12 * f0.norm().powi(3));
        for k in 0..ctx.num_irreps() {
            let b = bispectrum_entry(&ctx, &f, 0, k).unwrap();
            let want = f.get(k) * f.get(k).adjoint() * f0;
            assert!(frob(&(b - want)) < 1e-10, "{kind} k={k}");
        }
    }
    // A delta on C4 has F = 1 everywhere, hence beta = 1 everywhere.
    let kind = GroupKind::Cyclic(4);
    let ctx = GroupContext::get(&kind).unwrap();
    let delta = GroupSignal::new(kind, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    let b = full_bispectrum(&ctx, &gft(&ctx, &delta).unwrap()).unwrap();
    assert_eq!(b.entries().len(), 16);
    assert!(b.entries().iter().all(|e| (e.matrix[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14));
}

#[test]
fn general_formula_agrees_with_closed_form_on_abelian_groups() {
    for kind in abelian_groups_up_to_32() {
        let ctx = GroupContext::get(&kind).unwrap();
        let f = gft(&ctx, &GroupSignal::random(&kind, 2).unwrap()).unwrap();
        let general = full_bispectrum(&ctx, &f).unwrap();
        let closed = commutative_bispectrum(&ctx, &f).unwrap();
        assert_eq!(closed.mode(), SpectrumMode::Commutative);
        assert!(beta_gap(&general, &closed) < 1e-9, "{kind}");
    }
}

#[test]
fn closed_form_rejects_nonabelian_groups() {
    let kind = GroupKind::Dihedral(3);
    let ctx = GroupContext::get(&kind).unwrap();
    let f = gft(&ctx, &GroupSignal::random(&kind, 0).unwrap()).unwrap();
    assert!(matches!(commutative_bispectrum(&ctx, &f), Err(Error::InvalidParameter(_))));
    assert!(matches!(abelian_bispectrum_values(&ctx, &[], [(0, 0)]), Err(Error::InvalidParameter(_))));
}

#[test]
fn flat_abelian_values_match_selective_bispectrum() {
    for kind in [GroupKind::Cyclic(16), GroupKind::Commutative(vec![3, 4])] {
        let ctx = GroupContext::get(&kind).unwrap();
        let s = GroupSignal::random(&kind, 4).unwrap();
        let plan = canonical_plan(&ctx).unwrap();
        let beta = selective_bispectrum(&ctx, &gft(&ctx, &s).unwrap(), &plan).unwrap();
        let flat = abelian_bispectrum_values(&ctx, &gft_abelian(&ctx, &s).unwrap(), plan.pairs.iter().cloned()).unwrap();
        for (e, v) in beta.entries().iter().zip(&flat) {
            assert!((e.matrix[(0, 0)] - v).norm() < 1e-12);
        }
    }
    let kind = GroupKind::Cyclic(16);
    let ctx = GroupContext::get(&kind).unwrap();
    let s = GroupSignal::random(&kind, 4).unwrap();
    let a = gft_abelian(&ctx, &s).unwrap();
    let b = fft_cyclic(&s).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-12));
    assert!(matches!(abelian_bispectrum_values(&ctx, &a[..3], [(0, 0)]), Err(Error::IncompleteInput(_))));
}

#[test]
fn bispectrum_is_the_2d_transform_of_the_triple_correlation() {
    for n in 1..=12 {
        let kind = GroupKind::Cyclic(n);
        let ctx = GroupContext::get(&kind).unwrap();
        let s = GroupSignal::random(&kind, n as u64).unwrap();
        let t = triple_correlation(&ctx, &s).unwrap();
        let beta = commutative_bispectrum(&ctx, &gft(&ctx, &s).unwrap()).unwrap();
        for k1 in 0..n {
            for k2 in 0..n {
                let mut want = C64::new(0.0, 0.0);
                for g1 in 0..n {
                    for g2 in 0..n {
                        want += t[(g1, g2)] * cis(-2.0 * PI * ((k1 * g1 + k2 * g2) % n) as f64 / n as f64);
                    }
                }
                let got = beta.get(k1, k2).unwrap()[(0, 0)];
                assert!((got - want).norm() <= 1e-8 * want.norm().max(1.0), "n={n} ({k1},{k2})");
            }
        }
    }
}

#[test]
fn cyclic_plans_follow_the_chain() {
    for n in 2..=20 {
        let ctx = GroupContext::get(&GroupKind::Cyclic(n)).unwrap();
        let mut want = vec![(0, 0), (0, 1)];
        want.extend((1..n - 1).map(|k| (1, k)));
        let p = canonical_plan(&ctx).unwrap();
        assert_eq!(p.pairs, want, "n={n}");
        assert_eq!(p.scalar_count(&ctx), n);
        if n > 2 {
            assert_eq!(selection_plan(&ctx, None).unwrap().pairs, want);
        }
    }
    // The only non-trivial irrep of C_2 squares to the trivial one: no seed.
    let c2 = GroupContext::get(&GroupKind::Cyclic(2)).unwrap();
    assert!(matches!(selection_plan(&c2, None), Err(Error::Incomplete { .. })));
    let trivial = GroupContext::get(&GroupKind::Cyclic(1)).unwrap();
    assert_eq!(canonical_plan(&trivial).unwrap().pairs, vec![(0, 0)]);
}

#[test]
fn dihedral_plans() {
    for n in 3..=16 {
        let ctx = GroupContext::get(&GroupKind::Dihedral(n)).unwrap();
        let k = (n - 1) / 2;
        let p = canonical_plan(&ctx).unwrap();
        assert_eq!(p.pairs.len(), k + 2);
        assert_eq!(p.scalar_count(&ctx), 1 + 4 + 16 * k);
        assert_eq!(p.labeled_pairs(&ctx)[..2], [("rho_0".into(), "rho_0".into()), ("rho_0".into(), "rho_1".into())]);
        assert!(p.is_complete(&ctx));
        let greedy = selection_plan(&ctx, None).unwrap();
        assert!(greedy.is_complete(&ctx));
        // The greedy chain stops one pair short for odd n; n = 3 still
        // needs (0,0), (0,1), (1,1).
        if n % 2 == 1 {
            assert_eq!(greedy.pairs.len(), (k + 1).max(3), "n={n}");
        }
    }
}

#[test]
fn octahedral_plans() {
    let o = GroupContext::get(&GroupKind::Octahedral).unwrap();
    let p = canonical_plan(&o).unwrap();
    assert_eq!(p.pairs, vec![(0, 0), (0, 1), (1, 1), (1, 2)]);
    assert_eq!(p.seed, Some(1));
    assert_eq!(p.scalar_count(&o), 172);

    let fo = GroupContext::get(&GroupKind::FullOctahedral).unwrap();
    let p = canonical_plan(&fo).unwrap();
    assert_eq!(p.pairs, vec![(0, 0), (0, 6), (6, 6), (1, 2), (1, 6), (1, 7)]);
    assert_eq!(p.scalar_count(&fo), 334);
    assert!(p.is_complete(&fo));
}

#[test]
fn scalar_counts() {
    for kind in [
        GroupKind::Cyclic(7),
        GroupKind::Commutative(vec![3, 4]),
        GroupKind::Dihedral(6),
        GroupKind::Octahedral,
        GroupKind::FullOctahedral,
    ] {
        let ctx = GroupContext::get(&kind).unwrap();
        let n = ctx.order();
        let s = GroupSignal::random(&kind, 0).unwrap();
        let f = gft(&ctx, &s).unwrap();
        assert_eq!(triple_correlation(&ctx, &s).unwrap().len(), n * n);
        assert_eq!(full_bispectrum(&ctx, &f).unwrap().scalar_count(), n * n, "{kind}");
        let plan = canonical_plan(&ctx).unwrap();
        let sel = selective_bispectrum(&ctx, &f, &plan).unwrap();
        assert_eq!(sel.scalar_count(), plan.scalar_count(&ctx));
        if ctx.irreps().dual().is_some() {
            assert_eq!(sel.scalar_count(), n);
        }
    }
}

#[test]
fn invariants_are_invariant_on_small_groups() {
    for kind in small_groups() {
        let ctx = GroupContext::get(&kind).unwrap();
        let s = GroupSignal::random(&kind, 17).unwrap();
        let f = gft(&ctx, &s).unwrap();
        let full = full_bispectrum(&ctx, &f).unwrap();
        let plan = canonical_plan(&ctx).unwrap();
        let sel = selective_bispectrum(&ctx, &f, &plan).unwrap();
        let tc = triple_correlation(&ctx, &s).unwrap();
        for h in 0..ctx.order() {
            let moved = act(ctx.group(), h, &s).unwrap();
            let fm = gft(&ctx, &moved).unwrap();
            assert!(beta_gap(&full_bispectrum(&ctx, &fm).unwrap(), &full) <= 1e-9, "{kind} h={h}");
            assert!(beta_gap(&selective_bispectrum(&ctx, &fm, &plan).unwrap(), &sel) <= 1e-9, "{kind} h={h}");
            let tm = triple_correlation(&ctx, &moved).unwrap();
            assert!((tm - &tc).norm() <= 1e-9 * tc.norm(), "{kind} h={h}");
            assert_eq!(max_pool(&moved), max_pool(&s));
            assert!((avg_pool(&moved) - avg_pool(&s)).abs() <= 1e-15);
        }
    }
}

#[test]
fn interleaved_layout() {
    let kind = GroupKind::Dihedral(3);
    let ctx = GroupContext::get(&kind).unwrap();
    let f = gft(&ctx, &GroupSignal::random(&kind, 3).unwrap()).unwrap();
    let plan = canonical_plan(&ctx).unwrap();
    let beta = selective_bispectrum(&ctx, &f, &plan).unwrap();
    let flat = beta.interleaved();
    assert_eq!(flat.len(), 2 * beta.scalar_count());
    let mut pos = 0;
    for e in beta.entries() {
        for i in 0..e.matrix.nrows() {
            for j in 0..e.matrix.ncols() {
                assert_eq!(flat[pos], e.matrix[(i, j)].re);
                assert_eq!(flat[pos + 1], e.matrix[(i, j)].im);
                pos += 2;
            }
        }
    }
}

#[test]
fn bispectrum_json_roundtrip() {
    for kind in [GroupKind::Cyclic(6), GroupKind::Dihedral(4), GroupKind::FullOctahedral] {
        let ctx = GroupContext::get(&kind).unwrap();
        let f = gft(&ctx, &GroupSignal::random(&kind, 5).unwrap()).unwrap();
        let beta = selective_bispectrum(&ctx, &f, &canonical_plan(&ctx).unwrap()).unwrap();
        let doc = bispectrum_to_json(&ctx, &beta);
        assert_eq!(doc["mode"], "selective");
        assert_eq!(doc["scalar_count"], beta.scalar_count());
        assert_eq!(doc["pairs"][0]["rho1"], "rho_0");
        let text = serde_json::to_string(&doc).unwrap();
        let (_, back) = bispectrum_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, beta);

        let mut bad = doc.clone();
        bad["scalar_count"] = serde_json::json!(beta.scalar_count() + 1);
        assert!(bispectrum_from_json(&bad).is_err());
    }
    let kind = GroupKind::Cyclic(3);
    let ctx = GroupContext::get(&kind).unwrap();
    let t = triple_correlation(&ctx, &GroupSignal::random(&kind, 0).unwrap()).unwrap();
    let doc = triple_correlation_to_json(&kind, &t);
    assert_eq!(doc["mode"], "tc");
    assert_eq!(doc["scalar_count"], 9);
    assert_eq!(doc["matrix"][1][2].as_f64().unwrap(), t[(1, 2)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn selective_invariance(
        kind in prop_oneof![
            (2usize..=24).prop_map(GroupKind::Cyclic),
            (3usize..=12).prop_map(GroupKind::Dihedral),
            Just(GroupKind::Octahedral),
        ],
        seed in 0u64..10_000,
        h in 0usize..1000,
    ) {
        let ctx = GroupContext::get(&kind).unwrap();
        let s = GroupSignal::random(&kind, seed).unwrap();
        let plan = canonical_plan(&ctx).unwrap();
        let a = selective_bispectrum(&ctx, &gft(&ctx, &s).unwrap(), &plan).unwrap();
        let moved = act(ctx.group(), h % ctx.order(), &s).unwrap();
        let b = selective_bispectrum(&ctx, &gft(&ctx, &moved).unwrap(), &plan).unwrap();
        prop_assert!(beta_gap(&b, &a) <= 1e-9);
    }
}
