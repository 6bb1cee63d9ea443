use gbispectrum::clebsch_gordan::{build, verify};
use gbispectrum::io::{cg_to_json, matrix_from_json};
use gbispectrum::linalg::{direct_sum, frob, kron, CMatrix};
use gbispectrum::{GroupContext, GroupKind};

fn groups_up_to_48() -> Vec<GroupKind> {
    let mut out: Vec<GroupKind> = (1..=48).map(GroupKind::Cyclic).collect();
    out.extend((1..=24).map(GroupKind::Dihedral));
    for ns in [vec![2, 2], vec![3, 3], vec![2, 4], vec![4, 4], vec![2, 2, 2], vec![3, 3, 3], vec![4, 2, 2], vec![2, 3, 4]] {
        out.push(GroupKind::Commutative(ns));
    }
    out.push(GroupKind::Octahedral);
    out.push(GroupKind::FullOctahedral);
    out
}

// Contract residuals computed directly, without the library's checker.
fn contract(ctx: &GroupContext, i: usize, j: usize) -> (f64, f64) {
    let cg = ctx.cg(i, j).unwrap();
    let c = &cg.matrix;
    let d = ctx.dim(i) * ctx.dim(j);
    assert_eq!(c.shape(), (d, d));
    let unit = frob(&(c.adjoint() * c - CMatrix::identity(d, d)));
    let mut worst: f64 = 0.0;
    for g in 0..ctx.order() {
        let lhs = kron(ctx.irreps().get(i).image(g), ctx.irreps().get(j).image(g));
        let blocks: Vec<&CMatrix> = cg.blocks.iter().map(|&k| ctx.irreps().get(k).image(g)).collect();
        let rhs = c * direct_sum(blocks) * c.adjoint();
        worst = worst.max(frob(&(lhs - rhs)));
    }
    (unit, worst)
}

#[test]
fn contract_holds_for_every_pair_of_every_small_group() {
    for kind in groups_up_to_48() {
        let ctx = GroupContext::get(&kind).unwrap();
        let r = ctx.num_irreps();
        for i in 0..r {
            for j in 0..r {
                let (u, b) = contract(&ctx, i, j);
                assert!(u <= 1e-10, "{kind} ({i},{j}) unitarity {u}");
                assert!(b <= 1e-9, "{kind} ({i},{j}) block residual {b}");
                let cg = ctx.cg(i, j).unwrap();
                let mut blocks = cg.blocks.clone();
                blocks.sort_unstable();
                assert_eq!(blocks, ctx.kronecker().products(i, j), "{kind} ({i},{j})");
                let total: usize = cg.blocks.iter().map(|&k| ctx.dim(k)).sum();
                assert_eq!(total, ctx.dim(i) * ctx.dim(j));
            }
        }
    }
}

fn blocks_of(kind: &GroupKind, a: &str, b: &str) -> Vec<String> {
    let ctx = GroupContext::get(kind).unwrap();
    let (i, j) = (ctx.irreps().index_of(a).unwrap(), ctx.irreps().index_of(b).unwrap());
    let mut out: Vec<String> = ctx.cg(i, j).unwrap().blocks.iter().map(|&k| ctx.label(k).to_string()).collect();
    out.sort();
    out
}

#[test]
fn dihedral_examples() {
    assert_eq!(blocks_of(&GroupKind::Dihedral(5), "rho_1", "rho_1"), ["rho_0", "rho_01", "rho_2"]);
    assert_eq!(blocks_of(&GroupKind::Dihedral(5), "rho_1", "rho_2"), ["rho_1", "rho_2"]);
    // k + l = n/2 lands on the two sign irreps.
    assert_eq!(blocks_of(&GroupKind::Dihedral(8), "rho_1", "rho_3"), ["rho_02", "rho_03", "rho_2"]);
    assert_eq!(blocks_of(&GroupKind::Dihedral(8), "rho_3", "rho_3"), ["rho_0", "rho_01", "rho_2"]);
    assert_eq!(blocks_of(&GroupKind::Dihedral(4), "rho_1", "rho_1"), ["rho_0", "rho_01", "rho_02", "rho_03"]);
}

#[test]
fn octahedral_examples() {
    assert_eq!(blocks_of(&GroupKind::Octahedral, "rho_1", "rho_1"), ["rho_0", "rho_1", "rho_2", "rho_3"]);
    assert_eq!(blocks_of(&GroupKind::Octahedral, "rho_3", "rho_3"), ["rho_0", "rho_3", "rho_4"]);
}

#[test]
fn trivial_factor_gives_the_identity() {
    for kind in [GroupKind::Dihedral(6), GroupKind::Octahedral, GroupKind::FullOctahedral] {
        let ctx = GroupContext::get(&kind).unwrap();
        for k in 0..ctx.num_irreps() {
            let cg = ctx.cg(0, k).unwrap();
            assert_eq!(cg.blocks, vec![k]);
            let d = ctx.dim(k);
            // A unitary intertwiner of an irrep with itself is a phase times I.
            let c = &cg.matrix;
            let phase = c[(0, 0)];
            assert!((phase.norm() - 1.0).abs() < 1e-10);
            assert!(frob(&(c - CMatrix::identity(d, d) * phase)) < 1e-10, "{kind} {k}");
        }
    }
}

#[test]
fn abelian_matrices_are_one() {
    for kind in [GroupKind::Cyclic(12), GroupKind::Commutative(vec![3, 4])] {
        let ctx = GroupContext::get(&kind).unwrap();
        for i in 0..ctx.num_irreps() {
            for j in 0..ctx.num_irreps() {
                let cg = ctx.cg(i, j).unwrap();
                assert_eq!(cg.matrix.shape(), (1, 1));
                assert!((cg.matrix[(0, 0)].norm() - 1.0).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn library_checker_agrees() {
    let ctx = GroupContext::get(&GroupKind::FullOctahedral).unwrap();
    for (i, j) in [(1, 1), (1, 6), (6, 6), (3, 8)] {
        let cg = build(&ctx, i, j).unwrap();
        let (u, b) = verify(&ctx, &cg);
        let (u2, b2) = contract(&ctx, i, j);
        assert!(u <= 1e-10 && u2 <= 1e-10);
        assert!(b <= 1e-9 && b2 <= 1e-9);
    }
}

#[test]
fn out_of_range_pairs_are_rejected() {
    let ctx = GroupContext::get(&GroupKind::Dihedral(3)).unwrap();
    assert!(ctx.cg(0, 7).is_err());
}

#[test]
fn json_layout() {
    let ctx = GroupContext::get(&GroupKind::Dihedral(5)).unwrap();
    let cg = ctx.cg(2, 2).unwrap();
    let doc = cg_to_json(&ctx, &cg);
    assert_eq!(doc["group"], "dihedral:5");
    assert_eq!(doc["rho1"], "rho_1");
    assert_eq!(doc["rho2"], "rho_1");
    assert_eq!(doc["blocks"].as_array().unwrap().len(), 3);
    assert!(doc["unitarity_residual"].as_f64().unwrap() < 1e-10);
    assert!(doc["block_residual"].as_f64().unwrap() < 1e-9);
    // Interleaved [re, im] per entry, row major.
    assert_eq!(doc["matrix"][0][1].as_array().unwrap().len(), 2);
    let m = matrix_from_json(&doc["matrix"]).unwrap();
    assert_eq!(m, cg.matrix);
}
