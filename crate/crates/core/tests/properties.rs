mod common;

use proptest::prelude::*;
use tg_core::galaxy;
use tg_core::hyper::{self, HypernodePresentation as Hp, LimitVerdict};
use tg_core::metric::{self, Step, TipRank};
use tg_core::ordinal::{self, ExtRank, Ordinal};
use tg_core::sections;
use tg_core::wgraph::WNodeRef;

use common::{context_with, graph, nodes, Cnf, SUITE};

fn cnf() -> impl Strategy<Value = Cnf> {
    (prop::array::uniform4(0u64..6), prop::bool::weighted(0.2), 1u64..3)
        .prop_map(|(c, top, k)| Cnf([c[0], c[1], c[2], c[3], if top { k } else { 0 }]))
}

proptest! {
    #[test]
    fn nat_sum_is_coefficientwise(a in cnf(), b in cnf()) {
        let s = ordinal::nat_sum(&a.to_ordinal(), &b.to_ordinal());
        prop_assert_eq!(Cnf::of(&s), a.add(b));
    }

    #[test]
    fn order_is_lexicographic_from_the_top(a in cnf(), b in cnf()) {
        prop_assert_eq!(a.to_ordinal().cmp(&b.to_ordinal()), a.cmp(b));
    }

    #[test]
    fn nat_sum_laws(a in cnf(), b in cnf(), c in cnf()) {
        let (x, y, z) = (a.to_ordinal(), b.to_ordinal(), c.to_ordinal());
        prop_assert_eq!(ordinal::nat_sum(&x, &y), ordinal::nat_sum(&y, &x));
        prop_assert_eq!(
            ordinal::nat_sum(&ordinal::nat_sum(&x, &y), &z),
            ordinal::nat_sum(&x, &ordinal::nat_sum(&y, &z))
        );
        if x < y {
            prop_assert!(ordinal::nat_sum(&x, &z) < ordinal::nat_sum(&y, &z));
        }
    }

    #[test]
    fn text_round_trip(a in cnf()) {
        let x = a.to_ordinal();
        prop_assert_eq!(x.to_string().parse::<Ordinal>().unwrap(), x);
    }
}

fn pick<T: Clone>(v: &[T], i: prop::sample::Index) -> T {
    v[i.index(v.len())].clone()
}

/// Tip and branch steps of the geodesic, plus some slack for the oracle.
fn oracle_bounds(g: &tg_core::wgraph::WGraphPresentation, x: &WNodeRef, y: &WNodeRef) -> (u64, u64) {
    let w = metric::geodesic(g, x, y).unwrap();
    let tips = w.steps.iter().filter(|(s, _)| matches!(s, Step::Tip(TipRank::Rank(_)))).count() as u64;
    let branches = w.steps.iter().filter(|(s, _)| matches!(s, Step::Branch(_))).count() as u64;
    (tips + 1, branches + 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms(
        f in 0..SUITE.len(),
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
        k in any::<prop::sample::Index>(),
    ) {
        let g = graph(SUITE[f]);
        let ns = nodes(&g, 3);
        let (x, y, z) = (pick(&ns, i), pick(&ns, j), pick(&ns, k));
        let dxy = metric::wdistance(&g, &x, &y).unwrap();
        prop_assert_eq!(&dxy, &metric::wdistance(&g, &y, &x).unwrap());
        prop_assert!(metric::wdistance(&g, &x, &x).unwrap().is_zero());
        let dyz = metric::wdistance(&g, &y, &z).unwrap();
        let dxz = metric::wdistance(&g, &x, &z).unwrap();
        prop_assert!(dxz <= ordinal::nat_sum(&dxy, &dyz));
    }

    #[test]
    fn geodesic_realizes_distance(
        f in 0..SUITE.len(),
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
    ) {
        let g = graph(SUITE[f]);
        let ns = nodes(&g, 3);
        let (x, y) = (pick(&ns, i), pick(&ns, j));
        let w = metric::geodesic(&g, &x, &y).unwrap();
        prop_assert_eq!(metric::walk_length(&g, &w).unwrap(), metric::wdistance(&g, &x, &y).unwrap());
    }

    #[test]
    fn engine_matches_oracle(
        f in 0..SUITE.len(),
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
    ) {
        let g = graph(SUITE[f]);
        let ns = nodes(&g, 2);
        let (x, y) = (pick(&ns, i), pick(&ns, j));
        let (t, b) = oracle_bounds(&g, &x, &y);
        prop_assert_eq!(
            metric::wdistance(&g, &x, &y).unwrap(),
            metric::wdistance_oracle(&g, &x, &y, t, b).unwrap()
        );
    }

    /// A non-maximal wnode measures like its maximal embracer.
    #[test]
    fn nonmaximal_measures_from_its_embracer(
        f in 0..SUITE.len(),
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
    ) {
        let g = graph(SUITE[f]);
        let u = g.unroll(3).unwrap();
        let all: Vec<usize> = u.canonical_nodes().filter(|&n| !u.nodes[n].stub).collect();
        let a = pick(&all, i);
        let root = u.node_ref(u.root(a)).clone();
        let y = u.node_ref(pick(&all, j)).clone();
        let x = u.node_ref(a).clone();
        prop_assert_eq!(metric::wdistance(&g, &x, &y).unwrap(), metric::wdistance(&g, &root, &y).unwrap());
    }

    #[test]
    fn ray_segments_and_crossings(
        j in 0u64..6,
        k in 0u64..6,
        a in 0u64..12,
        b in 0u64..12,
    ) {
        let g = graph("ladder.json");
        let omega = ordinal::omega_pow(ExtRank::Fin(1)).unwrap();
        let p = |c: u64, pos: u64| g.resolve(&format!("ladder[{c}].P@{pos}")).unwrap();
        let d = metric::wdistance(&g, &p(j, a), &p(k, b)).unwrap();
        if j == k {
            prop_assert_eq!(d, Ordinal::finite(a.abs_diff(b)));
        } else {
            prop_assert!(d >= omega);
        }
        let core = g.resolve(&format!("P0@{a}")).unwrap();
        prop_assert!(metric::wdistance(&g, &core, &p(j, b)).unwrap() >= omega);
    }

    /// Same-rank wnodes that share no incident section lie at least ω^ρ apart.
    #[test]
    fn far_unless_wadjacent(f in 0usize..3, i in 0u64..8, j in 0u64..8) {
        let g = graph(["ladder.json", "ladder_apex2.json", "omega_apex.json"][f]);
        let x = g.resolve(&format!("ladder[{i}].x")).unwrap();
        let y = g.resolve(&format!("ladder[{j}].x")).unwrap();
        let d = metric::wdistance(&g, &x, &y).unwrap();
        let unit = ordinal::omega_pow(ExtRank::Fin(1)).unwrap();
        if !sections::wadjacent(&g, &x, &y).unwrap() {
            prop_assert!(d >= unit);
        }
        prop_assert_eq!(sections::wadjacent(&g, &x, &y).unwrap(), i.abs_diff(j) <= 1);
    }
}

const LADDER_PRES: [(&str, &str); 7] = [
    ("a", "std(x1)"),
    ("b", "std(x4)"),
    ("c", "std(ladder[2].P@3)"),
    ("n", "arm(ladder, 1, 0, x)"),
    ("n1", "arm(ladder, 1, 1, x)"),
    ("m", "arm(ladder, 2, 0, x)"),
    ("h", "arm(ladder, 1, 0, x, 2, 0)"),
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classes_partition_and_refine(mask in 1u32..(1 << LADDER_PRES.len()), r in 0u32..2) {
        let chosen: Vec<(&str, &str)> =
            LADDER_PRES.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, p)| *p).collect();
        let ctx = context_with("ladder.json", &chosen);
        let rho = ExtRank::Fin(r);
        let part = galaxy::classify(&ctx, rho).unwrap();
        let mut seen: Vec<&String> = part.classes.iter().flat_map(|c| &c.members).collect();
        let total = seen.len();
        seen.sort();
        seen.dedup();
        prop_assert_eq!(seen.len(), total);
        prop_assert_eq!(total, chosen.len() + part.auto_standard.iter().count());
        for c in &part.classes {
            for a in &c.members {
                for b in &c.members {
                    let (p, q) = (&part.presentations[a], &part.presentations[b]);
                    prop_assert!(hyper::limitedly_distant(&ctx, p, q, rho).unwrap().is_yes());
                }
            }
        }
        prop_assert!(galaxy::refinement_check(&ctx, ExtRank::Fin(0), ExtRank::Fin(1)).unwrap());
    }

    /// Changing finitely many terms changes no verdict.
    #[test]
    fn verdicts_ignore_finite_patches(p in 0..LADDER_PRES.len(), q in 0..LADDER_PRES.len(), at in 0u64..6, to in 0u64..9) {
        let ctx = context_with("ladder.json", &LADDER_PRES);
        let base = ctx.lookup(LADDER_PRES[p].0).unwrap();
        let other = ctx.lookup(LADDER_PRES[q].0).unwrap();
        let patched = ctx.lookup(&format!("patch({base}, {{{at}: x{to}}})")).unwrap();
        for rho in [ExtRank::Fin(0), ExtRank::Fin(1)] {
            let v = hyper::limitedly_distant(&ctx, &base, &other, rho).unwrap();
            let w = hyper::limitedly_distant(&ctx, &patched, &other, rho).unwrap();
            prop_assert_eq!(v.is_yes(), w.is_yes());
        }
        prop_assert!(matches!(hyper::equivalent(&ctx, &base, &patched).unwrap(), LimitVerdict::Yes(_)));
    }
}

#[test]
fn interleave_of_near_and_far_depends_on_residue() {
    let ctx = context_with("ladder.json", &[]);
    let mixed: Hp = ctx.lookup("interleave(2, std(x1), arm(ladder, 1, 0, x))").unwrap();
    let v = hyper::limitedly_distant(&ctx, &mixed, &ctx.lookup("std(x1)").unwrap(), ExtRank::Fin(1)).unwrap();
    match v {
        LimitVerdict::UltrafilterDependent(rs) => {
            let got: Vec<(u64, u64, bool)> = rs.iter().map(|(r, b)| (r.modulus, r.rem, *b)).collect();
            assert_eq!(got, vec![(2, 0, true), (2, 1, false)]);
        }
        other => panic!("{other:?}"),
    }
}
