//! One PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

mod common;

use std::collections::BTreeMap;
use std::process::Command;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tg_core::galaxy;
use tg_core::hyper::{self, HypernodePresentation as Hp, LimitVerdict};
use tg_core::metric::{self, Step, TipRank};
use tg_core::ordinal::{self, ExtRank, Ordinal};
use tg_core::sections;
use tg_core::wgraph::{WGraphPresentation, WNodeRef};

use common::{context, context_with, fixture_path, graph, nodes, small_ordinals, Cnf, SUITE};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ordinal_laws() -> Outcome {
    let all = small_ordinals(3);
    let models: Vec<Cnf> = all.iter().map(Cnf::of).collect();
    let mut pairs = 0u64;
    for (a, ma) in all.iter().zip(&models) {
        for (b, mb) in all.iter().zip(&models) {
            pairs += 1;
            let s = ordinal::nat_sum(a, b);
            ensure(Cnf::of(&s) == ma.add(*mb), || format!("{a} + {b} = {s}"))?;
            ensure(s == ordinal::nat_sum(b, a), || format!("{a} + {b} not commutative"))?;
            ensure(a.cmp(b) == ma.cmp(*mb), || format!("{a} vs {b} misordered"))?;
        }
    }
    let mut triples = 0u64;
    for a in &all {
        for b in &all {
            let ab = ordinal::nat_sum(a, b);
            let lt = a < b;
            for c in &all {
                triples += 1;
                let bc = ordinal::nat_sum(b, c);
                ensure(ordinal::nat_sum(&ab, c) == ordinal::nat_sum(a, &bc), || format!("({a}+{b})+{c}"))?;
                if lt {
                    ensure(ordinal::nat_sum(a, c) < bc, || format!("{a} < {b} but not after adding {c}"))?;
                }
            }
        }
    }
    Ok(format!("{} ordinals, {pairs} pairs, {triples} triples, 0 failures", all.len()))
}

fn metric_axioms() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0);
    let graphs = ["ladder.json", "star.json", "twoarm.json", "ladder_apex2.json", "omega_apex.json", "cycle_rays.json"];
    for name in graphs {
        let g = graph(name);
        let ns = nodes(&g, 4);
        for _ in 0..500 {
            let [x, y, z] = [0; 3].map(|_| &ns[rng.gen_range(0..ns.len())]);
            let d = |p: &WNodeRef, q: &WNodeRef| metric::wdistance(&g, p, q).map_err(|e| e.to_string());
            let (dxy, dyz, dxz) = (d(x, y)?, d(y, z)?, d(x, z)?);
            ensure(dxy == d(y, x)?, || format!("{name}: d({x},{y}) asymmetric"))?;
            ensure(dxz <= ordinal::nat_sum(&dxy, &dyz), || format!("{name}: triangle fails at {x} {y} {z}"))?;
        }
    }
    Ok(format!("{} graphs x 500 triples", graphs.len()))
}

fn walk_counts(g: &WGraphPresentation, x: &WNodeRef, y: &WNodeRef) -> Result<(u64, u64), String> {
    let w = metric::geodesic(g, x, y).map_err(|e| e.to_string())?;
    let tips = w.steps.iter().filter(|(s, _)| matches!(s, Step::Tip(TipRank::Rank(_)))).count() as u64;
    let branches = w.steps.iter().filter(|(s, _)| matches!(s, Step::Branch(_))).count() as u64;
    Ok((tips, branches))
}

fn oracle_equivalence() -> Outcome {
    let mut exhaustive = 0;
    for name in SUITE {
        let g = graph(name);
        let mut depth = 1;
        while depth < 3 && g.unroll(depth + 1).map_err(|e| e.to_string())?.branches.len() <= 12 {
            depth += 1;
        }
        let ns = nodes(&g, depth);
        for (i, x) in ns.iter().enumerate() {
            for y in &ns[i..] {
                let d = metric::wdistance(&g, x, y).map_err(|e| e.to_string())?;
                let (t, b) = walk_counts(&g, x, y)?;
                let o = metric::wdistance_oracle(&g, x, y, t + 2, b + 6).map_err(|e| e.to_string())?;
                ensure(d == o, || format!("{name}: {x} {y}: engine {d}, oracle {o}"))?;
                exhaustive += 1;
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(0);
    let mut random = 0;
    for name in SUITE {
        let g = graph(name);
        let ns = nodes(&g, 6);
        for _ in 0..70 {
            let x = &ns[rng.gen_range(0..ns.len())];
            let y = &ns[rng.gen_range(0..ns.len())];
            let d = metric::wdistance(&g, x, y).map_err(|e| e.to_string())?;
            let (t, b) = walk_counts(&g, x, y)?;
            let o = metric::wdistance_oracle(&g, x, y, t + 1, b + 4).map_err(|e| e.to_string())?;
            ensure(d == o, || format!("{name}: {x} {y}: engine {d}, oracle {o}"))?;
            random += 1;
        }
    }
    Ok(format!("{exhaustive} exhaustive pairs, {random} random pairs"))
}

fn boundary_separation() -> Outcome {
    let omega = ordinal::omega_pow(ExtRank::Fin(1)).map_err(|e| e.to_string())?;
    let mut walks = 0;
    let mut pairs = 0;
    for name in ["ladder.json", "ladder_apex2.json", "omega_apex.json"] {
        let g = graph(name);
        let r = |s: String| g.resolve(&s).map_err(|e| e.to_string());
        for i in 0..5u64 {
            for j in 0..5u64 {
                for a in 0..6u64 {
                    for b in 0..6u64 {
                        let x = r(format!("ladder[{i}].P@{a}"))?;
                        let y = r(format!("ladder[{j}].P@{b}"))?;
                        let d = metric::wdistance(&g, &x, &y).map_err(|e| e.to_string())?;
                        if i != j {
                            ensure(d >= omega, || format!("{name}: d({x},{y}) = {d}"))?;
                        }
                        let core = r(format!("P0@{a}"))?;
                        let e = metric::wdistance(&g, &core, &y).map_err(|e| e.to_string())?;
                        ensure(e >= omega, || format!("{name}: d({core},{y}) = {e}"))?;
                        walks += 2;
                    }
                }
            }
        }
        let u = g.unroll(4).map_err(|e| e.to_string())?;
        let by_rank: Vec<(WNodeRef, ExtRank)> = u
            .canonical_nodes()
            .filter(|&i| !u.nodes[i].stub && u.rank(i) > ExtRank::Fin(0))
            .filter(|&i| u.root(i) == i)
            .map(|i| (u.node_ref(i).clone(), u.rank(i)))
            .collect();
        for (x, rx) in &by_rank {
            for (y, ry) in &by_rank {
                if rx != ry || *rx == ExtRank::ArrowOmega || sections::wadjacent(&g, x, y).map_err(|e| e.to_string())? {
                    continue;
                }
                let unit = ordinal::omega_pow(*rx).map_err(|e| e.to_string())?;
                let d = metric::wdistance(&g, x, y).map_err(|e| e.to_string())?;
                ensure(d >= unit, || format!("{name}: non-wadjacent {x} {y} at {d}"))?;
                pairs += 1;
            }
        }
    }
    ensure(pairs > 0, || "no non-wadjacent pairs".to_string())?;
    Ok(format!("{walks} cross-section distances, {pairs} non-wadjacent pairs"))
}

fn section_containment() -> Outcome {
    let mut count = 0;
    for name in SUITE {
        let ctx = context_with(name, &[]);
        for (low, high, pres) in galaxy::nested_section_cases(&ctx.graph).map_err(|e| e.to_string())? {
            let ok = galaxy::section_containment(&ctx, &low, &high, &pres).map_err(|e| e.to_string())?;
            ensure(ok, || format!("{name}: {low} in {high} fails"))?;
            count += 1;
        }
    }
    ensure(count >= 10, || format!("only {count} nested pairs"))?;
    Ok(format!("{count} nested section pairs"))
}

fn escape_walk() -> Outcome {
    let ctx = context("ladder_suite.json");
    let g = &ctx.graph;
    let x0 = g.resolve("x0").map_err(|e| e.to_string())?;
    let s = sections::section_by_name(g, ExtRank::Fin(1), "P0").map_err(|e| e.to_string())?;
    let walk = sections::escape_walk(g, &s, &x0, 10).map_err(|e| e.to_string())?;
    ensure(walk.len() == 10, || format!("{} wnodes", walk.len()))?;
    for (k, (x, _)) in walk.iter().enumerate() {
        let d = metric::wdistance(g, &x0, x).map_err(|e| e.to_string())?;
        let bound = Ordinal::monomial(ordinal::Exponent::Fin(1), k as u64 + 1);
        ensure(d >= bound, || format!("d(x0, {x}) = {d} < {bound}"))?;
    }
    let nodes: Vec<WNodeRef> = walk.iter().map(|(x, _)| x.clone()).collect();
    let derived = hyper::from_sequence(&nodes).ok_or("no arm-indexed fit")?;
    let mut named = ctx.presentations.clone();
    named.insert("derived".to_string(), derived.clone());
    let part = galaxy::classify_set(&ctx, named, ExtRank::Fin(1)).map_err(|e| e.to_string())?;
    ensure(part.class_of("derived") != part.principal(), || format!("{derived} is principal"))?;
    Ok(format!("10 wnodes, derived {derived} non-principal"))
}

fn witness_chain() -> Outcome {
    let ctx = context("ladder_suite.json");
    let v = ctx.lookup("xn").map_err(|e| e.to_string())?;
    let rho = ExtRank::Fin(1);
    let rep = galaxy::witness_chain(&ctx, &v, 5, rho).map_err(|e| e.to_string())?;
    ensure(rep.verified && rep.members.len() == 11 && rep.ordered_pairs == 55, || format!("{rep:?}"))?;

    let mut named = BTreeMap::new();
    named.insert("ref".to_string(), ctx.lookup(&rep.reference).map_err(|e| e.to_string())?);
    for (i, m) in rep.members.iter().enumerate() {
        named.insert(format!("m{i:02}"), ctx.lookup(m).map_err(|e| e.to_string())?);
    }
    let part = galaxy::classify_set(&ctx, named.clone(), rho).map_err(|e| e.to_string())?;
    ensure(part.classes.len() == 12, || format!("{} classes", part.classes.len()))?;
    let order = galaxy::order_partition(&ctx, &part).map_err(|e| e.to_string())?;
    let pos = |c: usize| part.classes[c].members[0].strip_prefix('m').and_then(|s| s.parse::<usize>().ok());
    let mut consistent = 0;
    for &(i, j) in &order.edges {
        if let (Some(a), Some(b)) = (pos(i), pos(j)) {
            ensure(a < b, || format!("m{a:02} placed after m{b:02}"))?;
            consistent += 1;
        }
    }
    ensure(consistent == 55 && order.audits_pass() && order.total, || format!("{consistent} chain edges"))?;

    // Sampled distances from the reference grow along the chain, with growing gaps.
    let x = &named["ref"];
    let at = |p: &Hp, n: u64| -> Result<Ordinal, String> {
        let (a, b) = (x.node_at(n).map_err(|e| e.to_string())?, p.node_at(n).map_err(|e| e.to_string())?);
        metric::wdistance(&ctx.graph, &a, &b).map_err(|e| e.to_string())
    };
    let coeff = |o: &Ordinal| o.coefficient(ordinal::Exponent::Fin(1)) as i64;
    for i in 0..10 {
        let (p, q) = (&named[&format!("m{i:02}")], &named[&format!("m{:02}", i + 1)]);
        let gap = |n| -> Result<i64, String> { Ok(coeff(&at(q, n)?) - coeff(&at(p, n)?)) };
        let (g1, g2) = (gap(64)?, gap(128)?);
        ensure(g1 > 0 && g2 > g1, || format!("m{i:02}/m{:02}: gaps {g1}, {g2}", i + 1))?;
    }
    Ok(format!("11 classes, {consistent} consistent ordered pairs"))
}

fn galaxy_order() -> Outcome {
    let ctx = context("twoarm_suite.json");
    let part = galaxy::classify(&ctx, ExtRank::Fin(1)).map_err(|e| e.to_string())?;
    ensure(part.classes.len() == 6, || format!("{} classes", part.classes.len()))?;
    let order = galaxy::order_partition(&ctx, &part).map_err(|e| e.to_string())?;
    ensure(order.audits_pass(), || "audit failed".to_string())?;
    ensure(!order.incomparable.is_empty() && !order.total, || "no incomparable pair".to_string())?;

    // Slope of d(hub, p_n) in ω, sampled; decides closeness independently.
    let h = ctx.lookup("h").map_err(|e| e.to_string())?;
    let slope = |c: usize| -> Result<i64, String> {
        let p = &part.presentations[&part.classes[c].members[0]];
        let d = |n: u64| -> Result<i64, String> {
            let (a, b) = (h.node_at(n).map_err(|e| e.to_string())?, p.node_at(n).map_err(|e| e.to_string())?);
            let o = metric::wdistance(&ctx.graph, &a, &b).map_err(|e| e.to_string())?;
            Ok(o.coefficient(ordinal::Exponent::Fin(1)) as i64)
        };
        Ok(d(40)? - d(20)?)
    };
    let slopes: Vec<i64> = (0..part.classes.len()).map(slope).collect::<Result<_, _>>()?;
    for &(i, j) in &order.edges {
        ensure(slopes[i] < slopes[j], || format!("false edge {i} < {j}"))?;
    }
    for &(i, j) in &order.incomparable {
        ensure(slopes[i] == slopes[j], || format!("{i} and {j} are comparable"))?;
    }
    let n = part.classes.len();
    ensure(order.edges.len() + order.incomparable.len() == n * (n - 1) / 2, || "pairs unaccounted".to_string())?;
    Ok(format!("6 classes, {} edges, {} incomparable pairs", order.edges.len(), order.incomparable.len()))
}

/// Least period of the per-residue pattern.
fn collapse(pattern: &[bool]) -> Vec<(u64, u64, bool)> {
    let m = pattern.len();
    let d = (1..=m).find(|d| m.is_multiple_of(*d) && (0..m).all(|i| pattern[i] == pattern[i % d])).unwrap_or(m);
    (0..d).map(|r| (d as u64, r as u64, pattern[r])).collect()
}

fn interleaves() -> Outcome {
    let ctx = context_with("ladder.json", &[]);
    let near = ["std(x1)", "std(x2)", "arm(ladder, 0, 3, x)", "patch(std(x1), {0: x5})"];
    let far = ["arm(ladder, 1, 0, x)", "arm(ladder, 2, 1, x)", "arm(ladder, 1, 0, x, 2, 0)"];
    let shapes: [&[usize]; 10] = [
        &[0, 1],
        &[1, 0],
        &[0, 0, 1],
        &[0, 1, 1],
        &[1, 0, 1, 0],
        &[0, 1, 0, 0],
        &[1, 1, 0],
        &[0, 1, 1, 0, 1],
        &[1, 0, 0, 0, 0, 0],
        &[0, 0, 1, 1, 0, 1],
    ];
    let x = ctx.lookup("std(x1)").map_err(|e| e.to_string())?;
    for (c, shape) in shapes.iter().enumerate() {
        let parts: Vec<&str> =
            shape.iter().enumerate().map(|(i, &f)| if f == 1 { far[(c + i) % far.len()] } else { near[(c + i) % near.len()] }).collect();
        let text = format!("interleave({}, {})", parts.len(), parts.join(", "));
        let p = ctx.lookup(&text).map_err(|e| e.to_string())?;
        let want = collapse(&shape.iter().map(|&f| f == 0).collect::<Vec<_>>());
        match hyper::limitedly_distant(&ctx, &p, &x, ExtRank::Fin(1)).map_err(|e| e.to_string())? {
            LimitVerdict::UltrafilterDependent(rs) => {
                let got: Vec<(u64, u64, bool)> = rs.iter().map(|(r, b)| (r.modulus, r.rem, *b)).collect();
                ensure(got == want, || format!("{text}: {got:?}, expected {want:?}"))?;
            }
            v => return Err(format!("{text}: {v:?}")),
        }
    }
    Ok("10 constructions".to_string())
}

fn determinism() -> Outcome {
    let suite = fixture_path("ladder_suite.json").display().to_string();
    let twoarm = fixture_path("twoarm_suite.json").display().to_string();
    let runs: [Vec<&str>; 3] = [
        vec!["classify", "--rank", "1", &twoarm],
        vec!["order", "--rank", "1", &twoarm],
        vec!["witness-chain", "--rank", "1", "--around", "xn", "--depth", "3", &suite],
    ];
    let mut compared = 0;
    for args in &runs {
        for format in ["text", "json"] {
            let run = |jobs: &str| -> Result<Vec<u8>, String> {
                let out = Command::new(env!("CARGO_BIN_EXE_tg"))
                    .env("TG_COLOR", "never")
                    .args(["--format", format, "--jobs", jobs])
                    .args(args)
                    .output()
                    .map_err(|e| e.to_string())?;
                ensure(out.status.success(), || format!("{args:?} exited {:?}", out.status.code()))?;
                Ok(out.stdout)
            };
            let first = run("1")?;
            ensure(first == run("1")? && first == run("4")?, || format!("{args:?} {format} differs"))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} reports identical across runs and --jobs 1/4"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("ordinal laws", ordinal_laws),
        ("metric axioms", metric_axioms),
        ("oracle equivalence", oracle_equivalence),
        ("boundary separation", boundary_separation),
        ("section containment", section_containment),
        ("escape walk", escape_walk),
        ("witness chain", witness_chain),
        ("galaxy order", galaxy_order),
        ("interleave residues", interleaves),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
