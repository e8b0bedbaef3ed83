//! ρ-galaxies of a finite set of hypernode presentations and their order by
//! closeness to the principal galaxy.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::hyper::{
    hyperdistance_mod, joint_modulus, limitedly_distant, EnlargementContext, HyperError, HypernodePresentation as Hp,
    LimitVerdict,
};
use crate::metric::{ArmPattern, IndexMap};
use crate::ordinal::{ExtRank, IntPoly, OrdinalPoly};
use crate::sections::{SectionError, SectionRef, SectionTable};
use crate::unroll::Unrolled;
use crate::wgraph::{WGraphPresentation, WNodeRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GalaxyError {
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error("rank {0} exceeds the rank of the graph")]
    RankAboveGraph(ExtRank),
    #[error("rank {0} must lie strictly below rank {1}")]
    RankOrder(ExtRank, ExtRank),
    #[error("rank ω⃗ is not allowed here")]
    ArrowOmegaRank,
    #[error("no standard presentation to measure closeness from")]
    NoPrincipalReference,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("`{0}` is not an arm-indexed presentation with a growing index")]
    NotArmIndexed(String),
    #[error("sections are not nested: {0}")]
    SectionNotNested(String),
    #[error("verdict depends on the representative: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GalaxyClass {
    pub members: Vec<String>,
    pub principal: bool,
    /// Holds some standard presentation.
    pub standard: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairVerdict {
    pub a: String,
    pub b: String,
    pub verdict: LimitVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct GalaxyPartition {
    pub rank: ExtRank,
    pub classes: Vec<GalaxyClass>,
    pub verdicts: Vec<PairVerdict>,
    /// Pairs whose verdict depends on the ultrafilter; never merged.
    pub ambiguous: Vec<PairVerdict>,
    /// Name of the standard presentation added when none was supplied.
    pub auto_standard: Option<String>,
    #[serde(skip)]
    pub presentations: BTreeMap<String, Hp>,
}

impl GalaxyPartition {
    pub fn principal(&self) -> Option<usize> {
        self.classes.iter().position(|c| c.principal)
    }

    pub fn class_of(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.members.iter().any(|m| m == name))
    }

    /// Least-named standard presentation of the principal class.
    fn references(&self) -> Vec<&Hp> {
        let Some(p) = self.principal() else { return Vec::new() };
        self.classes[p].members.iter().map(|m| &self.presentations[m]).filter(|h| h.is_standard()).collect()
    }
}

fn default_standard(g: &WGraphPresentation) -> Option<Hp> {
    g.core_node_ranks().keys().next().map(|id| Hp::Standard(WNodeRef::Core(id.clone())))
}

fn check_rank(g: &WGraphPresentation, rho: ExtRank) -> Result<(), GalaxyError> {
    if rho > g.rank && rho != ExtRank::ArrowOmega {
        return Err(GalaxyError::RankAboveGraph(rho));
    }
    Ok(())
}

pub fn classify(ctx: &EnlargementContext, rho: ExtRank) -> Result<GalaxyPartition, GalaxyError> {
    classify_set(ctx, ctx.presentations.clone(), rho)
}

/// Classifies an explicit set of named presentations over the context graph.
pub fn classify_set(
    ctx: &EnlargementContext,
    mut pres: BTreeMap<String, Hp>,
    rho: ExtRank,
) -> Result<GalaxyPartition, GalaxyError> {
    check_rank(&ctx.graph, rho)?;
    let mut auto_standard = None;
    if !pres.values().any(Hp::is_standard) {
        let x = default_standard(&ctx.graph).ok_or(GalaxyError::NoPrincipalReference)?;
        auto_standard = Some(x.to_string());
        pres.insert(x.to_string(), x);
    }
    let names: Vec<String> = pres.keys().cloned().collect();
    let pairs: Vec<(usize, usize)> =
        (0..names.len()).flat_map(|i| (i + 1..names.len()).map(move |j| (i, j))).collect();
    let verdicts: Vec<LimitVerdict> = pairs
        .par_iter()
        .map(|&(i, j)| limitedly_distant(ctx, &pres[&names[i]], &pres[&names[j]], rho))
        .collect::<Result<_, _>>()?;

    let mut uf = UnionFind::<usize>::new(names.len());
    for (&(i, j), v) in pairs.iter().zip(&verdicts) {
        if v.is_yes() {
            uf.union(i, j);
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(n.clone());
    }
    let first_standard = names.iter().find(|n| pres[*n].is_standard()).cloned();
    let mut classes: Vec<GalaxyClass> = groups
        .into_values()
        .map(|members| GalaxyClass {
            principal: first_standard.as_ref().is_some_and(|s| members.contains(s)),
            standard: members.iter().any(|m| pres[m].is_standard()),
            members,
        })
        .collect();
    classes.sort_by(|a, b| b.principal.cmp(&a.principal).then_with(|| a.members.cmp(&b.members)));

    let mut all = Vec::new();
    let mut ambiguous = Vec::new();
    for (&(i, j), v) in pairs.iter().zip(verdicts) {
        let pv = PairVerdict { a: names[i].clone(), b: names[j].clone(), verdict: v };
        if matches!(pv.verdict, LimitVerdict::UltrafilterDependent(_)) {
            ambiguous.push(pv.clone());
        }
        all.push(pv);
    }
    Ok(GalaxyPartition { rank: rho, classes, verdicts: all, ambiguous, auto_standard, presentations: pres })
}

/// Every α-class lies inside one ρ-class.
pub fn refinement_check(ctx: &EnlargementContext, alpha: ExtRank, rho: ExtRank) -> Result<bool, GalaxyError> {
    if alpha >= rho {
        return Err(GalaxyError::RankOrder(alpha, rho));
    }
    let fine = classify(ctx, alpha)?;
    let coarse = classify(ctx, rho)?;
    Ok(fine.classes.iter().all(|c| {
        let homes: BTreeSet<Option<usize>> = c.members.iter().map(|m| coarse.class_of(m)).collect();
        homes.len() == 1
    }))
}

/// Whether `z` stays farther than `y` from `x` by more than every ω^ρ·m.
fn eventually_farther(fz: &OrdinalPoly, fy: &OrdinalPoly, rho: ExtRank) -> bool {
    let e_rho = rho.exponent().expect("finite or ω rank");
    let diff = fz.difference(fy);
    for (e, d) in diff.iter().rev() {
        if *e <= e_rho {
            break;
        }
        match d.eventual_sign() {
            Ordering::Greater => return true,
            Ordering::Less => return false,
            Ordering::Equal => {}
        }
    }
    diff.get(&e_rho).is_some_and(|d| !d.is_constant() && d.leading() > 0)
}

/// Yes when the galaxy of `y` is closer to that of `x` than the galaxy of `z`.
pub fn closer_reps(ctx: &EnlargementContext, x: &Hp, y: &Hp, z: &Hp, rho: ExtRank) -> Result<LimitVerdict, GalaxyError> {
    if rho == ExtRank::ArrowOmega {
        return Err(GalaxyError::ArrowOmegaRank);
    }
    let m = joint_modulus(&[x, y, z]);
    let fy = hyperdistance_mod(ctx, x, y, m)?;
    let fz = hyperdistance_mod(ctx, x, z, m)?;
    let per: Vec<(u64, Option<u64>)> = fy
        .iter()
        .zip(&fz)
        .map(|((c, a), (_, b))| (c.rem, eventually_farther(b, a, rho).then_some(0)))
        .collect();
    Ok(LimitVerdict::merge(m, &per))
}

/// Whether class `a` is closer to the principal galaxy than class `b`,
/// cross-checked with second representatives where a class has them.
pub fn closer_than(ctx: &EnlargementContext, part: &GalaxyPartition, a: usize, b: usize) -> Result<LimitVerdict, GalaxyError> {
    let refs = part.references();
    let x = *refs.first().ok_or(GalaxyError::NoPrincipalReference)?;
    let rep = |i: usize, k: usize| {
        let ms = &part.classes[i].members;
        &part.presentations[&ms[k.min(ms.len() - 1)]]
    };
    let v = closer_reps(ctx, x, rep(a, 0), rep(b, 0), part.rank)?;
    let x2 = refs.get(1).copied().unwrap_or(x);
    if part.classes[a].members.len() > 1 || part.classes[b].members.len() > 1 || refs.len() > 1 {
        let w = closer_reps(ctx, x2, rep(a, 1), rep(b, 1), part.rank)?;
        if w.is_yes() != v.is_yes() {
            return Err(GalaxyError::Inconsistent(format!("classes {a} and {b}: {v} against {w}")));
        }
    }
    Ok(v)
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    pub rank: ExtRank,
    pub classes: Vec<Vec<String>>,
    /// `(i, j)`: class `i` is closer to the principal galaxy than class `j`.
    pub edges: Vec<(usize, usize)>,
    pub incomparable: Vec<(usize, usize)>,
    pub ambiguous: Vec<(usize, usize, LimitVerdict)>,
    pub principal_least: bool,
    pub antisymmetric: bool,
    pub transitive: bool,
    pub total: bool,
}

impl OrderReport {
    pub fn audits_pass(&self) -> bool {
        self.principal_least && self.antisymmetric && self.transitive
    }
}

pub fn order_partition(ctx: &EnlargementContext, part: &GalaxyPartition) -> Result<OrderReport, GalaxyError> {
    if part.rank == ExtRank::ArrowOmega {
        return Err(GalaxyError::ArrowOmegaRank);
    }
    let n = part.classes.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let verdicts: Vec<LimitVerdict> =
        pairs.par_iter().map(|&(i, j)| closer_than(ctx, part, i, j)).collect::<Result<_, _>>()?;
    let mut yes = vec![vec![false; n]; n];
    let mut ambiguous = Vec::new();
    for (&(i, j), v) in pairs.iter().zip(&verdicts) {
        yes[i][j] = v.is_yes();
        if matches!(v, LimitVerdict::UltrafilterDependent(_)) {
            ambiguous.push((i, j, v.clone()));
        }
    }
    let edges: Vec<(usize, usize)> = pairs.iter().copied().filter(|&(i, j)| yes[i][j]).collect();
    let incomparable: Vec<(usize, usize)> = pairs
        .iter()
        .copied()
        .filter(|&(i, j)| i < j && !yes[i][j] && !yes[j][i])
        .filter(|&(i, j)| !ambiguous.iter().any(|(a, b, _)| (*a, *b) == (i, j) || (*a, *b) == (j, i)))
        .collect();
    let antisymmetric = (0..n).all(|i| (0..n).all(|j| !(yes[i][j] && yes[j][i])));
    let transitive =
        (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| !(yes[i][j] && yes[j][k]) || yes[i][k])));
    let principal_least = part.principal().is_some_and(|p| (0..n).all(|j| j == p || yes[p][j]));
    let total = incomparable.is_empty() && ambiguous.is_empty();
    Ok(OrderReport {
        rank: part.rank,
        classes: part.classes.iter().map(|c| c.members.clone()).collect(),
        edges,
        incomparable,
        ambiguous,
        principal_least,
        antisymmetric,
        transitive,
        total,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub rank: ExtRank,
    pub reference: String,
    /// Closest first: `u^(K) … u^(1), v, w^(1) … w^(K)`.
    pub members: Vec<String>,
    /// Per closer-side step: `d(x,f) ≤ 3·d(x,u) ≤ 2·d(x,f)` at the top exponent.
    pub sandwich: Vec<bool>,
    /// Per farther-side step: `d(x,w_n) ≥ d(x,p_n) ⊕ ω^ρ·n`.
    pub growth: Vec<bool>,
    pub ordered_pairs: usize,
    pub verified: bool,
}

fn top_coefficients(f: &OrdinalPoly, g: &OrdinalPoly) -> (IntPoly, IntPoly) {
    let e = f.terms().keys().chain(g.terms().keys()).max().copied();
    match e {
        Some(e) => (f.coefficient(e), g.coefficient(e)),
        None => (IntPoly::constant(0), IntPoly::constant(0)),
    }
}

fn reference_of(ctx: &EnlargementContext) -> Result<Hp, GalaxyError> {
    ctx.presentations
        .values()
        .find(|p| p.is_standard())
        .cloned()
        .or_else(|| default_standard(&ctx.graph))
        .ok_or(GalaxyError::NoPrincipalReference)
}

/// A chain of `2K+1` galaxies around `v`, ordered by closeness, built by
/// contracting and dilating `v`'s index map and then verified.
pub fn witness_chain(ctx: &EnlargementContext, v: &Hp, k: u64, rho: ExtRank) -> Result<ChainReport, GalaxyError> {
    if rho == ExtRank::ArrowOmega {
        return Err(GalaxyError::ArrowOmegaRank);
    }
    check_rank(&ctx.graph, rho)?;
    let Hp::ArmIndexed(pat) = v else { return Err(GalaxyError::NotArmIndexed(v.to_string())) };
    if pat.map.a == 0 || pat.map.div > 1 || pat.map.min > 0 {
        return Err(GalaxyError::NotArmIndexed(v.to_string()));
    }
    let x = reference_of(ctx)?;
    if limitedly_distant(ctx, &x, v, rho)?.is_yes() {
        return Err(GalaxyError::HypothesisViolated(format!("{v} lies in the principal {rho}-galaxy")));
    }
    let with = |map: IndexMap| Hp::ArmIndexed(ArmPattern { map, ..pat.clone() });
    let (a, b) = (pat.map.a, pat.map.b);
    let u: Vec<Hp> = (1..=k).map(|j| with(IndexMap { a, b, div: 1 << j, min: 1 })).collect();
    let w: Vec<Hp> = (1..=k).map(|j| with(IndexMap::affine(a * (j + 1) + 1, b * (j + 1)))).collect();
    let mut chain: Vec<Hp> = u.iter().rev().cloned().collect();
    chain.push(v.clone());
    chain.extend(w.iter().cloned());

    let e_rho = rho.exponent().expect("finite or ω rank");
    let mut sandwich = Vec::new();
    for j in 0..u.len() {
        let farther = if j == 0 { v } else { &u[j - 1] };
        let m = joint_modulus(&[&x, &u[j], farther]);
        let fc = hyperdistance_mod(ctx, &x, &u[j], m)?;
        let ff = hyperdistance_mod(ctx, &x, farther, m)?;
        let ok = fc.iter().zip(&ff).all(|((_, c), (_, f))| {
            let (cf, cc) = top_coefficients(f, c);
            let top_ok = f.terms().keys().max().is_some_and(|e| *e >= e_rho);
            top_ok && cc.scale(3).sub(&cf).eventual_sign() != Ordering::Less
                && cf.scale(2).sub(&cc.scale(3)).eventual_sign() != Ordering::Less
        });
        sandwich.push(ok);
    }
    let mut growth = Vec::new();
    for j in 0..w.len() {
        let prev = if j == 0 { v } else { &w[j - 1] };
        let m = joint_modulus(&[&x, &w[j], prev]);
        let fw = hyperdistance_mod(ctx, &x, &w[j], m)?;
        let fp = hyperdistance_mod(ctx, &x, prev, m)?;
        let mut ok = true;
        for ((c, fw), (_, fp)) in fw.iter().zip(&fp) {
            let bump = OrdinalPoly::new(BTreeMap::from([(e_rho, IntPoly::affine(c.modulus as i64, c.rem as i64))]), 0)
                .map_err(|e| GalaxyError::Hyper(HyperError::Metric(e.into())))?;
            ok &= fw.eventual_cmp(&fp.nat_sum(&bump)) != Ordering::Less;
        }
        growth.push(ok);
    }
    let pairs: Vec<(usize, usize)> =
        (0..chain.len()).flat_map(|i| (i + 1..chain.len()).map(move |j| (i, j))).collect();
    let ordered: Vec<bool> = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<bool, GalaxyError> {
            Ok(closer_reps(ctx, &x, &chain[i], &chain[j], rho)?.is_yes()
                && !closer_reps(ctx, &x, &chain[j], &chain[i], rho)?.is_yes())
        })
        .collect::<Result<_, _>>()?;
    let mut nonprincipal = true;
    for c in &chain {
        nonprincipal &= !limitedly_distant(ctx, &x, c, rho)?.is_yes();
    }
    let ordered_pairs = ordered.iter().filter(|b| **b).count();
    let verified = nonprincipal
        && ordered_pairs == pairs.len()
        && sandwich.iter().all(|b| *b)
        && growth.iter().all(|b| *b);
    Ok(ChainReport {
        rank: rho,
        reference: x.to_string(),
        members: chain.iter().map(|c| c.to_string()).collect(),
        sandwich,
        growth,
        ordered_pairs,
        verified,
    })
}

/// Whether the wnode lies in section `s`: it, or something it embraces,
/// meets an element of `s`.
pub fn carried_by(g: &WGraphPresentation, x: &WNodeRef, s: &SectionRef) -> Result<bool, GalaxyError> {
    let x = g.canonical_ray_start(x.clone());
    g.rank_of(&x).map_err(HyperError::from)?;
    let depth = x.copy_index().map_or(0, |k| k + 1) + 2;
    let u = Unrolled::build(g, depth, g.ray_unit.max(1).max(x.ray_position().unwrap_or(0)));
    let Some(xi) = u.node_index(&x) else { return Ok(false) };
    let sub: BTreeSet<usize> = u.subtree(xi).into_iter().collect();
    let hit = u.branches.iter().any(|b| (sub.contains(&b.a) || sub.contains(&b.b)) && s.contains(&b.elem))
        || u.rays.iter().any(|r| r.nodes.iter().any(|n| sub.contains(n)) && s.contains(&r.elem))
        || sub.iter().any(|&m| u.collected_rays(m).iter().any(|&r| s.contains(&u.rays[r].elem)));
    Ok(hit)
}

/// Every presentation carried by `s_alpha` lies in the principal galaxy of
/// rank `s_rho.rank`.
pub fn section_containment(
    ctx: &EnlargementContext,
    s_alpha: &SectionRef,
    s_rho: &SectionRef,
    pres: &[Hp],
) -> Result<bool, GalaxyError> {
    if s_alpha.rank >= s_rho.rank || !s_alpha.within(s_rho) {
        return Err(GalaxyError::SectionNotNested(format!("{s_alpha} in {s_rho}")));
    }
    let g = &ctx.graph;
    for p in pres {
        let m = joint_modulus(&[p]);
        let late = p.patch_end() + 8 * m;
        for n in (0..4).chain(late..late + 2 * m) {
            let x = p.node_at(n)?;
            if !carried_by(g, &x, s_alpha)? {
                return Err(GalaxyError::SectionNotNested(format!("{p} leaves {s_alpha} at n = {n} ({x})")));
            }
        }
    }
    let reference = match pres.iter().find(|p| p.is_standard()) {
        Some(p) => p.clone(),
        None => match pres.first() {
            Some(p) => Hp::Standard(p.node_at(0)?),
            None => return Ok(true),
        },
    };
    for p in pres {
        if !limitedly_distant(ctx, &reference, p, s_rho.rank)?.is_yes() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Ranks from 0 to ν, with ω⃗ and ω when ν = ω.
pub fn rank_ladder(g: &WGraphPresentation) -> Vec<ExtRank> {
    match g.rank {
        ExtRank::Fin(n) => (0..=n).map(ExtRank::Fin).collect(),
        _ => {
            let top = g
                .core_node_ranks()
                .values()
                .chain(g.arms.iter().flat_map(|a| a.cell.nodes.iter().map(|n| &n.rank)))
                .filter_map(|r| match r {
                    ExtRank::Fin(k) => Some(*k),
                    _ => None,
                })
                .max()
                .unwrap_or(0);
            let mut out: Vec<ExtRank> = (0..=top).map(ExtRank::Fin).collect();
            out.extend([ExtRank::ArrowOmega, ExtRank::Omega]);
            out
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Propagation {
    pub holds: bool,
    /// The context has several galaxies at the starting rank.
    pub vacuous: bool,
    pub checked: Vec<ExtRank>,
}

/// One galaxy at ρ forces one galaxy at every higher rank up to ν.
pub fn single_galaxy_propagation(ctx: &EnlargementContext, rho: ExtRank) -> Result<Propagation, GalaxyError> {
    if classify(ctx, rho)?.classes.len() != 1 {
        return Ok(Propagation { holds: true, vacuous: true, checked: Vec::new() });
    }
    let mut checked = Vec::new();
    for sigma in rank_ladder(&ctx.graph).into_iter().filter(|s| *s > rho) {
        checked.push(sigma);
        if classify(ctx, sigma)?.classes.len() != 1 {
            return Ok(Propagation { holds: false, vacuous: false, checked });
        }
    }
    Ok(Propagation { holds: true, vacuous: false, checked })
}

/// The two end hypernodes of every hyperbranch share a ρ-galaxy.
pub fn hyperbranch_check(ctx: &EnlargementContext, rho: ExtRank) -> Result<bool, GalaxyError> {
    let g = &ctx.graph;
    let mut pairs: Vec<(Hp, Hp)> = Vec::new();
    for b in &g.core.branches {
        if let [p, q] = b.as_slice() {
            pairs.push((Hp::Standard(WNodeRef::Core(p.clone())), Hp::Standard(WNodeRef::Core(q.clone()))));
        }
    }
    for arm in &g.arms {
        for b in &arm.cell.branches {
            if let [p, q] = b.as_slice() {
                let at = |local: &str| {
                    Hp::ArmIndexed(ArmPattern { arm: arm.id.clone(), map: IndexMap::affine(1, 0), local: local.to_string() })
                };
                pairs.push((at(p), at(q)));
            }
        }
    }
    for (p, q) in pairs {
        if !limitedly_distant(ctx, &p, &q, rho)?.is_yes() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Nested section pairs `(S^α, S^ρ)` of a presentation, each with
/// presentations carried by `S^α`: standard ones at a few wnodes and, for
/// lanes, arm-indexed ones running along the lane.
pub fn nested_section_cases(g: &WGraphPresentation) -> Result<Vec<(SectionRef, SectionRef, Vec<Hp>)>, GalaxyError> {
    let ranks = rank_ladder(g);
    let tables: Vec<SectionTable> = ranks.iter().map(|r| SectionTable::build(g, *r)).collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for (i, low) in tables.iter().enumerate() {
        let mut lows: Vec<SectionRef> = low.fixed.clone();
        for f in &low.families {
            let from = f.family.as_ref().map_or(0, |f| f.from);
            lows.extend([from, from + 1].iter().filter_map(|k| f.instance(*k)));
        }
        for s in lows {
            let pres = carried_presentations(g, &s);
            if pres.is_empty() {
                continue;
            }
            for high in &tables[i + 1..] {
                let Some(probe) = s.first_elem() else { continue };
                let Some(h) = high.section_of(&probe) else { continue };
                out.push((s.clone(), h, pres.clone()));
            }
        }
    }
    Ok(out)
}

/// Local wnode ids touched by one element of a block.
fn element_nodes(block: &crate::wgraph::Block, id: &str) -> Vec<String> {
    if let Some(i) = id.strip_prefix('#').and_then(|i| i.parse::<usize>().ok()) {
        return block.branches.get(i).cloned().unwrap_or_default();
    }
    block.ray(id).map(|r| vec![r.start.clone(), format!("{id}@3")]).unwrap_or_default()
}

fn carried_presentations(g: &WGraphPresentation, s: &SectionRef) -> Vec<Hp> {
    let mut out = BTreeSet::new();
    for id in s.core.iter().take(2) {
        for n in element_nodes(&g.core, id) {
            if let Ok(r) = g.resolve(&n) {
                out.insert(Hp::Standard(r));
            }
        }
    }
    for ((arm, k), ids) in &s.copies {
        let Some(a) = g.arm(arm) else { continue };
        for id in ids.iter().take(2) {
            for n in element_nodes(&a.cell, id) {
                if let Ok(r) = format!("{arm}[{k}].{n}").parse::<WNodeRef>() {
                    out.insert(Hp::Standard(g.canonical_ray_start(r)));
                }
            }
        }
    }
    for (arm, ids) in &s.lanes {
        let Some(a) = g.arm(arm) else { continue };
        for id in ids.iter().take(2) {
            for n in element_nodes(&a.cell, id) {
                out.insert(Hp::ArmIndexed(ArmPattern { arm: arm.clone(), map: IndexMap::affine(1, 0), local: n.clone() }));
                if let Ok(r) = format!("{arm}[1].{n}").parse::<WNodeRef>() {
                    out.insert(Hp::Standard(g.canonical_ray_start(r)));
                }
            }
        }
    }
    out.into_iter().take(6).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(name: &str, pres: &[(&str, &str)]) -> EnlargementContext {
        let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
        let mut c =
            EnlargementContext::new(WGraphPresentation::from_json(&std::fs::read_to_string(path).unwrap()).unwrap());
        for (n, p) in pres {
            c.add(n, p).unwrap();
        }
        c
    }

    const LADDER_SET: [(&str, &str); 4] =
        [("a", "std(x1)"), ("b", "std(x9)"), ("c", "arm(ladder, 1, 0, x)"), ("d", "arm(ladder, 2, 0, x)")];

    #[test]
    fn ladder_classes() {
        let c = ctx("ladder", &LADDER_SET);
        let part = classify(&c, ExtRank::Fin(1)).unwrap();
        let members: Vec<Vec<String>> = part.classes.iter().map(|c| c.members.clone()).collect();
        assert_eq!(members, [vec!["a", "b"], vec!["c"], vec!["d"]]);
        assert!(part.classes[0].principal);
        assert_eq!(classify(&c, ExtRank::ArrowOmega).unwrap().classes.len(), 1);
        let single = ctx("ladder", &[("only", "std(x3)")]);
        let p = classify(&single, ExtRank::Fin(1)).unwrap();
        assert_eq!(p.classes.len(), 1);
        assert!(p.classes[0].principal);
    }

    #[test]
    fn ladder_order_is_a_chain() {
        let c = ctx("ladder", &LADDER_SET);
        let part = classify(&c, ExtRank::Fin(1)).unwrap();
        assert!(closer_than(&c, &part, 1, 2).unwrap().is_yes());
        assert!(!closer_than(&c, &part, 2, 1).unwrap().is_yes());
        assert!(!closer_than(&c, &part, 1, 1).unwrap().is_yes());
        let rep = order_partition(&c, &part).unwrap();
        assert_eq!(rep.edges, [(0, 1), (0, 2), (1, 2)]);
        assert!(rep.total && rep.audits_pass());
    }

    #[test]
    fn two_arms_are_incomparable() {
        let c = ctx(
            "twoarm",
            &[("h", "std(hub)"), ("l1", "arm(left, 1, 0, x)"), ("r1", "arm(right, 1, 0, x)"), ("r2", "arm(right, 2, 0, x)")],
        );
        let part = classify(&c, ExtRank::Fin(1)).unwrap();
        assert_eq!(part.classes.len(), 4);
        let rep = order_partition(&c, &part).unwrap();
        assert!(rep.audits_pass());
        assert_eq!(rep.incomparable.len(), 1);
    }

    #[test]
    fn refinement_and_propagation() {
        let c = ctx("ladder", &LADDER_SET);
        assert!(refinement_check(&c, ExtRank::Fin(0), ExtRank::Fin(1)).unwrap());
        assert!(matches!(refinement_check(&c, ExtRank::Fin(1), ExtRank::Fin(0)), Err(GalaxyError::RankOrder(..))));
        let p = single_galaxy_propagation(&c, ExtRank::Fin(0)).unwrap();
        assert!(p.holds && p.vacuous);
        let s = ctx("omega_apex", &[("a", "std(c0)"), ("b", "std(e0)")]);
        let p = single_galaxy_propagation(&s, ExtRank::Fin(0)).unwrap();
        assert!(p.holds && !p.vacuous);
        assert!(hyperbranch_check(&s, ExtRank::Fin(0)).unwrap());
    }

    #[test]
    fn ladder_witness_chain() {
        let c = ctx("ladder", &LADDER_SET);
        let v = c.presentations["c"].clone();
        let rep = witness_chain(&c, &v, 2, ExtRank::Fin(1)).unwrap();
        assert_eq!(rep.members.len(), 5);
        assert_eq!(rep.ordered_pairs, 10);
        assert!(rep.verified, "{rep:?}");
        assert_eq!(witness_chain(&c, &v, 0, ExtRank::Fin(1)).unwrap().members, [v.to_string()]);
        let x1 = c.presentations["a"].clone();
        assert!(matches!(witness_chain(&c, &x1, 2, ExtRank::Fin(1)), Err(GalaxyError::NotArmIndexed(_))));
        let near = Hp::parse("arm(ladder, 0, 1, x)", &c.graph).unwrap();
        assert!(matches!(witness_chain(&c, &near, 2, ExtRank::Fin(1)), Err(GalaxyError::NotArmIndexed(_))));
    }

    #[test]
    fn containment_on_ladder() {
        let c = ctx("ladder", &[]);
        let p2 = crate::sections::section_by_name(&c.graph, ExtRank::Fin(0), "ladder[1].P").unwrap();
        let whole = crate::sections::section_by_name(&c.graph, ExtRank::Fin(1), "P0").unwrap();
        let inside: Vec<Hp> = ["std(ladder[1].P@3)", "std(ladder[1].P@7)", "std(ladder[1].s)"]
            .iter()
            .map(|s| Hp::parse(s, &c.graph).unwrap())
            .collect();
        assert!(section_containment(&c, &p2, &whole, &inside).unwrap());
        assert!(section_containment(&c, &p2, &whole, &inside[..1]).unwrap());
        let across = vec![Hp::parse("arm(ladder, 1, 0, P@2)", &c.graph).unwrap()];
        assert!(matches!(section_containment(&c, &p2, &whole, &across), Err(GalaxyError::SectionNotNested(_))));
    }

    #[test]
    fn nested_cases_hold() {
        for name in ["ladder", "star", "twoarm", "ladder_apex2", "omega_apex", "cycle_rays"] {
            let c = ctx(name, &[]);
            let cases = nested_section_cases(&c.graph).unwrap();
            assert!(!cases.is_empty(), "{name}");
            for (a, r, pres) in cases {
                assert!(section_containment(&c, &a, &r, &pres).unwrap(), "{name}: {a} in {r}");
            }
        }
    }
}
