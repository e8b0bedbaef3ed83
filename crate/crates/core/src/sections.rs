//! ρ-wsections, incidence and boundary wnodes.
//!
//! Sections are read off a depth-4 unrolling. An arm element whose copy-2
//! instance connects to copy 1 or 3 lies on a lane, one section threading
//! every copy. Otherwise its section is repeated once per copy (a family).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::metric::{DistanceEngine, MetricError, Step, TipRank, WalkSpec};
use crate::ordinal::{nat_mul, omega_pow, ExtRank, Ordinal, OrdinalError};
use crate::unroll::Unrolled;
use crate::wgraph::{ElemRef, Owner, WGraphError, WGraphPresentation, WNodeRef};

const MAX_ESCAPE_DEPTH: u64 = 1 << 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SectionError {
    #[error(transparent)]
    Graph(#[from] WGraphError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
    #[error("rank {0} exceeds the rank of the graph")]
    RankAboveGraph(ExtRank),
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("rank ω⃗ is not allowed here")]
    ArrowOmegaRank,
    #[error("`{0}` is not incident to section {1}")]
    NotIncident(String, String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("no section contains `{0}`")]
    UnknownSection(String),
}

/// Sections repeated once per arm copy, from copy `from` on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Family {
    pub arm: String,
    pub from: u64,
    pub elems: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectionRef {
    pub rank: ExtRank,
    pub id: String,
    /// Core branches and rays.
    pub core: BTreeSet<String>,
    /// Elements present in every copy of an arm.
    pub lanes: BTreeMap<String, BTreeSet<String>>,
    /// Elements of particular copies.
    #[serde(serialize_with = "ser_copies")]
    pub copies: BTreeMap<(String, u64), BTreeSet<String>>,
    /// Set for a symbolic family, which stands for one section per copy.
    pub family: Option<Family>,
}

fn ser_copies<S: serde::Serializer>(
    m: &BTreeMap<(String, u64), BTreeSet<String>>,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_map(m.iter().map(|((arm, k), v)| (format!("{arm}[{k}]"), v)))
}

impl SectionRef {
    fn fixed(
        rank: ExtRank,
        core: BTreeSet<String>,
        lanes: BTreeMap<String, BTreeSet<String>>,
        copies: BTreeMap<(String, u64), BTreeSet<String>>,
    ) -> Self {
        let id = core
            .iter()
            .cloned()
            .chain(lanes.iter().flat_map(|(a, ids)| ids.iter().map(move |i| format!("{a}[*].{i}"))))
            .chain(copies.iter().flat_map(|((a, k), ids)| ids.iter().map(move |i| format!("{a}[{k}].{i}"))))
            .min()
            .unwrap_or_default();
        SectionRef { rank, id, core, lanes, copies, family: None }
    }

    fn symbolic(rank: ExtRank, f: Family) -> Self {
        let first = f.elems.iter().next().cloned().unwrap_or_default();
        let id = format!("{}[n].{first} (n >= {})", f.arm, f.from);
        SectionRef { rank, id, core: BTreeSet::new(), lanes: BTreeMap::new(), copies: BTreeMap::new(), family: Some(f) }
    }

    pub fn is_family(&self) -> bool {
        self.family.is_some()
    }

    /// The member of a family lying in copy `k`.
    pub fn instance(&self, k: u64) -> Option<SectionRef> {
        let f = self.family.as_ref()?;
        if k < f.from {
            return None;
        }
        let copies = BTreeMap::from([((f.arm.clone(), k), f.elems.clone())]);
        Some(SectionRef::fixed(self.rank, BTreeSet::new(), BTreeMap::new(), copies))
    }

    /// Whether the element belongs to this section (to some member, for a
    /// family).
    pub fn contains(&self, e: &ElemRef) -> bool {
        match &e.owner {
            Owner::Core => self.core.contains(&e.id),
            Owner::Arm { arm, copy } => {
                self.lanes.get(arm).is_some_and(|s| s.contains(&e.id))
                    || self.copies.get(&(arm.clone(), *copy)).is_some_and(|s| s.contains(&e.id))
                    || self
                        .family
                        .as_ref()
                        .is_some_and(|f| f.arm == *arm && *copy >= f.from && f.elems.contains(&e.id))
            }
        }
    }

    /// Least element of a fixed section; `None` for a family.
    pub fn first_elem(&self) -> Option<ElemRef> {
        if let Some(id) = self.core.iter().next() {
            return Some(ElemRef { owner: Owner::Core, id: id.clone() });
        }
        if let Some((arm, ids)) = self.lanes.iter().next() {
            return ids.iter().next().map(|id| ElemRef { owner: Owner::Arm { arm: arm.clone(), copy: 0 }, id: id.clone() });
        }
        self.copies
            .iter()
            .next()
            .and_then(|((arm, k), ids)| ids.iter().next().map(|id| ElemRef { owner: Owner::Arm { arm: arm.clone(), copy: *k }, id: id.clone() }))
    }

    /// Whether every element of `self` lies in `other`.
    pub fn within(&self, other: &SectionRef) -> bool {
        self.sample_elems().iter().all(|e| other.contains(e))
    }

    /// A few concrete elements, enough to decide containment between
    /// sections of a presentation.
    fn sample_elems(&self) -> Vec<ElemRef> {
        let mut out: Vec<ElemRef> = self.core.iter().map(|id| ElemRef { owner: Owner::Core, id: id.clone() }).collect();
        for (arm, ids) in &self.lanes {
            for k in 0..3 {
                out.extend(ids.iter().map(|id| ElemRef { owner: Owner::Arm { arm: arm.clone(), copy: k }, id: id.clone() }));
            }
        }
        for ((arm, k), ids) in &self.copies {
            out.extend(ids.iter().map(|id| ElemRef { owner: Owner::Arm { arm: arm.clone(), copy: *k }, id: id.clone() }));
        }
        if let Some(f) = &self.family {
            out.extend(f.elems.iter().map(|id| ElemRef { owner: Owner::Arm { arm: f.arm.clone(), copy: f.from + 2 }, id: id.clone() }));
        }
        out
    }
}

impl fmt::Display for SectionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

/// All sections of one rank.
#[derive(Debug, Clone)]
pub struct SectionTable {
    pub rank: ExtRank,
    pub fixed: Vec<SectionRef>,
    pub families: Vec<SectionRef>,
}

impl SectionTable {
    pub fn build(g: &WGraphPresentation, rho: ExtRank) -> Result<Self, SectionError> {
        if rho > g.rank {
            return Err(SectionError::RankAboveGraph(rho));
        }
        let u = Unrolled::build(g, 4, g.ray_unit.max(1));
        let uf = u.components(rho, true);
        let mut touches: HashMap<usize, BTreeSet<Owner>> = HashMap::new();
        for node in &u.nodes {
            let c = u.node_index(&node.r).expect("materialized");
            touches.entry(uf.find(c)).or_default().insert(node.r.owner());
        }
        let mut elems: Vec<(ElemRef, usize)> = u.branches.iter().map(|b| (b.elem.clone(), uf.find(b.a))).collect();
        elems.extend(u.rays.iter().map(|r| (r.elem.clone(), uf.find(r.nodes[0]))));
        let comp_of: HashMap<ElemRef, usize> = elems.iter().cloned().collect();
        let at = |arm: &str, k: u64, id: &str| ElemRef { owner: Owner::Arm { arm: arm.to_string(), copy: k }, id: id.to_string() };

        let mut lane: BTreeSet<(String, String)> = BTreeSet::new();
        let mut fam_groups: BTreeMap<(String, usize), BTreeSet<String>> = BTreeMap::new();
        for arm in &g.arms {
            for id in arm.cell.element_ids() {
                let c = comp_of[&at(&arm.id, 2, &id)];
                let t = &touches[&c];
                let near = |k| t.contains(&Owner::Arm { arm: arm.id.clone(), copy: k });
                if near(1) || near(3) {
                    lane.insert((arm.id.clone(), id));
                } else {
                    fam_groups.entry((arm.id.clone(), c)).or_default().insert(id);
                }
            }
        }

        let mut families = Vec::new();
        let mut absorbed: BTreeSet<(String, String)> = BTreeSet::new();
        for ((arm, _), ids) in fam_groups {
            let c0: BTreeSet<usize> = ids.iter().map(|id| comp_of[&at(&arm, 0, id)]).collect();
            let same = c0.len() == 1 && {
                let c = *c0.iter().next().expect("nonempty");
                let members: BTreeSet<&ElemRef> = elems.iter().filter(|(_, k)| *k == c).map(|(e, _)| e).collect();
                members.len() == ids.len() && ids.iter().all(|id| members.contains(&at(&arm, 0, id)))
            };
            if same {
                absorbed.extend(ids.iter().map(|id| (arm.clone(), id.clone())));
            }
            families.push(SectionRef::symbolic(rho, Family { arm, from: if same { 0 } else { 1 }, elems: ids }));
        }

        type Parts = (BTreeSet<String>, BTreeMap<String, BTreeSet<String>>, BTreeMap<(String, u64), BTreeSet<String>>);
        let mut by_comp: BTreeMap<usize, Parts> = BTreeMap::new();
        for (e, c) in &elems {
            match &e.owner {
                Owner::Core => {
                    by_comp.entry(*c).or_default().0.insert(e.id.clone());
                }
                Owner::Arm { arm, copy: 0 } => {
                    let key = (arm.clone(), e.id.clone());
                    let parts = by_comp.entry(*c).or_default();
                    if lane.contains(&key) {
                        parts.1.entry(arm.clone()).or_default().insert(e.id.clone());
                    } else if !absorbed.contains(&key) {
                        parts.2.entry((arm.clone(), 0)).or_default().insert(e.id.clone());
                    }
                }
                _ => {}
            }
        }
        let mut fixed: Vec<SectionRef> = by_comp
            .into_values()
            .filter(|(c, l, k)| !(c.is_empty() && l.is_empty() && k.is_empty()))
            .map(|(c, l, k)| SectionRef::fixed(rho, c, l, k))
            .collect();
        fixed.sort_by(|a, b| a.id.cmp(&b.id));
        families.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(SectionTable { rank: rho, fixed, families })
    }

    pub fn all(&self) -> Vec<SectionRef> {
        self.fixed.iter().chain(&self.families).cloned().collect()
    }

    /// The concrete section holding an element.
    pub fn section_of(&self, e: &ElemRef) -> Option<SectionRef> {
        if let Some(s) = self.fixed.iter().find(|s| s.contains(e)) {
            return Some(s.clone());
        }
        let copy = e.owner.copy()?;
        self.families.iter().find(|s| s.contains(e)).and_then(|s| s.instance(copy))
    }

    /// Sections holding lane elements of `arm`.
    fn lane_probes(&self, arm: &str) -> Vec<ElemRef> {
        self.fixed
            .iter()
            .filter_map(|s| s.lanes.get(arm))
            .flat_map(|ids| ids.iter().map(|id| ElemRef { owner: Owner::Arm { arm: arm.to_string(), copy: 0 }, id: id.clone() }))
            .collect()
    }
}

pub fn wsections(g: &WGraphPresentation, rho: ExtRank) -> Result<Vec<SectionRef>, SectionError> {
    Ok(SectionTable::build(g, rho)?.all())
}

/// Parses `id` or `arm[k].id` naming a branch (`#i`) or ray.
pub fn parse_elem(text: &str) -> Result<ElemRef, SectionError> {
    let bad = || SectionError::UnknownSection(text.to_string());
    let text = text.trim();
    match text.find('[') {
        Some(open) => {
            let close = text[open..].find("].").map(|i| open + i).ok_or_else(bad)?;
            let copy = text[open + 1..close].parse::<u64>().map_err(|_| bad())?;
            Ok(ElemRef { owner: Owner::Arm { arm: text[..open].to_string(), copy }, id: text[close + 2..].to_string() })
        }
        None => Ok(ElemRef { owner: Owner::Core, id: text.to_string() }),
    }
}

/// The section of rank `rho` containing the named element.
pub fn section_by_name(g: &WGraphPresentation, rho: ExtRank, text: &str) -> Result<SectionRef, SectionError> {
    let table = SectionTable::build(g, rho)?;
    let text = text.trim().replace("[*]", "[0]");
    table.section_of(&parse_elem(&text)?).ok_or(SectionError::UnknownSection(text))
}

fn lower_rank(rho: ExtRank) -> Result<ExtRank, SectionError> {
    rho.predecessor().ok_or_else(|| SectionError::RankMismatch(format!("rank {rho} has no incident lower sections")))
}

fn depth_around<'a>(refs: impl IntoIterator<Item = &'a WNodeRef>) -> u64 {
    refs.into_iter().map(|r| r.copy_index().map_or(0, |k| k + 1)).max().unwrap_or(0) + 3
}

/// Elements whose extremities `x` embraces; apex tips are represented by
/// the lanes of their arm at rank `lower`.
fn tip_probes(u: &Unrolled, xi: usize, lower: &SectionTable) -> Vec<ElemRef> {
    let mut out = Vec::new();
    for m in u.subtree(xi) {
        for b in &u.branches {
            if b.a == m || b.b == m {
                out.push(b.elem.clone());
            }
        }
        for r in &u.rays {
            if r.nodes[0] == m {
                out.push(r.elem.clone());
            }
        }
        for &r in u.collected_rays(m) {
            out.push(u.rays[r].elem.clone());
        }
        for t in u.arm_tips.iter().filter(|t| t.apex == m) {
            out.extend(lower.lane_probes(&t.arm));
        }
    }
    out
}

fn node_rank(g: &WGraphPresentation, x: &WNodeRef) -> Result<(WNodeRef, ExtRank), SectionError> {
    let rank = g.rank_of(x)?;
    Ok((g.canonical_ray_start(x.clone()), rank))
}

/// The (ρ−1)-sections incident to a ρ-wnode, sorted by id.
pub fn incident_sections(g: &WGraphPresentation, x: &WNodeRef) -> Result<Vec<SectionRef>, SectionError> {
    let (x, rho) = node_rank(g, x)?;
    let lower = SectionTable::build(g, lower_rank(rho)?)?;
    let u = Unrolled::build(g, depth_around([&x]), g.ray_unit.max(1));
    let xi = u.node_index(&x).ok_or_else(|| WGraphError::UnknownNode(x.to_string()))?;
    let mut out: BTreeMap<String, SectionRef> = BTreeMap::new();
    for e in tip_probes(&u, xi, &lower) {
        if let Some(s) = lower.section_of(&e) {
            out.entry(s.id.clone()).or_insert(s);
        }
    }
    Ok(out.into_values().collect())
}

fn check_pair(g: &WGraphPresentation, x: &WNodeRef, s: &SectionRef) -> Result<ExtRank, SectionError> {
    let rho = g.rank_of(x)?;
    if lower_rank(rho)? != s.rank {
        return Err(SectionError::RankMismatch(format!("`{x}` has rank {rho}, section has rank {}", s.rank)));
    }
    Ok(rho)
}

pub fn incident(g: &WGraphPresentation, x: &WNodeRef, s: &SectionRef) -> Result<bool, SectionError> {
    check_pair(g, x, s)?;
    let x = g.canonical_ray_start(x.clone());
    let lower = SectionTable::build(g, s.rank)?;
    let u = Unrolled::build(g, depth_around([&x]), g.ray_unit.max(1));
    let xi = u.node_index(&x).ok_or_else(|| WGraphError::UnknownNode(x.to_string()))?;
    Ok(tip_probes(&u, xi, &lower).iter().any(|e| s.contains(e)))
}

pub fn wadjacent(g: &WGraphPresentation, x: &WNodeRef, y: &WNodeRef) -> Result<bool, SectionError> {
    let (rx, ry) = (g.rank_of(x)?, g.rank_of(y)?);
    if rx != ry {
        return Err(SectionError::RankMismatch(format!("`{x}` has rank {rx}, `{y}` has rank {ry}")));
    }
    let a: BTreeSet<String> = incident_sections(g, x)?.into_iter().map(|s| s.id).collect();
    if g.canonical_ray_start(x.clone()) == g.canonical_ray_start(y.clone()) {
        return Ok(true);
    }
    Ok(incident_sections(g, y)?.iter().any(|s| a.contains(&s.id)))
}

pub fn is_boundary(g: &WGraphPresentation, x: &WNodeRef) -> Result<bool, SectionError> {
    Ok(incident_sections(g, x)?.len() >= 2)
}

/// Boundary ρ-wnodes of copy 2 of each arm cell lying in `s`.
fn periodic_boundary(g: &WGraphPresentation, s: &SectionRef) -> Result<Vec<(WNodeRef, Vec<SectionRef>)>, SectionError> {
    let rho = s.rank;
    let mut out = Vec::new();
    for arm in &g.arms {
        for node in arm.cell.nodes.iter().filter(|n| n.rank == rho) {
            let x = WNodeRef::Arm { arm: arm.id.clone(), copy: 2, id: node.id.clone() };
            let inc = incident_sections(g, &x)?;
            if inc.len() >= 2 && inc.iter().all(|t| t.within(s)) {
                out.push((x, inc));
            }
        }
    }
    Ok(out)
}

pub fn locally_rho_finite(g: &WGraphPresentation, s: &SectionRef) -> Result<bool, SectionError> {
    if s.rank == ExtRank::ArrowOmega {
        return Err(SectionError::ArrowOmegaRank);
    }
    if s.rank == ExtRank::Fin(0) {
        return Ok(true);
    }
    // a lane section meeting a boundary wnode of one copy meets one in every copy
    Ok(!periodic_boundary(g, s)?.iter().any(|(_, inc)| inc.iter().any(|t| !t.lanes.is_empty())))
}

pub fn has_infinitely_many_boundary(g: &WGraphPresentation, s: &SectionRef) -> Result<bool, SectionError> {
    if s.rank == ExtRank::Fin(0) {
        return Ok(false);
    }
    Ok(!periodic_boundary(g, s)?.is_empty())
}

/// `k` boundary ρ-wnodes of `s` at distances at least ω^ρ·1, ω^ρ·2, ...
/// from `x0`, each distance computed exactly.
pub fn escape_walk(
    g: &WGraphPresentation,
    s: &SectionRef,
    x0: &WNodeRef,
    k: u64,
) -> Result<Vec<(WNodeRef, Ordinal)>, SectionError> {
    let rho = s.rank;
    if rho == ExtRank::ArrowOmega {
        return Err(SectionError::ArrowOmegaRank);
    }
    if !locally_rho_finite(g, s)? {
        return Err(SectionError::HypothesisViolated(format!("section {s} is not locally {rho}-finite")));
    }
    if !has_infinitely_many_boundary(g, s)? {
        return Err(SectionError::HypothesisViolated(format!("section {s} has finitely many boundary wnodes")));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let x0 = g.canonical_ray_start(x0.clone());
    let unit = omega_pow(rho)?;
    let engine = DistanceEngine::new(g.clone());
    let mut depth = depth_around([&x0]).max(k + 3);
    loop {
        let u = Unrolled::build(g, depth, g.ray_unit.max(1));
        let mut cands: Vec<(Ordinal, String, WNodeRef)> = Vec::new();
        for i in u.canonical_nodes() {
            let r = u.node_ref(i);
            if u.rank(i) != rho || u.nodes[i].stub || u.parent_of(i).is_some() || r.copy_index().is_some_and(|c| c + 1 >= depth) {
                continue;
            }
            let inc = incident_sections(g, r)?;
            if inc.len() < 2 || !inc.iter().all(|t| t.within(s)) {
                continue;
            }
            cands.push((engine.wdistance(&x0, r)?, r.to_string(), r.clone()));
        }
        cands.sort();
        let mut picks = Vec::new();
        let mut from = 0;
        for j in 1..=k {
            let need = nat_mul(&unit, j);
            match cands[from..].iter().position(|(d, _, _)| *d >= need) {
                Some(p) => {
                    let (d, _, r) = &cands[from + p];
                    picks.push((r.clone(), d.clone()));
                    from += p + 1;
                }
                None => break,
            }
        }
        if picks.len() as u64 == k {
            return Ok(picks);
        }
        if depth >= MAX_ESCAPE_DEPTH {
            return Err(SectionError::HypothesisViolated(format!("fewer than {k} distant boundary wnodes found")));
        }
        depth *= 2;
    }
}

/// A walk inside `s` from `x` to `y`, entering and leaving through tips
/// that `x` and `y` embrace.
pub fn connecting_walk(
    g: &WGraphPresentation,
    x: &WNodeRef,
    y: &WNodeRef,
    s: &SectionRef,
) -> Result<WalkSpec, SectionError> {
    check_pair(g, x, s)?;
    check_pair(g, y, s)?;
    for z in [x, y] {
        if !incident(g, z, s)? {
            return Err(SectionError::NotIncident(z.to_string(), s.id.clone()));
        }
    }
    let (x, y) = (g.canonical_ray_start(x.clone()), g.canonical_ray_start(y.clone()));
    if x == y {
        return Ok(WalkSpec::trivial(x));
    }
    let lower = s.rank;
    let u = Unrolled::build(g, depth_around([&x, &y]), g.ray_unit.max(1));
    let xi = u.node_index(&x).ok_or_else(|| WGraphError::UnknownNode(x.to_string()))?;
    let yi = u.node_index(&y).ok_or_else(|| WGraphError::UnknownNode(y.to_string()))?;
    let y_sub: BTreeSet<usize> = u.subtree(yi).into_iter().collect();

    let n = u.nodes.len();
    let mut moves: Vec<Vec<(usize, Step)>> = vec![Vec::new(); n];
    for b in u.branches.iter().filter(|b| s.contains(&b.elem)) {
        moves[b.a].push((b.b, Step::Branch(b.elem.to_string())));
        moves[b.b].push((b.a, Step::Branch(b.elem.to_string())));
    }
    for r in u.rays.iter().filter(|r| s.contains(&r.elem)) {
        for (p, w) in r.nodes.windows(2).enumerate() {
            let step = Step::Branch(format!("{}:{p}", r.elem));
            moves[w[0]].push((w[1], step.clone()));
            moves[w[1]].push((w[0], step));
        }
        if let Some(c) = r.collector.filter(|&c| u.rank(c) <= lower || y_sub.contains(&c)) {
            let step = Step::Tip(TipRank::Rank(ExtRank::Fin(0)));
            moves[r.nodes[0]].push((c, step.clone()));
            if c != yi {
                moves[c].push((r.nodes[0], step));
            }
        }
    }
    for i in u.canonical_nodes() {
        if let Some(p) = u.parent_of(i) {
            if u.rank(p) <= lower {
                moves[i].push((p, Step::Tip(TipRank::MinusOne)));
                moves[p].push((i, Step::Tip(TipRank::MinusOne)));
            }
        }
    }
    // leave x downward into what it embraces, including tips it collects
    let mut first: Vec<(usize, Step)> = u.subtree(xi).into_iter().filter(|&m| m != xi).map(|m| (m, Step::Tip(TipRank::MinusOne))).collect();
    for m in u.subtree(xi) {
        for &r in u.collected_rays(m) {
            if s.contains(&u.rays[r].elem) {
                first.push((u.rays[r].nodes[0], Step::Tip(TipRank::Rank(ExtRank::Fin(0)))));
            }
        }
    }

    let mut prev: HashMap<usize, (usize, Step)> = HashMap::new();
    let mut queue = VecDeque::new();
    for (m, st) in first {
        if let std::collections::hash_map::Entry::Vacant(v) = prev.entry(m) {
            v.insert((xi, st));
            queue.push_back(m);
        }
    }
    let mut end = None;
    while let Some(v) = queue.pop_front() {
        if y_sub.contains(&v) {
            end = Some(v);
            break;
        }
        for (w, st) in &moves[v] {
            if *w != xi && !prev.contains_key(w) {
                prev.insert(*w, (v, st.clone()));
                queue.push_back(*w);
            }
        }
    }
    let end = end.ok_or_else(|| SectionError::NotIncident(format!("{x} / {y}"), s.id.clone()))?;
    let mut rev = Vec::new();
    let mut v = end;
    while v != xi {
        let (p, st) = prev[&v].clone();
        rev.push((st, u.node_ref(v).clone()));
        v = p;
    }
    rev.reverse();
    let mut walk = WalkSpec { start: x, steps: rev };
    if end != yi {
        walk.steps.push((Step::Tip(TipRank::MinusOne), y));
    }
    Ok(walk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::walk_length;

    fn fixture(name: &str) -> WGraphPresentation {
        let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
        WGraphPresentation::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
    }

    fn r(g: &WGraphPresentation, s: &str) -> WNodeRef {
        g.resolve(s).unwrap()
    }

    #[test]
    fn ladder_sections() {
        let g = fixture("ladder");
        let s0 = wsections(&g, ExtRank::Fin(0)).unwrap();
        assert_eq!(s0.len(), 2);
        assert_eq!(s0.iter().filter(|s| s.is_family()).count(), 1);
        let s1 = wsections(&g, ExtRank::Fin(1)).unwrap();
        assert_eq!(s1.len(), 1);
        assert!(s1[0].core.contains("P0") && s1[0].lanes["ladder"].contains("P"));
        assert_eq!(wsections(&fixture("path5"), ExtRank::Fin(0)).unwrap().len(), 1);
        assert_eq!(wsections(&g, ExtRank::Fin(2)), Err(SectionError::RankAboveGraph(ExtRank::Fin(2))));
    }

    #[test]
    fn ladder_incidence() {
        let g = fixture("ladder");
        let p = |k: u64| section_by_name(&g, ExtRank::Fin(0), &format!("ladder[{k}].P")).unwrap();
        let x1 = r(&g, "x1");
        assert!(incident(&g, &x1, &p(0)).unwrap());
        assert!(incident(&g, &x1, &p(1)).unwrap());
        assert!(!incident(&g, &x1, &p(4)).unwrap());
        assert!(wadjacent(&g, &x1, &r(&g, "x2")).unwrap());
        assert!(!wadjacent(&g, &x1, &r(&g, "x3")).unwrap());
        assert!(wadjacent(&g, &x1, &x1).unwrap());
        assert!(is_boundary(&g, &r(&g, "x2")).unwrap());
        assert!(matches!(is_boundary(&g, &r(&g, "ladder[2].s")), Err(SectionError::RankMismatch(_))));
    }

    #[test]
    fn single_ray_collector_is_not_boundary() {
        let g = fixture("cycle_rays");
        assert!(!is_boundary(&g, &r(&g, "u")).unwrap());
        assert!(is_boundary(&g, &r(&g, "v")).unwrap());
    }

    #[test]
    fn local_finiteness() {
        let g = fixture("ladder");
        let s1 = section_by_name(&g, ExtRank::Fin(1), "P0").unwrap();
        assert!(locally_rho_finite(&g, &s1).unwrap());
        assert!(has_infinitely_many_boundary(&g, &s1).unwrap());
        let s0 = section_by_name(&g, ExtRank::Fin(0), "P0").unwrap();
        assert!(locally_rho_finite(&g, &s0).unwrap());
        let star = fixture("star");
        let s = section_by_name(&star, ExtRank::Fin(1), "spine[0].#0").unwrap();
        assert!(!locally_rho_finite(&star, &s).unwrap());
        assert!(matches!(escape_walk(&star, &s, &r(&star, "spine[0].y"), 2), Err(SectionError::HypothesisViolated(_))));
    }

    #[test]
    fn ladder_escape() {
        let g = fixture("ladder");
        let s1 = section_by_name(&g, ExtRank::Fin(1), "P0").unwrap();
        let x0 = r(&g, "x0");
        let got: Vec<(String, String)> =
            escape_walk(&g, &s1, &x0, 3).unwrap().into_iter().map(|(x, d)| (x.to_string(), d.to_string())).collect();
        let want = [("ladder[1].x", "w"), ("ladder[2].x", "w*2"), ("ladder[3].x", "w*3")];
        assert_eq!(got, want.map(|(a, b)| (a.to_string(), b.to_string())));
        assert!(escape_walk(&g, &s1, &x0, 0).unwrap().is_empty());
    }

    #[test]
    fn connecting_walks() {
        let g = fixture("ladder");
        let s = section_by_name(&g, ExtRank::Fin(0), "ladder[1].P").unwrap();
        let (x1, x2) = (r(&g, "x1"), r(&g, "x2"));
        let w = connecting_walk(&g, &x1, &x2, &s).unwrap();
        assert_eq!(w.start, x1);
        assert_eq!(w.end(), &x2);
        assert!(walk_length(&g, &w).is_ok());
        assert!(connecting_walk(&g, &x1, &x1, &s).unwrap().steps.is_empty());
        assert!(matches!(connecting_walk(&g, &x1, &r(&g, "x4"), &s), Err(SectionError::NotIncident(..))));
    }
}
