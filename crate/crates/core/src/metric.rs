//! Walk lengths and wdistances.
//!
//! Distances are computed on the maximal wnodes of a finite unrolling. A
//! search result is accepted only once every way out of the truncation is
//! provably at least as long; otherwise the unrolling is doubled.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ordinal::{nat_sum, ExtRank, Exponent, Ordinal, OrdinalError, OrdinalPoly, IntPoly};
use crate::unroll::Unrolled;
use crate::wgraph::{WGraphError, WGraphPresentation, WNodeRef};

const MAX_DEPTH: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error(transparent)]
    Graph(#[from] WGraphError),
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
    #[error("invalid walk: {0}")]
    InvalidWalk(String),
    #[error("`{0}` and `{1}` are not wconnected")]
    Disconnected(String, String),
    #[error("no walk found within the step bounds")]
    BoundTooSmall,
    #[error("distance is not affine along the pattern: {0}")]
    FitFailure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TipRank {
    MinusOne,
    Rank(ExtRank),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    /// A branch, or the segment `ray:p` joining positions `p` and `p+1`.
    Branch(String),
    Tip(TipRank),
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Branch(id) => write!(f, "branch {id}"),
            Step::Tip(TipRank::MinusOne) => f.write_str("tip -1"),
            Step::Tip(TipRank::Rank(r)) => write!(f, "tip {r}"),
        }
    }
}

/// Length contributed by one step.
pub fn step_length(s: &Step) -> Result<Ordinal, MetricError> {
    Ok(match s {
        Step::Branch(_) => Ordinal::finite(1),
        Step::Tip(TipRank::MinusOne) => Ordinal::zero(),
        Step::Tip(TipRank::Rank(r)) => tip_weight(*r)?,
    })
}

/// ω^(α+1) for an α-wtip, ω^ω for an ω⃗-wtip.
pub fn tip_weight(r: ExtRank) -> Result<Ordinal, MetricError> {
    match r {
        ExtRank::Fin(a) => Ok(Ordinal::monomial(Exponent::Fin(a + 1), 1)),
        ExtRank::ArrowOmega => Ok(Ordinal::monomial(Exponent::Omega, 1)),
        ExtRank::Omega => Err(MetricError::InvalidWalk("ω-wtips are beyond the supported ordinals".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkSpec {
    pub start: WNodeRef,
    pub steps: Vec<(Step, WNodeRef)>,
}

impl WalkSpec {
    pub fn trivial(x: WNodeRef) -> Self {
        WalkSpec { start: x, steps: Vec::new() }
    }

    pub fn end(&self) -> &WNodeRef {
        self.steps.last().map_or(&self.start, |(_, n)| n)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &WNodeRef> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|(_, n)| n))
    }

    /// Natural sum of the step contributions, without checking incidence.
    pub fn raw_length(&self) -> Result<Ordinal, MetricError> {
        let mut total = Ordinal::zero();
        for (s, _) in &self.steps {
            total = nat_sum(&total, &step_length(s)?);
        }
        Ok(total)
    }
}

impl fmt::Display for WalkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for (s, n) in &self.steps {
            write!(f, " -[{s}]-> {n}")?;
        }
        Ok(())
    }
}

impl Serialize for WalkSpec {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct StepOut {
            step: String,
            to: String,
        }
        let steps: Vec<StepOut> =
            self.steps.iter().map(|(s, n)| StepOut { step: s.to_string(), to: n.to_string() }).collect();
        let mut st = ser.serialize_struct("WalkSpec", 2)?;
        st.serialize_field("start", &self.start.to_string())?;
        st.serialize_field("steps", &steps)?;
        st.end()
    }
}

fn depth_for<'a>(refs: impl IntoIterator<Item = &'a WNodeRef>, extra: u64) -> (u64, u64) {
    let mut copy = 0;
    let mut pos = 0;
    for r in refs {
        copy = copy.max(r.copy_index().map_or(0, |c| c + 1));
        pos = pos.max(r.ray_position().unwrap_or(0));
    }
    (copy + 1 + extra, pos)
}

fn is_incident(u: &Unrolled, a: usize, b: usize, s: &Step) -> bool {
    match s {
        Step::Tip(TipRank::MinusOne) => a != b && u.root(a) == u.root(b),
        Step::Branch(label) => {
            u.branches.iter().any(|br| {
                br.elem.to_string() == *label && ((br.a == a && br.b == b) || (br.a == b && br.b == a))
            }) || u.rays.iter().any(|ray| {
                ray.nodes.windows(2).enumerate().any(|(p, w)| {
                    format!("{}:{p}", ray.elem) == *label && ((w[0] == a && w[1] == b) || (w[0] == b && w[1] == a))
                })
            })
        }
        Step::Tip(TipRank::Rank(ExtRank::Fin(0))) => u.rays.iter().any(|ray| {
            ray.collector.is_some_and(|c| (c == b && ray.nodes.contains(&a)) || (c == a && ray.nodes.contains(&b)))
        }),
        Step::Tip(TipRank::Rank(r)) => u.arm_tips.iter().any(|t| {
            t.tip_rank == *r
                && ((t.apex == b && t.members.contains(&a)) || (t.apex == a && t.members.contains(&b)))
        }),
    }
}

/// Checks incidence of consecutive elements, then returns the length.
pub fn walk_length(g: &WGraphPresentation, w: &WalkSpec) -> Result<Ordinal, MetricError> {
    let invalid = |m: String| MetricError::InvalidWalk(m);
    let nodes: Vec<WNodeRef> = w.nodes().map(|n| g.resolve(&n.to_string())).collect::<Result<_, _>>()?;
    let (depth, pos) = depth_for(&nodes, 1);
    let u = Unrolled::build(g, depth, g.ray_unit.max(1).max(pos));
    let idx: Vec<usize> = nodes
        .iter()
        .map(|n| u.node_index(n).ok_or_else(|| invalid(format!("`{n}` is not materialized"))))
        .collect::<Result<_, _>>()?;
    for (k, (s, _)) in w.steps.iter().enumerate() {
        if !is_incident(&u, idx[k], idx[k + 1], s) {
            return Err(invalid(format!("`{}` and `{}` are not joined by {s}", nodes[k], nodes[k + 1])));
        }
    }
    w.raw_length()
}

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    w: Ordinal,
    step: Step,
    /// Concrete endpoints on the near and far side.
    from: usize,
    at: usize,
}

#[derive(Debug)]
struct MetricGraph {
    u: Unrolled,
    adj: Vec<Vec<Edge>>,
    gateways: Vec<usize>,
}

impl MetricGraph {
    fn build(g: &WGraphPresentation, depth: u64, ray_len: u64) -> Result<Self, MetricError> {
        let u = Unrolled::build(g, depth, ray_len);
        let mut adj = vec![Vec::new(); u.nodes.len()];
        let mut link = |a: usize, b: usize, w: Ordinal, step: Step| {
            let (ra, rb) = (u.root(a), u.root(b));
            if ra != rb {
                adj[ra].push(Edge { to: rb, w: w.clone(), step: step.clone(), from: a, at: b });
                adj[rb].push(Edge { to: ra, w, step, from: b, at: a });
            }
        };
        for br in &u.branches {
            link(br.a, br.b, Ordinal::finite(1), Step::Branch(br.elem.to_string()));
        }
        let omega = tip_weight(ExtRank::Fin(0))?;
        for ray in &u.rays {
            for (p, w) in ray.nodes.windows(2).enumerate() {
                link(w[0], w[1], Ordinal::finite(1), Step::Branch(format!("{}:{p}", ray.elem)));
            }
            if let Some(c) = ray.collector {
                for &n in &ray.nodes {
                    link(n, c, omega.clone(), Step::Tip(TipRank::Rank(ExtRank::Fin(0))));
                }
            }
        }
        for t in &u.arm_tips {
            let w = tip_weight(t.tip_rank)?;
            for &m in &t.members {
                link(m, t.apex, w.clone(), Step::Tip(TipRank::Rank(t.tip_rank)));
            }
        }
        let mut gateways: Vec<usize> = u
            .canonical_nodes()
            .filter(|&i| u.nodes[i].stub)
            .chain(u.arm_tips.iter().map(|t| t.apex))
            .map(|i| u.root(i))
            .collect();
        gateways.sort_unstable();
        gateways.dedup();
        Ok(MetricGraph { u, adj, gateways })
    }

    /// Least-first search from `src`; stops once `target` is settled.
    fn search(&self, src: usize, target: Option<usize>) -> (Vec<Option<Ordinal>>, Vec<bool>) {
        let n = self.adj.len();
        let mut dist: Vec<Option<Ordinal>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[src] = Some(Ordinal::zero());
        heap.push(Reverse((Ordinal::zero(), src)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            if Some(v) == target {
                break;
            }
            for e in &self.adj[v] {
                let nd = nat_sum(&d, &e.w);
                if dist[e.to].as_ref().is_none_or(|old| nd < *old) {
                    dist[e.to] = Some(nd.clone());
                    heap.push(Reverse((nd, e.to)));
                }
            }
        }
        (dist, done)
    }

    /// Least length of a walk from `x` to `y` that leaves the truncation.
    fn exit_bound(&self, dx: &[Option<Ordinal>], dy: &[Option<Ordinal>]) -> Option<Ordinal> {
        let mut best: Option<Ordinal> = None;
        for &g1 in &self.gateways {
            let Some(a) = &dx[g1] else { continue };
            for &g2 in &self.gateways {
                if g1 == g2 {
                    continue;
                }
                let Some(b) = &dy[g2] else { continue };
                let s = nat_sum(a, b);
                if best.as_ref().is_none_or(|cur| s < *cur) {
                    best = Some(s);
                }
            }
        }
        best
    }
}

/// Cached distance computations over one presentation. Safe to share
/// between threads; the cache never changes a result.
#[derive(Debug)]
pub struct DistanceEngine {
    g: Arc<WGraphPresentation>,
    cache: Mutex<HashMap<(u64, u64), Arc<MetricGraph>>>,
}

struct Solved {
    mg: Arc<MetricGraph>,
    x: usize,
    y: usize,
    dist: Ordinal,
}

impl DistanceEngine {
    pub fn new(g: WGraphPresentation) -> Self {
        Self::shared(Arc::new(g))
    }

    pub fn shared(g: Arc<WGraphPresentation>) -> Self {
        DistanceEngine { g, cache: Mutex::new(HashMap::new()) }
    }

    pub fn graph(&self) -> &WGraphPresentation {
        &self.g
    }

    fn metric_graph(&self, depth: u64, ray_len: u64) -> Result<Arc<MetricGraph>, MetricError> {
        if let Some(mg) = self.cache.lock().expect("cache lock").get(&(depth, ray_len)) {
            return Ok(mg.clone());
        }
        let mg = Arc::new(MetricGraph::build(&self.g, depth, ray_len)?);
        self.cache.lock().expect("cache lock").insert((depth, ray_len), mg.clone());
        Ok(mg)
    }

    fn solve(&self, x: &WNodeRef, y: &WNodeRef) -> Result<Solved, MetricError> {
        let (need, pos) = depth_for([x, y], 1);
        let mut depth = need.next_power_of_two().max(2);
        let ray_len = self.g.ray_unit.max(1).max(pos).next_power_of_two();
        let unknown = |r: &WNodeRef| MetricError::Graph(WGraphError::UnknownNode(r.to_string()));
        loop {
            let mg = self.metric_graph(depth, ray_len)?;
            let xi = mg.u.root(mg.u.node_index(x).ok_or_else(|| unknown(x))?);
            let yi = mg.u.root(mg.u.node_index(y).ok_or_else(|| unknown(y))?);
            let (dx, done) = mg.search(xi, Some(yi));
            if let Some(d) = dx[yi].clone().filter(|_| done[yi]) {
                let early = mg.gateways.iter().all(|&g| !done[g] || dx[g].as_ref().is_some_and(|gd| *gd >= d));
                let certified = early || {
                    let (full_x, _) = mg.search(xi, None);
                    let (full_y, _) = mg.search(yi, None);
                    mg.exit_bound(&full_x, &full_y).is_none_or(|lb| lb >= d)
                };
                if certified {
                    return Ok(Solved { mg, x: xi, y: yi, dist: d });
                }
            }
            if depth >= MAX_DEPTH {
                return Err(MetricError::Disconnected(x.to_string(), y.to_string()));
            }
            depth *= 2;
        }
    }

    fn resolve(&self, x: &WNodeRef) -> Result<WNodeRef, MetricError> {
        self.g.rank_of(x)?;
        Ok(self.g.canonical_ray_start(x.clone()))
    }

    pub fn wdistance(&self, x: &WNodeRef, y: &WNodeRef) -> Result<Ordinal, MetricError> {
        let (x, y) = (self.resolve(x)?, self.resolve(y)?);
        Ok(self.solve(&x, &y)?.dist)
    }

    pub fn geodesic(&self, x: &WNodeRef, y: &WNodeRef) -> Result<WalkSpec, MetricError> {
        let (x, y) = (self.resolve(x)?, self.resolve(y)?);
        let s = self.solve(&x, &y)?;
        let u = &s.mg.u;
        let (dy, _) = s.mg.search(s.y, None);
        let mut walk = WalkSpec::trivial(x.clone());
        let mut cur = u.node_index(&x).expect("solved node");
        let mut v = s.x;
        while v != s.y {
            let here = dy[v].clone().expect("reachable");
            let mut best: Option<(Vec<String>, &Edge)> = None;
            for e in &s.mg.adj[v] {
                let Some(rest) = &dy[e.to] else { continue };
                if nat_sum(&e.w, rest) != here {
                    continue;
                }
                let mut key = Vec::with_capacity(2);
                if e.from != cur {
                    key.push(u.node_ref(e.from).to_string());
                }
                key.push(u.node_ref(e.at).to_string());
                if best.as_ref().is_none_or(|(k, _)| key < *k) {
                    best = Some((key, e));
                }
            }
            let (_, e) = best.expect("a geodesic edge exists");
            if e.from != cur {
                walk.steps.push((Step::Tip(TipRank::MinusOne), u.node_ref(e.from).clone()));
            }
            walk.steps.push((e.step.clone(), u.node_ref(e.at).clone()));
            cur = e.at;
            v = e.to;
        }
        let yi = u.node_index(&y).expect("solved node");
        if cur != yi {
            walk.steps.push((Step::Tip(TipRank::MinusOne), y));
        }
        Ok(walk)
    }

    /// Fits `n ↦ d(base, pattern(n))` per exponent.
    pub fn distance_poly(
        &self,
        base: &WNodeRef,
        pattern: impl Fn(u64) -> WNodeRef,
    ) -> Result<OrdinalPoly, MetricError> {
        fit_affine(|n| self.wdistance(base, &pattern(n)))
    }
}

pub fn wdistance(g: &WGraphPresentation, x: &WNodeRef, y: &WNodeRef) -> Result<Ordinal, MetricError> {
    DistanceEngine::new(g.clone()).wdistance(x, y)
}

pub fn geodesic(g: &WGraphPresentation, x: &WNodeRef, y: &WNodeRef) -> Result<WalkSpec, MetricError> {
    DistanceEngine::new(g.clone()).geodesic(x, y)
}

/// Exhaustive search over walks with at most `max_tips` tip traversals of
/// nonnegative rank and `max_branches` branch steps. Moves between a wnode
/// and the wnodes it embraces are free and unbounded.
pub fn wdistance_oracle(
    g: &WGraphPresentation,
    x: &WNodeRef,
    y: &WNodeRef,
    max_tips: u64,
    max_branches: u64,
) -> Result<Ordinal, MetricError> {
    let x = g.canonical_ray_start(x.clone());
    let y = g.canonical_ray_start(y.clone());
    g.rank_of(&x)?;
    g.rank_of(&y)?;
    let (depth, pos) = depth_for([&x, &y], max_tips + max_branches + 1);
    let u = Unrolled::build(g, depth, g.ray_unit.max(1).max(pos) + max_branches);
    let unknown = |r: &WNodeRef| MetricError::Graph(WGraphError::UnknownNode(r.to_string()));
    let xi = u.node_index(&x).ok_or_else(|| unknown(&x))?;
    let yi = u.node_index(&y).ok_or_else(|| unknown(&y))?;

    let n = u.nodes.len();
    let mut branch_moves: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut tip_moves: Vec<Vec<(usize, Ordinal)>> = vec![Vec::new(); n];
    for br in &u.branches {
        branch_moves[br.a].push(br.b);
        branch_moves[br.b].push(br.a);
    }
    for ray in &u.rays {
        for w in ray.nodes.windows(2) {
            branch_moves[w[0]].push(w[1]);
            branch_moves[w[1]].push(w[0]);
        }
        if let Some(c) = ray.collector {
            let w = tip_weight(ExtRank::Fin(0))?;
            for &p in &ray.nodes {
                tip_moves[p].push((c, w.clone()));
                tip_moves[c].push((p, w.clone()));
            }
        }
    }
    for t in &u.arm_tips {
        let w = tip_weight(t.tip_rank)?;
        for &m in &t.members {
            tip_moves[m].push((t.apex, w.clone()));
            tip_moves[t.apex].push((m, w.clone()));
        }
    }

    let close = |layer: &mut Vec<Option<Ordinal>>| {
        let mut stack: Vec<usize> = (0..n).filter(|&i| layer[i].is_some()).collect();
        while let Some(v) = stack.pop() {
            let d = layer[v].clone().expect("seeded");
            let mut near: Vec<usize> = u.children_of(v).to_vec();
            near.extend(u.parent_of(v));
            for w in near {
                if layer[w].as_ref().is_none_or(|old| d < *old) {
                    layer[w] = Some(d.clone());
                    stack.push(w);
                }
            }
        }
    };

    // layers[t][b][v]: least tip sum over walks reaching v with t tips and b branches
    let (tn, bn) = (max_tips as usize + 1, max_branches as usize + 1);
    let mut layers: Vec<Vec<Vec<Option<Ordinal>>>> = vec![vec![vec![None; n]; bn]; tn];
    layers[0][0][xi] = Some(Ordinal::zero());
    let mut best: Option<Ordinal> = None;
    for t in 0..tn {
        for b in 0..bn {
            let mut layer = std::mem::take(&mut layers[t][b]);
            close(&mut layer);
            for v in 0..n {
                let Some(d) = &layer[v] else { continue };
                if v == yi {
                    let total = nat_sum(d, &Ordinal::finite(b as u64));
                    if best.as_ref().is_none_or(|cur| total < *cur) {
                        best = Some(total);
                    }
                }
                if b + 1 < bn {
                    for &w in &branch_moves[v] {
                        let slot = &mut layers[t][b + 1][w];
                        if slot.as_ref().is_none_or(|old| d < old) {
                            *slot = Some(d.clone());
                        }
                    }
                }
                if t + 1 < tn {
                    for (w, c) in &tip_moves[v] {
                        let nd = nat_sum(d, c);
                        let slot = &mut layers[t + 1][b][*w];
                        if slot.as_ref().is_none_or(|old| nd < *old) {
                            *slot = Some(nd);
                        }
                    }
                }
            }
            layers[t][b] = layer;
        }
    }
    best.ok_or(MetricError::BoundTooSmall)
}

const FIT_STARTS: [u64; 7] = [0, 1, 2, 4, 8, 16, 32];

/// Fits an ordinal-valued function affine in `n` per exponent: three
/// samples fix each coefficient line and two more check it.
pub fn fit_affine(f: impl FnMut(u64) -> Result<Ordinal, MetricError>) -> Result<OrdinalPoly, MetricError> {
    fit_affine_from(0, f)
}

/// As `fit_affine`, trying only start points at or beyond `min_start`.
pub fn fit_affine_from(
    min_start: u64,
    mut f: impl FnMut(u64) -> Result<Ordinal, MetricError>,
) -> Result<OrdinalPoly, MetricError> {
    let mut memo: HashMap<u64, Ordinal> = HashMap::new();
    let mut last = String::new();
    'start: for d in FIT_STARTS.map(|d| d + min_start) {
        let mut samples = Vec::with_capacity(5);
        for n in d..d + 5 {
            if let std::collections::hash_map::Entry::Vacant(e) = memo.entry(n) {
                e.insert(f(n)?);
            }
            samples.push(memo[&n].clone());
        }
        let mut exps: Vec<Exponent> = samples.iter().flat_map(|o| o.terms().iter().map(|(e, _)| *e)).collect();
        exps.sort_unstable();
        exps.dedup();
        let mut terms = std::collections::BTreeMap::new();
        for e in exps {
            let c: Vec<i64> = samples.iter().map(|o| o.coefficient(e) as i64).collect();
            let slope = c[1] - c[0];
            if slope < 0 || (0..5).any(|i| c[i] != c[0] + slope * i as i64) {
                last = format!("coefficient of ω^{e} is {c:?} from n = {d}");
                continue 'start;
            }
            terms.insert(e, IntPoly::affine(slope, c[0] - slope * d as i64));
        }
        return Ok(OrdinalPoly::new(terms, d)?);
    }
    Err(MetricError::FitFailure(last))
}

/// A wnode reference with an affine arm-copy index `max(min, ⌊(a·n+b)/div⌋)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IndexMap {
    pub a: u64,
    pub b: u64,
    pub div: u64,
    pub min: u64,
}

impl IndexMap {
    pub fn affine(a: u64, b: u64) -> Self {
        IndexMap { a, b, div: 1, min: 0 }
    }

    pub fn apply(&self, n: u64) -> u64 {
        ((self.a * n + self.b) / self.div.max(1)).max(self.min)
    }
}

impl fmt::Display for IndexMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lin = match (self.a, self.b) {
            (0, b) => b.to_string(),
            (1, 0) => "n".to_string(),
            (a, 0) => format!("{a}n"),
            (1, b) => format!("n+{b}"),
            (a, b) => format!("{a}n+{b}"),
        };
        let body = if self.div > 1 { format!("({lin})/{}", self.div) } else { lin };
        if self.min > 0 {
            write!(f, "max({},{body})", self.min)
        } else {
            f.write_str(&body)
        }
    }
}

/// `arm[map(n)].local`, where `local` is a cell node id or `ray@pos`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArmPattern {
    pub arm: String,
    pub map: IndexMap,
    pub local: String,
}

impl ArmPattern {
    pub fn at(&self, n: u64) -> Result<WNodeRef, MetricError> {
        Ok(format!("{}[{}].{}", self.arm, self.map.apply(n), self.local).parse::<WNodeRef>()?)
    }
}

pub fn arm_distance_poly(g: &WGraphPresentation, base: &WNodeRef, pattern: &ArmPattern) -> Result<OrdinalPoly, MetricError> {
    let engine = DistanceEngine::new(g.clone());
    fit_affine(|n| engine.wdistance(base, &pattern.at(n)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> WGraphPresentation {
        let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
        WGraphPresentation::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
    }

    fn r(g: &WGraphPresentation, s: &str) -> WNodeRef {
        g.resolve(s).unwrap()
    }

    #[test]
    fn lengths_by_hand() {
        let b = |i: usize| (Step::Branch(format!("#{i}")), WNodeRef::Core(format!("n{i}")));
        let tip = (Step::Tip(TipRank::Rank(ExtRank::Fin(0))), WNodeRef::Core("t".into()));
        let mut w = WalkSpec::trivial(WNodeRef::Core("s".into()));
        w.steps = (0..4).map(b).collect();
        assert_eq!(w.raw_length().unwrap().to_string(), "4");
        w.steps = vec![b(0), tip.clone(), b(1), b(2)];
        assert_eq!(w.raw_length().unwrap().to_string(), "w+3");
        w.steps = vec![tip.clone(), tip];
        assert_eq!(w.raw_length().unwrap().to_string(), "w*2");
    }

    #[test]
    fn path_and_ladder_distances() {
        let p = fixture("path5");
        assert_eq!(wdistance(&p, &r(&p, "a"), &r(&p, "e")).unwrap(), Ordinal::finite(4));
        let g = fixture("ladder");
        assert_eq!(wdistance(&g, &r(&g, "x1"), &r(&g, "x3")).unwrap().to_string(), "w*2");
        assert_eq!(wdistance(&g, &r(&g, "x1"), &r(&g, "ladder[1].P@5")).unwrap(), Ordinal::finite(5));
        assert!(wdistance(&g, &r(&g, "x4"), &r(&g, "x4")).unwrap().is_zero());
    }

    #[test]
    fn oracle_examples() {
        let p = fixture("path5");
        let (a, e) = (r(&p, "a"), r(&p, "e"));
        assert_eq!(wdistance_oracle(&p, &a, &e, 0, 8).unwrap(), Ordinal::finite(4));
        assert_eq!(wdistance_oracle(&p, &a, &e, 0, 2), Err(MetricError::BoundTooSmall));
        let g = fixture("ladder");
        assert_eq!(wdistance_oracle(&g, &r(&g, "x1"), &r(&g, "x2"), 2, 20).unwrap().to_string(), "w");
    }

    #[test]
    fn geodesics_have_the_distance() {
        let p = fixture("path5");
        let w = geodesic(&p, &r(&p, "a"), &r(&p, "c")).unwrap();
        let names: Vec<String> = w.nodes().map(|n| n.to_string()).collect();
        assert_eq!(names, ["a", "b", "c"]);
        assert_eq!(walk_length(&p, &w).unwrap(), Ordinal::finite(2));

        let g = fixture("ladder");
        let w = geodesic(&g, &r(&g, "x1"), &r(&g, "x2")).unwrap();
        assert_eq!(walk_length(&g, &w).unwrap().to_string(), "w");
        assert!(w.steps.iter().any(|(s, _)| *s == Step::Tip(TipRank::Rank(ExtRank::Fin(0)))));
        assert!(w.nodes().any(|n| n.to_string().starts_with("ladder[1].")));

        let x = r(&g, "x3");
        let w = geodesic(&g, &x, &x).unwrap();
        assert!(w.steps.is_empty());
    }

    #[test]
    fn rejects_non_incident_steps() {
        let p = fixture("path5");
        let mut w = WalkSpec::trivial(r(&p, "a"));
        w.steps.push((Step::Branch("#0".into()), r(&p, "c")));
        assert!(matches!(walk_length(&p, &w), Err(MetricError::InvalidWalk(_))));
    }

    #[test]
    fn ladder_polys() {
        let g = fixture("ladder");
        let x0 = r(&g, "x0");
        let pat = |a, b| ArmPattern { arm: "ladder".into(), map: IndexMap::affine(a, b), local: "x".into() };
        assert_eq!(arm_distance_poly(&g, &x0, &pat(1, 0)).unwrap().to_string(), "w*(n)");
        assert_eq!(arm_distance_poly(&g, &x0, &pat(2, 0)).unwrap().to_string(), "w*(2n)");
        let c = arm_distance_poly(&g, &r(&g, "x1"), &pat(0, 3)).unwrap();
        assert_eq!(c.evaluate(7).unwrap().to_string(), "w*2");
    }
}
