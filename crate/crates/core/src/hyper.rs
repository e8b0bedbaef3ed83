//! Hypernodes given by finitely presented wnode sequences.
//!
//! Every query splits the index set into residue classes `n = M·k + r`,
//! where `M` is the least common multiple of all interleave moduli and index
//! divisors involved. Inside one class each presentation is eventually an
//! affine function of `k`, so cofinite questions reduce to a few samples and
//! an affine fit.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_integer::lcm;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{fit_affine_from, ArmPattern, DistanceEngine, IndexMap, MetricError};
use crate::ordinal::{nat_sum, ExtRank, GrowthClass, OrdinalPoly};
use crate::wgraph::{WGraphError, WGraphPresentation, WNodeRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HyperError {
    #[error(transparent)]
    Graph(#[from] WGraphError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("presentation syntax: {0}")]
    Syntax(String),
    #[error("presentation does not fit the context: {0}")]
    ContextMismatch(String),
    #[error("rank {0} exceeds the rank of the graph")]
    RankAboveGraph(ExtRank),
    #[error("`{0}` is not maximal")]
    NotMaximal(String),
    #[error("unknown presentation `{0}`")]
    UnknownName(String),
    #[error("context file: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HypernodePresentation {
    Standard(WNodeRef),
    ArmIndexed(ArmPattern),
    /// `x_n` is taken from branch `n mod m`, at the same index `n`.
    Interleave(Vec<HypernodePresentation>),
    FinitePatch(Box<HypernodePresentation>, BTreeMap<u64, WNodeRef>),
}

use HypernodePresentation as Hp;

impl Hp {
    pub fn node_at(&self, n: u64) -> Result<WNodeRef, HyperError> {
        match self {
            Hp::Standard(x) => Ok(x.clone()),
            Hp::ArmIndexed(p) => Ok(p.at(n)?),
            Hp::Interleave(bs) => bs[(n % bs.len() as u64) as usize].node_at(n),
            Hp::FinitePatch(base, over) => match over.get(&n) {
                Some(x) => Ok(x.clone()),
                None => base.node_at(n),
            },
        }
    }

    /// Least modulus making every part affine on each residue class.
    pub fn modulus(&self) -> u64 {
        match self {
            Hp::Standard(_) => 1,
            Hp::ArmIndexed(p) => p.map.div.max(1),
            Hp::Interleave(bs) => bs.iter().fold(bs.len() as u64, |m, b| lcm(m, b.modulus())),
            Hp::FinitePatch(base, _) => base.modulus(),
        }
    }

    /// One past the largest patched index.
    pub fn patch_end(&self) -> u64 {
        match self {
            Hp::Standard(_) => 0,
            Hp::ArmIndexed(p) => {
                // below this the `min` clamp may still be active
                (p.map.min * p.map.div.max(1)).checked_div(p.map.a).map_or(0, |q| q + 1)
            }
            Hp::Interleave(bs) => bs.iter().map(Hp::patch_end).max().unwrap_or(0),
            Hp::FinitePatch(base, over) => over.keys().next_back().map_or(0, |k| k + 1).max(base.patch_end()),
        }
    }

    pub fn is_standard(&self) -> bool {
        matches!(self, Hp::Standard(_))
    }

    /// Parses the presentation syntax, resolving node names against `g`.
    pub fn parse(text: &str, g: &WGraphPresentation) -> Result<Hp, HyperError> {
        let text = text.trim();
        let syntax = |m: &str| HyperError::Syntax(format!("{m} in `{text}`"));
        let open = text.find('(').ok_or_else(|| syntax("expected `name(...)`"))?;
        if !text.ends_with(')') {
            return Err(syntax("missing `)`"));
        }
        let head = text[..open].trim();
        let args = split_top(&text[open + 1..text.len() - 1]);
        let num = |s: &str| s.trim().parse::<u64>().map_err(|_| syntax("expected a natural"));
        let p = match head {
            "std" if args.len() == 1 => Hp::Standard(g.resolve(&args[0])?),
            "arm" if args.len() == 4 || args.len() == 6 => {
                let mut map = IndexMap::affine(num(&args[1])?, num(&args[2])?);
                if args.len() == 6 {
                    map.div = num(&args[4])?;
                    map.min = num(&args[5])?;
                    if map.div == 0 {
                        return Err(syntax("divisor must be positive"));
                    }
                }
                Hp::ArmIndexed(ArmPattern { arm: args[0].trim().to_string(), map, local: args[3].trim().to_string() })
            }
            "interleave" if args.len() >= 2 => {
                let m = num(&args[0])? as usize;
                if m < 2 || args.len() != m + 1 {
                    return Err(syntax("interleave needs a modulus m >= 2 and m parts"));
                }
                Hp::Interleave(args[1..].iter().map(|a| Hp::parse(a, g)).collect::<Result<_, _>>()?)
            }
            "patch" if args.len() == 2 => {
                let base = Hp::parse(&args[0], g)?;
                let body = args[1].trim();
                let body = body
                    .strip_prefix('{')
                    .and_then(|b| b.strip_suffix('}'))
                    .ok_or_else(|| syntax("expected `{n: node, ...}`"))?;
                let mut over = BTreeMap::new();
                for item in split_top(body).iter().filter(|s| !s.trim().is_empty()) {
                    let (k, v) = item.split_once(':').ok_or_else(|| syntax("expected `n: node`"))?;
                    over.insert(num(k)?, g.resolve(v.trim())?);
                }
                Hp::FinitePatch(Box::new(base), over)
            }
            _ => return Err(syntax("unknown form")),
        };
        p.check(g)?;
        Ok(p)
    }

    /// All referenced wnodes exist. Interleaved parts may differ in rank.
    pub fn check(&self, g: &WGraphPresentation) -> Result<(), HyperError> {
        let bad = |m: String| HyperError::ContextMismatch(m);
        match self {
            Hp::Standard(x) => {
                g.rank_of(x).map_err(|e| bad(e.to_string()))?;
            }
            Hp::ArmIndexed(p) => {
                g.arm(&p.arm).ok_or_else(|| bad(format!("unknown arm `{}`", p.arm)))?;
                g.rank_of(&p.at(0)?).map_err(|e| bad(e.to_string()))?;
            }
            Hp::Interleave(bs) => {
                for b in bs {
                    b.check(g)?;
                }
            }
            Hp::FinitePatch(base, over) => {
                base.check(g)?;
                for x in over.values() {
                    g.rank_of(x).map_err(|e| bad(e.to_string()))?;
                }
            }
        }
        Ok(())
    }

    /// Rank of the carried wnodes for almost all `n`.
    pub fn rank(&self, g: &WGraphPresentation) -> Result<ExtRank, HyperError> {
        let n = self.patch_end() + self.modulus() * 4;
        Ok(g.rank_of(&self.node_at(n)?)?)
    }
}

/// Splits at commas outside parentheses and braces.
fn split_top(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur).trim().to_string());
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

impl fmt::Display for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hp::Standard(x) => write!(f, "std({x})"),
            Hp::ArmIndexed(p) if p.map.div <= 1 && p.map.min == 0 => {
                write!(f, "arm({}, {}, {}, {})", p.arm, p.map.a, p.map.b, p.local)
            }
            Hp::ArmIndexed(p) => {
                write!(f, "arm({}, {}, {}, {}, {}, {})", p.arm, p.map.a, p.map.b, p.local, p.map.div, p.map.min)
            }
            Hp::Interleave(bs) => {
                write!(f, "interleave({}", bs.len())?;
                for b in bs {
                    write!(f, ", {b}")?;
                }
                f.write_str(")")
            }
            Hp::FinitePatch(base, over) => {
                let items: Vec<String> = over.iter().map(|(k, v)| format!("{k}: {v}")).collect();
                write!(f, "patch({base}, {{{}}})", items.join(", "))
            }
        }
    }
}

impl Serialize for Hp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The indices `n ≡ rem (mod modulus)`, written `n = modulus·k + rem`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Residue {
    pub modulus: u64,
    pub rem: u64,
}

impl Residue {
    pub const ALL: Residue = Residue { modulus: 1, rem: 0 };

    pub fn index(&self, k: u64) -> u64 {
        self.modulus * k + self.rem
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.modulus == 1 {
            f.write_str("all n")
        } else {
            write!(f, "n = {}k+{}", self.modulus, self.rem)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "detail")]
pub enum LimitVerdict {
    Yes(u64),
    No,
    UltrafilterDependent(Vec<(Residue, bool)>),
}

impl LimitVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, LimitVerdict::Yes(_))
    }

    /// Combines per-class outcomes: cofinite agreement gives Yes or No,
    /// anything else is reported per residue on the coarsest modulus.
    pub fn merge(modulus: u64, per: &[(u64, Option<u64>)]) -> LimitVerdict {
        if per.iter().all(|(_, v)| v.is_some()) {
            return LimitVerdict::Yes(per.iter().filter_map(|(_, v)| *v).max().unwrap_or(0));
        }
        if per.iter().all(|(_, v)| v.is_none()) {
            return LimitVerdict::No;
        }
        let yes: HashMap<u64, bool> = per.iter().map(|(r, v)| (*r, v.is_some())).collect();
        let m = (1..=modulus)
            .filter(|d| modulus.is_multiple_of(*d))
            .find(|&d| (0..modulus).all(|r| yes[&r] == yes[&(r % d)]))
            .unwrap_or(modulus);
        LimitVerdict::UltrafilterDependent((0..m).map(|r| (Residue { modulus: m, rem: r }, yes[&r])).collect())
    }
}

impl fmt::Display for LimitVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitVerdict::Yes(mu) => write!(f, "yes (mu = {mu})"),
            LimitVerdict::No => f.write_str("no"),
            LimitVerdict::UltrafilterDependent(per) => {
                let parts: Vec<String> =
                    per.iter().map(|(r, v)| format!("{r}: {}", if *v { "yes" } else { "no" })).collect();
                write!(f, "depends on the ultrafilter [{}]", parts.join("; "))
            }
        }
    }
}

pub type ClassPolys = Vec<(Residue, OrdinalPoly)>;

/// A graph together with named hypernode presentations over it.
#[derive(Debug)]
pub struct EnlargementContext {
    pub graph: Arc<WGraphPresentation>,
    pub presentations: BTreeMap<String, Hp>,
    engine: DistanceEngine,
    memo: Mutex<HashMap<(Hp, Hp, u64), ClassPolys>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextFile {
    graph: WGraphPresentation,
    #[serde(default)]
    presentations: BTreeMap<String, String>,
}

impl EnlargementContext {
    pub fn new(graph: WGraphPresentation) -> Self {
        let graph = Arc::new(graph);
        EnlargementContext {
            engine: DistanceEngine::shared(graph.clone()),
            graph,
            presentations: BTreeMap::new(),
            memo: Mutex::new(HashMap::new()),
        }
    }

    /// Reads `{"graph": {...}, "presentations": {"name": "std(x)", ...}}`.
    pub fn from_json(text: &str) -> Result<Self, HyperError> {
        let file: ContextFile = serde_json::from_str(text).map_err(|e| HyperError::Json(e.to_string()))?;
        let mut ctx = EnlargementContext::new(file.graph);
        for (name, p) in file.presentations {
            ctx.add(&name, &p)?;
        }
        Ok(ctx)
    }

    pub fn add(&mut self, name: &str, text: &str) -> Result<Hp, HyperError> {
        let p = Hp::parse(text, &self.graph)?;
        self.presentations.insert(name.to_string(), p.clone());
        Ok(p)
    }

    /// A named presentation, or an inline one.
    pub fn lookup(&self, text: &str) -> Result<Hp, HyperError> {
        match self.presentations.get(text.trim()) {
            Some(p) => Ok(p.clone()),
            None if text.contains('(') => Hp::parse(text, &self.graph),
            None => Err(HyperError::UnknownName(text.to_string())),
        }
    }

    pub fn engine(&self) -> &DistanceEngine {
        &self.engine
    }

    pub fn check(&self, p: &Hp) -> Result<(), HyperError> {
        p.check(&self.graph)
    }
}

fn joint(ps: &[&Hp]) -> (u64, u64) {
    let m = ps.iter().fold(1, |m, p| lcm(m, p.modulus()));
    let start = ps.iter().map(|p| p.patch_end()).max().unwrap_or(0).div_ceil(m);
    (m, start)
}

/// Cofinite equality of the carried wnodes, up to identification.
pub fn equivalent(ctx: &EnlargementContext, p: &Hp, q: &Hp) -> Result<LimitVerdict, HyperError> {
    ctx.check(p)?;
    ctx.check(q)?;
    let (m, start) = joint(&[p, q]);
    let g = &ctx.graph;
    let mut per = Vec::new();
    for r in 0..m {
        let class = Residue { modulus: m, rem: r };
        // affine index maps agree either everywhere on a class or at one index at most
        let mut same = true;
        for k in [start + 8, start + 9] {
            let n = class.index(k);
            let (x, y) = (p.node_at(n)?, q.node_at(n)?);
            same &= ctx.engine.wdistance(&x, &y)?.is_zero() && g.rank_of(&x)? == g.rank_of(&y)? && same_node(g, &x, &y)?;
        }
        per.push((r, same.then_some(0)));
    }
    Ok(LimitVerdict::merge(m, &per))
}

fn same_node(g: &WGraphPresentation, x: &WNodeRef, y: &WNodeRef) -> Result<bool, HyperError> {
    let depth = [x, y].iter().map(|r| r.copy_index().map_or(0, |k| k + 1)).max().unwrap_or(0) + 2;
    let pos = [x, y].iter().map(|r| r.ray_position().unwrap_or(0)).max().unwrap_or(0);
    let u = crate::unroll::Unrolled::build(g, depth, g.ray_unit.max(1).max(pos));
    let (x, y) = (g.canonical_ray_start(x.clone()), g.canonical_ray_start(y.clone()));
    Ok(u.node_index(&x).is_some() && u.node_index(&x) == u.node_index(&y))
}

/// `n ↦ d(x_n, y_n)` per residue class, as a function of the class index `k`.
pub fn hyperdistance(ctx: &EnlargementContext, p: &Hp, q: &Hp) -> Result<ClassPolys, HyperError> {
    hyperdistance_mod(ctx, p, q, joint(&[p, q]).0)
}

/// As `hyperdistance`, on the classes of a multiple `m` of the joint modulus.
pub fn hyperdistance_mod(ctx: &EnlargementContext, p: &Hp, q: &Hp, m: u64) -> Result<ClassPolys, HyperError> {
    let key = (p.clone(), q.clone(), m);
    if let Some(v) = ctx.memo.lock().expect("memo lock").get(&key) {
        return Ok(v.clone());
    }
    ctx.check(p)?;
    ctx.check(q)?;
    let (base, _) = joint(&[p, q]);
    if !m.is_multiple_of(base) {
        return Err(HyperError::ContextMismatch(format!("modulus {m} is not a multiple of {base}")));
    }
    let start = p.patch_end().max(q.patch_end()).div_ceil(m);
    let mut out = Vec::new();
    for r in 0..m {
        let class = Residue { modulus: m, rem: r };
        let f = fit_affine_from(start, |k| {
            let n = class.index(k);
            let x = p.node_at(n).map_err(to_metric)?;
            let y = q.node_at(n).map_err(to_metric)?;
            ctx.engine.wdistance(&x, &y)
        })?;
        out.push((class, f));
    }
    ctx.memo.lock().expect("memo lock").insert(key, out.clone());
    Ok(out)
}

/// Joint modulus of several presentations.
pub fn joint_modulus(ps: &[&Hp]) -> u64 {
    joint(ps).0
}

fn to_metric(e: HyperError) -> MetricError {
    match e {
        HyperError::Metric(m) => m,
        HyperError::Graph(g) => MetricError::Graph(g),
        other => MetricError::FitFailure(other.to_string()),
    }
}

pub fn is_maximal_hypernode(ctx: &EnlargementContext, p: &Hp) -> Result<LimitVerdict, HyperError> {
    ctx.check(p)?;
    let (m, start) = joint(&[p]);
    let mut per = Vec::new();
    for r in 0..m {
        let class = Residue { modulus: m, rem: r };
        let mut all = true;
        for k in [start + 8, start + 9] {
            all &= ctx.graph.is_maximal(&p.node_at(class.index(k))?)?;
        }
        per.push((r, all.then_some(0)));
    }
    Ok(LimitVerdict::merge(m, &per))
}

pub fn limitedly_distant(ctx: &EnlargementContext, p: &Hp, q: &Hp, rho: ExtRank) -> Result<LimitVerdict, HyperError> {
    // the ω⃗ threshold `< ω^ω` is meaningful on graphs of every rank
    if rho > ctx.graph.rank && rho != ExtRank::ArrowOmega {
        return Err(HyperError::RankAboveGraph(rho));
    }
    let polys = hyperdistance(ctx, p, q)?;
    let m = polys.first().map_or(1, |(c, _)| c.modulus);
    let per: Vec<(u64, Option<u64>)> = polys
        .iter()
        .map(|(c, f)| {
            (c.rem, match f.growth_class(rho) {
                GrowthClass::BoundedBy(mu) => Some(mu),
                GrowthClass::Unbounded => None,
            })
        })
        .collect();
    Ok(LimitVerdict::merge(m, &per))
}

/// Samples `d(x_n,z_n) ≤ d(x_n,y_n) ⊕ d(y_n,z_n)` for `n < samples`.
pub fn triangle_check(ctx: &EnlargementContext, p: &Hp, q: &Hp, r: &Hp, samples: u64) -> Result<bool, HyperError> {
    for h in [p, q, r] {
        if !is_maximal_hypernode(ctx, h)?.is_yes() {
            return Err(HyperError::NotMaximal(h.to_string()));
        }
    }
    let e = &ctx.engine;
    for n in 0..samples {
        let (x, y, z) = (p.node_at(n)?, q.node_at(n)?, r.node_at(n)?);
        if e.wdistance(&x, &z)? > nat_sum(&e.wdistance(&x, &y)?, &e.wdistance(&y, &z)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An arm-indexed presentation through the given nodes, when they share an
/// arm and a local id and their copy indices are affine in position.
pub fn from_sequence(nodes: &[WNodeRef]) -> Option<Hp> {
    let parts: Vec<(String, u64, String)> = nodes
        .iter()
        .map(|r| match r {
            WNodeRef::Arm { arm, copy, id } => Some((arm.clone(), *copy, id.clone())),
            WNodeRef::Ray { owner: crate::wgraph::Owner::Arm { arm, copy }, ray, pos } => {
                Some((arm.clone(), *copy, format!("{ray}@{pos}")))
            }
            _ => None,
        })
        .collect::<Option<_>>()?;
    let (arm, first, local) = parts.first()?.clone();
    if parts.iter().any(|(a, _, l)| *a != arm || *l != local) {
        return None;
    }
    let step = match parts.get(1) {
        Some(p) => p.1.checked_sub(first)?,
        None => 0,
    };
    if parts.iter().enumerate().any(|(i, p)| p.1 != first + step * i as u64) {
        return None;
    }
    Some(Hp::ArmIndexed(ArmPattern { arm, map: IndexMap::affine(step, first), local }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(name: &str) -> EnlargementContext {
        let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
        EnlargementContext::new(WGraphPresentation::from_json(&std::fs::read_to_string(path).unwrap()).unwrap())
    }

    fn hp(c: &EnlargementContext, s: &str) -> Hp {
        Hp::parse(s, &c.graph).unwrap()
    }

    #[test]
    fn syntax_round_trips() {
        let c = ctx("ladder");
        for s in [
            "std(ladder[1].x)",
            "arm(ladder, 2, 1, x)",
            "arm(ladder, 1, 0, x, 2, 1)",
            "interleave(2, std(ladder[0].x), arm(ladder, 1, 0, x))",
            "patch(arm(ladder, 1, 0, x), {3: ladder[0].x, 7: ladder[1].x})",
        ] {
            assert_eq!(hp(&c, s).to_string(), s);
        }
        assert_eq!(hp(&c, "std(x1)"), hp(&c, "std(ladder[1].x)"));
        assert!(Hp::parse("arm(nope, 1, 0, x)", &c.graph).is_err());
        assert!(Hp::parse("interleave(2, std(x1))", &c.graph).is_err());
        assert!(Hp::parse("std(x1", &c.graph).is_err());
    }

    #[test]
    fn equivalence_verdicts() {
        let c = ctx("ladder");
        let p = hp(&c, "arm(ladder, 1, 0, x)");
        let patched = hp(&c, "patch(arm(ladder, 1, 0, x), {3: x0})");
        assert_eq!(equivalent(&c, &p, &patched).unwrap(), LimitVerdict::Yes(0));
        assert_eq!(equivalent(&c, &hp(&c, "std(x1)"), &hp(&c, "std(x2)")).unwrap(), LimitVerdict::No);
        let q = hp(&c, "arm(ladder, 1, 1, x)");
        let mix = Hp::Interleave(vec![p.clone(), q]);
        let even = Residue { modulus: 2, rem: 0 };
        let odd = Residue { modulus: 2, rem: 1 };
        assert_eq!(equivalent(&c, &mix, &p).unwrap(), LimitVerdict::UltrafilterDependent(vec![(even, true), (odd, false)]));
    }

    #[test]
    fn hyperdistances() {
        let c = ctx("ladder");
        let x0 = hp(&c, "std(x0)");
        let xn = hp(&c, "arm(ladder, 1, 0, x)");
        let d = hyperdistance(&c, &x0, &xn).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].1.to_string(), "w*(n)");
        assert!(hyperdistance(&c, &xn, &xn).unwrap()[0].1.is_zero());
        let d13 = hyperdistance(&c, &hp(&c, "std(x1)"), &hp(&c, "std(x3)")).unwrap();
        assert_eq!(d13[0].1.evaluate(100).unwrap().to_string(), "w*2");
    }

    #[test]
    fn maximality_verdicts() {
        let c = ctx("ladder");
        let xn = hp(&c, "arm(ladder, 1, 0, x)");
        let starts = hp(&c, "arm(ladder, 1, 0, P@0)");
        assert_eq!(is_maximal_hypernode(&c, &xn).unwrap(), LimitVerdict::Yes(0));
        assert_eq!(is_maximal_hypernode(&c, &starts).unwrap(), LimitVerdict::No);
        let mix = Hp::Interleave(vec![xn, starts]);
        assert!(matches!(is_maximal_hypernode(&c, &mix).unwrap(), LimitVerdict::UltrafilterDependent(_)));
    }

    #[test]
    fn limited_distance() {
        let c = ctx("ladder");
        let (x0, x1, x3) = (hp(&c, "std(x0)"), hp(&c, "std(x1)"), hp(&c, "std(x3)"));
        let xn = hp(&c, "arm(ladder, 1, 0, x)");
        assert_eq!(limitedly_distant(&c, &x1, &x3, ExtRank::Fin(1)).unwrap(), LimitVerdict::Yes(2));
        assert_eq!(limitedly_distant(&c, &x0, &xn, ExtRank::Fin(1)).unwrap(), LimitVerdict::No);
        assert_eq!(limitedly_distant(&c, &x0, &xn, ExtRank::ArrowOmega).unwrap(), LimitVerdict::Yes(2));
        assert_eq!(limitedly_distant(&c, &x0, &xn, ExtRank::Fin(2)), Err(HyperError::RankAboveGraph(ExtRank::Fin(2))));
    }

    #[test]
    fn triangles() {
        let c = ctx("ladder");
        let (a, b, d) = (hp(&c, "std(x0)"), hp(&c, "arm(ladder, 1, 0, x)"), hp(&c, "arm(ladder, 2, 0, x)"));
        assert!(triangle_check(&c, &a, &b, &d, 8).unwrap());
        assert!(triangle_check(&c, &a, &a, &a, 3).unwrap());
        let p = ctx("path5");
        let (u, v, w) = (hp(&p, "std(a)"), hp(&p, "std(c)"), hp(&p, "std(e)"));
        assert!(triangle_check(&p, &u, &v, &w, 2).unwrap());
    }

    #[test]
    fn sequences_to_presentations() {
        let seq: Vec<WNodeRef> = (1..4).map(|k| format!("ladder[{k}].x").parse().unwrap()).collect();
        assert_eq!(from_sequence(&seq).unwrap().to_string(), "arm(ladder, 1, 1, x)");
        assert!(from_sequence(&[WNodeRef::Core("a".into())]).is_none());
    }
}
