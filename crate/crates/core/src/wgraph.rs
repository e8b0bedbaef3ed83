//! Finite presentations of transfinite wgraphs of rank at most ω.
//!
//! A presentation is a finite core block plus any number of one-ended arms.
//! An arm repeats its cell for copies 0, 1, 2, …; the gluing map links the
//! right ports of copy k with the left ports of copy k+1, and the attach
//! map links core elements with the left ports of copy 0. A link between
//! two nodes of equal rank identifies them, a link between nodes of
//! different rank makes the higher one embrace the lower one, and a link
//! between a ray and a node makes the node collect the ray's 0-wtip.
//!
//! Node references are written `x` (core), `arm[k].x` (copy k of an arm),
//! `P@5` or `arm[k].P@5` (position 5 of a ray; position 0 is the ray's
//! start node).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ordinal::ExtRank;
use crate::unroll::Unrolled;

pub const DEFAULT_RAY_UNIT: u64 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WGraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown arm `{0}`")]
    UnknownArm(String),
    #[error("unroll depth must be at least 1")]
    DepthZero,
    #[error("malformed node reference `{0}`")]
    BadReference(String),
    #[error("invalid presentation: {0}")]
    Invalid(String),
    #[error("presentation file: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Owner {
    Core,
    Arm { arm: String, copy: u64 },
}

impl Owner {
    fn prefix(&self) -> String {
        match self {
            Owner::Core => String::new(),
            Owner::Arm { arm, copy } => format!("{arm}[{copy}]."),
        }
    }

    pub fn copy(&self) -> Option<u64> {
        match self {
            Owner::Core => None,
            Owner::Arm { copy, .. } => Some(*copy),
        }
    }
}

/// A single wnode of a presentation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WNodeRef {
    Core(String),
    Arm { arm: String, copy: u64, id: String },
    Ray { owner: Owner, ray: String, pos: u64 },
}

impl WNodeRef {
    pub fn owner(&self) -> Owner {
        match self {
            WNodeRef::Core(_) => Owner::Core,
            WNodeRef::Arm { arm, copy, .. } => Owner::Arm { arm: arm.clone(), copy: *copy },
            WNodeRef::Ray { owner, .. } => owner.clone(),
        }
    }

    /// Highest arm copy index this reference touches.
    pub fn copy_index(&self) -> Option<u64> {
        self.owner().copy()
    }

    pub fn ray_position(&self) -> Option<u64> {
        match self {
            WNodeRef::Ray { pos, .. } => Some(*pos),
            _ => None,
        }
    }

    pub(crate) fn in_owner(owner: &Owner, id: &str) -> WNodeRef {
        match owner {
            Owner::Core => WNodeRef::Core(id.to_string()),
            Owner::Arm { arm, copy } => WNodeRef::Arm { arm: arm.clone(), copy: *copy, id: id.to_string() },
        }
    }
}

impl fmt::Display for WNodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WNodeRef::Core(id) => f.write_str(id),
            WNodeRef::Arm { arm, copy, id } => write!(f, "{arm}[{copy}].{id}"),
            WNodeRef::Ray { owner, ray, pos } => write!(f, "{}{ray}@{pos}", owner.prefix()),
        }
    }
}

pub(crate) fn valid_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '\''))
}

impl FromStr for WNodeRef {
    type Err = WGraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || WGraphError::BadReference(s.to_string());
        let s = s.trim();
        let (owner, rest) = match s.find('[') {
            Some(open) => {
                let close = s[open..].find("].").map(|i| open + i).ok_or_else(bad)?;
                let arm = &s[..open];
                let copy = s[open + 1..close].parse::<u64>().map_err(|_| bad())?;
                if !valid_id(arm) {
                    return Err(bad());
                }
                (Owner::Arm { arm: arm.to_string(), copy }, &s[close + 2..])
            }
            None => (Owner::Core, s),
        };
        match rest.split_once('@') {
            Some((ray, pos)) => {
                let pos = pos.parse::<u64>().map_err(|_| bad())?;
                if !valid_id(ray) {
                    return Err(bad());
                }
                Ok(WNodeRef::Ray { owner, ray: ray.to_string(), pos })
            }
            None if valid_id(rest) => Ok(WNodeRef::in_owner(&owner, rest)),
            None => Err(bad()),
        }
    }
}

/// A branch or ray of a block, located in the core or in one arm copy.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElemRef {
    pub owner: Owner,
    pub id: String,
}

impl fmt::Display for ElemRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.owner.prefix(), self.id)
    }
}

/// Identifier of the i-th branch of a block.
pub fn branch_id(i: usize) -> String {
    format!("#{i}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WNodeDecl {
    pub id: String,
    pub rank: ExtRank,
    /// Lower-rank nodes of the same block.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub embraces: Vec<String>,
    /// Rays of the same block whose 0-wtips this node collects.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tips: Vec<String>,
}

/// A primitive one-way infinite 0-path starting at a 0-node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayDecl {
    pub id: String,
    pub start: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<WNodeDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub branches: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rays: Vec<RayDecl>,
}

impl Block {
    /// Declared nodes plus the implicit 0-nodes named by branches and rays.
    pub fn node_ranks(&self) -> BTreeMap<String, ExtRank> {
        let mut out = BTreeMap::new();
        for b in &self.branches {
            for end in b {
                out.insert(end.clone(), ExtRank::Fin(0));
            }
        }
        for r in &self.rays {
            out.insert(r.start.clone(), ExtRank::Fin(0));
        }
        for n in &self.nodes {
            out.insert(n.id.clone(), n.rank);
        }
        out
    }

    pub fn ray(&self, id: &str) -> Option<&RayDecl> {
        self.rays.iter().find(|r| r.id == id)
    }

    pub fn node(&self, id: &str) -> Option<&WNodeDecl> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Branch ids `#i` and ray ids.
    pub fn element_ids(&self) -> Vec<String> {
        (0..self.branches.len()).map(branch_id).chain(self.rays.iter().map(|r| r.id.clone())).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arm {
    pub id: String,
    pub cell: Block,
    /// Right port of copy k ↦ left port of copy k+1.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub gluing: BTreeMap<String, String>,
    /// Core element ↦ left port of copy 0.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attach: BTreeMap<String, String>,
    /// Core-level wnode collecting the arm's wtip.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apex: Option<WNodeDecl>,
}

impl Arm {
    /// Rank of the arm's wtip: one below the apex rank, ω⃗ under an ω⃗ or ω apex.
    pub fn tip_rank(&self) -> Option<ExtRank> {
        self.apex.as_ref().map(|a| match a.rank {
            ExtRank::Fin(k) => ExtRank::Fin(k.saturating_sub(1)),
            _ => ExtRank::ArrowOmega,
        })
    }

    pub fn left_ports(&self) -> BTreeSet<&str> {
        self.gluing.values().map(String::as_str).chain(self.attach.values().map(String::as_str)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WGraphPresentation {
    pub rank: ExtRank,
    pub core: Block,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arms: Vec<Arm>,
    /// Short names for node references, e.g. `"x3": "ladder[3].x"`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub aliases: BTreeMap<String, String>,
    #[serde(default = "default_ray_unit")]
    pub ray_unit: u64,
}

fn default_ray_unit() -> u64 {
    DEFAULT_RAY_UNIT
}

impl WGraphPresentation {
    pub fn from_json(text: &str) -> Result<Self, WGraphError> {
        serde_json::from_str(text).map_err(|e| WGraphError::Json(e.to_string()))
    }

    pub fn arm(&self, id: &str) -> Option<&Arm> {
        self.arms.iter().find(|a| a.id == id)
    }

    pub fn arm_index(&self, id: &str) -> Option<usize> {
        self.arms.iter().position(|a| a.id == id)
    }

    /// Core nodes, including arm apexes.
    pub fn core_node_ranks(&self) -> BTreeMap<String, ExtRank> {
        let mut out = self.core.node_ranks();
        for a in &self.arms {
            if let Some(apex) = &a.apex {
                out.insert(apex.id.clone(), apex.rank);
            }
        }
        out
    }

    pub fn core_decl(&self, id: &str) -> Option<&WNodeDecl> {
        self.core.node(id).or_else(|| self.arms.iter().filter_map(|a| a.apex.as_ref()).find(|n| n.id == id))
    }

    /// Resolves an alias or parses a reference, then checks it exists.
    pub fn resolve(&self, text: &str) -> Result<WNodeRef, WGraphError> {
        let text = self.aliases.get(text.trim()).map(String::as_str).unwrap_or(text);
        let r: WNodeRef = text.parse()?;
        self.rank_of(&r)?;
        Ok(self.canonical_ray_start(r))
    }

    /// Position 0 of a ray is its start node.
    pub fn canonical_ray_start(&self, r: WNodeRef) -> WNodeRef {
        if let WNodeRef::Ray { owner, ray, pos: 0 } = &r {
            let block = match owner {
                Owner::Core => Some(&self.core),
                Owner::Arm { arm, .. } => self.arm(arm).map(|a| &a.cell),
            };
            if let Some(decl) = block.and_then(|b| b.ray(ray)) {
                return WNodeRef::in_owner(owner, &decl.start);
            }
        }
        r
    }

    pub fn rank_of(&self, r: &WNodeRef) -> Result<ExtRank, WGraphError> {
        let unknown = || WGraphError::UnknownNode(r.to_string());
        match r {
            WNodeRef::Core(id) => self.core_node_ranks().get(id).copied().ok_or_else(unknown),
            WNodeRef::Arm { arm, id, .. } => {
                let a = self.arm(arm).ok_or_else(|| WGraphError::UnknownArm(arm.clone()))?;
                a.cell.node_ranks().get(id).copied().ok_or_else(unknown)
            }
            WNodeRef::Ray { owner, ray, .. } => {
                let block = match owner {
                    Owner::Core => &self.core,
                    Owner::Arm { arm, .. } => &self.arm(arm).ok_or_else(|| WGraphError::UnknownArm(arm.clone()))?.cell,
                };
                block.ray(ray).map(|_| ExtRank::Fin(0)).ok_or_else(unknown)
            }
        }
    }

    /// Highest rank carried by any node of the arm's cell.
    pub fn cell_rank(arm: &Arm) -> ExtRank {
        arm.cell.node_ranks().values().copied().max().unwrap_or(ExtRank::Fin(0))
    }

    pub fn unroll(&self, depth: u64) -> Result<Unrolled, WGraphError> {
        if depth == 0 {
            return Err(WGraphError::DepthZero);
        }
        Ok(Unrolled::build(self, depth, self.ray_unit.max(1)))
    }

    /// Whether no wnode embraces `x`, directly or through a link.
    pub fn is_maximal(&self, x: &WNodeRef) -> Result<bool, WGraphError> {
        self.rank_of(x)?;
        let x = self.canonical_ray_start(x.clone());
        let depth = x.copy_index().map_or(2, |k| k + 2);
        let u = Unrolled::build(self, depth, self.ray_unit.max(1).max(x.ray_position().unwrap_or(0)));
        let idx = u.node_index(&x).ok_or_else(|| WGraphError::UnknownNode(x.to_string()))?;
        Ok(u.parent_of(idx).is_none())
    }

    /// All invariant violations; empty when the presentation is sound.
    pub fn validate(&self) -> Vec<Violation> {
        crate::unroll::validate(self)
    }
}

/// One failed presentation invariant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    NonemptyRankViolation { rank: String },
    BranchNotTwoElement { at: String },
    UnknownReference { at: String, id: String },
    DuplicateId { at: String, id: String },
    InvalidId { id: String },
    RankAboveGraph { node: String, rank: String },
    EmbraceRankViolation { node: String, embraced: String },
    MultipleEmbracers { node: String },
    MissingLowerTip { node: String },
    InvalidLink { at: String, from: String, to: String },
    GluingNotBijection { arm: String },
    NonUniformGluing { arm: String, rank: String },
    CrossCopyIdentification { arm: String },
    ApexRank { arm: String },
    NotWconnected { detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonemptyRankViolation { rank } => write!(f, "no wnode of rank {rank}"),
            Violation::BranchNotTwoElement { at } => write!(f, "branch {at} is not a two-element set"),
            Violation::UnknownReference { at, id } => write!(f, "{at}: unknown id `{id}`"),
            Violation::DuplicateId { at, id } => write!(f, "{at}: duplicate id `{id}`"),
            Violation::InvalidId { id } => write!(f, "invalid id `{id}`"),
            Violation::RankAboveGraph { node, rank } => write!(f, "{node} has rank {rank} above the graph rank"),
            Violation::EmbraceRankViolation { node, embraced } => {
                write!(f, "{node} embraces {embraced} of equal or higher rank")
            }
            Violation::MultipleEmbracers { node } => write!(f, "{node} is embraced by two distinct wnodes"),
            Violation::MissingLowerTip { node } => write!(f, "{node} holds no wtip of the rank just below its own"),
            Violation::InvalidLink { at, from, to } => write!(f, "{at}: cannot link `{from}` with `{to}`"),
            Violation::GluingNotBijection { arm } => write!(f, "arm {arm}: gluing is not a bijection"),
            Violation::NonUniformGluing { arm, rank } => {
                write!(f, "arm {arm}: gluing links different local {rank}-components")
            }
            Violation::CrossCopyIdentification { arm } => {
                write!(f, "arm {arm}: a left and a right port lie in one embrace tree")
            }
            Violation::ApexRank { arm } => write!(f, "arm {arm}: apex rank must exceed every cell rank"),
            Violation::NotWconnected { detail } => write!(f, "not wconnected: {detail}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_syntax_round_trips() {
        for s in ["x0", "ladder[3].x", "P0@5", "ladder[2].P@17"] {
            assert_eq!(s.parse::<WNodeRef>().unwrap().to_string(), s);
        }
        for bad in ["", "a[b].x", "a[1]x", "P@", "x y", "arm[2]."] {
            assert!(bad.parse::<WNodeRef>().is_err(), "{bad}");
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = WGraphPresentation::from_json(r#"{"rank":0,"core":{},"extra":1}"#).unwrap_err();
        assert!(matches!(err, WGraphError::Json(_)));
        let err = WGraphPresentation::from_json(r#"{"rank":"omega2","core":{}}"#).unwrap_err();
        assert!(matches!(err, WGraphError::Json(_)));
    }
}
