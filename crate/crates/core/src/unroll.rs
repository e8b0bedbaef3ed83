//! Explicit finite truncations of a presentation.
//!
//! `Unrolled` materializes the core, arm copies `0..depth`, the left-port
//! nodes of copy `depth` (stubs, the gateways into the untruncated part)
//! and ray positions `0..=ray_len`. Linked nodes of equal rank are merged;
//! each merged class is represented by its first materialized member.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use petgraph::unionfind::UnionFind;

use crate::ordinal::ExtRank;
use crate::wgraph::{branch_id, valid_id, Block, ElemRef, Owner, Violation, WGraphPresentation, WNodeRef};

#[derive(Debug, Clone)]
pub struct NodeInfo {
    pub r: WNodeRef,
    pub rank: ExtRank,
    pub stub: bool,
}

#[derive(Debug, Clone)]
pub struct BranchInfo {
    pub elem: ElemRef,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone)]
pub struct RayInfo {
    pub elem: ElemRef,
    /// Node indices for positions `0..=ray_len`.
    pub nodes: Vec<usize>,
    pub collector: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ArmTip {
    pub arm: String,
    pub apex: usize,
    pub tip_rank: ExtRank,
    /// Every materialized node of the arm, stubs and ray positions included.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Handle {
    Node(usize),
    Ray(usize),
}

#[derive(Debug, Clone)]
pub struct Unrolled {
    pub depth: u64,
    pub ray_len: u64,
    pub nodes: Vec<NodeInfo>,
    pub branches: Vec<BranchInfo>,
    pub rays: Vec<RayInfo>,
    pub arm_tips: Vec<ArmTip>,
    index: HashMap<WNodeRef, usize>,
    canon: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    collects: Vec<Vec<usize>>,
    problems: Vec<Violation>,
}

fn block_of<'a>(g: &'a WGraphPresentation, owner: &Owner) -> &'a Block {
    match owner {
        Owner::Core => &g.core,
        Owner::Arm { arm, .. } => &g.arm(arm).expect("owner arm exists").cell,
    }
}

impl Unrolled {
    pub fn build(g: &WGraphPresentation, depth: u64, ray_len: u64) -> Unrolled {
        let mut u = Unrolled {
            depth,
            ray_len,
            nodes: Vec::new(),
            branches: Vec::new(),
            rays: Vec::new(),
            arm_tips: Vec::new(),
            index: HashMap::new(),
            canon: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
            collects: Vec::new(),
            problems: Vec::new(),
        };
        let mut ray_index: HashMap<ElemRef, usize> = HashMap::new();
        let mut owners = vec![Owner::Core];
        for arm in &g.arms {
            owners.extend((0..depth).map(|copy| Owner::Arm { arm: arm.id.clone(), copy }));
        }

        for owner in &owners {
            let ranks = match owner {
                Owner::Core => g.core_node_ranks(),
                _ => block_of(g, owner).node_ranks(),
            };
            for (id, rank) in ranks {
                u.push_node(WNodeRef::in_owner(owner, &id), rank, false);
            }
        }
        for arm in &g.arms {
            let ranks = arm.cell.node_ranks();
            let owner = Owner::Arm { arm: arm.id.clone(), copy: depth };
            for port in arm.gluing.values() {
                if let Some(&rank) = ranks.get(port) {
                    u.push_node(WNodeRef::in_owner(&owner, port), rank, true);
                }
            }
        }
        for owner in &owners {
            let block = block_of(g, owner);
            for ray in &block.rays {
                let Some(&start) = u.index.get(&WNodeRef::in_owner(owner, &ray.start)) else { continue };
                let mut nodes = vec![start];
                for pos in 1..=ray_len {
                    let r = WNodeRef::Ray { owner: owner.clone(), ray: ray.id.clone(), pos };
                    nodes.push(u.push_node(r, ExtRank::Fin(0), false));
                }
                let elem = ElemRef { owner: owner.clone(), id: ray.id.clone() };
                ray_index.insert(elem.clone(), u.rays.len());
                u.rays.push(RayInfo { elem, nodes, collector: None });
            }
            for (i, b) in block.branches.iter().enumerate() {
                if b.len() != 2 || b[0] == b[1] {
                    continue;
                }
                let ends: Vec<_> =
                    b.iter().filter_map(|id| u.index.get(&WNodeRef::in_owner(owner, id)).copied()).collect();
                if ends.len() == 2 {
                    u.branches.push(BranchInfo {
                        elem: ElemRef { owner: owner.clone(), id: branch_id(i) },
                        a: ends[0],
                        b: ends[1],
                    });
                }
            }
        }

        let resolve = |u: &Unrolled, owner: &Owner, id: &str| -> Option<Handle> {
            if let Some(&i) = u.index.get(&WNodeRef::in_owner(owner, id)) {
                return Some(Handle::Node(i));
            }
            ray_index.get(&ElemRef { owner: owner.clone(), id: id.to_string() }).map(|&r| Handle::Ray(r))
        };

        // (parent, child) embraces and (collector, ray) tip collections
        let mut embraces: Vec<(usize, usize)> = Vec::new();
        let mut collects: Vec<(usize, usize)> = Vec::new();
        let mut identify: Vec<(usize, usize)> = Vec::new();

        let mut decls: Vec<(Owner, &crate::wgraph::WNodeDecl)> = Vec::new();
        for owner in &owners {
            for n in &block_of(g, owner).nodes {
                decls.push((owner.clone(), n));
            }
        }
        for arm in &g.arms {
            if let Some(apex) = &arm.apex {
                decls.push((Owner::Core, apex));
            }
        }
        for (owner, n) in decls {
            let Some(Handle::Node(me)) = resolve(&u, &owner, &n.id) else { continue };
            for e in &n.embraces {
                if let Some(Handle::Node(c)) = resolve(&u, &owner, e) {
                    embraces.push((me, c));
                }
            }
            for t in &n.tips {
                if let Some(Handle::Ray(r)) = resolve(&u, &owner, t) {
                    collects.push((me, r));
                }
            }
        }

        let mut link = |u: &mut Unrolled, at: String, a: Option<Handle>, b: Option<Handle>, an: &str, bn: &str| {
            let (Some(a), Some(b)) = (a, b) else { return };
            match (a, b) {
                (Handle::Node(x), Handle::Node(y)) => {
                    let (rx, ry) = (u.nodes[x].rank, u.nodes[y].rank);
                    if rx == ry {
                        identify.push((x, y));
                    } else if rx > ry {
                        embraces.push((x, y));
                    } else {
                        embraces.push((y, x));
                    }
                }
                (Handle::Node(x), Handle::Ray(r)) | (Handle::Ray(r), Handle::Node(x)) => {
                    if u.nodes[x].rank == ExtRank::Fin(0) {
                        u.problems.push(Violation::InvalidLink { at, from: an.into(), to: bn.into() });
                    } else {
                        collects.push((x, r));
                    }
                }
                (Handle::Ray(_), Handle::Ray(_)) => {
                    u.problems.push(Violation::InvalidLink { at, from: an.into(), to: bn.into() });
                }
            }
        };
        for arm in &g.arms {
            for copy in 0..depth {
                let here = Owner::Arm { arm: arm.id.clone(), copy };
                let next = Owner::Arm { arm: arm.id.clone(), copy: copy + 1 };
                for (right, left) in &arm.gluing {
                    let a = resolve(&u, &here, right);
                    let b = resolve(&u, &next, left);
                    link(&mut u, format!("arm {} gluing", arm.id), a, b, right, left);
                }
            }
            let first = Owner::Arm { arm: arm.id.clone(), copy: 0 };
            for (core, left) in &arm.attach {
                let a = resolve(&u, &Owner::Core, core);
                let b = resolve(&u, &first, left);
                link(&mut u, format!("arm {} attach", arm.id), a, b, core, left);
            }
        }

        let n = u.nodes.len();
        let mut uf = UnionFind::<usize>::new(n);
        for &(x, y) in &identify {
            uf.union(x, y);
        }
        let mut least: HashMap<usize, usize> = HashMap::new();
        for i in 0..n {
            least.entry(uf.find(i)).or_insert(i);
        }
        u.canon = (0..n).map(|i| least[&uf.find(i)]).collect();
        u.parent = vec![None; n];
        u.children = vec![Vec::new(); n];
        u.collects = vec![Vec::new(); n];

        for (p, c) in embraces {
            let (p, c) = (u.canon[p], u.canon[c]);
            if u.nodes[p].rank <= u.nodes[c].rank {
                u.problems.push(Violation::EmbraceRankViolation {
                    node: u.nodes[p].r.to_string(),
                    embraced: u.nodes[c].r.to_string(),
                });
                continue;
            }
            match u.parent[c] {
                Some(q) if q == p => {}
                Some(_) => u.problems.push(Violation::MultipleEmbracers { node: u.nodes[c].r.to_string() }),
                None => {
                    u.parent[c] = Some(p);
                    u.children[p].push(c);
                }
            }
        }
        for (x, r) in collects {
            let x = u.canon[x];
            match u.rays[r].collector {
                Some(y) if y == x => {}
                Some(_) => u.problems.push(Violation::MultipleEmbracers { node: u.rays[r].elem.to_string() }),
                None => {
                    u.rays[r].collector = Some(x);
                    u.collects[x].push(r);
                }
            }
        }
        for ray in &mut u.rays {
            for v in &mut ray.nodes {
                *v = u.canon[*v];
            }
        }
        for b in &mut u.branches {
            b.a = u.canon[b.a];
            b.b = u.canon[b.b];
        }

        for arm in &g.arms {
            let Some(apex) = &arm.apex else { continue };
            let Some(&apex_idx) = u.index.get(&WNodeRef::Core(apex.id.clone())) else { continue };
            let members: BTreeSet<usize> = u
                .nodes
                .iter()
                .enumerate()
                .filter(|(_, info)| matches!(info.r.owner(), Owner::Arm { arm: ref a, .. } if *a == arm.id))
                .map(|(i, _)| u.canon[i])
                .collect();
            u.arm_tips.push(ArmTip {
                arm: arm.id.clone(),
                apex: u.canon[apex_idx],
                tip_rank: arm.tip_rank().expect("apex present"),
                members: members.into_iter().collect(),
            });
        }
        u
    }

    fn push_node(&mut self, r: WNodeRef, rank: ExtRank, stub: bool) -> usize {
        if let Some(&i) = self.index.get(&r) {
            return i;
        }
        let i = self.nodes.len();
        self.index.insert(r.clone(), i);
        self.nodes.push(NodeInfo { r, rank, stub });
        i
    }

    /// Canonical index of a materialized node.
    pub fn node_index(&self, r: &WNodeRef) -> Option<usize> {
        self.index.get(r).map(|&i| self.canon[i])
    }

    pub fn is_canonical(&self, i: usize) -> bool {
        self.canon[i] == i
    }

    pub fn canonical_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.canon[i] == i)
    }

    pub fn parent_of(&self, i: usize) -> Option<usize> {
        self.parent[self.canon[i]]
    }

    pub fn children_of(&self, i: usize) -> &[usize] {
        &self.children[self.canon[i]]
    }

    /// Rays whose 0-wtips node `i` collects directly.
    pub fn collected_rays(&self, i: usize) -> &[usize] {
        &self.collects[self.canon[i]]
    }

    pub fn rank(&self, i: usize) -> ExtRank {
        self.nodes[i].rank
    }

    pub fn node_ref(&self, i: usize) -> &WNodeRef {
        &self.nodes[self.canon[i]].r
    }

    /// The maximal wnode embracing `i`.
    pub fn root(&self, i: usize) -> usize {
        let mut v = self.canon[i];
        while let Some(p) = self.parent[v] {
            v = p;
        }
        v
    }

    /// Highest embracer of `i` whose rank does not exceed `rho`.
    pub fn root_at(&self, i: usize, rho: ExtRank) -> usize {
        let mut v = self.canon[i];
        while let Some(p) = self.parent[v] {
            if self.nodes[p].rank > rho {
                break;
            }
            v = p;
        }
        v
    }

    /// `i` and everything it embraces, transitively.
    pub fn subtree(&self, i: usize) -> Vec<usize> {
        let mut out = vec![self.canon[i]];
        let mut k = 0;
        while k < out.len() {
            out.extend(self.children[out[k]].iter().copied());
            k += 1;
        }
        out
    }

    pub fn problems(&self) -> &[Violation] {
        &self.problems
    }

    /// Components of canonical nodes connected by walks through wnodes of
    /// rank at most `rho`. Arm apexes join only when `with_apex` holds.
    pub fn components(&self, rho: ExtRank, with_apex: bool) -> UnionFind<usize> {
        let mut uf = UnionFind::<usize>::new(self.nodes.len());
        for i in self.canonical_nodes() {
            if let Some(p) = self.parent[i] {
                if self.nodes[p].rank <= rho {
                    uf.union(i, p);
                }
            }
        }
        for b in &self.branches {
            uf.union(b.a, b.b);
        }
        for ray in &self.rays {
            for w in ray.nodes.windows(2) {
                uf.union(w[0], w[1]);
            }
            if let Some(c) = ray.collector {
                if self.nodes[c].rank <= rho {
                    uf.union(ray.nodes[0], c);
                }
            }
        }
        if with_apex {
            for tip in &self.arm_tips {
                if self.nodes[tip.apex].rank <= rho {
                    for &m in &tip.members {
                        uf.union(tip.apex, m);
                    }
                }
            }
        }
        uf
    }
}


/// Local components of an arm cell at rank `rho`, labelled by node id and
/// ray id.
fn cell_components(block: &Block, rho: ExtRank) -> BTreeMap<String, usize> {
    let ranks = block.node_ranks();
    let mut names: Vec<String> = ranks.keys().cloned().collect();
    names.extend(block.rays.iter().map(|r| r.id.clone()));
    let pos: HashMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut uf = UnionFind::<usize>::new(names.len());
    for b in &block.branches {
        if let [x, y] = b.as_slice() {
            if let (Some(&i), Some(&j)) = (pos.get(x.as_str()), pos.get(y.as_str())) {
                uf.union(i, j);
            }
        }
    }
    for r in &block.rays {
        if let (Some(&i), Some(&j)) = (pos.get(r.id.as_str()), pos.get(r.start.as_str())) {
            uf.union(i, j);
        }
    }
    for n in &block.nodes {
        if n.rank > rho {
            continue;
        }
        let Some(&me) = pos.get(n.id.as_str()) else { continue };
        for other in n.embraces.iter().chain(&n.tips) {
            if let Some(&j) = pos.get(other.as_str()) {
                uf.union(me, j);
            }
        }
    }
    names.iter().enumerate().map(|(i, s)| (s.clone(), uf.find(i))).collect()
}

pub(crate) fn validate(g: &WGraphPresentation) -> Vec<Violation> {
    let mut out = Vec::new();
    let nu = g.rank;

    let mut blocks: Vec<(String, &Block)> = vec![("core".into(), &g.core)];
    blocks.extend(g.arms.iter().map(|a| (format!("arm {}", a.id), &a.cell)));

    let mut arm_ids = BTreeSet::new();
    for a in &g.arms {
        if !valid_id(&a.id) {
            out.push(Violation::InvalidId { id: a.id.clone() });
        }
        if !arm_ids.insert(a.id.as_str()) {
            out.push(Violation::DuplicateId { at: "arms".into(), id: a.id.clone() });
        }
    }

    for (at, block) in &blocks {
        let mut seen = BTreeSet::new();
        for n in &block.nodes {
            if !seen.insert(n.id.clone()) {
                out.push(Violation::DuplicateId { at: at.clone(), id: n.id.clone() });
            }
        }
        for r in &block.rays {
            if !seen.insert(r.id.clone()) {
                out.push(Violation::DuplicateId { at: at.clone(), id: r.id.clone() });
            }
        }
        let ranks = block.node_ranks();
        for id in ranks.keys().chain(block.rays.iter().map(|r| &r.id)) {
            if !valid_id(id) {
                out.push(Violation::InvalidId { id: id.clone() });
            }
        }
        for r in &block.rays {
            if block.node(&r.start).is_some_and(|n| n.rank != ExtRank::Fin(0)) {
                out.push(Violation::InvalidLink { at: at.clone(), from: r.id.clone(), to: r.start.clone() });
            }
        }
        for (i, b) in block.branches.iter().enumerate() {
            if b.len() != 2 || b[0] == b[1] {
                out.push(Violation::BranchNotTwoElement { at: format!("{at} {}", branch_id(i)) });
            } else {
                for end in b {
                    if block.node(end).is_some_and(|n| n.rank != ExtRank::Fin(0)) {
                        out.push(Violation::InvalidLink { at: format!("{at} {}", branch_id(i)), from: b[0].clone(), to: b[1].clone() });
                    }
                }
            }
        }
        for n in &block.nodes {
            if n.rank > nu {
                out.push(Violation::RankAboveGraph { node: n.id.clone(), rank: n.rank.to_string() });
            }
            for e in &n.embraces {
                match ranks.get(e) {
                    None => out.push(Violation::UnknownReference { at: format!("{at} {}", n.id), id: e.clone() }),
                    Some(&r) if r >= n.rank => {
                        out.push(Violation::EmbraceRankViolation { node: n.id.clone(), embraced: e.clone() })
                    }
                    _ => {}
                }
            }
            for t in &n.tips {
                if block.ray(t).is_none() {
                    out.push(Violation::UnknownReference { at: format!("{at} {}", n.id), id: t.clone() });
                }
            }
        }
    }

    let core_ranks = g.core_node_ranks();
    let core_known = |id: &str| core_ranks.contains_key(id) || g.core.ray(id).is_some();
    for a in &g.arms {
        let at = format!("arm {}", a.id);
        let cell_ranks = a.cell.node_ranks();
        let cell_known = |id: &str| cell_ranks.contains_key(id) || a.cell.ray(id).is_some();
        for (r, l) in &a.gluing {
            if !cell_known(r) {
                out.push(Violation::UnknownReference { at: at.clone(), id: r.clone() });
            }
            if !cell_ranks.contains_key(l) {
                out.push(Violation::UnknownReference { at: format!("{at} left port"), id: l.clone() });
            }
        }
        let values: BTreeSet<_> = a.gluing.values().collect();
        if values.len() != a.gluing.len() {
            out.push(Violation::GluingNotBijection { arm: a.id.clone() });
        }
        for (c, l) in &a.attach {
            if !core_known(c) {
                out.push(Violation::UnknownReference { at: format!("{at} attach"), id: c.clone() });
            }
            if !cell_ranks.contains_key(l) {
                out.push(Violation::UnknownReference { at: format!("{at} attach"), id: l.clone() });
            }
        }
        if let Some(apex) = &a.apex {
            if apex.rank <= WGraphPresentation::cell_rank(a) {
                out.push(Violation::ApexRank { arm: a.id.clone() });
            }
            if apex.rank > nu {
                out.push(Violation::RankAboveGraph { node: apex.id.clone(), rank: apex.rank.to_string() });
            }
            if g.core.node_ranks().contains_key(&apex.id) || g.core.ray(&apex.id).is_some() {
                out.push(Violation::DuplicateId { at: "core".into(), id: apex.id.clone() });
            }
            for e in &apex.embraces {
                match g.core.node_ranks().get(e) {
                    None => out.push(Violation::UnknownReference { at: format!("apex {}", apex.id), id: e.clone() }),
                    Some(&r) if r >= apex.rank => {
                        out.push(Violation::EmbraceRankViolation { node: apex.id.clone(), embraced: e.clone() })
                    }
                    _ => {}
                }
            }
            for t in &apex.tips {
                if g.core.ray(t).is_none() {
                    out.push(Violation::UnknownReference { at: format!("apex {}", apex.id), id: t.clone() });
                }
            }
        }

        // Gluing must keep every local component in its own lane.
        let mut ranks_in_cell: BTreeSet<ExtRank> = cell_ranks.values().copied().collect();
        ranks_in_cell.insert(ExtRank::Fin(0));
        for &rho in &ranks_in_cell {
            let comp = cell_components(&a.cell, rho);
            for (r, l) in &a.gluing {
                let connective = match (cell_ranks.get(r), cell_ranks.get(l)) {
                    (Some(&x), Some(&y)) => x.max(y) <= rho,
                    (None, Some(&y)) => y <= rho,
                    _ => false,
                };
                if connective && comp.get(r) != comp.get(l) {
                    out.push(Violation::NonUniformGluing { arm: a.id.clone(), rank: rho.to_string() });
                    break;
                }
            }
        }
        // A left and a right port in one embrace tree would chain every copy.
        let all = cell_components(&Block { branches: vec![], ..a.cell.clone() }, ExtRank::Omega);
        for (r, l) in &a.gluing {
            if cell_ranks.contains_key(r) && all.contains_key(r) && all.get(r) == all.get(l) {
                out.push(Violation::CrossCopyIdentification { arm: a.id.clone() });
                break;
            }
        }
    }
    if !out.is_empty() {
        out.sort();
        out.dedup();
        return out;
    }

    let u = Unrolled::build(g, 3, g.ray_unit.max(1));
    out.extend(u.problems().iter().cloned());

    let apex_ids: BTreeSet<usize> = u.arm_tips.iter().map(|t| t.apex).collect();
    for i in u.canonical_nodes() {
        if u.nodes[i].stub {
            continue;
        }
        let ok = match u.rank(i) {
            ExtRank::Fin(0) => true,
            ExtRank::Fin(1) => !u.collected_rays(i).is_empty() || apex_ids.contains(&i),
            _ => apex_ids.contains(&i),
        };
        if !ok {
            out.push(Violation::MissingLowerTip { node: u.node_ref(i).to_string() });
        }
    }

    let present: BTreeSet<ExtRank> = u.canonical_nodes().map(|i| u.rank(i)).collect();
    let required: Vec<ExtRank> = match nu {
        ExtRank::Fin(k) => (0..=k).map(ExtRank::Fin).collect(),
        _ => vec![ExtRank::Fin(0), nu],
    };
    for rho in required {
        if rho != ExtRank::ArrowOmega && !present.contains(&rho) {
            out.push(Violation::NonemptyRankViolation { rank: rho.to_string() });
        }
    }

    let uf = u.components(ExtRank::Omega, true);
    let canon: Vec<usize> = u.canonical_nodes().collect();
    if let Some(&first) = canon.first() {
        let stray: Vec<String> =
            canon.iter().filter(|&&i| !uf.equiv(first, i)).take(3).map(|&i| u.node_ref(i).to_string()).collect();
        if !stray.is_empty() {
            out.push(Violation::NotWconnected { detail: format!("{} is unreachable from {}", stray.join(", "), u.node_ref(first)) });
        }
    }
    let plain = u.components(ExtRank::Omega, false);
    for tip in &u.arm_tips {
        let in_copy = |k: u64| -> Vec<usize> {
            tip.members.iter().copied().filter(|&m| u.nodes[m].r.copy_index() == Some(k)).collect()
        };
        let (one, two) = (in_copy(1), in_copy(2));
        if !one.iter().any(|&x| two.iter().any(|&y| plain.equiv(x, y))) {
            out.push(Violation::NotWconnected { detail: format!("copies of arm {} are not chained", tip.arm) });
        }
    }
    out.sort();
    out.dedup();
    out
}
