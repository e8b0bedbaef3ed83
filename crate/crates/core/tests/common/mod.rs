#![allow(dead_code)]

use std::cmp::Ordering;
use std::path::PathBuf;

use tg_core::hyper::EnlargementContext;
use tg_core::ordinal::{Exponent, Ordinal};
use tg_core::wgraph::{WGraphPresentation, WNodeRef};

pub const SUITE: [&str; 8] = [
    "path5.json",
    "ladder.json",
    "star.json",
    "twoarm.json",
    "ladder_apex2.json",
    "omega_apex.json",
    "path_arm.json",
    "cycle_rays.json",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn graph(name: &str) -> WGraphPresentation {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    WGraphPresentation::from_json(&text).unwrap()
}

pub fn context(name: &str) -> EnlargementContext {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    EnlargementContext::from_json(&text).unwrap()
}

pub fn context_with(graph_name: &str, pres: &[(&str, &str)]) -> EnlargementContext {
    let mut ctx = EnlargementContext::new(graph(graph_name));
    for (n, p) in pres {
        ctx.add(n, p).unwrap();
    }
    ctx
}

/// Canonical wnodes of a truncation, stubs left out.
pub fn nodes(g: &WGraphPresentation, depth: u64) -> Vec<WNodeRef> {
    let u = g.unroll(depth).unwrap();
    u.canonical_nodes().filter(|&i| !u.nodes[i].stub).map(|i| u.node_ref(i).clone()).collect()
}

/// Coefficients of ω^0..ω^3 and ω^ω, lowest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cnf(pub [u64; 5]);

impl Cnf {
    pub fn of(a: &Ordinal) -> Cnf {
        let mut c = [0; 5];
        for &(e, k) in a.terms() {
            let i = match e {
                Exponent::Fin(i) if i < 4 => i as usize,
                Exponent::Omega => 4,
                Exponent::Fin(i) => panic!("exponent {i} outside the model"),
            };
            c[i] = k;
        }
        Cnf(c)
    }

    pub fn to_ordinal(self) -> Ordinal {
        let exp = |i: usize| if i == 4 { Exponent::Omega } else { Exponent::Fin(i as u32) };
        Ordinal::from_terms((0..5).filter(|&i| self.0[i] > 0).map(|i| (exp(i), self.0[i])))
    }

    pub fn add(self, o: Cnf) -> Cnf {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(o.0) {
            *a += b;
        }
        Cnf(c)
    }

    /// Highest exponent decides.
    pub fn cmp(self, o: Cnf) -> Ordering {
        for i in (0..5).rev() {
            match self.0[i].cmp(&o.0[i]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

/// Every ordinal with exponents ≤ 3 and coefficients ≤ `max`.
pub fn small_ordinals(max: u64) -> Vec<Ordinal> {
    let mut out = Vec::new();
    let m = max + 1;
    for code in 0..m.pow(4) {
        let mut c = [0; 5];
        let mut x = code;
        for slot in c.iter_mut().take(4) {
            *slot = x % m;
            x /= m;
        }
        out.push(Cnf(c).to_ordinal());
    }
    out
}
