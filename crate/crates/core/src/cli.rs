//! The `tg` command line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{IsTerminal, Read};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::json;

use crate::galaxy::{self, GalaxyError, GalaxyPartition, OrderReport};
use crate::hyper::{self, EnlargementContext, HyperError, LimitVerdict};
use crate::metric::{self, MetricError, Step, TipRank, WalkSpec};
use crate::ordinal::{ExtRank, Ordinal, OrdinalError};
use crate::sections::{self, SectionError, SectionRef, SectionTable};
use crate::wgraph::{WGraphError, WGraphPresentation, WNodeRef};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tg", version, about = "Wdistances, wsections and galaxies of finitely presented transfinite wgraphs")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for verdict matrices; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Graph or context file; `-` reads stdin.
    pub input: String,
}

#[derive(Debug, Args)]
pub struct RankArg {
    #[arg(long)]
    pub rank: ExtRank,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the presentation invariants.
    Validate(Input),
    /// Materialize a truncation and list its nodes and elements.
    Unroll {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        #[command(flatten)]
        input: Input,
    },
    /// Wdistance and a geodesic between two wnodes.
    Distance {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Cross-check against the bounded brute-force search.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 0)]
        max_tips: u64,
        #[arg(long, default_value_t = 0)]
        max_branches: u64,
        #[command(flatten)]
        input: Input,
    },
    /// List the wsections of one rank.
    Sections {
        #[command(flatten)]
        rank: RankArg,
        #[command(flatten)]
        input: Input,
    },
    /// List the boundary wnodes of one rank in a truncation.
    Boundary {
        #[command(flatten)]
        rank: RankArg,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        #[command(flatten)]
        input: Input,
    },
    /// Local finiteness of every section of one rank.
    LocallyFinite {
        #[command(flatten)]
        rank: RankArg,
        #[command(flatten)]
        input: Input,
    },
    /// Boundary wnodes escaping to ever larger distance.
    EscapeWalk {
        #[command(flatten)]
        rank: RankArg,
        #[arg(long)]
        from: String,
        #[arg(long)]
        count: u64,
        /// Section to walk in; defaults to the one carrying `--from`.
        #[arg(long)]
        section: Option<String>,
        #[command(flatten)]
        input: Input,
    },
    /// Partition the context's presentations into galaxies.
    Classify {
        #[command(flatten)]
        rank: RankArg,
        #[command(flatten)]
        input: Input,
    },
    /// Order the galaxies by closeness to the principal one.
    Order {
        #[command(flatten)]
        rank: RankArg,
        #[command(flatten)]
        input: Input,
    },
    /// Build and verify a chain of galaxies around a presentation.
    WitnessChain {
        #[command(flatten)]
        rank: RankArg,
        #[arg(long)]
        around: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        #[command(flatten)]
        input: Input,
    },
    /// Replicate one of the structural results on the input.
    Check {
        #[arg(long, value_parser = ["3.2", "4.3", "5.1", "5.2"])]
        theorem: String,
        #[arg(long)]
        rank: Option<ExtRank>,
        #[arg(long)]
        around: Option<String>,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        #[arg(long)]
        from: Option<String>,
        #[arg(long, default_value_t = 5)]
        count: u64,
        #[command(flatten)]
        input: Input,
    },
    /// Compare the engine with the brute-force search on a truncation.
    OracleCheck {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        /// Random pairs drawn from a deeper truncation.
        #[arg(long, default_value_t = 20)]
        cases: u64,
        #[command(flatten)]
        input: Input,
    },
}

/// Failure of a command, with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn invalid(m: impl Into<String>) -> Self {
        CliError { code: EXIT_INVALID, message: m.into() }
    }

    fn failed(m: impl Into<String>) -> Self {
        CliError { code: EXIT_FAILED, message: m.into() }
    }
}

impl From<WGraphError> for CliError {
    fn from(e: WGraphError) -> Self {
        CliError::invalid(e.to_string())
    }
}

impl From<OrdinalError> for CliError {
    fn from(e: OrdinalError) -> Self {
        CliError::failed(e.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Graph(g) => g.into(),
            MetricError::InvalidWalk(_) => CliError::invalid(e.to_string()),
            _ => CliError::failed(e.to_string()),
        }
    }
}

impl From<SectionError> for CliError {
    fn from(e: SectionError) -> Self {
        match e {
            SectionError::Graph(g) => g.into(),
            SectionError::Metric(m) => m.into(),
            SectionError::Ordinal(o) => o.into(),
            SectionError::HypothesisViolated(_) => CliError::failed(e.to_string()),
            _ => CliError::invalid(e.to_string()),
        }
    }
}

impl From<HyperError> for CliError {
    fn from(e: HyperError) -> Self {
        match e {
            HyperError::Graph(g) => g.into(),
            HyperError::Metric(m) => m.into(),
            _ => CliError::invalid(e.to_string()),
        }
    }
}

impl From<GalaxyError> for CliError {
    fn from(e: GalaxyError) -> Self {
        match e {
            GalaxyError::Hyper(h) => h.into(),
            GalaxyError::Section(s) => s.into(),
            GalaxyError::RankAboveGraph(_)
            | GalaxyError::RankOrder(..)
            | GalaxyError::ArrowOmegaRank
            | GalaxyError::NotArmIndexed(_) => CliError::invalid(e.to_string()),
            _ => CliError::failed(e.to_string()),
        }
    }
}

/// Output of a successful run; `code` is 0 or 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub code: i32,
    pub text: String,
}

struct Out {
    format: Format,
    color: bool,
}

impl Out {
    fn verdict(&self, ok: bool) -> String {
        let word = if ok { "PASS" } else { "FAIL" };
        match (self.color, ok) {
            (true, true) => format!("\x1b[32m{word}\x1b[0m"),
            (true, false) => format!("\x1b[31m{word}\x1b[0m"),
            _ => word.to_string(),
        }
    }

    fn emit(&self, value: impl Serialize, text: impl FnOnce() -> String, ok: bool) -> Result<Report, CliError> {
        let text = match self.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&value).map_err(|e| CliError::failed(e.to_string()))?;
                s.push('\n');
                s
            }
            Format::Text => text(),
        };
        Ok(Report { code: if ok { EXIT_OK } else { EXIT_FAILED }, text })
    }
}

fn color_enabled() -> bool {
    match std::env::var("TG_COLOR").as_deref() {
        Ok("never") => false,
        _ => std::io::stdout().is_terminal(),
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    let mut s = String::new();
    if path == "-" {
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::invalid(format!("stdin: {e}")))?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{path}: {e}")))?;
    }
    Ok(s)
}

/// Reads a bare graph or a `{"graph", "presentations"}` context and checks
/// the graph's invariants.
fn load(path: &str) -> Result<EnlargementContext, CliError> {
    let text = read_input(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::invalid(format!("{path}: {e}")))?;
    let ctx = if value.get("graph").is_some() {
        EnlargementContext::from_json(&text).map_err(|e| CliError::invalid(format!("{path}: {e}")))?
    } else {
        let g = WGraphPresentation::from_json(&text).map_err(|e| CliError::invalid(format!("{path}: {e}")))?;
        EnlargementContext::new(g)
    };
    let violations = ctx.graph.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::invalid(format!("{path}: invalid presentation: {}", list.join("; "))));
    }
    Ok(ctx)
}

/// Parses the arguments and runs the command; clap errors become exit 3.
pub fn run_args<I, T>(args: I) -> Result<Report, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => return Ok(Report { code: EXIT_OK, text: e.to_string() }),
        Err(e) => return Err(CliError::invalid(e.to_string())),
    };
    run(cli)
}

pub fn run(cli: Cli) -> Result<Report, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::invalid(format!("--jobs: {e}")))?;
    let out = Out { format: cli.format, color: cli.format == Format::Text && color_enabled() };
    pool.install(|| dispatch(&cli, &out))
}

fn dispatch(cli: &Cli, out: &Out) -> Result<Report, CliError> {
    match &cli.command {
        Command::Validate(input) => validate(out, &input.input),
        Command::Unroll { depth, input } => unroll(out, &load(&input.input)?, *depth),
        Command::Distance { from, to, oracle, max_tips, max_branches, input } => {
            let ctx = load(&input.input)?;
            let bounds = oracle.then_some((*max_tips, *max_branches));
            distance(out, &ctx, from, to, bounds)
        }
        Command::Sections { rank, input } => list_sections(out, &load(&input.input)?, rank.rank),
        Command::Boundary { rank, depth, input } => boundary(out, &load(&input.input)?, rank.rank, *depth),
        Command::LocallyFinite { rank, input } => locally_finite(out, &load(&input.input)?, rank.rank),
        Command::EscapeWalk { rank, from, count, section, input } => {
            escape(out, &load(&input.input)?, rank.rank, from, *count, section.as_deref())
        }
        Command::Classify { rank, input } => classify(out, &load(&input.input)?, rank.rank),
        Command::Order { rank, input } => order(out, &load(&input.input)?, rank.rank),
        Command::WitnessChain { rank, around, depth, input } => {
            chain(out, &load(&input.input)?, rank.rank, around, *depth)
        }
        Command::Check { theorem, rank, around, depth, from, count, input } => {
            let ctx = load(&input.input)?;
            let need_rank = || rank.ok_or_else(|| CliError::invalid(format!("--rank is required for {theorem}")));
            match theorem.as_str() {
                "3.2" => check_containment(out, &ctx),
                "4.3" => {
                    let from = from.as_deref().ok_or_else(|| CliError::invalid("--from is required for 4.3"))?;
                    check_escape(out, &ctx, need_rank()?, from, *count)
                }
                "5.1" => {
                    let around = around.as_deref().ok_or_else(|| CliError::invalid("--around is required for 5.1"))?;
                    chain(out, &ctx, need_rank()?, around, *depth)
                }
                _ => order(out, &ctx, need_rank()?),
            }
        }
        Command::OracleCheck { depth, cases, input } => oracle_check(out, &load(&input.input)?, *depth, *cases, cli.seed),
    }
}

fn validate(out: &Out, path: &str) -> Result<Report, CliError> {
    let text = read_input(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::invalid(format!("{path}: {e}")))?;
    let graph_text = match value.get("graph") {
        Some(g) => g.to_string(),
        None => text,
    };
    let g = WGraphPresentation::from_json(&graph_text).map_err(|e| CliError::invalid(format!("{path}: {e}")))?;
    let violations = g.validate();
    let mut report = out.emit(
        json!({ "valid": violations.is_empty(), "violations": violations }),
        || {
            if violations.is_empty() {
                "valid\n".to_string()
            } else {
                violations.iter().map(|v| format!("{v}\n")).collect()
            }
        },
        true,
    )?;
    if !violations.is_empty() {
        report.code = EXIT_INVALID;
    }
    Ok(report)
}

fn unroll(out: &Out, ctx: &EnlargementContext, depth: u64) -> Result<Report, CliError> {
    let u = ctx.graph.unroll(depth)?;
    let nodes: Vec<_> = u
        .canonical_nodes()
        .map(|i| json!({ "node": u.node_ref(i).to_string(), "rank": u.rank(i), "stub": u.nodes[i].stub }))
        .collect();
    let branches: Vec<_> = u
        .branches
        .iter()
        .map(|b| json!({ "elem": b.elem.to_string(), "ends": [u.node_ref(b.a).to_string(), u.node_ref(b.b).to_string()] }))
        .collect();
    let rays: Vec<_> = u
        .rays
        .iter()
        .map(|r| {
            json!({
                "elem": r.elem.to_string(),
                "start": u.node_ref(r.nodes[0]).to_string(),
                "collector": r.collector.map(|c| u.node_ref(c).to_string()),
            })
        })
        .collect();
    let value = json!({ "depth": depth, "nodes": nodes, "branches": branches, "rays": rays });
    out.emit(
        &value,
        || {
            let mut s = format!("depth {depth}: {} wnodes, {} branches, {} rays\n", nodes.len(), branches.len(), rays.len());
            for n in &nodes {
                let stub = if n["stub"] == true { " (stub)" } else { "" };
                let _ = writeln!(s, "  wnode {} rank {}{stub}", n["node"].as_str().unwrap_or(""), n["rank"].as_str().unwrap_or(""));
            }
            for b in &branches {
                let _ = writeln!(s, "  branch {}: {} - {}", b["elem"].as_str().unwrap_or(""), b["ends"][0].as_str().unwrap_or(""), b["ends"][1].as_str().unwrap_or(""));
            }
            for r in &rays {
                let to = r["collector"].as_str().unwrap_or("-");
                let _ = writeln!(s, "  ray {}: {} -> {to}", r["elem"].as_str().unwrap_or(""), r["start"].as_str().unwrap_or(""));
            }
            s
        },
        true,
    )
}

/// Tip and branch steps of a walk, as oracle bounds.
fn walk_counts(w: &WalkSpec) -> (u64, u64) {
    let mut tips = 0;
    let mut branches = 0;
    for (s, _) in &w.steps {
        match s {
            Step::Branch(_) => branches += 1,
            Step::Tip(TipRank::Rank(_)) => tips += 1,
            Step::Tip(TipRank::MinusOne) => {}
        }
    }
    (tips, branches)
}

fn distance(
    out: &Out,
    ctx: &EnlargementContext,
    from: &str,
    to: &str,
    oracle: Option<(u64, u64)>,
) -> Result<Report, CliError> {
    let g = &ctx.graph;
    let x = g.resolve(from)?;
    let y = g.resolve(to)?;
    let d = ctx.engine().wdistance(&x, &y)?;
    let walk = ctx.engine().geodesic(&x, &y)?;
    let checked = match oracle {
        Some((t, b)) => {
            let (wt, wb) = walk_counts(&walk);
            Some(metric::wdistance_oracle(g, &x, &y, t.max(wt), b.max(wb))?)
        }
        None => None,
    };
    let ok = checked.as_ref().is_none_or(|o| *o == d);
    out.emit(
        json!({ "from": x.to_string(), "to": y.to_string(), "distance": d, "geodesic": walk, "oracle": checked, "agree": ok }),
        || {
            let mut s = format!("{d}\n");
            let _ = writeln!(s, "geodesic: {walk}");
            if let Some(o) = &checked {
                let _ = writeln!(s, "oracle: {o} {}", out.verdict(ok));
            }
            s
        },
        ok,
    )
}

fn section_line(s: &SectionRef) -> String {
    let mut parts: Vec<String> = s.core.iter().cloned().collect();
    for (arm, ids) in &s.lanes {
        parts.extend(ids.iter().map(|i| format!("{arm}[*].{i}")));
    }
    for ((arm, k), ids) in &s.copies {
        parts.extend(ids.iter().map(|i| format!("{arm}[{k}].{i}")));
    }
    if let Some(f) = &s.family {
        parts.extend(f.elems.iter().map(|i| format!("{}[n].{i}", f.arm)));
    }
    format!("{}: {{{}}}", s.id, parts.join(", "))
}

fn list_sections(out: &Out, ctx: &EnlargementContext, rho: ExtRank) -> Result<Report, CliError> {
    let all = sections::wsections(&ctx.graph, rho)?;
    out.emit(
        json!({ "rank": rho, "sections": all }),
        || {
            let mut s = format!("{} {rho}-sections\n", all.len());
            for sec in &all {
                let _ = writeln!(s, "  {}", section_line(sec));
            }
            s
        },
        true,
    )
}

fn boundary(out: &Out, ctx: &EnlargementContext, rho: ExtRank, depth: u64) -> Result<Report, CliError> {
    let g = &ctx.graph;
    let u = g.unroll(depth)?;
    let mut found = Vec::new();
    for i in u.canonical_nodes() {
        if u.rank(i) != rho || u.nodes[i].stub {
            continue;
        }
        let x = u.node_ref(i);
        if sections::is_boundary(g, x)? {
            let incident: Vec<String> = sections::incident_sections(g, x)?.iter().map(|s| s.id.clone()).collect();
            found.push((x.to_string(), incident));
        }
    }
    found.sort();
    out.emit(
        json!({
            "rank": rho,
            "depth": depth,
            "boundary": found.iter().map(|(x, s)| json!({ "node": x, "sections": s })).collect::<Vec<_>>(),
        }),
        || {
            let mut s = format!("{} boundary {rho}-wnodes at depth {depth}\n", found.len());
            for (x, secs) in &found {
                let _ = writeln!(s, "  {x}: {}", secs.join(", "));
            }
            s
        },
        true,
    )
}

fn locally_finite(out: &Out, ctx: &EnlargementContext, rho: ExtRank) -> Result<Report, CliError> {
    let g = &ctx.graph;
    let mut rows = Vec::new();
    for s in sections::wsections(g, rho)? {
        let finite = sections::locally_rho_finite(g, &s)?;
        let infinite_boundary = sections::has_infinitely_many_boundary(g, &s)?;
        rows.push((s.id, finite, infinite_boundary));
    }
    out.emit(
        json!({
            "rank": rho,
            "sections": rows
                .iter()
                .map(|(id, f, b)| json!({ "section": id, "locally_finite": f, "infinitely_many_boundary": b }))
                .collect::<Vec<_>>(),
        }),
        || {
            let mut s = String::new();
            for (id, f, b) in &rows {
                let f = if *f { "locally finite" } else { "not locally finite" };
                let b = if *b { "infinitely many" } else { "finitely many" };
                let _ = writeln!(s, "{id}: {f}, {b} boundary wnodes");
            }
            s
        },
        true,
    )
}

/// The ρ-section holding the (ρ−1)-sections incident to `x`.
fn carrying_section(g: &WGraphPresentation, x: &WNodeRef, rho: ExtRank) -> Result<SectionRef, CliError> {
    let table = SectionTable::build(g, rho)?;
    for low in sections::incident_sections(g, x)? {
        if let Some(s) = low.first_elem().and_then(|e| table.section_of(&e)) {
            return Ok(s);
        }
    }
    Err(CliError::invalid(format!("no {rho}-section carries `{x}`")))
}

type Escape = (WNodeRef, SectionRef, Vec<(WNodeRef, Ordinal)>);

fn walk_escape(
    ctx: &EnlargementContext,
    rho: ExtRank,
    from: &str,
    count: u64,
    section: Option<&str>,
) -> Result<Escape, CliError> {
    let g = &ctx.graph;
    let x0 = g.resolve(from)?;
    let s = match section {
        Some(text) => sections::section_by_name(g, rho, text)?,
        None => carrying_section(g, &x0, rho)?,
    };
    let walk = sections::escape_walk(g, &s, &x0, count)?;
    Ok((x0, s, walk))
}

fn escape(
    out: &Out,
    ctx: &EnlargementContext,
    rho: ExtRank,
    from: &str,
    count: u64,
    section: Option<&str>,
) -> Result<Report, CliError> {
    let (x0, s, walk) = walk_escape(ctx, rho, from, count, section)?;
    out.emit(
        json!({
            "rank": rho,
            "from": x0.to_string(),
            "section": s.id,
            "nodes": walk.iter().map(|(x, d)| json!({ "node": x.to_string(), "distance": d })).collect::<Vec<_>>(),
        }),
        || {
            let mut t = format!("escape from {x0} in {}\n", s.id);
            for (k, (x, d)) in walk.iter().enumerate() {
                let _ = writeln!(t, "  {} {x} at {d}", k + 1);
            }
            t
        },
        true,
    )
}

fn verdict_text(v: &LimitVerdict) -> String {
    match v {
        LimitVerdict::Yes(m) => format!("yes (mu {m})"),
        LimitVerdict::No => "no".to_string(),
        LimitVerdict::UltrafilterDependent(rs) => {
            let parts: Vec<String> = rs.iter().map(|(r, b)| format!("{r}: {}", if *b { "yes" } else { "no" })).collect();
            format!("depends on the ultrafilter [{}]", parts.join("; "))
        }
    }
}

fn partition_text(part: &GalaxyPartition) -> String {
    let mut s = format!("{} {}-galaxies\n", part.classes.len(), part.rank);
    for (i, c) in part.classes.iter().enumerate() {
        let mark = if c.principal { " (principal)" } else { "" };
        let _ = writeln!(s, "  [{i}]{mark} {}", c.members.join(", "));
    }
    if let Some(a) = &part.auto_standard {
        let _ = writeln!(s, "added standard presentation {a}");
    }
    if !part.ambiguous.is_empty() {
        let _ = writeln!(s, "ambiguous pairs:");
        for p in &part.ambiguous {
            let _ = writeln!(s, "  {} ~ {}: {}", p.a, p.b, verdict_text(&p.verdict));
        }
    }
    s
}

fn classify(out: &Out, ctx: &EnlargementContext, rho: ExtRank) -> Result<Report, CliError> {
    let part = galaxy::classify(ctx, rho)?;
    out.emit(
        &part,
        || {
            let mut s = partition_text(&part);
            let _ = writeln!(s, "verdicts:");
            for p in &part.verdicts {
                let _ = writeln!(s, "  {} ~ {}: {}", p.a, p.b, verdict_text(&p.verdict));
            }
            s
        },
        true,
    )
}

fn order_text(out: &Out, part: &GalaxyPartition, rep: &OrderReport) -> String {
    let mut s = partition_text(part);
    let _ = writeln!(s, "closer to the principal galaxy:");
    for (i, j) in &rep.edges {
        let _ = writeln!(s, "  [{i}] < [{j}]");
    }
    for (i, j) in &rep.incomparable {
        let _ = writeln!(s, "  [{i}] incomparable with [{j}]");
    }
    for (i, j, v) in &rep.ambiguous {
        let _ = writeln!(s, "  [{i}] vs [{j}]: {}", verdict_text(v));
    }
    let _ = writeln!(s, "principal least: {}", out.verdict(rep.principal_least));
    let _ = writeln!(s, "antisymmetric: {}", out.verdict(rep.antisymmetric));
    let _ = writeln!(s, "transitive: {}", out.verdict(rep.transitive));
    let _ = writeln!(s, "total: {}", if rep.total { "yes" } else { "no" });
    s
}

fn order(out: &Out, ctx: &EnlargementContext, rho: ExtRank) -> Result<Report, CliError> {
    let part = galaxy::classify(ctx, rho)?;
    let rep = galaxy::order_partition(ctx, &part)?;
    let ok = rep.audits_pass();
    out.emit(json!({ "partition": &part, "order": &rep }), || order_text(out, &part, &rep), ok)
}

fn chain(out: &Out, ctx: &EnlargementContext, rho: ExtRank, around: &str, k: u64) -> Result<Report, CliError> {
    let v = ctx.lookup(around)?;
    let rep = galaxy::witness_chain(ctx, &v, k, rho)?;
    let ok = rep.verified;
    out.emit(
        &rep,
        || {
            let mut s = format!("{}-chain around {around} from {}\n", rep.members.len(), rep.reference);
            for (i, m) in rep.members.iter().enumerate() {
                let _ = writeln!(s, "  {i} {m}");
            }
            let all = |b: &[bool]| b.iter().all(|x| *x);
            let _ = writeln!(s, "sandwich: {}", out.verdict(all(&rep.sandwich)));
            let _ = writeln!(s, "growth: {}", out.verdict(all(&rep.growth)));
            let _ = writeln!(s, "ordered pairs: {}", rep.ordered_pairs);
            let _ = writeln!(s, "verified: {}", out.verdict(ok));
            s
        },
        ok,
    )
}

fn check_containment(out: &Out, ctx: &EnlargementContext) -> Result<Report, CliError> {
    let g = &ctx.graph;
    let mut rows = Vec::new();
    for (low, high, pres) in galaxy::nested_section_cases(g)? {
        let holds = galaxy::section_containment(ctx, &low, &high, &pres)?;
        rows.push((low.rank, low.id, high.rank, high.id, holds));
    }
    let ok = rows.iter().all(|r| r.4);
    out.emit(
        json!({
            "pairs": rows
                .iter()
                .map(|(a, l, r, h, ok)| json!({ "alpha": a, "inner": l, "rho": r, "outer": h, "holds": ok }))
                .collect::<Vec<_>>(),
            "holds": ok,
        }),
        || {
            let mut s = format!("{} nested section pairs\n", rows.len());
            for (a, l, r, h, holds) in &rows {
                let _ = writeln!(s, "  {a}:{l} in {r}:{h} {}", out.verdict(*holds));
            }
            let _ = writeln!(s, "containment: {}", out.verdict(ok));
            s
        },
        ok,
    )
}

fn check_escape(out: &Out, ctx: &EnlargementContext, rho: ExtRank, from: &str, count: u64) -> Result<Report, CliError> {
    let (x0, s, walk) = walk_escape(ctx, rho, from, count, None)?;
    let e = rho.exponent().ok_or_else(|| CliError::invalid(format!("rank {rho} has no escape bound")))?;
    let mut rows = Vec::new();
    for (k, (x, _)) in walk.iter().enumerate() {
        let d = ctx.engine().wdistance(&x0, x)?;
        let bound = Ordinal::monomial(e, k as u64 + 1);
        rows.push((x.to_string(), d.clone(), d >= bound));
    }
    let nodes: Vec<WNodeRef> = walk.iter().map(|(x, _)| x.clone()).collect();
    let derived = hyper::from_sequence(&nodes);
    let outside = match &derived {
        Some(p) => {
            let mut named = ctx.presentations.clone();
            named.insert("derived".to_string(), p.clone());
            let part = galaxy::classify_set(ctx, named, rho)?;
            part.class_of("derived") != part.principal()
        }
        None => false,
    };
    let ok = rows.iter().all(|r| r.2) && outside;
    out.emit(
        json!({
            "rank": rho,
            "from": x0.to_string(),
            "section": s.id,
            "nodes": rows.iter().map(|(x, d, ok)| json!({ "node": x, "distance": d, "holds": ok })).collect::<Vec<_>>(),
            "derived": derived.as_ref().map(|p| p.to_string()),
            "outside_principal": outside,
            "holds": ok,
        }),
        || {
            let mut t = format!("escape from {x0} in {}\n", s.id);
            for (k, (x, d, holds)) in rows.iter().enumerate() {
                let _ = writeln!(t, "  {} {x} at {d} {}", k + 1, out.verdict(*holds));
            }
            match &derived {
                Some(p) => {
                    let _ = writeln!(t, "derived {p} outside the principal galaxy: {}", out.verdict(outside));
                }
                None => {
                    let _ = writeln!(t, "no arm-indexed presentation fits the walk: {}", out.verdict(false));
                }
            }
            t
        },
        ok,
    )
}

fn oracle_check(out: &Out, ctx: &EnlargementContext, depth: u64, cases: u64, seed: u64) -> Result<Report, CliError> {
    let g = &ctx.graph;
    let small = g.unroll(depth)?;
    let nodes: Vec<WNodeRef> = small.canonical_nodes().map(|i| small.node_ref(i).clone()).collect();
    let mut pairs: Vec<(WNodeRef, WNodeRef)> = Vec::new();
    for (i, x) in nodes.iter().enumerate() {
        for y in &nodes[i..] {
            pairs.push((x.clone(), y.clone()));
        }
    }
    let large = g.unroll(depth + 2)?;
    let pool: Vec<WNodeRef> = large.canonical_nodes().map(|i| large.node_ref(i).clone()).collect();
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..cases {
        let x = pool[rng.gen_range(0..pool.len())].clone();
        let y = pool[rng.gen_range(0..pool.len())].clone();
        pairs.push((x, y));
    }
    let mut mismatches = BTreeMap::new();
    let mut checked = 0usize;
    for (x, y) in &pairs {
        let d = match ctx.engine().wdistance(x, y) {
            Ok(d) => d,
            Err(MetricError::Disconnected(..)) => continue,
            Err(e) => return Err(e.into()),
        };
        let (t, b) = walk_counts(&ctx.engine().geodesic(x, y)?);
        let o = metric::wdistance_oracle(g, x, y, t, b)?;
        checked += 1;
        if o != d {
            mismatches.insert(format!("{x} {y}"), (d.to_string(), o.to_string()));
        }
    }
    let ok = mismatches.is_empty();
    out.emit(
        json!({ "pairs": checked, "mismatches": mismatches, "agree": ok }),
        || {
            let mut s = format!("{checked} pairs checked\n");
            for (k, (d, o)) in &mismatches {
                let _ = writeln!(s, "  {k}: engine {d}, oracle {o}");
            }
            let _ = writeln!(s, "agreement: {}", out.verdict(ok));
            s
        },
        ok,
    )
}
