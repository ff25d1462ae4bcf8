//! `wdrd`: construct, verify and classify weakly distance-regular digraphs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use wdrd::arcs::{self, DEFAULT_PATH_BUDGET};
use wdrd::census::{run_census, CensusConfig};
use wdrd::digraph::DigraphJson;
use wdrd::families::{table1_compare, FamilySpec};
use wdrd::iso::{are_isomorphic, canonical_form};
use wdrd::scheme;
use wdrd::{AbelianGroup, Digraph, TwoWayDistance};

/// Largest digraph on which `verify` also runs the counting oracle.
const ORACLE_LIMIT: usize = 64;

#[derive(Parser)]
#[command(name = "wdrd", version, about = "Weakly distance-regular digraph toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a digraph and print it as JSON or DOT.
    Construct {
        #[command(flatten)]
        input: Input,
        /// Emit Graphviz DOT instead of JSON.
        #[arg(long)]
        dot: bool,
    },
    /// Check regularity, intersection numbers, purity and the basic identities.
    Verify {
        #[command(flatten)]
        input: Input,
    },
    /// Report which structural case the digraph falls into.
    Classify {
        #[command(flatten)]
        input: Input,
    },
    /// Exhaustive search over Cayley digraphs on small abelian groups.
    Census {
        #[arg(long, default_value_t = 16)]
        max_order: usize,
        #[arg(long, default_value_t = 4)]
        min_valency: usize,
        /// Skip connection sets that are not minimal under group automorphisms.
        #[arg(long)]
        prune_automorphisms: bool,
        /// Stop after this many seconds and mark the report incomplete.
        #[arg(long)]
        budget_seconds: Option<u64>,
    },
    /// Compare closed-form distances with breadth-first search.
    Table1 {
        /// Family spec such as "viii(q=3,n=3)".
        spec: String,
    },
    /// Extract the subdigraph reachable along the given arc types.
    Delta {
        #[command(flatten)]
        input: Input,
        /// Keep arcs of type (1,q-1); repeat for several types.
        #[arg(long = "q", required = true)]
        qs: Vec<u32>,
        #[arg(long, default_value_t = 0)]
        vertex: usize,
        #[arg(long)]
        dot: bool,
    },
    /// Quotient over the closed subset generated by the given relations.
    Quotient {
        #[command(flatten)]
        input: Input,
        /// Generating relation as "a,b"; repeat for several.
        #[arg(long = "generator", required = true)]
        generators: Vec<String>,
        #[arg(long)]
        dot: bool,
    },
    /// Decide whether two digraphs are isomorphic.
    Iso {
        /// Family spec, "GROUP:SET" or "@file.json".
        first: String,
        /// Family spec, "GROUP:SET" or "@file.json".
        second: String,
    },
}

#[derive(Args)]
struct Input {
    /// A family spec, "GROUP:SET", or a group followed by a connection set.
    #[arg(num_args = 0..=2)]
    args: Vec<String>,
    /// Read a digraph JSON file ({"n", "arcs", optional "labels" and "group"}).
    #[arg(long = "in", conflicts_with = "args")]
    path: Option<PathBuf>,
}

struct Loaded {
    digraph: Digraph,
    family: Option<FamilySpec>,
    cayley: Option<(AbelianGroup, Vec<String>)>,
}

impl Input {
    fn load(&self) -> Result<Loaded> {
        if let Some(path) = &self.path {
            return load_file(path);
        }
        match self.args.as_slice() {
            [one] => load_text(one),
            [group, set] => load_cayley(group, set),
            _ => bail!("expected an input: a family spec, GROUP SET, or --in FILE"),
        }
    }
}

fn load_text(text: &str) -> Result<Loaded> {
    if let Some(path) = text.strip_prefix('@') {
        return load_file(&PathBuf::from(path));
    }
    if let Some((group, set)) = text.split_once(':') {
        return load_cayley(group, set);
    }
    let spec: FamilySpec = text.parse().with_context(|| format!("reading family spec {text:?}"))?;
    let inst = spec.construct()?;
    Ok(Loaded {
        digraph: inst.digraph,
        family: Some(spec),
        cayley: Some((inst.group, inst.set.iter().map(ToString::to_string).collect())),
    })
}

fn load_cayley(group: &str, set: &str) -> Result<Loaded> {
    let group: AbelianGroup = group.parse().with_context(|| format!("reading group {group:?}"))?;
    let elems = group
        .parse_set(set)
        .with_context(|| format!("reading connection set {set:?}"))?;
    let digraph = Digraph::from_cayley(&group, &elems)?;
    Ok(Loaded {
        digraph,
        family: None,
        cayley: Some((group, elems.iter().map(ToString::to_string).collect())),
    })
}

fn load_file(path: &PathBuf) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let group = match value.get("group").and_then(Value::as_str) {
        Some(g) => Some(g.parse::<AbelianGroup>()?),
        None => None,
    };
    let json: DigraphJson = serde_json::from_value(value).context("digraph JSON needs \"n\" and \"arcs\"")?;
    Ok(Loaded {
        digraph: Digraph::from_json(&json, group.as_ref())?,
        family: None,
        cayley: None,
    })
}

fn digraph_value(loaded: &Loaded) -> Value {
    let mut out = json!({ "digraph": loaded.digraph.to_json() });
    if let Some(spec) = &loaded.family {
        out["family"] = json!(spec.to_string());
    }
    if let Some((group, set)) = &loaded.cayley {
        out["group"] = json!(group.to_string());
        out["connection_set"] = json!(set);
    }
    out
}

fn type_text(t: TwoWayDistance) -> String {
    t.to_string()
}

/// The verdict object and whether it contradicts what the input promises.
fn verify(loaded: &Loaded) -> Result<(Value, bool)> {
    let d = &loaded.digraph;
    let mut out = BTreeMap::new();
    let connected = d.is_strongly_connected();
    out.insert("strongly_connected", json!(connected));
    out.insert("vertices", json!(d.vertex_count()));
    let mut mismatch = false;
    if !connected {
        mismatch = loaded.family.is_some();
        return Ok((json!(out), mismatch));
    }
    let table = d.distance_table()?;
    let rel = scheme::compute_relations(d, &table);
    let verdict = scheme::check_wdrd(&rel);
    out.insert(
        "wdrd",
        json!({
            "holds": verdict.is_wdrd,
            "witness": verdict.witness.as_ref().map(ToString::to_string),
        }),
    );
    if d.vertex_count() <= ORACLE_LIMIT {
        let agrees = scheme::check_wdrd_definitional(&rel).is_wdrd == verdict.is_wdrd;
        out.insert("wdrd_oracle_agrees", json!(agrees));
        mismatch |= !agrees;
    }
    let ks = arcs::k_set(d, &table);
    out.insert("K", json!(ks.iter().map(|&r| [1, r]).collect::<Vec<_>>()));
    let mut purity = BTreeMap::new();
    for &r in &ks {
        let v = arcs::is_pure_definitional(d, &table, r + 1, DEFAULT_PATH_BUDGET)?;
        purity.insert(
            format!("(1,{r})"),
            json!({
                "pure": v.pure,
                "witness": v.witness,
            }),
        );
    }
    out.insert("purity", json!(purity));
    if !verdict.is_wdrd {
        mismatch |= loaded.family.is_some();
        return Ok((json!(out), mismatch));
    }
    let p = scheme::intersection_tensor(&rel)?;
    let commutative = scheme::is_commutative(&p);
    let max = scheme::max_intersection_number(&p);
    out.insert("commutative", json!(commutative));
    out.insert("max_intersection_number", json!(max));
    out.insert("quasi_thin", json!(scheme::is_quasi_thin(&p)));
    out.insert("thin", json!(scheme::is_thin(&p)));
    out.insert("valency", json!(p.valency()));
    out.insert(
        "valencies",
        json!(p
            .relations()
            .iter()
            .zip(p.valencies())
            .map(|(t, k)| (type_text(*t), *k))
            .collect::<BTreeMap<_, _>>()),
    );
    let lemma = scheme::check_lemma1(&p);
    out.insert("lemma1", json!(lemma));
    mismatch |= !lemma.all_passed();
    if loaded.family.is_some() {
        mismatch |= !(commutative && max == 2 && p.valency() > 3);
    }
    Ok((json!(out), mismatch))
}

fn relation_arg(text: &str) -> Result<TwoWayDistance> {
    let cleaned = text.trim().trim_start_matches('(').trim_end_matches(')');
    let (a, b) = cleaned
        .split_once(',')
        .with_context(|| format!("relation {text:?} should look like \"1,1\""))?;
    Ok(TwoWayDistance::new(a.trim().parse()?, b.trim().parse()?))
}

fn emit_digraph(d: &Digraph, dot: bool, wrap: impl FnOnce(Value) -> Value) -> String {
    if dot {
        d.export_dot()
    } else {
        to_text(&wrap(json!(d.to_json())))
    }
}

fn to_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values always serialise")
}

/// Output text and whether a mismatch was found.
fn run(command: Command) -> Result<(String, bool)> {
    match command {
        Command::Construct { input, dot } => {
            let loaded = input.load()?;
            if dot {
                return Ok((loaded.digraph.export_dot(), false));
            }
            Ok((to_text(&digraph_value(&loaded)), false))
        }
        Command::Verify { input } => {
            let loaded = input.load()?;
            let (v, mismatch) = verify(&loaded)?;
            Ok((to_text(&v), mismatch))
        }
        Command::Classify { input } => {
            let d = input.load()?.digraph;
            let table = d.distance_table()?;
            let rel = scheme::compute_relations(&d, &table);
            let verdict = scheme::check_wdrd(&rel);
            if !verdict.is_wdrd {
                bail!(
                    "not weakly distance-regular: {}",
                    verdict.witness.map(|w| w.to_string()).unwrap_or_default()
                );
            }
            let p = scheme::intersection_tensor(&rel)?;
            Ok((to_text(&arcs::classify_case(&p)?.to_json()), false))
        }
        Command::Census {
            max_order,
            min_valency,
            prune_automorphisms,
            budget_seconds,
        } => {
            let mut config = CensusConfig::new(max_order);
            config.min_valency = min_valency;
            config.prune_automorphisms = prune_automorphisms;
            config.budget = budget_seconds.map(Duration::from_secs);
            let report = run_census(&config)?;
            let mismatch = report.has_discrepancy() || !report.uncovered.is_empty();
            Ok((to_text(&serde_json::to_value(&report)?), mismatch))
        }
        Command::Table1 { spec } => {
            let spec: FamilySpec = spec.parse()?;
            let rows = table1_compare(&spec)?;
            let mismatch = rows.iter().any(|r| !r.equal);
            let v = json!({
                "family": spec.to_string(),
                "all_equal": !mismatch,
                "rows": rows,
            });
            Ok((to_text(&v), mismatch))
        }
        Command::Delta { input, qs, vertex, dot } => {
            let d = input.load()?.digraph;
            let table = d.distance_table()?;
            let vertices = arcs::delta_vertices(&d, &table, vertex, &qs)?;
            let sub = arcs::delta_component(&d, &table, vertex, &qs)?;
            let text = emit_digraph(
                &sub,
                dot,
                |g| json!({ "types": qs, "vertices": vertices, "digraph": g }),
            );
            Ok((text, false))
        }
        Command::Quotient { input, generators, dot } => {
            let d = input.load()?.digraph;
            let table = d.distance_table()?;
            let rel = scheme::compute_relations(&d, &table);
            let p = scheme::intersection_tensor(&rel)?;
            let gens = generators
                .iter()
                .map(|g| Ok(p.require(relation_arg(g)?)?))
                .collect::<Result<Vec<_>>>()?;
            let f = arcs::closed_subset(&p, &gens)?;
            let blocks = arcs::blocks(&rel, &f)?;
            let q = arcs::quotient(&d, &rel, &f)?;
            let subset: Vec<String> = f.relations.iter().map(|&i| type_text(p.relations()[i])).collect();
            let text = emit_digraph(
                &q,
                dot,
                |g| json!({ "closed_subset": subset, "blocks": blocks, "quotient": g }),
            );
            Ok((text, false))
        }
        Command::Iso { first, second } => {
            let a = load_text(&first)?.digraph;
            let b = load_text(&second)?.digraph;
            let cert = are_isomorphic(&a, &b);
            let v = json!({
                "isomorphic": cert.is_some(),
                "mapping": cert.as_ref().map(|c| &c.mapping),
                "verified": cert.as_ref().map(|c| c.verified),
                "canonical_forms_equal": canonical_form(&a) == canonical_form(&b),
            });
            Ok((to_text(&v), false))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((text, mismatch)) => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = writeln!(stdout, "{}", text.trim_end()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: writing output: {e}");
                    return ExitCode::from(2);
                }
            }
            if mismatch {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
