//! `tropceresa`: command-line front end for the tropical Ceresa library.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::process::ExitCode;
use tropceresa::arith::{format_rational, parse_rational};
use tropceresa::ceresa::{self, AnalysisOptions, CurveData, Verdict};
use tropceresa::exterior::predicted_orders;
use tropceresa::fixtures;
use tropceresa::graph::TropicalCurve;
use tropceresa::johnson::JohnsonTable;
use tropceresa::lattice::invariant_factors;
use tropceresa::symplectic::HomologyBasis;
use tropceresa::Error;

#[derive(Parser)]
#[command(name = "tropceresa", version, about = "Tropical Ceresa classes of vertex-weighted metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Graph file, or `builtin:<name>` (k4, tl3, theta-w1, theta0, 3-balloon).
    #[arg(long)]
    graph: String,
    /// Comma-separated edge lengths in edge id order (integers, p/q or decimals).
    #[arg(long)]
    lengths: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Clone)]
struct TableArgs {
    /// Johnson table file, or `builtin:<name>`. Defaults to the builtin of the same name as the graph.
    #[arg(long)]
    table: Option<String>,
    /// Spanning tree (comma-separated edge ids) to compute in instead of the table's.
    #[arg(long)]
    tree: Option<String>,
    /// Order of the non-tree edges; defaults to edge id order.
    #[arg(long)]
    cycle_order: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Genus, first Betti number and total weight.
    Genus(GraphArgs),
    /// Stabilized curve as graph JSON.
    Stabilize(GraphArgs),
    /// First Symanzik polynomial evaluated at the edge lengths.
    Symanzik(GraphArgs),
    /// Whether the stabilized curve admits a hyperelliptic involution.
    Hyperelliptic(GraphArgs),
    /// Symplectic homology basis, loop classes and Q.
    Basis {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        tree: Option<String>,
        #[arg(long)]
        cycle_order: Option<String>,
    },
    /// The groups A, B, Abar, Bbar of the monodromy.
    Groups {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        tree: Option<String>,
    },
    /// Full Ceresa report.
    Ceresa {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        table: TableArgs,
        /// Skip the A/B group computations.
        #[arg(long)]
        no_groups: bool,
    },
    /// Order of v in Bbar and the Abar membership test.
    Order {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        table: TableArgs,
    },
    /// Zharkov's obstruction (maximal rank only).
    Zharkov {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        table: TableArgs,
    },
    /// Verdicts at random integer lengths.
    Sample {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        min: u64,
        #[arg(long, default_value_t = 20)]
        max: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 means one per core.
        #[arg(long, env = "TROPCERESA_WORKERS", default_value_t = 0)]
        workers: usize,
    },
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_schema() { 2 } else { 3 }, message: e.to_string() }
    }
}

fn schema(msg: impl Into<String>) -> Failure {
    Failure { code: 2, message: msg.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn builtin_name(spec: &str) -> Option<&str> {
    spec.strip_prefix("builtin:")
}

fn read(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| schema(format!("cannot read {path}: {e}")))
}

fn load_graph(args: &GraphArgs) -> CliResult<TropicalCurve> {
    let curve = match builtin_name(&args.graph) {
        Some(name) => fixtures::builtin_graph(name)?,
        None => TropicalCurve::from_json(&read(&args.graph)?)?,
    };
    match &args.lengths {
        None => Ok(curve),
        Some(s) => {
            let ls: Vec<BigRational> = s
                .split(',')
                .map(|x| parse_rational(x.trim()))
                .collect::<Result<_, _>>()
                .map_err(|e| schema(format!("--lengths: {e}")))?;
            if ls.len() != curve.num_edges() {
                return Err(schema(format!("--lengths has {} values, graph has {} edges", ls.len(), curve.num_edges())));
            }
            Ok(curve.with_lengths(&ls)?)
        }
    }
}

fn load_table(graph: &GraphArgs, args: &TableArgs) -> CliResult<JohnsonTable> {
    let spec = match (&args.table, builtin_name(&graph.graph)) {
        (Some(t), _) => t.clone(),
        (None, Some(g)) => format!("builtin:{g}"),
        (None, None) => return Err(schema("--table is required for graph files")),
    };
    match builtin_name(&spec) {
        Some(name) => Ok(fixtures::builtin_table(name)?),
        None => Ok(JohnsonTable::from_json(&read(&spec)?)?),
    }
}

fn split_ids(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

fn basis_for(curve: &TropicalCurve, tree: Option<&str>, order: Option<&str>) -> CliResult<HomologyBasis> {
    match tree {
        None => Ok(HomologyBasis::new(curve)?),
        Some(t) => {
            let idx = |id: &String| curve.edge_index(id).ok_or_else(|| schema(format!("unknown edge {id}")));
            let tree: Vec<usize> = split_ids(t).iter().map(idx).collect::<CliResult<_>>()?;
            let order: Option<Vec<usize>> =
                order.map(|o| split_ids(o).iter().map(idx).collect::<CliResult<_>>()).transpose()?;
            Ok(HomologyBasis::with_tree(curve, &tree, order.as_deref())?)
        }
    }
}

fn options(curve: &TropicalCurve, args: &TableArgs) -> CliResult<AnalysisOptions> {
    let basis = match &args.tree {
        None => None,
        Some(t) => Some(basis_for(curve, Some(t), args.cycle_order.as_deref())?.reference()),
    };
    Ok(AnalysisOptions { basis, ..Default::default() })
}

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("serializable output")),
        Format::Text => print!("{}", text()),
    }
}

fn data_for(curve: &TropicalCurve, table: &JohnsonTable, opts: &AnalysisOptions) -> CliResult<CurveData> {
    let r = opts.basis.as_ref().unwrap_or(&table.basis_ref);
    Ok(CurveData::new(curve, HomologyBasis::from_ref(curve, r)?)?)
}

#[derive(Serialize)]
struct SampleRow {
    lengths: Vec<String>,
    verdict: Verdict,
    decided_by: ceresa::DecidedBy,
    #[serde(with = "tropceresa::arith::opt_bigint_json")]
    order: Option<BigInt>,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Genus(g) => {
            let c = load_graph(&g)?;
            let v = json!({"genus": c.genus(), "graph_genus": c.first_betti(), "total_weight": c.total_weight()});
            emit(g.format, &v, || format!("{}\n", c.genus()));
        }
        Command::Stabilize(g) => {
            let s = load_graph(&g)?.stabilize()?;
            emit(g.format, &s.to_json_value(), || format!("{}\n", s.to_json()));
        }
        Command::Symanzik(g) => {
            let c = load_graph(&g)?;
            let s = format_rational(&c.symanzik());
            emit(g.format, &json!({ "symanzik": s }), || format!("{s}\n"));
        }
        Command::Hyperelliptic(g) => {
            let c = load_graph(&g)?;
            let s = c.stabilize()?;
            let h = s.is_hyperelliptic()?;
            emit(g.format, &json!({ "hyperelliptic": h, "stable_edges": s.num_edges() }), || format!("{h}\n"));
        }
        Command::Basis { graph, tree, cycle_order } => {
            let c = load_graph(&graph)?;
            let b = basis_for(&c, tree.as_deref(), cycle_order.as_deref())?;
            let (ls, _) = c.integer_lengths();
            let q = tropceresa::symplectic::polarization_from_lengths(&b, &ls);
            let report = b.report();
            let v = json!({ "basis": report, "q": q });
            emit(graph.format, &v, || {
                let mut s = format!("labels: {}\n", report.labels.join(" "));
                for (e, l) in &report.loop_classes {
                    let parts: Vec<String> = l.iter().map(|(k, c)| format!("{c}*{k}")).collect();
                    s.push_str(&format!("loop {e}: {}\n", if parts.is_empty() { "0".into() } else { parts.join(" + ") }));
                }
                s.push_str(&format!("Q:\n{q}\n"));
                s
            });
        }
        Command::Groups { graph, tree } => {
            let c = load_graph(&graph)?;
            let b = basis_for(&c, tree.as_deref(), None)?;
            let data = CurveData::new(&c, b)?;
            let gs = ceresa::group_summary(&data)?;
            let inv = invariant_factors(&data.q);
            let predicted = data.is_maximal().then(|| predicted_orders(&inv));
            let v = json!({
                "rank_status": data.rank_status(),
                "q_invariants": inv.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "groups": gs,
            });
            emit(graph.format, &v, || {
                let mut s = format!(
                    "invariant factors of Q: ({})\n",
                    inv.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
                );
                s.push_str(&format!("A = {}\nB = {}\nAbar = {}\nBbar = {}\n", gs.a, gs.b, gs.abar, gs.bbar));
                if let Some((a, b, ab, bb)) = predicted {
                    s.push_str(&format!("predicted orders: |A| = {a}, |B| = {b}, |Abar| = {ab}, |Bbar| = {bb}\n"));
                }
                s
            });
        }
        Command::Ceresa { graph, table, no_groups } => {
            let c = load_graph(&graph)?;
            let t = load_table(&graph, &table)?;
            let mut opts = options(&c, &table)?;
            opts.groups = !no_groups;
            let r = ceresa::analyze(&c, &t, &opts)?;
            emit(graph.format, &r, || r.render_text());
        }
        Command::Order { graph, table } => {
            let c = load_graph(&graph)?;
            let t = load_table(&graph, &table)?;
            let opts = AnalysisOptions { groups: false, zharkov: false, ..options(&c, &table)? };
            let r = ceresa::analyze(&c, &t, &opts)?;
            let v = json!({ "order": r.order.as_ref().map(|o| o.to_string()), "abar": r.abar, "h1_order": r.h1_order.as_ref().map(|o| o.to_string()) });
            emit(graph.format, &v, || match (&r.order, &r.abar.least_multiple) {
                (Some(o), _) if r.abar.in_abar => format!("{o}\n"),
                (_, Some(m)) if !r.abar.in_abar => format!("not in Abar (least multiple {m})\n"),
                _ => "undefined\n".into(),
            });
        }
        Command::Zharkov { graph, table } => {
            let c = load_graph(&graph)?;
            let t = load_table(&graph, &table)?;
            let opts = options(&c, &table)?;
            let data = data_for(&c, &t, &opts)?;
            let resolved = t.resolve(&c, &data.basis)?;
            let z = ceresa::zharkov_test(&data, &ceresa::v_class(&data, &resolved))?;
            emit(graph.format, &z, || {
                let gens: Vec<String> = z.relation_generators.iter().map(|r| r.display_symplectic()).collect();
                format!("w = {}\nrelations: {}\nobstructed: {}\n", z.w.display_symplectic(), gens.join("; "), z.obstructed)
            });
        }
        Command::Sample { graph, table, count, min, max, seed, workers } => {
            if min == 0 || min > max {
                return Err(schema("--min must be positive and at most --max"));
            }
            let c = load_graph(&graph)?;
            let t = load_table(&graph, &table)?;
            let opts = AnalysisOptions { groups: false, zharkov: false, ..options(&c, &table)? };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tuples: Vec<Vec<BigRational>> = (0..count)
                .map(|_| (0..c.num_edges()).map(|_| BigRational::from_integer(rng.gen_range(min..=max).into())).collect())
                .collect();
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Failure { code: 3, message: e.to_string() })?;
            let rows: Vec<CliResult<SampleRow>> = pool.install(|| {
                tuples
                    .par_iter()
                    .map(|ls| {
                        let curve = c.with_lengths(ls)?;
                        let r = ceresa::analyze(&curve, &t, &opts)?;
                        Ok(SampleRow {
                            lengths: ls.iter().map(format_rational).collect(),
                            verdict: r.verdict,
                            decided_by: r.decided_by,
                            order: r.order,
                        })
                    })
                    .collect()
            });
            let rows: Vec<SampleRow> = rows.into_iter().collect::<CliResult<_>>()?;
            let mut counts: BTreeMap<String, usize> = BTreeMap::new();
            for r in &rows {
                *counts.entry(r.verdict.to_string()).or_default() += 1;
            }
            let v = json!({ "seed": seed, "count": count, "range": [min, max], "verdicts": counts, "samples": rows });
            emit(graph.format, &v, || {
                let mut s = String::new();
                for r in &rows {
                    let o = r.order.as_ref().map_or("-".to_string(), |o| o.to_string());
                    s.push_str(&format!("{} {} order={}\n", r.lengths.join(","), r.verdict, o));
                }
                for (k, n) in &counts {
                    s.push_str(&format!("{k}: {n}\n"));
                }
                s
            });
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tropceresa: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
