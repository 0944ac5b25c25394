use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use atrahasis::cluster::{code_exit, Cluster, ClusterError, OpReport};
use atrahasis::code::{
    derive_params, fixture_956, rs_stars_t2, verify_axioms, AxiomReport, CodeError, Flavor, StarFamily,
};
use atrahasis::field::FieldSpec;
use atrahasis::format::{CodeSpec, FormatError};
use atrahasis::search::{grow_pool, sweep_small_cases, write_tsv, SearchConfig, SearchError, Verdict};
use atrahasis::transforms::{ShortenedCode, Strategy};

#[derive(Parser)]
#[command(name = "atrahasis", version, about = "MSR storage codes and a local cluster simulator")]
struct Cli {
    /// Code-spec file.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Cluster directory.
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    /// Field name such as gf16 or gf127.
    #[arg(long, global = true)]
    field: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build and verify a code, then write its spec.
    Gen(GenArgs),
    /// Store a file on the cluster (created from --spec if new).
    Put {
        file: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
    /// Restore a file from k live nodes.
    Get {
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        name: Option<String>,
        /// Comma-separated node list; defaults to the lowest live nodes.
        #[arg(long, value_delimiter = ',')]
        nodes: Option<Vec<usize>>,
    },
    /// Mark a node failed and delete its data.
    Fail { node: usize },
    /// Regenerate one failed node from d helpers.
    Repair {
        node: usize,
        /// `auto` or a comma-separated list.
        #[arg(long, default_value = "auto")]
        helpers: String,
    },
    /// Regenerate two failed nodes at once (symmetric, t = 3).
    Repair2 {
        f: usize,
        g: usize,
        #[arg(long, default_value = "subspace")]
        strategy: String,
        #[arg(long, default_value = "auto")]
        helpers: String,
    },
    /// Check every axiom of a spec.
    Verify { path: Option<PathBuf> },
    /// Witness the determinant condition for all small cases.
    Sweep {
        #[arg(long, default_value_t = 30)]
        alpha_cap: usize,
        #[arg(long, default_value_t = 10)]
        redraws: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Pin nodes of a spec to zero, giving an (n-δ, k-δ, d-δ) code.
    Shorten {
        path: Option<PathBuf>,
        #[arg(long)]
        delta: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Show node status and the bandwidth ledger.
    Status,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value = "symmetric")]
    flavor: String,
    /// rs, search or fixture.
    #[arg(long)]
    source: Option<String>,
    /// Named built-in code (atrahasis-956).
    #[arg(long)]
    fixture: Option<String>,
    /// Build this larger code and shorten it: `n,k,d`.
    #[arg(long, value_delimiter = ',')]
    shorten_from: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    x_pattern: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    y_pattern: Option<Vec<u32>>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

struct Failure {
    code: i32,
    msg: String,
}

impl From<CodeError> for Failure {
    fn from(e: CodeError) -> Self {
        Failure { code: code_exit(&e), msg: e.to_string() }
    }
}

impl From<ClusterError> for Failure {
    fn from(e: ClusterError) -> Self {
        Failure { code: e.exit_code(), msg: e.to_string() }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Code(c) => c.into(),
            other => Failure { code: 1, msg: other.to_string() },
        }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Code(c) => c.into(),
            SearchError::Pattern { .. } => Failure { code: 2, msg: e.to_string() },
            SearchError::PoolTooSmall { .. } => Failure { code: 3, msg: e.to_string() },
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

fn io_fail(path: &Path, e: io::Error) -> Failure {
    Failure { code: 1, msg: format!("{}: {e}", path.display()) }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code as u8)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.cmd {
        Cmd::Gen(args) => gen(cli, args),
        Cmd::Put { file, name } => {
            let data = fs::read(file).map_err(|e| io_fail(file, e))?;
            let spec = cli.spec.as_deref().map(load_spec).transpose()?;
            let mut cluster = Cluster::open_or_create(store(cli)?, spec)?;
            let name = name.clone().unwrap_or_else(|| file.file_name().map_or("object".into(), |n| n.to_string_lossy().into_owned()));
            let report = cluster.put(&name, &data)?;
            emit(cli, &report, &format!("stored {name:?}: {} bytes in {} chunks on {} nodes", data.len(), report.chunks, report.nodes.len()));
            Ok(())
        }
        Cmd::Get { out, name, nodes } => {
            let mut cluster = Cluster::open(store(cli)?)?;
            let (data, report) = cluster.get(name.as_deref(), nodes.clone())?;
            fs::write(out, &data).map_err(|e| io_fail(out, e))?;
            emit(cli, &report, &format!("restored {} bytes from nodes {:?} ({} symbols read)", data.len(), report.nodes, report.symbols));
            Ok(())
        }
        Cmd::Fail { node } => {
            let mut cluster = Cluster::open(store(cli)?)?;
            cluster.fail(*node)?;
            let live = cluster.live_nodes();
            if cli.json {
                println!("{}", json!({ "op": "fail", "node": node, "live": live }));
            } else {
                println!("node {node} failed; live nodes {live:?}");
            }
            Ok(())
        }
        Cmd::Repair { node, helpers } => {
            let mut cluster = Cluster::open(store(cli)?)?;
            let report = cluster.repair(*node, parse_helpers(helpers)?)?;
            emit(cli, &report, &format!(
                "repaired node {node} from {:?}: {} symbols over {} chunks ({} per chunk)",
                report.nodes, report.symbols, report.chunks, report.per_chunk
            ));
            Ok(())
        }
        Cmd::Repair2 { f, g, strategy, helpers } => {
            let strategy: Strategy = strategy.parse()?;
            let mut cluster = Cluster::open(store(cli)?)?;
            let report = cluster.repair2(*f, *g, strategy, parse_helpers(helpers)?)?;
            emit(cli, &report, &format!(
                "repaired nodes {f} and {g} ({strategy}) from {:?}: {} symbols over {} chunks ({} per chunk)",
                report.nodes, report.symbols, report.chunks, report.per_chunk
            ));
            Ok(())
        }
        Cmd::Verify { path } => verify(cli, path.as_deref().or(cli.spec.as_deref()).ok_or_else(|| usage("verify needs a spec path"))?),
        Cmd::Sweep { alpha_cap, redraws, out } => {
            let field = FieldSpec::parse(cli.field.as_deref().unwrap_or("gf127")).map_err(|e| usage(e.to_string()))?;
            let reports = sweep_small_cases(*alpha_cap, &field, cli.seed, *redraws);
            let mut buf = Vec::new();
            write_tsv(&reports, &mut buf).expect("writing to memory");
            match out {
                Some(p) => fs::write(p, &buf).map_err(|e| io_fail(p, e))?,
                None if !cli.json => io::stdout().write_all(&buf).map_err(|e| io_fail(Path::new("<stdout>"), e))?,
                None => {}
            }
            let open = reports.iter().filter(|r| r.verdict == Verdict::Inconclusive).count();
            if cli.json {
                let rows: Vec<_> = reports
                    .iter()
                    .map(|r| json!({ "k": r.params.k, "d": r.params.d, "t": r.params.t, "alpha": r.params.alpha, "redraws": r.redraws, "verdict": r.verdict.to_string() }))
                    .collect();
                println!("{}", json!({ "cases": rows, "inconclusive": open }));
            } else {
                eprintln!("{} cases, {} inconclusive", reports.len(), open);
            }
            if open > 0 {
                return Err(Failure { code: 1, msg: format!("{open} cases inconclusive") });
            }
            Ok(())
        }
        Cmd::Shorten { path, delta, out } => {
            let path = path.as_deref().or(cli.spec.as_deref()).ok_or_else(|| usage("shorten needs a spec path"))?;
            let spec = load_spec(path)?;
            let current = spec.shortened()?;
            let next = current.shorten(*delta)?;
            let shortened = CodeSpec { stars: spec.stars.clone(), pinned: next.pinned().to_vec() };
            write_spec(cli, &shortened, out.as_deref(), &next)
        }
        Cmd::Status => {
            let cluster = Cluster::open(store(cli)?)?;
            let m = cluster.manifest();
            if cli.json {
                println!("{}", serde_json::to_string_pretty(m).expect("manifest serializes"));
            } else {
                let c = cluster.code();
                use atrahasis::code::RegeneratingCode;
                println!("code ({}, {}, {}) alpha={} beta={} over {}", c.n(), c.k(), c.d(), c.alpha(), c.beta(), c.field());
                println!("live {:?} failed {:?}", cluster.live_nodes(), cluster.failed_nodes());
                println!("objects {:?}", cluster.object_names());
                let l = cluster.ledger();
                println!("ledger: repair {} repair2 {} download {}", l.repair_symbols, l.repair2_symbols, l.download_symbols);
            }
            Ok(())
        }
    }
}

fn store(cli: &Cli) -> Result<&Path, Failure> {
    cli.store.as_deref().ok_or_else(|| usage("--store is required"))
}

fn parse_helpers(s: &str) -> Result<Option<Vec<usize>>, Failure> {
    if s == "auto" {
        return Ok(None);
    }
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| usage(format!("bad helper list {s:?}"))))
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn emit(cli: &Cli, report: &OpReport, text: &str) {
    if cli.json {
        println!("{}", serde_json::to_string(report).expect("report serializes"));
    } else {
        println!("{text}");
    }
}

fn load_spec(path: &Path) -> Result<CodeSpec, Failure> {
    let loaded = CodeSpec::read(path)?;
    if !loaded.hash_matches {
        return Err(Failure { code: 1, msg: format!("{}: content hash does not match; run verify", path.display()) });
    }
    Ok(loaded.spec)
}

fn verify(cli: &Cli, path: &Path) -> Outcome {
    let loaded = CodeSpec::read(path)?;
    if !loaded.hash_matches {
        eprintln!("warning: {}: recorded content hash does not match the contents", path.display());
    }
    let report = verify_axioms(&loaded.spec.stars);
    let p = loaded.spec.stars.params();
    match &report {
        AxiomReport::Pass => {
            if cli.json {
                println!("{}", json!({ "verdict": "pass", "params": p, "hash_matches": loaded.hash_matches }));
            } else {
                println!("{}: all axioms hold for {p}", path.display());
            }
            Ok(())
        }
        AxiomReport::Violation(v) => {
            if cli.json {
                println!(
                    "{}",
                    json!({ "verdict": "violation", "axiom": v.axiom.to_string(), "failed": v.failed, "set": v.set, "hash_matches": loaded.hash_matches })
                );
            }
            Err(Failure { code: 4, msg: format!("axiom violation: {v}") })
        }
    }
}

fn write_spec(cli: &Cli, spec: &CodeSpec, out: Option<&Path>, code: &ShortenedCode) -> Outcome {
    use atrahasis::code::RegeneratingCode;
    match out {
        Some(p) => spec.write(p)?,
        None => print!("{}", spec.to_toml()),
    }
    let summary = format!("({}, {}, {}, {}) code, beta={}, {} pinned", code.n(), code.k(), code.d(), code.alpha(), code.beta(), spec.pinned.len());
    if cli.json {
        let desc = json!({ "n": code.n(), "k": code.k(), "d": code.d(), "alpha": code.alpha(), "beta": code.beta(), "pinned": spec.pinned, "params_hash": format!("{:#018x}", spec.params_hash()) });
        if out.is_some() {
            println!("{desc}");
        } else {
            eprintln!("{desc}");
        }
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn gen(cli: &Cli, a: &GenArgs) -> Outcome {
    let flavor: Flavor = a.flavor.parse()?;
    let (bn, bk, bd) = match &a.shorten_from {
        Some(v) if v.len() == 3 => (v[0], v[1], v[2]),
        Some(_) => return Err(usage("--shorten-from takes n,k,d")),
        None => (a.n, a.k, a.d),
    };
    let delta = bn.checked_sub(a.n).filter(|&dl| bk.checked_sub(a.k) == Some(dl) && bd.checked_sub(a.d) == Some(dl));
    let Some(delta) = delta else {
        return Err(usage(format!("--shorten-from {bn},{bk},{bd} must exceed ({}, {}, {}) by the same amount in each entry", a.n, a.k, a.d)));
    };
    let params = derive_params(bn, bk, bd, flavor).map_err(|e| match e {
        CodeError::NonIntegralT { shorten_from: (sn, sk, sd), .. } => Failure {
            code: 3,
            msg: format!("{e}\nhint: rerun with --shorten-from {sn},{sk},{sd}"),
        },
        other => other.into(),
    })?;
    let source = match (&a.fixture, a.source.as_deref()) {
        (Some(_), _) => "fixture",
        (None, Some(s)) => s,
        (None, None) if params.t == 2 => "rs",
        (None, None) => "search",
    };
    let stars: StarFamily = match source {
        "fixture" => {
            let name = a.fixture.as_deref().unwrap_or("atrahasis-956");
            if name != "atrahasis-956" {
                return Err(usage(format!("unknown fixture {name:?}")));
            }
            let fx = fixture_956();
            let fp = *fx.params();
            if (bk, bd, flavor) != (fp.k, fp.d, fp.flavor) || bn > fp.n {
                return Err(Failure { code: 3, msg: format!("fixture {name} is a ({}, {}, {}) symmetric code", fp.n, fp.k, fp.d) });
            }
            let points = fx.points().map(|p| p[..bn].to_vec());
            StarFamily::new(fx.field(), params, fx.x_stars()[..bn].to_vec(), fx.second_stars()[..bn].to_vec())?.with_points(points)
        }
        "rs" => {
            let field = FieldSpec::parse(cli.field.as_deref().unwrap_or("gf16")).map_err(|e| usage(e.to_string()))?;
            if params.t != 2 {
                return Err(Failure { code: 3, msg: format!("the rs source builds t = 2 codes; ({bn}, {bk}, {bd}) has t = {}", params.t) });
            }
            rs_stars_t2(&field, bn, bk, flavor)?
        }
        "search" => {
            let field = FieldSpec::parse(cli.field.as_deref().unwrap_or("gf16")).map_err(|e| usage(e.to_string()))?;
            let x_pattern = a.x_pattern.clone().unwrap_or_else(|| (0..params.t as u32).collect());
            let y_pattern = a.y_pattern.clone().unwrap_or_else(|| (0..params.second_len() as u32).collect());
            let cfg = SearchConfig { field, params, x_pattern, y_pattern, max_nodes: Some(bn) };
            let found = grow_pool(&cfg)?;
            if found.params().n < bn {
                return Err(Failure { code: 3, msg: format!("search found only {} nodes", found.params().n) });
            }
            found
        }
        other => return Err(usage(format!("unknown source {other:?} (rs, search, fixture)"))),
    };
    if let AxiomReport::Violation(v) = verify_axioms(&stars) {
        return Err(Failure { code: 4, msg: format!("generated code fails: {v}") });
    }
    let mut spec = CodeSpec::new(stars);
    let code = spec.shortened()?.shorten(delta)?;
    spec.pinned = code.pinned().to_vec();
    write_spec(cli, &spec, a.out.as_deref(), &code)
}
