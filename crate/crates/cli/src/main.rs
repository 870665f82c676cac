use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use drgcert::certify::{self, Bases, CertReport, CertifyOptions, Check, CheckList, Family};
use drgcert::graph::{self, Graph, Side};
use drgcert::quadgeom::{self, B3Geometry, D4Geometry};
use drgcert::zgraph::{self, ZVertex};
use drgcert::Field;
use serde::{Deserialize, Serialize};

mod cache;

const VERSION: &str = env!("CARGO_PKG_VERSION");
const Z_MAX_Q: u64 = 5;
const GEOMETRIC_MAX_Q: u64 = 3;

#[derive(Parser)]
#[command(name = "drgcert", version, about = "Build and certify distance-regular graphs from dual polar geometry")]
struct Cli {
    /// Worker threads for the parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a graph and write graph6, labels and provenance files.
    Build {
        family: BuildFamily,
        #[arg(long)]
        q: u64,
        /// Output graph6 path; labels and provenance go beside it.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "DRGCERT_CACHE_DIR")]
        cache_dir: Option<PathBuf>,
        /// Allow q beyond the default bounds.
        #[arg(long)]
        force: bool,
    },
    /// Apply a chain of transforms, left to right.
    Transform {
        input: PathBuf,
        /// Comma-separated: bd, ebd, halve, dist12, complement.
        #[arg(long, value_delimiter = ',', required = true)]
        ops: Vec<TransformOp>,
        #[arg(long)]
        out: PathBuf,
        /// Color class kept by `halve`.
        #[arg(long, value_enum, default_value = "plus")]
        side: SideArg,
    },
    /// Certify a graph6 file; exits nonzero if any check fails.
    Certify {
        input: PathBuf,
        /// Compare with closed-form parameters, e.g. `z:2` or `d4far:3`.
        #[arg(long)]
        expect: Option<String>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Sweep only this many base vertices.
        #[arg(long)]
        sample: Option<usize>,
        /// Largest graph for the rank cross-check of multiplicities.
        #[arg(long, default_value_t = CertifyOptions::default().rank_check_limit)]
        rank_limit: usize,
    },
    /// Build every family for each q and run all certifications and cross-checks.
    PaperSuite {
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<u64>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BuildFamily {
    Z,
    B3,
    D4,
    B3far,
    D4far,
}

impl BuildFamily {
    fn name(self) -> &'static str {
        match self {
            BuildFamily::Z => "z",
            BuildFamily::B3 => "b3",
            BuildFamily::D4 => "d4",
            BuildFamily::B3far => "b3far",
            BuildFamily::D4far => "d4far",
        }
    }

    fn max_q(self) -> u64 {
        match self {
            BuildFamily::Z => Z_MAX_Q,
            _ => GEOMETRIC_MAX_Q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TransformOp {
    Bd,
    Ebd,
    Halve,
    Dist12,
    Complement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Plus,
    Minus,
}

/// Written beside every graph6 artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Provenance {
    family: Option<String>,
    q: Option<u64>,
    modulus: Option<String>,
    version: String,
    #[serde(default)]
    transforms: Vec<String>,
}

#[derive(Debug)]
enum CliError {
    /// Bad input or unsupported request; nothing was computed.
    Usage(anyhow::Error),
    /// The run completed but some check failed.
    Failed,
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed) => ExitCode::FAILURE,
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Build {
            family,
            q,
            out,
            cache_dir,
            force,
        } => cmd_build(family, q, &out, cache_dir.as_deref(), force).map_err(Into::into),
        Command::Transform {
            input,
            ops,
            out,
            side,
        } => cmd_transform(&input, &ops, &out, side).map_err(Into::into),
        Command::Certify {
            input,
            expect,
            report,
            sample,
            rank_limit,
        } => cmd_certify(&input, expect.as_deref(), report.as_deref(), sample, rank_limit),
        Command::PaperSuite {
            q,
            report,
            sample,
            force,
        } => cmd_paper_suite(&q, report.as_deref(), sample, force),
    }
}

fn check_q(q: u64, max: u64, force: bool) -> Result<Field> {
    let field = Field::new(q).map_err(|e| anyhow!("UnsupportedQ: {e}"))?;
    if q > max && !force {
        bail!("UnsupportedQ: q = {q} exceeds the default bound {max} for this family (use --force)");
    }
    Ok(field)
}

fn build_graph(family: BuildFamily, field: &Field) -> Result<Graph> {
    Ok(match family {
        BuildFamily::Z => zgraph::build_z_over(field),
        BuildFamily::B3 => B3Geometry::over(field).graph,
        BuildFamily::D4 => D4Geometry::over(field)?.graph,
        BuildFamily::B3far => B3Geometry::over(field).far_from_vertex().0,
        BuildFamily::D4far => D4Geometry::over(field)?.far_from_edge()?.0,
    })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(value).expect("serializable");
    s.push(b'\n');
    s
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("IoError: creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("IoError: writing {}", path.display()))
}

fn write_artifact(out: &Path, g6: &[u8], labels: &[u8], prov: &Provenance) -> Result<()> {
    let mut line = g6.to_vec();
    line.push(b'\n');
    write(out, &line)?;
    write(&sibling(out, "labels.json"), labels)?;
    write(&sibling(out, "provenance.json"), &to_json(prov))
}

fn labels_json(g: &Graph) -> Vec<u8> {
    let labels: Vec<String> = match g.labels() {
        Some(l) => l.to_vec(),
        None => (0..g.n()).map(|v| v.to_string()).collect(),
    };
    to_json(&labels)
}

fn cmd_build(family: BuildFamily, q: u64, out: &Path, cache_dir: Option<&Path>, force: bool) -> Result<()> {
    let field = check_q(q, family.max_q(), force)?;
    let prov = Provenance {
        family: Some(family.name().into()),
        q: Some(q),
        modulus: Some(field.modulus_string()),
        version: VERSION.into(),
        transforms: Vec::new(),
    };
    let key = cache::key(&["build", family.name(), &q.to_string(), VERSION]);
    if let Some(dir) = cache_dir {
        if let Some(entry) = cache::load(dir, &key)? {
            write_artifact(out, &entry.g6, &entry.labels, &prov)?;
            eprintln!("{} q={q}: cache hit {}", family.name(), &key[..12]);
            return Ok(());
        }
    }
    let g = build_graph(family, &field)?;
    let g6 = graph::graph6_encode(&g);
    let labels = labels_json(&g);
    if let Some(dir) = cache_dir {
        cache::store(dir, &key, &g6, &labels)?;
    }
    write_artifact(out, &g6, &labels, &prov)?;
    eprintln!(
        "{} q={q}: {} vertices, {} edges -> {}",
        family.name(),
        g.n(),
        g.edge_count(),
        out.display()
    );
    Ok(())
}

fn read_graph(path: &Path) -> Result<Graph> {
    let bytes = fs::read(path).with_context(|| format!("IoError: reading {}", path.display()))?;
    graph::graph6_decode(&bytes).map_err(|e| anyhow!("{e}"))
}

fn read_provenance(path: &Path) -> Option<Provenance> {
    let bytes = fs::read(sibling(path, "provenance.json")).ok()?;
    serde_json::from_slice(&bytes).ok()
}

fn apply(g: &Graph, op: TransformOp, side: Side) -> Result<Graph> {
    Ok(match op {
        TransformOp::Bd => graph::bipartite_double(g),
        TransformOp::Ebd => graph::extended_bipartite_double(g),
        TransformOp::Halve => {
            let g = match g.bipartition() {
                Some(_) => g.clone(),
                None => g.clone().with_detected_bipartition()?,
            };
            graph::halved_graph(&g, side)?
        }
        TransformOp::Dist12 => graph::distance_1_or_2(g),
        TransformOp::Complement => graph::complement(g),
    })
}

fn cmd_transform(input: &Path, ops: &[TransformOp], out: &Path, side: SideArg) -> Result<()> {
    let mut g = read_graph(input)?;
    let side = match side {
        SideArg::Plus => Side::Plus,
        SideArg::Minus => Side::Minus,
    };
    let mut prov = read_provenance(input).unwrap_or(Provenance {
        family: None,
        q: None,
        modulus: None,
        version: VERSION.into(),
        transforms: Vec::new(),
    });
    prov.version = VERSION.into();
    for &op in ops {
        g = apply(&g, op, side)?;
        let name = serde_json::to_value(op).expect("serializable");
        let mut step = name.as_str().unwrap_or_default().to_string();
        if op == TransformOp::Halve {
            step.push_str(if side == Side::Plus { ":plus" } else { ":minus" });
        }
        prov.transforms.push(step);
    }
    write_artifact(out, &graph::graph6_encode(&g), &labels_json(&g), &prov)?;
    eprintln!("{} vertices, {} edges -> {}", g.n(), g.edge_count(), out.display());
    Ok(())
}

fn parse_expect(s: &str) -> Result<(Family, u64)> {
    let (fam, q) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("--expect takes family:q, got {s:?}"))?;
    let family = Family::parse(fam).ok_or_else(|| anyhow!("unknown family {fam:?}"))?;
    let q: u64 = q.parse().with_context(|| format!("bad q in {s:?}"))?;
    Field::new(q).map_err(|e| anyhow!("UnsupportedQ: {e}"))?;
    Ok((family, q))
}

fn options(sample: Option<usize>, rank_limit: usize) -> CertifyOptions {
    CertifyOptions {
        bases: sample.map_or(Bases::All, Bases::Sample),
        rank_check_limit: rank_limit,
    }
}

fn summarize(report: &CertReport) {
    for c in report.checks.iter() {
        let status = if c.pass { "pass" } else { "FAIL" };
        match &c.witness {
            Some(w) => eprintln!("  {status} {}: {w}", c.name),
            None => eprintln!("  {status} {}", c.name),
        }
    }
}

fn cmd_certify(
    input: &Path,
    expect: Option<&str>,
    report_path: Option<&Path>,
    sample: Option<usize>,
    rank_limit: usize,
) -> Result<(), CliError> {
    let expected = expect.map(parse_expect).transpose()?;
    let g = read_graph(input)?;
    let source = input.display().to_string();
    let mut report = certify::certify_graph(&g, &source, options(sample, rank_limit));
    if let Some((family, q)) = expected {
        let cmp = certify::compare_expected(&report, &certify::expected_params(family, q));
        report.checks.extend(cmp);
    }
    if let Some(path) = report_path {
        write(path, &to_json(&report))?;
    }
    eprintln!("{source}: {} vertices, {} edges", g.n(), g.edge_count());
    if let Some(a) = &report.array {
        eprintln!("  intersection array {a}");
    }
    summarize(&report);
    if report.all_pass() {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}

#[derive(Serialize)]
struct SuiteReport {
    qs: Vec<u64>,
    pass: bool,
    graphs: Vec<SuiteEntry>,
    checks: CheckList,
}

#[derive(Serialize)]
struct SuiteEntry {
    family: &'static str,
    q: u64,
    report: CertReport,
}

struct Suite {
    opts: CertifyOptions,
    graphs: Vec<SuiteEntry>,
    checks: CheckList,
}

impl Suite {
    fn certify(&mut self, g: &Graph, family: Family, q: u64, source: &str) {
        let mut report = certify::certify_graph(g, source, self.opts);
        report
            .checks
            .extend(certify::compare_expected(&report, &certify::expected_params(family, q)));
        let ok = if report.all_pass() { "pass" } else { "FAIL" };
        eprintln!("  {ok} {source}");
        if !report.all_pass() {
            summarize(&report);
        }
        self.graphs.push(SuiteEntry {
            family: family.name(),
            q,
            report,
        });
    }

    fn check(&mut self, q: u64, c: Check) {
        let ok = if c.pass { "pass" } else { "FAIL" };
        eprintln!("  {ok} {} (q={q})", c.name);
        if let Some(w) = &c.witness {
            eprintln!("       {w}");
        }
        self.checks.push(Check {
            name: format!("{} (q={q})", c.name),
            ..c
        });
    }

    fn checks(&mut self, q: u64, list: CheckList) {
        for c in list.checks {
            self.check(q, c);
        }
    }
}

fn cmd_paper_suite(qs: &[u64], report_path: Option<&Path>, sample: Option<usize>, force: bool) -> Result<(), CliError> {
    // Validate every q before doing any work.
    let fields = qs
        .iter()
        .map(|&q| check_q(q, GEOMETRIC_MAX_Q, force))
        .collect::<Result<Vec<_>>>()?;
    let mut suite = Suite {
        opts: options(sample, CertifyOptions::default().rank_check_limit),
        graphs: Vec::new(),
        checks: CheckList::default(),
    };
    for (&q, field) in qs.iter().zip(&fields) {
        eprintln!("q = {q} (modulus {})", field.modulus_string());
        let z = zgraph::build_z_over(field);
        suite.certify(&z, Family::Z, q, &format!("z q={q}"));
        let ebd = graph::extended_bipartite_double(&z);
        suite.certify(&ebd, Family::EbdZ, q, &format!("ebd(z) q={q}"));
        let d12 = graph::distance_1_or_2(&z);
        suite.certify(&d12, Family::SrgHalf, q, &format!("dist12(z) q={q}"));

        let z3 = graph::complement(&d12);
        let z3_check = match certify::check_srg(&z3) {
            certify::SrgOutcome::Strong(p) => {
                Check::pass("distance-3 graph of Z is strongly regular").with_value("params", p.to_string())
            }
            r => Check::fail("distance-3 graph of Z is strongly regular", format!("{r:?}")),
        };
        suite.check(q, z3_check);

        let halved = graph::halved_graph(&ebd, Side::Plus).map_err(|e| anyhow!("{e}"))?;
        let same = halved.edges().eq(d12.edges());
        suite.check(
            q,
            Check::from_witness(
                "halved extended double equals distance-1-or-2 graph",
                (!same).then(|| "edge sets differ under the identity map".to_string()),
            ),
        );
        let p = graph::bfs_partition(&z, 0);
        let bad = (0..z.n()).find(|&v| {
            zgraph::z_distance_class(field, &ZVertex::from_id(v, q as usize)) as u32 != p.dist[v]
        });
        suite.check(
            q,
            Check::from_witness(
                "closed-form distance classes agree with BFS",
                bad.map(|v| format!("vertex {}", ZVertex::from_id(v, q as usize).label())),
            ),
        );

        let b3 = B3Geometry::over(field);
        suite.certify(&b3.graph, Family::B3DualPolar, q, &format!("b3 q={q}"));
        let (b3far, _) = b3.far_from_vertex();
        suite.certify(&b3far, Family::Z, q, &format!("b3far q={q}"));
        let d4 = D4Geometry::over(field).map_err(|e| anyhow!("{e}"))?;
        let (d4far, _) = d4.far_from_edge().map_err(|e| anyhow!("{e}"))?;
        suite.certify(&d4far, Family::D4Far, q, &format!("d4far q={q}"));

        suite.checks(q, zgraph::verify_prop32_iso_with(&b3, &z));
        suite.check(q, zgraph::det_check(field));
        if q == 2 {
            suite.check(q, zgraph::kernel_check(field));
        }
        suite.checks(q, quadgeom::reflection_quotient_check_with(&d4, &b3));
        let ebd_map = quadgeom::ebd_correspondence_check(&d4, &b3).map_err(|e| anyhow!("{e}"))?;
        suite.check(q, ebd_map);
        let nonorth = quadgeom::nonorthogonality_check(&d4).map_err(|e| anyhow!("{e}"))?;
        suite.check(q, nonorth);
    }
    let pass = suite.checks.all_pass() && suite.graphs.iter().all(|e| e.report.all_pass());
    let report = SuiteReport {
        qs: qs.to_vec(),
        pass,
        graphs: suite.graphs,
        checks: suite.checks,
    };
    if let Some(path) = report_path {
        write(path, &to_json(&report))?;
    }
    eprintln!("paper suite: {}", if pass { "pass" } else { "FAIL" });
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}
