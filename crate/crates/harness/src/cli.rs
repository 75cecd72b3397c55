//! Command-line interface of the `lusin` binary.

use crate::artifacts::{write_json, CertifyReport, RunManifest, REPORT_VERSION};
use crate::error::{HarnessError, Result};
use crate::function_file::FunctionFile;
use clap::{Args, Parser, Subcommand, ValueEnum};
use lusin_core::check::{lipschitz_check, match_check, modulus_check, supnorm_check, tail_pinch_check, PairPlan};
use lusin_core::heisenberg::{
    characteristic_fraction, circulation_counterexample, holder_transfer_check, koranyi_dist, CcConfig, GraphMap,
    GraphSource, HPoint, HolderConfig, Surface,
};
use lusin_core::lusin::{multi_stage_build, BuildCertificate, BuildConfig};
use lusin_core::{BoxDomain, CatalogField, FieldCollection, Modulus};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
/// I/O or other runtime failure.
pub const EXIT_RUNTIME: i32 = 1;
/// Bad flags, files or configurations; nothing was computed.
pub const EXIT_USAGE: i32 = 2;
/// The constructor found no admissible parameters.
pub const EXIT_INFEASIBLE: i32 = 3;
/// The run finished but a ledger or a requested check failed.
pub const EXIT_CHECK_FAILED: i32 = 4;

pub const OUT_DIR_ENV: &str = "LUSIN_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "lusin", version, about = "Prescribe top-order derivatives with modulus control, and analyze Heisenberg graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a function from a catalog field and write function, certificate and manifest.
    Construct(ConstructArgs),
    /// Repeat the build described by a manifest.
    Rerun(RerunArgs),
    /// Re-check a function file by sampling.
    Certify(CertifyArgs),
    /// Heisenberg-group tools.
    #[command(subcommand)]
    Heis(HeisCommand),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out: PathBuf,
    /// File stem for the outputs.
    #[arg(long, default_value = "function")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// Catalog field: zero[:n:m], heisenberg, inv-x, quadratic-x, constant:n:m:v1,v2,...
    #[arg(long)]
    pub field: String,
    /// Lower corner, comma separated (default: origin).
    #[arg(long)]
    pub lower: Option<String>,
    /// Upper corner, comma separated (default: all ones).
    #[arg(long)]
    pub upper: Option<String>,
    #[arg(long, default_value_t = 32)]
    pub resolution: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    /// log, power:β, or pl:t0,v0;t1,v1;...
    #[arg(long, default_value = "log")]
    pub modulus: String,
    #[arg(long, default_value_t = 1e-3)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.02)]
    pub theta: f64,
    /// Stage count N.
    #[arg(long, default_value_t = 6)]
    pub stages: u32,
    /// Lusin truncation quantile in (0,1).
    #[arg(long)]
    pub quantile: Option<f64>,
    #[arg(long, default_value_t = 1 << 20)]
    pub max_cells: usize,
    /// Pairs for the modulus statistic in the certificate.
    #[arg(long, default_value_t = 10_000)]
    pub certify_pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckName {
    Match,
    Supnorm,
    Lipschitz,
    Modulus,
    Pinch,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Function file written by `construct`.
    pub function: PathBuf,
    /// Checks to run (default: all).
    #[arg(long, value_delimiter = ',', value_enum)]
    pub checks: Vec<CheckName>,
    /// Certificate with the cover and budgets (default: `<stem>.cert.json` beside the function).
    #[arg(long)]
    pub certificate: Option<PathBuf>,
    /// Pairs for pair checks; sample points for the others.
    #[arg(long, default_value_t = 10_000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path (default: `<stem>.report.json` beside the function).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum HeisCommand {
    /// Korányi distance and certified CC bounds between two points `x,y,t`.
    Dist(DistArgs),
    /// Graph analysis.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Line integrals of (2y, −2x) along the two unit-square paths.
    Counterexample,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(allow_hyphen_values = true)]
    pub p: String,
    #[arg(allow_hyphen_values = true)]
    pub q: String,
    #[arg(long, default_value_t = 128)]
    pub segments: usize,
    #[arg(long, default_value_t = 400)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SurfaceName {
    Zero,
    PlaneX,
    SqrtAbsX,
    Saddle,
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    /// Characteristic fraction and Hölder transfer of a graph.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Planar function file (n = 2, m ≥ 1).
    #[arg(required_unless_present = "surface", conflicts_with = "surface")]
    pub function: Option<PathBuf>,
    /// Closed-form surface on [−1,1]² instead of a file.
    #[arg(long, value_enum)]
    pub surface: Option<SurfaceName>,
    #[arg(long, default_value_t = 1e-3)]
    pub tau: f64,
    /// Analysis grid per axis; odd values avoid dyadic cell boundaries.
    #[arg(long, default_value_t = 257)]
    pub resolution: usize,
    #[arg(long, default_value_t = 2000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the full analysis as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_vec(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| HarnessError::Usage(format!("bad coordinate '{v}' in '{s}'")))
        })
        .collect()
}

fn exit_code(e: &HarnessError) -> i32 {
    match e {
        HarnessError::Core(lusin_core::Error::LemmaInfeasible { .. })
        | HarnessError::Core(lusin_core::Error::StageInfeasible { .. }) => EXIT_INFEASIBLE,
        HarnessError::Core(_)
        | HarnessError::Usage(_)
        | HarnessError::Version { .. }
        | HarnessError::Format { .. }
        | HarnessError::Json { .. } => EXIT_USAGE,
        HarnessError::Io { .. } => EXIT_RUNTIME,
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Construct(a) => construct(a),
        Command::Rerun(a) => rerun(a),
        Command::Certify(a) => certify(a),
        Command::Heis(HeisCommand::Dist(a)) => dist(a),
        Command::Heis(HeisCommand::Graph(GraphCommand::Analyze(a))) => analyze(a),
        Command::Heis(HeisCommand::Counterexample) => counterexample(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn construct(a: ConstructArgs) -> Result<i32> {
    let field: CatalogField = a.field.parse()?;
    let n = field.dim();
    let lower = a.lower.as_deref().map(parse_vec).transpose()?.unwrap_or_else(|| vec![0.0; n]);
    let upper = a.upper.as_deref().map(parse_vec).transpose()?.unwrap_or_else(|| vec![1.0; n]);
    let domain = BoxDomain::new(lower, upper)?;
    let modulus: Modulus = a.modulus.parse()?;
    let config = BuildConfig {
        epsilon: a.eps,
        sigma: a.sigma,
        modulus,
        resolution: a.resolution,
        theta: a.theta,
        tau: a.tau,
        quantile: a.quantile,
        max_stages: a.stages,
        seed: a.seed,
        max_cells: a.max_cells,
        certify_pairs: a.certify_pairs,
    };
    let manifest = RunManifest::construct(field.label(), domain, config);
    build_and_write(&manifest, &a.output)
}

fn rerun(a: RerunArgs) -> Result<i32> {
    let m = RunManifest::load(&a.manifest)?;
    let manifest = RunManifest::construct(m.field, m.domain, m.config);
    build_and_write(&manifest, &a.output)
}

/// Paths of the three `construct` outputs.
pub fn output_paths(out: &Path, name: &str) -> (PathBuf, PathBuf, PathBuf) {
    (
        out.join(format!("{name}.lfn")),
        out.join(format!("{name}.cert.json")),
        out.join(format!("{name}.manifest.json")),
    )
}

fn build_and_write(manifest: &RunManifest, output: &OutputArgs) -> Result<i32> {
    let field: CatalogField = manifest.field.parse()?;
    let label = field.label();
    let f = FieldCollection::catalog(field)?;
    if f.dim() != manifest.domain.dim() {
        return Err(HarnessError::Usage(format!(
            "field '{label}' is {}-dimensional but the domain is {}-dimensional",
            f.dim(),
            manifest.domain.dim()
        )));
    }
    manifest.config.validate()?;
    let (g, cert) = multi_stage_build(&f, &manifest.domain, &manifest.config)?;
    let (fpath, cpath, mpath) = output_paths(&output.out, &output.name);
    FunctionFile::new(g, manifest.domain.clone(), Some(label)).save(&fpath)?;
    write_json(&cpath, &cert)?;
    write_json(&mpath, manifest)?;

    let modulus_ok = cert.modulus_check.as_ref().is_none_or(|r| r.passed);
    println!("key,value");
    println!("function,{}", fpath.display());
    println!("certificate,{}", cpath.display());
    println!("terms,{}", cert.stages.iter().map(|s| s.terms).sum::<usize>());
    println!("stages,{}", cert.stages.len());
    println!("residual_measure,{}", cert.residual_measure);
    println!("epsilon_budget,{}", cert.epsilon * cert.domain_measure);
    println!("sup_ledger,{}", join(&cert.sup_ledger));
    println!("lipschitz_ledger,{}", join(&cert.lipschitz_ledger));
    println!("modulus_ledger,{}", cert.modulus_ledger);
    println!("within_budget,{}", cert.within_budget);
    println!("partial,{}", cert.partial);
    if let Some(r) = &cert.modulus_check {
        println!("modulus_check,{}", r.passed);
        println!("modulus_worst_ratio,{}", r.worst_ratio);
    }
    if !cert.stop_reason.is_empty() {
        println!("stop_reason,\"{}\"", cert.stop_reason.replace('"', "'"));
    }
    Ok(if cert.within_budget && !cert.partial && modulus_ok {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Runs the requested checks on a loaded function against its certificate.
pub fn certify_function(
    file: &FunctionFile,
    cert: &BuildCertificate,
    checks: &[CheckName],
    pairs: usize,
    seed: u64,
) -> Result<Vec<lusin_core::check::CheckReport>> {
    let g = &file.function;
    let dom = &file.header.domain;
    let plan = PairPlan::for_domain(dom, pairs);
    let mut out = Vec::new();
    for c in checks {
        let report = match c {
            CheckName::Match => {
                let label = file.header.field.as_deref().ok_or_else(|| {
                    HarnessError::Usage("match check needs the catalog field recorded in the function file".into())
                })?;
                let field = FieldCollection::catalog(label.parse()?)?;
                let boxes: Vec<_> = cert.covered_boxes().map(|b| b.as_pair()).collect();
                match_check(g, &field, &boxes, cert.tau, pairs, seed)
            }
            CheckName::Supnorm => supnorm_check(g, cert.sigma, dom, pairs, seed),
            CheckName::Lipschitz => lipschitz_check(g, cert.sigma, dom, &plan, seed),
            CheckName::Modulus => modulus_check(g, &cert.modulus, dom, &plan, seed),
            CheckName::Pinch => tail_pinch_check(g, &cert.stage_boxes(), cert.sigma, pairs, seed),
        };
        out.push(report);
    }
    Ok(out)
}

fn certify(a: CertifyArgs) -> Result<i32> {
    let file = FunctionFile::load(&a.function)?;
    let cpath = a.certificate.clone().unwrap_or_else(|| sibling(&a.function, ".cert.json"));
    let cert: BuildCertificate = crate::artifacts::read_json(&cpath)?;
    if cert.dim != file.header.dim || cert.order != file.header.order {
        return Err(HarnessError::Usage(format!(
            "certificate is for n={}, m={} but the function has n={}, m={}",
            cert.dim, cert.order, file.header.dim, file.header.order
        )));
    }
    let checks = if a.checks.is_empty() {
        vec![
            CheckName::Match,
            CheckName::Supnorm,
            CheckName::Lipschitz,
            CheckName::Modulus,
            CheckName::Pinch,
        ]
    } else {
        a.checks.clone()
    };
    let reports = certify_function(&file, &cert, &checks, a.pairs, a.seed)?;
    let passed = reports.iter().all(|r| r.passed);
    let report = CertifyReport {
        version: REPORT_VERSION,
        function: a.function.display().to_string(),
        seed: a.seed,
        pairs: a.pairs,
        checks: reports,
        passed,
    };
    let rpath = a.report.clone().unwrap_or_else(|| sibling(&a.function, ".report.json"));
    write_json(&rpath, &report)?;
    println!("check,passed,evaluated,worst_ratio,margin_factor,worst_separation");
    for r in &report.checks {
        println!(
            "{},{},{},{},{},{}",
            r.name,
            r.passed,
            r.evaluated,
            r.worst_ratio,
            r.margin_factor.map_or("inf".to_string(), |m| m.to_string()),
            r.worst_separation.map_or(String::new(), |s| s.to_string())
        );
    }
    println!("report,{}", rpath.display());
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn dist(a: DistArgs) -> Result<i32> {
    let p: HPoint = a.p.parse()?;
    let q: HPoint = a.q.parse()?;
    let cfg = CcConfig {
        segments: a.segments,
        iterations: a.iterations,
        seed: a.seed,
    };
    let b = lusin_core::heisenberg::cc_dist_bounds(&p, &q, &cfg);
    println!("key,value");
    println!("d_K,{}", koranyi_dist(&p, &q));
    println!("cc_lower,{}", b.lower);
    println!("cc_upper,{}", b.upper);
    println!("loose,{}", b.loose);
    Ok(EXIT_OK)
}

fn analyze(a: AnalyzeArgs) -> Result<i32> {
    let graph = match (&a.function, a.surface) {
        (Some(path), _) => {
            let file = FunctionFile::load(path)?;
            if file.header.dim != 2 || file.header.order < 1 {
                return Err(HarnessError::Usage(format!(
                    "graph analysis needs a planar function of order ≥ 1, got n={}, m={}",
                    file.header.dim, file.header.order
                )));
            }
            GraphMap::new(file.header.domain.clone(), GraphSource::Bump(file.function))?
        }
        (None, Some(s)) => {
            let surface = match s {
                SurfaceName::Zero => Surface::Constant { value: 0.0 },
                SurfaceName::PlaneX => Surface::PlaneX,
                SurfaceName::SqrtAbsX => Surface::SqrtAbsX,
                SurfaceName::Saddle => Surface::Saddle,
            };
            GraphMap::surface(BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0])?, surface)?
        }
        (None, None) => return Err(HarnessError::Usage("give a function file or --surface".into())),
    };
    let frac = characteristic_fraction(&graph, a.tau, a.resolution)?;
    let cfg = HolderConfig {
        pairs_per_bin: a.pairs,
        ..HolderConfig::for_graph(&graph, a.seed)
    };
    let transfer = holder_transfer_check(&graph, &cfg)?;
    println!("key,value");
    println!("characteristic_fraction,{}", frac.fraction);
    println!("tau,{}", frac.tau);
    println!("excluded_cells,{}", frac.excluded);
    println!("alpha_u,{}", transfer.alpha_u.exponent);
    println!("alpha_phi,{}", transfer.alpha_phi.exponent);
    println!("transfer_gap,{}", transfer.gap);
    println!("transfer_passed,{}", transfer.passed);
    println!("degenerate,{}", transfer.degenerate);
    if let Some(path) = &a.report {
        write_json(
            path,
            &serde_json::json!({ "characteristic": frac, "holder": transfer, "holder_config": cfg }),
        )?;
    }
    Ok(if transfer.passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn counterexample() -> Result<i32> {
    let c = circulation_counterexample();
    println!("key,value");
    println!("path_a,{}", c.path_a);
    println!("path_b,{}", c.path_b);
    println!("difference,{}", c.difference);
    println!("green,{}", c.green);
    Ok(EXIT_OK)
}
