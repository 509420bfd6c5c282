//! `hopflab`: mesh generation, Hopf invariants, dilation estimates, homotopy
//! audits and squeeze-map sweeps from the command line.
//!
//! Reports are JSON on stdout (or `--out`). Exit status: 0 on success, 1 on
//! invalid input, 2 when a numerical tolerance is not met.

mod selftest;

use clap::{Args, Parser, Subcommand};
use hopflab::audit::{audit_homotopy, default_steps, verify_chain_bounds, AuditConfig, AuditReport, ChainBound};
use hopflab::construction::{sweep, SweepConfig};
use hopflab::dilation::{check_dilation_relation, dilation, RelationCheck, SamplingPlan};
use hopflab::forms::bump_area_form;
use hopflab::hopf::{hopf_invariant, linking_report, HopfConfig, HopfReport, LinkingReport, DEFAULT_ORACLE_LEVEL};
use hopflab::maps::lookup;
use hopflab::mesh::{gen_product_interval, gen_sphere, save_mesh};
use hopflab::{Error, Result};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "hopflab", version, about = "Generalized Hopf invariants and k-dilation on simplicial meshes")]
struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Degree of the simplex quadrature rules.
    #[arg(long = "quad-order", global = true, default_value_t = 9)]
    quad_order: usize,
    /// Mesh refinement level.
    #[arg(long, global = true)]
    level: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a sphere or product mesh file.
    Mesh(MeshArgs),
    /// Generalized Hopf invariant of a map S³ → R³.
    Hopf(HopfArgs),
    /// Sup of the k-dilation over a sample of the domain.
    Dilation(DilationArgs),
    /// Run the robustness chain on a homotopy S³×[0,1] → R³.
    Audit(AuditArgs),
    /// Sweep the squeeze map over δ and report the rank collapse.
    Construct(ConstructArgs),
    /// Run the built-in suite of exact checks.
    Selftest,
}

#[derive(Args, Debug, Serialize)]
struct MeshArgs {
    /// Dimension of the sphere (2 or 3).
    #[arg(long, default_value_t = 3)]
    sphere_dim: usize,
    /// Build S³×[0,1] with this many time steps.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct HopfArgs {
    #[arg(long, default_value = "i∘hopf")]
    map: String,
    /// Each projection triangle is split into m² pieces.
    #[arg(long, default_value_t = 4)]
    subdivisions: usize,
    /// Also compute the linking number of two fibers of this map S³ → S².
    #[arg(long)]
    oracle: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct DilationArgs {
    #[arg(long)]
    map: String,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Also check (dil_j)^{1/j} ≥ (dil_k)^{1/k} per sample for this j < k.
    #[arg(long)]
    relation: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct AuditArgs {
    #[arg(long, default_value = "line-null:i∘hopf")]
    homotopy: String,
    /// S³ level of the product mesh (overrides --level).
    #[arg(long = "mesh-level")]
    mesh_level: Option<usize>,
    /// Time steps; defaults to the longest spatial edge.
    #[arg(long)]
    steps: Option<usize>,
    /// S³ level for the independent end-point Hopf values; negative uses the end slices.
    #[arg(long, default_value_t = 3, allow_negative_numbers = true)]
    reference_level: i64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Args, Debug, Serialize)]
struct ConstructArgs {
    /// Source map F₀: B⁴ → B³.
    #[arg(long, default_value = "cone:hopf")]
    map: String,
    /// Comma-separated δ values.
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// JSON sweep configuration; flags given explicitly override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Settings shared by all commands, as embedded in reports.
#[derive(Debug, Serialize)]
struct Common {
    seed: u64,
    quad_order: usize,
    level: Option<usize>,
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    common: &'a Common,
    config: C,
    mesh_checksums: Vec<String>,
    report: R,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

fn emit_report<C: Serialize, R: Serialize>(
    cli: &Cli,
    common: &Common,
    command: &'static str,
    config: C,
    mesh_checksums: Vec<String>,
    report: R,
) -> Result<()> {
    let env = Envelope { tool: "hopflab", version: env!("CARGO_PKG_VERSION"), command, seed: cli.seed, common, config, mesh_checksums, report };
    let mut text = serde_json::to_string_pretty(&env).expect("reports serialize");
    text.push('\n');
    emit(cli.out.as_deref(), &text)
}

fn hopf_config(cli: &Cli) -> HopfConfig {
    HopfConfig { quadrature_order: cli.quad_order, wedge_order: cli.quad_order, seed: cli.seed, ..HopfConfig::default() }
}

fn run_mesh(cli: &Cli, args: &MeshArgs) -> Result<()> {
    if !matches!(args.sphere_dim, 2 | 3) {
        return Err(Error::Parameter { name: "sphere-dim".into(), detail: format!("expected 2 or 3, got {}", args.sphere_dim) });
    }
    let level = cli.level.unwrap_or(2);
    let mut c = gen_sphere(args.sphere_dim, level)?;
    if let Some(steps) = args.steps {
        if args.sphere_dim != 3 {
            return Err(Error::Parameter { name: "steps".into(), detail: "products are built over S³ only".into() });
        }
        c = gen_product_interval(&c, steps)?;
    }
    match &cli.out {
        Some(path) => save_mesh(&c, path)?,
        None => emit(None, &c.to_json_string())?,
    }
    eprintln!("{} simplices per degree {:?}, checksum {}", if args.steps.is_some() { "product" } else { "sphere" }, c.counts(), c.checksum());
    Ok(())
}

#[derive(Serialize)]
struct HopfOutput {
    hopf: HopfReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<LinkingReport>,
}

fn run_hopf(cli: &Cli, common: &Common, args: &HopfArgs) -> Result<()> {
    let f = lookup(&args.map)?;
    let level = cli.level.unwrap_or(3);
    let c = gen_sphere(3, level)?;
    let config = HopfConfig { projection_subdivisions: args.subdivisions, ..hopf_config(cli) };
    let hopf = hopf_invariant(&f, &bump_area_form(), &c, &config)?;
    let oracle = match &args.oracle {
        Some(name) => Some(linking_report(&lookup(name)?, &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], DEFAULT_ORACLE_LEVEL)?),
        None => None,
    };
    #[derive(Serialize)]
    struct Config<'a> {
        args: &'a HopfArgs,
        hopf: &'a HopfConfig,
    }
    let checksums = vec![c.checksum().to_string()];
    emit_report(cli, common, "hopf", Config { args, hopf: &config }, checksums, HopfOutput { hopf, oracle })
}

fn run_dilation(cli: &Cli, common: &Common, args: &DilationArgs) -> Result<()> {
    let f = lookup(&args.map)?;
    let plan = SamplingPlan { samples: args.samples, seed: cli.seed, ..SamplingPlan::default() };
    let report = dilation(&f, args.k, &plan)?;
    let relation: Option<RelationCheck> = match args.relation {
        Some(j) => Some(check_dilation_relation(&f, j, args.k, &plan)?),
        None => None,
    };
    #[derive(Serialize)]
    struct Out {
        dilation: hopflab::dilation::DilationReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        relation: Option<RelationCheck>,
    }
    #[derive(Serialize)]
    struct Config<'a> {
        args: &'a DilationArgs,
        plan: &'a SamplingPlan,
    }
    emit_report(cli, common, "dilation", Config { args, plan: &plan }, vec![], Out { dilation: report, relation })
}

fn run_audit(cli: &Cli, common: &Common, args: &AuditArgs) -> Result<()> {
    let f = lookup(&args.homotopy)?;
    let level = args.mesh_level.or(cli.level).unwrap_or(1);
    let base = gen_sphere(3, level)?;
    let steps = args.steps.unwrap_or_else(|| default_steps(&base));
    let product = gen_product_interval(&base, steps)?;
    let config = AuditConfig {
        hopf: hopf_config(cli),
        reference_level: usize::try_from(args.reference_level).ok(),
        plan: SamplingPlan { samples: args.samples, seed: cli.seed, ..SamplingPlan::default() },
        ..AuditConfig::default()
    };
    let audit = audit_homotopy(&f, &bump_area_form(), &product, &config)?;
    let chain_bounds = verify_chain_bounds(&audit);
    #[derive(Serialize)]
    struct Out {
        audit: AuditReport,
        chain_bounds: Vec<ChainBound>,
    }
    #[derive(Serialize)]
    struct Config<'a> {
        args: &'a AuditArgs,
        level: usize,
        steps: usize,
        audit: &'a AuditConfig,
    }
    let checksums = vec![product.checksum().to_string()];
    emit_report(cli, common, "audit", Config { args, level, steps, audit: &config }, checksums, Out { audit, chain_bounds })
}

fn run_construct(cli: &Cli, common: &Common, args: &ConstructArgs) -> Result<()> {
    let mut config: SweepConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
            serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), column: e.column(), message: e.to_string() })?
        }
        None => SweepConfig::default(),
    };
    if let Some(d) = &args.deltas {
        config.deltas = d.clone();
    }
    if let Some(w) = args.w {
        config.w = w;
    }
    if let Some(r) = args.r {
        config.r = r;
    }
    if let Some(n) = args.samples {
        config.plan.samples = n;
    }
    if args.config.is_none() || cli.seed != 0 {
        config.plan.seed = cli.seed;
    }
    let f0 = lookup(&args.map)?;
    let report = sweep(&f0, &config)?;
    if let Some(path) = &args.csv {
        std::fs::write(path, report.to_csv()).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    }
    emit_report(cli, common, "construct", args, vec![], report)
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Parameter { name: "threads".into(), detail: e.to_string() })?;
    }
    let common = Common { seed: cli.seed, quad_order: cli.quad_order, level: cli.level };
    match &cli.command {
        Command::Mesh(a) => run_mesh(cli, a),
        Command::Hopf(a) => run_hopf(cli, &common, a),
        Command::Dilation(a) => run_dilation(cli, &common, a),
        Command::Audit(a) => run_audit(cli, &common, a),
        Command::Construct(a) => run_construct(cli, &common, a),
        Command::Selftest => {
            let failures = selftest::run(&mut std::io::stdout().lock());
            if failures == 0 {
                Ok(())
            } else {
                Err(Error::AuditInconsistent { detail: format!("{failures} self-test check(s) failed") })
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
