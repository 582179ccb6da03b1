//! Command-line front end: solve for optimal design measures, verify
//! closed-form families, emit reduced-support block designs, and regenerate
//! the reference tables.
//!
//! Exit status: 0 on success, 1 on computational errors (and on tables with
//! unconverged cells), 2 on usage errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sls_design::analytic::{analytic_measure_on, thresholds, MeasureFamily};
use sls_design::combinatorial::{
    measure_from_incidence, reduced_support_design, verify_h_equivalence,
};
use sls_design::information::{check_optimal, Criterion};
use sls_design::reporting::{regenerate_table, TableArtifact, TableId, SCHEMA_VERSION};
use sls_design::solver::{relative_d_efficiency, solve, SolverConfig};
use sls_design::space::{DesignMeasure, DesignSpace};

/// Environment variable naming the default output directory for `tables`.
const OUT_DIR_ENV: &str = "SLS_DESIGN_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "sls-design",
    version,
    about = "D- and A-optimal approximate design measures under second-order least squares"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the multiplicative weight algorithm from the uniform measure
    Solve(SolveArgs),
    /// Emit a closed-form design measure and the thresholds for its dimension
    Analytic(AnalyticArgs),
    /// Check a measure's optimality through the pointwise bound
    Verify(VerifyArgs),
    /// Build the reduced-support block-design measure for a dimension
    ReduceSupport(ReduceSupportArgs),
    /// Regenerate the reference tables as CSV or JSON
    Tables(TablesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    D,
    A,
}

impl From<CriterionArg> for Criterion {
    fn from(value: CriterionArg) -> Self {
        match value {
            CriterionArg::D => Criterion::D,
            CriterionArg::A => Criterion::A,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    /// Uniform 1/3 on the three two-factor points (D-optimal for every t)
    TwoFactorD,
    /// Two-factor A-optimal measure (depends on t)
    TwoFactorA,
    /// Uniform on the two central weight classes (even q)
    EvenPair,
    /// Uniform on the central weight class (even q)
    EvenCentral,
    /// Uniform on the class of weight (q+1)/2 (odd q)
    OddCentral,
    /// Uniform over the whole space
    Uniform,
}

impl FamilyArg {
    fn family(self) -> Option<MeasureFamily> {
        match self {
            FamilyArg::TwoFactorD => Some(MeasureFamily::TwoFactorD),
            FamilyArg::TwoFactorA => Some(MeasureFamily::TwoFactorA),
            FamilyArg::EvenPair => Some(MeasureFamily::EvenPair),
            FamilyArg::EvenCentral => Some(MeasureFamily::EvenCentral),
            FamilyArg::OddCentral => Some(MeasureFamily::OddCentral),
            FamilyArg::Uniform => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            FamilyArg::TwoFactorD => "two-factor-d",
            FamilyArg::TwoFactorA => "two-factor-a",
            FamilyArg::EvenPair => "even-pair",
            FamilyArg::EvenCentral => "even-central",
            FamilyArg::OddCentral => "odd-central",
            FamilyArg::Uniform => "uniform",
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Design dimension (binary space of 2^q - 1 points)
    #[arg(long)]
    q: usize,
    /// Asymmetry parameter in [0, 1)
    #[arg(long)]
    t: f64,
    #[arg(long, value_enum, ignore_case = true)]
    criterion: CriterionArg,
    /// Stopping threshold on the psi gap
    #[arg(long, default_value_t = 1e-10)]
    delta: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    /// Iterate over all 2^q - 1 points instead of the weight classes
    #[arg(long)]
    full_space: bool,
    /// Write the full-precision result as JSON to this path
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long, value_enum, ignore_case = true)]
    kind: FamilyArg,
    #[arg(long)]
    q: usize,
    /// Required by two-factor-a, ignored otherwise
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    q: usize,
    #[arg(long)]
    t: f64,
    #[arg(long, value_enum, ignore_case = true)]
    measure: FamilyArg,
    /// Check only one criterion (default: both)
    #[arg(long, value_enum, ignore_case = true)]
    criterion: Option<CriterionArg>,
    /// Tolerance on the psi gap
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceSupportArgs {
    #[arg(long)]
    q: usize,
    /// Asymmetry values at which the information match is checked
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 0.9])]
    t: Vec<f64>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableArg {
    T1,
    T2,
    T3,
    T4,
    T5,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, value_enum, ignore_case = true)]
    id: TableArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write <id>.csv / <id>.json files here instead of stdout
    /// (defaults to $SLS_DESIGN_OUT_DIR when that is set)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Analytic(args) => run_analytic(args),
        Command::Verify(args) => run_verify(args),
        Command::ReduceSupport(args) => run_reduce_support(args),
        Command::Tables(args) => run_tables(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

type CliResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Box<dyn std::error::Error>> {
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

fn format_class_masses(masses: &[f64]) -> String {
    masses
        .iter()
        .map(|m| format!("{m:.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn run_solve(args: SolveArgs) -> CliResult {
    let space = DesignSpace::binary(args.q)?;
    let config = SolverConfig {
        delta: args.delta,
        max_iterations: args.max_iter,
        use_class_symmetry: !args.full_space,
        ..SolverConfig::default()
    };
    let criterion: Criterion = args.criterion.into();
    let result = solve(&space, args.t, criterion, &config)?;
    println!(
        "q={} t={} criterion={} delta={:.1e}",
        args.q, args.t, criterion, args.delta
    );
    println!(
        "{} after {} iterations, gap {:.3e}, phi {:.10}",
        if result.converged {
            "converged"
        } else {
            "NOT converged"
        },
        result.iterations,
        result.final_gap,
        result.phi
    );
    match result.measure.class_masses() {
        Some(pi) => println!("class masses: {}", format_class_masses(pi)),
        None => match result.measure.collapse_to_classes(1e-6) {
            Some(pi) => println!("class masses (collapsed): {}", format_class_masses(&pi)),
            None => println!("measure is not class-symmetric"),
        },
    }
    println!(
        "support: {} of {} points",
        result.measure.support_size(),
        space.num_points()
    );
    if let Some(path) = &args.json {
        let value = json!({
            "schema_version": SCHEMA_VERSION,
            "q": args.q,
            "t": args.t,
            "criterion": criterion,
            "delta": args.delta,
            "result": result,
        });
        write_json(path, &value)?;
    }
    Ok(ExitCode::from(if result.converged { 0 } else { 1 }))
}

fn build_measure(
    family: FamilyArg,
    space: &Arc<DesignSpace>,
    t: Option<f64>,
) -> Result<DesignMeasure, Box<dyn std::error::Error>> {
    Ok(match family.family() {
        Some(kind) => analytic_measure_on(space, kind, t)?,
        None => DesignMeasure::uniform(space),
    })
}

fn run_analytic(args: AnalyticArgs) -> CliResult {
    let space = DesignSpace::binary(args.q)?;
    let measure = build_measure(args.kind, &space, args.t)?;
    let mut ts = thresholds(args.q)?;
    if args.q == 2 {
        if let Some(t) = args.t {
            ts = ts.with_split_root(t)?;
        }
    }
    println!("measure={} q={}", args.kind.name(), args.q);
    println!(
        "class masses: {}",
        format_class_masses(measure.class_masses().unwrap_or(&[]))
    );
    println!(
        "support: {} of {} points",
        measure.support_size(),
        space.num_points()
    );
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    println!(
        "thresholds: t0={} t1={} t2={} xi_t={}",
        fmt(ts.t0),
        fmt(ts.t1),
        fmt(ts.t2),
        fmt(ts.xi_t)
    );
    if let Some(path) = &args.json {
        let value = json!({
            "schema_version": SCHEMA_VERSION,
            "kind": args.kind.name(),
            "measure": measure,
            "thresholds": ts,
        });
        write_json(path, &value)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_verify(args: VerifyArgs) -> CliResult {
    let space = DesignSpace::binary(args.q)?;
    let measure = build_measure(args.measure, &space, Some(args.t))?;
    let criteria: Vec<Criterion> = match args.criterion {
        Some(c) => vec![c.into()],
        None => vec![Criterion::D, Criterion::A],
    };
    println!("measure={} q={} t={}", args.measure.name(), args.q, args.t);
    let mut parts = Vec::new();
    let mut reports = Vec::new();
    for criterion in criteria {
        let (optimal, report) = check_optimal(&measure, args.t, criterion, args.tol);
        let text = match &report {
            Some(r) => format!(
                "{} ({criterion}) gap={:.3e}",
                if optimal { "optimal" } else { "not optimal" },
                r.max_gap
            ),
            None => format!("not optimal ({criterion}): singular information matrix"),
        };
        parts.push(text);
        reports.push(json!({
            "criterion": criterion,
            "optimal": optimal,
            "report": report,
        }));
    }
    println!("{}", parts.join("; "));
    if let Some(path) = &args.json {
        let value = json!({
            "schema_version": SCHEMA_VERSION,
            "measure": args.measure.name(),
            "q": args.q,
            "t": args.t,
            "tol": args.tol,
            "results": reports,
        });
        write_json(path, &value)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_reduce_support(args: ReduceSupportArgs) -> CliResult {
    let design = reduced_support_design(args.q)?;
    let space = DesignSpace::binary(args.q)?;
    let reduced = measure_from_incidence(&design, &space)?;
    let companion = if args.q.is_multiple_of(2) {
        MeasureFamily::EvenCentral
    } else {
        MeasureFamily::OddCentral
    };
    let full = analytic_measure_on(&space, companion, None)?;
    let (q, b, r, k, lambda) = design.params();
    println!("q={q}: block design (b={b}, r={r}, k={k}, lambda={lambda})");
    println!(
        "support: {} points vs {} for the {} family",
        reduced.support_size(),
        full.support_size(),
        companion
    );
    let mut checks = Vec::new();
    let mut worst = 0.0f64;
    for &t in &args.t {
        let (ok, diff) = verify_h_equivalence(&reduced, &full, t);
        worst = worst.max(diff);
        checks.push(json!({ "t": t, "matches": ok, "max_entrywise_diff": diff }));
        if !ok {
            println!("information mismatch at t={t}: max entrywise diff {diff:.3e}");
        }
    }
    println!(
        "information matrix matches the {} family at t = {:?} (max diff {:.2e})",
        companion, args.t, worst
    );
    if args.q.is_multiple_of(2) {
        let pair = analytic_measure_on(&space, MeasureFamily::EvenPair, None)?;
        let rel: Vec<String> = args
            .t
            .iter()
            .map(|&t| Ok(format!("{:.4}", relative_d_efficiency(&reduced, &pair, t)?)))
            .collect::<Result<_, sls_design::Error>>()?;
        println!(
            "relative D-efficiency vs the even-pair family at t = {:?}: {}",
            args.t,
            rel.join(", ")
        );
    }
    println!("incidence:\n{}", design.text_grid());
    if let Some(path) = &args.json {
        let value = json!({
            "schema_version": SCHEMA_VERSION,
            "design": design,
            "measure": reduced,
            "companion": companion.to_string(),
            "companion_support": full.support_size(),
            "information_checks": checks,
        });
        write_json(path, &value)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn table_ids(arg: TableArg) -> Vec<TableId> {
    match arg {
        TableArg::T1 => vec![TableId::T1],
        TableArg::T2 => vec![TableId::T2],
        TableArg::T3 => vec![TableId::T3],
        TableArg::T4 => vec![TableId::T4],
        TableArg::T5 => vec![TableId::T5],
        TableArg::All => TableId::all().to_vec(),
    }
}

fn run_tables(args: TablesArgs) -> CliResult {
    let out_dir = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    let mut all_converged = true;
    let ids = table_ids(args.id);
    let multiple = ids.len() > 1;
    for id in ids {
        let artifact: TableArtifact = regenerate_table(id)?;
        all_converged &= artifact.fully_converged();
        let (payload, extension) = match args.format {
            FormatArg::Csv => (artifact.to_csv(), "csv"),
            FormatArg::Json => (
                format!("{}\n", serde_json::to_string_pretty(&artifact)?),
                "json",
            ),
        };
        match &out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let path = dir.join(format!("{id}.{extension}"));
                std::fs::write(&path, payload)?;
                println!("wrote {}", path.display());
            }
            None => {
                if multiple {
                    println!("# {id}");
                }
                print!("{payload}");
            }
        }
    }
    Ok(ExitCode::from(if all_converged { 0 } else { 1 }))
}
