//! `ebr`: command-line front end for the eigenvalue-based randomness test.
//!
//! Exit codes: 0 = H₀ not rejected / success, 3 = H₀ rejected,
//! 1 = usage error, 2 = data or runtime error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ebr_core::dgp::DgpSpec;
use ebr_core::ebr::{ebr_test, EbrConfig, EbrResult};
use ebr_core::io::{ingest, write_matrix_file, IngestSpec, Orientation};
use ebr_core::power::{
    correlation_summary, render_svg, run_grid_with_workers, write_figure_csv, emit_figure_data, ExperimentGrid,
    FigureCase, DEFAULT_M_VALUES, DEFAULT_N_VALUES, DEFAULT_PHI_VALUES, DEFAULT_RHO_VALUES,
};
use ebr_core::twdist::{self, TwTable};
use ebr_core::{rng, EbrError};

const EXIT_ACCEPT: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_REJECT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "ebr", version, about = "Eigenvalue-based randomness test for panel residual matrices")]
struct Cli {
    /// Cache file for the Tracy-Widom table (built and written on first use).
    #[arg(long, global = true, env = "EBR_TW_CACHE")]
    tw_cache: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test one residual matrix. Exit 0 = not rejected, 3 = rejected.
    Test(TestArgs),
    /// Run the Monte Carlo size/power study.
    Power(PowerArgs),
    /// Evaluate the Tracy-Widom (β = 1) distribution.
    Tw(TwArgs),
    /// Write a simulated residual matrix (fixture) to a file.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrientationArg {
    UnitsRows,
    PeriodsRows,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Debug)]
struct TestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Padding seed; generated and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of padding draws (odd); the median p-value decides.
    #[arg(long, default_value_t = 1)]
    paddings: usize,
    #[arg(long, value_enum, default_value = "units-rows")]
    orientation: OrientationArg,
    #[arg(long, default_value = ",")]
    delimiter: String,
    /// First line is a header.
    #[arg(long)]
    header: bool,
    /// First column holds unit labels.
    #[arg(long)]
    row_labels: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum CaseArg {
    Ar1,
    LinearCsd,
    Nonmono,
    Iid,
    All,
}

#[derive(Args, Debug)]
struct PowerArgs {
    #[arg(long, value_enum, default_value = "all")]
    case: CaseArg,
    #[arg(long, default_value_t = 1000)]
    reps: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',')]
    phi: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    paddings: usize,
    /// Add the iid (size) row at every (n, m).
    #[arg(long)]
    include_size: bool,
    /// Also write unit-correlation summaries for the non-monotonic cells.
    #[arg(long)]
    correlations: bool,
    /// Worker threads (default: all cores).
    #[arg(long, env = "EBR_WORKERS")]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct TwArgs {
    #[arg(long, allow_negative_numbers = true)]
    cdf: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sf: Option<f64>,
    #[arg(long)]
    quantile: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DgpArg {
    Iid,
    Ar1,
    LinearCsd,
    Nonmono,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    dgp: DgpArg,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    replication: u64,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<EbrError> for Failure {
    fn from(e: EbrError) -> Self {
        match e {
            EbrError::Config(msg) => Failure::Usage(msg),
            other => Failure::Data(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_ACCEPT });
        }
    };
    let outcome = match &cli.command {
        Command::Test(args) => cmd_test(&cli, args),
        Command::Power(args) => cmd_power(&cli, args),
        Command::Tw(args) => cmd_tw(&cli, args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DATA)
        }
    }
}

fn load_table(cli: &Cli) -> Result<TwTable, Failure> {
    match &cli.tw_cache {
        Some(path) => Ok(TwTable::load_or_build(path, twdist::DEFAULT_S_MIN, twdist::DEFAULT_S_MAX, twdist::DEFAULT_STEP)?),
        None => Ok(twdist::standard_table().clone()),
    }
}

fn parse_delimiter(d: &str) -> Result<u8, Failure> {
    match d {
        "\\t" | "tab" => Ok(b'\t'),
        _ if d.len() == 1 => Ok(d.as_bytes()[0]),
        _ => Err(Failure::Usage(format!("delimiter must be a single ASCII character, got {d:?}"))),
    }
}

fn cmd_test(cli: &Cli, args: &TestArgs) -> Result<u8, Failure> {
    let spec = IngestSpec {
        path: args.input.clone(),
        delimiter: parse_delimiter(&args.delimiter)?,
        has_header: args.header,
        has_row_labels: args.row_labels,
        orientation: match args.orientation {
            OrientationArg::UnitsRows => Orientation::UnitsRows,
            OrientationArg::PeriodsRows => Orientation::PeriodsRows,
        },
    };
    let seed = match args.seed {
        Some(s) => s,
        None => {
            let s = rand::random::<u64>();
            eprintln!("note: no --seed given, using --seed {s}");
            s
        }
    };
    let cfg = EbrConfig { alpha: args.alpha, padding_reps: args.paddings, seed };
    cfg.validate()?;
    let e = ingest(&spec)?;
    eprintln!(
        "ingested {}: {} units × {} periods (orientation {:?})",
        args.input.display(),
        e.n_units(),
        e.m_periods(),
        spec.orientation
    );
    let table = load_table(cli)?;
    let result = ebr_test(&e, &cfg, &table)?;
    print_result(&result, args.format)?;
    Ok(if result.reject { EXIT_REJECT } else { EXIT_ACCEPT })
}

fn print_result(r: &EbrResult, format: Format) -> Result<(), Failure> {
    match format {
        Format::Json => {
            let mut v = serde_json::to_value(r).map_err(|e| Failure::Data(e.to_string()))?;
            v["version"] = ebr_core::VERSION.into();
            v["design_fingerprint"] = ebr_core::design_fingerprint().into();
            println!("{}", serde_json::to_string_pretty(&v).map_err(|e| Failure::Data(e.to_string()))?);
        }
        Format::Text => {
            println!("EBR test (Tracy-Widom beta = 1, upper tail)");
            println!("  panel        {} units x {} periods, k = {}", r.n_units, r.m_periods, r.k);
            println!("  lambda1      {}", r.lambda1);
            println!("  s_stat       {}", r.s_stat);
            println!("  p_value      {}", r.p_value);
            println!("  alpha        {}", r.alpha);
            println!("  decision     {}", if r.reject { "reject H0 (residuals not random)" } else { "do not reject H0" });
            println!("  seed         {}  paddings {}", r.seed, r.padding_reps);
            println!("  version      {}  fingerprint {}", ebr_core::VERSION, ebr_core::design_fingerprint());
        }
    }
    Ok(())
}

fn cmd_power(cli: &Cli, args: &PowerArgs) -> Result<u8, Failure> {
    let cases: Vec<CaseArg> = match args.case {
        CaseArg::All => vec![CaseArg::Ar1, CaseArg::LinearCsd, CaseArg::Nonmono],
        c => vec![c],
    };
    if args.phi.is_some() && !cases.contains(&CaseArg::Ar1) {
        return Err(Failure::Usage("--phi only applies to --case ar1 or all".into()));
    }
    if args.rho.is_some() && !cases.contains(&CaseArg::LinearCsd) {
        return Err(Failure::Usage("--rho only applies to --case linear-csd or all".into()));
    }
    let mut specs = Vec::new();
    if args.include_size || cases.contains(&CaseArg::Iid) {
        specs.push(DgpSpec::Iid);
    }
    for case in &cases {
        match case {
            CaseArg::Ar1 => {
                for &phi in args.phi.as_deref().unwrap_or(&DEFAULT_PHI_VALUES) {
                    specs.push(DgpSpec::Ar1 { phi });
                }
            }
            CaseArg::LinearCsd => {
                for &rho in args.rho.as_deref().unwrap_or(&DEFAULT_RHO_VALUES) {
                    specs.push(DgpSpec::LinearCsd { rho });
                }
            }
            CaseArg::Nonmono => specs.push(DgpSpec::Nonmono),
            CaseArg::Iid | CaseArg::All => {}
        }
    }
    let grid = ExperimentGrid {
        dgp_specs: specs,
        n_values: args.n.clone().unwrap_or_else(|| DEFAULT_N_VALUES.to_vec()),
        m_values: args.m.clone().unwrap_or_else(|| DEFAULT_M_VALUES.to_vec()),
        replications: args.reps,
        alpha: args.alpha,
        master_seed: args.seed,
        padding_reps: args.paddings,
    };
    grid.validate()?;
    let table = load_table(cli)?;
    let workers = args.workers.unwrap_or_else(rayon::current_num_threads);
    let report = run_grid_with_workers(&grid, &table, workers)?;

    fs::create_dir_all(&args.out).map_err(|e| Failure::Data(format!("{}: {e}", args.out.display())))?;
    report.write_csv(&args.out.join("power_report.csv"))?;
    report.write_json(&args.out.join("power_report.json"))?;
    for (case, fig) in [(CaseArg::Ar1, FigureCase::Ar1), (CaseArg::LinearCsd, FigureCase::LinearCsd), (CaseArg::Nonmono, FigureCase::Nonmono)] {
        if !cases.contains(&case) {
            continue;
        }
        write_figure_csv(&args.out.join(format!("figure_{}.csv", fig.kind())), &report, fig)?;
        let rows = emit_figure_data(&report, fig)?;
        write_text(&args.out.join(format!("figure_{}.svg", fig.kind())), &render_svg(&rows, fig))?;
    }
    if args.correlations && cases.contains(&CaseArg::Nonmono) {
        let mut summaries = Vec::new();
        for &n in &grid.n_values {
            for &m in &grid.m_values {
                let s = correlation_summary(&DgpSpec::Nonmono, n, m, args.reps, args.seed)?;
                summaries.push(serde_json::json!({ "dgp": "nonmono", "n": n, "m": m, "summary": s }));
            }
        }
        let doc = serde_json::json!({ "metadata": report.metadata, "correlations": summaries });
        write_text(
            &args.out.join("correlation_summary.json"),
            &serde_json::to_string_pretty(&doc).map_err(|e| Failure::Data(e.to_string()))?,
        )?;
    }
    print!("{}", report.summary());
    Ok(EXIT_ACCEPT)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn cmd_tw(cli: &Cli, args: &TwArgs) -> Result<u8, Failure> {
    if let Some(p) = args.quantile {
        if !(p > 0.0 && p < 1.0) {
            return Err(Failure::Usage(format!("--quantile must lie in (0, 1), got {p}")));
        }
    }
    let table = load_table(cli)?;
    let value = match (args.cdf, args.sf, args.quantile) {
        (Some(s), None, None) => table.cdf(s),
        (None, Some(s), None) => table.sf(s),
        (None, None, Some(p)) => table.quantile(p)?,
        _ => return Err(Failure::Usage("exactly one of --cdf, --sf, --quantile is required".into())),
    };
    println!("{value:?}");
    Ok(EXIT_ACCEPT)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<u8, Failure> {
    let spec = match args.dgp {
        DgpArg::Iid => DgpSpec::Iid,
        DgpArg::Ar1 => DgpSpec::Ar1 { phi: args.phi.ok_or_else(|| Failure::Usage("--dgp ar1 needs --phi".into()))? },
        DgpArg::LinearCsd => {
            DgpSpec::LinearCsd { rho: args.rho.ok_or_else(|| Failure::Usage("--dgp linear-csd needs --rho".into()))? }
        }
        DgpArg::Nonmono => DgpSpec::Nonmono,
    };
    if (args.phi.is_some() && !matches!(spec, DgpSpec::Ar1 { .. }))
        || (args.rho.is_some() && !matches!(spec, DgpSpec::LinearCsd { .. }))
    {
        return Err(Failure::Usage("--phi/--rho do not apply to this --dgp".into()));
    }
    let domain = format!("{spec}/n={}/m={}/fixture", args.n, args.m);
    let e = spec.generate(args.n, args.m, &mut rng::stream(args.seed, &domain, args.replication))?;
    write_matrix_file(&args.out, &e, b',')?;
    eprintln!("wrote {} ({} units × {} periods, {spec})", args.out.display(), args.n, args.m);
    Ok(EXIT_ACCEPT)
}
