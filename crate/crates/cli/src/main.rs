//! Command-line driver: parse/analyze/mutate/simulate/mine/experiment/
//! report over the synthesizable Verilog subset.
//!
//! Exit codes: 0 success, 1 usage error, 2 parse/elaborate error,
//! 3 simulation error. Assertion failures during `experiment` are data,
//! not process errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rtlsec::assertgen::{generate_all, instrument, parse_config, sidecar_report, SecurityConfig};
use rtlsec::frontend::{self, elaborate::ElaboratedDesign};
use rtlsec::harness::{self, report_markdown, report_tsv, unified_diff};
use rtlsec::mine::{bind_rules, dump_rules, mine};
use rtlsec::mutate::{campaign, MutationOperator};
use rtlsec::sim::{load_vectors, random_stimulus, run, AttemptStatus, BoundAssertion, StimulusSpec};

#[derive(Parser)]
#[command(name = "rtlsec", version, about = "RTL security assertion toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DesignArgs {
    /// Verilog source files in the supported subset.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Top module; defaults to the unique uninstantiated module.
    #[arg(long)]
    top: Option<String>,
    /// Security configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and elaborate sources, reporting the design shape.
    Parse {
        #[command(flatten)]
        design: DesignArgs,
        /// Print the canonical re-rendered source.
        #[arg(long)]
        render: bool,
    },
    /// Generate security assertions and write instrumented sources.
    Analyze {
        #[command(flatten)]
        design: DesignArgs,
        /// Output directory for the sidecar and instrumented sources.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded mutation campaign and write instance bundles.
    Mutate {
        #[command(flatten)]
        design: DesignArgs,
        /// Mutation operators (comma-separated), e.g. invert,swap.
        #[arg(long, default_value = "invert")]
        operators: String,
        /// Number of instances.
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a vector set, checking embedded and generated assertions.
    Simulate {
        #[command(flatten)]
        design: DesignArgs,
        /// Vector file (`signals:` header plus rows).
        #[arg(long)]
        vectors: PathBuf,
        /// Dump the sampled trace as TSV to stdout.
        #[arg(long)]
        dump_trace: bool,
    },
    /// Mine implications from a seeded random trace of the design.
    Mine {
        #[command(flatten)]
        design: DesignArgs,
        /// Consequent signals (comma-separated outputs).
        #[arg(long)]
        outputs: String,
        #[arg(long, default_value_t = 10_000)]
        cycles: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        max_antecedent: usize,
        #[arg(long, default_value_t = 10)]
        min_support: usize,
    },
    /// Run the full detection experiment on a benchmark fixture.
    Experiment {
        /// Fixture name: arbiter, mem, gng, aes, usb_lite.
        fixture: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory for reports and instance bundles.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Consolidate detection reports into summary tables.
    Report {
        /// Report TSV files produced by `experiment`.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Compile(String),
    Simulation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Compile(_) => 2,
            CliError::Simulation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Compile(m) | CliError::Simulation(m) => m,
        }
    }
}

impl From<frontend::FrontendError> for CliError {
    fn from(e: frontend::FrontendError) -> Self {
        CliError::Compile(e.to_string())
    }
}

impl From<rtlsec::sim::SimError> for CliError {
    fn from(e: rtlsec::sim::SimError) -> Self {
        CliError::Simulation(e.to_string())
    }
}

impl From<rtlsec::assertgen::AssertgenError> for CliError {
    fn from(e: rtlsec::assertgen::AssertgenError) -> Self {
        CliError::Compile(e.to_string())
    }
}

impl From<rtlsec::assertgen::ConfigError> for CliError {
    fn from(e: rtlsec::assertgen::ConfigError) -> Self {
        CliError::Compile(e.to_string())
    }
}

impl From<rtlsec::mutate::MutationError> for CliError {
    fn from(e: rtlsec::mutate::MutationError) -> Self {
        match e {
            rtlsec::mutate::MutationError::Sim(s) => CliError::Simulation(s.to_string()),
            other => CliError::Compile(other.to_string()),
        }
    }
}

impl From<rtlsec::mine::MineError> for CliError {
    fn from(e: rtlsec::mine::MineError) -> Self {
        CliError::Simulation(e.to_string())
    }
}

impl From<harness::HarnessError> for CliError {
    fn from(e: harness::HarnessError) -> Self {
        match e {
            harness::HarnessError::UnknownFixture(f) => {
                CliError::Usage(format!("unknown fixture `{f}`"))
            }
            harness::HarnessError::Sim(s) => CliError::Simulation(s.to_string()),
            other => CliError::Compile(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

struct LoadedDesign {
    design: ElaboratedDesign,
    source: String,
    origin: String,
    top: String,
    config: SecurityConfig,
}

fn load_design(args: &DesignArgs) -> Result<LoadedDesign, CliError> {
    let mut source = String::new();
    for file in &args.files {
        source.push_str(&fs::read_to_string(file)?);
        if !source.ends_with('\n') {
            source.push('\n');
        }
    }
    let origin = args
        .files
        .first()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "<stdin>".to_string());
    let modules = frontend::parse_source(&source, &origin)?;
    let top = match &args.top {
        Some(t) => t.clone(),
        None => infer_top(&modules).ok_or_else(|| {
            CliError::Usage("cannot infer the top module; pass --top".to_string())
        })?,
    };
    let mut design = frontend::elaborate::elaborate(modules, &top)?;
    design.attach_source(&origin, &source);
    let config = match &args.config {
        Some(path) => {
            let cfg = parse_config(&fs::read_to_string(path)?)?;
            cfg.validate(&design)?;
            cfg
        }
        None => SecurityConfig::default(),
    };
    Ok(LoadedDesign {
        design,
        source,
        origin,
        top,
        config,
    })
}

fn infer_top(modules: &[frontend::ast::AstModule]) -> Option<String> {
    let mut instantiated = std::collections::BTreeSet::new();
    for m in modules {
        for item in &m.items {
            if let frontend::ast::ModuleItem::Instantiation(inst) = item {
                instantiated.insert(inst.module.clone());
            }
        }
    }
    let roots: Vec<&frontend::ast::AstModule> = modules
        .iter()
        .filter(|m| !instantiated.contains(&m.name))
        .collect();
    match roots.as_slice() {
        [one] => Some(one.name.clone()),
        _ => None,
    }
}

fn parse_operators(text: &str) -> Result<Vec<MutationOperator>, CliError> {
    text.split(',')
        .map(|s| match s.trim() {
            "invert" => Ok(MutationOperator::InvertSignal),
            "swap" => Ok(MutationOperator::SwapOperator),
            "remove-guard" => Ok(MutationOperator::RemoveGuard),
            "leak" => Ok(MutationOperator::LeakWire),
            "bypass" => Ok(MutationOperator::BypassCheck),
            "trojan" => Ok(MutationOperator::InsertTrojan),
            "misassign" => Ok(MutationOperator::MisassignConstant),
            other => Err(CliError::Usage(format!("unknown operator `{other}`"))),
        })
        .collect()
}

fn cmd_parse(design: &DesignArgs, render: bool) -> Result<(), CliError> {
    let loaded = load_design(design)?;
    for (name, info) in &loaded.design.modules {
        println!(
            "module {name}: {} ports, {} nets, {} items",
            info.ast.ports.len(),
            info.ast.decls.len(),
            info.ast.items.len()
        );
    }
    println!(
        "top {} with {} instances, {} signals",
        loaded.top,
        loaded.design.instances.len(),
        loaded.design.signals.len()
    );
    if render {
        let modules = frontend::parse_source(&loaded.source, &loaded.origin)?;
        print!("{}", frontend::render_source(&modules));
    }
    Ok(())
}

fn cmd_analyze(design: &DesignArgs, out: &Option<PathBuf>) -> Result<(), CliError> {
    let loaded = load_design(design)?;
    let candidates = generate_all(&loaded.design, &loaded.config)?;
    let sidecar = sidecar_report(&candidates);
    let instrumented = instrument(&loaded.source, &loaded.origin, &candidates)?;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let stem = Path::new(&loaded.origin)
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "design".to_string());
            fs::write(dir.join(format!("{stem}.candidates.tsv")), &sidecar)?;
            fs::write(dir.join(format!("{stem}.instrumented.v")), &instrumented)?;
            println!(
                "{} candidates -> {}",
                candidates.len(),
                dir.join(format!("{stem}.instrumented.v")).display()
            );
        }
        None => {
            print!("{sidecar}");
        }
    }
    Ok(())
}

fn cmd_mutate(
    design: &DesignArgs,
    operators: &str,
    n: usize,
    seed: u64,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let loaded = load_design(design)?;
    let ops = parse_operators(operators)?;
    let prefix = loaded.top.clone();
    let instances = campaign(
        &loaded.source,
        &loaded.origin,
        &loaded.top,
        &loaded.config.clock,
        &prefix,
        &ops,
        n,
        seed,
    )?;
    let golden_render =
        frontend::render_source(&frontend::parse_source(&loaded.source, &loaded.origin)?);
    for inst in &instances {
        println!(
            "{}\t{}\t{}\t{}",
            inst.instance_id,
            inst.spec.operator.name(),
            inst.intended_class.title(),
            inst.spec.site.description
        );
        if let Some(dir) = out {
            write_instance_bundle(dir, inst, &golden_render)?;
        }
    }
    Ok(())
}

fn write_instance_bundle(
    dir: &Path,
    inst: &rtlsec::mutate::VulnInstance,
    golden_render: &str,
) -> Result<(), CliError> {
    let idir = dir.join(&inst.instance_id);
    fs::create_dir_all(&idir)?;
    fs::write(idir.join("design.v"), &inst.mutated_source)?;
    let manifest = format!(
        "operator: {}\nsite: {}:{}\nsite_detail: {}\nparameters: {}\nseed: {}\nintended_class: {}\n",
        inst.spec.operator.name(),
        inst.spec.site.span.file,
        inst.spec.site.span.line,
        inst.spec.site.description,
        inst.spec.parameters.describe(),
        inst.spec.seed,
        inst.intended_class.title(),
    );
    fs::write(idir.join("manifest.txt"), manifest)?;
    let diff = unified_diff(golden_render, &inst.mutated_source, "golden.v", "design.v");
    fs::write(idir.join("diff.patch"), diff)?;
    Ok(())
}

fn cmd_simulate(design: &DesignArgs, vectors: &Path, dump_trace: bool) -> Result<(), CliError> {
    let loaded = load_design(design)?;
    let text = fs::read_to_string(vectors)?;
    let name = vectors.display().to_string();
    let set = load_vectors(&text, &name)?;
    let bound: Vec<BoundAssertion> = if design.config.is_some() {
        generate_all(&loaded.design, &loaded.config)?
            .iter()
            .map(|c| c.to_bound())
            .collect()
    } else {
        Vec::new()
    };
    let (trace, verdicts) = run(&loaded.design, &loaded.config.clock, &set, &bound)?;
    for v in &verdicts {
        println!(
            "{}\t{}\tpass={} fail={} vacuous={} skipped={}{}",
            v.id,
            if v.fired() { "FAIL" } else { "ok" },
            v.count(AttemptStatus::Pass),
            v.count(AttemptStatus::Fail),
            v.count(AttemptStatus::Vacuous),
            v.count(AttemptStatus::NotAttempted),
            match v.first_fail_cycle {
                Some(c) => format!(" first_fail={c}"),
                None => String::new(),
            }
        );
    }
    for d in &trace.diagnostics {
        eprintln!("note: {d}");
    }
    if dump_trace {
        print!("{}", trace.dump_tsv());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_mine(
    design: &DesignArgs,
    outputs: &str,
    cycles: usize,
    seed: u64,
    max_antecedent: usize,
    min_support: usize,
) -> Result<(), CliError> {
    let loaded = load_design(design)?;
    let outs: Vec<String> = outputs.split(',').map(|s| s.trim().to_string()).collect();
    let vectors = random_stimulus(
        &loaded.design,
        &loaded.config.clock,
        cycles,
        seed,
        &StimulusSpec::reset(2),
    );
    let (trace, _) = run(&loaded.design, &loaded.config.clock, &vectors, &[])?;
    let rules = mine(&trace, &outs, max_antecedent, min_support)?;
    bind_rules(&rules, &loaded.design)?;
    print!("{}", dump_rules(&rules));
    Ok(())
}

fn cmd_experiment(fixture: &str, seed: u64, out: &Option<PathBuf>) -> Result<(), CliError> {
    let result = harness::run_experiment(fixture, seed)?;
    let tsv = report_tsv(&result.report);
    let md = report_markdown(&result.report);
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{fixture}.report.tsv")), &tsv)?;
        fs::write(dir.join(format!("{fixture}.report.md")), &md)?;
        for inst in &result.instances {
            write_instance_bundle(dir, inst, &result.golden_render)?;
        }
    }
    print!("{tsv}");
    eprintln!(
        "{}: {}/{} detected by security assertions, {}/{} by the mined baseline",
        fixture,
        result.report.summary.detected_by_security,
        result.report.summary.instances,
        result.report.summary.detected_by_baseline,
        result.report.summary.instances,
    );
    Ok(())
}

fn cmd_report(reports: &[PathBuf]) -> Result<(), CliError> {
    let mut parsed = Vec::new();
    for path in reports {
        let text = fs::read_to_string(path)?;
        let report = harness::parse_report_tsv(&text)
            .ok_or_else(|| CliError::Usage(format!("malformed report {}", path.display())))?;
        parsed.push(report);
    }
    print!("{}", harness::consolidate(&parsed));
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Parse { design, render } => cmd_parse(design, *render),
        Command::Analyze { design, out } => cmd_analyze(design, out),
        Command::Mutate {
            design,
            operators,
            n,
            seed,
            out,
        } => cmd_mutate(design, operators, *n, *seed, out),
        Command::Simulate {
            design,
            vectors,
            dump_trace,
        } => cmd_simulate(design, vectors, *dump_trace),
        Command::Mine {
            design,
            outputs,
            cycles,
            seed,
            max_antecedent,
            min_support,
        } => cmd_mine(design, outputs, *cycles, *seed, *max_antecedent, *min_support),
        Command::Experiment { fixture, seed, out } => cmd_experiment(fixture, *seed, out),
        Command::Report { reports } => cmd_report(reports),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
