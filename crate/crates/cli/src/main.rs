use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use leafcalc::job::{self, Command, Format, JobSpec, MonomialSpec};
use leafcalc::Error;

/// Directory that relative output paths (or the default file name) are
/// resolved against.
const OUTPUT_DIR_ENV: &str = "LEAFCALC_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "leafcalc", version, about = "Newton points, Kottwitz classes, central-leaf dimensions, admissible sets, lattice censuses and Witt/display checks")]
struct Cli {
    /// Read the whole job from a JSON spec file instead of flags.
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Leaf dimension, J_b dimension and basicness for elements of W̃.
    Report(Common),
    /// σ-conjugacy classes among elements of bounded length.
    Classes(Common),
    /// Admissible set Adm(μ).
    Adm(Common),
    /// Lattice census of an affine Deligne–Lusztig set.
    Adlv(Common),
    /// Witt-vector and display invariant suite.
    WittSelfcheck(Common),
    /// ⟨2ρ, ν⟩ against the positive-root sum.
    Crosscheck(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Group shorthand such as GL2, Sp4, GSp4.
    #[arg(long)]
    group: Option<String>,
    /// Element of W̃, e.g. "{lambda:[1,0],w:s}". Repeatable.
    #[arg(long = "element")]
    elements: Vec<String>,
    /// Cocharacter as a comma-separated list.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    mu: Option<Vec<i64>>,
    /// iwahori or hyperspecial.
    #[arg(long)]
    level: Option<String>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    depth: Option<u32>,
    /// Witt length.
    #[arg(long)]
    length: Option<usize>,
    /// Coefficient ring Z/p^precision.
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    length_cap: Option<usize>,
    #[arg(long)]
    conjugator_cap: Option<usize>,
    #[arg(long)]
    max_elements: Option<usize>,
    /// Frobenius action on X_* as a JSON matrix.
    #[arg(long)]
    sigma: Option<String>,
    /// Monomial b: permutation images, comma-separated, 0-based.
    #[arg(long, value_delimiter = ',')]
    perm: Option<Vec<usize>>,
    /// Monomial b: p-exponents, comma-separated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    exponents: Option<Vec<i64>>,
    /// Monomial b: Frobenius period.
    #[arg(long)]
    period: Option<u32>,
    /// parallel or sequential.
    #[arg(long)]
    exec: Option<String>,
    #[arg(long)]
    output: Option<String>,
    /// csv or structured-text.
    #[arg(long)]
    format: Option<String>,
}

fn spec_from_flags(command: Command, c: Common) -> Result<JobSpec, Error> {
    let mut s = JobSpec::new(command);
    s.group = c.group.map(job::GroupSpec::Short);
    s.elements = c.elements;
    s.mu = c.mu;
    s.level = c.level;
    s.p = c.p;
    s.depth = c.depth;
    s.length = c.length;
    s.precision = c.precision;
    s.samples = c.samples;
    s.seed = c.seed;
    s.length_cap = c.length_cap;
    s.conjugator_cap = c.conjugator_cap;
    s.max_elements = c.max_elements;
    s.exec = c.exec;
    if let Some(m) = c.sigma {
        s.sigma = Some(serde_json::from_str(&m).map_err(|e| Error::Config(format!("--sigma: {e}")))?);
    }
    match (c.perm, c.exponents) {
        (Some(perm), Some(exponents)) => {
            s.monomial = Some(MonomialSpec { perm, exponents, period: c.period.unwrap_or(1) })
        }
        (None, None) => {}
        _ => return Err(Error::Config("--perm and --exponents go together".into())),
    }
    s.output.path = c.output;
    if let Some(f) = c.format {
        s.output.format = Format::parse(&f)?;
    }
    Ok(s)
}

fn load_spec(cli: Cli) -> Result<JobSpec, Error> {
    match (cli.spec, cli.command) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            JobSpec::from_json(&text)
        }
        (None, Some(cmd)) => {
            let (command, common) = match cmd {
                Cmd::Report(c) => (Command::Report, c),
                Cmd::Classes(c) => (Command::Classes, c),
                Cmd::Adm(c) => (Command::Adm, c),
                Cmd::Adlv(c) => (Command::Adlv, c),
                Cmd::WittSelfcheck(c) => (Command::WittSelfcheck, c),
                Cmd::Crosscheck(c) => (Command::Crosscheck, c),
            };
            spec_from_flags(command, common)
        }
        (Some(_), Some(_)) => Err(Error::Config("give either --spec or a command, not both".into())),
        (None, None) => Err(Error::Config("no command given (try --help)".into())),
    }
}

fn output_path(spec: &JobSpec) -> Option<PathBuf> {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    match (&spec.output.path, dir) {
        (Some(p), Some(d)) if PathBuf::from(p).is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(PathBuf::from(p)),
        (None, Some(d)) => {
            let ext = match spec.output.format {
                Format::Csv => "csv",
                Format::StructuredText => "json",
            };
            Some(d.join(format!("{}.{ext}", spec.command.name())))
        }
        (None, None) => None,
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let spec = load_spec(cli)?;
    let out = job::run(&spec)?;
    let text = out.render()?;
    match output_path(&spec) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, text)?;
        }
        None => print!("{text}"),
    }
    match out.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("leafcalc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
