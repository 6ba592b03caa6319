//! `mpqed`: command-line front end for the multipolar expansion engine.
//!
//! Exit status: 0 on success (or a clean `verify`), 1 when `verify` finds a
//! discrepancy or `jacobi` an invariant failure, 2 on any error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use multipolar::canonical::{self, read_all, Reader, Sexp, Value};
use multipolar::config::{OutputFormat, RunConfig};
use multipolar::latex;
use multipolar::output;
use multipolar::pipeline::{expand, scaled};
use multipolar::pzw::Scheme;
use multipolar::verify::{parse_reference, run_verify, ItemKind};

#[derive(Parser)]
#[command(
    name = "mpqed",
    version,
    about = "Graded multipolar expansions of few-body QED Hamiltonians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Mp,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Latex,
    Canonical,
    Both,
}

#[derive(Args)]
struct RunArgs {
    /// System configuration (TOML, keys in docs/config.md).
    #[arg(long, value_name = "FILE")]
    system: PathBuf,
    /// Highest μ-grade to emit; overrides `order` in the config.
    #[arg(long, value_name = "K")]
    order: Option<u32>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Adds the electrostatic self-energy family.
    #[arg(long)]
    include_self_energy: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Zero-order Hamiltonian and interaction blocks W^1..W^k.
    Expand(RunArgs),
    /// Jacobi table, effective masses and invariant checks.
    Jacobi(RunArgs),
    /// Scaling constants and the grade at which each coupling enters.
    Scale(RunArgs),
    /// Compares generated blocks with a reference document.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Reference document; defaults to `reference` in the config.
        #[arg(long, value_name = "FILE")]
        reference: Option<PathBuf>,
    },
    /// Normalizes and renders expressions from a canonical-form file.
    Print {
        /// Supplies the mass symbols the file may use.
        #[arg(long, value_name = "FILE")]
        system: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        file: PathBuf,
    },
}

fn load(args: &RunArgs) -> Result<(RunConfig, OutputFormat)> {
    let mut cfg = RunConfig::load(&args.system)?;
    if let Some(k) = args.order {
        if k == 0 {
            bail!("--order must be at least 1");
        }
        cfg.spec.order = k;
    }
    if let Some(s) = args.scheme {
        cfg.spec.scheme = match s {
            SchemeArg::Mp => Scheme::Multipolar,
            SchemeArg::Mc => Scheme::Minimal,
        };
    }
    if args.include_self_energy {
        cfg.spec.include_self_energy = true;
    }
    let format = args.format.map(to_format).unwrap_or(cfg.output);
    Ok((cfg, format))
}

fn to_format(f: FormatArg) -> OutputFormat {
    match f {
        FormatArg::Latex => OutputFormat::Latex,
        FormatArg::Canonical => OutputFormat::Canonical,
        FormatArg::Both => OutputFormat::Both,
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Expand(args) => {
            let (cfg, format) = load(&args)?;
            let exp = expand(&cfg.spec)?;
            print!("{}", output::expansion(&cfg, &exp, format));
            Ok(0)
        }
        Command::Jacobi(args) => {
            let (cfg, format) = load(&args)?;
            let (solution, scheme, _) = scaled(&cfg.spec)?;
            let scheme = scheme.ok_or_else(|| anyhow!("the config has no `partition`"))?;
            let (text, ok) = output::jacobi(&cfg, &scheme, &solution, format)?;
            print!("{text}");
            Ok(if ok { 0 } else { 1 })
        }
        Command::Scale(args) => {
            let (cfg, format) = load(&args)?;
            let (solution, _, h) = scaled(&cfg.spec)?;
            print!("{}", output::scaling(&cfg, &solution, &h, format));
            Ok(0)
        }
        Command::Verify { run, reference } => {
            let (cfg, _) = load(&run)?;
            let path = reference.or_else(|| cfg.reference.clone()).ok_or_else(|| {
                anyhow!("no reference: pass --reference or set `reference` in the config")
            })?;
            let text = read(&path)?;
            let doc = parse_reference(&text, &cfg.spec.system.symbol_table())
                .map_err(|e| anyhow!("{}:{e}", path.display()))?;
            let report = run_verify(&cfg, &doc)?;
            println!("{report}");
            Ok(report.exit_code() as u8)
        }
        Command::Print {
            system,
            format,
            file,
        } => {
            let cfg = RunConfig::load(&system)?;
            let format = format.map(to_format).unwrap_or(cfg.output);
            let text = read(&file)?;
            print!(
                "{}",
                print_file(&cfg, &text, format).map_err(|e| anyhow!("{}:{e}", file.display()))?
            );
            Ok(0)
        }
    }
}

fn print_file(cfg: &RunConfig, text: &str, format: OutputFormat) -> Result<String> {
    let table = cfg.spec.system.symbol_table();
    let o = output::latex_options(cfg);
    let forms = read_all(text)?;
    let is_doc = matches!(forms.first(), Some(Sexp::List(v, _)) if v.first().and_then(Sexp::as_atom) == Some("reference"));
    let mut items: Vec<(String, Value)> = Vec::new();
    if is_doc {
        let doc = parse_reference(text, &table)?;
        for item in doc.items {
            let value = match item.expr {
                multipolar::verify::Expr::Op(e) => Value::Op(e),
                multipolar::verify::Expr::Vec(v) => Value::Vector(v),
            };
            let label = match item.kind {
                ItemKind::Grade(g) => format!("W^{{{g}}}"),
                ItemKind::H0 => "H_0".into(),
                ItemKind::Kinetic => "T".into(),
                ItemKind::PositionRow(a) => format!("r_{{{a}}}"),
                ItemKind::MomentumRow(a) => format!("p_{{{a}}}"),
            };
            items.push((label, value));
        }
    } else {
        let reader = Reader { symbols: &table };
        for f in &forms {
            items.push((String::new(), reader.eval(f)?));
        }
    }
    let mut out = String::new();
    for (label, v) in items {
        let (can, tex) = match &v {
            Value::Scalar(s) => (canonical::scalar(s), latex::scalar(s, &o)),
            Value::Vector(x) => (canonical::vector(x), latex::vector(x, &o)),
            Value::Op(e) => (canonical::op_multiline(e), latex::op_multiline(e, &o)),
        };
        let tex = if label.is_empty() {
            tex
        } else {
            format!("{label} = {tex}")
        };
        match format {
            OutputFormat::Canonical => out.push_str(&format!("{can}\n")),
            OutputFormat::Latex => out.push_str(&format!("{tex}\n")),
            OutputFormat::Both => {
                out.push_str(&format!("{can}\n; {}\n", tex.replace('\n', "\n; ")))
            }
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
