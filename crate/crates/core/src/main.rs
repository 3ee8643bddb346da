use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use torus_pdo::dump;
use torus_pdo::harness::{self, Check, ExperimentReport, ExperimentSpec, Verdict};
use torus_pdo::maximal::{self, CubeFamily, Weight};
use torus_pdo::probe::probe_function;
use torus_pdo::quantize::apply_operator;
use torus_pdo::spaces;
use torus_pdo::symbol::{self, AmplitudeProfile, OscillatingFamily, Symbol};
use torus_pdo::torus::{forward_dft, inverse_dft, SpectralCoefficients, TorusGrid};
use torus_pdo::{Error, Result};

#[derive(Parser)]
#[command(name = "torus-pdo", version, about = "Pseudo-differential operators on the torus")]
struct Cli {
    /// JSON experiment spec for `verify`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for generated test functions, symbols and experiments.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path: a binary dump for data commands, the report file for `verify`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Forward DFT of a function dump (or inverse DFT of a spectrum dump).
    Transform {
        #[command(flatten)]
        source: FunctionSource,
        /// Treat the input as a spectrum and synthesize the function.
        #[arg(long)]
        inverse: bool,
    },
    /// Apply the quantization of a symbol to a function.
    Apply {
        #[command(flatten)]
        source: FunctionSource,
        #[command(flatten)]
        symbol: SymbolSource,
    },
    /// Estimate the class (m, ρ, δ) of a symbol from its seminorms.
    ClassifySymbol {
        #[command(flatten)]
        symbol: SymbolSource,
        #[command(flatten)]
        grid: GridArgs,
        /// Include the full seminorm table in the output.
        #[arg(long)]
        table: bool,
    },
    /// Hardy-Littlewood (or sharp) maximal function over dyadic cubes.
    Maximal {
        #[command(flatten)]
        source: FunctionSource,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long)]
        sharp: bool,
    },
    /// Muckenhoupt constant of a weight.
    Weights {
        /// Real positive weight dump; `--weight` is used when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = WeightArg::Sin2)]
        weight: WeightArg,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Lebesgue, Sobolev and Besov norms of a function.
    Norms {
        #[command(flatten)]
        source: FunctionSource,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        /// Besov summation index.
        #[arg(long, default_value_t = 2.0)]
        q: f64,
    },
    /// Run a numerical check (or `all` of them) and emit reports.
    Verify {
        /// kernel-decay, dyadic-growth, local-estimates, sharp-maximal, lp-lq,
        /// weighted, sobolev-besov or all.
        check: Option<String>,
    },
}

#[derive(Args)]
struct GridArgs {
    /// Dimension of the torus.
    #[arg(long = "dim", default_value_t = 1)]
    dim: usize,
    /// Points per axis (power of two).
    #[arg(long = "size", default_value_t = 64)]
    size: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.dim, self.size)
    }
}

/// A function dump, or a seeded random trigonometric polynomial.
#[derive(Args)]
struct FunctionSource {
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
    /// Frequency band of the generated function (default N/4).
    #[arg(long)]
    band: Option<f64>,
    /// Trial index of the generated function.
    #[arg(long, default_value_t = 0)]
    trial: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Oscillating,
    Bracket,
    Zero,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightArg {
    Unit,
    Sin2,
}

#[derive(Args)]
struct SymbolSource {
    /// Symbol dump; `--family` is used when absent.
    #[arg(long)]
    symbol: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FamilyArg::Oscillating)]
    family: FamilyArg,
    #[arg(long, default_value_t = -0.25, allow_hyphen_values = true)]
    m: f64,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
}

impl SymbolSource {
    fn load(&self, grid: TorusGrid, seed: u64) -> Result<Symbol> {
        if let Some(path) = &self.symbol {
            let s = dump::read_symbol(path)?;
            if s.grid() != grid {
                return Err(Error::SizeMismatch("symbol and function grids differ".into()));
            }
            return Ok(s);
        }
        let m = self.m;
        match self.family {
            FamilyArg::Oscillating => {
                OscillatingFamily::seeded(m, self.rho, self.delta, AmplitudeProfile::Bracket, seed)?.symbol(grid)
            }
            FamilyArg::Bracket => Ok(symbol::bessel_symbol(grid, m)?),
            FamilyArg::Zero => Ok(Symbol::zero(grid)),
        }
    }
}

impl FunctionSource {
    fn load(&self, seed: u64) -> Result<torus_pdo::torus::PeriodicFunction> {
        match &self.input {
            Some(path) => dump::read_function(path),
            None => {
                let grid = self.grid.grid()?;
                let band = self.band.unwrap_or(grid.size() as f64 / 4.0);
                probe_function(grid, band, seed, self.trial)
            }
        }
    }
}

fn print_json(value: serde_json::Value) {
    println!("{value}");
}

fn run(cli: Cli) -> Result<ExitCode> {
    let seed = cli.seed.unwrap_or(1);
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Transform { source, inverse } => {
            if *inverse {
                let path = source
                    .input
                    .as_deref()
                    .ok_or_else(|| Error::Hypothesis("--inverse needs --input".into()))?;
                let (header, values) = dump::read_dump(path)?;
                let f = inverse_dft(&SpectralCoefficients::new(header.grid()?.window(), values)?)?;
                if let Some(p) = out {
                    dump::write_function(p, &f)?;
                }
                print_json(json!({"kind": "function", "n": f.grid().dim(), "N": f.grid().size(), "max_abs": f.max_abs()}));
            } else {
                let f = source.load(seed)?;
                let c = forward_dft(&f)?;
                if let Some(p) = out {
                    dump::write_spectrum(p, &c)?;
                }
                print_json(json!({"kind": "spectrum", "n": f.grid().dim(), "N": f.grid().size(), "energy": c.energy()}));
            }
        }
        Command::Apply { source, symbol } => {
            let f = source.load(seed)?;
            let sigma = symbol.load(f.grid(), seed)?;
            let tf = apply_operator(&sigma, &f)?;
            if let Some(p) = out {
                dump::write_function(p, &tf)?;
            }
            print_json(json!({
                "n": f.grid().dim(),
                "N": f.grid().size(),
                "input_l2": spaces::lp_norm(&f, 2.0)?,
                "output_l2": spaces::lp_norm(&tf, 2.0)?,
                "output_max": tf.max_abs(),
            }));
        }
        Command::ClassifySymbol { symbol, grid, table } => {
            let sigma = symbol.load(grid.grid()?, seed)?;
            let t = symbol::seminorms(&sigma, 1, 1)?;
            let fit = symbol::fit_symbol_class(&t)?;
            if let Some(p) = out {
                dump::write_symbol(p, &sigma)?;
            }
            let mut v = json!({"fit": fit, "claimed": sigma.claimed_class()});
            if *table {
                v["table"] = serde_json::to_value(&t)?;
            }
            print_json(v);
        }
        Command::Maximal { source, r, sharp } => {
            let f = source.load(seed)?;
            let fam = CubeFamily::dyadic(f.grid());
            let profile = if *sharp {
                maximal::sharp_maximal(&f, *r, &fam)?
            } else {
                maximal::hardy_littlewood(&f, *r, &fam)?
            };
            if let Some(p) = out {
                dump::write_maximal(p, &profile)?;
            }
            print_json(json!({"kind": profile.kind, "r": r, "max": profile.max(), "input_max": f.max_abs()}));
        }
        Command::Weights { input, weight, grid, p } => {
            let w = match input {
                Some(path) => Weight::from_function(&dump::read_function(path)?)?,
                None => {
                    let g = grid.grid()?;
                    match weight {
                        WeightArg::Unit => Weight::unit(g),
                        WeightArg::Sin2 => Weight::sin2(g),
                    }
                }
            };
            let a = maximal::muckenhoupt_constant(&w, *p, &CubeFamily::dyadic(w.grid()))?;
            print_json(json!({"p": p, "a_constant": a}));
        }
        Command::Norms { source, p, s, q } => {
            let f = source.load(seed)?;
            print_json(json!({
                "lp": spaces::lp_norm(&f, *p)?,
                "sobolev": spaces::sobolev_norm(&f, *s, *p)?,
                "besov": spaces::besov_norm(&f, *s, *p, *q)?,
                "p": p,
                "s": s,
                "q": q,
            }));
        }
        Command::Verify { check } => return verify(&cli, check.as_deref(), out),
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(cli: &Cli, check: Option<&str>, out: Option<&Path>) -> Result<ExitCode> {
    let base = match &cli.config {
        Some(path) => Some(ExperimentSpec::from_json(&std::fs::read_to_string(path)?)?),
        None => None,
    };
    let checks: Vec<Check> = match (check, &base) {
        (Some("all"), _) => Check::ALL.to_vec(),
        (Some(name), _) => vec![name.parse()?],
        (None, Some(spec)) => vec![spec.check],
        (None, None) => return Err(Error::Hypothesis("name a check or pass --config".into())),
    };
    let mut reports: Vec<ExperimentReport> = Vec::new();
    for c in checks {
        let mut spec = match &base {
            Some(b) if b.check == c => b.clone(),
            _ => ExperimentSpec::new(c),
        };
        if let Some(seed) = cli.seed {
            spec.seed = Some(seed);
        }
        let report = harness::run(&spec)?;
        eprintln!("{}: {} ({} ms)", report.check, report.verdict, report.runtime_ms);
        reports.push(report);
    }
    let mut sink: Box<dyn Write> = match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    match cli.format {
        Format::Jsonl => harness::write_jsonl(&reports, &mut sink)?,
        Format::Csv => harness::write_csv(&reports, &mut sink)?,
    }
    sink.flush()?;
    let all_pass = reports.iter().all(|r| r.verdict == Verdict::Pass);
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
