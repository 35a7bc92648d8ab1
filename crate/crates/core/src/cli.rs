//! Command-line front end.
//!
//! Exit codes: `0` success (or convertible), `1` not convertible / invalid state, `2` error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::asymptotics::{aep_sweep, conversion_rate};
use crate::convertibility::{conversion_report, feasibility_oracle_with, ConversionQuery, OracleLimits};
use crate::descriptor::{parse_context, parse_state, StateDescriptor};
use crate::gibbs::{gibbs_state, log_partition_function, partition_function};
use crate::lorenz::build_curve;
use crate::numfmt::{fmt_g17, to_json_string};
use crate::state::{QuasiclassicalState, RENORMALIZE_TOL};
use crate::theory::{make_context, Intensive, Representation, TheoryContext};
use crate::work::{resource_yield, work_report};

#[derive(Debug, Parser)]
#[command(name = "thermoflow", version, about = "Thermodynamic resource theories for quasiclassical states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    context: ContextArgs,
    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct ContextArgs {
    /// Context JSON file; wins over inline flags and over a context embedded in the state file.
    #[arg(long, global = true, value_name = "PATH")]
    ctx: Option<PathBuf>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Chemical potential conjugate to the operator labelled `N`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    mu: Option<f64>,
    /// Extra intensive variable, `label=value`; repeatable.
    #[arg(long, global = true, value_name = "LABEL=VALUE", value_parser = parse_intensive)]
    intensive: Vec<Intensive>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Free state and partition function on the state's system.
    Gibbs { state: PathBuf },
    /// Rescaled Lorenz curve breakpoints.
    Lorenz { state: PathBuf },
    /// Decide whether SOURCE can be turned into TARGET by free operations.
    ///
    /// The witness search is capped at 12 levels per side; `THERMOFLOW_MAX_DIM` overrides the cap.
    Convert {
        source: PathBuf,
        target: PathBuf,
        /// Write a stochastic witness matrix (row-major) when convertible.
        #[arg(long, value_name = "PATH")]
        witness: Option<PathBuf>,
    },
    /// One-shot work yield and work-cost bounds.
    Work {
        state: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
    /// Asymptotic conversion rate from SOURCE to TARGET.
    Rate { source: PathBuf, target: PathBuf },
    /// Per-copy hypothesis-testing relative entropy over tensor powers.
    Aep {
        state: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        n: Vec<usize>,
    },
    /// Normalization and fixed-eigensubspace report.
    Validate { state: PathBuf },
}

fn parse_intensive(s: &str) -> Result<Intensive, String> {
    let (label, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected LABEL=VALUE, got `{s}`"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok(Intensive::new(label.trim(), value))
}

/// Command outcome: text to emit and the exit code.
struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

type CliResult<T> = std::result::Result<T, String>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_descriptor(path: &Path) -> CliResult<StateDescriptor> {
    parse_state(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_state(path: &Path, d: &StateDescriptor) -> CliResult<QuasiclassicalState> {
    d.to_state().map_err(|e| format!("{}: {e}", path.display()))
}

fn json<T: Serialize + ?Sized>(value: &T) -> CliResult<String> {
    let mut s = to_json_string(value).map_err(|e| e.to_string())?;
    s.push('\n');
    Ok(s)
}

impl ContextArgs {
    fn inline(&self) -> CliResult<Option<TheoryContext>> {
        if self.beta.is_none() && self.mu.is_none() && self.intensive.is_empty() {
            return Ok(None);
        }
        let mut intensive = Vec::new();
        if let Some(mu) = self.mu {
            intensive.push(Intensive::new("N", mu));
        }
        intensive.extend(self.intensive.iter().cloned());
        make_context(Representation::Energy, self.beta, intensive)
            .map(Some)
            .map_err(|e| format!("inline context: {e}"))
    }

    fn file(&self) -> CliResult<Option<TheoryContext>> {
        let Some(path) = &self.ctx else {
            return Ok(None);
        };
        let d = parse_context(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
        d.to_context().map(Some).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// `--ctx` file, then inline flags, then contexts embedded in the inputs.
    fn resolve(&self, inputs: &[(&Path, &StateDescriptor)]) -> CliResult<TheoryContext> {
        let file = self.file()?;
        let inline = self.inline()?;
        if let (Some(f), Some(i)) = (&file, &inline) {
            if f != i {
                eprintln!("warning: --ctx overrides the inline context flags");
            }
        }
        let mut embedded: Option<(&Path, TheoryContext)> = None;
        for (path, d) in inputs {
            let Some(ctx) = d.embedded_context().map_err(|e| format!("{}: {e}", path.display()))? else {
                continue;
            };
            match &embedded {
                Some((first, prev)) if prev != &ctx && file.is_none() && inline.is_none() => {
                    return Err(format!(
                        "{} and {} embed different contexts; pass --ctx",
                        first.display(),
                        path.display()
                    ));
                }
                Some(_) => {}
                None => embedded = Some((path, ctx)),
            }
        }
        let explicit = file.or(inline);
        match (explicit, embedded) {
            (Some(ctx), Some((path, emb))) => {
                if ctx != emb {
                    eprintln!("warning: context embedded in {} is overridden", path.display());
                }
                Ok(ctx)
            }
            (Some(ctx), None) => Ok(ctx),
            (None, Some((_, emb))) => Ok(emb),
            (None, None) => Err("no theory context: pass --ctx, --beta or embed one in the state file".into()),
        }
    }
}

#[derive(Serialize)]
struct GibbsOutput {
    #[serde(flatten)]
    state: StateDescriptor,
    partition_function: f64,
    log_partition_function: f64,
}

#[derive(Serialize)]
struct ConvertOutput {
    convertible: bool,
    min_margin: f64,
    near_tie: bool,
}

#[derive(Serialize)]
struct ResourceOutput {
    epsilon: f64,
    resource_yield: f64,
}

#[derive(Serialize)]
struct LorenzOutput<'a> {
    width: f64,
    points: &'a [(f64, f64)],
}

#[derive(Serialize)]
struct RateOutput {
    rate: f64,
}

#[derive(Serialize)]
struct ValidationReport {
    dimension: usize,
    sum: f64,
    nonnegative: bool,
    normalized: bool,
    fixed_eigensubspace: bool,
    valid: bool,
}

fn unsupported(format: Format, command: &str) -> String {
    format!("--format {format:?} is not supported by `{command}`").to_lowercase()
}

fn dispatch(cli: &Cli) -> CliResult<Outcome> {
    let ctx_args = &cli.context;
    match &cli.command {
        Command::Gibbs { state } => {
            let d = load_descriptor(state)?;
            let ctx = ctx_args.resolve(&[(state, &d)])?;
            let spec = d.system_spec().map_err(|e| format!("{}: {e}", state.display()))?;
            let g = gibbs_state(&spec, &ctx).map_err(|e| e.to_string())?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let out = GibbsOutput {
                        state: StateDescriptor::from_state(&g, Some(&ctx)),
                        partition_function: partition_function(&spec, &ctx).map_err(|e| e.to_string())?,
                        log_partition_function: log_partition_function(&spec, &ctx).map_err(|e| e.to_string())?,
                    };
                    Ok(Outcome::ok(json(&out)?))
                }
                Format::Csv => {
                    let mut text = String::from("index,probability\n");
                    for (i, p) in g.probabilities().iter().enumerate() {
                        let _ = writeln!(text, "{i},{}", fmt_g17(*p));
                    }
                    Ok(Outcome::ok(text))
                }
            }
        }
        Command::Lorenz { state } => {
            let d = load_descriptor(state)?;
            let ctx = ctx_args.resolve(&[(state, &d)])?;
            let r = load_state(state, &d)?;
            let curve = build_curve(&r, &ctx).map_err(|e| e.to_string())?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => Ok(Outcome::ok(curve.to_csv())),
                Format::Json => Ok(Outcome::ok(json(&LorenzOutput {
                    width: curve.width(),
                    points: curve.points(),
                })?)),
            }
        }
        Command::Convert { source, target, witness } => {
            if let Some(f @ Format::Csv) = cli.format {
                return Err(unsupported(f, "convert"));
            }
            let (ds, dt) = (load_descriptor(source)?, load_descriptor(target)?);
            let ctx = ctx_args.resolve(&[(source, &ds), (target, &dt)])?;
            let q = ConversionQuery::new(load_state(source, &ds)?, load_state(target, &dt)?, ctx)
                .map_err(|e| e.to_string())?;
            let report = conversion_report(&q).map_err(|e| e.to_string())?;
            if let Some(path) = witness {
                if report.dominates {
                    match feasibility_oracle_with(&q, OracleLimits::from_env()).map_err(|e| format!("witness: {e}"))? {
                        Some(m) => std::fs::write(path, json(&m.to_rows())?).map_err(|e| format!("{}: {e}", path.display()))?,
                        None => eprintln!("warning: no witness matrix found within the solver tolerance"),
                    }
                } else {
                    eprintln!("note: not convertible, no witness written");
                }
            }
            let out = ConvertOutput {
                convertible: report.dominates,
                min_margin: report.min_margin,
                near_tie: report.near_tie,
            };
            Ok(Outcome {
                text: json(&out)?,
                code: if report.dominates { 0 } else { 1 },
            })
        }
        Command::Work { state, epsilon } => {
            if let Some(f @ Format::Csv) = cli.format {
                return Err(unsupported(f, "work"));
            }
            let d = load_descriptor(state)?;
            let ctx = ctx_args.resolve(&[(state, &d)])?;
            let r = load_state(state, &d)?;
            if ctx.is_entropy() {
                let out = ResourceOutput {
                    epsilon: *epsilon,
                    resource_yield: resource_yield(&r, &ctx).map_err(|e| e.to_string())?,
                };
                return Ok(Outcome::ok(json(&out)?));
            }
            let rep = work_report(&r, &ctx, *epsilon).map_err(|e| e.to_string())?;
            Ok(Outcome::ok(json(&rep)?))
        }
        Command::Rate { source, target } => {
            let (ds, dt) = (load_descriptor(source)?, load_descriptor(target)?);
            let ctx = ctx_args.resolve(&[(source, &ds), (target, &dt)])?;
            let rate = conversion_rate(&load_state(source, &ds)?, &load_state(target, &dt)?, &ctx)
                .map_err(|e| e.to_string())?;
            match cli.format {
                None => Ok(Outcome::ok(format!("{}\n", fmt_g17(rate)))),
                Some(Format::Json) => Ok(Outcome::ok(json(&RateOutput { rate })?)),
                Some(f) => Err(unsupported(f, "rate")),
            }
        }
        Command::Aep { state, epsilon, n } => {
            let d = load_descriptor(state)?;
            let ctx = ctx_args.resolve(&[(state, &d)])?;
            let r = load_state(state, &d)?;
            let sweep = aep_sweep(&r, &ctx, *epsilon, n).map_err(|e| e.to_string())?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => Ok(Outcome::ok(sweep.to_csv())),
                Format::Json => Ok(Outcome::ok(json(&sweep)?)),
            }
        }
        Command::Validate { state } => {
            if let Some(f @ Format::Csv) = cli.format {
                return Err(unsupported(f, "validate"));
            }
            let d = load_descriptor(state)?;
            d.embedded_context().map_err(|e| format!("{}: {e}", state.display()))?;
            let spec = d.system_spec().map_err(|e| format!("{}: {e}", state.display()))?;
            let r = d.probabilities().map_err(|e| format!("{}: {e}", state.display()))?;
            if r.len() != spec.dim() {
                return Err(format!("{}: r has {} entries for dimension {}", state.display(), r.len(), spec.dim()));
            }
            if let Some(x) = r.iter().find(|x| !x.is_finite()) {
                return Err(format!("{}: non-finite probability {x}", state.display()));
            }
            let sum: f64 = r.iter().sum();
            let nonnegative = r.iter().all(|&x| x >= 0.0);
            let normalized = (sum - 1.0).abs() <= RENORMALIZE_TOL;
            let fixed_eigensubspace = nonnegative
                && sum > 0.0
                && QuasiclassicalState::new(spec, r.iter().map(|x| x / sum).collect())
                    .map(|s| s.validate_fixed_eigensubspace())
                    .unwrap_or(false);
            let valid = nonnegative && normalized && fixed_eigensubspace;
            let report = ValidationReport {
                dimension: r.len(),
                sum,
                nonnegative,
                normalized,
                fixed_eigensubspace,
                valid,
            };
            Ok(Outcome {
                text: json(&report)?,
                code: if valid { 0 } else { 1 },
            })
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match std::panic::catch_unwind(|| dispatch(&cli)) {
        Ok(Ok(outcome)) => outcome,
        Ok(Err(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
        Err(_) => {
            eprintln!("error: internal failure");
            return 2;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &outcome.text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(outcome.text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| e.to_string())
        }
    };
    match written {
        Ok(()) => outcome.code,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}
