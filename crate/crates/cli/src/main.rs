use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nodal_core::admissibility::{load_patterns, PatternSet, Status, Validator, DEFAULT_DEPTH};
use nodal_core::bounds::{bound_1d_periodic, bound_2d_periodic, min_m, BoundResult};
use nodal_core::cubical::{cubical_approx, sign_grid, Polarity, SignGrid};
use nodal_core::experiments::{
    run_experiment, write_results, ExperimentConfig, ExperimentKind, Format,
};
use nodal_core::homology::{
    approx_betti, betti_of, reference_betti, reference_resolution, BettiPair,
};
use nodal_core::orthant::{
    asymptotic_functional, default_deltas, expansion_check, prop41_limit, OrthantMethod,
    StencilPattern,
};
use nodal_core::random_fields::{trig_coeffs, Coefficients, Realization};
use nodal_core::{Error, Result};
use serde_json::json;

/// Homology of nodal domains of random periodic fields: sampling, cubical
/// approximation, certification and probability bounds.
#[derive(Debug, Parser)]
#[command(name = "nodal", version)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a realization and write it as JSON.
    Gen {
        #[command(flatten)]
        field: FieldArgs,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a realization at one point.
    Eval {
        #[command(flatten)]
        field: FieldArgs,
        /// Point, comma separated in 2D (e.g. 0.5,1.25).
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Sign grid of a realization at resolution M.
    Grid {
        #[command(flatten)]
        field: FieldArgs,
        /// Grid resolution.
        #[arg(long = "M")]
        m: usize,
        /// Values with |u| <= zero_tol are flagged as zeros.
        #[arg(long, default_value_t = 0.0)]
        zero_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Betti numbers of the cubical approximations.
    Betti(BettiArgs),
    /// Certify the homology of the cubical approximation (exit 2 if not
    /// certified).
    Validate {
        #[command(flatten)]
        field: FieldArgs,
        /// Grid resolution.
        #[arg(long = "M")]
        m: usize,
        /// Dyadic depth.
        #[arg(long = "D", default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        /// Values with |u| <= zero_tol are flagged as zeros.
        #[arg(long, default_value_t = 0.0)]
        zero_tol: f64,
        /// Pattern library file (default: the built-in library).
        #[arg(long, env = "NODAL_PATTERNS")]
        patterns: Option<PathBuf>,
        /// Stop at the first violation.
        #[arg(long)]
        first_violation: bool,
    },
    /// Closed-form lower bound for the probability of correct homology.
    Bound {
        #[command(flatten)]
        coeffs: CoeffArgs,
        /// Grid resolution.
        #[arg(long = "M", required_unless_present = "target")]
        m: Option<usize>,
        /// Report the least M whose bound reaches this value.
        #[arg(long)]
        target: Option<f64>,
    },
    /// Orthant probability functional of a named stencil.
    Orthant {
        /// Stencil name.
        #[arg(long)]
        pattern: String,
        #[command(flatten)]
        coeffs: CoeffArgs,
        /// Stencil scale.
        #[arg(long, default_value_t = 1e-2)]
        delta: f64,
        /// Orthant probability method; auto is exact for n <= 3, radial
        /// sampling otherwise.
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Check the covariance expansion over delta = 0.1 * 2^-j instead.
        #[arg(long)]
        expansion: bool,
    },
    /// Pattern library tools.
    Patterns {
        #[command(subcommand)]
        command: PatternsCommand,
    },
    /// Run a Monte Carlo experiment from a JSON config.
    Experiment {
        #[arg(value_enum)]
        kind: Kind,
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; `.json` for JSON, CSV otherwise (default: the config
        /// `output`, else CSV on stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum PatternsCommand {
    /// Load a pattern file and print survivor counts over all 512 stencils.
    Check {
        /// Pattern file (default: the built-in library).
        #[arg(env = "NODAL_PATTERNS")]
        file: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Exact,
    Mc,
    Radial,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    ZeroStats,
    #[value(name = "homology-1d")]
    Homology1d,
    #[value(name = "homology-2d")]
    Homology2d,
    OrthantConvergence,
}

impl From<Kind> for ExperimentKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::ZeroStats => ExperimentKind::ZeroStats,
            Kind::Homology1d => ExperimentKind::Homology1D,
            Kind::Homology2d => ExperimentKind::Homology2D,
            Kind::OrthantConvergence => ExperimentKind::OrthantConvergence,
        }
    }
}

#[derive(Debug, Args)]
struct CoeffArgs {
    /// Dimension of the trigonometric polynomial field.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Degree of the trigonometric polynomial.
    #[arg(long = "N", required_unless_present = "coeffs")]
    n: Option<usize>,
    /// Coefficient file instead of a trigonometric polynomial.
    #[arg(long, conflicts_with = "n")]
    coeffs: Option<PathBuf>,
}

impl CoeffArgs {
    fn load(&self) -> Result<Coefficients> {
        match (&self.coeffs, self.n) {
            (Some(p), _) => Coefficients::from_json(&read(p)?),
            (None, Some(n)) => trig_coeffs(self.dim, n),
            (None, None) => Err(Error::InvalidArgument("need --N or --coeffs".into())),
        }
    }
}

#[derive(Debug, Args)]
struct FieldArgs {
    /// Realization file; otherwise one is drawn from --N/--coeffs and --seed.
    #[arg(long, conflicts_with_all = ["n", "coeffs", "seed"])]
    field: Option<PathBuf>,
    /// Dimension of the trigonometric polynomial field.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Degree of the trigonometric polynomial.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Coefficient file instead of a trigonometric polynomial.
    #[arg(long, conflicts_with = "n")]
    coeffs: Option<PathBuf>,
    /// Seed of the drawn realization [default: 0].
    #[arg(long)]
    seed: Option<u64>,
}

impl FieldArgs {
    fn load(&self) -> Result<Realization> {
        if let Some(p) = &self.field {
            return Realization::from_json(&read(p)?);
        }
        let c = CoeffArgs {
            dim: self.dim,
            n: self.n,
            coeffs: self.coeffs.clone(),
        }
        .load()?;
        Ok(c.draw(self.seed.unwrap_or(0)))
    }
}

#[derive(Debug, Args)]
struct BettiArgs {
    /// Sign grid file; otherwise the grid is sampled from the field.
    #[arg(long, conflicts_with_all = ["field", "n", "coeffs"])]
    grid: Option<PathBuf>,
    #[command(flatten)]
    field: FieldArgs,
    /// Grid resolution.
    #[arg(long = "M", required_unless_present = "grid")]
    m: Option<usize>,
    /// Values with |u| <= zero_tol are flagged as zeros.
    #[arg(long, default_value_t = 0.0)]
    zero_tol: f64,
    /// Also compute the fine-grid reference and compare.
    #[arg(long, conflicts_with = "grid")]
    reference: bool,
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn say(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => say(&format!("{text}\n"))?,
    }
    Ok(())
}

fn bound_for(c: &Coefficients, m: usize) -> Result<BoundResult> {
    match c {
        Coefficients::OneD(c) => bound_1d_periodic(&c.moments(), m),
        Coefficients::TwoD(c) => bound_2d_periodic(&c.moments(), m),
    }
}

fn patterns_from(path: Option<&Path>) -> Result<PatternSet> {
    match path {
        Some(p) => load_patterns(&read(p)?),
        None => Ok(PatternSet::builtin().clone()),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { field, out } => emit(&field.load()?.to_json(), out.as_deref())?,
        Command::Eval { field, x } => {
            let r = field.load()?;
            let point = x
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidArgument(format!("bad point {x:?}: {e}")))?;
            say(&format!(
                "{}\n",
                json!({ "x": point, "u": r.evaluate(&point)? })
            ))?;
        }
        Command::Grid {
            field,
            m,
            zero_tol,
            out,
        } => emit(
            &sign_grid(&field.load()?, m, zero_tol)?.to_json(),
            out.as_deref(),
        )?,
        Command::Betti(a) => {
            if let Some(p) = &a.grid {
                let g = SignGrid::from_json(&read(p)?)?;
                let b = BettiPair {
                    plus: betti_of(&cubical_approx(&g, Polarity::Plus)),
                    minus: betti_of(&cubical_approx(&g, Polarity::Minus)),
                };
                say(&format!("{}\n", b.to_json()))?;
            } else {
                let r = a.field.load()?;
                let m = a.m.expect("clap enforces --M");
                let b = approx_betti(&r, m, a.zero_tol)?;
                if a.reference {
                    let m_ref = reference_resolution(m, r.max_frequency());
                    let reference = match reference_betti(&r, m_ref) {
                        Ok(rb) => serde_json::from_str(&rb.to_json())?,
                        Err(Error::Unresolved { .. }) => serde_json::Value::Null,
                        Err(e) => return Err(e),
                    };
                    let approx: serde_json::Value = serde_json::from_str(&b.to_json())?;
                    let matched = if reference.is_null() {
                        serde_json::Value::Null
                    } else {
                        (reference == approx).into()
                    };
                    say(&format!(
                        "{}\n",
                        json!({ "M": m, "betti": approx, "M_ref": m_ref, "reference": reference, "match": matched })
                    ))?;
                } else {
                    say(&format!("{}\n", b.to_json()))?;
                }
            }
        }
        Command::Validate {
            field,
            m,
            depth,
            zero_tol,
            patterns,
            first_violation,
        } => {
            let r = field.load()?;
            let set = patterns_from(patterns.as_deref())?;
            let v = Validator::new(depth)
                .with_patterns(&set)
                .with_zero_tol(zero_tol)
                .first_violation_only(first_violation);
            let outcome = match &r {
                Realization::OneD(r) => v.validate_1d(r, m)?,
                Realization::TwoD(r) => v.validate_2d(r, m)?,
            };
            say(&format!(
                "{}\n",
                serde_json::to_string_pretty(&outcome.to_json())?
            ))?;
            if outcome.status != Status::Certified {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Bound { coeffs, m, target } => {
            let c = coeffs.load()?;
            let m = match target {
                Some(t) => min_m(
                    |mm| bound_for(&c, mm).map_or(f64::NEG_INFINITY, |b| b.bound),
                    t,
                )?,
                None => m.expect("clap enforces --M"),
            };
            let mut out = bound_for(&c, m)?.to_json();
            if let Some(t) = target {
                out["target"] = t.into();
            }
            say(&format!("{}\n", serde_json::to_string_pretty(&out)?))?;
        }
        Command::Orthant {
            pattern,
            coeffs,
            delta,
            method,
            samples,
            seed,
            expansion,
        } => {
            let p = StencilPattern::from_name(&pattern)?;
            let c = match coeffs.coeffs {
                Some(_) => coeffs.load()?,
                None => trig_coeffs(p.dim(), coeffs.n.expect("clap enforces --N"))?,
            };
            if expansion {
                let expected = p.expected_expansion(&c)?;
                let report = expansion_check(&c, p, &default_deltas(7), &expected)?;
                let out =
                    json!({ "expected": expected, "report": report, "passed": report.passed() });
                say(&format!("{}\n", serde_json::to_string_pretty(&out)?))?;
            } else {
                let n = p.signs().len();
                let method = match method {
                    Method::Auto => OrthantMethod::auto(n, samples, seed),
                    Method::Exact => OrthantMethod::Exact,
                    Method::Mc => OrthantMethod::HitOrMiss { samples, seed },
                    Method::Radial => OrthantMethod::Radial { samples, seed },
                };
                let f = asymptotic_functional(&c, p, delta, method)?;
                let limit = prop41_limit(&p.signs(), &p.v1_limit())?;
                let out = json!({ "pattern": p.name(), "value": f, "limit": limit });
                say(&format!("{}\n", serde_json::to_string_pretty(&out)?))?;
            }
        }
        Command::Patterns {
            command: PatternsCommand::Check { file },
        } => {
            let s = patterns_from(file.as_deref())?.survivors();
            say(&format!("{}\n", json!({ "B": s.b, "I4": s.i4, "I": s.i })))?;
        }
        Command::Experiment {
            kind,
            config,
            seed,
            out,
        } => {
            let mut value: serde_json::Value = serde_json::from_str(&read(&config)?)?;
            let kind = ExperimentKind::from(kind);
            if let Some(obj) = value.as_object_mut() {
                obj.entry("kind")
                    .or_insert_with(|| serde_json::to_value(kind).expect("kind serializes"));
            }
            let mut cfg = ExperimentConfig::from_json(&value.to_string())?;
            if cfg.kind != kind {
                return Err(Error::InvalidArgument(format!(
                    "config is for {} but {} was requested",
                    cfg.kind.name(),
                    kind.name()
                )));
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let summary = run_experiment(&cfg)?;
            match out.or(cfg.output.map(PathBuf::from)) {
                Some(p) => write_results(&summary, &p, Format::from_path(&p))?,
                None => say(&String::from_utf8_lossy(&nodal_core::experiments::render(
                    &summary,
                    Format::Csv,
                )?))?,
            }
            if !summary.soundness_exceptions.is_empty() {
                eprintln!(
                    "warning: {} certified trials disagree with the reference",
                    summary.soundness_exceptions.len()
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
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
