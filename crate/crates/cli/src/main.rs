use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hardcore::bounds::{self, BoundInputs};
use hardcore::exact::{self, ExactConfig, Fugacity};
use hardcore::experiment::{self, ExperimentSpec};
use hardcore::fractional::{self, CertificateMode, FractionalConfig};
use hardcore::generators::GenSpec;
use hardcore::sampler::ChainConfig;
use hardcore::{audit, load_graph, ExactError, FractionalError, Graph, GraphFormat};
use num_rational::BigRational;
use serde_json::{json, Value};

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(name = "hardcore", version, about = "Hard-core model tools for locally sparse graphs")]
struct Cli {
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    /// Omit timings so repeated runs produce identical output.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker threads for parallel sections (advisory).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InFormat {
    Edgelist,
    Json,
}

impl From<InFormat> for GraphFormat {
    fn from(f: InFormat) -> Self {
        match f {
            InFormat::Edgelist => GraphFormat::EdgeList,
            InFormat::Json => GraphFormat::Json,
        }
    }
}

#[derive(Args)]
struct GraphInput {
    /// Graph file, or `-` for standard input.
    graph: PathBuf,
    #[arg(long = "input-format", value_enum, default_value_t = InFormat::Edgelist)]
    input_format: InFormat,
}

impl GraphInput {
    fn load(&self) -> anyhow::Result<Graph> {
        let format = self.input_format.into();
        let g = if self.graph.as_os_str() == "-" {
            load_graph(io::stdin().lock(), format)
        } else {
            let file = fs::File::open(&self.graph).with_context(|| format!("opening {}", self.graph.display()))?;
            load_graph(io::BufReader::new(file), format)
        };
        g.with_context(|| format!("reading graph {}", self.graph.display()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Degree and neighbourhood-triangle audit.
    Audit(GraphInput),
    /// Exact partition function, marginals and inequality checks.
    Exact {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        lambda: Fugacity,
    },
    /// Glauber dynamics estimate of the occupancy fraction.
    Sample {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        lambda: f64,
        /// Burn-in steps (default 100 sweeps).
        #[arg(long = "burn-in")]
        burn_in: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Steps between samples (default one sweep).
        #[arg(long)]
        thin: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        chains: usize,
    },
    /// Balance-equation root and the bounds derived from it.
    Bound {
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        f: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Exact fractional chromatic number with primal and dual certificates.
    Chif(GraphInput),
    /// Check a fractional colouring certificate (α, β) at fugacity λ.
    Certify {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        lambda: Fugacity,
        #[arg(long, conflicts_with_all = ["samples", "seed"])]
        exhaustive: bool,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a graph.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        /// Blow-up factor, or the second side of a complete bipartite graph.
        #[arg(long)]
        b: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "graph-format", value_enum, default_value_t = InFormat::Edgelist)]
        graph_format: InFormat,
    },
    /// Run an experiment spec (JSON) and emit a report.
    Experiment {
        spec: PathBuf,
        /// Also write the CSV table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    RandomRegular,
    TriangleFreeRegular,
    Blowup,
    Cycle,
    Path,
    Complete,
    CompleteBipartite,
    Star,
    Empty,
    Petersen,
    Kneser,
    ErdosRenyi,
}

/// What a subcommand produced and the exit code it asks for.
struct Outcome {
    body: String,
    code: u8,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { body, code: 0 }
    }

    fn judged(body: String, holds: bool) -> Self {
        Outcome {
            body,
            code: if holds { 0 } else { EXIT_VIOLATION },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // a pool that is already initialised is fine: the flag is advisory
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(&cli).and_then(|outcome| emit(&cli, &outcome.body).map(|_| outcome.code)) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    let cap = err.chain().any(|cause| {
        matches!(cause.downcast_ref::<ExactError>(), Some(ExactError::TooLarge { .. }))
            || matches!(
                cause.downcast_ref::<FractionalError>(),
                Some(FractionalError::TooLarge { .. })
                    | Some(FractionalError::TooManyColumns { .. })
                    | Some(FractionalError::Exact(ExactError::TooLarge { .. }))
            )
    });
    if cap {
        EXIT_CAP
    } else {
        EXIT_USAGE
    }
}

fn emit(cli: &Cli, body: &str) -> anyhow::Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

fn render(cli: &Cli, value: &Value) -> anyhow::Result<String> {
    match cli.format {
        OutFormat::Json => Ok(serde_json::to_string_pretty(value)? + "\n"),
        OutFormat::Csv => flat_csv(value),
    }
}

/// One CSV row with dotted column names for nested fields; arrays are kept
/// as JSON text in a single cell.
fn flat_csv(value: &Value) -> anyhow::Result<String> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, inner) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, inner, out);
                }
            }
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            Value::Null => out.push((prefix.to_string(), String::new())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut cells = Vec::new();
    walk("", value, &mut cells);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(cells.iter().map(|(k, _)| k))?;
    w.write_record(cells.iter().map(|(_, v)| v))?;
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Audit(input) => {
            let g = input.load()?;
            let a = audit(&g);
            let value = json!({
                "n": a.n,
                "edges": a.edges,
                "max_degree": a.max_degree,
                "max_nbhd_edges": a.max_nbhd_edges(),
                "triangle_total": a.triangle_total,
                "triangle_free": a.is_triangle_free(),
                "implied_f": a.implied_f,
                "nbhd_edges": a.nbhd_edges,
            });
            Ok(Outcome::ok(render(cli, &value)?))
        }
        Command::Exact { input, lambda } => exact_command(cli, &input.load()?, lambda),
        Command::Sample {
            input,
            lambda,
            burn_in,
            samples,
            thin,
            seed,
            chains,
        } => {
            let g = input.load()?;
            let mut cfg = ChainConfig::for_graph(&g, *lambda, *samples, *chains, *seed);
            if let Some(b) = burn_in {
                cfg.burn_in = *b;
            }
            if let Some(t) = thin {
                cfg.thinning = *t;
            }
            let est = hardcore::sampler::glauber_run(&g, &cfg)?;
            let value = json!({
                "config": cfg,
                "mean_occupancy_fraction": est.mean_occupancy_fraction,
                "std_error": est.std_error,
                "per_chain_means": est.per_chain_means,
                "diagnostics": est.diagnostics,
            });
            Ok(Outcome::ok(render(cli, &value)?))
        }
        Command::Bound { delta, f, lambda, eps, n } => {
            let inputs = BoundInputs::new(*delta, *f, *lambda)?;
            let report = bounds::bound_report(&inputs, *eps, *n)?;
            Ok(Outcome::ok(render(cli, &serde_json::to_value(&report)?)?))
        }
        Command::Chif(input) => {
            let g = input.load()?;
            let result = fractional::chif_exact(&g, &FractionalConfig::default())?;
            let value = json!({
                "chif": result.value.to_string(),
                "chif_float": ratio_f64(&result.value),
                "columns": result.columns,
                "pivots": result.pivots,
                "coloring": result.coloring,
                "dual": result.dual.iter().map(|y| y.to_string()).collect::<Vec<_>>(),
            });
            Ok(Outcome::ok(render(cli, &value)?))
        }
        Command::Certify {
            input,
            alpha,
            beta,
            lambda,
            exhaustive,
            samples,
            seed,
        } => {
            let g = input.load()?;
            let alpha = parse_ratio(alpha).context("--alpha")?;
            let beta = parse_ratio(beta).context("--beta")?;
            let mode = match (exhaustive, samples) {
                (_, Some(k)) => CertificateMode::Sampled { samples: *k, seed: *seed },
                (true, None) => CertificateMode::Exhaustive,
                (false, None) if g.n() <= fractional::EXHAUSTIVE_CAP => CertificateMode::Exhaustive,
                (false, None) => {
                    return Err(anyhow!(
                        "graph has {} vertices; pass --samples K for a sampled check",
                        g.n()
                    ))
                }
            };
            let cert = fractional::verify_certificate(&g, &alpha, &beta, lambda, mode)?;
            let mut value = serde_json::to_value(&cert)?;
            let upper = fractional::certified_upper_bound(&g, &cert).ok();
            value["certified_upper"] = upper.as_ref().map_or(Value::Null, |u| Value::String(u.to_string()));
            let verified = cert.verified;
            Ok(Outcome::judged(render(cli, &value)?, verified))
        }
        Command::Gen {
            kind,
            n,
            d,
            b,
            k,
            p,
            seed,
            graph_format,
        } => {
            let spec = gen_spec(*kind, *n, *d, *b, *k, *p, *seed)?;
            let generated = spec.generate()?;
            if let Some(note) = &generated.note {
                eprintln!("note: {note}");
            }
            let body = match graph_format {
                InFormat::Edgelist => generated.graph.to_edge_list(),
                InFormat::Json => generated.graph.to_json() + "\n",
            };
            Ok(Outcome::ok(body))
        }
        Command::Experiment { spec, csv } => experiment_command(cli, spec, csv.as_deref()),
    }
}

fn exact_command(cli: &Cli, g: &Graph, lambda: &Fugacity) -> anyhow::Result<Outcome> {
    let cfg = ExactConfig::default();
    let report = exact::exact_marginals(g, lambda, &cfg)?;
    let genhcm = exact::verify_genhcm(g, lambda, &cfg)?;
    let mut holds = genhcm.holds;
    let a = audit(g);
    let mut value = report.to_json();
    value["occupancy_fraction"] = report.occupancy_fraction().to_json();
    value["exact_arithmetic"] = Value::Bool(cfg.uses_rationals(g, lambda));
    value["genhcm"] = serde_json::to_value(&genhcm)?;
    if a.max_degree > 0 {
        let lam = lambda.to_f64();
        let ab = bounds::alpha_beta(a.max_degree, a.implied_f, lam)?;
        let local = exact::verify_hcmbound_local(g, lambda, ab.alpha, ab.beta, &cfg)?;
        let lower = bounds::occupancy_lower_bound(a.max_degree, a.implied_f, lam)?;
        let occ = report.occupancy_fraction().to_f64();
        let global_ok = report.tolerance().accepts(occ, lower.value);
        holds &= local.holds && global_ok;
        value["local_bound"] = serde_json::to_value(&local)?;
        value["occ_lower"] = json!({
            "value": lower.value,
            "z_star": lower.z_star,
            "margin": occ - lower.value,
            "holds": global_ok,
        });
    }
    Ok(Outcome::judged(render(cli, &value)?, holds))
}

fn experiment_command(cli: &Cli, path: &Path, csv_path: Option<&Path>) -> anyhow::Result<Outcome> {
    let spec = ExperimentSpec::from_path(path)?;
    let report = experiment::run_experiment(&spec, cli.deterministic)?;
    let csv_text = report.to_csv()?;
    if let Some(p) = csv_path.or(spec.output.csv.as_deref()) {
        fs::write(p, &csv_text).with_context(|| format!("writing {}", p.display()))?;
    }
    let json_text = report.to_json() + "\n";
    if let Some(p) = &spec.output.json {
        if cli.out.as_deref() != Some(p.as_path()) {
            fs::write(p, &json_text).with_context(|| format!("writing {}", p.display()))?;
        }
    }
    let body = match cli.format {
        OutFormat::Json => json_text,
        OutFormat::Csv => csv_text,
    };
    Ok(Outcome::judged(body, !report.has_violation()))
}

fn gen_spec(
    kind: GenKind,
    n: Option<usize>,
    d: Option<usize>,
    b: Option<usize>,
    k: Option<usize>,
    p: Option<f64>,
    seed: u64,
) -> anyhow::Result<GenSpec> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| anyhow!("--kind {} needs --{flag}", kind_name(kind)));
    Ok(match kind {
        GenKind::RandomRegular => GenSpec::RandomRegular {
            n: need(n, "n")?,
            d: need(d, "d")?,
            seed,
        },
        GenKind::TriangleFreeRegular => GenSpec::TriangleFreeRegular {
            n: need(n, "n")?,
            d: need(d, "d")?,
            seed,
        },
        GenKind::Blowup => {
            // a d-regular random base when --d is given, a cycle otherwise
            let base = match d {
                Some(d) => GenSpec::RandomRegular { n: need(n, "n")?, d, seed },
                None => GenSpec::Cycle { n: need(n, "n")? },
            };
            GenSpec::Blowup {
                base: Box::new(base),
                b: need(b, "b")?,
            }
        }
        GenKind::Cycle => GenSpec::Cycle { n: need(n, "n")? },
        GenKind::Path => GenSpec::Path { n: need(n, "n")? },
        GenKind::Complete => GenSpec::Complete { n: need(n, "n")? },
        GenKind::CompleteBipartite => GenSpec::CompleteBipartite {
            a: need(n, "n")?,
            b: need(b, "b")?,
        },
        GenKind::Star => GenSpec::Star { leaves: need(n, "n")? },
        GenKind::Empty => GenSpec::Empty { n: need(n, "n")? },
        GenKind::Petersen => GenSpec::Petersen,
        GenKind::Kneser => GenSpec::Kneser {
            n: need(n, "n")?,
            k: need(k, "k")?,
        },
        GenKind::ErdosRenyi => GenSpec::ErdosRenyi {
            n: need(n, "n")?,
            p: p.ok_or_else(|| anyhow!("--kind erdos-renyi needs --p"))?,
            seed,
        },
    })
}

fn kind_name(kind: GenKind) -> String {
    kind.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

/// `p/q`, integers and decimals, all read exactly.
fn parse_ratio(text: &str) -> anyhow::Result<BigRational> {
    match text.parse::<Fugacity>()? {
        Fugacity::Rational(r) => Ok(r),
        Fugacity::Float(x) => {
            BigRational::from_float(x).ok_or_else(|| anyhow!("{text} is not a finite number"))
        }
    }
}

fn ratio_f64(r: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}
