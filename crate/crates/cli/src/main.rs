//! `distset`: build, verify and measure finite spaces with prescribed
//! distance sets, and solve triangle-spectrum realizability.
//!
//! Exit codes: 0 success / PASS / SAT, 1 FAIL / UNSAT, 2 input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use distset::audit::{self, render_set, Report};
use distset::constructors::{
    build_cantor_ultrametric, build_compact_finite, build_compact_tree_space, build_discrete_ultrametric,
    build_tree_space_auto, glue_spaces, ConstructError, DistanceTarget,
};
use distset::exact::Rational;
use distset::io::{self, IoError};
use distset::metrics::{
    distance_set, eps_net, is_metric, is_ultrametric, spectrum, spectrum_project, FiniteMetricSpace, SpectrumOptions,
    DEFAULT_BUDGET,
};
use distset::spectra::{realize_spec3_upto, SearchOptions, UptoResult, DEFAULT_SEARCH_BUDGET};

const BUDGET_ENV: &str = "DISTSET_BUDGET";

#[derive(Parser)]
#[command(name = "distset", version, about = "Finite spaces with prescribed distance sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a space from a parameter file
    #[command(subcommand)]
    Build(Build),
    /// Check the metric (and optionally ultrametric) axioms
    Verify {
        space: PathBuf,
        #[arg(long)]
        ultrametric: bool,
        /// Print every check with its verdict
        #[arg(long)]
        report: bool,
    },
    /// Print the distance set
    Dist {
        space: PathBuf,
        /// Print the distance matrix as CSV instead
        #[arg(long)]
        csv: bool,
    },
    /// Compute the n-point spectrum
    Spec {
        space: PathBuf,
        #[arg(long)]
        n: usize,
        /// Only tuples of pairwise distinct points
        #[arg(long)]
        distinct: bool,
        /// Project the spectrum down to m points
        #[arg(long)]
        project: Option<usize>,
        /// Maximum number of point tuples (overrides DISTSET_BUDGET)
        #[arg(long)]
        budget: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute an ε-net
    Net {
        /// Space file; the net is greedy in label order
        #[arg(required_unless_present = "compact_tree")]
        space: Option<PathBuf>,
        #[arg(long)]
        eps: String,
        /// Tree on 2: build the compact tree space and use its canonical net
        #[arg(long, conflicts_with = "space")]
        compact_tree: Option<PathBuf>,
    },
    /// Find the least k-point space whose triangles are exactly the given triples
    Realize {
        #[arg(long)]
        triples: PathBuf,
        #[arg(long)]
        kmax: usize,
        /// Maximum number of search nodes (overrides DISTSET_BUDGET)
        #[arg(long)]
        budget: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BuildOut {
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Audit the result and print every check
    #[arg(long)]
    report: bool,
}

#[derive(Subcommand)]
enum Build {
    /// Discrete ultrametric with distance set A ∪ {0}
    Lemma1 {
        #[arg(long)]
        set: PathBuf,
        #[command(flatten)]
        out: BuildOut,
    },
    /// Ultrametric on binary words of length `depth`
    Cantor {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long)]
        depth: usize,
        #[command(flatten)]
        out: BuildOut,
    },
    /// Three-case metric on the branches of a tree on 2 × ℕ
    Tree {
        #[arg(long)]
        tree: PathBuf,
        #[command(flatten)]
        out: BuildOut,
    },
    /// Tree space of a tree on 2, or the finite construction for a set
    Compact {
        #[arg(long, required_unless_present = "set")]
        tree: Option<PathBuf>,
        /// Truncation depth; defaults to the tree's depth
        #[arg(long)]
        depth: Option<usize>,
        /// Finite target set instead of a tree
        #[arg(long, conflicts_with = "tree")]
        set: Option<PathBuf>,
        #[command(flatten)]
        out: BuildOut,
    },
    /// Disjoint union of pieces with cross distances from a schedule
    Glue {
        #[arg(long)]
        schedule: PathBuf,
        #[command(flatten)]
        out: BuildOut,
    },
}

fn read(path: &Path) -> Result<String> {
    io::read_text(path).map_err(|e| anyhow!(e))
}

/// Attaches the file name to a parse error, keeping its line and column.
fn in_file<T>(path: &Path, r: Result<T, IoError>) -> Result<T> {
    r.map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_space(path: &Path) -> Result<FiniteMetricSpace> {
    in_file(path, io::parse_space(&read(path)?))
}

fn parse_rational(s: &str) -> Result<Rational> {
    s.parse().map_err(|e| anyhow!("bad rational {s:?}: {e}"))
}

fn budget(flag: Option<u64>, default: u64) -> Result<u64> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{BUDGET_ENV}={v:?} is not a count")),
        Err(_) => Ok(default),
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Failure verdicts map to exit 1; everything else that goes wrong is an
/// input error.
enum Outcome {
    Ok,
    Fail,
}

fn finish_build(x: &FiniteMetricSpace, r: Report, out: &BuildOut) -> Result<Outcome> {
    emit(&io::space_to_json(x), out.output.as_deref())?;
    if !out.report {
        return Ok(Outcome::Ok);
    }
    // keep stdout clean when the space itself goes there
    if out.output.is_some() {
        println!("{r}");
    } else {
        eprintln!("{r}");
    }
    Ok(if r.all_pass() { Outcome::Ok } else { Outcome::Fail })
}

/// A built space that fails its own verification is a FAIL verdict, not
/// an input error.
#[derive(Debug)]
struct VerdictFailure(String);

impl std::fmt::Display for VerdictFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FAIL {}", self.0)
    }
}

impl std::error::Error for VerdictFailure {}

fn construct_failure(e: ConstructError) -> anyhow::Error {
    match e {
        ConstructError::MetricViolation(w) => anyhow!(VerdictFailure(w)),
        other => anyhow!(other),
    }
}

fn run_build(b: Build) -> Result<Outcome> {
    match b {
        Build::Lemma1 { set, out } => {
            let target =
                DistanceTarget::new(in_file(&set, io::parse_values(&read(&set)?))?).map_err(construct_failure)?;
            let x = build_discrete_ultrametric(&target).map_err(construct_failure)?;
            let r = audit::audit_lemma1(&x, &target);
            finish_build(&x, r, &out)
        }
        Build::Cantor { seq, depth, out } => {
            let d = in_file(&seq, io::parse_values(&read(&seq)?))?;
            let x = build_cantor_ultrametric(&d, depth).map_err(construct_failure)?;
            let r = audit::audit_cantor(&x, &d, depth, &d[..depth]);
            finish_build(&x, r, &out)
        }
        Build::Tree { tree, out } => {
            let t = in_file(&tree, io::parse_tree(&read(&tree)?))?;
            let ts = build_tree_space_auto(&t).map_err(construct_failure)?;
            let r = audit::audit_tree_space(&ts);
            finish_build(ts.space(), r, &out)
        }
        Build::Compact { tree, depth, set, out } => {
            if let Some(set) = set {
                let target =
                    DistanceTarget::new(in_file(&set, io::parse_values(&read(&set)?))?).map_err(construct_failure)?;
                let x = build_compact_finite(&target).map_err(construct_failure)?;
                let r = audit::audit_lemma1(&x, &target);
                return finish_build(&x, r, &out);
            }
            let tree = tree.expect("clap enforces --tree or --set");
            let star = in_file(&tree, io::parse_binary_tree(&read(&tree)?))?;
            let ts = build_compact_tree_space(&star, depth.unwrap_or(star.depth())).map_err(construct_failure)?;
            let eps: Vec<Rational> = ["1/2", "1/4", "1/8"].iter().map(|s| s.parse().unwrap()).collect();
            let r = audit::audit_compact(&ts, &eps);
            finish_build(ts.space(), r, &out)
        }
        Build::Glue { schedule, out } => {
            let base = schedule.parent().unwrap_or(Path::new("."));
            let g = in_file(&schedule, io::parse_glue(&read(&schedule)?, base))?;
            let x = glue_spaces(&g).map_err(construct_failure)?;
            let r = audit::audit_glue(&x, &g);
            finish_build(&x, r, &out)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Build(b) => run_build(b),
        Command::Verify {
            space,
            ultrametric,
            report,
        } => {
            let x = load_space(&space)?;
            if report {
                let mut r = audit::audit_space(&x, ultrametric);
                r.subject = format!("{} ({})", space.display(), r.subject);
                println!("{r}");
                return Ok(if r.all_pass() { Outcome::Ok } else { Outcome::Fail });
            }
            let mut v = is_metric(&x);
            if v.is_pass() && ultrametric {
                v = is_ultrametric(&x);
            }
            println!("{}", v.render(&x));
            Ok(if v.is_pass() { Outcome::Ok } else { Outcome::Fail })
        }
        Command::Dist { space, csv } => {
            let x = load_space(&space)?;
            if csv {
                let mut w = csv::Writer::from_writer(std::io::stdout());
                let mut header = vec![String::new()];
                header.extend(x.labels().iter().cloned());
                w.write_record(&header)?;
                for (i, row) in x.matrix().into_iter().enumerate() {
                    let mut rec = vec![x.labels()[i].clone()];
                    rec.extend(row.iter().map(Rational::to_string));
                    w.write_record(&rec)?;
                }
                w.flush()?;
            } else {
                println!("{}", render_set(&distance_set(&x)));
            }
            Ok(Outcome::Ok)
        }
        Command::Spec {
            space,
            n,
            distinct,
            project,
            budget: b,
            output,
        } => {
            let x = load_space(&space)?;
            let opts = SpectrumOptions {
                distinct_points: distinct,
                budget: budget(b, DEFAULT_BUDGET)?,
            };
            let mut s = spectrum(&x, n, opts)?;
            if let Some(m) = project {
                s = spectrum_project(&s, m)?;
            }
            eprintln!("Spec_{}: {} tuples", s.n(), s.len());
            emit(&io::spectrum_to_json(&s), output.as_deref())?;
            Ok(Outcome::Ok)
        }
        Command::Net {
            space,
            eps,
            compact_tree,
        } => {
            let eps = parse_rational(&eps)?;
            if !eps.is_positive() {
                bail!("--eps must be positive");
            }
            let (x, net) = match (space, compact_tree) {
                (Some(p), _) => {
                    let x = load_space(&p)?;
                    let net = eps_net(&x, &eps)?;
                    (x, net)
                }
                (None, Some(t)) => {
                    let star = in_file(&t, io::parse_binary_tree(&read(&t)?))?;
                    let ts = build_compact_tree_space(&star, star.depth()).map_err(construct_failure)?;
                    eprintln!("n0 = {}", ts.net_depth(&eps));
                    let net = ts.canonical_net(&eps);
                    (ts.into_space(), net)
                }
                (None, None) => unreachable!("clap requires one input"),
            };
            let labels: Vec<&str> = net.iter().map(|&i| x.labels()[i].as_str()).collect();
            println!("{} points: {}", labels.len(), labels.join(", "));
            Ok(if distset::metrics::covers(&x, &net, &eps) {
                Outcome::Ok
            } else {
                Outcome::Fail
            })
        }
        Command::Realize {
            triples,
            kmax,
            budget: b,
            output,
        } => {
            let t = in_file(&triples, io::parse_triangles(&read(&triples)?))?;
            let opts = SearchOptions {
                budget: budget(b, DEFAULT_SEARCH_BUDGET)?,
            };
            match realize_spec3_upto(&t, kmax, opts)? {
                UptoResult::Found { k, witness } => {
                    println!("SAT k={k}");
                    match output {
                        Some(p) => emit(&io::witness_to_json(&witness), Some(&p))?,
                        None => {
                            for (i, j, c) in witness.edges() {
                                println!("v{i} v{j} {c}");
                            }
                        }
                    }
                    Ok(Outcome::Ok)
                }
                UptoResult::UnsatUpTo(k) => {
                    println!("UNSAT for all k <= {k}");
                    Ok(Outcome::Fail)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) if e.is::<VerdictFailure>() => {
            println!("{e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
