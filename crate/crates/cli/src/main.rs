//! Command-line front end: validate instance files, certify
//! contraction classes, run Picard orbits with error bounds, validate
//! catalogued statements on single instances or random sweeps, and
//! generate instances from recipes.
//!
//! Exit codes: 0 success, 1 unreadable or malformed input, 2 violated
//! invariant or precondition, 3 counterexample found.

use std::fs;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use deltafix_core::{
    a_priori_bound, bound_domination, certify, chain_rate, effective_rate, initial_quantity_p,
    instance_from_config, picard_iterate, rate_law_checks, sweep, validate, Certificate,
    ChatterjeaDomain, ClassId, GenConfig, Instance, InstanceFile, Parallelism, SelectionPolicy,
    TheoremId, Tolerance, Verdict,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "deltafix", version, about = "Contraction certification and fixed-point search on finite metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every invariant of an instance file.
    Validate {
        path: PathBuf,
        /// Override the comparison slack for inequality checks.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Emit one certificate per requested contraction class (JSON lines).
    Certify {
        path: PathBuf,
        /// Comma-separated: banach, perimeter, total_pairwise, orbital,
        /// kannan, chatterjea, or all.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        classes: Vec<String>,
        /// Arity of the total_pairwise class.
        #[arg(long, default_value_t = 4)]
        n_for_s: usize,
        /// Quantify the chatterjea check over every ordered pair
        /// instead of the restricted domain.
        #[arg(long)]
        chatterjea_unrestricted: bool,
        #[arg(long)]
        tolerance: Option<f64>,
        /// Worker threads; 1 forces the serial path, default is
        /// machine parallelism. The output is identical either way.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run one Picard orbit, optionally with certified error bounds.
    Iterate {
        path: PathBuf,
        #[arg(long)]
        x0: usize,
        /// first_index, nearest, farthest, or seeded_random.
        #[arg(long, default_value = "first_index")]
        policy: String,
        /// Seed for the seeded_random policy.
        #[arg(long, default_value_t = 0)]
        policy_seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        /// Attach a priori bounds for this certified class.
        #[arg(long)]
        class_for_bounds: Option<String>,
        #[arg(long, default_value_t = 4)]
        n_for_s: usize,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Validate a catalogued statement on an instance or a random sweep.
    Theorem {
        /// Instance file to validate once.
        #[arg(long, conflicts_with = "gen")]
        instance: Option<PathBuf>,
        /// Generator recipe for a sweep.
        #[arg(long)]
        gen: Option<PathBuf>,
        /// Statement id, e.g. T4_3_orbital_fixed.
        #[arg(long)]
        id: String,
        /// Arity parameter for T3_5_periodic_exists / P3_3_downward.
        #[arg(long)]
        n: Option<usize>,
        /// Arity parameter for P3_4_upward.
        #[arg(long)]
        m: Option<usize>,
        /// Instances per sweep.
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        /// Directory for counterexample bundles (default: alongside
        /// the working directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Materialize an instance file from a generator recipe.
    Gen {
        /// Recipe JSON: {"point_count", "flavor", "map_flavor", "seed"}.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn invariant(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Validate { path, tolerance } => cmd_validate(&path, tolerance),
        Command::Certify {
            path,
            classes,
            n_for_s,
            chatterjea_unrestricted,
            tolerance,
            workers,
        } => cmd_certify(
            &path,
            &classes,
            n_for_s,
            chatterjea_unrestricted,
            tolerance,
            workers,
        ),
        Command::Iterate {
            path,
            x0,
            policy,
            policy_seed,
            max_steps,
            class_for_bounds,
            n_for_s,
            tolerance,
        } => cmd_iterate(
            &path,
            x0,
            &policy,
            policy_seed,
            max_steps,
            class_for_bounds.as_deref(),
            n_for_s,
            tolerance,
        ),
        Command::Theorem {
            instance,
            gen,
            id,
            n,
            m,
            count,
            seed,
            workers,
            out,
        } => cmd_theorem(
            instance.as_deref(),
            gen.as_deref(),
            &id,
            n,
            m,
            count,
            seed,
            workers,
            out.as_deref(),
        ),
        Command::Gen { config, out } => cmd_gen(&config, &out),
    }
}

fn read_instance(path: &Path, tolerance: Option<f64>) -> Result<Instance<f64>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let file: InstanceFile<f64> = serde_json::from_str(&text)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let result = match tolerance {
        Some(slack) => file.validate(&Tolerance::with_slack(slack)),
        None => file.validate_default(),
    };
    result.map_err(|e| Failure::invariant(e.to_string()))
}

fn parse_classes(names: &[String], n_for_s: usize) -> Result<Vec<ClassId>, Failure> {
    let mut out = Vec::new();
    for name in names {
        match name.as_str() {
            "all" => out.extend([
                ClassId::Banach,
                ClassId::Perimeter,
                ClassId::TotalPairwise(n_for_s),
                ClassId::Orbital,
                ClassId::Kannan,
                ClassId::Chatterjea,
            ]),
            "total_pairwise" => out.push(ClassId::TotalPairwise(n_for_s)),
            other => out.push(
                other
                    .parse::<ClassId>()
                    .map_err(|e| Failure::io(format!("--classes: {e}")))?,
            ),
        }
    }
    Ok(out)
}

/// Worker-count handling shared by certify and theorem: 1 forces the
/// serial path, anything else runs the parallel path inside a pool of
/// the requested size (or the global pool when unspecified).
fn with_parallelism<R: Send>(
    workers: Option<usize>,
    body: impl FnOnce(Parallelism) -> R + Send,
) -> Result<R, Failure> {
    match workers {
        Some(1) => Ok(body(Parallelism::Serial)),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Failure::io(format!("worker pool: {e}")))?;
            Ok(pool.install(|| body(Parallelism::Parallel)))
        }
        None => Ok(body(Parallelism::Parallel)),
    }
}

fn cmd_validate(path: &Path, tolerance: Option<f64>) -> Result<u8, Failure> {
    let instance = read_instance(path, tolerance)?;
    let report = json!({
        "valid": true,
        "points": instance.space.point_count(),
        "single_valued": instance.map.as_single().is_some(),
        "metadata": instance.metadata,
    });
    println!("{report}");
    Ok(0)
}

fn cmd_certify(
    path: &Path,
    class_names: &[String],
    n_for_s: usize,
    chatterjea_unrestricted: bool,
    tolerance: Option<f64>,
    workers: Option<usize>,
) -> Result<u8, Failure> {
    let instance = read_instance(path, tolerance)?;
    let classes = parse_classes(class_names, n_for_s)?;
    let domain = if chatterjea_unrestricted {
        ChatterjeaDomain::Unrestricted
    } else {
        ChatterjeaDomain::Restricted
    };
    let multi = instance.multi();
    let space = &instance.space;

    let certificates = with_parallelism(workers, |par| {
        classes
            .iter()
            .map(|&class| certify(space, &multi, class, domain, par))
            .collect::<Result<Vec<Certificate<f64>>, _>>()
    })?
    .map_err(|e| Failure::invariant(e.to_string()))?;

    let mut stdout = std::io::stdout().lock();
    for cert in &certificates {
        let line = serde_json::to_string(cert).expect("certificates serialize");
        writeln!(stdout, "{line}").map_err(|e| Failure::io(e.to_string()))?;
    }

    if std::io::stderr().is_terminal() {
        let mut stderr = std::io::stderr().lock();
        let _ = writeln!(
            stderr,
            "{:<22} {:>12} {:>10} {:>12}  witness",
            "class", "tightest", "certified", "sup"
        );
        for cert in &certificates {
            let tightest = cert
                .tightest
                .map_or_else(|| "-".to_string(), |t| format!("{t:.6}"));
            let witness = cert
                .witness
                .as_ref()
                .map_or_else(|| "-".to_string(), |w| format!("{w:?}"));
            let _ = writeln!(
                stderr,
                "{:<22} {:>12} {:>10} {:>12.6}  {}",
                cert.class.to_string(),
                tightest,
                cert.certified,
                cert.admissible_sup,
                witness
            );
        }
    }
    Ok(0)
}

fn parse_policy(name: &str, seed: u64) -> Result<SelectionPolicy, Failure> {
    match name {
        "first_index" => Ok(SelectionPolicy::FirstIndex),
        "nearest" => Ok(SelectionPolicy::Nearest),
        "farthest" => Ok(SelectionPolicy::Farthest),
        "seeded_random" => Ok(SelectionPolicy::SeededRandom { seed }),
        other => Err(Failure::io(format!("unknown policy '{other}'"))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_iterate(
    path: &Path,
    x0: usize,
    policy_name: &str,
    policy_seed: u64,
    max_steps: usize,
    class_for_bounds: Option<&str>,
    n_for_s: usize,
    tolerance: Option<f64>,
) -> Result<u8, Failure> {
    let instance = read_instance(path, tolerance)?;
    let space = &instance.space;
    if x0 >= space.point_count() {
        return Err(Failure::invariant(format!(
            "x0 = {x0} out of range for {} points",
            space.point_count()
        )));
    }
    if max_steps == 0 {
        return Err(Failure::invariant("max_steps must be at least 1".to_string()));
    }
    let policy = parse_policy(policy_name, policy_seed)?;
    let multi = instance.multi();
    let trace = picard_iterate(space, &multi, x0, &policy, max_steps);

    let bounds = match class_for_bounds {
        None => serde_json::Value::Null,
        Some(name) => {
            let class = match name {
                "total_pairwise" => ClassId::TotalPairwise(n_for_s),
                other => other
                    .parse::<ClassId>()
                    .map_err(|e| Failure::io(format!("--class-for-bounds: {e}")))?,
            };
            let cert = certify(
                space,
                &multi,
                class,
                ChatterjeaDomain::Restricted,
                Parallelism::Serial,
            )
            .map_err(|e| Failure::invariant(e.to_string()))?;
            if !cert.certified {
                return Err(Failure::invariant(format!(
                    "bounds requested for {class}, but the map does not certify (tightest {:?})",
                    cert.tightest
                )));
            }
            let constant = cert.tightest.unwrap_or(0.0);
            let nominal = effective_rate(class, constant)
                .map_err(|e| Failure::invariant(e.to_string()))?;
            let rate =
                chain_rate(class, constant).map_err(|e| Failure::invariant(e.to_string()))?;
            let slack = tolerance.unwrap_or(1e-9);
            let law_tol = Tolerance::with_slack(slack);
            let links: Vec<_> = rate_law_checks(class, space, &multi, &trace)
                .into_iter()
                .map(|link| {
                    json!({
                        "index": link.index,
                        "current": link.current,
                        "next": link.next,
                        "in_domain": link.in_domain,
                        "holds": link.holds(&rate, &law_tol),
                    })
                })
                .collect();
            match initial_quantity_p(class, space, &trace) {
                Ok(p) => {
                    let terminal: Vec<_> = bound_domination(space, &trace, &rate, &p);
                    let per_step: Vec<_> = (0..trace.points.len())
                        .map(|step| {
                            let distance = terminal
                                .iter()
                                .find(|(n, _, _)| *n == step)
                                .map(|(_, d, _)| *d);
                            json!({
                                "step": step,
                                "bound": a_priori_bound(&rate, &p, step),
                                "distance_to_terminal": distance,
                            })
                        })
                        .collect();
                    json!({
                        "class": class.to_string(),
                        "constant": constant,
                        "nominal_rate": nominal,
                        "chain_rate": rate,
                        "p": p,
                        "per_step": per_step,
                        "rate_law": links,
                    })
                }
                Err(e) => json!({
                    "class": class.to_string(),
                    "constant": constant,
                    "nominal_rate": nominal,
                    "chain_rate": rate,
                    "note": e.to_string(),
                    "rate_law": links,
                }),
            }
        }
    };

    let report = json!({
        "trace": trace,
        "bounds": bounds,
    });
    println!("{report}");
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_theorem(
    instance_path: Option<&Path>,
    gen_path: Option<&Path>,
    id: &str,
    n: Option<usize>,
    m: Option<usize>,
    count: usize,
    seed: u64,
    workers: Option<usize>,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let theorem = TheoremId::from_parts(id, n, m).map_err(Failure::io)?;
    let out_dir = out.unwrap_or_else(|| Path::new("."));

    if let Some(path) = instance_path {
        let instance = read_instance(path, None)?;
        let report =
            validate(&instance, theorem).map_err(|e| Failure::invariant(e.to_string()))?;
        println!("{}", serde_json::to_string(&report).expect("reports serialize"));
        if report.verdict == Verdict::Counterexample {
            let bundle = out_dir.join(format!("counterexample_{}.json", theorem.id_str()));
            fs::write(&bundle, serde_json::to_string_pretty(&report).unwrap())
                .map_err(|e| Failure::io(format!("{}: {e}", bundle.display())))?;
            eprintln!("counterexample bundle written to {}", bundle.display());
            return Ok(3);
        }
        return Ok(0);
    }

    let Some(path) = gen_path else {
        return Err(Failure::io(
            "theorem needs either --instance FILE or --gen CONFIG".to_string(),
        ));
    };
    if count == 0 {
        return Err(Failure::invariant("--count must be at least 1".to_string()));
    }
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let config: GenConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;

    let outcome = with_parallelism(workers, |par| sweep(&config, theorem, count, seed, par))?
        .map_err(|e| Failure::invariant(e.to_string()))?;

    println!("{}", serde_json::to_string(&outcome).expect("summaries serialize"));
    if outcome.counterexamples > 0 {
        let bundle = out_dir.join(format!("counterexamples_{}_{seed}.json", theorem.id_str()));
        fs::write(&bundle, serde_json::to_string_pretty(&outcome.reports).unwrap())
            .map_err(|e| Failure::io(format!("{}: {e}", bundle.display())))?;
        eprintln!(
            "{} counterexample bundle(s) written to {}",
            outcome.counterexamples,
            bundle.display()
        );
        return Ok(3);
    }
    Ok(0)
}

fn cmd_gen(config_path: &Path, out_path: &Path) -> Result<u8, Failure> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| Failure::io(format!("{}: {e}", config_path.display())))?;
    let config: GenConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::io(format!("{}: {e}", config_path.display())))?;
    let file = instance_from_config(&config).map_err(|e| Failure::invariant(e.to_string()))?;
    let body = serde_json::to_string_pretty(&file).expect("instances serialize");
    fs::write(out_path, body + "\n")
        .map_err(|e| Failure::io(format!("{}: {e}", out_path.display())))?;
    println!("{}", out_path.display());
    Ok(0)
}
