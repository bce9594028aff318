use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ratdegen::par::{self, Exec};
use ratdegen::{Error, ErrorClass, Result, SpherePoint, Tolerances};
use ratdegen_cli::{commands, suite};

#[derive(Parser)]
#[command(name = "ratdegen", version, about = "Degenerate rational maps on the Riemann sphere")]
struct Cli {
    /// Seed for every randomized path.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (overrides RATDEGEN_THREADS; default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file overriding tolerances.
    #[arg(long, global = true)]
    config: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reduction and holes of a map.
    Reduce {
        #[arg(long)]
        map: String,
    },
    /// Formal composition f ∘ g.
    Compose {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    /// n-fold iterate.
    Iterate {
        #[arg(long)]
        map: String,
        #[arg(long)]
        n: usize,
    },
    /// Sample the measure of maximal entropy by inverse iteration.
    Mme {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 30)]
        depth: usize,
        /// CSV output (stdout when omitted).
        #[arg(long)]
        out: Option<String>,
    },
    /// Conformal barycenter of a measure (JSON or CSV).
    Barycenter {
        #[arg(long)]
        measure: String,
    },
    /// Growth case, depth profile and limit measure of a family.
    FamilyAnalyze {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 8)]
        levels: usize,
        /// Sampler size for the comparison at the last parameter (0 skips it).
        #[arg(long, default_value_t = 0)]
        samples: usize,
        /// Real and imaginary part of the test point of δ_z.
        #[arg(long, num_args = 2, default_values_t = [0.3, 0.2], allow_negative_numbers = true)]
        point: Vec<f64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Tree of spheres from explicit scalings or a family's scheme.
    TreeBuild {
        #[arg(long, conflicts_with = "family")]
        scalings: Option<String>,
        #[arg(long, requires = "levels")]
        family: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
        /// DOT export of the gluing graph.
        #[arg(long)]
        dot: Option<String>,
    },
    /// Polynomial-like restrictions along fully ramified times.
    PolylikeDetect {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 5)]
        window: usize,
        /// Report only this schedule value ("p/q").
        #[arg(long)]
        t: Option<String>,
    },
    /// Acceptance battery; prints a pass/fail JSON report.
    VerifySuite {
        #[arg(long, default_value = "desk")]
        tier: String,
        /// Run a single criterion (1-based).
        #[arg(long)]
        only: Option<usize>,
    },
}

fn threads(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var("RATDEGEN_THREADS").ok().and_then(|v| v.parse().ok()))
        .filter(|n| *n > 0)
}

fn tolerances(path: Option<&str>) -> Result<Tolerances> {
    match path {
        None => Ok(Tolerances::default()),
        Some(p) => Tolerances::from_json(&ratdegen_cli::io::read(p)?).map_err(|e| Error::Schema(format!("{p}: {e}"))),
    }
}

fn run(cli: Cli) -> Result<(String, bool)> {
    let tol = tolerances(cli.config.as_deref())?;
    let out = match cli.cmd {
        Cmd::Reduce { map } => commands::reduce(&map, &tol)?,
        Cmd::Compose { f, g } => commands::compose(&f, &g, &tol)?,
        Cmd::Iterate { map, n } => commands::iterate(&map, n, &tol)?,
        Cmd::Mme { map, samples, depth, out } => commands::mme(&map, samples, depth, cli.seed, out.as_deref(), &tol)?,
        Cmd::Barycenter { measure } => commands::barycenter(&measure, &tol)?,
        Cmd::FamilyAnalyze {
            family,
            levels,
            samples,
            point,
            out,
        } => {
            let z = SpherePoint::from_re_im(point[0], point[1]);
            let text = commands::family_analyze(&family, levels, samples, cli.seed, z, &tol)?;
            match out {
                Some(p) => {
                    ratdegen_cli::io::write(&p, &text)?;
                    String::new()
                }
                None => text,
            }
        }
        Cmd::TreeBuild {
            scalings,
            family,
            levels,
            dot,
        } => match (scalings, family, levels) {
            (Some(s), _, _) => commands::tree_build_scalings(&s, dot.as_deref(), &tol)?,
            (None, Some(f), Some(n)) => commands::tree_build_family(&f, n, dot.as_deref(), &tol)?,
            _ => return Err(Error::Schema("tree-build needs --scalings or --family with --levels".into())),
        },
        Cmd::PolylikeDetect { family, window, t } => commands::polylike_detect(&family, window, t.as_deref(), &tol)?,
        Cmd::VerifySuite { tier, only } => {
            if tier != "desk" {
                return Err(Error::Schema(format!("unknown tier {tier:?}; only \"desk\" is available")));
            }
            let cfg = suite::SuiteConfig {
                seed: cli.seed,
                tol,
                exec: Exec::Parallel,
                bin: std::env::current_exe().ok(),
            };
            let results = match only {
                Some(i) if (1..=suite::criterion_count()).contains(&i) => vec![suite::run_one(i, &cfg)],
                Some(i) => return Err(Error::Schema(format!("no criterion {i}"))),
                None => suite::run_all(&cfg),
            };
            let all = results.iter().all(|r| r.pass);
            let v = serde_json::json!({"tier": "desk", "all_pass": all, "criteria": results});
            let text = serde_json::to_string_pretty(&v).unwrap_or_default() + "\n";
            return Ok((text, all));
        }
    };
    Ok((out, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = threads(cli.threads) {
        par::set_threads(n);
    }
    match run(cli) {
        Ok((text, ok)) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Schema => 2,
                ErrorClass::Numerical => 3,
                ErrorClass::Hypothesis => 4,
            })
        }
    }
}
