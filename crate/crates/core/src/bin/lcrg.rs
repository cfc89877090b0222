use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_rational::BigRational;

use lcrg::config::{read_config, RunSpec};
use lcrg::estimators::{estimate_moments, nc_test, NcQuery, NcVerdict};
use lcrg::experiments::{
    connectivity_scan, er_connectivity_exact, giant_scan, threshold_locator, with_workers, Metric, ScanMode,
};
use lcrg::output::{default_metrics, emit_csv, emit_manifest, emit_plotdata, fmt_g, Provenance};
use lcrg::rng::derive_seed;
use lcrg::samplers::{EdgeSampler, Sampler};
use lcrg::validation::validate_sampler;
use lcrg::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "lcrg", version, about = "Random graphs thresholded from log-concave edge vectors")]
struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Master seed, overriding `sampler.seed`
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; results do not depend on this
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Run scans even when the hit-and-run schedule fails validation
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write draws of the edge vector, one per line
    Sample {
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    ScanConnectivity {
        /// Draws per side for the pre-scan sampler check
        #[arg(long, default_value_t = 2000)]
        validation_draws: usize,
    },
    ScanGiant {
        #[arg(long, default_value_t = 2000)]
        validation_draws: usize,
    },
    /// Compare P(X_I <= s, X_J <= t) against the product of the marginals;
    /// lists are comma separated, I and J disjoint
    NcTest {
        #[arg(long, value_delimiter = ',', required = true)]
        i: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        j: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
    },
    /// Per-edge second moments and their extremes
    Moments {
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
    },
    /// Exact P(G(n, p) connected)
    OracleEr {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
    },
    /// KS battery against the exact sampler for the same ball
    ValidateSampler {
        #[arg(long, default_value_t = 20_000)]
        draws: usize,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        Error::Validation(_) => 3,
        Error::Io { .. } => 4,
        Error::Cell { source, .. } => exit_code(source),
        _ => 1,
    }
}

fn load(cli: &Cli) -> Result<RunSpec> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config {
            section: "cli".into(),
            message: "this command needs --config".into(),
        })?;
    let run = read_config(path)?;
    Ok(match cli.seed {
        Some(seed) => run.with_seed(seed),
        None => run,
    })
}

fn out_dir(cli: &Cli) -> Result<&Path> {
    fs::create_dir_all(&cli.out).map_err(|e| Error::Io {
        path: cli.out.display().to_string(),
        source: e,
    })?;
    Ok(&cli.out)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn provenance(run: &RunSpec) -> Provenance {
    Provenance {
        seed: run.seed(),
        config_hash: run.hash(),
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::OracleEr { n, p } => {
            let exact_p = BigRational::from_float(*p)
                .ok_or_else(|| Error::Domain(format!("edge probability must be finite, got {p}")))?;
            let value = er_connectivity_exact(*n, &exact_p)?;
            let approx = lcrg::experiments::er_connectivity_oracle(*n, *p)?;
            println!("n = {n}, p = {p}: P(connected) = {approx} = {value}");
            Ok(())
        }
        Command::Sample { count } => {
            let run = load(cli)?;
            let sampler = Sampler::new(run.spec()?, &run.sampler)?;
            let draws = sampler.draws(lcrg::rng::ReplicateStream::new(derive_seed(run.seed(), "sample"), 0), *count)?;
            let mut text = String::new();
            let _ = writeln!(text, "# seed = {}\n# config_sha256 = {}", run.seed(), run.hash());
            let _ = writeln!(text, "# n = {}, d = {}, edges in row-major (i < j) order", run.n, sampler.spec().dim());
            for x in &draws {
                let line: Vec<String> = x.values().iter().map(|v| v.to_string()).collect();
                text.push_str(&line.join(" "));
                text.push('\n');
            }
            let path = out_dir(cli)?.join("samples.dat");
            write(&path, &text)?;
            println!("wrote {count} draws to {}", path.display());
            Ok(())
        }
        Command::Moments { reps } => {
            let run = load(cli)?;
            let sampler = Sampler::new(run.spec()?, &run.sampler)?;
            let m = estimate_moments(&sampler, *reps, run.seed())?;
            println!("draws = {}", m.reps);
            println!("sigma_min = {} (edge {})", fmt_g(m.sigma_min()), m.sigma_min_sq.1);
            println!("sigma_max = {} (edge {})", fmt_g(m.sigma_max()), m.sigma_max_sq.1);
            println!("sigma_rms = {}", fmt_g(m.sigma_rms()));
            for (e, est) in m.per_edge_second_moment.iter().enumerate() {
                println!("E X_{e}^2 = {} +- {}", fmt_g(est.value), fmt_g(est.se));
            }
            Ok(())
        }
        Command::NcTest { i, j, s, t, reps } => {
            let run = load(cli)?;
            let sampler = Sampler::new(run.spec()?, &run.sampler)?;
            let q = NcQuery {
                i: i.clone(),
                j: j.clone(),
                s: s.clone(),
                t: t.clone(),
            };
            let r = nc_test(&sampler, &q, *reps, run.seed())?;
            println!(
                "joint = {} [{}, {}], product = {} [{}, {}], z = {}",
                fmt_g(r.joint_estimate),
                fmt_g(r.joint_ci.0),
                fmt_g(r.joint_ci.1),
                fmt_g(r.product_estimate),
                fmt_g(r.product_ci.0),
                fmt_g(r.product_ci.1),
                fmt_g(r.z_score())
            );
            match r.verdict {
                NcVerdict::Consistent => {
                    println!("consistent with negative correlation");
                    Ok(())
                }
                NcVerdict::ViolationAt3Sigma => Err(Error::Validation(
                    "joint probability exceeds the product by more than 3 standard errors".into(),
                )),
            }
        }
        Command::ValidateSampler { draws, alpha } => {
            let run = load(cli)?;
            let sampler = Sampler::new(run.spec()?, &run.sampler)?;
            let report = validate_sampler(&sampler, *draws, run.seed(), *alpha)?;
            for line in &report.lines {
                let label = line.coordinate.map_or_else(|| "gauge".to_string(), |e| format!("x_{e}"));
                let flag = if line.distance < report.critical { "ok" } else { "FAIL" };
                println!("{label}: D = {} ({flag})", fmt_g(line.distance));
            }
            println!("critical value at alpha = {}: {}", alpha, fmt_g(report.critical));
            if report.passed() {
                Ok(())
            } else {
                Err(Error::Validation("sampler differs from the exact reference".into()))
            }
        }
        Command::ScanConnectivity { validation_draws } => scan(cli, ScanMode::Connectivity, *validation_draws),
        Command::ScanGiant { validation_draws } => scan(cli, ScanMode::Giant, *validation_draws),
    }
}

fn scan(cli: &Cli, mode: ScanMode, validation_draws: usize) -> Result<()> {
    let run = load(cli)?;
    let cfg = run.scan.clone().ok_or_else(|| Error::Config {
        section: "scan".into(),
        message: "this command needs a [scan] section".into(),
    })?;
    if cfg.mode != mode {
        return Err(Error::Config {
            section: "scan".into(),
            message: format!("mode is `{}` but the command runs a {} scan", cfg.mode.name(), mode.name()),
        });
    }
    let dir = out_dir(cli)?;
    let smallest = *cfg.n_list.iter().min().expect("validated nonempty");
    let sampler = Sampler::new(cfg.model.build(smallest)?, &cfg.sampler)?;
    if !sampler.is_exact() {
        match validate_sampler(&sampler, validation_draws, run.seed(), 0.01) {
            Ok(r) if r.passed() => println!("hit-and-run schedule validated at n = {smallest}"),
            Ok(r) if cli.force => println!("warning: validation failed (D = {}), continuing", fmt_g(r.worst().distance)),
            Ok(r) => {
                return Err(Error::Validation(format!(
                    "hit-and-run schedule fails the KS check at n = {smallest} (D = {}, critical {}); rerun with --force to scan anyway",
                    fmt_g(r.worst().distance),
                    fmt_g(r.critical)
                )))
            }
            Err(e) if cli.force => println!("warning: {e}; continuing"),
            Err(e) => return Err(e),
        }
    }
    let mut result = match mode {
        ScanMode::Connectivity => connectivity_scan(&cfg)?,
        ScanMode::Giant => giant_scan(&cfg)?,
    };
    if mode == ScanMode::Connectivity {
        result
            .crossings
            .extend(threshold_locator(&result, Metric::HasIsolated, cfg.target)?);
    } else {
        result.crossings = threshold_locator(&result, Metric::Giant, cfg.target)?;
    }
    let prov = provenance(&run);
    let stem = format!("scan_{}", mode.name());
    emit_csv(&result, &dir.join(format!("{stem}.csv")))?;
    emit_plotdata(&result, &dir.join(format!("{stem}_plot")), default_metrics(mode), &prov)?;
    emit_manifest(&result, &dir.join(format!("{stem}.manifest")), &prov, &run.to_normalized())?;
    for c in &result.crossings {
        let show = |v: Option<f64>| v.map_or_else(|| "censored".to_string(), fmt_g);
        println!(
            "n = {}: {} crosses {} at p = {} (normalized {})",
            c.n,
            c.metric.name(),
            fmt_g(c.target),
            show(c.p_star),
            show(c.normalized)
        );
    }
    println!("wrote {} rows to {}", result.rows.len(), dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.workers {
        Some(w) => with_workers(w, || run(&cli)).and_then(|r| r),
        None => run(&cli),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
