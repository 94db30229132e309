use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use delaymca::config::{brownian_config, load_config, ProblemConfig};
use delaymca::error::{EXIT_CHECK_FAILED, EXIT_INFEASIBLE};
use delaymca::report::{emit_reports, fmt_real, Reports};
use delaymca::{
    policy_rows, run_brownian_benchmark, run_check, run_pathological_demo, run_simulate, run_study,
    DemoConfig, HarnessError,
};
use delaymca_core::solver::solve_dp;

/// Markov chain approximation for optimal control of delayed diffusions.
#[derive(Parser)]
#[command(name = "delaymca", version)]
struct Cli {
    /// Seed for every random stream; overrides the config.
    #[arg(long, global = true, env = "DELAYMCA_SEED")]
    seed: Option<u64>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a config, sample kernel feasibility and spot-check assumptions.
    Check { config: PathBuf },
    /// Solve the discrete problem and write the value table and policy.
    Solve {
        config: PathBuf,
        /// Degree to solve (default: every configured degree; the policy of the last is written).
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate chains: moment, quadratic-variation and policy diagnostics.
    Simulate {
        config: PathBuf,
        /// Degree to simulate (default: the largest configured).
        #[arg(long)]
        degree: Option<usize>,
        /// Paths (default: from the config).
        #[arg(long)]
        paths: Option<usize>,
        /// Label of the fixed control used for the noise diagnostics (default: the first).
        #[arg(long)]
        control: Option<String>,
        /// Also solve the DP and evaluate the optimal policy by Monte Carlo.
        #[arg(long)]
        policy: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every configured degree and report successive differences.
    Study {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Driftless exit-time benchmark against the random-walk oracle.
    BenchBrownian {
        /// Driftless config (default: the standard benchmark).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Degrees, overriding the config.
        #[arg(long, value_delimiter = ',')]
        degrees: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid dependence of the pathological diffusion.
    DemoPathological {
        #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
        jump: f64,
        #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
        at: f64,
        /// The two degrees compared.
        #[arg(long, value_delimiter = ',', num_args = 1, default_value = "2,3")]
        degrees: Vec<usize>,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ProblemConfig, HarnessError> {
    let mut c = load_config(path)?;
    if let Some(s) = seed {
        c.seed = s;
    }
    for w in c.feasibility_warnings() {
        eprintln!("warning: {w}");
    }
    Ok(c)
}

fn write(reports: &Reports, dir: &Path) -> Result<(), HarnessError> {
    for p in emit_reports(reports, dir)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, HarnessError> {
    let seed = cli.seed;
    match cli.command {
        Command::Check { config } => {
            let c = load(&config, seed)?;
            let r = run_check(&c, c.seed)?;
            for (m, k) in &r.kernels {
                println!(
                    "degree {m}: h = {} h* = {} min stay margin {} min branch margin {} -> {}",
                    k.step,
                    k.h_star,
                    k.min_stay_margin,
                    k.min_branch_margin,
                    if k.sampled_feasible() {
                        "feasible"
                    } else {
                        "INFEASIBLE"
                    }
                );
            }
            let a = &r.assumptions;
            println!(
                "assumptions over {} samples: sup|b| {} sup|sigma| {} inf sigma {} Lipschitz quotient {}",
                a.samples, a.max_abs_drift, a.max_abs_diffusion, a.min_diffusion, a.max_lipschitz_quotient
            );
            for v in &a.violations {
                println!("violation: {v:?}");
            }
            if !r.kernels_feasible() {
                return Ok(EXIT_INFEASIBLE as u8);
            }
            Ok(if a.passed() {
                0
            } else {
                EXIT_CHECK_FAILED as u8
            })
        }
        Command::Solve {
            config,
            degree,
            out,
        } => {
            let c = load(&config, seed)?;
            let degrees = degree.map(|m| vec![m]).unwrap_or_else(|| c.degrees.clone());
            let mut reports = Reports::default();
            for m in degrees {
                let p = c.problem(m)?;
                let (r, table) = solve_dp(&p)?;
                println!(
                    "degree {m}: V = {} states {} transitions {} depth {} time {:?}",
                    fmt_real(r.value),
                    r.layer_counts.iter().sum::<usize>(),
                    r.expanded_transitions,
                    r.depth,
                    r.wall_time.unwrap_or_default()
                );
                reports.policy = policy_rows(&p, &table);
            }
            write(&reports, &out.unwrap_or(c.output_dir))?;
            Ok(0)
        }
        Command::Simulate {
            config,
            degree,
            paths,
            control,
            policy,
            out,
        } => {
            let c = load(&config, seed)?;
            let m = degree.unwrap_or_else(|| *c.degrees.iter().max().expect("validated non-empty"));
            let label = control.unwrap_or_else(|| c.controls[0].label.clone());
            let r = run_simulate(&c, m, &label, paths.unwrap_or(c.paths), c.seed, policy)?;
            let w = r.terminal_noise;
            println!(
                "W(N): mean {} stderr {} over {} paths",
                w.mean, w.stderr, w.count
            );
            println!("worst |<W>_n - nh| / bound: {}", r.worst_qv_ratio);
            if let Some((value, e)) = r.policy {
                println!(
                    "V^M = {} Monte Carlo {} +- {}",
                    fmt_real(value),
                    e.mean,
                    e.stderr
                );
            }
            let reports = Reports {
                consistency: r.consistency,
                qv: r.qv,
                ..Reports::default()
            };
            write(&reports, &out.unwrap_or(c.output_dir))?;
            Ok(0)
        }
        Command::Study { config, out } => {
            let c = load(&config, seed)?;
            let r = run_study(&c)?;
            for (row, t) in r.rows.iter().zip(&r.wall_times) {
                match (row.value, &row.error) {
                    (Some(v), _) => println!(
                        "degree {}: V = {} diff {} states {} time {:?}",
                        row.degree,
                        fmt_real(v),
                        row.abs_diff.map(fmt_real).unwrap_or_else(|| "-".into()),
                        row.states.unwrap_or(0),
                        t.unwrap_or_default()
                    ),
                    (None, Some(e)) => println!("degree {}: failed: {e}", row.degree),
                    (None, None) => unreachable!("row without value or error"),
                }
            }
            let converging = r.final_not_above_first();
            println!(
                "final difference <= first: {converging}; nonincreasing: {}",
                r.nonincreasing()
            );
            write(
                &Reports {
                    study: r.rows,
                    ..Reports::default()
                },
                &out.unwrap_or(c.output_dir),
            )?;
            Ok(if converging {
                0
            } else {
                EXIT_CHECK_FAILED as u8
            })
        }
        Command::BenchBrownian {
            config,
            degrees,
            out,
        } => {
            let mut c = match config {
                Some(path) => load(&path, seed)?,
                None => brownian_config(&[4, 9, 16, 25, 36]),
            };
            if !degrees.is_empty() {
                c.degrees = degrees;
            }
            let r = run_brownian_benchmark(&c)?;
            for row in &r.rows {
                println!(
                    "degree {}: V = {} walk oracle {} continuous {} error {}",
                    row.degree,
                    fmt_real(row.value),
                    fmt_real(row.walk_oracle),
                    fmt_real(row.continuous),
                    fmt_real(row.continuous_error)
                );
            }
            write(
                &Reports {
                    benchmark: r.rows,
                    ..Reports::default()
                },
                &out.unwrap_or(c.output_dir),
            )?;
            Ok(0)
        }
        Command::DemoPathological { jump, at, degrees } => {
            let &[m1, m2] = degrees.as_slice() else {
                return Err(HarnessError::InvalidParams(
                    "--degrees takes exactly two values".into(),
                ));
            };
            let d = DemoConfig {
                jump_size: jump,
                jump_time: at,
                degrees: (m1, m2),
                ..DemoConfig::default()
            };
            let r = run_pathological_demo(&d)?;
            println!("sigma at degree {m1}: {}", r.sigma.0);
            println!("sigma at degree {m2}: {}", r.sigma.1);
            println!(
                "difference {} (threshold {}): {}",
                r.difference,
                r.threshold,
                r.separated()
            );
            for f in &r.families {
                println!(
                    "{}: errors {:?} at degrees {:?}",
                    f.name, f.errors, d.lipschitz_degrees
                );
            }
            println!(
                "Lipschitz families decreasing: {}",
                r.lipschitz_decreasing()
            );
            Ok(if r.separated() && r.lipschitz_decreasing() {
                0
            } else {
                EXIT_CHECK_FAILED as u8
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
