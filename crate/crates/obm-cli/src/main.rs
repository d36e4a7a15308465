//! `obm` — generators, online-matching simulations, exact oracles, and
//! competitive-ratio tables for degree-bounded online bipartite matching.

use obm_cli::{csvio, tables};

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use obm::analysis::{bounds_row, kd_ocs_lb, kd_ranking_ub};
use obm::candidate::{
    geometric_candidate, ghhnyz_candidate, optimal_candidate, semi_ocs_candidate, verify_candidate,
    CandidateFunction, GBoundSeries, VerifyMode,
};
use obm::exact::{markov_expected_matched, ocs_exact, ranking_exact, EnumBudget, ThetaVector};
use obm::generators;
use obm::instance::{offline_optimum, Instance};
use obm::sim::{compare, run_trials, AlgoSpec, SIM_CSV_HEADER};

#[derive(Parser)]
#[command(name = "obm", version, about = "Online bipartite matching on degree-bounded graphs")]
struct Cli {
    /// Master seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the command's CSV output to this file.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Opt into the heavy computations (12! enumeration, d in {4000, 8000}).
    #[arg(long, global = true)]
    heavy: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    General,
    #[value(name = "small-d")]
    SmallD,
    Kd,
    #[value(name = "two-phase")]
    TwoPhase,
    Cycle,
    Toy,
}

#[derive(Clone, Copy, ValueEnum)]
enum CandidateKind {
    Optimal,
    Geometric,
    Ghhnyz,
    Semi2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fast,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Ranking,
    Ocs,
    Random,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Ranking,
    Ocs,
    Markov,
    Smalld,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        #[arg(long)]
        family: Family,
        /// Request-degree parameter (all families except toy).
        #[arg(long)]
        d: Option<usize>,
        /// Server-degree parameter (kd family).
        #[arg(long)]
        k: Option<usize>,
        /// Cycle length (cycle family).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate a candidate function as `l,f(l)` rows.
    Candidate {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = CandidateKind::Optimal)]
        function: CandidateKind,
    },
    /// Tabulate the certified lower-bound series as `l,g(l),certified`.
    Gbound {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        levels: usize,
    },
    /// Check the feasibility constraints of a tabulated candidate file.
    Verify {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        lmax: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Fast)]
        mode: ModeArg,
    },
    /// Emit the competitive-ratio comparison table.
    Bounds {
        #[arg(long)]
        d_min: usize,
        #[arg(long)]
        d_max: usize,
        /// Extra (k,d) cells as `k1:d1,k2:d2,...`.
        #[arg(long)]
        kd: Option<String>,
    },
    /// Monte-Carlo estimate of one algorithm on an instance file.
    Simulate {
        #[arg(long, value_enum)]
        algo: AlgoArg,
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_enum)]
        candidate: Option<CandidateKind>,
        #[arg(long)]
        trials: u64,
    },
    /// Run several algorithms on common random numbers.
    Compare {
        #[arg(long, value_delimiter = ',')]
        algos: Vec<AlgoArg>,
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_enum)]
        candidate: Option<CandidateKind>,
        #[arg(long)]
        trials: u64,
    },
    /// Exact expectations: permutation enumeration, subset DP, chain DP.
    Exact {
        #[arg(long, value_enum)]
        oracle: OracleArg,
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, value_enum)]
        candidate: Option<CandidateKind>,
        /// Sorted ranks `t1,t2,...` for the markov oracle.
        #[arg(long)]
        theta: Option<String>,
    },
    /// Recompute every published table and diff each cell.
    Tables,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: failed to configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn build_candidate(kind: CandidateKind, inst: &Instance) -> Result<CandidateFunction, obm::Error> {
    let max_deg = inst.max_server_degree();
    match kind {
        CandidateKind::Optimal => optimal_candidate(inst.d.max(2), max_deg.max(1)),
        CandidateKind::Geometric => geometric_candidate(inst.d.max(2), max_deg.max(1)),
        CandidateKind::Ghhnyz => ghhnyz_candidate(inst.d.max(2), max_deg.max(1)),
        CandidateKind::Semi2 => semi_ocs_candidate(max_deg.saturating_sub(1).max(1)),
    }
}

fn candidate_name(kind: CandidateKind) -> &'static str {
    match kind {
        CandidateKind::Optimal => "optimal",
        CandidateKind::Geometric => "geometric",
        CandidateKind::Ghhnyz => "ghhnyz",
        CandidateKind::Semi2 => "semi2",
    }
}

fn algo_spec(algo: AlgoArg, kind: Option<CandidateKind>, inst: &Instance) -> Result<AlgoSpec, obm::Error> {
    Ok(match algo {
        AlgoArg::Ranking => AlgoSpec::Ranking,
        AlgoArg::Random => AlgoSpec::Random,
        AlgoArg::Greedy => AlgoSpec::Greedy,
        AlgoArg::Ocs => {
            let kind = kind.unwrap_or(CandidateKind::Optimal);
            AlgoSpec::Ocs {
                label: candidate_name(kind).into(),
                f: build_candidate(kind, inst)?,
            }
        }
    })
}

fn candidate_rows(f: &CandidateFunction) -> Vec<String> {
    (0..=f.levels())
        .map(|l| {
            if f.is_infinite_level(l) {
                format!("{l},inf")
            } else {
                format!("{l},{}", f.value(l))
            }
        })
        .collect()
}

fn gbound_rows(g: &GBoundSeries) -> Vec<String> {
    g.values
        .iter()
        .enumerate()
        .map(|(l, v)| format!("{l},{v},{}", g.certified))
        .collect()
}

fn emit(header: &str, rows: &[String], csv: &Option<PathBuf>) -> Result<(), obm::Error> {
    println!("{header}");
    for row in rows {
        println!("{row}");
    }
    if let Some(path) = csv {
        csvio::write_csv(path, header, rows)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match &cli.command {
        Command::Gen { family, d, k, n, out } => {
            let need = |opt: &Option<usize>, name: &str| -> Result<usize, obm::Error> {
                opt.ok_or_else(|| obm::Error::InvalidParam(format!("--{name} is required for this family")))
            };
            let inst = match family {
                Family::General => generators::gen_general_ranking_hard(need(d, "d")?)?,
                Family::SmallD => generators::gen_small_d_ranking_hard(need(d, "d")?)?,
                Family::Kd => generators::gen_kd_ranking_hard(need(k, "k")?, need(d, "d")?)?,
                Family::TwoPhase => generators::gen_two_phase_adversary(need(d, "d")?, cli.seed)?,
                Family::Cycle => generators::gen_cycle(need(n, "n")?)?,
                Family::Toy => generators::gen_toy(),
            };
            inst.save(out)?;
            println!(
                "wrote {} ({} servers, {} requests, k={}, d={})",
                out.display(),
                inst.server_count,
                inst.request_count(),
                inst.k,
                inst.d
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Candidate { d, levels, function } => {
            let f = match function {
                CandidateKind::Optimal => optimal_candidate(*d, *levels)?,
                CandidateKind::Geometric => geometric_candidate(*d, *levels)?,
                CandidateKind::Ghhnyz => ghhnyz_candidate(*d, *levels)?,
                CandidateKind::Semi2 => semi_ocs_candidate(*levels)?,
            };
            emit("l,f(l)", &candidate_rows(&f), &cli.csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gbound { d, levels } => {
            let g = obm::candidate::g_bound(*d, *levels)?;
            emit("l,g(l),certified", &gbound_rows(&g), &cli.csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { d, file, lmax, mode } => {
            let text = std::fs::read_to_string(file)?;
            let rows = csvio::parse_candidate_csv(&text).map_err(obm::Error::InvalidParam)?;
            let mut values = vec![f64::NAN; rows.len()];
            for (l, v) in &rows {
                if *l >= values.len() || !v.is_finite() {
                    return Err(obm::Error::InvalidParam(format!(
                        "level {l} out of order or non-finite; verification needs finite values 0..{}",
                        values.len() - 1
                    ))
                    .into());
                }
                values[*l] = *v;
            }
            let f = CandidateFunction::new(*d, values, false)?;
            let mode = match mode {
                ModeArg::Fast => VerifyMode::Fast,
                ModeArg::Exhaustive => VerifyMode::Exhaustive,
            };
            let violations = verify_candidate(&f, *lmax, mode)?;
            if violations.is_empty() {
                println!("feasible: no violated constraints up to l_max = {lmax}");
                Ok(ExitCode::SUCCESS)
            } else {
                for v in &violations {
                    println!(
                        "violated: m={} sequence={:?} lhs={} rhs={}",
                        v.m, v.sequence, v.lhs, v.rhs
                    );
                }
                println!("{} violated constraints", violations.len());
                Ok(ExitCode::from(1))
            }
        }
        Command::Bounds { d_min, d_max, kd } => {
            let header = "d,OCS,RANKING,DETERMINISTIC,SODA,UB";
            let mut rows = Vec::new();
            for d in *d_min..=*d_max {
                let row = bounds_row(d)?;
                rows.push(format!(
                    "{},{},{},{},{},{}",
                    row.d, row.ocs_lb, row.ranking_ub, row.high_degree, row.marking_cw18, row.general_ub
                ));
            }
            emit(header, &rows, &cli.csv)?;
            if let Some(kd) = kd {
                println!("k,d,ocs_lb,ranking_ub");
                for cell in kd.split(',') {
                    let (k, d) = cell
                        .split_once(':')
                        .ok_or_else(|| obm::Error::InvalidParam(format!("bad --kd cell {cell:?}, want k:d")))?;
                    let (k, d): (usize, usize) = (k.trim().parse()?, d.trim().parse()?);
                    println!("{k},{d},{},{}", kd_ocs_lb(k, d)?, kd_ranking_ub(k, d));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { algo, file, candidate, trials } => {
            let inst = Instance::load(file)?;
            let spec = algo_spec(*algo, *candidate, &inst)?;
            let report = run_trials(&inst, &spec, *trials, cli.seed)?;
            println!("trials,mean_matched,opt,ratio,stderr");
            println!(
                "{},{},{},{},{}",
                report.trials, report.mean_matched, report.opt, report.ratio, report.stderr
            );
            if let Some(path) = &cli.csv {
                csvio::write_csv(path, SIM_CSV_HEADER, &[report.csv_row()])?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { algos, file, candidate, trials } => {
            let inst = Instance::load(file)?;
            let specs: Vec<AlgoSpec> = algos
                .iter()
                .map(|a| algo_spec(*a, *candidate, &inst))
                .collect::<Result<_, _>>()?;
            let reports = compare(&inst, &specs, *trials, cli.seed)?;
            let rows: Vec<String> = reports.iter().map(|r| r.csv_row()).collect();
            emit(SIM_CSV_HEADER, &rows, &cli.csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Exact { oracle, file, d, candidate, theta } => {
            match oracle {
                OracleArg::Ranking => {
                    let path = file.as_ref().ok_or_else(|| {
                        obm::Error::InvalidParam("--file is required for the ranking oracle".into())
                    })?;
                    let inst = Instance::load(path)?;
                    let e = ranking_exact(&inst, &EnumBudget::default())?;
                    let opt = offline_optimum(&inst);
                    match e.rational {
                        Some(q) => println!("expected_matched = {q} = {}", e.expected),
                        None => println!("expected_matched = {}", e.expected),
                    }
                    println!("opt = {opt}");
                    println!("ratio = {}", e.expected / opt as f64);
                }
                OracleArg::Ocs => {
                    let path = file.as_ref().ok_or_else(|| {
                        obm::Error::InvalidParam("--file is required for the ocs oracle".into())
                    })?;
                    let inst = Instance::load(path)?;
                    let kind = candidate.unwrap_or(CandidateKind::Optimal);
                    let f = build_candidate(kind, &inst)?;
                    let report = ocs_exact(&inst, &f)?;
                    let opt = offline_optimum(&inst);
                    println!("expected_matched = {}", report.expected_matched);
                    println!("opt = {opt}");
                    println!("ratio = {}", report.expected_matched / opt as f64);
                }
                OracleArg::Markov => {
                    let theta = theta.as_ref().ok_or_else(|| {
                        obm::Error::InvalidParam("--theta is required for the markov oracle".into())
                    })?;
                    let values: Vec<f64> = theta
                        .split(',')
                        .map(|t| t.trim().parse::<f64>())
                        .collect::<Result<_, _>>()?;
                    let theta = ThetaVector::new(values)?;
                    println!("d = {}", theta.d());
                    println!("expected_matched = {}", markov_expected_matched(&theta));
                }
                OracleArg::Smalld => {
                    let d = d.ok_or_else(|| {
                        obm::Error::InvalidParam("--d is required for the smalld oracle".into())
                    })?;
                    let r = obm::exact::ranking_exact_smalld(d, cli.heavy)?;
                    for (t, p) in r.p_unmatched.iter().enumerate() {
                        match p.rational {
                            Some(q) => println!("p_unmatched[{t}] = {q} = {}", p.expected),
                            None => println!("p_unmatched[{t}] = {}", p.expected),
                        }
                    }
                    match r.ratio.rational {
                        Some(q) => println!("ratio = {q} = {}", r.ratio.expected),
                        None => println!("ratio = {}", r.ratio.expected),
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Tables => {
            let failures = tables::run_tables(cli.heavy)?;
            if failures.is_empty() {
                println!("\ntables: all cells match");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("\ntables: {} mismatched cells", failures.len());
                for c in &failures {
                    println!(
                        "MISMATCH {} {}: computed {} displayed {} expected {} (tol {})",
                        c.table, c.label, c.computed, c.displayed, c.expected, c.tol
                    );
                }
                Ok(ExitCode::from(1))
            }
        }
    }
}
