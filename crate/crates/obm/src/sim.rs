//! Monte-Carlo harness with reproducible seeding.
//!
//! Trials are independent and parallelize; trial `i` draws its randomness
//! from a ChaCha stream selected by `i` under the master seed, so reports
//! are bit-identical across runs and thread counts, and different
//! algorithms can be coupled on common random numbers by reusing the same
//! per-trial streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::candidate::CandidateFunction;
use crate::engines::{run_greedy, run_ocs, run_random, run_ranking, RankAssignment};
use crate::instance::{offline_optimum, Instance};
use crate::{Error, Result};

/// Which engine to run, with the candidate function for OCS.
#[derive(Debug, Clone)]
pub enum AlgoSpec {
    Ranking,
    Ocs { label: String, f: CandidateFunction },
    Random,
    Greedy,
}

impl AlgoSpec {
    pub fn id(&self) -> String {
        match self {
            AlgoSpec::Ranking => "ranking".into(),
            AlgoSpec::Ocs { label, .. } => format!("ocs:{label}"),
            AlgoSpec::Random => "random".into(),
            AlgoSpec::Greedy => "greedy".into(),
        }
    }
}

/// Aggregated result of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub algo: String,
    pub instance: String,
    pub trials: u64,
    pub mean_matched: f64,
    pub stderr: f64,
    pub opt: usize,
    pub ratio: f64,
    pub ratio_ci95: (f64, f64),
    pub master_seed: u64,
}

/// Exact CSV column set of the harness.
pub const SIM_CSV_HEADER: &str = "algo,instance,trials,seed,mean,stderr,opt,ratio,ci_low,ci_high";

impl SimReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.algo,
            self.instance,
            self.trials,
            self.master_seed,
            self.mean_matched,
            self.stderr,
            self.opt,
            self.ratio,
            self.ratio_ci95.0,
            self.ratio_ci95.1
        )
    }

    /// One-sided Hoeffding half-width on the ratio at confidence
    /// `1 - delta`; matched counts lie in `[0, opt]`.
    pub fn hoeffding_halfwidth(&self, delta: f64) -> f64 {
        ((1.0 / delta).ln() / (2.0 * self.trials as f64)).sqrt()
    }
}

/// The RNG for one trial: stream `trial` of the master seed.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

fn run_once(inst: &Instance, spec: &AlgoSpec, rng: &mut ChaCha8Rng) -> usize {
    match spec {
        AlgoSpec::Ranking => {
            let ranks = RankAssignment::random(inst.server_count, rng);
            run_ranking(inst, &ranks).expect("validated upfront").matched_count
        }
        AlgoSpec::Ocs { f, .. } => run_ocs(inst, f, rng).expect("validated upfront").matched_count,
        AlgoSpec::Random => run_random(inst, rng).matched_count,
        AlgoSpec::Greedy => run_greedy(inst, rng).matched_count,
    }
}

fn check_spec(inst: &Instance, spec: &AlgoSpec) -> Result<()> {
    if let AlgoSpec::Ocs { f, .. } = spec {
        let needed = inst.max_server_degree().saturating_sub(1);
        if f.levels() < needed {
            return Err(Error::TabulationTooShort { needed, have: f.levels() });
        }
    }
    Ok(())
}

/// Runs `trials` independent trials and aggregates mean, standard error,
/// and the normal-approximation 95% interval on the ratio.
///
/// Sums are integer accumulations, so the report does not depend on the
/// parallel schedule.
pub fn run_trials(
    inst: &Instance,
    spec: &AlgoSpec,
    trials: u64,
    master_seed: u64,
) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::InvalidParam("trials must be >= 1".into()));
    }
    check_spec(inst, spec)?;
    let opt = offline_optimum(inst);
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t);
            let matched = run_once(inst, spec, &mut rng) as u64;
            (matched, matched * matched)
        })
        .reduce(|| (0u64, 0u64), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let mean = sum as f64 / n;
    let stderr = if trials > 1 {
        let var = (sum_sq as f64 - n * mean * mean) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    } else {
        0.0
    };
    let ratio = mean / opt as f64;
    let half = 1.96 * stderr / opt as f64;
    Ok(SimReport {
        algo: spec.id(),
        instance: inst.label.clone(),
        trials,
        mean_matched: mean,
        stderr,
        opt,
        ratio,
        ratio_ci95: (ratio - half, ratio + half),
        master_seed,
    })
}

/// Runs several algorithms on common random numbers: every algorithm sees
/// the same per-trial seed stream, which cancels shared noise in paired
/// comparisons.
pub fn compare(
    inst: &Instance,
    specs: &[AlgoSpec],
    trials: u64,
    master_seed: u64,
) -> Result<Vec<SimReport>> {
    if specs.len() < 2 {
        return Err(Error::InvalidParam("compare needs at least 2 algorithms".into()));
    }
    specs
        .iter()
        .map(|spec| run_trials(inst, spec, trials, master_seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidate::optimal_candidate;
    use crate::generators;

    #[test]
    fn reports_are_bit_identical() {
        let inst = generators::gen_general_ranking_hard(3).unwrap();
        let a = run_trials(&inst, &AlgoSpec::Ranking, 20_000, 42).unwrap();
        let b = run_trials(&inst, &AlgoSpec::Ranking, 20_000, 42).unwrap();
        assert_eq!(a, b);
        let c = run_trials(&inst, &AlgoSpec::Ranking, 20_000, 43).unwrap();
        assert_ne!(a.mean_matched, c.mean_matched);
    }

    #[test]
    fn single_trial_degenerates() {
        let inst = generators::gen_toy();
        let r = run_trials(&inst, &AlgoSpec::Greedy, 1, 7).unwrap();
        assert_eq!(r.stderr, 0.0);
        assert_eq!(r.ratio_ci95, (r.ratio, r.ratio));
        assert!(run_trials(&inst, &AlgoSpec::Greedy, 0, 7).is_err());
    }

    #[test]
    fn ci_brackets_ratio() {
        let inst = generators::gen_cycle(20).unwrap();
        let r = run_trials(&inst, &AlgoSpec::Random, 10_000, 9).unwrap();
        assert!(r.ratio_ci95.0 <= r.ratio && r.ratio <= r.ratio_ci95.1);
        assert!(r.stderr > 0.0);
        assert!(r.hoeffding_halfwidth(1e-6) > 0.0);
    }

    #[test]
    fn compare_shares_randomness() {
        let inst = generators::gen_small_d_ranking_hard(2).unwrap();
        let specs = vec![AlgoSpec::Ranking, AlgoSpec::Ranking];
        let reports = compare(&inst, &specs, 5_000, 11).unwrap();
        assert_eq!(reports[0].mean_matched, reports[1].mean_matched);
        assert!(compare(&inst, &specs[..1], 10, 1).is_err());
    }

    #[test]
    fn greedy_beats_random_on_the_cycle() {
        let inst = generators::gen_cycle(200).unwrap();
        let specs = vec![AlgoSpec::Greedy, AlgoSpec::Random];
        let reports = compare(&inst, &specs, 20_000, 5).unwrap();
        let slack = 4.0 * (reports[0].stderr + reports[1].stderr) / reports[0].opt as f64;
        assert!(reports[0].ratio > reports[1].ratio - slack);
    }

    #[test]
    fn ocs_beats_ranking_on_the_layered_instance() {
        let inst = generators::gen_small_d_ranking_hard(3).unwrap();
        let f = optimal_candidate(3, inst.max_server_degree()).unwrap();
        let specs = vec![
            AlgoSpec::Ocs { label: "optimal".into(), f },
            AlgoSpec::Ranking,
        ];
        let reports = compare(&inst, &specs, 100_000, 17).unwrap();
        assert!(
            reports[0].ratio - reports[1].ratio >= 0.005,
            "gap = {}",
            reports[0].ratio - reports[1].ratio
        );
    }

    #[test]
    fn csv_row_shape() {
        let inst = generators::gen_toy();
        let r = run_trials(&inst, &AlgoSpec::Greedy, 10, 3).unwrap();
        let row = r.csv_row();
        assert_eq!(row.split(',').count(), SIM_CSV_HEADER.split(',').count());
        assert!(row.starts_with("greedy,toy,10,3,"));
    }
}
