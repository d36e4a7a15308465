//! Online algorithm implementations.
//!
//! Every engine is deterministic given the instance and an explicit source
//! of randomness: a rank permutation for RANKING, one RNG draw per
//! non-trivial round for the sampling engines. That makes traces replayable
//! and lets the Monte-Carlo harness couple algorithms on shared seeds.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::candidate::CandidateFunction;
use crate::instance::{Instance, MatchingOutcome};
use crate::{Error, Result};

/// Server ranks as a permutation: earlier position = smaller rank.
///
/// RANKING's behavior depends only on the relative order of the uniform
/// ranks and ties have probability zero, so a permutation captures the
/// whole distribution while keeping enumeration exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankAssignment {
    order: Vec<usize>,
}

impl RankAssignment {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &s in &order {
            if s >= n || seen[s] {
                return Err(Error::InvalidParam("rank order is not a permutation".into()));
            }
            seen[s] = true;
        }
        Ok(RankAssignment { order })
    }

    pub fn identity(n: usize) -> Self {
        RankAssignment { order: (0..n).collect() }
    }

    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        RankAssignment { order }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `positions[s]` = rank position of server `s` (smaller = better).
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0usize; self.order.len()];
        for (p, &s) in self.order.iter().enumerate() {
            pos[s] = p;
        }
        pos
    }
}

/// RANKING: each request matches its unmatched neighbor of smallest rank.
pub fn run_ranking(inst: &Instance, ranks: &RankAssignment) -> Result<MatchingOutcome> {
    if ranks.order.len() != inst.server_count {
        return Err(Error::PermutationMismatch {
            expected: inst.server_count,
            got: ranks.order.len(),
        });
    }
    let pos = ranks.positions();
    let mut matched = vec![false; inst.server_count];
    let assignment = inst
        .requests
        .iter()
        .map(|nbrs| {
            let pick = nbrs
                .iter()
                .copied()
                .filter(|&s| !matched[s])
                .min_by_key(|&s| pos[s]);
            if let Some(s) = pick {
                matched[s] = true;
            }
            pick
        })
        .collect();
    Ok(MatchingOutcome::from_assignment(inst.server_count, assignment))
}

/// One round of an OCS trace.
#[derive(Debug, Clone, PartialEq)]
pub struct OcsRound {
    /// Unmatched neighbors of the request, ascending.
    pub available: Vec<usize>,
    /// Weights `f(l_s)` aligned with `available`; infinite levels show as
    /// `f64::INFINITY`.
    pub weights: Vec<f64>,
    pub choice: Option<usize>,
    /// Per-server degree counters at the end of the round.
    pub degrees: Vec<usize>,
    /// Per-server unmatched flags at the end of the round.
    pub unmatched: Vec<bool>,
}

/// Full trace of one OCS run.
#[derive(Debug, Clone, PartialEq)]
pub struct OcsTrace {
    pub rounds: Vec<OcsRound>,
}

fn check_tabulation(inst: &Instance, f: &CandidateFunction) -> Result<()> {
    // Weights read f(l) for l up to (server degree - 1).
    let needed = inst.max_server_degree().saturating_sub(1);
    if f.levels() < needed {
        return Err(Error::TabulationTooShort { needed, have: f.levels() });
    }
    Ok(())
}

/// The OCS-based algorithm: request `r` matches `s` in its unmatched
/// neighborhood `A` with probability `f(l_s) / sum_{s' in A} f(l_{s'})`,
/// where `l_s` counts the neighbors of `s` arrived before `r`.
///
/// If the candidate function flags its top level infinite and some server
/// in `A` sits at that level, the choice is uniform over those servers.
/// Exactly one RNG draw is consumed per round with non-empty `A`.
pub fn run_ocs<R: Rng>(inst: &Instance, f: &CandidateFunction, rng: &mut R) -> Result<MatchingOutcome> {
    run_ocs_inner(inst, f, rng, false).map(|(outcome, _)| outcome)
}

/// Like [`run_ocs`] but records the per-round trace.
pub fn run_ocs_traced<R: Rng>(
    inst: &Instance,
    f: &CandidateFunction,
    rng: &mut R,
) -> Result<(MatchingOutcome, OcsTrace)> {
    run_ocs_inner(inst, f, rng, true).map(|(outcome, trace)| (outcome, trace.unwrap()))
}

fn run_ocs_inner<R: Rng>(
    inst: &Instance,
    f: &CandidateFunction,
    rng: &mut R,
    trace: bool,
) -> Result<(MatchingOutcome, Option<OcsTrace>)> {
    check_tabulation(inst, f)?;
    let mut degrees = vec![0usize; inst.server_count];
    let mut matched = vec![false; inst.server_count];
    let mut assignment = Vec::with_capacity(inst.request_count());
    let mut rounds = Vec::new();
    for nbrs in &inst.requests {
        let available: Vec<usize> = nbrs.iter().copied().filter(|&s| !matched[s]).collect();
        let weights: Vec<f64> = available
            .iter()
            .map(|&s| {
                if f.is_infinite_level(degrees[s]) {
                    f64::INFINITY
                } else {
                    f.value(degrees[s])
                }
            })
            .collect();
        let choice = if available.is_empty() {
            None
        } else {
            let infinite: Vec<usize> = available
                .iter()
                .zip(&weights)
                .filter(|&(_, &w)| w.is_infinite())
                .map(|(&s, _)| s)
                .collect();
            let s = if !infinite.is_empty() {
                infinite[rng.random_range(0..infinite.len())]
            } else {
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                let mut picked = available[available.len() - 1];
                for (&s, &w) in available.iter().zip(&weights) {
                    if u < w {
                        picked = s;
                        break;
                    }
                    u -= w;
                }
                picked
            };
            matched[s] = true;
            Some(s)
        };
        assignment.push(choice);
        for &s in nbrs {
            degrees[s] += 1;
        }
        if trace {
            rounds.push(OcsRound {
                available,
                weights,
                choice,
                degrees: degrees.clone(),
                unmatched: matched.iter().map(|&m| !m).collect(),
            });
        }
    }
    let outcome = MatchingOutcome::from_assignment(inst.server_count, assignment);
    Ok((outcome, trace.then_some(OcsTrace { rounds })))
}

/// Random: each request proposes to a uniformly random neighbor regardless
/// of its matching status; a proposal to a matched server fails and the
/// request stays unmatched for good.
pub fn run_random<R: Rng>(inst: &Instance, rng: &mut R) -> MatchingOutcome {
    let mut matched = vec![false; inst.server_count];
    let assignment = inst
        .requests
        .iter()
        .map(|nbrs| {
            if nbrs.is_empty() {
                return None;
            }
            let s = nbrs[rng.random_range(0..nbrs.len())];
            if matched[s] {
                None
            } else {
                matched[s] = true;
                Some(s)
            }
        })
        .collect();
    MatchingOutcome::from_assignment(inst.server_count, assignment)
}

/// Greedy: each request matches a uniformly random unmatched neighbor if
/// one exists. Identical in law to OCS with the constant function.
pub fn run_greedy<R: Rng>(inst: &Instance, rng: &mut R) -> MatchingOutcome {
    let mut matched = vec![false; inst.server_count];
    let assignment = inst
        .requests
        .iter()
        .map(|nbrs| {
            let available: Vec<usize> = nbrs.iter().copied().filter(|&s| !matched[s]).collect();
            if available.is_empty() {
                return None;
            }
            let s = available[rng.random_range(0..available.len())];
            matched[s] = true;
            Some(s)
        })
        .collect();
    MatchingOutcome::from_assignment(inst.server_count, assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidate::{constant_candidate, optimal_candidate, semi_ocs_candidate};
    use crate::generators;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ranking_on_toy_with_fixed_order() {
        // Order (s2, s1, s3): r1 -> s2, r2 -> s3.
        let inst = generators::gen_toy();
        let ranks = RankAssignment::new(vec![1, 0, 2]).unwrap();
        let out = run_ranking(&inst, &ranks).unwrap();
        assert_eq!(out.assignment, vec![Some(1), Some(2)]);
        assert_eq!(out.matched_count, 2);
        out.check(&inst).unwrap();
    }

    #[test]
    fn ranking_rejects_length_mismatch() {
        let inst = generators::gen_toy();
        let ranks = RankAssignment::identity(2);
        assert!(matches!(
            run_ranking(&inst, &ranks),
            Err(Error::PermutationMismatch { .. })
        ));
    }

    #[test]
    fn ranking_toy_conditional_probability_is_one_third() {
        // Among orders where s2 survives r1 (rank(s1) < rank(s2)), r2
        // matches s2 only when additionally rank(s2) < rank(s3).
        let inst = generators::gen_toy();
        let mut survive = 0;
        let mut s2_matched_by_r2 = 0;
        let orders = [
            [0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0],
        ];
        for order in orders {
            let ranks = RankAssignment::new(order.to_vec()).unwrap();
            let out = run_ranking(&inst, &ranks).unwrap();
            if out.assignment[0] == Some(0) {
                survive += 1;
                if out.assignment[1] == Some(1) {
                    s2_matched_by_r2 += 1;
                }
            }
        }
        assert_eq!(survive, 3);
        assert_eq!(s2_matched_by_r2, 1);
    }

    #[test]
    fn ocs_semi_mode_always_prefers_the_once_seen_server() {
        let inst = generators::gen_toy();
        let f = semi_ocs_candidate(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut saw_both_branches = [false; 2];
        for _ in 0..200 {
            let (out, trace) = run_ocs_traced(&inst, &f, &mut rng).unwrap();
            out.check(&inst).unwrap();
            if out.assignment[0] == Some(0) {
                // s2 survived r1 at degree 1 = infinite level: must be taken.
                assert_eq!(out.assignment[1], Some(1));
                assert_eq!(trace.rounds[1].available, vec![1, 2]);
                saw_both_branches[0] = true;
            } else {
                assert_eq!(out.assignment[1], Some(2));
                saw_both_branches[1] = true;
            }
        }
        assert!(saw_both_branches.iter().all(|&b| b));
    }

    #[test]
    fn ocs_breaks_infinite_weight_ties_uniformly() {
        // Servers 0 and 2 can both reach the infinite level unmatched;
        // conditioned on that, the final request splits evenly.
        let inst = crate::instance::Instance {
            label: "tie".into(),
            d: 2,
            k: 1,
            server_count: 4,
            requests: vec![vec![0, 1], vec![2, 3], vec![0, 2]],
        };
        let f = semi_ocs_candidate(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (mut conditioned, mut to_zero) = (0u32, 0u32);
        for _ in 0..40_000 {
            let out = run_ocs(&inst, &f, &mut rng).unwrap();
            if out.assignment[0] == Some(1) && out.assignment[1] == Some(3) {
                conditioned += 1;
                match out.assignment[2] {
                    Some(0) => to_zero += 1,
                    Some(2) => {}
                    other => panic!("unexpected choice {other:?}"),
                }
            }
        }
        assert!(conditioned > 5_000);
        let p = to_zero as f64 / conditioned as f64;
        assert!((p - 0.5).abs() < 0.05, "p = {p} over {conditioned} trials");
    }

    #[test]
    fn ocs_requires_enough_tabulated_levels() {
        let inst = generators::gen_general_ranking_hard(3).unwrap();
        let f = constant_candidate(3, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            run_ocs(&inst, &f, &mut rng),
            Err(Error::TabulationTooShort { .. })
        ));
    }

    #[test]
    fn ocs_trace_counters_are_consistent() {
        let inst = generators::gen_small_d_ranking_hard(2).unwrap();
        let f = optimal_candidate(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (_, trace) = run_ocs_traced(&inst, &f, &mut rng).unwrap();
        let mut expect_deg = vec![0usize; inst.server_count];
        let mut prev_unmatched = vec![true; inst.server_count];
        for (r, round) in trace.rounds.iter().enumerate() {
            for &s in &inst.requests[r] {
                expect_deg[s] += 1;
            }
            assert_eq!(round.degrees, expect_deg, "degree counters at round {r}");
            for s in 0..inst.server_count {
                // U_s is monotone: never unmatched again after matched.
                assert!(prev_unmatched[s] || !round.unmatched[s]);
            }
            prev_unmatched = round.unmatched.clone();
        }
    }

    #[test]
    fn random_single_neighbor_always_matches() {
        let inst = crate::instance::Instance {
            label: "one".into(),
            d: 1,
            k: 1,
            server_count: 1,
            requests: vec![vec![0]],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert_eq!(run_random(&inst, &mut rng).matched_count, 1);
        }
    }

    #[test]
    fn random_toy_first_request_splits_evenly() {
        let inst = generators::gen_toy();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 200_000;
        let mut to_s1 = 0usize;
        for _ in 0..trials {
            if run_random(&inst, &mut rng).assignment[0] == Some(0) {
                to_s1 += 1;
            }
        }
        let p = to_s1 as f64 / trials as f64;
        assert!((p - 0.5).abs() < 0.005, "p = {p}");
    }

    #[test]
    fn greedy_toy_always_matches_both() {
        let inst = generators::gen_toy();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let out = run_greedy(&inst, &mut rng);
            assert_eq!(out.matched_count, 2);
        }
    }

    #[test]
    fn greedy_never_skips_an_available_neighbor() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let inst = generators::random_dd_bounded(8, 3, &mut rng);
        for _ in 0..50 {
            let out = run_greedy(&inst, &mut rng);
            out.check(&inst).unwrap();
            let mut matched = vec![false; inst.server_count];
            for (r, &a) in out.assignment.iter().enumerate() {
                let had_available = inst.requests[r].iter().any(|&s| !matched[s]);
                assert_eq!(a.is_some(), had_available, "request {r}");
                if let Some(s) = a {
                    matched[s] = true;
                }
            }
        }
    }

    #[test]
    fn all_engines_produce_valid_outcomes_on_generator_instances() {
        let instances = vec![
            generators::gen_toy(),
            generators::gen_general_ranking_hard(4).unwrap(),
            generators::gen_small_d_ranking_hard(3).unwrap(),
            generators::gen_kd_ranking_hard(5, 3).unwrap(),
            generators::gen_two_phase_adversary(4, 11).unwrap(),
            generators::gen_cycle(9).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for inst in &instances {
            let f = optimal_candidate(inst.d.max(2), inst.max_server_degree()).unwrap();
            for _ in 0..20 {
                run_ranking(inst, &RankAssignment::random(inst.server_count, &mut rng))
                    .unwrap()
                    .check(inst)
                    .unwrap();
                run_ocs(inst, &f, &mut rng).unwrap().check(inst).unwrap();
                run_random(inst, &mut rng).check(inst).unwrap();
                run_greedy(inst, &mut rng).check(inst).unwrap();
            }
        }
    }

    #[test]
    fn ranking_always_matches_the_layered_components() {
        // Levels 1-3 of the small-d instance are always matched; only the
        // level-5 requests can fail.
        let d = 3;
        let inst = generators::gen_small_d_ranking_hard(d).unwrap();
        let phase1 = d * (d + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..300 {
            let out =
                run_ranking(&inst, &RankAssignment::random(inst.server_count, &mut rng)).unwrap();
            for r in 0..phase1 {
                assert!(out.assignment[r].is_some(), "request {r} unmatched");
            }
        }
    }
}
