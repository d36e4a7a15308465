//! Property tests: generator outputs validate, engines produce legal
//! outcomes, and the offline optimum is arrival-order invariant.

use proptest::prelude::*;

use obm::candidate::optimal_candidate;
use obm::engines::{run_greedy, run_ocs, run_random, run_ranking, RankAssignment};
use obm::generators;
use obm::instance::{offline_optimum, validate_instance};
use obm::sim::trial_rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generators_validate_with_their_declared_bounds(d in 2usize..7, k_extra in 1usize..4, n in 3usize..20, seed in any::<u64>()) {
        for inst in [
            generators::gen_general_ranking_hard(d).unwrap(),
            generators::gen_small_d_ranking_hard(d).unwrap(),
            generators::gen_kd_ranking_hard(d + k_extra, d).unwrap(),
            generators::gen_two_phase_adversary(d, seed).unwrap(),
            generators::gen_cycle(n).unwrap(),
        ] {
            prop_assert!(validate_instance(&inst).is_empty(), "{}", inst.label);
        }
    }

    #[test]
    fn regular_families_are_perfectly_matchable(d in 2usize..7) {
        for inst in [
            generators::gen_general_ranking_hard(d).unwrap(),
            generators::gen_small_d_ranking_hard(d).unwrap(),
        ] {
            prop_assert_eq!(offline_optimum(&inst), inst.server_count);
        }
    }

    #[test]
    fn optimum_is_arrival_order_invariant(n in 4usize..10, d in 2usize..4, seed in any::<u64>(), rotate in 0usize..16) {
        let mut rng = trial_rng(seed, 0);
        let inst = generators::random_dd_bounded(n, d, &mut rng);
        let base = offline_optimum(&inst);
        let mut permuted = inst.clone();
        let len = permuted.requests.len().max(1);
        permuted.requests.rotate_left(rotate % len);
        permuted.requests.reverse();
        prop_assert_eq!(offline_optimum(&permuted), base);
    }

    #[test]
    fn engines_produce_legal_outcomes(n in 3usize..10, d in 2usize..4, seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 1);
        let inst = generators::random_dd_bounded(n, d, &mut rng);
        let f = optimal_candidate(d, inst.max_server_degree()).unwrap();
        let ranks = RankAssignment::random(inst.server_count, &mut rng);
        run_ranking(&inst, &ranks).unwrap().check(&inst).unwrap();
        run_ocs(&inst, &f, &mut rng).unwrap().check(&inst).unwrap();
        run_random(&inst, &mut rng).check(&inst).unwrap();
        run_greedy(&inst, &mut rng).check(&inst).unwrap();
    }

    #[test]
    fn optimal_candidate_is_monotone_with_monotone_ratios(d in 2usize..12, levels in 1usize..16) {
        // f*_2 is doubly exponential and leaves the f64 range at level 11.
        let levels = if d == 2 { levels.min(9) } else { levels };
        let f = optimal_candidate(d, levels + 1).unwrap();
        for l in 1..=levels {
            prop_assert!(f.value(l) > f.value(l - 1));
            if l >= 2 {
                let r0 = f.value(l - 1) / f.value(l - 2);
                let r1 = f.value(l) / f.value(l - 1);
                prop_assert!(r1 >= r0 * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn ranking_matched_count_is_maximal_matching_lower_bound(n in 3usize..10, d in 2usize..4, seed in any::<u64>()) {
        // RANKING is greedy, so it produces a maximal matching: at least
        // half the offline optimum, never more than the optimum.
        let mut rng = trial_rng(seed, 2);
        let inst = generators::random_dd_bounded(n, d, &mut rng);
        let opt = offline_optimum(&inst);
        let ranks = RankAssignment::random(inst.server_count, &mut rng);
        let out = run_ranking(&inst, &ranks).unwrap();
        prop_assert!(out.matched_count <= opt);
        prop_assert!(2 * out.matched_count >= opt);
    }
}
