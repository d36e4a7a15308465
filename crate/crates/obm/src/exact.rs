//! Exact-expectation oracles.
//!
//! - [`ranking_exact`]: the exact expected matched count of RANKING under a
//!   uniformly random rank permutation, by enumerating permutations block
//!   by block. When the whole graph is too large, the oracle looks for a
//!   prefix/suffix split: a prefix whose graph decomposes into independent
//!   blocks, followed by tail requests whose neighbor sets form pairwise
//!   disjoint groups of identical sets. Within a group of `g` identical
//!   requests, RANKING matches exactly `min(unmatched, g)` servers whatever
//!   the ranks, so the tail contributes through per-block histograms of
//!   unmatched counts combined by independence.
//! - [`ranking_exact_smalld`]: the specialization to the layered small-d
//!   family, enumerating a single component and combining the level-5
//!   groups through a Binomial closed form.
//! - [`ocs_exact`]: the exact law of the OCS engine by dynamic programming
//!   over matched-server subsets (degree counters are instance-determined,
//!   so the matched set is the whole state).
//! - [`markov_expected_matched`]: the expected number of off-layer servers
//!   matched in the general-d adversary, conditioned on the sorted ranks of
//!   those servers, as a `d`-step chain expectation.

use rand::Rng;
use rayon::prelude::*;

use crate::candidate::CandidateFunction;
use crate::instance::Instance;
use crate::rational::Ratio;
use crate::{generators, Error, Result};

/// Budget for permutation enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumBudget {
    /// Largest number of servers enumerated in one independent block (the
    /// block costs `max_block_servers!` traces).
    pub max_block_servers: usize,
}

impl Default for EnumBudget {
    fn default() -> Self {
        EnumBudget { max_block_servers: 12 }
    }
}

/// An exact expectation: the `f64` value plus the reduced rational when the
/// combination fits in 128-bit arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactExpectation {
    pub expected: f64,
    pub rational: Option<Ratio>,
}

fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

// ---------------------------------------------------------------------------
// Permutation enumeration over one block.
// ---------------------------------------------------------------------------

/// One rank-independent block: a set of servers plus the requests whose
/// neighbors all live in it, in arrival order, with local server ids.
struct Block {
    server_count: usize,
    requests: Vec<Vec<usize>>,
    /// Tail groups observed through this block: (group id, local servers).
    group_members: Vec<(usize, Vec<usize>)>,
}

struct BlockStats {
    permutations: u64,
    matched_sum: u64,
    /// For each registered group: histogram over the number of unmatched
    /// members among this block's share of the group.
    group_hists: Vec<(usize, Vec<u64>)>,
}

impl Block {
    fn enumerate(&self) -> BlockStats {
        let n = self.server_count;
        let permutations = factorial_u64(n);
        if n == 0 {
            return BlockStats {
                permutations: 1,
                matched_sum: 0,
                group_hists: self
                    .group_members
                    .iter()
                    .map(|(g, m)| (*g, vec![1u64; m.len() + 1]))
                    .collect(),
            };
        }
        // Parallelize over the server holding rank 0; each branch
        // enumerates the remaining (n-1)! suffix orders.
        let branches: Vec<BlockStats> = (0..n)
            .into_par_iter()
            .map(|first| {
                let rest: Vec<usize> = (0..n).filter(|&s| s != first).collect();
                let mut stats = BlockStats {
                    permutations,
                    matched_sum: 0,
                    group_hists: self
                        .group_members
                        .iter()
                        .map(|(g, m)| (*g, vec![0u64; m.len() + 1]))
                        .collect(),
                };
                let mut pos = vec![0usize; n];
                let mut matched = vec![false; n];
                let mut order = rest;
                for_each_permutation(&mut order, &mut |suffix| {
                    pos[first] = 0;
                    for (p, &s) in suffix.iter().enumerate() {
                        pos[s] = p + 1;
                    }
                    stats.matched_sum += self.trace(&pos, &mut matched);
                    for (slot, (_, members)) in self.group_members.iter().enumerate() {
                        let u = members.iter().filter(|&&s| !matched[s]).count();
                        stats.group_hists[slot].1[u] += 1;
                    }
                });
                stats
            })
            .collect();
        let mut total = BlockStats {
            permutations,
            matched_sum: 0,
            group_hists: self
                .group_members
                .iter()
                .map(|(g, m)| (*g, vec![0u64; m.len() + 1]))
                .collect(),
        };
        for b in branches {
            total.matched_sum += b.matched_sum;
            for (acc, part) in total.group_hists.iter_mut().zip(&b.group_hists) {
                for (a, p) in acc.1.iter_mut().zip(&part.1) {
                    *a += *p;
                }
            }
        }
        total
    }

    fn trace(&self, pos: &[usize], matched: &mut [bool]) -> u64 {
        matched.fill(false);
        let mut count = 0;
        for nbrs in &self.requests {
            let mut best = usize::MAX;
            let mut best_pos = usize::MAX;
            for &s in nbrs {
                if !matched[s] && pos[s] < best_pos {
                    best_pos = pos[s];
                    best = s;
                }
            }
            if best != usize::MAX {
                matched[best] = true;
                count += 1;
            }
        }
        count
    }
}

/// Heap's algorithm; calls `visit` for every ordering of `items`.
fn for_each_permutation(items: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    let n = items.len();
    visit(items);
    if n < 2 {
        return;
    }
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Union-find for block detection.
// ---------------------------------------------------------------------------

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    max_size: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n], max_size: usize::from(n > 0) }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.max_size = self.max_size.max(self.size[ra]);
    }
}

// ---------------------------------------------------------------------------
// ranking_exact
// ---------------------------------------------------------------------------

/// Exact expected matched count of RANKING over the uniform rank
/// permutation. See the module docs for the block decomposition; fails with
/// [`Error::BudgetExceeded`] when no decomposition fits the budget.
pub fn ranking_exact(inst: &Instance, budget: &EnumBudget) -> Result<ExactExpectation> {
    // First try: the whole request sequence as the prefix.
    let mut uf = UnionFind::new(inst.server_count);
    let mut prefix_len = inst.request_count();
    for (i, nbrs) in inst.requests.iter().enumerate() {
        for w in nbrs.windows(2) {
            uf.union(w[0], w[1]);
        }
        if !nbrs.is_empty() {
            uf.union(nbrs[0], *nbrs.last().unwrap());
        }
        if uf.max_size > budget.max_block_servers {
            prefix_len = i;
            break;
        }
    }
    if prefix_len < inst.request_count() {
        // Rebuild the union-find on the prefix only; the scan already
        // guarantees it stays within budget.
        uf = UnionFind::new(inst.server_count);
        for nbrs in &inst.requests[..prefix_len] {
            for w in nbrs.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        debug_assert!(uf.max_size <= budget.max_block_servers.max(1));
    }

    // Tail groups: identical neighbor sets, pairwise disjoint across groups.
    let mut groups: Vec<(Vec<usize>, usize)> = Vec::new(); // (sorted set, multiplicity)
    for nbrs in &inst.requests[prefix_len..] {
        let mut key = nbrs.clone();
        key.sort_unstable();
        match groups.iter_mut().find(|(set, _)| *set == key) {
            Some((_, count)) => *count += 1,
            None => groups.push((key, 1)),
        }
    }
    let mut seen = vec![false; inst.server_count];
    for (set, _) in &groups {
        for &s in set {
            if seen[s] {
                return Err(Error::BudgetExceeded(
                    "tail requests do not form disjoint groups; no independent decomposition".into(),
                ));
            }
            seen[s] = true;
        }
    }

    // Assemble the blocks from the prefix components.
    let mut block_of_root: Vec<Option<usize>> = vec![None; inst.server_count];
    let mut blocks: Vec<Block> = Vec::new();
    let mut local_id: Vec<usize> = vec![usize::MAX; inst.server_count];
    for s in 0..inst.server_count {
        let root = uf.find(s);
        let b = match block_of_root[root] {
            Some(b) => b,
            None => {
                blocks.push(Block { server_count: 0, requests: Vec::new(), group_members: Vec::new() });
                block_of_root[root] = Some(blocks.len() - 1);
                blocks.len() - 1
            }
        };
        local_id[s] = blocks[b].server_count;
        blocks[b].server_count += 1;
    }
    for nbrs in &inst.requests[..prefix_len] {
        if nbrs.is_empty() {
            continue;
        }
        let b = block_of_root[uf.find(nbrs[0])].unwrap();
        blocks[b]
            .requests
            .push(nbrs.iter().map(|&s| local_id[s]).collect());
    }
    for (g, (set, _)) in groups.iter().enumerate() {
        let mut per_block: Vec<(usize, Vec<usize>)> = Vec::new();
        for &s in set {
            let b = block_of_root[uf.find(s)].unwrap();
            match per_block.iter_mut().find(|(bb, _)| *bb == b) {
                Some((_, members)) => members.push(local_id[s]),
                None => per_block.push((b, vec![local_id[s]])),
            }
        }
        for (b, members) in per_block {
            blocks[b].group_members.push((g, members));
        }
    }

    for block in &blocks {
        if block.server_count > budget.max_block_servers {
            return Err(Error::BudgetExceeded(format!(
                "block of {} servers exceeds the {}-server budget",
                block.server_count, budget.max_block_servers
            )));
        }
    }

    // Enumerate only the blocks that matter.
    let stats: Vec<(usize, BlockStats)> = blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| !b.requests.is_empty() || !b.group_members.is_empty())
        .map(|(i, b)| (i, b.enumerate()))
        .collect();

    // Prefix expectation.
    let mut expected = 0.0;
    let mut rational = Some(Ratio::from_int(0));
    for (_, st) in &stats {
        expected += st.matched_sum as f64 / st.permutations as f64;
        rational = rational.and_then(|acc| {
            acc.checked_add(&Ratio::new(st.matched_sum as i128, st.permutations as i128))
        });
    }

    // Tail groups: convolve the per-block unmatched histograms.
    for (g, (set, multiplicity)) in groups.iter().enumerate() {
        let mut dist_f: Vec<f64> = vec![1.0];
        let mut dist_q: Option<Vec<Ratio>> = Some(vec![Ratio::from_int(1)]);
        for (_, st) in &stats {
            for (gid, hist) in &st.group_hists {
                if *gid != g {
                    continue;
                }
                let block_f: Vec<f64> = hist
                    .iter()
                    .map(|&c| c as f64 / st.permutations as f64)
                    .collect();
                dist_f = convolve_f64(&dist_f, &block_f);
                dist_q = dist_q.and_then(|dq| {
                    let bq: Option<Vec<Ratio>> = hist
                        .iter()
                        .map(|&c| Some(Ratio::new(c as i128, st.permutations as i128)))
                        .collect();
                    convolve_ratio(&dq, &bq?)
                });
            }
        }
        debug_assert_eq!(dist_f.len(), set.len() + 1);
        let g_count = *multiplicity;
        expected += dist_f
            .iter()
            .enumerate()
            .map(|(u, p)| u.min(g_count) as f64 * p)
            .sum::<f64>();
        rational = rational.and_then(|acc| {
            let dq = dist_q?;
            let mut tail = Ratio::from_int(0);
            for (u, q) in dq.iter().enumerate() {
                tail = tail.checked_add(&q.checked_mul_int(u.min(g_count) as i128)?)?;
            }
            acc.checked_add(&tail)
        });
    }

    if let Some(r) = rational {
        expected = r.to_f64();
    }
    Ok(ExactExpectation { expected, rational })
}

fn convolve_f64(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn convolve_ratio(a: &[Ratio], b: &[Ratio]) -> Option<Vec<Ratio>> {
    let mut out = vec![Ratio::from_int(0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].checked_add(&x.checked_mul(y)?)?;
        }
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// ranking_exact_smalld
// ---------------------------------------------------------------------------

/// Exact result for the layered small-d adversary.
#[derive(Debug, Clone)]
pub struct SmallDExact {
    pub d: usize,
    /// `p_unmatched[t]` = probability that the level-4 server `s_{d+1+t}`
    /// of a component is unmatched after the component's requests. The `d`
    /// servers of the `t`-th level-5 group sit at the same position of `d`
    /// identically built components, so they share `p_unmatched[t]`
    /// exactly; across `t` the values differ because arrival order is not
    /// invariant under the cyclic relabeling.
    pub p_unmatched: Vec<ExactExpectation>,
    /// The competitive ratio of RANKING on the full instance.
    pub ratio: ExactExpectation,
    /// Raw per-server unmatched permutation counts from the enumeration.
    pub per_server_counts: Vec<u64>,
    pub permutations: u64,
}

/// Exact RANKING ratio on the small-d family via per-component
/// factorization: enumerate the `(2d)!` rank orders of one component, then
/// combine the `d` independent components per level-5 group through
/// `E[min(Binomial(d, p_t), d-1)] = d p_t - p_t^d`.
///
/// `d <= 5` runs in the default budget; `d = 6` costs a `12!` enumeration
/// and must be opted into with `heavy`.
pub fn ranking_exact_smalld(d: usize, heavy: bool) -> Result<SmallDExact> {
    if d < 2 {
        return Err(Error::InvalidParam(format!("small-d oracle needs d >= 2, got {d}")));
    }
    if 2 * d > 12 {
        return Err(Error::BudgetExceeded(format!(
            "small-d oracle enumerates (2d)! orders; 2d = {} exceeds 12",
            2 * d
        )));
    }
    if d == 6 && !heavy {
        return Err(Error::BudgetExceeded(
            "d = 6 enumerates 12! orders; pass heavy to opt in".into(),
        ));
    }
    let component = generators::small_d_component(d);
    let block = Block {
        server_count: component.server_count,
        requests: component.requests.clone(),
        // One singleton group per level-4 server.
        group_members: (d..2 * d).map(|s| (s - d, vec![s])).collect(),
    };
    let stats = block.enumerate();
    let per_server_counts: Vec<u64> = stats.group_hists.iter().map(|(_, h)| h[1]).collect();
    let perms = stats.permutations;
    let p_unmatched: Vec<ExactExpectation> = per_server_counts
        .iter()
        .map(|&c| ExactExpectation {
            expected: c as f64 / perms as f64,
            rational: Some(Ratio::new(c as i128, perms as i128)),
        })
        .collect();
    // ratio = (d(d+1) + sum_t (d p_t - p_t^d)) / (2 d^2)
    let mut level5_f = 0.0;
    for p in &p_unmatched {
        level5_f += d as f64 * p.expected - p.expected.powi(d as i32);
    }
    let ratio_f = ((d * (d + 1)) as f64 + level5_f) / (2 * d * d) as f64;
    let ratio_q = (|| {
        let mut level5 = Ratio::from_int(0);
        for p in &p_unmatched {
            let p_q = p.rational?;
            let dp = p_q.checked_mul_int(d as i128)?;
            let pd = p_q.checked_pow(d as u32)?;
            level5 = level5.checked_add(&dp.checked_sub(&pd)?)?;
        }
        let num = level5.checked_add(&Ratio::from_int((d * (d + 1)) as i128))?;
        num.checked_mul(&Ratio::new(1, (2 * d * d) as i128))
    })();
    Ok(SmallDExact {
        d,
        p_unmatched,
        ratio: ExactExpectation {
            expected: ratio_q.map_or(ratio_f, |r| r.to_f64()),
            rational: ratio_q,
        },
        per_server_counts,
        permutations: perms,
    })
}

// ---------------------------------------------------------------------------
// ocs_exact
// ---------------------------------------------------------------------------

/// Server cap for the subset DP.
pub const OCS_EXACT_SERVER_CAP: usize = 22;

/// Exact law of the OCS engine on one instance.
#[derive(Debug, Clone)]
pub struct OcsExactReport {
    pub expected_matched: f64,
    /// `unmatched_after_round[r][s]` = probability that server `s` is
    /// unmatched at the end of round `r`.
    pub unmatched_after_round: Vec<Vec<f64>>,
    /// `assignment_probs[r][s]` = probability that request `r` matches `s`.
    pub assignment_probs: Vec<Vec<f64>>,
}

/// Dynamic program over (request index, matched-server set); exact up to
/// f64 summation. The degree counters are determined by the instance, so
/// the matched set captures the whole state of the algorithm.
pub fn ocs_exact(inst: &Instance, f: &CandidateFunction) -> Result<OcsExactReport> {
    if inst.server_count > OCS_EXACT_SERVER_CAP {
        return Err(Error::BudgetExceeded(format!(
            "subset DP supports at most {OCS_EXACT_SERVER_CAP} servers, instance has {}",
            inst.server_count
        )));
    }
    let needed = inst.max_server_degree().saturating_sub(1);
    if f.levels() < needed {
        return Err(Error::TabulationTooShort { needed, have: f.levels() });
    }
    let mut degrees = vec![0usize; inst.server_count];
    let mut states: Vec<(u32, f64)> = vec![(0, 1.0)];
    let mut unmatched_after_round = Vec::with_capacity(inst.request_count());
    let mut assignment_probs = Vec::with_capacity(inst.request_count());
    for nbrs in &inst.requests {
        let mut next: std::collections::BTreeMap<u32, f64> = std::collections::BTreeMap::new();
        let mut assign = vec![0.0; inst.server_count];
        for &(mask, p) in &states {
            let available: Vec<usize> =
                nbrs.iter().copied().filter(|&s| mask & (1 << s) == 0).collect();
            if available.is_empty() {
                *next.entry(mask).or_insert(0.0) += p;
                continue;
            }
            let infinite: Vec<usize> = available
                .iter()
                .copied()
                .filter(|&s| f.is_infinite_level(degrees[s]))
                .collect();
            let choices: Vec<(usize, f64)> = if !infinite.is_empty() {
                let q = 1.0 / infinite.len() as f64;
                infinite.into_iter().map(|s| (s, q)).collect()
            } else {
                let total: f64 = available.iter().map(|&s| f.value(degrees[s])).sum();
                available.into_iter().map(|s| (s, f.value(degrees[s]) / total)).collect()
            };
            for (s, q) in choices {
                *next.entry(mask | (1 << s)).or_insert(0.0) += p * q;
                assign[s] += p * q;
            }
        }
        states = next.into_iter().collect();
        for &s in nbrs {
            degrees[s] += 1;
        }
        let mut unmatched = vec![0.0; inst.server_count];
        for &(mask, p) in &states {
            for (s, u) in unmatched.iter_mut().enumerate() {
                if mask & (1 << s) == 0 {
                    *u += p;
                }
            }
        }
        unmatched_after_round.push(unmatched);
        assignment_probs.push(assign);
    }
    let expected_matched = states
        .iter()
        .map(|&(mask, p)| mask.count_ones() as f64 * p)
        .sum();
    Ok(OcsExactReport { expected_matched, unmatched_after_round, assignment_probs })
}

// ---------------------------------------------------------------------------
// Markov-chain expectation for the general-d adversary.
// ---------------------------------------------------------------------------

/// Sorted ranks of the off-layer servers: `0 <= t_1 <= ... <= t_{d-1} <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector {
    values: Vec<f64>,
}

impl ThetaVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParam("theta vector must be non-empty".into()));
        }
        for w in values.windows(2) {
            if w[1] < w[0] {
                return Err(Error::InvalidParam("theta vector must be sorted".into()));
            }
        }
        if values[0] < 0.0 || *values.last().unwrap() > 1.0 {
            return Err(Error::InvalidParam("theta values must lie in [0, 1]".into()));
        }
        Ok(ThetaVector { values })
    }

    /// The vector `(1/d, ..., (d-1)/d)` at which the chain expectation
    /// upper-bounds the average over random ranks.
    pub fn balanced(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParam(format!("balanced theta needs d >= 2, got {d}")));
        }
        Ok(ThetaVector { values: (1..d).map(|j| j as f64 / d as f64).collect() })
    }

    /// `d - 1` sorted uniforms, the law of the off-layer ranks.
    pub fn sample_sorted_uniform<R: Rng>(d: usize, rng: &mut R) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParam(format!("sampled theta needs d >= 2, got {d}")));
        }
        let mut values: Vec<f64> = (1..d).map(|_| rng.random()).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(ThetaVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The d of the instance the vector describes.
    pub fn d(&self) -> usize {
        self.values.len() + 1
    }
}

/// Expected number of off-layer servers matched after the `d` first-phase
/// arrivals, conditioned on their sorted ranks being `theta`.
///
/// The chain over the matched count `j` stays with probability `theta[j]`
/// and advances with `1 - theta[j]` until all `d - 1` are matched.
pub fn markov_expected_matched(theta: &ThetaVector) -> f64 {
    let d = theta.d();
    let mut prob = vec![0.0; d];
    prob[0] = 1.0;
    for _ in 0..d {
        let mut next = vec![0.0; d];
        for (j, &p) in prob.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            if j == d - 1 {
                next[j] += p;
            } else {
                let stay = theta.values[j];
                next[j] += p * stay;
                next[j + 1] += p * (1.0 - stay);
            }
        }
        prob = next;
    }
    prob.iter().enumerate().map(|(j, &p)| j as f64 * p).sum()
}

/// Closed form of the chain expectation at the balanced theta:
/// `(d-1) (1 - (1 - 1/d)^d)`.
pub fn markov_balanced_closed_form(d: usize) -> f64 {
    (d as f64 - 1.0) * (1.0 - (1.0 - 1.0 / d as f64).powi(d as i32))
}

// ---------------------------------------------------------------------------
// The (m, g) stochastic construction.
// ---------------------------------------------------------------------------

/// One draw of the ordered product construction: `m_i` is the maximum of
/// `i` independent uniforms and `g_i = prod_{j >= i} m_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GSample {
    pub m: Vec<f64>,
    pub g: Vec<f64>,
}

/// Samples `(m, g)` for a given `d`; `g` is statistically identical to the
/// sorted ranks `theta`.
pub fn sample_g<R: Rng>(d: usize, rng: &mut R) -> Result<GSample> {
    if d < 2 {
        return Err(Error::InvalidParam(format!("g sample needs d >= 2, got {d}")));
    }
    let m: Vec<f64> = (1..d)
        .map(|i| rng.random::<f64>().powf(1.0 / i as f64))
        .collect();
    let mut g = m.clone();
    for i in (0..g.len().saturating_sub(1)).rev() {
        g[i] = m[i] * g[i + 1];
    }
    Ok(GSample { m, g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidate::{constant_candidate, optimal_candidate, semi_ocs_candidate, CandidateFunction};
    use crate::generators;
    use crate::instance::offline_optimum;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ranking_exact_on_general_d2() {
        // 3! = 6 rank orders of {s1, s2, s3}; expected matched is 8/3.
        let inst = generators::gen_general_ranking_hard(2).unwrap();
        let e = ranking_exact(&inst, &EnumBudget::default()).unwrap();
        assert_eq!(e.rational, Some(Ratio::new(8, 3)));
        let opt = offline_optimum(&inst);
        assert_eq!(opt, 3);
        assert!((e.expected / opt as f64 - 8.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn smalld_d2_is_exactly_119_over_144() {
        let r = ranking_exact_smalld(2, false).unwrap();
        // Both level-4 servers are unmatched with probability exactly 1/6.
        for p in &r.p_unmatched {
            assert_eq!(p.rational, Some(Ratio::new(1, 6)));
        }
        assert_eq!(r.ratio.rational, Some(Ratio::new(119, 144)));
        assert_eq!(r.permutations, 24);
    }

    #[test]
    fn smalld_agrees_with_general_oracle() {
        for d in [2usize, 3, 4] {
            let inst = generators::gen_small_d_ranking_hard(d).unwrap();
            let full = ranking_exact(&inst, &EnumBudget::default()).unwrap();
            let fast = ranking_exact_smalld(d, false).unwrap();
            let opt = offline_optimum(&inst) as i128;
            assert_eq!(opt as usize, 2 * d * d);
            let full_ratio = full
                .rational
                .unwrap()
                .checked_mul(&Ratio::new(1, opt))
                .unwrap();
            assert_eq!(full_ratio, fast.ratio.rational.unwrap(), "d = {d}");
        }
    }

    #[test]
    fn smalld_agrees_with_general_oracle_at_d5() {
        // 5 blocks of 10! orders on the general path; the rationals carry
        // (10!)^5-scale denominators, still within i128.
        let inst = generators::gen_small_d_ranking_hard(5).unwrap();
        let full = ranking_exact(&inst, &EnumBudget::default()).unwrap();
        let fast = ranking_exact_smalld(5, false).unwrap();
        let opt = offline_optimum(&inst);
        assert!((full.expected / opt as f64 - fast.ratio.expected).abs() < 1e-12);
        if let (Some(full_q), Some(fast_q)) = (full.rational, fast.ratio.rational) {
            assert_eq!(full_q.checked_mul(&Ratio::new(1, opt as i128)), Some(fast_q));
        }
    }

    #[test]
    fn smalld_budget_rules() {
        assert!(matches!(ranking_exact_smalld(6, false), Err(Error::BudgetExceeded(_))));
        assert!(matches!(ranking_exact_smalld(7, true), Err(Error::BudgetExceeded(_))));
        assert!(matches!(ranking_exact_smalld(1, false), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn ranking_exact_rejects_undecomposable_large_instances() {
        // A 13-server flower: every request touches server 0, so no prefix
        // decomposes and the tail groups overlap on server 0.
        let inst = crate::instance::Instance {
            label: "flower".into(),
            d: 2,
            k: 1,
            server_count: 14,
            requests: (1..14).map(|s| vec![0, s]).collect(),
        };
        assert!(matches!(
            ranking_exact(&inst, &EnumBudget::default()),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn ocs_exact_toy_constant_weights() {
        // Both requests always see a fresh neighbor, so both always match.
        let inst = generators::gen_toy();
        let f = constant_candidate(2, 2).unwrap();
        let report = ocs_exact(&inst, &f).unwrap();
        assert!((report.expected_matched - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ocs_exact_toy_semi_mode_assignment_probability() {
        // s2 survives r1 with probability 1/2 and is then taken surely.
        let inst = generators::gen_toy();
        let f = semi_ocs_candidate(1).unwrap();
        let report = ocs_exact(&inst, &f).unwrap();
        assert!((report.assignment_probs[1][1] - 0.5).abs() < 1e-12);
        // s2 ends matched with certainty either way.
        assert!(report.unmatched_after_round[1][1].abs() < 1e-12);
    }

    #[test]
    fn ocs_exact_toy_weight_two() {
        // f(0) = 1, f(1) = 2: conditioned on both available, r2 takes s2
        // with probability 2/3; unconditionally 1/2 * 2/3 = 1/3.
        let inst = generators::gen_toy();
        let f = CandidateFunction::new(2, vec![1.0, 2.0], false).unwrap();
        let report = ocs_exact(&inst, &f).unwrap();
        assert!((report.assignment_probs[1][1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ocs_exact_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let inst = generators::random_dd_bounded(7, 3, &mut rng);
        let f = optimal_candidate(3, inst.max_server_degree()).unwrap();
        let report = ocs_exact(&inst, &f).unwrap();
        let trials = 200_000;
        let mut sum = 0u64;
        for _ in 0..trials {
            sum += crate::engines::run_ocs(&inst, &f, &mut rng).unwrap().matched_count as u64;
        }
        let mean = sum as f64 / trials as f64;
        // Matched counts are bounded by the server count; 4 sigma slack.
        let slack = 4.0 * inst.server_count as f64 / (trials as f64).sqrt();
        assert!((mean - report.expected_matched).abs() < slack);
    }

    #[test]
    fn ocs_exact_cap() {
        let inst = crate::instance::Instance {
            label: "wide".into(),
            d: 1,
            k: 1,
            server_count: 23,
            requests: vec![vec![0]],
        };
        let f = constant_candidate(2, 2).unwrap();
        assert!(matches!(ocs_exact(&inst, &f), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn markov_closed_form_and_edges() {
        for d in 2..=10 {
            let theta = ThetaVector::balanced(d).unwrap();
            let dp = markov_expected_matched(&theta);
            assert!((dp - markov_balanced_closed_form(d)).abs() < 1e-12, "d = {d}");
        }
        let stuck = ThetaVector::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(markov_expected_matched(&stuck), 0.0);
        let half = ThetaVector::new(vec![0.5]).unwrap();
        assert!((markov_expected_matched(&half) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn theta_vector_validation() {
        assert!(ThetaVector::new(vec![]).is_err());
        assert!(ThetaVector::new(vec![0.5, 0.2]).is_err());
        assert!(ThetaVector::new(vec![0.5, 1.2]).is_err());
    }

    #[test]
    fn g_sample_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let s = sample_g(5, &mut rng).unwrap();
            assert_eq!(s.m.len(), 4);
            for w in s.g.windows(2) {
                assert!(w[0] <= w[1]);
            }
            for (&m, &g) in s.m.iter().zip(&s.g) {
                assert!((0.0..=1.0).contains(&m));
                assert!((0.0..=1.0).contains(&g));
            }
            // d = 2 special case: g1 = m1 is a single uniform.
            let t = sample_g(2, &mut rng).unwrap();
            assert_eq!(t.g, t.m);
        }
    }

    #[test]
    fn sample_g_means() {
        // E[m_i] = i / (i + 1).
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let trials = 200_000;
        let d = 4;
        let mut sums = vec![0.0; d - 1];
        for _ in 0..trials {
            let s = sample_g(d, &mut rng).unwrap();
            for (acc, &m) in sums.iter_mut().zip(&s.m) {
                *acc += m;
            }
        }
        for (i, &sum) in sums.iter().enumerate() {
            let mean = sum / trials as f64;
            let want = (i + 1) as f64 / (i + 2) as f64;
            // Uniform powers have variance < 1; 4 sigma with margin.
            assert!((mean - want).abs() < 4.0 / (trials as f64).sqrt() + 1e-3);
        }
    }
}
