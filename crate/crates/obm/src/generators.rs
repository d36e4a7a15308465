//! Constructors for every instance family used in the experiments.
//!
//! All constructions are positional: servers and requests are numbered in
//! the order the construction introduces them, and the arrival order is the
//! request numbering. Every generator output passes [`validate_instance`]
//! with the `(k, d)` it declares.
//!
//! [`validate_instance`]: crate::instance::validate_instance

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::instance::Instance;
use crate::{Error, Result};

/// The three-server toy instance: r1 ~ {s1, s2}, r2 ~ {s2, s3}.
pub fn gen_toy() -> Instance {
    Instance {
        label: "toy".into(),
        d: 2,
        k: 1,
        server_count: 3,
        requests: vec![vec![0, 1], vec![1, 2]],
    }
}

/// The d-regular adversary for RANKING with `2d-1` servers.
///
/// Servers split into `S1 = {0..d}` and `S2 = {d..2d-1}`; requests into
/// `R1 = {0..d}` (each `r_i ~ {s_i} ∪ S2`) and `R2 = {d..2d-1}` (complete
/// bipartite to `S1`). Requests arrive in index order.
pub fn gen_general_ranking_hard(d: usize) -> Result<Instance> {
    if d < 2 {
        return Err(Error::InvalidParam(format!("general family needs d >= 2, got {d}")));
    }
    let mut requests = Vec::with_capacity(2 * d - 1);
    for i in 0..d {
        let mut nbrs = vec![i];
        nbrs.extend(d..2 * d - 1);
        requests.push(nbrs);
    }
    for _ in 0..d - 1 {
        requests.push((0..d).collect());
    }
    Ok(Instance {
        label: format!("general-d{d}"),
        d,
        k: d,
        server_count: 2 * d - 1,
        requests,
    })
}

/// Flat index of server `s_j^i` (1-based `j` in `1..=2d`) of component `i`
/// (0-based) in the layered small-d instance.
fn small_d_server(d: usize, component: usize, j: usize) -> usize {
    component * 2 * d + (j - 1)
}

/// Requests of one layered component, in arrival order, with servers
/// numbered `0..2d` (level-2 servers first, then level-4).
fn small_d_component_requests(d: usize) -> Vec<Vec<usize>> {
    let mut requests = Vec::with_capacity(d + 1);
    // r_0: common neighbor of all level-2 servers.
    requests.push((0..d).collect());
    // r_j for j in 1..=d: every level-2 server s_m except the one with
    // (m mod d) + 1 = j, plus the private level-4 server s_{d+j}.
    for j in 1..=d {
        let mut nbrs: Vec<usize> = (1..=d)
            .filter(|&m| (m % d) + 1 != j)
            .map(|m| m - 1)
            .collect();
        nbrs.push(d + j - 1);
        nbrs.sort_unstable();
        requests.push(nbrs);
    }
    requests
}

/// One layered component as a standalone (d,d)-bounded sub-instance, used
/// by the exact small-d oracle. Level-4 servers are `d..2d` and keep degree
/// 1 here; the full instance completes them with level-5 requests.
pub(crate) fn small_d_component(d: usize) -> Instance {
    Instance {
        label: format!("small-d{d}-component"),
        d,
        k: 1,
        server_count: 2 * d,
        requests: small_d_component_requests(d),
    }
}

/// The stronger d-regular adversary for RANKING made of `2d` components.
///
/// Components `G_1..G_d` are 4-level blocks of `2d` servers and `d+1`
/// requests; components `G_{d+1}..G_{2d}` are groups of `d-1` requests, the
/// `t`-th group completely joined to the level-4 servers `{s_{d+t}^i}_i`.
/// Arrival is component-major.
pub fn gen_small_d_ranking_hard(d: usize) -> Result<Instance> {
    if d < 2 {
        return Err(Error::InvalidParam(format!("small-d family needs d >= 2, got {d}")));
    }
    let mut requests = Vec::with_capacity(2 * d * d);
    for i in 0..d {
        for nbrs in small_d_component_requests(d) {
            requests.push(nbrs.into_iter().map(|j| small_d_server(d, i, j + 1)).collect());
        }
    }
    for t in 1..=d {
        for _ in 0..d - 1 {
            requests.push((0..d).map(|i| small_d_server(d, i, d + t)).collect());
        }
    }
    Ok(Instance {
        label: format!("small-d{d}"),
        d,
        k: d,
        server_count: 2 * d * d,
        requests,
    })
}

/// The (k,d)-bounded adversary for RANKING, `k > d >= 2`.
///
/// `S1 = {0..k}` with a private edge to each of `R1 = {0..k}`, `R1` complete
/// to `S2 = {k..k+d-1}`, and each `S1` server adjacent to the `k-1` requests
/// of `R2` of minimum current degree (ties broken by lowest index).
pub fn gen_kd_ranking_hard(k: usize, d: usize) -> Result<Instance> {
    if d < 2 || k <= d {
        return Err(Error::InvalidParam(format!(
            "kd family needs k > d >= 2, got k = {k}, d = {d}"
        )));
    }
    let r2_count = (k * (k - 1)).div_ceil(d);
    let mut requests: Vec<Vec<usize>> = Vec::with_capacity(k + r2_count);
    for i in 0..k {
        let mut nbrs = vec![i];
        nbrs.extend(k..k + d - 1);
        requests.push(nbrs);
    }
    requests.extend(std::iter::repeat_with(Vec::new).take(r2_count));
    let mut deg = vec![0usize; r2_count];
    for server in 0..k {
        let mut order: Vec<usize> = (0..r2_count).collect();
        order.sort_by_key(|&r| (deg[r], r));
        for &r in order.iter().take(k - 1) {
            deg[r] += 1;
            requests[k + r].push(server);
        }
    }
    Ok(Instance {
        label: format!("kd-k{k}-d{d}"),
        d,
        k,
        server_count: k + d - 1,
        requests,
    })
}

/// The two-phase adversary against all randomized algorithms.
///
/// `d*d` servers on a grid; phase 1 brings `floor(d/2)` requests per row,
/// each adjacent to the whole row; phase 2 brings `ceil(d/2)` per column.
/// Server identities are shuffled by `seed`, which anonymizes the grid
/// against any algorithm without touching the algorithms' own randomness.
pub fn gen_two_phase_adversary(d: usize, seed: u64) -> Result<Instance> {
    if d < 2 {
        return Err(Error::InvalidParam(format!("two-phase family needs d >= 2, got {d}")));
    }
    let mut ids: Vec<usize> = (0..d * d).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let mut requests = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut row: Vec<usize> = (0..d).map(|j| ids[i * d + j]).collect();
        row.sort_unstable();
        for _ in 0..d / 2 {
            requests.push(row.clone());
        }
    }
    for j in 0..d {
        let mut col: Vec<usize> = (0..d).map(|i| ids[i * d + j]).collect();
        col.sort_unstable();
        for _ in 0..d.div_ceil(2) {
            requests.push(col.clone());
        }
    }
    Ok(Instance {
        label: format!("two-phase-d{d}-seed{seed}"),
        d,
        k: d,
        server_count: d * d,
        requests,
    })
}

/// The 2-regular cycle: `r_i ~ {s_i, s_{i+1 mod n}}`.
pub fn gen_cycle(n: usize) -> Result<Instance> {
    if n < 3 {
        return Err(Error::InvalidParam(format!("cycle needs n >= 3, got {n}")));
    }
    let requests = (0..n)
        .map(|i| {
            let mut nbrs = vec![i, (i + 1) % n];
            nbrs.sort_unstable();
            nbrs
        })
        .collect();
    Ok(Instance {
        label: format!("cycle-n{n}"),
        d: 2,
        k: 2,
        server_count: n,
        requests,
    })
}

/// A small random (d,d)-bounded instance for property tests.
///
/// Builds `d` rounds of requests; each round partitions a random server
/// permutation into chunks of at most `d`, so every server ends with degree
/// exactly `d` and every request has degree at most `d`.
pub fn random_dd_bounded<R: Rng>(server_count: usize, d: usize, rng: &mut R) -> Instance {
    let mut requests = Vec::new();
    for _ in 0..d {
        let mut perm: Vec<usize> = (0..server_count).collect();
        perm.shuffle(rng);
        for chunk in perm.chunks(d) {
            let mut nbrs = chunk.to_vec();
            nbrs.sort_unstable();
            requests.push(nbrs);
        }
    }
    Instance {
        label: format!("random-dd-n{server_count}-d{d}"),
        d,
        k: d,
        server_count,
        requests,
    }
}
