use super::{DeadlineSemantics, Edge, RtsptwInstance, RtsptwMeta};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

const GRID: i64 = 50;

/// Random RTSPTW instance on `0..=n`.
///
/// Distinct integer points on a 50 × 50 grid (the end depot shares the start
/// depot's point), travel time = cost = rounded Euclidean distance, complete
/// edge set. A random seed tour fixes nominal arrival times `A_j`, and the
/// windows are `r_j = max(0, A_j − ⌊w/2⌋)`, `d_j = A_j + ⌊w/2⌋ + b`. Service
/// bounds are `l = 0`, `u = 2` at the customers.
pub fn generate_rtsptw(n: usize, width: i64, budget: i64, seed: u64) -> RtsptwInstance {
    assert!(n >= 2, "need at least one customer");
    assert!(width >= 0 && budget >= 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = HashSet::new();
    let mut points = Vec::with_capacity(n + 1);
    while points.len() < n {
        let p = (rng.gen_range(0..=GRID), rng.gen_range(0..=GRID));
        if used.insert(p) {
            points.push(p);
        }
    }
    points.push(points[0]);
    let dist = |i: usize, j: usize| {
        let (dx, dy) = ((points[i].0 - points[j].0) as f64, (points[i].1 - points[j].1) as f64);
        dx.hypot(dy).round() as i64
    };
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 1..=n {
            if i != j {
                let t = dist(i, j);
                edges.push(Edge { from: i, to: j, cost: t, time: t });
            }
        }
    }
    let mut customers: Vec<usize> = (1..n).collect();
    customers.shuffle(&mut rng);
    let seed_tour: Vec<usize> = std::iter::once(0).chain(customers).chain(std::iter::once(n)).collect();

    let half = width / 2;
    let mut release = vec![0; n + 1];
    let mut deadline = vec![i64::MAX; n + 1];
    let mut at = 0;
    for w in seed_tour.windows(2) {
        at += dist(w[0], w[1]);
        release[w[1]] = (at - half).max(0);
        deadline[w[1]] = at + half + budget;
    }
    let mut upper = vec![2; n + 1];
    upper[0] = 0;
    upper[n] = 0;
    RtsptwInstance {
        n,
        edges,
        release,
        deadline,
        lower: vec![0; n + 1],
        upper,
        budget,
        semantics: DeadlineSemantics::Arrival,
        meta: Some(RtsptwMeta { seed, width, seed_tour, points }),
    }
}
