use super::{CpspInstance, CpspMeta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Distribution of the budget coefficients `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoeffDist {
    #[default]
    #[serde(alias = "U25")]
    U25,
    #[serde(alias = "U50")]
    U50,
    #[serde(alias = "U100")]
    U100,
}

impl CoeffDist {
    pub fn max(self) -> i64 {
        match self {
            CoeffDist::U25 => 25,
            CoeffDist::U50 => 50,
            CoeffDist::U100 => 100,
        }
    }
}

/// What the leader pays when the follower runs project `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyRule {
    #[default]
    FollowerProfit,
    LeaderProfit,
    Zero,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CpspOptions {
    pub penalty: PenaltyRule,
    /// Draw `c^F` from U(−10, 10) instead of `5a + ξ`.
    pub signed_follower_profit: bool,
}

/// Random CPSP instance: `a^L = a^F ~ U(1, K)`, both budgets
/// `round(t · Σ a)`, profits `5a + ξ` with `ξ ~ U(1, 10)`. Projects are
/// numbered by nondecreasing cost, which keeps the follower diagram small:
/// once a project no longer fits, neither does any later one.
pub fn generate_cpsp(n: usize, tightness: f64, dist: CoeffDist, seed: u64, opts: &CpspOptions) -> CpspInstance {
    assert!(tightness > 0.0 && tightness <= 1.0, "tightness must lie in (0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=dist.max())).collect();
    a.sort_unstable();
    let c_leader: Vec<i64> = a.iter().map(|&a| 5 * a + rng.gen_range(1..=10)).collect();
    let c_follower: Vec<i64> = if opts.signed_follower_profit {
        (0..n).map(|_| rng.gen_range(-10..=10)).collect()
    } else {
        a.iter().map(|&a| 5 * a + rng.gen_range(1..=10)).collect()
    };
    let d_leader = match opts.penalty {
        PenaltyRule::FollowerProfit => c_follower.clone(),
        PenaltyRule::LeaderProfit => c_leader.clone(),
        PenaltyRule::Zero => vec![0; n],
    };
    let budget = (tightness * a.iter().sum::<i64>() as f64).round() as i64;
    CpspInstance {
        n,
        c_leader,
        d_leader,
        c_follower,
        a_leader: a.clone(),
        a_follower: a,
        b_leader: budget,
        b_follower: budget,
        meta: Some(CpspMeta {
            seed,
            tightness,
            dist,
            penalty: opts.penalty,
            signed_follower_profit: opts.signed_follower_profit,
        }),
    }
}
