//! Brute-force oracles kept independent of the library's best-response path:
//! outbound sets by full enumeration, production by bisecting a
//! finite-difference slope of the utility itself.

use pnf_core::*;

/// Maximize z -> v((z^rho + s)^(1/rho)) - c z by bisecting a central
/// finite-difference of the utility itself (the objective is strictly
/// concave, so the difference changes sign exactly once).
fn oracle_production(s: f64, config: &GameConfig, hi: f64) -> f64 {
    let f = |z: f64| {
        let perceived = (z.powf(config.rho) + s).powf(1.0 / config.rho);
        config.benefit.value(perceived) - config.c * z
    };
    let h = 1e-6;
    let slope = |z: f64| f(z + h) - f(z - h);
    let (mut lo, mut hi) = (2.0 * h, hi);
    if slope(lo) <= 0.0 {
        return lo;
    }
    while hi - lo > 1e-11 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Utility of the exhaustive best response: every outbound subset of the
/// other users, production re-optimized per subset.
pub fn oracle_best_utility(profile: &StrategyProfile, i: usize, config: &GameConfig) -> f64 {
    let n = profile.n();
    let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let inbound: Vec<usize> = (0..n).filter(|&j| j != i && profile.g[j][i] == 1).collect();
    let hi = max_production(config).unwrap() * 1.5 + 1.0;
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << others.len()) {
        let subset: Vec<usize> = others
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask >> bit & 1 == 1)
            .map(|(_, &j)| j)
            .collect();
        let mut s = 0.0;
        for &j in &inbound {
            s += profile.x[j].powf(config.rho);
        }
        for &j in &subset {
            if !inbound.contains(&j) {
                s += profile.x[j].powf(config.rho);
            }
        }
        let z = oracle_production(s, config, hi);
        let perceived = (z.powf(config.rho) + s).powf(1.0 / config.rho);
        let u = config.benefit.value(perceived) - config.c * z - config.gamma * subset.len() as f64;
        best = best.max(u);
    }
    best
}

/// Oracle strict-Nash verdict under the same strictness rule as the library:
/// no subset improves utility by more than 1e-9 and the current production
/// attains the optimum for the current links within 1e-8.
pub fn oracle_verify(profile: &StrategyProfile, config: &GameConfig) -> bool {
    let n = profile.n();
    let hi = max_production(config).unwrap() * 1.5 + 1.0;
    for i in 0..n {
        let u_cur = utility(profile, i, config).unwrap();
        if oracle_best_utility(profile, i, config) > u_cur + 1e-9 {
            return false;
        }
        let friends = profile.friends().unwrap();
        let s: f64 = friends
            .neighbors(i)
            .map(|j| profile.x[j].powf(config.rho))
            .sum();
        if (profile.x[i] - oracle_production(s, config, hi)).abs() > 1e-8 {
            return false;
        }
    }
    true
}
