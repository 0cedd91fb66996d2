use serde::{Deserialize, Serialize};

use crate::equilibrium::{verify_strict_nash, EquilibriumReport};
use crate::error::{Error, Result};
use crate::model::{
    social_welfare, symmetric_welfare_per_user, GameConfig, PricingScheme, StrategyProfile,
    SymmetricProfile,
};
use crate::numerics::{delta_q, delta_r, planner_production};

/// The welfare-maximizing symmetric profile and the prices sustaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialOptimum {
    pub d_opt: usize,
    pub x_opt: f64,
    pub welfare_per_user: f64,
    /// Price of content acquisition making the planner's production privately
    /// optimal (stationarity-consistent value).
    pub p_opt: f64,
    /// The printed closed form c*d/(1+d), reported for comparison.
    pub p_paper: f64,
    /// Transfer range sustaining the optimal degree; the lower end is absent
    /// at d = n-1 and the upper end at d = 0.
    pub t_lo: Option<f64>,
    pub t_hi: Option<f64>,
    /// Residual of the planner first-order condition at (x_opt, d_opt).
    pub foc_residual: f64,
    /// Set when the degree rule ties with gamma/2 at the boundary, in which
    /// case the strict optimum is not unique.
    pub boundary_tie: bool,
}

/// Optimal degree by the increment rule: the largest d whose content-utility
/// increment from d-1 exceeds gamma/2 (the increments decrease in d).
pub fn social_optimum(config: &GameConfig) -> Result<SocialOptimum> {
    config.validate()?;
    let half_gamma = 0.5 * config.gamma;
    let tie_tol = 1e-9;
    let mut d = 0usize;
    let mut boundary_tie = false;
    while d < config.n - 1 {
        let inc = delta_q(d, config)?;
        if (inc - half_gamma).abs() <= tie_tol {
            boundary_tie = true;
        }
        if inc > half_gamma {
            d += 1;
        } else {
            break;
        }
    }
    let x_opt = planner_production(d, config)?;
    let m = (1.0 + d as f64).powf(1.0 / config.rho);
    let foc_residual = (m * config.benefit.deriv(m * x_opt) - config.c).abs();
    let welfare_per_user = symmetric_welfare_per_user(x_opt, d, config);
    let (p_opt, t_lo, t_hi, p_paper) = optimal_prices(d, x_opt, config)?;
    Ok(SocialOptimum {
        d_opt: d,
        x_opt,
        welfare_per_user,
        p_opt,
        p_paper,
        t_lo,
        t_hi,
        foc_residual,
        boundary_tie,
    })
}

/// Prices sustaining the optimum as an equilibrium.
///
/// p solves the production stationarity condition e(x_opt, X_opt) = c - p*d
/// (closed form c/(1+d) for the adopted utility reading; the printed
/// alternative c*d/(1+d) is returned last). The t bounds evaluate the
/// single-link deviation margins at effective cost c - p*d.
pub fn optimal_prices(
    d_opt: usize,
    x_opt: f64,
    config: &GameConfig,
) -> Result<(f64, Option<f64>, Option<f64>, f64)> {
    config.validate()?;
    if d_opt >= config.n {
        return Err(Error::InvalidConfig(format!(
            "optimal degree {d_opt} out of range for n = {}",
            config.n
        )));
    }
    let d = d_opt as f64;
    let p_paper = config.c * d / (1.0 + d);
    if d_opt == 0 {
        // no links at the optimum: content transfers are moot and only the
        // add-link deterrent bounds t from below
        let t_lo = delta_r(0, x_opt, config.c, config)? - config.gamma;
        return Ok((0.0, Some(t_lo), None, p_paper));
    }
    let m = (1.0 + d).powf(1.0 / config.rho);
    let marginal = config.marginal_benefit(x_opt, m * x_opt);
    let p_opt = (config.c - marginal) / d;
    let c_eff = config.c - p_opt * d;
    let t_lo = if d_opt <= config.n - 2 {
        Some(delta_r(d_opt, x_opt, c_eff, config)? - p_opt * x_opt - config.gamma)
    } else {
        None
    };
    let t_hi = Some(delta_r(d_opt - 1, x_opt, c_eff, config)? - p_opt * x_opt - config.gamma);
    Ok((p_opt, t_lo, t_hi, p_paper))
}

/// Realize the optimum on a regular topology and verify it as a strict
/// equilibrium of the priced game with (p_opt, t).
pub fn verify_priced_equilibrium(
    config: &GameConfig,
    optimum: &SocialOptimum,
    t: f64,
) -> Result<EquilibriumReport> {
    if (config.n * optimum.d_opt) % 2 == 1 {
        return Err(Error::InvalidConfig(format!(
            "no {}-regular realization on {} nodes (n*d odd); nearest feasible n is {}",
            optimum.d_opt,
            config.n,
            config.n + 1
        )));
    }
    let profile = SymmetricProfile {
        x: optimum.x_opt,
        d: optimum.d_opt,
    }
    .realize(config.n)?;
    let pricing = PricingScheme {
        p: optimum.p_opt,
        t,
    };
    verify_strict_nash(&profile, config, Some(&pricing))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareGap {
    pub w_profile: f64,
    pub w_opt: f64,
    pub gap: f64,
}

/// Total welfare of a profile against the symmetric optimum of the same
/// config. The optimum value is the unconstrained symmetric bound, so the
/// gap is nonnegative (up to tolerance) for every profile.
pub fn welfare_gap(profile: &StrategyProfile, config: &GameConfig) -> Result<WelfareGap> {
    let w_profile = social_welfare(profile, config)?;
    let optimum = social_optimum(config)?;
    let w_opt = optimum.welfare_per_user * config.n as f64;
    Ok(WelfareGap {
        w_profile,
        w_opt,
        gap: w_opt - w_profile,
    })
}

/// One row of the pricing sweep over link costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingRow {
    pub gamma: f64,
    pub d_opt: usize,
    pub x_opt: f64,
    pub welfare_per_user: f64,
    pub p_opt: f64,
    pub p_paper: f64,
    pub t_lo: Option<f64>,
    pub t_hi: Option<f64>,
    pub t_mid: Option<f64>,
}

pub fn pricing_sweep(config: &GameConfig, gammas: &[f64]) -> Result<Vec<PricingRow>> {
    let mut rows = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let mut cfg = config.clone();
        cfg.gamma = gamma;
        let opt = social_optimum(&cfg)?;
        let t_mid = match (opt.t_lo, opt.t_hi) {
            (Some(lo), Some(hi)) => Some(0.5 * (lo + hi)),
            _ => None,
        };
        rows.push(PricingRow {
            gamma,
            d_opt: opt.d_opt,
            x_opt: opt.x_opt,
            welfare_per_user: opt.welfare_per_user,
            p_opt: opt.p_opt,
            p_paper: opt.p_paper,
            t_lo: opt.t_lo,
            t_hi: opt.t_hi,
            t_mid,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benefit::BenefitSpec;
    use crate::equilibrium::DeviationKind;
    use crate::model::utility;
    use crate::numerics::symmetric_production;
    use crate::topology::{make_topology, TopologyKind};
    use approx::assert_abs_diff_eq;

    fn cfg(n: usize, rho: f64, c: f64, gamma: f64) -> GameConfig {
        GameConfig::new(n, rho, c, gamma, BenefitSpec::log1p(1.0)).unwrap()
    }

    #[test]
    fn optimum_examples() {
        let opt = social_optimum(&cfg(10, 0.8, 0.1, 0.5)).unwrap();
        assert_eq!(opt.d_opt, 4);
        assert_abs_diff_eq!(opt.x_opt, 9.866252, epsilon = 1e-5);
        assert!(opt.foc_residual <= 1e-8);
        assert!(!opt.boundary_tie);

        let opt = social_optimum(&cfg(10, 0.8, 0.1, 2.0)).unwrap();
        assert_eq!(opt.d_opt, 0);
        assert_abs_diff_eq!(opt.x_opt, 9.0, epsilon = 1e-9);

        let opt = social_optimum(&cfg(10, 0.8, 0.1, 0.0)).unwrap();
        assert_eq!(opt.d_opt, 9);
    }

    #[test]
    fn exact_threshold_tie_sets_the_boundary_flag() {
        let mut config = cfg(10, 0.8, 0.1, 0.5);
        config.gamma = 2.0 * delta_q(3, &config).unwrap();
        let opt = social_optimum(&config).unwrap();
        assert!(opt.boundary_tie);
        assert_eq!(opt.d_opt, 3);
    }

    #[test]
    fn degree_rule_matches_brute_force() {
        for gamma in [0.05, 0.2, 0.5, 0.9, 1.4, 2.5] {
            let config = cfg(10, 0.8, 0.1, gamma);
            let opt = social_optimum(&config).unwrap();
            let mut best = (f64::NEG_INFINITY, 0usize);
            for d in 0..10usize {
                let x = planner_production(d, &config).unwrap();
                let w = symmetric_welfare_per_user(x, d, &config);
                if w > best.0 {
                    best = (w, d);
                }
            }
            assert_eq!(opt.d_opt, best.1, "gamma = {gamma}");
            assert_abs_diff_eq!(opt.welfare_per_user, best.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn price_examples() {
        let config = cfg(10, 0.8, 0.1, 0.5);
        let x1 = planner_production(1, &config).unwrap();
        let (p, _, _, p_paper) = optimal_prices(1, x1, &config).unwrap();
        assert_abs_diff_eq!(p, 0.05, epsilon = 1e-9);
        assert_abs_diff_eq!(p_paper, 0.05, epsilon = 1e-12);

        let x4 = planner_production(4, &config).unwrap();
        let (p, t_lo, t_hi, p_paper) = optimal_prices(4, x4, &config).unwrap();
        assert_abs_diff_eq!(p, 0.02, epsilon = 1e-9);
        assert_abs_diff_eq!(p_paper, 0.08, epsilon = 1e-12);
        assert!(t_lo.unwrap() < t_hi.unwrap());

        let (p, _, t_hi, _) = optimal_prices(0, 9.0, &config).unwrap();
        assert_eq!(p, 0.0);
        assert!(t_hi.is_none());
    }

    #[test]
    fn priced_optimum_is_strict_inside_the_transfer_range() {
        let config = cfg(10, 0.8, 0.1, 0.5);
        let opt = social_optimum(&config).unwrap();
        let (t_lo, t_hi) = (opt.t_lo.unwrap(), opt.t_hi.unwrap());
        let t = 0.5 * (t_lo + t_hi);
        let report = verify_priced_equilibrium(&config, &opt, t).unwrap();
        assert!(report.is_strict(), "witnesses: {:?}", report.witnesses);

        // beyond the upper bound a delete-link deviation appears
        let report = verify_priced_equilibrium(&config, &opt, t_hi + 1e-6).unwrap();
        assert!(!report.is_strict());
        let w = &report.witnesses[0];
        assert_eq!(w.kind, DeviationKind::LinkSet);
        assert!(w.new_outbound.len() < 2);

        // below the lower bound an add-link deviation appears
        let report = verify_priced_equilibrium(&config, &opt, t_lo - 1e-6).unwrap();
        assert!(!report.is_strict());
        let w = &report.witnesses[0];
        assert_eq!(w.kind, DeviationKind::LinkSet);
        assert!(w.new_outbound.len() > 2);
    }

    #[test]
    fn unpriced_optimum_fails_with_a_production_witness() {
        let config = cfg(10, 0.8, 0.1, 0.5);
        let opt = social_optimum(&config).unwrap();
        let profile = SymmetricProfile {
            x: opt.x_opt,
            d: opt.d_opt,
        }
        .realize(10)
        .unwrap();
        let report = verify_strict_nash(&profile, &config, None).unwrap();
        assert!(!report.is_strict());
        assert!(report
            .witnesses
            .iter()
            .any(|w| w.kind == DeviationKind::Production));
    }

    #[test]
    fn parity_infeasible_realization_is_reported() {
        let config = cfg(9, 0.8, 0.1, 0.42);
        let opt = social_optimum(&config).unwrap();
        assert_eq!(opt.d_opt % 2, 1, "want an odd optimal degree here");
        let err = verify_priced_equilibrium(&config, &opt, 0.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nearest feasible n is 10"), "{msg}");
    }

    #[test]
    fn welfare_gap_examples() {
        // realized optimum: gap ~ 0
        let config = cfg(10, 0.8, 0.1, 0.5);
        let opt = social_optimum(&config).unwrap();
        let profile = SymmetricProfile {
            x: opt.x_opt,
            d: opt.d_opt,
        }
        .realize(10)
        .unwrap();
        let gap = welfare_gap(&profile, &config).unwrap();
        assert_abs_diff_eq!(gap.gap, 0.0, epsilon = 1e-8);

        // the empty network at autarkic production is inefficient when links
        // are cheap
        let empty = StrategyProfile::uniform(9.0, vec![vec![0; 10]; 10]).unwrap();
        let gap = welfare_gap(&empty, &config).unwrap();
        assert!(gap.gap > 0.1);
    }

    #[test]
    fn symmetric_closed_form_matches_summed_utilities() {
        // ring of 5 with the degree-2 symmetric production
        let config = cfg(5, 0.8, 0.1, 0.3);
        let (x_s, _) = symmetric_production(2, &config).unwrap();
        let g = make_topology(TopologyKind::Ring { k: 1 }, 5).unwrap();
        let profile = StrategyProfile::uniform(x_s, g).unwrap();
        let total = social_welfare(&profile, &config).unwrap();
        let closed = 5.0 * symmetric_welfare_per_user(x_s, 2, &config);
        assert_abs_diff_eq!(total, closed, epsilon = 1e-9);
        let _ = utility(&profile, 0, &config).unwrap();
    }

    #[test]
    fn pricing_sweep_trends() {
        let config = cfg(10, 0.8, 0.1, 0.5);
        let gammas: Vec<f64> = (1..=40).map(|k| 0.05 * k as f64).collect();
        let rows = pricing_sweep(&config, &gammas).unwrap();
        // the printed price form and the transfer midpoint are non-increasing
        // in gamma, and the midpoint goes negative for expensive links
        let mut last_paper = f64::INFINITY;
        let mut last_mid = f64::INFINITY;
        let mut saw_negative_mid = false;
        for row in &rows {
            assert!(row.p_paper <= last_paper + 1e-12);
            last_paper = row.p_paper;
            if let Some(mid) = row.t_mid {
                assert!(mid <= last_mid + 1e-9, "gamma = {}", row.gamma);
                last_mid = mid;
                if mid < 0.0 {
                    saw_negative_mid = true;
                }
            }
        }
        assert!(saw_negative_mid);
    }
}
