//! Property suites for the model invariants and the proof-backed
//! monotonicity/sign facts.

use proptest::prelude::*;

use pnf_core::*;

fn arb_config() -> impl Strategy<Value = GameConfig> {
    (3usize..8, 0.2f64..0.95, 0.02f64..0.6, 0.0f64..1.5).prop_map(|(n, rho, c, gamma)| {
        GameConfig::new(n, rho, c, gamma, BenefitSpec::log1p(1.0)).unwrap()
    })
}

fn arb_profile(n: usize) -> impl Strategy<Value = StrategyProfile> {
    let g = proptest::collection::vec(proptest::collection::vec(0u8..2, n), n);
    let x = proptest::collection::vec(0.0f64..9.0, n);
    (x, g).prop_map(move |(x, mut g)| {
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = 0;
        }
        StrategyProfile::new(x, g).unwrap()
    })
}

/// Random subscription matrix without mutual links.
fn arb_one_way_profile(n: usize) -> impl Strategy<Value = StrategyProfile> {
    arb_profile(n).prop_map(|mut p| {
        let n = p.n();
        for i in 0..n {
            for j in (i + 1)..n {
                if p.g[i][j] == 1 && p.g[j][i] == 1 {
                    p.g[j][i] = 0;
                }
            }
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perceived_content_bounds(config in arb_config(), seed in 0u64..1000) {
        let n = config.n;
        let g = make_topology(TopologyKind::Random { density: 0.4, seed }, n).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7 + seed as f64 % 5.0) % 9.0).collect();
        let profile = StrategyProfile::new(x, g).unwrap();
        let friends = profile.friends().unwrap();
        for i in 0..n {
            let perceived = perceived_content(&profile.x, &friends, i, config.rho).unwrap();
            prop_assert!(perceived >= profile.x[i] - 1e-12);
            let friend_sum: f64 = friends.neighbors(i).map(|j| profile.x[j].powf(config.rho)).sum();
            if friend_sum == 0.0 {
                prop_assert!((perceived - profile.x[i]).abs() <= 1e-9 * (1.0 + profile.x[i]));
            } else {
                prop_assert!(perceived > profile.x[i]);
            }
        }
    }

    #[test]
    fn marginal_benefit_decreasing_in_own_production(
        rho in 0.2f64..0.95,
        x in 0.01f64..9.0,
        s in 0.0f64..20.0,
    ) {
        let b = BenefitSpec::log1p(1.0);
        let at = |x: f64| {
            let perceived = (x.powf(rho) + s).powf(1.0 / rho);
            marginal_benefit(x, perceived, &b, rho)
        };
        prop_assert!(at(x * 1.01) < at(x));
    }

    #[test]
    fn marginal_benefit_decreasing_in_friends_production(
        rho in 0.5f64..0.95,
        x in 0.5f64..9.0,
        s in 0.5f64..20.0,
    ) {
        // Raising a friend's contribution lowers the incentive to produce.
        // For log1p the cross effect is negative only once perceived content
        // exceeds (1 - rho)/rho; these ranges keep X above that threshold.
        // Every first-order-condition point satisfies it whenever rho >= c,
        // since there X is at least the autarkic level (1 - c)/c.
        let b = BenefitSpec::log1p(1.0);
        let at = |s: f64| {
            let perceived = (x.powf(rho) + s).powf(1.0 / rho);
            marginal_benefit(x, perceived, &b, rho)
        };
        prop_assert!(at(s * 1.01) < at(s));
    }

    #[test]
    fn zero_link_cost_reduces_utility_to_content_utility(
        config in arb_config(),
        seed in 0u64..1000,
    ) {
        let mut config = config;
        config.gamma = 0.0;
        let n = config.n;
        let g = make_topology(TopologyKind::Random { density: 0.4, seed }, n).unwrap();
        let x: Vec<f64> = (0..n).map(|i| 0.3 + i as f64).collect();
        let profile = StrategyProfile::new(x, g).unwrap();
        for i in 0..n {
            prop_assert_eq!(
                utility(&profile, i, &config).unwrap(),
                content_utility(&profile, i, &config).unwrap()
            );
        }
    }

    #[test]
    fn friend_closure_idempotent_and_symmetric(profile in arb_profile(6)) {
        let f = profile.friends().unwrap();
        let again = friend_closure(&f.gbar).unwrap();
        prop_assert_eq!(&again.gbar, &f.gbar);
        for i in 0..6 {
            prop_assert_eq!(f.gbar[i][i], 0);
            for j in 0..6 {
                prop_assert_eq!(f.gbar[i][j], f.gbar[j][i]);
            }
        }
    }

    #[test]
    fn pricing_transfers_are_internal(
        profile in arb_one_way_profile(6),
        p in -0.2f64..0.2,
        t in -0.5f64..0.5,
    ) {
        let config = GameConfig::new(6, 0.7, 0.1, 0.4, BenefitSpec::log1p(1.0)).unwrap();
        let pricing = PricingScheme { p, t };
        let priced: f64 = (0..6)
            .map(|i| priced_utility(&profile, i, &config, &pricing).unwrap())
            .sum();
        let plain: f64 = (0..6).map(|i| utility(&profile, i, &config).unwrap()).sum();
        prop_assert!((priced - plain).abs() <= 1e-9 * (1.0 + plain.abs()));
    }

    #[test]
    fn solver_hits_decreasing_targets(a in 0.2f64..5.0, b in 0.1f64..4.0, target in 0.01f64..0.9) {
        // f(x) = a / (a + b x) is strictly decreasing from 1 to 0
        let f = move |x: f64| a / (a + b * x);
        let settings = SolverSettings::default();
        let root = solve_decreasing_root(f, target, 1.0, &settings).unwrap();
        let exact = a * (1.0 - target) / (b * target);
        prop_assert!((root - exact).abs() <= 1e-9 * (1.0 + exact));
    }

    #[test]
    fn delta_r_positive_and_decreasing_in_degree(
        rho in 0.4f64..0.95,
        c in 0.02f64..0.3,
        x in 0.1f64..5.0,
        d_i in 0usize..7,
    ) {
        // rho >= c keeps every re-optimized consumption point inside the
        // region where a friend's content substitutes for own production
        let config = GameConfig::new(10, rho, c, 0.5, BenefitSpec::log1p(1.0)).unwrap();
        let here = delta_r(d_i, x, c, &config).unwrap();
        let next = delta_r(d_i + 1, x, c, &config).unwrap();
        prop_assert!(here > 0.0);
        prop_assert!(next < here);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn search_is_reproducible(seed in 0u64..64) {
        let config = GameConfig::new(6, 0.8, 0.1, 0.3, BenefitSpec::log1p(1.0)).unwrap();
        let a = search_equilibrium(&config, seed, 80).unwrap();
        let b = search_equilibrium(&config, seed, 80).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn verified_searches_satisfy_the_equilibrium_necessary_conditions(seed in 0u64..32) {
        // no mutual links, no zero production, nothing above the autarkic level
        let config = GameConfig::new(7, 0.8, 0.1, 0.25, BenefitSpec::log1p(1.0)).unwrap();
        let xbar = max_production(&config).unwrap();
        if let Some(profile) = search_equilibrium(&config, seed, 120).unwrap().profile {
            for i in 0..7 {
                prop_assert!(profile.x[i] > 0.0);
                prop_assert!(profile.x[i] <= xbar + 1e-8);
                for j in 0..7 {
                    prop_assert!(!(profile.g[i][j] == 1 && profile.g[j][i] == 1));
                }
            }
            // symmetric-production equilibria have uniform degrees
            let class = classify_profile(&profile);
            prop_assert_ne!(class.kind, Classification::None);
        }
    }
}
