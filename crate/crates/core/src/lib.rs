//! Production and network formation (PNF) game with content heterogeneity.
//!
//! Users choose a production level and a set of outbound subscriptions;
//! content flows both ways across the friend graph (the symmetric closure of
//! subscriptions) and is aggregated with a CES taste for diversity before
//! entering a concave benefit. This crate provides:
//!
//! - the model: utilities, content utilities, priced utilities, welfare,
//!   topology generators ([`model`], [`topology`]);
//! - scalar numerics: bracketing/bisection root solver and the named
//!   quantities of the symmetric analysis ([`numerics`]);
//! - equilibrium machinery: exact best responses, strict-Nash verification,
//!   link-cost regions for symmetric profiles, structural audits of
//!   asymmetric profiles, and a seeded Monte-Carlo equilibrium search
//!   ([`equilibrium`], [`search`]);
//! - the social optimum and the pricing scheme sustaining it ([`welfare`]).

#![forbid(unsafe_code)]
// adjacency-matrix code reads better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod benefit;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod numerics;
pub mod report;
pub mod search;
pub mod topology;
pub mod welfare;

pub use benefit::{BenefitKind, BenefitSpec};
pub use equilibrium::{
    best_response, classify_profile, gamma_region, gamma_region_table, production_fixed_point,
    structural_audit, verify_strict_nash, AuditCheck, BestResponse, Classification, DeviationKind,
    DeviationWitness, EquilibriumReport, GammaInterval, GammaTable, ProfileClass, TwoType, Verdict,
};
pub use error::{Error, Result};
pub use model::{
    content_utility, friend_closure, marginal_benefit, perceived_content, priced_utility,
    social_welfare, symmetric_welfare_per_user, utility, FriendGraph, GameConfig, PricingScheme,
    StrategyProfile, SymmetricProfile,
};
pub use numerics::{
    best_production, delta_q, delta_r, max_production, planner_production, solve_decreasing_root,
    symmetric_production, SolverSettings,
};
pub use search::{
    influencer_scaling, search_equilibrium, InitKind, ScalingResult, ScalingRow, ScalingSummary,
    SearchOutcome, DEFAULT_MAX_SWEEPS,
};
pub use topology::{make_topology, TopologyKind};
pub use welfare::{
    optimal_prices, pricing_sweep, social_optimum, verify_priced_equilibrium, welfare_gap,
    PricingRow, SocialOptimum, WelfareGap,
};
