use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::benefit::BenefitSpec;
use crate::error::{Error, Result};

/// Parameters of one PNF game instance.
///
/// The `appendix_exponent` switch selects an alternative marginal-benefit
/// ratio exponent rho*(1-rho) instead of (1-rho); it exists for comparing
/// the two symmetric first-order-condition conventions and is off by
/// default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    /// Population size, at least 3.
    pub n: usize,
    /// Diversity parameter, strictly between 0 and 1.
    pub rho: f64,
    /// Marginal production cost.
    pub c: f64,
    /// Per-subscription link cost.
    pub gamma: f64,
    #[serde(default)]
    pub benefit: BenefitSpec,
    #[serde(default)]
    pub appendix_exponent: bool,
}

impl GameConfig {
    pub fn new(n: usize, rho: f64, c: f64, gamma: f64, benefit: BenefitSpec) -> Result<Self> {
        let cfg = GameConfig {
            n,
            rho,
            c,
            gamma,
            benefit,
            appendix_exponent: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidConfig(format!(
                "population must satisfy n >= 3, got {}",
                self.n
            )));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "rho must lie in (0, 1), got {}",
                self.rho
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "production cost c must be positive, got {}",
                self.c
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "link cost gamma must be nonnegative, got {}",
                self.gamma
            )));
        }
        self.benefit.validate()?;
        if self.benefit.marginal_at_zero() <= self.c {
            return Err(Error::InvalidConfig(format!(
                "network not socially valuable: v'(0) = {} must exceed c = {}",
                self.benefit.marginal_at_zero(),
                self.c
            )));
        }
        Ok(())
    }

    /// Exponent applied to the perceived/own-production ratio in the
    /// marginal benefit of production.
    pub fn ratio_exponent(&self) -> f64 {
        if self.appendix_exponent {
            self.rho * (1.0 - self.rho)
        } else {
            1.0 - self.rho
        }
    }

    /// Marginal benefit of production under this config's conventions.
    pub fn marginal_benefit(&self, x: f64, perceived: f64) -> f64 {
        marginal_benefit_with_exponent(x, perceived, &self.benefit, self.ratio_exponent())
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: GameConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// e(x, X) = v'(X) * (X/x)^(1-rho), the marginal benefit of production.
///
/// At x = 0 with a positive perceived amount the marginal benefit diverges;
/// this returns the +infinity sentinel rather than an error so that root
/// brackets stay well-defined. The isolated limit (x = 0, X = 0) is v'(0).
pub fn marginal_benefit(x: f64, perceived: f64, benefit: &BenefitSpec, rho: f64) -> f64 {
    marginal_benefit_with_exponent(x, perceived, benefit, 1.0 - rho)
}

fn marginal_benefit_with_exponent(
    x: f64,
    perceived: f64,
    benefit: &BenefitSpec,
    exponent: f64,
) -> f64 {
    if x == 0.0 {
        if perceived > 0.0 {
            return f64::INFINITY;
        }
        return benefit.marginal_at_zero();
    }
    benefit.deriv(perceived) * (perceived / x).powf(exponent)
}

/// One user's full strategy: production level and outbound subscriptions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    /// Production levels, one per user.
    pub x: Vec<f64>,
    /// Subscription matrix, row-major; g[i][j] = 1 iff i subscribes to j.
    pub g: Vec<Vec<u8>>,
}

impl StrategyProfile {
    pub fn new(x: Vec<f64>, g: Vec<Vec<u8>>) -> Result<Self> {
        let p = StrategyProfile { x, g };
        p.validate()?;
        Ok(p)
    }

    /// Every user produces `x` on the given subscription graph.
    pub fn uniform(x: f64, g: Vec<Vec<u8>>) -> Result<Self> {
        let n = g.len();
        Self::new(vec![x; n], g)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if self.g.len() != n {
            return Err(Error::InvalidProfile(format!(
                "subscription matrix has {} rows for {} users",
                self.g.len(),
                n
            )));
        }
        for (i, row) in self.g.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidProfile(format!(
                    "subscription row {} has length {}, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
            if row[i] != 0 {
                return Err(Error::InvalidProfile(format!(
                    "self-subscription at user {}",
                    i
                )));
            }
            if let Some(j) = row.iter().position(|&v| v > 1) {
                return Err(Error::InvalidProfile(format!(
                    "subscription entry ({i}, {j}) must be 0 or 1"
                )));
            }
        }
        for (i, &xi) in self.x.iter().enumerate() {
            if !(xi >= 0.0 && xi.is_finite()) {
                return Err(Error::InvalidProfile(format!(
                    "production of user {i} must be a nonnegative real, got {xi}"
                )));
            }
        }
        Ok(())
    }

    pub fn outbound(&self, i: usize) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.g[i][j] == 1).collect()
    }

    pub fn outbound_count(&self, i: usize) -> usize {
        self.g[i].iter().filter(|&&v| v == 1).count()
    }

    pub fn inbound_count(&self, i: usize) -> usize {
        (0..self.n()).filter(|&j| self.g[j][i] == 1).count()
    }

    pub fn friends(&self) -> Result<FriendGraph> {
        friend_closure(&self.g)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let p: StrategyProfile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Symmetric closure of the subscription graph: two users are friends iff
/// either subscribes to the other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriendGraph {
    pub gbar: Vec<Vec<u8>>,
}

impl FriendGraph {
    pub fn n(&self) -> usize {
        self.gbar.len()
    }

    pub fn are_friends(&self, i: usize, j: usize) -> bool {
        self.gbar[i][j] == 1
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.gbar[i]
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1)
            .map(|(j, _)| j)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.gbar[i].iter().filter(|&&v| v == 1).count()
    }
}

/// gbar[i][j] = max(g[i][j], g[j][i]); idempotent on already-symmetric input.
pub fn friend_closure(g: &[Vec<u8>]) -> Result<FriendGraph> {
    let n = g.len();
    for (i, row) in g.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidProfile(format!(
                "subscription matrix is not square: row {} has length {}",
                i,
                row.len()
            )));
        }
        if row[i] != 0 {
            return Err(Error::InvalidProfile(format!(
                "nonzero diagonal at user {i}"
            )));
        }
    }
    let mut gbar = vec![vec![0u8; n]; n];
    for i in 0..n {
        for j in 0..n {
            gbar[i][j] = g[i][j].max(g[j][i]).min(1);
        }
    }
    Ok(FriendGraph { gbar })
}

/// X_i = (x_i^rho + sum over friends x_j^rho)^(1/rho).
pub fn perceived_content(x: &[f64], friends: &FriendGraph, i: usize, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "rho must lie in (0, 1), got {rho}"
        )));
    }
    let mut sum = x[i].powf(rho);
    for j in friends.neighbors(i) {
        sum += x[j].powf(rho);
    }
    Ok(sum.powf(1.0 / rho))
}

/// Flat-rate pricing: p per unit of content acquired from a friend and t per
/// subscription, both paid to the user whose content/subscription it is.
/// Either may be negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricingScheme {
    pub p: f64,
    pub t: f64,
}

/// u_i = v(X_i) - c*x_i - gamma*|outbound subscriptions of i|.
///
/// The link cost is charged on outbound subscriptions only.
pub fn utility(profile: &StrategyProfile, i: usize, config: &GameConfig) -> Result<f64> {
    let friends = profile.friends()?;
    let perceived = perceived_content(&profile.x, &friends, i, config.rho)?;
    Ok(config.benefit.value(perceived)
        - config.c * profile.x[i]
        - config.gamma * profile.outbound_count(i) as f64)
}

/// r_i = v(X_i) - c*x_i, the utility net of link costs.
pub fn content_utility(profile: &StrategyProfile, i: usize, config: &GameConfig) -> Result<f64> {
    let friends = profile.friends()?;
    let perceived = perceived_content(&profile.x, &friends, i, config.rho)?;
    Ok(config.benefit.value(perceived) - config.c * profile.x[i])
}

/// Utility under the pricing scheme.
///
/// The subscriber pays gamma + t per outbound link and p per unit of content
/// acquired from each friend; the user on the other side receives t per
/// inbound subscription and p per unit of own content each friend acquires:
///
///   u~_i = v(X_i) - c*x_i - p*sum_{j in friends(i)} x_j + p*x_i*deg(i)
///          - (gamma + t)*|outbound(i)| + t*|inbound(i)|
///
/// With p = t = 0 this equals `utility` exactly, and all p/t transfers cancel
/// in the sum over users.
pub fn priced_utility(
    profile: &StrategyProfile,
    i: usize,
    config: &GameConfig,
    pricing: &PricingScheme,
) -> Result<f64> {
    let friends = profile.friends()?;
    let perceived = perceived_content(&profile.x, &friends, i, config.rho)?;
    let friend_content: f64 = friends.neighbors(i).map(|j| profile.x[j]).sum();
    let degree = friends.degree(i) as f64;
    let outbound = profile.outbound_count(i) as f64;
    let inbound = profile.inbound_count(i) as f64;
    Ok(
        config.benefit.value(perceived) - config.c * profile.x[i] - pricing.p * friend_content
            + pricing.p * profile.x[i] * degree
            - (config.gamma + pricing.t) * outbound
            + pricing.t * inbound,
    )
}

/// W = sum of user utilities.
pub fn social_welfare(profile: &StrategyProfile, config: &GameConfig) -> Result<f64> {
    let mut w = 0.0;
    for i in 0..profile.n() {
        w += utility(profile, i, config)?;
    }
    Ok(w)
}

/// Per-user welfare of a realized symmetric profile (x, d) with no mutual
/// links: v((1+d)^(1/rho) x) - c*x - (d/2) gamma.
pub fn symmetric_welfare_per_user(x: f64, d: usize, config: &GameConfig) -> f64 {
    let m = (1.0 + d as f64).powf(1.0 / config.rho);
    config.benefit.value(m * x) - config.c * x - 0.5 * d as f64 * config.gamma
}

/// A representative symmetric profile: common production and common degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricProfile {
    pub x: f64,
    pub d: usize,
}

impl SymmetricProfile {
    /// Realize on n users as a d-regular friend graph; requires n*d even.
    pub fn realize(&self, n: usize) -> Result<StrategyProfile> {
        let g = crate::topology::make_topology(
            crate::topology::TopologyKind::Regular { d: self.d },
            n,
        )?;
        StrategyProfile::uniform(self.x, g)
    }
}
