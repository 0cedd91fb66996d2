use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GameConfig;

/// Root-solver controls. The defaults are used everywhere in the library.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub abs_tol: f64,
    pub max_bracket_doublings: u32,
    pub max_bisection_iters: u32,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            abs_tol: 1e-10,
            max_bracket_doublings: 200,
            max_bisection_iters: 200,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !self.abs_tol.is_finite() || self.abs_tol <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        Ok(())
    }
}

/// Solve f(x) = target for a continuous strictly decreasing f on (0, inf).
///
/// Brackets by halving/doubling from `initial`, then bisects until the
/// bracket is narrower than `abs_tol`. f may return +infinity near zero.
pub fn solve_decreasing_root(
    f: impl Fn(f64) -> f64,
    target: f64,
    initial: f64,
    settings: &SolverSettings,
) -> Result<f64> {
    settings.validate()?;
    if !(initial > 0.0 && initial.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "initial bracket point must be positive, got {initial}"
        )));
    }
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_nan() {
            return Err(Error::NonFinite(format!("f({x}) is NaN")));
        }
        Ok(y)
    };

    let mut lo = initial;
    let mut doublings = 0;
    while eval(lo)? <= target {
        lo /= 2.0;
        doublings += 1;
        if doublings > settings.max_bracket_doublings {
            return Err(Error::NoRoot(format!(
                "f stays at or below the target {target} down to x = {lo}"
            )));
        }
    }
    let mut hi = lo.max(initial);
    doublings = 0;
    while eval(hi)? >= target {
        hi *= 2.0;
        doublings += 1;
        if doublings > settings.max_bracket_doublings {
            return Err(Error::NoRoot(format!(
                "f stays at or above the target {target} up to x = {hi}"
            )));
        }
    }

    let mut iters = 0;
    while hi - lo > settings.abs_tol {
        iters += 1;
        if iters > settings.max_bisection_iters {
            return Err(Error::NoRoot(format!(
                "bisection stalled with bracket width {:.3e} > {:.1e}",
                hi - lo,
                settings.abs_tol
            )));
        }
        let mid = 0.5 * (lo + hi);
        if eval(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Autarkic production level: the unique solution of v'(x) = c.
pub fn max_production(config: &GameConfig) -> Result<f64> {
    if config.benefit.marginal_at_zero() <= config.c {
        return Err(Error::InvalidConfig(format!(
            "network not socially valuable: v'(0) = {} must exceed c = {}",
            config.benefit.marginal_at_zero(),
            config.c
        )));
    }
    solve_decreasing_root(
        |x| config.benefit.deriv(x),
        config.c,
        1.0,
        &SolverSettings::default(),
    )
}

/// Optimal production against a fixed friends' aggregate s = sum x_j^rho:
/// solves e(z, (z^rho + s)^(1/rho)) = c_eff. Requires c_eff > 0 below the
/// zero-production marginal benefit; always returns z > 0.
pub fn best_production(s: f64, c_eff: f64, config: &GameConfig) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "friends' aggregate must be a nonnegative real, got {s}"
        )));
    }
    if c_eff.is_nan() || c_eff <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "effective marginal cost must be positive, got {c_eff}"
        )));
    }
    let rho = config.rho;
    let f = |z: f64| {
        let perceived = (z.powf(rho) + s).powf(1.0 / rho);
        config.marginal_benefit(z, perceived)
    };
    let initial = (config.benefit.marginal_at_zero() / c_eff).max(1e-3);
    solve_decreasing_root(f, c_eff, initial, &SolverSettings::default())
}

/// Common production x_s(d) of a symmetric profile with degree d, together
/// with the perceived amount X_s(d) = (1+d)^(1/rho) x_s(d).
///
/// x_s decreases and X_s increases with d.
pub fn symmetric_production(d: usize, config: &GameConfig) -> Result<(f64, f64)> {
    let m = (1.0 + d as f64).powf(1.0 / config.rho);
    let w = m.powf(config.ratio_exponent());
    let perceived = solve_decreasing_root(
        |y| config.benefit.deriv(y),
        config.c / w,
        1.0,
        &SolverSettings::default(),
    )?;
    Ok((perceived / m, perceived))
}

/// Content utility v(X(z)) - c_eff * z at the optimal z for the aggregate s,
/// along with that z.
pub(crate) fn content_utility_at(s: f64, c_eff: f64, config: &GameConfig) -> Result<(f64, f64)> {
    let z = best_production(s, c_eff, config)?;
    let perceived = (z.powf(config.rho) + s).powf(1.0 / config.rho);
    Ok((config.benefit.value(perceived) - c_eff * z, z))
}

/// Content-utility gain from raising a user's degree d_i by one when every
/// friend produces x, with production re-optimized at marginal cost c_eff.
///
/// Strictly positive and strictly decreasing in d_i.
pub fn delta_r(d_i: usize, x: f64, c_eff: f64, config: &GameConfig) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "friend production must be a nonnegative real, got {x}"
        )));
    }
    let unit = x.powf(config.rho);
    let (with_link, _) = content_utility_at((d_i as f64 + 1.0) * unit, c_eff, config)?;
    let (without, _) = content_utility_at(d_i as f64 * unit, c_eff, config)?;
    Ok(with_link - without)
}

/// Planner's production for degree d: solves
/// (1+d)^(1/rho) v'((1+d)^(1/rho) x) = c. Exceeds the private x_s(d) for
/// d >= 1 and coincides with the autarkic level at d = 0.
pub fn planner_production(d: usize, config: &GameConfig) -> Result<f64> {
    let m = (1.0 + d as f64).powf(1.0 / config.rho);
    let perceived = solve_decreasing_root(
        |y| config.benefit.deriv(y),
        config.c / m,
        1.0,
        &SolverSettings::default(),
    )?;
    Ok(perceived / m)
}

/// Planner's per-user content utility at degree d.
pub fn planner_content_utility(d: usize, config: &GameConfig) -> Result<f64> {
    let x = planner_production(d, config)?;
    let m = (1.0 + d as f64).powf(1.0 / config.rho);
    Ok(config.benefit.value(m * x) - config.c * x)
}

/// Increment of the planner's content utility from degree d to d+1.
/// Strictly positive and strictly decreasing in d.
pub fn delta_q(d: usize, config: &GameConfig) -> Result<f64> {
    Ok(planner_content_utility(d + 1, config)? - planner_content_utility(d, config)?)
}
