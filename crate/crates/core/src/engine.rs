//! Expected payoffs of strategy pairs and simulated game outcomes.
//!
//! Two evaluators are provided. The semi-analytic one is exact for the GBM
//! model: against a randomized opponent, a threshold deviation `L` earns
//! `(x/L)^eta g(L) (1 - p Gamma(L))`, and a randomized strategy is the mixture
//! over `u` of its level times. The path evaluator simulates the state on a
//! time grid and detects the triggers on that grid.
//!
//! Every path `i` draws from its own ChaCha8 stream `(seed, i)`, results are
//! collected in path order, and sums are pairwise, so estimates do not depend
//! on the number of worker threads.

use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{EquilibriumProfile, Player, RandomizedStopRule, StopTrigger, Strategy};
use crate::error::{Error, Result};
use crate::model::GbmRealOptionModel;
use crate::regions::{b_inverse, boundary_b};
use crate::stopping::{full, DiffusionSpec, ValueOracle};

/// Largest admissible `exp(-r t_max)`.
pub const TRUNCATION_BUDGET: f64 = 1e-4;

/// A path is abandoned once `exp(-r t) V(X_t)` falls below this fraction of
/// `V(x)`; `exp(-r t) V(X_t)` bounds everything still obtainable.
pub const ABANDON_FRACTION: f64 = 1e-9;

/// Path steps are enlarged while the next trigger is at least this many
/// standard deviations of the step away.
const SAFE_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimMode {
    #[serde(rename = "semi-analytic")]
    SemiAnalytic,
    #[serde(rename = "path")]
    Path,
}

impl SimMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SimMode::SemiAnalytic => "semi-analytic",
            SimMode::Path => "path",
        }
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semi-analytic" | "semi" => Ok(SimMode::SemiAnalytic),
            "path" => Ok(SimMode::Path),
            _ => Err(Error::InvalidConfig(format!("unknown mode {s:?} (expected semi-analytic or path)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: u64,
    pub seed: u64,
    /// Base time step of the path evaluator.
    pub dt: f64,
    /// Horizon of the path evaluator; later stops pay nothing.
    pub t_max: f64,
    pub mode: SimMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { n_paths: 10_000, seed: 0, dt: 1e-4, t_max: 1000.0, mode: SimMode::SemiAnalytic }
    }
}

impl SimConfig {
    /// Checks the configuration against the discount rate `r`.
    pub fn validate(&self, r: f64) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidConfig("n_paths must be at least 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::InvalidConfig(format!("t_max must be positive, got {}", self.t_max)));
        }
        if self.mode == SimMode::Path && (-r * self.t_max).exp() > TRUNCATION_BUDGET {
            return Err(Error::InvalidConfig(format!(
                "exp(-r t_max) = {:.3e} exceeds the truncation budget {TRUNCATION_BUDGET:e}; raise t_max",
                (-r * self.t_max).exp()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stopper {
    Player1,
    Player2,
    Both,
    Neither,
}

impl Stopper {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stopper::Player1 => "player1",
            Stopper::Player2 => "player2",
            Stopper::Both => "both",
            Stopper::Neither => "neither",
        }
    }
}

/// One simulated play. `theta1` says whether player 2 exists from player 1's
/// point of view, and vice versa. The stopper is determined as if both exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeRecord {
    pub path_id: u64,
    pub u1: f64,
    pub u2: f64,
    pub theta1: bool,
    pub theta2: bool,
    /// Stopping level (semi-analytic) or time (path) of each player; `None`
    /// if the player never stops.
    pub stop1: Option<f64>,
    pub stop2: Option<f64>,
    pub stopper: Stopper,
    /// Level or time of the first stop; infinite if nobody stops.
    pub t_or_level: f64,
    pub r1: f64,
    pub r2: f64,
}

impl OutcomeRecord {
    pub fn payoff(&self, player: Player) -> f64 {
        match player {
            Player::One => self.r1,
            Player::Two => self.r2,
        }
    }

    /// Whether `player` exists in the opponent's eyes.
    pub fn seen_by_opponent(&self, player: Player) -> bool {
        match player {
            Player::One => self.theta2,
            Player::Two => self.theta1,
        }
    }
}

pub const OUTCOME_HEADER: &str = "path_id,u1,u2,theta1,theta2,stopper,t_or_level,r1,r2";

pub fn write_outcomes_csv<W: Write>(records: &[OutcomeRecord], mut w: W) -> Result<()> {
    writeln!(w, "{OUTCOME_HEADER}")?;
    for o in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            o.path_id,
            full(o.u1),
            full(o.u2),
            u8::from(o.theta1),
            u8::from(o.theta2),
            o.stopper.as_str(),
            full(o.t_or_level),
            full(o.r1),
            full(o.r2)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub player: u8,
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
    pub mode: SimMode,
}

/// A pure stopping rule for the deviating player.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Deviation {
    Immediate,
    /// First time the state reaches the level.
    Threshold(f64),
}

fn gbm_of(oracle: &ValueOracle) -> Result<&GbmRealOptionModel> {
    oracle.gbm().ok_or(Error::NonGbmOracle)
}

/// Opponent intensity and its jump at the first time the state reaches `level`
/// (`level > x`).
fn opponent_at(model: &GbmRealOptionModel, oracle: &ValueOracle, opponent: &Strategy, level: f64) -> Result<(f64, f64)> {
    let b_thr = model.threshold();
    Ok(match opponent {
        Strategy::Immediate => (1.0, 0.0),
        Strategy::OnePlayer if level < b_thr => (0.0, 0.0),
        Strategy::OnePlayer if level == b_thr => (1.0, 1.0),
        Strategy::OnePlayer => (1.0, 0.0),
        Strategy::Randomized(rule) if level < b_thr => (rule.intensity(boundary_b(oracle, level)?), 0.0),
        Strategy::Randomized(rule) if level == b_thr => {
            let after = rule.intensity_after_one_player_stop();
            (after, after - rule.scale)
        }
        Strategy::Randomized(rule) => (rule.intensity_after_one_player_stop(), 0.0),
    })
}

/// Expected payoff of deviation `dev` from `x` against `opponent`, for a
/// player whose prior on the opponent's existence is `p_self`.
pub fn payoff_vs_strategy(oracle: &ValueOracle, opponent: &Strategy, p_self: f64, dev: Deviation, x: f64) -> Result<f64> {
    let model = gbm_of(oracle)?;
    if !(x > 0.0) {
        return Err(Error::NonPositiveState(x));
    }
    match dev {
        Deviation::Threshold(level) if level > x => {
            let disc = model.hitting_discount(x, level)?;
            let (gamma, jump) = opponent_at(model, oracle, opponent, level)?;
            Ok(disc * model.payoff(level) * (1.0 - p_self * gamma + 0.5 * p_self * jump))
        }
        _ => {
            let a0 = opponent.atom0();
            Ok(model.payoff(x) * (1.0 - p_self * a0 + 0.5 * p_self * a0))
        }
    }
}

/// Expected payoff of stopping at the first time the state reaches `level`
/// (immediately if `level <= x`) against a randomized opponent.
///
/// Levels above the one-player threshold are evaluated exactly: the opponent
/// has by then stopped with its terminal intensity.
pub fn payoff_vs_rule(oracle: &ValueOracle, rule: &RandomizedStopRule, p_self: f64, level: f64, x: f64) -> Result<f64> {
    payoff_vs_strategy(oracle, &Strategy::Randomized(*rule), p_self, Deviation::Threshold(level), x)
}

/// The pure rule a strategy becomes for the draw `u`.
pub fn level_rule(oracle: &ValueOracle, strategy: &Strategy, u: f64, x: f64) -> Result<Deviation> {
    let level = match strategy.trigger(u) {
        StopTrigger::Immediate => return Ok(Deviation::Immediate),
        StopTrigger::BeliefLevel(z) => b_inverse(oracle, z)?,
        StopTrigger::OnePlayerRegion => b_inverse(oracle, 0.0)?,
    };
    Ok(if level > x { Deviation::Threshold(level) } else { Deviation::Immediate })
}

/// Average over `u_grid` of the payoff of `player`'s `u`-level time against the
/// opponent's equilibrium strategy.
pub fn integrate_over_levels(oracle: &ValueOracle, profile: &EquilibriumProfile, player: Player, u_grid: &[f64]) -> Result<f64> {
    if u_grid.is_empty() {
        return Err(Error::InvalidConfig("empty u-grid".into()));
    }
    let own = profile.strategy(player);
    let opponent = profile.strategy(player.other());
    let p = profile.prior(player);
    let values = u_grid
        .iter()
        .map(|&u| {
            if !(0.0..1.0).contains(&u) {
                return Err(Error::InvalidConfig(format!("u must lie in [0, 1), got {u}")));
            }
            payoff_vs_strategy(oracle, opponent, p, level_rule(oracle, own, u, profile.x)?, profile.x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&values) / values.len() as f64)
}

/// Midpoint grid of `n` points on `[0, 1)`.
pub fn midpoint_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

/// Sum with `O(log n)` error growth and a fixed association order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = pairwise_sum(v) / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = v.iter().map(|a| (a - mean) * (a - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct Draws {
    u1: f64,
    u2: f64,
    theta1: bool,
    theta2: bool,
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

fn draw(rng: &mut ChaCha8Rng, profile: &EquilibriumProfile) -> Draws {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let t1: f64 = rng.random();
    let t2: f64 = rng.random();
    Draws { u1, u2, theta1: t1 < profile.p1, theta2: t2 < profile.p2 }
}

/// Payoffs `(r1, r2)` when player `i` earns `own_i` upon stopping and the order
/// of play is `cmp` (`Less`: player 1 first).
fn settle(own1: f64, own2: f64, order: Option<std::cmp::Ordering>, theta1: bool, theta2: bool) -> (f64, f64, Stopper) {
    use std::cmp::Ordering::*;
    let stopper = match order {
        Some(Less) => Stopper::Player1,
        Some(Greater) => Stopper::Player2,
        Some(Equal) => Stopper::Both,
        None => Stopper::Neither,
    };
    let share = |own: f64, theta: bool, first: bool, tie: bool| {
        if !theta || first {
            own
        } else if tie {
            0.5 * own
        } else {
            0.0
        }
    };
    let tie = stopper == Stopper::Both;
    (
        share(own1, theta1, stopper == Stopper::Player1, tie),
        share(own2, theta2, stopper == Stopper::Player2, tie),
        stopper,
    )
}

/// Stopping level and discounted payoff of a pure rule in the semi-analytic evaluator.
fn level_and_value(model: &GbmRealOptionModel, dev: Deviation, x: f64) -> Result<(f64, f64)> {
    match dev {
        Deviation::Immediate => Ok((x, model.payoff(x))),
        Deviation::Threshold(l) => Ok((l, model.hitting_discount(x, l)? * model.payoff(l))),
    }
}

fn semi_analytic_outcome(oracle: &ValueOracle, profile: &EquilibriumProfile, path_id: u64, d: &Draws) -> Result<OutcomeRecord> {
    let model = gbm_of(oracle)?;
    let x = profile.x;
    let (l1, v1) = level_and_value(model, level_rule(oracle, &profile.strategy1, d.u1, x)?, x)?;
    let (l2, v2) = level_and_value(model, level_rule(oracle, &profile.strategy2, d.u2, x)?, x)?;
    let (r1, r2, stopper) = settle(v1, v2, l1.partial_cmp(&l2), d.theta1, d.theta2);
    Ok(OutcomeRecord {
        path_id,
        u1: d.u1,
        u2: d.u2,
        theta1: d.theta1,
        theta2: d.theta2,
        stop1: Some(l1),
        stop2: Some(l2),
        stopper,
        t_or_level: l1.min(l2),
        r1,
        r2,
    })
}

/// State dynamics for the path evaluator.
#[derive(Debug, Clone)]
pub enum Dynamics {
    /// Exact log-normal increments.
    Gbm { mu: f64, sigma: f64, r: f64 },
    /// Euler steps of a general diffusion, kept inside its interval.
    Diffusion(DiffusionSpec),
}

impl Dynamics {
    pub fn of_model(m: &GbmRealOptionModel) -> Self {
        Dynamics::Gbm { mu: m.mu(), sigma: m.sigma(), r: m.r() }
    }

    pub fn discount(&self) -> f64 {
        match self {
            Dynamics::Gbm { r, .. } => *r,
            Dynamics::Diffusion(spec) => spec.discount,
        }
    }
}

/// A trigger prepared for path monitoring.
#[derive(Debug, Clone, Copy)]
struct PathTrigger {
    kind: StopTrigger,
    /// State level at which the trigger fires, used only for step sizing.
    level: f64,
}

impl PathTrigger {
    fn new(oracle: &ValueOracle, kind: StopTrigger) -> Self {
        let level = match kind {
            StopTrigger::Immediate => 0.0,
            StopTrigger::BeliefLevel(z) => b_inverse(oracle, z).unwrap_or(f64::NAN),
            StopTrigger::OnePlayerRegion => b_inverse(oracle, 0.0).unwrap_or(f64::NAN),
        };
        Self { kind, level }
    }

    fn fires(&self, oracle: &ValueOracle, x: f64) -> bool {
        match self.kind {
            StopTrigger::Immediate => true,
            StopTrigger::BeliefLevel(z) => boundary_b(oracle, x).is_ok_and(|b| b < z),
            StopTrigger::OnePlayerRegion => oracle.in_stop_region(x),
        }
    }

    /// Rank used to order triggers that fire in the same step.
    fn rank(&self) -> (u8, f64) {
        match self.kind {
            StopTrigger::Immediate => (0, 0.0),
            StopTrigger::BeliefLevel(z) => (1, -z),
            StopTrigger::OnePlayerRegion => (2, 0.0),
        }
    }
}

/// Time, discounted payoff and step index of each player's stop.
type Fired = [Option<(f64, f64, u64)>; 2];

/// General walk: triggers are checked through `b` and the stop region.
fn walk_generic(
    oracle: &ValueOracle,
    dynamics: &Dynamics,
    triggers: &[PathTrigger; 2],
    x0: f64,
    config: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Fired {
    let r = dynamics.discount();
    let abandon = ABANDON_FRACTION * oracle.value(x0);
    let mut fired: Fired = [None, None];
    let (mut x, mut t, mut step) = (x0, 0.0, 0u64);
    loop {
        for i in 0..2 {
            if fired[i].is_none() && triggers[i].fires(oracle, x) {
                fired[i] = Some((t, (-r * t).exp() * oracle.payoff(x), step));
            }
        }
        if fired.iter().all(Option::is_some) || t >= config.t_max || (-r * t).exp() * oracle.value(x) < abandon {
            return fired;
        }
        let h = config.dt.min(config.t_max - t);
        let xi: f64 = rng.sample(StandardNormal);
        x = match dynamics {
            Dynamics::Gbm { mu, sigma, .. } => x * ((mu - 0.5 * sigma * sigma) * h + sigma * h.sqrt() * xi).exp(),
            Dynamics::Diffusion(spec) => {
                let next = x + (spec.drift)(x) * h + (spec.diffusion)(x) * h.sqrt() * xi;
                let pad = 1e-12 * (spec.upper - spec.lower).abs().min(1.0);
                next.clamp(spec.lower + pad, spec.upper - pad)
            }
        };
        t += h;
        step += 1;
    }
}

/// GBM walk in `ln x` with a GBM oracle. Since `b` decreases in `x`, a trigger
/// fires once the state reaches its level. Steps grow while every pending
/// level is far away.
fn walk_gbm(
    model: &GbmRealOptionModel,
    triggers: &[PathTrigger; 2],
    x0: f64,
    config: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Fired {
    let (sigma, r, eta) = (model.sigma(), model.r(), model.eta());
    let drift = model.mu() - 0.5 * sigma * sigma;
    let ln_b = model.threshold().ln();
    let ln_scale = (model.threshold() - model.strike()).ln();
    // log of exp(-r t) V(x) below the threshold
    let ln_bound = |y: f64, t: f64| ln_scale + eta * (y - ln_b) - r * t;
    let ln_abandon = ABANDON_FRACTION.ln() + model.value_unchecked(x0).ln();
    let levels = triggers.map(|tr| match tr.kind {
        StopTrigger::Immediate => f64::NEG_INFINITY,
        _ => tr.level.ln(),
    });
    let up = drift.max(0.0);
    let ks = SAFE_SIGMAS * sigma;
    let mut fired: Fired = [None, None];
    let (mut y, mut t, mut step) = (x0.ln(), 0.0, 0u64);
    loop {
        for i in 0..2 {
            if fired[i].is_none() && y >= levels[i] {
                let x = y.exp();
                fired[i] = Some((t, (-r * t).exp() * model.payoff(x), step));
            }
        }
        let nearest = match (fired[0], fired[1]) {
            (Some(_), Some(_)) => return fired,
            (None, Some(_)) => levels[0],
            (Some(_), None) => levels[1],
            (None, None) => levels[0].min(levels[1]),
        };
        if t >= config.t_max || (y < ln_b && ln_bound(y, t) < ln_abandon) {
            return fired;
        }
        let gap = nearest - y;
        let root = if up > 0.0 { (-ks + (ks * ks + 4.0 * up * gap).sqrt()) / (2.0 * up) } else { gap / ks };
        let h = config.dt.max(root * root).min(config.t_max - t);
        let xi: f64 = rng.sample(StandardNormal);
        y += drift * h + sigma * h.sqrt() * xi;
        t += h;
        step += 1;
    }
}

fn path_outcome(
    oracle: &ValueOracle,
    dynamics: &Dynamics,
    profile: &EquilibriumProfile,
    config: &SimConfig,
    path_id: u64,
    rng: &mut ChaCha8Rng,
    d: &Draws,
) -> OutcomeRecord {
    let triggers = [
        PathTrigger::new(oracle, profile.strategy1.trigger(d.u1)),
        PathTrigger::new(oracle, profile.strategy2.trigger(d.u2)),
    ];
    let fired = match (dynamics, oracle.gbm()) {
        (Dynamics::Gbm { mu, sigma, r }, Some(m)) if (*mu, *sigma, *r) == (m.mu(), m.sigma(), m.r()) => {
            walk_gbm(m, &triggers, profile.x, config, rng)
        }
        _ => walk_generic(oracle, dynamics, &triggers, profile.x, config, rng),
    };
    let order = match (fired[0], fired[1]) {
        (None, None) => None,
        (Some(_), None) => Some(std::cmp::Ordering::Less),
        (None, Some(_)) => Some(std::cmp::Ordering::Greater),
        (Some(a), Some(b)) => Some(
            a.2.cmp(&b.2)
                .then_with(|| triggers[0].rank().partial_cmp(&triggers[1].rank()).unwrap_or(std::cmp::Ordering::Equal)),
        ),
    };
    let own = |f: Option<(f64, f64, u64)>| f.map_or(0.0, |f| f.1);
    let (r1, r2, stopper) = settle(own(fired[0]), own(fired[1]), order, d.theta1, d.theta2);
    let first = match stopper {
        Stopper::Player1 | Stopper::Both => fired[0].map_or(f64::INFINITY, |f| f.0),
        Stopper::Player2 => fired[1].map_or(f64::INFINITY, |f| f.0),
        Stopper::Neither => f64::INFINITY,
    };
    OutcomeRecord {
        path_id,
        u1: d.u1,
        u2: d.u2,
        theta1: d.theta1,
        theta2: d.theta2,
        stop1: fired[0].map(|f| f.0),
        stop2: fired[1].map(|f| f.0),
        stopper,
        t_or_level: first,
        r1,
        r2,
    }
}

fn default_dynamics(oracle: &ValueOracle) -> Result<Dynamics> {
    Ok(Dynamics::of_model(gbm_of(oracle)?))
}

/// Outcome of path `path_id` under `config`.
pub fn sample_outcome(
    oracle: &ValueOracle,
    profile: &EquilibriumProfile,
    config: &SimConfig,
    path_id: u64,
) -> Result<OutcomeRecord> {
    let mut rng = path_rng(config.seed, path_id);
    let d = draw(&mut rng, profile);
    match config.mode {
        SimMode::SemiAnalytic => semi_analytic_outcome(oracle, profile, path_id, &d),
        SimMode::Path => {
            let dynamics = default_dynamics(oracle)?;
            Ok(path_outcome(oracle, &dynamics, profile, config, path_id, &mut rng, &d))
        }
    }
}

/// Outcomes of paths `0..n_paths`, in path order.
pub fn sample_outcomes(oracle: &ValueOracle, profile: &EquilibriumProfile, config: &SimConfig) -> Result<Vec<OutcomeRecord>> {
    match config.mode {
        SimMode::SemiAnalytic => {
            config.validate(gbm_of(oracle)?.r())?;
            sample_with(config, |i, rng| {
                let d = draw(rng, profile);
                semi_analytic_outcome(oracle, profile, i, &d)
            })
        }
        SimMode::Path => sample_outcomes_with_dynamics(oracle, &default_dynamics(oracle)?, profile, config),
    }
}

/// Path-mode outcomes under explicit dynamics; works with any oracle.
pub fn sample_outcomes_with_dynamics(
    oracle: &ValueOracle,
    dynamics: &Dynamics,
    profile: &EquilibriumProfile,
    config: &SimConfig,
) -> Result<Vec<OutcomeRecord>> {
    config.validate(dynamics.discount())?;
    let path_config = SimConfig { mode: SimMode::Path, ..*config };
    sample_with(&path_config, |i, rng| {
        let d = draw(rng, profile);
        Ok(path_outcome(oracle, dynamics, profile, &path_config, i, rng, &d))
    })
}

fn sample_with<T: Send>(
    config: &SimConfig,
    f: impl Fn(u64, &mut ChaCha8Rng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(config.seed, i);
            f(i, &mut rng)
        })
        .collect()
}

fn estimate_from(values: &[f64], player: Player, config: &SimConfig) -> Estimate {
    let (mean, stderr) = mean_and_stderr(values);
    Estimate { player: player.index(), mean, stderr, n: config.n_paths, seed: config.seed, mode: config.mode }
}

/// Estimate of `player`'s expected payoff under the profile.
///
/// In semi-analytic mode the existence draw is integrated out, so each sample
/// is `(1 - p) R_alone + p R_competed` for the drawn `u1, u2`.
pub fn estimate_value(oracle: &ValueOracle, profile: &EquilibriumProfile, player: Player, config: &SimConfig) -> Result<Estimate> {
    let values = match config.mode {
        SimMode::SemiAnalytic => {
            config.validate(gbm_of(oracle)?.r())?;
            let p = profile.prior(player);
            sample_with(config, |i, rng| {
                let d = draw(rng, profile);
                let present = Draws { theta1: true, theta2: true, ..d };
                let absent = Draws { theta1: false, theta2: false, ..d };
                let with = semi_analytic_outcome(oracle, profile, i, &present)?.payoff(player);
                let without = semi_analytic_outcome(oracle, profile, i, &absent)?.payoff(player);
                Ok((1.0 - p) * without + p * with)
            })?
        }
        SimMode::Path => sample_outcomes(oracle, profile, config)?.iter().map(|o| o.payoff(player)).collect(),
    };
    Ok(estimate_from(&values, player, config))
}

/// Path-mode estimate under explicit dynamics.
pub fn estimate_value_with_dynamics(
    oracle: &ValueOracle,
    dynamics: &Dynamics,
    profile: &EquilibriumProfile,
    player: Player,
    config: &SimConfig,
) -> Result<Estimate> {
    let values: Vec<f64> = sample_outcomes_with_dynamics(oracle, dynamics, profile, config)?
        .iter()
        .map(|o| o.payoff(player))
        .collect();
    let config = SimConfig { mode: SimMode::Path, ..*config };
    Ok(estimate_from(&values, player, &config))
}

/// Estimate of `player`'s payoff counted only on paths where the opponent
/// believes `player` exists, from raw outcomes.
pub fn gated_estimate(records: &[OutcomeRecord], player: Player, config: &SimConfig) -> Estimate {
    let values: Vec<f64> = records
        .iter()
        .map(|o| if o.seen_by_opponent(player) { o.payoff(player) } else { 0.0 })
        .collect();
    estimate_from(&values, player, config)
}

/// Ungated estimate from raw outcomes.
pub fn raw_estimate(records: &[OutcomeRecord], player: Player, config: &SimConfig) -> Estimate {
    let values: Vec<f64> = records.iter().map(|o| o.payoff(player)).collect();
    estimate_from(&values, player, config)
}
