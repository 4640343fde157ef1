//! Equilibrium strategy pairs and values.
//!
//! Players are labelled so that `p1 <= p2`; inputs with `p1 > p2` are swapped
//! and the swap is recorded in the profile. Depending on where `(p1, x)` lies:
//!
//! - `ContinuationBar` / `ActionPrime`: player 2 stops with an atom `Gamma*_0`
//!   at time zero and then with the intensity generated by the reflected
//!   belief started from `q1`; player 1 uses `p1/p2` times that intensity and
//!   jumps to certain stopping when the one-player rule fires. Both players
//!   earn `(1 - p1) V(x)`.
//! - `Stop`: both stop at once and player `i` earns `(1 - p_i/2) g(x)`.
//!
//! `p1 = p2 = 1` is immediate stopping, `p1 = p2 = 0` is the one-player rule
//! for both, and `p1 = 0 < p2` has no equilibrium.

use serde::{Deserialize, Serialize};

use crate::belief::{gamma_from_pi, pi_from_gamma, trigger_level};
use crate::error::{Error, Result};
use crate::regions::{classify, BeliefPoint, RegionLabel};
use crate::stopping::ValueOracle;

/// An intensity of the form `atom0` at time zero, then `atom0 + (scale - atom0) G_t`
/// with `G` generated by the reflected belief started from `q`, and optionally a
/// jump to 1 when the one-player stopping rule fires.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizedStopRule {
    pub atom0: f64,
    pub q: f64,
    pub scale: f64,
    pub terminal_jump: bool,
}

/// What a uniform draw `u` turns a strategy into.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopTrigger {
    /// Stop at time zero.
    Immediate,
    /// Stop when `b(X)` first drops below the given belief level.
    BeliefLevel(f64),
    /// Stop when `X` enters the one-player stopping region.
    OnePlayerRegion,
}

impl RandomizedStopRule {
    /// Intensity before the one-player rule fires, given the current value `z`
    /// of the reflected belief started from `q`.
    pub fn intensity(&self, z: f64) -> f64 {
        let generated = gamma_from_pi(self.q, z.min(self.q)).unwrap_or(0.0);
        self.atom0 + (self.scale - self.atom0) * generated
    }

    /// Intensity from the moment the one-player rule fires.
    pub fn intensity_after_one_player_stop(&self) -> f64 {
        if self.terminal_jump {
            1.0
        } else {
            self.scale
        }
    }

    /// The `u`-level time `inf {t : Gamma_t > u}` as a trigger.
    pub fn trigger(&self, u: f64) -> StopTrigger {
        if u < self.atom0 {
            return StopTrigger::Immediate;
        }
        let v = (u - self.atom0) / (self.scale - self.atom0);
        if v < 1.0 {
            StopTrigger::BeliefLevel(trigger_level(self.q, v))
        } else {
            StopTrigger::OnePlayerRegion
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    /// Stop at time zero with certainty.
    Immediate,
    /// The one-player optimal rule: stop on entering `{V = g}`.
    OnePlayer,
    Randomized(RandomizedStopRule),
}

impl Strategy {
    pub fn trigger(&self, u: f64) -> StopTrigger {
        match self {
            Strategy::Immediate => StopTrigger::Immediate,
            Strategy::OnePlayer => StopTrigger::OnePlayerRegion,
            Strategy::Randomized(rule) => rule.trigger(u),
        }
    }

    /// Stopping mass placed at time zero.
    pub fn atom0(&self) -> f64 {
        match self {
            Strategy::Immediate => 1.0,
            Strategy::OnePlayer => 0.0,
            Strategy::Randomized(rule) => rule.atom0,
        }
    }

    pub fn rule(&self) -> Option<&RandomizedStopRule> {
        match self {
            Strategy::Randomized(rule) => Some(rule),
            _ => None,
        }
    }
}

/// Equilibrium of the game started at `(p1, p2, x)`, in the relabelled order
/// `p1 <= p2`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProfile {
    pub p1: f64,
    pub p2: f64,
    pub x: f64,
    pub region: RegionLabel,
    /// Atom of player 2 at time zero; 1 where both stop at once.
    pub gamma0_star: f64,
    /// Belief of player 1 after the atom; absent where both stop at once.
    pub q1: Option<f64>,
    pub value1: f64,
    pub value2: f64,
    pub strategy1: Strategy,
    pub strategy2: Strategy,
    /// Player 1's intensity relative to player 2's.
    pub scale: f64,
    /// True when the inputs were swapped to get `p1 <= p2`.
    pub relabeled: bool,
}

/// JSON form of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub region: RegionLabel,
    pub gamma0_star: f64,
    pub q1: Option<f64>,
    pub values: [f64; 2],
    pub scale: f64,
    pub relabeled: bool,
}

impl EquilibriumProfile {
    pub fn record(&self) -> ProfileRecord {
        ProfileRecord {
            region: self.region,
            gamma0_star: self.gamma0_star,
            q1: self.q1,
            values: [self.value1, self.value2],
            scale: self.scale,
            relabeled: self.relabeled,
        }
    }

    /// Values ordered as the caller passed the priors.
    pub fn values_in_input_order(&self) -> (f64, f64) {
        if self.relabeled {
            (self.value2, self.value1)
        } else {
            (self.value1, self.value2)
        }
    }

    pub fn prior(&self, player: Player) -> f64 {
        match player {
            Player::One => self.p1,
            Player::Two => self.p2,
        }
    }

    pub fn value(&self, player: Player) -> f64 {
        match player {
            Player::One => self.value1,
            Player::Two => self.value2,
        }
    }

    pub fn strategy(&self, player: Player) -> &Strategy {
        match player {
            Player::One => &self.strategy1,
            Player::Two => &self.strategy2,
        }
    }

    /// True when both players use randomized rules (regions `ContinuationBar`
    /// and `ActionPrime` with `0 < p1 < 1`).
    pub fn is_randomized(&self) -> bool {
        matches!(self.strategy2, Strategy::Randomized(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }
}

/// `Gamma*_0 = (2/p1) (1 - (1 - p1) V / g)^+` and the belief
/// `q1 = p1 (1 - Gamma*_0) / (1 - p1 Gamma*_0)` left after it.
pub fn initial_jump(oracle: &ValueOracle, p1: f64, x: f64) -> Result<(f64, f64)> {
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::InvalidConfig(format!("initial jump needs 0 < p1 < 1, got {p1}")));
    }
    if classify(oracle, BeliefPoint::new(p1, x)?)? == RegionLabel::Stop {
        return Err(Error::WrongRegion { p: p1, x });
    }
    let v = oracle.value(x);
    let g = oracle.payoff(x);
    let gamma0 = if g > 0.0 { (2.0 / p1) * (1.0 - (1.0 - p1) * v / g).max(0.0) } else { 0.0 };
    Ok((gamma0, pi_from_gamma(p1, gamma0)))
}

fn check_prior(p: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must lie in [0, 1], got {p}")))
    }
}

/// Builds the equilibrium for priors `p1`, `p2` and start `x`.
pub fn build_profile(oracle: &ValueOracle, p1: f64, p2: f64, x: f64) -> Result<EquilibriumProfile> {
    check_prior(p1, "p1")?;
    check_prior(p2, "p2")?;
    let relabeled = p1 > p2;
    let (p1, p2) = if relabeled { (p2, p1) } else { (p1, p2) };
    let region = classify(oracle, BeliefPoint::new(p1, x)?)?;
    let v = oracle.value(x);
    let g = oracle.payoff(x);

    if p1 == 0.0 {
        if p2 > 0.0 {
            return Err(Error::NoEquilibrium { p2 });
        }
        return Ok(EquilibriumProfile {
            p1,
            p2,
            x,
            region,
            gamma0_star: 0.0,
            q1: Some(0.0),
            value1: v,
            value2: v,
            strategy1: Strategy::OnePlayer,
            strategy2: Strategy::OnePlayer,
            scale: 1.0,
            relabeled,
        });
    }

    let scale = p1 / p2;
    if p1 == 1.0 || region == RegionLabel::Stop {
        return Ok(EquilibriumProfile {
            p1,
            p2,
            x,
            region,
            gamma0_star: 1.0,
            q1: None,
            value1: (1.0 - 0.5 * p1) * g,
            value2: (1.0 - 0.5 * p2) * g,
            strategy1: Strategy::Immediate,
            strategy2: Strategy::Immediate,
            scale,
            relabeled,
        });
    }

    let (gamma0, q1) = initial_jump(oracle, p1, x)?;
    let rule2 = RandomizedStopRule { atom0: gamma0, q: q1, scale: 1.0, terminal_jump: false };
    let rule1 = RandomizedStopRule { atom0: scale * gamma0, q: q1, scale, terminal_jump: true };
    let value = (1.0 - p1) * v;
    Ok(EquilibriumProfile {
        p1,
        p2,
        x,
        region,
        gamma0_star: gamma0,
        q1: Some(q1),
        value1: value,
        value2: value,
        strategy1: Strategy::Randomized(rule1),
        strategy2: Strategy::Randomized(rule2),
        scale,
        relabeled,
    })
}

/// Jumps `(dGamma1, dGamma2)` of the equilibrium intensities at time `t`;
/// `at_one_player_stop` marks the time the one-player rule fires.
pub fn jump_structure(profile: &EquilibriumProfile, t: f64, at_one_player_stop: bool) -> (f64, f64) {
    let (Some(r1), Some(r2)) = (profile.strategy1.rule(), profile.strategy2.rule()) else {
        return (0.0, 0.0);
    };
    if t == 0.0 {
        (r1.atom0, r2.atom0)
    } else if at_one_player_stop {
        (
            r1.intensity_after_one_player_stop() - r1.scale,
            r2.intensity_after_one_player_stop() - r2.scale,
        )
    } else {
        (0.0, 0.0)
    }
}

/// Beliefs `(Pi1, Pi2)` before the one-player rule fires, given the current
/// value `z` of player 1's reflected belief.
pub fn belief_evolution(profile: &EquilibriumProfile, z: f64) -> (f64, f64) {
    let (p1, p2) = (profile.p1, profile.p2);
    let pi2 = ((1.0 - p2) * z + p2 - p1) / (1.0 - p1);
    (z, pi2)
}
