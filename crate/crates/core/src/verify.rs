//! Equilibrium verification checks, each producing an [`EvalReport`].
//!
//! Deterministic checks use a relative tolerance of `1e-9`; sampled checks
//! pass when the estimate lies within three standard errors of its target.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::{pi_from_gamma, BeliefPath};
use crate::engine::{
    estimate_value, gated_estimate, integrate_over_levels, mean_and_stderr, payoff_vs_strategy,
    sample_outcomes, Deviation, SimConfig, SimMode,
};
use crate::equilibrium::{belief_evolution, build_profile, initial_jump, EquilibriumProfile, Player};
use crate::error::{Error, Result};
use crate::model::GbmRealOptionModel;
use crate::regions::{b_inverse, boundary_b, boundary_c, safety_level, BeliefPoint, RegionLabel};
use crate::stopping::ValueOracle;

/// Relative tolerance of deterministic checks.
pub const DETERMINISTIC_TOL: f64 = 1e-9;
/// Tolerance of algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Width of stochastic checks in standard errors.
pub const STDERR_WIDTH: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|estimate - target| <= tolerance`.
    Equal,
    /// `estimate <= target + tolerance`.
    AtMost,
    /// `estimate >= target - tolerance`.
    AtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of one check. The runtime is kept out of the serialized form so
/// that reports are reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub check: String,
    pub target: f64,
    /// Where the target comes from.
    pub basis: String,
    pub estimate: f64,
    /// Standard error for sampled checks.
    pub stderr: Option<f64>,
    pub tolerance: f64,
    pub relation: Relation,
    pub verdict: Verdict,
    pub detail: String,
    #[serde(skip)]
    pub runtime: Duration,
}

impl EvalReport {
    fn new(check: impl Into<String>, basis: impl Into<String>, target: f64, estimate: f64, tolerance: f64, relation: Relation) -> Self {
        let ok = match relation {
            Relation::Equal => (estimate - target).abs() <= tolerance,
            Relation::AtMost => estimate <= target + tolerance,
            Relation::AtLeast => estimate >= target - tolerance,
        };
        Self {
            check: check.into(),
            target,
            basis: basis.into(),
            estimate,
            stderr: None,
            tolerance,
            relation,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            detail: String::new(),
            runtime: Duration::ZERO,
        }
    }

    fn stochastic(check: impl Into<String>, basis: impl Into<String>, target: f64, estimate: f64, stderr: f64) -> Self {
        let mut r = Self::new(check, basis, target, estimate, STDERR_WIDTH * stderr, Relation::Equal);
        r.stderr = Some(stderr);
        r
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = detail;
        self
    }

    fn fail_if(mut self, failed: bool, why: &str) -> Self {
        if failed {
            self.verdict = Verdict::Fail;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(why);
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn rel_tol(target: f64) -> f64 {
    DETERMINISTIC_TOL * target.abs().max(f64::MIN_POSITIVE)
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, Duration)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed()))
}

fn label(profile: &EquilibriumProfile) -> String {
    format!("p1={} p2={} x={}", profile.p1, profile.p2, profile.x)
}

/// `n` levels evenly spaced on `(x, 1.25 max(x, B)]`, plus `B` itself.
pub fn sweep_levels(oracle: &ValueOracle, x: f64, n: usize) -> Result<Vec<f64>> {
    let b = b_inverse(oracle, 0.0)?;
    let hi = 1.25 * b.max(x);
    let mut levels: Vec<f64> = (1..=n).map(|k| x + (hi - x) * k as f64 / n as f64).collect();
    if b > x {
        levels.push(b);
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    Ok(levels)
}

/// Best threshold deviation of `player` against the opponent's equilibrium
/// strategy, compared with the equilibrium value. The immediate stop is always
/// included. Passes when no deviation beats the value and the best one attains it.
pub fn best_response_sweep(oracle: &ValueOracle, profile: &EquilibriumProfile, player: Player, levels: &[f64]) -> Result<EvalReport> {
    let (report, runtime) = timed(|| {
        let opponent = profile.strategy(player.other());
        let p = profile.prior(player);
        let target = profile.value(player);
        let mut best = (payoff_vs_strategy(oracle, opponent, p, Deviation::Immediate, profile.x)?, f64::NAN);
        for &l in levels {
            let v = payoff_vs_strategy(oracle, opponent, p, Deviation::Threshold(l), profile.x)?;
            if v > best.0 {
                best = (v, l);
            }
        }
        let at = if best.1.is_nan() { "immediate stop".to_string() } else { format!("L={:.6}", best.1) };
        Ok(EvalReport::new(
            format!("best_response[player{}]", player.index()),
            "equilibrium value",
            target,
            best.0,
            rel_tol(target),
            Relation::Equal,
        )
        .with_detail(format!("{}; {} deviations; best at {at}", label(profile), levels.len() + 1)))
    })?;
    Ok(EvalReport { runtime, ..report })
}

/// Payoff of player 1's threshold deviations is strictly increasing on
/// `(x, b_inverse(q1))`, below the plateau of the equilibrium support.
pub fn sweep_monotonicity(oracle: &ValueOracle, profile: &EquilibriumProfile, n: usize) -> Result<EvalReport> {
    let (report, runtime) = timed(|| {
        let q1 = profile.q1.ok_or(Error::WrongRegion { p: profile.p1, x: profile.x })?;
        let top = b_inverse(oracle, q1)?;
        let x = profile.x;
        let values = (1..n)
            .map(|k| {
                let l = x + (top - x) * k as f64 / n as f64;
                payoff_vs_strategy(oracle, &profile.strategy2, profile.p1, Deviation::Threshold(l), x)
            })
            .collect::<Result<Vec<_>>>()?;
        let min_step = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let mut r = EvalReport::new("sweep_monotonicity", "strict increase", 0.0, min_step, 0.0, Relation::AtLeast)
            .with_detail(format!("{}; {} levels on (x, {top:.6})", label(profile), values.len()));
        r = r.fail_if(min_step <= 0.0, "not strictly increasing");
        Ok(r)
    })?;
    Ok(EvalReport { runtime, ..report })
}

/// Flatness of both players' payoffs over their own `u`-level times.
pub fn indifference_check(oracle: &ValueOracle, profile: &EquilibriumProfile, u_grid: &[f64]) -> Result<EvalReport> {
    let (report, runtime) = timed(|| {
        if !profile.is_randomized() {
            return Err(Error::WrongRegion { p: profile.p1, x: profile.x });
        }
        let target = (1.0 - profile.p1) * oracle.value(profile.x);
        let mut worst = 0.0f64;
        let mut worst_at = (1, 0.0);
        for player in [Player::One, Player::Two] {
            for &u in u_grid {
                let v = integrate_over_levels(oracle, profile, player, &[u])?;
                let dev = (v - target).abs();
                if dev > worst {
                    worst = dev;
                    worst_at = (player.index(), u);
                }
            }
        }
        Ok(EvalReport::new("indifference", "(1-p1) V(x)", 0.0, worst / target, DETERMINISTIC_TOL, Relation::AtMost)
            .with_detail(format!(
                "{}; {} u-levels per player; largest relative deviation at player{} u={}",
                label(profile),
                u_grid.len(),
                worst_at.0,
                worst_at.1
            )))
    })?;
    Ok(EvalReport { runtime, ..report })
}

/// `101` points `k/101` on `[0, 1)`.
pub fn default_u_grid() -> Vec<f64> {
    (0..101).map(|k| k as f64 / 101.0).collect()
}

/// Equilibrium values dominate the safety levels at every grid point. Points
/// without an equilibrium are skipped.
pub fn safety_dominance(oracle: &ValueOracle, grid: &[(f64, f64, f64)]) -> Result<EvalReport> {
    let (report, runtime) = timed(|| {
        let mut worst = f64::INFINITY;
        let mut checked = 0usize;
        let mut equal_fail = 0usize;
        let mut strict_fail = 0usize;
        for &(p1, p2, x) in grid {
            let profile = match build_profile(oracle, p1, p2, x) {
                Ok(pr) => pr,
                Err(Error::NoEquilibrium { .. }) => continue,
                Err(e) => return Err(e),
            };
            checked += 1;
            let mut margins = [0.0; 2];
            for (k, player) in [Player::One, Player::Two].into_iter().enumerate() {
                let v = profile.value(player);
                let v0 = safety_level(oracle, BeliefPoint::new(profile.prior(player), x)?);
                margins[k] = (v - v0) / v0.abs().max(1e-300);
                worst = worst.min(margins[k]);
            }
            if profile.is_randomized() {
                if margins[0].abs() > DETERMINISTIC_TOL {
                    equal_fail += 1;
                }
                if profile.p2 > profile.p1 && margins[1] <= 0.0 {
                    strict_fail += 1;
                }
            }
        }
        if checked == 0 {
            return Err(Error::InvalidConfig("safety grid has no point with an equilibrium".into()));
        }
        let r = EvalReport::new("safety_dominance", "safety level", 0.0, worst, DETERMINISTIC_TOL, Relation::AtLeast)
            .with_detail(format!("{checked} grid points; smallest relative margin {worst:.3e}"));
        Ok(r.fail_if(equal_fail > 0, "player 1 above the safety level in the randomized region")
            .fail_if(strict_fail > 0, "player 2 not strictly above the safety level"))
    })?;
    Ok(EvalReport { runtime, ..report })
}

/// The default safety grid: priors on `{0, 0.05, ..., 1}^2` and nine starts.
pub fn default_safety_grid() -> Vec<(f64, f64, f64)> {
    let ps: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    let xs = [0.5, 0.9, 1.1, 1.3, 1.5, 1.7, 1.9, 2.0, 3.0];
    let mut grid = Vec::new();
    for &p1 in &ps {
        for &p2 in &ps {
            for &x in &xs {
                grid.push((p1, p2, x));
            }
        }
    }
    grid
}

/// On an `n x n` grid of `(p1, x)` in the action region: `0 <= Gamma*_0 < 1`,
/// `0 < q1 < b(x)`, and `(1 - p1 Gamma*_0)(1 - q1) = 1 - p1`.
pub fn jump_interiority(oracle: &ValueOracle, n: usize) -> Result<EvalReport> {
    let (report, runtime) = timed(|| {
        let b_thr = b_inverse(oracle, 0.0)?;
        let k = b_inverse(oracle, 1.0)?;
        let mut worst: f64 = 0.0;
        let mut count = 0usize;
        let mut bad = 0usize;
        for i in 0..n {
            let x = k + (b_thr - k) * (i as f64 + 0.5) / n as f64;
            let (b, c) = (boundary_b(oracle, x)?, boundary_c(oracle, x)?);
            for j in 0..n {
                let p1 = b + (c - b) * (j as f64 + 0.5) / n as f64;
                if crate::regions::classify(oracle, BeliefPoint::new(p1, x)?)? != RegionLabel::ActionPrime {
                    continue;
                }
                count += 1;
                let (g0, q1) = initial_jump(oracle, p1, x)?;
                if !((0.0..1.0).contains(&g0) && q1 > 0.0 && q1 < b) {
                    bad += 1;
                }
                worst = worst.max(((1.0 - p1 * g0) * (1.0 - q1) - (1.0 - p1)).abs());
            }
        }
        let r = EvalReport::new("jump_interiority", "algebraic identity", 0.0, worst, IDENTITY_TOL, Relation::AtMost)
            .with_detail(format!("{count} points in the action region; {bad} outside the interior"));
        Ok(r.fail_if(bad > 0 || count == 0, "atom or post-atom belief not interior"))
    })?;
    Ok(EvalReport { runtime, ..report })
}

/// Simulated state path on a uniform grid, stopped before the one-player
/// stopping region is entered.
fn state_path(model: &GbmRealOptionModel, x0: f64, dt: f64, horizon: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let (sigma, b) = (model.sigma(), model.threshold());
    let drift = (model.mu() - 0.5 * sigma * sigma) * dt;
    let vol = sigma * dt.sqrt();
    let steps = (horizon / dt).ceil() as usize;
    let (mut t, mut x) = (vec![0.0], vec![x0]);
    let mut y = x0.ln();
    for k in 1..=steps {
        let xi: f64 = rng.sample(StandardNormal);
        y += drift + vol * xi;
        let next = y.exp();
        if next >= b {
            break;
        }
        t.push(k as f64 * dt);
        x.push(next);
    }
    (t, x)
}

#[derive(Debug, Default, Clone, Copy)]
struct PathErrors {
    alg: f64,
    pi_is_z: f64,
    relation: f64,
    /// Largest decrease of `Pi2 - Pi1` between consecutive nodes.
    decrease: f64,
}

impl PathErrors {
    fn merge(self, o: Self) -> Self {
        Self {
            alg: self.alg.max(o.alg),
            pi_is_z: self.pi_is_z.max(o.pi_is_z),
            relation: self.relation.max(o.relation),
            decrease: self.decrease.max(o.decrease),
        }
    }
}

fn path_errors(oracle: &ValueOracle, profile: &EquilibriumProfile, t: Vec<f64>, x: Vec<f64>) -> Result<PathErrors> {
    let (p1, p2) = (profile.p1, profile.p2);
    let q1 = profile.q1.ok_or(Error::WrongRegion { p: p1, x: profile.x })?;
    let (r1, r2) = (profile.strategy1.rule().copied(), profile.strategy2.rule().copied());
    let (Some(r1), Some(r2)) = (r1, r2) else {
        return Err(Error::WrongRegion { p: p1, x: profile.x });
    };
    let path = BeliefPath::new(oracle, q1, t, x)?;
    let mut e = PathErrors::default();
    let mut last_gap = f64::NEG_INFINITY;
    for k in 0..path.len() {
        let z = path.z[k];
        e.pi_is_z = e.pi_is_z.max((path.pi[k] - z).abs());
        let (g1, g2) = (r1.intensity(z), r2.intensity(z));
        let pi1 = pi_from_gamma(p1, g2);
        let pi2 = pi_from_gamma(p2, g1);
        e.alg = e
            .alg
            .max(((1.0 - p1) - (1.0 - p1 * g2) * (1.0 - pi1)).abs())
            .max(((1.0 - p2) - (1.0 - p2 * g1) * (1.0 - pi2)).abs());
        e.pi_is_z = e.pi_is_z.max((pi1 - z).abs());
        e.relation = e.relation.max((pi2 - belief_evolution(profile, pi1).1).abs());
        let gap = pi2 - pi1;
        e.decrease = e.decrease.max(last_gap - gap);
        last_gap = gap;
    }
    Ok(e)
}

/// Identity checks on `n_paths` simulated paths: the belief/intensity identity,
/// `Pi1 = Z`, the relation between the two beliefs with `Pi2 - Pi1`
/// nondecreasing, and the existence-gated payoff scaling.
pub fn identity_suite(oracle: &ValueOracle, profile: &EquilibriumProfile, n_paths: u64, seed: u64) -> Result<Vec<EvalReport>> {
    let model = oracle.gbm().ok_or(Error::NonGbmOracle)?;
    let mut reports = Vec::new();
    let who = label(profile);

    let (errors, runtime) = timed(|| {
        let per_path = (0..n_paths)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                let (t, x) = state_path(model, profile.x, 0.01, 20.0, &mut rng);
                path_errors(oracle, profile, t, x)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(per_path.into_iter().fold(PathErrors::default(), PathErrors::merge))
    })?;
    let detail = format!("{who}; {n_paths} paths, dt=0.01, up to the one-player stop");
    for (check, value) in [
        ("identity_alg", errors.alg),
        ("identity_pi_equals_z", errors.pi_is_z),
        ("identity_belief_relation", errors.relation),
        ("identity_gap_nondecreasing", errors.decrease),
    ] {
        let mut r = EvalReport::new(check, "algebraic identity", 0.0, value, IDENTITY_TOL, Relation::AtMost)
            .with_detail(detail.clone());
        r.runtime = runtime / 4;
        reports.push(r);
    }

    let (r, runtime) = timed(|| {
        let (g0, q1) = (profile.gamma0_star, profile.q1.unwrap_or(0.0));
        let p1 = profile.p1;
        let v = oracle.value(profile.x);
        let g = oracle.payoff(profile.x);
        let a = ((1.0 - p1 * g0) * (1.0 - q1) - (1.0 - p1)).abs();
        let b = if profile.region == RegionLabel::ActionPrime {
            ((1.0 - p1) * v - g * (1.0 - 0.5 * p1 * g0)).abs()
        } else {
            0.0
        };
        Ok(EvalReport::new("identity_initial_jump", "algebraic identity", 0.0, a.max(b), IDENTITY_TOL, Relation::AtMost)
            .with_detail(who.clone()))
    })?;
    reports.push(EvalReport { runtime, ..r });

    let config = SimConfig { n_paths, seed, mode: SimMode::SemiAnalytic, ..SimConfig::default() };
    let (outcomes, runtime) = timed(|| sample_outcomes(oracle, profile, &config))?;
    for player in [Player::One, Player::Two] {
        let start = Instant::now();
        let p_other = profile.prior(player.other());
        let gated = gated_estimate(&outcomes, player, &config);
        let diffs: Vec<f64> = outcomes
            .iter()
            .map(|o| {
                let r = o.payoff(player);
                (if o.seen_by_opponent(player) { r } else { 0.0 }) - p_other * r
            })
            .collect();
        let (mean, se) = mean_and_stderr(&diffs);
        let mut r = EvalReport::stochastic(
            format!("gated_scaling[player{}]", player.index()),
            "opponent prior times ungated payoff",
            0.0,
            mean,
            se,
        )
        .with_detail(format!("{who}; gated mean {:.6}, {n_paths} matched draws", gated.mean));
        if se == 0.0 {
            r = EvalReport::new(r.check.clone(), r.basis.clone(), 0.0, mean, IDENTITY_TOL, Relation::Equal)
                .with_detail(r.detail.clone());
        }
        r.runtime = runtime / 2 + start.elapsed();
        reports.push(r);
    }

    let (r, runtime) = timed(|| {
        let target = profile.value1;
        let e = estimate_value(oracle, profile, Player::One, &config)?;
        Ok(EvalReport::stochastic("semi_analytic_estimate[player1]", "equilibrium value", target, e.mean, e.stderr)
            .with_detail(format!("{who}; {n_paths} paths")))
    })?;
    reports.push(EvalReport { runtime, ..r });
    Ok(reports)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Br,
    Indiff,
    Ids,
    Safety,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "br" => Ok(Suite::Br),
            "indiff" => Ok(Suite::Indiff),
            "ids" => Ok(Suite::Ids),
            "safety" => Ok(Suite::Safety),
            _ => Err(Error::InvalidConfig(format!("unknown suite {s:?} (expected all, br, indiff, ids or safety)"))),
        }
    }
}

/// Number of threshold levels in the default sweep.
pub const SWEEP_LEVELS: usize = 400;
/// Number of paths in the default identity suite.
pub const IDENTITY_PATHS: u64 = 2000;

/// Runs the selected checks on a set of standard starting points.
pub fn run_suite(oracle: &ValueOracle, suite: Suite, seed: u64) -> Result<Vec<EvalReport>> {
    let wants = |s: Suite| suite == Suite::All || suite == s;
    let mut reports = Vec::new();
    if wants(Suite::Br) {
        for (p1, p2, x) in [(0.15, 0.15, 1.5), (0.15, 0.3, 1.5), (0.1, 0.1, 1.5), (0.25, 0.5, 1.5), (1.0, 1.0, 1.5), (0.0, 0.0, 1.5)] {
            let profile = build_profile(oracle, p1, p2, x)?;
            let levels = sweep_levels(oracle, x, SWEEP_LEVELS)?;
            for player in [Player::One, Player::Two] {
                reports.push(best_response_sweep(oracle, &profile, player, &levels)?);
            }
        }
        reports.push(sweep_monotonicity(oracle, &build_profile(oracle, 0.15, 0.15, 1.5)?, 200)?);
    }
    if wants(Suite::Indiff) {
        for (p1, p2, x) in [(0.1, 0.1, 1.5), (0.15, 0.15, 1.5), (0.15, 0.3, 1.5)] {
            reports.push(indifference_check(oracle, &build_profile(oracle, p1, p2, x)?, &default_u_grid())?);
        }
    }
    if wants(Suite::Ids) {
        reports.push(jump_interiority(oracle, 50)?);
        for (p1, p2, x) in [(0.15, 0.15, 1.5), (0.15, 0.3, 1.5), (0.1, 0.4, 1.2)] {
            reports.extend(identity_suite(oracle, &build_profile(oracle, p1, p2, x)?, IDENTITY_PATHS, seed)?);
        }
    }
    if wants(Suite::Safety) {
        reports.push(safety_dominance(oracle, &default_safety_grid())?);
    }
    Ok(reports)
}

/// JSON array of the reports.
pub fn reports_json(reports: &[EvalReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

/// Human-readable table, numbers to six significant digits.
pub fn reports_table(reports: &[EvalReport]) -> String {
    let width = reports.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>12}  {:>12}  {:>10}  {:<7}  {:>9}", "check", "target", "estimate", "tolerance", "verdict", "time");
    for r in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>12.6}  {:>12.6}  {:>10.3e}  {:<7}  {:>7.1}ms",
            r.check,
            r.target,
            r.estimate,
            r.tolerance,
            if r.passed() { "pass" } else { "FAIL" },
            r.runtime.as_secs_f64() * 1e3
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle() -> ValueOracle {
        GbmRealOptionModel::standard().into()
    }

    #[test]
    fn relations_decide_verdicts() {
        assert!(EvalReport::new("a", "", 1.0, 1.0 + 1e-10, 1e-9, Relation::Equal).passed());
        assert!(!EvalReport::new("a", "", 1.0, 1.1, 1e-9, Relation::Equal).passed());
        assert!(EvalReport::new("a", "", 1.0, 0.5, 1e-9, Relation::AtMost).passed());
        assert!(!EvalReport::new("a", "", 1.0, 0.5, 1e-9, Relation::AtLeast).passed());
        assert!(EvalReport::stochastic("s", "", 0.0, 0.02, 0.01).passed());
        assert!(!EvalReport::stochastic("s", "", 0.0, 0.04, 0.01).passed());
    }

    #[test]
    fn sweep_examples() {
        let o = oracle();
        let levels = sweep_levels(&o, 1.5, 200).unwrap();
        assert!(levels.len() >= 200 && levels.contains(&2.0000000000000004));
        for (p1, p2) in [(0.15, 0.15), (0.25, 0.5), (1.0, 1.0)] {
            let pr = build_profile(&o, p1, p2, 1.5).unwrap();
            for player in [Player::One, Player::Two] {
                let r = best_response_sweep(&o, &pr, player, &levels).unwrap();
                assert!(r.passed(), "{r:?}");
            }
        }
    }

    #[test]
    fn sweep_detects_a_wrong_value() {
        let o = oracle();
        let mut pr = build_profile(&o, 0.15, 0.15, 1.5).unwrap();
        pr.value1 *= 0.99;
        let r = best_response_sweep(&o, &pr, Player::One, &sweep_levels(&o, 1.5, 200).unwrap()).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn monotone_below_plateau() {
        let o = oracle();
        let r = sweep_monotonicity(&o, &build_profile(&o, 0.15, 0.15, 1.5).unwrap(), 100).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn indifference_examples() {
        let o = oracle();
        for p in [0.1, 0.15] {
            let r = indifference_check(&o, &build_profile(&o, p, p, 1.5).unwrap(), &default_u_grid()).unwrap();
            assert!(r.passed(), "{r:?}");
        }
        let s = build_profile(&o, 0.25, 0.5, 1.5).unwrap();
        assert!(indifference_check(&o, &s, &default_u_grid()).is_err());
    }

    #[test]
    fn safety_examples() {
        let o = oracle();
        let r = safety_dominance(&o, &default_safety_grid()).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(safety_dominance(&o, &[(0.0, 0.5, 1.5)]).is_err());
    }

    #[test]
    fn interiority_on_grid() {
        let r = jump_interiority(&oracle(), 50).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.detail.starts_with("2500 points"), "{}", r.detail);
    }

    #[test]
    fn identities_on_paths() {
        let o = oracle();
        for (p1, p2) in [(0.15, 0.15), (0.15, 0.3)] {
            let pr = build_profile(&o, p1, p2, 1.5).unwrap();
            for r in identity_suite(&o, &pr, 200, 3).unwrap() {
                assert!(r.passed(), "{r:?}");
            }
        }
    }

    #[test]
    fn symmetric_beliefs_coincide() {
        let o = oracle();
        let pr = build_profile(&o, 0.15, 0.15, 1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (t, x) = state_path(o.gbm().unwrap(), 1.5, 0.01, 5.0, &mut rng);
        let e = path_errors(&o, &pr, t, x).unwrap();
        assert!(e.relation < 1e-15 && e.decrease <= 1e-15);
    }

    #[test]
    fn report_json_is_stable() {
        let o = oracle();
        let a = reports_json(&run_suite(&o, Suite::Indiff, 1).unwrap());
        let b = reports_json(&run_suite(&o, Suite::Indiff, 1).unwrap());
        assert_eq!(a, b);
        assert!(!a.contains("runtime"));
    }
}
