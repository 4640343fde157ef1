use dynkin_core::engine::{
    estimate_value, estimate_value_with_dynamics, integrate_over_levels, midpoint_grid, sample_outcomes, Dynamics,
    SimConfig, SimMode, Stopper,
};
use dynkin_core::equilibrium::{build_profile, Player};
use dynkin_core::stopping::{solve_value_chain, Discretization};
use dynkin_core::{DiffusionSpec, GbmRealOptionModel, ValueOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn oracle() -> ValueOracle {
    GbmRealOptionModel::standard().into()
}

/// Monte Carlo of `E[exp(-r tau_L)]` with the exact conditional law of the
/// maximum of a Brownian bridge between grid points.
fn bridge_hitting_discount(m: &GbmRealOptionModel, x: f64, level: f64, n: usize, seed: u64) -> (f64, f64) {
    let (mu, s, r) = (m.mu(), m.sigma(), m.r());
    let h = 0.01;
    let drift = (mu - 0.5 * s * s) * h;
    let target = level.ln();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..n {
        let mut y = x.ln();
        let mut t = 0.0;
        let mut d = 0.0;
        while t < 250.0 {
            let xi: f64 = rng.sample(StandardNormal);
            let next = y + drift + s * h.sqrt() * xi;
            let u: f64 = rng.random();
            let max = 0.5 * (y + next + ((next - y).powi(2) - 2.0 * s * s * h * (1.0 - u).ln()).sqrt());
            if max >= target {
                d = (-r * (t + 0.5 * h)).exp();
                break;
            }
            y = next;
            t += h;
            if y < target - 12.0 {
                break;
            }
        }
        sum += d;
        sq += d * d;
    }
    let mean = sum / n as f64;
    (mean, ((sq / n as f64 - mean * mean) / n as f64).sqrt())
}

#[test]
fn hitting_discount_matches_bridge_simulation() {
    let m = GbmRealOptionModel::standard();
    for (x, level, seed) in [(1.5, 1.8, 1), (1.0, 2.0, 2)] {
        let exact = m.hitting_discount(x, level).unwrap();
        let (mc, se) = bridge_hitting_discount(&m, x, level, 20_000, seed);
        assert!((mc - exact).abs() < 3.0 * se + 2e-3, "{x} {level}: {mc} vs {exact} (se {se})");
    }
}

#[test]
fn semi_analytic_estimate_matches_value() {
    let o = oracle();
    for (p1, p2) in [(0.15, 0.15), (0.15, 0.3), (0.1, 0.1)] {
        let pr = build_profile(&o, p1, p2, 1.5).unwrap();
        let cfg = SimConfig { n_paths: 100_000, seed: 11, ..SimConfig::default() };
        for player in [Player::One, Player::Two] {
            let e = estimate_value(&o, &pr, player, &cfg).unwrap();
            let target = pr.value(player);
            assert!((e.mean - target).abs() < 3.0 * e.stderr, "{p1} {p2} {player:?}: {e:?}");
            let q = integrate_over_levels(&o, &pr, player, &midpoint_grid(64)).unwrap();
            assert!((q - target).abs() < 1e-6 * target);
        }
    }
}

#[test]
fn path_and_semi_analytic_agree() {
    let o = oracle();
    let pr = build_profile(&o, 0.15, 0.3, 1.5).unwrap();
    let base = SimConfig { n_paths: 100_000, seed: 5, ..SimConfig::default() };
    for player in [Player::One, Player::Two] {
        let semi = estimate_value(&o, &pr, player, &base).unwrap();
        let path = estimate_value(&o, &pr, player, &SimConfig { mode: SimMode::Path, ..base }).unwrap();
        let band = 3.0 * (semi.stderr.powi(2) + path.stderr.powi(2)).sqrt() + 2e-4;
        assert!((semi.mean - path.mean).abs() < band, "{player:?}: {semi:?} vs {path:?}");
    }
}

#[test]
fn outcome_streams_do_not_depend_on_threads() {
    let o = oracle();
    let pr = build_profile(&o, 0.15, 0.3, 1.5).unwrap();
    for mode in [SimMode::SemiAnalytic, SimMode::Path] {
        let cfg = SimConfig { n_paths: 500, seed: 99, mode, ..SimConfig::default() };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_outcomes(&o, &pr, &cfg).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}

#[test]
fn payoffs_are_bounded_by_the_stop_payoff() {
    let o = oracle();
    let m = GbmRealOptionModel::standard();
    let pr = build_profile(&o, 0.15, 0.3, 1.5).unwrap();
    let cfg = SimConfig { n_paths: 5000, seed: 3, ..SimConfig::default() };
    for rec in sample_outcomes(&o, &pr, &cfg).unwrap() {
        assert!(rec.r1 >= 0.0 && rec.r2 >= 0.0);
        assert!(rec.r1 <= m.payoff(rec.stop1.unwrap()) + 1e-15);
        assert!(rec.r2 <= m.payoff(rec.stop2.unwrap()) + 1e-15);
        if rec.stopper == Stopper::Both && rec.theta1 && rec.theta2 {
            assert_eq!(rec.r1, 0.5 * m.payoff(1.5));
            assert_eq!(rec.r2, 0.5 * m.payoff(1.5));
        }
    }
}

#[test]
fn path_mode_runs_on_a_tabulated_oracle() {
    let spec = DiffusionSpec::gbm(0.0, 0.2, 0.04);
    let (tab, _) = solve_value_chain(&spec, |x: f64| (x - 1.0).max(0.0), &Discretization::default()).unwrap();
    let o = ValueOracle::from(tab);
    let pr = build_profile(&o, 0.15, 0.15, 1.5).unwrap();
    let cfg = SimConfig { n_paths: 4000, seed: 8, dt: 0.01, t_max: 400.0, mode: SimMode::Path };
    let e = estimate_value_with_dynamics(&o, &Dynamics::Diffusion(spec), &pr, Player::One, &cfg).unwrap();
    // grid error of the tabulated value plus the coarse monitoring step
    let target = pr.value1;
    assert!((e.mean - target).abs() < 3.0 * e.stderr + 0.01, "{e:?} vs {target}");
    assert!(estimate_value(&o, &pr, Player::One, &SimConfig { mode: SimMode::Path, ..cfg }).is_err());
}
