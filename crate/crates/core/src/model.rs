//! Closed forms for the perpetual real option on a geometric Brownian motion.
//!
//! The state follows `dX = mu X dt + sigma X dW` and the payoff on stopping is
//! the call `(x - K)^+`. With `mu < r` the one-player problem is solved by the
//! first hitting time of the threshold `B = eta K / (eta - 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the GBM real-option model. Validated on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmRealOptionModel {
    mu: f64,
    sigma: f64,
    r: f64,
    strike: f64,
    eta: f64,
}

impl GbmRealOptionModel {
    pub fn new(mu: f64, sigma: f64, r: f64, strike: f64) -> Result<Self> {
        if !(mu.is_finite() && sigma.is_finite() && r.is_finite() && strike.is_finite()) {
            return Err(Error::InvalidModel("parameters must be finite".into()));
        }
        if sigma <= 0.0 {
            return Err(Error::InvalidModel(format!("sigma must be > 0, got {sigma}")));
        }
        if strike <= 0.0 {
            return Err(Error::InvalidModel(format!("strike must be > 0, got {strike}")));
        }
        if r < 0.0 {
            return Err(Error::InvalidModel(format!("r must be >= 0, got {r}")));
        }
        if mu >= r {
            return Err(Error::InvalidModel(format!(
                "drift must be below the discount rate (mu = {mu}, r = {r})"
            )));
        }
        let eta = positive_root(mu, sigma, r);
        if !(eta > 1.0 && eta.is_finite()) {
            return Err(Error::InvalidModel(format!("exponent eta = {eta} is not > 1")));
        }
        Ok(Self { mu, sigma, r, strike, eta })
    }

    /// The example used throughout the docs: `mu = 0, sigma = 0.2, r = 0.04, K = 1`,
    /// which gives `eta = 2` and `B = 2`.
    pub fn standard() -> Self {
        Self::new(0.0, 0.2, 0.04, 1.0).expect("standard parameters are valid")
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    /// Positive root of `sigma^2/2 e(e-1) + mu e - r = 0`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// One-player investment threshold `B = eta K / (eta - 1)`.
    pub fn threshold(&self) -> f64 {
        self.eta * self.strike / (self.eta - 1.0)
    }

    /// `g(x) = (x - K)^+`.
    pub fn payoff(&self, x: f64) -> f64 {
        (x - self.strike).max(0.0)
    }

    /// One-player value: `(B - K)(x/B)^eta` below `B`, `x - K` above.
    pub fn value(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::NonPositiveState(x));
        }
        Ok(self.value_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: f64) -> f64 {
        let b = self.threshold();
        if x < b {
            (b - self.strike) * (x / b).powf(self.eta)
        } else {
            x - self.strike
        }
    }

    /// `E_x[exp(-r tau_L)]` for the first hitting time of the level `L >= x`,
    /// with `exp(-r * inf) = 0`. This is `(x/L)^eta`.
    pub fn hitting_discount(&self, x: f64, level: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::NonPositiveState(x));
        }
        if level < x {
            return Err(Error::LevelBelowState { state: x, level });
        }
        Ok((x / level).powf(self.eta))
    }
}

fn positive_root(mu: f64, sigma: f64, r: f64) -> f64 {
    let s2 = sigma * sigma;
    let a = (s2 - 2.0 * mu) / (2.0 * s2);
    a + (a * a + 2.0 * r / s2).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn std_model() -> GbmRealOptionModel {
        GbmRealOptionModel::standard()
    }

    #[test]
    fn eta_of_standard_parameters_is_two() {
        // 1/2 + sqrt(1/4 + 2) = 2
        assert_relative_eq!(std_model().eta(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn eta_with_zero_rate_collapses() {
        let m = GbmRealOptionModel::new(-0.03, 0.25, 0.0, 1.0).unwrap();
        let s2 = 0.25 * 0.25;
        assert_relative_eq!(m.eta(), (s2 + 0.06) / s2, max_relative = 1e-14);
    }

    #[test]
    fn threshold_examples() {
        assert_relative_eq!(std_model().threshold(), 2.0, max_relative = 1e-15);
        // large eta pushes B down to K
        let eta = 1e6;
        let b = eta * 1.0 / (eta - 1.0);
        assert!((b - 1.0) / 1.0 < 1e-5 && b > 1.0);
        // eta = 1e6 needs r/sigma^2 of order 1e12
        let m = GbmRealOptionModel::new(0.0, 1e-3, 5e5, 1.0).unwrap();
        assert!(m.eta() > 1e6 * 0.99);
        assert!(m.threshold() > 1.0 && m.threshold() - 1.0 < 1e-5 * 1.02);
    }

    #[test]
    fn payoff_examples() {
        let m = std_model();
        assert_eq!(m.payoff(1.5), 0.5);
        assert_eq!(m.payoff(0.5), 0.0);
        assert_eq!(m.payoff(1.0), 0.0);
    }

    #[test]
    fn value_examples() {
        let m = std_model();
        assert_relative_eq!(m.value(1.5).unwrap(), 0.5625, max_relative = 1e-14);
        assert_relative_eq!(m.value(2.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_eq!(m.value(2.0).unwrap(), m.payoff(2.0));
        assert_eq!(m.value(3.0).unwrap(), 2.0);
        assert_eq!(m.value(0.0), Err(Error::NonPositiveState(0.0)));
        assert_eq!(m.value(-1.0), Err(Error::NonPositiveState(-1.0)));
    }

    #[test]
    fn hitting_discount_examples() {
        let m = std_model();
        assert_eq!(m.hitting_discount(1.7, 1.7).unwrap(), 1.0);
        assert_relative_eq!(m.hitting_discount(1.5, 2.0).unwrap(), 0.5625, max_relative = 1e-14);
        assert!(matches!(m.hitting_discount(2.0, 1.5), Err(Error::LevelBelowState { .. })));
    }

    #[test]
    fn invalid_models_are_rejected() {
        assert!(GbmRealOptionModel::new(0.05, 0.2, 0.04, 1.0).is_err());
        assert!(GbmRealOptionModel::new(0.04, 0.2, 0.04, 1.0).is_err());
        assert!(GbmRealOptionModel::new(0.0, 0.0, 0.04, 1.0).is_err());
        assert!(GbmRealOptionModel::new(0.0, 0.2, 0.04, 0.0).is_err());
        assert!(GbmRealOptionModel::new(-0.1, 0.2, -0.01, 1.0).is_err());
        assert!(GbmRealOptionModel::new(f64::NAN, 0.2, 0.04, 1.0).is_err());
    }

    fn models() -> impl Strategy<Value = GbmRealOptionModel> {
        (-0.2f64..0.1, 0.05f64..0.8, 0.0f64..0.2, 0.2f64..5.0).prop_filter_map(
            "mu < r",
            |(mu, sigma, r, k)| GbmRealOptionModel::new(mu, sigma, r, k).ok(),
        )
    }

    proptest! {
        #[test]
        fn eta_exceeds_one_and_solves_characteristic_equation(m in models()) {
            let e = m.eta();
            prop_assert!(e > 1.0);
            let resid = 0.5 * m.sigma().powi(2) * e * (e - 1.0) + m.mu() * e - m.r();
            prop_assert!(resid.abs() <= 1e-9 * (1.0 + m.r() + e * e * m.sigma().powi(2)));
            prop_assert!(m.threshold() > m.strike());
        }

        #[test]
        fn value_dominates_payoff(m in models(), t in 0.01f64..4.0) {
            let x = t * m.threshold();
            let v = m.value(x).unwrap();
            let g = m.payoff(x);
            prop_assert!(v >= g - 1e-12 * (1.0 + g));
            prop_assert!(v > 0.0);
            prop_assert!(v > g / 2.0);
        }

        #[test]
        fn martingale_identity_below_threshold(m in models(), t in 0.01f64..1.0) {
            let b = m.threshold();
            let x = t * b;
            let lhs = (x / b).powf(m.eta()) * m.value(b).unwrap();
            let rhs = m.value(x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        }

        #[test]
        fn hitting_discount_is_multiplicative(
            m in models(), x in 0.1f64..5.0, a in 1.0f64..3.0, c in 1.0f64..3.0
        ) {
            let l1 = x * a;
            let l2 = l1 * c;
            let lhs = m.hitting_discount(x, l1).unwrap() * m.hitting_discount(l1, l2).unwrap();
            let rhs = m.hitting_discount(x, l2).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs.max(1e-300));
        }
    }

    #[test]
    fn value_is_continuous_at_threshold() {
        let m = std_model();
        let b = m.threshold();
        let below = m.value(b * (1.0 - 1e-12)).unwrap();
        let at = m.value(b).unwrap();
        assert!((below - at).abs() < 1e-11);
    }
}
