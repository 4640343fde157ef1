//! Adjusted beliefs and the reflected belief process.
//!
//! If the opponent stops according to a nondecreasing intensity `Gamma`, the
//! conditional probability that the opponent exists, given no stop so far, is
//! `Pi = p (1 - Gamma) / (1 - p Gamma)`. The equilibrium keeps `Pi` at or below
//! `b(X)` by setting `Pi = Z`, where `Z_t = p ^ min_{s <= t} b(X_s)`, and
//! recovering `Gamma` from `Z` through the inverse map.
//!
//! A stopping time generated by `Gamma` fires once `Gamma > u`. Since
//! `Gamma > u` is the same as `Z < z(u)` with `z(u) = p (1 - u) / (1 - p u)`,
//! the `u`-level time is the first entry of `X` into `{x : b(x) < z(u)}`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::regions::{b_inverse, boundary_b};
use crate::stopping::{full, ValueOracle};

/// `Pi = p (1 - Gamma) / (1 - p Gamma)`.
pub fn pi_from_gamma(p: f64, gamma: f64) -> f64 {
    let den = 1.0 - p * gamma;
    if den <= 0.0 {
        // p = 1 and Gamma = 1: the opponent certainly exists and has certainly stopped
        return 0.0;
    }
    p * (1.0 - gamma) / den
}

/// `Gamma = (p - Pi) / (p (1 - Pi))`, the inverse of [`pi_from_gamma`].
pub fn gamma_from_pi(p: f64, pi: f64) -> Result<f64> {
    if pi > p {
        return Err(Error::BeliefAbovePrior { pi, prior: p });
    }
    if pi == p {
        return Ok(0.0);
    }
    Ok(((p - pi) / (p * (1.0 - pi))).clamp(0.0, 1.0))
}

/// Running minimum of `b` along a path, capped at `p`.
pub fn z_path(p: f64, b_values: &[f64]) -> Vec<f64> {
    b_values
        .iter()
        .scan(p, |z, &b| {
            *z = z.min(b);
            Some(*z)
        })
        .collect()
}

/// Intensity generated by a reflected belief path `Z` started from `p`.
pub fn gamma_path(p: f64, z: &[f64]) -> Vec<f64> {
    z.iter().map(|&z| gamma_from_pi(p, z.min(p)).unwrap_or(0.0)).collect()
}

/// `z(u) = p (1 - u) / (1 - p u)`: the belief level at which the `u`-level
/// time fires.
pub fn trigger_level(p: f64, u: f64) -> f64 {
    p * (1.0 - u) / (1.0 - p * u)
}

/// The state set whose first entry is the `u`-level stopping time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerSet {
    /// The set is `{x : b(x) < level}`.
    pub level: f64,
    /// For a monotone `b`, the set is `{x > threshold}`.
    pub threshold: Option<f64>,
}

impl TriggerSet {
    pub fn contains(&self, oracle: &ValueOracle, x: f64) -> Result<bool> {
        Ok(boundary_b(oracle, x)? < self.level)
    }
}

/// Trigger set of the `u`-level time generated by `Gamma^{p,x}`.
///
/// The threshold form is filled in whenever `b` can be inverted at the level,
/// which always holds for the GBM oracle.
pub fn level_time_set(oracle: &ValueOracle, p: f64, u: f64) -> Result<TriggerSet> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::InvalidConfig(format!("level u must lie in [0, 1), got {u}")));
    }
    let level = trigger_level(p, u);
    let threshold = match oracle {
        ValueOracle::Gbm(_) => Some(b_inverse(oracle, level)?),
        ValueOracle::Tabulated(_) => b_inverse(oracle, level).ok(),
    };
    Ok(TriggerSet { level, threshold })
}

/// A sampled state path with its reflected belief and generated intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefPath {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub b: Vec<f64>,
    pub z: Vec<f64>,
    pub gamma: Vec<f64>,
    pub pi: Vec<f64>,
}

impl BeliefPath {
    /// The running minimum is taken over the sampled nodes only.
    pub fn new(oracle: &ValueOracle, p: f64, t: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if t.len() != x.len() {
            return Err(Error::InvalidConfig("time and state grids differ in length".into()));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidConfig(format!("prior must lie in (0, 1), got {p}")));
        }
        let b = x.iter().map(|&x| boundary_b(oracle, x)).collect::<Result<Vec<_>>>()?;
        let z = z_path(p, &b);
        let gamma = gamma_path(p, &z);
        let pi = gamma.iter().map(|&g| pi_from_gamma(p, g)).collect();
        Ok(Self { t, x, b, z, gamma, pi })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Writes `t,x,b,z,gamma,pi` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,x,b,z,gamma,pi")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                full(self.t[i]),
                full(self.x[i]),
                full(self.b[i]),
                full(self.z[i]),
                full(self.gamma[i]),
                full(self.pi[i])
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GbmRealOptionModel;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn oracle() -> ValueOracle {
        GbmRealOptionModel::standard().into()
    }

    #[test]
    fn pi_from_gamma_examples() {
        assert_eq!(pi_from_gamma(0.3, 0.0), 0.3);
        assert_eq!(pi_from_gamma(0.3, 1.0), 0.0);
        assert_abs_diff_eq!(pi_from_gamma(0.15, 0.583333), 0.0684931, epsilon = 5e-7);
    }

    #[test]
    fn gamma_from_pi_examples() {
        assert_eq!(gamma_from_pi(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(gamma_from_pi(0.3, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(gamma_from_pi(0.15, 0.0684931).unwrap(), 0.583333, epsilon = 5e-6);
        assert!(matches!(gamma_from_pi(0.3, 0.4), Err(Error::BeliefAbovePrior { .. })));
    }

    #[test]
    fn z_path_examples() {
        assert_eq!(z_path(0.4, &[0.5, 0.3, 0.4]), vec![0.4, 0.3, 0.3]);
        assert_eq!(z_path(0.2, &[0.5, 0.9, 0.4]), vec![0.2, 0.2, 0.2]);
    }

    #[test]
    fn z_is_b_of_running_max_for_gbm() {
        let o = oracle();
        let xs = [1.5, 1.6, 1.55, 1.7, 1.65, 1.2, 1.75];
        let p = 1.0 / 9.0;
        let bs: Vec<f64> = xs.iter().map(|&x| boundary_b(&o, x).unwrap()).collect();
        let z = z_path(p, &bs);
        let mut run_max: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            run_max = run_max.max(x);
            assert_abs_diff_eq!(z[i], boundary_b(&o, run_max).unwrap().min(p), epsilon = 1e-15);
        }
    }

    #[test]
    fn gamma_path_examples() {
        assert_eq!(gamma_path(0.3, &[0.3, 0.3]), vec![0.0, 0.0]);
        assert_eq!(gamma_path(0.3, &[0.3, 0.1, 0.0]).last(), Some(&1.0));
        assert_abs_diff_eq!(gamma_path(0.15, &[0.0684931])[0], 0.583333, epsilon = 5e-6);
    }

    #[test]
    fn level_time_set_examples() {
        let o = oracle();
        // u = 0: the set {b < p}; a start with p <= b(x) is outside it
        let s = level_time_set(&o, 0.1, 0.0).unwrap();
        assert!(!s.contains(&o, 1.5).unwrap());
        assert_eq!(s.level, 0.1);

        let p = 1.0 / 9.0;
        let s = level_time_set(&o, p, 0.5).unwrap();
        let z = p * 0.5 / (1.0 - p * 0.5);
        assert_abs_diff_eq!(s.level, z, epsilon = 1e-16);
        let th = s.threshold.unwrap();
        assert_abs_diff_eq!(th, b_inverse(&o, z).unwrap(), epsilon = 0.0);
        assert!(s.contains(&o, th + 1e-9).unwrap());
        assert!(!s.contains(&o, th - 1e-9).unwrap());

        // u close to 1: the set shrinks to the one-player stopping region
        let s = level_time_set(&o, p, 1.0 - 1e-12).unwrap();
        assert!(2.0 - s.threshold.unwrap() < 1e-4);
        assert!(level_time_set(&o, p, 1.0).is_err());
    }

    #[test]
    fn path_csv_has_header_and_rows() {
        let o = oracle();
        let path = BeliefPath::new(&o, 0.1, vec![0.0, 1.0], vec![1.5, 1.8]).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,b,z,gamma,pi\n"));
        assert_eq!(text.lines().count(), 3);
    }

    proptest! {
        #[test]
        fn round_trip_between_gamma_and_pi(p in 0.001f64..0.999, g in 0.0f64..=1.0) {
            let pi = pi_from_gamma(p, g);
            prop_assert!((0.0..=p).contains(&pi));
            let back = gamma_from_pi(p, pi).unwrap();
            prop_assert!((back - g).abs() <= 1e-12 / (1.0 - p), "g = {g}, back = {back}");
        }

        #[test]
        fn pi_decreases_in_gamma(p in 0.001f64..0.999, g in 0.0f64..0.99, dg in 0.0f64..0.01) {
            prop_assert!(pi_from_gamma(p, g + dg) <= pi_from_gamma(p, g));
        }

        #[test]
        fn generated_path_invariants(
            p in 0.01f64..0.5,
            steps in prop::collection::vec(-0.05f64..0.05, 1..200),
        ) {
            let o = oracle();
            let mut x = 1.3;
            let mut xs = vec![x];
            for s in &steps {
                x *= f64::exp(*s);
                xs.push(x);
            }
            let ts: Vec<f64> = (0..xs.len()).map(|i| i as f64).collect();
            let path = BeliefPath::new(&o, p, ts, xs).unwrap();
            for i in 0..path.len() {
                prop_assert!(path.z[i] <= path.b[i]);
                prop_assert!((0.0..=1.0).contains(&path.gamma[i]));
                // (1 - p) = (1 - p Gamma)(1 - Pi)
                let lhs = (1.0 - p * path.gamma[i]) * (1.0 - path.pi[i]);
                prop_assert!((lhs - (1.0 - p)).abs() <= 1e-12);
                prop_assert!((path.pi[i] - path.z[i]).abs() <= 1e-12);
                if i > 0 {
                    prop_assert!(path.z[i] <= path.z[i - 1]);
                    prop_assert!(path.gamma[i] >= path.gamma[i - 1]);
                    // Z only moves where it meets b
                    if path.z[i] < path.z[i - 1] {
                        prop_assert_eq!(path.z[i], path.b[i]);
                    }
                }
            }
        }

        #[test]
        fn refining_the_grid_never_raises_z(
            p in 0.01f64..0.5,
            bs in prop::collection::vec(0.0f64..1.0, 2..100),
            keep in prop::collection::vec(any::<bool>(), 100),
        ) {
            // coarse grid: a subset of the fine nodes, always keeping the first
            let coarse_idx: Vec<usize> =
                (0..bs.len()).filter(|&i| i == 0 || keep[i]).collect();
            let coarse_b: Vec<f64> = coarse_idx.iter().map(|&i| bs[i]).collect();
            let fine = z_path(p, &bs);
            let coarse = z_path(p, &coarse_b);
            for (k, &i) in coarse_idx.iter().enumerate() {
                prop_assert!(fine[i] <= coarse[k]);
            }
        }
    }
}
