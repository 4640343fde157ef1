//! Single-player optimal stopping for one-dimensional diffusions.
//!
//! The diffusion is replaced by a birth-death chain on a uniform grid (in `x`
//! or in `ln x`) whose one-step transition matches the local mean and variance
//! of the increment. The value is the fixed point of
//! `V = max(g, exp(-r dt) P V)`, found by value iteration from `V = g`.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::GbmRealOptionModel;

/// Coefficient function of a diffusion or a payoff.
pub type StateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `dX = drift(X) dt + diffusion(X) dW`, discounted at rate `discount`.
#[derive(Clone)]
pub struct DiffusionSpec {
    pub drift: StateFn,
    pub diffusion: StateFn,
    /// Open state interval `(lower, upper)`; either end may be infinite.
    pub lower: f64,
    pub upper: f64,
    pub discount: f64,
}

impl fmt::Debug for DiffusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionSpec")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("discount", &self.discount)
            .finish_non_exhaustive()
    }
}

impl DiffusionSpec {
    pub fn new(
        drift: impl Fn(f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lower: f64,
        upper: f64,
        discount: f64,
    ) -> Self {
        Self { drift: Arc::new(drift), diffusion: Arc::new(diffusion), lower, upper, discount }
    }

    /// Geometric Brownian motion on `(0, inf)`.
    pub fn gbm(mu: f64, sigma: f64, r: f64) -> Self {
        Self::new(move |x| mu * x, move |x| sigma * x, 0.0, f64::INFINITY, r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Uniform in `x`.
    Linear,
    /// Uniform in `ln x`; needs a positive interval.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRule {
    /// Truncation ends absorb with value `g`.
    Absorbing,
    /// Mass that would leave the grid stays at the end node.
    Reflecting,
}

/// Grid and iteration parameters for [`solve_value_chain`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub kind: GridKind,
    pub x_min: f64,
    pub x_max: f64,
    pub nodes: usize,
    /// Fraction of the explicit stability limit used as time step, in `(0, 1]`.
    pub courant: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub boundary: BoundaryRule,
}

impl Default for Discretization {
    /// Log grid on `[0.05, 20]` with 301 nodes.
    fn default() -> Self {
        Self {
            kind: GridKind::Log,
            x_min: 0.05,
            x_max: 20.0,
            nodes: 301,
            courant: 1.0,
            tolerance: 1e-10,
            max_sweeps: 100_000,
            boundary: BoundaryRule::Absorbing,
        }
    }
}

impl Discretization {
    fn validate(&self, spec: &DiffusionSpec) -> Result<()> {
        if self.nodes < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {}", self.nodes)));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(Error::InvalidGrid(format!(
                "bad truncation interval [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if self.x_min < spec.lower || self.x_max > spec.upper {
            return Err(Error::InvalidGrid(format!(
                "grid [{}, {}] leaves the state interval ({}, {})",
                self.x_min, self.x_max, spec.lower, spec.upper
            )));
        }
        if self.kind == GridKind::Log && self.x_min <= 0.0 {
            return Err(Error::InvalidGrid("log grid needs x_min > 0".into()));
        }
        if !(self.courant > 0.0 && self.courant <= 1.0) {
            return Err(Error::InvalidGrid(format!("courant must be in (0, 1], got {}", self.courant)));
        }
        if !(self.tolerance > 0.0) || self.max_sweeps == 0 {
            return Err(Error::InvalidGrid("tolerance and max_sweeps must be positive".into()));
        }
        Ok(())
    }

    fn nodes_vec(&self) -> Vec<f64> {
        let n = self.nodes;
        let last = (n - 1) as f64;
        match self.kind {
            GridKind::Linear => (0..n)
                .map(|i| self.x_min + (self.x_max - self.x_min) * i as f64 / last)
                .collect(),
            GridKind::Log => {
                let (a, b) = (self.x_min.ln(), self.x_max.ln());
                let mut xs: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / last).exp()).collect();
                xs[0] = self.x_min;
                xs[n - 1] = self.x_max;
                xs
            }
        }
    }
}

/// Diagnostics from a converged solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub sweeps: usize,
    /// Sup-norm change of the last sweep.
    pub residual: f64,
    pub dt: f64,
}

/// Tabulated value function with linear interpolation in `x`.
///
/// Off-node payoffs are interpolated from the tabulated `g` as well, so
/// `V >= g` carries over from the nodes to the whole grid interval. Queries
/// outside the grid are clamped to the end nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedOracle {
    x: Vec<f64>,
    v: Vec<f64>,
    g: Vec<f64>,
}

impl TabulatedOracle {
    pub fn new(x: Vec<f64>, v: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.len() != v.len() || x.len() != g.len() {
            return Err(Error::InvalidGrid("columns must have equal length >= 2".into()));
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
        }
        if x.iter().chain(&v).chain(&g).any(|a| !a.is_finite()) {
            return Err(Error::InvalidGrid("non-finite entry".into()));
        }
        Ok(Self { x, v, g })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.g
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn interp(&self, col: &[f64], x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return col[0];
        }
        if x >= self.x[n - 1] {
            return col[n - 1];
        }
        let i = self.x.partition_point(|&a| a <= x) - 1;
        let w = (x - self.x[i]) / (self.x[i + 1] - self.x[i]);
        col[i] + w * (col[i + 1] - col[i])
    }

    pub fn value(&self, x: f64) -> f64 {
        self.interp(&self.v, x)
    }

    pub fn payoff(&self, x: f64) -> f64 {
        self.interp(&self.g, x)
    }

    /// Writes `x,V,g` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,V,g")?;
        for i in 0..self.x.len() {
            writeln!(w, "{},{},{}", full(self.x[i]), full(self.v[i]), full(self.g[i]))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty oracle file".into()))??;
        if header.trim() != "x,V,g" {
            return Err(Error::Parse(format!("expected header `x,V,g`, got `{}`", header.trim())));
        }
        let (mut x, mut v, mut g) = (Vec::new(), Vec::new(), Vec::new());
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 columns", lineno + 2)));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
            };
            x.push(parse(cols[0])?);
            v.push(parse(cols[1])?);
            g.push(parse(cols[2])?);
        }
        Self::new(x, v, g)
    }
}

/// 17 significant digits; round-trips every `f64`.
pub fn full(a: f64) -> String {
    format!("{a:.16e}")
}

/// Evaluator of the single-player value `V`, the payoff `g`, and the
/// one-player stopping region `{V = g}`.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueOracle {
    Gbm(GbmRealOptionModel),
    Tabulated(TabulatedOracle),
}

/// Relative tolerance used to decide `V = g` on tabulated oracles.
pub const STOP_TOLERANCE: f64 = 1e-9;

impl ValueOracle {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            ValueOracle::Gbm(m) => m.value_unchecked(x),
            ValueOracle::Tabulated(t) => t.value(x),
        }
    }

    pub fn payoff(&self, x: f64) -> f64 {
        match self {
            ValueOracle::Gbm(m) => m.payoff(x),
            ValueOracle::Tabulated(t) => t.payoff(x),
        }
    }

    /// Membership in the one-player stopping region.
    pub fn in_stop_region(&self, x: f64) -> bool {
        match self {
            ValueOracle::Gbm(m) => x >= m.threshold(),
            ValueOracle::Tabulated(t) => {
                let (v, g) = (t.value(x), t.payoff(x));
                v - g <= STOP_TOLERANCE * v.max(1.0)
            }
        }
    }

    pub fn gbm(&self) -> Option<&GbmRealOptionModel> {
        match self {
            ValueOracle::Gbm(m) => Some(m),
            ValueOracle::Tabulated(_) => None,
        }
    }

    /// Interval on which the oracle is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            ValueOracle::Gbm(_) => (0.0, f64::INFINITY),
            ValueOracle::Tabulated(t) => t.domain(),
        }
    }
}

impl From<GbmRealOptionModel> for ValueOracle {
    fn from(m: GbmRealOptionModel) -> Self {
        ValueOracle::Gbm(m)
    }
}

impl From<TabulatedOracle> for ValueOracle {
    fn from(t: TabulatedOracle) -> Self {
        ValueOracle::Tabulated(t)
    }
}

/// One row of the chain: probabilities of moving down, staying, moving up.
#[derive(Debug, Clone, Copy)]
struct Step {
    down: f64,
    stay: f64,
    up: f64,
}

fn local_moments(spec: &DiffusionSpec, kind: GridKind, x: f64) -> Result<(f64, f64)> {
    let a = (spec.drift)(x);
    let s = (spec.diffusion)(x);
    if !(s > 0.0) || !s.is_finite() || !a.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "diffusion coefficient must be positive and finite on the grid (x = {x}, sigma = {s})"
        )));
    }
    Ok(match kind {
        GridKind::Linear => (a, s * s),
        GridKind::Log => (a / x - 0.5 * s * s / (x * x), s * s / (x * x)),
    })
}

/// Solves the discretized one-player problem by value iteration.
pub fn solve_value_chain(
    spec: &DiffusionSpec,
    g: impl Fn(f64) -> f64,
    disc: &Discretization,
) -> Result<(TabulatedOracle, SolveStats)> {
    disc.validate(spec)?;
    if !(spec.discount >= 0.0) {
        return Err(Error::InvalidGrid(format!("discount must be >= 0, got {}", spec.discount)));
    }
    let xs = disc.nodes_vec();
    let n = xs.len();
    let h = match disc.kind {
        GridKind::Linear => (disc.x_max - disc.x_min) / (n - 1) as f64,
        GridKind::Log => (disc.x_max.ln() - disc.x_min.ln()) / (n - 1) as f64,
    };

    let moments = xs
        .iter()
        .map(|&x| local_moments(spec, disc.kind, x))
        .collect::<Result<Vec<_>>>()?;

    // Largest dt keeping every row a probability vector.
    let rate = moments
        .iter()
        .map(|&(m, v)| v / (h * h) + m.abs() / h)
        .fold(0.0_f64, f64::max);
    let dt = disc.courant / rate;

    let steps: Vec<Step> = moments
        .iter()
        .map(|&(m, v)| {
            let diff = 0.5 * v * dt / (h * h);
            let adv = 0.5 * m * dt / h;
            let (down, up) = if diff >= adv.abs() {
                (diff - adv, diff + adv)
            } else {
                // upwind once advection dominates
                (diff + (-2.0 * adv).max(0.0), diff + (2.0 * adv).max(0.0))
            };
            Step { down, stay: (1.0 - down - up).max(0.0), up }
        })
        .collect();

    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    if let Some(i) = gs.iter().position(|a| !a.is_finite()) {
        return Err(Error::InvalidGrid(format!("payoff is not finite at x = {}", xs[i])));
    }
    let beta = (-spec.discount * dt).exp();

    let mut v = gs.clone();
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < disc.max_sweeps {
        sweeps += 1;
        residual = 0.0;
        for i in 0..n {
            let s = steps[i];
            let cont = if i == 0 || i == n - 1 {
                match disc.boundary {
                    BoundaryRule::Absorbing => f64::NEG_INFINITY,
                    BoundaryRule::Reflecting if i == 0 => {
                        beta * ((s.stay + s.down) * v[0] + s.up * v[1])
                    }
                    BoundaryRule::Reflecting => beta * (s.down * v[i - 1] + (s.stay + s.up) * v[i]),
                }
            } else {
                beta * (s.down * v[i - 1] + s.stay * v[i] + s.up * v[i + 1])
            };
            let new = gs[i].max(cont);
            residual = residual.max((new - v[i]).abs());
            next[i] = new;
        }
        std::mem::swap(&mut v, &mut next);
        if residual < disc.tolerance {
            break;
        }
    }
    if residual >= disc.tolerance {
        return Err(Error::NonConvergence { sweeps, residual });
    }

    let oracle = TabulatedOracle::new(xs, v, gs)?;
    Ok((oracle, SolveStats { sweeps, residual, dt }))
}

/// Indices of grid nodes where `V - g <= tol * max(1, V)`.
pub fn stop_region(oracle: &TabulatedOracle, tol: f64) -> Vec<usize> {
    oracle
        .v
        .iter()
        .zip(&oracle.g)
        .enumerate()
        .filter(|(_, (&v, &g))| v - g <= tol * v.max(1.0))
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn call(k: f64) -> impl Fn(f64) -> f64 {
        move |x: f64| (x - k).max(0.0)
    }

    #[test]
    fn too_few_nodes_is_invalid() {
        let spec = DiffusionSpec::gbm(0.0, 0.2, 0.04);
        let disc = Discretization { nodes: 2, ..Default::default() };
        assert!(matches!(solve_value_chain(&spec, call(1.0), &disc), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn log_grid_needs_positive_lower_end() {
        let spec = DiffusionSpec::new(|_| 0.0, |_| 1.0, f64::NEG_INFINITY, f64::INFINITY, 0.1);
        let disc = Discretization { x_min: -1.0, x_max: 1.0, ..Default::default() };
        assert!(matches!(solve_value_chain(&spec, call(0.0), &disc), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn zero_payoff_gives_zero_value() {
        let spec = DiffusionSpec::gbm(0.0, 0.2, 0.04);
        let (oracle, stats) = solve_value_chain(&spec, |_| 0.0, &Discretization::default()).unwrap();
        assert!(oracle.values().iter().all(|&v| v == 0.0));
        assert_eq!(stats.sweeps, 1);
        assert_eq!(stop_region(&oracle, 1e-9).len(), oracle.nodes().len());
    }

    #[test]
    fn non_convergence_reports_residual() {
        let spec = DiffusionSpec::gbm(0.0, 0.2, 0.04);
        let disc = Discretization { max_sweeps: 10, ..Default::default() };
        match solve_value_chain(&spec, call(1.0), &disc) {
            Err(Error::NonConvergence { sweeps, residual }) => {
                assert_eq!(sweeps, 10);
                assert!(residual > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn stop_region_of_gbm_call_starts_at_threshold() {
        let spec = DiffusionSpec::gbm(0.0, 0.2, 0.04);
        let (oracle, _) = solve_value_chain(&spec, call(1.0), &Discretization::default()).unwrap();
        let region = stop_region(&oracle, 1e-6);
        let first = region.iter().copied().find(|&i| oracle.nodes()[i] > 1.0).unwrap();
        let xs = oracle.nodes();
        // within one cell of B = 2
        assert!(xs[first] >= xs[first - 1]);
        assert!((xs[first - 1] - 2.0).abs() <= (xs[first] - xs[first - 1]) * 1.5
            || (xs[first] - 2.0).abs() <= (xs[first] - xs[first - 1]) * 1.5,
            "first stop node {}", xs[first]);
        // every node above it is in the region
        assert!(region.iter().rev().take_while(|&&i| i >= first).count() == xs.len() - first);
    }

    #[test]
    fn interior_continuation_has_empty_interior_region() {
        // V > g on the whole interior: strictly positive payoff well inside, r tiny
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let g = vec![0.0, 0.5, 0.5, 0.0];
        let v = vec![0.0, 0.6, 0.7, 0.0];
        let t = TabulatedOracle::new(x, v, g).unwrap();
        let region = stop_region(&t, 1e-9);
        assert!(region.iter().all(|&i| i == 0 || i == 3));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let spec = DiffusionSpec::gbm(0.0, 0.2, 0.04);
        let disc = Discretization { nodes: 41, ..Default::default() };
        let (oracle, _) = solve_value_chain(&spec, call(1.0), &disc).unwrap();
        let mut buf = Vec::new();
        oracle.write_csv(&mut buf).unwrap();
        let back = TabulatedOracle::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, oracle);
    }

    #[test]
    fn csv_rejects_bad_header() {
        let err = TabulatedOracle::read_csv("a,b,c\n1,2,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn interpolation_keeps_value_above_payoff() {
        let t = TabulatedOracle::new(vec![0.0, 1.0, 2.0], vec![1.0, 1.5, 2.0], vec![0.0, 1.0, 2.0]).unwrap();
        for k in 0..=200 {
            let x = k as f64 / 100.0;
            assert!(t.value(x) >= t.payoff(x));
        }
        assert_eq!(t.value(-1.0), 1.0);
        assert_eq!(t.value(5.0), 2.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn value_is_monotone_in_payoff(
            a in prop::collection::vec(0.0f64..1.0, 6),
            bump in prop::collection::vec(0.0f64..0.5, 6),
        ) {
            // piecewise-linear payoffs on [0, 5], g2 = g1 + bump >= g1
            let knots: Vec<f64> = (0..6).map(|i| i as f64).collect();
            let g1v = a.clone();
            let g2v: Vec<f64> = a.iter().zip(&bump).map(|(x, y)| x + y).collect();
            let lin = |vals: Vec<f64>| {
                let knots = knots.clone();
                move |x: f64| {
                    let i = ((x.floor() as usize).min(4)).max(0);
                    let w = (x - knots[i]).clamp(0.0, 1.0);
                    vals[i] + w * (vals[i + 1] - vals[i])
                }
            };
            let spec = DiffusionSpec::new(|_| 0.05, |_| 0.5, f64::NEG_INFINITY, f64::INFINITY, 0.1);
            let disc = Discretization {
                kind: GridKind::Linear, x_min: 0.0, x_max: 5.0, nodes: 51, ..Default::default()
            };
            let (o1, s1) = solve_value_chain(&spec, lin(g1v), &disc).unwrap();
            let (o2, s2) = solve_value_chain(&spec, lin(g2v), &disc).unwrap();
            for (v1, v2) in o1.values().iter().zip(o2.values()) {
                prop_assert!(*v1 <= *v2 + 1e-8);
            }
            prop_assert!(s1.residual < 1e-10 && s2.residual < 1e-10);
        }
    }

    #[test]
    fn one_minus_p_times_value_is_nonincreasing_in_p() {
        let spec = DiffusionSpec::gbm(0.0, 0.2, 0.04);
        let (o, _) = solve_value_chain(&spec, call(1.0), &Discretization::default()).unwrap();
        for &v in o.values() {
            let mut prev = f64::INFINITY;
            for k in 0..=20 {
                let p = k as f64 / 20.0;
                let cur = (1.0 - p) * v;
                assert!(cur <= prev);
                prev = cur;
            }
        }
    }
}
