//! Belief boundaries and the partition of `(p, x)` space.
//!
//! For a prior `p` that the opponent exists and a state `x`:
//!
//! - `b(x) = 1 - g/V` is the largest `p` with `(1 - p) V >= g` (no action),
//! - `c(x) = (V - g) / (V - g/2)` is the smallest `p` with `(1 - p) V <= (1 - p/2) g`
//!   (immediate stopping),
//!
//! and `0 <= b <= c <= 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stopping::ValueOracle;

/// A prior/belief `p` paired with a state `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefPoint {
    pub p: f64,
    pub x: f64,
}

impl BeliefPoint {
    /// `p` may be 0 here so that the degenerate priors can be classified too.
    pub fn new(p: f64, x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidConfig(format!("belief must lie in [0, 1], got {p}")));
        }
        if !x.is_finite() {
            return Err(Error::InvalidConfig(format!("state must be finite, got {x}")));
        }
        Ok(Self { p, x })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    /// `p <= b(x)`: no action, the closure of the continuation set.
    ContinuationBar,
    /// `b(x) < p < c(x)`: the action region, entered with a stopping atom.
    ActionPrime,
    /// `p >= c(x)`: both players stop at once.
    Stop,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::ContinuationBar => "ContinuationBar",
            RegionLabel::ActionPrime => "ActionPrime",
            RegionLabel::Stop => "Stop",
        }
    }
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn value_and_payoff(oracle: &ValueOracle, x: f64) -> Result<(f64, f64)> {
    let v = oracle.value(x);
    let g = oracle.payoff(x);
    if !(v > 0.0) {
        return Err(Error::CorruptOracle { x, reason: "value is not strictly positive" });
    }
    if g < 0.0 {
        return Err(Error::CorruptOracle { x, reason: "payoff is negative" });
    }
    Ok((v, g))
}

/// `b(x) = 1 - g(x)/V(x)`, clamped to `[0, 1]`.
pub fn boundary_b(oracle: &ValueOracle, x: f64) -> Result<f64> {
    let (v, g) = value_and_payoff(oracle, x)?;
    Ok((1.0 - g / v).clamp(0.0, 1.0))
}

/// `c(x) = (V - g) / (V - g/2)`, clamped to `[0, 1]`.
pub fn boundary_c(oracle: &ValueOracle, x: f64) -> Result<f64> {
    let (v, g) = value_and_payoff(oracle, x)?;
    let den = v - 0.5 * g;
    if !(den > 0.0) {
        return Err(Error::CorruptOracle { x, reason: "value does not exceed half the payoff" });
    }
    Ok(((v - g) / den).clamp(0.0, 1.0))
}

/// Ties go to the closed sets: `p == b` is `ContinuationBar`, `p == c` is `Stop`.
pub fn classify(oracle: &ValueOracle, point: BeliefPoint) -> Result<RegionLabel> {
    let b = boundary_b(oracle, point.x)?;
    let c = boundary_c(oracle, point.x)?;
    Ok(if point.p <= b {
        RegionLabel::ContinuationBar
    } else if point.p >= c {
        RegionLabel::Stop
    } else {
        RegionLabel::ActionPrime
    })
}

/// `V0(p, x) = max((1 - p) V, (1 - p/2) g)`, the payoff a player can secure alone.
pub fn safety_level(oracle: &ValueOracle, point: BeliefPoint) -> f64 {
    let v = oracle.value(point.x);
    let g = oracle.payoff(point.x);
    ((1.0 - point.p) * v).max((1.0 - 0.5 * point.p) * g)
}

/// Solves `b(x) = y` by bisection on a bracket where `b` decreases through `y`.
///
/// `y = 0` maps to the lower end of the one-player stopping region and `y = 1`
/// to the upper end of the zero-payoff region.
pub fn b_inverse(oracle: &ValueOracle, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::NotInvertible { level: y, reason: "level outside [0, 1]" });
    }
    match oracle {
        ValueOracle::Gbm(m) => {
            let (lo, hi) = (m.strike(), m.threshold());
            if y == 0.0 {
                return Ok(hi);
            }
            if y == 1.0 {
                return Ok(lo);
            }
            bisect_decreasing(|x| boundary_b(oracle, x), lo, hi, y)
        }
        ValueOracle::Tabulated(t) if y == 0.0 => {
            // {b = 0} is the stop region, decided with the oracle's tolerance
            let xs = t.nodes();
            let first = xs.iter().rposition(|&x| !oracle.in_stop_region(x)).map_or(0, |i| i + 1);
            if first == xs.len() {
                return Err(Error::NotInvertible { level: y, reason: "the grid has no stop region at its upper end" });
            }
            Ok(xs[first])
        }
        ValueOracle::Tabulated(t) => {
            let xs = t.nodes();
            let bs = xs
                .iter()
                .map(|&x| boundary_b(oracle, x))
                .collect::<Result<Vec<_>>>()?;
            let mut down = None;
            let mut up = 0usize;
            for i in 0..bs.len() - 1 {
                let (f0, f1) = (bs[i] - y, bs[i + 1] - y);
                if f0 > 0.0 && f1 <= 0.0 {
                    if down.is_some() {
                        return Err(Error::NotInvertible {
                            level: y,
                            reason: "tabulated b crosses the level more than once",
                        });
                    }
                    down = Some(i);
                } else if f0 <= 0.0 && f1 > 0.0 {
                    up += 1;
                }
            }
            match (down, up) {
                (Some(i), 0) => {
                    if bs[i + 1] == y {
                        return Ok(xs[i + 1]);
                    }
                    bisect_decreasing(|x| boundary_b(oracle, x), xs[i], xs[i + 1], y)
                }
                (None, _) if bs.first() == Some(&y) => Ok(xs[0]),
                (None, _) => Err(Error::NotInvertible { level: y, reason: "level is not bracketed" }),
                (Some(_), _) => Err(Error::NotInvertible {
                    level: y,
                    reason: "tabulated b is not monotone through the level",
                }),
            }
        }
    }
}

/// Bisection for a nonincreasing `f` with `f(lo) >= y >= f(hi)`; runs until the
/// bracket stops shrinking in floating point.
fn bisect_decreasing(
    f: impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    y: f64,
) -> Result<f64> {
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if !(flo >= y && fhi <= y) {
        return Err(Error::NotInvertible { level: y, reason: "bracket does not contain the level" });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == y {
            return Ok(mid);
        }
        if fm > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (f(lo)?, f(hi)?);
    Ok(if (flo - y).abs() <= (fhi - y).abs() { lo } else { hi })
}
