//! `key=value` files: run configurations and solver specifications.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use dynkin_core::stopping::{BoundaryRule, GridKind};
use dynkin_core::{DiffusionSpec, Discretization};

/// Keys accepted in a `--config` file.
pub const RUN_KEYS: &[&str] = &["mu", "sigma", "r", "K", "p1", "p2", "x", "seed", "n_paths", "dt", "t_max", "mode"];

/// Keys accepted in a `solve --spec` file.
pub const SPEC_KEYS: &[&str] = &[
    "family", "mu", "sigma", "r", "kappa", "theta", "payoff", "strike", "grid", "x_min", "x_max", "nodes", "courant",
    "tolerance", "max_sweeps", "boundary",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    /// Parses `key=value` lines. Blank lines and lines starting with `#` are
    /// skipped; keys outside `allowed` are rejected.
    pub fn parse(text: &str, allowed: &[&str]) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value, got {line:?}", i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if !allowed.contains(&k) {
                return Err(format!("line {}: unknown key {k:?}", i + 1));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(format!("line {}: key {k:?} given twice", i + 1));
            }
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path, allowed: &[&str]) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text, allowed).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        self.entries
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| format!("bad value {v:?} for {key}: {e}")))
            .transpose()
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or_else(|| format!("missing key {key:?}"))
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }
}

/// A one-dimensional stopping problem read from a spec file.
pub struct SolveSpec {
    pub diffusion: DiffusionSpec,
    pub strike: f64,
    pub call: bool,
    pub grid: Discretization,
}

impl SolveSpec {
    pub fn payoff(&self) -> impl Fn(f64) -> f64 + '_ {
        move |x| if self.call { (x - self.strike).max(0.0) } else { (self.strike - x).max(0.0) }
    }

    /// Families: `gbm` (mu, sigma), `ou` (kappa, theta, sigma, state on the
    /// real line) and `cir` (kappa, theta, sigma, positive state). All need
    /// `r` and `strike`.
    pub fn from_kv(kv: &KeyValues) -> Result<Self, String> {
        let family: String = kv.require("family")?;
        let r: f64 = kv.require("r")?;
        let sigma: f64 = kv.require("sigma")?;
        let diffusion = match family.as_str() {
            "gbm" => DiffusionSpec::gbm(kv.require("mu")?, sigma, r),
            "ou" => {
                let (kappa, theta): (f64, f64) = (kv.require("kappa")?, kv.require("theta")?);
                DiffusionSpec::new(
                    move |x| kappa * (theta - x),
                    move |_| sigma,
                    f64::NEG_INFINITY,
                    f64::INFINITY,
                    r,
                )
            }
            "cir" => {
                let (kappa, theta): (f64, f64) = (kv.require("kappa")?, kv.require("theta")?);
                DiffusionSpec::new(
                    move |x| kappa * (theta - x),
                    move |x: f64| sigma * x.max(0.0).sqrt(),
                    0.0,
                    f64::INFINITY,
                    r,
                )
            }
            other => return Err(format!("unknown family {other:?} (expected gbm, ou or cir)")),
        };
        let call = match kv.or("payoff", "call".to_string())?.as_str() {
            "call" => true,
            "put" => false,
            other => return Err(format!("unknown payoff {other:?} (expected call or put)")),
        };
        let d = Discretization::default();
        let kind = match kv.get::<String>("grid")?.as_deref() {
            None if family == "ou" => GridKind::Linear,
            None => d.kind,
            Some("log") => GridKind::Log,
            Some("linear") => GridKind::Linear,
            Some(other) => return Err(format!("unknown grid {other:?} (expected log or linear)")),
        };
        let boundary = match kv.or("boundary", "absorbing".to_string())?.as_str() {
            "absorbing" => BoundaryRule::Absorbing,
            "reflecting" => BoundaryRule::Reflecting,
            other => return Err(format!("unknown boundary {other:?} (expected absorbing or reflecting)")),
        };
        let grid = Discretization {
            kind,
            x_min: kv.or("x_min", d.x_min)?,
            x_max: kv.or("x_max", d.x_max)?,
            nodes: kv.or("nodes", d.nodes)?,
            courant: kv.or("courant", d.courant)?,
            tolerance: kv.or("tolerance", d.tolerance)?,
            max_sweeps: kv.or("max_sweeps", d.max_sweeps)?,
            boundary,
        };
        Ok(Self { diffusion, strike: kv.require("strike")?, call, grid })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let kv = KeyValues::parse("# run\nmu=0\n\n sigma = 0.2\nmode=path\n", RUN_KEYS).unwrap();
        assert_eq!(kv.get::<f64>("sigma").unwrap(), Some(0.2));
        assert_eq!(kv.get::<f64>("r").unwrap(), None);
        assert_eq!(kv.get::<String>("mode").unwrap().as_deref(), Some("path"));
        assert!(kv.get::<f64>("mode").is_err());
        assert!(KeyValues::parse("nope=1", RUN_KEYS).is_err());
        assert!(KeyValues::parse("mu", RUN_KEYS).is_err());
        assert!(KeyValues::parse("mu=1\nmu=2", RUN_KEYS).is_err());
    }

    #[test]
    fn solve_spec_defaults() {
        let kv = KeyValues::parse("family=gbm\nmu=0\nsigma=0.2\nr=0.04\nstrike=1", SPEC_KEYS).unwrap();
        let s = SolveSpec::from_kv(&kv).unwrap();
        assert!(s.call);
        assert_eq!(s.grid, Discretization::default());
        assert_eq!((s.payoff())(1.5), 0.5);

        let kv = KeyValues::parse("family=ou\nkappa=1\ntheta=0\nsigma=0.3\nr=0.05\nstrike=0\npayoff=put\nx_min=-2\nx_max=2", SPEC_KEYS)
            .unwrap();
        let s = SolveSpec::from_kv(&kv).unwrap();
        assert_eq!(s.grid.kind, GridKind::Linear);
        assert_eq!((s.payoff())(-1.0), 1.0);
        let kv = KeyValues::parse("family=heston\nsigma=1\nr=0.1\nstrike=1", SPEC_KEYS).unwrap();
        assert!(SolveSpec::from_kv(&kv).is_err());
    }
}
