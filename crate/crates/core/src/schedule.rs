//! Friction schedules `gamma: {0, ..., T-1} -> [0, 1]`.
//!
//! A schedule is *admissible* for the finite-horizon bounds when it is
//! non-decreasing with `gamma(0) = 0` and `gamma(T-1) = 1` exactly. All ramp
//! variants satisfy this; constant schedules and the uncorrected quadratic do
//! not and are meant for free simulation only.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::exact_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    /// `i / (T-1)`
    Linear,
    /// Fixed `c` in `[0, 1]`.
    Constant(f64),
    /// `(i / (T-1))^2`
    Quadratic,
    /// `(i / T)^2`, which stops short of 1 at the last step.
    QuadraticRaw,
    /// `sin(pi i / (2 (T-1)))`
    Sine,
    /// Zero before the given step, then a linear ramp reaching 1 at `T-1`.
    DelayedLinear(usize),
    /// Delayed ramp starting at `floor(T/4)`.
    DelayedDefault,
}

/// A schedule variant bound to a horizon `T >= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
    horizon: usize,
}

impl Schedule {
    pub fn new(kind: ScheduleKind, horizon: usize) -> Result<Self> {
        if horizon < 2 {
            return Err(Error::invalid(
                "horizon",
                format!("need T >= 2, got {horizon}"),
            ));
        }
        let kind = match kind {
            ScheduleKind::Constant(c) if !(0.0..=1.0).contains(&c) => {
                return Err(Error::GammaOutOfRange(c))
            }
            ScheduleKind::DelayedLinear(start) if start >= horizon - 1 => {
                return Err(Error::invalid(
                    "delay",
                    format!("ramp start {start} must be below T-1 = {}", horizon - 1),
                ))
            }
            ScheduleKind::DelayedDefault => ScheduleKind::DelayedLinear(horizon / 4),
            k => k,
        };
        Ok(Schedule { kind, horizon })
    }

    pub fn linear(horizon: usize) -> Result<Self> {
        Self::new(ScheduleKind::Linear, horizon)
    }

    pub fn constant(c: f64, horizon: usize) -> Result<Self> {
        Self::new(ScheduleKind::Constant(c), horizon)
    }

    /// Parse `linear`, `constant:0.5`, `quadratic`, `quadratic-raw`, `sine`,
    /// `delayed` or `delayed:25`.
    pub fn parse(spec: &str, horizon: usize) -> Result<Self> {
        Self::new(spec.parse()?, horizon)
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Same variant on a different horizon. A fixed delay is kept.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        Self::new(self.kind, horizon)
    }

    /// `gamma(i)` for `0 <= i <= T-1`.
    pub fn gamma(&self, i: usize) -> Result<f64> {
        if i >= self.horizon {
            return Err(Error::StepOutOfRange {
                index: i,
                horizon: self.horizon,
            });
        }
        let last = (self.horizon - 1) as f64;
        let t = i as f64;
        Ok(match self.kind {
            ScheduleKind::Linear => t / last,
            ScheduleKind::Constant(c) => c,
            ScheduleKind::Quadratic => (t / last).powi(2),
            ScheduleKind::QuadraticRaw => (t / self.horizon as f64).powi(2),
            ScheduleKind::Sine => {
                if i == self.horizon - 1 {
                    1.0
                } else {
                    (std::f64::consts::FRAC_PI_2 * t / last).sin()
                }
            }
            ScheduleKind::DelayedLinear(start) => {
                if i < start {
                    0.0
                } else {
                    (i - start) as f64 / (self.horizon - 1 - start) as f64
                }
            }
            ScheduleKind::DelayedDefault => unreachable!("resolved in Schedule::new"),
        })
    }

    /// All `T` values.
    pub fn values(&self) -> Vec<f64> {
        (0..self.horizon)
            .map(|i| self.gamma(i).expect("index within horizon"))
            .collect()
    }

    /// `sum_{i<T} (1 - gamma(i))`, correctly rounded.
    pub fn residual_sum(&self) -> f64 {
        exact_sum(self.values().into_iter().map(|g| 1.0 - g))
    }

    /// Non-decreasing with exact boundary values 0 and 1.
    pub fn is_admissible(&self) -> bool {
        admissibility_violation(&self.values()).is_none()
    }
}

/// Describes why a sequence of friction values is not admissible, if it is
/// not.
pub fn admissibility_violation(gammas: &[f64]) -> Option<String> {
    let (first, last) = match (gammas.first(), gammas.last()) {
        (Some(f), Some(l)) if gammas.len() >= 2 => (*f, *l),
        _ => return Some("schedule shorter than two steps".into()),
    };
    if first != 0.0 {
        return Some(format!("gamma(0) = {first}, expected 0"));
    }
    if last != 1.0 {
        return Some(format!("gamma(T-1) = {last}, expected 1"));
    }
    if let Some(i) = gammas.windows(2).position(|w| w[1] < w[0]) {
        return Some(format!("schedule decreases at step {}", i + 1));
    }
    None
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s.as_str(), None),
        };
        let bad = |what: &str| Error::Parse(format!("bad {what} in schedule `{s}`"));
        match (name, arg) {
            ("linear", None) => Ok(ScheduleKind::Linear),
            ("constant", Some(a)) => a
                .parse::<f64>()
                .map(ScheduleKind::Constant)
                .map_err(|_| bad("constant value")),
            ("quadratic", None) => Ok(ScheduleKind::Quadratic),
            ("quadratic-raw", None) => Ok(ScheduleKind::QuadraticRaw),
            ("sine" | "sin", None) => Ok(ScheduleKind::Sine),
            ("delayed", None) => Ok(ScheduleKind::DelayedDefault),
            ("delayed", Some(a)) => a
                .parse::<usize>()
                .map(ScheduleKind::DelayedLinear)
                .map_err(|_| bad("delay")),
            _ => Err(Error::Parse(format!("unknown schedule `{s}`"))),
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleKind::Linear => f.write_str("linear"),
            ScheduleKind::Constant(c) => write!(f, "constant:{c}"),
            ScheduleKind::Quadratic => f.write_str("quadratic"),
            ScheduleKind::QuadraticRaw => f.write_str("quadratic-raw"),
            ScheduleKind::Sine => f.write_str("sine"),
            ScheduleKind::DelayedLinear(s) => write!(f, "delayed:{s}"),
            ScheduleKind::DelayedDefault => f.write_str("delayed"),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_values() {
        let s = Schedule::linear(5).unwrap();
        assert_eq!(s.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        for t in [2, 3, 17, 1000] {
            let s = Schedule::linear(t).unwrap();
            assert_eq!(s.gamma(0).unwrap(), 0.0);
            assert_eq!(s.gamma(t - 1).unwrap(), 1.0);
        }
        assert!(matches!(
            s.gamma(5),
            Err(Error::StepOutOfRange {
                index: 5,
                horizon: 5
            })
        ));
    }

    #[test]
    fn quadratic_values() {
        let s = Schedule::new(ScheduleKind::Quadratic, 5).unwrap();
        assert_eq!(s.gamma(2).unwrap(), 0.25);
        assert!(s.is_admissible());
        let raw = Schedule::new(ScheduleKind::QuadraticRaw, 5).unwrap();
        assert_eq!(raw.gamma(4).unwrap(), (4.0f64 / 5.0).powi(2));
        assert!(!raw.is_admissible());
    }

    #[test]
    fn residual_sums() {
        for t in 2..=50 {
            assert_eq!(Schedule::linear(t).unwrap().residual_sum(), t as f64 / 2.0);
        }
        assert_eq!(Schedule::constant(1.0, 9).unwrap().residual_sum(), 0.0);
        // 5 - (0 + 1/16 + 4/16 + 9/16 + 1)
        assert_eq!(
            Schedule::new(ScheduleKind::Quadratic, 5)
                .unwrap()
                .residual_sum(),
            3.125
        );
    }

    #[test]
    fn delayed_ramp() {
        let s = Schedule::parse("delayed:2", 6).unwrap();
        assert_eq!(s.values(), vec![0.0, 0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
        let d = Schedule::parse("delayed", 100).unwrap();
        assert_eq!(d.kind(), ScheduleKind::DelayedLinear(25));
        assert_eq!(d.gamma(25).unwrap(), 0.0);
        assert!(d.gamma(26).unwrap() > 0.0);
        assert!(Schedule::parse("delayed:9", 10).is_err());
    }

    #[test]
    fn admissibility() {
        for spec in ["linear", "quadratic", "sine", "delayed", "delayed:3"] {
            for t in [2usize, 5, 64, 301] {
                if spec == "delayed:3" && t <= 4 {
                    continue;
                }
                let s = Schedule::parse(spec, t).unwrap();
                assert!(s.is_admissible(), "{spec} T={t}");
            }
        }
        assert!(!Schedule::parse("constant:0.5", 10).unwrap().is_admissible());
        assert!(!Schedule::parse("constant:0", 10).unwrap().is_admissible());
        assert_eq!(
            admissibility_violation(&[0.0, 0.6, 0.5, 1.0]).unwrap(),
            "schedule decreases at step 2"
        );
    }

    #[test]
    fn parse_and_display_round_trip() {
        for spec in [
            "linear",
            "constant:0.5",
            "quadratic",
            "quadratic-raw",
            "sine",
            "delayed:25",
        ] {
            let kind: ScheduleKind = spec.parse().unwrap();
            assert_eq!(kind.to_string(), spec);
        }
        assert!("cosine".parse::<ScheduleKind>().is_err());
        assert!("constant".parse::<ScheduleKind>().is_err());
        assert!("constant:x".parse::<ScheduleKind>().is_err());
        assert!(Schedule::parse("constant:1.5", 4).is_err());
        assert!(Schedule::linear(1).is_err());
    }

    #[test]
    fn residual_ordering() {
        for t in 3..=200 {
            let q = Schedule::parse("quadratic", t).unwrap().residual_sum();
            let l = Schedule::parse("linear", t).unwrap().residual_sum();
            let s = Schedule::parse("sine", t).unwrap().residual_sum();
            assert!(q > l && l > s, "T={t}: {q} {l} {s}");
        }
    }
}
