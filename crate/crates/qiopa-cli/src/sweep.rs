//! Parsing for `start:stop:step` sweeps and scalar-or-sweep arguments.

use std::fmt;
use std::str::FromStr;

/// An inclusive arithmetic sweep. The final point is the largest
/// `start + n·step` that stays within half a step of `stop`, so exact
/// endpoints survive floating-point noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepSpec {
    pub fn count(&self) -> usize {
        ((self.stop - self.start) / self.step + 0.5) as usize + 1
    }

    pub fn point(&self, index: usize) -> f64 {
        self.start + self.step * index as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count()).map(|i| self.point(i)).collect()
    }

    fn validate(self) -> Result<Self, String> {
        if !self.start.is_finite() || !self.stop.is_finite() || !self.step.is_finite() {
            return Err("sweep bounds must be finite".into());
        }
        if self.step <= 0.0 {
            return Err("sweep step must be positive".into());
        }
        if self.stop < self.start {
            return Err("sweep stop must not precede start".into());
        }
        if self.count() < 2 {
            return Err("a sweep needs at least 2 points".into());
        }
        Ok(self)
    }
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got `{s}`"));
        }
        let num = |p: &str| {
            p.parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
        };
        SweepSpec {
            start: num(parts[0])?,
            stop: num(parts[1])?,
            step: num(parts[2])?,
        }
        .validate()
    }
}

/// A numeric argument accepting either one value or a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NumArg {
    Scalar(f64),
    Sweep(SweepSpec),
}

impl NumArg {
    pub fn points(&self) -> Vec<f64> {
        match self {
            NumArg::Scalar(v) => vec![*v],
            NumArg::Sweep(s) => s.points(),
        }
    }
}

impl fmt::Display for NumArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumArg::Scalar(v) => write!(f, "{v}"),
            NumArg::Sweep(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for NumArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.contains(':') {
            Ok(NumArg::Sweep(s.parse()?))
        } else {
            let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
            if !v.is_finite() {
                return Err("value must be finite".into());
            }
            Ok(NumArg::Scalar(v))
        }
    }
}

/// An integer argument accepting either one value or an inclusive
/// stepped range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IntArg {
    Scalar(usize),
    Range {
        start: usize,
        stop: usize,
        step: usize,
    },
}

impl IntArg {
    pub fn points(&self) -> Vec<usize> {
        match *self {
            IntArg::Scalar(v) => vec![v],
            IntArg::Range { start, stop, step } => (start..=stop).step_by(step).collect(),
        }
    }
}

impl fmt::Display for IntArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            IntArg::Scalar(v) => write!(f, "{v}"),
            IntArg::Range { start, stop, step } => write!(f, "{start}:{stop}:{step}"),
        }
    }
}

impl FromStr for IntArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| format!("`{p}` is not a non-negative integer"))
        };
        if !s.contains(':') {
            return Ok(IntArg::Scalar(num(s)?));
        }
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got `{s}`"));
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step == 0 {
            return Err("range step must be positive".into());
        }
        if stop < start {
            return Err("range stop must not precede start".into());
        }
        if (stop - start) / step < 1 {
            return Err("a sweep needs at least 2 points".into());
        }
        Ok(IntArg::Range { start, stop, step })
    }
}
