use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

/// Direction of a pass condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// `value < threshold`
    Below,
    /// `value > threshold`
    Above,
    /// `value >= threshold`
    AtLeast,
}

impl Bound {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Bound::Below => value < threshold,
            Bound::Above => value > threshold,
            Bound::AtLeast => value >= threshold,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Bound::Below => "<",
            Bound::Above => ">",
            Bound::AtLeast => ">=",
        }
    }

    fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "<" => Some(Bound::Below),
            ">" => Some(Bound::Above),
            ">=" => Some(Bound::AtLeast),
            _ => None,
        }
    }
}

/// One pass flag: `metric` compared against `threshold`.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    /// Descriptive tag of the property being checked.
    pub tag: String,
    pub metric: String,
    pub bound: Bound,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn describe(&self, value: f64) -> String {
        format!("{} = {value:e} (required {} {:e})", self.metric, self.bound.symbol(), self.threshold)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub params: BTreeMap<String, String>,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub duration_s: f64,
}

#[derive(Debug, PartialEq, Eq)]
pub struct ParseError(pub String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed report: {}", self.0)
    }
}

impl std::error::Error for ParseError {}

impl Report {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self { experiment: experiment.into(), params: BTreeMap::new(), metrics: BTreeMap::new(), checks: Vec::new(), duration_s: 0.0 }
    }

    pub fn param(&mut self, key: &str, value: impl fmt::Display) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Takes over the metrics and checks of a sub-report.
    pub fn absorb(&mut self, other: Report) {
        self.metrics.extend(other.metrics);
        self.checks.extend(other.checks);
    }
}

// Floats go through `{:?}`, which prints the shortest string that parses back
// to the same bits.
impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let _ = writeln!(out, "experiment = {}", self.experiment);
        let _ = writeln!(out, "status = {}", if self.passed() { "pass" } else { "fail" });
        let _ = writeln!(out, "duration_s = {:?}", self.duration_s);
        for (k, v) in &self.params {
            let _ = writeln!(out, "param.{k} = {v}");
        }
        for (k, v) in &self.metrics {
            let _ = writeln!(out, "metric.{k} = {v:?}");
        }
        for c in &self.checks {
            let verdict = if c.pass { "pass" } else { "fail" };
            let _ = writeln!(out, "check.{} = {} {} {:?} {verdict}", c.tag, c.metric, c.bound.symbol(), c.threshold);
        }
        f.write_str(&out)
    }
}

fn float(key: &str, v: &str) -> Result<f64, ParseError> {
    v.parse().map_err(|_| ParseError(format!("`{key}`: bad number `{v}`")))
}

impl FromStr for Report {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, ParseError> {
        let mut report = Report::new("");
        let (mut experiment, mut status, mut duration) = (None, None, None);
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (key, value) = line.split_once(" = ").ok_or_else(|| ParseError(format!("line `{line}`")))?;
            if let Some(k) = key.strip_prefix("param.") {
                report.params.insert(k.to_string(), value.to_string());
            } else if let Some(k) = key.strip_prefix("metric.") {
                report.metrics.insert(k.to_string(), float(key, value)?);
            } else if let Some(tag) = key.strip_prefix("check.") {
                let parts: Vec<&str> = value.split_whitespace().collect();
                let [metric, op, threshold, verdict] = parts[..] else {
                    return Err(ParseError(format!("check `{tag}`: expected `metric op threshold verdict`")));
                };
                let bound = Bound::from_symbol(op).ok_or_else(|| ParseError(format!("check `{tag}`: operator `{op}`")))?;
                let pass = match verdict {
                    "pass" => true,
                    "fail" => false,
                    other => return Err(ParseError(format!("check `{tag}`: verdict `{other}`"))),
                };
                report.checks.push(Check { tag: tag.to_string(), metric: metric.to_string(), bound, threshold: float(key, threshold)?, pass });
            } else {
                match key {
                    "experiment" => experiment = Some(value.to_string()),
                    "status" => status = Some(value == "pass"),
                    "duration_s" => duration = Some(float(key, value)?),
                    other => return Err(ParseError(format!("unknown key `{other}`"))),
                }
            }
        }
        report.experiment = experiment.ok_or_else(|| ParseError("missing experiment".into()))?;
        report.duration_s = duration.ok_or_else(|| ParseError("missing duration_s".into()))?;
        if status != Some(report.passed()) {
            return Err(ParseError("status disagrees with the checks".into()));
        }
        Ok(report)
    }
}
