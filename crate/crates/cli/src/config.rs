//! Flat `key = value` scenario files.
//!
//! ```text
//! # comment
//! [box]
//! times = 0, 0.25, 0.75
//! length = 1
//! ```
//!
//! The single `[name]` header selects the scenario. Every key has a default
//! except `times` for the evolution scenarios; unknown keys are errors.

use std::fmt::Write as _;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Free,
    Box,
    Gravity,
    TwoSlit,
    KappaDial,
    Spectrum,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Free,
        Scenario::Box,
        Scenario::Gravity,
        Scenario::TwoSlit,
        Scenario::KappaDial,
        Scenario::Spectrum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Free => "free",
            Scenario::Box => "box",
            Scenario::Gravity => "gravity",
            Scenario::TwoSlit => "two-slit",
            Scenario::KappaDial => "kappa-dial",
            Scenario::Spectrum => "spectrum",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn keys(self) -> &'static [KeySpec] {
        match self {
            Scenario::Free => FREE,
            Scenario::Box => BOX,
            Scenario::Gravity => GRAVITY,
            Scenario::TwoSlit => TWO_SLIT,
            Scenario::KappaDial => KAPPA_DIAL,
            Scenario::Spectrum => SPECTRUM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Positive,
    Count,
    Seed,
    /// Nonempty, strictly increasing, nonnegative.
    Times,
    /// Nonempty, positive, strictly decreasing.
    Kappas,
    Choice(&'static [&'static str]),
    Path,
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Option<&'static str>,
    pub doc: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: Option<&'static str>, doc: &'static str) -> KeySpec {
    KeySpec { name, kind, default, doc }
}

macro_rules! common {
    () => {
        [
            key("seed", Kind::Seed, Some("1"), "oracle sampling seed"),
            key("output_dir", Kind::Path, Some("kvn-out"), "directory receiving the output files"),
            key("hbar", Kind::Positive, Some("1"), "Planck constant"),
            key("mass", Kind::Positive, Some("1"), "particle mass"),
        ]
    };
}

macro_rules! flow {
    ($qmin:expr, $qmax:expr, $qn:expr, $pn:expr, $dp:expr, $q0:expr, $p0:expr, $sq:expr, $sp:expr) => {
        [
            key("times", Kind::Times, None, "output times, comma separated"),
            key("n_samples", Kind::Count, Some("1000000"), "oracle ensemble size"),
            key("q_min", Kind::Float, Some($qmin), "position axis start"),
            key("q_max", Kind::Float, Some($qmax), "position axis end (exclusive)"),
            key("q_points", Kind::Count, Some($qn), "position samples"),
            key("p_points", Kind::Count, Some($pn), "momentum samples (even)"),
            key("p_spacing", Kind::Positive, Some($dp), "momentum spacing; the axis is centred on 0"),
            key("q0", Kind::Float, Some($q0), "initial mean position"),
            key("p0", Kind::Float, Some($p0), "initial mean momentum"),
            key("sigma_q", Kind::Positive, Some($sq), "initial density width in q"),
            key("sigma_p", Kind::Positive, Some($sp), "initial density width in p"),
        ]
    };
}

static FREE: &[KeySpec] = &{
    let c = common!();
    let f = flow!("-10", "10", "320", "128", "0.0625", "0", "0.3", "0.3", "0.3");
    [c[0], c[1], c[2], c[3], f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8], f[9], f[10]]
};

static BOX: &[KeySpec] = &{
    let c = common!();
    let f = flow!("-1", "1", "256", "256", "0.02", "0.5", "1", "0.07", "0.5");
    [
        c[0],
        c[1],
        c[2],
        c[3],
        f[0],
        f[1],
        key("length", Kind::Positive, Some("1"), "box length L; the grid spans the doubled domain [-L, L)"),
        key("q_points", Kind::Count, Some("256"), "samples on [-L, L)"),
        f[5],
        f[6],
        f[7],
        f[8],
        f[9],
        f[10],
        key("backend", Kind::Choice(&["characteristics", "image-kernel"]), Some("characteristics"), "box propagator"),
        key("n_images", Kind::Count, Some("8"), "image shells for the image-kernel backend"),
    ]
};

static GRAVITY: &[KeySpec] = &{
    let c = common!();
    let f = flow!("-10", "10", "320", "192", "0.0625", "2", "0.5", "0.3", "0.3");
    [
        c[0],
        c[1],
        c[2],
        c[3],
        f[0],
        f[1],
        f[2],
        f[3],
        f[4],
        f[5],
        f[6],
        f[7],
        f[8],
        f[9],
        f[10],
        key("g", Kind::Float, Some("1"), "field strength; V = m g q, g > 0 pulls towards q_min"),
    ]
};

static TWO_SLIT: &[KeySpec] = &{
    let c = common!();
    [
        c[0],
        c[1],
        c[2],
        c[3],
        key("separation", Kind::Float, Some("2"), "slit separation D; 0 runs a single slit"),
        key("slit_width", Kind::Positive, Some("0.1"), "slit width sigma_q"),
        key("momentum_spread", Kind::Positive, Some("0.5"), "KvN momentum width sigma_p"),
        key("t_final", Kind::Positive, Some("1"), "final time"),
    ]
};

static KAPPA_DIAL: &[KeySpec] = &{
    let c = common!();
    [
        c[0],
        c[1],
        c[2],
        c[3],
        key("potential", Kind::Choice(&["quartic", "harmonic"]), Some("quartic"), "V = c q^4 or m omega^2 q^2 / 2"),
        key("coupling", Kind::Positive, Some("0.25"), "quartic c, or harmonic omega"),
        key("kappas", Kind::Kappas, Some("0.4, 0.2, 0.1"), "commutativity parameters, decreasing"),
        key("t_final", Kind::Positive, Some("1"), "final time"),
        key("dt", Kind::Positive, Some("0.001"), "split-step size"),
        key("q0", Kind::Float, Some("1"), "initial mean position"),
        key("p0", Kind::Float, Some("0"), "initial mean momentum"),
        key("sigma_q", Kind::Positive, Some("0.3"), "classical width in q"),
        key("sigma_p", Kind::Positive, Some("0.6666666666666666"), "classical width in p"),
    ]
};

static SPECTRUM: &[KeySpec] = &{
    let c = common!();
    [
        c[0],
        c[1],
        c[2],
        c[3],
        key("length", Kind::Positive, Some("1"), "box length L"),
        key("n_max", Kind::Count, Some("3"), "largest mode index"),
        key("kappa_min", Kind::Float, Some("-5"), "first kappa of the sweep"),
        key("kappa_max", Kind::Float, Some("5"), "last kappa of the sweep"),
        key("kappa_points", Kind::Count, Some("11"), "sweep points"),
    ]
};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    List(Vec<f64>),
    Text(String),
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Float(x) => format!("{x}"),
            Value::Int(n) => n.to_string(),
            Value::List(v) => v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", "),
            Value::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    File,
    Default,
    Flag(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: &'static str,
    pub value: Value,
    pub source: Source,
}

/// A parsed configuration with every key of its scenario resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub entries: Vec<Entry>,
}

fn parse_value(spec: &KeySpec, raw: &str) -> Result<Value, String> {
    let num = |s: &str| -> Result<f64, String> {
        let x: f64 = s.trim().parse().map_err(|_| format!("'{}' is not a number", s.trim()))?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(format!("'{}' is not finite", s.trim()))
        }
    };
    let list = |s: &str| -> Result<Vec<f64>, String> {
        let v = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() {
            Err("empty list".into())
        } else {
            Ok(v)
        }
    };
    match spec.kind {
        Kind::Float => num(raw).map(Value::Float),
        Kind::Positive => {
            let x = num(raw)?;
            if x > 0.0 {
                Ok(Value::Float(x))
            } else {
                Err(format!("{} must be positive", spec.name))
            }
        }
        Kind::Count | Kind::Seed => {
            let n: u64 = raw.parse().map_err(|_| format!("'{raw}' is not a nonnegative integer"))?;
            if spec.kind == Kind::Count && n == 0 {
                return Err(format!("{} must be at least 1", spec.name));
            }
            Ok(Value::Int(n))
        }
        Kind::Times => {
            let v = list(raw)?;
            if v.iter().any(|t| *t < 0.0) {
                return Err("times must be nonnegative".into());
            }
            if v.windows(2).any(|w| w[1] <= w[0]) {
                return Err("times are not strictly increasing".into());
            }
            Ok(Value::List(v))
        }
        Kind::Kappas => {
            let v = list(raw)?;
            if v.iter().any(|k| *k <= 0.0) || v.windows(2).any(|w| w[1] >= w[0]) {
                return Err("kappas must be positive and strictly decreasing".into());
            }
            Ok(Value::List(v))
        }
        Kind::Choice(options) => {
            if options.contains(&raw) {
                Ok(Value::Text(raw.to_string()))
            } else {
                Err(format!("'{raw}' is not one of {}", options.join(", ")))
            }
        }
        Kind::Path => {
            if raw.is_empty() {
                Err("empty path".into())
            } else {
                Ok(Value::Text(raw.to_string()))
            }
        }
    }
}

/// Parses a configuration file; line numbers in errors are 1-based.
pub fn parse_config(text: &str) -> CliResult<ScenarioConfig> {
    let at = |line: usize, message: String| CliError::ConfigLine { line, message };
    let mut scenario: Option<Scenario> = None;
    let mut found: Vec<(usize, &'static KeySpec, Value)> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| at(line, format!("malformed section header '{content}'")))?
                .trim();
            if scenario.is_some() {
                return Err(at(line, format!("second section header [{name}]")));
            }
            scenario = Some(Scenario::from_name(name).ok_or_else(|| at(line, format!("unknown scenario '{name}'")))?);
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| at(line, format!("expected 'key = value', found '{content}'")))?;
        let (k, v) = (k.trim(), v.trim());
        let sc = scenario.ok_or_else(|| at(line, format!("key '{k}' appears before the [scenario] header")))?;
        let spec = sc
            .keys()
            .iter()
            .find(|s| s.name == k)
            .ok_or_else(|| at(line, format!("unknown key '{k}' for scenario {}", sc.name())))?;
        if let Some((first, _, _)) = found.iter().find(|(_, s, _)| s.name == k) {
            return Err(at(line, format!("key '{k}' already set on line {first}")));
        }
        let value = parse_value(spec, v).map_err(|m| at(line, format!("{k}: {m}")))?;
        found.push((line, spec, value));
    }
    let scenario = scenario.ok_or_else(|| CliError::Config("no [scenario] header".into()))?;
    let mut entries = Vec::new();
    for spec in scenario.keys() {
        let entry = match found.iter().find(|(_, s, _)| s.name == spec.name) {
            Some((_, _, v)) => Entry { key: spec.name, value: v.clone(), source: Source::File },
            None => {
                let d = spec
                    .default
                    .ok_or_else(|| CliError::Config(format!("missing required key '{}' for scenario {}", spec.name, scenario.name())))?;
                let value = parse_value(spec, d).expect("defaults parse");
                Entry { key: spec.name, value, source: Source::Default }
            }
        };
        entries.push(entry);
    }
    Ok(ScenarioConfig { scenario, entries })
}

impl ScenarioConfig {
    fn get(&self, key: &str) -> &Value {
        &self
            .entries
            .iter()
            .find(|e| e.key == key)
            .unwrap_or_else(|| panic!("scenario {} has no key {key}", self.scenario.name()))
            .value
    }

    pub fn f64(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(x) => *x,
            v => panic!("{key} is not a number: {v:?}"),
        }
    }

    pub fn u64(&self, key: &str) -> u64 {
        match self.get(key) {
            Value::Int(n) => *n,
            v => panic!("{key} is not an integer: {v:?}"),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        self.u64(key) as usize
    }

    pub fn list(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::List(v) => v,
            v => panic!("{key} is not a list: {v:?}"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Text(s) => s,
            v => panic!("{key} is not text: {v:?}"),
        }
    }

    fn set(&mut self, key: &'static str, value: Value, flag: &'static str) {
        let e = self.entries.iter_mut().find(|e| e.key == key).expect("known key");
        e.value = value;
        e.source = Source::Flag(flag);
    }

    pub fn override_seed(&mut self, seed: u64) {
        self.set("seed", Value::Int(seed), "--seed");
    }

    pub fn override_output(&mut self, dir: &str) {
        self.set("output_dir", Value::Text(dir.to_string()), "--output");
    }

    /// The effective configuration as a parseable file, each line annotated
    /// with where its value came from.
    pub fn echo(&self) -> String {
        let mut out = format!("[{}]\n", self.scenario.name());
        for e in &self.entries {
            let note = match e.source {
                Source::File => String::new(),
                Source::Default => "  # default".into(),
                Source::Flag(f) => format!("  # override {f}"),
            };
            let _ = writeln!(out, "{} = {}{}", e.key, e.value.render(), note);
        }
        out
    }

    /// Key/value pairs without provenance.
    pub fn values(&self) -> Vec<(&'static str, &Value)> {
        self.entries.iter().map(|e| (e.key, &e.value)).collect()
    }
}
