use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value as Json};

use crate::CliError;

/// Type of a configuration value.
#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Real,
    Int,
    Seed,
    Bool,
    Choice(&'static [&'static str]),
    /// Comma-separated reals.
    Reals,
    /// Comma-separated non-negative integers.
    Ints,
}

impl Kind {
    pub fn value_name(self) -> String {
        match self {
            Kind::Real => "REAL".into(),
            Kind::Int => "INT".into(),
            Kind::Seed => "SEED".into(),
            Kind::Bool => "true|false".into(),
            Kind::Choice(c) => c.join("|"),
            Kind::Reals => "REAL,..".into(),
            Kind::Ints => "INT,..".into(),
        }
    }
}

/// One schema entry; `key` is snake_case and doubles as the flag name with '-' for '_'.
#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub key: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
}

pub const fn param(key: &'static str, kind: Kind, default: &'static str, help: &'static str) -> Param {
    Param { key, kind, default, help }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Int(u64),
    Seed(u64),
    Bool(bool),
    Text(String),
    Reals(Vec<f64>),
    Ints(Vec<u64>),
}

impl Value {
    fn parse(p: &Param, raw: &str) -> Result<Self, CliError> {
        let raw = raw.trim();
        let bad = |what: &str| CliError::Config(format!("key '{}': cannot parse '{raw}' as {what}", p.key));
        let real = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite());
        let int = |s: &str| s.trim().parse::<u64>().ok();
        Ok(match p.kind {
            Kind::Real => Value::Real(real(raw).ok_or_else(|| bad("a finite real"))?),
            Kind::Int => Value::Int(int(raw).ok_or_else(|| bad("a non-negative integer"))?),
            Kind::Seed => Value::Seed(int(raw).ok_or_else(|| bad("a 64-bit seed"))?),
            Kind::Bool => Value::Bool(raw.parse().map_err(|_| bad("true or false"))?),
            Kind::Choice(c) => match c.iter().find(|&&v| v == raw) {
                Some(v) => Value::Text((*v).into()),
                None => return Err(bad(&format!("one of {}", c.join(", ")))),
            },
            Kind::Reals => Value::Reals(raw.split(',').map(real).collect::<Option<_>>().ok_or_else(|| bad("comma-separated reals"))?),
            Kind::Ints => Value::Ints(raw.split(',').map(int).collect::<Option<_>>().ok_or_else(|| bad("comma-separated integers"))?),
        })
    }

    fn to_json(&self) -> Json {
        match self {
            Value::Real(x) => json!(x),
            Value::Int(n) | Value::Seed(n) => json!(n),
            Value::Bool(b) => json!(b),
            Value::Text(s) => json!(s),
            Value::Reals(v) => json!(v),
            Value::Ints(v) => json!(v),
        }
    }
}

/// Fully resolved parameters of one run: defaults, then the config file, then flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub values: BTreeMap<&'static str, Value>,
    pub out_dir: std::path::PathBuf,
    pub config_file: Option<std::path::PathBuf>,
}

impl RunConfig {
    pub fn resolve(
        subcommand: &'static str,
        schema: &[Param],
        file: Option<&Path>,
        flags: &[(&'static str, String)],
        out_dir: std::path::PathBuf,
    ) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for p in schema {
            values.insert(p.key, Value::parse(p, p.default)?);
        }
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
            for (key, raw) in parse_key_values(&text, path)? {
                let p = schema
                    .iter()
                    .find(|p| p.key == key)
                    .ok_or_else(|| CliError::Config(format!("unknown key '{key}' for {subcommand} in {}", path.display())))?;
                values.insert(p.key, Value::parse(p, &raw)?);
            }
        }
        for (key, raw) in flags {
            let p = schema.iter().find(|p| p.key == *key).expect("flags are generated from the schema");
            values.insert(p.key, Value::parse(p, raw)?);
        }
        Ok(RunConfig { subcommand, values, out_dir, config_file: file.map(Path::to_path_buf) })
    }

    fn get(&self, key: &str) -> &Value {
        self.values.get(key).unwrap_or_else(|| panic!("'{key}' is not in the {} schema", self.subcommand))
    }

    pub fn real(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Real(x) => *x,
            v => panic!("'{key}' is {v:?}, not a real"),
        }
    }

    pub fn int(&self, key: &str) -> usize {
        match self.get(key) {
            Value::Int(n) => *n as usize,
            v => panic!("'{key}' is {v:?}, not an integer"),
        }
    }

    pub fn seed(&self, key: &str) -> u64 {
        match self.get(key) {
            Value::Seed(n) => *n,
            v => panic!("'{key}' is {v:?}, not a seed"),
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        match self.get(key) {
            Value::Bool(b) => *b,
            v => panic!("'{key}' is {v:?}, not a boolean"),
        }
    }

    pub fn choice(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Text(s) => s,
            v => panic!("'{key}' is {v:?}, not a choice"),
        }
    }

    pub fn reals(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::Reals(v) => v,
            v => panic!("'{key}' is {v:?}, not a real list"),
        }
    }

    pub fn ints(&self, key: &str) -> Vec<usize> {
        match self.get(key) {
            Value::Ints(v) => v.iter().map(|&n| n as usize).collect(),
            v => panic!("'{key}' is {v:?}, not an integer list"),
        }
    }

    /// Real list of length `n`; a single entry is repeated.
    pub fn reals_broadcast(&self, key: &str, n: usize) -> Result<Vec<f64>, CliError> {
        match self.reals(key) {
            [x] => Ok(vec![*x; n]),
            v if v.len() == n => Ok(v.to_vec()),
            v => Err(CliError::Config(format!("key '{key}' needs 1 or {n} entries, got {}", v.len()))),
        }
    }

    pub fn to_json(&self) -> serde_json::Map<String, Json> {
        self.values.iter().map(|(k, v)| (k.to_string(), v.to_json())).collect()
    }
}

/// Parses `key = value` lines; '#' starts a comment, keys may use '-' or '_'.
pub fn parse_key_values(text: &str, path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{}:{}: expected key=value, got '{line}'", path.display(), i + 1)))?;
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}
