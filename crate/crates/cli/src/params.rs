//! Resolving an invocation: config file, inline overrides and defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use crate::catalog::{self, Experiment, Kind, GROUPS};

#[derive(Debug, thiserror::Error)]
pub enum UsageError {
    #[error("unknown experiment '{0}' (run `frob list`)")]
    UnknownExperiment(String),
    #[error("no experiment given")]
    NoExperiment,
    #[error("unknown parameter '{key}' for {experiment}")]
    UnknownParam { experiment: String, key: String },
    #[error("missing required parameter '{0}'")]
    Missing(String),
    #[error("bad value for '{key}': {msg}")]
    BadValue { key: String, msg: String },
    #[error("{0}")]
    Other(String),
}

/// Global options, from flags or the config file.
#[derive(Debug, Clone, Default)]
pub struct Globals {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub budget_points: Option<u64>,
    pub csv: Option<PathBuf>,
}

impl Globals {
    /// Flags given later win.
    fn merge(&mut self, o: &Globals) {
        macro_rules! take {
            ($f:ident) => {
                if o.$f.is_some() {
                    self.$f = o.$f.clone();
                }
            };
        }
        take!(config);
        take!(out);
        take!(seed);
        take!(budget_points);
        take!(csv);
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, Value>,
    seed: Option<u64>,
    budget_points: Option<u64>,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub experiment: Experiment,
    pub params: Params,
    pub seed: u64,
    pub budget_points: Option<u64>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// Parameter values as strings, resolved against the schema.
#[derive(Debug, Clone)]
pub struct Params {
    pub values: BTreeMap<String, String>,
}

fn value_to_string(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(value_to_string).collect::<Vec<_>>().join(","),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn split_raw(raw: &[String], globals: &mut Globals) -> Result<(Vec<String>, Vec<(String, String)>), UsageError> {
    let mut words = Vec::new();
    let mut kv = Vec::new();
    let mut i = 0;
    while i < raw.len() {
        let a = &raw[i];
        if let Some(flag) = a.strip_prefix("--") {
            let (key, val) = match flag.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    i += 1;
                    let v = raw.get(i).ok_or_else(|| UsageError::Other(format!("flag --{flag} needs a value")))?;
                    (flag.to_string(), v.clone())
                }
            };
            let bad = |msg: String| UsageError::BadValue { key: key.clone(), msg };
            match key.as_str() {
                "config" => globals.config = Some(val.into()),
                "out" => globals.out = Some(val.into()),
                "csv" => globals.csv = Some(val.into()),
                "seed" => globals.seed = Some(val.parse().map_err(|e| bad(format!("{e}")))?),
                "budget-points" | "budget_points" => {
                    globals.budget_points = Some(val.parse().map_err(|e| bad(format!("{e}")))?)
                }
                _ => kv.push((key.replace('-', "_"), val)),
            }
        } else if let Some((k, v)) = a.split_once('=') {
            kv.push((k.replace('-', "_"), v.to_string()));
        } else {
            words.push(a.clone());
        }
        i += 1;
    }
    Ok((words, kv))
}

fn experiment_name(words: &[String]) -> Result<Option<String>, UsageError> {
    match words {
        [] => Ok(None),
        [one] => Ok(Some(one.clone())),
        [group, sub] if GROUPS.contains(&group.as_str()) => Ok(Some(format!("{group}-{sub}"))),
        _ => Err(UsageError::Other(format!("unexpected arguments: {}", words.join(" ")))),
    }
}

/// Builds the invocation from raw words (`hecke-verify q=5 --t 2`), the
/// flags clap already parsed, and an optional config file.
pub fn resolve(raw: &[String], cli_globals: &Globals) -> Result<Invocation, UsageError> {
    let mut flags = cli_globals.clone();
    let (words, kv) = split_raw(raw, &mut flags)?;
    let mut globals = Globals::default();
    let mut name = experiment_name(&words)?;
    let mut values: BTreeMap<String, String> = BTreeMap::new();
    if let Some(path) = &flags.config {
        let cfg = read_config(path)?;
        globals.seed = cfg.seed;
        globals.budget_points = cfg.budget_points;
        globals.out = cfg.out;
        globals.csv = cfg.csv;
        if name.is_none() {
            name = cfg.experiment.clone();
        } else if cfg.experiment.is_some() && cfg.experiment != name {
            return Err(UsageError::Other(format!(
                "config names experiment '{}' but '{}' was given",
                cfg.experiment.unwrap_or_default(),
                name.unwrap_or_default()
            )));
        }
        for (k, v) in &cfg.params {
            values.insert(k.replace('-', "_"), value_to_string(v));
        }
    }
    globals.merge(&flags);
    let name = name.ok_or(UsageError::NoExperiment)?;
    let exp = catalog::find(&name).ok_or_else(|| UsageError::UnknownExperiment(name.clone()))?;
    for (k, v) in kv {
        values.insert(k, v);
    }
    for k in values.keys() {
        if !exp.params.iter().any(|p| p.name == k) {
            return Err(UsageError::UnknownParam { experiment: exp.name.into(), key: k.clone() });
        }
    }
    for p in &exp.params {
        if !values.contains_key(p.name) {
            match p.default {
                Some(d) => {
                    values.insert(p.name.into(), d.into());
                }
                None => return Err(UsageError::Missing(p.name.into())),
            }
        }
        let v = &values[p.name];
        validate(p.name, p.kind, v)?;
    }
    if globals.budget_points == Some(0) {
        return Err(UsageError::BadValue { key: "budget-points".into(), msg: "must be positive".into() });
    }
    Ok(Invocation {
        experiment: exp,
        params: Params { values },
        seed: globals.seed.unwrap_or(0),
        budget_points: globals.budget_points,
        out: globals.out,
        csv: globals.csv,
    })
}

fn read_config(path: &Path) -> Result<ConfigFile, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError::Other(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| UsageError::Other(format!("bad config {}: {e}", path.display())))
}

fn validate(key: &str, kind: Kind, v: &str) -> Result<(), UsageError> {
    let bad = |msg: String| UsageError::BadValue { key: key.into(), msg };
    if v.is_empty() {
        return Ok(());
    }
    match kind {
        Kind::Int => {
            v.parse::<i64>().map_err(|e| bad(format!("'{v}': {e}")))?;
        }
        Kind::IntList => {
            parse_list(v).map_err(bad)?;
        }
        Kind::Float => {
            let f: f64 = v.parse().map_err(|e| bad(format!("'{v}': {e}")))?;
            if !(f.is_finite() && f >= 0.0) {
                return Err(bad("must be a finite non-negative number".into()));
            }
        }
        Kind::Text | Kind::Path => {}
    }
    Ok(())
}

fn parse_list(v: &str) -> Result<Vec<i64>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<i64>().map_err(|e| format!("'{s}': {e}")))
        .collect()
}

impl Params {
    pub fn raw(&self, k: &str) -> &str {
        self.values.get(k).map(String::as_str).unwrap_or("")
    }

    pub fn is_set(&self, k: &str) -> bool {
        !self.raw(k).is_empty()
    }

    pub fn int(&self, k: &str) -> Result<i64, UsageError> {
        self.raw(k).parse().map_err(|_| UsageError::Missing(k.into()))
    }

    pub fn uint(&self, k: &str) -> Result<u64, UsageError> {
        let v = self.int(k)?;
        u64::try_from(v).map_err(|_| UsageError::BadValue { key: k.into(), msg: "must be non-negative".into() })
    }

    pub fn u32(&self, k: &str) -> Result<u32, UsageError> {
        let v = self.uint(k)?;
        u32::try_from(v).map_err(|_| UsageError::BadValue { key: k.into(), msg: "too large".into() })
    }

    pub fn list(&self, k: &str) -> Result<Vec<i64>, UsageError> {
        parse_list(self.raw(k)).map_err(|msg| UsageError::BadValue { key: k.into(), msg })
    }

    pub fn ulist(&self, k: &str) -> Result<Vec<u64>, UsageError> {
        self.list(k)?
            .into_iter()
            .map(|v| u64::try_from(v).map_err(|_| UsageError::BadValue { key: k.into(), msg: "entries must be non-negative".into() }))
            .collect()
    }

    pub fn float(&self, k: &str) -> Result<f64, UsageError> {
        self.raw(k).parse().map_err(|_| UsageError::Missing(k.into()))
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.values.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect())
    }
}
