//! Line-oriented `key = value` configuration with `[section]` headers.
//!
//! Every key is checked against a fixed schema while reading, so errors carry
//! the line they come from. `#` starts a comment. Lists are comma separated.
//! Keys marked repeatable (`blob`, `term`, `alpha`) may appear several times.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Float,
    Int,
    Floats(usize),
    FloatList,
    Word(&'static [&'static str]),
}

struct KeySpec {
    section: &'static str,
    key: &'static str,
    kind: Kind,
    repeat: bool,
}

const fn k(section: &'static str, key: &'static str, kind: Kind) -> KeySpec {
    KeySpec { section, key, kind, repeat: false }
}

const fn rep(section: &'static str, key: &'static str, kind: Kind) -> KeySpec {
    KeySpec { section, key, kind, repeat: true }
}

const SCHEMA: &[KeySpec] = &[
    k("grid", "half_width", Kind::Float),
    k("grid", "nx", Kind::Int),
    k("grid", "cutoff", Kind::Word(&["gamma", "bump"])),
    k("grid", "cutoff_order", Kind::Int),
    k("grid", "cutoff_scale", Kind::Float),
    k("grid", "bump_inner", Kind::Float),
    k("grid", "bump_outer", Kind::Float),
    k("grid", "m_max", Kind::Int),
    k("grid", "k_max", Kind::Int),
    k("space", "m", Kind::Int),
    k("space", "n", Kind::Int),
    k("space", "N", Kind::Int),
    k("space", "ell", Kind::Int),
    k("field", "kind", Kind::Word(&["gaussian", "terms"])),
    k("field", "gaussian_s", Kind::Float),
    k("field", "amplitude", Kind::Float),
    rep("field", "term", Kind::Floats(5)),
    rep("field", "blob", Kind::Floats(4)),
    k("heat", "nu", Kind::Float),
    k("heat", "times", Kind::FloatList),
    k("heat", "phase", Kind::Float),
    k("heat", "svg", Kind::Word(&["yes", "no"])),
    k("datum", "preset", Kind::Word(&["default", "zero", "short_range"])),
    k("datum", "constant", Kind::Floats(2)),
    k("datum", "swirl", Kind::Float),
    k("datum", "circulation", Kind::Float),
    k("datum", "dipole", Kind::Floats(2)),
    k("datum", "log_dipole", Kind::Floats(2)),
    rep("datum", "blob", Kind::Floats(4)),
    k("solve", "nu", Kind::Float),
    k("solve", "t0", Kind::Float),
    k("solve", "theta", Kind::Float),
    k("solve", "phi", Kind::Float),
    k("solve", "rho", Kind::Float),
    k("solve", "n_time", Kind::Int),
    k("solve", "quad_nodes", Kind::Int),
    k("solve", "tol", Kind::Float),
    k("solve", "max_iter", Kind::Int),
    k("solve", "max_restarts", Kind::Int),
    k("solve", "initial", Kind::Word(&["heat", "datum"])),
    k("solve", "t_end", Kind::Float),
    k("solve", "constants", Kind::Floats(3)),
    k("scan", "kind", Kind::Word(&["smoothing", "sectorial"])),
    k("scan", "radius_min", Kind::Float),
    k("scan", "radius_max", Kind::Float),
    k("scan", "radius_count", Kind::Int),
    k("scan", "angle", Kind::Float),
    k("scan", "nu", Kind::Float),
    rep("scan", "alpha", Kind::Floats(2)),
    k("scan", "shifts", Kind::FloatList),
];

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if let Some(k) = &self.key {
            write!(f, "key `{k}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Floats(Vec<f64>),
    Word(String),
}

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    line: usize,
    value: Value,
}

/// Parsed configuration; values are already type-checked.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<(String, String), Vec<Entry>>,
    sections: Vec<String>,
    /// Raw text, echoed into run manifests.
    pub source: String,
}

fn err(line: usize, key: Option<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { line: Some(line), key, message: message.into() }
}

fn parse_value(kind: Kind, raw: &str) -> Result<Value, String> {
    let floats = |s: &str| -> Result<Vec<f64>, String> {
        s.split(',')
            .map(|p| p.trim())
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
            .collect()
    };
    match kind {
        Kind::Float => {
            let v = raw.parse::<f64>().map_err(|_| format!("expected a number, got `{raw}`"))?;
            if !v.is_finite() {
                return Err(format!("expected a finite number, got `{raw}`"));
            }
            Ok(Value::Float(v))
        }
        Kind::Int => raw.parse::<i64>().map(Value::Int).map_err(|_| format!("expected an integer, got `{raw}`")),
        Kind::Floats(n) => {
            let v = floats(raw)?;
            if v.len() != n {
                return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
            }
            Ok(Value::Floats(v))
        }
        Kind::FloatList => floats(raw).map(Value::Floats),
        Kind::Word(allowed) => {
            if allowed.contains(&raw) {
                Ok(Value::Word(raw.to_string()))
            } else {
                Err(format!("expected one of {}, got `{raw}`", allowed.join(", ")))
            }
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config { source: text.to_string(), ..Default::default() };
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| err(line, None, "unterminated section header"))?.trim();
                if !SCHEMA.iter().any(|s| s.section == name) {
                    return Err(err(line, None, format!("unknown section [{name}]")));
                }
                if cfg.sections.iter().any(|s| s == name) {
                    return Err(err(line, None, format!("section [{name}] appears twice")));
                }
                cfg.sections.push(name.to_string());
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| err(line, None, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section.as_deref().ok_or_else(|| err(line, Some(key.to_string()), "key outside any section"))?;
            let full = format!("{sec}.{key}");
            let spec = SCHEMA
                .iter()
                .find(|s| s.section == sec && s.key == key)
                .ok_or_else(|| err(line, Some(full.clone()), "unknown key"))?;
            let value = parse_value(spec.kind, value).map_err(|m| err(line, Some(full.clone()), m))?;
            let slot = cfg.entries.entry((sec.to_string(), key.to_string())).or_default();
            if !slot.is_empty() && !spec.repeat {
                return Err(err(line, Some(full), format!("already set on line {}", slot[0].line)));
            }
            slot.push(Entry { line, value });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            key: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.iter().any(|s| s == section)
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string())).and_then(|v| v.first())
    }

    /// Line on which a key was set.
    pub fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        self.entry(section, key).map(|e| e.line)
    }

    fn missing(section: &str, key: &str) -> ConfigError {
        ConfigError { line: None, key: Some(format!("{section}.{key}")), message: format!("missing required key in [{section}]") }
    }

    /// Error tied to the line of an existing key.
    pub fn invalid(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError { line: self.line_of(section, key), key: Some(format!("{section}.{key}")), message: message.into() }
    }

    pub fn float(&self, section: &str, key: &str) -> Option<f64> {
        match self.entry(section, key).map(|e| &e.value) {
            Some(Value::Float(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn require_float(&self, section: &str, key: &str) -> Result<f64, ConfigError> {
        self.float(section, key).ok_or_else(|| Self::missing(section, key))
    }

    pub fn int(&self, section: &str, key: &str) -> Option<i64> {
        match self.entry(section, key).map(|e| &e.value) {
            Some(Value::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn require_int(&self, section: &str, key: &str) -> Result<i64, ConfigError> {
        self.int(section, key).ok_or_else(|| Self::missing(section, key))
    }

    /// Non-negative integer with a line-precise error.
    pub fn count(&self, section: &str, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.int(section, key) {
            None => Ok(None),
            Some(v) if v >= 0 => Ok(Some(v as usize)),
            Some(v) => Err(self.invalid(section, key, format!("must be non-negative, got {v}"))),
        }
    }

    pub fn floats(&self, section: &str, key: &str) -> Option<Vec<f64>> {
        match self.entry(section, key).map(|e| &e.value) {
            Some(Value::Floats(v)) => Some(v.clone()),
            _ => None,
        }
    }

    pub fn require_floats(&self, section: &str, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.floats(section, key).ok_or_else(|| Self::missing(section, key))
    }

    /// All values of a repeatable key with their lines, in file order.
    pub fn all_floats(&self, section: &str, key: &str) -> Vec<(usize, Vec<f64>)> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(|v| {
                v.iter()
                    .filter_map(|e| match &e.value {
                        Value::Floats(f) => Some((e.line, f.clone())),
                        _ => None,
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Error at a given line for a key.
    pub fn at_line(line: usize, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError { line: Some(line), key: Some(format!("{section}.{key}")), message: message.into() }
    }

    pub fn word(&self, section: &str, key: &str) -> Option<&str> {
        match self.entry(section, key).map(|e| &e.value) {
            Some(Value::Word(v)) => Some(v.as_str()),
            _ => None,
        }
    }

    pub fn require_word(&self, section: &str, key: &str) -> Result<&str, ConfigError> {
        self.word(section, key).ok_or_else(|| Self::missing(section, key))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_lists_and_repeats() {
        let c = Config::parse("# top\n[grid]\nhalf_width = 16\nnx = 128 # inline\n[datum]\npreset = zero\nblob = 1, 2, 3, 4\nblob = 0,0,1,-1\n").unwrap();
        assert_eq!(c.float("grid", "half_width"), Some(16.0));
        assert_eq!(c.int("grid", "nx"), Some(128));
        assert_eq!(c.all_floats("datum", "blob").len(), 2);
        assert_eq!(c.line_of("datum", "preset"), Some(6));
    }

    #[test]
    fn errors_name_line_and_key() {
        let e = Config::parse("[grid]\nnx = abc\n").unwrap_err();
        assert_eq!((e.line, e.key.as_deref()), (Some(2), Some("grid.nx")));
        let e = Config::parse("[grid]\nnx = 1\nnx = 2\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = Config::parse("[grid]\nfoo = 1\n").unwrap_err();
        assert!(e.to_string().contains("grid.foo"));
        assert!(Config::parse("nx = 1\n").is_err());
        assert!(Config::parse("[nope]\n").is_err());
        let e = Config::parse("[grid]\n").unwrap().require_float("grid", "half_width").unwrap_err();
        assert!(e.to_string().contains("grid.half_width"));
    }
}
