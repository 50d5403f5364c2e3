//! Flat key=value run configuration with flag-over-config precedence and a
//! content hash for provenance headers.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use kdqi::io::hash64;

use crate::CliError;

/// Parse a flat config file: one `key=value` per line, `#` comments and
/// blank lines ignored.
pub fn load_config(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config {} line {}: expected key=value, got {:?}",
                path.display(),
                lineno + 1,
                raw
            ))
        })?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(CliError::Usage(format!(
                "config {} line {}: empty key",
                path.display(),
                lineno + 1
            )));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!(
                "config {} line {}: duplicate key {key}",
                path.display(),
                lineno + 1
            )));
        }
    }
    Ok(map)
}

/// Resolves each parameter as flag > config > default, records the resolved
/// value for the provenance hash, and tracks config-key consumption so
/// unknown keys can be rejected.
pub struct Resolver {
    config: HashMap<String, String>,
    consumed: HashSet<String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(config: HashMap<String, String>) -> Self {
        Resolver { config, consumed: HashSet::new(), resolved: BTreeMap::new() }
    }

    /// Resolve one parameter. `flag` wins over the config entry, which wins
    /// over `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
    {
        self.consumed.insert(key.to_string());
        let value = match flag {
            Some(v) => v,
            None => match self.config.get(key) {
                Some(raw) => raw.parse::<T>().map_err(|_| {
                    CliError::Usage(format!("config key {key}: cannot parse {raw:?}"))
                })?,
                None => default,
            },
        };
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Resolve a parameter that controls where or how fast output is
    /// produced, never what it contains. Untracked keys stay out of the
    /// provenance hash so reruns on different machines or paths still
    /// produce byte-identical tables.
    pub fn get_untracked<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
    {
        let value = self.get(key, flag, default)?;
        self.resolved.remove(key);
        Ok(value)
    }

    /// Resolve an optional parameter with no default.
    pub fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
    {
        self.consumed.insert(key.to_string());
        let value = match flag {
            Some(v) => Some(v),
            None => match self.config.get(key) {
                Some(raw) => Some(raw.parse::<T>().map_err(|_| {
                    CliError::Usage(format!("config key {key}: cannot parse {raw:?}"))
                })?),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    /// Optional variant of [`Resolver::get_untracked`].
    pub fn get_opt_untracked<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
    {
        let value = self.get_opt(key, flag)?;
        self.resolved.remove(key);
        Ok(value)
    }

    /// Error on config keys no resolver call consumed (typo guard).
    pub fn reject_unknown(&self) -> Result<(), CliError> {
        let mut unknown: Vec<&String> =
            self.config.keys().filter(|k| !self.consumed.contains(*k)).collect();
        if unknown.is_empty() {
            return Ok(());
        }
        unknown.sort();
        Err(CliError::Usage(format!(
            "unknown config keys: {}",
            unknown.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        )))
    }

    /// Hash of the command name plus every resolved key=value pair.
    pub fn config_hash(&self, command: &str) -> u64 {
        let mut parts: Vec<Vec<u8>> = vec![command.as_bytes().to_vec()];
        for (k, v) in &self.resolved {
            parts.push(format!("{k}={v}").into_bytes());
        }
        let refs: Vec<&[u8]> = parts.iter().map(|p| p.as_slice()).collect();
        hash64(&refs)
    }
}

/// Parse a comma-separated list of values.
pub fn parse_list<T: FromStr>(raw: &str, what: &str) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CliError::Usage(format!("bad {what} entry {s:?} in list {raw:?}")))
        })
        .collect()
}

/// Inclusive evenly spaced grid.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps < 2 {
        return Err(CliError::Usage("grid needs at least 2 steps".into()));
    }
    if !(hi > lo) {
        return Err(CliError::Usage(format!("grid bounds [{lo}, {hi}] are not increasing")));
    }
    let h = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps).map(|i| lo + h * i as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_config(body: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir()
            .join(format!("kdqi-config-test-{}-{body:p}", std::process::id()));
        std::fs::write(&path, body).unwrap();
        path
    }

    #[test]
    fn config_file_skips_comments_and_rejects_duplicates() {
        let path = temp_config("# run parameters\n\n p = 31 \neta=0.1\n");
        let map = load_config(&path).unwrap();
        std::fs::remove_file(&path).unwrap();
        assert_eq!(map.len(), 2);
        assert_eq!(map["p"], "31");
        assert_eq!(map["eta"], "0.1");

        let path = temp_config("p=31\np=37\n");
        let err = load_config(&path).unwrap_err();
        std::fs::remove_file(&path).unwrap();
        assert!(matches!(err, CliError::Usage(msg) if msg.contains("duplicate key p")));
    }

    #[test]
    fn resolver_precedence_is_flag_then_config_then_default() {
        let mut config = HashMap::new();
        config.insert("p".to_string(), "31".to_string());
        let mut r = Resolver::new(config);
        assert_eq!(r.get("p", Some(41u32), 13).unwrap(), 41);
        let mut r = Resolver::new(HashMap::from([("p".to_string(), "31".to_string())]));
        assert_eq!(r.get("p", None::<u32>, 13).unwrap(), 31);
        let mut r = Resolver::new(HashMap::new());
        assert_eq!(r.get("p", None::<u32>, 13).unwrap(), 13);
    }

    #[test]
    fn unparseable_config_value_is_a_usage_error() {
        let mut r = Resolver::new(HashMap::from([("d".to_string(), "four".to_string())]));
        let err = r.get("d", None::<usize>, 1).unwrap_err();
        assert!(matches!(err, CliError::Usage(msg) if msg.contains("cannot parse")));
    }

    #[test]
    fn unknown_keys_are_rejected_only_after_consumption() {
        let config = HashMap::from([
            ("p".to_string(), "31".to_string()),
            ("typo".to_string(), "1".to_string()),
        ]);
        let mut r = Resolver::new(config);
        r.get("p", None::<u32>, 13).unwrap();
        let err = r.reject_unknown().unwrap_err();
        assert!(matches!(err, CliError::Usage(msg) if msg.contains("typo")));

        let mut r = Resolver::new(HashMap::from([("p".to_string(), "31".to_string())]));
        r.get("p", None::<u32>, 13).unwrap();
        r.reject_unknown().unwrap();
    }

    #[test]
    fn untracked_keys_never_move_the_config_hash() {
        let mut a = Resolver::new(HashMap::new());
        a.get("p", Some(31u32), 13).unwrap();
        a.get_untracked("threads", Some(1usize), 0).unwrap();
        a.get_opt_untracked("out", Some("a.csv".to_string())).unwrap();

        let mut b = Resolver::new(HashMap::new());
        b.get("p", Some(31u32), 13).unwrap();
        b.get_untracked("threads", Some(8usize), 0).unwrap();
        b.get_opt_untracked("out", Some("b.csv".to_string())).unwrap();

        assert_eq!(a.config_hash("scan"), b.config_hash("scan"));

        let mut c = Resolver::new(HashMap::new());
        c.get("p", Some(37u32), 13).unwrap();
        assert_ne!(a.config_hash("scan"), c.config_hash("scan"));
        assert_ne!(a.config_hash("scan"), a.config_hash("audit"));
    }

    #[test]
    fn list_and_grid_parsing() {
        let vals: Vec<f64> = parse_list("0.1, 0.2,0.3,", "eps").unwrap();
        assert_eq!(vals, vec![0.1, 0.2, 0.3]);
        assert!(parse_list::<f64>("0.1,oops", "eps").is_err());

        let grid = linspace(0.0, 1.0, 5).unwrap();
        assert_eq!(grid, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(linspace(0.0, 1.0, 1).is_err());
        assert!(linspace(1.0, 1.0, 3).is_err());
    }
}
