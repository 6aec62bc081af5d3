//! Config file support. The file is a JSON object keyed by long flag names;
//! flags given on the command line win over it, and `QQLAB_SEED` is the
//! last resort for the seed.

use std::path::Path;

use serde_json::{Map, Value};

use crate::Failure;

const KNOWN_KEYS: &[&str] = &[
    "command", "n", "r", "N", "trials", "seed", "format", "out", "jobs", "origin", "count", "constant", "mode",
    "profile", "relation", "alg", "m", "k", "dist", "grid", "sweep",
];

#[derive(Debug, Default)]
pub struct FileConfig {
    map: Map<String, Value>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Failure::Usage(format!("config is not valid JSON: {e}")))?;
        let Value::Object(map) = value else {
            return Err(Failure::Usage("config must be a JSON object".into()));
        };
        if let Some(k) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(Failure::Usage(format!("unknown config key {k:?}")));
        }
        Ok(FileConfig { map })
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, Failure> {
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| Failure::Usage(format!("config key {key:?} must be a non-negative integer"))),
        }
    }

    /// Strings as-is; numbers and arrays are rendered back to text so that
    /// `"profile": [3, 1]` and `"profile": "3,1"` mean the same thing.
    pub fn string(&self, key: &str) -> Result<Option<String>, Failure> {
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Number(n)) => Ok(Some(n.to_string())),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| v.as_u64().map(|u| u.to_string()))
                .collect::<Option<Vec<_>>>()
                .map(|parts| Some(parts.join(",")))
                .ok_or_else(|| Failure::Usage(format!("config key {key:?} must hold integers"))),
            Some(_) => Err(Failure::Usage(format!("config key {key:?} must be a string"))),
        }
    }
}

pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub fn seed_from_env() -> Result<Option<u64>, Failure> {
    match std::env::var("QQLAB_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("QQLAB_SEED={s:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}
