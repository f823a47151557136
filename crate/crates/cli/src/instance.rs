//! Game configs from a JSON file or the `--regular n=5 m=2 k=0.32` shorthand.

use std::path::Path;

use keepaway::game::GameConfig;
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Malformed(String),
    #[error("bad shorthand `{0}`: expected key=value")]
    Shorthand(String),
    #[error("give either a config file or --regular, not both")]
    Ambiguous,
    #[error("no config given (pass a file or --regular n=.. m=.. k=..)")]
    Missing,
}

/// Parses `key=value` tokens. Keys: `n`, `m`, `k` (or `v_p`), `v_e`,
/// `radius`, `phase`, `delay`, `wait`, `eps`, `arc`, `block_sets`, `multi`.
/// Tokens may also be comma separated inside one argument.
pub fn regular_shorthand(tokens: &[String]) -> Result<GameConfig, InstanceError> {
    let mut regular = Map::new();
    let mut top = Map::new();
    let mut k = None;
    let mut v_e = 1.0;
    for tok in tokens.iter().flat_map(|t| t.split([',', ' '])).filter(|t| !t.is_empty()) {
        let (key, val) = tok.split_once('=').ok_or_else(|| InstanceError::Shorthand(tok.into()))?;
        let num = || val.parse::<f64>().map_err(|_| InstanceError::Shorthand(tok.into()));
        let int = || val.parse::<u64>().map_err(|_| InstanceError::Shorthand(tok.into()));
        let flag = || val.parse::<bool>().map_err(|_| InstanceError::Shorthand(tok.into()));
        match key {
            "n" => {
                regular.insert("n".into(), json!(int()?));
            }
            "radius" => {
                regular.insert("radius".into(), json!(num()?));
            }
            "phase" => {
                regular.insert("phase_deg".into(), json!(num()?));
            }
            "m" => {
                top.insert("m".into(), json!(int()?));
            }
            "k" | "v_p" => k = Some(num()?),
            "v_e" => v_e = num()?,
            "delay" => {
                top.insert("observation_delay".into(), json!(num()?));
            }
            "wait" => {
                top.insert("evader_may_wait".into(), json!(flag()?));
            }
            "eps" => {
                top.insert("capture_eps".into(), json!(num()?));
            }
            "arc" => {
                top.insert("arc_segments".into(), json!(int()?));
            }
            "block_sets" => {
                top.insert("block_sets".into(), json!(val));
            }
            "multi" => {
                top.insert("multi_move_budget".into(), json!(flag()?));
            }
            _ => return Err(InstanceError::Shorthand(tok.into())),
        }
    }
    let k = k.ok_or_else(|| InstanceError::Shorthand("missing k".into()))?;
    top.insert("regular".into(), Value::Object(regular));
    top.insert("v_e".into(), json!(v_e));
    top.insert("v_p".into(), json!(k * v_e));
    serde_json::from_value(Value::Object(top)).map_err(|e| InstanceError::Malformed(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<GameConfig, InstanceError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InstanceError::Io { path: path.display().to_string(), source: e })?;
    GameConfig::from_json(&text).map_err(|e| InstanceError::Malformed(e.to_string()))
}

pub fn resolve(path: Option<&Path>, regular: &[String]) -> Result<GameConfig, InstanceError> {
    match (path, regular.is_empty()) {
        (Some(_), false) => Err(InstanceError::Ambiguous),
        (Some(p), true) => load_config(p),
        (None, false) => regular_shorthand(regular),
        (None, true) => Err(InstanceError::Missing),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(String::from).collect()
    }

    #[test]
    fn pentagon_shorthand() {
        let c = regular_shorthand(&toks("n=5 m=2 k=0.32")).unwrap();
        assert_eq!(c.n(), 5);
        assert_eq!(c.m, 2);
        assert!((c.k() - 0.32).abs() < 1e-15);
        assert!(c.is_regular());
        let c2 = regular_shorthand(&["n=5,m=2,k=0.32".to_string()]).unwrap();
        assert_eq!(c, c2);
    }

    #[test]
    fn shorthand_options() {
        let c = regular_shorthand(&toks("n=6 m=3 k=0.5 v_e=2 wait=false delay=0.01 arc=32")).unwrap();
        assert!((c.v_p - 1.0).abs() < 1e-15);
        assert!(!c.evader_may_wait);
        assert_eq!(c.arc_segments, 32);
        assert!(regular_shorthand(&toks("n=5 m=2")).is_err());
        assert!(regular_shorthand(&toks("n=5 m=2 k=0.3 bogus=1")).is_err());
        assert!(matches!(regular_shorthand(&toks("n=1 m=2 k=0.3")), Err(InstanceError::Malformed(_))));
    }

    #[test]
    fn resolve_rules() {
        assert!(matches!(resolve(None, &[]), Err(InstanceError::Missing)));
        assert!(matches!(resolve(Some(Path::new("x.json")), &toks("n=5 m=2 k=0.3")), Err(InstanceError::Ambiguous)));
    }
}
