//! Run configuration: defaults, overridden by a flat key = value config
//! file, overridden by command-line flags (flags win).

use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub dim: usize,
    pub seed: u64,
    pub corpus: usize,
    pub eps_base: f64,
    pub out: PathBuf,
    pub tol_fp: f64,
    pub tol_rank: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 64,
            seed: 7,
            corpus: 200,
            eps_base: 0.1,
            out: PathBuf::from("out"),
            tol_fp: 1e-10,
            tol_rank: 1e-6,
        }
    }
}

#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub corpus: Option<usize>,
    pub eps_base: Option<f64>,
    pub out: Option<PathBuf>,
    pub tol_fp: Option<f64>,
    pub tol_rank: Option<f64>,
}

impl RunConfig {
    pub fn load(config_file: Option<&Path>, flags: &Overrides) -> Result<RunConfig, String> {
        let mut cfg = RunConfig::default();
        if let Some(path) = config_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| format!("config line {} has no '='", lineno + 1))?;
                let key = key.trim();
                let value = value.trim();
                let parse_err = |e: String| format!("config key {key}: {e}");
                match key {
                    "dim" => cfg.dim = value.parse().map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?,
                    "seed" => cfg.seed = value.parse().map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?,
                    "corpus" => cfg.corpus = value.parse().map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?,
                    "eps_base" => cfg.eps_base = value.parse().map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?,
                    "out" => cfg.out = PathBuf::from(value),
                    "tol_fp" => cfg.tol_fp = value.parse().map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?,
                    "tol_rank" => cfg.tol_rank = value.parse().map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?,
                    other => return Err(format!("unknown config key '{other}'")),
                }
            }
        }
        if let Some(v) = flags.dim {
            cfg.dim = v;
        }
        if let Some(v) = flags.seed {
            cfg.seed = v;
        }
        if let Some(v) = flags.corpus {
            cfg.corpus = v;
        }
        if let Some(v) = flags.eps_base {
            cfg.eps_base = v;
        }
        if let Some(v) = &flags.out {
            cfg.out = v.clone();
        }
        if let Some(v) = flags.tol_fp {
            cfg.tol_fp = v;
        }
        if let Some(v) = flags.tol_rank {
            cfg.tol_rank = v;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beats_defaults() {
        let dir = std::env::temp_dir().join("smoothext-cli-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "dim = 32\nseed=11\n# comment\neps_base = 0.2\n").unwrap();
        let flags = Overrides {
            seed: Some(99),
            ..Default::default()
        };
        let cfg = RunConfig::load(Some(&path), &flags).unwrap();
        assert_eq!(cfg.dim, 32); // from file
        assert_eq!(cfg.seed, 99); // flag wins
        assert_eq!(cfg.eps_base, 0.2);
        assert_eq!(cfg.corpus, 200); // default
    }

    #[test]
    fn unknown_key_rejected() {
        let dir = std::env::temp_dir().join("smoothext-cli-config-test2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.conf");
        std::fs::write(&path, "nope = 3\n").unwrap();
        assert!(RunConfig::load(Some(&path), &Overrides::default()).is_err());
    }
}
