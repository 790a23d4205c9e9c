use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{CliError, CliResult};

/// Every key any subcommand reads.
const KNOWN_KEYS: &[&str] = &[
    "n",
    "seed",
    "out",
    "model",
    "data",
    "learning_rate",
    "batch_size",
    "epochs",
    "ensemble_size",
    "beta1",
    "beta2",
    "epsilon",
    "strict_sequential",
    "models",
    "benchmark",
    "samples",
    "grid_points",
    "eval",
    "runs",
];

/// Parsed `key = value` config file. Keys may use `-` or `_`.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    path: Option<PathBuf>,
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |why: &str| CliError::Config(format!("{}:{}: {why}", path.display(), i + 1));
            let (k, v) = line.split_once('=').ok_or_else(|| bad("expected `key = value`"))?;
            let key = k.trim().replace('-', "_");
            let key = if key == "ensemble" { "ensemble_size".to_string() } else { key };
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(bad(&format!("unknown key `{key}`")));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self {
            path: Some(path.to_path_buf()),
            values,
        })
    }

    fn lookup<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                let p = self.path.as_deref().unwrap_or(Path::new("<config>"));
                CliError::Config(format!("{}: invalid value `{v}` for `{key}`", p.display()))
            }),
        }
    }

    /// Flag value, else config value, else `None`.
    pub fn opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.lookup(key),
        }
    }

    pub fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> CliResult<T> {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    /// A boolean switch: set if the flag is given or the config says `true`.
    pub fn switch(&self, flag: bool, key: &str) -> CliResult<bool> {
        Ok(flag || self.lookup::<bool>(key)?.unwrap_or(false))
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let cfg = ConfigFile::parse("# defaults\nepochs = 7\nlearning-rate=0.01\nensemble = 3\n", Path::new("c")).unwrap();
        assert_eq!(cfg.or(None, "epochs", 100usize).unwrap(), 7);
        assert_eq!(cfg.or(Some(9), "epochs", 100usize).unwrap(), 9);
        assert_eq!(cfg.or(None, "learning_rate", 5e-3).unwrap(), 0.01);
        assert_eq!(cfg.or(None, "ensemble_size", 10usize).unwrap(), 3);
        assert_eq!(cfg.or(None, "batch_size", 64usize).unwrap(), 64);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ConfigFile::parse("epoch = 3\n", Path::new("c")).is_err());
        assert!(ConfigFile::parse("just words\n", Path::new("c")).is_err());
        let cfg = ConfigFile::parse("epochs = many\n", Path::new("c")).unwrap();
        let err = cfg.or(None, "epochs", 1usize).unwrap_err();
        assert_eq!(err.exit_code(), super::super::EXIT_CONFIG);
    }

    #[test]
    fn switches() {
        let cfg = ConfigFile::parse("strict_sequential = true\n", Path::new("c")).unwrap();
        assert!(cfg.switch(false, "strict_sequential").unwrap());
        assert!(!ConfigFile::default().switch(false, "strict_sequential").unwrap());
    }
}
