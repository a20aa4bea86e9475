//! `key = value` configuration files. Command-line flags take precedence
//! over anything read here.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

/// Keys a configuration file may set, spelled like the long flags.
pub const KNOWN_KEYS: &[&str] = &[
    "input",
    "output",
    "generated",
    "pattern",
    "mode",
    "tile-side",
    "crop",
    "voxel-size",
    "axis",
    "grid-spacing",
    "overwrite",
    "external-mse",
    "sample-rate",
    "duration",
    "f-min",
    "f-max",
    "gain",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value, got '{line}'", i + 1))?;
            let (k, v) = (k.trim().replace('_', "-"), v.trim());
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(format!("line {}: unknown key '{k}'", i + 1));
            }
            if values.insert(k.clone(), v.to_string()).is_some() {
                return Err(format!("line {}: duplicate key '{k}'", i + 1));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// The flag value if given, else the parsed config value, else `None`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, String>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| format!("config key '{key}': {e}")),
        }
    }

    pub fn pick_or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, String>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T, String>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.pick(flag, key)?.ok_or_else(|| format!("--{key} is required (flag or config key)"))
    }

    /// Boolean switches: set by the flag, or by `true`/`false` in the file.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, String> {
        Ok(flag || self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_underscores() {
        let c = ConfigFile::parse("# corpus\ninput = /data/raw\n\nvoxel_size=6.25\noverwrite = true\n").unwrap();
        assert_eq!(c.pick::<String>(None, "input").unwrap().as_deref(), Some("/data/raw"));
        assert_eq!(c.pick_or::<f64>(None, "voxel-size", 1.0).unwrap(), 6.25);
        assert!(c.switch(false, "overwrite").unwrap());
    }

    #[test]
    fn flags_win() {
        let c = ConfigFile::parse("tile-side = 32").unwrap();
        assert_eq!(c.pick_or(Some(16usize), "tile-side", 64).unwrap(), 16);
        assert_eq!(c.pick_or(None::<usize>, "tile-side", 64).unwrap(), 32);
        assert_eq!(c.pick_or(None::<usize>, "crop", 256).unwrap(), 256);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ConfigFile::parse("input").is_err());
        assert!(ConfigFile::parse("colour = red").is_err());
        assert!(ConfigFile::parse("mode = tile\nmode = downsample").is_err());
        let c = ConfigFile::parse("grid-spacing = many").unwrap();
        assert!(c.pick::<usize>(None, "grid-spacing").is_err());
        assert!(c.require::<String>(None, "input").is_err());
    }
}
