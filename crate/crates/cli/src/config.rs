//! Optional TOML config: default seed and brute-force caps.
//!
//! ```toml
//! seed = 7
//! [caps]
//! exact = 9
//! ```

use std::path::Path;

use fhg_core::config::Caps;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    #[serde(default)]
    caps: Caps,
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub seed: u64,
    pub caps: Caps,
}

pub const DEFAULT_SEED: u64 = 20240501;

impl Settings {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let file = match path {
            None => ConfigFile::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
            }
        };
        Ok(Settings { seed: file.seed.unwrap_or(DEFAULT_SEED), caps: file.caps })
    }

    pub fn warnings(&self) -> Vec<String> {
        let d = Caps::default();
        let value = |name: &str, c: &Caps| match name {
            "partition" => c.partition,
            "exact" => c.exact,
            "mwm" => c.mwm,
            _ => c.star,
        };
        self.caps
            .overridden()
            .into_iter()
            .map(|name| {
                format!(
                    "cap {name} overridden to {} (default {}); brute force above the default may be very slow",
                    value(name, &self.caps),
                    value(name, &d)
                )
            })
            .collect()
    }

    pub fn seed_or(&self, flag: Option<u64>) -> u64 {
        flag.unwrap_or(self.seed)
    }
}
