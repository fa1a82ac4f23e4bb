//! Resource limits and tuning constants.
//!
//! Limits can be read from a plain `key = value` file; any key left out keeps
//! its default.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    /// Sieve bound of the factorizer; inputs up to its square are accepted.
    pub factor_limit: u64,
    /// Largest range for the exact rational sums over `n <= x`.
    pub sum_limit: u64,
    /// Largest height handled by the direct O(B^3) surface search.
    pub direct_limit: u64,
    /// Largest height handled by the torsor enumerator.
    pub torsor_limit: u64,
    /// Largest number of box cells an exhaustive form counter may visit.
    pub box_limit: u64,
    /// The small exponent used in the calibrated bounds.
    pub eps: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            factor_limit: 1_000_000,
            sum_limit: 100_000,
            direct_limit: 500,
            torsor_limit: 100_000,
            box_limit: 1 << 32,
            eps: 0.1,
        }
    }
}

impl FromStr for Limits {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))
    }
}

impl Limits {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    pub(crate) fn check_box(&self, what: &'static str, cells: u128) -> Result<()> {
        if cells > self.box_limit as u128 {
            return Err(Error::limit(what, cells, self.box_limit));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let l = "direct_limit = 50\neps = 0.2\n".parse::<Limits>().unwrap();
        assert_eq!(l.direct_limit, 50);
        assert_eq!(l.eps, 0.2);
        assert_eq!(l.torsor_limit, Limits::default().torsor_limit);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!("bogus = 1".parse::<Limits>().is_err());
    }
}
